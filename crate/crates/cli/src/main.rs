//! Command-line front end: batch certification runs, family sweeps,
//! middle-case screening and the scenario registry.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pseudotoric::scenario::{
    emit_family_report, emit_figure, emit_report, render_family, render_report, run_family, run_scenario,
    screen_scenario, ConfigFile, Format, ScenarioId, ScenarioSpec, TorusKind,
};
use pseudotoric::Error;

#[derive(Parser)]
#[command(name = "pseudotoric", version, about = "Certify Lagrangian tori in pseudotoric Fano manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario end to end.
    Run(RunArgs),
    /// Print the scenario registry.
    List,
    /// Sweep a deformation family over a t-grid.
    Family(RunArgs),
    /// Middle-case table for the relations of a scenario.
    Screen(RunArgs),
}

#[derive(Args, Clone)]
struct RunArgs {
    #[arg(long)]
    scenario: Option<String>,
    /// JSON file with {scenario, params, tolerances, output}; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    torus_kind: Option<String>,
    #[arg(long)]
    center: Option<usize>,
    /// Area and residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Loop and fiber sample counts, e.g. 64,8.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    t_grid: Option<Vec<f64>>,
    #[arg(long)]
    report: Option<PathBuf>,
    /// json, text or csv.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    figure: Option<PathBuf>,
}

struct Outputs {
    report: Option<PathBuf>,
    format: Format,
    figure: Option<PathBuf>,
}

fn build_spec(a: &RunArgs) -> Result<(ScenarioSpec, Outputs), Error> {
    let config = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
            Some(ConfigFile::parse(&text)?)
        }
        None => None,
    };
    let name = a
        .scenario
        .clone()
        .or_else(|| config.as_ref().and_then(|c| c.scenario.clone()))
        .ok_or_else(|| Error::Invalid("no scenario given".into()))?;
    let mut spec = ScenarioSpec::new(ScenarioId::parse(&name)?);
    if let Some(c) = &config {
        c.apply(&mut spec)?;
    }
    if let Some(n) = a.n {
        spec.n = n;
    }
    if let Some(t) = a.t {
        spec.t = t;
    }
    if let Some(k) = &a.torus_kind {
        spec.torus_kind = TorusKind::parse(k)?;
    }
    if let Some(c) = a.center {
        spec.center = c;
    }
    if let Some(x) = a.tol {
        spec.tolerances.area = x;
        spec.tolerances.residual = x;
    }
    if let Some(s) = a.samples {
        spec.samples = s;
    }
    if let Some(g) = &a.grid {
        match g.as_slice() {
            [l, f] => spec.grid = [*l, *f],
            _ => return Err(Error::Invalid("--grid takes two counts".into())),
        }
    }
    if let Some(g) = &a.t_grid {
        spec.t_grid = g.clone();
    }
    spec.validate()?;
    let out = config.map(|c| c.output).unwrap_or_default();
    let format = match a.format.clone().or(out.format) {
        Some(f) => Format::parse(&f)?,
        None => Format::Text,
    };
    let outputs = Outputs {
        report: a.report.clone().or(out.report.map(PathBuf::from)),
        format,
        figure: a.figure.clone().or(out.figure.map(PathBuf::from)),
    };
    Ok((spec, outputs))
}

fn list() {
    for id in ScenarioId::ALL {
        println!("{:<16} {}", id.name(), id.description());
    }
}

fn run(a: &RunArgs) -> Result<bool, Error> {
    let (spec, out) = build_spec(a)?;
    if spec.id.is_family() {
        return Err(Error::Invalid(format!("{} is a family; use the family command", spec.id.name())));
    }
    let report = run_scenario(&spec)?;
    match &out.report {
        Some(p) => emit_report(&report, out.format, p)?,
        None => print!("{}", render_report(&report, out.format)?),
    }
    if let Some(p) = &out.figure {
        emit_figure(&report, p)?;
    }
    for e in &report.errors {
        eprintln!("error: {e}");
    }
    for m in &report.expectation.mismatches {
        eprintln!("diverged: {m}");
    }
    Ok(report.expectation.matched)
}

fn family(a: &RunArgs) -> Result<bool, Error> {
    let (spec, out) = build_spec(a)?;
    if !spec.id.is_family() {
        return Err(Error::Invalid(format!("{} is not a family", spec.id.name())));
    }
    let fam = run_family(&spec)?;
    match &out.report {
        Some(p) => emit_family_report(&fam, out.format, p)?,
        None => print!("{}", render_family(&fam, out.format)?),
    }
    for v in &fam.stability.violations {
        eprintln!("stability: {v}");
    }
    let mut ok = fam.stability.stable;
    for r in &fam.reports {
        for m in &r.expectation.mismatches {
            eprintln!("diverged at t = {}: {m}", r.spec.t);
        }
        ok &= r.expectation.matched;
    }
    Ok(ok)
}

fn screen(a: &RunArgs) -> Result<bool, Error> {
    let (spec, _) = build_spec(a)?;
    let rows = screen_scenario(&spec)?;
    println!("{:<20} {:<20} {:>6} {:>9} {:>7} {:>7}", "lambda", "rho", "total", "positive", "margin", "middle");
    for r in rows {
        println!(
            "{:<20} {:<20} {:>6} {:>9} {:>7} {:>7}",
            format!("{:?}", r.lambda),
            format!("{:?}", r.rho),
            r.total,
            r.positive,
            r.margin,
            r.middle
        );
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::List => {
            list();
            Ok(true)
        }
        Command::Run(a) => run(a),
        Command::Family(a) => family(a),
        Command::Screen(a) => screen(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
