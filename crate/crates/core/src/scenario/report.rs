use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::certify::{MaslovReport, MiddleCase};
use crate::error::{Error, Result};
use crate::model::LoopSpec;

use super::ScenarioSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchRow {
    /// `None` is `s = ∞`.
    pub param: Option<Complex64>,
    pub multiplicity: usize,
    /// Pencil value `[w0 : w1]` normalised to a unit representative.
    pub image: Vec<Complex64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub lagrangian: Option<f64>,
    pub poisson: Option<f64>,
    pub invariance: Option<f64>,
    pub section: Option<f64>,
    /// Largest change of a period when re-integrated one level finer.
    pub period_recheck: Option<f64>,
    pub winding: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopInfo {
    pub spec: LoopSpec,
    pub target_area: f64,
    pub disc_area: f64,
    /// Smallest chordal distance to the deck images and branch points
    /// (Chekanov loops) or to the other branch points (standard loops).
    pub clearance: f64,
    /// Deck-orbit disjointness; standard loops are deck invariant and carry `None`.
    pub deck_disjoint: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiddleCaseLine {
    pub lambda: Vec<i64>,
    pub rho: Vec<i64>,
    pub check: MiddleCase,
    pub index_boundary: usize,
    pub index_plus: usize,
    pub km: i64,
    /// A Chekanov loop of area `1/k` exists on the section.
    pub chekanov_constructible: bool,
    pub max_chekanov_area: Option<f64>,
    /// Index of the degenerate limit line with `D⁺`, where one is registered.
    pub limit_line_index: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExpectationCheck {
    pub key: String,
    pub found: bool,
    pub matched: bool,
    pub mismatches: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub scenario: String,
    pub spec: ScenarioSpec,
    pub k: u32,
    pub section_area: Option<f64>,
    pub covering_degree: Option<usize>,
    pub branch_points: Vec<BranchRow>,
    pub piece_areas: Vec<f64>,
    #[serde(rename = "loop")]
    pub loop_info: Option<LoopInfo>,
    pub periods: Vec<f64>,
    pub raw_periods: Vec<f64>,
    pub bs_level: Option<u32>,
    pub bs_canonical: Option<bool>,
    pub maslov: Option<MaslovReport>,
    pub maslov_degree: Option<i64>,
    pub expected_degree: Option<f64>,
    pub verdict: String,
    pub residuals: Residuals,
    pub middle_case: Option<MiddleCaseLine>,
    pub warnings: Vec<String>,
    pub errors: Vec<String>,
    pub expectation: ExpectationCheck,
    /// Wall-clock milliseconds per stage; not part of the deterministic content.
    pub timings: BTreeMap<String, f64>,
}

impl CertificationReport {
    pub fn failed(&self) -> bool {
        !self.errors.is_empty()
    }

    /// Copy with the timing table cleared, for byte comparisons.
    pub fn without_timings(&self) -> CertificationReport {
        CertificationReport { timings: BTreeMap::new(), ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stability {
    pub degree_constant: bool,
    pub bs_level_constant: bool,
    /// Largest spread of any period across the grid.
    pub period_spread: f64,
    pub stable: bool,
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyReport {
    pub scenario: String,
    pub t_grid: Vec<f64>,
    pub reports: Vec<CertificationReport>,
    pub stability: Stability,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
    Csv,
}

impl Format {
    pub fn parse(s: &str) -> Result<Format> {
        match s {
            "json" => Ok(Format::Json),
            "text" => Ok(Format::Text),
            "csv" => Ok(Format::Csv),
            _ => Err(Error::Invalid(format!("unknown format {s}"))),
        }
    }
}

pub const CSV_COLUMNS: [&str; 18] = [
    "scenario",
    "t",
    "n",
    "torus_kind",
    "k",
    "section_area",
    "covering_degree",
    "branch_points",
    "disc_area",
    "periods",
    "bs_level",
    "maslov_degree",
    "expected_degree",
    "verdict",
    "lagrangian_residual",
    "middle_case_margin",
    "expected_match",
    "errors",
];

fn opt<T: ToString>(x: &Option<T>) -> String {
    x.as_ref().map(|v| v.to_string()).unwrap_or_default()
}

fn num(x: f64) -> String {
    format!("{x:.10}")
}

fn csv_row(r: &CertificationReport) -> String {
    let periods: Vec<String> = r.periods.iter().map(|p| num(*p)).collect();
    let cells = [
        r.scenario.clone(),
        num(r.spec.t),
        r.spec.n.to_string(),
        r.spec.torus_kind.label(),
        r.k.to_string(),
        r.section_area.map(num).unwrap_or_default(),
        opt(&r.covering_degree),
        r.branch_points.len().to_string(),
        r.loop_info.as_ref().map(|l| num(l.disc_area)).unwrap_or_default(),
        periods.join(";"),
        opt(&r.bs_level),
        opt(&r.maslov_degree),
        r.expected_degree.map(num).unwrap_or_default(),
        r.verdict.clone(),
        r.residuals.lagrangian.map(|x| format!("{x:.3e}")).unwrap_or_default(),
        r.middle_case.as_ref().map(|m| m.check.margin.to_string()).unwrap_or_default(),
        r.expectation.matched.to_string(),
        r.errors.join(" | "),
    ];
    cells.iter().map(|c| csv_escape(c)).collect::<Vec<_>>().join(",")
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn fmt_c(z: &Option<Complex64>) -> String {
    match z {
        None => "inf".into(),
        Some(z) => format!("{:.6}{:+.6}i", z.re, z.im),
    }
}

fn text(r: &CertificationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "scenario      {} ({})", r.scenario, r.spec.torus_kind.label());
    let _ = writeln!(s, "parameters    n = {}, t = {}", r.spec.n, r.spec.t);
    let _ = writeln!(s, "k             {}", r.k);
    let _ = writeln!(s, "section area  {}", r.section_area.map(num).unwrap_or("-".into()));
    let _ = writeln!(s, "covering d    {}", opt(&r.covering_degree));
    let _ = writeln!(s, "branch points {}", r.branch_points.len());
    for b in &r.branch_points {
        let _ = writeln!(s, "  s = {:<24} mult {}", fmt_c(&b.param), b.multiplicity);
    }
    if !r.piece_areas.is_empty() {
        let p: Vec<String> = r.piece_areas.iter().map(|x| format!("{x:.8}")).collect();
        let _ = writeln!(s, "pieces        {}", p.join(", "));
    }
    if let Some(l) = &r.loop_info {
        let _ = writeln!(
            s,
            "loop          centre {} radius {:.8}, disc area {:.8}, clearance {:.4}",
            fmt_c(&Some(l.spec.center)),
            l.spec.radius,
            l.disc_area,
            l.clearance
        );
    }
    let p: Vec<String> = r.periods.iter().map(|x| format!("{x:.8}")).collect();
    let _ = writeln!(s, "periods       ({})", p.join(", "));
    let _ = writeln!(s, "BS level      {}", opt(&r.bs_level));
    if let Some(m) = &r.maslov {
        let _ = writeln!(
            s,
            "Maslov        degree {} (winding {} + enclosed {}), expected {:.6}",
            m.degree, m.winding, m.enclosed_divisor, m.expected
        );
    }
    let _ = writeln!(s, "verdict       {}", r.verdict);
    let res = &r.residuals;
    for (name, v) in [
        ("lagrangian", res.lagrangian),
        ("poisson", res.poisson),
        ("invariance", res.invariance),
        ("section", res.section),
        ("period recheck", res.period_recheck),
        ("winding", res.winding),
    ] {
        if let Some(v) = v {
            let _ = writeln!(s, "residual      {name:<15}{v:.3e}");
        }
    }
    if let Some(mc) = &r.middle_case {
        let _ = writeln!(
            s,
            "middle case   lambda {:?} rho {:?}: {} > {} is {} (margin {}); ind(D_b) {} = km {}; ind(D+) {}; Chekanov loop {}",
            mc.lambda,
            mc.rho,
            mc.check.total,
            mc.check.positive,
            mc.check.holds,
            mc.check.margin,
            mc.index_boundary,
            mc.km,
            mc.index_plus,
            if mc.chekanov_constructible { "constructible" } else { "infeasible" }
        );
        if let Some(i) = mc.limit_line_index {
            let _ = writeln!(s, "limit line    ind(L ∩ D+) = {i}");
        }
    }
    for w in &r.warnings {
        let _ = writeln!(s, "warning       {w}");
    }
    for e in &r.errors {
        let _ = writeln!(s, "error         {e}");
    }
    let ex = &r.expectation;
    let _ = writeln!(
        s,
        "expectation   {} {}",
        ex.key,
        if !ex.found {
            "(no entry)".to_string()
        } else if ex.matched {
            "matched".to_string()
        } else {
            format!("DIVERGED: {}", ex.mismatches.join("; "))
        }
    );
    s
}

pub fn render_report(r: &CertificationReport, format: Format) -> Result<String> {
    Ok(match format {
        Format::Json => to_json(r)?,
        Format::Text => text(r),
        Format::Csv => format!("{}\n{}\n", CSV_COLUMNS.join(","), csv_row(r)),
    })
}

fn to_json<T: Serialize>(x: &T) -> Result<String> {
    serde_json::to_string_pretty(x).map(|s| s + "\n").map_err(|e| Error::Invalid(format!("serialization: {e}")))
}

pub fn render_family(f: &FamilyReport, format: Format) -> Result<String> {
    Ok(match format {
        Format::Json => to_json(f)?,
        Format::Csv => {
            let mut s = CSV_COLUMNS.join(",") + "\n";
            for r in &f.reports {
                s += &csv_row(r);
                s.push('\n');
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            for r in &f.reports {
                s += &text(r);
                s.push('\n');
            }
            let st = &f.stability;
            let _ = writeln!(
                s,
                "stability     degree constant {}, BS level constant {}, period spread {:.3e}: {}",
                st.degree_constant,
                st.bs_level_constant,
                st.period_spread,
                if st.stable { "stable" } else { "VIOLATED" }
            );
            for v in &st.violations {
                let _ = writeln!(s, "violation     {v}");
            }
            s
        }
    })
}

/// Writes through a temporary file in the same directory and renames it.
pub(crate) fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let io = |e: std::io::Error| Error::Io(format!("{}: {e}", path.display()));
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| Error::Invalid(format!("{}: not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    std::fs::write(&tmp, content).map_err(io)?;
    std::fs::rename(&tmp, path).map_err(io)
}

pub fn emit_report(r: &CertificationReport, format: Format, path: &Path) -> Result<()> {
    write_atomic(path, &render_report(r, format)?)
}

pub fn emit_family_report(f: &FamilyReport, format: Format, path: &Path) -> Result<()> {
    write_atomic(path, &render_family(f, format)?)
}
