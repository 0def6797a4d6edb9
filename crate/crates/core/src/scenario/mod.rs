//! Scenario registry, certification pipeline, reports and figures.

mod figure;
mod report;
mod run;

pub use figure::{emit_figure, render_svg};
pub use report::{
    emit_family_report, emit_report, render_family, render_report, BranchRow, CertificationReport, ExpectationCheck,
    FamilyReport, Format, LoopInfo, MiddleCaseLine, Residuals, Stability, CSV_COLUMNS,
};
pub use run::{run_family, run_scenario, screen_scenario};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::LoopSpec;
use crate::registry::T_MIN;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioId {
    Cp2Chekanov,
    P1xp1Chekanov,
    P1PowerN,
    Quadric4,
    FlagF3,
    Quadric4Family,
    FlagFamily,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 7] = [
        ScenarioId::Cp2Chekanov,
        ScenarioId::P1xp1Chekanov,
        ScenarioId::P1PowerN,
        ScenarioId::Quadric4,
        ScenarioId::FlagF3,
        ScenarioId::Quadric4Family,
        ScenarioId::FlagFamily,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ScenarioId::Cp2Chekanov => "cp2_chekanov",
            ScenarioId::P1xp1Chekanov => "p1xp1_chekanov",
            ScenarioId::P1PowerN => "p1_power_n",
            ScenarioId::Quadric4 => "quadric4",
            ScenarioId::FlagF3 => "flag_f3",
            ScenarioId::Quadric4Family => "quadric4_family",
            ScenarioId::FlagFamily => "flag_family",
        }
    }

    pub fn parse(s: &str) -> Result<ScenarioId> {
        ScenarioId::ALL
            .iter()
            .copied()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown scenario {s}")))
    }

    pub fn description(&self) -> &'static str {
        match self {
            ScenarioId::Cp2Chekanov => "CP2, line section, Chekanov torus of area 1/3",
            ScenarioId::P1xp1Chekanov => "CP1 x CP1, diagonal section, Chekanov torus of area 1/2",
            ScenarioId::P1PowerN => "(CP1)^n, diagonal section, Chekanov torus of area 1/2 (--n)",
            ScenarioId::Quadric4 => {
                "4-dimensional quadric, conic section (--torus-kind chekanov|standard_k, --center i)"
            }
            ScenarioId::FlagF3 => "full flag F3 in CP2 x CP2 (--torus-kind chekanov_search|standard)",
            ScenarioId::Quadric4Family => "quadric family Q_t (--t-grid)",
            ScenarioId::FlagFamily => "flag family U_t (--t-grid)",
        }
    }

    pub fn is_family(&self) -> bool {
        matches!(self, ScenarioId::Quadric4Family | ScenarioId::FlagFamily)
    }

    pub fn default_kind(&self) -> TorusKind {
        match self {
            ScenarioId::Quadric4Family => TorusKind::Standard(2),
            ScenarioId::FlagF3 => TorusKind::ChekanovSearch,
            ScenarioId::FlagFamily => TorusKind::Standard(1),
            _ => TorusKind::Chekanov,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TorusKind {
    Chekanov,
    ChekanovSearch,
    /// Standard loop; for the quadric `k/8` of the section area, for the flag
    /// the loop of area 1/2.
    Standard(u32),
}

impl TorusKind {
    pub fn parse(s: &str) -> Result<TorusKind> {
        match s {
            "chekanov" => Ok(TorusKind::Chekanov),
            "chekanov_search" => Ok(TorusKind::ChekanovSearch),
            "standard" => Ok(TorusKind::Standard(1)),
            _ => s
                .strip_prefix("standard_")
                .and_then(|k| k.parse().ok())
                .filter(|k| (1..=3).contains(k))
                .map(TorusKind::Standard)
                .ok_or_else(|| Error::Invalid(format!("unknown torus kind {s}"))),
        }
    }

    pub fn label(&self) -> String {
        match self {
            TorusKind::Chekanov => "chekanov".into(),
            TorusKind::ChekanovSearch => "chekanov_search".into(),
            TorusKind::Standard(k) => format!("standard_{k}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub area: f64,
    pub residual: f64,
    pub bs: f64,
    pub winding: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { area: 1e-6, residual: 1e-6, bs: 1e-4, winding: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub id: ScenarioId,
    pub n: usize,
    pub t: f64,
    pub torus_kind: TorusKind,
    /// Branch point `p_i^+` used as the centre of standard quadric loops.
    pub center: usize,
    pub tolerances: Tolerances,
    /// Samples along the loop and along each fiber circle.
    pub grid: [usize; 2],
    /// Random points for the Poisson and invariance checks.
    pub samples: usize,
    pub t_grid: Vec<f64>,
    /// Use this loop instead of searching for one.
    #[serde(default)]
    pub loop_override: Option<LoopSpec>,
}

impl ScenarioSpec {
    pub fn new(id: ScenarioId) -> Self {
        ScenarioSpec {
            id,
            n: 2,
            t: 1.0,
            torus_kind: id.default_kind(),
            center: 1,
            tolerances: Tolerances::default(),
            grid: [64, 8],
            samples: 50,
            t_grid: vec![0.1, 0.25, 0.5, 1.0],
            loop_override: None,
        }
    }

    pub fn with_kind(mut self, kind: TorusKind) -> Self {
        self.torus_kind = kind;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Invalid(m));
        if self.id == ScenarioId::P1PowerN && self.n < 2 {
            return bad(format!("n = {} must be at least 2", self.n));
        }
        if !(T_MIN..=1.0).contains(&self.t) {
            return bad(format!("t = {} outside [{T_MIN}, 1]", self.t));
        }
        if self.id.is_family() && self.t_grid.iter().any(|t| !(T_MIN..=1.0).contains(t)) {
            return bad(format!("t-grid {:?} leaves [{T_MIN}, 1]", self.t_grid));
        }
        if !(1..=3).contains(&self.center) {
            return bad(format!("center index {} outside 1..3", self.center));
        }
        if self.grid.iter().any(|&g| g < 8) {
            return bad("grid needs at least 8 samples per axis".into());
        }
        let kind_ok = match self.id {
            ScenarioId::Quadric4 | ScenarioId::Quadric4Family => {
                matches!(self.torus_kind, TorusKind::Chekanov | TorusKind::Standard(_))
            }
            ScenarioId::FlagF3 | ScenarioId::FlagFamily => {
                matches!(self.torus_kind, TorusKind::ChekanovSearch | TorusKind::Standard(1))
            }
            _ => self.torus_kind == TorusKind::Chekanov,
        };
        if !kind_ok {
            return bad(format!("torus kind {} not available for {}", self.torus_kind.label(), self.id.name()));
        }
        let t = &self.tolerances;
        if [t.area, t.residual, t.bs, t.winding].iter().any(|&x| !(x > 0.0 && x < 0.5)) {
            return bad("tolerances must lie in (0, 0.5)".into());
        }
        Ok(())
    }

    /// Key into the expectation table.
    pub fn expectation_key(&self) -> String {
        match self.id {
            ScenarioId::P1PowerN => format!("p1_power_{}", self.n),
            ScenarioId::Quadric4 | ScenarioId::FlagF3 | ScenarioId::Quadric4Family | ScenarioId::FlagFamily => {
                format!("{}/{}", self.id.name(), self.torus_kind.label())
            }
            _ => self.id.name().to_string(),
        }
    }
}

/// Expected outcomes shipped with the crate.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Expectation {
    pub section_area: Option<f64>,
    pub covering_degree: Option<usize>,
    pub branch_points: Option<usize>,
    pub piece_area: Option<f64>,
    pub disc_area: Option<f64>,
    pub periods: Option<Vec<f64>>,
    pub bs_level: Option<u32>,
    pub bs_canonical: Option<bool>,
    pub maslov_degree: Option<i64>,
    pub verdict: Option<String>,
    pub middle: Option<bool>,
    pub margin: Option<i64>,
    pub limit_line_index: Option<usize>,
}

pub const EXPECTATIONS_JSON: &str = include_str!("expectations.json");

pub fn expectation_for(key: &str) -> Option<Expectation> {
    let table: std::collections::BTreeMap<String, Expectation> =
        serde_json::from_str(EXPECTATIONS_JSON).expect("expectation table parses");
    table.get(key).cloned()
}

/// Optional JSON configuration: `{scenario, params, tolerances, output}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConfigFile {
    pub scenario: Option<String>,
    pub params: ConfigParams,
    pub tolerances: Option<Tolerances>,
    pub output: ConfigOutput,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConfigParams {
    pub n: Option<usize>,
    pub t: Option<f64>,
    pub torus_kind: Option<String>,
    pub center: Option<usize>,
    pub samples: Option<usize>,
    pub grid: Option<[usize; 2]>,
    pub t_grid: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConfigOutput {
    pub report: Option<String>,
    pub format: Option<String>,
    pub figure: Option<String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<ConfigFile> {
        serde_json::from_str(text).map_err(|e| Error::Invalid(format!("configuration: {e}")))
    }

    /// Applies the file on top of a spec for its scenario.
    pub fn apply(&self, spec: &mut ScenarioSpec) -> Result<()> {
        let p = &self.params;
        if let Some(n) = p.n {
            spec.n = n;
        }
        if let Some(t) = p.t {
            spec.t = t;
        }
        if let Some(k) = &p.torus_kind {
            spec.torus_kind = TorusKind::parse(k)?;
        }
        if let Some(c) = p.center {
            spec.center = c;
        }
        if let Some(s) = p.samples {
            spec.samples = s;
        }
        if let Some(g) = p.grid {
            spec.grid = g;
        }
        if let Some(g) = &p.t_grid {
            spec.t_grid = g.clone();
        }
        if let Some(t) = self.tolerances {
            spec.tolerances = t;
        }
        Ok(())
    }
}
