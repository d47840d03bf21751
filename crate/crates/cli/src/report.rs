//! Scenario reports and their JSON and table renderings.

use std::fmt::Write as _;

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

/// A float emitted with 17 significant digits (`null` when not finite).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Float(pub f64);

impl Float {
    pub fn text(self) -> String {
        if self.0.is_finite() {
            format!("{:.16e}", self.0)
        } else {
            "null".into()
        }
    }
}

impl From<f64> for Float {
    fn from(x: f64) -> Self {
        Float(x)
    }
}

impl Serialize for Float {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RawValue::from_string(self.text()).map_err(serde::ser::Error::custom)?.serialize(s)
    }
}

pub(crate) fn floats(xs: &[f64]) -> Vec<Float> {
    xs.iter().copied().map(Float).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Inputs {
    pub g: usize,
    #[serde(rename = "type")]
    pub divisors: Vec<u64>,
    /// Resolved `Ω` as rows of `[re, im]`.
    pub omega: Option<Vec<Vec<[Float; 2]>>>,
    pub omega_source: String,
    pub n: Option<u64>,
    pub n_requested: String,
    pub eps: Float,
    pub seed: u64,
    pub simple_asserted: bool,
    pub caps: CapsEcho,
}

#[derive(Debug, Clone, Serialize)]
pub struct CapsEcho {
    pub group: u64,
    pub radius: usize,
    pub matrix_entries: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct H0 {
    pub level_1: u64,
    pub level_n: u64,
    pub level_n_plus_1: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub g: u32,
    pub n: u32,
    pub exact: String,
    pub decimal: Float,
    pub least_sufficient: String,
    pub h0_exceeds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerdictReport {
    pub kind: String,
    pub source_dim: usize,
    pub target_dim: usize,
    pub dimension_shortcut: bool,
    pub rank: Option<usize>,
    pub gap: bool,
    pub gap_ratio: Option<Float>,
    pub sigma_max: Option<Float>,
    pub sigma_min_ratio: Option<Float>,
    pub singular_values: Vec<Float>,
    pub max_residual: Option<Float>,
    pub condition: Option<Float>,
    pub seed_used: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockSummary {
    pub count: usize,
    pub row_dim: usize,
    pub block_ranks: Vec<usize>,
    pub block_rank_sum: usize,
    pub total_rank: usize,
    pub off_block_mass: Float,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IttVerdict {
    Holds,
    Unknown,
}

#[derive(Debug, Clone, Serialize)]
pub struct IttReport {
    pub verdict: IttVerdict,
    /// Restated hypothesis; never computed.
    pub simple_asserted: bool,
    pub note: String,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "check", rename_all = "kebab-case")]
pub enum CheckReport {
    Wirtinger {
        n: u64,
        passed: bool,
        fit_residual: Float,
        relation_residual: Float,
        reduced_sigma_ratio: Float,
        condition: Float,
        b_samples: usize,
        diagram_residual_max: Float,
    },
    Spanning {
        n: u64,
        torsion: u64,
        passed: bool,
        group_order: usize,
        rank: usize,
        required: usize,
    },
    Monotonicity {
        n: u64,
        passed: bool,
        mu_n: String,
        mu_n_plus_1: Option<String>,
    },
    QuasiPeriodicity {
        passed: bool,
        levels: Vec<u64>,
        evaluations: usize,
        max_residual: Float,
    },
    ThetaTilde {
        passed: bool,
        levels: Vec<u64>,
        invariance_residual: Float,
        expansion_residual: Float,
    },
    Failed {
        name: String,
        error: ErrorReport,
    },
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        match self {
            CheckReport::Wirtinger { passed, .. }
            | CheckReport::Spanning { passed, .. }
            | CheckReport::Monotonicity { passed, .. }
            | CheckReport::QuasiPeriodicity { passed, .. }
            | CheckReport::ThetaTilde { passed, .. } => *passed,
            CheckReport::Failed { .. } => false,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            CheckReport::Wirtinger { .. } => "wirtinger",
            CheckReport::Spanning { .. } => "spanning",
            CheckReport::Monotonicity { .. } => "monotonicity",
            CheckReport::QuasiPeriodicity { .. } => "quasi-periodicity",
            CheckReport::ThetaTilde { .. } => "theta-tilde",
            CheckReport::Failed { name, .. } => name,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ErrorReport {
    pub stage: String,
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub validate_ms: Float,
    pub mu_ms: Float,
    pub blocks_ms: Float,
    pub checks_ms: Float,
    pub total_ms: Float,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub name: Option<String>,
    pub inputs: Option<Inputs>,
    pub h0: Option<H0>,
    pub bound: Option<BoundReport>,
    pub bound_prediction: Option<String>,
    pub verdict: Option<VerdictReport>,
    pub blocks: Option<BlockSummary>,
    pub itt: Option<IttReport>,
    pub checks: Vec<CheckReport>,
    /// Raised iff the bound predicts surjectivity and the verdict is not `Surjective`.
    pub consistency_violation: bool,
    pub notes: Vec<String>,
    pub errors: Vec<ErrorReport>,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;
pub const EXIT_INCONSISTENT: i32 = 4;

impl Report {
    pub(crate) fn empty(name: Option<String>) -> Self {
        Report {
            name,
            inputs: None,
            h0: None,
            bound: None,
            bound_prediction: None,
            verdict: None,
            blocks: None,
            itt: None,
            checks: Vec::new(),
            consistency_violation: false,
            notes: Vec::new(),
            errors: Vec::new(),
            exit_code: EXIT_OK,
            timings: None,
        }
    }

    /// Report for a scenario file that could not be parsed.
    pub fn config_error(message: impl Into<String>) -> Self {
        let mut r = Report::empty(None);
        r.errors.push(ErrorReport { stage: "config".into(), kind: "Parse".into(), message: message.into() });
        r.exit_code = r.compute_exit_code();
        r
    }

    /// 2 for unusable input, 4 for a theorem or property violation, 3 for an
    /// inconclusive or failed numerical stage, 0 otherwise.
    pub(crate) fn compute_exit_code(&self) -> i32 {
        if self.errors.iter().any(|e| e.stage == "config" || e.stage == "validate") {
            EXIT_INVALID
        } else if self.consistency_violation || self.checks.iter().any(|c| !c.passed() && !matches!(c, CheckReport::Failed { .. })) {
            EXIT_INCONSISTENT
        } else if !self.errors.is_empty()
            || self.checks.iter().any(|c| !c.passed())
            || self.verdict.as_ref().is_some_and(|v| v.kind == "Inconclusive")
        {
            EXIT_INCONCLUSIVE
        } else {
            EXIT_OK
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Table,
}

pub fn emit_report(report: &Report, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("reports always serialize");
            s.push('\n');
            s
        }
        Format::Table => table(report),
    }
}

fn opt<T: ToString>(x: &Option<T>) -> String {
    x.as_ref().map_or_else(|| "-".into(), T::to_string)
}

fn opt_f(x: Option<Float>) -> String {
    x.map_or_else(|| "-".into(), |f| format!("{:.6e}", f.0))
}

fn table(r: &Report) -> String {
    let mut out = String::new();
    let mut row = |k: &str, v: String| {
        let _ = writeln!(out, "{k:<24} {v}");
    };
    row("scenario", opt(&r.name));
    if let Some(i) = &r.inputs {
        row("g", i.g.to_string());
        row("type", format!("{:?}", i.divisors));
        row("omega", i.omega_source.clone());
        row("n", format!("{} (requested {})", opt(&i.n), i.n_requested));
        row("seed", i.seed.to_string());
        row("simple (asserted)", i.simple_asserted.to_string());
    }
    if let Some(h) = &r.h0 {
        row("h0(L), h0(L^n), h0(L^n+1)", format!("{}, {}, {}", h.level_1, h.level_n, h.level_n_plus_1));
    }
    if let Some(b) = &r.bound {
        row("bound", format!("{} ≈ {:.6} (least sufficient h0: {})", b.exact, b.decimal.0, b.least_sufficient));
    }
    row("bound prediction", opt(&r.bound_prediction));
    if let Some(v) = &r.verdict {
        row("verdict", v.kind.clone());
        row("rank / target", format!("{} / {} (source {})", opt(&v.rank), v.target_dim, v.source_dim));
        row("dimension shortcut", v.dimension_shortcut.to_string());
        row("gap ratio", opt_f(v.gap_ratio));
        row("sigma_min / sigma_max", opt_f(v.sigma_min_ratio));
        row("fit residual", opt_f(v.max_residual));
    }
    if let Some(b) = &r.blocks {
        row("blocks", format!("{} × {} rows, ranks {:?}", b.count, b.row_dim, b.block_ranks));
        row("off-block mass", format!("{:.3e}", b.off_block_mass.0));
    }
    if let Some(i) = &r.itt {
        row("ITT", format!("{:?} ({})", i.verdict, i.note));
    }
    for c in &r.checks {
        row(&format!("check {}", c.name()), if c.passed() { "pass".into() } else { "FAIL".into() });
    }
    row("consistency violation", r.consistency_violation.to_string());
    for n in &r.notes {
        row("note", n.clone());
    }
    for e in &r.errors {
        row("error", format!("[{}] {}: {}", e.stage, e.kind, e.message));
    }
    if let Some(t) = &r.timings {
        row("time (ms)", format!("{:.1} (mu {:.1}, blocks {:.1}, checks {:.1})", t.total_ms.0, t.mu_ms.0, t.blocks_ms.0, t.checks_ms.0));
    }
    row("exit code", r.exit_code.to_string());
    out
}
