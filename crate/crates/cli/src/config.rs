//! Scenario files and random period matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use torelli_core::abelian::DEFAULT_EPS;
use torelli_core::theta::DEFAULT_MAX_RADIUS;
use torelli_core::torsion::DEFAULT_GROUP_CAP;
use torelli_core::PeriodMatrix;

/// `Ω = S + i(AᵗA + g·I)` with `S` symmetric, entries uniform in `[−1/2, 1/2]`,
/// and `A` uniform in `[−1, 1]`.
pub fn random_period_matrix(g: usize, seed: u64) -> PeriodMatrix {
    assert!(g >= 1, "dimension must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = DMatrix::<f64>::zeros(g, g);
    for i in 0..g {
        for j in i..g {
            let v = rng.random_range(-0.5..=0.5);
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    let a = DMatrix::<f64>::from_fn(g, g, |_, _| rng.random_range(-1.0..=1.0));
    let y = a.transpose() * &a + DMatrix::<f64>::identity(g, g) * g as f64;
    // AᵗA is symmetric in exact arithmetic; copy one triangle so it is bitwise
    let omega = DMatrix::from_fn(g, g, |i, j| {
        let (p, q) = if i <= j { (i, j) } else { (j, i) };
        Complex64::new(s[(p, q)], y[(p, q)])
    });
    PeriodMatrix::new(omega)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomOmega {
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OmegaInput {
    Random { random: RandomOmega },
    /// Rows of `[re, im]` pairs.
    Entries(Vec<Vec<[f64; 2]>>),
}

impl OmegaInput {
    pub fn random(seed: u64) -> Self {
        OmegaInput::Random { random: RandomOmega { seed } }
    }

    /// The matrix, or a message when the entries do not form a `g×g` matrix.
    pub fn resolve(&self, g: usize) -> Result<PeriodMatrix, String> {
        match self {
            OmegaInput::Random { random } => {
                if g == 0 {
                    return Err("g must be positive".into());
                }
                Ok(random_period_matrix(g, random.seed))
            }
            OmegaInput::Entries(rows) => {
                if rows.len() != g || rows.iter().any(|r| r.len() != g) {
                    return Err(format!("omega must be a {g}×{g} matrix"));
                }
                Ok(PeriodMatrix::new(DMatrix::from_fn(g, g, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1]))))
            }
        }
    }
}

/// The level `n` of `μ_n`, either fixed or `g − 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "LevelRepr", into = "LevelRepr")]
pub enum LevelInput {
    Fixed(u64),
    GMinusOne,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum LevelRepr {
    Int(u64),
    Token(String),
}

impl TryFrom<LevelRepr> for LevelInput {
    type Error = String;

    fn try_from(r: LevelRepr) -> Result<Self, String> {
        match r {
            LevelRepr::Int(0) => Err("n must be at least 1".into()),
            LevelRepr::Int(n) => Ok(LevelInput::Fixed(n)),
            LevelRepr::Token(t) if t == "g-1" => Ok(LevelInput::GMinusOne),
            LevelRepr::Token(t) => Err(format!("n must be a positive integer or \"g-1\", got {t:?}")),
        }
    }
}

impl From<LevelInput> for LevelRepr {
    fn from(l: LevelInput) -> Self {
        match l {
            LevelInput::Fixed(n) => LevelRepr::Int(n),
            LevelInput::GMinusOne => LevelRepr::Token("g-1".into()),
        }
    }
}

impl LevelInput {
    /// The resolved level and a note when `g − 1` had to be raised to 1.
    pub fn resolve(self, g: usize) -> (u64, Option<String>) {
        match self {
            LevelInput::Fixed(n) => (n, None),
            LevelInput::GMinusOne if g >= 2 => (g as u64 - 1, None),
            LevelInput::GMinusOne => (
                1,
                Some("n = g-1 = 0 is not a level of a multiplication map; using n = 1".into()),
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Caps {
    /// Largest finite group or index set that may be enumerated.
    pub group: u64,
    /// Largest lattice-sum box radius at the base truncation.
    pub radius: usize,
    /// Largest number of entries of the `μ_n` matrix.
    pub matrix_entries: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { group: DEFAULT_GROUP_CAP, radius: DEFAULT_MAX_RADIUS, matrix_entries: 4_000_000 }
    }
}

/// Optional property checks run after the main pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ExtraCheck {
    /// Coefficient matrix of the addition formula at level `n`, with the
    /// commutative-diagram test at `b_samples` random points.
    Wirtinger { b_samples: usize },
    /// Rank of the level-`(n+1)` evaluation vectors on `(1/torsion)Λ/Λ`.
    Spanning { torsion: u64 },
    /// `μ_n` surjective implies `μ_{n+1}` surjective.
    Monotonicity,
    QuasiPeriodicity { levels: Vec<u64>, lattice_vectors: usize, points: usize },
    ThetaTilde { levels: Vec<u64>, points: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub g: usize,
    #[serde(rename = "type")]
    pub divisors: Vec<u64>,
    pub omega: OmegaInput,
    pub n: LevelInput,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_true")]
    pub simple_asserted: bool,
    #[serde(default)]
    pub caps: Caps,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra_checks: Vec<ExtraCheck>,
}

fn default_eps() -> f64 {
    DEFAULT_EPS
}

fn default_true() -> bool {
    true
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs always serialize")
    }
}
