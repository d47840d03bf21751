//! The scenario pipeline: validate, bound, `μ_n`, blocks, verdict, ITT, checks.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use torelli_core::multiplication::{
    blocks_from_matrix, dimension_verdict, mu_matrix, numerical_rank, spanning_check, surjectivity_verdict,
    verdict_from_matrix, wirtinger_matrix, FiniteSubgroup, MuMatrix, PhiMap, SampleSet, SurjectivityVerdict,
    VerdictKind, RANK_TOL,
};
use torelli_core::multiplication::diagram_residual;
use torelli_core::torsion::k_group_with_cap;
use torelli_core::{
    bound_prediction, h0, torelli_bound, validate_polarized, BoundPrediction, Error, PolarizationType,
    PolarizedAbelianVariety, Theta, TruncationPlan,
};

use crate::config::{ExtraCheck, LevelInput, OmegaInput, ScenarioConfig};
use crate::report::{
    floats, BlockSummary, BoundReport, CapsEcho, CheckReport, ErrorReport, Float, Inputs, IttReport, IttVerdict,
    Report, Timings, VerdictReport, H0,
};

pub const WIRTINGER_TOL: f64 = 1e-8;
pub const REDUCED_RATIO_MIN: f64 = 1e-6;
pub const DIAGRAM_TOL: f64 = 1e-8;
pub const QUASI_PERIODICITY_TOL: f64 = 1e-9;
pub const THETA_TILDE_TOL: f64 = 1e-10;
pub const OFF_BLOCK_TOL: f64 = 1e-8;

/// `Holds` exactly when `n = g − 1` and `μ_n` is surjective; there is no
/// negative outcome because the implication has no converse.
pub fn itt_verdict(pav: &PolarizedAbelianVariety, n: u64, verdict: VerdictKind) -> IttVerdict {
    let g = pav.g() as u64;
    if g >= 2 && n == g - 1 && verdict == VerdictKind::Surjective {
        IttVerdict::Holds
    } else {
        IttVerdict::Unknown
    }
}

fn itt_note(g: u64, n: u64, verdict: Option<VerdictKind>) -> String {
    if g == 1 {
        "not applicable for g = 1: a hypersurface in an elliptic curve is a finite set of points".into()
    } else if n != g - 1 {
        format!("not applicable: the implication uses n = g-1 = {}, the scenario has n = {n}", g - 1)
    } else if verdict == Some(VerdictKind::Surjective) {
        "mu_{g-1} is surjective, so infinitesimal Torelli holds for every smooth hypersurface in |L|".into()
    } else {
        "mu_{g-1} is not known to be surjective; infinitesimal Torelli may still hold".into()
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Invalid(_) => "Invalid",
        Error::SizeLimit { .. } => "SizeLimit",
        Error::NotTorsion { .. } => "NotTorsion",
        Error::NotInGroup(_) => "NotInGroup",
        Error::NotInK1 { .. } => "NotInK1",
        Error::NotLatticeVector => "NotLatticeVector",
        Error::TruncationOverflow { .. } => "TruncationOverflow",
        Error::IllConditioned { .. } => "IllConditioned",
        Error::NotInSpan { .. } => "NotInSpan",
        Error::FitResidualTooLarge { .. } => "FitResidualTooLarge",
        Error::NotPrincipal(_) => "NotPrincipal",
        Error::InvalidArgument(_) => "InvalidArgument",
    }
}

fn error_report(stage: &str, e: &Error) -> ErrorReport {
    ErrorReport { stage: stage.into(), kind: error_kind(e).into(), message: e.to_string() }
}

pub fn run_scenario(config: &ScenarioConfig) -> Report {
    run(config, false)
}

/// As [`run_scenario`], with wall-clock timings attached to the report.
pub fn run_scenario_timed(config: &ScenarioConfig) -> Report {
    run(config, true)
}

fn ms(t: Instant) -> Float {
    Float(t.elapsed().as_secs_f64() * 1e3)
}

fn level_h0(g: usize, deg: u64, m: u64) -> u128 {
    (m as u128).saturating_pow(g as u32).saturating_mul(deg as u128)
}

fn run(config: &ScenarioConfig, timed: bool) -> Report {
    let start = Instant::now();
    let mut r = Report::empty(config.name.clone());
    let g = config.g;
    let (n, note) = config.n.resolve(g);
    r.notes.extend(note);
    let omega = config.omega.resolve(g);
    r.inputs = Some(Inputs {
        g,
        divisors: config.divisors.clone(),
        omega: omega.as_ref().ok().map(|p| {
            let m = p.matrix();
            (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [Float(m[(i, j)].re), Float(m[(i, j)].im)]).collect()).collect()
        }),
        omega_source: match &config.omega {
            OmegaInput::Random { random } => format!("random(seed={})", random.seed),
            OmegaInput::Entries(_) => "explicit".into(),
        },
        n: Some(n),
        n_requested: match config.n {
            LevelInput::Fixed(k) => k.to_string(),
            LevelInput::GMinusOne => "g-1".into(),
        },
        eps: Float(config.eps),
        seed: config.seed,
        simple_asserted: config.simple_asserted,
        caps: CapsEcho { group: config.caps.group, radius: config.caps.radius, matrix_entries: config.caps.matrix_entries },
    });
    let finish = |mut r: Report| {
        r.exit_code = r.compute_exit_code();
        if timed && r.timings.is_none() {
            let total = ms(start);
            r.timings = Some(Timings { validate_ms: total, mu_ms: Float(0.0), blocks_ms: Float(0.0), checks_ms: Float(0.0), total_ms: total });
        }
        r
    };

    let omega = match omega {
        Ok(o) => o,
        Err(message) => {
            r.errors.push(ErrorReport { stage: "validate".into(), kind: "InvalidArgument".into(), message });
            return finish(r);
        }
    };
    let pav = match validate_polarized(omega, PolarizationType::new(config.divisors.clone()), config.simple_asserted, config.eps) {
        Ok(p) => p,
        Err(e) => {
            r.errors.push(error_report("validate", &e));
            return finish(r);
        }
    };
    let deg = pav.delta().degree();
    let sizes = [level_h0(g, deg, 1), level_h0(g, deg, n), level_h0(g, deg, n + 1)];
    if sizes[2] > config.caps.group as u128 || sizes[0] * sizes[1] * sizes[2] > config.caps.matrix_entries as u128 {
        let e = Error::SizeLimit { level: n + 1, size: sizes[0] * sizes[1] * sizes[2], cap: config.caps.matrix_entries };
        r.errors.push(error_report("size", &e));
        return finish(r);
    }
    let plan = TruncationPlan { max_radius: config.caps.radius, ..TruncationPlan::new(pav.eps(), pav.im_min_eigenvalue()) };
    let theta = Theta::new(&pav).with_plan(plan).with_group_cap(config.caps.group);
    let validate_ms = ms(start);

    r.h0 = Some(H0 { level_1: h0(&pav, 1), level_n: h0(&pav, n), level_n_plus_1: h0(&pav, n + 1) });
    let bound = torelli_bound(g as u32, n as u32);
    r.bound = Some(BoundReport {
        g: g as u32,
        n: n as u32,
        exact: bound.exact(),
        decimal: Float(bound.decimal()),
        least_sufficient: bound.least_sufficient.to_string(),
        h0_exceeds: bound.is_exceeded_by(h0(&pav, 1)),
    });
    let prediction = bound_prediction(&pav, n as u32);
    r.bound_prediction = Some(format!("{prediction:?}"));
    if !config.simple_asserted {
        r.notes.push("simplicity not asserted: the section-count bound gives no prediction".into());
    }

    let mu_start = Instant::now();
    let mu = mu_matrix(&theta, n, config.seed);
    let mu_ms = ms(mu_start);
    let mut kind = None;
    let blocks_start = Instant::now();
    match &mu {
        Ok(mu) => {
            let verdict = verdict_report(&theta, n, mu, &mut r);
            kind = Some(verdict);
            match blocks_from_matrix(&theta, mu) {
                Ok(b) => {
                    if b.block_rank_sum != b.total_rank || b.off_block_mass.is_nan() || b.off_block_mass >= OFF_BLOCK_TOL {
                        r.errors.push(ErrorReport {
                            stage: "blocks".into(),
                            kind: "BlockMismatch".into(),
                            message: format!(
                                "block ranks sum to {} against total rank {}, off-block mass {:e}",
                                b.block_rank_sum, b.total_rank, b.off_block_mass
                            ),
                        });
                    }
                    r.blocks = Some(BlockSummary {
                        count: b.blocks.len(),
                        row_dim: b.row_dim,
                        block_ranks: b.blocks.iter().map(|k| k.rank.rank).collect(),
                        block_rank_sum: b.block_rank_sum,
                        total_rank: b.total_rank,
                        off_block_mass: Float(b.off_block_mass),
                    });
                }
                Err(e) => r.errors.push(error_report("blocks", &e)),
            }
        }
        Err(e) => {
            r.errors.push(error_report("mu", e));
            // the dimension count still decides some cases without the matrix
            if let Some(v) = dimension_verdict(&theta, n) {
                r.verdict = Some(verdict_fields(&v, None));
                kind = Some(v.kind);
            }
        }
    }
    let blocks_ms = ms(blocks_start);

    r.itt = Some(IttReport {
        verdict: itt_verdict(&pav, n, kind.unwrap_or(VerdictKind::Inconclusive)),
        simple_asserted: config.simple_asserted,
        note: itt_note(g as u64, n, kind),
    });

    let checks_start = Instant::now();
    for (k, check) in config.extra_checks.iter().enumerate() {
        let seed = config.seed.wrapping_add(1000 * (k as u64 + 1));
        r.checks.push(run_check(&theta, n, check, kind, seed));
    }
    let checks_ms = ms(checks_start);

    r.consistency_violation =
        prediction == BoundPrediction::TheoremPredictsSurjective && kind != Some(VerdictKind::Surjective);
    if timed {
        r.timings = Some(Timings { validate_ms, mu_ms, blocks_ms, checks_ms, total_ms: ms(start) });
    }
    finish(r)
}

fn verdict_fields(v: &SurjectivityVerdict, mu: Option<&MuMatrix>) -> VerdictReport {
    let s = &v.singular_values;
    VerdictReport {
        kind: format!("{:?}", v.kind),
        source_dim: v.source_dim,
        target_dim: v.target_dim,
        dimension_shortcut: v.dimension_shortcut,
        rank: v.rank,
        gap: v.gap,
        gap_ratio: v.gap_ratio.map(Float),
        sigma_max: s.first().copied().map(Float),
        sigma_min_ratio: match (s.first(), v.rank) {
            (Some(&hi), Some(k)) if hi > 0.0 && k > 0 => Some(Float(s[k - 1] / hi)),
            _ => None,
        },
        singular_values: floats(s),
        max_residual: mu.map(|m| Float(m.max_residual)),
        condition: mu.map(|m| Float(m.condition)),
        seed_used: mu.map(|m| m.seed_used),
    }
}

/// Verdict from the matrix; when the dimension count already rules out
/// surjectivity that is the verdict, and the numerical rank must agree.
fn verdict_report(theta: &Theta, n: u64, mu: &MuMatrix, r: &mut Report) -> VerdictKind {
    let numeric = verdict_from_matrix(mu);
    let verdict = match dimension_verdict(theta, n) {
        Some(short) => {
            let rank = numerical_rank(&mu.matrix, RANK_TOL);
            if rank.rank >= short.target_dim {
                r.errors.push(ErrorReport {
                    stage: "verdict".into(),
                    kind: "ShortcutMismatch".into(),
                    message: format!("numerical rank {} reaches the target {} of a too-small source", rank.rank, short.target_dim),
                });
            }
            SurjectivityVerdict { rank: Some(rank.rank), singular_values: rank.singular_values, gap: rank.gap, ..short }
        }
        None => numeric,
    };
    r.verdict = Some(verdict_fields(&verdict, Some(mu)));
    verdict.kind
}

fn run_check(theta: &Theta, n: u64, check: &ExtraCheck, mu_n: Option<VerdictKind>, seed: u64) -> CheckReport {
    let name = match check {
        ExtraCheck::Wirtinger { .. } => "wirtinger",
        ExtraCheck::Spanning { .. } => "spanning",
        ExtraCheck::Monotonicity => "monotonicity",
        ExtraCheck::QuasiPeriodicity { .. } => "quasi-periodicity",
        ExtraCheck::ThetaTilde { .. } => "theta-tilde",
    };
    let result = match check {
        ExtraCheck::Wirtinger { b_samples } => wirtinger_check(theta, n, *b_samples, seed),
        ExtraCheck::Spanning { torsion } => spanning(theta, n, *torsion),
        ExtraCheck::Monotonicity => monotonicity(theta, n, mu_n, seed),
        ExtraCheck::QuasiPeriodicity { levels, lattice_vectors, points } => {
            quasi_periodicity(theta, levels, *lattice_vectors, *points, seed)
        }
        ExtraCheck::ThetaTilde { levels, points } => theta_tilde(theta, levels, *points, seed),
    };
    result.unwrap_or_else(|e| CheckReport::Failed { name: name.into(), error: error_report(name, &e) })
}

fn wirtinger_check(theta: &Theta, n: u64, b_samples: usize, seed: u64) -> Result<CheckReport, Error> {
    let w = wirtinger_matrix(theta, n, seed)?;
    let phi = PhiMap::new(theta, n, seed.wrapping_add(1))?;
    let bs = SampleSet::new(theta, b_samples, seed.wrapping_add(2)).points;
    let mut diagram = 0.0_f64;
    for b in &bs {
        diagram = diagram.max(diagram_residual(&phi, theta, &w, b)?);
    }
    let ratio = w.reduced_sigma_ratio();
    let passed = w.fit_residual < WIRTINGER_TOL
        && w.relation_residual < WIRTINGER_TOL
        && ratio > REDUCED_RATIO_MIN
        && diagram < DIAGRAM_TOL;
    Ok(CheckReport::Wirtinger {
        n,
        passed,
        fit_residual: Float(w.fit_residual),
        relation_residual: Float(w.relation_residual),
        reduced_sigma_ratio: Float(ratio),
        condition: Float(w.condition),
        b_samples,
        diagram_residual_max: Float(diagram),
    })
}

fn spanning(theta: &Theta, n: u64, torsion: u64) -> Result<CheckReport, Error> {
    let size = (torsion as u128).saturating_pow(2 * theta.g() as u32);
    if size > theta.group_cap() as u128 {
        return Err(Error::SizeLimit { level: torsion, size, cap: theta.group_cap() });
    }
    let s = spanning_check(theta, n, &FiniteSubgroup::Torsion(torsion))?;
    Ok(CheckReport::Spanning {
        n,
        torsion,
        passed: s.spans(),
        group_order: s.group_order,
        rank: s.rank,
        required: s.required,
    })
}

fn monotonicity(theta: &Theta, n: u64, mu_n: Option<VerdictKind>, seed: u64) -> Result<CheckReport, Error> {
    let mu_n = match mu_n {
        Some(k) => k,
        None => surjectivity_verdict(theta, n, seed)?.kind,
    };
    let next = if mu_n == VerdictKind::Surjective { Some(surjectivity_verdict(theta, n + 1, seed)?.kind) } else { None };
    Ok(CheckReport::Monotonicity {
        n,
        passed: next.is_none_or(|k| k == VerdictKind::Surjective),
        mu_n: format!("{mu_n:?}"),
        mu_n_plus_1: next.map(|k| format!("{k:?}")),
    })
}

fn random_point(theta: &Theta, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let g = theta.g();
    let a: Vec<f64> = (0..g).map(|_| rng.random::<f64>()).collect();
    let b: Vec<f64> = (0..g).map(|_| rng.random::<f64>()).collect();
    theta.pav().point(&a, &b)
}

fn quasi_periodicity(
    theta: &Theta,
    levels: &[u64],
    lattice_vectors: usize,
    points: usize,
    seed: u64,
) -> Result<CheckReport, Error> {
    use torelli_core::theta::quasi_periodicity_residual;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = theta.delta().divisors().to_vec();
    let mut worst = 0.0_f64;
    let mut evaluations = 0;
    for &m in levels {
        let indices = theta.indices(m)?;
        for _ in 0..lattice_vectors {
            let a: Vec<f64> = (0..d.len()).map(|_| rng.random_range(-2..=2) as f64).collect();
            let b: Vec<f64> = d.iter().map(|&di| (rng.random_range(-2..=2_i64) * di as i64) as f64).collect();
            for _ in 0..points {
                let z = random_point(theta, &mut rng);
                for idx in &indices {
                    worst = worst.max(quasi_periodicity_residual(theta, idx, &a, &b, &z)?);
                    evaluations += 1;
                }
            }
        }
    }
    Ok(CheckReport::QuasiPeriodicity {
        passed: worst < QUASI_PERIODICITY_TOL,
        levels: levels.to_vec(),
        evaluations,
        max_residual: Float(worst),
    })
}

fn theta_tilde(theta: &Theta, levels: &[u64], points: usize, seed: u64) -> Result<CheckReport, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut invariance, mut expansion) = (0.0_f64, 0.0_f64);
    for &n in levels {
        let group = k_group_with_cap(theta.pav(), n, theta.group_cap())?;
        let indices = theta.indices(n)?;
        for _ in 0..points {
            let z = random_point(theta, &mut rng);
            let base = theta.theta_tilde_normalized(n, &z)?;
            for x in &group.k1 {
                let moved = theta.theta_tilde_translate_normalized(n, &x.a_f64(), &z)?;
                invariance = invariance.max((moved - base).norm());
            }
            let mut sum = Complex64::new(0.0, 0.0);
            for idx in &indices {
                sum += theta.eval_normalized(idx, &z)?;
            }
            expansion = expansion.max((sum - base).norm());
        }
    }
    Ok(CheckReport::ThetaTilde {
        passed: invariance < THETA_TILDE_TOL && expansion < THETA_TILDE_TOL,
        levels: levels.to_vec(),
        invariance_residual: Float(invariance),
        expansion_residual: Float(expansion),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{catalog, find};
    use crate::config::Caps;
    use crate::report::{emit_report, Format, EXIT_INCONCLUSIVE, EXIT_INVALID, EXIT_OK};
    use torelli_core::PeriodMatrix;

    fn pav(divisors: &[u64]) -> PolarizedAbelianVariety {
        let g = divisors.len();
        validate_polarized(crate::random_period_matrix(g, 5), PolarizationType::new(divisors.to_vec()), true, 1e-12).unwrap()
    }

    #[test]
    fn itt_grammar() {
        assert_eq!(itt_verdict(&pav(&[3, 3]), 1, VerdictKind::Surjective), IttVerdict::Holds);
        assert_eq!(itt_verdict(&pav(&[1, 1]), 1, VerdictKind::NotSurjective), IttVerdict::Unknown);
        assert_eq!(itt_verdict(&pav(&[1, 1]), 1, VerdictKind::Inconclusive), IttVerdict::Unknown);
        assert_eq!(itt_verdict(&pav(&[3, 3]), 2, VerdictKind::Surjective), IttVerdict::Unknown);
        assert_eq!(itt_verdict(&pav(&[3]), 1, VerdictKind::Surjective), IttVerdict::Unknown);
    }

    #[test]
    fn malformed_type_is_a_validation_error() {
        let mut c = find("surface-33").unwrap();
        c.divisors = vec![3, 2];
        let r = run_scenario(&c);
        assert_eq!(r.exit_code, EXIT_INVALID);
        assert_eq!(r.errors[0].kind, "Invalid");
        assert!(r.verdict.is_none() && r.itt.is_none());

        let mut c = find("surface-33").unwrap();
        c.omega = OmegaInput::Entries(vec![vec![[0.0, 1.0]]]);
        assert_eq!(run_scenario(&c).exit_code, EXIT_INVALID);

        let mut c = find("elliptic-d3").unwrap();
        c.omega = OmegaInput::Entries(vec![vec![[0.0, -1.0]]]);
        let r = run_scenario(&c);
        assert_eq!(r.exit_code, EXIT_INVALID);
        assert!(r.errors[0].message.contains("NotPositiveDefinite"), "{}", r.errors[0].message);
    }

    #[test]
    fn elliptic_g_minus_one_resolves_to_one_with_a_note() {
        let mut c = find("elliptic-d3").unwrap();
        c.n = LevelInput::GMinusOne;
        c.extra_checks.clear();
        let r = run_scenario(&c);
        assert_eq!(r.inputs.as_ref().unwrap().n, Some(1));
        assert_eq!(r.notes.len(), 1);
        assert_eq!(r.verdict.as_ref().unwrap().kind, "Surjective");
        assert_eq!(r.itt.as_ref().unwrap().verdict, IttVerdict::Unknown);
        assert!(r.itt.as_ref().unwrap().note.starts_with("not applicable"));
        assert_eq!(r.exit_code, EXIT_OK);
    }

    #[test]
    fn consistency_flag_follows_prediction_and_verdict() {
        for c in catalog() {
            let r = run_scenario(&c);
            let predicted = r.bound_prediction.as_deref() == Some("TheoremPredictsSurjective");
            let surjective = r.verdict.as_ref().is_some_and(|v| v.kind == "Surjective");
            assert_eq!(r.consistency_violation, predicted && !surjective);
            assert!(!r.consistency_violation, "{:?}", c.name);
        }
    }

    #[test]
    fn not_simple_gives_no_prediction() {
        let mut c = find("surface-33").unwrap();
        c.simple_asserted = false;
        let r = run_scenario(&c);
        assert_eq!(r.bound_prediction.as_deref(), Some("NoPrediction"));
        assert!(!r.itt.as_ref().unwrap().simple_asserted);
        // the implication needs only ampleness
        assert_eq!(r.itt.as_ref().unwrap().verdict, IttVerdict::Holds);
    }

    #[test]
    fn caps_turn_into_size_errors() {
        let mut c = find("surface-33").unwrap();
        c.caps = Caps { matrix_entries: 100, ..Caps::default() };
        let r = run_scenario(&c);
        assert_eq!(r.errors[0].kind, "SizeLimit");
        assert_eq!(r.exit_code, EXIT_INCONCLUSIVE);

        let mut c = find("surface-principal-dimcount").unwrap();
        c.caps = Caps { group: 1000, ..Caps::default() };
        let r = run_scenario(&c);
        assert!(matches!(&r.checks[0], CheckReport::Failed { error, .. } if error.kind == "SizeLimit"));
        assert_eq!(r.exit_code, EXIT_INCONCLUSIVE);
    }

    #[test]
    fn verdicts_survive_reseeding_and_reports_repeat() {
        for name in ["elliptic-d3", "elliptic-d4", "surface-33"] {
            let mut c = find(name).unwrap();
            let a = run_scenario(&c);
            c.seed += 101;
            let b = run_scenario(&c);
            assert_eq!(a.verdict.as_ref().unwrap().kind, b.verdict.as_ref().unwrap().kind);
            assert_eq!(a.verdict.as_ref().unwrap().rank, b.verdict.as_ref().unwrap().rank);
            assert_eq!(emit_report(&b, Format::Json), emit_report(&run_scenario(&c), Format::Json));
        }
    }

    #[test]
    fn timings_are_only_attached_on_request() {
        let c = find("elliptic-d3").unwrap();
        assert!(run_scenario(&c).timings.is_none());
        let r = run_scenario_timed(&c);
        assert!(r.timings.is_some());
        assert!(emit_report(&r, Format::Json).contains("total_ms"));
    }

    #[test]
    fn explicit_period_matrix_round_trip() {
        let p: PeriodMatrix = crate::random_period_matrix(2, 3);
        let rows = (0..2).map(|i| (0..2).map(|j| [p.matrix()[(i, j)].re, p.matrix()[(i, j)].im]).collect()).collect();
        let mut c = find("surface-33").unwrap();
        let random = run_scenario(&c);
        c.omega = OmegaInput::Entries(rows);
        let explicit = run_scenario(&c);
        assert_eq!(explicit.verdict.as_ref().unwrap().kind, "Surjective");
        assert_eq!(random.verdict.as_ref().unwrap().rank, explicit.verdict.as_ref().unwrap().rank);
    }
}
