//! Market-level checks: the structure condition, the radial market `a = f·Id`
//! and the one-dimensional homogeneous model on `(0, ∞)`.

use super::{
    has_radial_form, integral_record, radial_positivity, sphere_inequality, CheckOptions, ConditionId, ConditionReport,
    CriteriaError, Evidence, InequalityRecord, LogLogFit, Mode, Outcome, RadialFn, WitnessRecord,
};
use crate::dsl::{DslError, Expr};
use crate::envelopes::{gamma_profile, modulus_estimate_with, sphere_extremes, Witness};
use crate::model::{good_mpr_markov, norm, CertificateBundle, MarketModel, MprOutcome, MprWitness, SamplePlan};
use crate::quadrature::{classify_tail, gk15, integrate, Direction, IntegralKind, QuadError};

const LIPSCHITZ_INTERVALS: [f64; 4] = [2.0, 4.0, 8.0, 16.0];

/// Existence of a strict local martingale density via a good Markovian
/// market price of risk.
pub fn check_slmd(model: &MarketModel, certs: &CertificateBundle) -> Result<ConditionReport, CriteriaError> {
    let id = ConditionId::Slmd;
    let mut ev = Evidence::default();
    match good_mpr_markov(model) {
        MprOutcome::Constructed { bounds, .. } => {
            for b in &bounds {
                ev.value(format!("sup |c| on the box of radius {}", b.radius), b.sup_c);
            }
            ev.check("good Markovian price of risk", Outcome::Pass, format!("{} nested boxes", bounds.len()));
            let mode = if certs.assume_locally_bounded { Mode::Certificate } else { Mode::Evidence };
            Ok(ConditionReport::conclude(id, mode, ev, vec![]))
        }
        MprOutcome::NotConstructible { witness: MprWitness::Eval(e) } => Err(e.into()),
        MprOutcome::NotConstructible {
            witness:
                MprWitness::SingularDiffusion {
                    t,
                    x,
                    condition,
                    approach,
                    approach_slope,
                    blow_up,
                },
        } => {
            ev.value("condition number of a", condition);
            ev.value("log-log slope of |a^-1 b| on approach", approach_slope);
            let last = approach.last().map_or(f64::INFINITY, |p| p.1);
            if blow_up && model.m == model.d {
                ev.fail_with(
                    "a^-1 b locally bounded",
                    format!("|a^-1 b| grows like distance^{approach_slope:.3} toward the singular point"),
                    WitnessRecord {
                        reason: "a is singular and a^-1 b is unbounded nearby".into(),
                        t: Some(t),
                        x,
                        value: last,
                    },
                );
                Ok(ConditionReport::conclude(id, Mode::Evidence, ev, vec![]))
            } else {
                let note = if blow_up {
                    "a^-1 b blows up, but with m < d another price of risk may exist"
                } else {
                    "a is singular but a^-1 b shows no blow-up on approach"
                };
                Ok(ConditionReport::inconclusive(id, Mode::Evidence, ev, note))
            }
        }
    }
}

/// The radial shape `a = f·Id` with `f` time-independent, positive and finite
/// on probes, and `b` finite on probes.
pub fn check_radial_shape(model: &MarketModel, opts: &CheckOptions) -> Result<ConditionReport, CriteriaError> {
    let id = ConditionId::RadialShape;
    if model.m != model.d {
        return Err(CriteriaError::DimensionMismatch { condition: id, d: model.d, m: model.m });
    }
    if !model.a_is_time_independent() {
        return Err(CriteriaError::Precondition {
            condition: id,
            message: "a depends on time".into(),
        });
    }
    let plan = SamplePlan {
        seed: opts.seed(),
        ..SamplePlan::default()
    };
    let mut ev = Evidence::default();
    let structural = has_radial_form(model);
    let mut shape_ok = true;
    let mut min_f = (f64::INFINITY, Vec::new());
    let mut b_ok = true;
    for x in plan.points(model) {
        let a = match model.eval_a(0.0, &x) {
            Ok(a) => a,
            Err(e) => {
                ev.fail_with(
                    "f defined",
                    e.to_string(),
                    WitnessRecord { reason: "a undefined".into(), t: Some(0.0), x, value: f64::NAN },
                );
                shape_ok = false;
                break;
            }
        };
        let f = a[(0, 0)];
        if f < min_f.0 || !f.is_finite() {
            min_f = (f, x.clone());
        }
        if !structural && shape_ok {
            let scale = 1e-9 * (1.0 + f.abs());
            let bad = (0..model.d)
                .flat_map(|i| (0..model.d).map(move |j| (i, j)))
                .map(|(i, j)| if i == j { (a[(i, j)] - f).abs() } else { a[(i, j)].abs() })
                .fold(0.0f64, f64::max);
            if bad > scale {
                ev.fail_with(
                    "a = f Id",
                    format!("deviation {bad:.3e}"),
                    WitnessRecord { reason: "a is not a multiple of the identity".into(), t: Some(0.0), x: x.clone(), value: bad },
                );
                shape_ok = false;
            }
        }
        if b_ok {
            let bad = match model.eval_b(0.0, &x) {
                Ok(b) => b.iter().any(|v| !v.is_finite()).then(|| "b is not finite".to_string()),
                Err(e) => Some(e.to_string()),
            };
            if let Some(msg) = bad {
                ev.fail_with(
                    "b finite",
                    msg,
                    WitnessRecord { reason: "drift undefined".into(), t: Some(0.0), x: x.clone(), value: f64::NAN },
                );
                b_ok = false;
            }
        }
    }
    if shape_ok {
        let how = if structural { "shared diagonal expression" } else { "probed" };
        ev.check("a = f Id", Outcome::Pass, how);
    }
    if b_ok {
        ev.check("b finite", Outcome::Pass, "all probes");
    }
    ev.value("smallest sampled f", min_f.0);
    ev.value("|x0|", norm(&model.x0));
    if min_f.0 > 0.0 && min_f.0.is_finite() {
        ev.check("f positive", Outcome::Pass, format!("min {:.6e}", min_f.0));
    } else {
        ev.fail_with(
            "f positive",
            format!("min {:.6e}", min_f.0),
            WitnessRecord { reason: "f is not positive".into(), t: Some(0.0), x: min_f.1, value: min_f.0 },
        );
    }
    Ok(ConditionReport::conclude(id, Mode::Evidence, ev, vec![]))
}

/// `lhs(z) ≥ rhs[k]` on the grid, with witnesses placed at `at[k]`.
fn grid_inequality<F>(name: &str, zs: &[f64], mut lhs: F, rhs: &[f64], at: &[Witness]) -> Result<InequalityRecord, CriteriaError>
where
    F: FnMut(f64) -> Result<f64, DslError>,
{
    let mut worst: Option<Witness> = None;
    for (k, &z) in zs.iter().enumerate() {
        let l = lhs(z)?;
        let m = if l.is_finite() { (l - rhs[k]) / (1.0 + l.abs() + rhs[k].abs()) } else { -1.0 };
        if worst.as_ref().is_none_or(|w| m < w.value) {
            worst = Some(Witness { t: at[k].t, x: at[k].x.clone(), value: m });
        }
    }
    let worst_margin = worst.as_ref().map_or(0.0, |w| w.value);
    Ok(InequalityRecord {
        name: name.into(),
        holds: worst_margin >= -1e-9,
        worst_margin,
        worst_at: worst,
        probes: zs.len(),
    })
}

fn lipschitz_on_intervals<F>(label: &str, f: F, opts: &CheckOptions, ev: &mut Evidence) -> Result<(), CriteriaError>
where
    F: Fn(f64) -> Result<f64, DslError>,
{
    for n in LIPSCHITZ_INTERVALS {
        let (lo, hi) = (1.0 / n, n);
        let (c, radius) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        let est = modulus_estimate_with(
            |u: &[f64]| Ok(vec![f(c + u[0])?]),
            1,
            radius,
            &[vec![0.0]],
            opts.modulus_points,
            opts.modulus_levels,
            opts.seed(),
            |diff, sep| Ok(diff / sep),
        )?;
        let name = format!("{label} Lipschitz on [1/{n}, {n}]");
        let detail = format!("sampled constant {:.6e}", est.constant);
        if est.is_growing() {
            let (x, y) = est.pair.clone();
            ev.fail_with(
                name,
                detail,
                WitnessRecord {
                    reason: format!("{label} difference quotient grows as the separation shrinks"),
                    t: None,
                    x: vec![c + x[0], c + y[0]],
                    value: est.constant,
                },
            );
        } else if est.is_stable() {
            ev.check(name, Outcome::Pass, detail);
        } else {
            ev.check(name, Outcome::Unknown, detail);
        }
    }
    Ok(())
}

/// Existence side (`ξ ≥ sup_{‖x‖≤z} f`, `∫_1^∞ ρ/ξ(ρ) dρ = ∞`) and
/// non-existence side (`α(‖x‖) ≤ f(x)`, `α` positive and locally Lipschitz,
/// `∫_1^∞ ρ/α(ρ) dρ < ∞`) for a market with `a = f·Id`.
pub fn check_radial_market(
    model: &MarketModel,
    certs: &CertificateBundle,
    opts: &CheckOptions,
) -> Result<(ConditionReport, ConditionReport), CriteriaError> {
    let id = ConditionId::RadialExistence;
    if model.m != model.d {
        return Err(CriteriaError::DimensionMismatch { condition: id, d: model.d, m: model.m });
    }
    if !has_radial_form(model) || !model.a_is_time_independent() {
        return Err(CriteriaError::Precondition {
            condition: id,
            message: "a is not written as f(x) Id with a time-independent f".into(),
        });
    }
    Ok((radial_existence(model, certs, opts)?, radial_nonexistence(model, certs, opts)?))
}

fn radial_existence(model: &MarketModel, certs: &CertificateBundle, opts: &CheckOptions) -> Result<ConditionReport, CriteriaError> {
    let id = ConditionId::RadialExistence;
    let zs: Vec<f64> = (0..=10).map(|k| 2f64.powi(k)).collect();
    let env = &opts.envelope;
    let gamma = gamma_profile(model, &zs, env.samples_per_sphere, env.time_points, env.seed)?;
    let mut ev = Evidence::default();
    let (xi, mode) = match &certs.xi {
        Some(e) => {
            ev.inequalities.push(grid_inequality(
                "xi(z) >= sup of f on the ball of radius z",
                &zs,
                |z| e.eval_radial(z),
                &gamma.gamma,
                &gamma.argmax,
            )?);
            (RadialFn::Expr(e), Mode::Certificate)
        }
        None => match LogLogFit::new(&zs, &gamma.gamma) {
            Some(fit) => (RadialFn::Fitted(fit), Mode::Evidence),
            None => return Ok(ConditionReport::inconclusive(id, Mode::Evidence, ev, "sup of f is not positive on the grid")),
        },
    };
    for (z, g) in zs.iter().zip(&gamma.gamma) {
        ev.value(format!("sup f on ball {z}"), *g);
    }
    let v = classify_tail(|r| Ok(r / xi.eval(r)?), 1.0, Direction::ToInfinity, &opts.tail);
    ev.integrals.push(integral_record(
        "integral of rho/xi(rho) to infinity diverges",
        IntegralKind::Diverges,
        Direction::ToInfinity,
        v,
    )?);
    Ok(ConditionReport::conclude(id, mode, ev, vec![]))
}

fn radial_nonexistence(model: &MarketModel, certs: &CertificateBundle, opts: &CheckOptions) -> Result<ConditionReport, CriteriaError> {
    let id = ConditionId::RadialNonexistence;
    let radii = opts.envelope.radii.clone();
    let mut ev = Evidence::default();
    let (alpha, mode) = match &certs.alpha {
        Some(e) => {
            ev.inequalities.push(sphere_inequality(model, opts, &radii, "f(x) >= alpha(|x|)", |p| {
                Ok((p.a[(0, 0)], e.eval_radial(norm(p.x))?))
            })?);
            (RadialFn::Expr(e), Mode::Certificate)
        }
        None => {
            let ext = sphere_extremes(model, &opts.envelope, |p| Ok(p.a[(0, 0)]))?;
            let infs: Vec<f64> = ext.iter().map(|e| e.inf.value).collect();
            if let Some(bad) = ext.iter().find(|e| !(e.inf.value > 0.0)) {
                ev.fail_with(
                    "alpha > 0",
                    format!("inf of f on the sphere of radius {} is {:.3e}", bad.radius, bad.inf.value),
                    WitnessRecord { reason: "f is not positive".into(), t: Some(bad.inf.t), x: bad.inf.x.clone(), value: bad.inf.value },
                );
                return Ok(ConditionReport::conclude(id, Mode::Evidence, ev, vec![]));
            }
            match LogLogFit::new(&radii, &infs) {
                Some(fit) => (RadialFn::Fitted(fit), Mode::Evidence),
                None => return Ok(ConditionReport::inconclusive(id, Mode::Evidence, ev, "inf of f is not positive on the grid")),
            }
        }
    };
    ev.inequalities.push(radial_positivity("alpha > 0", &radii, |r| alpha.eval(r))?);
    lipschitz_on_intervals("alpha", |r| alpha.eval(r), opts, &mut ev)?;
    let v = classify_tail(|r| Ok(r / alpha.eval(r)?), 1.0, Direction::ToInfinity, &opts.tail);
    ev.integrals.push(integral_record(
        "integral of rho/alpha(rho) to infinity converges",
        IntegralKind::Converges,
        Direction::ToInfinity,
        v,
    )?);
    Ok(ConditionReport::conclude(id, mode, ev, vec![]))
}

/// One-dimensional martingale measure: `∫_1^∞ 1/f(y) dy = ∞`.
pub fn check_1d_emm(model: &MarketModel, opts: &CheckOptions) -> Result<ConditionReport, CriteriaError> {
    let id = ConditionId::Emm1d;
    if model.d != 1 || model.m != 1 {
        return Err(CriteriaError::Precondition {
            condition: id,
            message: format!("needs d = m = 1 (got d={}, m={})", model.d, model.m),
        });
    }
    if !model.a_is_time_independent() {
        return Err(CriteriaError::Precondition {
            condition: id,
            message: "a depends on time".into(),
        });
    }
    let f = &model.a[0][0];
    let v = classify_tail(
        |y| {
            let v = f.eval_state(0.0, &[y])?;
            Ok(if v > 0.0 { 1.0 / v } else { f64::INFINITY })
        },
        1.0,
        Direction::ToInfinity,
        &opts.tail,
    );
    let mut ev = Evidence::default();
    ev.integrals.push(integral_record(
        "integral of 1/f to infinity diverges",
        IntegralKind::Diverges,
        Direction::ToInfinity,
        v,
    )?);
    Ok(ConditionReport::conclude(id, Mode::Certificate, ev, vec![]))
}

/// Reports for the homogeneous model `dY = μ(Y) dt + σ(Y) dW` on `(0, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MuReports {
    pub slmd: ConditionReport,
    pub elmm: ConditionReport,
    pub emm: ConditionReport,
}

const MU_OCTAVES: std::ops::RangeInclusive<i32> = -8..=7;

/// Bisects toward the half with the larger absolute integral estimate.
fn locate_singularity<F>(g: &mut F, mut lo: f64, mut hi: f64) -> f64
where
    F: FnMut(f64) -> Result<f64, DslError>,
{
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let weight = |q: Result<crate::quadrature::Quad, QuadError>| match q {
            Ok(q) => q.value.abs() + q.error_bound,
            Err(_) => f64::INFINITY,
        };
        let left = weight(gk15(g, lo, mid));
        let right = weight(gk15(g, mid, hi));
        if left >= right {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Local integrability of `μ²/σ⁴` over the octaves of `[2^-8, 2^8]`.
fn mu_slmd(mu: &Expr, sigma: &Expr, opts: &CheckOptions) -> Result<ConditionReport, CriteriaError> {
    let id = ConditionId::MuSlmd;
    let g = |y: f64| -> Result<f64, DslError> {
        let m = mu.eval_state(0.0, &[y])?;
        let s = sigma.eval_state(0.0, &[y])?;
        Ok(m * m / (s * s * s * s))
    };
    let mut ev = Evidence::default();
    let mut singular_points: Vec<f64> = Vec::new();
    for k in MU_OCTAVES {
        let (lo, hi) = (2f64.powi(k), 2f64.powi(k + 1));
        let done = match integrate(g, lo, hi, 1e-8) {
            Ok(q) if q.value.is_finite() => {
                ev.value(format!("integral over [{lo}, {hi}]"), q.value);
                true
            }
            _ => false,
        };
        if done {
            continue;
        }
        let mut gm = g;
        let c = locate_singularity(&mut gm, lo, hi);
        if singular_points.iter().any(|p| (p - c).abs() <= 1e-9 * c) {
            continue;
        }
        singular_points.push(c);
        let reach = 0.25 * c;
        for (side, sign) in [("left", -1.0), ("right", 1.0)] {
            let v = classify_tail(
                |s| {
                    let v = g(c + sign * s)?;
                    Ok(if v.is_finite() { v } else { f64::MAX })
                },
                reach,
                Direction::ToZero,
                &opts.tail,
            );
            let rec = integral_record(
                &format!("mu^2/sigma^4 integrable {side} of {c:.6}"),
                IntegralKind::Converges,
                Direction::ToZero,
                v,
            )?;
            if rec.contradicts() {
                ev.witnesses.push(WitnessRecord {
                    reason: "mu^2/sigma^4 is not locally integrable".into(),
                    t: None,
                    x: vec![c],
                    value: rec.verdict.evidence.partial_sum,
                });
            }
            ev.integrals.push(rec);
        }
    }
    Ok(ConditionReport::conclude(id, Mode::Certificate, ev, vec![]))
}

fn mu_tail(
    id: ConditionId,
    sigma: &Expr,
    slmd: &ConditionReport,
    direction: Direction,
    name: &str,
    opts: &CheckOptions,
) -> Result<ConditionReport, CriteriaError> {
    let mut ev = Evidence::default();
    ev.absorb("slmd: ", slmd.evidence.clone());
    let v = classify_tail(
        |y| {
            let s = sigma.eval_state(0.0, &[y])?;
            Ok(y / (s * s))
        },
        1.0,
        direction,
        &opts.tail,
    )
    .map_err(|e| match e {
        QuadError::Eval { x, .. } => QuadError::SingularSigma { x },
        e => e,
    });
    ev.integrals.push(integral_record(name, IntegralKind::Diverges, direction, v)?);
    Ok(ConditionReport::conclude(id, Mode::Certificate, ev, vec![]))
}

/// Strict local martingale density, local martingale measure and martingale
/// measure for the homogeneous model on `(0, ∞)` with state variable `x1`.
pub fn check_mu_1d(mu: &Expr, sigma: &Expr, opts: &CheckOptions) -> Result<MuReports, CriteriaError> {
    let scope = crate::dsl::Scope::State { dim: 1 };
    mu.check_scope(scope)?;
    sigma.check_scope(scope)?;
    if mu.uses_time() || sigma.uses_time() {
        return Err(CriteriaError::Precondition {
            condition: ConditionId::MuSlmd,
            message: "mu and sigma must not depend on time".into(),
        });
    }
    let slmd = mu_slmd(mu, sigma, opts)?;
    let elmm = mu_tail(
        ConditionId::MuElmm,
        sigma,
        &slmd,
        Direction::ToZero,
        "integral of x/sigma^2 near 0 diverges",
        opts,
    )?;
    let emm = mu_tail(
        ConditionId::MuEmm,
        sigma,
        &elmm,
        Direction::ToInfinity,
        "integral of x/sigma^2 to infinity diverges",
        opts,
    )?;
    Ok(MuReports { slmd, elmm, emm })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::Verdict;
    use crate::dsl::parse_expr;

    fn opts() -> CheckOptions {
        CheckOptions::default()
    }

    fn one(b: &str, a: &str) -> MarketModel {
        MarketModel::from_sources(1, 1.0, vec![1.0], vec![1.0], &[b], &[&[a]], &[]).unwrap()
    }

    fn radial(d: usize, f: &str) -> MarketModel {
        let mut x0 = vec![0.0; d];
        x0[0] = 1.0;
        let rows: Vec<Vec<&str>> = (0..d).map(|i| (0..d).map(|j| if i == j { f } else { "0" }).collect()).collect();
        let rows: Vec<&[&str]> = rows.iter().map(Vec::as_slice).collect();
        MarketModel::from_sources(d, 1.0, x0, vec![1.0; d], &vec!["0"; d], &rows, &[]).unwrap()
    }

    #[test]
    fn slmd_examples() {
        let none = CertificateBundle::default();
        let girsanov = one("0", "min(abs(x1)^0.5, 1)");
        assert_eq!(check_slmd(&girsanov, &none).unwrap().verdict, Verdict::Holds);
        let bessel = one("3*(max(x1,0)^(1/3) - max(-x1,0)^(1/3))", "9*abs(x1)^(4/3)");
        let r = check_slmd(&bessel, &none).unwrap();
        assert_eq!(r.verdict, Verdict::Fails);
        assert!(r.has_witness());
        let certified = CertificateBundle { assume_locally_bounded: true, ..CertificateBundle::default() };
        assert_eq!(check_slmd(&radial(3, "(max(norm,1))^3"), &certified).unwrap().mode, Mode::Certificate);
    }

    #[test]
    fn radial_shape_examples() {
        assert_eq!(check_radial_shape(&radial(3, "(max(norm,1))^3"), &opts()).unwrap().verdict, Verdict::Holds);
        let degenerate = check_radial_shape(&one("0", "min(abs(x1)^0.5, 1)"), &opts()).unwrap();
        assert_eq!(degenerate.verdict, Verdict::Fails);
        assert_eq!(degenerate.evidence.witnesses[0].x, vec![0.0]);
        let skew = MarketModel::from_sources(2, 1.0, vec![1.0, 0.0], vec![1.0; 2], &["0", "0"], &[&["1", "0"], &["0", "2"]], &[]).unwrap();
        assert_eq!(check_radial_shape(&skew, &opts()).unwrap().verdict, Verdict::Fails);
    }

    #[test]
    fn radial_market_examples() {
        let with_alpha = CertificateBundle { alpha: Some(parse_expr("rho^3").unwrap()), ..CertificateBundle::default() };
        let (_, non) = check_radial_market(&radial(3, "(max(norm,1))^3"), &with_alpha, &opts()).unwrap();
        assert_eq!(non.verdict, Verdict::Holds);
        assert_eq!(non.mode, Mode::Certificate);

        let (exist, non) = check_radial_market(&radial(3, "2 + min(norm, 1)"), &CertificateBundle::default(), &opts()).unwrap();
        assert_eq!(exist.verdict, Verdict::Holds);
        assert_eq!(non.verdict, Verdict::Fails);

        let with_xi = CertificateBundle { xi: Some(parse_expr("z^2").unwrap()), ..CertificateBundle::default() };
        let (exist, _) = check_radial_market(&radial(3, "(max(norm,1))^2"), &with_xi, &opts()).unwrap();
        assert_eq!(exist.verdict, Verdict::Holds);

        let too_small = CertificateBundle { xi: Some(parse_expr("z").unwrap()), ..CertificateBundle::default() };
        let (exist, _) = check_radial_market(&radial(3, "(max(norm,1))^2"), &too_small, &opts()).unwrap();
        assert_eq!(exist.verdict, Verdict::Fails);
        assert!(exist.has_witness());
    }

    #[test]
    fn one_dimensional_emm() {
        for (delta, holds) in [(0.5, true), (1.0, true), (1.5, false), (2.0, false)] {
            let r = check_1d_emm(&one("0", &format!("(max(abs(x1),1))^{delta}")), &opts()).unwrap();
            assert_eq!(r.verdict == Verdict::Holds, holds, "delta={delta}");
        }
        assert_eq!(check_1d_emm(&one("0", "1"), &opts()).unwrap().verdict, Verdict::Holds);
    }

    #[test]
    fn mu_model_examples() {
        let e = |s: &str| parse_expr(s).unwrap();
        let bs = check_mu_1d(&e("0"), &e("x1"), &opts()).unwrap();
        assert_eq!([bs.slmd.verdict, bs.elmm.verdict, bs.emm.verdict], [Verdict::Holds; 3]);
        let cev = check_mu_1d(&e("0"), &e("x1^1.5"), &opts()).unwrap();
        assert_eq!(cev.elmm.verdict, Verdict::Holds);
        assert_eq!(cev.emm.verdict, Verdict::Fails);
        let spike = check_mu_1d(&e("1"), &e("sqrt(abs(x1 - 1))"), &opts()).unwrap();
        assert_eq!(spike.slmd.verdict, Verdict::Fails);
        assert!((spike.slmd.evidence.witnesses[0].x[0] - 1.0).abs() < 1e-6);
        let mild = check_mu_1d(&e("1"), &e("abs(x1 - 1)^(1/8)"), &opts()).unwrap();
        assert_eq!(mild.slmd.verdict, Verdict::Holds);
    }
}
