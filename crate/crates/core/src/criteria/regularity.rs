//! Side conditions for uniqueness: uniform ellipticity with continuity, a
//! locally Lipschitz square root, and the one-dimensional Hölder-½ modulus.

use super::{integral_record, CheckOptions, ConditionId, ConditionReport, CriteriaError, Evidence, Mode, Outcome, WitnessRecord};
use crate::dsl::DslError;
use crate::envelopes::{ellipticity_profile, modulus_estimate_with, ModulusEstimate};
use crate::model::{linalg, sqrt_psd, CertificateBundle, MarketModel, Modulus, SamplePlan};
use crate::quadrature::{classify_tail, Direction, IntegralKind};

const BALLS: [f64; 4] = [1.0, 2.0, 4.0, 8.0];

/// Uniform ellipticity and continuity in `x` uniformly in `t`, on probes.
pub fn check_u1(model: &MarketModel, opts: &CheckOptions) -> Result<ConditionReport, CriteriaError> {
    let id = ConditionId::U1;
    let plan = SamplePlan {
        cloud: 64,
        seed: opts.seed(),
        ..SamplePlan::default()
    };
    let times = model.probe_times(plan.time_points);
    let profile = ellipticity_profile(model, &plan.points(model), &times)?;
    let mut ev = Evidence::default();
    let mut min_eig = f64::INFINITY;
    for p in &profile {
        min_eig = min_eig.min(p.inf_eigenvalue);
        let floor = opts.tol * (1.0 + p.scale);
        if !(p.inf_eigenvalue > floor) {
            ev.fail_with(
                "a uniformly elliptic",
                format!("smallest eigenvalue {:.3e}", p.inf_eigenvalue),
                WitnessRecord {
                    reason: "a is degenerate".into(),
                    t: Some(p.at_t),
                    x: p.x.clone(),
                    value: p.inf_eigenvalue,
                },
            );
            break;
        }
    }
    ev.value("smallest sampled eigenvalue", min_eig);
    for p in &profile {
        let slack = 1e-9 * (1.0 + p.scale);
        let shrinking = p.continuity_defects.windows(2).all(|w| w[1].1 <= 0.5 * w[0].1 + slack);
        if !shrinking {
            let (h, defect) = *p.continuity_defects.last().expect("three scales");
            ev.fail_with(
                "a continuous in x",
                format!("defect {defect:.3e} at distance {h:e} does not shrink"),
                WitnessRecord {
                    reason: "continuity defect does not vanish".into(),
                    t: None,
                    x: p.x.clone(),
                    value: defect,
                },
            );
            break;
        }
    }
    if !ev.checks.iter().any(|c| c.name == "a uniformly elliptic") {
        ev.check("a uniformly elliptic", Outcome::Pass, format!("{} probes", profile.len()));
    }
    if !ev.checks.iter().any(|c| c.name == "a continuous in x") {
        ev.check("a continuous in x", Outcome::Pass, "defects halve at every scale");
    }
    Ok(ConditionReport::conclude(id, Mode::Evidence, ev, vec![]))
}

/// Interior probe times; the end points may be singular.
fn interior_times(model: &MarketModel) -> Vec<f64> {
    let ts = model.probe_times(7);
    if ts.len() == 1 {
        return ts;
    }
    ts[1..ts.len() - 1].to_vec()
}

/// `x ↦ (a^{1/2}(t_k, x))_k` flattened over the interior probe times.
fn root_field(model: &MarketModel) -> impl Fn(&[f64]) -> Result<Vec<f64>, DslError> + '_ {
    let times = interior_times(model);
    move |x: &[f64]| {
        let mut out = Vec::with_capacity(times.len() * model.d * model.d);
        for &t in &times {
            let a = model.eval_a(t, x)?;
            let tol = linalg::psd_tolerance(&a);
            let r = sqrt_psd(&a, tol).map_err(|e| DslError::Domain {
                message: e.to_string(),
                t,
                x: x.to_vec(),
            })?;
            out.extend(r.iter().copied());
        }
        Ok(out)
    }
}

fn classify_modulus(ev: &mut Evidence, name: String, est: &ModulusEstimate) {
    let detail = format!("sampled constant {:.6e}", est.constant);
    if est.is_growing() {
        let (x, y) = est.pair.clone();
        let mut both = x;
        both.extend(y);
        ev.fail_with(
            name,
            detail,
            WitnessRecord {
                reason: "quotient grows as the pair separation shrinks (pair x, y concatenated)".into(),
                t: None,
                x: both,
                value: est.constant,
            },
        );
    } else if est.is_stable() {
        ev.check(name, Outcome::Pass, detail);
    } else {
        ev.check(name, Outcome::Unknown, detail);
    }
}

fn anchors(model: &MarketModel) -> Vec<Vec<f64>> {
    vec![vec![0.0; model.d], model.x0.clone()]
}

/// `a^{1/2}` locally Lipschitz, probed on the balls of radius 1, 2, 4, 8.
pub fn check_u2(model: &MarketModel, opts: &CheckOptions) -> Result<ConditionReport, CriteriaError> {
    let field = root_field(model);
    let mut ev = Evidence::default();
    for n in BALLS {
        let est = modulus_estimate_with(
            &field,
            model.d,
            n,
            &anchors(model),
            opts.modulus_points,
            opts.modulus_levels,
            opts.seed(),
            |diff, sep| Ok(diff / sep),
        )?;
        classify_modulus(&mut ev, format!("a^(1/2) Lipschitz on the ball of radius {n}"), &est);
    }
    Ok(ConditionReport::conclude(ConditionId::U2, Mode::Evidence, ev, vec![]))
}

/// `|a^{1/2}(x) − a^{1/2}(y)|² ≤ K h_n(|x − y|)` on balls with `∫_0 1/h_n = ∞`;
/// `h_n(z) = z` unless a modulus certificate is given.
pub fn check_holder_1d(model: &MarketModel, certs: &CertificateBundle, opts: &CheckOptions) -> Result<ConditionReport, CriteriaError> {
    let id = ConditionId::Holder1d;
    if model.d != 1 || model.m != 1 {
        return Err(CriteriaError::Precondition {
            condition: id,
            message: format!("needs d = m = 1 (got d={}, m={})", model.d, model.m),
        });
    }
    let h = certs.h_n.clone().unwrap_or(Modulus::Linear);
    let field = root_field(model);
    let mut ev = Evidence::default();
    for n in BALLS {
        let est = modulus_estimate_with(
            &field,
            1,
            n,
            &anchors(model),
            opts.modulus_points,
            opts.modulus_levels,
            opts.seed(),
            |diff, sep| Ok(diff * diff / h.eval(sep)?),
        )?;
        classify_modulus(&mut ev, format!("squared increment over h_n on [-{n}, {n}]"), &est);
    }
    let v = classify_tail(|z| Ok(1.0 / h.eval(z)?), 1.0, Direction::ToZero, &opts.tail);
    ev.integrals
        .push(integral_record("integral of 1/h_n near 0 diverges", IntegralKind::Diverges, Direction::ToZero, v)?);
    Ok(ConditionReport::conclude(id, Mode::Evidence, ev, vec![]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::Verdict;

    fn one(a: &str) -> MarketModel {
        MarketModel::from_sources(1, 1.0, vec![1.0], vec![1.0], &["0"], &[&[a]], &[]).unwrap()
    }

    fn opts() -> CheckOptions {
        CheckOptions::default()
    }

    #[test]
    fn u1_examples() {
        let id2 = MarketModel::from_sources(2, 1.0, vec![0.0; 2], vec![1.0; 2], &["0", "0"], &[&["1", "0"], &["0", "1"]], &[]).unwrap();
        assert_eq!(check_u1(&id2, &opts()).unwrap().verdict, Verdict::Holds);
        assert_eq!(check_u1(&one("(max(abs(x1),1))^3"), &opts()).unwrap().verdict, Verdict::Holds);
        let r = check_u1(&one("min(abs(x1)^0.5,1)"), &opts()).unwrap();
        assert_eq!(r.verdict, Verdict::Fails);
        assert_eq!(r.evidence.witnesses[0].x, vec![0.0]);
        let step = check_u1(&one("1 + max(min((x1 - 0.25)*1e300, 1), 0)"), &opts()).unwrap();
        assert_eq!(step.verdict, Verdict::Fails);
        assert_eq!(step.evidence.witnesses[0].x, vec![0.25]);
    }

    #[test]
    fn u2_examples() {
        assert_eq!(check_u2(&one("1"), &opts()).unwrap().verdict, Verdict::Holds);
        assert_eq!(check_u2(&one("1 + x1^2"), &opts()).unwrap().verdict, Verdict::Holds);
        let r = check_u2(&one("abs(x1)"), &opts()).unwrap();
        assert_eq!(r.verdict, Verdict::Fails);
        assert!(r.has_witness());
    }

    #[test]
    fn holder_examples() {
        let none = CertificateBundle::default();
        for delta in [0.5, 1.0, 2.0] {
            let r = check_holder_1d(&one(&format!("(max(abs(x1),1))^{delta}")), &none, &opts()).unwrap();
            assert_eq!(r.verdict, Verdict::Holds, "delta={delta}");
        }
        assert_eq!(check_holder_1d(&one("1"), &none, &opts()).unwrap().verdict, Verdict::Holds);
        assert_eq!(check_holder_1d(&one("abs(x1)"), &none, &opts()).unwrap().verdict, Verdict::Holds);
        assert_eq!(
            check_holder_1d(&one("min(abs(x1)^0.5,1)"), &none, &opts()).unwrap().verdict,
            Verdict::Fails
        );
        let two = MarketModel::from_sources(2, 1.0, vec![0.0; 2], vec![1.0; 2], &["0", "0"], &[&["1", "0"], &["0", "1"]], &[]).unwrap();
        assert!(matches!(check_holder_1d(&two, &none, &opts()), Err(CriteriaError::Precondition { .. })));
    }
}
