//! Linear-growth conditions, the diffusion growth cap and McKean's
//! eigenvalue condition.

use super::{
    integral_record, sampled_time_integrability, sphere_inequality, CheckOptions, ConditionId, ConditionReport,
    CriteriaError, Evidence, LogLogFit, Mode, Outcome, WitnessRecord, Zeta,
};
use crate::envelopes::{gamma_profile, sphere_extremes, EnvelopeOptions, Probe, SphereExtremes};
use crate::model::{dot, norm, CertificateBundle, MarketModel, SamplePlan};
use crate::quadrature::{classify_tail, Direction, IntegralKind};

/// Slope of `ln v` against `ln ρ` above which a sampled ratio counts as growing.
const GROWTH_SLOPE: f64 = 0.05;

fn shifted_trace(p: &Probe<'_>, shift: Option<usize>) -> f64 {
    let mut h = p.a.trace() + 2.0 * dot(p.x, p.mu_embedded);
    if let Some(i) = shift {
        h += 2.0 * p.x_dot_aei(i);
    }
    h
}

fn ratio(p: &Probe<'_>, shift: Option<usize>) -> f64 {
    let r = norm(p.x);
    shifted_trace(p, shift) / (1.0 + r * r)
}

/// Least-squares slope of `ln v` on `ln ρ`.
fn loglog_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx > 0.0 {
        sxy / sxx
    } else {
        0.0
    }
}

/// Decides whether per-radius sups keep growing: the slope over the outer half
/// of the radii `≥ 1`. `Some(witness radius index)` when they grow.
fn growth_trend(ext: &[SphereExtremes]) -> (Option<usize>, f64) {
    let outer: Vec<usize> = (0..ext.len()).filter(|&k| ext[k].radius >= 1.0 && ext[k].samples > 0).collect();
    let half = &outer[outer.len() / 2..];
    let pts: Vec<(f64, f64)> = half.iter().map(|&k| (ext[k].radius, ext[k].sup.value)).collect();
    if pts.len() < 3 || pts.iter().any(|p| p.1 <= 0.0) {
        return (None, 0.0);
    }
    let s = loglog_slope(&pts);
    let last = *half.last().expect("len >= 3");
    if s > GROWTH_SLOPE && ext[last].sup.value > ext[half[0]].sup.value {
        (Some(last), s)
    } else {
        (None, s)
    }
}

/// Probes used to evaluate a fitted time profile: every fourth radius, 64
/// directions.
fn reduced(opts: &CheckOptions, radii: &[f64]) -> EnvelopeOptions {
    EnvelopeOptions {
        radii: radii.iter().copied().step_by(4).collect(),
        samples_per_sphere: opts.envelope.samples_per_sphere.min(64),
        time_points: 1,
        seed: opts.envelope.seed,
    }
}

/// `sup_x q(t, x)` over the reduced probes at a single time `t`.
fn sup_at_time<F>(model: &MarketModel, env: &EnvelopeOptions, t: f64, q: F) -> Result<f64, CriteriaError>
where
    F: Fn(&Probe<'_>) -> f64 + Sync,
{
    let dirs = crate::envelopes::sphere_directions(model.d, env.samples_per_sphere, env.seed);
    let mut best = f64::NEG_INFINITY;
    for &rho in &env.radii {
        for u in &dirs {
            let x: Vec<f64> = u.iter().map(|c| c * rho).collect();
            let a = model.eval_a(t, &x)?;
            let mu = model.eval_embedded_mu(t, &x)?;
            best = best.max(q(&Probe { t, x: &x, a: &a, mu_embedded: &mu }));
        }
    }
    Ok(best)
}

fn linear_growth(
    id: ConditionId,
    model: &MarketModel,
    certs: &CertificateBundle,
    shift: Option<usize>,
    opts: &CheckOptions,
) -> Result<ConditionReport, CriteriaError> {
    let mut radii = vec![0.0];
    radii.extend(opts.envelope.radii.iter().copied());
    let mut ev = Evidence::default();
    if let Some(z) = &certs.zeta {
        let zeta = Zeta::Expr(z);
        ev.inequalities.push(sphere_inequality(model, opts, &radii, "zeta(t)(1 + |x|^2) >= trace bound", |p| {
            let r = norm(p.x);
            Ok((zeta.eval(p.t)? * (1.0 + r * r), shifted_trace(p, shift)))
        })?);
        ev.integrals.extend(zeta.integrability(model.horizon, &opts.tail)?);
        return Ok(ConditionReport::conclude(id, Mode::Certificate, ev, vec![]));
    }
    let ext = sphere_extremes(model, &opts.with_radii(radii.clone()), |p| Ok(ratio(p, shift)))?;
    let (grows, slope) = growth_trend(&ext);
    ev.value("outer log-log slope of the ratio", slope);
    if let Some(k) = grows {
        let w = &ext[k].sup;
        ev.fail_with(
            "ratio bounded in |x|",
            format!("sup of the ratio grows like |x|^{slope:.3}"),
            WitnessRecord {
                reason: "ratio keeps growing with the radius".into(),
                t: Some(w.t),
                x: w.x.clone(),
                value: w.value,
            },
        );
        return Ok(ConditionReport::conclude(id, Mode::Evidence, ev, vec![]));
    }
    ev.check("ratio bounded in |x|", Outcome::Pass, format!("outer slope {slope:.3}"));
    let zeta = ext.iter().map(|e| e.sup.value).fold(0.0, f64::max);
    ev.value("fitted zeta (sup over probes)", zeta);
    if model.is_time_independent() {
        ev.integrals.extend(Zeta::Const(zeta).integrability(model.horizon, &opts.tail)?);
    } else {
        let env = reduced(opts, &radii);
        ev.integrals.extend(sampled_time_integrability(
            |t| Ok(sup_at_time(model, &env, t, |p| ratio(p, shift))?.max(0.0)),
            model.horizon,
            &opts.tail,
        )?);
    }
    Ok(ConditionReport::conclude(id, Mode::Evidence, ev, vec!["zeta fitted as the sampled sup of the ratio".into()]))
}

/// `trace a + 2⟨x, (0, μ)⟩ ≤ ζ(t)(1 + ‖x‖²)` with `∫ζ < ∞`.
pub fn check_el3(model: &MarketModel, certs: &CertificateBundle, opts: &CheckOptions) -> Result<ConditionReport, CriteriaError> {
    linear_growth(ConditionId::El3, model, certs, None, opts)
}

/// The linear-growth bound with the drift shifted by `a e_i`, for every asset.
pub fn check_e3(model: &MarketModel, certs: &CertificateBundle, opts: &CheckOptions) -> Result<ConditionReport, CriteriaError> {
    let mut ev = Evidence::default();
    let mut reports = Vec::with_capacity(model.m);
    for i in 1..=model.m {
        reports.push(linear_growth(ConditionId::E3, model, certs, Some(i), opts)?);
    }
    let mode = reports.iter().map(|r| r.mode).min().expect("m >= 1");
    let mut notes = Vec::new();
    for (k, r) in reports.into_iter().enumerate() {
        ev.absorb(&format!("asset {}: ", k + 1), r.evidence);
        for n in r.notes {
            if !notes.contains(&n) {
                notes.push(n);
            }
        }
    }
    Ok(ConditionReport::conclude(ConditionId::E3, mode, ev, notes))
}

/// Sampled `sup_x max_i a_ii(t, x)` at times approaching each end of `[0, T]`;
/// `true` when it keeps growing toward an end.
fn time_blow_up(model: &MarketModel, opts: &CheckOptions, radii: &[f64]) -> Result<bool, CriteriaError> {
    let env = reduced(opts, radii);
    let m = model.m;
    let diag = |p: &Probe<'_>| (0..m).map(|i| p.a[(i, i)]).fold(f64::NEG_INFINITY, f64::max);
    for left in [true, false] {
        let mut pts = Vec::new();
        for k in 8..=24 {
            let s = model.horizon * 2f64.powi(-k);
            let t = if left { s } else { model.horizon - s };
            let g = sup_at_time(model, &env, t, diag)?;
            pts.push((1.0 / s, g.max(1e-300)));
        }
        if loglog_slope(&pts) > GROWTH_SLOPE {
            return Ok(true);
        }
    }
    Ok(false)
}

/// `max_{i≤m} a_ii(t, x) ≤ ζ(t) â(t, x)` with `â` locally bounded and `∫ζ < ∞`.
pub fn check_growth_cap(model: &MarketModel, certs: &CertificateBundle, opts: &CheckOptions) -> Result<ConditionReport, CriteriaError> {
    let id = ConditionId::GrowthCap;
    let m = model.m;
    let mut radii = vec![0.0];
    radii.extend(opts.envelope.radii.iter().copied());
    let diag = move |p: &Probe<'_>| (0..m).map(|i| p.a[(i, i)]).fold(f64::NEG_INFINITY, f64::max);
    let mut ev = Evidence::default();
    if let Some(a_hat) = &certs.a_hat {
        let zeta = certs.zeta.as_ref().map_or(Zeta::Const(1.0), Zeta::Expr);
        ev.inequalities.push(sphere_inequality(model, opts, &radii, "zeta(t) a_hat(t,x) >= max_i a_ii", |p| {
            Ok((zeta.eval(p.t)? * a_hat.eval_state(p.t, p.x)?, diag(p)))
        })?);
        let ext = sphere_extremes(model, &opts.with_radii(radii.clone()), |p| Ok(a_hat.eval_state(p.t, p.x)?.abs()))?;
        let mut ball = 0.0f64;
        for e in &ext {
            ball = ball.max(e.sup.value);
            if e.radius >= 1.0 && e.radius.log2().fract() == 0.0 {
                ev.value(format!("sup |a_hat| on the ball of radius {}", e.radius), ball);
            }
        }
        ev.check("a_hat locally bounded", Outcome::Pass, "finite on every sampled ball");
        ev.integrals.extend(zeta.integrability(model.horizon, &opts.tail)?);
        return Ok(ConditionReport::conclude(id, Mode::Certificate, ev, vec![]));
    }
    let ext = sphere_extremes(model, &opts.with_radii(radii.clone()), |p| Ok(diag(p)))?;
    let mut ball = 0.0f64;
    for e in &ext {
        ball = ball.max(e.sup.value);
    }
    ev.value("sup of max_i a_ii over the probes", ball);
    if !model.a_is_time_independent() && time_blow_up(model, opts, &radii)? {
        ev.check(
            "a locally bounded in time",
            Outcome::Unknown,
            "max_i a_ii grows toward an end of [0, T]",
        );
        return Ok(ConditionReport::conclude(
            id,
            Mode::Evidence,
            ev,
            vec!["supply zeta and a_hat certificates for time-singular diffusions".into()],
        ));
    }
    ev.check("a locally bounded", Outcome::Pass, "a_hat = max_i a_ii, zeta = 1");
    ev.integrals.extend(Zeta::Const(1.0).integrability(model.horizon, &opts.tail)?);
    Ok(ConditionReport::conclude(id, Mode::Evidence, ev, vec![]))
}

/// `μ ≡ 0` and either `limsup n²/γ(n) = ∞` or `∫^∞ x/ξ(x) dx = ∞` for some
/// `ξ ≥ γ`, where `γ(z) = sup_{‖x‖≤z} sup_t λ_max(a)`.
pub fn check_mckean(model: &MarketModel, certs: &CertificateBundle, opts: &CheckOptions) -> Result<ConditionReport, CriteriaError> {
    let id = ConditionId::Mckean;
    let mut ev = Evidence::default();
    if !model.mu_is_zero_literal() {
        let plan = SamplePlan {
            cloud: 64,
            seed: opts.seed(),
            ..SamplePlan::default()
        };
        for x in plan.points(model) {
            for t in model.probe_times(plan.time_points) {
                let mu = model.eval_mu(t, &x)?;
                if let Some(v) = mu.iter().copied().find(|v| *v != 0.0) {
                    ev.fail_with(
                        "mu vanishes",
                        "mu is non-zero at a probe",
                        WitnessRecord {
                            reason: "mu(t,x) != 0".into(),
                            t: Some(t),
                            x,
                            value: v,
                        },
                    );
                    return Ok(ConditionReport::conclude(id, Mode::Evidence, ev, vec![]));
                }
            }
        }
        ev.check("mu vanishes", Outcome::Pass, "zero at every probe");
    } else {
        ev.check("mu vanishes", Outcome::Pass, "mu is identically zero");
    }
    let z0 = certs.z0.unwrap_or(0.0).max(norm(&model.x0));
    let base = z0.max(1.0);
    let zs: Vec<f64> = (0..=12).map(|k| base * 2f64.powi(k)).collect();
    let g = gamma_profile(model, &zs, opts.envelope.samples_per_sphere, 9, opts.seed())?;
    let ratios: Vec<f64> = zs
        .iter()
        .zip(&g.gamma)
        .map(|(z, gamma)| if *gamma > 0.0 { z * z / gamma } else { f64::INFINITY })
        .collect();
    let mut doublings = 0;
    let mut prior = ratios[0];
    for r in &ratios[1..] {
        if *r >= 2.0 * prior {
            doublings += 1;
        } else {
            doublings = 0;
        }
        prior = prior.max(*r);
    }
    ev.value("trailing doublings of n^2/gamma(n)", doublings as f64);
    if doublings >= 3 || ratios.iter().any(|r| r.is_infinite()) {
        ev.check("limsup n^2/gamma(n) = infinity", Outcome::Pass, format!("{doublings} trailing doublings"));
        return Ok(ConditionReport::conclude(id, Mode::Evidence, ev, vec![]));
    }
    ev.value("n^2/gamma(n) at the largest n", *ratios.last().expect("non-empty"));
    match &certs.xi {
        Some(xi) => {
            let mut worst: Option<(usize, f64)> = None;
            for (k, (z, gamma)) in zs.iter().zip(&g.gamma).enumerate() {
                let v = xi.eval_radial(*z)?;
                let m = (v - gamma) / (1.0 + v.abs() + gamma.abs());
                if worst.is_none_or(|w| m < w.1) {
                    worst = Some((k, m));
                }
            }
            let (k, m) = worst.expect("non-empty grid");
            if m < -opts.tol {
                let w = &g.argmax[k];
                ev.fail_with(
                    "xi >= gamma",
                    format!("xi({}) < gamma", zs[k]),
                    WitnessRecord {
                        reason: "largest eigenvalue exceeds xi".into(),
                        t: Some(w.t),
                        x: w.x.clone(),
                        value: w.value,
                    },
                );
                return Ok(ConditionReport::conclude(id, Mode::Certificate, ev, vec![]));
            }
            ev.check("xi >= gamma", Outcome::Pass, "on the doubling grid");
            let v = classify_tail(|x| Ok(x / xi.eval_radial(x)?), base, Direction::ToInfinity, &opts.tail);
            ev.integrals.push(integral_record(
                "integral of x/xi(x) diverges",
                IntegralKind::Diverges,
                Direction::ToInfinity,
                v,
            )?);
            Ok(ConditionReport::conclude(id, Mode::Certificate, ev, vec![]))
        }
        None => {
            let Some(fit) = LogLogFit::new(&zs, &g.gamma) else {
                return Ok(ConditionReport::inconclusive(id, Mode::Evidence, ev, "gamma vanishes on the grid"));
            };
            let v = classify_tail(|x| Ok(x / fit.eval(x)), base, Direction::ToInfinity, &opts.tail);
            ev.integrals.push(integral_record(
                "integral of x/gamma(x) diverges",
                IntegralKind::Diverges,
                Direction::ToInfinity,
                v,
            )?);
            Ok(ConditionReport::conclude(
                id,
                Mode::Evidence,
                ev,
                vec!["xi fitted as the sampled gamma profile".into()],
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::Verdict;
    use crate::dsl::{Expr, Scope};
    use crate::envelopes::geometric_grid;

    fn opts() -> CheckOptions {
        CheckOptions {
            envelope: EnvelopeOptions {
                radii: geometric_grid(1e-2, 1024.0, 32),
                samples_per_sphere: 64,
                ..Default::default()
            },
            ..Default::default()
        }
    }

    fn model(a: &[&[&str]], b: &[&str], mu: &[&str]) -> MarketModel {
        let d = a.len();
        let m = d - mu.len();
        let mut x0 = vec![0.0; d];
        x0[0] = 1.0;
        MarketModel::from_sources(m, 1.0, x0, vec![1.0; m], b, a, mu).unwrap()
    }

    fn power(delta: f64) -> MarketModel {
        let f = format!("(max(abs(x1),1))^{delta}");
        model(&[&[f.as_str()]], &["0"], &[])
    }

    #[test]
    fn el3_examples() {
        let none = CertificateBundle::default();
        let id = model(&[&["1", "0"], &["0", "1"]], &["0", "0"], &[]);
        let r = check_el3(&id, &none, &opts()).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        let z = r.evidence.values.iter().find(|v| v.name.starts_with("fitted zeta")).unwrap().value;
        assert!((z - 2.0).abs() < 1e-12);
        let gir = model(&[&["min(abs(x1)^0.5,1)"]], &["0"], &[]);
        assert_eq!(check_el3(&gir, &none, &opts()).unwrap().verdict, Verdict::Holds);
        let cubic = power(3.0);
        let r = check_el3(&cubic, &none, &opts()).unwrap();
        assert_eq!(r.verdict, Verdict::Fails);
        assert!(r.has_witness());
    }

    #[test]
    fn e3_power_family() {
        let none = CertificateBundle::default();
        for (delta, holds) in [(0.5, true), (1.0, true), (1.5, false), (2.0, false)] {
            let r = check_e3(&power(delta), &none, &opts()).unwrap();
            assert_eq!(r.verdict == Verdict::Holds, holds, "delta={delta}");
        }
    }

    #[test]
    fn e3_linear_mu() {
        let m = model(&[&["1", "0"], &["0", "1"]], &["0", "0"], &["3*x2"]);
        let none = CertificateBundle::default();
        assert_eq!(check_e3(&m, &none, &opts()).unwrap().verdict, Verdict::Holds);
        assert_eq!(check_el3(&m, &none, &opts()).unwrap().verdict, Verdict::Holds);
    }

    #[test]
    fn el3_certificate() {
        let c = CertificateBundle {
            zeta: Some(Expr::parse_in("2", Scope::Time).unwrap()),
            ..Default::default()
        };
        let id = model(&[&["1", "0"], &["0", "1"]], &["0", "0"], &[]);
        let r = check_el3(&id, &c, &opts()).unwrap();
        assert_eq!((r.verdict, r.mode), (Verdict::Holds, Mode::Certificate));
        let c = CertificateBundle {
            zeta: Some(Expr::parse_in("1", Scope::Time).unwrap()),
            ..Default::default()
        };
        assert_eq!(check_el3(&id, &c, &opts()).unwrap().verdict, Verdict::Fails);
    }

    #[test]
    fn growth_cap_examples() {
        let none = CertificateBundle::default();
        let gir = model(&[&["min(abs(x1)^0.5,1)"]], &["0"], &[]);
        assert_eq!(check_growth_cap(&gir, &none, &opts()).unwrap().verdict, Verdict::Holds);
        assert_eq!(check_growth_cap(&power(3.0), &none, &opts()).unwrap().verdict, Verdict::Holds);
        let sing = model(&[&["1/sqrt(t)", "0"], &["0", "1/sqrt(t)"]], &["0", "0"], &[]);
        let r = check_growth_cap(&sing, &none, &opts()).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
        let c = CertificateBundle {
            zeta: Some(Expr::parse_in("1/sqrt(t)", Scope::Time).unwrap()),
            a_hat: Some(Expr::parse_in("1", Scope::State { dim: 2 }).unwrap()),
            ..Default::default()
        };
        let r = check_growth_cap(&sing, &c, &opts()).unwrap();
        assert_eq!((r.verdict, r.mode), (Verdict::Holds, Mode::Certificate), "{:#?}", r.evidence);
    }

    #[test]
    fn mckean_examples() {
        let id = model(&[&["1", "0"], &["0", "1"]], &["0", "0"], &[]);
        let none = CertificateBundle::default();
        assert_eq!(check_mckean(&id, &none, &opts()).unwrap().verdict, Verdict::Holds);
        let quad = model(&[&["(max(norm,1))^2", "0"], &["0", "(max(norm,1))^2"]], &["0", "0"], &[]);
        let xi = CertificateBundle {
            xi: Some(Expr::parse_in("z^2", Scope::Radial).unwrap()),
            ..Default::default()
        };
        let r = check_mckean(&quad, &xi, &opts()).unwrap();
        assert_eq!((r.verdict, r.mode), (Verdict::Holds, Mode::Certificate), "{:#?}", r.evidence);
        let cubic = model(&[&["(max(norm,1))^3", "0"], &["0", "(max(norm,1))^3"]], &["0", "0"], &[]);
        let xi3 = CertificateBundle {
            xi: Some(Expr::parse_in("z^3", Scope::Radial).unwrap()),
            ..Default::default()
        };
        let r = check_mckean(&cubic, &xi3, &opts()).unwrap();
        assert_eq!(r.verdict, Verdict::Fails);
        assert!(r.has_witness());
        let r = check_mckean(&cubic, &none, &opts()).unwrap();
        assert_eq!((r.verdict, r.mode), (Verdict::Fails, Mode::Evidence));
    }

    #[test]
    fn mckean_rejects_nonzero_mu() {
        let m = model(&[&["1", "0"], &["0", "1"]], &["0", "0"], &["x2"]);
        let r = check_mckean(&m, &CertificateBundle::default(), &opts()).unwrap();
        assert_eq!(r.verdict, Verdict::Fails);
        assert!(r.has_witness());
    }
}
