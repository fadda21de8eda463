//! Khasminskii-type radial conditions: existence side (upper envelopes,
//! divergent nested integral) and non-existence side (lower envelopes,
//! explosion to infinity without implosion to zero).

use super::{
    anchor, integral_record, radial_positivity, sphere_inequality, CheckOptions, ConditionId, ConditionReport,
    CriteriaError, Evidence, LogLogFit, Mode, Outcome, RadialFn, WitnessRecord, Zeta,
};
use crate::dsl::DslError;
use crate::envelopes::{modulus_estimate_with, operator_norm, sphere_extremes, Probe};
use crate::model::{dot, CertificateBundle, MarketModel, Modulus};
use crate::quadrature::{classify_tail, khasminskii_nested, Direction, IntegralKind};

const REGULARITY_BALLS: [f64; 4] = [2.0, 4.0, 8.0, 16.0];

/// `trace a + 2⟨x, (0, μ)⟩`, plus `2⟨x, a e_i⟩` for asset `i`.
fn drift_trace(p: &Probe<'_>, with_mu: bool, shift: Option<usize>) -> f64 {
    let mut h = p.a.trace();
    if with_mu {
        h += 2.0 * dot(p.x, p.mu_embedded);
    }
    if let Some(i) = shift {
        h += 2.0 * p.x_dot_aei(i);
    }
    h
}

struct UpperCert<'a> {
    r: f64,
    zeta: Zeta<'a>,
    a: RadialFn<'a>,
    b: RadialFn<'a>,
}

fn split_radii(grid: &[f64], s: f64) -> (Vec<f64>, Vec<f64>) {
    let mut inner = vec![0.0];
    inner.extend(grid.iter().copied().filter(|r| *r < s));
    inner.push(s);
    let mut outer = vec![s];
    outer.extend(grid.iter().copied().filter(|r| *r > s));
    (inner, outer)
}

fn verify_upper(
    model: &MarketModel,
    cert: &UpperCert<'_>,
    shift: Option<usize>,
    opts: &CheckOptions,
) -> Result<Evidence, CriteriaError> {
    let mut ev = Evidence::default();
    let s = (2.0 * cert.r).sqrt();
    let (inner, outer) = split_radii(&opts.envelope.radii, s);
    ev.value("r", cert.r);
    ev.inequalities.push(sphere_inequality(model, opts, &inner, "zeta(t) >= |a| + |mu| on the small ball", |p| {
        Ok((cert.zeta.eval(p.t)?, operator_norm(p.a) + crate::model::norm(p.mu_embedded)))
    })?);
    ev.inequalities.push(sphere_inequality(model, opts, &outer, "zeta(t) A(rho^2/2) >= <ax,x>", |p| {
        let rho = crate::model::norm(p.x);
        Ok((cert.zeta.eval(p.t)? * cert.a.eval(0.5 * rho * rho)?, p.axx()))
    })?);
    ev.inequalities.push(sphere_inequality(
        model,
        opts,
        &outer,
        "zeta(t) <ax,x> B(rho^2/2) >= drift-adjusted trace",
        |p| {
            let rho = crate::model::norm(p.x);
            Ok((cert.zeta.eval(p.t)? * p.axx() * cert.b.eval(0.5 * rho * rho)?, drift_trace(p, true, shift)))
        },
    )?);
    let zs: Vec<f64> = outer.iter().map(|r| 0.5 * r * r).collect();
    ev.inequalities.push(radial_positivity("A > 0", &zs, |z| cert.a.eval(z))?);
    ev.inequalities.push(radial_positivity("B > 0", &zs, |z| cert.b.eval(z))?);
    ev.integrals.extend(cert.zeta.integrability(model.horizon, &opts.tail)?);
    if ev.inequalities.iter().all(|r| r.holds) {
        let v = khasminskii_nested(|z| cert.a.eval(z), |z| cert.b.eval(z), cert.r, Direction::ToInfinity, &opts.tail);
        ev.integrals.push(integral_record(
            "nested integral to infinity diverges",
            IntegralKind::Diverges,
            Direction::ToInfinity,
            v,
        )?);
    }
    Ok(ev)
}

/// Fits `A` as the sampled sup of `⟨ax,x⟩`, `B` as the sampled sup of the
/// drift-adjusted trace over `⟨ax,x⟩`, and `ζ` as a constant covering the
/// small ball. `Err(note)` when no finite `B` fits.
fn fit_upper<'a>(
    model: &MarketModel,
    shift: Option<usize>,
    opts: &CheckOptions,
) -> Result<Result<UpperCert<'a>, String>, CriteriaError> {
    let r = anchor(model);
    let s = (2.0 * r).sqrt();
    let (inner, outer) = split_radii(&opts.envelope.radii, s);
    let small = sphere_extremes(model, &opts.with_radii(inner), |p| {
        Ok(operator_norm(p.a) + crate::model::norm(p.mu_embedded))
    })?;
    let zeta = small.iter().map(|e| e.sup.value).fold(1.0, f64::max);
    let env = opts.with_radii(outer.clone());
    let a_sup = sphere_extremes(model, &env, |p| Ok(p.axx()))?;
    let b_sup = sphere_extremes(model, &env, |p| {
        let (h, q) = (drift_trace(p, true, shift), p.axx());
        Ok(if q > 0.0 {
            h / q
        } else if h <= 0.0 {
            0.0
        } else {
            f64::MAX
        })
    })?;
    if b_sup.iter().any(|e| e.sup.value == f64::MAX) {
        return Ok(Err("<ax,x> vanishes where the trace bound is positive; no finite B fits".into()));
    }
    let zs: Vec<f64> = outer.iter().map(|r| 0.5 * r * r).collect();
    let a_vals: Vec<f64> = a_sup.iter().map(|e| e.sup.value).collect();
    let b_vals: Vec<f64> = b_sup.iter().map(|e| e.sup.value.max(1e-12)).collect();
    let (Some(a), Some(b)) = (LogLogFit::new(&zs, &a_vals), LogLogFit::new(&zs, &b_vals)) else {
        return Ok(Err("<ax,x> vanishes on every sampled sphere".into()));
    };
    Ok(Ok(UpperCert {
        r,
        zeta: Zeta::Const(zeta),
        a: RadialFn::Fitted(a),
        b: RadialFn::Fitted(b),
    }))
}

/// Existence-side radial condition for the local martingale density.
pub fn check_el1(model: &MarketModel, certs: &CertificateBundle, opts: &CheckOptions) -> Result<ConditionReport, CriteriaError> {
    let id = ConditionId::El1;
    match (&certs.big_a, &certs.big_b) {
        (Some(a), Some(b)) => {
            let cert = UpperCert {
                r: certs.r.unwrap_or_else(|| anchor(model)),
                zeta: certs.zeta.as_ref().map_or(Zeta::Const(1.0), Zeta::Expr),
                a: RadialFn::Expr(a),
                b: RadialFn::Expr(b),
            };
            let ev = verify_upper(model, &cert, None, opts)?;
            Ok(ConditionReport::conclude(id, Mode::Certificate, ev, vec![]))
        }
        _ if opts.autonomous => match fit_upper(model, None, opts)? {
            Ok(cert) => {
                let ev = verify_upper(model, &cert, None, opts)?;
                Ok(ConditionReport::conclude(id, Mode::Evidence, ev, vec!["A, B, zeta fitted from sampled envelopes".into()]))
            }
            Err(note) => Ok(ConditionReport::inconclusive(id, Mode::Evidence, Evidence::default(), note)),
        },
        (None, _) => Err(CriteriaError::MissingCertificate { condition: id, name: "A" }),
        (_, None) => Err(CriteriaError::MissingCertificate { condition: id, name: "B" }),
    }
}

/// Existence-side radial condition for asset `i` (1-based) under the drift
/// shifted by `a e_i`.
pub fn check_e1_asset(
    model: &MarketModel,
    certs: &CertificateBundle,
    i: usize,
    opts: &CheckOptions,
) -> Result<ConditionReport, CriteriaError> {
    let id = ConditionId::E1;
    if i == 0 || i > model.m {
        return Err(CriteriaError::AssetIndex { index: i, m: model.m });
    }
    let asset = certs.asset(i);
    let pair = asset.and_then(|c| c.big_a.as_ref().zip(c.big_b.as_ref()));
    match pair {
        Some((a, b)) => {
            let c = asset.expect("pair implies asset");
            let zeta = c.zeta.as_ref().or(certs.zeta.as_ref());
            let cert = UpperCert {
                r: c.r.or(certs.r).unwrap_or_else(|| anchor(model)),
                zeta: zeta.map_or(Zeta::Const(1.0), Zeta::Expr),
                a: RadialFn::Expr(a),
                b: RadialFn::Expr(b),
            };
            let ev = verify_upper(model, &cert, Some(i), opts)?;
            Ok(ConditionReport::conclude(id, Mode::Certificate, ev, vec![format!("asset {i}")]))
        }
        None if opts.autonomous => match fit_upper(model, Some(i), opts)? {
            Ok(cert) => {
                let ev = verify_upper(model, &cert, Some(i), opts)?;
                Ok(ConditionReport::conclude(
                    id,
                    Mode::Evidence,
                    ev,
                    vec![format!("asset {i}"), "A, B, zeta fitted from sampled envelopes".into()],
                ))
            }
            Err(note) => Ok(ConditionReport::inconclusive(id, Mode::Evidence, Evidence::default(), note)),
        },
        None => Err(CriteriaError::MissingCertificate { condition: id, name: "per-asset A and B" }),
    }
}

/// Combines per-asset reports: `Holds` iff every asset holds, `Fails` if any fails.
fn all_assets(id: ConditionId, reports: Vec<ConditionReport>) -> ConditionReport {
    let mut ev = Evidence::default();
    let mut notes = Vec::new();
    let mode = reports.iter().map(|r| r.mode).min().unwrap_or(Mode::Evidence);
    let verdict = if reports.iter().any(|r| r.verdict == super::Verdict::Fails) {
        super::Verdict::Fails
    } else if reports.iter().all(|r| r.verdict == super::Verdict::Holds) {
        super::Verdict::Holds
    } else {
        super::Verdict::Inconclusive
    };
    for (k, r) in reports.into_iter().enumerate() {
        ev.absorb(&format!("asset {}: ", k + 1), r.evidence);
        notes.extend(r.notes.into_iter().filter(|n| !n.starts_with("asset ")));
    }
    notes.dedup();
    ConditionReport {
        condition_id: id,
        verdict,
        mode,
        evidence: ev,
        notes,
    }
}

/// The shifted existence condition for every asset.
pub fn check_e1(model: &MarketModel, certs: &CertificateBundle, opts: &CheckOptions) -> Result<ConditionReport, CriteriaError> {
    let reports = (1..=model.m)
        .map(|i| check_e1_asset(model, certs, i, opts))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(all_assets(ConditionId::E1, reports))
}

struct LowerCert<'a> {
    a: RadialFn<'a>,
    b: RadialFn<'a>,
    rho: Modulus,
    kappa: Modulus,
}

fn regularity(name: &str, cert: &LowerCert<'_>, opts: &CheckOptions, ev: &mut Evidence) -> Result<(), CriteriaError> {
    for n in REGULARITY_BALLS {
        let (lo, hi) = (1.0 / n, n);
        let (c, radius) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        let checks: [(&str, &dyn Fn(f64) -> Result<f64, DslError>, &Modulus, bool); 2] = [
            ("A^(1/2)", &|z| Ok(cert.a.eval(z)?.max(0.0).sqrt()), &cert.rho, true),
            ("A B", &|z| Ok(cert.a.eval(z)? * cert.b.eval(z)?), &cert.kappa, false),
        ];
        for (label, field, modulus, squared) in checks {
            let est = modulus_estimate_with(
                |u: &[f64]| Ok(vec![field(c + u[0])?]),
                1,
                radius,
                &[vec![0.0]],
                opts.modulus_points,
                opts.modulus_levels,
                opts.seed(),
                |diff, sep| {
                    let m = modulus.eval(sep)?;
                    Ok(if squared { diff * diff / m } else { diff / m })
                },
            )?;
            let check = format!("{name}{label} modulus on [1/{n}, {n}]");
            let detail = format!("sampled constant {:.6e}", est.constant);
            if est.is_growing() {
                let (x, y) = est.pair.clone();
                ev.fail_with(
                    check,
                    detail,
                    WitnessRecord {
                        reason: format!("{label} modulus grows at separation -> 0"),
                        t: None,
                        x: vec![c + x[0], c + y[0]],
                        value: est.constant,
                    },
                );
            } else if est.is_stable() {
                ev.check(check, Outcome::Pass, detail);
            } else {
                ev.check(check, Outcome::Unknown, detail);
            }
        }
    }
    for (label, modulus) in [("rho_n", &cert.rho), ("kappa_n", &cert.kappa)] {
        let v = classify_tail(|z| Ok(1.0 / modulus.eval(z)?), 1.0, Direction::ToZero, &opts.tail);
        ev.integrals.push(integral_record(
            &format!("integral of 1/{label} near 0 diverges"),
            IntegralKind::Diverges,
            Direction::ToZero,
            v,
        )?);
    }
    Ok(())
}

fn verify_lower(
    model: &MarketModel,
    cert: &LowerCert<'_>,
    shift: Option<usize>,
    opts: &CheckOptions,
) -> Result<Evidence, CriteriaError> {
    let mut ev = Evidence::default();
    let r = anchor(model);
    ev.value("anchor", r);
    let radii = &opts.envelope.radii;
    ev.inequalities.push(sphere_inequality(model, opts, radii, "A(rho^2/2) <= <ax,x>", |p| {
        let rho = crate::model::norm(p.x);
        Ok((p.axx(), cert.a.eval(0.5 * rho * rho)?))
    })?);
    ev.inequalities.push(sphere_inequality(model, opts, radii, "<ax,x> B(rho^2/2) <= shifted trace", |p| {
        let rho = crate::model::norm(p.x);
        Ok((drift_trace(p, false, shift), p.axx() * cert.b.eval(0.5 * rho * rho)?))
    })?);
    let zs: Vec<f64> = radii.iter().map(|r| 0.5 * r * r).collect();
    ev.inequalities.push(radial_positivity("A > 0", &zs, |z| cert.a.eval(z))?);
    ev.inequalities.push(radial_positivity("B > 0", &zs, |z| cert.b.eval(z))?);
    if ev.inequalities.iter().all(|r| r.holds) {
        for (name, dir, want) in [
            ("nested integral to infinity converges", Direction::ToInfinity, IntegralKind::Converges),
            ("nested integral to zero diverges", Direction::ToZero, IntegralKind::Diverges),
        ] {
            let v = khasminskii_nested(|z| cert.a.eval(z), |z| cert.b.eval(z), r, dir, &opts.tail);
            ev.integrals.push(integral_record(name, want, dir, v)?);
        }
        regularity("", cert, opts, &mut ev)?;
    }
    Ok(ev)
}

/// Fits `A` and `B` as sampled infima. A non-positive infimum is itself a
/// witness that no admissible `A` or `B` exists.
fn fit_lower<'a>(model: &MarketModel, shift: Option<usize>, opts: &CheckOptions) -> Result<Result<LowerCert<'a>, Evidence>, CriteriaError> {
    let env = &opts.envelope;
    let a_inf = sphere_extremes(model, env, |p| Ok(p.axx()))?;
    let b_inf = sphere_extremes(model, env, |p| {
        let q = p.axx();
        Ok(if q > 0.0 { drift_trace(p, false, shift) / q } else { 0.0 })
    })?;
    let mut ev = Evidence::default();
    for (label, ext) in [("<ax,x>", &a_inf), ("shifted trace / <ax,x>", &b_inf)] {
        if let Some(e) = ext.iter().find(|e| e.samples > 0 && e.inf.value <= 0.0) {
            ev.fail_with(
                format!("{label} bounded below by a positive function"),
                format!("infimum {:.6e} on the sphere of radius {:.6e}", e.inf.value, e.radius),
                WitnessRecord {
                    reason: format!("{label} is not positive"),
                    t: Some(e.inf.t),
                    x: e.inf.x.clone(),
                    value: e.inf.value,
                },
            );
            return Ok(Err(ev));
        }
    }
    let zs: Vec<f64> = env.radii.iter().map(|r| 0.5 * r * r).collect();
    let a = LogLogFit::new(&zs, &a_inf.iter().map(|e| e.inf.value).collect::<Vec<_>>());
    let b = LogLogFit::new(&zs, &b_inf.iter().map(|e| e.inf.value).collect::<Vec<_>>());
    match (a, b) {
        (Some(a), Some(b)) => Ok(Ok(LowerCert {
            a: RadialFn::Fitted(a),
            b: RadialFn::Fitted(b),
            rho: Modulus::Linear,
            kappa: Modulus::Linear,
        })),
        _ => {
            ev.check("fit lower envelopes", Outcome::Unknown, "too few usable radii");
            Ok(Err(ev))
        }
    }
}

fn lower_report(
    id: ConditionId,
    model: &MarketModel,
    certs: &CertificateBundle,
    pair: Option<(&crate::dsl::Expr, &crate::dsl::Expr)>,
    shift: Option<usize>,
    opts: &CheckOptions,
) -> Result<ConditionReport, CriteriaError> {
    if model.d != model.m {
        return Err(CriteriaError::DimensionMismatch { condition: id, d: model.d, m: model.m });
    }
    let rho = certs.rho_n.clone().unwrap_or(Modulus::Linear);
    let kappa = certs.kappa_n.clone().unwrap_or(Modulus::Linear);
    let mut notes = Vec::new();
    if let Some(i) = shift {
        notes.push(format!("asset {i}"));
    }
    match pair {
        Some((a, b)) => {
            let cert = LowerCert {
                a: RadialFn::Expr(a),
                b: RadialFn::Expr(b),
                rho,
                kappa,
            };
            let ev = verify_lower(model, &cert, shift, opts)?;
            Ok(ConditionReport::conclude(id, Mode::Certificate, ev, notes))
        }
        None if opts.autonomous => {
            notes.push("A, B fitted from sampled envelopes".into());
            match fit_lower(model, shift, opts)? {
                Ok(cert) => {
                    let ev = verify_lower(model, &cert, shift, opts)?;
                    Ok(ConditionReport::conclude(id, Mode::Evidence, ev, notes))
                }
                Err(ev) => Ok(ConditionReport::conclude(id, Mode::Evidence, ev, notes)),
            }
        }
        None => Err(CriteriaError::MissingCertificate { condition: id, name: "A and B" }),
    }
}

/// Non-existence condition for the local martingale measure.
pub fn check_nl1(model: &MarketModel, certs: &CertificateBundle, opts: &CheckOptions) -> Result<ConditionReport, CriteriaError> {
    if certs.big_a.is_none() && !opts.autonomous {
        return Err(CriteriaError::MissingCertificate { condition: ConditionId::Nl1, name: "A" });
    }
    if certs.big_b.is_none() && !opts.autonomous {
        return Err(CriteriaError::MissingCertificate { condition: ConditionId::Nl1, name: "B" });
    }
    let pair = certs.big_a.as_ref().zip(certs.big_b.as_ref());
    lower_report(ConditionId::Nl1, model, certs, pair, None, opts)
}

/// Non-existence condition for the martingale density, asset `i` (1-based).
pub fn check_n1_asset(
    model: &MarketModel,
    certs: &CertificateBundle,
    i: usize,
    opts: &CheckOptions,
) -> Result<ConditionReport, CriteriaError> {
    if i == 0 || i > model.d {
        return Err(CriteriaError::AssetIndex { index: i, m: model.d });
    }
    let pair = certs.asset(i).and_then(|c| c.big_a.as_ref().zip(c.big_b.as_ref()));
    lower_report(ConditionId::N1, model, certs, pair, Some(i), opts)
}

/// Holds if the condition holds for some asset, fails if it fails for all.
pub fn check_n1(model: &MarketModel, certs: &CertificateBundle, opts: &CheckOptions) -> Result<ConditionReport, CriteriaError> {
    let id = ConditionId::N1;
    if model.d != model.m {
        return Err(CriteriaError::DimensionMismatch { condition: id, d: model.d, m: model.m });
    }
    let mut reports = Vec::new();
    let mut missing = None;
    for i in 1..=model.d {
        match check_n1_asset(model, certs, i, opts) {
            Ok(r) => reports.push((i, r)),
            Err(e @ CriteriaError::MissingCertificate { .. }) => missing = Some(e),
            Err(e) => return Err(e),
        }
    }
    if reports.is_empty() {
        return Err(missing.expect("d >= 1"));
    }
    let mode = reports.iter().map(|(_, r)| r.mode).min().expect("non-empty");
    let verdict = if reports.iter().any(|(_, r)| r.verdict == super::Verdict::Holds) {
        super::Verdict::Holds
    } else if reports.iter().all(|(_, r)| r.verdict == super::Verdict::Fails) && missing.is_none() {
        super::Verdict::Fails
    } else {
        super::Verdict::Inconclusive
    };
    let mut ev = Evidence::default();
    let mut notes = Vec::new();
    for (i, r) in reports {
        if r.verdict == super::Verdict::Holds {
            notes.push(format!("holds for asset {i}"));
        }
        ev.absorb(&format!("asset {i}: "), r.evidence);
    }
    if missing.is_some() {
        notes.push("some assets have no certificate".into());
    }
    Ok(ConditionReport {
        condition_id: id,
        verdict,
        mode,
        evidence: ev,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::Verdict;
    use crate::dsl::{Expr, Scope};
    use crate::envelopes::geometric_grid;
    use crate::model::AssetCertificate;

    fn radial(d: usize, f: &str) -> MarketModel {
        let a: Vec<Vec<String>> = (0..d)
            .map(|i| (0..d).map(|j| if i == j { f.to_string() } else { "0".into() }).collect())
            .collect();
        let rows: Vec<Vec<&str>> = a.iter().map(|r| r.iter().map(String::as_str).collect()).collect();
        let rows: Vec<&[&str]> = rows.iter().map(Vec::as_slice).collect();
        let b = vec!["0"; d];
        let mut x0 = vec![0.0; d];
        x0[0] = 1.0;
        MarketModel::from_sources(d, 1.0, x0, vec![1.0; d], &b, &rows, &[]).unwrap()
    }

    fn radial_expr(s: &str) -> Expr {
        Expr::parse_in(s, Scope::Radial).unwrap()
    }

    fn opts() -> CheckOptions {
        CheckOptions {
            envelope: crate::envelopes::EnvelopeOptions {
                radii: geometric_grid(1e-2, 1024.0, 32),
                samples_per_sphere: 64,
                ..Default::default()
            },
            ..Default::default()
        }
    }

    fn certs(a: &str, b: &str) -> CertificateBundle {
        CertificateBundle {
            big_a: Some(radial_expr(a)),
            big_b: Some(radial_expr(b)),
            ..Default::default()
        }
    }

    #[test]
    fn el1_brownian_holds() {
        let r = check_el1(&radial(1, "1"), &certs("2*z", "1/(2*z)"), &opts()).unwrap();
        assert_eq!(r.verdict, Verdict::Holds, "{:#?}", r.evidence);
        assert_eq!(r.mode, Mode::Certificate);
    }

    #[test]
    fn el1_cubic_radial_fails_on_the_integral() {
        let r = check_el1(&radial(3, "(max(norm,1))^3"), &certs("2*z*(sqrt(2*z))^3", "3/(2*z)"), &opts()).unwrap();
        assert_eq!(r.verdict, Verdict::Fails);
        assert!(r.evidence.inequalities.iter().filter(|i| !i.name.contains("small ball")).all(|i| i.holds));
        assert!(r.has_witness());
    }

    #[test]
    fn el1_missing_certificate() {
        let c = CertificateBundle {
            big_b: Some(radial_expr("1")),
            ..Default::default()
        };
        assert!(matches!(
            check_el1(&radial(1, "1"), &c, &opts()),
            Err(CriteriaError::MissingCertificate { name: "A", .. })
        ));
    }

    #[test]
    fn el1_autonomous_brownian() {
        let o = CheckOptions { autonomous: true, ..opts() };
        let r = check_el1(&radial(2, "1"), &CertificateBundle::default(), &o).unwrap();
        assert_eq!(r.verdict, Verdict::Holds, "{:#?}", r.evidence.integrals);
        assert_eq!(r.mode, Mode::Evidence);
    }

    fn asset_certs(a: &str, b: &str) -> CertificateBundle {
        CertificateBundle {
            per_asset: vec![AssetCertificate {
                index: 1,
                r: None,
                zeta: None,
                big_a: Some(radial_expr(a)),
                big_b: Some(radial_expr(b)),
            }],
            ..Default::default()
        }
    }

    #[test]
    fn e1_brownian_with_shift_holds() {
        let r = check_e1(&radial(1, "1"), &asset_certs("2*z", "(1 + 2*sqrt(2*z))/(2*z)"), &opts()).unwrap();
        assert_eq!(r.verdict, Verdict::Holds, "{:#?}", r.evidence);
    }

    #[test]
    fn e1_power_two_fails() {
        let r = check_e1(
            &radial(1, "(max(abs(x1),1))^2"),
            &asset_certs("2*z*(max(sqrt(2*z),1))^2", "(1 + 2*sqrt(2*z))/(2*z)"),
            &opts(),
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::Fails, "{:#?}", r.evidence);
        assert!(r.evidence.integrals.iter().any(|i| i.contradicts()));
    }

    #[test]
    fn e1_asset_out_of_range() {
        assert!(matches!(
            check_e1_asset(&radial(1, "1"), &asset_certs("2*z", "1"), 2, &opts()),
            Err(CriteriaError::AssetIndex { .. })
        ));
    }

    #[test]
    fn nl1_cubic_radial_three_dimensions_holds() {
        let r = check_nl1(&radial(3, "(max(norm,1))^3"), &certs("2*z*(sqrt(2*z))^3", "3/(2*z)"), &opts()).unwrap();
        assert_eq!(r.verdict, Verdict::Holds, "{:#?}", r.evidence);
    }

    #[test]
    fn nl1_two_dimensions_fails_on_explosion_integral() {
        let r = check_nl1(&radial(2, "(max(norm,1))^3"), &certs("2*z*(sqrt(2*z))^3", "2/(2*z)"), &opts()).unwrap();
        assert_eq!(r.verdict, Verdict::Fails);
        let to_inf = r.evidence.integrals.iter().find(|i| i.name.contains("infinity")).unwrap();
        assert!(to_inf.verdict.diverges());
    }

    #[test]
    fn nl1_needs_square_market() {
        let m = MarketModel::from_sources(1, 1.0, vec![1.0, 0.0], vec![1.0], &["0", "0"], &[&["1", "0"], &["0", "1"]], &["0"]).unwrap();
        assert!(matches!(
            check_nl1(&m, &certs("2*z", "1/z"), &opts()),
            Err(CriteriaError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn n1_identity_fails() {
        let o = CheckOptions { autonomous: true, ..opts() };
        let r = check_n1(&radial(1, "1"), &CertificateBundle::default(), &o).unwrap();
        assert_eq!(r.verdict, Verdict::Fails);
        assert!(r.has_witness());
    }

    #[test]
    fn n1_power_family_in_one_dimension() {
        // On the negative half-line the shifted trace 1 + 2x turns negative, so
        // no positive B satisfies the bound.
        for delta in [1.0, 2.0] {
            let f = format!("(max(abs(x1),1))^{delta}");
            let c = asset_certs(&format!("2*z*(max(sqrt(2*z),1))^{delta}"), "1/(2*z)");
            let r = check_n1(&radial(1, &f), &c, &opts()).unwrap();
            assert_eq!(r.verdict, Verdict::Fails, "delta={delta}");
        }
    }
}
