//! Markovian market price of risk `c(t,x) = -a⁻¹(t,x) b(t,x) + (0, μ(t,x))`.

use nalgebra::DVector;
use rand::Rng;

use super::{linalg, norm, MarketModel, Mat};
use crate::dsl::DslError;
use crate::rng;

/// Condition-number threshold above which `a` counts as singular.
pub const SINGULAR_CONDITION: f64 = 1e12;

const MAX_BOX_EXP: i32 = 10;
const CLOUD_PER_SHELL: usize = 64;
const TIME_POINTS: usize = 9;

#[derive(Debug, Clone, PartialEq)]
pub struct MprField {
    model: MarketModel,
    drift_free: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MprWitness {
    /// `a` is (numerically) singular at `(t, x)`. `approach` lists
    /// `(distance, ‖a⁻¹b‖)` along the axis direction where it grows fastest;
    /// `blow_up` is set when those values grow like a negative power of the
    /// distance.
    SingularDiffusion {
        t: f64,
        x: Vec<f64>,
        condition: f64,
        approach: Vec<(f64, f64)>,
        approach_slope: f64,
        blow_up: bool,
    },
    Eval(DslError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxBound {
    pub radius: f64,
    pub sup_b: f64,
    pub sup_a: f64,
    pub sup_ainv_b: f64,
    pub sup_c: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MprOutcome {
    Constructed { field: MprField, bounds: Vec<BoxBound> },
    NotConstructible { witness: MprWitness },
}

impl MprField {
    pub fn eval(&self, t: f64, x: &[f64]) -> Result<Vec<f64>, DslError> {
        let mut c = self.model.eval_embedded_mu(t, x)?;
        if !self.drift_free {
            let a = self.model.eval_a(t, x)?;
            let b = self.model.eval_b(t, x)?;
            let sol = solve(&a, &b).unwrap_or_else(|| vec![f64::NAN; b.len()]);
            for (ci, si) in c.iter_mut().zip(sol) {
                *ci -= si;
            }
        }
        Ok(c)
    }
}

fn condition_number(a: &Mat) -> f64 {
    match linalg::eigenvalues(a, linalg::psd_tolerance(a)) {
        Ok(ev) => {
            let hi = ev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let lo = ev.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
            if hi == 0.0 || lo == 0.0 {
                f64::INFINITY
            } else {
                hi / lo
            }
        }
        Err(_) => f64::INFINITY,
    }
}

fn solve(a: &Mat, b: &[f64]) -> Option<Vec<f64>> {
    let lu = a.clone().lu();
    lu.solve(&DVector::from_column_slice(b)).map(|v| v.iter().copied().collect())
}

fn probe_points(model: &MarketModel) -> Vec<Vec<f64>> {
    let d = model.d;
    let mut pts = vec![vec![0.0; d], model.x0.clone()];
    for k in -6..=MAX_BOX_EXP {
        let r = 2f64.powi(k);
        for i in 0..d {
            for s in [1.0, -1.0] {
                let mut p = vec![0.0; d];
                p[i] = s * r;
                pts.push(p);
            }
        }
    }
    let seed = rng::derive_seed(0, 0x3a9);
    for k in 0..=MAX_BOX_EXP {
        let (lo, hi) = if k == 0 { (0.0, 1.0) } else { (2f64.powi(k - 1), 2f64.powi(k)) };
        for j in 0..CLOUD_PER_SHELL {
            let mut g = rng::stream(seed, (k as u64) << 32 | j as u64);
            let u = rng::unit_direction(&mut g, d);
            let r = lo + (hi - lo) * g.random::<f64>();
            pts.push(u.into_iter().map(|c| c * r).collect());
        }
    }
    pts
}

fn approach_evidence(model: &MarketModel, t: f64, p: &[f64]) -> (Vec<(f64, f64)>, f64) {
    let mut best: (Vec<(f64, f64)>, f64) = (Vec::new(), 0.0);
    for i in 0..model.d {
        for s in [1.0, -1.0] {
            let mut seq = Vec::new();
            for k in 1..=30 {
                let h = 2f64.powi(-k);
                let mut y = p.to_vec();
                y[i] += s * h;
                let Ok(a) = model.eval_a(t, &y) else { continue };
                if condition_number(&a) > SINGULAR_CONDITION {
                    continue;
                }
                let Ok(b) = model.eval_b(t, &y) else { continue };
                if let Some(v) = solve(&a, &b) {
                    let n = norm(&v);
                    if n.is_finite() && n > 0.0 {
                        seq.push((h, n));
                    }
                }
            }
            let slope = loglog_slope(&seq[seq.len().saturating_sub(10)..]);
            if best.0.is_empty() || slope < best.1 {
                best = (seq, slope);
            }
        }
    }
    best
}

/// Least-squares slope of `ln value` against `ln distance`.
fn loglog_slope(pairs: &[(f64, f64)]) -> f64 {
    if pairs.len() < 3 {
        return 0.0;
    }
    let n = pairs.len() as f64;
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Builds the Markovian MPR when `a` is invertible and `b`, `a`, `a⁻¹b` stay
/// bounded on the nested boxes `‖x‖ ≤ 2^k`, `k ≤ 10`. When `b` is the literal
/// zero field the MPR is `(0, μ)` and no inversion is needed.
pub fn good_mpr_markov(model: &MarketModel) -> MprOutcome {
    let drift_free = model.b_is_zero_literal();
    let times = model.probe_times(TIME_POINTS);
    let mut bounds: Vec<BoxBound> = (0..=MAX_BOX_EXP)
        .map(|k| BoxBound {
            radius: 2f64.powi(k),
            sup_b: 0.0,
            sup_a: 0.0,
            sup_ainv_b: 0.0,
            sup_c: 0.0,
        })
        .collect();
    for x in probe_points(model) {
        let r = norm(&x);
        for &t in &times {
            let skippable = model.is_time_endpoint(t) && times.len() > 1;
            let a = match model.eval_a(t, &x) {
                Ok(a) => a,
                Err(_) if skippable => continue,
                Err(e) => return MprOutcome::NotConstructible { witness: MprWitness::Eval(e) },
            };
            let mut ainv_b = vec![0.0; model.d];
            if !drift_free {
                let cond = condition_number(&a);
                if cond > SINGULAR_CONDITION {
                    let (approach, slope) = approach_evidence(model, t, &x);
                    return MprOutcome::NotConstructible {
                        witness: MprWitness::SingularDiffusion {
                            t,
                            x,
                            condition: cond,
                            blow_up: slope <= -0.25 && approach.len() >= 3,
                            approach,
                            approach_slope: slope,
                        },
                    };
                }
                let b = match model.eval_b(t, &x) {
                    Ok(b) => b,
                    Err(_) if skippable => continue,
                    Err(e) => return MprOutcome::NotConstructible { witness: MprWitness::Eval(e) },
                };
                ainv_b = solve(&a, &b).expect("well-conditioned");
                let nb = norm(&b);
                for bb in bounds.iter_mut().filter(|bb| r <= bb.radius) {
                    bb.sup_b = bb.sup_b.max(nb);
                }
            }
            let mu = match model.eval_embedded_mu(t, &x) {
                Ok(m) => m,
                Err(_) if skippable => continue,
                Err(e) => return MprOutcome::NotConstructible { witness: MprWitness::Eval(e) },
            };
            let c: Vec<f64> = mu.iter().zip(&ainv_b).map(|(m, s)| m - s).collect();
            let (na, ns, nc) = (linalg::frobenius(&a), norm(&ainv_b), norm(&c));
            for bb in bounds.iter_mut().filter(|bb| r <= bb.radius) {
                bb.sup_a = bb.sup_a.max(na);
                bb.sup_ainv_b = bb.sup_ainv_b.max(ns);
                bb.sup_c = bb.sup_c.max(nc);
            }
        }
    }
    MprOutcome::Constructed {
        field: MprField {
            model: model.clone(),
            drift_free,
        },
        bounds,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_drift_gives_zero_field() {
        let m = MarketModel::from_sources(2, 1.0, vec![0.0, 0.0], vec![1.0, 1.0], &["0", "0"], &[&["1", "0"], &["0", "1"]], &[]).unwrap();
        let MprOutcome::Constructed { field, bounds } = good_mpr_markov(&m) else { panic!() };
        assert_eq!(field.eval(0.3, &[1.0, 2.0]).unwrap(), vec![0.0, 0.0]);
        assert!(bounds.iter().all(|b| b.sup_c == 0.0));
    }

    #[test]
    fn linear_drift_example() {
        let m = MarketModel::from_sources(2, 1.0, vec![0.0, 0.0], vec![1.0, 1.0], &["5*x2", "0"], &[&["1", "0"], &["0", "1"]], &[]).unwrap();
        let MprOutcome::Constructed { field, bounds } = good_mpr_markov(&m) else { panic!() };
        assert_eq!(field.eval(0.0, &[1.0, 2.0]).unwrap(), vec![-10.0, 0.0]);
        assert!(bounds.iter().all(|b| b.sup_c.is_finite()));
        assert!(bounds.last().unwrap().sup_c >= 5.0 * 1000.0);
    }

    #[test]
    fn incomplete_market_embeds_mu() {
        let m = MarketModel::from_sources(1, 1.0, vec![0.0, 0.0], vec![1.0], &["0", "0"], &[&["1", "0"], &["0", "1"]], &["x1"]).unwrap();
        let MprOutcome::Constructed { field, .. } = good_mpr_markov(&m) else { panic!() };
        assert_eq!(field.eval(0.0, &[3.0, 0.0]).unwrap(), vec![0.0, 3.0]);
    }

    #[test]
    fn cube_root_drift_is_not_constructible() {
        let m = MarketModel::from_sources(1, 1.0, vec![1.0], vec![1.0], &["3*x1*abs(x1)^(-2/3)"], &[&["9*abs(x1)^(4/3)"]], &[]).unwrap();
        match good_mpr_markov(&m) {
            MprOutcome::NotConstructible {
                witness: MprWitness::SingularDiffusion { x, blow_up, approach_slope, .. },
            } => {
                assert_eq!(x, vec![0.0]);
                assert!(blow_up);
                assert!((approach_slope + 1.0).abs() < 1e-6);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn slope_fit() {
        let pairs: Vec<(f64, f64)> = (1..10).map(|k| (2f64.powi(-k), 2f64.powi(k))).collect();
        assert!((loglog_slope(&pairs) + 1.0).abs() < 1e-12);
    }
}
