//! Radial and eigenvalue envelopes of the coefficient fields, estimated by
//! deterministic sampling on spheres and balls.
//!
//! Sample `k` on every sphere is drawn from `rng::stream(seed, k)`, so the
//! sample set for `n` points is a prefix of the set for `2n` points and sup
//! estimates can only grow with the sample count.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dsl::DslError;
use crate::model::{dot, linalg, norm, MarketModel, Mat};
use crate::rng;

pub use crate::model::lambda_max;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvelopeError {
    #[error("evaluation failed at t={t}, x={x:?}: {error}")]
    Eval { t: f64, x: Vec<f64>, error: DslError },
    #[error("a(t={t}, x={x:?}) is not symmetric")]
    NotSymmetric { t: f64, x: Vec<f64> },
}

/// Scalar functionals of `(t, x)` that the radial conditions quantify over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Functional {
    /// `⟨a x, x⟩`
    Axx,
    TraceA,
    /// `⟨x, (0, μ)⟩`
    XDotMu,
    /// `⟨x, a e_i⟩`, `i` 1-based.
    XDotAei(usize),
    /// Operator norm of `a`.
    NormA,
    NormMu,
}

impl Functional {
    pub fn id(&self) -> String {
        match self {
            Functional::Axx => "AXX".into(),
            Functional::TraceA => "TRACE_A".into(),
            Functional::XDotMu => "X_DOT_MU".into(),
            Functional::XDotAei(i) => format!("X_DOT_AEI({i})"),
            Functional::NormA => "NORM_A".into(),
            Functional::NormMu => "NORM_MU".into(),
        }
    }

    pub fn value(&self, p: &Probe<'_>) -> f64 {
        match *self {
            Functional::Axx => p.axx(),
            Functional::TraceA => p.a.trace(),
            Functional::XDotMu => dot(p.x, p.mu_embedded),
            Functional::XDotAei(i) => p.x_dot_aei(i),
            Functional::NormA => operator_norm(p.a),
            Functional::NormMu => norm(p.mu_embedded),
        }
    }
}

/// Largest absolute eigenvalue of a symmetric matrix.
pub fn operator_norm(a: &Mat) -> f64 {
    match linalg::eigenvalues(a, f64::INFINITY) {
        Ok(ev) => ev[0].abs().max(ev[ev.len() - 1].abs()),
        Err(_) => linalg::frobenius(a),
    }
}

/// Coefficients evaluated at one sample point.
#[derive(Debug, Clone, Copy)]
pub struct Probe<'a> {
    pub t: f64,
    pub x: &'a [f64],
    pub a: &'a Mat,
    pub mu_embedded: &'a [f64],
}

impl Probe<'_> {
    pub fn axx(&self) -> f64 {
        let d = self.x.len();
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                s += self.a[(i, j)] * self.x[i] * self.x[j];
            }
        }
        s
    }

    pub fn x_dot_aei(&self, i: usize) -> f64 {
        (0..self.x.len()).map(|k| self.x[k] * self.a[(k, i - 1)]).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Extremum {
    Sup,
    Inf,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub t: f64,
    pub x: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphereExtremes {
    pub radius: f64,
    pub sup: Witness,
    pub inf: Witness,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialProfile {
    pub functional_id: String,
    pub radii: Vec<f64>,
    pub sup_values: Option<Vec<f64>>,
    pub inf_values: Option<Vec<f64>>,
    pub sample_counts: Vec<usize>,
    pub sup_at: Vec<Witness>,
    pub inf_at: Vec<Witness>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaProfile {
    pub z: Vec<f64>,
    pub gamma: Vec<f64>,
    pub argmax: Vec<Witness>,
}

/// Sampling layout shared by the envelope estimators.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeOptions {
    pub radii: Vec<f64>,
    pub samples_per_sphere: usize,
    pub time_points: usize,
    pub seed: u64,
}

impl Default for EnvelopeOptions {
    fn default() -> Self {
        EnvelopeOptions {
            radii: geometric_grid(1e-2, 1024.0, 64),
            samples_per_sphere: 256,
            time_points: 33,
            seed: 0,
        }
    }
}

pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let ratio = (hi / lo).ln() / (n - 1) as f64;
    (0..n)
        .map(|k| if k == n - 1 { hi } else { lo * (ratio * k as f64).exp() })
        .collect()
}

/// Unit directions used on every sphere: the `±e_i` axes first, then seeded
/// Gaussian directions. In one dimension the sphere is `{-1, 1}`.
pub fn sphere_directions(d: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut dirs = Vec::with_capacity(n.max(2 * d));
    for i in 0..d {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; d];
            e[i] = s;
            dirs.push(e);
        }
    }
    if d == 1 {
        dirs.truncate(n.clamp(1, 2));
        return dirs;
    }
    if n <= dirs.len() {
        dirs.truncate(n.max(1));
        return dirs;
    }
    let stream_seed = rng::derive_seed(seed, 0x5f3e);
    for k in 0..(n - dirs.len()) {
        let mut g = rng::stream(stream_seed, k as u64);
        dirs.push(rng::unit_direction(&mut g, d));
    }
    dirs
}

/// Evaluates `a` and the embedded `μ` at `(t, x)`. Failures at the ends of
/// `[0, T]` yield `None` when the time grid has interior points, because the
/// conditions only need to hold for almost every `t`.
pub(crate) fn coefficients_at(
    model: &MarketModel,
    t: f64,
    x: &[f64],
    times: usize,
) -> Result<Option<(Mat, Vec<f64>)>, EnvelopeError> {
    let skip = |e: DslError| {
        if model.is_time_endpoint(t) && times > 1 {
            Ok(None)
        } else {
            Err(EnvelopeError::Eval { t, x: x.to_vec(), error: e })
        }
    };
    let a = match model.eval_a(t, x) {
        Ok(a) => a,
        Err(e) => return skip(e),
    };
    if linalg::symmetry_defect(&a) > linalg::psd_tolerance(&a) {
        return Err(EnvelopeError::NotSymmetric { t, x: x.to_vec() });
    }
    let mu = match model.eval_embedded_mu(t, x) {
        Ok(m) => m,
        Err(e) => return skip(e),
    };
    Ok(Some((a, mu)))
}

/// Sup and inf of `q` over `{‖x‖ = ρ} × time grid` for each radius.
pub fn sphere_extremes<F>(
    model: &MarketModel,
    opts: &EnvelopeOptions,
    q: F,
) -> Result<Vec<SphereExtremes>, EnvelopeError>
where
    F: Fn(&Probe<'_>) -> Result<f64, DslError> + Sync,
{
    let dirs = sphere_directions(model.d, opts.samples_per_sphere, opts.seed);
    let times = model.probe_times(opts.time_points);
    opts.radii
        .par_iter()
        .map(|&rho| {
            let mut sup = Witness { t: 0.0, x: Vec::new(), value: f64::NEG_INFINITY };
            let mut inf = Witness { t: 0.0, x: Vec::new(), value: f64::INFINITY };
            let mut samples = 0;
            for u in &dirs {
                let x: Vec<f64> = u.iter().map(|c| c * rho).collect();
                for &t in &times {
                    let Some((a, mu)) = coefficients_at(model, t, &x, times.len())? else {
                        continue;
                    };
                    let v = q(&Probe { t, x: &x, a: &a, mu_embedded: &mu })
                        .map_err(|error| EnvelopeError::Eval { t, x: x.clone(), error })?;
                    if !v.is_finite() {
                        return Err(EnvelopeError::Eval {
                            t,
                            x,
                            error: DslError::Domain {
                                message: "functional is not finite".into(),
                                t,
                                x: Vec::new(),
                            },
                        });
                    }
                    samples += 1;
                    if v > sup.value {
                        sup = Witness { t, x: x.clone(), value: v };
                    }
                    if v < inf.value {
                        inf = Witness { t, x: x.clone(), value: v };
                    }
                }
            }
            Ok(SphereExtremes { radius: rho, sup, inf, samples })
        })
        .collect()
}

pub fn radial_profile(
    model: &MarketModel,
    functional: Functional,
    extremum: Extremum,
    opts: &EnvelopeOptions,
) -> Result<RadialProfile, EnvelopeError> {
    if let Functional::XDotAei(i) = functional {
        assert!(i >= 1 && i <= model.d, "asset index {i} outside 1..={}", model.d);
    }
    let ext = sphere_extremes(model, opts, |p| Ok(functional.value(p)))?;
    let want_sup = extremum != Extremum::Inf;
    let want_inf = extremum != Extremum::Sup;
    Ok(RadialProfile {
        functional_id: functional.id(),
        radii: opts.radii.clone(),
        sup_values: want_sup.then(|| ext.iter().map(|e| e.sup.value).collect()),
        inf_values: want_inf.then(|| ext.iter().map(|e| e.inf.value).collect()),
        sample_counts: ext.iter().map(|e| e.samples).collect(),
        sup_at: if want_sup { ext.iter().map(|e| e.sup.clone()).collect() } else { Vec::new() },
        inf_at: if want_inf { ext.iter().map(|e| e.inf.clone()).collect() } else { Vec::new() },
    })
}

/// `γ(z) = sup_{‖x‖≤z} sup_t λ₊(a(t,x))` on `z_grid`, made non-decreasing by a
/// cumulative maximum. Ball samples are the origin, `x0` when inside, the
/// sphere directions at full radius and seeded interior points.
pub fn gamma_profile(
    model: &MarketModel,
    z_grid: &[f64],
    samples_per_ball: usize,
    time_points: usize,
    seed: u64,
) -> Result<GammaProfile, EnvelopeError> {
    let d = model.d;
    let dirs = sphere_directions(d, samples_per_ball, seed);
    let interior_seed = rng::derive_seed(seed, 0x6a3a);
    let fractions: Vec<f64> = (0..samples_per_ball)
        .map(|k| {
            use rand::Rng;
            let mut g = rng::stream(interior_seed, k as u64);
            g.random::<f64>().powf(1.0 / d as f64)
        })
        .collect();
    let times = model.probe_times(time_points);
    let per_z: Vec<Witness> = z_grid
        .par_iter()
        .map(|&z| {
            let mut pts = vec![vec![0.0; d]];
            if norm(&model.x0) <= z {
                pts.push(model.x0.clone());
            }
            for (u, f) in dirs.iter().zip(&fractions) {
                pts.push(u.iter().map(|c| c * z).collect());
                pts.push(u.iter().map(|c| c * z * f).collect());
            }
            let mut best = Witness { t: 0.0, x: vec![0.0; d], value: f64::NEG_INFINITY };
            for x in pts {
                for &t in &times {
                    let Some((a, _)) = coefficients_at(model, t, &x, times.len())? else {
                        continue;
                    };
                    let lam = linalg::lambda_max(&a).map_err(|_| EnvelopeError::NotSymmetric { t, x: x.clone() })?;
                    if lam > best.value {
                        best = Witness { t, x: x.clone(), value: lam };
                    }
                }
            }
            Ok(best)
        })
        .collect::<Result<_, EnvelopeError>>()?;
    let mut gamma = Vec::with_capacity(z_grid.len());
    let mut argmax: Vec<Witness> = Vec::with_capacity(z_grid.len());
    for w in per_z {
        match argmax.last() {
            Some(prev) if prev.value >= w.value => {
                gamma.push(prev.value);
                argmax.push(prev.clone());
            }
            _ => {
                gamma.push(w.value);
                argmax.push(w);
            }
        }
    }
    Ok(GammaProfile { z: z_grid.to_vec(), gamma, argmax })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ModulusKind {
    Lipschitz,
    /// Hölder continuity with the given exponent.
    Hoelder(f64),
}

impl ModulusKind {
    fn exponent(self) -> f64 {
        match self {
            ModulusKind::Lipschitz => 1.0,
            ModulusKind::Hoelder(q) => q,
        }
    }
}

/// Largest sampled `‖F(x) − F(y)‖ / ‖x − y‖^q` over a ball, together with the
/// maximum found at each separation level `radius·2^{-j-1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulusEstimate {
    pub constant: f64,
    pub pair: (Vec<f64>, Vec<f64>),
    pub level_separations: Vec<f64>,
    pub level_maxima: Vec<f64>,
}

impl ModulusEstimate {
    /// Ratios of consecutive level maxima over the finest `window` levels.
    pub fn trailing_ratios(&self, window: usize) -> Vec<f64> {
        let m = &self.level_maxima;
        let start = m.len().saturating_sub(window + 1);
        m[start..]
            .windows(2)
            .map(|w| if w[0] > 0.0 { w[1] / w[0] } else if w[1] > 0.0 { f64::INFINITY } else { 1.0 })
            .collect()
    }

    /// The quotient keeps growing geometrically as the separation shrinks.
    pub fn is_growing(&self) -> bool {
        let r = self.trailing_ratios(4);
        r.len() == 4 && r.iter().all(|v| *v >= 1.1)
    }

    /// The finest levels no longer raise the estimate.
    pub fn is_stable(&self) -> bool {
        self.trailing_ratios(4).iter().all(|v| *v <= 1.05)
    }
}

/// Samples pairs in `{‖x‖ ≤ radius}`: every base point (the anchors, then
/// `points` seeded interior points) is paired at each of `levels`
/// separations with a seeded direction.
#[allow(clippy::too_many_arguments)]
pub fn modulus_estimate<F>(
    field: F,
    dim: usize,
    kind: ModulusKind,
    radius: f64,
    anchors: &[Vec<f64>],
    points: usize,
    levels: usize,
    seed: u64,
) -> Result<ModulusEstimate, DslError>
where
    F: Fn(&[f64]) -> Result<Vec<f64>, DslError>,
{
    let q = kind.exponent();
    modulus_estimate_with(field, dim, radius, anchors, points, levels, seed, |diff, sep| Ok(diff / sep.powf(q)))
}

/// [`modulus_estimate`] with an arbitrary quotient `(‖F(x) − F(y)‖, ‖x − y‖) ↦ value`.
#[allow(clippy::too_many_arguments)]
pub fn modulus_estimate_with<F, Q>(
    field: F,
    dim: usize,
    radius: f64,
    anchors: &[Vec<f64>],
    points: usize,
    levels: usize,
    seed: u64,
    quotient: Q,
) -> Result<ModulusEstimate, DslError>
where
    F: Fn(&[f64]) -> Result<Vec<f64>, DslError>,
    Q: Fn(f64, f64) -> Result<f64, DslError>,
{
    use rand::Rng;
    let mut bases: Vec<Vec<f64>> = anchors.iter().filter(|a| norm(a) <= radius).cloned().collect();
    let base_seed = rng::derive_seed(seed, 0x30d1);
    for k in 0..points {
        let mut g = rng::stream(base_seed, k as u64);
        let u = rng::unit_direction(&mut g, dim);
        let r = radius * g.random::<f64>().powf(1.0 / dim as f64);
        bases.push(u.into_iter().map(|c| c * r).collect());
    }
    let dir_seed = rng::derive_seed(seed, 0x7a1b);
    let mut best = ModulusEstimate {
        constant: 0.0,
        pair: (vec![0.0; dim], vec![0.0; dim]),
        level_separations: Vec::with_capacity(levels),
        level_maxima: Vec::with_capacity(levels),
    };
    let values: Vec<Vec<f64>> = bases.iter().map(|x| field(x)).collect::<Result<_, _>>()?;
    for j in 0..levels {
        let h = radius * 2f64.powi(-(j as i32) - 1);
        let mut level_max = 0.0f64;
        for (k, (x, fx)) in bases.iter().zip(&values).enumerate() {
            let mut g = rng::stream(dir_seed, k as u64);
            let u = rng::unit_direction(&mut g, dim);
            let mut y: Vec<f64> = x.iter().zip(&u).map(|(a, b)| a + h * b).collect();
            if norm(&y) > radius {
                y = x.iter().zip(&u).map(|(a, b)| a - h * b).collect();
            }
            if norm(&y) > radius {
                continue;
            }
            let sep = norm(&x.iter().zip(&y).map(|(a, b)| a - b).collect::<Vec<_>>());
            if sep == 0.0 {
                continue;
            }
            let fy = field(&y)?;
            let diff = fx.iter().zip(&fy).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            let value = quotient(diff, sep)?;
            level_max = level_max.max(value);
            if value > best.constant {
                best.constant = value;
                best.pair = (x.clone(), y);
            }
        }
        best.level_separations.push(h);
        best.level_maxima.push(level_max);
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EllipticityPoint {
    pub x: Vec<f64>,
    /// `min_t λ_min(a(t, x))` over the time grid.
    pub inf_eigenvalue: f64,
    pub at_t: f64,
    /// `(h, max_t max_{y} ‖a(t,y) − a(t,x)‖)` over neighbours at distance `h`.
    pub continuity_defects: Vec<(f64, f64)>,
    pub scale: f64,
}

pub const CONTINUITY_SCALES: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// Smallest eigenvalue of `a(s, x)` over the time grid and the continuity
/// defect over axis and diagonal neighbours at the three [`CONTINUITY_SCALES`].
pub fn ellipticity_profile(
    model: &MarketModel,
    x_points: &[Vec<f64>],
    time_grid: &[f64],
) -> Result<Vec<EllipticityPoint>, EnvelopeError> {
    let d = model.d;
    let mut offsets: Vec<Vec<f64>> = Vec::new();
    for i in 0..d {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; d];
            e[i] = s;
            offsets.push(e);
        }
    }
    if d > 1 {
        offsets.push(vec![1.0 / (d as f64).sqrt(); d]);
    }
    x_points
        .par_iter()
        .map(|x| {
            let mut point = EllipticityPoint {
                x: x.clone(),
                inf_eigenvalue: f64::INFINITY,
                at_t: 0.0,
                continuity_defects: CONTINUITY_SCALES.iter().map(|h| (*h, 0.0)).collect(),
                scale: 0.0,
            };
            for &t in time_grid {
                let Some((a, _)) = coefficients_at(model, t, x, time_grid.len())? else {
                    continue;
                };
                let lam = linalg::lambda_min(&a).map_err(|_| EnvelopeError::NotSymmetric { t, x: x.clone() })?;
                point.scale = point.scale.max(linalg::frobenius(&a));
                if lam < point.inf_eigenvalue {
                    point.inf_eigenvalue = lam;
                    point.at_t = t;
                }
                for (h, defect) in point.continuity_defects.iter_mut() {
                    for o in &offsets {
                        let y: Vec<f64> = x.iter().zip(o).map(|(a, b)| a + *h * b).collect();
                        let Some((ay, _)) = coefficients_at(model, t, &y, time_grid.len())? else {
                            continue;
                        };
                        *defect = defect.max(linalg::frobenius(&(ay - &a)));
                    }
                }
            }
            Ok(point)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(a: &[&[&str]], mu: &[&str], m: usize) -> MarketModel {
        let d = a.len();
        let b: Vec<&str> = vec!["0"; d];
        MarketModel::from_sources(m, 1.0, vec![0.0; d], vec![1.0; m], &b, a, mu).unwrap()
    }

    fn small() -> EnvelopeOptions {
        EnvelopeOptions {
            radii: geometric_grid(0.5, 8.0, 5),
            samples_per_sphere: 32,
            time_points: 5,
            seed: 7,
        }
    }

    #[test]
    fn identity_axx_is_rho_squared() {
        let m = model(&[&["1", "0"], &["0", "1"]], &[], 2);
        let p = radial_profile(&m, Functional::Axx, Extremum::Both, &small()).unwrap();
        for (k, rho) in p.radii.iter().enumerate() {
            let s = p.sup_values.as_ref().unwrap()[k];
            let i = p.inf_values.as_ref().unwrap()[k];
            assert!((s - rho * rho).abs() < 1e-12 && (i - rho * rho).abs() < 1e-12);
        }
    }

    #[test]
    fn radial_cubic_axx_at_two() {
        let f = "(max(norm,1))^3";
        let m = model(&[&[f, "0"], &["0", f]], &[], 2);
        let opts = EnvelopeOptions { radii: vec![2.0], ..small() };
        let p = radial_profile(&m, Functional::Axx, Extremum::Sup, &opts).unwrap();
        assert!((p.sup_values.unwrap()[0] - 32.0).abs() < 1e-9);
        assert!(p.inf_values.is_none());
    }

    #[test]
    fn zero_mu_functional_vanishes() {
        let m = model(&[&["1", "0"], &["0", "1"]], &["0"], 1);
        let p = radial_profile(&m, Functional::XDotMu, Extremum::Both, &small()).unwrap();
        assert!(p.sup_values.unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn gamma_examples() {
        let z = [0.5, 1.0, 2.0, 4.0];
        let id = model(&[&["1", "0"], &["0", "1"]], &[], 2);
        assert!(gamma_profile(&id, &z, 16, 5, 1).unwrap().gamma.iter().all(|g| *g == 1.0));
        let f = "(max(norm,1))^3";
        let cubic = model(&[&[f, "0"], &["0", f]], &[], 2);
        let g = gamma_profile(&cubic, &z, 16, 5, 1).unwrap();
        for (z, g) in z.iter().zip(&g.gamma) {
            assert!((g - z.max(1.0).powi(3)).abs() < 1e-9 * g);
        }
        let timed = model(&[&["1", "0"], &["0", "1 + t"]], &[], 2);
        assert!(gamma_profile(&timed, &z, 16, 5, 1).unwrap().gamma.iter().all(|g| *g == 2.0));
    }

    #[test]
    fn modulus_examples() {
        let lin = modulus_estimate(|x| Ok(vec![2.0 * x[0]]), 1, ModulusKind::Lipschitz, 1.0, &[vec![0.0]], 16, 12, 3).unwrap();
        assert!((lin.constant - 2.0).abs() < 1e-9 && lin.is_stable());
        let root = modulus_estimate(
            |x| Ok(vec![x[0].abs().sqrt()]),
            1,
            ModulusKind::Hoelder(0.5),
            1.0,
            &[vec![0.0]],
            16,
            20,
            3,
        )
        .unwrap();
        assert!(root.constant <= 1.0 + 1e-12 && root.constant > 0.99);
        let lip_root = modulus_estimate(|x| Ok(vec![x[0].abs().sqrt()]), 1, ModulusKind::Lipschitz, 1.0, &[vec![0.0]], 16, 20, 3).unwrap();
        assert!(lip_root.is_growing());
    }

    #[test]
    fn ellipticity_examples() {
        let id = model(&[&["1", "0"], &["0", "1"]], &[], 2);
        let pts = vec![vec![0.0, 0.0], vec![1.0, -2.0]];
        for p in ellipticity_profile(&id, &pts, &[0.0]).unwrap() {
            assert_eq!(p.inf_eigenvalue, 1.0);
            assert!(p.continuity_defects.iter().all(|(_, d)| *d == 0.0));
        }
        let degenerate = model(&[&["x1^2", "0"], &["0", "1"]], &[], 2);
        let p = ellipticity_profile(&degenerate, &[vec![0.0, 3.0]], &[0.0]).unwrap();
        assert_eq!(p[0].inf_eigenvalue, 0.0);
    }

    #[test]
    fn sphere_directions_nest() {
        let a = sphere_directions(3, 20, 9);
        let b = sphere_directions(3, 40, 9);
        assert_eq!(a[..], b[..20]);
        assert_eq!(sphere_directions(1, 256, 0), vec![vec![1.0], vec![-1.0]]);
    }
}
