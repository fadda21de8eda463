//! The market tuple `(d, m, T, x0, S0, b, a, μ)` and its certificates.

pub mod linalg;
mod mpr;

use rand::Rng;
use thiserror::Error;

use crate::dsl::{DslError, Expr, Scope};
use crate::rng;
pub use linalg::{lambda_max, lambda_min, sqrt_psd, LinalgError, Mat};
pub use mpr::{good_mpr_markov, BoxBound, MprField, MprOutcome, MprWitness};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{0}")]
    Dsl(#[from] DslError),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("a(t={t}, x={x:?}) is not positive semi-definite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd {
        t: f64,
        x: Vec<f64>,
        min_eigenvalue: f64,
    },
    #[error("a(t={t}, x={x:?}) is not symmetric (defect {defect:e})")]
    NotSymmetric { t: f64, x: Vec<f64>, defect: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarketModel {
    pub d: usize,
    pub m: usize,
    pub horizon: f64,
    pub x0: Vec<f64>,
    pub s0: Vec<f64>,
    pub b: Vec<Expr>,
    pub a: Vec<Vec<Expr>>,
    pub mu: Vec<Expr>,
}

impl MarketModel {
    /// Checks shapes, positivity of `S0`, and that every field binds in `(t, x1..xd)`.
    pub fn new(
        d: usize,
        m: usize,
        horizon: f64,
        x0: Vec<f64>,
        s0: Vec<f64>,
        b: Vec<Expr>,
        a: Vec<Vec<Expr>>,
        mu: Vec<Expr>,
    ) -> Result<Self, ModelError> {
        let shape = |msg: String| Err(ModelError::Shape(msg));
        if d == 0 {
            return shape("dimension d must be positive".into());
        }
        if m == 0 || m > d {
            return shape(format!("asset count m={m} must satisfy 1 <= m <= d={d}"));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return shape(format!("horizon T={horizon} must be positive and finite"));
        }
        if x0.len() != d || x0.iter().any(|v| !v.is_finite()) {
            return shape(format!("x0 must be a finite vector of length {d}"));
        }
        if s0.len() != m || s0.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return shape(format!("S0 must have {m} positive entries"));
        }
        if b.len() != d {
            return shape(format!("b has {} entries, expected {d}", b.len()));
        }
        if a.len() != d || a.iter().any(|row| row.len() != d) {
            let cols = a.iter().map(Vec::len).max().unwrap_or(0);
            return shape(format!("a is {}x{cols}, expected {d}x{d}", a.len()));
        }
        if mu.len() != d - m {
            return shape(format!("mu has {} entries, expected d-m={}", mu.len(), d - m));
        }
        let scope = Scope::State { dim: d };
        for e in b.iter().chain(a.iter().flatten()).chain(mu.iter()) {
            e.check_scope(scope)?;
        }
        Ok(MarketModel {
            d,
            m,
            horizon,
            x0,
            s0,
            b,
            a,
            mu,
        })
    }

    /// Builds a model from expression sources.
    pub fn from_sources(
        m: usize,
        horizon: f64,
        x0: Vec<f64>,
        s0: Vec<f64>,
        b: &[&str],
        a: &[&[&str]],
        mu: &[&str],
    ) -> Result<Self, ModelError> {
        let d = x0.len();
        let parse = |s: &&str| crate::dsl::parse_expr(s);
        let b = b.iter().map(parse).collect::<Result<Vec<_>, _>>()?;
        let a = a
            .iter()
            .map(|row| row.iter().map(parse).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        let mu = mu.iter().map(parse).collect::<Result<Vec<_>, _>>()?;
        MarketModel::new(d, m, horizon, x0, s0, b, a, mu)
    }

    pub fn eval_a(&self, t: f64, x: &[f64]) -> Result<Mat, DslError> {
        let mut out = Mat::zeros(self.d, self.d);
        for i in 0..self.d {
            for j in 0..self.d {
                out[(i, j)] = self.a[i][j].eval_state(t, x)?;
            }
        }
        Ok(out)
    }

    pub fn eval_b(&self, t: f64, x: &[f64]) -> Result<Vec<f64>, DslError> {
        self.b.iter().map(|e| e.eval_state(t, x)).collect()
    }

    pub fn eval_mu(&self, t: f64, x: &[f64]) -> Result<Vec<f64>, DslError> {
        self.mu.iter().map(|e| e.eval_state(t, x)).collect()
    }

    /// `(0, μ)(t, x)` as a d-vector.
    pub fn eval_embedded_mu(&self, t: f64, x: &[f64]) -> Result<Vec<f64>, DslError> {
        Ok(embed_zero(self.d, &self.eval_mu(t, x)?))
    }

    fn fields(&self) -> impl Iterator<Item = &Expr> {
        self.b.iter().chain(self.a.iter().flatten()).chain(self.mu.iter())
    }

    pub fn is_time_independent(&self) -> bool {
        !self.fields().any(Expr::uses_time)
    }

    pub fn a_is_time_independent(&self) -> bool {
        !self.a.iter().flatten().any(Expr::uses_time)
    }

    pub fn a_is_state_independent(&self) -> bool {
        !self.a.iter().flatten().any(Expr::uses_state)
    }

    pub fn a_is_diagonal(&self) -> bool {
        (0..self.d).all(|i| (0..self.d).all(|j| i == j || self.a[i][j].is_zero_literal()))
    }

    pub fn mu_is_zero_literal(&self) -> bool {
        self.mu.iter().all(Expr::is_zero_literal)
    }

    pub fn b_is_zero_literal(&self) -> bool {
        self.b.iter().all(Expr::is_zero_literal)
    }

    /// Time grid used by probes: one point for time-independent coefficients,
    /// otherwise `n` uniform points on `[0, T]` including both ends.
    pub fn probe_times(&self, n: usize) -> Vec<f64> {
        if self.is_time_independent() || n <= 1 {
            vec![0.0]
        } else {
            uniform_grid(0.0, self.horizon, n)
        }
    }

    /// True when `t` is an end point of `[0, T]`, where conditions stated for
    /// almost every `t` may be skipped if a coefficient is undefined.
    pub fn is_time_endpoint(&self, t: f64) -> bool {
        t == 0.0 || t == self.horizon
    }
}

pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|k| {
            if k == n - 1 {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// Writes `μ` into the last `d - m` coordinates of a zero d-vector.
pub fn embed_zero(d: usize, mu: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; d];
    let m = d - mu.len();
    out[m..].copy_from_slice(mu);
    out
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Optional analytic certificates for the criteria.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CertificateBundle {
    pub r: Option<f64>,
    pub zeta: Option<Expr>,
    pub big_a: Option<Expr>,
    pub big_b: Option<Expr>,
    pub per_asset: Vec<AssetCertificate>,
    pub xi: Option<Expr>,
    pub alpha: Option<Expr>,
    pub z0: Option<f64>,
    pub a_hat: Option<Expr>,
    pub rho_n: Option<Modulus>,
    pub kappa_n: Option<Modulus>,
    pub h_n: Option<Modulus>,
    /// Asserts analytically that `b`, `a`, `a⁻¹b` are locally bounded.
    pub assume_locally_bounded: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssetCertificate {
    /// 1-based asset index.
    pub index: usize,
    pub r: Option<f64>,
    pub zeta: Option<Expr>,
    pub big_a: Option<Expr>,
    pub big_b: Option<Expr>,
}

/// Modulus of continuity selector for the pathwise-uniqueness side conditions.
#[derive(Debug, Clone, PartialEq)]
pub enum Modulus {
    Linear,
    Sqrt,
    Custom(Expr),
}

impl Modulus {
    pub fn eval(&self, h: f64) -> Result<f64, DslError> {
        match self {
            Modulus::Linear => Ok(h),
            Modulus::Sqrt => Ok(h.sqrt()),
            Modulus::Custom(e) => e.eval_radial(h),
        }
    }
}

impl CertificateBundle {
    /// Checks every certificate against the variables it may use.
    pub fn check_scopes(&self, d: usize) -> Result<(), DslError> {
        let time = |e: &Option<Expr>| e.as_ref().map_or(Ok(()), |e| e.check_scope(Scope::Time));
        let radial = |e: &Option<Expr>| e.as_ref().map_or(Ok(()), |e| e.check_scope(Scope::Radial));
        time(&self.zeta)?;
        radial(&self.big_a)?;
        radial(&self.big_b)?;
        radial(&self.xi)?;
        radial(&self.alpha)?;
        if let Some(e) = &self.a_hat {
            e.check_scope(Scope::State { dim: d })?;
        }
        for m in [&self.rho_n, &self.kappa_n, &self.h_n].into_iter().flatten() {
            if let Modulus::Custom(e) = m {
                e.check_scope(Scope::Radial)?;
            }
        }
        for c in &self.per_asset {
            time(&c.zeta)?;
            radial(&c.big_a)?;
            radial(&c.big_b)?;
        }
        Ok(())
    }

    pub fn asset(&self, i: usize) -> Option<&AssetCertificate> {
        self.per_asset.iter().find(|c| c.index == i)
    }
}

/// Probe layout for [`validate_model`]: the origin, `x0`, axis points
/// `±2^k e_i` for `k` in `[-3, max_exp]`, and a seeded random cloud in the ball
/// of radius `2^max_exp` with log-uniform radii.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePlan {
    pub max_exp: i32,
    pub cloud: usize,
    pub time_points: usize,
    pub seed: u64,
}

impl Default for SamplePlan {
    fn default() -> Self {
        SamplePlan {
            max_exp: 10,
            cloud: 256,
            time_points: 9,
            seed: 0,
        }
    }
}

impl SamplePlan {
    pub fn points(&self, model: &MarketModel) -> Vec<Vec<f64>> {
        let d = model.d;
        let mut pts = vec![vec![0.0; d], model.x0.clone()];
        for k in -3..=self.max_exp {
            let r = 2f64.powi(k);
            for i in 0..d {
                for s in [1.0, -1.0] {
                    let mut p = vec![0.0; d];
                    p[i] = s * r;
                    pts.push(p);
                }
            }
        }
        let span = (self.max_exp + 3) as f64;
        for j in 0..self.cloud {
            let mut g = rng::stream(rng::derive_seed(self.seed, 0x5a11), j as u64);
            let u = rng::unit_direction(&mut g, d);
            let r = 2f64.powf(g.random::<f64>() * span - 3.0);
            pts.push(u.into_iter().map(|c| c * r).collect());
        }
        pts
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ValidationReport {
    pub pass: bool,
    pub points_checked: usize,
    pub skipped_endpoint_points: usize,
    pub max_symmetry_defect: f64,
    pub min_eigenvalue: f64,
    pub min_eigenvalue_at: (f64, Vec<f64>),
}

/// Probes `a` for symmetry and positive semi-definiteness within
/// `1e-9·(1+‖a‖)`. Only `a` is evaluated; undefined drifts surface in the
/// checks that use them.
pub fn validate_model(model: &MarketModel, plan: &SamplePlan) -> Result<ValidationReport, ModelError> {
    let mut rep = ValidationReport {
        pass: true,
        points_checked: 0,
        skipped_endpoint_points: 0,
        max_symmetry_defect: 0.0,
        min_eigenvalue: f64::INFINITY,
        min_eigenvalue_at: (0.0, model.x0.clone()),
    };
    let times = model.probe_times(plan.time_points);
    for x in plan.points(model) {
        for &t in &times {
            let a = match model.eval_a(t, &x) {
                Ok(a) => a,
                Err(_) if model.is_time_endpoint(t) && times.len() > 1 => {
                    rep.skipped_endpoint_points += 1;
                    continue;
                }
                Err(e) => return Err(e.into()),
            };
            rep.points_checked += 1;
            let tol = linalg::psd_tolerance(&a);
            let defect = linalg::symmetry_defect(&a);
            rep.max_symmetry_defect = rep.max_symmetry_defect.max(defect);
            if defect > tol {
                rep.pass = false;
                continue;
            }
            let min = linalg::eigenvalues(&a, tol).expect("symmetry checked")[0];
            if min < rep.min_eigenvalue {
                rep.min_eigenvalue = min;
                rep.min_eigenvalue_at = (t, x.clone());
            }
            if min < -tol {
                rep.pass = false;
            }
        }
    }
    Ok(rep)
}

/// A discretised state path on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct StatePath {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

/// `S^i_k = S0_i exp(X^i_k - x0_i - ½ Σ_{j<k} a_ii(t_j, X_j)(t_{j+1} - t_j))`,
/// with the time integral taken left-point on the path's grid. `i` is 1-based.
pub fn asset_path(model: &MarketModel, path: &StatePath, i: usize) -> Result<Vec<f64>, ModelError> {
    if i == 0 || i > model.m {
        return Err(ModelError::Shape(format!("asset index {i} outside 1..={}", model.m)));
    }
    let k = i - 1;
    let mut out = Vec::with_capacity(path.times.len());
    let mut integral = 0.0;
    for (j, (t, x)) in path.times.iter().zip(&path.states).enumerate() {
        if j > 0 {
            let tp = path.times[j - 1];
            let aii = model.a[k][k].eval_state(tp, &path.states[j - 1])?;
            integral += aii * (t - tp);
        }
        out.push(model.s0[k] * (x[k] - model.x0[k] - 0.5 * integral).exp());
    }
    Ok(out)
}
