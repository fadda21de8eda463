//! Feller's test for explosion of one-dimensional diffusions
//! `dY = μ(Y) dt + σ(Y) dW` on an interval `(l, r)`.

use serde::Serialize;

use super::nested::{walk, GridMap};
use super::tail::{classify_windows, Direction, IntegralVerdict, TailOptions};
use super::QuadError;
use crate::dsl::DslError;

/// `v_c(x) = ∫_c^x exp(-2∫_c^z μ/σ²) ∫_c^z exp(2∫_c^y μ/σ²) / σ²(y) dy dz`.
pub fn feller_v<FM, FS>(mut mu: FM, mut sigma2: FS, c: f64, x: f64) -> Result<f64, QuadError>
where
    FM: FnMut(f64) -> Result<f64, DslError>,
    FS: FnMut(f64) -> Result<f64, DslError>,
{
    if x == c {
        return Ok(0.0);
    }
    let span = (x - c).abs();
    let cells = ((span * 256.0).ceil() as usize).clamp(512, 1 << 16);
    let cells = cells + cells % 2;
    let map = move |u: f64| (c + (x - c) * u, span);
    let (mut a, mut b) = coefficients(&mut mu, &mut sigma2);
    let w = walk(&mut a, &mut b, &map, 1, cells, 0.0).map_err(singular_sigma)?;
    Ok(w.windows[0])
}

fn singular_sigma(e: QuadError) -> QuadError {
    match e {
        QuadError::NotPositive { x } => QuadError::SingularSigma { x },
        other => other,
    }
}

#[allow(clippy::type_complexity)]
fn coefficients<'a, FM, FS>(
    mu: &'a mut FM,
    sigma2: &'a mut FS,
) -> (
    impl FnMut(f64) -> Result<f64, DslError> + 'a,
    impl FnMut(f64) -> Result<f64, DslError> + 'a,
)
where
    FM: FnMut(f64) -> Result<f64, DslError>,
    FS: FnMut(f64) -> Result<f64, DslError>,
{
    let s2 = std::cell::RefCell::new(sigma2);
    let s2 = std::rc::Rc::new(s2);
    let s2b = s2.clone();
    let a = move |y: f64| (s2.borrow_mut())(y);
    let b = move |y: f64| {
        let s = (s2b.borrow_mut())(y)?;
        if !(s > 0.0) {
            return Err(DslError::Domain {
                message: "sigma^2 is not positive".into(),
                t: 0.0,
                x: vec![y],
            });
        }
        Ok(2.0 * mu(y)? / s)
    };
    (a, b)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FellerClassification {
    pub left: IntegralVerdict,
    pub right: IntegralVerdict,
    pub explosive: bool,
    pub sigma_continuous: bool,
    /// `P(τ_l < ∞) > 0`; reported only when σ passes the continuity probe.
    pub tau_l_possible: Option<bool>,
    pub tau_r_possible: Option<bool>,
}

fn endpoint_map(c: f64, end: f64) -> impl Fn(f64) -> (f64, f64) {
    let ln2 = std::f64::consts::LN_2;
    let scale = c.abs().max(1.0);
    move |u: f64| {
        if end.is_infinite() {
            let s = end.signum() * scale;
            (c + s * (2f64.powf(u) - 1.0), scale * ln2 * 2f64.powf(u))
        } else {
            let g = 2f64.powf(-u);
            (end - (end - c) * g, (end - c).abs() * ln2 * g)
        }
    }
}

fn continuity_probe<FS>(sigma2: &mut FS, l: f64, r: f64, c: f64) -> bool
where
    FS: FnMut(f64) -> Result<f64, DslError>,
{
    let mut points = vec![c];
    for k in -6..=12 {
        for p in [c + 2f64.powi(k), c - 2f64.powi(k), c + 0.37 * 2f64.powi(k), c - 0.37 * 2f64.powi(k)] {
            if p > l && p < r {
                points.push(p);
            }
        }
    }
    for x in points {
        let mut prev = f64::INFINITY;
        for h in [1e-3, 1e-5, 1e-7] {
            let (Ok(lo), Ok(hi), Ok(mid)) = (sigma2(x - h), sigma2(x + h), sigma2(x)) else {
                return false;
            };
            let defect = (hi - lo).abs();
            let slack = 1e-9 * (1.0 + mid.abs());
            if defect > 0.5 * prev + slack {
                return false;
            }
            prev = defect;
        }
        if prev > 1e-4 * (1.0 + sigma2(x).unwrap_or(0.0).abs()) {
            return false;
        }
    }
    true
}

/// Classifies `lim v_c` at both ends of `(l, r)`. The diffusion is explosive
/// iff one of the limits is finite.
pub fn feller_classify<FM, FS>(
    mut mu: FM,
    mut sigma2: FS,
    interval: (f64, f64),
    c: f64,
    opts: &TailOptions,
) -> Result<FellerClassification, QuadError>
where
    FM: FnMut(f64) -> Result<f64, DslError>,
    FS: FnMut(f64) -> Result<f64, DslError>,
{
    let (l, r) = interval;
    if !(l < c && c < r) {
        return Err(QuadError::BadInterval { lo: l, hi: r });
    }
    let mut side = |end: f64| -> Result<IntegralVerdict, QuadError> {
        let map = endpoint_map(c, end);
        let map: GridMap<'_> = &map;
        let (mut a, mut b) = coefficients(&mut mu, &mut sigma2);
        let w = walk(&mut a, &mut b, map, opts.k_max, 64, 0.0).map_err(singular_sigma)?;
        let dir = if end.is_infinite() { Direction::ToInfinity } else { Direction::ToZero };
        Ok(classify_windows(&w.windows, dir, opts))
    };
    let left = side(l)?;
    let right = side(r)?;
    let explosive = left.converges() || right.converges();
    let sigma_continuous = continuity_probe(&mut sigma2, l, r, c);
    let flag = |v: &IntegralVerdict| match (sigma_continuous, v.kind) {
        (true, super::IntegralKind::Converges) => Some(true),
        (true, super::IntegralKind::Diverges) => Some(false),
        _ => None,
    };
    Ok(FellerClassification {
        tau_l_possible: flag(&left),
        tau_r_possible: flag(&right),
        left,
        right,
        explosive,
        sigma_continuous,
    })
}
