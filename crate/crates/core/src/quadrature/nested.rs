//! Nested integrals of Khasminskii/Feller type,
//! `∫ [∫ C(σ)/A(σ) dσ] / C(z) dz` with `C = exp ∫ B`, accumulated in the log
//! domain along one monotone grid.

use super::gk::{gauss7, gk15, integrate_tol};
use super::tail::{classify_windows, Direction, IntegralVerdict, TailOptions};
use super::QuadError;
use crate::dsl::DslError;

pub const CELLS_PER_OCTAVE: usize = 64;

/// Grid map `u ↦ (z(u), |dz/du|)` on `u ≥ 0`; `u` is measured in octaves for
/// the geometric maps.
pub(crate) type GridMap<'a> = &'a dyn Fn(f64) -> (f64, f64);

/// Result of walking the grid: nodes, `J` at the nodes and the outer integral
/// of `J` over each unit of `u`.
#[derive(Debug, Clone)]
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) struct Walk {
    pub z: Vec<f64>,
    pub j: Vec<f64>,
    pub windows: Vec<f64>,
}

/// Oriented `∫_from^to B`.
fn oriented<F>(b: &mut F, from: f64, to: f64) -> Result<f64, QuadError>
where
    F: FnMut(f64) -> Result<f64, DslError>,
{
    if from == to {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if from < to { (from, to, 1.0) } else { (to, from, -1.0) };
    let v = gauss7(b, lo, hi).map_err(|error| QuadError::Eval { x: lo, error })?;
    Ok(sign * v)
}

/// Break points for a cell over which `∫B` changes by `spread`. When the
/// exponential weight varies sharply, pieces are graded geometrically toward
/// both ends so the boundary layers are resolved.
fn graded_breaks(lo: f64, hi: f64, spread: f64) -> Vec<f64> {
    if !(spread > 2.0) {
        return vec![lo, hi];
    }
    let width = hi - lo;
    let mid = 0.5 * (lo + hi);
    let mut left = vec![lo];
    let mut right = vec![hi];
    let mut step = 0.25 * width / spread;
    while lo + step < mid {
        left.push(lo + step);
        right.push(hi - step);
        step *= 2.0;
    }
    left.push(mid);
    left.extend(right.into_iter().rev());
    left
}

/// Computes `J(z) = ∫_{anchor..z} exp(∫_z^σ B) / A(σ) dσ` at every node (the
/// σ-range is unoriented, the inner B-integral oriented), starting from
/// `j0 = J(z(0))`, together with `∫ J dz` per unit of `u`.
pub(crate) fn walk<FA, FB>(
    a: &mut FA,
    b: &mut FB,
    map: GridMap<'_>,
    units: usize,
    cells_per_unit: usize,
    j0: f64,
) -> Result<Walk, QuadError>
where
    FA: FnMut(f64) -> Result<f64, DslError>,
    FB: FnMut(f64) -> Result<f64, DslError>,
{
    assert!(cells_per_unit % 2 == 0, "Simpson needs an even cell count");
    let total = units * cells_per_unit;
    let h = 1.0 / cells_per_unit as f64;
    let mut z = Vec::with_capacity(total + 1);
    let mut jac = Vec::with_capacity(total + 1);
    for k in 0..=total {
        let (zk, dk) = map(k as f64 * h);
        z.push(zk);
        jac.push(dk);
    }
    let mut j = Vec::with_capacity(total + 1);
    j.push(j0);
    for k in 0..total {
        if j[k] == f64::INFINITY {
            j.push(f64::INFINITY);
            continue;
        }
        let (zl, zr) = (z[k], z[k + 1]);
        let spread = oriented(b, zr, zl)?;
        let decay = spread.exp();
        let (lo, hi) = if zl < zr { (zl, zr) } else { (zr, zl) };
        let mut fail = None;
        let overflow = std::cell::Cell::new(false);
        let mut integrand = |s: f64| {
            let av = a(s)?;
            if !(av > 0.0) {
                fail.get_or_insert(s);
                return Ok(0.0);
            }
            let e = oriented(b, zr, s).map_err(|e| match e {
                QuadError::Eval { error, .. } => error,
                other => DslError::Domain {
                    message: other.to_string(),
                    t: 0.0,
                    x: vec![s],
                },
            })?;
            let v = e.exp() / av;
            if v.is_finite() {
                Ok(v)
            } else {
                overflow.set(true);
                Err(DslError::Domain {
                    message: "overflow".into(),
                    t: 0.0,
                    x: vec![s],
                })
            }
        };
        let breaks = graded_breaks(lo, hi, spread.abs().min(1e12));
        let mut cell = 0.0;
        let mut rough = Vec::with_capacity(breaks.len());
        for piece in breaks.windows(2) {
            match gk15(&mut integrand, piece[0], piece[1]) {
                Ok(q) => rough.push(q.value.abs()),
                Err(QuadError::Eval { .. }) if overflow.get() => break,
                Err(e) => return Err(e),
            }
        }
        let abs_tol = 1e-12 * rough.iter().sum::<f64>();
        // Exponents are only known to the resolution of the coordinate itself.
        let rel_tol = (100.0 * f64::EPSILON * lo.abs().max(hi.abs()) * spread.abs() / (hi - lo)).max(1e-10);
        if !overflow.get() {
            for piece in breaks.windows(2) {
                cell += match integrate_tol(&mut integrand, piece[0], piece[1], rel_tol, abs_tol) {
                    Ok(q) => q.value,
                    Err(QuadError::MaxDepthExceeded { value, .. }) => value,
                    Err(QuadError::Eval { .. }) if overflow.get() => break,
                    Err(e) => return Err(e),
                };
            }
        }
        if let Some(x) = fail {
            return Err(QuadError::NotPositive { x });
        }
        let cell_value = if overflow.get() { f64::INFINITY } else { cell };
        let next = decay * j[k] + cell_value;
        j.push(if next.is_nan() { f64::INFINITY } else { next });
    }
    let mut windows = Vec::with_capacity(units);
    for u in 0..units {
        let base = u * cells_per_unit;
        let mut s = 0.0;
        for c in (0..cells_per_unit).step_by(2) {
            let k = base + c;
            let g = |i: usize| j[i] * jac[i];
            s += h / 3.0 * (g(k) + 4.0 * g(k + 1) + g(k + 2));
        }
        windows.push(s);
    }
    Ok(Walk { z, j, windows })
}

/// Classifies `∫_r^∞ [∫_r^z C/A dσ] / C(z) dz` (`ToInfinity`) or
/// `∫_0^r [∫_z^r C/A dσ] / C(z) dz` (`ToZero`) with `C(z) = exp ∫_r^z B`.
pub fn khasminskii_nested<FA, FB>(
    mut a: FA,
    mut b: FB,
    r: f64,
    direction: Direction,
    opts: &TailOptions,
) -> Result<IntegralVerdict, QuadError>
where
    FA: FnMut(f64) -> Result<f64, DslError>,
    FB: FnMut(f64) -> Result<f64, DslError>,
{
    if !(r > 0.0 && r.is_finite()) {
        return Err(QuadError::BadInterval { lo: r, hi: f64::INFINITY });
    }
    let ln2 = std::f64::consts::LN_2;
    let map_inf = move |u: f64| {
        let z = r * 2f64.powf(u);
        (z, z * ln2)
    };
    let map_zero = move |u: f64| {
        let z = r * 2f64.powf(-u);
        (z, z * ln2)
    };
    let map: GridMap<'_> = match direction {
        Direction::ToInfinity => &map_inf,
        Direction::ToZero => &map_zero,
    };
    let w = walk(&mut a, &mut b, map, opts.k_max, CELLS_PER_OCTAVE, 0.0)?;
    Ok(classify_windows(&w.windows, direction, opts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gk::integrate;
    use crate::quadrature::tail::{classify_tail, IntegralKind};

    fn opts() -> TailOptions {
        TailOptions::default()
    }

    #[test]
    fn radial_cubic_converges() {
        let a = |z: f64| Ok(2.0 * z * (2.0 * z).sqrt().powi(3));
        let b = |z: f64| Ok(3.0 / (2.0 * z));
        let v = khasminskii_nested(a, b, 0.5, Direction::ToInfinity, &opts()).unwrap();
        assert!(v.converges(), "{:?}", v.evidence);
        // Closed form: J(z) = ln(2z) / (2 (2z)^{3/2}); ∫_{1/2}^∞ J dz = 1.
        assert!((v.value.unwrap() - 1.0).abs() < 2e-2, "{:?}", v.value);
    }

    #[test]
    fn one_dimensional_brownian_diverges() {
        let v = khasminskii_nested(|z: f64| Ok(2.0 * z), |z: f64| Ok(1.0 / (2.0 * z)), 0.5, Direction::ToInfinity, &opts()).unwrap();
        assert!(v.diverges());
    }

    #[test]
    fn three_dimensional_toward_zero_diverges() {
        let v = khasminskii_nested(|z: f64| Ok(2.0 * z), |z: f64| Ok(3.0 / (2.0 * z)), 0.5, Direction::ToZero, &opts()).unwrap();
        assert!(v.diverges());
    }

    #[test]
    fn inner_recurrence_matches_direct_double_integral() {
        // A(z) = 1 + z, B(z) = 1/(1+z): J(z) = ∫_r^z (1+σ)/(1+z) / (1+σ) dσ = (z - r)/(1+z).
        let r = 0.5;
        let map = move |u: f64| {
            let z = r * 2f64.powf(u);
            (z, z * std::f64::consts::LN_2)
        };
        let w = walk(&mut |z: f64| Ok(1.0 + z), &mut |z: f64| Ok(1.0 / (1.0 + z)), &map, 4, 64, 0.0).unwrap();
        for (z, j) in w.z.iter().zip(&w.j) {
            assert!((j - (z - r) / (1.0 + z)).abs() < 1e-12);
        }
        let direct = integrate(|z| Ok((z - r) / (1.0 + z)), r, 2.0 * r, 1e-12).unwrap().value;
        assert!((w.windows[0] - direct).abs() < 1e-9);
    }

    #[test]
    fn zero_b_agrees_with_direct_tail() {
        for p in [0.5, 1.0, 2.5] {
            let r = 0.5;
            let nested = khasminskii_nested(|z: f64| Ok(z.powf(p)), |_| Ok(0.0), r, Direction::ToInfinity, &opts()).unwrap();
            let direct = classify_tail(
                |z: f64| Ok(integrate(|s: f64| Ok(s.powf(-p)), r, z, 1e-10).map(|q| q.value).unwrap_or(f64::NAN)),
                r,
                Direction::ToInfinity,
                &opts(),
            )
            .unwrap();
            assert_eq!(nested.kind, direct.kind, "p={p}");
            assert_eq!(nested.kind, IntegralKind::Diverges);
        }
    }
}
