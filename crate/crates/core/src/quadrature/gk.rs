//! Globally adaptive Gauss–Kronrod (7/15) integration.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::QuadError;
use crate::dsl::DslError;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

pub const MAX_DEPTH: u32 = 60;
const MAX_INTERVALS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    pub value: f64,
    pub error_bound: f64,
}

/// One 15-point Kronrod pass with the embedded 7-point Gauss error estimate.
pub fn gk15<F>(f: &mut F, lo: f64, hi: f64) -> Result<Quad, QuadError>
where
    F: FnMut(f64) -> Result<f64, DslError>,
{
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let mut eval = |x: f64| -> Result<f64, QuadError> {
        let v = f(x).map_err(|error| QuadError::Eval { x, error })?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(QuadError::Eval {
                x,
                error: DslError::Domain {
                    message: "non-finite integrand".into(),
                    t: 0.0,
                    x: vec![x],
                },
            })
        }
    };
    let fc = eval(c)?;
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for (j, (&xk, &wk)) in XGK[..7].iter().zip(&WGK[..7]).enumerate() {
        let dx = h * xk;
        let s = eval(c - dx)? + eval(c + dx)?;
        k += wk * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    Ok(Quad {
        value: k * h,
        error_bound: ((k - g) * h).abs(),
    })
}

struct Piece {
    lo: f64,
    hi: f64,
    depth: u32,
    q: Quad,
}

impl PartialEq for Piece {
    fn eq(&self, o: &Self) -> bool {
        self.q.error_bound == o.q.error_bound
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Piece {
    fn cmp(&self, o: &Self) -> Ordering {
        self.q.error_bound.total_cmp(&o.q.error_bound)
    }
}

/// Integrates `f` over `[lo, hi]` by repeatedly bisecting the piece with the
/// largest error estimate until the summed estimate is within
/// `rel_tol·|value|` (or `1e-300` absolute).
pub fn integrate<F>(f: F, lo: f64, hi: f64, rel_tol: f64) -> Result<Quad, QuadError>
where
    F: FnMut(f64) -> Result<f64, DslError>,
{
    integrate_tol(f, lo, hi, rel_tol, 1e-300)
}

/// [`integrate`] with an explicit absolute tolerance.
pub fn integrate_tol<F>(mut f: F, lo: f64, hi: f64, rel_tol: f64, abs_tol: f64) -> Result<Quad, QuadError>
where
    F: FnMut(f64) -> Result<f64, DslError>,
{
    if lo == hi {
        return Ok(Quad {
            value: 0.0,
            error_bound: 0.0,
        });
    }
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(QuadError::BadInterval { lo, hi });
    }
    let q = gk15(&mut f, lo, hi)?;
    let mut heap = BinaryHeap::new();
    heap.push(Piece { lo, hi, depth: 0, q });
    let (mut value, mut err) = (q.value, q.error_bound);
    loop {
        if err <= (rel_tol * value.abs()).max(abs_tol) {
            break;
        }
        let worst = heap.pop().expect("non-empty");
        if worst.depth >= MAX_DEPTH || heap.len() >= MAX_INTERVALS {
            return Err(QuadError::MaxDepthExceeded {
                value,
                error_bound: err,
            });
        }
        let mid = 0.5 * (worst.lo + worst.hi);
        let left = gk15(&mut f, worst.lo, mid)?;
        let right = gk15(&mut f, mid, worst.hi)?;
        value += left.value + right.value - worst.q.value;
        err += left.error_bound + right.error_bound - worst.q.error_bound;
        let depth = worst.depth + 1;
        heap.push(Piece { lo: worst.lo, hi: mid, depth, q: left });
        heap.push(Piece { lo: mid, hi: worst.hi, depth, q: right });
        if heap.len() % 64 == 0 {
            value = heap.iter().map(|p| p.q.value).sum();
            err = heap.iter().map(|p| p.q.error_bound).sum();
        }
    }
    let value = heap.iter().map(|p| p.q.value).sum();
    let error_bound = heap.iter().map(|p| p.q.error_bound).sum();
    Ok(Quad { value, error_bound })
}

/// 7-point Gauss–Legendre rule, used for short inner integrals.
pub fn gauss7<F>(f: &mut F, lo: f64, hi: f64) -> Result<f64, DslError>
where
    F: FnMut(f64) -> Result<f64, DslError>,
{
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let mut s = WG[3] * f(c)?;
    for j in 0..3 {
        let dx = h * XGK[2 * j + 1];
        s += WG[j] * (f(c - dx)? + f(c + dx)?);
    }
    Ok(s * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_square() {
        let q = integrate(|z| Ok(1.0 / (z * z)), 1.0, 10.0, 1e-12).unwrap();
        assert!((q.value - 0.9).abs() < 1e-9);
        assert!(q.error_bound <= 1e-9);
    }

    #[test]
    fn zero_integrand() {
        let q = integrate(|_| Ok(0.0), 0.0, 1.0, 1e-10).unwrap();
        assert_eq!(q.value, 0.0);
    }

    #[test]
    fn endpoint_singularity() {
        let q = integrate(|z: f64| Ok(1.0 / z.sqrt()), 0.0, 1.0, 1e-8);
        let q = q.unwrap();
        assert!((q.value - 2.0).abs() < 1e-7, "{q:?}");
    }

    #[test]
    fn kink() {
        let q = integrate(|z: f64| Ok(1.0 / z.abs().max(1.0).powi(3)), 0.0, 40.0, 1e-12).unwrap();
        let exact = 1.0 + 0.5 * (1.0 - 1.0 / 1600.0);
        assert!((q.value - exact).abs() < 1e-10);
    }

    #[test]
    fn gauss7_exact_for_polynomials() {
        let v = gauss7(&mut |x: f64| Ok(x.powi(13)), 0.0, 1.0).unwrap();
        assert!((v - 1.0 / 14.0).abs() < 1e-14);
    }

    #[test]
    fn evaluation_failure_reports_point() {
        let e = integrate(|x: f64| if x > 0.5 { Err(DslError::Domain { message: "x".into(), t: 0.0, x: vec![x] }) } else { Ok(1.0) }, 0.0, 1.0, 1e-8);
        assert!(matches!(e, Err(QuadError::Eval { x, .. }) if x > 0.5));
    }
}
