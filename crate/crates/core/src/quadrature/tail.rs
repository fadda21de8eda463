//! Convergence classification of improper integrals from geometric
//! window sums.

use serde::Serialize;

use super::{gk::integrate, QuadError};
use crate::dsl::DslError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    ToInfinity,
    ToZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IntegralKind {
    Converges,
    Diverges,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailOptions {
    pub k_max: usize,
    pub margin: f64,
    pub rel_tol: f64,
    pub divergence_ratio: f64,
    pub nondecreasing_run: usize,
}

impl Default for TailOptions {
    fn default() -> Self {
        TailOptions {
            k_max: 40,
            margin: 0.1,
            rel_tol: 1e-2,
            divergence_ratio: 1e6,
            nondecreasing_run: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailEvidence {
    pub direction: Direction,
    /// Integral over each geometric window, innermost first.
    pub windows: Vec<f64>,
    pub partial_sum: f64,
    /// Least-squares slope of `log2 I_k` over the trailing half.
    pub window_slope: f64,
    /// Power `q` such that the integrand behaves like `z^q` along the tail.
    pub fitted_exponent: f64,
    pub trailing_nondecreasing: usize,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegralVerdict {
    pub kind: IntegralKind,
    pub value: Option<f64>,
    pub error_bound: f64,
    pub evidence: TailEvidence,
}

impl IntegralVerdict {
    pub fn converges(&self) -> bool {
        self.kind == IntegralKind::Converges
    }

    pub fn diverges(&self) -> bool {
        self.kind == IntegralKind::Diverges
    }
}

fn slope(ys: &[(f64, f64)]) -> f64 {
    let n = ys.len() as f64;
    if ys.len() < 2 {
        return 0.0;
    }
    let mx = ys.iter().map(|p| p.0).sum::<f64>() / n;
    let my = ys.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = ys.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = ys.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Classifies the tail of a series of non-negative window integrals.
pub fn classify_windows(windows: &[f64], direction: Direction, opts: &TailOptions) -> IntegralVerdict {
    let n = windows.len();
    let partial_sum: f64 = windows.iter().sum();
    let mut run = 0;
    for k in (1..n).rev() {
        if windows[k] >= windows[k - 1] * (1.0 - 1e-9) && windows[k] > 0.0 {
            run += 1;
        } else {
            break;
        }
    }
    let trailing: Vec<(f64, f64)> = windows
        .iter()
        .enumerate()
        .skip(n / 2)
        .filter(|(_, v)| **v > 0.0)
        .map(|(k, v)| (k as f64, v.log2()))
        .collect();
    let s = slope(&trailing);
    let fitted_exponent = match direction {
        Direction::ToInfinity => s - 1.0,
        Direction::ToZero => -s - 1.0,
    };
    let mut evidence = TailEvidence {
        direction,
        windows: windows.to_vec(),
        partial_sum,
        window_slope: s,
        fitted_exponent,
        trailing_nondecreasing: run,
        note: String::new(),
    };
    let verdict = |kind, value, error_bound, evidence| IntegralVerdict {
        kind,
        value,
        error_bound,
        evidence,
    };
    if windows.iter().any(|w| w.is_infinite()) {
        evidence.note = "a window integral is infinite".into();
        return verdict(IntegralKind::Diverges, None, f64::INFINITY, evidence);
    }
    let zero_tail = windows.iter().rev().take_while(|w| **w == 0.0).count();
    if zero_tail >= (n / 4).max(2) {
        evidence.note = format!("last {zero_tail} windows vanish");
        return verdict(IntegralKind::Converges, Some(partial_sum), 0.0, evidence);
    }
    if run >= opts.nondecreasing_run {
        evidence.note = format!("{run} consecutive non-decreasing windows");
        return verdict(IntegralKind::Diverges, None, f64::INFINITY, evidence);
    }
    let settled = n >= 12
        && windows[n - 11..].iter().all(|w| *w > 0.0)
        && windows[n - 11..].windows(2).all(|p| (p[1] / p[0]).log2().abs() <= 1e-4);
    if settled {
        evidence.note = "windows settle at a positive floor".into();
        return verdict(IntegralKind::Diverges, None, f64::INFINITY, evidence);
    }
    let first = windows.iter().copied().find(|w| *w > 0.0).unwrap_or(0.0);
    if partial_sum > opts.divergence_ratio * first && s >= -opts.margin {
        evidence.note = "partial sums exceed the divergence threshold".into();
        return verdict(IntegralKind::Diverges, None, f64::INFINITY, evidence);
    }
    if s < -opts.margin && trailing.len() >= 2 {
        let ratio = 2f64.powf(s);
        let last = windows[n - 1];
        let remainder = last * ratio / (1.0 - ratio);
        if remainder <= opts.rel_tol * partial_sum {
            evidence.note = "geometric window decay".into();
            return verdict(IntegralKind::Converges, Some(partial_sum + remainder), remainder, evidence);
        }
        evidence.note = "windows decay but the tail remainder is not yet below tolerance".into();
    } else {
        evidence.note = "window slope inside the borderline band".into();
    }
    verdict(IntegralKind::Inconclusive, None, f64::INFINITY, evidence)
}

/// Window `k` of the geometric sequence anchored at `lo`.
pub fn window(lo: f64, k: usize, direction: Direction) -> (f64, f64) {
    match direction {
        Direction::ToInfinity => (lo * 2f64.powi(k as i32), lo * 2f64.powi(k as i32 + 1)),
        Direction::ToZero => (lo * 2f64.powi(-(k as i32) - 1), lo * 2f64.powi(-(k as i32))),
    }
}

/// Classifies `∫_lo^∞ f` or `∫_0^lo f` for a non-negative integrand.
pub fn classify_tail<F>(mut f: F, lo: f64, direction: Direction, opts: &TailOptions) -> Result<IntegralVerdict, QuadError>
where
    F: FnMut(f64) -> Result<f64, DslError>,
{
    if !(lo > 0.0 && lo.is_finite()) {
        return Err(QuadError::BadInterval { lo, hi: f64::INFINITY });
    }
    let mut windows = Vec::with_capacity(opts.k_max);
    for k in 0..opts.k_max {
        let (a, b) = window(lo, k, direction);
        let mut negative = None;
        let q = integrate(
            |z| {
                let v = f(z)?;
                if v < 0.0 && negative.is_none() {
                    negative = Some(z);
                }
                Ok(v)
            },
            a,
            b,
            1e-10,
        );
        if let Some(z) = negative {
            return Err(QuadError::OscillationDetected { x: z });
        }
        let v = match q {
            Ok(q) => q.value,
            Err(QuadError::MaxDepthExceeded { value, .. }) => value,
            Err(e) => return Err(e),
        };
        windows.push(v.max(0.0));
    }
    Ok(classify_windows(&windows, direction, opts))
}
