//! Generators and property bodies shared by the property suite and the
//! acceptance run.

#![allow(dead_code)]

use arbcheck_core::criteria::{ConditionId, ConditionReport, Evidence, Mode, Verdict};
use arbcheck_core::dsl::{parse_expr, print_expr, BinOp, Expr, Func, Var};
use arbcheck_core::model::{sqrt_psd, Mat};
use arbcheck_core::quadrature::{classify_tail, Direction, IntegralKind, TailOptions};
use arbcheck_core::verdict::{classify, Dims, Existence, Flag, MarketVerdict, Uniqueness};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (0u32..1000).prop_map(|v| Expr::Num(v as f64)),
        (0.0f64..1e6).prop_map(Expr::Num),
        (1e-12f64..1e-3).prop_map(Expr::Num),
        Just(Expr::Var(Var::Time)),
        (1usize..=12).prop_map(|i| Expr::Var(Var::State(i))),
        Just(Expr::Var(Var::Z)),
        Just(Expr::Var(Var::Rho)),
        Just(Expr::Norm),
    ]
}

/// Random expression trees of depth at most 8.
pub fn expr() -> impl Strategy<Value = Expr> {
    let op = prop_oneof![Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul), Just(BinOp::Div), Just(BinOp::Pow)];
    let unary = prop_oneof![Just(Func::Exp), Just(Func::Log), Just(Func::Sqrt), Just(Func::Abs)];
    let binary = prop_oneof![Just(Func::Min), Just(Func::Max)];
    leaf().prop_recursive(7, 64, 2, move |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (op.clone(), inner.clone(), inner.clone()).prop_map(|(o, l, r)| Expr::Binary(o, Box::new(l), Box::new(r))),
            (unary.clone(), inner.clone()).prop_map(|(f, e)| Expr::Call(f, vec![e])),
            (binary.clone(), inner.clone(), inner).prop_map(|(f, l, r)| Expr::Call(f, vec![l, r])),
        ]
    })
}

pub fn round_trip(e: &Expr) -> Result<(), TestCaseError> {
    prop_assert!(e.depth() <= 8);
    let text = print_expr(e);
    let parsed = parse_expr(&text).map_err(|err| TestCaseError::fail(format!("{text}: {err}")))?;
    prop_assert_eq!(&parsed, e);
    let again = parse_expr(&print_expr(&parsed)).unwrap();
    prop_assert_eq!(again, parsed);
    Ok(())
}

/// A symmetric positive definite matrix `QᵀQ + εI` with `d ≤ 8`.
pub fn spd() -> impl Strategy<Value = Mat> {
    (1usize..=8)
        .prop_flat_map(|d| (Just(d), prop::collection::vec(-3.0f64..3.0, d * d), 1e-6f64..1.0))
        .prop_map(|(d, q, eps)| {
            let q = Mat::from_vec(d, d, q);
            q.transpose() * &q + Mat::identity(d, d) * eps
        })
}

pub fn sqrt_reconstructs(a: &Mat) -> Result<(), TestCaseError> {
    let r = sqrt_psd(a, 1e-9 * (1.0 + a.norm())).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let scale = 1.0 + a.norm();
    let rec = (&r * &r - a).norm();
    prop_assert!(rec <= 1e-10 * scale, "reconstruction error {rec:e} (scale {scale})");
    let asym = (&r - r.transpose()).norm();
    prop_assert!(asym <= 1e-10 * scale, "asymmetry {asym:e}");
    Ok(())
}

/// Random condition reports with a random market shape. Many sets
/// contradict themselves; callers keep only those that classify.
pub fn report_set() -> impl Strategy<Value = (Vec<ConditionReport>, Dims)> {
    let report = (
        prop::sample::select(ConditionId::ALL.to_vec()),
        prop_oneof![3 => Just(Verdict::Holds), 2 => Just(Verdict::Fails), 1 => Just(Verdict::Inconclusive)],
        prop_oneof![Just(Mode::Certificate), Just(Mode::Evidence)],
    )
        .prop_map(|(condition_id, verdict, mode)| ConditionReport {
            condition_id,
            verdict,
            mode,
            evidence: Evidence::default(),
            notes: vec![],
        });
    let dims = (1usize..=4).prop_flat_map(|d| (Just(d), 1..=d)).prop_map(|(d, m)| Dims { d, m });
    (prop::collection::vec(report, 0..10), dims)
}

const EXISTENCE: [Flag; 4] = [Flag::Slmd, Flag::Smd, Flag::Elmm, Flag::Emm];

fn closed(v: &MarketVerdict) -> Result<(), TestCaseError> {
    use Existence::{Exists as E, NotExists as N};
    let ex = |f| v.existence(f);
    for (from, fv, to, tv) in [
        (Flag::Emm, E, Flag::Elmm, E),
        (Flag::Emm, E, Flag::Smd, E),
        (Flag::Elmm, E, Flag::Slmd, E),
        (Flag::Smd, E, Flag::Slmd, E),
        (Flag::Slmd, N, Flag::Smd, N),
        (Flag::Slmd, N, Flag::Elmm, N),
        (Flag::Elmm, N, Flag::Emm, N),
        (Flag::Smd, N, Flag::Emm, N),
    ] {
        if ex(from) == fv {
            prop_assert_eq!(ex(to), tv, "{} = {:?} but {} = {:?}", from, fv, to, ex(to));
        }
    }
    if v.elmm_unique == Uniqueness::Yes {
        prop_assert_eq!(v.elmm, E);
    }
    if v.emm_unique == Uniqueness::Yes {
        prop_assert_eq!(v.emm, E);
    }
    Ok(())
}

fn provenance_complete(v: &MarketVerdict, reports: &[ConditionReport]) -> Result<(), TestCaseError> {
    let flags = EXISTENCE.iter().chain(&[Flag::ElmmUnique, Flag::EmmUnique]);
    for &flag in flags {
        let want = match v.existence(flag) {
            Existence::Unknown => continue,
            Existence::Exists if matches!(flag, Flag::ElmmUnique | Flag::EmmUnique) => format!("{flag}=yes"),
            Existence::Exists => format!("{flag}=exists"),
            Existence::NotExists => format!("{flag}=not_exists"),
        };
        let cited: Vec<_> = v.provenance.iter().filter(|p| p.conclusion == want).collect();
        prop_assert!(!cited.is_empty(), "{want} has no provenance");
        for p in cited {
            prop_assert!(!p.condition_ids.is_empty(), "{want} via `{}` cites no condition", p.rule);
            for id in &p.condition_ids {
                prop_assert!(reports.iter().any(|r| r.condition_id == *id), "{want} cites absent {id}");
            }
        }
        prop_assert!(v.grade(flag).is_some());
    }
    Ok(())
}

/// Implication closure, provenance, order independence and monotonicity
/// under adding one more report. Returns whether the set was consistent.
pub fn verdict_properties(reports: &[ConditionReport], dims: Dims, extra: &ConditionReport, rotate: usize) -> Result<bool, TestCaseError> {
    let base = classify(reports, dims);
    let mut shuffled = reports.to_vec();
    shuffled.reverse();
    if !shuffled.is_empty() {
        let k = rotate % shuffled.len();
        shuffled.rotate_left(k);
    }
    prop_assert_eq!(&classify(&shuffled, dims), &base);
    let Ok(v) = base else { return Ok(false) };
    closed(&v)?;
    provenance_complete(&v, reports)?;
    let mut more = reports.to_vec();
    more.push(extra.clone());
    if let Ok(w) = classify(&more, dims) {
        closed(&w)?;
        for f in EXISTENCE {
            let (a, b) = (v.existence(f), w.existence(f));
            prop_assert!(
                !matches!((a, b), (Existence::Exists, Existence::NotExists) | (Existence::NotExists, Existence::Exists)),
                "{} flipped from {:?} to {:?} without a contradiction",
                f,
                a,
                b
            );
            if a != Existence::Unknown {
                prop_assert_eq!(a, b, "{} lost its value after adding a report", f);
            }
        }
    }
    Ok(true)
}

pub const TAIL_TABLE: [(f64, IntegralKind); 6] = [
    (0.5, IntegralKind::Diverges),
    (0.8, IntegralKind::Diverges),
    (1.0, IntegralKind::Diverges),
    (1.2, IntegralKind::Converges),
    (1.5, IntegralKind::Converges),
    (2.0, IntegralKind::Converges),
];

/// `∫_1^∞ z^{-p} dz` for the power table; returns the mismatches.
pub fn tail_table_mismatches() -> Vec<(f64, IntegralKind, IntegralKind)> {
    let opts = TailOptions::default();
    TAIL_TABLE
        .iter()
        .filter_map(|&(p, want)| {
            let got = classify_tail(|z: f64| Ok(z.powf(-p)), 1.0, Direction::ToInfinity, &opts)
                .expect("power integrand evaluates")
                .kind;
            (got != want).then_some((p, want, got))
        })
        .collect()
}

/// `P(sup_{s≤t} |W_s| ≥ a)` for a standard Brownian motion: the reflection
/// series for the strip `(-a, a)` rearranged into `4 Σ_j (-1)^j Φ̄((2j+1)a/√t)`
/// so that small probabilities keep their digits.
pub fn brownian_exit_probability(a: f64, t: f64) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    let n = Normal::new(0.0, 1.0).unwrap();
    let s = a / t.sqrt();
    (0..64)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * 4.0 * n.sf((2 * j + 1) as f64 * s)
        })
        .sum()
}
