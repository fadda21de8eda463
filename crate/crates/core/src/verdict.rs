//! Combines condition reports into existence and uniqueness flags for the
//! candidate densities and measures, and the no-arbitrage taxonomy.
//!
//! Rules fire on `Holds`/`Fails` reports only; `Inconclusive` never fires a
//! rule. Every conclusion is then closed under
//! `emm ⇒ elmm ⇒ slmd`, `emm ⇒ smd ⇒ slmd` and their contrapositives.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::criteria::{ConditionId, ConditionReport, Mode, Verdict};
use crate::model::MarketModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Existence {
    Exists,
    NotExists,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Uniqueness {
    Yes,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Holds,
    Fails,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bubble {
    Yes,
    No,
    Unknown,
}

/// The flags a rule can conclude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    Slmd,
    Smd,
    Elmm,
    Emm,
    ElmmUnique,
    EmmUnique,
}

impl Flag {
    pub fn as_str(self) -> &'static str {
        match self {
            Flag::Slmd => "slmd",
            Flag::Smd => "smd",
            Flag::Elmm => "elmm",
            Flag::Emm => "emm",
            Flag::ElmmUnique => "elmm_unique",
            Flag::EmmUnique => "emm_unique",
        }
    }
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `(flag, true)` means exists (or unique), `(flag, false)` does not exist.
type Fact = (Flag, bool);

fn fact_name((flag, value): Fact) -> String {
    match (flag, value) {
        (Flag::ElmmUnique | Flag::EmmUnique, _) => format!("{flag}=yes"),
        (_, true) => format!("{flag}=exists"),
        (_, false) => format!("{flag}=not_exists"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Taxonomy {
    pub nupbr: Status,
    pub nflvr: Status,
    pub nra: Status,
    pub nga: Status,
}

/// One derivation of a conclusion.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Provenance {
    pub conclusion: String,
    pub rule: String,
    pub condition_ids: Vec<ConditionId>,
    /// Lowest grade among the reports the derivation used.
    pub grade: Mode,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarketVerdict {
    pub slmd: Existence,
    pub smd: Existence,
    pub elmm: Existence,
    pub emm: Existence,
    pub elmm_unique: Uniqueness,
    pub emm_unique: Uniqueness,
    pub taxonomy: Taxonomy,
    pub bubble: Bubble,
    pub provenance: Vec<Provenance>,
    pub notes: Vec<String>,
}

impl MarketVerdict {
    pub fn existence(&self, flag: Flag) -> Existence {
        match flag {
            Flag::Slmd => self.slmd,
            Flag::Smd => self.smd,
            Flag::Elmm => self.elmm,
            Flag::Emm => self.emm,
            Flag::ElmmUnique => uniq_as_existence(self.elmm_unique),
            Flag::EmmUnique => uniq_as_existence(self.emm_unique),
        }
    }

    /// Best grade among the derivations of the flag's current value.
    pub fn grade(&self, flag: Flag) -> Option<Mode> {
        let want = match self.existence(flag) {
            Existence::Exists => fact_name((flag, true)),
            Existence::NotExists => fact_name((flag, false)),
            Existence::Unknown => return None,
        };
        self.provenance.iter().filter(|p| p.conclusion == want).map(|p| p.grade).max()
    }
}

fn uniq_as_existence(u: Uniqueness) -> Existence {
    match u {
        Uniqueness::Yes => Existence::Exists,
        Uniqueness::Unknown => Existence::Unknown,
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("contradiction on {flag}: exists by [{}] but not-exists by [{}]", exists_rules.join(", "), not_exists_rules.join(", "))]
pub struct ContradictionError {
    pub flag: Flag,
    pub exists_rules: Vec<String>,
    pub not_exists_rules: Vec<String>,
}

/// Market dimensions the rule guards look at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub d: usize,
    pub m: usize,
}

impl Dims {
    pub fn of(model: &MarketModel) -> Self {
        Dims { d: model.d, m: model.m }
    }

    fn square(self) -> bool {
        self.d == self.m
    }
}

use ConditionId as C;
use Verdict::{Fails as F, Holds as H};

const LOCAL_GROWTH: &[(C, Verdict)] = &[(C::El1, H), (C::El3, H), (C::Mckean, H)];
const ASSET_GROWTH: &[(C, Verdict)] = &[(C::E1, H), (C::E3, H)];
const REGULAR: &[(C, Verdict)] = &[(C::U1, H), (C::U2, H), (C::Holder1d, H)];

struct Rule {
    name: &'static str,
    /// All groups must be met; a group is met by any one of its entries.
    premises: &'static [&'static [(C, Verdict)]],
    guard: fn(Dims) -> bool,
    conclusions: &'static [Fact],
}

fn always(_: Dims) -> bool {
    true
}
fn square(d: Dims) -> bool {
    d.square()
}
fn square_low(d: Dims) -> bool {
    d.square() && d.d <= 2
}
fn square_high(d: Dims) -> bool {
    d.square() && d.d >= 3
}
fn scalar(d: Dims) -> bool {
    d.d == 1 && d.m == 1
}

const RULES: &[Rule] = &[
    Rule {
        name: "good price of risk gives a strict local martingale density",
        premises: &[&[(C::Slmd, H)]],
        guard: always,
        conclusions: &[(Flag::Slmd, true)],
    },
    Rule {
        name: "no price of risk in a complete market",
        premises: &[&[(C::Slmd, F)]],
        guard: square,
        conclusions: &[(Flag::Slmd, false)],
    },
    Rule {
        name: "non-explosion gives a local martingale measure",
        premises: &[&[(C::Slmd, H)], LOCAL_GROWTH],
        guard: always,
        conclusions: &[(Flag::Elmm, true)],
    },
    Rule {
        name: "asset non-explosion with growth cap gives a strict martingale density",
        premises: &[&[(C::Slmd, H)], &[(C::GrowthCap, H)], ASSET_GROWTH],
        guard: always,
        conclusions: &[(Flag::Smd, true)],
    },
    Rule {
        name: "both non-explosion groups give a martingale measure",
        premises: &[&[(C::Slmd, H)], LOCAL_GROWTH, &[(C::GrowthCap, H)], ASSET_GROWTH],
        guard: always,
        conclusions: &[(Flag::Emm, true)],
    },
    Rule {
        name: "well-posed martingale problem makes the local martingale measure unique",
        premises: &[&[(C::Slmd, H)], LOCAL_GROWTH, REGULAR],
        guard: square,
        conclusions: &[(Flag::ElmmUnique, true)],
    },
    Rule {
        name: "well-posed martingale problem makes the martingale measure unique",
        premises: &[&[(C::Slmd, H)], LOCAL_GROWTH, &[(C::GrowthCap, H)], ASSET_GROWTH, REGULAR],
        guard: square,
        conclusions: &[(Flag::EmmUnique, true)],
    },
    Rule {
        name: "explosion under the candidate measure rules out a local martingale measure",
        premises: &[&[(C::Nl1, H)]],
        guard: square,
        conclusions: &[(Flag::Elmm, false)],
    },
    Rule {
        name: "asset explosion rules out a strict martingale density",
        premises: &[&[(C::N1, H)]],
        guard: square,
        conclusions: &[(Flag::Smd, false)],
    },
    Rule {
        name: "radial market in dimension at most two",
        premises: &[&[(C::RadialShape, H)]],
        guard: square_low,
        conclusions: &[(Flag::Elmm, true), (Flag::ElmmUnique, true)],
    },
    Rule {
        name: "radial market with slow growth",
        premises: &[&[(C::RadialShape, H)], &[(C::RadialExistence, H)]],
        guard: square_high,
        conclusions: &[(Flag::Elmm, true)],
    },
    Rule {
        name: "radial market with slow growth and continuous f",
        premises: &[&[(C::RadialShape, H)], &[(C::RadialExistence, H)], &[(C::U1, H)]],
        guard: square_high,
        conclusions: &[(Flag::ElmmUnique, true)],
    },
    Rule {
        name: "radial market with fast growth",
        premises: &[&[(C::RadialShape, H)], &[(C::RadialNonexistence, H)]],
        guard: square_high,
        conclusions: &[(Flag::Elmm, false)],
    },
    Rule {
        name: "one-dimensional radial market without explosion",
        premises: &[&[(C::RadialShape, H)], &[(C::Emm1d, H)]],
        guard: scalar,
        conclusions: &[(Flag::Emm, true), (Flag::Smd, true), (Flag::EmmUnique, true)],
    },
    Rule {
        name: "one-dimensional radial market with explosion",
        premises: &[&[(C::RadialShape, H)], &[(C::Emm1d, F)]],
        guard: scalar,
        conclusions: &[(Flag::Emm, false), (Flag::Smd, false)],
    },
    Rule {
        name: "homogeneous model: integrable price of risk",
        premises: &[&[(C::MuSlmd, H)]],
        guard: always,
        conclusions: &[(Flag::Slmd, true)],
    },
    Rule {
        name: "homogeneous model: non-integrable price of risk",
        premises: &[&[(C::MuSlmd, F)]],
        guard: always,
        conclusions: &[(Flag::Slmd, false)],
    },
    Rule {
        name: "homogeneous model: boundary at zero not reached",
        premises: &[&[(C::MuElmm, H)]],
        guard: always,
        conclusions: &[(Flag::Elmm, true)],
    },
    Rule {
        name: "homogeneous model: boundary at zero reached",
        premises: &[&[(C::MuElmm, F)]],
        guard: always,
        conclusions: &[(Flag::Elmm, false)],
    },
    Rule {
        name: "homogeneous model: infinity not reached",
        premises: &[&[(C::MuEmm, H)]],
        guard: always,
        conclusions: &[(Flag::Emm, true)],
    },
    Rule {
        name: "homogeneous model: infinity reached",
        premises: &[&[(C::MuEmm, F)]],
        guard: always,
        conclusions: &[(Flag::Emm, false)],
    },
    Rule {
        name: "simulated martingale defect under the candidate measure",
        premises: &[&[(C::SimulatedDefect, H)]],
        guard: square,
        conclusions: &[(Flag::Elmm, false)],
    },
    Rule {
        name: "simulated asset defect under the candidate density",
        premises: &[&[(C::SimulatedAssetDefect, H)]],
        guard: square,
        conclusions: &[(Flag::Smd, false)],
    },
];

/// `(from, to, name)`: `from` implies `to`.
const IMPLICATIONS: &[(Fact, Fact, &str)] = &[
    ((Flag::Emm, true), (Flag::Elmm, true), "a martingale measure is a local martingale measure"),
    ((Flag::Emm, true), (Flag::Smd, true), "a martingale measure gives a strict martingale density"),
    ((Flag::Elmm, true), (Flag::Slmd, true), "a local martingale measure gives a strict local martingale density"),
    ((Flag::Smd, true), (Flag::Slmd, true), "a strict martingale density is a strict local martingale density"),
    ((Flag::Slmd, false), (Flag::Smd, false), "no strict local martingale density"),
    ((Flag::Slmd, false), (Flag::Elmm, false), "no strict local martingale density"),
    ((Flag::Elmm, false), (Flag::Emm, false), "no local martingale measure"),
    ((Flag::Smd, false), (Flag::Emm, false), "no strict martingale density"),
];

/// Best grade among reports with `id` and `verdict`, if any.
fn premise_grade(index: &BTreeMap<(ConditionId, u8), Mode>, id: ConditionId, verdict: Verdict) -> Option<Mode> {
    index.get(&(id, verdict_key(verdict))).copied()
}

fn verdict_key(v: Verdict) -> u8 {
    match v {
        Verdict::Holds => 0,
        Verdict::Fails => 1,
        Verdict::Inconclusive => 2,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Derivation {
    rule: String,
    ids: BTreeSet<ConditionId>,
    grade: Mode,
}

/// Applies the rule table and the implication closure. The result depends
/// only on the multiset of reports.
pub fn classify(reports: &[ConditionReport], dims: Dims) -> Result<MarketVerdict, ContradictionError> {
    let mut index: BTreeMap<(ConditionId, u8), Mode> = BTreeMap::new();
    for r in reports {
        let e = index.entry((r.condition_id, verdict_key(r.verdict))).or_insert(r.mode);
        *e = (*e).max(r.mode);
    }
    let mut facts: BTreeMap<Fact, BTreeSet<Derivation>> = BTreeMap::new();
    for rule in RULES {
        if !(rule.guard)(dims) {
            continue;
        }
        let mut ids = BTreeSet::new();
        let mut grade = Mode::Certificate;
        let mut met = true;
        for group in rule.premises {
            let best = group
                .iter()
                .filter_map(|&(id, v)| premise_grade(&index, id, v).map(|g| (g, id)))
                .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
            match best {
                Some((g, id)) => {
                    ids.insert(id);
                    grade = grade.min(g);
                }
                None => {
                    met = false;
                    break;
                }
            }
        }
        if met {
            for &fact in rule.conclusions {
                facts.entry(fact).or_default().insert(Derivation {
                    rule: rule.name.to_string(),
                    ids: ids.clone(),
                    grade,
                });
            }
        }
    }
    loop {
        let mut added = false;
        for &(from, to, name) in IMPLICATIONS {
            let Some(src) = facts.get(&from) else { continue };
            let best = src.iter().max_by(|a, b| a.grade.cmp(&b.grade).then(b.cmp(a))).expect("non-empty").clone();
            let d = Derivation {
                rule: format!("closure: {name}"),
                ids: best.ids,
                grade: best.grade,
            };
            if facts.entry(to).or_default().insert(d) {
                added = true;
            }
        }
        if !added {
            break;
        }
    }
    for flag in [Flag::Slmd, Flag::Smd, Flag::Elmm, Flag::Emm] {
        if let (Some(yes), Some(no)) = (facts.get(&(flag, true)), facts.get(&(flag, false))) {
            let names = |s: &BTreeSet<Derivation>| {
                let mut v: Vec<String> = s.iter().map(|d| d.rule.clone()).collect();
                v.dedup();
                v
            };
            return Err(ContradictionError {
                flag,
                exists_rules: names(yes),
                not_exists_rules: names(no),
            });
        }
    }
    let existence = |flag: Flag| {
        if facts.contains_key(&(flag, true)) {
            Existence::Exists
        } else if facts.contains_key(&(flag, false)) {
            Existence::NotExists
        } else {
            Existence::Unknown
        }
    };
    let uniqueness = |flag: Flag| {
        if facts.contains_key(&(flag, true)) {
            Uniqueness::Yes
        } else {
            Uniqueness::Unknown
        }
    };
    let (slmd, smd, elmm, emm) = (existence(Flag::Slmd), existence(Flag::Smd), existence(Flag::Elmm), existence(Flag::Emm));
    let status = |e: Existence| match e {
        Existence::Exists => Status::Holds,
        Existence::NotExists => Status::Fails,
        Existence::Unknown => Status::Unknown,
    };
    let taxonomy = Taxonomy {
        nupbr: status(slmd),
        nflvr: status(elmm),
        nra: if dims.square() { status(smd) } else { Status::Unknown },
        nga: status(emm),
    };
    let bubble = match (elmm, emm) {
        (Existence::Exists, Existence::NotExists) => Bubble::Yes,
        (_, Existence::Exists) | (Existence::NotExists, _) => Bubble::No,
        _ => Bubble::Unknown,
    };
    let mut provenance: Vec<Provenance> = facts
        .iter()
        .flat_map(|(&fact, ds)| {
            ds.iter().map(move |d| Provenance {
                conclusion: fact_name(fact),
                rule: d.rule.clone(),
                condition_ids: d.ids.iter().copied().collect(),
                grade: d.grade,
            })
        })
        .collect();
    provenance.sort();
    let mut notes = Vec::new();
    let failed = |id| index.contains_key(&(id, verdict_key(Verdict::Fails)));
    if failed(C::U1) && failed(C::U2) {
        notes.push(
            "the martingale problem may have several solutions; existence flags refer to the constructed candidates".into(),
        );
    }
    Ok(MarketVerdict {
        slmd,
        smd,
        elmm,
        emm,
        elmm_unique: if elmm == Existence::Exists { uniqueness(Flag::ElmmUnique) } else { Uniqueness::Unknown },
        emm_unique: if emm == Existence::Exists { uniqueness(Flag::EmmUnique) } else { Uniqueness::Unknown },
        taxonomy,
        bubble,
        provenance,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::Evidence;

    fn rep(id: ConditionId, verdict: Verdict) -> ConditionReport {
        ConditionReport {
            condition_id: id,
            verdict,
            mode: Mode::Certificate,
            evidence: Evidence::default(),
            notes: vec![],
        }
    }

    const SQ1: Dims = Dims { d: 1, m: 1 };
    const SQ3: Dims = Dims { d: 3, m: 3 };

    #[test]
    fn empty_is_unknown() {
        let v = classify(&[], SQ1).unwrap();
        assert_eq!([v.slmd, v.smd, v.elmm, v.emm], [Existence::Unknown; 4]);
        assert_eq!(v.bubble, Bubble::Unknown);
        assert!(v.provenance.is_empty());
    }

    #[test]
    fn local_growth_gives_elmm() {
        let v = classify(&[rep(C::Slmd, H), rep(C::El3, H)], SQ3).unwrap();
        assert_eq!(v.elmm, Existence::Exists);
        assert_eq!(v.taxonomy.nflvr, Status::Holds);
        assert_eq!(v.taxonomy.nupbr, Status::Holds);
        assert_eq!(v.emm, Existence::Unknown);
        let alone = classify(&[rep(C::El3, H)], SQ3).unwrap();
        assert_eq!(alone.elmm, Existence::Unknown);
    }

    #[test]
    fn both_groups_give_emm() {
        let v = classify(&[rep(C::Slmd, H), rep(C::El3, H), rep(C::E3, H), rep(C::GrowthCap, H)], SQ3).unwrap();
        assert_eq!(v.emm, Existence::Exists);
        assert_eq!(v.smd, Existence::Exists);
        assert_eq!(v.taxonomy.nga, Status::Holds);
        assert_eq!(v.bubble, Bubble::No);
    }

    #[test]
    fn explosion_without_elmm() {
        let v = classify(&[rep(C::Slmd, H), rep(C::Nl1, H)], SQ3).unwrap();
        assert_eq!(v.slmd, Existence::Exists);
        assert_eq!(v.elmm, Existence::NotExists);
        assert_eq!(v.emm, Existence::NotExists);
        assert_eq!(v.taxonomy.nflvr, Status::Fails);
        assert_eq!(v.taxonomy.nupbr, Status::Holds);
    }

    #[test]
    fn bubble_from_asset_explosion() {
        let v = classify(&[rep(C::Slmd, H), rep(C::El3, H), rep(C::N1, H)], SQ1).unwrap();
        assert_eq!(v.elmm, Existence::Exists);
        assert_eq!(v.smd, Existence::NotExists);
        assert_eq!(v.emm, Existence::NotExists);
        assert_eq!(v.bubble, Bubble::Yes);
        assert_eq!(v.taxonomy.nra, Status::Fails);
    }

    #[test]
    fn nra_needs_a_complete_market() {
        let v = classify(&[rep(C::Slmd, H), rep(C::El3, H), rep(C::E3, H), rep(C::GrowthCap, H)], Dims { d: 3, m: 2 }).unwrap();
        assert_eq!(v.smd, Existence::Exists);
        assert_eq!(v.taxonomy.nra, Status::Unknown);
    }

    #[test]
    fn contradiction_names_rules() {
        let err = classify(&[rep(C::Slmd, H), rep(C::El3, H), rep(C::Nl1, H)], SQ3).unwrap_err();
        assert_eq!(err.flag, Flag::Elmm);
        assert!(err.exists_rules.iter().any(|r| r.contains("non-explosion")));
        assert!(err.not_exists_rules.iter().any(|r| r.contains("explosion under")));
    }

    #[test]
    fn grades_take_the_weakest_input() {
        let mut weak = rep(C::El3, H);
        weak.mode = Mode::Evidence;
        let v = classify(&[rep(C::Slmd, H), weak], SQ3).unwrap();
        assert_eq!(v.grade(Flag::Elmm), Some(Mode::Evidence));
        assert_eq!(v.grade(Flag::Slmd), Some(Mode::Certificate));
    }

    #[test]
    fn radial_rules() {
        let low = classify(&[rep(C::RadialShape, H)], Dims { d: 2, m: 2 }).unwrap();
        assert_eq!(low.elmm, Existence::Exists);
        assert_eq!(low.elmm_unique, Uniqueness::Yes);
        let high = classify(&[rep(C::Slmd, H), rep(C::RadialShape, H), rep(C::RadialNonexistence, H)], SQ3).unwrap();
        assert_eq!(high.elmm, Existence::NotExists);
        let scalar = classify(&[rep(C::RadialShape, H), rep(C::Emm1d, F)], SQ1).unwrap();
        assert_eq!((scalar.elmm, scalar.emm, scalar.bubble), (Existence::Exists, Existence::NotExists, Bubble::Yes));
    }

    #[test]
    fn order_does_not_matter() {
        let mut rs = vec![rep(C::Slmd, H), rep(C::El3, H), rep(C::E3, H), rep(C::GrowthCap, H), rep(C::U1, H)];
        let a = classify(&rs, SQ3).unwrap();
        rs.reverse();
        assert_eq!(classify(&rs, SQ3).unwrap(), a);
    }
}
