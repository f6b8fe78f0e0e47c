//! Finite relational models and the threshold-based splitting rank.
//!
//! A model is a finite universe `{0, .., size-1}` with finitely many
//! relations; every relation holds only on strictly increasing tuples,
//! so a relation is really a family of sets read off through their
//! increasing enumerations. The rank of a nonempty finite set measures
//! how substitutable its elements are: stage zero demands at least
//! `theta` substitutes at every position of every holding relation, and
//! each further stage demands a fresh element that keeps the relation
//! and the previous stage. "Uncountable" from the infinitary setting is
//! rendered as the threshold `theta`; this is the one deliberate
//! desk-scale replacement in the whole module.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Report;

pub type Elem = u32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("empty set has no rank")]
    EmptySet,
    #[error("element {0} outside the universe of size {1}")]
    OutsideUniverse(Elem, u32),
    #[error("no rank witness: {0}")]
    NoWitness(String),
    #[error("invalid model: {0}")]
    Invalid(String),
}

/// One relation: an index `zeta`, an arity, and the set of holding
/// tuples, each strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub zeta: u32,
    pub arity: usize,
    pub tuples: BTreeSet<Vec<Elem>>,
}

/// A finite relational model with the largeness threshold `theta`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteModel {
    pub size: u32,
    pub theta: usize,
    pub relations: Vec<Relation>,
}

impl FiniteModel {
    pub fn new(size: u32, theta: usize, relations: Vec<Relation>) -> Self {
        FiniteModel {
            size,
            theta,
            relations,
        }
    }

    /// Checks the increasing-tuple discipline and arity consistency.
    pub fn validate(&self) -> Report {
        let mut report = Report::new();
        if self.theta < 2 {
            report.fail("model.theta", format!("theta = {} below 2", self.theta));
        } else {
            report.pass("model.theta");
        }
        let mut seen = BTreeSet::new();
        for rel in &self.relations {
            let id = format!("model.relation[{},{}]", rel.arity, rel.zeta);
            if !seen.insert((rel.arity, rel.zeta)) {
                report.fail(&id, "duplicate (arity, zeta) pair");
                continue;
            }
            let mut ok = true;
            for t in &rel.tuples {
                if t.len() != rel.arity {
                    report.fail(&id, format!("tuple {t:?} has wrong arity"));
                    ok = false;
                    break;
                }
                if t.windows(2).any(|w| w[0] >= w[1]) {
                    report.fail(&id, format!("tuple {t:?} is not strictly increasing"));
                    ok = false;
                    break;
                }
                if t.iter().any(|&b| b >= self.size) {
                    report.fail(&id, format!("tuple {t:?} leaves the universe"));
                    ok = false;
                    break;
                }
            }
            if ok {
                report.pass(&id);
            }
        }
        report
    }

    fn holds(&self, rel: &Relation, tuple: &[Elem]) -> bool {
        rel.tuples.contains(tuple)
    }

    /// Relations of the given arity, in (zeta) order.
    fn relations_of_arity(&self, arity: usize) -> impl Iterator<Item = &Relation> {
        self.relations.iter().filter(move |r| r.arity == arity)
    }
}

/// A rank value: `-1`, a finite stage, or the distinguished infinity
/// marker. No arithmetic is defined on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rank {
    MinusOne,
    Finite(u32),
    Infinite,
}

impl Rank {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Rank::Infinite)
    }

    pub fn at_least(&self, stage: u32) -> bool {
        match self {
            Rank::MinusOne => false,
            Rank::Finite(k) => *k >= stage,
            Rank::Infinite => true,
        }
    }
}

impl Ord for Rank {
    fn cmp(&self, other: &Self) -> Ordering {
        use Rank::*;
        match (self, other) {
            (MinusOne, MinusOne) | (Infinite, Infinite) => Ordering::Equal,
            (MinusOne, _) => Ordering::Less,
            (_, MinusOne) => Ordering::Greater,
            (Infinite, _) => Ordering::Greater,
            (_, Infinite) => Ordering::Less,
            (Finite(a), Finite(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for Rank {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rank::MinusOne => f.write_str("-1"),
            Rank::Finite(k) => write!(f, "{k}"),
            Rank::Infinite => f.write_str("infinity"),
        }
    }
}

/// The `(zeta, k)` pair certifying the rank of `v`, together with the
/// rank it certifies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankWitness {
    pub v: Vec<Elem>,
    pub rank: Rank,
    pub zeta: u32,
    pub k: usize,
}

/// One rank evaluation context: a model reference plus the memo table.
/// Distinct contexts are independent; a context is single-threaded.
pub struct RankEval<'a> {
    model: &'a FiniteModel,
    memo: BTreeMap<Vec<Elem>, Rank>,
}

impl<'a> RankEval<'a> {
    pub fn new(model: &'a FiniteModel) -> Self {
        RankEval {
            model,
            memo: BTreeMap::new(),
        }
    }

    pub fn model(&self) -> &FiniteModel {
        self.model
    }

    /// The splitting rank of a nonempty set within the universe.
    pub fn rank(&mut self, w: &BTreeSet<Elem>) -> Result<Rank, ModelError> {
        if w.is_empty() {
            return Err(ModelError::EmptySet);
        }
        for &a in w {
            if a >= self.model.size {
                return Err(ModelError::OutsideUniverse(a, self.model.size));
            }
        }
        Ok(self.rank_inner(&w.iter().copied().collect::<Vec<_>>()))
    }

    fn rank_inner(&mut self, sorted: &[Elem]) -> Rank {
        if let Some(r) = self.memo.get(sorted) {
            return *r;
        }
        let r = self.compute(sorted);
        self.memo.insert(sorted.to_vec(), r);
        r
    }

    /// Substitutes for position `k` of the holding tuple: all universe
    /// elements whose substitution still satisfies the relation. The
    /// increasing-tuple discipline of the relation keeps order implicit.
    fn substitutes(&self, rel: &Relation, tuple: &[Elem], k: usize) -> Vec<Elem> {
        let mut out = Vec::new();
        let mut probe = tuple.to_vec();
        for a in 0..self.model.size {
            probe[k] = a;
            if self.model.holds(rel, &probe) {
                out.push(a);
            }
        }
        out
    }

    fn compute(&mut self, sorted: &[Elem]) -> Rank {
        let n = sorted.len();
        let holding: Vec<&Relation> = self
            .model
            .relations_of_arity(n)
            .filter(|rel| self.model.holds(rel, sorted))
            .collect();
        if holding.is_empty() {
            // every demand quantifies over holding relations
            return Rank::Infinite;
        }
        // stage 0
        for rel in &holding {
            for k in 0..n {
                if self.substitutes(rel, sorted, k).len() < self.model.theta {
                    return Rank::MinusOne;
                }
            }
        }
        // successor stages: the rank is the least over holding (zeta, k)
        // of one more than the best extension rank at that slot
        let holding: Vec<Relation> = holding.into_iter().cloned().collect();
        let mut overall = Rank::Infinite;
        for rel in &holding {
            for k in 0..n {
                let mut best: Option<Rank> = None;
                for a in self.substitutes(rel, sorted, k) {
                    if sorted.binary_search(&a).is_ok() {
                        continue; // the fresh element must leave the set
                    }
                    let mut bigger = sorted.to_vec();
                    let pos = bigger.binary_search(&a).unwrap_err();
                    bigger.insert(pos, a);
                    let r = self.rank_inner(&bigger);
                    best = Some(best.map_or(r, |b| b.max(r)));
                }
                let slot = match best {
                    None => Rank::Finite(0),
                    Some(Rank::Infinite) => Rank::Infinite,
                    Some(Rank::Finite(k)) => Rank::Finite(k + 1),
                    Some(Rank::MinusOne) => Rank::Finite(0),
                };
                overall = overall.min(slot);
            }
        }
        overall
    }

    /// The deterministic least `(zeta, k)` witnessing the computed rank:
    /// for rank `-1` a position with fewer than `theta` substitutes, for
    /// a finite rank a position where no fresh element keeps both the
    /// relation and the rank. Rank-infinite sets have no witness.
    pub fn witness(&mut self, v: &BTreeSet<Elem>) -> Result<RankWitness, ModelError> {
        let rank = self.rank(v)?;
        let sorted: Vec<Elem> = v.iter().copied().collect();
        let n = sorted.len();
        let mut candidates: Vec<(u32, usize)> = Vec::new();
        match rank {
            Rank::Infinite => {
                return Err(ModelError::NoWitness(format!(
                    "rank of {sorted:?} is the infinity marker"
                )))
            }
            Rank::MinusOne => {
                for rel in self.model.relations_of_arity(n) {
                    if !self.model.holds(rel, &sorted) {
                        continue;
                    }
                    for k in 0..n {
                        if self.substitutes(rel, &sorted, k).len() < self.model.theta {
                            candidates.push((rel.zeta, k));
                        }
                    }
                }
            }
            Rank::Finite(stage) => {
                let rels: Vec<Relation> = self
                    .model
                    .relations_of_arity(n)
                    .filter(|rel| self.model.holds(rel, &sorted))
                    .cloned()
                    .collect();
                for rel in &rels {
                    for k in 0..n {
                        let mut blocked = true;
                        for a in self.substitutes(rel, &sorted, k) {
                            if sorted.binary_search(&a).is_ok() {
                                continue;
                            }
                            let mut bigger = sorted.clone();
                            let pos = bigger.binary_search(&a).unwrap_err();
                            bigger.insert(pos, a);
                            if self.rank_inner(&bigger).at_least(stage) {
                                blocked = false;
                                break;
                            }
                        }
                        if blocked {
                            candidates.push((rel.zeta, k));
                        }
                    }
                }
            }
        }
        candidates.sort();
        match candidates.first() {
            Some(&(zeta, k)) => Ok(RankWitness {
                v: sorted,
                rank,
                zeta,
                k,
            }),
            None => Err(ModelError::NoWitness(format!(
                "no (zeta, k) certifies rank {rank} of {sorted:?}"
            ))),
        }
    }
}

/// Convenience wrapper: rank in a fresh evaluation context.
pub fn rank(w: &BTreeSet<Elem>, model: &FiniteModel) -> Result<Rank, ModelError> {
    RankEval::new(model).rank(w)
}

/// Convenience wrapper: witness in a fresh evaluation context.
pub fn witness(v: &BTreeSet<Elem>, model: &FiniteModel) -> Result<RankWitness, ModelError> {
    RankEval::new(model).witness(v)
}

/// Re-checks a witness by direct enumeration, independently of the
/// search that produced it.
pub fn verify_witness(w: &RankWitness, model: &FiniteModel) -> bool {
    let rel = match model
        .relations
        .iter()
        .find(|r| r.arity == w.v.len() && r.zeta == w.zeta)
    {
        Some(r) => r,
        None => return false,
    };
    if !rel.tuples.contains(&w.v) {
        return false;
    }
    let substitutes = |k: usize| -> Vec<Elem> {
        let mut probe = w.v.clone();
        (0..model.size)
            .filter(|&a| {
                probe[k] = a;
                rel.tuples.contains(&probe)
            })
            .collect()
    };
    match w.rank {
        Rank::Infinite => false,
        Rank::MinusOne => substitutes(w.k).len() < model.theta,
        Rank::Finite(stage) => {
            let mut eval = RankEval::new(model);
            for a in substitutes(w.k) {
                if w.v.binary_search(&a).is_ok() {
                    continue;
                }
                let mut bigger: BTreeSet<Elem> = w.v.iter().copied().collect();
                bigger.insert(a);
                if eval
                    .rank(&bigger)
                    .map(|r| r.at_least(stage))
                    .unwrap_or(false)
                {
                    return false;
                }
            }
            true
        }
    }
}

/// The model bundled for tests and the stress campaigns. The universe
/// splits into `windows` contiguous windows of `window` elements each;
/// for every arity up to `window` one relation holds on exactly the
/// increasing tuples drawn from a single window. Two consequences shape
/// everything downstream: sets spanning windows satisfy no relation (so
/// their rank is the infinity marker), and shifting a set by a whole
/// number of windows preserves all rank data, which is what makes
/// order-isomorphic relabelings across windows rank-invariant. Ranks
/// inside a window are genuinely mixed: minus one through small finite
/// stages. The model is synthetic and makes no claim beyond these
/// properties.
pub fn bundled_model() -> FiniteModel {
    windowed_model(8, 8, 2)
}

/// See [`bundled_model`]; the window width, window count, and threshold
/// are parameters here.
pub fn windowed_model(window: u32, windows: u32, theta: usize) -> FiniteModel {
    let size = window * windows;
    let mut relations = Vec::new();
    for arity in 1..=window as usize {
        let mut tuples = BTreeSet::new();
        for w in 0..windows {
            let base = w * window;
            let offsets: Vec<u32> = (0..window).collect();
            let mut stack: Vec<(usize, Vec<Elem>)> = vec![(0, Vec::new())];
            while let Some((start, chosen)) = stack.pop() {
                if chosen.len() == arity {
                    tuples.insert(chosen);
                    continue;
                }
                for (idx, &o) in offsets.iter().enumerate().skip(start) {
                    let mut next = chosen.clone();
                    next.push(base + o);
                    stack.push((idx + 1, next));
                }
            }
        }
        relations.push(Relation {
            zeta: 0,
            arity,
            tuples,
        });
    }
    FiniteModel::new(size, theta, relations)
}
