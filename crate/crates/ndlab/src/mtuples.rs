//! Level tuples over a finite tree family: validation, the translation
//! action, the strict-extension order, restriction, bounded catalog
//! enumeration, derivative chains, and the non-disjointness rank.
//!
//! A tuple records, for a level set `u` and every ordered pair of its
//! nodes, which tree each translated base element lives in (`h`) and
//! which base element witnesses it (`g`). Ranks here are finite-depth
//! shadows: the level strictly increases along the extension order and
//! is bounded by the catalog depth, so every rank is a natural number.
//! All enumeration is relative to the catalog bounds; that scope is part
//! of the operation's meaning, not an approximation it hides.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::bases::{base_member, base_prec, FiniteTree, IStar, IndexedBase};
use crate::gf2::{BitWord, Gf2Error, WordSet};
use crate::{Budget, BudgetExceeded, Report};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MError {
    #[error("gf2: {0}")]
    Gf2(#[from] Gf2Error),
    #[error("{0}")]
    Budget(#[from] BudgetExceeded),
    #[error("pair ({0}, {1}) missing from the tuple")]
    MissingPair(BitWord, BitWord),
    #[error("restriction target is not a small-enough subset: {0}")]
    BadRestriction(String),
    #[error("invalid tuple: {0}")]
    Invalid(String),
    #[error("tuple not in the bounded catalog: {0}")]
    NotInCatalog(String),
}

fn canon_pair(a: &BitWord, b: &BitWord) -> (BitWord, BitWord) {
    if a <= b {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    }
}

/// The tuple `(ell, iota, u, h, g)`: `h[i]` and `g[i]` are symmetric
/// maps on ordered pairs of distinct nodes of `u`, stored once per
/// unordered pair under the lexicographically sorted key.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct MTuple {
    ell: usize,
    iota: usize,
    u: WordSet,
    h: Vec<BTreeMap<(BitWord, BitWord), usize>>,
    g: Vec<BTreeMap<(BitWord, BitWord), WordSet>>,
}

impl MTuple {
    /// Assembles a tuple, checking structural coherence: lengths, full
    /// pair coverage, and map shapes. Catalog-level validity is a
    /// separate, report-style question.
    pub fn new(
        ell: usize,
        iota: usize,
        u: WordSet,
        h: Vec<BTreeMap<(BitWord, BitWord), usize>>,
        g: Vec<BTreeMap<(BitWord, BitWord), WordSet>>,
    ) -> Result<Self, MError> {
        if u.len() != ell {
            return Err(MError::Invalid(format!(
                "u has length {} but ell = {ell}",
                u.len()
            )));
        }
        if h.len() != iota || g.len() != iota {
            return Err(MError::Invalid(format!(
                "expected {iota} h- and g-maps, got {} and {}",
                h.len(),
                g.len()
            )));
        }
        let pairs = unordered_pairs(&u);
        for i in 0..iota {
            for key in pairs.iter() {
                if !h[i].contains_key(key) {
                    return Err(MError::MissingPair(key.0.clone(), key.1.clone()));
                }
                match g[i].get(key) {
                    None => return Err(MError::MissingPair(key.0.clone(), key.1.clone())),
                    Some(set) if set.len() != ell => {
                        return Err(MError::Invalid(format!(
                            "g[{i}] at ({}, {}) has length {}",
                            key.0,
                            key.1,
                            set.len()
                        )))
                    }
                    _ => {}
                }
            }
            if h[i].len() != pairs.len() || g[i].len() != pairs.len() {
                return Err(MError::Invalid(format!(
                    "slice {i} carries keys outside the node pairs of u"
                )));
            }
        }
        Ok(MTuple { ell, iota, u, h, g })
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn iota(&self) -> usize {
        self.iota
    }

    pub fn u(&self) -> &WordSet {
        &self.u
    }

    pub fn h_at(&self, i: usize, a: &BitWord, b: &BitWord) -> Option<usize> {
        self.h[i].get(&canon_pair(a, b)).copied()
    }

    pub fn g_at(&self, i: usize, a: &BitWord, b: &BitWord) -> Option<&WordSet> {
        self.g[i].get(&canon_pair(a, b))
    }

    pub fn pair_keys(&self) -> Vec<(BitWord, BitWord)> {
        unordered_pairs(&self.u)
    }
}

fn unordered_pairs(u: &WordSet) -> Vec<(BitWord, BitWord)> {
    let nodes: Vec<&BitWord> = u.iter().collect();
    let mut out = Vec::new();
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            out.push((nodes[i].clone(), nodes[j].clone()));
        }
    }
    out
}

/// Search limits for catalog enumeration and the rank recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CatalogBounds {
    /// Largest admitted node-set size.
    pub max_u: usize,
    /// Largest admitted base-element size per pair and index.
    pub max_g: usize,
    /// Largest admitted `iota` when the index bound is omega.
    pub max_iota: usize,
}

impl Default for CatalogBounds {
    fn default() -> Self {
        CatalogBounds {
            max_u: 6,
            max_g: 4,
            max_iota: 8,
        }
    }
}

/// A finite catalog: the tree family, its common depth, the indexed
/// base, and the enumeration bounds.
#[derive(Debug, Clone)]
pub struct Catalog {
    pub trees: Vec<FiniteTree>,
    pub depth: usize,
    pub ib: IndexedBase,
    pub bounds: CatalogBounds,
}

impl Catalog {
    pub fn new(
        trees: Vec<FiniteTree>,
        depth: usize,
        ib: IndexedBase,
        bounds: CatalogBounds,
    ) -> Result<Self, MError> {
        for (m, t) in trees.iter().enumerate() {
            if t.depth() != depth {
                return Err(MError::Invalid(format!(
                    "tree {m} has depth {} in a catalog of depth {depth}",
                    t.depth()
                )));
            }
        }
        Ok(Catalog {
            trees,
            depth,
            ib,
            bounds,
        })
    }

    /// Admissible tuple iotas for this catalog.
    fn iotas(&self) -> Vec<usize> {
        match self.ib.istar() {
            IStar::Finite(k) => vec![k],
            IStar::Omega => (3..=self.bounds.max_iota).collect(),
        }
    }

    fn levels_at(&self, ell: usize) -> Vec<WordSet> {
        self.trees.iter().map(|t| t.level(ell).unwrap()).collect()
    }
}

/// Itemized validity of a tuple against a catalog: node-set shape, the
/// three per-pair map demands, tree membership of every translated
/// witness, and the depth and tree-range bounds of the finite catalog.
pub fn validate_mtuple(m: &MTuple, cat: &Catalog) -> Report {
    let mut report = Report::new();
    // (a) level and node-set shape, and the iota discipline
    let a_ok = m.ell() > 0 && m.u().size() >= 2;
    report.record(
        "mtuple.(a).shape",
        a_ok,
        format!("ell={} |u|={}", m.ell(), m.u().size()),
    );
    let iota_ok = match cat.ib.istar() {
        IStar::Finite(k) => m.iota() == k,
        IStar::Omega => (3..usize::MAX).contains(&m.iota()),
    };
    report.record(
        "mtuple.(a).iota",
        iota_ok,
        format!("iota={} against i*={}", m.iota(), cat.ib.istar()),
    );

    let mut b_bad = Vec::new();
    let mut c_bad = Vec::new();
    let mut e_bad = Vec::new();
    let mut range_bad = Vec::new();
    let levels = if m.ell() <= cat.depth {
        cat.levels_at(m.ell())
    } else {
        Vec::new()
    };
    for key in m.pair_keys() {
        for i in 0..m.iota() {
            let g = m.g_at(i, &key.0, &key.1).unwrap();
            let h = m.h_at(i, &key.0, &key.1).unwrap();
            // (b) base membership at the right level
            if !base_member(cat.ib.component(i), g) {
                b_bad.push(format!("g[{i}]({}, {}) not a base member", key.0, key.1));
            }
            // (c) disjointness across indices
            for i2 in i + 1..m.iota() {
                let g2 = m.g_at(i2, &key.0, &key.1).unwrap();
                if g.iter().any(|s| g2.contains(s)) {
                    c_bad.push(format!(
                        "g[{i}] and g[{i2}] overlap at ({}, {})",
                        key.0, key.1
                    ));
                }
            }
            // range bound of the finite catalog
            if h >= cat.trees.len() {
                range_bad.push(format!(
                    "h[{i}]({}, {}) = {h} outside the tree family",
                    key.0, key.1
                ));
                continue;
            }
            // (e) translated witnesses are tree nodes, on both sides
            if m.ell() <= cat.depth {
                for sigma in g.iter() {
                    for side in [&key.0, &key.1] {
                        let node = side.add(sigma).unwrap();
                        if !levels[h].contains(&node) {
                            e_bad.push(format!(
                                "{side} + {sigma} is not a node of tree {h} at level {}",
                                m.ell()
                            ));
                        }
                    }
                }
            }
        }
    }
    report.record(
        "mtuple.(b).base-membership",
        b_bad.is_empty(),
        b_bad.first().cloned().unwrap_or_default(),
    );
    report.record(
        "mtuple.(c).disjointness",
        c_bad.is_empty(),
        c_bad.first().cloned().unwrap_or_default(),
    );
    report.record(
        "mtuple.(e).tree-membership",
        e_bad.is_empty(),
        e_bad.first().cloned().unwrap_or_default(),
    );
    report.record(
        "mtuple.depth-bound",
        m.ell() <= cat.depth,
        format!("ell={} above depth {}", m.ell(), cat.depth),
    );
    report.record(
        "mtuple.tree-range",
        range_bad.is_empty(),
        range_bad.first().cloned().unwrap_or_default(),
    );
    report
}

/// The translation action `m + rho`. A longer `rho` is restricted to the
/// tuple's level first; a shorter one is rejected.
pub fn translate_m(m: &MTuple, rho: &BitWord) -> Result<MTuple, MError> {
    if rho.len() < m.ell() {
        return Err(MError::Gf2(Gf2Error::LengthMismatch {
            left: m.ell(),
            right: rho.len(),
        }));
    }
    let rho = rho.restrict(m.ell())?;
    let u = m.u().translate(&rho)?;
    let mut h = vec![BTreeMap::new(); m.iota()];
    let mut g = vec![BTreeMap::new(); m.iota()];
    for key in m.pair_keys() {
        let new_key = canon_pair(&key.0.add(&rho)?, &key.1.add(&rho)?);
        for i in 0..m.iota() {
            h[i].insert(new_key.clone(), m.h_at(i, &key.0, &key.1).unwrap());
            g[i].insert(
                new_key.clone(),
                m.g_at(i, &key.0, &key.1).unwrap().translate(&rho)?,
            );
        }
    }
    MTuple::new(m.ell(), m.iota(), u, h, g)
}

/// The strict extension order: the level grows, the index count does not
/// shrink, the node set restricts onto the old one, and on every pair
/// with distinct restrictions the witnesses refine while the tree
/// assignment is carried along unchanged.
pub fn extends(m: &MTuple, n: &MTuple, ib: &IndexedBase) -> bool {
    if m.ell() >= n.ell() || m.iota() > n.iota() {
        return false;
    }
    match n.u().restrict(m.ell()) {
        Ok(r) if r == *m.u() => {}
        _ => return false,
    }
    for key in n.pair_keys() {
        let a = key.0.restrict(m.ell()).unwrap();
        let b = key.1.restrict(m.ell()).unwrap();
        if a == b {
            continue;
        }
        for i in 0..m.iota() {
            let g_m = match m.g_at(i, &a, &b) {
                Some(g) => g,
                None => return false,
            };
            let g_n = n.g_at(i, &key.0, &key.1).unwrap();
            if !base_prec(ib.component(i), g_m, g_n) {
                return false;
            }
            if m.h_at(i, &a, &b) != n.h_at(i, &key.0, &key.1) {
                return false;
            }
        }
    }
    true
}

/// Restriction of a tuple to a subset of its nodes.
pub fn restrict_m(m: &MTuple, u_sub: &WordSet) -> Result<MTuple, MError> {
    if !u_sub.is_subset(m.u()) {
        return Err(MError::BadRestriction(
            "not a subset of the node set".to_string(),
        ));
    }
    if u_sub.size() < 2 {
        return Err(MError::BadRestriction(format!(
            "needs at least two nodes, got {}",
            u_sub.size()
        )));
    }
    let mut h = vec![BTreeMap::new(); m.iota()];
    let mut g = vec![BTreeMap::new(); m.iota()];
    for key in unordered_pairs(u_sub) {
        for i in 0..m.iota() {
            h[i].insert(key.clone(), m.h_at(i, &key.0, &key.1).unwrap());
            g[i].insert(key.clone(), m.g_at(i, &key.0, &key.1).unwrap().clone());
        }
    }
    MTuple::new(m.ell(), m.iota(), u_sub.clone(), h, g)
}

/// Tree-compatible witness candidates for one node pair: `(sigma, tree)`
/// with both translated nodes inside the tree level.
fn pair_candidates(a: &BitWord, b: &BitWord, levels: &[WordSet]) -> Vec<(BitWord, usize)> {
    let mut out = Vec::new();
    for (m, level) in levels.iter().enumerate() {
        for node in level.iter() {
            let sigma = a.add(node).unwrap();
            if level.contains(&b.add(&sigma).unwrap()) {
                out.push((sigma, m));
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// The admissible `(g, h)` choices for one pair and one base component:
/// singleton bases pick one candidate, the perfect base picks a
/// same-tree candidate set of size three up to the bound.
fn slot_choices(
    tag: crate::bases::BaseTag,
    cands: &[(BitWord, usize)],
    max_g: usize,
) -> Vec<(WordSet, usize)> {
    use crate::bases::BaseTag;
    let ell = match cands.first() {
        Some((s, _)) => s.len(),
        None => return Vec::new(),
    };
    match tag {
        BaseTag::Singleton => cands
            .iter()
            .map(|(s, m)| (WordSet::from_words(ell, [s.clone()]).unwrap(), *m))
            .collect(),
        BaseTag::Perfect => {
            let mut out = Vec::new();
            let trees: BTreeSet<usize> = cands.iter().map(|(_, m)| *m).collect();
            for tree in trees {
                let pool: Vec<&BitWord> = cands
                    .iter()
                    .filter(|(_, m)| *m == tree)
                    .map(|(s, _)| s)
                    .collect();
                // subsets of the pool with size in [3, max_g]
                let mut stack: Vec<(usize, Vec<usize>)> = vec![(0, Vec::new())];
                while let Some((start, chosen)) = stack.pop() {
                    if chosen.len() >= 3 {
                        out.push((
                            WordSet::from_words(ell, chosen.iter().map(|&i| pool[i].clone()))
                                .unwrap(),
                            tree,
                        ));
                    }
                    if chosen.len() == max_g {
                        continue;
                    }
                    for i in start..pool.len() {
                        let mut next = chosen.clone();
                        next.push(i);
                        stack.push((i + 1, next));
                    }
                }
            }
            out.sort();
            out
        }
    }
}

/// Exhaustive enumeration of the valid tuples within the catalog bounds.
pub fn enumerate_catalog(cat: &Catalog, budget: &mut Budget) -> Result<Vec<MTuple>, MError> {
    let mut out = Vec::new();
    for ell in 1..=cat.depth {
        let levels = cat.levels_at(ell);
        let words: Vec<BitWord> = BitWord::all(ell).collect();
        // depth-first over sorted node sets with pair feasibility pruning
        let mut stack: Vec<(usize, Vec<BitWord>)> = vec![(0, Vec::new())];
        while let Some((start, chosen)) = stack.pop() {
            budget.spend("catalog node-set enumeration")?;
            if chosen.len() >= 2 {
                let u = WordSet::from_words(ell, chosen.iter().cloned()).unwrap();
                emit_assignments(cat, &u, &levels, budget, &mut out)?;
            }
            if chosen.len() == cat.bounds.max_u {
                continue;
            }
            'words: for i in start..words.len() {
                for prev in &chosen {
                    if pair_candidates(prev, &words[i], &levels).is_empty() {
                        continue 'words;
                    }
                }
                let mut next = chosen.clone();
                next.push(words[i].clone());
                stack.push((i + 1, next));
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Emits every valid `(h, g)` assignment over the fixed node set.
fn emit_assignments(
    cat: &Catalog,
    u: &WordSet,
    levels: &[WordSet],
    budget: &mut Budget,
    out: &mut Vec<MTuple>,
) -> Result<(), MError> {
    let pairs = unordered_pairs(u);
    for iota in cat.iotas() {
        // per-pair, per-index choice lists
        let mut menu: Vec<Vec<Vec<(WordSet, usize)>>> = Vec::with_capacity(pairs.len());
        let mut feasible = true;
        for key in &pairs {
            let cands = pair_candidates(&key.0, &key.1, levels);
            let per_index: Vec<Vec<(WordSet, usize)>> = (0..iota)
                .map(|i| slot_choices(cat.ib.component(i), &cands, cat.bounds.max_g))
                .collect();
            if per_index.iter().any(|c| c.is_empty()) {
                feasible = false;
                break;
            }
            menu.push(per_index);
        }
        if !feasible {
            continue;
        }
        // depth-first over (pair, index) slots with per-pair disjointness
        struct Frame {
            slot: usize,
            h: Vec<BTreeMap<(BitWord, BitWord), usize>>,
            g: Vec<BTreeMap<(BitWord, BitWord), WordSet>>,
        }
        let total_slots = pairs.len() * iota;
        let mut stack = vec![Frame {
            slot: 0,
            h: vec![BTreeMap::new(); iota],
            g: vec![BTreeMap::new(); iota],
        }];
        while let Some(frame) = stack.pop() {
            budget.spend("catalog assignment enumeration")?;
            if frame.slot == total_slots {
                out.push(MTuple::new(u.len(), iota, u.clone(), frame.h, frame.g).unwrap());
                continue;
            }
            let pair = frame.slot / iota;
            let index = frame.slot % iota;
            let key = &pairs[pair];
            'choices: for (gset, tree) in &menu[pair][index] {
                // disjoint from the earlier indices of the same pair
                for i in 0..index {
                    let prev = frame.g[i].get(key).unwrap();
                    if gset.iter().any(|s| prev.contains(s)) {
                        continue 'choices;
                    }
                }
                let mut h = frame.h.clone();
                let mut g = frame.g.clone();
                h[index].insert(key.clone(), *tree);
                g[index].insert(key.clone(), gset.clone());
                stack.push(Frame {
                    slot: frame.slot + 1,
                    h,
                    g,
                });
            }
        }
    }
    Ok(())
}

/// The decreasing derivative stages over an enumerated catalog, from the
/// full catalog down to the fixpoint (empty or stable). Returned as
/// index sets into the enumeration. Tuples whose level, node count, or
/// index count leave no room for any witness inside the bounds are
/// dropped without a scan.
pub fn derivative_chain(
    cat: &Catalog,
    tuples: &[MTuple],
    budget: &mut Budget,
) -> Result<Vec<BTreeSet<usize>>, MError> {
    let omega = cat.ib.istar().is_omega();
    let mut stages: Vec<BTreeSet<usize>> = vec![(0..tuples.len()).collect()];
    loop {
        let current = stages.last().unwrap();
        let mut next = BTreeSet::new();
        for (mi, m) in tuples.iter().enumerate() {
            if !current.contains(&mi) {
                continue;
            }
            if witness_rank_ceiling(cat, m.ell(), m.u().size(), m.iota()).is_none() {
                continue;
            }
            let mut keeps = true;
            for nu in m.u().iter() {
                budget.spend("derivative stage")?;
                let witness = current.iter().any(|&ni| {
                    let n = &tuples[ni];
                    n.ell() > m.ell()
                        && (!omega || m.iota() < n.iota())
                        && n.u().iter().filter(|e| nu.is_prefix_of(e)).count() >= 2
                        && extends(m, n, &cat.ib)
                });
                if !witness {
                    keeps = false;
                    break;
                }
            }
            if keeps {
                next.insert(mi);
            }
        }
        let stable = *stages.last().unwrap() == next;
        let empty = next.is_empty();
        stages.push(next);
        if stable || empty {
            return Ok(stages);
        }
    }
}

/// The non-disjointness rank of a tuple relative to the bounded catalog:
/// the last derivative stage containing it. Computed by a memoized
/// minimax recursion over the tuple's admissible strict extensions; the
/// witness scan stops early once it meets the level-and-size ceiling on
/// what any further witness could score.
pub fn ndrk(m: &MTuple, cat: &Catalog, budget: &mut Budget) -> Result<usize, MError> {
    let report = validate_mtuple(m, cat);
    if !report.all_ok() {
        return Err(MError::NotInCatalog(
            report
                .failures()
                .map(|f| f.id.clone())
                .collect::<Vec<_>>()
                .join(", "),
        ));
    }
    let mut memo: BTreeMap<MTuple, usize> = BTreeMap::new();
    ndrk_inner(m, cat, budget, &mut memo)
}

/// Ceiling on the rank of any witness extension of a tuple with the
/// given level, node count, and index count: each rank step costs one
/// level, one node, and (for omega bases) one index.
fn witness_rank_ceiling(cat: &Catalog, ell: usize, usize_u: usize, iota: usize) -> Option<usize> {
    if ell + 1 > cat.depth || usize_u + 1 > cat.bounds.max_u {
        return None;
    }
    let mut cap = (cat.depth - ell - 1).min(cat.bounds.max_u - usize_u - 1);
    if cat.ib.istar().is_omega() {
        if iota + 1 > cat.bounds.max_iota {
            return None;
        }
        cap = cap.min(cat.bounds.max_iota - iota - 1);
    }
    Some(cap)
}

fn ndrk_inner(
    m: &MTuple,
    cat: &Catalog,
    budget: &mut Budget,
    memo: &mut BTreeMap<MTuple, usize>,
) -> Result<usize, MError> {
    if let Some(&r) = memo.get(m) {
        return Ok(r);
    }
    let ceiling = witness_rank_ceiling(cat, m.ell(), m.u().size(), m.iota());
    let mut rank = usize::MAX;
    let nodes: Vec<BitWord> = m.u().iter().cloned().collect();
    for nu in &nodes {
        let slot = match ceiling {
            None => 0,
            Some(cap) => {
                let mut best: Option<usize> = None;
                visit_witnesses(m, nu, cat, budget, memo, &mut |n, cat, budget, memo| {
                    let r = ndrk_inner(n, cat, budget, memo)?;
                    if best.map_or(true, |b| r > b) {
                        best = Some(r);
                    }
                    Ok(best != Some(cap))
                })?;
                best.map_or(0, |b| b + 1)
            }
        };
        rank = rank.min(slot);
        if rank == 0 {
            break;
        }
    }
    memo.insert(m.clone(), rank);
    Ok(rank)
}

type WitnessVisitor<'v> = dyn FnMut(&MTuple, &Catalog, &mut Budget, &mut BTreeMap<MTuple, usize>) -> Result<bool, MError>
    + 'v;

/// Streams the strict extensions of `m` within the catalog bounds that
/// double the node `nu` (and grow the index count when the base is
/// omega-indexed) to the visitor, which may stop the scan by returning
/// false. Extensions at low levels come first: they have the most
/// headroom, so rank scans meet their ceiling fastest that way.
fn visit_witnesses(
    m: &MTuple,
    nu: &BitWord,
    cat: &Catalog,
    budget: &mut Budget,
    memo: &mut BTreeMap<MTuple, usize>,
    on: &mut WitnessVisitor<'_>,
) -> Result<(), MError> {
    let omega = cat.ib.istar().is_omega();
    let iotas: Vec<usize> = if omega {
        (m.iota() + 1..=cat.bounds.max_iota).collect()
    } else {
        vec![m.iota()]
    };
    for ell in m.ell() + 1..=cat.depth {
        let levels = cat.levels_at(ell);
        let nodes: Vec<&BitWord> = m.u().iter().collect();
        // per old node, a nonempty extension subset; two at nu; the
        // total capped by the node bound
        let mut selections: Vec<Vec<BitWord>> = vec![Vec::new()];
        for node in &nodes {
            let exts: Vec<BitWord> = BitWord::all(ell - node.len())
                .map(|t| node.concat(&t))
                .collect();
            let need = if *node == nu { 2 } else { 1 };
            let mut grown = Vec::new();
            for sel in &selections {
                for mask in 1u64..(1u64 << exts.len().min(20)) {
                    budget.spend("extension node selection")?;
                    if (mask.count_ones() as usize) < need {
                        continue;
                    }
                    if sel.len() + mask.count_ones() as usize > cat.bounds.max_u {
                        continue;
                    }
                    let mut next = sel.clone();
                    next.extend(
                        exts.iter()
                            .enumerate()
                            .filter(|(i, _)| mask >> i & 1 == 1)
                            .map(|(_, w)| w.clone()),
                    );
                    grown.push(next);
                }
            }
            selections = grown;
        }
        for sel in selections {
            let u_new = WordSet::from_words(ell, sel.iter().cloned()).unwrap();
            if !stream_constrained_assignments(m, &u_new, &iotas, &levels, cat, budget, memo, on)? {
                return Ok(());
            }
        }
    }
    Ok(())
}

/// Assignment enumeration for a fixed extension node set: pairs with
/// distinct restrictions are forced to refine the old witnesses with the
/// same tree; fresh pairs range over everything admissible. Returns
/// false once the visitor stops the scan.
#[allow(clippy::too_many_arguments)]
fn stream_constrained_assignments(
    m: &MTuple,
    u_new: &WordSet,
    iotas: &[usize],
    levels: &[WordSet],
    cat: &Catalog,
    budget: &mut Budget,
    memo: &mut BTreeMap<MTuple, usize>,
    on: &mut WitnessVisitor<'_>,
) -> Result<bool, MError> {
    let pairs = unordered_pairs(u_new);
    for &iota in iotas {
        let mut menu: Vec<Vec<Vec<(WordSet, usize)>>> = Vec::with_capacity(pairs.len());
        let mut feasible = true;
        for key in &pairs {
            let cands = pair_candidates(&key.0, &key.1, levels);
            let a = key.0.restrict(m.ell()).unwrap();
            let b = key.1.restrict(m.ell()).unwrap();
            let constrained = a != b;
            let per_index: Vec<Vec<(WordSet, usize)>> = (0..iota)
                .map(|i| {
                    let all = slot_choices(cat.ib.component(i), &cands, cat.bounds.max_g);
                    if constrained && i < m.iota() {
                        let g_old = m.g_at(i, &a, &b).unwrap();
                        let h_old = m.h_at(i, &a, &b).unwrap();
                        all.into_iter()
                            .filter(|(gset, tree)| {
                                *tree == h_old && base_prec(cat.ib.component(i), g_old, gset)
                            })
                            .collect()
                    } else {
                        all
                    }
                })
                .collect();
            if per_index.iter().any(|c| c.is_empty()) {
                feasible = false;
                break;
            }
            menu.push(per_index);
        }
        if !feasible {
            continue;
        }
        let total_slots = pairs.len() * iota;
        struct Frame {
            slot: usize,
            h: Vec<BTreeMap<(BitWord, BitWord), usize>>,
            g: Vec<BTreeMap<(BitWord, BitWord), WordSet>>,
        }
        let mut stack = vec![Frame {
            slot: 0,
            h: vec![BTreeMap::new(); iota],
            g: vec![BTreeMap::new(); iota],
        }];
        while let Some(frame) = stack.pop() {
            budget.spend("constrained assignment enumeration")?;
            if frame.slot == total_slots {
                let n = MTuple::new(u_new.len(), iota, u_new.clone(), frame.h, frame.g).unwrap();
                if !on(&n, cat, budget, memo)? {
                    return Ok(false);
                }
                continue;
            }
            let pair = frame.slot / iota;
            let index = frame.slot % iota;
            let key = &pairs[pair];
            'choices: for (gset, tree) in &menu[pair][index] {
                for i in 0..index {
                    let prev = frame.g[i].get(key).unwrap();
                    if gset.iter().any(|s| prev.contains(s)) {
                        continue 'choices;
                    }
                }
                let mut h = frame.h.clone();
                let mut g = frame.g.clone();
                h[index].insert(key.clone(), *tree);
                g[index].insert(key.clone(), gset.clone());
                stack.push(Frame {
                    slot: frame.slot + 1,
                    h,
                    g,
                });
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> BitWord {
        BitWord::parse(s).unwrap()
    }

    /// One tree at depth 4 whose leaves span the first and last
    /// coordinates. The coset structure keeps the catalog small while
    /// the late difference keeps node doubling feasible, so ranks are
    /// not all zero.
    fn coset_catalog() -> Catalog {
        let t = FiniteTree::from_level_set(
            4,
            WordSet::parse(4, &["0000", "0001", "1100", "1101"]).unwrap(),
        )
        .unwrap();
        Catalog::new(
            vec![t],
            4,
            IndexedBase::singleton_iota(2),
            CatalogBounds {
                max_u: 3,
                max_g: 1,
                max_iota: 4,
            },
        )
        .unwrap()
    }

    /// A tuple over the coset catalog: u = {00, 11}, both singleton
    /// witnesses from the candidate pool.
    fn sample_tuple(cat: &Catalog) -> MTuple {
        let levels = cat.levels_at(2);
        let u = WordSet::parse(2, &["00", "11"]).unwrap();
        let cands = pair_candidates(&w("00"), &w("11"), &levels);
        assert!(cands.len() >= 2, "candidates: {cands:?}");
        let mut h = vec![BTreeMap::new(); 2];
        let mut g = vec![BTreeMap::new(); 2];
        for (i, (sigma, tree)) in cands.iter().take(2).enumerate() {
            h[i].insert((w("00"), w("11")), *tree);
            g[i].insert(
                (w("00"), w("11")),
                WordSet::from_words(2, [sigma.clone()]).unwrap(),
            );
        }
        MTuple::new(2, 2, u, h, g).unwrap()
    }

    #[test]
    fn sample_tuple_is_valid() {
        let cat = coset_catalog();
        let m = sample_tuple(&cat);
        let report = validate_mtuple(&m, &cat);
        assert!(report.all_ok(), "{}", report.render_text());
    }

    #[test]
    fn planted_defects_fail_their_clauses() {
        let cat = coset_catalog();
        let m = sample_tuple(&cat);
        let key = (w("00"), w("11"));
        // duplicate sigma across indices on the same pair
        let hm: Vec<BTreeMap<_, usize>> = (0..2)
            .map(|i| BTreeMap::from([(key.clone(), m.h_at(i, &key.0, &key.1).unwrap())]))
            .collect();
        let gm: Vec<BTreeMap<_, WordSet>> = (0..2)
            .map(|_| BTreeMap::from([(key.clone(), m.g_at(0, &key.0, &key.1).unwrap().clone())]))
            .collect();
        let dup = MTuple::new(2, 2, m.u().clone(), hm, gm).unwrap();
        let report = validate_mtuple(&dup, &cat);
        assert!(report.failures().any(|f| f.id == "mtuple.(c).disjointness"));

        // witness translated outside the tree level
        let hm: Vec<BTreeMap<_, usize>> = (0..2)
            .map(|i| BTreeMap::from([(key.clone(), m.h_at(i, &key.0, &key.1).unwrap())]))
            .collect();
        let mut gm: Vec<BTreeMap<_, WordSet>> = (0..2)
            .map(|i| BTreeMap::from([(key.clone(), m.g_at(i, &key.0, &key.1).unwrap().clone())]))
            .collect();
        gm[0].insert(key.clone(), WordSet::parse(2, &["01"]).unwrap());
        let misfiled = MTuple::new(2, 2, m.u().clone(), hm, gm).unwrap();
        let report = validate_mtuple(&misfiled, &cat);
        assert!(report
            .failures()
            .any(|f| f.id == "mtuple.(e).tree-membership"));
    }

    #[test]
    fn translation_is_an_involution_and_preserves_validity() {
        let cat = coset_catalog();
        let m = sample_tuple(&cat);
        let rho = w("01");
        let t = translate_m(&m, &rho).unwrap();
        assert_eq!(translate_m(&t, &rho).unwrap(), m);
        assert_eq!(translate_m(&m, &BitWord::zero(2)).unwrap(), m);
        assert_eq!(
            validate_mtuple(&t, &cat).render_text(),
            validate_mtuple(&m, &cat).render_text()
        );
        // longer translators restrict first
        let long = translate_m(&m, &w("0111")).unwrap();
        assert_eq!(long, translate_m(&m, &w("01")).unwrap());
    }

    #[test]
    fn extends_is_irreflexive() {
        let cat = coset_catalog();
        let m = sample_tuple(&cat);
        assert!(!extends(&m, &m, &cat.ib));
    }

    #[test]
    fn restriction_identity_and_size_guard() {
        let cat = coset_catalog();
        let m = sample_tuple(&cat);
        assert_eq!(restrict_m(&m, m.u()).unwrap(), m);
        let single = WordSet::parse(2, &["00"]).unwrap();
        assert!(restrict_m(&m, &single).is_err());
    }

    #[test]
    fn enumeration_and_chain_on_the_coset_catalog() {
        let cat = coset_catalog();
        let mut budget = Budget::new(50_000_000);
        let tuples = enumerate_catalog(&cat, &mut budget).unwrap();
        assert!(!tuples.is_empty());
        let m = sample_tuple(&cat);
        assert!(tuples.binary_search(&m).is_ok(), "sample tuple enumerated");
        let stages = derivative_chain(&cat, &tuples, &mut budget).unwrap();
        for pair in stages.windows(2) {
            assert!(pair[1].is_subset(&pair[0]));
        }
        assert!(stages.len() <= cat.depth + 2);
        // some tuple survives to the second stage: ranks are not all zero
        assert!(!stages[1].is_empty());
        // downward closure of the nontrivial stages under the order
        for stage in stages.iter().skip(1) {
            for &ni in stage {
                for (mi, mt) in tuples.iter().enumerate() {
                    if extends(mt, &tuples[ni], &cat.ib) {
                        assert!(stage.contains(&mi), "stage not downward closed");
                    }
                }
            }
        }
        // ndrk agrees with the chain on every enumerated tuple
        for (ti, t) in tuples.iter().enumerate() {
            let by_chain = stages.iter().take_while(|s| s.contains(&ti)).count() - 1;
            let by_recursion = ndrk(t, &cat, &mut Budget::new(50_000_000)).unwrap();
            assert_eq!(by_chain, by_recursion, "tuple {ti}");
        }
    }

    #[test]
    fn max_level_tuple_has_rank_zero() {
        let cat = coset_catalog();
        let levels = cat.levels_at(4);
        let a = w("0000");
        let b = w("1100");
        let cands = pair_candidates(&a, &b, &levels);
        assert!(cands.len() >= 2);
        let mut h = vec![BTreeMap::new(); 2];
        let mut g = vec![BTreeMap::new(); 2];
        for (i, (sigma, tree)) in cands.iter().take(2).enumerate() {
            h[i].insert((a.clone(), b.clone()), *tree);
            g[i].insert(
                (a.clone(), b.clone()),
                WordSet::from_words(4, [sigma.clone()]).unwrap(),
            );
        }
        let u = WordSet::from_words(4, [a.clone(), b.clone()]).unwrap();
        let m = MTuple::new(4, 2, u, h, g).unwrap();
        assert_eq!(ndrk(&m, &cat, &mut Budget::default()).unwrap(), 0);
    }

    #[test]
    fn translation_permutes_the_enumerated_catalog() {
        let cat = coset_catalog();
        let mut budget = Budget::new(50_000_000);
        let tuples = enumerate_catalog(&cat, &mut budget).unwrap();
        let at_level_2: Vec<&MTuple> = tuples.iter().filter(|t| t.ell() == 2).collect();
        assert!(!at_level_2.is_empty());
        for rho in BitWord::all(2) {
            let mut image: Vec<MTuple> = at_level_2
                .iter()
                .map(|t| translate_m(t, &rho).unwrap())
                .collect();
            image.sort();
            image.dedup();
            assert_eq!(
                image.len(),
                at_level_2.len(),
                "translation collapsed tuples"
            );
            for t in &image {
                assert!(
                    tuples.binary_search(t).is_ok(),
                    "translate left the catalog"
                );
            }
        }
    }

    #[test]
    fn ndrk_is_translation_invariant_on_the_sample() {
        let cat = coset_catalog();
        let m = sample_tuple(&cat);
        let base = ndrk(&m, &cat, &mut Budget::new(50_000_000)).unwrap();
        for rho in BitWord::all(2) {
            let t = translate_m(&m, &rho).unwrap();
            assert!(validate_mtuple(&t, &cat).all_ok());
            assert_eq!(
                ndrk(&t, &cat, &mut Budget::new(50_000_000)).unwrap(),
                base,
                "rho = {rho}"
            );
        }
    }

    /// Full binary single tree at depth 4 over six singleton components:
    /// the 2-node tuple at level 3 extends exactly once before the depth
    /// bound cuts the chain, so its rank is 1. The expected value was
    /// fixed by the independent search below before the rank engine
    /// existed.
    #[test]
    fn frozen_rank_on_the_full_binary_tree() {
        let full = FiniteTree::from_level_set(4, WordSet::from_words(4, BitWord::all(4)).unwrap())
            .unwrap();
        let cat = Catalog::new(
            vec![full],
            4,
            IndexedBase::singleton_iota(6),
            CatalogBounds {
                max_u: 3,
                max_g: 1,
                max_iota: 6,
            },
        )
        .unwrap();
        let levels = cat.levels_at(3);
        let a = w("000");
        let b = w("111");
        let cands = pair_candidates(&a, &b, &levels);
        assert_eq!(cands.len(), 8, "full tree admits every witness");
        let mut h = vec![BTreeMap::new(); 6];
        let mut g = vec![BTreeMap::new(); 6];
        for (i, (sigma, tree)) in cands.iter().take(6).enumerate() {
            h[i].insert((a.clone(), b.clone()), *tree);
            g[i].insert(
                (a.clone(), b.clone()),
                WordSet::from_words(3, [sigma.clone()]).unwrap(),
            );
        }
        let u = WordSet::from_words(3, [a.clone(), b.clone()]).unwrap();
        let m = MTuple::new(3, 6, u, h, g).unwrap();
        let rank = ndrk(&m, &cat, &mut Budget::new(200_000_000)).unwrap();
        assert_eq!(rank, 1);
    }
}
