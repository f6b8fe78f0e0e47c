//! The forcing-condition engine: the eleven-demand validator, the
//! componentwise end-extension order, the three density constructions,
//! delta-system twins with their compatibility check, amalgamation,
//! membership recovery, and finite chain limits.
//!
//! The derived catalog of a condition is never stored. Its two
//! quantified demands are checked through a reduction: whether an entry
//! exists at a level and label set is a per-pair counting question over
//! witness supports, and whether two entries are related by translation
//! or by strict extension factors through the same supports. The checks
//! quantify over label sets up to a size cap and are bounded
//! verification in exactly that sense.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bases::{
    base_member, base_prec, canonical_extension, fresh_member, BaseError, BaseTag, FiniteTree,
    IStar, IndexedBase,
};
use crate::gf2::{
    extend_independent, is_independent_list, unique_translate, BitWord, Gf2Error, TailMode, WordSet,
};
use crate::mtuples::{translate_m, validate_mtuple, Catalog, CatalogBounds, MError, MTuple};
use crate::splitrank::{FiniteModel, ModelError, Rank, RankEval};
use crate::{Budget, BudgetExceeded, Report};

pub type Label = u32;

#[derive(Debug, Error)]
pub enum ForcingError {
    #[error("gf2: {0}")]
    Gf2(#[from] Gf2Error),
    #[error("base: {0}")]
    Base(#[from] BaseError),
    #[error("tuple: {0}")]
    Tuple(#[from] MError),
    #[error("model: {0}")]
    Model(#[from] ModelError),
    #[error("{0}")]
    Budget(#[from] BudgetExceeded),
    #[error("malformed condition: {0}")]
    Malformed(String),
    #[error("construction precondition: {0}")]
    Precondition(String),
    #[error("relabeling is not an order-preserving kernel-fixing injection: {0}")]
    BadRelabel(String),
    #[error("delta-system check failed; amalgamation refused:\n{0}")]
    IncompatibilityRisk(String),
    #[error("membership recovery violated a derived invariant: {0}")]
    RecoveryAlarm(String),
    #[error("chain is not ordered by the condition order at position {0}")]
    ChainNotOrdered(usize),
}

/// A forcing condition. The tree count is the length of `trees`; the
/// derived catalog is computed on demand and never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Condition {
    w: BTreeSet<Label>,
    n: usize,
    iota: usize,
    eta: BTreeMap<Label, BitWord>,
    trees: Vec<FiniteTree>,
    r: Vec<usize>,
    h: Vec<BTreeMap<(Label, Label), usize>>,
    g: Vec<BTreeMap<(Label, Label), WordSet>>,
}

fn label_pair(a: Label, b: Label) -> (Label, Label) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Condition {
    /// Assembles a condition from parts, checking only structural
    /// coherence (map domains and word lengths). The demands are the
    /// validator's business, so defective conditions can be built and
    /// fed to it.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        w: BTreeSet<Label>,
        n: usize,
        iota: usize,
        eta: BTreeMap<Label, BitWord>,
        trees: Vec<FiniteTree>,
        r: Vec<usize>,
        h: Vec<BTreeMap<(Label, Label), usize>>,
        g: Vec<BTreeMap<(Label, Label), WordSet>>,
    ) -> Result<Self, ForcingError> {
        if eta.keys().any(|a| !w.contains(a)) || w.iter().any(|a| !eta.contains_key(a)) {
            return Err(ForcingError::Malformed(
                "eta domain does not match the label set".to_string(),
            ));
        }
        for (a, word) in &eta {
            if word.len() != n {
                return Err(ForcingError::Malformed(format!(
                    "eta[{a}] has length {} in a level-{n} condition",
                    word.len()
                )));
            }
        }
        if r.len() != trees.len() {
            return Err(ForcingError::Malformed(format!(
                "{} r-values against {} trees",
                r.len(),
                trees.len()
            )));
        }
        for t in &trees {
            if t.depth() != n {
                return Err(ForcingError::Malformed(format!(
                    "tree of depth {} in a level-{n} condition",
                    t.depth()
                )));
            }
        }
        if h.len() != iota || g.len() != iota {
            return Err(ForcingError::Malformed(format!(
                "expected {iota} h- and g-maps, got {} and {}",
                h.len(),
                g.len()
            )));
        }
        let labels: Vec<Label> = w.iter().copied().collect();
        for i in 0..iota {
            let mut expected = 0usize;
            for (x, a) in labels.iter().enumerate() {
                for b in labels.iter().skip(x + 1) {
                    expected += 1;
                    let key = (*a, *b);
                    if !h[i].contains_key(&key) || !g[i].contains_key(&key) {
                        return Err(ForcingError::Malformed(format!(
                            "pair ({a}, {b}) missing from slice {i}"
                        )));
                    }
                    if g[i][&key].len() != n {
                        return Err(ForcingError::Malformed(format!(
                            "g[{i}]({a}, {b}) has length {}",
                            g[i][&key].len()
                        )));
                    }
                }
            }
            if h[i].len() != expected || g[i].len() != expected {
                return Err(ForcingError::Malformed(format!(
                    "slice {i} carries keys outside the label pairs"
                )));
            }
        }
        Ok(Condition {
            w,
            n,
            iota,
            eta,
            trees,
            r,
            h,
            g,
        })
    }

    pub fn labels(&self) -> &BTreeSet<Label> {
        &self.w
    }

    pub fn level(&self) -> usize {
        self.n
    }

    pub fn iota(&self) -> usize {
        self.iota
    }

    pub fn tree_count(&self) -> usize {
        self.trees.len()
    }

    pub fn trees(&self) -> &[FiniteTree] {
        &self.trees
    }

    pub fn r_values(&self) -> &[usize] {
        &self.r
    }

    pub fn eta(&self, a: Label) -> Option<&BitWord> {
        self.eta.get(&a)
    }

    pub fn etas(&self) -> &BTreeMap<Label, BitWord> {
        &self.eta
    }

    pub fn h_at(&self, i: usize, a: Label, b: Label) -> Option<usize> {
        self.h[i].get(&label_pair(a, b)).copied()
    }

    pub fn g_at(&self, i: usize, a: Label, b: Label) -> Option<&WordSet> {
        self.g[i].get(&label_pair(a, b))
    }

    pub fn pairs(&self) -> Vec<(Label, Label)> {
        let labels: Vec<Label> = self.w.iter().copied().collect();
        let mut out = Vec::new();
        for (x, a) in labels.iter().enumerate() {
            for b in labels.iter().skip(x + 1) {
                out.push((*a, *b));
            }
        }
        out
    }

    /// The tree indices a catalog tuple may assign to a pair.
    fn allowed_trees(&self, a: Label, b: Label) -> BTreeSet<usize> {
        (0..self.iota).filter_map(|i| self.h_at(i, a, b)).collect()
    }

    /// The catalog of level tuples this condition's trees span, over six
    /// singleton components.
    pub fn tuple_catalog(&self, bounds: CatalogBounds) -> Catalog {
        Catalog::new(
            self.trees.clone(),
            self.n,
            IndexedBase::singleton_iota(6),
            bounds,
        )
        .expect("tree depths are checked at assembly")
    }
}

/// Lazy per-condition caches for the catalog reductions: tree levels,
/// label-word restrictions, per-pair witness supports, pairwise word
/// agreements, and the per-pair admissible tree sets.
pub struct Scratch<'p> {
    p: &'p Condition,
    tree_levels: Vec<BTreeMap<usize, WordSet>>,
    restrictions: BTreeMap<usize, BTreeMap<Label, BitWord>>,
    supports: HashMap<(usize, Label, Label), Vec<(BitWord, usize)>>,
    agreements: HashMap<(Label, Label), usize>,
    allowed: HashMap<(Label, Label), BTreeSet<usize>>,
    entry_memo: HashMap<(usize, Vec<Label>), bool>,
}

impl<'p> Scratch<'p> {
    pub fn new(p: &'p Condition) -> Self {
        Scratch {
            p,
            tree_levels: vec![BTreeMap::new(); p.tree_count()],
            restrictions: BTreeMap::new(),
            supports: HashMap::new(),
            agreements: HashMap::new(),
            allowed: HashMap::new(),
            entry_memo: HashMap::new(),
        }
    }

    /// Length of the longest common prefix of two label words.
    fn agreement(&mut self, a: Label, b: Label) -> usize {
        let key = (a.min(b), a.max(b));
        if let Some(&l) = self.agreements.get(&key) {
            return l;
        }
        let wa = self.p.eta(key.0).unwrap();
        let wb = self.p.eta(key.1).unwrap();
        let mut l = 0;
        while l < wa.len() && wa.get(l) == wb.get(l) {
            l += 1;
        }
        self.agreements.insert(key, l);
        l
    }

    /// Least level at which the label words are pairwise distinct.
    fn distinct_level(&mut self, v: &[Label]) -> usize {
        let mut out = 1;
        for (x, a) in v.iter().enumerate() {
            for b in v.iter().skip(x + 1) {
                out = out.max(self.agreement(*a, *b) + 1);
            }
        }
        out
    }

    fn allowed_trees(&mut self, a: Label, b: Label) -> &BTreeSet<usize> {
        let key = (a.min(b), a.max(b));
        if !self.allowed.contains_key(&key) {
            let set = self.p.allowed_trees(key.0, key.1);
            self.allowed.insert(key, set);
        }
        &self.allowed[&key]
    }

    fn tree_level(&mut self, m: usize, ell: usize) -> Result<&WordSet, ForcingError> {
        if !self.tree_levels[m].contains_key(&ell) {
            let level = self.p.trees[m].level(ell)?;
            self.tree_levels[m].insert(ell, level);
        }
        Ok(&self.tree_levels[m][&ell])
    }

    fn restriction(&mut self, ell: usize, a: Label) -> Result<BitWord, ForcingError> {
        if !self.restrictions.contains_key(&ell) {
            let mut map = BTreeMap::new();
            for (label, eta) in &self.p.eta {
                map.insert(*label, eta.restrict(ell)?);
            }
            self.restrictions.insert(ell, map);
        }
        Ok(self.restrictions[&ell][&a].clone())
    }

    /// Witness support of a pair at a level: the `(sigma, tree)` choices
    /// a catalog tuple may use there. The tree must be assigned to the
    /// pair, its r-value must have matured, and both translated points
    /// must be tree nodes.
    fn support(
        &mut self,
        ell: usize,
        a: Label,
        b: Label,
    ) -> Result<&[(BitWord, usize)], ForcingError> {
        let key = (ell, a.min(b), a.max(b));
        if !self.supports.contains_key(&key) {
            let ea = self.restriction(ell, key.1)?;
            let eb = self.restriction(ell, key.2)?;
            let mut out = Vec::new();
            for m in self.p.allowed_trees(key.1, key.2) {
                if self.p.r[m] > ell {
                    continue;
                }
                let level = self.tree_level(m, ell)?;
                for node in level.iter() {
                    let sigma = ea.add(node)?;
                    if level.contains(&eb.add(&sigma)?) {
                        out.push((sigma, m));
                    }
                }
                out.sort();
                out.dedup();
            }
            self.supports.insert(key, out);
        }
        Ok(&self.supports[&key])
    }

    fn support_sigma_count(
        &mut self,
        ell: usize,
        a: Label,
        b: Label,
    ) -> Result<usize, ForcingError> {
        let support = self.support(ell, a, b)?;
        let sigmas: BTreeSet<&BitWord> = support.iter().map(|(s, _)| s).collect();
        Ok(sigmas.len())
    }

    /// The restricted label image when the restrictions are distinct.
    fn distinct_image(
        &mut self,
        ell: usize,
        v: &BTreeSet<Label>,
    ) -> Result<Option<WordSet>, ForcingError> {
        let mut u = WordSet::new(ell);
        for a in v {
            u.insert(self.restriction(ell, *a)?)?;
        }
        Ok(if u.size() == v.len() { Some(u) } else { None })
    }
}

/// Scope caps for the validator.
#[derive(Debug, Clone)]
pub struct ValidateOpts {
    /// Largest label-set size the quantified demands range over.
    pub max_v: usize,
    pub budget: u64,
}

impl Default for ValidateOpts {
    fn default() -> Self {
        ValidateOpts {
            max_v: 7,
            budget: 100_000_000,
        }
    }
}

/// Demand identifiers in reports.
pub const DEMANDS: [&str; 11] = [
    "demand.01.sizes",
    "demand.02.eta-words",
    "demand.03.trees",
    "demand.04.r-range",
    "demand.05.h-maps",
    "demand.06.g-maps",
    "demand.07.level-identity",
    "demand.08.independence",
    "demand.09.catalog-coherence",
    "demand.10.translation-rank",
    "demand.11.unique-extension",
];

/// Validates every demand of the condition shape against the background
/// model and the indexed base, one report line per demand.
pub fn validate(
    p: &Condition,
    model: &FiniteModel,
    ib: &IndexedBase,
    opts: &ValidateOpts,
) -> Result<Report, ForcingError> {
    let model_report = model.validate();
    if !model_report.all_ok() {
        return Err(ForcingError::Malformed(format!(
            "background model rejected:\n{}",
            model_report.render_text()
        )));
    }
    let mut report = Report::new();
    let mut budget = Budget::new(opts.budget);
    let mut scratch = Scratch::new(p);

    // demand 1: sizes
    {
        let mut bad = Vec::new();
        if p.w.len() < 5 {
            bad.push(format!("|w| = {} below 5", p.w.len()));
        }
        if p.n < 5 {
            bad.push(format!("n = {} below 5", p.n));
        }
        if p.tree_count() < 5 {
            bad.push(format!("M = {} below 5", p.tree_count()));
        }
        if let IStar::Finite(k) = ib.istar() {
            if p.iota != k {
                bad.push(format!("iota = {} but i* = {k}", p.iota));
            }
        }
        if p.iota == 0 {
            bad.push("iota = 0".to_string());
        }
        report.record(DEMANDS[0], bad.is_empty(), bad.join("; "));
    }

    // demand 2: eta words live at the level (structural at assembly,
    // recorded for parsed inputs)
    report.record(
        DEMANDS[1],
        p.eta.values().all(|e| e.len() == p.n),
        "an eta word is off-level",
    );

    // demand 3: trees nonempty, terminal at the level, disjoint there
    {
        let mut bad = Vec::new();
        for (m, t) in p.trees.iter().enumerate() {
            if t.is_empty() {
                bad.push(format!("tree {m} is empty"));
            }
        }
        for m1 in 0..p.trees.len() {
            for m2 in m1 + 1..p.trees.len() {
                if p.trees[m1]
                    .leaves()
                    .iter()
                    .any(|x| p.trees[m2].leaves().contains(x))
                {
                    bad.push(format!("trees {m1} and {m2} share a terminal node"));
                }
            }
        }
        report.record(
            DEMANDS[2],
            bad.is_empty(),
            bad.first().cloned().unwrap_or_default(),
        );
    }

    // demand 4: r-values in range
    {
        let bad: Vec<String> =
            p.r.iter()
                .enumerate()
                .filter(|(_, &rm)| rm == 0 || rm > p.n)
                .map(|(m, &rm)| format!("r[{m}] = {rm} outside (0, {}]", p.n))
                .collect();
        report.record(
            DEMANDS[3],
            bad.is_empty(),
            bad.first().cloned().unwrap_or_default(),
        );
    }

    // demand 5: h-values inside the tree family
    {
        let mut bad = Vec::new();
        for i in 0..p.iota {
            for (key, &m) in &p.h[i] {
                if m >= p.tree_count() {
                    bad.push(format!(
                        "h[{i}]({}, {}) = {m} outside the trees",
                        key.0, key.1
                    ));
                }
            }
        }
        report.record(
            DEMANDS[4],
            bad.is_empty(),
            bad.first().cloned().unwrap_or_default(),
        );
    }

    // demand 6: g-values are base members at the level, six-way unions
    {
        let mut bad = Vec::new();
        for (a, b) in p.pairs() {
            let mut union: BTreeSet<BitWord> = BTreeSet::new();
            for i in 0..p.iota {
                let gset = p.g_at(i, a, b).unwrap();
                if !base_member(ib.component(i), gset) {
                    bad.push(format!("g[{i}]({a}, {b}) is not a base member"));
                }
                union.extend(gset.iter().cloned());
            }
            if union.len() < 6 {
                bad.push(format!(
                    "union of g({a}, {b}) has {} words, below 6",
                    union.len()
                ));
            }
        }
        report.record(
            DEMANDS[5],
            bad.is_empty(),
            bad.first().cloned().unwrap_or_default(),
        );
    }

    // demand 7: the terminal level of each tree is exactly the union of
    // the assigned translated witnesses
    {
        let mut bad = Vec::new();
        let mut wanted: Vec<BTreeSet<BitWord>> = vec![BTreeSet::new(); p.tree_count()];
        for (a, b) in p.pairs() {
            for i in 0..p.iota {
                if let Some(m) = p.h_at(i, a, b) {
                    if m >= p.tree_count() {
                        continue; // already flagged by demand 5
                    }
                    let gset = p.g_at(i, a, b).unwrap();
                    for side in [a, b] {
                        let eta = p.eta(side).unwrap();
                        for sigma in gset.iter() {
                            wanted[m].insert(eta.add(sigma)?);
                        }
                    }
                }
            }
        }
        for (m, want) in wanted.iter().enumerate() {
            let have: BTreeSet<BitWord> = p.trees[m].leaves().iter().cloned().collect();
            if have != *want {
                let missing = want.difference(&have).next();
                let extra = have.difference(want).next();
                bad.push(format!(
                    "tree {m} level mismatch (missing {missing:?}, extra {extra:?})"
                ));
            }
        }
        report.record(
            DEMANDS[6],
            bad.is_empty(),
            bad.first().cloned().unwrap_or_default(),
        );
    }

    // demand 8: joint linear independence, no repetitions, no zeros
    {
        let mut family: Vec<BitWord> = p.eta.values().cloned().collect();
        for (a, b) in p.pairs() {
            for i in 0..p.iota {
                family.extend(p.g_at(i, a, b).unwrap().iter().cloned());
            }
        }
        report.record(
            DEMANDS[7],
            is_independent_list(&family),
            format!(
                "{} listed vectors are dependent, repeat, or include zero",
                family.len()
            ),
        );
    }

    // demand 9: the derived catalog is coherent; materialize one entry
    // per feasible level and label set within caps and re-check it
    {
        let mut bad = Vec::new();
        let mut checked = 0usize;
        let vsets = label_subsets(p, opts.max_v);
        'd9: for ell in feasible_levels(p) {
            for v in &vsets {
                budget.spend("catalog coherence scan")?;
                if !entry_exists_in(&mut scratch, ell, v)? {
                    continue;
                }
                let entry = materialize_entry(&mut scratch, ell, v)?;
                let entry_report = validate_entry(p, &entry);
                if !entry_report.all_ok() {
                    bad.push(format!(
                        "materialized entry at level {ell} over {v:?} fails: {}",
                        entry_report
                            .failures()
                            .map(|f| f.id.clone())
                            .collect::<Vec<_>>()
                            .join(", ")
                    ));
                }
                checked += 1;
                if checked == 32 {
                    break 'd9;
                }
            }
        }
        report.record(
            DEMANDS[8],
            bad.is_empty(),
            bad.first().cloned().unwrap_or_default(),
        );
    }

    // demands 10 and 11 quantify over the derived catalog and the model
    for a in &p.w {
        if *a >= model.size {
            return Err(ForcingError::Model(ModelError::OutsideUniverse(
                *a, model.size,
            )));
        }
    }
    let mut eval = RankEval::new(model);
    {
        let bad = check_demand_10(&mut scratch, &mut eval, opts, &mut budget)?;
        report.record(
            DEMANDS[9],
            bad.is_empty(),
            bad.first().cloned().unwrap_or_default(),
        );
    }
    {
        let bad = check_demand_11(&mut scratch, &mut eval, opts, &mut budget)?;
        report.record(
            DEMANDS[10],
            bad.is_empty(),
            bad.first().cloned().unwrap_or_default(),
        );
    }
    Ok(report)
}

/// Levels at which catalog entries can exist at all: some tree must have
/// its r-value at or below the level.
fn feasible_levels(p: &Condition) -> Vec<usize> {
    match p.r.iter().min() {
        None => Vec::new(),
        Some(&rmin) => (rmin..=p.n).collect(),
    }
}

/// Label subsets of size five up to the cap.
fn label_subsets(p: &Condition, max_v: usize) -> Vec<BTreeSet<Label>> {
    let labels: Vec<Label> = p.w.iter().copied().collect();
    let mut out = Vec::new();
    let mut stack: Vec<(usize, Vec<Label>)> = vec![(0, Vec::new())];
    while let Some((start, chosen)) = stack.pop() {
        if chosen.len() >= 5 {
            out.push(chosen.iter().copied().collect());
        }
        if chosen.len() == max_v.min(labels.len()) {
            continue;
        }
        for i in start..labels.len() {
            let mut next = chosen.clone();
            next.push(labels[i]);
            stack.push((i + 1, next));
        }
    }
    out.sort();
    out
}

/// Whether an entry exists at the level over the label set: restrictions
/// distinct, and each pair's support carries six distinct witnesses.
pub fn entry_exists(p: &Condition, ell: usize, v: &BTreeSet<Label>) -> Result<bool, ForcingError> {
    entry_exists_in(&mut Scratch::new(p), ell, v)
}

fn entry_exists_in(
    scratch: &mut Scratch<'_>,
    ell: usize,
    v: &BTreeSet<Label>,
) -> Result<bool, ForcingError> {
    let labels: Vec<Label> = v.iter().copied().collect();
    let memo_key = (ell, labels.clone());
    if let Some(&hit) = scratch.entry_memo.get(&memo_key) {
        return Ok(hit);
    }
    let mut out = v.len() >= 5 && ell >= scratch.distinct_level(&labels);
    if out {
        'pairs: for (x, a) in labels.iter().enumerate() {
            for b in labels.iter().skip(x + 1) {
                if scratch.support_sigma_count(ell, *a, *b)? < 6 {
                    out = false;
                    break 'pairs;
                }
            }
        }
    }
    scratch.entry_memo.insert(memo_key, out);
    Ok(out)
}

/// One catalog entry: a level, a label set, and a tuple over the
/// condition's trees.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogEntry {
    pub ell: usize,
    pub v: BTreeSet<Label>,
    pub m: MTuple,
}

/// Builds the lexicographically first entry at the level over the label
/// set; callers check existence first.
fn materialize_entry(
    scratch: &mut Scratch<'_>,
    ell: usize,
    v: &BTreeSet<Label>,
) -> Result<CatalogEntry, ForcingError> {
    let labels: Vec<Label> = v.iter().copied().collect();
    let mut h = vec![BTreeMap::new(); 6];
    let mut g = vec![BTreeMap::new(); 6];
    let mut u = WordSet::new(ell);
    for a in &labels {
        u.insert(scratch.restriction(ell, *a)?)?;
    }
    for (x, a) in labels.iter().enumerate() {
        for b in labels.iter().skip(x + 1) {
            let support = scratch.support(ell, *a, *b)?.to_vec();
            let ea = scratch.restriction(ell, *a)?;
            let eb = scratch.restriction(ell, *b)?;
            let key = if ea <= eb { (ea, eb) } else { (eb, ea) };
            let mut used: BTreeSet<BitWord> = BTreeSet::new();
            let mut slot = 0usize;
            for (sigma, tree) in support {
                if slot == 6 {
                    break;
                }
                if used.contains(&sigma) {
                    continue;
                }
                used.insert(sigma.clone());
                h[slot].insert(key.clone(), tree);
                g[slot].insert(key.clone(), WordSet::from_words(ell, [sigma])?);
                slot += 1;
            }
            if slot < 6 {
                return Err(ForcingError::Malformed(format!(
                    "entry materialization at level {ell} lacks witnesses for ({a}, {b})"
                )));
            }
        }
    }
    let m = MTuple::new(ell, 6, u, h, g).map_err(ForcingError::Tuple)?;
    Ok(CatalogEntry {
        ell,
        v: v.clone(),
        m,
    })
}

/// Itemized check of one entry against the catalog-entry clauses.
pub fn validate_entry(p: &Condition, entry: &CatalogEntry) -> Report {
    let mut report = Report::new();
    let ell = entry.ell;
    let mut scratch = Scratch::new(p);
    // (a) level range, label count, distinct restrictions
    let distinct = matches!(scratch.distinct_image(ell, &entry.v), Ok(Some(_)));
    report.record(
        "entry.(a).shape",
        ell > 0 && ell <= p.n && entry.v.len() >= 5 && entry.v.is_subset(&p.w) && distinct,
        format!("ell={ell} |v|={}", entry.v.len()),
    );
    // (b) the tuple lives over the trees with the right node set
    let cat = p.tuple_catalog(CatalogBounds {
        max_u: entry.v.len().max(6),
        max_g: 1,
        max_iota: 6,
    });
    let tuple_report = validate_mtuple(&entry.m, &cat);
    let u_expected = scratch.distinct_image(ell, &entry.v).ok().flatten();
    report.record(
        "entry.(b).tuple",
        tuple_report.all_ok() && entry.m.ell() == ell && u_expected.as_ref() == Some(entry.m.u()),
        tuple_report
            .failures()
            .map(|f| f.id.clone())
            .collect::<Vec<_>>()
            .join(", "),
    );
    // (c) r-values matured, (d) tree assignments drawn from the pair's own
    let mut c_bad = Vec::new();
    let mut d_bad = Vec::new();
    let labels: Vec<Label> = entry.v.iter().copied().collect();
    for (x, a) in labels.iter().enumerate() {
        for b in labels.iter().skip(x + 1) {
            let ea = scratch.restriction(ell, *a).unwrap();
            let eb = scratch.restriction(ell, *b).unwrap();
            let allowed = p.allowed_trees(*a, *b);
            for i in 0..6 {
                match entry.m.h_at(i, &ea, &eb) {
                    Some(m) => {
                        if m < p.r.len() && p.r[m] > ell {
                            c_bad.push(format!("r[{m}] = {} above level {ell}", p.r[m]));
                        }
                        if !allowed.contains(&m) {
                            d_bad.push(format!(
                                "h[{i}]({a}, {b}) = {m} is not assigned to the pair"
                            ));
                        }
                    }
                    None => d_bad.push(format!("pair ({a}, {b}) missing from the tuple")),
                }
            }
        }
    }
    report.record(
        "entry.(c).r-bound",
        c_bad.is_empty(),
        c_bad.first().cloned().unwrap_or_default(),
    );
    report.record(
        "entry.(d).h-compat",
        d_bad.is_empty(),
        d_bad.first().cloned().unwrap_or_default(),
    );
    report
}

/// What the model says about a premise pair, independent of the level:
/// whether rank and witness data transport, and which labels sit at the
/// witness slots when the ranks are finite.
#[derive(Clone, Copy)]
enum PairVerdict {
    RankMismatch,
    WitnessMismatch,
    Vacuous,
    Slots(Label, Label),
}

fn pair_verdict(
    eval: &mut RankEval<'_>,
    v0: &BTreeSet<Label>,
    v1: &BTreeSet<Label>,
) -> Result<PairVerdict, ForcingError> {
    let rank0 = eval.rank(v0)?;
    let rank1 = eval.rank(v1)?;
    if rank0 != rank1 {
        return Ok(PairVerdict::RankMismatch);
    }
    if rank0.is_infinite() {
        return Ok(PairVerdict::Vacuous);
    }
    let w0 = eval.witness(v0)?;
    let w1 = eval.witness(v1)?;
    if (w0.zeta, w0.k) != (w1.zeta, w1.k) {
        return Ok(PairVerdict::WitnessMismatch);
    }
    Ok(PairVerdict::Slots(
        *v0.iter().nth(w0.k).unwrap(),
        *v1.iter().nth(w1.k).unwrap(),
    ))
}

/// The translation demand: entries at one level related by a translation
/// carry equal rank data, and the translation moves the witness slot of
/// one onto the other. Nontrivial premises are located through
/// translation classes of the restricted label images; the model-side
/// conclusion is consulted first (it is level-independent and memoized),
/// and the search for a shared underlying tuple runs only where the
/// conclusion is in doubt.
fn check_demand_10(
    scratch: &mut Scratch<'_>,
    eval: &mut RankEval<'_>,
    opts: &ValidateOpts,
    budget: &mut Budget,
) -> Result<Vec<String>, ForcingError> {
    let p = scratch.p;
    let mut bad = Vec::new();
    let vsets = label_subsets(p, opts.max_v);
    let vinfo: Vec<(BTreeSet<Label>, Vec<Label>, usize)> = vsets
        .into_iter()
        .map(|v| {
            let labels: Vec<Label> = v.iter().copied().collect();
            let dl = scratch.distinct_level(&labels);
            (v, labels, dl)
        })
        .collect();
    let mut verdicts: HashMap<(usize, usize), PairVerdict> = HashMap::new();
    for ell in feasible_levels(p) {
        // one restriction table per level, borrowed by everything below
        scratch.restriction(ell, *p.w.iter().next().unwrap())?;
        let table = scratch.restrictions[&ell].clone();
        // group label sets by exact image; within a class signature
        // (sorted popcounts of pairwise differences, a translation
        // invariant) candidate translations are verified exactly
        let mut exact: HashMap<Vec<u64>, (Vec<&BitWord>, Vec<usize>)> = HashMap::new();
        for (idx, (v, _, dl)) in vinfo.iter().enumerate() {
            budget.spend("translation demand scan")?;
            if ell < *dl {
                continue;
            }
            let mut words: Vec<&BitWord> = v.iter().map(|a| &table[a]).collect();
            words.sort_unstable();
            let mut key = Vec::with_capacity(words.len() * (ell / 64 + 1));
            for word in &words {
                key.extend_from_slice(word.limbs());
            }
            exact
                .entry(key)
                .or_insert_with(|| (words, Vec::new()))
                .1
                .push(idx);
        }
        let mut classes: HashMap<Vec<u32>, Vec<&(Vec<&BitWord>, Vec<usize>)>> = HashMap::new();
        for entry in exact.values() {
            let words = &entry.0;
            let mut sig: Vec<u32> = Vec::with_capacity(words.len() * words.len() / 2 + 1);
            sig.push(words.len() as u32);
            for (x, a) in words.iter().enumerate() {
                for b in words.iter().skip(x + 1) {
                    let pop: u32 = a
                        .limbs()
                        .iter()
                        .zip(b.limbs())
                        .map(|(x, y)| (x ^ y).count_ones())
                        .sum();
                    sig.push(pop);
                }
            }
            sig[1..].sort_unstable();
            classes.entry(sig).or_default().push(entry);
        }
        for class in classes.values() {
            for gx in 0..class.len() {
                let (u0, list0) = class[gx];
                for gy in gx..class.len() {
                    let (u1, list1) = class[gy];
                    // candidate translations moving u0 onto u1: verified
                    // exactly; within one group only even-sized images
                    // can have a nonzero stabilizer (a stabilizer pairs
                    // the image up)
                    let mut rhos: Vec<BitWord> = Vec::new();
                    if gx == gy {
                        rhos.push(BitWord::zero(ell));
                    }
                    if gx != gy || u0.len() % 2 == 0 {
                        for b in u1 {
                            let rho = u0[0].add(b)?;
                            if rho.is_zero() && gx == gy {
                                continue;
                            }
                            let moves_onto = u0.iter().all(|a| {
                                let t = a.add(&rho).unwrap();
                                u1.binary_search_by(|w| (*w).cmp(&t)).is_ok()
                            });
                            if moves_onto {
                                rhos.push(rho);
                            }
                        }
                    }
                    for rho in &rhos {
                        for (px, &i0) in list0.iter().enumerate() {
                            let start = if gx == gy { px } else { 0 };
                            for &i1 in list1.iter().skip(start) {
                                budget.spend("translation demand pair")?;
                                if i0 == i1 && rho.is_zero() {
                                    continue; // the identity premise is its own conclusion
                                }
                                let verdict = match verdicts.get(&(i0, i1)) {
                                    Some(v) => *v,
                                    None => {
                                        let v = pair_verdict(eval, &vinfo[i0].0, &vinfo[i1].0)?;
                                        verdicts.insert((i0, i1), v);
                                        v
                                    }
                                };
                                let conclusion_holds = match verdict {
                                    PairVerdict::Vacuous => true,
                                    PairVerdict::RankMismatch | PairVerdict::WitnessMismatch => {
                                        false
                                    }
                                    PairVerdict::Slots(alpha, beta) => {
                                        let lhs = table[&alpha].add(rho)?;
                                        lhs == table[&beta]
                                    }
                                };
                                if conclusion_holds {
                                    continue;
                                }
                                if translated_pair_exists(
                                    scratch,
                                    ell,
                                    &vinfo[i0].1,
                                    &vinfo[i1].1,
                                    rho,
                                    budget,
                                )? {
                                    bad.push(format!(
                                        "translated entries at level {ell} over {:?} and {:?} \
                                         break the rank transport",
                                        vinfo[i0].0, vinfo[i1].0
                                    ));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(bad)
}

/// Whether one underlying tuple realizes entries at both label sets, one
/// the translate of the other: per pair, six distinct witnesses drawn
/// from trees assigned to both pairs.
fn translated_pair_exists(
    scratch: &mut Scratch<'_>,
    ell: usize,
    v0: &[Label],
    v1: &[Label],
    rho: &BitWord,
    budget: &mut Budget,
) -> Result<bool, ForcingError> {
    if v0.len() != v1.len() || v0.len() < 5 {
        return Ok(false);
    }
    // match labels through the translation
    let mut image: BTreeMap<Label, Label> = BTreeMap::new();
    for a in v0 {
        let target = scratch.restriction(ell, *a)?.add(rho)?;
        let mut hit = None;
        for b in v1 {
            if scratch.restriction(ell, *b)? == target {
                hit = Some(*b);
                break;
            }
        }
        match hit {
            Some(b) => {
                image.insert(*a, b);
            }
            None => return Ok(false),
        }
    }
    for (x, a) in v0.iter().enumerate() {
        for b in v0.iter().skip(x + 1) {
            budget.spend("translated tuple search")?;
            let left = scratch.allowed_trees(*a, *b).clone();
            let shared: BTreeSet<usize> = left
                .intersection(scratch.allowed_trees(image[a], image[b]))
                .copied()
                .collect();
            if shared.is_empty() {
                return Ok(false);
            }
            let support = scratch.support(ell, *a, *b)?;
            let sigmas: BTreeSet<&BitWord> = support
                .iter()
                .filter(|(_, m)| shared.contains(m))
                .map(|(s, _)| s)
                .collect();
            if sigmas.len() < 6 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The covering structure of a strict-extension premise between two
/// nested label sets: per low pair of labels, the high pairs whose
/// restrictions cover it, valid while the low level stays below every
/// involved agreement. Level-independent, so one shared-tree emptiness
/// decision prunes the whole level rectangle.
struct ExtensionGroups {
    groups: Vec<((Label, Label), Vec<(Label, Label)>, BTreeSet<usize>)>,
}

fn extension_groups(
    scratch: &mut Scratch<'_>,
    ell0: usize,
    v0: &[Label],
    v1: &[Label],
) -> Option<ExtensionGroups> {
    // owner of a high label: the unique low label agreeing past ell0
    let mut owner: BTreeMap<Label, Label> = BTreeMap::new();
    for b in v1 {
        let mut hit = None;
        for a in v0 {
            if a == b || scratch.agreement(*a, *b) >= ell0 {
                hit = Some(*a);
                break;
            }
        }
        owner.insert(*b, hit?);
    }
    let mut grouped: BTreeMap<(Label, Label), Vec<(Label, Label)>> = BTreeMap::new();
    for (x, b1) in v1.iter().enumerate() {
        for b2 in v1.iter().skip(x + 1) {
            let (a1, a2) = (owner[b1], owner[b2]);
            if a1 == a2 {
                continue;
            }
            grouped
                .entry((a1.min(a2), a1.max(a2)))
                .or_default()
                .push((*b1, *b2));
        }
    }
    let mut groups = Vec::new();
    for (low, covering) in grouped {
        let mut shared = scratch.allowed_trees(low.0, low.1).clone();
        for (b1, b2) in &covering {
            let other = scratch.allowed_trees(*b1, *b2).clone();
            shared = shared.intersection(&other).copied().collect();
        }
        if shared.is_empty() {
            return None;
        }
        groups.push((low, covering, shared));
    }
    Some(ExtensionGroups { groups })
}

/// The unique-extension demand: when a rank-minus-one entry sits below a
/// strictly extending entry, the slot label's restriction has exactly
/// one extension in the bigger node set. The conclusion is read off the
/// agreement structure first; the search for a strictly extending tuple
/// pair runs only where the conclusion fails.
fn check_demand_11(
    scratch: &mut Scratch<'_>,
    eval: &mut RankEval<'_>,
    opts: &ValidateOpts,
    budget: &mut Budget,
) -> Result<Vec<String>, ForcingError> {
    let p = scratch.p;
    let mut bad = Vec::new();
    let vsets = label_subsets(p, opts.max_v);
    // label sets of rank minus one, with their witness slots
    let mut flagged: Vec<(BTreeSet<Label>, Vec<Label>, Label)> = Vec::new();
    for v in &vsets {
        budget.spend("unique-extension rank scan")?;
        if eval.rank(v)? == Rank::MinusOne {
            let witness = eval.witness(v)?;
            flagged.push((
                v.clone(),
                v.iter().copied().collect(),
                *v.iter().nth(witness.k).unwrap(),
            ));
        }
    }
    if flagged.is_empty() {
        return Ok(bad);
    }
    let feasible = feasible_levels(p);
    let feasible_min = match feasible.first() {
        Some(&l) => l,
        None => return Ok(bad),
    };
    for v1 in &vsets {
        let labels1: Vec<Label> = v1.iter().copied().collect();
        let dl1 = scratch.distinct_level(&labels1);
        for (v0, labels0, alpha0) in &flagged {
            if !v0.is_subset(v1) {
                continue;
            }
            budget.spend("unique-extension premise scan")?;
            // the slot label must double below some level
            let mut slot_agree = 0usize;
            for b in v1 {
                if b != alpha0 {
                    slot_agree = slot_agree.max(scratch.agreement(*alpha0, *b));
                }
            }
            // the high set must restrict onto the low one
            let mut cover = p.n;
            for b in v1 {
                if v0.contains(b) {
                    continue;
                }
                let reach = labels0
                    .iter()
                    .map(|a| scratch.agreement(*a, *b))
                    .max()
                    .unwrap_or(0);
                cover = cover.min(reach);
            }
            let dl0 = scratch.distinct_level(labels0);
            let ell0_hi = slot_agree.min(cover);
            let ell0_lo = feasible_min.max(dl0);
            if ell0_lo > ell0_hi {
                continue;
            }
            for ell0 in ell0_lo..=ell0_hi {
                // within this range the slot doubles and the node sets
                // cover, so the conclusion fails at every higher level
                // where the big set is distinct; the question is whether
                // a strictly extending tuple pair exists
                let groups = match extension_groups(scratch, ell0, labels0, &labels1) {
                    Some(g) => g,
                    None => continue,
                };
                for ell1 in (ell0 + 1).max(dl1)..=p.n {
                    budget.spend("unique-extension premise search")?;
                    if extension_pair_exists(scratch, ell0, ell1, &labels1, &groups, budget)? {
                        bad.push(format!(
                            "rank-minus-one entry over {v0:?} at level {ell0} extends to \
                             {v1:?} at level {ell1} with a doubled witness slot"
                        ));
                    }
                }
            }
        }
    }
    Ok(bad)
}

/// Whether a strictly extending tuple pair exists over the prepared
/// covering structure and levels: per low pair, six distinct low
/// witnesses each of which extends into every covering pair inside one
/// shared tree.
fn extension_pair_exists(
    scratch: &mut Scratch<'_>,
    ell0: usize,
    ell1: usize,
    labels1: &[Label],
    groups: &ExtensionGroups,
    budget: &mut Budget,
) -> Result<bool, ForcingError> {
    let v1: BTreeSet<Label> = labels1.iter().copied().collect();
    if !entry_exists_in(scratch, ell1, &v1)? {
        return Ok(false);
    }
    for (low, covering, shared) in &groups.groups {
        let low_support: Vec<(BitWord, usize)> = scratch
            .support(ell0, low.0, low.1)?
            .iter()
            .filter(|(_, m)| shared.contains(m))
            .cloned()
            .collect();
        let mut good_sigmas: BTreeSet<BitWord> = BTreeSet::new();
        for (sigma0, tree) in low_support {
            budget.spend("unique-extension witness search")?;
            let mut extends_all = true;
            for (b1, b2) in covering {
                let high = scratch.support(ell1, *b1, *b2)?;
                if !high
                    .iter()
                    .any(|(s, m)| *m == tree && sigma0.is_prefix_of(s))
                {
                    extends_all = false;
                    break;
                }
            }
            if extends_all {
                good_sigmas.insert(sigma0);
            }
            if good_sigmas.len() >= 6 {
                break;
            }
        }
        if good_sigmas.len() < 6 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The condition order: componentwise end-extension. Reflexive; the
/// base-element clause is refinement-or-equality.
pub fn leq(p: &Condition, q: &Condition, ib: &IndexedBase) -> bool {
    if !p.w.is_subset(&q.w) || p.n > q.n || p.tree_count() > q.tree_count() || p.iota > q.iota {
        return false;
    }
    for m in 0..p.tree_count() {
        if p.r[m] != q.r[m] {
            return false;
        }
        let cut = match q.trees[m].level(p.n) {
            Ok(level) => level,
            Err(_) => return false,
        };
        if cut != *p.trees[m].leaves() {
            return false;
        }
    }
    for a in &p.w {
        if !p.eta(*a).unwrap().is_prefix_of(q.eta(*a).unwrap()) {
            return false;
        }
    }
    for (a, b) in p.pairs() {
        for i in 0..p.iota {
            if p.h_at(i, a, b) != q.h_at(i, a, b) {
                return false;
            }
            let gp = p.g_at(i, a, b).unwrap();
            let gq = q.g_at(i, a, b).unwrap();
            if gp != gq && !base_prec(ib.component(i), gp, gq) {
                return false;
            }
        }
    }
    true
}

/// Deterministic construction choices shared by the density
/// constructions.
#[derive(Debug, Clone, Copy, Default)]
pub struct BuildConfig {
    pub seed: u64,
    /// Draw fresh base members from the seed instead of taking the
    /// lexicographically first ones.
    pub randomize: bool,
}

fn fresh_members_for(
    ib: &IndexedBase,
    iota: usize,
    len: usize,
    cfg: &BuildConfig,
) -> Result<Vec<WordSet>, ForcingError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::with_capacity(iota);
    for i in 0..iota {
        let tag = ib.component(i);
        let member = if cfg.randomize {
            fresh_member(tag, len, Some(&mut rng))?
        } else {
            fresh_member::<ChaCha8Rng>(tag, len, None)?
        };
        out.push(member);
    }
    Ok(out)
}

/// Requires that the base can satisfy the six-way union demand at all.
fn require_six_ways(ib: &IndexedBase, iota: usize) -> Result<(), ForcingError> {
    let wide = iota >= 6 || (0..iota).any(|i| ib.component(i) == BaseTag::Perfect);
    if wide {
        Ok(())
    } else {
        Err(ForcingError::Precondition(format!(
            "{iota} singleton components cannot reach the six-way union demand"
        )))
    }
}

/// The common tail of the constructions: an enumeration of witness
/// seeds, independent-tail words over them, and the label words.
struct Assembly {
    n: usize,
    etas: BTreeMap<Label, BitWord>,
    g: Vec<BTreeMap<(Label, Label), WordSet>>,
}

fn assemble_words(
    towers: &BTreeMap<(usize, (Label, Label)), WordSet>,
    eta_anchors: &[(Label, BitWord)],
    ell: usize,
    iota: usize,
) -> Result<Assembly, ForcingError> {
    // enumeration: pairs in label order, indices ascending, words in
    // lexicographic order
    let mut seeds: Vec<(BitWord, usize, (Label, Label))> = Vec::new();
    for ((i, pair), member) in towers {
        for sigma in member.iter() {
            seeds.push((sigma.clone(), *i, *pair));
        }
    }
    seeds.sort_by(|a, b| (a.2, a.1, &a.0).cmp(&(b.2, b.1, &b.0)));
    let a_count = seeds.len();
    let total = a_count + eta_anchors.len();
    let n = ell + total;
    let mut anchors: Vec<BitWord> = seeds.iter().map(|(s, _, _)| s.clone()).collect();
    anchors.extend(eta_anchors.iter().map(|(_, e)| e.clone()));
    let rho = extend_independent(ell, n, total, &anchors, TailMode::StandardBasis)?;
    let mut etas = BTreeMap::new();
    for (k, (label, _)) in eta_anchors.iter().enumerate() {
        etas.insert(*label, rho[a_count + k].clone());
    }
    let mut g: Vec<BTreeMap<(Label, Label), WordSet>> = vec![BTreeMap::new(); iota];
    for (a, (_, i, pair)) in seeds.iter().enumerate() {
        g[*i]
            .entry(*pair)
            .or_insert_with(|| WordSet::new(n))
            .insert(rho[a].clone())?;
    }
    Ok(Assembly { n, etas, g })
}

/// Reads the tree family off the level identity.
fn trees_from_levels(
    labels: &BTreeSet<Label>,
    etas: &BTreeMap<Label, BitWord>,
    g: &[BTreeMap<(Label, Label), WordSet>],
    h: &[BTreeMap<(Label, Label), usize>],
    n: usize,
    tree_count: usize,
) -> Result<Vec<FiniteTree>, ForcingError> {
    let mut levels: Vec<WordSet> = vec![WordSet::new(n); tree_count];
    let labels: Vec<Label> = labels.iter().copied().collect();
    for (x, a) in labels.iter().enumerate() {
        for b in labels.iter().skip(x + 1) {
            let key = (*a, *b);
            for i in 0..g.len() {
                let m = h[i][&key];
                for sigma in g[i][&key].iter() {
                    levels[m].insert(etas[a].add(sigma)?)?;
                    levels[m].insert(etas[b].add(sigma)?)?;
                }
            }
        }
    }
    levels
        .into_iter()
        .map(|l| FiniteTree::from_level_set(n, l).map_err(ForcingError::Base))
        .collect()
}

/// The seed condition over five labels: paired refinements at a common
/// short length, words with independent tails over them, one tree per
/// pair and index, and r-values pinned at the level.
pub fn genesis(
    labels: &[Label],
    ib: &IndexedBase,
    cfg: &BuildConfig,
) -> Result<Condition, ForcingError> {
    if labels.len() != 5 {
        return Err(ForcingError::Precondition(format!(
            "genesis needs exactly five labels, got {}",
            labels.len()
        )));
    }
    let w: BTreeSet<Label> = labels.iter().copied().collect();
    if w.len() != 5 {
        return Err(ForcingError::Precondition("labels repeat".to_string()));
    }
    let iota = ib.condition_iota();
    require_six_ways(ib, iota)?;
    let ell = 3; // room for six-word perfect members
    let members = fresh_members_for(ib, iota, ell, cfg)?;
    let mut towers: BTreeMap<(usize, (Label, Label)), WordSet> = BTreeMap::new();
    let sorted: Vec<Label> = w.iter().copied().collect();
    for (x, a) in sorted.iter().enumerate() {
        for b in sorted.iter().skip(x + 1) {
            for (i, member) in members.iter().enumerate() {
                towers.insert((i, (*a, *b)), member.clone());
            }
        }
    }
    let eta_anchors: Vec<(Label, BitWord)> =
        sorted.iter().map(|a| (*a, BitWord::zero(0))).collect();
    let assembly = assemble_words(&towers, &eta_anchors, ell, iota)?;
    // one tree per pair and index
    let mut h: Vec<BTreeMap<(Label, Label), usize>> = vec![BTreeMap::new(); iota];
    let mut pair_index = 0usize;
    for (x, a) in sorted.iter().enumerate() {
        for b in sorted.iter().skip(x + 1) {
            for (i, hmap) in h.iter_mut().enumerate() {
                hmap.insert((*a, *b), pair_index * iota + i);
            }
            pair_index += 1;
        }
    }
    let tree_count = 10 * iota;
    let trees = trees_from_levels(&w, &assembly.etas, &assembly.g, &h, assembly.n, tree_count)?;
    let r = vec![assembly.n; tree_count];
    Condition::from_parts(w, assembly.n, iota, assembly.etas, trees, r, h, assembly.g)
}

/// Extends a condition by one fresh label: every old pair's witnesses
/// refine, pairs with the newcomer grow out of the extreme pair's
/// witnesses, and the newcomer's trees are appended after the old ones.
pub fn add_ordinal(
    p: &Condition,
    beta: Label,
    ib: &IndexedBase,
    _cfg: &BuildConfig,
) -> Result<Condition, ForcingError> {
    if p.w.contains(&beta) {
        return Err(ForcingError::Precondition(format!(
            "label {beta} already present"
        )));
    }
    let iota = p.iota;
    let alpha_min = *p.w.iter().next().unwrap();
    let alpha_max = *p.w.iter().last().unwrap();
    let mut w = p.w.clone();
    w.insert(beta);
    let ell = p.n + 1;
    let sorted: Vec<Label> = w.iter().copied().collect();
    let mut towers: BTreeMap<(usize, (Label, Label)), WordSet> = BTreeMap::new();
    for (x, a) in sorted.iter().enumerate() {
        for b in sorted.iter().skip(x + 1) {
            for i in 0..iota {
                let source = if *a != beta && *b != beta {
                    p.g_at(i, *a, *b).unwrap()
                } else {
                    p.g_at(i, alpha_max, alpha_min).unwrap()
                };
                towers.insert(
                    (i, (*a, *b)),
                    canonical_extension(ib.component(i), source, ell)?,
                );
            }
        }
    }
    let mut eta_anchors: Vec<(Label, BitWord)> =
        p.w.iter()
            .map(|a| (*a, p.eta(*a).unwrap().clone()))
            .collect();
    eta_anchors.push((beta, BitWord::zero(0)));
    let assembly = assemble_words(&towers, &eta_anchors, ell, iota)?;
    // tree assignments: old pairs keep theirs, new pairs run after the
    // old family in label-position order
    let m_old = p.tree_count();
    let mut h: Vec<BTreeMap<(Label, Label), usize>> = vec![BTreeMap::new(); iota];
    for (x, a) in sorted.iter().enumerate() {
        for b in sorted.iter().skip(x + 1) {
            for (i, hmap) in h.iter_mut().enumerate() {
                let value = if *a != beta && *b != beta {
                    p.h_at(i, *a, *b).unwrap()
                } else {
                    let old = if *a == beta { *b } else { *a };
                    let position = p.w.iter().filter(|x| **x < old).count();
                    m_old + position * iota + i
                };
                hmap.insert((*a, *b), value);
            }
        }
    }
    let tree_count = m_old + iota * p.w.len();
    let trees = trees_from_levels(&w, &assembly.etas, &assembly.g, &h, assembly.n, tree_count)?;
    let mut r = p.r.clone();
    r.resize(tree_count, assembly.n);
    Condition::from_parts(w, assembly.n, iota, assembly.etas, trees, r, h, assembly.g)
}

/// Raises the index count by one when the base is omega-indexed: old
/// slices refine, the fresh slice takes new base members, and its trees
/// are appended one per pair.
pub fn bump_iota(
    p: &Condition,
    ib: &IndexedBase,
    cfg: &BuildConfig,
) -> Result<Condition, ForcingError> {
    if !ib.istar().is_omega() {
        return Err(ForcingError::Precondition(
            "the index count is pinned when the index bound is finite".to_string(),
        ));
    }
    let iota = p.iota + 1;
    let ell = p.n + 1;
    let fresh = {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x62756d70);
        let tag = ib.component(p.iota);
        if cfg.randomize {
            fresh_member(tag, ell, Some(&mut rng))?
        } else {
            fresh_member::<ChaCha8Rng>(tag, ell, None)?
        }
    };
    let sorted: Vec<Label> = p.w.iter().copied().collect();
    let mut towers: BTreeMap<(usize, (Label, Label)), WordSet> = BTreeMap::new();
    for (x, a) in sorted.iter().enumerate() {
        for b in sorted.iter().skip(x + 1) {
            for i in 0..p.iota {
                towers.insert(
                    (i, (*a, *b)),
                    canonical_extension(ib.component(i), p.g_at(i, *a, *b).unwrap(), ell)?,
                );
            }
            towers.insert((p.iota, (*a, *b)), fresh.clone());
        }
    }
    let eta_anchors: Vec<(Label, BitWord)> =
        p.w.iter()
            .map(|a| (*a, p.eta(*a).unwrap().clone()))
            .collect();
    let assembly = assemble_words(&towers, &eta_anchors, ell, iota)?;
    let m_old = p.tree_count();
    let mut h: Vec<BTreeMap<(Label, Label), usize>> = vec![BTreeMap::new(); iota];
    let mut pair_index = 0usize;
    for (x, a) in sorted.iter().enumerate() {
        for b in sorted.iter().skip(x + 1) {
            for i in 0..p.iota {
                h[i].insert((*a, *b), p.h_at(i, *a, *b).unwrap());
            }
            h[p.iota].insert((*a, *b), m_old + pair_index);
            pair_index += 1;
        }
    }
    let tree_count = m_old + pair_index;
    let trees = trees_from_levels(
        &p.w,
        &assembly.etas,
        &assembly.g,
        &h,
        assembly.n,
        tree_count,
    )?;
    let mut r = p.r.clone();
    r.resize(tree_count, assembly.n);
    Condition::from_parts(
        p.w.clone(),
        assembly.n,
        iota,
        assembly.etas,
        trees,
        r,
        h,
        assembly.g,
    )
}

/// Catalog enumeration caps.
#[derive(Debug, Clone)]
pub struct CatalogCaps {
    pub max_v: usize,
    /// Entries emitted before the scan reports budget exhaustion.
    pub max_entries: usize,
}

impl Default for CatalogCaps {
    fn default() -> Self {
        CatalogCaps {
            max_v: 7,
            max_entries: 10_000,
        }
    }
}

/// Exhaustive bounded enumeration of the derived catalog. Every valid
/// assignment at every feasible level and label set is an entry, so the
/// count explodes on rich conditions; the budget is the honest guard.
pub fn catalog(
    p: &Condition,
    caps: &CatalogCaps,
    budget: &mut Budget,
) -> Result<Vec<CatalogEntry>, ForcingError> {
    let mut scratch = Scratch::new(p);
    let mut out = Vec::new();
    for ell in feasible_levels(p) {
        for v in label_subsets(p, caps.max_v) {
            budget.spend("catalog enumeration scan")?;
            let u = match scratch.distinct_image(ell, &v)? {
                Some(u) => u,
                None => continue,
            };
            if !entry_exists_in(&mut scratch, ell, &v)? {
                continue;
            }
            let labels: Vec<Label> = v.iter().copied().collect();
            let mut menus: Vec<((BitWord, BitWord), Vec<(BitWord, usize)>)> = Vec::new();
            for (x, a) in labels.iter().enumerate() {
                for b in labels.iter().skip(x + 1) {
                    let support = scratch.support(ell, *a, *b)?.to_vec();
                    let ea = scratch.restriction(ell, *a)?;
                    let eb = scratch.restriction(ell, *b)?;
                    let key = if ea <= eb { (ea, eb) } else { (eb, ea) };
                    menus.push((key, support));
                }
            }
            // depth-first over (pair, slot) choices
            struct Frame {
                slot: usize,
                h: Vec<BTreeMap<(BitWord, BitWord), usize>>,
                g: Vec<BTreeMap<(BitWord, BitWord), WordSet>>,
            }
            let total = menus.len() * 6;
            let mut stack = vec![Frame {
                slot: 0,
                h: vec![BTreeMap::new(); 6],
                g: vec![BTreeMap::new(); 6],
            }];
            while let Some(frame) = stack.pop() {
                budget.spend("catalog assignment enumeration")?;
                if frame.slot == total {
                    let m = MTuple::new(ell, 6, u.clone(), frame.h, frame.g)
                        .map_err(ForcingError::Tuple)?;
                    out.push(CatalogEntry {
                        ell,
                        v: v.clone(),
                        m,
                    });
                    if out.len() > caps.max_entries {
                        return Err(ForcingError::Budget(BudgetExceeded {
                            limit: caps.max_entries as u64,
                            what: "catalog entries".to_string(),
                        }));
                    }
                    continue;
                }
                let pair = frame.slot / 6;
                let index = frame.slot % 6;
                let (key, support) = &menus[pair];
                'choices: for (sigma, tree) in support {
                    for i in 0..index {
                        if frame.g[i][key].contains(sigma) {
                            continue 'choices;
                        }
                    }
                    let mut h = frame.h.clone();
                    let mut g = frame.g.clone();
                    h[index].insert(key.clone(), *tree);
                    g[index].insert(key.clone(), WordSet::from_words(ell, [sigma.clone()])?);
                    stack.push(Frame {
                        slot: frame.slot + 1,
                        h,
                        g,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Draws up to `count` valid tuples at the condition's level with at
/// least five nodes: translated label subsets with witnesses from the
/// condition's own pools.
pub fn harvest_mtuples(
    p: &Condition,
    count: usize,
    seed: u64,
) -> Result<Vec<MTuple>, ForcingError> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scratch = Scratch::new(p);
    let mut out = Vec::new();
    let labels: Vec<Label> = p.w.iter().copied().collect();
    let mut tries = 0usize;
    while out.len() < count && tries < count * 20 {
        tries += 1;
        let size = rng.gen_range(5..=labels.len());
        let mut v: BTreeSet<Label> = BTreeSet::new();
        while v.len() < size {
            v.insert(labels[rng.gen_range(0..labels.len())]);
        }
        let rho = BitWord::random(p.n, &mut rng);
        let mut u = WordSet::new(p.n);
        for a in &v {
            u.insert(p.eta(*a).unwrap().add(&rho)?)?;
        }
        let vlist: Vec<Label> = v.iter().copied().collect();
        let mut h = vec![BTreeMap::new(); 6];
        let mut g = vec![BTreeMap::new(); 6];
        let mut ok = true;
        for (x, a) in vlist.iter().enumerate() {
            for b in vlist.iter().skip(x + 1) {
                let support = scratch.support(p.n, *a, *b)?.to_vec();
                let mut distinct: Vec<(BitWord, usize)> = Vec::new();
                for (s, m) in support {
                    let shifted = s.add(&rho)?;
                    if distinct.iter().all(|(d, _)| *d != shifted) {
                        distinct.push((shifted, m));
                    }
                }
                if distinct.len() < 6 {
                    ok = false;
                    break;
                }
                let ea = p.eta(*a).unwrap().add(&rho)?;
                let eb = p.eta(*b).unwrap().add(&rho)?;
                let key = if ea <= eb { (ea, eb) } else { (eb, ea) };
                for i in 0..6 {
                    let pick = rng.gen_range(0..distinct.len());
                    let (sigma, tree) = distinct.remove(pick);
                    h[i].insert(key.clone(), tree);
                    g[i].insert(key.clone(), WordSet::from_words(p.n, [sigma])?);
                }
            }
            if !ok {
                break;
            }
        }
        if ok {
            out.push(MTuple::new(p.n, 6, u, h, g).map_err(ForcingError::Tuple)?);
        }
    }
    Ok(out)
}

/// Recovers the membership of a level tuple in the derived catalog: the
/// unique translation onto the condition's words and the labels it
/// lands on. Any failure past the preconditions is an alarm, not a
/// plain error: the derivation says it cannot happen over a valid
/// condition.
pub fn recover_membership(
    p: &Condition,
    m: &MTuple,
) -> Result<(BitWord, BTreeSet<Label>), ForcingError> {
    if m.ell() != p.n {
        return Err(ForcingError::Precondition(format!(
            "tuple level {} is not the condition level {}",
            m.ell(),
            p.n
        )));
    }
    if m.u().size() < 5 {
        return Err(ForcingError::Precondition(format!(
            "tuple carries {} nodes, below five",
            m.u().size()
        )));
    }
    let cat = p.tuple_catalog(CatalogBounds {
        max_u: m.u().size().max(6),
        max_g: 1,
        max_iota: 6,
    });
    let tuple_report = validate_mtuple(m, &cat);
    if !tuple_report.all_ok() {
        return Err(ForcingError::Precondition(format!(
            "tuple invalid over the condition's trees: {}",
            tuple_report
                .failures()
                .map(|f| f.id.clone())
                .collect::<Vec<_>>()
                .join(", ")
        )));
    }
    // the node sums must be label-word sums
    let eta_words = WordSet::from_words(p.n, p.eta.values().cloned())?;
    let eta_sums = eta_words.pair_sums();
    for x in m.u().iter() {
        for y in m.u().iter() {
            if !eta_sums.contains(&x.add(y)?) {
                return Err(ForcingError::RecoveryAlarm(format!(
                    "node sum {} is not a label-word sum",
                    x.add(y)?
                )));
            }
        }
    }
    let rho = unique_translate(m.u(), &eta_words).map_err(|e| match e {
        Gf2Error::TranslateInconsistency => ForcingError::RecoveryAlarm(
            "translation onto the label words does not exist".to_string(),
        ),
        other => ForcingError::Gf2(other),
    })?;
    let translated = m.u().translate(&rho)?;
    let v: BTreeSet<Label> =
        p.w.iter()
            .filter(|a| translated.contains(p.eta(**a).unwrap()))
            .copied()
            .collect();
    let entry = CatalogEntry {
        ell: p.n,
        v: v.clone(),
        m: translate_m(m, &rho).map_err(ForcingError::Tuple)?,
    };
    let entry_report = validate_entry(p, &entry);
    if !entry_report.all_ok() {
        return Err(ForcingError::RecoveryAlarm(format!(
            "recovered entry fails: {}",
            entry_report
                .failures()
                .map(|f| f.id.clone())
                .collect::<Vec<_>>()
                .join(", ")
        )));
    }
    Ok((rho, v))
}

/// The delta-system compatibility report between two conditions.
pub fn check_delta(
    p: &Condition,
    q: &Condition,
    model: &FiniteModel,
) -> Result<Report, ForcingError> {
    let mut report = Report::new();
    let kernel: BTreeSet<Label> = p.w.intersection(&q.w).copied().collect();
    let pl: Vec<Label> = p.w.iter().copied().collect();
    let ql: Vec<Label> = q.w.iter().copied().collect();

    // the order isomorphism between the label sets
    if pl.len() != ql.len() {
        report.fail(
            "delta.12.kernel",
            format!("label counts {} and {}", pl.len(), ql.len()),
        );
        return Ok(report);
    }
    let pi: BTreeMap<Label, Label> = pl.iter().copied().zip(ql.iter().copied()).collect();
    let fixes_kernel = kernel.iter().all(|a| pi.get(a) == Some(a));
    report.record(
        "delta.12.kernel",
        fixes_kernel,
        "the order isomorphism moves a kernel label",
    );

    // equal numeric parameters, trees, r-values
    {
        let mut bad = Vec::new();
        if p.n != q.n {
            bad.push(format!("levels {} and {}", p.n, q.n));
        }
        if p.iota != q.iota {
            bad.push(format!("index counts {} and {}", p.iota, q.iota));
        }
        if p.tree_count() != q.tree_count() {
            bad.push(format!(
                "tree counts {} and {}",
                p.tree_count(),
                q.tree_count()
            ));
        }
        if p.trees != q.trees {
            bad.push("tree families differ".to_string());
        }
        if p.r != q.r {
            bad.push("r-values differ".to_string());
        }
        report.record("delta.13.parameters", bad.is_empty(), bad.join("; "));
    }

    // rank data transported by the isomorphism
    {
        let mut eval = RankEval::new(model);
        let mut bad = Vec::new();
        for v in label_subsets_of(&p.w) {
            let image: BTreeSet<Label> = v.iter().map(|a| pi[a]).collect();
            for side in [&v, &image] {
                for a in side {
                    if *a >= model.size {
                        return Err(ForcingError::Model(ModelError::OutsideUniverse(
                            *a, model.size,
                        )));
                    }
                }
            }
            let r0 = eval.rank(&v)?;
            let r1 = eval.rank(&image)?;
            if r0 != r1 {
                bad.push(format!("rank of {v:?} is {r0}, of the image {r1}"));
                continue;
            }
            if !r0.is_infinite() {
                let w0 = eval.witness(&v)?;
                let w1 = eval.witness(&image)?;
                if (w0.zeta, w0.k) != (w1.zeta, w1.k) {
                    bad.push(format!("witness of {v:?} moves under the isomorphism"));
                }
            }
        }
        report.record(
            "delta.14b.rank-transport",
            bad.is_empty(),
            bad.first().cloned().unwrap_or_default(),
        );
    }

    // words and witness structure transported
    {
        let mut bad = Vec::new();
        for a in &pl {
            if p.eta(*a) != q.eta(pi[a]) {
                bad.push(format!("eta[{a}] differs from eta[{}]", pi[a]));
            }
        }
        report.record(
            "delta.14c.eta-transport",
            bad.is_empty(),
            bad.first().cloned().unwrap_or_default(),
        );
        let mut bad = Vec::new();
        for (a, b) in p.pairs() {
            for i in 0..p.iota.min(q.iota) {
                if p.g_at(i, a, b) != q.g_at(i, pi[&a], pi[&b])
                    || p.h_at(i, a, b) != q.h_at(i, pi[&a], pi[&b])
                {
                    bad.push(format!("slice {i} differs at ({a}, {b})"));
                }
            }
        }
        report.record(
            "delta.14d.gh-transport",
            bad.is_empty(),
            bad.first().cloned().unwrap_or_default(),
        );
    }

    // equal derived catalogs, through entry existence over transported
    // label sets at every feasible level
    {
        let mut bad = Vec::new();
        let mut sp = Scratch::new(p);
        let mut sq = Scratch::new(q);
        'outer: for ell in feasible_levels(p) {
            for v in label_subsets(p, 7) {
                let image: BTreeSet<Label> = v.iter().map(|a| pi[a]).collect();
                if entry_exists_in(&mut sp, ell, &v)? != entry_exists_in(&mut sq, ell, &image)? {
                    bad.push(format!("entry existence differs at level {ell} over {v:?}"));
                    break 'outer;
                }
            }
        }
        report.record(
            "delta.15.catalog",
            bad.is_empty(),
            bad.first().cloned().unwrap_or_default(),
        );
    }

    // rank-minus-one sets over the kernel and one moved label never put
    // their witness slot on the moved label's position
    {
        let mut eval = RankEval::new(model);
        let mut bad = Vec::new();
        for side in [&p.w, &q.w] {
            let moved: Vec<Label> = side.difference(&kernel).copied().collect();
            for delta in &moved {
                for v in kernel_subsets(&kernel) {
                    let mut joint: BTreeSet<Label> = v.clone();
                    joint.insert(*delta);
                    if eval.rank(&joint)? == Rank::MinusOne {
                        let witness = eval.witness(&joint)?;
                        let position = joint.iter().filter(|x| **x < *delta).count();
                        if witness.k == position {
                            bad.push(format!(
                                "rank-minus-one set {joint:?} has its witness slot on the moved label {delta}"
                            ));
                        }
                    }
                }
            }
        }
        report.record(
            "delta.16.slot-clash",
            bad.is_empty(),
            bad.first().cloned().unwrap_or_default(),
        );
    }
    Ok(report)
}

fn label_subsets_of(w: &BTreeSet<Label>) -> Vec<BTreeSet<Label>> {
    let labels: Vec<Label> = w.iter().copied().collect();
    let mut out = Vec::new();
    for mask in 1u32..(1 << labels.len().min(20)) {
        out.push(
            labels
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, a)| *a)
                .collect(),
        );
    }
    out
}

fn kernel_subsets(kernel: &BTreeSet<Label>) -> Vec<BTreeSet<Label>> {
    let mut out = label_subsets_of(kernel);
    out.push(BTreeSet::new());
    out
}

/// An isomorphic copy of the condition under an order-preserving
/// relabeling that fixes the declared kernel pointwise and moves every
/// other label outside the original set.
pub fn delta_twin(
    p: &Condition,
    relabel: &BTreeMap<Label, Label>,
) -> Result<Condition, ForcingError> {
    for a in &p.w {
        if !relabel.contains_key(a) {
            return Err(ForcingError::BadRelabel(format!("label {a} unmapped")));
        }
    }
    let targets: Vec<Label> = p.w.iter().map(|a| relabel[a]).collect();
    let mut sorted = targets.clone();
    sorted.sort();
    sorted.dedup();
    if sorted.len() != targets.len() || targets != sorted {
        return Err(ForcingError::BadRelabel(
            "targets repeat or invert the label order".to_string(),
        ));
    }
    for a in &p.w {
        if relabel[a] != *a && p.w.contains(&relabel[a]) {
            return Err(ForcingError::BadRelabel(format!(
                "moved label {a} lands on {} inside the original set",
                relabel[a]
            )));
        }
    }
    let w: BTreeSet<Label> = targets.into_iter().collect();
    let eta: BTreeMap<Label, BitWord> =
        p.eta.iter().map(|(a, e)| (relabel[a], e.clone())).collect();
    let mut h: Vec<BTreeMap<(Label, Label), usize>> = vec![BTreeMap::new(); p.iota];
    let mut g: Vec<BTreeMap<(Label, Label), WordSet>> = vec![BTreeMap::new(); p.iota];
    for (a, b) in p.pairs() {
        let key = label_pair(relabel[&a], relabel[&b]);
        for i in 0..p.iota {
            h[i].insert(key, p.h_at(i, a, b).unwrap());
            g[i].insert(key, p.g_at(i, a, b).unwrap().clone());
        }
    }
    Condition::from_parts(w, p.n, p.iota, eta, p.trees.clone(), p.r.clone(), h, g)
}

/// Amalgamates two delta-system-compatible conditions into a common
/// extension: joint refinements over the union label set, fresh words
/// with independent tails anchored on both sides, cross pairs on fresh
/// trees, and everything else carried along.
pub fn amalgamate(
    p: &Condition,
    q: &Condition,
    ib: &IndexedBase,
    model: &FiniteModel,
    _cfg: &BuildConfig,
) -> Result<Condition, ForcingError> {
    let delta = check_delta(p, q, model)?;
    if !delta.all_ok() {
        return Err(ForcingError::IncompatibilityRisk(delta.render_text()));
    }
    let iota = p.iota;
    let w: BTreeSet<Label> = p.w.union(&q.w).copied().collect();
    let only_p: Vec<Label> = p.w.difference(&q.w).copied().collect();
    let only_q: Vec<Label> = q.w.difference(&p.w).copied().collect();
    let ell = p.n + 1;
    let sorted: Vec<Label> = w.iter().copied().collect();
    let mut towers: BTreeMap<(usize, (Label, Label)), WordSet> = BTreeMap::new();
    let fresh = fresh_members_for(ib, iota, ell, &BuildConfig::default())?;
    for (x, a) in sorted.iter().enumerate() {
        for b in sorted.iter().skip(x + 1) {
            for i in 0..iota {
                let member = if p.w.contains(a) && p.w.contains(b) {
                    canonical_extension(ib.component(i), p.g_at(i, *a, *b).unwrap(), ell)?
                } else if q.w.contains(a) && q.w.contains(b) {
                    canonical_extension(ib.component(i), q.g_at(i, *a, *b).unwrap(), ell)?
                } else {
                    fresh[i].clone()
                };
                towers.insert((i, (*a, *b)), member);
            }
        }
    }
    // word anchors: the first condition's words in label order, then the
    // second side's fresh labels
    let mut eta_anchors: Vec<(Label, BitWord)> =
        p.w.iter()
            .map(|a| (*a, p.eta(*a).unwrap().clone()))
            .collect();
    for b in &only_q {
        eta_anchors.push((*b, q.eta(*b).unwrap().clone()));
    }
    let assembly = assemble_words(&towers, &eta_anchors, ell, iota)?;
    // tree assignments: both sides keep theirs; cross pairs take fresh
    // trees through the difference-pair bijection
    let m_old = p.tree_count();
    let mut cross_index: BTreeMap<(Label, Label), usize> = BTreeMap::new();
    for (x, a) in only_p.iter().enumerate() {
        for (y, b) in only_q.iter().enumerate() {
            cross_index.insert(label_pair(*a, *b), m_old + x * only_q.len() + y);
        }
    }
    let mut h: Vec<BTreeMap<(Label, Label), usize>> = vec![BTreeMap::new(); iota];
    for (x, a) in sorted.iter().enumerate() {
        for b in sorted.iter().skip(x + 1) {
            for (i, hmap) in h.iter_mut().enumerate() {
                let value = if p.w.contains(a) && p.w.contains(b) {
                    p.h_at(i, *a, *b).unwrap()
                } else if q.w.contains(a) && q.w.contains(b) {
                    q.h_at(i, *a, *b).unwrap()
                } else {
                    cross_index[&label_pair(*a, *b)]
                };
                hmap.insert((*a, *b), value);
            }
        }
    }
    let tree_count = m_old + only_p.len() * only_q.len();
    let trees = trees_from_levels(&w, &assembly.etas, &assembly.g, &h, assembly.n, tree_count)?;
    let mut r = p.r.clone();
    r.resize(tree_count, assembly.n);
    Condition::from_parts(w, assembly.n, iota, assembly.etas, trees, r, h, assembly.g)
}

/// The limit data of a finite chain: longest words per label, the final
/// tree family, and the largeness evidence re-checked on the last
/// condition.
#[derive(Debug, Clone)]
pub struct ChainLimit {
    pub eta: BTreeMap<Label, BitWord>,
    pub trees: Vec<FiniteTree>,
}

pub fn chain_limit(chain: &[Condition], ib: &IndexedBase) -> Result<ChainLimit, ForcingError> {
    if chain.is_empty() {
        return Err(ForcingError::Precondition("empty chain".to_string()));
    }
    for (i, pair) in chain.windows(2).enumerate() {
        if !leq(&pair[0], &pair[1], ib) {
            return Err(ForcingError::ChainNotOrdered(i));
        }
    }
    let last = chain.last().unwrap();
    // coherence along the chain is the order's business; re-checked here
    for p in chain {
        for a in &p.w {
            if !p.eta(*a).unwrap().is_prefix_of(last.eta(*a).unwrap()) {
                return Err(ForcingError::Malformed(format!(
                    "word of label {a} does not cohere along the chain"
                )));
            }
        }
    }
    // largeness evidence: every pair's witnesses land in the assigned tree
    for (a, b) in last.pairs() {
        for i in 0..last.iota {
            let m = last.h_at(i, a, b).unwrap();
            let gset = last.g_at(i, a, b).unwrap();
            for side in [a, b] {
                let eta = last.eta(side).unwrap();
                for sigma in gset.iter() {
                    if !last.trees[m].leaves().contains(&eta.add(sigma)?) {
                        return Err(ForcingError::Malformed(format!(
                            "witness of ({a}, {b}) escapes tree {m}"
                        )));
                    }
                }
            }
        }
    }
    Ok(ChainLimit {
        eta: last.eta.clone(),
        trees: last.trees.clone(),
    })
}
