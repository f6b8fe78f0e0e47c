//! Command surface behind the `ndlab` binary: file-based wrappers over
//! the engine plus the seeded stress campaigns. Every command reports
//! through a fixed exit-code contract: 0 for success, 1 for demand or
//! property failures, 2 for input errors, 3 for exhausted search
//! budgets. All randomness flows through one seeded generator, so a
//! rerun with the same seed and arguments writes byte-identical files.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bases::{check_nice, check_simple_base, BaseCheckCaps, BaseTag, IndexedBase};
use crate::forcing::{
    add_ordinal, amalgamate, bump_iota, catalog, chain_limit, check_delta, delta_twin, genesis,
    leq, recover_membership, validate, BuildConfig, CatalogCaps, Condition, ForcingError, Label,
    ValidateOpts,
};
use crate::gf2::{
    brute_force_translate, gf2_rank, is_independent, unique_translate, BitWord, Gf2Error, WordSet,
    BRUTE_FORCE_CAP,
};
use crate::jsonio::{
    parse_base_spec, to_canonical_json, CatalogDto, ConditionDto, IoError, MTupleDto, ModelDto,
};
use crate::mtuples::{ndrk, MTuple};
use crate::splitrank::{bundled_model, verify_witness, FiniteModel, RankEval, Relation};
use crate::{Budget, Report};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

/// Global run options shared by the commands. The seed fully determines
/// every randomized campaign and construction.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub budget: u64,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            budget: 50_000_000,
            format: OutputFormat::Text,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Text,
    Json,
}

/// What a command produced: the process exit code and the text for
/// standard output.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub text: String,
}

impl Outcome {
    fn ok(text: impl Into<String>) -> Self {
        Outcome {
            code: EXIT_OK,
            text: text.into(),
        }
    }

    fn fail(text: impl Into<String>) -> Self {
        Outcome {
            code: EXIT_FAIL,
            text: text.into(),
        }
    }

    fn input(text: impl Into<String>) -> Self {
        Outcome {
            code: EXIT_INPUT,
            text: format!("input error: {}", text.into()),
        }
    }

    fn budget(text: impl Into<String>) -> Self {
        Outcome {
            code: EXIT_BUDGET,
            text: format!("budget exceeded: {}", text.into()),
        }
    }
}

fn forcing_outcome(err: ForcingError) -> Outcome {
    match err {
        ForcingError::Budget(e) => Outcome::budget(e.to_string()),
        ForcingError::RecoveryAlarm(msg) => Outcome::fail(format!("ALARM: {msg}")),
        other => Outcome::input(other.to_string()),
    }
}

/// Loads a model from a path or the literal `bundled`.
pub fn load_model(spec: &str) -> Result<FiniteModel, IoError> {
    if spec == "bundled" {
        return Ok(bundled_model());
    }
    let text = std::fs::read_to_string(spec)?;
    let dto: ModelDto = serde_json::from_str(&text)?;
    Ok(dto.into_model())
}

pub fn load_condition(path: &Path) -> Result<Condition, IoError> {
    let text = std::fs::read_to_string(path)?;
    let dto: ConditionDto = serde_json::from_str(&text)?;
    dto.into_condition()
}

pub fn write_condition(path: &Path, p: &Condition) -> Result<(), IoError> {
    std::fs::write(path, to_canonical_json(&ConditionDto::from_condition(p)))?;
    Ok(())
}

pub fn load_tuple(path: &Path) -> Result<MTuple, IoError> {
    let text = std::fs::read_to_string(path)?;
    let dto: MTupleDto = serde_json::from_str(&text)?;
    dto.into_tuple()
}

fn render_report(report: &Report, format: OutputFormat) -> String {
    match format {
        OutputFormat::Text => report.render_text(),
        OutputFormat::Json => to_canonical_json(report),
    }
}

/// Itemized demand verdicts for a condition file.
pub fn cmd_validate(
    cond_path: &Path,
    model_spec: &str,
    base_spec: &str,
    cfg: &RunConfig,
) -> Outcome {
    let model = match load_model(model_spec) {
        Ok(m) => m,
        Err(e) => return Outcome::input(e.to_string()),
    };
    let ib = match parse_base_spec(base_spec) {
        Ok(ib) => ib,
        Err(e) => return Outcome::input(e.to_string()),
    };
    let p = match load_condition(cond_path) {
        Ok(p) => p,
        Err(e) => return Outcome::input(e.to_string()),
    };
    let opts = ValidateOpts {
        budget: cfg.budget,
        ..ValidateOpts::default()
    };
    match validate(&p, &model, &ib, &opts) {
        Ok(report) => {
            let text = render_report(&report, cfg.format);
            if report.all_ok() {
                Outcome::ok(text)
            } else {
                Outcome::fail(text)
            }
        }
        Err(e) => forcing_outcome(e),
    }
}

/// Which construction a `construct` invocation runs.
pub enum ConstructKind<'a> {
    Genesis {
        labels: &'a [Label],
    },
    Add {
        input: &'a Path,
        beta: Label,
    },
    Bump {
        input: &'a Path,
    },
    Amalgamate {
        left: &'a Path,
        right: &'a Path,
        model_spec: &'a str,
    },
}

/// Runs a construction and writes the canonical condition file.
pub fn cmd_construct(
    kind: ConstructKind<'_>,
    base_spec: &str,
    out: &Path,
    cfg: &RunConfig,
) -> Outcome {
    let ib = match parse_base_spec(base_spec) {
        Ok(ib) => ib,
        Err(e) => return Outcome::input(e.to_string()),
    };
    let build = BuildConfig {
        seed: cfg.seed,
        randomize: true,
    };
    let built = match kind {
        ConstructKind::Genesis { labels } => genesis(labels, &ib, &build),
        ConstructKind::Add { input, beta } => match load_condition(input) {
            Ok(p) => add_ordinal(&p, beta, &ib, &build),
            Err(e) => return Outcome::input(e.to_string()),
        },
        ConstructKind::Bump { input } => match load_condition(input) {
            Ok(p) => bump_iota(&p, &ib, &build),
            Err(e) => return Outcome::input(e.to_string()),
        },
        ConstructKind::Amalgamate {
            left,
            right,
            model_spec,
        } => {
            let model = match load_model(model_spec) {
                Ok(m) => m,
                Err(e) => return Outcome::input(e.to_string()),
            };
            match (load_condition(left), load_condition(right)) {
                (Ok(p), Ok(q)) => amalgamate(&p, &q, &ib, &model, &build),
                (Err(e), _) | (_, Err(e)) => return Outcome::input(e.to_string()),
            }
        }
    };
    match built {
        Ok(p) => match write_condition(out, &p) {
            Ok(()) => Outcome::ok(format!(
                "wrote {} (labels {:?}, level {}, trees {})\n",
                out.display(),
                p.labels(),
                p.level(),
                p.tree_count()
            )),
            Err(e) => Outcome::input(e.to_string()),
        },
        Err(ForcingError::IncompatibilityRisk(msg)) => Outcome::fail(msg),
        Err(e) => forcing_outcome(e),
    }
}

/// Splitting rank of a label set under a model.
pub fn cmd_rank_split(model_spec: &str, set: &[u32], cfg: &RunConfig) -> Outcome {
    let model = match load_model(model_spec) {
        Ok(m) => m,
        Err(e) => return Outcome::input(e.to_string()),
    };
    let v: BTreeSet<u32> = set.iter().copied().collect();
    let mut eval = RankEval::new(&model);
    match eval.rank(&v) {
        Ok(rank) => {
            let witness_line = match eval.witness(&v) {
                Ok(w) => format!("witness: zeta {} slot {}\n", w.zeta, w.k),
                Err(_) => "witness: none (rank is the infinity marker)\n".to_string(),
            };
            let _ = cfg;
            Outcome::ok(format!("rank({v:?}) = {rank}\n{witness_line}"))
        }
        Err(e) => Outcome::input(e.to_string()),
    }
}

/// Non-disjointness rank of a tuple file over a catalog file.
pub fn cmd_rank_ndrk(catalog_path: &Path, tuple_path: &Path, cfg: &RunConfig) -> Outcome {
    let cat = match std::fs::read_to_string(catalog_path)
        .map_err(IoError::File)
        .and_then(|t| serde_json::from_str::<CatalogDto>(&t).map_err(IoError::Json))
        .and_then(CatalogDto::into_catalog)
    {
        Ok(cat) => cat,
        Err(e) => return Outcome::input(e.to_string()),
    };
    let m = match load_tuple(tuple_path) {
        Ok(m) => m,
        Err(e) => return Outcome::input(e.to_string()),
    };
    let mut budget = Budget::new(cfg.budget);
    match ndrk(&m, &cat, &mut budget) {
        Ok(rank) => Outcome::ok(format!(
            "ndrk = {rank}\nbudget used: {} of {}\n",
            budget.used(),
            budget.limit()
        )),
        Err(crate::mtuples::MError::Budget(e)) => Outcome::budget(e.to_string()),
        Err(e) => Outcome::input(e.to_string()),
    }
}

/// Bounded enumeration of a condition's derived catalog.
pub fn cmd_catalog(cond_path: &Path, max_v: usize, max_entries: usize, cfg: &RunConfig) -> Outcome {
    let p = match load_condition(cond_path) {
        Ok(p) => p,
        Err(e) => return Outcome::input(e.to_string()),
    };
    let caps = CatalogCaps { max_v, max_entries };
    let mut budget = Budget::new(cfg.budget);
    match catalog(&p, &caps, &mut budget) {
        Ok(entries) => {
            let mut text = String::new();
            let mut by_level: BTreeMap<usize, usize> = BTreeMap::new();
            for e in &entries {
                *by_level.entry(e.ell).or_default() += 1;
            }
            for (ell, count) in by_level {
                text.push_str(&format!("level {ell}: {count} entries\n"));
            }
            text.push_str(&format!("total: {} entries\n", entries.len()));
            Outcome::ok(text)
        }
        Err(ForcingError::Budget(e)) => Outcome::budget(e.to_string()),
        Err(e) => forcing_outcome(e),
    }
}

/// Membership recovery of a tuple file against a condition file.
pub fn cmd_recover(cond_path: &Path, tuple_path: &Path, _cfg: &RunConfig) -> Outcome {
    let p = match load_condition(cond_path) {
        Ok(p) => p,
        Err(e) => return Outcome::input(e.to_string()),
    };
    let m = match load_tuple(tuple_path) {
        Ok(m) => m,
        Err(e) => return Outcome::input(e.to_string()),
    };
    match recover_membership(&p, &m) {
        Ok((rho, v)) => Outcome::ok(format!("rho = {rho}\nlabels = {v:?}\n")),
        Err(ForcingError::RecoveryAlarm(msg)) => Outcome::fail(format!("ALARM: {msg}")),
        Err(e) => forcing_outcome(e),
    }
}

/// Chain verification and limit summary.
pub fn cmd_chain(paths: &[&Path], base_spec: &str, _cfg: &RunConfig) -> Outcome {
    let ib = match parse_base_spec(base_spec) {
        Ok(ib) => ib,
        Err(e) => return Outcome::input(e.to_string()),
    };
    let mut chain = Vec::new();
    for path in paths {
        match load_condition(path) {
            Ok(p) => chain.push(p),
            Err(e) => return Outcome::input(e.to_string()),
        }
    }
    match chain_limit(&chain, &ib) {
        Ok(limit) => {
            let mut text = String::new();
            for (label, word) in &limit.eta {
                text.push_str(&format!("label {label}: {} digits\n", word.len()));
            }
            text.push_str(&format!("trees: {}\n", limit.trees.len()));
            Outcome::ok(text)
        }
        Err(ForcingError::ChainNotOrdered(i)) => {
            Outcome::fail(format!("chain is not ordered at position {i}\n"))
        }
        Err(e) => forcing_outcome(e),
    }
}

/// Base axioms and niceness at a depth.
pub fn cmd_nice_check(base_spec: &str, depth: usize, cfg: &RunConfig) -> Outcome {
    let ib = match parse_base_spec(base_spec) {
        Ok(ib) => ib,
        Err(e) => return Outcome::input(e.to_string()),
    };
    let caps = BaseCheckCaps {
        depth,
        ..BaseCheckCaps::default()
    };
    let mut report = Report::new();
    let distinct: BTreeSet<BaseTag> = ib.tags().iter().copied().collect();
    for tag in distinct {
        match check_simple_base(&tag, &caps) {
            Ok(r) => report.merge(r),
            Err(e) => return Outcome::input(e.to_string()),
        }
    }
    match check_nice(&ib, &caps) {
        Ok(r) => report.merge(r),
        Err(e) => return Outcome::input(e.to_string()),
    }
    let text = render_report(&report, cfg.format);
    if report.all_ok() {
        Outcome::ok(text)
    } else {
        Outcome::fail(text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Campaign {
    Litlem,
    Ranks,
    Forcing,
    Amalg,
}

impl std::str::FromStr for Campaign {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "litlem" => Ok(Campaign::Litlem),
            "ranks" => Ok(Campaign::Ranks),
            "forcing" => Ok(Campaign::Forcing),
            "amalg" => Ok(Campaign::Amalg),
            other => Err(format!("unknown campaign {other:?}")),
        }
    }
}

/// A seeded property campaign: zero violations is success; every
/// violation carries its reproduction seed.
pub fn cmd_stress(campaign: Campaign, trials: usize, cfg: &RunConfig) -> Outcome {
    let violations = match campaign {
        Campaign::Litlem => stress_litlem(trials, cfg.seed),
        Campaign::Ranks => stress_ranks(trials, cfg.seed),
        Campaign::Forcing => stress_forcing(trials, cfg.seed),
        Campaign::Amalg => stress_amalg(trials, cfg.seed),
    };
    match violations {
        Ok(violations) => {
            let mut text = format!("{trials} trials, {} violations\n", violations.len());
            for v in violations.iter().take(10) {
                text.push_str(&format!("violation: {v}\n"));
            }
            if violations.is_empty() {
                Outcome::ok(text)
            } else {
                Outcome::fail(text)
            }
        }
        Err(e) => e,
    }
}

/// Random independent word set of the given size.
fn random_independent(len: usize, size: usize, rng: &mut ChaCha8Rng) -> Vec<BitWord> {
    let mut words: Vec<BitWord> = Vec::new();
    while words.len() < size {
        words.push(BitWord::random(len, rng));
        if gf2_rank(words.iter()) != words.len() {
            words.pop();
        }
    }
    words
}

/// The unique-translate lemma against its brute-force oracle, on both
/// lemma instances and noise.
pub fn stress_litlem(trials: usize, seed: u64) -> Result<Vec<String>, Outcome> {
    let mut violations = Vec::new();
    for trial in 0..trials {
        let mut rng =
            ChaCha8Rng::seed_from_u64(seed ^ (trial as u64).wrapping_mul(0x9e3779b97f4a7c15));
        let ell = rng.gen_range(5..=8);
        let bsize = rng.gen_range(5..=ell);
        let bwords = random_independent(ell, bsize, &mut rng);
        let b = WordSet::from_words(ell, bwords.clone()).unwrap();
        let (a, expected) = if rng.gen_bool(0.6) {
            // lemma instance: a translated subset of b
            let asize = rng.gen_range(5..=bsize);
            let x = BitWord::random(ell, &mut rng);
            let a = WordSet::from_words(ell, bwords.iter().take(asize).map(|w| w.add(&x).unwrap()))
                .unwrap();
            (a, Some(x))
        } else {
            // noise: a random set of arbitrary size
            let asize = rng.gen_range(1..=6);
            let mut a = WordSet::new(ell);
            while a.size() < asize {
                a.insert(BitWord::random(ell, &mut rng)).unwrap();
            }
            (a, None)
        };
        let oracle = brute_force_translate(&a, &b, BRUTE_FORCE_CAP)
            .map_err(|e| Outcome::input(e.to_string()))?;
        // independent precondition decision
        let b_sums = b.pair_sums();
        let preconds =
            a.size() >= 5 && is_independent(&b) && a.pair_sums().iter().all(|s| b_sums.contains(s));
        match unique_translate(&a, &b) {
            Ok(x) => {
                if !preconds {
                    violations.push(format!(
                        "trial {trial}: translate found without preconditions"
                    ));
                }
                if oracle.len() != 1 || !oracle.contains(&x) {
                    violations.push(format!(
                        "trial {trial}: oracle found {} translates against {x}",
                        oracle.len()
                    ));
                }
                if let Some(expected) = expected {
                    if x != expected {
                        violations.push(format!("trial {trial}: translate differs from the plant"));
                    }
                }
            }
            Err(Gf2Error::TranslatePrecondition(_)) => {
                if preconds {
                    violations.push(format!(
                        "trial {trial}: preconditions hold but were rejected"
                    ));
                }
            }
            Err(e) => violations.push(format!("trial {trial}: {e}")),
        }
    }
    Ok(violations)
}

/// Random small models: witnesses re-verify and raising the threshold
/// never raises the rank.
pub fn stress_ranks(trials: usize, seed: u64) -> Result<Vec<String>, Outcome> {
    let mut violations = Vec::new();
    for trial in 0..trials {
        let mut rng =
            ChaCha8Rng::seed_from_u64(seed ^ (trial as u64).wrapping_mul(0x517cc1b727220a95));
        let size = rng.gen_range(2..=6u32);
        let theta = rng.gen_range(2..=3usize);
        let mut relations = Vec::new();
        for zeta in 0..rng.gen_range(0..=3usize) {
            let arity = rng.gen_range(1..=size.min(3) as usize);
            let mut tuples = BTreeSet::new();
            for _ in 0..rng.gen_range(0..=6) {
                let mut t: BTreeSet<u32> = BTreeSet::new();
                while t.len() < arity {
                    t.insert(rng.gen_range(0..size));
                }
                tuples.insert(t.into_iter().collect::<Vec<_>>());
            }
            relations.push(Relation {
                zeta: zeta as u32,
                arity,
                tuples,
            });
        }
        let model = FiniteModel::new(size, theta, relations.clone());
        let high = FiniteModel::new(size, theta + 1, relations);
        let mut eval = RankEval::new(&model);
        let mut eval_high = RankEval::new(&high);
        for _ in 0..4 {
            let card = rng.gen_range(1..=size.min(3) as usize);
            let mut v: BTreeSet<u32> = BTreeSet::new();
            while v.len() < card {
                v.insert(rng.gen_range(0..size));
            }
            let rank = eval.rank(&v).map_err(|e| Outcome::input(e.to_string()))?;
            if let Ok(w) = eval.witness(&v) {
                if !verify_witness(&w, &model) {
                    violations.push(format!(
                        "trial {trial}: witness of {v:?} fails re-verification"
                    ));
                }
            } else if !rank.is_infinite() {
                violations.push(format!(
                    "trial {trial}: finite rank of {v:?} has no witness"
                ));
            }
            let rank_high = eval_high
                .rank(&v)
                .map_err(|e| Outcome::input(e.to_string()))?;
            if rank_high > rank {
                violations.push(format!(
                    "trial {trial}: raising theta raised the rank of {v:?}"
                ));
            }
        }
    }
    Ok(violations)
}

fn stress_label_pool(trial: usize, rng: &mut ChaCha8Rng) -> Vec<Label> {
    // alternate window-local pools (mixed finite ranks) and spread pools
    // (infinity-marker regime)
    let upper = if trial % 2 == 0 { 8 } else { 64 };
    let mut labels: BTreeSet<Label> = BTreeSet::new();
    while labels.len() < 5 {
        labels.insert(rng.gen_range(0..upper));
    }
    labels.into_iter().collect()
}

/// Seeded construction runs: every construction output validates and
/// extends its input.
pub fn stress_forcing(trials: usize, seed: u64) -> Result<Vec<String>, Outcome> {
    let model = bundled_model();
    let mut violations = Vec::new();
    let bases = [
        IndexedBase::singleton_iota(6),
        IndexedBase::omega_singleton(),
        IndexedBase::perfect(),
    ];
    let opts = ValidateOpts::default();
    for trial in 0..trials {
        let mut rng =
            ChaCha8Rng::seed_from_u64(seed ^ (trial as u64).wrapping_mul(0x2545f4914f6cdd1d));
        let ib = &bases[trial % bases.len()];
        let cfg = BuildConfig {
            seed: rng.gen(),
            randomize: true,
        };
        let labels = stress_label_pool(trial, &mut rng);
        let p = match genesis(&labels, ib, &cfg) {
            Ok(p) => p,
            Err(e) => {
                violations.push(format!("trial {trial}: genesis failed: {e}"));
                continue;
            }
        };
        let check = |name: &str,
                     cond: &Condition,
                     parent: Option<&Condition>,
                     violations: &mut Vec<String>| {
            match validate(cond, &model, ib, &opts) {
                Ok(report) if report.all_ok() => {}
                Ok(report) => violations.push(format!(
                    "trial {trial}: {name} fails {}",
                    report
                        .failures()
                        .map(|f| f.id.clone())
                        .collect::<Vec<_>>()
                        .join(", ")
                )),
                Err(e) => violations.push(format!("trial {trial}: {name} validation error: {e}")),
            }
            if let Some(parent) = parent {
                if !leq(parent, cond, ib) {
                    violations.push(format!("trial {trial}: {name} does not extend its input"));
                }
            }
        };
        check("genesis", &p, None, &mut violations);
        let mut beta = 0;
        while p.labels().contains(&beta) {
            beta += 1;
        }
        match add_ordinal(&p, beta, ib, &cfg) {
            Ok(q) => check("extension", &q, Some(&p), &mut violations),
            Err(e) => violations.push(format!("trial {trial}: extension failed: {e}")),
        }
        if ib.istar().is_omega() {
            match bump_iota(&p, ib, &cfg) {
                Ok(q) => check("index bump", &q, Some(&p), &mut violations),
                Err(e) => violations.push(format!("trial {trial}: index bump failed: {e}")),
            }
        }
    }
    Ok(violations)
}

/// Builds the standard twin layout: a condition whose kernel sits in the
/// first model window with its moved labels in a later window, and the
/// whole-window-shift relabeling for the twin.
pub fn twin_layout(
    kernel_size: usize,
    rng: &mut ChaCha8Rng,
) -> (Vec<Label>, BTreeMap<Label, Label>) {
    assert!(kernel_size <= 4);
    let mut kernel: BTreeSet<Label> = BTreeSet::new();
    while kernel.len() < kernel_size {
        kernel.insert(rng.gen_range(0..8));
    }
    let moved_count = 5 - kernel_size;
    let mut moved: BTreeSet<Label> = BTreeSet::new();
    while moved.len() < moved_count {
        moved.insert(rng.gen_range(8..16));
    }
    let mut labels: Vec<Label> = kernel.iter().copied().collect();
    labels.extend(moved.iter().copied());
    let mut relabel: BTreeMap<Label, Label> = kernel.iter().map(|a| (*a, *a)).collect();
    for m in &moved {
        relabel.insert(*m, *m + 8); // one window later, same offset
    }
    (labels, relabel)
}

/// Seeded twin pairs: compatibility, amalgamation validity, extension of
/// both sides, and the tree-count identity.
pub fn stress_amalg(trials: usize, seed: u64) -> Result<Vec<String>, Outcome> {
    let model = bundled_model();
    let ib = IndexedBase::singleton_iota(6);
    let opts = ValidateOpts::default();
    let mut violations = Vec::new();
    let kernel_sizes = [0usize, 2, 3];
    for trial in 0..trials {
        let mut rng =
            ChaCha8Rng::seed_from_u64(seed ^ (trial as u64).wrapping_mul(0xd1342543de82ef95));
        let kernel_size = kernel_sizes[trial % kernel_sizes.len()];
        let (labels, relabel) = twin_layout(kernel_size, &mut rng);
        let cfg = BuildConfig {
            seed: rng.gen(),
            randomize: true,
        };
        let p = match genesis(&labels, &ib, &cfg) {
            Ok(p) => p,
            Err(e) => {
                violations.push(format!("trial {trial}: genesis failed: {e}"));
                continue;
            }
        };
        let q = match delta_twin(&p, &relabel) {
            Ok(q) => q,
            Err(e) => {
                violations.push(format!("trial {trial}: twin failed: {e}"));
                continue;
            }
        };
        match check_delta(&p, &q, &model) {
            Ok(report) if report.all_ok() => {}
            Ok(report) => {
                violations.push(format!(
                    "trial {trial}: delta check fails {}",
                    report
                        .failures()
                        .map(|f| f.id.clone())
                        .collect::<Vec<_>>()
                        .join(", ")
                ));
                continue;
            }
            Err(e) => {
                violations.push(format!("trial {trial}: delta check error: {e}"));
                continue;
            }
        }
        let r = match amalgamate(&p, &q, &ib, &model, &cfg) {
            Ok(r) => r,
            Err(e) => {
                violations.push(format!("trial {trial}: amalgamation failed: {e}"));
                continue;
            }
        };
        let moved = p.labels().len() - kernel_size;
        if r.tree_count() != p.tree_count() + moved * moved {
            violations.push(format!(
                "trial {trial}: tree count {} instead of {}",
                r.tree_count(),
                p.tree_count() + moved * moved
            ));
        }
        if !leq(&p, &r, &ib) || !leq(&q, &r, &ib) {
            violations.push(format!("trial {trial}: amalgam does not extend both sides"));
        }
        match validate(&r, &model, &ib, &opts) {
            Ok(report) if report.all_ok() => {}
            Ok(report) => violations.push(format!(
                "trial {trial}: amalgam fails {}",
                report
                    .failures()
                    .map(|f| f.id.clone())
                    .collect::<Vec<_>>()
                    .join(", ")
            )),
            Err(e) => violations.push(format!("trial {trial}: amalgam validation error: {e}")),
        }
    }
    Ok(violations)
}
