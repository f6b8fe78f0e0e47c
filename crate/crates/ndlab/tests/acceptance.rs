//! The acceptance suite: one test per criterion, each printing a
//! pass/fail line with its elapsed time (visible under --nocapture).
//! Every tolerance is zero and pinned here; the stated time budgets are
//! calibrated for release builds (`cargo test --release --test acceptance`).

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ndlab::bases::{
    check_nice, check_simple_base, BaseCheckCaps, BaseTag, FiniteTree, IndexedBase, SimpleBaseRules,
};
use ndlab::cli::{self, twin_layout};
use ndlab::forcing::{
    add_ordinal, amalgamate, bump_iota, check_delta, delta_twin, genesis, harvest_mtuples, leq,
    recover_membership, validate, BuildConfig, Condition, ForcingError, Label, ValidateOpts,
};
use ndlab::gf2::{
    brute_force_translate, gf2_rank, is_independent, unique_translate, BitWord, Gf2Error, WordSet,
    BRUTE_FORCE_CAP,
};
use ndlab::mtuples::{
    derivative_chain, enumerate_catalog, extends, ndrk, restrict_m, translate_m, Catalog,
    CatalogBounds, MTuple,
};
use ndlab::splitrank::{bundled_model, verify_witness, FiniteModel, Rank, RankEval, Relation};
use ndlab::Budget;

fn conclude(criterion: &str, started: Instant, failures: &[String]) {
    let elapsed = started.elapsed();
    if failures.is_empty() {
        println!("criterion {criterion}: PASS ({elapsed:.2?})");
    } else {
        println!("criterion {criterion}: FAIL ({elapsed:.2?})");
        for f in failures.iter().take(10) {
            println!("  {f}");
        }
        panic!(
            "criterion {criterion} failed with {} violations",
            failures.len()
        );
    }
}

/// Criterion 1: the unique-translate search agrees exactly with the
/// brute-force oracle on 1000 seeded instances per length in 5..=8,
/// lemma instances and noise alike.
#[test]
fn criterion_1_translate_oracle_equivalence() {
    let started = Instant::now();
    let mut failures = Vec::new();
    for ell in 5..=8usize {
        for trial in 0..1000u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(0x1240_0000 + (ell as u64) * 100_000 + trial);
            let bsize = rng.gen_range(5..=ell);
            let mut bwords: Vec<BitWord> = Vec::new();
            while bwords.len() < bsize {
                bwords.push(BitWord::random(ell, &mut rng));
                if gf2_rank(bwords.iter()) != bwords.len() {
                    bwords.pop();
                }
            }
            let b = WordSet::from_words(ell, bwords.clone()).unwrap();
            let (a, planted) = if trial % 5 < 3 {
                let asize = rng.gen_range(5..=bsize);
                let x = BitWord::random(ell, &mut rng);
                let a =
                    WordSet::from_words(ell, bwords.iter().take(asize).map(|w| w.add(&x).unwrap()))
                        .unwrap();
                (a, Some(x))
            } else {
                let asize = rng.gen_range(1..=6);
                let mut a = WordSet::new(ell);
                while a.size() < asize {
                    a.insert(BitWord::random(ell, &mut rng)).unwrap();
                }
                (a, None)
            };
            let oracle = brute_force_translate(&a, &b, BRUTE_FORCE_CAP).unwrap();
            let b_sums = b.pair_sums();
            let preconditions = a.size() >= 5
                && is_independent(&b)
                && a.pair_sums().iter().all(|s| b_sums.contains(s));
            match unique_translate(&a, &b) {
                Ok(x) => {
                    if !preconditions {
                        failures.push(format!(
                            "ell {ell} trial {trial}: success without preconditions"
                        ));
                    }
                    if oracle.len() != 1 || !oracle.contains(&x) {
                        failures.push(format!(
                            "ell {ell} trial {trial}: oracle found {} translates",
                            oracle.len()
                        ));
                    }
                    if planted.is_some_and(|p| p != x) {
                        failures.push(format!("ell {ell} trial {trial}: wrong translate"));
                    }
                }
                Err(Gf2Error::TranslatePrecondition(_)) => {
                    if preconditions {
                        failures.push(format!("ell {ell} trial {trial}: spurious rejection"));
                    }
                }
                Err(e) => failures.push(format!("ell {ell} trial {trial}: {e}")),
            }
        }
    }
    conclude("1 (translate oracle equivalence)", started, &failures);
}

/// Criterion 2: 200 seeded runs each of the three constructions produce
/// conditions passing every demand under the bundled model, and the
/// extensions sit above their inputs.
#[test]
fn criterion_2_construction_validity() {
    let started = Instant::now();
    let model = bundled_model();
    let opts = ValidateOpts::default();
    let omega = IndexedBase::omega_singleton();
    let bases = [
        IndexedBase::singleton_iota(6),
        IndexedBase::omega_singleton(),
        IndexedBase::perfect(),
    ];
    let mut failures = Vec::new();
    let assert_valid =
        |name: String, p: &Condition, ib: &IndexedBase, failures: &mut Vec<String>| match validate(
            p, &model, ib, &opts,
        ) {
            Ok(report) if report.all_ok() => {}
            Ok(report) => failures.push(format!(
                "{name}: {}",
                report
                    .failures()
                    .map(|f| f.id.clone())
                    .collect::<Vec<_>>()
                    .join(", ")
            )),
            Err(e) => failures.push(format!("{name}: {e}")),
        };
    for trial in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x1240_2000 + trial);
        let ib = &bases[trial as usize % bases.len()];
        let upper = if trial % 2 == 0 { 8 } else { 64 };
        let mut labels: BTreeSet<Label> = BTreeSet::new();
        while labels.len() < 5 {
            labels.insert(rng.gen_range(0..upper));
        }
        let labels: Vec<Label> = labels.into_iter().collect();
        let cfg = BuildConfig {
            seed: rng.gen(),
            randomize: true,
        };

        let p = genesis(&labels, ib, &cfg).expect("genesis");
        assert_valid(format!("trial {trial} genesis"), &p, ib, &mut failures);

        let mut beta = 0;
        while p.labels().contains(&beta) {
            beta += 1;
        }
        let q = add_ordinal(&p, beta, ib, &cfg).expect("extension");
        assert_valid(format!("trial {trial} extension"), &q, ib, &mut failures);
        if !leq(&p, &q, ib) {
            failures.push(format!("trial {trial}: extension not above its input"));
        }

        let po = genesis(&labels, &omega, &cfg).expect("omega genesis");
        let bumped = bump_iota(&po, &omega, &cfg).expect("index bump");
        assert_valid(
            format!("trial {trial} index bump"),
            &bumped,
            &omega,
            &mut failures,
        );
        if !leq(&po, &bumped, &omega) {
            failures.push(format!("trial {trial}: bump not above its input"));
        }
    }
    conclude("2 (construction validity)", started, &failures);
}

/// Criterion 3: 100 seeded twin pairs over genesis and extended
/// conditions with kernel sizes 0, 2, 3 pass the delta-system check;
/// the amalgams validate, extend both sides, and hit the tree-count
/// identity exactly.
#[test]
fn criterion_3_amalgamation() {
    let started = Instant::now();
    let model = bundled_model();
    let ib = IndexedBase::singleton_iota(6);
    let opts = ValidateOpts::default();
    let kernel_sizes = [0usize, 2, 3];
    let mut failures = Vec::new();
    for trial in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x1240_3000 + trial);
        let kernel_size = kernel_sizes[trial as usize % kernel_sizes.len()];
        let (labels, mut relabel) = twin_layout(kernel_size, &mut rng);
        let cfg = BuildConfig {
            seed: rng.gen(),
            randomize: true,
        };
        let mut p = genesis(&labels, &ib, &cfg).expect("genesis");
        // extended conditions take a further label on the moved side
        if kernel_size > 0 && trial % 2 == 1 {
            let mut beta = 15;
            while p.labels().contains(&beta) {
                beta -= 1;
            }
            p = add_ordinal(&p, beta, &ib, &cfg).expect("extension");
            relabel.insert(beta, beta + 8);
        }
        let q = delta_twin(&p, &relabel).expect("twin");
        match check_delta(&p, &q, &model) {
            Ok(report) if report.all_ok() => {}
            Ok(report) => {
                failures.push(format!(
                    "trial {trial}: delta check {}",
                    report
                        .failures()
                        .map(|f| f.id.clone())
                        .collect::<Vec<_>>()
                        .join(", ")
                ));
                continue;
            }
            Err(e) => {
                failures.push(format!("trial {trial}: delta check {e}"));
                continue;
            }
        }
        let r = amalgamate(&p, &q, &ib, &model, &cfg).expect("amalgamation");
        let moved = p.labels().len() - kernel_size;
        if r.tree_count() != p.tree_count() + moved * moved {
            failures.push(format!(
                "trial {trial}: {} trees instead of {}",
                r.tree_count(),
                p.tree_count() + moved * moved
            ));
        }
        if !leq(&p, &r, &ib) || !leq(&q, &r, &ib) {
            failures.push(format!("trial {trial}: amalgam does not extend both sides"));
        }
        match validate(&r, &model, &ib, &opts) {
            Ok(report) if report.all_ok() => {}
            Ok(report) => failures.push(format!(
                "trial {trial}: amalgam fails {}",
                report
                    .failures()
                    .map(|f| f.id.clone())
                    .collect::<Vec<_>>()
                    .join(", ")
            )),
            Err(e) => failures.push(format!("trial {trial}: {e}")),
        }
    }
    conclude("3 (amalgamation)", started, &failures);
}

/// One tree whose leaves form a coset of a two-dimensional space with a
/// late difference: small enough to enumerate, rich enough for nonzero
/// ranks.
fn rankful_catalog() -> Catalog {
    let t = FiniteTree::from_level_set(
        4,
        WordSet::parse(4, &["0000", "0001", "1100", "1101"]).unwrap(),
    )
    .unwrap();
    Catalog::new(
        vec![t],
        4,
        IndexedBase::singleton_iota(1),
        CatalogBounds {
            max_u: 4,
            max_g: 2,
            max_iota: 4,
        },
    )
    .unwrap()
}

/// A depth-six catalog with one-dimensional differences: every rank is
/// zero and the chain dies immediately.
fn thin_catalog() -> Catalog {
    let t =
        FiniteTree::from_level_set(6, WordSet::parse(6, &["000000", "110000"]).unwrap()).unwrap();
    Catalog::new(
        vec![t],
        6,
        IndexedBase::singleton_iota(1),
        CatalogBounds {
            max_u: 4,
            max_g: 2,
            max_iota: 4,
        },
    )
    .unwrap()
}

/// Criterion 4: the rank-law suite on enumerated catalogs at depth up to
/// six with node sets capped at four and witnesses at two: the extension
/// order is strict, derivative stages shrink and are downward closed,
/// the rank is invariant under every translation, and restriction never
/// lowers it. The omega index-growth clause is exercised through a
/// bounds contrast.
#[test]
fn criterion_4_rank_laws() {
    let started = Instant::now();
    let mut failures = Vec::new();
    for (name, cat) in [("rankful", rankful_catalog()), ("thin", thin_catalog())] {
        let mut budget = Budget::new(200_000_000);
        let tuples = enumerate_catalog(&cat, &mut budget).expect("enumeration");
        if tuples.is_empty() {
            failures.push(format!("{name}: empty catalog"));
            continue;
        }
        let stages = derivative_chain(&cat, &tuples, &mut budget).expect("chain");
        if stages.len() > cat.depth + 2 {
            failures.push(format!("{name}: chain of length {}", stages.len()));
        }
        for pair in stages.windows(2) {
            if !pair[1].is_subset(&pair[0]) {
                failures.push(format!("{name}: a derivative stage grew"));
            }
        }
        let rank_of =
            |idx: usize| -> usize { stages.iter().take_while(|s| s.contains(&idx)).count() - 1 };
        // the extension order is irreflexive and transitive on the
        // related pairs, and stages are downward closed along it
        let mut related: Vec<(usize, usize)> = Vec::new();
        for (mi, m) in tuples.iter().enumerate() {
            if extends(m, m, &cat.ib) {
                failures.push(format!("{name}: tuple extends itself"));
            }
            for (ni, n) in tuples.iter().enumerate() {
                if m.ell() < n.ell() && extends(m, n, &cat.ib) {
                    related.push((mi, ni));
                }
            }
        }
        let related_set: BTreeSet<(usize, usize)> = related.iter().copied().collect();
        for &(a, b) in related.iter().take(4000) {
            for &(b2, c) in related.iter().take(4000) {
                if b == b2 && !related_set.contains(&(a, c)) {
                    failures.push(format!("{name}: extension order is not transitive"));
                }
            }
        }
        for stage in stages.iter().skip(1) {
            for &ni in stage {
                for &(mi, ni2) in &related {
                    if ni2 == ni && !stage.contains(&mi) {
                        failures.push(format!("{name}: stage not downward closed"));
                    }
                }
            }
        }
        // translation invariance, exhaustively over every translator
        let index: BTreeMap<&MTuple, usize> =
            tuples.iter().enumerate().map(|(i, t)| (t, i)).collect();
        for (mi, m) in tuples.iter().enumerate() {
            for rho in BitWord::all(m.ell()) {
                let t = translate_m(m, &rho).unwrap();
                match index.get(&t) {
                    Some(&ti) => {
                        if rank_of(ti) != rank_of(mi) {
                            failures.push(format!("{name}: translation by {rho} moved a rank"));
                        }
                    }
                    None => failures.push(format!("{name}: translate left the catalog")),
                }
            }
        }
        // restriction never lowers the rank
        for (mi, m) in tuples.iter().enumerate() {
            if m.u().size() < 3 {
                continue;
            }
            let nodes: Vec<BitWord> = m.u().iter().cloned().collect();
            for drop in 0..nodes.len() {
                let sub = WordSet::from_words(
                    m.ell(),
                    nodes
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| *i != drop)
                        .map(|(_, w)| w.clone()),
                )
                .unwrap();
                let restricted = restrict_m(m, &sub).unwrap();
                match index.get(&restricted) {
                    Some(&ri) => {
                        if rank_of(mi) > rank_of(ri) {
                            failures.push(format!("{name}: restriction lowered the rank"));
                        }
                    }
                    None => failures.push(format!("{name}: restriction left the catalog")),
                }
            }
        }
        if name == "rankful" && stages[1].is_empty() {
            failures.push("rankful: every rank is zero".to_string());
        }
    }
    // omega index growth: the same tuple gains rank only when the
    // bounds leave room for a bigger index count
    {
        let leaves: Vec<&str> = vec![
            "0000", "0001", "0010", "0011", "1100", "1101", "1110", "1111",
        ];
        let tree = FiniteTree::from_level_set(4, WordSet::parse(4, &leaves).unwrap()).unwrap();
        let tight = Catalog::new(
            vec![tree.clone()],
            4,
            IndexedBase::omega_singleton(),
            CatalogBounds {
                max_u: 3,
                max_g: 2,
                max_iota: 3,
            },
        )
        .unwrap();
        let roomy = Catalog::new(
            vec![tree],
            4,
            IndexedBase::omega_singleton(),
            CatalogBounds {
                max_u: 3,
                max_g: 2,
                max_iota: 4,
            },
        )
        .unwrap();
        // a three-index tuple at level 3 over u = {000, 110}
        let u = WordSet::parse(3, &["000", "110"]).unwrap();
        let key = (
            BitWord::parse("000").unwrap(),
            BitWord::parse("110").unwrap(),
        );
        let mut h = vec![BTreeMap::new(); 3];
        let mut g = vec![BTreeMap::new(); 3];
        for (i, sigma) in ["000", "001", "110"].iter().enumerate() {
            h[i].insert(key.clone(), 0usize);
            g[i].insert(key.clone(), WordSet::parse(3, &[*sigma]).unwrap());
        }
        let m = MTuple::new(3, 3, u, h, g).unwrap();
        let tight_rank = ndrk(&m, &tight, &mut Budget::new(200_000_000)).expect("tight rank");
        let roomy_rank = ndrk(&m, &roomy, &mut Budget::new(200_000_000)).expect("roomy rank");
        if tight_rank != 0 {
            failures.push(format!("omega: rank {tight_rank} without index room"));
        }
        if roomy_rank != 1 {
            failures.push(format!("omega: rank {roomy_rank} with index room"));
        }
    }
    conclude("4 (rank laws)", started, &failures);
}

/// Plain staged reference for the splitting rank, reimplemented here so
/// the production recursion is checked against an independent reading of
/// the definition. The recursive stage carries the threshold demand with
/// it, which keeps the stages decreasing.
fn reference_geq(model: &FiniteModel, sorted: &[u32], stage: u32) -> bool {
    let holding: Vec<&Relation> = model
        .relations
        .iter()
        .filter(|r| r.arity == sorted.len() && r.tuples.iter().any(|t| t == sorted))
        .collect();
    if holding.is_empty() {
        return true;
    }
    let substitutes = |rel: &Relation, k: usize| -> Vec<u32> {
        let mut probe = sorted.to_vec();
        (0..model.size)
            .filter(|&a| {
                probe[k] = a;
                rel.tuples.contains(&probe)
            })
            .collect()
    };
    for rel in &holding {
        for k in 0..sorted.len() {
            if substitutes(rel, k).len() < model.theta {
                return false;
            }
        }
    }
    if stage == 0 {
        return true;
    }
    holding.iter().all(|rel| {
        (0..sorted.len()).all(|k| {
            substitutes(rel, k).into_iter().any(|a| {
                if sorted.binary_search(&a).is_ok() {
                    return false;
                }
                let mut bigger = sorted.to_vec();
                let pos = bigger.binary_search(&a).unwrap_err();
                bigger.insert(pos, a);
                reference_geq(model, &bigger, stage - 1)
            })
        })
    })
}

fn reference_rank(model: &FiniteModel, sorted: &[u32]) -> Rank {
    if !reference_geq(model, sorted, 0) {
        return Rank::MinusOne;
    }
    for stage in 0..=model.size {
        if !reference_geq(model, sorted, stage + 1) {
            return Rank::Finite(stage);
        }
    }
    Rank::Infinite
}

/// Criterion 5: the memoized splitting rank equals the independent
/// reference on 1000 random models, and every witness re-verifies by
/// direct enumeration.
#[test]
fn criterion_5_splitting_rank_reference() {
    let started = Instant::now();
    let mut failures = Vec::new();
    for trial in 0..1000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x1240_5000 + trial);
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
        let model = FiniteModel::new(size, theta, relations);
        let mut eval = RankEval::new(&model);
        for _ in 0..4 {
            let card = rng.gen_range(1..=size.min(4) as usize);
            let mut v: BTreeSet<u32> = BTreeSet::new();
            while v.len() < card {
                v.insert(rng.gen_range(0..size));
            }
            let got = eval.rank(&v).unwrap();
            let sorted: Vec<u32> = v.iter().copied().collect();
            let want = reference_rank(&model, &sorted);
            if got != want {
                failures.push(format!(
                    "trial {trial}: rank {got} against reference {want}"
                ));
            }
            match eval.witness(&v) {
                Ok(w) => {
                    if !verify_witness(&w, &model) {
                        failures.push(format!("trial {trial}: witness fails re-verification"));
                    }
                }
                Err(_) => {
                    if !got.is_infinite() {
                        failures.push(format!("trial {trial}: finite rank without witness"));
                    }
                }
            }
        }
    }
    conclude("5 (splitting rank reference)", started, &failures);
}

/// Singleton rules demanding equal lengths: every accepted pair breaks
/// the restriction form of the order.
struct BrokenEqualLength;

impl SimpleBaseRules for BrokenEqualLength {
    fn member(&self, u: &WordSet) -> bool {
        u.size() == 1
    }
    fn prec(&self, u: &WordSet, v: &WordSet) -> bool {
        self.member(u) && self.member(v) && u.len() == v.len()
    }
    fn name(&self) -> String {
        "broken-equal-length".to_string()
    }
}

/// Criterion 6: the stock bases pass the base axioms and the niceness
/// demands at depth five with zero violations, and the planted-defect
/// base fails.
#[test]
fn criterion_6_niceness() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let caps = BaseCheckCaps {
        depth: 5,
        ..BaseCheckCaps::default()
    };
    for tag in [BaseTag::Singleton, BaseTag::Perfect] {
        let report = check_simple_base(&tag, &caps).expect("base check");
        for f in report.failures() {
            failures.push(f.id.clone());
        }
    }
    for ib in [
        IndexedBase::singleton_iota(6),
        IndexedBase::omega_singleton(),
        IndexedBase::perfect(),
    ] {
        let report = check_nice(&ib, &caps).expect("niceness check");
        for f in report.failures() {
            failures.push(f.id.clone());
        }
    }
    let planted = check_simple_base(&BrokenEqualLength, &caps).expect("planted check");
    if planted.all_ok() {
        failures.push("planted defect went unnoticed".to_string());
    }
    conclude("6 (base axioms and niceness)", started, &failures);
}

/// Criterion 7: over a 50-condition seeded corpus, every harvested tuple
/// at the condition's level with at least five nodes recovers a catalog
/// entry, and the recovery alarm never fires.
#[test]
fn criterion_7_membership_recovery() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let bases = [
        IndexedBase::singleton_iota(6),
        IndexedBase::omega_singleton(),
        IndexedBase::perfect(),
    ];
    for trial in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x1240_7000 + trial);
        let ib = &bases[trial as usize % bases.len()];
        let upper = if trial % 2 == 0 { 8 } else { 64 };
        let mut labels: BTreeSet<Label> = BTreeSet::new();
        while labels.len() < 5 {
            labels.insert(rng.gen_range(0..upper));
        }
        let labels: Vec<Label> = labels.into_iter().collect();
        let cfg = BuildConfig {
            seed: rng.gen(),
            randomize: true,
        };
        let mut p = genesis(&labels, ib, &cfg).expect("genesis");
        if trial % 3 == 2 {
            let mut beta = 0;
            while p.labels().contains(&beta) {
                beta += 1;
            }
            p = add_ordinal(&p, beta, ib, &cfg).expect("extension");
        }
        let tuples = harvest_mtuples(&p, 20, rng.gen()).expect("harvest");
        if tuples.is_empty() {
            failures.push(format!("trial {trial}: nothing harvested"));
        }
        for (ti, m) in tuples.iter().enumerate() {
            match recover_membership(&p, m) {
                Ok((rho, v)) => {
                    if v.len() < 5 {
                        failures.push(format!("trial {trial} tuple {ti}: tiny label set"));
                    }
                    let moved = m.u().translate(&rho).unwrap();
                    for a in &v {
                        if !moved.contains(p.etas().get(a).unwrap()) {
                            failures.push(format!(
                                "trial {trial} tuple {ti}: translation misses label {a}"
                            ));
                        }
                    }
                }
                Err(ForcingError::RecoveryAlarm(msg)) => {
                    failures.push(format!("trial {trial} tuple {ti}: ALARM {msg}"));
                }
                Err(e) => failures.push(format!("trial {trial} tuple {ti}: {e}")),
            }
        }
    }
    conclude("7 (membership recovery)", started, &failures);
}

/// Criterion 8: every construct command rerun with the same seed and
/// arguments writes byte-identical files, twenty repeats each.
#[test]
fn criterion_8_determinism() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let dir = tempfile::tempdir().unwrap();
    let cfg = cli::RunConfig {
        seed: 20_260_810,
        ..Default::default()
    };

    let genesis_path = dir.path().join("genesis.json");
    let out = cli::cmd_construct(
        cli::ConstructKind::Genesis {
            labels: &[0, 1, 2, 8, 9],
        },
        "omega",
        &genesis_path,
        &cfg,
    );
    assert_eq!(out.code, cli::EXIT_OK, "{}", out.text);
    let twin_path = dir.path().join("twin.json");
    {
        let p = cli::load_condition(&genesis_path).unwrap();
        let relabel: BTreeMap<Label, Label> = [(0, 0), (1, 1), (2, 2), (8, 16), (9, 17)]
            .into_iter()
            .collect();
        let q = delta_twin(&p, &relabel).unwrap();
        cli::write_condition(&twin_path, &q).unwrap();
    }

    let runs: Vec<(&str, cli::ConstructKind)> = vec![
        (
            "genesis",
            cli::ConstructKind::Genesis {
                labels: &[0, 1, 2, 8, 9],
            },
        ),
        (
            "add",
            cli::ConstructKind::Add {
                input: &genesis_path,
                beta: 10,
            },
        ),
        (
            "bump",
            cli::ConstructKind::Bump {
                input: &genesis_path,
            },
        ),
        (
            "amalgamate",
            cli::ConstructKind::Amalgamate {
                left: &genesis_path,
                right: &twin_path,
                model_spec: "bundled",
            },
        ),
    ];
    for (name, kind) in runs {
        let mut reference: Option<Vec<u8>> = None;
        for repeat in 0..20 {
            let out_path = dir.path().join(format!("{name}-{repeat}.json"));
            let kind_copy = match &kind {
                cli::ConstructKind::Genesis { labels } => cli::ConstructKind::Genesis { labels },
                cli::ConstructKind::Add { input, beta } => {
                    cli::ConstructKind::Add { input, beta: *beta }
                }
                cli::ConstructKind::Bump { input } => cli::ConstructKind::Bump { input },
                cli::ConstructKind::Amalgamate {
                    left,
                    right,
                    model_spec,
                } => cli::ConstructKind::Amalgamate {
                    left,
                    right,
                    model_spec,
                },
            };
            let out = cli::cmd_construct(kind_copy, "omega", &out_path, &cfg);
            if out.code != cli::EXIT_OK {
                failures.push(format!("{name} repeat {repeat}: exit {}", out.code));
                continue;
            }
            let bytes = std::fs::read(&out_path).unwrap();
            match &reference {
                None => reference = Some(bytes),
                Some(expected) => {
                    if *expected != bytes {
                        failures.push(format!("{name} repeat {repeat}: bytes differ"));
                    }
                }
            }
        }
    }
    conclude("8 (determinism)", started, &failures);
}
