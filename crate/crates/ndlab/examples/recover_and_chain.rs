//! Membership recovery and finite chain limits: tuples harvested from a
//! condition recover their unique translation back onto the label
//! words, and a construction chain unions into coherent limit data.
//!
//! Run with: cargo run --example recover_and_chain

use ndlab::bases::IndexedBase;
use ndlab::forcing::{
    add_ordinal, chain_limit, genesis, harvest_mtuples, recover_membership, BuildConfig,
};

fn main() {
    let ib = IndexedBase::singleton_iota(6);
    let cfg = BuildConfig {
        seed: 3,
        randomize: true,
    };
    let p = genesis(&[0, 1, 2, 3, 4], &ib, &cfg).unwrap();

    println!(
        "harvesting tuples at level {} from the condition's own pools",
        p.level()
    );
    let tuples = harvest_mtuples(&p, 4, 99).unwrap();
    for (i, m) in tuples.iter().enumerate() {
        let (rho, v) = recover_membership(&p, m).unwrap();
        println!(
            "  tuple {i}: {} nodes, recovers labels {v:?} under rho = {rho}",
            m.u().size()
        );
        let moved = m.u().translate(&rho).unwrap();
        for a in &v {
            assert!(moved.contains(p.eta(*a).unwrap()));
        }
    }

    // a three-step chain and its limit
    let q = add_ordinal(&p, 5, &ib, &cfg).unwrap();
    let r = add_ordinal(&q, 6, &ib, &cfg).unwrap();
    let chain = vec![p.clone(), q.clone(), r.clone()];
    let limit = chain_limit(&chain, &ib).unwrap();
    println!(
        "\nchain levels {} -> {} -> {}; limit carries {} labels and {} trees",
        p.level(),
        q.level(),
        r.level(),
        limit.eta.len(),
        limit.trees.len()
    );
    for a in p.labels() {
        assert!(p.eta(*a).unwrap().is_prefix_of(&limit.eta[a]));
    }
    println!("every early word is an initial segment of its limit word");
}
