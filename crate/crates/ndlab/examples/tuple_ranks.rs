//! Level tuples over a small tree family: catalog enumeration, the
//! derivative chain, and the non-disjointness rank with its translation
//! invariance.
//!
//! Run with: cargo run --example tuple_ranks

use ndlab::bases::{FiniteTree, IndexedBase};
use ndlab::gf2::{BitWord, WordSet};
use ndlab::mtuples::{
    derivative_chain, enumerate_catalog, ndrk, translate_m, Catalog, CatalogBounds,
};
use ndlab::Budget;

fn main() {
    // one tree whose leaves form a coset of a two-dimensional space with
    // a late difference, so node doubling stays feasible below the depth
    let tree = FiniteTree::from_level_set(
        4,
        WordSet::parse(4, &["0000", "0001", "1100", "1101"]).unwrap(),
    )
    .unwrap();
    let cat = Catalog::new(
        vec![tree],
        4,
        IndexedBase::singleton_iota(2),
        CatalogBounds {
            max_u: 3,
            max_g: 1,
            max_iota: 4,
        },
    )
    .unwrap();

    let mut budget = Budget::new(50_000_000);
    let tuples = enumerate_catalog(&cat, &mut budget).unwrap();
    println!("catalog: {} tuples within bounds", tuples.len());
    for ell in 1..=cat.depth {
        let count = tuples.iter().filter(|t| t.ell() == ell).count();
        println!("  level {ell}: {count}");
    }

    let stages = derivative_chain(&cat, &tuples, &mut budget).unwrap();
    println!("\nderivative chain sizes:");
    for (k, stage) in stages.iter().enumerate() {
        println!("  stage {k}: {} tuples", stage.len());
    }

    // the rank of a level-2 tuple, recomputed under every translation
    let sample = tuples.iter().find(|t| t.ell() == 2).unwrap();
    let rank = ndrk(sample, &cat, &mut Budget::new(50_000_000)).unwrap();
    println!(
        "\nsample tuple at level {} over u = {:?}",
        sample.ell(),
        sample.u()
    );
    println!("rank: {rank}");
    for rho in BitWord::all(2) {
        let shifted = translate_m(sample, &rho).unwrap();
        let r = ndrk(&shifted, &cat, &mut Budget::new(50_000_000)).unwrap();
        println!("  translated by {rho}: rank {r}");
        assert_eq!(r, rank);
    }
    println!("rank is translation-invariant");
}
