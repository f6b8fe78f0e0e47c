//! The unique-translate search and its brute-force oracle.
//!
//! Builds an independent target set, hides a translated subset inside
//! it, and recovers the translation constructively; the exhaustive scan
//! confirms uniqueness. Also shows the failure modes: small sources and
//! uncovered pairwise sums are rejected with named preconditions.
//!
//! Run with: cargo run --example unique_translate

use ndlab::gf2::{
    brute_force_translate, extend_independent, unique_translate, BitWord, TailMode, WordSet,
    BRUTE_FORCE_CAP,
};

fn main() {
    let ell = 9;
    // an independent target: anchored words with independent tails
    let anchors: Vec<BitWord> = ["0", "1", "01", "11", "101", "011"]
        .iter()
        .map(|s| BitWord::parse(s).unwrap())
        .collect();
    let target_words = extend_independent(3, ell, 6, &anchors, TailMode::StandardBasis).unwrap();
    let target = WordSet::from_words(ell, target_words.clone()).unwrap();
    println!("target B (independent):");
    for w in target.iter() {
        println!("  {w}");
    }

    // hide a translated five-element subset
    let shift = BitWord::parse("101101011").unwrap();
    let source = WordSet::from_words(
        ell,
        target_words.iter().take(5).map(|w| w.add(&shift).unwrap()),
    )
    .unwrap();
    println!("\nsource A = (five of B) + {shift}:");
    for w in source.iter() {
        println!("  {w}");
    }

    let found = unique_translate(&source, &target).unwrap();
    println!("\nconstructive search finds x = {found}");

    let oracle = brute_force_translate(&source, &target, BRUTE_FORCE_CAP).unwrap();
    println!(
        "exhaustive scan over 2^{ell} finds {} translate(s):",
        oracle.len()
    );
    for x in &oracle {
        println!("  {x}");
    }
    assert_eq!(oracle.len(), 1);
    assert!(oracle.contains(&found));

    // a four-element source is refused: five is the sharp threshold
    let small = WordSet::from_words(
        ell,
        target_words.iter().take(4).map(|w| w.add(&shift).unwrap()),
    )
    .unwrap();
    match unique_translate(&small, &target) {
        Err(e) => println!("\nfour-element source: {e}"),
        Ok(_) => unreachable!(),
    }
}
