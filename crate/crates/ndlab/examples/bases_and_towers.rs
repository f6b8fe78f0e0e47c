//! The two simple bases, bounded niceness verification, towers with
//! covers, and tower resynchronization.
//!
//! Run with: cargo run --example bases_and_towers

use ndlab::bases::{
    base_member, base_prec, check_nice, check_simple_base, resync_towers, tower_cover,
    BaseCheckCaps, BaseTag, IndexedBase, TowerTrunc,
};
use ndlab::gf2::WordSet;

fn main() {
    // membership and refinement in the perfect base
    let u = WordSet::parse(2, &["00", "01", "10"]).unwrap();
    let v = WordSet::parse(3, &["000", "001", "010", "011", "100", "101"]).unwrap();
    println!(
        "perfect base: |u| = {} member: {}",
        u.size(),
        base_member(BaseTag::Perfect, &u)
    );
    println!(
        "u refines to v (every node splits twice): {}",
        base_prec(BaseTag::Perfect, &u, &v)
    );

    // bounded verification of the base axioms and the niceness demands
    let caps = BaseCheckCaps {
        depth: 4,
        ..BaseCheckCaps::default()
    };
    for tag in [BaseTag::Singleton, BaseTag::Perfect] {
        let report = check_simple_base(&tag, &caps).unwrap();
        println!("\nbase axioms up to depth {} ({:?}):", caps.depth, tag);
        print!("{}", report.render_text());
    }
    let report = check_nice(&IndexedBase::perfect(), &caps).unwrap();
    println!("\nniceness of the one-component perfect base:");
    print!("{}", report.render_text());

    // towers: covers at a depth, and resynchronization onto shared lengths
    let a = TowerTrunc::new(
        BaseTag::Singleton,
        vec![
            WordSet::parse(1, &["0"]).unwrap(),
            WordSet::parse(3, &["010"]).unwrap(),
            WordSet::parse(5, &["01011"]).unwrap(),
        ],
    )
    .unwrap();
    let b = TowerTrunc::new(
        BaseTag::Singleton,
        vec![
            WordSet::parse(2, &["11"]).unwrap(),
            WordSet::parse(4, &["1101"]).unwrap(),
            WordSet::parse(6, &["110100"]).unwrap(),
        ],
    )
    .unwrap();
    println!("\ntower a levels at lengths {:?}", a.lengths());
    println!("tower b levels at lengths {:?}", b.lengths());
    let cover = tower_cover(&b, 8).unwrap();
    println!("cover of b at depth 8 has {} branches", cover.size());

    let resynced = resync_towers(&[a, b], 2).unwrap();
    let shared: Vec<usize> = resynced[0]
        .lengths()
        .intersection(&resynced[1].lengths())
        .copied()
        .collect();
    println!("after resynchronization the towers share lengths {shared:?}");
    assert!(shared.len() >= 2);
    assert_eq!(tower_cover(&resynced[1], 8).unwrap(), cover);
    println!("covers unchanged");
}
