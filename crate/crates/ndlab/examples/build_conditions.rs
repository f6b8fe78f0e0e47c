//! The density constructions: a seed condition over five labels, a
//! one-label extension, and an index bump over the omega-indexed base,
//! each validated against all eleven demands.
//!
//! Run with: cargo run --example build_conditions

use ndlab::bases::IndexedBase;
use ndlab::forcing::{add_ordinal, bump_iota, genesis, leq, validate, BuildConfig, ValidateOpts};
use ndlab::splitrank::bundled_model;

fn main() {
    let model = bundled_model();
    let ib = IndexedBase::omega_singleton();
    let cfg = BuildConfig {
        seed: 7,
        randomize: true,
    };
    let opts = ValidateOpts::default();

    let p = genesis(&[0, 1, 2, 3, 4], &ib, &cfg).unwrap();
    println!(
        "genesis: labels {:?}, level {}, index count {}, {} trees",
        p.labels(),
        p.level(),
        p.iota(),
        p.tree_count()
    );
    let report = validate(&p, &model, &ib, &opts).unwrap();
    print!("{}", report.render_text());
    assert!(report.all_ok());

    let q = add_ordinal(&p, 6, &ib, &cfg).unwrap();
    println!(
        "\nextension by label 6: level {} -> {}, trees {} -> {}",
        p.level(),
        q.level(),
        p.tree_count(),
        q.tree_count()
    );
    assert!(leq(&p, &q, &ib));
    assert!(validate(&q, &model, &ib, &opts).unwrap().all_ok());
    println!("extends its input and validates");

    let bumped = bump_iota(&p, &ib, &cfg).unwrap();
    println!(
        "\nindex bump: index count {} -> {}, trees {} -> {}",
        p.iota(),
        bumped.iota(),
        p.tree_count(),
        bumped.tree_count()
    );
    assert!(leq(&p, &bumped, &ib));
    assert!(validate(&bumped, &model, &ib, &opts).unwrap().all_ok());
    println!("extends its input and validates");
}
