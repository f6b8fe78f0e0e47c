//! Delta-system twins and amalgamation: an isomorphic copy over fresh
//! labels, the sixteen-point compatibility report, and a common
//! extension whose tree count follows the difference-square identity.
//!
//! Run with: cargo run --example amalgamation

use std::collections::BTreeMap;

use ndlab::bases::IndexedBase;
use ndlab::forcing::{
    amalgamate, check_delta, delta_twin, genesis, leq, validate, BuildConfig, Label, ValidateOpts,
};
use ndlab::splitrank::bundled_model;

fn main() {
    let model = bundled_model();
    let ib = IndexedBase::singleton_iota(6);
    let cfg = BuildConfig {
        seed: 41,
        randomize: true,
    };

    // kernel in the first model window, moved labels in the second;
    // the twin shifts the moved labels a whole window further, which
    // keeps every rank transported
    let p = genesis(&[0, 1, 2, 8, 9], &ib, &cfg).unwrap();
    let relabel: BTreeMap<Label, Label> = [(0, 0), (1, 1), (2, 2), (8, 16), (9, 17)]
        .into_iter()
        .collect();
    let q = delta_twin(&p, &relabel).unwrap();
    println!("twin labels: {:?} against {:?}", p.labels(), q.labels());

    let report = check_delta(&p, &q, &model).unwrap();
    println!("\ndelta-system compatibility:");
    print!("{}", report.render_text());
    assert!(report.all_ok());

    let r = amalgamate(&p, &q, &ib, &model, &cfg).unwrap();
    let moved = p.labels().len() - 3;
    println!(
        "\namalgam: labels {:?}, level {}, trees {} = {} + {}^2",
        r.labels(),
        r.level(),
        r.tree_count(),
        p.tree_count(),
        moved
    );
    assert_eq!(r.tree_count(), p.tree_count() + moved * moved);
    assert!(leq(&p, &r, &ib) && leq(&q, &r, &ib));
    let report = validate(&r, &model, &ib, &ValidateOpts::default()).unwrap();
    assert!(report.all_ok(), "{}", report.render_text());
    println!("extends both sides and passes every demand");
}
