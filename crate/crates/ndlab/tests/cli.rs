//! Exit-code contract and file round-trips of the command surface.

use std::collections::BTreeMap;

use ndlab::bases::{FiniteTree, IndexedBase};
use ndlab::cli::{self, RunConfig, EXIT_BUDGET, EXIT_FAIL, EXIT_INPUT, EXIT_OK};
use ndlab::forcing::{delta_twin, harvest_mtuples, Label};
use ndlab::gf2::WordSet;
use ndlab::jsonio::{to_canonical_json, CatalogDto, MTupleDto};
use ndlab::mtuples::{Catalog, CatalogBounds};

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig::default();
    let path = dir.path().join("p.json");
    let out = cli::cmd_construct(
        cli::ConstructKind::Genesis {
            labels: &[0, 1, 2, 3, 4],
        },
        "iota6",
        &path,
        &cfg,
    );
    assert_eq!(out.code, EXIT_OK, "{}", out.text);

    // a valid file validates with exit 0, in both output formats
    let out = cli::cmd_validate(&path, "bundled", "iota6", &cfg);
    assert_eq!(out.code, EXIT_OK, "{}", out.text);
    let json_cfg = RunConfig {
        format: cli::OutputFormat::Json,
        ..Default::default()
    };
    let out = cli::cmd_validate(&path, "bundled", "iota6", &json_cfg);
    assert_eq!(out.code, EXIT_OK);
    assert!(serde_json::from_str::<serde_json::Value>(&out.text).is_ok());

    // tampering with an r-value trips the validator with exit 1 and the
    // demand is named
    let text = std::fs::read_to_string(&path).unwrap();
    let tampered = text
        .replacen("\"r\": [", "\"r\": [0,", 1)
        .replacen(", 68]", "]", 1);
    let bad_path = dir.path().join("tampered.json");
    // splice: zero the first r-value, keeping the count
    let mut dto: ndlab::jsonio::ConditionDto = serde_json::from_str(&text).unwrap();
    dto.r[0] = 0;
    std::fs::write(&bad_path, to_canonical_json(&dto)).unwrap();
    let _ = tampered;
    let out = cli::cmd_validate(&bad_path, "bundled", "iota6", &cfg);
    assert_eq!(out.code, EXIT_FAIL);
    assert!(out.text.contains("demand.04"), "{}", out.text);

    // malformed digit strings are an input error, exit 2
    let mut dto: ndlab::jsonio::ConditionDto = serde_json::from_str(&text).unwrap();
    dto.eta.insert("0".to_string(), "01x".to_string());
    let ugly_path = dir.path().join("ugly.json");
    std::fs::write(&ugly_path, to_canonical_json(&dto)).unwrap();
    let out = cli::cmd_validate(&ugly_path, "bundled", "iota6", &cfg);
    assert_eq!(out.code, EXIT_INPUT);

    // bump over a pinned base is an input error, exit 2
    let out = cli::cmd_construct(
        cli::ConstructKind::Bump { input: &path },
        "iota6",
        &dir.path().join("bumped.json"),
        &cfg,
    );
    assert_eq!(out.code, EXIT_INPUT, "{}", out.text);
}

#[test]
fn recover_and_chain_commands() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig::default();
    let p_path = dir.path().join("p.json");
    let out = cli::cmd_construct(
        cli::ConstructKind::Genesis {
            labels: &[0, 1, 2, 3, 4],
        },
        "iota6",
        &p_path,
        &cfg,
    );
    assert_eq!(out.code, EXIT_OK);
    let q_path = dir.path().join("q.json");
    let out = cli::cmd_construct(
        cli::ConstructKind::Add {
            input: &p_path,
            beta: 6,
        },
        "iota6",
        &q_path,
        &cfg,
    );
    assert_eq!(out.code, EXIT_OK);

    // a harvested tuple recovers its membership
    let p = cli::load_condition(&p_path).unwrap();
    let tuple = harvest_mtuples(&p, 1, 5).unwrap().remove(0);
    let t_path = dir.path().join("m.json");
    std::fs::write(&t_path, to_canonical_json(&MTupleDto::from_tuple(&tuple))).unwrap();
    let out = cli::cmd_recover(&p_path, &t_path, &cfg);
    assert_eq!(out.code, EXIT_OK, "{}", out.text);
    assert!(out.text.contains("rho ="));

    // chains verify in order and fail out of order
    let out = cli::cmd_chain(&[&p_path, &q_path], "iota6", &cfg);
    assert_eq!(out.code, EXIT_OK, "{}", out.text);
    let out = cli::cmd_chain(&[&q_path, &p_path], "iota6", &cfg);
    assert_eq!(out.code, EXIT_FAIL);
}

#[test]
fn catalog_budget_is_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig::default();
    let p_path = dir.path().join("p.json");
    cli::cmd_construct(
        cli::ConstructKind::Genesis {
            labels: &[0, 1, 2, 3, 4],
        },
        "iota6",
        &p_path,
        &cfg,
    );
    // the full catalog of a genesis condition is astronomically large;
    // a small entry cap reports budget exhaustion
    let out = cli::cmd_catalog(&p_path, 7, 50, &cfg);
    assert_eq!(out.code, EXIT_BUDGET, "{}", out.text);
}

#[test]
fn rank_commands() {
    let cfg = RunConfig::default();
    let out = cli::cmd_rank_split("bundled", &[0, 1], &cfg);
    assert_eq!(out.code, EXIT_OK, "{}", out.text);
    assert!(out.text.contains("rank"));

    // ndrk over a catalog file: the maximum-level tuple has rank zero
    let dir = tempfile::tempdir().unwrap();
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
    let cat_path = dir.path().join("cat.json");
    std::fs::write(
        &cat_path,
        to_canonical_json(&CatalogDto::from_catalog(&cat)),
    )
    .unwrap();
    let mut budget = ndlab::Budget::default();
    let tuples = ndlab::mtuples::enumerate_catalog(&cat, &mut budget).unwrap();
    let top = tuples.iter().find(|t| t.ell() == 4).unwrap();
    let t_path = dir.path().join("m.json");
    std::fs::write(&t_path, to_canonical_json(&MTupleDto::from_tuple(top))).unwrap();
    let out = cli::cmd_rank_ndrk(&cat_path, &t_path, &cfg);
    assert_eq!(out.code, EXIT_OK, "{}", out.text);
    assert!(out.text.contains("ndrk = 0"), "{}", out.text);

    // a starved budget is exit 3, distinct from invalid input
    let starved = RunConfig {
        budget: 1,
        ..Default::default()
    };
    let low = tuples.iter().find(|t| t.ell() == 2).unwrap();
    std::fs::write(&t_path, to_canonical_json(&MTupleDto::from_tuple(low))).unwrap();
    let out = cli::cmd_rank_ndrk(&cat_path, &t_path, &starved);
    assert_eq!(out.code, EXIT_BUDGET, "{}", out.text);
}

#[test]
fn nice_check_and_stress_smoke() {
    let cfg = RunConfig {
        seed: 11,
        ..Default::default()
    };
    for base in ["iota6", "per", "omega"] {
        let out = cli::cmd_nice_check(base, 4, &cfg);
        assert_eq!(out.code, EXIT_OK, "{base}: {}", out.text);
    }
    let out = cli::cmd_stress(cli::Campaign::Litlem, 50, &cfg);
    assert_eq!(out.code, EXIT_OK, "{}", out.text);
    let out = cli::cmd_stress(cli::Campaign::Ranks, 20, &cfg);
    assert_eq!(out.code, EXIT_OK, "{}", out.text);
    let out = cli::cmd_stress(cli::Campaign::Forcing, 3, &cfg);
    assert_eq!(out.code, EXIT_OK, "{}", out.text);
    let out = cli::cmd_stress(cli::Campaign::Amalg, 2, &cfg);
    assert_eq!(out.code, EXIT_OK, "{}", out.text);
}

#[test]
fn amalgamate_command_refuses_incompatible_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig::default();
    let p_path = dir.path().join("p.json");
    cli::cmd_construct(
        cli::ConstructKind::Genesis {
            labels: &[0, 1, 2, 8, 9],
        },
        "iota6",
        &p_path,
        &cfg,
    );
    let p = cli::load_condition(&p_path).unwrap();
    // a proper twin amalgamates
    let relabel: BTreeMap<Label, Label> = [(0, 0), (1, 1), (2, 2), (8, 16), (9, 17)]
        .into_iter()
        .collect();
    let q = delta_twin(&p, &relabel).unwrap();
    let q_path = dir.path().join("q.json");
    cli::write_condition(&q_path, &q).unwrap();
    let out = cli::cmd_construct(
        cli::ConstructKind::Amalgamate {
            left: &p_path,
            right: &q_path,
            model_spec: "bundled",
        },
        "iota6",
        &dir.path().join("r.json"),
        &cfg,
    );
    assert_eq!(out.code, EXIT_OK, "{}", out.text);

    // an unrelated condition does not
    let other_path = dir.path().join("other.json");
    cli::cmd_construct(
        cli::ConstructKind::Genesis {
            labels: &[0, 1, 2, 8, 9],
        },
        "iota6",
        &other_path,
        &RunConfig {
            seed: 999,
            ..Default::default()
        },
    );
    let out = cli::cmd_construct(
        cli::ConstructKind::Amalgamate {
            left: &p_path,
            right: &other_path,
            model_spec: "bundled",
        },
        "iota6",
        &dir.path().join("r2.json"),
        &cfg,
    );
    assert_eq!(out.code, EXIT_FAIL, "{}", out.text);
}
