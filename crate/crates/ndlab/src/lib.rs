//! ndlab — a desk-scale laboratory for exact level-set combinatorics on
//! the binary tree and the forcing-condition engine built on top of it.
//!
//! The crate is organized around five subsystems:
//!
//! - [`gf2`] — length-tagged binary words with coordinatewise addition
//!   mod 2, Gaussian elimination, independent-tail construction, and the
//!   unique-translate search with its brute-force oracle.
//! - [`bases`] — the two concrete simple bases (singleton and perfect),
//!   indexed bases, bounded niceness verification, finite towers with
//!   covers, tower resynchronization, and largeness certificates.
//! - [`splitrank`] — finite relational models with a threshold-based
//!   splitting rank and deterministic rank witnesses.
//! - [`mtuples`] — level tuples over a finite tree family, their
//!   translation action and strict-extension order, catalog enumeration,
//!   derivative chains, and the non-disjointness rank.
//! - [`forcing`] — forcing conditions with an eleven-demand validator,
//!   the three density constructions, delta-system twins and
//!   amalgamation, membership recovery, and finite chain limits.
//!
//! The primary interface is the library plus the runnable programs in
//! `examples/`; a thin `ndlab` binary exposes the same capabilities as
//! subcommands for scripting (see [`cli`]).

pub mod bases;
pub mod cli;
pub mod forcing;
pub mod gf2;
pub mod jsonio;
pub mod mtuples;
pub mod splitrank;

pub use bases::{BaseTag, FiniteTree, IStar, IndexedBase, TowerTrunc};
pub use forcing::Condition;
pub use gf2::{BitWord, WordSet};
pub use mtuples::{Catalog, MTuple};
pub use splitrank::{FiniteModel, Rank};

/// A shared countdown for search-style operations. Exceeding the limit
/// is an error distinct from a negative search result.
#[derive(Debug, Clone)]
pub struct Budget {
    limit: u64,
    used: u64,
}

impl Budget {
    pub fn new(limit: u64) -> Self {
        Budget { limit, used: 0 }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    /// Spends one unit; reports exhaustion once the limit is passed.
    pub fn spend(&mut self, what: &str) -> Result<(), BudgetExceeded> {
        self.used += 1;
        if self.used > self.limit {
            Err(BudgetExceeded {
                limit: self.limit,
                what: what.to_string(),
            })
        } else {
            Ok(())
        }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::new(1_000_000)
    }
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
#[error("search budget of {limit} exceeded while {what}")]
pub struct BudgetExceeded {
    pub limit: u64,
    pub what: String,
}

/// One line of a check report: a stable identifier, a verdict, and an
/// optional human-readable detail for failures.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct ReportItem {
    pub id: String,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

/// An itemized pass/fail report, as produced by the validators.
#[derive(Debug, Clone, Default, PartialEq, Eq, serde::Serialize)]
pub struct Report {
    pub items: Vec<ReportItem>,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn pass(&mut self, id: &str) {
        self.items.push(ReportItem {
            id: id.to_string(),
            ok: true,
            detail: None,
        });
    }

    pub fn fail(&mut self, id: &str, detail: impl Into<String>) {
        self.items.push(ReportItem {
            id: id.to_string(),
            ok: false,
            detail: Some(detail.into()),
        });
    }

    pub fn record(&mut self, id: &str, ok: bool, detail: impl Into<String>) {
        if ok {
            self.pass(id);
        } else {
            self.fail(id, detail);
        }
    }

    pub fn merge(&mut self, other: Report) {
        self.items.extend(other.items);
    }

    pub fn all_ok(&self) -> bool {
        self.items.iter().all(|i| i.ok)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ReportItem> {
        self.items.iter().filter(|i| !i.ok)
    }

    /// Renders one line per item, `ok <id>` or `FAIL <id>: <detail>`.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for item in &self.items {
            if item.ok {
                out.push_str(&format!("ok   {}\n", item.id));
            } else {
                out.push_str(&format!(
                    "FAIL {}: {}\n",
                    item.id,
                    item.detail.as_deref().unwrap_or("")
                ));
            }
        }
        out
    }
}
