//! Inputs shared by the benches.

use vinberg::catalog;
use vinberg::polytope::LabeledPolytope;

/// Catalog entries timed by the `enumerate` bench, smallest first.
pub const ENTRIES: &[&str] = &["case1-simplex", "lanner-truncated", "tree-lanner-glue", "two-lanner-glue-1", "lanner-chain-3"];

pub fn polytope(name: &str) -> LabeledPolytope {
    catalog::lookup(name).expect("bench entry is in the catalog")
}
