//! Block sets bundled with the crate.

use crate::model::BlockSet;

pub const FIG1_JSON: &str = include_str!("../data/fig1.json");
pub const FIG3_JSON: &str = include_str!("../data/fig3.json");
pub const K2_JSON: &str = include_str!("../data/k2.json");
pub const PLANE_TREE_JSON: &str = include_str!("../data/plane_tree.json");
/// Three scripted attachments growing the hooking network of the four-block
/// example from its third block.
pub const FIG2_SCRIPT_JSON: &str = include_str!("../data/fig2_script.json");

/// Four hooking blocks, χ = 1, ρ = 0, r = 3.
pub fn fig1() -> BlockSet {
    BlockSet::from_json(FIG1_JSON).expect("bundled fig1.json is valid")
}

/// Two bipolar blocks, χ = 0, ρ = 1, r = 3.
pub fn fig3() -> BlockSet {
    BlockSet::from_json(FIG3_JSON).expect("bundled fig3.json is valid")
}

/// Random recursive tree: a single edge, χ = 0, ρ = 1, r = 8.
pub fn k2() -> BlockSet {
    BlockSet::from_json(K2_JSON).expect("bundled k2.json is valid")
}

/// Plane-oriented recursive tree: a single edge, χ = 1, ρ = 0, r = 8.
pub fn plane_tree() -> BlockSet {
    BlockSet::from_json(PLANE_TREE_JSON).expect("bundled plane_tree.json is valid")
}
