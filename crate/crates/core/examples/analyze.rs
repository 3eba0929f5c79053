//! Full analysis of a block-set file: profile, urn, spectrum, covariance.
//!
//!     cargo run --example analyze -- crates/core/data/fig3.json

use blocknet::{fixtures, Analysis, BlockSet};

fn main() -> blocknet::Result<()> {
    let bs = match std::env::args().nth(1) {
        Some(path) => BlockSet::from_json(&std::fs::read_to_string(path)?)?,
        None => fixtures::fig1(),
    };
    let report = Analysis::run(&bs)?.report(&bs);
    print!("{}", report.table());
    Ok(())
}
