//! The min-heap closure against exhaustive search over short growth
//! histories.

mod common;

use blocknet::profile::essential_degrees;
use blocknet::{Error, Kind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn closure_matches_exhaustive_search_on_random_block_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut compared = 0;
    let mut attempts = 0;
    while compared < 60 {
        attempts += 1;
        assert!(attempts < 1000, "too few block sets with three essential degrees");
        let kind = if attempts % 2 == 0 { Kind::Hooking } else { Kind::Bipolar };
        let bs = common::random_blockset(&mut rng, kind, 3, 5, 3);
        let closure = match essential_degrees(&bs, 3) {
            Ok(e) => e,
            Err(Error::TooFewEssential { .. }) => continue,
            Err(e) => panic!("{e}"),
        };
        let brute: Vec<u32> = common::reachable_essential(&bs, 6).into_iter().take(3).collect();
        assert_eq!(closure, brute, "block set:\n{}", bs.to_json());
        compared += 1;
    }
}

#[test]
fn fixtures_match_exhaustive_search() {
    for (bs, expected) in [
        (blocknet::fixtures::fig1(), vec![1, 3, 5]),
        (blocknet::fixtures::fig3(), vec![1, 2, 3]),
        (blocknet::fixtures::plane_tree(), vec![1, 2, 3]),
    ] {
        assert_eq!(essential_degrees(&bs, 3).unwrap(), expected);
        let brute: Vec<u32> = common::reachable_essential(&bs, 6).into_iter().take(3).collect();
        assert_eq!(brute, expected);
    }
}
