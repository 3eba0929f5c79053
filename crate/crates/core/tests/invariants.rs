mod common;

use blocknet::{Error, Kind};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn blockset_from_seed(seed: u64, bipolar: bool, r: usize) -> Option<blocknet::BlockSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kind = if bipolar { Kind::Bipolar } else { Kind::Hooking };
    let bs = common::random_blockset(&mut rng, kind, 3, 5, r);
    match blocknet::profile::essential_degrees(&bs, r) {
        Ok(_) => Some(bs),
        Err(Error::TooFewEssential { .. }) => None,
        Err(e) => panic!("{e}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn exact_model_satisfies_the_structural_identities(
        seed in any::<u64>(),
        bipolar in any::<bool>(),
        r in 1usize..=4,
    ) {
        let bs = blockset_from_seed(seed, bipolar, r);
        prop_assume!(bs.is_some());
        let bs = bs.unwrap();
        if let Err(msg) = common::check_invariants(&bs) {
            return Err(TestCaseError::fail(format!("{msg}\n{}", bs.to_json())));
        }
    }

    #[test]
    fn json_round_trip_is_lossless(seed in any::<u64>(), bipolar in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kind = if bipolar { Kind::Bipolar } else { Kind::Hooking };
        let bs = common::random_blockset(&mut rng, kind, 3, 5, 2);
        let again = blocknet::parse_blockset(&bs.to_json()).unwrap();
        prop_assert_eq!(&again, &bs);
        prop_assert_eq!(again.to_json(), bs.to_json());
    }

    #[test]
    fn reversing_twice_is_the_identity(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bs = common::random_blockset(&mut rng, Kind::Bipolar, 3, 5, 2);
        let twice = bs.reverse_bipolar().unwrap().reverse_bipolar().unwrap();
        prop_assert_eq!(twice, bs);
    }
}

#[test]
fn reversal_swaps_in_and_out_degrees() {
    let bs = blocknet::fixtures::fig3();
    let rev = bs.reverse_bipolar().unwrap();
    for (b, r) in bs.blocks.iter().zip(&rev.blocks) {
        assert_eq!(b.indegrees(), r.degrees());
        assert_eq!(b.degrees(), r.indegrees());
    }
    assert!(blocknet::fixtures::fig1().reverse_bipolar().is_err());
}
