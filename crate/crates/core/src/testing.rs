//! Proptest strategies shared by the unit tests.

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;

use crate::model::{Configuration, PartyLayout};

/// A random valid layout on `s` states: arbitrary region labels, then a
/// random partial pairing of the regions.
pub fn arb_layout(s: usize) -> impl Strategy<Value = PartyLayout> {
    (
        proptest::collection::vec(0..s, s),
        proptest::collection::vec(any::<bool>(), s),
        any::<u64>(),
    )
        .prop_map(move |(labels, keep, seed)| {
            let mut ids = labels.clone();
            ids.sort_unstable();
            ids.dedup();
            let regions: Vec<Vec<usize>> = ids
                .iter()
                .map(|&id| (0..s).filter(|&v| labels[v] == id).collect())
                .collect();
            let mut order: Vec<usize> = (0..regions.len()).collect();
            order.shuffle(&mut StdRng::seed_from_u64(seed));
            let pairs: Vec<(usize, usize)> = order
                .chunks(2)
                .zip(keep)
                .filter(|(c, k)| c.len() == 2 && *k)
                .map(|(c, _)| (c[0], c[1]))
                .collect();
            PartyLayout::new(s, regions, &pairs).unwrap()
        })
}

pub fn arb_configuration(max_s: usize, max_p: usize) -> impl Strategy<Value = Configuration> {
    (1..=max_s, 1..=max_p).prop_flat_map(|(s, p)| {
        proptest::collection::vec(arb_layout(s), p)
            .prop_map(move |parties| Configuration::new(s, parties).unwrap())
    })
}
