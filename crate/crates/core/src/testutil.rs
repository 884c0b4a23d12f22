//! Helpers shared by unit tests.

use rand::prelude::*;

use crate::geom::Color;
use crate::instance::Instance;

/// `n` points in general position with uniformly random ranks and colors,
/// listed in random id order.
pub(crate) fn random_instance(rng: &mut impl Rng, n: usize) -> Instance {
    let mut ys: Vec<i64> = (0..n as i64).collect();
    ys.shuffle(rng);
    let mut pts: Vec<_> = (0..n)
        .map(|i| {
            (
                i as i64,
                ys[i],
                if rng.gen_bool(0.5) {
                    Color::Red
                } else {
                    Color::Blue
                },
            )
        })
        .collect();
    pts.shuffle(rng);
    Instance::from_ranks(&pts).unwrap()
}
