//! Small named instances used across tests and docs.

use crate::geom::Color::{Blue, Red};
use crate::instance::Instance;

/// `r(1,1) b(2,2) r(3,3)`: every point participates.
pub fn e1() -> Instance {
    Instance::from_ranks(&[(1, 1, Red), (2, 2, Blue), (3, 3, Red)]).expect("distinct")
}

/// `r(1,2) r(2,1) r(4,6) b(5,10)`: only the last two participate.
pub fn e2() -> Instance {
    Instance::from_ranks(&[(1, 2, Red), (2, 1, Red), (4, 6, Red), (5, 10, Blue)]).expect("distinct")
}
