//! Seeded instance generators.

use std::fmt;
use std::str::FromStr;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::Color::{self, Blue, Red};
use crate::instance::Instance;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Uniform,
    DiagClusters,
    Threelines,
    TwoHalves,
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Family> {
        match s {
            "uniform" => Ok(Family::Uniform),
            "diag-clusters" => Ok(Family::DiagClusters),
            "threelines" => Ok(Family::Threelines),
            "two-halves" => Ok(Family::TwoHalves),
            _ => Err(Error::BadParams(format!("unknown family {s:?}"))),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Uniform => "uniform",
            Family::DiagClusters => "diag-clusters",
            Family::Threelines => "threelines",
            Family::TwoHalves => "two-halves",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GenParams {
    pub family: Family,
    pub n: usize,
    /// Cluster count for `diag-clusters`; ignored otherwise.
    pub k: usize,
    pub seed: u64,
}

pub fn generate(p: &GenParams) -> Result<Instance> {
    match p.family {
        Family::Uniform => uniform(p.n, p.seed),
        Family::DiagClusters => diag_clusters(p.n, p.k, p.seed),
        Family::Threelines => threelines(p.n, p.seed),
        Family::TwoHalves => two_halves(p.n, p.seed),
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn need_points(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::BadParams("n must be positive".into()));
    }
    Ok(())
}

fn coin(r: &mut impl Rng) -> Color {
    if r.gen_bool(0.5) {
        Red
    } else {
        Blue
    }
}

/// Random permutation of y-ranks against x-ranks, random colors.
pub fn uniform(n: usize, seed: u64) -> Result<Instance> {
    need_points(n)?;
    let mut r = rng(seed);
    let mut ys: Vec<i64> = (0..n as i64).collect();
    ys.shuffle(&mut r);
    let pts: Vec<_> = ys
        .iter()
        .enumerate()
        .map(|(x, &y)| (x as i64, y, coin(&mut r)))
        .collect();
    Instance::from_ranks(&pts)
}

/// `k` monochromatic clusters of `n / k` points along the diagonal with
/// alternating colors. Each cluster's first and last point are its lower-left
/// and upper-right corners; the others have their y-ranks shuffled inside
/// windows of four.
pub fn diag_clusters(n: usize, k: usize, seed: u64) -> Result<Instance> {
    need_points(n)?;
    if k == 0 || !n.is_multiple_of(k) {
        return Err(Error::BadParams(format!("k = {k} must divide n = {n}")));
    }
    let mut r = rng(seed);
    let m = n / k;
    let mut pts = Vec::with_capacity(n);
    for c in 0..k {
        let color = if c % 2 == 0 { Red } else { Blue };
        let mut ys: Vec<usize> = (0..m).collect();
        if m > 2 {
            for w in ys[1..m - 1].chunks_mut(4) {
                w.shuffle(&mut r);
            }
        }
        let base = (c * m) as i64;
        pts.extend(
            ys.iter()
                .enumerate()
                .map(|(i, &y)| (base + i as i64, base + y as i64, color)),
        );
    }
    Instance::from_ranks(&pts)
}

/// `n` red points on an upper line of slope -1, `n` blue points on a lower
/// parallel line, one red and one blue point south-west of all of them, and a
/// red point dominating everything.
pub fn threelines(n: usize, seed: u64) -> Result<Instance> {
    need_points(n)?;
    let mut r = rng(seed);
    let width = 4 * n as i64;
    let pick = |r: &mut ChaCha8Rng, parity: i64| -> Vec<i64> {
        let mut slots: Vec<i64> = (0..2 * n as i64).map(|i| 2 * i + parity).collect();
        slots.shuffle(r);
        slots.truncate(n);
        slots
    };
    let lower = 2 * width;
    let upper = lower + 2 * r.gen_range(1..=n as i64);
    let mut pts = Vec::with_capacity(2 * n + 3);
    pts.extend(pick(&mut r, 0).into_iter().map(|x| (x, upper - x, Red)));
    pts.extend(pick(&mut r, 1).into_iter().map(|x| (x, lower - x, Blue)));
    pts.push((-10, -5, Red));
    pts.push((-5, -10, Blue));
    pts.push((upper + 1, upper + 1, Red));
    Instance::from_ranks(&pts)
}

/// Reds on the left half, blues on the right, random y-ranks.
pub fn two_halves(n: usize, seed: u64) -> Result<Instance> {
    need_points(n)?;
    let mut r = rng(seed);
    let mut ys: Vec<i64> = (0..n as i64).collect();
    ys.shuffle(&mut r);
    let pts: Vec<_> = ys
        .iter()
        .enumerate()
        .map(|(x, &y)| (x as i64, y, if 2 * x < n { Red } else { Blue }))
        .collect();
    Instance::from_ranks(&pts)
}
