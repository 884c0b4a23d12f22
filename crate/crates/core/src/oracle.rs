//! Brute-force reference implementations. Everything here reads coordinates
//! directly (uncounted) and favors obviousness over speed; it is the ground
//! truth for the differential tests.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::compare::{CoordOracle, RawOracle, Reflected};
use crate::entropy::{partition_entropy, PartitionCandidate};
use crate::error::{Error, Result};
use crate::geom::{Axis, Color, Location, Orientation, PointId, SymBox};
use crate::instance::Instance;

/// Default cap on instance size for exact structural entropy.
pub const ENTROPY_CAP: usize = 10;

pub type Pair = (PointId, PointId);

fn inside_open(inst: &Instance, r: PointId, p: PointId, q: PointId) -> bool {
    [Axis::X, Axis::Y].iter().all(|&axis| {
        let (a, b) = (inst.rank(axis, p), inst.rank(axis, q));
        let (lo, hi) = (a.min(b), a.max(b));
        let v = inst.rank(axis, r);
        lo < v && v < hi
    })
}

pub fn oracle_visible(inst: &Instance, p: PointId, q: PointId) -> bool {
    (0..inst.len()).all(|r| r == p || r == q || !inside_open(inst, r, p, q))
}

/// All bichromatic visible pairs `(a, b)` with `a < b`.
pub fn oracle_visible_pairs(inst: &Instance) -> BTreeSet<Pair> {
    let n = inst.len();
    let mut out = BTreeSet::new();
    for p in 0..n {
        for q in p + 1..n {
            if inst.color(p) != inst.color(q) && oracle_visible(inst, p, q) {
                out.insert((p, q));
            }
        }
    }
    out
}

pub fn oracle_participating(inst: &Instance) -> BTreeSet<PointId> {
    oracle_visible_pairs(inst)
        .into_iter()
        .flat_map(|(a, b)| [a, b])
        .collect()
}

/// Minimal points of `ids` in the frame of `orient` (the NE-minimal set is the
/// lower-left staircase).
pub fn minimal_set<O: CoordOracle>(o: O, ids: &[PointId], orient: Orientation) -> Vec<PointId> {
    let r = Reflected::new(o, orient);
    let mut sorted = ids.to_vec();
    sorted.sort_by(|&a, &b| r.compare(Axis::X, a, b));
    let mut out = Vec::new();
    let mut low: Option<PointId> = None;
    for p in sorted {
        if low.is_none_or(|l| r.compare(Axis::Y, p, l).is_lt()) {
            out.push(p);
            low = Some(p);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Safety {
    RedSafe,
    BlueSafe,
    /// Only possible for boxes containing no point.
    BothSafe,
    NotSafe,
}

impl Safety {
    pub fn is_safe(self) -> bool {
        self != Safety::NotSafe
    }

    pub fn from_flags(red: bool, blue: bool) -> Safety {
        match (red, blue) {
            (true, true) => Safety::BothSafe,
            (true, false) => Safety::RedSafe,
            (false, true) => Safety::BlueSafe,
            (false, false) => Safety::NotSafe,
        }
    }
}

/// Full classification of a box by direct evaluation of the definitions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BoxSafety {
    pub red_cross_safe: bool,
    pub blue_cross_safe: bool,
    pub red_safe: bool,
    pub blue_safe: bool,
}

impl BoxSafety {
    pub fn verdict(&self) -> Safety {
        Safety::from_flags(self.red_safe, self.blue_safe)
    }

    pub fn is_safe(&self) -> bool {
        self.red_safe || self.blue_safe
    }

    pub fn cross_safe(&self) -> bool {
        self.red_cross_safe || self.blue_cross_safe
    }
}

/// Classifies `b` against the points `ids` of `inst` (all points by default).
pub fn oracle_box_safe_on(inst: &Instance, ids: &[PointId], b: &SymBox) -> BoxSafety {
    let raw = RawOracle(inst);
    let mut cross = [false; 2];
    let mut quads: [Vec<PointId>; 4] = Default::default();
    for &p in ids {
        match b.locate(&raw, p) {
            Location::InBox | Location::Cross => cross[inst.color(p).index()] = true,
            Location::Quadrant(o) => quads[o.index()].push(p),
        }
    }
    let mut staircase = [false; 2];
    for orient in Orientation::ALL {
        for p in minimal_set(raw, &quads[orient.index()], orient) {
            staircase[inst.color(p).index()] = true;
        }
    }
    let red_cross_safe = !cross[Color::Blue.index()];
    let blue_cross_safe = !cross[Color::Red.index()];
    BoxSafety {
        red_cross_safe,
        blue_cross_safe,
        red_safe: red_cross_safe && !staircase[Color::Blue.index()],
        blue_safe: blue_cross_safe && !staircase[Color::Red.index()],
    }
}

pub fn oracle_box_safe(inst: &Instance, b: &SymBox) -> BoxSafety {
    let all: Vec<PointId> = (0..inst.len()).collect();
    oracle_box_safe_on(inst, &all, b)
}

/// True iff `part` partitions all ids of `inst` and each block is a singleton
/// or has a safe (extended) bounding box.
pub fn check_respectful(inst: &Instance, part: &PartitionCandidate) -> bool {
    if !part.covers(inst.len()) {
        return false;
    }
    let raw = RawOracle(inst);
    part.blocks.iter().all(|blk| {
        blk.len() <= 1
            || SymBox::bounding(&raw, blk).is_some_and(|b| oracle_box_safe(inst, &b).is_safe())
    })
}

/// Exact structural entropy by enumerating set partitions.
///
/// Safe subsets are closed under taking subsets (their bounding boxes shrink),
/// so blocks are only ever grown while they stay safe.
pub fn oracle_structural_entropy(inst: &Instance, cap: usize) -> Result<(f64, PartitionCandidate)> {
    let n = inst.len();
    if n > cap || n > 20 {
        return Err(Error::TooLarge { n, cap });
    }
    if n == 0 {
        return Ok((0.0, PartitionCandidate { blocks: vec![] }));
    }
    let raw = RawOracle(inst);
    let mut safe = vec![false; 1 << n];
    for (mask, s) in safe.iter_mut().enumerate().skip(1) {
        let ids: Vec<PointId> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        *s = ids.len() == 1 || {
            let b = SymBox::bounding(&raw, &ids).expect("non-empty");
            oracle_box_safe(inst, &b).is_safe()
        };
    }

    struct Search<'a> {
        n: usize,
        safe: &'a [bool],
        blocks: Vec<u32>,
        best_weight: u128,
        best: Vec<u32>,
    }
    // weight = prod |S_k|^|S_k|; lower entropy <=> larger weight
    fn weight(blocks: &[u32]) -> u128 {
        blocks
            .iter()
            .map(|m| {
                let s = m.count_ones() as u128;
                s.pow(s as u32)
            })
            .product()
    }
    fn go(st: &mut Search, i: usize) {
        if i == st.n {
            let w = weight(&st.blocks);
            if w > st.best_weight {
                st.best_weight = w;
                st.best = st.blocks.clone();
            }
            return;
        }
        for k in 0..st.blocks.len() {
            let grown = st.blocks[k] | 1 << i;
            if st.safe[grown as usize] {
                st.blocks[k] = grown;
                go(st, i + 1);
                st.blocks[k] &= !(1 << i);
            }
        }
        st.blocks.push(1 << i);
        go(st, i + 1);
        st.blocks.pop();
    }
    let mut st = Search {
        n,
        safe: &safe,
        blocks: Vec::new(),
        best_weight: 0,
        best: Vec::new(),
    };
    go(&mut st, 0);
    let witness = PartitionCandidate {
        blocks: st
            .best
            .iter()
            .map(|&m| (0..n).filter(|i| m >> i & 1 == 1).collect())
            .collect(),
    };
    Ok((partition_entropy(&witness, n), witness))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{e1, e2};
    use crate::geom::Bound;
    use Color::*;

    fn pairs(v: &[(usize, usize)]) -> BTreeSet<Pair> {
        v.iter().copied().collect()
    }

    #[test]
    fn visible_pairs_examples() {
        assert_eq!(oracle_visible_pairs(&e1()), pairs(&[(0, 1), (1, 2)]));
        assert_eq!(oracle_visible_pairs(&e2()), pairs(&[(2, 3)]));
        let reds = Instance::from_ranks(&[(1, 3, Red), (2, 1, Red), (3, 2, Red)]).unwrap();
        assert!(oracle_visible_pairs(&reds).is_empty());
    }

    #[test]
    fn e2_pairs_by_hand() {
        // r(1,2) r(2,1) r(4,6) b(5,10): only r(4,6) and b(5,10) are bichromatic
        // with an empty rectangle; b's rectangles with the first two reds
        // contain r(4,6).
        let e = e2();
        assert!(!oracle_visible(&e, 0, 3));
        assert!(!oracle_visible(&e, 1, 3));
        assert!(oracle_visible(&e, 2, 3));
        assert!(oracle_visible(&e, 0, 1));
    }

    #[test]
    fn participating_examples() {
        assert_eq!(oracle_participating(&e1()), [0, 1, 2].into());
        assert_eq!(oracle_participating(&e2()), [2, 3].into());
        let single = Instance::from_ranks(&[(0, 0, Blue)]).unwrap();
        assert!(oracle_participating(&single).is_empty());
    }

    #[test]
    fn box_safety_examples() {
        let e = e2();
        let raw = RawOracle(&e);
        let b = SymBox::bounding(&raw, &[0, 1]).unwrap();
        let s = oracle_box_safe(&e, &b);
        assert_eq!(s.verdict(), Safety::RedSafe);
        assert!(s.red_cross_safe && !s.blue_cross_safe);

        let e = e1();
        let raw = RawOracle(&e);
        let b = SymBox::bounding(&raw, &[0]).unwrap();
        assert_eq!(oracle_box_safe(&e, &b).verdict(), Safety::NotSafe);

        let reds = Instance::from_ranks(&[(1, 1, Red), (5, 5, Red)]).unwrap();
        // a box strictly between the two points, touching neither slab
        let empty = SymBox {
            x_min: Bound::above(0),
            x_max: Bound::below(1),
            y_min: Bound::above(0),
            y_max: Bound::below(1),
        };
        assert_eq!(oracle_box_safe(&reds, &empty).verdict(), Safety::RedSafe);
        let nowhere = SymBox {
            x_min: Bound::above(1),
            x_max: Bound::PosInf,
            y_min: Bound::NegInf,
            y_max: Bound::below(0),
        };
        assert_eq!(oracle_box_safe(&reds, &nowhere).verdict(), Safety::RedSafe);
        let none = Instance::from_ranks(&[]).unwrap();
        assert_eq!(
            oracle_box_safe(&none, &SymBox::PLANE).verdict(),
            Safety::BothSafe
        );
    }

    #[test]
    fn respectful_examples() {
        let p = |b: &[&[usize]]| PartitionCandidate {
            blocks: b.iter().map(|v| v.to_vec()).collect(),
        };
        assert!(check_respectful(&e2(), &p(&[&[0, 1], &[2], &[3]])));
        assert!(!check_respectful(&e1(), &p(&[&[0, 2], &[1]])));
        assert!(check_respectful(&e1(), &p(&[&[0], &[1], &[2]])));
        // not a partition
        assert!(!check_respectful(&e1(), &p(&[&[0], &[1]])));
        assert!(!check_respectful(&e1(), &p(&[&[0, 1], &[1], &[2]])));
    }

    #[test]
    fn structural_entropy_examples() {
        let reds =
            Instance::from_ranks(&[(1, 3, Red), (2, 1, Red), (3, 2, Red), (4, 4, Red)]).unwrap();
        let (h, w) = oracle_structural_entropy(&reds, ENTROPY_CAP).unwrap();
        assert_eq!(h, 0.0);
        assert_eq!(w.blocks.len(), 1);

        let (h, w) = oracle_structural_entropy(&e1(), ENTROPY_CAP).unwrap();
        assert!((h - 3f64.log2()).abs() < 1e-12);
        assert_eq!(w.blocks.len(), 3);

        // two red points bottom-left and two blue points top-right, far apart
        // on a diagonal: each pair is a safe block.
        let two_pairs = Instance::from_ranks(&[
            (1, 1, Red),
            (2, 2, Red),
            (3, 3, Red),
            (4, 4, Blue),
            (5, 5, Blue),
            (6, 6, Blue),
        ])
        .unwrap();
        let (h, w) = oracle_structural_entropy(&two_pairs, ENTROPY_CAP).unwrap();
        // blocks {0,1},{2},{3},{4,5}
        let expect = 2.0 * (2.0 / 6.0) * 3f64.log2() + 2.0 * (1.0 / 6.0) * 6f64.log2();
        assert!((h - expect).abs() < 1e-12, "{h} vs {expect}");
        assert!(check_respectful(&two_pairs, &w));

        let big = Instance::from_ranks(&(0..11).map(|i| (i, i, Red)).collect::<Vec<_>>()).unwrap();
        assert!(matches!(
            oracle_structural_entropy(&big, ENTROPY_CAP),
            Err(Error::TooLarge { n: 11, cap: 10 })
        ));
    }
}
