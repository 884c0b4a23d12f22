//! Respectful partitions and entropy certificates.
//!
//! Two constructive partitions give upper bounds on the structural entropy:
//! the kd-tree partition used in the lower-bound argument, and the slab grid
//! cut at the participating points. Certificates compare the implied bounds
//! with exact integer arithmetic.

use num_bigint::BigUint;
use serde::Serialize;

use crate::compare::RawOracle;
use crate::crosstree::{
    build_cross_safety_trees, build_mono_runs, test_box_safe, CrossTrees, Emptiness,
};
use crate::geom::{Axis, Bound, Color, PointId, Side, SymBox};
use crate::instance::Instance;
use crate::kdtree::build_c_kdtree;
use crate::oracle::{check_respectful, oracle_box_safe};

/// A partition of point ids into blocks.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PartitionCandidate {
    pub blocks: Vec<Vec<PointId>>,
}

impl PartitionCandidate {
    /// Blocks are disjoint and cover exactly `0..n`.
    pub fn covers(&self, n: usize) -> bool {
        let mut seen = vec![false; n];
        for &p in self.blocks.iter().flatten() {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return false;
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    /// Sorts ids inside blocks and blocks by first id.
    pub fn normalized(mut self) -> Self {
        for b in &mut self.blocks {
            b.sort_unstable();
        }
        self.blocks.retain(|b| !b.is_empty());
        self.blocks.sort();
        self
    }
}

/// `sum |S_k|/n * log2(n/|S_k|)`, in bits. Double precision; accurate to
/// about 1e-9 relative for any realistic `n`.
pub fn partition_entropy(part: &PartitionCandidate, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    part.blocks
        .iter()
        .filter(|b| !b.is_empty())
        .map(|b| {
            let s = b.len() as f64;
            s / nf * (nf / s).log2()
        })
        .sum()
}

/// `prod |S_k|^|S_k|`. Larger weight means lower entropy.
pub fn partition_weight(sizes: &[usize]) -> BigUint {
    sizes
        .iter()
        .filter(|&&s| s > 1)
        .map(|&s| BigUint::from(s).pow(s as u32))
        .product()
}

/// Decides whether a box is safe for the whole instance.
pub trait SafetyTester {
    /// `witness` is a point of the instance inside `b`.
    fn is_safe(&mut self, b: &SymBox, witness: PointId) -> bool;
}

/// Direct evaluation of the definition, `O(n log n)` per box.
pub struct OracleTester<'a>(pub &'a Instance);

impl SafetyTester for OracleTester<'_> {
    fn is_safe(&mut self, b: &SymBox, _witness: PointId) -> bool {
        oracle_box_safe(self.0, b).is_safe()
    }
}

/// Safety through cross-safety tree queries with rank-based emptiness.
pub struct TreeTester<'a> {
    inst: &'a Instance,
    trees: CrossTrees,
    em: RankEmptiness,
}

impl<'a> TreeTester<'a> {
    pub fn new(inst: &'a Instance) -> Self {
        let raw = RawOracle(inst);
        let runs = build_mono_runs(&raw);
        TreeTester {
            inst,
            trees: build_cross_safety_trees(&raw, &runs),
            em: RankEmptiness::new(inst),
        }
    }
}

impl SafetyTester for TreeTester<'_> {
    fn is_safe(&mut self, b: &SymBox, witness: PointId) -> bool {
        test_box_safe(&self.trees, &RawOracle(self.inst), &mut self.em, b, witness)
            .expect("witness lies in its own cell")
            .is_safe()
    }
}

/// Largest instance handed to [`OracleTester`] by [`auto_tester`].
pub const ORACLE_TESTER_MAX_N: usize = 1 << 10;

pub fn auto_tester(inst: &Instance) -> Box<dyn SafetyTester + '_> {
    if inst.len() <= ORACLE_TESTER_MAX_N {
        Box::new(OracleTester(inst))
    } else {
        Box::new(TreeTester::new(inst))
    }
}

/// Range emptiness over the full instance from its coordinate ranks: per
/// color, a merge-sort tree on y-ranks indexed by x-rank order.
pub struct RankEmptiness {
    x_rank: Vec<u32>,
    y_rank: Vec<u32>,
    /// Per color: x-ranks in increasing order, and the tree levels.
    xs: [Vec<u32>; 2],
    levels: [Vec<Vec<u32>>; 2],
}

impl RankEmptiness {
    pub fn new(inst: &Instance) -> Self {
        let n = inst.len();
        let x_rank: Vec<u32> = (0..n).map(|p| inst.rank(Axis::X, p)).collect();
        let y_rank: Vec<u32> = (0..n).map(|p| inst.rank(Axis::Y, p)).collect();
        let mut xs: [Vec<u32>; 2] = Default::default();
        let mut levels: [Vec<Vec<u32>>; 2] = Default::default();
        for c in [Color::Red, Color::Blue] {
            let mut ids = inst.ids_of(c);
            ids.sort_unstable_by_key(|&p| x_rank[p]);
            xs[c.index()] = ids.iter().map(|&p| x_rank[p]).collect();
            let mut lv = vec![ids.iter().map(|&p| y_rank[p]).collect::<Vec<_>>()];
            let mut width = 1;
            while width < ids.len() {
                let prev = lv.last().expect("non-empty");
                let mut next = Vec::with_capacity(prev.len());
                for chunk in prev.chunks(2 * width) {
                    let (a, b) = chunk.split_at(width.min(chunk.len()));
                    let mut m: Vec<u32> = a.iter().chain(b).copied().collect();
                    m.sort_unstable();
                    next.extend(m);
                }
                lv.push(next);
                width *= 2;
            }
            levels[c.index()] = lv;
        }
        RankEmptiness {
            x_rank,
            y_rank,
            xs,
            levels,
        }
    }

    /// Inclusive rank range `[lo, hi]` covered by the bounds, if non-empty.
    fn rank_range(&self, axis: Axis, lo: Bound, hi: Bound) -> Option<(u32, u32)> {
        let rank = |p: PointId| match axis {
            Axis::X => self.x_rank[p] as i64,
            Axis::Y => self.y_rank[p] as i64,
        };
        let a = match lo {
            Bound::NegInf => 0,
            Bound::At { anchor, side } => rank(anchor) + i64::from(side == Side::JustAbove),
            Bound::PosInf => return None,
        };
        let b = match hi {
            Bound::NegInf => return None,
            Bound::At { anchor, side } => rank(anchor) - i64::from(side == Side::JustBelow),
            Bound::PosInf => self.x_rank.len() as i64 - 1,
        };
        (a <= b).then_some((a as u32, b as u32))
    }

    pub fn any_in(&self, b: &SymBox, color: Color) -> bool {
        let (Some((x0, x1)), Some((y0, y1))) = (
            self.rank_range(Axis::X, b.x_min, b.x_max),
            self.rank_range(Axis::Y, b.y_min, b.y_max),
        ) else {
            return false;
        };
        let xs = &self.xs[color.index()];
        let lo = xs.partition_point(|&x| x < x0);
        let hi = xs.partition_point(|&x| x <= x1);
        self.any_y(color, lo, hi, y0, y1)
    }

    /// Is some y-rank in `[y0, y1]` among positions `lo..hi`?
    fn any_y(&self, color: Color, mut lo: usize, mut hi: usize, y0: u32, y1: u32) -> bool {
        let levels = &self.levels[color.index()];
        let hit = |level: usize, block: usize| {
            let w = 1 << level;
            let lv = &levels[level];
            let s = &lv[block * w..((block + 1) * w).min(lv.len())];
            let i = s.partition_point(|&y| y < y0);
            i < s.len() && s[i] <= y1
        };
        // canonical decomposition, bottom-up
        let mut level = 0;
        while lo < hi {
            if level + 1 >= levels.len() {
                return (lo..hi).any(|blk| hit(level, blk));
            }
            if lo % 2 == 1 {
                if hit(level, lo) {
                    return true;
                }
                lo += 1;
            }
            if hi % 2 == 1 {
                hi -= 1;
                if hit(level, hi) {
                    return true;
                }
            }
            lo /= 2;
            hi /= 2;
            level += 1;
        }
        false
    }
}

impl Emptiness for RankEmptiness {
    fn has_point(&mut self, b: &SymBox, color: Color, _leaf: &[PointId]) -> bool {
        self.any_in(b, color)
    }
}

/// Per color, a median-split kd-tree (x at even depth, y at odd) that stops at
/// cells whose extended bounding box is safe or that hold one point. The
/// leaves of both trees form the partition.
pub fn build_pikd_partition(inst: &Instance, safety: &mut dyn SafetyTester) -> PartitionCandidate {
    let raw = RawOracle(inst);
    let mut blocks = Vec::new();
    for c in [Color::Red, Color::Blue] {
        let tree = build_c_kdtree(&raw, inst.ids_of(c), None, |cell, bbox, _| {
            safety.is_safe(bbox, cell[0])
        });
        blocks.extend(tree.leaves().map(|l| tree.points(l).to_vec()));
    }
    PartitionCandidate { blocks }.normalized()
}

/// Cuts the plane into the `(h+1)^2` grid of slabs strictly between
/// consecutive participating coordinates. Each non-empty grid box becomes a
/// block and each participating point a singleton.
pub fn build_slab_partition(inst: &Instance, participating: &[PointId]) -> PartitionCandidate {
    let n = inst.len();
    let mut is_part = vec![false; n];
    for &p in participating {
        is_part[p] = true;
    }
    let cuts = |axis: Axis| {
        let mut r: Vec<u32> = participating.iter().map(|&p| inst.rank(axis, p)).collect();
        r.sort_unstable();
        r
    };
    let (cx, cy) = (cuts(Axis::X), cuts(Axis::Y));
    let mut cells = std::collections::BTreeMap::<(usize, usize), Vec<PointId>>::new();
    let mut blocks = Vec::new();
    for (p, &part) in is_part.iter().enumerate() {
        if part {
            blocks.push(vec![p]);
            continue;
        }
        let i = cx.partition_point(|&r| r < inst.rank(Axis::X, p));
        let j = cy.partition_point(|&r| r < inst.rank(Axis::Y, p));
        cells.entry((i, j)).or_default().push(p);
    }
    blocks.extend(cells.into_values());
    PartitionCandidate { blocks }.normalized()
}

/// Harness constant in the slab upper-bound flag.
pub const SLAB_BOUND_CONSTANT: f64 = 10.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartitionBound {
    pub entropy: f64,
    pub blocks: usize,
    /// `n (H + 1)`.
    pub n_h_plus_n: f64,
    pub respectful: bool,
    /// `n H >= h log2 n`, decided exactly.
    pub above_lower_bound: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyReport {
    pub n: usize,
    pub h: usize,
    #[serde(rename = "H_pikd")]
    pub h_pikd: f64,
    #[serde(rename = "H_slab")]
    pub h_slab: f64,
    #[serde(rename = "H_exact")]
    pub h_exact: Option<f64>,
    pub pikd: PartitionBound,
    pub slab: PartitionBound,
    /// `H_exact <= min(H_pikd, H_slab)`, decided exactly, when computed.
    pub exact_below_constructions: Option<bool>,
    /// `n (H_slab + 1) <= c n log2 max(h, 2)`.
    pub slab_within_log_h: bool,
}

impl EntropyReport {
    /// Every certificate flag holds.
    pub fn all_flags(&self) -> bool {
        self.pikd.respectful
            && self.slab.respectful
            && self.pikd.above_lower_bound
            && self.slab.above_lower_bound
            && self.exact_below_constructions != Some(false)
            && self.slab_within_log_h
    }
}

/// `n^(n - h) >= prod s^s`, i.e. `n H >= h log2 n`.
fn above_lower_bound(n: usize, h: usize, sizes: &[usize]) -> bool {
    if h > n {
        return false;
    }
    BigUint::from(n).pow((n - h) as u32) >= partition_weight(sizes)
}

fn bound_for(inst: &Instance, h: usize, part: &PartitionCandidate) -> PartitionBound {
    let n = inst.len();
    let entropy = partition_entropy(part, n);
    PartitionBound {
        entropy,
        blocks: part.blocks.len(),
        n_h_plus_n: n as f64 * (entropy + 1.0),
        respectful: check_respectful(inst, part),
        above_lower_bound: above_lower_bound(n, h, &part.sizes()),
    }
}

/// Evaluates both constructions against the lower bound, against each other
/// and against the exact optimum when one is supplied.
pub fn certify_bounds(
    inst: &Instance,
    h: usize,
    pikd: &PartitionCandidate,
    slab: &PartitionCandidate,
    exact: Option<&PartitionCandidate>,
) -> EntropyReport {
    let n = inst.len();
    let pikd_b = bound_for(inst, h, pikd);
    let slab_b = bound_for(inst, h, slab);
    let exact_below = exact.map(|e| {
        let w = partition_weight(&e.sizes());
        w >= partition_weight(&pikd.sizes()) && w >= partition_weight(&slab.sizes())
    });
    let log_h = (h.max(2) as f64).log2();
    EntropyReport {
        n,
        h,
        h_pikd: pikd_b.entropy,
        h_slab: slab_b.entropy,
        h_exact: exact.map(|e| partition_entropy(e, n)),
        slab_within_log_h: slab_b.n_h_plus_n <= SLAB_BOUND_CONSTANT * n as f64 * log_h,
        pikd: pikd_b,
        slab: slab_b,
        exact_below_constructions: exact_below,
    }
}
