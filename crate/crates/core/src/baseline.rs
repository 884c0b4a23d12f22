//! Worst-case sweep solvers.
//!
//! Participation: a point `p` of color `c` sees an opposite-color point in its
//! NE quadrant iff some opposite-color `b` above `p` (and right of it) has
//! `x(b)` smaller than every color-`c` point strictly between them in `y`. A
//! sweep by decreasing `x` keeps the points to the right of `p` in a
//! tournament tree over y-ranks whose nodes summarize that condition; the
//! other quadrants are handled by reflection.
//!
//! Pairs: for each point `q`, the points left of and below `q` that it sees
//! form a staircase; opposite-color stairs are extracted one by one from a
//! max-augmented tree. A second pass with `y` reflected covers the NW/SE
//! pairs.

use std::collections::BTreeSet;

use crate::compare::{sort_by_axis, CoordOracle, Reflected};
use crate::geom::{Axis, Color, Orientation, PointId};
use crate::oracle::Pair;

type Slot = Option<PointId>;

/// Smaller of two x-values; `None` is +infinity.
fn min_x<O: CoordOracle>(o: &O, a: Slot, b: Slot) -> Slot {
    match (a, b) {
        (None, v) | (v, None) => v,
        (Some(p), Some(q)) => Some(if o.compare(Axis::X, p, q).is_lt() {
            p
        } else {
            q
        }),
    }
}

/// Strict `a < b` with `None` as +infinity.
fn lt_x<O: CoordOracle>(o: &O, a: Slot, b: Slot) -> bool {
    match (a, b) {
        (None, _) => false,
        (Some(_), None) => true,
        (Some(p), Some(q)) => o.compare(Axis::X, p, q).is_lt(),
    }
}

/// Larger of two x-values; `None` is -infinity.
fn max_x<O: CoordOracle>(o: &O, a: Slot, b: Slot) -> Slot {
    match (a, b) {
        (None, v) | (v, None) => v,
        (Some(p), Some(q)) => Some(if o.compare(Axis::X, p, q).is_gt() {
            p
        } else {
            q
        }),
    }
}

/// Strict `a > b` with `None` as -infinity.
fn gt_x<O: CoordOracle>(o: &O, a: Slot, b: Slot) -> bool {
    match (a, b) {
        (None, _) => false,
        (Some(_), None) => true,
        (Some(p), Some(q)) => o.compare(Axis::X, p, q).is_gt(),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub(crate) struct StairNode {
    /// Minimum-x inserted point per color.
    pub minx: [Slot; 2],
    /// Per color `c`: the minimum-x point `b` of color `c` whose x is below
    /// every point of the other color inserted strictly below `b` in this
    /// node's range.
    pub cand: [Slot; 2],
}

/// Tournament tree over y-rank positions (leaves ordered by increasing y).
pub(crate) struct StairAugTree {
    size: usize,
    nodes: Vec<StairNode>,
    leaf_point: Vec<Slot>,
}

impl StairAugTree {
    pub fn new(m: usize) -> Self {
        let size = m.next_power_of_two().max(1);
        StairAugTree {
            size,
            nodes: vec![StairNode::default(); 2 * size],
            leaf_point: vec![None; size],
        }
    }

    fn merge<O: CoordOracle>(o: &O, lower: &StairNode, upper: &StairNode) -> StairNode {
        let mut out = StairNode::default();
        for c in Color::BOTH {
            let i = c.index();
            let other = c.opposite().index();
            out.minx[i] = min_x(o, lower.minx[i], upper.minx[i]);
            let up = if lt_x(o, upper.cand[i], lower.minx[other]) {
                upper.cand[i]
            } else {
                None
            };
            out.cand[i] = min_x(o, lower.cand[i], up);
        }
        out
    }

    pub fn insert<O: CoordOracle>(&mut self, o: &O, pos: usize, p: PointId) {
        let c = o.color(p).index();
        self.leaf_point[pos] = Some(p);
        let mut v = self.size + pos;
        self.nodes[v] = StairNode::default();
        self.nodes[v].minx[c] = Some(p);
        self.nodes[v].cand[c] = Some(p);
        while v > 1 {
            v /= 2;
            self.nodes[v] = Self::merge(o, &self.nodes[2 * v], &self.nodes[2 * v + 1]);
        }
    }

    /// Does a point of color `opposite(c)` above position `pos` qualify
    /// against the running minimum of color `c`?
    pub fn query_above<O: CoordOracle>(&self, o: &O, pos: usize, c: Color) -> bool {
        let (mut l, mut r) = (self.size + pos + 1, 2 * self.size);
        let mut left_nodes = Vec::new();
        let mut right_nodes = Vec::new();
        while l < r {
            if l & 1 == 1 {
                left_nodes.push(l);
                l += 1;
            }
            if r & 1 == 1 {
                r -= 1;
                right_nodes.push(r);
            }
            l /= 2;
            r /= 2;
        }
        let opp = c.opposite().index();
        let mut t: Slot = None;
        for v in left_nodes.into_iter().chain(right_nodes.into_iter().rev()) {
            let node = &self.nodes[v];
            if lt_x(o, node.cand[opp], t) {
                return true;
            }
            t = min_x(o, t, node.minx[c.index()]);
        }
        false
    }

    /// Recomputes every node from the leaves by brute force and compares.
    #[cfg(test)]
    pub fn check_invariants<O: CoordOracle>(&self, o: &O) -> bool {
        for v in 1..self.size {
            let depth = v.ilog2();
            let span = self.size >> depth;
            let first = (v - (1 << depth)) * span;
            let pts: Vec<PointId> = self.leaf_point[first..first + span]
                .iter()
                .flatten()
                .copied()
                .collect();
            let mut expect = StairNode::default();
            for (k, &b) in pts.iter().enumerate() {
                let c = o.color(b).index();
                expect.minx[c] = min_x(o, expect.minx[c], Some(b));
                let below_other = pts[..k]
                    .iter()
                    .filter(|&&r| o.color(r).index() != c)
                    .fold(None, |acc, &r| min_x(o, acc, Some(r)));
                if lt_x(o, Some(b), below_other) {
                    expect.cand[c] = min_x(o, expect.cand[c], Some(b));
                }
            }
            if expect != self.nodes[v] {
                return false;
            }
        }
        true
    }
}

/// Positions of `ids` sorted along `axis`, indexed by point id.
struct Ranks {
    by_x: Vec<PointId>,
    y_pos: Vec<u32>,
}

fn rank_subset<O: CoordOracle>(o: &O, ids: &[PointId]) -> Ranks {
    let mut by_x = ids.to_vec();
    let mut by_y = ids.to_vec();
    sort_by_axis(o, Axis::X, &mut by_x);
    sort_by_axis(o, Axis::Y, &mut by_y);
    let mut y_pos = vec![u32::MAX; o.len()];
    for (i, &p) in by_y.iter().enumerate() {
        y_pos[p] = i as u32;
    }
    Ranks { by_x, y_pos }
}

/// Reports the points of `ids` that participate in the subset `ids`.
pub fn participating_sweep<O: CoordOracle>(o: &O, ids: &[PointId]) -> Vec<PointId> {
    participating_sweep_oriented(o, ids, &Orientation::ALL)
}

/// Sweep restricted to the given orientations (all four are needed for a
/// correct answer).
pub fn participating_sweep_oriented<O: CoordOracle>(
    o: &O,
    ids: &[PointId],
    orientations: &[Orientation],
) -> Vec<PointId> {
    let m = ids.len();
    if m < 2 {
        return Vec::new();
    }
    let ranks = rank_subset(o, ids);
    let mut hit = vec![false; o.len()];
    for &orient in orientations {
        let r = Reflected::new(o, orient);
        let flip_x = orient.flips(Axis::X);
        let flip_y = orient.flips(Axis::Y);
        let mut tree = StairAugTree::new(m);
        // decreasing reflected x
        let sweep: Box<dyn Iterator<Item = &PointId>> = if flip_x {
            Box::new(ranks.by_x.iter())
        } else {
            Box::new(ranks.by_x.iter().rev())
        };
        for &p in sweep {
            let raw_pos = ranks.y_pos[p] as usize;
            let pos = if flip_y { m - 1 - raw_pos } else { raw_pos };
            if !hit[p] && tree.query_above(&r, pos, o.color(p)) {
                hit[p] = true;
            }
            tree.insert(&r, pos, p);
        }
    }
    let mut out: Vec<PointId> = ids.iter().copied().filter(|&p| hit[p]).collect();
    out.sort_unstable();
    out
}

#[derive(Clone, Copy, Debug, Default)]
struct PairNode {
    maxx: Slot,
    /// Per color: max-x point `b` of that color whose x exceeds every point
    /// inserted above `b` within the node.
    cand: [Slot; 2],
}

struct PairTree {
    size: usize,
    nodes: Vec<PairNode>,
}

impl PairTree {
    fn new(m: usize) -> Self {
        let size = m.next_power_of_two().max(1);
        PairTree {
            size,
            nodes: vec![PairNode::default(); 2 * size],
        }
    }

    fn insert<O: CoordOracle>(&mut self, o: &O, pos: usize, p: PointId) {
        let mut v = self.size + pos;
        self.nodes[v] = PairNode::default();
        self.nodes[v].maxx = Some(p);
        self.nodes[v].cand[o.color(p).index()] = Some(p);
        while v > 1 {
            v /= 2;
            let (lower, upper) = (self.nodes[2 * v], self.nodes[2 * v + 1]);
            let mut node = PairNode {
                maxx: max_x(o, lower.maxx, upper.maxx),
                cand: [None; 2],
            };
            for c in 0..2 {
                let low = if gt_x(o, lower.cand[c], upper.maxx) {
                    lower.cand[c]
                } else {
                    None
                };
                node.cand[c] = max_x(o, upper.cand[c], low);
            }
            self.nodes[v] = node;
        }
    }

    /// Highest point of color `c` at positions `< hi` whose x exceeds both `t`
    /// and every point between it and `hi`. Updates `t` with the maximum x of
    /// the positions passed over.
    fn find<O: CoordOracle>(
        &self,
        o: &O,
        v: usize,
        span: (usize, usize),
        hi: usize,
        c: usize,
        t: &mut Slot,
    ) -> Slot {
        let (lo_pos, hi_pos) = span;
        if lo_pos >= hi || self.nodes[v].maxx.is_none() {
            return None;
        }
        if hi_pos <= hi {
            if !gt_x(o, self.nodes[v].cand[c], *t) {
                *t = max_x(o, *t, self.nodes[v].maxx);
                return None;
            }
            if v >= self.size {
                return self.nodes[v].cand[c];
            }
        }
        let mid = (lo_pos + hi_pos) / 2;
        if let Some(b) = self.find(o, 2 * v + 1, (mid, hi_pos), hi, c, t) {
            return Some(b);
        }
        self.find(o, 2 * v, (lo_pos, mid), hi, c, t)
    }
}

/// All bichromatic visible pairs among `ids` (visibility within `ids`), as
/// `(a, b)` with `a < b`.
pub fn bichromatic_pairs_sweep<O: CoordOracle>(o: &O, ids: &[PointId]) -> BTreeSet<Pair> {
    let m = ids.len();
    let mut out = BTreeSet::new();
    if m < 2 {
        return out;
    }
    let ranks = rank_subset(o, ids);
    for orient in [Orientation::NE, Orientation::SE] {
        let r = Reflected::new(o, orient);
        let flip_y = orient.flips(Axis::Y);
        let mut tree = PairTree::new(m);
        for &q in &ranks.by_x {
            let raw_pos = ranks.y_pos[q] as usize;
            let pos = if flip_y { m - 1 - raw_pos } else { raw_pos };
            let opp = o.color(q).opposite().index();
            let mut hi = pos;
            let mut t: Slot = None;
            while let Some(b) = tree.find(&r, 1, (0, tree.size), hi, opp, &mut t) {
                out.insert((q.min(b), q.max(b)));
                let b_raw = ranks.y_pos[b] as usize;
                hi = if flip_y { m - 1 - b_raw } else { b_raw };
                t = Some(b);
            }
            tree.insert(&r, pos, q);
        }
    }
    out
}

/// Convenience: participation over the whole oracle.
pub fn report_participating_sweep<O: CoordOracle>(o: &O) -> Vec<PointId> {
    let all: Vec<PointId> = (0..o.len()).collect();
    participating_sweep(o, &all)
}

pub fn report_bichromatic_pairs<O: CoordOracle>(o: &O) -> BTreeSet<Pair> {
    let all: Vec<PointId> = (0..o.len()).collect();
    bichromatic_pairs_sweep(o, &all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compare::{CountingOracle, RawOracle};
    use crate::fixtures::{e1, e2};
    use crate::instance::Instance;
    use crate::oracle::{oracle_participating, oracle_visible_pairs};
    use crate::testutil::random_instance;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn sweep_set(inst: &Instance) -> BTreeSet<PointId> {
        report_participating_sweep(&CountingOracle::new(inst))
            .into_iter()
            .collect()
    }

    #[test]
    fn participating_examples() {
        assert_eq!(sweep_set(&e1()), [0, 1, 2].into());
        assert_eq!(sweep_set(&e2()), [2, 3].into());
        let reds =
            Instance::from_ranks(&[(1, 3, Color::Red), (2, 1, Color::Red), (3, 2, Color::Red)])
                .unwrap();
        assert!(sweep_set(&reds).is_empty());
    }

    #[test]
    fn pairs_examples() {
        let e = e1();
        assert_eq!(
            report_bichromatic_pairs(&CountingOracle::new(&e)),
            [(0, 1), (1, 2)].into()
        );
        let two = Instance::from_ranks(&[(0, 0, Color::Red), (1, 1, Color::Blue)]).unwrap();
        assert_eq!(
            report_bichromatic_pairs(&CountingOracle::new(&two)),
            [(0, 1)].into()
        );
    }

    /// Every coordinate permutation pair and coloring for n <= 5, plus random
    /// instances up to n = 8.
    #[test]
    fn exhaustive_small_equivalence() {
        fn perms(n: usize) -> Vec<Vec<i64>> {
            let mut out = vec![];
            let mut v: Vec<i64> = (0..n as i64).collect();
            fn rec(k: usize, v: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
                if k == v.len() {
                    out.push(v.clone());
                    return;
                }
                for i in k..v.len() {
                    v.swap(k, i);
                    rec(k + 1, v, out);
                    v.swap(k, i);
                }
            }
            rec(0, &mut v, &mut out);
            out
        }
        for n in 1..=5 {
            for ys in perms(n) {
                for mask in 0..(1u32 << n) {
                    let pts: Vec<_> = (0..n)
                        .map(|i| {
                            let c = if mask >> i & 1 == 1 {
                                Color::Blue
                            } else {
                                Color::Red
                            };
                            (i as i64, ys[i], c)
                        })
                        .collect();
                    let inst = Instance::from_ranks(&pts).unwrap();
                    assert_eq!(sweep_set(&inst), oracle_participating(&inst), "{pts:?}");
                    assert_eq!(
                        report_bichromatic_pairs(&CountingOracle::new(&inst)),
                        oracle_visible_pairs(&inst),
                        "{pts:?}"
                    );
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let n = rng.gen_range(6..=8);
            let inst = random_instance(&mut rng, n);
            assert_eq!(sweep_set(&inst), oracle_participating(&inst));
            assert_eq!(
                report_bichromatic_pairs(&CountingOracle::new(&inst)),
                oracle_visible_pairs(&inst)
            );
        }
    }

    #[test]
    fn larger_random_equivalence() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = rng.gen_range(9..=60);
            let inst = random_instance(&mut rng, n);
            assert_eq!(sweep_set(&inst), oracle_participating(&inst));
            assert_eq!(
                report_bichromatic_pairs(&CountingOracle::new(&inst)),
                oracle_visible_pairs(&inst)
            );
        }
    }

    #[test]
    fn merge_law_after_every_insertion() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let n = rng.gen_range(1..=24);
            let inst = random_instance(&mut rng, n);
            let o = RawOracle(&inst);
            let mut tree = StairAugTree::new(n);
            let mut order: Vec<PointId> = (0..n).collect();
            order.shuffle(&mut rng);
            for p in order {
                tree.insert(&o, inst.rank(Axis::Y, p) as usize, p);
                assert!(tree.check_invariants(&o));
            }
        }
    }

    #[test]
    fn every_orientation_is_needed() {
        // For each orientation there is an instance where dropping it loses a
        // participating point.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for skip in Orientation::ALL {
            let keep: Vec<_> = Orientation::ALL
                .into_iter()
                .filter(|&o| o != skip)
                .collect();
            let found = (0..2000).any(|_| {
                let inst = random_instance(&mut rng, 5);
                let o = RawOracle(&inst);
                let all: Vec<_> = (0..inst.len()).collect();
                participating_sweep_oriented(&o, &all, &keep).len()
                    < oracle_participating(&inst).len()
            });
            assert!(found, "dropping {skip:?} never mattered");
        }
    }

    #[test]
    fn subset_sweep_matches_sub_instance() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let inst = random_instance(&mut rng, 30);
            let mut ids: Vec<PointId> = (0..30).filter(|_| rng.gen_bool(0.6)).collect();
            ids.shuffle(&mut rng);
            let got: BTreeSet<_> = participating_sweep(&RawOracle(&inst), &ids)
                .into_iter()
                .collect();
            let sub = inst.subset(&ids);
            let expect: BTreeSet<_> = oracle_participating(&sub)
                .into_iter()
                .map(|i| ids[i])
                .collect();
            assert_eq!(got, expect);
        }
    }
}
