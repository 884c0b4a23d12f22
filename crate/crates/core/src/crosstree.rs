//! Cross-safety trees: kd-trees that stop at cross-safe cells, with payloads
//! answering "does the staircase of a quadrant contain an opposite-color
//! point?" in `O(sqrt(n) log n)` comparisons plus one range-emptiness probe.
//!
//! One tree is built per [`Orientation`], each in the reflected frame that
//! maps its quadrant direction onto NE. Inside a tree everything is NE: the
//! staircase of a region is its set of minimal points, and a red leaf's
//! box-point is the top-right corner of its (extended) bounding box.

use std::cmp::Ordering;

use serde::Serialize;

use crate::compare::{CoordOracle, Reflected};
use crate::error::{Error, Result};
use crate::geom::{
    cmp_bounds, cmp_point, min_bound, Axis, Bound, Color, Orientation, PointId, SymBox,
};
use crate::kdtree::{build_c_kdtree, KdTree};
use crate::oracle::Safety;

// ---------------------------------------------------------------------------
// Monochromatic runs
// ---------------------------------------------------------------------------

/// A maximal run of same-colored points along one axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Run {
    pub color: Color,
    /// Open interval of the run: just above the previous opposite-color point
    /// (or -inf) to just below the next one (or +inf).
    pub lo: Bound,
    pub hi: Bound,
}

/// Per axis, the maximal monochromatic interval containing each point.
#[derive(Clone, Debug)]
pub struct MonoRuns {
    run_of: [Vec<u32>; 2],
    runs: [Vec<Run>; 2],
}

fn axis_slot(axis: Axis) -> usize {
    match axis {
        Axis::X => 0,
        Axis::Y => 1,
    }
}

impl MonoRuns {
    pub fn run_id(&self, axis: Axis, p: PointId) -> u32 {
        self.run_of[axis_slot(axis)][p]
    }

    pub fn run(&self, axis: Axis, p: PointId) -> &Run {
        &self.runs[axis_slot(axis)][self.run_id(axis, p) as usize]
    }

    pub fn runs(&self, axis: Axis) -> &[Run] {
        &self.runs[axis_slot(axis)]
    }

    /// The interval `I_axis(p)`.
    pub fn interval(&self, axis: Axis, p: PointId) -> (Bound, Bound) {
        let r = self.run(axis, p);
        (r.lo, r.hi)
    }

    /// All of `ids` lie in one monochromatic run on `axis`.
    pub fn same_run(&self, axis: Axis, ids: &[PointId]) -> bool {
        match ids.split_first() {
            None => true,
            Some((&f, rest)) => {
                let id = self.run_id(axis, f);
                rest.iter().all(|&p| self.run_id(axis, p) == id)
            }
        }
    }

    /// Cross-safety of a cell in `O(|cell|)` time and no comparisons: one
    /// color, and one run on each axis.
    pub fn is_cross_safe_cell<O: CoordOracle + ?Sized>(&self, o: &O, cell: &[PointId]) -> bool {
        let Some(&f) = cell.first() else {
            return true;
        };
        let c = o.color(f);
        cell.iter().all(|&p| o.color(p) == c)
            && self.same_run(Axis::X, cell)
            && self.same_run(Axis::Y, cell)
    }
}

struct Leaf1d {
    color: Color,
    start: usize,
    len: usize,
}

fn split_1d<O: CoordOracle + ?Sized>(
    o: &O,
    axis: Axis,
    ids: &mut [PointId],
    start: usize,
    len: usize,
    leaves: &mut Vec<Leaf1d>,
) {
    let cell = &mut ids[start..start + len];
    let color = o.color(cell[0]);
    if cell.iter().all(|&p| o.color(p) == color) {
        leaves.push(Leaf1d { color, start, len });
        return;
    }
    let k = len.div_ceil(2);
    cell.select_nth_unstable_by(k, |&a, &b| o.compare(axis, a, b));
    split_1d(o, axis, ids, start, k, leaves);
    split_1d(o, axis, ids, start + k, len - k, leaves);
}

fn extreme<O: CoordOracle + ?Sized>(
    o: &O,
    axis: Axis,
    cell: &[PointId],
    want: Ordering,
) -> PointId {
    let mut best = cell[0];
    for &p in &cell[1..] {
        if o.compare(axis, p, best) == want {
            best = p;
        }
    }
    best
}

/// Builds the monochromatic runs on both axes with a 1-D kd-tree that stops
/// at monochromatic cells, then merges adjacent same-colored leaves. Only the
/// leaves at a color change are scanned for their extreme point.
pub fn build_mono_runs<O: CoordOracle + ?Sized>(o: &O) -> MonoRuns {
    let n = o.len();
    let mut run_of = [vec![u32::MAX; n], vec![u32::MAX; n]];
    let mut runs: [Vec<Run>; 2] = Default::default();
    if n == 0 {
        return MonoRuns { run_of, runs };
    }
    for axis in [Axis::X, Axis::Y] {
        let s = axis_slot(axis);
        let mut ids: Vec<PointId> = (0..n).collect();
        let mut leaves = Vec::new();
        split_1d(o, axis, &mut ids, 0, n, &mut leaves);
        // leaves come out in increasing coordinate order
        let mut merged: Vec<Run> = Vec::new();
        for (i, leaf) in leaves.iter().enumerate() {
            let cell = &ids[leaf.start..leaf.start + leaf.len];
            if i == 0 || leaves[i - 1].color != leaf.color {
                let lo = match merged.last_mut() {
                    None => Bound::NegInf,
                    Some(prev) => {
                        let last = extreme(
                            o,
                            axis,
                            &ids[leaves[i - 1].start..][..leaves[i - 1].len],
                            Ordering::Greater,
                        );
                        prev.hi = Bound::below(extreme(o, axis, cell, Ordering::Less));
                        Bound::above(last)
                    }
                };
                merged.push(Run {
                    color: leaf.color,
                    lo,
                    hi: Bound::PosInf,
                });
            }
            let id = (merged.len() - 1) as u32;
            for &p in cell {
                run_of[s][p] = id;
            }
        }
        runs[s] = merged;
    }
    MonoRuns { run_of, runs }
}

// ---------------------------------------------------------------------------
// Trees
// ---------------------------------------------------------------------------

/// Payload of a node for one color role `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RolePayload {
    /// Minimum x (resp. y) among box-points of `k`-colored leaves below.
    pub box_x: Bound,
    pub box_y: Bound,
    /// Relevant opposite-color points on the staircase of the node's points,
    /// by increasing x (hence decreasing y).
    pub list: Vec<PointId>,
}

impl RolePayload {
    fn empty() -> Self {
        RolePayload {
            box_x: Bound::PosInf,
            box_y: Bound::PosInf,
            list: Vec::new(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CrossTree {
    pub orientation: Orientation,
    /// kd-tree built in the reflected frame.
    pub kd: KdTree,
    /// Indexed by node, then by role color.
    pub payload: Vec<[RolePayload; 2]>,
}

#[derive(Clone, Debug)]
pub struct CrossTrees {
    pub trees: [CrossTree; 4],
}

impl CrossTrees {
    pub fn get(&self, o: Orientation) -> &CrossTree {
        &self.trees[o.index()]
    }
}

/// Query ranges in a tree's frame: `R_L = [x_lo, +inf) x [y_lo, +inf)` and
/// `R_U = (-inf, x_hi] x (-inf, y_hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QueryRanges {
    pub x_lo: Bound,
    pub y_lo: Bound,
    pub x_hi: Bound,
    pub y_hi: Bound,
}

impl QueryRanges {
    /// The NE quadrant of `b` (already in the tree's frame) with an unbounded
    /// upper range.
    pub fn quadrant(b: &SymBox) -> Self {
        QueryRanges {
            x_lo: b.x_max,
            y_lo: b.y_max,
            x_hi: Bound::PosInf,
            y_hi: Bound::PosInf,
        }
    }

    fn lower_region(&self) -> SymBox {
        SymBox {
            x_min: self.x_lo,
            x_max: Bound::PosInf,
            y_min: self.y_lo,
            y_max: Bound::PosInf,
        }
    }
}

/// Values in the tree's frame; `PosInf` when absent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QueryResult {
    pub rx: Bound,
    pub ry: Bound,
    pub bx: Bound,
    pub by: Bound,
}

impl QueryResult {
    pub const EMPTY: QueryResult = QueryResult {
        rx: Bound::PosInf,
        ry: Bound::PosInf,
        bx: Bound::PosInf,
        by: Bound::PosInf,
    };
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct QueryTrace {
    pub visits: u64,
    pub probes: u64,
}

/// Orthogonal range emptiness on the current point subset.
pub trait Emptiness {
    /// Does `b` (unreflected frame) contain a point of `color`? `leaf` lists
    /// the points of the whole set that can lie in `b`, when known.
    fn has_point(&mut self, b: &SymBox, color: Color, leaf: &[PointId]) -> bool;

    /// Is `id` part of the subset?
    fn contains(&self, _id: PointId) -> bool {
        true
    }
}

/// Linear scan over a subset.
pub struct ScanEmptiness<'a, O: ?Sized> {
    o: &'a O,
    members: Vec<PointId>,
    is_member: Vec<bool>,
}

impl<'a, O: CoordOracle + ?Sized> ScanEmptiness<'a, O> {
    pub fn new(o: &'a O, members: &[PointId]) -> Self {
        let mut is_member = vec![false; o.len()];
        for &p in members {
            is_member[p] = true;
        }
        ScanEmptiness {
            o,
            members: members.to_vec(),
            is_member,
        }
    }

    pub fn full(o: &'a O) -> Self {
        let all: Vec<PointId> = (0..o.len()).collect();
        Self::new(o, &all)
    }
}

impl<O: CoordOracle + ?Sized> Emptiness for ScanEmptiness<'_, O> {
    fn has_point(&mut self, b: &SymBox, color: Color, _leaf: &[PointId]) -> bool {
        let o = self.o;
        self.members
            .iter()
            .any(|&p| o.color(p) == color && b.contains(o, p))
    }

    fn contains(&self, id: PointId) -> bool {
        self.is_member.get(id).copied().unwrap_or(false)
    }
}

/// Emptiness on the full point set, scanning only the supplied leaf when the
/// caller provides one.
pub struct LeafScan<'a, O: ?Sized>(pub &'a O);

impl<O: CoordOracle + ?Sized> Emptiness for LeafScan<'_, O> {
    fn has_point(&mut self, b: &SymBox, color: Color, leaf: &[PointId]) -> bool {
        let o = self.0;
        if leaf.is_empty() {
            (0..o.len()).any(|p| o.color(p) == color && b.contains(o, p))
        } else {
            leaf.iter()
                .any(|&p| o.color(p) == color && b.contains(o, p))
        }
    }
}

/// Answers a single probe with a precomputed value.
pub struct PresetEmptiness {
    pub answer: Option<bool>,
    pub unexpected: u32,
}

impl Emptiness for PresetEmptiness {
    fn has_point(&mut self, _b: &SymBox, _color: Color, _leaf: &[PointId]) -> bool {
        match self.answer.take() {
            Some(a) => a,
            None => {
                self.unexpected += 1;
                true
            }
        }
    }
}

fn lt<O: CoordOracle + ?Sized>(o: &O, axis: Axis, a: Bound, b: Bound) -> bool {
    cmp_bounds(o, axis, a, b) == Ordering::Less
}

fn le<O: CoordOracle + ?Sized>(o: &O, axis: Axis, a: Bound, b: Bound) -> bool {
    cmp_bounds(o, axis, a, b) != Ordering::Greater
}

impl CrossTree {
    /// Builds the tree for `orientation` over all points of `o`.
    pub fn build<O: CoordOracle>(o: &O, runs: &MonoRuns, orientation: Orientation) -> CrossTree {
        let r = Reflected::new(o, orientation);
        let kd = build_c_kdtree(&r, (0..o.len()).collect(), None, |cell, _, _| {
            runs.is_cross_safe_cell(&r, cell)
        });
        Self::with_partition(o, kd, orientation)
    }

    /// The same tree seen from another orientation: boxes reflected, and
    /// children swapped wherever the split axis is flipped. Costs no
    /// comparisons beyond the new payloads.
    pub fn mirrored<O: CoordOracle>(&self, o: &O, orientation: Orientation) -> CrossTree {
        let rel = |axis| self.orientation.flips(axis) != orientation.flips(axis);
        let mut kd = self.kd.clone();
        for node in &mut kd.nodes {
            let mut b = node.bbox;
            if rel(Axis::X) {
                b = SymBox {
                    x_min: b.x_max.reflect(),
                    x_max: b.x_min.reflect(),
                    ..b
                };
            }
            if rel(Axis::Y) {
                b = SymBox {
                    y_min: b.y_max.reflect(),
                    y_max: b.y_min.reflect(),
                    ..b
                };
            }
            node.bbox = b;
            if let Some((axis, ch)) = node.split.as_mut() {
                if rel(*axis) {
                    ch.swap(0, 1);
                }
            }
        }
        Self::with_partition(o, kd, orientation)
    }

    fn with_partition<O: CoordOracle>(o: &O, kd: KdTree, orientation: Orientation) -> CrossTree {
        let r = Reflected::new(o, orientation);
        let mut payload: Vec<[RolePayload; 2]> =
            vec![[RolePayload::empty(), RolePayload::empty()]; kd.nodes.len()];
        for u in (0..kd.nodes.len()).rev() {
            let node = &kd.nodes[u];
            match node.split {
                None => {
                    let c = r.color(kd.points(u)[0]);
                    let b = node.bbox;
                    payload[u][c.index()].box_x = b.x_max;
                    payload[u][c.index()].box_y = b.y_max;
                    let (px, py) = (b.x_min.anchor().unwrap(), b.y_min.anchor().unwrap());
                    let list = if px == py { vec![px] } else { vec![px, py] };
                    payload[u][c.opposite().index()].list = list;
                }
                Some((axis, [v, w])) => {
                    let mut out = [RolePayload::empty(), RolePayload::empty()];
                    for role in Color::BOTH {
                        let k = role.index();
                        let (pv, pw) = (&payload[v][k], &payload[w][k]);
                        out[k].box_x = min_bound(&r, Axis::X, pv.box_x, pw.box_x);
                        out[k].box_y = min_bound(&r, Axis::Y, pv.box_y, pw.box_y);
                        out[k].list = match axis {
                            // far points survive below the near child's lowest point
                            Axis::X => {
                                let floor = kd.nodes[v].bbox.y_min;
                                let cut = pw
                                    .list
                                    .partition_point(|&p| cmp_point(&r, Axis::Y, p, floor).is_gt());
                                pv.list.iter().chain(&pw.list[cut..]).copied().collect()
                            }
                            Axis::Y => {
                                let floor = kd.nodes[v].bbox.x_min;
                                let cut = pw
                                    .list
                                    .partition_point(|&p| cmp_point(&r, Axis::X, p, floor).is_lt());
                                pw.list[..cut].iter().chain(&pv.list).copied().collect()
                            }
                        };
                    }
                    payload[u] = out;
                }
            }
        }
        CrossTree {
            orientation,
            kd,
            payload,
        }
    }

    pub fn leaf_color<O: CoordOracle + ?Sized>(&self, o: &O, node: usize) -> Option<Color> {
        if self.kd.nodes[node].is_leaf() {
            Some(o.color(self.kd.points(node)[0]))
        } else {
            None
        }
    }

    /// Runs the query with the four-case recursion.
    pub fn query<O: CoordOracle>(
        &self,
        o: &O,
        role: Color,
        ranges: &QueryRanges,
        em: &mut dyn Emptiness,
        trace: &mut QueryTrace,
    ) -> Result<QueryResult> {
        if self.kd.nodes.is_empty() {
            return Ok(QueryResult::EMPTY);
        }
        let r = Reflected::new(o, self.orientation);
        self.query_node(&r, 0, role, ranges, ranges.x_hi, ranges.y_hi, em, trace)
    }

    #[allow(clippy::too_many_arguments)]
    fn query_node<O: CoordOracle>(
        &self,
        r: &Reflected<&O>,
        u: usize,
        role: Color,
        ranges: &QueryRanges,
        x_hi: Bound,
        y_hi: Bound,
        em: &mut dyn Emptiness,
        trace: &mut QueryTrace,
    ) -> Result<QueryResult> {
        trace.visits += 1;
        let node = &self.kd.nodes[u];
        let b = node.bbox;
        if le(r, Axis::X, b.x_max, ranges.x_lo) || le(r, Axis::Y, b.y_max, ranges.y_lo) {
            return Ok(QueryResult::EMPTY);
        }
        let k = role.index();
        let pay = &self.payload[u][k];
        if le(r, Axis::X, ranges.x_lo, b.x_min) && le(r, Axis::Y, ranges.y_lo, b.y_min) {
            let mut res = QueryResult {
                rx: pay.box_x,
                ry: pay.box_y,
                ..QueryResult::EMPTY
            };
            let list = &pay.list;
            let i = list.partition_point(|&p| cmp_point(r, Axis::Y, p, y_hi).is_gt());
            if let Some(&p) = list.get(i) {
                if cmp_point(r, Axis::X, p, x_hi).is_le() {
                    res.bx = Bound::exactly(p);
                }
            }
            let j = list.partition_point(|&p| cmp_point(r, Axis::X, p, x_hi).is_le());
            if j > 0 {
                let q = list[j - 1];
                if cmp_point(r, Axis::Y, q, y_hi).is_le() {
                    res.by = Bound::exactly(q);
                }
            }
            return Ok(res);
        }
        match node.split {
            None => {
                let cell = self.kd.points(u);
                if r.color(cell[0]) != role {
                    return Err(Error::InvalidRanges(format!(
                        "R_L boundary crosses an opposite-role leaf box {b}"
                    )));
                }
                let corner =
                    lt(r, Axis::X, b.x_min, ranges.x_lo) && lt(r, Axis::Y, b.y_min, ranges.y_lo);
                let hit = if corner {
                    trace.probes += 1;
                    let probe = b
                        .intersect(r, &ranges.lower_region())
                        .reflect(self.orientation);
                    em.has_point(&probe, role, cell)
                } else {
                    true
                };
                Ok(if hit {
                    QueryResult {
                        rx: b.x_max,
                        ry: b.y_max,
                        ..QueryResult::EMPTY
                    }
                } else {
                    QueryResult::EMPTY
                })
            }
            Some((axis, [v, w])) => {
                let near = self.query_node(r, v, role, ranges, x_hi, y_hi, em, trace)?;
                let (fx, fy) = match axis {
                    Axis::X => (x_hi, min_bound(r, Axis::Y, y_hi, near.ry)),
                    Axis::Y => (min_bound(r, Axis::X, x_hi, near.rx), y_hi),
                };
                let far = self.query_node(r, w, role, ranges, fx, fy, em, trace)?;
                Ok(QueryResult {
                    rx: min_bound(r, Axis::X, near.rx, far.rx),
                    ry: min_bound(r, Axis::Y, near.ry, far.ry),
                    bx: min_bound(r, Axis::X, near.bx, far.bx),
                    by: min_bound(r, Axis::Y, near.by, far.by),
                })
            }
        }
    }

    /// The emptiness probe that [`CrossTree::query`] would issue for
    /// `ranges`, found by a single root-to-leaf descent toward the corner of
    /// `R_L`. Returns the probe box (unreflected frame) and the leaf.
    pub fn corner_request<O: CoordOracle>(
        &self,
        o: &O,
        role: Color,
        ranges: &QueryRanges,
    ) -> Option<(SymBox, usize)> {
        let r = Reflected::new(o, self.orientation);
        let contains_corner = |b: &SymBox| {
            lt(&r, Axis::X, b.x_min, ranges.x_lo)
                && lt(&r, Axis::X, ranges.x_lo, b.x_max)
                && lt(&r, Axis::Y, b.y_min, ranges.y_lo)
                && lt(&r, Axis::Y, ranges.y_lo, b.y_max)
        };
        let mut u = 0;
        if self.kd.nodes.is_empty() || !contains_corner(&self.kd.nodes[0].bbox) {
            return None;
        }
        loop {
            let node = &self.kd.nodes[u];
            match node.split {
                None => {
                    if r.color(self.kd.points(u)[0]) != role {
                        return None;
                    }
                    let probe = node.bbox.intersect(&r, &ranges.lower_region());
                    return Some((probe.reflect(self.orientation), u));
                }
                Some((_, ch)) => {
                    u = ch
                        .into_iter()
                        .find(|&c| contains_corner(&self.kd.nodes[c].bbox))?;
                }
            }
        }
    }

    pub fn dump(&self) -> TreeDump {
        TreeDump {
            orientation: self.orientation,
            nodes: self
                .kd
                .nodes
                .iter()
                .enumerate()
                .map(|(i, n)| NodeDump {
                    depth: n.depth,
                    size: n.len(),
                    bbox: n.bbox.reflect(self.orientation).to_string(),
                    leaf: n.is_leaf(),
                    list_len: [self.payload[i][0].list.len(), self.payload[i][1].list.len()],
                })
                .collect(),
        }
    }
}

/// Debug view of a tree for visualization scripts.
#[derive(Clone, Debug, Serialize)]
pub struct TreeDump {
    pub orientation: Orientation,
    pub nodes: Vec<NodeDump>,
}

#[derive(Clone, Debug, Serialize)]
pub struct NodeDump {
    pub depth: u32,
    pub size: usize,
    /// Bounding box in the unreflected frame.
    pub bbox: String,
    pub leaf: bool,
    /// Relevant-list lengths for the red and blue roles.
    pub list_len: [usize; 2],
}

/// Builds one cross-safe partition and views it from all four orientations.
pub fn build_cross_safety_trees<O: CoordOracle>(o: &O, runs: &MonoRuns) -> CrossTrees {
    let ne = CrossTree::build(o, runs, Orientation::NE);
    let [nw, se, sw] =
        [Orientation::NW, Orientation::SE, Orientation::SW].map(|orient| ne.mirrored(o, orient));
    CrossTrees {
        trees: [ne, nw, se, sw],
    }
}

/// Range-emptiness queries deciding cross-safety of `b` for the witness
/// color: the box's vertical and horizontal slabs must hold no opposite-color
/// point.
pub fn slab_queries(b: &SymBox, color: Color) -> [(SymBox, Color); 2] {
    [
        (b.vertical_slab(), color.opposite()),
        (b.horizontal_slab(), color.opposite()),
    ]
}

/// Decides whether `b` is safe for the subset behind `em`, which must
/// conform with the full set and contain `witness` inside `b`.
pub fn test_box_safe<O: CoordOracle>(
    trees: &CrossTrees,
    o: &O,
    em: &mut dyn Emptiness,
    b: &SymBox,
    witness: PointId,
) -> Result<Safety> {
    if !em.contains(witness) || !b.contains(o, witness) {
        return Err(Error::PreconditionViolated(format!(
            "witness {witness} is not a subset point inside {b}"
        )));
    }
    let c = o.color(witness);
    for (slab, color) in slab_queries(b, c) {
        if em.has_point(&slab, color, &[]) {
            return Ok(Safety::NotSafe);
        }
    }
    for tree in &trees.trees {
        let ranges = QueryRanges::quadrant(&b.reflect(tree.orientation));
        let res = tree.query(o, c, &ranges, em, &mut QueryTrace::default())?;
        if res.bx != Bound::PosInf {
            return Ok(Safety::NotSafe);
        }
    }
    Ok(match c {
        Color::Red => Safety::RedSafe,
        Color::Blue => Safety::BlueSafe,
    })
}
