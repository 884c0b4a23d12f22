//! An adversary that answers comparisons lazily.
//!
//! Each color gets a kd-tree over its points that stops at safe cells. Every
//! input index is mapped to a box of its color's tree and only descends when
//! a comparison forces it to; an index reaching a leaf is assigned a free
//! point of that leaf. Once the algorithm stops, floating indices are pushed
//! down arbitrarily, which yields a permutation consistent with every answer.

use std::cell::RefCell;
use std::cmp::Ordering;

use serde::Serialize;

use crate::compare::{CmpRecord, CoordOracle, RawOracle};
use crate::entropy::SafetyTester;
use crate::error::{Error, Result};
use crate::geom::{Axis, Color, PointId};
use crate::instance::Instance;
use crate::kdtree::{build_c_kdtree, KdTree};

/// Coordinate ranks just below and above the split line of a node: every
/// point of the lower child is at most `lo_max`, every point of the upper
/// child at least `hi_min`.
#[derive(Clone, Copy, Debug)]
struct SplitLine {
    axis: Axis,
    lo_max: u32,
    hi_min: u32,
    children: [usize; 2],
}

impl SplitLine {
    /// Twice the line's position, so lines compare exactly.
    fn doubled(&self) -> u64 {
        u64::from(self.lo_max) + u64::from(self.hi_min)
    }
}

/// The safe-stopping kd-tree of one color with per-box index loads.
#[derive(Clone, Debug)]
pub struct AdvTree {
    pub color: Color,
    pub kd: KdTree,
    lines: Vec<Option<SplitLine>>,
    parent: Vec<Option<usize>>,
    /// `n(B)`: indices mapped to the box or one of its descendants.
    load: Vec<u32>,
    /// Unassigned points per leaf.
    free: Vec<Vec<PointId>>,
}

impl AdvTree {
    fn build(inst: &Instance, color: Color, safety: &mut dyn SafetyTester) -> AdvTree {
        let raw = RawOracle(inst);
        let kd = build_c_kdtree(&raw, inst.ids_of(color), None, |cell, b, _| {
            safety.is_safe(b, cell[0])
        });
        let m = kd.nodes.len();
        let mut lines = vec![None; m];
        let mut parent = vec![None; m];
        let mut free = vec![Vec::new(); m];
        for (v, node) in kd.nodes.iter().enumerate() {
            match node.split {
                Some((axis, children)) => {
                    for c in children {
                        parent[c] = Some(v);
                    }
                    let ranks = |c: usize| kd.points(c).iter().map(|&p| inst.rank(axis, p));
                    lines[v] = Some(SplitLine {
                        axis,
                        lo_max: ranks(children[0]).max().expect("non-empty child"),
                        hi_min: ranks(children[1]).min().expect("non-empty child"),
                        children,
                    });
                }
                None => {
                    let mut pts = kd.points(v).to_vec();
                    pts.sort_unstable_by(|a, b| b.cmp(a));
                    free[v] = pts;
                }
            }
        }
        let mut load = vec![0; m];
        if m > 0 {
            load[0] = kd.nodes[0].len() as u32;
        }
        AdvTree {
            color,
            kd,
            lines,
            parent,
            load,
            free,
        }
    }

    pub fn capacity(&self, node: usize) -> u32 {
        self.kd.nodes[node].len() as u32
    }

    pub fn load(&self, node: usize) -> u32 {
        self.load[node]
    }

    pub fn is_full(&self, node: usize) -> bool {
        self.load[node] >= self.capacity(node)
    }

    pub fn is_leaf(&self, node: usize) -> bool {
        self.kd.nodes[node].is_leaf()
    }

    fn depth(&self, node: usize) -> u64 {
        u64::from(self.kd.nodes[node].depth)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum IndexState {
    /// Mapped to an interior box.
    Floating(usize),
    /// Mapped to a leaf box and assigned a point.
    Fixed { node: usize, point: PointId },
}

impl IndexState {
    pub fn node(self) -> usize {
        match self {
            IndexState::Floating(v) | IndexState::Fixed { node: v, .. } => v,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AdvCounters {
    pub queries: u64,
    /// Increments resolving a query.
    pub ordinary: u64,
    /// Forced moves into the other child when the wanted one is full.
    pub exceptional: u64,
    /// Moves off a box whose split axis differs from the query's.
    pub step2: u64,
    /// Sum of index depths when the algorithm stopped.
    pub d: u64,
    /// Sum of index depths after every index was pushed to a leaf.
    pub d_post: u64,
    /// Queries after which the invariant check failed (only counted when
    /// per-query checking is enabled).
    pub invariant_violations: u64,
}

impl AdvCounters {
    pub fn increments(&self) -> u64 {
        self.ordinary + self.exceptional + self.step2
    }
}

#[derive(Clone, Debug)]
struct State {
    trees: [AdvTree; 2],
    index: Vec<IndexState>,
    depth_sum: u64,
    counters: AdvCounters,
    transcript: Vec<CmpRecord>,
}

impl State {
    /// Moves index `i` one level down into `child`, assigning a point on
    /// reaching a leaf.
    fn descend(&mut self, i: usize, colors: &[Color], child: usize) -> Result<()> {
        let t = &mut self.trees[colors[i].index()];
        if t.is_full(child) {
            return Err(Error::InconsistentState(format!(
                "index {i} pushed into full box {child}"
            )));
        }
        t.load[child] += 1;
        self.depth_sum += 1;
        self.index[i] = if t.is_leaf(child) {
            let point = t.free[child].pop().ok_or_else(|| {
                Error::InconsistentState(format!("leaf {child} has no free point"))
            })?;
            IndexState::Fixed { node: child, point }
        } else {
            IndexState::Floating(child)
        };
        Ok(())
    }

    fn line(&self, i: usize, colors: &[Color]) -> Option<SplitLine> {
        match self.index[i] {
            IndexState::Floating(v) => self.trees[colors[i].index()].lines[v],
            IndexState::Fixed { .. } => None,
        }
    }

    /// First non-full child, lower/left first.
    fn open_child(&self, i: usize, colors: &[Color], line: &SplitLine) -> Result<usize> {
        let t = &self.trees[colors[i].index()];
        line.children
            .into_iter()
            .find(|&c| !t.is_full(c))
            .ok_or_else(|| {
                Error::InconsistentState(format!("both children of index {i}'s box are full"))
            })
    }

    /// Recomputes loads, depths and assignments from scratch.
    fn invariant_holds(&self, colors: &[Color]) -> bool {
        let mut load = [
            vec![0u32; self.trees[0].load.len()],
            vec![0u32; self.trees[1].load.len()],
        ];
        let mut used = vec![false; colors.len()];
        let mut depth = 0;
        for (i, s) in self.index.iter().enumerate() {
            let ci = colors[i].index();
            let t = &self.trees[ci];
            let mut v = Some(s.node());
            depth += t.depth(s.node());
            while let Some(u) = v {
                load[ci][u] += 1;
                v = t.parent[u];
            }
            if let IndexState::Fixed { node, point } = *s {
                if std::mem::replace(&mut used[point], true) || !t.kd.points(node).contains(&point)
                {
                    return false;
                }
            }
        }
        depth == self.depth_sum
            && (0..2).all(|c| {
                let t = &self.trees[c];
                load[c] == t.load && (0..load[c].len()).all(|v| load[c][v] <= t.capacity(v))
            })
    }
}

/// Answers comparisons for an algorithm that only knows the color of each
/// index, committing to point identities as late as possible.
pub struct Adversary<'a> {
    inst: &'a Instance,
    colors: Vec<Color>,
    check_every_query: bool,
    state: RefCell<State>,
}

/// The permutation the adversary committed to and its bookkeeping.
#[derive(Clone, Debug, Serialize)]
pub struct AdversaryOutcome {
    /// `sigma[i]` is the point of the instance placed at index `i`.
    pub sigma: Vec<PointId>,
    pub counters: AdvCounters,
    /// `D_post - D <= 4 (n - 1)`.
    pub chips_bound_holds: bool,
    #[serde(skip)]
    pub transcript: Vec<CmpRecord>,
}

impl AdversaryOutcome {
    /// The instance the answers were consistent with.
    pub fn permuted(&self, inst: &Instance) -> Instance {
        inst.permuted(&self.sigma)
    }

    /// Re-answers the transcript from `sigma(S)`; returns the number of
    /// answers that differ.
    pub fn replay_mismatches(&self, inst: &Instance) -> usize {
        let s = self.permuted(inst);
        let raw = RawOracle(&s);
        self.transcript
            .iter()
            .filter(|r| raw.compare(r.axis, r.a, r.b) != r.ordering())
            .count()
    }
}

impl<'a> Adversary<'a> {
    /// Builds both trees (safety tested against all of `inst`) and maps every
    /// index to its color's root.
    pub fn new(inst: &'a Instance, safety: &mut dyn SafetyTester) -> Self {
        let colors = inst.colors();
        let trees = [Color::Red, Color::Blue].map(|c| AdvTree::build(inst, c, safety));
        let mut st = State {
            trees,
            index: vec![IndexState::Floating(0); inst.len()],
            depth_sum: 0,
            counters: AdvCounters::default(),
            transcript: Vec::new(),
        };
        for (i, &c) in colors.iter().enumerate() {
            let t = &mut st.trees[c.index()];
            st.index[i] = if t.is_leaf(0) {
                let point = t.free[0].pop().expect("root capacity equals color count");
                IndexState::Fixed { node: 0, point }
            } else {
                IndexState::Floating(0)
            };
        }
        Adversary {
            inst,
            colors,
            check_every_query: false,
            state: RefCell::new(st),
        }
    }

    /// Re-verifies the invariant after every answered query.
    pub fn with_invariant_checks(mut self) -> Self {
        self.check_every_query = true;
        self
    }

    pub fn tree(&self, color: Color) -> AdvTree {
        self.state.borrow().trees[color.index()].clone()
    }

    pub fn index_state(&self, i: usize) -> IndexState {
        self.state.borrow().index[i]
    }

    pub fn counters(&self) -> AdvCounters {
        self.state.borrow().counters
    }

    /// Sum of the depths of the boxes indices are currently mapped to.
    pub fn depth_sum(&self) -> u64 {
        self.state.borrow().depth_sum
    }

    pub fn invariant_holds(&self) -> bool {
        self.state.borrow().invariant_holds(&self.colors)
    }

    fn answer(&self, axis: Axis, i: usize, j: usize) -> Result<Ordering> {
        let colors = &self.colors;
        let mut st = self.state.borrow_mut();
        loop {
            if let (IndexState::Fixed { point: p, .. }, IndexState::Fixed { point: q, .. }) =
                (st.index[i], st.index[j])
            {
                return Ok(self.inst.rank(axis, p).cmp(&self.inst.rank(axis, q)));
            }
            // step 2: leave boxes split on the other axis
            let mut moved = false;
            for k in [i, j] {
                if let Some(line) = st.line(k, colors).filter(|l| l.axis != axis) {
                    let c = st.open_child(k, colors, &line)?;
                    st.descend(k, colors, c)?;
                    st.counters.step2 += 1;
                    moved = true;
                }
            }
            if moved {
                continue;
            }
            match (st.line(i, colors), st.line(j, colors)) {
                (Some(li), Some(lj)) => {
                    // the index whose line is further left goes left
                    let (lo, hi, llo, lhi) = if li.doubled() <= lj.doubled() {
                        (i, j, li, lj)
                    } else {
                        (j, i, lj, li)
                    };
                    let (a, b) = (llo.children[0], lhi.children[1]);
                    let a_full = st.trees[colors[lo].index()].is_full(a);
                    let b_full = st.trees[colors[hi].index()].is_full(b);
                    if !a_full && !b_full {
                        st.descend(lo, colors, a)?;
                        st.descend(hi, colors, b)?;
                        st.counters.ordinary += 2;
                        return Ok(if lo == i {
                            Ordering::Less
                        } else {
                            Ordering::Greater
                        });
                    }
                    if a_full {
                        st.descend(lo, colors, llo.children[1])?;
                    } else {
                        st.descend(hi, colors, lhi.children[0])?;
                    }
                    st.counters.exceptional += 1;
                }
                (Some(line), None) | (None, Some(line)) => {
                    let (f, fixed) = if st.line(i, colors).is_some() {
                        (i, j)
                    } else {
                        (j, i)
                    };
                    let IndexState::Fixed { point: q, .. } = st.index[fixed] else {
                        unreachable!("one index floats, the other is fixed")
                    };
                    // going left is valid when q lies right of the line
                    let left = 2 * u64::from(self.inst.rank(axis, q)) >= line.doubled();
                    let want = line.children[usize::from(!left)];
                    if !st.trees[colors[f].index()].is_full(want) {
                        st.descend(f, colors, want)?;
                        st.counters.ordinary += 1;
                        return Ok(if (f == i) == left {
                            Ordering::Less
                        } else {
                            Ordering::Greater
                        });
                    }
                    st.descend(f, colors, line.children[usize::from(left)])?;
                    st.counters.exceptional += 1;
                }
                (None, None) => unreachable!("fixed pairs are answered above"),
            }
        }
    }

    /// Pushes every floating index down (lower/left non-full child first) and
    /// returns the committed permutation.
    pub fn finalize(self) -> Result<AdversaryOutcome> {
        let colors = self.colors;
        let mut st = self.state.into_inner();
        st.counters.d = st.depth_sum;
        for i in 0..colors.len() {
            while let Some(line) = st.line(i, &colors) {
                let c = st.open_child(i, &colors, &line)?;
                st.descend(i, &colors, c)?;
            }
        }
        st.counters.d_post = st.depth_sum;
        let n = colors.len() as u64;
        let sigma = st
            .index
            .iter()
            .map(|s| match *s {
                IndexState::Fixed { point, .. } => Ok(point),
                IndexState::Floating(v) => {
                    Err(Error::InconsistentState(format!("index left at box {v}")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(AdversaryOutcome {
            sigma,
            chips_bound_holds: st.counters.d_post - st.counters.d <= 4 * n.saturating_sub(1),
            counters: st.counters,
            transcript: st.transcript,
        })
    }
}

impl CoordOracle for Adversary<'_> {
    fn len(&self) -> usize {
        self.colors.len()
    }

    fn color(&self, id: PointId) -> Color {
        self.colors[id]
    }

    fn compare(&self, axis: Axis, a: PointId, b: PointId) -> Ordering {
        if a == b {
            return Ordering::Equal;
        }
        let ord = self
            .answer(axis, a, b)
            .expect("invariant I guarantees a non-full child");
        let mut st = self.state.borrow_mut();
        st.counters.queries += 1;
        st.transcript.push(CmpRecord {
            axis,
            a,
            b,
            outcome: ord as i8,
        });
        if self.check_every_query && !st.invariant_holds(&self.colors) {
            st.counters.invariant_violations += 1;
        }
        ord
    }

    fn comparisons(&self) -> u64 {
        self.state.borrow().counters.queries
    }
}
