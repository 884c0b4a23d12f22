//! The pruning loop: partition the surviving points into `r_j = 2^(2^j)`
//! kd-cells, discard every cell whose bounding box is safe, and solve what
//! remains with the sweep.
//!
//! Range-emptiness queries of a round are answered offline on a rank grid
//! built from the batch's own query bounds.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::baseline::{bichromatic_pairs_sweep, participating_sweep};
use crate::compare::CoordOracle;
use crate::crosstree::{
    build_cross_safety_trees, build_mono_runs, slab_queries, test_box_safe, CrossTrees, MonoRuns,
    PresetEmptiness, QueryRanges, QueryTrace, ScanEmptiness,
};
use crate::error::{Error, Result};
use crate::geom::{cmp_bounds, cmp_point, Axis, Bound, Color, PointId, Side, SymBox};
use crate::kdtree::kd_partition;
use crate::oracle::{Pair, Safety};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EmptinessMode {
    /// Offline batches on a rank grid.
    Grid,
    /// One linear scan per query.
    Scan,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OptimalConfig {
    pub delta: f64,
    /// Stop pruning once at most this many points remain.
    pub cutoff: usize,
    pub emptiness: EmptinessMode,
    /// Decide cell cross-safety from the monochromatic runs instead of slab
    /// emptiness queries.
    pub runs_cross_check: bool,
}

impl Default for OptimalConfig {
    fn default() -> Self {
        OptimalConfig {
            delta: DEFAULT_DELTA,
            cutoff: 32,
            emptiness: EmptinessMode::Grid,
            runs_cross_check: true,
        }
    }
}

pub const DEFAULT_DELTA: f64 = 0.4;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RoundStats {
    pub j: u32,
    pub r_j: u64,
    pub cells: usize,
    pub pruned_points: usize,
    pub remaining: usize,
    /// Comparisons spent in this round.
    pub comparisons_at_round: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OptimalRun {
    /// Participating points, ascending.
    pub participating: Vec<PointId>,
    pub rounds: Vec<RoundStats>,
    /// Size of the set handed to the final sweep.
    pub final_size: usize,
    /// The set handed to the final sweep.
    #[serde(skip)]
    pub survivors: Vec<PointId>,
}

/// Index of the last round, or `None` when `delta * log2 n < 1`.
pub fn last_round(n: usize, delta: f64) -> Option<u32> {
    if n < 2 {
        return None;
    }
    let t = delta * (n as f64).log2();
    (t >= 1.0).then(|| t.log2().floor() as u32)
}

// ---------------------------------------------------------------------------
// Offline emptiness
// ---------------------------------------------------------------------------

/// Sorted distinct finite bounds of one axis, with each subset point placed
/// in a slot: `2i` strictly between bounds `i-1` and `i`, `2i+1` on bound `i`.
struct AxisGrid {
    bounds: Vec<Bound>,
    index: HashMap<Bound, usize>,
}

impl AxisGrid {
    fn new<O: CoordOracle + ?Sized>(o: &O, axis: Axis, mut bounds: Vec<Bound>) -> Self {
        bounds.sort_by(|&a, &b| cmp_bounds(o, axis, a, b));
        bounds.dedup();
        let index = bounds.iter().enumerate().map(|(i, &b)| (b, i)).collect();
        AxisGrid { bounds, index }
    }

    fn slots(&self) -> usize {
        2 * self.bounds.len() + 1
    }

    fn slot_of<O: CoordOracle + ?Sized>(&self, o: &O, axis: Axis, p: PointId) -> usize {
        let i = self
            .bounds
            .partition_point(|&b| cmp_point(o, axis, p, b) == Ordering::Greater);
        let on = self.bounds.get(i).is_some_and(|&b| {
            matches!(
                b,
                Bound::At {
                    side: Side::Exactly,
                    ..
                }
            ) && cmp_point(o, axis, p, b) == Ordering::Equal
        });
        2 * i + on as usize
    }

    fn index(&self, b: Bound) -> usize {
        self.index[&b]
    }

    /// Inclusive slot range of `[lo, hi]`.
    fn span(&self, lo: Bound, hi: Bound) -> (usize, usize) {
        let a = match lo {
            Bound::NegInf => 0,
            Bound::PosInf => self.slots(),
            b => 2 * self.index(b) + 1,
        };
        let z = match hi {
            Bound::NegInf => return (1, 0),
            Bound::PosInf => self.slots() - 1,
            b => 2 * self.index(b) + 1,
        };
        (a, z)
    }
}

/// Answers "does `box` contain a `color` point of `subset`?" for every query,
/// in `O(m log r)` comparisons for `m` points and `r` queries.
pub fn batch_emptiness<O: CoordOracle + ?Sized>(
    o: &O,
    subset: &[PointId],
    queries: &[(SymBox, Color)],
) -> Vec<bool> {
    if subset.is_empty() || queries.is_empty() {
        return vec![false; queries.len()];
    }
    let finite = |f: fn(&SymBox) -> [Bound; 2]| -> Vec<Bound> {
        queries
            .iter()
            .flat_map(|(b, _)| f(b))
            .filter(|b| b.is_finite())
            .collect()
    };
    let gx = AxisGrid::new(o, Axis::X, finite(|b| [b.x_min, b.x_max]));
    let gy = AxisGrid::new(o, Axis::Y, finite(|b| [b.y_min, b.y_max]));
    let (w, h) = (gx.slots(), gy.slots());
    // prefix[c][(i+1)*(h+1) + (j+1)] = points of color c in slots <= (i, j)
    let stride = h + 1;
    let mut prefix = [vec![0u32; (w + 1) * stride], vec![0u32; (w + 1) * stride]];
    for &p in subset {
        let (sx, sy) = (gx.slot_of(o, Axis::X, p), gy.slot_of(o, Axis::Y, p));
        prefix[o.color(p).index()][(sx + 1) * stride + sy + 1] += 1;
    }
    for grid in &mut prefix {
        for i in 1..=w {
            for j in 1..=h {
                grid[i * stride + j] += grid[(i - 1) * stride + j] + grid[i * stride + j - 1]
                    - grid[(i - 1) * stride + j - 1];
            }
        }
    }
    queries
        .iter()
        .map(|(b, color)| {
            let (x0, x1) = gx.span(b.x_min, b.x_max);
            let (y0, y1) = gy.span(b.y_min, b.y_max);
            if x0 > x1 || y0 > y1 {
                return false;
            }
            let g = &prefix[color.index()];
            let at = |i: usize, j: usize| g[i * stride + j] as i64;
            at(x1 + 1, y1 + 1) - at(x0, y1 + 1) - at(x1 + 1, y0) + at(x0, y0) > 0
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Rounds
// ---------------------------------------------------------------------------

struct Cell {
    points: Vec<PointId>,
    bbox: SymBox,
}

/// Safety of every cell against the subset `q`, batching all emptiness
/// queries of one stage.
fn classify_cells<O: CoordOracle>(
    o: &O,
    runs: &MonoRuns,
    trees: &CrossTrees,
    q: &[PointId],
    cells: &[Cell],
    cfg: &OptimalConfig,
) -> Result<Vec<Safety>> {
    if cfg.emptiness == EmptinessMode::Scan {
        let mut em = ScanEmptiness::new(o, q);
        return cells
            .iter()
            .map(|c| test_box_safe(trees, o, &mut em, &c.bbox, c.points[0]))
            .collect();
    }
    // stage A: cross-safety. On a conforming subset, a cell's slabs hold no
    // opposite color iff the cell is one color within one run on each axis.
    let mut verdict: Vec<Option<Safety>> = if cfg.runs_cross_check {
        cells
            .iter()
            .map(|c| (!runs.is_cross_safe_cell(o, &c.points)).then_some(Safety::NotSafe))
            .collect()
    } else {
        let slabs: Vec<(SymBox, Color)> = cells
            .iter()
            .flat_map(|c| slab_queries(&c.bbox, o.color(c.points[0])))
            .collect();
        batch_emptiness(o, q, &slabs)
            .chunks(2)
            .map(|h| (h[0] || h[1]).then_some(Safety::NotSafe))
            .collect()
    };

    // stage B: corner-leaf probes found by a descent, answered per leaf
    // against the surviving points of that leaf, then the full queries
    // trees viewing one shared partition can pool probes on the same leaf
    let shared = trees
        .trees
        .iter()
        .all(|t| t.kd.order == trees.trees[0].kd.order);
    // (tree, leaf) -> (cell, tree, leaf, probe box, color)
    type Probe = (usize, usize, usize, SymBox, Color);
    let mut groups: BTreeMap<(usize, usize), Vec<Probe>> = BTreeMap::new();
    for (i, cell) in cells.iter().enumerate() {
        if verdict[i].is_some() {
            continue;
        }
        let color = o.color(cell.points[0]);
        for (t, tree) in trees.trees.iter().enumerate() {
            let ranges = QueryRanges::quadrant(&cell.bbox.reflect(tree.orientation));
            if let Some((probe, leaf)) = tree.corner_request(o, color, &ranges) {
                let key = (if shared { 0 } else { t }, tree.kd.nodes[leaf].range.start);
                groups
                    .entry(key)
                    .or_default()
                    .push((i, t, leaf, probe, color));
            }
        }
    }
    let mut in_q = vec![false; o.len()];
    for &p in q {
        in_q[p] = true;
    }
    let mut owners = Vec::new();
    let mut answers = Vec::new();
    for probes in groups.values() {
        let (t, leaf) = (probes[0].1, probes[0].2);
        let tree = &trees.trees[t];
        let members: Vec<PointId> = tree
            .kd
            .points(leaf)
            .iter()
            .copied()
            .filter(|&p| in_q[p])
            .collect();
        let leaf_box = tree.kd.nodes[leaf].bbox.reflect(tree.orientation);
        // every candidate lies in the leaf box, so its sides can be dropped
        let open = |b: &SymBox| SymBox {
            x_min: if b.x_min == leaf_box.x_min {
                Bound::NegInf
            } else {
                b.x_min
            },
            x_max: if b.x_max == leaf_box.x_max {
                Bound::PosInf
            } else {
                b.x_max
            },
            y_min: if b.y_min == leaf_box.y_min {
                Bound::NegInf
            } else {
                b.y_min
            },
            y_max: if b.y_max == leaf_box.y_max {
                Bound::PosInf
            } else {
                b.y_max
            },
        };
        let queries: Vec<(SymBox, Color)> =
            probes.iter().map(|(_, _, _, b, c)| (open(b), *c)).collect();
        // up to two scans cost no more than placing points on a grid
        if queries.len() <= 2 {
            answers.extend(queries.iter().map(|(b, c)| {
                members
                    .iter()
                    .any(|&p| o.color(p) == *c && b.contains(o, p))
            }));
        } else {
            answers.extend(batch_emptiness(o, &members, &queries));
        }
        owners.extend(probes.iter().map(|&(i, t, ..)| (i, t)));
    }
    let mut preset = vec![[None; 4]; cells.len()];
    for (&(i, t), &a) in owners.iter().zip(&answers) {
        preset[i][t] = Some(a);
    }
    for (i, cell) in cells.iter().enumerate() {
        if verdict[i].is_some() {
            continue;
        }
        let color = o.color(cell.points[0]);
        let mut safe = true;
        for (t, tree) in trees.trees.iter().enumerate() {
            let ranges = QueryRanges::quadrant(&cell.bbox.reflect(tree.orientation));
            let mut em = PresetEmptiness {
                answer: preset[i][t],
                unexpected: 0,
            };
            let res = tree.query(o, color, &ranges, &mut em, &mut QueryTrace::default())?;
            if em.unexpected > 0 {
                return Err(Error::InconsistentState(format!(
                    "query for cell {i} issued a probe the pre-pass did not predict"
                )));
            }
            if res.bx != Bound::PosInf {
                safe = false;
                break;
            }
        }
        verdict[i] = Some(if !safe {
            Safety::NotSafe
        } else if color == Color::Red {
            Safety::RedSafe
        } else {
            Safety::BlueSafe
        });
    }
    Ok(verdict
        .into_iter()
        .map(|v| v.expect("classified"))
        .collect())
}

/// Reports the participating points. `runs` and `trees` must be built on the
/// full input behind `o`.
pub fn run_instance_optimal<O: CoordOracle>(
    o: &O,
    runs: &MonoRuns,
    trees: &CrossTrees,
    cfg: &OptimalConfig,
) -> Result<OptimalRun> {
    let n = o.len();
    let mut q: Vec<PointId> = (0..n).collect();
    let mut rounds = Vec::new();
    if let Some(last) = last_round(n, cfg.delta) {
        for j in 0..=last.min(5) {
            if q.len() <= cfg.cutoff {
                break;
            }
            let before = o.comparisons();
            let depth = 1u32 << j;
            let cells: Vec<Cell> = kd_partition(o, q.clone(), depth)
                .into_iter()
                .map(|(points, bbox)| Cell { points, bbox })
                .collect();
            let verdicts = classify_cells(o, runs, trees, &q, &cells, cfg)?;
            let mut keep = Vec::with_capacity(q.len());
            let mut pruned = 0;
            for (cell, v) in cells.iter().zip(&verdicts) {
                if v.is_safe() {
                    pruned += cell.points.len();
                } else {
                    keep.extend_from_slice(&cell.points);
                }
            }
            keep.sort_unstable();
            q = keep;
            rounds.push(RoundStats {
                j,
                r_j: 1u64 << depth,
                cells: cells.len(),
                pruned_points: pruned,
                remaining: q.len(),
                comparisons_at_round: o.comparisons() - before,
            });
        }
    }
    let final_size = q.len();
    let mut participating = participating_sweep(o, &q);
    participating.sort_unstable();
    Ok(OptimalRun {
        participating,
        rounds,
        final_size,
        survivors: q,
    })
}

/// Builds the preprocessing structures and runs the pruning loop.
pub fn report_participating_optimal<O: CoordOracle>(
    o: &O,
    cfg: &OptimalConfig,
) -> Result<OptimalRun> {
    let runs = build_mono_runs(o);
    let trees = build_cross_safety_trees(o, &runs);
    run_instance_optimal(o, &runs, &trees, cfg)
}

/// All bichromatic visible pairs: prune, then run the pair sweep on the
/// participating points only.
pub fn report_pairs_instance_optimal<O: CoordOracle>(
    o: &O,
    runs: &MonoRuns,
    trees: &CrossTrees,
    cfg: &OptimalConfig,
) -> Result<(BTreeSet<Pair>, OptimalRun)> {
    let run = run_instance_optimal(o, runs, trees, cfg)?;
    let pairs = bichromatic_pairs_sweep(o, &run.participating);
    Ok((pairs, run))
}

pub fn report_pairs_optimal<O: CoordOracle>(
    o: &O,
    cfg: &OptimalConfig,
) -> Result<(BTreeSet<Pair>, OptimalRun)> {
    let runs = build_mono_runs(o);
    let trees = build_cross_safety_trees(o, &runs);
    report_pairs_instance_optimal(o, &runs, &trees, cfg)
}
