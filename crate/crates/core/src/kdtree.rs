//! Median-split kd-trees with a pluggable stopping condition.
//!
//! Splits alternate x (even depth) and y (odd depth). Each node owns a
//! contiguous range of `order`; the lower half along the split axis goes to
//! the first child and has `ceil(len / 2)` points.

use std::ops::Range;

use crate::compare::CoordOracle;
use crate::geom::{Axis, PointId, SymBox};

#[derive(Clone, Debug)]
pub struct KdNode {
    pub range: Range<usize>,
    pub bbox: SymBox,
    pub depth: u32,
    /// Split axis and children `[lower, upper]` for interior nodes.
    pub split: Option<(Axis, [usize; 2])>,
}

impl KdNode {
    pub fn is_leaf(&self) -> bool {
        self.split.is_none()
    }

    pub fn len(&self) -> usize {
        self.range.len()
    }

    pub fn is_empty(&self) -> bool {
        self.range.is_empty()
    }
}

#[derive(Clone, Debug, Default)]
pub struct KdTree {
    /// Point ids permuted so that every node's points are contiguous.
    pub order: Vec<PointId>,
    /// Nodes in preorder; `nodes[0]` is the root when non-empty.
    pub nodes: Vec<KdNode>,
}

impl KdTree {
    pub fn points(&self, node: usize) -> &[PointId] {
        &self.order[self.nodes[node].range.clone()]
    }

    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].is_leaf())
    }

    pub fn height(&self) -> u32 {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }
}

/// Builds a kd-tree over `ids`, turning a node into a leaf when it holds one
/// point, when `max_depth` is reached, or when `stop(cell, bbox, depth)`
/// returns true. Costs linear comparisons per node (selection plus bounding
/// box).
pub fn build_c_kdtree<O, F>(o: &O, ids: Vec<PointId>, max_depth: Option<u32>, mut stop: F) -> KdTree
where
    O: CoordOracle + ?Sized,
    F: FnMut(&[PointId], &SymBox, u32) -> bool,
{
    let mut tree = KdTree {
        order: ids,
        nodes: Vec::new(),
    };
    if tree.order.is_empty() {
        return tree;
    }
    // (range, depth, parent slot to patch)
    type Pending = (Range<usize>, u32, Option<(usize, usize)>);
    let mut stack: Vec<Pending> = vec![(0..tree.order.len(), 0, None)];
    while let Some((range, depth, parent)) = stack.pop() {
        let idx = tree.nodes.len();
        if let Some((p, slot)) = parent {
            if let Some((_, ch)) = tree.nodes[p].split.as_mut() {
                ch[slot] = idx;
            }
        }
        let cell = &mut tree.order[range.clone()];
        let bbox = SymBox::bounding(o, cell).expect("non-empty cell");
        let leaf =
            cell.len() == 1 || max_depth.is_some_and(|d| depth >= d) || stop(cell, &bbox, depth);
        let split = if leaf {
            None
        } else {
            let axis = Axis::at_depth(depth);
            let k = cell.len().div_ceil(2);
            cell.select_nth_unstable_by(k, |&a, &b| o.compare(axis, a, b));
            let mid = range.start + k;
            // preorder: push upper first so the lower child is built next
            stack.push((mid..range.end, depth + 1, Some((idx, 1))));
            stack.push((range.start..mid, depth + 1, Some((idx, 0))));
            Some((axis, [usize::MAX; 2]))
        };
        tree.nodes.push(KdNode {
            range,
            bbox,
            depth,
            split,
        });
    }
    tree
}

/// Splits `ids` like [`build_c_kdtree`] down to `depth` (or singletons) and
/// returns only the leaf cells with their bounding boxes; interior boxes are
/// never computed.
pub fn kd_partition<O: CoordOracle + ?Sized>(
    o: &O,
    mut ids: Vec<PointId>,
    depth: u32,
) -> Vec<(Vec<PointId>, SymBox)> {
    let mut out = Vec::new();
    if ids.is_empty() {
        return out;
    }
    let mut stack = vec![(0..ids.len(), 0u32)];
    while let Some((range, d)) = stack.pop() {
        let cell = &mut ids[range.clone()];
        if cell.len() == 1 || d >= depth {
            let bbox = SymBox::bounding(o, cell).expect("non-empty cell");
            out.push((cell.to_vec(), bbox));
            continue;
        }
        let axis = Axis::at_depth(d);
        let k = cell.len().div_ceil(2);
        cell.select_nth_unstable_by(k, |&a, &b| o.compare(axis, a, b));
        let mid = range.start + k;
        stack.push((mid..range.end, d + 1));
        stack.push((range.start..mid, d + 1));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compare::{CountingOracle, RawOracle};
    use crate::geom::Color;
    use crate::instance::Instance;

    fn grid(n: i64) -> Instance {
        Instance::from_ranks(
            &(0..n)
                .map(|i| {
                    (
                        i,
                        (i * 7) % n,
                        if i % 3 == 0 { Color::Red } else { Color::Blue },
                    )
                })
                .collect::<Vec<_>>(),
        )
        .unwrap()
    }

    #[test]
    fn always_stop_gives_single_node() {
        let inst = grid(17);
        let t = build_c_kdtree(&RawOracle(&inst), (0..17).collect(), None, |_, _, _| true);
        assert_eq!(t.nodes.len(), 1);
        assert!(t.nodes[0].is_leaf());
    }

    #[test]
    fn never_stop_gives_full_tree() {
        for n in [1i64, 2, 5, 16, 17, 31] {
            let inst = grid(n);
            let o = RawOracle(&inst);
            let t = build_c_kdtree(&o, (0..n as usize).collect(), None, |_, _, _| false);
            assert_eq!(t.leaves().count(), n as usize);
            assert_eq!(t.height(), (n as f64).log2().ceil() as u32);
            for node in &t.nodes {
                if let Some((axis, [lo, hi])) = node.split {
                    assert_eq!(axis, Axis::at_depth(node.depth));
                    assert!(t.nodes[lo].len() <= node.len().div_ceil(2));
                    assert!(t.nodes[hi].len() <= node.len().div_ceil(2));
                    assert_eq!(t.nodes[lo].range.end, t.nodes[hi].range.start);
                    for &a in t.points(lo) {
                        for &b in t.points(hi) {
                            assert!(o.compare(axis, a, b).is_lt());
                        }
                    }
                }
                for &p in t.points(t.nodes.iter().position(|x| std::ptr::eq(x, node)).unwrap()) {
                    assert!(node.bbox.contains(&o, p));
                }
            }
        }
    }

    #[test]
    fn depth_limit_yields_power_of_two_cells() {
        let inst = grid(64);
        let o = CountingOracle::new(&inst);
        let t = build_c_kdtree(&o, (0..64).collect(), Some(4), |_, _, _| false);
        let leaves: Vec<_> = t.leaves().collect();
        assert_eq!(leaves.len(), 16);
        assert!(leaves.iter().all(|&l| t.nodes[l].len() == 4));
        // linear work per level
        assert!(o.count() < 64 * 4 * 8, "{}", o.count());
    }

    #[test]
    fn partition_matches_tree_leaves() {
        for n in [1i64, 9, 64, 100] {
            let inst = grid(n);
            let o = RawOracle(&inst);
            for depth in 0..5 {
                let t = build_c_kdtree(&o, (0..n as usize).collect(), Some(depth), |_, _, _| false);
                let mut want: Vec<(Vec<PointId>, SymBox)> = t
                    .leaves()
                    .map(|l| {
                        let mut pts = t.points(l).to_vec();
                        pts.sort_unstable();
                        (pts, t.nodes[l].bbox)
                    })
                    .collect();
                let mut got = kd_partition(&o, (0..n as usize).collect(), depth);
                for (pts, _) in &mut got {
                    pts.sort_unstable();
                }
                want.sort_by(|a, b| a.0.cmp(&b.0));
                got.sort_by(|a, b| a.0.cmp(&b.0));
                assert_eq!(got, want);
            }
        }
    }
}
