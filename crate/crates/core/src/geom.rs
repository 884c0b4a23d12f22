//! Colors, axes, symbolic coordinates and boxes.

use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;

use crate::compare::CoordOracle;

/// Dense point identifier, `0..n`.
pub type PointId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Color {
    Red,
    Blue,
}

impl Color {
    pub fn opposite(self) -> Color {
        match self {
            Color::Red => Color::Blue,
            Color::Blue => Color::Red,
        }
    }

    /// Index into per-color arrays.
    pub fn index(self) -> usize {
        self as usize
    }

    pub const BOTH: [Color; 2] = [Color::Red, Color::Blue];
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Color::Red => "R",
            Color::Blue => "B",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    /// Split axis of a kd-tree node at `depth`.
    pub fn at_depth(depth: u32) -> Axis {
        if depth.is_multiple_of(2) {
            Axis::X
        } else {
            Axis::Y
        }
    }

    pub fn other(self) -> Axis {
        match self {
            Axis::X => Axis::Y,
            Axis::Y => Axis::X,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Side {
    JustBelow,
    Exactly,
    JustAbove,
}

impl Side {
    fn flip(self) -> Side {
        match self {
            Side::JustBelow => Side::JustAbove,
            Side::Exactly => Side::Exactly,
            Side::JustAbove => Side::JustBelow,
        }
    }
}

/// A coordinate on one axis: a point's coordinate, an infinitesimal offset
/// from it, or an infinite sentinel.
///
/// No point coordinate lies strictly between `JustBelow(p)` and `p`, or
/// between `p` and `JustAbove(p)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Bound {
    NegInf,
    At { anchor: PointId, side: Side },
    PosInf,
}

impl Bound {
    pub fn exactly(anchor: PointId) -> Bound {
        Bound::At {
            anchor,
            side: Side::Exactly,
        }
    }

    pub fn below(anchor: PointId) -> Bound {
        Bound::At {
            anchor,
            side: Side::JustBelow,
        }
    }

    pub fn above(anchor: PointId) -> Bound {
        Bound::At {
            anchor,
            side: Side::JustAbove,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Bound::At { .. })
    }

    pub fn anchor(self) -> Option<PointId> {
        match self {
            Bound::At { anchor, .. } => Some(anchor),
            _ => None,
        }
    }

    /// The same bound seen through a reflection of its axis.
    pub fn reflect(self) -> Bound {
        match self {
            Bound::NegInf => Bound::PosInf,
            Bound::PosInf => Bound::NegInf,
            Bound::At { anchor, side } => Bound::At {
                anchor,
                side: side.flip(),
            },
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::NegInf => f.write_str("-inf"),
            Bound::PosInf => f.write_str("+inf"),
            Bound::At { anchor, side } => match side {
                Side::JustBelow => write!(f, "{anchor}-"),
                Side::Exactly => write!(f, "{anchor}"),
                Side::JustAbove => write!(f, "{anchor}+"),
            },
        }
    }
}

/// Total order on bounds of one axis. Bounds with the same anchor are ordered
/// by side without consulting the oracle.
pub fn cmp_bounds<O: CoordOracle + ?Sized>(o: &O, axis: Axis, a: Bound, b: Bound) -> Ordering {
    match (a, b) {
        (Bound::NegInf, Bound::NegInf) | (Bound::PosInf, Bound::PosInf) => Ordering::Equal,
        (Bound::NegInf, _) | (_, Bound::PosInf) => Ordering::Less,
        (_, Bound::NegInf) | (Bound::PosInf, _) => Ordering::Greater,
        (
            Bound::At {
                anchor: p,
                side: sp,
            },
            Bound::At {
                anchor: q,
                side: sq,
            },
        ) => {
            if p == q {
                sp.cmp(&sq)
            } else {
                o.compare(axis, p, q)
            }
        }
    }
}

/// Compares a point coordinate with a bound.
pub fn cmp_point<O: CoordOracle + ?Sized>(o: &O, axis: Axis, p: PointId, b: Bound) -> Ordering {
    cmp_bounds(o, axis, Bound::exactly(p), b)
}

pub fn min_bound<O: CoordOracle + ?Sized>(o: &O, axis: Axis, a: Bound, b: Bound) -> Bound {
    if cmp_bounds(o, axis, a, b) == Ordering::Greater {
        b
    } else {
        a
    }
}

pub fn max_bound<O: CoordOracle + ?Sized>(o: &O, axis: Axis, a: Bound, b: Bound) -> Bound {
    if cmp_bounds(o, axis, a, b) == Ordering::Less {
        b
    } else {
        a
    }
}

/// Reflection of the plane that maps a quadrant direction onto NE.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Orientation {
    NE,
    NW,
    SE,
    SW,
}

impl Orientation {
    pub const ALL: [Orientation; 4] = [
        Orientation::NE,
        Orientation::NW,
        Orientation::SE,
        Orientation::SW,
    ];

    pub fn flips(self, axis: Axis) -> bool {
        match (self, axis) {
            (Orientation::NE, _) => false,
            (Orientation::SW, _) => true,
            (Orientation::NW, Axis::X) | (Orientation::SE, Axis::Y) => true,
            (Orientation::NW, Axis::Y) | (Orientation::SE, Axis::X) => false,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Axis-aligned box with symbolic boundaries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SymBox {
    pub x_min: Bound,
    pub x_max: Bound,
    pub y_min: Bound,
    pub y_max: Bound,
}

/// Position of a point relative to a box and its cross.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Location {
    InBox,
    /// In the cross but outside the box.
    Cross,
    Quadrant(Orientation),
}

impl SymBox {
    pub const PLANE: SymBox = SymBox {
        x_min: Bound::NegInf,
        x_max: Bound::PosInf,
        y_min: Bound::NegInf,
        y_max: Bound::PosInf,
    };

    pub fn range(&self, axis: Axis) -> (Bound, Bound) {
        match axis {
            Axis::X => (self.x_min, self.x_max),
            Axis::Y => (self.y_min, self.y_max),
        }
    }

    /// Smallest box around `ids`, pushed out to just below the minimum and
    /// just above the maximum on each axis. Returns `None` for an empty set.
    pub fn bounding<O: CoordOracle + ?Sized>(o: &O, ids: &[PointId]) -> Option<SymBox> {
        let (&first, rest) = ids.split_first()?;
        let mut ext = [first; 4];
        for &p in rest {
            if o.compare(Axis::X, p, ext[0]).is_lt() {
                ext[0] = p;
            } else if o.compare(Axis::X, p, ext[1]).is_gt() {
                ext[1] = p;
            }
            if o.compare(Axis::Y, p, ext[2]).is_lt() {
                ext[2] = p;
            } else if o.compare(Axis::Y, p, ext[3]).is_gt() {
                ext[3] = p;
            }
        }
        Some(SymBox {
            x_min: Bound::below(ext[0]),
            x_max: Bound::above(ext[1]),
            y_min: Bound::below(ext[2]),
            y_max: Bound::above(ext[3]),
        })
    }

    /// The box expressed in the frame of `orient` (and back: reflections are
    /// involutions).
    pub fn reflect(&self, orient: Orientation) -> SymBox {
        let mut b = *self;
        if orient.flips(Axis::X) {
            b.x_min = self.x_max.reflect();
            b.x_max = self.x_min.reflect();
        }
        if orient.flips(Axis::Y) {
            b.y_min = self.y_max.reflect();
            b.y_max = self.y_min.reflect();
        }
        b
    }

    /// Where `p` lies on `axis`: below, within or above the box's range.
    pub fn axis_position<O: CoordOracle + ?Sized>(
        &self,
        o: &O,
        axis: Axis,
        p: PointId,
    ) -> Ordering {
        let (lo, hi) = self.range(axis);
        if cmp_point(o, axis, p, lo).is_lt() {
            Ordering::Less
        } else if cmp_point(o, axis, p, hi).is_gt() {
            Ordering::Greater
        } else {
            Ordering::Equal
        }
    }

    pub fn contains<O: CoordOracle + ?Sized>(&self, o: &O, p: PointId) -> bool {
        self.axis_position(o, Axis::X, p).is_eq() && self.axis_position(o, Axis::Y, p).is_eq()
    }

    pub fn locate<O: CoordOracle + ?Sized>(&self, o: &O, p: PointId) -> Location {
        let px = self.axis_position(o, Axis::X, p);
        let py = self.axis_position(o, Axis::Y, p);
        match (px, py) {
            (Ordering::Equal, Ordering::Equal) => Location::InBox,
            (Ordering::Equal, _) | (_, Ordering::Equal) => Location::Cross,
            (Ordering::Greater, Ordering::Greater) => Location::Quadrant(Orientation::NE),
            (Ordering::Less, Ordering::Greater) => Location::Quadrant(Orientation::NW),
            (Ordering::Greater, Ordering::Less) => Location::Quadrant(Orientation::SE),
            (Ordering::Less, Ordering::Less) => Location::Quadrant(Orientation::SW),
        }
    }

    /// Vertical slab spanned by the box's x-range.
    pub fn vertical_slab(&self) -> SymBox {
        SymBox {
            y_min: Bound::NegInf,
            y_max: Bound::PosInf,
            ..*self
        }
    }

    pub fn horizontal_slab(&self) -> SymBox {
        SymBox {
            x_min: Bound::NegInf,
            x_max: Bound::PosInf,
            ..*self
        }
    }

    /// The closed NE quadrant region `[x_max, +inf) x [y_max, +inf)`.
    pub fn ne_region(&self) -> SymBox {
        SymBox {
            x_min: self.x_max,
            x_max: Bound::PosInf,
            y_min: self.y_max,
            y_max: Bound::PosInf,
        }
    }

    pub fn intersect<O: CoordOracle + ?Sized>(&self, o: &O, other: &SymBox) -> SymBox {
        SymBox {
            x_min: max_bound(o, Axis::X, self.x_min, other.x_min),
            x_max: min_bound(o, Axis::X, self.x_max, other.x_max),
            y_min: max_bound(o, Axis::Y, self.y_min, other.y_min),
            y_max: min_bound(o, Axis::Y, self.y_max, other.y_max),
        }
    }
}

impl fmt::Display for SymBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}, {}] x [{}, {}]",
            self.x_min, self.x_max, self.y_min, self.y_max
        )
    }
}

/// Does `p` dominate `q`? Costs exactly two counted comparisons.
pub fn dominates<O: CoordOracle + ?Sized>(o: &O, p: PointId, q: PointId) -> bool {
    let x = o.compare(Axis::X, p, q).is_gt();
    let y = o.compare(Axis::Y, p, q).is_gt();
    x && y
}

/// Is the open rectangle spanned by `p` and `q` free of other points? Linear
/// scan over all points of the oracle.
pub fn visible<O: CoordOracle + ?Sized>(o: &O, p: PointId, q: PointId) -> bool {
    let (xlo, xhi) = if o.compare(Axis::X, p, q).is_lt() {
        (p, q)
    } else {
        (q, p)
    };
    let (ylo, yhi) = if o.compare(Axis::Y, p, q).is_lt() {
        (p, q)
    } else {
        (q, p)
    };
    (0..o.len()).filter(|&r| r != p && r != q).all(|r| {
        !(o.compare(Axis::X, r, xlo).is_gt()
            && o.compare(Axis::X, r, xhi).is_lt()
            && o.compare(Axis::Y, r, ylo).is_gt()
            && o.compare(Axis::Y, r, yhi).is_lt())
    })
}

/// Alias matching the quadrant-location operation name.
pub fn locate_quadrant<O: CoordOracle + ?Sized>(o: &O, b: &SymBox, p: PointId) -> Location {
    b.locate(o, p)
}
