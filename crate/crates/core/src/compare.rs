//! The comparison model: every solver reads coordinates only through a
//! [`CoordOracle`], which answers same-axis comparisons between two points.

use std::cell::{Cell, RefCell};
use std::cmp::Ordering;

use serde::Serialize;

use crate::geom::{Axis, Color, Orientation, PointId};
use crate::instance::Instance;

/// Access to an input in the comparison model.
///
/// Colors are public. Coordinates are only visible through `compare`, which
/// must never report `Equal` for two distinct ids.
pub trait CoordOracle {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn color(&self, id: PointId) -> Color;

    fn compare(&self, axis: Axis, a: PointId, b: PointId) -> Ordering;

    /// Comparisons answered so far (0 for uncounted oracles).
    fn comparisons(&self) -> u64 {
        0
    }
}

impl<T: CoordOracle + ?Sized> CoordOracle for &T {
    fn len(&self) -> usize {
        (**self).len()
    }
    fn color(&self, id: PointId) -> Color {
        (**self).color(id)
    }
    fn compare(&self, axis: Axis, a: PointId, b: PointId) -> Ordering {
        (**self).compare(axis, a, b)
    }
    fn comparisons(&self) -> u64 {
        (**self).comparisons()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CmpRecord {
    pub axis: Axis,
    pub a: PointId,
    pub b: PointId,
    pub outcome: i8,
}

impl CmpRecord {
    pub fn ordering(&self) -> Ordering {
        self.outcome.cmp(&0)
    }
}

/// Counted view of an [`Instance`], optionally recording a transcript.
pub struct CountingOracle<'a> {
    inst: &'a Instance,
    count: Cell<u64>,
    transcript: RefCell<Option<Vec<CmpRecord>>>,
}

impl<'a> CountingOracle<'a> {
    pub fn new(inst: &'a Instance) -> Self {
        CountingOracle {
            inst,
            count: Cell::new(0),
            transcript: RefCell::new(None),
        }
    }

    pub fn with_transcript(inst: &'a Instance) -> Self {
        let o = Self::new(inst);
        *o.transcript.borrow_mut() = Some(Vec::new());
        o
    }

    pub fn count(&self) -> u64 {
        self.count.get()
    }

    pub fn take_transcript(&self) -> Vec<CmpRecord> {
        self.transcript.borrow_mut().take().unwrap_or_default()
    }
}

impl CoordOracle for CountingOracle<'_> {
    fn len(&self) -> usize {
        self.inst.len()
    }

    fn color(&self, id: PointId) -> Color {
        self.inst.point(id).color
    }

    fn compare(&self, axis: Axis, a: PointId, b: PointId) -> Ordering {
        if a == b {
            return Ordering::Equal;
        }
        self.count.set(self.count.get() + 1);
        let ord = self.inst.rank(axis, a).cmp(&self.inst.rank(axis, b));
        if let Some(t) = self.transcript.borrow_mut().as_mut() {
            t.push(CmpRecord {
                axis,
                a,
                b,
                outcome: ord as i8,
            });
        }
        ord
    }

    fn comparisons(&self) -> u64 {
        self.count.get()
    }
}

/// Uncounted access for reference code (brute force, generators, certificates).
#[derive(Clone, Copy)]
pub struct RawOracle<'a>(pub &'a Instance);

impl CoordOracle for RawOracle<'_> {
    fn len(&self) -> usize {
        self.0.len()
    }
    fn color(&self, id: PointId) -> Color {
        self.0.point(id).color
    }
    fn compare(&self, axis: Axis, a: PointId, b: PointId) -> Ordering {
        self.0.rank(axis, a).cmp(&self.0.rank(axis, b))
    }
}

/// An oracle seen through the reflection that maps `orientation` onto NE.
#[derive(Clone, Copy)]
pub struct Reflected<O> {
    pub base: O,
    pub orientation: Orientation,
}

impl<O: CoordOracle> Reflected<O> {
    pub fn new(base: O, orientation: Orientation) -> Self {
        Reflected { base, orientation }
    }
}

impl<O: CoordOracle> CoordOracle for Reflected<O> {
    fn len(&self) -> usize {
        self.base.len()
    }
    fn color(&self, id: PointId) -> Color {
        self.base.color(id)
    }
    fn compare(&self, axis: Axis, a: PointId, b: PointId) -> Ordering {
        let ord = self.base.compare(axis, a, b);
        if self.orientation.flips(axis) {
            ord.reverse()
        } else {
            ord
        }
    }
    fn comparisons(&self) -> u64 {
        self.base.comparisons()
    }
}

/// Answers comparisons by looking them up in a recorded transcript, in order.
///
/// Re-running a solver against this oracle reproduces its output exactly when
/// the solver reads coordinates only through the oracle and is deterministic.
/// Any query that deviates from the transcript is counted in `mismatches`.
pub struct TranscriptReplay {
    colors: Vec<Color>,
    records: Vec<CmpRecord>,
    next: Cell<usize>,
    mismatches: Cell<u64>,
}

impl TranscriptReplay {
    pub fn new(colors: Vec<Color>, records: Vec<CmpRecord>) -> Self {
        TranscriptReplay {
            colors,
            records,
            next: Cell::new(0),
            mismatches: Cell::new(0),
        }
    }

    pub fn mismatches(&self) -> u64 {
        self.mismatches.get()
    }

    pub fn consumed_all(&self) -> bool {
        self.next.get() == self.records.len()
    }
}

impl CoordOracle for TranscriptReplay {
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
        let i = self.next.get();
        self.next.set(i + 1);
        match self.records.get(i) {
            Some(r) if r.axis == axis && r.a == a && r.b == b => r.ordering(),
            _ => {
                self.mismatches.set(self.mismatches.get() + 1);
                Ordering::Less
            }
        }
    }

    fn comparisons(&self) -> u64 {
        self.next.get() as u64
    }
}

/// Counted comparison sort of `ids` along `axis`.
pub fn sort_by_axis<O: CoordOracle + ?Sized>(o: &O, axis: Axis, ids: &mut [PointId]) {
    ids.sort_by(|&a, &b| o.compare(axis, a, b));
}
