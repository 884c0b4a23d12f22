//! Validated point sets and the point-file format.

use std::fmt::Write as _;

use crate::coord::Coord;
use crate::error::{Error, Result};
use crate::geom::{Axis, Color, PointId};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColoredPoint {
    pub x: Coord,
    pub y: Coord,
    pub color: Color,
    pub id: PointId,
}

impl ColoredPoint {
    pub fn new(x: impl Into<Coord>, y: impl Into<Coord>, color: Color, id: PointId) -> Self {
        ColoredPoint {
            x: x.into(),
            y: y.into(),
            color,
            id,
        }
    }
}

/// An immutable bichromatic point set with pairwise distinct x and y
/// coordinates. The point order is the input permutation.
#[derive(Clone, Debug)]
pub struct Instance {
    points: Vec<ColoredPoint>,
    x_rank: Vec<u32>,
    y_rank: Vec<u32>,
}

fn ranks(
    points: &[ColoredPoint],
    key: impl Fn(&ColoredPoint) -> &Coord,
    axis: Axis,
    break_ties: bool,
) -> Result<Vec<u32>> {
    let mut order: Vec<PointId> = (0..points.len()).collect();
    // stable: equal coordinates stay in id order
    order.sort_by(|&a, &b| key(&points[a]).cmp(key(&points[b])));
    if !break_ties {
        if let Some(w) = order
            .windows(2)
            .find(|w| key(&points[w[0]]) == key(&points[w[1]]))
        {
            return Err(Error::DegenerateInput {
                axis,
                a: w[0].min(w[1]),
                b: w[0].max(w[1]),
            });
        }
    }
    let mut rank = vec![0u32; points.len()];
    for (r, &id) in order.iter().enumerate() {
        rank[id] = r as u32;
    }
    Ok(rank)
}

/// Checks non-degeneracy and builds an [`Instance`]. Point ids are reassigned
/// to input positions.
pub fn validate_instance(points: Vec<ColoredPoint>) -> Result<Instance> {
    Instance::build(points, false)
}

impl Instance {
    fn build(mut points: Vec<ColoredPoint>, break_ties: bool) -> Result<Instance> {
        for (i, p) in points.iter_mut().enumerate() {
            p.id = i;
        }
        let x_rank = ranks(&points, |p| &p.x, Axis::X, break_ties)?;
        let y_rank = ranks(&points, |p| &p.y, Axis::Y, break_ties)?;
        Ok(Instance {
            points,
            x_rank,
            y_rank,
        })
    }

    /// Like [`validate_instance`], but equal coordinates are ordered by id.
    pub fn with_tie_break(points: Vec<ColoredPoint>) -> Instance {
        Instance::build(points, true).expect("tie-breaking cannot fail")
    }

    /// Builds an instance from x/y rank permutations (or any distinct integers).
    pub fn from_ranks(coords: &[(i64, i64, Color)]) -> Result<Instance> {
        validate_instance(
            coords
                .iter()
                .enumerate()
                .map(|(i, &(x, y, c))| ColoredPoint::new(x, y, c, i))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[ColoredPoint] {
        &self.points
    }

    pub fn point(&self, id: PointId) -> &ColoredPoint {
        &self.points[id]
    }

    pub fn color(&self, id: PointId) -> Color {
        self.points[id].color
    }

    pub fn colors(&self) -> Vec<Color> {
        self.points.iter().map(|p| p.color).collect()
    }

    /// Rank of a point's coordinate on `axis`. Uncounted; reserved for
    /// reference code and the comparison oracles.
    pub fn rank(&self, axis: Axis, id: PointId) -> u32 {
        match axis {
            Axis::X => self.x_rank[id],
            Axis::Y => self.y_rank[id],
        }
    }

    pub fn ids_of(&self, color: Color) -> Vec<PointId> {
        (0..self.len())
            .filter(|&i| self.color(i) == color)
            .collect()
    }

    /// The instance with point `i` replaced by point `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[PointId]) -> Instance {
        let points = perm.iter().map(|&p| self.points[p].clone()).collect();
        Instance::build(points, false).expect("permutation keeps coordinates distinct")
    }

    pub fn subset(&self, ids: &[PointId]) -> Instance {
        self.permuted(ids)
    }

    /// Serializes in point-file format.
    pub fn to_point_file(&self) -> String {
        let mut s = String::new();
        for p in &self.points {
            let _ = writeln!(s, "{}\t{}\t{}", p.x, p.y, p.color);
        }
        s
    }
}

/// Parses the tab-separated point format: `x<TAB>y<TAB>R|B` per line, `#`
/// comments and blank lines ignored.
pub fn parse_points(text: &str) -> Result<Vec<ColoredPoint>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::Parse { line: line_no, msg };
        let fields: Vec<&str> = trimmed.split('\t').collect();
        if fields.len() != 3 {
            return Err(err(format!(
                "expected 3 tab-separated fields, got {}",
                fields.len()
            )));
        }
        let x: Coord = fields[0].parse().map_err(|e| err(format!("{e}")))?;
        let y: Coord = fields[1].parse().map_err(|e| err(format!("{e}")))?;
        let color = match fields[2].trim() {
            "R" => Color::Red,
            "B" => Color::Blue,
            other => return Err(err(format!("unknown color {other:?}"))),
        };
        out.push(ColoredPoint::new(x, y, color, out.len()));
    }
    Ok(out)
}

pub fn parse_instance(text: &str, dedupe_ties: bool) -> Result<Instance> {
    let pts = parse_points(text)?;
    if dedupe_ties {
        Ok(Instance::with_tie_break(pts))
    } else {
        validate_instance(pts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Color::*;

    #[test]
    fn validates_distinct_coordinates() {
        let inst = Instance::from_ranks(&[(1, 1, Red), (2, 2, Blue)]).unwrap();
        assert_eq!(inst.len(), 2);
        let err = Instance::from_ranks(&[(1, 1, Red), (1, 2, Blue)]).unwrap_err();
        assert_eq!(
            err,
            Error::DegenerateInput {
                axis: Axis::X,
                a: 0,
                b: 1
            }
        );
        let err = Instance::from_ranks(&[(1, 5, Red), (2, 7, Blue), (3, 5, Red)]).unwrap_err();
        assert_eq!(
            err,
            Error::DegenerateInput {
                axis: Axis::Y,
                a: 0,
                b: 2
            }
        );
        assert!(validate_instance(vec![]).unwrap().is_empty());
    }

    #[test]
    fn tie_break_orders_by_id() {
        let inst = Instance::with_tie_break(vec![
            ColoredPoint::new(1, 1, Red, 0),
            ColoredPoint::new(1, 0, Blue, 1),
        ]);
        assert!(inst.rank(Axis::X, 0) < inst.rank(Axis::X, 1));
        assert!(inst.rank(Axis::Y, 0) > inst.rank(Axis::Y, 1));
    }

    #[test]
    fn parses_point_file() {
        let text = "# header\n1.5\t2\tR\n\n-3\t0.25\tB\n";
        let inst = parse_instance(text, false).unwrap();
        assert_eq!(inst.len(), 2);
        assert_eq!(inst.color(1), Blue);
        assert_eq!(inst.rank(Axis::X, 0), 1);
        let again = parse_instance(&inst.to_point_file(), false).unwrap();
        assert_eq!(again.points(), inst.points());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = parse_points("1\t2\tR\n1\t2\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        let e = parse_points("# c\n1\tx\tR\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        let e = parse_points("1\t2\tG\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }));
    }
}
