//! Integer partitions, ambient boxes and the shape classes used by the
//! multiplicity-free classification.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A weakly decreasing sequence of positive integers.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition(Vec<u32>);

impl Partition {
    /// Builds a partition, dropping trailing zeros. Fails if the nonzero
    /// parts are not weakly decreasing or a zero is followed by a positive part.
    pub fn new(parts: impl Into<Vec<u32>>) -> Result<Self> {
        let mut parts = parts.into();
        while parts.last() == Some(&0) {
            parts.pop();
        }
        if parts.windows(2).any(|w| w[0] < w[1]) || parts.contains(&0) {
            return Err(Error::NotAPartition(parts));
        }
        Ok(Partition(parts))
    }

    pub fn empty() -> Self {
        Partition(Vec::new())
    }

    /// `c^r`; empty when either side is zero.
    pub fn rectangle(rows: u32, cols: u32) -> Self {
        if rows == 0 || cols == 0 {
            return Self::empty();
        }
        Partition(vec![cols; rows as usize])
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn size(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Part `i` (0-based), reading missing parts as zero.
    pub fn part(&self, i: usize) -> u32 {
        self.0.get(i).copied().unwrap_or(0)
    }

    /// First part, or zero for the empty partition.
    pub fn width(&self) -> u32 {
        self.part(0)
    }

    /// Length of column `j` (0-based).
    pub fn column_len(&self, j: u32) -> u32 {
        self.0.iter().take_while(|&&p| p > j).count() as u32
    }

    pub fn conjugate(&self) -> Partition {
        Partition((0..self.width()).map(|j| self.column_len(j)).collect())
    }

    pub fn fits_in_box(&self, bx: AmbientBox) -> bool {
        self.len() as u32 <= bx.rows && self.width() <= bx.cols
    }

    /// Whether the diagram of `other` lies inside the diagram of `self`.
    pub fn contains(&self, other: &Partition) -> bool {
        other.len() <= self.len() && other.0.iter().zip(&self.0).all(|(o, s)| o <= s)
    }

    /// Componentwise sum of two partitions (multiset union of contents).
    pub fn content_sum(&self, other: &Partition) -> Result<Partition> {
        content_sum(&self.0, &other.0)
    }

    /// Distinct part sizes, largest first.
    pub fn distinct_parts(&self) -> Vec<u32> {
        let mut d = self.0.clone();
        d.dedup();
        d
    }

    /// Partition with part `i` (0-based) deleted.
    pub fn without_part(&self, i: usize) -> Partition {
        let mut p = self.0.clone();
        if i < p.len() {
            p.remove(i);
        }
        Partition(p)
    }

    /// Partition with column `j` (0-based) deleted.
    pub fn without_column(&self, j: u32) -> Partition {
        self.conjugate().without_part(j as usize).conjugate()
    }

    /// Parts `from..` (0-based), i.e. the top `from` rows truncated.
    pub fn truncate_top(&self, from: usize) -> Partition {
        Partition(self.0.iter().skip(from).copied().collect())
    }

    pub fn is_rectangle(&self) -> bool {
        self.distinct_parts().len() <= 1
    }

    /// Rectangle with exactly one row or one column (or empty).
    pub fn is_one_line(&self) -> bool {
        self.is_rectangle() && (self.len() <= 1 || self.width() <= 1)
    }

    pub fn classify(&self) -> ShapeClass {
        classify_shape(self)
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

/// Command-line spelling: comma separated parts, `-` for the empty partition.
impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "-" || s.is_empty() || s == "()" {
            return Ok(Partition::empty());
        }
        let s = s.trim_start_matches('(').trim_end_matches(')');
        let parts = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<u32>()
                    .map_err(|e| Error::Parse(format!("bad part {p:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Partition::new(parts)
    }
}

impl TryFrom<Vec<u32>> for Partition {
    type Error = Error;

    fn try_from(v: Vec<u32>) -> Result<Self> {
        Partition::new(v)
    }
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<u32>::deserialize(d)?;
        Partition::new(v).map_err(serde::de::Error::custom)
    }
}

/// Convenience macro-free constructor for literals known to be valid.
pub fn part(parts: &[u32]) -> Partition {
    Partition::new(parts.to_vec()).expect("literal partition")
}

/// The `k x (n-k)` rectangle bounding all partitions of a Grassmannian.
///
/// User-facing boxes have both sides positive. Demolition may shrink a box
/// down to a side of zero, which is the point class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AmbientBox {
    pub rows: u32,
    pub cols: u32,
}

impl AmbientBox {
    pub fn new(rows: u32, cols: u32) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidBox { rows, cols });
        }
        Ok(AmbientBox { rows, cols })
    }

    pub(crate) fn degenerate_ok(rows: u32, cols: u32) -> Self {
        AmbientBox { rows, cols }
    }

    pub fn transpose(self) -> Self {
        AmbientBox {
            rows: self.cols,
            cols: self.rows,
        }
    }

    pub fn area(self) -> u32 {
        self.rows * self.cols
    }

    /// Smallest box holding every content of a product of `a` and `b`.
    pub fn unbounded_for(a: &Partition, b: &Partition) -> Self {
        AmbientBox {
            rows: (a.len() + b.len()).max(1) as u32,
            cols: (a.width() + b.width()).max(1),
        }
    }
}

impl fmt::Display for AmbientBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.rows, self.cols)
    }
}

impl FromStr for AmbientBox {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (r, c) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| Error::Parse(format!("box {s:?} is not of the form RxC")))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<u32>()
                .map_err(|e| Error::Parse(format!("bad box side {t:?}: {e}")))
        };
        AmbientBox::new(parse(r)?, parse(c)?)
    }
}

/// Position of the extra row or column of a near rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NearSide {
    Left,
    Right,
    Top,
    Bottom,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum ShapeClass {
    Empty,
    Rectangle { rows: u32, cols: u32 },
    /// `b^r c^s` with `b > c > 0`; `near` lists every side whose deletion
    /// leaves a rectangle (empty when the fat hook is not a near rectangle).
    FatHook {
        near: BTreeSet<NearSide>,
    },
    Generic,
}

impl ShapeClass {
    /// Smallest `k` such that this rectangle has `k` rows or `k` columns.
    /// A `k x k` square reports `k` once.
    pub fn k_line(&self) -> Option<u32> {
        match self {
            ShapeClass::Rectangle { rows, cols } => Some((*rows).min(*cols)),
            _ => None,
        }
    }

    pub fn is_rectangle(&self) -> bool {
        matches!(self, ShapeClass::Empty | ShapeClass::Rectangle { .. })
    }

    pub fn is_fat_hook(&self) -> bool {
        matches!(self, ShapeClass::FatHook { .. })
    }

    pub fn is_near(&self, side: NearSide) -> bool {
        matches!(self, ShapeClass::FatHook { near } if near.contains(&side))
    }
}

pub fn classify_shape(p: &Partition) -> ShapeClass {
    let distinct = p.distinct_parts();
    match distinct.len() {
        0 => ShapeClass::Empty,
        1 => ShapeClass::Rectangle {
            rows: p.len() as u32,
            cols: p.width(),
        },
        2 => {
            let (b, c) = (distinct[0], distinct[1]);
            let r = p.parts().iter().filter(|&&x| x == b).count();
            let s = p.len() - r;
            let mut near = BTreeSet::new();
            if r == 1 {
                near.insert(NearSide::Top);
            }
            if s == 1 {
                near.insert(NearSide::Bottom);
            }
            if c == 1 {
                near.insert(NearSide::Left);
            }
            if b == c + 1 {
                near.insert(NearSide::Right);
            }
            ShapeClass::FatHook { near }
        }
        _ => ShapeClass::Generic,
    }
}

/// Componentwise sum of two content vectors, required to be a partition.
pub fn content_sum(a: &[u32], b: &[u32]) -> Result<Partition> {
    let n = a.len().max(b.len());
    let at = |v: &[u32], i: usize| v.get(i).copied().unwrap_or(0);
    let sum: Vec<u32> = (0..n).map(|i| at(a, i) + at(b, i)).collect();
    Partition::new(sum.clone()).map_err(|_| Error::NonPartitionResult(sum))
}

/// All partitions fitting in `bx`, ordered by size then lexicographically.
pub fn partitions_in_box(bx: AmbientBox) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(bx: AmbientBox, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Partition>) {
        out.push(Partition(cur.clone()));
        if cur.len() as u32 == bx.rows {
            return;
        }
        for p in 1..=max {
            cur.push(p);
            rec(bx, p, cur, out);
            cur.pop();
        }
    }
    rec(bx, bx.cols, &mut cur, &mut out);
    out.sort_by(|a, b| a.size().cmp(&b.size()).then_with(|| a.cmp(b)));
    out
}

/// Partitions in `bx` with at most `max_size` boxes.
pub fn partitions_up_to(max_size: u32, bx: AmbientBox) -> Vec<Partition> {
    partitions_in_box(bx)
        .into_iter()
        .filter(|p| p.size() <= max_size)
        .collect()
}
