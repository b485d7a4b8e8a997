//! Set-valued fillings of a southwest shape `mu` placed below a northeast
//! shape `lambda`, their reading words, and enumeration of the fillings
//! counted by Buch's product rule.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::{AmbientBox, Partition};

/// Largest entry an [`EntrySet`] can hold.
pub const MAX_ENTRY: u32 = 31;

/// A finite set of positive integers at most [`MAX_ENTRY`], stored as a bitmask.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct EntrySet(u32);

impl EntrySet {
    pub fn empty() -> Self {
        EntrySet(0)
    }

    pub fn singleton(v: u32) -> Self {
        debug_assert!((1..=MAX_ENTRY).contains(&v));
        EntrySet(1 << v)
    }

    pub fn from_values(values: &[u32]) -> Result<Self> {
        let mut s = EntrySet::empty();
        for &v in values {
            if !(1..=MAX_ENTRY).contains(&v) {
                return Err(Error::InvalidFilling(format!("entry {v} out of range")));
            }
            s.insert(v);
        }
        Ok(s)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    pub fn contains(self, v: u32) -> bool {
        v <= MAX_ENTRY && self.0 & (1 << v) != 0
    }

    pub fn insert(&mut self, v: u32) {
        self.0 |= 1 << v;
    }

    pub fn remove(&mut self, v: u32) {
        self.0 &= !(1 << v);
    }

    pub fn with(mut self, v: u32) -> Self {
        self.insert(v);
        self
    }

    pub fn without(mut self, v: u32) -> Self {
        self.remove(v);
        self
    }

    pub fn min(self) -> Option<u32> {
        (self.0 != 0).then(|| self.0.trailing_zeros())
    }

    pub fn max(self) -> Option<u32> {
        (self.0 != 0).then(|| 31 - self.0.leading_zeros())
    }

    /// Elements in increasing order.
    pub fn iter(self) -> impl DoubleEndedIterator<Item = u32> {
        (1..=MAX_ENTRY).filter(move |&v| self.contains(v))
    }

    /// Every element shifted by `delta`; `None` if one would leave `1..=MAX_ENTRY`.
    pub fn shifted(self, delta: i32) -> Option<Self> {
        let mut out = EntrySet::empty();
        for v in self.iter() {
            let w = v as i32 + delta;
            if w < 1 || w > MAX_ENTRY as i32 {
                return None;
            }
            out.insert(w as u32);
        }
        Some(out)
    }

    pub fn to_vec(self) -> Vec<u32> {
        self.iter().collect()
    }
}

impl fmt::Debug for EntrySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// A reading word: entries right to left within a row, rows top to bottom,
/// each set contributing its elements in decreasing order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ReadingWord(pub Vec<u32>);

/// Occurrence counts of each value, plus the total number of entries of the
/// filling itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Content {
    /// `counts[i]` is the number of occurrences of `i + 1`; no trailing zeros.
    pub counts: Vec<u32>,
    /// `|T|`, the sum of the set sizes of the filling (context excluded).
    pub size: u32,
}

impl Content {
    pub fn as_partition(&self) -> Result<Partition> {
        Partition::new(self.counts.clone())
    }
}

/// A set-valued filling of `shape`, optionally read after the superstandard
/// filling of the northeast `context` partition.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SetValuedFilling {
    shape: Partition,
    context: Partition,
    rows: Vec<Vec<EntrySet>>,
}

impl SetValuedFilling {
    /// Checks shape agreement, nonempty entries and semistandardness.
    pub fn new(shape: Partition, context: Partition, rows: Vec<Vec<EntrySet>>) -> Result<Self> {
        let t = SetValuedFilling {
            shape,
            context,
            rows,
        };
        t.validate()?;
        Ok(t)
    }

    pub(crate) fn new_unchecked(
        shape: Partition,
        context: Partition,
        rows: Vec<Vec<EntrySet>>,
    ) -> Self {
        SetValuedFilling {
            shape,
            context,
            rows,
        }
    }

    /// Convenience constructor from nested value lists.
    pub fn from_values(shape: &Partition, context: &Partition, rows: &[&[&[u32]]]) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|row| row.iter().map(|s| EntrySet::from_values(s)).collect())
            .collect::<Result<Vec<Vec<_>>>>()?;
        SetValuedFilling::new(shape.clone(), context.clone(), rows)
    }

    fn validate(&self) -> Result<()> {
        if self.rows.len() != self.shape.len()
            || self
                .rows
                .iter()
                .zip(self.shape.parts())
                .any(|(r, &p)| r.len() != p as usize)
        {
            return Err(Error::InvalidFilling("rows do not match the shape".into()));
        }
        for (i, row) in self.rows.iter().enumerate() {
            for (j, &s) in row.iter().enumerate() {
                if s.is_empty() {
                    return Err(Error::InvalidFilling(format!("box ({},{}) is empty", i + 1, j + 1)));
                }
                if j + 1 < row.len() && s.max() > row[j + 1].min() {
                    return Err(Error::InvalidFilling(format!(
                        "row {} decreases at column {}",
                        i + 1,
                        j + 1
                    )));
                }
                if i > 0 && self.rows[i - 1][j].max() >= s.min() {
                    return Err(Error::InvalidFilling(format!(
                        "column {} does not strictly increase at row {}",
                        j + 1,
                        i + 1
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn shape(&self) -> &Partition {
        &self.shape
    }

    pub fn context(&self) -> &Partition {
        &self.context
    }

    pub fn rows(&self) -> &[Vec<EntrySet>] {
        &self.rows
    }

    /// Entry at 1-based `(row, col)`.
    pub fn get(&self, row: usize, col: usize) -> Option<EntrySet> {
        self.rows.get(row.checked_sub(1)?)?.get(col.checked_sub(1)?).copied()
    }

    /// Column `j` (0-based), top to bottom.
    pub fn column(&self, j: usize) -> Vec<EntrySet> {
        self.rows.iter().take_while(|r| r.len() > j).map(|r| r[j]).collect()
    }

    /// `|T|`: total number of entries.
    pub fn size(&self) -> u32 {
        self.rows.iter().flatten().map(|s| s.len()).sum()
    }

    /// Number of entries beyond one per box.
    pub fn extra(&self) -> u32 {
        self.size() - self.shape.size()
    }

    pub fn is_single_valued(&self) -> bool {
        self.rows.iter().flatten().all(|s| s.len() == 1)
    }

    pub fn reading_word(&self, include_context: bool) -> ReadingWord {
        let mut w = Vec::with_capacity((self.context.size() + self.size()) as usize);
        if include_context {
            for (i, &p) in self.context.parts().iter().enumerate() {
                w.extend(std::iter::repeat_n(i as u32 + 1, p as usize));
            }
        }
        for row in &self.rows {
            for s in row.iter().rev() {
                w.extend(s.iter().rev());
            }
        }
        ReadingWord(w)
    }

    pub fn content(&self, include_context: bool) -> Content {
        let mut counts: Vec<u32> = Vec::new();
        let mut bump = |v: u32, by: u32| {
            let i = v as usize - 1;
            if counts.len() <= i {
                counts.resize(i + 1, 0);
            }
            counts[i] += by;
        };
        if include_context {
            for (i, &p) in self.context.parts().iter().enumerate() {
                if p > 0 {
                    bump(i as u32 + 1, p);
                }
            }
        }
        for s in self.rows.iter().flatten() {
            for v in s.iter() {
                bump(v, 1);
            }
        }
        while counts.last() == Some(&0) {
            counts.pop();
        }
        Content {
            counts,
            size: self.size(),
        }
    }

    /// Whether this is one of the fillings counted by Buch's rule in `bx`.
    pub fn is_buch_tableau(&self, bx: AmbientBox) -> bool {
        if self.validate().is_err() || !self.context.fits_in_box(bx) {
            return false;
        }
        let w = self.reading_word(true);
        if !is_reverse_lattice(&w) {
            return false;
        }
        let c = self.content(true).counts;
        c.len() as u32 <= bx.rows && c.first().copied().unwrap_or(0) <= bx.cols
    }

    /// Total order: full reading words lexicographically, ties (possible
    /// for set-valued fillings) broken by the row-major entry bitmasks.
    pub fn lex_cmp(&self, other: &Self) -> Ordering {
        self.order_key().cmp(&other.order_key())
    }

    pub fn order_key(&self) -> (ReadingWord, Vec<u32>) {
        let bits = self.rows.iter().flatten().map(|s| s.bits()).collect();
        (self.reading_word(true), bits)
    }
}

impl fmt::Debug for SetValuedFilling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, row) in self.rows.iter().enumerate() {
            if i > 0 {
                write!(f, " / ")?;
            }
            for (j, s) in row.iter().enumerate() {
                if j > 0 {
                    write!(f, " ")?;
                }
                for v in s.iter() {
                    write!(f, "{v}")?;
                    if v >= 10 {
                        write!(f, ";")?;
                    }
                }
            }
        }
        write!(f, "]")
    }
}

#[derive(Serialize, Deserialize)]
struct BoxJson {
    r: usize,
    c: usize,
    set: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct FillingJson {
    shape: Partition,
    context: Partition,
    boxes: Vec<BoxJson>,
}

impl Serialize for SetValuedFilling {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let boxes = self
            .rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| {
                row.iter().enumerate().map(move |(j, e)| BoxJson {
                    r: i + 1,
                    c: j + 1,
                    set: e.to_vec(),
                })
            })
            .collect();
        FillingJson {
            shape: self.shape.clone(),
            context: self.context.clone(),
            boxes,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SetValuedFilling {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = FillingJson::deserialize(d)?;
        let mut rows: Vec<Vec<EntrySet>> = j
            .shape
            .parts()
            .iter()
            .map(|&p| vec![EntrySet::empty(); p as usize])
            .collect();
        for b in j.boxes {
            let slot = b
                .r
                .checked_sub(1)
                .and_then(|r| rows.get_mut(r))
                .and_then(|row| row.get_mut(b.c.checked_sub(1)?))
                .ok_or_else(|| D::Error::custom(format!("box ({},{}) outside shape", b.r, b.c)))?;
            *slot = EntrySet::from_values(&b.set).map_err(D::Error::custom)?;
        }
        SetValuedFilling::new(j.shape, j.context, rows).map_err(D::Error::custom)
    }
}

/// The filling with the single entry `i` in every box of row `i`.
pub fn superstandard(lambda: &Partition) -> SetValuedFilling {
    let rows = lambda
        .parts()
        .iter()
        .enumerate()
        .map(|(i, &p)| vec![EntrySet::singleton(i as u32 + 1); p as usize])
        .collect();
    SetValuedFilling::new_unchecked(lambda.clone(), Partition::empty(), rows)
}

/// Every prefix has at least as many `i`s as `i+1`s.
pub fn is_reverse_lattice(word: &ReadingWord) -> bool {
    let mut counts: Vec<u32> = vec![0; 2];
    for &v in &word.0 {
        let v = v as usize;
        if counts.len() <= v {
            counts.resize(v + 1, 0);
        }
        counts[v] += 1;
        if v > 1 && counts[v] > counts[v - 1] {
            return false;
        }
    }
    true
}

/// All fillings of `mu` with northeast context `lambda` whose combined word
/// is a reverse lattice word and whose combined content fits in `bx`,
/// sorted by [`SetValuedFilling::lex_cmp`].
pub fn enumerate_buch_tableaux(
    lambda: &Partition,
    mu: &Partition,
    bx: AmbientBox,
) -> Vec<SetValuedFilling> {
    if !lambda.fits_in_box(bx) || !mu.fits_in_box(bx) {
        return Vec::new();
    }
    let mut search = BuchSearch::new(lambda, mu, bx);
    search.run();
    let mut out = search.out;
    out.sort_by_cached_key(|t| t.order_key());
    out
}

/// Lexicographically first Buch tableau.
pub fn lex_min_tableau(
    lambda: &Partition,
    mu: &Partition,
    bx: AmbientBox,
) -> Result<SetValuedFilling> {
    enumerate_buch_tableaux(lambda, mu, bx)
        .into_iter()
        .next()
        .ok_or(Error::EmptyProduct)
}

/// Depth-first fill in reading order, pruning on prefix lattice violations.
struct BuchSearch {
    lambda: Partition,
    mu: Partition,
    bx: AmbientBox,
    /// `counts[v]` for `v` in `1..=rows`; index 0 unused.
    counts: Vec<u32>,
    rows: Vec<Vec<EntrySet>>,
    order: Vec<(usize, usize)>,
    out: Vec<SetValuedFilling>,
}

impl BuchSearch {
    fn new(lambda: &Partition, mu: &Partition, bx: AmbientBox) -> Self {
        let mut counts = vec![0u32; bx.rows as usize + 2];
        for (i, &p) in lambda.parts().iter().enumerate() {
            counts[i + 1] = p;
        }
        let rows = mu
            .parts()
            .iter()
            .map(|&p| vec![EntrySet::empty(); p as usize])
            .collect();
        let order = mu
            .parts()
            .iter()
            .enumerate()
            .flat_map(|(i, &p)| (0..p as usize).rev().map(move |j| (i, j)))
            .collect();
        BuchSearch {
            lambda: lambda.clone(),
            mu: mu.clone(),
            bx,
            counts,
            rows,
            order,
            out: Vec::new(),
        }
    }

    fn run(&mut self) {
        self.fill(0);
    }

    fn fill(&mut self, pos: usize) {
        let Some(&(r, c)) = self.order.get(pos) else {
            self.out.push(SetValuedFilling::new_unchecked(
                self.mu.clone(),
                self.lambda.clone(),
                self.rows.clone(),
            ));
            return;
        };
        let hi = if c + 1 < self.rows[r].len() {
            self.rows[r][c + 1].min().unwrap()
        } else {
            self.bx.rows
        };
        let lo = if r > 0 {
            self.rows[r - 1][c].max().unwrap() + 1
        } else {
            1
        };
        if lo > hi {
            return;
        }
        self.choose(pos, r, c, hi, lo, EntrySet::empty());
    }

    /// Decide membership of `v, v-1, .., lo` in the set at `(r, c)`; elements
    /// enter the word in decreasing order so each inclusion is checked
    /// against the running counts immediately.
    fn choose(&mut self, pos: usize, r: usize, c: usize, v: u32, lo: u32, set: EntrySet) {
        if v < lo {
            if !set.is_empty() {
                self.rows[r][c] = set;
                self.fill(pos + 1);
                self.rows[r][c] = EntrySet::empty();
            }
            return;
        }
        let vi = v as usize;
        let cap = if v == 1 {
            self.bx.cols
        } else {
            self.counts[vi - 1]
        };
        if self.counts[vi] < cap {
            self.counts[vi] += 1;
            self.choose(pos, r, c, v - 1, lo, set.with(v));
            self.counts[vi] -= 1;
        }
        self.choose(pos, r, c, v - 1, lo, set);
    }
}
