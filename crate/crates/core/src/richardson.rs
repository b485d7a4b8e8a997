//! Richardson quadruples, row and column demolition, and the
//! multiplicity-free classifiers.
//!
//! `rotate(mu)` is never materialized: row `r` of the box is full exactly
//! when `lambda_r + mu_{k-r+1} = n-k`, and columns are handled through
//! conjugates the same way.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grothendieck::{buch_product, lr_product};
use crate::partition::{AmbientBox, NearSide, Partition, ShapeClass};
use crate::svt::{EntrySet, SetValuedFilling};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RichardsonQuadruple {
    pub lambda: Partition,
    pub mu: Partition,
    #[serde(rename = "box")]
    pub bx: AmbientBox,
}

impl fmt::Display for RichardsonQuadruple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.lambda, self.mu, self.bx)
    }
}

impl RichardsonQuadruple {
    pub fn new(lambda: Partition, mu: Partition, bx: AmbientBox) -> Result<Self> {
        for p in [&lambda, &mu] {
            if !p.fits_in_box(bx) {
                return Err(Error::DoesNotFit(p.to_string(), bx.to_string()));
            }
        }
        Ok(RichardsonQuadruple { lambda, mu, bx })
    }

    fn k(&self) -> u32 {
        self.bx.rows
    }

    fn c(&self) -> u32 {
        self.bx.cols
    }

    /// Boxes of row `r` (1-based) covered by `lambda` and by `rotate(mu)`.
    fn row_load(&self, r: u32) -> u32 {
        self.lambda.part(r as usize - 1) + self.mu.part((self.k() - r) as usize)
    }

    fn column_load(&self, j: u32) -> u32 {
        self.lambda.column_len(j - 1) + self.mu.column_len(self.c() - j)
    }

    /// 1-based indices of full rows.
    pub fn full_rows(&self) -> Vec<u32> {
        (1..=self.k()).filter(|&r| self.row_load(r) == self.c()).collect()
    }

    /// 1-based indices of full columns.
    pub fn full_columns(&self) -> Vec<u32> {
        (1..=self.c()).filter(|&j| self.column_load(j) == self.k()).collect()
    }

    /// `lambda` and `rotate(mu)` overlap, so the product vanishes.
    pub fn is_zero_product(&self) -> bool {
        (1..=self.k()).any(|r| self.row_load(r) > self.c())
    }

    pub fn transpose(&self) -> RichardsonQuadruple {
        RichardsonQuadruple {
            lambda: self.lambda.conjugate(),
            mu: self.mu.conjugate(),
            bx: self.bx.transpose(),
        }
    }

    /// The quadruple with row `r` deleted from the box.
    fn without_row(&self, r: u32) -> RichardsonQuadruple {
        RichardsonQuadruple {
            lambda: self.lambda.without_part(r as usize - 1),
            mu: self.mu.without_part((self.k() - r) as usize),
            bx: AmbientBox::degenerate_ok(self.k() - 1, self.c()),
        }
    }

    fn without_column(&self, j: u32) -> RichardsonQuadruple {
        RichardsonQuadruple {
            lambda: self.lambda.without_column(j - 1),
            mu: self.mu.without_column(self.c() - j),
            bx: AmbientBox::degenerate_ok(self.k(), self.c() - 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BasicReport {
    pub basic: bool,
    pub zero_product: bool,
    pub full_rows: Vec<u32>,
    pub full_columns: Vec<u32>,
}

pub fn is_basic(r: &RichardsonQuadruple) -> BasicReport {
    let full_rows = r.full_rows();
    let full_columns = r.full_columns();
    BasicReport {
        basic: full_rows.is_empty() && full_columns.is_empty(),
        zero_product: r.is_zero_product(),
        full_rows,
        full_columns,
    }
}

/// Forced top-row entries of `mu`: `w_A(j) = 1 + lambda'_{n-k+1-j}` for
/// `j = 1..=n-k`, the addable rows of `lambda` in increasing order.
pub fn accessible_word(lambda: &Partition, bx: AmbientBox) -> Vec<u32> {
    (1..=bx.cols)
        .map(|j| 1 + lambda.column_len(bx.cols - j))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum DemolitionKind {
    Row,
    Column,
}

/// The filling bijection between `poset(before)` and `poset(after)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DemolitionWitness {
    pub kind: DemolitionKind,
    pub index: u32,
    pub before: RichardsonQuadruple,
    pub after: RichardsonQuadruple,
}

impl DemolitionWitness {
    pub fn forward(&self, t: &SetValuedFilling) -> Result<SetValuedFilling> {
        self.check_source(t, &self.before)?;
        match self.kind {
            DemolitionKind::Column => self.column_forward(t),
            DemolitionKind::Row => self.row_forward(t),
        }
    }

    pub fn backward(&self, t: &SetValuedFilling) -> Result<SetValuedFilling> {
        self.check_source(t, &self.after)?;
        match self.kind {
            DemolitionKind::Column => self.column_backward(t),
            DemolitionKind::Row => self.row_backward(t),
        }
    }

    fn check_source(&self, t: &SetValuedFilling, q: &RichardsonQuadruple) -> Result<()> {
        if t.shape() != &q.mu || t.context() != &q.lambda {
            return Err(Error::InvalidFilling(format!(
                "filling of {} x {} does not belong to {q}",
                t.context(),
                t.shape()
            )));
        }
        Ok(())
    }

    /// Column of `mu` under box column `index`, its height, and the number
    /// of `lambda` rows above it.
    fn mu_column(&self) -> (usize, usize, u32) {
        let q = &self.before;
        let jm = (q.c() - self.index) as usize;
        let l = q.lambda.column_len(self.index - 1);
        (jm, q.mu.column_len(jm as u32) as usize, l)
    }

    fn column_forward(&self, t: &SetValuedFilling) -> Result<SetValuedFilling> {
        let (jm, height, l) = self.mu_column();
        let mut rows = t.rows().to_vec();
        for (i, row) in rows.iter_mut().enumerate().take(height) {
            if row[jm] != EntrySet::singleton(l + 1 + i as u32) {
                return Err(Error::InvalidFilling(format!(
                    "column {} of {t:?} is not the forced column",
                    jm + 1
                )));
            }
            row.remove(jm);
        }
        rows.retain(|r| !r.is_empty());
        SetValuedFilling::new(self.after.mu.clone(), self.after.lambda.clone(), rows)
    }

    fn column_backward(&self, t: &SetValuedFilling) -> Result<SetValuedFilling> {
        let (jm, height, l) = self.mu_column();
        let mut rows = t.rows().to_vec();
        rows.resize(self.before.mu.len(), Vec::new());
        for (i, row) in rows.iter_mut().enumerate().take(height) {
            row.insert(jm, EntrySet::singleton(l + 1 + i as u32));
        }
        SetValuedFilling::new(self.before.mu.clone(), self.before.lambda.clone(), rows)
    }

    fn row_forward(&self, t: &SetValuedFilling) -> Result<SetValuedFilling> {
        let q = &self.before;
        let forced = accessible_word(&q.lambda, q.bx);
        let width = q.mu.part((q.k() - self.index) as usize) as usize;
        let mut rows = t.rows().to_vec();
        for (j, &w) in forced.iter().enumerate().take(width) {
            if rows[0][j] != EntrySet::singleton(w) {
                return Err(Error::InvalidFilling(format!(
                    "box (1,{}) of {t:?} is not the forced entry {w}",
                    j + 1
                )));
            }
        }
        // shift the first `width` columns up by one box
        let height = rows.len();
        for j in 0..width {
            let col_h = rows.iter().take_while(|r| r.len() > j).count();
            for i in 0..col_h - 1 {
                rows[i][j] = rows[i + 1][j];
            }
            debug_assert!(col_h == height || rows[col_h].len() <= j);
            rows[col_h - 1][j] = EntrySet::empty();
        }
        for row in rows.iter_mut() {
            row.retain(|s| !s.is_empty());
        }
        rows.retain(|r| !r.is_empty());
        let rows = rows
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|s| {
                        s.shifted(-1).ok_or_else(|| {
                            Error::InvalidFilling(format!("entry 1 survives row demolition in {t:?}"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        SetValuedFilling::new(self.after.mu.clone(), self.after.lambda.clone(), rows)
    }

    fn row_backward(&self, t: &SetValuedFilling) -> Result<SetValuedFilling> {
        let q = &self.before;
        let forced = accessible_word(&q.lambda, q.bx);
        let width = q.mu.part((q.k() - self.index) as usize) as usize;
        let up = |s: EntrySet| {
            s.shifted(1)
                .ok_or_else(|| Error::InvalidFilling(format!("entry too large in {t:?}")))
        };
        // columns left of `width` slide down under the forced entries
        let rows = (0..q.mu.len())
            .map(|i| {
                (0..q.mu.part(i) as usize)
                    .map(|j| match (j < width, i) {
                        (true, 0) => Ok(EntrySet::singleton(forced[j])),
                        (true, _) => up(t.rows()[i - 1][j]),
                        (false, _) => up(t.rows()[i][j]),
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        SetValuedFilling::new(q.mu.clone(), q.lambda.clone(), rows)
    }
}

pub fn demolish_column(r: &RichardsonQuadruple, j: u32) -> Result<(RichardsonQuadruple, DemolitionWitness)> {
    if j == 0 || j > r.c() || r.column_load(j) != r.k() {
        return Err(Error::NotFull {
            kind: "column",
            index: j,
        });
    }
    let after = r.without_column(j);
    let w = DemolitionWitness {
        kind: DemolitionKind::Column,
        index: j,
        before: r.clone(),
        after: after.clone(),
    };
    Ok((after, w))
}

pub fn demolish_row(r: &RichardsonQuadruple, row: u32) -> Result<(RichardsonQuadruple, DemolitionWitness)> {
    if row == 0 || row > r.k() || r.row_load(row) != r.c() {
        return Err(Error::NotFull {
            kind: "row",
            index: row,
        });
    }
    let after = r.without_row(row);
    let w = DemolitionWitness {
        kind: DemolitionKind::Row,
        index: row,
        before: r.clone(),
        after: after.clone(),
    };
    Ok((after, w))
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DemolitionTranscript {
    pub steps: Vec<DemolitionWitness>,
}

impl DemolitionTranscript {
    /// Maps a filling of the original quadruple to the basic one.
    pub fn forward(&self, t: &SetValuedFilling) -> Result<SetValuedFilling> {
        self.steps.iter().try_fold(t.clone(), |t, w| w.forward(&t))
    }

    pub fn backward(&self, t: &SetValuedFilling) -> Result<SetValuedFilling> {
        self.steps.iter().rev().try_fold(t.clone(), |t, w| w.backward(&t))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let steps: Vec<serde_json::Value> = self
            .steps
            .iter()
            .map(|w| {
                serde_json::json!({
                    "kind": match w.kind { DemolitionKind::Row => "row", DemolitionKind::Column => "column" },
                    "index": w.index,
                    "after": {
                        "lambda": w.after.lambda,
                        "mu": w.after.mu,
                        "box": w.after.bx,
                    }
                })
            })
            .collect();
        serde_json::json!({ "steps": steps })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Demolition {
    /// `lambda` meets `rotate(mu)`: the product is zero.
    ZeroProduct,
    Basic(RichardsonQuadruple, DemolitionTranscript),
}

impl Demolition {
    pub fn basic(&self) -> Option<&RichardsonQuadruple> {
        match self {
            Demolition::Basic(q, _) => Some(q),
            Demolition::ZeroProduct => None,
        }
    }
}

/// Removes full rows (lowest index first), then full columns, until basic.
pub fn basic_demolition(r: &RichardsonQuadruple) -> Demolition {
    if r.is_zero_product() {
        return Demolition::ZeroProduct;
    }
    let mut cur = r.clone();
    let mut steps = Vec::new();
    loop {
        let next = if let Some(&row) = cur.full_rows().first() {
            demolish_row(&cur, row)
        } else if let Some(&col) = cur.full_columns().first() {
            demolish_column(&cur, col)
        } else {
            break;
        };
        let (after, w) = next.expect("index reported full");
        steps.push(w);
        cur = after;
    }
    Demolition::Basic(cur, DemolitionTranscript { steps })
}

/// Terminal quadruples over every demolition order.
pub fn all_basic_demolitions(r: &RichardsonQuadruple) -> BTreeSet<RichardsonQuadruple> {
    let mut out = BTreeSet::new();
    let mut seen = BTreeSet::new();
    let mut stack = vec![r.clone()];
    while let Some(q) = stack.pop() {
        if !seen.insert(q.clone()) {
            continue;
        }
        let rows = q.full_rows();
        let cols = q.full_columns();
        if rows.is_empty() && cols.is_empty() {
            out.insert(q);
            continue;
        }
        for row in rows {
            stack.push(q.without_row(row));
        }
        for col in cols {
            stack.push(q.without_column(col));
        }
    }
    out
}

/// Stembridge's multiplicity-free shape pairs, split as in the case analysis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StembridgeCase {
    #[serde(rename = "1")]
    Rectangles,
    #[serde(rename = "2a")]
    OneRow,
    #[serde(rename = "2b")]
    OneColumn,
    #[serde(rename = "3a")]
    LeftNear,
    #[serde(rename = "3b")]
    BottomNear,
    #[serde(rename = "3c")]
    TopNear,
    #[serde(rename = "3d")]
    RightNear,
    #[serde(rename = "4a")]
    TwoRowFatHook,
    #[serde(rename = "4b")]
    TwoColumnFatHook,
}

impl StembridgeCase {
    pub const ALL: [StembridgeCase; 9] = [
        StembridgeCase::Rectangles,
        StembridgeCase::OneRow,
        StembridgeCase::OneColumn,
        StembridgeCase::LeftNear,
        StembridgeCase::BottomNear,
        StembridgeCase::TopNear,
        StembridgeCase::RightNear,
        StembridgeCase::TwoRowFatHook,
        StembridgeCase::TwoColumnFatHook,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            StembridgeCase::Rectangles => "1",
            StembridgeCase::OneRow => "2a",
            StembridgeCase::OneColumn => "2b",
            StembridgeCase::LeftNear => "3a",
            StembridgeCase::BottomNear => "3b",
            StembridgeCase::TopNear => "3c",
            StembridgeCase::RightNear => "3d",
            StembridgeCase::TwoRowFatHook => "4a",
            StembridgeCase::TwoColumnFatHook => "4b",
        }
    }

    pub fn from_tag(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.tag() == s)
    }

    /// Whether `(first, second)` fits the case with `first` in the role of
    /// the special shape (the rectangle, the one-line shape, or the
    /// two-line rectangle).
    fn matches(self, first: &Partition, second: &Partition) -> bool {
        let s = second.classify();
        match self {
            StembridgeCase::Rectangles => first.is_rectangle() && s.is_rectangle(),
            StembridgeCase::OneRow => first.is_rectangle() && first.len() <= 1,
            StembridgeCase::OneColumn => first.is_rectangle() && first.width() <= 1,
            StembridgeCase::LeftNear => first.is_rectangle() && s.is_near(NearSide::Left),
            StembridgeCase::BottomNear => first.is_rectangle() && s.is_near(NearSide::Bottom),
            StembridgeCase::TopNear => first.is_rectangle() && s.is_near(NearSide::Top),
            StembridgeCase::RightNear => first.is_rectangle() && s.is_near(NearSide::Right),
            StembridgeCase::TwoRowFatHook => {
                matches!(first.classify(), ShapeClass::Rectangle { rows: 2, .. }) && s.is_fat_hook()
            }
            StembridgeCase::TwoColumnFatHook => {
                matches!(first.classify(), ShapeClass::Rectangle { cols: 2, .. }) && s.is_fat_hook()
            }
        }
    }
}

impl fmt::Display for StembridgeCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct StembridgeMatch {
    pub case: StembridgeCase,
    /// The special shape of the case is the second argument.
    pub swapped: bool,
}

/// Every case `(a, b)` satisfies, either way round, in dispatch preference order.
pub fn stembridge_cases(a: &Partition, b: &Partition) -> Vec<StembridgeMatch> {
    let mut out = Vec::new();
    for case in StembridgeCase::ALL {
        if case.matches(a, b) {
            out.push(StembridgeMatch { case, swapped: false });
        } else if case.matches(b, a) {
            out.push(StembridgeMatch { case, swapped: true });
        }
    }
    out
}

/// The preferred Stembridge case of `s_a * s_b`, if the product is multiplicity-free.
pub fn stembridge_case(a: &Partition, b: &Partition) -> Option<StembridgeMatch> {
    stembridge_cases(a, b).into_iter().next()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum MfEvidence {
    ZeroProduct,
    Stembridge {
        case: StembridgeCase,
        cases: Vec<StembridgeCase>,
        basic: RichardsonQuadruple,
    },
    /// Not a Stembridge pair, yet every repeated term falls outside the box.
    BoxTruncated {
        basic: RichardsonQuadruple,
    },
    NotStembridge {
        basic: RichardsonQuadruple,
    },
}

impl MfEvidence {
    pub fn stembridge_case(&self) -> Option<StembridgeCase> {
        match self {
            MfEvidence::Stembridge { case, .. } => Some(*case),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MfVerdict {
    pub verdict: bool,
    pub evidence: MfEvidence,
}

/// Demolish to the basic quadruple, then test it against Stembridge's list.
///
/// Stembridge's list is not the whole story inside a box: a basic pair such
/// as `((2,2,2),(3,2,1),4x5)` is multiplicity-free only because its repeated
/// term `(4,3,2,2,1)` has too many rows. Those fall back to the boxed
/// Littlewood–Richardson coefficients and are reported as `BoxTruncated`.
pub fn is_multiplicity_free(r: &RichardsonQuadruple) -> MfVerdict {
    match basic_demolition(r) {
        Demolition::ZeroProduct => MfVerdict {
            verdict: true,
            evidence: MfEvidence::ZeroProduct,
        },
        Demolition::Basic(basic, _) => {
            let cases = stembridge_cases(&basic.lambda, &basic.mu);
            match cases.first() {
                Some(m) => MfVerdict {
                    verdict: true,
                    evidence: MfEvidence::Stembridge {
                        case: m.case,
                        cases: cases.iter().map(|m| m.case).collect(),
                        basic,
                    },
                },
                None if is_multiplicity_free_brute(&basic) => MfVerdict {
                    verdict: true,
                    evidence: MfEvidence::BoxTruncated { basic },
                },
                None => MfVerdict {
                    verdict: false,
                    evidence: MfEvidence::NotStembridge { basic },
                },
            }
        }
    }
}

/// Brute force: every boxed Littlewood–Richardson coefficient is at most one.
pub fn is_multiplicity_free_brute(r: &RichardsonQuadruple) -> bool {
    lr_product(&r.lambda, &r.mu, r.bx).values().all(|&c| c <= 1)
}

/// Buch's shape criterion applied to the basic quadruple: both shapes are
/// rectangles, or one is a single box or empty.
pub fn k_multiplicity_free_by_shape(r: &RichardsonQuadruple) -> bool {
    match basic_demolition(r) {
        Demolition::ZeroProduct => true,
        Demolition::Basic(q, _) => {
            (q.lambda.is_rectangle() && q.mu.is_rectangle()) || q.lambda.size() <= 1 || q.mu.size() <= 1
        }
    }
}

/// Brute force: every boxed K-theoretic coefficient lies in `{-1, 0, 1}`.
pub fn k_multiplicity_free_brute(r: &RichardsonQuadruple) -> bool {
    buch_product(&r.lambda, &r.mu, r.bx)
        .coeffs
        .values()
        .all(|c| c.abs() <= 1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct KmfVerdict {
    pub by_shape: bool,
    pub by_coefficients: bool,
}

impl KmfVerdict {
    pub fn agree(&self) -> bool {
        self.by_shape == self.by_coefficients
    }
}

pub fn k_multiplicity_free_verdict(r: &RichardsonQuadruple) -> KmfVerdict {
    KmfVerdict {
        by_shape: k_multiplicity_free_by_shape(r),
        by_coefficients: k_multiplicity_free_brute(r),
    }
}

/// Whether all K-theoretic coefficients lie in `{-1, 0, 1}` (shape criterion).
pub fn is_k_multiplicity_free(r: &RichardsonQuadruple) -> bool {
    k_multiplicity_free_by_shape(r)
}
