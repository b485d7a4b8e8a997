//! Sign-reversing involutions on Buch tableaux and the matchings they build.
//!
//! Every construction here is checked rather than trusted: an involution
//! step that leaves the set of Buch tableaux is an error, and
//! [`verify_matching`] re-checks the finished matching from scratch.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::partition::{AmbientBox, Partition};
use crate::poset::check_main_theorem;
use crate::svt::{enumerate_buch_tableaux, lex_min_tableau, EntrySet, SetValuedFilling};

/// Boxes `(row, col)` (0-based) of `m` holding exactly their own row index,
/// in column-major order, limited to the first `rows` rows when given.
pub fn m_plus(m: &SetValuedFilling, rows: Option<usize>) -> Vec<(usize, usize)> {
    let limit = rows.unwrap_or(usize::MAX);
    let mut out = Vec::new();
    for c in 0..m.shape().width() as usize {
        for r in 0..m.shape().column_len(c as u32) as usize {
            if r < limit && m.rows()[r][c] == EntrySet::singleton(r as u32 + 1) {
                out.push((r, c));
            }
        }
    }
    out
}

/// `I_1` with its minimal tableau precomputed.
#[derive(Clone, Debug)]
pub struct FirstInvolution {
    pub m: SetValuedFilling,
    pub bx: AmbientBox,
    plus: Vec<(usize, usize)>,
}

impl FirstInvolution {
    /// `region` restricts the comparison to the top `region` rows of `mu`.
    pub fn new(lambda: &Partition, mu: &Partition, bx: AmbientBox, region: Option<u32>) -> Result<Self> {
        if region.is_none() && !(lambda.is_rectangle() && mu.is_rectangle()) {
            return Err(Error::InvalidCase(format!(
                "I1 needs two rectangles or a region, got {lambda} and {mu}"
            )));
        }
        let m = lex_min_tableau(lambda, mu, bx)?;
        let plus = m_plus(&m, region.map(|r| r as usize));
        Ok(FirstInvolution { m, bx, plus })
    }

    /// First box of `M+` where `t` disagrees with `M`.
    pub fn mismatch(&self, t: &SetValuedFilling) -> Option<(usize, usize)> {
        self.plus
            .iter()
            .copied()
            .find(|&(r, c)| t.rows()[r][c] != EntrySet::singleton(r as u32 + 1))
    }

    pub fn apply(&self, t: &SetValuedFilling) -> Result<SetValuedFilling> {
        let Some((r, c)) = self.mismatch(t) else {
            return Ok(t.clone());
        };
        let v = r as u32 + 1;
        let mut rows = t.rows().to_vec();
        let s = rows[r][c];
        rows[r][c] = if s.contains(v) { s.without(v) } else { s.with(v) };
        checked(t, rows, self.bx)
    }
}

/// Rebuilds `t` with new entries and insists the result is a Buch tableau.
fn checked(t: &SetValuedFilling, rows: Vec<Vec<EntrySet>>, bx: AmbientBox) -> Result<SetValuedFilling> {
    let out = SetValuedFilling::new(t.shape().clone(), t.context().clone(), rows)
        .map_err(|e| Error::InvalidFilling(format!("image of {t:?}: {e}")))?;
    if !out.is_buch_tableau(bx) {
        return Err(Error::InvalidFilling(format!("image {out:?} of {t:?} is not a Buch tableau")));
    }
    Ok(out)
}

pub fn i1(t: &SetValuedFilling, bx: AmbientBox, region: Option<u32>) -> Result<SetValuedFilling> {
    FirstInvolution::new(t.context(), t.shape(), bx, region)?.apply(t)
}

/// The product left over once `I_1` has cancelled every filling whose upper
/// rectangle differs from that of `M`.
///
/// Below the upper rectangle, an entry of the first row must exceed the
/// entry of `M` above it. In reduced values these are the `floors`; when
/// every floor is at most 1 they only cap the number of 1's and the reduced
/// set is a plain product (see [`Reduction::plain_box`]).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reduction {
    pub source: (Partition, Partition, AmbientBox),
    pub lambda: Partition,
    pub mu: Partition,
    pub bx: AmbientBox,
    /// Rows in the upper rectangle; also the value offset.
    pub offset: u32,
    pub upper: Vec<Vec<EntrySet>>,
    /// Per column of the first reduced row: entries must be larger.
    pub floors: Vec<u32>,
}

impl Reduction {
    /// Whether `t` survives `I_1` on the upper rectangle.
    pub fn is_survivor(&self, t: &SetValuedFilling) -> bool {
        t.rows()[..self.offset as usize] == self.upper[..]
    }

    /// Whether a filling of the reduced product respects the floors.
    pub fn admits(&self, t: &SetValuedFilling) -> bool {
        t.rows().first().is_none_or(|row| {
            row.iter()
                .zip(&self.floors)
                .all(|(s, &f)| s.min().is_some_and(|v| v > f))
        })
    }

    pub fn reduced_fillings(&self) -> Vec<SetValuedFilling> {
        let mut out = enumerate_buch_tableaux(&self.lambda, &self.mu, self.bx);
        out.retain(|t| self.admits(t));
        out
    }

    /// The box in which the floors are just a cap on 1's, if they are.
    pub fn plain_box(&self) -> Option<AmbientBox> {
        if self.floors.iter().any(|&f| f > 1) {
            return None;
        }
        let open = self.floors.iter().take_while(|&&f| f == 0).count() as u32;
        let cols = self.bx.cols.min(self.lambda.part(0) + open);
        Some(AmbientBox::degenerate_ok(self.bx.rows, cols))
    }

    /// Survivor of the source product to a filling of the reduced one.
    pub fn forward(&self, t: &SetValuedFilling) -> Result<SetValuedFilling> {
        if !self.is_survivor(t) {
            return Err(Error::InvalidFilling(format!("{t:?} does not survive the reduction")));
        }
        let rows = t.rows()[self.offset as usize..]
            .iter()
            .map(|row| {
                row.iter()
                    .map(|s| {
                        s.shifted(-(self.offset as i32))
                            .ok_or_else(|| Error::InvalidFilling(format!("small entry below the upper rectangle in {t:?}")))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        SetValuedFilling::new(self.mu.clone(), self.lambda.clone(), rows)
    }

    pub fn backward(&self, t: &SetValuedFilling) -> Result<SetValuedFilling> {
        let mut rows = self.upper.clone();
        for row in t.rows() {
            rows.push(
                row.iter()
                    .map(|s| s.shifted(self.offset as i32).ok_or(Error::Overflow))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        let (lambda, mu, _) = &self.source;
        SetValuedFilling::new(mu.clone(), lambda.clone(), rows)
    }

    /// Checks that `forward` is a bijection from the `I_1` survivors among
    /// `all` onto [`Reduction::reduced_fillings`], inverted by `backward`.
    pub fn verify(&self, all: &[SetValuedFilling]) -> Result<()> {
        let survivors: Vec<&SetValuedFilling> = all.iter().filter(|t| self.is_survivor(t)).collect();
        let mut image = Vec::with_capacity(survivors.len());
        for t in &survivors {
            let u = self.forward(t)?;
            if &self.backward(&u)? != *t {
                return Err(Error::InvalidFilling(format!("backward does not invert forward at {t:?}")));
            }
            image.push(u);
        }
        image.sort_by_key(|t| t.order_key());
        let target = self.reduced_fillings();
        if image != target {
            return Err(Error::InvalidFilling(format!(
                "{} survivors against {} reduced fillings",
                image.len(),
                target.len()
            )));
        }
        for t in &target {
            if !self.backward(t)?.is_buch_tableau(self.source.2) {
                return Err(Error::InvalidFilling(format!("backward image of {t:?} is not a Buch tableau")));
            }
        }
        Ok(())
    }
}

/// Peels the rows of `mu` that mirror the rectangle `lambda` off the
/// product. `lambda` a rectangle, `mu` nonempty.
pub fn reduce(lambda: &Partition, mu: &Partition, bx: AmbientBox) -> Result<Reduction> {
    if !lambda.is_rectangle() {
        return Err(Error::InvalidCase(format!("reduction needs a rectangle, got {lambda}")));
    }
    if mu.is_empty() {
        return Err(Error::InvalidCase("reduction of an empty shape".into()));
    }
    let m = lex_min_tableau(lambda, mu, bx)?;
    let a1 = mu.parts().iter().take_while(|&&p| p == mu.part(0)).count() as u32;
    let upper: Vec<Vec<EntrySet>> = m.rows()[..a1 as usize].to_vec();
    // content of the superstandard lambda followed by the upper rectangle of M
    let mut rho: Vec<u32> = lambda.parts().to_vec();
    for v in upper.iter().flatten().flat_map(|s| s.iter()) {
        let i = v as usize - 1;
        if rho.len() <= i {
            rho.resize(i + 1, 0);
        }
        rho[i] += 1;
    }
    let lambda2 = Partition::new(rho.get(a1 as usize..).unwrap_or_default().to_vec())?;
    let mu2 = Partition::new(mu.parts()[a1 as usize..].to_vec())?;
    let floors = upper[a1 as usize - 1]
        .iter()
        .take(mu2.part(0) as usize)
        .map(|s| s.max().expect("nonempty entry") - a1)
        .collect();
    Ok(Reduction {
        source: (lambda.clone(), mu.clone(), bx),
        lambda: lambda2,
        mu: mu2,
        bx: AmbientBox::degenerate_ok(bx.rows - a1, rho[a1 as usize - 1]),
        offset: a1,
        upper,
        floors,
    })
}

/// One column of a snake: the run of boxes holding their own row index from
/// the top, an optional run from the short rows of the northeast shape, and
/// the run counting up from `base` that finishes the column.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ColumnSnake {
    pub top: u32,
    /// `(first row, last row, first value)`, rows 1-based.
    pub inter: Option<(u32, u32, u32)>,
    /// First row (1-based) of the run `base, base+1, ...`.
    pub bottom: Option<u32>,
}

/// The lines cutting a filling into its column blocks. A snake determines
/// its filling.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Snake {
    pub base: u32,
    pub columns: Vec<ColumnSnake>,
}

impl Snake {
    pub fn from_filling(t: &SetValuedFilling) -> Result<Snake> {
        let base = t.context().len() as u32 + 1;
        let mut columns = Vec::new();
        for c in 0..t.shape().width() as usize {
            let col = t.column(c);
            let top = col
                .iter()
                .enumerate()
                .take_while(|(i, s)| s.contains(*i as u32 + 1))
                .count() as u32;
            let mut inter: Option<(u32, u32, u32)> = None;
            let mut bottom = None;
            for (i, s) in col.iter().enumerate() {
                let row = i as u32 + 1;
                for v in s.iter() {
                    if row <= top && v == row {
                        continue;
                    }
                    if v >= base {
                        bottom.get_or_insert(row + base - v);
                    } else {
                        match &mut inter {
                            None => inter = Some((row, row, v)),
                            Some((_, last, _)) => *last = row,
                        }
                    }
                }
            }
            columns.push(ColumnSnake { top, inter, bottom });
        }
        let snake = Snake { base, columns };
        let back = snake.to_filling(t.shape(), t.context())?;
        if &back != t {
            return Err(Error::InvalidFilling(format!("{t:?} does not split into column blocks")));
        }
        Ok(snake)
    }

    pub fn to_filling(&self, shape: &Partition, context: &Partition) -> Result<SetValuedFilling> {
        let mut rows: Vec<Vec<EntrySet>> = shape
            .parts()
            .iter()
            .map(|&p| vec![EntrySet::empty(); p as usize])
            .collect();
        for (c, cs) in self.columns.iter().enumerate() {
            let h = shape.column_len(c as u32);
            for row in 1..=h {
                let s = &mut rows[row as usize - 1][c];
                if row <= cs.top {
                    s.insert(row);
                }
                if let Some((a, b, v0)) = cs.inter {
                    if (a..=b).contains(&row) {
                        s.insert(v0 + row - a);
                    }
                }
                if let Some(b) = cs.bottom {
                    if row >= b {
                        s.insert(self.base + row - b);
                    }
                }
            }
        }
        SetValuedFilling::new(shape.clone(), context.clone(), rows)
    }
}

/// A position of the word: box `(row, col)` (0-based) and the value read there.
pub type WordPosition = (usize, usize, u32);

/// Entries filling the missing column piece of a right near rectangle
/// `lambda`: the first occurrence in the word of `mu` of each short-row
/// value, and the `lambda_1`-th occurrence of each value past `l(lambda)`.
pub fn intersnake(t: &SetValuedFilling) -> Vec<WordPosition> {
    let lambda = t.context();
    let l1 = lambda.part(0);
    let beta1 = lambda.parts().iter().take_while(|&&p| p == l1).count() as u32;
    let ell = lambda.len() as u32;
    let mut seen: HashMap<u32, u32> = HashMap::new();
    let mut out = Vec::new();
    for (r, row) in t.rows().iter().enumerate() {
        for c in (0..row.len()).rev() {
            for v in row[c].iter().rev() {
                let n = seen.entry(v).or_insert(0);
                *n += 1;
                let hit = (v > beta1 && v <= ell && *n == 1) || (v > ell && *n == l1);
                if hit {
                    out.push((r, c, v));
                }
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum MatchingMethod {
    Trivial,
    FirstInvolution,
    Reduction,
    NearRectangle,
    Swapped,
    Demolition,
    /// Augmenting-path search; used only where no involution applies.
    Search,
}

/// Sign-reversing pairs plus the fixed points left over.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matching {
    pub fixed: Vec<SetValuedFilling>,
    /// Each pair is stored smaller filling first.
    pub pairs: Vec<(SetValuedFilling, SetValuedFilling)>,
    /// Constructions applied, outermost first.
    pub route: Vec<MatchingMethod>,
}

impl Matching {
    fn pair(a: SetValuedFilling, b: SetValuedFilling) -> (SetValuedFilling, SetValuedFilling) {
        if a.size() <= b.size() {
            (a, b)
        } else {
            (b, a)
        }
    }

    pub fn map(&self, method: MatchingMethod, f: impl Fn(&SetValuedFilling) -> Result<SetValuedFilling>) -> Result<Matching> {
        Ok(Matching {
            fixed: self.fixed.iter().map(&f).collect::<Result<_>>()?,
            pairs: self
                .pairs
                .iter()
                .map(|(a, b)| Ok(Matching::pair(f(a)?, f(b)?)))
                .collect::<Result<_>>()?,
            route: std::iter::once(method).chain(self.route.iter().copied()).collect(),
        })
    }

    /// Partner of `t`, or `t` itself when fixed.
    pub fn partner(&self, t: &SetValuedFilling) -> Option<&SetValuedFilling> {
        if self.fixed.contains(t) {
            return self.fixed.iter().find(|f| *f == t);
        }
        self.pairs.iter().find_map(|(a, b)| {
            if a == t {
                Some(b)
            } else if b == t {
                Some(a)
            } else {
                None
            }
        })
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Dump<'a> {
            fixed: &'a [SetValuedFilling],
            pairs: Vec<[&'a SetValuedFilling; 2]>,
        }
        serde_json::to_string(&Dump {
            fixed: &self.fixed,
            pairs: self.pairs.iter().map(|(a, b)| [a, b]).collect(),
        })
        .expect("matching serializes")
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MatchingReport {
    pub covered: bool,
    pub sign_reversing: bool,
    pub involutive: bool,
    pub unique_fixed_point: bool,
    pub fixed_is_lex_min: bool,
    pub mobius_agrees: bool,
    pub problems: Vec<String>,
}

impl MatchingReport {
    pub fn all_pass(&self) -> bool {
        self.covered
            && self.sign_reversing
            && self.involutive
            && self.unique_fixed_point
            && self.fixed_is_lex_min
            && self.mobius_agrees
    }
}

/// Re-checks every proof obligation of a matching against the full list of
/// fillings of `(lambda, mu, bx)`.
pub fn verify_matching(
    m: &Matching,
    lambda: &Partition,
    mu: &Partition,
    bx: AmbientBox,
    all: &[SetValuedFilling],
) -> MatchingReport {
    let mut rep = MatchingReport::default();
    let mut seen: HashMap<&SetValuedFilling, usize> = HashMap::new();
    for t in m.fixed.iter().chain(m.pairs.iter().flat_map(|(a, b)| [a, b])) {
        *seen.entry(t).or_insert(0) += 1;
    }
    let universe: HashSet<&SetValuedFilling> = all.iter().collect();
    let stray = seen.keys().filter(|t| !universe.contains(*t)).count();
    let twice = seen.values().filter(|&&n| n > 1).count();
    let missing = all.iter().filter(|t| !seen.contains_key(t)).count();
    rep.covered = stray == 0 && twice == 0 && missing == 0;
    if !rep.covered {
        rep.problems
            .push(format!("{missing} fillings unmatched, {twice} used twice, {stray} foreign"));
    }
    let bad_sign: Vec<_> = m.pairs.iter().filter(|(a, b)| a.size().abs_diff(b.size()) != 1).collect();
    rep.sign_reversing = bad_sign.is_empty();
    if let Some((a, b)) = bad_sign.first() {
        rep.problems.push(format!("pair {a:?} / {b:?} is not sign-reversing"));
    }
    rep.involutive = m.pairs.iter().all(|(a, b)| a != b && m.partner(a) == Some(b) && m.partner(b) == Some(a));
    if !rep.involutive {
        rep.problems.push("pairing is not symmetric".into());
    }
    rep.unique_fixed_point = m.fixed.len() == 1;
    if !rep.unique_fixed_point {
        rep.problems.push(format!("{} fixed points", m.fixed.len()));
    }
    rep.fixed_is_lex_min = match (lex_min_tableau(lambda, mu, bx), m.fixed.as_slice()) {
        (Ok(lm), [f]) => &lm == f,
        _ => false,
    };
    if !rep.fixed_is_lex_min {
        rep.problems.push("fixed point is not the lex-min tableau".into());
    }
    rep.mobius_agrees = matches!(check_main_theorem(lambda, mu, bx), Ok(r) if r.all_pass);
    if !rep.mobius_agrees {
        rep.problems.push("signed counts differ from Mobius values".into());
    }
    rep
}

/// Pairs under an involution given as a function; fixed points collected.
fn pairs_of(
    all: &[SetValuedFilling],
    f: impl Fn(&SetValuedFilling) -> Result<SetValuedFilling>,
) -> Result<(Vec<(SetValuedFilling, SetValuedFilling)>, Vec<SetValuedFilling>)> {
    let mut pairs = Vec::new();
    let mut fixed = Vec::new();
    for t in all {
        let u = f(t)?;
        if &u == t {
            fixed.push(t.clone());
            continue;
        }
        if f(&u)? != *t {
            return Err(Error::InvalidFilling(format!("not an involution at {t:?} -> {u:?}")));
        }
        if t.size().abs_diff(u.size()) != 1 {
            return Err(Error::InvalidFilling(format!("{t:?} -> {u:?} keeps the sign")));
        }
        if t.order_key() < u.order_key() {
            pairs.push(Matching::pair(t.clone(), u));
        }
    }
    Ok((pairs, fixed))
}

/// Sorted contents to fillings, for transporting across commuted products.
fn by_total_content(all: &[SetValuedFilling]) -> BTreeMap<Vec<u32>, Vec<SetValuedFilling>> {
    let mut out: BTreeMap<Vec<u32>, Vec<SetValuedFilling>> = BTreeMap::new();
    for t in all {
        out.entry(t.content(true).counts).or_default().push(t.clone());
    }
    out
}

/// What `I_2` does with a filling.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SecondOutcome {
    /// Agrees with `M` along the whole intersnake of `M`.
    Fixed,
    Partner(SetValuedFilling),
    /// The toggle would leave the Buch tableaux; handed on to `I_3`.
    Unmatched,
}

/// Case data for a right near rectangle `lambda` against a rectangle `mu`.
#[derive(Clone, Debug)]
pub struct NearRectangleCase {
    pub first: FirstInvolution,
    /// Intersnake of `M`.
    pub snake: Vec<WordPosition>,
    /// `beta_1 + beta_2 + 1`, the first value below `lambda`.
    pub base: u32,
}

impl NearRectangleCase {
    pub fn new(lambda: &Partition, mu: &Partition, bx: AmbientBox) -> Result<Self> {
        use crate::partition::NearSide;
        if !mu.is_rectangle() || mu.is_empty() || !lambda.classify().is_near(NearSide::Right) {
            return Err(Error::InvalidCase(format!(
                "expected a right near rectangle and a rectangle, got {lambda} and {mu}"
            )));
        }
        let first = FirstInvolution::new(lambda, mu, bx, Some(mu.len() as u32))?;
        let snake = intersnake(&first.m);
        Ok(NearRectangleCase {
            first,
            snake,
            base: lambda.len() as u32 + 1,
        })
    }

    fn first_difference(&self, t: &SetValuedFilling) -> Option<WordPosition> {
        let m = &self.first.m;
        self.snake
            .iter()
            .copied()
            .find(|&(r, c, _)| t.rows()[r][c] != m.rows()[r][c])
    }

    /// Toggles the value of `M`'s intersnake at the first intersnake box
    /// where `t` and `M` differ.
    pub fn i2(&self, t: &SetValuedFilling) -> SecondOutcome {
        let Some((r, c, v)) = self.first_difference(t) else {
            return SecondOutcome::Fixed;
        };
        let mut rows = t.rows().to_vec();
        let s = rows[r][c];
        rows[r][c] = if s.contains(v) { s.without(v) } else { s.with(v) };
        match checked(t, rows, self.first.bx) {
            Ok(u) => SecondOutcome::Partner(u),
            Err(_) => SecondOutcome::Unmatched,
        }
    }

    /// Moves the start of the run `base, base+1, ...` in the column of the
    /// first intersnake difference one box up or down.
    pub fn i3(&self, t: &SetValuedFilling) -> Result<SetValuedFilling> {
        let (_, c, _) = self
            .first_difference(t)
            .ok_or_else(|| Error::InvalidCase(format!("{t:?} agrees with M along the intersnake")))?;
        let col = t.column(c);
        let start = col.iter().position(|s| s.contains(self.base));
        let mut rows = t.rows().to_vec();
        match start {
            Some(b) if col[b].len() == 2 => {
                rows[b][c] = col[b].without(self.base);
                for (i, s) in col.iter().enumerate().skip(b + 1) {
                    rows[i][c] = s.shifted(-1).ok_or(Error::Overflow)?;
                }
            }
            _ if col.iter().all(|s| s.len() == 1) => {
                let b = start.unwrap_or(col.len());
                let above = b
                    .checked_sub(1)
                    .ok_or_else(|| Error::InvalidCase(format!("no box above the run in {t:?}")))?;
                rows[above][c] = col[above].with(self.base);
                for (i, s) in col.iter().enumerate().skip(b) {
                    rows[i][c] = s.shifted(1).ok_or(Error::Overflow)?;
                }
            }
            _ => return Err(Error::InvalidCase(format!("column {} of {t:?} has no movable run", c + 1))),
        }
        checked(t, rows, self.first.bx)
    }

    /// `I_1`, then `I_2` on its survivors, then `I_3` on what `I_2` leaves.
    pub fn matching(&self, all: &[SetValuedFilling]) -> Result<Matching> {
        let (mut pairs, survivors) = pairs_of(all, |t| self.first.apply(t))?;
        let mut leftover = Vec::new();
        let mut fixed = Vec::new();
        for t in &survivors {
            match self.i2(t) {
                SecondOutcome::Fixed => fixed.push(t.clone()),
                SecondOutcome::Unmatched => leftover.push(t.clone()),
                SecondOutcome::Partner(u) => {
                    if self.i2(&u) != SecondOutcome::Partner(t.clone()) || !survivors.contains(&u) {
                        return Err(Error::InvalidFilling(format!("I2 is not an involution at {t:?}")));
                    }
                    if t.order_key() < u.order_key() {
                        pairs.push(Matching::pair(t.clone(), u));
                    }
                }
            }
        }
        let (third, rest) = pairs_of(&leftover, |t| {
            let u = self.i3(t)?;
            if leftover.contains(&u) {
                Ok(u)
            } else {
                Err(Error::InvalidFilling(format!("I3 leaves the I2 survivors at {t:?}")))
            }
        })?;
        pairs.extend(third);
        fixed.extend(rest);
        Ok(Matching {
            fixed,
            pairs,
            route: vec![MatchingMethod::NearRectangle],
        })
    }
}

/// The perfect matching behind the exact sequence: sign-reversing pairs of
/// Buch tableaux of `(lambda, mu, bx)` leaving only the lex-min tableau.
pub fn build_matching(lambda: &Partition, mu: &Partition, bx: AmbientBox) -> Result<Matching> {
    let all = enumerate_buch_tableaux(lambda, mu, bx);
    if all.is_empty() {
        return Err(Error::EmptyProduct);
    }
    let q = crate::richardson::RichardsonQuadruple::new(lambda.clone(), mu.clone(), bx)?;
    if !crate::richardson::is_multiplicity_free(&q).verdict {
        return Err(Error::NotMultiplicityFreeCase(q.to_string()));
    }
    build_on(lambda, mu, bx, &all, true)
}

fn build_on(
    lambda: &Partition,
    mu: &Partition,
    bx: AmbientBox,
    all: &[SetValuedFilling],
    may_swap: bool,
) -> Result<Matching> {
    use crate::richardson::{basic_demolition, Demolition, RichardsonQuadruple};

    if all.len() == 1 {
        return Ok(Matching {
            fixed: all.to_vec(),
            pairs: Vec::new(),
            route: vec![MatchingMethod::Trivial],
        });
    }
    let q = RichardsonQuadruple {
        lambda: lambda.clone(),
        mu: mu.clone(),
        bx,
    };
    if let Demolition::Basic(b, transcript) = basic_demolition(&q) {
        if !transcript.steps.is_empty() {
            let sub_all = enumerate_buch_tableaux(&b.lambda, &b.mu, b.bx);
            let sub = build_on(&b.lambda, &b.mu, b.bx, &sub_all, may_swap)?;
            return sub.map(MatchingMethod::Demolition, |t| transcript.backward(t));
        }
    }
    if lambda.is_rectangle() && mu.is_rectangle() {
        let f = FirstInvolution::new(lambda, mu, bx, None)?;
        let (pairs, fixed) = pairs_of(all, |t| f.apply(t))?;
        return Ok(Matching {
            fixed,
            pairs,
            route: vec![MatchingMethod::FirstInvolution],
        });
    }
    if lambda.is_rectangle() {
        let r = reduce(lambda, mu, bx)?;
        if let Some(pb) = r.plain_box() {
            let f = FirstInvolution::new(lambda, mu, bx, Some(r.offset))?;
            let (mut pairs, survivors) = pairs_of(all, |t| f.apply(t))?;
            let sub_all = enumerate_buch_tableaux(&r.lambda, &r.mu, pb);
            if sub_all.len() != survivors.len() {
                return Err(Error::InvalidFilling(format!(
                    "reduction of {q} keeps {} of {} survivors",
                    sub_all.len(),
                    survivors.len()
                )));
            }
            let sub = build_on(&r.lambda, &r.mu, pb, &sub_all, true)?;
            let lifted = sub.map(MatchingMethod::Reduction, |t| r.backward(t))?;
            pairs.extend(lifted.pairs);
            return Ok(Matching {
                fixed: lifted.fixed,
                pairs,
                route: lifted.route,
            });
        }
    }
    if let Ok(case) = NearRectangleCase::new(lambda, mu, bx) {
        return case.matching(all);
    }
    if may_swap {
        let other = enumerate_buch_tableaux(mu, lambda, bx);
        if let Ok(sub) = build_on(mu, lambda, bx, &other, false) {
            return transport(&sub, &other, all);
        }
    }
    search_matching(all, bx).ok_or_else(|| Error::NotMultiplicityFreeCase(q.to_string()))
}

/// Perfect matching of all fillings but the lex-min one, along edges that
/// add a single value to a single box. Kuhn's augmenting paths.
pub fn search_matching(all: &[SetValuedFilling], bx: AmbientBox) -> Option<Matching> {
    let m = all.first()?;
    let index: HashMap<&SetValuedFilling, usize> = all.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); all.len()];
    for (i, t) in all.iter().enumerate() {
        for (r, row) in t.rows().iter().enumerate() {
            for (c, s) in row.iter().enumerate() {
                for v in 1..=bx.rows {
                    if s.contains(v) {
                        continue;
                    }
                    let mut rows = t.rows().to_vec();
                    rows[r][c] = s.with(v);
                    let Ok(u) = SetValuedFilling::new(t.shape().clone(), t.context().clone(), rows) else {
                        continue;
                    };
                    if let Some(&j) = index.get(&u) {
                        adj[i].push(j);
                        adj[j].push(i);
                    }
                }
            }
        }
    }
    let left: Vec<usize> = (1..all.len()).filter(|&i| all[i].extra().is_multiple_of(2)).collect();
    let right = (1..all.len()).filter(|&i| all[i].extra() % 2 == 1).count();
    if left.len() != right {
        return None;
    }
    let mut owner: Vec<Option<usize>> = vec![None; all.len()];
    fn augment(u: usize, adj: &[Vec<usize>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for &v in &adj[u] {
            if v == 0 || seen[v] {
                continue;
            }
            seen[v] = true;
            if owner[v].is_none_or(|w| augment(w, adj, seen, owner)) {
                owner[v] = Some(u);
                return true;
            }
        }
        false
    }
    for &u in &left {
        let mut seen = vec![false; all.len()];
        if !augment(u, &adj, &mut seen, &mut owner) {
            return None;
        }
    }
    let pairs = owner
        .iter()
        .enumerate()
        .filter_map(|(v, o)| o.map(|u| Matching::pair(all[u].clone(), all[v].clone())))
        .collect();
    Some(Matching {
        fixed: vec![m.clone()],
        pairs,
        route: vec![MatchingMethod::Search],
    })
}

/// Carries a matching of the commuted product across, matching fillings of
/// equal total content in order. Sizes are determined by total content, so
/// pairs stay sign-reversing.
fn transport(m: &Matching, from: &[SetValuedFilling], to: &[SetValuedFilling]) -> Result<Matching> {
    let a = by_total_content(from);
    let b = by_total_content(to);
    let mut map: HashMap<&SetValuedFilling, &SetValuedFilling> = HashMap::new();
    for (content, xs) in &a {
        let ys = b.get(content).map(Vec::as_slice).unwrap_or_default();
        if ys.len() != xs.len() {
            return Err(Error::InvalidFilling(format!(
                "content {content:?} has {} fillings one way and {} the other",
                xs.len(),
                ys.len()
            )));
        }
        map.extend(xs.iter().zip(ys));
    }
    m.map(MatchingMethod::Swapped, |t| {
        map.get(t)
            .map(|u| (*u).clone())
            .ok_or_else(|| Error::InvalidFilling(format!("{t:?} is not in the commuted product")))
    })
}
