//! Exact sparse polynomials, Schur and Grothendieck polynomials, and the
//! Buch product expansion.
//!
//! The polynomial side is deliberately independent of the tableau
//! enumeration in [`crate::svt`]: it expands each `g_lambda` from its own
//! semistandard set-valued tableaux and recovers product coefficients by
//! triangular elimination, which gives a second route to every coefficient
//! that [`buch_product`] computes combinatorially.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::{AmbientBox, Partition};
use crate::svt::enumerate_buch_tableaux;

pub const MAX_VARS: usize = 16;

/// Exponent vector; ordering is lexicographic on `(e_1, e_2, ..)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial([u8; MAX_VARS]);

impl Monomial {
    pub fn one() -> Self {
        Monomial([0; MAX_VARS])
    }

    pub fn from_exponents(e: &[u8]) -> Self {
        assert!(e.len() <= MAX_VARS, "too many variables");
        let mut m = [0u8; MAX_VARS];
        m[..e.len()].copy_from_slice(e);
        Monomial(m)
    }

    pub fn exponents(&self, nvars: usize) -> &[u8] {
        &self.0[..nvars]
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    fn checked_mul(&self, other: &Monomial) -> Result<Monomial> {
        let mut m = [0u8; MAX_VARS];
        for i in 0..MAX_VARS {
            m[i] = self.0[i].checked_add(other.0[i]).ok_or(Error::Overflow)?;
        }
        Ok(Monomial(m))
    }

    fn swapped(&self, i: usize) -> Monomial {
        let mut m = self.0;
        m.swap(i, i + 1);
        Monomial(m)
    }

    fn bump(&mut self, var: usize) {
        self.0[var] += 1;
    }

    fn as_partition(&self) -> Option<Partition> {
        Partition::new(self.0.iter().map(|&e| e as u32).collect::<Vec<_>>()).ok()
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let last = self.0.iter().rposition(|&e| e != 0).map_or(0, |i| i + 1);
        write!(f, "x^{:?}", &self.0[..last])
    }
}

/// Multivariate polynomial with exact integer coefficients and no stored zeros.
#[derive(Clone, PartialEq, Eq)]
pub struct SparsePolynomial {
    nvars: usize,
    terms: BTreeMap<Monomial, i64>,
}

impl SparsePolynomial {
    pub fn zero(nvars: usize) -> Self {
        assert!(nvars <= MAX_VARS, "at most {MAX_VARS} variables");
        SparsePolynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(nvars: usize) -> Self {
        let mut p = Self::zero(nvars);
        p.terms.insert(Monomial::one(), 1);
        p
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs.
    pub fn from_terms(nvars: usize, terms: &[(&[u8], i64)]) -> Result<Self> {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(Error::InvalidCase(format!("exponent vector {e:?} has wrong arity")));
            }
            p.add_term(Monomial::from_exponents(e), *c)?;
        }
        Ok(p)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &i64)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> i64 {
        self.terms.get(m).copied().unwrap_or(0)
    }

    pub fn add_term(&mut self, m: Monomial, c: i64) -> Result<()> {
        if c == 0 {
            return Ok(());
        }
        let slot = self.terms.entry(m).or_insert(0);
        *slot = slot.checked_add(c).ok_or(Error::Overflow)?;
        if *slot == 0 {
            self.terms.remove(&m);
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_arity(other)?;
        let mut out = self.clone();
        for (m, &c) in &other.terms {
            out.add_term(*m, c)?;
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_arity(other)?;
        let mut out = self.clone();
        for (m, &c) in &other.terms {
            out.add_term(*m, c.checked_neg().ok_or(Error::Overflow)?)?;
        }
        Ok(out)
    }

    pub fn checked_scale(&self, k: i64) -> Result<Self> {
        let mut out = Self::zero(self.nvars);
        for (m, &c) in &self.terms {
            out.add_term(*m, c.checked_mul(k).ok_or(Error::Overflow)?)?;
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_arity(other)?;
        let mut acc: HashMap<Monomial, i64> = HashMap::with_capacity(self.len() * 4);
        for (a, &ca) in &self.terms {
            for (b, &cb) in &other.terms {
                let m = a.checked_mul(b)?;
                let c = ca.checked_mul(cb).ok_or(Error::Overflow)?;
                let slot = acc.entry(m).or_insert(0);
                *slot = slot.checked_add(c).ok_or(Error::Overflow)?;
            }
        }
        Ok(SparsePolynomial {
            nvars: self.nvars,
            terms: acc.into_iter().filter(|&(_, c)| c != 0).collect(),
        })
    }

    fn check_arity(&self, other: &Self) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::InvalidCase(format!(
                "variable counts differ: {} vs {}",
                self.nvars, other.nvars
            )));
        }
        Ok(())
    }

    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.degree()).min()
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.degree()).max()
    }

    pub fn homogeneous_component(&self, degree: u32) -> Self {
        SparsePolynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == degree)
                .map(|(m, c)| (*m, *c))
                .collect(),
        }
    }

    /// Image under the transposition of variables `i` and `i + 1` (0-based).
    pub fn swap_variables(&self, i: usize) -> Self {
        SparsePolynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.swapped(i), *c)).collect(),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.nvars.saturating_sub(1)).all(|i| self.swap_variables(i) == *self)
    }
}

impl fmt::Debug for SparsePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}*{m:?}")?;
        }
        Ok(())
    }
}

impl std::ops::Mul for &SparsePolynomial {
    type Output = SparsePolynomial;

    /// Panics on overflow; use [`SparsePolynomial::checked_mul`] to recover.
    fn mul(self, rhs: &SparsePolynomial) -> SparsePolynomial {
        self.checked_mul(rhs).expect("polynomial multiplication overflowed")
    }
}

/// Walks every semistandard set-valued tableau of `shape` with entries at
/// most `nvars`, row by row, reporting each monomial with `|T| - |shape|`.
fn for_each_svt(shape: &Partition, nvars: usize, set_valued: bool, mut f: impl FnMut(Monomial, u32)) {
    let cells: Vec<(usize, usize)> = shape
        .parts()
        .iter()
        .enumerate()
        .flat_map(|(i, &p)| (0..p as usize).map(move |j| (i, j)))
        .collect();
    // (min, max) of each placed box
    let mut placed: Vec<Vec<(u32, u32)>> = shape
        .parts()
        .iter()
        .map(|&p| vec![(0, 0); p as usize])
        .collect();

    #[allow(clippy::too_many_arguments)]
    fn rec(
        k: usize,
        cells: &[(usize, usize)],
        placed: &mut Vec<Vec<(u32, u32)>>,
        nvars: u32,
        set_valued: bool,
        mono: Monomial,
        extra: u32,
        f: &mut dyn FnMut(Monomial, u32),
    ) {
        let Some(&(i, j)) = cells.get(k) else {
            f(mono, extra);
            return;
        };
        let mut lo = 1;
        if j > 0 {
            lo = lo.max(placed[i][j - 1].1);
        }
        if i > 0 {
            lo = lo.max(placed[i - 1][j].1 + 1);
        }
        if lo > nvars {
            return;
        }
        let width = nvars - lo + 1;
        for mask in 1u32..(1 << width) {
            if !set_valued && mask.count_ones() != 1 {
                continue;
            }
            let min = lo + mask.trailing_zeros();
            let max = lo + 31 - mask.leading_zeros();
            let mut m = mono;
            for b in 0..width {
                if mask & (1 << b) != 0 {
                    m.bump((lo + b - 1) as usize);
                }
            }
            placed[i][j] = (min, max);
            rec(k + 1, cells, placed, nvars, set_valued, m, extra + mask.count_ones() - 1, f);
        }
    }

    rec(
        0,
        &cells,
        &mut placed,
        nvars as u32,
        set_valued,
        Monomial::one(),
        0,
        &mut f,
    );
}

/// The Grothendieck polynomial `g_lambda(x_1, .., x_nvars)`.
pub fn expand_g(lambda: &Partition, nvars: usize) -> SparsePolynomial {
    let mut p = SparsePolynomial::zero(nvars);
    if lambda.len() > nvars {
        return p;
    }
    let mut acc: HashMap<Monomial, i64> = HashMap::new();
    for_each_svt(lambda, nvars, true, |m, extra| {
        *acc.entry(m).or_insert(0) += if extra % 2 == 0 { 1 } else { -1 };
    });
    p.terms = acc.into_iter().filter(|&(_, c)| c != 0).collect();
    p
}

/// The Schur polynomial `s_lambda(x_1, .., x_nvars)`.
pub fn expand_s(lambda: &Partition, nvars: usize) -> SparsePolynomial {
    let mut p = SparsePolynomial::zero(nvars);
    if lambda.len() > nvars {
        return p;
    }
    let mut acc: HashMap<Monomial, i64> = HashMap::new();
    for_each_svt(lambda, nvars, false, |m, _| {
        *acc.entry(m).or_insert(0) += 1;
    });
    p.terms = acc.into_iter().collect();
    p
}

/// Coefficients of a symmetric polynomial in the basis `{g_nu : l(nu) <= nvars}`.
///
/// Repeatedly takes the lexicographically greatest monomial of lowest total
/// degree, which is `x^nu` for the next basis element `g_nu`, and subtracts
/// the matching multiple of `g_nu`.
pub fn to_g_basis(p: &SparsePolynomial) -> Result<BTreeMap<Partition, i64>> {
    to_basis(p, expand_g)
}

/// Same elimination against Schur polynomials.
pub fn to_s_basis(p: &SparsePolynomial) -> Result<BTreeMap<Partition, i64>> {
    to_basis(p, expand_s)
}

fn to_basis(
    p: &SparsePolynomial,
    basis: fn(&Partition, usize) -> SparsePolynomial,
) -> Result<BTreeMap<Partition, i64>> {
    if !p.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let mut rest = p.clone();
    let mut out = BTreeMap::new();
    while let Some(d) = rest.min_degree() {
        let (lead, &c) = rest
            .terms
            .iter()
            .rev()
            .find(|(m, _)| m.degree() == d)
            .expect("a term of minimal degree");
        let nu = lead.as_partition().ok_or(Error::NotInSpan)?;
        let g = basis(&nu, p.nvars);
        if g.coeff(lead) != 1 {
            return Err(Error::NotInSpan);
        }
        rest = rest.checked_sub(&g.checked_scale(c)?)?;
        out.insert(nu, c);
    }
    Ok(out)
}

/// Signed expansion `g_lambda * g_mu = sum c'(nu) g_nu` restricted to a box.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GBasisExpansion {
    pub lambda: Partition,
    pub mu: Partition,
    pub bx: AmbientBox,
    pub coeffs: BTreeMap<Partition, i64>,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    nu: Partition,
    coeff: i64,
}

#[derive(Serialize, Deserialize)]
struct ExpansionJson {
    terms: Vec<TermJson>,
}

/// Sort order for expansions: `|nu|` ascending, then lexicographically
/// descending within a degree.
pub fn expansion_order(a: &Partition, b: &Partition) -> std::cmp::Ordering {
    a.size().cmp(&b.size()).then_with(|| b.cmp(a))
}

impl GBasisExpansion {
    /// Terms in [`expansion_order`].
    pub fn sorted_terms(&self) -> Vec<(&Partition, i64)> {
        let mut v: Vec<_> = self.coeffs.iter().map(|(p, &c)| (p, c)).collect();
        v.sort_by(|a, b| expansion_order(a.0, b.0));
        v
    }

    pub fn to_json(&self) -> String {
        let terms = self
            .sorted_terms()
            .into_iter()
            .map(|(nu, coeff)| TermJson {
                nu: nu.clone(),
                coeff,
            })
            .collect();
        serde_json::to_string(&ExpansionJson { terms }).expect("serializable")
    }

    /// Buch's alternation: `sign c'(nu) = (-1)^(|nu| - |lambda| - |mu|)`.
    pub fn signs_alternate(&self) -> bool {
        let base = self.lambda.size() + self.mu.size();
        self.coeffs.iter().all(|(nu, &c)| {
            c == 0 || nu.size() < base || ((c > 0) == (nu.size() - base).is_multiple_of(2))
        })
    }

    pub fn coeff(&self, nu: &Partition) -> i64 {
        self.coeffs.get(nu).copied().unwrap_or(0)
    }
}

/// Coefficients from Buch's rule: signed counts of fillings by content.
pub fn buch_product(lambda: &Partition, mu: &Partition, bx: AmbientBox) -> GBasisExpansion {
    let base = lambda.size() + mu.size();
    let mut coeffs: BTreeMap<Partition, i64> = BTreeMap::new();
    for t in enumerate_buch_tableaux(lambda, mu, bx) {
        let nu = t
            .content(true)
            .as_partition()
            .expect("lattice words have partition content");
        let sign = if (nu.size() - base).is_multiple_of(2) { 1 } else { -1 };
        *coeffs.entry(nu).or_insert(0) += sign;
    }
    let e = GBasisExpansion {
        lambda: lambda.clone(),
        mu: mu.clone(),
        bx,
        coeffs,
    };
    assert!(e.signs_alternate(), "sign alternation failed for {lambda} x {mu}");
    e
}

/// Classical Littlewood–Richardson coefficients in the box: the
/// degree-preserving part of [`buch_product`].
pub fn lr_product(lambda: &Partition, mu: &Partition, bx: AmbientBox) -> BTreeMap<Partition, u64> {
    let base = lambda.size() + mu.size();
    buch_product(lambda, mu, bx)
        .coeffs
        .into_iter()
        .filter(|(nu, _)| nu.size() == base)
        .map(|(nu, c)| (nu, c as u64))
        .collect()
}

/// The polynomial route to the boxed product: expand both factors in
/// `l(lambda) + l(mu)` variables, multiply, eliminate, and keep the `nu`
/// that fit in the box.
pub fn oracle_product(lambda: &Partition, mu: &Partition, bx: AmbientBox) -> Result<BTreeMap<Partition, i64>> {
    let nvars = (lambda.len() + mu.len()).max(1);
    let prod = expand_g(lambda, nvars).checked_mul(&expand_g(mu, nvars))?;
    Ok(to_g_basis(&prod)?
        .into_iter()
        .filter(|(nu, _)| nu.fits_in_box(bx))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::part;

    fn poly(nvars: usize, terms: &[(&[u8], i64)]) -> SparsePolynomial {
        SparsePolynomial::from_terms(nvars, terms).unwrap()
    }

    #[test]
    fn g_box_in_two_variables() {
        let want = poly(2, &[(&[1, 0], 1), (&[0, 1], 1), (&[1, 1], -1)]);
        assert_eq!(expand_g(&part(&[1]), 2), want);
    }

    #[test]
    fn g_column_too_long_vanishes() {
        assert!(expand_g(&part(&[1, 1, 1]), 2).is_zero());
    }

    #[test]
    fn g_row_of_two() {
        // hand enumeration of set-valued fillings of (2) with entries in {1,2}:
        // [1,1] [1,2] [2,2] [1,12] [12,2]; [12,12] breaks the row condition
        let want = poly(
            2,
            &[
                (&[2, 0], 1),
                (&[1, 1], 1),
                (&[0, 2], 1),
                (&[2, 1], -1),
                (&[1, 2], -1),
            ],
        );
        assert_eq!(expand_g(&part(&[2]), 2), want);
    }

    #[test]
    fn schur_examples() {
        assert_eq!(expand_s(&part(&[1]), 2), poly(2, &[(&[1, 0], 1), (&[0, 1], 1)]));
        assert_eq!(
            expand_s(&part(&[2, 1]), 2),
            poly(2, &[(&[2, 1], 1), (&[1, 2], 1)])
        );
        assert_eq!(expand_s(&Partition::empty(), 3), SparsePolynomial::one(3));
    }

    #[test]
    fn basis_round_trip_and_g1_squared() {
        let g21 = expand_g(&part(&[2, 1]), 3);
        assert_eq!(to_g_basis(&g21).unwrap(), BTreeMap::from([(part(&[2, 1]), 1)]));

        let g1 = expand_g(&part(&[1]), 2);
        let sq = &g1 * &g1;
        assert_eq!(
            to_g_basis(&sq).unwrap(),
            BTreeMap::from([(part(&[2]), 1), (part(&[1, 1]), 1), (part(&[2, 1]), -1)])
        );

        let s1 = expand_s(&part(&[1]), 2);
        assert_eq!(
            to_s_basis(&(&s1 * &s1)).unwrap(),
            BTreeMap::from([(part(&[2]), 1), (part(&[1, 1]), 1)])
        );
    }

    #[test]
    fn basis_errors() {
        let p = poly(2, &[(&[1, 0], 1)]);
        assert_eq!(to_g_basis(&p), Err(Error::NotSymmetric));
    }

    #[test]
    fn overflow_is_reported() {
        let p = poly(1, &[(&[1], i64::MAX)]);
        let q = poly(1, &[(&[1], 2)]);
        assert_eq!(p.checked_mul(&q), Err(Error::Overflow));
        assert_eq!(p.checked_add(&p), Err(Error::Overflow));
    }

    #[test]
    fn symmetry_and_lowest_degree() {
        for lambda in crate::partition::partitions_up_to(4, AmbientBox::new(3, 3).unwrap()) {
            for m in 1..=3 {
                let g = expand_g(&lambda, m);
                assert!(g.is_symmetric(), "g{lambda} in {m} vars");
                let low = g.homogeneous_component(lambda.size());
                assert_eq!(low, expand_s(&lambda, m), "lowest part of g{lambda}");
            }
        }
    }

    #[test]
    fn buch_product_examples() {
        let b = |r, c| AmbientBox::new(r, c).unwrap();
        let e = buch_product(&part(&[1]), &part(&[1]), b(2, 2));
        assert_eq!(
            e.coeffs,
            BTreeMap::from([(part(&[2]), 1), (part(&[1, 1]), 1), (part(&[2, 1]), -1)])
        );
        let e = buch_product(&part(&[2, 2]), &part(&[2, 2]), b(4, 3));
        assert_eq!(
            e.coeffs,
            BTreeMap::from([
                (part(&[3, 3, 1, 1]), 1),
                (part(&[3, 2, 2, 1]), 1),
                (part(&[2, 2, 2, 2]), 1),
                (part(&[3, 3, 2, 1]), -1),
                (part(&[3, 2, 2, 2]), -1),
            ])
        );
        let e = buch_product(&Partition::empty(), &part(&[2, 1]), b(3, 3));
        assert_eq!(e.coeffs, BTreeMap::from([(part(&[2, 1]), 1)]));
    }

    #[test]
    fn lr_product_examples() {
        let b = |r, c| AmbientBox::new(r, c).unwrap();
        assert_eq!(
            lr_product(&part(&[1]), &part(&[1]), b(2, 2)),
            BTreeMap::from([(part(&[2]), 1), (part(&[1, 1]), 1)])
        );
        assert_eq!(
            lr_product(&part(&[2, 2]), &part(&[2, 2]), b(4, 3)),
            BTreeMap::from([
                (part(&[3, 3, 1, 1]), 1),
                (part(&[3, 2, 2, 1]), 1),
                (part(&[2, 2, 2, 2]), 1)
            ])
        );
        let lr = lr_product(&part(&[2, 1]), &part(&[2, 1]), b(6, 6));
        assert_eq!(lr[&part(&[3, 2, 1])], 2);
    }

    #[test]
    fn json_terms_sorted() {
        let e = buch_product(&part(&[1]), &part(&[1]), AmbientBox::new(2, 2).unwrap());
        assert_eq!(
            e.to_json(),
            r#"{"terms":[{"nu":[2],"coeff":1},{"nu":[1,1],"coeff":1},{"nu":[2,1],"coeff":-1}]}"#
        );
    }
}
