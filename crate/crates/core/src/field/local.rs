//! Truncated Laurent series `x = sum_{l >= v} c_l p^l` over GF(q).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;

use super::gf::{Field, GfElement};
use crate::error::{Error, Result};

/// `|x|` as an exact power of q, or zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AbsValue {
    q: u32,
    /// `Some(e)` means `q^e`; `None` means the absolute value is 0.
    exponent: Option<i32>,
}

impl AbsValue {
    pub fn zero(q: u32) -> Self {
        AbsValue { q, exponent: None }
    }

    pub fn power(q: u32, exponent: i32) -> Self {
        AbsValue {
            q,
            exponent: Some(exponent),
        }
    }

    pub fn exponent(&self) -> Option<i32> {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.exponent.is_none()
    }

    pub fn to_f64(&self) -> f64 {
        match self.exponent {
            None => 0.0,
            Some(e) => (self.q as f64).powi(e),
        }
    }

    /// Product of two absolute values over the same q.
    pub fn times(&self, other: &AbsValue) -> AbsValue {
        match (self.exponent, other.exponent) {
            (Some(a), Some(b)) => AbsValue::power(self.q, a + b),
            _ => AbsValue::zero(self.q),
        }
    }
}

impl PartialOrd for AbsValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        (self.q == other.q).then(|| self.exponent.cmp(&other.exponent))
    }
}

/// An element of `GF(q)((p))` with coefficients dropped at exponents `>= precision`.
///
/// Canonical form: zero has no coefficients; otherwise the first and last
/// stored coefficients are nonzero.
#[derive(Clone)]
pub struct LocalFieldElement {
    field: Field,
    valuation: i32,
    coeffs: Vec<u32>,
    precision: i32,
}

impl LocalFieldElement {
    pub fn zero(field: &Field, precision: i32) -> Self {
        LocalFieldElement {
            field: field.clone(),
            valuation: precision,
            coeffs: Vec::new(),
            precision,
        }
    }

    /// `coeff * p^exponent` with `coeff` a packed GF(q) index.
    pub fn monomial(field: &Field, coeff: u32, exponent: i32, precision: i32) -> Self {
        Self::from_terms(field, &[(exponent, coeff)], precision)
    }

    /// `p^exponent`.
    pub fn prime_power(field: &Field, exponent: i32, precision: i32) -> Self {
        Self::monomial(field, 1, exponent, precision)
    }

    /// Sum of `(exponent, packed coefficient)` terms. Repeated exponents add.
    pub fn from_terms(field: &Field, terms: &[(i32, u32)], precision: i32) -> Self {
        let kept: Vec<_> = terms
            .iter()
            .filter(|(e, c)| *e < precision && *c != 0)
            .collect();
        let Some(lo) = kept.iter().map(|(e, _)| *e).min() else {
            return Self::zero(field, precision);
        };
        let hi = kept.iter().map(|(e, _)| *e).max().unwrap();
        let mut coeffs = vec![0u32; (hi - lo + 1) as usize];
        for &&(e, c) in &kept {
            assert!(c < field.q(), "coefficient {c} not in GF({})", field.q());
            let slot = &mut coeffs[(e - lo) as usize];
            *slot = field.add_raw(*slot, c);
        }
        Self::normalized(field.clone(), lo, coeffs, precision)
    }

    fn normalized(field: Field, mut valuation: i32, mut coeffs: Vec<u32>, precision: i32) -> Self {
        let keep = (precision - valuation).max(0) as usize;
        coeffs.truncate(keep);
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        let lead = coeffs.iter().take_while(|&&c| c == 0).count();
        coeffs.drain(..lead);
        valuation += lead as i32;
        if coeffs.is_empty() {
            valuation = precision;
        }
        LocalFieldElement {
            field,
            valuation,
            coeffs,
            precision,
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn precision(&self) -> i32 {
        self.precision
    }

    pub fn with_precision(&self, precision: i32) -> Self {
        Self::normalized(
            self.field.clone(),
            self.valuation,
            self.coeffs.clone(),
            precision,
        )
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Exponent of the lowest nonzero coefficient; `None` for zero.
    pub fn valuation(&self) -> Option<i32> {
        (!self.is_zero()).then_some(self.valuation)
    }

    /// Highest exponent carrying a nonzero coefficient.
    pub fn top_exponent(&self) -> Option<i32> {
        (!self.is_zero()).then(|| self.valuation + self.coeffs.len() as i32 - 1)
    }

    /// Packed coefficient at `p^exponent`.
    #[inline]
    pub fn coeff(&self, exponent: i32) -> u32 {
        let i = exponent - self.valuation;
        if i < 0 || i as usize >= self.coeffs.len() {
            0
        } else {
            self.coeffs[i as usize]
        }
    }

    pub fn coefficient(&self, exponent: i32) -> GfElement {
        GfElement::new(&self.field, self.coeff(exponent)).expect("stored coefficient is valid")
    }

    /// Nonzero `(exponent, packed coefficient)` pairs in increasing exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (i32, u32)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(move |(i, &c)| (self.valuation + i as i32, c))
    }

    pub fn abs(&self) -> AbsValue {
        match self.valuation() {
            None => AbsValue::zero(self.field.q()),
            Some(v) => AbsValue::power(self.field.q(), -v),
        }
    }

    fn same_field(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.field, &other.field) || self.field == other.field {
            Ok(())
        } else {
            Err(Error::FieldMismatch)
        }
    }

    /// Coefficientwise sum; the result keeps the smaller of the two precisions.
    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.same_field(other)?;
        let precision = self.precision.min(other.precision);
        if self.is_zero() {
            return Ok(other.with_precision(precision));
        }
        if other.is_zero() {
            return Ok(self.with_precision(precision));
        }
        let lo = self.valuation.min(other.valuation);
        let hi = self
            .top_exponent()
            .unwrap()
            .max(other.top_exponent().unwrap());
        let coeffs = (lo..=hi)
            .map(|e| self.field.add_raw(self.coeff(e), other.coeff(e)))
            .collect();
        Ok(Self::normalized(self.field.clone(), lo, coeffs, precision))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.checked_add(&other.negated())
    }

    pub fn negated(&self) -> Self {
        LocalFieldElement {
            field: self.field.clone(),
            valuation: self.valuation,
            coeffs: self.coeffs.iter().map(|&c| self.field.neg_raw(c)).collect(),
            precision: self.precision,
        }
    }

    /// Laurent-series product, truncated at the smaller precision. The
    /// valuation is additive unless truncation removes every term.
    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.same_field(other)?;
        let precision = self.precision.min(other.precision);
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(&self.field, precision));
        }
        let lo = self.valuation + other.valuation;
        let len =
            (self.coeffs.len() + other.coeffs.len() - 1).min((precision - lo).max(0) as usize);
        let mut coeffs = vec![0u32; len];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 || i >= len {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                let prod = self.field.mul_raw(a, b);
                coeffs[i + j] = self.field.add_raw(coeffs[i + j], prod);
            }
        }
        Ok(Self::normalized(self.field.clone(), lo, coeffs, precision))
    }

    /// Single coefficient of `self * other` at `p^exponent`, without forming
    /// the whole product. Ignores truncation.
    pub fn product_coeff(&self, other: &Self, exponent: i32) -> u32 {
        let mut acc = 0u32;
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            let b = other.coeff(exponent - self.valuation - i as i32);
            if b != 0 {
                acc = self.field.add_raw(acc, self.field.mul_raw(a, b));
            }
        }
        acc
    }

    /// The integer `t` in `[0, p)` with `chi(x) = exp(2 pi i t / p)`: the
    /// ζ_0-coordinate of the coefficient of `p^-1`.
    pub fn chi_exponent(&self) -> u32 {
        self.field.trace_raw(self.coeff(-1))
    }

    pub fn chi(&self) -> Complex64 {
        self.field.root(self.chi_exponent())
    }

    /// `n` with `u(n) = self`, if `self` has only negative exponents.
    pub fn u_index(&self) -> Option<u64> {
        if self.is_zero() {
            return Some(0);
        }
        if self.top_exponent().unwrap() >= 0 {
            return None;
        }
        let q = self.field.q() as u64;
        let mut n = 0u64;
        for e in self.valuation..0 {
            // exponent -(i+1) carries base-q digit i
            n = n.checked_mul(q)?.checked_add(self.coeff(e) as u64)?;
        }
        Some(n)
    }
}

impl PartialEq for LocalFieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.same_field(other).is_ok()
            && self.coeffs == other.coeffs
            && (self.is_zero() || self.valuation == other.valuation)
    }
}

impl Eq for LocalFieldElement {}

impl fmt::Debug for LocalFieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LocalFieldElement({self})")
    }
}

impl Add for &LocalFieldElement {
    type Output = LocalFieldElement;
    fn add(self, rhs: Self) -> LocalFieldElement {
        self.checked_add(rhs)
            .expect("operands from different fields")
    }
}

impl Sub for &LocalFieldElement {
    type Output = LocalFieldElement;
    fn sub(self, rhs: Self) -> LocalFieldElement {
        self.checked_sub(rhs)
            .expect("operands from different fields")
    }
}

impl Mul for &LocalFieldElement {
    type Output = LocalFieldElement;
    fn mul(self, rhs: Self) -> LocalFieldElement {
        self.checked_mul(rhs)
            .expect("operands from different fields")
    }
}

impl Neg for &LocalFieldElement {
    type Output = LocalFieldElement;
    fn neg(self) -> LocalFieldElement {
        self.negated()
    }
}

/// The coset representative `u(n)`: with `n = sum b_i q^i`,
/// `u(n) = sum_i u(b_i) p^-i` and `u(b) = b p^-1` for a single digit `b`.
pub fn u(field: &Field, n: u64, precision: i32) -> LocalFieldElement {
    let q = field.q() as u64;
    let mut terms = Vec::new();
    let mut rest = n;
    let mut exponent = -1;
    while rest > 0 {
        terms.push((exponent, (rest % q) as u32));
        rest /= q;
        exponent -= 1;
    }
    LocalFieldElement::from_terms(field, &terms, precision)
}

/// The index `m` with `u(m) = u(l) + u(k)`.
pub fn u_index_add(field: &Field, l: u64, k: u64) -> u64 {
    let q = field.q() as u64;
    let (mut a, mut b) = (l, k);
    let mut out = 0u64;
    let mut place = 1u64;
    while a > 0 || b > 0 {
        let digit = field.add_raw((a % q) as u32, (b % q) as u32) as u64;
        out += digit * place;
        a /= q;
        b /= q;
        place = place.saturating_mul(q);
    }
    out
}

/// `chi_xi(x) = chi(xi * x)`.
pub fn chi_pair(xi: &LocalFieldElement, x: &LocalFieldElement) -> Complex64 {
    assert!(
        xi.same_field(x).is_ok(),
        "chi_pair operands from different fields"
    );
    let t = xi.field.trace_raw(xi.product_coeff(x, -1));
    xi.field.root(t)
}
