//! Arithmetic in GF(q), q = p^c, in the polynomial basis {1, t, ..., t^(c-1)}.
//!
//! An element is stored as its packed index `a_0 + a_1 p + ... + a_{c-1} p^{c-1}`,
//! where `a_i` is the coordinate on `t^i`. The packing is the same digit
//! expansion the `u(n)` enumeration uses for `0 <= n < q`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest supported field order; multiplication is tabulated.
pub const MAX_ORDER: u32 = 1024;

/// Shared handle to a finite field. Every element carries one.
pub type Field = Arc<FieldParams>;

/// Parameters and lookup tables of GF(p^c).
#[derive(Debug, Clone)]
pub struct FieldParams {
    p: u32,
    c: u32,
    q: u32,
    /// Monic modulus, coefficients from constant term upwards (length c + 1).
    modulus: Vec<u32>,
    add: Vec<u32>,
    mul: Vec<u32>,
    neg: Vec<u32>,
    inv: Vec<u32>,
    roots: Vec<Complex64>,
}

impl PartialEq for FieldParams {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.c == other.c && self.modulus == other.modulus
    }
}

impl Eq for FieldParams {}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn unpack(mut v: u32, p: u32, len: usize) -> Vec<u32> {
    let mut out = vec![0; len];
    for slot in out.iter_mut() {
        *slot = v % p;
        v /= p;
    }
    out
}

fn pack(digits: &[u32], p: u32) -> u32 {
    digits.iter().rev().fold(0, |acc, &d| acc * p + d)
}

/// Remainder of `num` modulo the monic `den` over GF(p). Both low-to-high.
fn poly_rem(num: &[u32], den: &[u32], p: u32) -> Vec<u32> {
    let mut r = num.to_vec();
    let dd = den.len() - 1;
    while r.len() > dd {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - dd;
        if lead != 0 {
            for (i, &dc) in den.iter().enumerate() {
                let idx = shift + i;
                r[idx] = (r[idx] + p - (lead * dc) % p) % p;
            }
        }
        r.pop();
    }
    r
}

fn is_irreducible(poly: &[u32], p: u32) -> bool {
    let deg = poly.len() - 1;
    if deg <= 1 {
        return true;
    }
    // trial division by every monic polynomial of degree 1..=deg/2
    for d in 1..=deg / 2 {
        let count = p.pow(d as u32);
        for low in 0..count {
            let mut div = unpack(low, p, d);
            div.push(1);
            if poly_rem(poly, &div, p).iter().all(|&x| x == 0) {
                return false;
            }
        }
    }
    true
}

/// The lexicographically least monic irreducible polynomial of degree `c`
/// over GF(p), ordering candidates by their packed lower coefficients.
pub fn default_modulus(p: u32, c: u32) -> Vec<u32> {
    let count = p.pow(c);
    for low in 0..count {
        let mut poly = unpack(low, p, c as usize);
        poly.push(1);
        if is_irreducible(&poly, p) {
            return poly;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

impl FieldParams {
    /// GF(p^c) with the default modulus.
    pub fn new(p: u32, c: u32) -> Result<Field> {
        if !is_prime(p) {
            return Err(Error::InvalidField(format!("p = {p} is not prime")));
        }
        if c == 0 {
            return Err(Error::InvalidField(
                "extension degree c must be >= 1".into(),
            ));
        }
        Self::with_modulus(p, c, default_modulus(p, c))
    }

    /// GF(p^c) defined by an explicit monic modulus (constant term first).
    pub fn with_modulus(p: u32, c: u32, modulus: Vec<u32>) -> Result<Field> {
        if !is_prime(p) {
            return Err(Error::InvalidField(format!("p = {p} is not prime")));
        }
        if c == 0 {
            return Err(Error::InvalidField(
                "extension degree c must be >= 1".into(),
            ));
        }
        let q = p
            .checked_pow(c)
            .filter(|&q| q <= MAX_ORDER)
            .ok_or_else(|| Error::InvalidField(format!("q = {p}^{c} exceeds {MAX_ORDER}")))?;
        if modulus.len() != c as usize + 1 {
            return Err(Error::InvalidField(format!(
                "modulus must have {} coefficients, got {}",
                c + 1,
                modulus.len()
            )));
        }
        if let Some(bad) = modulus.iter().find(|&&a| a >= p) {
            return Err(Error::InvalidField(format!(
                "modulus coefficient {bad} not in [0, {p})"
            )));
        }
        if modulus[c as usize] != 1 {
            return Err(Error::InvalidField("modulus must be monic".into()));
        }
        if !is_irreducible(&modulus, p) {
            return Err(Error::InvalidField(format!(
                "modulus {modulus:?} is reducible over GF({p})"
            )));
        }

        let n = q as usize;
        let cl = c as usize;
        let digits: Vec<Vec<u32>> = (0..q).map(|v| unpack(v, p, cl)).collect();
        let mut add = vec![0; n * n];
        let mut mul = vec![0; n * n];
        for x in 0..n {
            for y in 0..n {
                let s: Vec<u32> = digits[x]
                    .iter()
                    .zip(&digits[y])
                    .map(|(a, b)| (a + b) % p)
                    .collect();
                add[x * n + y] = pack(&s, p);

                let mut prod = vec![0u32; 2 * cl - 1];
                for (i, a) in digits[x].iter().enumerate() {
                    for (j, b) in digits[y].iter().enumerate() {
                        prod[i + j] = (prod[i + j] + a * b) % p;
                    }
                }
                let r = poly_rem(&prod, &modulus, p);
                let mut r = r;
                r.resize(cl, 0);
                mul[x * n + y] = pack(&r, p);
            }
        }
        let neg = (0..n)
            .map(|x| {
                pack(
                    &digits[x].iter().map(|a| (p - a) % p).collect::<Vec<_>>(),
                    p,
                )
            })
            .collect();
        let mut inv = vec![0; n];
        for x in 1..n {
            inv[x] = (1..n).find(|&y| mul[x * n + y] == 1).unwrap() as u32;
        }
        let roots = (0..p).map(|t| root_of_unity(t, p)).collect();

        Ok(Arc::new(FieldParams {
            p,
            c,
            q,
            modulus,
            add,
            mul,
            neg,
            inv,
            roots,
        }))
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn c(&self) -> u32 {
        self.c
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    #[inline]
    pub(crate) fn add_raw(&self, x: u32, y: u32) -> u32 {
        self.add[(x * self.q + y) as usize]
    }

    #[inline]
    pub(crate) fn mul_raw(&self, x: u32, y: u32) -> u32 {
        self.mul[(x * self.q + y) as usize]
    }

    #[inline]
    pub(crate) fn neg_raw(&self, x: u32) -> u32 {
        self.neg[x as usize]
    }

    /// Coordinate of a packed element on `zeta_0 = 1`.
    #[inline]
    pub(crate) fn trace_raw(&self, x: u32) -> u32 {
        x % self.p
    }

    /// `exp(2 pi i t / p)`; exact for t = 0 and for p = 2.
    #[inline]
    pub fn root(&self, t: u32) -> Complex64 {
        self.roots[(t % self.p) as usize]
    }
}

fn root_of_unity(t: u32, p: u32) -> Complex64 {
    if t == 0 {
        Complex64::new(1.0, 0.0)
    } else if 2 * t == p {
        Complex64::new(-1.0, 0.0)
    } else {
        Complex64::from_polar(1.0, std::f64::consts::TAU * t as f64 / p as f64)
    }
}

/// An element of GF(q) tied to its field.
#[derive(Clone, PartialEq, Eq)]
pub struct GfElement {
    field: Field,
    value: u32,
}

impl GfElement {
    pub fn new(field: &Field, value: u32) -> Result<Self> {
        if value >= field.q {
            return Err(Error::InvalidField(format!(
                "element index {value} not in [0, {})",
                field.q
            )));
        }
        Ok(GfElement {
            field: field.clone(),
            value,
        })
    }

    /// Element with the given ζ-coordinates `a_0, ..., a_{c-1}`.
    pub fn from_coeffs(field: &Field, coeffs: &[u32]) -> Result<Self> {
        if coeffs.len() != field.c as usize {
            return Err(Error::InvalidField(format!(
                "expected {} coordinates, got {}",
                field.c,
                coeffs.len()
            )));
        }
        if let Some(bad) = coeffs.iter().find(|&&a| a >= field.p) {
            return Err(Error::InvalidField(format!(
                "coordinate {bad} not in [0, {})",
                field.p
            )));
        }
        Ok(GfElement {
            field: field.clone(),
            value: pack(coeffs, field.p),
        })
    }

    pub fn zero(field: &Field) -> Self {
        GfElement {
            field: field.clone(),
            value: 0,
        }
    }

    pub fn one(field: &Field) -> Self {
        GfElement {
            field: field.clone(),
            value: 1,
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    /// Packed index in `[0, q)`.
    pub fn value(&self) -> u32 {
        self.value
    }

    pub fn coeffs(&self) -> Vec<u32> {
        unpack(self.value, self.field.p, self.field.c as usize)
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn check(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.field, &other.field) || self.field == other.field {
            Ok(())
        } else {
            Err(Error::FieldMismatch)
        }
    }

    pub fn neg(&self) -> Self {
        GfElement {
            field: self.field.clone(),
            value: self.field.neg_raw(self.value),
        }
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inverse(&self) -> Option<Self> {
        (self.value != 0).then(|| GfElement {
            field: self.field.clone(),
            value: self.field.inv[self.value as usize],
        })
    }
}

pub fn gf_add(x: &GfElement, y: &GfElement) -> Result<GfElement> {
    x.check(y)?;
    Ok(GfElement {
        field: x.field.clone(),
        value: x.field.add_raw(x.value, y.value),
    })
}

pub fn gf_mul(x: &GfElement, y: &GfElement) -> Result<GfElement> {
    x.check(y)?;
    Ok(GfElement {
        field: x.field.clone(),
        value: x.field.mul_raw(x.value, y.value),
    })
}

impl fmt::Debug for GfElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "GF({}^{}){:?}",
            self.field.p,
            self.field.c,
            self.coeffs()
        )
    }
}
