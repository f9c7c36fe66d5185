//! Fourier analysis on the finite quotient group `B^-M / B^N`.
//!
//! Time cell `j` is the coset of `x_j = u(j) p^N`, frequency cell `i` the
//! coset of `xi_i = u(i) p^M`, both for `0 <= j, i < D = q^(M+N)`. Base-q
//! digit `d` of a time index sits at exponent `N-1-d`, of a frequency index
//! at `M-1-d`, so the pairing `chi(xi_i x_j)` couples digit `d` of `i` with
//! digit `L-1-d` of `j` (`L = M+N`). Time cells carry Haar weight `q^-N`,
//! frequency cells `q^-M`.

use std::io::{BufRead, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{chi_pair, u, Field, FieldParams, LocalFieldElement};
use crate::json;

/// Largest supported grid size.
pub const MAX_GRID_LEN: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Time,
    Frequency,
}

impl Domain {
    pub fn name(self) -> &'static str {
        match self {
            Domain::Time => "time",
            Domain::Frequency => "frequency",
        }
    }

    pub fn dual(self) -> Domain {
        match self {
            Domain::Time => Domain::Frequency,
            Domain::Frequency => Domain::Time,
        }
    }
}

/// The grid `B^-M / B^N` over a fixed field.
#[derive(Debug, Clone)]
pub struct GridSpec {
    field: Field,
    m: u32,
    n: u32,
    len: usize,
}

impl PartialEq for GridSpec {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m && self.n == other.n && *self.field == *other.field
    }
}

impl GridSpec {
    pub fn new(field: &Field, m: u32, n: u32) -> Result<Self> {
        let len = (field.q() as usize)
            .checked_pow(m + n)
            .filter(|&d| d <= MAX_GRID_LEN)
            .ok_or_else(|| {
                Error::InvalidGrid(format!(
                    "q^(M+N) = {}^{} exceeds {MAX_GRID_LEN}",
                    field.q(),
                    m + n
                ))
            })?;
        Ok(GridSpec {
            field: field.clone(),
            m,
            n,
            len,
        })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn q(&self) -> usize {
        self.field.q() as usize
    }

    /// Support exponent: functions live on `B^-M`.
    pub fn m(&self) -> u32 {
        self.m
    }

    /// Resolution: functions are constant on cosets of `B^N`.
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Number of base-q digits `L = M + N`.
    pub fn digits(&self) -> u32 {
        self.m + self.n
    }

    /// `D = q^(M+N)`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The same group read from the frequency side: `(M, N) -> (N, M)`.
    pub fn dual(&self) -> GridSpec {
        GridSpec {
            field: self.field.clone(),
            m: self.n,
            n: self.m,
            len: self.len,
        }
    }

    pub fn weight(&self, domain: Domain) -> f64 {
        let e = match domain {
            Domain::Time => self.n,
            Domain::Frequency => self.m,
        };
        (self.q() as f64).powi(-(e as i32))
    }

    /// Truncation precision used for grid points.
    pub fn precision(&self) -> i32 {
        self.m.max(self.n) as i32 + 1
    }

    /// Exponent of base-q digit 0 in the given domain.
    fn finest_exponent(&self, domain: Domain) -> i32 {
        match domain {
            Domain::Time => self.n as i32 - 1,
            Domain::Frequency => self.m as i32 - 1,
        }
    }

    /// Representative of cell `index`: `u(index) p^N` (time) or `u(index) p^M` (frequency).
    pub fn point(&self, domain: Domain, index: usize) -> LocalFieldElement {
        let prec = self.precision();
        let shift = self.finest_exponent(domain) + 1;
        let base = u(&self.field, index as u64, prec);
        &base * &LocalFieldElement::prime_power(&self.field, shift, prec)
    }

    pub fn time_point(&self, j: usize) -> LocalFieldElement {
        self.point(Domain::Time, j)
    }

    pub fn freq_point(&self, i: usize) -> LocalFieldElement {
        self.point(Domain::Frequency, i)
    }

    /// Index of the cell containing `x`. Coefficients finer than the cell
    /// size are ignored; `x` must lie in the support ball.
    pub fn cell_of(&self, domain: Domain, x: &LocalFieldElement) -> Result<usize> {
        if **x.field() != *self.field {
            return Err(Error::FieldMismatch);
        }
        let top = self.finest_exponent(domain);
        let bottom = top + 1 - self.digits() as i32;
        if let Some(v) = x.valuation() {
            if v < bottom {
                return Err(Error::OffGrid(format!(
                    "{x} (outside the {} support ball B^{bottom})",
                    domain.name()
                )));
            }
        }
        let q = self.q();
        let mut idx = 0usize;
        for e in bottom..=top {
            // exponent `bottom` carries the most significant digit
            idx = idx * q + x.coeff(e) as usize;
        }
        Ok(idx)
    }

    /// Like [`GridSpec::cell_of`] but `x` must be exactly a cell representative.
    pub fn index_of(&self, domain: Domain, x: &LocalFieldElement) -> Result<usize> {
        let top = self.finest_exponent(domain);
        if x.top_exponent().is_some_and(|t| t > top) {
            return Err(Error::OffGrid(format!(
                "{x} (finer than the {} resolution)",
                domain.name()
            )));
        }
        self.cell_of(domain, x)
    }

    /// Group law on cell indices (digitwise GF(q) addition).
    #[inline]
    pub fn add(&self, a: usize, b: usize) -> usize {
        let q = self.q();
        if q == 2 {
            return a ^ b;
        }
        let (mut a, mut b) = (a, b);
        let mut out = 0;
        let mut place = 1;
        while a > 0 || b > 0 {
            let d = self.field.add_raw((a % q) as u32, (b % q) as u32) as usize;
            out += d * place;
            a /= q;
            b /= q;
            place *= q;
        }
        out
    }

    #[inline]
    pub fn neg(&self, a: usize) -> usize {
        let q = self.q();
        if q == 2 {
            return a;
        }
        let mut a = a;
        let mut out = 0;
        let mut place = 1;
        while a > 0 {
            out += self.field.neg_raw((a % q) as u32) as usize * place;
            a /= q;
            place *= q;
        }
        out
    }

    #[inline]
    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg(b))
    }

    /// `t` with `chi(xi_i x_j) = exp(2 pi i t / p)`, from digit products.
    #[inline]
    pub fn pairing_exponent(&self, freq: usize, time: usize) -> u32 {
        let q = self.q();
        let l = self.digits() as usize;
        let mut rev_time = vec_digits(time, q, l);
        rev_time.reverse();
        let mut f = freq;
        let mut t = 0u32;
        for &tj in &rev_time {
            let fd = (f % q) as u32;
            f /= q;
            if fd != 0 && tj != 0 {
                t += self.field.trace_raw(self.field.mul_raw(fd, tj as u32));
            }
        }
        t % self.field.p()
    }

    /// Base-q digit reversal over `L` digits.
    pub fn digit_reverse(&self, index: usize) -> usize {
        let q = self.q();
        let mut rest = index;
        let mut out = 0;
        for _ in 0..self.digits() {
            out = out * q + rest % q;
            rest /= q;
        }
        out
    }
}

fn vec_digits(mut v: usize, q: usize, len: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(v % q);
        v /= q;
    }
    out
}

/// A complex function on the grid, in time or frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    grid: GridSpec,
    domain: Domain,
    values: Vec<Complex64>,
}

impl SampledFunction {
    pub fn new(grid: &GridSpec, domain: Domain, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(SampledFunction {
            grid: grid.clone(),
            domain,
            values,
        })
    }

    pub fn zeros(grid: &GridSpec, domain: Domain) -> Self {
        SampledFunction {
            grid: grid.clone(),
            domain,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_fn(grid: &GridSpec, domain: Domain, f: impl FnMut(usize) -> Complex64) -> Self {
        SampledFunction {
            grid: grid.clone(),
            domain,
            values: (0..grid.len()).map(f).collect(),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Haar measure of one cell.
    pub fn weight(&self) -> f64 {
        self.grid.weight(self.domain)
    }

    pub(crate) fn expect_domain(&self, domain: Domain) -> Result<()> {
        if self.domain == domain {
            Ok(())
        } else {
            Err(Error::DomainMismatch {
                expected: domain.name(),
                found: self.domain.name(),
            })
        }
    }

    /// `<self, other> = w sum self_j conj(other_j)`.
    pub fn inner(&self, other: &SampledFunction) -> Complex64 {
        debug_assert_eq!(self.grid, other.grid);
        debug_assert_eq!(self.domain, other.domain);
        let s: Complex64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b.conj())
            .sum();
        s * self.weight()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.weight()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scaled(&self, factor: Complex64) -> SampledFunction {
        SampledFunction {
            grid: self.grid.clone(),
            domain: self.domain,
            values: self.values.iter().map(|z| z * factor).collect(),
        }
    }

    /// Largest pointwise deviation from `other`.
    pub fn max_abs_diff(&self, other: &SampledFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Weighted 2-norm of `self - other`.
    pub fn dist(&self, other: &SampledFunction) -> f64 {
        let s: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        (s * self.weight()).sqrt()
    }
}

/// Reference transform: one `chi_pair` evaluation per (frequency, time) pair.
pub fn fourier_naive(f: &SampledFunction) -> Result<SampledFunction> {
    f.expect_domain(Domain::Time)?;
    Ok(dft_naive(f, Domain::Frequency))
}

/// Reference inverse transform.
pub fn inverse_fourier_naive(spectrum: &SampledFunction) -> Result<SampledFunction> {
    spectrum.expect_domain(Domain::Frequency)?;
    Ok(dft_naive(spectrum, Domain::Time))
}

fn dft_naive(input: &SampledFunction, out_domain: Domain) -> SampledFunction {
    let grid = &input.grid;
    let d = grid.len();
    let in_domain = input.domain;
    let inputs: Vec<LocalFieldElement> = (0..d).map(|j| grid.point(in_domain, j)).collect();
    let weight = input.weight();
    // forward pairs with conj(chi); inverse with chi
    let forward = in_domain == Domain::Time;
    let values = (0..d)
        .map(|i| {
            let out_pt = grid.point(out_domain, i);
            let mut acc = Complex64::new(0.0, 0.0);
            for (x, &v) in inputs.iter().zip(&input.values) {
                let c = chi_pair(&out_pt, x);
                acc += if forward { v * c.conj() } else { v * c };
            }
            acc * weight
        })
        .collect();
    SampledFunction {
        grid: grid.clone(),
        domain: out_domain,
        values,
    }
}

/// Fast transform: digit reversal followed by `L` passes of the `q x q`
/// kernel `K[a][b] = exp(-2 pi i tr(a b) / p)` along each digit axis.
pub fn fourier_fast(f: &SampledFunction) -> Result<SampledFunction> {
    f.expect_domain(Domain::Time)?;
    Ok(dft_fast(f, Domain::Frequency))
}

/// Fast inverse transform, the adjoint kernel with frequency weights.
pub fn inverse_fourier(spectrum: &SampledFunction) -> Result<SampledFunction> {
    spectrum.expect_domain(Domain::Frequency)?;
    Ok(dft_fast(spectrum, Domain::Time))
}

fn dft_fast(input: &SampledFunction, out_domain: Domain) -> SampledFunction {
    let grid = &input.grid;
    let field = grid.field();
    let q = grid.q();
    let d = grid.len();
    let forward = input.domain == Domain::Time;

    let mut data: Vec<Complex64> = (0..d)
        .map(|j| input.values[grid.digit_reverse(j)])
        .collect();

    if q == 2 {
        walsh_passes(&mut data);
    } else {
        let mut kernel = Vec::with_capacity(q * q);
        for a in 0..q as u32 {
            for b in 0..q as u32 {
                let z = field.root(field.trace_raw(field.mul_raw(a, b)));
                kernel.push(if forward { z.conj() } else { z });
            }
        }
        kernel_passes(&mut data, q, &kernel);
    }

    let w = input.weight();
    for z in &mut data {
        *z *= w;
    }
    SampledFunction {
        grid: grid.clone(),
        domain: out_domain,
        values: data,
    }
}

fn walsh_passes(data: &mut [Complex64]) {
    let d = data.len();
    let mut stride = 1;
    while stride < d {
        for block in (0..d).step_by(2 * stride) {
            for k in block..block + stride {
                let a = data[k];
                let b = data[k + stride];
                data[k] = a + b;
                data[k + stride] = a - b;
            }
        }
        stride *= 2;
    }
}

fn kernel_passes(data: &mut [Complex64], q: usize, kernel: &[Complex64]) {
    let d = data.len();
    let mut scratch = vec![Complex64::new(0.0, 0.0); q];
    let mut stride = 1;
    while stride < d {
        let span = stride * q;
        for block in (0..d).step_by(span) {
            for k in block..block + stride {
                for (a, out) in scratch.iter_mut().enumerate() {
                    let row = &kernel[a * q..(a + 1) * q];
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (b, coef) in row.iter().enumerate() {
                        acc += coef * data[k + b * stride];
                    }
                    *out = acc;
                }
                for (a, v) in scratch.iter().enumerate() {
                    data[k + a * stride] = *v;
                }
            }
        }
        stride = span;
    }
}

/// A frequency function summed over the lattice `{a^-1 u(k)}`, `a = p^s`,
/// on one fundamental domain `B^-s / B^M`. Cell `i` of the output is
/// frequency cell `i < q^(M+s)` of the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Periodized {
    pub lattice_exponent: i32,
    pub values: Vec<Complex64>,
}

/// Number of lattice translates `a^-1 u(k)` inside the frequency support,
/// and the size of one fundamental domain, for `a = p^s`.
pub(crate) fn translation_lattice_counts(grid: &GridSpec, s: i32) -> Result<(usize, usize)> {
    let (m, n) = (grid.m() as i32, grid.n() as i32);
    if s < -m || s > n {
        return Err(Error::Lattice(format!(
            "translation exponent s = {s} must lie in [-M, N] = [{}, {n}]",
            -m
        )));
    }
    let q = grid.q();
    Ok((q.pow((n - s) as u32), q.pow((m + s) as u32)))
}

pub fn periodize(spectrum: &SampledFunction, s: i32) -> Result<Periodized> {
    spectrum.expect_domain(Domain::Frequency)?;
    let grid = spectrum.grid();
    let (translates, cells) = translation_lattice_counts(grid, s)?;
    // a^-1 u(k) is frequency cell k * q^(M+s)
    let values = (0..cells)
        .map(|i| {
            (0..translates)
                .map(|k| spectrum.values[grid.add(i, k * cells)])
                .sum()
        })
        .collect();
    Ok(Periodized {
        lattice_exponent: s,
        values,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridJson {
    pub p: u32,
    pub c: u32,
    #[serde(rename = "M")]
    pub m: u32,
    #[serde(rename = "N")]
    pub n: u32,
    #[serde(
        rename = "modulusPoly",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub modulus: Option<Vec<u32>>,
}

impl GridJson {
    pub fn from_grid(grid: &GridSpec) -> Self {
        let f = grid.field();
        let default = crate::field::default_modulus(f.p(), f.c());
        GridJson {
            p: f.p(),
            c: f.c(),
            m: grid.m(),
            n: grid.n(),
            modulus: (f.modulus() != default.as_slice()).then(|| f.modulus().to_vec()),
        }
    }

    pub fn to_grid(&self) -> Result<GridSpec> {
        let field = match &self.modulus {
            Some(m) => FieldParams::with_modulus(self.p, self.c, m.clone())?,
            None => FieldParams::new(self.p, self.c)?,
        };
        GridSpec::new(&field, self.m, self.n)
    }
}

#[derive(Serialize)]
struct FunctionOut<'a> {
    #[serde(rename = "schemaVersion")]
    schema_version: u32,
    grid: GridJson,
    domain: Domain,
    #[serde(serialize_with = "json::ser_complex_vec")]
    values: &'a [Complex64],
}

#[derive(Deserialize)]
struct FunctionIn {
    #[serde(rename = "schemaVersion", default = "default_schema")]
    schema_version: u32,
    grid: GridJson,
    domain: Domain,
    values: Vec<[f64; 2]>,
}

fn default_schema() -> u32 {
    json::SCHEMA_VERSION
}

impl SampledFunction {
    pub fn to_json(&self) -> String {
        let out = FunctionOut {
            schema_version: json::SCHEMA_VERSION,
            grid: GridJson::from_grid(&self.grid),
            domain: self.domain,
            values: &self.values,
        };
        json::to_string(&out).expect("function serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: FunctionIn = serde_json::from_str(text)?;
        if raw.schema_version != json::SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "unsupported schemaVersion {}",
                raw.schema_version
            )));
        }
        let grid = raw.grid.to_grid()?;
        let values = raw
            .values
            .iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect();
        SampledFunction::new(&grid, raw.domain, values)
    }

    /// `index,re,im` rows with a header line.
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "index,re,im")?;
        for (j, z) in self.values.iter().enumerate() {
            writeln!(out, "{j},{:.16e},{:.16e}", z.re, z.im)?;
        }
        Ok(())
    }

    pub fn read_csv(grid: &GridSpec, domain: Domain, input: impl BufRead) -> Result<Self> {
        let mut values = vec![None; grid.len()];
        for (line_no, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || (line_no == 0 && line.starts_with("index")) {
                continue;
            }
            let bad = |why: &str| Error::Parse(format!("csv line {}: {why}", line_no + 1));
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(bad("expected index,re,im"));
            }
            let j: usize = fields[0].parse().map_err(|_| bad("bad index"))?;
            let re: f64 = fields[1].parse().map_err(|_| bad("bad real part"))?;
            let im: f64 = fields[2].parse().map_err(|_| bad("bad imaginary part"))?;
            let slot = values.get_mut(j).ok_or_else(|| bad("index out of range"))?;
            if slot.replace(Complex64::new(re, im)).is_some() {
                return Err(bad("duplicate index"));
            }
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(j, v)| v.ok_or_else(|| Error::Parse(format!("csv: missing index {j}"))))
            .collect::<Result<_>>()?;
        SampledFunction::new(grid, domain, values)
    }
}
