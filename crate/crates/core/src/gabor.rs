//! Windows from the test space, time-frequency shifts and Gabor analysis.
//!
//! The system is `g_{m,n}(x) = chi(u(m) b x) g(x - u(n) a)` with `a = p^s`,
//! `b = p^t`. On the grid `B^-M / B^N` the translations `u(n) a` inside the
//! support ball are the `q^(M+s)` time cells `n q^(N-s)`, and the
//! modulations `u(m) b` inside the frequency ball are the `q^(N+t)`
//! frequency cells `m q^(M-t)`. Translating or modulating by anything
//! else leaves the subspace the window lives in, so the finite system
//! is the orthogonal block of the full one that contains `g`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{chi_pair, u, Field, LocalFieldElement};
use crate::json;
use crate::transform::{fourier_fast, inverse_fourier, Domain, GridSpec, SampledFunction};

/// One indicator term `coeff * 1_k(x - h)`, where `1_k` is the
/// characteristic function of `B^k = p^k D`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowTerm {
    pub k: i32,
    pub h: LocalFieldElement,
    pub coeff: Complex64,
}

/// A finite combination of shifted ball indicators, in time or frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSpec {
    pub domain: Domain,
    pub terms: Vec<WindowTerm>,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    k: i32,
    h: String,
    #[serde(serialize_with = "json::ser_f64")]
    re: f64,
    #[serde(serialize_with = "json::ser_f64", default)]
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct WindowJson {
    #[serde(rename = "schemaVersion", default = "schema", skip_serializing)]
    schema_version: u32,
    domain: Domain,
    terms: Vec<TermJson>,
}

fn schema() -> u32 {
    json::SCHEMA_VERSION
}

/// Precision used when parsing shifts; far below any supported grid.
const SHIFT_PRECISION: i32 = 64;

impl WindowSpec {
    pub fn from_json_value(value: &serde_json::Value, field: &Field) -> Result<Self> {
        let raw: WindowJson = serde_json::from_value(value.clone())
            .map_err(|e| Error::Parse(format!("window: {e}")))?;
        if raw.schema_version != json::SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "window: unsupported schemaVersion {}",
                raw.schema_version
            )));
        }
        if raw.terms.is_empty() {
            return Err(Error::Parse("window: at least one term is required".into()));
        }
        let terms = raw
            .terms
            .iter()
            .enumerate()
            .map(|(index, t)| {
                let h = LocalFieldElement::parse(field, &t.h, SHIFT_PRECISION).map_err(|e| {
                    Error::WindowTerm {
                        index,
                        reason: e.to_string(),
                    }
                })?;
                Ok(WindowTerm {
                    k: t.k,
                    h,
                    coeff: Complex64::new(t.re, t.im),
                })
            })
            .collect::<Result<_>>()?;
        Ok(WindowSpec {
            domain: raw.domain,
            terms,
        })
    }

    pub fn from_json(text: &str, field: &Field) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("window: {e}")))?;
        Self::from_json_value(&value, field)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("window serializes")
    }
}

impl Serialize for WindowSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        WindowJson {
            schema_version: json::SCHEMA_VERSION,
            domain: self.domain,
            terms: self
                .terms
                .iter()
                .map(|t| TermJson {
                    k: t.k,
                    h: t.h.to_string(),
                    re: t.coeff.re,
                    im: t.coeff.im,
                })
                .collect(),
        }
        .serialize(s)
    }
}

/// Render a window on the grid in its own domain.
pub fn render_window(spec: &WindowSpec, grid: &GridSpec) -> Result<SampledFunction> {
    if spec.terms.is_empty() {
        return Err(Error::Parse("window has no terms".into()));
    }
    let domain = spec.domain;
    // (coarsest allowed scale, finest allowed scale) in this domain
    let (support, resolution) = match domain {
        Domain::Time => (-(grid.m() as i32), grid.n() as i32),
        Domain::Frequency => (-(grid.n() as i32), grid.m() as i32),
    };
    let points: Vec<LocalFieldElement> = (0..grid.len()).map(|j| grid.point(domain, j)).collect();
    let mut out = SampledFunction::zeros(grid, domain);
    for (index, term) in spec.terms.iter().enumerate() {
        let fail = |reason: String| Error::WindowTerm { index, reason };
        if **term.h.field() != **grid.field() {
            return Err(fail("shift belongs to a different field".into()));
        }
        if term.k > resolution {
            return Err(fail(format!(
                "scale k = {} is finer than the {} resolution {resolution}",
                term.k,
                domain.name()
            )));
        }
        if term.k < support {
            return Err(fail(format!(
                "ball B^{} exceeds the {} support B^{support}",
                term.k,
                domain.name()
            )));
        }
        if term.h.valuation().is_some_and(|v| v < support) {
            return Err(fail(format!(
                "shift {} lies outside the {} support B^{support}",
                term.h,
                domain.name()
            )));
        }
        for (x, slot) in points.iter().zip(out.values_mut()) {
            let diff = x - &term.h;
            if diff.valuation().is_none_or(|v| v >= term.k) {
                *slot += term.coeff;
            }
        }
    }
    Ok(out)
}

/// Shift `f` by the grid point `y`: `(T_y f)(x) = f(x - y)`.
pub fn translate(f: &SampledFunction, y: &LocalFieldElement) -> Result<SampledFunction> {
    f.expect_domain(Domain::Time)?;
    let grid = f.grid();
    let shift = grid.index_of(Domain::Time, y)?;
    Ok(translate_index(f, shift))
}

pub(crate) fn translate_index(f: &SampledFunction, shift: usize) -> SampledFunction {
    let grid = f.grid();
    let vals = f.values();
    SampledFunction::from_fn(grid, f.domain(), |j| vals[grid.sub(j, shift)])
}

/// Multiply `f` by `chi(u(m) b x)`. The frequency `u(m) b` must lie in
/// `B^-N` so the factor is constant on cells.
pub fn modulate(f: &SampledFunction, m: u64, b: &LocalFieldElement) -> Result<SampledFunction> {
    f.expect_domain(Domain::Time)?;
    let grid = f.grid();
    let omega = &u(grid.field(), m, b.precision()) * b;
    grid.cell_of(Domain::Frequency, &omega)?;
    let vals = f.values();
    Ok(SampledFunction::from_fn(grid, Domain::Time, |j| {
        vals[j] * chi_pair(&omega, &grid.time_point(j))
    }))
}

/// Time and frequency lattice exponents: `a = p^s`, `b = p^t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeParams {
    pub s: i32,
    pub t: i32,
}

impl LatticeParams {
    pub fn new(s: i32, t: i32) -> Self {
        LatticeParams { s, t }
    }

    /// `|a| = q^-s`.
    pub fn abs_a(&self, q: u32) -> f64 {
        (q as f64).powi(-self.s)
    }

    pub fn abs_b(&self, q: u32) -> f64 {
        (q as f64).powi(-self.t)
    }

    pub fn a(&self, field: &Field, precision: i32) -> LocalFieldElement {
        LocalFieldElement::prime_power(field, self.s, precision)
    }

    pub fn b(&self, field: &Field, precision: i32) -> LocalFieldElement {
        LocalFieldElement::prime_power(field, self.t, precision)
    }
}

/// Index ranges of a Gabor system on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexRanges {
    /// Modulations `m` run over `0..m_count`.
    pub m_count: usize,
    /// Translations `n` run over `0..n_count`.
    pub n_count: usize,
    /// Time cell of `u(n) a` is `n * translation_stride`.
    pub translation_stride: usize,
    /// Frequency cell of `u(m) b` is `m * modulation_stride`.
    pub modulation_stride: usize,
}

impl IndexRanges {
    /// Ranges enumerating each distinct translation and modulation once.
    pub fn compute(grid: &GridSpec, lattice: LatticeParams) -> Result<Self> {
        let (m, n) = (grid.m() as i32, grid.n() as i32);
        let LatticeParams { s, t } = lattice;
        if s < -m || s > n {
            return Err(Error::Lattice(format!(
                "translation exponent s = {s} must lie in [-M, N] = [{}, {n}]",
                -m
            )));
        }
        if t < -n || t > m {
            return Err(Error::Lattice(format!(
                "modulation exponent t = {t} must lie in [-N, M] = [{}, {m}]",
                -n
            )));
        }
        let q = grid.q();
        Ok(IndexRanges {
            m_count: q.pow((n + t) as u32),
            n_count: q.pow((m + s) as u32),
            translation_stride: q.pow((n - s) as u32),
            modulation_stride: q.pow((m - t) as u32),
        })
    }

    /// Recompute every `u(n) a` and `u(m) b` in field arithmetic and check
    /// that they land on the predicted, pairwise distinct cells.
    pub fn validate(&self, grid: &GridSpec, lattice: LatticeParams) -> Result<()> {
        let field = grid.field();
        let prec = grid.precision();
        let check = |count: usize, stride: usize, scale: &LocalFieldElement, domain: Domain| {
            let mut seen = vec![false; grid.len()];
            for k in 0..count {
                let pt = &u(field, k as u64, prec) * scale;
                let cell = grid.index_of(domain, &pt)?;
                if cell != k * stride {
                    return Err(Error::Lattice(format!(
                        "{} shift {k} landed on cell {cell}, expected {}",
                        domain.name(),
                        k * stride
                    )));
                }
                if std::mem::replace(&mut seen[cell], true) {
                    return Err(Error::Lattice(format!(
                        "duplicate {} shift at cell {cell}",
                        domain.name()
                    )));
                }
            }
            Ok(())
        };
        check(
            self.n_count,
            self.translation_stride,
            &lattice.a(field, prec),
            Domain::Time,
        )?;
        check(
            self.m_count,
            self.modulation_stride,
            &lattice.b(field, prec),
            Domain::Frequency,
        )
    }
}

/// A Gabor system on a finite grid, holding both renderings of the window.
#[derive(Debug, Clone)]
pub struct GaborSystem {
    window: SampledFunction,
    window_hat: SampledFunction,
    lattice: LatticeParams,
    ranges: IndexRanges,
}

impl GaborSystem {
    /// Build from a window rendered in either domain.
    pub fn new(window: SampledFunction, lattice: LatticeParams) -> Result<Self> {
        let ranges = IndexRanges::compute(window.grid(), lattice)?;
        let (window, window_hat) = match window.domain() {
            Domain::Time => {
                let hat = fourier_fast(&window)?;
                (window, hat)
            }
            Domain::Frequency => (inverse_fourier(&window)?, window),
        };
        Ok(GaborSystem {
            window,
            window_hat,
            lattice,
            ranges,
        })
    }

    pub fn from_spec(spec: &WindowSpec, grid: &GridSpec, lattice: LatticeParams) -> Result<Self> {
        Self::new(render_window(spec, grid)?, lattice)
    }

    pub fn grid(&self) -> &GridSpec {
        self.window.grid()
    }

    pub fn window(&self) -> &SampledFunction {
        &self.window
    }

    pub fn window_hat(&self) -> &SampledFunction {
        &self.window_hat
    }

    pub fn lattice(&self) -> LatticeParams {
        self.lattice
    }

    pub fn ranges(&self) -> IndexRanges {
        self.ranges
    }

    pub fn abs_a(&self) -> f64 {
        self.lattice.abs_a(self.grid().field().q())
    }

    pub fn atom_count(&self) -> usize {
        self.ranges.m_count * self.ranges.n_count
    }

    /// `M_{u(m) b} T_{u(n) a} g`: translate first, then modulate.
    pub fn atom(&self, m: usize, n: usize) -> SampledFunction {
        let grid = self.grid();
        let shift = n * self.ranges.translation_stride;
        let freq = m * self.ranges.modulation_stride;
        let field = grid.field();
        let g = self.window.values();
        SampledFunction::from_fn(grid, Domain::Time, |j| {
            g[grid.sub(j, shift)] * field.root(grid.pairing_exponent(freq, j))
        })
    }

    /// Fourier transform of the atom from the closed form
    /// `conj(chi(u(n) a (xi - b u(m)))) ghat(xi - b u(m))`.
    pub fn atom_hat(&self, m: usize, n: usize) -> SampledFunction {
        let grid = self.grid();
        let shift = n * self.ranges.translation_stride;
        let freq = m * self.ranges.modulation_stride;
        let field = grid.field();
        let gh = self.window_hat.values();
        SampledFunction::from_fn(grid, Domain::Frequency, |i| {
            let eta = grid.sub(i, freq);
            gh[eta] * field.root(grid.pairing_exponent(eta, shift)).conj()
        })
    }
}

/// `<f, g_{m,n}>` for every `(m, n)`, row-major in `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    pub m_count: usize,
    pub n_count: usize,
    pub values: Vec<Complex64>,
}

impl CoefficientTable {
    pub fn get(&self, m: usize, n: usize) -> Complex64 {
        self.values[m * self.n_count + n]
    }

    pub fn energy(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum()
    }
}

fn as_time(f: &SampledFunction) -> Result<SampledFunction> {
    match f.domain() {
        Domain::Time => Ok(f.clone()),
        Domain::Frequency => inverse_fourier(f),
    }
}

/// Analysis coefficients, one fast transform per translation: for fixed
/// `n`, `<f, g_{m,n}>` is the transform of `f conj(T g)` at `u(m) b`.
pub fn analysis_coeffs(f: &SampledFunction, sys: &GaborSystem) -> Result<CoefficientTable> {
    let f = as_time(f)?;
    if f.grid() != sys.grid() {
        return Err(Error::InvalidGrid(
            "function and system use different grids".into(),
        ));
    }
    let IndexRanges {
        m_count,
        n_count,
        translation_stride,
        modulation_stride,
    } = sys.ranges;
    let columns: Vec<Vec<Complex64>> = (0..n_count)
        .into_par_iter()
        .map(|n| {
            let shifted = translate_index(&sys.window, n * translation_stride);
            let prod = SampledFunction::from_fn(f.grid(), Domain::Time, |j| {
                f.values()[j] * shifted.values()[j].conj()
            });
            let spec = fourier_fast(&prod).expect("time-domain input");
            (0..m_count)
                .map(|m| spec.values()[m * modulation_stride])
                .collect()
        })
        .collect();
    let mut values = vec![Complex64::new(0.0, 0.0); m_count * n_count];
    for (n, col) in columns.iter().enumerate() {
        for (m, z) in col.iter().enumerate() {
            values[m * n_count + n] = *z;
        }
    }
    Ok(CoefficientTable {
        m_count,
        n_count,
        values,
    })
}

/// Analysis coefficients as explicit inner products with every atom.
pub fn analysis_coeffs_direct(f: &SampledFunction, sys: &GaborSystem) -> Result<CoefficientTable> {
    let f = as_time(f)?;
    let IndexRanges {
        m_count, n_count, ..
    } = sys.ranges;
    let mut values = Vec::with_capacity(m_count * n_count);
    for m in 0..m_count {
        for n in 0..n_count {
            values.push(f.inner(&sys.atom(m, n)));
        }
    }
    Ok(CoefficientTable {
        m_count,
        n_count,
        values,
    })
}

/// `P(f) = sum_{m,n} |<f, g_{m,n}>|^2`.
pub fn frame_energy(f: &SampledFunction, sys: &GaborSystem) -> Result<f64> {
    Ok(analysis_coeffs(f, sys)?.energy())
}
