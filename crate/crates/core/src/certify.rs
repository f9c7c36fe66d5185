//! Frame quantities of a window and the sufficient conditions built on them.
//!
//! With `s_k = a^-1 u(k)` and the modulation lattice `b u(m)`:
//!
//! ```text
//! Delta_k(xi)  = sum_m |ghat(xi - b u(m)) ghat(xi - b u(m) + s_k)|
//! Lambda_k(xi) = sum_m  ghat(xi - b u(m)) conj(ghat(xi - b u(m) + s_k))
//! alpha_k = max Delta_k     gamma = min Delta_0    delta_k = max |Lambda_k|
//! beta = sum_{k>=1} alpha_k   mu = sum_{k>=1} delta_k
//! sigma = max_xi sum_{k>=1} |Lambda_k(xi)|
//! ```
//!
//! Every function is constant on frequency cells and `b`-periodic, so the
//! extrema are exact over the `q^(M-t)` cells of `B^t`, the fundamental
//! domain. The frame bounds are then `(gamma - x) / |a|` and
//! `(alpha_0 + x) / |a|` for `x` one of `beta`, `mu`, `sigma`, valid when
//! `x < gamma`.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gabor::{GaborSystem, IndexRanges, LatticeParams, WindowSpec};
use crate::json;
use crate::oracle::OracleSection;
use crate::transform::{fourier_fast, Domain, GridJson, GridSpec, SampledFunction};

/// Values below this fraction of `max |ghat|` count as outside the support.
pub const SUPPORT_TOL: f64 = 1e-12;

/// A gate passes only if `gamma - x` exceeds this fraction of `alpha_0`.
pub const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
struct Layout {
    /// Cells in the fundamental domain `B^t`.
    cells: usize,
    m_count: usize,
    /// Frequency index step of `b u(m)`.
    mod_stride: usize,
    /// Frequency index step of `a^-1 u(k)`.
    shift_stride: usize,
    /// Number of `k` with `a^-1 u(k)` inside the frequency support.
    shifts: usize,
}

impl Layout {
    fn new(grid: &GridSpec, lattice: LatticeParams) -> Result<Self> {
        let r = IndexRanges::compute(grid, lattice)?;
        let q = grid.q();
        let (m, n) = (grid.m() as i32, grid.n() as i32);
        Ok(Layout {
            cells: r.modulation_stride,
            m_count: r.m_count,
            mod_stride: r.modulation_stride,
            shift_stride: q.pow((m + lattice.s) as u32),
            shifts: q.pow((n - lattice.s) as u32),
        })
    }
}

fn check_spectrum(ghat: &SampledFunction) -> Result<()> {
    ghat.expect_domain(Domain::Frequency)
}

/// Sum over the modulation lattice of `term(ghat(eta), ghat(eta + s_k))`.
fn lattice_sum<T: std::iter::Sum<T>>(
    ghat: &SampledFunction,
    lay: &Layout,
    k: usize,
    xi: usize,
    term: impl Fn(Complex64, Complex64) -> T,
) -> T {
    let grid = ghat.grid();
    let g = ghat.values();
    let shift = k * lay.shift_stride;
    (0..lay.m_count)
        .map(|m| {
            let eta = grid.sub(xi, m * lay.mod_stride);
            term(g[eta], g[grid.add(eta, shift)])
        })
        .sum()
}

/// `Delta_k` on the fundamental domain.
pub fn compute_delta_k(
    ghat: &SampledFunction,
    lattice: LatticeParams,
    k: usize,
) -> Result<Vec<f64>> {
    check_spectrum(ghat)?;
    let lay = Layout::new(ghat.grid(), lattice)?;
    if k >= lay.shifts {
        return Ok(vec![0.0; lay.cells]);
    }
    Ok((0..lay.cells)
        .map(|xi| lattice_sum(ghat, &lay, k, xi, |x, y| (x * y).norm()))
        .collect())
}

/// `Lambda_k` on the fundamental domain.
pub fn compute_lambda_k(
    ghat: &SampledFunction,
    lattice: LatticeParams,
    k: usize,
) -> Result<Vec<Complex64>> {
    check_spectrum(ghat)?;
    let lay = Layout::new(ghat.grid(), lattice)?;
    if k >= lay.shifts {
        return Ok(vec![Complex64::new(0.0, 0.0); lay.cells]);
    }
    Ok((0..lay.cells)
        .map(|xi| lattice_sum(ghat, &lay, k, xi, |x, y| x * y.conj()))
        .collect())
}

/// `Delta_k` at an arbitrary frequency cell, straight from the definition.
pub fn delta_k_at(
    ghat: &SampledFunction,
    lattice: LatticeParams,
    k: usize,
    xi: usize,
) -> Result<f64> {
    check_spectrum(ghat)?;
    let lay = Layout::new(ghat.grid(), lattice)?;
    if k >= lay.shifts {
        return Ok(0.0);
    }
    Ok(lattice_sum(ghat, &lay, k, xi, |x, y| (x * y).norm()))
}

/// `Lambda_k` at an arbitrary frequency cell.
pub fn lambda_k_at(
    ghat: &SampledFunction,
    lattice: LatticeParams,
    k: usize,
    xi: usize,
) -> Result<Complex64> {
    check_spectrum(ghat)?;
    let lay = Layout::new(ghat.grid(), lattice)?;
    if k >= lay.shifts {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(lattice_sum(ghat, &lay, k, xi, |x, y| x * y.conj()))
}

/// Frequency index of `a^-1 u(k)`.
pub fn shift_index(grid: &GridSpec, lattice: LatticeParams, k: usize) -> Result<usize> {
    Ok(k * Layout::new(grid, lattice)?.shift_stride)
}

/// Number of `k` worth evaluating: `a^-1 u(k)` moves the support of
/// `ghat` off itself once it leaves the smallest ball containing it.
fn shift_limit(ghat: &SampledFunction, lay: &Layout) -> usize {
    let g = ghat.values();
    let peak = g.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let cut = SUPPORT_TOL * peak;
    let mut support = (0..g.len()).filter(|&i| g[i].norm() > cut);
    let Some(first) = support.next() else {
        return 1;
    };
    let grid = ghat.grid();
    // differences below q^span share all digits above position span
    let span = support
        .map(|i| grid.sub(i, first))
        .max()
        .map_or(1, |d| d + 1);
    let mut limit = 1usize;
    while limit < lay.shifts && limit * lay.shift_stride < span {
        limit *= grid.q();
    }
    limit
}

#[derive(Debug, Clone)]
pub struct FrameQuantities {
    pub grid: GridSpec,
    pub lattice: LatticeParams,
    /// All `k >= k_limit` vanish identically.
    pub k_limit: usize,
    /// Largest `k` with a nonzero `Delta_k`, 0 if only the diagonal survives.
    pub k_max: usize,
    /// `delta[k][xi]` for `k < k_limit`, `xi` in the fundamental domain.
    pub delta: Vec<Vec<f64>>,
    pub lambda: Vec<Vec<Complex64>>,
    pub alpha: Vec<f64>,
    /// `delta_k = max |Lambda_k|`.
    pub delta_sup: Vec<f64>,
}

impl FrameQuantities {
    pub fn compute(ghat: &SampledFunction, lattice: LatticeParams) -> Result<Self> {
        check_spectrum(ghat)?;
        let lay = Layout::new(ghat.grid(), lattice)?;
        let k_limit = shift_limit(ghat, &lay);
        let rows: Vec<(Vec<f64>, Vec<Complex64>)> = (0..k_limit)
            .into_par_iter()
            .map(|k| {
                let lam: Vec<Complex64> = (0..lay.cells)
                    .map(|xi| lattice_sum(ghat, &lay, k, xi, |x, y| x * y.conj()))
                    .collect();
                let del = if k == 0 {
                    lam.iter().map(|z| z.re).collect()
                } else {
                    (0..lay.cells)
                        .map(|xi| lattice_sum(ghat, &lay, k, xi, |x, y| (x * y).norm()))
                        .collect()
                };
                (del, lam)
            })
            .collect();
        let (delta, mut lambda): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
        // the diagonal is real by construction; drop rounding in the imaginary part
        for z in lambda[0].iter_mut() {
            z.im = 0.0;
        }
        let alpha: Vec<f64> = delta
            .iter()
            .map(|row| row.iter().copied().fold(0.0, f64::max))
            .collect();
        let delta_sup = lambda
            .iter()
            .map(|row| row.iter().map(|z| z.norm()).fold(0.0, f64::max))
            .collect();
        let k_max = (1..k_limit).rev().find(|&k| alpha[k] > 0.0).unwrap_or(0);
        Ok(FrameQuantities {
            grid: ghat.grid().clone(),
            lattice,
            k_limit,
            k_max,
            delta,
            lambda,
            alpha,
            delta_sup,
        })
    }

    pub fn from_system(sys: &GaborSystem) -> Result<Self> {
        Self::compute(sys.window_hat(), sys.lattice())
    }

    /// Cells in the fundamental domain.
    pub fn cells(&self) -> usize {
        self.delta[0].len()
    }

    pub fn normalization(&self) -> f64 {
        self.lattice.abs_a(self.grid.field().q())
    }

    /// First fundamental-domain cell where `Delta_0` vanishes.
    pub fn uncovered_cell(&self) -> Option<usize> {
        let scale = self.alpha[0];
        self.delta[0]
            .iter()
            .position(|&d| d <= SUPPORT_TOL * SUPPORT_TOL * scale || d == 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scalars {
    #[serde(serialize_with = "json::ser_f64")]
    pub alpha0: f64,
    #[serde(serialize_with = "json::ser_f64")]
    pub beta: f64,
    #[serde(serialize_with = "json::ser_f64")]
    pub gamma: f64,
    #[serde(serialize_with = "json::ser_f64")]
    pub mu: f64,
    #[serde(serialize_with = "json::ser_f64")]
    pub sigma: f64,
}

pub fn compute_scalars(fq: &FrameQuantities) -> Scalars {
    let alpha0 = fq.alpha[0];
    let gamma = fq.delta[0].iter().copied().fold(f64::INFINITY, f64::min);
    let beta = fq.alpha[1..].iter().sum();
    let mu = fq.delta_sup[1..].iter().sum();
    let sigma = (0..fq.cells())
        .map(|xi| fq.lambda[1..].iter().map(|row| row[xi].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    Scalars {
        alpha0,
        beta,
        gamma,
        mu,
        sigma,
    }
}

/// Which cross-term scalar a bound subtracts from `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum BoundKind {
    Beta,
    Mu,
    Sigma,
}

impl BoundKind {
    pub const ALL: [BoundKind; 3] = [BoundKind::Beta, BoundKind::Mu, BoundKind::Sigma];

    pub fn name(self) -> &'static str {
        match self {
            BoundKind::Beta => "beta",
            BoundKind::Mu => "mu",
            BoundKind::Sigma => "sigma",
        }
    }

    pub fn cross_term(self, s: &Scalars) -> f64 {
        match self {
            BoundKind::Beta => s.beta,
            BoundKind::Mu => s.mu,
            BoundKind::Sigma => s.sigma,
        }
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoremBound {
    pub applicable: bool,
    #[serde(rename = "C", serialize_with = "json::ser_f64")]
    pub c: f64,
    #[serde(rename = "D", serialize_with = "json::ser_f64")]
    pub d: f64,
    /// `C / |a|`.
    #[serde(rename = "lower", serialize_with = "json::ser_f64")]
    pub lower: f64,
    /// `D / |a|`.
    #[serde(rename = "upper", serialize_with = "json::ser_f64")]
    pub upper: f64,
}

/// The three bounds in `BoundKind` order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theorems(pub [TheoremBound; 3]);

impl Theorems {
    pub fn get(&self, kind: BoundKind) -> &TheoremBound {
        &self.0[kind as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = (BoundKind, &TheoremBound)> {
        BoundKind::ALL.into_iter().zip(self.0.iter())
    }

    pub fn any_applicable(&self) -> bool {
        self.0.iter().any(|t| t.applicable)
    }
}

impl Serialize for Theorems {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(3))?;
        for (kind, bound) in self.iter() {
            map.serialize_entry(kind.name(), bound)?;
        }
        map.end()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    #[serde(rename = "schemaVersion")]
    pub schema_version: u32,
    pub window: Option<WindowSpec>,
    pub lattice: LatticeParams,
    pub grid: GridJson,
    #[serde(serialize_with = "json::ser_f64")]
    pub normalization: f64,
    pub scalars: Scalars,
    #[serde(rename = "kLimit")]
    pub k_limit: usize,
    #[serde(rename = "kMax")]
    pub k_max: usize,
    pub theorems: Theorems,
    pub oracle: Option<OracleSection>,
    pub diagnostic: Option<String>,
}

impl CertificateReport {
    pub fn to_json(&self) -> String {
        json::to_string(self).expect("report serializes")
    }
}

fn gate_passes(x: f64, s: &Scalars) -> bool {
    s.gamma > 0.0 && s.alpha0.is_finite() && s.gamma - x > TIE_TOL * s.alpha0
}

/// Apply the three sufficient conditions.
pub fn gate(fq: &FrameQuantities, window: Option<&WindowSpec>) -> CertificateReport {
    let scalars = compute_scalars(fq);
    let norm = fq.normalization();
    let bounds = BoundKind::ALL.map(|kind| {
        let x = kind.cross_term(&scalars);
        let (c, d) = (scalars.gamma - x, scalars.alpha0 + x);
        TheoremBound {
            applicable: gate_passes(x, &scalars),
            c,
            d,
            lower: c / norm,
            upper: d / norm,
        }
    });
    let diagnostic = fq.uncovered_cell().map(|cell| {
        format!(
            "frequency coverage gap: the modulation translates of the window spectrum \
             vanish on the cell of {} (Delta_0 = 0), so no bound applies",
            fq.grid.freq_point(cell)
        )
    });
    CertificateReport {
        schema_version: json::SCHEMA_VERSION,
        window: window.cloned(),
        lattice: fq.lattice,
        grid: GridJson::from_grid(&fq.grid),
        normalization: norm,
        scalars,
        k_limit: fq.k_limit,
        k_max: fq.k_max,
        theorems: Theorems(bounds),
        oracle: None,
        diagnostic,
    }
}

/// Split the frame energy into the diagonal part `Q1` and the cross
/// terms `Q2` in the frequency domain:
/// `Q1 = |a|^-1 int |fhat|^2 Delta_0`,
/// `Q2 = |a|^-1 sum_{k>=1} int fhat(xi) conj(fhat(xi + s_k)) conj(Lambda_k(xi))`.
pub fn q_decomposition(f: &SampledFunction, sys: &GaborSystem) -> Result<(f64, f64)> {
    let fhat = match f.domain() {
        Domain::Time => fourier_fast(f)?,
        Domain::Frequency => f.clone(),
    };
    let grid = sys.grid();
    if fhat.grid() != grid {
        return Err(Error::InvalidGrid(
            "function and system use different grids".into(),
        ));
    }
    let lattice = sys.lattice();
    let fq = FrameQuantities::from_system(sys)?;
    let lay = Layout::new(grid, lattice)?;
    let w = grid.weight(Domain::Frequency) / fq.normalization();
    let fv = fhat.values();
    let cells = lay.cells;
    let q1: f64 = (0..grid.len())
        .map(|xi| fv[xi].norm_sqr() * fq.delta[0][xi % cells])
        .sum::<f64>()
        * w;
    let q2: Complex64 = (1..fq.k_limit)
        .into_par_iter()
        .map(|k| {
            let shift = k * lay.shift_stride;
            (0..grid.len())
                .map(|xi| fv[xi] * fv[grid.add(xi, shift)].conj() * fq.lambda[k][xi % cells].conj())
                .sum::<Complex64>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum::<Complex64>()
        * w;
    Ok((q1, q2.re))
}
