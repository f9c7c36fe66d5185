//! Exact frame bounds of the finite system from its frame operator.

mod eigen;
mod random;

pub use eigen::{hermitian_eigenvalues, jacobi_eigenvalues, lanczos_extremes, Matrix};
pub use random::{random_case, random_function, random_window, RandomCase};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::certify::CertificateReport;
use crate::error::Result;
use crate::gabor::{analysis_coeffs, GaborSystem};
use crate::json;
use crate::transform::{Domain, SampledFunction};

/// Largest dimension decomposed densely.
pub const DENSE_LIMIT: usize = 1024;

/// Slack allowed when comparing certified bounds with the spectrum.
pub const BRACKET_TOL: f64 = 1e-8;

/// Relative threshold below which the smallest eigenvalue counts as zero.
pub const FRAME_TOL: f64 = 1e-9;

/// `S = sum_{m,n} |g_mn><g_mn|` in the Haar-weighted inner product, as a
/// matrix on time-cell values: `S_ij = w sum g_mn[i] conj(g_mn[j])`.
pub fn frame_operator(sys: &GaborSystem) -> Matrix {
    let grid = sys.grid();
    let dim = grid.len();
    let w = grid.weight(Domain::Time);
    let r = sys.ranges();
    let atoms: Vec<Vec<Complex64>> = (0..r.m_count)
        .flat_map(|m| (0..r.n_count).map(move |n| (m, n)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(m, n)| sys.atom(m, n).into_values())
        .collect();
    let rows: Vec<Vec<Complex64>> = (0..dim)
        .into_par_iter()
        .map(|i| {
            (0..dim)
                .map(|j| atoms.iter().map(|a| a[i] * a[j].conj()).sum::<Complex64>() * w)
                .collect()
        })
        .collect();
    Matrix::from_rows(dim, rows.concat()).expect("square by construction")
}

/// `S f` without forming the matrix: analysis followed by synthesis.
pub fn apply_frame_operator(sys: &GaborSystem, f: &[Complex64]) -> Vec<Complex64> {
    let grid = sys.grid();
    let f = SampledFunction::new(grid, Domain::Time, f.to_vec()).expect("length matches grid");
    let table = analysis_coeffs(&f, sys).expect("time-domain input on the system grid");
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    for m in 0..table.m_count {
        for n in 0..table.n_count {
            let c = table.get(m, n);
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (o, a) in out.iter_mut().zip(sys.atom(m, n).values()) {
                *o += c * a;
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    #[serde(rename = "Amin", serialize_with = "json::ser_f64")]
    pub a_min: f64,
    #[serde(rename = "Bmax", serialize_with = "json::ser_f64")]
    pub b_max: f64,
    pub dim: usize,
    #[serde(rename = "isFrame")]
    pub is_frame: bool,
    /// Full ascending spectrum when the dense path ran.
    #[serde(skip)]
    pub spectrum: Option<Vec<f64>>,
}

impl OracleResult {
    fn from_extremes(a_min: f64, b_max: f64, dim: usize, spectrum: Option<Vec<f64>>) -> Self {
        // S is positive semidefinite; anything below zero is rounding
        let a_min = a_min.max(0.0);
        OracleResult {
            a_min,
            b_max,
            dim,
            is_frame: a_min > FRAME_TOL * b_max,
            spectrum,
        }
    }
}

/// Extreme eigenvalues of `S`, ascending spectrum endpoints.
pub fn extreme_eigenvalues(s: &Matrix) -> Result<(f64, f64)> {
    let vals = hermitian_eigenvalues(s)?;
    Ok((
        vals.first().copied().unwrap_or(0.0),
        vals.last().copied().unwrap_or(0.0),
    ))
}

/// Dense decomposition up to [`DENSE_LIMIT`], Lanczos beyond.
pub fn run_oracle(sys: &GaborSystem) -> Result<OracleResult> {
    let dim = sys.grid().len();
    if dim <= DENSE_LIMIT {
        let vals = hermitian_eigenvalues(&frame_operator(sys))?;
        let (lo, hi) = (vals[0], vals[dim - 1]);
        Ok(OracleResult::from_extremes(lo, hi, dim, Some(vals)))
    } else {
        let (lo, hi) = lanczos_extremes(dim, |x| apply_frame_operator(sys, x), 1e-10, 0)?;
        Ok(OracleResult::from_extremes(lo, hi, dim, None))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub bound: &'static str,
    /// `Amin - C/|a|`; negative beyond tolerance is a violation.
    #[serde(rename = "lowerMargin", serialize_with = "json::ser_f64")]
    pub lower_margin: f64,
    /// `D/|a| - Bmax`.
    #[serde(rename = "upperMargin", serialize_with = "json::ser_f64")]
    pub upper_margin: f64,
    pub ok: bool,
}

/// Oracle block embedded in a certificate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSection {
    #[serde(flatten)]
    pub result: OracleResult,
    /// `None` when no bound applied.
    pub bracketed: Option<bool>,
    pub checks: Vec<BoundCheck>,
    pub verdict: String,
}

impl OracleSection {
    pub fn violations(&self) -> impl Iterator<Item = &BoundCheck> {
        self.checks.iter().filter(|c| !c.ok)
    }
}

/// Compare every applicable bound with the spectrum.
pub fn check_certificate(report: &CertificateReport, result: &OracleResult) -> OracleSection {
    let checks: Vec<BoundCheck> = report
        .theorems
        .iter()
        .filter(|(_, b)| b.applicable)
        .map(|(kind, b)| {
            let lower_margin = result.a_min - b.lower;
            let upper_margin = b.upper - result.b_max;
            BoundCheck {
                bound: kind.name(),
                lower_margin,
                upper_margin,
                ok: lower_margin >= -BRACKET_TOL && upper_margin >= -BRACKET_TOL,
            }
        })
        .collect();
    let (bracketed, verdict) = if checks.is_empty() {
        (None, "no applicable theorem".to_string())
    } else {
        let bad: Vec<&str> = checks.iter().filter(|c| !c.ok).map(|c| c.bound).collect();
        if bad.is_empty() {
            (
                Some(true),
                "all applicable bounds bracket the spectrum".to_string(),
            )
        } else {
            (
                Some(false),
                format!("spectrum escapes the {} bound", bad.join(", ")),
            )
        }
    };
    OracleSection {
        result: result.clone(),
        bracketed,
        checks,
        verdict,
    }
}
