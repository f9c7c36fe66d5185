//! Dense Hermitian eigenvalues and an iterative extremal solver.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Row-major square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Matrix {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::Numerical(format!(
                "matrix data has {} entries, expected {}",
                data.len(),
                dim * dim
            )));
        }
        Ok(Matrix { dim, data })
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `max |A_ij - conj(A_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

/// Reduce a Hermitian matrix to a real symmetric tridiagonal one with the
/// same spectrum. Returns (diagonal, off-diagonal magnitudes).
fn tridiagonalize(a: &Matrix) -> (Vec<f64>, Vec<f64>) {
    let n = a.dim;
    let mut a = a.clone();
    let mut off = Vec::with_capacity(n.saturating_sub(1));
    for k in 0..n.saturating_sub(1) {
        let norm = (k + 1..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        let x0 = a[(k + 1, k)];
        if norm == 0.0 || (k + 2 == n) {
            off.push(x0.norm());
            continue;
        }
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm;
        // v = x - alpha e1, normalized
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        v[0] -= alpha;
        let vn = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vn == 0.0 {
            off.push(x0.norm());
            continue;
        }
        for z in v.iter_mut() {
            *z /= vn;
        }
        let m = n - k - 1;
        // p = A22 v, w = p - (v^H p) v
        let p: Vec<Complex64> = (0..m)
            .map(|i| (0..m).map(|j| a[(k + 1 + i, k + 1 + j)] * v[j]).sum())
            .collect();
        let kk: Complex64 = v.iter().zip(&p).map(|(vi, pi)| vi.conj() * pi).sum();
        let w: Vec<Complex64> = p.iter().zip(&v).map(|(pi, vi)| pi - kk.re * vi).collect();
        for i in 0..m {
            for j in 0..m {
                let upd = v[i] * w[j].conj() + w[i] * v[j].conj();
                a[(k + 1 + i, k + 1 + j)] -= 2.0 * upd;
            }
        }
        a[(k + 1, k)] = alpha;
        a[(k, k + 1)] = alpha.conj();
        for i in k + 2..n {
            a[(i, k)] = ZERO;
            a[(k, i)] = ZERO;
        }
        off.push(alpha.norm());
    }
    let diag = (0..n).map(|i| a[(i, i)].re).collect();
    (diag, off)
}

/// Implicit QL on a symmetric tridiagonal matrix. `off[i]` couples `i` and
/// `i + 1`. With `vectors`, column `j` of the returned matrix (row-major,
/// `n x n`) is the eigenvector of eigenvalue `j`. Output is unsorted.
pub(crate) fn tridiagonal_eigen(
    diag: &[f64],
    off: &[f64],
    vectors: bool,
) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.resize(n, 0.0);
    let mut z = vectors.then(|| {
        let mut z = vec![0.0; n * n];
        for i in 0..n {
            z[i * n + i] = 1.0;
        }
        z
    });
    // floor for deflation next to zero eigenvalues, where `dd` vanishes
    let floor = f64::EPSILON
        * f64::EPSILON
        * d.iter()
            .zip(&e)
            .map(|(a, b)| a.abs() + b.abs())
            .fold(0.0, f64::max);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() <= floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 64 {
                return Err(Error::Numerical(
                    "tridiagonal QL iteration did not converge".into(),
                ));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_mut() {
                    for k in 0..n {
                        let f = z[k * n + i + 1];
                        z[k * n + i + 1] = s * z[k * n + i] + c * f;
                        z[k * n + i] = c * z[k * n + i] - s * f;
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok((d, z))
}

/// Full spectrum of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(a: &Matrix) -> Result<Vec<f64>> {
    let (diag, off) = tridiagonalize(a);
    let (mut vals, _) = tridiagonal_eigen(&diag, &off, false)?;
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// Full spectrum by cyclic complex Jacobi rotations, ascending. Slower;
/// kept as an independent second route.
pub fn jacobi_eigenvalues(a: &Matrix) -> Result<Vec<f64>> {
    let n = a.dim;
    let mut a = a.clone();
    let scale = a.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let off_norm = |a: &Matrix| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };
    for _sweep in 0..100 {
        if off_norm(&a) <= 1e-15 * scale.max(f64::MIN_POSITIVE) {
            let mut vals: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
            vals.sort_by(f64::total_cmp);
            return Ok(vals);
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let abs = apq.norm();
                if abs == 0.0 {
                    continue;
                }
                let (app, aqq) = (a[(p, p)].re, a[(q, q)].re);
                let theta = (aqq - app) / (2.0 * abs);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + theta.hypot(1.0))
                };
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;
                // unitary on (p, q): columns (c, -s d) and (s, c d), d = conj(phase)
                let d = (apq / abs).conj();
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * d * akq;
                    a[(k, q)] = s * akp + c * d * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * d.conj() * aqk;
                    a[(q, k)] = s * apk + c * d.conj() * aqk;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)].im = 0.0;
                a[(q, q)].im = 0.0;
            }
        }
    }
    Err(Error::Numerical("Jacobi sweeps did not converge".into()))
}

/// Extreme eigenvalues of a Hermitian positive semidefinite operator given
/// only through `apply`, by Lanczos with full reorthogonalization. Stops
/// once both extreme Ritz pairs have residual at most `tol * max|theta|`.
pub fn lanczos_extremes(
    dim: usize,
    apply: impl Fn(&[Complex64]) -> Vec<Complex64>,
    tol: f64,
    seed: u64,
) -> Result<(f64, f64)> {
    let dot = |x: &[Complex64], y: &[Complex64]| -> Complex64 {
        x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
    };
    let norm = |x: &[Complex64]| dot(x, x).re.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let n0 = norm(&v);
    v.iter_mut().for_each(|z| *z /= n0);
    let mut basis: Vec<Vec<Complex64>> = vec![v];
    let (mut alphas, mut betas) = (Vec::new(), Vec::new());
    loop {
        let j = basis.len() - 1;
        let mut w = apply(&basis[j]);
        let alpha = dot(&basis[j], &w).re;
        alphas.push(alpha);
        for _ in 0..2 {
            for b in &basis {
                let h = dot(b, &w);
                w.iter_mut().zip(b).for_each(|(wi, bi)| *wi -= h * bi);
            }
        }
        let beta = norm(&w);
        let steps = alphas.len();
        if steps % 8 == 0 || beta == 0.0 || steps == dim {
            let (vals, vecs) = tridiagonal_eigen(&alphas, &betas, true)?;
            let vecs = vecs.expect("vectors requested");
            let (lo, hi) = extreme_positions(&vals);
            let scale = vals[hi].abs().max(vals[lo].abs()).max(f64::MIN_POSITIVE);
            let resid = |i: usize| beta * vecs[(steps - 1) * steps + i].abs();
            let exact = beta <= tol * scale || steps == dim;
            if exact || (resid(lo) <= tol * scale && resid(hi) <= tol * scale) {
                return Ok((vals[lo], vals[hi]));
            }
        }
        betas.push(beta);
        w.iter_mut().for_each(|z| *z /= beta);
        basis.push(w);
    }
}

fn extreme_positions(vals: &[f64]) -> (usize, usize) {
    let mut lo = 0;
    let mut hi = 0;
    for (i, &v) in vals.iter().enumerate() {
        if v < vals[lo] {
            lo = i;
        }
        if v > vals[hi] {
            hi = i;
        }
    }
    (lo, hi)
}
