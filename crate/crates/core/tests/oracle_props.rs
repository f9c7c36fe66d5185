use lfgabor::field::{FieldParams, LocalFieldElement};
use lfgabor::gabor::{frame_energy, GaborSystem, LatticeParams, WindowSpec, WindowTerm};
use lfgabor::oracle::{
    extreme_eigenvalues, frame_operator, hermitian_eigenvalues, jacobi_eigenvalues, random_case,
    random_function, run_oracle, Matrix,
};
use lfgabor::transform::{Domain, GridSpec};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unit_ball_system(p: u32, c: u32, m: u32, n: u32) -> GaborSystem {
    let f = FieldParams::new(p, c).unwrap();
    let g = GridSpec::new(&f, m, n).unwrap();
    let spec = WindowSpec {
        domain: Domain::Time,
        terms: vec![WindowTerm {
            k: 0,
            h: LocalFieldElement::zero(&f, 16),
            coeff: Complex64::new(1.0, 0.0),
        }],
    };
    GaborSystem::from_spec(&spec, &g, LatticeParams::new(0, 0)).unwrap()
}

#[test]
fn parseval_for_orthonormal_bases() {
    for (p, c, m, n) in [(2, 1, 2, 2), (3, 1, 1, 2), (2, 2, 1, 1), (5, 1, 1, 1)] {
        let res = run_oracle(&unit_ball_system(p, c, m, n)).unwrap();
        for v in res.spectrum.unwrap() {
            assert!((v - 1.0).abs() <= 1e-10, "({p},{c}) eigenvalue {v}");
        }
    }
}

#[test]
fn trivial_matrices() {
    assert_eq!(
        extreme_eigenvalues(&Matrix::identity(7)).unwrap(),
        (1.0, 1.0)
    );
    let diag = Matrix::diagonal(&[0.0, 0.0, 0.0, 2.0]);
    assert_eq!(extreme_eigenvalues(&diag).unwrap(), (0.0, 2.0));
}

#[test]
fn rayleigh_quotients_stay_inside_the_spectrum() {
    let f = FieldParams::new(2, 1).unwrap();
    let case = random_case(&f, 17);
    let sys = GaborSystem::from_spec(&case.window, &case.grid, case.lattice).unwrap();
    let res = run_oracle(&sys).unwrap();
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for seed in 0..10_000u64 {
        let x = random_function(&case.grid, seed);
        let r = frame_energy(&x, &sys).unwrap() / x.norm_sqr();
        assert!(
            r >= res.a_min - 1e-9 && r <= res.b_max + 1e-9,
            "{r} outside [{}, {}]",
            res.a_min,
            res.b_max
        );
        lo = lo.min(r);
        hi = hi.max(r);
    }
    assert!(lo > res.a_min - 1e-6 && hi < res.b_max + 1e-6);
}

#[test]
fn rayleigh_quotients_on_the_corpus() {
    for (p, c) in [(2, 1), (3, 1)] {
        let f = FieldParams::new(p, c).unwrap();
        for seed in 0..30u64 {
            let case = random_case(&f, seed);
            let sys = GaborSystem::from_spec(&case.window, &case.grid, case.lattice).unwrap();
            let res = run_oracle(&sys).unwrap();
            let tol = 1e-9 * res.b_max.max(1.0);
            for probe in 0..50u64 {
                let x = random_function(&case.grid, probe * 1000 + seed);
                let r = frame_energy(&x, &sys).unwrap() / x.norm_sqr();
                assert!(r >= res.a_min - tol && r <= res.b_max + tol);
            }
        }
    }
}

fn conjugate(s: &Matrix, perm: &[usize], phase: &[Complex64]) -> Matrix {
    // (U S U^-1)_{ij} with U e_j = phase[j] e_{perm[j]}
    let n = s.dim();
    let mut out = Matrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            out[(perm[i], perm[j])] = phase[i] * s[(i, j)] * phase[j].conj();
        }
    }
    out
}

#[test]
fn spectrum_is_invariant_under_system_shifts() {
    for (p, seed) in [(2, 4u64), (3, 5)] {
        let f = FieldParams::new(p, 1).unwrap();
        let case = random_case(&f, seed);
        let sys = GaborSystem::from_spec(&case.window, &case.grid, case.lattice).unwrap();
        let g = &case.grid;
        let s = frame_operator(&sys);
        let base = hermitian_eigenvalues(&s).unwrap();
        let r = sys.ranges();
        let n = r.n_count - 1;
        let m = r.m_count - 1;
        let perm: Vec<usize> = (0..g.len())
            .map(|j| g.add(j, n * r.translation_stride))
            .collect();
        let phase: Vec<Complex64> = (0..g.len())
            .map(|j| {
                g.field()
                    .root(g.pairing_exponent(m * r.modulation_stride, j))
            })
            .collect();
        let ones = vec![Complex64::new(1.0, 0.0); g.len()];
        let ident: Vec<usize> = (0..g.len()).collect();
        for conj in [conjugate(&s, &perm, &ones), conjugate(&s, &ident, &phase)] {
            assert!(conj.max_abs_diff(&s) < 1e-12);
            let vals = hermitian_eigenvalues(&conj).unwrap();
            for (a, b) in vals.iter().zip(&base) {
                assert!((a - b).abs() <= 1e-9);
            }
        }
    }
}

#[test]
fn two_eigensolvers_agree_on_frame_operators() {
    let f = FieldParams::new(3, 1).unwrap();
    for seed in 0..6u64 {
        let case = random_case(&f, seed);
        let sys = GaborSystem::from_spec(&case.window, &case.grid, case.lattice).unwrap();
        let s = frame_operator(&sys);
        assert!(s.hermitian_defect() <= 1e-12);
        let a = hermitian_eigenvalues(&s).unwrap();
        let b = jacobi_eigenvalues(&s).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-9 * b.last().unwrap().max(1.0));
        }
        // trace of S is the total atom energy
        let trace: f64 = (0..s.dim()).map(|i| s[(i, i)].re).sum();
        let atoms = (sys.ranges().m_count * sys.ranges().n_count) as f64;
        let w = case.grid.weight(Domain::Time);
        assert!((trace * w - atoms * sys.window().norm_sqr() * w).abs() <= 1e-9 * trace.max(1.0));
    }
}

#[test]
fn iterative_path_matches_dense_extremes() {
    let f = FieldParams::new(2, 1).unwrap();
    let g = GridSpec::new(&f, 3, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let window = lfgabor::transform::SampledFunction::from_fn(&g, Domain::Frequency, |i| {
        if i < 16 {
            Complex64::new(1.0 + rng.gen_range(0.0..0.3), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let sys = GaborSystem::new(window, LatticeParams::new(0, 1)).unwrap();
    let dense = run_oracle(&sys).unwrap();
    let (lo, hi) = lfgabor::oracle::lanczos_extremes(
        g.len(),
        |x| lfgabor::oracle::apply_frame_operator(&sys, x),
        1e-10,
        1,
    )
    .unwrap();
    assert!((lo.max(0.0) - dense.a_min).abs() < 1e-8);
    assert!((hi - dense.b_max).abs() < 1e-8);
}
