//! Seeded random windows and test cases.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::{Field, LocalFieldElement};
use crate::gabor::{LatticeParams, WindowSpec, WindowTerm};
use crate::transform::{Domain, GridSpec, SampledFunction};

/// Largest grid a random case uses.
const CASE_MAX_LEN: usize = 81;

fn random_coeff(rng: &mut ChaCha8Rng, scale: f64) -> Complex64 {
    let re = rng.gen_range(-1.0..1.0) * scale;
    if rng.gen_bool(0.5) {
        Complex64::new(re, 0.0)
    } else {
        Complex64::new(re, rng.gen_range(-1.0..1.0) * scale)
    }
}

fn random_term(rng: &mut ChaCha8Rng, grid: &GridSpec, domain: Domain, scale: f64) -> WindowTerm {
    let (support, resolution) = match domain {
        Domain::Time => (-(grid.m() as i32), grid.n() as i32),
        Domain::Frequency => (-(grid.n() as i32), grid.m() as i32),
    };
    let k = rng.gen_range(support..=resolution);
    let h = grid.point(domain, rng.gen_range(0..grid.len()));
    WindowTerm {
        k,
        h,
        coeff: random_coeff(rng, scale),
    }
}

/// A window of 1 to `budget.clamp(1, 4)` terms, valid on `grid`.
pub fn random_window(grid: &GridSpec, seed: u64, budget: usize) -> WindowSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let domain = if rng.gen_bool(0.5) {
        Domain::Time
    } else {
        Domain::Frequency
    };
    let count = rng.gen_range(1..=budget.clamp(1, 4));
    let terms = (0..count)
        .map(|_| random_term(&mut rng, grid, domain, 1.0))
        .collect();
    WindowSpec { domain, terms }
}

pub fn random_function(grid: &GridSpec, seed: u64) -> SampledFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SampledFunction::from_fn(grid, Domain::Time, |_| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

#[derive(Debug, Clone)]
pub struct RandomCase {
    pub seed: u64,
    pub grid: GridSpec,
    pub lattice: LatticeParams,
    pub window: WindowSpec,
}

/// A grid, lattice and window drawn from `seed`. Most windows are a
/// frequency ball matched to the modulation lattice plus smaller random
/// terms, so a fair share of cases pass the gates; the rest are arbitrary.
/// Seeds divisible by 5 use `a = p` when the grid allows it.
pub fn random_case(field: &Field, seed: u64) -> RandomCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let q = field.q() as usize;
    let mut max_digits = 0u32;
    while q.pow(max_digits + 1) <= CASE_MAX_LEN {
        max_digits += 1;
    }
    let max_digits = max_digits.max(2);
    let total = rng.gen_range(2..=max_digits);
    let m = rng.gen_range(1..total);
    let n = total - m;
    let grid = GridSpec::new(field, m, n).expect("small grid");
    let (mi, ni) = (m as i32, n as i32);
    let s = if seed.is_multiple_of(5) {
        1.min(ni)
    } else {
        rng.gen_range(-mi..=ni)
    };
    let excess = [0, 0, 0, 1, 1, 2, -1][rng.gen_range(0..7)];
    let t = (excess - s).clamp(-ni, mi);
    let lattice = LatticeParams::new(s, t);

    let window = if rng.gen_bool(0.7) {
        let anchor = WindowTerm {
            k: t,
            h: LocalFieldElement::zero(field, grid.precision()),
            coeff: random_coeff(&mut rng, 1.0) * 0.5 + Complex64::new(1.0, 0.0),
        };
        let scale = [0.05, 0.15, 0.3, 0.6][rng.gen_range(0..4)];
        let extra = rng.gen_range(0..=3);
        let mut terms = vec![anchor];
        terms.extend((0..extra).map(|_| random_term(&mut rng, &grid, Domain::Frequency, scale)));
        WindowSpec {
            domain: Domain::Frequency,
            terms,
        }
    } else {
        random_window(&grid, rng.gen(), 4)
    };
    RandomCase {
        seed,
        grid,
        lattice,
        window,
    }
}
