//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use lfgabor::certify::{
    compute_delta_k, compute_scalars, delta_k_at, gate, lambda_k_at, q_decomposition, shift_index,
    FrameQuantities,
};
use lfgabor::cli::{case_seed, chain_outcome};
use lfgabor::field::{u, Field, FieldParams, LocalFieldElement};
use lfgabor::gabor::{frame_energy, GaborSystem, LatticeParams, WindowSpec, WindowTerm};
use lfgabor::oracle::{check_certificate, random_case, random_function, run_oracle, RandomCase};
use lfgabor::transform::{
    fourier_fast, fourier_naive, inverse_fourier, inverse_fourier_naive, Domain, GridSpec,
};
use num_complex::Complex64;
use rayon::prelude::*;

const CORPUS_SEED: u64 = 0;
const CORPUS_SIZE: usize = 200;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn field(p: u32, c: u32) -> Field {
    FieldParams::new(p, c).unwrap()
}

fn ball(domain: Domain, f: &Field, k: i32) -> WindowSpec {
    WindowSpec {
        domain,
        terms: vec![WindowTerm {
            k,
            h: LocalFieldElement::zero(f, 16),
            coeff: Complex64::new(1.0, 0.0),
        }],
    }
}

fn character_gram() -> Outcome {
    const L: u32 = 3;
    let mut worst = 0.0f64;
    let mut slowest = 0.0f64;
    for (p, c) in [(2, 1), (3, 1), (2, 2)] {
        let start = Instant::now();
        let f = field(p, c);
        let q = f.q() as u64;
        let size = q.pow(L) as usize;
        // representatives of the integers modulo p^L
        let points: Vec<LocalFieldElement> = (0..size as u64)
            .map(|x| {
                let terms: Vec<(i32, u32)> = (0..L)
                    .map(|i| (i as i32, ((x / q.pow(i)) % q) as u32))
                    .collect();
                LocalFieldElement::from_terms(&f, &terms, 2 * L as i32)
            })
            .collect();
        let table: Vec<Vec<Complex64>> = (0..size as u64)
            .map(|n| {
                let un = u(&f, n, 2 * L as i32);
                points.iter().map(|x| (&un * x).chi()).collect()
            })
            .collect();
        let w = 1.0 / size as f64;
        for a in 0..size {
            for b in 0..size {
                let g: Complex64 = table[a]
                    .iter()
                    .zip(&table[b])
                    .map(|(x, y)| x * y.conj())
                    .sum::<Complex64>()
                    * w;
                let want = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((g - want).norm());
            }
        }
        slowest = slowest.max(start.elapsed().as_secs_f64());
    }
    outcome(
        worst <= 1e-12 && slowest < 1.0,
        format!("max deviation {worst:.2e}, slowest field {slowest:.3}s"),
    )
}

fn all_small_grids() -> Vec<GridSpec> {
    let mut grids = Vec::new();
    for (p, c) in [(2, 1), (3, 1), (2, 2), (5, 1), (2, 3), (3, 2)] {
        let f = field(p, c);
        let q = f.q() as usize;
        for digits in 0u32.. {
            if q.pow(digits) > 4096 {
                break;
            }
            for m in 0..=digits {
                grids.push(GridSpec::new(&f, m, digits - m).unwrap());
            }
        }
    }
    grids
}

fn transforms() -> Outcome {
    let grids = all_small_grids();
    let errors: Vec<(f64, f64, f64)> = grids
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            let f = random_function(g, 1000 + i as u64);
            let fh = fourier_fast(&f).unwrap();
            let planch = (fh.norm_sqr() - f.norm_sqr()).abs() / f.norm_sqr().max(1.0);
            let round = inverse_fourier(&fh).unwrap().max_abs_diff(&f);
            let mut naive = fh.max_abs_diff(&fourier_naive(&f).unwrap());
            if g.len() <= 1024 {
                let back = inverse_fourier(&fh).unwrap();
                naive = naive.max(back.max_abs_diff(&inverse_fourier_naive(&fh).unwrap()));
            }
            (planch, round, naive)
        })
        .collect();
    let fold = |sel: fn(&(f64, f64, f64)) -> f64| errors.iter().map(sel).fold(0.0, f64::max);
    let (planch, round, naive) = (fold(|e| e.0), fold(|e| e.1), fold(|e| e.2));

    let g = GridSpec::new(&field(2, 1), 6, 6).unwrap();
    let f = random_function(&g, 7);
    let t = Instant::now();
    let slow = fourier_naive(&f).unwrap();
    let naive_time = t.elapsed().as_secs_f64();
    let mut fast_time = f64::INFINITY;
    let mut fast = None;
    for _ in 0..5 {
        let t = Instant::now();
        fast = Some(fourier_fast(&f).unwrap());
        fast_time = fast_time.min(t.elapsed().as_secs_f64());
    }
    let agree = fast.unwrap().max_abs_diff(&slow);
    let speedup = naive_time / fast_time;
    outcome(
        planch <= 1e-12 && round <= 1e-12 && naive <= 1e-10 && agree <= 1e-10 && speedup >= 20.0 && fast_time < 1.0,
        format!(
            "{} grids: plancherel {planch:.1e}, round trip {round:.1e}, fast vs naive {naive:.1e} (inverse up to D=1024); \
             D=4096 fast {fast_time:.2e}s naive {naive_time:.2e}s speedup {speedup:.0}x",
            grids.len()
        ),
    )
}

fn orthonormal_basis() -> Outcome {
    let f = field(2, 1);
    let g = GridSpec::new(&f, 2, 2).unwrap();
    let spec = ball(Domain::Time, &f, 0);
    let sys = GaborSystem::from_spec(&spec, &g, LatticeParams::new(0, 0)).unwrap();
    let fq = FrameQuantities::from_system(&sys).unwrap();
    let s = compute_scalars(&fq);
    // adding zero clears the sign of -0.0 for display
    let got = [s.alpha0, s.beta, s.gamma, s.mu, s.sigma].map(|v| v + 0.0);
    let scalars_ok = got
        .iter()
        .zip([1.0, 0.0, 1.0, 0.0, 0.0])
        .all(|(a, b)| (a - b).abs() <= 1e-12);
    let report = gate(&fq, Some(&spec));
    let gates_ok = report
        .theorems
        .iter()
        .all(|(_, b)| b.applicable && (b.c - 1.0).abs() <= 1e-12 && (b.d - 1.0).abs() <= 1e-12);
    let spectrum = run_oracle(&sys).unwrap().spectrum.unwrap();
    let spread = spectrum.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    outcome(
        scalars_ok && gates_ok && spread <= 1e-9,
        format!(
            "scalars {got:?}, gates pass with C=D=1: {gates_ok}, |eigenvalue - 1| <= {spread:.1e}"
        ),
    )
}

/// Everything the corpus criteria need from one case.
struct CaseResult {
    case: RandomCase,
    chain_ok: bool,
    ordering_ok: bool,
    applicable: bool,
    violations: usize,
    /// `Some((brackets with |a|, brackets with 1/|a|))` for gated `s = 1` cases.
    calibration: Option<(bool, bool)>,
}

fn corpus_fields() -> [(u32, u32); 2] {
    [(2, 1), (3, 1)]
}

fn corpus() -> Vec<CaseResult> {
    let cases: Vec<RandomCase> = corpus_fields()
        .iter()
        .flat_map(|&(p, c)| {
            let f = field(p, c);
            (0..CORPUS_SIZE).map(move |i| random_case(&f, case_seed(CORPUS_SEED, i)))
        })
        .collect();
    cases
        .into_par_iter()
        .map(|case| {
            let sys = GaborSystem::from_spec(&case.window, &case.grid, case.lattice).unwrap();
            let fq = FrameQuantities::from_system(&sys).unwrap();
            let chain = chain_outcome(&fq);
            let report = gate(&fq, Some(&case.window));
            let applicable = report.theorems.any_applicable();
            let (violations, calibration) = if applicable {
                let res = run_oracle(&sys).unwrap();
                let section = check_certificate(&report, &res);
                let calibration = (case.lattice.s == 1).then(|| {
                    let brackets = |scale: f64| {
                        report
                            .theorems
                            .iter()
                            .filter(|(_, b)| b.applicable)
                            .all(|(_, b)| {
                                res.a_min >= b.c * scale - 1e-8 && res.b_max <= b.d * scale + 1e-8
                            })
                    };
                    let abs_a = sys.abs_a();
                    (brackets(1.0 / abs_a), brackets(abs_a))
                });
                (section.violations().count(), calibration)
            } else {
                (0, None)
            };
            CaseResult {
                case,
                chain_ok: chain.chain_ok,
                ordering_ok: chain.ordering_ok,
                applicable,
                violations,
                calibration,
            }
        })
        .collect()
}

fn remark_chain(results: &[CaseResult]) -> Outcome {
    let chain = results.iter().filter(|r| !r.chain_ok).count();
    let order = results.iter().filter(|r| !r.ordering_ok).count();
    outcome(
        chain == 0 && order == 0,
        format!(
            "{} cases over (2,1), (3,1): {chain} chain and {order} ordering violations",
            results.len()
        ),
    )
}

fn soundness(results: &[CaseResult]) -> Outcome {
    let gated = results.iter().filter(|r| r.applicable).count();
    let violations: usize = results.iter().map(|r| r.violations).sum();
    let cal: Vec<(bool, bool)> = results.iter().filter_map(|r| r.calibration).collect();
    let direct = cal.iter().filter(|c| c.0).count();
    let reciprocal_fails = cal.iter().filter(|c| !c.1).count();
    outcome(
        violations == 0 && !cal.is_empty() && direct == cal.len() && reciprocal_fails > 0,
        format!(
            "{gated} gated cases, {violations} violations; s=1 calibration: {direct}/{} bracket with |a|, \
             {reciprocal_fails} escape with the reciprocal",
            cal.len()
        ),
    )
}

fn non_frame() -> Outcome {
    let f = field(2, 1);
    let g = GridSpec::new(&f, 1, 1).unwrap();
    let spec = ball(Domain::Frequency, &f, -1);
    let sys = GaborSystem::from_spec(&spec, &g, LatticeParams::new(0, 0)).unwrap();
    let fq = FrameQuantities::from_system(&sys).unwrap();
    let report = gate(&fq, Some(&spec));
    let res = run_oracle(&sys).unwrap();
    let none = !report.theorems.any_applicable();
    outcome(
        none && res.a_min <= 1e-9 * res.b_max && !res.is_frame,
        format!(
            "gates fail: {none}, Amin {:.2e}, Bmax {:.2e}, isFrame {}",
            res.a_min, res.b_max, res.is_frame
        ),
    )
}

fn decomposition() -> Outcome {
    let fields = [field(2, 1), field(3, 1), field(2, 2)];
    let mut worst = 0.0f64;
    let mut sandwich_ok = true;
    for i in 0..50u64 {
        let case = random_case(&fields[(i % 3) as usize], 5000 + i);
        let sys = GaborSystem::from_spec(&case.window, &case.grid, case.lattice).unwrap();
        let f = random_function(&case.grid, 9000 + i);
        let (q1, q2) = q_decomposition(&f, &sys).unwrap();
        let energy = frame_energy(&f, &sys).unwrap();
        worst = worst.max((q1 + q2 - energy).abs());
        let s = compute_scalars(&FrameQuantities::from_system(&sys).unwrap());
        let norm = f.norm_sqr() / sys.abs_a();
        sandwich_ok &= s.gamma * norm <= q1 + 1e-8
            && q1 <= s.alpha0 * norm + 1e-8
            && q2.abs() <= s.mu.min(s.sigma) * norm + 1e-8;
    }
    outcome(
        worst <= 1e-8 && sandwich_ok,
        format!("50 pairs: max |Q1 + Q2 - energy| {worst:.1e}, sandwiches hold: {sandwich_ok}"),
    )
}

#[derive(Default)]
struct Symmetry {
    periodicity_worst: f64,
    literal_bad: usize,
    generalized_bad: usize,
    pairs: usize,
}

fn invariants_for(case: &RandomCase) -> Symmetry {
    let sys = GaborSystem::from_spec(&case.window, &case.grid, case.lattice).unwrap();
    let fq = FrameQuantities::from_system(&sys).unwrap();
    let gh = sys.window_hat();
    let g = &case.grid;
    let lat = case.lattice;
    let r = sys.ranges();
    let peak = fq.alpha[0].max(1.0);
    let mut out = Symmetry::default();
    for k in 0..fq.k_limit {
        let fund = compute_delta_k(gh, lat, k).unwrap();
        for xi in 0..g.len() {
            let base = delta_k_at(gh, lat, k, xi).unwrap();
            let mut err = (base - fund[xi % fund.len()]).abs();
            for l in 1..r.m_count {
                let moved = delta_k_at(gh, lat, k, g.add(xi, l * r.modulation_stride)).unwrap();
                err = err.max((moved - base).abs());
            }
            out.periodicity_worst = out.periodicity_worst.max(err / peak);
        }
    }
    let stride = shift_index(g, lat, 1).unwrap_or(1);
    for k in 1..fq.k_limit {
        let sk = shift_index(g, lat, k).unwrap();
        // index of the reflected shift -a^-1 u(k)
        let j = g.neg(sk) / stride;
        for xi in 0..g.len() {
            let lhs = lambda_k_at(gh, lat, k, g.sub(xi, sk)).unwrap().norm();
            let same = lambda_k_at(gh, lat, k, xi).unwrap().norm();
            let reflected = lambda_k_at(gh, lat, j, xi).unwrap().norm();
            out.pairs += 1;
            out.literal_bad += usize::from((lhs - same).abs() > 1e-12 * peak);
            out.generalized_bad += usize::from((lhs - reflected).abs() > 1e-12 * peak);
        }
    }
    out
}

fn golden_stable() -> (bool, String) {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let mut mismatches = Vec::new();
    for name in ["onb", "nonframe", "two_term"] {
        for cmd in ["certify", "oracle"] {
            let run = || {
                Command::new(env!("CARGO_BIN_EXE_lfgabor"))
                    .env_remove("LFGABOR_CONFIG")
                    .env_remove("LFGABOR_OUT")
                    .arg("--config")
                    .arg(dir.join(format!("{name}.json")))
                    .arg(cmd)
                    .output()
                    .map(|o| o.stdout)
                    .unwrap_or_default()
            };
            let want =
                std::fs::read(dir.join(format!("golden/{name}.{cmd}.json"))).unwrap_or_default();
            let (a, b) = (run(), run());
            if a != b || a != want {
                mismatches.push(format!("{name}.{cmd}"));
            }
        }
    }
    let ok = mismatches.is_empty();
    (
        ok,
        if ok {
            "6 golden files stable".into()
        } else {
            format!("golden mismatch: {}", mismatches.join(", "))
        },
    )
}

fn invariant_suite(results: &[CaseResult]) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (p, c) in corpus_fields() {
        let stats: Vec<Symmetry> = results
            .par_iter()
            .filter(|r| r.case.grid.field().p() == p && r.case.grid.field().c() == c)
            .map(|r| invariants_for(&r.case))
            .collect();
        let periodic = stats
            .iter()
            .map(|s| s.periodicity_worst)
            .fold(0.0, f64::max);
        let pairs: usize = stats.iter().map(|s| s.pairs).sum();
        let literal: usize = stats.iter().map(|s| s.literal_bad).sum();
        let generalized: usize = stats.iter().map(|s| s.generalized_bad).sum();
        ok &= periodic <= 1e-12 && literal == 0;
        parts.push(format!(
            "({p},{c}) periodicity {periodic:.1e}, |Lambda_k(xi - s_k)| = |Lambda_k(xi)| fails on \
             {literal}/{pairs} pairs, the form with the reflected index on {generalized}"
        ));
    }
    let (golden, msg) = golden_stable();
    ok &= golden;
    parts.push(msg);
    outcome(ok, parts.join("; "))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut failed = 0;
    let mut report = |n: u32, name: &str, o: Outcome| {
        failed += usize::from(!o.ok);
        println!(
            "{} {n} {name}: {}",
            if o.ok { "PASS" } else { "FAIL" },
            o.detail
        );
    };
    report(1, "character orthonormality", character_gram());
    report(2, "transform unitarity and speed", transforms());
    report(3, "orthonormal basis certificate", orthonormal_basis());
    let results = corpus();
    report(4, "scalar chain and bound ordering", remark_chain(&results));
    report(5, "certificate soundness", soundness(&results));
    report(6, "non-frame detection", non_frame());
    report(7, "energy decomposition", decomposition());
    report(8, "invariant suite", invariant_suite(&results));
    println!("{failed} failed, {:.1}s", start.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
