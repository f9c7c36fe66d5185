//! Command-line front end.
//!
//! Exit codes: 0 success, 1 a certified bound is contradicted by the
//! oracle, 2 usage or configuration error, 3 numerical failure. Every
//! global flag can also be set through an `LFGABOR_` environment variable
//! (`LFGABOR_CONFIG`, `LFGABOR_OUT`, `LFGABOR_SEED`, `LFGABOR_WORKERS`,
//! `LFGABOR_COUNT`).

mod config;

pub use config::RunConfig;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::certify::{compute_scalars, gate, BoundKind, FrameQuantities};
use crate::error::{Error, Result};
use crate::field::{Field, FieldParams};
use crate::gabor::GaborSystem;
use crate::json;
use crate::oracle::{check_certificate, random_case, random_function, run_oracle};
use crate::transform::{
    fourier_fast, fourier_naive, inverse_fourier, inverse_fourier_naive, Domain, GridSpec,
    SampledFunction,
};

#[derive(Debug, Parser)]
#[command(
    name = "lfgabor",
    version,
    about = "Gabor frame bounds on local fields of positive characteristic"
)]
pub struct Cli {
    /// Run configuration (JSON).
    #[arg(long, global = true, env = "LFGABOR_CONFIG")]
    pub config: Option<PathBuf>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true, env = "LFGABOR_OUT")]
    pub out: Option<PathBuf>,
    /// Seed for randomized commands; overrides the config.
    #[arg(long, global = true, env = "LFGABOR_SEED")]
    pub seed: Option<u64>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "LFGABOR_WORKERS")]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute frame quantities and the resulting bounds for a window.
    Certify,
    /// Certify, then check the bounds against the frame operator spectrum.
    Oracle {
        /// Dump the full spectrum as CSV.
        #[arg(long)]
        spectrum: Option<PathBuf>,
    },
    /// Check the scalar ordering and bound ordering on random windows.
    ChainCheck {
        /// Windows per field.
        #[arg(long, env = "LFGABOR_COUNT")]
        count: Option<usize>,
    },
    /// Fourier transform of a sampled function (JSON, or CSV with --config).
    Transform {
        input: PathBuf,
        /// Use the direct character sum instead of the fast transform.
        #[arg(long)]
        naive: bool,
        #[arg(long)]
        inverse: bool,
        /// Domain of a CSV input.
        #[arg(long, value_enum)]
        domain: Option<DomainArg>,
    },
    /// Time the direct and fast transforms.
    Bench {
        /// Grid sizes D, each a power of q.
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DomainArg {
    Time,
    Frequency,
}

impl From<DomainArg> for Domain {
    fn from(d: DomainArg) -> Domain {
        match d {
            DomainArg::Time => Domain::Time,
            DomainArg::Frequency => Domain::Frequency,
        }
    }
}

/// Exit status for a failed run.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Numerical(_) => 3,
        _ => 2,
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Run a parsed command line; the value is the exit code.
pub fn run(cli: &Cli) -> Result<u8> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(Error::Config("--workers: must be at least 1".into()));
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Certify => cmd_certify(&config, out),
        Command::Oracle { spectrum } => cmd_oracle(&config, out, spectrum.as_deref()),
        Command::ChainCheck { count } => cmd_chain_check(&config, out, cli.seed, *count),
        Command::Transform {
            input,
            naive,
            inverse,
            domain,
        } => cmd_transform(
            &config,
            out,
            input,
            *naive,
            *inverse,
            domain.map(Into::into),
        ),
        Command::Bench { sizes } => cmd_bench(&config, out, sizes, cli.seed),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn build_system(config: &RunConfig, command: &str) -> Result<GaborSystem> {
    let grid = config.require_grid(command)?;
    let lattice = config.require_lattice(command)?;
    let window = config.require_window(command)?;
    GaborSystem::from_spec(window, grid, lattice)
}

fn cmd_certify(config: &RunConfig, out: Option<&Path>) -> Result<u8> {
    let sys = build_system(config, "certify")?;
    let fq = FrameQuantities::from_system(&sys)?;
    let report = gate(&fq, config.window.as_ref());
    emit(out, &report.to_json())?;
    Ok(0)
}

fn cmd_oracle(config: &RunConfig, out: Option<&Path>, spectrum: Option<&Path>) -> Result<u8> {
    let sys = build_system(config, "oracle")?;
    let fq = FrameQuantities::from_system(&sys)?;
    let mut report = gate(&fq, config.window.as_ref());
    let result = run_oracle(&sys)?;
    if let Some(path) = spectrum {
        let vals = result
            .spectrum
            .as_ref()
            .ok_or_else(|| Error::Config("--spectrum: the full spectrum needs D <= 1024".into()))?;
        let mut text = String::from("index,eigenvalue\n");
        for (i, v) in vals.iter().enumerate() {
            text.push_str(&format!("{i},{}\n", json::fixed(*v).get()));
        }
        std::fs::write(path, text)?;
    }
    let section = check_certificate(&report, &result);
    let violated = section.bracketed == Some(false);
    report.oracle = Some(section);
    emit(out, &report.to_json())?;
    Ok(if violated { 1 } else { 0 })
}

#[derive(Serialize)]
struct GatesPassed {
    beta: usize,
    mu: usize,
    sigma: usize,
}

#[derive(Serialize)]
struct FieldSummary {
    p: u32,
    c: u32,
    cases: usize,
    #[serde(rename = "gatesPassed")]
    gates_passed: GatesPassed,
    #[serde(rename = "chainViolations")]
    chain_violations: Vec<u64>,
    #[serde(rename = "orderingViolations")]
    ordering_violations: Vec<u64>,
}

#[derive(Serialize)]
struct ChainSummary {
    #[serde(rename = "schemaVersion")]
    schema_version: u32,
    seed: u64,
    count: usize,
    fields: Vec<FieldSummary>,
    ok: bool,
}

/// Seed of case `i` in a run seeded with `seed`.
pub fn case_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_mul(1 << 20).wrapping_add(i as u64)
}

/// Result of the scalar and bound ordering checks on one case.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainOutcome {
    pub chain_ok: bool,
    pub ordering_ok: bool,
    pub passed: [bool; 3],
}

/// `sigma <= mu <= beta` and, wherever the gates pass, the induced
/// ordering of lower and upper bounds.
pub fn chain_outcome(fq: &FrameQuantities) -> ChainOutcome {
    const SLACK: f64 = 1e-12;
    let s = compute_scalars(fq);
    let chain_ok = s.sigma <= s.mu + SLACK && s.mu <= s.beta + SLACK;
    let report = gate(fq, None);
    let t = |k: BoundKind| *report.theorems.get(k);
    let (b, m, g) = (t(BoundKind::Beta), t(BoundKind::Mu), t(BoundKind::Sigma));
    let mut ordering_ok = true;
    for (lo, hi) in [(b, m), (m, g), (b, g)] {
        if lo.applicable {
            // a weaker cross term must also pass and give bounds at least as good
            ordering_ok &= hi.applicable && lo.c <= hi.c + SLACK && hi.d <= lo.d + SLACK;
        }
    }
    ChainOutcome {
        chain_ok,
        ordering_ok,
        passed: [b.applicable, m.applicable, g.applicable],
    }
}

fn cmd_chain_check(
    config: &RunConfig,
    out: Option<&Path>,
    seed: Option<u64>,
    count: Option<usize>,
) -> Result<u8> {
    let seed = seed.or(config.seed).unwrap_or(0);
    let count = count.or(config.count).unwrap_or(200);
    let fields: Vec<Field> = match &config.field {
        Some(f) => vec![f.clone()],
        None => vec![FieldParams::new(2, 1)?, FieldParams::new(3, 1)?],
    };
    let mut summaries = Vec::new();
    for field in fields {
        let mut summary = FieldSummary {
            p: field.p(),
            c: field.c(),
            cases: count,
            gates_passed: GatesPassed {
                beta: 0,
                mu: 0,
                sigma: 0,
            },
            chain_violations: Vec::new(),
            ordering_violations: Vec::new(),
        };
        for i in 0..count {
            let cs = case_seed(seed, i);
            let case = random_case(&field, cs);
            let sys = GaborSystem::from_spec(&case.window, &case.grid, case.lattice)?;
            let outcome = chain_outcome(&FrameQuantities::from_system(&sys)?);
            summary.gates_passed.beta += outcome.passed[0] as usize;
            summary.gates_passed.mu += outcome.passed[1] as usize;
            summary.gates_passed.sigma += outcome.passed[2] as usize;
            if !outcome.chain_ok {
                summary.chain_violations.push(cs);
            }
            if !outcome.ordering_ok {
                summary.ordering_violations.push(cs);
            }
        }
        summaries.push(summary);
    }
    let ok = summaries
        .iter()
        .all(|s| s.chain_violations.is_empty() && s.ordering_violations.is_empty());
    let summary = ChainSummary {
        schema_version: json::SCHEMA_VERSION,
        seed,
        count,
        fields: summaries,
        ok,
    };
    emit(out, &json::to_string(&summary)?)?;
    Ok(if ok { 0 } else { 1 })
}

fn is_csv(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn cmd_transform(
    config: &RunConfig,
    out: Option<&Path>,
    input: &Path,
    naive: bool,
    inverse: bool,
    domain: Option<Domain>,
) -> Result<u8> {
    let f = if is_csv(input) {
        let grid = config.require_grid("transform of a CSV input")?;
        let domain =
            domain.ok_or_else(|| Error::Config("--domain: required for CSV input".into()))?;
        let file = std::fs::File::open(input)?;
        SampledFunction::read_csv(grid, domain, std::io::BufReader::new(file))?
    } else {
        SampledFunction::from_json(&std::fs::read_to_string(input)?)?
    };
    let g = match (inverse, naive) {
        (false, false) => fourier_fast(&f)?,
        (false, true) => fourier_naive(&f)?,
        (true, false) => inverse_fourier(&f)?,
        (true, true) => inverse_fourier_naive(&f)?,
    };
    match out {
        Some(path) if is_csv(path) => {
            let mut buf = Vec::new();
            g.write_csv(&mut buf)?;
            std::fs::write(path, buf)?;
        }
        _ => emit(out, &g.to_json())?,
    }
    Ok(0)
}

/// Best of several runs, at least `budget` seconds of total work.
fn time_best(budget: f64, mut run: impl FnMut()) -> f64 {
    let start = Instant::now();
    let mut best = f64::INFINITY;
    loop {
        let t = Instant::now();
        run();
        best = best.min(t.elapsed().as_secs_f64());
        if start.elapsed().as_secs_f64() >= budget {
            return best;
        }
    }
}

/// Split `len = q^L` into `M = L / 2`, `N = L - M`.
pub fn bench_grid(field: &Field, len: usize) -> Result<GridSpec> {
    let q = field.q() as usize;
    let mut digits = 0u32;
    let mut size = 1usize;
    while size < len {
        size *= q;
        digits += 1;
    }
    if size != len {
        return Err(Error::Config(format!(
            "sizes: {len} is not a power of q = {q}"
        )));
    }
    GridSpec::new(field, digits / 2, digits - digits / 2)
}

fn cmd_bench(
    config: &RunConfig,
    out: Option<&Path>,
    sizes: &[usize],
    seed: Option<u64>,
) -> Result<u8> {
    let field = match &config.field {
        Some(f) => f.clone(),
        None => FieldParams::new(2, 1)?,
    };
    let sizes: Vec<usize> = if !sizes.is_empty() {
        sizes.to_vec()
    } else {
        config
            .sizes
            .clone()
            .unwrap_or_else(|| vec![256, 1024, 4096])
    };
    let seed = seed.or(config.seed).unwrap_or(0);
    let mut text = String::from("D,naive_seconds,fast_seconds,speedup\n");
    for len in sizes {
        let grid = bench_grid(&field, len)?;
        let f = random_function(&grid, seed);
        let naive = time_best(0.0, || {
            fourier_naive(&f).expect("time domain");
        });
        let fast = time_best(0.2, || {
            fourier_fast(&f).expect("time domain");
        });
        text.push_str(&format!(
            "{len},{},{},{}\n",
            json::fixed(naive).get(),
            json::fixed(fast).get(),
            json::fixed(naive / fast).get()
        ));
    }
    emit(out, &text)?;
    Ok(0)
}
