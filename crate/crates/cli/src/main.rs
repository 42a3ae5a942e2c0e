//! `kcopy`: command-line front end.

mod ensemble_file;
mod reproduce;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use kcopy::bounds::{
    epsilon_design_lower, minimal_design_size, mixed_lower, mixed_upper, pure_upper, rebit_lower_so2, rebit_lower_sod,
    BoundKind, BoundValue,
};
use kcopy::classical::{cap_exact, optimal_classical_ensemble, Optimality};
use kcopy::discrim::{discriminability, discriminability_gram, pgm};
use kcopy::dps::{build_relaxation, solve_built, RelaxationConfig};
use kcopy::qcore::bloch_vector;
use kcopy::search::{search, Method, SearchClass, SearchConfig};
use serde::Serialize;

use ensemble_file::EnsembleFile;
use reproduce::{reproduce, Budget};

#[derive(Parser)]
#[command(name = "kcopy", version, about = "Multi-copy state discrimination")]
struct Cli {
    /// Print values with 17 significant digits.
    #[arg(long, global = true)]
    exact: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal success probability of an ensemble file.
    Discr {
        file: PathBuf,
        #[arg(long)]
        k: usize,
        /// Use the Gram-matrix formulation (pure states only).
        #[arg(long)]
        gram: bool,
        /// Only evaluate the pretty-good measurement.
        #[arg(long)]
        pgm_only: bool,
    },
    /// Closed-form or relaxation bounds on the best ensemble.
    Bound {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        k: usize,
        /// Extension count for the relaxation.
        #[arg(long, default_value_t = 0)]
        ell: usize,
        /// Restrict the relaxation to pure states.
        #[arg(long)]
        pure: bool,
        /// Restrict the relaxation to real states.
        #[arg(long)]
        rebit: bool,
        /// Approximation parameter for `eps-design`.
        #[arg(long)]
        eps: Option<f64>,
        /// Pure value at `N-1` states for the mixed lower bound.
        #[arg(long)]
        reference: Option<f64>,
        /// Write the relaxation in the sparse text format.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Search for good ensembles.
    Search {
        #[arg(long, value_enum)]
        class: ClassArg,
        #[arg(long, value_enum, default_value_t = MethodArg::Adam)]
        method: MethodArg,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        restarts: Option<usize>,
        /// Polar grid steps.
        #[arg(long)]
        resolution: Option<usize>,
        /// Trace output (JSON lines).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Where to write the best ensemble (stdout when absent).
        #[arg(long)]
        save: Option<PathBuf>,
    },
    /// Recompute a result table and compare with the tabulated values.
    Reproduce {
        #[arg(long)]
        table: u8,
        #[arg(long, value_enum, default_value_t = BudgetArg::Quick)]
        budget: BudgetArg,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Total copies `k + ℓ` for the relaxation table.
        #[arg(long, default_value_t = reproduce::DEFAULT_LEVEL)]
        level: usize,
    },
    /// Bloch vectors of a qubit ensemble file, as JSON.
    ExportBloch { file: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Pure,
    Mixed,
    Classical,
    Rebit,
    EpsDesign,
    Dps,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassArg {
    Pure,
    Mixed,
    Real,
    RealPure,
    Classical,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Grid,
    Adam,
}

#[derive(Clone, Copy, ValueEnum)]
enum BudgetArg {
    Quick,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

/// Failure classes with their exit codes.
enum Failure {
    Parse(anyhow::Error),
    Solver(anyhow::Error),
    Mismatch(usize),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast_ref::<kcopy::Error>() {
            Some(kcopy::Error::Solver(_) | kcopy::Error::Sdp(_) | kcopy::Error::NonFinite) => Failure::Solver(e),
            _ => Failure::Parse(e),
        }
    }
}

impl From<kcopy::Error> for Failure {
    fn from(e: kcopy::Error) -> Self {
        Failure::from(anyhow::Error::from(e))
    }
}

struct Printer {
    exact: bool,
}

impl Printer {
    fn num(&self, v: f64) -> String {
        if self.exact {
            format!("{v:.16e}")
        } else {
            format!("{v:.6}")
        }
    }

    fn bound(&self, name: &str, b: &BoundValue) {
        let kind = match b.kind {
            BoundKind::Upper => "upper",
            BoundKind::Lower => "lower",
            BoundKind::Exact => "exact",
        };
        println!("{name}: {} ({kind})", self.num(b.value));
        println!("  derivation: {}", b.derivation);
        for a in &b.assumptions {
            println!("  assumption: {a}");
        }
    }
}

fn read_ensemble(path: &PathBuf) -> Result<kcopy::qcore::Ensemble, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Parse(anyhow::anyhow!("{}: {e}", path.display())))?;
    let file = EnsembleFile::parse(&text).map_err(|e| Failure::Parse(e.context(path.display().to_string())))?;
    file.to_ensemble().map_err(Failure::Parse)
}

fn cmd_discr(p: &Printer, file: &PathBuf, k: usize, gram: bool, pgm_only: bool) -> Result<(), Failure> {
    let e = read_ensemble(file)?;
    if pgm_only {
        let (_, value) = pgm(&e, k)?;
        println!("pgm value: {}", p.num(value));
        return Ok(());
    }
    if gram {
        let r = discriminability_gram(&e, k)?;
        println!("value: {}", p.num(r.value));
        println!("dual value: {}", p.num(r.dual_value));
        println!("gap: {:.3e}", (r.dual_value - r.value).max(0.0));
        println!("status: {}", r.status);
        return Ok(());
    }
    let r = discriminability(&e, k)?;
    println!("value: {}", p.num(r.value));
    println!("dual value: {}", p.num(r.dual_value));
    println!("certified upper: {}", p.num(r.certified_upper));
    println!("gap: {:.3e}", (r.certified_upper - r.value).max(0.0));
    println!("certificate margin: {:.3e}", r.certified_upper - r.dual_value);
    println!("status: {}", r.status);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_bound(
    p: &Printer,
    family: Family,
    d: usize,
    n: usize,
    k: usize,
    ell: usize,
    pure: bool,
    rebit: bool,
    eps: Option<f64>,
    reference: Option<f64>,
    dump: Option<&PathBuf>,
) -> Result<(), Failure> {
    match family {
        Family::Pure => p.bound("pure", &pure_upper(d, n, k)?),
        Family::Mixed => {
            p.bound("mixed upper", &mixed_upper(d, n, k)?);
            let reference = match reference {
                Some(r) => Some(r),
                None if n >= 2 && minimal_design_size(d, k).is_some_and(|m| n - 1 >= m) => {
                    Some(pure_upper(d, n - 1, k)?.value)
                }
                None => None,
            };
            if let Some(r) = reference {
                p.bound("mixed lower", &mixed_lower(d, n, k, r)?);
            }
        }
        Family::Classical => {
            let r = optimal_classical_ensemble(d, n, k)?;
            let c = cap_exact(d, k);
            let kind = match r.optimality {
                Optimality::Capacity | Optimality::Exact => BoundKind::Exact,
                Optimality::Heuristic => BoundKind::Lower,
            };
            let b = BoundValue {
                value: r.value,
                kind,
                assumptions: vec![
                    "classical states".into(),
                    format!("capacity {c} = {}", p.num(kcopy::classical::cap(d, k))),
                    format!("optimizer: {:?}", r.optimality).to_lowercase(),
                ],
                derivation: "optimal classical ensemble",
            };
            p.bound("classical", &b);
        }
        Family::Rebit => {
            let b = if d == 2 { rebit_lower_so2(n, k)? } else { rebit_lower_sod(d, n, k)? };
            p.bound("rebit", &b);
        }
        Family::EpsDesign => {
            let eps = eps.ok_or_else(|| Failure::Parse(anyhow::anyhow!("--eps is required for eps-design")))?;
            p.bound("eps-design", &epsilon_design_lower(d, n, k, eps)?);
        }
        Family::Dps => {
            if d != 2 {
                return Err(Failure::Parse(anyhow::anyhow!("the relaxation is implemented for qubits only")));
            }
            let cfg = RelaxationConfig::new(n, k, ell).pure(pure).rebit(rebit);
            let rel = build_relaxation(&cfg)?;
            if let Some(path) = dump {
                std::fs::write(path, rel.problem.dump()).map_err(|e| Failure::Parse(e.into()))?;
            }
            let (b, _) = solve_built(&cfg, &rel)?;
            p.bound("dps", &b.bound);
            println!("  status: {}, iterations {}, inner value {}", b.status, b.iterations, p.num(b.inner_value));
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_search(
    p: &Printer,
    class: ClassArg,
    method: MethodArg,
    d: usize,
    n: usize,
    k: usize,
    seed: u64,
    iterations: Option<usize>,
    restarts: Option<usize>,
    resolution: Option<usize>,
    out: Option<&PathBuf>,
    save: Option<&PathBuf>,
) -> Result<(), Failure> {
    let class = match class {
        ClassArg::Pure => SearchClass::Pure,
        ClassArg::Mixed => SearchClass::Mixed,
        ClassArg::Real => SearchClass::Real,
        ClassArg::RealPure => SearchClass::RealPure,
        ClassArg::Classical => SearchClass::Classical,
    };
    let method = match method {
        MethodArg::Grid => Method::Grid,
        MethodArg::Adam => Method::Adam,
    };
    let mut cfg = SearchConfig::new(class, d, n, k, method);
    cfg.adam.seed = seed;
    if let Some(it) = iterations {
        cfg.adam.iterations = it;
    }
    if let Some(r) = restarts {
        cfg.adam.restarts = r;
    }
    if let Some(r) = resolution {
        cfg.resolution = r;
        cfg.azimuth_resolution = 2 * r;
    }
    let r = search(&cfg)?;
    println!("value: {}", p.num(r.value));
    println!("raw value: {}", p.num(r.raw_value));
    if let Some(g) = r.certificate_gap {
        println!("certificate gap: {g:.3e}");
    }
    if r.partial {
        println!("note: candidate budget exhausted, result is partial");
    }
    if let Some(path) = out {
        let f = std::fs::File::create(path).map_err(|e| Failure::Parse(e.into()))?;
        r.write_trace(std::io::BufWriter::new(f)).map_err(|e| Failure::Parse(e.into()))?;
    }
    let json = EnsembleFile::from_ensemble(&r.ensemble).to_json();
    match save {
        Some(path) => std::fs::write(path, json).map_err(|e| Failure::Parse(e.into()))?,
        None => println!("{json}"),
    }
    Ok(())
}

fn cmd_reproduce(table: u8, budget: BudgetArg, format: Format, out: Option<&PathBuf>, level: usize) -> Result<(), Failure> {
    let threads = std::env::var("KCOPY_THREADS").ok().and_then(|s| s.parse().ok()).unwrap_or(1);
    let budget = match budget {
        BudgetArg::Quick => Budget::Quick,
        BudgetArg::Full => Budget::Full,
    };
    let report = reproduce(table, budget, threads, level).map_err(Failure::Parse)?;
    let text = match format {
        Format::Text => report.to_text(),
        Format::Csv => report.to_csv(),
        Format::Json => serde_json::to_string_pretty(&report).expect("plain data serializes"),
    };
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Parse(e.into()))?,
        None => print!("{text}"),
    }
    match report.failures() {
        0 => Ok(()),
        n => Err(Failure::Mismatch(n)),
    }
}

#[derive(Serialize)]
struct BlochPoint {
    x: f64,
    y: f64,
    z: f64,
    r: f64,
}

#[derive(Serialize)]
struct BlochExport {
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    points: Vec<BlochPoint>,
}

fn cmd_export_bloch(file: &PathBuf) -> Result<(), Failure> {
    let e = read_ensemble(file)?;
    if e.d != 2 {
        return Err(Failure::Parse(anyhow::anyhow!("Bloch vectors need qubit states (d = 2)")));
    }
    let points = e
        .states
        .iter()
        .map(|s| {
            let [x, y, z] = bloch_vector(&s.density())?;
            Ok(BlochPoint { x, y, z, r: (x * x + y * y + z * z).sqrt() })
        })
        .collect::<kcopy::Result<Vec<_>>>()?;
    let out = BlochExport { label: e.label.clone(), points };
    println!("{}", serde_json::to_string_pretty(&out).expect("plain data serializes"));
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let p = Printer { exact: cli.exact };
    match cli.command {
        Command::Discr { file, k, gram, pgm_only } => cmd_discr(&p, &file, k, gram, pgm_only),
        Command::Bound { family, d, n, k, ell, pure, rebit, eps, reference, dump } => {
            cmd_bound(&p, family, d, n, k, ell, pure, rebit, eps, reference, dump.as_ref())
        }
        Command::Search { class, method, d, n, k, seed, iterations, restarts, resolution, out, save } => cmd_search(
            &p,
            class,
            method,
            d,
            n,
            k,
            seed,
            iterations,
            restarts,
            resolution,
            out.as_ref(),
            save.as_ref(),
        ),
        Command::Reproduce { table, budget, format, out, level } => {
            cmd_reproduce(table, budget, format, out.as_ref(), level)
        }
        Command::ExportBloch { file } => cmd_export_bloch(&file),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Parse(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Solver(e)) => {
            eprintln!("solver failure: {e:#}");
            ExitCode::from(3)
        }
        Err(Failure::Mismatch(n)) => {
            eprintln!("{n} rows differ from the tabulated values");
            ExitCode::from(4)
        }
    }
}
