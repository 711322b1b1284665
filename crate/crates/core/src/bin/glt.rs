//! Experiment runner: one subcommand per table or figure, CSV or JSON out.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use glt_fem::experiments::{self, OutputFormat, DEFAULT_SEED};
use glt_fem::fem::{Family, MeshConfig};
use glt_fem::{Coefficient, Error, Result};

const VALID: &str = "valid (experiment, k, d):
  surface-extrema   k = 1..3, d = 2
  symbol-check      fixed set (f_P2, f_P3, f_Q1..f_Q4)
  assemble          P: k = 1..3, d = 2;  Q: k = 1..4, d = 1 or 2
  distribution      k = 1..3, d = 2
  extremal-scaling  k = 1..3, d = 2
  pcg diag-scaled   k = 1..3, d = 2
  pcg circulant     k = 1..3, d = 2
  weak-cluster      k = 1..3, d = 2
  multigrid         k = 1..4, d = 1 or 2
  tgm-check         k = 1..3, d = 1";

#[derive(Parser)]
#[command(
    name = "glt",
    version,
    about = "Spectral symbol and solver experiments for Lagrangian FEM"
)]
struct Cli {
    /// Directory for artifacts; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Grid points per direction for symbol sampling.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Relative residual tolerance.
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol: f64,
    /// Seed for randomized vectors.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED, value_parser = parse_seed)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Min and max of each eigenvalue surface of f_{P_k}.
    SurfaceExtrema {
        /// Degree; all of 1..3 when omitted.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Determinant identities at random frequencies.
    SymbolCheck {
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Stiffness matrix in Matrix Market format.
    Assemble {
        #[arg(long, value_enum, default_value_t = FamilyArg::P)]
        family: FamilyArg,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 8)]
        n_sub: usize,
        #[arg(long, default_value = "one")]
        a: Coefficient,
    },
    /// Sorted spectrum against the rearranged symbol.
    Distribution {
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 16)]
        n_sub: usize,
        #[arg(long, default_value = "exp_xy")]
        a: Coefficient,
    },
    /// Extremal eigenvalues of A(1, P_k) scaled by N.
    ExtremalScaling {
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[command(flatten)]
        sizes: Sizes,
    },
    /// Preconditioned CG iteration counts.
    Pcg {
        #[arg(long, value_enum)]
        precond: PrecondArg,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value = "exp_xy")]
        a: Coefficient,
        #[command(flatten)]
        sizes: Sizes,
        /// Add wall-clock columns (breaks byte-for-byte reproducibility).
        #[arg(long)]
        timing: bool,
    },
    /// Outliers of the Strang-preconditioned spectrum around 1.
    WeakCluster {
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[command(flatten)]
        sizes: Sizes,
    },
    /// Two-grid and V-cycle iteration counts for Q_k.
    Multigrid {
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long, default_value = "one")]
        a: Coefficient,
        #[command(flatten)]
        sizes: Sizes,
        #[arg(long)]
        timing: bool,
    },
    /// Symbol-level two-grid conditions for f_{Q_k} and p_{Q_k}.
    TgmCheck {
        #[arg(long, default_value_t = 2)]
        k: usize,
    },
}

#[derive(Args)]
struct Sizes {
    /// Comma list (`4,8,16`) or doubling range (`8..512`). Meaning per
    /// experiment: subdivisions per side, or blocks per side for Toeplitz runs.
    #[arg(long, value_parser = parse_sizes)]
    sizes: Option<SizeList>,
}

#[derive(Clone)]
struct SizeList(Vec<usize>);

impl Sizes {
    fn or(&self, default: &[usize]) -> Vec<usize> {
        self.sizes
            .as_ref()
            .map_or_else(|| default.to_vec(), |s| s.0.clone())
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    P,
    Q,
}

#[derive(Clone, Copy, ValueEnum)]
enum PrecondArg {
    /// D^{1/2} A(1) D^{1/2} on A(a, P_k).
    DiagScaled,
    /// Identity, IC(0) and Strang circulant on T_n(f_{P_k}) and its FEM embedding.
    Circulant,
}

fn parse_seed(s: &str) -> std::result::Result<u64, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| e.to_string())
}

fn parse_sizes(s: &str) -> std::result::Result<SizeList, String> {
    let bad = |e: std::num::ParseIntError| e.to_string();
    let v = match s.split_once("..") {
        Some((lo, hi)) => {
            let (lo, hi): (usize, usize) = (lo.parse().map_err(bad)?, hi.parse().map_err(bad)?);
            if lo == 0 || lo > hi {
                return Err(format!("empty range {s}"));
            }
            std::iter::successors(Some(lo), |&n| Some(n * 2))
                .take_while(|&n| n <= hi)
                .collect()
        }
        None => s
            .split(',')
            .map(|t| t.trim().parse().map_err(bad))
            .collect::<std::result::Result<Vec<_>, _>>()?,
    };
    Ok(SizeList(v))
}

fn check(ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Usage(format!("{what}\n{VALID}")))
    }
}

struct Sink {
    dir: Option<PathBuf>,
    format: OutputFormat,
}

impl Sink {
    fn open(&self, stem: &str, ext: &str) -> Result<Box<dyn Write>> {
        Ok(match &self.dir {
            Some(dir) => {
                std::fs::create_dir_all(dir)?;
                Box::new(BufWriter::new(File::create(
                    dir.join(format!("{stem}.{ext}")),
                )?))
            }
            None => Box::new(io::stdout().lock()),
        })
    }

    fn rows<T: Serialize>(&self, stem: &str, rows: &[T]) -> Result<()> {
        let ext = match self.format {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        };
        let mut w = self.open(stem, ext)?;
        experiments::write_rows(rows, self.format, &mut w)?;
        w.flush()?;
        Ok(())
    }
}

fn run(cli: Cli) -> Result<()> {
    let sink = Sink {
        dir: cli.out.clone(),
        format: cli.format.into(),
    };
    let tol = cli.tol;
    match cli.command {
        Command::SurfaceExtrema { k } => {
            let ks = k.map_or_else(|| vec![1, 2, 3], |k| vec![k]);
            check(
                ks.iter().all(|k| (1..=3).contains(k)),
                "surface-extrema needs k in 1..3",
            )?;
            let g = cli.grid.unwrap_or(1024);
            let mut rows = Vec::new();
            for k in ks {
                rows.extend(experiments::surface_extrema_table(k, g)?);
            }
            sink.rows("surface_extrema", &rows)
        }
        Command::SymbolCheck { samples } => sink.rows(
            "symbol_check",
            &experiments::symbol_check(samples, cli.seed)?,
        ),
        Command::Assemble {
            family,
            k,
            d,
            n_sub,
            a,
        } => {
            let cfg = MeshConfig {
                d,
                family: match family {
                    FamilyArg::P => Family::P,
                    FamilyArg::Q => Family::Q,
                },
                k,
                n_sub,
                coefficient: a,
            };
            check(cfg.validate().is_ok(), "assemble: unsupported element")?;
            let mut w = sink.open(
                &format!(
                    "{}{k}_{d}d_n{n_sub}_{}",
                    if matches!(family, FamilyArg::P) {
                        "P"
                    } else {
                        "Q"
                    },
                    a.name()
                ),
                "mtx",
            )?;
            experiments::assemble_to(&cfg, &mut w)?;
            w.flush()?;
            Ok(())
        }
        Command::Distribution { k, n_sub, a } => {
            check((1..=3).contains(&k), "distribution needs k in 1..3")?;
            let (rows, summary) = experiments::distribution_study(k, n_sub, &a, cli.grid)?;
            sink.rows("distribution", &rows)?;
            match &sink.dir {
                Some(_) => sink.rows("distribution_summary", &[summary]),
                None => {
                    eprintln!(
                        "mean_abs = {:.3e}, max_abs = {:.3e}, outlier_fraction = {:.4}",
                        summary.mean_abs, summary.max_abs, summary.outlier_fraction
                    );
                    Ok(())
                }
            }
        }
        Command::ExtremalScaling { k, sizes } => {
            check((1..=3).contains(&k), "extremal-scaling needs k in 1..3")?;
            sink.rows(
                "extremal_scaling",
                &experiments::extremal_scaling(k, &sizes.or(&[8, 16, 32]))?,
            )
        }
        Command::Pcg {
            precond,
            k,
            a,
            sizes,
            timing,
        } => {
            check((1..=3).contains(&k), "pcg needs k in 1..3 (d = 2)")?;
            let rows = match precond {
                PrecondArg::DiagScaled => {
                    let default: &[usize] = if k == 2 {
                        &[4, 8, 16, 32, 64]
                    } else {
                        &[4, 8, 16, 32]
                    };
                    experiments::diag_scaled_table(k, &sizes.or(default), &a, tol, timing)?
                }
                PrecondArg::Circulant => experiments::circulant_table(
                    k,
                    &sizes.or(&[4, 8, 16, 32]),
                    tol,
                    cli.seed,
                    timing,
                )?,
            };
            sink.rows("pcg", &rows)
        }
        Command::WeakCluster { k, eps, sizes } => {
            check((1..=3).contains(&k), "weak-cluster needs k in 1..3")?;
            sink.rows(
                "weak_cluster",
                &experiments::weak_cluster_table(k, &sizes.or(&[4, 8, 16]), eps)?,
            )
        }
        Command::Multigrid {
            k,
            d,
            a,
            sizes,
            timing,
        } => {
            check(
                (1..=4).contains(&k) && (1..=2).contains(&d),
                "multigrid needs k in 1..4, d in 1..2",
            )?;
            let default: &[usize] = if d == 1 {
                &[8, 16, 32, 64, 128, 256, 512]
            } else {
                &[8, 16, 32, 64]
            };
            sink.rows(
                "multigrid",
                &experiments::multigrid_table(k, d, &sizes.or(default), &a, tol, timing)?,
            )
        }
        Command::TgmCheck { k } => {
            check((1..=3).contains(&k), "tgm-check needs k in 1..3")?;
            let report = experiments::tgm_check(k, cli.grid.unwrap_or(512))?;
            match sink.format {
                OutputFormat::Json => sink.rows("tgm_check", &[report]),
                OutputFormat::Csv => {
                    sink.rows("tgm_check", &[experiments::ConditionRow::from(&report)])
                }
            }
        }
    }
}

fn init_threads() {
    let Some(n) = std::env::var("GLT_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    else {
        return;
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(n.max(1))
        .build_global()
    {
        eprintln!("warning: GLT_THREADS ignored: {e}");
    }
}

fn main() -> ExitCode {
    init_threads();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::Usage(_)) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
