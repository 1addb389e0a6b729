//! Command-line front end. The binary only forwards `std::env::args` to
//! [`run`], so every command is also callable (and testable) in-process.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::discrepancy::{l2_warnock, lp_quadrature, star_disc_exact_2d, star_disc_grid, DiscrepancyError};
use crate::expectation::{expected_lp, expected_lp_empirical, ExpectationError};
use crate::geometry::{Family, GeometryError, Partition, PartitionSpec};
use crate::io::{self, IoError};
use crate::optimize::{minimize_family, scan, OptimizeError, OptimizeOptions, ScanSpec};
use crate::rng::{Purpose, SeedSpec};
use crate::sampling::{sample_mc, sample_stratified, SamplingError};
use crate::tables::{reproduce_table1, reproduce_table2, TABLE1_N};
use crate::uniformity::uniformity_sweep;
use crate::verify::{run_suite, Suite};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "STRATDISC_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Args(#[from] clap::Error),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Discrepancy(#[from] DiscrepancyError),
    #[error(transparent)]
    Expectation(#[from] ExpectationError),
    #[error(transparent)]
    Optimize(#[from] OptimizeError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Parser)]
#[command(name = "stratdisc", version, about = "Stratified sampling and discrepancy toolkit")]
pub struct Cli {
    /// Master seed; every random draw is a function of it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct PartitionArgs {
    /// Partition spec file (JSON).
    #[arg(long, conflicts_with = "family")]
    pub partition: Option<PathBuf>,
    /// Named family: diag, equivolume_diag, equidistant_diag, vertical, jittered.
    #[arg(long)]
    pub family: Option<Family>,
    /// Number of strata (for jittered, N = m^dim).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Cut distances for the diag family, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub v: Option<Vec<f64>>,
}

impl PartitionArgs {
    fn spec(&self) -> Result<PartitionSpec, CliError> {
        if let Some(path) = &self.partition {
            return Ok(io::read_partition_spec(io::open(path)?)?);
        }
        let family = self
            .family
            .ok_or_else(|| CliError::Usage("give --partition FILE or --family".into()))?;
        if family == Family::Diag {
            let v = self
                .v
                .clone()
                .ok_or_else(|| CliError::Usage("the diag family needs --v".into()))?;
            return Ok(PartitionSpec::diag(v));
        }
        let n = self.n.ok_or_else(|| CliError::Usage("--n is required".into()))?;
        Ok(PartitionSpec {
            family,
            dim: self.dim,
            n,
            v: None,
        })
    }

    fn build(&self) -> Result<Partition, CliError> {
        Ok(self.spec()?.build()?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DiscKind {
    L2,
    Lp,
    Star,
    StarGrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScanExample {
    #[value(name = "2")]
    Two,
    #[value(name = "3")]
    Three,
    N3,
    N3Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Geometry,
    PartitionPrinciple,
    ConjectureFactor2,
    All,
}

#[derive(Debug, Subcommand)]
pub enum Table {
    Table1 {
        #[arg(long, default_value_t = 500)]
        replicates: usize,
        /// Quadrature resolution for the expected-value columns.
        #[arg(long, default_value_t = 1024)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Table2 {
        #[arg(long, default_value_t = 20)]
        runs: usize,
        /// Lattice resolution for d >= 3 (default: largest within 2^22 cells).
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a stratified (or Monte Carlo) sample; writes CSV.
    Sample {
        #[command(flatten)]
        part: PartitionArgs,
        /// Plain Monte Carlo with --n points in --dim dimensions.
        #[arg(long)]
        mc: bool,
        /// Index of the first replicate.
        #[arg(long, default_value_t = 0)]
        replicate: u64,
        /// Number of replicates; more than one needs --out DIR.
        #[arg(long, default_value_t = 1)]
        replicates: u64,
        /// Output file, or a directory receiving `replicate_<r>.csv` files.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Discrepancy of a point set read from CSV; writes JSON.
    Disc {
        #[arg(long)]
        points: PathBuf,
        #[arg(long, value_enum, default_value_t = DiscKind::L2)]
        kind: DiscKind,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 1024)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Expected discrepancy of a partition; writes JSON.
    Expect {
        #[command(flatten)]
        part: PartitionArgs,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 1024)]
        grid: usize,
        /// Average over this many stratified samples instead of integrating.
        #[arg(long)]
        empirical: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimise expected discrepancy over diagonal cut vectors; writes JSON.
    Optimize {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 1024)]
        grid: usize,
        #[arg(long, default_value_t = 16)]
        restarts: usize,
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
        #[arg(long, default_value_t = 400)]
        max_iter: usize,
        /// Extra starting cut vector, comma separated.
        #[arg(long, value_delimiter = ',')]
        start: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Objective curves; writes CSV.
    Scan {
        #[arg(long, value_enum)]
        example: ScanExample,
        /// Fixed first parameter for the n3 curve.
        #[arg(long, default_value_t = 0.7255)]
        a: f64,
        #[arg(long, default_value_t = 201)]
        points: usize,
        /// Quadrature resolution (adds a quadrature column to n3).
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Uniform-distribution diagnostics of a family over a box list; writes CSV.
    Uniformity {
        #[arg(long)]
        family: Family,
        /// CSV with columns lo1..lod, hi1..hid.
        #[arg(long)]
        boxes: PathBuf,
        /// `a..b` (inclusive) or a comma list.
        #[arg(long)]
        n: String,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Regenerate a benchmark table as CSV.
    Reproduce {
        #[command(subcommand)]
        table: Table,
    },
    /// Run self-checks; exit status 1 if any fails.
    Verify {
        #[arg(value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
        #[arg(long, default_value_t = 512)]
        grid: usize,
    },
}

/// Everything needed to rerun a command.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub seed: u64,
    pub version: &'static str,
    pub outputs: Vec<String>,
    pub threads: usize,
    pub wall_clock_secs: f64,
}

/// Parses `a..b` (inclusive) or `a,b,c`. For the jittered family a range
/// keeps only perfect `dim`-th powers.
pub fn parse_n_list(text: &str, family: Family, dim: usize) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::Usage(format!("cannot parse N list `{text}`"));
    if let Some((a, b)) = text.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        let keep = |n: &usize| {
            family != Family::Jittered || {
                let m = (*n as f64).powf(1.0 / dim as f64).round() as usize;
                m.pow(dim as u32) == *n
            }
        };
        return Ok((a.max(1)..=b).filter(keep).collect());
    }
    text.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect()
}

struct Output {
    path: Option<PathBuf>,
    written: Vec<String>,
}

impl Output {
    fn new(path: Option<PathBuf>) -> Self {
        Self {
            path,
            written: Vec::new(),
        }
    }

    fn emit_to(&mut self, path: &Path, bytes: &[u8]) -> Result<(), CliError> {
        io::create(path)?.write_all(bytes).map_err(|source| IoError::File {
            path: path.display().to_string(),
            source,
        })?;
        self.written.push(path.display().to_string());
        Ok(())
    }

    fn emit(&mut self, bytes: &[u8], stdout: &mut dyn Write) -> Result<(), CliError> {
        match self.path.clone() {
            Some(p) => self.emit_to(&p, bytes)?,
            None => stdout.write_all(bytes).map_err(|source| IoError::File {
                path: "<stdout>".into(),
                source,
            })?,
        }
        Ok(())
    }
}

fn csv_bytes<S: AsRef<str>>(header: &[S], rows: &[Vec<f64>]) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    io::write_table(header, rows, &mut buf)?;
    Ok(buf)
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut buf = serde_json::to_vec_pretty(value)?;
    buf.push(b'\n');
    Ok(buf)
}

fn is_dir_target(path: &Path) -> bool {
    path.is_dir() || path.as_os_str().to_string_lossy().ends_with(std::path::MAIN_SEPARATOR)
}

fn manifest_path(out: &Path) -> PathBuf {
    if out.is_dir() {
        return out.join("manifest.json");
    }
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|s| s.parse::<usize>().ok()) {
        // a second call (e.g. from tests) finds the pool already built
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Runs one command line, writing primary output to `stdout` when no
/// `--out` is given. Returns the process exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> Result<i32, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    configure_threads();
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let cli = Cli::try_parse_from(&args)?;
    let started = Instant::now();
    let seed = cli.seed;
    let mut status = 0;
    let (name, mut out) = match cli.command {
        Command::Sample {
            part,
            mc,
            replicate,
            replicates,
            out,
        } => {
            let partition = if mc { None } else { Some(part.build()?) };
            let draw = |r: u64| -> Result<Vec<u8>, CliError> {
                let ps = match &partition {
                    None => {
                        let n = part.n.ok_or_else(|| CliError::Usage("--mc needs --n".into()))?;
                        sample_mc(n, part.dim, SeedSpec::new(seed, Purpose::MonteCarlo, r))?
                    }
                    Some(p) => sample_stratified(p, SeedSpec::new(seed, Purpose::Stratified, r))?,
                };
                let mut buf = Vec::new();
                io::write_points(&ps, &mut buf)?;
                Ok(buf)
            };
            let to_dir = out.as_deref().is_some_and(is_dir_target) || replicates > 1;
            let mut o = Output::new(out);
            if to_dir {
                let dir = o
                    .path
                    .clone()
                    .ok_or_else(|| CliError::Usage("--replicates > 1 needs --out DIR".into()))?;
                std::fs::create_dir_all(&dir).map_err(|source| IoError::File {
                    path: dir.display().to_string(),
                    source,
                })?;
                for r in replicate..replicate + replicates {
                    o.emit_to(&dir.join(format!("replicate_{r:04}.csv")), &draw(r)?)?;
                }
            } else {
                o.emit(&draw(replicate)?, stdout)?;
            }
            ("sample", o)
        }
        Command::Disc {
            points,
            kind,
            p,
            grid,
            out,
        } => {
            let ps = io::read_points(io::open(&points)?)?;
            let res = match kind {
                DiscKind::L2 => l2_warnock(&ps)?,
                DiscKind::Lp => lp_quadrature(&ps, p, grid)?,
                DiscKind::Star => star_disc_exact_2d(&ps)?,
                DiscKind::StarGrid => star_disc_grid(&ps, grid)?,
            };
            let mut o = Output::new(out);
            o.emit(&json_bytes(&res)?, stdout)?;
            ("disc", o)
        }
        Command::Expect {
            part,
            p,
            grid,
            empirical,
            out,
        } => {
            let partition = part.build()?;
            let res = match empirical {
                Some(m) => expected_lp_empirical(&partition, p, m, SeedSpec::new(seed, Purpose::Stratified, 0), grid)?,
                None => expected_lp(&partition, p, grid)?,
            };
            let mut o = Output::new(out);
            o.emit(&json_bytes(&res)?, stdout)?;
            ("expect", o)
        }
        Command::Optimize {
            n,
            p,
            grid,
            restarts,
            tol,
            max_iter,
            start,
            out,
        } => {
            let opts = OptimizeOptions {
                restarts,
                tol,
                max_iter,
                grid,
                seed,
                starts: start.into_iter().collect(),
            };
            let res = minimize_family(n, p, &opts)?;
            let mut o = Output::new(out);
            o.emit(&json_bytes(&res)?, stdout)?;
            ("optimize", o)
        }
        Command::Scan {
            example,
            a,
            points,
            grid,
            p,
            out,
        } => {
            let spec = match example {
                ScanExample::Two => ScanSpec::Example2 { points },
                ScanExample::Three => ScanSpec::Example3 { points },
                ScanExample::N3 => ScanSpec::N3FixedA { a, points, grid },
                ScanExample::N3Grid => ScanSpec::N3Grid {
                    points,
                    p,
                    grid: grid.unwrap_or(256),
                },
            };
            let table = scan(&spec)?;
            let mut o = Output::new(out);
            o.emit(&csv_bytes(&table.header, &table.rows)?, stdout)?;
            ("scan", o)
        }
        Command::Uniformity {
            family,
            boxes,
            n,
            dim,
            out,
        } => {
            let boxes = io::read_boxes(io::open(&boxes)?)?;
            let ns = parse_n_list(&n, family, dim)?;
            let reports = uniformity_sweep(family, &boxes, &ns, dim)?;
            let header = [
                "box",
                "N",
                "volume",
                "a_N",
                "inside_frac",
                "straddle_frac",
                "avg_diameter",
                "gap_trend",
            ];
            let rows: Vec<Vec<f64>> = reports
                .iter()
                .enumerate()
                .flat_map(|(k, r)| {
                    r.rows.iter().map(move |row| {
                        vec![
                            k as f64,
                            row.n as f64,
                            r.volume,
                            row.a_n,
                            row.inside_frac,
                            row.straddle_frac,
                            row.avg_diameter,
                            r.gap_trend.unwrap_or(f64::NAN),
                        ]
                    })
                })
                .collect();
            let mut o = Output::new(out);
            o.emit(&csv_bytes(&header, &rows)?, stdout)?;
            ("uniformity", o)
        }
        Command::Reproduce { table } => match table {
            Table::Table1 { replicates, grid, out } => {
                if replicates < 100 {
                    return Err(CliError::Usage("table 1 needs --replicates >= 100".into()));
                }
                let rows = reproduce_table1(&TABLE1_N, replicates, seed, grid)?;
                let values: Vec<Vec<f64>> = rows.iter().map(|r| r.values()).collect();
                let mut o = Output::new(out);
                o.emit(&csv_bytes(&crate::tables::Table1Row::HEADER, &values)?, stdout)?;
                ("reproduce table1", o)
            }
            Table::Table2 { runs, grid, out } => {
                if runs < 20 {
                    return Err(CliError::Usage("table 2 needs --runs >= 20".into()));
                }
                let rows = reproduce_table2(runs, seed, grid)?;
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record([
                    "d",
                    "N",
                    "sampler",
                    "mean",
                    "se",
                    "runs",
                    "resolution",
                    "published",
                    "status",
                ])
                .map_err(IoError::from)?;
                for r in &rows {
                    w.write_record([
                        r.d.to_string(),
                        r.n.to_string(),
                        r.sampler.as_str().to_string(),
                        io::fmt_f64(r.mean),
                        io::fmt_f64(r.se),
                        r.runs.to_string(),
                        r.resolution.map_or(String::new(), |g| g.to_string()),
                        r.published.map_or(String::new(), io::fmt_f64),
                        if r.exact { "exact" } else { "approximate (grid)" }.to_string(),
                    ])
                    .map_err(IoError::from)?;
                }
                let buf = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
                let mut o = Output::new(out);
                o.emit(&buf, stdout)?;
                ("reproduce table2", o)
            }
        },
        Command::Verify { suite, grid } => {
            let suites: Vec<Suite> = match suite {
                SuiteArg::Geometry => vec![Suite::Geometry],
                SuiteArg::PartitionPrinciple => vec![Suite::PartitionPrinciple],
                SuiteArg::ConjectureFactor2 => vec![Suite::ConjectureFactor2],
                SuiteArg::All => Suite::ALL.to_vec(),
            };
            let mut text = String::new();
            for s in suites {
                for c in run_suite(s, grid)? {
                    if !c.passed {
                        status = 1;
                    }
                    text.push_str(&format!("{c}\n"));
                }
            }
            let mut o = Output::new(None);
            o.emit(text.as_bytes(), stdout)?;
            ("verify", o)
        }
    };
    if let Some(path) = out.path.take() {
        let manifest = RunManifest {
            command: name.to_string(),
            args: args.iter().map(|a| a.to_string_lossy().into_owned()).collect(),
            seed,
            version: env!("CARGO_PKG_VERSION"),
            outputs: out.written.clone(),
            threads: rayon::current_num_threads(),
            wall_clock_secs: started.elapsed().as_secs_f64(),
        };
        let mp = manifest_path(&path);
        io::create(&mp)?
            .write_all(&json_bytes(&manifest)?)
            .map_err(|source| IoError::File {
                path: mp.display().to_string(),
                source,
            })?;
    }
    Ok(status)
}
