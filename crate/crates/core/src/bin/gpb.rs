//! Command-line front end: distribution queries plus the accuracy and timing
//! studies.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::json;

use gpb::harness::{
    self, BenchConfig, BenchRecord, BinomialCase, OracleInstance,
};
use gpb::{reduce_gcd, GpbDistribution, GpbError, ParamsFile};

#[derive(Parser)]
#[command(name = "gpb", version, about = "Generalized Poisson-binomial distribution")]
struct Cli {
    /// Emit JSON instead of CSV.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Probability mass at the query points, or over the whole support.
    Pmf {
        #[command(flatten)]
        params: ParamArgs,
        /// Query points, e.g. `6,7` or `6:9`.
        #[arg(long, allow_hyphen_values = true)]
        kk: Option<String>,
    },
    /// Cumulative probability at the query points, or over the whole support.
    Cdf {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, allow_hyphen_values = true)]
        kk: Option<String>,
    },
    /// Smallest support value whose cdf reaches each level.
    Quantile {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        q: Vec<f64>,
    },
    /// Random variates by cdf inversion.
    Sample {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Accuracy studies against exact references.
    Validate {
        #[command(subcommand)]
        study: Study,
    },
    /// Wall-clock cost of the full cdf over an (n, m) grid.
    Bench(BenchArgs),
}

#[derive(Subcommand)]
enum Study {
    /// Compare with exhaustive enumeration (default: eighteen standard settings).
    Oracle {
        /// JSON file: `{"seed": 1, "instances": [{"n":10,"a":10,"b":20,"min_p":0.01,"max_p":0.5}]}`.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Compare with the binomial cdf (default: n in {10,100,1000,10000}, p in {0.01,0.5,0.9}).
    Binomial {
        /// JSON file: `{"cases": [{"n": 10, "p": 0.5}]}`.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Run the extended grid of (n, p) cases, up to n = 100000.
        #[arg(long)]
        full: bool,
        /// Collapse the identical indicators into one weighted term.
        #[arg(long)]
        weighted: bool,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

#[derive(Args)]
struct ParamArgs {
    /// JSON parameter file with keys pp, aval, bval and optional wts, digits.
    #[arg(long, conflicts_with_all = ["pp", "aval", "bval", "wts", "digits"])]
    params: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pp: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    aval: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    bval: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    wts: Option<Vec<u64>>,
    /// Decimal digits to scale aval/bval (and queries) by.
    #[arg(long)]
    digits: Option<u32>,
    /// Divide the support by the gcd of all aval/bval before computing.
    #[arg(long)]
    gcd: bool,
}

impl ParamArgs {
    fn distribution(&self) -> anyhow::Result<GpbDistribution> {
        let file = match &self.params {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                ParamsFile::from_json(&text)?
            }
            None => {
                let (Some(pp), Some(aval), Some(bval)) = (&self.pp, &self.aval, &self.bval) else {
                    bail!(GpbError::Config(
                        "give --params FILE or all of --pp, --aval, --bval".into()
                    ));
                };
                ParamsFile {
                    pp: pp.clone(),
                    aval: aval.clone(),
                    bval: bval.clone(),
                    wts: self.wts.clone(),
                    digits: self.digits,
                }
            }
        };
        let (params, record) = file.build()?;
        if self.gcd {
            let (reduced, gcd_record) = reduce_gcd(&params);
            return Ok(GpbDistribution::with_scaling(reduced, record.then(gcd_record)));
        }
        Ok(GpbDistribution::with_scaling(params, record))
    }
}

#[derive(Args)]
struct BenchArgs {
    /// JSON file with a full bench configuration.
    #[arg(long, conflicts_with_all = ["ns", "ms"])]
    config: Option<PathBuf>,
    /// Indicator counts.
    #[arg(long, value_delimiter = ',')]
    ns: Option<Vec<u64>>,
    /// Support widths; pairs with m < n are left out.
    #[arg(long, value_delimiter = ',')]
    ms: Option<Vec<u64>>,
    #[arg(long)]
    repeats: Option<usize>,
    /// Seconds a single warm-up run may take before the point is skipped.
    #[arg(long)]
    budget: Option<f64>,
    #[arg(long)]
    weighted: bool,
}

impl BenchArgs {
    fn config(&self) -> anyhow::Result<BenchConfig> {
        let mut config = match &self.config {
            Some(path) => serde_json::from_str(&fs::read_to_string(path)?)
                .map_err(|e| GpbError::Config(e.to_string()))?,
            None => BenchConfig::default(),
        };
        if self.ns.is_some() || self.ms.is_some() {
            let ns = self.ns.clone().unwrap_or_else(|| vec![10, 100, 1000]);
            let ms = self
                .ms
                .clone()
                .unwrap_or_else(|| vec![1000, 2000, 5000, 10_000, 20_000, 50_000, 100_000]);
            config.grid = ns
                .iter()
                .flat_map(|&n| ms.iter().filter(move |&&m| m >= n).map(move |&m| (n, m)))
                .collect();
        }
        if let Some(r) = self.repeats {
            config.repeats = r;
        }
        if let Some(b) = self.budget {
            config.budget_secs = b;
        }
        config.weighted |= self.weighted;
        Ok(config)
    }
}

#[derive(Deserialize)]
struct OracleConfig {
    #[serde(default)]
    seed: Option<u64>,
    instances: Vec<OracleInstance>,
}

#[derive(Deserialize)]
struct BinomialConfig {
    cases: Vec<BinomialCase>,
}

const DEFAULT_SEED: u64 = 20_240_601;

/// Parses `6:9`, `1,5,7` and mixtures such as `1:3,10,50.5`.
fn parse_points(spec: &str) -> anyhow::Result<Vec<f64>> {
    let mut out = Vec::new();
    for tok in spec.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        // A leading '-' belongs to the first number, not a range separator.
        if let Some((lo, hi)) = tok.split_once(':') {
            let lo: i64 = lo.trim().parse().with_context(|| format!("bad range start in {tok:?}"))?;
            let hi: i64 = hi.trim().parse().with_context(|| format!("bad range end in {tok:?}"))?;
            if hi < lo {
                bail!(GpbError::Config(format!("empty range {tok:?}")));
            }
            out.extend((lo..=hi).map(|x| x as f64));
        } else {
            out.push(tok.parse().with_context(|| format!("bad query point {tok:?}"))?);
        }
    }
    Ok(out)
}

fn support_points(dist: &GpbDistribution) -> Vec<f64> {
    (0..dist.params().grid().len())
        .map(|j| dist.support_value(j))
        .collect()
}

fn emit_pairs(json_out: bool, header: (&str, &str), rows: &[(f64, f64)]) -> anyhow::Result<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    if json_out {
        let v: Vec<_> = rows
            .iter()
            .map(|&(x, y)| json!({ header.0: x, header.1: y }))
            .collect();
        serde_json::to_writer(&mut out, &v)?;
        writeln!(out)?;
    } else {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([header.0, header.1])?;
        for (x, y) in rows {
            w.write_record([x.to_string(), y.to_string()])?;
        }
        w.flush()?;
    }
    Ok(())
}

fn emit_accuracy(json_out: bool, reports: &[harness::AccuracyReport]) -> anyhow::Result<()> {
    let stdout = io::stdout();
    if json_out {
        let rows: Vec<harness::AccuracyRow> = reports.iter().map(Into::into).collect();
        serde_json::to_writer(stdout.lock(), &rows)?;
        println!();
        Ok(())
    } else {
        harness::write_accuracy_csv(stdout.lock(), reports)
    }
}

fn emit_bench(json_out: bool, records: &[BenchRecord]) -> anyhow::Result<()> {
    for r in records.iter().filter(|r| r.skipped) {
        eprintln!(
            "skipped m={}, n={}: warm-up took {:.3}s, over budget",
            r.m, r.n, r.seconds
        );
    }
    if json_out {
        serde_json::to_writer(io::stdout().lock(), records)?;
        println!();
        Ok(())
    } else {
        harness::write_bench_csv(io::stdout().lock(), records)
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Pmf { params, kk } => {
            let dist = params.distribution()?;
            let xs = match kk {
                Some(spec) => parse_points(&spec)?,
                None => support_points(&dist),
            };
            let ys = dist.pmf_at(&xs)?;
            emit_pairs(cli.json, ("x", "pmf"), &xs.into_iter().zip(ys).collect::<Vec<_>>())
        }
        Command::Cdf { params, kk } => {
            let dist = params.distribution()?;
            let xs = match kk {
                Some(spec) => parse_points(&spec)?,
                None => support_points(&dist),
            };
            let ys = dist.cdf_at(&xs)?;
            emit_pairs(cli.json, ("x", "cdf"), &xs.into_iter().zip(ys).collect::<Vec<_>>())
        }
        Command::Quantile { params, q } => {
            let dist = params.distribution()?;
            let xs = dist.quantile(&q)?;
            emit_pairs(cli.json, ("q", "x"), &q.into_iter().zip(xs).collect::<Vec<_>>())
        }
        Command::Sample {
            params,
            count,
            seed,
        } => {
            let dist = params.distribution()?;
            let draws = dist.sample(count, seed)?;
            let stdout = io::stdout();
            let mut out = stdout.lock();
            if cli.json {
                serde_json::to_writer(&mut out, &draws)?;
                writeln!(out)?;
            } else {
                writeln!(out, "x")?;
                for x in draws {
                    writeln!(out, "{x}")?;
                }
            }
            Ok(())
        }
        Command::Validate { study } => match study {
            Study::Oracle { config, seed, jobs } => {
                let (file_seed, instances) = match config {
                    Some(path) => {
                        let c: OracleConfig = serde_json::from_str(&fs::read_to_string(&path)?)
                            .map_err(|e| GpbError::Config(e.to_string()))?;
                        (c.seed, c.instances)
                    }
                    None => (None, harness::reference_settings()),
                };
                let seed = seed.or(file_seed).unwrap_or(DEFAULT_SEED);
                emit_accuracy(cli.json, &harness::validate_oracle(&instances, seed, jobs)?)
            }
            Study::Binomial {
                config,
                full,
                weighted,
                jobs,
            } => {
                let cases = match config {
                    Some(path) => {
                        let c: BinomialConfig = serde_json::from_str(&fs::read_to_string(&path)?)
                            .map_err(|e| GpbError::Config(e.to_string()))?;
                        c.cases
                    }
                    None if full => harness::binomial_extended_cases(),
                    None => harness::binomial_default_cases(),
                };
                emit_accuracy(cli.json, &harness::validate_binomial(&cases, weighted, jobs)?)
            }
        },
        Command::Bench(args) => {
            let config = args.config()?;
            emit_bench(cli.json, &harness::bench(&config)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let (kind, code) = match err.downcast_ref::<GpbError>() {
                Some(e) => (e.kind(), 2),
                None => ("runtime", 1),
            };
            eprintln!("{}", json!({ "error": kind, "message": format!("{err:#}") }));
            ExitCode::from(code)
        }
    }
}
