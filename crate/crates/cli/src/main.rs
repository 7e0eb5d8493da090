#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod cache;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use freud_zeros::kacrice::{
    expected_zeros, expected_zeros_realline, expected_zeros_scaled, intensity, OrthonormalBasis,
};
use freud_zeros::montecarlo::{
    extremality_check, run_real_zero_trials, run_zero_measure_trials, sample_coefficients, CoefficientDistribution,
    MeasureOptions, TrialConfig,
};
use freud_zeros::orthopoly::{RecurrenceMethod, RecurrenceOptions, RecurrenceTable};
use freud_zeros::weight::FreudWeight;
use freud_zeros::zeros::{all_zeros_with, ZeroOptions};
use serde_json::json;

use output::{emit, Cell, Format, Table};

/// Expected and empirical zeros of random combinations of orthonormal
/// polynomials for the Freud weight exp(-c|x|^lambda).
#[derive(Parser, Debug)]
#[command(name = "freud-zeros", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Weight exponent, must exceed 1.
    #[arg(long, global = true, default_value_t = 2.0, allow_negative_numbers = true)]
    lambda: f64,
    /// Weight strength c > 0.
    #[arg(long, global = true, default_value_t = 0.5, allow_negative_numbers = true)]
    c: f64,
    /// Output format (each command has its own default).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write to this file instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Neither read nor write the recurrence-table cache.
    #[arg(long, global = true)]
    no_cache: bool,
    /// Recurrence method; default is the closed form for lambda = 2.
    #[arg(long, global = true, value_enum)]
    method: Option<MethodArg>,
    /// Stieltjes grid half-width as a multiple of the largest MRS number.
    #[arg(long, global = true, default_value_t = 1.5)]
    support_factor: f64,
    /// Stieltjes convergence tolerance under node doubling.
    #[arg(long, global = true, default_value_t = 1e-10)]
    stieltjes_tol: f64,
    /// Maximum number of Stieltjes node doublings.
    #[arg(long, global = true, default_value_t = 8)]
    max_refinements: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    ClosedForm,
    Stieltjes,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DistArg {
    Gaussian,
    Uniform,
    Rademacher,
    ComplexGaussian,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Study {
    RealZeros,
    Measure,
    Extremality,
}

#[derive(Args, Debug)]
struct Sampling {
    /// Coefficient law.
    #[arg(long, value_enum, default_value_t = DistArg::Gaussian)]
    dist: DistArg,
    /// Standard deviation for the Gaussian laws.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Kac-Rice expected number of real zeros for each degree.
    ExpectedZeros {
        /// Degrees, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        /// Restrict to [a,b] instead of the whole line.
        #[arg(long, value_parser = parse_interval, allow_hyphen_values = true)]
        interval: Option<(f64, f64)>,
        /// Read the interval in units of the MRS number a_{n+1}.
        #[arg(long, requires = "interval")]
        scaled: bool,
    },
    /// Kac-Rice intensity on a uniform grid.
    Intensity {
        #[arg(long)]
        n: usize,
        /// Grid interval; defaults to 1.5 times the MRS number on each side.
        #[arg(long, value_parser = parse_interval, allow_hyphen_values = true)]
        interval: Option<(f64, f64)>,
        #[arg(long, default_value_t = 401)]
        points: usize,
    },
    /// Density and distribution function of the normalized equilibrium measure on [-1,1].
    Ullman {
        /// Number of grid points.
        #[arg(long, default_value_t = 201)]
        grid: usize,
    },
    /// Recurrence coefficients (served from the cache when possible).
    Recurrence {
        #[arg(long)]
        n_max: usize,
    },
    /// Seeded Monte Carlo study; emits a JSON summary.
    Mc {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, value_enum, default_value_t = Study::RealZeros)]
        study: Study,
        #[command(flatten)]
        sampling: Sampling,
        /// Worker threads; results do not depend on it.
        #[arg(long)]
        threads: Option<usize>,
        /// Intervals of the contracted real axis for the measure study; repeatable.
        #[arg(long, value_parser = parse_interval, allow_hyphen_values = true)]
        interval: Vec<(f64, f64)>,
        /// Write the pooled contracted-zero histogram as CSV (measure study).
        #[arg(long)]
        histogram: Option<PathBuf>,
    },
    /// Christoffel-function ratios against their universality limits.
    Universality {
        #[arg(long)]
        n: usize,
        /// Points, comma separated.
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        x: Vec<f64>,
    },
    /// Zeros of one seeded random polynomial.
    Zeros {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        sampling: Sampling,
        /// One Newton step per zero.
        #[arg(long)]
        polish: bool,
    },
}

fn parse_interval(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected 'a,b', got '{s}'"))?;
    let a: f64 = a.trim().parse().map_err(|e| format!("bad endpoint '{a}': {e}"))?;
    let b: f64 = b.trim().parse().map_err(|e| format!("bad endpoint '{b}': {e}"))?;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(format!("interval needs finite a < b, got [{a}, {b}]"));
    }
    Ok((a, b))
}

enum Failure {
    Usage(String),
    Numeric(String),
}

impl From<freud_zeros::Error> for Failure {
    fn from(e: freud_zeros::Error) -> Self {
        Failure::Numeric(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Numeric(e.to_string())
    }
}

fn usage(msg: impl std::fmt::Display) -> Failure {
    Failure::Usage(msg.to_string())
}

/// Everything validated up front, before any computation starts.
struct Context {
    weight: FreudWeight,
    options: RecurrenceOptions,
    cache_dir: Option<PathBuf>,
    output: Option<PathBuf>,
    format: Option<Format>,
}

impl Context {
    fn new(common: &Common) -> Result<Self, Failure> {
        let weight = FreudWeight::new(common.c, common.lambda).map_err(usage)?;
        if !(common.support_factor.is_finite() && common.support_factor >= 1.0) {
            return Err(usage(format!(
                "--support-factor must be >= 1, got {}",
                common.support_factor
            )));
        }
        if !(common.stieltjes_tol.is_finite() && common.stieltjes_tol > 0.0) {
            return Err(usage(format!(
                "--stieltjes-tol must be positive, got {}",
                common.stieltjes_tol
            )));
        }
        let method = common.method.map(|m| match m {
            MethodArg::ClosedForm => RecurrenceMethod::ClosedForm,
            MethodArg::Stieltjes => RecurrenceMethod::Stieltjes,
        });
        if method == Some(RecurrenceMethod::ClosedForm) && weight.lambda() != 2.0 {
            return Err(usage("--method closed-form is only available for --lambda 2"));
        }
        Ok(Self {
            weight,
            options: RecurrenceOptions {
                method,
                support_factor: common.support_factor,
                tolerance: common.stieltjes_tol,
                max_refinements: common.max_refinements,
            },
            cache_dir: if common.no_cache { None } else { cache::default_dir() },
            output: common.output.clone(),
            format: common.format,
        })
    }

    fn table(&self, n_max: usize) -> Result<RecurrenceTable, Failure> {
        Ok(cache::recurrence(
            &self.weight,
            n_max,
            &self.options,
            self.cache_dir.as_deref(),
        )?)
    }

    fn format(&self, default: Format, allowed: &[Format]) -> Result<Format, Failure> {
        let f = self.format.unwrap_or(default);
        if allowed.contains(&f) {
            Ok(f)
        } else {
            Err(usage(
                format!("this command does not support --format {f:?}").to_lowercase(),
            ))
        }
    }

    fn weight_meta(&self) -> serde_json::Value {
        json!({ "weight": { "lambda": self.weight.lambda(), "c": self.weight.c() } })
    }

    fn write(&self, text: &str) -> Result<(), Failure> {
        Ok(emit(text, self.output.as_deref())?)
    }
}

const ALL: [Format; 3] = [Format::Csv, Format::Json, Format::Table];

fn positive_degree(n: usize) -> Result<usize, Failure> {
    if n == 0 {
        Err(usage("degree n must be >= 1"))
    } else {
        Ok(n)
    }
}

fn distribution(s: &Sampling) -> Result<CoefficientDistribution, Failure> {
    let d = match s.dist {
        DistArg::Gaussian => CoefficientDistribution::Gaussian { sigma: s.sigma },
        DistArg::Uniform => CoefficientDistribution::Uniform,
        DistArg::Rademacher => CoefficientDistribution::Rademacher,
        DistArg::ComplexGaussian => CoefficientDistribution::ComplexGaussian { sigma: s.sigma },
    };
    d.validate().map_err(usage)?;
    Ok(d)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let ctx = Context::new(&cli.common)?;
    match cli.command {
        Command::ExpectedZeros { n, interval, scaled } => {
            for &k in &n {
                positive_degree(k)?;
            }
            let format = ctx.format(Format::Table, &ALL)?;
            let table = ctx.table(n.iter().copied().max().unwrap_or(1) + 1)?;
            let mut out = Table::new("expected-zeros", vec!["n", "expected", "ratio"]);
            for &k in &n {
                let e = match interval {
                    None => expected_zeros_realline(&table, k)?,
                    Some((a, b)) if scaled => expected_zeros_scaled(&table, k, a, b)?,
                    Some((a, b)) => expected_zeros(&OrthonormalBasis::new(&table, k)?, a, b)?,
                };
                out.push(vec![Cell::Int(k as u64), Cell::Num(e), Cell::Num(e / k as f64)]);
            }
            out.meta = ctx.weight_meta();
            ctx.write(&out.render(format))
        }
        Command::Intensity { n, interval, points } => {
            positive_degree(n)?;
            if points < 2 {
                return Err(usage("--points must be >= 2"));
            }
            let format = ctx.format(Format::Csv, &ALL)?;
            let (a, b) = match interval {
                Some(i) => i,
                None => {
                    let r = 1.5 * ctx.weight.mrs_number(n + 1).map_err(usage)?;
                    (-r, r)
                }
            };
            let table = ctx.table(n + 1)?;
            let basis = OrthonormalBasis::new(&table, n)?;
            let mut out = Table::new("intensity", vec!["x", "rho"]);
            for i in 0..points {
                let x = a + (b - a) * i as f64 / (points - 1) as f64;
                out.push(vec![Cell::Num(x), Cell::Num(intensity(&basis, x))]);
            }
            out.meta = ctx.weight_meta();
            ctx.write(&out.render(format))
        }
        Command::Ullman { grid } => {
            if grid < 2 {
                return Err(usage("--grid must be >= 2"));
            }
            let format = ctx.format(Format::Csv, &ALL)?;
            let u = ctx.weight.ullman();
            let mut out = Table::new("ullman", vec!["s", "density", "cdf"]);
            for i in 0..grid {
                // exact endpoints and centre for odd grids
                let s = (2 * i) as f64 / (grid - 1) as f64 - 1.0;
                out.push(vec![Cell::Num(s), Cell::Num(u.density(s)?), Cell::Num(u.cdf(s))]);
            }
            out.meta = json!({ "lambda": ctx.weight.lambda() });
            ctx.write(&out.render(format))
        }
        Command::Recurrence { n_max } => {
            positive_degree(n_max)?;
            let format = ctx.format(Format::Json, &ALL)?;
            let table = ctx.table(n_max)?;
            if format == Format::Json {
                let mut s = serde_json::to_string_pretty(&table).map_err(|e| Failure::Numeric(e.to_string()))?;
                s.push('\n');
                return ctx.write(&s);
            }
            let mut out = Table::new("recurrence", vec!["k", "a_k", "log_gamma_k"]);
            for k in 0..=n_max {
                let a = if k == 0 { 0.0 } else { table.offdiag(k)? };
                out.push(vec![
                    Cell::Int(k as u64),
                    Cell::Num(a),
                    Cell::Num(table.log_leading_coefficient(k)?),
                ]);
            }
            ctx.write(&out.render(format))
        }
        Command::Mc {
            n,
            trials,
            study,
            sampling,
            threads,
            interval,
            histogram,
        } => {
            positive_degree(n)?;
            let format = ctx.format(Format::Json, &[Format::Json])?;
            let distribution = distribution(&sampling)?;
            if trials == 0 {
                return Err(usage("--trials must be >= 1"));
            }
            if matches!(study, Study::RealZeros) {
                if trials < 2 {
                    return Err(usage("the real-zeros study needs --trials >= 2"));
                }
                if distribution.is_complex() {
                    return Err(usage("the real-zeros study needs a real coefficient law"));
                }
            }
            if threads == Some(0) {
                return Err(usage("--threads must be >= 1"));
            }
            if histogram.is_some() && !matches!(study, Study::Measure) {
                return Err(usage("--histogram needs --study measure"));
            }
            let config = TrialConfig {
                n,
                distribution,
                trials,
                seed: sampling.seed,
                threads,
            };
            let table = ctx.table(n + 1)?;
            let text = match study {
                Study::RealZeros => run_real_zero_trials(&table, &config)?.to_json()?,
                Study::Measure => {
                    let mut opts = MeasureOptions::default();
                    if !interval.is_empty() {
                        opts.intervals = interval;
                    }
                    if histogram.is_none() {
                        opts.histogram = None;
                    }
                    let summary = run_zero_measure_trials(&table, &config, &opts)?;
                    if let (Some(path), Some(h)) = (&histogram, &summary.empirical_measure) {
                        emit(&h.to_csv(), Some(path))?;
                    }
                    summary.to_json()?
                }
                Study::Extremality => extremality_check(&table, &config)?.to_json()?,
            };
            debug_assert_eq!(format, Format::Json);
            ctx.write(&(text + "\n"))
        }
        Command::Universality { n, x } => {
            positive_degree(n)?;
            let format = ctx.format(Format::Table, &ALL)?;
            let a = ctx.weight.mrs_number(n + 1).map_err(usage)?;
            if let Some(bad) = x.iter().find(|x| !(x.abs() < a)) {
                return Err(usage(format!("--x values must lie inside (-{a}, {a}), got {bad}")));
            }
            let table = ctx.table(n + 1)?;
            let mut out = Table::new(
                "universality",
                vec!["x", "r00", "r01", "r11", "pred_r00", "pred_r01", "pred_r11"],
            );
            for &xi in &x {
                let (r00, r01, r11) = table.universality_ratios(n, xi)?;
                let (p00, p01, p11) = table.universality_prediction(n, xi)?;
                out.push([xi, r00, r01, r11, p00, p01, p11].into_iter().map(Cell::Num).collect());
            }
            out.meta = ctx.weight_meta();
            out.meta["n"] = json!(n);
            ctx.write(&out.render(format))
        }
        Command::Zeros { n, sampling, polish } => {
            positive_degree(n)?;
            let format = ctx.format(Format::Csv, &ALL)?;
            let distribution = distribution(&sampling)?;
            let table = ctx.table(n + 1)?;
            let coeffs = sample_coefficients(&distribution, n, sampling.seed)?;
            let zs = all_zeros_with(&coeffs, &table, &ZeroOptions { polish })?;
            let mut out = Table::new("zeros", vec!["re", "im", "re_scaled", "im_scaled"]);
            for (z, s) in zs.zeros.iter().zip(&zs.scaled) {
                out.push([z.re, z.im, s.re, s.im].into_iter().map(Cell::Num).collect());
            }
            out.meta = ctx.weight_meta();
            out.meta["n"] = json!(n);
            out.meta["seed"] = json!(sampling.seed);
            out.meta["distribution"] = json!(distribution);
            out.meta["coefficients"] = json!(coeffs);
            ctx.write(&out.render(format))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("see --help for usage");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
