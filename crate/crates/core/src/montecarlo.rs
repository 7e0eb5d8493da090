//! Seeded trials over random coefficient vectors.
//!
//! Trial t of a run with master seed s draws its coefficients from a ChaCha8
//! stream seeded by a SplitMix64 hash of (s, t), so every trial is
//! reproducible on its own and results do not depend on the thread count.
//! Per-trial results are collected in trial order and reduced with fixed
//! pairwise sums.
//!
//! Coefficient laws and E|log|c_0||:
//! - gaussian(σ): finite, the log singularity at 0 is integrable;
//! - uniform(-1, 1): ∫_0^1 |log x| dx = 1;
//! - rademacher: |log 1| = 0;
//! - complex gaussian(σ), real and imaginary parts i.i.d. N(0, σ²/2): finite.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orthopoly::RecurrenceTable;
use crate::stats::{ks_distance, median, pairwise_sum, sample_variance};
use crate::weight::FreudWeight;
use crate::zeros::{all_zeros, real_zeros_realline, CoefficientVector};

pub const SUMMARY_SCHEMA_VERSION: u32 = 1;

/// Real parts of contracted zeros count toward an interval only if
/// |Im| is below this.
pub const INTERVAL_IM_TOL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoefficientDistribution {
    Gaussian { sigma: f64 },
    Uniform,
    Rademacher,
    ComplexGaussian { sigma: f64 },
}

impl CoefficientDistribution {
    pub fn is_complex(&self) -> bool {
        matches!(self, Self::ComplexGaussian { .. })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Gaussian { sigma } | Self::ComplexGaussian { sigma } if !(sigma.is_finite() && sigma > 0.0) => {
                Err(Error::Argument(format!("sigma must be positive, got {sigma}")))
            }
            _ => Ok(()),
        }
    }
}

/// SplitMix64 finalizer of master + (t+1)·φ.
pub fn trial_seed(master: u64, trial: usize) -> u64 {
    let mut z = master.wrapping_add((trial as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// c_0..c_n, deterministic in (dist, n, seed).
pub fn sample_coefficients(dist: &CoefficientDistribution, n: usize, seed: u64) -> Result<CoefficientVector> {
    dist.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = n + 1;
    Ok(match *dist {
        CoefficientDistribution::Gaussian { sigma } => {
            let normal = Normal::new(0.0, sigma).map_err(|e| Error::Argument(e.to_string()))?;
            CoefficientVector::Real((0..len).map(|_| normal.sample(&mut rng)).collect())
        }
        CoefficientDistribution::Uniform => {
            CoefficientVector::Real((0..len).map(|_| rng.random_range(-1.0..1.0)).collect())
        }
        CoefficientDistribution::Rademacher => CoefficientVector::Real(
            (0..len)
                .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
                .collect(),
        ),
        CoefficientDistribution::ComplexGaussian { sigma } => {
            let normal = Normal::new(0.0, sigma / 2f64.sqrt()).map_err(|e| Error::Argument(e.to_string()))?;
            CoefficientVector::Complex(
                (0..len)
                    .map(|_| {
                        let re = normal.sample(&mut rng);
                        let im = normal.sample(&mut rng);
                        Complex64::new(re, im)
                    })
                    .collect(),
            )
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub n: usize,
    pub distribution: CoefficientDistribution,
    pub trials: usize,
    pub seed: u64,
    /// Worker threads; `None` uses the global pool. Never affects results.
    #[serde(skip)]
    pub threads: Option<usize>,
}

fn run_trials<T: Send>(config: &TrialConfig, f: impl Fn(u64) -> Result<T> + Sync) -> Result<Vec<T>> {
    let body = || {
        (0..config.trials)
            .into_par_iter()
            .map(|t| {
                let seed = trial_seed(config.seed, t);
                f(seed).map_err(|e| Error::Trial {
                    trial: t,
                    seed,
                    source: Box::new(e),
                })
            })
            .collect::<Vec<Result<T>>>()
    };
    let results = match config.threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build()
            .map_err(|e| Error::Argument(format!("cannot build thread pool: {e}")))?
            .install(body),
        None => body(),
    };
    results.into_iter().collect()
}

/// Counts of contracted zeros on a regular re × im grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroHistogram {
    pub re_range: (f64, f64),
    pub im_range: (f64, f64),
    pub re_bins: usize,
    pub im_bins: usize,
    /// Row-major, re index outer.
    pub counts: Vec<u64>,
}

impl ZeroHistogram {
    pub fn new(re_range: (f64, f64), im_range: (f64, f64), re_bins: usize, im_bins: usize) -> Self {
        Self {
            re_range,
            im_range,
            re_bins,
            im_bins,
            counts: vec![0; re_bins * im_bins],
        }
    }

    fn bin(range: (f64, f64), bins: usize, v: f64) -> Option<usize> {
        if !(v >= range.0 && v < range.1) {
            return None;
        }
        let k = ((v - range.0) / (range.1 - range.0) * bins as f64) as usize;
        Some(k.min(bins - 1))
    }

    pub fn add(&mut self, z: Complex64) {
        if let (Some(i), Some(j)) = (
            Self::bin(self.re_range, self.re_bins, z.re),
            Self::bin(self.im_range, self.im_bins, z.im),
        ) {
            self.counts[i * self.im_bins + j] += 1;
        }
    }

    fn center(range: (f64, f64), bins: usize, k: usize) -> f64 {
        range.0 + (k as f64 + 0.5) * (range.1 - range.0) / bins as f64
    }

    /// `re_bin,im_bin,count` with bin centers.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("re_bin,im_bin,count\n");
        for i in 0..self.re_bins {
            for j in 0..self.im_bins {
                out.push_str(&format!(
                    "{:.16e},{:.16e},{}\n",
                    Self::center(self.re_range, self.re_bins, i),
                    Self::center(self.im_range, self.im_bins, j),
                    self.counts[i * self.im_bins + j]
                ));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalMass {
    pub a: f64,
    pub b: f64,
    /// Trial average of the fraction of contracted zeros with Re in [a, b]
    /// and |Im| < 0.05.
    pub mass: f64,
    /// μ_w([a, b]).
    pub ullman: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub schema_version: u32,
    pub study: String,
    pub weight: FreudWeight,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub distribution: CoefficientDistribution,
    pub mean_real_zeros: Option<f64>,
    pub std_error: Option<f64>,
    pub ks_real: Option<f64>,
    pub outside_mass: Option<f64>,
    pub rectangle_mass: Option<f64>,
    pub interval_masses: Vec<IntervalMass>,
    pub empirical_measure: Option<ZeroHistogram>,
}

impl TrialSummary {
    fn new(study: &str, table: &RecurrenceTable, config: &TrialConfig) -> Self {
        Self {
            schema_version: SUMMARY_SCHEMA_VERSION,
            study: study.to_string(),
            weight: *table.weight(),
            n: config.n,
            trials: config.trials,
            seed: config.seed,
            distribution: config.distribution,
            mean_real_zeros: None,
            std_error: None,
            ks_real: None,
            outside_mass: None,
            rectangle_mass: None,
            interval_masses: Vec::new(),
            empirical_measure: None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn check_config(table: &RecurrenceTable, config: &TrialConfig, min_trials: usize) -> Result<()> {
    config.distribution.validate()?;
    if config.trials < min_trials {
        return Err(Error::Argument(format!(
            "need at least {min_trials} trials, got {}",
            config.trials
        )));
    }
    if config.n == 0 {
        return Err(Error::Argument("degree must be >= 1".into()));
    }
    if config.n > table.n_max() {
        return Err(Error::Capacity {
            requested: config.n,
            capacity: table.n_max(),
        });
    }
    Ok(())
}

/// Real zeros on the whole line per trial; mean and standard error.
pub fn run_real_zero_trials(table: &RecurrenceTable, config: &TrialConfig) -> Result<TrialSummary> {
    check_config(table, config, 2)?;
    if config.distribution.is_complex() {
        return Err(Error::Argument("real-zero trials need a real coefficient law".into()));
    }
    let n = config.n;
    let counts = run_trials(config, |seed| {
        let c = sample_coefficients(&config.distribution, n, seed)?;
        let k = real_zeros_realline(&c, table)?.len();
        if k > n || (n - k) % 2 == 1 {
            return Err(Error::Domain(format!(
                "found {k} real zeros for a real polynomial of degree {n}"
            )));
        }
        Ok(k as f64)
    })?;
    let mean = pairwise_sum(&counts) / counts.len() as f64;
    let se = (sample_variance(&counts) / counts.len() as f64).sqrt();
    let mut summary = TrialSummary::new("real_zeros", table, config);
    summary.mean_real_zeros = Some(mean);
    summary.std_error = Some(se);
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureOptions {
    pub intervals: Vec<(f64, f64)>,
    pub histogram: Option<ZeroHistogram>,
}

impl Default for MeasureOptions {
    fn default() -> Self {
        Self {
            intervals: vec![(-0.5, 0.5)],
            histogram: Some(ZeroHistogram::new((-1.5, 1.5), (-0.5, 0.5), 60, 20)),
        }
    }
}

/// Contracted zeros z/a_n pooled over trials, compared with the Ullman law.
pub fn run_zero_measure_trials(
    table: &RecurrenceTable,
    config: &TrialConfig,
    options: &MeasureOptions,
) -> Result<TrialSummary> {
    check_config(table, config, 1)?;
    for &(a, b) in &options.intervals {
        if !(a < b) {
            return Err(Error::Argument(format!("empty interval [{a}, {b}]")));
        }
    }
    let per_trial = run_trials(config, |seed| {
        let c = sample_coefficients(&config.distribution, config.n, seed)?;
        Ok(all_zeros(&c, table)?.scaled)
    })?;

    let ullman = table.weight().ullman();
    let n = config.n as f64;
    let mut summary = TrialSummary::new("zero_measure", table, config);
    for &(a, b) in &options.intervals {
        let fractions: Vec<f64> = per_trial
            .iter()
            .map(|zs| {
                zs.iter()
                    .filter(|z| z.re >= a && z.re <= b && z.im.abs() < INTERVAL_IM_TOL)
                    .count() as f64
                    / n
            })
            .collect();
        summary.interval_masses.push(IntervalMass {
            a,
            b,
            mass: pairwise_sum(&fractions) / fractions.len() as f64,
            ullman: ullman.measure(a, b)?,
        });
    }
    let inside: Vec<f64> = per_trial
        .iter()
        .map(|zs| zs.iter().filter(|z| z.re.abs() <= 1.1 && z.im.abs() <= 0.1).count() as f64 / n)
        .collect();
    let rect = pairwise_sum(&inside) / inside.len() as f64;
    summary.rectangle_mass = Some(rect);
    summary.outside_mass =
        Some(pairwise_sum(&inside.iter().map(|m| 1.0 - m).collect::<Vec<_>>()) / inside.len() as f64);

    let real_parts: Vec<f64> = per_trial.iter().flatten().map(|z| z.re).collect();
    summary.ks_real = Some(ks_distance(&real_parts, |s| ullman.cdf(s)));
    if let Some(h) = &options.histogram {
        let mut h = h.clone();
        per_trial.iter().flatten().for_each(|z| h.add(*z));
        summary.empirical_measure = Some(h);
    }
    Ok(summary)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtremalityTrial {
    /// ‖P_n W‖^{1/n} on [-2a_n, 2a_n].
    pub sup_root: f64,
    /// ‖w^n Q_n*‖^{1/n}, Q_n* the monic contracted polynomial.
    pub monic_root: f64,
    /// ∫|P_n|²W² by Gauss quadrature.
    pub l2_quadrature: f64,
    /// Σ|c_k|².
    pub l2_coefficients: f64,
    pub max_coefficient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremalityReport {
    pub schema_version: u32,
    pub n: usize,
    pub trials: Vec<ExtremalityTrial>,
    pub median_sup_root: f64,
    pub median_monic_root: f64,
    /// e^{-F_w}.
    pub monic_limit: f64,
    pub max_l2_relative_error: f64,
}

impl ExtremalityReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// log-sum-exp style accumulation of Σ exp(terms).
fn log_sum_exp(terms: &[f64]) -> f64 {
    let top = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    let scaled: Vec<f64> = terms.iter().map(|t| (t - top).exp()).collect();
    top + pairwise_sum(&scaled).ln()
}

/// Sup-norm growth of P_n W and the L² identity ∫|P_n|²W² = Σ|c_k|².
pub fn extremality_check(table: &RecurrenceTable, config: &TrialConfig) -> Result<ExtremalityReport> {
    check_config(table, config, 1)?;
    let n = config.n;
    let w = *table.weight();
    let an = w.mrs_number(n)?;
    let points = 20 * n + 1;
    let grid: Vec<f64> = (0..points)
        .map(|i| -2.0 * an + 4.0 * an * i as f64 / (points - 1) as f64)
        .collect();
    let (nodes, weights) = table.gauss_rule(n + 1)?;
    let log_lead = table.log_leading_coefficient(n)?;

    let trials = run_trials(config, |seed| {
        let c = sample_coefficients(&config.distribution, n, seed)?.to_complex();
        let mut maxlog = f64::NEG_INFINITY;
        for &x in &grid {
            let p = table.combination(&c, x)?;
            let l = p.value.norm().ln() + p.log_scale - w.field(x);
            maxlog = maxlog.max(l);
        }
        let quad_terms: Vec<f64> = nodes
            .iter()
            .zip(&weights)
            .map(|(&x, &wt)| {
                let p = table.combination(&c, x)?;
                Ok(2.0 * (p.value.norm().ln() + p.log_scale) + wt.ln())
            })
            .collect::<Result<_>>()?;
        let l2_quadrature = log_sum_exp(&quad_terms).exp();
        let squares: Vec<f64> = c.iter().map(|z| z.norm_sqr()).collect();
        let l2_coefficients = pairwise_sum(&squares);
        let max_coefficient = c.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let root = l2_quadrature.sqrt();
        let slack = 1e-9 * root;
        if !(max_coefficient <= root + slack && root <= (n + 1) as f64 * max_coefficient + slack) {
            return Err(Error::Domain(format!(
                "norm sandwich violated: max|c| = {max_coefficient}, L2 = {root}"
            )));
        }
        let lead = c[n].norm();
        if lead == 0.0 {
            return Err(Error::DegreeDeficient { degree: n });
        }
        Ok(ExtremalityTrial {
            sup_root: (maxlog / n as f64).exp(),
            monic_root: ((maxlog - lead.ln() - log_lead) / n as f64).exp() / an,
            l2_quadrature,
            l2_coefficients,
            max_coefficient,
        })
    })?;

    let sup: Vec<f64> = trials.iter().map(|t| t.sup_root).collect();
    let monic: Vec<f64> = trials.iter().map(|t| t.monic_root).collect();
    let max_l2_relative_error = trials
        .iter()
        .map(|t| (t.l2_quadrature - t.l2_coefficients).abs() / t.l2_coefficients)
        .fold(0.0, f64::max);
    Ok(ExtremalityReport {
        schema_version: SUMMARY_SCHEMA_VERSION,
        n,
        median_sup_root: median(&sup),
        median_monic_root: median(&monic),
        monic_limit: (-w.robin_constant()).exp(),
        max_l2_relative_error,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_are_distinct_and_stable() {
        let a: Vec<u64> = (0..1000).map(|t| trial_seed(42, t)).collect();
        let mut b = a.clone();
        b.sort();
        b.dedup();
        assert_eq!(b.len(), 1000);
        assert_eq!(trial_seed(42, 7), a[7]);
        assert_ne!(trial_seed(43, 0), trial_seed(42, 0));
    }

    #[test]
    fn sampling_is_deterministic() {
        for d in [
            CoefficientDistribution::Gaussian { sigma: 1.0 },
            CoefficientDistribution::Uniform,
            CoefficientDistribution::Rademacher,
            CoefficientDistribution::ComplexGaussian { sigma: 1.0 },
        ] {
            assert_eq!(
                sample_coefficients(&d, 30, 9).unwrap(),
                sample_coefficients(&d, 30, 9).unwrap()
            );
            assert_ne!(
                sample_coefficients(&d, 30, 9).unwrap(),
                sample_coefficients(&d, 30, 10).unwrap()
            );
        }
    }

    #[test]
    fn supports() {
        let CoefficientVector::Real(r) = sample_coefficients(&CoefficientDistribution::Rademacher, 500, 1).unwrap()
        else {
            panic!()
        };
        assert!(r.iter().all(|&x| x == 1.0 || x == -1.0));
        let CoefficientVector::Real(u) = sample_coefficients(&CoefficientDistribution::Uniform, 500, 1).unwrap() else {
            panic!()
        };
        assert!(u.iter().all(|&x| (-1.0..1.0).contains(&x)));
        assert!(CoefficientDistribution::Gaussian { sigma: 0.0 }.validate().is_err());
    }

    #[test]
    fn gaussian_moments() {
        let CoefficientVector::Real(g) =
            sample_coefficients(&CoefficientDistribution::Gaussian { sigma: 1.0 }, 99_999, 2024).unwrap()
        else {
            panic!()
        };
        let m = pairwise_sum(&g) / g.len() as f64;
        assert!(m.abs() < 4.0 / (1e5f64).sqrt());
        assert!((sample_variance(&g) - 1.0).abs() < 0.05);
        let CoefficientVector::Complex(z) =
            sample_coefficients(&CoefficientDistribution::ComplexGaussian { sigma: 2.0 }, 99_999, 5).unwrap()
        else {
            panic!()
        };
        let e2: f64 = z.iter().map(|z| z.norm_sqr()).sum::<f64>() / z.len() as f64;
        assert!((e2 - 4.0).abs() < 0.1);
    }

    #[test]
    fn histogram_csv() {
        let mut h = ZeroHistogram::new((-1.0, 1.0), (-1.0, 1.0), 2, 2);
        h.add(Complex64::new(0.5, -0.5));
        h.add(Complex64::new(5.0, 0.0));
        let csv = h.to_csv();
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.contains("5.0000000000000000e-1,-5.0000000000000000e-1,1"));
    }
}
