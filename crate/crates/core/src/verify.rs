//! Monte-Carlo checks of the limit law `n^{-1/2}(X_n − nλ₁v) → N(0, Σ)`.
//!
//! Every gate is computed from the analytic mean and covariance and the
//! replicate count; nothing is compared to a hard-coded constant.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::analysis::Analysis;
use crate::error::{Error, Result};
use crate::growth::{Mode, Simulator};
use crate::linalg;
use crate::model::BlockSet;

/// Gate parameters. Defaults are engineering choices; the limit theorems
/// come without rates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Multiplier on the standard error of each coordinate mean.
    pub mean_z: f64,
    /// Largest relative Frobenius error of the empirical covariance.
    pub covariance_frobenius: f64,
    /// Multiplier on the jackknife standard error of each covariance entry.
    pub covariance_entry_se: f64,
    pub max_abs_skewness: f64,
    pub max_abs_excess_kurtosis: f64,
    /// KS threshold is this over `√R` (1.63 ≈ the 1% critical value).
    pub ks_coefficient: f64,
    /// Relative eigenvalue floor when whitening: `floor · trace(Σ) / r`.
    pub whitening_floor: f64,
    pub min_replicates_mean: usize,
    pub min_replicates_covariance: usize,
    pub min_replicates_normality: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            mean_z: 4.0,
            covariance_frobenius: 0.20,
            covariance_entry_se: 5.0,
            max_abs_skewness: 0.5,
            max_abs_excess_kurtosis: 1.0,
            ks_coefficient: 1.63,
            whitening_floor: 1e-10,
            min_replicates_mean: 30,
            min_replicates_covariance: 100,
            min_replicates_normality: 200,
        }
    }
}

impl Tolerances {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyConfig {
    pub steps: u64,
    pub replicates: usize,
    pub seed: u64,
    /// Worker threads for the replicates; 1 runs them on the calling thread.
    pub jobs: usize,
    /// Relative fault injected into the predicted mean (negative control).
    pub perturb_mean: f64,
    /// Factor applied to the predicted covariance (negative control).
    pub sigma_scale: f64,
    pub tolerances: Tolerances,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            steps: 100_000,
            replicates: 400,
            seed: 42,
            jobs: 1,
            perturb_mean: 0.0,
            sigma_scale: 1.0,
            tolerances: Tolerances::default(),
        }
    }
}

/// `R` independent census-mode runs of `n` steps; row `i` uses random
/// stream `i` of `seed`.
pub fn run_replicates(
    bs: &BlockSet,
    essential: &[u32],
    steps: u64,
    replicates: usize,
    seed: u64,
    jobs: usize,
) -> Result<Vec<Vec<u64>>> {
    let one = |i: usize| -> Result<Vec<u64>> {
        let mut sim = Simulator::new(bs, Mode::Census, seed, i as u64)?;
        sim.run(steps)?;
        Ok(sim.state().census_vector(essential).counts)
    };
    if jobs <= 1 {
        return (0..replicates).map(one).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Usage(format!("thread pool: {e}")))?;
    pool.install(|| (0..replicates).into_par_iter().map(one).collect())
}

/// Outcome of one gate. `passed` is `None` when the gate was skipped.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: Option<bool>,
    /// Whether the check contributes to the overall verdict.
    pub gating: bool,
    pub statistic: f64,
    pub threshold: f64,
    pub note: Option<String>,
    pub details: Vec<Detail>,
}

/// One compared quantity within a check.
#[derive(Clone, Debug, Serialize)]
pub struct Detail {
    pub label: String,
    pub observed: f64,
    pub predicted: f64,
    pub statistic: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    fn skipped(name: &str, note: String) -> Self {
        Check {
            name: name.into(),
            passed: None,
            gating: true,
            statistic: f64::NAN,
            threshold: f64::NAN,
            note: Some(note),
            details: Vec::new(),
        }
    }
}

fn as_matrix(samples: &[Vec<u64>]) -> DMatrix<f64> {
    let r = samples.first().map_or(0, Vec::len);
    DMatrix::from_fn(samples.len(), r, |i, j| samples[i][j] as f64)
}

/// Sample covariance (divisor `R − 1`) of the rows of `x`.
pub fn sample_covariance(x: &DMatrix<f64>) -> DMatrix<f64> {
    let rows = x.nrows() as f64;
    let mean = x.row_mean();
    let centered = DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| x[(i, j)] - mean[j]);
    centered.transpose() * &centered / (rows - 1.0)
}

/// Per-coordinate gate `|mean/n − λ₁vᵢ| ≤ z·√(Σᵢᵢ/(nR)) + c₁/n`, with the
/// absolute fallback `5/√(nR)` when `Σᵢᵢ` is not positive.
pub fn mean_check(
    samples: &[Vec<u64>],
    predicted_rates: &[f64],
    sigma_diag: &[f64],
    n: u64,
    bias: f64,
    tol: &Tolerances,
) -> Check {
    const NAME: &str = "mean";
    let r_count = samples.len();
    if r_count < tol.min_replicates_mean {
        return Check::skipped(NAME, format!("needs at least {} replicates", tol.min_replicates_mean));
    }
    let x = as_matrix(samples);
    let nf = n as f64;
    let nr = nf * r_count as f64;
    let mut details = Vec::new();
    let mut worst: f64 = 0.0;
    for (i, (&pred, &var)) in predicted_rates.iter().zip(sigma_diag).enumerate() {
        let observed = x.column(i).mean() / nf;
        let threshold = if var > 0.0 {
            tol.mean_z * (var / nr).sqrt() + bias / nf
        } else {
            5.0 / nr.sqrt()
        };
        let dev = (observed - pred).abs();
        worst = worst.max(dev / threshold);
        details.push(Detail {
            label: format!("coordinate {}", i + 1),
            observed,
            predicted: pred,
            statistic: dev,
            threshold,
            passed: dev <= threshold,
        });
    }
    Check {
        name: NAME.into(),
        passed: Some(details.iter().all(|d| d.passed)),
        gating: true,
        statistic: worst,
        threshold: 1.0,
        note: Some("statistic is the largest deviation / threshold ratio".into()),
        details,
    }
}

/// Jackknife standard errors of the sample covariance entries.
fn jackknife_covariance_se(x: &DMatrix<f64>) -> DMatrix<f64> {
    // centring first keeps the leave-one-out sums well conditioned
    let mean = x.row_mean();
    let x = &DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| x[(i, j)] - mean[j]);
    let rows = x.nrows();
    let r = x.ncols();
    let rf = rows as f64;
    let sums: Vec<f64> = (0..r).map(|j| x.column(j).sum()).collect();
    let cross = x.transpose() * x;
    let mut se = DMatrix::zeros(r, r);
    for a in 0..r {
        for b in 0..r {
            let loo: Vec<f64> = (0..rows)
                .map(|k| {
                    let (xa, xb) = (x[(k, a)], x[(k, b)]);
                    let sxy = cross[(a, b)] - xa * xb;
                    let sx = sums[a] - xa;
                    let sy = sums[b] - xb;
                    (sxy - sx * sy / (rf - 1.0)) / (rf - 2.0)
                })
                .collect();
            let mean = loo.iter().sum::<f64>() / rf;
            let ss: f64 = loo.iter().map(|v| (v - mean).powi(2)).sum();
            se[(a, b)] = ((rf - 1.0) / rf * ss).sqrt();
        }
    }
    se
}

/// Relative Frobenius error of the empirical covariance of `X_n/√n` against
/// `sigma`, plus a per-entry gate at a multiple of the jackknife standard
/// error.
pub fn covariance_check(samples: &[Vec<u64>], sigma: &DMatrix<f64>, n: u64, tol: &Tolerances) -> Check {
    covariance_check_named("covariance", samples, sigma, n, tol)
}

fn covariance_check_named(name: &str, samples: &[Vec<u64>], sigma: &DMatrix<f64>, n: u64, tol: &Tolerances) -> Check {
    if samples.len() < tol.min_replicates_covariance {
        return Check::skipped(name, format!("needs at least {} replicates", tol.min_replicates_covariance));
    }
    let scaled = as_matrix(samples) / (n as f64).sqrt();
    let emp = sample_covariance(&scaled);
    let se = jackknife_covariance_se(&scaled);
    let norm = sigma.norm();
    let rel = (&emp - sigma).norm() / norm;
    let floor = 1e-12 * linalg::max_abs(sigma).max(1e-300);
    let r = sigma.nrows();
    let mut details = Vec::new();
    for i in 0..r {
        for j in i..r {
            let dev = (emp[(i, j)] - sigma[(i, j)]).abs();
            let threshold = tol.covariance_entry_se * se[(i, j)].max(floor);
            details.push(Detail {
                label: format!("entry ({},{})", i + 1, j + 1),
                observed: emp[(i, j)],
                predicted: sigma[(i, j)],
                statistic: dev,
                threshold,
                passed: dev <= threshold,
            });
        }
    }
    let mut note = None;
    if emp.clone().cholesky().is_none() {
        note = Some("empirical covariance is singular".to_string());
    }
    Check {
        name: name.into(),
        passed: Some(rel <= tol.covariance_frobenius && details.iter().all(|d| d.passed)),
        gating: true,
        statistic: rel,
        threshold: tol.covariance_frobenius,
        note,
        details,
    }
}

/// Whitened scores `W (X_n − n·mean) / √n`, one row per replicate.
pub fn standardized_scores(
    samples: &[Vec<u64>],
    predicted_rates: &[f64],
    sigma: &DMatrix<f64>,
    n: u64,
    tol: &Tolerances,
) -> (DMatrix<f64>, usize) {
    let r = sigma.nrows();
    let floor = tol.whitening_floor * sigma.trace().max(0.0) / r as f64;
    let (w, rank) = linalg::whitening(sigma, floor);
    let nf = n as f64;
    let centered = DMatrix::from_fn(samples.len(), r, |i, j| {
        (samples[i][j] as f64 - nf * predicted_rates[j]) / nf.sqrt()
    });
    (centered * w.transpose(), rank)
}

fn moments(z: &[f64]) -> (f64, f64) {
    let n = z.len() as f64;
    let mean = z.iter().sum::<f64>() / n;
    let m2 = z.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m3 = z.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / n;
    let m4 = z.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
}

/// Kolmogorov–Smirnov distance to the standard normal.
pub fn ks_statistic(z: &[f64]) -> f64 {
    let normal = Normal::standard();
    let mut sorted = z.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal.cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Moment and KS gates on every whitened coordinate.
pub fn normality_check(scores: &DMatrix<f64>, tol: &Tolerances) -> Check {
    const NAME: &str = "normality";
    let rows = scores.nrows();
    if rows < tol.min_replicates_normality {
        return Check::skipped(NAME, format!("needs at least {} replicates", tol.min_replicates_normality));
    }
    let ks_threshold = tol.ks_coefficient / (rows as f64).sqrt();
    let mut details = Vec::new();
    let mut worst: f64 = 0.0;
    for j in 0..scores.ncols() {
        let z: Vec<f64> = scores.column(j).iter().copied().collect();
        let (skew, kurt) = moments(&z);
        let ks = ks_statistic(&z);
        worst = worst.max(ks / ks_threshold);
        let label = |what: &str| format!("whitened coordinate {} {what}", j + 1);
        details.push(Detail {
            label: label("skewness"),
            observed: skew,
            predicted: 0.0,
            statistic: skew.abs(),
            threshold: tol.max_abs_skewness,
            passed: skew.abs() <= tol.max_abs_skewness,
        });
        details.push(Detail {
            label: label("excess kurtosis"),
            observed: kurt,
            predicted: 0.0,
            statistic: kurt.abs(),
            threshold: tol.max_abs_excess_kurtosis,
            passed: kurt.abs() <= tol.max_abs_excess_kurtosis,
        });
        details.push(Detail {
            label: label("KS distance"),
            observed: ks,
            predicted: 0.0,
            statistic: ks,
            threshold: ks_threshold,
            passed: ks <= ks_threshold,
        });
    }
    Check {
        name: NAME.into(),
        passed: Some(!details.is_empty() && details.iter().all(|d| d.passed)),
        gating: true,
        statistic: worst,
        threshold: 1.0,
        note: Some(format!(
            "{} whitened coordinates; statistic is the largest KS / threshold ratio",
            scores.ncols()
        )),
        details,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub kind: crate::model::Kind,
    pub config: VerifyConfig,
    pub essential: Vec<u32>,
    /// `mean(X_n)` over replicates.
    pub empirical_mean: Vec<f64>,
    /// `n·λ₁v` (after any injected perturbation).
    pub predicted_mean: Vec<f64>,
    pub empirical_covariance: Vec<Vec<f64>>,
    pub predicted_covariance: Vec<Vec<f64>>,
    pub whitened_rank: usize,
    pub standardized_scores: Vec<Vec<f64>>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl VerificationReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn table(&self) -> String {
        use std::fmt::Write;
        let mut out = format!(
            "{} network, n = {}, R = {}, seed = {}\n",
            self.kind, self.config.steps, self.config.replicates, self.config.seed
        );
        for c in &self.checks {
            let verdict = match c.passed {
                Some(true) => "PASS",
                Some(false) => "FAIL",
                None => "SKIP",
            };
            let gate = if c.gating { "" } else { " (informational)" };
            let _ = writeln!(
                out,
                "{verdict}  {:<22} statistic {:.4}  threshold {:.4}{gate}",
                c.name, c.statistic, c.threshold
            );
            for d in &c.details {
                let _ = writeln!(
                    out,
                    "      {} {:<38} observed {:>12.6}  predicted {:>12.6}  |dev| {:.3e} <= {:.3e}",
                    if d.passed { " " } else { "!" },
                    d.label,
                    d.observed,
                    d.predicted,
                    d.statistic,
                    d.threshold
                );
            }
            if let Some(note) = &c.note {
                let _ = writeln!(out, "        {note}");
            }
        }
        let _ = writeln!(out, "verdict: {}", if self.passed { "PASS" } else { "FAIL" });
        out
    }
}

/// Runs the replicates and every gate for an analysed block set.
pub fn verify(bs: &BlockSet, analysis: &Analysis, config: &VerifyConfig) -> Result<VerificationReport> {
    if config.replicates < 2 {
        return Err(Error::Usage("at least 2 replicates are required".into()));
    }
    if config.steps == 0 {
        return Err(Error::Usage("steps must be positive".into()));
    }
    let essential = analysis.essential().to_vec();
    let samples = run_replicates(bs, &essential, config.steps, config.replicates, config.seed, config.jobs)?;
    Ok(evaluate(bs, analysis, config, &samples))
}

/// Applies the gates to precomputed replicate censuses.
pub fn evaluate(
    bs: &BlockSet,
    analysis: &Analysis,
    config: &VerifyConfig,
    samples: &[Vec<u64>],
) -> VerificationReport {
    let tol = &config.tolerances;
    let n = config.steps;
    let rates: Vec<f64> = analysis
        .mean_rates()
        .iter()
        .map(|m| m * (1.0 + config.perturb_mean))
        .collect();
    let sigma = analysis.tracked_sigma() * config.sigma_scale;
    let diag: Vec<f64> = sigma.diagonal().iter().copied().collect();

    let k_max = *analysis.essential().last().expect("r >= 1") as u64;
    let max_block = bs.blocks.iter().map(|b| b.vertices.len()).max().unwrap_or(0) as f64;
    let bias = 2.0 * bs.weight(k_max).max(bs.weight(1)) * max_block;

    let (scores, rank) = standardized_scores(samples, &rates, &sigma, n, tol);
    let mut checks = vec![
        mean_check(samples, &rates, &diag, n, bias, tol),
        covariance_check(samples, &sigma, n, tol),
        normality_check(&scores, tol),
    ];
    let mut projected = covariance_check_named(
        "projected_covariance",
        samples,
        &analysis.tracked_projected_sigma(),
        n,
        tol,
    );
    projected.gating = false;
    projected.note = Some(
        "covariance built from the projected second-moment matrix; coincides with the gated one only for balanced urns"
            .into(),
    );
    checks.push(projected);

    let x = as_matrix(samples);
    let empirical_mean: Vec<f64> = (0..x.ncols()).map(|j| x.column(j).mean()).collect();
    let emp_cov = sample_covariance(&(x / (n as f64).sqrt()));
    let rows = |m: &DMatrix<f64>| -> Vec<Vec<f64>> {
        m.row_iter().map(|r| r.iter().copied().collect()).collect()
    };
    let passed = checks
        .iter()
        .filter(|c| c.gating)
        .all(|c| c.passed != Some(false));
    VerificationReport {
        schema_version: crate::analysis::SCHEMA_VERSION,
        kind: bs.kind,
        config: config.clone(),
        essential: analysis.essential().to_vec(),
        empirical_mean,
        predicted_mean: rates.iter().map(|m| m * n as f64).collect(),
        empirical_covariance: rows(&emp_cov),
        predicted_covariance: rows(&sigma),
        whitened_rank: rank,
        standardized_scores: rows(&scores),
        checks,
        passed,
    }
}
