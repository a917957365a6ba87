//! Window sweeps: top eigenvalues of `A_tau` along a ladder of `tau`,
//! compared with the Gram oracle and the limits `|a_i|^2`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::autocorr::{cesaro_sq_mean, estimate_autocorr, AutocorrTable};
use crate::error::{Error, Result};
use crate::koopman::{finite_gram, gram_spectrum};
use crate::operator::{build_kernel, kernel_spectrum, SolverPath};
use crate::signal::{analytic_table, ground_truth, DiscreteMode, SignalSpec, TimeSeries};

/// Largest kernel size a sweep will build.
pub const MAX_KERNEL_SIZE: usize = 20_000;

#[derive(Debug, Clone)]
pub enum MomentSource {
    /// Closed-form moments of a spec.
    Analytic(SignalSpec),
    /// Moments estimated from one series. The optional spec supplies the
    /// ground truth and oracle columns.
    Empirical {
        series: TimeSeries,
        spec: Option<SignalSpec>,
    },
}

impl MomentSource {
    fn spec(&self) -> Option<&SignalSpec> {
        match self {
            MomentSource::Analytic(spec) => Some(spec),
            MomentSource::Empirical { spec, .. } => spec.as_ref(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub tau_ladder: Vec<f64>,
    pub step: f64,
    pub k: usize,
    pub source: MomentSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub tau: f64,
    pub n: usize,
    pub lambda: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truth: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sup_error: Option<f64>,
    pub solver: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub exponent: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub source: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spec_hash: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub step: f64,
    pub k: usize,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub rows: Vec<SweepRow>,
    /// Power-law fit of `lambda_1` against `tau`, when there are enough rows.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay: Option<DecayFit>,
    pub metadata: ReportMetadata,
}

impl ConvergenceReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Flat table `tau,lambda_1..k,[oracle_1..k,]truth_1..k,sup_error`.
    /// Missing truth values are left empty.
    pub fn to_csv(&self, with_oracle: bool) -> String {
        let k = self.metadata.k;
        let mut out = String::from("tau");
        let mut header = |prefix: &str| {
            for i in 1..=k {
                let _ = write!(out, ",{prefix}_{i}");
            }
        };
        header("lambda");
        if with_oracle {
            header("oracle");
        }
        header("truth");
        out.push_str(",sup_error\n");
        let cells = |out: &mut String, v: &Option<Vec<f64>>| {
            for i in 0..k {
                out.push(',');
                if let Some(v) = v {
                    let _ = write!(out, "{:.16e}", v[i]);
                }
            }
        };
        for row in &self.rows {
            let _ = write!(out, "{}", row.tau);
            cells(&mut out, &Some(row.lambda.clone()));
            if with_oracle {
                cells(&mut out, &row.oracle);
            }
            cells(&mut out, &row.truth);
            out.push(',');
            if let Some(e) = row.sup_error {
                let _ = write!(out, "{e:.16e}");
            }
            out.push('\n');
        }
        out
    }
}

/// Quadrature step `min(0.1, pi / (4 max |x_i|))`, at most an eighth of the
/// shortest mode period.
pub fn default_step(spec: &SignalSpec) -> f64 {
    let xmax = spec.modes().iter().map(|m| m.frequency.abs()).fold(0.0, f64::max);
    if xmax == 0.0 {
        0.1
    } else {
        (PI / (4.0 * xmax)).min(0.1)
    }
}

fn kernel_size(tau: f64, step: f64) -> Result<usize> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::invalid(format!("tau = {tau} must be positive")));
    }
    let ratio = tau / step;
    let n = ratio.round();
    if n < 1.0 || (ratio - n).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::invalid(format!(
            "tau = {tau} is not an integer multiple of step {step}"
        )));
    }
    let n = n as usize;
    if n > MAX_KERNEL_SIZE {
        return Err(Error::invalid(format!(
            "tau = {tau} gives N = {n}, above the cap {MAX_KERNEL_SIZE}"
        )));
    }
    Ok(n)
}

/// Gram oracle spectrum padded with zeros to `k` entries.
fn oracle_spectrum(modes: &[DiscreteMode], tau: f64, k: usize) -> Result<Vec<f64>> {
    let mut s = gram_spectrum(&finite_gram(modes, tau)?)?;
    s.resize(k.max(s.len()), 0.0);
    s.truncate(k);
    Ok(s)
}

pub fn sweep(config: &SweepConfig) -> Result<ConvergenceReport> {
    let SweepConfig {
        tau_ladder,
        step,
        k,
        source,
    } = config;
    let (step, k) = (*step, *k);
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::invalid("step must be positive"));
    }
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if tau_ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("tau ladder must be strictly ascending"));
    }
    let sizes = tau_ladder
        .iter()
        .map(|&tau| kernel_size(tau, step))
        .collect::<Result<Vec<_>>>()?;
    for (&tau, &n) in tau_ladder.iter().zip(&sizes) {
        if k > n {
            return Err(Error::invalid(format!("tau = {tau}: k = {k} exceeds N = {n}")));
        }
    }
    let max_n = sizes.iter().copied().max().unwrap_or(0);

    let table: Option<AutocorrTable> = match source {
        _ if max_n == 0 => None,
        MomentSource::Analytic(spec) => Some(analytic_table(spec, step, max_n.max(2))?),
        MomentSource::Empirical { series, .. } => {
            let ratio = step / series.sample_step();
            let stride = ratio.round();
            if stride < 1.0 || (ratio - stride).abs() > 1e-9 * ratio {
                return Err(Error::invalid(format!(
                    "step {step} is not a multiple of the series sample step {}",
                    series.sample_step()
                )));
            }
            let lags = (max_n - 1) * stride as usize + 1;
            let tau_max = tau_ladder.last().copied().unwrap_or(0.0);
            Some(estimate_autocorr(series, lags.max(2)).map_err(|e| e.context(format!("tau = {tau_max}")))?)
        }
    };

    let spec = source.spec();
    let truth = spec.map(|s| ground_truth(s, k));
    let rows = tau_ladder
        .par_iter()
        .zip(&sizes)
        .map(|(&tau, &n)| -> Result<SweepRow> {
            let table = table.as_ref().expect("table exists for nonempty ladder");
            let kernel = build_kernel(table, tau, n).map_err(|e| e.context(format!("tau = {tau}")))?;
            let spectrum = kernel_spectrum(&kernel, k).map_err(|e| e.context(format!("tau = {tau}")))?;
            let lambda = spectrum.top.eigenvalues;
            let oracle = match spec {
                Some(s) => Some(oracle_spectrum(s.modes(), tau, k)?),
                None => None,
            };
            let sup_error = truth.as_ref().map(|t| {
                lambda
                    .iter()
                    .zip(t)
                    .map(|(l, t)| (l - t).abs())
                    .fold(0.0, f64::max)
            });
            let solver = match spectrum.path {
                SolverPath::DenseJacobi => "jacobi".to_string(),
                SolverPath::Lanczos {
                    iterations,
                    converged,
                } => format!(
                    "lanczos({iterations}{})",
                    if converged { "" } else { ", unconverged" }
                ),
            };
            Ok(SweepRow {
                tau,
                n,
                lambda,
                oracle,
                truth: truth.clone(),
                sup_error,
                solver,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let decay = if rows.len() >= 3 && rows.iter().all(|r| r.lambda[0] > 0.0) {
        let taus: Vec<f64> = rows.iter().map(|r| r.tau).collect();
        let lead: Vec<f64> = rows.iter().map(|r| r.lambda[0]).collect();
        Some(fit_decay(&taus, &lead)?)
    } else {
        None
    };
    let metadata = ReportMetadata {
        source: match source {
            MomentSource::Analytic(_) => "analytic".into(),
            MomentSource::Empirical { .. } => "empirical".into(),
        },
        spec_hash: spec.map(SignalSpec::content_hash),
        seed: spec.map(|s| s.seed),
        step,
        k,
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    Ok(ConvergenceReport {
        rows,
        decay,
        metadata,
    })
}

/// Least-squares fit of `log value = c - exponent * log tau`.
pub fn fit_decay(taus: &[f64], values: &[f64]) -> Result<DecayFit> {
    if taus.len() != values.len() {
        return Err(Error::invalid("taus and values differ in length"));
    }
    if taus.len() < 3 {
        return Err(Error::invalid("decay fit needs at least 3 points"));
    }
    if let Some(v) = values.iter().find(|v| v.is_nan() || **v <= 0.0) {
        return Err(Error::invalid(format!("decay fit needs positive values, got {v}")));
    }
    if taus.iter().any(|t| t.is_nan() || *t <= 0.0) {
        return Err(Error::invalid("decay fit needs positive taus"));
    }
    let x: Vec<f64> = taus.iter().map(|t| t.ln()).collect();
    let y: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("decay fit needs distinct taus"));
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(DecayFit {
        exponent: -slope,
        r2,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailCheck {
    pub lambda: f64,
    pub epsilon: f64,
    pub holds: bool,
}

impl TailCheck {
    pub fn line(&self) -> String {
        format!(
            "tail lambda_1 = {:.6e} {} epsilon = {:.6e}",
            self.lambda,
            if self.holds { "<=" } else { ">" },
            self.epsilon
        )
    }
}

/// `lambda_1` of the kernel built from the modes after the first
/// `drop_count`, against their tail mass `sum |a_i|^2`.
pub fn tail_bound_check(spec: &SignalSpec, drop_count: usize, tau: f64) -> Result<TailCheck> {
    let tail: Vec<DiscreteMode> = spec.modes().iter().skip(drop_count).copied().collect();
    let epsilon: f64 = tail.iter().map(DiscreteMode::power).sum();
    if tail.is_empty() {
        return Ok(TailCheck {
            lambda: 0.0,
            epsilon,
            holds: true,
        });
    }
    let tail_spec = SignalSpec::from_modes(tail, spec.sample_step(), spec.duration())?;
    let base = default_step(&tail_spec);
    let n = ((tau / base).ceil() as usize).max(1);
    if n > MAX_KERNEL_SIZE {
        return Err(Error::invalid(format!("tau = {tau} needs N = {n} > {MAX_KERNEL_SIZE}")));
    }
    let step = tau / n as f64;
    let kernel = build_kernel(&analytic_table(&tail_spec, step, n.max(2))?, tau, n)?;
    let lambda = kernel_spectrum(&kernel, 1)?.top.eigenvalues[0];
    Ok(TailCheck {
        lambda,
        epsilon,
        holds: lambda <= epsilon + 1e-10,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WienerCheck {
    pub measured: f64,
    pub predicted: f64,
}

/// Cesaro mean of `|rho|^2` over `[0, tau)` against `sum |a_i|^4`.
pub fn wiener_check(spec: &SignalSpec, tau: f64, step: f64) -> Result<WienerCheck> {
    if !(step > 0.0 && tau > 0.0) {
        return Err(Error::invalid("tau and step must be positive"));
    }
    let terms = ((tau / step - 1e-9).ceil() as usize).max(2);
    let table = analytic_table(spec, step, terms)?;
    Ok(WienerCheck {
        measured: cesaro_sq_mean(&table, tau)?,
        predicted: spec.modes().iter().map(|m| m.power().powi(2)).sum(),
    })
}
