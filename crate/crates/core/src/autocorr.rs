//! Lagged moments `rho(s)` on a uniform lag grid.

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::TimeSeries;

/// Where a table's values came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    /// Finite-time estimate from a series spanning `T_used`.
    Empirical {
        #[serde(rename = "T_used")]
        t_used: f64,
    },
    Analytic,
}

impl Provenance {
    /// Slack allowed on `|rho(k)| <= rho(0)`, relative to `rho(0)`.
    fn bound_tolerance(&self) -> f64 {
        match self {
            Provenance::Empirical { .. } => 0.1,
            Provenance::Analytic => 1e-12,
        }
    }
}

/// `values[k] ~ rho(k * lag_step)` for `k = 0..len`.
#[derive(Debug, Clone, PartialEq)]
pub struct AutocorrTable {
    lag_step: f64,
    values: Vec<Complex64>,
    provenance: Provenance,
}

impl AutocorrTable {
    pub fn new(lag_step: f64, mut values: Vec<Complex64>, provenance: Provenance) -> Result<Self> {
        if !(lag_step > 0.0 && lag_step.is_finite()) {
            return Err(Error::invalid("lag step must be positive"));
        }
        if values.is_empty() {
            return Err(Error::invalid("autocorrelation table is empty"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("autocorrelation table has non-finite entries"));
        }
        let r0 = values[0];
        if r0.re < 0.0 {
            return Err(Error::invalid("rho(0) must be nonnegative"));
        }
        if r0.im.abs() > 1e-12 * r0.re.max(1.0) {
            return Err(Error::invalid("rho(0) must be real"));
        }
        values[0] = Complex64::new(r0.re, 0.0);
        let bound = r0.re * (1.0 + provenance.bound_tolerance());
        if let Some((k, v)) = values.iter().enumerate().find(|(_, v)| v.norm() > bound) {
            let msg = format!(
                "|rho({k})| = {:.6e} exceeds rho(0) = {:.6e} beyond tolerance",
                v.norm(),
                r0.re
            );
            return Err(match provenance {
                Provenance::Analytic => Error::invalid(msg),
                Provenance::Empirical { .. } => Error::insufficient(msg),
            });
        }
        Ok(AutocorrTable {
            lag_step,
            values,
            provenance,
        })
    }

    pub fn lag_step(&self) -> f64 {
        self.lag_step
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Largest lag covered by the table.
    pub fn max_lag(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.lag_step
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("lag,re,im\n");
        for (k, v) in self.values.iter().enumerate() {
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{:.16e}",
                k as f64 * self.lag_step,
                v.re,
                v.im
            );
        }
        out
    }

    /// JSON sidecar carrying the lag step and provenance.
    pub fn sidecar_json(&self) -> String {
        serde_json::to_string_pretty(&Sidecar {
            lag_step: self.lag_step,
            provenance: self.provenance,
        })
        .expect("sidecar serializes")
    }

    pub fn from_csv(csv: &str, sidecar: &str) -> Result<Self> {
        let meta: Sidecar = serde_json::from_str(sidecar)
            .map_err(|e| Error::invalid(format!("autocorrelation sidecar: {e}")))?;
        let mut lines = csv.lines().filter(|l| !l.trim().is_empty());
        if lines.next().map(str::trim) != Some("lag,re,im") {
            return Err(Error::invalid("expected header `lag,re,im`"));
        }
        let mut values = Vec::new();
        for (k, line) in lines.enumerate() {
            let f: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::invalid(format!("row {}: {e}", k + 1)))?;
            if f.len() != 3 {
                return Err(Error::invalid(format!("row {}: expected 3 fields", k + 1)));
            }
            let expected = k as f64 * meta.lag_step;
            if (f[0] - expected).abs() > 1e-9 * expected.max(meta.lag_step) {
                return Err(Error::invalid(format!("row {}: lag off the grid", k + 1)));
            }
            values.push(Complex64::new(f[1], f[2]));
        }
        AutocorrTable::new(meta.lag_step, values, meta.provenance)
    }
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    lag_step: f64,
    provenance: Provenance,
}

/// Finite-time estimate of `rho(k dt)` for `k = 0..lag_count`.
///
/// `rho_hat(k) = 1/(M-k) * sum_{n<M-k} conj(f_n) f_{n+k}`, i.e. the time
/// average of `<K^{k dt} f, f>`. The largest lag must leave more than half
/// of the `M` samples in the sum.
pub fn estimate_autocorr(ts: &TimeSeries, lag_count: usize) -> Result<AutocorrTable> {
    let f = ts.values();
    let m = f.len();
    if lag_count == 0 {
        return Err(Error::invalid("need at least one lag"));
    }
    if 2 * (lag_count - 1) >= m {
        return Err(Error::insufficient(format!(
            "largest lag index {} needs more than {} samples, series has {m}",
            lag_count - 1,
            2 * (lag_count - 1)
        )));
    }
    let values: Vec<Complex64> = (0..lag_count)
        .into_par_iter()
        .map(|k| {
            let terms = m - k;
            let sum: Complex64 = f[..terms]
                .iter()
                .zip(&f[k..])
                .map(|(a, b)| a.conj() * b)
                .sum();
            sum / terms as f64
        })
        .collect();
    AutocorrTable::new(
        ts.sample_step(),
        values,
        Provenance::Empirical {
            t_used: m as f64 * ts.sample_step(),
        },
    )
}

/// `rho(k)` for signed lag index `k`, using `rho(-s) = conj(rho(s))`.
pub fn extend_hermitian(table: &AutocorrTable, k: i64) -> Result<Complex64> {
    let idx = k.unsigned_abs() as usize;
    if idx >= table.len() {
        return Err(Error::insufficient(format!(
            "lag index {k} outside table of length {}",
            table.len()
        )));
    }
    let v = table.values[idx];
    Ok(if k < 0 { v.conj() } else { v })
}

/// Cesaro mean `(1/tau) int_0^tau |rho(s)|^2 ds` by the left-endpoint rule.
pub fn cesaro_sq_mean(table: &AutocorrTable, tau: f64) -> Result<f64> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::invalid("tau must be positive"));
    }
    let terms = (tau / table.lag_step - 1e-9).ceil() as usize;
    if terms > table.len() {
        return Err(Error::insufficient(format!(
            "tau = {tau} needs {terms} lags, table has {}",
            table.len()
        )));
    }
    let sum: f64 = table.values[..terms].iter().map(|v| v.norm_sqr()).sum();
    Ok(table.lag_step * sum / tau)
}
