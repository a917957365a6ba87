//! Synthetic signals with a known Koopman decomposition.
//!
//! A [`SignalSpec`] lists the discrete modes `a_i e^{i x_i t}` of a signal
//! together with an optional stationary noise component (absolutely
//! continuous spectrum) and an optional transient component that is only
//! described through its inner-product decay. The spec is the ground truth
//! every spectral estimate in this crate is compared against.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::autocorr::{AutocorrTable, Provenance};
use crate::error::{Error, Result};

/// One Koopman eigen-component: amplitude `a_i` at angular frequency `x_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteMode {
    pub amplitude: Complex64,
    pub frequency: f64,
}

impl DiscreteMode {
    pub fn new(amplitude: Complex64, frequency: f64) -> Result<Self> {
        if amplitude == Complex64::new(0.0, 0.0) || !amplitude.is_finite() {
            return Err(Error::invalid("mode amplitude must be finite and nonzero"));
        }
        if !frequency.is_finite() {
            return Err(Error::invalid("mode frequency must be finite"));
        }
        Ok(DiscreteMode {
            amplitude,
            frequency,
        })
    }

    /// Shorthand for a real amplitude.
    pub fn real(amplitude: f64, frequency: f64) -> Result<Self> {
        Self::new(Complex64::new(amplitude, 0.0), frequency)
    }

    /// Mass `|a|^2` of the spectral atom at this frequency.
    pub fn power(&self) -> f64 {
        self.amplitude.norm_sqr()
    }
}

/// Stationary noise component with an absolutely continuous spectral measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ContinuousComponentSpec {
    #[default]
    None,
    /// Autocorrelation `sigma^2 exp(-s / theta)`.
    OrnsteinUhlenbeck { sigma: f64, theta: f64 },
    /// `rho(0) = sigma^2`, zero at every positive lag.
    White { sigma: f64 },
}

impl ContinuousComponentSpec {
    fn validate(&self) -> Result<()> {
        match *self {
            ContinuousComponentSpec::None => Ok(()),
            ContinuousComponentSpec::OrnsteinUhlenbeck { sigma, theta } => {
                if !(sigma > 0.0 && sigma.is_finite()) {
                    return Err(Error::invalid("continuous.sigma must be positive"));
                }
                if !(theta > 0.0 && theta.is_finite()) {
                    return Err(Error::invalid("continuous.theta must be positive"));
                }
                Ok(())
            }
            ContinuousComponentSpec::White { sigma } => {
                if !(sigma > 0.0 && sigma.is_finite()) {
                    return Err(Error::invalid("continuous.sigma must be positive"));
                }
                Ok(())
            }
        }
    }

    /// Analytic autocorrelation at lag `s >= 0`.
    pub fn autocorrelation(&self, s: f64) -> f64 {
        match *self {
            ContinuousComponentSpec::None => 0.0,
            ContinuousComponentSpec::OrnsteinUhlenbeck { sigma, theta } => {
                sigma * sigma * (-s.abs() / theta).exp()
            }
            ContinuousComponentSpec::White { sigma } => {
                if s == 0.0 {
                    sigma * sigma
                } else {
                    0.0
                }
            }
        }
    }
}

/// Completely nonunitary component, given only by `<gamma, K^s gamma>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TransientKernelSpec {
    #[default]
    None,
    /// `<gamma, K^s gamma> = c exp(-rate s)`.
    Exponential { c: f64, rate: f64 },
}

impl TransientKernelSpec {
    fn validate(&self) -> Result<()> {
        match *self {
            TransientKernelSpec::None => Ok(()),
            TransientKernelSpec::Exponential { c, rate } => {
                if !(c > 0.0 && c.is_finite()) {
                    return Err(Error::invalid("transient.c must be positive"));
                }
                if !(rate > 0.0 && rate.is_finite()) {
                    return Err(Error::invalid("transient.rate must be positive"));
                }
                Ok(())
            }
        }
    }

    pub fn autocorrelation(&self, s: f64) -> f64 {
        match *self {
            TransientKernelSpec::None => 0.0,
            TransientKernelSpec::Exponential { c, rate } => c * (-rate * s.abs()).exp(),
        }
    }
}

/// Ground-truth description of a synthetic signal.
///
/// Modes are kept sorted by descending `|a_i|`, ties broken by ascending
/// frequency, so that `modes[i]` is the `i`-th Koopman coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SignalSpecJson", into = "SignalSpecJson")]
pub struct SignalSpec {
    modes: Vec<DiscreteMode>,
    pub continuous: ContinuousComponentSpec,
    pub transient: TransientKernelSpec,
    sample_step: f64,
    duration: f64,
    pub seed: u64,
}

impl SignalSpec {
    pub fn new(
        modes: Vec<DiscreteMode>,
        continuous: ContinuousComponentSpec,
        transient: TransientKernelSpec,
        sample_step: f64,
        duration: f64,
        seed: u64,
    ) -> Result<Self> {
        if !(sample_step > 0.0 && sample_step.is_finite()) {
            return Err(Error::invalid("dt must be positive"));
        }
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(Error::invalid("T must be positive"));
        }
        if duration < sample_step {
            return Err(Error::invalid("T must cover at least one sample step (dt)"));
        }
        continuous.validate()?;
        transient.validate()?;
        for m in &modes {
            DiscreteMode::new(m.amplitude, m.frequency)?;
        }
        let mut modes = modes;
        modes.sort_by(|a, b| {
            b.amplitude
                .norm()
                .partial_cmp(&a.amplitude.norm())
                .unwrap_or(Ordering::Equal)
                .then(a.frequency.partial_cmp(&b.frequency).unwrap_or(Ordering::Equal))
        });
        let mut freqs: Vec<f64> = modes.iter().map(|m| m.frequency).collect();
        freqs.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
        if freqs.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("mode frequencies must be pairwise distinct"));
        }
        Ok(SignalSpec {
            modes,
            continuous,
            transient,
            sample_step,
            duration,
            seed,
        })
    }

    /// Mode-only spec with no noise and no transient part.
    pub fn from_modes(modes: Vec<DiscreteMode>, sample_step: f64, duration: f64) -> Result<Self> {
        Self::new(
            modes,
            ContinuousComponentSpec::None,
            TransientKernelSpec::None,
            sample_step,
            duration,
            0,
        )
    }

    pub fn modes(&self) -> &[DiscreteMode] {
        &self.modes
    }

    pub fn sample_step(&self) -> f64 {
        self.sample_step
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// Number of samples covering `[0, T]` on the `dt` grid.
    pub fn sample_count(&self) -> usize {
        (self.duration / self.sample_step + 1e-9).floor() as usize + 1
    }

    /// Copy of this spec with a different mode list (noise and transient kept).
    pub fn with_modes(&self, modes: Vec<DiscreteMode>) -> Result<Self> {
        Self::new(
            modes,
            self.continuous,
            self.transient,
            self.sample_step,
            self.duration,
            self.seed,
        )
    }

    /// Copy keeping only the modes, with noise and transient parts removed.
    pub fn modes_only(&self) -> Self {
        SignalSpec {
            continuous: ContinuousComponentSpec::None,
            transient: TransientKernelSpec::None,
            ..self.clone()
        }
    }

    /// Closed-form lagged moment `rho(s)`; negative lags use `rho(-s) = conj(rho(s))`.
    pub fn autocorrelation(&self, s: f64) -> Complex64 {
        let discrete: Complex64 = self
            .modes
            .iter()
            .map(|m| m.power() * Complex64::cis(m.frequency * s))
            .sum();
        discrete
            + Complex64::new(
                self.continuous.autocorrelation(s) + self.transient.autocorrelation(s),
                0.0,
            )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("signal spec: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Hex SHA-256 of the compact JSON form; identifies the spec in reports.
    pub fn content_hash(&self) -> String {
        let compact = serde_json::to_string(self).expect("spec serializes");
        hex::encode(Sha256::digest(compact.as_bytes()))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ModeJson {
    re: f64,
    im: f64,
    freq: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SignalSpecJson {
    modes: Vec<ModeJson>,
    #[serde(default)]
    continuous: ContinuousComponentSpec,
    #[serde(default)]
    transient: TransientKernelSpec,
    dt: f64,
    #[serde(rename = "T")]
    duration: f64,
    #[serde(default)]
    seed: u64,
}

impl TryFrom<SignalSpecJson> for SignalSpec {
    type Error = Error;

    fn try_from(raw: SignalSpecJson) -> Result<Self> {
        let modes = raw
            .modes
            .iter()
            .enumerate()
            .map(|(i, m)| {
                DiscreteMode::new(Complex64::new(m.re, m.im), m.freq)
                    .map_err(|e| Error::invalid(format!("modes[{i}]: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        SignalSpec::new(
            modes,
            raw.continuous,
            raw.transient,
            raw.dt,
            raw.duration,
            raw.seed,
        )
    }
}

impl From<SignalSpec> for SignalSpecJson {
    fn from(spec: SignalSpec) -> Self {
        SignalSpecJson {
            modes: spec
                .modes
                .iter()
                .map(|m| ModeJson {
                    re: m.amplitude.re,
                    im: m.amplitude.im,
                    freq: m.frequency,
                })
                .collect(),
            continuous: spec.continuous,
            transient: spec.transient,
            dt: spec.sample_step,
            duration: spec.duration,
            seed: spec.seed,
        }
    }
}

/// Uniformly sampled complex series, `values[n] = f(n dt)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    sample_step: f64,
    values: Vec<Complex64>,
}

impl TimeSeries {
    pub fn new(sample_step: f64, values: Vec<Complex64>) -> Result<Self> {
        if !(sample_step > 0.0 && sample_step.is_finite()) {
            return Err(Error::invalid("sample step must be positive"));
        }
        if values.len() < 2 {
            return Err(Error::invalid("time series needs at least two samples"));
        }
        Ok(TimeSeries {
            sample_step,
            values,
        })
    }

    pub fn sample_step(&self) -> f64 {
        self.sample_step
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

    /// Leading samples covering `[0, duration]`.
    pub fn truncated(&self, duration: f64) -> Result<Self> {
        let count = (duration / self.sample_step + 1e-9).floor() as usize + 1;
        if count > self.values.len() {
            return Err(Error::insufficient(format!(
                "series has {} samples, {count} required",
                self.values.len()
            )));
        }
        TimeSeries::new(self.sample_step, self.values[..count].to_vec())
    }

    /// CSV with header `t,re,im`, 17 significant digits per field.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 72 + 8);
        out.push_str("t,re,im\n");
        for (n, v) in self.values.iter().enumerate() {
            let t = n as f64 * self.sample_step;
            let _ = writeln!(out, "{t:.16e},{:.16e},{:.16e}", v.re, v.im);
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next().map(str::trim) {
            Some("t,re,im") => {}
            other => {
                return Err(Error::invalid(format!(
                    "expected header `t,re,im`, found {other:?}"
                )))
            }
        }
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (i, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(Error::invalid(format!("row {}: expected 3 fields", i + 1)));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::invalid(format!("row {}: {e}", i + 1)))
            };
            times.push(parse(fields[0])?);
            values.push(Complex64::new(parse(fields[1])?, parse(fields[2])?));
        }
        if times.len() < 2 {
            return Err(Error::invalid("time series needs at least two samples"));
        }
        let step = times[1] - times[0];
        for (n, t) in times.iter().enumerate() {
            let expected = times[0] + n as f64 * step;
            if (t - expected).abs() > 1e-9 * expected.abs().max(step) {
                return Err(Error::invalid(format!("row {}: non-uniform sampling", n + 1)));
            }
        }
        TimeSeries::new(step, values)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_csv(&text)
    }
}

fn standard_complex_normal(rng: &mut ChaCha20Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Samples the signal described by `spec` on `[0, T]`.
///
/// The mode part is evaluated in closed form. Noise paths come from a
/// ChaCha20 stream seeded with `spec.seed`: white noise is i.i.d. complex
/// Gaussian with `E|z|^2 = sigma^2`, and the OU path uses the exact
/// one-step recursion started from its stationary law. The transient part
/// has no time-domain realization and contributes nothing here.
pub fn synthesize(spec: &SignalSpec) -> TimeSeries {
    let count = spec.sample_count();
    let dt = spec.sample_step;
    let mut values: Vec<Complex64> = (0..count)
        .map(|n| {
            let t = n as f64 * dt;
            spec.modes
                .iter()
                .map(|m| m.amplitude * Complex64::cis(m.frequency * t))
                .sum()
        })
        .collect();

    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    match spec.continuous {
        ContinuousComponentSpec::None => {}
        ContinuousComponentSpec::White { sigma } => {
            for v in values.iter_mut() {
                *v += sigma * standard_complex_normal(&mut rng);
            }
        }
        ContinuousComponentSpec::OrnsteinUhlenbeck { sigma, theta } => {
            let decay = (-dt / theta).exp();
            let innovation = sigma * (1.0 - decay * decay).sqrt();
            let mut state = sigma * standard_complex_normal(&mut rng);
            for v in values.iter_mut() {
                *v += state;
                state = decay * state + innovation * standard_complex_normal(&mut rng);
            }
        }
    }
    TimeSeries {
        sample_step: dt,
        values,
    }
}

/// Closed-form autocorrelation table on a uniform lag grid `lags = [0, d, 2d, ...]`.
pub fn analytic_autocorr(spec: &SignalSpec, lags: &[f64]) -> Result<AutocorrTable> {
    if lags.len() < 2 {
        return Err(Error::invalid("need at least two lags to fix the lag step"));
    }
    if lags[0] != 0.0 {
        return Err(Error::invalid("lags must start at 0"));
    }
    let step = lags[1];
    if step.is_nan() || step <= 0.0 {
        return Err(Error::invalid("lags must be strictly ascending"));
    }
    for (k, s) in lags.iter().enumerate() {
        let expected = k as f64 * step;
        if (s - expected).abs() > 1e-9 * expected.max(step) {
            return Err(Error::invalid("lags must be uniformly spaced"));
        }
    }
    analytic_table(spec, step, lags.len())
}

/// Closed-form table of `count` lags spaced by `lag_step`.
pub fn analytic_table(spec: &SignalSpec, lag_step: f64, count: usize) -> Result<AutocorrTable> {
    let values = (0..count)
        .map(|k| spec.autocorrelation(k as f64 * lag_step))
        .collect();
    AutocorrTable::new(lag_step, values, Provenance::Analytic)
}

/// First `k` limit eigenvalues `|a_i|^2`, descending and zero padded.
pub fn ground_truth(spec: &SignalSpec, k: usize) -> Vec<f64> {
    let mut truth: Vec<f64> = spec.modes.iter().map(DiscreteMode::power).collect();
    truth.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    truth.resize(k, 0.0);
    truth.truncate(k);
    truth
}

/// One Fourier harmonic `coeff * e^{i m theta}` of an observable on the circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Harmonic {
    pub coeff: Complex64,
    pub wavenumber: i64,
}

/// Mode list induced by observing `sum c_m e^{i m theta_t}` along the
/// rotation `theta_t = theta_0 + alpha t`.
pub fn torus_modes(alpha: f64, harmonics: &[Harmonic], initial_angle: f64) -> Result<Vec<DiscreteMode>> {
    if alpha == 0.0 || !alpha.is_finite() {
        return Err(Error::invalid("rotation number alpha must be finite and nonzero"));
    }
    let mut seen = std::collections::HashSet::new();
    let mut modes = Vec::new();
    for h in harmonics {
        if !seen.insert(h.wavenumber) {
            return Err(Error::invalid("harmonic wavenumbers must be pairwise distinct"));
        }
        if h.wavenumber == 0 {
            if h.coeff != Complex64::new(0.0, 0.0) {
                return Err(Error::invalid(
                    "wavenumber 0 with a nonzero coefficient breaks the zero-mean assumption",
                ));
            }
            continue;
        }
        if h.coeff == Complex64::new(0.0, 0.0) {
            continue;
        }
        let m = h.wavenumber as f64;
        modes.push(DiscreteMode::new(
            h.coeff * Complex64::cis(m * initial_angle),
            m * alpha,
        )?);
    }
    Ok(modes)
}

/// Observes an ergodic circle rotation through a trigonometric polynomial.
///
/// The result is exactly `synthesize` of the mode spec returned by
/// [`torus_modes`]: each harmonic `m` is a Koopman eigenfunction with
/// frequency `m alpha`.
pub fn torus_rotation(
    alpha: f64,
    harmonics: &[Harmonic],
    sample_step: f64,
    duration: f64,
    initial_angle: f64,
) -> Result<TimeSeries> {
    let modes = torus_modes(alpha, harmonics, initial_angle)?;
    let spec = SignalSpec::from_modes(modes, sample_step, duration)?;
    Ok(synthesize(&spec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constant_mode_is_all_ones() {
        let spec = SignalSpec::from_modes(vec![DiscreteMode::real(1.0, 0.0).unwrap()], 1.0, 4.0).unwrap();
        let ts = synthesize(&spec);
        assert_eq!(ts.values(), &[c(1.0, 0.0); 5]);
    }

    #[test]
    fn nyquist_mode_alternates() {
        let spec = SignalSpec::from_modes(vec![DiscreteMode::real(1.0, PI).unwrap()], 1.0, 3.0).unwrap();
        let ts = synthesize(&spec);
        let expected = [1.0, -1.0, 1.0, -1.0];
        assert_eq!(ts.len(), 4);
        for (v, e) in ts.values().iter().zip(expected) {
            assert!((v - c(e, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn white_noise_mean_is_small() {
        let spec = SignalSpec::new(
            vec![],
            ContinuousComponentSpec::White { sigma: 1.0 },
            TransientKernelSpec::None,
            1.0,
            1e4,
            7,
        )
        .unwrap();
        let ts = synthesize(&spec);
        let mean: Complex64 = ts.values().iter().sum::<Complex64>() / ts.len() as f64;
        assert!(mean.norm() <= 0.05, "mean {mean}");
        let power: f64 = ts.values().iter().map(|v| v.norm_sqr()).sum::<f64>() / ts.len() as f64;
        assert!((power - 1.0).abs() < 0.05, "power {power}");
    }

    #[test]
    fn synthesis_is_deterministic_per_seed() {
        let mk = |seed| {
            SignalSpec::new(
                vec![DiscreteMode::real(1.0, 0.3).unwrap()],
                ContinuousComponentSpec::OrnsteinUhlenbeck { sigma: 1.0, theta: 2.0 },
                TransientKernelSpec::None,
                0.1,
                50.0,
                seed,
            )
            .unwrap()
        };
        assert_eq!(synthesize(&mk(3)), synthesize(&mk(3)));
        assert_ne!(synthesize(&mk(3)), synthesize(&mk(4)));
    }

    #[test]
    fn ou_path_has_exponential_lag_one_correlation() {
        let spec = SignalSpec::new(
            vec![],
            ContinuousComponentSpec::OrnsteinUhlenbeck { sigma: 1.0, theta: 1.0 },
            TransientKernelSpec::None,
            0.5,
            50_000.0,
            11,
        )
        .unwrap();
        let ts = synthesize(&spec);
        let v = ts.values();
        let m = v.len();
        let r0: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>() / m as f64;
        let r1: Complex64 = (0..m - 1).map(|n| v[n].conj() * v[n + 1]).sum::<Complex64>() / (m - 1) as f64;
        assert!((r0 - 1.0).abs() < 0.05, "r0 {r0}");
        assert!((r1.re - (-0.5f64).exp()).abs() < 0.05, "r1 {r1}");
        assert!(r1.im.abs() < 0.05);
    }

    #[test]
    fn analytic_autocorr_examples() {
        let unit = SignalSpec::from_modes(vec![DiscreteMode::real(1.0, 2.0).unwrap()], 1.0, 10.0).unwrap();
        let t = analytic_autocorr(&unit, &[0.0, PI]).unwrap();
        assert!((t.values()[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((t.values()[1] - c(1.0, 0.0)).norm() < 1e-14);

        let ou = SignalSpec::new(
            vec![],
            ContinuousComponentSpec::OrnsteinUhlenbeck { sigma: 1.0, theta: 1.0 },
            TransientKernelSpec::None,
            1.0,
            10.0,
            0,
        )
        .unwrap();
        let t = analytic_autocorr(&ou, &[0.0, 1.0]).unwrap();
        assert!((t.values()[1].re - 0.36787944117144233).abs() < 1e-15);

        let two = SignalSpec::from_modes(
            vec![DiscreteMode::real(1.0, 1.0).unwrap(), DiscreteMode::real(0.5, 2.0).unwrap()],
            1.0,
            10.0,
        )
        .unwrap();
        let t = analytic_autocorr(&two, &[0.0, 1.0]).unwrap();
        assert_eq!(t.values()[0], c(1.25, 0.0));
    }

    #[test]
    fn analytic_autocorr_rejects_irregular_lags() {
        let spec = SignalSpec::from_modes(vec![], 1.0, 10.0).unwrap();
        assert!(analytic_autocorr(&spec, &[0.0]).is_err());
        assert!(analytic_autocorr(&spec, &[1.0, 2.0]).is_err());
        assert!(analytic_autocorr(&spec, &[0.0, 1.0, 3.0]).is_err());
    }

    #[test]
    fn ground_truth_examples() {
        let two = SignalSpec::from_modes(
            vec![DiscreteMode::real(0.5, 2.0).unwrap(), DiscreteMode::real(1.0, 1.0).unwrap()],
            1.0,
            10.0,
        )
        .unwrap();
        assert_eq!(ground_truth(&two, 3), vec![1.0, 0.25, 0.0]);

        let ou = SignalSpec::new(
            vec![],
            ContinuousComponentSpec::OrnsteinUhlenbeck { sigma: 1.0, theta: 1.0 },
            TransientKernelSpec::None,
            1.0,
            10.0,
            0,
        )
        .unwrap();
        assert_eq!(ground_truth(&ou, 2), vec![0.0, 0.0]);

        let phased = SignalSpec::from_modes(
            vec![DiscreteMode::new(Complex64::from_polar(2.0, PI / 3.0), 5.0).unwrap()],
            1.0,
            10.0,
        )
        .unwrap();
        assert!((ground_truth(&phased, 1)[0] - 4.0).abs() < 1e-14);
    }

    #[test]
    fn modes_sorted_with_frequency_tiebreak() {
        let spec = SignalSpec::from_modes(
            vec![
                DiscreteMode::real(0.5, 3.0).unwrap(),
                DiscreteMode::real(1.0, 2.0).unwrap(),
                DiscreteMode::new(c(0.0, 0.5), -1.0).unwrap(),
            ],
            1.0,
            10.0,
        )
        .unwrap();
        let freqs: Vec<f64> = spec.modes().iter().map(|m| m.frequency).collect();
        assert_eq!(freqs, vec![2.0, -1.0, 3.0]);
    }

    #[test]
    fn spec_validation() {
        assert!(DiscreteMode::real(0.0, 1.0).is_err());
        let dup = vec![DiscreteMode::real(1.0, 1.0).unwrap(), DiscreteMode::real(0.5, 1.0).unwrap()];
        assert!(SignalSpec::from_modes(dup, 1.0, 10.0).is_err());
        assert!(SignalSpec::from_modes(vec![], 0.0, 10.0).is_err());
        assert!(SignalSpec::from_modes(vec![], 1.0, -1.0).is_err());
        assert!(SignalSpec::new(
            vec![],
            ContinuousComponentSpec::OrnsteinUhlenbeck { sigma: 1.0, theta: 0.0 },
            TransientKernelSpec::None,
            1.0,
            10.0,
            0
        )
        .is_err());
        assert!(SignalSpec::new(
            vec![],
            ContinuousComponentSpec::None,
            TransientKernelSpec::Exponential { c: 1.0, rate: -1.0 },
            1.0,
            10.0,
            0
        )
        .is_err());
    }

    #[test]
    fn json_schema_and_missing_field() {
        let text = r#"{"modes":[{"re":1.0,"im":0.0,"freq":2.0}],
            "continuous":{"kind":"ornstein_uhlenbeck","sigma":1.0,"theta":1.0},
            "transient":{"kind":"exponential","c":1.0,"rate":0.5},
            "dt":0.1,"T":10.0,"seed":9}"#;
        let spec = SignalSpec::from_json(text).unwrap();
        assert_eq!(spec.seed, 9);
        assert_eq!(spec.transient, TransientKernelSpec::Exponential { c: 1.0, rate: 0.5 });
        let again = SignalSpec::from_json(&spec.to_json()).unwrap();
        assert_eq!(spec, again);

        let missing = r#"{"modes":[],"T":10.0}"#;
        let err = SignalSpec::from_json(missing).unwrap_err();
        assert!(err.to_string().contains("dt"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn csv_roundtrip_is_exact() {
        let spec = SignalSpec::new(
            vec![DiscreteMode::new(c(0.3, -0.7), 1.234).unwrap()],
            ContinuousComponentSpec::White { sigma: 0.5 },
            TransientKernelSpec::None,
            0.1,
            2.0,
            5,
        )
        .unwrap();
        let ts = synthesize(&spec);
        let csv = ts.to_csv();
        assert!(csv.starts_with("t,re,im\n"));
        let back = TimeSeries::from_csv(&csv).unwrap();
        assert_eq!(back.values(), ts.values());
        assert!((back.sample_step() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn torus_examples() {
        let h = [Harmonic { coeff: c(1.0, 0.0), wavenumber: 1 }];
        let ts = torus_rotation(1.0, &h, 1.0, 3.0, 0.0).unwrap();
        for (n, v) in ts.values().iter().take(3).enumerate() {
            assert!((v - Complex64::cis(n as f64)).norm() < 1e-15);
        }

        let h = [Harmonic { coeff: c(1.0, 0.0), wavenumber: 2 }];
        let ts = torus_rotation(PI, &h, 1.0, 2.0, 0.0).unwrap();
        assert_eq!(ts.len(), 3);
        for v in ts.values() {
            assert!((v - c(1.0, 0.0)).norm() < 1e-14);
        }

        let bad = [Harmonic { coeff: c(1.0, 0.0), wavenumber: 0 }];
        assert!(torus_rotation(1.0, &bad, 1.0, 3.0, 0.0).is_err());
        let zero = [Harmonic { coeff: c(0.0, 0.0), wavenumber: 0 }, Harmonic { coeff: c(1.0, 0.0), wavenumber: 1 }];
        assert!(torus_rotation(1.0, &zero, 1.0, 3.0, 0.0).is_ok());
        assert!(torus_rotation(0.0, &h, 1.0, 3.0, 0.0).is_err());
    }

    #[test]
    fn torus_matches_induced_spec() {
        let alpha = 2f64.sqrt();
        let h = [
            Harmonic { coeff: c(1.0, 0.0), wavenumber: 1 },
            Harmonic { coeff: c(0.3, 0.0), wavenumber: -2 },
        ];
        let theta0 = 0.4;
        let ts = torus_rotation(alpha, &h, 0.1, 20.0, theta0).unwrap();
        let spec = SignalSpec::from_modes(torus_modes(alpha, &h, theta0).unwrap(), 0.1, 20.0).unwrap();
        assert_eq!(ts, synthesize(&spec));

        // rho(s) = 1 * e^{i alpha s} + 0.09 e^{-2 i alpha s}, evaluated independently.
        let table = analytic_autocorr(&spec, &[0.0, 1.0, 2.0]).unwrap();
        for (k, v) in table.values().iter().enumerate() {
            let s = k as f64;
            let expected = Complex64::cis(alpha * s) + 0.09 * Complex64::cis(-2.0 * alpha * s);
            assert!((v - expected).norm() < 1e-12);
        }
    }
}
