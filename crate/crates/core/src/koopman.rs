//! Closed-form oracles for the mode-only part of `A_tau` and the link
//! between kernel eigenvectors and Koopman eigenfrequencies.
//!
//! For a signal `sum_j a_j e^{i x_j t}` the operator restricted to its modes
//! has the same nonzero spectrum as the Gram matrix of the scaled Fourier
//! atoms `a_j xi_j / sqrt(tau)`, `xi_j(s) = e^{i s x_j}`. Off-diagonal Gram
//! entries decay like `1/tau`, so the spectrum tends to `{|a_j|^2}`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::operator::eigh;
use crate::signal::DiscreteMode;

/// The sampled exponential `xi_n = e^{i n step x}`, `n < N = tau / step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierAtom {
    pub frequency: f64,
    pub tau: f64,
    pub step: f64,
}

impl FourierAtom {
    pub fn len(&self) -> usize {
        (self.tau / self.step).round() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Unnormalized samples; squared norm is `N`.
    pub fn samples(&self) -> Vec<Complex64> {
        atom(self.frequency, self.step, self.len())
    }

    /// Samples scaled to unit norm.
    pub fn unit(&self) -> Vec<Complex64> {
        let n = self.len();
        let scale = 1.0 / (n as f64).sqrt();
        atom(self.frequency, self.step, n)
            .into_iter()
            .map(|z| z * scale)
            .collect()
    }
}

fn atom(frequency: f64, step: f64, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|j| Complex64::cis(j as f64 * step * frequency))
        .collect()
}

/// Hermitian PSD matrix of inner products of scaled Fourier atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    pub entries: DMatrix<Complex64>,
}

impl GramMatrix {
    pub fn k(&self) -> usize {
        self.entries.nrows()
    }

    pub fn max_off_diagonal(&self) -> f64 {
        let k = self.k();
        let mut worst = 0.0f64;
        for j in 0..k {
            for l in 0..k {
                if j != l {
                    worst = worst.max(self.entries[(j, l)].norm());
                }
            }
        }
        worst
    }
}

/// `G_jj = |a_j|^2`, `G_jl = a_j conj(a_l) (e^{i(x_j - x_l) tau} - 1) / (i tau (x_j - x_l))`.
pub fn finite_gram(modes: &[DiscreteMode], tau: f64) -> Result<GramMatrix> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::invalid("tau must be positive"));
    }
    let k = modes.len();
    for j in 0..k {
        for l in j + 1..k {
            if modes[j].frequency == modes[l].frequency {
                return Err(Error::invalid(format!(
                    "modes {j} and {l} share frequency {}",
                    modes[j].frequency
                )));
            }
        }
    }
    let entries = DMatrix::from_fn(k, k, |j, l| {
        let (mj, ml) = (modes[j], modes[l]);
        let weight = mj.amplitude * ml.amplitude.conj();
        if j == l {
            return Complex64::new(weight.re, 0.0);
        }
        let delta = mj.frequency - ml.frequency;
        let phase = Complex64::cis(delta * tau) - 1.0;
        weight * phase / Complex64::new(0.0, tau * delta)
    });
    Ok(GramMatrix { entries })
}

/// Descending eigenvalues of a Gram matrix.
pub fn gram_spectrum(gram: &GramMatrix) -> Result<Vec<f64>> {
    if gram.k() == 0 {
        return Ok(Vec::new());
    }
    Ok(eigh(&gram.entries)?.eigenvalues)
}

fn unit_norm_check(v: &[Complex64]) -> Result<()> {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::invalid(format!("vector norm {norm} is not 1")));
    }
    Ok(())
}

fn raw_alignment(v: &[Complex64], frequency: f64, step: f64) -> f64 {
    let n = v.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, z) in v.iter().enumerate() {
        acc += Complex64::cis(-(j as f64) * step * frequency) * z;
    }
    acc.norm() / (n as f64).sqrt()
}

/// `|<xi_x / sqrt(N), v>|` for a unit vector `v`; 1 means `v` is the atom.
pub fn alignment(v: &[Complex64], frequency: f64, step: f64) -> Result<f64> {
    if v.is_empty() {
        return Err(Error::invalid("empty vector"));
    }
    unit_norm_check(v)?;
    Ok(raw_alignment(v, frequency, step))
}

/// Frequency in `band` whose Fourier atom best aligns with `v`.
///
/// A grid at spacing `pi / (8 N step)` locates the peak (by zero-padded FFT
/// when the band is wide), then golden-section search refines it to a
/// bracket narrower than `1e-8`.
pub fn estimate_frequency(v: &[Complex64], step: f64, band: (f64, f64)) -> Result<f64> {
    let (lo, hi) = band;
    if !lo.is_finite() || !hi.is_finite() || lo > hi {
        return Err(Error::invalid(format!("empty frequency band [{lo}, {hi}]")));
    }
    if step.is_nan() || step <= 0.0 {
        return Err(Error::invalid("step must be positive"));
    }
    let nyquist = PI / step;
    if lo < -nyquist * (1.0 + 1e-12) || hi > nyquist * (1.0 + 1e-12) {
        return Err(Error::invalid(format!(
            "band [{lo}, {hi}] leaves the Nyquist interval (-{nyquist}, {nyquist}]"
        )));
    }
    if v.is_empty() {
        return Err(Error::invalid("empty vector"));
    }
    unit_norm_check(v)?;
    let n = v.len();
    let res = PI / (n as f64 * step) / 8.0;
    let points = ((hi - lo) / res).ceil() as usize + 1;

    let mut best = (lo, raw_alignment(v, lo, step));
    let consider = |best: &mut (f64, f64), x: f64, score: f64| {
        if score > best.1 {
            *best = (x, score);
        }
    };
    if points.saturating_mul(n) > 1 << 22 {
        let len = 16 * n;
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        buf[..n].copy_from_slice(v);
        FftPlanner::new().plan_fft_forward(len).process(&mut buf);
        let period = 2.0 * PI / step;
        let scale = 1.0 / (n as f64).sqrt();
        for (m, z) in buf.iter().enumerate() {
            let mut x = m as f64 * res;
            if x > nyquist {
                x -= period;
            }
            if x >= lo && x <= hi {
                consider(&mut best, x, z.norm() * scale);
            }
        }
    } else {
        for i in 0..points {
            let x = (lo + i as f64 * res).min(hi);
            consider(&mut best, x, raw_alignment(v, x, step));
        }
    }
    consider(&mut best, hi, raw_alignment(v, hi, step));

    let mut a = (best.0 - res).max(lo);
    let mut b = (best.0 + res).min(hi);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let mut fc = raw_alignment(v, c, step);
    let mut fd = raw_alignment(v, d, step);
    while b - a > 1e-8 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = raw_alignment(v, c, step);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = raw_alignment(v, d, step);
        }
    }
    let refined = 0.5 * (a + b);
    if raw_alignment(v, refined, step) >= best.1 {
        Ok(refined)
    } else {
        Ok(best.0)
    }
}

/// Continuous-time frequencies `(q + 2 k pi) / dt` consistent with a
/// discrete-time eigenphase `q`, for `k` in `k_range`, ascending.
pub fn alias_candidates(q: f64, dt: f64, k_range: std::ops::RangeInclusive<i64>) -> Result<Vec<f64>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid("dt must be positive"));
    }
    if k_range.is_empty() {
        return Err(Error::invalid("alias index range is empty"));
    }
    Ok(k_range.map(|k| (q + 2.0 * PI * k as f64) / dt).collect())
}

/// Maps an angle into `[0, 2 pi)`.
pub fn wrap_phase(q: f64) -> f64 {
    let w = q.rem_euclid(2.0 * PI);
    if w >= 2.0 * PI {
        0.0
    } else {
        w
    }
}
