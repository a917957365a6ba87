use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::autocorr::{extend_hermitian, AutocorrTable};
use crate::error::{Error, Result};

/// Nystrom discretization of `(A_tau g)(t) = (1/tau) int_0^tau g(s) rho(t - s) ds`
/// on the grid `s_j = j * step`, left-endpoint weights.
///
/// The matrix is Hermitian Toeplitz, so only its first column
/// `generator[m] = (step / tau) rho(m step)` is stored; entry `(j, k)` is
/// `generator[j - k]` below the diagonal and its conjugate above.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    step: f64,
    tau: f64,
    generator: Vec<Complex64>,
}

impl KernelMatrix {
    pub fn n(&self) -> usize {
        self.generator.len()
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn generator(&self) -> &[Complex64] {
        &self.generator
    }

    pub fn entry(&self, j: usize, k: usize) -> Complex64 {
        if j >= k {
            self.generator[j - k]
        } else {
            self.generator[k - j].conj()
        }
    }

    /// Sum of the diagonal, equal to `rho(0)`.
    pub fn trace(&self) -> f64 {
        self.generator[0].re * self.n() as f64
    }

    /// Frobenius norm, computed from the Toeplitz structure.
    pub fn frobenius_norm(&self) -> f64 {
        let n = self.n();
        let off: f64 = self.generator[1..]
            .iter()
            .enumerate()
            .map(|(m, g)| 2.0 * (n - m - 1) as f64 * g.norm_sqr())
            .sum();
        (n as f64 * self.generator[0].norm_sqr() + off).sqrt()
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.n();
        DMatrix::from_fn(n, n, |j, k| self.entry(j, k))
    }

    /// Exact matrix-vector product.
    pub fn apply(&self, g: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.n();
        if g.len() != n {
            return Err(Error::invalid(format!(
                "vector has length {}, kernel is {n}x{n}",
                g.len()
            )));
        }
        Ok((0..n)
            .into_par_iter()
            .map(|j| {
                let lower: Complex64 = (0..=j).map(|k| self.generator[j - k] * g[k]).sum();
                let upper: Complex64 = (j + 1..n).map(|k| self.generator[k - j].conj() * g[k]).sum();
                lower + upper
            })
            .collect())
    }

    /// Row-major `[re, im]` pairs, for debugging dumps.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Dump {
            n: usize,
            step: f64,
            tau: f64,
            entries: Vec<Vec<[f64; 2]>>,
        }
        let n = self.n();
        let entries = (0..n)
            .map(|j| {
                (0..n)
                    .map(|k| {
                        let e = self.entry(j, k);
                        [e.re, e.im]
                    })
                    .collect()
            })
            .collect();
        serde_json::to_string(&Dump {
            n,
            step: self.step,
            tau: self.tau,
            entries,
        })
        .expect("kernel serializes")
    }

    /// Circulant-embedded product operator, `O(n log n)` per application.
    pub fn fft_operator(&self) -> ToeplitzFft {
        ToeplitzFft::new(&self.generator)
    }
}

/// Builds the `n x n` kernel for window `tau` from a lag table.
///
/// The quadrature step `tau / n` must be an integer multiple of the
/// table's lag step, and the table must reach lag `(n - 1) * step`.
pub fn build_kernel(table: &AutocorrTable, tau: f64, n: usize) -> Result<KernelMatrix> {
    if n == 0 {
        return Err(Error::invalid("kernel size n must be positive"));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::invalid("tau must be positive"));
    }
    let step = tau / n as f64;
    let ratio = step / table.lag_step();
    let stride = ratio.round();
    if stride < 1.0 || (ratio - stride).abs() > 1e-12 * ratio.max(1.0) {
        return Err(Error::invalid(format!(
            "quadrature step {step} is not a multiple of the lag step {}",
            table.lag_step()
        )));
    }
    let stride = stride as usize;
    let required = (n - 1) * stride + 1;
    if required > table.len() {
        return Err(Error::insufficient(format!(
            "kernel needs {required} lags (up to {}), table has {} (up to {})",
            (n - 1) as f64 * step,
            table.len(),
            table.max_lag()
        )));
    }
    let weight = step / tau;
    let generator = (0..n)
        .map(|m| extend_hermitian(table, (m * stride) as i64).map(|v| v * weight))
        .collect::<Result<Vec<_>>>()?;
    Ok(KernelMatrix {
        step,
        tau,
        generator,
    })
}

/// Hermitian Toeplitz product via a `2n` circulant embedding.
pub struct ToeplitzFft {
    n: usize,
    symbol: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl ToeplitzFft {
    fn new(generator: &[Complex64]) -> Self {
        let n = generator.len();
        let len = 2 * n;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let mut symbol = vec![Complex64::new(0.0, 0.0); len];
        symbol[..n].copy_from_slice(generator);
        for m in 1..n {
            symbol[len - m] = generator[m].conj();
        }
        forward.process(&mut symbol);
        let scale = 1.0 / len as f64;
        for s in symbol.iter_mut() {
            *s *= scale;
        }
        ToeplitzFft {
            n,
            symbol,
            forward,
            inverse,
        }
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.n, "operand length");
        let mut buf = vec![Complex64::new(0.0, 0.0); 2 * self.n];
        buf[..self.n].copy_from_slice(x);
        self.forward.process(&mut buf);
        for (b, s) in buf.iter_mut().zip(&self.symbol) {
            *b *= s;
        }
        self.inverse.process(&mut buf);
        buf.truncate(self.n);
        buf
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autocorr::Provenance;
    use crate::signal::{analytic_table, ContinuousComponentSpec, DiscreteMode, SignalSpec, TransientKernelSpec};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit_mode_table(freq: f64, step: f64, count: usize) -> AutocorrTable {
        let spec = SignalSpec::from_modes(vec![DiscreteMode::real(1.0, freq).unwrap()], step, 10.0).unwrap();
        analytic_table(&spec, step, count).unwrap()
    }

    #[test]
    fn single_mode_two_by_two() {
        let k = build_kernel(&unit_mode_table(1.0, 1.0, 2), 2.0, 2).unwrap();
        let expect = [[c(1.0, 0.0), Complex64::cis(-1.0)], [Complex64::cis(1.0), c(1.0, 0.0)]];
        for (j, row) in expect.iter().enumerate() {
            for (l, e) in row.iter().enumerate() {
                assert!((k.entry(j, l) - 0.5 * e).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn zero_and_ou_kernels() {
        let zero = AutocorrTable::new(1.0, vec![c(0.0, 0.0); 4], Provenance::Analytic).unwrap();
        let k = build_kernel(&zero, 3.0, 3).unwrap();
        assert!(k.to_dense().iter().all(|v| *v == c(0.0, 0.0)));

        let ou = SignalSpec::new(
            vec![],
            ContinuousComponentSpec::OrnsteinUhlenbeck { sigma: 1.0, theta: 1.0 },
            TransientKernelSpec::None,
            1.0,
            10.0,
            0,
        )
        .unwrap();
        let k = build_kernel(&analytic_table(&ou, 1.0, 3).unwrap(), 3.0, 3).unwrap();
        let row = [1.0, (-1.0f64).exp(), (-2.0f64).exp()];
        for j in 0..3 {
            for l in 0..3 {
                let d = (j as i64 - l as i64).unsigned_abs() as usize;
                assert!((k.entry(j, l) - c(row[d] / 3.0, 0.0)).norm() < 1e-16);
            }
        }
    }

    #[test]
    fn subsampled_table_and_errors() {
        let table = unit_mode_table(0.7, 0.05, 41);
        let k = build_kernel(&table, 2.0, 20).unwrap();
        assert!((k.entry(3, 0) - 0.05 * Complex64::cis(0.7 * 0.3)).norm() < 1e-15);

        let err = build_kernel(&table, 2.0, 15).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let err = build_kernel(&table, 4.0, 20).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert!(err.to_string().contains("41"));
        assert!(build_kernel(&table, 2.0, 0).is_err());
    }

    #[test]
    fn structural_invariants() {
        let table = unit_mode_table(1.3, 0.1, 30);
        let k = build_kernel(&table, 3.0, 30).unwrap();
        let d = k.to_dense();
        for j in 0..30 {
            for l in 0..30 {
                assert_eq!(d[(j, l)], d[(l, j)].conj());
                if j > 0 && l > 0 {
                    assert_eq!(d[(j, l)], d[(j - 1, l - 1)]);
                }
            }
        }
        assert!((k.trace() - 1.0).abs() < 1e-14);
        let fro = d.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        assert!((k.frobenius_norm() - fro).abs() < 1e-12);
    }

    #[test]
    fn apply_examples() {
        let n = 40;
        let step = 0.1;
        let freq = 2.0;
        let table = unit_mode_table(freq, step, n);
        let k = build_kernel(&table, n as f64 * step, n).unwrap();
        assert_eq!(k.apply(&vec![c(0.0, 0.0); n]).unwrap(), vec![c(0.0, 0.0); n]);

        let atom: Vec<Complex64> = (0..n).map(|j| Complex64::cis(j as f64 * step * freq)).collect();
        let y = k.apply(&atom).unwrap();
        for (a, b) in y.iter().zip(&atom) {
            assert!((a - b).norm() < 1e-13);
        }

        let white = AutocorrTable::new(1.0, {
            let mut v = vec![c(0.0, 0.0); 10];
            v[0] = c(2.0, 0.0);
            v
        }, Provenance::Analytic)
        .unwrap();
        let k = build_kernel(&white, 10.0, 10).unwrap();
        let g: Vec<Complex64> = (0..10).map(|j| c(j as f64, -1.0)).collect();
        let y = k.apply(&g).unwrap();
        for (a, b) in y.iter().zip(&g) {
            assert!((a - 0.2 * b).norm() < 1e-15);
        }
        assert!(k.apply(&g[..3]).is_err());
    }

    #[test]
    fn fft_product_matches_direct() {
        let spec = SignalSpec::new(
            vec![DiscreteMode::new(c(0.4, 0.3), 1.1).unwrap()],
            ContinuousComponentSpec::OrnsteinUhlenbeck { sigma: 0.7, theta: 2.0 },
            TransientKernelSpec::None,
            0.1,
            10.0,
            0,
        )
        .unwrap();
        for n in [1usize, 2, 7, 64, 101] {
            let k = build_kernel(&analytic_table(&spec, 0.1, n).unwrap(), n as f64 * 0.1, n).unwrap();
            let x: Vec<Complex64> = (0..n).map(|j| c((j as f64).sin(), (0.3 * j as f64).cos())).collect();
            let direct = k.apply(&x).unwrap();
            let fast = k.fft_operator().apply(&x);
            for (a, b) in direct.iter().zip(&fast) {
                assert!((a - b).norm() < 1e-13, "n = {n}");
            }
        }
    }
}
