//! The autocorrelation operator `A_tau`: Nystrom kernel and its spectrum.

mod eigh;
mod kernel;
mod lanczos;

pub use eigh::{eigh, EigenResult};
pub use kernel::{build_kernel, KernelMatrix, ToeplitzFft};
pub use lanczos::{lanczos_top, LanczosOptions, LanczosOutcome};

use crate::autocorr::AutocorrTable;
use crate::error::{Error, Result};

/// Kernels up to this size are decomposed densely by Jacobi; larger ones
/// go through Lanczos on the FFT Toeplitz product.
pub const DENSE_LIMIT: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolverPath {
    DenseJacobi,
    Lanczos { iterations: usize, converged: bool },
}

/// Leading eigenpairs of a kernel plus a lower-end spectral estimate.
#[derive(Debug, Clone)]
pub struct KernelSpectrum {
    pub top: EigenResult,
    /// Smallest eigenvalue (dense path) or smallest Ritz value (Lanczos).
    pub lowest: f64,
    pub path: SolverPath,
}

/// Top `k` eigenpairs of `kernel`.
pub fn kernel_spectrum(kernel: &KernelMatrix, k: usize) -> Result<KernelSpectrum> {
    let n = kernel.n();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("k = {k} must lie in 1..={n}")));
    }
    if n <= DENSE_LIMIT {
        let full = eigh(&kernel.to_dense())?;
        let lowest = *full.eigenvalues.last().expect("n >= 1");
        return Ok(KernelSpectrum {
            top: full.truncated(k),
            lowest,
            path: SolverPath::DenseJacobi,
        });
    }
    let fft = kernel.fft_operator();
    let out = lanczos_top(n, |x| fft.apply(x), k, LanczosOptions::default())?;
    Ok(KernelSpectrum {
        top: out.top,
        lowest: out.lowest_ritz,
        path: SolverPath::Lanczos {
            iterations: out.iterations,
            converged: out.converged,
        },
    })
}

/// `build_kernel` then the leading `k` eigenvalues, descending.
pub fn top_eigenvalues(table: &AutocorrTable, tau: f64, n: usize, k: usize) -> Result<Vec<f64>> {
    if k > n {
        return Err(Error::invalid(format!("k = {k} exceeds n = {n}")));
    }
    let kernel = build_kernel(table, tau, n)?;
    Ok(kernel_spectrum(&kernel, k)?.top.eigenvalues)
}
