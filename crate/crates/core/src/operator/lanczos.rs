//! Lanczos iteration with full reorthogonalization, for the leading
//! eigenpairs of kernels too large to materialize.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::eigh::{canonicalize_phase, EigenResult};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    pub max_iter: usize,
    /// Relative residual bound `|beta_m y_m| / ||A||` for convergence.
    pub tol: f64,
    pub check_every: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            max_iter: 300,
            tol: 1e-11,
            check_every: 25,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LanczosOutcome {
    pub top: EigenResult,
    /// Smallest Ritz value: an upper bound on the smallest eigenvalue.
    pub lowest_ritz: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Largest residual bound among the returned pairs, relative to `||A||`.
    pub residual: f64,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn project_out(w: &mut [Complex64], basis: &[Vec<Complex64>]) {
    const CHUNK: usize = 4096;
    let coeffs: Vec<Complex64> = basis.par_iter().map(|u| dot(u, w)).collect();
    w.par_chunks_mut(CHUNK).enumerate().for_each(|(ci, chunk)| {
        let offset = ci * CHUNK;
        for (h, u) in coeffs.iter().zip(basis) {
            let seg = &u[offset..offset + chunk.len()];
            for (x, y) in chunk.iter_mut().zip(seg) {
                *x -= h * y;
            }
        }
    });
}

/// Classical Gram-Schmidt against an orthonormal basis, repeated once when
/// the first pass cancels more than 30% of the norm (DGKS criterion).
fn orthogonalize(w: &mut [Complex64], basis: &[Vec<Complex64>]) {
    let before = norm(w);
    project_out(w, basis);
    if norm(w) < std::f64::consts::FRAC_1_SQRT_2 * before {
        project_out(w, basis);
    }
}

fn random_unit(n: usize, rng: &mut ChaCha20Rng, basis: &[Vec<Complex64>]) -> Option<Vec<Complex64>> {
    for _ in 0..4 {
        let mut v: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
            .collect();
        orthogonalize(&mut v, basis);
        let nv = norm(&v);
        if nv > 1e-8 {
            v.iter_mut().for_each(|z| *z /= nv);
            return Some(v);
        }
    }
    None
}

struct Ritz {
    values: Vec<f64>,
    vectors: DMatrix<f64>,
}

/// Eigenpairs of the real symmetric tridiagonal projection, sorted descending.
fn ritz(alpha: &[f64], beta: &[f64]) -> Ritz {
    let m = alpha.len();
    let t = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).expect("finite"));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m, m, |r, c| eig.eigenvectors[(r, order[c])]);
    Ritz { values, vectors }
}

/// Leading `k` eigenpairs of the Hermitian operator `op` acting on `C^n`.
///
/// On an invariant-subspace breakdown the iteration restarts from a fresh
/// random vector orthogonal to the current basis until at least `k` basis
/// vectors exist, which recovers repeated eigenvalues.
pub fn lanczos_top<F>(n: usize, op: F, k: usize, opts: LanczosOptions) -> Result<LanczosOutcome>
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
{
    if k == 0 || k > n {
        return Err(Error::invalid(format!("requested {k} eigenpairs of a size-{n} operator")));
    }
    let max_iter = opts.max_iter.max(k + 1).min(n);
    let mut rng = ChaCha20Rng::seed_from_u64(opts.seed);
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(max_iter);
    let mut alpha: Vec<f64> = Vec::with_capacity(max_iter);
    // beta[j] couples basis j and j + 1.
    let mut beta: Vec<f64> = Vec::with_capacity(max_iter);
    let mut scale = 0.0f64;

    let mut current = random_unit(n, &mut rng, &basis).expect("nonzero start");
    let mut converged = false;
    let mut residual = f64::INFINITY;
    let mut last_beta = 0.0;

    loop {
        let mut w = op(&current);
        let a = dot(&current, &w).re;
        alpha.push(a);
        basis.push(current);
        scale = scale.max(a.abs()).max(norm(&w));
        orthogonalize(&mut w, &basis);
        let b = norm(&w);
        let m = basis.len();

        let breakdown = b <= 1e-13 * scale.max(f64::MIN_POSITIVE);
        let full = m == n || m >= max_iter;
        let check = breakdown || full || m.is_multiple_of(opts.check_every);

        if check && m >= k {
            let r = ritz(&alpha, &beta);
            let tail = if breakdown { 0.0 } else { b };
            residual = (0..k)
                .map(|i| (tail * r.vectors[(m - 1, i)]).abs())
                .fold(0.0, f64::max)
                / scale.max(f64::MIN_POSITIVE);
            if residual <= opts.tol || (breakdown && m >= k) || m == n {
                converged = true;
            }
            if converged || full {
                last_beta = tail;
                break;
            }
        }
        if full {
            break;
        }
        if breakdown {
            match random_unit(n, &mut rng, &basis) {
                Some(v) => {
                    beta.push(0.0);
                    current = v;
                }
                None => break,
            }
        } else {
            beta.push(b);
            w.iter_mut().for_each(|z| *z /= b);
            current = w;
        }
    }

    let m = basis.len();
    if m < k {
        return Err(Error::numerical(format!("Lanczos built {m} < {k} basis vectors")));
    }
    let r = ritz(&alpha, &beta);
    if !residual.is_finite() {
        residual = (0..k)
            .map(|i| (last_beta * r.vectors[(m - 1, i)]).abs())
            .fold(0.0, f64::max)
            / scale.max(f64::MIN_POSITIVE);
    }
    let eigenvectors = (0..k)
        .map(|i| {
            let mut y = vec![Complex64::new(0.0, 0.0); n];
            for (j, u) in basis.iter().enumerate() {
                let coef = r.vectors[(j, i)];
                for (acc, x) in y.iter_mut().zip(u) {
                    *acc += coef * x;
                }
            }
            let ny = norm(&y);
            y.iter_mut().for_each(|z| *z /= ny);
            canonicalize_phase(&mut y);
            y
        })
        .collect();
    Ok(LanczosOutcome {
        top: EigenResult {
            eigenvalues: r.values[..k].to_vec(),
            eigenvectors,
        },
        lowest_ritz: *r.values.last().expect("nonempty"),
        iterations: m,
        converged,
        residual,
    })
}
