//! Cyclic Jacobi eigensolver for dense Hermitian matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 30;
const OFF_DIAGONAL_TOL: f64 = 1e-12;
const HERMITIAN_TOL: f64 = 1e-12;

/// Real eigenvalues in descending order with paired orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[i]` pairs with `eigenvalues[i]`.
    pub eigenvectors: Vec<Vec<Complex64>>,
}

impl EigenResult {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Keeps the leading `k` pairs.
    pub fn truncated(mut self, k: usize) -> Self {
        self.eigenvalues.truncate(k);
        self.eigenvectors.truncate(k);
        self
    }
}

/// Scales `v` so its largest-magnitude component is real and positive.
pub(crate) fn canonicalize_phase(v: &mut [Complex64]) {
    let mut best = 0;
    let mut best_norm = -1.0;
    for (i, z) in v.iter().enumerate() {
        let m = z.norm();
        if m > best_norm {
            best_norm = m;
            best = i;
        }
    }
    if best_norm > 0.0 {
        let phase = (v[best] / best_norm).conj();
        for z in v.iter_mut() {
            *z *= phase;
        }
        v[best] = Complex64::new(v[best].re, 0.0);
    }
}

fn off_diagonal_norm(a: &DMatrix<Complex64>) -> f64 {
    let n = a.nrows();
    let mut sum = 0.0;
    for q in 0..n {
        for p in 0..n {
            if p != q {
                sum += a[(p, q)].norm_sqr();
            }
        }
    }
    sum.sqrt()
}

/// Full eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Each rotation zeroes one off-diagonal pair `(p, q)`; sweeps repeat until
/// the off-diagonal Frobenius norm drops below `1e-12 * ||M||_F`. Eigenvalues
/// come back descending (stable with respect to the Jacobi order on ties),
/// eigenvectors are phase-canonicalized.
pub fn eigh(matrix: &DMatrix<Complex64>) -> Result<EigenResult> {
    let n = matrix.nrows();
    if matrix.ncols() != n {
        return Err(Error::invalid("eigh needs a square matrix"));
    }
    let norm = matrix.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for q in 0..n {
        for p in 0..=q {
            if (matrix[(p, q)] - matrix[(q, p)].conj()).norm() > HERMITIAN_TOL * norm.max(1.0) {
                return Err(Error::invalid(format!("matrix is not Hermitian at ({p}, {q})")));
            }
        }
    }

    let mut a = matrix.clone();
    for p in 0..n {
        a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    }
    let mut v = DMatrix::<Complex64>::identity(n, n);
    let threshold = OFF_DIAGONAL_TOL * norm;

    let mut converged = off_diagonal_norm(&a) <= threshold;
    let mut sweep = 0;
    while !converged {
        if sweep == MAX_SWEEPS {
            return Err(Error::numerical(format!(
                "Jacobi did not converge in {MAX_SWEEPS} sweeps (off-diagonal {:.3e})",
                off_diagonal_norm(&a)
            )));
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        sweep += 1;
        converged = off_diagonal_norm(&a) <= threshold;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.partial_cmp(&a[(i, i)].re).expect("finite eigenvalues"));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let eigenvectors = order
        .iter()
        .map(|&i| {
            let mut col: Vec<Complex64> = v.column(i).iter().copied().collect();
            canonicalize_phase(&mut col);
            col
        })
        .collect();
    Ok(EigenResult {
        eigenvalues,
        eigenvectors,
    })
}

/// Applies `A <- W^* A W`, `V <- V W` with `W` the unitary plane rotation
/// zeroing `A[p, q]`.
fn rotate(a: &mut DMatrix<Complex64>, v: &mut DMatrix<Complex64>, p: usize, q: usize) {
    let b = a[(p, q)];
    let mag = b.norm();
    if mag == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // Negligible coupling relative to both diagonals: drop it outright.
    let g = 100.0 * mag;
    if app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
        a[(p, q)] = Complex64::new(0.0, 0.0);
        a[(q, p)] = Complex64::new(0.0, 0.0);
        return;
    }
    let phase = b / mag;
    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta.abs() + 1.0 == theta.abs() {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let s_fwd = s * phase; // W[p, q]
    let s_back = s * phase.conj(); // -W[q, p]

    let n = a.nrows();
    let data = a.as_mut_slice();
    // Columns p and q are contiguous (column-major); rows p and q are strided.
    let (head, tail) = data.split_at_mut(q * n);
    let col_p = &mut head[p * n..(p + 1) * n];
    let col_q = &mut tail[..n];
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = col_p[k];
        let akq = col_q[k];
        col_p[k] = c * akp - s_back * akq;
        col_q[k] = s_fwd * akp + c * akq;
    }
    col_p[p] = Complex64::new(app - t * mag, 0.0);
    col_q[q] = Complex64::new(aqq + t * mag, 0.0);
    col_p[q] = Complex64::new(0.0, 0.0);
    col_q[p] = Complex64::new(0.0, 0.0);
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        data[k * n + p] = data[p * n + k].conj();
        data[k * n + q] = data[q * n + k].conj();
    }

    let vdata = v.as_mut_slice();
    let (head, tail) = vdata.split_at_mut(q * n);
    let vp = &mut head[p * n..(p + 1) * n];
    let vq = &mut tail[..n];
    for (x, y) in vp.iter_mut().zip(vq.iter_mut()) {
        let (vkp, vkq) = (*x, *y);
        *x = c * vkp - s_back * vkq;
        *y = s_fwd * vkp + c * vkq;
    }
}
