//! Hermitian eigendecomposition (cyclic Jacobi) and the spectral matrix exponential.

use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigenvalues (ascending) and orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl Spectrum {
    /// Minimum gap between adjacent eigenvalues.
    pub fn min_gap(&self) -> f64 {
        self.eigenvalues
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn spectral_range(&self) -> f64 {
        match (self.eigenvalues.first(), self.eigenvalues.last()) {
            (Some(lo), Some(hi)) => hi - lo,
            _ => 0.0,
        }
    }
}

fn check_hermitian(h: &ComplexMatrix) -> Result<()> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch("eigensolver needs a square matrix".into()));
    }
    let tol = 1e-10 * h.norm_max().max(1e-300);
    let residual = h.hermiticity_residual();
    if residual > tol {
        return Err(Error::NotHermitian { residual, tol });
    }
    Ok(())
}

/// Cyclic Jacobi for complex Hermitian matrices.
pub fn hermitian_eig(h: &ComplexMatrix) -> Result<Spectrum> {
    check_hermitian(h)?;
    let n = h.rows();
    let mut a = h.symmetrized();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.norm_max().max(1.0);
    let stop = 1e-15 * scale;

    let mut converged = false;
    for _sweep in 0..MAX_SWEEPS {
        let mut off: f64 = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[(p, q)].norm());
            }
        }
        if off <= stop {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= stop * 1e-2 {
                    continue;
                }
                // Phase removal plus a real Jacobi rotation on the (p,q) block.
                let phase = apq / r; // e^{i phi}
                let tau = (a[(q, q)].re - a[(p, p)].re) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // u = [[c, s], [-s*conj(phase), c*conj(phase)]]
                let upp = Complex64::new(c, 0.0);
                let upq = Complex64::new(s, 0.0);
                let uqp = -phase.conj() * s;
                let uqq = phase.conj() * c;

                // A <- A u (columns p, q)
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * upp + aiq * uqp;
                    a[(i, q)] = aip * upq + aiq * uqq;
                }
                // A <- u^dagger A (rows p, q)
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = upp.conj() * apj + uqp.conj() * aqj;
                    a[(q, j)] = upq.conj() * apj + uqq.conj() * aqj;
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
                // V <- V u
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * upp + viq * uqp;
                    v[(i, q)] = vip * upq + viq * uqq;
                }
            }
        }
    }
    if !converged {
        // One final check: the last sweep may have finished the job.
        let mut off: f64 = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[(p, q)].norm());
            }
        }
        if off > stop {
            return Err(Error::NoConvergence {
                what: "Jacobi eigensolver".into(),
            });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// exp(-i theta H) for Hermitian H, via the spectral decomposition.
pub fn unitary_exp(h: &ComplexMatrix, theta: f64) -> Result<ComplexMatrix> {
    let spec = hermitian_eig(h)?;
    let n = h.rows();
    let v = &spec.eigenvectors;
    // V e^{-i theta Lambda} V^dagger
    let mut out = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                let ph = Complex64::from_polar(1.0, -theta * spec.eigenvalues[k]);
                acc += v[(i, k)] * ph * v[(j, k)].conj();
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// ||U^dagger U - I||_max
pub fn unitarity_residual(u: &ComplexMatrix) -> f64 {
    let n = u.rows();
    u.adjoint().mul(u).sub(&ComplexMatrix::identity(n)).norm_max()
}
