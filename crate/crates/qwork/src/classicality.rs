//! Moment-matching and commutator-smallness diagnostics for the classical
//! limit: the epsilon_A / epsilon_B estimates and coherent-state closed forms.

use num_complex::Complex64;

use crate::classical::{phase_moment, PhaseDistribution};
use crate::error::{Error, Result};
use crate::numkit::ComplexMatrix;
use crate::quantum::{expectation, DensityMatrix, FockAlgebra};

pub const MAX_EPSILON_A_ORDER: usize = 8;
pub const MAX_EPSILON_B_DEGREE: usize = 4;
pub const MAX_WEYL_ORDER: usize = 8;
pub const DEFAULT_DENOM_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct SkippedTerm {
    pub m: usize,
    pub n: usize,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct ClassicalityReport {
    pub epsilon_a: f64,
    pub epsilon_b: f64,
    pub epsilon_max: f64,
    pub max_order_checked: usize,
    pub skipped_terms: Vec<SkippedTerm>,
}

/// Powers of a matrix, cached: out[k] = m^k.
fn powers(m: &ComplexMatrix, up_to: usize) -> Vec<ComplexMatrix> {
    let mut out = Vec::with_capacity(up_to + 1);
    out.push(ComplexMatrix::identity(m.rows()));
    for k in 1..=up_to {
        let next = out[k - 1].mul(m);
        out.push(next);
    }
    out
}

/// Scale for denominator floors: the typical phase-space magnitude of the
/// state, never below the zero-point scale sqrt(hbar).
fn moment_scale(rho: &DensityMatrix, algebra: &FockAlgebra) -> Result<f64> {
    let x = expectation(rho, algebra.x())?;
    let p = expectation(rho, algebra.p())?;
    Ok(x.abs().max(p.abs()).max(algebra.hbar_eff().sqrt()))
}

/// Largest relative mismatch between quantum moments Tr[P^m X^n rho] and the
/// classical moments of `dist`, over 1 <= m + n <= max_order. Moments whose
/// quantum magnitude falls below denom_floor * scale^(m+n) are skipped and
/// reported.
pub fn estimate_epsilon_a(
    rho: &DensityMatrix,
    algebra: &FockAlgebra,
    dist: &PhaseDistribution,
    max_order: usize,
    denom_floor: f64,
) -> Result<(f64, Vec<SkippedTerm>)> {
    if max_order == 0 || max_order > MAX_EPSILON_A_ORDER {
        return Err(Error::OrderTooHigh {
            order: max_order,
            max: MAX_EPSILON_A_ORDER,
        });
    }
    let xp = powers(algebra.x().matrix(), max_order);
    let pp = powers(algebra.p().matrix(), max_order);
    let scale = moment_scale(rho, algebra)?;
    let mut eps: f64 = 0.0;
    let mut any = false;
    let mut skipped = Vec::new();
    for m in 0..=max_order {
        for n in 0..=max_order {
            let order = m + n;
            if order == 0 || order > max_order {
                continue;
            }
            let quantum = pp[m].mul(&xp[n]).trace_product(rho.matrix());
            let classical = phase_moment(dist, m, n)?;
            let floor = denom_floor * scale.powi(order as i32);
            if quantum.norm() < floor {
                skipped.push(SkippedTerm {
                    m,
                    n,
                    reason: format!(
                        "quantum moment magnitude {:.3e} below floor {floor:.3e}",
                        quantum.norm()
                    ),
                });
                continue;
            }
            let dev = (quantum - Complex64::new(classical, 0.0)).norm() / quantum.norm();
            eps = eps.max(dev);
            any = true;
        }
    }
    if !any {
        return Err(Error::AllTermsSkipped);
    }
    Ok((eps, skipped))
}

/// Commutator-smallness estimate: hbar times the worst ratio of
/// |<g_l g_r>| to |<g_l X P g_r>| and |<g_l P X g_r>| over ordered monomials
/// g = X^a P^b of total degree <= max_degree.
pub fn estimate_epsilon_b(
    rho: &DensityMatrix,
    algebra: &FockAlgebra,
    max_degree: usize,
    denom_floor: f64,
) -> Result<(f64, Vec<SkippedTerm>)> {
    if max_degree > MAX_EPSILON_B_DEGREE {
        return Err(Error::OrderTooHigh {
            order: max_degree,
            max: MAX_EPSILON_B_DEGREE,
        });
    }
    let xm = algebra.x().matrix();
    let pm = algebra.p().matrix();
    let xp_pow = powers(xm, max_degree);
    let pp_pow = powers(pm, max_degree);
    // monomials X^a P^b with their total degree
    let mut monomials = Vec::new();
    for a in 0..=max_degree {
        for b in 0..=(max_degree - a) {
            monomials.push((a + b, xp_pow[a].mul(&pp_pow[b])));
        }
    }
    let xp = xm.mul(pm);
    let px = pm.mul(xm);
    let scale = moment_scale(rho, algebra)?;
    let hbar = algebra.hbar_eff();
    let mut worst: f64 = 0.0;
    let mut any = false;
    let mut skipped = Vec::new();
    for (dl, gl) in &monomials {
        for (dr, gr) in &monomials {
            let num = gl.mul(gr).trace_product(rho.matrix()).norm();
            let floor = denom_floor * scale.powi((dl + dr + 2) as i32);
            for den_op in [&xp, &px] {
                let den = gl.mul(den_op).mul(gr).trace_product(rho.matrix()).norm();
                if den < floor {
                    skipped.push(SkippedTerm {
                        m: *dl,
                        n: *dr,
                        reason: format!("denominator {den:.3e} below floor {floor:.3e}"),
                    });
                    continue;
                }
                worst = worst.max(num / den);
                any = true;
            }
        }
    }
    if !any {
        return Err(Error::AllTermsSkipped);
    }
    Ok((hbar * worst, skipped))
}

/// Both estimates plus their maximum.
pub fn classicality_report(
    rho: &DensityMatrix,
    algebra: &FockAlgebra,
    dist: &PhaseDistribution,
    max_order: usize,
    max_degree: usize,
    denom_floor: f64,
) -> Result<ClassicalityReport> {
    let (epsilon_a, mut skipped) = estimate_epsilon_a(rho, algebra, dist, max_order, denom_floor)?;
    let (epsilon_b, skipped_b) = estimate_epsilon_b(rho, algebra, max_degree, denom_floor)?;
    skipped.extend(skipped_b);
    Ok(ClassicalityReport {
        epsilon_a,
        epsilon_b,
        epsilon_max: epsilon_a.max(epsilon_b),
        max_order_checked: max_order,
        skipped_terms: skipped,
    })
}

/// Closed-form relative deviation of <P^n X^m> from the delta-concentrated
/// phase-space moment for a coherent state pinned at (x0, p0):
/// sum_{k=1}^{min(n,m)} (1/(n-k)!) (-i hbar / (2 |x0 p0|))^k.
pub fn coherent_epsilon_closed_form(
    hbar_eff: f64,
    x0: f64,
    p0: f64,
    n: usize,
    m: usize,
) -> Result<Complex64> {
    if x0 * p0 == 0.0 {
        return Err(Error::Domain("closed form undefined at x0 p0 = 0".into()));
    }
    let base = Complex64::new(0.0, -hbar_eff / (2.0 * (x0 * p0).abs()));
    let n_min = n.min(m);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut pow = Complex64::new(1.0, 0.0);
    for k in 1..=n_min {
        pow *= base;
        let mut inv_fact = 1.0;
        for j in 2..=(n - k) {
            inv_fact /= j as f64;
        }
        sum += pow * inv_fact;
    }
    Ok(sum)
}

/// Geometric upper bound on the closed form above.
pub fn coherent_epsilon_bound(hbar_eff: f64, x0: f64, p0: f64, n_min: usize) -> Result<f64> {
    if x0 * p0 == 0.0 {
        return Err(Error::Domain("bound undefined at x0 p0 = 0".into()));
    }
    let x = hbar_eff / (2.0 * (x0 * p0).abs());
    if (x - 1.0).abs() < 1e-15 {
        return Ok(x * n_min as f64);
    }
    Ok(x * (1.0 - x.powi(n_min as i32)) / (1.0 - x))
}

/// Quantum moment Tr[P^n X^m rho] alongside the matching Gaussian Wigner
/// moment of the same coherent state.
pub fn weyl_moment(
    n: usize,
    m: usize,
    algebra: &FockAlgebra,
    rho: &DensityMatrix,
) -> Result<(Complex64, f64)> {
    if n + m > MAX_WEYL_ORDER {
        return Err(Error::OrderTooHigh {
            order: n + m,
            max: MAX_WEYL_ORDER,
        });
    }
    let pp = powers(algebra.p().matrix(), n);
    let xp = powers(algebra.x().matrix(), m);
    let quantum = pp[n].mul(&xp[m]).trace_product(rho.matrix());
    // Gaussian Wigner moments of a coherent state: independent normal
    // marginals centered at (<X>, <P>) with the vacuum widths.
    let xc = expectation(rho, algebra.x())?;
    let pc = expectation(rho, algebra.p())?;
    let sigma_x = (algebra.hbar_eff() / (2.0 * algebra.mass() * algebra.omega0())).sqrt();
    let sigma_p = (algebra.mass() * algebra.hbar_eff() * algebra.omega0() / 2.0).sqrt();
    let wigner = phase_moment(
        &PhaseDistribution::Gaussian {
            mean: crate::classical::PhasePoint { x: xc, p: pc },
            sigma_x,
            sigma_p,
        },
        n,
        m,
    )?;
    Ok((quantum, wigner))
}
