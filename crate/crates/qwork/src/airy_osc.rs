//! Closed-form solution of the linearly ramped harmonic trap: Airy-function
//! flow coefficients, energy coefficients, work formulas, and the relative
//! TPM/classical difference grid.

use crate::error::{Error, Result};
use crate::quantum::{FockAlgebra, HermitianOperator};

#[derive(Debug, Clone, Copy)]
pub struct OscillatorParams {
    pub mass: f64,
    pub omega0: f64,
    pub omega1: f64,
    pub tau: f64,
    pub hbar_eff: f64,
}

impl OscillatorParams {
    pub fn new(mass: f64, omega0: f64, omega1: f64, tau: f64, hbar_eff: f64) -> Result<Self> {
        if mass <= 0.0 || omega0 <= 0.0 || omega1 <= 0.0 || tau <= 0.0 || hbar_eff <= 0.0 {
            return Err(Error::OutOfRange("oscillator parameters must be positive".into()));
        }
        if omega0 == omega1 {
            return Err(Error::OutOfRange(
                "omega1 must differ from omega0 (the ramp time constant diverges)".into(),
            ));
        }
        Ok(Self {
            mass,
            omega0,
            omega1,
            tau,
            hbar_eff,
        })
    }

    /// Grid parameters used throughout the worked example: unit mass and
    /// duration, trap frequency tripled.
    pub fn reference(hbar_eff: f64) -> Self {
        Self {
            mass: 1.0,
            omega0: 1.0,
            omega1: 3.0,
            tau: 1.0,
            hbar_eff,
        }
    }

    /// tau' = cbrt(tau / (omega1^2 - omega0^2)); can be negative for a
    /// downward ramp.
    pub fn tau_prime(&self) -> f64 {
        (self.tau / (self.omega1 * self.omega1 - self.omega0 * self.omega0)).cbrt()
    }
}

/// omega^2(t), linear between omega0^2 and omega1^2.
pub fn omega_sq(params: &OscillatorParams, t: f64) -> Result<f64> {
    if !(0.0..=params.tau * (1.0 + 1e-12)).contains(&t) {
        return Err(Error::OutOfRange(format!("t = {t} outside [0, {}]", params.tau)));
    }
    let w0 = params.omega0 * params.omega0;
    let w1 = params.omega1 * params.omega1;
    Ok(w0 + (w1 - w0) * t / params.tau)
}

/// Linear Heisenberg flow X_h(t) = A X + B P, P_h(t) = C X + D P.
#[derive(Debug, Clone, Copy)]
pub struct LinearFlow {
    pub t: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl LinearFlow {
    pub fn symplectic_residual(&self) -> f64 {
        (self.a * self.d - self.b * self.c - 1.0).abs()
    }
}

/// Flow coefficients from the Airy-function solution of x'' + omega^2(t) x = 0.
/// C and D are the analytic time derivatives m*dA/dt and m*dB/dt, using
/// d/dt Ai[-omega^2(t) tau'^2] = -Ai'[.]/tau' for the linear ramp.
pub fn abcd(params: &OscillatorParams, t: f64) -> Result<LinearFlow> {
    let tp = params.tau_prime();
    let z0 = -(params.omega0 * params.omega0) * tp * tp;
    let zt = -omega_sq(params, t)? * tp * tp;
    let v0 = crate::numkit::airy(z0)?;
    let vt = crate::numkit::airy(zt)?;
    let den = v0.ai_prime * v0.bi - v0.ai * v0.bi_prime;
    let m = params.mass;
    let a = (v0.ai_prime * vt.bi - v0.bi_prime * vt.ai) / den;
    let b = tp / m * (v0.ai * vt.bi - v0.bi * vt.ai) / den;
    let c = m / tp * (v0.bi_prime * vt.ai_prime - v0.ai_prime * vt.bi_prime) / den;
    let d = (v0.bi * vt.ai_prime - v0.ai * vt.bi_prime) / den;
    Ok(LinearFlow { t, a, b, c, d })
}

/// Quadratic-form coefficients of the Heisenberg Hamiltonian
/// H_h(t) = E X^2 + F P^2 + G {X, P}.
#[derive(Debug, Clone, Copy)]
pub struct EnergyCoeffs {
    pub t: f64,
    pub e: f64,
    pub f: f64,
    pub g: f64,
}

pub fn efg(params: &OscillatorParams, t: f64) -> Result<EnergyCoeffs> {
    let flow = abcd(params, t)?;
    let wsq = omega_sq(params, t)?;
    let m = params.mass;
    let half_k = m * wsq / 2.0;
    Ok(EnergyCoeffs {
        t,
        e: half_k * flow.a * flow.a + flow.c * flow.c / (2.0 * m),
        f: half_k * flow.b * flow.b + flow.d * flow.d / (2.0 * m),
        g: half_k * flow.a * flow.b + flow.c * flow.d / (2.0 * m),
    })
}

/// W_CL between t1 and t2 for the initial phase point (x0, p0).
pub fn classical_work_closed(
    params: &OscillatorParams,
    x0: f64,
    p0: f64,
    t1: f64,
    t2: f64,
) -> Result<f64> {
    if t2 < t1 {
        return Err(Error::OutOfRange("t2 must be >= t1".into()));
    }
    let c1 = efg(params, t1)?;
    let c2 = efg(params, t2)?;
    Ok((c2.e - c1.e) * x0 * x0 + (c2.f - c1.f) * p0 * p0 + 2.0 * (c2.g - c1.g) * x0 * p0)
}

/// H_h(t) assembled in the truncated number basis of the initial trap.
pub fn heisenberg_hamiltonian_matrix(
    params: &OscillatorParams,
    t: f64,
    dim: usize,
) -> Result<HermitianOperator> {
    let coeffs = efg(params, t)?;
    let algebra = FockAlgebra::new(dim, params.hbar_eff, params.mass, params.omega0)?;
    heisenberg_hamiltonian_in(&algebra, &coeffs)
}

/// Same quadratic form over an arbitrary (possibly displaced) algebra.
pub fn heisenberg_hamiltonian_in(
    algebra: &FockAlgebra,
    coeffs: &EnergyCoeffs,
) -> Result<HermitianOperator> {
    let xm = algebra.x().matrix();
    let pm = algebra.p().matrix();
    let xp = xm.mul(pm);
    let px = pm.mul(xm);
    let h = xm
        .mul(xm)
        .scale_re(coeffs.e)
        .add(&pm.mul(pm).scale_re(coeffs.f))
        .add(&xp.add(&px).scale_re(coeffs.g));
    HermitianOperator::new(h, "energy")
}

/// Mean work of the two-point protocol on a dephased coherent state centered
/// at (x0, p0), in the vanishing-hbar regime. Dephasing spreads the center
/// over the energy shell, which replaces x0^2 and p0^2 by shell averages and
/// kills the cross term.
pub fn tpm_mean_closed(
    params: &OscillatorParams,
    x0: f64,
    p0: f64,
    t1: f64,
    t2: f64,
) -> Result<f64> {
    let c1 = efg(params, t1)?;
    let c2 = efg(params, t2)?;
    let de = c2.e - c1.e;
    let df = c2.f - c1.f;
    let m = params.mass;
    let mw = m * params.omega0;
    Ok(de * (x0 * x0 / 2.0 + p0 * p0 / (2.0 * mw * mw))
        + df * (mw * mw * x0 * x0 / 2.0 + p0 * p0 / 2.0))
}

/// Mean work of the observable protocol in the same regime: exactly the
/// classical expression.
pub fn obs_mean_closed(
    params: &OscillatorParams,
    x0: f64,
    p0: f64,
    t1: f64,
    t2: f64,
) -> Result<f64> {
    classical_work_closed(params, x0, p0, t1, t2)
}

#[derive(Debug, Clone, Copy)]
pub struct GridRow {
    pub x0: f64,
    pub p0: f64,
    pub w_cl: f64,
    pub w_tpm: f64,
    /// (W_CL - <W>_TPM) / W_CL; meaningless when `degenerate` is set.
    pub rel_diff: f64,
    /// true where W_CL is numerically zero and the ratio is undefined
    pub degenerate: bool,
}

/// Relative TPM/classical difference over a phase-space grid, row-major.
pub fn figure1_grid(
    params: &OscillatorParams,
    x_grid: &[f64],
    p_grid: &[f64],
) -> Result<Vec<GridRow>> {
    let mut rows = Vec::with_capacity(x_grid.len() * p_grid.len());
    let c0 = efg(params, 0.0)?;
    let ct = efg(params, params.tau)?;
    let (de, df, dg) = (ct.e - c0.e, ct.f - c0.f, ct.g - c0.g);
    let m = params.mass;
    let mw = m * params.omega0;
    for &x0 in x_grid {
        for &p0 in p_grid {
            let w_cl = de * x0 * x0 + df * p0 * p0 + 2.0 * dg * x0 * p0;
            let w_tpm = de * (x0 * x0 / 2.0 + p0 * p0 / (2.0 * mw * mw))
                + df * (mw * mw * x0 * x0 / 2.0 + p0 * p0 / 2.0);
            let scale = (de.abs() + df.abs()) * (x0 * x0 + p0 * p0);
            let degenerate = w_cl.abs() < 1e-12 * scale.max(1e-300);
            let rel_diff = if degenerate {
                f64::NAN
            } else {
                (w_cl - w_tpm) / w_cl
            };
            rows.push(GridRow {
                x0,
                p0,
                w_cl,
                w_tpm,
                rel_diff,
                degenerate,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{classical_work, evolve_trajectory, PhasePoint, RampOscillator};

    fn reference() -> OscillatorParams {
        OscillatorParams::reference(1.0)
    }

    #[test]
    fn omega_sq_endpoints_and_midpoint() {
        let params = reference();
        assert_eq!(omega_sq(&params, 0.0).unwrap(), 1.0);
        assert_eq!(omega_sq(&params, 1.0).unwrap(), 9.0);
        assert_eq!(omega_sq(&params, 0.5).unwrap(), 5.0);
        assert!(omega_sq(&params, 1.5).is_err());
    }

    #[test]
    fn flow_initial_conditions() {
        let flow = abcd(&reference(), 0.0).unwrap();
        assert!((flow.a - 1.0).abs() < 1e-12);
        assert!(flow.b.abs() < 1e-12);
        assert!(flow.c.abs() < 1e-12);
        assert!((flow.d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn flow_reference_values_at_tau() {
        let flow = abcd(&reference(), 1.0).unwrap();
        assert!((flow.a - -0.261344199779714826770400143752).abs() < 1e-12);
        assert!((flow.b - 0.347072670027249884202835388524).abs() < 1e-12);
        assert!((flow.c - -2.10234238314303956851288994719).abs() < 1e-11);
        assert!((flow.d - -1.0343999063264332673119309915).abs() < 1e-11);
    }

    #[test]
    fn flow_symplectic_on_grid() {
        let params = reference();
        for k in 0..=100 {
            let t = k as f64 / 100.0;
            let flow = abcd(&params, t).unwrap();
            assert!(flow.symplectic_residual() < 1e-10, "t = {t}");
        }
    }

    #[test]
    fn flow_matches_rk4() {
        let params = reference();
        let ramp = RampOscillator {
            mass: 1.0,
            omega0: 1.0,
            omega1: 3.0,
            tau: 1.0,
        };
        for &t in &[0.25, 0.6, 1.0] {
            let flow = abcd(&params, t).unwrap();
            // columns of the flow matrix from basis initial conditions
            let ex = evolve_trajectory(&ramp, PhasePoint { x: 1.0, p: 0.0 }, t, 2000)
                .unwrap()
                .end;
            let ep = evolve_trajectory(&ramp, PhasePoint { x: 0.0, p: 1.0 }, t, 2000)
                .unwrap()
                .end;
            assert!((ex.x - flow.a).abs() < 1e-6, "A at {t}");
            assert!((ex.p - flow.c).abs() < 1e-6, "C at {t}");
            assert!((ep.x - flow.b).abs() < 1e-6, "B at {t}");
            assert!((ep.p - flow.d).abs() < 1e-6, "D at {t}");
        }
    }

    #[test]
    fn energy_coeffs_reference_values() {
        let params = reference();
        let c0 = efg(&params, 0.0).unwrap();
        assert!((c0.e - 0.5).abs() < 1e-12);
        assert!((c0.f - 0.5).abs() < 1e-12);
        assert!(c0.g.abs() < 1e-12);
        let ct = efg(&params, 1.0).unwrap();
        assert!((ct.e - 2.51727530639302522073331526906).abs() < 1e-11);
        assert!((ct.f - 1.07705905536336621968657523093).abs() < 1e-11);
        assert!((ct.g - 0.679156950633062441919958172083).abs() < 1e-11);
    }

    #[test]
    fn energy_coeffs_track_trajectories() {
        // E x0^2 + F p0^2 + 2 G x0 p0 equals the trajectory energy
        let params = reference();
        let ramp = RampOscillator {
            mass: 1.0,
            omega0: 1.0,
            omega1: 3.0,
            tau: 1.0,
        };
        for &(x0, p0) in &[(1.0, 1.0), (0.5, -1.2), (2.0, 0.3)] {
            for &t in &[0.3, 0.8] {
                let coeffs = efg(&params, t).unwrap();
                let closed = coeffs.e * x0 * x0 + coeffs.f * p0 * p0 + 2.0 * coeffs.g * x0 * p0;
                let end = evolve_trajectory(&ramp, PhasePoint { x: x0, p: p0 }, t, 2000)
                    .unwrap()
                    .end;
                let direct =
                    end.p * end.p / 2.0 + omega_sq(&params, t).unwrap() * end.x * end.x / 2.0;
                assert!(
                    ((closed - direct) / direct).abs() < 1e-8,
                    "({x0},{p0}) at {t}"
                );
            }
        }
    }

    #[test]
    fn work_closed_reference_and_additivity() {
        let params = reference();
        let w = classical_work_closed(&params, 1.0, 1.0, 0.0, 1.0).unwrap();
        assert!((w - 3.95264826302251632425980684415).abs() < 1e-11);
        assert_eq!(classical_work_closed(&params, 1.0, 1.0, 0.5, 0.5).unwrap(), 0.0);
        let first = classical_work_closed(&params, 1.0, 1.0, 0.0, 0.4).unwrap();
        let second = classical_work_closed(&params, 1.0, 1.0, 0.4, 1.0).unwrap();
        assert!((first + second - w).abs() < 1e-10);
    }

    #[test]
    fn work_closed_matches_rk4() {
        let params = reference();
        let ramp = RampOscillator {
            mass: 1.0,
            omega0: 1.0,
            omega1: 3.0,
            tau: 1.0,
        };
        let closed = classical_work_closed(&params, 1.0, 1.0, 0.0, 1.0).unwrap();
        let rk4 = classical_work(&ramp, PhasePoint { x: 1.0, p: 1.0 }, 1.0, 2000).unwrap();
        assert!(((closed - rk4) / closed).abs() < 1e-6);
    }

    #[test]
    fn tpm_mean_reference_value() {
        let params = reference();
        let v = tpm_mean_closed(&params, 1.0, 1.0, 0.0, 1.0).unwrap();
        assert!((v - 2.59433436175639144041989049998).abs() < 1e-11);
        assert_eq!(tpm_mean_closed(&params, 0.0, 0.0, 0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn heisenberg_matrix_at_zero_is_initial_trap() {
        let params = reference();
        let h = heisenberg_hamiltonian_matrix(&params, 0.0, 40).unwrap();
        let algebra = FockAlgebra::new(40, 1.0, 1.0, 1.0).unwrap();
        let h0 = algebra.h0().unwrap();
        assert!(h.matrix().sub(h0.matrix()).norm_max() < 1e-12);
    }

    #[test]
    fn heisenberg_matrix_inner_spectrum_positive() {
        let params = reference();
        let h = heisenberg_hamiltonian_matrix(&params, 1.0, 60).unwrap();
        // truncate to the inner half block before the spectral check
        let inner = crate::numkit::ComplexMatrix::from_fn(30, 30, |i, j| h.matrix()[(i, j)]);
        let spec = crate::numkit::hermitian_eig(&inner).unwrap();
        assert!(spec.eigenvalues[0] > 0.0);
    }

    #[test]
    fn grid_reference_point_and_symmetry() {
        let params = reference();
        let rows = figure1_grid(&params, &[1.0, -1.0], &[1.0, -1.0]).unwrap();
        assert_eq!(rows.len(), 4);
        let at = |x: f64, p: f64| {
            *rows
                .iter()
                .find(|r| r.x0 == x && r.p0 == p)
                .unwrap()
        };
        let r = at(1.0, 1.0);
        assert!((r.rel_diff - 0.343646540465871761001676040475).abs() < 1e-11);
        assert!(!r.degenerate);
        let mirrored = at(-1.0, -1.0);
        assert!((r.rel_diff - mirrored.rel_diff).abs() < 1e-13);
    }

    #[test]
    fn grid_flags_zero_work_rows() {
        // x0 = p0 = 0 gives exactly zero classical work
        let params = reference();
        let rows = figure1_grid(&params, &[0.0], &[0.0]).unwrap();
        assert!(rows[0].degenerate);
        assert!(rows[0].rel_diff.is_nan());
    }
}
