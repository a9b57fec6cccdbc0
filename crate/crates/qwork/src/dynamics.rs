//! Time-dependent Hamiltonians, the Schrodinger propagator, and the
//! Heisenberg-picture Hamiltonian.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numkit::{unitarity_residual, unitary_exp, ComplexMatrix};
use crate::quantum::{FockAlgebra, HermitianOperator};

/// Real drive envelope sampled over [0, tau].
#[derive(Debug, Clone)]
pub enum Envelope {
    Constant(f64),
    /// amplitude * sin(pi t / tau): vanishes at both endpoints.
    HalfSine { amplitude: f64 },
    /// Piecewise-linear interpolation of (time, value) knots.
    Table { times: Vec<f64>, values: Vec<f64> },
}

impl Envelope {
    pub fn value(&self, t: f64, tau: f64) -> f64 {
        match self {
            Envelope::Constant(a) => *a,
            Envelope::HalfSine { amplitude } => amplitude * (std::f64::consts::PI * t / tau).sin(),
            Envelope::Table { times, values } => {
                if times.is_empty() {
                    return 0.0;
                }
                if t <= times[0] {
                    return values[0];
                }
                for w in 0..times.len() - 1 {
                    if t <= times[w + 1] {
                        let f = (t - times[w]) / (times[w + 1] - times[w]);
                        return values[w] + f * (values[w + 1] - values[w]);
                    }
                }
                *values.last().unwrap()
            }
        }
    }
}

#[derive(Debug, Clone)]
pub enum HamiltonianForm {
    Constant(HermitianOperator),
    /// H0 before switch_time, H1 from switch_time on.
    Quench {
        h0: HermitianOperator,
        h1: HermitianOperator,
        switch_time: f64,
    },
    /// Trap frequency ramped linearly in omega^2 from omega0 to omega1.
    LinearRampOscillator { algebra: FockAlgebra, omega1: f64 },
    /// Piecewise-constant table: matrices[i] applies on [times[i], times[i+1]).
    PiecewiseTable {
        times: Vec<f64>,
        matrices: Vec<HermitianOperator>,
    },
    /// base + envelope(t) * drive
    TwoLevelDrive {
        base: HermitianOperator,
        drive: HermitianOperator,
        envelope: Envelope,
    },
}

#[derive(Debug, Clone)]
pub struct TimeDependentHamiltonian {
    pub tau: f64,
    pub form: HamiltonianForm,
}

impl TimeDependentHamiltonian {
    pub fn new(tau: f64, form: HamiltonianForm) -> Result<Self> {
        if tau <= 0.0 || !tau.is_finite() {
            return Err(Error::OutOfRange("protocol duration must be positive".into()));
        }
        Ok(Self { tau, form })
    }

    pub fn dim(&self) -> usize {
        match &self.form {
            HamiltonianForm::Constant(h) => h.dim(),
            HamiltonianForm::Quench { h0, .. } => h0.dim(),
            HamiltonianForm::LinearRampOscillator { algebra, .. } => algebra.dim(),
            HamiltonianForm::PiecewiseTable { matrices, .. } => matrices[0].dim(),
            HamiltonianForm::TwoLevelDrive { base, .. } => base.dim(),
        }
    }

    pub fn at(&self, t: f64) -> Result<HermitianOperator> {
        if !(0.0..=self.tau * (1.0 + 1e-12) + 1e-300).contains(&t) {
            return Err(Error::OutOfRange(format!(
                "t = {t} outside protocol interval [0, {}]",
                self.tau
            )));
        }
        match &self.form {
            HamiltonianForm::Constant(h) => Ok(h.clone()),
            HamiltonianForm::Quench { h0, h1, switch_time } => {
                if t < *switch_time {
                    Ok(h0.clone())
                } else {
                    Ok(h1.clone())
                }
            }
            HamiltonianForm::LinearRampOscillator { algebra, omega1 } => {
                let w0sq = algebra.omega0() * algebra.omega0();
                let wsq = w0sq + (omega1 * omega1 - w0sq) * t / self.tau;
                let m = algebra.mass();
                let xm = algebra.x().matrix();
                let pm = algebra.p().matrix();
                let h = pm
                    .mul(pm)
                    .scale_re(1.0 / (2.0 * m))
                    .add(&xm.mul(xm).scale_re(m * wsq / 2.0));
                HermitianOperator::new(h, "energy")
            }
            HamiltonianForm::PiecewiseTable { times, matrices } => {
                let mut idx = 0;
                for (i, &edge) in times.iter().enumerate() {
                    if t >= edge {
                        idx = i;
                    }
                }
                Ok(matrices[idx].clone())
            }
            HamiltonianForm::TwoLevelDrive { base, drive, envelope } => {
                let amp = envelope.value(t, self.tau);
                HermitianOperator::new(
                    base.matrix().add(&drive.matrix().scale_re(amp)),
                    base.unit_label(),
                )
            }
        }
    }

    /// Gershgorin bound on the spectral radius, maximized over a few samples.
    pub fn spectral_radius_bound(&self) -> Result<f64> {
        let mut bound: f64 = 0.0;
        for &f in &[0.0, 0.25, 0.5, 0.75, 1.0] {
            let h = self.at(f * self.tau)?;
            bound = bound.max(gershgorin(h.matrix()));
        }
        Ok(bound)
    }
}

fn gershgorin(m: &ComplexMatrix) -> f64 {
    let n = m.rows();
    let mut bound: f64 = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            row += m[(i, j)].norm();
        }
        bound = bound.max(row);
    }
    bound
}

/// Propagator over an interval, with its own accuracy certificate.
#[derive(Debug, Clone)]
pub struct Propagation {
    pub u: ComplexMatrix,
    pub t: f64,
    pub steps: usize,
    pub unitarity_residual: f64,
    /// ||U_steps - U_{2 steps}||_max; zero when the form is integrated exactly.
    pub richardson_gap: f64,
}

/// Default step count: 400 tau * (spectral radius) / hbar, clamped.
pub fn suggested_steps(hspec: &TimeDependentHamiltonian, hbar_eff: f64) -> Result<usize> {
    let rad = hspec.spectral_radius_bound()?;
    let raw = 400.0 * hspec.tau * rad / hbar_eff;
    Ok((raw.ceil() as usize).clamp(100, 20000))
}

/// u <- exp(-i theta h) u, Taylor series with an eigensolver fallback for
/// large rotation angles. The series path keeps banded h cheap.
fn apply_exp(h: &ComplexMatrix, theta: f64, u: &ComplexMatrix) -> Result<ComplexMatrix> {
    let angle = theta.abs() * gershgorin(h);
    if angle > 8.0 {
        return Ok(unitary_exp(h, theta)?.mul(u));
    }
    let mut term = u.clone();
    let mut out = u.clone();
    for k in 1..=80 {
        let factor = Complex64::new(0.0, -theta / k as f64);
        term = h.mul(&term).scale(factor);
        out = out.add(&term);
        if term.norm_max() <= 1e-16 * out.norm_max() {
            return Ok(out);
        }
    }
    Err(Error::NoConvergence {
        what: "propagator step series".into(),
    })
}

fn midpoint_product(
    hspec: &TimeDependentHamiltonian,
    t0: f64,
    t1: f64,
    steps: usize,
    hbar_eff: f64,
) -> Result<ComplexMatrix> {
    let mut u = ComplexMatrix::identity(hspec.dim());
    let delta = (t1 - t0) / steps as f64;
    for k in 0..steps {
        let tm = t0 + (k as f64 + 0.5) * delta;
        let h = hspec.at(tm)?;
        u = apply_exp(h.matrix(), delta / hbar_eff, &u)?;
    }
    Ok(u)
}

/// Is this form piecewise-constant in time (so a product of spectral
/// exponentials is exact)?
fn exact_segments(hspec: &TimeDependentHamiltonian, t0: f64, t1: f64) -> Option<Vec<f64>> {
    match &hspec.form {
        HamiltonianForm::Constant(_) => Some(vec![t0, t1]),
        HamiltonianForm::Quench { switch_time, .. } => {
            let mut edges = vec![t0];
            if *switch_time > t0 && *switch_time < t1 {
                edges.push(*switch_time);
            }
            edges.push(t1);
            Some(edges)
        }
        HamiltonianForm::PiecewiseTable { times, .. } => {
            let mut edges = vec![t0];
            for &e in times {
                if e > t0 && e < t1 {
                    edges.push(e);
                }
            }
            edges.push(t1);
            Some(edges)
        }
        HamiltonianForm::TwoLevelDrive { envelope, .. } => match envelope {
            Envelope::Constant(_) => Some(vec![t0, t1]),
            _ => None,
        },
        HamiltonianForm::LinearRampOscillator { .. } => None,
    }
}

/// Propagator over [t0, t1].
pub fn propagate_interval(
    hspec: &TimeDependentHamiltonian,
    t0: f64,
    t1: f64,
    steps: usize,
    hbar_eff: f64,
) -> Result<Propagation> {
    if steps == 0 {
        return Err(Error::OutOfRange("steps must be >= 1".into()));
    }
    if !(0.0..=hspec.tau * (1.0 + 1e-12)).contains(&t0) || t1 < t0 || t1 > hspec.tau * (1.0 + 1e-12) {
        return Err(Error::OutOfRange(format!(
            "interval [{t0}, {t1}] outside [0, {}]",
            hspec.tau
        )));
    }
    let (u, gap) = if t1 == t0 {
        (ComplexMatrix::identity(hspec.dim()), 0.0)
    } else if let Some(edges) = exact_segments(hspec, t0, t1) {
        let mut u = ComplexMatrix::identity(hspec.dim());
        for w in edges.windows(2) {
            if w[1] > w[0] {
                let h = hspec.at(0.5 * (w[0] + w[1]))?;
                u = unitary_exp(h.matrix(), (w[1] - w[0]) / hbar_eff)?.mul(&u);
            }
        }
        (u, 0.0)
    } else {
        let u1 = midpoint_product(hspec, t0, t1, steps, hbar_eff)?;
        let u2 = midpoint_product(hspec, t0, t1, 2 * steps, hbar_eff)?;
        let gap = u1.sub(&u2).norm_max();
        (u1, gap)
    };
    let residual = unitarity_residual(&u);
    if residual > 1e-8 {
        return Err(Error::NonUnitary { residual });
    }
    Ok(Propagation {
        u,
        t: t1,
        steps,
        unitarity_residual: residual,
        richardson_gap: gap,
    })
}

/// Propagator from 0 to t.
pub fn propagate(
    hspec: &TimeDependentHamiltonian,
    t: f64,
    steps: usize,
    hbar_eff: f64,
) -> Result<Propagation> {
    propagate_interval(hspec, 0.0, t, steps, hbar_eff)
}

/// H_h(t) = U_t^dagger H(t) U_t
pub fn heisenberg_hamiltonian(
    hspec: &TimeDependentHamiltonian,
    t: f64,
    u_t: &ComplexMatrix,
) -> Result<HermitianOperator> {
    let h = hspec.at(t)?;
    if u_t.rows() != h.dim() {
        return Err(Error::DimensionMismatch("propagator/Hamiltonian dims".into()));
    }
    HermitianOperator::new(
        u_t.adjoint().mul(h.matrix()).mul(u_t).symmetrized(),
        h.unit_label(),
    )
}
