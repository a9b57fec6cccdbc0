//! Classical phase-space mechanics: trajectories, work along trajectories,
//! Monte Carlo work distributions, and phase-space moments.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::numkit::{hermitian_eig, ComplexMatrix};
use crate::workstats::{Provenance, WorkDistribution};

pub const MAX_MOMENT_ORDER: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub x: f64,
    pub p: f64,
}

impl PhasePoint {
    pub fn new(x: f64, p: f64) -> Result<Self> {
        if !x.is_finite() || !p.is_finite() {
            return Err(Error::Invalid("phase point must be finite".into()));
        }
        Ok(Self { x, p })
    }
}

#[derive(Debug, Clone)]
pub enum PhaseDistribution {
    Delta(PhasePoint),
    Gaussian {
        mean: PhasePoint,
        sigma_x: f64,
        sigma_p: f64,
    },
    SampleSet {
        points: Vec<PhasePoint>,
        weights: Vec<f64>,
    },
}

impl PhaseDistribution {
    pub fn validate(&self) -> Result<()> {
        match self {
            PhaseDistribution::Delta(_) => Ok(()),
            PhaseDistribution::Gaussian { sigma_x, sigma_p, .. } => {
                if *sigma_x <= 0.0 || *sigma_p <= 0.0 {
                    Err(Error::OutOfRange("Gaussian sigmas must be positive".into()))
                } else {
                    Ok(())
                }
            }
            PhaseDistribution::SampleSet { points, weights } => {
                if points.len() != weights.len() || points.is_empty() {
                    return Err(Error::Invalid("sample set shape".into()));
                }
                if weights.iter().any(|&w| w < 0.0) {
                    return Err(Error::Invalid("negative sample weight".into()));
                }
                let total: f64 = weights.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::Invalid(format!("sample weights sum to {total}")));
                }
                Ok(())
            }
        }
    }
}

/// Classical Hamiltonian H(x, p, t) with analytic partial derivatives.
pub trait ClassicalHamiltonian: Sync {
    fn tau(&self) -> f64;
    fn h(&self, x: f64, p: f64, t: f64) -> f64;
    fn dh_dx(&self, x: f64, p: f64, t: f64) -> f64;
    fn dh_dp(&self, x: f64, p: f64, t: f64) -> f64;
}

/// Harmonic trap with omega^2 ramped linearly from omega0^2 to omega1^2.
#[derive(Debug, Clone)]
pub struct RampOscillator {
    pub mass: f64,
    pub omega0: f64,
    pub omega1: f64,
    pub tau: f64,
}

impl RampOscillator {
    pub fn omega_sq(&self, t: f64) -> f64 {
        let w0 = self.omega0 * self.omega0;
        let w1 = self.omega1 * self.omega1;
        w0 + (w1 - w0) * t / self.tau
    }
}

impl ClassicalHamiltonian for RampOscillator {
    fn tau(&self) -> f64 {
        self.tau
    }
    fn h(&self, x: f64, p: f64, t: f64) -> f64 {
        p * p / (2.0 * self.mass) + 0.5 * self.mass * self.omega_sq(t) * x * x
    }
    fn dh_dx(&self, x: f64, _p: f64, t: f64) -> f64 {
        self.mass * self.omega_sq(t) * x
    }
    fn dh_dp(&self, _x: f64, p: f64, _t: f64) -> f64 {
        p / self.mass
    }
}

#[derive(Debug, Clone)]
pub struct StaticOscillator {
    pub mass: f64,
    pub omega: f64,
    pub tau: f64,
}

impl ClassicalHamiltonian for StaticOscillator {
    fn tau(&self) -> f64 {
        self.tau
    }
    fn h(&self, x: f64, p: f64, _t: f64) -> f64 {
        p * p / (2.0 * self.mass) + 0.5 * self.mass * self.omega * self.omega * x * x
    }
    fn dh_dx(&self, x: f64, _p: f64, _t: f64) -> f64 {
        self.mass * self.omega * self.omega * x
    }
    fn dh_dp(&self, _x: f64, p: f64, _t: f64) -> f64 {
        p / self.mass
    }
}

#[derive(Debug, Clone)]
pub struct FreeParticle {
    pub mass: f64,
    pub tau: f64,
}

impl ClassicalHamiltonian for FreeParticle {
    fn tau(&self) -> f64 {
        self.tau
    }
    fn h(&self, _x: f64, p: f64, _t: f64) -> f64 {
        p * p / (2.0 * self.mass)
    }
    fn dh_dx(&self, _x: f64, _p: f64, _t: f64) -> f64 {
        0.0
    }
    fn dh_dp(&self, _x: f64, p: f64, _t: f64) -> f64 {
        p / self.mass
    }
}

/// Check the analytic derivatives against central differences.
pub fn check_derivatives(spec: &dyn ClassicalHamiltonian, points: &[(f64, f64, f64)]) -> Result<()> {
    for &(x, p, t) in points {
        let eps = 1e-6 * (1.0 + x.abs().max(p.abs()));
        let fd_x = (spec.h(x + eps, p, t) - spec.h(x - eps, p, t)) / (2.0 * eps);
        let fd_p = (spec.h(x, p + eps, t) - spec.h(x, p - eps, t)) / (2.0 * eps);
        let scale = fd_x.abs().max(fd_p.abs()).max(1.0);
        if (fd_x - spec.dh_dx(x, p, t)).abs() > 1e-6 * scale
            || (fd_p - spec.dh_dp(x, p, t)).abs() > 1e-6 * scale
        {
            return Err(Error::Invalid(format!(
                "derivative mismatch at ({x}, {p}, {t})"
            )));
        }
    }
    Ok(())
}

pub const DEFAULT_RK4_STEPS: usize = 2000;

#[derive(Debug, Clone, Copy)]
pub struct Trajectory {
    pub end: PhasePoint,
    /// max coordinate difference against a run with half the step size
    pub halving_gap: f64,
}

fn rk4_run(spec: &dyn ClassicalHamiltonian, gamma0: PhasePoint, t: f64, steps: usize) -> Result<PhasePoint> {
    let dt = t / steps as f64;
    let mut x = gamma0.x;
    let mut p = gamma0.p;
    let deriv = |x: f64, p: f64, s: f64| (spec.dh_dp(x, p, s), -spec.dh_dx(x, p, s));
    for k in 0..steps {
        let s = k as f64 * dt;
        let (k1x, k1p) = deriv(x, p, s);
        let (k2x, k2p) = deriv(x + 0.5 * dt * k1x, p + 0.5 * dt * k1p, s + 0.5 * dt);
        let (k3x, k3p) = deriv(x + 0.5 * dt * k2x, p + 0.5 * dt * k2p, s + 0.5 * dt);
        let (k4x, k4p) = deriv(x + dt * k3x, p + dt * k3p, s + dt);
        x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        p += dt / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        if !x.is_finite() || !p.is_finite() {
            return Err(Error::NonFinite { t: s + dt });
        }
    }
    Ok(PhasePoint { x, p })
}

/// RK4 over Hamilton's equations, with a step-halving certificate.
pub fn evolve_trajectory(
    spec: &dyn ClassicalHamiltonian,
    gamma0: PhasePoint,
    t: f64,
    steps: usize,
) -> Result<Trajectory> {
    if !(0.0..=spec.tau() * (1.0 + 1e-12)).contains(&t) {
        return Err(Error::OutOfRange(format!("t = {t} outside [0, {}]", spec.tau())));
    }
    if steps == 0 {
        return Err(Error::OutOfRange("steps must be >= 1".into()));
    }
    if t == 0.0 {
        return Ok(Trajectory {
            end: gamma0,
            halving_gap: 0.0,
        });
    }
    let end = rk4_run(spec, gamma0, t, steps)?;
    let fine = rk4_run(spec, gamma0, t, 2 * steps)?;
    Ok(Trajectory {
        end,
        halving_gap: (end.x - fine.x).abs().max((end.p - fine.p).abs()),
    })
}

/// W_CL = H(Gamma_tau, tau) - H(Gamma_0, 0)
pub fn classical_work(
    spec: &dyn ClassicalHamiltonian,
    gamma0: PhasePoint,
    tau: f64,
    steps: usize,
) -> Result<f64> {
    let traj = evolve_trajectory(spec, gamma0, tau, steps)?;
    Ok(spec.h(traj.end.x, traj.end.p, tau) - spec.h(gamma0.x, gamma0.p, 0.0))
}

/// SplitMix64 mixing for per-sample seed derivation.
fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(index.wrapping_mul(0x9e3779b97f4a7c15))
        .wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Bin weighted work samples. Atom value = weighted mean within each bin, so
/// the distribution mean equals the exact sample mean.
fn bin_samples(samples: &[(f64, f64)], bin_width: Option<f64>) -> Vec<(f64, f64)> {
    if samples.is_empty() {
        return Vec::new();
    }
    let lo = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let hi = samples.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
    let width = bin_width.unwrap_or((hi - lo) / 512.0);
    if width <= 0.0 || hi == lo {
        let total: f64 = samples.iter().map(|s| s.1).sum();
        let mean: f64 = samples.iter().map(|s| s.0 * s.1).sum::<f64>() / total;
        return vec![(mean, total)];
    }
    let nbins = ((hi - lo) / width).ceil() as usize + 1;
    let mut mass = vec![0.0; nbins];
    let mut weighted = vec![0.0; nbins];
    for &(w, q) in samples {
        let idx = (((w - lo) / width) as usize).min(nbins - 1);
        mass[idx] += q;
        weighted[idx] += q * w;
    }
    (0..nbins)
        .filter(|&i| mass[i] > 0.0)
        .map(|i| (weighted[i] / mass[i], mass[i]))
        .collect()
}

/// Pushforward of a phase-space distribution through the classical work map.
pub fn classical_work_distribution(
    spec: &dyn ClassicalHamiltonian,
    dist: &PhaseDistribution,
    n_samples: usize,
    seed: u64,
    bin_width: Option<f64>,
) -> Result<WorkDistribution> {
    dist.validate()?;
    if n_samples == 0 {
        return Err(Error::OutOfRange("n_samples must be >= 1".into()));
    }
    let tau = spec.tau();
    let samples: Vec<(f64, f64)> = match dist {
        PhaseDistribution::Delta(g0) => {
            vec![(classical_work(spec, *g0, tau, DEFAULT_RK4_STEPS)?, 1.0)]
        }
        PhaseDistribution::SampleSet { points, weights } => points
            .iter()
            .zip(weights)
            .map(|(g0, &q)| Ok((classical_work(spec, *g0, tau, DEFAULT_RK4_STEPS)?, q)))
            .collect::<Result<Vec<_>>>()?,
        PhaseDistribution::Gaussian { mean, sigma_x, sigma_p } => {
            let q = 1.0 / n_samples as f64;
            (0..n_samples)
                .map(|i| {
                    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64));
                    let zx: f64 = StandardNormal.sample(&mut rng);
                    let zp: f64 = StandardNormal.sample(&mut rng);
                    let g0 = PhasePoint {
                        x: mean.x + sigma_x * zx,
                        p: mean.p + sigma_p * zp,
                    };
                    Ok((classical_work(spec, g0, tau, DEFAULT_RK4_STEPS)?, q))
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    Ok(WorkDistribution {
        atoms: bin_samples(&samples, bin_width),
        provenance: Provenance::Classical,
    })
}

/// Nodes and weights for integrating f against the standard normal density:
/// Gauss-Hermite via the Golub-Welsch tridiagonal eigenproblem.
pub fn gauss_hermite_standard_normal(n: usize) -> Result<Vec<(f64, f64)>> {
    if n < 1 {
        return Err(Error::OutOfRange("quadrature order must be >= 1".into()));
    }
    // Jacobi matrix for physicists' Hermite weight e^{-z^2}: beta_k = sqrt(k/2)
    let mut j = ComplexMatrix::zeros(n, n);
    for k in 1..n {
        let b = (k as f64 / 2.0).sqrt();
        j[(k - 1, k)] = num_complex::Complex64::new(b, 0.0);
        j[(k, k - 1)] = num_complex::Complex64::new(b, 0.0);
    }
    let spec = hermitian_eig(&j)?;
    let sqrt_pi = std::f64::consts::PI.sqrt();
    Ok((0..n)
        .map(|i| {
            let z = spec.eigenvalues[i];
            let v0 = spec.eigenvectors[(0, i)].norm();
            // weight for e^{-z^2}: sqrt(pi) v0^2; normal change of variable
            // y = sqrt(2) z makes the normalized weight just v0^2.
            (std::f64::consts::SQRT_2 * z, sqrt_pi * v0 * v0 / sqrt_pi)
        })
        .collect())
}

/// Deterministic quadrature version of the Gaussian work distribution,
/// for low-variance cross-checks against the Monte Carlo path.
pub fn classical_work_distribution_quadrature(
    spec: &dyn ClassicalHamiltonian,
    mean: PhasePoint,
    sigma_x: f64,
    sigma_p: f64,
    order: usize,
    bin_width: Option<f64>,
) -> Result<WorkDistribution> {
    if sigma_x <= 0.0 || sigma_p <= 0.0 {
        return Err(Error::OutOfRange("Gaussian sigmas must be positive".into()));
    }
    let nodes = gauss_hermite_standard_normal(order)?;
    let tau = spec.tau();
    let mut samples = Vec::with_capacity(order * order);
    for &(zx, qx) in &nodes {
        for &(zp, qp) in &nodes {
            let g0 = PhasePoint {
                x: mean.x + sigma_x * zx,
                p: mean.p + sigma_p * zp,
            };
            samples.push((classical_work(spec, g0, tau, DEFAULT_RK4_STEPS)?, qx * qp));
        }
    }
    Ok(WorkDistribution {
        atoms: bin_samples(&samples, bin_width),
        provenance: Provenance::Classical,
    })
}

fn double_factorial_odd_gap(j: usize) -> f64 {
    // (j-1)!! for even j, i.e. E[Z^j] for standard normal
    if j % 2 == 1 {
        return 0.0;
    }
    let mut out = 1.0;
    let mut k = j as i64 - 1;
    while k > 1 {
        out *= k as f64;
        k -= 2;
    }
    out
}

fn gaussian_raw_moment(mu: f64, sigma: f64, k: usize) -> f64 {
    // E[(mu + sigma Z)^k]
    let mut total = 0.0;
    let mut binom = 1.0;
    for j in 0..=k {
        if j > 0 {
            binom *= (k - j + 1) as f64 / j as f64;
        }
        total += binom * mu.powi((k - j) as i32) * sigma.powi(j as i32) * double_factorial_odd_gap(j);
    }
    total
}

/// E[p^m x^n] over the phase distribution; closed form where available.
pub fn phase_moment(dist: &PhaseDistribution, m: usize, n: usize) -> Result<f64> {
    if m + n > MAX_MOMENT_ORDER {
        return Err(Error::OrderTooHigh {
            order: m + n,
            max: MAX_MOMENT_ORDER,
        });
    }
    dist.validate()?;
    Ok(match dist {
        PhaseDistribution::Delta(g) => g.p.powi(m as i32) * g.x.powi(n as i32),
        PhaseDistribution::Gaussian { mean, sigma_x, sigma_p } => {
            gaussian_raw_moment(mean.p, *sigma_p, m) * gaussian_raw_moment(mean.x, *sigma_x, n)
        }
        PhaseDistribution::SampleSet { points, weights } => points
            .iter()
            .zip(weights)
            .map(|(g, &q)| q * g.p.powi(m as i32) * g.x.powi(n as i32))
            .sum(),
    })
}
