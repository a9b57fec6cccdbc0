//! Work POVMs (two-point measurement and observable-based), atomic work
//! distributions, characteristic functions, and first-law criteria checks.

use num_complex::Complex64;

use crate::dynamics::{propagate_interval, suggested_steps, TimeDependentHamiltonian};
use crate::error::{Error, Result};
use crate::numkit::{hermitian_eig, unitarity_residual, ComplexMatrix, Spectrum};
use crate::quantum::{l1_coherence, DensityMatrix, HermitianOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PovmKind {
    Tpm,
    Obs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Tpm,
    Obs,
    Classical,
}

/// Discrete work POVM: effects at strictly increasing work values.
#[derive(Debug, Clone)]
pub struct WorkPovm {
    pub atoms: Vec<(f64, HermitianOperator)>,
    pub kind: PovmKind,
}

/// Atomic work distribution.
#[derive(Debug, Clone)]
pub struct WorkDistribution {
    pub atoms: Vec<(f64, f64)>,
    pub provenance: Provenance,
}

impl WorkDistribution {
    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|(w, p)| w * p).sum()
    }

    pub fn second_moment(&self) -> f64 {
        self.atoms.iter().map(|(w, p)| w * w * p).sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|(_, p)| p).sum()
    }
}

/// First-law diagnostics for a POVM.
#[derive(Debug, Clone)]
pub struct CriteriaReport {
    pub completeness_residual: f64,
    pub min_effect_eigenvalue: f64,
    /// ||sum_k w_k M_k - (H_h(tau) - H(0))||_max
    pub first_law_operator_residual: f64,
    /// max over samples of |<W> - (<H_h(tau)> - <H(0)>)|
    pub first_law_state_gap: f64,
    pub per_sample_gaps: Vec<f64>,
}

/// W = H_h(tau) - H(0)
pub fn work_operator(h0: &HermitianOperator, hh_tau: &HermitianOperator) -> Result<HermitianOperator> {
    if h0.dim() != hh_tau.dim() {
        return Err(Error::DimensionMismatch("work operator dims".into()));
    }
    HermitianOperator::new(hh_tau.matrix().sub(h0.matrix()), "work")
}

pub fn default_merge_tol(value_scale: f64) -> f64 {
    1e-8 * value_scale.max(1.0)
}

/// Group strictly sorted values whose adjacent gaps are within tol.
fn cluster_sorted(values: &[f64], tol: f64) -> Vec<(usize, usize)> {
    let mut blocks = Vec::new();
    let mut start = 0;
    for j in 1..values.len() {
        if values[j] - values[j - 1] > tol {
            blocks.push((start, j));
            start = j;
        }
    }
    if !values.is_empty() {
        blocks.push((start, values.len()));
    }
    blocks
}

/// Eigenspace projectors of a spectrum, degenerate clusters merged within tol.
fn eigenspace_projectors(spec: &Spectrum, tol: f64) -> Vec<(f64, ComplexMatrix)> {
    let n = spec.eigenvalues.len();
    let mut out = Vec::new();
    for (lo, hi) in cluster_sorted(&spec.eigenvalues, tol) {
        let mean: f64 = spec.eigenvalues[lo..hi].iter().sum::<f64>() / (hi - lo) as f64;
        let mut proj = ComplexMatrix::zeros(n, n);
        for j in lo..hi {
            let col = spec.eigenvectors.column(j);
            proj = proj.add(&ComplexMatrix::outer(&col, &col));
        }
        out.push((mean, proj));
    }
    out
}

/// POVM from the spectral decomposition of the work operator.
pub fn obs_povm(w: &HermitianOperator, merge_tol: Option<f64>) -> Result<WorkPovm> {
    let spec = w.spectrum()?;
    let tol = merge_tol.unwrap_or_else(|| default_merge_tol(w.matrix().norm_max()));
    let atoms = eigenspace_projectors(&spec, tol)
        .into_iter()
        .map(|(value, proj)| Ok((value, HermitianOperator::new(proj, "probability")?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(WorkPovm {
        atoms,
        kind: PovmKind::Obs,
    })
}

/// POVM of the two-point measurement protocol: energy eigenspace projectors
/// at t=0 and t=tau joined by the propagator. Effects are diagonal blocks in
/// the initial eigenbasis, so the construction is state-independent.
pub fn tpm_povm(
    h0: &HermitianOperator,
    h_tau: &HermitianOperator,
    u: &ComplexMatrix,
    merge_tol: Option<f64>,
) -> Result<WorkPovm> {
    let residual = unitarity_residual(u);
    if residual > 1e-8 {
        return Err(Error::NonUnitary { residual });
    }
    let spec0 = h0.spectrum()?;
    let spec1 = h_tau.spectrum()?;
    let deg_tol0 = 1e-8 * spec0.spectral_range().max(1.0);
    let deg_tol1 = 1e-8 * spec1.spectral_range().max(1.0);
    let projs0 = eigenspace_projectors(&spec0, deg_tol0);
    let projs1 = eigenspace_projectors(&spec1, deg_tol1);

    let mut raw: Vec<(f64, ComplexMatrix)> = Vec::new();
    let udag = u.adjoint();
    for (e_n, pn) in &projs0 {
        let upn = u.mul(pn);
        for (e_m, pm) in &projs1 {
            // effect contribution: Pi_n U^dag Pi_m U Pi_n
            let eff = udag.mul(&pm.mul(&upn));
            let eff = pn.mul(&eff).symmetrized();
            raw.push((e_m - e_n, eff));
        }
    }
    raw.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let scale = raw.iter().map(|(w, _)| w.abs()).fold(0.0, f64::max);
    let tol = merge_tol.unwrap_or_else(|| default_merge_tol(scale));
    let values: Vec<f64> = raw.iter().map(|(w, _)| *w).collect();
    let dim = h0.dim();
    let mut atoms = Vec::new();
    for (lo, hi) in cluster_sorted(&values, tol) {
        let mut mass = 0.0;
        let mut weight = 0.0;
        let mut eff = ComplexMatrix::zeros(dim, dim);
        for item in &raw[lo..hi] {
            let w_trace = item.1.trace().re.max(0.0);
            mass += item.0 * w_trace;
            weight += w_trace;
            eff = eff.add(&item.1);
        }
        let value = if weight > 1e-300 {
            mass / weight
        } else {
            values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        };
        if eff.norm_max() < 1e-14 {
            continue; // empty transition block
        }
        atoms.push((value, HermitianOperator::new(eff, "probability")?));
    }
    Ok(WorkPovm {
        atoms,
        kind: PovmKind::Tpm,
    })
}

/// P(w) = Tr[M(w) rho]
pub fn apply_povm(povm: &WorkPovm, rho: &DensityMatrix) -> Result<WorkDistribution> {
    let mut atoms = Vec::with_capacity(povm.atoms.len());
    for (w, m) in &povm.atoms {
        if m.dim() != rho.dim() {
            return Err(Error::DimensionMismatch("POVM/state dims".into()));
        }
        let p = m.matrix().trace_product(rho.matrix()).re;
        if p < -1e-9 {
            return Err(Error::NegativeProbability { w: *w, p });
        }
        let p = p.max(0.0);
        if p > 0.0 {
            atoms.push((*w, p));
        }
    }
    Ok(WorkDistribution {
        atoms,
        provenance: match povm.kind {
            PovmKind::Tpm => Provenance::Tpm,
            PovmKind::Obs => Provenance::Obs,
        },
    })
}

/// chi(u) = sum_k p_k e^{i u w_k}
pub fn characteristic_function(dist: &WorkDistribution, u: f64) -> Complex64 {
    dist.atoms
        .iter()
        .map(|&(w, p)| Complex64::from_polar(p, u * w))
        .sum()
}

/// Integral |P - Q| over merged atom supports; range [0, 2].
pub fn l1_distance(a: &WorkDistribution, b: &WorkDistribution, align_tol: f64) -> f64 {
    let mut support: Vec<f64> = a
        .atoms
        .iter()
        .map(|&(w, _)| w)
        .chain(b.atoms.iter().map(|&(w, _)| w))
        .collect();
    support.sort_by(|x, y| x.partial_cmp(y).unwrap());
    support.dedup();
    let mut total = 0.0;
    for (lo, hi) in cluster_sorted(&support, align_tol) {
        let in_cluster = |w: f64| w >= support[lo] - align_tol && w <= support[hi - 1] + align_tol;
        let pa: f64 = a
            .atoms
            .iter()
            .filter(|&&(w, _)| in_cluster(w))
            .map(|&(_, p)| p)
            .sum();
        let pb: f64 = b
            .atoms
            .iter()
            .filter(|&&(w, _)| in_cluster(w))
            .map(|&(_, p)| p)
            .sum();
        total += (pa - pb).abs();
    }
    total
}

/// Completeness, positivity, and both first-law criteria for a POVM.
pub fn criteria_report(
    povm: &WorkPovm,
    h0: &HermitianOperator,
    hh_tau: &HermitianOperator,
    rho_samples: &[DensityMatrix],
) -> Result<CriteriaReport> {
    let dim = h0.dim();
    let mut sum_m = ComplexMatrix::zeros(dim, dim);
    let mut weighted = ComplexMatrix::zeros(dim, dim);
    let mut min_eig = f64::INFINITY;
    for (w, m) in &povm.atoms {
        sum_m = sum_m.add(m.matrix());
        weighted = weighted.add(&m.matrix().scale_re(*w));
        let spec = hermitian_eig(m.matrix())?;
        min_eig = min_eig.min(*spec.eigenvalues.first().unwrap());
    }
    let completeness_residual = sum_m.sub(&ComplexMatrix::identity(dim)).norm_max();
    let w_op = work_operator(h0, hh_tau)?;
    let first_law_operator_residual = weighted.sub(w_op.matrix()).norm_max();

    let mut per_sample_gaps = Vec::with_capacity(rho_samples.len());
    for rho in rho_samples {
        let dist = apply_povm(povm, rho)?;
        let mean_w = dist.mean();
        let delta_h = w_op.matrix().trace_product(rho.matrix()).re;
        per_sample_gaps.push((mean_w - delta_h).abs());
    }
    let first_law_state_gap = per_sample_gaps.iter().copied().fold(0.0, f64::max);
    Ok(CriteriaReport {
        completeness_residual,
        min_effect_eigenvalue: min_eig,
        first_law_operator_residual,
        first_law_state_gap,
        per_sample_gaps,
    })
}

/// Maximum coherence of rho(t) in the instantaneous energy eigenbasis over a
/// time grid. The propagator is accumulated segment by segment.
pub fn max_coherence_along_path(
    hspec: &TimeDependentHamiltonian,
    rho0: &DensityMatrix,
    time_grid: &[f64],
    hbar_eff: f64,
) -> Result<f64> {
    if time_grid.is_empty() {
        return Err(Error::Invalid("empty time grid".into()));
    }
    let total_steps = suggested_steps(hspec, hbar_eff)?;
    let mut u = ComplexMatrix::identity(hspec.dim());
    let mut max_c: f64 = 0.0;
    let mut prev = 0.0;
    for &t in time_grid {
        if t < prev {
            return Err(Error::Invalid("time grid must be non-decreasing".into()));
        }
        if t > prev {
            let frac = (t - prev) / hspec.tau;
            let steps = ((total_steps as f64 * frac).ceil() as usize).max(20);
            let seg = propagate_interval(hspec, prev, t, steps, hbar_eff)?;
            u = seg.u.mul(&u);
        }
        let rho_t = rho0.conjugated(&u);
        let h_t = hspec.at(t)?;
        max_c = max_c.max(l1_coherence(&rho_t, &h_t, None)?);
        prev = t;
    }
    Ok(max_c)
}
