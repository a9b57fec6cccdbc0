//! States, observables, truncated oscillator algebra, dephasing, and
//! coherence measures.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numkit::{hermitian_eig, ComplexMatrix, Spectrum};

const HERMITICITY_TOL: f64 = 1e-10;

/// Hermitian observable with a unit tag for bookkeeping.
#[derive(Debug, Clone)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
    unit_label: String,
}

impl HermitianOperator {
    pub fn new(matrix: ComplexMatrix, unit_label: &str) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch("observable must be square".into()));
        }
        let residual = matrix.hermiticity_residual();
        let tol = HERMITICITY_TOL * matrix.norm_max().max(1.0);
        if residual > tol {
            return Err(Error::NotHermitian { residual, tol });
        }
        Ok(Self {
            matrix: matrix.symmetrized(),
            unit_label: unit_label.into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn unit_label(&self) -> &str {
        &self.unit_label
    }

    pub fn spectrum(&self) -> Result<Spectrum> {
        hermitian_eig(&self.matrix)
    }
}

/// Unit-trace positive-semidefinite state.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Full validation: Hermitian, unit trace, positive within tolerance.
    pub fn from_matrix(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch("state must be square".into()));
        }
        let residual = matrix.hermiticity_residual();
        if residual > HERMITICITY_TOL {
            return Err(Error::NotHermitian {
                residual,
                tol: HERMITICITY_TOL,
            });
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::Invalid(format!("state trace {tr} is not 1")));
        }
        let m = matrix.symmetrized();
        let spec = hermitian_eig(&m)?;
        if let Some(&min) = spec.eigenvalues.first() {
            if min < -1e-10 {
                return Err(Error::Invalid(format!(
                    "state has negative eigenvalue {min:.3e}"
                )));
            }
        }
        Ok(Self { matrix: m })
    }

    /// |psi><psi| from an (unnormalized) amplitude vector.
    pub fn pure(amplitudes: &[Complex64]) -> Result<Self> {
        let norm_sq: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if norm_sq <= 0.0 || !norm_sq.is_finite() {
            return Err(Error::Invalid("state vector has no norm".into()));
        }
        let scale = 1.0 / norm_sq;
        let m = ComplexMatrix::outer(amplitudes, amplitudes).scale_re(scale);
        Ok(Self { matrix: m })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale_re(1.0 / dim as f64),
        }
    }

    /// Convex combination of validated states (weights renormalized).
    pub fn mixture(parts: &[(f64, DensityMatrix)]) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::Invalid("empty mixture".into()));
        }
        let total: f64 = parts.iter().map(|(w, _)| *w).sum();
        if total <= 0.0 || parts.iter().any(|(w, _)| *w < 0.0) {
            return Err(Error::Invalid("mixture weights must be >= 0 with positive sum".into()));
        }
        let dim = parts[0].1.dim();
        let mut m = ComplexMatrix::zeros(dim, dim);
        for (w, rho) in parts {
            if rho.dim() != dim {
                return Err(Error::DimensionMismatch("mixture component dims differ".into()));
            }
            m = m.add(&rho.matrix.scale_re(w / total));
        }
        Ok(Self { matrix: m })
    }

    /// Internal constructor for matrices already known to be valid states
    /// (e.g. unitary conjugations of validated states).
    pub(crate) fn trusted(matrix: ComplexMatrix) -> Self {
        Self {
            matrix: matrix.symmetrized(),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// U rho U^dagger
    pub fn conjugated(&self, u: &ComplexMatrix) -> Self {
        Self::trusted(u.mul(&self.matrix).mul(&u.adjoint()))
    }
}

/// Truncated position/momentum pair built from ladder operators, optionally
/// displaced so that the vacuum sits at a chosen phase-space point.
#[derive(Debug, Clone)]
pub struct FockAlgebra {
    dim: usize,
    hbar_eff: f64,
    mass: f64,
    omega0: f64,
    x_center: f64,
    p_center: f64,
    x: HermitianOperator,
    p: HermitianOperator,
}

impl FockAlgebra {
    pub fn new(dim: usize, hbar_eff: f64, mass: f64, omega0: f64) -> Result<Self> {
        Self::displaced(dim, hbar_eff, mass, omega0, 0.0, 0.0)
    }

    /// Same ladder construction with X -> x_c + X, P -> p_c + P. Expectation
    /// values of polynomials in (X, P) on states near the displaced vacuum
    /// stay accurate at small truncation even when |x_c|, |p_c| >> sqrt(hbar).
    pub fn displaced(
        dim: usize,
        hbar_eff: f64,
        mass: f64,
        omega0: f64,
        x_center: f64,
        p_center: f64,
    ) -> Result<Self> {
        if dim < 2 {
            return Err(Error::OutOfRange("Fock truncation must be >= 2".into()));
        }
        if hbar_eff <= 0.0 || mass <= 0.0 || omega0 <= 0.0 {
            return Err(Error::OutOfRange(
                "hbar_eff, mass, omega0 must be positive".into(),
            ));
        }
        let sx = (hbar_eff / (2.0 * mass * omega0)).sqrt();
        let sp = (mass * hbar_eff * omega0 / 2.0).sqrt();
        let mut x = ComplexMatrix::zeros(dim, dim);
        let mut p = ComplexMatrix::zeros(dim, dim);
        for n in 0..dim - 1 {
            let r = ((n + 1) as f64).sqrt();
            x[(n, n + 1)] = Complex64::new(sx * r, 0.0);
            x[(n + 1, n)] = Complex64::new(sx * r, 0.0);
            p[(n, n + 1)] = Complex64::new(0.0, -sp * r);
            p[(n + 1, n)] = Complex64::new(0.0, sp * r);
        }
        for n in 0..dim {
            x[(n, n)] += Complex64::new(x_center, 0.0);
            p[(n, n)] += Complex64::new(p_center, 0.0);
        }
        Ok(Self {
            dim,
            hbar_eff,
            mass,
            omega0,
            x_center,
            p_center,
            x: HermitianOperator::new(x, "length")?,
            p: HermitianOperator::new(p, "momentum")?,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn hbar_eff(&self) -> f64 {
        self.hbar_eff
    }
    pub fn mass(&self) -> f64 {
        self.mass
    }
    pub fn omega0(&self) -> f64 {
        self.omega0
    }
    pub fn x_center(&self) -> f64 {
        self.x_center
    }
    pub fn p_center(&self) -> f64 {
        self.p_center
    }
    pub fn x(&self) -> &HermitianOperator {
        &self.x
    }
    pub fn p(&self) -> &HermitianOperator {
        &self.p
    }

    /// H(0) = P^2/2m + (m omega0^2/2) X^2
    pub fn h0(&self) -> Result<HermitianOperator> {
        let xm = self.x.matrix();
        let pm = self.p.matrix();
        let h = pm
            .mul(pm)
            .scale_re(1.0 / (2.0 * self.mass))
            .add(&xm.mul(xm).scale_re(self.mass * self.omega0 * self.omega0 / 2.0));
        HermitianOperator::new(h, "energy")
    }

    /// Largest |[X,P] - i hbar| entry over the bulk block (truncation only
    /// corrupts the last two levels).
    pub fn commutator_residual(&self) -> f64 {
        let xm = self.x.matrix();
        let pm = self.p.matrix();
        let comm = xm.mul(pm).sub(&pm.mul(xm));
        let mut r: f64 = 0.0;
        let bulk = self.dim.saturating_sub(2);
        for j in 0..bulk {
            for k in 0..bulk {
                let expect = if j == k {
                    Complex64::new(0.0, self.hbar_eff)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                r = r.max((comm[(j, k)] - expect).norm());
            }
        }
        r
    }
}

/// |alpha> relative to the algebra's displaced vacuum.
pub fn coherent_state(alpha: Complex64, algebra: &FockAlgebra) -> Result<DensityMatrix> {
    let dim = algebra.dim();
    let a2 = alpha.norm_sqr();
    // amplitude c_n = e^{-|a|^2/2} alpha^n / sqrt(n!)
    let mut amps = Vec::with_capacity(dim);
    let mut c = Complex64::new((-a2 / 2.0).exp(), 0.0);
    let mut kept = c.norm_sqr();
    amps.push(c);
    for n in 1..dim {
        c *= alpha / (n as f64).sqrt();
        kept += c.norm_sqr();
        amps.push(c);
    }
    let tail = 1.0 - kept;
    if tail > 1e-10 {
        return Err(Error::TruncationTooSmall { tail, tol: 1e-10 });
    }
    DensityMatrix::pure(&amps)
}

fn cluster_bounds(eigenvalues: &[f64], tol: f64) -> Vec<(usize, usize)> {
    let mut blocks = Vec::new();
    let mut start = 0;
    for j in 1..eigenvalues.len() {
        if eigenvalues[j] - eigenvalues[j - 1] > tol {
            blocks.push((start, j));
            start = j;
        }
    }
    blocks.push((start, eigenvalues.len()));
    blocks
}

/// Default degeneracy tolerance: 1e-8 of the spectral range.
pub fn default_degeneracy_tol(spec: &Spectrum) -> f64 {
    1e-8 * spec.spectral_range().max(1.0)
}

/// Erase coherences between eigenspaces of H. Degenerate eigenvalues (gaps
/// below degeneracy_tol) dephase as whole blocks, which keeps the map
/// basis-independent.
pub fn dephase(
    rho: &DensityMatrix,
    h: &HermitianOperator,
    degeneracy_tol: Option<f64>,
) -> Result<DensityMatrix> {
    if rho.dim() != h.dim() {
        return Err(Error::DimensionMismatch("dephase: state/observable dims".into()));
    }
    let spec = h.spectrum()?;
    let tol = degeneracy_tol.unwrap_or_else(|| default_degeneracy_tol(&spec));
    let v = &spec.eigenvectors;
    let mut rot = v.adjoint().mul(rho.matrix()).mul(v);
    let blocks = cluster_bounds(&spec.eigenvalues, tol);
    let n = rho.dim();
    let mut block_of = vec![0usize; n];
    for (b, &(lo, hi)) in blocks.iter().enumerate() {
        for j in lo..hi {
            block_of[j] = b;
        }
    }
    for j in 0..n {
        for k in 0..n {
            if block_of[j] != block_of[k] {
                rot[(j, k)] = Complex64::new(0.0, 0.0);
            }
        }
    }
    Ok(DensityMatrix::trusted(v.mul(&rot).mul(&v.adjoint())))
}

/// Sum of off-diagonal moduli of rho in the eigenbasis of H. Refuses
/// degenerate H: the value would depend on an arbitrary basis choice.
pub fn l1_coherence(
    rho: &DensityMatrix,
    h: &HermitianOperator,
    degeneracy_tol: Option<f64>,
) -> Result<f64> {
    if rho.dim() != h.dim() {
        return Err(Error::DimensionMismatch("l1_coherence: dims".into()));
    }
    let spec = h.spectrum()?;
    let tol = degeneracy_tol.unwrap_or_else(|| default_degeneracy_tol(&spec));
    let gap = spec.min_gap();
    if rho.dim() > 1 && gap < tol {
        return Err(Error::DegenerateSpectrum { gap, tol });
    }
    let v = &spec.eigenvectors;
    let rot = v.adjoint().mul(rho.matrix()).mul(v);
    let n = rho.dim();
    let mut total = 0.0;
    for j in 0..n {
        for k in 0..n {
            if j != k {
                total += rot[(j, k)].norm();
            }
        }
    }
    Ok(total)
}

/// Von Neumann entropy, natural log; eigenvalues <= 1e-14 contribute 0.
pub fn entropy(rho: &DensityMatrix) -> Result<f64> {
    let spec = hermitian_eig(rho.matrix())?;
    Ok(spec
        .eigenvalues
        .iter()
        .filter(|&&l| l > 1e-14)
        .map(|&l| -l * l.ln())
        .sum())
}

/// S(dephase(rho)) - S(rho).
pub fn rel_entropy_coherence(
    rho: &DensityMatrix,
    h: &HermitianOperator,
    degeneracy_tol: Option<f64>,
) -> Result<f64> {
    let spec = h.spectrum()?;
    let tol = degeneracy_tol.unwrap_or_else(|| default_degeneracy_tol(&spec));
    let gap = spec.min_gap();
    if rho.dim() > 1 && gap < tol {
        return Err(Error::DegenerateSpectrum { gap, tol });
    }
    let dephased = dephase(rho, h, Some(tol))?;
    Ok((entropy(&dephased)? - entropy(rho)?).max(0.0))
}

/// Tr[A rho], checked real.
pub fn expectation(rho: &DensityMatrix, a: &HermitianOperator) -> Result<f64> {
    if rho.dim() != a.dim() {
        return Err(Error::DimensionMismatch("expectation: dims".into()));
    }
    let tr = a.matrix().trace_product(rho.matrix());
    let scale = (a.matrix().norm_max() * rho.dim() as f64).max(1.0);
    if tr.im.abs() > 1e-8 * scale {
        return Err(Error::NonRealExpectation { imag: tr.im });
    }
    Ok(tr.re)
}

/// Population of the top 10% of basis levels; flags truncation trouble.
pub fn fock_leakage(rho: &DensityMatrix) -> f64 {
    let n = rho.dim();
    let start = n - (n / 10).max(1);
    (start..n).map(|j| rho.matrix()[(j, j)].re).sum()
}

/// sigma_z, sigma_x convenience builders for two-level scenarios.
pub fn sigma_z() -> HermitianOperator {
    HermitianOperator::new(ComplexMatrix::diag_real(&[1.0, -1.0]), "energy").unwrap()
}

pub fn sigma_x() -> HermitianOperator {
    HermitianOperator::new(
        ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap(),
        "energy",
    )
    .unwrap()
}
