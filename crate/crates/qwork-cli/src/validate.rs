use num_complex::Complex64;
use qwork::airy_osc::{abcd, OscillatorParams};
use qwork::classical::{
    classical_work_distribution, evolve_trajectory, ClassicalHamiltonian, PhaseDistribution,
    PhasePoint, RampOscillator, StaticOscillator, DEFAULT_RK4_STEPS,
};
use qwork::numkit::{airy, hermitian_eig, hyp0f1, unitarity_residual, unitary_exp, ComplexMatrix};
use qwork::quantum::{
    coherent_state, dephase, expectation, l1_coherence, DensityMatrix, FockAlgebra,
    HermitianOperator,
};
use qwork::workstats::{
    apply_povm, characteristic_function, criteria_report, obs_povm, tpm_povm, work_operator,
    WorkDistribution,
};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    pub worst_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct ValidateSummary {
    pub seed: u64,
    pub count: usize,
    pub max_dim: usize,
    pub suites: Vec<SuiteResult>,
    pub all_passed: bool,
}

struct Suite {
    name: String,
    cases: usize,
    failures: usize,
    worst: f64,
    detail: Option<String>,
}

impl Suite {
    fn new(name: &str) -> Self {
        Suite {
            name: name.to_string(),
            cases: 0,
            failures: 0,
            worst: 0.0,
            detail: None,
        }
    }

    fn check(&mut self, residual: f64, tol: f64, detail: &str) {
        self.cases += 1;
        self.worst = self.worst.max(residual);
        if !(residual <= tol) {
            self.failures += 1;
            if self.detail.is_none() {
                self.detail = Some(format!("{detail}: residual {residual:.3e} > {tol:.3e}"));
            }
        }
    }

    fn finish(self) -> SuiteResult {
        SuiteResult {
            name: self.name,
            cases: self.cases,
            failures: self.failures,
            worst_residual: self.worst,
            detail: self.detail,
        }
    }
}

fn random_hermitian(dim: usize, rng: &mut ChaCha8Rng) -> HermitianOperator {
    let a = ComplexMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    HermitianOperator::new(a.add(&a.adjoint()).scale_re(0.5), "energy").unwrap()
}

fn random_density(dim: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
    let a = ComplexMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let g = a.mul(&a.adjoint());
    let norm = g.trace().re;
    DensityMatrix::from_matrix(g.scale_re(1.0 / norm)).unwrap()
}

/// Run every randomized invariant suite. `inject_nonunitary` deliberately
/// corrupts one propagator to prove the harness detects it.
pub fn run_all(seed: u64, count: usize, max_dim: usize, inject_nonunitary: bool) -> ValidateSummary {
    let mut suites = Vec::new();

    // 1. eigendecomposition reconstructs its input
    let mut s = Suite::new("hermitian_eig_reconstruction");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
    for k in 0..count {
        let dim = rng.gen_range(2..=max_dim);
        let h = random_hermitian(dim, &mut rng);
        let spec = hermitian_eig(h.matrix()).unwrap();
        let recon = spec
            .eigenvectors
            .mul(&ComplexMatrix::diag_real(&spec.eigenvalues))
            .mul(&spec.eigenvectors.adjoint());
        s.check(
            recon.sub(h.matrix()).norm_max() / h.matrix().norm_max(),
            1e-8,
            &format!("case {k}"),
        );
    }
    suites.push(s.finish());

    // 2. matrix exponentials stay unitary (fault-injection target)
    let mut s = Suite::new("unitary_exp_unitarity");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 2);
    for k in 0..count {
        let dim = rng.gen_range(2..=max_dim);
        let h = random_hermitian(dim, &mut rng);
        let mut u = unitary_exp(h.matrix(), rng.gen_range(-10.0..10.0)).unwrap();
        if inject_nonunitary && k == 0 {
            u = u.scale_re(1.0 + 1e-3);
        }
        s.check(unitarity_residual(&u), 1e-10, &format!("case {k}"));
    }
    suites.push(s.finish());

    // 3. Airy Wronskian
    let mut s = Suite::new("airy_wronskian");
    for k in 0..=count {
        let z = -3.0 + 6.0 * k as f64 / count as f64;
        let v = airy(z).unwrap();
        let w = v.ai * v.bi_prime - v.ai_prime * v.bi;
        s.check(
            (w - std::f64::consts::FRAC_1_PI).abs(),
            1e-10,
            &format!("z = {z}"),
        );
    }
    suites.push(s.finish());

    // 4. confluent series converged before its term cap
    let mut s = Suite::new("hyp0f1_convergence");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 4);
    for k in 0..count {
        let a = rng.gen_range(0.2..3.0);
        let z = rng.gen_range(-30.0..30.0);
        let full = hyp0f1(a, z).unwrap();
        let mut term = 1.0;
        let mut half = 1.0;
        for n in 0..250 {
            term *= z / ((a + n as f64) * (n as f64 + 1.0));
            half += term;
        }
        s.check(((full - half) / full).abs(), 1e-13, &format!("case {k}"));
    }
    suites.push(s.finish());

    // 5. dephasing map contract
    let mut s = Suite::new("dephase_contract");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 5);
    let mut k = 0;
    while k < count {
        let dim = rng.gen_range(2..=max_dim.min(8));
        let h = random_hermitian(dim, &mut rng);
        let rho = random_density(dim, &mut rng);
        let deph = dephase(&rho, &h, None).unwrap();
        let coherence = match l1_coherence(&deph, &h, None) {
            Ok(c) => c,
            Err(_) => continue, // degenerate draw: the scalar measure refuses
        };
        let trace_gap = (deph.matrix().trace().re - 1.0).abs();
        let idem = dephase(&deph, &h, None)
            .unwrap()
            .matrix()
            .sub(deph.matrix())
            .norm_max();
        s.check(
            trace_gap.max(idem).max(coherence),
            1e-10,
            &format!("case {k}"),
        );
        k += 1;
    }
    suites.push(s.finish());

    // 6. coherent-state moments
    let mut s = Suite::new("coherent_state_moments");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 6);
    let algebra = FockAlgebra::new(60, 1.0, 1.0, 1.0).unwrap();
    for k in 0..count.min(20) {
        let alpha = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let rho = coherent_state(alpha, &algebra).unwrap();
        let x = expectation(&rho, algebra.x()).unwrap();
        let p = expectation(&rho, algebra.p()).unwrap();
        let gap = (x - 2.0f64.sqrt() * alpha.re)
            .abs()
            .max((p - 2.0f64.sqrt() * alpha.im).abs());
        s.check(gap, 1e-8, &format!("case {k}"));
    }
    suites.push(s.finish());

    // 7 + 8. POVM validity and the operator first law
    let mut povm_suite = Suite::new("povm_completeness_positivity");
    let mut law_suite = Suite::new("obs_first_law");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 7);
    for k in 0..count {
        let dim = rng.gen_range(2..=max_dim.min(12));
        let h0 = random_hermitian(dim, &mut rng);
        let h_tau = random_hermitian(dim, &mut rng);
        let g = random_hermitian(dim, &mut rng);
        let u = unitary_exp(g.matrix(), rng.gen_range(0.1..3.0)).unwrap();
        let hh_tau = HermitianOperator::new(
            u.adjoint().mul(h_tau.matrix()).mul(&u).symmetrized(),
            "energy",
        )
        .unwrap();
        let w = work_operator(&h0, &hh_tau).unwrap();
        let merge_tol = 1e-8 * w.matrix().norm_max().max(1.0);
        let samples = vec![random_density(dim, &mut rng)];
        for povm in [
            tpm_povm(&h0, &h_tau, &u, None).unwrap(),
            obs_povm(&w, None).unwrap(),
        ] {
            let is_obs = matches!(povm.kind, qwork::workstats::PovmKind::Obs);
            let report = criteria_report(&povm, &h0, &hh_tau, &samples).unwrap();
            povm_suite.check(report.completeness_residual, 1e-8, &format!("case {k}"));
            povm_suite.check(
                (-report.min_effect_eigenvalue).max(0.0),
                1e-9,
                &format!("case {k}"),
            );
            if is_obs {
                law_suite.check(
                    report.first_law_operator_residual,
                    1e-8 + merge_tol,
                    &format!("case {k}"),
                );
                law_suite.check(report.first_law_state_gap, 1e-9, &format!("case {k}"));
            }
        }
    }
    suites.push(povm_suite.finish());
    suites.push(law_suite.finish());

    // 9. TPM probabilities are linear in the state
    let mut s = Suite::new("tpm_linearity");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 9);
    for k in 0..count.min(40) {
        let dim = rng.gen_range(2..=max_dim.min(8));
        let h0 = random_hermitian(dim, &mut rng);
        let h_tau = random_hermitian(dim, &mut rng);
        let g = random_hermitian(dim, &mut rng);
        let u = unitary_exp(g.matrix(), 1.0).unwrap();
        let povm = tpm_povm(&h0, &h_tau, &u, None).unwrap();
        let r1 = random_density(dim, &mut rng);
        let r2 = random_density(dim, &mut rng);
        let lam = rng.gen_range(0.1..0.9);
        let mix = DensityMatrix::mixture(&[(lam, r1.clone()), (1.0 - lam, r2.clone())]).unwrap();
        let (dm, d1, d2) = (
            apply_povm(&povm, &mix).unwrap(),
            apply_povm(&povm, &r1).unwrap(),
            apply_povm(&povm, &r2).unwrap(),
        );
        let lookup = |d: &WorkDistribution, w: f64| {
            d.atoms
                .iter()
                .find(|(v, _)| (v - w).abs() < 1e-12)
                .map_or(0.0, |(_, p)| *p)
        };
        let mut gap: f64 = 0.0;
        for (w, _) in &povm.atoms {
            gap = gap
                .max((lookup(&dm, *w) - lam * lookup(&d1, *w) - (1.0 - lam) * lookup(&d2, *w)).abs());
        }
        s.check(gap, 1e-10, &format!("case {k}"));
    }
    suites.push(s.finish());

    // 10. characteristic function generates the first moment
    let mut s = Suite::new("characteristic_function_moments");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 10);
    for k in 0..count {
        let n = rng.gen_range(1..=8);
        let mut atoms: Vec<(f64, f64)> = (0..n)
            .map(|_| (rng.gen_range(-3.0..3.0), rng.gen_range(0.01..1.0)))
            .collect();
        let mass: f64 = atoms.iter().map(|a| a.1).sum();
        for a in &mut atoms {
            a.1 /= mass;
        }
        let dist = WorkDistribution {
            atoms,
            provenance: qwork::workstats::Provenance::Classical,
        };
        let chi0 = (characteristic_function(&dist, 0.0) - Complex64::new(1.0, 0.0)).norm();
        let h = 1e-6;
        let d1 = (characteristic_function(&dist, h) - characteristic_function(&dist, -h))
            / Complex64::new(2.0 * h, 0.0);
        let gap = (d1 - Complex64::new(0.0, dist.mean())).norm()
            / dist.mean().abs().max(1.0);
        s.check(chi0.max(0.0), 1e-12, &format!("case {k} chi(0)"));
        s.check(gap, 1e-6, &format!("case {k} derivative"));
    }
    suites.push(s.finish());

    // 11. autonomous classical trajectories conserve energy
    let mut s = Suite::new("classical_energy_conservation");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 11);
    for k in 0..count.min(50) {
        let spec = StaticOscillator {
            mass: rng.gen_range(0.5..2.0),
            omega: rng.gen_range(0.5..3.0),
            tau: 2.0,
        };
        let g0 = PhasePoint::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)).unwrap();
        let traj = evolve_trajectory(&spec, g0, 2.0, DEFAULT_RK4_STEPS).unwrap();
        let drift = (spec.h(traj.end.x, traj.end.p, 2.0) - spec.h(g0.x, g0.p, 0.0)).abs()
            / spec.h(g0.x, g0.p, 0.0).abs().max(1e-6);
        s.check(drift, 1e-8, &format!("case {k}"));
    }
    suites.push(s.finish());

    // 12. linear flows are symplectic
    let mut s = Suite::new("airy_flow_symplectic");
    let params = OscillatorParams::reference(1.0);
    for k in 0..=count.min(100) {
        let t = k as f64 / count.min(100) as f64;
        let flow = abcd(&params, t).unwrap();
        s.check(flow.symplectic_residual(), 1e-10, &format!("t = {t}"));
    }
    suites.push(s.finish());

    // 13. seeded sampling is reproducible
    let mut s = Suite::new("classical_seed_determinism");
    let spec = RampOscillator {
        mass: 1.0,
        omega0: 1.0,
        omega1: 3.0,
        tau: 1.0,
    };
    let dist = PhaseDistribution::Gaussian {
        mean: PhasePoint::new(1.0, 1.0).unwrap(),
        sigma_x: 0.2,
        sigma_p: 0.2,
    };
    let a = classical_work_distribution(&spec, &dist, 256, seed, None).unwrap();
    let b = classical_work_distribution(&spec, &dist, 256, seed, None).unwrap();
    let identical = a.atoms.len() == b.atoms.len()
        && a.atoms
            .iter()
            .zip(&b.atoms)
            .all(|(x, y)| x.0.to_bits() == y.0.to_bits() && x.1.to_bits() == y.1.to_bits());
    s.check(if identical { 0.0 } else { 1.0 }, 0.5, "repeat run");
    suites.push(s.finish());

    let all_passed = suites.iter().all(|r| r.failures == 0);
    ValidateSummary {
        seed,
        count,
        max_dim,
        suites,
        all_passed,
    }
}
