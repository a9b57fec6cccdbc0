use num_complex::Complex64;
use qwork::dynamics::{
    heisenberg_hamiltonian, propagate, suggested_steps, Envelope, HamiltonianForm,
    TimeDependentHamiltonian,
};
use qwork::numkit::{unitary_exp, ComplexMatrix};
use qwork::quantum::{sigma_x, sigma_z, DensityMatrix, HermitianOperator};
use qwork::workstats::{
    apply_povm, characteristic_function, criteria_report, l1_distance, max_coherence_along_path,
    obs_povm, tpm_povm, work_operator, Provenance, WorkDistribution,
};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

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

struct Scenario {
    h0: HermitianOperator,
    h_tau: HermitianOperator,
    u: ComplexMatrix,
}

fn random_scenario(rng: &mut ChaCha8Rng) -> Scenario {
    let dim = rng.gen_range(2..=12);
    let h0 = random_hermitian(dim, rng);
    let h_tau = random_hermitian(dim, rng);
    let g = random_hermitian(dim, rng);
    let u = unitary_exp(g.matrix(), rng.gen_range(0.1..3.0)).unwrap();
    Scenario { h0, h_tau, u }
}

#[test]
fn povm_validity_and_first_law_200_random_scenarios() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for k in 0..200 {
        let sc = random_scenario(&mut rng);
        let hh_tau = heisenberg_hamiltonian_of(&sc);
        let w = work_operator(&sc.h0, &hh_tau).unwrap();
        let merge_tol = 1e-8 * w.matrix().norm_max().max(1.0);

        let samples: Vec<DensityMatrix> = (0..3).map(|_| random_density(sc.h0.dim(), &mut rng)).collect();
        for povm in [
            tpm_povm(&sc.h0, &sc.h_tau, &sc.u, None).unwrap(),
            obs_povm(&w, None).unwrap(),
        ] {
            let report = criteria_report(&povm, &sc.h0, &hh_tau, &samples).unwrap();
            assert!(report.completeness_residual <= 1e-8, "scenario {k}");
            assert!(report.min_effect_eigenvalue >= -1e-9, "scenario {k}");
            if matches!(povm.kind, qwork::workstats::PovmKind::Obs) {
                assert!(
                    report.first_law_operator_residual <= 1e-8 + merge_tol,
                    "scenario {k}: {:.3e}",
                    report.first_law_operator_residual
                );
                assert!(report.first_law_state_gap <= 1e-9, "scenario {k}");
            }
        }
    }
}

fn heisenberg_hamiltonian_of(sc: &Scenario) -> HermitianOperator {
    HermitianOperator::new(
        sc.u.adjoint().mul(sc.h_tau.matrix()).mul(&sc.u).symmetrized(),
        sc.h_tau.unit_label(),
    )
    .unwrap()
}

#[test]
fn tpm_probabilities_are_linear_in_the_state() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..20 {
        let sc = random_scenario(&mut rng);
        let povm = tpm_povm(&sc.h0, &sc.h_tau, &sc.u, None).unwrap();
        let rho1 = random_density(sc.h0.dim(), &mut rng);
        let rho2 = random_density(sc.h0.dim(), &mut rng);
        let lam = rng.gen_range(0.05..0.95);
        let mix = DensityMatrix::mixture(&[(lam, rho1.clone()), (1.0 - lam, rho2.clone())]).unwrap();
        let d_mix = apply_povm(&povm, &mix).unwrap();
        let d1 = apply_povm(&povm, &rho1).unwrap();
        let d2 = apply_povm(&povm, &rho2).unwrap();
        // compare per outcome value; all three share the effect list
        for (w, _) in &povm.atoms {
            let p = |d: &WorkDistribution| {
                d.atoms
                    .iter()
                    .find(|(v, _)| (v - w).abs() < 1e-12)
                    .map_or(0.0, |(_, p)| *p)
            };
            assert!((p(&d_mix) - lam * p(&d1) - (1.0 - lam) * p(&d2)).abs() <= 1e-10);
        }
    }
}

#[test]
fn characteristic_function_generates_moments() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for _ in 0..50 {
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
            provenance: Provenance::Classical,
        };
        assert!((characteristic_function(&dist, 0.0) - Complex64::new(1.0, 0.0)).norm() <= 1e-12);
        let h = 1e-6;
        let d1 = (characteristic_function(&dist, h) - characteristic_function(&dist, -h))
            / Complex64::new(2.0 * h, 0.0);
        let mean = dist.mean();
        assert!((d1 - Complex64::new(0.0, mean)).norm() <= 1e-6 * mean.abs().max(1.0));
        let h2 = 1e-4; // larger step: the second difference loses ~8 digits to cancellation
        let d2 = (characteristic_function(&dist, h2) - 2.0 * characteristic_function(&dist, 0.0)
            + characteristic_function(&dist, -h2))
            / Complex64::new(h2 * h2, 0.0);
        let m2 = dist.second_moment();
        assert!((d2 + Complex64::new(m2, 0.0)).norm() <= 1e-5 * m2.abs().max(1.0));
    }
}

#[test]
fn weak_drive_protocols_converge_in_moments_and_support() {
    // weakly driven two-level system starting incoherent: both protocols
    // share all moments exactly, the observable-protocol outcome spread
    // shrinks linearly with the measured path coherence, and the residual
    // distance under coarse outcome alignment is quadratically small
    let rho = DensityMatrix::pure(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]).unwrap();
    let mut prev_eps1 = f64::INFINITY;
    for eps in [1e-1, 1e-2, 1e-3, 1e-4] {
        let hspec = TimeDependentHamiltonian::new(
            1.0,
            HamiltonianForm::TwoLevelDrive {
                base: sigma_z(),
                drive: sigma_x(),
                envelope: Envelope::HalfSine { amplitude: eps },
            },
        )
        .unwrap();
        let steps = suggested_steps(&hspec, 1.0).unwrap();
        let prop = propagate(&hspec, 1.0, steps, 1.0).unwrap();
        let h_tau = hspec.at(1.0).unwrap();
        let hh_tau = heisenberg_hamiltonian(&hspec, 1.0, &prop.u).unwrap();
        let w = work_operator(&hspec.at(0.0).unwrap(), &hh_tau).unwrap();
        let d_tpm = apply_povm(&tpm_povm(&hspec.at(0.0).unwrap(), &h_tau, &prop.u, None).unwrap(), &rho)
            .unwrap();
        let d_obs = apply_povm(&obs_povm(&w, None).unwrap(), &rho).unwrap();
        let grid: Vec<f64> = (0..=20).map(|k| k as f64 / 20.0).collect();
        let eps1 = max_coherence_along_path(&hspec, &rho, &grid, 1.0).unwrap();
        assert!(eps1 > 0.0 && eps1 < prev_eps1);
        prev_eps1 = eps1;
        // incoherent start: first and second moments agree exactly
        assert!((d_tpm.mean() - d_obs.mean()).abs() <= 1e-12);
        assert!((d_tpm.second_moment() - d_obs.second_moment()).abs() <= 1e-12);
        // outcome support collapses at the coherence rate
        let spread = d_obs.atoms.iter().map(|a| a.0.abs()).fold(0.0f64, f64::max);
        assert!(spread <= 1.1 * eps1, "eps = {eps}: spread {spread:.3e}");
        if eps <= 1e-4 {
            let l1 = l1_distance(&d_tpm, &d_obs, 1e-3);
            assert!(l1 <= 1e-6, "eps = {eps}: residual distance {l1:.3e}");
        }
    }
}
