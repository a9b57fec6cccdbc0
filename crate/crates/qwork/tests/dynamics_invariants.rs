use num_complex::Complex64;
use qwork::dynamics::{
    heisenberg_hamiltonian, propagate, propagate_interval, suggested_steps, Envelope,
    HamiltonianForm, TimeDependentHamiltonian,
};
use qwork::numkit::{hermitian_eig, ComplexMatrix};
use qwork::quantum::{DensityMatrix, FockAlgebra, HermitianOperator};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn random_hermitian(dim: usize, rng: &mut ChaCha8Rng) -> HermitianOperator {
    let a = ComplexMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    HermitianOperator::new(a.add(&a.adjoint()).scale_re(0.5), "energy").unwrap()
}

fn scenario_forms(rng: &mut ChaCha8Rng) -> Vec<TimeDependentHamiltonian> {
    let algebra = FockAlgebra::new(16, 1.0, 1.0, 1.0).unwrap();
    vec![
        TimeDependentHamiltonian::new(1.0, HamiltonianForm::Constant(random_hermitian(5, rng)))
            .unwrap(),
        TimeDependentHamiltonian::new(
            1.0,
            HamiltonianForm::Quench {
                h0: random_hermitian(4, rng),
                h1: random_hermitian(4, rng),
                switch_time: 0.4,
            },
        )
        .unwrap(),
        TimeDependentHamiltonian::new(
            1.0,
            HamiltonianForm::LinearRampOscillator {
                algebra,
                omega1: 3.0,
            },
        )
        .unwrap(),
        TimeDependentHamiltonian::new(
            1.0,
            HamiltonianForm::PiecewiseTable {
                times: vec![0.0, 0.3, 0.7],
                matrices: vec![
                    random_hermitian(4, rng),
                    random_hermitian(4, rng),
                    random_hermitian(4, rng),
                ],
            },
        )
        .unwrap(),
        TimeDependentHamiltonian::new(
            1.0,
            HamiltonianForm::TwoLevelDrive {
                base: random_hermitian(2, rng),
                drive: random_hermitian(2, rng),
                envelope: Envelope::HalfSine { amplitude: 0.3 },
            },
        )
        .unwrap(),
    ]
}

#[test]
fn heisenberg_picture_is_isospectral_for_all_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for hspec in scenario_forms(&mut rng) {
        // isospectrality only needs U unitary, not tightly converged
        for t in [0.25, 0.6, 1.0] {
            let prop = propagate(&hspec, t, 300, 1.0).unwrap();
            let hh = heisenberg_hamiltonian(&hspec, t, &prop.u).unwrap();
            let ev_h = hermitian_eig(hspec.at(t).unwrap().matrix()).unwrap().eigenvalues;
            let ev_hh = hermitian_eig(hh.matrix()).unwrap().eigenvalues;
            let scale = ev_h.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            for (a, b) in ev_h.iter().zip(&ev_hh) {
                assert!((a - b).abs() <= 1e-8 * scale, "t = {t}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn propagators_compose_across_the_midpoint() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for hspec in scenario_forms(&mut rng) {
        let steps = suggested_steps(&hspec, 1.0).unwrap().min(800);
        let full = propagate(&hspec, hspec.tau, steps, 1.0).unwrap();
        let first = propagate_interval(&hspec, 0.0, 0.5 * hspec.tau, steps / 2, 1.0).unwrap();
        let second =
            propagate_interval(&hspec, 0.5 * hspec.tau, hspec.tau, steps / 2, 1.0).unwrap();
        let composed = second.u.mul(&first.u);
        let budget = 2.0 * (full.richardson_gap + first.richardson_gap + second.richardson_gap);
        let gap = composed.sub(&full.u).norm_max();
        assert!(gap <= budget.max(1e-10), "{gap:.3e} > {budget:.3e}");
    }
}

#[test]
fn constant_form_conserves_energy() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let h = random_hermitian(6, &mut rng);
    let hspec = TimeDependentHamiltonian::new(2.0, HamiltonianForm::Constant(h.clone())).unwrap();
    let amps: Vec<Complex64> = (0..6)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let rho = DensityMatrix::pure(&amps).unwrap();
    let e0 = h.matrix().mul(rho.matrix()).trace().re;
    for t in [0.3, 1.1, 2.0] {
        let prop = propagate(&hspec, t, 100, 1.0).unwrap();
        let hh = heisenberg_hamiltonian(&hspec, t, &prop.u).unwrap();
        let e = hh.matrix().mul(rho.matrix()).trace().re;
        assert!((e - e0).abs() <= 1e-9 * e0.abs().max(1.0), "t = {t}");
    }
}

#[test]
fn richardson_gap_certifies_the_generic_path() {
    let algebra = FockAlgebra::new(12, 1.0, 1.0, 1.0).unwrap();
    let hspec = TimeDependentHamiltonian::new(
        1.0,
        HamiltonianForm::LinearRampOscillator {
            algebra,
            omega1: 3.0,
        },
    )
    .unwrap();
    let coarse = propagate(&hspec, 1.0, 200, 1.0).unwrap();
    let fine = propagate(&hspec, 1.0, 800, 1.0).unwrap();
    assert!(coarse.richardson_gap > 0.0);
    // 2nd-order integrator: quartering the step shrinks the certificate ~16x
    assert!(fine.richardson_gap < coarse.richardson_gap / 8.0);
    assert!(fine.u.sub(&coarse.u).norm_max() <= 4.0 * coarse.richardson_gap);
}
