use num_complex::Complex64;
use proptest::prelude::*;
use qwork::numkit::ComplexMatrix;
use qwork::quantum::{dephase, DensityMatrix, HermitianOperator};
use qwork::workstats::{characteristic_function, l1_distance, Provenance, WorkDistribution};

fn density_from_entries(dim: usize, entries: &[(f64, f64)]) -> DensityMatrix {
    let a = ComplexMatrix::from_fn(dim, dim, |j, k| {
        let (re, im) = entries[j * dim + k];
        Complex64::new(re, im)
    });
    let g = a.mul(&a.adjoint()).add(&ComplexMatrix::identity(dim).scale_re(1e-6));
    let norm = g.trace().re;
    DensityMatrix::from_matrix(g.scale_re(1.0 / norm)).unwrap()
}

fn hermitian_from_entries(dim: usize, entries: &[(f64, f64)]) -> HermitianOperator {
    let a = ComplexMatrix::from_fn(dim, dim, |j, k| {
        let (re, im) = entries[j * dim + k];
        Complex64::new(re, im)
    });
    HermitianOperator::new(a.add(&a.adjoint()).scale_re(0.5), "energy").unwrap()
}

fn atoms_strategy() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec(((-10.0..10.0f64), (1e-3..1.0f64)), 1..12).prop_map(|mut v| {
        let mass: f64 = v.iter().map(|a| a.1).sum();
        for a in &mut v {
            a.1 /= mass;
        }
        v
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dephasing_preserves_trace_and_hermiticity(
        entries in prop::collection::vec(((-1.0..1.0f64), (-1.0..1.0f64)), 16),
        h_entries in prop::collection::vec(((-1.0..1.0f64), (-1.0..1.0f64)), 16),
    ) {
        let rho = density_from_entries(4, &entries);
        let h = hermitian_from_entries(4, &h_entries);
        let deph = dephase(&rho, &h, None).unwrap();
        prop_assert!((deph.matrix().trace().re - 1.0).abs() <= 1e-10);
        prop_assert!(deph.matrix().hermiticity_residual() <= 1e-10);
    }

    #[test]
    fn characteristic_function_is_normalized_and_bounded(
        atoms in atoms_strategy(),
        u in -50.0..50.0f64,
    ) {
        let dist = WorkDistribution { atoms, provenance: Provenance::Classical };
        prop_assert!((characteristic_function(&dist, 0.0) - Complex64::new(1.0, 0.0)).norm() <= 1e-12);
        prop_assert!(characteristic_function(&dist, u).norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn l1_distance_is_a_bounded_symmetric_gap(
        a in atoms_strategy(),
        b in atoms_strategy(),
    ) {
        let da = WorkDistribution { atoms: a, provenance: Provenance::Classical };
        let db = WorkDistribution { atoms: b, provenance: Provenance::Classical };
        let d_ab = l1_distance(&da, &db, 1e-9);
        let d_ba = l1_distance(&db, &da, 1e-9);
        prop_assert!((d_ab - d_ba).abs() <= 1e-12);
        prop_assert!((-1e-12..=2.0 + 1e-12).contains(&d_ab));
        prop_assert!(l1_distance(&da, &da, 1e-9) <= 1e-12);
    }
}
