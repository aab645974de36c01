use elastowave::lame_symbol::{
    block_decomposition, conjugated_symbol, geodesic_rotation, half_wave_multiplier, lame_symbol_matrix,
    partition_of_unity, rotation_field, Diagonalization,
};
use elastowave::oracle::multiplier_via_eigendecomposition;
use elastowave::{FrequencyPoint, LameParams, Sign};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;

fn params() -> impl Strategy<Value = LameParams> {
    (0.05..5.0f64, 0.0..1.0f64).prop_map(|(mu, u)| {
        // lambda ranges over (-2 mu, 10) with a margin
        let lambda = -1.95 * mu + u * (10.0 + 1.95 * mu);
        LameParams::new(lambda, mu).unwrap()
    })
}

fn frequency(dims: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = FrequencyPoint> {
    dims.prop_flat_map(|n| prop::collection::vec(-60.0..60.0f64, n))
        .prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-6)
        .prop_map(|v| FrequencyPoint::from_slice(&v).unwrap())
}

fn unit_vector(n: usize) -> impl Strategy<Value = DVector<f64>> {
    prop::collection::vec(-1.0..1.0f64, n)
        .prop_filter("not tiny", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-4)
        .prop_map(|v| DVector::from_vec(v).normalize())
}

fn conjugate(r: &DMatrix<f64>, d: &[Complex64]) -> DMatrix<Complex64> {
    let rc = r.map(|x| Complex64::new(x, 0.0));
    &rc * DMatrix::from_diagonal(&DVector::from_column_slice(d)) * rc.transpose()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn ellipticity_is_exactly_the_admission_rule(lambda in -10.0..10.0f64, mu in -2.0..5.0f64) {
        let ok = mu > 0.0 && lambda + 2.0 * mu > 0.0;
        prop_assert_eq!(LameParams::new(lambda, mu).is_ok(), ok);
    }

    #[test]
    fn speeds_follow_the_moduli(p in params()) {
        prop_assert!((p.p_speed() - (p.lambda() + 2.0 * p.mu()).sqrt()).abs() <= 1e-15 * p.p_speed());
        prop_assert!((p.s_speed() - p.mu().sqrt()).abs() <= 1e-15 * p.s_speed());
        prop_assert_eq!(p.p_speed() >= p.s_speed(), p.lambda() + p.mu() >= 0.0);
    }

    #[test]
    fn direction_is_unit(xi in frequency(2..=4)) {
        prop_assert!((xi.direction().unwrap().norm() - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn diagonalization_identity(p in params(), xi in frequency(2..=3)) {
        let l = lame_symbol_matrix(&p, &xi);
        for sign in Sign::BOTH {
            if rotation_field(sign, &xi).is_ok() {
                let m = conjugated_symbol(&p, sign, &xi).unwrap();
                prop_assert!((m - &l).norm() <= 1e-10 * l.norm());
            }
        }
    }

    #[test]
    fn branches_agree_on_the_overlap(
        p in params(),
        n in 2usize..=3,
        w1 in -0.49..0.49f64,
        rest in prop::collection::vec(-1.0..1.0f64, 2),
        r in 0.1..80.0f64,
        t in -10.0..10.0f64,
    ) {
        let tail = DVector::from_column_slice(&rest[..n - 1]);
        prop_assume!(tail.norm() > 1e-3);
        let tail = tail.normalize() * (1.0 - w1 * w1).sqrt();
        let mut omega = DVector::zeros(n);
        omega[0] = w1;
        omega.rows_mut(1, n - 1).copy_from(&tail);
        let (wp, wm) = partition_of_unity(&omega);
        prop_assert!(wp > 0.0 && wm > 0.0);
        let xi = FrequencyPoint::new(&omega * r).unwrap();
        let d: Vec<Complex64> = p.root_eigenvalues(n, r).iter().map(|&w| Complex64::cis(t * w)).collect();
        let plus = conjugate(&rotation_field(Sign::Plus, &xi).unwrap(), &d);
        let minus = conjugate(&rotation_field(Sign::Minus, &xi).unwrap(), &d);
        prop_assert!((plus - minus).norm() <= 1e-10);
    }

    #[test]
    fn rotations_are_special_orthogonal(n in 2usize..=4, seed in prop::collection::vec(-1.0..1.0f64, 4)) {
        let omega = DVector::from_column_slice(&seed[..n]);
        prop_assume!(omega.norm() > 1e-3);
        let omega = omega.normalize();
        for sign in Sign::BOTH {
            if let Ok(r) = geodesic_rotation(sign, &omega) {
                let id = DMatrix::<f64>::identity(n, n);
                prop_assert!((r.transpose() * &r - id).norm() <= 1e-12);
                prop_assert!((r.determinant() - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn rotations_fix_the_complement_of_their_plane(
        n in 3usize..=5,
        a in prop::collection::vec(-1.0..1.0f64, 5),
        b in prop::collection::vec(-1.0..1.0f64, 5),
    ) {
        let omega = DVector::from_column_slice(&a[..n]);
        prop_assume!(omega.norm() > 1e-3);
        let omega = omega.normalize();
        let mut e1 = DVector::zeros(n);
        e1[0] = 1.0;
        // y orthogonal to e1 and omega
        let mut y = DVector::from_column_slice(&b[..n]);
        y[0] = 0.0;
        let w = {
            let mut w = omega.clone();
            w[0] = 0.0;
            w
        };
        if w.norm() > 1e-9 {
            let w = w.normalize();
            y -= &w * w.dot(&y);
        }
        for sign in Sign::BOTH {
            if let Ok(r) = geodesic_rotation(sign, &omega) {
                prop_assert!((r.transpose() * &y - &y).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn multiplier_is_unitary_with_unit_determinant(
        p in params(),
        xi in frequency(2..=3),
        t in -20.0..20.0f64,
        v in 0.0..5.0f64,
        th in prop::collection::vec(-1.0..1.0f64, 3),
    ) {
        let theta = DVector::from_column_slice(&th[..xi.dim()]);
        prop_assume!(theta.norm() > 1e-3);
        let m = half_wave_multiplier(&p, &xi, t, v, &theta.normalize());
        prop_assert!(m.unitarity_defect() <= 1e-12);
        prop_assert!((m.determinant_modulus() - 1.0).abs() <= 1e-12);
        prop_assert!((m.shift_phase.norm() - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn multiplier_agrees_with_dense_functional_calculus(p in params(), xi in frequency(2..=3), t in -10.0..10.0f64) {
        let mut e1 = DVector::zeros(xi.dim());
        e1[0] = 1.0;
        let m = half_wave_multiplier(&p, &xi, t, 0.0, &e1).matrix;
        prop_assert!((m - multiplier_via_eigendecomposition(&p, &xi, t)).norm() <= 1e-10);
    }

    #[test]
    fn square_root_squares_to_the_symbol(p in params(), xi in frequency(2..=3)) {
        let l = lame_symbol_matrix(&p, &xi);
        let s = Diagonalization::new(&xi).square_root(&p, xi.dim());
        prop_assert!((&s * &s - &l).norm() <= 1e-10 * l.norm());
    }

    #[test]
    fn partition_is_a_partition(omega in (2usize..=3).prop_flat_map(unit_vector)) {
        let (wp, wm) = partition_of_unity(&omega);
        prop_assert!((0.0..=1.0).contains(&wp) && (0.0..=1.0).contains(&wm));
        prop_assert!((wp + wm - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn blocks_reassemble_exactly(n in 2usize..=4, entries in prop::collection::vec(-3.0..3.0f64, 16)) {
        let m = DMatrix::from_column_slice(n, n, &entries[..n * n]);
        prop_assert_eq!(block_decomposition(&m).reassemble(), m);
    }
}
