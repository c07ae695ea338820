use nalgebra::DMatrix;
use qsu11::operators::{
    build_hermitian_canonical, build_operator, BasisTag, JacobiOperator, OpKind,
};
use qsu11::qpolys::RepParams;
use qsu11::spectral::{
    deficiency_test, eigen_truncated, hermitian_eigenvalues, spectrum_report, Prediction, Verdict,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn params(q: f64, l: f64) -> RepParams {
    RepParams::new(q, l).unwrap()
}

fn tridiagonal(diag: Vec<f64>, offdiag: Vec<f64>) -> JacobiOperator {
    JacobiOperator {
        kind: OpKind::I1,
        params: params(0.5, 1.0),
        diag,
        offdiag,
        basis: BasisTag::Canonical,
    }
}

fn dense_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

fn norm_bound(op: &JacobiOperator) -> f64 {
    op.diag
        .iter()
        .chain(&op.offdiag)
        .map(|x| x.abs())
        .fold(0.0, f64::max)
        * 3.0
}

#[test]
fn random_sections_match_the_dense_solver() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let diag: Vec<f64> = (0..12).map(|_| rng.random_range(-2.0..2.0)).collect();
        let off: Vec<f64> = (0..11).map(|_| rng.random_range(-1.0..1.0)).collect();
        let op = tridiagonal(diag, off);
        let ours = eigen_truncated(&op, false).values;
        let oracle = dense_eigenvalues(op.to_dense());
        for (a, b) in ours.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-11, "{a} vs {b}");
        }
    }
}

#[test]
fn closed_forms_of_small_sections() {
    assert_eq!(
        eigen_truncated(&tridiagonal(vec![-0.3], vec![]), false).values,
        vec![-0.3]
    );
    for e in [0.4, -0.4, 1e-8] {
        let v = eigen_truncated(&tridiagonal(vec![1.0, 1.0], vec![e]), false).values;
        assert!((v[0] - (1.0 - e.abs())).abs() < 1e-15 && (v[1] - (1.0 + e.abs())).abs() < 1e-15);
    }
}

#[test]
fn eigenvectors_diagonalize_the_section() {
    let op = build_operator(OpKind::I1, &params(0.5, 1.0), 30).unwrap();
    let eig = eigen_truncated(&op, true);
    let v = eig.vectors.unwrap();
    let dense = op.to_dense();
    for (k, &lambda) in eig.values.iter().enumerate() {
        let col = v.column(k);
        assert!((&dense * col - col * lambda).amax() < 1e-12);
        assert!((col.norm() - 1.0).abs() < 1e-13);
    }
}

#[test]
fn sections_interlace() {
    for kind in [OpKind::I1, OpKind::I2Psi, OpKind::I4Psi] {
        let p = params(0.5, 1.0);
        for n in [5, 17, 40] {
            let small = eigen_truncated(&build_operator(kind, &p, n).unwrap(), false).values;
            let big_op = build_operator(kind, &p, n + 1).unwrap();
            let tol = 1e-12 * norm_bound(&big_op);
            let big = eigen_truncated(&big_op, false).values;
            for i in 0..n {
                assert!(
                    big[i] <= small[i] + tol && small[i] <= big[i + 1] + tol,
                    "{kind} n={n} i={i}"
                );
            }
        }
    }
}

#[test]
fn continuous_sections_stay_in_the_interval() {
    for q in [0.3f64, 0.5, 0.8] {
        let hi = 2.0 * q.sqrt() / (1.0 - q);
        for l in [0.6, 1.0, 2.0] {
            for n in [1, 2, 16, 100, 400] {
                let ev = eigen_truncated(
                    &build_operator(OpKind::I1, &params(q, l), n).unwrap(),
                    false,
                )
                .values;
                assert!(
                    ev[0] >= -1e-10 && ev[n - 1] <= hi + 1e-10,
                    "q={q} l={l} n={n}"
                );
            }
        }
    }
}

#[test]
fn rotated_family_has_the_same_spectrum() {
    let p = params(0.5, 1.0);
    let base = eigen_truncated(&build_operator(OpKind::I1, &p, 60).unwrap(), false).values;
    for phi in [0.0, 1.0, std::f64::consts::PI] {
        let rotated = hermitian_eigenvalues(
            &build_hermitian_canonical(&p.with_psi(phi).unwrap(), 60).unwrap(),
        );
        for (a, b) in rotated.iter().zip(&base) {
            assert!((a - b).abs() < 1e-10, "phi={phi}");
        }
    }
}

#[test]
fn discrete_ladder_converges_with_the_section() {
    let p = params(0.5, 1.0);
    let q = p.q();
    let errors: Vec<Vec<f64>> = [50, 100, 200]
        .iter()
        .map(|&n| {
            let mut ev =
                eigen_truncated(&build_operator(OpKind::I2Psi, &p, n).unwrap(), false).values;
            ev.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
            (0..=5)
                .map(|k| (ev[k] - q.powi(k as i32) / (1.0 - 1.0 / q)).abs())
                .collect()
        })
        .collect();
    for k in 0..=5 {
        assert!(
            errors[1][k] <= errors[0][k] && errors[2][k] <= errors[1][k],
            "k={k}: {errors:?}"
        );
    }
}

#[test]
fn spectrum_report_examples() {
    let p = params(0.5, 1.0);
    let hi = 2.0 * 0.5f64.sqrt() / 0.5;
    let r = spectrum_report(OpKind::I1, &p, 300).unwrap();
    assert!(r.max_violation < 1e-10);
    assert!(r.eigenvalues[299] > hi - 1e-3 && r.eigenvalues[0] < 1e-3);
    assert_eq!(r.prediction, Prediction::Interval { lo: 0.0, hi });
    assert!(r.eigenvalues.windows(2).all(|w| w[0] <= w[1]));

    let r = spectrum_report(OpKind::I2Psi, &p, 200).unwrap();
    let indices: Vec<usize> = r.matched_points.iter().map(|m| m.index).collect();
    assert_eq!(indices, [0, 1, 2, 3, 4, 5, 6, 7]);
    assert!(r.matched_points.iter().all(|m| m.abs_error < 1e-9));

    assert!(spectrum_report(OpKind::I1, &p, 15).is_err());
}

#[test]
fn i3_ladder_ratio_example() {
    let r = spectrum_report(OpKind::I3, &params(0.5, 1.0), 200).unwrap();
    let ratio = r.ratio_estimate.unwrap();
    assert!((ratio - 0.5).abs() < 1e-3, "ladder ratio {ratio}");
}

#[test]
fn deficiency_examples() {
    let p = params(0.5, 1.0);
    let i4 = deficiency_test(OpKind::I4Psi, &p, 200).unwrap();
    assert_eq!(i4.verdict, Verdict::Indices11);
    assert!(i4.logconcave_ok);
    assert!((i4.ratio_limit - 0.5).abs() < 1e-6);
    assert_eq!(
        deficiency_test(OpKind::I1, &p, 200).unwrap().verdict,
        Verdict::BoundedSelfadjoint
    );
    assert_eq!(
        deficiency_test(OpKind::I2Psi, &p, 200).unwrap().verdict,
        Verdict::BoundedSelfadjoint
    );
    let i3 = deficiency_test(OpKind::I3, &p, 200).unwrap();
    assert_eq!(i3.verdict, Verdict::Indices11);
    // the I3 coefficients grow like q^{-2k}
    assert!((i3.ratio_limit - 0.25).abs() < 1e-6);
}

#[test]
fn deficiency_verdicts_ignore_the_phase() {
    for kind in [OpKind::I2Psi, OpKind::I4Psi] {
        let verdicts: Vec<_> = [0.0, 1.0, std::f64::consts::PI]
            .iter()
            .map(|&psi| {
                let p = params(0.5, 1.0).with_psi(psi).unwrap();
                let v = deficiency_test(kind, &p, 120).unwrap();
                (v.verdict, v.logconcave_ok, v.ratio_limit.to_bits())
            })
            .collect();
        assert!(verdicts.windows(2).all(|w| w[0] == w[1]), "{kind}");
    }
}

#[test]
fn results_are_bit_stable() {
    let p = params(0.6, 1.3);
    let a = spectrum_report(OpKind::I3, &p, 80).unwrap();
    let b = spectrum_report(OpKind::I3, &p, 80).unwrap();
    assert_eq!(a, b);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let op = tridiagonal(
        (0..50).map(|_| rng.random()).collect(),
        (0..49).map(|_| rng.random()).collect(),
    );
    assert_eq!(
        eigen_truncated(&op, false).values,
        eigen_truncated(&op, false).values
    );
}
