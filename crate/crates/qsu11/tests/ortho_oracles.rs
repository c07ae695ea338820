use std::f64::consts::PI;

use qsu11::ortho::{
    bilateral_constant_exact, bilateral_constant_nominal, gram_matrix, quadrature_integrate,
    unitarity_check, weight_continuous, MeasureSpec, Pairing, Relation,
};
use qsu11::qpolys::RepParams;

fn params(q: f64, l: f64) -> RepParams {
    RepParams::new(q, l).unwrap().with_c(1.0).unwrap()
}

fn top(q: f64) -> f64 {
    2.0 * q.sqrt() / (1.0 - q)
}

#[test]
fn weight_is_positive_inside_and_vanishes_at_the_ends() {
    for (q, l) in [(0.5, 1.0), (0.3, 0.6), (0.8, 2.0)] {
        let p = params(q, l);
        let hi = top(q);
        assert!(weight_continuous(0.5 * hi, &p).unwrap() > 0.0);
        let near_lo: Vec<f64> = (1..=5).map(|j| hi * 10f64.powi(-j)).collect();
        let near_hi: Vec<f64> = (1..=5).map(|j| hi * (1.0 - 10f64.powi(-j))).collect();
        for approach in [near_lo, near_hi] {
            let w: Vec<f64> = approach
                .iter()
                .map(|&x| weight_continuous(x, &p).unwrap())
                .collect();
            assert!(w.iter().all(|&x| x > 0.0));
            assert!(w[2] > w[3] && w[3] > w[4], "q={q} l={l}: {w:?}");
            // square-root edge: each decade closer divides the weight by sqrt(10)
            assert!((w[4] / w[3] * 10f64.sqrt() - 1.0).abs() < 0.05, "{w:?}");
        }
        assert!(weight_continuous(hi, &p).is_err());
        assert!(weight_continuous(-0.1, &p).is_err());
    }
}

#[test]
fn weight_has_unit_mass() {
    for (q, l) in [(0.5, 1.0), (0.4, 0.75), (0.7, 1.5)] {
        let p = params(q, l);
        let half = top(q) / 2.0;
        // lambda = half (1 - cos theta)
        let mass = quadrature_integrate(
            |t| weight_continuous(half * (1.0 - t.cos()), &p).unwrap() * half * t.sin(),
            (0.0, PI),
            64,
        )
        .unwrap();
        assert!(
            (mass.value - 1.0).abs() < 1e-8,
            "q={q} l={l}: {}",
            mass.value
        );
    }
}

#[test]
fn quadrature_examples() {
    assert!(
        (quadrature_integrate(|x| x * x, (0.0, 1.0), 16)
            .unwrap()
            .value
            - 1.0 / 3.0)
            .abs()
            < 1e-14
    );
    assert!((quadrature_integrate(|_| 1.0, (0.0, PI), 16).unwrap().value - PI).abs() < 1e-14);
    let g = gram_matrix(
        &MeasureSpec::new(Relation::ContinuousQLaguerre, params(0.5, 1.0)),
        1,
    )
    .unwrap();
    assert!(g.gram[0][1].abs() < 1e-9);
}

#[test]
fn continuous_gram_is_converged_under_node_doubling() {
    for (q, l) in [(0.5, 1.0), (0.4, 0.75), (0.6, 1.0)] {
        let g = gram_matrix(
            &MeasureSpec::new(Relation::ContinuousQLaguerre, params(q, l)),
            8,
        )
        .unwrap();
        assert!(g.quadrature_change.unwrap() < 1e-10);
        assert!(g.max_offdiag < 1e-8 && g.max_diag_dev < 1e-8);
        assert!((g.fitted_constant - 1.0).abs() < 1e-8);
    }
}

#[test]
fn four_relations_hold_on_the_grid() {
    let holding = [
        Relation::ContinuousQLaguerre,
        Relation::LittleQLaguerre,
        Relation::BilateralQLaguerre,
        Relation::AlSalamCarlitzDual,
    ];
    for q in [0.4, 0.6] {
        for l in [0.75, 1.0] {
            for relation in holding {
                let g = gram_matrix(&MeasureSpec::new(relation, params(q, l)), 8).unwrap();
                assert!(
                    g.max_offdiag < 1e-8,
                    "{relation} q={q} l={l}: {}",
                    g.max_offdiag
                );
                assert!(
                    g.max_diag_dev < 1e-8,
                    "{relation} q={q} l={l}: {}",
                    g.max_diag_dev
                );
                for i in 0..9 {
                    for j in 0..9 {
                        assert!(
                            (g.gram[i][j] - g.gram[j][i]).abs()
                                <= 1e-13 * g.gram[i][i].abs().max(1.0)
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn little_q_laguerre_example() {
    let g = gram_matrix(
        &MeasureSpec::new(Relation::LittleQLaguerre, params(0.5, 1.0)),
        8,
    )
    .unwrap();
    assert!(g.max_offdiag < 1e-10);
    for (gii, pred) in (0..9).map(|i| g.gram[i][i]).zip(&g.predicted_diag) {
        assert!((gii - pred).abs() < 1e-10 * pred);
    }
    assert!((g.fitted_constant - 1.0).abs() < 1e-10);
}

#[test]
fn degenerate_single_entry() {
    let g = gram_matrix(
        &MeasureSpec::new(Relation::LittleQLaguerre, params(0.5, 1.0)),
        0,
    )
    .unwrap();
    assert_eq!(g.gram.len(), 1);
    assert!((g.gram[0][0] - 1.0).abs() < 1e-15);
    assert_eq!(g.max_offdiag, 0.0);
    assert!(gram_matrix(
        &MeasureSpec::new(Relation::LittleQLaguerre, params(0.5, 1.0)),
        21
    )
    .is_err());
}

#[test]
fn bilateral_tails_are_negligible() {
    for (q, l) in [(0.4, 0.75), (0.5, 1.0), (0.6, 1.0)] {
        let g = gram_matrix(
            &MeasureSpec::new(Relation::BilateralQLaguerre, params(q, l)),
            8,
        )
        .unwrap();
        assert!(g.tail_ratio.unwrap() < 1e-14);
    }
}

#[test]
fn bilateral_constants_differ_by_the_reported_factor() {
    // with l = 1 the nominal constant is (1 - q)^2 times the normalizing one
    for q in [0.4, 0.5, 0.6] {
        let p = params(q, 1.0);
        let ratio = bilateral_constant_nominal(&p).unwrap() / bilateral_constant_exact(&p).unwrap();
        assert!((ratio - (1.0 - q).powi(2)).abs() < 1e-12);
        let g = gram_matrix(&MeasureSpec::new(Relation::BilateralQLaguerre, p), 4).unwrap();
        assert!((g.fitted_constant - ratio).abs() < 1e-12);
    }
}

#[test]
fn unitarity_examples() {
    let p = params(0.5, 1.0);
    let r = unitarity_check(Pairing::LittleVsDual, &p, 6, 6).unwrap();
    assert!(r.row_residual < 1e-9 && r.col_residual < 1e-9);
    let r = unitarity_check(Pairing::LittleVsDual, &p, 0, 6).unwrap();
    assert!(r.row_residual < 1e-10);
    // rows are the bilateral relation and hold; the columns converge to a
    // matrix that is not the identity (exact value from 80-digit summation)
    let r = unitarity_check(Pairing::QLaguerreVsFk, &p, 6, 2).unwrap();
    assert!(r.row_residual < 1e-9);
    assert!((r.col_residual - 0.909_066_185_233_547_1).abs() < 1e-10);
}

#[test]
fn function_system_gram_example() {
    let mut spec = MeasureSpec::new(Relation::FkSystem, params(0.5, 1.0).with_c(1.0).unwrap());
    spec.k_range = Some((-3, 3));
    let g = gram_matrix(&spec, 8).unwrap();
    assert_eq!(g.labels, (-3..=3).collect::<Vec<i64>>());
    assert!(g.max_offdiag < 1e-9, "off-diagonal ratio {}", g.max_offdiag);
}

#[test]
fn function_system_columns_are_orthonormal() {
    let p = params(0.5, 1.0).with_c(1.0).unwrap();
    let r = unitarity_check(Pairing::QLaguerreVsFk, &p, 6, 2).unwrap();
    assert!(r.col_residual < 1e-8, "column residual {}", r.col_residual);
}
