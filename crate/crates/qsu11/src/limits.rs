//! Convergence of the q-deformed objects to their undeformed counterparts as
//! `q -> 1`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::{build_operator, OpKind};
use crate::qcore::{QBase, C64};
use crate::qpolys::{eval_poly, FamilyTag, PolyFamily, RepParams, Route};

/// Which limit to tabulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitCheck {
    /// Entrywise distance between the I1 section and the classical `J0 - J1` section.
    Matrix,
    /// `(1 - q^mu)/(q^{-1/2} - q^{1/2})` against `mu`.
    EigenvalueMap,
    /// Continuous q-Laguerre at `q^lambda` against classical Laguerre at `2 lambda`.
    Polynomial,
}

impl LimitCheck {
    pub const ALL: [LimitCheck; 3] = [
        LimitCheck::Matrix,
        LimitCheck::EigenvalueMap,
        LimitCheck::Polynomial,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LimitCheck::Matrix => "matrix",
            LimitCheck::EigenvalueMap => "eigenvalue-map",
            LimitCheck::Polynomial => "polynomial",
        }
    }
}

impl fmt::Display for LimitCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LimitCheck {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LimitCheck::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown limit check {s:?}")))
    }
}

/// Evaluation point of a limit table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitPoint {
    /// Representation weight for the matrix check.
    pub l: f64,
    /// Section size for the matrix check.
    pub dim: usize,
    /// Exponent for the eigenvalue map.
    pub mu: f64,
    /// Degree, parameter and point for the polynomial check.
    pub degree: usize,
    pub alpha: f64,
    pub lambda: f64,
}

impl Default for LimitPoint {
    fn default() -> Self {
        Self {
            l: 1.0,
            dim: 10,
            mu: 1.0,
            degree: 3,
            alpha: 1.0,
            lambda: 0.7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitRow {
    pub q: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitTable {
    pub check: LimitCheck,
    pub point: LimitPoint,
    pub rows: Vec<LimitRow>,
    pub strictly_decreasing: bool,
}

/// `q_j = 1 - 2^{-j}` for `j = 1..=count`.
pub fn dyadic_q_sequence(count: u32) -> Vec<f64> {
    (1..=count).map(|j| 1.0 - 0.5f64.powi(j as i32)).collect()
}

/// Eigenvalue of I1 attached to `nu = q^mu`.
pub fn eigenvalue_map(q: f64, mu: f64) -> f64 {
    (1.0 - q.powf(mu)) / (q.powf(-0.5) - q.sqrt())
}

/// Largest entrywise difference between the I1 and classical sections.
pub fn matrix_limit_error(q: f64, l: f64, dim: usize) -> Result<f64> {
    let params = RepParams::new(q, l)?;
    let deformed = build_operator(OpKind::I1, &params, dim)?;
    let classical = build_operator(OpKind::Classical, &params, dim)?;
    Ok(deformed
        .diag
        .iter()
        .zip(&classical.diag)
        .chain(deformed.offdiag.iter().zip(&classical.offdiag))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// `|P_n^{(alpha)}(q^lambda | q) - L_n^{(alpha)}(2 lambda)|`.
pub fn polynomial_limit_error(q: f64, degree: usize, alpha: f64, lambda: f64) -> Result<f64> {
    let base = QBase::new(q)?;
    let deformed = PolyFamily::new(FamilyTag::ContQLaguerre, alpha, base)?;
    let classical = PolyFamily::new(FamilyTag::LaguerreClassical, alpha, base)?;
    let p = eval_poly(
        deformed,
        degree,
        C64::new(q.powf(lambda), 0.0),
        base,
        Route::Explicit,
    )?;
    let target = eval_poly(
        classical,
        degree,
        C64::new(2.0 * lambda, 0.0),
        base,
        Route::Explicit,
    )?;
    Ok((p - target).norm())
}

/// Error of `check` at each `q` in `qs`.
pub fn limit_table(check: LimitCheck, qs: &[f64], point: LimitPoint) -> Result<LimitTable> {
    let rows = qs
        .iter()
        .map(|&q| {
            let error = match check {
                LimitCheck::Matrix => matrix_limit_error(q, point.l, point.dim)?,
                LimitCheck::EigenvalueMap => {
                    QBase::new(q)?;
                    (eigenvalue_map(q, point.mu) - point.mu).abs()
                }
                LimitCheck::Polynomial => {
                    polynomial_limit_error(q, point.degree, point.alpha, point.lambda)?
                }
            };
            Ok(LimitRow { q, error })
        })
        .collect::<Result<Vec<_>>>()?;
    let strictly_decreasing = rows.windows(2).all(|w| w[1].error < w[0].error);
    Ok(LimitTable {
        check,
        point,
        rows,
        strictly_decreasing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for c in LimitCheck::ALL {
            assert_eq!(c.name().parse::<LimitCheck>().unwrap(), c);
        }
        assert!("spectrum".parse::<LimitCheck>().is_err());
    }

    #[test]
    fn eigenvalue_map_at_mu_one() {
        // (1 - q)/(q^{-1/2}(1 - q)) = q^{1/2}
        assert!((eigenvalue_map(0.25, 1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_invalid_q() {
        assert!(limit_table(LimitCheck::EigenvalueMap, &[1.0], LimitPoint::default()).is_err());
    }
}
