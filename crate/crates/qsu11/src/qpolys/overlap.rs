use serde::Serialize;

use super::families::{eval_poly_all, FamilyTag, PolyFamily};
use super::RepParams;
use crate::error::{Error, Result};
use crate::extended::Real;
use crate::operators::OpKind;
use crate::qcore::{q_pochhammer_real, QPowers, C64};

/// An eigenvalue together with the equivalent spectral parameters of its kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralPoint {
    pub kind: OpKind,
    pub lambda: f64,
    /// Natural polynomial argument: `cos theta` (I1), `q^y` (I2), `2(1-q) lambda` (I3),
    /// `cosh theta` (I4).
    pub nu: f64,
    /// `acos(nu)` for I1, `acosh(nu)` for I4, otherwise zero; complex off the real interval.
    #[serde(skip)]
    pub theta: C64,
    /// Ladder exponent: `y` with `q^y = nu` for I2, `log_q(nu / c)` for I3 when positive.
    pub y: Option<f64>,
}

impl SpectralPoint {
    pub fn from_lambda(kind: OpKind, lambda: f64, params: &RepParams) -> Result<Self> {
        let q = params.q();
        let (nu0, nu1) = argument_map(kind, params);
        let nu = nu0 + nu1 * lambda;
        let mut point = Self {
            kind,
            lambda,
            nu,
            theta: C64::new(0.0, 0.0),
            y: None,
        };
        match kind {
            OpKind::I1 | OpKind::I1Phi => point.theta = C64::new(nu, 0.0).acos(),
            OpKind::I2Psi => {
                if nu.is_nan() || nu <= 0.0 {
                    return Err(Error::Domain(format!(
                        "I2 needs lambda (1 - 1/q) > 0, got lambda = {lambda}"
                    )));
                }
                point.y = Some(nu.ln() / q.ln());
            }
            OpKind::I3 | OpKind::I3Psi => {
                point.y = (nu > 0.0).then(|| (nu / params.scale()).ln() / q.ln());
            }
            OpKind::I4Psi => point.theta = C64::new(nu, 0.0).acosh(),
            OpKind::Classical => {}
        }
        Ok(point)
    }

    /// Builds the point from the natural argument `nu` instead of the eigenvalue.
    pub fn from_nu(kind: OpKind, nu: f64, params: &RepParams) -> Result<Self> {
        let (nu0, nu1) = argument_map(kind, params);
        Self::from_lambda(kind, (nu - nu0) / nu1, params)
    }

    /// I2 point at ladder exponent `y`, i.e. `lambda = q^y / (1 - 1/q)`.
    pub fn from_ladder(y: f64, params: &RepParams) -> Result<Self> {
        Self::from_nu(OpKind::I2Psi, params.base.pow(y), params)
    }

    /// I1 or I4 point from an angle (`nu = cos theta` or `cosh theta`).
    pub fn from_theta(kind: OpKind, theta: f64, params: &RepParams) -> Result<Self> {
        match kind {
            OpKind::I1 | OpKind::I1Phi => Self::from_nu(kind, theta.cos(), params),
            OpKind::I4Psi => Self::from_nu(kind, theta.cosh(), params),
            other => Err(Error::UnsupportedKind(format!(
                "{other} has no angle parametrization"
            ))),
        }
    }
}

/// Normalization constant `c_n` of the monomial basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BasisNormalizer {
    pub n: usize,
    pub c_n: f64,
}

impl BasisNormalizer {
    pub fn new(n: usize, params: &RepParams) -> Self {
        let b = params.base;
        let ratio = q_pochhammer_real(b.pow(2.0 * params.l), b, n) / q_pochhammer_real(b.q(), b, n);
        let c_n = b.pow((1.0 - 2.0 * params.l) * n as f64 / 4.0) * ratio.sqrt();
        Self { n, c_n }
    }
}

/// Polynomial family behind the overlaps of `kind`.
pub(crate) fn overlap_family(kind: OpKind, params: &RepParams) -> Result<PolyFamily> {
    let b = params.base;
    match kind {
        OpKind::I1 | OpKind::I1Phi => PolyFamily::new(FamilyTag::ContQLaguerre, params.alpha(), b),
        OpKind::I2Psi => PolyFamily::new(FamilyTag::LittleQLaguerre, params.little_a(), b),
        OpKind::I3 | OpKind::I3Psi => PolyFamily::new(FamilyTag::QLaguerre, params.alpha(), b),
        OpKind::I4Psi => PolyFamily::new(FamilyTag::Phi31, params.alpha(), b),
        OpKind::Classical => PolyFamily::new(FamilyTag::LaguerreClassical, params.alpha(), b),
    }
}

/// Factor turning the degree-`n` family member into the orthonormal overlap, phase excluded.
pub(crate) fn overlap_scale_gen<T: Real>(kind: OpKind, n: usize, pw: &QPowers<T>, l: T) -> T {
    let one = T::one();
    let n = n as i32;
    // sqrt((q;q)_n / (q^{2l};q)_n)
    let ratio = || {
        (0..n)
            .map(|j| (one - pw.pow(4 * j + 4, 0)) / (one - pw.pow(4 * j, 4)))
            .fold(one, |acc, f| acc * f)
            .sqrt()
    };
    match kind {
        OpKind::I1 | OpKind::I1Phi => pw.pow(n, -2 * n) * ratio(),
        OpKind::I2Psi => pw.pow(0, -2 * n) / ratio(),
        OpKind::I3 | OpKind::I3Psi => pw.pow(2 * n, 0) * ratio(),
        OpKind::I4Psi => ratio(),
        OpKind::Classical => (1..=n)
            .map(|j| {
                let j = T::from_f64(j as f64);
                j / (l + l + j - one)
            })
            .fold(one, |acc, f| acc * f)
            .sqrt(),
    }
}

pub(crate) fn overlap_scale(kind: OpKind, n: usize, params: &RepParams) -> f64 {
    overlap_scale_gen(kind, n, &QPowers::new(params.base, params.l), params.l)
}

/// `(nu0, nu1)` with `nu = nu0 + nu1 * lambda`.
pub(crate) fn argument_map_gen<T: Real>(kind: OpKind, pw: &QPowers<T>) -> (T, T) {
    let one = T::one();
    let zero = T::zero();
    match kind {
        OpKind::I1 | OpKind::I1Phi => (one, pw.pow(2, 0) - pw.pow(-2, 0)),
        OpKind::I2Psi => (zero, one - pw.pow(-4, 0)),
        OpKind::I3 | OpKind::I3Psi => (zero, T::from_f64(2.0) * (one - pw.q())),
        OpKind::I4Psi => (zero, T::from_f64(-0.5)),
        OpKind::Classical => (zero, T::from_f64(2.0)),
    }
}

pub(crate) fn argument_map(kind: OpKind, params: &RepParams) -> (f64, f64) {
    argument_map_gen(kind, &QPowers::new(params.base, params.l))
}

/// Normalized overlap polynomials `p_0..p_{n_max}` at the point.
pub fn overlap_sequence(pt: &SpectralPoint, n_max: usize, params: &RepParams) -> Result<Vec<C64>> {
    let family = overlap_family(pt.kind, params)?;
    let phased = matches!(
        pt.kind,
        OpKind::I1Phi | OpKind::I2Psi | OpKind::I3Psi | OpKind::I4Psi
    );
    let phase = if phased {
        C64::from_polar(1.0, params.psi)
    } else {
        C64::new(1.0, 0.0)
    };
    let arg = C64::new(pt.nu, 0.0);
    let raw = eval_poly_all(family, n_max, arg, params.base)?;
    Ok(raw
        .into_iter()
        .enumerate()
        .map(|(n, v)| v * overlap_scale(pt.kind, n, params) * phase.powi(n as i32))
        .collect())
}

/// Normalized overlap coefficient of degree `n`.
pub fn overlap_coeff(pt: &SpectralPoint, n: usize, params: &RepParams) -> Result<C64> {
    Ok(overlap_sequence(pt, n, params)?[n])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::QBase;
    use crate::qpolys::{eval_poly, Route};

    #[test]
    fn normalizer_base_cases() {
        let p = RepParams::new(0.5, 1.3).unwrap();
        assert_eq!(BasisNormalizer::new(0, &p).c_n, 1.0);
        let c1 = BasisNormalizer::new(1, &p).c_n;
        let expected = 0.5f64.powf((1.0 - 2.6) / 4.0) * ((1.0 - 0.5f64.powf(2.6)) / 0.5).sqrt();
        assert!((c1 - expected).abs() < 1e-15);
    }

    #[test]
    fn degree_zero_overlap_is_one() {
        let p = RepParams::new(0.5, 1.0).unwrap().with_psi(0.7).unwrap();
        let points = [
            SpectralPoint::from_lambda(OpKind::I1, 0.8, &p).unwrap(),
            SpectralPoint::from_lambda(OpKind::I2Psi, -0.5, &p).unwrap(),
            SpectralPoint::from_lambda(OpKind::I3, 0.3, &p).unwrap(),
            SpectralPoint::from_lambda(OpKind::I4Psi, -3.0, &p).unwrap(),
        ];
        for pt in &points {
            assert_eq!(overlap_coeff(pt, 0, &p).unwrap(), C64::new(1.0, 0.0));
        }
    }

    #[test]
    fn first_degree_i1_overlap_matches_composition() {
        let p = RepParams::new(0.5, 1.0).unwrap();
        let pt = SpectralPoint::from_lambda(OpKind::I1, 0.8, &p).unwrap();
        let b = QBase::new(0.5).unwrap();
        let fam = PolyFamily::new(FamilyTag::ContQLaguerre, 1.0, b).unwrap();
        let p1 = eval_poly(fam, 1, C64::new(pt.nu, 0.0), b, Route::Explicit).unwrap();
        let expected = 0.5f64.powf(-0.75) * ((1.0 - 0.5) / (1.0 - 0.25f64)).sqrt() * p1;
        assert!((overlap_coeff(&pt, 1, &p).unwrap() - expected).norm() < 1e-14);
    }

    #[test]
    fn i1_overlaps_satisfy_matrix_recurrence() {
        // lambda p_n = beta_n p_n - alpha_n p_{n+1} - alpha_{n-1} p_{n-1}
        let p = RepParams::new(0.5, 1.0).unwrap();
        let op = crate::operators::build_operator(OpKind::I1, &p, 8).unwrap();
        let lambda = 0.8;
        let pt = SpectralPoint::from_lambda(OpKind::I1, lambda, &p).unwrap();
        let seq = overlap_sequence(&pt, 7, &p).unwrap();
        let n = 5;
        let lhs = seq[n] * lambda;
        let rhs = seq[n] * op.diag[n] + seq[n + 1] * op.offdiag[n] + seq[n - 1] * op.offdiag[n - 1];
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn i2_requires_negative_lambda() {
        let p = RepParams::new(0.5, 1.0).unwrap();
        assert!(SpectralPoint::from_lambda(OpKind::I2Psi, 0.3, &p).is_err());
        let pt = SpectralPoint::from_ladder(2.0, &p).unwrap();
        assert!((pt.y.unwrap() - 2.0).abs() < 1e-14);
        assert!((pt.lambda + 0.25).abs() < 1e-15);
    }
}
