use super::overlap::SpectralPoint;
use super::RepParams;
use crate::error::{Error, Result};
use crate::operators::OpKind;
use crate::qcore::{q_pochhammer, SeriesControl, TruncatedSeries, C64};

/// Largest expansion degree accepted by [`eigenfunction_coeffs`].
pub const MAX_EXPANSION_DEGREE: usize = 200;

/// Taylor coefficients `b_0..b_{n_max}` of the closed-form eigenfunction at `pt`.
///
/// Numerator products are multiplied in factor by factor; denominators enter
/// through their geometric series. Nothing is differentiated numerically.
pub fn eigenfunction_coeffs(
    pt: &SpectralPoint,
    n_max: usize,
    params: &RepParams,
) -> Result<Vec<C64>> {
    if n_max > MAX_EXPANSION_DEGREE {
        return Err(Error::Domain(format!(
            "expansion degree {n_max} exceeds {MAX_EXPANSION_DEGREE}"
        )));
    }
    let b = params.base;
    let l = params.l;
    let ctl = SeriesControl::default();
    let phase = C64::from_polar(1.0, params.psi);
    let real = |v: f64| C64::new(v, 0.0);
    let mut series = TruncatedSeries::one(n_max);
    match pt.kind {
        OpKind::I1 | OpKind::I1Phi => {
            let rot = if pt.kind == OpKind::I1Phi {
                phase
            } else {
                real(1.0)
            };
            let e = C64::new(0.0, 1.0) * pt.theta;
            let e_plus = e.exp();
            let e_minus = (-e).exp();
            series.mul_pochhammer_inf(rot * b.pow(l / 2.0), b.sqrt(), &ctl)?;
            let gamma = b.pow((1.0 - 2.0 * l) / 4.0);
            series.div_pochhammer_inf(rot * gamma * e_plus, b, &ctl)?;
            series.div_pochhammer_inf(rot * gamma * e_minus, b, &ctl)?;
        }
        OpKind::I2Psi => {
            let y =
                pt.y.ok_or_else(|| Error::Domain("I2 point without ladder exponent".into()))?;
            series.mul_pochhammer_inf(phase * b.pow((1.0 + 2.0 * l) / 4.0), b, &ctl)?;
            let z = phase * b.pow(y - (6.0 * l - 1.0) / 4.0);
            let upper = real(b.pow(-y));
            let mut coeffs = Vec::with_capacity(n_max + 1);
            let mut term = real(1.0);
            for k in 0..=n_max {
                coeffs.push(term);
                let qk = b.pow(k as f64);
                // 2phi0(q^{-y}, 0; -; q, z x): ratio of consecutive x-coefficients
                term *= (1.0 - upper * qk) / (1.0 - qk * b.q()) * z * (-1.0 / qk);
            }
            series = series.mul(&TruncatedSeries::from_coeffs(coeffs, n_max));
        }
        OpKind::I3 | OpKind::I3Psi => {
            let rot = if pt.kind == OpKind::I3Psi {
                phase
            } else {
                real(1.0)
            };
            series.div_pochhammer_inf(rot * b.pow((3.0 - 2.0 * l) / 4.0), b, &ctl)?;
            let z = rot * b.pow((6.0 * l + 3.0) / 4.0);
            let mut coeffs = Vec::with_capacity(n_max + 1);
            for k in 0..=n_max {
                let kf = k as f64;
                // 1phi1(-nu; 0; q, z x) coefficient of x^k
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                coeffs.push(
                    q_pochhammer(real(-pt.nu), b, k) / q_pochhammer(real(b.q()), b, k)
                        * sign
                        * b.pow(kf * (kf - 1.0) / 2.0)
                        * z.powi(k as i32),
                );
            }
            series = series.mul(&TruncatedSeries::from_coeffs(coeffs, n_max));
        }
        OpKind::I4Psi => {
            let e_plus = pt.theta.exp();
            let e_minus = (-pt.theta).exp();
            let num = phase * b.pow((2.0 * l + 3.0) / 4.0);
            series.mul_pochhammer_inf(num * e_plus, b, &ctl)?;
            series.mul_pochhammer_inf(num * e_minus, b, &ctl)?;
            let den = phase * b.pow((3.0 - 2.0 * l) / 4.0);
            series.div_pochhammer_inf(C64::i() * den, b, &ctl)?;
            series.div_pochhammer_inf(-C64::i() * den, b, &ctl)?;
        }
        OpKind::Classical => {
            return Err(Error::UnsupportedKind(
                "classical operator has no q-product form".into(),
            ))
        }
    }
    let coeffs = series.into_coeffs();
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::Overflow(
            "eigenfunction expansion coefficients".into(),
        ));
    }
    Ok(coeffs)
}
