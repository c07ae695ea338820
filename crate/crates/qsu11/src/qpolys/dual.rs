use serde::{Deserialize, Serialize};

use super::families::{eval_poly, FamilyTag, PolyFamily, Route};
use super::overlap::SpectralPoint;
use super::RepParams;
use crate::error::{Error, Result};
use crate::qcore::C64;

/// Operators with a dual (spectral-side) realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DualKind {
    I2,
    I3,
}

/// Highest degree scanned by [`dual_action_residual`].
const MAX_DUAL_DEGREE: usize = 15;

/// Residual of the three-term difference equation in the ladder variable for
/// the degree-`n` polynomial.
///
/// For I2 `ladder` is the exponent `y` and the polynomial is little q-Laguerre
/// at `q^y`; for I3 it is the argument `y` of the q-Laguerre polynomial.
/// The residual is scaled by the largest term of the identity.
pub fn difference_identity_residual(
    kind: DualKind,
    n: usize,
    ladder: f64,
    params: &RepParams,
) -> Result<f64> {
    let b = params.base;
    let l = params.l;
    let eval =
        |family: PolyFamily, x: f64| eval_poly(family, n, C64::new(x, 0.0), b, Route::Recurrence);
    let terms: [C64; 4] = match kind {
        DualKind::I2 => {
            let fam = PolyFamily::new(FamilyTag::LittleQLaguerre, params.little_a(), b)?;
            let y = ladder;
            let here = eval(fam, b.pow(y))?;
            [
                here * b.pow(-(n as f64) - l),
                -eval(fam, b.pow(y + 1.0))? * b.pow(l - y - 1.0),
                eval(fam, b.pow(y - 1.0))? * b.pow(-l) * (1.0 - b.pow(-y)),
                here * b.pow(-y) * (b.pow(l - 1.0) + b.pow(-l)),
            ]
        }
        DualKind::I3 => {
            let fam = PolyFamily::new(FamilyTag::QLaguerre, params.alpha(), b)?;
            let y = ladder;
            let shift = b.pow(1.0 - 2.0 * l);
            let here = eval(fam, y)?;
            [
                here * b.pow(n as f64) * y,
                eval(fam, b.q() * y)? * (1.0 + y),
                -here * (shift + 1.0),
                eval(fam, y / b.q())? * shift,
            ]
        }
    };
    let [lhs, r1, r2, r3] = terms;
    let scale = terms.iter().map(|t| t.norm()).fold(1.0, f64::max);
    Ok((lhs - (r1 + r2 + r3)).norm() / scale)
}

/// Maximum difference-identity residual over degrees `0..=15` at the dual-basis
/// index `k`, or at the ladder point of `pt` when given.
///
/// The dual index maps to `y = k` for I2 (requires `k >= 0`) and to
/// `y = c q^k` for I3.
pub fn dual_action_residual(
    kind: DualKind,
    k: i64,
    params: &RepParams,
    pt: Option<&SpectralPoint>,
) -> Result<f64> {
    let ladder = match (kind, pt) {
        (DualKind::I2, Some(p)) => {
            p.y.ok_or_else(|| Error::Domain("I2 point without ladder exponent".into()))?
        }
        (DualKind::I3, Some(p)) => p.nu,
        (DualKind::I2, None) => {
            if k < 0 {
                return Err(Error::Domain(format!(
                    "I2 dual index must be nonnegative, got {k}"
                )));
            }
            k as f64
        }
        (DualKind::I3, None) => params.scale() * params.base.pow(k as f64),
    };
    (0..=MAX_DUAL_DEGREE).try_fold(0.0f64, |acc, n| {
        Ok(acc.max(difference_identity_residual(kind, n, ladder, params)?))
    })
}
