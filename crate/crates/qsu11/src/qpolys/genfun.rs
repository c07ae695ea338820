use serde::{Deserialize, Serialize};

use super::families::{eval_poly_all, lattice_index, FamilyTag, PolyFamily};
use crate::error::{Error, Result};
use crate::qcore::{phi, q_pochhammer, q_pochhammer_inf, QBase, SeriesControl, C64};

/// Which closed form to compare against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratingForm {
    /// The standard closed form of each family.
    Primary,
    /// Little q-Laguerre only: `(aqt;q)_inf / (t;q)_inf * 2phi1(0, 0; q/t; q, qx)`.
    Alternate,
}

const MAX_SERIES_TERMS: usize = 2000;

/// Relative residual between the partial sums of the generating series and its
/// closed form, with the number of terms chosen adaptively.
pub fn generating_function_check(
    family: PolyFamily,
    form: GeneratingForm,
    t: C64,
    x: C64,
    base: QBase,
) -> Result<f64> {
    if t.norm() >= 1.0 {
        return Err(Error::Divergent(format!(
            "generating series needs |t| < 1, got {}",
            t.norm()
        )));
    }
    if form == GeneratingForm::Alternate && family.tag != FamilyTag::LittleQLaguerre {
        return Err(Error::UnsupportedKind(format!(
            "alternate form for {:?}",
            family.tag
        )));
    }
    let closed = closed_form(family, form, t, x, base)?;
    let series = series_sum(family, t, x, base)?;
    Ok((series - closed).norm() / closed.norm().max(1.0))
}

fn closed_form(
    family: PolyFamily,
    form: GeneratingForm,
    t: C64,
    x: C64,
    base: QBase,
) -> Result<C64> {
    let ctl = SeriesControl::default();
    let p = family.param;
    let real = |v: f64| C64::new(v, 0.0);
    match family.tag {
        FamilyTag::LaguerreClassical => Ok((1.0 - t).powf(-p - 1.0) * (x * t / (t - 1.0)).exp()),
        FamilyTag::ContQLaguerre => {
            let e = x + C64::i() * (1.0 - x * x).sqrt();
            let s = base.pow(p / 2.0 + 0.25);
            let num = q_pochhammer_inf(t * base.pow(p + 0.5), base, &ctl)?
                * q_pochhammer_inf(t * base.pow(p + 1.0), base, &ctl)?;
            let den =
                q_pochhammer_inf(s * e * t, base, &ctl)? * q_pochhammer_inf(s / e * t, base, &ctl)?;
            Ok(num / den)
        }
        FamilyTag::LittleQLaguerre => {
            let aq_t = q_pochhammer_inf(t * p * base.q(), base, &ctl)?;
            match form {
                GeneratingForm::Primary => {
                    if lattice_index(x, base).is_none() {
                        return Err(Error::Divergent(
                            "little q-Laguerre generating series converges only at x = q^N".into(),
                        ));
                    }
                    Ok(aq_t * phi(&[1.0 / x, real(0.0)], &[], x * t, base)?)
                }
                GeneratingForm::Alternate => {
                    let series = phi(&[real(0.0), real(0.0)], &[base.q() / t], x * base.q(), base)?;
                    Ok(aq_t / q_pochhammer_inf(t, base, &ctl)? * series)
                }
            }
        }
        FamilyTag::QLaguerre => {
            let series = phi(&[-x], &[real(0.0)], t * base.pow(p + 1.0), base)?;
            Ok(series / q_pochhammer_inf(t, base, &ctl)?)
        }
        FamilyTag::AscDual | FamilyTag::Phi31 => Err(Error::UnsupportedKind(format!(
            "no generating function for {:?}",
            family.tag
        ))),
    }
}

/// Sums `sum_n coeff_n t^n` until five consecutive terms are negligible,
/// evaluating the polynomials on a degree window that doubles as needed.
fn series_sum(family: PolyFamily, t: C64, x: C64, base: QBase) -> Result<C64> {
    // little q-Laguerre enters with the weight (aq;q)_n/(q;q)_n
    let weight = |n: usize| {
        if family.tag == FamilyTag::LittleQLaguerre {
            let aq = C64::new(family.param * base.q(), 0.0);
            q_pochhammer(aq, base, n) / q_pochhammer(C64::new(base.q(), 0.0), base, n)
        } else {
            C64::new(1.0, 0.0)
        }
    };
    let mut window = 64;
    loop {
        let values = eval_poly_all(family, window, x, base)?;
        let mut sum = C64::new(0.0, 0.0);
        let mut tn = C64::new(1.0, 0.0);
        let mut peak: f64 = 0.0;
        let mut quiet = 0;
        for (n, value) in values.iter().enumerate() {
            let term = weight(n) * value * tn;
            sum += term;
            peak = peak.max(term.norm());
            if term.norm() <= 1e-17 * peak.max(sum.norm()) {
                quiet += 1;
                if quiet >= 5 {
                    return Ok(sum);
                }
            } else {
                quiet = 0;
            }
            tn *= t;
            if tn.norm() == 0.0 {
                return Ok(sum);
            }
        }
        if window >= MAX_SERIES_TERMS {
            return Err(Error::NonConvergence(MAX_SERIES_TERMS));
        }
        window = (2 * window).min(MAX_SERIES_TERMS);
    }
}
