use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extended::Real;
use crate::qcore::{phi, q_pochhammer, QBase, QPowers, C64, TERMINATION_TOL};

/// The six polynomial families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyTag {
    /// Classical Laguerre `L_n^(alpha)(x)`.
    LaguerreClassical,
    /// Continuous q-Laguerre `P_n^(alpha)(y|q)`, argument `y = cos theta`.
    ContQLaguerre,
    /// Little q-Laguerre (Wall) `p_n(x; a|q)`.
    LittleQLaguerre,
    /// q-Laguerre `L_n^(alpha)(x; q)`.
    QLaguerre,
    /// Dual partner of little q-Laguerre (Al-Salam-Carlitz type), parameter `a`.
    AscDual,
    /// Terminating 3phi1 polynomials, argument `z = cosh theta`, parameter `alpha`.
    Phi31,
}

impl FamilyTag {
    pub const ALL: [FamilyTag; 6] = [
        FamilyTag::LaguerreClassical,
        FamilyTag::ContQLaguerre,
        FamilyTag::LittleQLaguerre,
        FamilyTag::QLaguerre,
        FamilyTag::AscDual,
        FamilyTag::Phi31,
    ];

    fn uses_alpha(self) -> bool {
        !matches!(self, FamilyTag::LittleQLaguerre | FamilyTag::AscDual)
    }
}

/// A family together with its parameter (`alpha` or `a`, depending on the tag).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolyFamily {
    pub tag: FamilyTag,
    pub param: f64,
}

impl PolyFamily {
    pub fn new(tag: FamilyTag, param: f64, base: QBase) -> Result<Self> {
        let ok = if tag.uses_alpha() {
            param.is_finite() && param > -1.0
        } else {
            param.is_finite() && param > 0.0 && param < 1.0 / base.q()
        };
        if ok {
            Ok(Self { tag, param })
        } else {
            Err(Error::Domain(format!(
                "parameter {param} outside the domain of {tag:?}"
            )))
        }
    }
}

/// Evaluation route.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Recurrence,
    Explicit,
}

/// Degree-`n` member of `family` at its natural argument.
pub fn eval_poly(family: PolyFamily, n: usize, arg: C64, base: QBase, route: Route) -> Result<C64> {
    match route {
        Route::Recurrence => Ok(*eval_poly_all(family, n, arg, base)?
            .last()
            .expect("n+1 values")),
        Route::Explicit => explicit(family, n, arg, base),
    }
}

/// Coefficients `(a, b, c)` of the step `p_{k+1} = (a + b x) p_k + c p_{k-1}`.
///
/// `pw` carries `h = q^{w/2}` for the weight `w` matching the family
/// parameter (`alpha = 2w - 1` or `a = q^{2w-1}`); `alpha` itself is used only
/// by the classical family.
pub(crate) fn recurrence_step<T: Real>(
    tag: FamilyTag,
    k: usize,
    pw: &QPowers<T>,
    alpha: T,
) -> (T, T, T) {
    let one = T::one();
    let q = pw.q();
    let k4 = 4 * k as i32;
    let qk = pw.pow(k4, 0);
    let qk1 = pw.pow(k4 + 4, 0);
    // q^{alpha + k}, equivalently a q^k for the a-parametrized families
    let qak = pw.pow(k4 - 4, 4);
    match tag {
        FamilyTag::LaguerreClassical => {
            let kf = T::from_f64(k as f64);
            let d = kf + one;
            ((kf + kf + alpha + one) / d, -one / d, -(kf + alpha) / d)
        }
        FamilyTag::ContQLaguerre => {
            let s = pw.pow(-1, 2);
            let d = s / (one - qk1);
            (
                -s * qk * (one + pw.pow(2, 0)) * d,
                T::from_f64(2.0) * d,
                -s * (one - qak) * d,
            )
        }
        FamilyTag::LittleQLaguerre => {
            let up = qk * (one - qak * q);
            let down = qak * (one - qk);
            ((up + down) / up, -one / up, -down / up)
        }
        FamilyTag::QLaguerre => {
            let d = one - qk1;
            (
                (d + q * (one - qak)) / d,
                -pw.pow(2 * k4, 4) / d,
                -q * (one - qak) / d,
            )
        }
        FamilyTag::AscDual => {
            let a = pw.pow(-4, 4);
            ((one + a) / a, -qk / a, (qk - one) / a)
        }
        FamilyTag::Phi31 => {
            let d = one - qk1;
            (
                T::zero(),
                -T::from_f64(2.0) * pw.pow(2, 2) * qk / d,
                -q * (one - qak) / d,
            )
        }
    }
}

/// Generator table matching the family parameter.
pub(crate) fn family_powers(family: PolyFamily, base: QBase) -> QPowers<f64> {
    let weight = if family.tag.uses_alpha() {
        (family.param + 1.0) / 2.0
    } else {
        (family.param.ln() / base.q().ln() + 1.0) / 2.0
    };
    QPowers::new(base, weight)
}

/// Exponent `N` when `x = q^N` for an integer `N >= 0`.
pub(crate) fn lattice_index(x: C64, base: QBase) -> Option<f64> {
    if x.re <= 0.0 || x.im.abs() > TERMINATION_TOL * x.norm() {
        return None;
    }
    let y = x.re.ln() / base.q().ln();
    let index = y.round();
    (index >= 0.0 && (y - index).abs() < TERMINATION_TOL * index.max(1.0)).then_some(index)
}

/// Values of degrees `0..=n_max` from the three-term recurrence.
///
/// On the little q-Laguerre lattice `x = q^N` the values are the minimal
/// solution, which forward recursion loses; they are recovered backwards.
pub fn eval_poly_all(family: PolyFamily, n_max: usize, arg: C64, base: QBase) -> Result<Vec<C64>> {
    if family.tag == FamilyTag::LittleQLaguerre && n_max > 0 {
        if let Some(index) = lattice_index(arg, base) {
            return eval_poly_all_minimal(family, n_max, C64::new(base.pow(index), 0.0), base);
        }
    }
    let pw = family_powers(family, base);
    let mut vals = Vec::with_capacity(n_max + 1);
    vals.push(C64::new(1.0, 0.0));
    for k in 0..n_max {
        let (a, b, c) = recurrence_step(family.tag, k, &pw, family.param);
        let prev = if k > 0 {
            vals[k - 1]
        } else {
            C64::new(0.0, 0.0)
        };
        let next = (a + b * arg) * vals[k] + c * prev;
        if !next.is_finite() {
            return Err(Error::Overflow(format!(
                "{:?} recurrence at degree {}",
                family.tag,
                k + 1
            )));
        }
        vals.push(next);
    }
    Ok(vals)
}

/// Values of degrees `0..=n_max` of the minimal solution of the recurrence,
/// by backward recursion from a start index that is pushed out until the
/// normalized values settle.
fn eval_poly_all_minimal(
    family: PolyFamily,
    n_max: usize,
    arg: C64,
    base: QBase,
) -> Result<Vec<C64>> {
    let pw = family_powers(family, base);
    let steps: Vec<_> = (0..n_max + 400)
        .map(|k| recurrence_step(family.tag, k, &pw, family.param))
        .collect();
    let backward = |start: usize| -> Result<Vec<C64>> {
        let mut vals = vec![C64::new(0.0, 0.0); start + 2];
        vals[start] = C64::new(1.0, 0.0);
        for k in (1..=start).rev() {
            let (a, b, c) = steps[k];
            if !(c.is_normal() && a.is_finite() && b.is_finite()) {
                return Err(Error::Overflow(format!(
                    "{:?} backward recurrence at degree {k}",
                    family.tag
                )));
            }
            vals[k - 1] = (vals[k + 1] - (a + b * arg) * vals[k]) / c;
            if vals[k - 1].norm() > 1e150 {
                vals.iter_mut().for_each(|v| *v *= 1e-150);
            }
        }
        let head = vals[0];
        vals.truncate(n_max + 1);
        Ok(vals.iter().map(|v| v / head).collect())
    };
    let mut extra = 20;
    let mut current = backward(n_max + extra)?;
    while n_max + 2 * extra < steps.len() {
        extra *= 2;
        let next = backward(n_max + extra)?;
        let settled = current
            .iter()
            .zip(&next)
            .all(|(u, v)| (u - v).norm() <= 1e-12 * v.norm() + f64::MIN_POSITIVE);
        current = next;
        if settled {
            return Ok(current);
        }
    }
    Err(Error::NonConvergence(steps.len()))
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// `e^{i theta}` with `cos theta = y`; either branch gives the same polynomial value.
fn unit_from_cos(y: C64) -> C64 {
    y + C64::i() * (1.0 - y * y).sqrt()
}

/// `e^{theta}` with `cosh theta = z`.
fn exp_from_cosh(z: C64) -> C64 {
    z + (z * z - 1.0).sqrt()
}

fn explicit(family: PolyFamily, n: usize, x: C64, base: QBase) -> Result<C64> {
    let q = base.q();
    let p = family.param;
    let nf = n as f64;
    let q_neg_n = c(base.pow(-nf));
    let q_poch_n = q_pochhammer(c(q), base, n);
    match family.tag {
        FamilyTag::LaguerreClassical => {
            let mut term = c(1.0);
            let mut sum = c(1.0);
            for k in 0..n {
                let kf = k as f64;
                term *= (kf - nf) / ((p + 1.0 + kf) * (kf + 1.0)) * x;
                sum += term;
            }
            let prefactor: f64 = (1..=n).map(|j| (p + j as f64) / j as f64).product();
            Ok(sum * prefactor)
        }
        FamilyTag::ContQLaguerre => {
            let e = unit_from_cos(x);
            let prefactor = q_pochhammer(base.pow((2.0 * p + 3.0) / 4.0) / e, base, n) / q_poch_n
                * base.pow((2.0 * p + 1.0) * nf / 4.0)
                * e.powi(n as i32);
            let series = phi(
                &[q_neg_n, base.pow((2.0 * p + 1.0) / 4.0) * e],
                &[base.pow(-nf - (2.0 * p - 1.0) / 4.0) * e],
                base.pow(-(2.0 * p - 1.0) / 4.0) / e,
                base,
            )?;
            Ok(prefactor * series)
        }
        FamilyTag::LittleQLaguerre => {
            if x.norm() == 0.0 {
                return Ok(c(1.0));
            }
            // terminating 2phi0(q^{-n}, 1/x; -; q, x/a) / (q^{-n}/a; q)_n; the sum
            // carries a log offset since the terms and the denominator overflow
            // together long before the value does
            let x = lattice_index(x, base).map_or(x, |index| c(base.pow(index)));
            let z = x / p;
            let (mut term, mut sum, mut offset) = (c(1.0), c(1.0), 0.0);
            for k in 0..n {
                let qk = base.pow(k as f64);
                term *= (1.0 - base.pow(k as f64 - nf)) * (1.0 - qk / x) / (1.0 - qk * q) * z / -qk;
                sum += term;
                let size = term.norm().max(sum.norm());
                if size > 1e150 {
                    term /= size;
                    sum /= size;
                    offset += size.ln();
                }
            }
            let (log_den, sign) = (0..n).fold((0.0, 1.0), |(acc, sign), j| {
                let factor = 1.0 - base.pow(j as f64 - nf) / p;
                (acc + factor.abs().ln(), sign * factor.signum())
            });
            Ok(sum * sign * (offset - log_den).exp())
        }
        FamilyTag::QLaguerre => {
            let qa1 = base.pow(p + 1.0);
            let series = phi(&[q_neg_n], &[c(qa1)], -base.pow(nf + p + 1.0) * x, base)?;
            Ok(q_pochhammer(c(qa1), base, n) / q_poch_n * series)
        }
        FamilyTag::AscDual => phi(&[x, q_neg_n], &[], c(base.pow(nf) / p), base),
        FamilyTag::Phi31 => {
            let l = (p + 1.0) / 2.0;
            let e = exp_from_cosh(x);
            let ql = base.pow(l);
            let minus_i = -C64::i();
            let series = phi(
                &[q_neg_n, minus_i * ql * e, minus_i * ql / e],
                &[c(base.pow(2.0 * l))],
                c(-base.pow(nf)),
                base,
            )?;
            let prefactor = minus_i.powi(n as i32)
                * base.pow(nf / 2.0)
                * q_pochhammer(c(base.pow(2.0 * l)), base, n)
                / q_poch_n;
            Ok(prefactor * series)
        }
    }
}
