//! Floating-point primitives of q-analysis: brackets, Pochhammer symbols,
//! the Jackson exponential and a basic hypergeometric series evaluator.
//!
//! Everything runs in complex arithmetic; callers that know a result is real
//! use [`real_part`] to assert it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extended::{DoubleDouble, Real};

pub type C64 = Complex64;

/// Tolerance, in units of `log q`, for recognising an upper parameter as `q^{-n}`.
pub const TERMINATION_TOL: f64 = 1e-12;

/// The deformation parameter, restricted to the open interval (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct QBase(f64);

impl QBase {
    pub fn new(q: f64) -> Result<Self> {
        if q.is_finite() && q > 0.0 && q < 1.0 {
            Ok(Self(q))
        } else {
            Err(Error::InvalidBase(q))
        }
    }

    #[inline]
    pub fn q(self) -> f64 {
        self.0
    }

    /// `q^x` for real `x`.
    #[inline]
    pub fn pow(self, x: f64) -> f64 {
        self.0.powf(x)
    }

    /// The base `q^{1/2}`, used by products over half-integer steps.
    pub fn sqrt(self) -> Self {
        Self(self.0.sqrt())
    }
}

impl TryFrom<f64> for QBase {
    type Error = Error;
    fn try_from(q: f64) -> Result<Self> {
        Self::new(q)
    }
}

impl From<QBase> for f64 {
    fn from(b: QBase) -> f64 {
        b.0
    }
}

/// Monomials `q^{i/4} q^{j l/2}` generated by `g = q^{1/4}` and `h = q^{l/2}`.
///
/// Quantities assembled from one table are algebraically consistent with each
/// other, which is what matters when an identity is checked through a badly
/// conditioned evaluation. The scalar type may be `f64` or a double-double.
#[derive(Debug, Clone, Copy)]
pub struct QPowers<T> {
    g: T,
    h: T,
}

impl<T: Real> QPowers<T> {
    pub fn from_generators(g: T, h: T) -> Self {
        Self { g, h }
    }

    /// `q^{quarters/4 + half_ls * l/2}`.
    #[inline]
    pub fn pow(&self, quarters: i32, half_ls: i32) -> T {
        self.g.powi(quarters) * self.h.powi(half_ls)
    }

    #[inline]
    pub fn q(&self) -> T {
        self.g.powi(4)
    }

    /// `[a]_q` with `a = quarters/4 + half_ls * l/2`; both counts must be even
    /// so that `q^{(1-a)/2}` stays in the lattice.
    pub fn bracket(&self, quarters: i32, half_ls: i32) -> T {
        debug_assert!(quarters % 2 == 0 && half_ls % 2 == 0);
        let one = T::one();
        self.pow((4 - quarters) / 2, -half_ls / 2) * (one - self.pow(quarters, half_ls))
            / (one - self.q())
    }
}

impl QPowers<f64> {
    pub fn new(base: QBase, l: f64) -> Self {
        Self::from_generators(base.pow(0.25), base.pow(l / 2.0))
    }
}

impl QPowers<DoubleDouble> {
    /// Double-double table seeded with the rounded generators; every power is
    /// then formed in extended arithmetic.
    pub fn new_extended(base: QBase, l: f64) -> Self {
        Self::from_generators(base.pow(0.25).into(), base.pow(l / 2.0).into())
    }
}

/// Stopping rules shared by every infinite product and series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesControl {
    pub max_terms: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl SeriesControl {
    pub fn new(max_terms: usize, abs_tol: f64, rel_tol: f64) -> Result<Self> {
        if max_terms == 0 {
            return Err(Error::InvalidControl("max_terms must be at least 1"));
        }
        if !(abs_tol >= 0.0 && rel_tol >= 0.0) {
            return Err(Error::InvalidControl("tolerances must be nonnegative"));
        }
        if abs_tol == 0.0 && rel_tol == 0.0 {
            return Err(Error::InvalidControl(
                "one of abs_tol, rel_tol must be positive",
            ));
        }
        Ok(Self {
            max_terms,
            abs_tol,
            rel_tol,
        })
    }

    /// Threshold below which a product factor `a q^r` counts as negligible.
    pub fn product_cutoff(&self) -> f64 {
        if self.abs_tol > 0.0 {
            self.abs_tol
        } else {
            self.rel_tol * 1e-2
        }
    }
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self {
            max_terms: 10_000,
            abs_tol: 1e-16,
            rel_tol: 1e-14,
        }
    }
}

/// Extracts the real part after checking that the imaginary part is
/// negligible against `max(|z|, scale)`.
pub fn real_part(z: C64, scale: f64) -> Result<f64> {
    let bound = 1e-10 * z.norm().max(scale);
    if z.im.abs() <= bound {
        Ok(z.re)
    } else {
        Err(Error::Domain(format!("expected a real value, got {z}")))
    }
}

/// The q-number `[a]_q = (q^{a/2} - q^{-a/2}) / (q^{1/2} - q^{-1/2})`.
pub fn q_bracket(a: f64, base: QBase) -> f64 {
    q_bracket_unchecked(a, base.q())
}

/// Same formula for any `q > 0, q != 1`; handy for the `q -> 1/q` symmetry.
pub fn q_bracket_unchecked(a: f64, q: f64) -> f64 {
    (q.powf(a / 2.0) - q.powf(-a / 2.0)) / (q.sqrt() - 1.0 / q.sqrt())
}

/// Finite product `(a; q)_n`.
pub fn q_pochhammer(a: C64, base: QBase, n: usize) -> C64 {
    let q = base.q();
    let mut prod = C64::new(1.0, 0.0);
    let mut term = a;
    for _ in 0..n {
        prod *= 1.0 - term;
        term *= q;
    }
    prod
}

/// Real-argument shortcut for `(a; q)_n`.
pub fn q_pochhammer_real(a: f64, base: QBase, n: usize) -> f64 {
    let q = base.q();
    let mut prod = 1.0;
    let mut term = a;
    for _ in 0..n {
        prod *= 1.0 - term;
        term *= q;
    }
    prod
}

/// Infinite product `(a; q)_inf`, truncated once `|a q^r|` is negligible.
pub fn q_pochhammer_inf(a: C64, base: QBase, ctl: &SeriesControl) -> Result<C64> {
    let q = base.q();
    let cutoff = ctl.product_cutoff();
    let mut prod = C64::new(1.0, 0.0);
    let mut term = a;
    for _ in 0..ctl.max_terms {
        if term.norm() < cutoff {
            return Ok(prod);
        }
        prod *= 1.0 - term;
        term *= q;
    }
    Err(Error::NonConvergence(ctl.max_terms))
}

/// `(a; q)_nu := (a; q)_inf / (a q^nu; q)_inf` for real `nu`; a nonnegative
/// integer `nu` falls back to the finite product.
pub fn q_pochhammer_gen(a: C64, base: QBase, nu: f64, ctl: &SeriesControl) -> Result<C64> {
    let rounded = nu.round();
    if rounded >= 0.0 && (nu - rounded).abs() < TERMINATION_TOL {
        return Ok(q_pochhammer(a, base, rounded as usize));
    }
    let num = q_pochhammer_inf(a, base, ctl)?;
    let den = q_pochhammer_inf(a * base.pow(nu), base, ctl)?;
    if den.norm() == 0.0 {
        return Err(Error::Domain(format!(
            "(a q^nu; q)_inf vanishes for a={a}, nu={nu}"
        )));
    }
    Ok(num / den)
}

/// Jackson's q-exponential `E_q(z) = (-z; q)_inf`.
pub fn q_exp_e(z: C64, base: QBase, ctl: &SeriesControl) -> Result<C64> {
    q_pochhammer_inf(-z, base, ctl)
}

/// Parameters of an `r phi s` series.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperSpec {
    pub upper: Vec<C64>,
    pub lower: Vec<C64>,
    pub argument: C64,
    pub base: QBase,
}

impl HyperSpec {
    pub fn new(upper: Vec<C64>, lower: Vec<C64>, argument: C64, base: QBase) -> Self {
        Self {
            upper,
            lower,
            argument,
            base,
        }
    }

    /// Smallest `n` such that some upper parameter equals `q^{-n}`.
    pub fn termination_index(&self) -> Option<usize> {
        let log_q = self.base.q().ln();
        self.upper
            .iter()
            .filter_map(|&a| {
                if a.re <= 0.0 || a.im.abs() > TERMINATION_TOL * a.norm() {
                    return None;
                }
                let exponent = a.re.ln() / log_q;
                let n = (-exponent).round();
                (n >= 0.0 && (exponent + n).abs() < TERMINATION_TOL).then_some(n as usize)
            })
            .min()
    }
}

/// Value of a basic hypergeometric sum with bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperSum {
    pub value: C64,
    pub terms: usize,
    /// True when an upper parameter `q^{-n}` cut the sum off exactly.
    pub terminated: bool,
}

/// Evaluates `r phi s (upper; lower; q, z)` with the factor
/// `[(-1)^k q^{k(k-1)/2}]^{1+s-r}`, building each term from the previous one.
pub fn basic_hyper(spec: &HyperSpec, ctl: &SeriesControl) -> Result<HyperSum> {
    let q = spec.base.q();
    let z = spec.argument;
    let r = spec.upper.len() as i64;
    let s = spec.lower.len() as i64;
    let excess = 1 + s - r;
    let termination = spec.termination_index();
    let one = C64::new(1.0, 0.0);

    if z == C64::new(0.0, 0.0) || termination == Some(0) {
        return Ok(HyperSum {
            value: one,
            terms: 1,
            terminated: termination.is_some(),
        });
    }
    if termination.is_none() {
        if excess < 0 {
            return Err(Error::Divergent(format!(
                "non-terminating {r}phi{s} has zero radius of convergence"
            )));
        }
        if excess == 0 && z.norm() >= 1.0 {
            return Err(Error::Divergent(format!(
                "{r}phi{s} needs |z| < 1, got |z| = {}",
                z.norm()
            )));
        }
    }

    let last = termination.unwrap_or(usize::MAX);
    let mut sum = one;
    let mut term = one;
    let mut qk = 1.0;
    let mut small_run = 0;
    for k in 0..ctl.max_terms {
        if k >= last {
            return Ok(HyperSum {
                value: sum,
                terms: k + 1,
                terminated: true,
            });
        }
        let mut ratio = z / (1.0 - qk * q);
        for &a in &spec.upper {
            ratio *= 1.0 - a * qk;
        }
        for &b in &spec.lower {
            let factor = 1.0 - b * qk;
            if factor.norm() < 1e-14 {
                return Err(Error::LowerPole(k));
            }
            ratio /= factor;
        }
        ratio *= (-qk).powi(excess as i32);
        term *= ratio;
        sum += term;
        qk *= q;
        if !sum.is_finite() {
            return Err(Error::Overflow(format!(
                "{r}phi{s} partial sum at term {}",
                k + 1
            )));
        }
        if termination.is_none() {
            let tol = ctl.abs_tol.max(ctl.rel_tol * sum.norm());
            if term.norm() <= tol && ratio.norm() < 1.0 {
                small_run += 1;
                if small_run >= 2 {
                    return Ok(HyperSum {
                        value: sum,
                        terms: k + 2,
                        terminated: false,
                    });
                }
            } else {
                small_run = 0;
            }
        }
    }
    Err(Error::NonConvergence(ctl.max_terms))
}

/// Shorthand for [`basic_hyper`] with the default control, returning only the value.
pub fn phi(upper: &[C64], lower: &[C64], argument: C64, base: QBase) -> Result<C64> {
    let spec = HyperSpec::new(upper.to_vec(), lower.to_vec(), argument, base);
    basic_hyper(&spec, &SeriesControl::default()).map(|s| s.value)
}

/// Truncated power series in one variable, coefficients of degrees `0..=degree`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries {
    coeffs: Vec<C64>,
}

impl TruncatedSeries {
    pub fn one(degree: usize) -> Self {
        let mut coeffs = vec![C64::new(0.0, 0.0); degree + 1];
        coeffs[0] = C64::new(1.0, 0.0);
        Self { coeffs }
    }

    pub fn from_coeffs(mut coeffs: Vec<C64>, degree: usize) -> Self {
        coeffs.resize(degree + 1, C64::new(0.0, 0.0));
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    /// Multiplies in place by `1 - c x`.
    pub fn mul_linear(&mut self, c: C64) {
        for k in (1..self.coeffs.len()).rev() {
            let prev = self.coeffs[k - 1];
            self.coeffs[k] -= c * prev;
        }
    }

    /// Multiplies in place by the geometric series of `1 / (1 - d x)`.
    pub fn div_linear(&mut self, d: C64) {
        for k in 1..self.coeffs.len() {
            let prev = self.coeffs[k - 1];
            self.coeffs[k] += d * prev;
        }
    }

    /// Multiplies by `(c x; q)_inf`, one exact linear factor at a time.
    pub fn mul_pochhammer_inf(&mut self, c: C64, base: QBase, ctl: &SeriesControl) -> Result<()> {
        self.apply_product(c, base, ctl, Self::mul_linear)
    }

    /// Divides by `(d x; q)_inf` through its geometric-series factors.
    pub fn div_pochhammer_inf(&mut self, d: C64, base: QBase, ctl: &SeriesControl) -> Result<()> {
        self.apply_product(d, base, ctl, Self::div_linear)
    }

    fn apply_product(
        &mut self,
        c: C64,
        base: QBase,
        ctl: &SeriesControl,
        step: fn(&mut Self, C64),
    ) -> Result<()> {
        let cutoff = ctl.product_cutoff();
        let mut factor = c;
        for _ in 0..ctl.max_terms {
            if factor.norm() < cutoff {
                return Ok(());
            }
            step(self, factor);
            factor *= base.q();
        }
        Err(Error::NonConvergence(ctl.max_terms))
    }

    /// Truncated product of two series of the same degree.
    pub fn mul(&self, other: &Self) -> Self {
        let n = self.coeffs.len().min(other.coeffs.len());
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (i, &a) in self.coeffs.iter().enumerate().take(n) {
            for (j, &b) in other.coeffs.iter().enumerate().take(n - i) {
                out[i + j] += a * b;
            }
        }
        Self { coeffs: out }
    }

    /// Substitutes `x -> s x`.
    pub fn scale_argument(&mut self, s: C64) {
        let mut p = C64::new(1.0, 0.0);
        for c in &mut self.coeffs {
            *c *= p;
            p *= s;
        }
    }
}
