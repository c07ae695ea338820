//! Gram matrices of the orthogonality relations, the quadrature they rely on,
//! and the unitarity of the basis-change matrices.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use gauss_quad::legendre::GaussLegendre;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::OpKind;
use crate::qcore::{q_pochhammer_inf, q_pochhammer_real, QBase, SeriesControl, C64};
use crate::qpolys::{
    eval_poly, eval_poly_all, overlap_sequence, FamilyTag, PolyFamily, RepParams, Route,
    SpectralPoint,
};

/// The orthogonality relations that can be certified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// Normalized overlaps of I1 against the continuous weight on the spectrum.
    ContinuousQLaguerre,
    /// Little q-Laguerre polynomials on `{q^k : k >= 0}`.
    LittleQLaguerre,
    /// q-Laguerre polynomials on the bilateral lattice `{c q^k : k in Z}`.
    BilateralQLaguerre,
    /// Al-Salam-Carlitz type polynomials dual to little q-Laguerre, on `{q^-m}`.
    AlSalamCarlitzDual,
    /// Functions `F_k(n) = L_n(c q^k; q)` of the degree `n`, indexed by `k in Z`.
    FkSystem,
}

impl Relation {
    pub const ALL: [Relation; 5] = [
        Relation::ContinuousQLaguerre,
        Relation::LittleQLaguerre,
        Relation::BilateralQLaguerre,
        Relation::AlSalamCarlitzDual,
        Relation::FkSystem,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Relation::ContinuousQLaguerre => "continuous_q_laguerre",
            Relation::LittleQLaguerre => "little_q_laguerre",
            Relation::BilateralQLaguerre => "bilateral_q_laguerre",
            Relation::AlSalamCarlitzDual => "al_salam_carlitz_dual",
            Relation::FkSystem => "fk_system",
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Relation {
    type Err = Error;

    /// Accepts the descriptive names and the short tags used on the command line.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "continuous_q_laguerre" | "cont_qL_313" => Ok(Relation::ContinuousQLaguerre),
            "little_q_laguerre" | "little_qL_510" => Ok(Relation::LittleQLaguerre),
            "bilateral_q_laguerre" | "qLaguerre_712" => Ok(Relation::BilateralQLaguerre),
            "al_salam_carlitz_dual" | "asc_dual_514" => Ok(Relation::AlSalamCarlitzDual),
            "fk_system" | "fk_719" => Ok(Relation::FkSystem),
            other => Err(Error::Domain(format!("unknown relation {other}"))),
        }
    }
}

/// A relation together with its evaluation controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasureSpec {
    pub relation: Relation,
    pub params: RepParams,
    /// Starting node count of the continuous quadrature.
    pub quadrature_nodes: usize,
    /// Index window that is always summed (bilateral relation) or the `k`
    /// indices of the function system; derived from `n_max` when absent.
    pub k_range: Option<(i64, i64)>,
    /// Summation stops once terms fall below `tail_tol` times the largest one.
    pub tail_tol: f64,
}

impl MeasureSpec {
    pub fn new(relation: Relation, params: RepParams) -> Self {
        Self {
            relation,
            params,
            quadrature_nodes: 64,
            k_range: None,
            tail_tol: 1e-17,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GramReport {
    pub relation: Relation,
    pub n_max: usize,
    /// Row `i` holds the inner products of function `i` with all others.
    pub gram: Vec<Vec<f64>>,
    /// Function labels: degrees, or lattice indices `k` for the function system.
    pub labels: Vec<i64>,
    /// Right-hand side of the relation on the diagonal.
    pub predicted_diag: Vec<f64>,
    /// `max |G_ij| / sqrt(G_ii G_jj)` over `i != j`.
    pub max_offdiag: f64,
    /// `max |G_ii / (C predicted_i) - 1|` with `C` the fitted constant.
    pub max_diag_dev: f64,
    /// Mean of `G_ii / predicted_i`.
    pub fitted_constant: f64,
    /// Summands or quadrature nodes of the accepted evaluation.
    pub truncation_terms_used: usize,
    /// Largest change of an entry under the final node doubling.
    pub quadrature_change: Option<f64>,
    /// Last included term relative to the largest one, worst tail.
    pub tail_ratio: Option<f64>,
}

/// Largest degree accepted by [`gram_matrix`].
pub const MAX_GRAM_DEGREE: usize = 20;
/// Summation stops after this many consecutive negligible terms.
const QUIET_RUN: usize = 5;
const MAX_SUM_TERMS: usize = 1000;

/// Gauss-Legendre points per panel of the composite rule.
const PANEL_DEGREE: usize = 16;
const MAX_DOUBLINGS: usize = 12;
const QUADRATURE_TOL: f64 = 1e-13;

/// Result of a node-doubling quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quadrature {
    pub value: f64,
    /// Difference from the estimate with half as many nodes.
    pub change: f64,
    pub nodes_used: usize,
}

fn composite_rule(
    a: f64,
    b: f64,
    panels: usize,
    rule: &GaussLegendre,
    f: &mut dyn FnMut(f64) -> Vec<f64>,
) -> Vec<f64> {
    let width = (b - a) / panels as f64;
    let mut acc: Vec<f64> = Vec::new();
    for p in 0..panels {
        let lo = a + width * p as f64;
        for &(x, w) in rule.as_node_weight_pairs() {
            let values = f(lo + 0.5 * width * (x + 1.0));
            if acc.is_empty() {
                acc = vec![0.0; values.len()];
            }
            for (s, v) in acc.iter_mut().zip(values) {
                *s += 0.5 * width * w * v;
            }
        }
    }
    acc
}

/// Vector-valued composite Gauss-Legendre quadrature; doubles the panels
/// until no component moves by more than `1e-13 * max(1, |value|)`.
fn integrate_many(
    mut f: impl FnMut(f64) -> Vec<f64>,
    (a, b): (f64, f64),
    nodes: usize,
) -> Result<(Vec<f64>, f64, usize)> {
    let rule = GaussLegendre::new(PANEL_DEGREE).expect("panel degree above one");
    let mut panels = nodes.div_ceil(PANEL_DEGREE).max(1);
    let mut previous = composite_rule(a, b, panels, &rule, &mut f);
    let mut change = f64::INFINITY;
    for _ in 0..MAX_DOUBLINGS {
        panels *= 2;
        let current = composite_rule(a, b, panels, &rule, &mut f);
        change = current
            .iter()
            .zip(&previous)
            .map(|(c, p)| (c - p).abs())
            .fold(0.0, f64::max);
        let scale = current.iter().map(|c| c.abs()).fold(1.0, f64::max);
        if change <= QUADRATURE_TOL * scale {
            return Ok((current, change, panels * PANEL_DEGREE));
        }
        previous = current;
    }
    Err(Error::Quadrature {
        doublings: MAX_DOUBLINGS,
        change,
    })
}

/// Integral of `f` over `[a, b]`, starting from about `nodes` points.
pub fn quadrature_integrate(
    f: impl Fn(f64) -> f64,
    interval: (f64, f64),
    nodes: usize,
) -> Result<Quadrature> {
    let (values, change, nodes_used) = integrate_many(|x| vec![f(x)], interval, nodes)?;
    Ok(Quadrature {
        value: values[0],
        change,
        nodes_used,
    })
}

/// `w(cos theta)`: `|(e^{2i theta}; q)_inf / (q^{l-1/4} e^{i theta}; q^{1/2})_inf|^2`.
fn angular_weight(theta: f64, params: &RepParams) -> Result<f64> {
    let b = params.base;
    let ctl = SeriesControl::default();
    let e = C64::from_polar(1.0, theta);
    let num = q_pochhammer_inf(e * e, b, &ctl)?;
    let den = q_pochhammer_inf(e * b.pow(params.l - 0.25), b.sqrt(), &ctl)?;
    Ok((num / den).norm_sqr())
}

fn inf_product(a: f64, base: QBase) -> Result<f64> {
    Ok(q_pochhammer_inf(C64::new(a, 0.0), base, &SeriesControl::default())?.re)
}

/// Density of the orthogonality measure of the I1 overlaps at `lambda`.
pub fn weight_continuous(lambda: f64, params: &RepParams) -> Result<f64> {
    let b = params.base;
    let q = b.q();
    let top = 2.0 * q.sqrt() / (1.0 - q);
    if !(lambda > 0.0 && lambda < top) {
        return Err(Error::Domain(format!(
            "lambda = {lambda} outside the open interval (0, {top})"
        )));
    }
    let t = (1.0 - q) * lambda / q.sqrt();
    let y = 1.0 - t;
    let norm = inf_product(q, b)? * inf_product(b.pow(2.0 * params.l), b)? / (2.0 * PI);
    Ok(
        norm * ((1.0 - q) / (lambda * q.sqrt())).sqrt() * angular_weight(y.acos(), params)?
            / (2.0 - t).sqrt(),
    )
}

/// Nominal normalization `b_c = c^{2l} q^{l(2l-1)} (q;q)_{2l-1}` of the bilateral
/// relation, with `(q;q)_s = (q;q)_inf / (q^{s+1};q)_inf`.
pub fn bilateral_constant_nominal(params: &RepParams) -> Result<f64> {
    let b = params.base;
    let l = params.l;
    let c = params.scale();
    Ok(
        c.powf(2.0 * l) * b.pow(l * (2.0 * l - 1.0)) * inf_product(b.q(), b)?
            / inf_product(b.pow(2.0 * l), b)?,
    )
}

/// Constant that normalizes the bilateral relation exactly:
/// `(q^{2l}, -c, -q/c; q)_inf / (q, -c q^{2l}, -q^{1-2l}/c; q)_inf`.
pub fn bilateral_constant_exact(params: &RepParams) -> Result<f64> {
    let b = params.base;
    let c = params.scale();
    let two_l = 2.0 * params.l;
    let num = inf_product(b.pow(two_l), b)? * inf_product(-c, b)? * inf_product(-b.q() / c, b)?;
    let den = inf_product(b.q(), b)?
        * inf_product(-c * b.pow(two_l), b)?
        * inf_product(-b.pow(1.0 - two_l) / c, b)?;
    Ok(num / den)
}

/// Accumulates `sum_j w_j f_j f_j^T` and decides when a tail is exhausted.
struct GramSum {
    size: usize,
    sums: Vec<f64>,
    peak: f64,
    terms: usize,
    worst_tail: f64,
}

impl GramSum {
    fn new(size: usize) -> Self {
        Self {
            size,
            sums: vec![0.0; size * size],
            peak: 0.0,
            terms: 0,
            worst_tail: 0.0,
        }
    }

    /// Adds one summand and returns its magnitude proxy `|w| max f^2`.
    fn add(&mut self, w: f64, f: &[f64]) -> f64 {
        for i in 0..self.size {
            for j in 0..self.size {
                self.sums[i * self.size + j] += w * f[i] * f[j];
            }
        }
        self.terms += 1;
        let proxy = w.abs() * f.iter().map(|x| x * x).fold(0.0, f64::max);
        self.peak = self.peak.max(proxy);
        proxy
    }

    /// Sums `term(j)` for `j = start, start+step, ...`, always covering `min_terms`
    /// indices and then stopping after a run of negligible terms.
    fn walk(
        &mut self,
        start: i64,
        step: i64,
        min_terms: usize,
        tail_tol: f64,
        mut term: impl FnMut(i64) -> Result<(f64, Vec<f64>)>,
    ) -> Result<()> {
        let mut quiet = 0;
        let mut j = start;
        for count in 0..MAX_SUM_TERMS {
            let (w, f) = term(j)?;
            if !(w.is_finite() && f.iter().all(|x| x.is_finite())) {
                return Err(Error::Overflow(format!("summand at index {j}")));
            }
            let proxy = self.add(w, &f);
            if count + 1 >= min_terms && proxy <= tail_tol * self.peak {
                quiet += 1;
                if quiet >= QUIET_RUN {
                    self.worst_tail = self.worst_tail.max(proxy / self.peak);
                    return Ok(());
                }
            } else {
                quiet = 0;
            }
            j += step;
        }
        Err(Error::NonConvergence(MAX_SUM_TERMS))
    }

    fn matrix(&self) -> Vec<Vec<f64>> {
        self.sums.chunks(self.size).map(<[f64]>::to_vec).collect()
    }
}

/// `p_m(q^k; a|q)` through the terminating dual sum.
fn little_on_lattice(m: usize, k: usize, params: &RepParams) -> Result<f64> {
    let b = params.base;
    let a = params.little_a();
    let dual = dual_on_lattice(k, m, params)?;
    Ok(dual / q_pochhammer_real(b.pow(-(m as f64)) / a, b, m))
}

/// `v_n(q^-m) = 2phi0(q^-m, q^-n; -; q, q^n / a)`.
fn dual_on_lattice(n: usize, m: usize, params: &RepParams) -> Result<f64> {
    let b = params.base;
    let family = PolyFamily::new(FamilyTag::AscDual, params.little_a(), b)?;
    Ok(eval_poly(
        family,
        n,
        C64::new(b.pow(-(m as f64)), 0.0),
        b,
        Route::Explicit,
    )?
    .re)
}

fn q_laguerre(params: &RepParams) -> Result<PolyFamily> {
    PolyFamily::new(FamilyTag::QLaguerre, params.alpha(), params.base)
}

/// Lattice indices of the function system: `k_range`, or `n_max + 1` indices
/// centred on zero.
fn fk_indices(spec: &MeasureSpec, n_max: usize) -> Vec<i64> {
    let (lo, hi) = spec.k_range.unwrap_or_else(|| {
        let lo = -((n_max / 2) as i64);
        (lo, lo + n_max as i64)
    });
    (lo..=hi).collect()
}

/// Gram matrix of the relation's functions up to `n_max` against its measure.
pub fn gram_matrix(spec: &MeasureSpec, n_max: usize) -> Result<GramReport> {
    if n_max > MAX_GRAM_DEGREE {
        return Err(Error::Domain(format!(
            "n_max = {n_max} exceeds {MAX_GRAM_DEGREE}"
        )));
    }
    let params = &spec.params;
    let b = params.base;
    let q = b.q();
    let l = params.l;
    let size = n_max + 1;
    let degrees: Vec<usize> = (0..size).collect();
    let mut labels: Vec<i64> = (0..size as i64).collect();
    let mut quadrature_change = None;
    let mut tail_ratio = None;

    let (gram, predicted_diag, terms): (Vec<Vec<f64>>, Vec<f64>, usize) = match spec.relation {
        Relation::ContinuousQLaguerre => {
            let norm = inf_product(q, b)? * inf_product(b.pow(2.0 * l), b)? / (2.0 * PI);
            let mut failure = None;
            let integrand = |theta: f64| -> Vec<f64> {
                let values = SpectralPoint::from_nu(OpKind::I1, theta.cos(), params)
                    .and_then(|pt| overlap_sequence(&pt, n_max, params))
                    .and_then(|p| Ok((angular_weight(theta, params)?, p)));
                match values {
                    Ok((w, p)) => {
                        let mut out = Vec::with_capacity(size * size);
                        for i in 0..size {
                            for j in 0..size {
                                out.push(norm * w * p[i].re * p[j].re);
                            }
                        }
                        out
                    }
                    Err(e) => {
                        failure.get_or_insert(e);
                        vec![f64::NAN; size * size]
                    }
                }
            };
            let (flat, change, nodes) =
                integrate_many(integrand, (0.0, PI), spec.quadrature_nodes)?;
            if let Some(e) = failure {
                return Err(e);
            }
            quadrature_change = Some(change);
            (
                flat.chunks(size).map(<[f64]>::to_vec).collect(),
                vec![1.0; size],
                nodes,
            )
        }
        Relation::LittleQLaguerre => {
            let mut acc = GramSum::new(size);
            let lead = inf_product(b.pow(2.0 * l), b)?;
            acc.walk(0, 1, 1, spec.tail_tol, |k| {
                let k = k as usize;
                let w = lead * b.pow(2.0 * l * k as f64) / q_pochhammer_real(q, b, k);
                let f = degrees
                    .iter()
                    .map(|&m| little_on_lattice(m, k, params))
                    .collect::<Result<Vec<_>>>()?;
                Ok((w, f))
            })?;
            tail_ratio = Some(acc.worst_tail);
            let pred = degrees
                .iter()
                .map(|&n| {
                    b.pow(2.0 * l * n as f64) * q_pochhammer_real(q, b, n)
                        / q_pochhammer_real(b.pow(2.0 * l), b, n)
                })
                .collect();
            (acc.matrix(), pred, acc.terms)
        }
        Relation::AlSalamCarlitzDual => {
            let a = params.little_a();
            let mut acc = GramSum::new(size);
            acc.walk(0, 1, 2 * size, spec.tail_tol, |m| {
                let m = m as usize;
                let mf = m as f64;
                let w = b.pow(mf * mf) * a.powi(m as i32)
                    / (q_pochhammer_real(q, b, m) * q_pochhammer_real(a * q, b, m));
                let f = degrees
                    .iter()
                    .map(|&n| dual_on_lattice(n, m, params))
                    .collect::<Result<Vec<_>>>()?;
                Ok((w, f))
            })?;
            tail_ratio = Some(acc.worst_tail);
            let tail = inf_product(b.pow(2.0 * l), b)?;
            let pred = degrees
                .iter()
                .map(|&n| b.pow(-2.0 * l * n as f64) * q_pochhammer_real(q, b, n) / tail)
                .collect();
            (acc.matrix(), pred, acc.terms)
        }
        Relation::BilateralQLaguerre => {
            let family = q_laguerre(params)?;
            let c = params.scale();
            let bc = bilateral_constant_nominal(params)?;
            let (lo, hi) = spec.k_range.unwrap_or((0, 0));
            let ctl = SeriesControl::default();
            let term = |k: i64| -> Result<(f64, Vec<f64>)> {
                let x = c * b.pow(k as f64);
                // weights underflow long before the polynomials matter
                let log_w = 2.0 * l * k as f64 * q.ln() - log_neg_product(x, b, &ctl)?;
                let f: Vec<f64> = eval_poly_all(family, n_max, C64::new(x, 0.0), b)?
                    .iter()
                    .map(|v| v.re)
                    .collect();
                Ok((bc * log_w.exp(), f))
            };
            let mut acc = GramSum::new(size);
            let width = (hi - lo + 1).max(1) as usize;
            acc.walk(lo, 1, width, spec.tail_tol, term)?;
            acc.walk(lo - 1, -1, 1, spec.tail_tol, term)?;
            tail_ratio = Some(acc.worst_tail);
            let pred = degrees
                .iter()
                .map(|&n| {
                    q_pochhammer_real(b.pow(2.0 * l), b, n)
                        / (q_pochhammer_real(q, b, n) * b.pow(n as f64))
                })
                .collect();
            (acc.matrix(), pred, acc.terms)
        }
        Relation::FkSystem => {
            let family = q_laguerre(params)?;
            let c = params.scale();
            let bc = bilateral_constant_nominal(params)?;
            let ks = fk_indices(spec, n_max);
            labels = ks.clone();
            let ctl = SeriesControl::default();
            let tables = ks
                .iter()
                .map(|&k| {
                    eval_poly_all(family, MAX_SUM_TERMS, C64::new(c * b.pow(k as f64), 0.0), b)
                })
                .collect::<Result<Vec<_>>>()?;
            let mut acc = GramSum::new(ks.len());
            acc.walk(0, 1, 1, spec.tail_tol, |n| {
                let n = n as usize;
                let w = b.pow(n as f64) * q_pochhammer_real(q, b, n)
                    / q_pochhammer_real(b.pow(2.0 * l), b, n);
                Ok((w, tables.iter().map(|t| t[n].re).collect()))
            })?;
            tail_ratio = Some(acc.worst_tail);
            let pred = ks
                .iter()
                .map(|&k| {
                    let x = c * b.pow(k as f64);
                    Ok(log_neg_product(x, b, &ctl)?.exp() / (b.pow(2.0 * l * k as f64) * bc))
                })
                .collect::<Result<Vec<_>>>()?;
            (acc.matrix(), pred, acc.terms)
        }
    };

    let n = gram.len();
    let mut max_offdiag: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                max_offdiag =
                    max_offdiag.max(gram[i][j].abs() / (gram[i][i] * gram[j][j]).abs().sqrt());
            }
        }
    }
    let ratios: Vec<f64> = (0..n).map(|i| gram[i][i] / predicted_diag[i]).collect();
    let fitted_constant = ratios.iter().sum::<f64>() / n as f64;
    let max_diag_dev = ratios
        .iter()
        .map(|r| (r / fitted_constant - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(GramReport {
        relation: spec.relation,
        n_max,
        gram,
        labels,
        predicted_diag,
        max_offdiag,
        max_diag_dev,
        fitted_constant,
        truncation_terms_used: terms,
        quadrature_change,
        tail_ratio,
    })
}

/// `ln (-x; q)_inf` for `x > 0`.
fn log_neg_product(x: f64, base: QBase, ctl: &SeriesControl) -> Result<f64> {
    let q = base.q();
    let cutoff = ctl.product_cutoff();
    let mut term = x;
    let mut sum = 0.0;
    for _ in 0..ctl.max_terms {
        if term < cutoff {
            return Ok(sum);
        }
        sum += term.ln_1p();
        term *= q;
    }
    Err(Error::NonConvergence(ctl.max_terms))
}

/// Basis-change matrices whose unitarity encodes a pair of dual relations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Pairing {
    /// `a_{mn} = c_n P_m(lambda_n)` between the monomial basis and the I2 eigenbasis.
    LittleVsDual,
    /// `a_{kn} = d_k q^{n/2} sqrt((q;q)_n/(q^{2l};q)_n) L_n(c q^k; q)` for I3.
    QLaguerreVsFk,
}

impl FromStr for Pairing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "little_vs_dual" | "little_qL_vs_asc" => Ok(Pairing::LittleVsDual),
            "q_laguerre_vs_fk" | "qL_vs_fk" => Ok(Pairing::QLaguerreVsFk),
            other => Err(Error::Domain(format!("unknown pairing {other}"))),
        }
    }
}

/// Deviations from orthonormality of the two index families of the matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnitarityResiduals {
    /// `max |sum_points a_{m.} a_{m'.} - delta|` over degrees `m, m' <= m_max`.
    pub row_residual: f64,
    /// `max |sum_degrees a_{.n} a_{.n'} - delta|` over the spectral indices
    /// `n, n' <= n_max` (or `|k|, |k'| <= n_max` on the bilateral lattice).
    pub col_residual: f64,
}

fn max_identity_deviation(gram: &[Vec<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, row) in gram.iter().enumerate() {
        for (j, g) in row.iter().enumerate() {
            worst = worst.max((g - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    worst
}

/// Unitarity of the basis-change matrix of `pairing`: rows are polynomial
/// degrees, columns spectral points.
pub fn unitarity_check(
    pairing: Pairing,
    params: &RepParams,
    m_max: usize,
    n_max: usize,
) -> Result<UnitarityResiduals> {
    let b = params.base;
    let q = b.q();
    let l = params.l;
    let tol = 1e-17;
    match pairing {
        Pairing::LittleVsDual => {
            let head = inf_product(b.pow(2.0 * l), b)?;
            // c_n (-1)^m q^{lm + m(m-1)/2} v_n(q^-m) / sqrt((q;q)_m (q^{2l};q)_m)
            let entry = |m: usize, n: usize| -> Result<f64> {
                let c_n = b.pow(l * n as f64) * (head / q_pochhammer_real(q, b, n)).sqrt();
                let mf = m as f64;
                let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
                let decay = b.pow(l * mf + mf * (mf - 1.0) / 2.0)
                    / (q_pochhammer_real(q, b, m) * q_pochhammer_real(b.pow(2.0 * l), b, m)).sqrt();
                Ok(c_n * sign * decay * dual_on_lattice(n, m, params)?)
            };
            let mut rows = GramSum::new(m_max + 1);
            rows.walk(0, 1, 1, tol, |n| {
                Ok((
                    1.0,
                    (0..=m_max)
                        .map(|m| entry(m, n as usize))
                        .collect::<Result<_>>()?,
                ))
            })?;
            let mut cols = GramSum::new(n_max + 1);
            cols.walk(0, 1, 2 * n_max + 2, tol, |m| {
                Ok((
                    1.0,
                    (0..=n_max)
                        .map(|n| entry(m as usize, n))
                        .collect::<Result<_>>()?,
                ))
            })?;
            Ok(UnitarityResiduals {
                row_residual: max_identity_deviation(&rows.matrix()),
                col_residual: max_identity_deviation(&cols.matrix()),
            })
        }
        Pairing::QLaguerreVsFk => {
            let family = q_laguerre(params)?;
            let c = params.scale();
            let bc = bilateral_constant_exact(params)?;
            let ctl = SeriesControl::default();
            let d = |k: i64| -> Result<f64> {
                let x = c * b.pow(k as f64);
                Ok(
                    (0.5 * (bc.ln() + 2.0 * l * k as f64 * q.ln() - log_neg_product(x, b, &ctl)?))
                        .exp(),
                )
            };
            let degree_scale = |n: usize| {
                b.pow(n as f64 / 2.0)
                    * (q_pochhammer_real(q, b, n) / q_pochhammer_real(b.pow(2.0 * l), b, n)).sqrt()
            };
            let values = |k: i64, top: usize| -> Result<Vec<f64>> {
                let raw = eval_poly_all(family, top, C64::new(c * b.pow(k as f64), 0.0), b)?;
                let dk = d(k)?;
                Ok(raw
                    .iter()
                    .enumerate()
                    .map(|(n, v)| dk * degree_scale(n) * v.re)
                    .collect())
            };
            let mut rows = GramSum::new(m_max + 1);
            let row_term = |k: i64| Ok((1.0, values(k, m_max)?));
            rows.walk(0, 1, 1, tol, row_term)?;
            rows.walk(-1, -1, 1, tol, row_term)?;
            let ks: Vec<i64> = (-(n_max as i64)..=n_max as i64).collect();
            let tables = ks
                .iter()
                .map(|&k| values(k, MAX_SUM_TERMS))
                .collect::<Result<Vec<_>>>()?;
            let mut cols = GramSum::new(ks.len());
            cols.walk(0, 1, 1, tol, |n| {
                Ok((1.0, tables.iter().map(|t| t[n as usize]).collect()))
            })?;
            Ok(UnitarityResiduals {
                row_residual: max_identity_deviation(&rows.matrix()),
                col_residual: max_identity_deviation(&cols.matrix()),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relation_names_round_trip() {
        for r in Relation::ALL {
            assert_eq!(r.name().parse::<Relation>().unwrap(), r);
        }
        assert_eq!("fk_719".parse::<Relation>().unwrap(), Relation::FkSystem);
        assert!("nope".parse::<Relation>().is_err());
    }

    #[test]
    fn polynomial_exactness() {
        let r = quadrature_integrate(|x| x * x, (0.0, 1.0), 16).unwrap();
        assert!((r.value - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn weight_domain() {
        let p = RepParams::new(0.5, 1.0).unwrap();
        assert!(weight_continuous(0.0, &p).is_err());
        assert!(weight_continuous(0.5, &p).unwrap() > 0.0);
    }

    #[test]
    fn constants_agree_up_to_reported_factor() {
        let p = RepParams::new(0.5, 1.0).unwrap().with_c(1.0).unwrap();
        let ratio = bilateral_constant_nominal(&p).unwrap() / bilateral_constant_exact(&p).unwrap();
        assert!((ratio - 0.25).abs() < 1e-12, "{ratio}");
    }
}
