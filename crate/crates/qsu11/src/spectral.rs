//! Eigenvalues of finite sections, comparison with the predicted spectra, and
//! the deficiency-index test for unbounded families.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::{build_operator, coefficient_limits, offdiag_entry, JacobiOperator, OpKind};
use crate::qcore::C64;
use crate::qpolys::RepParams;

/// Eigen-decomposition of a finite section.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Unit eigenvectors as columns, in the order of `values`, each with a
    /// nonnegative largest-magnitude component.
    pub vectors: Option<DMatrix<f64>>,
}

/// Number of eigenvalues of the tridiagonal matrix below `x` (Sturm count of
/// the pivots of `T - x`).
fn count_below(diag: &[f64], off_sq: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut pivot = 1.0;
    for (i, &d) in diag.iter().enumerate() {
        let coupling = if i == 0 { 0.0 } else { off_sq[i - 1] / pivot };
        pivot = d - x - coupling;
        if pivot == 0.0 {
            pivot = -f64::EPSILON * f64::MIN_POSITIVE.sqrt();
        }
        if pivot < 0.0 {
            count += 1;
        }
    }
    count
}

/// Eigenvalues by bisection on the Sturm count, optionally with eigenvectors.
///
/// The matrix is rescaled to unit Gershgorin radius first, so squared
/// couplings never overflow. Every eigenvalue is bisected to adjacent
/// doubles, which makes the output independent of evaluation order.
pub fn eigen_truncated(op: &JacobiOperator, with_vectors: bool) -> Eigen {
    let n = op.dim();
    if n == 0 {
        return Eigen {
            values: Vec::new(),
            vectors: with_vectors.then(|| DMatrix::zeros(0, 0)),
        };
    }
    let radius = (0..n)
        .map(|i| {
            let left = if i > 0 { op.offdiag[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { op.offdiag[i].abs() } else { 0.0 };
            op.diag[i].abs() + left + right
        })
        .fold(0.0, f64::max);
    let scale = if radius > 0.0 { radius } else { 1.0 };
    let diag: Vec<f64> = op.diag.iter().map(|d| d / scale).collect();
    let off_sq: Vec<f64> = op.offdiag.iter().map(|e| (e / scale).powi(2)).collect();

    let values = (0..n)
        .map(|k| {
            // smallest x with more than k eigenvalues below it
            let (mut lo, mut hi) = (-1.0 - f64::EPSILON, 1.0 + f64::EPSILON);
            for _ in 0..2200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if count_below(&diag, &off_sq, mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi) * scale
        })
        .collect();

    let vectors = with_vectors.then(|| dense_vectors(op));
    Eigen { values, vectors }
}

fn dense_vectors(op: &JacobiOperator) -> DMatrix<f64> {
    let eig = op.to_dense().symmetric_eigen();
    let mut order: Vec<usize> = (0..op.dim()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut out = DMatrix::zeros(op.dim(), op.dim());
    for (col, &src) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(src);
        let pivot = v
            .iter()
            .copied()
            .fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        out.set_column(col, &(v * sign));
    }
    out
}

/// Ascending eigenvalues of a dense Hermitian matrix.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let mut values: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Predicted spectrum of the full operator.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum Prediction {
    /// Continuous spectrum filling `[lo, hi]`.
    Interval { lo: f64, hi: f64 },
    /// Discrete spectrum; `points[n]` is the `n`-th predicted eigenvalue.
    PointSet {
        description: String,
        points: Vec<f64>,
    },
    /// Spectrum depends on the selfadjoint extension; only the geometric ladder
    /// ratio is predicted.
    ExtensionDependent {
        description: String,
        ladder_ratio: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchedPoint {
    /// Index `n` of the predicted point.
    pub index: usize,
    pub predicted: f64,
    pub computed: f64,
    pub abs_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub kind: OpKind,
    pub params: RepParams,
    pub dim: usize,
    pub eigenvalues: Vec<f64>,
    pub prediction: Prediction,
    /// Interval: distance of the extreme eigenvalues outside it.
    /// Point set: largest matched error. Ladder: `|ratio_estimate - ratio|`.
    pub max_violation: f64,
    /// Sorted by predicted index.
    pub matched_points: Vec<MatchedPoint>,
    pub ratio_estimate: Option<f64>,
    pub notes: Vec<String>,
}

/// Smallest accepted dimension of [`spectrum_report`].
pub const MIN_REPORT_DIM: usize = 16;
/// Largest-magnitude eigenvalues matched against predicted points.
pub const MATCHED_COUNT: usize = 8;
/// Largest-magnitude eigenvalues entering the ladder ratio.
const TOP_COUNT: usize = 10;

/// Spectrum of the `dim`-section compared with the full operator's prediction.
pub fn spectrum_report(kind: OpKind, params: &RepParams, dim: usize) -> Result<SpectrumReport> {
    if dim < MIN_REPORT_DIM {
        return Err(Error::Domain(format!(
            "spectrum report needs dim >= {MIN_REPORT_DIM}, got {dim}"
        )));
    }
    let op = build_operator(kind, params, dim)?;
    let eigenvalues = eigen_truncated(&op, false).values;
    let q = params.q();
    let mut report = SpectrumReport {
        kind,
        params: *params,
        dim,
        eigenvalues,
        prediction: Prediction::Interval { lo: 0.0, hi: 0.0 },
        max_violation: 0.0,
        matched_points: Vec::new(),
        ratio_estimate: None,
        notes: Vec::new(),
    };
    let ev = &report.eigenvalues;
    match kind {
        OpKind::I1 | OpKind::I1Phi => {
            let hi = 2.0 * q.sqrt() / (1.0 - q);
            report.max_violation = (0.0 - ev[0]).max(ev[dim - 1] - hi).max(0.0);
            report.prediction = Prediction::Interval { lo: 0.0, hi };
        }
        OpKind::Classical => {
            report.max_violation = (0.0 - ev[0]).max(0.0);
            report.prediction = Prediction::Interval {
                lo: 0.0,
                hi: f64::INFINITY,
            };
        }
        OpKind::I2Psi => {
            let points: Vec<f64> = (0..dim)
                .map(|n| q.powi(n as i32) / (1.0 - 1.0 / q))
                .collect();
            report.matched_points = match_points(ev, &points);
            report.max_violation = report
                .matched_points
                .iter()
                .map(|m| m.abs_error)
                .fold(0.0, f64::max);
            report.prediction = Prediction::PointSet {
                description: "q^n / (1 - q^-1), n >= 0".into(),
                points,
            };
        }
        OpKind::I3 | OpKind::I3Psi | OpKind::I4Psi => {
            let ratio = ladder_ratio(ev);
            report.max_violation = ratio.map_or(f64::INFINITY, |r| (r - q).abs());
            report.ratio_estimate = ratio;
            let description = if kind == OpKind::I4Psi {
                "extension-dependent point spectrum".to_string()
            } else {
                report.notes.push(
                    "point set read as c q^k / (2(1-q)); the alternative reading c q^k / (1-q) differs by a factor 2 \
                     and leaves the ladder ratio unchanged"
                        .into(),
                );
                "extension-dependent point spectrum c q^k / (2(1-q))".to_string()
            };
            report.prediction = Prediction::ExtensionDependent {
                description,
                ladder_ratio: q,
            };
        }
    }
    Ok(report)
}

/// Greedy nearest-neighbour matching of the largest-magnitude eigenvalues to
/// predicted points, ties going to the smaller index.
fn match_points(eigenvalues: &[f64], points: &[f64]) -> Vec<MatchedPoint> {
    let mut by_size: Vec<f64> = eigenvalues.to_vec();
    by_size.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    let mut used = vec![false; points.len()];
    let mut matched = Vec::new();
    for &computed in by_size.iter().take(MATCHED_COUNT) {
        let best = points
            .iter()
            .enumerate()
            .filter(|(n, _)| !used[*n])
            .map(|(n, &p)| (n, (p - computed).abs()))
            .fold(None, |acc: Option<(usize, f64)>, cand| match acc {
                Some(a) if a.1 <= cand.1 => Some(a),
                _ => Some(cand),
            });
        if let Some((n, err)) = best {
            used[n] = true;
            matched.push(MatchedPoint {
                index: n,
                predicted: points[n],
                computed,
                abs_error: err,
            });
        }
    }
    matched.sort_by_key(|m| m.index);
    matched
}

/// Median of consecutive ratios among the ten largest-magnitude eigenvalues
/// sharing the sign of the largest one.
fn ladder_ratio(eigenvalues: &[f64]) -> Option<f64> {
    let top = eigenvalues
        .iter()
        .copied()
        .max_by(|a, b| a.abs().total_cmp(&b.abs()))?;
    let mut same: Vec<f64> = eigenvalues
        .iter()
        .copied()
        .filter(|x| x * top > 0.0)
        .collect();
    same.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    same.truncate(TOP_COUNT);
    if same.len() < 2 {
        return None;
    }
    let mut ratios: Vec<f64> = same.windows(2).map(|w| w[1] / w[0]).collect();
    ratios.sort_by(f64::total_cmp);
    let m = ratios.len();
    Some(if m % 2 == 1 {
        ratios[m / 2]
    } else {
        0.5 * (ratios[m / 2 - 1] + ratios[m / 2])
    })
}

/// Classification of the closure of the operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    BoundedSelfadjoint,
    #[serde(rename = "indices_1_1")]
    Indices11,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeficiencyVerdict {
    pub kind: OpKind,
    pub k_max: usize,
    /// `a_{k-1} a_{k+1} <= a_k^2` for all `1 <= k < k_max`.
    pub logconcave_ok: bool,
    /// `sum_{k <= k_max} 1 / a_k`.
    pub carleman_sum: f64,
    /// `a_{K-1} / a_K`.
    pub ratio_limit: f64,
    pub verdict: Verdict,
}

/// Smallest accepted index range of [`deficiency_test`].
pub const MIN_DEFICIENCY_RANGE: usize = 50;

/// Limit-circle test on the off-diagonal sequence `a_0..a_K`.
///
/// Bounded coefficient sequences give a bounded selfadjoint operator. Otherwise
/// log-concavity together with a ratio limit below one gives indices (1,1).
pub fn deficiency_test(
    kind: OpKind,
    params: &RepParams,
    k_max: usize,
) -> Result<DeficiencyVerdict> {
    if k_max < MIN_DEFICIENCY_RANGE {
        return Err(Error::Domain(format!(
            "deficiency test needs K >= {MIN_DEFICIENCY_RANGE}, got {k_max}"
        )));
    }
    let a: Vec<f64> = (0..=k_max)
        .map(|k| offdiag_entry(kind, k, params).abs())
        .collect();
    if a.iter().any(|x| !x.is_finite() || *x == 0.0) {
        return Err(Error::Overflow(format!(
            "{kind} off-diagonal sequence up to {k_max}"
        )));
    }
    // products are formed as ratios so they cannot overflow
    let slack = 8.0 * f64::EPSILON;
    let logconcave_ok = a
        .windows(3)
        .all(|w| (w[0] / w[1]) * (w[2] / w[1]) <= 1.0 + slack);
    let carleman_sum = a.iter().map(|x| 1.0 / x).sum();
    let ratio_limit = a[k_max - 1] / a[k_max];
    let limits = coefficient_limits(kind, params);
    let verdict = if limits.diag_limit.is_finite() && limits.offdiag_limit.is_finite() {
        Verdict::BoundedSelfadjoint
    } else if logconcave_ok && ratio_limit < 1.0 {
        Verdict::Indices11
    } else {
        Verdict::Inconclusive
    };
    Ok(DeficiencyVerdict {
        kind,
        k_max,
        logconcave_ok,
        carleman_sum,
        ratio_limit,
        verdict,
    })
}
