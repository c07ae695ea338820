use anyhow::Result;
use rayon::prelude::*;
use serde::Serialize;

use qsu11::limits::{limit_table, LimitCheck, LimitPoint, LimitTable};
use qsu11::operators::{build_operator, reconstruct_basis, OpKind};
use qsu11::ortho::{gram_matrix, GramReport, MeasureSpec, Relation};
use qsu11::qpolys::RepParams;
use qsu11::spectral::{
    deficiency_test, eigen_truncated, spectrum_report, DeficiencyVerdict, Prediction, Verdict,
};

use crate::cli::Format;
use crate::config::{CommandKind, Settings};
use crate::report::{cell, csv_body, json_body, text_body, Check, Outcome};

/// Largest change under node doubling accepted for the continuous relation.
const QUADRATURE_TOL: f64 = 1e-10;
/// Last bilateral term relative to the largest.
const TAIL_TOL: f64 = 1e-14;
/// Distance of the deficiency ratio limit from `q`.
const RATIO_TOL: f64 = 1e-6;
/// Residual of the basis reconstruction.
const RECONSTRUCTION_TOL: f64 = 1e-9;
/// Distance of the extreme I1 eigenvalues from the interval ends.
const EDGE_GAP: f64 = 1e-3;

/// Echo of the inputs that determine a report.
#[derive(Debug, Serialize)]
struct ParamsEcho {
    q: f64,
    l: f64,
    psi: f64,
    c: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    op: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nmax: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    relation: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kmax: Option<usize>,
}

impl ParamsEcho {
    fn new(p: &RepParams) -> Self {
        Self {
            q: p.q(),
            l: p.l,
            psi: p.psi,
            c: p.scale(),
            op: None,
            dim: None,
            nmax: None,
            relation: None,
            kmax: None,
        }
    }
}

pub fn run(s: &Settings) -> Result<Outcome> {
    match s.command {
        CommandKind::Spectrum => run_spectrum(s),
        CommandKind::Ortho => run_ortho(s),
        CommandKind::Deficiency => run_deficiency(s),
        CommandKind::Limits => run_limits(s),
        CommandKind::VerifyAll => run_verify_all(s),
    }
}

#[derive(Serialize)]
struct SpectrumJson<'a> {
    params: ParamsEcho,
    prediction: &'a Prediction,
    eigenvalues: &'a [f64],
    checks: &'a [Check],
}

fn run_spectrum(s: &Settings) -> Result<Outcome> {
    let report = spectrum_report(s.op, &s.params, s.dim)?;
    let tol = s.tol_spectrum;
    let checks = match &report.prediction {
        Prediction::Interval { lo, hi } => vec![Check::at_most(
            format!("eigenvalues inside [{lo}, {hi}]"),
            report.max_violation,
            tol,
        )],
        Prediction::PointSet { .. } => report
            .matched_points
            .iter()
            .map(|m| Check::at_most(format!("ladder point {}", m.index), m.abs_error, tol))
            .collect(),
        Prediction::ExtensionDependent { ladder_ratio, .. } => vec![Check::at_most(
            format!(
                "eigenvalue ladder ratio {} against {ladder_ratio}",
                report.ratio_estimate.unwrap_or(f64::NAN)
            ),
            report.max_violation,
            tol,
        )],
    };
    let body = match s.format {
        Format::Text => text_body(&checks),
        Format::Json => {
            let mut params = ParamsEcho::new(&s.params);
            params.op = Some(s.op.to_string());
            params.dim = Some(s.dim);
            json_body(&SpectrumJson {
                params,
                prediction: &report.prediction,
                eigenvalues: &report.eigenvalues,
                checks: &checks,
            })?
        }
        Format::Csv => {
            let mut rows = vec![vec![
                "index".to_string(),
                "eigenvalue".into(),
                "predicted".into(),
                "abs_error".into(),
            ]];
            for (i, &ev) in report.eigenvalues.iter().enumerate() {
                let predicted = nearest_prediction(&report.prediction, &report, ev);
                rows.push(vec![
                    i.to_string(),
                    cell(Some(ev)),
                    cell(predicted),
                    cell(predicted.map(|p| (ev - p).abs())),
                ]);
            }
            csv_body(&rows)?
        }
    };
    Ok(Outcome { body, checks })
}

/// Nearest point of the predicted spectrum; matched eigenvalues keep their match.
fn nearest_prediction(
    prediction: &Prediction,
    report: &qsu11::spectral::SpectrumReport,
    ev: f64,
) -> Option<f64> {
    match prediction {
        Prediction::Interval { lo, hi } => Some(ev.clamp(*lo, *hi)),
        Prediction::PointSet { points, .. } => report
            .matched_points
            .iter()
            .find(|m| m.computed == ev)
            .map(|m| m.predicted)
            .or_else(|| {
                points
                    .iter()
                    .copied()
                    .min_by(|a, b| (a - ev).abs().total_cmp(&(b - ev).abs()))
            }),
        Prediction::ExtensionDependent { .. } => None,
    }
}

fn gram_checks(report: &GramReport, tol_gram: f64) -> Vec<Check> {
    let mut checks = vec![Check::at_most(
        format!("{} off-diagonal ratio", report.relation),
        report.max_offdiag,
        tol_gram,
    )];
    if let Some(change) = report.quadrature_change {
        checks.push(Check::at_most(
            format!("{} change under node doubling", report.relation),
            change,
            QUADRATURE_TOL,
        ));
    }
    if let Some(tail) = report.tail_ratio {
        checks.push(Check::at_most(
            format!("{} truncated tail", report.relation),
            tail,
            TAIL_TOL,
        ));
    }
    checks
}

#[derive(Serialize)]
struct OrthoJson<'a> {
    params: ParamsEcho,
    report: &'a GramReport,
    checks: &'a [Check],
}

fn run_ortho(s: &Settings) -> Result<Outcome> {
    let report = gram_matrix(&MeasureSpec::new(s.relation, s.params), s.nmax)?;
    let checks = gram_checks(&report, s.tol_gram);
    let body = match s.format {
        Format::Text => text_body(&checks),
        Format::Json => {
            let mut params = ParamsEcho::new(&s.params);
            params.relation = Some(s.relation.to_string());
            params.nmax = Some(s.nmax);
            json_body(&OrthoJson {
                params,
                report: &report,
                checks: &checks,
            })?
        }
        Format::Csv => {
            let mut header = vec!["label".to_string()];
            header.extend(report.labels.iter().map(|k| k.to_string()));
            let mut rows = vec![header];
            for (label, row) in report.labels.iter().zip(&report.gram) {
                let mut line = vec![label.to_string()];
                line.extend(row.iter().map(|&g| cell(Some(g))));
                rows.push(line);
            }
            csv_body(&rows)?
        }
    };
    Ok(Outcome { body, checks })
}

fn expected_verdict(kind: OpKind) -> Verdict {
    match kind {
        OpKind::I1 | OpKind::I1Phi | OpKind::I2Psi => Verdict::BoundedSelfadjoint,
        _ => Verdict::Indices11,
    }
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::BoundedSelfadjoint => "bounded_selfadjoint",
        Verdict::Indices11 => "indices_1_1",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn deficiency_checks(v: &DeficiencyVerdict, params: &RepParams, with_ratio: bool) -> Vec<Check> {
    let expected = expected_verdict(v.kind);
    let mut checks = vec![Check::holds(
        format!(
            "{} classified {} (found {})",
            v.kind,
            verdict_name(expected),
            verdict_name(v.verdict)
        ),
        v.verdict == expected,
    )];
    if expected == Verdict::Indices11 {
        checks.push(Check::holds(
            format!(
                "{} off-diagonal sequence log-concave up to {}",
                v.kind, v.k_max
            ),
            v.logconcave_ok,
        ));
        if with_ratio {
            checks.push(Check::at_most(
                format!("{} ratio limit {} against q", v.kind, v.ratio_limit),
                (v.ratio_limit - params.q()).abs(),
                RATIO_TOL,
            ));
        }
    }
    checks
}

#[derive(Serialize)]
struct DeficiencyJson<'a> {
    params: ParamsEcho,
    verdict: &'a DeficiencyVerdict,
    checks: &'a [Check],
}

fn run_deficiency(s: &Settings) -> Result<Outcome> {
    let verdict = deficiency_test(s.op, &s.params, s.kmax)?;
    let checks = deficiency_checks(&verdict, &s.params, true);
    let body = match s.format {
        Format::Json => {
            let mut params = ParamsEcho::new(&s.params);
            params.op = Some(s.op.to_string());
            params.kmax = Some(s.kmax);
            json_body(&DeficiencyJson {
                params,
                verdict: &verdict,
                checks: &checks,
            })?
        }
        _ => text_body(&checks),
    };
    Ok(Outcome { body, checks })
}

#[derive(Serialize)]
struct LimitsJson<'a> {
    params: LimitsEcho<'a>,
    tables: &'a [LimitTable],
    checks: &'a [Check],
}

#[derive(Serialize)]
struct LimitsEcho<'a> {
    l: f64,
    mu: f64,
    q_seq: &'a [f64],
}

fn run_limits(s: &Settings) -> Result<Outcome> {
    let point = LimitPoint {
        l: s.params.l,
        mu: s.mu,
        ..LimitPoint::default()
    };
    let selected: Vec<LimitCheck> = match s.check {
        Some(c) => vec![c],
        None => LimitCheck::ALL.to_vec(),
    };
    let tables = selected
        .iter()
        .map(|&c| limit_table(c, &s.q_seq, point))
        .collect::<qsu11::Result<Vec<_>>>()?;
    let checks: Vec<Check> = tables
        .iter()
        .map(|t| {
            let rises = t
                .rows
                .windows(2)
                .filter(|w| w[1].error >= w[0].error)
                .count();
            Check::at_most(
                format!("{} errors strictly decrease", t.check),
                rises as f64,
                0.0,
            )
        })
        .collect();
    let body = match s.format {
        Format::Text => text_body(&checks),
        Format::Json => json_body(&LimitsJson {
            params: LimitsEcho {
                l: s.params.l,
                mu: s.mu,
                q_seq: &s.q_seq,
            },
            tables: &tables,
            checks: &checks,
        })?,
        Format::Csv => {
            let mut rows = vec![vec!["check".to_string(), "q".into(), "error".into()]];
            for t in &tables {
                for r in &t.rows {
                    rows.push(vec![
                        t.check.to_string(),
                        cell(Some(r.q)),
                        cell(Some(r.error)),
                    ]);
                }
            }
            csv_body(&rows)?
        }
    };
    Ok(Outcome { body, checks })
}

type Claim = fn(&Settings) -> Result<Check>;

/// One entry per structural claim, in report order.
const CLAIMS: [(&str, Claim); 9] = [
    (
        "I1 spectrum covers the interval [0, 2 sqrt(q)/(1-q)]",
        continuous_spectrum,
    ),
    (
        "rotated I1 sections share the I1 spectrum",
        rotation_invariance,
    ),
    ("I2 spectrum is the ladder q^n/(1-1/q)", discrete_ladder),
    ("I1 eigenfunctions reconstruct the canonical basis", |s| {
        reconstruction(s, OpKind::I1)
    }),
    (
        "little q-Laguerre polynomials satisfy the dual orthogonality",
        |s| gram_claim(s, Relation::AlSalamCarlitzDual),
    ),
    ("I2 eigenfunctions reconstruct the canonical basis", |s| {
        reconstruction(s, OpKind::I2Psi)
    }),
    ("I3 has deficiency indices (1,1)", |s| {
        indices(s, OpKind::I3)
    }),
    ("lattice function system is orthogonal", |s| {
        gram_claim(s, Relation::FkSystem)
    }),
    ("I4 has deficiency indices (1,1)", |s| {
        indices(s, OpKind::I4Psi)
    }),
];

fn continuous_spectrum(s: &Settings) -> Result<Check> {
    let r = spectrum_report(OpKind::I1, &s.params, 300)?;
    let Prediction::Interval { lo, hi } = r.prediction else {
        unreachable!("I1 predicts an interval")
    };
    let ev = &r.eigenvalues;
    let gap = (ev[0] - lo).max(hi - ev[ev.len() - 1]);
    let value = r.max_violation.max(gap - EDGE_GAP).max(0.0);
    Ok(Check::at_most("", value, s.tol_spectrum))
}

fn rotation_invariance(s: &Settings) -> Result<Check> {
    let dim = 200;
    let plain = eigen_truncated(&build_operator(OpKind::I1, &s.params, dim)?, false).values;
    let mut worst = 0.0f64;
    for phi in [0.0, 1.0, std::f64::consts::PI] {
        let rotated = s.params.with_psi(phi)?;
        let ev = eigen_truncated(&build_operator(OpKind::I1Phi, &rotated, dim)?, false).values;
        worst = ev
            .iter()
            .zip(&plain)
            .fold(worst, |acc, (a, b)| acc.max((a - b).abs()));
    }
    Ok(Check::at_most("", worst, s.tol_spectrum))
}

fn discrete_ladder(s: &Settings) -> Result<Check> {
    let r = spectrum_report(OpKind::I2Psi, &s.params, 200)?;
    Ok(Check::at_most("", r.max_violation, s.tol_spectrum))
}

fn reconstruction(s: &Settings, kind: OpKind) -> Result<Check> {
    let mut worst = 0.0f64;
    for n in 0..=10 {
        worst = worst.max(reconstruct_basis(kind, n, &s.params, n + 6)?);
    }
    Ok(Check::at_most("", worst, RECONSTRUCTION_TOL))
}

fn gram_claim(s: &Settings, relation: Relation) -> Result<Check> {
    let r = gram_matrix(&MeasureSpec::new(relation, s.params), s.nmax)?;
    Ok(Check::at_most("", r.max_offdiag, s.tol_gram))
}

fn indices(s: &Settings, kind: OpKind) -> Result<Check> {
    let v = deficiency_test(kind, &s.params, s.kmax)?;
    let violations = deficiency_checks(&v, &s.params, false)
        .iter()
        .filter(|c| !c.pass)
        .count();
    Ok(Check::at_most("", violations as f64, 0.0))
}

#[derive(Serialize)]
struct VerifyJson<'a> {
    params: ParamsEcho,
    checks: &'a [Check],
}

fn run_verify_all(s: &Settings) -> Result<Outcome> {
    let checks: Vec<Check> = CLAIMS
        .par_iter()
        .map(|(name, claim)| match claim(s) {
            Ok(check) => Check {
                name: name.to_string(),
                ..check
            },
            Err(e) => {
                eprintln!("error in {name}: {e:#}");
                Check {
                    name: name.to_string(),
                    value: f64::NAN,
                    tol: 0.0,
                    pass: false,
                }
            }
        })
        .collect();
    let body = match s.format {
        Format::Json => json_body(&VerifyJson {
            params: ParamsEcho::new(&s.params),
            checks: &checks,
        })?,
        _ => text_body(&checks),
    };
    Ok(Outcome { body, checks })
}
