//! Resolution of the run configuration: command-line flags override the config
//! file, which overrides the defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::Result;
use qsu11::limits::{dyadic_q_sequence, LimitCheck};
use qsu11::operators::OpKind;
use qsu11::ortho::{Relation, MAX_GRAM_DEGREE};
use qsu11::qpolys::RepParams;
use qsu11::spectral::{MIN_DEFICIENCY_RANGE, MIN_REPORT_DIM};

use crate::cli::{Cli, Command, Format};

/// Marks errors that map to exit status 2.
#[derive(Debug)]
pub struct InvalidConfig(pub String);

impl fmt::Display for InvalidConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InvalidConfig {}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    InvalidConfig(msg.into()).into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Spectrum,
    Ortho,
    Deficiency,
    Limits,
    VerifyAll,
}

/// Fully resolved and validated settings of one run.
#[derive(Debug, Clone)]
pub struct Settings {
    pub command: CommandKind,
    pub params: RepParams,
    pub dim: usize,
    pub nmax: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub tol_spectrum: f64,
    pub tol_gram: f64,
    pub op: OpKind,
    pub relation: Relation,
    pub kmax: usize,
    /// `None` runs every limit check.
    pub check: Option<LimitCheck>,
    pub mu: f64,
    pub q_seq: Vec<f64>,
}

const KEYS: [&str; 16] = [
    "q",
    "l",
    "psi",
    "c",
    "dim",
    "nmax",
    "out",
    "format",
    "tol_spectrum",
    "tol_gram",
    "op",
    "relation",
    "kmax",
    "check",
    "mu",
    "q_seq",
];

/// Parses `key = value` lines. Keys may use `-` or `_`.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (number, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| invalid(format!("config line {}: expected key = value", number + 1)))?;
        let key = key.trim().replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(invalid(format!(
                "config line {}: unknown key {key:?}",
                number + 1
            )));
        }
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(invalid(format!(
                "config line {}: duplicate key {key:?}",
                number + 1
            )));
        }
    }
    Ok(map)
}

fn read_config(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| invalid(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_text(&text)
}

/// Flag value, else file value, else nothing.
struct Layers {
    file: BTreeMap<String, String>,
}

impl Layers {
    fn pick<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.file
            .get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| invalid(format!("config key {key}: {e}")))
            })
            .transpose()
    }

    fn pick_list(&self, flag: Option<Vec<f64>>, key: &str) -> Result<Option<Vec<f64>>> {
        if flag.is_some() {
            return Ok(flag);
        }
        self.file
            .get(key)
            .map(|v| {
                v.split(',')
                    .map(|x| {
                        x.trim()
                            .parse::<f64>()
                            .map_err(|e| invalid(format!("config key {key}: {e}")))
                    })
                    .collect()
            })
            .transpose()
    }
}

fn parse_named<T>(value: &str, what: &str) -> Result<T>
where
    T: FromStr,
    T::Err: fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| invalid(format!("invalid {what} {value:?}: {e}")))
}

fn positive_tolerance(value: f64, name: &str) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(invalid(format!("{name} must be positive, got {value}")))
    }
}

impl Settings {
    pub fn resolve(cli: Cli) -> Result<Self> {
        let file = match &cli.common.config {
            Some(path) => read_config(path)?,
            None => BTreeMap::new(),
        };
        let layers = Layers { file };
        let c = &cli.common;

        let (command, op_flag, relation_flag, kmax_flag, check_flag, mu_flag, seq_flag) = match cli
            .command
        {
            Command::Spectrum { op } => (CommandKind::Spectrum, op, None, None, None, None, None),
            Command::Ortho { relation } => {
                (CommandKind::Ortho, None, relation, None, None, None, None)
            }
            Command::Deficiency { op, kmax } => {
                (CommandKind::Deficiency, op, None, kmax, None, None, None)
            }
            Command::Limits { check, mu, q_seq } => {
                (CommandKind::Limits, None, None, None, check, mu, q_seq)
            }
            Command::VerifyAll => (CommandKind::VerifyAll, None, None, None, None, None, None),
        };

        let q = layers.pick(c.q, "q")?.unwrap_or(0.5);
        let l = layers.pick(c.l, "l")?.unwrap_or(1.0);
        let psi = layers.pick(c.psi, "psi")?.unwrap_or(0.0);
        let scale = layers.pick(c.c, "c")?.unwrap_or(1.0);
        let params = RepParams::new(q, l)
            .and_then(|p| p.with_psi(psi))
            .and_then(|p| p.with_c(scale))
            .map_err(|e| invalid(e.to_string()))?;

        let dim = layers.pick(c.dim, "dim")?.unwrap_or(200);
        if command == CommandKind::Spectrum && dim < MIN_REPORT_DIM {
            return Err(invalid(format!(
                "dim must be at least {MIN_REPORT_DIM}, got {dim}"
            )));
        }
        let nmax = layers.pick(c.nmax, "nmax")?.unwrap_or(8);
        if nmax > MAX_GRAM_DEGREE {
            return Err(invalid(format!(
                "nmax must not exceed {MAX_GRAM_DEGREE}, got {nmax}"
            )));
        }
        let out = layers.pick(c.out.clone(), "out")?;
        let format = match c.format {
            Some(f) => f,
            None => match layers.file.get("format") {
                Some(v) => <Format as clap::ValueEnum>::from_str(v, true)
                    .map_err(|e| invalid(format!("config key format: {e}")))?,
                None if command == CommandKind::VerifyAll => Format::Text,
                None => Format::Json,
            },
        };
        if format == Format::Csv
            && matches!(command, CommandKind::Deficiency | CommandKind::VerifyAll)
        {
            return Err(invalid(
                "csv output is available for spectrum, ortho and limits",
            ));
        }
        let tol_spectrum = positive_tolerance(
            layers
                .pick(c.tol_spectrum, "tol_spectrum")?
                .unwrap_or(1e-10),
            "tol-spectrum",
        )?;
        let tol_gram = positive_tolerance(
            layers.pick(c.tol_gram, "tol_gram")?.unwrap_or(1e-8),
            "tol-gram",
        )?;

        let op = match layers.pick(op_flag, "op")? {
            Some(name) => parse_named::<OpKind>(&name, "operator")?,
            None => OpKind::I1,
        };
        if command == CommandKind::Deficiency && op == OpKind::Classical {
            return Err(invalid("deficiency classification covers I1 to I4 only"));
        }
        let relation = match layers.pick(relation_flag, "relation")? {
            Some(name) => parse_named::<Relation>(&name, "relation")?,
            None => Relation::ContinuousQLaguerre,
        };
        let kmax = layers.pick(kmax_flag, "kmax")?.unwrap_or(200);
        if kmax < MIN_DEFICIENCY_RANGE {
            return Err(invalid(format!(
                "kmax must be at least {MIN_DEFICIENCY_RANGE}, got {kmax}"
            )));
        }
        let check = layers
            .pick(check_flag, "check")?
            .map(|name| parse_named::<LimitCheck>(&name, "limit check"))
            .transpose()?;
        let mu = layers.pick(mu_flag, "mu")?.unwrap_or(1.0);
        if !mu.is_finite() {
            return Err(invalid(format!("mu must be finite, got {mu}")));
        }
        let q_seq = layers
            .pick_list(seq_flag, "q_seq")?
            .unwrap_or_else(|| dyadic_q_sequence(6));
        if q_seq.is_empty() {
            return Err(invalid("q-seq must not be empty"));
        }
        for &qj in &q_seq {
            if !(qj > 0.0 && qj < 1.0) {
                return Err(invalid(format!("q must lie in (0,1), got {qj} in q-seq")));
            }
        }

        Ok(Self {
            command,
            params,
            dim,
            nmax,
            out,
            format,
            tol_spectrum,
            tol_gram,
            op,
            relation,
            kmax,
            check,
            mu,
            q_seq,
        })
    }
}

/// Worker count from `QSU11_THREADS`, if set.
pub fn thread_limit() -> Result<Option<usize>> {
    match std::env::var("QSU11_THREADS") {
        Ok(v) => {
            let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
                invalid(format!(
                    "QSU11_THREADS must be a positive integer, got {v:?}"
                ))
            })?;
            Ok(Some(n))
        }
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(invalid(format!("QSU11_THREADS: {e}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;

    fn resolve(args: &[&str]) -> Result<Settings> {
        Settings::resolve(Cli::try_parse_from(args).unwrap())
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let map = parse_config_text("# header\n\nq = 0.4 # trailing\ntol-gram=1e-9\n").unwrap();
        assert_eq!(map["q"], "0.4");
        assert_eq!(map["tol_gram"], "1e-9");
    }

    #[test]
    fn unknown_and_malformed_lines_are_rejected() {
        assert!(parse_config_text("colour = red").is_err());
        assert!(parse_config_text("q 0.5").is_err());
        assert!(parse_config_text("q = 0.5\nq = 0.6").is_err());
    }

    #[test]
    fn defaults_apply() {
        let s = resolve(&["qsu11", "spectrum"]).unwrap();
        assert_eq!(s.params.q(), 0.5);
        assert_eq!(s.params.l, 1.0);
        assert_eq!(s.op, OpKind::I1);
        assert_eq!(s.format, Format::Json);
        assert_eq!(s.tol_spectrum, 1e-10);
        let s = resolve(&["qsu11", "verify-all"]).unwrap();
        assert_eq!(s.format, Format::Text);
    }

    #[test]
    fn flags_override_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "q = 0.3\nl = 2\nop = I2\n").unwrap();
        let p = path.to_str().unwrap();
        let s = resolve(&["qsu11", "spectrum", "--config", p, "--q", "0.6"]).unwrap();
        assert_eq!(s.params.q(), 0.6);
        assert_eq!(s.params.l, 2.0);
        assert_eq!(s.op, OpKind::I2Psi);
    }

    #[test]
    fn invalid_values_are_config_errors() {
        for args in [
            &["qsu11", "spectrum", "--q", "1.5"][..],
            &["qsu11", "spectrum", "--dim", "8"],
            &["qsu11", "ortho", "--nmax", "40"],
            &["qsu11", "spectrum", "--op", "I9"],
            &["qsu11", "limits", "--q-seq", "0.5,1.2"],
            &["qsu11", "deficiency", "--kmax", "10"],
            &["qsu11", "verify-all", "--format", "csv"],
        ] {
            let err = resolve(args).unwrap_err();
            assert!(err.downcast_ref::<InvalidConfig>().is_some(), "{args:?}");
        }
        let err = resolve(&["qsu11", "spectrum", "--q", "1.5"]).unwrap_err();
        assert!(err.to_string().contains("q must lie in (0,1)"));
    }
}
