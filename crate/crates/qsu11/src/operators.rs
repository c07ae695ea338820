//! Truncated matrix realizations of the ladder operators and of the
//! Hamiltonian-type operator families in the orthonormal monomial basis.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::extended::{DoubleDouble, Real};
use crate::qcore::{q_bracket, QPowers, C64};
use crate::qpolys::{
    argument_map_gen, overlap_family, overlap_scale_gen, recurrence_step, FamilyTag, RepParams,
};

/// Operator families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpKind {
    I1,
    /// Rotated variant of I1; realized in the phase-absorbing basis.
    I1Phi,
    I2Psi,
    I3,
    I3Psi,
    I4Psi,
    /// The undeformed `J0 - J1` operator.
    Classical,
}

impl OpKind {
    pub const ALL: [OpKind; 7] = [
        OpKind::I1,
        OpKind::I1Phi,
        OpKind::I2Psi,
        OpKind::I3,
        OpKind::I3Psi,
        OpKind::I4Psi,
        OpKind::Classical,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OpKind::I1 => "I1",
            OpKind::I1Phi => "I1_phi",
            OpKind::I2Psi => "I2_psi",
            OpKind::I3 => "I3",
            OpKind::I3Psi => "I3_psi",
            OpKind::I4Psi => "I4_psi",
            OpKind::Classical => "classical",
        }
    }

    /// Whether the truncated coefficients stay bounded as the dimension grows.
    pub fn is_bounded(self) -> bool {
        matches!(self, OpKind::I1 | OpKind::I1Phi | OpKind::I2Psi)
    }

    fn basis(self) -> BasisTag {
        match self {
            OpKind::I1Phi | OpKind::I2Psi | OpKind::I3Psi | OpKind::I4Psi => BasisTag::TildePsi,
            _ => BasisTag::Canonical,
        }
    }
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OpKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I1" => Ok(OpKind::I1),
            "I1_phi" => Ok(OpKind::I1Phi),
            "I2" | "I2_psi" => Ok(OpKind::I2Psi),
            "I3" => Ok(OpKind::I3),
            "I3_psi" => Ok(OpKind::I3Psi),
            "I4" | "I4_psi" => Ok(OpKind::I4Psi),
            "classical" => Ok(OpKind::Classical),
            other => Err(Error::UnsupportedKind(other.to_string())),
        }
    }
}

impl Serialize for OpKind {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

/// Basis in which a matrix is expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisTag {
    Canonical,
    /// `f~_k = e^{i k psi} f_k`, which makes the phased families real.
    TildePsi,
}

/// Finite section of a Jacobi operator; off-diagonal entries are stored once.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JacobiOperator {
    pub kind: OpKind,
    pub params: RepParams,
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
    pub basis: BasisTag,
}

impl JacobiOperator {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                self.diag[i]
            } else if i == j + 1 {
                self.offdiag[j]
            } else if j == i + 1 {
                self.offdiag[i]
            } else {
                0.0
            }
        })
    }
}

/// `J0`, `J+` and `J-` on the first `N` basis vectors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderMatrices {
    /// `l + n`.
    pub j0_diag: Vec<f64>,
    /// `<f_{n+1}, J+ f_n>`.
    pub jplus_sub: Vec<f64>,
    /// `<f_n, J- f_{n+1}>`.
    pub jminus_super: Vec<f64>,
}

impl LadderMatrices {
    pub fn j0(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.j0_diag.clone().into())
    }

    pub fn jplus(&self) -> DMatrix<f64> {
        let n = self.j0_diag.len();
        DMatrix::from_fn(
            n,
            n,
            |i, j| if i == j + 1 { self.jplus_sub[j] } else { 0.0 },
        )
    }

    pub fn jminus(&self) -> DMatrix<f64> {
        self.jplus().transpose()
    }

    /// `q^{s J0}` as a dense diagonal matrix.
    pub fn q_power_j0(&self, params: &RepParams, s: f64) -> DMatrix<f64> {
        let d: Vec<f64> = self
            .j0_diag
            .iter()
            .map(|&j| params.base.pow(s * j))
            .collect();
        DMatrix::from_diagonal(&d.into())
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::Domain("dimension must be at least 1".into()))
    } else {
        Ok(())
    }
}

pub fn build_ladder(params: &RepParams, n: usize) -> Result<LadderMatrices> {
    check_dim(n)?;
    let l = params.l;
    let j0_diag = (0..n).map(|k| l + k as f64).collect();
    let jplus_sub: Vec<f64> = (0..n - 1)
        .map(|k| {
            let kf = k as f64;
            (q_bracket(2.0 * l + kf, params.base) * q_bracket(kf + 1.0, params.base)).sqrt()
        })
        .collect();
    Ok(LadderMatrices {
        j0_diag,
        jminus_super: jplus_sub.clone(),
        jplus_sub,
    })
}

/// Diagonal and off-diagonal entries `(k, k)` and `(k, k+1)`.
pub(crate) fn entries<T: Real>(kind: OpKind, k: usize, pw: &QPowers<T>, l: T) -> (T, T) {
    let one = T::one();
    let two = T::from_f64(2.0);
    let q = pw.q();
    let k = k as i32;
    let k4 = 4 * k;
    // sqrt((1 - q^{k+1})(1 - q^{2l+k}))
    let root = ((one - pw.pow(k4 + 4, 0)) * (one - pw.pow(k4, 4))).sqrt();
    match kind {
        OpKind::I1 | OpKind::I1Phi => (
            ((pw.pow(1, 0) + pw.pow(-1, 0)) * pw.pow(k4, 2) - two)
                / (two * (pw.pow(2, 0) - pw.pow(-2, 0))),
            -pw.pow(2, 0) * root / (two * (one - q)),
        ),
        OpKind::I2Psi => {
            let shift = pw.pow(-2, 1);
            let diag = -pw.pow(6 * k, 3) * (pw.bracket(k4, 0) * shift + pw.bracket(k4, 4) / shift);
            (diag, pw.pow(k4 + 4, 2) * root / (one - q))
        }
        OpKind::I3 | OpKind::I3Psi => {
            let beta = one - pw.pow(k4 + 4, 0) + q * (one - pw.pow(k4 - 4, 4));
            let denom = two * (one - q);
            (
                pw.pow(-8 * k, -4) * beta / denom,
                -pw.pow(-8 * k - 2, -4) * root / denom,
            )
        }
        OpKind::I4Psi => (T::zero(), pw.pow(-k4 - 2, -2) * root),
        OpKind::Classical => {
            let kf = T::from_f64(k as f64);
            (kf + l, -((l + l + kf) * (kf + one)).sqrt() / two)
        }
    }
}

/// Diagonal entry `k` of the finite section.
pub fn diag_entry(kind: OpKind, k: usize, params: &RepParams) -> f64 {
    entries(kind, k, &QPowers::new(params.base, params.l), params.l).0
}

/// Entry `(k, k+1)` of the finite section.
pub fn offdiag_entry(kind: OpKind, k: usize, params: &RepParams) -> f64 {
    entries(kind, k, &QPowers::new(params.base, params.l), params.l).1
}

/// Real symmetric finite section of dimension `n`.
///
/// Phased families are expressed in the basis `f~_k`, so `psi` does not enter.
pub fn build_operator(kind: OpKind, params: &RepParams, n: usize) -> Result<JacobiOperator> {
    check_dim(n)?;
    let pw = QPowers::new(params.base, params.l);
    let (diag, mut offdiag): (Vec<f64>, Vec<f64>) =
        (0..n).map(|k| entries(kind, k, &pw, params.l)).unzip();
    offdiag.pop();
    if diag.iter().chain(&offdiag).any(|x| !x.is_finite()) {
        return Err(Error::Overflow(format!("{kind} entries at dimension {n}")));
    }
    Ok(JacobiOperator {
        kind,
        params: *params,
        diag,
        offdiag,
        basis: kind.basis(),
    })
}

/// Hermitian matrix of the rotated I1 family in the canonical basis, with
/// rotation angle `params.psi`.
pub fn build_hermitian_canonical(params: &RepParams, n: usize) -> Result<DMatrix<C64>> {
    check_dim(n)?;
    let rot = C64::from_polar(1.0, params.psi);
    Ok(DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(diag_entry(OpKind::I1, i, params), 0.0)
        } else if i == j + 1 {
            rot * offdiag_entry(OpKind::I1, j, params)
        } else if j == i + 1 {
            rot.conj() * offdiag_entry(OpKind::I1, i, params)
        } else {
            C64::new(0.0, 0.0)
        }
    }))
}

/// Essential spectrum location implied by the coefficient limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Essential {
    Interval { lo: f64, hi: f64 },
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoefficientLimits {
    /// Signed infinity when the sequence diverges.
    pub diag_limit: f64,
    pub offdiag_limit: f64,
    pub essential: Essential,
}

const LIMIT_INDEX: usize = 200;

/// Limits of the diagonal and off-diagonal sequences, taken at `k = 200`
/// and accepted only if `k = 400` agrees.
pub fn coefficient_limits(kind: OpKind, params: &RepParams) -> CoefficientLimits {
    let settle = |f: &dyn Fn(usize) -> f64| {
        let near = f(LIMIT_INDEX);
        let far = f(2 * LIMIT_INDEX);
        if far.is_finite() && (far - near).abs() <= 1e-10 * far.abs().max(1.0) {
            far
        } else {
            f64::INFINITY.copysign(far - near)
        }
    };
    let d = settle(&|k| diag_entry(kind, k, params));
    let a = settle(&|k| offdiag_entry(kind, k, params));
    let essential = if d.is_finite() && a.is_finite() {
        Essential::Interval {
            lo: d - 2.0 * a.abs(),
            hi: d + 2.0 * a.abs(),
        }
    } else {
        Essential::Unbounded
    };
    CoefficientLimits {
        diag_limit: d,
        offdiag_limit: a,
        essential,
    }
}

/// Tridiagonal matrix-vector product.
pub fn apply(op: &JacobiOperator, v: &[f64]) -> Result<Vec<f64>> {
    let n = op.dim();
    if v.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: v.len(),
        });
    }
    Ok((0..n)
        .map(|i| {
            let mut s = op.diag[i] * v[i];
            if i > 0 {
                s += op.offdiag[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                s += op.offdiag[i] * v[i + 1];
            }
            s
        })
        .collect())
}

/// Arithmetic used by [`reconstruct_basis_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    Double,
    /// Double-double (about 32 significant digits).
    Extended,
}

/// How `p_n(Op) e_0` is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Evaluation {
    /// Expand `p_n` in powers of `lambda` through its recurrence, then Horner.
    PowerBasis,
    /// Run the recurrence directly on vectors:
    /// `v_{k+1} = (a_k + b_k nu(Op)) v_k + c_k v_{k-1}`.
    VectorRecurrence,
}

/// `|| p_n(Op) e_0 - e_n ||_2` on the `dim`-section, where `p_n` is the
/// normalized overlap polynomial of `kind`.
///
/// Runs the power-basis route in double-double arithmetic: the expansion
/// coefficients of the geometric-ladder families grow like `q^{-n^2/2}`, which
/// swamps double precision already at moderate `n`.
pub fn reconstruct_basis(kind: OpKind, n: usize, params: &RepParams, dim: usize) -> Result<f64> {
    reconstruct_basis_with(
        kind,
        n,
        params,
        dim,
        Evaluation::PowerBasis,
        Precision::Extended,
    )
}

pub fn reconstruct_basis_with(
    kind: OpKind,
    n: usize,
    params: &RepParams,
    dim: usize,
    evaluation: Evaluation,
    precision: Precision,
) -> Result<f64> {
    if dim <= n {
        return Err(Error::Domain(format!(
            "dimension {dim} must exceed the degree {n}"
        )));
    }
    overlap_family(kind, params)?;
    let residual = match precision {
        Precision::Double => reconstruct_residual(
            kind,
            n,
            dim,
            evaluation,
            &QPowers::new(params.base, params.l),
            params.l,
        ),
        Precision::Extended => reconstruct_residual(
            kind,
            n,
            dim,
            evaluation,
            &QPowers::new_extended(params.base, params.l),
            DoubleDouble::from(params.l),
        ),
    };
    residual
        .filter(|r| r.is_finite())
        .ok_or_else(|| Error::Overflow(format!("{kind} reconstruction at degree {n}")))
}

fn tridiagonal_apply<T: Real>(diag: &[T], off: &[T], v: &[T]) -> Vec<T> {
    let n = diag.len();
    (0..n)
        .map(|i| {
            let mut s = diag[i] * v[i];
            if i > 0 {
                s = s + off[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                s = s + off[i] * v[i + 1];
            }
            s
        })
        .collect()
}

fn reconstruct_residual<T: Real>(
    kind: OpKind,
    n: usize,
    dim: usize,
    evaluation: Evaluation,
    pw: &QPowers<T>,
    l: T,
) -> Option<f64> {
    let zero = T::zero();
    let alpha = l + l - T::one();
    let tag = overlap_tag(kind);
    let (diag, mut off): (Vec<T>, Vec<T>) = (0..dim).map(|k| entries(kind, k, pw, l)).unzip();
    off.pop();
    let (nu0, nu1) = argument_map_gen(kind, pw);
    let mut v = match evaluation {
        Evaluation::PowerBasis => {
            // coefficients of p_k in powers of lambda
            let mut prev: Vec<T> = Vec::new();
            let mut cur = vec![T::one()];
            for k in 0..n {
                let (a, b, c) = recurrence_step(tag, k, pw, alpha);
                let mut next = vec![zero; k + 2];
                for (j, &x) in cur.iter().enumerate() {
                    next[j] = next[j] + (a + b * nu0) * x;
                    next[j + 1] = next[j + 1] + b * nu1 * x;
                }
                for (j, &x) in prev.iter().enumerate() {
                    next[j] = next[j] + c * x;
                }
                prev = std::mem::replace(&mut cur, next);
            }
            let mut v = vec![zero; dim];
            for &c in cur.iter().rev() {
                v = tridiagonal_apply(&diag, &off, &v);
                v[0] = v[0] + c;
            }
            v
        }
        Evaluation::VectorRecurrence => {
            let mut prev = vec![zero; dim];
            let mut cur = vec![zero; dim];
            cur[0] = T::one();
            for k in 0..n {
                let (a, b, c) = recurrence_step(tag, k, pw, alpha);
                let op_cur = tridiagonal_apply(&diag, &off, &cur);
                let next = (0..dim)
                    .map(|i| (a + b * nu0) * cur[i] + b * nu1 * op_cur[i] + c * prev[i])
                    .collect();
                prev = std::mem::replace(&mut cur, next);
            }
            cur
        }
    };
    let scale = overlap_scale_gen(kind, n, pw, l);
    for x in v.iter_mut() {
        *x = *x * scale;
    }
    v[n] = v[n] - T::one();
    Some(v.iter().fold(zero, |acc, &x| acc + x * x).sqrt().to_f64())
}

fn overlap_tag(kind: OpKind) -> FamilyTag {
    match kind {
        OpKind::I1 | OpKind::I1Phi => FamilyTag::ContQLaguerre,
        OpKind::I2Psi => FamilyTag::LittleQLaguerre,
        OpKind::I3 | OpKind::I3Psi => FamilyTag::QLaguerre,
        OpKind::I4Psi => FamilyTag::Phi31,
        OpKind::Classical => FamilyTag::LaguerreClassical,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_names_round_trip() {
        for kind in OpKind::ALL {
            assert_eq!(kind.name().parse::<OpKind>().unwrap(), kind);
        }
        assert_eq!("I2".parse::<OpKind>().unwrap(), OpKind::I2Psi);
        assert!("I5".parse::<OpKind>().is_err());
    }

    #[test]
    fn ladder_first_entry() {
        let p = RepParams::new(0.5, 1.0).unwrap();
        let lad = build_ladder(&p, 1).unwrap();
        assert_eq!(lad.j0_diag, vec![1.0]);
        assert!(lad.jplus_sub.is_empty());
        let lad = build_ladder(&p, 3).unwrap();
        let expected = (0.5f64.sqrt() + 1.0 / 0.5f64.sqrt()).sqrt();
        assert!((lad.jplus_sub[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn i1_limits() {
        let p = RepParams::new(0.5, 1.0).unwrap();
        let lim = coefficient_limits(OpKind::I1, &p);
        let sq = 0.5f64.sqrt();
        assert!((lim.diag_limit - sq / 0.5).abs() < 1e-12);
        assert!((lim.offdiag_limit.abs() - sq).abs() < 1e-12);
        match lim.essential {
            Essential::Interval { lo, hi } => {
                assert!(lo.abs() < 1e-12);
                assert!((hi - 4.0 * sq).abs() < 1e-12);
            }
            Essential::Unbounded => panic!("I1 is bounded"),
        }
        let classical = coefficient_limits(OpKind::Classical, &p);
        assert_eq!(classical.essential, Essential::Unbounded);
        assert_eq!(classical.diag_limit, f64::INFINITY);
    }

    #[test]
    fn apply_checks_dimension() {
        let p = RepParams::new(0.5, 1.0).unwrap();
        let op = build_operator(OpKind::I1, &p, 4).unwrap();
        assert!(matches!(
            apply(&op, &[1.0; 3]),
            Err(Error::DimensionMismatch {
                expected: 4,
                found: 3
            })
        ));
        let e0 = apply(&op, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(e0, vec![op.diag[0], op.offdiag[0], 0.0, 0.0]);
    }

    #[test]
    fn reconstruction_trivial_degree() {
        let p = RepParams::new(0.5, 1.0).unwrap();
        assert_eq!(reconstruct_basis(OpKind::I3, 0, &p, 4).unwrap(), 0.0);
        assert!(reconstruct_basis(OpKind::I3, 4, &p, 4).is_err());
    }

    #[test]
    fn i3_overflow_is_reported() {
        let p = RepParams::new(0.3, 1.0).unwrap();
        assert!(matches!(
            build_operator(OpKind::I3, &p, 400),
            Err(Error::Overflow(_))
        ));
    }
}
