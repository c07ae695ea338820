//! Polynomial families, overlap coefficients and eigenfunction expansions.
//!
//! Every family is available through its three-term recurrence and through an
//! explicit basic hypergeometric sum, so the two can be checked against each other.

mod dual;
mod eigenfunctions;
mod families;
mod genfun;
mod overlap;

pub use dual::{difference_identity_residual, dual_action_residual, DualKind};
pub use eigenfunctions::eigenfunction_coeffs;
pub(crate) use families::recurrence_step;
pub use families::{eval_poly, eval_poly_all, FamilyTag, PolyFamily, Route};
pub use genfun::{generating_function_check, GeneratingForm};
pub(crate) use overlap::{argument_map_gen, overlap_family, overlap_scale_gen};
pub use overlap::{overlap_coeff, overlap_sequence, BasisNormalizer, SpectralPoint};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::qcore::QBase;

/// Deformation and representation parameters threaded through every computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RepParams {
    pub base: QBase,
    /// Lowest weight.
    pub l: f64,
    /// Phase in `[0, 2 pi)`.
    pub psi: f64,
    /// Scale of the bilateral discrete measure.
    pub c: Option<f64>,
}

impl RepParams {
    pub fn new(q: f64, l: f64) -> Result<Self> {
        let base = QBase::new(q)?;
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::Domain(format!(
                "lowest weight l must be positive, got {l}"
            )));
        }
        Ok(Self {
            base,
            l,
            psi: 0.0,
            c: None,
        })
    }

    pub fn with_psi(mut self, psi: f64) -> Result<Self> {
        if !(psi.is_finite() && (0.0..std::f64::consts::TAU).contains(&psi)) {
            return Err(Error::Domain(format!(
                "psi must lie in [0, 2pi), got {psi}"
            )));
        }
        self.psi = psi;
        Ok(self)
    }

    pub fn with_c(mut self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::Domain(format!("c must be positive, got {c}")));
        }
        self.c = Some(c);
        Ok(self)
    }

    #[inline]
    pub fn q(&self) -> f64 {
        self.base.q()
    }

    /// Laguerre-type parameter `2l - 1`.
    #[inline]
    pub fn alpha(&self) -> f64 {
        2.0 * self.l - 1.0
    }

    /// Little q-Laguerre parameter `q^{2l-1}`.
    #[inline]
    pub fn little_a(&self) -> f64 {
        self.base.pow(self.alpha())
    }

    /// Measure scale, defaulting to 1.
    #[inline]
    pub fn scale(&self) -> f64 {
        self.c.unwrap_or(1.0)
    }
}
