//! Real interpolation with a logarithmic parameter: K-functionals of
//! rearrangement-invariant couples, the interpolation norms built from them,
//! symbolic identification of the resulting spaces, and K-functional
//! estimates for Hölder-type mappings.

mod holder;
mod identify;
mod kfunc;

pub use holder::{holder_k_check, HolderCheckMode, HolderPair, HolderProfile, HolderReport, HolderRow};
pub use identify::{
    identify_interp_space, karamata_quotient, verify_identification, Identification, IdentificationCase,
    KaramataCheck, VerificationReport, KARAMATA_POINTS, KARAMATA_TOL,
};
pub use kfunc::{
    k_functional, k_functional_truncation, log_interp_norm, log_interp_outcome, KFunctional, LogInterpOutcome,
    T_GRID_INTERVALS, T_MIN,
};

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::norms::{embedding_holds, ext_real, SpaceSpec};

/// A compatible couple `(X0, X1)` of spaces on the unit domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoupleSpec {
    pub x0: SpaceSpec,
    pub x1: SpaceSpec,
    /// `X1 ⊂ X0` according to the inclusion registry.
    pub x1_inside_x0: bool,
}

#[derive(Deserialize)]
struct RawCouple {
    x0: SpaceSpec,
    x1: SpaceSpec,
}

impl<'de> Deserialize<'de> for CoupleSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawCouple::deserialize(d)?;
        Ok(CoupleSpec::new(raw.x0, raw.x1))
    }
}

impl CoupleSpec {
    pub fn new(x0: SpaceSpec, x1: SpaceSpec) -> Self {
        CoupleSpec {
            x0,
            x1,
            x1_inside_x0: embedding_holds(&x1, &x0),
        }
    }

    pub fn swapped(&self) -> Self {
        CoupleSpec::new(self.x1, self.x0)
    }

    pub fn validate(&self) -> Result<()> {
        self.x0.validate()?;
        self.x1.validate()
    }

    /// The couple together with parameters that are meaningful for it.
    pub fn check_params(&self, params: &InterpParams) -> Result<()> {
        self.validate()?;
        params.validate()?;
        if params.is_endpoint() && !self.x1_inside_x0 {
            return Err(Error::Parameter(format!(
                "theta = {} needs {} inside {}",
                params.theta, self.x1, self.x0
            )));
        }
        Ok(())
    }
}

/// Parameters `(θ, q, α)` of the space `(X0, X1)_{θ,q;α}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterpParams {
    pub theta: f64,
    #[serde(with = "ext_real")]
    pub q: f64,
    pub alpha: f64,
}

impl InterpParams {
    pub fn new(theta: f64, q: f64, alpha: f64) -> Self {
        InterpParams { theta, q, alpha }
    }

    pub fn is_endpoint(&self) -> bool {
        self.theta == 0.0 || self.theta == 1.0
    }

    pub fn validate(&self) -> Result<()> {
        let InterpParams { theta, q, alpha } = *self;
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::Parameter(format!("theta = {theta} outside [0, 1]")));
        }
        if !(q >= 1.0) {
            return Err(Error::Parameter(format!("q = {q} must be at least 1")));
        }
        if !alpha.is_finite() {
            return Err(Error::Parameter(format!("alpha = {alpha} must be finite")));
        }
        let inv_q = 1.0 / q;
        let ok = if theta == 0.0 {
            alpha >= -inv_q
        } else if theta == 1.0 {
            alpha < -inv_q || (q.is_infinite() && alpha == 0.0)
        } else {
            true
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Parameter(format!(
                "theta = {theta}, q = {q}, alpha = {alpha}: at theta = 0 alpha must be >= -1/q, at theta = 1 alpha must be < -1/q"
            )))
        }
    }
}
