use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::norms::space_norm;
use crate::rearrange::{rearrange, SimpleFunction};

use super::kfunc::KFunctional;
use super::CoupleSpec;

/// Relative slack allowed for the truncation minimizer.
const HOLDER_REL_TOL: f64 = 1e-6;
const HOLDER_ABS_TOL: f64 = 1e-14;

type TwoArg = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type OneArg = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Growth {
    Constants { m0: f64, m1: f64 },
    Functions { f: TwoArg, g: OneArg },
}

/// Exponents and growth data of a mapping `T` with
/// `‖Ta - Tb‖_{Y0} ≤ f(‖a‖, ‖b‖) ‖a - b‖^α` and `‖Ta‖_{Y1} ≤ g(‖a‖) ‖a‖_{X1}^β`.
#[derive(Clone)]
pub struct HolderProfile {
    pub alpha: f64,
    pub beta: f64,
    growth: Growth,
}

impl fmt::Debug for HolderProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("HolderProfile");
        d.field("alpha", &self.alpha).field("beta", &self.beta);
        match self.growth {
            Growth::Constants { m0, m1 } => d.field("m0", &m0).field("m1", &m1),
            Growth::Functions { .. } => d.field("growth", &"functions"),
        };
        d.finish()
    }
}

fn check_exponents(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Parameter(format!("Hölder exponent alpha = {alpha} must lie in (0, 1]")));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Parameter(format!("beta = {beta} must be positive")));
    }
    Ok(())
}

impl HolderProfile {
    /// Constant growth: `f ≡ M0`, `g ≡ M1`.
    pub fn with_constants(alpha: f64, beta: f64, m0: f64, m1: f64) -> Result<Self> {
        check_exponents(alpha, beta)?;
        if !(m0 > 0.0 && m1 > 0.0 && m0.is_finite() && m1.is_finite()) {
            return Err(Error::Parameter(format!("constants M0 = {m0}, M1 = {m1} must be positive")));
        }
        Ok(HolderProfile {
            alpha,
            beta,
            growth: Growth::Constants { m0, m1 },
        })
    }

    /// Growth functions; both should be nondecreasing and continuous.
    pub fn with_functions<F, G>(alpha: f64, beta: f64, f: F, g: G) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        check_exponents(alpha, beta)?;
        Ok(HolderProfile {
            alpha,
            beta,
            growth: Growth::Functions {
                f: Arc::new(f),
                g: Arc::new(g),
            },
        })
    }

    /// `G(σ) = max(g(2σ), f(σ, 2σ))`.
    pub fn growth_bound(&self, sigma: f64) -> f64 {
        match &self.growth {
            Growth::Constants { m0, m1 } => m0.max(*m1),
            Growth::Functions { f, g } => g(2.0 * sigma).max(f(sigma, 2.0 * sigma)),
        }
    }
}

/// Which K-functional estimate to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HolderCheckMode {
    /// `K(Ta, t^β) ≤ G(‖a‖)(K(a,t)^β + K(a,t)^α)` for `a` and `b`.
    Theorem,
    /// `K(Ta, t^β) ≤ G(‖a‖)(1 + ‖a‖^{β-α}) K(a,t)^α`, for `β ≥ α`.
    Sharp,
    /// `K(Ta - Tb, t^α) ≤ 2 max(M0, M1) K(a - b, t)^α`; constants only.
    Difference,
}

/// Two data elements and their images; `a`, `b` and `ta`, `tb` must share partitions.
#[derive(Debug, Clone, PartialEq)]
pub struct HolderPair {
    pub a: SimpleFunction,
    pub ta: SimpleFunction,
    pub b: SimpleFunction,
    pub tb: SimpleFunction,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderRow {
    pub pair_id: usize,
    pub element: String,
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
}

impl HolderRow {
    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }

    pub fn violated(&self) -> bool {
        self.lhs > self.rhs * (1.0 + HOLDER_REL_TOL) + HOLDER_ABS_TOL
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderReport {
    pub mode: HolderCheckMode,
    pub rows: Vec<HolderRow>,
    pub violations: usize,
    /// Largest `lhs / rhs` over rows with `rhs > 0`.
    pub max_ratio: f64,
    pub pass: bool,
}

fn input_err(what: &str, e: Error) -> Error {
    Error::Input(format!("{what}: {e}"))
}

fn k_for(f: &SimpleFunction, couple: &CoupleSpec, what: &str) -> Result<KFunctional> {
    KFunctional::new(&rearrange(f), couple).map_err(|e| input_err(what, e))
}

pub fn holder_k_check(
    pairs: &[HolderPair],
    profile: &HolderProfile,
    couple_x: &CoupleSpec,
    couple_y: &CoupleSpec,
    t_grid: &[f64],
    mode: HolderCheckMode,
) -> Result<HolderReport> {
    if let Some(t) = t_grid.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
        return Err(Error::Domain(format!("grid point t = {t} outside (0, 1)")));
    }
    let HolderProfile { alpha, beta, .. } = *profile;
    match (mode, &profile.growth) {
        (HolderCheckMode::Sharp, _) if beta < alpha => {
            return Err(Error::Parameter(format!(
                "sharp estimate needs beta >= alpha, got beta = {beta}, alpha = {alpha}"
            )))
        }
        (HolderCheckMode::Difference, Growth::Functions { .. }) => {
            return Err(Error::Parameter("difference estimate needs constant growth".into()))
        }
        _ => {}
    }
    let mut rows = Vec::new();
    for (pair_id, pair) in pairs.iter().enumerate() {
        if mode == HolderCheckMode::Difference {
            let d = pair.a.sub_coupled(&pair.b).map_err(|e| input_err("a - b", e))?;
            let td = pair.ta.sub_coupled(&pair.tb).map_err(|e| input_err("Ta - Tb", e))?;
            let kx = k_for(&d, couple_x, "K(a - b)")?;
            let ky = k_for(&td, couple_y, "K(Ta - Tb)")?;
            let c = 2.0 * profile.growth_bound(0.0);
            for &t in t_grid {
                let lhs = ky.eval(t.powf(alpha)).map_err(|e| input_err("K(Ta - Tb)", e))?;
                let k = kx.eval(t).map_err(|e| input_err("K(a - b)", e))?;
                rows.push(HolderRow {
                    pair_id,
                    element: "a-b".into(),
                    t,
                    lhs,
                    rhs: c * k.powf(alpha),
                });
            }
            continue;
        }
        for (element, x, tx) in [("a", &pair.a, &pair.ta), ("b", &pair.b, &pair.tb)] {
            let nx = space_norm(x, &couple_x.x0).map_err(|e| input_err(&format!("norm of {element} in X0"), e))?;
            let kx = k_for(x, couple_x, element)?;
            let ky = k_for(tx, couple_y, element)?;
            let g = profile.growth_bound(nx);
            for &t in t_grid {
                let lhs = ky.eval(t.powf(beta)).map_err(|e| input_err(element, e))?;
                let k = kx.eval(t).map_err(|e| input_err(element, e))?;
                let rhs = match mode {
                    HolderCheckMode::Theorem => g * (k.powf(beta) + k.powf(alpha)),
                    _ => g * (1.0 + nx.powf(beta - alpha)) * k.powf(alpha),
                };
                rows.push(HolderRow {
                    pair_id,
                    element: element.into(),
                    t,
                    lhs,
                    rhs,
                });
            }
        }
    }
    let violations = rows.iter().filter(|r| r.violated()).count();
    let max_ratio = rows
        .iter()
        .filter(|r| r.rhs > 0.0)
        .map(|r| r.lhs / r.rhs)
        .fold(0.0, f64::max);
    Ok(HolderReport {
        mode,
        rows,
        violations,
        max_ratio,
        pass: violations == 0,
    })
}
