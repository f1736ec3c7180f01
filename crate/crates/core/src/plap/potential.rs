use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::grid::Grid;

/// Regularization of `|σ|^{m1-1}` in the derivative of the potential.
const DERIV_REG: f64 = 1e-12;

/// Coefficient field of a potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coefficient {
    Constant(f64),
    /// One value per grid node.
    Field(Vec<f64>),
}

/// `V(x, σ) = c(x) sign(σ) |σ|^{m1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub coefficient: Coefficient,
    pub m1: f64,
}

impl PotentialSpec {
    pub fn zero() -> Self {
        PotentialSpec {
            coefficient: Coefficient::Constant(0.0),
            m1: 1.0,
        }
    }

    pub fn constant(c: f64, m1: f64) -> Self {
        PotentialSpec {
            coefficient: Coefficient::Constant(c),
            m1,
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.coefficient {
            Coefficient::Constant(c) => *c == 0.0,
            Coefficient::Field(v) => v.iter().all(|&c| c == 0.0),
        }
    }

    /// Largest coefficient value.
    pub fn sup_coefficient(&self) -> f64 {
        match &self.coefficient {
            Coefficient::Constant(c) => *c,
            Coefficient::Field(v) => v.iter().copied().fold(0.0, f64::max),
        }
    }

    /// Upper limit for `m1` when `p < n`: `(p - 1)(1 + 1/(n - p))`.
    pub fn growth_limit(p: f64, n: usize) -> Option<f64> {
        let n = n as f64;
        (p < n).then(|| (p - 1.0) * (1.0 + 1.0 / (n - p)))
    }

    pub fn validate(&self, grid: &Grid, p: f64) -> Result<()> {
        let bad = |c: f64| !(c >= 0.0 && c.is_finite());
        match &self.coefficient {
            Coefficient::Constant(c) if bad(*c) => {
                return Err(Error::Domain(format!("potential coefficient {c} must be finite and nonnegative")))
            }
            Coefficient::Field(v) => {
                if v.len() != grid.num_nodes() {
                    return Err(Error::Input(format!(
                        "coefficient field has {} values for {} nodes",
                        v.len(),
                        grid.num_nodes()
                    )));
                }
                if let Some(c) = v.iter().find(|&&c| bad(c)) {
                    return Err(Error::Domain(format!("potential coefficient {c} must be finite and nonnegative")));
                }
            }
            _ => {}
        }
        if self.is_zero() {
            return Ok(());
        }
        if !(self.m1 >= p - 1.0 && self.m1.is_finite()) {
            return Err(Error::Domain(format!("potential exponent m1 = {} must be at least p - 1 = {}", self.m1, p - 1.0)));
        }
        if let Some(limit) = PotentialSpec::growth_limit(p, grid.dimension()) {
            if self.m1 >= limit {
                return Err(Error::Domain(format!("potential exponent m1 = {} must be below {limit}", self.m1)));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn coefficient_at(&self, node: usize) -> f64 {
        match &self.coefficient {
            Coefficient::Constant(c) => *c,
            Coefficient::Field(v) => v[node],
        }
    }

    /// `V(x, σ)` at a node.
    #[inline]
    pub fn value(&self, node: usize, sigma: f64) -> f64 {
        let c = self.coefficient_at(node);
        if c == 0.0 {
            0.0
        } else {
            c * sigma.signum() * sigma.abs().powf(self.m1)
        }
    }

    /// `∫_0^σ V(x, s) ds`.
    #[inline]
    pub fn primitive(&self, node: usize, sigma: f64) -> f64 {
        let c = self.coefficient_at(node);
        if c == 0.0 {
            0.0
        } else {
            c * sigma.abs().powf(self.m1 + 1.0) / (self.m1 + 1.0)
        }
    }

    /// Regularized `∂V/∂σ`.
    #[inline]
    pub fn derivative(&self, node: usize, sigma: f64) -> f64 {
        let c = self.coefficient_at(node);
        if c == 0.0 {
            0.0
        } else {
            c * self.m1 * (sigma * sigma + DERIV_REG).powf(0.5 * (self.m1 - 1.0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn potential_values() {
        let v = PotentialSpec::constant(2.0, 1.5);
        assert_eq!(v.value(0, 0.0), 0.0);
        assert!((v.value(0, -4.0) + 16.0).abs() < 1e-12);
        assert!((v.primitive(0, 4.0) - 2.0 * 32.0 / 2.5).abs() < 1e-12);
        let g = Grid::square(4).unwrap();
        assert!(v.validate(&g, 2.5).is_ok());
        // p = 1.5 < n = 2: m1 must stay below 0.5 (1 + 2) = 1.5.
        assert!(PotentialSpec::constant(1.0, 1.5).validate(&g, 1.5).is_err());
        assert!(PotentialSpec::constant(1.0, 0.4).validate(&g, 1.5).is_err());
        assert!(PotentialSpec::constant(-1.0, 1.0).validate(&g, 2.5).is_err());
        assert!(PotentialSpec::zero().validate(&g, 5.0).is_ok());
    }
}
