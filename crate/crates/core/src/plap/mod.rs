//! Discrete weak solutions of `-Δ_p u + V(x, u) = f` with homogeneous
//! Dirichlet data on uniform grids over the unit interval or square.

mod banded;
mod grid;
mod monotone;
mod potential;
mod solver;

pub use banded::BandedSpd;
pub use grid::{GradientField, Grid, GridFunction};
pub use monotone::{coercivity_ratio, comparison_holds, monotonicity_check, MonotonicityReport, MONOTONICITY_SLACK};
pub use potential::{Coefficient, PotentialSpec};
pub use solver::{
    gradient_norm, solution_map_gradient, solve_weak, solve_with, truncation_energy_sup, weak_residual, SolveInfo,
    Solution, SolverMethod, SolverOptions, DEFAULT_TOL, EPS_REG, MAX_ITERATIONS,
};

use crate::error::{Error, Result};

/// `T_k(σ) = (|k + σ| - |k - σ|) / 2`, the clamp of `σ` to `[-k, k]`.
pub fn truncate(sigma: f64, k: f64) -> Result<f64> {
    if !(k > 0.0) {
        return Err(Error::Domain(format!("truncation level k = {k} must be positive")));
    }
    Ok(((k + sigma).abs() - (k - sigma).abs()) / 2.0)
}

/// Exponents attached to the dimension `n` and the operator exponent `p`.
pub mod exponents {
    use crate::error::{Error, Result};

    /// `n' = n / (n - 1)`.
    pub fn dimension_conjugate(n: usize) -> Result<f64> {
        if n < 2 {
            return Err(Error::Domain(format!("dimension {n} has no finite conjugate")));
        }
        let n = n as f64;
        Ok(n / (n - 1.0))
    }

    /// `p* = np / (n - p)` for `p < n`; `2p` otherwise, where every finite
    /// exponent is admissible and one has to be picked.
    pub fn sobolev(n: usize, p: f64) -> f64 {
        let n = n as f64;
        if p < n {
            n * p / (n - p)
        } else {
            2.0 * p
        }
    }

    /// `(p*)'`, equal to `np / (np - n + p)` when `p < n`.
    pub fn sobolev_conjugate(n: usize, p: f64) -> f64 {
        let s = sobolev(n, p);
        s / (s - 1.0)
    }

    /// `p - 1`-rescaled exponent `n'(p - 1)` of the gradient for `L^1` data.
    pub fn gradient_weak_exponent(n: usize, p: f64) -> Result<f64> {
        Ok(dimension_conjugate(n)? * (p - 1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::exponents::*;
    use super::*;

    #[test]
    fn truncation_examples() {
        assert_eq!(truncate(3.0, 2.0).unwrap(), 2.0);
        assert_eq!(truncate(-5.0, 2.0).unwrap(), -2.0);
        assert_eq!(truncate(1.0, 2.0).unwrap(), 1.0);
        assert!(truncate(1.0, 0.0).is_err());
    }

    #[test]
    fn exponent_bookkeeping() {
        assert_eq!(dimension_conjugate(2).unwrap(), 2.0);
        assert!((sobolev(3, 2.0) - 6.0).abs() < 1e-15);
        assert!((sobolev_conjugate(3, 2.0) - 6.0 / 5.0).abs() < 1e-15);
        for n in 2..6 {
            let p = 2.0 * n as f64 / (n as f64 + 1.0);
            assert!((sobolev_conjugate(n, p) - p).abs() < 1e-12);
            let nf = n as f64;
            let q = 1.3;
            assert!((sobolev_conjugate(n, q) - nf * q / (nf * q - nf + q)).abs() < 1e-12);
        }
        assert_eq!(sobolev(2, 3.0), 6.0);
        assert!((sobolev_conjugate(2, 3.0) - 1.2).abs() < 1e-15);
        assert_eq!(gradient_weak_exponent(2, 3.0).unwrap(), 4.0);
    }

    proptest::proptest! {
        #[test]
        fn truncate_is_clamp(s in -1e6f64..1e6, k in 1e-6f64..1e6) {
            let t = truncate(s, k).unwrap();
            let c = s.clamp(-k, k);
            proptest::prop_assert!((t - c).abs() <= 1e-9 * (1.0 + s.abs()));
        }
    }
}
