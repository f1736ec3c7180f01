use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{self, QuadOptions};

/// Relative accuracy of the weighted integrals when no closed form applies.
pub const DEFAULT_QUAD_TOL: f64 = 1e-8;

/// Largest integer log-exponent for which the closed-form primitive is used.
const MAX_CLOSED_FORM_DEGREE: i32 = 64;

/// The weight `t^a (1 - log t)^b` on `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogPowerWeight {
    pub a: f64,
    pub b: f64,
}

/// `1 - ln t`, the logarithmic variable on `(0, 1]`.
#[inline]
pub fn log_var(t: f64) -> f64 {
    1.0 - t.ln()
}

impl LogPowerWeight {
    pub const UNIT: LogPowerWeight = LogPowerWeight { a: 0.0, b: 0.0 };

    pub fn new(a: f64, b: f64) -> Self {
        LogPowerWeight { a, b }
    }

    pub fn power(a: f64) -> Self {
        LogPowerWeight { a, b: 0.0 }
    }

    pub fn product(self, other: LogPowerWeight) -> LogPowerWeight {
        LogPowerWeight {
            a: self.a + other.a,
            b: self.b + other.b,
        }
    }

    /// Raises the weight to a power: `w^r = t^{ra} (1 - log t)^{rb}`.
    pub fn pow(self, r: f64) -> LogPowerWeight {
        LogPowerWeight {
            a: self.a * r,
            b: self.b * r,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let mut v = if self.a == 0.0 { 1.0 } else { t.powf(self.a) };
        if self.b != 0.0 {
            v *= log_var(t).powf(self.b);
        }
        v
    }

    fn integer_log_exponent(&self) -> Option<i32> {
        if self.b.fract() == 0.0 && self.b.abs() <= MAX_CLOSED_FORM_DEGREE as f64 {
            Some(self.b as i32)
        } else {
            None
        }
    }

    /// Whether `∫_0^x w` is finite for `x > 0`.
    pub fn integrable_at_zero(&self) -> bool {
        let c = self.a + 1.0;
        if c.abs() < 1e-12 {
            self.b < -1.0
        } else {
            c > 0.0
        }
    }

    /// Supremum of the weight over `[x0, x1]` (closed interval, `0 ≤ x0 ≤ x1 ≤ 1`).
    /// Returns `+∞` when the weight is unbounded near `x0 = 0`.
    pub fn sup_on(&self, x0: f64, x1: f64) -> f64 {
        // d/dt log w = (a - b / (1 - log t)) / t, zero where 1 - log t = b / a.
        let at = |t: f64| {
            if t == 0.0 {
                self.limit_at_zero()
            } else {
                self.eval(t)
            }
        };
        let mut best = at(x0).max(at(x1));
        if self.a > 0.0 && self.b > 0.0 {
            let u_star = self.b / self.a;
            if u_star >= 1.0 {
                let t_star = (1.0 - u_star).exp();
                if t_star > x0 && t_star < x1 {
                    best = best.max(self.eval(t_star));
                }
            }
        }
        best
    }

    /// Limit of the weight as `t → 0+` (`+∞` when unbounded).
    pub fn limit_at_zero(&self) -> f64 {
        if self.a > 0.0 {
            0.0
        } else if self.a < 0.0 || self.b > 0.0 {
            f64::INFINITY
        } else if self.b < 0.0 {
            0.0
        } else {
            1.0
        }
    }

    /// `∫_{x0}^{x1} t^a (1 - log t)^b dt` for `0 ≤ x0 ≤ x1 ≤ 1`.
    pub fn integral(&self, x0: f64, x1: f64) -> Result<f64> {
        self.integral_with(x0, x1, DEFAULT_QUAD_TOL)
    }

    pub fn integral_with(&self, x0: f64, x1: f64, rel_tol: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x0) || !(x0..=1.0).contains(&x1) {
            return Err(Error::Domain(format!(
                "weighted integral over [{x0}, {x1}] is outside (0, 1)"
            )));
        }
        if x1 == x0 {
            return Ok(0.0);
        }
        if self.a == 0.0 && self.b == 0.0 {
            return Ok(x1 - x0);
        }
        let c = self.a + 1.0;
        let u1 = log_var(x1);
        if x0 == 0.0 && !self.integrable_at_zero() {
            return Err(Error::Divergent(format!(
                "t^{} (1 - log t)^{} is not integrable at 0",
                self.a, self.b
            )));
        }
        let value = if c.abs() < 1e-12 {
            // ∫ u^b du over [u1, u0]
            let u0 = if x0 == 0.0 {
                f64::INFINITY
            } else {
                log_var(x0)
            };
            if (self.b + 1.0).abs() < 1e-15 {
                (u0 / u1).ln()
            } else {
                let e = self.b + 1.0;
                let hi = if u0.is_infinite() { 0.0 } else { u0.powf(e) };
                (hi - u1.powf(e)) / e
            }
        } else if let Some(n) = self
            .integer_log_exponent()
            .filter(|&n| n >= 0 && (x0 == 0.0 && c > 0.0 || c.abs() >= 0.25 && (c > 0.0 || n <= 16)))
        {
            closed_primitive(x1, c, n) - closed_primitive(x0, c, n)
        } else {
            self.quadrature(x0, x1, rel_tol)?
        };
        if value.is_infinite() {
            return Err(Error::Overflow(format!(
                "weighted integral t^{} (1 - log t)^{} over [{x0}, {x1}]",
                self.a, self.b
            )));
        }
        Ok(value.max(0.0))
    }

    fn quadrature(&self, x0: f64, x1: f64, rel_tol: f64) -> Result<f64> {
        // t = e^{1 - u}: ∫_{x0}^{x1} t^a u^b dt = ∫_{u1}^{u0} e^{c(1 - u)} u^b du.
        let c = self.a + 1.0;
        let b = self.b;
        let u1 = log_var(x1);
        let opts = QuadOptions {
            rel_tol,
            ..QuadOptions::default()
        };
        let value = if x0 == 0.0 {
            // v = c (u - u1) spreads the exponential decay over a unit scale.
            let scale = (c * (1.0 - u1)).exp() / c;
            let g = |v: f64| (-v).exp() * (u1 + v / c).powf(b);
            quad::integrate(g, 0.0, f64::INFINITY, &opts).value * scale
        } else {
            let u0 = log_var(x0);
            let g = |u: f64| (c * (1.0 - u)).exp() * u.powf(b);
            quad::integrate(g, u1, u0, &opts).value
        };
        Ok(value)
    }
}

/// Closed-form primitive `G(x) = x^c Σ_k n!/(k! c^{n-k+1}) (1 - log x)^k` of
/// `t^{c-1} (1 - log t)^n`, with `G(0) = 0` for `c > 0`.
fn closed_primitive(x: f64, c: f64, n: i32) -> f64 {
    if x == 0.0 {
        return if c > 0.0 { 0.0 } else { f64::INFINITY };
    }
    if n == 0 {
        return x.powf(c) / c;
    }
    let u = log_var(x);
    // β_k = n!/(k! c^{n-k+1}), built downward from β_n = 1/c.
    let mut beta = 1.0 / c;
    let mut uk = u.powi(n);
    let mut sum = beta * uk;
    for k in (1..=n).rev() {
        beta *= k as f64 / c;
        uk /= u;
        sum += beta * uk;
    }
    x.powf(c) * sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, QuadOptions};

    fn brute(w: LogPowerWeight, x0: f64, x1: f64) -> f64 {
        let opts = QuadOptions {
            rel_tol: 1e-12,
            ..QuadOptions::default()
        };
        integrate(|t| w.eval(t), x0, x1, &opts).value
    }

    #[test]
    fn unit_weight_is_length() {
        assert!((LogPowerWeight::UNIT.integral(0.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((LogPowerWeight::UNIT.integral(0.25, 0.5).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn inverse_square_root() {
        let w = LogPowerWeight::power(-0.5);
        assert!((w.integral(0.0, 1.0).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn one_minus_log() {
        let w = LogPowerWeight::new(0.0, 1.0);
        assert!((w.integral(0.0, 1.0).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn closed_forms_match_brute_force() {
        for &(a, b) in &[(0.3, 2.0), (-0.5, 3.0), (2.0, 1.0), (-1.5, 2.0), (-0.9, 0.0)] {
            let w = LogPowerWeight::new(a, b);
            for &(x0, x1) in &[(0.1, 0.7), (0.01, 0.02), (0.5, 1.0)] {
                let got = w.integral(x0, x1).unwrap();
                let want = brute(w, x0, x1);
                assert!(((got - want) / want).abs() < 1e-9, "{a} {b} {x0} {x1}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn non_integer_log_exponent() {
        for &(a, b) in &[(0.0, 0.5), (-0.5, -1.7), (1.0, 2.5), (-1.2, 0.3)] {
            let w = LogPowerWeight::new(a, b);
            for &(x0, x1) in &[(0.1, 0.7), (0.001, 0.002)] {
                let got = w.integral(x0, x1).unwrap();
                let want = brute(w, x0, x1);
                assert!(((got - want) / want).abs() < 1e-8, "{a} {b}: {got} vs {want}");
            }
        }
        // From zero: compare with the substitution done by hand, ∫_1^∞ e^{-v+1}... via brute on [0,1].
        let w = LogPowerWeight::new(-0.5, 0.5);
        let got = w.integral(0.0, 0.3).unwrap();
        let want = brute(w, 0.0, 0.3);
        assert!(((got - want) / want).abs() < 1e-8, "{got} vs {want}");
    }

    #[test]
    fn critical_exponent() {
        // a = -1: ∫_0^x t^{-1} u^{-2} dt = 1/u(x)
        let w = LogPowerWeight::new(-1.0, -2.0);
        let x = 0.2;
        assert!((w.integral(0.0, x).unwrap() - 1.0 / log_var(x)).abs() < 1e-14);
        assert!(w.integral(0.0, x).is_ok());
        assert!(LogPowerWeight::new(-1.0, -1.0).integral(0.0, x).unwrap_err().is_divergent());
        assert!(LogPowerWeight::new(-1.0, 0.0).integral(0.0, x).unwrap_err().is_divergent());
        assert!(LogPowerWeight::new(-1.5, 3.0).integral(0.0, x).unwrap_err().is_divergent());
        assert!(LogPowerWeight::new(-1.5, 3.0).integral(0.1, x).is_ok());
    }

    #[test]
    fn product_adds_exponents() {
        let w = LogPowerWeight::new(0.5, -1.0).product(LogPowerWeight::new(-0.25, 2.0));
        assert_eq!(w, LogPowerWeight::new(0.25, 1.0));
    }

    #[test]
    fn sup_handles_interior_peak() {
        // t^{1/2} u^2 peaks at u = 4.
        let w = LogPowerWeight::new(0.5, 2.0);
        let t_star = (1.0f64 - 4.0).exp();
        let s = w.sup_on(0.0, 1.0);
        assert!((s - w.eval(t_star)).abs() < 1e-14);
        assert_eq!(LogPowerWeight::power(-0.5).sup_on(0.0, 0.5), f64::INFINITY);
    }
}
