use serde::Serialize;

use crate::error::{Error, Result};
use crate::norms::{norm_of_rearrangement, SpaceSpec};
use crate::rearrange::{rearrange, LogPowerWeight, SimpleFunction, StepFunction};

use super::{CoupleSpec, InterpParams};

/// Left end of the t-grid used by the interpolation norms.
pub const T_MIN: f64 = 1e-12;
/// Number of trapezoid intervals in `s = -log t` over `[T_MIN, 1]`.
pub const T_GRID_INTERVALS: usize = 2048;

/// Truncation levels tried before the golden-section refinement.
const COARSE_CANDIDATES: usize = 64;
const GOLDEN_REL_TOL: f64 = 1e-6;
const GOLDEN_MAX_ITER: usize = 200;
/// Above this many terms the excess of a `q = 1` norm is taken from prefix sums.
const DIRECT_SUM_LIMIT: usize = 64;

/// A member norm prepared for repeated evaluation on truncations of one
/// decreasing rearrangement. Divergence is reported as `+∞`.
#[derive(Debug, Clone)]
enum MemberEval {
    /// `(Σ_i h_i^q W_i)^{1/q}` with `W_i` the weight integral over step `i`.
    Integral {
        q: f64,
        w: Vec<f64>,
        w_prefix: Vec<f64>,
        lw_prefix: Vec<f64>,
        lqw_suffix: Vec<f64>,
    },
    /// `max_i h_i S_i` with `S_i` the weight supremum over step `i`.
    Sup {
        unit: bool,
        s: Vec<f64>,
        s_prefix_max: Vec<f64>,
        ls_suffix_max: Vec<f64>,
    },
    Generic(SpaceSpec),
}

fn weight_integral_or_inf(w: LogPowerWeight, x0: f64, x1: f64) -> Result<f64> {
    match w.integral(x0, x1) {
        Ok(v) => Ok(v),
        Err(e) if e.is_divergent() => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

impl MemberEval {
    fn new(spec: &SpaceSpec, g: &StepFunction) -> Result<Self> {
        let Some((p, q, lambda)) = spec.as_lorentz_zygmund() else {
            return Ok(MemberEval::Generic(*spec));
        };
        let levels = g.levels();
        let n = levels.len();
        if q.is_infinite() {
            let weight = LogPowerWeight::new(if p.is_infinite() { 0.0 } else { 1.0 / p }, lambda);
            let s: Vec<f64> = g.steps().map(|(x0, x1, _)| weight.sup_on(x0, x1)).collect();
            let mut s_prefix_max = vec![0.0f64; n + 1];
            for i in 0..n {
                s_prefix_max[i + 1] = s_prefix_max[i].max(s[i]);
            }
            let mut ls_suffix_max = vec![0.0f64; n + 1];
            for i in (0..n).rev() {
                ls_suffix_max[i] = ls_suffix_max[i + 1].max(levels[i] * s[i]);
            }
            return Ok(MemberEval::Sup {
                unit: weight == LogPowerWeight::UNIT,
                s,
                s_prefix_max,
                ls_suffix_max,
            });
        }
        let a = if p.is_infinite() { -1.0 } else { q / p - 1.0 };
        let weight = LogPowerWeight::new(a, lambda * q);
        let w = g
            .steps()
            .map(|(x0, x1, _)| weight_integral_or_inf(weight, x0, x1))
            .collect::<Result<Vec<f64>>>()?;
        let mut w_prefix = vec![0.0; n + 1];
        let mut lw_prefix = vec![0.0; n + 1];
        for i in 0..n {
            w_prefix[i + 1] = w_prefix[i] + w[i];
            lw_prefix[i + 1] = lw_prefix[i] + levels[i] * w[i];
        }
        let mut lqw_suffix = vec![0.0; n + 1];
        for i in (0..n).rev() {
            lqw_suffix[i] = lqw_suffix[i + 1] + levels[i].powf(q) * w[i];
        }
        Ok(MemberEval::Integral {
            q,
            w,
            w_prefix,
            lw_prefix,
            lqw_suffix,
        })
    }

    /// Norm of `(g - τ)_+`.
    fn excess(&self, g: &StepFunction, tau: f64) -> Result<f64> {
        let levels = g.levels();
        let k = levels.partition_point(|&l| l > tau);
        if k == 0 {
            return Ok(0.0);
        }
        Ok(match self {
            MemberEval::Integral {
                q,
                w,
                w_prefix,
                lw_prefix,
                ..
            } => {
                if w[0].is_infinite() {
                    return Ok(f64::INFINITY);
                }
                let sum = if *q == 1.0 && k > DIRECT_SUM_LIMIT {
                    (lw_prefix[k] - tau * w_prefix[k]).max(0.0)
                } else {
                    (0..k).map(|i| (levels[i] - tau).powf(*q) * w[i]).sum()
                };
                sum.powf(1.0 / q)
            }
            MemberEval::Sup { unit, s, .. } => {
                if *unit {
                    levels[0] - tau
                } else {
                    (0..k).map(|i| (levels[i] - tau) * s[i]).fold(0.0, f64::max)
                }
            }
            MemberEval::Generic(spec) => finite_or_inf(norm_of_rearrangement(&g.excess(tau), spec))?,
        })
    }

    /// Norm of `min(g, τ)`.
    fn truncated(&self, g: &StepFunction, tau: f64) -> Result<f64> {
        if tau <= 0.0 {
            return Ok(0.0);
        }
        let k = g.levels().partition_point(|&l| l >= tau);
        Ok(match self {
            MemberEval::Integral {
                q,
                w_prefix,
                lqw_suffix,
                ..
            } => {
                let head = if k == 0 { 0.0 } else { tau.powf(*q) * w_prefix[k] };
                (head + lqw_suffix[k]).powf(1.0 / q)
            }
            MemberEval::Sup {
                s_prefix_max,
                ls_suffix_max,
                ..
            } => {
                let head = if k == 0 { 0.0 } else { tau * s_prefix_max[k] };
                head.max(ls_suffix_max[k])
            }
            MemberEval::Generic(spec) => finite_or_inf(norm_of_rearrangement(&g.truncated(tau), spec))?,
        })
    }
}

fn finite_or_inf(r: Result<f64>) -> Result<f64> {
    match r {
        Ok(v) => Ok(v),
        Err(e) if e.is_divergent() => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

fn is_l1(s: &SpaceSpec) -> bool {
    s.as_lorentz_zygmund() == Some((1.0, 1.0, 0.0))
}

fn is_linf(s: &SpaceSpec) -> bool {
    s.as_lorentz_zygmund() == Some((f64::INFINITY, f64::INFINITY, 0.0))
}

/// `K(f, t; X0, X1)` for a fixed `f`, with the member norms prepared once.
///
/// The value is the minimum of `‖(f_* - τ)_+‖_{X0} + t ‖min(f_*, τ)‖_{X1}`
/// over truncation levels `τ`. For `(L^1, L^∞)` this is exact and equals
/// `∫_0^t f_*`, which [`KFunctional::eval`] uses directly.
#[derive(Debug, Clone)]
pub struct KFunctional {
    g: StepFunction,
    x0: MemberEval,
    x1: MemberEval,
    l1_linf: bool,
    candidates: Vec<f64>,
}

impl KFunctional {
    pub fn new(g: &StepFunction, couple: &CoupleSpec) -> Result<Self> {
        couple.validate()?;
        let levels = g.levels();
        let n = levels.len();
        let mut candidates = vec![0.0];
        if n <= COARSE_CANDIDATES - 2 {
            candidates.extend(levels.iter().rev());
        } else {
            let m = COARSE_CANDIDATES - 2;
            for j in 0..m {
                candidates.push(levels[(n - 1) - j * (n - 1) / (m - 1)]);
            }
        }
        candidates.dedup();
        Ok(KFunctional {
            g: g.clone(),
            x0: MemberEval::new(&couple.x0, g)?,
            x1: MemberEval::new(&couple.x1, g)?,
            l1_linf: is_l1(&couple.x0) && is_linf(&couple.x1),
            candidates,
        })
    }

    pub fn rearrangement(&self) -> &StepFunction {
        &self.g
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        if self.l1_linf {
            return Ok(self.g.integral_to(t.min(1.0)));
        }
        self.eval_truncation(t)
    }

    /// The truncation minimizer, without the `(L^1, L^∞)` shortcut.
    pub fn eval_truncation(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        if self.g.is_zero() {
            return Ok(0.0);
        }
        let cost = |tau: f64| -> Result<f64> {
            let e = self.x0.excess(&self.g, tau)?;
            let r = self.x1.truncated(&self.g, tau)?;
            Ok(e + t * r)
        };
        let vals = self
            .candidates
            .iter()
            .map(|&tau| cost(tau))
            .collect::<Result<Vec<f64>>>()?;
        let mut j = 0;
        for (i, &v) in vals.iter().enumerate() {
            if v < vals[j] {
                j = i;
            }
        }
        let mut best = vals[j];
        if best.is_infinite() {
            return Err(Error::Divergent(
                "K-functional: every truncation has an infinite member norm".into(),
            ));
        }
        let lo = self.candidates[j.saturating_sub(1)];
        let hi = self.candidates[(j + 1).min(self.candidates.len() - 1)];
        if hi > lo {
            best = best.min(golden_min(&cost, lo, hi)?);
        }
        Ok(best)
    }
}

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("K-functional parameter t = {t} must be positive and finite")))
    }
}

fn golden_min<F: Fn(f64) -> Result<f64>>(f: &F, mut lo: f64, mut hi: f64) -> Result<f64> {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..GOLDEN_MAX_ITER {
        if hi - lo <= GOLDEN_REL_TOL * hi.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(f1.min(f2))
}

/// `K(f, t; X0, X1)`.
pub fn k_functional(f: &SimpleFunction, t: f64, couple: &CoupleSpec) -> Result<f64> {
    KFunctional::new(&rearrange(f), couple)?.eval(t)
}

/// `K(f, t; X0, X1)` from the truncation minimizer even where a closed form exists.
pub fn k_functional_truncation(f: &SimpleFunction, t: f64, couple: &CoupleSpec) -> Result<f64> {
    KFunctional::new(&rearrange(f), couple)?.eval_truncation(t)
}

/// Result of a log-interpolation norm evaluation with its error indicators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogInterpOutcome {
    pub value: f64,
    /// Same quantity from every other grid point.
    pub coarse_value: f64,
    /// Richardson estimate of the relative discretization error.
    pub richardson_error: f64,
    /// Share of the `q`-th power contributed below `T_MIN`.
    pub tail_fraction: f64,
}

/// `‖t^{-θ-1/q} (1 - log t)^α K(f, t)‖_{L^q(0,1)}`.
pub fn log_interp_norm(f: &SimpleFunction, couple: &CoupleSpec, params: &InterpParams) -> Result<f64> {
    Ok(log_interp_outcome(f, couple, params)?.value)
}

pub fn log_interp_outcome(f: &SimpleFunction, couple: &CoupleSpec, params: &InterpParams) -> Result<LogInterpOutcome> {
    couple.check_params(params)?;
    let g = rearrange(f);
    if g.is_zero() {
        return Ok(LogInterpOutcome {
            value: 0.0,
            coarse_value: 0.0,
            richardson_error: 0.0,
            tail_fraction: 0.0,
        });
    }
    let kf = KFunctional::new(&g, couple)?;
    let InterpParams { theta, q, alpha } = *params;
    let n = T_GRID_INTERVALS;
    let s_max = -T_MIN.ln();
    let h = s_max / n as f64;
    let mut scaled = Vec::with_capacity(n + 1);
    let mut k_last = 0.0;
    for j in 0..=n {
        let s = j as f64 * h;
        let t = if j == n { T_MIN } else { (-s).exp() };
        let k = kf.eval(t)?;
        k_last = k;
        scaled.push((theta * s).exp() * (1.0 + s).powf(alpha) * k);
    }
    // Below T_MIN, K(f, t) is replaced by its chord slope times t.
    let slope = k_last / T_MIN;
    if q.is_infinite() {
        let tail_sup = LogPowerWeight::new(1.0 - theta, alpha).sup_on(0.0, T_MIN) * slope;
        if tail_sup.is_infinite() {
            return Err(Error::Divergent("interpolation norm: unbounded near t = 0".into()));
        }
        let grid_max = scaled.iter().copied().fold(0.0, f64::max);
        let coarse_max = scaled.iter().step_by(2).copied().fold(0.0, f64::max);
        let value = grid_max.max(tail_sup);
        return Ok(LogInterpOutcome {
            value,
            coarse_value: coarse_max.max(tail_sup),
            richardson_error: 0.0,
            tail_fraction: if tail_sup >= grid_max { 1.0 } else { 0.0 },
        });
    }
    let powered: Vec<f64> = scaled.iter().map(|v| v.powf(q)).collect();
    let trapezoid = |stride: usize| {
        let pts: Vec<f64> = powered.iter().step_by(stride).copied().collect();
        let m = pts.len() - 1;
        let inner: f64 = pts[1..m].iter().sum();
        stride as f64 * h * (inner + 0.5 * (pts[0] + pts[m]))
    };
    let fine = trapezoid(1);
    let coarse = trapezoid(2);
    let tail = slope.powf(q) * LogPowerWeight::new((1.0 - theta) * q - 1.0, alpha * q).integral(0.0, T_MIN)?;
    let total = fine + tail;
    if !total.is_finite() {
        return Err(Error::Overflow("interpolation norm integral".into()));
    }
    Ok(LogInterpOutcome {
        value: total.powf(1.0 / q),
        coarse_value: (coarse + tail).powf(1.0 / q),
        richardson_error: if total > 0.0 { (fine - coarse).abs() / (3.0 * total) } else { 0.0 },
        tail_fraction: if total > 0.0 { tail / total } else { 0.0 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{power_log, random_family};
    use crate::norms::space_norm;

    fn l1_linf() -> CoupleSpec {
        CoupleSpec::new(SpaceSpec::lebesgue(1.0), SpaceSpec::lebesgue(f64::INFINITY))
    }

    #[test]
    fn indicator_and_constant() {
        let c = l1_linf();
        let f = SimpleFunction::indicator(0.3).unwrap();
        for t in [0.01f64, 0.3, 0.5, 2.0] {
            let want = t.min(0.3);
            assert!((k_functional(&f, t, &c).unwrap() - want).abs() < 1e-14);
            assert!((k_functional_truncation(&f, t, &c).unwrap() - want).abs() < 1e-6 * want);
        }
        let f = SimpleFunction::constant(2.5);
        for t in [0.1f64, 1.0, 3.0] {
            let want = 2.5 * t.min(1.0);
            assert!((k_functional_truncation(&f, t, &c).unwrap() - want).abs() < 1e-6 * want);
        }
        assert_eq!(k_functional(&SimpleFunction::zero(), 0.4, &c).unwrap(), 0.0);
        assert!(k_functional(&f, 0.0, &c).is_err());
    }

    #[test]
    fn minimizer_matches_closed_form_on_random_functions() {
        let c = l1_linf();
        for f in random_family(11, 40, 32) {
            let kf = KFunctional::new(&rearrange(&f), &c).unwrap();
            for j in 0..20 {
                let t = 10f64.powf(-4.0 + 4.0 * j as f64 / 19.0);
                let exact = kf.eval(t).unwrap();
                let approx = kf.eval_truncation(t).unwrap();
                assert!(approx >= exact * (1.0 - 1e-9));
                assert!(approx <= exact * (1.0 + 1e-6), "t={t} exact={exact} approx={approx}");
            }
        }
    }

    #[test]
    fn generic_path_agrees_with_prepared_path() {
        // Small spaces have no prepared evaluator; the couple (L^2, L^{2,1})
        // mixes one of each kind with its Lorentz–Zygmund spelling.
        let prepared = CoupleSpec::new(SpaceSpec::lebesgue(2.0), SpaceSpec::lorentz(4.0, 1.0));
        let via_gamma = CoupleSpec::new(
            SpaceSpec::GGamma {
                p: 2.0,
                m: f64::INFINITY,
                w1: LogPowerWeight::UNIT,
                w2: LogPowerWeight::UNIT,
            },
            SpaceSpec::lorentz(4.0, 1.0),
        );
        for f in random_family(5, 10, 8) {
            let g = rearrange(&f);
            let a = KFunctional::new(&g, &prepared).unwrap();
            let b = KFunctional::new(&g, &via_gamma).unwrap();
            for t in [1e-3, 0.1, 0.7] {
                let (x, y) = (a.eval(t).unwrap(), b.eval(t).unwrap());
                assert!((x - y).abs() <= 1e-6 * x, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn k_is_bounded_by_member_norms() {
        let c = CoupleSpec::new(SpaceSpec::lebesgue(1.0), SpaceSpec::lebesgue(2.0));
        for f in random_family(2, 30, 16) {
            let n0 = space_norm(&f, &c.x0).unwrap();
            let n1 = space_norm(&f, &c.x1).unwrap();
            for t in [1e-6, 1e-2, 0.5, 1.0, 10.0] {
                let k = k_functional(&f, t, &c).unwrap();
                assert!(k <= n0.min(t * n1) * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn divergent_second_member_is_skipped() {
        // f_* = t^{-1/2}: not bounded, so only τ < ∞ truncations are finite.
        let f = power_log(2.0, 0.0);
        let k = k_functional_truncation(&f, 0.01, &l1_linf()).unwrap();
        let exact = k_functional(&f, 0.01, &l1_linf()).unwrap();
        assert!((k - exact).abs() < 1e-6 * exact);
    }

    #[test]
    fn indicator_interpolation_norm_closed_form() {
        // K = min(t, m); ∫_0^1 t^{-θ-1} min(t, m) dt = m^{1-θ}/(1-θ) + m (m^{-θ} - 1)/θ.
        let c = l1_linf();
        for &(m, theta) in &[(0.2, 0.5), (0.01, 0.3), (0.7, 0.8)] {
            let f = SimpleFunction::indicator(m).unwrap();
            let p = InterpParams::new(theta, 1.0, 0.0);
            let out = log_interp_outcome(&f, &c, &p).unwrap();
            let want = m.powf(1.0 - theta) / (1.0 - theta) + m * (m.powf(-theta) - 1.0) / theta;
            assert!((out.value - want).abs() < 1e-4 * want, "{} vs {want}", out.value);
            assert!(out.richardson_error < 1e-3);
        }
    }

    #[test]
    fn zero_and_inadmissible() {
        let c = l1_linf();
        let p = InterpParams::new(0.5, 2.0, 0.0);
        assert_eq!(log_interp_norm(&SimpleFunction::zero(), &c, &p).unwrap(), 0.0);
        let bad = InterpParams::new(0.0, 2.0, -1.0);
        assert!(matches!(
            log_interp_norm(&SimpleFunction::constant(1.0), &c, &bad),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn endpoint_sup_reduces_to_second_member() {
        let c = CoupleSpec::new(SpaceSpec::lebesgue(1.0), SpaceSpec::lebesgue(2.0));
        let p = InterpParams::new(1.0, f64::INFINITY, 0.0);
        for f in random_family(4, 10, 8) {
            let v = log_interp_norm(&f, &c, &p).unwrap();
            let n1 = space_norm(&f, &c.x1).unwrap();
            assert!(v <= n1 * (1.0 + 1e-9) && v >= 0.5 * n1, "{v} vs {n1}");
        }
    }
}
