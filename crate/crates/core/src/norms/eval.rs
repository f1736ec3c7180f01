use crate::error::{Error, Result};
use crate::quad::{self, QuadOptions};
use crate::rearrange::{log_var, rearrange, LogPowerWeight, SimpleFunction, StepFunction};

use super::spec::SpaceSpec;

/// Relative tolerance for the outer integrals of the GGamma and maximal-function norms.
const OUTER_TOL: f64 = 1e-11;

/// Points in the coarse ε-grid of the grand norm.
const GRAND_GRID: usize = 64;
/// Smallest ε of the coarse grid, relative to `p - 1`.
const GRAND_EPS_FLOOR: f64 = 1e-8;
const GRAND_REFINE_POINTS: usize = 16;

fn outer_opts() -> QuadOptions {
    QuadOptions {
        rel_tol: OUTER_TOL,
        ..QuadOptions::default()
    }
}

/// Conjugate exponent `p / (p - 1)`.
pub fn conjugate(p: f64) -> f64 {
    if p.is_infinite() {
        1.0
    } else if p == 1.0 {
        f64::INFINITY
    } else {
        p / (p - 1.0)
    }
}

/// The (quasi-)norm of `f` in the space described by `spec`.
pub fn space_norm(f: &SimpleFunction, spec: &SpaceSpec) -> Result<f64> {
    spec.validate()?;
    norm_of_rearrangement(&rearrange(f), spec)
}

/// Same as [`space_norm`], starting from the decreasing rearrangement.
pub fn norm_of_rearrangement(g: &StepFunction, spec: &SpaceSpec) -> Result<f64> {
    spec.validate()?;
    if g.is_zero() {
        return Ok(0.0);
    }
    match *spec {
        SpaceSpec::Lebesgue { p } => lorentz_zygmund_norm(g, p, p, 0.0),
        SpaceSpec::Lorentz { p, q } => lorentz_zygmund_norm(g, p, q, 0.0),
        SpaceSpec::LorentzZygmund { p, q, lambda } => lorentz_zygmund_norm(g, p, q, lambda),
        SpaceSpec::Grand { p, alpha } => Ok(grand_norm(g, p, alpha)),
        SpaceSpec::Small { p, alpha } => {
            let w1 = LogPowerWeight::new(-1.0, alpha / conjugate(p) - 1.0);
            ggamma_norm(g, p, 1.0, w1, LogPowerWeight::UNIT)
        }
        SpaceSpec::GGamma { p, m, w1, w2 } => ggamma_norm(g, p, m, w1, w2),
    }
}

/// `‖t^{1/p} (1 - log t)^λ f_*‖_{L^q(dt/t)}`, the sup for `q = ∞`.
pub fn lorentz_zygmund_norm(g: &StepFunction, p: f64, q: f64, lambda: f64) -> Result<f64> {
    if g.is_zero() {
        return Ok(0.0);
    }
    if q.is_infinite() {
        let w = LogPowerWeight::new(if p.is_infinite() { 0.0 } else { 1.0 / p }, lambda);
        let mut best = 0.0f64;
        for (x0, x1, l) in g.steps() {
            let s = w.sup_on(x0, x1);
            if s.is_infinite() {
                return Err(Error::Divergent(format!(
                    "t^{} (1 - log t)^{} f_*(t) is unbounded near 0",
                    w.a, w.b
                )));
            }
            best = best.max(l * s);
        }
        Ok(best)
    } else {
        let a = if p.is_infinite() { -1.0 } else { q / p - 1.0 };
        let w = LogPowerWeight::new(a, lambda * q);
        Ok(g.integrate_weighted(w, q)?.powf(1.0 / q))
    }
}

fn grand_objective(g: &StepFunction, p: f64, alpha: f64, eps: f64) -> f64 {
    let r = p - eps;
    let integral: f64 = g.steps().map(|(x0, x1, l)| l.powf(r) * (x1 - x0)).sum();
    (eps.powf(alpha) * integral).powf(1.0 / r)
}

/// Maximizes `f` over a sorted grid, then refines twice between the neighbours
/// of the best point with geometrically spaced points.
fn refine_max<F: Fn(f64) -> f64>(f: F, mut grid: Vec<f64>) -> f64 {
    let mut vals: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    for _ in 0..2 {
        let k = argmax(&vals);
        let lo = grid[k.saturating_sub(1)];
        let hi = grid[(k + 1).min(grid.len() - 1)];
        let best = vals[k];
        let ratio = (hi / lo).powf(1.0 / (GRAND_REFINE_POINTS - 1) as f64);
        grid = (0..GRAND_REFINE_POINTS).map(|j| lo * ratio.powi(j as i32)).collect();
        *grid.last_mut().expect("non-empty") = hi;
        vals = grid.iter().map(|&x| f(x)).collect();
        if vals.iter().all(|&v| v < best) {
            return best;
        }
    }
    vals.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

fn argmax(v: &[f64]) -> usize {
    let mut k = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[k] {
            k = i;
        }
    }
    k
}

/// `sup_{0<ε<p-1} (ε^α ∫ f_*^{p-ε})^{1/(p-ε)}`.
pub fn grand_norm(g: &StepFunction, p: f64, alpha: f64) -> f64 {
    if g.is_zero() {
        return 0.0;
    }
    let top = p - 1.0;
    let span = GRAND_EPS_FLOOR.ln();
    let grid: Vec<f64> = (0..GRAND_GRID)
        .map(|k| {
            let s = 1.0 - k as f64 / (GRAND_GRID - 1) as f64;
            top * (span * s).exp()
        })
        .collect();
    refine_max(|eps| grand_objective(g, p, alpha, eps), grid)
}

/// `sup_{0<t<1} (1 - log t)^{-α/p} (∫_t^1 f_*^p)^{1/p}`, an equivalent form of the grand norm.
pub fn grand_norm_fk(g: &StepFunction, p: f64, alpha: f64) -> f64 {
    let steps: Vec<(f64, f64, f64)> = g.steps().collect();
    // tails[i] = ∫_{x0_i}^1 f_*^p
    let mut tails = vec![0.0; steps.len() + 1];
    for i in (0..steps.len()).rev() {
        let (x0, x1, l) = steps[i];
        tails[i] = tails[i + 1] + l.powf(p) * (x1 - x0);
    }
    let h = |t: f64, tail: f64| {
        if t <= 0.0 || tail <= 0.0 {
            0.0
        } else {
            log_var(t).powf(-alpha / p) * tail.powf(1.0 / p)
        }
    };
    let mut best = 0.0f64;
    for (i, &(x0, x1, l)) in steps.iter().enumerate() {
        let lp = l.powf(p);
        let tail_at = |t: f64| tails[i + 1] + lp * (x1 - t);
        // d/dt log h has the sign of α A(t) - L^p t u(t), which decreases in t.
        let slope = |t: f64| alpha * tail_at(t) - lp * t * log_var(t);
        let t_best = if x0 > 0.0 && slope(x0) <= 0.0 {
            x0
        } else if slope(x1) >= 0.0 {
            x1
        } else {
            let (mut lo, mut hi) = (x0, x1);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if slope(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        best = best.max(h(t_best, tail_at(t_best))).max(h(x1, tails[i + 1]));
        if x0 > 0.0 {
            best = best.max(h(x0, tails[i]));
        }
    }
    best
}

/// Asymptotic weight of the GGamma outer integrand near `t = 0` for a function
/// with `f_*` constant near 0.
fn ggamma_weight_at_zero(p: f64, m: f64, w1: LogPowerWeight, w2: LogPowerWeight) -> Result<LogPowerWeight> {
    let mm = if m.is_infinite() { 1.0 } else { m };
    if p.is_infinite() {
        let lim = w2.limit_at_zero();
        if lim.is_infinite() {
            return Err(Error::Divergent("inner weight is unbounded near 0".into()));
        }
        Ok(if lim == 0.0 {
            w1.product(w2.pow(mm))
        } else {
            w1
        })
    } else {
        if !w2.integrable_at_zero() {
            return Err(Error::Divergent(format!(
                "inner weight t^{} (1 - log t)^{} is not integrable at 0",
                w2.a, w2.b
            )));
        }
        let c2 = w2.a + 1.0;
        Ok(if c2.abs() < 1e-12 {
            w1.product(LogPowerWeight::new(0.0, (w2.b + 1.0) * mm / p))
        } else {
            w1.product(LogPowerWeight::new(c2 * mm / p, w2.b * mm / p))
        })
    }
}

/// Inner functional of the GGamma norm on each step: `(∫_0^t f_*^p w2)^{1/p}`
/// or `sup_{s<t} w2(s) f_*(s)`.
struct Inner<'a> {
    steps: &'a [(f64, f64, f64)],
    p: f64,
    w2: LogPowerWeight,
    /// Accumulated inner quantity at the left end of each step, and at the end.
    prefix: Vec<f64>,
}

impl<'a> Inner<'a> {
    fn new(steps: &'a [(f64, f64, f64)], p: f64, w2: LogPowerWeight) -> Result<Self> {
        let mut prefix = Vec::with_capacity(steps.len() + 1);
        let mut acc = 0.0f64;
        prefix.push(acc);
        for &(x0, x1, l) in steps {
            if p.is_infinite() {
                acc = acc.max(l * w2.sup_on(x0, x1));
            } else {
                acc += l.powf(p) * w2.integral(x0, x1)?;
            }
            prefix.push(acc);
        }
        Ok(Inner {
            steps,
            p,
            w2,
            prefix,
        })
    }

    /// Inner quantity raised to `r` (H^{r/p}, or the sup to the power r).
    fn pow_at(&self, i: usize, t: f64, r: f64) -> f64 {
        let (x0, _, l) = self.steps[i];
        if self.p.is_infinite() {
            self.prefix[i].max(l * self.w2.sup_on(x0, t)).powf(r)
        } else {
            let part = self.w2.integral(x0, t).unwrap_or(f64::NAN);
            (self.prefix[i] + l.powf(self.p) * part).powf(r / self.p)
        }
    }

    fn total_pow(&self, r: f64) -> f64 {
        let h = *self.prefix.last().expect("non-empty prefix");
        if self.p.is_infinite() {
            h.powf(r)
        } else {
            h.powf(r / self.p)
        }
    }
}

/// `[∫_0^1 w1(t) (∫_0^t f_*^p w2)^{m/p} dt]^{1/m}`, with the sup in `t` for
/// `m = ∞` and the inner sup for `p = ∞`.
pub fn ggamma_norm(g: &StepFunction, p: f64, m: f64, w1: LogPowerWeight, w2: LogPowerWeight) -> Result<f64> {
    if g.is_zero() {
        return Ok(0.0);
    }
    let near_zero = ggamma_weight_at_zero(p, m, w1, w2)?;
    if m.is_finite() && !near_zero.integrable_at_zero() {
        return Err(Error::Divergent(format!(
            "outer integrand behaves like t^{} (1 - log t)^{} near 0",
            near_zero.a, near_zero.b
        )));
    }
    if m.is_infinite() && near_zero.limit_at_zero().is_infinite() {
        return Err(Error::Divergent("outer supremum is infinite near 0".into()));
    }
    let steps: Vec<(f64, f64, f64)> = g.steps().collect();
    let inner = Inner::new(&steps, p, w2)?;
    let support = g.support();
    let value = if m.is_infinite() {
        ggamma_sup(&inner, w1, support)
    } else {
        ggamma_integral(&inner, w1, m, support)?
    };
    if !value.is_finite() {
        return Err(Error::Overflow("GGamma norm".into()));
    }
    Ok(value)
}

fn ggamma_integral(inner: &Inner<'_>, w1: LogPowerWeight, m: f64, support: f64) -> Result<f64> {
    let opts = outer_opts();
    let mut total = 0.0;
    for (i, &(x0, x1, _)) in inner.steps.iter().enumerate() {
        // t = e^{1-u}, dt = -t du
        let integrand = |u: f64| {
            let t = (1.0 - u).exp();
            if t <= 0.0 {
                return 0.0;
            }
            w1.eval(t) * inner.pow_at(i, t.min(x1), m) * t
        };
        let u1 = log_var(x1);
        let u0 = if x0 == 0.0 { f64::INFINITY } else { log_var(x0) };
        let r = quad::integrate(integrand, u1, u0, &opts);
        total += r.value;
    }
    if support < 1.0 {
        total += inner.total_pow(m) * w1.integral(support, 1.0)?;
    }
    if total.is_nan() {
        return Err(Error::Overflow("GGamma outer integral".into()));
    }
    Ok(total.powf(1.0 / m))
}

fn ggamma_sup(inner: &Inner<'_>, w1: LogPowerWeight, support: f64) -> f64 {
    let mut best = 0.0f64;
    for (i, &(x0, x1, _)) in inner.steps.iter().enumerate() {
        let f = |t: f64| w1.eval(t) * inner.pow_at(i, t, 1.0);
        let lo = if x0 == 0.0 { x1 * 1e-14 } else { x0 };
        let n = if x0 == 0.0 { 48 } else { 12 };
        let ratio = (x1 / lo).powf(1.0 / (n - 1) as f64);
        let grid: Vec<f64> = (0..n)
            .map(|j| if j == n - 1 { x1 } else { lo * ratio.powi(j as i32) })
            .collect();
        let vals: Vec<f64> = grid.iter().map(|&t| f(t)).collect();
        let k = argmax(&vals);
        let (mut a, mut b) = (grid[k.saturating_sub(1)], grid[(k + 1).min(n - 1)]);
        let mut top = vals[k];
        // golden section on the bracket
        let gr = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..60 {
            let c = b - gr * (b - a);
            let d = a + gr * (b - a);
            let (fc, fd) = (f(c), f(d));
            top = top.max(fc).max(fd);
            if fc > fd {
                b = d;
            } else {
                a = c;
            }
        }
        best = best.max(top);
    }
    if support < 1.0 {
        best = best.max(inner.total_pow(1.0) * w1.sup_on(support, 1.0));
    }
    best
}

/// `‖t^{1/p - 1/q} f_**(t)‖_{L^q(0,1)}`: the Lorentz norm computed with the
/// maximal function in place of the rearrangement.
pub fn lorentz_maximal_norm(g: &StepFunction, p: f64, q: f64) -> Result<f64> {
    if g.is_zero() {
        return Ok(0.0);
    }
    let steps: Vec<(f64, f64, f64)> = g.steps().collect();
    let mut prefix = Vec::with_capacity(steps.len() + 1);
    let mut acc = 0.0;
    prefix.push(acc);
    for &(x0, x1, l) in &steps {
        acc += l * (x1 - x0);
        prefix.push(acc);
    }
    let total = acc;
    let support = g.support();
    if q.is_infinite() {
        if p.is_infinite() {
            return Ok(steps[0].2);
        }
        // t^{1/p} f_**(t) has no interior maximum on a step, so breakpoints suffice.
        let mut best = 0.0f64;
        for (i, &(_, x1, _)) in steps.iter().enumerate() {
            best = best.max(x1.powf(1.0 / p) * prefix[i + 1] / x1);
        }
        return Ok(best.max(total));
    }
    if p.is_infinite() {
        return Err(Error::Divergent("t^{-1} f_**(t)^q is not integrable at 0".into()));
    }
    let a = q / p - 1.0;
    let w = LogPowerWeight::power(a);
    let (_, x1_first, l_first) = steps[0];
    let mut sum = l_first.powf(q) * w.integral(0.0, x1_first)?;
    let opts = outer_opts();
    for (i, &(x0, x1, l)) in steps.iter().enumerate().skip(1) {
        let base = prefix[i] - l * x0;
        let integrand = |t: f64| t.powf(a) * (base / t + l).powf(q);
        sum += quad::integrate(integrand, x0, x1, &opts).value;
    }
    if support < 1.0 {
        sum += total.powf(q) * LogPowerWeight::power(a - q).integral(support, 1.0)?;
    }
    Ok(sum.powf(1.0 / q))
}

/// Result of checking the two GGamma weight conditions for log-power weights.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct WeightConditions {
    /// Doubling condition on the inner weight.
    pub c1: bool,
    /// The sharp doubling constant `sup_{t<1/2} w2(2t)/w2(t)`.
    pub doubling_constant: f64,
    /// Finiteness of the norm of the constant function 1.
    pub c2: bool,
}

pub fn check_weight_conditions(spec: &SpaceSpec) -> Result<WeightConditions> {
    let SpaceSpec::GGamma { p, m, w1, w2 } = *spec else {
        return Err(Error::Spec(format!("{spec} is not a GGamma space")));
    };
    spec.validate()?;
    // u(2t)/u(t) ranges over [1/(1 + ln 2), 1) for t in (0, 1/2).
    let log_factor = (1.0 + std::f64::consts::LN_2).powf(-w2.b).max(1.0);
    let doubling_constant = 2f64.powf(w2.a) * log_factor;
    let one = rearrange(&SimpleFunction::constant(1.0));
    let c2 = match ggamma_norm(&one, p, m, w1, w2) {
        Ok(v) => v.is_finite(),
        Err(Error::Divergent(_)) | Err(Error::Overflow(_)) => false,
        Err(e) => return Err(e),
    };
    Ok(WeightConditions {
        c1: doubling_constant.is_finite(),
        doubling_constant,
        c2,
    })
}
