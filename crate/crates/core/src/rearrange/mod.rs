//! Decreasing rearrangements of piecewise-constant functions on a domain of
//! unit measure, and weighted integrals of step functions on `(0, 1)`.
//!
//! The distribution function uses the closed convention
//! `D_f(t) = |{|f| ≥ t}|`, and `f_*(s) = inf{t : D_f(t) ≤ s}`. For a simple
//! function this makes `f_*` a right-open step function
//! `f_* = L_i` on `[b_{i-1}, b_i)` with strictly decreasing positive levels.

mod weight;

pub use weight::{log_var, LogPowerWeight, DEFAULT_QUAD_TOL};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Tolerance on the total measure of a simple function.
const MEASURE_TOL: f64 = 1e-12;

/// A measurable function taking finitely many values on a domain of measure 1,
/// stored as `(value, measure)` pieces. Measure not covered by the pieces is
/// an implicit zero piece.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimpleFunction {
    pieces: Vec<(f64, f64)>,
}

impl SimpleFunction {
    /// Builds a simple function; the measures must be nonnegative and sum to
    /// at most 1 (up to rounding proportional to the number of pieces).
    pub fn new(pieces: Vec<(f64, f64)>) -> Result<Self> {
        let mut total = 0.0;
        for &(v, m) in &pieces {
            if !v.is_finite() {
                return Err(Error::Input(format!("non-finite value {v}")));
            }
            if !(m >= 0.0 && m.is_finite()) {
                return Err(Error::Input(format!("invalid measure {m}")));
            }
            total += m;
        }
        let slack = MEASURE_TOL * (pieces.len().max(1) as f64);
        if total > 1.0 + slack {
            return Err(Error::Input(format!(
                "pieces cover measure {total}, which exceeds the unit domain"
            )));
        }
        Ok(SimpleFunction { pieces })
    }

    /// Rescales the measures so that they sum to exactly one (domain
    /// normalization at ingestion).
    pub fn normalized(pieces: Vec<(f64, f64)>) -> Result<Self> {
        let total: f64 = pieces.iter().map(|p| p.1).sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::Input(format!("cannot normalize total measure {total}")));
        }
        SimpleFunction::new(pieces.into_iter().map(|(v, m)| (v, m / total)).collect())
    }

    pub fn zero() -> Self {
        SimpleFunction { pieces: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        SimpleFunction {
            pieces: vec![(c, 1.0)],
        }
    }

    /// The indicator of a set of measure `m`.
    pub fn indicator(m: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&m) {
            return Err(Error::Domain(format!("indicator measure {m} outside [0, 1]")));
        }
        Ok(SimpleFunction {
            pieces: vec![(1.0, m)],
        })
    }

    /// Equal-measure samples, e.g. cell values on a uniform grid.
    pub fn from_samples(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Ok(SimpleFunction::zero());
        }
        let m = 1.0 / values.len() as f64;
        SimpleFunction::new(values.iter().map(|&v| (v, m)).collect())
    }

    pub fn pieces(&self) -> &[(f64, f64)] {
        &self.pieces
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn covered_measure(&self) -> f64 {
        self.pieces.iter().map(|p| p.1).sum()
    }

    pub fn scale(&self, c: f64) -> SimpleFunction {
        SimpleFunction {
            pieces: self.pieces.iter().map(|&(v, m)| (c * v, m)).collect(),
        }
    }

    /// Pointwise `|value|`, keeping the coupling of the pieces.
    pub fn abs(&self) -> SimpleFunction {
        SimpleFunction {
            pieces: self.pieces.iter().map(|&(v, m)| (v.abs(), m)).collect(),
        }
    }

    /// Whether `other` lives on the same partition (same measures in order).
    pub fn is_coupled_with(&self, other: &SimpleFunction) -> bool {
        self.pieces.len() == other.pieces.len()
            && self
                .pieces
                .iter()
                .zip(&other.pieces)
                .all(|(a, b)| a.1 == b.1)
    }

    /// Pointwise difference of two functions on the same partition.
    pub fn sub_coupled(&self, other: &SimpleFunction) -> Result<SimpleFunction> {
        if !self.is_coupled_with(other) {
            return Err(Error::Input(
                "difference requires functions on the same partition".into(),
            ));
        }
        Ok(SimpleFunction {
            pieces: self
                .pieces
                .iter()
                .zip(&other.pieces)
                .map(|(a, b)| (a.0 - b.0, a.1))
                .collect(),
        })
    }

    /// `∫ |f|^p dμ` summed directly over the pieces.
    pub fn lp_integral(&self, p: f64) -> f64 {
        self.pieces
            .iter()
            .filter(|pc| pc.0 != 0.0)
            .map(|&(v, m)| v.abs().powf(p) * m)
            .sum()
    }
}

impl Serialize for SimpleFunction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.pieces.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SimpleFunction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pieces = Vec::<(f64, f64)>::deserialize(d)?;
        SimpleFunction::new(pieces).map_err(serde::de::Error::custom)
    }
}

/// A nonincreasing right-open step function on `(0, 1)`: the value is
/// `levels[i]` on `[breakpoints[i-1], breakpoints[i])` (with
/// `breakpoints[-1] = 0`) and zero beyond the last breakpoint.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    levels: Vec<f64>,
}

#[derive(Deserialize)]
struct RawStep {
    breakpoints: Vec<f64>,
    levels: Vec<f64>,
}

impl<'de> Deserialize<'de> for StepFunction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawStep::deserialize(d)?;
        StepFunction::new(raw.breakpoints, raw.levels).map_err(serde::de::Error::custom)
    }
}

impl StepFunction {
    pub fn new(breakpoints: Vec<f64>, levels: Vec<f64>) -> Result<Self> {
        if breakpoints.len() != levels.len() {
            return Err(Error::Input("breakpoints and levels differ in length".into()));
        }
        let mut prev_b = 0.0;
        let mut prev_l = f64::INFINITY;
        for (&b, &l) in breakpoints.iter().zip(&levels) {
            if !(b > prev_b && b <= 1.0) {
                return Err(Error::Input(format!(
                    "breakpoints must increase strictly within (0, 1], got {b}"
                )));
            }
            if !(l > 0.0 && l < prev_l && l.is_finite()) {
                return Err(Error::Input(format!(
                    "levels must be positive, finite and strictly decreasing, got {l}"
                )));
            }
            prev_b = b;
            prev_l = l;
        }
        Ok(StepFunction {
            breakpoints,
            levels,
        })
    }

    pub fn zero() -> Self {
        StepFunction::default()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn is_zero(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn num_steps(&self) -> usize {
        self.levels.len()
    }

    /// Iterates over `(left, right, level)` for every nonzero step.
    pub fn steps(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.breakpoints
            .iter()
            .zip(&self.levels)
            .scan(0.0, |left, (&b, &l)| {
                let out = (*left, b, l);
                *left = b;
                Some(out)
            })
    }

    /// Measure of the support.
    pub fn support(&self) -> f64 {
        self.breakpoints.last().copied().unwrap_or(0.0)
    }

    pub fn sup(&self) -> f64 {
        self.levels.first().copied().unwrap_or(0.0)
    }

    pub fn value_at(&self, s: f64) -> f64 {
        let i = self.breakpoints.partition_point(|&b| b <= s);
        self.levels.get(i).copied().unwrap_or(0.0)
    }

    pub fn distribution(&self, t: f64) -> Result<f64> {
        check_threshold(t)?;
        if t == 0.0 {
            return Ok(1.0);
        }
        let k = self.levels.partition_point(|&l| l >= t);
        Ok(if k == 0 { 0.0 } else { self.breakpoints[k - 1] })
    }

    /// `∫_0^s f_*`.
    pub fn integral_to(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        for (x0, x1, l) in self.steps() {
            if s <= x0 {
                break;
            }
            acc += l * (x1.min(s) - x0);
        }
        acc
    }

    pub fn scale(&self, c: f64) -> StepFunction {
        let c = c.abs();
        if c == 0.0 {
            return StepFunction::zero();
        }
        StepFunction {
            breakpoints: self.breakpoints.clone(),
            levels: self.levels.iter().map(|l| l * c).collect(),
        }
    }

    /// Rearrangement of the excess `(|f| - τ)_+`, i.e. `(f_* - τ)_+`.
    pub fn excess(&self, tau: f64) -> StepFunction {
        let k = self.levels.partition_point(|&l| l > tau);
        StepFunction {
            breakpoints: self.breakpoints[..k].to_vec(),
            levels: self.levels[..k].iter().map(|l| l - tau).collect(),
        }
    }

    /// Rearrangement of the truncation `min(|f|, τ)`, i.e. `min(f_*, τ)`.
    pub fn truncated(&self, tau: f64) -> StepFunction {
        if tau <= 0.0 {
            return StepFunction::zero();
        }
        let k = self.levels.partition_point(|&l| l >= tau);
        if k == 0 {
            return self.clone();
        }
        let mut breakpoints = Vec::with_capacity(self.levels.len() - k + 1);
        let mut levels = Vec::with_capacity(self.levels.len() - k + 1);
        breakpoints.push(self.breakpoints[k - 1]);
        levels.push(tau);
        breakpoints.extend_from_slice(&self.breakpoints[k..]);
        levels.extend_from_slice(&self.levels[k..]);
        StepFunction {
            breakpoints,
            levels,
        }
    }

    /// `∫_0^1 g(t)^r t^a (1 - log t)^b dt`.
    pub fn integrate_weighted(&self, w: LogPowerWeight, r: f64) -> Result<f64> {
        self.integrate_weighted_on(w, r, 0.0, 1.0)
    }

    /// `∫_lo^hi g(t)^r w(t) dt` for `0 ≤ lo ≤ hi ≤ 1`.
    pub fn integrate_weighted_on(&self, w: LogPowerWeight, r: f64, lo: f64, hi: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("integrability exponent {r} must be positive")));
        }
        if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
            return Err(Error::Domain(format!("range [{lo}, {hi}] outside [0, 1]")));
        }
        let mut acc = 0.0;
        for (x0, x1, l) in self.steps() {
            let a = x0.max(lo);
            let b = x1.min(hi);
            if a >= b {
                if x0 >= hi {
                    break;
                }
                continue;
            }
            acc += l.powf(r) * w.integral(a, b)?;
        }
        if acc.is_infinite() {
            return Err(Error::Overflow("weighted integral of step function".into()));
        }
        Ok(acc)
    }
}

fn check_threshold(t: f64) -> Result<()> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("threshold {t} must be nonnegative")));
    }
    Ok(())
}

/// `D_f(t) = |{x : |f(x)| ≥ t}|`.
pub fn distribution(f: &SimpleFunction, t: f64) -> Result<f64> {
    check_threshold(t)?;
    if t == 0.0 {
        return Ok(1.0);
    }
    Ok(f.pieces
        .iter()
        .filter(|p| p.0.abs() >= t)
        .map(|p| p.1)
        .sum())
}

/// The decreasing rearrangement `f_*`.
pub fn rearrange(f: &SimpleFunction) -> StepFunction {
    let mut pieces: Vec<(f64, f64)> = f
        .pieces
        .iter()
        .filter(|p| p.0 != 0.0 && p.1 > 0.0)
        .map(|&(v, m)| (v.abs(), m))
        .collect();
    pieces.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut breakpoints: Vec<f64> = Vec::with_capacity(pieces.len());
    let mut levels: Vec<f64> = Vec::with_capacity(pieces.len());
    let mut cum = 0.0;
    for (v, m) in pieces {
        cum += m;
        if levels.last() == Some(&v) {
            *breakpoints.last_mut().expect("paired with levels") = cum;
        } else {
            breakpoints.push(cum);
            levels.push(v);
        }
    }
    if let Some(last) = breakpoints.last_mut() {
        if *last > 1.0 {
            *last = 1.0;
        }
    }
    StepFunction {
        breakpoints,
        levels,
    }
}

/// `f_**(s) = (1/s) ∫_0^s f_*`, for `0 < s < 1`.
pub fn maximal(g: &StepFunction, s: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain(format!("maximal function needs 0 < s < 1, got {s}")));
    }
    Ok(g.integral_to(s) / s)
}

/// `∫_0^1 g(t)^r t^a (1 - log t)^b dt`.
pub fn integrate_weighted(g: &StepFunction, w: LogPowerWeight, r: f64) -> Result<f64> {
    g.integrate_weighted(w, r)
}
