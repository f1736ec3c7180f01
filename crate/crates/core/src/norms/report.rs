use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rearrange::{rearrange, SimpleFunction, StepFunction};

use super::eval::{grand_norm_fk, lorentz_maximal_norm, norm_of_rearrangement};
use super::registry::embedding_holds;
use super::spec::SpaceSpec;

/// Default bound on `max/min` for equivalence reports.
pub const DEFAULT_EQUIVALENCE_BUDGET: f64 = 1e3;

/// How much the maximum ratio over a whole family may exceed the maximum over
/// its first half before the family is declared unstable.
const STABILITY_FACTOR: f64 = 10.0;

/// A functional evaluated on decreasing rearrangements: a space norm, or one
/// of the equivalent forms used for cross-checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormTarget {
    Space(SpaceSpec),
    /// Lorentz norm with `f_**` in place of `f_*`.
    LorentzMaximal { p: f64, q: f64 },
    /// Equivalent sup form of the grand norm.
    GrandFk { p: f64, alpha: f64 },
}

impl From<SpaceSpec> for NormTarget {
    fn from(s: SpaceSpec) -> Self {
        NormTarget::Space(s)
    }
}

impl NormTarget {
    pub fn evaluate(&self, g: &StepFunction) -> Result<f64> {
        match *self {
            NormTarget::Space(ref s) => norm_of_rearrangement(g, s),
            NormTarget::LorentzMaximal { p, q } => lorentz_maximal_norm(g, p, q),
            NormTarget::GrandFk { p, alpha } => Ok(grand_norm_fk(g, p, alpha)),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            NormTarget::Space(ref s) => s.to_string(),
            NormTarget::LorentzMaximal { p, q } => format!("L^{{{p},{q}}} via f_**"),
            NormTarget::GrandFk { p, alpha } => format!("L^{{{p}),{alpha}}} sup form"),
        }
    }
}

/// One family member in a two-norm comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MemberRatio {
    pub member_id: usize,
    pub norm_a: f64,
    pub norm_b: f64,
    /// `norm_b / norm_a` (1 when both vanish); `None` when the member was excluded.
    pub ratio: Option<f64>,
    pub flag: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioStats {
    pub min: f64,
    pub max: f64,
    pub median: f64,
    pub count: usize,
}

impl RatioStats {
    pub fn from_values(values: &[f64]) -> Option<RatioStats> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let median = if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        };
        Some(RatioStats {
            min: v[0],
            max: v[n - 1],
            median,
            count: n,
        })
    }
}

fn compare(a: &NormTarget, b: &NormTarget, family: &[SimpleFunction]) -> Vec<MemberRatio> {
    family
        .iter()
        .enumerate()
        .map(|(member_id, f)| {
            let g = rearrange(f);
            let (na, nb) = (a.evaluate(&g), b.evaluate(&g));
            match (na, nb) {
                (Ok(x), Ok(y)) => {
                    let ratio = if x == 0.0 && y == 0.0 { 1.0 } else { y / x };
                    MemberRatio {
                        member_id,
                        norm_a: x,
                        norm_b: y,
                        ratio: Some(ratio),
                        flag: None,
                    }
                }
                (x, y) => {
                    let flag = [x.as_ref().err(), y.as_ref().err()]
                        .into_iter()
                        .flatten()
                        .map(|e| e.to_string())
                        .collect::<Vec<_>>()
                        .join("; ");
                    MemberRatio {
                        member_id,
                        norm_a: x.unwrap_or(f64::NAN),
                        norm_b: y.unwrap_or(f64::NAN),
                        ratio: None,
                        flag: Some(flag),
                    }
                }
            }
        })
        .collect()
}

fn ratios(rows: &[MemberRatio]) -> Vec<f64> {
    rows.iter().filter_map(|r| r.ratio).collect()
}

/// Ratios `‖f‖_target / ‖f‖_source` over a family, for a registered inclusion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddingReport {
    pub source: SpaceSpec,
    pub target: SpaceSpec,
    pub rows: Vec<MemberRatio>,
    pub stats: Option<RatioStats>,
    pub excluded: usize,
    /// The maximum over the whole family stays within a fixed factor of the
    /// maximum over its first half.
    pub stable: bool,
    pub pass: bool,
}

pub fn embedding_report(source: &SpaceSpec, target: &SpaceSpec, family: &[SimpleFunction]) -> Result<EmbeddingReport> {
    source.validate()?;
    target.validate()?;
    if !embedding_holds(source, target) {
        return Err(Error::UnsupportedEmbedding {
            source_space: source.to_string(),
            target_space: target.to_string(),
        });
    }
    let rows = compare(&NormTarget::Space(*source), &NormTarget::Space(*target), family);
    let excluded = rows.iter().filter(|r| r.ratio.is_none()).count();
    let all = ratios(&rows);
    let stats = RatioStats::from_values(&all);
    let half = ratios(&rows[..rows.len().div_ceil(2)]);
    let half_max = half.iter().copied().fold(0.0, f64::max);
    let stable = match stats {
        Some(s) => s.max <= STABILITY_FACTOR * half_max || s.max == 0.0,
        None => false,
    };
    let pass = stable && stats.is_some_and(|s| s.max.is_finite());
    Ok(EmbeddingReport {
        source: *source,
        target: *target,
        rows,
        stats,
        excluded,
        stable,
        pass,
    })
}

/// Two-sided ratios `‖f‖_B / ‖f‖_A` over a family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub label_a: String,
    pub label_b: String,
    pub rows: Vec<MemberRatio>,
    pub stats: Option<RatioStats>,
    pub excluded: usize,
    pub budget: f64,
    pub pass: bool,
}

impl EquivalenceReport {
    pub fn spread(&self) -> f64 {
        self.stats.map_or(f64::NAN, |s| s.max / s.min)
    }
}

pub fn equivalence_report(
    a: &NormTarget,
    b: &NormTarget,
    family: &[SimpleFunction],
    budget: f64,
) -> Result<EquivalenceReport> {
    for t in [a, b] {
        if let NormTarget::Space(s) = t {
            s.validate()?;
        }
    }
    let rows = compare(a, b, family);
    let excluded = rows.iter().filter(|r| r.ratio.is_none()).count();
    let stats = RatioStats::from_values(&ratios(&rows));
    let pass = stats.is_some_and(|s| s.min > 0.0 && s.max.is_finite() && s.max / s.min <= budget);
    Ok(EquivalenceReport {
        label_a: a.label(),
        label_b: b.label(),
        rows,
        stats,
        excluded,
        budget,
        pass,
    })
}

/// Writes rows as CSV with columns `family_id, member_id, norm_a, norm_b, ratio`.
pub fn write_ratio_csv<W: Write>(out: &mut W, family_id: &str, rows: &[MemberRatio], header: bool) -> std::io::Result<()> {
    if header {
        writeln!(out, "family_id,member_id,norm_a,norm_b,ratio")?;
    }
    for r in rows {
        let ratio = r.ratio.map_or_else(|| "excluded".to_string(), |v| format!("{v:e}"));
        writeln!(out, "{family_id},{},{:e},{:e},{ratio}", r.member_id, r.norm_a, r.norm_b)?;
    }
    Ok(())
}
