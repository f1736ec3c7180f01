use serde::Serialize;

use crate::error::{Error, Result};
use crate::norms::{space_norm, MemberRatio, RatioStats, SpaceSpec};
use crate::rearrange::{log_var, LogPowerWeight, SimpleFunction};

use super::kfunc::log_interp_outcome;
use super::{CoupleSpec, InterpParams};

/// Points at which the slowly varying quotient is evaluated.
pub const KARAMATA_POINTS: [f64; 3] = [1e-4, 1e-8, 1e-12];
/// Allowed relative distance to the limit at the smallest point.
pub const KARAMATA_TOL: f64 = 0.05;

/// Which identification applies to a couple and parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentificationCase {
    /// `0 < θ < 1`: a Lorentz–Zygmund space.
    Intermediate,
    /// `θ = 0`, `q0 < ∞`: a GGamma space with an inner integral.
    LowerEndpoint,
    /// `θ = 0`, `q0 = ∞`: a GGamma space with an inner supremum.
    LowerEndpointWeak,
    /// `θ = 1`, `q1 = p1 < ∞`.
    UpperEndpoint,
    /// `θ = 1`, `q1 = ∞`.
    UpperEndpointWeak,
    /// `θ = 1`, `q = ∞`, `α = 0`: the second member itself.
    UpperEndpointSup,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Identification {
    pub space: SpaceSpec,
    pub case: IdentificationCase,
}

fn unsupported(msg: String) -> Error {
    Error::UnsupportedIdentification(msg)
}

fn recip(p: f64) -> f64 {
    if p.is_infinite() {
        0.0
    } else {
        1.0 / p
    }
}

/// Symbolic description of `(X0, X1)_{θ,q;α}` for Lorentz and
/// Lorentz–Zygmund couples with `p0 < p1`.
pub fn identify_interp_space(couple: &CoupleSpec, params: &InterpParams) -> Result<Identification> {
    couple.check_params(params).map_err(|e| match e {
        Error::Parameter(m) => unsupported(m),
        other => other,
    })?;
    let (Some((p0, q0, a0)), Some((p1, q1, a1))) = (couple.x0.as_lorentz_zygmund(), couple.x1.as_lorentz_zygmund())
    else {
        return Err(unsupported(format!(
            "couple ({}, {}) is not made of Lorentz–Zygmund spaces",
            couple.x0, couple.x1
        )));
    };
    if !(p0 < p1) {
        return Err(unsupported(format!("needs p0 < p1, got p0 = {p0}, p1 = {p1}")));
    }
    if !(p0 >= 1.0 && q0 >= 1.0 && q1 >= 1.0) {
        return Err(unsupported("member exponents must be at least 1".into()));
    }
    let InterpParams { theta, q, alpha } = *params;
    if theta == 1.0 && q.is_infinite() && alpha == 0.0 {
        return Ok(Identification {
            space: couple.x1,
            case: IdentificationCase::UpperEndpointSup,
        });
    }
    if theta > 0.0 && theta < 1.0 {
        let p_theta = 1.0 / ((1.0 - theta) * recip(p0) + theta * recip(p1));
        return Ok(Identification {
            space: SpaceSpec::lorentz_zygmund(p_theta, q, (1.0 - theta) * a0 + theta * a1 + alpha),
            case: IdentificationCase::Intermediate,
        });
    }
    if q.is_infinite() {
        return Err(unsupported(format!("endpoint theta = {theta} needs q < inf")));
    }
    if a0 != 0.0 || a1 != 0.0 {
        return Err(unsupported(format!(
            "endpoint theta = {theta} is only available for Lorentz couples"
        )));
    }
    let w1 = LogPowerWeight::new(-1.0, alpha * q);
    let (space, case) = if theta == 0.0 {
        if q0.is_infinite() {
            (
                SpaceSpec::GGamma {
                    p: f64::INFINITY,
                    m: q,
                    w1,
                    w2: LogPowerWeight::power(recip(p0)),
                },
                IdentificationCase::LowerEndpointWeak,
            )
        } else {
            (
                SpaceSpec::GGamma {
                    p: q0,
                    m: q,
                    w1,
                    w2: LogPowerWeight::power(q0 / p0 - 1.0),
                },
                IdentificationCase::LowerEndpoint,
            )
        }
    } else if q1.is_infinite() {
        (
            SpaceSpec::GGamma {
                p: f64::INFINITY,
                m: q,
                w1,
                w2: LogPowerWeight::power(recip(p1)),
            },
            IdentificationCase::UpperEndpointWeak,
        )
    } else if q1 == p1 {
        // Split α = γ/q + β/p1 with γ = 0, so that γ > -1 and γ + βq/p1 + 1 = αq + 1 < 0.
        (
            SpaceSpec::GGamma {
                p: p1,
                m: q,
                w1: LogPowerWeight::power(-1.0),
                w2: LogPowerWeight::new(0.0, alpha * p1),
            },
            IdentificationCase::UpperEndpoint,
        )
    } else {
        return Err(unsupported(format!(
            "theta = 1 needs q1 = p1 or q1 = inf, got p1 = {p1}, q1 = {q1}"
        )));
    };
    space.validate().map_err(|e| unsupported(e.to_string()))?;
    Ok(Identification { space, case })
}

/// `[1 - log(t^d (1 - log t)^{α0-α1})] / (1 - log t)` with `d = 1/p0 - 1/p1`;
/// tends to `d` as `t → 0`.
pub fn karamata_quotient(couple: &CoupleSpec, t: f64) -> Result<f64> {
    let (Some((p0, _, a0)), Some((p1, _, a1))) = (couple.x0.as_lorentz_zygmund(), couple.x1.as_lorentz_zygmund())
    else {
        return Err(unsupported("quotient needs Lorentz–Zygmund members".into()));
    };
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::Domain(format!("t = {t} outside (0, 1)")));
    }
    let d = recip(p0) - recip(p1);
    let u = log_var(t);
    Ok((1.0 - d * t.ln() - (a0 - a1) * u.ln()) / u)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KaramataCheck {
    /// `(t, quotient)` pairs.
    pub points: Vec<(f64, f64)>,
    pub limit: f64,
    pub rel_error: f64,
    pub pass: bool,
}

impl KaramataCheck {
    pub fn for_couple(couple: &CoupleSpec) -> Result<Self> {
        let points = KARAMATA_POINTS
            .iter()
            .map(|&t| Ok((t, karamata_quotient(couple, t)?)))
            .collect::<Result<Vec<_>>>()?;
        let (p0, p1) = match (couple.x0.as_lorentz_zygmund(), couple.x1.as_lorentz_zygmund()) {
            (Some(a), Some(b)) => (a.0, b.0),
            _ => unreachable!("checked by karamata_quotient"),
        };
        let limit = recip(p0) - recip(p1);
        let last = points.last().expect("three points").1;
        let rel_error = ((last - limit) / limit).abs();
        Ok(KaramataCheck {
            points,
            limit,
            rel_error,
            pass: rel_error <= KARAMATA_TOL,
        })
    }
}

/// Interpolation norm against the norm of the identified space over a family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub identification: Identification,
    pub rows: Vec<MemberRatio>,
    pub stats: Option<RatioStats>,
    pub excluded: usize,
    /// Largest Richardson error estimate among the interpolation norms.
    pub max_richardson_error: f64,
    pub karamata: KaramataCheck,
}

impl VerificationReport {
    pub fn spread(&self) -> f64 {
        self.stats.map_or(f64::NAN, |s| s.max / s.min)
    }
}

pub fn verify_identification(
    couple: &CoupleSpec,
    params: &InterpParams,
    family: &[SimpleFunction],
) -> Result<VerificationReport> {
    let identification = identify_interp_space(couple, params)?;
    let karamata = KaramataCheck::for_couple(couple)?;
    let mut max_richardson_error = 0.0f64;
    let mut rows = Vec::with_capacity(family.len());
    for (member_id, f) in family.iter().enumerate() {
        let a = log_interp_outcome(f, couple, params);
        let b = space_norm(f, &identification.space);
        let row = match (a, b) {
            (Ok(a), Ok(b)) => {
                max_richardson_error = max_richardson_error.max(a.richardson_error);
                let a = a.value;
                MemberRatio {
                    member_id,
                    norm_a: a,
                    norm_b: b,
                    ratio: Some(if a == 0.0 && b == 0.0 { 1.0 } else { b / a }),
                    flag: None,
                }
            }
            (a, b) => {
                let flag = [a.as_ref().err(), b.as_ref().err()]
                    .into_iter()
                    .flatten()
                    .map(|e| e.to_string())
                    .collect::<Vec<_>>()
                    .join("; ");
                MemberRatio {
                    member_id,
                    norm_a: a.map_or(f64::NAN, |o| o.value),
                    norm_b: b.unwrap_or(f64::NAN),
                    ratio: None,
                    flag: Some(flag),
                }
            }
        };
        rows.push(row);
    }
    let values: Vec<f64> = rows.iter().filter_map(|r| r.ratio).collect();
    Ok(VerificationReport {
        identification,
        stats: RatioStats::from_values(&values),
        excluded: rows.len() - values.len(),
        rows,
        max_richardson_error,
        karamata,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::power_log_family;

    fn couple(x0: SpaceSpec, x1: SpaceSpec) -> CoupleSpec {
        CoupleSpec::new(x0, x1)
    }

    #[test]
    fn intermediate_lebesgue() {
        let c = couple(SpaceSpec::lebesgue(1.0), SpaceSpec::lebesgue(2.0));
        for alpha in [-0.5, 0.0, 1.0] {
            let id = identify_interp_space(&c, &InterpParams::new(0.5, 3.0, alpha)).unwrap();
            assert_eq!(id.case, IdentificationCase::Intermediate);
            match id.space {
                SpaceSpec::LorentzZygmund { p, q, lambda } => {
                    assert!((p - 4.0 / 3.0).abs() < 1e-15);
                    assert_eq!((q, lambda), (3.0, alpha));
                }
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn log_exponents_combine() {
        let c = couple(
            SpaceSpec::lorentz_zygmund(2.0, 1.0, 0.4),
            SpaceSpec::lorentz_zygmund(5.0, 3.0, -1.0),
        );
        let id = identify_interp_space(&c, &InterpParams::new(0.25, 2.0, 0.3)).unwrap();
        let want_lambda = 0.75 * 0.4 + 0.25 * (-1.0) + 0.3;
        let want_p = 1.0 / (0.75 / 2.0 + 0.25 / 5.0);
        match id.space {
            SpaceSpec::LorentzZygmund { p, q, lambda } => {
                assert!((p - want_p).abs() < 1e-14 && q == 2.0 && (lambda - want_lambda).abs() < 1e-14);
            }
            other => panic!("{other:?}"),
        }
        // With no log factors on the members the general rule gives the Lorentz case.
        let plain = couple(SpaceSpec::lorentz_zygmund(2.0, 1.0, 0.0), SpaceSpec::lorentz_zygmund(5.0, 3.0, 0.0));
        let lorentz = couple(SpaceSpec::lorentz(2.0, 1.0), SpaceSpec::lorentz(5.0, 3.0));
        let p = InterpParams::new(0.25, 2.0, 0.3);
        assert_eq!(identify_interp_space(&plain, &p).unwrap(), identify_interp_space(&lorentz, &p).unwrap());
    }

    #[test]
    fn endpoint_cases() {
        let c = couple(SpaceSpec::lorentz(2.0, 3.0), SpaceSpec::lorentz(4.0, 4.0));
        let lower = identify_interp_space(&c, &InterpParams::new(0.0, 2.0, 0.5)).unwrap();
        assert_eq!(lower.case, IdentificationCase::LowerEndpoint);
        assert_eq!(
            lower.space,
            SpaceSpec::GGamma {
                p: 3.0,
                m: 2.0,
                w1: LogPowerWeight::new(-1.0, 1.0),
                w2: LogPowerWeight::power(0.5),
            }
        );
        let upper = identify_interp_space(&c, &InterpParams::new(1.0, 2.0, -1.0)).unwrap();
        assert_eq!(upper.case, IdentificationCase::UpperEndpoint);
        assert_eq!(
            upper.space,
            SpaceSpec::GGamma {
                p: 4.0,
                m: 2.0,
                w1: LogPowerWeight::power(-1.0),
                w2: LogPowerWeight::new(0.0, -4.0),
            }
        );
        let weak = couple(SpaceSpec::lorentz(2.0, f64::INFINITY), SpaceSpec::lebesgue(f64::INFINITY));
        let id = identify_interp_space(&weak, &InterpParams::new(0.0, 1.0, 0.0)).unwrap();
        assert_eq!(id.case, IdentificationCase::LowerEndpointWeak);
        assert_eq!(
            id.space,
            SpaceSpec::GGamma {
                p: f64::INFINITY,
                m: 1.0,
                w1: LogPowerWeight::power(-1.0),
                w2: LogPowerWeight::power(0.5),
            }
        );
        let id = identify_interp_space(&weak, &InterpParams::new(1.0, 1.0, -2.0)).unwrap();
        assert_eq!(id.case, IdentificationCase::UpperEndpointWeak);
        let id = identify_interp_space(&weak, &InterpParams::new(1.0, f64::INFINITY, 0.0)).unwrap();
        assert_eq!(id.space, weak.x1);
    }

    #[test]
    fn unsupported_hypotheses() {
        let c = couple(SpaceSpec::lebesgue(1.0), SpaceSpec::lebesgue(2.0));
        for p in [InterpParams::new(0.0, 2.0, -1.0), InterpParams::new(1.0, 2.0, 0.0)] {
            assert!(matches!(
                identify_interp_space(&c, &p),
                Err(Error::UnsupportedIdentification(_))
            ));
        }
        assert!(identify_interp_space(&c.swapped(), &InterpParams::new(0.5, 1.0, 0.0)).is_err());
        let grand = couple(SpaceSpec::Grand { p: 2.0, alpha: 1.0 }, SpaceSpec::lebesgue(3.0));
        assert!(identify_interp_space(&grand, &InterpParams::new(0.5, 1.0, 0.0)).is_err());
        let mismatched = couple(SpaceSpec::lebesgue(1.0), SpaceSpec::lorentz(3.0, 2.0));
        assert!(identify_interp_space(&mismatched, &InterpParams::new(1.0, 1.0, -2.0)).is_err());
    }

    #[test]
    fn karamata_quotient_limits() {
        let exact = couple(SpaceSpec::lebesgue(1.0), SpaceSpec::lebesgue(f64::INFINITY));
        let chk = KaramataCheck::for_couple(&exact).unwrap();
        assert!(chk.points.iter().all(|&(_, v)| (v - 1.0).abs() < 1e-15));
        let half = couple(SpaceSpec::lebesgue(1.0), SpaceSpec::lebesgue(2.0));
        let chk = KaramataCheck::for_couple(&half).unwrap();
        // (1 + 12 ln 10 / 2) / (1 + 12 ln 10)
        let want = (1.0 + 6.0 * 10f64.ln()) / (1.0 + 12.0 * 10f64.ln());
        assert!((chk.points[2].1 - want).abs() < 1e-14);
        assert!(chk.pass);
        assert!(chk.points[0].1 > chk.points[1].1 && chk.points[1].1 > chk.points[2].1);
    }

    #[test]
    fn zero_member_has_unit_ratio() {
        let c = couple(SpaceSpec::lebesgue(1.0), SpaceSpec::lebesgue(2.0));
        let r = verify_identification(&c, &InterpParams::new(0.5, 1.0, 0.0), &[SimpleFunction::zero()]).unwrap();
        assert_eq!(r.rows[0].ratio, Some(1.0));
    }

    #[test]
    fn classical_lebesgue_is_recovered() {
        let c = couple(SpaceSpec::lebesgue(1.0), SpaceSpec::lebesgue(f64::INFINITY));
        let fam = power_log_family(&[2.5, 4.0, 8.0], &[0.0, 1.0]);
        let r = verify_identification(&c, &InterpParams::new(0.5, 2.0, 0.0), &fam).unwrap();
        assert_eq!(r.excluded, 0);
        let s = r.stats.unwrap();
        assert!(s.min > 0.1 && s.max < 10.0, "{s:?}");
    }
}
