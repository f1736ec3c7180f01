use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rearrange::LogPowerWeight;

/// Serde helper for exponents that may be `+∞`, written as the string `"inf"`.
pub mod ext_real {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if *v == f64::INFINITY {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Str(s) => match s.to_ascii_lowercase().as_str() {
                "inf" | "infinity" | "+inf" => Ok(f64::INFINITY),
                other => Err(serde::de::Error::custom(format!(
                    "expected a number or \"inf\", got \"{other}\""
                ))),
            },
        }
    }
}

fn unit_weight() -> LogPowerWeight {
    LogPowerWeight::UNIT
}

/// Symbolic description of a rearrangement-invariant space on a domain of
/// unit measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceSpec {
    Lebesgue {
        #[serde(with = "ext_real")]
        p: f64,
    },
    Lorentz {
        #[serde(with = "ext_real")]
        p: f64,
        #[serde(with = "ext_real")]
        q: f64,
    },
    LorentzZygmund {
        #[serde(with = "ext_real")]
        p: f64,
        #[serde(with = "ext_real")]
        q: f64,
        lambda: f64,
    },
    /// Grand Lebesgue space, `sup_ε (ε^α ∫|f|^{p-ε})^{1/(p-ε)}`.
    Grand { p: f64, alpha: f64 },
    /// Small Lebesgue space, the associate of the grand space with the
    /// conjugate exponent.
    Small { p: f64, alpha: f64 },
    /// `[∫_0^1 w1(t) (∫_0^t f_*^p w2)^{m/p} dt]^{1/m}`; `p = ∞` replaces the
    /// inner integral by `sup_{s<t} w2(s) f_*(s)`.
    #[serde(rename = "ggamma")]
    GGamma {
        #[serde(with = "ext_real")]
        p: f64,
        #[serde(with = "ext_real")]
        m: f64,
        w1: LogPowerWeight,
        #[serde(default = "unit_weight")]
        w2: LogPowerWeight,
    },
}

fn fmt_exp(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        format!("{v}")
    }
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SpaceSpec::Lebesgue { p } => write!(f, "L^{}", fmt_exp(p)),
            SpaceSpec::Lorentz { p, q } => write!(f, "L^{{{},{}}}", fmt_exp(p), fmt_exp(q)),
            SpaceSpec::LorentzZygmund { p, q, lambda } => {
                write!(f, "L^{{{},{}}}(log L)^{}", fmt_exp(p), fmt_exp(q), lambda)
            }
            SpaceSpec::Grand { p, alpha } => write!(f, "L^{{{}),{}}}", p, alpha),
            SpaceSpec::Small { p, alpha } => write!(f, "L^{{({},{}}}", p, alpha),
            SpaceSpec::GGamma { p, m, w1, w2 } => write!(
                f,
                "GGamma({}, {}; t^{} (1-log t)^{}, t^{} (1-log t)^{})",
                fmt_exp(p),
                fmt_exp(m),
                w1.a,
                w1.b,
                w2.a,
                w2.b
            ),
        }
    }
}

fn finite_real(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Spec(format!("{name} must be finite, got {v}")))
    }
}

impl SpaceSpec {
    pub fn lebesgue(p: f64) -> Self {
        SpaceSpec::Lebesgue { p }
    }

    pub fn lorentz(p: f64, q: f64) -> Self {
        SpaceSpec::Lorentz { p, q }
    }

    pub fn lorentz_zygmund(p: f64, q: f64, lambda: f64) -> Self {
        SpaceSpec::LorentzZygmund { p, q, lambda }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 {
                Ok(())
            } else {
                Err(Error::Spec(format!("{name} must be positive, got {v}")))
            }
        };
        match *self {
            SpaceSpec::Lebesgue { p } => positive("p", p),
            SpaceSpec::Lorentz { p, q } => {
                positive("q", q)?;
                if p.is_infinite() {
                    if q.is_infinite() {
                        Ok(())
                    } else {
                        Err(Error::Spec("Lorentz space with p = inf needs q = inf".into()))
                    }
                } else if p >= 1.0 {
                    Ok(())
                } else {
                    Err(Error::Spec(format!("Lorentz exponent p = {p} must be at least 1")))
                }
            }
            SpaceSpec::LorentzZygmund { p, q, lambda } => {
                positive("p", p)?;
                positive("q", q)?;
                finite_real("lambda", lambda)
            }
            SpaceSpec::Grand { p, alpha } | SpaceSpec::Small { p, alpha } => {
                if !(p > 1.0 && p.is_finite()) {
                    return Err(Error::Spec(format!("exponent p = {p} must lie in (1, inf)")));
                }
                if !(alpha > 0.0 && alpha.is_finite()) {
                    return Err(Error::Spec(format!("alpha = {alpha} must be positive")));
                }
                Ok(())
            }
            SpaceSpec::GGamma { p, m, w1, w2 } => {
                if !(p >= 1.0) {
                    return Err(Error::Spec(format!("GGamma inner exponent p = {p} must be >= 1")));
                }
                if !(m >= 1.0) {
                    return Err(Error::Spec(format!("GGamma outer exponent m = {m} must be >= 1")));
                }
                for (name, w) in [("w1", w1), ("w2", w2)] {
                    if !(w.a.is_finite() && w.b.is_finite()) {
                        return Err(Error::Spec(format!("{name} exponents must be finite")));
                    }
                }
                Ok(())
            }
        }
    }

    /// Lebesgue and Lorentz specs written as Lorentz–Zygmund specs.
    pub fn as_lorentz_zygmund(&self) -> Option<(f64, f64, f64)> {
        match *self {
            SpaceSpec::Lebesgue { p } => Some((p, p, 0.0)),
            SpaceSpec::Lorentz { p, q } => Some((p, q, 0.0)),
            SpaceSpec::LorentzZygmund { p, q, lambda } => Some((p, q, lambda)),
            _ => None,
        }
    }
}
