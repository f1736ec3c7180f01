use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::norms::SpaceSpec;
use crate::plap::{exponents, Grid, PotentialSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Hölder and local-Lipschitz constants of the solution map.
    Holder,
    /// Source/target norm tables over a graded data family.
    Table,
    /// Boundedness of `u` and `∇u`.
    Bounds,
    /// Gradients of solutions with truncated data, compared with the least truncated one.
    Convergence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// `L^1 → L^{n'(p-1),∞}`.
    WeakL1,
    /// `L^{(p*)'} → L^p`.
    Sobolev,
    /// `L^{(p*)'} → L^p` for `1 < p < 2`, normalized by the data sizes.
    LocalLipschitz,
    /// `L^{k,r} → L^{k*(p-1), r(p-1)}`.
    Lorentz,
    /// Generalized Gamma spaces at the endpoint `θ = 0`.
    #[serde(rename = "ggamma_theta0")]
    GGammaTheta0,
    /// `L^{p*/(p*-θ),q}(log L)^λ → L^{p_θ,q(p-1)}(log L)^{λ/(p-1)}`.
    LorentzZygmund,
    /// The Lorentz–Zygmund bound under the growth condition on the potential.
    H3,
    /// `L^{k,r} → L^{k1,r}` for `1 < p < 2`.
    SmallP,
    /// `‖u‖_∞` against `‖f‖_{L^{n/p,1/(p-1)}}^{1/(p-1)}` along a scaling sweep.
    Homogeneity,
    /// `‖∇u‖_∞` against `(1 + ‖f‖_1^{(m1+1-p)/(p-1)}) ‖f‖_{L^{n,1}}^{1/(p-1)}`.
    GradientH3,
    /// `‖V(·,u)‖_{L^{n,1}}^{1/(p-1)}` against `‖f‖_{L^{n,1}}^{1/(p-1)} ‖f‖_1^{(m1+1-p)/(p-1)}`.
    PotentialH3,
    /// Truncations `min(f, k)` of one spike.
    Truncation,
}

impl Variant {
    pub fn kind(self) -> ExperimentKind {
        use Variant::*;
        match self {
            WeakL1 | Sobolev | LocalLipschitz => ExperimentKind::Holder,
            Lorentz | GGammaTheta0 | LorentzZygmund | H3 | SmallP => ExperimentKind::Table,
            Homogeneity | GradientH3 | PotentialH3 => ExperimentKind::Bounds,
            Truncation => ExperimentKind::Convergence,
        }
    }

    pub fn default_for(kind: ExperimentKind) -> Variant {
        match kind {
            ExperimentKind::Holder => Variant::WeakL1,
            ExperimentKind::Table => Variant::Lorentz,
            ExperimentKind::Bounds => Variant::Homogeneity,
            ExperimentKind::Convergence => Variant::Truncation,
        }
    }

    pub fn name(self) -> &'static str {
        use Variant::*;
        match self {
            WeakL1 => "weak_l1",
            Sobolev => "sobolev",
            LocalLipschitz => "local_lipschitz",
            Lorentz => "lorentz",
            GGammaTheta0 => "ggamma_theta0",
            LorentzZygmund => "lorentz_zygmund",
            H3 => "h3",
            SmallP => "small_p",
            Homogeneity => "homogeneity",
            GradientH3 => "gradient_h3",
            PotentialH3 => "potential_h3",
            Truncation => "truncation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    #[default]
    Square,
    Disk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_cells")]
    pub cells: usize,
    /// A second, finer resolution for the refinement-drift check.
    #[serde(default)]
    pub refine: Option<usize>,
    #[serde(default)]
    pub domain: Domain,
}

fn default_cells() -> usize {
    32
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            cells: default_cells(),
            refine: None,
            domain: Domain::Square,
        }
    }
}

/// `V(x, σ) = c sign(σ) |σ|^{m1}`; `m1` defaults to `p - 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    #[serde(default)]
    pub c: f64,
    #[serde(default)]
    pub m1: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    /// `a min(cap, |x - x0|^{-γ})`.
    Spikes,
    /// `a exp(-|x - x0|² / 2w²)`.
    Bumps,
    /// Spikes and bumps alternately.
    #[default]
    Mixed,
    Constant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    #[serde(default)]
    pub kind: FamilyKind,
    /// Spike exponent; by default 0.8 times the critical exponent of the source space.
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default = "default_cap")]
    pub cap: f64,
    /// Value of the constant family.
    #[serde(default = "default_value")]
    pub value: f64,
}

fn default_cap() -> f64 {
    100.0
}

fn default_value() -> f64 {
    1.0
}

impl Default for FamilyConfig {
    fn default() -> Self {
        FamilyConfig {
            kind: FamilyKind::Mixed,
            gamma: None,
            cap: default_cap(),
            value: default_value(),
        }
    }
}

/// Exponents of the regularity tables. Unused fields are ignored by a variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterpConfig {
    #[serde(default)]
    pub theta: Option<f64>,
    #[serde(default = "default_q")]
    pub q: f64,
    /// Logarithmic exponent λ.
    #[serde(default)]
    pub lambda: f64,
    /// Lebesgue index of the source space; derived from θ when absent.
    #[serde(default)]
    pub k: Option<f64>,
    /// Lorentz second index of the source space.
    #[serde(default = "default_q")]
    pub r: f64,
}

fn default_q() -> f64 {
    2.0
}

impl Default for InterpConfig {
    fn default() -> Self {
        InterpConfig {
            theta: None,
            q: default_q(),
            lambda: 0.0,
            k: None,
            r: default_q(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_solver_tol")]
    pub solver: f64,
    /// Relative change allowed in the empirical sup between two resolutions.
    #[serde(default = "default_drift")]
    pub drift: f64,
    /// Bound on `max/min` of the ratios over a family.
    #[serde(default = "default_spread")]
    pub spread: f64,
    /// Relative growth of the sup allowed when the data difference shrinks.
    #[serde(default = "default_shrink_slack")]
    pub shrink_slack: f64,
    /// Relative spread allowed along a scaling sweep.
    #[serde(default = "default_homogeneity")]
    pub homogeneity: f64,
}

fn default_solver_tol() -> f64 {
    crate::plap::DEFAULT_TOL
}
fn default_drift() -> f64 {
    0.2
}
fn default_spread() -> f64 {
    1e3
}
fn default_shrink_slack() -> f64 {
    0.05
}
fn default_homogeneity() -> f64 {
    1e-6
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            solver: default_solver_tol(),
            drift: default_drift(),
            spread: default_spread(),
            shrink_slack: default_shrink_slack(),
            homogeneity: default_homogeneity(),
        }
    }
}

/// Everything that determines an experiment. Randomness is drawn from `seed` only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub variant: Option<Variant>,
    pub p: f64,
    /// Space dimension; the grid is an interval for 1 and a planar domain for 2.
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub potential: PotentialConfig,
    #[serde(default)]
    pub family: FamilyConfig,
    /// Overrides the source space implied by the variant.
    #[serde(default)]
    pub source: Option<SpaceSpec>,
    /// Overrides the target space implied by the variant.
    #[serde(default)]
    pub target: Option<SpaceSpec>,
    #[serde(default)]
    pub interp: InterpConfig,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    /// Factors ε in `f2 = f1 + ε (g - f1)`.
    #[serde(default = "default_shrink")]
    pub shrink: Vec<f64>,
    /// Scaling factors for the homogeneity sweep.
    #[serde(default = "default_scales")]
    pub scales: Vec<f64>,
    /// Truncation levels for the convergence experiment.
    #[serde(default = "default_levels")]
    pub levels: Vec<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Not part of the config hash.
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn default_n() -> usize {
    2
}
fn default_samples() -> usize {
    50
}
fn default_shrink() -> Vec<f64> {
    vec![1.0, 0.1, 0.01]
}
fn default_scales() -> Vec<f64> {
    (0..=6).map(|k| 10f64.powf(0.5 * k as f64)).collect()
}
fn default_levels() -> Vec<f64> {
    vec![2.0, 4.0, 8.0, 16.0, 32.0, 64.0]
}

/// Source and target of one experiment, with the exponent applied to the
/// source norm in the ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpacePair {
    pub source: SpaceSpec,
    pub target: SpaceSpec,
}

fn config_err(field: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{field}: {msg}"))
}

impl ExperimentConfig {
    /// A config with every optional field at its default.
    pub fn new(kind: ExperimentKind, p: f64) -> Self {
        ExperimentConfig {
            kind,
            variant: None,
            p,
            n: default_n(),
            grid: GridConfig::default(),
            potential: PotentialConfig::default(),
            family: FamilyConfig::default(),
            source: None,
            target: None,
            interp: InterpConfig::default(),
            samples: default_samples(),
            seed: 0,
            shrink: default_shrink(),
            scales: default_scales(),
            levels: default_levels(),
            tolerances: Tolerances::default(),
            out: None,
        }
    }

    /// Parses JSON; errors name the path of the offending field.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            config_err(if path.is_empty() { "." } else { &path }, e.inner())
        })?;
        Ok(cfg)
    }

    pub fn variant(&self) -> Variant {
        self.variant.unwrap_or_else(|| Variant::default_for(self.kind))
    }

    /// SHA-256 of the canonical JSON form, without the output path.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.out = None;
        canonical.variant = Some(self.variant());
        let text = serde_json::to_string(&canonical).expect("config serializes");
        Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn potential_spec(&self) -> PotentialSpec {
        if self.potential.c == 0.0 {
            PotentialSpec::zero()
        } else {
            PotentialSpec::constant(self.potential.c, self.potential.m1.unwrap_or(self.p - 1.0))
        }
    }

    pub fn make_grid(&self, cells: usize) -> Result<Grid> {
        match (self.n, self.grid.domain) {
            (1, _) => Grid::interval(cells),
            (2, Domain::Square) => Grid::square(cells),
            (2, Domain::Disk) => Grid::disk(cells),
            (n, _) => Err(config_err("n", format!("dimension {n} is not supported, use 1 or 2"))),
        }
    }

    /// Checks the config and the exponent relations of its variant.
    pub fn validate(&self) -> Result<()> {
        let v = self.variant();
        if v.kind() != self.kind {
            return Err(config_err("variant", format!("{} is not a {:?} experiment", v.name(), self.kind)));
        }
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(config_err("p", format!("{} must be a finite number above 1", self.p)));
        }
        if !(1..=2).contains(&self.n) {
            return Err(config_err("n", format!("dimension {} is not supported, use 1 or 2", self.n)));
        }
        if self.grid.cells < 2 {
            return Err(config_err("grid.cells", "at least 2 cells are needed"));
        }
        if let Some(r) = self.grid.refine {
            if r <= self.grid.cells {
                return Err(config_err("grid.refine", "must exceed grid.cells"));
            }
        }
        if self.samples == 0 {
            return Err(config_err("samples", "must be positive"));
        }
        if !(self.tolerances.solver > 0.0) {
            return Err(config_err("tolerances.solver", "must be positive"));
        }
        if !(self.potential.c >= 0.0 && self.potential.c.is_finite()) {
            return Err(config_err("potential.c", "must be finite and nonnegative"));
        }
        if let Some(m1) = self.potential.m1 {
            if self.potential.c > 0.0 && !(m1 >= self.p - 1.0) {
                return Err(config_err("potential.m1", format!("{m1} is below p - 1")));
            }
        }
        let fam = &self.family;
        if let Some(g) = fam.gamma {
            if !(g > 0.0 && g.is_finite()) {
                return Err(config_err("family.gamma", "must be positive"));
            }
        }
        if !(fam.cap > 0.0 && fam.cap.is_finite()) {
            return Err(config_err("family.cap", "must be positive"));
        }
        if !fam.value.is_finite() {
            return Err(config_err("family.value", "must be finite"));
        }
        for (name, spec) in [("source", &self.source), ("target", &self.target)] {
            if let Some(s) = spec {
                s.validate().map_err(|e| config_err(name, e))?;
            }
        }
        match v {
            Variant::WeakL1 | Variant::Sobolev if self.p < 2.0 => {
                return Err(config_err("p", "Hölder variants need p >= 2"));
            }
            Variant::WeakL1 if self.n < 2 => return Err(config_err("n", "needs n >= 2")),
            Variant::LocalLipschitz if self.p >= 2.0 => {
                return Err(config_err("p", "the local-Lipschitz variant needs 1 < p < 2"));
            }
            Variant::Homogeneity if !self.potential_spec().is_zero() => {
                return Err(config_err("potential.c", "the homogeneity sweep needs V = 0"));
            }
            Variant::Homogeneity if self.p > self.n as f64 => {
                return Err(config_err("p", "the L-infinity bound needs p <= n"));
            }
            Variant::GradientH3 | Variant::PotentialH3 if self.potential_spec().is_zero() => {
                return Err(config_err("potential.c", "the growth-condition bounds need c > 0"));
            }
            _ => {}
        }
        if v.kind() == ExperimentKind::Holder {
            if self.shrink.is_empty() || self.shrink.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
                return Err(config_err("shrink", "factors must lie in (0, 1]"));
            }
            if self.shrink.windows(2).any(|w| w[1] >= w[0]) {
                return Err(config_err("shrink", "factors must decrease"));
            }
        }
        if v == Variant::Homogeneity && (self.scales.is_empty() || self.scales.iter().any(|&c| !(c > 0.0 && c.is_finite()))) {
            return Err(config_err("scales", "factors must be positive"));
        }
        if v == Variant::Truncation && (self.levels.is_empty() || self.levels.iter().any(|&k| !(k > 0.0 && k.is_finite()))) {
            return Err(config_err("levels", "levels must be positive"));
        }
        self.spaces().map(|_| ())
    }

    /// Source and target spaces of the variant, after overrides.
    pub fn spaces(&self) -> Result<SpacePair> {
        let derived = self.derived_spaces()?;
        Ok(SpacePair {
            source: self.source.unwrap_or(derived.source),
            target: self.target.unwrap_or(derived.target),
        })
    }

    fn derived_spaces(&self) -> Result<SpacePair> {
        let (p, n) = (self.p, self.n);
        let nf = n as f64;
        let ps = exponents::sobolev(n, p);
        let ps_conj = exponents::sobolev_conjugate(n, p);
        let ip = &self.interp;
        let theta_in = |lo_open: bool| -> Result<f64> {
            let t = ip.theta.ok_or_else(|| config_err("interp.theta", "required by this variant"))?;
            let ok = if lo_open { t > 0.0 && t < 1.0 } else { (0.0..1.0).contains(&t) };
            if ok {
                Ok(t)
            } else {
                Err(config_err("interp.theta", format!("{t} is outside the admissible range")))
            }
        };
        let q_at_least_one = || {
            if ip.q >= 1.0 {
                Ok(ip.q)
            } else {
                Err(config_err("interp.q", "must be at least 1"))
            }
        };
        use Variant::*;
        let pair = |source, target| Ok(SpacePair { source, target });
        match self.variant() {
            WeakL1 => pair(SpaceSpec::lebesgue(1.0), SpaceSpec::lorentz(exponents::gradient_weak_exponent(n, p)?, f64::INFINITY)),
            Sobolev | LocalLipschitz => pair(SpaceSpec::lebesgue(ps_conj), SpaceSpec::lebesgue(p)),
            Lorentz => {
                let k = match (ip.k, ip.theta) {
                    (Some(k), _) => k,
                    (None, Some(t)) => ps / (ps - t),
                    (None, None) => return Err(config_err("interp.k", "give k or theta")),
                };
                if !(k > 1.0 && k < ps_conj) {
                    return Err(config_err("interp.k", format!("{k} is outside (1, (p*)') = (1, {ps_conj})")));
                }
                if !(ip.r >= 1.0) {
                    return Err(config_err("interp.r", "must be at least 1"));
                }
                let k_star = nf * k / (nf - k);
                pair(SpaceSpec::lorentz(k, ip.r), SpaceSpec::lorentz(k_star * (p - 1.0), ip.r * (p - 1.0)))
            }
            GGammaTheta0 => {
                let q = q_at_least_one()?;
                let lam = ip.lambda;
                let w1 = crate::rearrange::LogPowerWeight::new(-1.0, lam * q);
                let w2 = crate::rearrange::LogPowerWeight::power(1.0 / exponents::gradient_weak_exponent(n, p)?);
                pair(
                    SpaceSpec::GGamma {
                        p: 1.0,
                        m: q,
                        w1,
                        w2: crate::rearrange::LogPowerWeight::UNIT,
                    },
                    SpaceSpec::GGamma {
                        p: f64::INFINITY,
                        m: q * (p - 1.0),
                        w1,
                        w2,
                    },
                )
            }
            LorentzZygmund => {
                let t = theta_in(true)?;
                let q = q_at_least_one()?;
                let inv_pt = (1.0 - t) / exponents::gradient_weak_exponent(n, p)? + t / p;
                pair(
                    SpaceSpec::lorentz_zygmund(ps / (ps - t), q, ip.lambda),
                    SpaceSpec::lorentz_zygmund(1.0 / inv_pt, q * (p - 1.0), ip.lambda / (p - 1.0)),
                )
            }
            H3 => {
                let t = theta_in(true)?;
                if !(ip.q > 1.0 && ip.q.is_finite()) {
                    return Err(config_err("interp.q", "must lie in (1, inf)"));
                }
                if self.potential_spec().is_zero() {
                    return Err(config_err("potential.c", "the growth-condition table needs c > 0"));
                }
                let nc = exponents::dimension_conjugate(n)?;
                pair(
                    SpaceSpec::lorentz_zygmund(nc / (nc - t), ip.q, ip.lambda),
                    SpaceSpec::lorentz_zygmund(nf * (p - 1.0) / ((1.0 - t) * (nf - 1.0)), ip.q * (p - 1.0), ip.lambda / (p - 1.0)),
                )
            }
            SmallP => {
                if p >= 2.0 {
                    return Err(config_err("p", "this table needs 1 < p < 2"));
                }
                let k = ip.k.ok_or_else(|| config_err("interp.k", "required by this variant"))?;
                if !(k > ps_conj && k < nf) {
                    return Err(config_err("interp.k", format!("{k} is outside ((p*)', n) = ({ps_conj}, {nf})")));
                }
                if !(ip.r >= 1.0) {
                    return Err(config_err("interp.r", "must be at least 1"));
                }
                let theta = (1.0 / ps_conj - 1.0 / k) / (1.0 / ps_conj - 1.0 / nf);
                let k1 = p / (1.0 - theta * (p - 1.0));
                pair(SpaceSpec::lorentz(k, ip.r), SpaceSpec::lorentz(k1, ip.r))
            }
            Homogeneity => pair(SpaceSpec::lorentz(nf / p, 1.0 / (p - 1.0)), SpaceSpec::lebesgue(f64::INFINITY)),
            GradientH3 | PotentialH3 => pair(SpaceSpec::lorentz(nf, 1.0), SpaceSpec::lebesgue(f64::INFINITY)),
            Truncation => pair(SpaceSpec::lebesgue(1.0), SpaceSpec::lebesgue(1.0)),
        }
    }
}
