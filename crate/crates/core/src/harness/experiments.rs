use std::time::Instant;

use crate::error::{Error, Result};
use crate::family::rng_from_seed;
use crate::norms::{space_norm, SpaceSpec};
use crate::plap::{gradient_norm, solve_with, Grid, GridFunction, PotentialSpec, Solution, SolverOptions};

use super::config::{ExperimentConfig, ExperimentKind, FamilyKind, Variant};
use super::data::{blend, draw, Datum};
use super::record::ExperimentOutput;

/// Maps `f` over `items` on all available cores, keeping the input order.
fn par_map<T: Sync, R: Send, F: Fn(usize, &T) -> R + Sync>(items: &[T], f: F) -> Vec<R> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(items.len());
    if workers <= 1 {
        return items.iter().enumerate().map(|(i, t)| f(i, t)).collect();
    }
    let chunk = items.len().div_ceil(workers);
    let f = &f;
    std::thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .enumerate()
            .map(|(c, part)| s.spawn(move || part.iter().enumerate().map(|(j, t)| f(c * chunk + j, t)).collect::<Vec<R>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker thread panicked")).collect()
    })
}

/// Lebesgue-type index of a space, used to place spikes near its boundary.
fn integrability(spec: &SpaceSpec) -> f64 {
    match *spec {
        SpaceSpec::Lebesgue { p } | SpaceSpec::Lorentz { p, .. } | SpaceSpec::LorentzZygmund { p, .. } => p,
        SpaceSpec::Grand { p, .. } | SpaceSpec::Small { p, .. } | SpaceSpec::GGamma { p, .. } => p,
    }
}

fn default_gamma(cfg: &ExperimentConfig, source: &SpaceSpec, fraction: f64) -> f64 {
    cfg.family.gamma.unwrap_or_else(|| {
        let k = integrability(source);
        if k.is_finite() && k >= 1.0 {
            fraction * cfg.n as f64 / k
        } else {
            0.5
        }
    })
}

fn options(cfg: &ExperimentConfig, guess: Option<&GridFunction>) -> SolverOptions {
    SolverOptions {
        tol: cfg.tolerances.solver,
        initial_guess: guess.cloned(),
        ..SolverOptions::default()
    }
}

fn data_norm(f: &GridFunction, spec: &SpaceSpec) -> Result<f64> {
    space_norm(&f.to_simple(), spec)
}

/// `num / den^e`, with `0/0 = 0`.
fn holder_ratio(num: f64, den: f64, e: f64) -> f64 {
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den.powf(e)
    }
}

fn expect_kind(cfg: &ExperimentConfig, kind: ExperimentKind) -> Result<()> {
    if cfg.kind != kind {
        return Err(Error::Config(format!("kind: expected {kind:?}, got {:?}", cfg.kind)));
    }
    cfg.validate()
}

fn experiment_name(cfg: &ExperimentConfig) -> String {
    let prefix = match cfg.kind {
        ExperimentKind::Holder => "holder",
        ExperimentKind::Table => "table",
        ExperimentKind::Bounds => "bounds",
        ExperimentKind::Convergence => "convergence",
    };
    format!("{prefix}_{}", cfg.variant().name())
}

struct Row {
    id: String,
    value: Result<(f64, f64, f64)>,
    seconds: f64,
}

fn push_rows(out: &mut ExperimentOutput, rows: Vec<Row>) {
    for r in rows {
        match r.value {
            Ok((src, tgt, ratio)) => out.push_sample(r.id, src, tgt, ratio, r.seconds),
            Err(e) => out.push_excluded(r.id, &e, r.seconds),
        }
    }
}

fn max_of(v: &[f64]) -> Option<f64> {
    v.iter().copied().reduce(f64::max)
}

/// Samples pairs `f1`, `f2 = f1 + ε (g - f1)` for each shrink factor ε,
/// solves both problems and records `‖∇(u1 - u2)‖_target / ‖f1 - f2‖_source^{1/(p-1)}`;
/// the local-Lipschitz variant divides instead by
/// `(‖f1‖^{1/(p-1)} + ‖f2‖^{1/(p-1)})^{2-p} ‖f1 - f2‖` in the source norm.
///
/// Aggregates per resolution: ratio statistics and `shrink@N`, the sup at the
/// smallest shrink factor over the sup at the larger ones. With a
/// refinement level, `drift` is the relative change of the sup.
pub fn run_holder_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    expect_kind(cfg, ExperimentKind::Holder)?;
    let spaces = cfg.spaces()?;
    let (p, dim) = (cfg.p, cfg.n);
    let e = 1.0 / (p - 1.0);
    let local = cfg.variant() == Variant::LocalLipschitz;
    let gamma = default_gamma(cfg, &spaces.source, 0.8);
    let mut rng = rng_from_seed(cfg.seed);
    let pairs: Vec<(Datum, Datum)> = (0..cfg.samples)
        .map(|i| (draw(&mut rng, &cfg.family, i, dim, gamma), draw(&mut rng, &cfg.family, i + 1, dim, gamma)))
        .collect();
    let potential = cfg.potential_spec();
    let mut out = ExperimentOutput::new(&experiment_name(cfg), &cfg.hash());
    let resolutions: Vec<usize> = std::iter::once(cfg.grid.cells).chain(cfg.grid.refine).collect();
    let mut sups = Vec::new();
    for &cells in &resolutions {
        let grid = cfg.make_grid(cells)?;
        let rows: Vec<Vec<Row>> = par_map(&pairs, |i, (a, b)| {
            let start = Instant::now();
            let f1 = a.on(&grid);
            let first = solve_with(&grid, p, &potential, &f1, &options(cfg, None));
            let mut rows = Vec::new();
            for (j, &eps) in cfg.shrink.iter().enumerate() {
                let id = format!("c{cells}/e{j}/{i:03}");
                let value = first.as_ref().map_err(Clone::clone).and_then(|s1| {
                    let f2 = blend(a, b, eps, &grid);
                    let guess = (eps <= 0.5).then_some(&s1.u);
                    let s2 = solve_with(&grid, p, &potential, &f2, &options(cfg, guess))?;
                    let src = data_norm(&f1.sub(&f2)?, &spaces.source)?;
                    let tgt = gradient_norm(&s1.gradient().sub(&s2.gradient())?, &spaces.target)?;
                    let ratio = if local {
                        let n1 = data_norm(&f1, &spaces.source)?;
                        let n2 = data_norm(&f2, &spaces.source)?;
                        holder_ratio(tgt, (n1.powf(e) + n2.powf(e)).powf(2.0 - p) * src, 1.0)
                    } else {
                        holder_ratio(tgt, src, e)
                    };
                    Ok((src, tgt, ratio))
                });
                rows.push(Row {
                    id,
                    value,
                    seconds: 0.0,
                });
            }
            let per = start.elapsed().as_secs_f64() / rows.len() as f64;
            rows.iter_mut().for_each(|r| r.seconds = per);
            rows
        });
        push_rows(&mut out, rows.into_iter().flatten().collect());
        let label = format!("@{cells}");
        let stats = out.push_stats(&format!("c{cells}/"), &label);
        sups.push(stats.map(|s| s.max));
        let level_sups: Vec<Option<f64>> = (0..cfg.shrink.len())
            .map(|j| max_of(&out.ratios(&format!("c{cells}/e{j}/"))))
            .collect();
        // The sup at the smallest difference against the sup over the larger
        // ones. The normalized local-Lipschitz ratio tends to a finite limit,
        // so there only finiteness is required.
        let (last, earlier) = level_sups.split_last().expect("shrink levels are nonempty");
        let earlier = earlier.iter().flatten().copied().reduce(f64::max);
        let growth = match (*last, earlier) {
            (Some(b), Some(a)) if a > 0.0 => b / a,
            (Some(0.0), _) => 0.0,
            (Some(_), None) => 1.0,
            _ => f64::INFINITY,
        };
        let pass = if local { growth.is_finite() } else { growth <= 1.0 + cfg.tolerances.shrink_slack };
        out.push_aggregate(&format!("shrink{label}"), growth, pass);
    }
    if let [Some(coarse), Some(fine)] = sups[..] {
        let drift = if coarse > 0.0 { (fine / coarse - 1.0).abs() } else { f64::INFINITY };
        out.push_aggregate("drift", drift, drift < cfg.tolerances.drift);
    } else if sups.len() == 2 {
        out.push_aggregate("drift", f64::NAN, false);
    }
    Ok(out)
}

/// A graded family: spike exponents rise linearly to `gamma` (by default 0.9
/// of the critical exponent of the source space).
fn graded_family(cfg: &ExperimentConfig, source: &SpaceSpec) -> Vec<Datum> {
    let gamma = default_gamma(cfg, source, 0.9);
    let mut rng = rng_from_seed(cfg.seed);
    let count = if cfg.family.kind == FamilyKind::Constant { 1 } else { cfg.samples };
    (0..count)
        .map(|j| draw(&mut rng, &cfg.family, j, cfg.n, gamma * (j + 1) as f64 / count as f64))
        .collect()
}

fn push_spread(out: &mut ExperimentOutput, budget: f64) {
    let ratios = out.ratios("");
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &r| (lo.min(r), hi.max(r)));
    let spread = if hi == 0.0 { 1.0 } else { hi / lo };
    out.push_aggregate("spread", spread, spread <= budget);
}

fn solve_family<F>(cfg: &ExperimentConfig, grid: &Grid, data: &[Datum], measure: F) -> Vec<Row>
where
    F: Fn(&GridFunction, &Solution) -> Result<(f64, f64, f64)> + Sync,
{
    let potential = cfg.potential_spec();
    par_map(data, |i, d| {
        let start = Instant::now();
        let f = d.on(grid);
        let value = solve_with(grid, cfg.p, &potential, &f, &options(cfg, None)).and_then(|s| measure(&f, &s));
        Row {
            id: format!("{i:03}"),
            value,
            seconds: start.elapsed().as_secs_f64(),
        }
    })
}

/// Tabulates `‖f‖_source` against `‖∇u‖_target` over a graded family and
/// records `‖∇u‖_target / ‖f‖_source^{1/(p-1)}`. Aggregates: ratio statistics
/// and `spread = max/min`.
pub fn run_regularity_table(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    expect_kind(cfg, ExperimentKind::Table)?;
    let spaces = cfg.spaces()?;
    let grid = cfg.make_grid(cfg.grid.cells)?;
    let data = graded_family(cfg, &spaces.source);
    let e = 1.0 / (cfg.p - 1.0);
    let rows = solve_family(cfg, &grid, &data, |f, s| {
        let src = data_norm(f, &spaces.source)?;
        let tgt = gradient_norm(&s.gradient(), &spaces.target)?;
        Ok((src, tgt, holder_ratio(tgt, src, e)))
    });
    let mut out = ExperimentOutput::new(&experiment_name(cfg), &cfg.hash());
    push_rows(&mut out, rows);
    out.push_stats("", "");
    push_spread(&mut out, cfg.tolerances.spread);
    Ok(out)
}

/// Boundedness checks; `norm_src` holds the right-hand side of the bound and
/// `ratio = norm_tgt / norm_src`.
///
/// * `homogeneity`: `‖u‖_∞` against `‖c f‖_{L^{n/p,1/(p-1)}}^{1/(p-1)}` for each
///   scale `c`; the aggregate `homogeneity` is `(max - min) / max` of the ratios.
/// * `gradient_h3`: `max |∇u|` against `(1 + ‖f‖_1^{(m1+1-p)/(p-1)}) ‖f‖_{L^{n,1}}^{1/(p-1)}`.
/// * `potential_h3`: `‖V(·,u)‖_{L^{n,1}}^{1/(p-1)}` against `‖f‖_{L^{n,1}}^{1/(p-1)} ‖f‖_1^{(m1+1-p)/(p-1)}`.
pub fn run_bound_check(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    expect_kind(cfg, ExperimentKind::Bounds)?;
    let spaces = cfg.spaces()?;
    let grid = cfg.make_grid(cfg.grid.cells)?;
    let p = cfg.p;
    let e = 1.0 / (p - 1.0);
    let mut out = ExperimentOutput::new(&experiment_name(cfg), &cfg.hash());
    match cfg.variant() {
        Variant::Homogeneity => {
            let base = graded_family(cfg, &spaces.source)[0].on(&grid);
            let potential = PotentialSpec::zero();
            let mut previous: Option<(f64, GridFunction)> = None;
            for (j, &c) in cfg.scales.iter().enumerate() {
                let start = Instant::now();
                let f = base.scale(c);
                let guess = previous.as_ref().map(|(c0, u)| u.scale((c / c0).powf(e)));
                let value = solve_with(&grid, p, &potential, &f, &options(cfg, guess.as_ref())).and_then(|s| {
                    let src = data_norm(&f, &spaces.source)?.powf(e);
                    let tgt = s.u.max_abs();
                    previous = Some((c, s.u));
                    Ok((src, tgt, holder_ratio(tgt, src, 1.0)))
                });
                push_rows(
                    &mut out,
                    vec![Row {
                        id: format!("{j:03}"),
                        value,
                        seconds: start.elapsed().as_secs_f64(),
                    }],
                );
            }
            let stats = out.push_stats("", "");
            let rel = stats.map_or(f64::INFINITY, |s| if s.max > 0.0 { (s.max - s.min) / s.max } else { 0.0 });
            out.push_aggregate("homogeneity", rel, rel <= cfg.tolerances.homogeneity);
        }
        Variant::GradientH3 | Variant::PotentialH3 => {
            let potential = cfg.potential_spec();
            let m1 = potential.m1;
            let growth = (m1 + 1.0 - p) / (p - 1.0);
            let data = graded_family(cfg, &spaces.source);
            let gradient = cfg.variant() == Variant::GradientH3;
            let rows = solve_family(cfg, &grid, &data, |f, s| {
                let n_lorentz = data_norm(f, &spaces.source)?;
                let n_one = data_norm(f, &SpaceSpec::lebesgue(1.0))?;
                let (src, tgt) = if gradient {
                    let src = (1.0 + n_one.powf(growth)) * n_lorentz.powf(e);
                    (src, s.gradient().magnitudes().into_iter().fold(0.0, f64::max))
                } else {
                    let v = s.u.map(|x| potential.value(0, x));
                    (n_lorentz.powf(e) * n_one.powf(growth), data_norm(&v, &spaces.source)?.powf(e))
                };
                Ok((src, tgt, holder_ratio(tgt, src, 1.0)))
            });
            push_rows(&mut out, rows);
            out.push_stats("", "");
            push_spread(&mut out, cfg.tolerances.spread);
        }
        _ => unreachable!("validated as a bounds variant"),
    }
    Ok(out)
}

/// Solves with truncations `min(f, k)` of one spike and records, for each
/// level, the source distance of the data and the target distance of the
/// gradients to those of the highest level. No threshold is applied.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    expect_kind(cfg, ExperimentKind::Convergence)?;
    let spaces = cfg.spaces()?;
    let grid = cfg.make_grid(cfg.grid.cells)?;
    let gamma = cfg.family.gamma.unwrap_or(0.95 * cfg.n as f64);
    let mut levels = cfg.levels.clone();
    levels.sort_by(f64::total_cmp);
    let data: Vec<Datum> = levels
        .iter()
        .map(|&k| Datum::Spike {
            center: [0.5, 0.5],
            gamma,
            cap: k,
            amp: 1.0,
        })
        .collect();
    let potential = cfg.potential_spec();
    let solved: Vec<(Result<(GridFunction, Solution)>, f64)> = par_map(&data, |_, d| {
        let start = Instant::now();
        let f = d.on(&grid);
        let s = solve_with(&grid, cfg.p, &potential, &f, &options(cfg, None)).map(|s| (f, s));
        (s, start.elapsed().as_secs_f64())
    });
    let mut out = ExperimentOutput::new(&experiment_name(cfg), &cfg.hash());
    let reference = match &solved.last().expect("levels are nonempty").0 {
        Ok(r) => r.clone(),
        Err(e) => return Err(e.clone()),
    };
    let rows = solved
        .into_iter()
        .zip(&levels)
        .map(|((s, seconds), k)| Row {
            id: format!("k={k}"),
            value: s.and_then(|(f, s)| {
                let src = data_norm(&f.sub(&reference.0)?, &spaces.source)?;
                let tgt = gradient_norm(&s.gradient().sub(&reference.1.gradient())?, &spaces.target)?;
                Ok((src, tgt, tgt))
            }),
            seconds,
        })
        .collect();
    push_rows(&mut out, rows);
    Ok(out)
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    match cfg.kind {
        ExperimentKind::Holder => run_holder_experiment(cfg),
        ExperimentKind::Table => run_regularity_table(cfg),
        ExperimentKind::Bounds => run_bound_check(cfg),
        ExperimentKind::Convergence => run_convergence(cfg),
    }
}
