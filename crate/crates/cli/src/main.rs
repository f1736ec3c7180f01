//! Command-line front end: norms, K-functionals, identifications, solver runs
//! and the experiment harness.
//!
//! Exit status: 0 when every check passes, 2 when a check fails, 1 on usage
//! or input errors.

use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;

use rispace::family::{indicator_family, power_log_family, random_family};
use rispace::harness::{run_experiment, ExperimentConfig, ExperimentKind, OutputFormat};
use rispace::interp::{identify_interp_space, verify_identification, CoupleSpec, InterpParams, KFunctional};
use rispace::norms::{embedding_report, equivalence_report, space_norm, write_ratio_csv, MemberRatio, NormTarget, SpaceSpec};
use rispace::plap::{solve_weak, Grid, GridFunction, PotentialSpec};
use rispace::rearrange::{rearrange, SimpleFunction};

#[derive(Parser, Debug)]
#[command(name = "rispace", version, about = "Rearrangement-invariant norms, logarithmic interpolation and p-Laplacian experiments")]
struct Cli {
    /// Output format; experiments and tables default to csv, the rest to json.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the main output to this file (or directory, for `solve`) instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Norm of a simple function in a space.
    Norm {
        /// Simple function as `[[value, measure], ...]`, inline or a file path.
        #[arg(long)]
        function: String,
        /// Space spec JSON, e.g. '{"kind":"lebesgue","p":2}', inline or a file path.
        #[arg(long)]
        space: String,
    },
    /// K-functional of a simple function for a couple at a list of t values.
    Kfunc {
        #[arg(long)]
        function: String,
        /// Couple JSON '{"x0": <space>, "x1": <space>}', inline or a file path.
        #[arg(long)]
        couple: String,
        /// Comma-separated t values.
        #[arg(long, value_delimiter = ',', required = true)]
        t: Vec<f64>,
    },
    /// Symbolic identification of (X0, X1)_{θ,q;α}.
    Identify {
        #[arg(long)]
        couple: String,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Ratio sweeps over function families.
    Verify {
        #[command(subcommand)]
        what: VerifyCommand,
    },
    /// Solve -Δ_p u + V(x, u) = f with zero boundary values.
    Solve {
        /// 1 for the unit interval, 2 for a planar domain.
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long)]
        p: f64,
        /// Data: `const:<c>`, `spike:<gamma>:<cap>` or `bump:<width>`, centered in the domain.
        #[arg(long, default_value = "const:1")]
        f: String,
        #[arg(long, default_value_t = 64)]
        cells: usize,
        #[arg(long, value_enum, default_value_t = DomainArg::Square)]
        domain: DomainArg,
        /// Potential `c:m1` for V(x, σ) = c sign(σ)|σ|^m1.
        #[arg(long)]
        potential: Option<String>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Hölder-constant experiment.
    Holder(ExperimentArgs),
    /// Regularity table.
    Table(ExperimentArgs),
    /// Boundedness checks.
    Bounds(ExperimentArgs),
}

#[derive(Args, Debug)]
struct ParamArgs {
    #[arg(long)]
    theta: f64,
    /// Second index; `inf` is accepted.
    #[arg(long, value_parser = parse_ext_real)]
    q: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    alpha: f64,
}

#[derive(Args, Debug)]
struct FamilyArgs {
    #[arg(long, value_enum, default_value_t = FamilyArg::Random)]
    family: FamilyArg,
    #[arg(long, default_value_t = 200)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    /// Random simple functions.
    Random,
    /// Indicators of sets of measure 10^-4 to 1.
    Indicators,
    /// t^{-1/ρ}(1 - log t)^{-δ} profiles, ρ ∈ {1.5, 2, 3, 6}, δ ∈ {-0.5, 0, 1}.
    PowerLog,
}

#[derive(Subcommand, Debug)]
enum VerifyCommand {
    /// Interpolation norm against the norm of the identified space.
    Identification {
        #[arg(long)]
        couple: String,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        family: FamilyArgs,
        /// Largest allowed max/min of the ratios.
        #[arg(long, default_value_t = 10.0)]
        budget: f64,
    },
    /// Bounded ratio ‖f‖_target / ‖f‖_source for a registered inclusion.
    Embedding {
        #[arg(long)]
        source: String,
        #[arg(long)]
        target: String,
        #[command(flatten)]
        family: FamilyArgs,
    },
    /// Two-sided ratio between two norms.
    Equivalence {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, default_value_t = rispace::norms::DEFAULT_EQUIVALENCE_BUDGET)]
        budget: f64,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum DomainArg {
    Square,
    Disk,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// Experiment config JSON, inline or a file path.
    #[arg(long)]
    config: String,
    /// Overrides the seed of the config.
    #[arg(long)]
    seed: Option<u64>,
}

/// A failure that maps to exit status 1.
struct UsageError(String);

impl<E: Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, UsageError>;

fn parse_ext_real(s: &str) -> std::result::Result<f64, String> {
    match s.to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "+inf" => Ok(f64::INFINITY),
        other => other.parse::<f64>().map_err(|e| e.to_string()),
    }
}

/// Reads an argument that is either a path to a file or inline text.
fn inline_or_file(arg: &str) -> CliResult<String> {
    let path = Path::new(arg);
    if !arg.trim_start().starts_with(['{', '[']) && path.is_file() {
        std::fs::read_to_string(path).map_err(|e| UsageError(format!("{arg}: {e}")))
    } else {
        Ok(arg.to_string())
    }
}

/// Parses JSON, reporting the path of the offending field.
fn parse_json<T: DeserializeOwned>(flag: &str, arg: &str) -> CliResult<T> {
    let text = inline_or_file(arg)?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let at = if path == "." { String::new() } else { format!(" at {path}") };
        UsageError(format!("--{flag}{at}: {}", e.inner()))
    })
}

fn family(args: &FamilyArgs) -> Vec<SimpleFunction> {
    match args.family {
        FamilyArg::Random => random_family(args.seed, args.count, 32),
        FamilyArg::Indicators => indicator_family(args.count),
        FamilyArg::PowerLog => power_log_family(&[1.5, 2.0, 3.0, 6.0], &[-0.5, 0.0, 1.0]),
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("output serializes");
    s.push('\n');
    s
}

fn ratio_csv(rows: &[MemberRatio]) -> String {
    let mut buf = Vec::new();
    write_ratio_csv(&mut buf, "family", rows, true).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is UTF-8")
}

fn parse_data(spec: &str) -> CliResult<Box<dyn Fn([f64; 2], usize) -> f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |i: usize| -> CliResult<f64> {
        parts
            .get(i)
            .ok_or_else(|| UsageError(format!("--f {spec}: missing field {i}")))?
            .parse::<f64>()
            .map_err(|e| UsageError(format!("--f {spec}: {e}")))
    };
    let dist2 = |x: [f64; 2], dim: usize| (0..dim).map(|i| (x[i] - 0.5).powi(2)).sum::<f64>();
    match parts[0] {
        "const" => {
            let c = num(1)?;
            Ok(Box::new(move |_, _| c))
        }
        "spike" => {
            let (gamma, cap) = (num(1)?, num(2)?);
            Ok(Box::new(move |x, d| {
                let r2 = dist2(x, d);
                if r2 == 0.0 {
                    cap
                } else {
                    r2.powf(-0.5 * gamma).min(cap)
                }
            }))
        }
        "bump" => {
            let w = num(1)?;
            Ok(Box::new(move |x, d| (-dist2(x, d) / (2.0 * w * w)).exp()))
        }
        other => Err(UsageError(format!("--f: unknown data kind '{other}', use const, spike or bump"))),
    }
}

struct Emitter {
    out: Option<PathBuf>,
}

impl Emitter {
    fn emit(&self, text: &str) -> CliResult<()> {
        match &self.out {
            Some(path) => std::fs::write(path, text).map_err(|e| UsageError(format!("{}: {e}", path.display()))),
            None => {
                std::io::stdout().write_all(text.as_bytes())?;
                Ok(())
            }
        }
    }
}

fn run(cli: Cli) -> CliResult<bool> {
    let emitter = Emitter { out: cli.out.clone() };
    let format = |default: Format| cli.format.unwrap_or(default);
    match cli.command {
        Command::Norm { function, space } => {
            let f: SimpleFunction = parse_json("function", &function)?;
            let spec: SpaceSpec = parse_json("space", &space)?;
            let v = space_norm(&f, &spec)?;
            let text = match format(Format::Json) {
                Format::Json => to_json(&serde_json::json!({ "space": spec, "label": spec.to_string(), "norm": v })),
                Format::Csv => format!("label,norm\n\"{spec}\",{v}\n"),
            };
            emitter.emit(&text)?;
            Ok(true)
        }
        Command::Kfunc { function, couple, t } => {
            let f: SimpleFunction = parse_json("function", &function)?;
            let couple: CoupleSpec = parse_json("couple", &couple)?;
            couple.validate()?;
            let k = KFunctional::new(&rearrange(&f), &couple)?;
            let rows: Vec<(f64, f64)> = t.iter().map(|&t| Ok((t, k.eval(t)?))).collect::<rispace::Result<_>>()?;
            let text = match format(Format::Csv) {
                Format::Csv => std::iter::once("t,k".to_string())
                    .chain(rows.iter().map(|(t, k)| format!("{t},{k}")))
                    .collect::<Vec<_>>()
                    .join("\n")
                    + "\n",
                Format::Json => to_json(&rows.iter().map(|&(t, k)| serde_json::json!({"t": t, "k": k})).collect::<Vec<_>>()),
            };
            emitter.emit(&text)?;
            Ok(true)
        }
        Command::Identify { couple, params } => {
            let couple: CoupleSpec = parse_json("couple", &couple)?;
            let params = InterpParams::new(params.theta, params.q, params.alpha);
            let id = identify_interp_space(&couple, &params)?;
            let text = match format(Format::Json) {
                Format::Json => to_json(&serde_json::json!({
                    "space": id.space,
                    "case": id.case,
                    "label": id.space.to_string(),
                })),
                Format::Csv => format!("case,label\n{},\"{}\"\n", serde_json::to_value(id.case)?.as_str().unwrap_or(""), id.space),
            };
            emitter.emit(&text)?;
            Ok(true)
        }
        Command::Verify { what } => match what {
            VerifyCommand::Identification {
                couple,
                params,
                family: fam,
                budget,
            } => {
                let couple: CoupleSpec = parse_json("couple", &couple)?;
                let params = InterpParams::new(params.theta, params.q, params.alpha);
                let report = verify_identification(&couple, &params, &family(&fam))?;
                let pass = report.excluded == 0 && report.spread() <= budget;
                let text = match format(Format::Csv) {
                    Format::Csv => ratio_csv(&report.rows),
                    Format::Json => to_json(&serde_json::json!({ "report": report, "budget": budget, "pass": pass })),
                };
                emitter.emit(&text)?;
                eprintln!("identified {}: max/min {:.4} (budget {budget}), pass {pass}", report.identification.space, report.spread());
                Ok(pass)
            }
            VerifyCommand::Embedding { source, target, family: fam } => {
                let s: SpaceSpec = parse_json("source", &source)?;
                let t: SpaceSpec = parse_json("target", &target)?;
                let report = embedding_report(&s, &t, &family(&fam))?;
                let text = match format(Format::Csv) {
                    Format::Csv => ratio_csv(&report.rows),
                    Format::Json => to_json(&report),
                };
                emitter.emit(&text)?;
                eprintln!("{s} -> {t}: max ratio {:?}, pass {}", report.stats.map(|s| s.max), report.pass);
                Ok(report.pass)
            }
            VerifyCommand::Equivalence { a, b, family: fam, budget } => {
                let a: SpaceSpec = parse_json("a", &a)?;
                let b: SpaceSpec = parse_json("b", &b)?;
                let report = equivalence_report(&NormTarget::Space(a), &NormTarget::Space(b), &family(&fam), budget)?;
                let text = match format(Format::Csv) {
                    Format::Csv => ratio_csv(&report.rows),
                    Format::Json => to_json(&report),
                };
                emitter.emit(&text)?;
                eprintln!("{a} vs {b}: max/min {:.4}, pass {}", report.spread(), report.pass);
                Ok(report.pass)
            }
        },
        Command::Solve {
            dim,
            p,
            f,
            cells,
            domain,
            potential,
            tol,
        } => {
            let grid = match (dim, domain) {
                (1, _) => Grid::interval(cells)?,
                (2, DomainArg::Square) => Grid::square(cells)?,
                (2, DomainArg::Disk) => Grid::disk(cells)?,
                (d, _) => return Err(UsageError(format!("--dim {d}: use 1 or 2"))),
            };
            let data = parse_data(&f)?;
            let fg = GridFunction::from_fn(&grid, |x| data(x, dim));
            let v = match potential {
                None => PotentialSpec::zero(),
                Some(s) => {
                    let (c, m1) = s.split_once(':').ok_or_else(|| UsageError("--potential: expected c:m1".into()))?;
                    PotentialSpec::constant(c.parse()?, m1.parse()?)
                }
            };
            let sol = solve_weak(&grid, p, &v, &fg, tol)?;
            let grad = sol.gradient();
            let grad_max = grad.magnitudes().into_iter().fold(0.0, f64::max);
            let summary = serde_json::json!({
                "dim": dim,
                "cells": cells,
                "p": p,
                "max_u": sol.u.max_abs(),
                "max_grad": grad_max,
                "iterations": sol.info.iterations,
                "residual": sol.info.residual,
                "converged": sol.info.converged,
            });
            if let Some(dir) = &cli.out {
                std::fs::create_dir_all(dir).map_err(|e| UsageError(format!("{}: {e}", dir.display())))?;
                let write = |name: &str, text: String| {
                    let path = dir.join(name);
                    std::fs::write(&path, text).map_err(|e| UsageError(format!("{}: {e}", path.display())))
                };
                write("solution.json", to_json(&serde_json::json!({ "u": sol.u, "info": sol.info })))?;
                write(
                    "gradient.json",
                    to_json(&serde_json::json!({ "grid": grid, "vectors": grad.vectors, "magnitudes": grad.magnitudes() })),
                )?;
                write("summary.json", to_json(&summary))?;
            }
            let text = match format(Format::Json) {
                Format::Json => to_json(&summary),
                Format::Csv => format!(
                    "max_u,max_grad,iterations,residual,converged\n{},{grad_max},{},{},{}\n",
                    sol.u.max_abs(),
                    sol.info.iterations,
                    sol.info.residual,
                    sol.info.converged
                ),
            };
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(true)
        }
        Command::Holder(args) => experiment(ExperimentKind::Holder, args, cli.out, format(Format::Csv)),
        Command::Table(args) => experiment(ExperimentKind::Table, args, cli.out, format(Format::Csv)),
        Command::Bounds(args) => experiment(ExperimentKind::Bounds, args, cli.out, format(Format::Csv)),
    }
}

fn experiment(kind: ExperimentKind, args: ExperimentArgs, out: Option<PathBuf>, format: Format) -> CliResult<bool> {
    let mut cfg = ExperimentConfig::from_json(&inline_or_file(&args.config)?).map_err(|e| UsageError(format!("--config: {e}")))?;
    if cfg.kind != kind {
        return Err(UsageError(format!("--config: kind: this subcommand runs {kind:?} experiments, got {:?}", cfg.kind)));
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    cfg.validate().map_err(|e| UsageError(format!("--config: {e}")))?;
    let out = out.or_else(|| cfg.out.clone());
    let result = run_experiment(&cfg)?;
    let format = match format {
        Format::Csv => OutputFormat::Csv,
        Format::Json => OutputFormat::Json,
    };
    match out {
        Some(path) => result.save(&path, format)?,
        None => std::io::stdout().write_all(result.render(format).as_bytes())?,
    }
    for note in &result.notes {
        eprintln!("excluded {note}");
    }
    let failed: Vec<&str> = result.records().filter(|r| !r.pass && !r.is_excluded()).map(|r| r.sample_id.as_str()).collect();
    eprintln!(
        "{} [{}]: {} samples, pass {}{}",
        result.experiment,
        result.config_hash,
        result.samples.len(),
        result.pass(),
        if failed.is_empty() { String::new() } else { format!(" (failed: {})", failed.join(", ")) }
    );
    Ok(result.pass())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
