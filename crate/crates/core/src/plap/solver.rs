use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norms::{space_norm, SpaceSpec};

use super::banded::BandedSpd;
use super::grid::{GradientField, Grid, GridFunction};
use super::potential::PotentialSpec;

/// Regularization inside `|∇u|^{p-2} = (|∇u|² + ε)^{(p-2)/2}`.
pub const EPS_REG: f64 = 1e-10;
pub const DEFAULT_TOL: f64 = 1e-9;
pub const MAX_ITERATIONS: usize = 100_000;

const ARMIJO_C: f64 = 1e-4;
const MIN_STEP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SolverMethod {
    /// Newton steps with the full Hessian of the energy.
    #[default]
    Newton,
    /// Lagged-diffusion steps, `(Σ |∇u|^{p-2} DᵀD + V') d = -∇J`.
    Picard,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub method: SolverMethod,
    pub eps_reg: f64,
    pub initial_guess: Option<GridFunction>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: DEFAULT_TOL,
            max_iter: MAX_ITERATIONS,
            method: SolverMethod::Newton,
            eps_reg: EPS_REG,
            initial_guess: None,
        }
    }
}

/// Iteration record of one solve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveInfo {
    pub method: SolverMethod,
    pub iterations: usize,
    pub residual: f64,
    pub residual_history: Vec<f64>,
    pub energy_history: Vec<f64>,
    pub converged: bool,
}

/// A converged discrete weak solution with the data that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub u: GridFunction,
    pub f: GridFunction,
    pub p: f64,
    pub potential: PotentialSpec,
    pub info: SolveInfo,
}

impl Solution {
    pub fn gradient(&self) -> GradientField {
        self.u.gradient()
    }
}

struct Problem<'a> {
    grid: &'a Grid,
    p: f64,
    potential: &'a PotentialSpec,
    f: &'a [f64],
    eps: f64,
    vol: f64,
}

impl Problem<'_> {
    fn energy(&self, u: &[f64]) -> f64 {
        let g = self.grid;
        let mut e = 0.0;
        for &c in g.active_cells() {
            let [gx, gy] = g.cell_gradient(u, c);
            e += (gx * gx + gy * gy + self.eps).powf(0.5 * self.p) / self.p;
        }
        for &k in g.interior_nodes() {
            e += self.potential.primitive(k, u[k]) - self.f[k] * u[k];
        }
        e * self.vol
    }

    /// `∂J/∂u` at the unknowns.
    fn gradient(&self, u: &[f64]) -> Vec<f64> {
        let g = self.grid;
        let inv_h = g.cells() as f64;
        let mut r = vec![0.0; g.num_unknowns()];
        for &c in g.active_cells() {
            let [gx, gy] = g.cell_gradient(u, c);
            let a = (gx * gx + gy * gy + self.eps).powf(0.5 * (self.p - 2.0));
            let (fx, fy) = (a * gx * inv_h, a * gy * inv_h);
            let st = g.cell_stencil(c);
            let coef = [-(fx + fy), fx, fy];
            for (node, v) in st.iter().zip(coef) {
                if let Some(i) = node.and_then(|k| g.unknown_of(k)) {
                    r[i] += v;
                }
            }
        }
        for (i, &k) in g.interior_nodes().iter().enumerate() {
            r[i] += self.potential.value(k, u[k]) - self.f[k];
        }
        r.iter_mut().for_each(|v| *v *= self.vol);
        r
    }

    fn hessian(&self, u: &[f64], method: SolverMethod) -> BandedSpd {
        let g = self.grid;
        let inv_h = g.cells() as f64;
        let mut m = BandedSpd::zeros(g.num_unknowns(), g.bandwidth());
        let two_d = g.dimension() == 2;
        for &c in g.active_cells() {
            let [gx, gy] = g.cell_gradient(u, c);
            let s = gx * gx + gy * gy + self.eps;
            let a = s.powf(0.5 * (self.p - 2.0));
            let b = match method {
                SolverMethod::Newton if self.p != 2.0 => (self.p - 2.0) * s.powf(0.5 * (self.p - 4.0)),
                _ => 0.0,
            };
            // Local matrix M = a I + b g gᵀ; rows of D are [-1, 1, 0] / h and [-1, 0, 1] / h.
            let mxx = a + b * gx * gx;
            let mxy = b * gx * gy;
            let myy = a + b * gy * gy;
            let dx = [-inv_h, inv_h, 0.0];
            let dy = [-inv_h, 0.0, inv_h];
            let st = g.cell_stencil(c);
            let ids: [Option<usize>; 3] = [0, 1, 2].map(|j| st[j].and_then(|k| g.unknown_of(k)));
            let n_local = if two_d { 3 } else { 2 };
            for r in 0..n_local {
                let Some(ir) = ids[r] else { continue };
                for q in 0..=r {
                    let Some(iq) = ids[q] else { continue };
                    let v = if two_d {
                        dx[r] * (mxx * dx[q] + mxy * dy[q]) + dy[r] * (mxy * dx[q] + myy * dy[q])
                    } else {
                        dx[r] * mxx * dx[q]
                    };
                    m.add(ir, iq, v * self.vol);
                }
            }
        }
        for (i, &k) in g.interior_nodes().iter().enumerate() {
            let d = self.potential.derivative(k, u[k]);
            if d != 0.0 {
                m.add(i, i, d * self.vol);
            }
        }
        m
    }

    fn residual_norm(&self, r: &[f64]) -> f64 {
        (r.iter().map(|v| v * v).sum::<f64>() / self.vol).sqrt()
    }

    /// Solution of the linear problem `-Δu = f`, scaled to minimize the energy
    /// along its ray when `V = 0`.
    fn initial_guess(&self) -> Result<Vec<f64>> {
        let g = self.grid;
        let lin = Problem {
            p: 2.0,
            potential: &PotentialSpec::zero(),
            eps: 0.0,
            ..*self
        };
        let zero = vec![0.0; g.num_nodes()];
        let mut m = lin.hessian(&zero, SolverMethod::Newton);
        m.factor()?;
        let mut rhs: Vec<f64> = g.interior_nodes().iter().map(|&k| self.f[k] * self.vol).collect();
        m.solve(&mut rhs);
        let mut v = vec![0.0; g.num_nodes()];
        for (i, &k) in g.interior_nodes().iter().enumerate() {
            v[k] = rhs[i];
        }
        let a: f64 = g
            .active_cells()
            .iter()
            .map(|&c| {
                let [gx, gy] = g.cell_gradient(&v, c);
                gx.hypot(gy).powf(self.p)
            })
            .sum();
        let b: f64 = g.interior_nodes().iter().map(|&k| self.f[k] * v[k]).sum();
        if a > 0.0 && b > 0.0 {
            let scale = (b / a).powf(1.0 / (self.p - 1.0));
            v.iter_mut().for_each(|x| *x *= scale);
        }
        Ok(v)
    }
}

/// Minimizes the discrete energy
/// `Σ (1/p)(|∇u|² + ε)^{p/2} vol + Σ (W(x, u) - f u) vol`, `W' = V`,
/// over nodal functions vanishing off the unknowns.
pub fn solve_with(grid: &Grid, p: f64, potential: &PotentialSpec, f: &GridFunction, opts: &SolverOptions) -> Result<Solution> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::Domain(format!("exponent p = {p} must exceed 1")));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Domain(format!("tolerance {} must be positive", opts.tol)));
    }
    if &f.grid != grid {
        return Err(Error::Input("data lives on a different grid".into()));
    }
    potential.validate(grid, p)?;
    let problem = Problem {
        grid,
        p,
        potential,
        f: f.values(),
        eps: opts.eps_reg,
        vol: grid.cell_volume(),
    };
    let f_norm = (f.dot(f)).sqrt();
    let target = opts.tol * (1.0 + f_norm);
    let finish = |u: Vec<f64>, info: SolveInfo| -> Result<Solution> {
        Ok(Solution {
            u: GridFunction::from_values(grid, u)?,
            f: f.clone(),
            p,
            potential: potential.clone(),
            info,
        })
    };
    let mut u = match &opts.initial_guess {
        Some(g0) if &g0.grid != grid => return Err(Error::Input("initial guess lives on a different grid".into())),
        Some(g0) => g0.values().to_vec(),
        None if f_norm == 0.0 => vec![0.0; grid.num_nodes()],
        None => problem.initial_guess()?,
    };
    let mut energy = problem.energy(&u);
    let mut info = SolveInfo {
        method: opts.method,
        iterations: 0,
        residual: f64::NAN,
        residual_history: Vec::new(),
        energy_history: vec![energy],
        converged: false,
    };
    loop {
        let grad = problem.gradient(&u);
        let res = problem.residual_norm(&grad);
        info.residual = res;
        info.residual_history.push(res);
        if res < target {
            info.converged = true;
            return finish(u, info);
        }
        if info.iterations >= opts.max_iter {
            return Err(Error::Convergence {
                iterations: info.iterations,
                residual: res,
            });
        }
        let mut h = problem.hessian(&u, opts.method);
        h.factor()?;
        let mut dir: Vec<f64> = grad.iter().map(|v| -v).collect();
        h.solve(&mut dir);
        let slope: f64 = grad.iter().zip(&dir).map(|(g, d)| g * d).sum();
        let nodes = grid.interior_nodes();
        let trial = |step: f64| {
            let mut v = u.clone();
            for (i, &k) in nodes.iter().enumerate() {
                v[k] += step * dir[i];
            }
            v
        };
        // Once the predicted decrease is below the rounding level of J, the
        // line search switches from the energy to the residual.
        let energy_resolves = -slope > 1e-13 * energy.abs().max(f64::MIN_POSITIVE);
        let mut step = 1.0;
        let accepted = loop {
            let v = trial(step);
            let e = problem.energy(&v);
            let ok = if energy_resolves {
                e <= energy + ARMIJO_C * step * slope
            } else {
                problem.residual_norm(&problem.gradient(&v)) < (1.0 - ARMIJO_C * step) * res
            };
            if ok {
                break Some((v, e));
            }
            step *= 0.5;
            if step < MIN_STEP {
                break None;
            }
        };
        let Some((v, e)) = accepted else {
            return Err(Error::Convergence {
                iterations: info.iterations,
                residual: res,
            });
        };
        u = v;
        energy = e;
        info.iterations += 1;
        info.energy_history.push(energy);
    }
}

/// [`solve_with`] with default options and the given tolerance.
pub fn solve_weak(grid: &Grid, p: f64, potential: &PotentialSpec, f: &GridFunction, tol: f64) -> Result<Solution> {
    solve_with(
        grid,
        p,
        potential,
        f,
        &SolverOptions {
            tol,
            ..SolverOptions::default()
        },
    )
}

/// `f ↦ ∇u`.
pub fn solution_map_gradient(grid: &Grid, p: f64, potential: &PotentialSpec, f: &GridFunction, tol: f64) -> Result<GradientField> {
    Ok(solve_weak(grid, p, potential, f, tol)?.gradient())
}

/// Norm of `|∇u|` in a rearrangement-invariant space.
pub fn gradient_norm(g: &GradientField, spec: &SpaceSpec) -> Result<f64> {
    space_norm(&g.to_simple(), spec)
}

/// Residual of the discrete weak formulation against the nodal basis,
/// `(Σ_i (∂J/∂u_i / vol)² vol)^{1/2}`.
pub fn weak_residual(sol: &Solution, eps_reg: f64) -> f64 {
    let grid = &sol.u.grid;
    let problem = Problem {
        grid,
        p: sol.p,
        potential: &sol.potential,
        f: sol.f.values(),
        eps: eps_reg,
        vol: grid.cell_volume(),
    };
    problem.residual_norm(&problem.gradient(sol.u.values()))
}

/// `max_k k^{-1/p} ‖∇T_k(u)‖_{L^p}` over the given levels.
pub fn truncation_energy_sup(u: &GridFunction, p: f64, levels: &[f64]) -> Result<f64> {
    let mut best = 0.0f64;
    for &k in levels {
        if !(k > 0.0) {
            return Err(Error::Domain(format!("truncation level {k} must be positive")));
        }
        let tk = u.map(|s| super::truncate(s, k).expect("positive level"));
        let norm = tk.gradient().power_sum(p).powf(1.0 / p);
        best = best.max(k.powf(-1.0 / p) * norm);
    }
    Ok(best)
}
