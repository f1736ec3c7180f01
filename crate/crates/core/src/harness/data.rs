//! Data on grids: truncated power spikes and smooth bumps at random centers.

use rand::Rng;
use serde::Serialize;

use crate::plap::{Grid, GridFunction};

use super::config::{FamilyConfig, FamilyKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Datum {
    /// `amp · min(cap, |x - center|^{-gamma})`.
    Spike { center: [f64; 2], gamma: f64, cap: f64, amp: f64 },
    /// `amp · exp(-|x - center|² / 2 width²)`.
    Bump { center: [f64; 2], width: f64, amp: f64 },
    Constant { value: f64 },
}

impl Datum {
    pub fn eval(&self, x: [f64; 2], dim: usize) -> f64 {
        let dist2 = |c: [f64; 2]| (0..dim).map(|i| (x[i] - c[i]).powi(2)).sum::<f64>();
        match *self {
            Datum::Spike { center, gamma, cap, amp } => {
                let r2 = dist2(center);
                let v = if r2 == 0.0 { cap } else { r2.powf(-0.5 * gamma).min(cap) };
                amp * v
            }
            Datum::Bump { center, width, amp } => amp * (-dist2(center) / (2.0 * width * width)).exp(),
            Datum::Constant { value } => value,
        }
    }

    pub fn on(&self, grid: &Grid) -> GridFunction {
        let dim = grid.dimension();
        GridFunction::from_fn(grid, |x| self.eval(x, dim))
    }
}

/// `(1 - ε) f + ε g`.
pub fn blend(f: &Datum, g: &Datum, eps: f64, grid: &Grid) -> GridFunction {
    let dim = grid.dimension();
    GridFunction::from_fn(grid, |x| (1.0 - eps) * f.eval(x, dim) + eps * g.eval(x, dim))
}

fn center<R: Rng>(rng: &mut R, dim: usize) -> [f64; 2] {
    let mut c = [0.5, 0.5];
    for v in c.iter_mut().take(dim) {
        *v = rng.gen_range(0.2..0.8);
    }
    c
}

pub fn random_spike<R: Rng>(rng: &mut R, dim: usize, gamma: f64, cap: f64) -> Datum {
    Datum::Spike {
        center: center(rng, dim),
        gamma,
        cap,
        amp: rng.gen_range(0.5..2.0),
    }
}

pub fn random_bump<R: Rng>(rng: &mut R, dim: usize) -> Datum {
    Datum::Bump {
        center: center(rng, dim),
        width: rng.gen_range(0.05..0.2),
        amp: rng.gen_range(0.5..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 },
    }
}

/// The `index`-th member of a family; `gamma` is the spike exponent.
pub fn draw<R: Rng>(rng: &mut R, fam: &FamilyConfig, index: usize, dim: usize, gamma: f64) -> Datum {
    match fam.kind {
        FamilyKind::Spikes => random_spike(rng, dim, gamma, fam.cap),
        FamilyKind::Bumps => random_bump(rng, dim),
        FamilyKind::Mixed if index.is_multiple_of(2) => random_spike(rng, dim, gamma, fam.cap),
        FamilyKind::Mixed => random_bump(rng, dim),
        FamilyKind::Constant => Datum::Constant { value: fam.value },
    }
}
