//! Test-function families used by the reports and experiments.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::rearrange::{log_var, SimpleFunction};

/// Number of geometric sample points used for profile families.
pub const PROFILE_POINTS: usize = 2048;
/// Left end of the geometric sampling range.
pub const PROFILE_T_MIN: f64 = 1e-12;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Indicators of sets whose measures run over a log grid from `1e-4` to 1.
pub fn indicator_family(count: usize) -> Vec<SimpleFunction> {
    (0..count)
        .map(|k| {
            let s = if count > 1 { k as f64 / (count - 1) as f64 } else { 1.0 };
            SimpleFunction::indicator(10f64.powf(-4.0 * (1.0 - s))).expect("measure in (0, 1]")
        })
        .collect()
}

/// Samples a nonincreasing profile on `PROFILE_POINTS` geometric points of
/// `[PROFILE_T_MIN, 1]`, taking the value at the geometric midpoint of each cell.
pub fn sample_profile<F: Fn(f64) -> f64>(profile: F) -> SimpleFunction {
    let n = PROFILE_POINTS;
    let span = -PROFILE_T_MIN.ln();
    let t = |k: usize| {
        if k == n - 1 {
            1.0
        } else {
            PROFILE_T_MIN * (span * k as f64 / (n - 1) as f64).exp()
        }
    };
    let step = span / (n - 1) as f64;
    let mut pieces = Vec::with_capacity(n);
    let t0 = t(0);
    pieces.push((profile(t0 * (-0.5 * step).exp()), t0));
    for k in 1..n {
        let (a, b) = (t(k - 1), t(k));
        pieces.push((profile((a * b).sqrt()), b - a));
    }
    SimpleFunction::normalized(pieces).expect("profile measures sum to one")
}

/// `f_*(t) = t^{-1/ρ} (1 - log t)^{-δ}`.
pub fn power_log(rho: f64, delta: f64) -> SimpleFunction {
    sample_profile(|t| t.powf(-1.0 / rho) * log_var(t).powf(-delta))
}

pub fn power_log_family(rhos: &[f64], deltas: &[f64]) -> Vec<SimpleFunction> {
    rhos.iter()
        .flat_map(|&r| deltas.iter().map(move |&d| power_log(r, d)))
        .collect()
}

/// A random simple function with 1 to `max_pieces` pieces, log-uniform
/// magnitudes in `[1e-3, 1e3]`, random signs and random measures.
pub fn random_simple<R: Rng>(rng: &mut R, max_pieces: usize) -> SimpleFunction {
    let n = rng.gen_range(1..=max_pieces.max(1));
    let pieces: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let mag = 10f64.powf(rng.gen_range(-3.0..3.0));
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let w: f64 = rng.gen_range(0.01..1.0);
            (sign * mag, w)
        })
        .collect();
    SimpleFunction::normalized(pieces).expect("positive weights")
}

pub fn random_family(seed: u64, count: usize, max_pieces: usize) -> Vec<SimpleFunction> {
    let mut rng = rng_from_seed(seed);
    (0..count).map(|_| random_simple(&mut rng, max_pieces)).collect()
}

/// A pair `(f, g)` on a common partition with `|f| ≤ |g|` pointwise.
pub fn dominated_pair<R: Rng>(rng: &mut R, max_pieces: usize) -> (SimpleFunction, SimpleFunction) {
    let g = random_simple(rng, max_pieces);
    let f = SimpleFunction::new(
        g.pieces()
            .iter()
            .map(|&(v, m)| (v * rng.gen_range(-1.0..=1.0), m))
            .collect(),
    )
    .expect("same measures as g");
    (f, g)
}

/// A function with the same distribution as `f`: pieces shuffled and one piece split in two.
pub fn equimeasurable_copy<R: Rng>(f: &SimpleFunction, rng: &mut R) -> SimpleFunction {
    let mut pieces = f.pieces().to_vec();
    if let Some(&(v, m)) = pieces.first() {
        let s = rng.gen_range(0.1..0.9);
        pieces[0] = (-v, m * s);
        pieces.push((v, m - m * s));
    }
    pieces.shuffle(rng);
    SimpleFunction::new(pieces).expect("measures preserved")
}
