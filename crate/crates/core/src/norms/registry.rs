//! Known continuous inclusions between the spaces in scope. Reports refuse to
//! test a pair unless the inclusion follows from these rules.

use super::eval::conjugate;
use super::spec::SpaceSpec;

/// Inclusion `L^{p,q}(log L)^{l1} ⊂ L^{r,s}(log L)^{l2}`.
fn lz_inclusion(src: (f64, f64, f64), tgt: (f64, f64, f64)) -> bool {
    let (p, q, l1) = src;
    let (r, s, l2) = tgt;
    if r < p {
        return true;
    }
    if r != p {
        return false;
    }
    if p.is_infinite() {
        if q == s {
            return l1 >= l2;
        }
        return q < s && (l1 + 1.0 / q - (l2 + 1.0 / s)).abs() < 1e-12;
    }
    if q <= s {
        l1 >= l2
    } else {
        l1 + 1.0 / q > l2 + 1.0 / s
    }
}

/// Whether `L^{p,q}(log L)^l` sits inside `L^p(log L)^λ` for some `λ > bound`.
fn lz_inside_zygmund_above(src: (f64, f64, f64), p: f64, bound: f64) -> bool {
    let (r, s, mu) = src;
    if r > p {
        return true;
    }
    if r < p {
        return false;
    }
    if s <= p {
        mu > bound
    } else {
        mu + 1.0 / s - 1.0 / p > bound
    }
}

/// Whether the registry asserts `source ⊂ target`.
pub fn embedding_holds(source: &SpaceSpec, target: &SpaceSpec) -> bool {
    if source == target {
        return true;
    }
    if let (Some(a), Some(b)) = (source.as_lorentz_zygmund(), target.as_lorentz_zygmund()) {
        return lz_inclusion(a, b);
    }
    match (*source, *target) {
        (SpaceSpec::Small { p, alpha }, SpaceSpec::Small { p: r, alpha: beta }) if p == r && beta <= alpha => {
            return true
        }
        (SpaceSpec::Grand { p, alpha }, SpaceSpec::Grand { p: r, alpha: beta }) if p == r && beta >= alpha => {
            return true
        }
        _ => {}
    }
    match *source {
        // The small space sits inside L^p.
        SpaceSpec::Small { p, .. } => {
            if matches!(target, SpaceSpec::Small { .. }) {
                return false;
            }
            return embedding_holds(&SpaceSpec::lebesgue(p), target);
        }
        // The grand space sits inside L^{p,∞}(log L)^{-α/p}.
        SpaceSpec::Grand { p, alpha } => {
            if matches!(target, SpaceSpec::Grand { .. } | SpaceSpec::Small { .. }) {
                return false;
            }
            return embedding_holds(&SpaceSpec::lorentz_zygmund(p, f64::INFINITY, -alpha / p), target);
        }
        SpaceSpec::GGamma { .. } => return false,
        _ => {}
    }
    let Some(src) = source.as_lorentz_zygmund() else {
        return false;
    };
    match *target {
        SpaceSpec::Grand { p, alpha } => {
            lz_inclusion(src, (p, p, -alpha / p)) || lz_inclusion(src, (p, f64::INFINITY, (1.0 - alpha) / p))
        }
        SpaceSpec::Small { p, alpha } => lz_inside_zygmund_above(src, p, alpha / conjugate(p)),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const INF: f64 = f64::INFINITY;

    #[test]
    fn lorentz_chains() {
        assert!(embedding_holds(&SpaceSpec::lorentz(2.0, 1.0), &SpaceSpec::lorentz(2.0, 3.0)));
        assert!(!embedding_holds(&SpaceSpec::lorentz(2.0, 3.0), &SpaceSpec::lorentz(2.0, 1.0)));
        assert!(embedding_holds(&SpaceSpec::lorentz(3.0, INF), &SpaceSpec::lorentz(2.0, 1.0)));
        assert!(embedding_holds(&SpaceSpec::lebesgue(2.0), &SpaceSpec::lorentz(2.0, INF)));
    }

    #[test]
    fn zygmund_sharp_chain() {
        // L^p(log L)^{1/q - 1/p + ε} ⊂ L^{p,q} ⊂ L^p ⊂ L^{p,q}(log L)^{1/p - 1/q - ε} for q < p
        let (p, q, e) = (2.0, 1.0, 0.1);
        let a = SpaceSpec::lorentz_zygmund(p, p, 1.0 / q - 1.0 / p + e);
        let b = SpaceSpec::lorentz(p, q);
        let c = SpaceSpec::lebesgue(p);
        let d = SpaceSpec::lorentz_zygmund(p, q, 1.0 / p - 1.0 / q - e);
        assert!(embedding_holds(&a, &b));
        assert!(embedding_holds(&b, &c));
        assert!(embedding_holds(&c, &d));
        // ε = 0 is not allowed
        let a0 = SpaceSpec::lorentz_zygmund(p, p, 1.0 / q - 1.0 / p);
        assert!(!embedding_holds(&a0, &b));
    }

    #[test]
    fn grand_small_chain() {
        let p = 2.0;
        let small = SpaceSpec::Small { p, alpha: 1.0 };
        let grand = SpaceSpec::Grand { p, alpha: 1.0 };
        assert!(embedding_holds(&small, &SpaceSpec::lebesgue(p)));
        assert!(embedding_holds(&SpaceSpec::lebesgue(p), &SpaceSpec::lorentz(p, INF)));
        assert!(embedding_holds(&SpaceSpec::lorentz(p, INF), &grand));
        assert!(embedding_holds(&small, &grand));
        assert!(!embedding_holds(&grand, &SpaceSpec::lebesgue(p)));
        assert!(!embedding_holds(&SpaceSpec::lebesgue(p), &small));
        assert!(embedding_holds(&SpaceSpec::lebesgue(3.0), &small));
        assert!(embedding_holds(&grand, &SpaceSpec::lebesgue(1.5)));
    }
}
