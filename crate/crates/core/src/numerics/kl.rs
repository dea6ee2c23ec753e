/// Iteration cap for the KL-UCB bisection.
pub const KLUCB_MAX_ITERATIONS: usize = 100;

/// Bernoulli relative entropy `kl(p, q)`, with `0 log 0 = 0`.
///
/// Returns `+inf` when `q` sits on the boundary and `p` does not match it.
pub fn bernoulli_kl(p: f64, q: f64) -> f64 {
    let mut kl = 0.0;
    if p > 0.0 {
        if q <= 0.0 {
            return f64::INFINITY;
        }
        kl += p * (p / q).ln();
    }
    if p < 1.0 {
        if q >= 1.0 {
            return f64::INFINITY;
        }
        kl += (1.0 - p) * ((1.0 - p) / (1.0 - q)).ln();
    }
    // Rounding can leave a tiny negative value when p ~ q.
    kl.max(0.0)
}

/// Largest `q` in `[mean, 1]` such that `count * kl(mean, q) <= threshold`.
///
/// Bisection runs until the bracket collapses to adjacent floats (well
/// below 1e-9) or `KLUCB_MAX_ITERATIONS` halvings, whichever comes first.
/// A root closer to 1 than half the spacing of floats below 1 rounds to 1.
pub fn klucb_index(mean: f64, count: f64, threshold: f64) -> f64 {
    let mean = mean.clamp(0.0, 1.0);
    if threshold <= 0.0 || mean >= 1.0 {
        return mean;
    }
    let count = count.max(f64::MIN_POSITIVE);
    let budget = threshold / count;
    if bernoulli_kl(mean, 1.0) <= budget {
        return 1.0;
    }
    let (mut lo, mut hi) = (mean, 1.0);
    for _ in 0..KLUCB_MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if bernoulli_kl(mean, mid) <= budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if hi == 1.0 && 0.5 * (lo + hi) >= hi && gap_to_one(mean, budget) < f64::EPSILON / 4.0 {
        return 1.0;
    }
    lo
}

/// `1 - q` at the root, for a root so close to 1 that `ln(1 - u) = 0`
/// in floating point: `p ln p + (1 - p) ln((1 - p) / u) = budget`.
fn gap_to_one(p: f64, budget: f64) -> f64 {
    let c = 1.0 - p;
    let plogp = if p > 0.0 { p * p.ln() } else { 0.0 };
    c * (-(budget - plogp) / c).exp()
}
