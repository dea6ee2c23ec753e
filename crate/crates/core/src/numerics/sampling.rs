use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

/// Generator used for every simulated draw.
pub type SimRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent generator keyed by `master` and a path of indices
/// (e.g. `[purpose, repetition, policy]`). The same key always yields the
/// same stream; distinct keys yield unrelated streams.
pub fn stream_rng(master: u64, path: &[u64]) -> SimRng {
    let mut h = splitmix64(master);
    for &p in path {
        h = splitmix64(h ^ splitmix64(p.wrapping_add(0x5851_f42d_4c95_7f2d)));
    }
    ChaCha8Rng::seed_from_u64(h)
}

pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Uniform draw on `[lo, hi)`.
pub fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// `Beta(a, b)` draw as `G_a / (G_a + G_b)` with unit-scale Gamma variates.
pub fn beta_sample<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    let ga = Gamma::new(a, 1.0)
        .expect("beta shape must be positive")
        .sample(rng);
    let gb = Gamma::new(b, 1.0)
        .expect("beta shape must be positive")
        .sample(rng);
    let s = ga + gb;
    if s > 0.0 {
        ga / s
    } else {
        0.5
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_moments_and_tails() {
        let mut rng = stream_rng(7, &[0]);
        let n = 1_000_000;
        let (mut s, mut s2, mut tail) = (0.0, 0.0, 0usize);
        for _ in 0..n {
            let z = standard_normal(&mut rng);
            s += z;
            s2 += z * z;
            if z.abs() > 1.96 {
                tail += 1;
            }
        }
        let mean = s / n as f64;
        let var = s2 / n as f64 - mean * mean;
        assert!(mean.abs() < 0.005, "mean {mean}");
        assert!((var - 1.0).abs() < 0.01, "var {var}");
        // P(|Z| > 1.96) = 2 * (1 - Phi(1.96)) = 0.04999579
        let p = tail as f64 / n as f64;
        assert!((p - 0.049996).abs() < 0.002, "tail {p}");
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let draw = |path: &[u64]| {
            let mut rng = stream_rng(11, path);
            (0..8)
                .map(|_| standard_normal(&mut rng))
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(&[1, 0]), draw(&[1, 0]));
        assert_ne!(draw(&[1, 0]), draw(&[1, 1]));
        assert_ne!(draw(&[0, 1]), draw(&[1, 0]));
    }

    #[test]
    fn beta_one_one_is_uniform() {
        let mut rng = stream_rng(3, &[]);
        let n = 100_000;
        let mut xs: Vec<f64> = (0..n).map(|_| beta_sample(1.0, 1.0, &mut rng)).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for d in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let q = xs[(d * n as f64) as usize];
            assert!((q - d).abs() < 0.01, "decile {d}: {q}");
        }
        assert!(xs[0] > 0.0 && xs[n - 1] < 1.0);
    }

    #[test]
    fn beta_moments() {
        let mut rng = stream_rng(5, &[]);
        let n = 100_000;
        let mean = (0..n).map(|_| beta_sample(2.0, 1.0, &mut rng)).sum::<f64>() / n as f64;
        // sd of Beta(2,1) = sqrt(1/18)
        let se = (1.0f64 / 18.0).sqrt() / (n as f64).sqrt();
        assert!((mean - 2.0 / 3.0).abs() < 3.0 * se, "mean {mean}");
        for _ in 0..10_000 {
            let x = beta_sample(100.0, 100.0, &mut rng);
            assert!(x > 0.3 && x < 0.7);
        }
    }
}
