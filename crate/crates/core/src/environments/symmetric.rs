//! Elementary symmetric polynomials in log space and the exact
//! fixed-sum (conditional) Bernoulli law built on them.

use rand::Rng;

use crate::error::{CmabError, Result};

/// Probabilities are clamped into `[P_CLAMP, 1 - P_CLAMP]` before odds are formed.
pub const P_CLAMP: f64 = 1e-12;

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `log e_k(w_j, ..., w_{n-1})` for every suffix start `j` in `0..=n` and
/// every `k` in `0..=k_max`.
#[derive(Debug, Clone)]
pub struct SymmetricTable {
    n: usize,
    k_max: usize,
    log: Vec<f64>,
}

impl SymmetricTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// `log e_k` of the suffix starting at `j`.
    pub fn log_suffix(&self, j: usize, k: usize) -> f64 {
        self.log[j * (self.k_max + 1) + k]
    }

    pub fn suffix(&self, j: usize, k: usize) -> f64 {
        self.log_suffix(j, k).exp()
    }

    /// `e_k` of the whole sequence.
    pub fn total(&self, k: usize) -> f64 {
        self.suffix(0, k)
    }
}

/// Suffix table via `e_k(j) = e_k(j+1) + w_j e_{k-1}(j+1)`, kept in log
/// space so that ratios stay accurate for long sequences.
pub fn elementary_symmetric(odds: &[f64], k_max: usize) -> Result<SymmetricTable> {
    let n = odds.len();
    if k_max > n {
        return Err(CmabError::Precondition(format!(
            "k_max = {k_max} exceeds n = {n}"
        )));
    }
    if let Some(i) = odds.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(CmabError::Domain(format!(
            "odds[{i}] = {} is not a finite non-negative value",
            odds[i]
        )));
    }
    let width = k_max + 1;
    let mut log = vec![f64::NEG_INFINITY; (n + 1) * width];
    log[n * width] = 0.0;
    for j in (0..n).rev() {
        let lw = odds[j].ln();
        for k in 0..width {
            let keep = log[(j + 1) * width + k];
            let take = if k > 0 {
                lw + log[(j + 1) * width + k - 1]
            } else {
                f64::NEG_INFINITY
            };
            log[j * width + k] = log_add(keep, take);
        }
    }
    Ok(SymmetricTable { n, k_max, log })
}

fn clamped_odds(p: &[f64]) -> Result<Vec<f64>> {
    p.iter()
        .enumerate()
        .map(|(i, &pi)| {
            if !(0.0..=1.0).contains(&pi) {
                return Err(CmabError::Domain(format!(
                    "p[{i}] = {pi} is not a probability"
                )));
            }
            let c = pi.clamp(P_CLAMP, 1.0 - P_CLAMP);
            Ok(c / (1.0 - c))
        })
        .collect()
}

/// `P(X_i = 1 | sum X = s)` for independent `X_i ~ Bernoulli(p_i)`:
/// `w_i e_{s-1}(w_{-i}) / e_s(w)` with odds `w_i = p_i / (1 - p_i)`.
pub fn conditional_inclusion_probabilities(p: &[f64], s: usize) -> Result<Vec<f64>> {
    let n = p.len();
    if s > n {
        return Err(CmabError::Precondition(format!(
            "target sum {s} exceeds n = {n}"
        )));
    }
    if s == 0 {
        return Ok(vec![0.0; n]);
    }
    if s == n {
        return Ok(vec![1.0; n]);
    }
    let odds = clamped_odds(p)?;
    let suffix = elementary_symmetric(&odds, s)?;
    let reversed: Vec<f64> = odds.iter().rev().copied().collect();
    // Prefix of length i is the reversed suffix starting at n - i.
    let prefix = elementary_symmetric(&reversed, s)?;
    let log_total = suffix.log_suffix(0, s);
    Ok((0..n)
        .map(|i| {
            let mut log_rest = f64::NEG_INFINITY;
            for k in 0..s {
                let a = prefix.log_suffix(n - i, k);
                let b = suffix.log_suffix(i + 1, s - 1 - k);
                log_rest = log_add(log_rest, a + b);
            }
            (odds[i].ln() + log_rest - log_total).exp().clamp(0.0, 1.0)
        })
        .collect())
}

/// Exact sampler for independent Bernoulli coordinates conditioned on
/// their sum.
#[derive(Debug, Clone)]
pub struct ConditionalBernoulli {
    log_odds: Vec<f64>,
    sum: usize,
    table: SymmetricTable,
}

impl ConditionalBernoulli {
    pub fn new(p: &[f64], s: usize) -> Result<Self> {
        if s > p.len() {
            return Err(CmabError::Precondition(format!(
                "target sum {s} exceeds n = {}",
                p.len()
            )));
        }
        let odds = clamped_odds(p)?;
        let table = elementary_symmetric(&odds, s)?;
        Ok(ConditionalBernoulli {
            log_odds: odds.iter().map(|w| w.ln()).collect(),
            sum: s,
            table,
        })
    }

    pub fn n(&self) -> usize {
        self.log_odds.len()
    }

    pub fn target_sum(&self) -> usize {
        self.sum
    }

    /// Sequential draw: arm `j` enters with probability
    /// `w_j e_{r-1}(w_{>j}) / e_r(w_{>=j})`, `r` being the remaining budget.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [bool]) {
        let n = self.n();
        let mut r = self.sum;
        for j in 0..n {
            if r == 0 {
                out[j] = false;
                continue;
            }
            if n - j == r {
                out[j] = true;
                r -= 1;
                continue;
            }
            let log_p = self.log_odds[j] + self.table.log_suffix(j + 1, r - 1)
                - self.table.log_suffix(j, r);
            let take = rng.random::<f64>() < log_p.exp();
            out[j] = take;
            if take {
                r -= 1;
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<bool> {
        let mut out = vec![false; self.n()];
        self.sample_into(rng, &mut out);
        out
    }
}

/// One draw of the fixed-sum Bernoulli vector (rebuilds the table; use
/// [`ConditionalBernoulli`] for repeated draws).
pub fn sample_conditional_bernoulli<R: Rng + ?Sized>(
    p: &[f64],
    s: usize,
    rng: &mut R,
) -> Result<Vec<bool>> {
    Ok(ConditionalBernoulli::new(p, s)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::stream_rng;
    use approx::assert_relative_eq;

    /// Brute force over all 2^n outcomes with exactly `s` ones.
    fn enumerate_inclusion(p: &[f64], s: usize) -> Vec<f64> {
        let n = p.len();
        let mut num = vec![0.0; n];
        let mut den = 0.0;
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != s {
                continue;
            }
            let w: f64 = (0..n)
                .map(|i| if mask >> i & 1 == 1 { p[i] } else { 1.0 - p[i] })
                .product();
            den += w;
            for (i, x) in num.iter_mut().enumerate() {
                if mask >> i & 1 == 1 {
                    *x += w;
                }
            }
        }
        num.iter().map(|x| x / den).collect()
    }

    #[test]
    fn table_examples() {
        let t = elementary_symmetric(&[1.0, 1.0, 1.0], 2).unwrap();
        assert_relative_eq!(t.total(2), 3.0, max_relative = 1e-12);
        let t = elementary_symmetric(&[2.0, 3.0], 2).unwrap();
        assert_relative_eq!(t.total(1), 5.0, max_relative = 1e-12);
        assert_relative_eq!(t.total(2), 6.0, max_relative = 1e-12);
        let t = elementary_symmetric(&[0.25, 4.0, 1.0], 2).unwrap();
        assert_relative_eq!(t.total(2), 5.25, max_relative = 1e-12);
        assert_relative_eq!(t.suffix(1, 1), 5.0, max_relative = 1e-12);
        assert_eq!(t.total(0), 1.0);
        assert!(elementary_symmetric(&[1.0], 2).is_err());
        assert!(elementary_symmetric(&[f64::INFINITY], 1).is_err());
    }

    #[test]
    fn inclusion_examples() {
        let pi = conditional_inclusion_probabilities(&[0.5, 0.5], 1).unwrap();
        assert_relative_eq!(pi[0], 0.5, epsilon = 1e-12);
        let pi = conditional_inclusion_probabilities(&[0.2, 0.8], 1).unwrap();
        assert_relative_eq!(pi[0], 1.0 / 17.0, epsilon = 1e-12);
        assert_relative_eq!(pi[1], 16.0 / 17.0, epsilon = 1e-12);
        assert_eq!(
            conditional_inclusion_probabilities(&[0.3, 0.1, 0.9], 3).unwrap(),
            vec![1.0; 3]
        );
        assert!(conditional_inclusion_probabilities(&[0.3], 2).is_err());
    }

    #[test]
    fn inclusion_matches_enumeration() {
        let mut rng = stream_rng(9, &[]);
        for n in 2..=12 {
            for s in 1..n {
                let p: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
                let dp = conditional_inclusion_probabilities(&p, s).unwrap();
                let bf = enumerate_inclusion(&p, s);
                for (a, b) in dp.iter().zip(&bf) {
                    assert!((a - b).abs() < 1e-9, "n={n} s={s}: {a} vs {b}");
                }
                assert!((dp.iter().sum::<f64>() - s as f64).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn large_instance_stays_consistent() {
        let n = 170;
        let p: Vec<f64> = (0..n).map(|i| ((i * 37) % 101) as f64 / 100.0).collect();
        let pi = conditional_inclusion_probabilities(&p, 110).unwrap();
        assert!((pi.iter().sum::<f64>() - 110.0).abs() < 1e-8);
        assert!(pi.iter().all(|x| (0.0..=1.0).contains(x)));
    }

    #[test]
    fn samples_have_exact_sum() {
        let mut rng = stream_rng(10, &[]);
        let p: Vec<f64> = (0..20).map(|i| (i as f64 + 0.5) / 21.0).collect();
        let cb = ConditionalBernoulli::new(&p, 7).unwrap();
        for _ in 0..10_000 {
            assert_eq!(cb.sample(&mut rng).iter().filter(|&&x| x).count(), 7);
        }
    }

    #[test]
    fn two_arm_frequency() {
        let mut rng = stream_rng(11, &[]);
        let cb = ConditionalBernoulli::new(&[0.2, 0.8], 1).unwrap();
        let n = 100_000;
        let hits = (0..n).filter(|_| cb.sample(&mut rng)[0]).count();
        let f = hits as f64 / n as f64;
        let p = 1.0 / 17.0;
        assert!(
            (f - p).abs() < 3.0 * (p * (1.0 - p) / n as f64).sqrt(),
            "{f}"
        );
    }

    #[test]
    fn degenerate_probabilities() {
        let mut rng = stream_rng(12, &[]);
        let cb = ConditionalBernoulli::new(&[1.0, 0.0, 0.5, 0.5], 2).unwrap();
        for _ in 0..1000 {
            let x = cb.sample(&mut rng);
            assert!(x[0] && !x[1]);
            assert!(x[2] ^ x[3]);
        }
    }
}
