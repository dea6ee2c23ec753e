//! Outcome distributions for the experiment families. Each exposes the
//! exact mean vector used as ground truth for regret.

mod proxy;
mod symmetric;

pub use proxy::{proxy_by_enumeration, subgaussian_proxy, worst_case_proxy, SubGaussianSpec};
pub use symmetric::{
    conditional_inclusion_probabilities, elementary_symmetric, sample_conditional_bernoulli,
    ConditionalBernoulli, SymmetricTable, P_CLAMP,
};

use rand::Rng;

use crate::error::{CmabError, Result};
use crate::numerics::{cholesky, standard_normal, Matrix};

#[derive(Debug, Clone)]
enum Law {
    Independent {
        p: Vec<f64>,
        sign: f64,
    },
    Conditional {
        sampler: ConditionalBernoulli,
        sign: f64,
    },
    Gaussian {
        mu: Vec<f64>,
        chol: Matrix,
    },
}

/// An outcome law `P_X` over `R^n` together with its exact mean.
#[derive(Debug, Clone)]
pub struct Environment {
    law: Law,
    mean: Vec<f64>,
}

fn check_sign(sign: f64) -> Result<()> {
    if sign == 1.0 || sign == -1.0 {
        Ok(())
    } else {
        Err(CmabError::Precondition(format!(
            "sign must be +1 or -1, got {sign}"
        )))
    }
}

fn check_probabilities(p: &[f64]) -> Result<()> {
    match p.iter().position(|x| !(0.0..=1.0).contains(x)) {
        Some(i) => Err(CmabError::Domain(format!(
            "p[{i}] = {} is not a probability",
            p[i]
        ))),
        None => Ok(()),
    }
}

impl Environment {
    /// `X_i = sign * B_i` with independent `B_i ~ Bernoulli(p_i)`.
    pub fn independent_bernoulli(p: Vec<f64>, sign: f64) -> Result<Self> {
        check_sign(sign)?;
        check_probabilities(&p)?;
        let mean = p.iter().map(|x| sign * x).collect();
        Ok(Environment {
            law: Law::Independent { p, sign },
            mean,
        })
    }

    /// `X = sign * B` with `B` independent Bernoulli(p) conditioned on
    /// `sum B = s`. The mean is the exact conditional inclusion vector.
    pub fn conditional_bernoulli(p: Vec<f64>, s: usize, sign: f64) -> Result<Self> {
        check_sign(sign)?;
        check_probabilities(&p)?;
        if s == 0 || s >= p.len() {
            return Err(CmabError::Precondition(format!(
                "need 0 < s < n (s={s}, n={})",
                p.len()
            )));
        }
        let pi = conditional_inclusion_probabilities(&p, s)?;
        let sampler = ConditionalBernoulli::new(&p, s)?;
        Ok(Environment {
            law: Law::Conditional { sampler, sign },
            mean: pi.iter().map(|x| sign * x).collect(),
        })
    }

    /// `N(mu, sigma)`.
    pub fn gaussian(mu: Vec<f64>, sigma: &Matrix) -> Result<Self> {
        if sigma.n() != mu.len() {
            return Err(CmabError::Structural(
                "covariance size does not match the mean".into(),
            ));
        }
        let chol = cholesky(sigma)?;
        Ok(Environment {
            law: Law::Gaussian {
                mu: mu.clone(),
                chol,
            },
            mean: mu,
        })
    }

    pub fn n(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Outcomes lie in `{0, sign}`.
    pub fn is_bernoulli(&self) -> bool {
        !matches!(self.law, Law::Gaussian { .. })
    }

    /// Fills `out` with one full outcome vector.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match &self.law {
            Law::Independent { p, sign } => {
                for (o, &pi) in out.iter_mut().zip(p) {
                    *o = if rng.random::<f64>() < pi { *sign } else { 0.0 };
                }
            }
            Law::Conditional { sampler, sign } => {
                let mut bits = vec![false; out.len()];
                sampler.sample_into(rng, &mut bits);
                for (o, b) in out.iter_mut().zip(bits) {
                    *o = if b { *sign } else { 0.0 };
                }
            }
            Law::Gaussian { mu, chol } => {
                let x = sample_multivariate_gaussian(mu, chol, rng);
                out.copy_from_slice(&x);
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut out = vec![0.0; self.n()];
        self.sample_into(rng, &mut out);
        out
    }
}

/// Independent `sign * Bernoulli(p_i)` coordinates.
pub fn sample_independent_bernoulli<R: Rng + ?Sized>(
    p: &[f64],
    sign: f64,
    rng: &mut R,
) -> Vec<f64> {
    p.iter()
        .map(|&pi| if rng.random::<f64>() < pi { sign } else { 0.0 })
        .collect()
}

/// `mu + L z` with `z` standard normal.
pub fn sample_multivariate_gaussian<R: Rng + ?Sized>(
    mu: &[f64],
    chol_lower: &Matrix,
    rng: &mut R,
) -> Vec<f64> {
    let z: Vec<f64> = (0..mu.len()).map(|_| standard_normal(rng)).collect();
    chol_lower
        .lower_mul_vec(&z)
        .into_iter()
        .zip(mu)
        .map(|(a, m)| a + m)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::stream_rng;

    #[test]
    fn degenerate_bernoulli() {
        let mut rng = stream_rng(1, &[]);
        for _ in 0..100 {
            assert_eq!(
                sample_independent_bernoulli(&[1.0, 0.0], -1.0, &mut rng),
                vec![-1.0, 0.0]
            );
        }
    }

    #[test]
    fn bernoulli_law_of_large_numbers() {
        let mut rng = stream_rng(2, &[]);
        let env = Environment::independent_bernoulli(vec![0.5; 3], 1.0).unwrap();
        let n = 100_000;
        let mut sums = [0.0; 3];
        for _ in 0..n {
            for (s, x) in sums.iter_mut().zip(env.sample(&mut rng)) {
                *s += x;
            }
        }
        let tol = 3.0 * (0.25f64 / n as f64).sqrt();
        assert!(sums.iter().all(|s| (s / n as f64 - 0.5).abs() < tol));
    }

    #[test]
    fn negative_sign_outcomes() {
        let mut rng = stream_rng(3, &[]);
        let mu_star = [-0.2, -0.9, -0.5];
        let p: Vec<f64> = mu_star.iter().map(|m| -m).collect();
        let env = Environment::independent_bernoulli(p, -1.0).unwrap();
        assert_eq!(env.mean(), &mu_star);
        for _ in 0..1000 {
            assert!(env.sample(&mut rng).iter().all(|&x| x == 0.0 || x == -1.0));
        }
    }

    #[test]
    fn conditional_environment_means() {
        let env = Environment::conditional_bernoulli(vec![0.2, 0.8], 1, -1.0).unwrap();
        assert!((env.mean()[0] + 1.0 / 17.0).abs() < 1e-12);
        let mut rng = stream_rng(4, &[]);
        for _ in 0..100 {
            assert_eq!(env.sample(&mut rng).iter().sum::<f64>(), -1.0);
        }
        assert!(Environment::conditional_bernoulli(vec![0.2, 0.8], 2, -1.0).is_err());
        assert!(Environment::conditional_bernoulli(vec![0.2, 0.8], 1, 2.0).is_err());
    }

    #[test]
    fn gaussian_degenerate_and_variance() {
        let mut rng = stream_rng(5, &[]);
        let mu = vec![1.0, -2.0];
        for _ in 0..10 {
            assert_eq!(
                sample_multivariate_gaussian(&mu, &Matrix::zeros(2), &mut rng),
                mu
            );
        }
        let sigma = 1.7;
        let l = Matrix::diagonal(&[sigma]);
        let n = 100_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| sample_multivariate_gaussian(&[0.0], &l, &mut rng)[0])
            .collect();
        let m = xs.iter().sum::<f64>() / n as f64;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((v / (sigma * sigma) - 1.0).abs() < 0.05);
    }

    #[test]
    fn gaussian_off_diagonal_covariance() {
        let mut rng = stream_rng(6, &[]);
        let c = 0.5;
        let env = Environment::gaussian(vec![0.0; 4], &Matrix::equicorrelated(4, 1.0, c)).unwrap();
        let n = 100_000;
        let mut prods = Vec::with_capacity(n);
        for _ in 0..n {
            let x = env.sample(&mut rng);
            prods.push(x[0] * x[3]);
        }
        let cov = prods.iter().sum::<f64>() / n as f64;
        let var = prods.iter().map(|p| (p - cov).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!((cov - c).abs() < 3.0 * se, "cov {cov} se {se}");
    }
}
