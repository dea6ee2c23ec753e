use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{CmabError, Result};
use crate::model::{Action, BanditInstance, CounterState};
use crate::numerics::{cholesky, standard_normal, uniform, ExplorationRate, Matrix, SimRng};

use super::{clamp_for_oracle, ucb::cucb_indices, Policy, Warmup};

/// Shape of the Gaussian sampling distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PriorKind {
    /// Independent coordinates with variance `beta D_i / N_i`.
    #[default]
    Independent,
    /// Covariance `beta C_ij N_ij / (N_i N_j)` built from pair counters.
    Correlated,
    /// One shared normal draw scaled by `N_i^{-1/2}`.
    Common,
}

/// Thompson sampling with Gaussian scores, optionally clipped into
/// `[mean, UCB]` (the clip variant).
pub struct CtsGaussian {
    name: String,
    instance: Arc<BanditInstance>,
    d: Vec<f64>,
    beta: f64,
    prior: PriorKind,
    clip: Option<(Vec<f64>, ExplorationRate)>,
    corr: Option<Matrix>,
    counters: CounterState,
    warmup: Warmup,
    theta: Vec<f64>,
}

impl CtsGaussian {
    pub fn new(
        name: String,
        instance: Arc<BanditInstance>,
        d: Vec<f64>,
        beta: f64,
        prior: PriorKind,
        clip: Option<(Vec<f64>, ExplorationRate)>,
    ) -> Result<Self> {
        let n = instance.n();
        if d.len() != n {
            return Err(CmabError::Structural(format!(
                "{} proxies for {n} arms",
                d.len()
            )));
        }
        if d.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
            return Err(CmabError::Precondition(
                "proxies must be finite and non-negative".into(),
            ));
        }
        if let Some((g, _)) = &clip {
            if g.len() != n || g.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
                return Err(CmabError::Precondition(
                    "clipping needs a finite non-negative variance per arm".into(),
                ));
            }
        }
        let corr = match prior {
            PriorKind::Correlated => Some(instance.covariance().cloned().ok_or_else(|| {
                CmabError::Capability("correlated prior needs the matrix C".into())
            })?),
            _ => None,
        };
        let warmup = Warmup::for_instance(&instance)?;
        Ok(CtsGaussian {
            name,
            d,
            beta,
            prior,
            clip,
            counters: CounterState::new(n, corr.is_some()),
            corr,
            warmup,
            theta: Vec::new(),
            instance,
        })
    }

    pub fn counters(&self) -> &CounterState {
        &self.counters
    }

    /// Replaces the counters, e.g. to start from a known state.
    pub fn set_counters(&mut self, counters: CounterState) {
        assert_eq!(counters.n(), self.instance.n());
        assert_eq!(counters.tracks_pairs(), self.corr.is_some());
        self.counters = counters;
    }

    /// Raw sample before clipping and oracle clamping.
    fn sample(&self, rng: &mut SimRng) -> Result<Vec<f64>> {
        let n = self.instance.n();
        let c = &self.counters;
        let mean: Vec<f64> = (0..n).map(|i| c.mean(i).unwrap_or(0.0)).collect();
        let mut theta = mean.clone();
        match self.prior {
            PriorKind::Independent => {
                for i in 0..n {
                    let ni = c.pulls()[i];
                    if ni > 0 {
                        theta[i] +=
                            (self.beta * self.d[i] / ni as f64).sqrt() * standard_normal(rng);
                    }
                }
            }
            PriorKind::Common => {
                let g = self.beta.sqrt() * standard_normal(rng);
                for i in 0..n {
                    let ni = c.pulls()[i];
                    if ni > 0 {
                        theta[i] += g / (ni as f64).sqrt();
                    }
                }
            }
            PriorKind::Correlated => {
                let cm = self.corr.as_ref().expect("correlated prior keeps C");
                let idx: Vec<usize> = (0..n).filter(|&i| c.pulls()[i] > 0).collect();
                let cov = Matrix::from_fn(idx.len(), |a, b| {
                    let (i, j) = (idx[a], idx[b]);
                    let nij = c.pair(i, j).unwrap_or(0) as f64;
                    self.beta * cm[(i, j)] * nij / (c.pulls()[i] as f64 * c.pulls()[j] as f64)
                });
                let l = cholesky(&cov)?;
                let z: Vec<f64> = (0..idx.len()).map(|_| standard_normal(rng)).collect();
                for (a, dz) in l.lower_mul_vec(&z).into_iter().enumerate() {
                    theta[idx[a]] += dz;
                }
            }
        }
        if !c.all_pulled() {
            let (lo, hi) = self.instance.prior_range().ok_or_else(|| {
                CmabError::Capability("unobserved arm and no prior range to sample it from".into())
            })?;
            for i in 0..n {
                if c.pulls()[i] == 0 {
                    theta[i] = uniform(rng, lo, hi);
                }
            }
        }
        Ok(theta)
    }
}

/// Clamps each observed coordinate of `theta` into `[mean_i, ucb_i]`.
/// Unobserved arms keep their score.
pub(crate) fn clip_to_confidence(
    theta: &mut [f64],
    counters: &CounterState,
    gamma: &[f64],
    rate: f64,
) {
    let ucb = cucb_indices(counters, gamma, rate, f64::NAN);
    for (i, th) in theta.iter_mut().enumerate() {
        if let Some(m) = counters.mean(i) {
            *th = th.max(m).min(ucb[i]);
        }
    }
}

impl Policy for CtsGaussian {
    fn name(&self) -> &str {
        &self.name
    }

    fn reset(&mut self) {
        self.counters = CounterState::new(self.instance.n(), self.corr.is_some());
        self.warmup.reset();
        self.theta.clear();
    }

    fn select(&mut self, t: usize, rng: &mut SimRng) -> Result<Action> {
        if let Some(a) = self.warmup.next_action() {
            return Ok(a);
        }
        let mut theta = self.sample(rng)?;
        if let Some((gamma, rate)) = &self.clip {
            clip_to_confidence(&mut theta, &self.counters, gamma, rate.value(t));
        }
        clamp_for_oracle(&self.instance, &mut theta);
        let a = self.instance.space().oracle(&theta)?;
        self.theta = theta;
        Ok(a)
    }

    fn observe(
        &mut self,
        _t: usize,
        action: &Action,
        outcomes: &[f64],
        _rng: &mut SimRng,
    ) -> Result<()> {
        if action.len() != outcomes.len() {
            return Err(CmabError::Structural(format!(
                "{} outcomes for an action of size {}",
                outcomes.len(),
                action.len()
            )));
        }
        self.counters.update(action, outcomes);
        Ok(())
    }

    fn last_scores(&self) -> Option<&[f64]> {
        (!self.theta.is_empty()).then_some(&self.theta[..])
    }
}
