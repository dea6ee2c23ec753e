use std::sync::Arc;

use rand::Rng;

use crate::error::Result;
use crate::model::{Action, BanditInstance};
use crate::numerics::{beta_sample, SimRng};

use super::{Policy, UnitBox};

/// Independent `Beta(a_i, b_i)` posteriors over binarized outcomes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BetaPosterior {
    pub a: Vec<u64>,
    pub b: Vec<u64>,
}

impl BetaPosterior {
    /// Uniform prior `a_i = b_i = 1`.
    pub fn uniform(n: usize) -> Self {
        BetaPosterior {
            a: vec![1; n],
            b: vec![1; n],
        }
    }

    /// Binarized observations of arm `i`.
    pub fn count(&self, i: usize) -> u64 {
        self.a[i] + self.b[i] - 2
    }

    /// Empirical mean of the binarized observations, once there are some.
    pub fn mean(&self, i: usize) -> Option<f64> {
        let n = self.count(i);
        (n > 0).then(|| (self.a[i] - 1) as f64 / n as f64)
    }

    pub fn sample(&self, rng: &mut SimRng) -> Vec<f64> {
        self.a
            .iter()
            .zip(&self.b)
            .map(|(&a, &b)| beta_sample(a as f64, b as f64, rng))
            .collect()
    }

    /// Draws `Y ~ Bernoulli(y)` and moves one unit into `a_i` or `b_i`.
    /// Returns `Y`.
    pub fn observe(&mut self, i: usize, y: f64, rng: &mut SimRng) -> bool {
        let hit = rng.random::<f64>() < y;
        if hit {
            self.a[i] += 1;
        } else {
            self.b[i] += 1;
        }
        hit
    }
}

/// Thompson sampling with Beta priors and outcome binarization.
///
/// Works in the unit box: rewards in `[0, 1]` are maximized, outcomes in
/// `[-1, 0]` are turned into costs and minimized.
pub struct CtsBeta {
    name: String,
    instance: Arc<BanditInstance>,
    unit: UnitBox,
    posterior: BetaPosterior,
    theta: Vec<f64>,
}

impl CtsBeta {
    pub fn new(name: String, instance: Arc<BanditInstance>) -> Result<Self> {
        let unit = UnitBox::for_instance(&instance)?;
        let n = instance.n();
        Ok(CtsBeta {
            name,
            instance,
            unit,
            posterior: BetaPosterior::uniform(n),
            theta: Vec::new(),
        })
    }

    pub fn posterior(&self) -> &BetaPosterior {
        &self.posterior
    }

    /// Replaces the posterior (e.g. to start from a given state).
    pub fn set_posterior(&mut self, posterior: BetaPosterior) {
        assert_eq!(posterior.a.len(), self.instance.n());
        self.posterior = posterior;
    }

    /// Last sampled `theta` in unit-box coordinates.
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }
}

impl Policy for CtsBeta {
    fn name(&self) -> &str {
        &self.name
    }

    fn reset(&mut self) {
        self.posterior = BetaPosterior::uniform(self.instance.n());
        self.theta.clear();
    }

    fn select(&mut self, _t: usize, rng: &mut SimRng) -> Result<Action> {
        self.theta = self.posterior.sample(rng);
        self.instance.space().solve(&self.theta, self.unit.sense())
    }

    fn observe(
        &mut self,
        _t: usize,
        action: &Action,
        outcomes: &[f64],
        rng: &mut SimRng,
    ) -> Result<()> {
        // Validate everything before touching the posterior.
        let ys = outcomes
            .iter()
            .map(|&x| self.unit.map(x))
            .collect::<Result<Vec<_>>>()?;
        for (&i, y) in action.arms().iter().zip(ys) {
            self.posterior.observe(i, y, rng);
        }
        Ok(())
    }

    fn last_scores(&self) -> Option<&[f64]> {
        (!self.theta.is_empty()).then_some(&self.theta[..])
    }
}
