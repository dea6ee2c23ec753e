use std::sync::Arc;

use crate::error::{CmabError, Result};
use crate::model::{Action, BanditInstance, CounterState};
use crate::numerics::{klucb_index, ExplorationRate, SimRng};
use crate::oracles::Sense;

use super::{clamp_for_oracle, Policy, UnitBox, Warmup};

/// `mu_i = mean_i + sqrt(gamma_i * 2 * rate / N_i)`; unobserved arms get
/// `unobserved`.
pub fn cucb_indices(
    counters: &CounterState,
    gamma: &[f64],
    rate: f64,
    unobserved: f64,
) -> Vec<f64> {
    (0..counters.n())
        .map(|i| match counters.mean(i) {
            Some(m) => m + (gamma[i] * 2.0 * rate / counters.pulls()[i] as f64).sqrt(),
            None => unobserved,
        })
        .collect()
}

/// `sum_{i in A} mean_i + sqrt(2 * rate * sum_{i in A} gamma_i / N_i)`.
/// Unobserved arms count with mean `unobserved` and no width.
pub fn escb_index(
    action: &Action,
    counters: &CounterState,
    gamma: &[f64],
    rate: f64,
    unobserved: f64,
) -> f64 {
    let mut value = 0.0;
    let mut width = 0.0;
    for &i in action.arms() {
        match counters.mean(i) {
            Some(m) => {
                value += m;
                width += gamma[i] / counters.pulls()[i] as f64;
            }
            None => value += unobserved,
        }
    }
    value + (2.0 * rate * width).sqrt()
}

fn check_gamma(gamma: &[f64], n: usize) -> Result<()> {
    if gamma.len() != n {
        return Err(CmabError::Structural(format!(
            "{} variances for {n} arms",
            gamma.len()
        )));
    }
    if gamma.iter().any(|&g| !(g >= 0.0 && g.is_finite())) {
        return Err(CmabError::Precondition(
            "variances must be finite and non-negative".into(),
        ));
    }
    Ok(())
}

fn check_outcomes(action: &Action, outcomes: &[f64]) -> Result<()> {
    if action.len() != outcomes.len() {
        return Err(CmabError::Structural(format!(
            "{} outcomes for an action of size {}",
            outcomes.len(),
            action.len()
        )));
    }
    Ok(())
}

fn upper_bound(instance: &BanditInstance) -> f64 {
    // After the initial cover every arm is observed, so the fallback only
    // matters when a prior range is all there is.
    instance.prior_range().map_or(f64::INFINITY, |(_, b)| b)
}

/// Plays the oracle on per-arm upper confidence bounds.
pub struct Cucb {
    name: String,
    instance: Arc<BanditInstance>,
    gamma: Vec<f64>,
    exploration: ExplorationRate,
    counters: CounterState,
    warmup: Warmup,
    scores: Vec<f64>,
}

impl Cucb {
    pub fn new(
        name: String,
        instance: Arc<BanditInstance>,
        gamma: Vec<f64>,
        exploration: ExplorationRate,
    ) -> Result<Self> {
        check_gamma(&gamma, instance.n())?;
        Ok(Cucb {
            name,
            gamma,
            exploration,
            counters: CounterState::new(instance.n(), false),
            warmup: Warmup::for_instance(&instance)?,
            scores: Vec::new(),
            instance,
        })
    }

    pub fn counters(&self) -> &CounterState {
        &self.counters
    }

    pub fn set_counters(&mut self, counters: CounterState) {
        assert_eq!(counters.n(), self.instance.n());
        self.counters = counters;
    }
}

impl Policy for Cucb {
    fn name(&self) -> &str {
        &self.name
    }

    fn reset(&mut self) {
        self.counters = CounterState::new(self.instance.n(), false);
        self.warmup.reset();
        self.scores.clear();
    }

    fn select(&mut self, t: usize, _rng: &mut SimRng) -> Result<Action> {
        if let Some(a) = self.warmup.next_action() {
            return Ok(a);
        }
        let rate = self.exploration.value(t);
        let mut idx = cucb_indices(
            &self.counters,
            &self.gamma,
            rate,
            upper_bound(&self.instance),
        );
        clamp_for_oracle(&self.instance, &mut idx);
        let a = self.instance.space().oracle(&idx)?;
        self.scores = idx;
        Ok(a)
    }

    fn observe(
        &mut self,
        _t: usize,
        action: &Action,
        outcomes: &[f64],
        _rng: &mut SimRng,
    ) -> Result<()> {
        check_outcomes(action, outcomes)?;
        self.counters.update(action, outcomes);
        Ok(())
    }

    fn last_scores(&self) -> Option<&[f64]> {
        (!self.scores.is_empty()).then_some(&self.scores[..])
    }
}

/// CUCB with KL-UCB indices, for outcomes in a unit box. Cost problems
/// use lower confidence bounds on the costs and minimize.
pub struct CucbKl {
    name: String,
    instance: Arc<BanditInstance>,
    unit: UnitBox,
    exploration: ExplorationRate,
    counters: CounterState,
    warmup: Warmup,
    scores: Vec<f64>,
}

impl CucbKl {
    pub fn new(
        name: String,
        instance: Arc<BanditInstance>,
        exploration: ExplorationRate,
    ) -> Result<Self> {
        let unit = UnitBox::for_instance(&instance)?;
        Ok(CucbKl {
            name,
            unit,
            exploration,
            counters: CounterState::new(instance.n(), false),
            warmup: Warmup::for_instance(&instance)?,
            scores: Vec::new(),
            instance,
        })
    }

    pub fn set_counters(&mut self, counters: CounterState) {
        assert_eq!(counters.n(), self.instance.n());
        self.counters = counters;
    }

    /// Scores in unit-box coordinates: upper bounds on rewards, or lower
    /// bounds on costs.
    fn indices(&self, rate: f64) -> Vec<f64> {
        let c = &self.counters;
        (0..c.n())
            .map(|i| match (c.mean(i), self.unit.sense()) {
                (Some(m), Sense::Maximize) => klucb_index(m, c.pulls()[i] as f64, rate),
                (Some(m), Sense::Minimize) => 1.0 - klucb_index(1.0 - m, c.pulls()[i] as f64, rate),
                (None, Sense::Maximize) => 1.0,
                (None, Sense::Minimize) => 0.0,
            })
            .collect()
    }
}

impl Policy for CucbKl {
    fn name(&self) -> &str {
        &self.name
    }

    fn reset(&mut self) {
        self.counters = CounterState::new(self.instance.n(), false);
        self.warmup.reset();
        self.scores.clear();
    }

    fn select(&mut self, t: usize, _rng: &mut SimRng) -> Result<Action> {
        if let Some(a) = self.warmup.next_action() {
            return Ok(a);
        }
        let idx = self.indices(self.exploration.value(t));
        let a = self.instance.space().solve(&idx, self.unit.sense())?;
        self.scores = idx;
        Ok(a)
    }

    fn observe(
        &mut self,
        _t: usize,
        action: &Action,
        outcomes: &[f64],
        _rng: &mut SimRng,
    ) -> Result<()> {
        check_outcomes(action, outcomes)?;
        let ys = outcomes
            .iter()
            .map(|&x| self.unit.map(x))
            .collect::<Result<Vec<_>>>()?;
        self.counters.update(action, &ys);
        Ok(())
    }

    fn last_scores(&self) -> Option<&[f64]> {
        (!self.scores.is_empty()).then_some(&self.scores[..])
    }
}

/// Maximizes the ellipsoidal index over an enumerated action list.
pub struct Escb {
    name: String,
    instance: Arc<BanditInstance>,
    gamma: Vec<f64>,
    exploration: ExplorationRate,
    actions: Vec<Action>,
    counters: CounterState,
    warmup: Warmup,
}

impl Escb {
    pub fn new(
        name: String,
        instance: Arc<BanditInstance>,
        gamma: Vec<f64>,
        exploration: ExplorationRate,
        cap: usize,
    ) -> Result<Self> {
        check_gamma(&gamma, instance.n())?;
        let actions = instance.space().enumerate_with_cap(cap)?;
        if actions.is_empty() {
            return Err(CmabError::Infeasible("action space is empty".into()));
        }
        Ok(Escb {
            name,
            gamma,
            exploration,
            actions,
            counters: CounterState::new(instance.n(), false),
            warmup: Warmup::for_instance(&instance)?,
            instance,
        })
    }

    pub fn set_counters(&mut self, counters: CounterState) {
        assert_eq!(counters.n(), self.instance.n());
        self.counters = counters;
    }
}

impl Policy for Escb {
    fn name(&self) -> &str {
        &self.name
    }

    fn reset(&mut self) {
        self.counters = CounterState::new(self.instance.n(), false);
        self.warmup.reset();
    }

    fn select(&mut self, t: usize, _rng: &mut SimRng) -> Result<Action> {
        if let Some(a) = self.warmup.next_action() {
            return Ok(a);
        }
        let rate = self.exploration.value(t);
        let top = upper_bound(&self.instance);
        let mut best = 0;
        let mut best_value = f64::NEG_INFINITY;
        for (k, a) in self.actions.iter().enumerate() {
            let v = escb_index(a, &self.counters, &self.gamma, rate, top);
            if v > best_value {
                best = k;
                best_value = v;
            }
        }
        Ok(self.actions[best].clone())
    }

    fn observe(
        &mut self,
        _t: usize,
        action: &Action,
        outcomes: &[f64],
        _rng: &mut SimRng,
    ) -> Result<()> {
        check_outcomes(action, outcomes)?;
        self.counters.update(action, outcomes);
        Ok(())
    }
}
