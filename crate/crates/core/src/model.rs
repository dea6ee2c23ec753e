//! Shared domain types: actions, mean vectors, counters, bandit instances
//! and regret traces.

use std::ops::Deref;

use crate::environments::Environment;
use crate::error::{CmabError, Result};
use crate::numerics::Matrix;
use crate::oracles::ActionSpace;

/// A super arm: a non-empty, strictly increasing set of base-arm indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Action {
    arms: Vec<usize>,
}

impl Action {
    /// Builds an action over `n` arms. Input order is irrelevant.
    pub fn new(mut arms: Vec<usize>, n: usize) -> Result<Self> {
        arms.sort_unstable();
        if arms.is_empty() {
            return Err(CmabError::Structural(
                "an action must contain at least one arm".into(),
            ));
        }
        if arms.windows(2).any(|w| w[0] == w[1]) {
            return Err(CmabError::Structural(format!(
                "duplicate arm in action {arms:?}"
            )));
        }
        if let Some(&last) = arms.last() {
            if last >= n {
                return Err(CmabError::Structural(format!(
                    "arm {last} out of range for n = {n}"
                )));
            }
        }
        Ok(Action { arms })
    }

    /// Caller guarantees the arms are sorted, distinct and non-empty.
    pub(crate) fn from_sorted(arms: Vec<usize>) -> Self {
        debug_assert!(!arms.is_empty() && arms.windows(2).all(|w| w[0] < w[1]));
        Action { arms }
    }

    pub fn arms(&self) -> &[usize] {
        &self.arms
    }

    pub fn len(&self) -> usize {
        self.arms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arms.is_empty()
    }

    pub fn contains(&self, arm: usize) -> bool {
        self.arms.binary_search(&arm).is_ok()
    }

    pub fn incidence(&self, n: usize) -> Vec<bool> {
        let mut e = vec![false; n];
        for &i in &self.arms {
            e[i] = true;
        }
        e
    }

    /// Sum of `weights` over the arms, without bounds checking beyond indexing.
    pub(crate) fn value(&self, weights: &[f64]) -> f64 {
        self.arms.iter().map(|&i| weights[i]).sum()
    }
}

/// Per-arm real values (true means, empirical means, samples, indices).
#[derive(Debug, Clone, PartialEq)]
pub struct MeanVector(Vec<f64>);

impl MeanVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(CmabError::Domain(format!("entry {i} is not finite")));
        }
        Ok(MeanVector(values))
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for MeanVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Linear reward `e_A^T mu`.
pub fn linear_reward(action: &Action, mu: &[f64]) -> Result<f64> {
    match action.arms.last() {
        Some(&last) if last >= mu.len() => Err(CmabError::Structural(format!(
            "arm {last} out of range for a mean vector of length {}",
            mu.len()
        ))),
        _ => Ok(action.value(mu)),
    }
}

/// Pull counters and outcome sums, optionally with pair counters.
#[derive(Debug, Clone, PartialEq)]
pub struct CounterState {
    n: usize,
    pulls: Vec<u64>,
    sums: Vec<f64>,
    pair_pulls: Option<Vec<u64>>,
}

impl CounterState {
    pub fn new(n: usize, track_pairs: bool) -> Self {
        CounterState {
            n,
            pulls: vec![0; n],
            sums: vec![0.0; n],
            pair_pulls: track_pairs.then(|| vec![0; n * n]),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pulls(&self) -> &[u64] {
        &self.pulls
    }

    pub fn sums(&self) -> &[f64] {
        &self.sums
    }

    pub fn tracks_pairs(&self) -> bool {
        self.pair_pulls.is_some()
    }

    /// `N_ij`; `None` without pair tracking.
    pub fn pair(&self, i: usize, j: usize) -> Option<u64> {
        self.pair_pulls.as_ref().map(|p| p[i * self.n + j])
    }

    /// Empirical mean, defined once the arm has been pulled.
    pub fn mean(&self, i: usize) -> Option<f64> {
        (self.pulls[i] > 0).then(|| self.sums[i] / self.pulls[i] as f64)
    }

    pub fn all_pulled(&self) -> bool {
        self.pulls.iter().all(|&c| c > 0)
    }

    /// Records one semi-bandit observation: `outcomes[k]` belongs to
    /// `action.arms()[k]`.
    pub fn update(&mut self, action: &Action, outcomes: &[f64]) {
        assert_eq!(action.len(), outcomes.len(), "one outcome per played arm");
        for (&i, &x) in action.arms.iter().zip(outcomes) {
            self.pulls[i] += 1;
            self.sums[i] += x;
        }
        if let Some(pairs) = self.pair_pulls.as_mut() {
            for &i in &action.arms {
                for &j in &action.arms {
                    pairs[i * self.n + j] += 1;
                }
            }
        }
    }
}

/// Functional form of [`CounterState::update`].
pub fn update_counters(mut state: CounterState, action: &Action, outcomes: &[f64]) -> CounterState {
    state.update(action, outcomes);
    state
}

/// A fully specified problem: action space, outcome law and what the agent
/// is told about it.
#[derive(Debug, Clone)]
pub struct BanditInstance {
    space: ActionSpace,
    env: Environment,
    mu_star: MeanVector,
    prior_range: Option<(f64, f64)>,
    init_cover: Option<Vec<Action>>,
    covariance: Option<Matrix>,
    proxy: Option<Vec<f64>>,
    optimal_value: f64,
}

impl BanditInstance {
    /// The true mean is taken from the environment; the optimal value is
    /// computed once here.
    pub fn new(
        space: ActionSpace,
        env: Environment,
        prior_range: Option<(f64, f64)>,
        init_cover: Option<Vec<Action>>,
    ) -> Result<Self> {
        let n = space.n();
        if env.n() != n {
            return Err(CmabError::Structural(format!(
                "environment has {} arms but the action space has {n}",
                env.n()
            )));
        }
        if let Some((a, b)) = prior_range {
            if !(a < b) {
                return Err(CmabError::Precondition(format!(
                    "prior range [{a}, {b}] is empty"
                )));
            }
        }
        if let Some(cover) = &init_cover {
            let mut seen = vec![false; n];
            for a in cover {
                for &i in a.arms() {
                    if i >= n {
                        return Err(CmabError::Structural(format!("cover arm {i} out of range")));
                    }
                    seen[i] = true;
                }
            }
            if let Some(i) = seen.iter().position(|s| !s) {
                return Err(CmabError::Precondition(format!(
                    "initial cover misses arm {i}"
                )));
            }
        }
        let mu_star = MeanVector::new(env.mean().to_vec())?;
        let best = space.oracle(&mu_star)?;
        let optimal_value = best.value(&mu_star);
        Ok(BanditInstance {
            space,
            env,
            mu_star,
            prior_range,
            init_cover,
            covariance: None,
            proxy: None,
            optimal_value,
        })
    }

    /// Attaches the sub-Gaussian matrix known to the agent.
    pub fn with_covariance(mut self, c: Matrix) -> Result<Self> {
        if c.n() != self.n() {
            return Err(CmabError::Structural(
                "covariance size does not match n".into(),
            ));
        }
        self.covariance = Some(c);
        Ok(self)
    }

    /// Attaches per-arm proxies `D_i` known to the agent directly.
    pub fn with_proxy(mut self, d: Vec<f64>) -> Result<Self> {
        if d.len() != self.n() || d.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(CmabError::Structural(
                "proxy must be n finite non-negative values".into(),
            ));
        }
        self.proxy = Some(d);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.space.n()
    }

    pub fn space(&self) -> &ActionSpace {
        &self.space
    }

    pub fn env(&self) -> &Environment {
        &self.env
    }

    pub fn mu_star(&self) -> &MeanVector {
        &self.mu_star
    }

    pub fn prior_range(&self) -> Option<(f64, f64)> {
        self.prior_range
    }

    pub fn init_cover(&self) -> Option<&[Action]> {
        self.init_cover.as_deref()
    }

    pub fn covariance(&self) -> Option<&Matrix> {
        self.covariance.as_ref()
    }

    pub fn proxy(&self) -> Option<&[f64]> {
        self.proxy.as_deref()
    }

    /// `r(A*, mu*)`.
    pub fn optimal_value(&self) -> f64 {
        self.optimal_value
    }

    /// `r(A*, mu*) - r(A, mu*)`, never negative.
    pub fn gap(&self, action: &Action) -> Result<f64> {
        let r = linear_reward(action, &self.mu_star)?;
        Ok((self.optimal_value - r).max(0.0))
    }
}

/// Per-round gaps of one run, with optional per-round selection times.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    pub gaps: Vec<f64>,
    pub select_seconds: Option<Vec<f64>>,
}

impl RegretTrace {
    pub fn horizon(&self) -> usize {
        self.gaps.len()
    }

    pub fn cumulative(&self) -> Vec<f64> {
        self.gaps
            .iter()
            .scan(0.0, |acc, g| {
                *acc += g;
                Some(*acc)
            })
            .collect()
    }

    pub fn total(&self) -> f64 {
        self.gaps.iter().sum()
    }
}
