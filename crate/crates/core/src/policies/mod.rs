//! Bandit policies behind one contract: build from an instance, then
//! alternate `select` and `observe` each round.

mod beta;
mod gaussian;
mod ucb;

pub use beta::{BetaPosterior, CtsBeta};
pub use gaussian::{CtsGaussian, PriorKind};
pub use ucb::{cucb_indices, escb_index, Cucb, CucbKl, Escb};

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::environments::subgaussian_proxy;
use crate::error::{CmabError, Result};
use crate::model::{Action, BanditInstance};
use crate::numerics::{ExplorationRate, SimRng};
use crate::oracles::{Sense, DEFAULT_ENUMERATION_CAP};

/// A stateful agent owned by a single simulation run.
pub trait Policy: Send {
    fn name(&self) -> &str;

    /// Back to the freshly built state.
    fn reset(&mut self);

    /// Chooses the action for round `t` (1-based).
    fn select(&mut self, t: usize, rng: &mut SimRng) -> Result<Action>;

    /// Semi-bandit feedback: `outcomes[k]` is the outcome of `action.arms()[k]`.
    fn observe(
        &mut self,
        t: usize,
        action: &Action,
        outcomes: &[f64],
        rng: &mut SimRng,
    ) -> Result<()>;

    /// Scores handed to the oracle in the last non-initialization round.
    fn last_scores(&self) -> Option<&[f64]> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    CtsBeta,
    CtsGaussian,
    ClipCtsGaussian,
    Cucb,
    CucbKl,
    Escb,
    /// Always plays `arms`; a reference point for the harness.
    Fixed,
}

fn default_beta() -> f64 {
    1.0
}

/// One policy entry of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySpec {
    pub kind: PolicyKind,
    /// Name in reports; defaults to the kind (plus prior, if not independent).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Prior inflation `beta` of the Gaussian samplers.
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default)]
    pub prior: PriorKind,
    /// Uniform `D_i` overriding whatever the instance provides.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proxy: Option<f64>,
    #[serde(default)]
    pub exploration: ExplorationRate,
    /// Enumeration cap for ESCB.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enumeration_cap: Option<usize>,
    /// Action of a `fixed` policy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arms: Option<Vec<usize>>,
}

impl PolicySpec {
    pub fn new(kind: PolicyKind) -> Self {
        PolicySpec {
            kind,
            label: None,
            beta: 1.0,
            prior: PriorKind::Independent,
            proxy: None,
            exploration: ExplorationRate::default(),
            enumeration_cap: None,
            arms: None,
        }
    }

    pub fn with_prior(mut self, prior: PriorKind) -> Self {
        self.prior = prior;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn name(&self) -> String {
        if let Some(l) = &self.label {
            return l.clone();
        }
        match (self.kind, self.prior) {
            (PolicyKind::CtsBeta, _) => "cts-beta".into(),
            (PolicyKind::CtsGaussian, PriorKind::Independent) => "cts-gaussian".into(),
            (PolicyKind::CtsGaussian, PriorKind::Correlated) => "cts-gaussian-correlated".into(),
            (PolicyKind::CtsGaussian, PriorKind::Common) => "cts-gaussian-common".into(),
            (PolicyKind::ClipCtsGaussian, _) => "clip-cts-gaussian".into(),
            (PolicyKind::Cucb, _) => "cucb".into(),
            (PolicyKind::CucbKl, _) => "cucb-kl".into(),
            (PolicyKind::Escb, _) => "escb".into(),
            (PolicyKind::Fixed, _) => "fixed".into(),
        }
    }

    /// Builds the policy for `instance`, checking that it can run there.
    pub fn build(&self, instance: &Arc<BanditInstance>) -> Result<Box<dyn Policy>> {
        let name = self.name();
        self.build_inner(instance, name.clone())
            .map_err(|e| e.in_policy(&name))
    }

    fn build_inner(&self, instance: &Arc<BanditInstance>, name: String) -> Result<Box<dyn Policy>> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(CmabError::Config(format!(
                "beta must be positive, got {}",
                self.beta
            )));
        }
        if let Some(d) = self.proxy {
            if !(d > 0.0 && d.is_finite()) {
                return Err(CmabError::Config(format!(
                    "proxy must be positive, got {d}"
                )));
            }
        }
        let inst = Arc::clone(instance);
        Ok(match self.kind {
            PolicyKind::CtsBeta => Box::new(CtsBeta::new(name, inst)?),
            PolicyKind::CtsGaussian => {
                let d = self.proxies(instance, false)?;
                Box::new(CtsGaussian::new(
                    name, inst, d, self.beta, self.prior, None,
                )?)
            }
            PolicyKind::ClipCtsGaussian => {
                let d = self.proxies(instance, true)?;
                let gamma = gamma_diagonal(instance)?;
                Box::new(CtsGaussian::new(
                    name,
                    inst,
                    d,
                    self.beta,
                    PriorKind::Independent,
                    Some((gamma, self.exploration)),
                )?)
            }
            PolicyKind::Cucb => Box::new(Cucb::new(
                name,
                inst,
                gamma_diagonal(instance)?,
                self.exploration,
            )?),
            PolicyKind::CucbKl => Box::new(CucbKl::new(name, inst, self.exploration)?),
            PolicyKind::Escb => Box::new(Escb::new(
                name,
                inst,
                gamma_diagonal(instance)?,
                self.exploration,
                self.enumeration_cap.unwrap_or(DEFAULT_ENUMERATION_CAP),
            )?),
            PolicyKind::Fixed => {
                let arms = self
                    .arms
                    .clone()
                    .ok_or_else(|| CmabError::Config("a fixed policy needs `arms`".into()))?;
                Box::new(Fixed {
                    name,
                    action: Action::new(arms, instance.n())?,
                })
            }
        })
    }

    /// `D_i`: explicit override, then what the instance states, then the
    /// proxy derived from its sub-Gaussian matrix.
    fn proxies(&self, instance: &BanditInstance, positive_part: bool) -> Result<Vec<f64>> {
        if let Some(d) = self.proxy {
            return Ok(vec![d; instance.n()]);
        }
        if let Some(d) = instance.proxy() {
            return Ok(d.to_vec());
        }
        match instance.covariance() {
            Some(c) => subgaussian_proxy(c, instance.space(), positive_part),
            None => Err(CmabError::Capability(
                "Gaussian sampling needs proxies D or a sub-Gaussian matrix on the instance".into(),
            )),
        }
    }
}

fn gamma_diagonal(instance: &BanditInstance) -> Result<Vec<f64>> {
    instance.covariance().map(|c| c.diag()).ok_or_else(|| {
        CmabError::Capability("UCB indices need the sub-Gaussian matrix of the instance".into())
    })
}

/// How policies that need every arm observed get started.
#[derive(Debug, Clone)]
pub(crate) struct Warmup {
    cover: Vec<Action>,
    next: usize,
}

impl Warmup {
    /// Uses the instance's initial cover; without one, a prior range must
    /// exist so unobserved arms can be scored.
    pub(crate) fn for_instance(instance: &BanditInstance) -> Result<Self> {
        match (instance.init_cover(), instance.prior_range()) {
            (Some(c), _) => Ok(Warmup {
                cover: c.to_vec(),
                next: 0,
            }),
            (None, Some(_)) => Ok(Warmup {
                cover: Vec::new(),
                next: 0,
            }),
            (None, None) => Err(CmabError::Capability(
                "instance provides neither an initial cover nor a prior range".into(),
            )),
        }
    }

    pub(crate) fn next_action(&mut self) -> Option<Action> {
        let a = self.cover.get(self.next).cloned();
        if a.is_some() {
            self.next += 1;
        }
        a
    }

    pub(crate) fn reset(&mut self) {
        self.next = 0;
    }
}

/// Outcomes in `[0, 1]` are rewards; outcomes in `[-1, 0]` are negated
/// costs and the oracle is asked to minimize. No affine offset is applied,
/// so actions of different sizes compare correctly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct UnitBox {
    pub sign: f64,
}

impl UnitBox {
    pub(crate) fn for_instance(instance: &BanditInstance) -> Result<Self> {
        match instance.prior_range() {
            Some((a, b)) if a == 0.0 && b == 1.0 => Ok(UnitBox { sign: 1.0 }),
            Some((a, b)) if a == -1.0 && b == 0.0 => Ok(UnitBox { sign: -1.0 }),
            _ => Err(CmabError::Capability(
                "policy needs outcomes in a known unit box, [0, 1] or [-1, 0]".into(),
            )),
        }
    }

    pub(crate) fn sense(self) -> Sense {
        if self.sign > 0.0 {
            Sense::Maximize
        } else {
            Sense::Minimize
        }
    }

    /// Outcome in `[0, 1]`, or a domain error.
    pub(crate) fn map(self, x: f64) -> Result<f64> {
        let y = self.sign * x;
        if !(-1e-12..=1.0 + 1e-12).contains(&y) {
            return Err(CmabError::Domain(format!(
                "outcome {x} is outside the unit box"
            )));
        }
        Ok(y.clamp(0.0, 1.0))
    }
}

/// Clamps scores into the prior range before a shortest-path oracle.
pub(crate) fn clamp_for_oracle(instance: &BanditInstance, scores: &mut [f64]) {
    if let (true, Some((a, b))) = (instance.space().is_path(), instance.prior_range()) {
        for s in scores {
            *s = s.clamp(a, b);
        }
    }
}

struct Fixed {
    name: String,
    action: Action,
}

impl Policy for Fixed {
    fn name(&self) -> &str {
        &self.name
    }

    fn reset(&mut self) {}

    fn select(&mut self, _t: usize, _rng: &mut SimRng) -> Result<Action> {
        Ok(self.action.clone())
    }

    fn observe(&mut self, _t: usize, _a: &Action, _x: &[f64], _rng: &mut SimRng) -> Result<()> {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_parses_from_toml() {
        let spec: PolicySpec =
            toml::from_str("kind = \"cts-gaussian\"\nprior = \"correlated\"\nbeta = 2.0\n")
                .unwrap();
        assert_eq!(spec.kind, PolicyKind::CtsGaussian);
        assert_eq!(spec.prior, PriorKind::Correlated);
        assert_eq!(spec.name(), "cts-gaussian-correlated");
        let spec: PolicySpec = toml::from_str("kind = \"cucb\"\nexploration = \"log\"").unwrap();
        assert_eq!(spec.exploration, ExplorationRate::LogT);
        assert!(toml::from_str::<PolicySpec>("kind = \"cucb\"\nbogus = 1").is_err());
    }
}
