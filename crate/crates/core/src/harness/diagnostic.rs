//! Empirical check of the sampling concentration event for CTS-Beta.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{CmabError, Result};
use crate::numerics::stream_rng;
use crate::oracles::DEFAULT_ENUMERATION_CAP;
use crate::policies::{CtsBeta, Policy};

use super::config::ExperimentConfig;
use super::run::{ENV_STREAM, INSTANCE_STREAM, POLICY_STREAM};

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationReport {
    /// Rounds where the event fired, per repetition.
    pub per_run: Vec<usize>,
    /// Rounds where the event was evaluated (all played arms observed).
    pub rounds_checked: usize,
    pub num_actions: usize,
    pub max_action_size: usize,
}

impl ConcentrationReport {
    pub fn total(&self) -> usize {
        self.per_run.iter().sum()
    }
}

/// Runs CTS-Beta on the first variant of `config` and counts rounds with
/// `sum_{i in A_t} |theta_i - mean_i| >= scale * sqrt(log(|A| 2^m T) / 2 * sum_{i in A_t} 1/N_i)`,
/// where `mean_i` is the binarized empirical mean. Rounds where a played
/// arm has no observation yet are skipped.
pub fn diagnostic_concentration(
    config: &ExperimentConfig,
    radius_scale: f64,
) -> Result<ConcentrationReport> {
    config.validate()?;
    let variant = &config.variants[0];
    let seed = config.seed;
    let horizon = config.horizon;
    let build = |r: usize| {
        let path: &[u64] = if variant.instance.redraw_means() {
            &[INSTANCE_STREAM, r as u64]
        } else {
            &[INSTANCE_STREAM]
        };
        variant
            .instance
            .build(&mut stream_rng(seed, path))
            .map(Arc::new)
    };
    let first = build(0)?;
    let actions = first
        .space()
        .enumerate_with_cap(DEFAULT_ENUMERATION_CAP)
        .map_err(|e| {
            CmabError::Capability(format!(
                "the diagnostic needs an enumerable action space: {e}"
            ))
        })?;
    let num_actions = actions.len();
    let m = actions.iter().map(|a| a.len()).max().unwrap_or(0);
    let log_term = 0.5 * ((num_actions as f64).ln() + m as f64 * 2f64.ln() + (horizon as f64).ln());

    let runs: Vec<(usize, usize)> = (0..config.repetitions)
        .into_par_iter()
        .map(|r| -> Result<(usize, usize)> {
            let instance = build(r)?;
            let mut policy = CtsBeta::new("cts-beta".into(), Arc::clone(&instance))?;
            let mut env_rng = stream_rng(seed, &[ENV_STREAM, 0, r as u64, 0]);
            let mut policy_rng = stream_rng(seed, &[POLICY_STREAM, 0, r as u64, 0]);
            let mut outcomes = vec![0.0; instance.n()];
            let (mut fired, mut checked) = (0, 0);
            for t in 1..=horizon {
                let action = policy.select(t, &mut policy_rng)?;
                let post = policy.posterior();
                let theta = policy.theta();
                let mut dev = 0.0;
                let mut inv = 0.0;
                let mut observed = true;
                for &i in action.arms() {
                    match post.mean(i) {
                        Some(mu) => {
                            dev += (theta[i] - mu).abs();
                            inv += 1.0 / post.count(i) as f64;
                        }
                        None => observed = false,
                    }
                }
                if observed {
                    checked += 1;
                    if dev >= radius_scale * (log_term * inv).sqrt() {
                        fired += 1;
                    }
                }
                instance.env().sample_into(&mut env_rng, &mut outcomes);
                let obs: Vec<f64> = action.arms().iter().map(|&i| outcomes[i]).collect();
                policy.observe(t, &action, &obs, &mut policy_rng)?;
            }
            Ok((fired, checked))
        })
        .collect::<Result<_>>()?;
    Ok(ConcentrationReport {
        per_run: runs.iter().map(|r| r.0).collect(),
        rounds_checked: runs.iter().map(|r| r.1).sum(),
        num_actions,
        max_action_size: m,
    })
}
