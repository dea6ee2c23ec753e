//! Seeded, parallel execution of an experiment.

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::Result;
use crate::model::{BanditInstance, RegretTrace};
use crate::numerics::stream_rng;
use crate::policies::Policy;

use super::config::ExperimentConfig;

/// Stream tags under the master seed.
pub(crate) const ENV_STREAM: u64 = 1;
pub(crate) const POLICY_STREAM: u64 = 2;
pub(crate) const INSTANCE_STREAM: u64 = 3;

/// Aggregate over repetitions for one (variant, policy) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyCurve {
    pub variant: String,
    pub policy: String,
    pub mean: Vec<f64>,
    /// Sample standard deviation across repetitions (0 for one repetition).
    pub std: Vec<f64>,
    /// Mean `select` time per round in milliseconds, in timing mode.
    pub mean_select_ms: Option<Vec<f64>>,
    /// Final cumulative regret of each repetition.
    pub finals: Vec<f64>,
}

impl PolicyCurve {
    /// `policy`, or `policy[variant]` for multi-variant experiments.
    pub fn label(&self) -> String {
        if self.variant.is_empty() {
            self.policy.clone()
        } else {
            format!("{}[{}]", self.policy, self.variant)
        }
    }

    pub fn final_mean(&self) -> f64 {
        self.mean.last().copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregatedResult {
    pub horizon: usize,
    pub repetitions: usize,
    /// Ordered by variant, then by policy as configured.
    pub curves: Vec<PolicyCurve>,
}

impl AggregatedResult {
    pub fn curve(&self, variant: &str, policy: &str) -> Option<&PolicyCurve> {
        self.curves
            .iter()
            .find(|c| c.variant == variant && c.policy == policy)
    }
}

/// Plays `policy` for `horizon` rounds. The environment draws a full outcome
/// vector each round from `env_rng`; only the played arms are revealed.
pub fn simulate(
    instance: &BanditInstance,
    policy: &mut dyn Policy,
    horizon: usize,
    env_rng: &mut crate::numerics::SimRng,
    policy_rng: &mut crate::numerics::SimRng,
    timing: bool,
) -> Result<RegretTrace> {
    let mut outcomes = vec![0.0; instance.n()];
    let mut observed = Vec::new();
    let mut gaps = Vec::with_capacity(horizon);
    let mut times = timing.then(|| Vec::with_capacity(horizon));
    for t in 1..=horizon {
        let start = Instant::now();
        let action = policy.select(t, policy_rng)?;
        if let Some(ts) = times.as_mut() {
            ts.push(start.elapsed().as_secs_f64());
        }
        instance.env().sample_into(env_rng, &mut outcomes);
        observed.clear();
        observed.extend(action.arms().iter().map(|&i| outcomes[i]));
        policy.observe(t, &action, &observed, policy_rng)?;
        gaps.push(instance.gap(&action)?);
    }
    Ok(RegretTrace {
        gaps,
        select_seconds: times,
    })
}

/// Runs every (variant, repetition) job, each holding all policies, and
/// aggregates in a fixed order. Results do not depend on scheduling.
/// Timing mode runs jobs one at a time so measurements do not compete.
pub fn run_experiment(config: &ExperimentConfig) -> Result<AggregatedResult> {
    config.validate()?;
    let reps = config.repetitions;
    let seed = config.seed;

    // Shared instances when the means are fixed, plus a capability check
    // of every policy before any simulation starts.
    let mut fixed: Vec<Option<Arc<BanditInstance>>> = Vec::with_capacity(config.variants.len());
    for v in &config.variants {
        let redraw = v.instance.redraw_means();
        let path: &[u64] = if redraw {
            &[INSTANCE_STREAM, 0]
        } else {
            &[INSTANCE_STREAM]
        };
        let inst = Arc::new(v.instance.build(&mut stream_rng(seed, path))?);
        for p in &config.policies {
            p.build(&inst)?;
        }
        fixed.push((!redraw).then_some(inst));
    }

    let jobs: Vec<(usize, usize)> = (0..config.variants.len())
        .flat_map(|v| (0..reps).map(move |r| (v, r)))
        .collect();
    let job = |&(v, r): &(usize, usize)| -> Result<Vec<RegretTrace>> {
        let instance = match &fixed[v] {
            Some(i) => Arc::clone(i),
            None => Arc::new(
                config.variants[v]
                    .instance
                    .build(&mut stream_rng(seed, &[INSTANCE_STREAM, r as u64]))?,
            ),
        };
        config
            .policies
            .iter()
            .enumerate()
            .map(|(p, spec)| {
                let mut policy = spec.build(&instance)?;
                let (v, r, p) = (v as u64, r as u64, p as u64);
                let mut env_rng = if config.couple_streams {
                    stream_rng(seed, &[ENV_STREAM, v, r])
                } else {
                    stream_rng(seed, &[ENV_STREAM, v, r, p])
                };
                let mut policy_rng = stream_rng(seed, &[POLICY_STREAM, v, r, p]);
                simulate(
                    &instance,
                    policy.as_mut(),
                    config.horizon,
                    &mut env_rng,
                    &mut policy_rng,
                    config.timing,
                )
                .map_err(|e| e.in_policy(&spec.name()))
            })
            .collect()
    };
    let traces: Vec<Vec<RegretTrace>> = if config.timing {
        jobs.iter().map(job).collect::<Result<_>>()?
    } else {
        jobs.par_iter().map(job).collect::<Result<_>>()?
    };

    let mut curves = Vec::new();
    for (v, variant) in config.variants.iter().enumerate() {
        let block = &traces[v * reps..(v + 1) * reps];
        for (p, spec) in config.policies.iter().enumerate() {
            let runs: Vec<&RegretTrace> = block.iter().map(|t| &t[p]).collect();
            let cumulative: Vec<Vec<f64>> = runs.iter().map(|r| r.cumulative()).collect();
            let (mean, std) = aggregate(&cumulative.iter().map(Vec::as_slice).collect::<Vec<_>>());
            let mean_select_ms = config.timing.then(|| {
                let secs: Vec<&[f64]> = runs
                    .iter()
                    .map(|r| r.select_seconds.as_deref().unwrap_or(&[]))
                    .collect();
                aggregate(&secs).0.into_iter().map(|s| s * 1e3).collect()
            });
            curves.push(PolicyCurve {
                variant: variant.label.clone(),
                policy: spec.name(),
                mean,
                std,
                mean_select_ms,
                finals: cumulative
                    .iter()
                    .map(|c| c.last().copied().unwrap_or(0.0))
                    .collect(),
            });
        }
    }
    Ok(AggregatedResult {
        horizon: config.horizon,
        repetitions: reps,
        curves,
    })
}

/// Pointwise mean and sample standard deviation of equal-length curves.
pub fn aggregate(curves: &[&[f64]]) -> (Vec<f64>, Vec<f64>) {
    let r = curves.len();
    let len = curves.first().map_or(0, |c| c.len());
    let mut mean = vec![0.0; len];
    let mut std = vec![0.0; len];
    if r == 0 {
        return (mean, std);
    }
    for t in 0..len {
        let m = curves.iter().map(|c| c[t]).sum::<f64>() / r as f64;
        mean[t] = m;
        if r > 1 {
            let ss: f64 = curves.iter().map(|c| (c[t] - m).powi(2)).sum();
            std[t] = (ss / (r - 1) as f64).sqrt();
        }
    }
    (mean, std)
}

/// Per-policy mean `select` time in milliseconds over all `T * R` calls.
pub fn timing_report(result: &AggregatedResult) -> Vec<(String, String, f64)> {
    result
        .curves
        .iter()
        .filter_map(|c| {
            let ms = c.mean_select_ms.as_ref()?;
            let avg = ms.iter().sum::<f64>() / ms.len().max(1) as f64;
            Some((c.variant.clone(), c.policy.clone(), avg))
        })
        .collect()
}
