//! Instance families of the benchmark experiments.

use std::path::PathBuf;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::environments::Environment;
use crate::error::{CmabError, Result};
use crate::model::BanditInstance;
use crate::numerics::{Matrix, SimRng};
use crate::oracles::{ActionSpace, Graph, PathSpace};

/// Which instance to build, tagged by `family`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum InstanceSpec {
    ShortestPath(ShortestPathSpec),
    MatchingGaussian(MatchingSpec),
    SeparatedGaussian(SeparatedSpec),
    BernoulliMsets(MsetsSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathOutcomes {
    /// `-X_i ~ Bernoulli(-mu_i)` independently.
    Independent,
    /// The same, conditioned on `sum_i X_i = -s`.
    Conditional,
}

fn default_nodes() -> usize {
    39
}

fn default_arcs() -> usize {
    170
}

fn default_graph_seed() -> u64 {
    1
}

fn default_path_proxy() -> f64 {
    0.25
}

/// Shortest path with costs in `{0, 1}` (outcomes in `{-1, 0}`) and
/// `sum_i mu_i = -s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShortestPathSpec {
    pub outcomes: PathOutcomes,
    pub s: u32,
    /// Edge list file; when absent a road-like graph is generated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph_file: Option<PathBuf>,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    #[serde(default = "default_arcs")]
    pub arcs: usize,
    #[serde(default = "default_graph_seed")]
    pub graph_seed: u64,
    #[serde(default)]
    pub source: usize,
    /// Defaults to the node farthest (in hops) from the source.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<usize>,
    /// `D_i` given to the Gaussian samplers.
    #[serde(default = "default_path_proxy")]
    pub proxy: f64,
    #[serde(default)]
    pub redraw_means: bool,
}

/// Perfect matchings of `K_{q,q}` with `X ~ N(mu, c 1{i != j} + 1{i = j})`
/// and `mu` uniform on `[0, 1]^{q^2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchingSpec {
    pub q: usize,
    pub c: f64,
    #[serde(default)]
    pub redraw_means: bool,
}

/// `n / m` disjoint blocks of `m` arms, Gaussian outcomes as for matchings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparatedSpec {
    pub n: usize,
    pub m: usize,
    #[serde(default)]
    pub c: f64,
    #[serde(default)]
    pub redraw_means: bool,
}

/// All `m`-subsets of `n` arms with independent Bernoulli outcomes,
/// `p` uniform on `[0, 1]^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MsetsSpec {
    pub n: usize,
    pub m: usize,
    #[serde(default)]
    pub redraw_means: bool,
}

impl InstanceSpec {
    pub fn redraw_means(&self) -> bool {
        match self {
            InstanceSpec::ShortestPath(s) => s.redraw_means,
            InstanceSpec::MatchingGaussian(s) => s.redraw_means,
            InstanceSpec::SeparatedGaussian(s) => s.redraw_means,
            InstanceSpec::BernoulliMsets(s) => s.redraw_means,
        }
    }

    /// Builds the instance, drawing means from `rng`.
    pub fn build(&self, rng: &mut SimRng) -> Result<BanditInstance> {
        match self {
            InstanceSpec::ShortestPath(s) => s.build(rng),
            InstanceSpec::MatchingGaussian(s) => {
                let space = ActionSpace::matching(s.q)?;
                gaussian_instance(space, s.c, rng)
            }
            InstanceSpec::SeparatedGaussian(s) => {
                let space = ActionSpace::partition(s.n, s.m)?;
                gaussian_instance(space, s.c, rng)
            }
            InstanceSpec::BernoulliMsets(s) => {
                let space = ActionSpace::msets(s.n, s.m)?;
                let p: Vec<f64> = (0..s.n).map(|_| rng.random::<f64>()).collect();
                let env = Environment::independent_bernoulli(p, 1.0)?;
                BanditInstance::new(space, env, Some((0.0, 1.0)), None)?
                    .with_covariance(Matrix::diagonal(&vec![0.25; s.n]))
            }
        }
    }
}

fn gaussian_instance(space: ActionSpace, c: f64, rng: &mut SimRng) -> Result<BanditInstance> {
    if !c.is_finite() {
        return Err(CmabError::Config(format!(
            "correlation c must be finite, got {c}"
        )));
    }
    let n = space.n();
    let mu: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let sigma = Matrix::equicorrelated(n, 1.0, c);
    let env = Environment::gaussian(mu, &sigma)?;
    let cover = space.initial_cover()?;
    BanditInstance::new(space, env, None, Some(cover))?.with_covariance(sigma)
}

impl ShortestPathSpec {
    fn graph(&self) -> Result<Graph> {
        match &self.graph_file {
            Some(p) => Graph::load_edge_list(p),
            None => Graph::road_like(self.nodes, self.arcs, self.graph_seed),
        }
    }

    fn build(&self, rng: &mut SimRng) -> Result<BanditInstance> {
        let graph = self.graph()?;
        let target = match self.target {
            Some(t) => t,
            None => graph.farthest_from(self.source),
        };
        let space = ActionSpace::Path(PathSpace::new(graph, self.source, target)?);
        let n = space.n();
        let p = path_means(n, self.s as f64, rng)?;
        let env = match self.outcomes {
            PathOutcomes::Independent => Environment::independent_bernoulli(p, -1.0)?,
            PathOutcomes::Conditional => {
                Environment::conditional_bernoulli(p, self.s as usize, -1.0)?
            }
        };
        BanditInstance::new(space, env, Some((-1.0, 0.0)), None)?
            .with_covariance(Matrix::diagonal(&vec![0.25; n]))?
            .with_proxy(vec![self.proxy; n])
    }
}

/// `-mu` for the path family: uniform on `[0, 1]^n`, rescaled to sum `s`.
/// Entries pushed above 1 are clipped to 1 and the remaining ones rescaled
/// to restore the sum, at most five times.
pub fn path_means(n: usize, s: f64, rng: &mut SimRng) -> Result<Vec<f64>> {
    if !(s > 0.0 && s < n as f64) {
        return Err(CmabError::Config(format!(
            "traffic s must lie in (0, {n}), got {s}"
        )));
    }
    let mut p: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    for _ in 0..5 {
        let clipped = p.iter().filter(|&&x| x >= 1.0).count() as f64;
        let free: f64 = p.iter().filter(|&&x| x < 1.0).sum();
        let k = (s - clipped) / free;
        for x in p.iter_mut().filter(|x| **x < 1.0) {
            *x *= k;
        }
        if p.iter().all(|&x| x <= 1.0) {
            break;
        }
        for x in p.iter_mut() {
            *x = x.min(1.0);
        }
    }
    Ok(p)
}
