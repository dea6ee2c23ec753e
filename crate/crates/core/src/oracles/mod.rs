//! Exact linear-maximization oracles `argmax_{A} e_A^T w` for every action
//! space family, plus exhaustive enumeration.
//!
//! Ties resolve to the action whose sorted arm list is lexicographically
//! smallest, except on path spaces where the shortest-path tree decides.

mod graph;
mod hungarian;

pub use graph::{Graph, PathSpace};
pub use hungarian::max_weight_matching;

use crate::error::{CmabError, Result};
use crate::model::Action;

/// Default cap on the number of actions [`ActionSpace::enumerate`] produces.
pub const DEFAULT_ENUMERATION_CAP: usize = 1_000_000;

/// Largest matching side size that may be enumerated.
pub const MAX_ENUMERABLE_MATCHING: usize = 8;

/// Direction of the linear objective handed to [`ActionSpace::solve`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

/// A family of feasible super arms.
#[derive(Debug, Clone)]
pub enum ActionSpace {
    /// Explicit list of actions over `n` arms.
    Enumerated { n: usize, actions: Vec<Action> },
    /// All subsets of size exactly `m`.
    MSets { n: usize, m: usize },
    /// The `n / m` consecutive blocks `{km, ..., km + m - 1}`.
    Partition { n: usize, m: usize },
    /// Source-to-target paths; arms are arcs.
    Path(PathSpace),
    /// Perfect matchings of `K_{q,q}`; edge `(r, c)` is arm `r * q + c`.
    Matching { q: usize },
}

impl ActionSpace {
    pub fn enumerated(n: usize, actions: Vec<Action>) -> Result<Self> {
        if actions.is_empty() {
            return Err(CmabError::Precondition(
                "enumerated action space is empty".into(),
            ));
        }
        if let Some(a) = actions
            .iter()
            .find(|a| a.arms().last().is_some_and(|&i| i >= n))
        {
            return Err(CmabError::Structural(format!(
                "action {:?} exceeds n = {n}",
                a.arms()
            )));
        }
        Ok(ActionSpace::Enumerated { n, actions })
    }

    pub fn msets(n: usize, m: usize) -> Result<Self> {
        if m == 0 || m > n {
            return Err(CmabError::Precondition(format!(
                "m-sets need 0 < m <= n (n={n}, m={m})"
            )));
        }
        Ok(ActionSpace::MSets { n, m })
    }

    pub fn partition(n: usize, m: usize) -> Result<Self> {
        if m == 0 || !n.is_multiple_of(m) {
            return Err(CmabError::Precondition(format!(
                "partition needs m | n (n={n}, m={m})"
            )));
        }
        Ok(ActionSpace::Partition { n, m })
    }

    pub fn matching(q: usize) -> Result<Self> {
        if q == 0 {
            return Err(CmabError::Precondition("matching needs q >= 1".into()));
        }
        Ok(ActionSpace::Matching { q })
    }

    /// Number of base arms.
    pub fn n(&self) -> usize {
        match self {
            ActionSpace::Enumerated { n, .. }
            | ActionSpace::MSets { n, .. }
            | ActionSpace::Partition { n, .. } => *n,
            ActionSpace::Path(p) => p.graph().arcs().len(),
            ActionSpace::Matching { q } => q * q,
        }
    }

    pub fn is_path(&self) -> bool {
        matches!(self, ActionSpace::Path(_))
    }

    /// `Oracle(w)`: an action maximizing `sum_{i in A} w_i`.
    pub fn oracle(&self, w: &[f64]) -> Result<Action> {
        self.solve(w, Sense::Maximize)
    }

    /// Optimizes the linear objective in the given sense.
    ///
    /// Path spaces only accept weights that make the problem a shortest
    /// path: non-positive when maximizing, non-negative when minimizing.
    pub fn solve(&self, w: &[f64], sense: Sense) -> Result<Action> {
        let n = self.n();
        if w.len() != n {
            return Err(CmabError::Structural(format!(
                "weight vector has length {}, expected {n}",
                w.len()
            )));
        }
        if let Some(i) = w.iter().position(|x| x.is_nan()) {
            return Err(CmabError::Domain(format!("weight {i} is NaN")));
        }
        if let ActionSpace::Path(p) = self {
            return p.shortest(w, sense);
        }
        let owned;
        let w = match sense {
            Sense::Maximize => w,
            Sense::Minimize => {
                owned = w.iter().map(|x| -x).collect::<Vec<_>>();
                &owned[..]
            }
        };
        Ok(match self {
            ActionSpace::Enumerated { actions, .. } => best_of(actions.iter(), w).clone(),
            ActionSpace::MSets { n, m } => {
                let mut idx: Vec<usize> = (0..*n).collect();
                // Stable sort: equal weights keep ascending index order.
                idx.sort_by(|&a, &b| w[b].total_cmp(&w[a]));
                idx.truncate(*m);
                idx.sort_unstable();
                Action::from_sorted(idx)
            }
            ActionSpace::Partition { n, m } => {
                let blocks = n / m;
                let mut best = 0;
                let mut best_v = f64::NEG_INFINITY;
                for k in 0..blocks {
                    let v: f64 = w[k * m..(k + 1) * m].iter().sum();
                    if v > best_v {
                        best_v = v;
                        best = k;
                    }
                }
                Action::from_sorted((best * m..(best + 1) * m).collect())
            }
            ActionSpace::Matching { q } => {
                let cols = max_weight_matching(*q, w);
                Action::from_sorted(cols.iter().enumerate().map(|(r, &c)| r * q + c).collect())
            }
            ActionSpace::Path(_) => unreachable!(),
        })
    }

    /// Every action of the space, duplicate-free, in lexicographic order of
    /// the sorted arm lists (path spaces: depth-first order).
    pub fn enumerate(&self) -> Result<Vec<Action>> {
        self.enumerate_with_cap(DEFAULT_ENUMERATION_CAP)
    }

    pub fn enumerate_with_cap(&self, cap: usize) -> Result<Vec<Action>> {
        let over = |what: &str| CmabError::Capacity {
            what: what.to_string(),
            cap,
        };
        match self {
            ActionSpace::Enumerated { actions, .. } => {
                let mut out = actions.clone();
                out.sort();
                out.dedup();
                if out.len() > cap {
                    return Err(over("enumerated action list"));
                }
                Ok(out)
            }
            ActionSpace::MSets { n, m } => {
                if binomial(*n, *m).is_none_or(|c| c > cap as u128) {
                    return Err(over("m-set family"));
                }
                Ok(combinations(*n, *m)
                    .into_iter()
                    .map(Action::from_sorted)
                    .collect())
            }
            ActionSpace::Partition { n, m } => Ok((0..n / m)
                .map(|k| Action::from_sorted((k * m..(k + 1) * m).collect()))
                .collect()),
            ActionSpace::Matching { q } => {
                if *q > MAX_ENUMERABLE_MATCHING || factorial(*q) > cap {
                    return Err(over("perfect matching family"));
                }
                Ok(permutations(*q)
                    .into_iter()
                    .map(|p| {
                        Action::from_sorted(p.iter().enumerate().map(|(r, &c)| r * q + c).collect())
                    })
                    .collect())
            }
            ActionSpace::Path(p) => p.simple_paths(cap),
        }
    }

    /// A short list of actions whose union covers every arm.
    pub fn initial_cover(&self) -> Result<Vec<Action>> {
        match self {
            ActionSpace::MSets { n, m } => {
                let k = n.div_ceil(*m);
                Ok((0..k)
                    .map(|b| {
                        let start = (b * m).min(n - m);
                        Action::from_sorted((start..start + m).collect())
                    })
                    .collect())
            }
            ActionSpace::Partition { .. } => self.enumerate(),
            ActionSpace::Matching { q } => Ok((0..*q)
                .map(|k| {
                    let mut arms: Vec<usize> = (0..*q).map(|r| r * q + (r + k) % q).collect();
                    arms.sort_unstable();
                    Action::from_sorted(arms)
                })
                .collect()),
            ActionSpace::Enumerated { .. } | ActionSpace::Path(_) => Err(CmabError::Capability(
                "initial cover is only built for m-set, partition and matching spaces".into(),
            )),
        }
    }
}

/// Maximum of `w` over `actions`, first (lexicographically smallest) on ties.
pub(crate) fn best_of<'a>(actions: impl IntoIterator<Item = &'a Action>, w: &[f64]) -> &'a Action {
    let mut best: Option<(&Action, f64)> = None;
    for a in actions {
        let v = a.value(w);
        match best {
            Some((b, bv)) if v < bv || (v == bv && b <= a) => {}
            _ => best = Some((a, v)),
        }
    }
    best.expect("non-empty action list").0
}

fn binomial(n: usize, k: usize) -> Option<u128> {
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(c)
}

fn factorial(q: usize) -> usize {
    (1..=q).product()
}

fn combinations(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..m).collect();
    loop {
        out.push(cur.clone());
        // Rightmost position that can still advance.
        let Some(i) = (0..m).rev().find(|&i| cur[i] < n - m + i) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..m {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Permutations of `0..q` in lexicographic order.
fn permutations(q: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(factorial(q));
    let mut p: Vec<usize> = (0..q).collect();
    loop {
        out.push(p.clone());
        let Some(i) = (0..q.saturating_sub(1)).rev().find(|&i| p[i] < p[i + 1]) else {
            return out;
        };
        let j = (i + 1..q).rev().find(|&j| p[j] > p[i]).unwrap();
        p.swap(i, j);
        p[i + 1..].reverse();
    }
}
