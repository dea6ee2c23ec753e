//! Per-arm variance proxies `D_i` derived from a sub-Gaussian matrix.

use crate::error::{CmabError, Result};
use crate::numerics::Matrix;
use crate::oracles::ActionSpace;

/// A sub-Gaussian matrix (`C`, or `Gamma` in positive-part mode) with the
/// per-arm proxies it induces on an action space.
#[derive(Debug, Clone)]
pub struct SubGaussianSpec {
    pub matrix: Matrix,
    pub proxies: Vec<f64>,
    pub positive_part: bool,
}

impl SubGaussianSpec {
    pub fn new(matrix: Matrix, space: &ActionSpace, positive_part: bool) -> Result<Self> {
        let proxies = subgaussian_proxy(&matrix, space, positive_part)?;
        Ok(SubGaussianSpec {
            matrix,
            proxies,
            positive_part,
        })
    }
}

fn weight(x: f64, positive_part: bool) -> f64 {
    if positive_part {
        x.max(0.0)
    } else {
        x.abs()
    }
}

/// `D_i = max_{A ∋ i} sum_{j in A} g(C_ij)` with `g = |.|`, or `g = 0 ∨ .`
/// when `positive_part` is set.
///
/// Uses one oracle call per arm: with `x` larger than the whole row mass,
/// `argmax_A sum_j (g(C_ij) 1{j != i} + x 1{j = i})` is forced to contain
/// `i` and maximizes the row sum among such actions. Path spaces cannot
/// take the positive weights this needs and fall back to enumeration.
/// Arms that belong to no action get `D_i = 0`.
pub fn subgaussian_proxy(c: &Matrix, space: &ActionSpace, positive_part: bool) -> Result<Vec<f64>> {
    let n = space.n();
    if c.n() != n {
        return Err(CmabError::Structural(format!(
            "matrix is {0}x{0}, expected {n}x{n}",
            c.n()
        )));
    }
    if !c.is_symmetric(1e-12) {
        return Err(CmabError::Precondition(
            "sub-Gaussian matrix must be symmetric".into(),
        ));
    }
    if space.is_path() {
        return proxy_by_enumeration(c, &space.enumerate()?, positive_part);
    }
    let mut d = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let row = c.row(i);
        let x = 1.0 + row.iter().map(|&v| weight(v, positive_part)).sum::<f64>();
        for j in 0..n {
            w[j] = if j == i {
                x
            } else {
                weight(row[j], positive_part)
            };
        }
        let a = space.oracle(&w)?;
        if a.contains(i) {
            d[i] = a
                .arms()
                .iter()
                .map(|&j| weight(row[j], positive_part))
                .sum();
        }
    }
    Ok(d)
}

/// Direct maximum over a list of actions.
pub fn proxy_by_enumeration(
    c: &Matrix,
    actions: &[crate::model::Action],
    positive_part: bool,
) -> Result<Vec<f64>> {
    let n = c.n();
    let mut d = vec![0.0f64; n];
    for a in actions {
        if a.arms().last().is_some_and(|&i| i >= n) {
            return Err(CmabError::Structural("action exceeds matrix size".into()));
        }
        for &i in a.arms() {
            let row = c.row(i);
            let s: f64 = a
                .arms()
                .iter()
                .map(|&j| weight(row[j], positive_part))
                .sum();
            d[i] = d[i].max(s);
        }
    }
    Ok(d)
}

/// `D_i = kappa_i^2 m` for arbitrarily dependent `kappa_i^2`-sub-Gaussian arms.
pub fn worst_case_proxy(kappa_sq: &[f64], m: usize) -> Vec<f64> {
    kappa_sq.iter().map(|k| k * m as f64).collect()
}
