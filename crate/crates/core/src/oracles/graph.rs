//! Directed multigraphs, the shortest-path oracle and the road-like
//! instance generator.

use std::path::Path;

use crate::error::{CmabError, Result};
use crate::model::Action;
use crate::numerics::{stream_rng, uniform};

use super::Sense;

/// Directed multigraph; arc `k` is arm `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    nodes: usize,
    arcs: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(nodes: usize, arcs: Vec<(usize, usize)>) -> Result<Self> {
        if let Some(&(a, b)) = arcs.iter().find(|&&(a, b)| a >= nodes || b >= nodes) {
            return Err(CmabError::Structural(format!(
                "arc {a} -> {b} outside {nodes} nodes"
            )));
        }
        Ok(Graph { nodes, arcs })
    }

    /// Parses the edge-list format: one `tail head` pair of non-negative
    /// integers per line. Blank lines and `#` comments are skipped; the arm
    /// index is the position among arc lines.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut arcs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace().map(str::parse::<usize>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(a)), Some(Ok(b)), None) => arcs.push((a, b)),
                _ => {
                    return Err(CmabError::Config(format!(
                        "edge list line {}: expected `tail head`, got `{line}`",
                        lineno + 1
                    )))
                }
            }
        }
        let nodes = arcs.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0);
        Graph::new(nodes, arcs)
    }

    pub fn load_edge_list(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CmabError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Graph::parse_edge_list(&text)
    }

    /// Strongly connected, road-like random graph: `nodes` points uniform in
    /// the unit square, the Euclidean minimum spanning tree, then the
    /// shortest remaining segments, each segment used in both directions.
    /// `arcs` must be even and at least `2 (nodes - 1)`.
    pub fn road_like(nodes: usize, arcs: usize, seed: u64) -> Result<Self> {
        let edges = arcs / 2;
        if !arcs.is_multiple_of(2) || nodes < 2 || edges < nodes - 1 || edges > nodes * (nodes - 1) / 2 {
            return Err(CmabError::Precondition(format!(
                "cannot build a two-way graph with {nodes} nodes and {arcs} arcs"
            )));
        }
        let mut rng = stream_rng(seed, &[0x0067_7261_7068]);
        let pts: Vec<(f64, f64)> = (0..nodes)
            .map(|_| (uniform(&mut rng, 0.0, 1.0), uniform(&mut rng, 0.0, 1.0)))
            .collect();
        let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(nodes * (nodes - 1) / 2);
        for a in 0..nodes {
            for b in a + 1..nodes {
                let d = (pts[a].0 - pts[b].0).hypot(pts[a].1 - pts[b].1);
                pairs.push((d, a, b));
            }
        }
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then((x.1, x.2).cmp(&(y.1, y.2))));

        let mut parent: Vec<usize> = (0..nodes).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut chosen = vec![false; pairs.len()];
        let mut count = 0;
        for (k, &(_, a, b)) in pairs.iter().enumerate() {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra] = rb;
                chosen[k] = true;
                count += 1;
            }
        }
        for c in chosen.iter_mut() {
            if count == edges {
                break;
            }
            if !*c {
                *c = true;
                count += 1;
            }
        }
        let mut segs: Vec<(usize, usize)> = pairs
            .iter()
            .zip(&chosen)
            .filter(|(_, &c)| c)
            .map(|(&(_, a, b), _)| (a, b))
            .collect();
        segs.sort_unstable();
        let arcs = segs.iter().flat_map(|&(a, b)| [(a, b), (b, a)]).collect();
        Graph::new(nodes, arcs)
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn arcs(&self) -> &[(usize, usize)] {
        &self.arcs
    }

    /// Hop distances from `from` (`usize::MAX` when unreachable).
    pub fn hops_from(&self, from: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.nodes];
        let mut queue = std::collections::VecDeque::from([from]);
        dist[from] = 0;
        while let Some(x) = queue.pop_front() {
            for &(a, b) in &self.arcs {
                if a == x && dist[b] == usize::MAX {
                    dist[b] = dist[x] + 1;
                    queue.push_back(b);
                }
            }
        }
        dist
    }

    /// Reachable node with the most hops from `from`, smallest index on ties.
    pub fn farthest_from(&self, from: usize) -> usize {
        let hops = self.hops_from(from);
        let mut best = from;
        for (v, &h) in hops.iter().enumerate() {
            if h != usize::MAX && h > hops[best] {
                best = v;
            }
        }
        best
    }
}

/// All source-to-target paths of a graph.
#[derive(Debug, Clone)]
pub struct PathSpace {
    graph: Graph,
    source: usize,
    target: usize,
    out_arcs: Vec<Vec<usize>>,
}

impl PathSpace {
    pub fn new(graph: Graph, source: usize, target: usize) -> Result<Self> {
        let nodes = graph.nodes();
        if source >= nodes || target >= nodes {
            return Err(CmabError::Structural(format!(
                "source {source} / target {target} outside {nodes} nodes"
            )));
        }
        if source == target {
            return Err(CmabError::Precondition(
                "source and target must differ".into(),
            ));
        }
        if graph.hops_from(source)[target] == usize::MAX {
            return Err(CmabError::Infeasible(format!(
                "no path from {source} to {target}"
            )));
        }
        let mut out_arcs = vec![Vec::new(); nodes];
        for (k, &(a, _)) in graph.arcs().iter().enumerate() {
            out_arcs[a].push(k);
        }
        Ok(PathSpace {
            graph,
            source,
            target,
            out_arcs,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn target(&self) -> usize {
        self.target
    }

    /// Dijkstra on arc costs `-w` (maximize) or `w` (minimize).
    pub(super) fn shortest(&self, w: &[f64], sense: Sense) -> Result<Action> {
        let cost: Vec<f64> = match sense {
            Sense::Maximize => w.iter().map(|x| -x).collect(),
            Sense::Minimize => w.to_vec(),
        };
        if let Some(i) = cost.iter().position(|&c| c < 0.0) {
            return Err(CmabError::Precondition(format!(
                "arc {i} has weight {} of the wrong sign for a shortest-path oracle",
                w[i]
            )));
        }
        let nodes = self.graph.nodes();
        let mut dist = vec![f64::INFINITY; nodes];
        let mut pred: Vec<Option<usize>> = vec![None; nodes];
        let mut done = vec![false; nodes];
        dist[self.source] = 0.0;
        loop {
            let mut x = None;
            for v in 0..nodes {
                if !done[v] && dist[v].is_finite() && x.is_none_or(|u: usize| dist[v] < dist[u]) {
                    x = Some(v);
                }
            }
            let Some(x) = x else { break };
            if x == self.target {
                break;
            }
            done[x] = true;
            for &k in &self.out_arcs[x] {
                let y = self.graph.arcs[k].1;
                if done[y] {
                    continue;
                }
                let nd = dist[x] + cost[k];
                if nd < dist[y] || (nd == dist[y] && pred[y].is_some_and(|p| k < p)) {
                    dist[y] = nd;
                    pred[y] = Some(k);
                }
            }
        }
        if !dist[self.target].is_finite() {
            return Err(CmabError::Infeasible(format!(
                "no path from {} to {}",
                self.source, self.target
            )));
        }
        let mut arms = Vec::new();
        let mut v = self.target;
        while v != self.source {
            let k = pred[v].expect("reachable node has a predecessor");
            arms.push(k);
            v = self.graph.arcs[k].0;
        }
        arms.sort_unstable();
        Ok(Action::from_sorted(arms))
    }

    /// Every simple source-to-target path.
    pub(super) fn simple_paths(&self, cap: usize) -> Result<Vec<Action>> {
        let mut out = Vec::new();
        let mut on_path = vec![false; self.graph.nodes()];
        let mut stack = Vec::new();
        on_path[self.source] = true;
        self.walk(self.source, &mut on_path, &mut stack, &mut out, cap)?;
        out.sort();
        Ok(out)
    }

    fn walk(
        &self,
        x: usize,
        on_path: &mut [bool],
        stack: &mut Vec<usize>,
        out: &mut Vec<Action>,
        cap: usize,
    ) -> Result<()> {
        for &k in &self.out_arcs[x] {
            let y = self.graph.arcs[k].1;
            if on_path[y] {
                continue;
            }
            stack.push(k);
            if y == self.target {
                if out.len() == cap {
                    return Err(CmabError::Capacity {
                        what: "simple path family".into(),
                        cap,
                    });
                }
                let mut arms = stack.clone();
                arms.sort_unstable();
                out.push(Action::from_sorted(arms));
            } else {
                on_path[y] = true;
                self.walk(y, on_path, stack, out, cap)?;
                on_path[y] = false;
            }
            stack.pop();
        }
        Ok(())
    }
}
