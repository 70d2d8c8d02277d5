//! Interaction graphs and the induced-subgraph posets built on them.

mod convex;
mod diagnose;
mod poset;

pub use convex::{convex_covers_down, convex_covers_up, enumerate_convex_subsets, geodesic_hull, is_convex_subset};
pub use diagnose::{diagnose_conn_consistency, exhaustive_conn_meet_closure, ConsistencyReport, ForbiddenSubgraph};
pub use poset::{simplex_ideal, GraphFamily, GraphPoset};

use std::collections::{BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::poset::VertexSet;

/// Default vertex cap for powerset-based brute force.
pub const DEFAULT_ENUMERATION_LIMIT: u32 = 12;

/// Undirected simple graph on vertices `0..M`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InteractionGraph {
    adj: Vec<BTreeSet<u32>>,
}

impl InteractionGraph {
    /// Builds a graph from 0-based edges. Duplicate edges are merged.
    pub fn new(vertex_count: u32, edges: &[(u32, u32)]) -> Result<Self> {
        let mut adj = vec![BTreeSet::new(); vertex_count as usize];
        for &(i, j) in edges {
            if i >= vertex_count || j >= vertex_count {
                return Err(Error::domain(format!(
                    "edge ({},{}) references a vertex outside 1..{vertex_count}",
                    i + 1,
                    j + 1
                )));
            }
            if i == j {
                return Err(Error::domain(format!("self-loop at vertex {}", i + 1)));
            }
            adj[i as usize].insert(j);
            adj[j as usize].insert(i);
        }
        Ok(InteractionGraph { adj })
    }

    /// Builds a graph from 1-based edge labels.
    pub fn from_one_based(vertex_count: u32, edges: &[(u32, u32)]) -> Result<Self> {
        if edges.iter().any(|&(i, j)| i == 0 || j == 0) {
            return Err(Error::domain("vertex labels are 1-based"));
        }
        let zero: Vec<(u32, u32)> = edges.iter().map(|&(i, j)| (i - 1, j - 1)).collect();
        Self::new(vertex_count, &zero)
    }

    /// Path graph 1–2–…–n.
    pub fn path(n: u32) -> Self {
        let edges: Vec<(u32, u32)> = (1..n).map(|i| (i - 1, i)).collect();
        Self::new(n, &edges).expect("valid path")
    }

    /// Cycle graph 1–2–…–n–1.
    pub fn cycle(n: u32) -> Self {
        let mut edges: Vec<(u32, u32)> = (1..n).map(|i| (i - 1, i)).collect();
        if n > 2 {
            edges.push((n - 1, 0));
        }
        Self::new(n, &edges).expect("valid cycle")
    }

    pub fn complete(n: u32) -> Self {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                edges.push((i, j));
            }
        }
        Self::new(n, &edges).expect("valid complete graph")
    }

    /// Parses an edge list with one `i j` pair (1-based) per line.
    ///
    /// Blank lines and `#` comments are ignored. The vertex count is the
    /// largest label seen unless `vertex_count` is given.
    pub fn parse_edge_list(text: &str, vertex_count: Option<u32>) -> Result<Self> {
        let mut edges = Vec::new();
        let mut max_label = 0;
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let parse = |s: &str| {
                s.parse::<u32>().map_err(|e| Error::Parse { line: k + 1, msg: format!("{s:?}: {e}") })
            };
            if parts.len() != 2 {
                return Err(Error::Parse { line: k + 1, msg: "expected two vertex labels".into() });
            }
            let (i, j) = (parse(parts[0])?, parse(parts[1])?);
            if i == 0 || j == 0 {
                return Err(Error::Parse { line: k + 1, msg: "vertex labels are 1-based".into() });
            }
            max_label = max_label.max(i).max(j);
            edges.push((i - 1, j - 1));
        }
        let n = vertex_count.unwrap_or(max_label);
        Self::new(n, &edges)
    }

    pub fn vertex_count(&self) -> u32 {
        self.adj.len() as u32
    }

    /// Edges as sorted 0-based pairs `(i, j)` with `i < j`.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for (i, nbrs) in self.adj.iter().enumerate() {
            for &j in nbrs.range(i as u32 + 1..) {
                out.push((i as u32, j));
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: u32) -> &BTreeSet<u32> {
        &self.adj[v as usize]
    }

    pub fn has_edge(&self, i: u32, j: u32) -> bool {
        self.adj.get(i as usize).is_some_and(|n| n.contains(&j))
    }

    pub(crate) fn check_subset(&self, u: &VertexSet) -> Result<()> {
        match u.max() {
            Some(m) if m >= self.vertex_count() => Err(Error::domain(format!(
                "vertex {} outside a graph with {} vertices",
                m + 1,
                self.vertex_count()
            ))),
            _ => Ok(()),
        }
    }

    /// Whether `G[u]` is connected. The empty set counts as connected.
    pub fn is_connected_subset(&self, u: &VertexSet) -> Result<bool> {
        self.check_subset(u)?;
        let Some(start) = u.iter().next() else {
            return Ok(true);
        };
        let mut seen = BTreeSet::from([start]);
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for &w in self.neighbors(v) {
                if u.contains(w) && seen.insert(w) {
                    stack.push(w);
                }
            }
        }
        Ok(seen.len() == u.len())
    }

    /// Whether `G[u]` is a complete graph.
    pub fn is_clique(&self, u: &VertexSet) -> Result<bool> {
        self.check_subset(u)?;
        let vs = u.as_slice();
        Ok(vs.iter().enumerate().all(|(k, &i)| vs[k + 1..].iter().all(|&j| self.has_edge(i, j))))
    }

    /// Connected components as vertex sets, ordered by smallest member.
    pub fn components(&self) -> Vec<VertexSet> {
        let mut label = vec![usize::MAX; self.adj.len()];
        let mut out = Vec::new();
        for s in 0..self.adj.len() {
            if label[s] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![s as u32];
            label[s] = id;
            let mut stack = vec![s as u32];
            while let Some(v) = stack.pop() {
                for &w in self.neighbors(v) {
                    if label[w as usize] == usize::MAX {
                        label[w as usize] = id;
                        members.push(w);
                        stack.push(w);
                    }
                }
            }
            out.push(VertexSet::new(members));
        }
        out
    }

    /// The subgraph induced on `u`, relabelled to `0..|u|` in sorted order.
    pub fn induced(&self, u: &VertexSet) -> Result<InteractionGraph> {
        self.check_subset(u)?;
        let vs = u.as_slice();
        let mut edges = Vec::new();
        for (a, &i) in vs.iter().enumerate() {
            for (b, &j) in vs.iter().enumerate().skip(a + 1) {
                if self.has_edge(i, j) {
                    edges.push((a as u32, b as u32));
                }
            }
        }
        InteractionGraph::new(vs.len() as u32, &edges)
    }
}

/// Distance-thresholded graph: an edge joins `i` and `j` when
/// `‖Rᵢ − Rⱼ‖ ≤ r_cut`.
pub fn build_thresholded_graph(positions: &[[f64; 3]], r_cut: f64) -> Result<InteractionGraph> {
    if !(r_cut > 0.0) {
        return Err(Error::domain(format!("cutoff radius must be positive, got {r_cut}")));
    }
    let mut edges = Vec::new();
    for i in 0..positions.len() {
        for j in i + 1..positions.len() {
            let d2: f64 = (0..3).map(|k| (positions[i][k] - positions[j][k]).powi(2)).sum();
            if d2.sqrt() <= r_cut {
                edges.push((i as u32, j as u32));
            }
        }
    }
    InteractionGraph::new(positions.len() as u32, &edges)
}

/// All-pairs hop distances, `None` for unreachable pairs.
#[derive(Clone, Debug)]
pub struct ShortestPathOracle {
    dist: Vec<Vec<Option<u32>>>,
}

impl ShortestPathOracle {
    /// Breadth-first search from every vertex.
    pub fn new(g: &InteractionGraph) -> Self {
        let n = g.vertex_count() as usize;
        let mut dist = vec![vec![None; n]; n];
        for (s, row) in dist.iter_mut().enumerate() {
            row[s] = Some(0);
            let mut queue = VecDeque::from([s as u32]);
            while let Some(v) = queue.pop_front() {
                let dv = row[v as usize].expect("visited");
                for &w in g.neighbors(v) {
                    if row[w as usize].is_none() {
                        row[w as usize] = Some(dv + 1);
                        queue.push_back(w);
                    }
                }
            }
        }
        ShortestPathOracle { dist }
    }

    pub fn distance(&self, i: u32, j: u32) -> Option<u32> {
        self.dist[i as usize][j as usize]
    }

    pub fn vertex_count(&self) -> u32 {
        self.dist.len() as u32
    }

    /// Whether every pair in `u` is joined by some path.
    pub fn mutually_reachable(&self, u: &VertexSet) -> bool {
        match u.iter().next() {
            None => true,
            Some(first) => u.iter().all(|v| self.distance(first, v).is_some()),
        }
    }

    /// Whether `w` lies on some shortest `i`–`j` path.
    pub fn on_geodesic(&self, i: u32, w: u32, j: u32) -> bool {
        match (self.distance(i, w), self.distance(w, j), self.distance(i, j)) {
            (Some(a), Some(b), Some(c)) => a + b == c,
            _ => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn connected_subsets_of_hexane() {
        let g = InteractionGraph::path(6);
        assert!(g.is_connected_subset(&VertexSet::from_one_based(&[1, 2, 3])).unwrap());
        assert!(!g.is_connected_subset(&VertexSet::from_one_based(&[1, 3, 4])).unwrap());
        assert!(g.is_connected_subset(&VertexSet::empty()).unwrap());
        assert!(g.is_connected_subset(&VertexSet::from_one_based(&[7])).is_err());
    }

    #[test]
    fn thresholded_edges() {
        let g = build_thresholded_graph(&[[0.0; 3], [2.4, 0.0, 0.0]], 2.5).unwrap();
        assert_eq!(g.edges(), vec![(0, 1)]);
        let g = build_thresholded_graph(&[[0.0; 3], [2.6, 0.0, 0.0]], 2.5).unwrap();
        assert!(g.edges().is_empty());
        let g = build_thresholded_graph(&[[1.0, 2.0, 3.0]], 2.5).unwrap();
        assert_eq!(g.vertex_count(), 1);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn oracle_distances() {
        let g = InteractionGraph::cycle(6);
        let o = ShortestPathOracle::new(&g);
        assert_eq!(o.distance(0, 3), Some(3));
        assert_eq!(o.distance(0, 5), Some(1));
        assert!(o.on_geodesic(0, 1, 2));
        assert!(o.on_geodesic(0, 4, 3));
        let split = InteractionGraph::new(3, &[(0, 1)]).unwrap();
        let o = ShortestPathOracle::new(&split);
        assert_eq!(o.distance(0, 2), None);
        assert!(!o.mutually_reachable(&VertexSet::new(vec![0, 2])));
    }

    #[test]
    fn edge_list_parsing() {
        let g = InteractionGraph::parse_edge_list("# hexane\n1 2\n2 3\n\n3 4 # tail\n", Some(5)).unwrap();
        assert_eq!(g.vertex_count(), 5);
        assert_eq!(g.edge_count(), 3);
        assert!(InteractionGraph::parse_edge_list("1 x\n", None).is_err());
        assert!(InteractionGraph::parse_edge_list("0 1\n", None).is_err());
        assert!(InteractionGraph::parse_edge_list("1 1\n", None).is_err());
    }
}
