use parking_lot::RwLock;
use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use super::convex::{convex_covers_down, convex_covers_up, is_convex_subset};
use super::{InteractionGraph, ShortestPathOracle};
use crate::error::{Error, Result};
use crate::poset::VertexSet;

/// Cap on the number of elements produced by whole-poset enumeration.
const MAX_ENUMERATED_ELEMENTS: usize = 1 << 20;

/// Which induced-subgraph family a [`GraphPoset`] ranges over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphFamily {
    /// conn[G]: vertex sets inducing connected subgraphs.
    Connected,
    /// M_g[G]: geodesically convex vertex sets.
    Convex,
    /// comp_R[G]: cliques with at most `max_rank + 1` vertices.
    Simplex { max_rank: i32 },
}

impl GraphFamily {
    pub fn name(&self) -> String {
        match self {
            GraphFamily::Connected => "conn[G]".into(),
            GraphFamily::Convex => "M_g[G]".into(),
            GraphFamily::Simplex { max_rank } => format!("comp_{max_rank}[G]"),
        }
    }
}

/// The poset of vertex sets of one [`GraphFamily`], ordered by inclusion,
/// with ∅ as least element.
///
/// Sets whose vertices are not mutually reachable are never members.
pub struct GraphPoset {
    graph: Arc<InteractionGraph>,
    oracle: Arc<ShortestPathOracle>,
    family: GraphFamily,
    moebius_memo: RwLock<HashMap<VertexSet, Arc<Vec<(VertexSet, i64)>>>>,
}

impl fmt::Debug for GraphPoset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GraphPoset")
            .field("family", &self.family)
            .field("vertices", &self.graph.vertex_count())
            .field("edges", &self.graph.edge_count())
            .finish()
    }
}

impl GraphPoset {
    pub fn new(graph: InteractionGraph, family: GraphFamily) -> Result<Self> {
        if let GraphFamily::Simplex { max_rank } = family {
            if max_rank < -1 {
                return Err(Error::domain(format!("simplex rank must be at least -1, got {max_rank}")));
            }
        }
        let oracle = ShortestPathOracle::new(&graph);
        Ok(GraphPoset {
            graph: Arc::new(graph),
            oracle: Arc::new(oracle),
            family,
            moebius_memo: RwLock::new(HashMap::new()),
        })
    }

    pub fn connected(graph: InteractionGraph) -> Self {
        Self::new(graph, GraphFamily::Connected).expect("valid family")
    }

    pub fn convex(graph: InteractionGraph) -> Self {
        Self::new(graph, GraphFamily::Convex).expect("valid family")
    }

    pub fn simplex(graph: InteractionGraph, max_rank: i32) -> Result<Self> {
        Self::new(graph, GraphFamily::Simplex { max_rank })
    }

    pub fn graph(&self) -> &InteractionGraph {
        &self.graph
    }

    pub fn oracle(&self) -> &ShortestPathOracle {
        &self.oracle
    }

    pub fn family(&self) -> GraphFamily {
        self.family
    }

    pub fn contains(&self, u: &VertexSet) -> bool {
        if self.graph.check_subset(u).is_err() || !self.oracle.mutually_reachable(u) {
            return false;
        }
        match self.family {
            GraphFamily::Connected => self.graph.is_connected_subset(u).unwrap_or(false),
            GraphFamily::Convex => is_convex_subset(&self.oracle, u).unwrap_or(false),
            GraphFamily::Simplex { max_rank } => {
                (u.len() as i64) <= max_rank as i64 + 1 && self.graph.is_clique(u).unwrap_or(false)
            }
        }
    }

    fn check(&self, u: &VertexSet) -> Result<()> {
        if self.contains(u) {
            Ok(())
        } else {
            Err(Error::domain(format!("{u} is not an element of {}", self.family.name())))
        }
    }

    fn singletons(&self) -> Vec<VertexSet> {
        (0..self.graph.vertex_count()).map(VertexSet::singleton).collect()
    }

    pub fn covers_up(&self, u: &VertexSet) -> Result<Vec<VertexSet>> {
        self.check(u)?;
        Ok(match self.family {
            GraphFamily::Connected => {
                if u.is_empty() {
                    self.singletons()
                } else {
                    let frontier: BTreeSet<u32> = u
                        .iter()
                        .flat_map(|v| self.graph.neighbors(v).iter().copied())
                        .filter(|w| !u.contains(*w))
                        .collect();
                    frontier.into_iter().map(|w| u.with(w)).collect()
                }
            }
            GraphFamily::Convex => convex_covers_up(&self.oracle, u)?,
            GraphFamily::Simplex { max_rank } => {
                if u.len() as i64 >= max_rank as i64 + 1 {
                    vec![]
                } else if u.is_empty() {
                    self.singletons()
                } else {
                    (0..self.graph.vertex_count())
                        .filter(|&w| !u.contains(w) && u.iter().all(|v| self.graph.has_edge(v, w)))
                        .map(|w| u.with(w))
                        .collect()
                }
            }
        })
    }

    pub fn covers_down(&self, u: &VertexSet) -> Result<Vec<VertexSet>> {
        self.check(u)?;
        Ok(match self.family {
            GraphFamily::Connected => {
                let mut out = Vec::new();
                for v in u.iter() {
                    let w = u.without(v);
                    if self.graph.is_connected_subset(&w)? {
                        out.push(w);
                    }
                }
                out
            }
            GraphFamily::Convex => convex_covers_down(&self.oracle, u)?,
            GraphFamily::Simplex { .. } => u.iter().map(|v| u.without(v)).collect(),
        })
    }

    /// All `(s, μ(s, p))` with nonzero value, sorted by `s`. Memoized per `p`.
    pub fn moebius_vector(&self, p: &VertexSet) -> Result<Arc<Vec<(VertexSet, i64)>>> {
        self.check(p)?;
        if let Some(v) = self.moebius_memo.read().get(p) {
            return Ok(Arc::clone(v));
        }
        let vector = Arc::new(self.compute_moebius_vector(p)?);
        self.moebius_memo.write().insert(p.clone(), Arc::clone(&vector));
        Ok(vector)
    }

    fn compute_moebius_vector(&self, p: &VertexSet) -> Result<Vec<(VertexSet, i64)>> {
        if let GraphFamily::Simplex { .. } = self.family {
            // Every subset of a clique is a clique, so [∅, p] is a Boolean algebra.
            return Ok(p
                .subsets()
                .map(|w| {
                    let sign = if (p.len() - w.len()) % 2 == 0 { 1 } else { -1 };
                    (w, sign)
                })
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect());
        }
        let mut interval = self.down_set(p)?;
        interval.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        // Dual recursion from the top: μ(s, p) = −Σ_{s < t ≤ p} μ(t, p).
        let mut mu: Vec<i64> = Vec::with_capacity(interval.len());
        for (k, s) in interval.iter().enumerate() {
            let value = if k == 0 {
                1
            } else {
                let mut acc = 0i64;
                for (t, m) in interval[..k].iter().zip(&mu) {
                    if *m != 0 && s.is_strict_subset(t) {
                        acc = acc.checked_add(*m).ok_or_else(|| Error::Overflow(format!("μ(·, {p})")))?;
                    }
                }
                -acc
            };
            mu.push(value);
        }
        let mut out: Vec<(VertexSet, i64)> = interval.into_iter().zip(mu).filter(|(_, m)| *m != 0).collect();
        out.sort();
        Ok(out)
    }

    /// Every member below or equal to `p`.
    fn down_set(&self, p: &VertexSet) -> Result<Vec<VertexSet>> {
        let mut seen = BTreeSet::from([p.clone()]);
        let mut queue = VecDeque::from([p.clone()]);
        while let Some(u) = queue.pop_front() {
            for w in self.covers_down(&u)? {
                if seen.insert(w.clone()) {
                    queue.push_back(w);
                }
            }
        }
        Ok(seen.into_iter().collect())
    }

    /// Every member of the poset, sorted by size then lexicographically.
    pub fn elements(&self) -> Result<Vec<VertexSet>> {
        let mut seen = BTreeSet::from([VertexSet::empty()]);
        let mut queue = VecDeque::from([VertexSet::empty()]);
        while let Some(u) = queue.pop_front() {
            for w in self.covers_up(&u)? {
                if seen.insert(w.clone()) {
                    if seen.len() > MAX_ENUMERATED_ELEMENTS {
                        return Err(Error::LimitExceeded(format!(
                            "{} has more than {MAX_ENUMERATED_ELEMENTS} elements",
                            self.family.name()
                        )));
                    }
                    queue.push_back(w);
                }
            }
        }
        let mut out: Vec<VertexSet> = seen.into_iter().collect();
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        Ok(out)
    }
}

/// comp_R[G]: every clique with at most `R + 1` vertices, ∅ included.
pub fn simplex_ideal(graph: &InteractionGraph, max_rank: i32) -> Result<Vec<VertexSet>> {
    GraphPoset::simplex(graph.clone(), max_rank)?.elements()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(labels: &[u32]) -> VertexSet {
        VertexSet::from_one_based(labels)
    }

    #[test]
    fn conn_covers_on_hexane() {
        let p = GraphPoset::connected(InteractionGraph::path(6));
        assert_eq!(p.covers_up(&s(&[2, 3])).unwrap(), vec![s(&[1, 2, 3]), s(&[2, 3, 4])]);
        assert_eq!(p.covers_down(&s(&[2, 3])).unwrap(), vec![s(&[3]), s(&[2])]);
        assert_eq!(p.covers_down(&s(&[4])).unwrap(), vec![VertexSet::empty()]);
        assert_eq!(p.covers_up(&VertexSet::empty()).unwrap().len(), 6);
        assert!(p.covers_up(&s(&[1, 3])).is_err());
    }

    #[test]
    fn conn_covers_on_star() {
        // centre 1, leaves 2, 3, 4
        let g = InteractionGraph::from_one_based(4, &[(1, 2), (1, 3), (1, 4)]).unwrap();
        let p = GraphPoset::connected(g);
        let down = p.covers_down(&s(&[1, 2, 3])).unwrap();
        assert!(!down.contains(&s(&[2, 3])));
        assert_eq!(down.len(), 2);
    }

    #[test]
    fn simplex_ideals() {
        let path = InteractionGraph::path(4);
        let r1 = simplex_ideal(&path, 1).unwrap();
        assert_eq!(r1.len(), 1 + 4 + 3);
        assert_eq!(simplex_ideal(&path, 2).unwrap(), r1);
        assert_eq!(simplex_ideal(&InteractionGraph::complete(3), 2).unwrap().len(), 8);
        assert_eq!(simplex_ideal(&path, -1).unwrap(), vec![VertexSet::empty()]);
        assert!(simplex_ideal(&path, -2).is_err());
    }

    #[test]
    fn moebius_on_conn_path_is_local() {
        // conn of a path is a lattice of intervals; μ(s, p) is nonzero only for
        // s obtained by trimming ends.
        let p = GraphPoset::connected(InteractionGraph::path(5));
        let v = p.moebius_vector(&s(&[2, 3, 4])).unwrap();
        let as_map: HashMap<VertexSet, i64> = v.iter().cloned().collect();
        assert_eq!(as_map[&s(&[2, 3, 4])], 1);
        assert_eq!(as_map[&s(&[2, 3])], -1);
        assert_eq!(as_map[&s(&[3, 4])], -1);
        assert_eq!(as_map[&s(&[3])], 1);
        assert_eq!(as_map.len(), 4);
        let single = p.moebius_vector(&s(&[1])).unwrap();
        assert_eq!(&single[..], &[(VertexSet::empty(), -1), (s(&[1]), 1)]);
    }

    #[test]
    fn benzene_convex_elements() {
        let p = GraphPoset::convex(InteractionGraph::cycle(6));
        let all = p.elements().unwrap();
        assert_eq!(all.len(), 20);
        let top = VertexSet::full(6);
        let v = p.moebius_vector(&top).unwrap();
        let total: i64 = v.iter().map(|(_, m)| m).sum();
        assert_eq!(total, 0);
    }

    #[test]
    fn disconnected_graph_excludes_spanning_sets() {
        let g = InteractionGraph::new(4, &[(0, 1), (2, 3)]).unwrap();
        let conn = GraphPoset::connected(g.clone());
        let convex = GraphPoset::convex(g);
        assert!(!conn.contains(&VertexSet::new(vec![1, 2])));
        assert!(!convex.contains(&VertexSet::new(vec![1, 2])));
        assert_eq!(conn.elements().unwrap().len(), 1 + 4 + 2);
        assert_eq!(convex.elements().unwrap().len(), 1 + 4 + 2);
    }
}
