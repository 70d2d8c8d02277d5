use serde::Serialize;

use super::InteractionGraph;
use crate::error::{Error, Result};
use crate::poset::VertexSet;

/// Vertex cap above which the exhaustive meet-closure check is skipped.
pub const EXHAUSTIVE_CHECK_LIMIT: u32 = 12;

/// Findings are truncated after this many induced cycles.
const MAX_REPORTED_CYCLES: usize = 1000;

/// An induced subgraph that prevents conn[G] from being closed under
/// intersection.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ForbiddenSubgraph {
    /// A chordless cycle with at least four vertices, listed in cycle order.
    ChordlessCycle { cycle: Vec<u32> },
    /// A four-cycle with exactly one chord; `chord` joins the two
    /// degree-three vertices.
    Diamond { vertices: [u32; 4], chord: (u32, u32) },
}

impl ForbiddenSubgraph {
    pub fn vertex_set(&self) -> VertexSet {
        match self {
            ForbiddenSubgraph::ChordlessCycle { cycle } => cycle.iter().copied().collect(),
            ForbiddenSubgraph::Diamond { vertices, .. } => vertices.iter().copied().collect(),
        }
    }

    /// Two connected sets of this subgraph whose intersection is disconnected.
    pub fn witness(&self) -> (VertexSet, VertexSet) {
        match self {
            ForbiddenSubgraph::ChordlessCycle { cycle } => {
                // Two arcs sharing only the endpoints cycle[0] and cycle[2].
                let first: VertexSet = cycle[..3].iter().copied().collect();
                let mut second: Vec<u32> = cycle[2..].to_vec();
                second.push(cycle[0]);
                (first, VertexSet::new(second))
            }
            ForbiddenSubgraph::Diamond { vertices, chord } => {
                let others: Vec<u32> = vertices.iter().copied().filter(|v| *v != chord.0 && *v != chord.1).collect();
                (
                    VertexSet::new(vec![others[0], chord.0, others[1]]),
                    VertexSet::new(vec![others[0], chord.1, others[1]]),
                )
            }
        }
    }
}

/// Outcome of checking whether conn[G] is a meet subsemilattice of B_M.
#[derive(Clone, Debug, Serialize)]
pub struct ConsistencyReport {
    pub vertex_count: u32,
    pub findings: Vec<ForbiddenSubgraph>,
    /// Set when the findings list was cut short.
    pub truncated: bool,
    /// Verdict from the forbidden-subgraph characterization.
    pub consistent: bool,
    /// Result of the exhaustive intersection check, when it was run.
    pub exhaustive_consistent: Option<bool>,
    /// A pair of connected sets with disconnected intersection, if any was found.
    pub witness: Option<(VertexSet, VertexSet)>,
}

impl ConsistencyReport {
    /// Whether the two verdicts agree (trivially true when only one ran).
    pub fn cross_validated(&self) -> bool {
        self.exhaustive_consistent.is_none_or(|e| e == self.consistent)
    }
}

/// Searches for chordless cycles of length ≥ 4 and diamonds, and for small
/// graphs confirms the verdict by checking every pair of connected sets.
pub fn diagnose_conn_consistency(g: &InteractionGraph) -> ConsistencyReport {
    let (mut findings, truncated) = chordless_cycles(g);
    findings.extend(diamonds(g));
    let consistent = findings.is_empty();
    let mut witness = findings.first().map(ForbiddenSubgraph::witness);
    let exhaustive_consistent = if g.vertex_count() <= EXHAUSTIVE_CHECK_LIMIT {
        let found = exhaustive_conn_meet_closure(g, EXHAUSTIVE_CHECK_LIMIT).expect("within limit");
        if witness.is_none() {
            witness = found.clone();
        }
        Some(found.is_none())
    } else {
        None
    };
    ConsistencyReport {
        vertex_count: g.vertex_count(),
        findings,
        truncated,
        consistent,
        exhaustive_consistent,
        witness,
    }
}

/// Brute force: the first pair of connected sets whose intersection is not
/// connected, or `None` when conn[G] is closed under intersection.
pub fn exhaustive_conn_meet_closure(g: &InteractionGraph, limit: u32) -> Result<Option<(VertexSet, VertexSet)>> {
    let n = g.vertex_count();
    if n > limit {
        return Err(Error::LimitExceeded(format!("exhaustive check over {n} vertices (limit {limit})")));
    }
    let connected: Vec<u64> = (1u64..1 << n)
        .filter(|&m| g.is_connected_subset(&VertexSet::from_mask(m)).expect("in range"))
        .collect();
    let is_connected = |m: u64| g.is_connected_subset(&VertexSet::from_mask(m)).expect("in range");
    for (a, &x) in connected.iter().enumerate() {
        for &y in &connected[a + 1..] {
            let meet = x & y;
            if meet.count_ones() >= 2 && !is_connected(meet) {
                return Ok(Some((VertexSet::from_mask(x), VertexSet::from_mask(y))));
            }
        }
    }
    Ok(None)
}

/// Every induced cycle with at least four vertices, each reported once with
/// its smallest vertex first and its second vertex smaller than its last.
fn chordless_cycles(g: &InteractionGraph) -> (Vec<ForbiddenSubgraph>, bool) {
    let mut out = Vec::new();
    let n = g.vertex_count();
    for s in 0..n {
        let mut path = vec![s];
        if extend(g, s, &mut path, &mut out) {
            return (out, true);
        }
    }
    (out, false)
}

/// Grows induced paths from `path[0]` through larger vertices. Returns true
/// when the reporting cap is hit.
fn extend(g: &InteractionGraph, s: u32, path: &mut Vec<u32>, out: &mut Vec<ForbiddenSubgraph>) -> bool {
    let last = *path.last().expect("nonempty");
    for &w in g.neighbors(last) {
        if w <= s || path.contains(&w) {
            continue;
        }
        // w may touch only `last` among interior vertices; touching the start
        // closes a cycle.
        let interior = if path.len() >= 2 { &path[1..path.len() - 1] } else { &[][..] };
        let interior_chord = interior.iter().any(|&x| g.has_edge(x, w));
        if interior_chord {
            continue;
        }
        let closes = path.len() >= 2 && g.has_edge(s, w);
        if closes {
            if path.len() >= 3 && path[1] < w {
                let mut cycle = path.clone();
                cycle.push(w);
                out.push(ForbiddenSubgraph::ChordlessCycle { cycle });
                if out.len() >= MAX_REPORTED_CYCLES {
                    return true;
                }
            }
            continue;
        }
        path.push(w);
        let stop = extend(g, s, path, out);
        path.pop();
        if stop {
            return true;
        }
    }
    false
}

/// Edges `{a, b}` with two common neighbours that are not adjacent.
fn diamonds(g: &InteractionGraph) -> Vec<ForbiddenSubgraph> {
    let mut out = Vec::new();
    for (a, b) in g.edges() {
        let common: Vec<u32> = g.neighbors(a).intersection(g.neighbors(b)).copied().collect();
        for (k, &c) in common.iter().enumerate() {
            for &d in &common[k + 1..] {
                if !g.has_edge(c, d) {
                    let mut vertices = [a, b, c, d];
                    vertices.sort_unstable();
                    out.push(ForbiddenSubgraph::Diamond { vertices, chord: (a, b) });
                }
            }
        }
    }
    out
}
