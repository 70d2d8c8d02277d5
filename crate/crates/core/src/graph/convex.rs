use std::collections::HashSet;

use super::ShortestPathOracle;
use crate::error::{Error, Result};
use crate::poset::VertexSet;

fn check(oracle: &ShortestPathOracle, u: &VertexSet) -> Result<()> {
    if let Some(m) = u.max() {
        if m >= oracle.vertex_count() {
            return Err(Error::domain(format!("vertex {} outside the graph", m + 1)));
        }
    }
    if !oracle.mutually_reachable(u) {
        return Err(Error::domain(format!("{u} spans vertices that are not mutually reachable")));
    }
    Ok(())
}

/// A vertex outside `s` lying on a shortest path between two members of `s`,
/// together with that pair.
fn escaping_pair(oracle: &ShortestPathOracle, s: &VertexSet) -> Option<(u32, u32)> {
    let vs = s.as_slice();
    for (a, &i) in vs.iter().enumerate() {
        for &j in &vs[a + 1..] {
            if oracle.distance(i, j).is_none_or(|d| d < 2) {
                continue;
            }
            if (0..oracle.vertex_count()).any(|w| !s.contains(w) && oracle.on_geodesic(i, w, j)) {
                return Some((i, j));
            }
        }
    }
    None
}

/// Smallest geodesically convex superset of `u`: every vertex on any
/// shortest path between two members is added until nothing changes.
pub fn geodesic_hull(oracle: &ShortestPathOracle, u: &VertexSet) -> Result<VertexSet> {
    check(oracle, u)?;
    let n = oracle.vertex_count();
    let mut current = u.clone();
    loop {
        let vs = current.as_slice();
        let mut added: Vec<u32> = Vec::new();
        for (a, &i) in vs.iter().enumerate() {
            for &j in &vs[a + 1..] {
                for w in 0..n {
                    if !current.contains(w) && oracle.on_geodesic(i, w, j) {
                        added.push(w);
                    }
                }
            }
        }
        if added.is_empty() {
            return Ok(current);
        }
        added.extend(current.iter());
        current = VertexSet::new(added);
    }
}

/// Whether `u` equals its geodesic hull. The empty set and singletons are convex.
pub fn is_convex_subset(oracle: &ShortestPathOracle, u: &VertexSet) -> Result<bool> {
    check(oracle, u)?;
    Ok(escaping_pair(oracle, u).is_none())
}

fn inclusion_minimal(mut sets: Vec<VertexSet>) -> Vec<VertexSet> {
    sets.sort();
    sets.dedup();
    let keep: Vec<bool> = sets
        .iter()
        .map(|s| !sets.iter().any(|t| t.is_strict_subset(s)))
        .collect();
    sets.into_iter().zip(keep).filter_map(|(s, k)| k.then_some(s)).collect()
}

fn inclusion_maximal(mut sets: Vec<VertexSet>) -> Vec<VertexSet> {
    sets.sort();
    sets.dedup();
    let keep: Vec<bool> = sets
        .iter()
        .map(|s| !sets.iter().any(|t| s.is_strict_subset(t)))
        .collect();
    sets.into_iter().zip(keep).filter_map(|(s, k)| k.then_some(s)).collect()
}

/// Upper covers of a convex set: the inclusion-minimal hulls of `u ∪ {v}`
/// over vertices `v` reachable from `u`.
pub fn convex_covers_up(oracle: &ShortestPathOracle, u: &VertexSet) -> Result<Vec<VertexSet>> {
    if !is_convex_subset(oracle, u)? {
        return Err(Error::domain(format!("{u} is not convex")));
    }
    let anchor = u.iter().next();
    let mut candidates = Vec::new();
    for v in 0..oracle.vertex_count() {
        if u.contains(v) {
            continue;
        }
        if let Some(a) = anchor {
            if oracle.distance(a, v).is_none() {
                continue;
            }
        }
        candidates.push(geodesic_hull(oracle, &u.with(v))?);
    }
    Ok(inclusion_minimal(candidates))
}

/// Lower covers of a convex set: its maximal convex strict subsets.
///
/// For each removed vertex the remainder is repaired by branching: while
/// some pair `i, j` has a shortest path leaving the candidate, any convex
/// subset must drop `i` or `j`, so both branches are explored.
pub fn convex_covers_down(oracle: &ShortestPathOracle, u: &VertexSet) -> Result<Vec<VertexSet>> {
    if !is_convex_subset(oracle, u)? {
        return Err(Error::domain(format!("{u} is not convex")));
    }
    let mut visited = HashSet::new();
    let mut found = Vec::new();
    for v in u.iter() {
        repair(oracle, u.without(v), &mut visited, &mut found);
    }
    Ok(inclusion_maximal(found))
}

fn repair(
    oracle: &ShortestPathOracle,
    s: VertexSet,
    visited: &mut HashSet<VertexSet>,
    found: &mut Vec<VertexSet>,
) {
    if !visited.insert(s.clone()) {
        return;
    }
    match escaping_pair(oracle, &s) {
        None => found.push(s),
        Some((i, j)) => {
            repair(oracle, s.without(i), visited, found);
            repair(oracle, s.without(j), visited, found);
        }
    }
}

/// All convex vertex sets with at most `max_size` members, by filtering the
/// powerset. Refuses graphs with more than `limit` vertices.
pub fn enumerate_convex_subsets(oracle: &ShortestPathOracle, max_size: usize, limit: u32) -> Result<Vec<VertexSet>> {
    let n = oracle.vertex_count();
    if n > limit {
        return Err(Error::LimitExceeded(format!(
            "powerset enumeration over {n} vertices (limit {limit})"
        )));
    }
    let mut out = Vec::new();
    for mask in 0u64..1 << n {
        if mask.count_ones() as usize > max_size {
            continue;
        }
        let u = VertexSet::from_mask(mask);
        if oracle.mutually_reachable(&u) && escaping_pair(oracle, &u).is_none() {
            out.push(u);
        }
    }
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(out)
}
