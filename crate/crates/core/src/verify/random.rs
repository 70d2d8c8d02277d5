//! Seeded random instances for the verification suites.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::graph::InteractionGraph;
use crate::poset::{ExplicitPoset, GridElement, OrderIdeal, PosetGrid, VertexSet};

/// A poset on `0..n` whose covers are a random subset of the pairs i < j.
pub fn explicit_poset(rng: &mut ChaCha8Rng, n: usize, density: f64) -> Result<ExplicitPoset> {
    let mut covers = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(density) {
                covers.push((i, j));
            }
        }
    }
    ExplicitPoset::from_covers(n, &covers)
}

/// A random intersection-closed family of subsets of `{0..k-1}` containing
/// ∅, as an explicit poset ordered by inclusion. Such families are meet
/// semilattices with a least element.
pub fn meet_semilattice(rng: &mut ChaCha8Rng, k: u32, seeds: usize) -> Result<(ExplicitPoset, Vec<VertexSet>)> {
    let mut family: BTreeSet<VertexSet> = BTreeSet::from([VertexSet::empty()]);
    for _ in 0..seeds {
        family.insert(VertexSet::from_mask(rng.gen_range(0..1u64 << k)));
    }
    let family = intersection_closure(family);
    let sets: Vec<VertexSet> = family.into_iter().collect();
    let poset = ExplicitPoset::from_relation(sets.len(), |a, b| sets[a].is_subset(&sets[b]))?;
    Ok((poset, sets))
}

pub fn intersection_closure(mut family: BTreeSet<VertexSet>) -> BTreeSet<VertexSet> {
    loop {
        let current: Vec<VertexSet> = family.iter().cloned().collect();
        let before = family.len();
        for (i, a) in current.iter().enumerate() {
            for b in &current[i + 1..] {
                family.insert(a.intersection(b));
            }
        }
        if family.len() == before {
            return family;
        }
    }
}

/// The ideal generated by up to `max_generators` random elements of a
/// finite grid (at least one).
pub fn ideal(rng: &mut ChaCha8Rng, grid: &PosetGrid, max_generators: usize) -> Result<OrderIdeal> {
    let elements = grid.elements()?;
    let count = rng.gen_range(1..=max_generators.max(1));
    let gens: Vec<GridElement> = (0..count).map(|_| elements.choose(rng).expect("nonempty grid").clone()).collect();
    OrderIdeal::generated_by(grid, gens)
}

/// A downward-closed family of subsets of `{0..m-1}` generated by a few
/// random sets.
pub fn set_ideal(rng: &mut ChaCha8Rng, m: u32, max_generators: usize) -> BTreeSet<VertexSet> {
    let count = rng.gen_range(1..=max_generators.max(1));
    let mut out = BTreeSet::new();
    for _ in 0..count {
        let g = VertexSet::from_mask(rng.gen_range(0..1u64 << m));
        out.extend(g.subsets());
    }
    out
}

/// A sub-ideal of `family` generated by a random selection of its members
/// (possibly empty).
pub fn sub_ideal(rng: &mut ChaCha8Rng, family: &BTreeSet<VertexSet>) -> BTreeSet<VertexSet> {
    let members: Vec<&VertexSet> = family.iter().collect();
    let count = rng.gen_range(0..=3usize);
    let mut out = BTreeSet::new();
    for _ in 0..count {
        if let Some(g) = members.choose(rng) {
            out.extend(g.subsets());
        }
    }
    out
}

/// G(n, p) on `n` vertices.
pub fn graph(rng: &mut ChaCha8Rng, n: u32, p: f64) -> Result<InteractionGraph> {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                edges.push((i, j));
            }
        }
    }
    InteractionGraph::new(n, &edges)
}

/// A table of potentials indexed by subset mask, uniform in [-1, 1).
pub fn potential_table(rng: &mut ChaCha8Rng, m: u32, zero_empty: bool) -> Vec<f64> {
    let mut t: Vec<f64> = (0..1u64 << m).map(|_| rng.gen_range(-1.0..1.0)).collect();
    if zero_empty {
        t[0] = 0.0;
    }
    t
}
