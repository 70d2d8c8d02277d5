use std::collections::BTreeSet;

use super::{Fragmentation, Geometry};
use crate::error::Result;
use crate::poset::VertexSet;

const HYDROGEN: u32 = 1;

/// Two-phase coalescing of singleton fragments.
///
/// Phase one merges across non-single bonds and bonds to hydrogen. Phase two
/// merges when one atom bonds twice into another fragment, or when a bonded
/// pair of fragments forms a triangle with a third fragment through one of
/// the bond's atoms. Fragments are kept sorted by smallest atom, pairs are
/// scanned lexicographically and the first qualifying pair is merged before
/// rescanning.
pub fn heuristic_fragment(geometry: &Geometry) -> Result<Fragmentation> {
    heuristic_fragment_from(geometry, Fragmentation::singletons(geometry.len()))
}

/// Runs both phases starting from an existing fragmentation.
pub fn heuristic_fragment_from(geometry: &Geometry, start: Fragmentation) -> Result<Fragmentation> {
    geometry.require_bonds()?;
    let mut frags = sorted(start.fragments().to_vec());
    while let Some((i, j)) = phase_one_candidates(geometry, &frags).into_iter().next() {
        frags = merge(frags, i, j);
    }
    while let Some((i, j)) = phase_two_candidates(geometry, &frags)?.into_iter().next() {
        frags = merge(frags, i, j);
    }
    Fragmentation::new(geometry.len(), frags)
}

fn sorted(mut frags: Vec<VertexSet>) -> Vec<VertexSet> {
    frags.sort_by_key(|f| f.iter().next());
    frags
}

fn merge(mut frags: Vec<VertexSet>, i: usize, j: usize) -> Vec<VertexSet> {
    let b = frags.remove(j);
    frags[i] = frags[i].union(&b);
    sorted(frags)
}

fn owners(atom_count: usize, frags: &[VertexSet]) -> Vec<usize> {
    let mut owner = vec![0; atom_count];
    for (k, f) in frags.iter().enumerate() {
        for a in f.iter() {
            owner[a as usize] = k;
        }
    }
    owner
}

fn ordered(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Fragment pairs joined by a non-single bond or a bond to hydrogen.
fn phase_one_candidates(geometry: &Geometry, frags: &[VertexSet]) -> BTreeSet<(usize, usize)> {
    let owner = owners(geometry.len(), frags);
    let atoms = geometry.atoms();
    let mut out = BTreeSet::new();
    for b in geometry.bonds().unwrap_or_default() {
        let (fi, fj) = (owner[b.i as usize], owner[b.j as usize]);
        if fi == fj {
            continue;
        }
        if b.order > 1 || atoms[b.i as usize].z == HYDROGEN || atoms[b.j as usize].z == HYDROGEN {
            out.insert(ordered(fi, fj));
        }
    }
    out
}

/// Fragment pairs that phase two would merge, in scan order. Empty exactly
/// when phase two has reached its steady state.
pub fn phase_two_candidates(geometry: &Geometry, frags: &[VertexSet]) -> Result<BTreeSet<(usize, usize)>> {
    let bonds = geometry.require_bonds()?;
    let owner = owners(geometry.len(), frags);
    let mut neighbors: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); geometry.len()];
    for b in bonds {
        neighbors[b.i as usize].insert(b.j);
        neighbors[b.j as usize].insert(b.i);
    }
    let mut adjacent = vec![BTreeSet::new(); frags.len()];
    for b in bonds {
        let (fi, fj) = (owner[b.i as usize], owner[b.j as usize]);
        if fi != fj {
            adjacent[fi].insert(fj);
            adjacent[fj].insert(fi);
        }
    }
    let mut out = BTreeSet::new();
    // One atom bonded to two atoms of another fragment.
    for (a, nbrs) in neighbors.iter().enumerate() {
        let fa = owner[a];
        let mut seen = BTreeSet::new();
        for &n in nbrs {
            let fb = owner[n as usize];
            if fb != fa && !seen.insert(fb) {
                out.insert(ordered(fa, fb));
            }
        }
    }
    // A bonded pair of fragments where either bond atom also bonds into a
    // third fragment adjacent to both.
    for b in bonds {
        let (fi, fj) = (owner[b.i as usize], owner[b.j as usize]);
        if fi == fj {
            continue;
        }
        let triangle = [b.i, b.j].iter().any(|&x| {
            neighbors[x as usize].iter().any(|&c| {
                let fk = owner[c as usize];
                fk != fi && fk != fj && adjacent[fk].contains(&fi) && adjacent[fk].contains(&fj)
            })
        });
        if triangle {
            out.insert(ordered(fi, fj));
        }
    }
    Ok(out)
}
