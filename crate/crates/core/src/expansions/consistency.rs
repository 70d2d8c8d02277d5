//! Combination-consistency between a poset grid and a subposet of it.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{check_vertex_count, MAX_SUBPOSET_SIZE};
use crate::error::{Error, Result};
use crate::poset::{combination_coefficients, GridElement, OrderIdeal, PosetGrid, VertexSet};

/// A grid element whose coefficient differs between the two truncations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoefficientMismatch {
    pub element: GridElement,
    /// Coefficient in the ideal of the full grid.
    pub in_grid: i64,
    /// Coefficient in the subposet ideal (0 for elements outside it).
    pub in_subposet: i64,
}

/// Outcome of matching a subposet ideal against the grid ideal generated by
/// its maximal elements, which is the only possible consistent candidate.
#[derive(Clone, Debug)]
pub struct ConsistencyCheck {
    pub ideal: OrderIdeal,
    pub mismatch: Option<CoefficientMismatch>,
}

impl ConsistencyCheck {
    pub fn is_consistent(&self) -> bool {
        self.mismatch.is_none()
    }

    /// The consistent ideal of the grid, if there is one.
    pub fn consistent_ideal(&self) -> Option<&OrderIdeal> {
        self.mismatch.is_none().then_some(&self.ideal)
    }
}

fn validate_subposet(grid: &PosetGrid, subposet: &[GridElement]) -> Result<BTreeSet<GridElement>> {
    if subposet.len() > MAX_SUBPOSET_SIZE {
        return Err(Error::LimitExceeded(format!(
            "subposet has {} elements; the cap is {MAX_SUBPOSET_SIZE}",
            subposet.len()
        )));
    }
    for q in subposet {
        grid.check(q)?;
    }
    Ok(subposet.iter().cloned().collect())
}

/// Coefficients of an ideal of a subposet, computed from the top down as
/// D_s = 1 − Σ_{s<t∈I′} D_t under the order inherited from the grid.
pub fn subposet_coefficients(grid: &PosetGrid, ideal: &[GridElement]) -> BTreeMap<GridElement, i64> {
    let mut order: Vec<&GridElement> = ideal.iter().collect();
    order.sort_by(|a, b| grid.rank(b).cmp(&grid.rank(a)).then_with(|| b.cmp(a)));
    let mut d: BTreeMap<GridElement, i64> = BTreeMap::new();
    for s in order {
        let above: i64 = d.iter().filter(|(t, _)| grid.lt(s, t)).map(|(_, c)| c).sum();
        d.insert(s.clone(), 1 - above);
    }
    d
}

/// Matches the ideal `ideal` of the subposet `subposet` against the grid
/// ideal generated by its maximal elements, coefficient by coefficient.
pub fn consistent_ideal(grid: &PosetGrid, subposet: &[GridElement], ideal: &[GridElement]) -> Result<ConsistencyCheck> {
    let q = validate_subposet(grid, subposet)?;
    let members: BTreeSet<GridElement> = ideal.iter().cloned().collect();
    for s in &members {
        if !q.contains(s) {
            return Err(Error::precondition(format!("{s} is not an element of the subposet")));
        }
    }
    for s in &members {
        if let Some(t) = q.iter().find(|t| grid.lt(t, s) && !members.contains(*t)) {
            return Err(Error::precondition(format!(
                "not an ideal of the subposet: {s} is present but {t} is not"
            )));
        }
    }
    let maximal: Vec<GridElement> = members
        .iter()
        .filter(|s| !members.iter().any(|t| grid.lt(s, t)))
        .cloned()
        .collect();
    let generated = OrderIdeal::generated_by(grid, maximal)?;
    let d = combination_coefficients(grid, &generated)?;
    let d_hat = subposet_coefficients(grid, &members.iter().cloned().collect::<Vec<_>>());

    // Elements outside the subposet with a nonzero coefficient are the
    // clearest counterexamples, so they are reported first.
    let mismatch = generated
        .iter()
        .filter(|p| !q.contains(*p))
        .chain(generated.iter().filter(|p| q.contains(*p)))
        .find(|p| d.get(p) != d_hat.get(*p).copied().unwrap_or(0))
        .map(|p| CoefficientMismatch {
            element: p.clone(),
            in_grid: d.get(p),
            in_subposet: d_hat.get(p).copied().unwrap_or(0),
        });
    Ok(ConsistencyCheck { ideal: generated, mismatch })
}

/// Result of a meet-closure check; `witness` is the first failing pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MeetClosure {
    pub closed: bool,
    pub witness: Option<(GridElement, GridElement)>,
}

/// Whether s ∧ t (taken in the grid) lies in `subposet` for all pairs.
pub fn check_meet_subsemilattice(grid: &PosetGrid, subposet: &[GridElement]) -> Result<MeetClosure> {
    let q = validate_subposet(grid, subposet)?;
    let elems: Vec<&GridElement> = q.iter().collect();
    for (i, s) in elems.iter().enumerate() {
        for t in &elems[i + 1..] {
            let m = grid
                .meet(s, t)?
                .ok_or_else(|| Error::domain(format!("{s} and {t} have no meet in the grid")))?;
            if !q.contains(&m) {
                return Ok(MeetClosure { closed: false, witness: Some(((*s).clone(), (*t).clone())) });
            }
        }
    }
    Ok(MeetClosure { closed: true, witness: None })
}

/// Every ideal of the subposet, each listed in canonical order. Fails once
/// more than `limit` ideals have been produced.
pub fn ideals_of_subposet(grid: &PosetGrid, subposet: &[GridElement], limit: usize) -> Result<Vec<Vec<GridElement>>> {
    let q = validate_subposet(grid, subposet)?;
    let mut order: Vec<GridElement> = q.into_iter().collect();
    order.sort_by(|a, b| grid.rank(a).cmp(&grid.rank(b)).then_with(|| a.cmp(b)));
    let below: Vec<Vec<usize>> = order
        .iter()
        .map(|s| (0..order.len()).filter(|&j| grid.lt(&order[j], s)).collect())
        .collect();

    let mut out = Vec::new();
    let mut chosen = vec![false; order.len()];
    fn walk(
        i: usize,
        order: &[GridElement],
        below: &[Vec<usize>],
        chosen: &mut Vec<bool>,
        out: &mut Vec<Vec<GridElement>>,
        limit: usize,
    ) -> Result<()> {
        if i == order.len() {
            if out.len() >= limit {
                return Err(Error::LimitExceeded(format!("more than {limit} ideals")));
            }
            let mut ideal: Vec<GridElement> =
                order.iter().zip(chosen.iter()).filter(|(_, c)| **c).map(|(s, _)| s.clone()).collect();
            ideal.sort();
            out.push(ideal);
            return Ok(());
        }
        walk(i + 1, order, below, chosen, out, limit)?;
        if below[i].iter().all(|&j| chosen[j]) {
            chosen[i] = true;
            walk(i + 1, order, below, chosen, out, limit)?;
            chosen[i] = false;
        }
        Ok(())
    }
    walk(0, &order, &below, &mut chosen, &mut out, limit)?;
    Ok(out)
}

/// Searches all ideals of the subposet for one with no consistent ideal in
/// the grid. `None` means the subposet is combination-consistent.
pub fn find_inconsistent_ideal(
    grid: &PosetGrid,
    subposet: &[GridElement],
    limit: usize,
) -> Result<Option<(Vec<GridElement>, CoefficientMismatch)>> {
    for ideal in ideals_of_subposet(grid, subposet, limit)? {
        let check = consistent_ideal(grid, subposet, &ideal)?;
        if let Some(m) = check.mismatch {
            return Ok(Some((ideal, m)));
        }
    }
    Ok(None)
}

/// Meets of all nonempty subsets of an antichain, by closing it under
/// pairwise meets.
pub fn antichain_meets(grid: &PosetGrid, antichain: &BTreeSet<GridElement>) -> Result<BTreeSet<GridElement>> {
    let mut closed = antichain.clone();
    let mut frontier: Vec<GridElement> = antichain.iter().cloned().collect();
    while let Some(s) = frontier.pop() {
        let current: Vec<GridElement> = closed.iter().cloned().collect();
        for t in current {
            let m = grid
                .meet(&s, &t)?
                .ok_or_else(|| Error::domain(format!("{s} and {t} have no meet in the grid")))?;
            if closed.insert(m.clone()) {
                frontier.push(m);
            }
        }
    }
    Ok(closed)
}

/// First element with a nonzero coefficient that is not a meet of members
/// of the generating antichain, if any.
pub fn nonzero_coefficients_outside_meets(grid: &PosetGrid, ideal: &OrderIdeal) -> Result<Option<GridElement>> {
    let meets = antichain_meets(grid, ideal.antichain())?;
    let d = combination_coefficients(grid, ideal)?;
    let outside = d.iter().map(|(p, _)| p).find(|p| !meets.contains(*p)).cloned();
    Ok(outside)
}

/// The subsets F_u = ∪_{i∈u} F_i for every u ⊆ [K], deduplicated.
pub fn fragment_union_subposet(fragments: &[VertexSet]) -> Result<Vec<VertexSet>> {
    check_vertex_count(fragments.len() as u32)?;
    let k = fragments.len();
    let out: BTreeSet<VertexSet> = (0u64..(1u64 << k))
        .map(|mask| (0..k).filter(|i| mask >> i & 1 == 1).fold(VertexSet::empty(), |a, i| a.union(&fragments[i])))
        .collect();
    Ok(out.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansions::{boolean_grid, set_element};
    use crate::graph::{GraphPoset, InteractionGraph};

    fn s(labels: &[u32]) -> GridElement {
        set_element(VertexSet::from_one_based(labels))
    }

    fn graph_subposet(p: &GraphPoset) -> Vec<GridElement> {
        p.elements().unwrap().into_iter().map(set_element).collect()
    }

    fn generated_in(grid: &PosetGrid, q: &[GridElement], gens: &[GridElement]) -> Vec<GridElement> {
        q.iter().filter(|x| gens.iter().any(|g| grid.le(x, g))).cloned().collect()
    }

    #[test]
    fn trivial_ideal_is_consistent() {
        let grid = boolean_grid(4).unwrap();
        let q = vec![s(&[]), s(&[1]), s(&[1, 2])];
        let check = consistent_ideal(&grid, &q, &[s(&[])]).unwrap();
        assert!(check.is_consistent());
        assert_eq!(check.consistent_ideal().unwrap().len(), 1);
    }

    #[test]
    fn convex_benzene_ideal_is_consistent() {
        let grid = boolean_grid(6).unwrap();
        let q = graph_subposet(&GraphPoset::convex(InteractionGraph::cycle(6)));
        let gens = [s(&[1, 2, 3]), s(&[3, 4]), s(&[4, 5]), s(&[5, 6]), s(&[6, 1])];
        let ideal = generated_in(&grid, &q, &gens);
        let check = consistent_ideal(&grid, &q, &ideal).unwrap();
        assert!(check.is_consistent(), "{:?}", check.mismatch);
    }

    #[test]
    fn connected_ring_ideal_is_inconsistent_at_intersection() {
        // Hexane chain closed by an extra 1-6 edge.
        let grid = boolean_grid(6).unwrap();
        let g = InteractionGraph::from_one_based(6, &[(1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (1, 6)]).unwrap();
        let q = graph_subposet(&GraphPoset::connected(g));
        let ideal = generated_in(&grid, &q, &[s(&[1, 2, 3, 4]), s(&[1, 4, 5, 6])]);
        let check = consistent_ideal(&grid, &q, &ideal).unwrap();
        let m = check.mismatch.expect("inconsistent");
        assert_eq!(m.element, s(&[1, 4]));
        assert_eq!((m.in_grid, m.in_subposet), (-1, 0));

        let closure = check_meet_subsemilattice(&grid, &q).unwrap();
        assert!(!closure.closed);
        let (a, b) = closure.witness.unwrap();
        let meet = grid.meet(&a, &b).unwrap().unwrap();
        assert!(!q.contains(&meet));
    }

    #[test]
    fn disjoint_fragment_unions_are_meet_closed() {
        let grid = boolean_grid(6).unwrap();
        let f = [VertexSet::from_one_based(&[1, 2]), VertexSet::from_one_based(&[3]), VertexSet::from_one_based(&[4, 5, 6])];
        let q: Vec<GridElement> = fragment_union_subposet(&f).unwrap().into_iter().map(set_element).collect();
        assert_eq!(q.len(), 8);
        assert!(check_meet_subsemilattice(&grid, &q).unwrap().closed);
        assert_eq!(find_inconsistent_ideal(&grid, &q, 1000).unwrap(), None);
    }

    #[test]
    fn non_meet_closed_pair_has_inconsistent_ideal() {
        let grid = boolean_grid(2).unwrap();
        let q = vec![s(&[1]), s(&[2])];
        assert!(!check_meet_subsemilattice(&grid, &q).unwrap().closed);
        let (ideal, m) = find_inconsistent_ideal(&grid, &q, 100).unwrap().unwrap();
        assert_eq!(ideal, vec![s(&[1]), s(&[2])]);
        assert_eq!(m.element, s(&[]));
    }

    #[test]
    fn ideals_of_a_chain_and_of_b2() {
        let grid = boolean_grid(3).unwrap();
        let chain = vec![s(&[]), s(&[1]), s(&[1, 2]), s(&[1, 2, 3])];
        assert_eq!(ideals_of_subposet(&grid, &chain, 100).unwrap().len(), 5);
        let b2 = vec![s(&[]), s(&[1]), s(&[2]), s(&[1, 2])];
        assert_eq!(ideals_of_subposet(&grid, &b2, 100).unwrap().len(), 6);
        assert!(matches!(ideals_of_subposet(&grid, &b2, 3), Err(Error::LimitExceeded(_))));
    }

    #[test]
    fn rejects_non_ideal_input() {
        let grid = boolean_grid(3).unwrap();
        let q = vec![s(&[]), s(&[1]), s(&[1, 2])];
        assert!(consistent_ideal(&grid, &q, &[s(&[1])]).is_err());
        assert!(consistent_ideal(&grid, &q, &[s(&[]), s(&[2])]).is_err());
    }

    #[test]
    fn nonzero_coefficients_sit_on_meets() {
        let grid = boolean_grid(4).unwrap();
        let ideal = OrderIdeal::generated_by(&grid, [s(&[1, 2, 3]), s(&[2, 3, 4]), s(&[1, 4])]).unwrap();
        assert_eq!(nonzero_coefficients_outside_meets(&grid, &ideal).unwrap(), None);
        let meets = antichain_meets(&grid, ideal.antichain()).unwrap();
        assert!(meets.contains(&s(&[2, 3])));
        assert!(meets.contains(&s(&[])));
    }
}
