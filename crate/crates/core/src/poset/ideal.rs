use std::collections::{BTreeSet, VecDeque};

use super::grid::{GridElement, PosetGrid};
use super::tensor::SparseIntTensor;
use crate::error::{Error, Result};

/// A finite, downward-closed subset of a poset grid together with its
/// generating antichain (the maximal elements).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OrderIdeal {
    elements: BTreeSet<GridElement>,
    antichain: BTreeSet<GridElement>,
}

impl OrderIdeal {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The principal ideal of the grid's least element.
    pub fn bottom(grid: &PosetGrid) -> Self {
        let mut ideal = Self::empty();
        ideal.insert(grid, grid.least()).expect("least element is always admissible");
        ideal
    }

    /// The ideal generated by `generators` (the union of their principal ideals).
    pub fn generated_by(grid: &PosetGrid, generators: impl IntoIterator<Item = GridElement>) -> Result<Self> {
        let mut elements = BTreeSet::new();
        let mut queue = VecDeque::new();
        for g in generators {
            grid.check(&g)?;
            if elements.insert(g.clone()) {
                queue.push_back(g);
            }
        }
        while let Some(p) = queue.pop_front() {
            for q in grid.covers_down(&p)? {
                if elements.insert(q.clone()) {
                    queue.push_back(q);
                }
            }
        }
        Ok(Self::from_closed_set(grid, elements))
    }

    /// Validates that `elements` is downward-closed and builds the ideal.
    pub fn from_elements(grid: &PosetGrid, elements: impl IntoIterator<Item = GridElement>) -> Result<Self> {
        let elements: BTreeSet<GridElement> = elements.into_iter().collect();
        for p in &elements {
            grid.check(p)?;
            for q in grid.covers_down(p)? {
                if !elements.contains(&q) {
                    return Err(Error::precondition(format!(
                        "set is not downward-closed: {p} is present but {q} is not"
                    )));
                }
            }
        }
        Ok(Self::from_closed_set(grid, elements))
    }

    fn from_closed_set(grid: &PosetGrid, elements: BTreeSet<GridElement>) -> Self {
        let antichain = elements
            .iter()
            .filter(|p| {
                grid.covers_up(p)
                    .expect("members are grid elements")
                    .iter()
                    .all(|r| !elements.contains(r))
            })
            .cloned()
            .collect();
        OrderIdeal { elements, antichain }
    }

    pub fn contains(&self, p: &GridElement) -> bool {
        self.elements.contains(p)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Members in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = &GridElement> {
        self.elements.iter()
    }

    pub fn elements(&self) -> &BTreeSet<GridElement> {
        &self.elements
    }

    pub fn antichain(&self) -> &BTreeSet<GridElement> {
        &self.antichain
    }

    /// Whether every element covered by `p` is already present.
    pub fn admits(&self, grid: &PosetGrid, p: &GridElement) -> Result<bool> {
        Ok(grid.covers_down(p)?.iter().all(|q| self.elements.contains(q)))
    }

    /// Adds `p`, whose lower covers must all be present, and returns the
    /// former antichain members it displaced.
    pub fn insert(&mut self, grid: &PosetGrid, p: GridElement) -> Result<Vec<GridElement>> {
        grid.check(&p)?;
        if self.elements.contains(&p) {
            return Err(Error::precondition(format!("{p} is already in the ideal")));
        }
        let below = grid.covers_down(&p)?;
        if let Some(missing) = below.iter().find(|q| !self.elements.contains(q)) {
            return Err(Error::precondition(format!(
                "inserting {p} would break downward closure: {missing} is missing"
            )));
        }
        // Anything strictly below p that was maximal must be one of its covers.
        let removed: Vec<GridElement> = below.into_iter().filter(|q| self.antichain.remove(q)).collect();
        self.antichain.insert(p.clone());
        self.elements.insert(p);
        Ok(removed)
    }
}

/// Combination coefficients D_s = Σ_{t∈I, t≥s} μ(s,t), accumulated as the
/// sum of the Möbius tensors of the ideal's members.
pub fn combination_coefficients(grid: &PosetGrid, ideal: &OrderIdeal) -> Result<SparseIntTensor> {
    let mut d = SparseIntTensor::new();
    for p in ideal.iter() {
        d.add_scaled(&grid.moebius_tensor(p)?, 1)?;
    }
    Ok(d)
}

/// Checks D_s = 1 − Σ_{s<t∈I} D_t for every s in the ideal.
pub fn top_down_coefficient_check(grid: &PosetGrid, ideal: &OrderIdeal) -> Result<bool> {
    let d = combination_coefficients(grid, ideal)?;
    for s in ideal.iter() {
        let above: i64 = ideal.iter().filter(|t| grid.lt(s, t)).map(|t| d.get(t)).sum();
        if d.get(s) != 1 - above {
            return Ok(false);
        }
    }
    Ok(true)
}
