use std::collections::BTreeMap;

use super::grid::GridElement;
use crate::error::{Error, Result};
use crate::sum::CompensatedSum;

/// Sparse integer tensor over grid elements; zero entries are never stored.
///
/// Houses Möbius tensors and the combination / error-indicator tensors.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SparseIntTensor {
    entries: BTreeMap<GridElement, i64>,
}

impl SparseIntTensor {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, p: &GridElement) -> i64 {
        self.entries.get(p).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Nonzero entries in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (&GridElement, i64)> {
        self.entries.iter().map(|(k, v)| (k, *v))
    }

    pub fn add(&mut self, p: GridElement, value: i64) -> Result<()> {
        if value == 0 {
            return Ok(());
        }
        let current = self.get(&p);
        let next = current
            .checked_add(value)
            .ok_or_else(|| Error::Overflow(format!("tensor entry {p}")))?;
        if next == 0 {
            self.entries.remove(&p);
        } else {
            self.entries.insert(p, next);
        }
        Ok(())
    }

    /// `self += sign · other`.
    pub fn add_scaled(&mut self, other: &SparseIntTensor, sign: i64) -> Result<()> {
        for (p, v) in other.iter() {
            let scaled = v
                .checked_mul(sign)
                .ok_or_else(|| Error::Overflow(format!("tensor entry {p}")))?;
            self.add(p.clone(), scaled)?;
        }
        Ok(())
    }

    /// `Reduce(self ⊙ values)` with compensated summation over the nonzero
    /// entries. Fails if a nonzero entry has no value.
    pub fn reduce_with(&self, values: &SparseRealTensor) -> Result<f64> {
        let mut acc = CompensatedSum::new();
        for (p, c) in self.iter() {
            let v = values
                .get(p)
                .ok_or_else(|| Error::precondition(format!("no value stored for {p}")))?;
            acc.add(c as f64 * v);
        }
        Ok(acc.value())
    }
}

impl FromIterator<(GridElement, i64)> for SparseIntTensor {
    fn from_iter<I: IntoIterator<Item = (GridElement, i64)>>(iter: I) -> Self {
        let mut t = SparseIntTensor::new();
        for (p, v) in iter {
            t.add(p, v).expect("overflow while collecting tensor");
        }
        t
    }
}

/// Sparse real tensor over grid elements (evaluations, uncertainties).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseRealTensor {
    entries: BTreeMap<GridElement, f64>,
}

impl SparseRealTensor {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, p: &GridElement) -> Option<f64> {
        self.entries.get(p).copied()
    }

    pub fn insert(&mut self, p: GridElement, value: f64) {
        self.entries.insert(p, value);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GridElement, f64)> {
        self.entries.iter().map(|(k, v)| (k, *v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poset::AxisElement;

    fn e(i: u32) -> GridElement {
        GridElement(vec![AxisElement::Index(i)])
    }

    #[test]
    fn zero_entries_are_dropped() {
        let mut t = SparseIntTensor::new();
        t.add(e(1), 2).unwrap();
        t.add(e(1), -2).unwrap();
        t.add(e(2), 0).unwrap();
        assert!(t.is_empty());
    }

    #[test]
    fn overflow_is_an_error() {
        let mut t = SparseIntTensor::new();
        t.add(e(0), i64::MAX).unwrap();
        assert!(matches!(t.add(e(0), 1), Err(Error::Overflow(_))));
    }

    #[test]
    fn reduce_requires_values() {
        let t: SparseIntTensor = [(e(0), 1), (e(1), -1)].into_iter().collect();
        let mut l = SparseRealTensor::new();
        l.insert(e(0), 3.0);
        assert!(t.reduce_with(&l).is_err());
        l.insert(e(1), 0.5);
        assert_eq!(t.reduce_with(&l).unwrap(), 2.5);
    }
}
