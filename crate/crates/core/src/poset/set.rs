use serde::{Deserialize, Serialize};
use std::fmt;

/// A finite set of vertex (atom or fragment) indices, stored sorted and
/// duplicate-free so that structural equality is set equality.
///
/// Indices are 0-based internally; [`fmt::Display`] prints them 1-based.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexSet(Vec<u32>);

impl VertexSet {
    pub fn empty() -> Self {
        VertexSet(Vec::new())
    }

    pub fn singleton(v: u32) -> Self {
        VertexSet(vec![v])
    }

    /// Builds a set from arbitrary indices, sorting and removing duplicates.
    pub fn new(mut items: Vec<u32>) -> Self {
        items.sort_unstable();
        items.dedup();
        VertexSet(items)
    }

    /// Builds a set from 1-based labels.
    pub fn from_one_based(labels: &[u32]) -> Self {
        VertexSet::new(labels.iter().map(|&l| l - 1).collect())
    }

    /// All indices `0..n`.
    pub fn full(n: u32) -> Self {
        VertexSet((0..n).collect())
    }

    pub fn from_mask(mask: u64) -> Self {
        VertexSet((0..64).filter(|i| mask >> i & 1 == 1).collect())
    }

    /// Bitmask representation; only valid when every index is below 64.
    pub fn to_mask(&self) -> u64 {
        self.0.iter().fold(0u64, |m, &v| m | 1 << v)
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, v: u32) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn max(&self) -> Option<u32> {
        self.0.last().copied()
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        if self.len() > other.len() {
            return false;
        }
        let mut it = other.0.iter();
        'outer: for v in &self.0 {
            for w in it.by_ref() {
                if w == v {
                    continue 'outer;
                }
                if w > v {
                    return false;
                }
            }
            return false;
        }
        true
    }

    pub fn is_strict_subset(&self, other: &VertexSet) -> bool {
        self.len() < other.len() && self.is_subset(other)
    }

    pub fn with(&self, v: u32) -> VertexSet {
        match self.0.binary_search(&v) {
            Ok(_) => self.clone(),
            Err(pos) => {
                let mut items = self.0.clone();
                items.insert(pos, v);
                VertexSet(items)
            }
        }
    }

    pub fn without(&self, v: u32) -> VertexSet {
        VertexSet(self.0.iter().copied().filter(|&w| w != v).collect())
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        let mut items = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => {
                    items.push(self.0[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    items.push(other.0[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    items.push(self.0[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        items.extend_from_slice(&self.0[i..]);
        items.extend_from_slice(&other.0[j..]);
        VertexSet(items)
    }

    pub fn intersection(&self, other: &VertexSet) -> VertexSet {
        VertexSet(self.0.iter().copied().filter(|&v| other.contains(v)).collect())
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        VertexSet(self.0.iter().copied().filter(|&v| !other.contains(v)).collect())
    }

    /// All subsets, in order of increasing bitmask over this set's members.
    pub fn subsets(&self) -> impl Iterator<Item = VertexSet> + '_ {
        let n = self.len();
        assert!(n < 32, "subset enumeration of a set with {n} elements");
        (0u32..1 << n).map(move |mask| {
            VertexSet(
                (0..n)
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| self.0[i])
                    .collect(),
            )
        })
    }
}

impl FromIterator<u32> for VertexSet {
    fn from_iter<I: IntoIterator<Item = u32>>(iter: I) -> Self {
        VertexSet::new(iter.into_iter().collect())
    }
}

impl fmt::Display for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, v) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", v + 1)?;
        }
        write!(f, "}}")
    }
}
