use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use super::explicit::ExplicitPoset;
use super::set::VertexSet;
use crate::error::{Error, Result};
use crate::graph::GraphPoset;

/// Largest Boolean algebra rank for which whole-axis enumeration is allowed.
pub const MAX_ENUMERABLE_BOOLEAN_RANK: u32 = 20;

/// An element of one poset axis.
///
/// Chain and explicit axes use integer indices; Boolean and graph axes use
/// vertex sets.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AxisElement {
    Index(u32),
    Set(VertexSet),
}

impl AxisElement {
    pub fn index(&self) -> Option<u32> {
        match self {
            AxisElement::Index(i) => Some(*i),
            AxisElement::Set(_) => None,
        }
    }

    pub fn set(&self) -> Option<&VertexSet> {
        match self {
            AxisElement::Set(s) => Some(s),
            AxisElement::Index(_) => None,
        }
    }
}

impl From<VertexSet> for AxisElement {
    fn from(s: VertexSet) -> Self {
        AxisElement::Set(s)
    }
}

impl From<u32> for AxisElement {
    fn from(i: u32) -> Self {
        AxisElement::Index(i)
    }
}

impl fmt::Display for AxisElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AxisElement::Index(i) => write!(f, "{i}"),
            AxisElement::Set(s) => write!(f, "{s}"),
        }
    }
}

/// A locally finite poset with a least element, used as one axis of a grid.
#[derive(Clone, Debug)]
pub enum PosetAxis {
    /// ℕ = {0, 1, 2, ...} with least element 0.
    ChainNat,
    /// [n] = {1, ..., n} as a chain with least element 1.
    ChainBounded(u32),
    /// Subsets of {0, ..., n-1} ordered by inclusion.
    Boolean(u32),
    /// Induced-subgraph posets conn[G], M_g[G] or comp_R[G].
    Graph(Arc<GraphPoset>),
    /// A finite poset given by covers; validated to have a least element.
    Explicit(Arc<ExplicitPoset>),
}

impl PosetAxis {
    pub fn explicit(poset: ExplicitPoset) -> Result<Self> {
        if poset.least().is_none() {
            return Err(Error::domain("explicit poset has no least element"));
        }
        Ok(PosetAxis::Explicit(Arc::new(poset)))
    }

    pub fn graph(poset: GraphPoset) -> Self {
        PosetAxis::Graph(Arc::new(poset))
    }

    pub fn least(&self) -> AxisElement {
        match self {
            PosetAxis::ChainNat => AxisElement::Index(0),
            PosetAxis::ChainBounded(_) => AxisElement::Index(1),
            PosetAxis::Boolean(_) | PosetAxis::Graph(_) => AxisElement::Set(VertexSet::empty()),
            PosetAxis::Explicit(p) => AxisElement::Index(p.least().expect("validated") as u32),
        }
    }

    pub fn contains(&self, s: &AxisElement) -> bool {
        match (self, s) {
            (PosetAxis::ChainNat, AxisElement::Index(_)) => true,
            (PosetAxis::ChainBounded(n), AxisElement::Index(i)) => (1..=*n).contains(i),
            (PosetAxis::Boolean(n), AxisElement::Set(u)) => u.max().is_none_or(|m| m < *n),
            (PosetAxis::Graph(g), AxisElement::Set(u)) => g.contains(u),
            (PosetAxis::Explicit(p), AxisElement::Index(i)) => (*i as usize) < p.len(),
            _ => false,
        }
    }

    fn check(&self, s: &AxisElement) -> Result<()> {
        if self.contains(s) {
            Ok(())
        } else {
            Err(Error::domain(format!("{s} is not an element of axis {}", self.name())))
        }
    }

    /// Short human-readable axis name.
    pub fn name(&self) -> String {
        match self {
            PosetAxis::ChainNat => "N".into(),
            PosetAxis::ChainBounded(n) => format!("[{n}]"),
            PosetAxis::Boolean(n) => format!("B_{n}"),
            PosetAxis::Graph(g) => g.family().name(),
            PosetAxis::Explicit(p) => format!("explicit({})", p.len()),
        }
    }

    /// `s ≤ t`. Both arguments are assumed to be axis members.
    pub fn le(&self, s: &AxisElement, t: &AxisElement) -> bool {
        match (self, s, t) {
            (PosetAxis::Explicit(p), AxisElement::Index(a), AxisElement::Index(b)) => {
                p.le(*a as usize, *b as usize)
            }
            (_, AxisElement::Index(a), AxisElement::Index(b)) => a <= b,
            (_, AxisElement::Set(u), AxisElement::Set(v)) => u.is_subset(v),
            _ => false,
        }
    }

    /// Key of a linear extension: `s < t` implies `rank(s) < rank(t)`.
    pub fn rank(&self, s: &AxisElement) -> usize {
        match (self, s) {
            (PosetAxis::Explicit(p), AxisElement::Index(a)) => p.rank(*a as usize),
            (_, AxisElement::Index(a)) => *a as usize,
            (_, AxisElement::Set(u)) => u.len(),
        }
    }

    /// All elements covering `s`.
    pub fn covers_up(&self, s: &AxisElement) -> Result<Vec<AxisElement>> {
        self.check(s)?;
        Ok(match (self, s) {
            (PosetAxis::ChainNat, AxisElement::Index(i)) => vec![AxisElement::Index(i + 1)],
            (PosetAxis::ChainBounded(n), AxisElement::Index(i)) => {
                if i < n {
                    vec![AxisElement::Index(i + 1)]
                } else {
                    vec![]
                }
            }
            (PosetAxis::Boolean(n), AxisElement::Set(u)) => (0..*n)
                .filter(|v| !u.contains(*v))
                .map(|v| AxisElement::Set(u.with(v)))
                .collect(),
            (PosetAxis::Graph(g), AxisElement::Set(u)) => {
                g.covers_up(u)?.into_iter().map(AxisElement::Set).collect()
            }
            (PosetAxis::Explicit(p), AxisElement::Index(i)) => p
                .covers_up(*i as usize)
                .iter()
                .map(|&j| AxisElement::Index(j as u32))
                .collect(),
            _ => unreachable!("membership checked"),
        })
    }

    /// All elements covered by `s`; empty for the least element.
    pub fn covers_down(&self, s: &AxisElement) -> Result<Vec<AxisElement>> {
        self.check(s)?;
        Ok(match (self, s) {
            (PosetAxis::ChainNat, AxisElement::Index(i)) => {
                if *i > 0 {
                    vec![AxisElement::Index(i - 1)]
                } else {
                    vec![]
                }
            }
            (PosetAxis::ChainBounded(_), AxisElement::Index(i)) => {
                if *i > 1 {
                    vec![AxisElement::Index(i - 1)]
                } else {
                    vec![]
                }
            }
            (PosetAxis::Boolean(_), AxisElement::Set(u)) => {
                u.iter().map(|v| AxisElement::Set(u.without(v))).collect()
            }
            (PosetAxis::Graph(g), AxisElement::Set(u)) => {
                g.covers_down(u)?.into_iter().map(AxisElement::Set).collect()
            }
            (PosetAxis::Explicit(p), AxisElement::Index(i)) => p
                .covers_down(*i as usize)
                .iter()
                .map(|&j| AxisElement::Index(j as u32))
                .collect(),
            _ => unreachable!("membership checked"),
        })
    }

    /// The Möbius function μ(s, t) of this axis.
    ///
    /// Chains and Boolean algebras use their closed forms; graph posets use
    /// a memoized Möbius vector of `t`; explicit posets use their
    /// precomputed table.
    pub fn moebius(&self, s: &AxisElement, t: &AxisElement) -> Result<i64> {
        self.check(s)?;
        self.check(t)?;
        Ok(match (self, s, t) {
            (PosetAxis::ChainNat | PosetAxis::ChainBounded(_), AxisElement::Index(a), AxisElement::Index(b)) => {
                chain_moebius(*a, *b)
            }
            (PosetAxis::Boolean(_), AxisElement::Set(u), AxisElement::Set(v)) => boolean_moebius(u, v),
            (PosetAxis::Graph(g), AxisElement::Set(u), AxisElement::Set(v)) => {
                if !u.is_subset(v) {
                    0
                } else {
                    g.moebius_vector(v)?
                        .iter()
                        .find(|(w, _)| w == u)
                        .map_or(0, |(_, m)| *m)
                }
            }
            (PosetAxis::Explicit(p), AxisElement::Index(a), AxisElement::Index(b)) => {
                p.moebius(*a as usize, *b as usize)
            }
            _ => unreachable!("membership checked"),
        })
    }

    /// The Möbius vector of `p`: all `(s, μ(s, p))` with nonzero value,
    /// sorted by `s`.
    pub fn moebius_vector(&self, p: &AxisElement) -> Result<Vec<(AxisElement, i64)>> {
        self.check(p)?;
        let mut out = match (self, p) {
            (PosetAxis::ChainNat | PosetAxis::ChainBounded(_), AxisElement::Index(i)) => {
                let mut v = vec![(p.clone(), 1)];
                if *p != self.least() {
                    v.push((AxisElement::Index(i - 1), -1));
                }
                v
            }
            (PosetAxis::Boolean(_), AxisElement::Set(u)) => u
                .subsets()
                .map(|w| {
                    let sign = if (u.len() - w.len()) % 2 == 0 { 1 } else { -1 };
                    (AxisElement::Set(w), sign)
                })
                .collect(),
            (PosetAxis::Graph(g), AxisElement::Set(u)) => g
                .moebius_vector(u)?
                .iter()
                .map(|(w, m)| (AxisElement::Set(w.clone()), *m))
                .collect(),
            (PosetAxis::Explicit(ep), AxisElement::Index(i)) => (0..ep.len())
                .filter_map(|s| {
                    let m = ep.moebius(s, *i as usize);
                    (m != 0).then_some((AxisElement::Index(s as u32), m))
                })
                .collect(),
            _ => unreachable!("membership checked"),
        };
        out.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(out)
    }

    /// μ(s, t) computed by the defining recursion over the interval [s, t],
    /// regardless of axis kind. Used to cross-check the closed forms.
    pub fn moebius_recursive(&self, s: &AxisElement, t: &AxisElement) -> Result<i64> {
        self.check(s)?;
        self.check(t)?;
        if !self.le(s, t) {
            return Ok(0);
        }
        let interval = self.interval(s, t)?;
        let mut mu: HashMap<&AxisElement, i64> = HashMap::with_capacity(interval.len());
        for (k, u) in interval.iter().enumerate() {
            let value = if u == s {
                1
            } else {
                -interval[..k]
                    .iter()
                    .filter(|w| self.le(w, u))
                    .map(|w| mu[w])
                    .sum::<i64>()
            };
            mu.insert(u, value);
        }
        Ok(mu[t])
    }

    /// All elements of the interval [s, t], sorted along a linear extension.
    pub fn interval(&self, s: &AxisElement, t: &AxisElement) -> Result<Vec<AxisElement>> {
        if !self.le(s, t) {
            return Ok(vec![]);
        }
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([s.clone()]);
        seen.insert(s.clone());
        while let Some(u) = queue.pop_front() {
            for w in self.covers_up(&u)? {
                if self.le(&w, t) && seen.insert(w.clone()) {
                    queue.push_back(w);
                }
            }
        }
        let mut out: Vec<AxisElement> = seen.into_iter().collect();
        out.sort_by_key(|u| self.rank(u));
        Ok(out)
    }

    /// Greatest lower bound, for axes where it is defined componentwise
    /// (chains, Boolean algebras, explicit posets when it exists).
    pub fn meet(&self, s: &AxisElement, t: &AxisElement) -> Result<Option<AxisElement>> {
        self.check(s)?;
        self.check(t)?;
        Ok(match (self, s, t) {
            (PosetAxis::ChainNat | PosetAxis::ChainBounded(_), AxisElement::Index(a), AxisElement::Index(b)) => {
                Some(AxisElement::Index(*a.min(b)))
            }
            (PosetAxis::Boolean(_), AxisElement::Set(u), AxisElement::Set(v)) => {
                Some(AxisElement::Set(u.intersection(v)))
            }
            (PosetAxis::Explicit(p), AxisElement::Index(a), AxisElement::Index(b)) => p
                .meet(*a as usize, *b as usize)
                .map(|c| AxisElement::Index(c as u32)),
            (PosetAxis::Graph(_), _, _) => {
                return Err(Error::domain("meets are not provided for graph posets"));
            }
            _ => unreachable!("membership checked"),
        })
    }

    /// Every element of a finite axis, sorted along a linear extension.
    pub fn elements(&self) -> Result<Vec<AxisElement>> {
        let mut out: Vec<AxisElement> = match self {
            PosetAxis::ChainNat => return Err(Error::domain("the axis N is infinite")),
            PosetAxis::ChainBounded(n) => (1..=*n).map(AxisElement::Index).collect(),
            PosetAxis::Boolean(n) => {
                if *n > MAX_ENUMERABLE_BOOLEAN_RANK {
                    return Err(Error::LimitExceeded(format!("enumerating B_{n}")));
                }
                (0u64..1 << n).map(|m| AxisElement::Set(VertexSet::from_mask(m))).collect()
            }
            PosetAxis::Graph(g) => g.elements()?.into_iter().map(AxisElement::Set).collect(),
            PosetAxis::Explicit(p) => (0..p.len() as u32).map(AxisElement::Index).collect(),
        };
        out.sort_by(|a, b| self.rank(a).cmp(&self.rank(b)).then_with(|| a.cmp(b)));
        Ok(out)
    }
}

/// Closed form on a chain: 1 on the diagonal, −1 on covers, 0 otherwise.
pub fn chain_moebius(s: u32, t: u32) -> i64 {
    if s == t {
        1
    } else if s + 1 == t {
        -1
    } else {
        0
    }
}

/// Closed form on a Boolean algebra: (−1)^{|v−u|} when u ⊆ v, else 0.
pub fn boolean_moebius(u: &VertexSet, v: &VertexSet) -> i64 {
    if !u.is_subset(v) {
        0
    } else if (v.len() - u.len()) % 2 == 0 {
        1
    } else {
        -1
    }
}
