use serde::{Deserialize, Serialize};
use std::fmt;

use super::axis::{AxisElement, PosetAxis};
use super::tensor::SparseIntTensor;
use crate::error::{Error, Result};

/// A tuple of axis elements, one per grid axis.
///
/// The derived ordering is a canonical total order used for deterministic
/// iteration; it is unrelated to the poset order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GridElement(pub Vec<AxisElement>);

impl GridElement {
    pub fn new(coords: Vec<AxisElement>) -> Self {
        GridElement(coords)
    }

    pub fn coords(&self) -> &[AxisElement] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Canonical byte encoding, stable across runs and platforms.
    pub fn canonical_key(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for c in &self.0 {
            match c {
                AxisElement::Index(i) => {
                    out.push(b'i');
                    out.extend_from_slice(&i.to_le_bytes());
                }
                AxisElement::Set(s) => {
                    out.push(b's');
                    out.extend_from_slice(&(s.len() as u32).to_le_bytes());
                    for v in s.iter() {
                        out.extend_from_slice(&v.to_le_bytes());
                    }
                }
            }
        }
        out
    }

    fn replace(&self, axis: usize, value: AxisElement) -> GridElement {
        let mut coords = self.0.clone();
        coords[axis] = value;
        GridElement(coords)
    }
}

impl fmt::Display for GridElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, c) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Direct product of poset axes, ordered componentwise.
#[derive(Clone, Debug)]
pub struct PosetGrid {
    axes: Vec<PosetAxis>,
}

impl PosetGrid {
    pub fn new(axes: Vec<PosetAxis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::domain("a poset grid needs at least one axis"));
        }
        Ok(PosetGrid { axes })
    }

    pub fn axes(&self) -> &[PosetAxis] {
        &self.axes
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn name(&self) -> String {
        self.axes.iter().map(|a| a.name()).collect::<Vec<_>>().join(" x ")
    }

    pub fn least(&self) -> GridElement {
        GridElement(self.axes.iter().map(|a| a.least()).collect())
    }

    pub fn contains(&self, p: &GridElement) -> bool {
        p.dim() == self.dim() && self.axes.iter().zip(&p.0).all(|(a, c)| a.contains(c))
    }

    pub fn check(&self, p: &GridElement) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::domain(format!("{p} is not an element of the grid {}", self.name())))
        }
    }

    pub fn le(&self, s: &GridElement, t: &GridElement) -> bool {
        self.axes.iter().zip(s.0.iter().zip(&t.0)).all(|(a, (x, y))| a.le(x, y))
    }

    pub fn lt(&self, s: &GridElement, t: &GridElement) -> bool {
        s != t && self.le(s, t)
    }

    /// Sum of axis ranks; strictly increases along the order.
    pub fn rank(&self, p: &GridElement) -> usize {
        self.axes.iter().zip(&p.0).map(|(a, c)| a.rank(c)).sum()
    }

    /// Covers in a product order differ from `p` in exactly one coordinate,
    /// where they are an axis cover.
    pub fn covers_up(&self, p: &GridElement) -> Result<Vec<GridElement>> {
        self.check(p)?;
        let mut out = Vec::new();
        for (k, axis) in self.axes.iter().enumerate() {
            for c in axis.covers_up(&p.0[k])? {
                out.push(p.replace(k, c));
            }
        }
        Ok(out)
    }

    pub fn covers_down(&self, p: &GridElement) -> Result<Vec<GridElement>> {
        self.check(p)?;
        let mut out = Vec::new();
        for (k, axis) in self.axes.iter().enumerate() {
            for c in axis.covers_down(&p.0[k])? {
                out.push(p.replace(k, c));
            }
        }
        Ok(out)
    }

    /// μ(q, p) as the product of axis values.
    pub fn moebius(&self, q: &GridElement, p: &GridElement) -> Result<i64> {
        self.check(q)?;
        self.check(p)?;
        let mut acc = 1i64;
        for (k, axis) in self.axes.iter().enumerate() {
            let m = axis.moebius(&q.0[k], &p.0[k])?;
            if m == 0 {
                return Ok(0);
            }
            acc = acc
                .checked_mul(m)
                .ok_or_else(|| Error::Overflow(format!("μ({q}, {p})")))?;
        }
        Ok(acc)
    }

    /// The Möbius tensor of `p`: entry at `q` is μ(q, p), built as the
    /// tensor product of the axis Möbius vectors.
    pub fn moebius_tensor(&self, p: &GridElement) -> Result<SparseIntTensor> {
        self.check(p)?;
        let mut partial: Vec<(Vec<AxisElement>, i64)> = vec![(Vec::with_capacity(self.dim()), 1)];
        for (k, axis) in self.axes.iter().enumerate() {
            let vector = axis.moebius_vector(&p.0[k])?;
            let mut next = Vec::with_capacity(partial.len() * vector.len());
            for (prefix, value) in &partial {
                for (c, m) in &vector {
                    let mut coords = prefix.clone();
                    coords.push(c.clone());
                    let v = value
                        .checked_mul(*m)
                        .ok_or_else(|| Error::Overflow(format!("Möbius tensor of {p}")))?;
                    next.push((coords, v));
                }
            }
            partial = next;
        }
        let mut t = SparseIntTensor::new();
        for (coords, v) in partial {
            t.add(GridElement(coords), v)?;
        }
        Ok(t)
    }

    /// Componentwise meet, when every axis provides one.
    pub fn meet(&self, s: &GridElement, t: &GridElement) -> Result<Option<GridElement>> {
        let mut coords = Vec::with_capacity(self.dim());
        for (k, axis) in self.axes.iter().enumerate() {
            match axis.meet(&s.0[k], &t.0[k])? {
                Some(c) => coords.push(c),
                None => return Ok(None),
            }
        }
        Ok(Some(GridElement(coords)))
    }

    /// All elements of a finite grid, sorted by rank then canonical order.
    pub fn elements(&self) -> Result<Vec<GridElement>> {
        let mut out: Vec<Vec<AxisElement>> = vec![vec![]];
        for axis in &self.axes {
            let elems = axis.elements()?;
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    elems.iter().map(move |e| {
                        let mut c = prefix.clone();
                        c.push(e.clone());
                        c
                    })
                })
                .collect();
        }
        let mut out: Vec<GridElement> = out.into_iter().map(GridElement).collect();
        out.sort_by(|a, b| self.rank(a).cmp(&self.rank(b)).then_with(|| a.cmp(b)));
        Ok(out)
    }
}
