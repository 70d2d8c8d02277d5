//! Text forms of grids and grid elements used on the command line.
//!
//! A grid is a list of axes joined by `x`: `B4`, `[3]`, `N`, or a graph
//! family `conn`, `convex`, `simplex:R` (which needs a graph). Elements are
//! written as they are printed, e.g. `({1,2}, 2, 1)`; a single-axis element
//! may drop the parentheses, as in `{1,2}`. Vertex labels are 1-based.

use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use supanova::graph::{GraphPoset, InteractionGraph};
use supanova::poset::{AxisElement, GridElement, PosetAxis, PosetGrid, VertexSet};

pub fn parse_grid(spec: &str, graph: Option<&InteractionGraph>) -> Result<PosetGrid> {
    let mut axes = Vec::new();
    for raw in split_axes(spec) {
        let t = raw.trim();
        let need_graph = || graph.cloned().ok_or_else(|| anyhow!("axis {t:?} needs --graph"));
        let axis = if let Some(n) = t.strip_prefix('B') {
            PosetAxis::Boolean(n.parse().with_context(|| format!("Boolean axis {t:?}"))?)
        } else if let Some(n) = t.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            PosetAxis::ChainBounded(n.parse().with_context(|| format!("chain axis {t:?}"))?)
        } else if t == "N" {
            PosetAxis::ChainNat
        } else if t == "conn" {
            PosetAxis::Graph(Arc::new(GraphPoset::connected(need_graph()?)))
        } else if t == "convex" {
            PosetAxis::Graph(Arc::new(GraphPoset::convex(need_graph()?)))
        } else if let Some(r) = t.strip_prefix("simplex:") {
            let r: i32 = r.parse().with_context(|| format!("simplex rank in {t:?}"))?;
            PosetAxis::Graph(Arc::new(GraphPoset::simplex(need_graph()?, r)?))
        } else {
            bail!("unknown axis {t:?}; expected B<n>, [n], N, conn, convex or simplex:R");
        };
        axes.push(axis);
    }
    Ok(PosetGrid::new(axes)?)
}

/// Splits on `×`, `*`, and on `x` unless it ends a word (as in `convex`).
fn split_axes(spec: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut prev: Option<char> = None;
    for (k, c) in spec.char_indices() {
        let word_x = c == 'x' && prev.is_some_and(|p| p.is_ascii_alphabetic() && p != 'N');
        if c == '×' || c == '*' || (c == 'x' && !word_x) {
            out.push(&spec[start..k]);
            start = k + c.len_utf8();
        }
        prev = Some(c);
    }
    out.push(&spec[start..]);
    out
}

pub fn parse_set(text: &str) -> Result<VertexSet> {
    let inner = text
        .trim()
        .strip_prefix('{')
        .and_then(|s| s.strip_suffix('}'))
        .ok_or_else(|| anyhow!("expected a set like {{1,2}}, got {text:?}"))?;
    let mut labels = Vec::new();
    for part in inner.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let v: u32 = part.parse().with_context(|| format!("vertex label {part:?}"))?;
        if v == 0 {
            bail!("vertex labels are 1-based");
        }
        labels.push(v);
    }
    Ok(VertexSet::from_one_based(&labels))
}

/// Splits on commas that are not inside braces.
fn split_top_level(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (k, c) in s.char_indices() {
        match c {
            '{' => depth += 1,
            '}' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&s[start..k]);
                start = k + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

pub fn parse_element(text: &str, grid: &PosetGrid) -> Result<GridElement> {
    let t = text.trim();
    let body = t.strip_prefix('(').and_then(|s| s.strip_suffix(')')).unwrap_or(t);
    let parts = split_top_level(body);
    if parts.len() != grid.dim() {
        bail!("element {text:?} has {} coordinates but the grid has {} axes", parts.len(), grid.dim());
    }
    let coords = parts
        .iter()
        .map(|p| {
            let p = p.trim();
            if p.starts_with('{') {
                parse_set(p).map(AxisElement::Set)
            } else {
                p.parse::<u32>().map(AxisElement::Index).with_context(|| format!("coordinate {p:?}"))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let el = GridElement::new(coords);
    grid.check(&el)?;
    Ok(el)
}
