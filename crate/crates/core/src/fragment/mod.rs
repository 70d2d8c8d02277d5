//! Molecular geometries, heuristic fragmentation and subsystem extraction.

mod heuristic;
mod subsystem;

pub use heuristic::{heuristic_fragment, heuristic_fragment_from, phase_two_candidates};
pub use subsystem::{extract_subsystem, CovalentRadii, LinkAtom, Subsystem};

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::InteractionGraph;
use crate::poset::VertexSet;

const SYMBOLS: [&str; 36] = [
    "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne", "Na", "Mg", "Al", "Si", "P", "S", "Cl", "Ar", "K", "Ca",
    "Sc", "Ti", "V", "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr",
];

/// Atomic number for an element symbol (case-insensitive), for Z ≤ 36.
pub fn atomic_number(symbol: &str) -> Option<u32> {
    SYMBOLS
        .iter()
        .position(|s| s.eq_ignore_ascii_case(symbol))
        .map(|k| k as u32 + 1)
}

pub fn element_symbol(z: u32) -> Option<&'static str> {
    SYMBOLS.get((z as usize).checked_sub(1)?).copied()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub z: u32,
    /// Cartesian position in Å.
    pub position: [f64; 3],
}

/// A covalent bond between atoms `i` and `j` (0-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bond {
    pub i: u32,
    pub j: u32,
    pub order: u32,
}

/// Atoms with optional bond information.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    atoms: Vec<Atom>,
    bonds: Option<Vec<Bond>>,
}

impl Geometry {
    pub fn new(atoms: Vec<Atom>, bonds: Option<Vec<Bond>>) -> Result<Self> {
        for (k, a) in atoms.iter().enumerate() {
            if a.z == 0 {
                return Err(Error::domain(format!("atom {} has atomic number 0", k + 1)));
            }
            if a.position.iter().any(|c| !c.is_finite()) {
                return Err(Error::domain(format!("atom {} has a non-finite coordinate", k + 1)));
            }
        }
        if let Some(bonds) = &bonds {
            let n = atoms.len() as u32;
            for b in bonds {
                if b.i >= n || b.j >= n || b.i == b.j {
                    return Err(Error::domain(format!("invalid bond {}-{}", b.i + 1, b.j + 1)));
                }
                if b.order == 0 {
                    return Err(Error::domain(format!("bond {}-{} has order 0", b.i + 1, b.j + 1)));
                }
            }
        }
        Ok(Geometry { atoms, bonds })
    }

    /// Parses XYZ text: an atom count, a comment line, then `symbol x y z`
    /// lines, optionally followed by a `BONDS` line and `i j order` lines
    /// with 1-based atom indices.
    pub fn parse_xyz(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let count = loop {
            let Some((k, line)) = lines.next() else {
                return Err(Error::Parse { line: 1, msg: "missing atom count".into() });
            };
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            break t
                .parse::<usize>()
                .map_err(|e| Error::Parse { line: k + 1, msg: format!("atom count {t:?}: {e}") })?;
        };
        lines.next(); // comment
        let mut atoms = Vec::with_capacity(count);
        while atoms.len() < count {
            let Some((k, line)) = lines.next() else {
                return Err(Error::Parse {
                    line: text.lines().count(),
                    msg: format!("expected {count} atoms, found {}", atoms.len()),
                });
            };
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.is_empty() {
                continue;
            }
            if parts.len() < 4 {
                return Err(Error::Parse { line: k + 1, msg: "expected `symbol x y z`".into() });
            }
            let z = match atomic_number(parts[0]) {
                Some(z) => z,
                None => parts[0]
                    .parse::<u32>()
                    .map_err(|_| Error::Parse { line: k + 1, msg: format!("unknown element {:?}", parts[0]) })?,
            };
            let mut position = [0.0; 3];
            for (c, p) in position.iter_mut().zip(&parts[1..4]) {
                *c = p
                    .parse::<f64>()
                    .map_err(|e| Error::Parse { line: k + 1, msg: format!("coordinate {p:?}: {e}") })?;
            }
            atoms.push(Atom { z, position });
        }
        let mut bonds = None;
        for (k, line) in lines {
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            if t.eq_ignore_ascii_case("BONDS") {
                bonds.get_or_insert_with(Vec::new);
                continue;
            }
            let Some(list) = bonds.as_mut() else {
                return Err(Error::Parse { line: k + 1, msg: "unexpected content after the atom block".into() });
            };
            let parts: Vec<&str> = t.split_whitespace().collect();
            if parts.len() != 2 && parts.len() != 3 {
                return Err(Error::Parse { line: k + 1, msg: "expected `i j order`".into() });
            }
            let num = |s: &str| {
                s.parse::<u32>().map_err(|e| Error::Parse { line: k + 1, msg: format!("{s:?}: {e}") })
            };
            let (i, j) = (num(parts[0])?, num(parts[1])?);
            let order = if parts.len() == 3 { num(parts[2])? } else { 1 };
            if i == 0 || j == 0 {
                return Err(Error::Parse { line: k + 1, msg: "atom indices are 1-based".into() });
            }
            list.push(Bond { i: i - 1, j: j - 1, order });
        }
        Geometry::new(atoms, bonds)
    }

    pub fn to_xyz(&self, comment: &str) -> String {
        let mut out = format!("{}\n{}\n", self.atoms.len(), comment);
        for a in &self.atoms {
            let sym = element_symbol(a.z).map_or_else(|| a.z.to_string(), str::to_string);
            let _ = writeln!(out, "{sym} {:.10} {:.10} {:.10}", a.position[0], a.position[1], a.position[2]);
        }
        if let Some(bonds) = &self.bonds {
            out.push_str("BONDS\n");
            for b in bonds {
                let _ = writeln!(out, "{} {} {}", b.i + 1, b.j + 1, b.order);
            }
        }
        out
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn bonds(&self) -> Option<&[Bond]> {
        self.bonds.as_deref()
    }

    pub(crate) fn require_bonds(&self) -> Result<&[Bond]> {
        self.bonds().ok_or_else(|| {
            Error::precondition(
                "the geometry has no bond information; supply a BONDS section or run a bond-perception step first",
            )
        })
    }

    pub fn positions(&self) -> Vec<[f64; 3]> {
        self.atoms.iter().map(|a| a.position).collect()
    }

    /// Graph with one edge per covalent bond.
    pub fn bond_graph(&self) -> Result<InteractionGraph> {
        let edges: Vec<(u32, u32)> = self.require_bonds()?.iter().map(|b| (b.i, b.j)).collect();
        InteractionGraph::new(self.atoms.len() as u32, &edges)
    }

    /// Order of the bond between `i` and `j`, if bonded.
    pub fn bond_order(&self, i: u32, j: u32) -> Option<u32> {
        self.bonds()?
            .iter()
            .find(|b| (b.i == i && b.j == j) || (b.i == j && b.j == i))
            .map(|b| b.order)
    }
}

/// A partition of the atom indices `0..M` into nonempty fragments.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fragmentation {
    fragments: Vec<VertexSet>,
}

impl Fragmentation {
    /// Validates a partition of `0..atom_count`. Fragments are kept in the
    /// order given.
    pub fn new(atom_count: usize, fragments: Vec<VertexSet>) -> Result<Self> {
        let mut owner = vec![false; atom_count];
        for (k, f) in fragments.iter().enumerate() {
            if f.is_empty() {
                return Err(Error::domain(format!("fragment {} is empty", k + 1)));
            }
            for a in f.iter() {
                let slot = owner
                    .get_mut(a as usize)
                    .ok_or_else(|| Error::domain(format!("fragment {} names atom {} of {atom_count}", k + 1, a + 1)))?;
                if *slot {
                    return Err(Error::domain(format!("atom {} appears in two fragments", a + 1)));
                }
                *slot = true;
            }
        }
        if let Some(missing) = owner.iter().position(|o| !o) {
            return Err(Error::domain(format!("atom {} belongs to no fragment", missing + 1)));
        }
        Ok(Fragmentation { fragments })
    }

    pub fn singletons(atom_count: usize) -> Self {
        Fragmentation { fragments: (0..atom_count as u32).map(VertexSet::singleton).collect() }
    }

    /// Parses one fragment per line as 1-based atom indices.
    pub fn parse(text: &str, atom_count: usize) -> Result<Self> {
        let mut fragments = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let labels = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| match s.parse::<u32>() {
                    Ok(0) => Err(Error::Parse { line: k + 1, msg: "atom indices are 1-based".into() }),
                    Ok(v) => Ok(v),
                    Err(e) => Err(Error::Parse { line: k + 1, msg: format!("{s:?}: {e}") }),
                })
                .collect::<Result<Vec<u32>>>()?;
            fragments.push(VertexSet::from_one_based(&labels));
        }
        Fragmentation::new(atom_count, fragments)
    }

    /// One line per fragment, 1-based atom indices separated by spaces.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for f in &self.fragments {
            let labels: Vec<String> = f.iter().map(|a| (a + 1).to_string()).collect();
            out.push_str(&labels.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn fragments(&self) -> &[VertexSet] {
        &self.fragments
    }

    pub fn len(&self) -> usize {
        self.fragments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fragments.is_empty()
    }

    pub fn atom_count(&self) -> usize {
        self.fragments.iter().map(VertexSet::len).sum()
    }

    /// Fragment index of every atom.
    pub fn owners(&self) -> Vec<u32> {
        let mut owner = vec![0; self.atom_count()];
        for (k, f) in self.fragments.iter().enumerate() {
            for a in f.iter() {
                owner[a as usize] = k as u32;
            }
        }
        owner
    }

    /// F_u: the union of the fragments indexed by `u`.
    pub fn atoms_of(&self, u: &VertexSet) -> Result<VertexSet> {
        let mut atoms = Vec::new();
        for k in u.iter() {
            let f = self
                .fragments
                .get(k as usize)
                .ok_or_else(|| Error::domain(format!("fragment {} of {}", k + 1, self.fragments.len())))?;
            atoms.extend(f.iter());
        }
        Ok(VertexSet::new(atoms))
    }

    /// The same partition with fragments sorted by smallest atom.
    pub fn canonical(&self) -> Self {
        let mut fragments = self.fragments.clone();
        fragments.sort_by_key(|f| f.iter().next());
        Fragmentation { fragments }
    }
}

/// G / F: one vertex per fragment, with an edge wherever some edge of `g`
/// joins the two fragments.
pub fn quotient_graph(g: &InteractionGraph, f: &Fragmentation) -> Result<InteractionGraph> {
    if f.atom_count() != g.vertex_count() as usize {
        return Err(Error::domain(format!(
            "fragmentation covers {} atoms but the graph has {} vertices",
            f.atom_count(),
            g.vertex_count()
        )));
    }
    let owner = f.owners();
    let edges: Vec<(u32, u32)> = g
        .edges()
        .into_iter()
        .map(|(i, j)| (owner[i as usize], owner[j as usize]))
        .filter(|(a, b)| a != b)
        .collect();
    InteractionGraph::new(f.len() as u32, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    const WATER: &str = "3\nwater\nO 0.0 0.0 0.117\nH 0.0 0.757 -0.467\nH 0.0 -0.757 -0.467\nBONDS\n1 2 1\n1 3 1\n";

    #[test]
    fn parses_xyz_with_bonds() {
        let g = Geometry::parse_xyz(WATER).unwrap();
        assert_eq!(g.len(), 3);
        assert_eq!(g.atoms()[0].z, 8);
        assert_eq!(g.bonds().unwrap().len(), 2);
        assert_eq!(g.bond_order(2, 0), Some(1));
        let again = Geometry::parse_xyz(&g.to_xyz("water")).unwrap();
        assert_eq!(again, g);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Geometry::parse_xyz("2\nx\nH 0 0 0\n").is_err());
        assert!(Geometry::parse_xyz("1\nx\nXx 0 0 0\n").is_err());
        assert!(Geometry::parse_xyz("1\nx\nH 0 0 0\nBONDS\n1 1 1\n").is_err());
        assert!(Geometry::parse_xyz("1\nx\nH 0 0 0\nstray\n").is_err());
        let no_bonds = Geometry::parse_xyz("1\nx\nH 0 0 0\n").unwrap();
        assert!(matches!(no_bonds.bond_graph(), Err(Error::Precondition(_))));
    }

    #[test]
    fn fragmentation_validation() {
        assert!(Fragmentation::new(3, vec![VertexSet::new(vec![0, 1])]).is_err());
        assert!(Fragmentation::new(2, vec![VertexSet::new(vec![0, 1]), VertexSet::new(vec![1])]).is_err());
        let f = Fragmentation::parse("1 2\n3\n", 3).unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!(f.owners(), vec![0, 0, 1]);
        assert_eq!(Fragmentation::parse(&f.to_text(), 3).unwrap(), f);
    }

    #[test]
    fn quotient_examples() {
        let g = InteractionGraph::path(4);
        let f = Fragmentation::new(4, vec![VertexSet::new(vec![0, 1]), VertexSet::new(vec![2, 3])]).unwrap();
        assert_eq!(quotient_graph(&g, &f).unwrap().edges(), vec![(0, 1)]);
        let one = Fragmentation::new(4, vec![VertexSet::full(4)]).unwrap();
        let q = quotient_graph(&g, &one).unwrap();
        assert_eq!((q.vertex_count(), q.edge_count()), (1, 0));
        let empty = InteractionGraph::new(4, &[]).unwrap();
        assert_eq!(quotient_graph(&empty, &f).unwrap().edge_count(), 0);
    }
}
