use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{atomic_number, element_symbol, Fragmentation, Geometry};
use crate::error::{Error, Result};
use crate::poset::VertexSet;

const HYDROGEN: u32 = 1;

/// Covalent radii in Å keyed by atomic number.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovalentRadii(BTreeMap<u32, f64>);

impl Default for CovalentRadii {
    fn default() -> Self {
        CovalentRadii(BTreeMap::from([(1, 0.31), (6, 0.76), (7, 0.71), (8, 0.66), (16, 1.05)]))
    }
}

impl CovalentRadii {
    pub fn empty() -> Self {
        CovalentRadii(BTreeMap::new())
    }

    /// Parses `symbol radius` lines on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut radii = CovalentRadii::default();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(Error::Parse { line: k + 1, msg: "expected `symbol radius`".into() });
            }
            let z = atomic_number(parts[0])
                .or_else(|| parts[0].parse().ok())
                .ok_or_else(|| Error::Parse { line: k + 1, msg: format!("unknown element {:?}", parts[0]) })?;
            let r: f64 = parts[1]
                .parse()
                .map_err(|e| Error::Parse { line: k + 1, msg: format!("{:?}: {e}", parts[1]) })?;
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::Parse { line: k + 1, msg: format!("radius must be positive, got {r}") });
            }
            radii.0.insert(z, r);
        }
        Ok(radii)
    }

    pub fn set(&mut self, z: u32, radius: f64) {
        self.0.insert(z, radius);
    }

    pub fn get(&self, z: u32) -> Result<f64> {
        self.0.get(&z).copied().ok_or_else(|| {
            let name = element_symbol(z).map_or_else(|| format!("Z={z}"), str::to_string);
            Error::Config(format!("no covalent radius for {name}"))
        })
    }
}

/// A hydrogen capping a severed bond from `inner` (kept) to `outer` (dropped).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkAtom {
    pub position: [f64; 3],
    pub inner: u32,
    pub outer: u32,
}

/// The atoms of a union of fragments plus link hydrogens.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Subsystem {
    pub atoms: VertexSet,
    pub link_atoms: Vec<LinkAtom>,
}

impl Subsystem {
    /// Atom count including link hydrogens.
    pub fn total_atoms(&self) -> usize {
        self.atoms.len() + self.link_atoms.len()
    }
}

/// Extracts F_u from the geometry and caps every severed single bond with a
/// hydrogen placed along the bond at the scaled covalent distance. Severing a
/// multiple bond is an error.
pub fn extract_subsystem(
    geometry: &Geometry,
    fragmentation: &Fragmentation,
    u: &VertexSet,
    radii: &CovalentRadii,
) -> Result<Subsystem> {
    if fragmentation.atom_count() != geometry.len() {
        return Err(Error::domain(format!(
            "fragmentation covers {} atoms but the geometry has {}",
            fragmentation.atom_count(),
            geometry.len()
        )));
    }
    let atoms = fragmentation.atoms_of(u)?;
    let bonds = geometry.require_bonds()?;
    let mut link_atoms = Vec::new();
    if atoms.is_empty() {
        return Ok(Subsystem { atoms, link_atoms });
    }
    let r_h = radii.get(HYDROGEN)?;
    let all = geometry.atoms();
    for b in bonds {
        let (inner, outer) = match (atoms.contains(b.i), atoms.contains(b.j)) {
            (true, false) => (b.i, b.j),
            (false, true) => (b.j, b.i),
            _ => continue,
        };
        if b.order != 1 {
            return Err(Error::domain(format!(
                "subsystem {u} severs the order-{} bond {}-{}",
                b.order,
                inner + 1,
                outer + 1
            )));
        }
        let (a, o) = (all[inner as usize], all[outer as usize]);
        let (r_a, r_b) = (radii.get(a.z)?, radii.get(o.z)?);
        let g = (r_a + r_h) / (r_a + r_b);
        let position = std::array::from_fn(|k| a.position[k] + g * (o.position[k] - a.position[k]));
        link_atoms.push(LinkAtom { position, inner, outer });
    }
    link_atoms.sort_by_key(|l| (l.inner, l.outer));
    Ok(Subsystem { atoms, link_atoms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fragment::heuristic_fragment;

    const ETHANE: &str = "8\nethane\n\
C 0.0 0.0 0.0\nC 1.52 0.0 0.0\n\
H -0.36 1.03 0.0\nH -0.36 -0.51 0.89\nH -0.36 -0.51 -0.89\n\
H 1.88 1.03 0.0\nH 1.88 -0.51 0.89\nH 1.88 -0.51 -0.89\n\
BONDS\n1 2 1\n1 3 1\n1 4 1\n1 5 1\n2 6 1\n2 7 1\n2 8 1\n";

    #[test]
    fn ethane_link_atom_on_axis() {
        let g = Geometry::parse_xyz(ETHANE).unwrap();
        let f = heuristic_fragment(&g).unwrap();
        assert_eq!(f.len(), 2);
        let sub = extract_subsystem(&g, &f, &VertexSet::singleton(0), &CovalentRadii::default()).unwrap();
        assert_eq!(sub.atoms.len(), 4);
        assert_eq!(sub.link_atoms.len(), 1);
        let p = sub.link_atoms[0].position;
        // distance from C scales the 1.52 Å bond by (0.76+0.31)/(0.76+0.76)
        assert!((p[0] - 1.52 * 1.07 / 1.52).abs() < 1e-12);
        assert_eq!((p[1], p[2]), (0.0, 0.0));
        let whole = extract_subsystem(&g, &f, &VertexSet::full(2), &CovalentRadii::default()).unwrap();
        assert!(whole.link_atoms.is_empty());
        assert_eq!(whole.total_atoms(), 8);
    }

    #[test]
    fn severing_double_bond_fails() {
        let g = Geometry::parse_xyz("2\nx\nC 0 0 0\nC 1.3 0 0\nBONDS\n1 2 2\n").unwrap();
        let f = Fragmentation::singletons(2);
        assert!(extract_subsystem(&g, &f, &VertexSet::singleton(0), &CovalentRadii::default()).is_err());
    }

    #[test]
    fn missing_radius_fails() {
        let g = Geometry::parse_xyz("2\nx\nC 0 0 0\nCl 1.8 0 0\nBONDS\n1 2 1\n").unwrap();
        let f = Fragmentation::singletons(2);
        let radii = CovalentRadii::default();
        assert!(matches!(
            extract_subsystem(&g, &f, &VertexSet::singleton(0), &radii),
            Err(Error::Config(_))
        ));
        let radii = CovalentRadii::parse("Cl 0.99\n").unwrap();
        assert!(extract_subsystem(&g, &f, &VertexSet::singleton(0), &radii).is_ok());
    }
}
