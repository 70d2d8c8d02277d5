use std::path::Path;

use supanova::fragment::{
    extract_subsystem, heuristic_fragment, heuristic_fragment_from, phase_two_candidates, CovalentRadii, Geometry,
};
use supanova::poset::VertexSet;

const HYDROGEN: u32 = 1;

fn fixture(name: &str) -> Geometry {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    Geometry::parse_xyz(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const MOLECULES: [&str; 6] = ["benzene.xyz", "ethane.xyz", "ethene.xyz", "heptane.xyz", "hexane.xyz", "water.xyz"];

#[test]
fn fragments_partition_the_atoms() {
    for name in MOLECULES {
        let g = fixture(name);
        let f = heuristic_fragment(&g).unwrap();
        let mut seen = vec![0; g.len()];
        for frag in f.fragments() {
            assert!(!frag.is_empty(), "{name}");
            for a in frag.iter() {
                seen[a as usize] += 1;
            }
        }
        assert!(seen.iter().all(|&c| c == 1), "{name}: {seen:?}");
    }
}

#[test]
fn only_single_bonds_between_heavy_atoms_are_cut() {
    for name in MOLECULES {
        let g = fixture(name);
        let f = heuristic_fragment(&g).unwrap();
        let owner = f.owners();
        for b in g.bonds().unwrap() {
            if owner[b.i as usize] == owner[b.j as usize] {
                continue;
            }
            assert_eq!(b.order, 1, "{name}: cut bond {}-{}", b.i + 1, b.j + 1);
            let zs = [g.atoms()[b.i as usize].z, g.atoms()[b.j as usize].z];
            assert!(!zs.contains(&HYDROGEN), "{name}: hydrogen split off at {}-{}", b.i + 1, b.j + 1);
        }
    }
}

#[test]
fn result_is_a_fixed_point() {
    for name in MOLECULES {
        let g = fixture(name);
        let f = heuristic_fragment(&g).unwrap();
        assert!(phase_two_candidates(&g, f.fragments()).unwrap().is_empty(), "{name}");
        let again = heuristic_fragment_from(&g, f.clone()).unwrap();
        assert_eq!(again.canonical(), f.canonical(), "{name}");
    }
}

#[test]
fn known_fragment_counts() {
    let counts = [("heptane.xyz", 7), ("hexane.xyz", 6), ("ethane.xyz", 2), ("ethene.xyz", 1), ("water.xyz", 1)];
    for (name, n) in counts {
        assert_eq!(heuristic_fragment(&fixture(name)).unwrap().len(), n, "{name}");
    }
    // Kekule benzene: each double bond pulls its two CH units together.
    let f = heuristic_fragment(&fixture("benzene.xyz")).unwrap();
    assert_eq!(f.len(), 3);
    assert!(f.fragments().iter().all(|u| u.len() == 4));
}

#[test]
fn dimer_subsystems_carry_one_cap_per_cut_bond() {
    let g = fixture("heptane.xyz");
    let f = heuristic_fragment(&g).unwrap();
    let radii = CovalentRadii::default();
    let owner = f.owners();
    let mut caps = vec![0usize; f.len()];
    for b in g.bonds().unwrap() {
        let (fi, fj) = (owner[b.i as usize], owner[b.j as usize]);
        if fi != fj {
            caps[fi as usize] += 1;
            caps[fj as usize] += 1;
        }
    }
    for k in 0..f.len() as u32 {
        let s = extract_subsystem(&g, &f, &VertexSet::from_iter([k]), &radii).unwrap();
        assert_eq!(s.link_atoms.len(), caps[k as usize]);
        for l in &s.link_atoms {
            assert!(s.atoms.contains(l.inner) && !s.atoms.contains(l.outer));
        }
    }
    let whole = VertexSet::from_iter(0..f.len() as u32);
    let s = extract_subsystem(&g, &f, &whole, &radii).unwrap();
    assert!(s.link_atoms.is_empty());
    assert_eq!(s.total_atoms(), g.len());
}
