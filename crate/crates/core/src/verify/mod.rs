//! Brute-force property suites, run by `supanova verify`.
//!
//! Each suite draws seeded random instances, compares two independent
//! computations of the same quantity, and records every disagreement.

pub mod random;

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expansions::{
    boolean_coefficients, check_meet_subsemilattice, contribution_sum, fcr_coefficients, find_inconsistent_ideal,
    gmbe_energy, gmbe_energy_literal, gmbe_ideal, mbe_contribution, mbe_contribution_recursive, mlfcr_coefficients,
    nonzero_coefficients_outside_meets, set_element, simplex_energy, simplex_truncation, truncation_sum,
};
use crate::graph::{diagnose_conn_consistency, is_convex_subset, GraphPoset, InteractionGraph};
use crate::poset::{
    boolean_moebius, chain_moebius, combination_coefficients, top_down_coefficient_check, AxisElement, ExplicitPoset,
    GridElement, OrderIdeal, PosetAxis, PosetGrid, SparseIntTensor, VertexSet,
};

const MAX_RECORDED_FAILURES: usize = 10;

/// Outcome of one suite.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteOutcome {
    pub name: String,
    pub cases: usize,
    pub failure_count: usize,
    /// The first few failures, described.
    pub failures: Vec<String>,
    pub elapsed_s: f64,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.failure_count == 0
    }
}

struct Tally {
    cases: usize,
    failures: Vec<String>,
    count: usize,
}

impl Tally {
    fn new() -> Self {
        Tally { cases: 0, failures: Vec::new(), count: 0 }
    }

    fn check(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.count += 1;
            if self.failures.len() < MAX_RECORDED_FAILURES {
                self.failures.push(describe());
            }
        }
    }
}

type Suite = fn(&mut ChaCha8Rng, &mut Tally) -> Result<()>;

const SUITES: &[(&str, Suite)] = &[
    ("moebius", moebius_closed_forms),
    ("inversion", inversion_round_trip),
    ("product", product_theorem),
    ("coefficients", coefficient_oracles),
    ("mbe", mbe_forms),
    ("exactness", exactness),
    ("meet-consistency", meet_consistency),
    ("antichain-meets", antichain_meets_support),
    ("gmbe", gmbe_equivalence),
    ("graphs", graph_facts),
    ("simplex", simplex_equivalence),
    ("mlfcr", mlfcr_layers),
    ("fcr", fcr_identity),
];

pub fn suite_names() -> Vec<&'static str> {
    SUITES.iter().map(|(n, _)| *n).collect()
}

/// Runs one suite by name.
pub fn run_suite(name: &str, seed: u64) -> Result<SuiteOutcome> {
    let (name, suite) = SUITES
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::Config(format!("unknown suite {name:?}; known: {}", suite_names().join(", "))))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new();
    let start = Instant::now();
    suite(&mut rng, &mut tally)?;
    Ok(SuiteOutcome {
        name: (*name).to_string(),
        cases: tally.cases,
        failure_count: tally.count,
        failures: tally.failures,
        elapsed_s: start.elapsed().as_secs_f64(),
    })
}

/// Runs every suite with the same seed.
pub fn run_all(seed: u64) -> Result<Vec<SuiteOutcome>> {
    SUITES.iter().map(|(n, _)| run_suite(n, seed)).collect()
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn table_potential(table: &[f64]) -> impl FnMut(&VertexSet) -> Result<f64> + '_ {
    move |u: &VertexSet| Ok(table[u.to_mask() as usize])
}

fn grid_table_potential(table: &[f64]) -> impl FnMut(&GridElement) -> Result<f64> + '_ {
    move |p: &GridElement| {
        let u = p.coords()[0].set().expect("Boolean coordinate");
        Ok(table[u.to_mask() as usize])
    }
}

fn moebius_closed_forms(_: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    for n in 1..=10u32 {
        let axis = PosetAxis::ChainBounded(n);
        for s in 1..=n {
            for u in 1..=n {
                let rec = axis.moebius_recursive(&AxisElement::Index(s), &AxisElement::Index(u))?;
                let closed = chain_moebius(s, u);
                t.check(rec == closed, || format!("chain [{n}] mu({s},{u}): recursion {rec}, closed form {closed}"));
            }
        }
    }
    for n in 0..=6u32 {
        let axis = PosetAxis::Boolean(n);
        let all: Vec<VertexSet> = VertexSet::full(n).subsets().collect();
        for a in &all {
            for b in &all {
                let rec = axis.moebius_recursive(&AxisElement::Set(a.clone()), &AxisElement::Set(b.clone()))?;
                let closed = boolean_moebius(a, b);
                t.check(rec == closed, || format!("B_{n} mu({a},{b}): recursion {rec}, closed form {closed}"));
            }
        }
    }
    Ok(())
}

/// g(t) = Σ_{s≤t} f(s), then f(t) = Σ_{s≤t} μ(s,t) g(s).
fn inversion_round_trip(rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    for trial in 0..50 {
        let n = rng.gen_range(1..=8);
        let p = random::explicit_poset(rng, n, 0.35)?;
        let f: Vec<i64> = (0..n).map(|_| rng.gen_range(-100..=100)).collect();
        let g: Vec<i64> = (0..n).map(|x| (0..n).filter(|&s| p.le(s, x)).map(|s| f[s]).sum()).collect();
        let back: Vec<i64> = (0..n).map(|x| (0..n).filter(|&s| p.le(s, x)).map(|s| p.moebius(s, x) * g[s]).sum()).collect();
        t.check(back == f, || format!("explicit poset trial {trial}: {f:?} came back as {back:?}"));
    }
    let axis = PosetAxis::Boolean(5);
    let all: Vec<AxisElement> = axis.elements()?;
    let f: Vec<i64> = all.iter().map(|_| rng.gen_range(-100..=100)).collect();
    let g: Vec<i64> = all
        .iter()
        .map(|x| all.iter().zip(&f).filter(|(s, _)| axis.le(s, x)).map(|(_, v)| v).sum())
        .collect();
    for (i, x) in all.iter().enumerate() {
        let mut back = 0;
        for (j, s) in all.iter().enumerate() {
            if axis.le(s, x) {
                back += axis.moebius(s, x)? * g[j];
            }
        }
        t.check(back == f[i], || format!("B_5 at {x}: {back} vs {}", f[i]));
    }
    Ok(())
}

fn product_theorem(_: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    let grid = PosetGrid::new(vec![PosetAxis::ChainBounded(3), PosetAxis::Boolean(3)])?;
    let elements = grid.elements()?;
    let explicit = ExplicitPoset::from_relation(elements.len(), |a, b| grid.le(&elements[a], &elements[b]))?;
    for (a, s) in elements.iter().enumerate() {
        for (b, u) in elements.iter().enumerate() {
            let direct = explicit.moebius(a, b);
            let product = grid.moebius(s, u)?;
            t.check(direct == product, || format!("mu({s},{u}): recursion {direct}, product {product}"));
        }
    }
    Ok(())
}

fn brute_force_coefficients(grid: &PosetGrid, ideal: &OrderIdeal) -> Result<SparseIntTensor> {
    let mut d = SparseIntTensor::new();
    for s in ideal.iter() {
        let mut c = 0;
        for u in ideal.iter() {
            if grid.le(s, u) {
                c += grid.moebius(s, u)?;
            }
        }
        d.add(s.clone(), c)?;
    }
    Ok(d)
}

fn incremental_coefficients(grid: &PosetGrid, ideal: &OrderIdeal) -> Result<SparseIntTensor> {
    let mut order: Vec<&GridElement> = ideal.iter().collect();
    order.sort_by_key(|p| grid.rank(p));
    let mut built = OrderIdeal::empty();
    let mut d = SparseIntTensor::new();
    for p in order {
        built.insert(grid, p.clone())?;
        d.add_scaled(&grid.moebius_tensor(p)?, 1)?;
    }
    Ok(d)
}

fn coefficient_oracles(rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    let grids = [
        PosetGrid::new(vec![PosetAxis::Boolean(5)])?,
        PosetGrid::new(vec![PosetAxis::Boolean(3), PosetAxis::ChainBounded(3), PosetAxis::ChainBounded(3)])?,
    ];
    for grid in &grids {
        for trial in 0..100 {
            let ideal = random::ideal(rng, grid, 4)?;
            let d = combination_coefficients(grid, &ideal)?;
            let brute = brute_force_coefficients(grid, &ideal)?;
            let inc = incremental_coefficients(grid, &ideal)?;
            let top_down = top_down_coefficient_check(grid, &ideal)?;
            t.check(d == brute && d == inc && top_down, || {
                format!("{} trial {trial}: tensors differ or top-down identity fails", grid.name())
            });
        }
    }
    Ok(())
}

fn mbe_forms(rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    for _ in 0..5 {
        let table = random::potential_table(rng, 5, false);
        for u in VertexSet::full(5).subsets() {
            let a = mbe_contribution(table_potential(&table), &u)?;
            let b = mbe_contribution_recursive(table_potential(&table), &u)?;
            t.check((a - b).abs() <= 1e-12, || format!("contribution of {u}: {a} vs {b}"));
        }
    }
    for m in 1..=5 {
        let grid = PosetGrid::new(vec![PosetAxis::Boolean(m)])?;
        for _ in 0..10 {
            let ideal = random::ideal(rng, &grid, 3)?;
            let table = random::potential_table(rng, m, false);
            let a = truncation_sum(&grid, &ideal, grid_table_potential(&table))?;
            let b = contribution_sum(&grid, &ideal, grid_table_potential(&table))?;
            t.check((a - b).abs() <= 1e-12, || format!("B_{m} truncation {a} vs contribution sum {b}"));
        }
    }
    Ok(())
}

fn exactness(rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    for m in 0..=6 {
        let grid = PosetGrid::new(vec![PosetAxis::Boolean(m)])?;
        let full = OrderIdeal::generated_by(&grid, [set_element(VertexSet::full(m))])?;
        for _ in 0..5 {
            let table = random::potential_table(rng, m, false);
            let s = truncation_sum(&grid, &full, grid_table_potential(&table))?;
            let top = table[VertexSet::full(m).to_mask() as usize];
            t.check(s == top, || format!("full B_{m} truncation {s} vs top value {top}"));
        }
    }
    Ok(())
}

/// Meet-closed subposets of B_4 are exactly the combination-consistent ones.
fn meet_consistency(rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    let grid = PosetGrid::new(vec![PosetAxis::Boolean(4)])?;
    for trial in 0..500 {
        let mut q: BTreeSet<VertexSet> = (0..16u64).filter(|_| rng.gen_bool(0.4)).map(VertexSet::from_mask).collect();
        if trial % 2 == 1 {
            q = random::intersection_closure(q);
        }
        let q: Vec<GridElement> = q.into_iter().map(set_element).collect();
        let closed = check_meet_subsemilattice(&grid, &q)?.closed;
        let inconsistent = find_inconsistent_ideal(&grid, &q, 1 << 16)?;
        t.check(closed == inconsistent.is_none(), || {
            format!("trial {trial}: meet-closed = {closed}, inconsistent ideal = {inconsistent:?}")
        });
    }
    Ok(())
}

/// Nonzero coefficients occur only at meets of antichain members, on random
/// meet semilattices.
fn antichain_meets_support(rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    for trial in 0..100 {
        let seeds = rng.gen_range(2..=6);
        let (poset, _) = random::meet_semilattice(rng, 4, seeds)?;
        let grid = PosetGrid::new(vec![PosetAxis::explicit(poset)?])?;
        let ideal = random::ideal(rng, &grid, 3)?;
        let outside = nonzero_coefficients_outside_meets(&grid, &ideal)?;
        t.check(outside.is_none(), || format!("trial {trial}: nonzero coefficient at {}", outside.unwrap()));
    }
    Ok(())
}

fn gmbe_equivalence(rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    for trial in 0..100 {
        let m = rng.gen_range(2..=8u32);
        let k = rng.gen_range(1..=4usize);
        let fragments: Vec<VertexSet> =
            (0..k).map(|_| VertexSet::from_mask(rng.gen_range(1..1u64 << m))).collect();
        let n = rng.gen_range(1..=k);
        let table = random::potential_table(rng, m, true);
        let literal = gmbe_energy_literal(&fragments, n, table_potential(&table))?;
        let collected = gmbe_energy(&fragments, n, table_potential(&table))?;
        let (grid, ideal) = gmbe_ideal(m, &fragments, n)?;
        let truncated = truncation_sum(&grid, &ideal, grid_table_potential(&table))?;
        t.check(rel_close(literal, truncated, 1e-12) && rel_close(collected, truncated, 1e-12), || {
            format!("trial {trial} (M={m}, K={k}, n={n}): literal {literal}, collected {collected}, ideal {truncated}")
        });
    }
    Ok(())
}

fn graph_facts(rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    let ring = InteractionGraph::from_one_based(6, &[(1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (1, 6)])?;
    let report = diagnose_conn_consistency(&ring);
    let a = VertexSet::from_one_based(&[1, 2, 3, 4]);
    let b = VertexSet::from_one_based(&[1, 4, 5, 6]);
    let meet = a.intersection(&b);
    t.check(
        !report.consistent
            && ring.is_connected_subset(&a)?
            && ring.is_connected_subset(&b)?
            && meet == VertexSet::from_one_based(&[1, 4])
            && !ring.is_connected_subset(&meet)?,
        || "closed hexane ring: {1,2,3,4} ∩ {1,4,5,6} not flagged".into(),
    );

    let benzene = GraphPoset::convex(InteractionGraph::cycle(6));
    let convex = |labels: &[u32]| is_convex_subset(benzene.oracle(), &VertexSet::from_one_based(labels));
    t.check(convex(&[1, 2, 3])? && !convex(&[1, 4, 5, 6])?, || "benzene convexity facts".into());
    let listed: BTreeSet<VertexSet> = benzene.elements()?.into_iter().collect();
    let mut brute = BTreeSet::from([VertexSet::empty()]);
    for u in VertexSet::full(6).subsets().filter(|u| !u.is_empty()) {
        if is_convex_subset(benzene.oracle(), &u)? {
            brute.insert(u);
        }
    }
    t.check(listed == brute, || format!("M_g[C6] lists {} sets, brute force finds {}", listed.len(), brute.len()));

    for trial in 0..200 {
        let n = rng.gen_range(1..=8);
        let p = rng.gen_range(0.2..0.8);
        let g = random::graph(rng, n, p)?;
        let r = diagnose_conn_consistency(&g);
        t.check(r.exhaustive_consistent == Some(r.consistent), || {
            format!("random graph {trial} {:?}: forbidden-subgraph verdict {}, exhaustive {:?}", g.edges(), r.consistent, r.exhaustive_consistent)
        });
    }
    Ok(())
}

fn simplex_equivalence(rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    for trial in 0..50 {
        let n = rng.gen_range(1..=8u32);
        let p = rng.gen_range(0.2..0.9);
        let g = random::graph(rng, n, p)?;
        let r = rng.gen_range(0..=3u32.min(n - 1));
        let table = random::potential_table(rng, n, true);
        let literal = simplex_energy(&g, r, table_potential(&table))?;
        let truncated = simplex_truncation(&g, r, table_potential(&table))?;
        t.check(rel_close(literal, truncated, 1e-12), || {
            format!("trial {trial} (M={n}, R={r}): literal {literal}, truncation {truncated}")
        });
    }
    Ok(())
}

fn mlfcr_layers(rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    for trial in 0..100 {
        let first = random::set_ideal(rng, 4, 3);
        let second = random::sub_ideal(rng, &first);
        let third = random::sub_ideal(rng, &second);
        let c = mlfcr_coefficients(4, &[first, second, third])?;
        t.check(c.agree() && c.layer_sum_holds(), || format!("nested chain {trial}: {c:?}"));
    }
    Ok(())
}

fn fcr_identity(rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    for trial in 0..100 {
        let family = random::set_ideal(rng, 5, 4);
        let mut fcr: BTreeMap<VertexSet, i64> = fcr_coefficients(&family)?;
        fcr.retain(|_, c| *c != 0);
        let d = boolean_coefficients(5, &family)?;
        t.check(fcr == d, || format!("family {trial}: FCR {fcr:?} vs combination {d:?}"));
    }
    Ok(())
}
