//! Named expansions written directly in terms of combination coefficients,
//! each paired with a literal form that serves as a cross-check.
//!
//! Set potentials are passed as closures `FnMut(&VertexSet) -> Result<f64>`
//! over subsets of `{0, ..., M-1}`. The brute-force routines here are
//! correctness oracles and are size-capped accordingly.

mod consistency;

use std::collections::{BTreeMap, BTreeSet};

use crate::adaptive::GridEvaluator;
use crate::error::{Error, Result};
use crate::graph::{simplex_ideal, InteractionGraph};
use crate::poset::{combination_coefficients, AxisElement, GridElement, OrderIdeal, PosetAxis, PosetGrid, VertexSet};
use crate::sum::CompensatedSum;

pub use consistency::{
    antichain_meets, check_meet_subsemilattice, consistent_ideal, find_inconsistent_ideal, fragment_union_subposet,
    ideals_of_subposet, nonzero_coefficients_outside_meets, subposet_coefficients, CoefficientMismatch,
    ConsistencyCheck, MeetClosure,
};

/// Largest M for which B_M is enumerated by the verifiers.
pub const MAX_BRUTE_FORCE_VERTICES: u32 = 8;
/// Largest subposet handled by the consistency checkers.
pub const MAX_SUBPOSET_SIZE: usize = 64;
/// Largest number of n-mers for the literal GMBE sum (2^K′ − 1 terms).
pub const MAX_LITERAL_NMERS: usize = 20;

fn check_vertex_count(m: u32) -> Result<()> {
    if m > MAX_BRUTE_FORCE_VERTICES {
        return Err(Error::LimitExceeded(format!(
            "brute-force expansions are capped at M = {MAX_BRUTE_FORCE_VERTICES}, got {m}"
        )));
    }
    Ok(())
}

/// The single-axis grid B_M.
pub fn boolean_grid(m: u32) -> Result<PosetGrid> {
    check_vertex_count(m)?;
    PosetGrid::new(vec![PosetAxis::Boolean(m)])
}

pub fn set_element(u: VertexSet) -> GridElement {
    GridElement::new(vec![AxisElement::Set(u)])
}

fn element_set(p: &GridElement) -> Result<&VertexSet> {
    p.coords()
        .first()
        .and_then(AxisElement::set)
        .ok_or_else(|| Error::domain(format!("{p} is not a subset element")))
}

fn sign(k: usize) -> i64 {
    if k % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Ṽ_u = Σ_{v⊆u} (−1)^{|u−v|} V_v.
pub fn mbe_contribution<F>(mut potential: F, u: &VertexSet) -> Result<f64>
where
    F: FnMut(&VertexSet) -> Result<f64>,
{
    check_vertex_count(u.len() as u32)?;
    let mut acc = CompensatedSum::new();
    for v in u.subsets() {
        acc.add(sign(u.len() - v.len()) as f64 * potential(&v)?);
    }
    Ok(acc.value())
}

/// Ṽ_u = V_u − Σ_{v⊂u} Ṽ_v, evaluated bottom-up over the subsets of `u`.
pub fn mbe_contribution_recursive<F>(mut potential: F, u: &VertexSet) -> Result<f64>
where
    F: FnMut(&VertexSet) -> Result<f64>,
{
    check_vertex_count(u.len() as u32)?;
    let mut subsets: Vec<VertexSet> = u.subsets().collect();
    subsets.sort_by_key(VertexSet::len);
    let mut memo: BTreeMap<VertexSet, f64> = BTreeMap::new();
    for w in subsets {
        let mut acc = CompensatedSum::new();
        acc.add(potential(&w)?);
        for x in w.subsets().filter(|x| x.len() < w.len()) {
            acc.add(-memo[&x]);
        }
        memo.insert(w, acc.value());
    }
    Ok(memo[u])
}

/// S_I = Σ_{s∈I} D_s V_s, skipping zero coefficients.
pub fn truncation_sum<F>(grid: &PosetGrid, ideal: &OrderIdeal, mut value: F) -> Result<f64>
where
    F: FnMut(&GridElement) -> Result<f64>,
{
    let d = combination_coefficients(grid, ideal)?;
    let mut acc = CompensatedSum::new();
    for (p, c) in d.iter() {
        acc.add(c as f64 * value(p)?);
    }
    Ok(acc.value())
}

/// [`truncation_sum`] with values supplied by an evaluator.
pub fn evaluate_truncation<G: GridEvaluator + ?Sized>(grid: &PosetGrid, ideal: &OrderIdeal, evaluator: &G) -> Result<f64> {
    truncation_sum(grid, ideal, |p| evaluator.evaluate_element(p).map(|r| r.value))
}

/// Σ_{s∈I} Ṽ_s with each contribution obtained by the recursion
/// Ṽ_s = V_s − Σ_{t<s} Ṽ_t inside the ideal. Independent of Möbius values.
pub fn contribution_sum<F>(grid: &PosetGrid, ideal: &OrderIdeal, mut value: F) -> Result<f64>
where
    F: FnMut(&GridElement) -> Result<f64>,
{
    let mut order: Vec<&GridElement> = ideal.iter().collect();
    order.sort_by_key(|p| grid.rank(p));
    let mut contributions: BTreeMap<&GridElement, f64> = BTreeMap::new();
    for &s in &order {
        let mut acc = CompensatedSum::new();
        acc.add(value(s)?);
        for (t, c) in &contributions {
            if grid.lt(t, s) {
                acc.add(-c);
            }
        }
        contributions.insert(s, acc.value());
    }
    Ok(contributions.values().copied().collect::<CompensatedSum>().value())
}

/// The n-body ideal of B_M: all subsets with at most `n` elements.
pub fn n_body_ideal(m: u32, n: u32) -> Result<(PosetGrid, OrderIdeal)> {
    let grid = boolean_grid(m)?;
    let full = VertexSet::full(m);
    let top = n.min(m) as usize;
    let generators: Vec<GridElement> = full.subsets().filter(|u| u.len() == top).map(set_element).collect();
    let ideal = OrderIdeal::generated_by(&grid, generators)?;
    Ok((grid, ideal))
}

fn binomial(n: i64, k: i64) -> i64 {
    if k < 0 || n < k {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1i64, |acc, i| acc * (n - i) / (i + 1))
}

/// Closed form of the n-body combination coefficient of a k-subset in B_M:
/// (−1)^{n−k} C(M−k−1, n−k) for k ≤ n < M.
pub fn n_body_coefficient(m: u32, n: u32, k: u32) -> i64 {
    if k > m || k > n.min(m) {
        0
    } else if n >= m {
        i64::from(k == m)
    } else {
        sign((n - k) as usize) * binomial(i64::from(m - k - 1), i64::from(n - k))
    }
}

fn require_zero_empty<F>(potential: &mut F) -> Result<()>
where
    F: FnMut(&VertexSet) -> Result<f64>,
{
    let v0 = potential(&VertexSet::empty())?;
    if v0 != 0.0 {
        return Err(Error::precondition(format!("the empty-set potential must vanish, got {v0}")));
    }
    Ok(())
}

/// The C(K, n) unions of n fragments, in lexicographic order of the
/// fragment index tuples. Coinciding unions are kept as separate entries.
pub fn gmbe_nmers(fragments: &[VertexSet], n: usize) -> Result<Vec<VertexSet>> {
    let k = fragments.len();
    if k == 0 || n == 0 || n > k {
        return Err(Error::precondition(format!("need 1 <= n <= K, got n = {n}, K = {k}")));
    }
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        out.push(idx.iter().fold(VertexSet::empty(), |acc, &i| acc.union(&fragments[i])));
        let Some(pos) = (0..n).rev().find(|&i| idx[i] != i + k - n) else { break };
        idx[pos] += 1;
        for j in pos + 1..n {
            idx[j] = idx[j - 1] + 1;
        }
    }
    Ok(out)
}

/// Intersection coefficients d_û such that the generalized MBE energy is
/// Σ d_û V_û. Built one n-mer at a time from 1_{A∪B} = 1_A + 1_B − 1_{A∩B}.
pub fn gmbe_coefficients(fragments: &[VertexSet], n: usize) -> Result<BTreeMap<VertexSet, i64>> {
    let mut coeffs: BTreeMap<VertexSet, i64> = BTreeMap::new();
    for a in gmbe_nmers(fragments, n)? {
        let mut next = coeffs.clone();
        *next.entry(a.clone()).or_insert(0) += 1;
        for (y, c) in &coeffs {
            *next.entry(a.intersection(y)).or_insert(0) -= c;
        }
        next.retain(|_, c| *c != 0);
        coeffs = next;
    }
    Ok(coeffs)
}

/// Generalized MBE energy with repeated intersections collected. Requires
/// the empty-set potential to vanish.
pub fn gmbe_energy<F>(fragments: &[VertexSet], n: usize, mut potential: F) -> Result<f64>
where
    F: FnMut(&VertexSet) -> Result<f64>,
{
    require_zero_empty(&mut potential)?;
    let mut acc = CompensatedSum::new();
    for (u, c) in gmbe_coefficients(fragments, n)? {
        acc.add(c as f64 * potential(&u)?);
    }
    Ok(acc.value())
}

/// Generalized MBE energy as the literal alternating sum over every
/// nonempty collection of n-mers.
pub fn gmbe_energy_literal<F>(fragments: &[VertexSet], n: usize, mut potential: F) -> Result<f64>
where
    F: FnMut(&VertexSet) -> Result<f64>,
{
    require_zero_empty(&mut potential)?;
    let nmers = gmbe_nmers(fragments, n)?;
    if nmers.len() > MAX_LITERAL_NMERS {
        return Err(Error::LimitExceeded(format!(
            "{} n-mers exceed the literal-sum cap of {MAX_LITERAL_NMERS}",
            nmers.len()
        )));
    }
    let mut acc = CompensatedSum::new();
    for mask in 1u64..(1u64 << nmers.len()) {
        let mut members = (0..nmers.len()).filter(|i| mask >> i & 1 == 1);
        let first = members.next().expect("mask is nonzero");
        let inter = members.fold(nmers[first].clone(), |acc, i| acc.intersection(&nmers[i]));
        acc.add(-sign(mask.count_ones() as usize) as f64 * potential(&inter)?);
    }
    Ok(acc.value())
}

/// The ideal of B_M generated by the n-mers, whose truncation reproduces
/// the generalized MBE energy when the empty-set potential vanishes.
pub fn gmbe_ideal(m: u32, fragments: &[VertexSet], n: usize) -> Result<(PosetGrid, OrderIdeal)> {
    let grid = boolean_grid(m)?;
    let gens: Vec<GridElement> = gmbe_nmers(fragments, n)?.into_iter().map(set_element).collect();
    let ideal = OrderIdeal::generated_by(&grid, gens)?;
    Ok((grid, ideal))
}

fn check_downward_closed(family: &BTreeSet<VertexSet>) -> Result<()> {
    for u in family {
        if let Some(v) = u.iter().find(|&v| !family.contains(&u.without(v))) {
            return Err(Error::precondition(format!(
                "family is not downward-closed: {u} is present but {} is not",
                u.without(v)
            )));
        }
    }
    Ok(())
}

/// FCR coefficients p_f = Σ_{f′⊇f, f′∈family} (−1)^{|f′|−|f|}, for every
/// member (zeros included).
pub fn fcr_coefficients(family: &BTreeSet<VertexSet>) -> Result<BTreeMap<VertexSet, i64>> {
    check_downward_closed(family)?;
    Ok(family
        .iter()
        .map(|f| {
            let p = family.iter().filter(|g| f.is_subset(g)).map(|g| sign(g.len() - f.len())).sum();
            (f.clone(), p)
        })
        .collect())
}

/// Nonzero combination coefficients of a downward-closed family of subsets
/// of {0, ..., M-1}, keyed by subset.
pub fn boolean_coefficients(m: u32, family: &BTreeSet<VertexSet>) -> Result<BTreeMap<VertexSet, i64>> {
    let grid = boolean_grid(m)?;
    let ideal = OrderIdeal::from_elements(&grid, family.iter().cloned().map(set_element))?;
    let d = combination_coefficients(&grid, &ideal)?;
    d.iter().map(|(p, c)| Ok((element_set(p)?.clone(), c))).collect()
}

/// Per-layer coefficients of a nested chain of ideals I₁ ⊇ ⋯ ⊇ I_n of B_M,
/// viewed as one ideal of B_M × [n]. Only nonzero entries are stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayeredCoefficients {
    /// From the combination coefficients on the product grid.
    pub direct: Vec<BTreeMap<VertexSet, i64>>,
    /// D^(I_n) on the top layer, D^(I_i) − D^(I_{i+1}) below it.
    pub closed_form: Vec<BTreeMap<VertexSet, i64>>,
    /// D^(I₁), the coefficients of the union of the layers.
    pub union: BTreeMap<VertexSet, i64>,
}

impl LayeredCoefficients {
    pub fn agree(&self) -> bool {
        self.direct == self.closed_form
    }

    /// Whether the direct layer coefficients sum to those of the union.
    pub fn layer_sum_holds(&self) -> bool {
        let mut total: BTreeMap<VertexSet, i64> = BTreeMap::new();
        for layer in &self.direct {
            for (u, c) in layer {
                *total.entry(u.clone()).or_insert(0) += c;
            }
        }
        total.retain(|_, c| *c != 0);
        total == self.union
    }
}

/// Multilevel FCR coefficients computed directly on B_M × [n] and through
/// layer differences.
pub fn mlfcr_coefficients(m: u32, layers: &[BTreeSet<VertexSet>]) -> Result<LayeredCoefficients> {
    let n = layers.len();
    if n == 0 {
        return Err(Error::precondition("at least one layer is required"));
    }
    for (i, pair) in layers.windows(2).enumerate() {
        if !pair[1].is_subset(&pair[0]) {
            return Err(Error::precondition(format!("layer {} is not contained in layer {}", i + 2, i + 1)));
        }
    }
    check_vertex_count(m)?;
    let grid = PosetGrid::new(vec![PosetAxis::Boolean(m), PosetAxis::ChainBounded(n as u32)])?;
    let elements = layers.iter().enumerate().flat_map(|(i, layer)| {
        layer
            .iter()
            .map(move |u| GridElement::new(vec![AxisElement::Set(u.clone()), AxisElement::Index(i as u32 + 1)]))
    });
    let ideal = OrderIdeal::from_elements(&grid, elements)?;
    let d = combination_coefficients(&grid, &ideal)?;
    let mut direct = vec![BTreeMap::new(); n];
    for (p, c) in d.iter() {
        let u = element_set(p)?.clone();
        let i = p.coords()[1].index().expect("chain coordinate") as usize;
        direct[i - 1].insert(u, c);
    }

    let per_layer: Vec<BTreeMap<VertexSet, i64>> =
        layers.iter().map(|l| boolean_coefficients(m, l)).collect::<Result<_>>()?;
    let mut closed_form = Vec::with_capacity(n);
    for i in 0..n {
        let mut layer = per_layer[i].clone();
        if let Some(above) = per_layer.get(i + 1) {
            for (u, c) in above {
                *layer.entry(u.clone()).or_insert(0) -= c;
            }
        }
        layer.retain(|_, c| *c != 0);
        closed_form.push(layer);
    }
    Ok(LayeredCoefficients { direct, closed_form, union: per_layer[0].clone() })
}

/// Number of cliques of each rank m = |v| − 1 containing `u`, over the
/// members of comp_R.
fn simplex_counts(complex: &[VertexSet], u: &VertexSet, max_rank: usize) -> Vec<i64> {
    let mut p = vec![0i64; max_rank + 1];
    for v in complex.iter().filter(|v| !v.is_empty() && u.is_subset(v)) {
        p[v.len() - 1] += 1;
    }
    p
}

/// Simplex energy Σ_r (−1)^r Σ_{|u|=r+1} E_u Σ_{m≥r} (−1)^m p^m_u, summed
/// literally over the nonempty cliques with at most R+1 vertices.
pub fn simplex_energy<F>(graph: &InteractionGraph, max_rank: u32, mut potential: F) -> Result<f64>
where
    F: FnMut(&VertexSet) -> Result<f64>,
{
    check_vertex_count(graph.vertex_count())?;
    let complex = simplex_ideal(graph, max_rank as i32)?;
    let r_max = max_rank as usize;
    let mut acc = CompensatedSum::new();
    for u in complex.iter().filter(|u| !u.is_empty()) {
        let r = u.len() - 1;
        let p = simplex_counts(&complex, u, r_max);
        let inner: i64 = (r..=r_max).map(|m| sign(m) * p[m]).sum();
        acc.add((sign(r) * inner) as f64 * potential(u)?);
    }
    Ok(acc.value())
}

/// Truncation of the MBE over comp_R[G] regarded as an ideal of B_M.
pub fn simplex_truncation<F>(graph: &InteractionGraph, max_rank: u32, mut potential: F) -> Result<f64>
where
    F: FnMut(&VertexSet) -> Result<f64>,
{
    let grid = boolean_grid(graph.vertex_count())?;
    let complex = simplex_ideal(graph, max_rank as i32)?;
    let ideal = OrderIdeal::from_elements(&grid, complex.into_iter().map(set_element))?;
    truncation_sum(&grid, &ideal, |p| potential(element_set(p)?))
}
