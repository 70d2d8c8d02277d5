use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{EvaluationRecord, Evaluator, SubproblemSpec};
use crate::cost::{cost_of_method, CostParams, SystemSizes};
use crate::error::{Error, Result};
use crate::graph::{InteractionGraph, ShortestPathOracle};
use crate::poset::VertexSet;
use crate::sum::CompensatedSum;

/// Parameters of the seeded analytic potential.
///
/// V*_u sums pair weights w_ij and many-body weights θ^|v|·h_v over subsets
/// v ⊆ u with 3 ≤ |v| ≤ `body_order`. Pair weights fall off by θ per unit of
/// distance beyond nearest neighbours, and h_v by θ per unit of spread of v
/// beyond a compact cluster. Levels scale V*_u by
/// 1 − a_m − b_p + a_m·b_p·c_u, with a and b vanishing at the top levels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticParams {
    pub vertex_count: u32,
    pub seed: u64,
    /// Many-body decay θ ∈ (0, 1).
    pub theta: f64,
    pub body_order: u32,
    /// Magnitude of the one-body terms; zero disables them.
    pub one_body_scale: f64,
    pub pair_scale: f64,
    /// Value of V_∅ at every level before level scaling.
    pub empty_value: f64,
    pub method_levels: u32,
    pub basis_levels: u32,
    /// a_1; a_m = a_1·rate^(m−1) below the top method level.
    pub method_error: f64,
    pub method_rate: f64,
    pub basis_error: f64,
    pub basis_rate: f64,
    /// Edges (0-based) whose hop distances drive the spatial decay; when
    /// absent the index distance |i − j| is used.
    pub graph: Option<Vec<(u32, u32)>>,
    pub cost: CostParams,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        SyntheticParams {
            vertex_count: 6,
            seed: 0,
            theta: 0.3,
            body_order: 3,
            one_body_scale: 0.0,
            pair_scale: 0.01,
            empty_value: 0.0,
            method_levels: 1,
            basis_levels: 1,
            method_error: 0.3,
            method_rate: 0.5,
            basis_error: 0.3,
            basis_rate: 0.5,
            graph: None,
            cost: CostParams::default(),
        }
    }
}

impl SyntheticParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::Config(format!("theta must lie in (0, 1), got {}", self.theta)));
        }
        if self.body_order < 2 {
            return Err(Error::Config("body_order must be at least 2".into()));
        }
        if self.method_levels == 0 || self.basis_levels == 0 {
            return Err(Error::Config("level counts must be positive".into()));
        }
        for (name, v) in [
            ("one_body_scale", self.one_body_scale),
            ("pair_scale", self.pair_scale),
            ("empty_value", self.empty_value),
            ("method_error", self.method_error),
            ("method_rate", self.method_rate),
            ("basis_error", self.basis_error),
            ("basis_rate", self.basis_rate),
        ] {
            if !v.is_finite() {
                return Err(Error::Config(format!("{name} must be finite")));
            }
        }
        if self.method_error <= 0.0 || self.basis_error <= 0.0 || self.method_rate <= 0.0 || self.basis_rate <= 0.0 {
            return Err(Error::Config("level error rates must be positive".into()));
        }
        self.cost.validate()
    }
}

/// Sizes of a synthetic subsystem of `n` vertices at basis level `p`:
/// eight electrons and 4 + 10p functions per vertex, one core orbital each.
pub fn synthetic_sizes(n: u64, basis_index: u32) -> SystemSizes {
    let p = u64::from(basis_index);
    let n_ao = n * (4 + 10 * p);
    let n_occ = 4 * n;
    let shells = n * (2 + 2 * p);
    SystemSizes { n_ao, n_occ, n_corr: n_occ - n, n_virt: n_ao - n_occ, n_eri: shells * shells }
}

/// Deterministic analytic stand-in for an ab initio hierarchy.
#[derive(Clone, Debug)]
pub struct SyntheticEvaluator {
    params: SyntheticParams,
    oracle: Option<ShortestPathOracle>,
    id: String,
}

impl SyntheticEvaluator {
    pub fn new(params: SyntheticParams) -> Result<Self> {
        params.validate()?;
        let oracle = match &params.graph {
            Some(edges) => Some(ShortestPathOracle::new(&InteractionGraph::new(params.vertex_count, edges)?)),
            None => None,
        };
        let id = format!("synthetic:{}", params.seed);
        Ok(SyntheticEvaluator { params, oracle, id })
    }

    pub fn params(&self) -> &SyntheticParams {
        &self.params
    }

    fn uniform(&self, tag: &[u8], u: &VertexSet) -> f64 {
        let mut h = Sha256::new();
        h.update(self.params.seed.to_le_bytes());
        h.update(tag);
        for v in u.iter() {
            h.update(v.to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(h.finalize().into());
        rng.gen_range(-1.0..=1.0)
    }

    fn distance(&self, i: u32, j: u32) -> Option<u32> {
        match &self.oracle {
            Some(o) => o.distance(i, j),
            None => Some(i.abs_diff(j)),
        }
    }

    fn spread(&self, v: &VertexSet) -> Option<u32> {
        let vs = v.as_slice();
        let mut diam = 0;
        for (a, &i) in vs.iter().enumerate() {
            for &j in &vs[a + 1..] {
                diam = diam.max(self.distance(i, j)?);
            }
        }
        Some(diam)
    }

    /// The level-independent potential V*_u.
    pub fn base_value(&self, u: &VertexSet) -> f64 {
        let p = &self.params;
        let mut acc = CompensatedSum::new();
        acc.add(p.empty_value);
        let vs = u.as_slice();
        if p.one_body_scale != 0.0 {
            for &i in vs {
                acc.add(p.one_body_scale * self.uniform(b"one", &VertexSet::singleton(i)));
            }
        }
        for (a, &i) in vs.iter().enumerate() {
            for &j in &vs[a + 1..] {
                if let Some(d) = self.distance(i, j) {
                    let pair = VertexSet::new(vec![i, j]);
                    acc.add(p.pair_scale * self.uniform(b"pair", &pair) * p.theta.powi(d as i32 - 1));
                }
            }
        }
        for k in 3..=(p.body_order as usize).min(vs.len()) {
            for_each_combination(vs, k, &mut |v| {
                let v = VertexSet::new(v.to_vec());
                if let Some(diam) = self.spread(&v) {
                    let excess = (diam as i32 - (k as i32 - 1)).max(0);
                    let h = self.uniform(b"many", &v) * p.theta.powi(excess);
                    acc.add(p.pair_scale * p.theta.powi(k as i32) * h);
                }
            });
        }
        acc.value()
    }

    fn level_error(first: f64, rate: f64, level: u32, top: u32) -> f64 {
        if level >= top {
            0.0
        } else {
            first * rate.powi(level as i32 - 1)
        }
    }

    /// Per-subset perturbation c_u ∈ [−1, 1], damped by θ^|u|.
    fn perturbation(&self, u: &VertexSet) -> f64 {
        self.uniform(b"mix", u) * self.params.theta.powi(u.len() as i32)
    }

    pub fn value(&self, spec: &SubproblemSpec) -> Result<f64> {
        self.check(spec)?;
        let p = &self.params;
        let a = Self::level_error(p.method_error, p.method_rate, spec.method_index, p.method_levels);
        let b = Self::level_error(p.basis_error, p.basis_rate, spec.basis_index, p.basis_levels);
        let c = self.perturbation(&spec.subset);
        Ok(self.base_value(&spec.subset) * (1.0 - a - b + a * b * c))
    }

    /// V at the full vertex set and the top levels, which equals V*_[M].
    pub fn target_value(&self) -> f64 {
        self.base_value(&VertexSet::full(self.params.vertex_count))
    }

    fn check(&self, spec: &SubproblemSpec) -> Result<()> {
        let p = &self.params;
        let fail = |msg: String| Error::Evaluation { element: spec.to_string(), msg };
        if let Some(m) = VertexSet::max(&spec.subset) {
            if m >= p.vertex_count {
                return Err(fail(format!("vertex {} outside 1..={}", m + 1, p.vertex_count)));
            }
        }
        if !(1..=p.method_levels).contains(&spec.method_index) {
            return Err(fail(format!("method index outside 1..={}", p.method_levels)));
        }
        if !(1..=p.basis_levels).contains(&spec.basis_index) {
            return Err(fail(format!("basis index outside 1..={}", p.basis_levels)));
        }
        Ok(())
    }
}

fn for_each_combination(items: &[u32], k: usize, f: &mut impl FnMut(&[u32])) {
    fn rec(items: &[u32], k: usize, start: usize, buf: &mut Vec<u32>, f: &mut impl FnMut(&[u32])) {
        if buf.len() == k {
            f(buf);
            return;
        }
        for i in start..=items.len() - (k - buf.len()) {
            buf.push(items[i]);
            rec(items, k, i + 1, buf, f);
            buf.pop();
        }
    }
    if k <= items.len() {
        rec(items, k, 0, &mut Vec::with_capacity(k), f);
    }
}

impl Evaluator for SyntheticEvaluator {
    fn backend_id(&self) -> &str {
        &self.id
    }

    fn evaluate(&self, spec: &SubproblemSpec) -> Result<EvaluationRecord> {
        let value = self.value(spec)?;
        Ok(EvaluationRecord {
            value,
            uncertainty: 0.0,
            cost: self.estimate_cost(spec).unwrap_or(0.0),
            wall_time: 0.0,
            backend: self.id.clone(),
        })
    }

    fn estimate_cost(&self, spec: &SubproblemSpec) -> Option<f64> {
        let sizes = synthetic_sizes(spec.subset.len() as u64, spec.basis_index);
        cost_of_method(&self.params.cost, spec.method_index, &sizes).ok()
    }
}
