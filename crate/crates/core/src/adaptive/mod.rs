//! Adaptive construction of truncation ideals on poset grids, driven by
//! benefit/cost ratios of contribution potentials.

mod queue;

pub use queue::{queue_key, QueueEntry};

use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poset::{GridElement, OrderIdeal, PosetGrid, SparseIntTensor, SparseRealTensor};
use crate::potentials::{EvaluationRecord, Evaluator, SubproblemSpec};
use crate::sum::CompensatedSum;

/// How many queued elements are expanded per iteration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Strategy {
    /// Expand only the first expandable element.
    Best,
    /// Expand every expandable element.
    All,
    /// Expand every expandable element whose key is at least α times the
    /// best expandable key.
    Threshold(f64),
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    /// Accepts `best`, `all` or `threshold:α`.
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "best" => Ok(Strategy::Best),
            "all" => Ok(Strategy::All),
            other => {
                let alpha = other
                    .strip_prefix("threshold:")
                    .and_then(|a| a.parse::<f64>().ok())
                    .ok_or_else(|| Error::Config(format!("unknown strategy {s:?}; use best, all or threshold:α")))?;
                let st = Strategy::Threshold(alpha);
                st.validate()?;
                Ok(st)
            }
        }
    }
}

impl TryFrom<String> for Strategy {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Strategy> for String {
    fn from(s: Strategy) -> String {
        s.to_string()
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Strategy::Best => f.write_str("best"),
            Strategy::All => f.write_str("all"),
            Strategy::Threshold(a) => write!(f, "threshold:{a}"),
        }
    }
}

impl Strategy {
    pub fn validate(&self) -> Result<()> {
        match self {
            Strategy::Threshold(a) if !(0.0..=1.0).contains(a) => {
                Err(Error::Config(format!("threshold factor must lie in [0, 1], got {a}")))
            }
            _ => Ok(()),
        }
    }
}

/// What to do when an evaluation fails.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FailurePolicy {
    #[default]
    Abort,
    /// Treat the element as infinitely costly: it never joins the ideal and
    /// nothing above it becomes admissible.
    Skip,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdaptiveConfig {
    pub strategy: Strategy,
    pub cost_budget: Option<f64>,
    /// Stop once |𝓔_i| falls to this value (checked from iteration 1 on).
    pub error_threshold: Option<f64>,
    /// Largest iteration index to run.
    pub max_iterations: Option<usize>,
    pub wall_clock_limit: Option<f64>,
    /// Evaluator calls in flight at once.
    pub concurrency: usize,
    pub failure_policy: FailurePolicy,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        AdaptiveConfig {
            strategy: Strategy::All,
            cost_budget: None,
            error_threshold: None,
            max_iterations: None,
            wall_clock_limit: None,
            concurrency: 1,
            failure_policy: FailurePolicy::Abort,
        }
    }
}

impl AdaptiveConfig {
    pub fn validate(&self) -> Result<()> {
        self.strategy.validate()?;
        if self.concurrency == 0 {
            return Err(Error::Config("concurrency must be at least 1".into()));
        }
        for (name, v) in [
            ("cost_budget", self.cost_budget),
            ("error_threshold", self.error_threshold),
            ("wall_clock_limit", self.wall_clock_limit),
        ] {
            if let Some(v) = v {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::Config(format!("{name} must be a nonnegative number, got {v}")));
                }
            }
        }
        Ok(())
    }
}

/// Evaluates grid elements.
pub trait GridEvaluator: Send + Sync {
    fn evaluate_element(&self, p: &GridElement) -> Result<EvaluationRecord>;
}

impl<E: Evaluator> GridEvaluator for E {
    fn evaluate_element(&self, p: &GridElement) -> Result<EvaluationRecord> {
        self.evaluate(&SubproblemSpec::from_grid_element(p)?)
    }
}

/// Grid evaluator backed by a closure returning `(value, uncertainty, cost)`.
pub struct FnGridEvaluator<F>(pub F);

impl<F: Fn(&GridElement) -> (f64, f64, f64) + Send + Sync> GridEvaluator for FnGridEvaluator<F> {
    fn evaluate_element(&self, p: &GridElement) -> Result<EvaluationRecord> {
        let (value, uncertainty, cost) = (self.0)(p);
        Ok(EvaluationRecord { value, uncertainty, cost, wall_time: 0.0, backend: "fn".into() })
    }
}

/// One line of the per-iteration log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub ideal_size: usize,
    pub new_elements: usize,
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "E_ind")]
    pub e_ind: f64,
    pub cost: f64,
    #[serde(rename = "dS")]
    pub ds: f64,
    pub wall_s: f64,
    pub queue_len: usize,
}

impl IterationRecord {
    pub const CSV_HEADER: &'static str = "iteration,ideal_size,new_elements,S,E_ind,cost,dS,wall_s,queue_len";
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    QueueExhausted,
    CostBudget,
    ErrorThreshold,
    MaxIterations,
    WallClock,
}

/// Final outcome of a run.
#[derive(Clone, Debug, Serialize)]
pub struct AdaptiveReport {
    pub termination: Termination,
    pub history: Vec<IterationRecord>,
    pub ideal_size: usize,
    pub antichain: Vec<GridElement>,
    pub failed: Vec<GridElement>,
}

impl AdaptiveReport {
    pub fn last(&self) -> &IterationRecord {
        self.history.last().expect("iteration 0 always runs")
    }
}

/// Covers of `p` that may join `ideal`: every element they cover is
/// already in the ideal.
pub fn admissible_covers(grid: &PosetGrid, ideal: &OrderIdeal, p: &GridElement) -> Result<Vec<GridElement>> {
    let mut out = Vec::new();
    for r in grid.covers_up(p)? {
        if !ideal.contains(&r) && ideal.admits(grid, &r)? {
            out.push(r);
        }
    }
    Ok(out)
}

/// sqrt(Σ D_p² ε_p²) over the nonzero entries of `d`.
pub fn propagated_uncertainty(d: &SparseIntTensor, eps: &BTreeMap<GridElement, f64>) -> Result<f64> {
    let mut acc = CompensatedSum::new();
    for (p, c) in d.iter() {
        let e = eps
            .get(p)
            .ok_or_else(|| Error::precondition(format!("no uncertainty recorded for {p}")))?;
        let c = c as f64;
        acc.add(c * c * e * e);
    }
    Ok(acc.value().max(0.0).sqrt())
}

/// State of an adaptive refinement, advanced one iteration per
/// [`AdaptiveRun::step`].
pub struct AdaptiveRun<'a, G: GridEvaluator + ?Sized> {
    grid: &'a PosetGrid,
    evaluator: &'a G,
    config: AdaptiveConfig,
    pool: rayon::ThreadPool,
    ideal: OrderIdeal,
    queue: BinaryHeap<QueueEntry>,
    d: SparseIntTensor,
    e: SparseIntTensor,
    l: SparseRealTensor,
    eps: BTreeMap<GridElement, f64>,
    costs: CompensatedSum,
    contributions: BTreeMap<GridElement, f64>,
    failed: BTreeSet<GridElement>,
    history: Vec<IterationRecord>,
    started: Instant,
    termination: Option<Termination>,
}

impl<'a, G: GridEvaluator + ?Sized> AdaptiveRun<'a, G> {
    pub fn new(grid: &'a PosetGrid, evaluator: &'a G, config: AdaptiveConfig) -> Result<Self> {
        config.validate()?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.concurrency)
            .build()
            .map_err(|e| Error::Config(format!("cannot start evaluation threads: {e}")))?;
        Ok(AdaptiveRun {
            grid,
            evaluator,
            config,
            pool,
            ideal: OrderIdeal::empty(),
            queue: BinaryHeap::new(),
            d: SparseIntTensor::new(),
            e: SparseIntTensor::new(),
            l: SparseRealTensor::new(),
            eps: BTreeMap::new(),
            costs: CompensatedSum::new(),
            contributions: BTreeMap::new(),
            failed: BTreeSet::new(),
            history: Vec::new(),
            started: Instant::now(),
            termination: None,
        })
    }

    pub fn ideal(&self) -> &OrderIdeal {
        &self.ideal
    }

    /// The running combination tensor D.
    pub fn combination_tensor(&self) -> &SparseIntTensor {
        &self.d
    }

    /// The running error-indicator tensor E.
    pub fn error_tensor(&self) -> &SparseIntTensor {
        &self.e
    }

    pub fn evaluations(&self) -> &SparseRealTensor {
        &self.l
    }

    pub fn uncertainties(&self) -> &BTreeMap<GridElement, f64> {
        &self.eps
    }

    /// L[Ṽ_p] as computed when `p` joined the ideal.
    pub fn contribution(&self, p: &GridElement) -> Option<f64> {
        self.contributions.get(p).copied()
    }

    pub fn history(&self) -> &[IterationRecord] {
        &self.history
    }

    pub fn queue_len(&self) -> usize {
        self.queue.len()
    }

    /// Queue entries in priority order.
    pub fn queue_snapshot(&self) -> Vec<QueueEntry> {
        let mut v = self.queue.clone().into_sorted_vec();
        v.reverse();
        v
    }

    pub fn failed(&self) -> &BTreeSet<GridElement> {
        &self.failed
    }

    pub fn termination(&self) -> Option<Termination> {
        self.termination
    }

    fn blocked(&self, r: &GridElement) -> bool {
        self.failed.iter().any(|f| self.grid.le(f, r))
    }

    /// Drops queued elements whose covers have all joined the ideal (or can
    /// never join it).
    fn retire_expanded(&mut self) -> Result<()> {
        let mut keep = Vec::with_capacity(self.queue.len());
        for entry in std::mem::take(&mut self.queue) {
            let mut open = false;
            for r in self.grid.covers_up(&entry.element)? {
                if !self.ideal.contains(&r) && !self.failed.contains(&r) && !self.blocked(&r) {
                    open = true;
                    break;
                }
            }
            if open {
                keep.push(entry);
            }
        }
        self.queue = keep.into();
        Ok(())
    }

    /// Chooses the new elements from the queue according to the strategy.
    fn select(&mut self) -> Result<Vec<GridElement>> {
        let mut chosen: BTreeSet<GridElement> = BTreeSet::new();
        let mut requeue = Vec::new();
        let mut best_key: Option<f64> = None;
        while let Some(entry) = self.queue.pop() {
            if let Some(best) = best_key {
                let stop = match self.config.strategy {
                    Strategy::Best => true,
                    Strategy::All => false,
                    Strategy::Threshold(alpha) => alpha > 0.0 && entry.key < alpha * best,
                };
                if stop {
                    requeue.push(entry);
                    break;
                }
            }
            let mut admissible = Vec::new();
            let mut open = false;
            for r in self.grid.covers_up(&entry.element)? {
                if self.ideal.contains(&r) || self.failed.contains(&r) || self.blocked(&r) {
                    continue;
                }
                if chosen.contains(&r) || self.ideal.admits(self.grid, &r)? {
                    admissible.push(r);
                } else {
                    open = true;
                }
            }
            if admissible.is_empty() && !open {
                // Fully expanded: retire.
                continue;
            }
            if !admissible.is_empty() {
                best_key.get_or_insert(entry.key);
                chosen.extend(admissible);
            }
            if open {
                requeue.push(entry);
            }
        }
        self.queue.extend(requeue);
        if chosen.is_empty() && !self.queue.is_empty() {
            return Err(Error::precondition(
                "queued elements remain but none is expandable; the ideal is not downward closed",
            ));
        }
        Ok(chosen.into_iter().collect())
    }

    /// Runs one iteration. Returns `None` once the run has terminated.
    pub fn step(&mut self) -> Result<Option<&IterationRecord>> {
        if self.termination.is_some() {
            return Ok(None);
        }
        let iteration = self.history.len();
        let mut new: Vec<GridElement> =
            if iteration == 0 { vec![self.grid.least()] } else { self.select()? };

        let evaluator = self.evaluator;
        let results: Vec<Result<EvaluationRecord>> =
            self.pool.install(|| new.par_iter().map(|p| evaluator.evaluate_element(p)).collect());

        let mut records = Vec::with_capacity(new.len());
        let mut kept = Vec::with_capacity(new.len());
        for (p, r) in new.drain(..).zip(results) {
            match r.and_then(|rec| rec.validate().map(|_| rec)) {
                Ok(rec) => {
                    kept.push(p);
                    records.push(rec);
                }
                Err(err) => match self.config.failure_policy {
                    FailurePolicy::Abort => {
                        return Err(match err {
                            e @ Error::Evaluation { .. } => e,
                            other => Error::Evaluation { element: p.to_string(), msg: other.to_string() },
                        })
                    }
                    FailurePolicy::Skip => {
                        log::warn!("skipping {p}: {err}");
                        self.failed.insert(p);
                    }
                },
            }
        }

        for (p, rec) in kept.iter().zip(&records) {
            self.l.insert(p.clone(), rec.value);
            self.eps.insert(p.clone(), rec.uncertainty);
        }
        for (p, rec) in kept.iter().zip(&records) {
            let removed = self.ideal.insert(self.grid, p.clone())?;
            let m = self.grid.moebius_tensor(p)?;
            self.d.add_scaled(&m, 1)?;
            self.e.add_scaled(&m, 1)?;
            let contribution = m.reduce_with(&self.l)?;
            self.contributions.insert(p.clone(), contribution);
            self.costs.add(rec.cost);
            self.queue.push(QueueEntry::new(p.clone(), contribution, rec.cost));
            for q in removed {
                let mq = self.grid.moebius_tensor(&q)?;
                self.e.add_scaled(&mq, -1)?;
            }
        }

        self.retire_expanded()?;
        let record = IterationRecord {
            iteration,
            ideal_size: self.ideal.len(),
            new_elements: kept.len(),
            s: self.d.reduce_with(&self.l)?,
            e_ind: self.e.reduce_with(&self.l)?,
            cost: self.costs.value(),
            ds: propagated_uncertainty(&self.d, &self.eps)?,
            wall_s: self.started.elapsed().as_secs_f64(),
            queue_len: self.queue.len(),
        };
        self.termination = self.check_termination(&record);
        self.history.push(record);
        Ok(self.history.last())
    }

    fn check_termination(&self, r: &IterationRecord) -> Option<Termination> {
        let c = &self.config;
        if self.queue.is_empty() {
            Some(Termination::QueueExhausted)
        } else if c.cost_budget.is_some_and(|b| r.cost >= b) {
            Some(Termination::CostBudget)
        } else if r.iteration >= 1 && c.error_threshold.is_some_and(|t| r.e_ind.abs() <= t) {
            Some(Termination::ErrorThreshold)
        } else if c.max_iterations.is_some_and(|m| r.iteration >= m) {
            Some(Termination::MaxIterations)
        } else if c.wall_clock_limit.is_some_and(|w| r.wall_s >= w) {
            Some(Termination::WallClock)
        } else {
            None
        }
    }

    /// Steps until termination, passing each record to `on_iteration`.
    pub fn run_with(mut self, mut on_iteration: impl FnMut(&IterationRecord)) -> Result<AdaptiveReport> {
        while let Some(r) = self.step()? {
            on_iteration(r);
        }
        Ok(self.into_report())
    }

    pub fn into_report(self) -> AdaptiveReport {
        AdaptiveReport {
            termination: self.termination.unwrap_or(Termination::MaxIterations),
            ideal_size: self.ideal.len(),
            antichain: self.ideal.antichain().iter().cloned().collect(),
            failed: self.failed.into_iter().collect(),
            history: self.history,
        }
    }
}

/// Runs refinement to termination.
pub fn run_adaptive<G: GridEvaluator + ?Sized>(
    grid: &PosetGrid,
    evaluator: &G,
    config: AdaptiveConfig,
) -> Result<AdaptiveReport> {
    AdaptiveRun::new(grid, evaluator, config)?.run_with(|_| {})
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poset::{AxisElement, PosetAxis, VertexSet};

    fn b2x2() -> PosetGrid {
        PosetGrid::new(vec![PosetAxis::Boolean(2), PosetAxis::ChainBounded(2)]).unwrap()
    }

    fn el(set: &[u32], level: u32) -> GridElement {
        GridElement::new(vec![AxisElement::Set(VertexSet::from_one_based(set)), AxisElement::Index(level)])
    }

    #[test]
    fn admissible_covers_of_bottom() {
        let g = b2x2();
        let ideal = OrderIdeal::bottom(&g);
        let covers = admissible_covers(&g, &ideal, &g.least()).unwrap();
        assert_eq!(covers.len(), 3);
        for c in [el(&[1], 1), el(&[2], 1), el(&[], 2)] {
            assert!(covers.contains(&c));
        }
        let partial = OrderIdeal::generated_by(&g, [el(&[1], 1)]).unwrap();
        let up = admissible_covers(&g, &partial, &el(&[1], 1)).unwrap();
        assert!(!up.contains(&el(&[1, 2], 1)));
        let full = OrderIdeal::generated_by(&g, [el(&[1, 2], 2)]).unwrap();
        assert!(admissible_covers(&g, &full, &el(&[1, 2], 2)).unwrap().is_empty());
    }

    #[test]
    fn uncertainty_examples() {
        let mut d = SparseIntTensor::new();
        let mut eps = BTreeMap::new();
        d.add(el(&[], 1), 1).unwrap();
        eps.insert(el(&[], 1), 1e-8);
        assert_eq!(propagated_uncertainty(&d, &eps).unwrap(), 1e-8);
        d.add(el(&[1], 1), -1).unwrap();
        eps.insert(el(&[1], 1), 1e-8);
        eps.insert(el(&[2], 1), 5.0);
        let ds = propagated_uncertainty(&d, &eps).unwrap();
        assert!((ds - 2f64.sqrt() * 1e-8).abs() < 1e-22);
    }

    #[test]
    fn single_element_grid() {
        let g = PosetGrid::new(vec![PosetAxis::Boolean(0)]).unwrap();
        let ev = FnGridEvaluator(|_: &GridElement| (2.5, 0.0, 1.0));
        let report = run_adaptive(&g, &ev, AdaptiveConfig::default()).unwrap();
        assert_eq!(report.history.len(), 1);
        assert_eq!(report.termination, Termination::QueueExhausted);
        let r = report.last();
        assert_eq!((r.s, r.e_ind, r.queue_len), (2.5, 2.5, 0));
    }

    #[test]
    fn runs_to_exhaustion() {
        let g = b2x2();
        let ev = FnGridEvaluator(|p: &GridElement| {
            let n = p.coords()[0].set().unwrap().len() as f64;
            let m = p.coords()[1].index().unwrap() as f64;
            (n * n + 0.1 * m, 1e-8, 1.0 + n)
        });
        for strategy in [Strategy::All, Strategy::Best, Strategy::Threshold(0.5)] {
            let cfg = AdaptiveConfig { strategy, ..Default::default() };
            let report = run_adaptive(&g, &ev, cfg).unwrap();
            assert_eq!(report.ideal_size, 8);
            assert!((report.last().s - (4.0 + 0.2)).abs() < 1e-12, "{strategy:?}");
        }
    }

    #[test]
    fn strategy_parsing() {
        assert_eq!("all".parse::<Strategy>().unwrap(), Strategy::All);
        assert_eq!("threshold:0.25".parse::<Strategy>().unwrap(), Strategy::Threshold(0.25));
        for st in [Strategy::Best, Strategy::All, Strategy::Threshold(0.25)] {
            let json = serde_json::to_string(&st).unwrap();
            assert_eq!(serde_json::from_str::<Strategy>(&json).unwrap(), st);
        }
        assert!(serde_json::from_str::<Strategy>("\"threshold:2\"").is_err());
        assert!("threshold:2".parse::<Strategy>().is_err());
        assert!("worst".parse::<Strategy>().is_err());
    }

    #[test]
    fn abort_and_skip() {
        let g = b2x2();
        let ev = FnGridEvaluator(|p: &GridElement| {
            let v = if *p == el(&[1], 1) { f64::NAN } else { 1.0 };
            (v, 0.0, 1.0)
        });
        let err = run_adaptive(&g, &ev, AdaptiveConfig::default()).unwrap_err();
        assert!(err.to_string().contains("({1}, 1)"), "{err}");
        let cfg = AdaptiveConfig { failure_policy: FailurePolicy::Skip, ..Default::default() };
        let report = run_adaptive(&g, &ev, cfg).unwrap();
        assert_eq!(report.failed, vec![el(&[1], 1)]);
        // everything except the failed element and what lies above it
        assert_eq!(report.ideal_size, 4);
    }
}
