//! Subproblem potentials: the evaluator interface, a seeded synthetic
//! backend, an external-process backend and a persistent evaluation ledger.

mod external;
mod ledger;
mod synthetic;

pub use external::{ExternalConfig, ExternalEvaluator, Request, RequestAtom, RequestLinkAtom, Response};
pub use ledger::{geometry_digest, Ledger, LedgerKey};
pub use synthetic::{synthetic_sizes, SyntheticEvaluator, SyntheticParams};

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};
use crate::poset::{AxisElement, GridElement, VertexSet};

/// Uncertainty assumed when a backend reports none (Hartree).
pub const DEFAULT_UNCERTAINTY: f64 = 1e-8;

/// Linear functional applied to a subproblem potential.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Functional {
    #[default]
    PointEnergy,
}

/// Identity of one subproblem potential V_(u, m, p).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SubproblemSpec {
    pub subset: VertexSet,
    pub method_index: u32,
    pub basis_index: u32,
    #[serde(default)]
    pub functional: Functional,
}

impl SubproblemSpec {
    pub fn new(subset: VertexSet, method_index: u32, basis_index: u32) -> Self {
        SubproblemSpec { subset, method_index, basis_index, functional: Functional::PointEnergy }
    }

    /// Reads a grid element laid out as (subset, method, basis). Missing
    /// trailing level axes default to level 1.
    pub fn from_grid_element(p: &GridElement) -> Result<Self> {
        let coords = p.coords();
        let subset = coords
            .first()
            .and_then(AxisElement::set)
            .ok_or_else(|| Error::domain(format!("{p}: the first axis must index vertex sets")))?
            .clone();
        let level = |k: usize| -> Result<u32> {
            match coords.get(k) {
                None => Ok(1),
                Some(AxisElement::Index(i)) if *i >= 1 => Ok(*i),
                Some(other) => Err(Error::domain(format!("{p}: level coordinate {other} is not a positive index"))),
            }
        };
        if coords.len() > 3 {
            return Err(Error::domain(format!("{p}: at most three axes (subset, method, basis)")));
        }
        Ok(SubproblemSpec::new(subset, level(1)?, level(2)?))
    }
}

impl fmt::Display for SubproblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, m={}, p={})", self.subset, self.method_index, self.basis_index)
    }
}

/// Result of evaluating a linear functional of one subproblem potential.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    /// Energy in Hartree.
    pub value: f64,
    pub uncertainty: f64,
    pub cost: f64,
    pub wall_time: f64,
    pub backend: String,
}

impl EvaluationRecord {
    pub fn validate(&self) -> Result<()> {
        if !self.value.is_finite() {
            return Err(Error::domain(format!("non-finite value {}", self.value)));
        }
        if !(self.uncertainty.is_finite() && self.uncertainty >= 0.0) {
            return Err(Error::domain(format!("invalid uncertainty {}", self.uncertainty)));
        }
        if !(self.cost.is_finite() && self.cost >= 0.0) {
            return Err(Error::domain(format!("invalid cost {}", self.cost)));
        }
        Ok(())
    }
}

/// A source of subproblem evaluations. Implementations must be pure: the
/// same spec always yields the same value.
pub trait Evaluator: Send + Sync {
    fn backend_id(&self) -> &str;

    fn evaluate(&self, spec: &SubproblemSpec) -> Result<EvaluationRecord>;

    /// Estimated cost without performing the evaluation, when cheaply known.
    fn estimate_cost(&self, _spec: &SubproblemSpec) -> Option<f64> {
        None
    }
}

impl<E: Evaluator + ?Sized> Evaluator for std::sync::Arc<E> {
    fn backend_id(&self) -> &str {
        (**self).backend_id()
    }

    fn evaluate(&self, spec: &SubproblemSpec) -> Result<EvaluationRecord> {
        (**self).evaluate(spec)
    }

    fn estimate_cost(&self, spec: &SubproblemSpec) -> Option<f64> {
        (**self).estimate_cost(spec)
    }
}

/// Evaluator backed by a closure, handy for tests and oracles. Cost is the
/// subset size and the uncertainty is the default.
pub struct FnEvaluator<F> {
    f: F,
    id: String,
}

impl<F: Fn(&SubproblemSpec) -> f64 + Send + Sync> FnEvaluator<F> {
    pub fn new(id: impl Into<String>, f: F) -> Self {
        FnEvaluator { f, id: id.into() }
    }
}

impl<F: Fn(&SubproblemSpec) -> f64 + Send + Sync> Evaluator for FnEvaluator<F> {
    fn backend_id(&self) -> &str {
        &self.id
    }

    fn evaluate(&self, spec: &SubproblemSpec) -> Result<EvaluationRecord> {
        Ok(EvaluationRecord {
            value: (self.f)(spec),
            uncertainty: DEFAULT_UNCERTAINTY,
            cost: spec.subset.len() as f64,
            wall_time: 0.0,
            backend: self.id.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_from_grid_element() {
        let p = GridElement::new(vec![
            AxisElement::Set(VertexSet::new(vec![0, 2])),
            AxisElement::Index(2),
            AxisElement::Index(1),
        ]);
        let s = SubproblemSpec::from_grid_element(&p).unwrap();
        assert_eq!((s.method_index, s.basis_index), (2, 1));
        assert_eq!(s.to_string(), "({1,3}, m=2, p=1)");
        let bare = GridElement::new(vec![AxisElement::Set(VertexSet::empty())]);
        assert_eq!(SubproblemSpec::from_grid_element(&bare).unwrap().method_index, 1);
        let bad = GridElement::new(vec![AxisElement::Index(1)]);
        assert!(SubproblemSpec::from_grid_element(&bad).is_err());
    }
}
