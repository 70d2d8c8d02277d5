use std::cmp::Ordering;

use serde::Serialize;

use crate::poset::GridElement;

/// Benefit/cost ratio |contribution| / cost. A zero contribution gives key
/// 0 even at zero cost; a nonzero contribution at zero cost is infinitely
/// attractive.
pub fn queue_key(contribution: f64, cost: f64) -> f64 {
    let benefit = contribution.abs();
    if benefit == 0.0 {
        0.0
    } else if cost <= 0.0 {
        f64::INFINITY
    } else {
        benefit / cost
    }
}

/// Priority-queue entry. Larger keys come first, then cheaper elements,
/// then the canonical element order.
#[derive(Clone, Debug, Serialize)]
pub struct QueueEntry {
    pub element: GridElement,
    pub key: f64,
    pub cost: f64,
}

impl QueueEntry {
    pub fn new(element: GridElement, contribution: f64, cost: f64) -> Self {
        QueueEntry { key: queue_key(contribution, cost), cost, element }
    }
}

impl PartialEq for QueueEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for QueueEntry {}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key
            .total_cmp(&other.key)
            .then_with(|| other.cost.total_cmp(&self.cost))
            .then_with(|| other.element.cmp(&self.element))
    }
}
