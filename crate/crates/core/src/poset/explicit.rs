use crate::error::{Error, Result};

/// A finite poset given by its elements `0..n` and a cover relation.
///
/// The order is the reflexive-transitive closure of the covers. The Möbius
/// function is computed once at construction by the defining recursion
/// `μ(s,t) = −Σ_{s≤u<t} μ(s,u)`, so lookups are constant time.
#[derive(Clone, Debug)]
pub struct ExplicitPoset {
    n: usize,
    le: Vec<Vec<bool>>,
    covers_up: Vec<Vec<usize>>,
    covers_down: Vec<Vec<usize>>,
    /// A linear extension: `order[k]` is the k-th element bottom-up.
    order: Vec<usize>,
    rank: Vec<usize>,
    mu: Vec<Vec<i64>>,
}

impl ExplicitPoset {
    /// Builds the poset from cover pairs `(a, b)` meaning `a ≺ b`.
    ///
    /// Pairs that are implied transitively by other pairs are accepted and
    /// dropped from the cover relation.
    pub fn from_covers(n: usize, covers: &[(usize, usize)]) -> Result<Self> {
        let mut up = vec![Vec::new(); n];
        for &(a, b) in covers {
            if a >= n || b >= n {
                return Err(Error::domain(format!("cover ({a},{b}) outside 0..{n}")));
            }
            if a == b {
                return Err(Error::domain(format!("element {a} covers itself")));
            }
            up[a].push(b);
        }
        let order = topological_order(n, &up)
            .ok_or_else(|| Error::domain("cover relation contains a cycle"))?;
        // Closure: process top-down so each element's up-set is final before use.
        let mut le = vec![vec![false; n]; n];
        for &s in order.iter().rev() {
            le[s][s] = true;
            for &t in &up[s] {
                for u in 0..n {
                    if le[t][u] {
                        le[s][u] = true;
                    }
                }
            }
        }
        Ok(Self::from_order_matrix(n, le, order))
    }

    /// Builds the poset on `0..n` from an order predicate `le(a, b)`.
    ///
    /// The predicate must be reflexive, antisymmetric and transitive.
    pub fn from_relation(n: usize, le: impl Fn(usize, usize) -> bool) -> Result<Self> {
        let mut m = vec![vec![false; n]; n];
        for a in 0..n {
            for b in 0..n {
                m[a][b] = le(a, b);
            }
        }
        for a in 0..n {
            if !m[a][a] {
                return Err(Error::domain(format!("relation is not reflexive at {a}")));
            }
            for b in 0..n {
                if a != b && m[a][b] && m[b][a] {
                    return Err(Error::domain(format!("relation is not antisymmetric at ({a},{b})")));
                }
                if m[a][b] {
                    for c in 0..n {
                        if m[b][c] && !m[a][c] {
                            return Err(Error::domain(format!(
                                "relation is not transitive at ({a},{b},{c})"
                            )));
                        }
                    }
                }
            }
        }
        let up: Vec<Vec<usize>> = (0..n)
            .map(|a| (0..n).filter(|&b| b != a && m[a][b]).collect())
            .collect();
        let order = topological_order(n, &up).expect("antisymmetric relation is acyclic");
        Ok(Self::from_order_matrix(n, m, order))
    }

    fn from_order_matrix(n: usize, le: Vec<Vec<bool>>, order: Vec<usize>) -> Self {
        let lt = |a: usize, b: usize| a != b && le[a][b];
        let mut covers_up = vec![Vec::new(); n];
        let mut covers_down = vec![Vec::new(); n];
        for a in 0..n {
            for b in 0..n {
                if lt(a, b) && !(0..n).any(|c| lt(a, c) && lt(c, b)) {
                    covers_up[a].push(b);
                    covers_down[b].push(a);
                }
            }
        }
        let mut rank = vec![0usize; n];
        for &s in &order {
            for &t in &covers_up[s] {
                rank[t] = rank[t].max(rank[s] + 1);
            }
        }
        let mut mu = vec![vec![0i64; n]; n];
        for s in 0..n {
            mu[s][s] = 1;
            for &t in &order {
                if !lt(s, t) {
                    continue;
                }
                let acc: i64 = order
                    .iter()
                    .filter(|&&u| le[s][u] && lt(u, t))
                    .map(|&u| mu[s][u])
                    .sum();
                mu[s][t] = -acc;
            }
        }
        ExplicitPoset { n, le, covers_up, covers_down, order, rank, mu }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn le(&self, a: usize, b: usize) -> bool {
        self.le[a][b]
    }

    pub fn lt(&self, a: usize, b: usize) -> bool {
        a != b && self.le[a][b]
    }

    pub fn covers_up(&self, a: usize) -> &[usize] {
        &self.covers_up[a]
    }

    pub fn covers_down(&self, a: usize) -> &[usize] {
        &self.covers_down[a]
    }

    /// Length of the longest chain from a minimal element up to `a`.
    pub fn rank(&self, a: usize) -> usize {
        self.rank[a]
    }

    /// Elements listed bottom-up along a linear extension.
    pub fn linear_extension(&self) -> &[usize] {
        &self.order
    }

    /// The unique least element, if one exists.
    pub fn least(&self) -> Option<usize> {
        (0..self.n).find(|&a| (0..self.n).all(|b| self.le[a][b]))
    }

    pub fn moebius(&self, s: usize, t: usize) -> i64 {
        self.mu[s][t]
    }

    /// Greatest lower bound of `a` and `b`, if it exists.
    pub fn meet(&self, a: usize, b: usize) -> Option<usize> {
        let lower: Vec<usize> = (0..self.n).filter(|&c| self.le[c][a] && self.le[c][b]).collect();
        lower
            .iter()
            .copied()
            .find(|&c| lower.iter().all(|&d| self.le[d][c]))
    }
}

fn topological_order(n: usize, up: &[Vec<usize>]) -> Option<Vec<usize>> {
    let mut indegree = vec![0usize; n];
    for targets in up {
        for &t in targets {
            indegree[t] += 1;
        }
    }
    let mut ready: std::collections::BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(s) = ready.pop_first() {
        order.push(s);
        for &t in &up[s] {
            indegree[t] -= 1;
            if indegree[t] == 0 {
                ready.insert(t);
            }
        }
    }
    (order.len() == n).then_some(order)
}
