//! Abstract, dimensionless cost estimates for subproblem evaluations.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fragment::Subsystem;
use crate::fragment::{element_symbol, Geometry};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostParams {
    pub n_hf_iter: u32,
    pub n_cc_iter: u32,
    pub f_eri: f64,
}

impl Default for CostParams {
    fn default() -> Self {
        CostParams { n_hf_iter: 15, n_cc_iter: 15, f_eri: 50.0 }
    }
}

impl CostParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_hf_iter == 0 || self.n_cc_iter == 0 {
            return Err(Error::Config("iteration counts must be positive".into()));
        }
        if !(self.f_eri.is_finite() && self.f_eri > 0.0) {
            return Err(Error::Config(format!("f_eri must be positive, got {}", self.f_eri)));
        }
        Ok(())
    }
}

/// Orbital and integral counts of one subsystem.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemSizes {
    pub n_ao: u64,
    pub n_occ: u64,
    pub n_corr: u64,
    pub n_virt: u64,
    pub n_eri: u64,
}

impl SystemSizes {
    pub fn validate(&self) -> Result<()> {
        if self.n_corr > self.n_occ {
            return Err(Error::domain(format!("n_corr {} exceeds n_occ {}", self.n_corr, self.n_occ)));
        }
        Ok(())
    }
}

fn f(x: u64) -> f64 {
    x as f64
}

pub fn cost_hf(params: &CostParams, s: &SystemSizes) -> f64 {
    f64::from(params.n_hf_iter) * (params.f_eri * f(s.n_eri) + f(s.n_ao).powi(3))
}

pub fn cost_mp2(params: &CostParams, s: &SystemSizes) -> f64 {
    let (ao, c, v, eri) = (f(s.n_ao), f(s.n_corr), f(s.n_virt), f(s.n_eri));
    cost_hf(params, s)
        + c * c * v * v
        + params.f_eri * eri
        + c * eri
        + c * c * ao.powi(3)
        + c * c * v * ao
        + c * c * v * v * ao
}

/// Coupled cluster with excitations up to order `n`.
pub fn cost_cc(params: &CostParams, s: &SystemSizes, n: u32) -> f64 {
    let (ao, c, v, eri) = (f(s.n_ao), f(s.n_corr), f(s.n_virt), f(s.n_eri));
    let n = n as i32;
    params.f_eri * eri + ao * (c + v).powi(4) + f64::from(params.n_cc_iter) * c.powi(n) * v.powi(n + 2)
}

/// Coupled cluster of order `n` with a perturbative order-`n+1` correction.
pub fn cost_cc_pert(params: &CostParams, s: &SystemSizes, n: u32) -> f64 {
    let (c, v) = (f(s.n_corr), f(s.n_virt));
    let n = n as i32;
    cost_cc(params, s, n as u32) + c.powi(n + 1) * v.powi(n + 2)
}

/// A level of the method hierarchy HF, MP2, CCSD, CCSD(T), CCSDT, ...
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Hf,
    Mp2,
    /// Coupled cluster through excitation order n.
    Cc(u32),
    /// Order-n coupled cluster with perturbative order n+1.
    CcPert(u32),
}

impl Method {
    /// Maps a 1-based method index onto the hierarchy.
    pub fn from_index(m: u32) -> Result<Self> {
        match m {
            0 => Err(Error::domain("method index must be at least 1")),
            1 => Ok(Method::Hf),
            2 => Ok(Method::Mp2),
            m if m % 2 == 1 => Ok(Method::Cc(m / 2 + 1)),
            m => Ok(Method::CcPert(m / 2)),
        }
    }

    pub fn name(&self) -> String {
        const LETTERS: [&str; 8] = ["", "S", "D", "T", "Q", "P", "H", "7"];
        let label = |n: u32| -> String {
            (1..=n).map(|k| LETTERS.get(k as usize).copied().unwrap_or("?")).collect()
        };
        match self {
            Method::Hf => "HF".into(),
            Method::Mp2 => "MP2".into(),
            Method::Cc(n) => format!("CC{}", label(*n)),
            Method::CcPert(n) => format!(
                "CC{}({})",
                label(*n),
                LETTERS.get(*n as usize + 1).copied().unwrap_or("?")
            ),
        }
    }

    pub fn cost(&self, params: &CostParams, sizes: &SystemSizes) -> f64 {
        match *self {
            Method::Hf => cost_hf(params, sizes),
            Method::Mp2 => cost_mp2(params, sizes),
            Method::Cc(n) => cost_cc(params, sizes, n),
            Method::CcPert(n) => cost_cc_pert(params, sizes, n),
        }
    }
}

/// Cost of evaluating method `m` on a subsystem with the given sizes.
pub fn cost_of_method(params: &CostParams, method_index: u32, sizes: &SystemSizes) -> Result<f64> {
    sizes.validate()?;
    Ok(Method::from_index(method_index)?.cost(params, sizes))
}

/// Per-element basis data: AO count and shell count for each basis index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AoTable(BTreeMap<(u32, u32), (u64, u64)>);

impl Default for AoTable {
    /// Correlation-consistent style counts for H, C, N, O and S, basis
    /// indices 1 through 4 (double to quintuple zeta).
    fn default() -> Self {
        let mut t = BTreeMap::new();
        let rows: [(u32, [(u64, u64); 4]); 5] = [
            (1, [(5, 3), (14, 6), (30, 10), (55, 15)]),
            (6, [(14, 6), (30, 10), (55, 15), (91, 21)]),
            (7, [(14, 6), (30, 10), (55, 15), (91, 21)]),
            (8, [(14, 6), (30, 10), (55, 15), (91, 21)]),
            (16, [(18, 7), (34, 11), (59, 16), (95, 22)]),
        ];
        for (z, cols) in rows {
            for (k, entry) in cols.into_iter().enumerate() {
                t.insert((z, k as u32 + 1), entry);
            }
        }
        AoTable(t)
    }
}

impl AoTable {
    pub fn empty() -> Self {
        AoTable(BTreeMap::new())
    }

    /// Parses `Z p count shellpairs` lines.
    pub fn parse(text: &str) -> Result<Self> {
        let mut t = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let nums: Vec<u64> = line
                .split_whitespace()
                .map(|s| s.parse::<u64>().map_err(|e| Error::Parse { line: k + 1, msg: format!("{s:?}: {e}") }))
                .collect::<Result<_>>()?;
            let [z, p, count, shells] = nums[..] else {
                return Err(Error::Parse { line: k + 1, msg: "expected `Z p count shellpairs`".into() });
            };
            if z == 0 || p == 0 {
                return Err(Error::Parse { line: k + 1, msg: "Z and p are 1-based".into() });
            }
            t.insert((z as u32, p as u32), (count, shells));
        }
        Ok(AoTable(t))
    }

    pub fn insert(&mut self, z: u32, p: u32, count: u64, shells: u64) {
        self.0.insert((z, p), (count, shells));
    }

    pub fn get(&self, z: u32, p: u32) -> Result<(u64, u64)> {
        self.0.get(&(z, p)).copied().ok_or_else(|| {
            let name = element_symbol(z).map_or_else(|| format!("Z={z}"), str::to_string);
            Error::Config(format!("no AO table entry for {name} with basis index {p}"))
        })
    }
}

/// Settings for the atom-pair size surrogate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurrogateConfig {
    pub table: AoTable,
    /// Atom pairs farther apart than this (Å) contribute no integrals.
    pub screening_radius: f64,
    /// Frozen core orbitals per element; absent elements are all-electron.
    pub core_orbitals: BTreeMap<u32, u64>,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        SurrogateConfig { table: AoTable::default(), screening_radius: 10.0, core_orbitals: BTreeMap::new() }
    }
}

/// Estimates sizes from atom counts. N_ERI is the square of the number of
/// shell pairs over atom pairs within the screening radius; this is a
/// surrogate for a real integral screen.
pub fn surrogate_sizes(
    geometry: &Geometry,
    subsystem: &Subsystem,
    basis_index: u32,
    config: &SurrogateConfig,
) -> Result<SystemSizes> {
    let all = geometry.atoms();
    let mut centers: Vec<(u32, [f64; 3])> = Vec::with_capacity(subsystem.total_atoms());
    for a in subsystem.atoms.iter() {
        let atom = all
            .get(a as usize)
            .ok_or_else(|| Error::domain(format!("atom {} outside the geometry", a + 1)))?;
        centers.push((atom.z, atom.position));
    }
    centers.extend(subsystem.link_atoms.iter().map(|l| (1, l.position)));
    sizes_for_centers(&centers, basis_index, config)
}

/// Size surrogate for a list of `(Z, position)` centers.
pub fn sizes_for_centers(centers: &[(u32, [f64; 3])], basis_index: u32, config: &SurrogateConfig) -> Result<SystemSizes> {
    let mut n_ao = 0u64;
    let mut electrons = 0u64;
    let mut core = 0u64;
    let mut shells = Vec::with_capacity(centers.len());
    for &(z, _) in centers {
        let (count, sh) = config.table.get(z, basis_index)?;
        n_ao += count;
        shells.push(sh);
        electrons += u64::from(z);
        core += config.core_orbitals.get(&z).copied().unwrap_or(0);
    }
    let n_occ = electrons.div_ceil(2);
    if n_occ > n_ao {
        return Err(Error::domain(format!("{n_occ} occupied orbitals exceed {n_ao} basis functions")));
    }
    let n_corr = n_occ.saturating_sub(core);
    let r2 = config.screening_radius * config.screening_radius;
    let mut pairs = 0u64;
    for (i, &(_, xi)) in centers.iter().enumerate() {
        for (j, &(_, xj)) in centers.iter().enumerate().skip(i) {
            let d2: f64 = (0..3).map(|k| (xi[k] - xj[k]).powi(2)).sum();
            if d2 <= r2 {
                pairs += shells[i] * shells[j];
            }
        }
    }
    Ok(SystemSizes { n_ao, n_occ, n_corr, n_virt: n_ao - n_occ, n_eri: pairs * pairs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sizes(n_ao: u64, n_corr: u64, n_virt: u64, n_eri: u64) -> SystemSizes {
        SystemSizes { n_ao, n_occ: n_corr, n_corr, n_virt, n_eri }
    }

    #[test]
    fn hf_substitution() {
        let p = CostParams::default();
        assert_eq!(cost_hf(&p, &sizes(10, 0, 0, 1000)), 765000.0);
        assert_eq!(cost_hf(&p, &SystemSizes::default()), 0.0);
        let a = cost_hf(&p, &sizes(20, 0, 0, 0));
        let b = cost_hf(&p, &sizes(10, 0, 0, 0));
        assert_eq!(a, 8.0 * b);
    }

    #[test]
    fn unit_sizes() {
        let p = CostParams::default();
        let s = sizes(1, 1, 1, 1);
        // HF 15·51 = 765, then six unit terms plus f_ERI
        assert_eq!(cost_mp2(&p, &s), 765.0 + 1.0 + 50.0 + 1.0 + 1.0 + 1.0 + 1.0);
        // f_ERI + 1·2⁴ + 15
        assert_eq!(cost_cc(&p, &s, 2), 50.0 + 16.0 + 15.0);
        assert_eq!(cost_cc_pert(&p, &s, 2) - cost_cc(&p, &s, 2), 1.0);
        let no_corr = sizes(4, 0, 3, 10);
        assert_eq!(cost_mp2(&p, &no_corr), cost_hf(&p, &no_corr) + 50.0 * 10.0);
    }

    #[test]
    fn method_map() {
        assert_eq!(Method::from_index(1).unwrap(), Method::Hf);
        assert_eq!(Method::from_index(2).unwrap(), Method::Mp2);
        assert_eq!(Method::from_index(3).unwrap(), Method::Cc(2));
        assert_eq!(Method::from_index(4).unwrap(), Method::CcPert(2));
        assert_eq!(Method::from_index(5).unwrap(), Method::Cc(3));
        assert_eq!(Method::from_index(6).unwrap(), Method::CcPert(3));
        assert!(Method::from_index(0).is_err());
        assert_eq!(Method::from_index(4).unwrap().name(), "CCSD(T)");
        assert_eq!(Method::from_index(5).unwrap().name(), "CCSDT");
    }

    #[test]
    fn monotone_in_method() {
        let p = CostParams::default();
        let s = sizes(20, 3, 17, 400);
        let costs: Vec<f64> = (1..=6).map(|m| cost_of_method(&p, m, &s).unwrap()).collect();
        assert!(costs.windows(2).all(|w| w[0] <= w[1]), "{costs:?}");
    }

    #[test]
    fn surrogate_examples() {
        let mut cfg = SurrogateConfig::default();
        cfg.table = AoTable::parse("1 1 5 3\n").unwrap();
        let one = sizes_for_centers(&[(1, [0.0; 3])], 1, &cfg).unwrap();
        assert_eq!((one.n_ao, one.n_occ, one.n_virt, one.n_eri), (5, 1, 4, 81));
        cfg.screening_radius = 1.0;
        let far = sizes_for_centers(&[(1, [0.0; 3]), (1, [5.0, 0.0, 0.0])], 1, &cfg).unwrap();
        // only the two diagonal pairs survive screening
        assert_eq!(far.n_eri, (9 + 9) * (9 + 9));
        assert!(sizes_for_centers(&[(6, [0.0; 3])], 1, &cfg).is_err());
    }

    #[test]
    fn table_parse_errors() {
        assert!(AoTable::parse("1 1 5\n").is_err());
        assert!(AoTable::parse("0 1 5 3\n").is_err());
        assert!(AoTable::parse("# only a comment\n").unwrap().get(1, 1).is_err());
    }
}
