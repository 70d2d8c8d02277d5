//! Run configuration for `supanova adapt`, read from TOML.
//!
//! Relative paths are resolved against the directory of the config file.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use supanova::adaptive::AdaptiveConfig;
use supanova::cost::{AoTable, SurrogateConfig};
use supanova::fragment::{heuristic_fragment, quotient_graph, CovalentRadii, Fragmentation, Geometry};
use supanova::graph::{build_thresholded_graph, GraphPoset, InteractionGraph};
use supanova::poset::{PosetAxis, PosetGrid};
use supanova::potentials::{ExternalConfig, SyntheticParams};

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub structure: Option<StructureConfig>,
    pub graph: GraphConfig,
    pub grid: GridConfig,
    pub evaluator: EvaluatorConfig,
    pub adaptive: AdaptiveConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureConfig {
    /// XYZ file, optionally with a BONDS block.
    pub path: PathBuf,
    /// `heuristic`, `singleton`, or the path of a fragmentation file.
    #[serde(default = "default_fragmentation")]
    pub fragmentation: String,
    /// Extra `symbol radius` lines for link-atom placement.
    pub radii: Option<PathBuf>,
    /// Replacement `Z p count shellpairs` table for the size surrogate.
    pub ao_table: Option<PathBuf>,
}

fn default_fragmentation() -> String {
    "heuristic".into()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphMode {
    /// Bond graph of the structure, or the explicit edges below.
    #[default]
    Bonds,
    /// Fragments joined when any atoms lie within `r_cut`.
    Threshold,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphConfig {
    pub mode: GraphMode,
    pub r_cut: Option<f64>,
    /// Edge-list file (1-based `i j` lines); used when there is no structure.
    pub file: Option<PathBuf>,
    /// Inline 1-based edges; used when there is no structure.
    pub edges: Option<Vec<(u32, u32)>>,
    pub vertex_count: Option<u32>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubsetAxis {
    Boolean,
    Conn,
    #[default]
    Convex,
    Simplex,
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub subsets: SubsetAxis,
    /// Largest simplex rank for `subsets = "simplex"`.
    pub rank: i32,
    pub methods: u32,
    pub bases: u32,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { subsets: SubsetAxis::Convex, rank: 1, methods: 1, bases: 1 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvaluatorKind {
    #[default]
    Synthetic,
    External,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluatorConfig {
    pub kind: EvaluatorKind,
    pub synthetic: SyntheticParams,
    pub external: ExternalConfig,
    /// Persistent result ledger for external runs.
    pub ledger: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub csv: Option<PathBuf>,
    pub jsonl: Option<PathBuf>,
    pub summary: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg: RunConfig = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(s) = &mut self.structure {
            fix(&mut s.path);
            if !matches!(s.fragmentation.as_str(), "heuristic" | "singleton") {
                let mut p = PathBuf::from(&s.fragmentation);
                fix(&mut p);
                s.fragmentation = p.to_string_lossy().into_owned();
            }
            s.radii.as_mut().map(fix);
            s.ao_table.as_mut().map(fix);
        }
        self.graph.file.as_mut().map(fix);
        self.evaluator.ledger.as_mut().map(fix);
        for p in [&mut self.output.csv, &mut self.output.jsonl, &mut self.output.summary].into_iter().flatten() {
            fix(p);
        }
    }
}

/// Everything derived from the structure section.
pub struct Molecule {
    pub geometry: Arc<Geometry>,
    pub fragmentation: Arc<Fragmentation>,
    pub radii: CovalentRadii,
    pub surrogate: SurrogateConfig,
}

pub fn read_geometry(path: &Path) -> Result<Geometry> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Geometry::parse_xyz(&text).with_context(|| format!("parsing {}", path.display()))?)
}

pub fn fragment_geometry(geometry: &Geometry, mode: &str) -> Result<Fragmentation> {
    Ok(match mode {
        "heuristic" => heuristic_fragment(geometry)?,
        "singleton" => Fragmentation::singletons(geometry.len()),
        path => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
            Fragmentation::parse(&text, geometry.len()).with_context(|| format!("parsing {path}"))?
        }
    })
}

/// Fragment-level interaction graph of a structure.
pub fn fragment_graph(geometry: &Geometry, frag: &Fragmentation, mode: GraphMode, r_cut: Option<f64>) -> Result<InteractionGraph> {
    let atom_graph = match mode {
        GraphMode::Bonds => geometry.bond_graph()?,
        GraphMode::Threshold => {
            let r = r_cut.context("graph mode threshold needs r_cut")?;
            build_thresholded_graph(&geometry.positions(), r)?
        }
    };
    Ok(quotient_graph(&atom_graph, frag)?)
}

impl StructureConfig {
    pub fn load(&self) -> Result<Molecule> {
        let geometry = read_geometry(&self.path)?;
        let fragmentation = fragment_geometry(&geometry, &self.fragmentation)?;
        let radii = match &self.radii {
            Some(p) => CovalentRadii::parse(&std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)?,
            None => CovalentRadii::default(),
        };
        let mut surrogate = SurrogateConfig::default();
        if let Some(p) = &self.ao_table {
            surrogate.table = AoTable::parse(&std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)?;
        }
        Ok(Molecule { geometry: Arc::new(geometry), fragmentation: Arc::new(fragmentation), radii, surrogate })
    }
}

impl GraphConfig {
    /// The graph when no structure is given.
    pub fn standalone(&self, fallback_vertices: u32) -> Result<InteractionGraph> {
        if let Some(p) = &self.file {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            return Ok(InteractionGraph::parse_edge_list(&text, self.vertex_count)?);
        }
        let n = self.vertex_count.unwrap_or(fallback_vertices);
        match &self.edges {
            Some(edges) => Ok(InteractionGraph::from_one_based(n, edges)?),
            None => Ok(InteractionGraph::path(n)),
        }
    }
}

impl GridConfig {
    pub fn build(&self, graph: &InteractionGraph) -> Result<PosetGrid> {
        if self.methods == 0 || self.bases == 0 {
            bail!("methods and bases must be at least 1");
        }
        let subsets = match self.subsets {
            SubsetAxis::Boolean => PosetAxis::Boolean(graph.vertex_count()),
            SubsetAxis::Conn => PosetAxis::graph(GraphPoset::connected(graph.clone())),
            SubsetAxis::Convex => PosetAxis::graph(GraphPoset::convex(graph.clone())),
            SubsetAxis::Simplex => PosetAxis::graph(GraphPoset::simplex(graph.clone(), self.rank)?),
        };
        let mut axes = vec![subsets];
        if self.methods > 1 || self.bases > 1 {
            axes.push(PosetAxis::ChainBounded(self.methods));
        }
        if self.bases > 1 {
            axes.push(PosetAxis::ChainBounded(self.bases));
        }
        Ok(PosetGrid::new(axes)?)
    }
}
