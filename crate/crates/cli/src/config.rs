//! JSON benchmark configuration.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rtaccel_core::benchmark::{CellMap, Checkerboard, MaterialParams, LATTICE};
use rtaccel_core::solver::{IterationConfig, SpaceKind};
use serde::{Deserialize, Serialize};

use crate::Error;

/// Subspace choice as written in config files: `none`, `wc`, `w1`, or
/// `w1-m<m>` for the enriched space plus the last m + 1 iterates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Space(pub SpaceKind);

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            SpaceKind::None => f.write_str("none"),
            SpaceKind::Correction => f.write_str("wc"),
            SpaceKind::Enriched => f.write_str("w1"),
            SpaceKind::EnrichedHistory(m) => write!(f, "w1-m{m}"),
        }
    }
}

impl FromStr for Space {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let kind = match s.trim().to_ascii_lowercase().as_str() {
            "none" => SpaceKind::None,
            "wc" => SpaceKind::Correction,
            "w1" => SpaceKind::Enriched,
            other => match other.strip_prefix("w1-m").and_then(|m| m.parse().ok()) {
                Some(m) => SpaceKind::EnrichedHistory(m),
                None => return Err(Error::Config(format!("unknown subspace {s:?} (none, wc, w1, w1-m<m>)"))),
            },
        };
        Ok(Space(kind))
    }
}

impl TryFrom<String> for Space {
    type Error = Error;

    fn try_from(s: String) -> Result<Self, Error> {
        s.parse()
    }
}

impl From<Space> for String {
    fn from(s: Space) -> String {
        s.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Material {
    pub sigma_s: f64,
    pub sigma_a: f64,
    #[serde(default)]
    pub q: f64,
}

impl From<Material> for MaterialParams {
    fn from(m: Material) -> Self {
        MaterialParams { sigma_s: m.sigma_s, sigma_a: m.sigma_a, q: m.q }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Materials {
    pub scatter: Material,
    pub absorber: Material,
    pub source: Material,
}

/// Spatial cells per side and sphere refinement level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshLevel {
    pub cells: usize,
    pub level: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkConfig {
    /// Side length of one unit cell of the map.
    pub cell_size: f64,
    /// Rows top to bottom; `.` scatter, `A` absorber, `Q` source.
    pub cell_map: Vec<String>,
    pub materials: Materials,
    pub g: Vec<f64>,
    /// K = 0 runs plain source iteration; K > 0 runs every listed subspace.
    #[serde(rename = "K")]
    pub k: Vec<usize>,
    pub spaces: Vec<Space>,
    pub meshes: Vec<MeshLevel>,
    pub tol: f64,
    pub max_iters: usize,
    pub inner_tol: f64,
    pub skip_half_solve: bool,
    /// Record wall-clock seconds; off keeps output byte-identical across reruns.
    pub timings: bool,
    pub output: PathBuf,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        let cb = Checkerboard::default();
        let mat = |p: MaterialParams| Material { sigma_s: p.sigma_s, sigma_a: p.sigma_a, q: p.q };
        Self {
            cell_size: cb.cell_size,
            cell_map: LATTICE.iter().map(|s| s.to_string()).collect(),
            materials: Materials { scatter: mat(cb.scatter), absorber: mat(cb.absorber), source: mat(cb.source) },
            g: vec![0.5],
            k: vec![0, 6],
            spaces: vec![Space(SpaceKind::Correction)],
            meshes: vec![MeshLevel { cells: 28, level: 1 }],
            tol: 1e-6,
            max_iters: 10_000,
            inner_tol: 1e-10,
            skip_half_solve: true,
            timings: false,
            output: PathBuf::from("results"),
        }
    }
}

/// One solver run of a suite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Case {
    pub g: f64,
    pub k: usize,
    pub space: Space,
    pub mesh: MeshLevel,
}

impl Case {
    /// File stem shared by the history CSV of this case.
    pub fn stem(&self) -> String {
        format!("g{}_K{}_{}_c{}_l{}", self.g, self.k, self.space, self.mesh.cells, self.mesh.level)
    }
}

impl BenchmarkConfig {
    pub fn from_json(text: &str) -> Result<Self, Error> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), Error> {
        self.checkerboard()?;
        if let Some(g) = self.g.iter().find(|g| !(0.0..1.0).contains(*g)) {
            return Err(Error::Config(format!("g = {g} outside [0, 1)")));
        }
        if !(self.tol > 0.0) || !(self.inner_tol > 0.0) || self.max_iters == 0 {
            return Err(Error::Config("tol, inner_tol and max_iters must be positive".into()));
        }
        let (w, h) = (self.cell_map[0].trim().len(), self.cell_map.len());
        if let Some(m) = self.meshes.iter().find(|m| m.cells == 0 || m.cells % w != 0 || m.cells % h != 0) {
            return Err(Error::Config(format!("{} cells per side do not resolve a {w}x{h} cell map", m.cells)));
        }
        Ok(())
    }

    pub fn checkerboard(&self) -> Result<Checkerboard, Error> {
        let map = CellMap::parse(&self.cell_map)?;
        if !(self.cell_size > 0.0) {
            return Err(Error::Config("cell_size must be positive".into()));
        }
        Ok(Checkerboard {
            map,
            cell_size: self.cell_size,
            scatter: self.materials.scatter.into(),
            absorber: self.materials.absorber.into(),
            source: self.materials.source.into(),
        })
    }

    pub fn iteration(&self, case: &Case) -> IterationConfig {
        IterationConfig {
            space: case.space.0,
            k: case.k,
            tol: self.tol,
            max_iters: self.max_iters,
            inner_tol: self.inner_tol,
            skip_half_solve: self.skip_half_solve,
            verify_residuals: false,
        }
    }

    /// (K, subspace) runs in output order. K = 0 contributes one
    /// source-iteration run; `none` is skipped for K > 0.
    pub fn runs(&self) -> Vec<(usize, Space)> {
        let mut out = Vec::new();
        for &k in &self.k {
            if k == 0 {
                out.push((0, Space(SpaceKind::None)));
                continue;
            }
            for &space in &self.spaces {
                if space.0 != SpaceKind::None {
                    out.push((k, space));
                }
            }
        }
        out
    }

    /// Every run for every mesh and g, ordered by mesh, then g, then run.
    pub fn cases(&self) -> Vec<Case> {
        let runs = self.runs();
        let mut out = Vec::new();
        for &mesh in &self.meshes {
            for &g in &self.g {
                out.extend(runs.iter().map(|&(k, space)| Case { g, k, space, mesh }));
            }
        }
        out
    }
}

/// Command-line replacements for single config keys.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub g: Option<Vec<f64>>,
    pub k: Option<Vec<usize>>,
    pub spaces: Option<Vec<Space>>,
    pub cells: Option<Vec<usize>>,
    pub levels: Option<Vec<usize>>,
    pub tol: Option<f64>,
    pub output: Option<PathBuf>,
}

impl Overrides {
    /// `cells` and `levels` replace the mesh list by their product.
    pub fn apply(&self, cfg: &mut BenchmarkConfig) -> Result<(), Error> {
        if let Some(v) = &self.g {
            cfg.g = v.clone();
        }
        if let Some(v) = &self.k {
            cfg.k = v.clone();
        }
        if let Some(v) = &self.spaces {
            cfg.spaces = v.clone();
        }
        if self.cells.is_some() || self.levels.is_some() {
            let cells: Vec<usize> = match &self.cells {
                Some(c) => c.clone(),
                None => cfg.meshes.iter().map(|m| m.cells).collect(),
            };
            let levels: Vec<usize> = match &self.levels {
                Some(l) => l.clone(),
                None => cfg.meshes.iter().map(|m| m.level).collect(),
            };
            let mut meshes = Vec::new();
            for &c in &cells {
                for &l in &levels {
                    let m = MeshLevel { cells: c, level: l };
                    if !meshes.contains(&m) {
                        meshes.push(m);
                    }
                }
            }
            cfg.meshes = meshes;
        }
        if let Some(t) = self.tol {
            cfg.tol = t;
        }
        if let Some(o) = &self.output {
            cfg.output = o.clone();
        }
        cfg.validate()
    }
}
