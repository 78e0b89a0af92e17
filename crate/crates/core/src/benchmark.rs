//! Checkerboard lattice: a square of unit cells, each scattering, absorbing
//! or scattering with an isotropic source.

use alloc::string::String;
use alloc::vec::Vec;

use crate::assembly::{AngularOptions, OpticalField, SourceSpec, SystemMatrices};
use crate::error::{invalid, Result};
use crate::geometry::{AngularMesh, SpatialMesh};
use crate::operators::{TransportOptions, TransportProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Material {
    Scatter,
    Absorber,
    Source,
}

impl Material {
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            '.' => Some(Self::Scatter),
            'A' => Some(Self::Absorber),
            'Q' => Some(Self::Source),
            _ => None,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Self::Scatter => '.',
            Self::Absorber => 'A',
            Self::Source => 'Q',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    pub sigma_s: f64,
    pub sigma_a: f64,
    pub q: f64,
}

/// Rows are stored top row first, as they are drawn.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellMap {
    rows: Vec<Vec<Material>>,
}

pub const LATTICE: [&str; 7] = [".......", ".A...A.", "..A.A..", ".A.Q.A.", "..A.A..", ".A.A.A.", "......."];

impl CellMap {
    pub fn parse<S: AsRef<str>>(rows: &[S]) -> Result<Self> {
        let rows: Vec<Vec<Material>> = rows
            .iter()
            .map(|r| {
                r.as_ref()
                    .trim()
                    .chars()
                    .map(|c| Material::from_char(c).ok_or_else(|| invalid(alloc::format!("unknown cell symbol {c:?}"))))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        if rows.is_empty() || rows[0].is_empty() || rows.iter().any(|r| r.len() != rows[0].len()) {
            return Err(invalid("cell map must be a non-empty rectangle"));
        }
        Ok(Self { rows })
    }

    pub fn lattice() -> Self {
        Self::parse(&LATTICE).expect("built-in layout")
    }

    pub fn width(&self) -> usize {
        self.rows[0].len()
    }

    pub fn height(&self) -> usize {
        self.rows.len()
    }

    /// Material of unit cell (cx, cy), cy counted from the bottom.
    pub fn at(&self, cx: usize, cy: usize) -> Material {
        self.rows[self.height() - 1 - cy][cx]
    }

    pub fn rows(&self) -> Vec<String> {
        self.rows.iter().map(|r| r.iter().map(|m| m.to_char()).collect()).collect()
    }

    pub fn count(&self, m: Material) -> usize {
        self.rows.iter().flatten().filter(|&&x| x == m).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkerboard {
    pub map: CellMap,
    /// Side length of one unit cell.
    pub cell_size: f64,
    pub scatter: MaterialParams,
    pub absorber: MaterialParams,
    pub source: MaterialParams,
}

impl Default for Checkerboard {
    fn default() -> Self {
        Self {
            map: CellMap::lattice(),
            cell_size: 1.0,
            scatter: MaterialParams { sigma_s: 10.0, sigma_a: 0.01, q: 0.0 },
            absorber: MaterialParams { sigma_s: 0.0, sigma_a: 1.0, q: 0.0 },
            source: MaterialParams { sigma_s: 10.0, sigma_a: 0.01, q: 1.0 },
        }
    }
}

/// Meshes and data of one discretized instance.
#[derive(Debug, Clone)]
pub struct Instance {
    pub spatial: SpatialMesh,
    pub angular: AngularMesh,
    pub optics: OpticalField,
    pub source: SourceSpec,
}

impl Checkerboard {
    pub fn params(&self, m: Material) -> MaterialParams {
        match m {
            Material::Scatter => self.scatter,
            Material::Absorber => self.absorber,
            Material::Source => self.source,
        }
    }

    /// `cells` mesh cells per side (each split into two triangles) and an
    /// octahedral sphere refined `level` times. `cells` must be a multiple of
    /// the map width and height so that no triangle straddles two materials.
    pub fn instance(&self, cells: usize, level: usize, g: f64) -> Result<Instance> {
        let (w, h) = (self.map.width(), self.map.height());
        if cells == 0 || cells % w != 0 || cells % h != 0 {
            return Err(invalid(alloc::format!("cells per side must be a positive multiple of {w} and {h}")));
        }
        if !(self.cell_size > 0.0) {
            return Err(invalid("cell size must be positive"));
        }
        let lx = self.cell_size * w as f64;
        let ly = self.cell_size * h as f64;
        let spatial = SpatialMesh::rectangle(cells, cells, lx, ly)?;
        let angular = AngularMesh::octahedral_sphere(level)?;
        let ne = spatial.n_elements();
        let (mut sa, mut ss, mut q) = (Vec::with_capacity(ne), Vec::with_capacity(ne), Vec::with_capacity(ne));
        for t in 0..ne {
            let c = spatial.centroid(t);
            let cx = ((c[0] / lx * w as f64) as usize).min(w - 1);
            let cy = ((c[1] / ly * h as f64) as usize).min(h - 1);
            let p = self.params(self.map.at(cx, cy));
            sa.push(p.sigma_a);
            ss.push(p.sigma_s);
            q.push(p.q);
        }
        let optics = OpticalField::new(sa, ss, g)?;
        let source = SourceSpec::volume(&spatial, q);
        Ok(Instance { spatial, angular, optics, source })
    }

    pub fn problem(
        &self,
        cells: usize,
        level: usize,
        g: f64,
        angular_opts: &AngularOptions,
        transport_opts: &TransportOptions,
    ) -> Result<TransportProblem> {
        let inst = self.instance(cells, level, g)?;
        let m = SystemMatrices::assemble(&inst.spatial, &inst.angular, &inst.optics, &inst.source, angular_opts)?;
        TransportProblem::new(m, transport_opts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_layout() {
        let m = CellMap::lattice();
        assert_eq!(m.count(Material::Absorber), 11);
        assert_eq!(m.count(Material::Source), 1);
        assert_eq!(m.at(3, 3), Material::Source);
        for cy in 0..7 {
            for cx in 0..7 {
                let inner = (1..=5).contains(&cx) && (1..=5).contains(&cy);
                let expect = if (cx, cy) == (3, 3) {
                    Material::Source
                } else if inner && (cx + cy) % 2 == 0 && (cx, cy) != (3, 5) {
                    Material::Absorber
                } else {
                    Material::Scatter
                };
                assert_eq!(m.at(cx, cy), expect, "cell ({cx},{cy})");
            }
        }
        assert_eq!(CellMap::parse(&m.rows()).unwrap(), m);
    }

    #[test]
    fn instance_sizes_and_rho() {
        let cb = Checkerboard::default();
        assert!(cb.instance(10, 0, 0.5).is_err());
        let inst = cb.instance(14, 0, 0.5).unwrap();
        assert_eq!(inst.spatial.n_vertices(), 225);
        assert_eq!(inst.spatial.n_elements(), 2 * 14 * 14);
        assert!((inst.optics.rho() - 10.0 / 10.01).abs() < 1e-15);
        let qsum: f64 = inst.source.q.iter().zip(inst.spatial.areas()).map(|(q, a)| q * a).sum();
        assert!((qsum - 1.0).abs() < 1e-12);
        let absorbed: f64 =
            inst.optics.sigma_s().iter().zip(inst.spatial.areas()).filter(|(s, _)| **s == 0.0).map(|(_, a)| a).sum();
        assert!((absorbed - 11.0).abs() < 1e-12);
    }
}
