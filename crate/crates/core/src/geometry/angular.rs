use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{arc_between, atan2, cos, cross3, dot3, fabs, neg3, norm3, normalize3, sin, V3};
use crate::quadrature::{gauss_legendre, triangle_degree6};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AngularDomain {
    Circle,
    Sphere,
}

impl AngularDomain {
    /// Number of ambient coordinates, and of odd dofs per element pair.
    pub fn dim(self) -> usize {
        match self {
            AngularDomain::Circle => 2,
            AngularDomain::Sphere => 3,
        }
    }

    pub fn total_measure(self) -> f64 {
        match self {
            AngularDomain::Circle => 2.0 * core::f64::consts::PI,
            AngularDomain::Sphere => 4.0 * core::f64::consts::PI,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngularCell {
    /// Counter-clockwise arc from the first to the second vertex.
    Arc([usize; 2]),
    /// Spherical triangle bounded by great circles.
    Triangle([usize; 3]),
}

/// Quadrature nodes (unit vectors) and weights on one angular element.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ElementRule {
    pub nodes: Vec<V3>,
    pub weights: Vec<f64>,
}

/// Mesh of S¹ or S² closed under s ↦ −s.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularMesh {
    domain: AngularDomain,
    vertices: Vec<V3>,
    cells: Vec<AngularCell>,
    pairing: Vec<usize>,
    pairs: Vec<[usize; 2]>,
    pair_of: Vec<usize>,
    measures: Vec<f64>,
    diameters: Vec<f64>,
    quadrature: Vec<ElementRule>,
}

const GAUSS_POINTS_PER_ARC: usize = 8;

impl AngularMesh {
    /// Validates cells and the antipodal pairing. Pair k collects the
    /// k-th element e with e < pairing[e] and its partner.
    pub fn from_parts(
        domain: AngularDomain,
        vertices: Vec<V3>,
        cells: Vec<AngularCell>,
        pairing: Vec<usize>,
    ) -> Result<Self> {
        let n = cells.len();
        if n < 2 || pairing.len() != n {
            return Err(Error::InvalidMesh("pairing must cover every element".into()));
        }
        for v in &vertices {
            if fabs(norm3(*v) - 1.0) > 1e-12 || (domain == AngularDomain::Circle && v[2] != 0.0) {
                return Err(Error::InvalidMesh("vertex off the unit sphere or circle".into()));
            }
        }
        for (e, c) in cells.iter().enumerate() {
            let ok = match (domain, c) {
                (AngularDomain::Circle, AngularCell::Arc(v)) => v.iter().all(|&i| i < vertices.len()),
                (AngularDomain::Sphere, AngularCell::Triangle(v)) => {
                    v.iter().all(|&i| i < vertices.len())
                }
                _ => false,
            };
            if !ok {
                return Err(Error::InvalidMesh(format!("element {e} does not fit the domain")));
            }
        }
        for (e, &p) in pairing.iter().enumerate() {
            if p >= n || p == e || pairing[p] != e {
                return Err(Error::InvalidMesh(format!(
                    "pairing is not a fixed-point-free involution at {e}"
                )));
            }
        }
        let mut mesh = Self {
            domain,
            vertices,
            cells,
            pairing,
            pairs: Vec::new(),
            pair_of: alloc::vec![0; n],
            measures: Vec::with_capacity(n),
            diameters: Vec::with_capacity(n),
            quadrature: Vec::new(),
        };
        for e in 0..n {
            let m = mesh.exact_measure(e);
            if !(m > 0.0) {
                return Err(Error::InvalidMesh(format!("element {e} has no area")));
            }
            mesh.measures.push(m);
            mesh.diameters.push(mesh.compute_diameter(e));
        }
        for e in 0..n {
            let p = mesh.pairing[e];
            if e < p {
                let k = mesh.pairs.len();
                mesh.pairs.push([e, p]);
                mesh.pair_of[e] = k;
                mesh.pair_of[p] = k;
            }
        }
        for e in 0..n {
            let p = mesh.pairing[e];
            let corners = mesh.corners(e);
            let anti = mesh.corners(p);
            let mirrored = corners.iter().all(|c| anti.iter().any(|a| norm3([c[0] + a[0], c[1] + a[1], c[2] + a[2]]) < 1e-10));
            if !mirrored {
                return Err(Error::InvalidMesh(format!("element {p} is not the antipode of {e}")));
            }
        }
        mesh.quadrature = (0..n).map(|e| mesh.rule(e, 1)).collect();
        Ok(mesh)
    }

    /// 2·n_pairs equal arcs; arc i and arc i + n_pairs are antipodal.
    pub fn circle(n_pairs: usize) -> Result<Self> {
        if n_pairs < 2 {
            return Err(Error::InvalidArgument("a circle mesh needs at least 2 pairs".into()));
        }
        let n = 2 * n_pairs;
        let mut vertices = Vec::with_capacity(n);
        for i in 0..n_pairs {
            let t = core::f64::consts::PI * i as f64 / n_pairs as f64;
            vertices.push([cos(t), sin(t), 0.0]);
        }
        for i in 0..n_pairs {
            vertices.push(neg3(vertices[i]));
        }
        let cells = (0..n).map(|i| AngularCell::Arc([i, (i + 1) % n])).collect();
        let pairing = (0..n).map(|i| (i + n_pairs) % n).collect();
        Self::from_parts(AngularDomain::Circle, vertices, cells, pairing)
    }

    /// Octahedron refined `level` times by edge midpoints projected to the
    /// sphere. Elements k and k + n/2 are antipodes with matching vertex order.
    pub fn octahedral_sphere(level: usize) -> Result<Self> {
        if level > 8 {
            return Err(Error::InvalidArgument("sphere refinement level above 8".into()));
        }
        let mut vertices: Vec<V3> = alloc::vec![
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0],
        ];
        let mut faces: Vec<[usize; 3]> = alloc::vec![
            [0, 1, 4],
            [1, 2, 4],
            [2, 3, 4],
            [3, 0, 4],
            [2, 3, 5],
            [3, 0, 5],
            [0, 1, 5],
            [1, 2, 5],
        ];
        let mut midpoints: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for _ in 0..level {
            let mut next = Vec::with_capacity(4 * faces.len());
            for &[a, b, c] in &faces {
                let mut mid = |i: usize, j: usize| -> usize {
                    *midpoints.entry((i.min(j), i.max(j))).or_insert_with(|| {
                        let (p, q) = (vertices[i], vertices[j]);
                        vertices.push(normalize3([p[0] + q[0], p[1] + q[1], p[2] + q[2]]));
                        vertices.len() - 1
                    })
                };
                let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
                next.extend_from_slice(&[[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
            }
            faces = next;
        }
        let half = faces.len() / 2;
        let pairing = (0..faces.len()).map(|e| (e + half) % faces.len()).collect();
        let cells = faces.into_iter().map(AngularCell::Triangle).collect();
        Self::from_parts(AngularDomain::Sphere, vertices, cells, pairing)
    }

    pub fn domain(&self) -> AngularDomain {
        self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn vertices(&self) -> &[V3] {
        &self.vertices
    }

    pub fn cells(&self) -> &[AngularCell] {
        &self.cells
    }

    pub fn pairing(&self) -> &[usize] {
        &self.pairing
    }

    pub fn n_elements(&self) -> usize {
        self.cells.len()
    }

    /// n_S^+
    pub fn n_pairs(&self) -> usize {
        self.pairs.len()
    }

    /// n_S^-: odd dofs, `dim` per pair.
    pub fn n_odd(&self) -> usize {
        self.pairs.len() * self.dim()
    }

    /// Elements of pair k; the first is the representative.
    pub fn pair(&self, k: usize) -> [usize; 2] {
        self.pairs[k]
    }

    pub fn pair_of(&self, e: usize) -> usize {
        self.pair_of[e]
    }

    pub fn measures(&self) -> &[f64] {
        &self.measures
    }

    pub fn diameter(&self, e: usize) -> f64 {
        self.diameters[e]
    }

    pub fn max_diameter(&self) -> f64 {
        self.diameters.iter().copied().fold(0.0, f64::max)
    }

    /// Default per-element rule (one subdivision level).
    pub fn quadrature(&self, e: usize) -> &ElementRule {
        &self.quadrature[e]
    }

    pub fn corners(&self, e: usize) -> Vec<V3> {
        match self.cells[e] {
            AngularCell::Arc(v) => v.iter().map(|&i| self.vertices[i]).collect(),
            AngularCell::Triangle(v) => v.iter().map(|&i| self.vertices[i]).collect(),
        }
    }

    pub fn centroid(&self, e: usize) -> V3 {
        let rule = &self.quadrature[e];
        let mut c = [0.0; 3];
        for (p, w) in rule.nodes.iter().zip(&rule.weights) {
            for d in 0..3 {
                c[d] += w * p[d];
            }
        }
        normalize3(c)
    }

    fn exact_measure(&self, e: usize) -> f64 {
        match self.cells[e] {
            AngularCell::Arc([a, b]) => arc_angle(self.vertices[a], self.vertices[b]),
            AngularCell::Triangle([a, b, c]) => {
                let (a, b, c) = (self.vertices[a], self.vertices[b], self.vertices[c]);
                let num = fabs(dot3(a, cross3(b, c)));
                let den = 1.0 + dot3(a, b) + dot3(b, c) + dot3(c, a);
                2.0 * atan2(num, den)
            }
        }
    }

    fn compute_diameter(&self, e: usize) -> f64 {
        let c = self.corners(e);
        match self.cells[e] {
            AngularCell::Arc(_) => self.exact_measure(e),
            AngularCell::Triangle(_) => {
                let mut d: f64 = 0.0;
                for i in 0..3 {
                    d = d.max(arc_between(c[i], c[(i + 1) % 3]));
                }
                d
            }
        }
    }

    /// Quadrature on element e with 2^sublevel subdivisions per edge (sphere)
    /// or 2^sublevel sub-arcs (circle). Weights sum to the exact measure.
    /// The rule on the partner element is the exact negation of the
    /// representative's rule.
    pub fn rule(&self, e: usize, sublevel: usize) -> ElementRule {
        let rep = e.min(self.pairing[e]);
        let mut rule = match self.cells[rep] {
            AngularCell::Arc([a, b]) => arc_rule(self.vertices[a], self.vertices[b], sublevel),
            AngularCell::Triangle([a, b, c]) => {
                triangle_rule([self.vertices[a], self.vertices[b], self.vertices[c]], sublevel)
            }
        };
        let total: f64 = rule.weights.iter().sum();
        let scale = self.measures[rep] / total;
        rule.weights.iter_mut().for_each(|w| *w *= scale);
        if rep != e {
            rule.nodes.iter_mut().for_each(|p| *p = neg3(*p));
        }
        rule
    }
}

fn arc_angle(a: V3, b: V3) -> f64 {
    let t = atan2(a[0] * b[1] - a[1] * b[0], dot3(a, b));
    if t <= 0.0 {
        t + 2.0 * core::f64::consts::PI
    } else {
        t
    }
}

fn arc_rule(a: V3, b: V3, sublevel: usize) -> ElementRule {
    let theta = arc_angle(a, b);
    let (x, w) = gauss_legendre(GAUSS_POINTS_PER_ARC);
    let m = 1usize << sublevel;
    let h = theta / m as f64;
    let mut rule = ElementRule::default();
    for s in 0..m {
        for (xi, wi) in x.iter().zip(&w) {
            let t = h * (s as f64 + 0.5 * (xi + 1.0));
            let (c, sn) = (cos(t), sin(t));
            rule.nodes.push([a[0] * c - a[1] * sn, a[0] * sn + a[1] * c, 0.0]);
            rule.weights.push(0.5 * h * wi);
        }
    }
    rule
}

/// Degree-6 rule on sub-triangles of the flat triangle, pushed to the
/// sphere by central projection with Jacobian h / |p|³.
fn triangle_rule(v: [V3; 3], sublevel: usize) -> ElementRule {
    let base = triangle_degree6();
    let m = 1usize << sublevel;
    let e1 = [v[1][0] - v[0][0], v[1][1] - v[0][1], v[1][2] - v[0][2]];
    let e2 = [v[2][0] - v[0][0], v[2][1] - v[0][1], v[2][2] - v[0][2]];
    let nrm = cross3(e1, e2);
    let flat_area = 0.5 * norm3(nrm);
    let height = fabs(dot3(normalize3(nrm), v[0]));
    let sub_area = flat_area / (m * m) as f64;
    let mut rule = ElementRule::default();
    let point = |s: f64, t: f64| -> V3 {
        let (s, t) = (s / m as f64, t / m as f64);
        let l0 = 1.0 - s - t;
        [
            l0 * v[0][0] + s * v[1][0] + t * v[2][0],
            l0 * v[0][1] + s * v[1][1] + t * v[2][1],
            l0 * v[0][2] + s * v[1][2] + t * v[2][2],
        ]
    };
    let mut push = |corners: [(f64, f64); 3]| {
        for (l, w) in &base {
            let s = l[0] * corners[0].0 + l[1] * corners[1].0 + l[2] * corners[2].0;
            let t = l[0] * corners[0].1 + l[1] * corners[1].1 + l[2] * corners[2].1;
            let p = point(s, t);
            let r = norm3(p);
            rule.nodes.push([p[0] / r, p[1] / r, p[2] / r]);
            rule.weights.push(w * sub_area * height / (r * r * r));
        }
    };
    for j in 0..m {
        for i in 0..(m - j) {
            let (fi, fj) = (i as f64, j as f64);
            push([(fi, fj), (fi + 1.0, fj), (fi, fj + 1.0)]);
            if i + j + 1 < m {
                push([(fi + 1.0, fj), (fi + 1.0, fj + 1.0), (fi, fj + 1.0)]);
            }
        }
    }
    rule
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_basics() {
        let m = AngularMesh::circle(2).unwrap();
        assert_eq!(m.n_elements(), 4);
        assert_eq!(m.pairing(), &[2, 3, 0, 1]);
        let m = AngularMesh::circle(8).unwrap();
        for &a in m.measures() {
            assert!((a - core::f64::consts::PI / 8.0).abs() < 1e-14);
        }
        assert!(AngularMesh::circle(1).is_err());
    }

    #[test]
    fn sphere_counts_and_measure() {
        for level in 0..4 {
            let m = AngularMesh::octahedral_sphere(level).unwrap();
            assert_eq!(m.n_elements(), 8 << (2 * level));
            assert_eq!(m.n_pairs(), 4 << (2 * level));
            assert_eq!(m.n_odd(), 3 * m.n_pairs());
            let total: f64 = m.measures().iter().sum();
            assert!((total - 4.0 * core::f64::consts::PI).abs() < 1e-12);
            let qtotal: f64 = (0..m.n_elements()).map(|e| m.quadrature(e).weights.iter().sum::<f64>()).sum();
            assert!((qtotal - 4.0 * core::f64::consts::PI).abs() < 1e-12);
        }
    }

    #[test]
    fn antipodal_rules_are_negations() {
        let m = AngularMesh::octahedral_sphere(1).unwrap();
        for k in 0..m.n_pairs() {
            let [a, b] = m.pair(k);
            let (ra, rb) = (m.rule(a, 2), m.rule(b, 2));
            for (p, q) in ra.nodes.iter().zip(&rb.nodes) {
                assert_eq!(*p, neg3(*q));
            }
            assert_eq!(ra.weights, rb.weights);
        }
    }

    #[test]
    fn sphere_rule_integrates_linear_functions() {
        // ∫_K s dΩ = ½ Σ_edges angle(e) · unit normal of the edge plane
        let m = AngularMesh::octahedral_sphere(1).unwrap();
        for e in 0..m.n_elements() {
            let c = m.corners(e);
            let mut exact = [0.0; 3];
            let orient = if dot3(cross3(c[0], c[1]), c[2]) > 0.0 { 1.0 } else { -1.0 };
            for i in 0..3 {
                let (a, b) = (c[i], c[(i + 1) % 3]);
                let n = normalize3(cross3(a, b));
                let ang = arc_between(a, b);
                for d in 0..3 {
                    exact[d] += 0.5 * orient * ang * n[d];
                }
            }
            let r = m.rule(e, 2);
            for d in 0..3 {
                let q: f64 = r.nodes.iter().zip(&r.weights).map(|(p, w)| w * p[d]).sum();
                assert!((q - exact[d]).abs() < 1e-9, "e={e} d={d} {q} {}", exact[d]);
            }
        }
    }
}
