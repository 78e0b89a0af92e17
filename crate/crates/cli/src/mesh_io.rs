//! Plain-text mesh files.
//!
//! ```text
//! rtaccel-mesh 1 spatial          rtaccel-mesh 1 angular sphere|circle
//! vertices <n>                    vertices <n>
//! <x> <y>            (n lines)    <x> <y> <z>        (n lines)
//! triangles <m>                   elements <m>
//! <a> <b> <c>        (m lines)    <a> <b> [<c>]      (m lines, 2 for arcs)
//!                                 pairing
//!                                 <antipodal element> (m lines)
//! ```
//!
//! Coordinates are written in shortest round-trip form, so a dump followed
//! by a load reproduces the mesh bit for bit. Blank lines and lines starting
//! with `#` are ignored.

use std::fmt::Write;

use rtaccel_core::geometry::{AngularCell, AngularDomain};
use rtaccel_core::{AngularMesh, SpatialMesh};

use crate::Error;

const MAGIC: &str = "rtaccel-mesh 1";

pub fn dump_spatial(mesh: &SpatialMesh) -> String {
    let mut s = format!("{MAGIC} spatial\nvertices {}\n", mesh.n_vertices());
    for v in mesh.vertices() {
        let _ = writeln!(s, "{:?} {:?}", v[0], v[1]);
    }
    let _ = writeln!(s, "triangles {}", mesh.n_elements());
    for t in mesh.triangles() {
        let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
    }
    s
}

pub fn dump_angular(mesh: &AngularMesh) -> String {
    let domain = match mesh.domain() {
        AngularDomain::Sphere => "sphere",
        AngularDomain::Circle => "circle",
    };
    let mut s = format!("{MAGIC} angular {domain}\nvertices {}\n", mesh.vertices().len());
    for v in mesh.vertices() {
        let _ = writeln!(s, "{:?} {:?} {:?}", v[0], v[1], v[2]);
    }
    let _ = writeln!(s, "elements {}", mesh.n_elements());
    for c in mesh.cells() {
        let _ = match c {
            AngularCell::Arc([a, b]) => writeln!(s, "{a} {b}"),
            AngularCell::Triangle([a, b, c]) => writeln!(s, "{a} {b} {c}"),
        };
    }
    s.push_str("pairing\n");
    for p in mesh.pairing() {
        let _ = writeln!(s, "{p}");
    }
    s
}

struct Lines<'a> {
    inner: std::iter::Peekable<Box<dyn Iterator<Item = (usize, &'a str)> + 'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let it: Box<dyn Iterator<Item = (usize, &'a str)>> = Box::new(
            text.lines()
                .enumerate()
                .map(|(i, l)| (i + 1, l.trim()))
                .filter(|(_, l)| !l.is_empty() && !l.starts_with('#')),
        );
        Self { inner: it.peekable(), last: 0 }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Format { line: self.last, msg: msg.into() }
    }

    fn next(&mut self) -> Result<&'a str, Error> {
        match self.inner.next() {
            Some((n, l)) => {
                self.last = n;
                Ok(l)
            }
            None => Err(self.err("unexpected end of file")),
        }
    }

    fn keyword(&mut self, key: &str) -> Result<Vec<&'a str>, Error> {
        let line = self.next()?;
        let mut words = line.split_whitespace();
        if words.next() != Some(key) {
            return Err(self.err(format!("expected {key:?}")));
        }
        Ok(words.collect())
    }

    fn count(&mut self, key: &str) -> Result<usize, Error> {
        let words = self.keyword(key)?;
        match words.as_slice() {
            [n] => n.parse().map_err(|_| self.err(format!("bad count {n:?}"))),
            _ => Err(self.err(format!("expected \"{key} <count>\""))),
        }
    }

    fn numbers<T: std::str::FromStr>(&mut self, allowed: &[usize]) -> Result<Vec<T>, Error> {
        let line = self.next()?;
        let vals: Vec<T> = line
            .split_whitespace()
            .map(|w| w.parse().map_err(|_| self.err(format!("bad number {w:?}"))))
            .collect::<Result<_, _>>()?;
        if !allowed.contains(&vals.len()) {
            return Err(self.err(format!("expected {allowed:?} values, found {}", vals.len())));
        }
        Ok(vals)
    }

    fn finish(&mut self) -> Result<(), Error> {
        match self.inner.next() {
            Some((n, _)) => Err(Error::Format { line: n, msg: "trailing content".into() }),
            None => Ok(()),
        }
    }

    fn header(&mut self, kind: &str) -> Result<Vec<&'a str>, Error> {
        let line = self.next()?;
        let rest = line.strip_prefix(MAGIC).ok_or_else(|| self.err(format!("missing {MAGIC:?} header")))?;
        let words: Vec<&str> = rest.split_whitespace().collect();
        if words.first() != Some(&kind) {
            return Err(self.err(format!("not a {kind} mesh")));
        }
        Ok(words[1..].to_vec())
    }
}

pub fn load_spatial(text: &str) -> Result<SpatialMesh, Error> {
    let mut l = Lines::new(text);
    l.header("spatial")?;
    let nv = l.count("vertices")?;
    let mut verts = Vec::with_capacity(nv);
    for _ in 0..nv {
        let v: Vec<f64> = l.numbers(&[2])?;
        verts.push([v[0], v[1]]);
    }
    let nt = l.count("triangles")?;
    let mut tris = Vec::with_capacity(nt);
    for _ in 0..nt {
        let t: Vec<usize> = l.numbers(&[3])?;
        tris.push([t[0], t[1], t[2]]);
    }
    l.finish()?;
    Ok(SpatialMesh::from_parts(verts, tris)?)
}

pub fn load_angular(text: &str) -> Result<AngularMesh, Error> {
    let mut l = Lines::new(text);
    let domain = match l.header("angular")?.as_slice() {
        ["sphere"] => AngularDomain::Sphere,
        ["circle"] => AngularDomain::Circle,
        _ => return Err(l.err("expected domain sphere or circle")),
    };
    let nv = l.count("vertices")?;
    let mut verts = Vec::with_capacity(nv);
    for _ in 0..nv {
        let v: Vec<f64> = l.numbers(&[3])?;
        verts.push([v[0], v[1], v[2]]);
    }
    let ne = l.count("elements")?;
    let width = if domain == AngularDomain::Sphere { 3 } else { 2 };
    let mut cells = Vec::with_capacity(ne);
    for _ in 0..ne {
        let c: Vec<usize> = l.numbers(&[width])?;
        cells.push(if width == 3 { AngularCell::Triangle([c[0], c[1], c[2]]) } else { AngularCell::Arc([c[0], c[1]]) });
    }
    if !l.keyword("pairing")?.is_empty() {
        return Err(l.err("expected \"pairing\""));
    }
    let mut pairing = Vec::with_capacity(ne);
    for _ in 0..ne {
        pairing.push(l.numbers::<usize>(&[1])?[0]);
    }
    l.finish()?;
    Ok(AngularMesh::from_parts(domain, verts, cells, pairing)?)
}
