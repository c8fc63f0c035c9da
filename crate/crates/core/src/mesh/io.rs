//! ASCII mesh format.
//!
//! ```text
//! dim nv ne
//! x1 .. xd boundary_flag     (nv lines)
//! v0 .. vd                   (ne lines, zero-based vertex indices)
//! ```
//!
//! Coordinates are printed with 17 significant digits so that the
//! write/read round trip is bit-faithful.

use super::Mesh;
use crate::geom::Point;
use crate::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

impl Mesh {
    pub fn to_ascii(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {} {}", self.dim, self.n_vertices(), self.n_elements());
        for v in 0..self.n_vertices() {
            let p = self.vertex(v);
            for k in 0..self.dim {
                let _ = write!(s, "{:.16e} ", p[k]);
            }
            let _ = writeln!(s, "{}", u8::from(self.is_boundary_vertex(v)));
        }
        for e in 0..self.n_elements() {
            let verts = self.element(e);
            let line: Vec<String> = verts.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(s, "{}", line.join(" "));
        }
        s
    }

    pub fn from_ascii(text: &str) -> Result<Mesh> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| parse_err("missing header"))?;
        let head: Vec<usize> = split_parse(header)?;
        if head.len() != 3 {
            return Err(parse_err("header must be `dim nv ne`"));
        }
        let (dim, nv, ne) = (head[0], head[1], head[2]);
        if dim != 1 && dim != 2 {
            return Err(Error::UnsupportedDimension(dim));
        }
        let mut vertices: Vec<Point> = Vec::with_capacity(nv);
        let mut flags: Vec<bool> = Vec::with_capacity(nv);
        for _ in 0..nv {
            let line = lines.next().ok_or_else(|| parse_err("truncated vertex section"))?;
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != dim + 1 {
                return Err(parse_err("vertex line has wrong arity"));
            }
            let mut p = [0.0, 0.0];
            for k in 0..dim {
                p[k] = toks[k]
                    .parse::<f64>()
                    .map_err(|e| parse_err(&format!("bad coordinate: {e}")))?;
            }
            let flag: u8 =
                toks[dim].parse().map_err(|e| parse_err(&format!("bad flag: {e}")))?;
            vertices.push(p);
            flags.push(flag != 0);
        }
        let mut elements = Vec::with_capacity(ne * (dim + 1));
        for _ in 0..ne {
            let line = lines.next().ok_or_else(|| parse_err("truncated element section"))?;
            let idx: Vec<usize> = split_parse(line)?;
            if idx.len() != dim + 1 {
                return Err(parse_err("element line has wrong arity"));
            }
            elements.extend_from_slice(&idx);
        }
        let mesh = Mesh::from_parts(dim, vertices, elements)?;
        for v in 0..mesh.n_vertices() {
            if mesh.is_boundary_vertex(v) != flags[v] {
                return Err(Error::InvalidMesh(format!(
                    "boundary flag of vertex {v} disagrees with mesh topology"
                )));
            }
        }
        Ok(mesh)
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_ascii())?;
        Ok(())
    }

    pub fn read_file(path: &Path) -> Result<Mesh> {
        let text = std::fs::read_to_string(path)?;
        Mesh::from_ascii(&text)
    }
}

fn split_parse(line: &str) -> Result<Vec<usize>> {
    line.split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|e| parse_err(&format!("bad integer: {e}"))))
        .collect()
}

fn parse_err(msg: &str) -> Error {
    Error::Parse(format!("mesh file: {msg}"))
}
