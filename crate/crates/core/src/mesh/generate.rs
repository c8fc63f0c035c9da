//! Structured mesh generators. The 2D pattern splits each grid cell into
//! two right triangles with checkerboard-alternating diagonals, which is
//! weakly acute for any rectangular cell (the angles opposite a diagonal
//! are both π/2, the rest are strictly acute pairs).

use super::Mesh;
use crate::geom::Point;
use crate::{Error, Result};

/// Axis-aligned box domain: an interval in 1D, a rectangle in 2D.
#[derive(Clone, Copy, Debug)]
pub struct BoxDomain {
    pub dim: usize,
    pub lo: Point,
    pub hi: Point,
}

impl BoxDomain {
    pub fn interval(a: f64, b: f64) -> Self {
        BoxDomain { dim: 1, lo: [a, 0.0], hi: [b, 0.0] }
    }

    pub fn rectangle(lo: Point, hi: Point) -> Self {
        BoxDomain { dim: 2, lo, hi }
    }

    pub fn unit_square() -> Self {
        Self::rectangle([0.0, 0.0], [1.0, 1.0])
    }

    pub fn contains(&self, x: Point) -> bool {
        (0..self.dim).all(|k| x[k] >= self.lo[k] && x[k] <= self.hi[k])
    }

    pub fn distance_to_boundary(&self, x: Point) -> f64 {
        let mut d = f64::INFINITY;
        for k in 0..self.dim {
            d = d.min(x[k] - self.lo[k]).min(self.hi[k] - x[k]);
        }
        d
    }

    /// First exit time t > 0 of the ray x + t·y through the box boundary
    /// (∞ when y = 0). Exact slab clipping.
    pub fn exit_time(&self, x: Point, y: Point) -> f64 {
        let mut t = f64::INFINITY;
        for k in 0..self.dim {
            if y[k] > 0.0 {
                t = t.min((self.hi[k] - x[k]) / y[k]);
            } else if y[k] < 0.0 {
                t = t.min((self.lo[k] - x[k]) / y[k]);
            }
        }
        t
    }
}

impl Mesh {
    /// Structured weakly acute mesh of an axis-aligned box with target
    /// element size `h`: uniform intervals in 1D, alternating-diagonal
    /// right triangles in 2D. The generated mesh always passes
    /// `weak_acuteness_report`.
    pub fn structured(domain: &BoxDomain, h: f64) -> Result<Mesh> {
        if domain.dim != 1 && domain.dim != 2 {
            return Err(Error::UnsupportedDimension(domain.dim));
        }
        if !(h > 0.0) {
            return Err(Error::InvalidMesh(format!("target size must be positive, got {h}")));
        }
        for k in 0..domain.dim {
            if !(domain.hi[k] > domain.lo[k]) {
                return Err(Error::InvalidMesh("degenerate box".into()));
            }
        }
        let cells = |k: usize| -> usize {
            let extent = domain.hi[k] - domain.lo[k];
            ((extent / h) - 1e-9).ceil().max(1.0) as usize
        };
        match domain.dim {
            1 => {
                let n = cells(0);
                let dx = (domain.hi[0] - domain.lo[0]) / n as f64;
                let vertices: Vec<Point> =
                    (0..=n).map(|i| [domain.lo[0] + i as f64 * dx, 0.0]).collect();
                let mut elements = Vec::with_capacity(2 * n);
                for i in 0..n {
                    elements.push(i);
                    elements.push(i + 1);
                }
                let mut mesh = Mesh::from_parts(1, vertices, elements)?;
                mesh.set_box_domain(*domain);
                Ok(mesh)
            }
            2 => {
                let (nx, ny) = (cells(0), cells(1));
                let dx = (domain.hi[0] - domain.lo[0]) / nx as f64;
                let dy = (domain.hi[1] - domain.lo[1]) / ny as f64;
                let vid = |i: usize, j: usize| j * (nx + 1) + i;
                let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
                for j in 0..=ny {
                    for i in 0..=nx {
                        vertices.push([
                            domain.lo[0] + i as f64 * dx,
                            domain.lo[1] + j as f64 * dy,
                        ]);
                    }
                }
                let mut elements = Vec::with_capacity(6 * nx * ny);
                for j in 0..ny {
                    for i in 0..nx {
                        let (bl, br) = (vid(i, j), vid(i + 1, j));
                        let (tl, tr) = (vid(i, j + 1), vid(i + 1, j + 1));
                        if (i + j) % 2 == 0 {
                            // Anti-diagonal br–tl.
                            elements.extend_from_slice(&[bl, br, tl]);
                            elements.extend_from_slice(&[br, tr, tl]);
                        } else {
                            // Main diagonal bl–tr.
                            elements.extend_from_slice(&[bl, br, tr]);
                            elements.extend_from_slice(&[bl, tr, tl]);
                        }
                    }
                }
                let mut mesh = Mesh::from_parts(2, vertices, elements)?;
                mesh.set_box_domain(*domain);
                Ok(mesh)
            }
            d => Err(Error::UnsupportedDimension(d)),
        }
    }

    /// The four-triangle cross mesh with vertices (0,0), (±h,0), (0,±h);
    /// the single interior node sits at the origin.
    pub fn cross(h: f64) -> Mesh {
        let vertices = vec![[0.0, 0.0], [h, 0.0], [0.0, h], [-h, 0.0], [0.0, -h]];
        let elements = vec![0, 1, 2, 0, 2, 3, 0, 3, 4, 0, 4, 1];
        Mesh::from_parts(2, vertices, elements).expect("cross mesh is valid")
    }

    /// Two triangles filling the diamond with corners (±1, 0), (0, ±1),
    /// split along the x-axis. All four vertices are on the boundary.
    pub fn diamond() -> Mesh {
        let vertices = vec![[-1.0, 0.0], [0.0, 1.0], [1.0, 0.0], [0.0, -1.0]];
        let elements = vec![0, 2, 1, 0, 3, 2];
        Mesh::from_parts(2, vertices, elements).expect("diamond mesh is valid")
    }

    /// 1D mesh from ascending breakpoints (possibly non-uniform).
    pub fn from_breakpoints(points: &[f64]) -> Result<Mesh> {
        if points.len() < 2 {
            return Err(Error::InvalidMesh("need at least two breakpoints".into()));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidMesh("breakpoints must be strictly ascending".into()));
        }
        let vertices: Vec<Point> = points.iter().map(|&x| [x, 0.0]).collect();
        let mut elements = Vec::with_capacity(2 * (points.len() - 1));
        for i in 0..points.len() - 1 {
            elements.push(i);
            elements.push(i + 1);
        }
        let mut mesh = Mesh::from_parts(1, vertices, elements)?;
        mesh.set_box_domain(BoxDomain::interval(points[0], *points.last().unwrap()));
        Ok(mesh)
    }
}
