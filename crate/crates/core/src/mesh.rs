//! Structured right-triangle meshes of the unit square.
//!
//! Every grid square is split along its lower-left to upper-right diagonal.
//! Edges carry a global orientation from the lower to the higher vertex
//! index; the global normal of an edge is its tangent rotated clockwise.
//! Each cell records, per local edge, whether its outward normal agrees with
//! that global normal.

use std::collections::BTreeMap;
use std::io::Write;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// A cell's view of one of its edges.
///
/// Local edge `i` of a cell is the edge opposite local vertex `i`, traversed
/// from local vertex `i + 1` to `i + 2` (mod 3).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellEdge {
    pub edge: usize,
    /// `+1` when the cell's outward normal equals the global edge normal.
    pub sign: i8,
}

impl CellEdge {
    pub fn sign_f64(&self) -> f64 {
        f64::from(self.sign)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellGeometry {
    pub area: f64,
    pub edge_lengths: [f64; 3],
    pub outward_normals: [Point; 3],
}

#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Point>,
    cells: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    cell_edges: Vec<[CellEdge; 3]>,
    boundary_edges: Vec<usize>,
    on_boundary: Vec<bool>,
    h: f64,
}

impl Mesh {
    /// Uniform `n x n` grid of the unit square, each square cut into two
    /// counterclockwise right triangles.
    pub fn unit_square(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidResolution(n));
        }
        let stride = n + 1;
        let mut vertices = Vec::with_capacity(stride * stride);
        for j in 0..=n {
            for i in 0..=n {
                vertices.push([i as f64 / n as f64, j as f64 / n as f64]);
            }
        }

        let mut cells = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let v00 = j * stride + i;
                let v10 = v00 + 1;
                let v01 = v00 + stride;
                let v11 = v01 + 1;
                cells.push([v00, v10, v11]);
                cells.push([v00, v11, v01]);
            }
        }

        let mut edge_ids: BTreeMap<[usize; 2], usize> = BTreeMap::new();
        for cell in &cells {
            for local in 0..3 {
                let (a, b) = local_edge_vertices(cell, local);
                edge_ids.insert([a.min(b), a.max(b)], 0);
            }
        }
        let mut edges = Vec::with_capacity(edge_ids.len());
        for (id, (key, slot)) in edge_ids.iter_mut().enumerate() {
            *slot = id;
            edges.push(*key);
        }

        let mut incidence = vec![0usize; edges.len()];
        let cell_edges: Vec<[CellEdge; 3]> = cells
            .iter()
            .map(|cell| {
                std::array::from_fn(|local| {
                    let (a, b) = local_edge_vertices(cell, local);
                    let edge = edge_ids[&[a.min(b), a.max(b)]];
                    incidence[edge] += 1;
                    CellEdge {
                        edge,
                        sign: if a < b { 1 } else { -1 },
                    }
                })
            })
            .collect();

        let on_boundary: Vec<bool> = incidence.iter().map(|&c| c == 1).collect();
        let boundary_edges = (0..edges.len()).filter(|&e| on_boundary[e]).collect();

        Ok(Self {
            vertices,
            cells,
            edges,
            cell_edges,
            boundary_edges,
            on_boundary,
            h: 1.0 / n as f64,
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cells(&self) -> &[[usize; 3]] {
        &self.cells
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn cell_edges(&self, cell: usize) -> &[CellEdge; 3] {
        &self.cell_edges[cell]
    }

    pub fn boundary_edges(&self) -> &[usize] {
        &self.boundary_edges
    }

    pub fn is_boundary_edge(&self, edge: usize) -> bool {
        self.on_boundary[edge]
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Characteristic mesh size, the grid spacing `1/n`.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn cell_vertices(&self, cell: usize) -> [Point; 3] {
        let c = &self.cells[cell];
        [self.vertices[c[0]], self.vertices[c[1]], self.vertices[c[2]]]
    }

    /// Unit normal of an edge in its global orientation.
    pub fn edge_normal(&self, edge: usize) -> Point {
        let [a, b] = self.edges[edge];
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        let t = [pb[0] - pa[0], pb[1] - pa[1]];
        let len = t[0].hypot(t[1]);
        [t[1] / len, -t[0] / len]
    }

    pub fn check_cell(&self, cell: usize) -> Result<()> {
        if cell < self.cells.len() {
            Ok(())
        } else {
            Err(Error::CellOutOfRange {
                index: cell,
                count: self.cells.len(),
            })
        }
    }

    pub fn cell_geometry(&self, cell: usize) -> Result<CellGeometry> {
        self.check_cell(cell)?;
        let p = self.cell_vertices(cell);
        let e1 = [p[1][0] - p[0][0], p[1][1] - p[0][1]];
        let e2 = [p[2][0] - p[0][0], p[2][1] - p[0][1]];
        let area = 0.5 * (e1[0] * e2[1] - e1[1] * e2[0]).abs();
        let mut edge_lengths = [0.0; 3];
        let mut outward_normals = [[0.0; 2]; 3];
        for local in 0..3 {
            let a = p[(local + 1) % 3];
            let b = p[(local + 2) % 3];
            let t = [b[0] - a[0], b[1] - a[1]];
            let len = t[0].hypot(t[1]);
            edge_lengths[local] = len;
            // counterclockwise traversal: outward is the clockwise rotation
            outward_normals[local] = [t[1] / len, -t[0] / len];
        }
        Ok(CellGeometry {
            area,
            edge_lengths,
            outward_normals,
        })
    }

    /// Plain-text dump for debugging. Not a stable format.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "vertices {}", self.vertices.len())?;
        for v in &self.vertices {
            writeln!(out, "{} {}", v[0], v[1])?;
        }
        writeln!(out, "cells {}", self.cells.len())?;
        for c in &self.cells {
            writeln!(out, "{} {} {}", c[0], c[1], c[2])?;
        }
        Ok(())
    }
}

fn local_edge_vertices(cell: &[usize; 3], local: usize) -> (usize, usize) {
    (cell[(local + 1) % 3], cell[(local + 2) % 3])
}
