//! Raviart-Thomas velocity spaces paired with discontinuous pressure spaces.
//!
//! Orders follow the exterior-calculus labelling: `k = 1` is the lowest-order
//! Raviart-Thomas space (one normal flux per edge) with piecewise constant
//! pressure, `k = 2` the next-to-lowest space (two flux moments per edge plus
//! two interior moments per cell) with piecewise linear pressure.
//!
//! Degrees of freedom are integrated normal-flux moments against Legendre
//! polynomials along each edge, parameterised in the edge's global
//! orientation, and (for `k = 2`) interior moments. Reference basis
//! functions are obtained by inverting the dual matrix of these functionals
//! on a monomial spanning set, and mapped to physical cells with the
//! contravariant Piola transform of the affine cell map.

use std::sync::Arc;

use crate::dense;
use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};
use crate::quadrature::{shifted_legendre, LineRule, TriangleRule};

const REFERENCE_VERTICES: [Point; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
const INSIDE_TOL: f64 = 1e-12;

/// Polynomial order of the velocity/pressure pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Order {
    Lowest,
    NextToLowest,
}

impl Order {
    pub fn from_index(k: usize) -> Result<Self> {
        match k {
            1 => Ok(Order::Lowest),
            2 => Ok(Order::NextToLowest),
            _ => Err(Error::UnsupportedOrder(k)),
        }
    }

    /// The `k` label of this order.
    pub fn index(self) -> usize {
        match self {
            Order::Lowest => 1,
            Order::NextToLowest => 2,
        }
    }

    /// Velocity degrees of freedom per cell.
    pub fn velocity_dofs_per_cell(self) -> usize {
        let k = self.index();
        3 * k + k * (k - 1)
    }

    /// Pressure degrees of freedom per cell (`dim P_{k-1}`).
    pub fn pressure_dofs_per_cell(self) -> usize {
        let k = self.index();
        k * (k + 1) / 2
    }

    /// Quadrature exactness used for assembly (`2k + 2`).
    pub fn assembly_degree(self) -> usize {
        2 * self.index() + 2
    }
}

/// Monomial spanning set of the reference RT space.
fn spanning_values(order: Order, p: Point) -> Vec<Point> {
    let [x, y] = p;
    match order {
        Order::Lowest => vec![[1.0, 0.0], [0.0, 1.0], [x, y]],
        Order::NextToLowest => vec![
            [1.0, 0.0],
            [x, 0.0],
            [y, 0.0],
            [0.0, 1.0],
            [0.0, x],
            [0.0, y],
            [x * x, x * y],
            [x * y, y * y],
        ],
    }
}

fn spanning_divergences(order: Order, p: Point) -> Vec<f64> {
    let [x, y] = p;
    match order {
        Order::Lowest => vec![0.0, 0.0, 2.0],
        Order::NextToLowest => vec![0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 3.0 * x, 3.0 * y],
    }
}

/// Reference-cell basis, stored as coefficients over the spanning set.
#[derive(Debug, Clone)]
struct ReferenceElement {
    order: Order,
    /// `coeffs[i * n + m]`: weight of spanning function `m` in basis `i`.
    coeffs: Vec<f64>,
}

impl ReferenceElement {
    fn new(order: Order) -> Self {
        let n = order.velocity_dofs_per_cell();
        let k = order.index();
        let line = LineRule::gauss(k + 2);
        let tri = TriangleRule::with_degree(2 * k + 2);

        // dual[l * n + m] = functional l applied to spanning function m
        let mut dual = vec![0.0; n * n];
        for edge in 0..3 {
            let a = REFERENCE_VERTICES[(edge + 1) % 3];
            let b = REFERENCE_VERTICES[(edge + 2) % 3];
            let t = [b[0] - a[0], b[1] - a[1]];
            let normal = [t[1], -t[0]];
            for j in 0..k {
                let row = edge * k + j;
                for (s, w) in line.points.iter().zip(&line.weights) {
                    let p = [a[0] + s * t[0], a[1] + s * t[1]];
                    let q = shifted_legendre(j, *s);
                    for (m, v) in spanning_values(order, p).iter().enumerate() {
                        dual[row * n + m] += w * q * (v[0] * normal[0] + v[1] * normal[1]);
                    }
                }
            }
        }
        if order == Order::NextToLowest {
            for comp in 0..2 {
                let row = 3 * k + comp;
                for (qp, w) in tri.weights.iter().enumerate() {
                    let p = tri.reference_point(qp);
                    for (m, v) in spanning_values(order, p).iter().enumerate() {
                        dual[row * n + m] += w * v[comp];
                    }
                }
            }
        }

        let inv = dense::invert(n, &dual).expect("RT dual matrix is invertible");
        // basis i = sum_m inv[m][i] * spanning_m
        let mut coeffs = vec![0.0; n * n];
        for i in 0..n {
            for m in 0..n {
                coeffs[i * n + m] = inv[m * n + i];
            }
        }
        Self { order, coeffs }
    }

    fn values(&self, p: Point) -> Vec<Point> {
        let span = spanning_values(self.order, p);
        let n = span.len();
        (0..n)
            .map(|i| {
                let mut v = [0.0; 2];
                for (m, s) in span.iter().enumerate() {
                    let c = self.coeffs[i * n + m];
                    v[0] += c * s[0];
                    v[1] += c * s[1];
                }
                v
            })
            .collect()
    }

    fn divergences(&self, p: Point) -> Vec<f64> {
        let span = spanning_divergences(self.order, p);
        let n = span.len();
        (0..n)
            .map(|i| (0..n).map(|m| self.coeffs[i * n + m] * span[m]).sum())
            .collect()
    }
}

fn pressure_reference_values(order: Order, p: Point) -> Vec<f64> {
    match order {
        Order::Lowest => vec![1.0],
        Order::NextToLowest => vec![1.0 - p[0] - p[1], p[0], p[1]],
    }
}

/// Affine map from the reference triangle onto a mesh cell.
#[derive(Debug, Clone, Copy)]
pub struct CellMap {
    origin: Point,
    /// Columns are `p1 - p0` and `p2 - p0`.
    jac: [[f64; 2]; 2],
    det: f64,
}

impl CellMap {
    pub fn new(vertices: [Point; 3]) -> Self {
        let [p0, p1, p2] = vertices;
        let jac = [[p1[0] - p0[0], p2[0] - p0[0]], [p1[1] - p0[1], p2[1] - p0[1]]];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        Self {
            origin: p0,
            jac,
            det,
        }
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn map(&self, p: Point) -> Point {
        [
            self.origin[0] + self.jac[0][0] * p[0] + self.jac[0][1] * p[1],
            self.origin[1] + self.jac[1][0] * p[0] + self.jac[1][1] * p[1],
        ]
    }

    /// Contravariant Piola transform `J v / det J`.
    pub fn piola(&self, v: Point) -> Point {
        [
            (self.jac[0][0] * v[0] + self.jac[0][1] * v[1]) / self.det,
            (self.jac[1][0] * v[0] + self.jac[1][1] * v[1]) / self.det,
        ]
    }

    /// `J^{-T} e`, the physical direction that pairs with reference `e`.
    fn inverse_transpose(&self, e: Point) -> Point {
        let [[a, b], [c, d]] = self.jac;
        // J^{-1} = [[d, -b], [-c, a]] / det, transpose it
        [(d * e[0] - c * e[1]) / self.det, (-b * e[0] + a * e[1]) / self.det]
    }
}

/// Velocity space `V_h` (Raviart-Thomas) and pressure space `W_h`
/// (discontinuous `P_{k-1}`) on a shared mesh.
#[derive(Debug, Clone)]
pub struct FunctionSpacePair {
    mesh: Arc<Mesh>,
    order: Order,
    reference: ReferenceElement,
    num_velocity: usize,
    num_pressure: usize,
    velocity_map: Vec<usize>,
    velocity_sign: Vec<f64>,
    is_boundary: Vec<bool>,
    boundary_dofs: Vec<usize>,
    interior_dofs: Vec<usize>,
}

impl FunctionSpacePair {
    pub fn new(mesh: Arc<Mesh>, order: Order) -> Self {
        let k = order.index();
        let nvl = order.velocity_dofs_per_cell();
        let edge_dofs = mesh.num_edges() * k;
        let interior_per_cell = nvl - 3 * k;
        let num_velocity = edge_dofs + mesh.num_cells() * interior_per_cell;
        let num_pressure = mesh.num_cells() * order.pressure_dofs_per_cell();

        let mut velocity_map = Vec::with_capacity(mesh.num_cells() * nvl);
        let mut velocity_sign = Vec::with_capacity(velocity_map.capacity());
        for cell in 0..mesh.num_cells() {
            for ce in mesh.cell_edges(cell) {
                let s = ce.sign_f64();
                for j in 0..k {
                    velocity_map.push(ce.edge * k + j);
                    // normal flips with s, odd Legendre moments flip again
                    velocity_sign.push(if j % 2 == 0 { s } else { 1.0 });
                }
            }
            for j in 0..interior_per_cell {
                velocity_map.push(edge_dofs + cell * interior_per_cell + j);
                velocity_sign.push(1.0);
            }
        }

        let mut is_boundary = vec![false; num_velocity];
        for &e in mesh.boundary_edges() {
            for j in 0..k {
                is_boundary[e * k + j] = true;
            }
        }
        let boundary_dofs = (0..num_velocity).filter(|&i| is_boundary[i]).collect();
        let interior_dofs = (0..num_velocity).filter(|&i| !is_boundary[i]).collect();

        Self {
            mesh,
            order,
            reference: ReferenceElement::new(order),
            num_velocity,
            num_pressure,
            velocity_map,
            velocity_sign,
            is_boundary,
            boundary_dofs,
            interior_dofs,
        }
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn order(&self) -> Order {
        self.order
    }

    pub fn num_velocity_dofs(&self) -> usize {
        self.num_velocity
    }

    pub fn num_pressure_dofs(&self) -> usize {
        self.num_pressure
    }

    pub fn velocity_dofs_per_cell(&self) -> usize {
        self.order.velocity_dofs_per_cell()
    }

    pub fn pressure_dofs_per_cell(&self) -> usize {
        self.order.pressure_dofs_per_cell()
    }

    /// Global velocity DOFs of a cell in local order.
    pub fn cell_velocity_dofs(&self, cell: usize) -> &[usize] {
        let n = self.velocity_dofs_per_cell();
        &self.velocity_map[cell * n..(cell + 1) * n]
    }

    /// Signs reconciling local and global DOF functionals.
    pub fn cell_velocity_signs(&self, cell: usize) -> &[f64] {
        let n = self.velocity_dofs_per_cell();
        &self.velocity_sign[cell * n..(cell + 1) * n]
    }

    pub fn cell_pressure_dofs(&self, cell: usize) -> std::ops::Range<usize> {
        let n = self.pressure_dofs_per_cell();
        cell * n..(cell + 1) * n
    }

    pub fn is_boundary_dof(&self, dof: usize) -> bool {
        self.is_boundary[dof]
    }

    pub fn boundary_dofs(&self) -> &[usize] {
        &self.boundary_dofs
    }

    pub fn interior_dofs(&self) -> &[usize] {
        &self.interior_dofs
    }

    pub fn cell_map(&self, cell: usize) -> CellMap {
        CellMap::new(self.mesh.cell_vertices(cell))
    }

    fn check(&self, cell: usize, point: Point) -> Result<()> {
        self.mesh.check_cell(cell)?;
        let [x, y] = point;
        if x < -INSIDE_TOL || y < -INSIDE_TOL || x + y > 1.0 + INSIDE_TOL || !x.is_finite() || !y.is_finite() {
            return Err(Error::PointOutsideReference(x, y));
        }
        Ok(())
    }

    /// Physical values of the cell's global velocity basis functions at the
    /// image of reference point `point`.
    pub fn eval_velocity_basis(&self, cell: usize, point: Point) -> Result<Vec<Point>> {
        self.check(cell, point)?;
        let map = self.cell_map(cell);
        let signs = self.cell_velocity_signs(cell);
        Ok(self
            .reference
            .values(point)
            .into_iter()
            .zip(signs)
            .map(|(v, s)| {
                let p = map.piola(v);
                [s * p[0], s * p[1]]
            })
            .collect())
    }

    /// Physical divergences of the cell's global velocity basis functions.
    pub fn eval_velocity_div(&self, cell: usize, point: Point) -> Result<Vec<f64>> {
        self.check(cell, point)?;
        let det = self.cell_map(cell).det();
        let signs = self.cell_velocity_signs(cell);
        Ok(self
            .reference
            .divergences(point)
            .into_iter()
            .zip(signs)
            .map(|(d, s)| s * d / det)
            .collect())
    }

    pub fn eval_pressure_basis(&self, cell: usize, point: Point) -> Result<Vec<f64>> {
        self.check(cell, point)?;
        Ok(pressure_reference_values(self.order, point))
    }

    /// Value of the discrete velocity with coefficients `u`.
    pub fn velocity_value(&self, u: &[f64], cell: usize, point: Point) -> Result<Point> {
        let basis = self.eval_velocity_basis(cell, point)?;
        let mut v = [0.0; 2];
        for (b, &dof) in basis.iter().zip(self.cell_velocity_dofs(cell)) {
            v[0] += u[dof] * b[0];
            v[1] += u[dof] * b[1];
        }
        Ok(v)
    }

    pub fn velocity_divergence(&self, u: &[f64], cell: usize, point: Point) -> Result<f64> {
        let div = self.eval_velocity_div(cell, point)?;
        Ok(div
            .iter()
            .zip(self.cell_velocity_dofs(cell))
            .map(|(d, &dof)| u[dof] * d)
            .sum())
    }

    pub fn pressure_value(&self, eta: &[f64], cell: usize, point: Point) -> Result<f64> {
        let basis = self.eval_pressure_basis(cell, point)?;
        Ok(basis
            .iter()
            .zip(self.cell_pressure_dofs(cell))
            .map(|(b, dof)| eta[dof] * b)
            .sum())
    }

    /// Canonical H(div) interpolant: integrated normal-flux moments on every
    /// edge and, for `k = 2`, interior moments on every cell.
    pub fn interpolate_hdiv<F>(&self, field: F) -> Vec<f64>
    where
        F: Fn(Point) -> Point,
    {
        let k = self.order.index();
        let mesh = &self.mesh;
        let mut dofs = vec![0.0; self.num_velocity];
        let line = LineRule::gauss(k + 8);
        for (e, &[a, b]) in mesh.edges().iter().enumerate() {
            let pa = mesh.vertices()[a];
            let pb = mesh.vertices()[b];
            let t = [pb[0] - pa[0], pb[1] - pa[1]];
            let normal = [t[1], -t[0]];
            for j in 0..k {
                dofs[e * k + j] = line
                    .points
                    .iter()
                    .zip(&line.weights)
                    .map(|(s, w)| {
                        let v = field([pa[0] + s * t[0], pa[1] + s * t[1]]);
                        w * shifted_legendre(j, *s) * (v[0] * normal[0] + v[1] * normal[1])
                    })
                    .sum();
            }
        }
        if self.order == Order::NextToLowest {
            let tri = TriangleRule::with_degree(2 * k + 8);
            for cell in 0..mesh.num_cells() {
                let map = self.cell_map(cell);
                let local = self.cell_velocity_dofs(cell);
                for comp in 0..2 {
                    let mut e = [0.0; 2];
                    e[comp] = 1.0;
                    let dir = map.inverse_transpose(e);
                    let mut acc = 0.0;
                    for (q, w) in tri.weights.iter().enumerate() {
                        let v = field(map.map(tri.reference_point(q)));
                        acc += w * map.det() * (v[0] * dir[0] + v[1] * dir[1]);
                    }
                    dofs[local[3 * k + comp]] = acc;
                }
            }
        }
        dofs
    }

    /// Cellwise L2 projection onto `W_h`.
    pub fn project_pressure<F>(&self, field: F) -> Vec<f64>
    where
        F: Fn(Point) -> f64,
    {
        let npl = self.pressure_dofs_per_cell();
        let tri = TriangleRule::with_degree(2 * self.order.index() + 8);
        let mut out = vec![0.0; self.num_pressure];
        for cell in 0..self.mesh.num_cells() {
            let map = self.cell_map(cell);
            let mut mass = vec![0.0; npl * npl];
            let mut rhs = vec![0.0; npl];
            for (q, w) in tri.weights.iter().enumerate() {
                let p = tri.reference_point(q);
                let basis = pressure_reference_values(self.order, p);
                let wq = w * map.det();
                let value = field(map.map(p));
                for i in 0..npl {
                    rhs[i] += wq * value * basis[i];
                    for j in 0..npl {
                        mass[i * npl + j] += wq * basis[i] * basis[j];
                    }
                }
            }
            let inv = dense::invert(npl, &mass).expect("pressure mass is SPD");
            let coeffs = dense::mat_vec(npl, &inv, &rhs);
            out[self.cell_pressure_dofs(cell)].copy_from_slice(&coeffs);
        }
        out
    }

    /// Coefficients of the constant function `1` in `W_h`.
    pub fn pressure_constant(&self) -> Vec<f64> {
        vec![1.0; self.num_pressure]
    }

    /// Zero every boundary velocity DOF (strong `u . n = 0`).
    pub fn apply_boundary_condition(&self, u: &mut [f64]) {
        for &d in &self.boundary_dofs {
            u[d] = 0.0;
        }
    }

    pub fn tabulate(&self, rule: TriangleRule) -> Tabulation {
        Tabulation::new(self.order, &self.reference, rule)
    }
}

/// Reference basis values at the points of a triangle rule.
#[derive(Debug, Clone)]
pub struct Tabulation {
    rule: TriangleRule,
    velocity: Vec<Point>,
    divergence: Vec<f64>,
    pressure: Vec<f64>,
    nvl: usize,
    npl: usize,
}

impl Tabulation {
    fn new(order: Order, reference: &ReferenceElement, rule: TriangleRule) -> Self {
        let nvl = order.velocity_dofs_per_cell();
        let npl = order.pressure_dofs_per_cell();
        let mut velocity = Vec::with_capacity(rule.len() * nvl);
        let mut divergence = Vec::with_capacity(rule.len() * nvl);
        let mut pressure = Vec::with_capacity(rule.len() * npl);
        for q in 0..rule.len() {
            let p = rule.reference_point(q);
            velocity.extend(reference.values(p));
            divergence.extend(reference.divergences(p));
            pressure.extend(pressure_reference_values(order, p));
        }
        Self {
            rule,
            velocity,
            divergence,
            pressure,
            nvl,
            npl,
        }
    }

    pub fn rule(&self) -> &TriangleRule {
        &self.rule
    }

    pub fn num_points(&self) -> usize {
        self.rule.len()
    }
}

/// Physical basis data on one cell at the points of a [`Tabulation`].
///
/// Buffers are reused across [`CellValues::reinit`] calls.
#[derive(Debug, Clone)]
pub struct CellValues<'a> {
    space: &'a FunctionSpacePair,
    tab: &'a Tabulation,
    cell: usize,
    /// Physical quadrature points.
    pub points: Vec<Point>,
    /// Quadrature weights including the cell jacobian.
    pub weights: Vec<f64>,
    /// `velocity[q * nvl + i]`, global sign applied.
    pub velocity: Vec<Point>,
    pub divergence: Vec<f64>,
    pub pressure: Vec<f64>,
}

impl<'a> CellValues<'a> {
    pub fn new(space: &'a FunctionSpacePair, tab: &'a Tabulation) -> Self {
        let nq = tab.num_points();
        Self {
            space,
            tab,
            cell: usize::MAX,
            points: vec![[0.0; 2]; nq],
            weights: vec![0.0; nq],
            velocity: vec![[0.0; 2]; nq * tab.nvl],
            divergence: vec![0.0; nq * tab.nvl],
            pressure: tab.pressure.clone(),
        }
    }

    pub fn reinit(&mut self, cell: usize) {
        self.cell = cell;
        let map = self.space.cell_map(cell);
        let signs = self.space.cell_velocity_signs(cell);
        let nvl = self.tab.nvl;
        for q in 0..self.tab.num_points() {
            self.points[q] = map.map(self.tab.rule.reference_point(q));
            self.weights[q] = self.tab.rule.weights[q] * map.det();
            for i in 0..nvl {
                let v = map.piola(self.tab.velocity[q * nvl + i]);
                self.velocity[q * nvl + i] = [signs[i] * v[0], signs[i] * v[1]];
                self.divergence[q * nvl + i] = signs[i] * self.tab.divergence[q * nvl + i] / map.det();
            }
        }
    }

    pub fn cell(&self) -> usize {
        self.cell
    }

    pub fn num_points(&self) -> usize {
        self.tab.num_points()
    }

    pub fn nvl(&self) -> usize {
        self.tab.nvl
    }

    pub fn npl(&self) -> usize {
        self.tab.npl
    }

    /// Discrete velocity at quadrature point `q`.
    pub fn velocity_at(&self, u: &[f64], q: usize) -> Point {
        let dofs = self.space.cell_velocity_dofs(self.cell);
        let nvl = self.tab.nvl;
        let mut v = [0.0; 2];
        for (i, &d) in dofs.iter().enumerate() {
            let b = self.velocity[q * nvl + i];
            v[0] += u[d] * b[0];
            v[1] += u[d] * b[1];
        }
        v
    }

    pub fn pressure_at(&self, eta: &[f64], q: usize) -> f64 {
        let npl = self.tab.npl;
        self.space
            .cell_pressure_dofs(self.cell)
            .enumerate()
            .map(|(l, d)| eta[d] * self.pressure[q * npl + l])
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(n: usize, k: usize) -> FunctionSpacePair {
        FunctionSpacePair::new(
            Arc::new(Mesh::unit_square(n).unwrap()),
            Order::from_index(k).unwrap(),
        )
    }

    #[test]
    fn dof_counts() {
        let s = space(3, 1);
        assert_eq!(s.num_velocity_dofs(), s.mesh().num_edges());
        assert_eq!(s.num_pressure_dofs(), s.mesh().num_cells());
        let s = space(3, 2);
        assert_eq!(
            s.num_velocity_dofs(),
            2 * s.mesh().num_edges() + 2 * s.mesh().num_cells()
        );
        assert_eq!(s.num_pressure_dofs(), 3 * s.mesh().num_cells());
        assert!(Order::from_index(3).is_err());
    }

    #[test]
    fn boundary_dofs_match_boundary_edges() {
        for k in [1, 2] {
            let s = space(4, k);
            let mut expected: Vec<usize> = s
                .mesh()
                .boundary_edges()
                .iter()
                .flat_map(|&e| (0..k).map(move |j| e * k + j))
                .collect();
            expected.sort_unstable();
            assert_eq!(s.boundary_dofs(), expected.as_slice());
        }
    }

    /// Flux moment of a cell's local basis function `i` against Legendre
    /// `j` on local edge `edge`, using the global edge parameterisation.
    fn global_edge_moment(s: &FunctionSpacePair, cell: usize, i: usize, edge: usize, j: usize) -> f64 {
        let ce = s.mesh().cell_edges(cell)[edge];
        let [a, b] = s.mesh().edges()[ce.edge];
        let pa = s.mesh().vertices()[a];
        let pb = s.mesh().vertices()[b];
        let t = [pb[0] - pa[0], pb[1] - pa[1]];
        let normal = [t[1], -t[0]];
        let map = s.cell_map(cell);
        // invert the affine map to get reference coordinates
        let inv = |p: Point| {
            let v = [p[0] - map.origin[0], p[1] - map.origin[1]];
            let [[a, b], [c, d]] = map.jac;
            [(d * v[0] - b * v[1]) / map.det, (-c * v[0] + a * v[1]) / map.det]
        };
        let line = LineRule::gauss(6);
        line.points
            .iter()
            .zip(&line.weights)
            .map(|(sg, w)| {
                let p = [pa[0] + sg * t[0], pa[1] + sg * t[1]];
                let x = inv(p);
                let x = [x[0].clamp(0.0, 1.0), x[1].clamp(0.0, 1.0)];
                let v = s.eval_velocity_basis(cell, x).unwrap()[i];
                w * shifted_legendre(j, *sg) * (v[0] * normal[0] + v[1] * normal[1])
            })
            .sum()
    }

    #[test]
    fn edge_functionals_are_dual_to_basis() {
        for k in [1, 2] {
            let s = space(2, k);
            for cell in 0..s.mesh().num_cells() {
                for i in 0..s.velocity_dofs_per_cell() {
                    for edge in 0..3 {
                        for j in 0..k {
                            let m = global_edge_moment(&s, cell, i, edge, j);
                            let expected = if i == edge * k + j { 1.0 } else { 0.0 };
                            assert!(
                                (m - expected).abs() < 1e-12,
                                "k={k} cell={cell} basis={i} edge={edge} j={j}: {m}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn lowest_order_normal_trace_vanishes_on_other_edges() {
        let s = space(1, 1);
        let g = s.mesh().cell_geometry(0).unwrap();
        for i in 0..3 {
            for edge in (0..3).filter(|&e| e != i) {
                let a = REFERENCE_VERTICES[(edge + 1) % 3];
                let b = REFERENCE_VERTICES[(edge + 2) % 3];
                for t in [0.0, 0.3, 0.7, 1.0] {
                    let p = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
                    let v = s.eval_velocity_basis(0, p).unwrap()[i];
                    let n = g.outward_normals[edge];
                    assert!((v[0] * n[0] + v[1] * n[1]).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn lowest_order_divergence_is_inverse_area() {
        let s = space(3, 1);
        for cell in 0..s.mesh().num_cells() {
            let area = s.mesh().cell_geometry(cell).unwrap().area;
            let signs = s.cell_velocity_signs(cell).to_vec();
            for p in [[0.2, 0.2], [0.5, 0.1], [0.0, 1.0]] {
                let div = s.eval_velocity_div(cell, p).unwrap();
                for (d, sg) in div.iter().zip(&signs) {
                    assert!((d * sg - 1.0 / area).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn constants_are_reproduced() {
        for k in [1, 2] {
            let s = space(3, k);
            let u = s.interpolate_hdiv(|_| [1.0, 0.0]);
            for cell in 0..s.mesh().num_cells() {
                for p in [[0.1, 0.1], [0.6, 0.3], [0.0, 0.5]] {
                    let v = s.velocity_value(&u, cell, p).unwrap();
                    assert!((v[0] - 1.0).abs() < 1e-12 && v[1].abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn next_to_lowest_reproduces_its_own_space() {
        // (x^2, xy) + linear field lies in RT for k = 2
        let s = space(3, 2);
        let field = |p: Point| [p[0] * p[0] + 0.3 - p[1], p[0] * p[1] + 2.0 * p[0]];
        let u = s.interpolate_hdiv(field);
        for cell in 0..s.mesh().num_cells() {
            for p in [[0.1, 0.2], [0.6, 0.3], [1.0 / 3.0, 1.0 / 3.0]] {
                let v = s.velocity_value(&u, cell, p).unwrap();
                let x = s.cell_map(cell).map(p);
                let e = field(x);
                assert!((v[0] - e[0]).abs() < 1e-12 && (v[1] - e[1]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn interpolant_of_radial_field_has_divergence_two() {
        let s = space(4, 1);
        let u = s.interpolate_hdiv(|p| p);
        for cell in 0..s.mesh().num_cells() {
            let d = s.velocity_divergence(&u, cell, [0.3, 0.3]).unwrap();
            assert!((d - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn interpolation_is_idempotent() {
        for k in [1, 2] {
            let s = space(3, k);
            let u = s.interpolate_hdiv(|p| [(3.0 * p[1]).sin(), p[0] * p[0] * p[1]]);
            // evaluate the discrete field exactly inside each cell and
            // reinterpolate through cell-local evaluation
            let locate = |p: Point| -> Point {
                let n = 3.0;
                let i = ((p[0] * n).floor() as usize).min(2);
                let j = ((p[1] * n).floor() as usize).min(2);
                let fx = p[0] * n - i as f64;
                let fy = p[1] * n - j as f64;
                let cell = 2 * (j * 3 + i) + usize::from(fy > fx);
                let map = s.cell_map(cell);
                let [[a, b], [c, d]] = map.jac;
                let v = [p[0] - map.origin[0], p[1] - map.origin[1]];
                let r = [(d * v[0] - b * v[1]) / map.det, (-c * v[0] + a * v[1]) / map.det];
                let r = [r[0].max(0.0), r[1].max(0.0)];
                s.velocity_value(&u, cell, r).unwrap()
            };
            let u2 = s.interpolate_hdiv(locate);
            // edge moments are single valued; interior quadrature points
            // never straddle a cell boundary
            for (a, b) in u.iter().zip(&u2) {
                assert!((a - b).abs() < 1e-9, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn pressure_projection() {
        let s = space(1, 1);
        let p = s.project_pressure(|_| 3.0);
        assert!(p.iter().all(|&v| (v - 3.0).abs() < 1e-14));
        let z = s.project_pressure(|_| 0.0);
        assert!(z.iter().all(|&v| v == 0.0));
        // cell 0 is (0,0),(1,0),(1,1): mean of x is 2/3; cell 1 mean is 1/3
        let x = s.project_pressure(|p| p[0]);
        assert!((x[0] - 2.0 / 3.0).abs() < 1e-14);
        assert!((x[1] - 1.0 / 3.0).abs() < 1e-14);
        // P1 pressure reproduces linear functions
        let s = space(2, 2);
        let lin = s.project_pressure(|p| 1.0 + 2.0 * p[0] - p[1]);
        for cell in 0..s.mesh().num_cells() {
            let v = s.pressure_value(&lin, cell, [0.2, 0.5]).unwrap();
            let x = s.cell_map(cell).map([0.2, 0.5]);
            assert!((v - (1.0 + 2.0 * x[0] - x[1])).abs() < 1e-13);
        }
    }

    #[test]
    fn invalid_points_and_cells() {
        let s = space(1, 1);
        assert!(s.eval_velocity_basis(0, [0.8, 0.8]).is_err());
        assert!(s.eval_velocity_basis(0, [-0.1, 0.2]).is_err());
        assert!(s.eval_velocity_div(5, [0.1, 0.1]).is_err());
        assert!(s.eval_velocity_basis(1, [1.0, 0.0]).is_ok());
    }

    #[test]
    fn zeroed_boundary_dofs_give_zero_normal_trace() {
        for k in [1, 2] {
            let s = space(3, k);
            let mut u = s.interpolate_hdiv(|p| [1.0 + p[1], p[0] * p[0] - 0.5]);
            s.apply_boundary_condition(&mut u);
            for cell in 0..s.mesh().num_cells() {
                let g = s.mesh().cell_geometry(cell).unwrap();
                for (local, ce) in s.mesh().cell_edges(cell).iter().enumerate() {
                    if !s.mesh().is_boundary_edge(ce.edge) {
                        continue;
                    }
                    let a = REFERENCE_VERTICES[(local + 1) % 3];
                    let b = REFERENCE_VERTICES[(local + 2) % 3];
                    for t in [0.0, 0.25, 0.5, 0.9] {
                        let p = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
                        let v = s.velocity_value(&u, cell, p).unwrap();
                        let n = g.outward_normals[local];
                        assert!((v[0] * n[0] + v[1] * n[1]).abs() < 1e-13);
                    }
                }
            }
        }
    }
}
