//! Sparse operators and load vectors of the mixed problem.
//!
//! With velocity basis `φ_i` and pressure basis `w_q`:
//!
//! | operator | entry |
//! |---|---|
//! | weighted mass `M` | `∫ (1/H) φ_j · φ_i` |
//! | mass `M_1` | `∫ φ_j · φ_i` |
//! | divergence `B` | `∫ (∇·φ_i) w_q` (row `q`, column `i`) |
//! | Coriolis `C` | `(1/ε) ∫ (f/H) φ_j^⊥ · φ_i` |
//! | pressure mass `M_W` | `∫ w_p w_q` |
//!
//! The semi-discrete system reads
//! `M u' + C u - (β/ε²) Bᵀ η + G(u) = F` and `M_W η' + B u = F_η`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::damping::DampingLaw;
use crate::dense;
use crate::error::{Error, Result};
use crate::mesh::Point;
use crate::quadrature::TriangleRule;
use crate::space::{CellValues, FunctionSpacePair, Tabulation};
use crate::sparse::CsrMatrix;

type ScalarFn = dyn Fn(Point) -> f64 + Send + Sync;

/// Scalar coefficient field with known bounds.
#[derive(Clone)]
pub struct Field {
    func: Option<Arc<ScalarFn>>,
    constant: f64,
    min: f64,
    max: f64,
}

impl Field {
    pub fn constant(value: f64) -> Self {
        Self {
            func: None,
            constant: value,
            min: value,
            max: value,
        }
    }

    /// Spatially varying field; `min` and `max` must bound it on the unit square.
    pub fn function<F>(f: F, min: f64, max: f64) -> Self
    where
        F: Fn(Point) -> f64 + Send + Sync + 'static,
    {
        Self {
            func: Some(Arc::new(f)),
            constant: f64::NAN,
            min,
            max,
        }
    }

    pub fn eval(&self, p: Point) -> f64 {
        match &self.func {
            Some(f) => f(p),
            None => self.constant,
        }
    }

    pub fn as_constant(&self) -> Option<f64> {
        self.func.is_none().then_some(self.constant)
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    /// `max |field|`.
    pub fn abs_max(&self) -> f64 {
        self.min.abs().max(self.max.abs())
    }

    pub fn is_zero(&self) -> bool {
        self.func.is_none() && self.constant == 0.0
    }
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.func {
            None => write!(f, "{}", self.constant),
            Some(_) => write!(f, "<function in [{}, {}]>", self.min, self.max),
        }
    }
}

/// Physical coefficients of the model.
#[derive(Debug, Clone)]
pub struct ModelParams {
    /// Coriolis parameter `f`.
    pub coriolis: Field,
    /// Rossby number `ε`.
    pub epsilon: f64,
    /// Burger number `β`.
    pub beta: f64,
    /// Depth `H`.
    pub depth: Field,
    pub damping: DampingLaw,
}

impl ModelParams {
    pub fn new(
        coriolis: Field,
        epsilon: f64,
        beta: f64,
        depth: Field,
        damping: DampingLaw,
    ) -> Result<Self> {
        let p = Self {
            coriolis,
            epsilon,
            beta,
            depth,
            damping,
        };
        p.validate()?;
        Ok(p)
    }

    /// `f = 0`, `H = 1`, `ε = β = 1`, no damping.
    pub fn unit() -> Self {
        Self {
            coriolis: Field::constant(0.0),
            epsilon: 1.0,
            beta: 1.0,
            depth: Field::constant(1.0),
            damping: DampingLaw::none(),
        }
    }

    pub fn with_damping(mut self, damping: DampingLaw) -> Self {
        self.damping = damping;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParams(format!("{name} must be positive, got {v}")))
            }
        };
        positive("epsilon", self.epsilon)?;
        positive("beta", self.beta)?;
        positive("H_*", self.depth.min())?;
        if self.depth.max() < self.depth.min() {
            return Err(Error::InvalidParams("H^* < H_*".into()));
        }
        Ok(())
    }

    /// Coefficient `β/ε²` of the pressure gradient.
    pub fn pressure_scale(&self) -> f64 {
        self.beta / (self.epsilon * self.epsilon)
    }

    pub fn depth_min(&self) -> f64 {
        self.depth.min()
    }

    pub fn depth_max(&self) -> f64 {
        self.depth.max()
    }

    pub fn coriolis_max(&self) -> f64 {
        self.coriolis.abs_max()
    }
}

fn cell_values_for<'a>(space: &'a FunctionSpacePair, tab: &'a Tabulation) -> CellValues<'a> {
    CellValues::new(space, tab)
}

fn default_tabulation(space: &FunctionSpacePair) -> Tabulation {
    space.tabulate(TriangleRule::with_degree(space.order().assembly_degree()))
}

/// Velocity-velocity matrix `∫ w(x) K(φ_j) · φ_i` where `K` is the identity
/// or the rotation `v ↦ v^⊥`.
fn velocity_bilinear<W>(space: &FunctionSpacePair, weight: W, rotate: bool) -> CsrMatrix
where
    W: Fn(Point) -> f64,
{
    let tab = default_tabulation(space);
    let mut cv = cell_values_for(space, &tab);
    let nvl = cv.nvl();
    let mut triplets = Vec::with_capacity(space.mesh().num_cells() * nvl * nvl);
    let mut local = vec![0.0; nvl * nvl];
    for cell in 0..space.mesh().num_cells() {
        cv.reinit(cell);
        local.fill(0.0);
        for q in 0..cv.num_points() {
            let wq = cv.weights[q] * weight(cv.points[q]);
            if wq == 0.0 {
                continue;
            }
            for j in 0..nvl {
                let mut pj = cv.velocity[q * nvl + j];
                if rotate {
                    pj = [-pj[1], pj[0]];
                }
                for i in 0..nvl {
                    let pi = cv.velocity[q * nvl + i];
                    local[i * nvl + j] += wq * (pj[0] * pi[0] + pj[1] * pi[1]);
                }
            }
        }
        let dofs = space.cell_velocity_dofs(cell);
        for i in 0..nvl {
            for j in 0..nvl {
                triplets.push((dofs[i], dofs[j], local[i * nvl + j]));
            }
        }
    }
    let n = space.num_velocity_dofs();
    CsrMatrix::from_triplets(n, n, &triplets)
}

/// `M[i][j] = ∫ (1/H) φ_j · φ_i`.
pub fn mass_velocity_weighted(space: &FunctionSpacePair, params: &ModelParams) -> CsrMatrix {
    velocity_bilinear(space, |x| 1.0 / params.depth.eval(x), false)
}

/// `M_1[i][j] = ∫ φ_j · φ_i`.
pub fn mass_velocity(space: &FunctionSpacePair) -> CsrMatrix {
    velocity_bilinear(space, |_| 1.0, false)
}

/// `C[i][j] = (1/ε) ∫ (f/H) φ_j^⊥ · φ_i`, skew-symmetric.
pub fn coriolis_op(space: &FunctionSpacePair, params: &ModelParams) -> CsrMatrix {
    if params.coriolis.is_zero() {
        let n = space.num_velocity_dofs();
        return CsrMatrix::zeros(n, n);
    }
    velocity_bilinear(
        space,
        |x| params.coriolis.eval(x) / (params.depth.eval(x) * params.epsilon),
        true,
    )
}

/// `B[q][i] = ∫ (∇·φ_i) w_q`.
pub fn divergence_op(space: &FunctionSpacePair) -> CsrMatrix {
    let tab = default_tabulation(space);
    let mut cv = cell_values_for(space, &tab);
    let (nvl, npl) = (cv.nvl(), cv.npl());
    let mut triplets = Vec::new();
    for cell in 0..space.mesh().num_cells() {
        cv.reinit(cell);
        let dofs = space.cell_velocity_dofs(cell);
        for (l, row) in space.cell_pressure_dofs(cell).enumerate() {
            for (i, &col) in dofs.iter().enumerate() {
                let v: f64 = (0..cv.num_points())
                    .map(|q| cv.weights[q] * cv.divergence[q * nvl + i] * cv.pressure[q * npl + l])
                    .sum();
                triplets.push((row, col, v));
            }
        }
    }
    CsrMatrix::from_triplets(space.num_pressure_dofs(), space.num_velocity_dofs(), &triplets)
}

/// `M_W[p][q] = ∫ w_p w_q`, block diagonal by cell.
pub fn pressure_mass(space: &FunctionSpacePair) -> CsrMatrix {
    let blocks = pressure_mass_blocks(space);
    let npl = space.pressure_dofs_per_cell();
    let mut triplets = Vec::new();
    for cell in 0..space.mesh().num_cells() {
        let base = cell * npl;
        for i in 0..npl {
            for j in 0..npl {
                triplets.push((base + i, base + j, blocks[cell * npl * npl + i * npl + j]));
            }
        }
    }
    let n = space.num_pressure_dofs();
    CsrMatrix::from_triplets(n, n, &triplets)
}

fn pressure_mass_blocks(space: &FunctionSpacePair) -> Vec<f64> {
    let tab = default_tabulation(space);
    let mut cv = cell_values_for(space, &tab);
    let npl = cv.npl();
    let mut blocks = vec![0.0; space.mesh().num_cells() * npl * npl];
    for cell in 0..space.mesh().num_cells() {
        cv.reinit(cell);
        let block = &mut blocks[cell * npl * npl..(cell + 1) * npl * npl];
        for q in 0..cv.num_points() {
            for i in 0..npl {
                for j in 0..npl {
                    block[i * npl + j] += cv.weights[q] * cv.pressure[q * npl + i] * cv.pressure[q * npl + j];
                }
            }
        }
    }
    blocks
}

/// The parameter-dependent but state-independent operators, assembled once.
#[derive(Debug, Clone)]
pub struct Operators {
    pub mass: CsrMatrix,
    pub mass_unweighted: CsrMatrix,
    pub divergence: CsrMatrix,
    pub coriolis: CsrMatrix,
    pub pressure_mass: CsrMatrix,
    pressure_mass_inv: Vec<f64>,
    npl: usize,
}

impl Operators {
    pub fn assemble(space: &FunctionSpacePair, params: &ModelParams) -> Self {
        let npl = space.pressure_dofs_per_cell();
        let blocks = pressure_mass_blocks(space);
        let pressure_mass_inv = blocks
            .chunks(npl * npl)
            .flat_map(|b| dense::invert(npl, b).expect("pressure mass block is SPD"))
            .collect();
        Self {
            mass: mass_velocity_weighted(space, params),
            mass_unweighted: mass_velocity(space),
            divergence: divergence_op(space),
            coriolis: coriolis_op(space, params),
            pressure_mass: pressure_mass(space),
            pressure_mass_inv,
            npl,
        }
    }

    /// `M_W⁻¹ x`, using the block-diagonal structure.
    pub fn apply_pressure_mass_inv(&self, x: &[f64]) -> Vec<f64> {
        let npl = self.npl;
        x.chunks(npl)
            .zip(self.pressure_mass_inv.chunks(npl * npl))
            .flat_map(|(xb, inv)| dense::mat_vec(npl, inv, xb))
            .collect()
    }

    /// Dense `npl × npl` inverse pressure mass blocks, cell by cell.
    pub fn pressure_mass_inv_blocks(&self) -> &[f64] {
        &self.pressure_mass_inv
    }
}

/// Matrix assembled alongside the damping residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Linearization {
    /// Derivative of `G`.
    Tangent,
    /// `∫ ν(|u_h|) φ_j · φ_i` with `ν(r) = |g| / r`: the lagged-coefficient
    /// matrix, which reproduces `G(u)` when applied to `u`.
    Secant,
}

/// Assembles `G(u)[i] = ∫ g(u_h) · φ_i` and its jacobian into a fixed
/// sparsity pattern (the velocity mass pattern).
#[derive(Debug)]
pub struct DampingAssembler {
    space: Arc<FunctionSpacePair>,
    law: DampingLaw,
    tab: Tabulation,
    pattern: CsrMatrix,
    /// For each cell, positions of local `(i, j)` entries in `pattern.values`.
    slots: Vec<usize>,
}

impl DampingAssembler {
    pub fn new(space: Arc<FunctionSpacePair>, law: DampingLaw) -> Self {
        let tab = default_tabulation(&space);
        let pattern = mass_velocity(&space).scaled(0.0);
        let nvl = space.velocity_dofs_per_cell();
        let mut slots = Vec::with_capacity(space.mesh().num_cells() * nvl * nvl);
        for cell in 0..space.mesh().num_cells() {
            let dofs = space.cell_velocity_dofs(cell);
            for &r in dofs {
                let start = pattern.row_ptr()[r];
                let cols = &pattern.col_idx()[start..pattern.row_ptr()[r + 1]];
                for &c in dofs {
                    slots.push(start + cols.binary_search(&c).expect("pattern covers the cell"));
                }
            }
        }
        Self {
            space,
            law,
            tab,
            pattern,
            slots,
        }
    }

    pub fn law(&self) -> &DampingLaw {
        &self.law
    }

    pub fn pattern(&self) -> &CsrMatrix {
        &self.pattern
    }

    pub fn residual(&self, u: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.space.num_velocity_dofs()];
        self.assemble(u, Some(&mut g), None);
        g
    }

    pub fn jacobian(&self, u: &[f64]) -> CsrMatrix {
        let mut jac = self.pattern.clone();
        self.assemble(u, None, Some(jac.values_mut()));
        jac
    }

    /// Residual and jacobian values (in [`pattern`](Self::pattern) order) in one pass.
    pub fn assemble(&self, u: &[f64], residual: Option<&mut [f64]>, jac: Option<&mut [f64]>) {
        self.assemble_with(u, residual, jac, Linearization::Tangent)
    }

    /// Like [`assemble`](Self::assemble) with a choice of matrix.
    pub fn assemble_with(
        &self,
        u: &[f64],
        mut residual: Option<&mut [f64]>,
        mut jac: Option<&mut [f64]>,
        linearization: Linearization,
    ) {
        if let Some(r) = residual.as_deref_mut() {
            r.fill(0.0);
        }
        if let Some(j) = jac.as_deref_mut() {
            j.fill(0.0);
        }
        if matches!(self.law.kind(), crate::damping::DampingKind::None) {
            return;
        }
        let space = &*self.space;
        let mut cv = CellValues::new(space, &self.tab);
        let nvl = cv.nvl();
        let mut local_r = vec![0.0; nvl];
        let mut local_j = vec![0.0; nvl * nvl];
        for cell in 0..space.mesh().num_cells() {
            cv.reinit(cell);
            local_r.fill(0.0);
            local_j.fill(0.0);
            for q in 0..cv.num_points() {
                let v = cv.velocity_at(u, q);
                let w = cv.weights[q];
                let basis = &cv.velocity[q * nvl..(q + 1) * nvl];
                if residual.is_some() {
                    let g = self.law.eval(v);
                    for (i, b) in basis.iter().enumerate() {
                        local_r[i] += w * (g[0] * b[0] + g[1] * b[1]);
                    }
                }
                if jac.is_some() {
                    let dg = match linearization {
                        Linearization::Tangent => self.law.jacobian_regularized(v),
                        Linearization::Secant => self.law.secant(v),
                    };
                    for (j, bj) in basis.iter().enumerate() {
                        let t = [
                            dg[0][0] * bj[0] + dg[0][1] * bj[1],
                            dg[1][0] * bj[0] + dg[1][1] * bj[1],
                        ];
                        for (i, bi) in basis.iter().enumerate() {
                            local_j[i * nvl + j] += w * (t[0] * bi[0] + t[1] * bi[1]);
                        }
                    }
                }
            }
            let dofs = space.cell_velocity_dofs(cell);
            if let Some(r) = residual.as_deref_mut() {
                for (i, &d) in dofs.iter().enumerate() {
                    r[d] += local_r[i];
                }
            }
            if let Some(jv) = jac.as_deref_mut() {
                let slots = &self.slots[cell * nvl * nvl..(cell + 1) * nvl * nvl];
                for (k, &s) in slots.iter().enumerate() {
                    jv[s] += local_j[k];
                }
            }
        }
    }
}

/// `G(u)[i] = ∫ g(u_h) · φ_i`.
pub fn damping_residual(space: &Arc<FunctionSpacePair>, law: DampingLaw, u: &[f64]) -> Vec<f64> {
    DampingAssembler::new(space.clone(), law).residual(u)
}

/// Derivative of [`damping_residual`] with respect to `u`.
pub fn damping_jacobian(space: &Arc<FunctionSpacePair>, law: DampingLaw, u: &[f64]) -> CsrMatrix {
    DampingAssembler::new(space.clone(), law).jacobian(u)
}

/// Right-hand sides `F(t)` (velocity) and `F_η(t)` (pressure), both already
/// tested against the basis.
pub trait Forcing: Send + Sync {
    fn velocity_load(&self, t: f64, out: &mut [f64]);

    fn pressure_load(&self, _t: f64, out: &mut [f64]) {
        out.fill(0.0);
    }

    /// True when `velocity_load` and `pressure_load` vanish for all `t`.
    fn is_zero(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NoForcing;

impl Forcing for NoForcing {
    fn velocity_load(&self, _t: f64, out: &mut [f64]) {
        out.fill(0.0);
    }

    fn is_zero(&self) -> bool {
        true
    }
}

/// `(F, v) = (β/ε²) sin(t) (xy, ∇·v)`.
#[derive(Debug, Clone)]
pub struct SyncForcing {
    base: Vec<f64>,
}

impl SyncForcing {
    pub fn new(space: &FunctionSpacePair, params: &ModelParams) -> Self {
        let tab = space.tabulate(TriangleRule::with_degree(space.order().assembly_degree() + 2));
        let mut cv = CellValues::new(space, &tab);
        let nvl = cv.nvl();
        let mut base = vec![0.0; space.num_velocity_dofs()];
        for cell in 0..space.mesh().num_cells() {
            cv.reinit(cell);
            for (i, &d) in space.cell_velocity_dofs(cell).iter().enumerate() {
                base[d] += (0..cv.num_points())
                    .map(|q| {
                        let [x, y] = cv.points[q];
                        cv.weights[q] * x * y * cv.divergence[q * nvl + i]
                    })
                    .sum::<f64>();
            }
        }
        let scale = params.pressure_scale();
        base.iter_mut().for_each(|v| *v *= scale);
        Self { base }
    }

    /// Load vector at `t`.
    pub fn at(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.base.len()];
        self.velocity_load(t, &mut out);
        out
    }
}

impl Forcing for SyncForcing {
    fn velocity_load(&self, t: f64, out: &mut [f64]) {
        let s = t.sin();
        for (o, b) in out.iter_mut().zip(&self.base) {
            *o = s * b;
        }
    }
}

/// Closed-form manufactured solution on the unit square:
///
/// `u = cos(πt) (sin πx cos πy, cos πx sin πy)`,
/// `η = cos(πt) sin πx sin 2πy`.
///
/// `u · n` vanishes on the whole boundary and `η` has zero mean.
#[derive(Debug, Clone, Copy, Default)]
pub struct ManufacturedSolution;

impl ManufacturedSolution {
    pub fn velocity(&self, p: Point, t: f64) -> Point {
        let [x, y] = p;
        let c = (PI * t).cos();
        [
            c * (PI * x).sin() * (PI * y).cos(),
            c * (PI * x).cos() * (PI * y).sin(),
        ]
    }

    pub fn velocity_dt(&self, p: Point, t: f64) -> Point {
        let [x, y] = p;
        let s = -PI * (PI * t).sin();
        [
            s * (PI * x).sin() * (PI * y).cos(),
            s * (PI * x).cos() * (PI * y).sin(),
        ]
    }

    pub fn divergence(&self, p: Point, t: f64) -> f64 {
        let [x, y] = p;
        2.0 * PI * (PI * t).cos() * (PI * x).cos() * (PI * y).cos()
    }

    pub fn elevation(&self, p: Point, t: f64) -> f64 {
        let [x, y] = p;
        (PI * t).cos() * (PI * x).sin() * (2.0 * PI * y).sin()
    }

    pub fn elevation_dt(&self, p: Point, t: f64) -> f64 {
        let [x, y] = p;
        -PI * (PI * t).sin() * (PI * x).sin() * (2.0 * PI * y).sin()
    }

    pub fn elevation_grad(&self, p: Point, t: f64) -> Point {
        let [x, y] = p;
        let c = (PI * t).cos();
        [
            c * PI * (PI * x).cos() * (2.0 * PI * y).sin(),
            c * 2.0 * PI * (PI * x).sin() * (2.0 * PI * y).cos(),
        ]
    }

    /// Pointwise momentum forcing
    /// `F = u_t/H + f u^⊥/(Hε) + (β/ε²)∇η + g(u)`.
    pub fn momentum_forcing(&self, params: &ModelParams, p: Point, t: f64) -> Point {
        let u = self.velocity(p, t);
        let ut = self.velocity_dt(p, t);
        let grad = self.elevation_grad(p, t);
        let g = params.damping.eval(u);
        let h = params.depth.eval(p);
        let rot = params.coriolis.eval(p) / (h * params.epsilon);
        let s = params.pressure_scale();
        [
            ut[0] / h - rot * u[1] + s * grad[0] + g[0],
            ut[1] / h + rot * u[0] + s * grad[1] + g[1],
        ]
    }

    /// Pointwise continuity forcing `F_η = η_t + ∇·u`.
    pub fn continuity_forcing(&self, p: Point, t: f64) -> f64 {
        self.elevation_dt(p, t) + self.divergence(p, t)
    }
}

/// Manufactured-solution loads assembled by quadrature.
#[derive(Debug)]
pub struct MmsForcing {
    space: Arc<FunctionSpacePair>,
    params: ModelParams,
    tab: Tabulation,
}

impl MmsForcing {
    pub fn new(space: Arc<FunctionSpacePair>, params: ModelParams) -> Self {
        let tab = space.tabulate(TriangleRule::with_degree(space.order().assembly_degree() + 2));
        Self { space, params, tab }
    }

    /// `(F(t), φ_i)` and `(F_η(t), w_q)`.
    pub fn loads(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        let mut fu = vec![0.0; self.space.num_velocity_dofs()];
        let mut fe = vec![0.0; self.space.num_pressure_dofs()];
        self.velocity_load(t, &mut fu);
        self.pressure_load(t, &mut fe);
        (fu, fe)
    }
}

impl Forcing for MmsForcing {
    fn velocity_load(&self, t: f64, out: &mut [f64]) {
        out.fill(0.0);
        let space = &*self.space;
        let mut cv = CellValues::new(space, &self.tab);
        let nvl = cv.nvl();
        let exact = ManufacturedSolution;
        for cell in 0..space.mesh().num_cells() {
            cv.reinit(cell);
            let dofs = space.cell_velocity_dofs(cell);
            for q in 0..cv.num_points() {
                let f = exact.momentum_forcing(&self.params, cv.points[q], t);
                let w = cv.weights[q];
                for (i, &d) in dofs.iter().enumerate() {
                    let b = cv.velocity[q * nvl + i];
                    out[d] += w * (f[0] * b[0] + f[1] * b[1]);
                }
            }
        }
    }

    fn pressure_load(&self, t: f64, out: &mut [f64]) {
        out.fill(0.0);
        let space = &*self.space;
        let mut cv = CellValues::new(space, &self.tab);
        let npl = cv.npl();
        let exact = ManufacturedSolution;
        for cell in 0..space.mesh().num_cells() {
            cv.reinit(cell);
            for q in 0..cv.num_points() {
                let f = exact.continuity_forcing(cv.points[q], t);
                let w = cv.weights[q];
                for (l, d) in space.cell_pressure_dofs(cell).enumerate() {
                    out[d] += w * f * cv.pressure[q * npl + l];
                }
            }
        }
    }
}

/// Velocity and pressure load vectors of the manufactured solution at `t`.
pub fn mms_forcing_functionals(
    space: &Arc<FunctionSpacePair>,
    params: &ModelParams,
    t: f64,
) -> (Vec<f64>, Vec<f64>) {
    MmsForcing::new(space.clone(), params.clone()).loads(t)
}
