//! Crank-Nicolson time stepping with Newton iteration on the midpoint velocity.
//!
//! With `ū = (uⁿ + uⁿ⁺¹)/2`, `η̄ = (ηⁿ + ηⁿ⁺¹)/2` and `t̄ = tⁿ + dt/2` one step solves
//!
//! ```text
//! M (uⁿ⁺¹ - uⁿ)/dt + C ū - (β/ε²) Bᵀ η̄ + G(ū) = F(t̄)
//! M_W (ηⁿ⁺¹ - ηⁿ)/dt + B ū                   = F_η(t̄)
//! ```
//!
//! `M_W` is block diagonal, so the second line gives `η̄` explicitly in terms
//! of `ū`. Substituting leaves a system in `ū` alone,
//!
//! ```text
//! R(ū) = (2/dt) M (ū - uⁿ) + C ū + (β dt / 2ε²) Bᵀ M_W⁻¹ B ū + G(ū)
//!        - (β/ε²) Bᵀ (ηⁿ + (dt/2) M_W⁻¹ F_η) - F = 0,
//! ```
//!
//! restricted to interior velocity DOFs (boundary fluxes are eliminated).
//! Newton's method with a backtracking line search drives `‖R‖` below the
//! tolerance; after a step that fails to halve `‖R‖` the next one uses the
//! secant matrix of `G` instead of its derivative. Because `g` is sampled at `ū`, the step satisfies the discrete
//! energy relation `Eⁿ⁺¹ - Eⁿ = dt [-(G(ū), ū) + (F, ū) + (β/ε²)(F_η, η̄)]`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assembly::{DampingAssembler, Forcing, Linearization, ManufacturedSolution, ModelParams, Operators};
use crate::dense;
use crate::diagnostics::energy;
use crate::error::{Error, Result};
use crate::linsolve::{conjugate_gradient, DirectSolver, LinearSolverKind};
use crate::space::FunctionSpacePair;
use crate::sparse::CsrMatrix;

/// Smallest line-search step before a non-decreasing step is accepted.
const MIN_STEP: f64 = 1.0 / 1024.0;

/// Coefficients at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub u: Vec<f64>,
    pub eta: Vec<f64>,
}

impl State {
    pub fn zero(space: &FunctionSpacePair) -> Self {
        Self {
            t: 0.0,
            u: vec![0.0; space.num_velocity_dofs()],
            eta: vec![0.0; space.num_pressure_dofs()],
        }
    }

    /// `self - other` at the time of `self`.
    pub fn difference(&self, other: &State) -> State {
        State {
            t: self.t,
            u: self.u.iter().zip(&other.u).map(|(a, b)| a - b).collect(),
            eta: self.eta.iter().zip(&other.eta).map(|(a, b)| a - b).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    /// Absolute tolerance on the Euclidean norm of the Newton residual.
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub linear_solver: LinearSolverKind,
    /// Relative tolerance of the iterative linear solver.
    pub linear_tol: f64,
    pub linear_max_iter: usize,
}

impl SolverConfig {
    /// Defaults with the given time step.
    pub fn with_dt(dt: f64) -> Self {
        Self {
            dt,
            newton_tol: 1e-10,
            newton_max_iter: 50,
            linear_solver: LinearSolverKind::Direct,
            linear_tol: 1e-13,
            linear_max_iter: 10_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSolverConfig(m));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.newton_tol > 0.0) || !(self.linear_tol > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if self.newton_max_iter == 0 || self.linear_max_iter == 0 {
            return bad("iteration limits must be positive".into());
        }
        Ok(())
    }
}

/// Per-step solver statistics and energy-relation terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub newton_iterations: usize,
    /// Final residual norm.
    pub residual: f64,
    /// `(G(ū), ū)`.
    pub dissipation: f64,
    /// `(F(t̄), ū) + (β/ε²)(F_η(t̄), η̄)`.
    pub forcing_power: f64,
}

/// Reusable stepping machinery for one space, parameter set and forcing.
pub struct Stepper {
    space: Arc<FunctionSpacePair>,
    params: ModelParams,
    ops: Arc<Operators>,
    config: SolverConfig,
    damping: DampingAssembler,
    forcing: Arc<dyn Forcing>,
    /// Reduced index -> full velocity DOF.
    interior: Vec<usize>,
    /// Full DOF -> reduced index, `usize::MAX` on the boundary.
    reduced_index: Vec<usize>,
    /// Linear part `(2/dt) M + C + (β dt/2ε²) Bᵀ M_W⁻¹ B` on the full pattern.
    linear: CsrMatrix,
    /// Reduced system matrix; values rewritten each Newton iteration.
    reduced: CsrMatrix,
    /// Full pattern position -> reduced value position, `usize::MAX` if dropped.
    reduced_slot: Vec<usize>,
    reduced_base: Vec<f64>,
    direct: Option<DirectSolver>,
    /// Affine laws factor the (constant) jacobian once.
    factored_once: bool,
}

impl std::fmt::Debug for Stepper {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Stepper")
            .field("dofs", &self.space.num_velocity_dofs())
            .field("config", &self.config)
            .field("law", &self.params.damping)
            .finish()
    }
}

impl Stepper {
    pub fn new(
        space: Arc<FunctionSpacePair>,
        params: ModelParams,
        ops: Arc<Operators>,
        config: SolverConfig,
        forcing: Arc<dyn Forcing>,
    ) -> Result<Self> {
        config.validate()?;
        params.validate()?;
        if config.linear_solver == LinearSolverKind::ConjugateGradient && !params.coriolis.is_zero() {
            return Err(Error::InvalidSolverConfig(
                "conjugate gradients need a symmetric system; use the direct solver when f != 0".into(),
            ));
        }
        let damping = DampingAssembler::new(space.clone(), params.damping);
        let mut linear = damping.pattern().clone();
        add_into_pattern(&mut linear, &ops.mass, 2.0 / config.dt);
        add_into_pattern(&mut linear, &ops.coriolis, 1.0);
        let schur = schur_complement(&space, &ops);
        add_into_pattern(&mut linear, &schur, 0.5 * config.dt * params.pressure_scale());

        let interior = space.interior_dofs().to_vec();
        let mut reduced_index = vec![usize::MAX; space.num_velocity_dofs()];
        for (k, &d) in interior.iter().enumerate() {
            reduced_index[d] = k;
        }
        let reduced = linear.submatrix(&interior, &interior);
        // submatrix keeps the relative order of surviving entries
        let mut reduced_slot = vec![usize::MAX; linear.nnz()];
        let mut next = 0;
        for &r in &interior {
            for k in linear.row_ptr()[r]..linear.row_ptr()[r + 1] {
                if reduced_index[linear.col_idx()[k]] != usize::MAX {
                    reduced_slot[k] = next;
                    next += 1;
                }
            }
        }
        debug_assert_eq!(next, reduced.nnz());
        let reduced_base = reduced.values().to_vec();
        let direct = match config.linear_solver {
            LinearSolverKind::Direct => Some(DirectSolver::new(&reduced)?),
            LinearSolverKind::ConjugateGradient => None,
        };
        Ok(Self {
            space,
            params,
            ops,
            config,
            damping,
            forcing,
            interior,
            reduced_index,
            linear,
            reduced,
            reduced_slot,
            reduced_base,
            direct,
            factored_once: false,
        })
    }

    pub fn space(&self) -> &Arc<FunctionSpacePair> {
        &self.space
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn operators(&self) -> &Arc<Operators> {
        &self.ops
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn energy(&self, state: &State) -> f64 {
        energy(state, &self.ops, &self.params)
    }

    /// Advance one step of length `config.dt`.
    pub fn step(&mut self, state: &State) -> Result<(State, StepReport)> {
        let n = self.space.num_velocity_dofs();
        if state.u.len() != n || state.eta.len() != self.space.num_pressure_dofs() {
            return Err(Error::DimensionMismatch("state does not match the space".into()));
        }
        let dt = self.config.dt;
        let t_mid = state.t + 0.5 * dt;
        let scale = self.params.pressure_scale();

        let mut f_u = vec![0.0; n];
        let mut f_eta = vec![0.0; self.space.num_pressure_dofs()];
        if !self.forcing.is_zero() {
            self.forcing.velocity_load(t_mid, &mut f_u);
            self.forcing.pressure_load(t_mid, &mut f_eta);
        }
        let minv_f_eta = self.ops.apply_pressure_mass_inv(&f_eta);

        // constant part of the residual: -(2/dt) M uⁿ - (β/ε²) Bᵀ(ηⁿ + dt/2 M_W⁻¹ F_η) - F
        let mut shifted_eta = state.eta.clone();
        for (e, m) in shifted_eta.iter_mut().zip(&minv_f_eta) {
            *e += 0.5 * dt * m;
        }
        let bt_eta = self.ops.divergence.mul_transpose_vec(&shifted_eta);
        let mu = self.ops.mass.mul_vec(&state.u);
        let constant: Vec<f64> = (0..n)
            .map(|i| -(2.0 / dt) * mu[i] - scale * bt_eta[i] - f_u[i])
            .collect();

        let mut u_bar = state.u.clone();
        self.space.apply_boundary_condition(&mut u_bar);
        let mut g = vec![0.0; n];
        let mut residual = self.residual(&u_bar, &constant, &mut g);
        let mut res_norm = dense::norm(&residual);
        let mut iterations = 0;
        let affine = self.params.damping.is_affine();
        let mut jac_values = vec![0.0; self.linear.nnz()];
        // Newton on |v|^{p-2} v with p < 2 can bounce across v = 0 and stall;
        // after a weak step the next matrix is the secant one, which does not.
        let mut secant = false;

        while res_norm >= self.config.newton_tol {
            if iterations == self.config.newton_max_iter {
                return Err(Error::NewtonDiverged {
                    iterations,
                    residual: res_norm,
                    tolerance: self.config.newton_tol,
                });
            }
            iterations += 1;
            if !(affine && self.factored_once) {
                let lin = if secant { Linearization::Secant } else { Linearization::Tangent };
                self.damping.assemble_with(&u_bar, None, Some(&mut jac_values), lin);
                let values = self.reduced.values_mut();
                values.copy_from_slice(&self.reduced_base);
                for (k, &slot) in self.reduced_slot.iter().enumerate() {
                    if slot != usize::MAX {
                        values[slot] += jac_values[k];
                    }
                }
                if let Some(direct) = self.direct.as_mut() {
                    direct.factor(&self.reduced)?;
                }
                self.factored_once = true;
            }
            let rhs: Vec<f64> = residual.iter().map(|r| -r).collect();
            let delta = match self.direct.as_ref() {
                Some(direct) => direct.solve(&rhs)?,
                None => {
                    let mut x = vec![0.0; rhs.len()];
                    conjugate_gradient(
                        &self.reduced,
                        &rhs,
                        &mut x,
                        self.config.linear_tol,
                        self.config.linear_max_iter,
                    )?;
                    x
                }
            };

            // backtracking on ‖R‖
            let mut lambda = 1.0;
            loop {
                let mut trial = u_bar.clone();
                for (k, &d) in self.interior.iter().enumerate() {
                    trial[d] += lambda * delta[k];
                }
                let trial_res = self.residual(&trial, &constant, &mut g);
                let trial_norm = dense::norm(&trial_res);
                if trial_norm <= (1.0 - 1e-4 * lambda) * res_norm || lambda < MIN_STEP {
                    secant = trial_norm > 0.5 * res_norm;
                    u_bar = trial;
                    residual = trial_res;
                    res_norm = trial_norm;
                    break;
                }
                lambda *= 0.5;
            }
            if !res_norm.is_finite() {
                return Err(Error::NewtonDiverged {
                    iterations,
                    residual: res_norm,
                    tolerance: self.config.newton_tol,
                });
            }
        }
        // g holds G(ū) for the accepted iterate
        let g_bar = if iterations == 0 {
            self.damping.residual(&u_bar)
        } else {
            g
        };

        let bu = self.ops.divergence.mul_vec(&u_bar);
        let rate: Vec<f64> = f_eta.iter().zip(&bu).map(|(f, b)| f - b).collect();
        let deta = self.ops.apply_pressure_mass_inv(&rate);
        let eta_next: Vec<f64> = state.eta.iter().zip(&deta).map(|(e, d)| e + dt * d).collect();
        let eta_bar: Vec<f64> = state.eta.iter().zip(&deta).map(|(e, d)| e + 0.5 * dt * d).collect();
        let u_next: Vec<f64> = u_bar.iter().zip(&state.u).map(|(b, u)| 2.0 * b - u).collect();

        let report = StepReport {
            newton_iterations: iterations,
            residual: res_norm,
            dissipation: dense::dot(&g_bar, &u_bar),
            forcing_power: dense::dot(&f_u, &u_bar) + scale * dense::dot(&f_eta, &eta_bar),
        };
        Ok((
            State {
                t: state.t + dt,
                u: u_next,
                eta: eta_next,
            },
            report,
        ))
    }

    /// Reduced residual at `u_bar`; leaves `G(u_bar)` in `g`.
    fn residual(&self, u_bar: &[f64], constant: &[f64], g: &mut [f64]) -> Vec<f64> {
        self.damping.assemble(u_bar, Some(g), None);
        let lin = self.linear.mul_vec(u_bar);
        self.interior
            .iter()
            .map(|&d| lin[d] + g[d] + constant[d])
            .collect()
    }

    /// Reduced index of a velocity DOF, `None` on the boundary.
    pub fn reduced_index(&self, dof: usize) -> Option<usize> {
        let r = self.reduced_index[dof];
        (r != usize::MAX).then_some(r)
    }

    /// Step from `state` to `t_final` with the configured `dt`, calling
    /// `observe` after every step. The last step lands on `t_final` up to
    /// rounding only when `t_final` is a multiple of `dt`; callers pick `dt`
    /// accordingly (see [`steps_for`]).
    pub fn run<F>(&mut self, state: State, steps: usize, mut observe: F) -> Result<State>
    where
        F: FnMut(&State, &StepReport),
    {
        let t0 = state.t;
        let mut state = state;
        for n in 0..steps {
            let (mut next, report) = self.step(&state).map_err(|e| Error::StepFailed {
                step: n + 1,
                time: state.t,
                source: Box::new(e),
            })?;
            next.t = t0 + (n + 1) as f64 * self.config.dt;
            observe(&next, &report);
            state = next;
        }
        Ok(state)
    }
}

/// Number of uniform steps covering `[0, t_final]` with step at most `dt`,
/// and the step that makes them fit exactly.
pub fn steps_for(t_final: f64, dt: f64) -> (usize, f64) {
    let steps = ((t_final / dt) - 1e-9).ceil().max(1.0) as usize;
    (steps, t_final / steps as f64)
}

/// `Bᵀ M_W⁻¹ B`, assembled cell by cell on the velocity mass pattern.
fn schur_complement(space: &FunctionSpacePair, ops: &Operators) -> CsrMatrix {
    let nvl = space.velocity_dofs_per_cell();
    let npl = space.pressure_dofs_per_cell();
    let blocks = ops.pressure_mass_inv_blocks();
    let mut triplets = Vec::with_capacity(space.mesh().num_cells() * nvl * nvl);
    let mut b_local = vec![0.0; npl * nvl];
    for cell in 0..space.mesh().num_cells() {
        let dofs = space.cell_velocity_dofs(cell);
        for (l, row) in space.cell_pressure_dofs(cell).enumerate() {
            for (i, &d) in dofs.iter().enumerate() {
                b_local[l * nvl + i] = ops.divergence.get(row, d);
            }
        }
        let inv = &blocks[cell * npl * npl..(cell + 1) * npl * npl];
        for i in 0..nvl {
            for j in 0..nvl {
                let mut v = 0.0;
                for a in 0..npl {
                    for b in 0..npl {
                        v += b_local[a * nvl + i] * inv[a * npl + b] * b_local[b * nvl + j];
                    }
                }
                triplets.push((dofs[i], dofs[j], v));
            }
        }
    }
    let n = space.num_velocity_dofs();
    CsrMatrix::from_triplets(n, n, &triplets)
}

/// `target += s · x`, where the pattern of `x` is contained in that of `target`.
fn add_into_pattern(target: &mut CsrMatrix, x: &CsrMatrix, s: f64) {
    for r in 0..x.nrows() {
        let start = target.row_ptr()[r];
        let end = target.row_ptr()[r + 1];
        for (c, v) in x.row(r) {
            let k = target.col_idx()[start..end]
                .binary_search(&c)
                .expect("operator pattern contained in the cell coupling pattern");
            target.values_mut()[start + k] += s * v;
        }
    }
}

/// Random state with unit energy and zero-mean elevation.
///
/// Coefficients are drawn uniformly from `[-1, 1]` with ChaCha8 seeded by
/// `seed`: first every velocity DOF in index order, then every pressure DOF.
/// Boundary velocity DOFs are then zeroed, the mean of `η` is removed and
/// the state is scaled to `E = 1`. A degenerate (zero-energy) draw retries
/// with `seed + 1`.
pub fn random_initial_state(
    space: &FunctionSpacePair,
    params: &ModelParams,
    ops: &Operators,
    seed: u64,
) -> State {
    let mut seed = seed;
    loop {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut u: Vec<f64> = (0..space.num_velocity_dofs())
            .map(|_| rng.random_range(-1.0..=1.0))
            .collect();
        let mut eta: Vec<f64> = (0..space.num_pressure_dofs())
            .map(|_| rng.random_range(-1.0..=1.0))
            .collect();
        space.apply_boundary_condition(&mut u);
        // the constant function has all-ones coefficients, so ∫η = 1ᵀ M_W η
        let ones = space.pressure_constant();
        let integral = dense::dot(&ones, &ops.pressure_mass.mul_vec(&eta));
        let area = dense::dot(&ones, &ops.pressure_mass.mul_vec(&ones));
        let mean = integral / area;
        eta.iter_mut().for_each(|e| *e -= mean);
        let mut state = State { t: 0.0, u, eta };
        let e = energy(&state, ops, params);
        if e > 1e-200 && e.is_finite() {
            let s = e.sqrt().recip();
            state.u.iter_mut().for_each(|v| *v *= s);
            state.eta.iter_mut().for_each(|v| *v *= s);
            return state;
        }
        seed = seed.wrapping_add(1);
    }
}

/// Interpolant of the manufactured solution at time `t`.
pub fn mms_initial_state(space: &FunctionSpacePair, t: f64) -> State {
    let exact = ManufacturedSolution;
    let mut u = space.interpolate_hdiv(|p| exact.velocity(p, t));
    space.apply_boundary_condition(&mut u);
    let eta = space.project_pressure(|p| exact.elevation(p, t));
    State { t, u, eta }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{Field, MmsForcing, NoForcing, SyncForcing};
    use crate::damping::DampingLaw;
    use crate::mesh::Mesh;
    use crate::space::Order;

    fn setup(n: usize, k: usize, params: &ModelParams) -> (Arc<FunctionSpacePair>, Arc<Operators>) {
        let space = Arc::new(FunctionSpacePair::new(
            Arc::new(Mesh::unit_square(n).unwrap()),
            Order::from_index(k).unwrap(),
        ));
        let ops = Arc::new(Operators::assemble(&space, params));
        (space, ops)
    }

    fn small_scale_params(law: DampingLaw) -> ModelParams {
        ModelParams {
            epsilon: 0.1,
            beta: 0.1,
            ..ModelParams::unit()
        }
        .with_damping(law)
    }

    #[test]
    fn random_state_is_normalized_and_reproducible() {
        let params = small_scale_params(DampingLaw::none());
        for k in [1, 2] {
            let (space, ops) = setup(4, k, &params);
            let a = random_initial_state(&space, &params, &ops, 42);
            let b = random_initial_state(&space, &params, &ops, 42);
            assert_eq!(a, b);
            assert!((energy(&a, &ops, &params) - 1.0).abs() < 1e-12);
            let ones = space.pressure_constant();
            let mean = dense::dot(&ones, &ops.pressure_mass.mul_vec(&a.eta));
            assert!(mean.abs() < 1e-12);
            assert!(space.boundary_dofs().iter().all(|&d| a.u[d] == 0.0));
            let c = random_initial_state(&space, &params, &ops, 43);
            assert_ne!(a, c);
        }
    }

    #[test]
    fn conservative_step_keeps_energy() {
        let params = ModelParams {
            coriolis: Field::function(|p| 1.0 + p[0], 1.0, 2.0),
            ..small_scale_params(DampingLaw::none())
        };
        for k in [1, 2] {
            let (space, ops) = setup(4, k, &params);
            let mut stepper = Stepper::new(
                space.clone(),
                params.clone(),
                ops.clone(),
                SolverConfig::with_dt(0.1),
                Arc::new(NoForcing),
            )
            .unwrap();
            let mut state = random_initial_state(&space, &params, &ops, 1);
            for _ in 0..20 {
                let (next, report) = stepper.step(&state).unwrap();
                assert!(report.newton_iterations <= 1);
                assert!((energy(&next, &ops, &params) - 1.0).abs() < 1e-12);
                state = next;
            }
        }
    }

    #[test]
    fn linear_damping_needs_one_newton_iteration() {
        let params = small_scale_params(DampingLaw::linear(10.0).unwrap());
        let (space, ops) = setup(4, 1, &params);
        let mut stepper = Stepper::new(
            space.clone(),
            params.clone(),
            ops.clone(),
            SolverConfig::with_dt(0.05),
            Arc::new(NoForcing),
        )
        .unwrap();
        let mut state = random_initial_state(&space, &params, &ops, 3);
        for _ in 0..10 {
            let (next, report) = stepper.step(&state).unwrap();
            assert_eq!(report.newton_iterations, 1);
            state = next;
        }
    }

    #[test]
    fn energy_relation_holds_per_step() {
        for law in [
            DampingLaw::power(3.0, 10.0).unwrap(),
            DampingLaw::power(4.0, 10.0).unwrap(),
            DampingLaw::power_linearized(3.0, 2.0).unwrap(),
        ] {
            let params = small_scale_params(law);
            let (space, ops) = setup(4, 1, &params);
            let forcing = Arc::new(SyncForcing::new(&space, &params));
            let dt = 0.05;
            let mut stepper = Stepper::new(
                space.clone(),
                params.clone(),
                ops.clone(),
                SolverConfig::with_dt(dt),
                forcing,
            )
            .unwrap();
            let mut state = random_initial_state(&space, &params, &ops, 9);
            state.t = 0.4;
            for _ in 0..10 {
                let e0 = energy(&state, &ops, &params);
                let (next, r) = stepper.step(&state).unwrap();
                let e1 = energy(&next, &ops, &params);
                let defect = (e1 - e0) / dt + r.dissipation - r.forcing_power;
                assert!(defect.abs() < 1e-8, "{law}: defect {defect}");
                assert!(r.dissipation >= 0.0);
                state = next;
            }
        }
    }

    #[test]
    fn mms_energy_relation_includes_pressure_forcing() {
        let params = ModelParams::unit().with_damping(DampingLaw::linear(1.0).unwrap());
        let (space, ops) = setup(4, 2, &params);
        let forcing = Arc::new(MmsForcing::new(space.clone(), params.clone()));
        let dt = 0.1;
        let mut stepper =
            Stepper::new(space.clone(), params.clone(), ops.clone(), SolverConfig::with_dt(dt), forcing).unwrap();
        let mut state = mms_initial_state(&space, 0.0);
        for _ in 0..5 {
            let e0 = energy(&state, &ops, &params);
            let (next, r) = stepper.step(&state).unwrap();
            let e1 = energy(&next, &ops, &params);
            assert!(((e1 - e0) / dt + r.dissipation - r.forcing_power).abs() < 1e-9);
            state = next;
        }
    }

    #[test]
    fn cg_agrees_with_direct() {
        let params = small_scale_params(DampingLaw::power(3.0, 10.0).unwrap());
        let (space, ops) = setup(4, 2, &params);
        let state = random_initial_state(&space, &params, &ops, 5);
        let mut cfg = SolverConfig::with_dt(0.1);
        let mut direct =
            Stepper::new(space.clone(), params.clone(), ops.clone(), cfg, Arc::new(NoForcing)).unwrap();
        cfg.linear_solver = LinearSolverKind::ConjugateGradient;
        let mut cg = Stepper::new(space.clone(), params.clone(), ops.clone(), cfg, Arc::new(NoForcing)).unwrap();
        let (a, _) = direct.step(&state).unwrap();
        let (b, _) = cg.step(&state).unwrap();
        for (x, y) in a.u.iter().zip(&b.u) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn cg_rejects_rotation() {
        let params = ModelParams {
            coriolis: Field::constant(1.0),
            ..ModelParams::unit()
        };
        let (space, ops) = setup(2, 1, &params);
        let mut cfg = SolverConfig::with_dt(0.1);
        cfg.linear_solver = LinearSolverKind::ConjugateGradient;
        assert!(matches!(
            Stepper::new(space, params, ops, cfg, Arc::new(NoForcing)),
            Err(Error::InvalidSolverConfig(_))
        ));
    }

    #[test]
    fn sublinear_law_survives_velocities_near_zero() {
        // plain Newton used to stall here around step 230
        let params = ModelParams {
            coriolis: Field::constant(1.0),
            ..small_scale_params(DampingLaw::power(1.5, 10.0).unwrap())
        };
        let (space, ops) = setup(8, 1, &params);
        let mut stepper =
            Stepper::new(space.clone(), params.clone(), ops.clone(), SolverConfig::with_dt(0.0625), Arc::new(NoForcing))
                .unwrap();
        let state = random_initial_state(&space, &params, &ops, 7);
        let mut worst = 0;
        stepper
            .run(state, 300, |_, r| worst = worst.max(r.newton_iterations))
            .unwrap();
        assert!(worst <= 20, "{worst} iterations");
    }

    #[test]
    fn newton_failure_is_reported() {
        let params = small_scale_params(DampingLaw::power(4.0, 10.0).unwrap());
        let (space, ops) = setup(2, 1, &params);
        let mut cfg = SolverConfig::with_dt(0.1);
        cfg.newton_max_iter = 1;
        cfg.newton_tol = 1e-30;
        let mut stepper = Stepper::new(space.clone(), params.clone(), ops.clone(), cfg, Arc::new(NoForcing)).unwrap();
        let state = random_initial_state(&space, &params, &ops, 5);
        let err = stepper.run(state, 3, |_, _| {}).unwrap_err();
        assert!(err.is_solver_failure());
        assert!(matches!(err, Error::StepFailed { step: 1, .. }));
    }

    #[test]
    fn invalid_config_rejected() {
        assert!(SolverConfig::with_dt(0.0).validate().is_err());
        let mut c = SolverConfig::with_dt(0.1);
        c.newton_tol = -1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn mms_initial_energy() {
        let params = ModelParams::unit();
        for (k, tol) in [(1, 2e-2), (2, 2e-3)] {
            let (space, ops) = setup(16, k, &params);
            let s = mms_initial_state(&space, 0.0);
            let e = energy(&s, &ops, &params);
            assert!((e - 0.375).abs() < tol, "k={k}: {e}");
            assert!(space.boundary_dofs().iter().all(|&d| s.u[d] == 0.0));
        }
    }

    #[test]
    fn quadratic_damping_matches_rk4_reference() {
        // one CN step against a fine RK4 integration of the same ODE system;
        // the local error is O(dt³)
        let params = small_scale_params(DampingLaw::power(3.0, 10.0).unwrap());
        let (space, ops) = setup(2, 1, &params);
        let state = random_initial_state(&space, &params, &ops, 11);
        let mass_solver = {
            let interior = space.interior_dofs().to_vec();
            let m = ops.mass.submatrix(&interior, &interior);
            let mut s = DirectSolver::new(&m).unwrap();
            s.factor(&m).unwrap();
            (s, interior)
        };
        let damping = DampingAssembler::new(space.clone(), params.damping);
        let rhs = |u: &[f64], eta: &[f64]| -> (Vec<f64>, Vec<f64>) {
            let g = damping.residual(u);
            let bt = ops.divergence.mul_transpose_vec(eta);
            let full: Vec<f64> = (0..u.len())
                .map(|i| params.pressure_scale() * bt[i] - g[i])
                .collect();
            let reduced: Vec<f64> = mass_solver.1.iter().map(|&d| full[d]).collect();
            let du_red = mass_solver.0.solve(&reduced).unwrap();
            let mut du = vec![0.0; u.len()];
            for (k, &d) in mass_solver.1.iter().enumerate() {
                du[d] = du_red[k];
            }
            let deta: Vec<f64> = ops
                .apply_pressure_mass_inv(&ops.divergence.mul_vec(u))
                .iter()
                .map(|v| -v)
                .collect();
            (du, deta)
        };
        let rk4 = |dt: f64, substeps: usize| {
            let h = dt / substeps as f64;
            let (mut u, mut eta) = (state.u.clone(), state.eta.clone());
            let axpy = |x: &[f64], a: f64, y: &[f64]| -> Vec<f64> {
                x.iter().zip(y).map(|(x, y)| x + a * y).collect()
            };
            for _ in 0..substeps {
                let (k1u, k1e) = rhs(&u, &eta);
                let (k2u, k2e) = rhs(&axpy(&u, h / 2.0, &k1u), &axpy(&eta, h / 2.0, &k1e));
                let (k3u, k3e) = rhs(&axpy(&u, h / 2.0, &k2u), &axpy(&eta, h / 2.0, &k2e));
                let (k4u, k4e) = rhs(&axpy(&u, h, &k3u), &axpy(&eta, h, &k3e));
                for i in 0..u.len() {
                    u[i] += h / 6.0 * (k1u[i] + 2.0 * k2u[i] + 2.0 * k3u[i] + k4u[i]);
                }
                for i in 0..eta.len() {
                    eta[i] += h / 6.0 * (k1e[i] + 2.0 * k2e[i] + 2.0 * k3e[i] + k4e[i]);
                }
            }
            (u, eta)
        };
        let mut errors = Vec::new();
        for dt in [4e-3, 2e-3] {
            let mut stepper = Stepper::new(
                space.clone(),
                params.clone(),
                ops.clone(),
                SolverConfig::with_dt(dt),
                Arc::new(NoForcing),
            )
            .unwrap();
            let (cn, _) = stepper.step(&state).unwrap();
            let (u_ref, eta_ref) = rk4(dt, 64);
            let err = cn
                .u
                .iter()
                .zip(&u_ref)
                .chain(cn.eta.iter().zip(&eta_ref))
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            errors.push(err);
        }
        let order = (errors[0] / errors[1]).log2();
        assert!((order - 3.0).abs() < 0.3, "local order {order}, errors {errors:?}");
    }
}
