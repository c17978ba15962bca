//! Experiment drivers behind the command-line tool.
//!
//! Each driver turns an [`ExperimentConfig`] into a report that can print a
//! summary and write CSV tables, a `summary.txt` and SVG plots.

mod config;
pub mod plot;

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

pub use config::{parse_pairs, ExperimentConfig, ExperimentKind, KEYS};

use crate::assembly::{DampingAssembler, Forcing, ManufacturedSolution, MmsForcing, ModelParams, NoForcing, Operators, SyncForcing};
use crate::damping::{decay_class_for_exponent, DampingKind, DampingLaw, DecayClass};
use crate::decay::{build_constants, DecayConstants, DecayInputs, Envelope, JFunction};
use crate::dense;
use crate::diagnostics::{
    energy, fit_exponential_rate, fit_shifted_power_law, l2_errors, least_squares, EnergyTrace, FitWindow,
    LineFit, ShiftedPowerFit, TraceSample,
};
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::space::{FunctionSpacePair, Order};
use crate::timestep::{mms_initial_state, random_initial_state, steps_for, SolverConfig, State, Stepper};
use plot::{LinePlot, Series};

/// Outcome of fitting a decay rate to a trace.
#[derive(Debug, Clone, PartialEq)]
pub enum RateFit {
    /// Power law in shifted time; `expected` is the predicted exponent.
    Algebraic { fit: ShiftedPowerFit, expected: f64 },
    /// `log E` linear in `t`.
    Exponential { fit: LineFit },
    /// Nothing to fit (no damping) or too few samples.
    Unavailable(String),
}

impl RateFit {
    fn for_trace(trace: &EnergyTrace, law: &DampingLaw, cfg: &ExperimentConfig) -> Self {
        let window = FitWindow::new(cfg.fit_lo, cfg.fit_hi).above(cfg.fit_floor);
        let class = match law.kind() {
            DampingKind::None => return Self::Unavailable("undamped".into()),
            DampingKind::Linear => DecayClass::Exponential,
            DampingKind::Power { p } | DampingKind::PowerLinearized { p } => decay_class_for_exponent(p),
        };
        let fitted = match class {
            DecayClass::Exponential => fit_exponential_rate(trace, window).map(|fit| Self::Exponential { fit }),
            DecayClass::Algebraic { exponent } => fit_shifted_power_law(trace, window, cfg.max_shift)
                .map(|fit| Self::Algebraic { fit, expected: exponent }),
        };
        fitted.unwrap_or_else(|e| Self::Unavailable(e.to_string()))
    }

    fn summary(&self, prefix: &str, out: &mut Vec<(String, String)>) {
        let mut put = |k: &str, v: String| out.push((format!("{prefix}.{k}"), v));
        match self {
            Self::Algebraic { fit, expected } => {
                put("fit", "shifted_power_law".into());
                put("exponent", format!("{:.6}", fit.exponent));
                put("expected_exponent", format!("{expected:.6}"));
                put("shift", format!("{:.6}", fit.shift));
                put("unshifted_exponent", format!("{:.6}", fit.unshifted_exponent));
                put("r_squared", format!("{:.8}", fit.r_squared));
                put("fit_samples", fit.samples.to_string());
            }
            Self::Exponential { fit } => {
                put("fit", "exponential".into());
                put("rate", format!("{:.6}", fit.slope));
                put("r_squared", format!("{:.8}", fit.r_squared));
                put("fit_samples", fit.samples.to_string());
            }
            Self::Unavailable(why) => put("fit", format!("unavailable ({why})")),
        }
    }
}

/// One damping law's unforced run.
#[derive(Debug, Clone)]
pub struct DampingRun {
    pub law: DampingLaw,
    pub trace: EnergyTrace,
    pub fit: RateFit,
    pub newton_iterations: usize,
    pub steps: usize,
}

#[derive(Debug, Clone)]
pub struct DampingReport {
    pub config: ExperimentConfig,
    pub runs: Vec<DampingRun>,
}

/// Difference-energy trace of two forced runs at one time step.
#[derive(Debug, Clone)]
pub struct SyncTrace {
    pub dt: f64,
    pub trace: EnergyTrace,
    /// Geometric mean of the difference energy from `plateau_from` on.
    pub plateau: f64,
}

#[derive(Debug, Clone)]
pub struct SyncRun {
    pub law: DampingLaw,
    pub base: SyncTrace,
    pub fit: RateFit,
    /// The same pair rerun with `dt/2`.
    pub refined: Option<SyncTrace>,
}

impl SyncRun {
    /// Plateau at `dt` over plateau at `dt/2`.
    pub fn plateau_ratio(&self) -> Option<f64> {
        self.refined.as_ref().map(|r| self.base.plateau / r.plateau)
    }
}

#[derive(Debug, Clone)]
pub struct SyncReport {
    pub config: ExperimentConfig,
    pub runs: Vec<SyncRun>,
}

/// L2 errors of the manufactured solution at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorSample {
    pub t: f64,
    pub velocity: f64,
    pub elevation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergeRow {
    pub n: usize,
    pub h: f64,
    pub dt: f64,
    pub steps: usize,
    pub final_velocity: f64,
    pub final_elevation: f64,
    pub max_velocity: f64,
    pub max_elevation: f64,
}

#[derive(Debug, Clone)]
pub struct ConvergeReport {
    pub config: ExperimentConfig,
    pub rows: Vec<ConvergeRow>,
    pub histories: Vec<Vec<ErrorSample>>,
    /// Least-squares slopes of `log err` against `log h`.
    pub order_velocity: f64,
    pub order_elevation: f64,
    pub order_velocity_max: f64,
    pub order_elevation_max: f64,
}

#[derive(Debug, Clone)]
pub struct EnvelopeReport {
    pub config: ExperimentConfig,
    pub law: DampingLaw,
    pub constants: DecayConstants,
    pub envelope: Envelope,
    /// `(t, S(t), bound(t))`.
    pub table: Vec<(f64, f64, f64)>,
}

#[derive(Debug, Clone)]
pub enum ExperimentReport {
    Damping(DampingReport),
    Sync(SyncReport),
    Converge(ConvergeReport),
    Envelope(EnvelopeReport),
}

/// Validates `cfg` and runs the experiment it names.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    Ok(match cfg.kind {
        ExperimentKind::Damping => ExperimentReport::Damping(run_damping(cfg)?),
        ExperimentKind::Sync => ExperimentReport::Sync(run_sync(cfg)?),
        ExperimentKind::Converge => ExperimentReport::Converge(run_converge(cfg)?),
        ExperimentKind::Envelope => ExperimentReport::Envelope(run_envelope(cfg)?),
    })
}

struct Discretization {
    space: Arc<FunctionSpacePair>,
    ops: Arc<Operators>,
}

impl Discretization {
    fn new(n: usize, order: usize, params: &ModelParams) -> Result<Self> {
        let space = Arc::new(FunctionSpacePair::new(
            Arc::new(Mesh::unit_square(n)?),
            Order::from_index(order)?,
        ));
        let ops = Arc::new(Operators::assemble(&space, params));
        Ok(Self { space, ops })
    }

    fn stepper(&self, params: &ModelParams, config: SolverConfig, forcing: Arc<dyn Forcing>) -> Result<Stepper> {
        Stepper::new(self.space.clone(), params.clone(), self.ops.clone(), config, forcing)
    }
}

fn step_failed(step: usize, time: f64, e: Error) -> Error {
    Error::StepFailed {
        step,
        time,
        source: Box::new(e),
    }
}

/// Unforced energy decay from a random unit-energy state, one run per law.
pub fn run_damping(cfg: &ExperimentConfig) -> Result<DampingReport> {
    cfg.validate()?;
    let base = cfg.model_params_with(DampingLaw::none())?;
    let disc = Discretization::new(cfg.n, cfg.order, &base)?;
    let (steps, dt) = steps_for(cfg.t_final, cfg.dt_for(cfg.n));
    let mut runs = Vec::new();
    for law in cfg.laws()? {
        let params = cfg.model_params_with(law)?;
        let mut stepper = disc.stepper(&params, cfg.solver_config(dt)?, Arc::new(NoForcing))?;
        let seed = cfg.seeds[0];
        let mut state = random_initial_state(&disc.space, &params, &disc.ops, seed);
        let mut trace = EnergyTrace::new()
            .with_metadata("experiment", "damping")
            .with_metadata("law", law)
            .with_metadata("seed", seed)
            .with_metadata("n", cfg.n)
            .with_metadata("dt", dt);
        trace.push(TraceSample {
            t: 0.0,
            energy: energy(&state, &disc.ops, &params),
            dissipation: 0.0,
            forcing_power: 0.0,
        })?;
        let mut newton = 0;
        for i in 0..steps {
            let (mut next, report) = stepper.step(&state).map_err(|e| step_failed(i + 1, state.t, e))?;
            next.t = (i + 1) as f64 * dt;
            newton += report.newton_iterations;
            trace.push(TraceSample {
                t: next.t,
                energy: energy(&next, &disc.ops, &params),
                dissipation: report.dissipation,
                forcing_power: report.forcing_power,
            })?;
            state = next;
        }
        let fit = RateFit::for_trace(&trace, &law, cfg);
        runs.push(DampingRun {
            law,
            trace,
            fit,
            newton_iterations: newton,
            steps,
        });
    }
    Ok(DampingReport {
        config: cfg.clone(),
        runs,
    })
}

fn midpoint(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect()
}

/// Two runs under the same forcing from the two seeds; records the energy
/// of their difference. Its dissipation column is
/// `(G(ū₁) - G(ū₂), ū₁ - ū₂)`, so the discrete energy relation holds for
/// the difference as well.
fn sync_pair(
    cfg: &ExperimentConfig,
    disc: &Discretization,
    params: &ModelParams,
    dt_target: f64,
) -> Result<SyncTrace> {
    let (steps, dt) = steps_for(cfg.t_final, dt_target);
    let forcing: Arc<dyn Forcing> = Arc::new(SyncForcing::new(&disc.space, params));
    let solver = cfg.solver_config(dt)?;
    let mut first = disc.stepper(params, solver, forcing.clone())?;
    let mut second = disc.stepper(params, solver, forcing)?;
    let damping = DampingAssembler::new(disc.space.clone(), params.damping);
    let mut a = random_initial_state(&disc.space, params, &disc.ops, cfg.seeds[0]);
    let mut b = random_initial_state(&disc.space, params, &disc.ops, cfg.seeds[1]);
    let mut trace = EnergyTrace::new()
        .with_metadata("experiment", "sync")
        .with_metadata("law", params.damping)
        .with_metadata("seeds", format!("{},{}", cfg.seeds[0], cfg.seeds[1]))
        .with_metadata("n", cfg.n)
        .with_metadata("dt", dt);
    trace.push(TraceSample {
        t: 0.0,
        energy: energy(&a.difference(&b), &disc.ops, params),
        dissipation: 0.0,
        forcing_power: 0.0,
    })?;
    for i in 0..steps {
        let (mut na, _) = first.step(&a).map_err(|e| step_failed(i + 1, a.t, e))?;
        let (mut nb, _) = second.step(&b).map_err(|e| step_failed(i + 1, b.t, e))?;
        let t = (i + 1) as f64 * dt;
        na.t = t;
        nb.t = t;
        let ua = midpoint(&a.u, &na.u);
        let ub = midpoint(&b.u, &nb.u);
        let ga = damping.residual(&ua);
        let gb = damping.residual(&ub);
        let dg: Vec<f64> = ga.iter().zip(&gb).map(|(x, y)| x - y).collect();
        let du: Vec<f64> = ua.iter().zip(&ub).map(|(x, y)| x - y).collect();
        trace.push(TraceSample {
            t,
            energy: energy(&na.difference(&nb), &disc.ops, params),
            dissipation: dense::dot(&dg, &du),
            forcing_power: 0.0,
        })?;
        a = na;
        b = nb;
    }
    let plateau = geometric_mean(trace.window(cfg.plateau_start(), cfg.t_final).map(|s| s.energy));
    Ok(SyncTrace { dt, trace, plateau })
}

fn geometric_mean(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut count) = (0.0, 0usize);
    for v in values {
        sum += v.max(f64::MIN_POSITIVE).ln();
        count += 1;
    }
    if count == 0 {
        f64::NAN
    } else {
        (sum / count as f64).exp()
    }
}

/// Synchronization of two forced runs, one pair per law, optionally
/// repeated with half the time step.
pub fn run_sync(cfg: &ExperimentConfig) -> Result<SyncReport> {
    cfg.validate()?;
    let base = cfg.model_params_with(DampingLaw::none())?;
    let disc = Discretization::new(cfg.n, cfg.order, &base)?;
    let dt = cfg.dt_for(cfg.n);
    let mut runs = Vec::new();
    for law in cfg.laws()? {
        let params = cfg.model_params_with(law)?;
        let base = sync_pair(cfg, &disc, &params, dt)?;
        let fit = RateFit::for_trace(&base.trace, &law, cfg);
        let refined = if cfg.refine_dt {
            Some(sync_pair(cfg, &disc, &params, 0.5 * base.dt)?)
        } else {
            None
        };
        runs.push(SyncRun {
            law,
            base,
            fit,
            refined,
        });
    }
    Ok(SyncReport {
        config: cfg.clone(),
        runs,
    })
}

/// Manufactured-solution run on one mesh.
#[derive(Debug, Clone)]
pub struct MmsSetup {
    pub n: usize,
    pub order: usize,
    pub params: ModelParams,
    pub dt: f64,
    pub t_final: f64,
    pub solver: SolverConfig,
}

impl MmsSetup {
    /// Unit coefficients with the given law and `dt = h/2`.
    pub fn unit(n: usize, order: usize, law: DampingLaw, t_final: f64) -> Self {
        let dt = 0.5 / n as f64;
        Self {
            n,
            order,
            params: ModelParams::unit().with_damping(law),
            dt,
            t_final,
            solver: SolverConfig::with_dt(dt),
        }
    }
}

/// L2 errors against the manufactured solution at every step, starting
/// from its interpolant at `t = 0`.
pub fn mms_error_history(setup: &MmsSetup) -> Result<Vec<ErrorSample>> {
    let disc = Discretization::new(setup.n, setup.order, &setup.params)?;
    let (steps, dt) = steps_for(setup.t_final, setup.dt);
    let forcing = Arc::new(MmsForcing::new(disc.space.clone(), setup.params.clone()));
    let mut stepper = disc.stepper(&setup.params, SolverConfig { dt, ..setup.solver }, forcing)?;
    let exact = ManufacturedSolution;
    let errors = |s: &State| {
        let (velocity, elevation) = l2_errors(
            &disc.space,
            s,
            |p| exact.velocity(p, s.t),
            |p| exact.elevation(p, s.t),
        );
        ErrorSample {
            t: s.t,
            velocity,
            elevation,
        }
    };
    let mut state = mms_initial_state(&disc.space, 0.0);
    let mut history = vec![errors(&state)];
    for i in 0..steps {
        let (mut next, _) = stepper.step(&state).map_err(|e| step_failed(i + 1, state.t, e))?;
        next.t = (i + 1) as f64 * dt;
        history.push(errors(&next));
        state = next;
    }
    Ok(history)
}

/// Convergence study over the configured meshes, one thread per mesh.
pub fn run_converge(cfg: &ExperimentConfig) -> Result<ConvergeReport> {
    cfg.validate()?;
    let law = cfg.laws()?[0];
    let params = cfg.model_params_with(law)?;
    let setups: Vec<MmsSetup> = cfg
        .meshes
        .iter()
        .map(|&n| {
            let dt = cfg.dt_for(n);
            Ok(MmsSetup {
                n,
                order: cfg.order,
                params: params.clone(),
                dt,
                t_final: cfg.t_final,
                solver: cfg.solver_config(dt)?,
            })
        })
        .collect::<Result<_>>()?;
    let histories: Vec<Result<Vec<ErrorSample>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = setups
            .iter()
            .map(|setup| scope.spawn(move || mms_error_history(setup)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("convergence worker panicked"))
            .collect()
    });
    let histories: Vec<Vec<ErrorSample>> = histories.into_iter().collect::<Result<_>>()?;
    let rows: Vec<ConvergeRow> = setups
        .iter()
        .zip(&histories)
        .map(|(s, hist)| {
            let last = hist.last().expect("history holds the initial sample");
            ConvergeRow {
                n: s.n,
                h: 1.0 / s.n as f64,
                dt: steps_for(s.t_final, s.dt).1,
                steps: hist.len() - 1,
                final_velocity: last.velocity,
                final_elevation: last.elevation,
                max_velocity: hist.iter().map(|e| e.velocity).fold(0.0, f64::max),
                max_elevation: hist.iter().map(|e| e.elevation).fold(0.0, f64::max),
            }
        })
        .collect();
    let order = |err: fn(&ConvergeRow) -> f64| {
        let xs: Vec<f64> = rows.iter().map(|r| r.h.ln()).collect();
        let ys: Vec<f64> = rows.iter().map(|r| err(r).ln()).collect();
        least_squares(&xs, &ys).slope
    };
    Ok(ConvergeReport {
        config: cfg.clone(),
        order_velocity: order(|r| r.final_velocity),
        order_elevation: order(|r| r.final_elevation),
        order_velocity_max: order(|r| r.max_velocity),
        order_elevation_max: order(|r| r.max_elevation),
        rows,
        histories,
    })
}

/// Theorem constants and the decay envelope for the first configured law
/// on the unit square.
pub fn run_envelope(cfg: &ExperimentConfig) -> Result<EnvelopeReport> {
    cfg.validate()?;
    let law = cfg.laws()?[0];
    let structural = law.structural_constants()?;
    let j = JFunction::for_law(&law)?;
    let inputs = DecayInputs {
        poincare: cfg.poincare,
        depth_min: cfg.depth,
        depth_max: cfg.depth,
        coriolis_max: cfg.coriolis.abs(),
        beta: cfg.beta,
        epsilon: cfg.epsilon,
        growth: structural.growth,
        e0: cfg.e0,
        domain_area: 1.0,
    };
    let constants = build_constants(inputs, &j)?;
    let envelope = Envelope::new(&constants, &j);
    let table = (0..cfg.samples)
        .map(|i| {
            let t = cfg.t_final * i as f64 / (cfg.samples - 1) as f64;
            (t, envelope.s(t), envelope.bound(t))
        })
        .collect();
    Ok(EnvelopeReport {
        config: cfg.clone(),
        law,
        constants,
        envelope,
        table,
    })
}

/// File-name friendly form of a law, e.g. `power_3`.
pub fn law_slug(law: &DampingLaw) -> String {
    law.to_string()
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' { c } else { '_' })
        .collect()
}

fn trace_points(trace: &EnergyTrace) -> Vec<(f64, f64)> {
    trace.samples.iter().map(|s| (s.t, s.energy)).collect()
}

fn write_trace(dir: &Path, name: &str, trace: &EnergyTrace, written: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    let mut file = std::io::BufWriter::new(fs::File::create(&path)?);
    trace.write_csv(&mut file)?;
    written.push(path);
    Ok(())
}

fn write_text(dir: &Path, name: &str, text: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, text)?;
    written.push(path);
    Ok(())
}

impl ExperimentReport {
    pub fn config(&self) -> &ExperimentConfig {
        match self {
            Self::Damping(r) => &r.config,
            Self::Sync(r) => &r.config,
            Self::Converge(r) => &r.config,
            Self::Envelope(r) => &r.config,
        }
    }

    /// Result figures as `(key, value)` pairs.
    pub fn summary(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        match self {
            Self::Damping(r) => {
                for run in &r.runs {
                    let k = law_slug(&run.law);
                    out.push((format!("{k}.final_energy"), format!("{:.6e}", run.trace.final_energy().unwrap_or(f64::NAN))));
                    out.push((
                        format!("{k}.newton_per_step"),
                        format!("{:.3}", run.newton_iterations as f64 / run.steps as f64),
                    ));
                    run.fit.summary(&k, &mut out);
                }
            }
            Self::Sync(r) => {
                for run in &r.runs {
                    let k = law_slug(&run.law);
                    out.push((format!("{k}.plateau"), format!("{:.6e}", run.base.plateau)));
                    if let Some(refined) = &run.refined {
                        out.push((format!("{k}.plateau_half_dt"), format!("{:.6e}", refined.plateau)));
                        out.push((
                            format!("{k}.plateau_ratio"),
                            format!("{:.4}", run.plateau_ratio().unwrap_or(f64::NAN)),
                        ));
                    }
                    run.fit.summary(&k, &mut out);
                }
            }
            Self::Converge(r) => {
                out.push(("order_velocity".into(), format!("{:.4}", r.order_velocity)));
                out.push(("order_elevation".into(), format!("{:.4}", r.order_elevation)));
                out.push(("order_velocity_max".into(), format!("{:.4}", r.order_velocity_max)));
                out.push(("order_elevation_max".into(), format!("{:.4}", r.order_elevation_max)));
            }
            Self::Envelope(r) => {
                let c = &r.constants;
                for (k, v) in [
                    ("period", c.period),
                    ("sigma", c.sigma),
                    ("d1", c.d1),
                    ("d2", c.d2),
                    ("d1_tilde", c.d1_tilde),
                    ("d_j", c.d_j),
                    ("gamma", r.envelope.gamma),
                    ("m", r.envelope.m),
                ] {
                    out.push((k.into(), format!("{v:.10e}")));
                }
                let exponent = r
                    .envelope
                    .asymptotic_exponent()
                    .map(|e| format!("{e}"))
                    .unwrap_or_else(|| "exponential".into());
                out.push(("asymptotic_exponent".into(), exponent));
            }
        }
        out
    }

    /// Writes tables, `summary.txt` (configuration plus results) and, if
    /// enabled, SVG plots into `dir`. Returns the written paths.
    pub fn write_outputs(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let cfg = self.config();
        let mut written = Vec::new();
        let mut plots: Vec<(&str, LinePlot)> = Vec::new();
        match self {
            Self::Damping(r) => {
                let mut plot = LinePlot::new("Energy decay", "t", "E").log_x().log_y();
                for run in &r.runs {
                    write_trace(dir, &format!("damping_{}.csv", law_slug(&run.law)), &run.trace, &mut written)?;
                    plot = plot.with_series(Series::new(run.law.to_string(), trace_points(&run.trace)));
                }
                plots.push(("damping.svg", plot));
            }
            Self::Sync(r) => {
                let mut plot = LinePlot::new("Difference energy", "t", "E(u1 - u2)").log_x().log_y();
                for run in &r.runs {
                    let slug = law_slug(&run.law);
                    write_trace(dir, &format!("sync_{slug}.csv"), &run.base.trace, &mut written)?;
                    plot = plot.with_series(Series::new(run.law.to_string(), trace_points(&run.base.trace)));
                    if let Some(refined) = &run.refined {
                        write_trace(dir, &format!("sync_{slug}_half_dt.csv"), &refined.trace, &mut written)?;
                        plot = plot.with_series(Series::new(format!("{} dt/2", run.law), trace_points(&refined.trace)));
                    }
                }
                plots.push(("sync.svg", plot));
            }
            Self::Converge(r) => {
                let mut table = String::from("n,h,dt,steps,err_u,err_eta,max_err_u,max_err_eta\n");
                for row in &r.rows {
                    table.push_str(&format!(
                        "{},{:.17e},{:.17e},{},{:.17e},{:.17e},{:.17e},{:.17e}\n",
                        row.n,
                        row.h,
                        row.dt,
                        row.steps,
                        row.final_velocity,
                        row.final_elevation,
                        row.max_velocity,
                        row.max_elevation
                    ));
                }
                write_text(dir, "converge.csv", &table, &mut written)?;
                let pts = |f: fn(&ConvergeRow) -> f64| r.rows.iter().map(|row| (row.h, f(row))).collect();
                plots.push((
                    "converge.svg",
                    LinePlot::new("MMS errors", "h", "L2 error")
                        .log_x()
                        .log_y()
                        .with_series(Series::new("u final", pts(|r| r.final_velocity)))
                        .with_series(Series::new("eta final", pts(|r| r.final_elevation)))
                        .with_series(Series::new("u max", pts(|r| r.max_velocity)))
                        .with_series(Series::new("eta max", pts(|r| r.max_elevation))),
                ));
            }
            Self::Envelope(r) => {
                let mut table = String::from("t,S,bound\n");
                for (t, s, b) in &r.table {
                    table.push_str(&format!("{t:.17e},{s:.17e},{b:.17e}\n"));
                }
                write_text(dir, "envelope.csv", &table, &mut written)?;
                plots.push((
                    "envelope.svg",
                    LinePlot::new(format!("Decay envelope, {}", r.law), "t", "energy")
                        .log_y()
                        .with_series(Series::new("S(t)", r.table.iter().map(|x| (x.0, x.1)).collect()))
                        .with_series(Series::new("bound", r.table.iter().map(|x| (x.0, x.2)).collect())),
                ));
            }
        }
        let mut summary = format!("experiment = {}\n", cfg.kind);
        summary.push_str(&cfg.to_text());
        summary.push_str("# results\n");
        for (k, v) in self.summary() {
            summary.push_str(&format!("{k} = {v}\n"));
        }
        write_text(dir, "summary.txt", &summary, &mut written)?;
        if cfg.plot {
            for (name, plot) in plots {
                write_text(dir, name, &plot.to_svg(), &mut written)?;
            }
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(kind: ExperimentKind) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::defaults(kind);
        cfg.n = 4;
        cfg.t_final = 2.0;
        cfg.fit_lo = 0.2;
        cfg.fit_hi = 2.0;
        cfg.fit_floor = 0.0;
        cfg.max_shift = 10.0;
        cfg
    }

    #[test]
    fn damping_runs_every_law_and_dissipates() {
        let report = run_damping(&quick(ExperimentKind::Damping)).unwrap();
        assert_eq!(report.runs.len(), 3);
        for run in &report.runs {
            assert_eq!(run.trace.len(), run.steps + 1);
            assert!((run.trace.samples[0].energy - 1.0).abs() < 1e-12);
            assert!(run.trace.final_energy().unwrap() < 1.0);
            for w in run.trace.samples.windows(2) {
                let dt = w[1].t - w[0].t;
                let relation = w[1].energy - w[0].energy + dt * w[1].dissipation;
                assert!(relation.abs() < 1e-9, "{}: {relation}", run.law);
            }
        }
        assert!(matches!(report.runs[0].fit, RateFit::Exponential { .. }));
        assert!(matches!(report.runs[1].fit, RateFit::Algebraic { expected, .. } if expected == -2.0));
    }

    #[test]
    fn sync_difference_obeys_its_energy_relation() {
        let mut cfg = quick(ExperimentKind::Sync);
        cfg.damping = vec!["power:3".into()];
        let report = run_sync(&cfg).unwrap();
        let run = &report.runs[0];
        let refined = run.refined.as_ref().unwrap();
        assert!((refined.dt - 0.5 * run.base.dt).abs() < 1e-15);
        for w in run.base.trace.samples.windows(2) {
            let dt = w[1].t - w[0].t;
            assert!(w[1].dissipation >= 0.0);
            let relation = w[1].energy - w[0].energy + dt * w[1].dissipation;
            assert!(relation.abs() < 1e-9, "{relation}");
        }
        assert!(run.plateau_ratio().unwrap().is_finite());
    }

    #[test]
    fn converge_reports_one_row_per_mesh() {
        let mut cfg = ExperimentConfig::defaults(ExperimentKind::Converge);
        cfg.meshes = vec![2, 4, 8];
        cfg.t_final = 0.5;
        let report = run_converge(&cfg).unwrap();
        assert_eq!(report.rows.len(), 3);
        for (row, hist) in report.rows.iter().zip(&report.histories) {
            assert_eq!(hist.len(), row.steps + 1);
            assert!(row.max_velocity >= row.final_velocity);
        }
        assert!(report.order_velocity > 0.5, "{}", report.order_velocity);
    }

    #[test]
    fn envelope_table_starts_at_e0() {
        let report = run_envelope(&ExperimentConfig::defaults(ExperimentKind::Envelope)).unwrap();
        assert_eq!(report.table.len(), 1001);
        assert_eq!(report.table[0].1, 1.0);
        assert_eq!(report.table[0].2, 1.0);
        assert!(report.table.windows(2).all(|w| w[1].1 <= w[0].1 && w[1].2 <= w[0].2));
    }

    #[test]
    fn outputs_are_written() {
        let dir = std::env::temp_dir().join(format!("tidefem-exp-{}", std::process::id()));
        let mut cfg = ExperimentConfig::defaults(ExperimentKind::Envelope);
        cfg.samples = 11;
        let report = run(&cfg).unwrap();
        let written = report.write_outputs(&dir).unwrap();
        let names: Vec<String> = written
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        assert_eq!(names, ["envelope.csv", "summary.txt", "envelope.svg"]);
        let summary = fs::read_to_string(dir.join("summary.txt")).unwrap();
        assert!(summary.contains("asymptotic_exponent = -2"));
        let csv = fs::read_to_string(dir.join("envelope.csv")).unwrap();
        assert_eq!(csv.lines().count(), 12);
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn law_slugs_are_file_names() {
        assert_eq!(law_slug(&DampingLaw::power(3.0, 1.0).unwrap()), "power_3");
        assert_eq!(law_slug(&DampingLaw::power_linearized(2.5, 1.0).unwrap()), "power_lin_2.5");
    }
}
