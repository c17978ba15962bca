//! Experiment configuration as flat `key = value` text.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::assembly::{Field, ModelParams};
use crate::damping::DampingLaw;
use crate::error::{Error, Result};
use crate::linsolve::LinearSolverKind;
use crate::space::Order;
use crate::timestep::SolverConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    /// Unforced energy decay from a random state.
    Damping,
    /// Difference energy of two forced runs from different random states.
    Sync,
    /// Manufactured-solution error against mesh size.
    Converge,
    /// Closed-form decay envelope.
    Envelope,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Damping => "damping",
            Self::Sync => "sync",
            Self::Converge => "converge",
            Self::Envelope => "envelope",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "damping" => Ok(Self::Damping),
            "sync" => Ok(Self::Sync),
            "converge" => Ok(Self::Converge),
            "envelope" => Ok(Self::Envelope),
            other => Err(Error::Config(format!("unknown experiment '{other}'"))),
        }
    }
}

/// Everything an experiment run needs. Unused keys are carried along so
/// one file can serve several experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Cells per side of the unit square.
    pub n: usize,
    /// Raviart-Thomas order, 1 or 2.
    pub order: usize,
    /// `dt = dt_factor · h` unless `dt` is given.
    pub dt_factor: f64,
    pub dt: Option<f64>,
    pub t_final: f64,
    pub epsilon: f64,
    pub beta: f64,
    pub coriolis: f64,
    pub depth: f64,
    /// Damping law strings, e.g. `linear`, `power:3`.
    pub damping: Vec<String>,
    pub coeff: f64,
    pub seeds: Vec<u64>,
    pub fit_lo: f64,
    pub fit_hi: f64,
    /// Samples with energy at or below this are left out of rate fits.
    pub fit_floor: f64,
    /// Largest time-origin shift tried by the power-law fit.
    pub max_shift: f64,
    /// Start of the window averaged for the sync plateau.
    pub plateau_from: Option<f64>,
    /// Repeat sync runs with `dt/2` to measure how the plateau scales.
    pub refine_dt: bool,
    pub meshes: Vec<usize>,
    pub poincare: f64,
    pub e0: f64,
    /// Points in the envelope table.
    pub samples: usize,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub linear_solver: LinearSolverKind,
    pub output: Option<PathBuf>,
    pub plot: bool,
}

pub const KEYS: &[&str] = &[
    "n",
    "order",
    "dt",
    "dt_factor",
    "t_final",
    "epsilon",
    "beta",
    "coriolis",
    "depth",
    "damping",
    "coeff",
    "seeds",
    "fit_lo",
    "fit_hi",
    "fit_floor",
    "max_shift",
    "plateau_from",
    "refine_dt",
    "meshes",
    "poincare",
    "e0",
    "samples",
    "newton_tol",
    "newton_max_iter",
    "linear_solver",
    "output",
    "plot",
];

impl ExperimentConfig {
    /// Defaults of the given experiment.
    pub fn defaults(kind: ExperimentKind) -> Self {
        let mut cfg = Self {
            kind,
            n: 20,
            order: 1,
            dt_factor: 0.5,
            dt: None,
            t_final: 100.0,
            epsilon: 0.1,
            beta: 0.1,
            coriolis: 0.0,
            depth: 1.0,
            damping: vec!["linear".into(), "power:3".into(), "power:4".into()],
            coeff: 10.0,
            seeds: vec![1],
            fit_lo: 20.0,
            fit_hi: 80.0,
            fit_floor: 1e-6,
            max_shift: 100.0,
            plateau_from: None,
            refine_dt: false,
            meshes: vec![4, 8, 16, 32],
            poincare: std::f64::consts::FRAC_1_PI,
            e0: 1.0,
            samples: 1001,
            newton_tol: 1e-10,
            newton_max_iter: 50,
            linear_solver: LinearSolverKind::Direct,
            output: None,
            plot: true,
        };
        match kind {
            ExperimentKind::Damping => {}
            ExperimentKind::Sync => {
                cfg.seeds = vec![1, 2];
                cfg.refine_dt = true;
            }
            ExperimentKind::Converge => {
                cfg.t_final = 10.0;
                cfg.epsilon = 1.0;
                cfg.beta = 1.0;
                cfg.damping = vec!["linear".into()];
                cfg.coeff = 1.0;
            }
            ExperimentKind::Envelope => {
                cfg.damping = vec!["power_lin:3".into()];
            }
        }
        cfg
    }

    /// Defaults overridden by the pairs in `text`.
    pub fn from_text(kind: ExperimentKind, text: &str) -> Result<Self> {
        let mut cfg = Self::defaults(kind);
        for (key, value) in parse_pairs(text)? {
            cfg.set(&key, &value)?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "n" => self.n = parse(key, value)?,
            "order" => self.order = parse(key, value)?,
            "dt" => self.dt = parse_optional(key, value)?,
            "dt_factor" => self.dt_factor = parse(key, value)?,
            "t_final" => self.t_final = parse(key, value)?,
            "epsilon" => self.epsilon = parse(key, value)?,
            "beta" => self.beta = parse(key, value)?,
            "coriolis" => self.coriolis = parse(key, value)?,
            "depth" => self.depth = parse(key, value)?,
            "damping" => self.damping = split_list(value).map(String::from).collect(),
            "coeff" => self.coeff = parse(key, value)?,
            "seeds" => self.seeds = parse_list(key, value)?,
            "fit_lo" => self.fit_lo = parse(key, value)?,
            "fit_hi" => self.fit_hi = parse(key, value)?,
            "fit_floor" => self.fit_floor = parse(key, value)?,
            "max_shift" => self.max_shift = parse(key, value)?,
            "plateau_from" => self.plateau_from = parse_optional(key, value)?,
            "refine_dt" => self.refine_dt = parse(key, value)?,
            "meshes" => self.meshes = parse_list(key, value)?,
            "poincare" => self.poincare = parse(key, value)?,
            "e0" => self.e0 = parse(key, value)?,
            "samples" => self.samples = parse(key, value)?,
            "newton_tol" => self.newton_tol = parse(key, value)?,
            "newton_max_iter" => self.newton_max_iter = parse(key, value)?,
            "linear_solver" => self.linear_solver = value.parse()?,
            "output" => self.output = (!value.is_empty()).then(|| PathBuf::from(value)),
            "plot" => self.plot = parse(key, value)?,
            other => {
                return Err(Error::Config(format!(
                    "unknown key '{other}' (known keys: {})",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Checks everything the chosen experiment will use.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        Order::from_index(self.order)?;
        self.model_params()?;
        self.laws()?;
        if self.damping.is_empty() {
            return bad("at least one damping law is required".into());
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return bad(format!("t_final must be positive, got {}", self.t_final));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return bad(format!("dt must be positive, got {dt}"));
            }
        }
        if !(self.dt_factor > 0.0 && self.dt_factor.is_finite()) {
            return bad(format!("dt_factor must be positive, got {}", self.dt_factor));
        }
        self.solver_config(self.dt.unwrap_or(1.0))?;
        match self.kind {
            ExperimentKind::Damping | ExperimentKind::Sync => {
                if self.n == 0 {
                    return bad("n must be at least 1".into());
                }
                if !(self.fit_lo < self.fit_hi) {
                    return bad(format!("fit window [{}, {}] is empty", self.fit_lo, self.fit_hi));
                }
                if !(self.max_shift >= 0.0 && self.max_shift.is_finite()) {
                    return bad(format!("max_shift must be >= 0, got {}", self.max_shift));
                }
                let needed = if self.kind == ExperimentKind::Sync { 2 } else { 1 };
                if self.seeds.len() != needed {
                    return bad(format!(
                        "{} needs exactly {needed} seed(s), got {}",
                        self.kind,
                        self.seeds.len()
                    ));
                }
                if let Some(p) = self.plateau_from {
                    if !(p < self.t_final) {
                        return bad(format!("plateau_from = {p} is not before t_final"));
                    }
                }
            }
            ExperimentKind::Converge => {
                if self.meshes.len() < 3 {
                    return bad(format!("converge needs at least 3 meshes, got {}", self.meshes.len()));
                }
                if self.meshes.contains(&0) {
                    return bad("mesh sizes must be at least 1".into());
                }
                if self.damping.len() != 1 {
                    return bad("converge takes a single damping law".into());
                }
            }
            ExperimentKind::Envelope => {
                if self.samples < 2 {
                    return bad("envelope needs at least 2 samples".into());
                }
                if !(self.poincare > 0.0) || !(self.e0 >= 0.0) {
                    return bad("poincare must be positive and e0 non-negative".into());
                }
            }
        }
        Ok(())
    }

    pub fn laws(&self) -> Result<Vec<DampingLaw>> {
        self.damping
            .iter()
            .map(|law| DampingLaw::parse(law, self.coeff))
            .collect()
    }

    /// Constant-coefficient model with the given damping law.
    pub fn model_params_with(&self, law: DampingLaw) -> Result<ModelParams> {
        ModelParams::new(
            Field::constant(self.coriolis),
            self.epsilon,
            self.beta,
            Field::constant(self.depth),
            law,
        )
    }

    fn model_params(&self) -> Result<ModelParams> {
        self.model_params_with(DampingLaw::none())
    }

    pub fn solver_config(&self, dt: f64) -> Result<SolverConfig> {
        let cfg = SolverConfig {
            newton_tol: self.newton_tol,
            newton_max_iter: self.newton_max_iter,
            linear_solver: self.linear_solver,
            ..SolverConfig::with_dt(dt)
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Time step on a mesh with `n` cells per side.
    pub fn dt_for(&self, n: usize) -> f64 {
        self.dt.unwrap_or(self.dt_factor / n as f64)
    }

    pub fn plateau_start(&self) -> f64 {
        self.plateau_from.unwrap_or(0.9 * self.t_final)
    }

    /// The configuration as `key = value` lines, readable by [`Self::from_text`].
    pub fn to_text(&self) -> String {
        let list = |v: &[String]| v.join(",");
        let nums = |v: &[u64]| v.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let solver = match self.linear_solver {
            LinearSolverKind::Direct => "direct",
            LinearSolverKind::ConjugateGradient => "cg",
        };
        let meshes: Vec<u64> = self.meshes.iter().map(|&m| m as u64).collect();
        let lines = [
            ("n", self.n.to_string()),
            ("order", self.order.to_string()),
            ("dt", opt(self.dt)),
            ("dt_factor", self.dt_factor.to_string()),
            ("t_final", self.t_final.to_string()),
            ("epsilon", self.epsilon.to_string()),
            ("beta", self.beta.to_string()),
            ("coriolis", self.coriolis.to_string()),
            ("depth", self.depth.to_string()),
            ("damping", list(&self.damping)),
            ("coeff", self.coeff.to_string()),
            ("seeds", nums(&self.seeds)),
            ("fit_lo", self.fit_lo.to_string()),
            ("fit_hi", self.fit_hi.to_string()),
            ("fit_floor", self.fit_floor.to_string()),
            ("max_shift", self.max_shift.to_string()),
            ("plateau_from", opt(self.plateau_from)),
            ("refine_dt", self.refine_dt.to_string()),
            ("meshes", nums(&meshes)),
            ("poincare", self.poincare.to_string()),
            ("e0", self.e0.to_string()),
            ("samples", self.samples.to_string()),
            ("newton_tol", self.newton_tol.to_string()),
            ("newton_max_iter", self.newton_max_iter.to_string()),
            ("linear_solver", solver.to_string()),
            (
                "output",
                self.output.as_ref().map(|p| p.display().to_string()).unwrap_or_default(),
            ),
            ("plot", self.plot.to_string()),
        ];
        lines.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

/// Splits `key = value` lines. Blank lines and `#` comments are skipped.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value, got '{line}'", i + 1)))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", i + 1)));
        }
        pairs.push((key.to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::Config(format!("bad value '{value}' for {key}: {e}")))
}

fn parse_optional(key: &str, value: &str) -> Result<Option<f64>> {
    if value.is_empty() || value == "auto" {
        Ok(None)
    } else {
        parse(key, value).map(Some)
    }
}

fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    split_list(value).map(|v| parse(key, v)).collect()
}
