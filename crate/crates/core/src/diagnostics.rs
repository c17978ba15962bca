//! Energy, error norms, energy traces and rate fitting.

use std::io::{BufRead, Write};

use crate::assembly::{ModelParams, Operators};
use crate::dense;
use crate::error::{Error, Result};
use crate::mesh::Point;
use crate::quadrature::TriangleRule;
use crate::space::{CellValues, FunctionSpacePair};
use crate::timestep::State;

/// `E = ½ uᵀ M u + (β/2ε²) ηᵀ M_W η`.
pub fn energy(state: &State, ops: &Operators, params: &ModelParams) -> f64 {
    let ku = dense::dot(&state.u, &ops.mass.mul_vec(&state.u));
    let pe = dense::dot(&state.eta, &ops.pressure_mass.mul_vec(&state.eta));
    0.5 * ku + 0.5 * params.pressure_scale() * pe
}

/// Energy by direct quadrature of the discrete fields, without assembled
/// matrices.
pub fn energy_by_quadrature(space: &FunctionSpacePair, params: &ModelParams, state: &State) -> f64 {
    let tab = space.tabulate(TriangleRule::with_degree(2 * space.order().index() + 4));
    let mut cv = CellValues::new(space, &tab);
    let mut kinetic = 0.0;
    let mut potential = 0.0;
    for cell in 0..space.mesh().num_cells() {
        cv.reinit(cell);
        for q in 0..cv.num_points() {
            let u = cv.velocity_at(&state.u, q);
            let eta = cv.pressure_at(&state.eta, q);
            let w = cv.weights[q];
            kinetic += w * (u[0] * u[0] + u[1] * u[1]) / params.depth.eval(cv.points[q]);
            potential += w * eta * eta;
        }
    }
    0.5 * kinetic + 0.5 * params.pressure_scale() * potential
}

/// `(‖u_h - u‖, ‖η_h - η‖)` in L2.
pub fn l2_errors<U, E>(space: &FunctionSpacePair, state: &State, exact_u: U, exact_eta: E) -> (f64, f64)
where
    U: Fn(Point) -> Point,
    E: Fn(Point) -> f64,
{
    let tab = space.tabulate(TriangleRule::with_degree(2 * space.order().index() + 6));
    let mut cv = CellValues::new(space, &tab);
    let (mut eu, mut ee) = (0.0, 0.0);
    for cell in 0..space.mesh().num_cells() {
        cv.reinit(cell);
        for q in 0..cv.num_points() {
            let p = cv.points[q];
            let uh = cv.velocity_at(&state.u, q);
            let u = exact_u(p);
            let d = [uh[0] - u[0], uh[1] - u[1]];
            let de = cv.pressure_at(&state.eta, q) - exact_eta(p);
            eu += cv.weights[q] * (d[0] * d[0] + d[1] * d[1]);
            ee += cv.weights[q] * de * de;
        }
    }
    (eu.sqrt(), ee.sqrt())
}

/// One row of an [`EnergyTrace`]. `dissipation` and `forcing_power` belong
/// to the step that ended at `t` (both are zero for the initial sample).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample {
    pub t: f64,
    pub energy: f64,
    pub dissipation: f64,
    pub forcing_power: f64,
}

/// Time series of the energy and the terms of the energy relation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnergyTrace {
    pub samples: Vec<TraceSample>,
    /// Free-form `(key, value)` pairs describing the run.
    pub metadata: Vec<(String, String)>,
}

pub const CSV_HEADER: &str = "t,E,dissipation,forcing_power";

impl EnergyTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, sample: TraceSample) -> Result<()> {
        if let Some(last) = self.samples.last() {
            if !(sample.t > last.t) {
                return Err(Error::MalformedTrace(format!(
                    "time {} does not increase past {}",
                    sample.t, last.t
                )));
            }
        }
        if !(sample.energy >= 0.0) {
            return Err(Error::MalformedTrace(format!(
                "negative or NaN energy {} at t = {}",
                sample.energy, sample.t
            )));
        }
        self.samples.push(sample);
        Ok(())
    }

    pub fn with_metadata(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.push((key.to_string(), value.to_string()));
        self
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.energy).collect()
    }

    pub fn final_energy(&self) -> Option<f64> {
        self.samples.last().map(|s| s.energy)
    }

    /// Largest `|E(t) - E(0)| / E(0)`.
    pub fn max_relative_drift(&self) -> f64 {
        let Some(first) = self.samples.first() else {
            return 0.0;
        };
        self.samples
            .iter()
            .map(|s| (s.energy - first.energy).abs() / first.energy)
            .fold(0.0, f64::max)
    }

    /// Samples with `lo <= t <= hi`.
    pub fn window(&self, lo: f64, hi: f64) -> impl Iterator<Item = &TraceSample> {
        self.samples.iter().filter(move |s| s.t >= lo && s.t <= hi)
    }

    /// CSV with header `t,E,dissipation,forcing_power`; values carry 18
    /// significant digits so they round-trip exactly.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for s in &self.samples {
            writeln!(
                out,
                "{:.17e},{:.17e},{:.17e},{:.17e}",
                s.t, s.energy, s.dissipation, s.forcing_power
            )?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::MalformedTrace("empty input".into()))??;
        if header.trim() != CSV_HEADER {
            return Err(Error::MalformedTrace(format!("unexpected header '{header}'")));
        }
        let mut trace = EnergyTrace::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<f64> = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::MalformedTrace(format!("line {}: {e}", i + 2)))?;
            let [t, energy, dissipation, forcing_power] = fields[..] else {
                return Err(Error::MalformedTrace(format!(
                    "line {}: expected 4 columns, found {}",
                    i + 2,
                    fields.len()
                )));
            };
            trace.push(TraceSample {
                t,
                energy,
                dissipation,
                forcing_power,
            })?;
        }
        Ok(trace)
    }
}

/// Fit window in time, optionally ignoring samples whose energy has fallen
/// to `floor` or below (e.g. a discretization plateau).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitWindow {
    pub lo: f64,
    pub hi: f64,
    pub floor: f64,
}

impl FitWindow {
    pub const MIN_SAMPLES: usize = 10;

    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi, floor: 0.0 }
    }

    pub fn above(mut self, floor: f64) -> Self {
        self.floor = floor;
        self
    }

    fn select<'a>(&self, trace: &'a EnergyTrace) -> Result<Vec<&'a TraceSample>> {
        let picked: Vec<_> = trace
            .window(self.lo, self.hi)
            .filter(|s| s.energy > self.floor && s.energy > 0.0)
            .collect();
        if picked.len() < Self::MIN_SAMPLES {
            return Err(Error::FitWindowTooShort {
                lo: self.lo,
                hi: self.hi,
                count: picked.len(),
                needed: Self::MIN_SAMPLES,
            });
        }
        Ok(picked)
    }
}

/// Least-squares line `y = slope x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub samples: usize,
}

pub fn least_squares(xs: &[f64], ys: &[f64]) -> LineFit {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    LineFit {
        slope,
        intercept,
        r_squared,
        samples: xs.len(),
    }
}

/// Slope of `log E` against `log t` (algebraic decay `E ~ t^slope`).
pub fn fit_decay_exponent(trace: &EnergyTrace, window: FitWindow) -> Result<LineFit> {
    let picked = window.select(trace)?;
    if picked.iter().any(|s| s.t <= 0.0) {
        return Err(Error::InvalidDecayInput("log-log fit needs t > 0".into()));
    }
    let xs: Vec<f64> = picked.iter().map(|s| s.t.ln()).collect();
    let ys: Vec<f64> = picked.iter().map(|s| s.energy.ln()).collect();
    Ok(least_squares(&xs, &ys))
}

/// Slope of `log E` against `t` (exponential decay `E ~ e^{slope t}`).
pub fn fit_exponential_rate(trace: &EnergyTrace, window: FitWindow) -> Result<LineFit> {
    let picked = window.select(trace)?;
    let xs: Vec<f64> = picked.iter().map(|s| s.t).collect();
    let ys: Vec<f64> = picked.iter().map(|s| s.energy.ln()).collect();
    Ok(least_squares(&xs, &ys))
}

/// Power law with an unknown time origin, `E ≈ A (t + shift)^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftedPowerFit {
    pub exponent: f64,
    pub shift: f64,
    pub r_squared: f64,
    /// Plain log-log slope over the same samples (`shift = 0`).
    pub unshifted_exponent: f64,
    pub samples: usize,
}

/// Fit `log E = κ log(t + s) + c` with `0 <= s <= max_shift`, choosing `s`
/// by least squares.
///
/// The decay envelopes are rational functions of a shifted time, so a
/// start-up period biases the plain log-log slope towards zero. Fitting the
/// origin removes that bias without assuming the exponent.
pub fn fit_shifted_power_law(trace: &EnergyTrace, window: FitWindow, max_shift: f64) -> Result<ShiftedPowerFit> {
    let picked = window.select(trace)?;
    if picked.iter().any(|s| s.t <= 0.0) {
        return Err(Error::InvalidDecayInput("log-log fit needs t > 0".into()));
    }
    if !(max_shift >= 0.0 && max_shift.is_finite()) {
        return Err(Error::InvalidDecayInput(format!("max_shift must be finite and >= 0, got {max_shift}")));
    }
    let ys: Vec<f64> = picked.iter().map(|s| s.energy.ln()).collect();
    let fit_at = |shift: f64| {
        let xs: Vec<f64> = picked.iter().map(|s| (s.t + shift).ln()).collect();
        let fit = least_squares(&xs, &ys);
        let ssr: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (y - fit.slope * x - fit.intercept).powi(2))
            .sum();
        (ssr, fit)
    };
    let unshifted = fit_at(0.0).1;

    // coarse scan (the misfit need not be unimodal), then golden section
    const GRID: usize = 400;
    let grid: Vec<f64> = (0..=GRID).map(|i| max_shift * i as f64 / GRID as f64).collect();
    let ssr: Vec<f64> = grid.iter().map(|&s| fit_at(s).0).collect();
    let best = (0..=GRID).min_by(|&a, &b| ssr[a].total_cmp(&ssr[b])).unwrap();
    let (mut a, mut b) = (grid[best.saturating_sub(1)], grid[(best + 1).min(GRID)]);
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        if b - a <= 1e-10 * (1.0 + b) {
            break;
        }
        let c = b - ratio * (b - a);
        let d = a + ratio * (b - a);
        if fit_at(c).0 <= fit_at(d).0 {
            b = d;
        } else {
            a = c;
        }
    }
    let mut shift = 0.5 * (a + b);
    if fit_at(grid[best]).0 < fit_at(shift).0 {
        shift = grid[best];
    }
    let fit = fit_at(shift).1;
    Ok(ShiftedPowerFit {
        exponent: fit.slope,
        shift,
        r_squared: fit.r_squared,
        unshifted_exponent: unshifted.slope,
        samples: fit.samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::Field;
    use crate::mesh::Mesh;
    use crate::space::Order;
    use crate::timestep::{mms_initial_state, random_initial_state};
    use crate::assembly::ManufacturedSolution;
    use std::sync::Arc;

    fn synthetic(f: impl Fn(f64) -> f64) -> EnergyTrace {
        let mut t = EnergyTrace::new();
        for i in 1..=200 {
            let time = i as f64 * 0.5;
            t.push(TraceSample {
                t: time,
                energy: f(time),
                dissipation: 0.0,
                forcing_power: 0.0,
            })
            .unwrap();
        }
        t
    }

    #[test]
    fn exact_power_law_fit() {
        let fit = fit_decay_exponent(&synthetic(|t| t.powi(-2)), FitWindow::new(20.0, 80.0)).unwrap();
        assert!((fit.slope + 2.0).abs() < 1e-6);
        assert!(fit.r_squared > 1.0 - 1e-12);
    }

    #[test]
    fn exact_exponential_fit() {
        let fit = fit_exponential_rate(&synthetic(|t| 5.0 * (-3.0 * t).exp()), FitWindow::new(1.0, 10.0)).unwrap();
        assert!((fit.slope + 3.0).abs() < 1e-6);
    }

    #[test]
    fn short_windows_and_floors() {
        let trace = synthetic(|t| 1.0 / t);
        assert!(matches!(
            fit_decay_exponent(&trace, FitWindow::new(20.0, 22.0)),
            Err(Error::FitWindowTooShort { count: 5, .. })
        ));
        assert!(fit_decay_exponent(&trace, FitWindow::new(20.0, 80.0).above(0.045)).is_err());
        let fit = fit_decay_exponent(&trace, FitWindow::new(20.0, 80.0).above(0.02)).unwrap();
        assert_eq!(fit.samples, 60);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let mut trace = synthetic(|t| (1.0 / 3.0) * (-t / 7.0).exp());
        trace.samples[3].dissipation = std::f64::consts::PI;
        trace.samples[4].forcing_power = -1e-300;
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,E,dissipation,forcing_power\n"));
        let back = EnergyTrace::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.samples, trace.samples);
        let w = FitWindow::new(10.0, 90.0);
        assert_eq!(
            fit_exponential_rate(&back, w).unwrap(),
            fit_exponential_rate(&trace, w).unwrap()
        );
    }

    #[test]
    fn malformed_csv_is_rejected() {
        assert!(EnergyTrace::read_csv("t,E\n".as_bytes()).is_err());
        assert!(EnergyTrace::read_csv("t,E,dissipation,forcing_power\n1,2,3\n".as_bytes()).is_err());
        assert!(EnergyTrace::read_csv("t,E,dissipation,forcing_power\n1,x,3,4\n".as_bytes()).is_err());
        assert!(EnergyTrace::read_csv("t,E,dissipation,forcing_power\n2,1,0,0\n1,1,0,0\n".as_bytes()).is_err());
    }

    fn space(n: usize, k: usize) -> Arc<FunctionSpacePair> {
        Arc::new(FunctionSpacePair::new(
            Arc::new(Mesh::unit_square(n).unwrap()),
            Order::from_index(k).unwrap(),
        ))
    }

    #[test]
    fn energy_two_ways() {
        let params = ModelParams {
            depth: Field::function(|p| 1.0 + 0.5 * p[0] * p[1], 1.0, 1.5),
            epsilon: 0.1,
            beta: 0.1,
            ..ModelParams::unit()
        };
        for k in [1, 2] {
            let s = space(3, k);
            let ops = Operators::assemble(&s, &params);
            let state = random_initial_state(&s, &params, &ops, 17);
            let a = energy(&state, &ops, &params);
            let b = energy_by_quadrature(&s, &params, &state);
            // H is a polynomial of degree 2; 1/H is integrated approximately
            // by both routes at different degrees
            assert!((a - b).abs() < 1e-5, "k={k}: {a} vs {b}");
        }
        let unit = ModelParams::unit();
        for k in [1, 2] {
            let s = space(3, k);
            let ops = Operators::assemble(&s, &unit);
            let state = random_initial_state(&s, &unit, &ops, 2);
            assert!((energy(&state, &ops, &unit) - energy_by_quadrature(&s, &unit, &state)).abs() < 1e-12);
        }
    }

    #[test]
    fn errors_vanish_in_space_and_converge_otherwise() {
        let s = space(4, 2);
        let state = State {
            t: 0.0,
            u: s.interpolate_hdiv(|p| [p[0] + 2.0 * p[1], 1.0 - p[0]]),
            eta: s.project_pressure(|p| 1.0 + p[0] - 3.0 * p[1]),
        };
        let (eu, ee) = l2_errors(&s, &state, |p| [p[0] + 2.0 * p[1], 1.0 - p[0]], |p| 1.0 + p[0] - 3.0 * p[1]);
        assert!(eu < 1e-12 && ee < 1e-12);

        let exact = ManufacturedSolution;
        for k in [1, 2] {
            let errs: Vec<(f64, f64)> = [8, 16]
                .iter()
                .map(|&n| {
                    let s = space(n, k);
                    let st = mms_initial_state(&s, 0.0);
                    l2_errors(&s, &st, |p| exact.velocity(p, 0.0), |p| exact.elevation(p, 0.0))
                })
                .collect();
            let ru = (errs[0].0 / errs[1].0).log2();
            let re = (errs[0].1 / errs[1].1).log2();
            assert!((ru - k as f64).abs() < 0.15, "k={k} u order {ru}");
            assert!((re - k as f64).abs() < 0.15, "k={k} eta order {re}");
        }
    }

    #[test]
    fn zero_state_has_zero_energy() {
        let s = space(2, 1);
        let params = ModelParams::unit();
        let ops = Operators::assemble(&s, &params);
        assert_eq!(energy(&State::zero(&s), &ops, &params), 0.0);
    }

    #[test]
    fn drift_measure() {
        let mut t = EnergyTrace::new();
        for (i, e) in [2.0, 2.0 + 1e-9, 2.0 - 3e-9].iter().enumerate() {
            t.push(TraceSample {
                t: i as f64,
                energy: *e,
                dissipation: 0.0,
                forcing_power: 0.0,
            })
            .unwrap();
        }
        assert!((t.max_relative_drift() - 1.5e-9).abs() < 1e-15);
        assert!(t.push(TraceSample { t: 5.0, energy: -1.0, dissipation: 0.0, forcing_power: 0.0 }).is_err());
    }

    #[test]
    fn shifted_fit_recovers_origin_and_exponent() {
        let trace = synthetic(|t| 3.0 * (t + 25.0).powf(-2.0));
        let fit = fit_shifted_power_law(&trace, FitWindow::new(20.0, 80.0), 200.0).unwrap();
        assert!((fit.exponent + 2.0).abs() < 1e-6, "{fit:?}");
        assert!((fit.shift - 25.0).abs() < 1e-4, "{fit:?}");
        // the plain slope is biased towards zero
        assert!(fit.unshifted_exponent > -1.6);
    }

    #[test]
    fn shifted_fit_without_shift_matches_plain_fit() {
        let trace = synthetic(|t| 0.5 * t.powf(-1.0));
        let fit = fit_shifted_power_law(&trace, FitWindow::new(20.0, 80.0), 50.0).unwrap();
        assert!(fit.shift < 1e-6);
        assert!((fit.exponent + 1.0).abs() < 1e-9);
        assert!((fit.unshifted_exponent + 1.0).abs() < 1e-12);
    }

    #[test]
    fn shifted_fit_rejects_negative_range() {
        let trace = synthetic(|t| t.powf(-1.0));
        assert!(fit_shifted_power_law(&trace, FitWindow::new(20.0, 80.0), -1.0).is_err());
    }
}
