//! Theoretical energy-decay envelopes.
//!
//! For a damping law growing linearly at infinity and an increasing concave
//! `J(s) = c0 s^α`, the energy of the unforced problem satisfies
//! `E(t) <= S(t/T - 1)` for `t >= T`, where `S` solves
//!
//! ```text
//! S' + |Σ| J⁻¹(S / D_J) = 0,   S(0) = E(0).
//! ```
//!
//! With the power form of `J` this is `S' + γ S^m = 0` with
//! `γ = |Σ| (D_J c0)^{-1/α}` and `m = 1/α`, solved in closed form.

use crate::damping::{DampingKind, DampingLaw, DecayClass};
use crate::error::{Error, Result};

/// `J(s) = c0 s^α`, concave and increasing for `0 < α <= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JFunction {
    pub alpha: f64,
    pub c0: f64,
}

impl JFunction {
    pub fn new(alpha: f64, c0: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) || !(c0 > 0.0 && c0.is_finite()) {
            return Err(Error::InvalidDecayInput(format!(
                "J needs 0 < alpha <= 1 and c0 > 0, got alpha = {alpha}, c0 = {c0}"
            )));
        }
        Ok(Self { alpha, c0 })
    }

    /// `J(s) = scale · 2^{3-4/p} s^{2/p}` for a superlinear exponent `p > 2`.
    pub fn superlinear(p: f64, scale: f64) -> Result<Self> {
        if !(p > 2.0) {
            return Err(Error::InvalidDecayInput(format!(
                "superlinear branch needs p > 2, got {p}; use the sublinear branch"
            )));
        }
        Self::new(2.0 / p, scale * 2f64.powf(3.0 - 4.0 / p))
    }

    /// Sublinear exponent `1 < p < 2`: the superlinear form with the
    /// conjugate exponent `q = p/(p-1)`.
    pub fn sublinear(p: f64, scale: f64) -> Result<Self> {
        if !(p > 1.0 && p < 2.0) {
            return Err(Error::InvalidDecayInput(format!(
                "sublinear branch needs 1 < p < 2, got {p}"
            )));
        }
        Self::superlinear(p / (p - 1.0), scale)
    }

    /// `J(s) = c0 s`.
    pub fn linear(c0: f64) -> Result<Self> {
        Self::new(1.0, c0)
    }

    /// The `J` carried by a law's structural constants.
    pub fn for_law(law: &DampingLaw) -> Result<Self> {
        let sc = law.structural_constants()?;
        Self::new(sc.alpha, sc.c0)
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.c0 * s.powf(self.alpha)
    }

    pub fn inverse(&self, y: f64) -> f64 {
        (y / self.c0).powf(1.0 / self.alpha)
    }
}

/// Inputs of the decay theorem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayInputs {
    /// Poincaré-Friedrichs constant `C_P`.
    pub poincare: f64,
    pub depth_min: f64,
    pub depth_max: f64,
    /// `f^* = max |f|`.
    pub coriolis_max: f64,
    pub beta: f64,
    pub epsilon: f64,
    /// Linear-growth constant `M` of the damping law.
    pub growth: f64,
    pub e0: f64,
    pub domain_area: f64,
}

impl DecayInputs {
    fn validate(&self) -> Result<()> {
        let checks = [
            ("C_P", self.poincare),
            ("H_*", self.depth_min),
            ("H^*", self.depth_max),
            ("beta", self.beta),
            ("epsilon", self.epsilon),
            ("M", self.growth),
            ("|Omega|", self.domain_area),
        ];
        for (name, v) in checks {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidDecayInput(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.coriolis_max >= 0.0) {
            return Err(Error::InvalidDecayInput("f^* must be non-negative".into()));
        }
        if !(self.e0 >= 0.0 && self.e0.is_finite()) {
            return Err(Error::InvalidDecayInput(format!("E0 must be non-negative, got {}", self.e0)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayConstants {
    /// Absorption period `T`.
    pub period: f64,
    /// `|Σ| = |Ω| T`.
    pub sigma: f64,
    pub d1: f64,
    pub d2: f64,
    pub d1_tilde: f64,
    /// `D_J`; zero when `E0 = 0`.
    pub d_j: f64,
    pub inputs: DecayInputs,
}

pub fn build_constants(inputs: DecayInputs, j: &JFunction) -> Result<DecayConstants> {
    inputs.validate()?;
    let DecayInputs {
        poincare: cp,
        depth_min: h_lo,
        depth_max: h_hi,
        coriolis_max: f_star,
        beta,
        epsilon,
        growth: m,
        e0,
        domain_area,
    } = inputs;
    let period = 2.0 * cp * beta.sqrt() / (epsilon * h_lo.sqrt());
    let sigma = domain_area * period;
    let inner = 1.5 + f_star * cp * cp / (beta * h_lo);
    let tail = cp * cp * h_hi * epsilon * epsilon / (beta * h_lo);
    let d1 = 2.0 * m * inner / h_lo + 2.0 * m * tail;
    let d2 = 2.0 * inner / h_lo + 2.0 * tail;
    let d1_tilde = period + d1;
    let d_j = if e0 == 0.0 {
        0.0
    } else {
        (1.0 + d1_tilde) * e0 / j.eval(e0 / sigma) + d2 * sigma
    };
    Ok(DecayConstants {
        period,
        sigma,
        d1,
        d2,
        d1_tilde,
        d_j,
        inputs,
    })
}

/// Closed-form solution of `S' + γ S^m = 0`, `S(0) = E0`, and the resulting
/// bound `E(t) <= S(t/T - 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    pub e0: f64,
    pub gamma: f64,
    pub m: f64,
    pub period: f64,
}

impl Envelope {
    pub fn new(constants: &DecayConstants, j: &JFunction) -> Self {
        let e0 = constants.inputs.e0;
        let gamma = if e0 == 0.0 {
            0.0
        } else {
            constants.sigma / (constants.d_j * j.c0).powf(1.0 / j.alpha)
        };
        Self {
            e0,
            gamma,
            m: 1.0 / j.alpha,
            period: constants.period,
        }
    }

    /// Envelope with explicit coefficients, bypassing the theorem constants.
    pub fn from_coefficients(e0: f64, gamma: f64, m: f64, period: f64) -> Result<Self> {
        if !(e0 >= 0.0) || !(gamma >= 0.0) || !(m >= 1.0) || !(period >= 0.0) {
            return Err(Error::InvalidDecayInput(format!(
                "need E0 >= 0, gamma >= 0, m >= 1, T >= 0 (got {e0}, {gamma}, {m}, {period})"
            )));
        }
        Ok(Self {
            e0,
            gamma,
            m,
            period,
        })
    }

    /// `S(τ)`.
    pub fn s(&self, tau: f64) -> f64 {
        if self.e0 == 0.0 {
            return 0.0;
        }
        if self.m == 1.0 {
            return self.e0 * (-self.gamma * tau).exp();
        }
        let one_minus_m = 1.0 - self.m;
        (self.e0.powf(one_minus_m) + (self.m - 1.0) * self.gamma * tau).powf(1.0 / one_minus_m)
    }

    /// `S'(τ) = -γ S(τ)^m`.
    pub fn ds(&self, tau: f64) -> f64 {
        -self.gamma * self.s(tau).powf(self.m)
    }

    /// Upper bound on `E(t)`: `E0` before the absorption period, then
    /// `S(t/T - 1)`. A zero period gives `S(t)` itself.
    pub fn bound(&self, t: f64) -> f64 {
        if self.period == 0.0 {
            self.s(t)
        } else if t < self.period {
            self.e0
        } else {
            self.s(t / self.period - 1.0)
        }
    }

    /// Large-time exponent of `S`, or `None` for exponential decay.
    pub fn asymptotic_exponent(&self) -> Option<f64> {
        (self.m != 1.0).then(|| 1.0 / (1.0 - self.m))
    }
}

/// `-2/(p-2)` for superlinear power laws; the conjugate exponent is used
/// for sublinear ones. Linear laws have no algebraic exponent.
pub fn asymptotic_exponent(law: &DampingLaw) -> Result<f64> {
    let p = match law.kind() {
        DampingKind::Power { p } | DampingKind::PowerLinearized { p } => p,
        DampingKind::Linear => {
            return Err(Error::InvalidDecayInput(
                "linear damping decays exponentially; there is no algebraic exponent".into(),
            ))
        }
        DampingKind::None => return Err(Error::InvalidDecayInput("g = 0 does not decay".into())),
    };
    match crate::damping::decay_class_for_exponent(p) {
        DecayClass::Algebraic { exponent } => Ok(exponent),
        DecayClass::Exponential => Err(Error::InvalidDecayInput(
            "p = 2 is linear damping; decay is exponential".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_inputs() -> DecayInputs {
        DecayInputs {
            poincare: 1.0,
            depth_min: 1.0,
            depth_max: 1.0,
            coriolis_max: 1.0,
            beta: 1.0,
            epsilon: 1.0,
            growth: 1.0,
            e0: 1.0,
            domain_area: 1.0,
        }
    }

    #[test]
    fn period_with_equal_burger_and_rossby() {
        let inputs = DecayInputs {
            poincare: 0.7,
            beta: 0.1,
            epsilon: 0.1,
            coriolis_max: 0.0,
            ..unit_inputs()
        };
        let j = JFunction::superlinear(3.0, 1.0).unwrap();
        let c = build_constants(inputs, &j).unwrap();
        // with β = ε the period is 2 C_P / sqrt(β), which is 2 C_P only at β = 1
        assert!((c.period - 2.0 * 0.7 * 0.1f64.sqrt() / 0.1).abs() < 1e-14);
        let unit = build_constants(DecayInputs { poincare: 0.7, ..unit_inputs() }, &j).unwrap();
        assert!((unit.period - 1.4).abs() < 1e-15);
        assert!((unit.sigma - 1.4).abs() < 1e-15);
    }

    #[test]
    fn d1_is_linear_in_growth_constant() {
        let j = JFunction::superlinear(4.0, 1.0).unwrap();
        let a = build_constants(unit_inputs(), &j).unwrap();
        let b = build_constants(DecayInputs { growth: 3.0, ..unit_inputs() }, &j).unwrap();
        assert!((b.d1 - 3.0 * a.d1).abs() < 1e-13);
        assert_eq!(a.d2, b.d2);
        assert!((a.d1_tilde - a.period - a.d1).abs() < 1e-15);
    }

    #[test]
    fn all_unit_inputs_regression() {
        // T = 2, |Σ| = 2, D1 = D2 = 2 (3/2 + 1) + 2 = 7, D̃1 = 9,
        // J(s) = 4 s^{1/2}, D_J = 10 / J(1/2) + 14 = 10 / (2 sqrt 2) + 14
        let j = JFunction::superlinear(4.0, 1.0).unwrap();
        let c = build_constants(unit_inputs(), &j).unwrap();
        assert_eq!(c.period, 2.0);
        assert_eq!(c.d1, 7.0);
        assert_eq!(c.d2, 7.0);
        assert_eq!(c.d1_tilde, 9.0);
        let expected = 10.0 / (2.0 * 2f64.sqrt()) + 14.0;
        assert!((c.d_j - expected).abs() < 1e-13);
        assert!(c.d_j > 0.0);
    }

    #[test]
    fn zero_energy_short_circuits() {
        let j = JFunction::superlinear(3.0, 1.0).unwrap();
        let c = build_constants(DecayInputs { e0: 0.0, ..unit_inputs() }, &j).unwrap();
        let env = Envelope::new(&c, &j);
        assert_eq!(env.bound(10.0), 0.0);
    }

    #[test]
    fn cubic_with_unit_gamma() {
        let env = Envelope::from_coefficients(1.0, 1.0, 2.0, 1.0).unwrap();
        for t in [0.0, 0.5, 1.0, 7.0] {
            assert!((env.s(t) - 1.0 / (1.0 + t)).abs() < 1e-15);
        }
        assert_eq!(env.s(1.0), 0.5);
    }

    #[test]
    fn gamma_of_power_law_matches_displayed_coefficient() {
        for p in [3.0, 4.0] {
            let j = JFunction::superlinear(p, 1.0).unwrap();
            let c = build_constants(unit_inputs(), &j).unwrap();
            let env = Envelope::new(&c, &j);
            let displayed = 2f64.powf(2.0 - 1.5 * p) * c.sigma / c.d_j.powf(p / 2.0);
            assert!((env.gamma - displayed).abs() < 1e-14 * displayed);
            assert_eq!(env.m, p / 2.0);
        }
    }

    #[test]
    fn no_dissipation_keeps_energy() {
        let env = Envelope::from_coefficients(2.5, 0.0, 1.5, 1.0).unwrap();
        assert_eq!(env.s(100.0), 2.5);
    }

    #[test]
    fn envelope_is_continuous_and_nonincreasing() {
        let j = JFunction::superlinear(3.0, 1.0).unwrap();
        let c = build_constants(unit_inputs(), &j).unwrap();
        let env = Envelope::new(&c, &j);
        let t = c.period;
        assert!((env.bound(t - 1e-12) - env.bound(t)).abs() < 1e-10);
        let mut prev = f64::INFINITY;
        for i in 0..1000 {
            let b = env.bound(i as f64 * 0.05);
            assert!(b <= prev);
            prev = b;
        }
    }

    #[test]
    fn asymptotic_exponents() {
        assert_eq!(asymptotic_exponent(&DampingLaw::power(3.0, 10.0).unwrap()).unwrap(), -2.0);
        assert_eq!(asymptotic_exponent(&DampingLaw::power_linearized(4.0, 1.0).unwrap()).unwrap(), -1.0);
        assert!(asymptotic_exponent(&DampingLaw::linear(1.0).unwrap()).is_err());
        let big = asymptotic_exponent(&DampingLaw::power(1e6, 1.0).unwrap()).unwrap();
        assert!(big < 0.0 && big > -1e-5);
        // sublinear p = 1.5 has conjugate q = 3
        assert_eq!(asymptotic_exponent(&DampingLaw::power(1.5, 1.0).unwrap()).unwrap(), -2.0);
    }

    #[test]
    fn branch_validation() {
        assert!(JFunction::superlinear(2.0, 1.0).is_err());
        assert!(JFunction::superlinear(1.5, 1.0).is_err());
        let q = JFunction::sublinear(1.5, 1.0).unwrap();
        assert_eq!(q, JFunction::superlinear(3.0, 1.0).unwrap());
        assert!(build_constants(DecayInputs { poincare: 0.0, ..unit_inputs() }, &q).is_err());
    }

    #[test]
    fn linear_law_gives_exponential_envelope() {
        let law = DampingLaw::linear(10.0).unwrap();
        let j = JFunction::for_law(&law).unwrap();
        let c = build_constants(unit_inputs(), &j).unwrap();
        let env = Envelope::new(&c, &j);
        assert_eq!(env.m, 1.0);
        assert!(env.asymptotic_exponent().is_none());
        let r = (env.s(2.0) / env.s(1.0)).ln();
        assert!((r - (env.s(5.0) / env.s(4.0)).ln()).abs() < 1e-12);
    }
}
