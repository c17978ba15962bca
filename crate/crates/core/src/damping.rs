//! Pointwise bottom-drag laws `g(u)`.
//!
//! * `linear`: `g(v) = C v`
//! * `power:p`: `g(v) = C |v|^{p-2} v` (quadratic drag is `p = 3`, cubic `p = 4`)
//! * `power_lin:p`: the power law inside the unit ball and `C v` outside it,
//!   which makes the law grow linearly for large velocity
//! * `none`: `g = 0`

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub type Vec2 = [f64; 2];
pub type Mat2 = [[f64; 2]; 2];

/// Speed substituted for `|v|` when the jacobian of a sublinear law is
/// requested at the origin.
pub const JACOBIAN_REGULARIZATION: f64 = 1e-8;

/// Smallest speed used by [`DampingLaw::secant`]. Small enough that the
/// secant stays exact wherever the velocity is representable, large enough
/// that `r^{p-2}` stays finite for `p >= 1`.
pub const SECANT_FLOOR: f64 = 1.5e-154;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DampingKind {
    None,
    Linear,
    Power { p: f64 },
    PowerLinearized { p: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampingLaw {
    kind: DampingKind,
    coeff: f64,
}

/// Structural constants of a law that grows linearly at infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructuralConstants {
    /// Linear-growth constant `M`: `|v| + |g(v)|^2 <= M g(v).v` for `|v| > 1`.
    pub growth: f64,
    /// `max_{|v| = 1} |g(v)|`.
    pub g_star: f64,
    /// Exponent of the concave envelope `J(s) = c0 s^alpha`.
    pub alpha: f64,
    /// Scale of the concave envelope.
    pub c0: f64,
    pub class: DecayClass,
}

/// Asymptotic decay class of the unforced energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayClass {
    Exponential,
    /// `E(t) ~ t^exponent`
    Algebraic { exponent: f64 },
}

impl DampingLaw {
    pub fn none() -> Self {
        Self {
            kind: DampingKind::None,
            coeff: 0.0,
        }
    }

    pub fn linear(coeff: f64) -> Result<Self> {
        Self::new(DampingKind::Linear, coeff)
    }

    pub fn power(p: f64, coeff: f64) -> Result<Self> {
        Self::new(DampingKind::Power { p }, coeff)
    }

    pub fn power_linearized(p: f64, coeff: f64) -> Result<Self> {
        Self::new(DampingKind::PowerLinearized { p }, coeff)
    }

    pub fn new(kind: DampingKind, coeff: f64) -> Result<Self> {
        match kind {
            DampingKind::None => return Ok(Self::none()),
            DampingKind::Power { p } | DampingKind::PowerLinearized { p } if !(p > 1.0 && p.is_finite()) => {
                return Err(Error::InvalidDampingLaw(format!(
                    "exponent must satisfy p > 1, got {p}"
                )))
            }
            _ => {}
        }
        if !(coeff > 0.0 && coeff.is_finite()) {
            return Err(Error::InvalidDampingLaw(format!(
                "coefficient must be positive, got {coeff}"
            )));
        }
        Ok(Self { kind, coeff })
    }

    /// Parse `"none"`, `"linear"`, `"power:p"` or `"power_lin:p"`.
    pub fn parse(text: &str, coeff: f64) -> Result<Self> {
        let text = text.trim();
        let kind = match text.split_once(':') {
            None => match text {
                "none" => DampingKind::None,
                "linear" => DampingKind::Linear,
                _ => return Err(Error::InvalidDampingLaw(format!("unknown law '{text}'"))),
            },
            Some((name, exponent)) => {
                let p = f64::from_str(exponent.trim()).map_err(|_| {
                    Error::InvalidDampingLaw(format!("bad exponent in '{text}'"))
                })?;
                match name.trim() {
                    "power" => DampingKind::Power { p },
                    "power_lin" => DampingKind::PowerLinearized { p },
                    other => {
                        return Err(Error::InvalidDampingLaw(format!("unknown law '{other}'")))
                    }
                }
            }
        };
        Self::new(kind, coeff)
    }

    pub fn kind(&self) -> DampingKind {
        self.kind
    }

    pub fn coeff(&self) -> f64 {
        self.coeff
    }

    pub fn exponent(&self) -> Option<f64> {
        match self.kind {
            DampingKind::Power { p } | DampingKind::PowerLinearized { p } => Some(p),
            _ => None,
        }
    }

    /// True when `g` is linear in `v`, so the discrete problem is affine.
    pub fn is_affine(&self) -> bool {
        matches!(self.kind, DampingKind::None | DampingKind::Linear)
            || matches!(self.kind, DampingKind::Power { p } if p == 2.0)
    }

    pub fn eval(&self, v: Vec2) -> Vec2 {
        let s = self.scale(v[0].hypot(v[1]));
        [s * v[0], s * v[1]]
    }

    /// `g(v) = scale(|v|) v`.
    fn scale(&self, r: f64) -> f64 {
        let c = self.coeff;
        match self.kind {
            DampingKind::None => 0.0,
            DampingKind::Linear => c,
            DampingKind::Power { p } => power_scale(c, p, r),
            DampingKind::PowerLinearized { p } => {
                if r >= 1.0 {
                    c
                } else {
                    power_scale(c, p, r)
                }
            }
        }
    }

    /// Exact derivative of [`eval`](Self::eval). Fails at `v = 0` for
    /// sublinear exponents, where the derivative is unbounded.
    pub fn jacobian(&self, v: Vec2) -> Result<Mat2> {
        let r = v[0].hypot(v[1]);
        let c = self.coeff;
        let p = match self.kind {
            DampingKind::None => return Ok([[0.0; 2]; 2]),
            DampingKind::Linear => return Ok([[c, 0.0], [0.0, c]]),
            DampingKind::PowerLinearized { .. } if r > 1.0 => return Ok([[c, 0.0], [0.0, c]]),
            DampingKind::Power { p } | DampingKind::PowerLinearized { p } => p,
        };
        if r == 0.0 {
            return if p > 2.0 {
                Ok([[0.0; 2]; 2])
            } else if p == 2.0 {
                Ok([[c, 0.0], [0.0, c]])
            } else {
                Err(Error::SingularJacobian(p))
            };
        }
        Ok(power_jacobian(c, p, v, r))
    }

    /// Jacobian with the origin singularity of sublinear laws replaced by
    /// the value at speed [`JACOBIAN_REGULARIZATION`].
    pub fn jacobian_regularized(&self, v: Vec2) -> Mat2 {
        match self.jacobian(v) {
            Ok(j) => j,
            Err(_) => {
                let p = self.exponent().unwrap_or(2.0);
                let r = JACOBIAN_REGULARIZATION;
                // isotropic part only: the direction of v is undefined
                let s = self.coeff * r.powf(p - 2.0);
                [[s, 0.0], [0.0, s]]
            }
        }
    }

    /// Secant matrix `(|g(v)| / |v|) I`, so that `secant(v) v = g(v)`. The
    /// speed is floored at [`SECANT_FLOOR`].
    pub fn secant(&self, v: Vec2) -> Mat2 {
        let s = self.scale(v[0].hypot(v[1]).max(SECANT_FLOOR));
        [[s, 0.0], [0.0, s]]
    }

    /// Constants needed by the decay theory. Only laws that grow linearly
    /// for large velocity qualify.
    pub fn structural_constants(&self) -> Result<StructuralConstants> {
        let c = self.coeff;
        // |v| + C^2 |v|^2 <= (1 + C^2) |v|^2 = ((1 + C^2)/C) C |v|^2 for |v| > 1
        let growth = (1.0 + c * c) / c;
        match self.kind {
            DampingKind::None => Err(Error::NoLinearGrowth(
                "g = 0 provides no damping".into(),
            )),
            DampingKind::Power { p } if p != 2.0 => Err(Error::NoLinearGrowth(format!(
                "pure power law with p = {p}; use power_lin:{p}"
            ))),
            DampingKind::Linear | DampingKind::Power { .. } => Ok(StructuralConstants {
                growth,
                g_star: c,
                alpha: 1.0,
                // |v-w|^2 + |g(v)-g(w)|^2 = ((1 + C^2)/C) (v-w).(g(v)-g(w))
                c0: growth,
                class: DecayClass::Exponential,
            }),
            DampingKind::PowerLinearized { p } if p == 2.0 => Ok(StructuralConstants {
                growth,
                g_star: c,
                alpha: 1.0,
                c0: growth,
                class: DecayClass::Exponential,
            }),
            DampingKind::PowerLinearized { p } => {
                let (alpha, c0) = if p > 2.0 {
                    // |v-w|^2 + |g(v)-g(w)|^2 <= (1 + C^2)|v-w|^2 <= (1 + C^2)/2 J_1(s / C)
                    let alpha = 2.0 / p;
                    let base = 2f64.powf(3.0 - 4.0 / p);
                    (alpha, 0.5 * (1.0 + c * c) * base * c.powf(-alpha))
                } else {
                    let q = p / (p - 1.0);
                    let alpha = 2.0 / q;
                    let base = 2f64.powf(3.0 - 4.0 / q);
                    (alpha, (1f64).max(c * c) * base * c.powf(-alpha))
                };
                Ok(StructuralConstants {
                    growth,
                    g_star: c,
                    alpha,
                    c0,
                    class: decay_class_for_exponent(p),
                })
            }
        }
    }
}

fn power_scale(c: f64, p: f64, r: f64) -> f64 {
    if r == 0.0 {
        // limit of |v|^{p-2} v at the origin is 0 for every p > 1
        if p == 2.0 {
            c
        } else {
            0.0
        }
    } else {
        c * r.powf(p - 2.0)
    }
}

fn power_jacobian(c: f64, p: f64, v: Vec2, r: f64) -> Mat2 {
    let a = c * r.powf(p - 2.0);
    let b = c * (p - 2.0) * r.powf(p - 4.0);
    [
        [a + b * v[0] * v[0], b * v[0] * v[1]],
        [b * v[1] * v[0], a + b * v[1] * v[1]],
    ]
}

/// Decay class of the energy under a power-type law with exponent `p`.
pub(crate) fn decay_class_for_exponent(p: f64) -> DecayClass {
    if p == 2.0 {
        return DecayClass::Exponential;
    }
    let effective = if p > 2.0 { p } else { p / (p - 1.0) };
    DecayClass::Algebraic {
        exponent: -2.0 / (effective - 2.0),
    }
}

impl fmt::Display for DampingLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            DampingKind::None => write!(f, "none"),
            DampingKind::Linear => write!(f, "linear"),
            DampingKind::Power { p } => write!(f, "power:{p}"),
            DampingKind::PowerLinearized { p } => write!(f, "power_lin:{p}"),
        }
    }
}
