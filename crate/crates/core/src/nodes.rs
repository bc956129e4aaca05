//! Nonlinear integrator nodes `x' = gamma(u)`, `y = x`.

use thiserror::Error;

use crate::grid::Grid;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NodeError {
    #[error("parameter {name} = {value} out of range ({expected})")]
    Parameter {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("node dynamics violate the sector condition u * gamma(u) > 0 near u = {0}")]
    Sector(f64),
    #[error("storage function is only available for single integrators")]
    UnsupportedDynamics,
}

/// The input map `gamma` of a nonlinear integrator.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum NodeDynamics {
    /// Single integrator, `gamma(u) = u`.
    #[default]
    Identity,
    /// `c * sign(u) * |u|^beta`.
    SignPower { c: f64, beta: f64 },
    /// `c * tanh(u / s)`.
    Saturating { c: f64, s: f64 },
}

impl NodeDynamics {
    pub fn sign_power(c: f64, beta: f64) -> Result<Self, NodeError> {
        check("c", c, c > 0.0, "c > 0")?;
        check("beta", beta, beta > 0.0 && beta <= 1.0, "0 < beta <= 1")?;
        Self::SignPower { c, beta }.sector_checked()
    }

    pub fn saturating(c: f64, s: f64) -> Result<Self, NodeError> {
        check("c", c, c > 0.0, "c > 0")?;
        check("s", s, s > 0.0, "s > 0")?;
        Self::Saturating { c, s }.sector_checked()
    }

    fn sector_checked(self) -> Result<Self, NodeError> {
        let grid = Grid::new(100.0, 2001).expect("valid grid");
        match sector_violation(|u| self.drift(u), &grid) {
            Some(u) => Err(NodeError::Sector(u)),
            None => Ok(self),
        }
    }

    /// `x' = gamma(u)`.
    pub fn drift(&self, u: f64) -> f64 {
        match *self {
            Self::Identity => u,
            Self::SignPower { c, beta } => {
                if u == 0.0 {
                    0.0
                } else {
                    c * u.signum() * u.abs().powf(beta)
                }
            }
            Self::Saturating { c, s } => c * (u / s).tanh(),
        }
    }

    /// `gamma^{-1}(v)`, the input that produces drift `v`. Saturating
    /// dynamics clamp `v` just inside their range.
    pub fn input_for_drift(&self, v: f64) -> f64 {
        match *self {
            Self::Identity => v,
            Self::SignPower { c, beta } => {
                if v == 0.0 {
                    0.0
                } else {
                    v.signum() * (v.abs() / c).powf(1.0 / beta)
                }
            }
            Self::Saturating { c, s } => {
                let r = (v / c).clamp(-1.0 + 1e-16, 1.0 - 1e-16);
                s * r.atanh()
            }
        }
    }

    pub fn sector_check(&self, grid: &Grid) -> bool {
        sector_violation(|u| self.drift(u), grid).is_none()
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, Self::Identity)
    }

    /// `(x - y*)^2 / 2` for single integrators.
    pub fn storage(&self, x: f64, y_star: f64) -> Result<f64, NodeError> {
        if self.is_identity() {
            Ok(storage(x, y_star))
        } else {
            Err(NodeError::UnsupportedDynamics)
        }
    }
}

/// Storage of a single integrator relative to the output `y_star`.
pub fn storage(x: f64, y_star: f64) -> f64 {
    0.5 * (x - y_star) * (x - y_star)
}

fn check(
    name: &'static str,
    value: f64,
    ok: bool,
    expected: &'static str,
) -> Result<(), NodeError> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(NodeError::Parameter {
            name,
            value,
            expected,
        })
    }
}

/// First grid point where `u * gamma(u) > 0` fails away from the origin,
/// or where `gamma(0) != 0`.
pub fn sector_violation<F: Fn(f64) -> f64>(gamma: F, grid: &Grid) -> Option<f64> {
    if gamma(0.0) != 0.0 {
        return Some(0.0);
    }
    grid.points().find(|&u| {
        let s = u * gamma(u);
        if u.abs() <= 1e-12 {
            s < 0.0
        } else {
            s <= 0.0
        }
    })
}
