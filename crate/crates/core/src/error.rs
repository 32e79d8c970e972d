use thiserror::Error;

use crate::susceptibility::SusceptibilityResult;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error(
        "infeasible geometry: mass {mass} kg at thickness {thickness} m gives curvature radius \
         {radius} m, which must exceed the thickness"
    )]
    InfeasibleGeometry {
        mass: f64,
        thickness: f64,
        radius: f64,
    },

    #[error("radial coordinate {r} m outside the mirror face [0, {max}] m")]
    OutOfDomain { r: f64, max: f64 },

    #[error("beam does not fit on the mirror: offset {offset} m + waist {waist} m >= radius {radius} m")]
    BeamOffMirror { offset: f64, waist: f64, radius: f64 },

    #[error("quadrature did not converge: {0}")]
    ConvergenceFailure(String),

    #[error("Hermite recurrence left the representable range at order {order}")]
    RecurrenceOverflow { order: usize },

    #[error(
        "mode budget exhausted after {} modes with relative tail {:.3e}",
        .partial.modes_used, .partial.tail_bound
    )]
    BudgetExceeded { partial: Box<SusceptibilityResult> },

    #[error("invalid sweep specification: {0}")]
    InvalidSpec(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }
}
