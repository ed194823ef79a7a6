//! Crate-wide error type.

use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A NaN or infinity reached a numeric-domain boundary.
    NonFinite { context: &'static str },
    /// A history lookup asked for a time beyond the latest committed sample.
    Lookahead { requested: f64, latest: f64 },
    /// Interval bounds passed in the wrong order.
    ArgumentOrder { lo: f64, hi: f64 },
    /// A controller gain combination makes the law singular (1 + q3 = 0).
    DegenerateGain,
    /// A transfer block was evaluated at a singular frequency.
    SingularFrequency { w: f64 },
    /// Bad configuration; the message names the offending field.
    Config(String),
    /// The simulation produced a non-finite state.
    Numeric { step: usize, vehicle: usize },
    /// A metric cannot be computed from this trace.
    MeasurementInfeasible(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonFinite { context } => write!(f, "non-finite value in {context}"),
            Error::Lookahead { requested, latest } => {
                write!(
                    f,
                    "history lookup at t={requested} is ahead of latest sample t={latest}"
                )
            }
            Error::ArgumentOrder { lo, hi } => {
                write!(f, "interval bounds out of order: {lo} > {hi}")
            }
            Error::DegenerateGain => write!(f, "degenerate controller gains: 1 + q3 = 0"),
            Error::SingularFrequency { w } => write!(f, "singular frequency w={w}"),
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
            Error::Numeric { step, vehicle } => {
                write!(f, "non-finite state at step {step}, vehicle {vehicle}")
            }
            Error::MeasurementInfeasible(msg) => write!(f, "measurement infeasible: {msg}"),
        }
    }
}
