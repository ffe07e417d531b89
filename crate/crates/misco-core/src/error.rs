//! Error type shared by the model and the optimizers.

use alloc::vec::Vec;
use core::fmt;

use crate::game::BestResponseStep;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument left the formula's domain (non-positive distance,
    /// zero success probability, ...).
    Domain(&'static str),
    /// A per-device constraint set has no feasible point.
    Infeasible { device: usize, reason: &'static str },
    /// Best-response dynamics exceeded the slot cap without settling; the
    /// accepted updates up to that point come along for diagnosis.
    GameIterationCap {
        cap: usize,
        steps: Vec<BestResponseStep>,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(what) => write!(f, "domain error: {what}"),
            Error::Infeasible { device, reason } => {
                write!(f, "infeasible decision for device {device}: {reason}")
            }
            Error::GameIterationCap { cap, steps } => write!(
                f,
                "offload dynamics did not settle within {cap} slots ({} updates accepted)",
                steps.len()
            ),
        }
    }
}

impl core::error::Error for Error {}
