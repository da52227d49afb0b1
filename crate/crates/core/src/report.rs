//! Solver outcomes and per-iteration convergence records.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    MaxIterations,
    MaxCycles,
    Breakdown,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::MaxIterations => "max-iterations",
            Status::MaxCycles => "max-cycles",
            Status::Breakdown => "breakdown",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Status {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "converged" => Status::Converged,
            "max-iterations" => Status::MaxIterations,
            "max-cycles" => Status::MaxCycles,
            "breakdown" => Status::Breakdown,
            other => return Err(Error::InvalidConfig(format!("unknown status {other:?}"))),
        })
    }
}

/// Which phase of a solver produced an iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// Plain TriCG.
    Plain,
    /// TriCG-DR while the deflation triplets are still being refined.
    Restarting,
    /// TriCG-DR after the triplets converged.
    NonRestarting,
    /// TriCG on the warm-started, deflated system of a later right-hand side.
    Deflated,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Plain => "tricg",
            Stage::Restarting => "restarting",
            Stage::NonRestarting => "non-restarting",
            Stage::Deflated => "d-tricg",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "tricg" => Stage::Plain,
            "restarting" => Stage::Restarting,
            "non-restarting" => Stage::NonRestarting,
            "d-tricg" => Stage::Deflated,
            other => return Err(Error::InvalidConfig(format!("unknown stage {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRecord {
    pub iteration: usize,
    /// Cumulative products with `A` and `Aᵀ`.
    pub matvecs: usize,
    /// Residual norm in the `H⁻¹` norm, as produced by the recurrence.
    pub residual: f64,
    pub cycle: usize,
    pub stage: Stage,
    /// Explicitly recomputed `‖f − K·[x; y]‖_{H⁻¹}`, when requested.
    pub explicit_residual: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub status: Status,
    pub iterations: usize,
    pub matvecs: usize,
    pub cycles: usize,
    /// One record per iteration including iteration 0.
    pub history: Vec<ConvergenceRecord>,
    pub final_explicit_residual: Option<f64>,
}

impl SolveReport {
    pub fn residuals(&self) -> Vec<f64> {
        self.history.iter().map(|r| r.residual).collect()
    }

    pub fn final_residual(&self) -> f64 {
        self.history.last().map_or(f64::NAN, |r| r.residual)
    }

    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }
}

/// Snapshot handed to iteration observers.
#[derive(Debug)]
pub struct IterateView<'a> {
    pub iteration: usize,
    pub cycle: usize,
    pub stage: Stage,
    pub residual: f64,
    pub x: &'a nalgebra::DVector<f64>,
    pub y: &'a nalgebra::DVector<f64>,
}

/// Callback invoked after every iteration (and once for the initial iterate).
pub type Observer<'o> = &'o mut dyn FnMut(&IterateView<'_>);
