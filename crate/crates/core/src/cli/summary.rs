use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::report::{SolveReport, Status};

/// The one-line result printed after every run:
///
/// ```text
/// summary solver=tricg-dr status=converged iterations=812 matvecs=1624 residual=9.1e-9 cycles=3 seed=1
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub solver: String,
    pub status: Status,
    pub iterations: usize,
    pub matvecs: usize,
    pub residual: f64,
    pub cycles: usize,
    pub seed: u64,
}

impl Summary {
    pub fn from_report(solver: &str, report: &SolveReport, seed: u64) -> Self {
        Summary {
            solver: solver.to_string(),
            status: report.status,
            iterations: report.iterations,
            matvecs: report.matvecs,
            residual: report.final_residual(),
            cycles: report.cycles,
            seed,
        }
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "summary solver={} status={} iterations={} matvecs={} residual={:.16e} cycles={} seed={}",
            self.solver, self.status, self.iterations, self.matvecs, self.residual, self.cycles, self.seed
        )
    }
}

impl FromStr for Summary {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let bad = |msg: String| Error::parse("summary", 1, msg);
        let mut words = line.split_whitespace();
        if words.next() != Some("summary") {
            return Err(bad("missing 'summary' tag".into()));
        }
        let mut get = |key: &str| -> Result<String> {
            let w = words.next().ok_or_else(|| bad(format!("missing {key}")))?;
            w.strip_prefix(key)
                .and_then(|r| r.strip_prefix('='))
                .map(str::to_string)
                .ok_or_else(|| bad(format!("expected {key}=..., got {w:?}")))
        };
        let num = |key: &str, v: String| v.parse::<usize>().map_err(|_| bad(format!("bad {key} {v:?}")));
        let solver = get("solver")?;
        let status = get("status")?.parse()?;
        let iterations = num("iterations", get("iterations")?)?;
        let matvecs = num("matvecs", get("matvecs")?)?;
        let r = get("residual")?;
        let residual = r.parse().map_err(|_| bad(format!("bad residual {r:?}")))?;
        let cycles = num("cycles", get("cycles")?)?;
        let s = get("seed")?;
        let seed = s.parse().map_err(|_| bad(format!("bad seed {s:?}")))?;
        Ok(Summary {
            solver,
            status,
            iterations,
            matvecs,
            residual,
            cycles,
            seed,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let s = Summary {
            solver: "d-tricg".into(),
            status: Status::MaxIterations,
            iterations: 4000,
            matvecs: 8000,
            residual: 1.234_567_890_123_456_7e-7,
            cycles: 1,
            seed: 42,
        };
        assert_eq!(s.to_string().parse::<Summary>().unwrap(), s);
        assert!("summary solver=x".parse::<Summary>().is_err());
    }
}
