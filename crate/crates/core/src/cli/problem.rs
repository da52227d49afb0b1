use std::path::PathBuf;
use std::str::FromStr;

use clap::Args;
use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::opcore::SpdOperator;
use crate::probio::{gen_ones_rhs, gen_synth1, gen_synth3, random_rhs_list, random_sqd, read_matrix_market, read_rhs_file};
use crate::system::SqdSystem;

/// Where right-hand sides come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RhsSpec {
    /// `e/√m`, `e/√n`
    Ones,
    /// Standard normal entries from the run seed.
    Random,
    /// One `[b; c]` per line.
    File(PathBuf),
}

impl FromStr for RhsSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "ones" => Ok(RhsSpec::Ones),
            "random" => Ok(RhsSpec::Random),
            _ => match s.strip_prefix("file:") {
                Some(p) if !p.is_empty() => Ok(RhsSpec::File(PathBuf::from(p))),
                _ => Err(format!("expected ones, random or file:<path>, got {s:?}")),
            },
        }
    }
}

fn parse_size(s: &str) -> std::result::Result<(usize, usize), String> {
    let (m, n) = s.split_once('x').ok_or_else(|| format!("expected MxN, got {s:?}"))?;
    let m = m.parse().map_err(|_| format!("bad row count {m:?}"))?;
    let n = n.parse().map_err(|_| format!("bad column count {n:?}"))?;
    Ok((m, n))
}

/// Problem selection shared by the subcommands.
#[derive(Args, Debug, Clone)]
pub struct ProblemArgs {
    /// Diagonal model with 60 large singular values in [1e3, 1e5].
    #[arg(long)]
    pub synth1: bool,
    /// Diagonal model with 40 singular values clustered in [1000, 1020].
    #[arg(long)]
    pub synth3: bool,
    /// Dense random problem with random SPD weights.
    #[arg(long)]
    pub random: bool,
    /// Size of a --random problem.
    #[arg(long, value_name = "MxN", default_value = "60x40", value_parser = parse_size)]
    pub size: (usize, usize),
    /// MatrixMarket file for A (repeatable for reproduce exp2).
    #[arg(long, value_name = "PATH")]
    pub matrix: Vec<PathBuf>,
    /// MatrixMarket file for M (identity if absent).
    #[arg(long, value_name = "PATH")]
    pub mass: Option<PathBuf>,
    /// MatrixMarket file for N (identity if absent).
    #[arg(long, value_name = "PATH")]
    pub stiffness: Option<PathBuf>,
    /// ones, random or file:<path>.
    #[arg(long, value_name = "SPEC")]
    pub rhs: Option<RhsSpec>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

/// A system with its right-hand sides.
#[derive(Debug, Clone)]
pub struct LoadedProblem {
    pub name: String,
    pub system: SqdSystem,
    pub rhs: Vec<(DVector<f64>, DVector<f64>)>,
}

impl ProblemArgs {
    fn source_count(&self) -> usize {
        [self.synth1, self.synth3, self.random, !self.matrix.is_empty()]
            .iter()
            .filter(|&&b| b)
            .count()
    }

    /// Builds the system and `count` right-hand sides (a file supplies all of
    /// its lines regardless of `count`).
    pub fn load(&self, count: usize) -> Result<LoadedProblem> {
        if self.source_count() != 1 {
            return Err(Error::InvalidConfig(
                "choose exactly one of --synth1, --synth3, --random, --matrix".into(),
            ));
        }
        if self.matrix.len() > 1 {
            return Err(Error::InvalidConfig("only one --matrix is accepted here".into()));
        }
        let (name, system, own) = if self.synth1 {
            let p = gen_synth1(self.seed);
            (p.name, p.system, Some((p.b, p.c)))
        } else if self.synth3 {
            let p = gen_synth3(self.seed);
            (p.name, p.system, Some((p.b, p.c)))
        } else if self.random {
            let p = random_sqd(self.size.0, self.size.1, true, self.seed)?;
            (p.name, p.system, Some((p.b, p.c)))
        } else {
            let path = &self.matrix[0];
            let a = read_matrix_market(path)?;
            let m = match &self.mass {
                Some(p) => SpdOperator::from_sparse(read_matrix_market(p)?)?,
                None => SpdOperator::identity(a.rows()),
            };
            let n = match &self.stiffness {
                Some(p) => SpdOperator::from_sparse(read_matrix_market(p)?)?,
                None => SpdOperator::identity(a.cols()),
            };
            let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            (name, SqdSystem::new(m, n, a)?, None)
        };
        let (m, n) = (system.rows(), system.cols());
        let spec = match (&self.rhs, &own) {
            (Some(s), _) => s.clone(),
            (None, Some(_)) if count == 1 => {
                let rhs = vec![own.unwrap()];
                return Ok(LoadedProblem { name, system, rhs });
            }
            (None, Some(_)) => RhsSpec::Random,
            (None, None) => RhsSpec::Ones,
        };
        let rhs = match spec {
            RhsSpec::Ones => vec![gen_ones_rhs(m, n); count],
            RhsSpec::Random => random_rhs_list(m, n, count, self.seed),
            RhsSpec::File(path) => {
                let list = read_rhs_file(&path, m, n)?;
                if list.is_empty() {
                    return Err(Error::InvalidConfig(format!("{} holds no right-hand side", path.display())));
                }
                list
            }
        };
        Ok(LoadedProblem { name, system, rhs })
    }
}
