use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::report::ConvergenceRecord;

pub const HISTORY_HEADER: &str = "iteration,matvecs,residual,cycle,stage";

/// CSV text for `records`; the `explicit_residual` column is added when any
/// record carries one.
pub fn render_history_csv(records: &[ConvergenceRecord]) -> String {
    let explicit = records.iter().any(|r| r.explicit_residual.is_some());
    let mut out = String::from(HISTORY_HEADER);
    if explicit {
        out.push_str(",explicit_residual");
    }
    out.push('\n');
    for r in records {
        let _ = write!(out, "{},{},{:.16e},{},{}", r.iteration, r.matvecs, r.residual, r.cycle, r.stage);
        if explicit {
            match r.explicit_residual {
                Some(e) => {
                    let _ = write!(out, ",{e:.16e}");
                }
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    out
}

pub fn write_history_csv(path: impl AsRef<Path>, records: &[ConvergenceRecord]) -> Result<()> {
    if records.is_empty() {
        return Err(Error::InvalidConfig("empty convergence history".into()));
    }
    fs::write(path, render_history_csv(records))?;
    Ok(())
}

pub fn read_history_csv(path: impl AsRef<Path>) -> Result<Vec<ConvergenceRecord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_history_csv(&text, &path.display().to_string())
}

pub fn parse_history_csv(text: &str, name: &str) -> Result<Vec<ConvergenceRecord>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::parse(name, 1, "empty file"))?;
    let explicit = match header {
        h if h == HISTORY_HEADER => false,
        h if h == format!("{HISTORY_HEADER},explicit_residual") => true,
        _ => return Err(Error::parse(name, 1, "unexpected header")),
    };
    let width = if explicit { 6 } else { 5 };
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != width {
            return Err(Error::parse(name, lineno, format!("expected {width} fields")));
        }
        let bad = |what: &str| Error::parse(name, lineno, format!("bad {what}"));
        out.push(ConvergenceRecord {
            iteration: f[0].parse().map_err(|_| bad("iteration"))?,
            matvecs: f[1].parse().map_err(|_| bad("matvecs"))?,
            residual: f[2].parse().map_err(|_| bad("residual"))?,
            cycle: f[3].parse().map_err(|_| bad("cycle"))?,
            stage: f[4].parse().map_err(|_| bad("stage"))?,
            explicit_residual: if explicit && !f[5].is_empty() {
                Some(f[5].parse().map_err(|_| bad("explicit residual"))?)
            } else {
                None
            },
        });
    }
    Ok(out)
}
