//! CSV rows, JSON documents and the metadata sidecar.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use garouter_core::analysis::sweep::{PointError, SweepResult};
use serde::Serialize;

use crate::error::{CliError, Result};

/// Full double precision, `.` separator; tiny values collapse to zero.
pub fn number(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else if v.abs() < 1e-300 {
        "0".to_string()
    } else {
        format!("{v:.16e}")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NaN".to_string(), number)
}

pub fn spectrum_csv(res: &SweepResult, with_deviation: bool) -> String {
    let mut out = String::from("E,R_A,T_A,T_B_back,T_B_fwd,residual");
    if with_deviation {
        out.push_str(",dev");
    }
    out.push('\n');
    for p in &res.points {
        let pr = p.probabilities;
        let mut fields = vec![
            number(p.axis1),
            opt(pr.map(|x| x.reflect_a)),
            opt(pr.map(|x| x.transmit_a)),
            opt(pr.map(|x| x.transfer_back)),
            opt(pr.map(|x| x.transfer_fwd)),
            opt(pr.map(|x| x.conservation_residual)),
        ];
        if with_deviation {
            fields.push(opt(p.deviation));
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn map_csv(res: &SweepResult) -> String {
    let mut out = String::from("axis1,axis2,R_A,T_A,T_B_back,T_B_fwd,residual\n");
    for p in &res.points {
        let pr = p.probabilities;
        let fields = [
            number(p.axis1),
            opt(p.axis2),
            opt(pr.map(|x| x.reflect_a)),
            opt(pr.map(|x| x.transmit_a)),
            opt(pr.map(|x| x.transfer_back)),
            opt(pr.map(|x| x.transfer_fwd)),
            opt(pr.map(|x| x.conservation_residual)),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn json<T: Serialize>(value: &T) -> String {
    // Only plain data structures are serialised here.
    let mut s = serde_json::to_string_pretty(value).unwrap_or_else(|e| format!("{{\"error\": \"{e}\"}}"));
    s.push('\n');
    s
}

/// Write to `path`, or to standard output when there is none.
pub fn emit(path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        Some(path) => {
            let file = File::create(path).map_err(CliError::io(format!("cannot create {}", path.display())))?;
            let mut w = BufWriter::new(file);
            w.write_all(contents.as_bytes())
                .and_then(|_| w.flush())
                .map_err(CliError::io(format!("cannot write {}", path.display())))
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(contents.as_bytes())
                .and_then(|_| lock.flush())
                .map_err(CliError::io("cannot write to standard output"))
        }
    }
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

#[derive(Debug, Serialize)]
pub struct ErrorPoint {
    pub index: usize,
    pub axis1: f64,
    pub axis2: Option<f64>,
    pub kind: PointError,
}

#[derive(Debug, Serialize)]
pub struct Metadata<'a, C: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: &'a C,
    pub params: &'a garouter_core::ModelParams,
    pub axis1: &'static str,
    pub axis2: Option<&'static str>,
    pub diagnostic: bool,
    pub points: usize,
    pub flagged_points: Vec<usize>,
    pub error_points: Vec<ErrorPoint>,
    pub max_deviation: Option<f64>,
    pub wall_time_seconds: f64,
    pub timestamp: u64,
}

impl<'a, C: Serialize> Metadata<'a, C> {
    pub fn new(command: &'static str, config: &'a C, res: &'a SweepResult, wall: Duration) -> Self {
        Self {
            tool: "garouter",
            version: env!("CARGO_PKG_VERSION"),
            command,
            config,
            params: &res.metadata.params,
            axis1: res.axis1.name(),
            axis2: res.axis2.map(|a| a.name()),
            diagnostic: res.metadata.diagnostic,
            points: res.points.len(),
            flagged_points: res
                .points
                .iter()
                .enumerate()
                .filter(|(_, p)| p.flagged)
                .map(|(i, _)| i)
                .collect(),
            error_points: res
                .points
                .iter()
                .enumerate()
                .filter_map(|(index, p)| {
                    p.error.map(|kind| ErrorPoint { index, axis1: p.axis1, axis2: p.axis2, kind })
                })
                .collect(),
            max_deviation: res.max_deviation(),
            wall_time_seconds: wall.as_secs_f64(),
            timestamp: res.metadata.timestamp,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers() {
        assert_eq!(number(0.5), "5.0000000000000000e-1");
        assert_eq!(number(1e-310), "0");
        assert_eq!(number(-0.0), "0");
        assert_eq!(number(f64::NAN), "NaN");
        let v = 0.1 + 0.2;
        assert_eq!(number(v).parse::<f64>().unwrap(), v);
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(sidecar_path(Path::new("out/spec.csv")), PathBuf::from("out/spec.csv.meta.json"));
    }
}
