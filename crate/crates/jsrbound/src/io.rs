//! On-disk formats: systems as a JSON document, trace batches as JSON
//! lines, and a CSV export for plotting.
//!
//! Floats are written as shortest round-trip decimals, so save followed by
//! load reproduces every value bit for bit. Parse failures carry the file
//! path and, for line-oriented files, the 1-based line number.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mat::Mat;
use crate::scalar::Scalar;
use crate::sysmodel::{SampleSet, SwitchedSystem, Trace};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    Format { path: String, msg: String },
    #[error("{path}:{line}: {msg}")]
    Line { path: String, line: usize, msg: String },
}

fn path_str(path: &Path) -> String {
    path.display().to_string()
}

fn file_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::File { path: path_str(path), source }
}

/// System document: mode matrices as nested rows (row-major when read in
/// order) plus the switching probabilities.
#[derive(Serialize, Deserialize)]
struct SystemWire<T> {
    n: usize,
    m: usize,
    modes: Vec<Vec<Vec<T>>>,
    probs: Vec<T>,
}

pub fn write_system<T: Scalar + Serialize>(
    sys: &SwitchedSystem<T>,
    out: &mut dyn Write,
) -> std::io::Result<()> {
    let wire = SystemWire {
        n: sys.dim(),
        m: sys.num_modes(),
        modes: sys
            .modes()
            .iter()
            .map(|a| (0..a.rows()).map(|i| a.row(i).to_vec()).collect())
            .collect(),
        probs: sys.probs().to_vec(),
    };
    let text = serde_json::to_string_pretty(&wire).map_err(std::io::Error::other)?;
    writeln!(out, "{text}")
}

pub fn save_system<T: Scalar + Serialize>(
    sys: &SwitchedSystem<T>,
    path: &Path,
) -> Result<(), IoError> {
    let mut out = BufWriter::new(File::create(path).map_err(file_err(path))?);
    write_system(sys, &mut out).and_then(|()| out.flush()).map_err(file_err(path))
}

pub fn load_system<T: Scalar + DeserializeOwned>(
    path: &Path,
) -> Result<SwitchedSystem<T>, IoError> {
    let text = std::fs::read_to_string(path).map_err(file_err(path))?;
    let wire: SystemWire<T> = serde_json::from_str(&text)
        .map_err(|e| IoError::Format { path: path_str(path), msg: e.to_string() })?;
    let fail = |msg: String| IoError::Format { path: path_str(path), msg };
    if wire.modes.len() != wire.m {
        return Err(fail(format!("{} modes listed, header says {}", wire.modes.len(), wire.m)));
    }
    if wire.probs.len() != wire.m {
        return Err(fail(format!(
            "{} probabilities for {} modes",
            wire.probs.len(),
            wire.m
        )));
    }
    let mut modes = Vec::with_capacity(wire.m);
    for (k, rows) in wire.modes.into_iter().enumerate() {
        let a = Mat::from_rows(rows)
            .map_err(|e| fail(format!("mode {k}: {e}")))?;
        if a.rows() != wire.n || a.cols() != wire.n {
            return Err(fail(format!(
                "mode {k} is {}x{}, header says {n}x{n}",
                a.rows(),
                a.cols(),
                n = wire.n
            )));
        }
        modes.push(a);
    }
    SwitchedSystem::new(modes, wire.probs).map_err(|e| fail(e.to_string()))
}

/// One trace per line; switching labels are only present when the trace
/// still carries them.
#[derive(Serialize, Deserialize)]
struct TraceWire<T> {
    x0: Vec<T>,
    states: Vec<Vec<T>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    modes: Option<Vec<usize>>,
}

pub fn write_traces<T: Scalar + Serialize>(
    sample: &SampleSet<T>,
    out: &mut dyn Write,
) -> std::io::Result<()> {
    for t in sample.traces() {
        let wire = TraceWire {
            x0: t.x0().to_vec(),
            states: t.states().to_vec(),
            modes: t.hidden_modes().map(|m| m.to_vec()),
        };
        let line = serde_json::to_string(&wire).map_err(std::io::Error::other)?;
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn save_traces<T: Scalar + Serialize>(
    sample: &SampleSet<T>,
    path: &Path,
) -> Result<(), IoError> {
    let mut out = BufWriter::new(File::create(path).map_err(file_err(path))?);
    write_traces(sample, &mut out).and_then(|()| out.flush()).map_err(file_err(path))
}

/// Claims about the generator (mode count, probability floor) are not part
/// of the trace format; the loaded sample carries none.
pub fn load_traces<T: Scalar + DeserializeOwned>(
    path: &Path,
) -> Result<SampleSet<T>, IoError> {
    let reader = BufReader::new(File::open(path).map_err(file_err(path))?);
    let mut traces = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(file_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let at_line = |msg: String| IoError::Line { path: path_str(path), line: lineno, msg };
        let wire: TraceWire<T> =
            serde_json::from_str(&line).map_err(|e| at_line(e.to_string()))?;
        let trace = Trace::new(wire.x0, wire.states, wire.modes)
            .map_err(|e| at_line(e.to_string()))?;
        traces.push(trace);
    }
    SampleSet::new(traces, None, None)
        .map_err(|e| IoError::Format { path: path_str(path), msg: e.to_string() })
}

/// One CSV row per state, keyed by trace id and step index; step 0 is the
/// starting point.
pub fn write_traces_csv<T: Scalar>(
    sample: &SampleSet<T>,
    out: &mut dyn Write,
) -> std::io::Result<()> {
    let n = sample.dim();
    let header: Vec<String> = ["trace".into(), "step".into()]
        .into_iter()
        .chain((1..=n).map(|i| format!("x{i}")))
        .collect();
    writeln!(out, "{}", header.join(","))?;
    let mut row = |id: usize, step: usize, x: &[T]| {
        let cells: Vec<String> = [id.to_string(), step.to_string()]
            .into_iter()
            .chain(x.iter().map(|v| format!("{v}")))
            .collect();
        writeln!(out, "{}", cells.join(","))
    };
    for (id, t) in sample.traces().iter().enumerate() {
        row(id, 0, t.x0())?;
        for (k, x) in t.states().iter().enumerate() {
            row(id, k + 1, x)?;
        }
    }
    Ok(())
}

pub fn export_traces_csv<T: Scalar>(
    sample: &SampleSet<T>,
    path: &Path,
) -> Result<(), IoError> {
    let mut out = BufWriter::new(File::create(path).map_err(file_err(path))?);
    write_traces_csv(sample, &mut out).and_then(|()| out.flush()).map_err(file_err(path))
}
