//! Instance files (JSON) and trace output (CSV).
//!
//! ```json
//! {"problem":"smooth","x":[...],"w":[...],"lambda":1.0}
//! {"problem":"dag","y":[...],"w":[...],"edges":[[0,1],[1,2]]}
//! ```
//!
//! Edge endpoints are 0-based node indices; `[i, j]` requires the fitted value
//! at `i` to be at most the one at `j`.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::problem::{DagInstance, SmoothInstance};
use crate::report::TraceRecord;

pub const TRACE_HEADER: &str = "iter,r,s,objective";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "problem", rename_all = "snake_case", deny_unknown_fields)]
enum RawInstance {
    Smooth {
        x: Vec<f64>,
        w: Vec<f64>,
        lambda: f64,
    },
    Dag {
        y: Vec<f64>,
        w: Vec<f64>,
        edges: Vec<[usize; 2]>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Smooth(SmoothInstance),
    Dag(DagInstance),
}

impl Instance {
    pub fn n(&self) -> usize {
        match self {
            Instance::Smooth(i) => i.n(),
            Instance::Dag(i) => i.n(),
        }
    }

    pub fn kind(&self) -> crate::datagen::ProblemKind {
        match self {
            Instance::Smooth(_) => crate::datagen::ProblemKind::Smooth,
            Instance::Dag(_) => crate::datagen::ProblemKind::Dag,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawInstance = serde_json::from_str(text)?;
        match raw {
            RawInstance::Smooth { x, w, lambda } => {
                Ok(Instance::Smooth(SmoothInstance::new(x, w, lambda)?))
            }
            RawInstance::Dag { y, w, edges } => Ok(Instance::Dag(DagInstance::new(
                y,
                w,
                edges.into_iter().map(|[i, j]| (i, j)).collect(),
            )?)),
        }
    }

    pub fn to_json(&self) -> String {
        let raw = match self {
            Instance::Smooth(i) => RawInstance::Smooth {
                x: i.x().to_vec(),
                w: i.w().to_vec(),
                lambda: i.lambda(),
            },
            Instance::Dag(i) => RawInstance::Dag {
                y: i.y().to_vec(),
                w: i.w().to_vec(),
                edges: i.edges().iter().map(|&(a, b)| [a, b]).collect(),
            },
        };
        serde_json::to_string(&raw).expect("instance serialization cannot fail")
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    /// Writes the instance and returns the SHA-256 hex digest of the bytes written.
    pub fn write(&self, path: &Path) -> Result<String> {
        let text = self.to_json();
        fs::write(path, &text)?;
        Ok(digest(text.as_bytes()))
    }
}

impl From<SmoothInstance> for Instance {
    fn from(i: SmoothInstance) -> Self {
        Instance::Smooth(i)
    }
}

impl From<DagInstance> for Instance {
    fn from(i: DagInstance) -> Self {
        Instance::Dag(i)
    }
}

pub fn digest(bytes: &[u8]) -> String {
    let hash = Sha256::digest(bytes);
    hash.iter().map(|b| format!("{b:02x}")).collect()
}

/// Streams trace rows to a CSV file, one line per iteration, flushed as
/// written so a partially completed run leaves a readable file.
pub struct TraceWriter {
    out: std::io::LineWriter<fs::File>,
    error: Option<std::io::Error>,
}

impl TraceWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let mut out = std::io::LineWriter::new(fs::File::create(path)?);
        writeln!(out, "{TRACE_HEADER}")?;
        Ok(TraceWriter { out, error: None })
    }

    pub fn push(&mut self, rec: &TraceRecord) {
        if self.error.is_some() {
            return;
        }
        if let Err(e) = writeln!(self.out, "{}", trace_row(rec)) {
            self.error = Some(e);
        }
    }

    pub fn finish(mut self) -> Result<()> {
        if let Some(e) = self.error.take() {
            return Err(Error::Io(e));
        }
        self.out.flush()?;
        Ok(())
    }
}

pub fn trace_row(rec: &TraceRecord) -> String {
    format!("{},{:e},{:e},{:e}", rec.iter, rec.r, rec.s, rec.objective)
}

/// Parses a trace CSV written by [`TraceWriter`].
pub fn read_trace(text: &str) -> Result<Vec<TraceRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == TRACE_HEADER => {}
        other => {
            return Err(Error::input(format!(
                "trace header should be {TRACE_HEADER:?}, found {other:?}"
            )))
        }
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 4 {
                return Err(Error::input(format!("malformed trace row {line:?}")));
            }
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::input(format!("bad number {s:?} in trace")))
            };
            Ok(TraceRecord {
                iter: f[0]
                    .parse()
                    .map_err(|_| Error::input(format!("bad iteration {:?}", f[0])))?,
                r: num(f[1])?,
                s: num(f[2])?,
                objective: num(f[3])?,
            })
        })
        .collect()
}
