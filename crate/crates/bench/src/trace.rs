use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use abcd_core::{Phase, RunReport, TraceRow};

use crate::error::{BenchError, Result};
use crate::run::RunRecord;

/// Writes the trace as CSV with header `eval,phase,f`. Values use the
/// shortest representation that parses back to the same `f64`.
pub fn export_trace(report: &RunReport, path: &Path) -> Result<()> {
    let mut s = String::from("eval,phase,f\n");
    for row in &report.trace {
        s.push_str(&format!("{},{},{}\n", row.eval, row.phase, row.f));
    }
    fs::write(path, s).map_err(|e| BenchError::io(path, e))
}

/// Reads a file written by [`export_trace`]. The step column is not stored
/// and comes back as zero.
pub fn read_trace(path: &Path) -> Result<Vec<TraceRow>> {
    let text = fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    let bad = |line: usize, what: &str| {
        BenchError::io(
            path,
            std::io::Error::new(std::io::ErrorKind::InvalidData, format!("line {line}: {what}")),
        )
    };
    let mut lines = text.lines();
    if lines.next() != Some("eval,phase,f") {
        return Err(bad(1, "missing header"));
    }
    lines
        .enumerate()
        .map(|(k, line)| {
            let mut parts = line.split(',');
            let (Some(e), Some(p), Some(f), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
                return Err(bad(k + 2, "expected three fields"));
            };
            Ok(TraceRow {
                eval: e.parse().map_err(|_| bad(k + 2, "bad eval"))?,
                step: 0,
                phase: Phase::parse(p).ok_or_else(|| bad(k + 2, "bad phase"))?,
                f: f.parse().map_err(|_| bad(k + 2, "bad value"))?,
            })
        })
        .collect()
}

/// Writes one JSON object per line.
pub fn write_records(records: &[RunRecord], path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| BenchError::io(path, e))?;
    let mut w = BufWriter::new(file);
    for r in records {
        serde_json::to_writer(&mut w, r).map_err(|e| BenchError::Json {
            path: path.to_path_buf(),
            source: e,
        })?;
        w.write_all(b"\n").map_err(|e| BenchError::io(path, e))?;
    }
    w.flush().map_err(|e| BenchError::io(path, e))
}
