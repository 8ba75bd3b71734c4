//! Plain-text pedestrian tracks: one `frame_id agent_id x y` row per line.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::gp::TrajectoryObservations;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DatasetError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: frame {frame} for agent '{agent}' does not follow frame {previous}")]
    NonMonotone { line: usize, agent: String, frame: i64, previous: i64 },
    #[error("{0}")]
    Io(String),
}

/// Parses rows into per-agent observation sets, in order of first appearance.
/// Blank lines and lines starting with `#` are skipped.
pub fn parse_dataset(text: &str) -> Result<Vec<TrajectoryObservations>, DatasetError> {
    let mut order: Vec<String> = Vec::new();
    let mut rows: std::collections::HashMap<String, Vec<(i64, [f64; 2])>> = Default::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(DatasetError::Malformed { line, message: format!("expected 4 fields, found {}", fields.len()) });
        }
        let frame: i64 = fields[0]
            .parse()
            .map_err(|_| DatasetError::Malformed { line, message: format!("bad frame id '{}'", fields[0]) })?;
        let coord = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| DatasetError::Malformed { line, message: format!("bad coordinate '{s}'") })
        };
        let p = [coord(fields[2])?, coord(fields[3])?];
        let agent = fields[1].to_string();
        let entry = rows.entry(agent.clone()).or_insert_with(|| {
            order.push(agent.clone());
            Vec::new()
        });
        if let Some(&(previous, _)) = entry.last() {
            if frame <= previous {
                return Err(DatasetError::NonMonotone { line, agent, frame, previous });
            }
        }
        entry.push((frame, p));
    }
    Ok(order
        .into_iter()
        .map(|id| {
            let samples = rows.remove(&id).unwrap_or_default();
            TrajectoryObservations::new(id, samples).expect("checked while parsing")
        })
        .collect())
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Vec<TrajectoryObservations>, DatasetError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| DatasetError::Io(format!("{}: {e}", path.display())))?;
    parse_dataset(&text)
}

/// Rows grouped by agent; floats use shortest round-trip formatting.
pub fn format_dataset(tracks: &[TrajectoryObservations]) -> String {
    let mut out = String::new();
    for t in tracks {
        for (frame, p) in t.samples() {
            writeln!(out, "{frame} {} {} {}", t.agent_id(), p[0], p[1]).expect("writing to a string");
        }
    }
    out
}

pub fn save_dataset(path: impl AsRef<Path>, tracks: &[TrajectoryObservations]) -> Result<(), DatasetError> {
    let path = path.as_ref();
    std::fs::write(path, format_dataset(tracks)).map_err(|e| DatasetError::Io(format!("{}: {e}", path.display())))
}
