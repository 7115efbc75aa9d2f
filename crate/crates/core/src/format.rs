//! Text formats: partition files, trace logs and the quality CSV.

use std::fs::OpenOptions;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::graph::{Edge, Graph, PartitionId};
use crate::metrics::{PartitionAssignment, QualityReport, CSV_HEADER};
use crate::runtime::TraceRecord;
use crate::{Error, Result};

/// Writes `src dst partition` per edge, in graph edge order, using the
/// original vertex labels.
pub fn write_partition_file(
    graph: &Graph,
    assignment: &PartitionAssignment,
    mut out: impl Write,
) -> Result<()> {
    for (e, &p) in graph.edges().iter().zip(assignment.owners()) {
        writeln!(out, "{} {} {}", graph.label(e.src), graph.label(e.dst), p)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a partition file written for `graph` into `(edge, partition)`
/// claims. Blank lines and `#` comments are skipped. A label that does not
/// name a vertex of `graph` is a parse error.
pub fn read_partition_file(
    graph: &Graph,
    reader: impl BufRead,
) -> Result<Vec<(Edge, PartitionId)>> {
    let index = graph.label_index();
    let mut claims = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: line_no,
                reason: format!("expected `src dst partition`, got {} fields", fields.len()),
            });
        }
        let num = |s: &str| {
            s.parse::<u64>().map_err(|_| Error::Parse {
                line: line_no,
                reason: format!("`{s}` is not a non-negative integer"),
            })
        };
        let vertex = |s: &str| {
            let label = num(s)?;
            index.get(&label).copied().ok_or_else(|| Error::Parse {
                line: line_no,
                reason: format!("vertex {label} is not in the graph"),
            })
        };
        let (a, b) = (vertex(fields[0])?, vertex(fields[1])?);
        let p = num(fields[2])?;
        let p = PartitionId::try_from(p).map_err(|_| Error::Parse {
            line: line_no,
            reason: format!("partition {p} out of range"),
        })?;
        let edge = Edge::new(a, b).ok_or_else(|| Error::Parse {
            line: line_no,
            reason: "self-loop".into(),
        })?;
        claims.push((edge, p));
    }
    Ok(claims)
}

pub fn write_trace(records: &[TraceRecord], mut out: impl Write) -> Result<()> {
    for r in records {
        writeln!(out, "{r}")?;
    }
    out.flush()?;
    Ok(())
}

/// Appends `rows` to the CSV at `path`, writing the header first if the file
/// is new or empty.
pub fn append_reports(path: &Path, rows: &[QualityReport]) -> Result<()> {
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    if file.metadata()?.len() == 0 {
        writeln!(file, "{CSV_HEADER}")?;
    }
    for r in rows {
        writeln!(file, "{}", r.csv_row())?;
    }
    Ok(())
}
