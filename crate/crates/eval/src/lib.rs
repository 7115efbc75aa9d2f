//! Graph sets used by the acceptance suite.

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use dne::graph::{generate_erdos_renyi, generate_rmat, load_edge_list, RmatParams};
use dne::{Graph, Result};

pub struct NamedGraph {
    pub name: String,
    pub graph: Graph,
}

impl NamedGraph {
    pub fn new(name: impl Into<String>, graph: Graph) -> Self {
        NamedGraph {
            name: name.into(),
            graph,
        }
    }
}

pub const REAL_GRAPHS: [&str; 4] = [
    "karate",
    "les_miserables",
    "florentine_families",
    "davis_southern_women",
];

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data")
}

pub fn real_graphs() -> Result<Vec<NamedGraph>> {
    REAL_GRAPHS
        .iter()
        .map(|name| {
            let file = File::open(data_dir().join(format!("{name}.el")))?;
            Ok(NamedGraph::new(
                *name,
                load_edge_list(BufReader::new(file))?,
            ))
        })
        .collect()
}

pub fn rmat(scale: u32, edge_factor: u32, seed: u64) -> Result<NamedGraph> {
    let g = generate_rmat(&RmatParams::new(scale, edge_factor, seed))?;
    Ok(NamedGraph::new(format!("rmat{scale}x{edge_factor}"), g))
}

pub fn erdos_renyi(n: usize, m: usize, seed: u64) -> Result<NamedGraph> {
    Ok(NamedGraph::new(
        format!("er{n}x{m}"),
        generate_erdos_renyi(n, m, seed)?,
    ))
}

/// RMAT scales 8 to 14 at edge factors 4 and 16, three Erdős–Rényi graphs
/// and the bundled real graphs.
pub fn bound_suite() -> Result<Vec<NamedGraph>> {
    let mut out = Vec::new();
    for scale in [8, 10, 12, 14] {
        for ef in [4, 16] {
            out.push(rmat(scale, ef, 1)?);
        }
    }
    out.push(erdos_renyi(1_000, 4_000, 1)?);
    out.push(erdos_renyi(5_000, 40_000, 2)?);
    out.push(erdos_renyi(20_000, 100_000, 3)?);
    out.extend(real_graphs()?);
    Ok(out)
}

/// Median of a non-empty list; the mean of the middle pair for even lengths.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}
