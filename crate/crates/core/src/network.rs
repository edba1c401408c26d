//! Posterior summarization and network assembly.
//!
//! Assembly consumes per-target summaries only, never raw draws or data: an
//! undirected edge (i, j, t) appears iff both directed posterior-median
//! magnitudes exceed the threshold (min-symmetrisation), with weight equal
//! to the smaller magnitude. Predictors screened out of a fit count as
//! exact zeros.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::gibbs::PosteriorDraws;

/// Per-(t, j) posterior medians and standard deviations for one target.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalFitSummary {
    pub target_name: String,
    pub predictor_names: Vec<String>,
    /// T x m posterior medians.
    pub median: Array2<f64>,
    /// T x m posterior standard deviations.
    pub sd: Array2<f64>,
}

/// Entrywise median and sample SD of the coefficient draws.
pub fn summarize(draws: &PosteriorDraws) -> Result<LocalFitSummary> {
    let n = draws.draws.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "summaries need at least 2 retained draws, found {n}"
        )));
    }
    let t_len = draws.t_len;
    let m = draws.predictor_names.len();
    let mut median = Array2::zeros((t_len, m));
    let mut sd = Array2::zeros((t_len, m));
    let mut cell = vec![0.0f64; n];
    for t in 0..t_len {
        for j in 0..m {
            for (i, state) in draws.draws.iter().enumerate() {
                cell[i] = state.b[(t, j)];
            }
            median[(t, j)] = median_of(&mut cell);
            let mean = cell.iter().sum::<f64>() / n as f64;
            sd[(t, j)] =
                (cell.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt();
        }
    }
    Ok(LocalFitSummary {
        target_name: draws.target_name.clone(),
        predictor_names: draws.predictor_names.clone(),
        median,
        sd,
    })
}

/// Stacks per-time-slice draws (each with T = 1) into one T x m summary,
/// slice order giving the time order.
pub fn summarize_per_time(slices: &[PosteriorDraws]) -> Result<LocalFitSummary> {
    if slices.is_empty() {
        return Err(Error::InvalidInput("no per-time slices to summarize".into()));
    }
    let first = &slices[0];
    let m = first.predictor_names.len();
    let mut median = Array2::zeros((slices.len(), m));
    let mut sd = Array2::zeros((slices.len(), m));
    for (t, slice) in slices.iter().enumerate() {
        if slice.t_len != 1 {
            return Err(Error::InvalidInput(format!(
                "slice {t} has {} time points, expected 1",
                slice.t_len
            )));
        }
        if slice.predictor_names != first.predictor_names
            || slice.target_name != first.target_name
        {
            return Err(Error::InvalidInput(
                "per-time slices disagree on target or predictors".into(),
            ));
        }
        let s = summarize(slice)?;
        for j in 0..m {
            median[(t, j)] = s.median[(0, j)];
            sd[(t, j)] = s.sd[(0, j)];
        }
    }
    Ok(LocalFitSummary {
        target_name: first.target_name.clone(),
        predictor_names: first.predictor_names.clone(),
        median,
        sd,
    })
}

fn median_of(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Undirected time-varying edge set over named nodes; i < j by index into
/// `nodes`, weights strictly positive.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeVaryingNetwork {
    pub nodes: Vec<String>,
    pub edges: Vec<Edge>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    /// 1-based time index.
    pub t: usize,
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

impl TimeVaryingNetwork {
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }
}

/// Min-symmetrisation at threshold `phi`: edge (i, j, t) iff
/// |median^(i)_{t,j}| > phi and |median^(j)_{t,i}| > phi.
pub fn assemble_network(summaries: &[LocalFitSummary], phi: f64) -> Result<TimeVaryingNetwork> {
    if phi < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "threshold must be non-negative, got {phi}"
        )));
    }
    let mut by_target: HashMap<&str, &LocalFitSummary> = HashMap::new();
    for s in summaries {
        if by_target.insert(s.target_name.as_str(), s).is_some() {
            return Err(Error::InvalidInput(format!(
                "duplicate summary for target {:?}",
                s.target_name
            )));
        }
    }
    // node universe: every name mentioned anywhere, sorted for determinism
    let mut nodes: Vec<String> = summaries
        .iter()
        .flat_map(|s| {
            std::iter::once(s.target_name.clone()).chain(s.predictor_names.iter().cloned())
        })
        .collect();
    nodes.sort();
    nodes.dedup();
    let index_of: HashMap<&str, usize> = nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();

    // directed magnitude |median^(from)_{t, to}|, zero when absent
    let directed = |from: &str, to: &str, t: usize| -> f64 {
        by_target
            .get(from)
            .and_then(|s| {
                s.predictor_names
                    .iter()
                    .position(|p| p == to)
                    .map(|jj| s.median[(t, jj)].abs())
            })
            .unwrap_or(0.0)
    };

    let t_len = summaries.first().map_or(0, |s| s.median.nrows());
    if summaries.iter().any(|s| s.median.nrows() != t_len) {
        return Err(Error::InvalidInput(
            "summaries disagree on the number of time points".into(),
        ));
    }

    let mut edges = Vec::new();
    for s in summaries {
        let i_name = s.target_name.as_str();
        for p_name in &s.predictor_names {
            // visit each unordered pair once
            if i_name >= p_name.as_str() {
                continue;
            }
            for t in 0..t_len {
                let forward = directed(i_name, p_name, t);
                let backward = directed(p_name, i_name, t);
                if forward > phi && backward > phi {
                    let (mut i, mut j) = (index_of[i_name], index_of[p_name.as_str()]);
                    if i > j {
                        std::mem::swap(&mut i, &mut j);
                    }
                    edges.push(Edge {
                        t: t + 1,
                        i,
                        j,
                        weight: forward.min(backward),
                    });
                }
            }
        }
    }
    edges.sort_by(|a, b| (a.t, a.i, a.j).cmp(&(b.t, b.i, b.j)));
    edges.dedup_by(|a, b| (a.t, a.i, a.j) == (b.t, b.i, b.j));
    Ok(TimeVaryingNetwork { nodes, edges })
}

/// Edge-list CSV `t,i,j,weight` sorted by (t, i, j), node names as in the
/// dataset header.
pub fn export_edges<P: AsRef<Path>>(net: &TimeVaryingNetwork, path: P) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path.as_ref())?);
    writeln!(out, "t,i,j,weight")?;
    for e in &net.edges {
        writeln!(
            out,
            "{},{},{},{}",
            e.t, net.nodes[e.i], net.nodes[e.j], e.weight
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Reads an edge list written by [`export_edges`].
pub fn import_edges<P: AsRef<Path>>(path: P) -> Result<TimeVaryingNetwork> {
    let reader = BufReader::new(std::fs::File::open(path.as_ref())?);
    let mut lines = reader.lines();
    match lines.next() {
        Some(Ok(h)) if h == "t,i,j,weight" => {}
        other => {
            return Err(Error::Format(format!(
                "bad edge-list header: {other:?}"
            )))
        }
    }
    let mut raw: Vec<(usize, String, String, f64)> = Vec::new();
    let mut nodes: Vec<String> = Vec::new();
    for line in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::Format(format!("bad edge row {line:?}")));
        }
        let t: usize = fields[0]
            .parse()
            .map_err(|_| Error::Format(format!("bad time {:?}", fields[0])))?;
        let w: f64 = fields[3]
            .parse()
            .map_err(|_| Error::Format(format!("bad weight {:?}", fields[3])))?;
        raw.push((t, fields[1].to_string(), fields[2].to_string(), w));
        nodes.push(fields[1].to_string());
        nodes.push(fields[2].to_string());
    }
    nodes.sort();
    nodes.dedup();
    let index_of: HashMap<&str, usize> = nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let mut edges: Vec<Edge> = raw
        .into_iter()
        .map(|(t, a, b, weight)| {
            let (mut i, mut j) = (index_of[a.as_str()], index_of[b.as_str()]);
            if i > j {
                std::mem::swap(&mut i, &mut j);
            }
            Edge { t, i, j, weight }
        })
        .collect();
    edges.sort_by(|a, b| (a.t, a.i, a.j).cmp(&(b.t, b.i, b.j)));
    Ok(TimeVaryingNetwork { nodes, edges })
}

/// Per-target summary CSV: `predictor,t,median,sd` rows under a one-line
/// `#target=` header.
pub fn write_summary<P: AsRef<Path>>(summary: &LocalFitSummary, path: P) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path.as_ref())?);
    writeln!(out, "#target={}", summary.target_name)?;
    writeln!(out, "predictor,t,median,sd")?;
    for (jj, name) in summary.predictor_names.iter().enumerate() {
        for t in 0..summary.median.nrows() {
            writeln!(
                out,
                "{name},{},{},{}",
                t + 1,
                summary.median[(t, jj)],
                summary.sd[(t, jj)]
            )?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Reads a summary written by [`write_summary`].
pub fn read_summary<P: AsRef<Path>>(path: P) -> Result<LocalFitSummary> {
    let reader = BufReader::new(std::fs::File::open(path.as_ref())?);
    let mut lines = reader.lines();
    let target_name = match lines.next() {
        Some(Ok(h)) if h.starts_with("#target=") => h["#target=".len()..].to_string(),
        other => return Err(Error::Format(format!("bad summary header: {other:?}"))),
    };
    match lines.next() {
        Some(Ok(h)) if h == "predictor,t,median,sd" => {}
        other => return Err(Error::Format(format!("bad summary columns: {other:?}"))),
    }
    let mut rows: Vec<(String, usize, f64, f64)> = Vec::new();
    for line in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::Format(format!("bad summary row {line:?}")));
        }
        let t: usize = fields[1]
            .parse()
            .map_err(|_| Error::Format(format!("bad time {:?}", fields[1])))?;
        let med: f64 = fields[2]
            .parse()
            .map_err(|_| Error::Format(format!("bad median {:?}", fields[2])))?;
        let sd: f64 = fields[3]
            .parse()
            .map_err(|_| Error::Format(format!("bad sd {:?}", fields[3])))?;
        rows.push((fields[0].to_string(), t, med, sd));
    }
    let mut predictor_names: Vec<String> = Vec::new();
    for (name, ..) in &rows {
        if !predictor_names.contains(name) {
            predictor_names.push(name.clone());
        }
    }
    let t_len = rows.iter().map(|r| r.1).max().unwrap_or(0);
    let m = predictor_names.len();
    let mut median = Array2::zeros((t_len, m));
    let mut sd = Array2::zeros((t_len, m));
    for (name, t, med, s) in rows {
        let jj = predictor_names.iter().position(|p| *p == name).unwrap();
        median[(t - 1, jj)] = med;
        sd[(t - 1, jj)] = s;
    }
    Ok(LocalFitSummary {
        target_name,
        predictor_names,
        median,
        sd,
    })
}
