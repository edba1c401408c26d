//! Synthetic data with known time-varying network structure.
//!
//! Nodes come in four archetypes of mean activity profile: decreasing to no
//! signal, increasing from no signal, peaked in the middle, and null. Each
//! profile is randomly time-stretched, per-node. The observations themselves
//! come from a per-time-group Markov chain whose conditional means couple
//! same-archetype nodes with weight 1/p', thinned and truncated to the final
//! `keep` states; mean profiles are added afterwards. An optional dropout
//! pass zeroes entries with probability exp(-omega x^2).

use ndarray::{Array2, Array3};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::PseudoTimeDataset;
use crate::error::{Error, Result};
use crate::stats::rng::RngStream;

/// Mean-profile archetypes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Archetype {
    /// (a) monotonic, decreasing to no signal.
    Decreasing,
    /// (b) monotonic, increasing from no signal.
    Increasing,
    /// (c) increasing from and decreasing to no signal.
    Peaked,
    /// (d) null: random noise only.
    Null,
}

impl Archetype {
    pub const ALL: [Archetype; 4] = [
        Archetype::Decreasing,
        Archetype::Increasing,
        Archetype::Peaked,
        Archetype::Null,
    ];

    pub fn code(&self) -> char {
        match self {
            Archetype::Decreasing => 'a',
            Archetype::Increasing => 'b',
            Archetype::Peaked => 'c',
            Archetype::Null => 'd',
        }
    }
}

/// Simulation settings; defaults follow the desk-scale study design
/// (T = 8, n_t = 25, p' = 10, four archetypes, chain length 1e4 thinned by
/// 100 keeping the final 25 states).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimulationSpec {
    pub t_len: usize,
    pub n_per_time: usize,
    pub nodes_per_archetype: usize,
    pub noise_sd: f64,
    pub chain_len: usize,
    pub thin: usize,
    pub keep: usize,
    pub dropout_omega: Option<f64>,
    pub seed: u64,
}

impl Default for SimulationSpec {
    fn default() -> Self {
        Self {
            t_len: 8,
            n_per_time: 25,
            nodes_per_archetype: 10,
            noise_sd: 0.1,
            chain_len: 10_000,
            thin: 100,
            keep: 25,
            dropout_omega: None,
            seed: 0,
        }
    }
}

impl SimulationSpec {
    pub fn validate(&self) -> Result<()> {
        if self.t_len < 4 {
            return Err(Error::InvalidParameter(
                "simulation needs at least 4 time points for the stretch draw".into(),
            ));
        }
        if self.nodes_per_archetype == 0 || self.n_per_time == 0 {
            return Err(Error::InvalidParameter(
                "nodes per archetype and samples per time must be positive".into(),
            ));
        }
        if !(self.noise_sd > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "noise sd must be positive, got {}",
                self.noise_sd
            )));
        }
        if self.keep * self.thin > self.chain_len {
            return Err(Error::InvalidParameter(format!(
                "keep * thin = {} exceeds chain length {}",
                self.keep * self.thin,
                self.chain_len
            )));
        }
        if self.keep != self.n_per_time {
            return Err(Error::InvalidParameter(format!(
                "kept states ({}) must equal samples per time ({})",
                self.keep, self.n_per_time
            )));
        }
        if let Some(w) = self.dropout_omega {
            if w < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "dropout omega must be non-negative, got {w}"
                )));
            }
        }
        Ok(())
    }

    pub fn n_nodes(&self) -> usize {
        4 * self.nodes_per_archetype
    }
}

/// True coefficient structure, archetype labels, and mean profiles.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroundTruth {
    pub node_names: Vec<String>,
    pub archetypes: Vec<Archetype>,
    /// p x T mean trajectory per node, after stretching.
    pub mean_profiles: Array2<f64>,
    /// Coupling weight between same-archetype nodes (1/p').
    pub coeff: f64,
}

impl GroundTruth {
    pub fn n_nodes(&self) -> usize {
        self.archetypes.len()
    }

    pub fn t_len(&self) -> usize {
        self.mean_profiles.ncols()
    }

    /// Whether (i, j) is a true edge: same archetype, no self-loops.
    pub fn is_edge(&self, i: usize, j: usize) -> bool {
        i != j && self.archetypes[i] == self.archetypes[j]
    }

    /// Dense T x (p-1) true coefficient matrix for one target, columns in
    /// predictor order (all nodes except the target, ascending).
    pub fn b_true(&self, target: usize) -> Array2<f64> {
        let p = self.n_nodes();
        let mut b = Array2::zeros((self.t_len(), p - 1));
        let predictors: Vec<usize> = (0..p).filter(|&j| j != target).collect();
        for (jj, &j) in predictors.iter().enumerate() {
            if self.is_edge(target, j) {
                for t in 0..self.t_len() {
                    b[(t, jj)] = self.coeff;
                }
            }
        }
        b
    }
}

/// Closed-form base profile for an archetype, before stretching; amplitude
/// one, logistic transition pinned to 0.01/0.99 at the endpoints.
pub fn base_profile(archetype: Archetype, t_len: usize) -> Vec<f64> {
    let t_len_f = t_len as f64;
    let mid = 0.5 * (1.0 + t_len_f);
    let alpha = 2.0 * 99.0f64.ln() / (t_len_f - 1.0);
    let logistic = |t: f64| 1.0 / (1.0 + (-alpha * (t - mid)).exp());
    (1..=t_len)
        .map(|t| {
            let tf = t as f64;
            match archetype {
                Archetype::Decreasing => 1.0 - logistic(tf),
                Archetype::Increasing => logistic(tf),
                Archetype::Peaked => {
                    let u = (tf - 1.0) / (t_len_f - 1.0);
                    4.0 * u * (1.0 - u)
                }
                Archetype::Null => 0.0,
            }
        })
        .collect()
}

/// Compresses `profile` to `t_prime` points by linear interpolation and
/// zero-pads the tail back to the original length.
pub fn stretch_profile(profile: &[f64], t_prime: usize) -> Vec<f64> {
    let t_len = profile.len();
    assert!(t_prime >= 1 && t_prime <= t_len);
    let mut out = vec![0.0; t_len];
    if t_prime == 1 {
        out[0] = profile[0];
        return out;
    }
    let scale = (t_len - 1) as f64 / (t_prime - 1) as f64;
    for (tp, slot) in out.iter_mut().take(t_prime).enumerate() {
        let pos = tp as f64 * scale;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        let frac = pos - lo as f64;
        *slot = profile[lo] * (1.0 - frac) + profile[hi.min(t_len - 1)] * frac;
    }
    out
}

/// Mean profiles for all nodes: base shape per archetype, then a random
/// integer stretch T' ~ U{T-3, ..., T} per node with tail zero-padding.
pub fn make_mean_profiles(
    spec: &SimulationSpec,
    archetypes: &[Archetype],
    rng: &mut RngStream,
) -> Result<Array2<f64>> {
    spec.validate()?;
    let t_len = spec.t_len;
    let mut profiles = Array2::zeros((archetypes.len(), t_len));
    for (i, &arch) in archetypes.iter().enumerate() {
        let base = base_profile(arch, t_len);
        let t_prime = rng.random_range(t_len - 3..=t_len);
        let stretched = stretch_profile(&base, t_prime);
        for t in 0..t_len {
            profiles[(i, t)] = stretched[t];
        }
    }
    Ok(profiles)
}

/// Generates the full synthetic dataset and its ground truth.
///
/// For each time group, a Markov chain over all p nodes starts from zero
/// and sweeps node-conditional draws S_i ~ N(S_{\i} b^{(i)}, sigma^2); one
/// state in every `thin` is kept and the final `keep` of those become the
/// group's samples, with mean profiles added afterwards.
pub fn simulate_dataset(
    spec: &SimulationSpec,
    rng: &mut RngStream,
) -> Result<(PseudoTimeDataset, GroundTruth)> {
    spec.validate()?;
    let p = spec.n_nodes();
    let p_prime = spec.nodes_per_archetype;
    let archetypes: Vec<Archetype> = Archetype::ALL
        .iter()
        .flat_map(|&a| std::iter::repeat_n(a, p_prime))
        .collect();
    let node_names: Vec<String> = (0..p).map(|i| format!("n{:03}", i + 1)).collect();
    let mean_profiles = make_mean_profiles(spec, &archetypes, rng)?;
    let coeff = 1.0 / p_prime as f64;
    let truth = GroundTruth {
        node_names: node_names.clone(),
        archetypes: archetypes.clone(),
        mean_profiles,
        coeff,
    };

    // archetype id per node for the running same-type sums
    let type_of: Vec<usize> = archetypes
        .iter()
        .map(|a| Archetype::ALL.iter().position(|b| b == a).unwrap())
        .collect();
    let mut values = markov_chain_samples(spec, &type_of, coeff, rng);
    for t in 0..spec.t_len {
        for k in 0..spec.n_per_time {
            let row = t * spec.n_per_time + k;
            for i in 0..p {
                values[(row, i)] += truth.mean_profiles[(i, t)];
            }
        }
    }
    let labels: Vec<i64> = (0..spec.t_len as i64)
        .flat_map(|t| std::iter::repeat_n(t + 1, spec.n_per_time))
        .collect();

    let mut ds = PseudoTimeDataset::new(values, labels, node_names)?;
    if let Some(omega) = spec.dropout_omega {
        ds = apply_dropout(&ds, omega, rng)?;
    }
    Ok((ds, truth))
}

/// Runs the per-time-group Markov chains and returns the zero-mean retained
/// samples, one block of `n_per_time` rows per time group.
fn markov_chain_samples(
    spec: &SimulationSpec,
    type_of: &[usize],
    coeff: f64,
    rng: &mut RngStream,
) -> Array2<f64> {
    let p = type_of.len();
    let n_rows = spec.t_len * spec.n_per_time;
    let mut values = Array2::zeros((n_rows, p));
    for t in 0..spec.t_len {
        let mut state = vec![0.0f64; p];
        let mut type_sums = [0.0f64; 4];
        let mut kept = 0usize;
        let first_kept = spec.chain_len - spec.keep * spec.thin;
        for r in 2..=spec.chain_len {
            for i in 0..p {
                let ty = type_of[i];
                let mean = (type_sums[ty] - state[i]) * coeff;
                let z: f64 = StandardNormal.sample(rng);
                let new = mean + spec.noise_sd * z;
                type_sums[ty] += new - state[i];
                state[i] = new;
            }
            if r > first_kept && r % spec.thin == 0 {
                let row = t * spec.n_per_time + kept;
                for i in 0..p {
                    values[(row, i)] = state[i];
                }
                kept += 1;
            }
        }
        debug_assert_eq!(kept, spec.keep);
    }
    values
}

/// Zeroes each entry independently with probability exp(-omega x^2): small
/// values drop out preferentially, omega = 0 drops everything.
pub fn apply_dropout(
    ds: &PseudoTimeDataset,
    omega: f64,
    rng: &mut RngStream,
) -> Result<PseudoTimeDataset> {
    if omega < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "dropout omega must be non-negative, got {omega}"
        )));
    }
    let mut values = ds.values().clone();
    for v in values.iter_mut() {
        let p_drop = (-omega * *v * *v).exp();
        let u: f64 = rng.random();
        if u < p_drop {
            *v = 0.0;
        }
    }
    PseudoTimeDataset::new(
        values,
        ds.time_labels().iter().map(|&t| t as i64).collect(),
        ds.node_names().to_vec(),
    )
}

/// The 0/1 edge tensor (T x p x p): same archetype, i != j, constant in t.
pub fn true_adjacency(gt: &GroundTruth) -> Array3<u8> {
    let p = gt.n_nodes();
    let t_len = gt.t_len();
    let mut adj = Array3::zeros((t_len, p, p));
    for i in 0..p {
        for j in 0..p {
            if gt.is_edge(i, j) {
                for t in 0..t_len {
                    adj[(t, i, j)] = 1;
                }
            }
        }
    }
    adj
}

/// Writes the ground-truth sidecar: node names, archetype codes, mean
/// profiles, and the dense per-target coefficient matrices.
pub fn write_truth_json<P: AsRef<std::path::Path>>(gt: &GroundTruth, path: P) -> Result<()> {
    let file = std::fs::File::create(path.as_ref())?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), gt)?;
    Ok(())
}

pub fn read_truth_json<P: AsRef<std::path::Path>>(path: P) -> Result<GroundTruth> {
    let file = std::fs::File::open(path.as_ref())?;
    let gt: GroundTruth = serde_json::from_reader(std::io::BufReader::new(file))?;
    Ok(gt)
}
