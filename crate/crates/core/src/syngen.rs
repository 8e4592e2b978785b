//! K-block directed signed graph generator and the built-in benchmark specs.

use std::collections::{BTreeMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{is_strongly_connected, DirectedSignedGraph, GraphError};

const MAX_BLOCK_ATTEMPTS: usize = 100;

#[derive(Debug, Error)]
pub enum SyngenError {
    #[error("{name} = {value} is not a probability")]
    InvalidDensity { name: &'static str, value: f64 },
    #[error("{which} densities sum to {sum} > 1")]
    DensitySum { which: &'static str, sum: f64 },
    #[error("spec has no blocks")]
    NoBlocks,
    #[error("block {block} of size {size} has no strongly connected positive core after {attempts} attempts")]
    NotStronglyConnected { block: usize, size: usize, attempts: usize },
    #[error("labels line {line}: expected `node<TAB>cluster`, got {text:?}")]
    MalformedLabel { line: usize, text: String },
    #[error("labels do not cover node {0}")]
    MissingLabel(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// How edges are placed on the directed slots of a block pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeSampling {
    /// Each ordered slot independently holds +1 with the positive density and
    /// -1 with the negative density.
    #[default]
    Bernoulli,
    /// `round(density * slots)` slots are drawn uniformly with replacement and
    /// duplicates collapse, so realised densities fall below nominal.
    UniformDraws,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynSpec {
    pub block_sizes: Vec<usize>,
    pub intra_pos_density: f64,
    pub intra_neg_density: f64,
    pub inter_pos_density: f64,
    pub inter_neg_density: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sampling: EdgeSampling,
}

impl SynSpec {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_sampling(mut self, sampling: EdgeSampling) -> Self {
        self.sampling = sampling;
        self
    }

    pub fn node_count(&self) -> usize {
        self.block_sizes.iter().sum()
    }

    pub fn validate(&self) -> Result<(), SyngenError> {
        if self.block_sizes.is_empty() || self.node_count() == 0 {
            return Err(SyngenError::NoBlocks);
        }
        for (name, value) in [
            ("intra_pos_density", self.intra_pos_density),
            ("intra_neg_density", self.intra_neg_density),
            ("inter_pos_density", self.inter_pos_density),
            ("inter_neg_density", self.inter_neg_density),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(SyngenError::InvalidDensity { name, value });
            }
        }
        let intra = self.intra_pos_density + self.intra_neg_density;
        if intra > 1.0 + 1e-12 {
            return Err(SyngenError::DensitySum { which: "intra", sum: intra });
        }
        let inter = self.inter_pos_density + self.inter_neg_density;
        if inter > 1.0 + 1e-12 {
            return Err(SyngenError::DensitySum { which: "inter", sum: inter });
        }
        Ok(())
    }

    /// Block index of every node, blocks laid out contiguously.
    pub fn truth(&self) -> Vec<usize> {
        self.block_sizes.iter().enumerate().flat_map(|(b, &s)| std::iter::repeat_n(b, s)).collect()
    }

    pub fn intra_slots(&self) -> usize {
        self.block_sizes.iter().map(|&s| s * s.saturating_sub(1)).sum()
    }

    pub fn inter_slots(&self) -> usize {
        let n = self.node_count();
        self.block_sizes.iter().map(|&s| s * (n - s)).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticGraph {
    pub graph: DirectedSignedGraph,
    pub truth: Vec<usize>,
}

fn sample_bernoulli(rng: &mut ChaCha8Rng, pos: f64, neg: f64) -> Option<i8> {
    let r: f64 = rng.random();
    if r < pos {
        Some(1)
    } else if r < pos + neg {
        Some(-1)
    } else {
        None
    }
}

fn draws(density: f64, slots: usize) -> usize {
    (density * slots as f64).round() as usize
}

fn block_edges(
    rng: &mut ChaCha8Rng,
    spec: &SynSpec,
    size: usize,
) -> Vec<(usize, usize, i8)> {
    let mut edges = Vec::new();
    match spec.sampling {
        EdgeSampling::Bernoulli => {
            for u in 0..size {
                for v in 0..size {
                    if u == v {
                        continue;
                    }
                    if let Some(s) = sample_bernoulli(rng, spec.intra_pos_density, spec.intra_neg_density) {
                        edges.push((u, v, s));
                    }
                }
            }
        }
        EdgeSampling::UniformDraws => {
            let slots = size * size.saturating_sub(1);
            if slots == 0 {
                return edges;
            }
            let mut pos = HashSet::new();
            for _ in 0..draws(spec.intra_pos_density, slots) {
                pos.insert(random_offdiag(rng, size));
            }
            let mut neg = HashSet::new();
            for _ in 0..draws(spec.intra_neg_density, slots) {
                let slot = random_offdiag(rng, size);
                if !pos.contains(&slot) {
                    neg.insert(slot);
                }
            }
            edges.extend(pos.into_iter().map(|(u, v)| (u, v, 1)));
            edges.extend(neg.into_iter().map(|(u, v)| (u, v, -1)));
            edges.sort_unstable();
        }
    }
    edges
}

fn random_offdiag(rng: &mut ChaCha8Rng, size: usize) -> (usize, usize) {
    let u = rng.random_range(0..size);
    let mut v = rng.random_range(0..size - 1);
    if v >= u {
        v += 1;
    }
    (u, v)
}

fn positive_core_ok(size: usize, edges: &[(usize, usize, i8)]) -> bool {
    if size < 2 {
        return false;
    }
    let pos: Vec<_> = edges.iter().copied().filter(|e| e.2 > 0).collect();
    match DirectedSignedGraph::from_edges(size, &pos) {
        Ok(g) => is_strongly_connected(&g),
        Err(_) => false,
    }
}

/// Samples a K-block graph. Each block is redrawn until its positive part is
/// strongly connected, up to 100 attempts.
pub fn generate(spec: &SynSpec) -> Result<SyntheticGraph, SyngenError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.node_count();
    let truth = spec.truth();
    let mut offsets = Vec::with_capacity(spec.block_sizes.len());
    let mut acc = 0;
    for &s in &spec.block_sizes {
        offsets.push(acc);
        acc += s;
    }

    let mut edges: Vec<(usize, usize, i8)> = Vec::new();
    for (b, &size) in spec.block_sizes.iter().enumerate() {
        let mut attempt = 0;
        let local = loop {
            attempt += 1;
            let local = block_edges(&mut rng, spec, size);
            if positive_core_ok(size, &local) {
                break local;
            }
            if attempt >= MAX_BLOCK_ATTEMPTS {
                return Err(SyngenError::NotStronglyConnected { block: b, size, attempts: attempt });
            }
        };
        let off = offsets[b];
        edges.extend(local.into_iter().map(|(u, v, s)| (u + off, v + off, s)));
    }

    match spec.sampling {
        EdgeSampling::Bernoulli => {
            for u in 0..n {
                for v in 0..n {
                    if truth[u] == truth[v] {
                        continue;
                    }
                    if let Some(s) = sample_bernoulli(&mut rng, spec.inter_pos_density, spec.inter_neg_density) {
                        edges.push((u, v, s));
                    }
                }
            }
        }
        EdgeSampling::UniformDraws => {
            let slots = spec.inter_slots();
            let mut pos = HashSet::new();
            let mut neg = HashSet::new();
            if slots > 0 {
                for _ in 0..draws(spec.inter_pos_density, slots) {
                    pos.insert(random_inter(&mut rng, &truth));
                }
                for _ in 0..draws(spec.inter_neg_density, slots) {
                    let slot = random_inter(&mut rng, &truth);
                    if !pos.contains(&slot) {
                        neg.insert(slot);
                    }
                }
            }
            let mut inter: Vec<_> = pos.into_iter().map(|(u, v)| (u, v, 1)).chain(neg.into_iter().map(|(u, v)| (u, v, -1))).collect();
            inter.sort_unstable();
            edges.extend(inter);
        }
    }

    let graph = DirectedSignedGraph::from_edges(n, &edges)?;
    Ok(SyntheticGraph { graph, truth })
}

fn random_inter(rng: &mut ChaCha8Rng, truth: &[usize]) -> (usize, usize) {
    let n = truth.len();
    loop {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if truth[u] != truth[v] {
            return (u, v);
        }
    }
}

/// Mean and variance of the number of distinct occupied slots after `draws`
/// uniform draws with replacement over `slots` slots.
pub fn occupancy_moments(slots: usize, draws: usize) -> (f64, f64) {
    if slots == 0 {
        return (0.0, 0.0);
    }
    let s = slots as f64;
    let d = draws as f64;
    let q1 = (1.0 - 1.0 / s).powf(d);
    let q2 = (1.0 - 2.0 / s).powf(d);
    let mean = s * (1.0 - q1);
    let var = s * q1 + s * (s - 1.0) * q2 - s * s * q1 * q1;
    (mean, var.max(0.0))
}

/// Mean and variance of the intra-block positive edge count implied by the
/// spec (ignoring the strong-connectivity redraw).
pub fn intra_positive_moments(spec: &SynSpec) -> (f64, f64) {
    spec.block_sizes
        .iter()
        .map(|&size| {
            let slots = size * size.saturating_sub(1);
            layer_moments(spec.sampling, spec.intra_pos_density, slots)
        })
        .fold((0.0, 0.0), |(m, v), (a, b)| (m + a, v + b))
}

/// Mean and variance of the inter-block positive edge count.
pub fn inter_positive_moments(spec: &SynSpec) -> (f64, f64) {
    layer_moments(spec.sampling, spec.inter_pos_density, spec.inter_slots())
}

fn layer_moments(sampling: EdgeSampling, p: f64, slots: usize) -> (f64, f64) {
    match sampling {
        EdgeSampling::Bernoulli => {
            let s = slots as f64;
            (p * s, p * (1.0 - p) * s)
        }
        EdgeSampling::UniformDraws => occupancy_moments(slots, draws(p, slots)),
    }
}

/// One `node<TAB>cluster` line per node.
pub fn format_labels(labels: &[usize]) -> String {
    let mut out = String::with_capacity(labels.len() * 8);
    for (u, c) in labels.iter().enumerate() {
        out.push_str(&format!("{u}\t{c}\n"));
    }
    out
}

/// Parses a labels file; `#` lines are comments. Every node in `0..max+1`
/// must be labelled exactly once (later lines override earlier ones).
pub fn parse_labels(text: &str) -> Result<Vec<usize>, SyngenError> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = || SyngenError::MalformedLabel { line: i + 1, text: raw.to_string() };
        let mut it = line.split_whitespace();
        let (Some(u), Some(c), None) = (it.next(), it.next(), it.next()) else {
            return Err(bad());
        };
        pairs.push((u.parse::<usize>().map_err(|_| bad())?, c.parse::<usize>().map_err(|_| bad())?));
    }
    let n = pairs.iter().map(|p| p.0 + 1).max().unwrap_or(0);
    let mut labels = vec![None; n];
    for (u, c) in pairs {
        labels[u] = Some(c);
    }
    labels.iter().enumerate().map(|(u, c)| c.ok_or(SyngenError::MissingLabel(u))).collect()
}

pub const BENCHMARK_BLOCK_SIZES: [usize; 5] = [240, 220, 200, 180, 160];

/// The nine benchmark specs, keyed `Syn-1` to `Syn-9`, all with seed 0.
pub fn builtin_specs() -> BTreeMap<String, SynSpec> {
    let rows: [(&str, f64, f64, f64, f64); 9] = [
        ("Syn-1", 0.4, 0.0, 0.2, 0.0),
        ("Syn-2", 0.4, 0.0, 0.1, 0.1),
        ("Syn-3", 0.4, 0.0, 0.0, 0.2),
        ("Syn-4", 0.4, 0.0, 0.7, 0.0),
        ("Syn-5", 0.4, 0.08, 0.2, 0.0),
        ("Syn-6", 0.4, 0.08, 0.0, 0.2),
        ("Syn-7", 0.4, 0.08, 0.4, 0.0),
        ("Syn-8", 0.4, 0.16, 0.2, 0.0),
        ("Syn-9", 0.4, 0.36, 0.1, 0.1),
    ];
    rows.iter()
        .map(|&(name, ip, ineg, op, oneg)| {
            (
                name.to_owned(),
                SynSpec {
                    block_sizes: BENCHMARK_BLOCK_SIZES.to_vec(),
                    intra_pos_density: ip,
                    intra_neg_density: ineg,
                    inter_pos_density: op,
                    inter_neg_density: oneg,
                    seed: 0,
                    sampling: EdgeSampling::Bernoulli,
                },
            )
        })
        .collect()
}

pub fn builtin_spec(name: &str) -> Option<SynSpec> {
    builtin_specs().remove(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_round_trip() {
        let labels = vec![0, 0, 2, 1];
        assert_eq!(parse_labels(&format_labels(&labels)).unwrap(), labels);
        assert!(matches!(parse_labels("0\t1\n2\t0\n"), Err(SyngenError::MissingLabel(1))));
        assert!(matches!(parse_labels("0 x\n"), Err(SyngenError::MalformedLabel { line: 1, .. })));
    }

    #[test]
    fn builtin_table() {
        let specs = builtin_specs();
        assert_eq!(specs.len(), 9);
        let s8 = &specs["Syn-8"];
        assert_eq!((s8.intra_pos_density, s8.intra_neg_density), (0.4, 0.16));
        let s9 = &specs["Syn-9"];
        assert_eq!((s9.inter_pos_density, s9.inter_neg_density), (0.1, 0.1));
        assert_eq!(specs["Syn-4"].inter_pos_density, 0.7);
        assert!(specs.values().all(|s| s.validate().is_ok()));
    }

    #[test]
    fn size_one_blocks_with_zero_density_fail() {
        let spec = SynSpec {
            block_sizes: vec![1, 1],
            intra_pos_density: 0.0,
            intra_neg_density: 0.0,
            inter_pos_density: 0.0,
            inter_neg_density: 0.0,
            seed: 0,
            sampling: EdgeSampling::Bernoulli,
        };
        assert!(matches!(generate(&spec), Err(SyngenError::NotStronglyConnected { block: 0, .. })));
    }

    #[test]
    fn invalid_densities_rejected() {
        let mut spec = builtin_spec("Syn-1").unwrap();
        spec.intra_neg_density = 0.7;
        assert!(matches!(spec.validate(), Err(SyngenError::DensitySum { which: "intra", .. })));
        spec.intra_neg_density = -0.1;
        assert!(matches!(spec.validate(), Err(SyngenError::InvalidDensity { .. })));
    }

    #[test]
    fn occupancy_matches_poisson_limit() {
        let (mean, var) = occupancy_moments(1_000_000, 400_000);
        let expected = 1e6 * (1.0 - (-0.4f64).exp());
        assert!((mean - expected).abs() / expected < 1e-3);
        assert!(var > 0.0 && var < mean);
    }

    #[test]
    fn table_slot_counts() {
        let spec = builtin_spec("Syn-1").unwrap();
        assert_eq!(spec.intra_slots(), 203_000);
        assert_eq!(spec.inter_slots(), 1000 * 999 - 203_000);
    }
}
