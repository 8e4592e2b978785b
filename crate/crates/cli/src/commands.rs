use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use signed_spectra::eigen::{dense_eigen_oracle, top_eigenpairs, EigenConfig, EigenError};
use signed_spectra::embedding::{SignScreen, DEFAULT_SIGN_TOL};
use signed_spectra::graph::{format_edge_list, load_edge_list, DirectedSignedGraph, GraphError};
use signed_spectra::partition::{accuracy, NullModel, PartitionError};
use signed_spectra::perturb::{
    build_workspace, classify_regime, first_order_ladder, single_edge_rotation, EdgeDirection, PerturbError,
    PerturbationModel,
};
use signed_spectra::scdsg::{run_scdsg, ScdsgConfig, ScdsgError};
use signed_spectra::syngen::{builtin_spec, format_labels, generate, parse_labels, EdgeSampling, SynSpec, SyngenError};

use crate::manifest::Recorder;
use crate::{ClusterArgs, DirectionArg, EigsArgs, GenArgs, NullModelArg, PerturbArgs, PerturbMode, Sampling};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Syngen(#[from] SyngenError),
    #[error(transparent)]
    Scdsg(#[from] ScdsgError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Perturb(#[from] PerturbError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io { .. } | CliError::Graph(GraphError::Io { .. }) => "io",
            CliError::Graph(_) => "graph",
            CliError::Syngen(_) => "generator",
            CliError::Scdsg(_) => "clustering",
            CliError::Eigen(_) => "eigen",
            CliError::Partition(_) => "partition",
            CliError::Perturb(_) => "perturbation",
            CliError::Json(_) => "json",
        }
    }
}

fn read_to_string(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn gen(a: &GenArgs) -> Result<(), CliError> {
    let mut spec: SynSpec = match (&a.spec, &a.spec_file) {
        (Some(name), _) => builtin_spec(name).ok_or_else(|| {
            CliError::Usage(format!("unknown spec {name:?}; expected one of Syn-1 .. Syn-9"))
        })?,
        (None, Some(path)) => serde_json::from_str(&read_to_string(path)?)?,
        (None, None) => return Err(CliError::Usage("one of --spec or --spec-file is required".into())),
    };
    if let Some(seed) = a.seed {
        spec.seed = seed;
    }
    if let Some(s) = a.sampling {
        spec.sampling = match s {
            Sampling::Bernoulli => EdgeSampling::Bernoulli,
            Sampling::UniformDraws => EdgeSampling::UniformDraws,
        };
    }
    let mut rec = Recorder::new(&a.out)?;
    let syn = generate(&spec)?;
    rec.write_text("graph.tsv", &format_edge_list(&syn.graph))?;
    rec.write_text("labels.tsv", &format_labels(&syn.truth))?;
    rec.write_json("spec.json", &spec)?;
    let inputs: Vec<&Path> = a.spec_file.iter().map(|p| p.as_path()).collect();
    rec.finish("gen", a, Some(spec.seed), &inputs)
}

#[derive(Serialize)]
struct ClusterReport<'a> {
    #[serde(flatten)]
    result: &'a signed_spectra::partition::PartitionResult<f64>,
    accuracy: Option<f64>,
    n: usize,
    edges: usize,
}

fn load_truth(path: &Path, g: &DirectedSignedGraph) -> Result<Vec<usize>, CliError> {
    let truth = parse_labels(&read_to_string(path)?)?;
    if truth.len() != g.node_count() {
        return Err(CliError::Usage(format!(
            "truth labels cover {} nodes, graph has {}",
            truth.len(),
            g.node_count()
        )));
    }
    Ok(truth)
}

pub fn cluster(a: &ClusterArgs) -> Result<(), CliError> {
    let g = load_edge_list(&a.input)?;
    let truth = a.truth.as_deref().map(|p| load_truth(p, &g)).transpose()?;
    let mut cfg = ScdsgConfig::<f64>::new(a.alpha, a.seed);
    cfg.tau = a.tau;
    cfg.null_model = match a.null_model {
        NullModelArg::Directed => NullModel::Directed,
        NullModelArg::Literal => NullModel::Literal,
    };
    if !(0.0..=1.0).contains(&a.sign_mass) {
        return Err(CliError::Usage(format!("--sign-mass must lie in [0, 1], got {}", a.sign_mass)));
    }
    cfg.sign_screen = if a.sign_mass == 0.0 {
        SignScreen::Strict { tol: DEFAULT_SIGN_TOL }
    } else {
        SignScreen::NegativeMass { max_fraction: a.sign_mass }
    };

    let mut rec = Recorder::new(&a.out)?;
    let outcome = run_scdsg(&g, &cfg)?;
    let acc = truth.as_deref().map(|t| accuracy(&outcome.result.labels, t)).transpose()?;
    let report = ClusterReport { result: &outcome.result, accuracy: acc, n: g.node_count(), edges: g.edge_count() };
    rec.write_json("partition.json", &report)?;
    rec.write_json("trace.json", &outcome.trace)?;
    rec.write_text("labels.tsv", &format_labels(&outcome.result.labels))?;
    if a.emit_embedding {
        rec.write_json("embedding.json", &outcome.embedding)?;
    }
    let mut inputs = vec![a.input.as_path()];
    inputs.extend(a.truth.as_deref());
    rec.finish("cluster", a, Some(a.seed), &inputs)
}

fn eig_table(set: &signed_spectra::eigen::EigenSet<f64>) -> String {
    let mut out = String::from("index\tre\tim\tmodulus\tresidual\n");
    for (i, p) in set.pairs.iter().enumerate() {
        let _ = writeln!(out, "{i}\t{:.16e}\t{:.16e}\t{:.16e}\t{:.16e}", p.value.re, p.value.im, p.modulus(), p.residual);
    }
    out
}

pub fn eigs(a: &EigsArgs) -> Result<(), CliError> {
    let g = load_edge_list(&a.input)?;
    let mut cfg = EigenConfig::<f64>::new(a.tau, a.seed);
    cfg.tol = a.tol;
    cfg.krylov_dim = a.krylov_dim;
    cfg.max_restarts = a.max_restarts;
    let mut rec = Recorder::new(&a.out)?;
    let set = top_eigenpairs(&g, &cfg)?;
    rec.write_text("eigs.tsv", &eig_table(&set))?;
    if a.oracle {
        let mut full = dense_eigen_oracle(&g.to_dense::<f64>())?;
        full.pairs.truncate(set.len());
        rec.write_text("oracle.tsv", &eig_table(&full))?;
    }
    rec.finish("eigs", a, Some(a.seed), &[a.input.as_path()])
}

#[derive(Serialize)]
struct LadderReport {
    block_sizes: Vec<usize>,
    perron_values: Vec<f64>,
    steps: Vec<signed_spectra::perturb::LadderStep<f64>>,
    /// Residual ratio between consecutive rungs.
    subspace_ratios: Vec<f64>,
    column_ratios: Vec<f64>,
}

fn ratios(v: &[f64]) -> Vec<f64> {
    v.windows(2).map(|w| w[0] / w[1]).collect()
}

pub fn perturb(a: &PerturbArgs) -> Result<(), CliError> {
    let mut rec = Recorder::new(&a.out)?;
    let mut inputs: Vec<&Path> = Vec::new();
    match a.mode {
        PerturbMode::Approx => {
            let m = PerturbationModel::<f64>::random_blocks(&a.blocks, a.density, a.seed)?
                .with_random_inter(a.inter_density, a.neg_fraction, a.seed.wrapping_add(1));
            let w = build_workspace(&m, a.seed)?;
            let steps = first_order_ladder(&m, &w, &m.inter, &a.eps)?;
            let sub: Vec<f64> = steps.iter().map(|s| s.subspace_residual).collect();
            let col: Vec<f64> = steps.iter().map(|s| s.column_residual).collect();
            let report = LadderReport {
                block_sizes: m.block_sizes.clone(),
                perron_values: w.lambdas.clone(),
                subspace_ratios: ratios(&sub),
                column_ratios: ratios(&col),
                steps,
            };
            rec.write_json("ladder.json", &report)?;
        }
        PerturbMode::Rotation => {
            let (sign, larger_u) = match a.case.as_str() {
                "1a" => (1, true),
                "1b" => (1, false),
                "2a" => (-1, true),
                "2b" => (-1, false),
                other => return Err(CliError::Usage(format!("--case must be 1a, 1b, 2a or 2b, got {other:?}"))),
            };
            if a.blocks.len() != 2 {
                return Err(CliError::Usage("rotation mode needs exactly two blocks".into()));
            }
            let m = PerturbationModel::<f64>::random_blocks(&a.blocks, a.density, a.seed)?;
            let (l0, _) = m.block_perron(0)?;
            let (l1, _) = m.block_perron(1)?;
            let u_block = if (l0 > l1) == larger_u { 0 } else { 1 };
            let u = m.block_nodes(u_block)[0];
            let v = m.block_nodes(1 - u_block)[0];
            let direction = match a.direction {
                DirectionArg::Forward => EdgeDirection::Forward,
                DirectionArg::Backward => EdgeDirection::Backward,
                DirectionArg::Both => EdgeDirection::Both,
            };
            let report = single_edge_rotation(&m, u, v, sign, direction)?;
            rec.write_json("rotation.json", &report)?;
        }
        PerturbMode::Regime => {
            let path = a.input.as_deref().ok_or_else(|| CliError::Usage("regime mode needs --input".into()))?;
            let g = load_edge_list(path)?;
            let report = classify_regime(&g.to_dense::<f64>(), a.m_cap)?;
            rec.write_json("regime.json", &report)?;
            inputs.push(path);
        }
    }
    rec.finish("perturb", a, Some(a.seed), &inputs)
}
