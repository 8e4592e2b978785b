//! Spectral clustering of directed signed graphs by forward selection of
//! eigenvectors under signed modularity.

use serde::Serialize;
use thiserror::Error;

use crate::eigen::{top_eigenpairs, EigenConfig, EigenError, EigenSet};
use crate::embedding::{normalize_rows, pairwise_cluster_angles, split_pairs, EmbeddingError, SignScreen, SpectralEmbedding};
use crate::graph::DirectedSignedGraph;
use crate::partition::{dbi, kmeans_embedding, signed_modularity_with, KMeansConfig, NullModel, PartitionError, PartitionResult};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum ScdsgError {
    #[error("alpha must lie in [0, 1], got {0}")]
    InvalidAlpha(f64),
    #[error("tau must be at least 1")]
    TauZero,
    #[error("basis and candidate are both empty")]
    NothingToEmbed,
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScdsgConfig<T> {
    pub tau: usize,
    pub alpha: T,
    pub seed: u64,
    pub kmeans_restarts: usize,
    pub eigen_tol: T,
    pub krylov_dim: Option<usize>,
    pub null_model: NullModel,
    pub sign_screen: SignScreen<T>,
    pub zero_tol: T,
}

impl<T: Scalar> ScdsgConfig<T> {
    pub fn new(alpha: T, seed: u64) -> Self {
        Self {
            tau: 50,
            alpha,
            seed,
            kmeans_restarts: 10,
            eigen_tol: T::default_eigen_tol(),
            krylov_dim: None,
            null_model: NullModel::Directed,
            sign_screen: SignScreen::NegativeMass { max_fraction: T::lit(0.1) },
            zero_tol: T::lit(crate::embedding::DEFAULT_ZERO_TOL),
        }
    }

    fn validate(&self) -> Result<(), ScdsgError> {
        if !(self.alpha >= T::zero() && self.alpha <= T::one()) {
            return Err(ScdsgError::InvalidAlpha(self.alpha.as_f64()));
        }
        if self.tau == 0 {
            return Err(ScdsgError::TauZero);
        }
        Ok(())
    }
}

impl<T: Scalar> Default for ScdsgConfig<T> {
    fn default() -> Self {
        Self::new(T::lit(0.95), 0)
    }
}

/// Audit trail of the forward selection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScdsgTrace<T> {
    /// Eigenpair ids (indices into the eigen set) in the order they were tried.
    pub candidate_order: Vec<usize>,
    pub accepted: Vec<bool>,
    /// Score of each candidate, `None` when it could not be clustered.
    pub candidate_scores: Vec<Option<T>>,
    /// Modularity after each acceptance.
    pub modularity_path: Vec<T>,
    pub initial_basis: Vec<usize>,
    /// Score of the basis-only partition that initialises the best score.
    pub baseline_modularity: Option<T>,
    /// Set when no uniformly signed eigenvector was found and the result is
    /// the single-cluster partition.
    pub fallback_trivial: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateEval<T> {
    pub k: usize,
    pub labels: Vec<usize>,
    pub modularity: T,
    pub inertia: T,
    /// Row-normalised embedding that was clustered.
    pub embedding: SpectralEmbedding<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScdsgOutcome<T> {
    pub result: PartitionResult<T>,
    pub trace: ScdsgTrace<T>,
    pub eigen: EigenSet<T>,
    pub embedding: SpectralEmbedding<T>,
}

/// Clusters the embedding of `basis` plus an optional candidate into
/// `|basis| + 1` clusters (or `|basis|` without a candidate) and scores the
/// labels on the graph. A complex eigenpair adds two columns but one cluster.
pub fn evaluate_candidate<T: Scalar>(
    g: &DirectedSignedGraph,
    set: &EigenSet<T>,
    basis: &[usize],
    candidate: Option<usize>,
    cfg: &ScdsgConfig<T>,
) -> Result<CandidateEval<T>, ScdsgError> {
    let mut ids = basis.to_vec();
    ids.extend(candidate);
    if ids.is_empty() {
        return Err(ScdsgError::NothingToEmbed);
    }
    let k = ids.len();
    let embedding = normalize_rows(&split_pairs(set, &ids)?, cfg.zero_tol);
    let km = KMeansConfig { k, restarts: cfg.kmeans_restarts, max_iter: 300, seed: cfg.seed };
    let fit = kmeans_embedding(&embedding, &km)?;
    let modularity = signed_modularity_with(g, &fit.labels, cfg.null_model)?;
    Ok(CandidateEval { k, labels: fit.labels, modularity, inertia: fit.inertia, embedding })
}

pub fn run_scdsg<T: Scalar>(g: &DirectedSignedGraph, cfg: &ScdsgConfig<T>) -> Result<ScdsgOutcome<T>, ScdsgError> {
    cfg.validate()?;
    let tau = cfg.tau.min(g.node_count());
    let eig_cfg = EigenConfig { tau, tol: cfg.eigen_tol, max_restarts: 300, krylov_dim: cfg.krylov_dim, seed: cfg.seed };
    let set = top_eigenpairs(g, &eig_cfg)?;
    run_scdsg_with_eigs(g, set, cfg)
}

/// Forward selection on a precomputed eigen set.
pub fn run_scdsg_with_eigs<T: Scalar>(
    g: &DirectedSignedGraph,
    set: EigenSet<T>,
    cfg: &ScdsgConfig<T>,
) -> Result<ScdsgOutcome<T>, ScdsgError> {
    cfg.validate()?;
    let n = g.node_count();
    let initial = cfg.sign_screen.select(&set);
    let mut trace = ScdsgTrace {
        candidate_order: Vec::new(),
        accepted: Vec::new(),
        candidate_scores: Vec::new(),
        modularity_path: Vec::new(),
        initial_basis: initial.clone(),
        baseline_modularity: None,
        fallback_trivial: false,
    };

    if initial.is_empty() {
        log::warn!("no uniformly signed eigenvector among the top {}; returning one cluster", set.len());
        trace.fallback_trivial = true;
        let labels = vec![0; n];
        let modularity = signed_modularity_with(g, &labels, cfg.null_model)?;
        let embedding = normalize_rows(&split_pairs(&set, &[])?, cfg.zero_tol);
        let result = PartitionResult { k: 1, labels, modularity, dbi: None, avg_angle: None, inertia: T::zero() };
        return Ok(ScdsgOutcome { result, trace, eigen: set, embedding });
    }

    let mut basis = initial.clone();
    let mut best = evaluate_candidate(g, &set, &basis, None, cfg)?;
    trace.baseline_modularity = Some(best.modularity);

    for id in 0..set.len() {
        if initial.contains(&id) {
            continue;
        }
        trace.candidate_order.push(id);
        let eval = match evaluate_candidate(g, &set, &basis, Some(id), cfg) {
            Ok(e) => e,
            Err(ScdsgError::Partition(PartitionError::KExceedsDistinct { .. })) => {
                trace.accepted.push(false);
                trace.candidate_scores.push(None);
                continue;
            }
            Err(e) => return Err(e),
        };
        trace.candidate_scores.push(Some(eval.modularity));
        if eval.modularity >= cfg.alpha * best.modularity {
            basis.push(id);
            trace.accepted.push(true);
            trace.modularity_path.push(eval.modularity);
            best = eval;
        } else {
            trace.accepted.push(false);
        }
    }

    let k = best.k;
    let (dbi_v, avg_angle) = if k >= 2 {
        let d = dbi(&best.embedding.coords, &best.labels).ok();
        let a = pairwise_cluster_angles(&best.embedding, &best.labels).ok().and_then(|a| a.average);
        (d, a)
    } else {
        (None, None)
    };
    let result = PartitionResult {
        k,
        labels: best.labels,
        modularity: best.modularity,
        dbi: dbi_v,
        avg_angle,
        inertia: best.inertia,
    };
    Ok(ScdsgOutcome { result, trace, eigen: set, embedding: best.embedding })
}
