//! Spectral analysis and clustering of directed signed graphs.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the common `f64` and `f32` instantiations.

pub mod eigen;
pub mod embedding;
pub mod graph;
pub mod linalg;
pub mod partition;
pub mod perturb;
pub mod report;
pub mod scalar;
pub mod scdsg;
pub mod syngen;

pub use graph::DirectedSignedGraph;
pub use scalar::Scalar;

pub type DenseMatrix64 = linalg::DenseMatrix<f64>;
pub type DenseMatrix32 = linalg::DenseMatrix<f32>;
pub type EigenSet64 = eigen::EigenSet<f64>;
pub type EigenSet32 = eigen::EigenSet<f32>;
pub type EigenConfig64 = eigen::EigenConfig<f64>;
pub type EigenConfig32 = eigen::EigenConfig<f32>;
pub type SpectralEmbedding64 = embedding::SpectralEmbedding<f64>;
pub type SpectralEmbedding32 = embedding::SpectralEmbedding<f32>;
pub type PartitionResult64 = partition::PartitionResult<f64>;
pub type PartitionResult32 = partition::PartitionResult<f32>;
pub type ScdsgConfig64 = scdsg::ScdsgConfig<f64>;
pub type ScdsgConfig32 = scdsg::ScdsgConfig<f32>;
pub type ScdsgOutcome64 = scdsg::ScdsgOutcome<f64>;
pub type PerturbationModel64 = perturb::PerturbationModel<f64>;
pub type PerturbWorkspace64 = perturb::PerturbWorkspace<f64>;
