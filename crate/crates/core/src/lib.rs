//! Multiscale covariance tensor fields of weighted point measures: the
//! fields themselves, geometry recovered from their spectra, Wasserstein
//! stability certificates, and tensorized-metric single-linkage clustering.

// Negated float comparisons are used on purpose so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assignment;
pub mod clustering;
pub mod ctf;
pub mod error;
pub mod geometry;
pub mod kernels;
pub mod measures;
pub mod metric;
pub mod tensor;
pub mod transport;

pub use clustering::{ClusterAssignment, CutMode, Dendrogram, TensorizedMetricParams};
pub use ctf::{Acceleration, FieldGrid, GradientMode};
pub use error::{Error, Result};
pub use kernels::{KernelConstants, Profile, RadialKernel};
pub use measures::{LabeledDataset, WeightedMeasure};
pub use metric::DistanceMatrix;
pub use tensor::{CovTensor, SpectrumSummary};
pub use transport::{Correspondence, StabilityReport, TransportPlan};
