//! Closed-form stationary sets of the lab's limiting flows: critical signal
//! strengths and overlap roots for the spiked-tensor family, ring-and-point
//! taxonomies for the mixture classifiers, connectivity of the stationary
//! partitions, exact success probabilities, and endpoint classification.

pub mod bgmm;
pub mod classify;
pub mod error;
pub mod record;
pub mod tensor;
pub mod xor;

pub use bgmm::bgmm_fixed_points;
pub use classify::{classify_endpoint, UNRESOLVED};
pub use error::FixedPointError;
pub use record::{partition_point, Block, FixedPointRecord, FixedPointSet, Stability};
pub use tensor::{tensor_pca_fixed_points, tensor_pca_lambda_c};
pub use xor::{
    ratio_to_f64, xor_fixed_points, xor_success_probability,
    xor_success_probability_by_enumeration, ConnectivityReport, XOR_RIDGE_LIMIT,
};
