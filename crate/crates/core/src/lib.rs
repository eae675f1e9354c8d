//! Shared plumbing for the SGD laboratory: summary-statistic vectors and
//! trajectories, reproducible RNG streams, and trajectory CSV I/O.

pub mod error;
pub mod math;
pub mod rng;
pub mod summary;
pub mod trajectory;

pub use error::CoreError;
pub use rng::{make_rng, RngStream};
pub use summary::{Schema, SummaryVec};
pub use trajectory::{
    format_f64, read_csv, read_csv_path, sup_distance, sup_distance_on_grid, write_csv,
    write_csv_path, write_csv_string, Trajectory,
};
