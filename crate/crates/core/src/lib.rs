//! Landmark map (LAMA): an online self-organizing map whose training
//! alternates ordinary data-driven updates with landmark-driven updates that
//! pin chosen data to chosen nodes.
//!
//! The crate covers the map itself ([`grid`], [`schedules`], [`trainer`]),
//! its error indices ([`metrics`]), input data ([`datasets`]), rendering
//! ([`viz`]), and reproducible experiment presets ([`experiment`]).

pub mod datasets;
pub mod error;
pub mod experiment;
pub mod grid;
pub mod metrics;
pub mod schedules;
pub mod trainer;
pub mod viz;

pub use error::{LamaError, Result};
pub use grid::{project_all, winner, winner_pair, Codebook, Dataset, LandmarkSet, NodeGrid};
pub use metrics::ErrorReport;
pub use schedules::TrainConfig;
pub use trainer::{train, train_with, TrainOptions, TrainTrace};
