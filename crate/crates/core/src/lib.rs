//! Free-space optical link modelling under fog, and the regression learners
//! used to predict link quality from weather-driven link features.
//!
//! The physical side covers visibility-driven extinction
//! ([`atmosphere`]) and the link budget ([`link_budget`]): received power,
//! data rate, SNR, capacity, OOK bit error rate and fog power penalty. The
//! learning side is implemented from scratch: CART trees, random forests,
//! gradient boosting and AdaBoost ([`learners`]), simplex-weighted stacking
//! ([`stacking`]) and a small MLP ([`neural`]).
//!
//! Data-parallel work (forest trees, stacking folds, table construction) runs
//! on rayon when the default `parallel` feature is on. Every parallel path
//! has a sequential twin selected by [`exec::Parallelism`], and both give
//! bit-identical results.

pub mod atmosphere;
pub mod dataset;
pub mod error;
pub mod exec;
pub mod learners;
pub mod link_budget;
pub mod metrics;
pub mod model;
pub mod neural;
pub mod stacking;
pub mod table;

pub use error::{Error, Result};
pub use exec::Parallelism;
pub use model::{FittedModel, Learner, LearnerSpec, ModelFile, Regressor};
pub use table::LabeledTable;
