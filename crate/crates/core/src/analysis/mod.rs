//! Quantities derived from fitted frontiers and allocation results.

mod benchmark;
mod efficiency;
mod marginal;
mod mse;

pub use benchmark::{benchmark_dea_allocation, AggregateLimit, DeaBenchmark, DeaScenario};
pub use efficiency::{
    allocative_efficiency, current_output_grouped, current_output_nearest, EfficiencyReport, ModelEfficiency,
};
pub use marginal::{marginal_products, DmuMarginalProduct, MarginalProductReport};
pub use mse::{in_hull, oos_mse, oos_predictions, MsePrediction, MseYear, OosPrediction};
