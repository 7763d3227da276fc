//! The two sliding-window learners: ordinary least squares on standardized
//! columns and a bagged CART random forest. Both are deterministic given
//! their inputs (and, for the forest, a seed), independent of thread count.

mod forest;
mod ols;

pub use forest::{
    average_importances, forest_fit, forest_importance, ForestHyperparams, ForestModel,
    ImportanceReport,
};
pub use ols::{ols_fit, OlsModel};
