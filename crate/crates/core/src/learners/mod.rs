//! Regression learners: CART trees, least-squares gradient boosting, and
//! ridge regression.

mod gbm;
mod ridge;
mod tree;

pub use gbm::{fit_gbm, GbmConfig, GbmModel, GBM_FORMAT};
pub use ridge::{fit_ridge, RidgeModel};
pub use tree::{fit_tree, TreeNode, TreeParams};
