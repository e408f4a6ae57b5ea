//! Soft-margin support vector machines.

mod binary;
mod kernel;
mod multiclass;

pub use binary::{
    dual_objective, kkt_violation, solve_dual, train_binary, BinaryModel, DualSolution, TrainConfig, TrainMeta,
};
pub use kernel::{auto_gamma, Kernel, KernelSpec};
pub use multiclass::{
    train_multiclass, ModelParseError, MulticlassModel, Prediction, Standardizer, MODEL_FORMAT, MODEL_VERSION,
};
