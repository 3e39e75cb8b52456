//! Gaussian-process surrogate of the cost landscape and the acquisition-driven
//! optimization loop.

mod acquisition;
pub mod lowdisc;
mod model;
pub mod neldermead;
mod optimize;
mod space;

pub use acquisition::{acquisition, propose, AcquisitionOptions, Proposal};
pub use model::{
    log_marginal_likelihood, FitOptions, FitReport, GprModel, KernelHyperparams, Prediction, TrainingSet,
    NOISE_FLOOR,
};
pub use optimize::{
    optimize, Evaluator, History, HistoryRecord, HyperSchedule, HyperTraceEntry, IterationInfo, OptimizeConfig,
    OptimizeResult, Source,
};
pub use space::{Dimension, ParameterSpace};
