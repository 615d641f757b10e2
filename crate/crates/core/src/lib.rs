//! Automatic gradient boosting for tabular data.
//!
//! [`pipeline::autogbt_fit`] encodes categorical columns, tunes boosting
//! hyperparameters with a Gaussian-process optimizer, tunes decision
//! thresholds for classification and returns a model that can be saved with
//! [`pipeline::PipelineModel::save`].

pub mod bench;
pub mod data;
pub mod encoding;
pub mod error;
pub mod gbt;
pub mod metrics;
pub mod pipeline;
pub mod smbo;
pub mod threshold;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/data.md")]
    mod data {}
    #[doc = include_str!("../../../book/src/encoding.md")]
    mod encoding {}
    #[doc = include_str!("../../../book/src/boosting.md")]
    mod boosting {}
    #[doc = include_str!("../../../book/src/tuning.md")]
    mod tuning {}
    #[doc = include_str!("../../../book/src/thresholds.md")]
    mod thresholds {}
    #[doc = include_str!("../../../book/src/pipeline.md")]
    mod pipeline {}
    #[doc = include_str!("../../../book/src/benchmark.md")]
    mod benchmark {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
