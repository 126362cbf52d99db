//! Social bot detection engine fusing a causal-transformer text channel
//! with a standardized MLP behavior channel.

pub mod aigc_signals;
pub mod behavior_channel;
pub mod behavior_model;
pub mod corpus;
pub mod detector;
pub mod error;
pub mod experiments;
pub mod features;
pub mod nn;
pub mod profile_features;
pub mod text_channel;

pub use error::{Error, Result};
