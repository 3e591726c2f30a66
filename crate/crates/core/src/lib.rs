//! Reading-task classification (normal vs task-specific reading) from
//! co-registered eye-tracking and EEG recordings.

pub mod analysis;
pub mod corpus;
pub mod dsp;
pub mod eeg;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod gaze;
pub mod learners;
pub mod seed;
pub mod text;

pub use error::{Error, Result};
