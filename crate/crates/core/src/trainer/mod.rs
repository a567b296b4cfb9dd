//! Training data capture, the periodic-corrected training loop and
//! closed-loop rollouts of the learned stepper.
//!
//! Every `period` frames of a sequence the trainer rolls the current
//! network forward from the sequence start (or the period start), extracts
//! features from the predicted state and trains on them against the
//! physics target of that frame. Without a period it is plain
//! backpropagation on adjacent-frame pairs.

mod config;
mod dataset;
mod rollout;
mod training;

pub use config::{RolloutRestart, TrainConfig};
pub use dataset::{
    capture_sequence, CaptureSummary, DatasetMeta, DatasetReader, DatasetSummary, DatasetWriter, FrameDataset,
    SampleFrame, Sequence, SequenceEntry, DATASET_MAGIC, DATASET_VERSION, RECORD_BYTES, RECORD_FLOATS,
};
pub use rollout::{rollout, rollout_last, state_features, LearnedStepper, Rollout};
pub use training::{
    fit_normalization, mean_position_error, train, train_baseline_bp, train_pcnet, RolloutContext, TrainEvent,
    TrainObserver, TrainReport,
};
