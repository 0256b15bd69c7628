//! Seeded ancestral samplers and the featurized comparison task.

mod feature_task;
mod rng;
mod sample;

pub use feature_task::{make_feature_task, FeaturePoint, FeatureTask, FeatureTaskConfig};
pub use rng::{derive_seed, Rng};
pub use sample::{sample, sample_corpus};
