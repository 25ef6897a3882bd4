//! Capacity-parameterized rerankers and the three training objectives,
//! plus the sweep machinery that produces scaling-law observations.

mod batch;
mod features;
mod loss;
mod scorer;
mod sweep;
mod train;

pub use batch::{BatchConfig, BatchStream, TrainInstance};
pub use features::Featurizer;
pub use loss::{listwise_listnet_loss, pairwise_ranknet_loss, pointwise_loss};
pub use scorer::{Scorer, ScorerConfig};
pub use sweep::{sweep, SweepRequest};
pub use train::{checkpoint_steps, train_run, Checkpoint, TrainData, TrainSchedule};
