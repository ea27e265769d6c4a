//! The binary classifier behind the tests: a small residual MLP, its Adam
//! trainer, checkpoints, and the score functions built on top of it.

mod checkpoint;
mod mlp;
mod score;
mod train;

pub use checkpoint::{
    checkpoint_from_str, checkpoint_to_string, load_checkpoint, save_checkpoint, FORMAT_VERSION,
};
pub use mlp::{degrade, sigmoid, Activation, Mlp, MlpShape};
pub use score::{
    BoundaryScore, ConstantScore, FnScore, MlpScore, NoisyScore, OracleScore, ScoreFunction,
};
pub use train::{init_network, train, Adam, TrainConfig, TrainOutcome};
