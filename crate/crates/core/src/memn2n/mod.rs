//! From-scratch end-to-end memory network for next-response retrieval.
//!
//! Dialogues become `<story, question, answer>` triplets; stories are encoded
//! into memory vectors with position and temporal encoding; a softmax
//! attention over memories augments the question vector across one or more
//! hops; candidates are ranked by dot product against the hop output. One
//! embedding matrix backs input memories, output memories, the question and
//! the candidates (adjacent tying). Training is plain SGD with manually
//! derived gradients.

mod checkpoint;
mod data;
mod model;
mod train;

pub use checkpoint::{Checkpoint, CheckpointError};
pub use data::{
    prepare_triplets, CandidateSet, PrepareError, Triplet, Vocab, VocabError, SILENCE,
    SPEAKER_SYSTEM, SPEAKER_USER,
};
pub use model::{
    attention, encode_candidates, encode_memory, forward, position_encoding, CandidateEncodings,
    EncodedStory, ModelConfig, ModelParams,
};
pub use train::{
    evaluate, grid_cells, grid_search, loss_and_grads, percentage, predict_api_calls,
    run_grid_cell, select_best, train, CellOutcome, EvalCounts, Grads, GridCell, GridOutcome,
    Hyper, NumericsError, TrainResult,
};

/// Gradient-norm cap applied before every SGD step.
pub const GRAD_CLIP: f64 = 40.0;

/// Standard deviation of the Gaussian parameter initialization.
pub const INIT_SIGMA: f64 = 0.1;

/// Default cap on stored memories (most recent sentences win).
pub const DEFAULT_MEMORY_SIZE: usize = 50;
