//! Accuracy metrics, the train/test experiment matrix, the data-scaling
//! study, and parser semantic evaluation.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::corpus::{ApiCall, Dialogue};
use crate::memn2n::{
    self, evaluate, grid_search, prepare_triplets, CandidateSet, CellOutcome, GridOutcome, Hyper,
    ModelConfig, ModelParams, NumericsError, PrepareError, Triplet, Vocab,
};
use crate::parser::{frame_to_api_call, parse_dialogue_traced, Lexicon};
use crate::rng::derive_seed;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalError {
    LengthMismatch { predictions: usize, gold: usize },
    AnswerOutOfRange { index: usize },
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::LengthMismatch { predictions, gold } => {
                write!(f, "{predictions} predictions against {gold} gold entries")
            }
            EvalError::AnswerOutOfRange { index } => {
                write!(f, "prediction {index} is outside the candidate list")
            }
        }
    }
}

impl core::error::Error for EvalError {}

/// Exact-match api-call accuracy over structured predictions, one per
/// dialogue, as a percentage.
pub fn api_call_accuracy(predictions: &[ApiCall], gold: &[ApiCall]) -> Result<f64, EvalError> {
    if predictions.len() != gold.len() {
        return Err(EvalError::LengthMismatch {
            predictions: predictions.len(),
            gold: gold.len(),
        });
    }
    let correct = predictions.iter().zip(gold).filter(|(p, g)| p == g).count();
    Ok(memn2n::percentage(correct, gold.len()))
}

/// Exact-match accuracy where predictions are candidate strings (a retrieval
/// model may return any candidate, not necessarily an api_call); compared
/// against the canonical serialization of the gold calls.
pub fn api_call_accuracy_texts<S: AsRef<str>>(
    predictions: &[S],
    gold: &[ApiCall],
) -> Result<f64, EvalError> {
    if predictions.len() != gold.len() {
        return Err(EvalError::LengthMismatch {
            predictions: predictions.len(),
            gold: gold.len(),
        });
    }
    let correct = predictions
        .iter()
        .zip(gold)
        .filter(|(p, g)| p.as_ref() == g.to_string())
        .count();
    Ok(memn2n::percentage(correct, gold.len()))
}

/// Anything that ranks the candidate list for a triplet.
pub trait CandidateScorer {
    fn score(&self, triplet: &Triplet) -> Vec<f64>;
}

/// Fraction of triplets whose argmax candidate is the gold answer, as a
/// percentage. Ties break to the lowest index.
pub fn per_response_accuracy<S: CandidateScorer>(
    scorer: &S,
    triplets: &[Triplet],
    candidate_count: usize,
) -> Result<f64, EvalError> {
    let mut correct = 0usize;
    for (i, t) in triplets.iter().enumerate() {
        if t.answer as usize >= candidate_count {
            return Err(EvalError::AnswerOutOfRange { index: i });
        }
        let scores = scorer.score(t);
        if scores.len() != candidate_count {
            return Err(EvalError::AnswerOutOfRange { index: i });
        }
        let mut best = 0usize;
        for (j, &s) in scores.iter().enumerate().skip(1) {
            if s > scores[best] {
                best = j;
            }
        }
        correct += usize::from(best as u32 == t.answer);
    }
    Ok(memn2n::percentage(correct, triplets.len()))
}

/// One train/test cell of the experiment matrix, with its architecture and
/// optimizer settings.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixExperiment {
    pub train: String,
    pub test: String,
    pub hops: usize,
    pub dim: usize,
    pub hyper: Hyper,
}

impl MatrixExperiment {
    /// The standard setup: one hop, 128 dimensions, default SGD settings.
    pub fn standard(train: &str, test: &str) -> Self {
        MatrixExperiment {
            train: train.to_string(),
            test: test.to_string(),
            hops: MATRIX_ARCH.hops,
            dim: MATRIX_ARCH.dim,
            hyper: Hyper::default(),
        }
    }

    fn model_key(&self) -> String {
        format!(
            "{}|h{}|d{}|lr{}|e{}|b{}",
            self.train, self.hops, self.dim, self.hyper.lr, self.hyper.epochs, self.hyper.batch
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSpec {
    pub experiments: Vec<MatrixExperiment>,
    pub seed: u64,
    pub memory_size: usize,
}

/// Accuracy numbers for one matrix row. Train accuracy is the final model
/// re-scored on its own training triplets.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixRow {
    pub train: String,
    pub test: String,
    pub hops: usize,
    pub dim: usize,
    pub train_api_accuracy: f64,
    pub test_api_accuracy: f64,
    pub train_per_response_accuracy: f64,
    pub test_per_response_accuracy: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixResult {
    pub rows: Vec<MatrixRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MatrixError {
    UnknownCorpus { label: String },
    Prepare(PrepareError),
    Numerics(NumericsError),
}

impl fmt::Display for MatrixError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixError::UnknownCorpus { label } => write!(f, "unknown corpus label {label:?}"),
            MatrixError::Prepare(e) => write!(f, "{e}"),
            MatrixError::Numerics(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for MatrixError {}

impl From<PrepareError> for MatrixError {
    fn from(e: PrepareError) -> Self {
        MatrixError::Prepare(e)
    }
}

impl From<NumericsError> for MatrixError {
    fn from(e: NumericsError) -> Self {
        MatrixError::Numerics(e)
    }
}

/// A trained model bundled with its shared data tables, ready to be reused
/// across every matrix row with the same train corpus.
pub struct TrainedCell {
    pub label: String,
    pub params: ModelParams,
    pub epoch_losses: Vec<f64>,
    pub seed: u64,
}

/// Runs every experiment, training once per distinct train corpus and
/// reusing that checkpoint across its rows. The vocabulary and candidate set
/// span all referenced corpora so no cell ever meets an unknown token.
pub fn run_matrix(
    corpora: &BTreeMap<String, Vec<Dialogue>>,
    spec: &MatrixSpec,
) -> Result<(MatrixResult, Vec<TrainedCell>), MatrixError> {
    let slices: Vec<&[Dialogue]> = corpora.values().map(Vec::as_slice).collect();
    let vocab = Vocab::build(&slices, spec.memory_size);
    let cands = CandidateSet::build(&slices, &vocab).map_err(PrepareError::Vocab)?;

    let mut triplet_cache: BTreeMap<String, Vec<Triplet>> = BTreeMap::new();
    for (label, dialogues) in corpora {
        triplet_cache.insert(label.clone(), prepare_triplets(dialogues, &vocab, &cands)?);
    }
    let lookup = |label: &str| -> Result<&Vec<Triplet>, MatrixError> {
        triplet_cache.get(label).ok_or_else(|| MatrixError::UnknownCorpus {
            label: label.to_string(),
        })
    };

    let mut models: BTreeMap<String, TrainedCell> = BTreeMap::new();
    let mut rows = Vec::with_capacity(spec.experiments.len());
    for exp in &spec.experiments {
        let train_triplets = lookup(&exp.train)?;
        let test_triplets = lookup(&exp.test)?;
        let key = exp.model_key();
        if !models.contains_key(&key) {
            let cell_seed = derive_seed(spec.seed, models.len() as u64);
            let trained = train_once(exp, train_triplets, &cands, &vocab, cell_seed)?;
            models.insert(
                key.clone(),
                TrainedCell {
                    label: exp.train.clone(),
                    params: trained.0,
                    epoch_losses: trained.1,
                    seed: cell_seed,
                },
            );
        }
        let cell = &models[&key];
        let on_train = evaluate(&cell.params, train_triplets, &cands);
        let on_test = evaluate(&cell.params, test_triplets, &cands);
        rows.push(MatrixRow {
            train: exp.train.clone(),
            test: exp.test.clone(),
            hops: exp.hops,
            dim: exp.dim,
            train_api_accuracy: on_train.api_call_accuracy(),
            test_api_accuracy: on_test.api_call_accuracy(),
            train_per_response_accuracy: on_train.per_response_accuracy(),
            test_per_response_accuracy: on_test.per_response_accuracy(),
            seed: cell.seed,
        });
    }
    Ok((MatrixResult { rows }, models.into_values().collect()))
}

/// A fixed (hops, dim) architecture choice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedArch {
    pub hops: usize,
    pub dim: usize,
}

fn train_once(
    exp: &MatrixExperiment,
    train_triplets: &[Triplet],
    cands: &CandidateSet,
    vocab: &Vocab,
    seed: u64,
) -> Result<(ModelParams, Vec<f64>), MatrixError> {
    let config = ModelConfig {
        hops: exp.hops,
        dim: exp.dim,
        vocab_size: vocab.len(),
        memory_size: vocab.memory_size,
        max_sentence_len: vocab.max_sentence_len,
    };
    let init = ModelParams::init(config, derive_seed(seed, 0));
    let result = memn2n::train(train_triplets, &init, cands, &exp.hyper, derive_seed(seed, 1))?;
    Ok((result.params, result.epoch_losses))
}

/// Architecture used for the four-cell matrix: one hop, 128 dimensions.
pub const MATRIX_ARCH: FixedArch = FixedArch { hops: 1, dim: 128 };

/// Fixed-width rendering shaped like the api-call accuracy table.
pub fn render_matrix_table(result: &MatrixResult) -> String {
    let mut rows: Vec<[String; 3]> = Vec::new();
    rows.push([
        "train / test set configuration".to_string(),
        "train accuracy".to_string(),
        "test accuracy".to_string(),
    ]);
    for row in &result.rows {
        rows.push([
            format!("{} / {}", row.train, row.test),
            format!("{:.1}", row.train_api_accuracy),
            format!("{:.1}", row.test_api_accuracy),
        ]);
    }
    render_columns(&rows)
}

/// One row of the data-scaling study: a full grid at one train-set size.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub size: usize,
    pub grid: GridOutcome,
}

impl ScalingRow {
    pub fn best(&self) -> &CellOutcome {
        self.grid.best_cell()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingResult {
    pub rows: Vec<ScalingRow>,
}

/// Grid-searches hops and dims independently per train-set size against one
/// fixed test set.
#[allow(clippy::too_many_arguments)]
pub fn run_scaling(
    train_sets: &[(usize, Vec<Dialogue>)],
    test_set: &[Dialogue],
    hops: &[usize],
    dims: &[usize],
    hyper: &Hyper,
    seed: u64,
    memory_size: usize,
) -> Result<ScalingResult, MatrixError> {
    let mut rows = Vec::with_capacity(train_sets.len());
    for (row_index, (size, train)) in train_sets.iter().enumerate() {
        let slices: [&[Dialogue]; 2] = [train.as_slice(), test_set];
        let vocab = Vocab::build(&slices, memory_size);
        let cands = CandidateSet::build(&slices, &vocab).map_err(PrepareError::Vocab)?;
        let train_triplets = prepare_triplets(train, &vocab, &cands)?;
        let test_triplets = prepare_triplets(test_set, &vocab, &cands)?;
        let grid = grid_search(
            &train_triplets,
            &test_triplets,
            &cands,
            &vocab,
            hops,
            dims,
            hyper,
            derive_seed(seed, row_index as u64),
        )?;
        rows.push(ScalingRow { size: *size, grid });
    }
    Ok(ScalingResult { rows })
}

/// Fixed-width rendering shaped like the extended-data table: best grid cell
/// per train-set size.
pub fn render_scaling_table(result: &ScalingResult) -> String {
    let mut rows: Vec<[String; 5]> = Vec::new();
    rows.push([
        "training dialogues".to_string(),
        "memory hops".to_string(),
        "embedding size".to_string(),
        "train accuracy".to_string(),
        "test accuracy".to_string(),
    ]);
    for row in &result.rows {
        let best = row.best();
        rows.push([
            format!("{}", row.size),
            format!("{}", best.cell.hops),
            format!("{}", best.cell.dim),
            format!("{:.1}", best.train_api_accuracy),
            format!("{:.1}", best.test_api_accuracy),
        ]);
    }
    render_columns(&rows)
}

fn render_columns<const N: usize>(rows: &[[String; N]]) -> String {
    let mut widths = [0usize; N];
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    for row in rows {
        for (i, (cell, w)) in row.iter().zip(widths).enumerate() {
            if i > 0 {
                out.push_str(" | ");
            }
            out.push_str(cell);
            for _ in cell.len()..w {
                out.push(' ');
            }
        }
        // Trim trailing spaces from the last column.
        while out.ends_with(' ') {
            out.pop();
        }
        out.push('\n');
    }
    out
}

/// Parser-side evaluation over a corpus.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParserEval {
    pub dialogues: usize,
    /// Dialogues parsed to completion (the lexicon is total, so this always
    /// equals `dialogues`; reported for the record).
    pub parsed: usize,
    /// Final frame carries every gold slot value.
    pub slots_present: usize,
    /// Final frame carries no incorrect slot value.
    pub no_incorrect: usize,
    /// Both checks at once: the semantic-accuracy criterion.
    pub semantic_correct: usize,
    /// Exact api_call match via frame conversion.
    pub api_correct: usize,
    pub backtrack_repairs: usize,
    pub fallback_repairs: usize,
}

impl ParserEval {
    pub fn parse_completion(&self) -> f64 {
        memn2n::percentage(self.parsed, self.dialogues)
    }

    pub fn semantic_accuracy(&self) -> f64 {
        memn2n::percentage(self.semantic_correct, self.dialogues)
    }

    pub fn api_call_accuracy(&self) -> f64 {
        memn2n::percentage(self.api_correct, self.dialogues)
    }
}

/// Parses every dialogue and scores the final frames against the gold
/// api_calls: gold values present, no incorrect value, exact api_call match.
pub fn parser_semantic_eval(dialogues: &[Dialogue], lexicon: &Lexicon) -> ParserEval {
    let mut eval = ParserEval::default();
    for d in dialogues {
        eval.dialogues += 1;
        let outcome = parse_dialogue_traced(d, lexicon);
        eval.parsed += 1;
        eval.backtrack_repairs += outcome.backtrack_repairs;
        eval.fallback_repairs += outcome.fallback_repairs;

        let gold = d.api_call.values();
        let frame_values: Vec<Option<&str>> = crate::generator::Slot::ALL
            .iter()
            .map(|&s| outcome.frame.value(s))
            .collect();
        let present = gold
            .iter()
            .zip(&frame_values)
            .all(|(g, f)| *f == Some(*g));
        let incorrect = frame_values
            .iter()
            .zip(&gold)
            .any(|(f, g)| matches!(f, Some(v) if v != g));
        eval.slots_present += usize::from(present);
        eval.no_incorrect += usize::from(!incorrect);
        eval.semantic_correct += usize::from(present && !incorrect);
        let exact = frame_to_api_call(&outcome.frame)
            .map(|api| api == d.api_call)
            .unwrap_or(false);
        eval.api_correct += usize::from(exact);
    }
    eval
}
