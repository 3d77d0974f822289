//! Cross-entropy loss, manual backpropagation, SGD training, grid search.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;

use super::data::{CandidateSet, Triplet, Vocab};
use super::model::{
    argmax, dot, encode_candidates, encode_candidates_into, forward, hop_forward,
    CandidateEncodings, HopTrace, ModelConfig, ModelParams,
};
use crate::rng::{derive_seed, rng_from_seed};

/// Optimizer settings. Plain SGD: no momentum, no annealing.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyper {
    pub lr: f64,
    pub epochs: usize,
    pub batch: usize,
}

impl Default for Hyper {
    fn default() -> Self {
        Hyper {
            lr: 0.01,
            epochs: 100,
            batch: 8,
        }
    }
}

/// Gradients mirroring [`ModelParams`] matrices.
#[derive(Debug, Clone)]
pub struct Grads {
    pub embedding: Vec<f64>,
    pub temporal: Vec<f64>,
}

impl Grads {
    pub fn zeros(config: &ModelConfig) -> Self {
        Grads {
            embedding: vec![0.0; config.vocab_size * config.dim],
            temporal: vec![0.0; config.memory_size * config.dim],
        }
    }

    fn clear(&mut self) {
        self.embedding.iter_mut().for_each(|x| *x = 0.0);
        self.temporal.iter_mut().for_each(|x| *x = 0.0);
    }

    fn norm(&self) -> f64 {
        let sq: f64 = self
            .embedding
            .iter()
            .chain(self.temporal.iter())
            .map(|x| x * x)
            .sum();
        libm::sqrt(sq)
    }
}

/// Non-finite loss, with the batch-local triplet index and, once training
/// context is known, the epoch/batch coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NumericsError {
    pub triplet: usize,
    pub epoch: Option<usize>,
    pub batch: Option<usize>,
}

impl fmt::Display for NumericsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "non-finite loss at triplet {}", self.triplet)?;
        if let (Some(e), Some(b)) = (self.epoch, self.batch) {
            write!(f, " (epoch {e}, batch {b})")?;
        }
        Ok(())
    }
}

impl core::error::Error for NumericsError {}

/// Reusable buffers for the batched backward pass. The candidate matrix and
/// its gradient accumulator are hundreds of kilobytes; allocating them per
/// batch dominated the epoch time, so the trainer owns one of these.
pub struct BatchScratch {
    enc: CandidateEncodings,
    traces: Vec<HopTrace>,
    u_final: Vec<f64>,
    gmat: Vec<f64>,
    d_u_final: Vec<f64>,
    v_acc: Vec<f64>,
    d_u: Vec<f64>,
    d_u_next: Vec<f64>,
    d_m: Vec<f64>,
    dp: Vec<f64>,
}

impl BatchScratch {
    pub fn new() -> Self {
        BatchScratch {
            enc: CandidateEncodings {
                enc: Vec::new(),
                count: 0,
            },
            traces: Vec::new(),
            u_final: Vec::new(),
            gmat: Vec::new(),
            d_u_final: Vec::new(),
            v_acc: Vec::new(),
            d_u: Vec::new(),
            d_u_next: Vec::new(),
            d_m: Vec::new(),
            dp: Vec::new(),
        }
    }
}

impl Default for BatchScratch {
    fn default() -> Self {
        Self::new()
    }
}

fn reset(buf: &mut Vec<f64>, len: usize) {
    buf.clear();
    buf.resize(len, 0.0);
}

/// Mean cross-entropy over the batch plus analytic gradients for the
/// embedding and temporal matrices, flowing through the question, every hop's
/// attention, the memories in both roles, and the candidate encodings. The
/// padding row's gradient is pinned to zero.
pub fn loss_and_grads(
    batch: &[&Triplet],
    params: &ModelParams,
    cands: &CandidateSet,
) -> Result<(f64, Grads), NumericsError> {
    let mut grads = Grads::zeros(&params.config);
    let mut scratch = BatchScratch::new();
    encode_candidates_into(&mut scratch.enc, cands, params);
    let loss = accumulate_batch(batch, params, cands, &mut grads, &mut scratch)?;
    Ok((loss, grads))
}

/// Core of [`loss_and_grads`]. The candidate matrix is by far the largest
/// operand, so both the scoring and its backward run as batch-wide sweeps
/// that stream each candidate row once, not once per triplet.
fn accumulate_batch(
    batch: &[&Triplet],
    params: &ModelParams,
    cands: &CandidateSet,
    grads: &mut Grads,
    scratch: &mut BatchScratch,
) -> Result<f64, NumericsError> {
    assert!(!batch.is_empty(), "batch must be non-empty");
    let dim = params.config.dim;
    let b = batch.len();
    let inv_batch = 1.0 / b as f64;
    let BatchScratch {
        enc,
        traces,
        u_final,
        gmat,
        d_u_final,
        v_acc,
        d_u,
        d_u_next,
        d_m,
        dp,
    } = scratch;
    let c = enc.count;

    // Hop-side forward per triplet; final queries packed row-major.
    traces.clear();
    traces.extend(batch.iter().map(|t| hop_forward(&t.story, &t.question, params)));
    reset(u_final, b * dim);
    for (t, trace) in traces.iter().enumerate() {
        u_final[t * dim..(t + 1) * dim].copy_from_slice(trace.u_final());
    }

    // Sweep 1: logits[t][j] = u_final[t] . enc[j].
    reset(gmat, b * c);
    for j in 0..c {
        let crow = enc.row(j, dim);
        for t in 0..b {
            gmat[t * c + j] = dot(&u_final[t * dim..(t + 1) * dim], crow);
        }
    }

    // Softmax + cross-entropy per triplet; gmat becomes the scaled upstream
    // (softmax - onehot) / batch in place.
    let mut total_loss = 0.0;
    for (t, triplet) in batch.iter().enumerate() {
        let logits = &mut gmat[t * c..(t + 1) * c];
        let answer = triplet.answer as usize;
        let max = logits.iter().fold(f64::NEG_INFINITY, |a, &x| a.max(x));
        let mut z = 0.0;
        for &l in logits.iter() {
            z += libm::exp(l - max);
        }
        let lse = max + libm::log(z);
        let loss = lse - logits[answer];
        if !loss.is_finite() {
            return Err(NumericsError {
                triplet: t,
                epoch: None,
                batch: None,
            });
        }
        total_loss += loss;
        for l in logits.iter_mut() {
            *l = libm::exp(*l - lse) * inv_batch;
        }
        logits[answer] -= inv_batch;
    }

    // Sweep 2: dL/du_final[t] += sum_j g . enc[j]; candidate upstream
    // v[j] = sum_t g . u_final[t], scattered into the embedding afterwards.
    reset(d_u_final, b * dim);
    reset(v_acc, c * dim);
    for j in 0..c {
        let crow = enc.row(j, dim);
        let vrow = &mut v_acc[j * dim..(j + 1) * dim];
        for t in 0..b {
            let g = gmat[t * c + j];
            axpy(&mut d_u_final[t * dim..(t + 1) * dim], crow, g);
            axpy(vrow, &u_final[t * dim..(t + 1) * dim], g);
        }
    }

    // Hop-side backward per triplet.
    reset(d_u, dim);
    reset(d_u_next, dim);
    for (t, (triplet, trace)) in batch.iter().zip(traces.iter()).enumerate() {
        let n = trace.story.n;
        d_u.copy_from_slice(&d_u_final[t * dim..(t + 1) * dim]);

        // `d_u` holds dL/d(u^{k+1}); memories collect contributions from
        // both their attention and output roles.
        reset(d_m, n * dim);
        for k in (0..params.config.hops).rev() {
            let u_k = &trace.u[k];
            let p = &trace.p[k];
            d_u_next.copy_from_slice(d_u);

            // dL/dp_i = do . m_i, softmax backward to scores, then into u_k
            // and m_i.
            let mut weighted = 0.0;
            reset(dp, n);
            for i in 0..n {
                if p[i] == 0.0 {
                    continue;
                }
                dp[i] = dot(d_u, trace.story.row(i, dim));
                weighted += p[i] * dp[i];
            }
            for i in 0..n {
                if p[i] == 0.0 {
                    continue;
                }
                let ds = p[i] * (dp[i] - weighted);
                let m_i = trace.story.row(i, dim);
                let dm_i = &mut d_m[i * dim..(i + 1) * dim];
                for k2 in 0..dim {
                    dm_i[k2] += p[i] * d_u[k2] + ds * u_k[k2];
                    d_u_next[k2] += ds * m_i[k2];
                }
            }
            core::mem::swap(d_u, d_u_next);
        }

        // Question tokens.
        scatter_sentence(&mut grads.embedding, &triplet.question, d_u, params);

        // Memory sentences and temporal rows.
        let keep = triplet.story.len().min(params.config.memory_size);
        let window = &triplet.story[triplet.story.len() - keep..];
        for (i, sentence) in window.iter().enumerate() {
            let dm_i = &d_m[i * dim..(i + 1) * dim];
            scatter_sentence(&mut grads.embedding, sentence, dm_i, params);
            axpy(&mut grads.temporal[i * dim..(i + 1) * dim], dm_i, 1.0);
        }
    }

    // Candidate scatter, once per batch.
    for (j, seq) in cands.seqs().iter().enumerate() {
        scatter_sentence(&mut grads.embedding, seq, &v_acc[j * dim..(j + 1) * dim], params);
    }

    // The padding row never learns.
    grads.embedding[..dim].iter_mut().for_each(|x| *x = 0.0);

    Ok(total_loss * inv_batch)
}

#[inline]
fn axpy(dst: &mut [f64], src: &[f64], a: f64) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += a * s;
    }
}

#[inline]
fn scatter_sentence(embedding_grad: &mut [f64], sentence: &[u32], upstream: &[f64], params: &ModelParams) {
    let dim = params.config.dim;
    for (pos, &tok) in sentence.iter().enumerate() {
        if tok == 0 {
            continue;
        }
        let weights = params.pe_row(pos);
        let row = &mut embedding_grad[tok as usize * dim..(tok as usize + 1) * dim];
        for k in 0..dim {
            row[k] += weights[k] * upstream[k];
        }
    }
}

/// Training outcome: final parameters plus the per-epoch mean loss.
#[derive(Debug, Clone)]
pub struct TrainResult {
    pub params: ModelParams,
    pub epoch_losses: Vec<f64>,
}

/// Plain SGD with per-epoch shuffling driven by `seed` and a global
/// gradient-norm cap of [`super::GRAD_CLIP`]. Deterministic in
/// (data order, init, seed).
pub fn train(
    data: &[Triplet],
    params_init: &ModelParams,
    cands: &CandidateSet,
    hyper: &Hyper,
    seed: u64,
) -> Result<TrainResult, NumericsError> {
    assert!(hyper.lr > 0.0 && hyper.batch > 0, "hyperparameters must be positive");
    let mut params = params_init.clone();
    let mut rng = rng_from_seed(seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut grads = Grads::zeros(&params.config);
    let mut scratch = BatchScratch::new();
    let mut epoch_losses = Vec::with_capacity(hyper.epochs);
    let mut batch_refs: Vec<&Triplet> = Vec::with_capacity(hyper.batch);

    for epoch in 0..hyper.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        for (batch_no, chunk) in order.chunks(hyper.batch).enumerate() {
            batch_refs.clear();
            batch_refs.extend(chunk.iter().map(|&i| &data[i]));
            grads.clear();
            encode_candidates_into(&mut scratch.enc, cands, &params);
            let loss = accumulate_batch(&batch_refs, &params, cands, &mut grads, &mut scratch).map_err(
                |e| NumericsError {
                    triplet: e.triplet,
                    epoch: Some(epoch),
                    batch: Some(batch_no),
                },
            )?;
            epoch_loss += loss;
            batches += 1;

            let norm = grads.norm();
            let scale = if norm > super::GRAD_CLIP {
                super::GRAD_CLIP / norm
            } else {
                1.0
            };
            let step = hyper.lr * scale;
            for (p, g) in params.embedding.iter_mut().zip(&grads.embedding) {
                *p -= step * g;
            }
            for (p, g) in params.temporal.iter_mut().zip(&grads.temporal) {
                *p -= step * g;
            }
        }
        epoch_losses.push(if batches > 0 { epoch_loss / batches as f64 } else { 0.0 });
    }
    Ok(TrainResult { params, epoch_losses })
}

/// Prediction counts over a triplet set.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalCounts {
    pub responses_total: usize,
    pub responses_correct: usize,
    pub api_total: usize,
    pub api_correct: usize,
}

impl EvalCounts {
    pub fn per_response_accuracy(&self) -> f64 {
        percentage(self.responses_correct, self.responses_total)
    }

    pub fn api_call_accuracy(&self) -> f64 {
        percentage(self.api_correct, self.api_total)
    }
}

pub fn percentage(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

/// Scores every triplet with a frozen model; per-response accuracy counts all
/// instances, api-call accuracy only the terminal api_call ones.
pub fn evaluate(params: &ModelParams, triplets: &[Triplet], cands: &CandidateSet) -> EvalCounts {
    let enc = encode_candidates(cands, params);
    let mut counts = EvalCounts::default();
    for t in triplets {
        let logits = forward(&t.story, &t.question, params, &enc);
        let predicted = argmax(&logits) as u32;
        counts.responses_total += 1;
        let hit = predicted == t.answer;
        counts.responses_correct += usize::from(hit);
        if t.is_api_call {
            counts.api_total += 1;
            counts.api_correct += usize::from(hit);
        }
    }
    counts
}

/// Predicted candidate index per dialogue's api_call instance, in dialogue
/// order.
pub fn predict_api_calls(
    params: &ModelParams,
    triplets: &[Triplet],
    cands: &CandidateSet,
) -> Vec<(usize, u32)> {
    let enc = encode_candidates(cands, params);
    triplets
        .iter()
        .filter(|t| t.is_api_call)
        .map(|t| {
            let logits = forward(&t.story, &t.question, params, &enc);
            (t.dialogue, argmax(&logits) as u32)
        })
        .collect()
}

/// One grid-search configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridCell {
    pub hops: usize,
    pub dim: usize,
}

/// Training + evaluation numbers for one grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellOutcome {
    pub cell: GridCell,
    pub seed: u64,
    pub train_api_accuracy: f64,
    pub test_api_accuracy: f64,
    pub test_per_response_accuracy: f64,
    pub final_epoch_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridOutcome {
    pub cells: Vec<CellOutcome>,
    pub best: usize,
}

impl GridOutcome {
    pub fn best_cell(&self) -> &CellOutcome {
        &self.cells[self.best]
    }
}

/// Cell enumeration shared by the sequential and any parallel grid runner,
/// hops-major so cell indices (and the seeds derived from them) are stable.
pub fn grid_cells(hops: &[usize], dims: &[usize]) -> Vec<GridCell> {
    let mut out = Vec::with_capacity(hops.len() * dims.len());
    for &h in hops {
        for &d in dims {
            out.push(GridCell { hops: h, dim: d });
        }
    }
    out
}

/// Trains and scores one cell. `index` is the cell's position in
/// [`grid_cells`] order; the cell trains with `derive_seed(seed, index)`.
pub fn run_grid_cell(
    cell: GridCell,
    index: usize,
    train_set: &[Triplet],
    test_set: &[Triplet],
    cands: &CandidateSet,
    vocab: &Vocab,
    hyper: &Hyper,
    seed: u64,
) -> Result<CellOutcome, NumericsError> {
    let cell_seed = derive_seed(seed, index as u64);
    let config = ModelConfig {
        hops: cell.hops,
        dim: cell.dim,
        vocab_size: vocab.len(),
        memory_size: vocab.memory_size,
        max_sentence_len: vocab.max_sentence_len,
    };
    let init = ModelParams::init(config, derive_seed(cell_seed, 0));
    let result = train(train_set, &init, cands, hyper, derive_seed(cell_seed, 1))?;
    let on_train = evaluate(&result.params, train_set, cands);
    let on_test = evaluate(&result.params, test_set, cands);
    Ok(CellOutcome {
        cell,
        seed: cell_seed,
        train_api_accuracy: on_train.api_call_accuracy(),
        test_api_accuracy: on_test.api_call_accuracy(),
        test_per_response_accuracy: on_test.per_response_accuracy(),
        final_epoch_loss: result.epoch_losses.last().copied().unwrap_or(0.0),
    })
}

/// Index of the cell with the highest test api-call accuracy; ties go to the
/// earliest cell in enumeration order.
pub fn select_best(cells: &[CellOutcome]) -> usize {
    let mut best = 0;
    for (i, c) in cells.iter().enumerate().skip(1) {
        if c.test_api_accuracy > cells[best].test_api_accuracy {
            best = i;
        }
    }
    best
}

/// Trains every (hops, dim) configuration independently and returns the full
/// grid with the best cell marked.
#[allow(clippy::too_many_arguments)]
pub fn grid_search(
    train_set: &[Triplet],
    test_set: &[Triplet],
    cands: &CandidateSet,
    vocab: &Vocab,
    hops: &[usize],
    dims: &[usize],
    hyper: &Hyper,
    seed: u64,
) -> Result<GridOutcome, NumericsError> {
    let cells = grid_cells(hops, dims);
    let mut outcomes = Vec::with_capacity(cells.len());
    for (index, cell) in cells.into_iter().enumerate() {
        outcomes.push(run_grid_cell(
            cell, index, train_set, test_set, cands, vocab, hyper, seed,
        )?);
    }
    let best = select_best(&outcomes);
    Ok(GridOutcome {
        cells: outcomes,
        best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_dialog_file;
    use crate::memn2n::data::prepare_triplets;
    use crate::memn2n::model::encode_candidates;

    fn tiny_dataset() -> (Vec<Triplet>, CandidateSet, Vocab) {
        let ds = parse_dialog_file(
            "1 hi\thello what can i help you with today\n\
             2 a table with spanish food in tokyo for eight in a cheap price range\tok let me look into some options for you\n\
             3 \tapi_call spanish tokyo eight cheap\n\
             \n\
             1 hi\thello what can i help you with today\n\
             2 a table with french food in london for four in a expensive price range\tok let me look into some options for you\n\
             3 \tapi_call french london four expensive\n",
        )
        .unwrap();
        let vocab = Vocab::build(&[&ds], 10);
        let cands = CandidateSet::build(&[&ds], &vocab).unwrap();
        let triplets = prepare_triplets(&ds, &vocab, &cands).unwrap();
        (triplets, cands, vocab)
    }

    fn toy_model(vocab: &Vocab, hops: usize, dim: usize, seed: u64) -> ModelParams {
        ModelParams::init(
            ModelConfig {
                hops,
                dim,
                vocab_size: vocab.len(),
                memory_size: vocab.memory_size,
                max_sentence_len: vocab.max_sentence_len,
            },
            seed,
        )
    }

    #[test]
    fn uniform_logits_give_ln_c() {
        let (triplets, cands, vocab) = tiny_dataset();
        // Zero embeddings (all logits zero) => loss is exactly ln C.
        let config = ModelConfig {
            hops: 1,
            dim: 4,
            vocab_size: vocab.len(),
            memory_size: vocab.memory_size,
            max_sentence_len: vocab.max_sentence_len,
        };
        let params = ModelParams::from_matrices(
            config.clone(),
            vec![0.0; config.vocab_size * 4],
            vec![0.0; config.memory_size * 4],
        );
        let batch: Vec<&Triplet> = triplets.iter().collect();
        let (loss, _) = loss_and_grads(&batch, &params, &cands).unwrap();
        let want = libm::log(cands.len() as f64);
        assert!((loss - want).abs() < 1e-12, "{loss} vs {want}");
    }

    #[test]
    fn duplicated_batch_keeps_mean_loss() {
        let (triplets, cands, vocab) = tiny_dataset();
        let params = toy_model(&vocab, 2, 6, 3);
        let batch: Vec<&Triplet> = triplets.iter().collect();
        let doubled: Vec<&Triplet> = triplets.iter().chain(triplets.iter()).collect();
        let (a, _) = loss_and_grads(&batch, &params, &cands).unwrap();
        let (b, _) = loss_and_grads(&doubled, &params, &cands).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn zero_epochs_returns_init() {
        let (triplets, cands, vocab) = tiny_dataset();
        let init = toy_model(&vocab, 1, 4, 9);
        let hyper = Hyper {
            epochs: 0,
            ..Hyper::default()
        };
        let result = train(&triplets, &init, &cands, &hyper, 1).unwrap();
        assert_eq!(result.params.embedding, init.embedding);
        assert_eq!(result.params.temporal, init.temporal);
        assert!(result.epoch_losses.is_empty());
    }

    #[test]
    fn training_is_deterministic() {
        let (triplets, cands, vocab) = tiny_dataset();
        let init = toy_model(&vocab, 1, 8, 5);
        let hyper = Hyper {
            epochs: 3,
            ..Hyper::default()
        };
        let a = train(&triplets, &init, &cands, &hyper, 77).unwrap();
        let b = train(&triplets, &init, &cands, &hyper, 77).unwrap();
        assert_eq!(a.params.embedding, b.params.embedding);
        assert_eq!(a.params.temporal, b.params.temporal);
        assert_eq!(a.epoch_losses, b.epoch_losses);
    }

    #[test]
    fn training_reduces_loss_on_tiny_data() {
        let (triplets, cands, vocab) = tiny_dataset();
        let init = toy_model(&vocab, 1, 16, 2);
        let hyper = Hyper {
            epochs: 30,
            lr: 0.05,
            batch: 2,
        };
        let result = train(&triplets, &init, &cands, &hyper, 4).unwrap();
        assert!(result.epoch_losses.last().unwrap() < &result.epoch_losses[0]);
        let counts = evaluate(&result.params, &triplets, &cands);
        assert!(counts.per_response_accuracy() > 50.0);
    }

    #[test]
    fn padding_neutrality_appending_empty_sentences() {
        let (triplets, cands, vocab) = tiny_dataset();
        let params = toy_model(&vocab, 2, 8, 11);
        let enc = encode_candidates(&cands, &params);
        let t = triplets.last().unwrap();
        let base = forward(&t.story, &t.question, &params, &enc);
        let mut padded_story = t.story.clone();
        padded_story.push(vec![0, 0, 0]);
        padded_story.push(Vec::new());
        let padded = forward(&padded_story, &t.question, &params, &enc);
        for (a, b) in base.iter().zip(&padded) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn tying_one_update_moves_all_roles() {
        // A single gradient step changes question, memory and candidate
        // encodings at once because they share the embedding matrix.
        let (triplets, cands, vocab) = tiny_dataset();
        let params = toy_model(&vocab, 1, 4, 13);
        let batch: Vec<&Triplet> = triplets.iter().take(2).collect();
        let (_, grads) = loss_and_grads(&batch, &params, &cands).unwrap();
        let mut stepped = params.clone();
        for (p, g) in stepped.embedding.iter_mut().zip(&grads.embedding) {
            *p -= 0.1 * g;
        }
        let before_cands = encode_candidates(&cands, &params);
        let after_cands = encode_candidates(&cands, &stepped);
        assert_ne!(before_cands.enc, after_cands.enc);
        let t = &triplets[1];
        let before_mem = super::super::model::encode_memory(&t.story, &params);
        let after_mem = super::super::model::encode_memory(&t.story, &stepped);
        assert_ne!(before_mem.m, after_mem.m);
    }

    #[test]
    fn grid_search_single_cell_and_consistency() {
        let (triplets, cands, vocab) = tiny_dataset();
        let hyper = Hyper {
            epochs: 2,
            ..Hyper::default()
        };
        let grid = grid_search(&triplets, &triplets, &cands, &vocab, &[1], &[4], &hyper, 3).unwrap();
        assert_eq!(grid.cells.len(), 1);
        assert_eq!(grid.best, 0);

        let grid2 =
            grid_search(&triplets, &triplets, &cands, &vocab, &[1, 2], &[4, 8], &hyper, 3).unwrap();
        let best = grid2.best_cell().test_api_accuracy;
        assert!(grid2.cells.iter().all(|c| c.test_api_accuracy <= best));
    }
}
