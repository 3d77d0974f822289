//! Model parameters and the forward pass.

use alloc::vec;
use alloc::vec::Vec;

use rand::RngExt;

use super::data::CandidateSet;
use crate::rng::rng_from_seed;

/// Architecture hyperparameters fixed at initialization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelConfig {
    pub hops: usize,
    pub dim: usize,
    pub vocab_size: usize,
    pub memory_size: usize,
    pub max_sentence_len: usize,
}

/// Learnable state: one embedding matrix `A` shared by input memories, output
/// memories, the question, and candidate encoding (adjacent tying), plus the
/// temporal table `T` indexed by story position. Row 0 of `A` is the padding
/// row and stays zero through training.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub config: ModelConfig,
    /// `vocab_size x dim`, row-major.
    pub embedding: Vec<f64>,
    /// `memory_size x dim`, row-major.
    pub temporal: Vec<f64>,
    /// Fixed `max_sentence_len x dim` position-encoding weights.
    pe: Vec<f64>,
}

impl ModelParams {
    /// Gaussian init, mean 0, sigma [`super::INIT_SIGMA`], seeded.
    pub fn init(config: ModelConfig, seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        let mut gauss = || -> f64 {
            // Box-Muller; both uniforms kept strictly inside (0, 1].
            let u1: f64 = 1.0 - rng.random::<f64>();
            let u2: f64 = rng.random::<f64>();
            libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * core::f64::consts::PI * u2)
                * super::INIT_SIGMA
        };
        let mut embedding = vec![0.0; config.vocab_size * config.dim];
        for x in embedding.iter_mut().skip(config.dim) {
            *x = gauss();
        }
        let mut temporal = vec![0.0; config.memory_size * config.dim];
        for x in temporal.iter_mut() {
            *x = gauss();
        }
        let pe = position_encoding(config.max_sentence_len, config.dim);
        ModelParams {
            config,
            embedding,
            temporal,
            pe,
        }
    }

    pub fn from_matrices(config: ModelConfig, embedding: Vec<f64>, temporal: Vec<f64>) -> Self {
        assert_eq!(embedding.len(), config.vocab_size * config.dim);
        assert_eq!(temporal.len(), config.memory_size * config.dim);
        let pe = position_encoding(config.max_sentence_len, config.dim);
        ModelParams {
            config,
            embedding,
            temporal,
            pe,
        }
    }

    #[inline]
    pub fn embedding_row(&self, token: u32) -> &[f64] {
        let d = self.config.dim;
        let start = token as usize * d;
        &self.embedding[start..start + d]
    }

    #[inline]
    pub fn temporal_row(&self, slot: usize) -> &[f64] {
        let d = self.config.dim;
        &self.temporal[slot * d..(slot + 1) * d]
    }

    #[inline]
    pub(crate) fn pe_row(&self, position: usize) -> &[f64] {
        let d = self.config.dim;
        &self.pe[position * d..(position + 1) * d]
    }
}

/// Position-encoding weights: `l[j][k] = (1 - j/J) - (k/d)(1 - 2j/J)` with
/// 1-based word position `j` and embedding component `k`. Makes sentence
/// encodings order-sensitive.
pub fn position_encoding(max_len: usize, dim: usize) -> Vec<f64> {
    let mut out = vec![0.0; max_len * dim];
    let j_cap = max_len as f64;
    let d = dim as f64;
    for j0 in 0..max_len {
        let j = (j0 + 1) as f64;
        for k0 in 0..dim {
            let k = (k0 + 1) as f64;
            out[j0 * dim + k0] = (1.0 - j / j_cap) - (k / d) * (1.0 - 2.0 * j / j_cap);
        }
    }
    out
}

/// Sums position-weighted embedding rows of `sentence` into `out`.
#[inline]
pub(crate) fn encode_sentence_into(out: &mut [f64], sentence: &[u32], params: &ModelParams) {
    for (pos, &tok) in sentence.iter().enumerate() {
        if tok == 0 {
            continue;
        }
        let row = params.embedding_row(tok);
        let weights = params.pe_row(pos);
        for ((o, r), w) in out.iter_mut().zip(row).zip(weights) {
            *o += r * w;
        }
    }
}

/// Encoded memories for one story.
#[derive(Debug, Clone)]
pub struct EncodedStory {
    /// `n x dim` memory vectors; input and output roles share them under the
    /// tied embedding.
    pub m: Vec<f64>,
    pub n: usize,
    /// False for all-padding sentences, which are masked out of attention.
    pub content: Vec<bool>,
}

impl EncodedStory {
    #[inline]
    pub fn row(&self, i: usize, dim: usize) -> &[f64] {
        &self.m[i * dim..(i + 1) * dim]
    }
}

/// Encodes a story, keeping the most recent `memory_size` sentences. Memory
/// `i` is the position-encoded sentence plus the temporal row for story
/// position `i`; an all-padding sentence contributes its temporal row alone.
pub fn encode_memory(story: &[Vec<u32>], params: &ModelParams) -> EncodedStory {
    let dim = params.config.dim;
    let keep = story.len().min(params.config.memory_size);
    let window = &story[story.len() - keep..];
    let mut m = vec![0.0; keep * dim];
    let mut content = Vec::with_capacity(keep);
    for (i, sentence) in window.iter().enumerate() {
        let row = &mut m[i * dim..(i + 1) * dim];
        row.copy_from_slice(params.temporal_row(i));
        encode_sentence_into(row, sentence, params);
        content.push(sentence.iter().any(|&t| t != 0));
    }
    EncodedStory { m, n: keep, content }
}

/// Attention over memories: `p_i` proportional to `exp(u . m_i)`, computed
/// with max subtraction; all-padding memories get weight zero.
pub fn attention(u: &[f64], story: &EncodedStory) -> Vec<f64> {
    let dim = u.len();
    let mut scores = vec![f64::NEG_INFINITY; story.n];
    let mut max = f64::NEG_INFINITY;
    for i in 0..story.n {
        if !story.content[i] {
            continue;
        }
        let s = dot(u, story.row(i, dim));
        scores[i] = s;
        if s > max {
            max = s;
        }
    }
    let mut p = vec![0.0; story.n];
    if max == f64::NEG_INFINITY {
        return p;
    }
    let mut z = 0.0;
    for i in 0..story.n {
        if story.content[i] {
            let e = libm::exp(scores[i] - max);
            p[i] = e;
            z += e;
        }
    }
    for x in p.iter_mut() {
        *x /= z;
    }
    p
}

/// Position-encoded candidate embeddings, `C x dim`.
#[derive(Debug, Clone)]
pub struct CandidateEncodings {
    pub enc: Vec<f64>,
    pub count: usize,
}

impl CandidateEncodings {
    #[inline]
    pub fn row(&self, j: usize, dim: usize) -> &[f64] {
        &self.enc[j * dim..(j + 1) * dim]
    }
}

pub fn encode_candidates(cands: &CandidateSet, params: &ModelParams) -> CandidateEncodings {
    let mut out = CandidateEncodings {
        enc: Vec::new(),
        count: 0,
    };
    encode_candidates_into(&mut out, cands, params);
    out
}

/// In-place variant used by the trainer, which re-encodes candidates after
/// every parameter update and keeps the buffer alive across batches.
pub fn encode_candidates_into(
    out: &mut CandidateEncodings,
    cands: &CandidateSet,
    params: &ModelParams,
) {
    let dim = params.config.dim;
    out.count = cands.len();
    out.enc.clear();
    out.enc.resize(cands.len() * dim, 0.0);
    for (j, seq) in cands.seqs().iter().enumerate() {
        encode_sentence_into(&mut out.enc[j * dim..(j + 1) * dim], seq, params);
    }
}

/// Hop-side forward state: everything except the candidate scores.
#[derive(Debug, Clone)]
pub(crate) struct HopTrace {
    pub story: EncodedStory,
    /// `hops + 1` query vectors: `u^1` and each `u^{k+1} = u^k + o^k`.
    pub u: Vec<Vec<f64>>,
    /// Attention vector per hop.
    pub p: Vec<Vec<f64>>,
}

impl HopTrace {
    pub fn u_final(&self) -> &[f64] {
        self.u.last().expect("hop chain has u^1")
    }
}

pub(crate) fn hop_forward(story: &[Vec<u32>], question: &[u32], params: &ModelParams) -> HopTrace {
    let dim = params.config.dim;
    let encoded = encode_memory(story, params);
    let mut u0 = vec![0.0; dim];
    encode_sentence_into(&mut u0, question, params);

    let mut u_chain = Vec::with_capacity(params.config.hops + 1);
    let mut p_chain = Vec::with_capacity(params.config.hops);
    u_chain.push(u0);
    for _ in 0..params.config.hops {
        let u = u_chain.last().unwrap();
        let p = attention(u, &encoded);
        let mut next = u.clone();
        for i in 0..encoded.n {
            let w = p[i];
            if w == 0.0 {
                continue;
            }
            let row = encoded.row(i, dim);
            for (n, r) in next.iter_mut().zip(row) {
                *n += w * r;
            }
        }
        p_chain.push(p);
        u_chain.push(next);
    }
    HopTrace {
        story: encoded,
        u: u_chain,
        p: p_chain,
    }
}

/// Scores every candidate for one instance. The prediction is the argmax,
/// ties broken by the lowest index.
pub fn forward(
    story: &[Vec<u32>],
    question: &[u32],
    params: &ModelParams,
    cands: &CandidateEncodings,
) -> Vec<f64> {
    let dim = params.config.dim;
    let hops = hop_forward(story, question, params);
    let u_final = hops.u_final();
    let mut logits = vec![0.0; cands.count];
    for (j, l) in logits.iter_mut().enumerate() {
        *l = dot(u_final, cands.row(j, dim));
    }
    logits
}

/// Argmax with lowest-index tie-breaking.
pub(crate) fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (j, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = j;
        }
    }
    best
}

/// Dot product over eight independent accumulator lanes so the reduction
/// vectorizes; the summation order is fixed, keeping results deterministic.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    const LANES: usize = 8;
    let n = a.len().min(b.len());
    let chunks = n / LANES;
    let mut acc = [0.0f64; LANES];
    for i in 0..chunks {
        let xa = &a[i * LANES..(i + 1) * LANES];
        let xb = &b[i * LANES..(i + 1) * LANES];
        for k in 0..LANES {
            acc[k] += xa[k] * xb[k];
        }
    }
    let mut tail = 0.0;
    for i in chunks * LANES..n {
        tail += a[i] * b[i];
    }
    let mut total = tail;
    for v in acc {
        total += v;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_params(hops: usize) -> ModelParams {
        // vocab: 0 pad, 1..=2 words; dim 2; J = 2; one temporal slot pair.
        let config = ModelConfig {
            hops,
            dim: 2,
            vocab_size: 3,
            memory_size: 2,
            max_sentence_len: 2,
        };
        let embedding = vec![
            0.0, 0.0, // pad
            1.0, 2.0, // token 1
            3.0, 4.0, // token 2
        ];
        let temporal = vec![10.0, 20.0, 30.0, 40.0];
        ModelParams::from_matrices(config, embedding, temporal)
    }

    #[test]
    fn position_encoding_matches_formula_by_hand() {
        // J = 2, d = 2:
        //   j=1: l = (1 - 1/2) - (k/2)(1 - 1) = 0.5 for both k
        //   j=2: l = (1 - 1)   - (k/2)(1 - 2) = k/2
        let pe = position_encoding(2, 2);
        assert_eq!(pe, vec![0.5, 0.5, 0.5, 1.0]);
    }

    #[test]
    fn encode_memory_matches_hand_computation() {
        // m_0 = 0.5*A[1] + [0.5,1.0]*A[2] + T[0]
        //     = [0.5 + 1.5 + 10, 1.0 + 4.0 + 20] = [12, 25]
        let params = toy_params(1);
        let story = vec![vec![1, 2]];
        let enc = encode_memory(&story, &params);
        assert_eq!(enc.n, 1);
        assert_eq!(enc.row(0, 2), &[12.0, 25.0]);
    }

    #[test]
    fn all_padding_sentence_is_temporal_row_and_masked() {
        let params = toy_params(1);
        let story = vec![vec![1, 2], vec![0, 0]];
        let enc = encode_memory(&story, &params);
        assert_eq!(enc.row(1, 2), params.temporal_row(1));
        assert!(!enc.content[1]);
        let p = attention(&[1.0, 0.0], &enc);
        assert_eq!(p[1], 0.0);
        assert!((p[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn permuting_words_changes_the_memory_vector() {
        let params = toy_params(1);
        let a = encode_memory(&[vec![1, 2]], &params);
        let b = encode_memory(&[vec![2, 1]], &params);
        assert_ne!(a.row(0, 2), b.row(0, 2));
    }

    #[test]
    fn attention_equal_scores_split_evenly() {
        let story = EncodedStory {
            m: vec![1.0, 0.0, 1.0, 0.0],
            n: 2,
            content: vec![true, true],
        };
        let p = attention(&[3.0, 7.0], &story);
        assert!((p[0] - 0.5).abs() < 1e-15);
        assert!((p[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn attention_one_two_scores() {
        // Memories scoring 1.0 and 2.0 against u: p = softmax([1, 2]).
        let story = EncodedStory {
            m: vec![1.0, 0.0, 2.0, 0.0],
            n: 2,
            content: vec![true, true],
        };
        let p = attention(&[1.0, 0.0], &story);
        assert!((p[0] - 0.268_941_421_369_995_1).abs() < 1e-12);
        assert!((p[1] - 0.731_058_578_630_004_9).abs() < 1e-12);
        assert!((p[0] + p[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn attention_is_shift_invariant() {
        let base = EncodedStory {
            m: vec![1.5, 0.0, -0.25, 0.0, 0.75, 0.0],
            n: 3,
            content: vec![true, true, true],
        };
        let shifted = EncodedStory {
            m: vec![1.5 + 5.0, 0.0, -0.25 + 5.0, 0.0, 0.75 + 5.0, 0.0],
            n: 3,
            content: vec![true, true, true],
        };
        let u = [1.0, 0.0];
        let a = attention(&u, &base);
        let b = attention(&u, &shifted);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_story_scores_reduce_to_question_dot_candidate() {
        let params = toy_params(1);
        let cands = CandidateEncodings {
            enc: vec![1.0, 0.0, 0.0, 1.0, 1.0, 1.0],
            count: 3,
        };
        let question = vec![1u32];
        let logits = forward(&[], &question, &params, &cands);
        // u = 0.5 * A[1] = [0.5, 1.0] against each candidate row.
        assert!((logits[0] - 0.5).abs() < 1e-12);
        assert!((logits[1] - 1.0).abs() < 1e-12);
        assert!((logits[2] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn multi_hop_equals_manual_unrolling() {
        let params3 = toy_params(3);
        let story = vec![vec![1], vec![2, 1]];
        let question = vec![2u32];
        let cands = CandidateEncodings {
            enc: vec![0.2, -0.1, 0.05, 0.4],
            count: 2,
        };
        let got = forward(&story, &question, &params3, &cands);

        // Unroll the hop recurrence by hand on top of the public pieces.
        let dim = 2;
        let encoded = encode_memory(&story, &params3);
        let mut u = vec![0.0; dim];
        encode_sentence_into(&mut u, &question, &params3);
        for _ in 0..3 {
            let p = attention(&u, &encoded);
            let mut o = vec![0.0; dim];
            for i in 0..encoded.n {
                for k in 0..dim {
                    o[k] += p[i] * encoded.row(i, dim)[k];
                }
            }
            for k in 0..dim {
                u[k] += o[k];
            }
        }
        let want = [dot(&u, cands.row(0, dim)), dot(&u, cands.row(1, dim))];
        assert!((got[0] - want[0]).abs() < 1e-10);
        assert!((got[1] - want[1]).abs() < 1e-10);
    }

    #[test]
    fn init_pins_padding_row_and_is_seeded() {
        let config = ModelConfig {
            hops: 1,
            dim: 4,
            vocab_size: 7,
            memory_size: 3,
            max_sentence_len: 5,
        };
        let a = ModelParams::init(config.clone(), 42);
        let b = ModelParams::init(config, 42);
        assert_eq!(a.embedding, b.embedding);
        assert_eq!(a.temporal, b.temporal);
        assert!(a.embedding[..4].iter().all(|&x| x == 0.0));
        assert!(a.embedding[4..].iter().any(|&x| x != 0.0));
    }
}
