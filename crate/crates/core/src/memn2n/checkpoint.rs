//! Binary checkpoint encoding: a versioned header carrying the seed, the
//! architecture, the vocabulary and the candidate list, followed by
//! shape-tagged little-endian f64 matrices. Byte-exact reload.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::data::{CandidateSet, Vocab};
use super::model::{ModelConfig, ModelParams};

const MAGIC: &[u8; 8] = b"MN2NCKPT";
const VERSION: u32 = 1;

/// A trained model with everything needed to evaluate it on raw corpora.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: ModelParams,
    pub vocab: Vocab,
    pub candidates: CandidateSet,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckpointError {
    BadMagic,
    UnsupportedVersion { found: u32 },
    Truncated,
    Corrupt { what: &'static str },
}

impl fmt::Display for CheckpointError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckpointError::BadMagic => write!(f, "not a model checkpoint (bad magic)"),
            CheckpointError::UnsupportedVersion { found } => {
                write!(f, "unsupported checkpoint version {found}")
            }
            CheckpointError::Truncated => write!(f, "checkpoint is truncated"),
            CheckpointError::Corrupt { what } => write!(f, "corrupt checkpoint: {what}"),
        }
    }
}

impl core::error::Error for CheckpointError {}

impl Checkpoint {
    pub fn new(params: ModelParams, vocab: Vocab, candidates: CandidateSet, seed: u64) -> Self {
        Checkpoint {
            params,
            vocab,
            candidates,
            seed,
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        put_u32(&mut out, VERSION);
        put_u64(&mut out, self.seed);
        let c = &self.params.config;
        put_u32(&mut out, c.hops as u32);
        put_u32(&mut out, c.dim as u32);
        put_u32(&mut out, c.memory_size as u32);
        put_u32(&mut out, c.max_sentence_len as u32);

        put_u32(&mut out, self.vocab.tokens().len() as u32);
        for token in self.vocab.tokens() {
            put_bytes(&mut out, token.as_bytes());
        }

        put_u32(&mut out, self.candidates.len() as u32);
        for seq in self.candidates.seqs() {
            put_u32(&mut out, seq.len() as u32);
            for &id in seq {
                put_u32(&mut out, id);
            }
        }

        put_u32(&mut out, 2);
        put_matrix(&mut out, "embedding", c.vocab_size, c.dim, &self.params.embedding);
        put_matrix(&mut out, "temporal", c.memory_size, c.dim, &self.params.temporal);
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, CheckpointError> {
        let mut r = Reader { bytes, at: 0 };
        if r.take(8)? != MAGIC {
            return Err(CheckpointError::BadMagic);
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(CheckpointError::UnsupportedVersion { found: version });
        }
        let seed = r.u64()?;
        let hops = r.u32()? as usize;
        let dim = r.u32()? as usize;
        let memory_size = r.u32()? as usize;
        let max_sentence_len = r.u32()? as usize;

        let n_tokens = r.u32()? as usize;
        let mut tokens = Vec::with_capacity(n_tokens);
        for _ in 0..n_tokens {
            let raw = r.bytes_field()?;
            let s = core::str::from_utf8(raw).map_err(|_| CheckpointError::Corrupt {
                what: "vocabulary token is not utf-8",
            })?;
            tokens.push(s.to_string());
        }
        if tokens.is_empty() || !tokens[0].is_empty() {
            return Err(CheckpointError::Corrupt {
                what: "vocabulary must start with the padding token",
            });
        }
        let vocab = Vocab::from_parts(tokens, max_sentence_len, memory_size);

        let n_cands = r.u32()? as usize;
        let mut seqs = Vec::with_capacity(n_cands);
        for _ in 0..n_cands {
            let len = r.u32()? as usize;
            let mut seq = Vec::with_capacity(len);
            for _ in 0..len {
                let id = r.u32()?;
                if id as usize >= vocab.len() {
                    return Err(CheckpointError::Corrupt {
                        what: "candidate token id out of range",
                    });
                }
                seq.push(id);
            }
            seqs.push(seq);
        }
        let candidates = CandidateSet::from_parts(seqs, &vocab);

        let n_matrices = r.u32()?;
        if n_matrices != 2 {
            return Err(CheckpointError::Corrupt {
                what: "expected exactly two matrices",
            });
        }
        let (name_a, rows_a, cols_a, embedding) = read_matrix(&mut r)?;
        let (name_t, rows_t, cols_t, temporal) = read_matrix(&mut r)?;
        if name_a != "embedding" || name_t != "temporal" {
            return Err(CheckpointError::Corrupt {
                what: "unexpected matrix names",
            });
        }
        if rows_a != vocab.len() || cols_a != dim || rows_t != memory_size || cols_t != dim {
            return Err(CheckpointError::Corrupt {
                what: "matrix shape disagrees with header",
            });
        }
        if r.at != r.bytes.len() {
            return Err(CheckpointError::Corrupt {
                what: "trailing bytes",
            });
        }
        let config = ModelConfig {
            hops,
            dim,
            vocab_size: vocab.len(),
            memory_size,
            max_sentence_len,
        };
        Ok(Checkpoint {
            params: ModelParams::from_matrices(config, embedding, temporal),
            vocab,
            candidates,
            seed,
        })
    }
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_bytes(out: &mut Vec<u8>, bytes: &[u8]) {
    put_u32(out, bytes.len() as u32);
    out.extend_from_slice(bytes);
}

fn put_matrix(out: &mut Vec<u8>, name: &str, rows: usize, cols: usize, data: &[f64]) {
    debug_assert_eq!(rows * cols, data.len());
    put_bytes(out, name.as_bytes());
    put_u64(out, rows as u64);
    put_u64(out, cols as u64);
    for v in data {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        if self.at + n > self.bytes.len() {
            return Err(CheckpointError::Truncated);
        }
        let s = &self.bytes[self.at..self.at + n];
        self.at += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn bytes_field(&mut self) -> Result<&'a [u8], CheckpointError> {
        let len = self.u32()? as usize;
        self.take(len)
    }
}

fn read_matrix(r: &mut Reader<'_>) -> Result<(String, usize, usize, Vec<f64>), CheckpointError> {
    let name = core::str::from_utf8(r.bytes_field()?)
        .map_err(|_| CheckpointError::Corrupt {
            what: "matrix name is not utf-8",
        })?
        .to_string();
    let rows = r.u64()? as usize;
    let cols = r.u64()? as usize;
    let count = rows.checked_mul(cols).ok_or(CheckpointError::Corrupt {
        what: "matrix shape overflow",
    })?;
    let mut data = Vec::with_capacity(count);
    for _ in 0..count {
        data.push(f64::from_le_bytes(r.take(8)?.try_into().unwrap()));
    }
    Ok((name, rows, cols, data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_dialog_file;
    use crate::memn2n::data::Vocab as V;

    fn sample_checkpoint() -> Checkpoint {
        let ds = parse_dialog_file(
            "1 hi\thello what can i help you with today\n\
             2 a table with spanish food in tokyo for eight in a cheap price range\tok let me look into some options for you\n\
             3 \tapi_call spanish tokyo eight cheap\n",
        )
        .unwrap();
        let vocab = V::build(&[&ds], 7);
        let candidates = CandidateSet::build(&[&ds], &vocab).unwrap();
        let config = ModelConfig {
            hops: 2,
            dim: 3,
            vocab_size: vocab.len(),
            memory_size: 7,
            max_sentence_len: vocab.max_sentence_len,
        };
        let params = ModelParams::init(config, 99);
        Checkpoint::new(params, vocab, candidates, 1234)
    }

    #[test]
    fn encode_decode_round_trip_is_exact() {
        let ckpt = sample_checkpoint();
        let bytes = ckpt.encode();
        let back = Checkpoint::decode(&bytes).unwrap();
        assert_eq!(ckpt, back);
        assert_eq!(bytes, back.encode());
    }

    #[test]
    fn rejects_bad_magic_and_truncation() {
        let ckpt = sample_checkpoint();
        let mut bytes = ckpt.encode();
        assert_eq!(
            Checkpoint::decode(&bytes[..bytes.len() - 3]),
            Err(CheckpointError::Truncated)
        );
        bytes[0] = b'X';
        assert_eq!(Checkpoint::decode(&bytes), Err(CheckpointError::BadMagic));
    }
}
