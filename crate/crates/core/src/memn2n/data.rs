//! Vocabulary, candidate list, and triplet preparation.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::corpus::{Dialogue, Speaker};

/// Story annotation token for user-side sentences.
pub const SPEAKER_USER: &str = "$u";
/// Story annotation token for system-side sentences.
pub const SPEAKER_SYSTEM: &str = "$r";
/// Reserved query token standing in for the api_call line's empty user side,
/// so the terminal instance has a learnable, slot-neutral query.
pub const SILENCE: &str = "<silence>";

fn turn_token(exchange: usize) -> String {
    format!("#{exchange}")
}

/// Token table covering every word of the corpora it was built from,
/// including disfluency markers and the story annotation tokens, so the model
/// never meets an out-of-vocabulary word. Index 0 is padding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    tokens: Vec<String>,
    index: BTreeMap<String, u32>,
    pub max_sentence_len: usize,
    pub memory_size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VocabError {
    pub token: String,
}

impl fmt::Display for VocabError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "token {:?} is not covered by the vocabulary", self.token)
    }
}

impl core::error::Error for VocabError {}

impl Vocab {
    /// Builds the vocabulary over every corpus of an experiment (train and
    /// test alike). `max_sentence_len` accounts for the two annotation
    /// tokens appended to story sentences.
    pub fn build(corpora: &[&[Dialogue]], memory_size: usize) -> Self {
        let mut set: BTreeSet<String> = BTreeSet::new();
        let mut max_exchanges = 0usize;
        let mut max_turn_len = 0usize;
        for corpus in corpora {
            for d in *corpus {
                max_exchanges = max_exchanges.max(d.turns.len() / 2);
                for turn in &d.turns {
                    max_turn_len = max_turn_len.max(turn.tokens.len());
                    for tok in &turn.tokens {
                        set.insert(tok.clone());
                    }
                }
                set.insert("api_call".to_string());
                for v in d.api_call.values() {
                    set.insert(v.to_string());
                }
            }
        }
        set.insert(SPEAKER_USER.to_string());
        set.insert(SPEAKER_SYSTEM.to_string());
        set.insert(SILENCE.to_string());
        for e in 0..max_exchanges {
            set.insert(turn_token(e));
        }
        let mut tokens = Vec::with_capacity(set.len() + 1);
        tokens.push(String::new());
        tokens.extend(set);
        let index = tokens
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        // Story sentences carry two extra tokens; the api_call string has 5.
        let max_sentence_len = (max_turn_len + 2).max(5);
        Vocab {
            tokens,
            index,
            max_sentence_len,
            memory_size,
        }
    }

    /// Rebuilds a vocabulary from its serialized parts.
    pub fn from_parts(tokens: Vec<String>, max_sentence_len: usize, memory_size: usize) -> Self {
        let index = tokens
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Vocab {
            tokens,
            index,
            max_sentence_len,
            memory_size,
        }
    }

    pub fn lookup(&self, token: &str) -> Result<u32, VocabError> {
        self.index.get(token).copied().ok_or_else(|| VocabError {
            token: token.to_string(),
        })
    }

    pub fn token(&self, id: u32) -> &str {
        &self.tokens[id as usize]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Number of rows in the embedding table (padding row included).
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.len() <= 1
    }

    /// Encodes a sentence without padding; indices only.
    pub fn encode(&self, tokens: &[String]) -> Result<Vec<u32>, VocabError> {
        tokens.iter().map(|t| self.lookup(t)).collect()
    }

    pub fn decode(&self, ids: &[u32]) -> String {
        let mut out = String::new();
        for (i, id) in ids.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(self.token(*id));
        }
        out
    }
}

/// Ordered, duplicate-free list of whole system responses and api_call
/// strings; answers are indices into it. Sorted lexicographically so the set
/// is independent of dialogue order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSet {
    seqs: Vec<Vec<u32>>,
    texts: Vec<String>,
    index: BTreeMap<String, u32>,
}

impl CandidateSet {
    /// Collects every system utterance and api_call across the given corpora.
    pub fn build(corpora: &[&[Dialogue]], vocab: &Vocab) -> Result<Self, VocabError> {
        let mut set: BTreeSet<String> = BTreeSet::new();
        for corpus in corpora {
            for d in *corpus {
                for turn in &d.turns {
                    if turn.speaker == Speaker::System {
                        set.insert(turn.text());
                    }
                }
                set.insert(d.api_call.to_string());
            }
        }
        let texts: Vec<String> = set.into_iter().collect();
        let mut seqs = Vec::with_capacity(texts.len());
        for text in &texts {
            let toks: Vec<String> = text.split(' ').map(str::to_string).collect();
            seqs.push(vocab.encode(&toks)?);
        }
        let index = texts
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Ok(CandidateSet { seqs, texts, index })
    }

    pub fn from_parts(seqs: Vec<Vec<u32>>, vocab: &Vocab) -> Self {
        let texts: Vec<String> = seqs.iter().map(|s| vocab.decode(s)).collect();
        let index = texts
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        CandidateSet { seqs, texts, index }
    }

    pub fn lookup(&self, text: &str) -> Option<u32> {
        self.index.get(text).copied()
    }

    pub fn text(&self, id: u32) -> &str {
        &self.texts[id as usize]
    }

    pub fn seq(&self, id: u32) -> &[u32] {
        &self.seqs[id as usize]
    }

    pub fn seqs(&self) -> &[Vec<u32>] {
        &self.seqs
    }

    pub fn len(&self) -> usize {
        self.seqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seqs.is_empty()
    }
}

/// One training/evaluation instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triplet {
    /// All turns strictly before the answered one, each sentence suffixed
    /// with its exchange-number and speaker tokens. Unpadded encodings.
    pub story: Vec<Vec<u32>>,
    /// The user turn the answer responds to; empty for the api_call line.
    pub question: Vec<u32>,
    /// Index into the candidate set.
    pub answer: u32,
    /// Position of the source dialogue within its corpus slice.
    pub dialogue: usize,
    /// True for the terminal api_call instance of a dialogue.
    pub is_api_call: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrepareError {
    Vocab(VocabError),
    /// A system response or api_call string is missing from the candidates.
    Candidate { text: String },
}

impl fmt::Display for PrepareError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrepareError::Vocab(e) => write!(f, "{e}"),
            PrepareError::Candidate { text } => {
                write!(f, "response {text:?} is not in the candidate set")
            }
        }
    }
}

impl core::error::Error for PrepareError {}

impl From<VocabError> for PrepareError {
    fn from(e: VocabError) -> Self {
        PrepareError::Vocab(e)
    }
}

/// Expands each dialogue into one triplet per system response plus one for
/// the terminal api_call. The api_call line carries no user turn of its own,
/// so its question is the reserved [`SILENCE`] token and its story holds
/// every turn (they all precede the api_call).
pub fn prepare_triplets(
    dialogues: &[Dialogue],
    vocab: &Vocab,
    candidates: &CandidateSet,
) -> Result<Vec<Triplet>, PrepareError> {
    let mut out = Vec::new();
    for (pos, d) in dialogues.iter().enumerate() {
        let mut story: Vec<Vec<u32>> = Vec::new();
        for (exchange, (user, system)) in d.exchanges().enumerate() {
            let question = vocab.encode(&user.tokens)?;
            let answer_text = system.text();
            let answer = candidates
                .lookup(&answer_text)
                .ok_or(PrepareError::Candidate { text: answer_text })?;
            out.push(Triplet {
                story: story.clone(),
                question,
                answer,
                dialogue: pos,
                is_api_call: false,
            });

            let annotate = |tokens: &[String], speaker: &str| -> Result<Vec<u32>, VocabError> {
                let mut ids = vocab.encode(tokens)?;
                ids.push(vocab.lookup(&turn_token(exchange))?);
                ids.push(vocab.lookup(speaker)?);
                Ok(ids)
            };
            story.push(annotate(&user.tokens, SPEAKER_USER)?);
            story.push(annotate(&system.tokens, SPEAKER_SYSTEM)?);
        }
        let api_text = d.api_call.to_string();
        let answer = candidates
            .lookup(&api_text)
            .ok_or(PrepareError::Candidate { text: api_text })?;
        out.push(Triplet {
            story,
            question: vec![vocab.lookup(SILENCE)?],
            answer,
            dialogue: pos,
            is_api_call: true,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_dialog_file;

    fn sample() -> Vec<Dialogue> {
        parse_dialog_file(
            "1 good morning\thello what can i help you with today\n\
             2 i'd like to book a table in a cheap price range\ti'm on it any preference on a type of cuisine\n\
             3 with spanish food\twhere should it be\n\
             4 in tokyo\thow many people would be in your party\n\
             5 for eight people please\tok let me look into some options for you\n\
             6 \tapi_call spanish tokyo eight cheap\n",
        )
        .unwrap()
    }

    #[test]
    fn one_triplet_per_system_response_plus_api_call() {
        let ds = sample();
        let vocab = Vocab::build(&[&ds], 50);
        let cands = CandidateSet::build(&[&ds], &vocab).unwrap();
        let triplets = prepare_triplets(&ds, &vocab, &cands).unwrap();
        // Five system turns, then the api_call instance.
        assert_eq!(triplets.len(), 6);
        assert_eq!(
            cands.text(triplets[4].answer),
            "ok let me look into some options for you"
        );
        let last = triplets.last().unwrap();
        assert!(last.is_api_call);
        // The api_call line has no user side; its question is the reserved
        // silence token and its story spans the whole dialogue.
        assert_eq!(vocab.decode(&last.question), SILENCE);
        assert_eq!(last.story.len(), 10);
        assert_eq!(cands.text(last.answer), "api_call spanish tokyo eight cheap");
    }

    #[test]
    fn first_triplet_has_empty_story() {
        let ds = sample();
        let vocab = Vocab::build(&[&ds], 50);
        let cands = CandidateSet::build(&[&ds], &vocab).unwrap();
        let triplets = prepare_triplets(&ds, &vocab, &cands).unwrap();
        assert!(triplets[0].story.is_empty());
        assert_eq!(triplets.iter().filter(|t| t.story.is_empty()).count(), 1);
        // Story grows by two sentences per exchange.
        assert_eq!(triplets[1].story.len(), 2);
        assert_eq!(triplets[5].story.len(), 10);
    }

    #[test]
    fn story_annotations_reconstruct_turn_order() {
        let ds = sample();
        let vocab = Vocab::build(&[&ds], 50);
        let cands = CandidateSet::build(&[&ds], &vocab).unwrap();
        let triplets = prepare_triplets(&ds, &vocab, &cands).unwrap();
        let last = triplets.last().unwrap();
        for (i, sentence) in last.story.iter().enumerate() {
            let n = sentence.len();
            let speaker = vocab.token(sentence[n - 1]);
            let exchange = vocab.token(sentence[n - 2]);
            assert_eq!(exchange, format!("#{}", i / 2));
            assert_eq!(speaker, if i % 2 == 0 { SPEAKER_USER } else { SPEAKER_SYSTEM });
            let body = vocab.decode(&sentence[..n - 2]);
            assert_eq!(body, ds[0].turns[i].text());
        }
    }

    #[test]
    fn uncovered_token_is_vocab_error() {
        let ds = sample();
        let vocab = Vocab::build(&[&ds], 50);
        let mut other = sample();
        other[0].turns[0].tokens.push("zanzibar".into());
        let cands = CandidateSet::build(&[&ds], &vocab).unwrap();
        match prepare_triplets(&other, &vocab, &cands) {
            Err(PrepareError::Vocab(e)) => assert_eq!(e.token, "zanzibar"),
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn missing_candidate_is_reported() {
        let ds = sample();
        let vocab = Vocab::build(&[&ds], 50);
        let cands = CandidateSet::build(&[&Vec::new()[..]], &vocab).unwrap();
        assert!(matches!(
            prepare_triplets(&ds, &vocab, &cands),
            Err(PrepareError::Candidate { .. })
        ));
    }

    #[test]
    fn vocab_round_trips_through_parts() {
        let ds = sample();
        let vocab = Vocab::build(&[&ds], 50);
        let rebuilt = Vocab::from_parts(vocab.tokens().to_vec(), vocab.max_sentence_len, 50);
        assert_eq!(vocab, rebuilt);
    }

    #[test]
    fn max_sentence_len_covers_annotated_turns() {
        let ds = sample();
        let vocab = Vocab::build(&[&ds], 50);
        let longest = ds[0].turns.iter().map(|t| t.tokens.len()).max().unwrap();
        assert_eq!(vocab.max_sentence_len, longest + 2);
    }
}
