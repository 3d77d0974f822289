//! Word-by-word incremental semantic parser with backtrack repair.
//!
//! Words are conditional actions over a flat four-slot frame: slot values
//! update their slot, fillers and plain words are vacuous, and marker phrases
//! (matched greedily, longest first) trigger repair. A repair walks the parse
//! path backwards looking for the most recent state the continuation can
//! resume from, rewinds the frame to it, and re-parses — so a self-correction
//! deletes the reparandum's contribution while earlier, unrelated content
//! survives. When no resume point exists the continuation simply overwrites,
//! and the event is counted.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::corpus::{ApiCall, Dialogue, Speaker};
use crate::generator::{Slot, SlotVocab};

/// A filled slot with the index of the word that set it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotFill {
    pub value: String,
    pub word_index: usize,
}

/// The in-progress semantic record: one optional value per slot.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Frame {
    slots: [Option<SlotFill>; 4],
}

impl Frame {
    pub fn get(&self, slot: Slot) -> Option<&SlotFill> {
        self.slots[slot as usize].as_ref()
    }

    pub fn value(&self, slot: Slot) -> Option<&str> {
        self.get(slot).map(|f| f.value.as_str())
    }

    pub fn set(&mut self, slot: Slot, value: &str, word_index: usize) {
        self.slots[slot as usize] = Some(SlotFill {
            value: value.to_string(),
            word_index,
        });
    }

    pub fn is_empty(&self) -> bool {
        self.slots.iter().all(Option::is_none)
    }

    pub fn missing(&self) -> Vec<Slot> {
        Slot::ALL
            .into_iter()
            .filter(|&s| self.slots[s as usize].is_none())
            .collect()
    }

    /// Values present in the frame, in slot order.
    pub fn filled(&self) -> impl Iterator<Item = (Slot, &SlotFill)> {
        Slot::ALL
            .into_iter()
            .filter_map(|s| self.slots[s as usize].as_ref().map(|f| (s, f)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncompleteFrameError {
    pub missing: Vec<Slot>,
}

impl fmt::Display for IncompleteFrameError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "frame is missing slots:")?;
        for slot in &self.missing {
            write!(f, " {slot}")?;
        }
        Ok(())
    }
}

impl core::error::Error for IncompleteFrameError {}

/// Builds the api_call from a fully filled frame.
pub fn frame_to_api_call(frame: &Frame) -> Result<ApiCall, IncompleteFrameError> {
    let missing = frame.missing();
    if !missing.is_empty() {
        return Err(IncompleteFrameError { missing });
    }
    Ok(ApiCall::new(
        frame.value(Slot::Cuisine).unwrap(),
        frame.value(Slot::Location).unwrap(),
        frame.value(Slot::PartySize).unwrap(),
        frame.value(Slot::Price).unwrap(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarkerKind {
    Correction,
    Restart,
}

/// Word actions: slot updates, vacuous fillers, repair-triggering markers.
/// Total over any token stream — unknown words are no-ops.
#[derive(Debug, Clone)]
pub struct Lexicon {
    slot_values: Vec<(String, Slot)>,
    fillers: Vec<String>,
    /// Marker phrases sorted longest-first for greedy matching.
    markers: Vec<(Vec<String>, MarkerKind)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LexiconError {
    MarkerWordIsSlotValue { token: String },
    EmptyMarker,
}

impl fmt::Display for LexiconError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LexiconError::MarkerWordIsSlotValue { token } => {
                write!(f, "marker/filler word {token:?} collides with a slot value")
            }
            LexiconError::EmptyMarker => write!(f, "empty marker phrase"),
        }
    }
}

impl core::error::Error for LexiconError {}

impl Lexicon {
    pub fn new(
        vocab: &SlotVocab,
        fillers: &[String],
        correction_markers: &[Vec<String>],
        restart_markers: &[Vec<String>],
    ) -> Result<Self, LexiconError> {
        let mut slot_values = Vec::new();
        for slot in Slot::ALL {
            for v in vocab.values(slot) {
                slot_values.push((v.clone(), slot));
            }
        }
        let mut markers: Vec<(Vec<String>, MarkerKind)> = Vec::new();
        for m in correction_markers {
            markers.push((m.clone(), MarkerKind::Correction));
        }
        for m in restart_markers {
            markers.push((m.clone(), MarkerKind::Restart));
        }
        for (phrase, _) in &markers {
            if phrase.is_empty() {
                return Err(LexiconError::EmptyMarker);
            }
            for word in phrase {
                if slot_values.iter().any(|(v, _)| v == word) {
                    return Err(LexiconError::MarkerWordIsSlotValue { token: word.clone() });
                }
            }
        }
        for word in fillers {
            if slot_values.iter().any(|(v, _)| v == word) {
                return Err(LexiconError::MarkerWordIsSlotValue { token: word.clone() });
            }
        }
        markers.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then(a.0.cmp(&b.0)));
        Ok(Lexicon {
            slot_values,
            fillers: fillers.to_vec(),
            markers,
        })
    }

    /// Lexicon matching the built-in vocabulary and disfluency defaults.
    pub fn builtin() -> Self {
        let cfg = crate::disfluency::DisfluencyConfig::new(0);
        Lexicon::new(
            &SlotVocab::builtin(),
            &cfg.filler_tokens,
            &cfg.correction_markers,
            &cfg.restart_markers,
        )
        .expect("builtin lexicon is consistent")
    }

    pub fn slot_of(&self, word: &str) -> Option<Slot> {
        self.slot_values
            .iter()
            .find(|(v, _)| v == word)
            .map(|(_, s)| *s)
    }

    pub fn is_filler(&self, word: &str) -> bool {
        self.fillers.iter().any(|f| f == word)
    }

    /// True when some marker phrase is strictly longer than `words` and
    /// starts with them.
    fn marker_extendable(&self, words: &[String]) -> bool {
        self.markers
            .iter()
            .any(|(phrase, _)| phrase.len() > words.len() && phrase[..words.len()] == *words)
    }

    fn marker_exact(&self, words: &[String]) -> Option<MarkerKind> {
        self.markers
            .iter()
            .find(|(phrase, _)| phrase[..] == *words)
            .map(|(_, kind)| *kind)
    }

    fn marker_prefix(&self, words: &[String]) -> bool {
        self.markers
            .iter()
            .any(|(phrase, _)| phrase.len() >= words.len() && phrase[..words.len()] == *words)
    }
}

/// One node of the parse path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParserState {
    pub frame: Frame,
    pub word_index: usize,
    pub speaker: Speaker,
}

/// The labelled edge that produced a state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub word: String,
    pub speaker: Speaker,
}

/// The sequence of parser states visited so far, with repair bookkeeping.
///
/// States and edges satisfy `states.len() == edges.len() + 1`; edge `i`
/// consumed `edges[i].word` from `states[i]`.
#[derive(Debug, Clone)]
pub struct ParsePath {
    states: Vec<ParserState>,
    edges: Vec<Edge>,
    /// First edge index of the utterance currently being parsed; repair never
    /// backtracks past it.
    utterance_start: usize,
    /// Buffered words that are so far a proper prefix of some marker phrase.
    marker_buffer: Vec<String>,
    /// First edge index of the marker that most recently fired.
    marker_start: usize,
    /// Set right after a marker fired; resolved by the next word.
    pending_repair: Option<MarkerKind>,
    /// Repairs that found no resume point and fell back to plain overwrite.
    pub fallback_repairs: usize,
    /// Repairs that resolved through backtracking.
    pub backtrack_repairs: usize,
}

impl Default for ParsePath {
    fn default() -> Self {
        Self::new()
    }
}

impl ParsePath {
    pub fn new() -> Self {
        ParsePath {
            states: vec![ParserState {
                frame: Frame::default(),
                word_index: 0,
                speaker: Speaker::User,
            }],
            edges: Vec::new(),
            utterance_start: 0,
            marker_buffer: Vec::new(),
            marker_start: 0,
            pending_repair: None,
            fallback_repairs: 0,
            backtrack_repairs: 0,
        }
    }

    pub fn frame(&self) -> &Frame {
        &self.states.last().expect("path has a root").frame
    }

    pub fn states(&self) -> &[ParserState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Marks an utterance boundary. Flushes a half-matched marker and clears
    /// repair state: corrections are intra-utterance.
    pub fn begin_utterance(&mut self) {
        self.flush_marker_buffer();
        self.pending_repair = None;
        self.utterance_start = self.edges.len();
    }

    /// Consumes one word. Total: every word extends the path.
    pub fn step(&mut self, lexicon: &Lexicon, word: &str, speaker: Speaker) {
        if speaker == Speaker::System {
            // System words advance context but never update slots or trigger
            // repair in this domain.
            self.flush_marker_buffer();
            self.push_state(word, speaker, None);
            return;
        }

        // Incremental greedy marker matching.
        if !self.marker_buffer.is_empty() {
            let mut attempt = self.marker_buffer.clone();
            attempt.push(word.to_string());
            if lexicon.marker_prefix(&attempt) {
                self.push_state(word, speaker, None);
                self.marker_buffer = attempt;
                if lexicon.marker_exact(&self.marker_buffer).is_some()
                    && !lexicon.marker_extendable(&self.marker_buffer)
                {
                    self.fire_marker(lexicon);
                }
                return;
            }
            // The buffer can no longer grow into `attempt`; settle it first.
            if lexicon.marker_exact(&self.marker_buffer).is_some() {
                self.fire_marker(lexicon);
            } else {
                self.marker_buffer.clear();
            }
            // Fall through to process `word` fresh.
        }

        if self.pending_repair.is_some() {
            self.resolve_repair(lexicon, word, speaker);
            return;
        }

        let as_single = [word.to_string()];
        if lexicon.marker_prefix(&as_single) {
            self.push_state(word, speaker, None);
            self.marker_buffer = as_single.to_vec();
            if lexicon.marker_exact(&self.marker_buffer).is_some()
                && !lexicon.marker_extendable(&self.marker_buffer)
            {
                self.fire_marker(lexicon);
            }
            return;
        }

        let update = lexicon.slot_of(word);
        self.push_state(word, speaker, update);
    }

    fn push_state(&mut self, word: &str, speaker: Speaker, update: Option<Slot>) {
        let mut frame = self.frame().clone();
        let word_index = self.edges.len();
        if let Some(slot) = update {
            frame.set(slot, word, word_index);
        }
        self.edges.push(Edge {
            word: word.to_string(),
            speaker,
        });
        self.states.push(ParserState {
            frame,
            word_index: word_index + 1,
            speaker,
        });
    }

    fn fire_marker(&mut self, lexicon: &Lexicon) {
        let kind = lexicon
            .marker_exact(&self.marker_buffer)
            .expect("buffer holds a complete marker");
        // Markers and fillers are validated to never be slot values, so the
        // buffered words were already pushed as vacuous edges.
        self.marker_start = self.edges.len() - self.marker_buffer.len();
        self.marker_buffer.clear();
        self.pending_repair = Some(kind);
    }

    fn flush_marker_buffer(&mut self) {
        // Buffered words were pushed as no-op edges already; dropping the
        // buffer makes them plain words retroactively, which is semantically
        // identical because marker words never carry slot updates.
        if !self.marker_buffer.is_empty() {
            self.marker_buffer.clear();
        }
    }

    /// Backtrack search: find the most recent pre-marker state whose outgoing
    /// word aligns with the continuation's first word (same word, or a value
    /// of the same slot type), rewind the frame there, and re-parse from it.
    fn resolve_repair(&mut self, lexicon: &Lexicon, word: &str, speaker: Speaker) {
        debug_assert!(self.pending_repair.is_some());
        self.pending_repair = None;
        let cont_slot = lexicon.slot_of(word);
        let marker_start = self.marker_start;
        let mut resume: Option<usize> = None;
        let mut j = marker_start;
        while j > self.utterance_start {
            j -= 1;
            let edge = &self.edges[j];
            let aligns = edge.word == word
                || (cont_slot.is_some() && lexicon.slot_of(&edge.word) == cont_slot);
            if aligns {
                resume = Some(j);
                break;
            }
        }
        match resume {
            Some(j) => {
                // Non-monotonic rewind: the reparandum's updates vanish,
                // earlier content survives.
                let rewound = self.states[j].frame.clone();
                let word_index = self.edges.len();
                let mut frame = rewound;
                if let Some(slot) = lexicon.slot_of(word) {
                    frame.set(slot, word, word_index);
                }
                self.edges.push(Edge {
                    word: word.to_string(),
                    speaker,
                });
                self.states.push(ParserState {
                    frame,
                    word_index: word_index + 1,
                    speaker,
                });
                self.backtrack_repairs += 1;
            }
            None => {
                // No prior state admits the continuation: degrade to plain
                // overwrite semantics at the current state.
                self.fallback_repairs += 1;
                let update = lexicon.slot_of(word);
                self.push_state(word, speaker, update);
            }
        }
    }
}

/// Outcome of parsing a whole dialogue.
#[derive(Debug, Clone)]
pub struct ParseOutcome {
    pub frame: Frame,
    pub words_consumed: usize,
    pub backtrack_repairs: usize,
    pub fallback_repairs: usize,
}

/// Feeds every turn of the dialogue through the parser, word by word, in
/// context, and returns the final frame.
pub fn parse_dialogue(d: &Dialogue, lexicon: &Lexicon) -> Frame {
    parse_dialogue_traced(d, lexicon).frame
}

pub fn parse_dialogue_traced(d: &Dialogue, lexicon: &Lexicon) -> ParseOutcome {
    let mut path = ParsePath::new();
    for turn in &d.turns {
        path.begin_utterance();
        for word in &turn.tokens {
            path.step(lexicon, word, turn.speaker);
        }
    }
    path.begin_utterance();
    ParseOutcome {
        frame: path.frame().clone(),
        words_consumed: path.len(),
        backtrack_repairs: path.backtrack_repairs,
        fallback_repairs: path.fallback_repairs,
    }
}
