//! Turns clean dialogues into disfluent ones by mixing hesitations, restarts
//! and self-corrections into user turns. System turns and the api_call are
//! never touched, so the underlying task stays fixed while the surface form
//! degrades.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use rand::RngExt;

use crate::corpus::{Dialogue, Speaker, Turn};
use crate::generator::{PhraseTemplate, Slot, SlotVocab};
use crate::rng::{derive_seed, rng_from_seed};

/// Mixing probabilities and marker inventories.
///
/// Probabilities are corpus-level target rates over all user turns. Turns
/// that cannot host a phenomenon (a correction needs a slot value, a restart
/// needs two tokens and a slot-free first token) are skipped, so
/// [`augment_corpus`] rescales the per-turn coin on eligible turns to land on
/// the configured rate in expectation.
#[derive(Debug, Clone, PartialEq)]
pub struct DisfluencyConfig {
    pub p_hesitation: f64,
    pub p_restart: f64,
    pub p_correction: f64,
    pub filler_tokens: Vec<String>,
    pub restart_markers: Vec<Vec<String>>,
    pub correction_markers: Vec<Vec<String>>,
    pub seed: u64,
}

impl DisfluencyConfig {
    pub fn new(seed: u64) -> Self {
        let phrase = |s: &str| s.split(' ').map(str::to_string).collect::<Vec<_>>();
        DisfluencyConfig {
            p_hesitation: 0.40,
            p_restart: 0.05,
            p_correction: 0.21,
            filler_tokens: ["uhm", "uh"].iter().map(|s| s.to_string()).collect(),
            restart_markers: [phrase("uhm yeah")].to_vec(),
            correction_markers: ["no sorry", "oh no", "uhm sorry", "sorry"]
                .iter()
                .map(|s| phrase(s))
                .collect(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), DisfluencyConfigError> {
        for (name, p) in [
            ("p_hesitation", self.p_hesitation),
            ("p_restart", self.p_restart),
            ("p_correction", self.p_correction),
        ] {
            if !(0.0..=1.0).contains(&p) || p.is_nan() {
                return Err(DisfluencyConfigError::BadProbability { name, value: p });
            }
        }
        if self.filler_tokens.is_empty()
            || self.restart_markers.is_empty()
            || self.correction_markers.is_empty()
        {
            return Err(DisfluencyConfigError::EmptyMarkerList);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DisfluencyConfigError {
    BadProbability { name: &'static str, value: f64 },
    EmptyMarkerList,
}

impl fmt::Display for DisfluencyConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DisfluencyConfigError::BadProbability { name, value } => {
                write!(f, "{name} = {value} is not a probability")
            }
            DisfluencyConfigError::EmptyMarkerList => write!(f, "marker/filler lists must be non-empty"),
        }
    }
}

impl core::error::Error for DisfluencyConfigError {}

/// Counters reported by [`augment_corpus`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AugmentationStats {
    pub dialogues_processed: usize,
    pub user_turns: usize,
    pub utterances_affected: usize,
    pub turns_with_correction: usize,
    pub turns_with_hesitation: usize,
    pub turns_with_restart: usize,
    /// Sampled applications that had to be skipped by the per-op rules.
    pub correction_skips: usize,
    pub restart_skips: usize,
}

impl AugmentationStats {
    pub fn correction_rate(&self) -> f64 {
        self.rate(self.turns_with_correction)
    }

    pub fn hesitation_rate(&self) -> f64 {
        self.rate(self.turns_with_hesitation)
    }

    pub fn restart_rate(&self) -> f64 {
        self.rate(self.turns_with_restart)
    }

    fn rate(&self, count: usize) -> f64 {
        if self.user_turns == 0 {
            0.0
        } else {
            count as f64 / self.user_turns as f64
        }
    }
}

/// Inserts one filler token at a word boundary that is not sentence-final.
/// All original tokens survive in order.
pub fn apply_hesitation<R: RngExt>(turn: &Turn, rng: &mut R, cfg: &DisfluencyConfig) -> Turn {
    debug_assert_eq!(turn.speaker, Speaker::User);
    if turn.tokens.is_empty() {
        return turn.clone();
    }
    let filler = cfg.filler_tokens[rng.random_range(0..cfg.filler_tokens.len())].clone();
    let at = rng.random_range(0..turn.tokens.len());
    let mut tokens = Vec::with_capacity(turn.tokens.len() + 1);
    tokens.extend_from_slice(&turn.tokens[..at]);
    tokens.push(filler);
    tokens.extend_from_slice(&turn.tokens[at..]);
    Turn::new(turn.speaker, tokens)
}

/// Abandons a slot-free utterance prefix, utters a restart marker, then the
/// whole utterance again. Returns the turn unchanged (and reports `false`)
/// when no slot-free prefix exists.
pub fn apply_restart<R: RngExt>(
    turn: &Turn,
    rng: &mut R,
    cfg: &DisfluencyConfig,
    vocab: &SlotVocab,
) -> (Turn, bool) {
    debug_assert_eq!(turn.speaker, Speaker::User);
    let len = turn.tokens.len();
    if len < 2 {
        return (turn.clone(), false);
    }
    let slot_free = turn
        .tokens
        .iter()
        .take_while(|t| vocab.slot_of(t).is_none())
        .count();
    if slot_free == 0 {
        return (turn.clone(), false);
    }
    let sampled = rng.random_range(1..=len.min(5));
    let k = sampled.min(slot_free);
    let marker = &cfg.restart_markers[rng.random_range(0..cfg.restart_markers.len())];
    let mut tokens = Vec::with_capacity(k + marker.len() + len);
    tokens.extend_from_slice(&turn.tokens[..k]);
    tokens.extend(marker.iter().cloned());
    tokens.extend_from_slice(&turn.tokens);
    (Turn::new(turn.speaker, tokens), true)
}

/// Replaces one slot-value occurrence with `<wrong> <marker> <correct>`
/// (token level) or `<wrong phrase> <marker> <correct phrase>` (phrase
/// level), leaving the rightmost same-slot value equal to the goal value.
/// Returns the turn unchanged (and reports `false`) when it carries no slot
/// value or the slot vocabulary has no alternative value.
pub fn apply_correction<R: RngExt>(
    turn: &Turn,
    rng: &mut R,
    cfg: &DisfluencyConfig,
    goal: &crate::corpus::ApiCall,
    vocab: &SlotVocab,
) -> (Turn, bool) {
    debug_assert_eq!(turn.speaker, Speaker::User);
    let occurrences: Vec<(usize, Slot)> = turn
        .tokens
        .iter()
        .enumerate()
        .filter_map(|(i, t)| vocab.slot_of(t).map(|s| (i, s)))
        .collect();
    if occurrences.is_empty() {
        return (turn.clone(), false);
    }
    let (index, slot) = occurrences[rng.random_range(0..occurrences.len())];
    let correct = goal_value(goal, slot).to_string();
    let alternatives: Vec<&String> = vocab.values(slot).iter().filter(|v| **v != correct).collect();
    if alternatives.is_empty() {
        return (turn.clone(), false);
    }
    let wrong = alternatives[rng.random_range(0..alternatives.len())].clone();
    let marker = &cfg.correction_markers[rng.random_range(0..cfg.correction_markers.len())];
    let long_distance = rng.random_bool(0.5);

    let (span_start, span_end) = if long_distance {
        phrase_span(&turn.tokens, index, slot, vocab)
    } else {
        (index, index + 1)
    };

    // Reparandum: the span re-rendered with the wrong value; repair: the
    // original span, whose slot token is the correct value.
    let mut replacement: Vec<String> = Vec::new();
    for (i, tok) in turn.tokens[span_start..span_end].iter().enumerate() {
        if span_start + i == index {
            replacement.push(wrong.clone());
        } else {
            replacement.push(tok.clone());
        }
    }
    replacement.extend(marker.iter().cloned());
    replacement.extend(turn.tokens[span_start..span_end].iter().cloned());

    let mut tokens = Vec::with_capacity(turn.tokens.len() + replacement.len());
    tokens.extend_from_slice(&turn.tokens[..span_start]);
    tokens.extend(replacement);
    tokens.extend_from_slice(&turn.tokens[span_end..]);
    (Turn::new(turn.speaker, tokens), true)
}

fn goal_value(goal: &crate::corpus::ApiCall, slot: Slot) -> &str {
    match slot {
        Slot::Cuisine => &goal.cuisine,
        Slot::Location => &goal.location,
        Slot::PartySize => &goal.party_size,
        Slot::Price => &goal.price,
    }
}

/// Finds the template phrase enclosing the slot occurrence at `index`,
/// preferring the longest match; falls back to the bare token.
fn phrase_span(tokens: &[String], index: usize, slot: Slot, vocab: &SlotVocab) -> (usize, usize) {
    let mut best: (usize, usize) = (index, index + 1);
    let mut best_len = 1usize;
    for template in vocab.phrase_templates(slot) {
        if let Some(span) = match_template(tokens, index, template) {
            if template.len() > best_len {
                best_len = template.len();
                best = span;
            }
        }
    }
    best
}

fn match_template(tokens: &[String], index: usize, t: &PhraseTemplate) -> Option<(usize, usize)> {
    let start = index.checked_sub(t.before.len())?;
    let end = index + 1 + t.after.len();
    if end > tokens.len() {
        return None;
    }
    let before_ok = tokens[start..index].iter().zip(&t.before).all(|(a, b)| a == b);
    let after_ok = tokens[index + 1..end].iter().zip(&t.after).all(|(a, b)| a == b);
    (before_ok && after_ok).then_some((start, end))
}

/// Which phenomena a turn can host at all.
#[derive(Debug, Clone, Copy, Default)]
struct Eligibility {
    correction: bool,
    restart: bool,
    hesitation: bool,
}

fn eligibility(turn: &Turn, vocab: &SlotVocab) -> Eligibility {
    let has_slot = turn.tokens.iter().any(|t| vocab.slot_of(t).is_some());
    Eligibility {
        correction: has_slot,
        restart: turn.tokens.len() >= 2
            && turn.tokens.first().map(|t| vocab.slot_of(t).is_none()) == Some(true),
        hesitation: !turn.tokens.is_empty(),
    }
}

/// Per-turn coin probabilities rescaled so that expected corpus-level rates
/// match the configured ones despite ineligible turns.
#[derive(Debug, Clone, Copy)]
struct EffectiveRates {
    correction: f64,
    restart: f64,
    hesitation: f64,
}

fn effective_rates(dialogues: &[Dialogue], cfg: &DisfluencyConfig, vocab: &SlotVocab) -> EffectiveRates {
    let mut total = 0usize;
    let mut counts = [0usize; 3];
    for d in dialogues {
        for turn in d.user_turns() {
            total += 1;
            let e = eligibility(turn, vocab);
            counts[0] += usize::from(e.correction);
            counts[1] += usize::from(e.restart);
            counts[2] += usize::from(e.hesitation);
        }
    }
    let scale = |p: f64, n: usize| -> f64 {
        if n == 0 {
            0.0
        } else {
            (p * total as f64 / n as f64).min(1.0)
        }
    };
    EffectiveRates {
        correction: scale(cfg.p_correction, counts[0]),
        restart: scale(cfg.p_restart, counts[1]),
        hesitation: scale(cfg.p_hesitation, counts[2]),
    }
}

/// Applies the configured phenomena to every user turn of every dialogue.
///
/// Sampling is independent per user turn; when several phenomena hit the
/// same turn they apply as correction, then restart, then hesitation, so a
/// restart can copy a corrected prefix. Deterministic in (input order,
/// `cfg.seed`); dialogue `i` draws from `derive_seed(cfg.seed, i)`.
pub fn augment_corpus(
    dialogues: &[Dialogue],
    cfg: &DisfluencyConfig,
    vocab: &SlotVocab,
) -> Result<(Vec<Dialogue>, AugmentationStats), DisfluencyConfigError> {
    cfg.validate()?;
    let rates = effective_rates(dialogues, cfg, vocab);
    let mut stats = AugmentationStats::default();
    let mut out = Vec::with_capacity(dialogues.len());

    for (i, d) in dialogues.iter().enumerate() {
        let mut rng = rng_from_seed(derive_seed(cfg.seed, i as u64));
        let mut turns = Vec::with_capacity(d.turns.len());
        for turn in &d.turns {
            if turn.speaker != Speaker::User {
                turns.push(turn.clone());
                continue;
            }
            stats.user_turns += 1;
            let e = eligibility(turn, vocab);
            let want_correction = e.correction && rng.random_bool(rates.correction);
            let want_restart = e.restart && rng.random_bool(rates.restart);
            let want_hesitation = e.hesitation && rng.random_bool(rates.hesitation);

            let mut current = turn.clone();
            let mut affected = false;
            if want_correction {
                let (next, applied) = apply_correction(&current, &mut rng, cfg, &d.api_call, vocab);
                current = next;
                if applied {
                    stats.turns_with_correction += 1;
                    affected = true;
                } else {
                    stats.correction_skips += 1;
                }
            }
            if want_restart {
                let (next, applied) = apply_restart(&current, &mut rng, cfg, vocab);
                current = next;
                if applied {
                    stats.turns_with_restart += 1;
                    affected = true;
                } else {
                    stats.restart_skips += 1;
                }
            }
            if want_hesitation {
                current = apply_hesitation(&current, &mut rng, cfg);
                stats.turns_with_hesitation += 1;
                affected = true;
            }
            if affected {
                stats.utterances_affected += 1;
            }
            turns.push(current);
        }
        stats.dialogues_processed += 1;
        out.push(Dialogue {
            id: d.id,
            turns,
            api_call: d.api_call.clone(),
        });
    }
    Ok((out, stats))
}

/// Builds an enlarged disfluent corpus by repeatedly re-augmenting the same
/// clean dialogues with fresh randomness per pass, then truncating to
/// `target` dialogues. Ids are reassigned sequentially.
pub fn extend_corpus(
    clean: &[Dialogue],
    target: usize,
    cfg: &DisfluencyConfig,
    vocab: &SlotVocab,
) -> Result<Vec<Dialogue>, DisfluencyConfigError> {
    let mut out = Vec::with_capacity(target);
    let mut pass = 0u64;
    while out.len() < target {
        let mut pass_cfg = cfg.clone();
        pass_cfg.seed = derive_seed(cfg.seed, pass);
        let (augmented, _) = augment_corpus(clean, &pass_cfg, vocab)?;
        for mut d in augmented {
            if out.len() >= target {
                break;
            }
            d.id = out.len();
            out.push(d);
        }
        pass += 1;
        if clean.is_empty() {
            break;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{serialize_dialog_file, ApiCall};
    use crate::generator::{generate_corpus, SlotVocab};

    fn user(text: &str) -> Turn {
        Turn::from_text(Speaker::User, text)
    }

    #[test]
    fn hesitation_shapes() {
        let cfg = DisfluencyConfig::new(0);
        let input = user("we will be eight");
        let mut seen_target = false;
        for seed in 0..64 {
            let mut rng = rng_from_seed(seed);
            let out = apply_hesitation(&input, &mut rng, &cfg);
            assert_eq!(out.tokens.len(), 5);
            // Never sentence-final.
            assert!(!cfg.filler_tokens.contains(out.tokens.last().unwrap()));
            let stripped: Vec<&String> = out
                .tokens
                .iter()
                .filter(|t| !cfg.filler_tokens.contains(t))
                .collect();
            assert_eq!(stripped, input.tokens.iter().collect::<Vec<_>>());
            if out.text() == "we will be uhm eight" {
                seen_target = true;
            }
        }
        assert!(seen_target, "paper form never produced");
    }

    #[test]
    fn hesitation_single_token_forced_position() {
        let cfg = DisfluencyConfig::new(0);
        let mut rng = rng_from_seed(5);
        let out = apply_hesitation(&user("eight"), &mut rng, &cfg);
        assert!(out.text() == "uhm eight" || out.text() == "uh eight");
    }

    #[test]
    fn restart_repeats_full_utterance() {
        let cfg = DisfluencyConfig::new(0);
        let vocab = SlotVocab::builtin();
        let input = user(
            "can you make a restaurant reservation for four people with french cuisine in a moderate price range",
        );
        let mut seen_paper_form = false;
        for seed in 0..64 {
            let mut rng = rng_from_seed(seed);
            let (out, applied) = apply_restart(&input, &mut rng, &cfg, &vocab);
            assert!(applied);
            // Original utterance is a contiguous suffix.
            assert!(out.tokens.ends_with(&input.tokens));
            if out.text()
                == "can you make a restaurant uhm yeah can you make a restaurant reservation for four people with french cuisine in a moderate price range"
            {
                seen_paper_form = true;
            }
        }
        assert!(seen_paper_form);
    }

    #[test]
    fn restart_skips_when_first_token_is_slot_value() {
        let cfg = DisfluencyConfig::new(0);
        let vocab = SlotVocab::builtin();
        let input = user("french food please");
        let mut rng = rng_from_seed(1);
        let (out, applied) = apply_restart(&input, &mut rng, &cfg, &vocab);
        assert!(!applied);
        assert_eq!(out, input);
    }

    #[test]
    fn correction_forms() {
        let cfg = DisfluencyConfig::new(0);
        let vocab = SlotVocab::builtin();
        let goal = ApiCall::new("spanish", "tokyo", "eight", "cheap");
        let input = user("with spanish food");
        let mut seen_short = false;
        let mut seen_long = false;
        for seed in 0..256 {
            let mut rng = rng_from_seed(seed);
            let (out, applied) = apply_correction(&input, &mut rng, &cfg, &goal, &vocab);
            assert!(applied);
            let text = out.text();
            if text == "with french oh no spanish food" {
                seen_short = true;
            }
            if text == "with french food uhm sorry with spanish food" {
                seen_long = true;
            }
            // Rightmost cuisine value is always the goal value.
            let last_cuisine = out
                .tokens
                .iter()
                .rev()
                .find(|t| vocab.slot_of(t) == Some(Slot::Cuisine))
                .unwrap();
            assert_eq!(last_cuisine, "spanish");
            // Exactly one incorrect same-slot value.
            let wrong = out
                .tokens
                .iter()
                .filter(|t| vocab.slot_of(t) == Some(Slot::Cuisine) && *t != "spanish")
                .count();
            assert_eq!(wrong, 1);
        }
        assert!(seen_short, "short-distance paper form never produced");
        assert!(seen_long, "long-distance paper form never produced");
    }

    #[test]
    fn correction_skips_slotless_turn() {
        let cfg = DisfluencyConfig::new(0);
        let vocab = SlotVocab::builtin();
        let goal = ApiCall::new("spanish", "tokyo", "eight", "cheap");
        let mut rng = rng_from_seed(1);
        let (out, applied) = apply_correction(&user("good morning"), &mut rng, &cfg, &goal, &vocab);
        assert!(!applied);
        assert_eq!(out.text(), "good morning");
    }

    #[test]
    fn zero_probabilities_are_identity() {
        let vocab = SlotVocab::builtin();
        let corpus = generate_corpus(40, 3, &vocab).unwrap();
        let mut cfg = DisfluencyConfig::new(9);
        cfg.p_correction = 0.0;
        cfg.p_restart = 0.0;
        cfg.p_hesitation = 0.0;
        let (out, stats) = augment_corpus(&corpus, &cfg, &vocab).unwrap();
        assert_eq!(out, corpus);
        assert_eq!(stats.utterances_affected, 0);
        assert_eq!(stats.turns_with_correction, 0);
    }

    #[test]
    fn augmentation_preserves_api_call_and_system_turns() {
        let vocab = SlotVocab::builtin();
        let corpus = generate_corpus(60, 17, &vocab).unwrap();
        let cfg = DisfluencyConfig::new(23);
        let (out, _) = augment_corpus(&corpus, &cfg, &vocab).unwrap();
        for (before, after) in corpus.iter().zip(&out) {
            assert_eq!(before.api_call, after.api_call);
            assert_eq!(before.turns.len(), after.turns.len());
            for (b, a) in before.turns.iter().zip(&after.turns) {
                if b.speaker == Speaker::System {
                    assert_eq!(b, a);
                }
            }
        }
    }

    #[test]
    fn augmentation_is_deterministic() {
        let vocab = SlotVocab::builtin();
        let corpus = generate_corpus(30, 5, &vocab).unwrap();
        let cfg = DisfluencyConfig::new(77);
        let (a, sa) = augment_corpus(&corpus, &cfg, &vocab).unwrap();
        let (b, sb) = augment_corpus(&corpus, &cfg, &vocab).unwrap();
        assert_eq!(
            serialize_dialog_file(&a).unwrap(),
            serialize_dialog_file(&b).unwrap()
        );
        assert_eq!(sa, sb);
    }

    #[test]
    fn rates_land_near_targets() {
        let vocab = SlotVocab::builtin();
        let corpus = generate_corpus(3998, 123, &vocab).unwrap();
        let cfg = DisfluencyConfig::new(987);
        let (_, stats) = augment_corpus(&corpus, &cfg, &vocab).unwrap();
        let c = stats.correction_rate();
        let h = stats.hesitation_rate();
        let r = stats.restart_rate();
        assert!((c - 0.21).abs() <= 0.02, "correction rate {c}");
        assert!((h - 0.40).abs() <= 0.02, "hesitation rate {h}");
        assert!((r - 0.05).abs() <= 0.01, "restart rate {r}");
    }
}
