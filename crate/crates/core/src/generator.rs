//! Synthesizes clean Task-1 restaurant dialogues: the user opens with some
//! subset of their constraints, the system elicits the missing slots in a
//! fixed order, and the dialogue terminates in the matching api_call.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::RngExt;

use crate::corpus::{tokenize, ApiCall, Dialogue, Speaker, Turn};
use crate::rng::{derive_seed, rng_from_seed};

/// The four informable slots, in elicitation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slot {
    Cuisine,
    Location,
    PartySize,
    Price,
}

impl Slot {
    pub const ALL: [Slot; 4] = [Slot::Cuisine, Slot::Location, Slot::PartySize, Slot::Price];

    pub fn name(self) -> &'static str {
        match self {
            Slot::Cuisine => "cuisine",
            Slot::Location => "location",
            Slot::PartySize => "party_size",
            Slot::Price => "price",
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// A user phrase carrying one slot value, e.g. `with {} food`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhraseTemplate {
    pub before: Vec<String>,
    pub after: Vec<String>,
}

impl PhraseTemplate {
    /// Parses a template string with exactly one `{}` placeholder.
    pub fn parse(template: &str) -> Result<Self, ConfigError> {
        let tokens: Vec<&str> = template.split_whitespace().collect();
        let holes = tokens.iter().filter(|t| **t == "{}").count();
        if holes != 1 {
            return Err(ConfigError::BadTemplate {
                template: template.to_string(),
            });
        }
        let hole = tokens.iter().position(|t| *t == "{}").unwrap();
        let norm = |side: &[&str]| -> Result<Vec<String>, ConfigError> {
            let joined = side.join(" ");
            let toks = tokenize(&joined);
            if toks.len() != side.len() {
                return Err(ConfigError::BadTemplate {
                    template: template.to_string(),
                });
            }
            Ok(toks)
        };
        Ok(PhraseTemplate {
            before: norm(&tokens[..hole])?,
            after: norm(&tokens[hole + 1..])?,
        })
    }

    pub fn realize(&self, value: &str) -> Vec<String> {
        let mut out = self.before.clone();
        out.push(value.to_string());
        out.extend(self.after.iter().cloned());
        out
    }

    pub fn len(&self) -> usize {
        self.before.len() + 1 + self.after.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Task ontology: slot value lists plus the user/system surface templates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotVocab {
    pub cuisines: Vec<String>,
    pub locations: Vec<String>,
    pub party_sizes: Vec<String>,
    pub prices: Vec<String>,
    /// User greeting variants for the opening exchange.
    pub greetings: Vec<Vec<String>>,
    /// Request stems the opening utterance starts from.
    pub opening_bases: Vec<Vec<String>>,
    /// Slot-bearing phrases used inside the opening utterance.
    pub opening_phrases: [Vec<PhraseTemplate>; 4],
    /// Single-slot answer templates, one utterance per missing-slot question.
    pub answers: [Vec<PhraseTemplate>; 4],
    /// System side: greeting reply, acknowledgement stem, per-slot questions,
    /// confirmation.
    pub system_greeting: Vec<String>,
    pub system_ack: Vec<String>,
    pub system_questions: [Vec<String>; 4],
    pub system_confirmation: Vec<String>,
}

impl SlotVocab {
    /// The built-in ontology. Slot values seen in the source dialogues
    /// (french, spanish, indian, london, tokyo, four, eight, cheap, moderate,
    /// expensive) are all present.
    pub fn builtin() -> Self {
        let phrases = |specs: &[&str]| -> Vec<PhraseTemplate> {
            specs.iter().map(|s| PhraseTemplate::parse(s).unwrap()).collect()
        };
        let sentence = |s: &str| tokenize(s);
        SlotVocab {
            cuisines: str_vec(&[
                "french", "spanish", "indian", "italian", "british", "chinese", "thai",
                "mexican", "japanese", "korean",
            ]),
            locations: str_vec(&["london", "tokyo", "paris", "madrid", "rome", "bombay"]),
            party_sizes: str_vec(&["two", "four", "six", "eight"]),
            prices: str_vec(&["cheap", "moderate", "expensive"]),
            greetings: vec![
                sentence("hello"),
                sentence("hi"),
                sentence("good morning"),
                sentence("hi there"),
            ],
            opening_bases: vec![
                sentence("i'd like to book a table"),
                sentence("can you make a restaurant reservation"),
                sentence("can you book a table"),
                sentence("may i have a table"),
            ],
            opening_phrases: [
                phrases(&["with {} food", "with {} cuisine"]),
                phrases(&["in {}"]),
                phrases(&["for {} people"]),
                phrases(&["in a {} price range"]),
            ],
            answers: [
                phrases(&["with {} food", "with {} cuisine", "with {} food please"]),
                phrases(&["in {}", "in {} please", "somewhere in {}"]),
                phrases(&["for {} people", "for {} people please", "we will be {}"]),
                phrases(&["in a {} price range", "in a {} price range please"]),
            ],
            system_greeting: sentence("hello what can i help you with today"),
            system_ack: sentence("i'm on it"),
            system_questions: [
                sentence("any preference on a type of cuisine"),
                sentence("where should it be"),
                sentence("how many people would be in your party"),
                sentence("which price range are looking for"),
            ],
            system_confirmation: sentence("ok let me look into some options for you"),
        }
    }

    pub fn values(&self, slot: Slot) -> &[String] {
        match slot {
            Slot::Cuisine => &self.cuisines,
            Slot::Location => &self.locations,
            Slot::PartySize => &self.party_sizes,
            Slot::Price => &self.prices,
        }
    }

    /// Slot type of a token, if it is a slot value.
    pub fn slot_of(&self, token: &str) -> Option<Slot> {
        Slot::ALL
            .into_iter()
            .find(|&slot| self.values(slot).iter().any(|v| v == token))
    }

    /// All phrase templates that can carry `slot` (openings and answers).
    pub fn phrase_templates(&self, slot: Slot) -> impl Iterator<Item = &PhraseTemplate> {
        let idx = slot as usize;
        self.opening_phrases[idx].iter().chain(self.answers[idx].iter())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for slot in Slot::ALL {
            let values = self.values(slot);
            if values.is_empty() {
                return Err(ConfigError::EmptyList { what: slot.name() });
            }
            for (i, v) in values.iter().enumerate() {
                if v.is_empty() || tokenize(v) != [v.clone()] {
                    return Err(ConfigError::BadValue { value: v.clone() });
                }
                if values[..i].contains(v) {
                    return Err(ConfigError::DuplicateValue { value: v.clone() });
                }
            }
        }
        // Values must be unambiguous across slot types.
        for (i, a) in Slot::ALL.iter().enumerate() {
            for b in &Slot::ALL[i + 1..] {
                for v in self.values(*a) {
                    if self.values(*b).contains(v) {
                        return Err(ConfigError::DuplicateValue { value: v.clone() });
                    }
                }
            }
        }
        let lists: [(&str, bool); 7] = [
            ("greetings", self.greetings.is_empty()),
            ("opening_bases", self.opening_bases.is_empty()),
            ("system_greeting", self.system_greeting.is_empty()),
            ("system_ack", self.system_ack.is_empty()),
            ("system_confirmation", self.system_confirmation.is_empty()),
            (
                "opening_phrases",
                self.opening_phrases.iter().any(Vec::is_empty),
            ),
            ("answers", self.answers.iter().any(Vec::is_empty)),
        ];
        for (what, empty) in lists {
            if empty {
                return Err(ConfigError::EmptyList { what });
            }
        }
        if self.system_questions.iter().any(Vec::is_empty) {
            return Err(ConfigError::EmptyList { what: "system_questions" });
        }
        // Template fixed words must not collide with slot values, otherwise
        // goal consistency is unverifiable.
        let mut fixed: Vec<&String> = Vec::new();
        fixed.extend(self.greetings.iter().flatten());
        fixed.extend(self.opening_bases.iter().flatten());
        for templates in self.opening_phrases.iter().chain(self.answers.iter()) {
            for t in templates {
                fixed.extend(t.before.iter());
                fixed.extend(t.after.iter());
            }
        }
        for token in fixed {
            if self.slot_of(token).is_some() {
                return Err(ConfigError::TemplateUsesSlotValue { token: token.clone() });
            }
        }
        Ok(())
    }
}

fn str_vec(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

/// A sampled user goal: one value per slot plus the slots volunteered in the
/// opening utterance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Goal {
    pub cuisine: String,
    pub location: String,
    pub party_size: String,
    pub price: String,
    pub initially_mentioned: Vec<Slot>,
}

impl Goal {
    pub fn value(&self, slot: Slot) -> &str {
        match slot {
            Slot::Cuisine => &self.cuisine,
            Slot::Location => &self.location,
            Slot::PartySize => &self.party_size,
            Slot::Price => &self.price,
        }
    }

    pub fn api_call(&self) -> ApiCall {
        ApiCall::new(&self.cuisine, &self.location, &self.party_size, &self.price)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConfigError {
    EmptyList { what: &'static str },
    BadValue { value: String },
    DuplicateValue { value: String },
    BadTemplate { template: String },
    TemplateUsesSlotValue { token: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::EmptyList { what } => write!(f, "empty vocabulary list: {what}"),
            ConfigError::BadValue { value } => write!(f, "slot value {value:?} is not a single normalized token"),
            ConfigError::DuplicateValue { value } => write!(f, "slot value {value:?} appears more than once"),
            ConfigError::BadTemplate { template } => {
                write!(f, "template {template:?} must contain exactly one {{}} placeholder")
            }
            ConfigError::TemplateUsesSlotValue { token } => {
                write!(f, "template word {token:?} collides with a slot value")
            }
        }
    }
}

impl core::error::Error for ConfigError {}

/// Samples a goal from the vocabulary.
pub fn sample_goal<R: RngExt>(rng: &mut R, vocab: &SlotVocab) -> Goal {
    let pick = |rng: &mut R, list: &[String]| list[rng.random_range(0..list.len())].clone();
    let cuisine = pick(rng, &vocab.cuisines);
    let location = pick(rng, &vocab.locations);
    let party_size = pick(rng, &vocab.party_sizes);
    let price = pick(rng, &vocab.prices);
    let n_mentioned = rng.random_range(0..=4);
    let mut slots = Slot::ALL;
    slots.shuffle(rng);
    let mut initially_mentioned: Vec<Slot> = slots[..n_mentioned].to_vec();
    initially_mentioned.sort();
    Goal {
        cuisine,
        location,
        party_size,
        price,
        initially_mentioned,
    }
}

/// Generates one dialogue from a seed. Equal (seed, vocab) pairs produce
/// byte-identical dialogues.
pub fn generate_dialogue(seed: u64, vocab: &SlotVocab) -> Result<Dialogue, ConfigError> {
    vocab.validate()?;
    let mut rng = rng_from_seed(seed);
    let goal = sample_goal(&mut rng, vocab);
    Ok(realize_dialogue(&mut rng, &goal, vocab))
}

/// Renders a dialogue for a fixed goal; the rng drives template choice only.
pub fn generate_dialogue_with_goal<R: RngExt>(
    rng: &mut R,
    goal: &Goal,
    vocab: &SlotVocab,
) -> Result<Dialogue, ConfigError> {
    vocab.validate()?;
    Ok(realize_dialogue(rng, goal, vocab))
}

fn pick_template<'a, R: RngExt>(rng: &mut R, list: &'a [PhraseTemplate]) -> &'a PhraseTemplate {
    &list[rng.random_range(0..list.len())]
}

fn realize_dialogue<R: RngExt>(rng: &mut R, goal: &Goal, vocab: &SlotVocab) -> Dialogue {
    let pick_sentence = |rng: &mut R, list: &[Vec<String>]| list[rng.random_range(0..list.len())].clone();

    let mut turns = Vec::new();

    // Greeting exchange.
    turns.push(Turn::new(Speaker::User, pick_sentence(rng, &vocab.greetings)));
    turns.push(Turn::new(Speaker::System, vocab.system_greeting.clone()));

    // Opening request realizing the initially mentioned slots in slot order.
    let mut opening = pick_sentence(rng, &vocab.opening_bases);
    for slot in Slot::ALL {
        if goal.initially_mentioned.contains(&slot) {
            let template = pick_template(rng, &vocab.opening_phrases[slot as usize]);
            opening.extend(template.realize(goal.value(slot)));
        }
    }
    turns.push(Turn::new(Speaker::User, opening));

    let missing: Vec<Slot> = Slot::ALL
        .into_iter()
        .filter(|s| !goal.initially_mentioned.contains(s))
        .collect();

    // The system reply to the opening: acknowledgement plus the first
    // question, or the confirmation when nothing is missing.
    let question = |slot: Slot| vocab.system_questions[slot as usize].clone();
    let first_reply = match missing.first() {
        Some(&slot) => {
            let mut reply = vocab.system_ack.clone();
            reply.extend(question(slot));
            reply
        }
        None => vocab.system_confirmation.clone(),
    };
    turns.push(Turn::new(Speaker::System, first_reply));

    // One answer exchange per missing slot; the system follows up with the
    // next question, then confirms after the last answer.
    for (i, &slot) in missing.iter().enumerate() {
        let template = pick_template(rng, &vocab.answers[slot as usize]);
        turns.push(Turn::new(Speaker::User, template.realize(goal.value(slot))));
        let reply = match missing.get(i + 1) {
            Some(&next) => question(next),
            None => vocab.system_confirmation.clone(),
        };
        turns.push(Turn::new(Speaker::System, reply));
    }

    // Restore strict user/system alternation: the opening pushed user+system
    // already, so turns are built in order. Assign id later.
    Dialogue {
        id: 0,
        turns,
        api_call: goal.api_call(),
    }
}

/// Generates `n` dialogues; dialogue `i` is driven by `derive_seed(master, i)`
/// so the corpus is reproducible item by item.
pub fn generate_corpus(n: usize, master_seed: u64, vocab: &SlotVocab) -> Result<Vec<Dialogue>, ConfigError> {
    vocab.validate()?;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut rng = rng_from_seed(derive_seed(master_seed, i as u64));
        let goal = sample_goal(&mut rng, vocab);
        let mut d = realize_dialogue(&mut rng, &goal, vocab);
        d.id = i;
        out.push(d);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::serialize_dialog_file;

    #[test]
    fn builtin_vocab_is_valid_and_has_source_values() {
        let v = SlotVocab::builtin();
        v.validate().unwrap();
        for value in ["french", "spanish", "indian"] {
            assert!(v.cuisines.iter().any(|c| c == value));
        }
        for value in ["london", "tokyo"] {
            assert!(v.locations.iter().any(|c| c == value));
        }
        for value in ["four", "eight"] {
            assert!(v.party_sizes.iter().any(|c| c == value));
        }
        for value in ["cheap", "moderate", "expensive"] {
            assert!(v.prices.iter().any(|c| c == value));
        }
    }

    #[test]
    fn all_slots_mentioned_up_front() {
        let vocab = SlotVocab::builtin();
        let goal = Goal {
            cuisine: "french".into(),
            location: "london".into(),
            party_size: "four".into(),
            price: "expensive".into(),
            initially_mentioned: Slot::ALL.to_vec(),
        };
        let mut rng = rng_from_seed(11);
        let d = generate_dialogue_with_goal(&mut rng, &goal, &vocab).unwrap();
        let opening = &d.turns[2];
        assert_eq!(opening.speaker, Speaker::User);
        for value in ["french", "london", "four", "expensive"] {
            assert!(opening.tokens.iter().any(|t| t == value), "missing {value}");
        }
        assert_eq!(d.api_call.to_string(), "api_call french london four expensive");
        // No follow-up questions: greeting, opening+confirmation only.
        assert_eq!(d.turns.len(), 4);
    }

    #[test]
    fn no_initial_mentions_yields_four_questions() {
        let vocab = SlotVocab::builtin();
        let goal = Goal {
            cuisine: "spanish".into(),
            location: "tokyo".into(),
            party_size: "eight".into(),
            price: "cheap".into(),
            initially_mentioned: Vec::new(),
        };
        let mut rng = rng_from_seed(3);
        let d = generate_dialogue_with_goal(&mut rng, &goal, &vocab).unwrap();
        let system_text: Vec<String> = d
            .turns
            .iter()
            .filter(|t| t.speaker == Speaker::System)
            .map(Turn::text)
            .collect();
        let questions = [
            "any preference on a type of cuisine",
            "where should it be",
            "how many people would be in your party",
            "which price range are looking for",
        ];
        for q in questions {
            assert!(
                system_text.iter().any(|s| s.ends_with(q)),
                "question {q:?} not asked"
            );
        }
        // greeting + opening reply + 3 follow-ups + confirmation = 6 system turns.
        assert_eq!(system_text.len(), 6);
        assert_eq!(system_text.last().unwrap(), "ok let me look into some options for you");
    }

    #[test]
    fn same_seed_same_bytes() {
        let vocab = SlotVocab::builtin();
        let a = generate_dialogue(42, &vocab).unwrap();
        let b = generate_dialogue(42, &vocab).unwrap();
        assert_eq!(
            serialize_dialog_file(core::slice::from_ref(&a)).unwrap(),
            serialize_dialog_file(core::slice::from_ref(&b)).unwrap()
        );
    }

    #[test]
    fn empty_corpus() {
        assert_eq!(generate_corpus(0, 1, &SlotVocab::builtin()).unwrap(), Vec::new());
    }

    #[test]
    fn corpus_size_and_serializability() {
        let vocab = SlotVocab::builtin();
        let corpus = generate_corpus(50, 9, &vocab).unwrap();
        assert_eq!(corpus.len(), 50);
        serialize_dialog_file(&corpus).unwrap();
    }

    #[test]
    fn goal_consistency_no_stray_same_slot_values() {
        let vocab = SlotVocab::builtin();
        for d in generate_corpus(200, 21, &vocab).unwrap() {
            let api = d.api_call.clone();
            for turn in &d.turns {
                for token in &turn.tokens {
                    if let Some(slot) = vocab.slot_of(token) {
                        let expected = match slot {
                            Slot::Cuisine => &api.cuisine,
                            Slot::Location => &api.location,
                            Slot::PartySize => &api.party_size,
                            Slot::Price => &api.price,
                        };
                        assert_eq!(token, expected, "stray {slot} value in dialogue {}", d.id);
                    }
                }
            }
        }
    }

    #[test]
    fn empty_vocab_list_is_config_error() {
        let mut vocab = SlotVocab::builtin();
        vocab.prices.clear();
        assert_eq!(
            generate_dialogue(1, &vocab),
            Err(ConfigError::EmptyList { what: "price" })
        );
    }
}
