//! Dialogue data model and the dialog text file format.
//!
//! A corpus file holds dialogues as numbered exchange lines, one
//! `N user_tokens<TAB>system_tokens` line per exchange with `N` restarting at
//! 1 for every dialogue, terminated by an api_call line whose user side is
//! empty, dialogues separated by a single blank line, LF endings, trailing
//! newline. Parsing and serialization are strict inverses, byte for byte.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

/// Who uttered a turn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Speaker {
    User,
    System,
}

impl fmt::Display for Speaker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Speaker::User => write!(f, "user"),
            Speaker::System => write!(f, "system"),
        }
    }
}

/// One utterance: a speaker tag and a non-empty lowercase token sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Turn {
    pub speaker: Speaker,
    pub tokens: Vec<String>,
}

impl Turn {
    pub fn new(speaker: Speaker, tokens: Vec<String>) -> Self {
        Turn { speaker, tokens }
    }

    /// Builds a turn by tokenizing raw text.
    pub fn from_text(speaker: Speaker, text: &str) -> Self {
        Turn {
            speaker,
            tokens: tokenize(text),
        }
    }

    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }
}

/// The four-slot action that terminates a Task-1 dialogue.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ApiCall {
    pub cuisine: String,
    pub location: String,
    pub party_size: String,
    pub price: String,
}

impl ApiCall {
    pub fn new(cuisine: &str, location: &str, party_size: &str, price: &str) -> Self {
        ApiCall {
            cuisine: cuisine.to_string(),
            location: location.to_string(),
            party_size: party_size.to_string(),
            price: price.to_string(),
        }
    }

    /// Slot values in canonical order (cuisine, location, party_size, price).
    pub fn values(&self) -> [&str; 4] {
        [&self.cuisine, &self.location, &self.party_size, &self.price]
    }
}

impl fmt::Display for ApiCall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "api_call {} {} {} {}",
            self.cuisine, self.location, self.party_size, self.price
        )
    }
}

/// A full dialogue: alternating user/system turns plus the terminal api_call.
///
/// `id` is the dialogue's position in its source corpus; it is assigned at
/// parse or generation time and never serialized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dialogue {
    pub id: usize,
    pub turns: Vec<Turn>,
    pub api_call: ApiCall,
}

impl Dialogue {
    /// User/system turn pairs in order.
    pub fn exchanges(&self) -> impl Iterator<Item = (&Turn, &Turn)> {
        self.turns.chunks_exact(2).map(|pair| (&pair[0], &pair[1]))
    }

    pub fn user_turns(&self) -> impl Iterator<Item = &Turn> {
        self.turns.iter().filter(|t| t.speaker == Speaker::User)
    }
}

/// Returns the dialogue's api_call.
pub fn extract_api_call(d: &Dialogue) -> &ApiCall {
    &d.api_call
}

/// Lowercases, splits on whitespace, strips punctuation from token edges.
/// Apostrophes survive ("i'd"); tokens that were pure punctuation vanish.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .filter_map(|raw| {
            let lowered = raw.to_lowercase();
            let trimmed = lowered.trim_matches(|c: char| is_strippable_punct(c));
            if trimmed.is_empty() {
                None
            } else {
                Some(trimmed.to_string())
            }
        })
        .collect()
}

fn is_strippable_punct(c: char) -> bool {
    matches!(c, '.' | ',' | '!' | '?' | ';' | ':' | '"' | '(' | ')')
}

/// Errors raised when a corpus file deviates from the format.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FormatError {
    /// Exchange numbers must start at 1 per dialogue and increment by 1.
    LineNumber { line: usize, expected: u32 },
    MissingTab { line: usize },
    /// A dialogue ended (blank line or EOF) without its api_call line.
    MissingApiCall { line: usize },
    /// api_call line does not carry exactly four slot values.
    BadApiCall { line: usize },
    /// Empty user side before the api_call line, or empty system side
    /// anywhere: the user/system alternation is broken.
    EmptySide { line: usize, speaker: Speaker },
    /// A token differs from its tokenized form; such a file cannot round-trip.
    UnnormalizedToken { line: usize, token: String },
    /// Blank line where an exchange was expected, or a dangling blank line.
    UnexpectedBlank { line: usize },
    MissingTrailingNewline,
    /// Content found after the api_call line without a separating blank line.
    MissingSeparator { line: usize },
}

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormatError::LineNumber { line, expected } => {
                write!(f, "line {line}: expected exchange number {expected}")
            }
            FormatError::MissingTab { line } => write!(f, "line {line}: missing tab separator"),
            FormatError::MissingApiCall { line } => {
                write!(f, "line {line}: dialogue ended without an api_call line")
            }
            FormatError::BadApiCall { line } => {
                write!(f, "line {line}: api_call must carry exactly four slot values")
            }
            FormatError::EmptySide { line, speaker } => {
                write!(f, "line {line}: empty {speaker} side breaks turn alternation")
            }
            FormatError::UnnormalizedToken { line, token } => {
                write!(f, "line {line}: token {token:?} is not in normalized form")
            }
            FormatError::UnexpectedBlank { line } => write!(f, "line {line}: unexpected blank line"),
            FormatError::MissingTrailingNewline => write!(f, "file does not end with a newline"),
            FormatError::MissingSeparator { line } => {
                write!(f, "line {line}: expected blank line between dialogues")
            }
        }
    }
}

impl core::error::Error for FormatError {}

/// Errors raised when serializing a dialogue that violates its invariants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SerializationError {
    OddTurnCount { dialogue: usize },
    WrongSpeakerOrder { dialogue: usize },
    EmptyTurn { dialogue: usize },
    IllegalToken { dialogue: usize, token: String },
    /// An api_call slot value never appears in any user turn.
    UnmentionedSlotValue { dialogue: usize, value: String },
}

impl fmt::Display for SerializationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SerializationError::OddTurnCount { dialogue } => {
                write!(f, "dialogue {dialogue}: turns do not pair into exchanges")
            }
            SerializationError::WrongSpeakerOrder { dialogue } => {
                write!(f, "dialogue {dialogue}: turns must alternate user/system starting with user")
            }
            SerializationError::EmptyTurn { dialogue } => {
                write!(f, "dialogue {dialogue}: empty turn")
            }
            SerializationError::IllegalToken { dialogue, token } => {
                write!(f, "dialogue {dialogue}: token {token:?} contains tab or newline")
            }
            SerializationError::UnmentionedSlotValue { dialogue, value } => {
                write!(f, "dialogue {dialogue}: api_call value {value:?} never uttered by the user")
            }
        }
    }
}

impl core::error::Error for SerializationError {}

/// Parses a corpus file into dialogues, ids assigned sequentially from 0.
pub fn parse_dialog_file(text: &str) -> Result<Vec<Dialogue>, FormatError> {
    if text.is_empty() {
        return Ok(Vec::new());
    }
    if !text.ends_with('\n') {
        return Err(FormatError::MissingTrailingNewline);
    }

    let mut dialogues = Vec::new();
    let mut turns: Vec<Turn> = Vec::new();
    let mut expected_no: u32 = 1;
    // Some(line) while the previous line closed a dialogue: the next line must
    // be blank (separator) or EOF.
    let mut want_separator: Option<usize> = None;
    let body = &text[..text.len() - 1];
    let mut last_line = 0usize;

    for (idx, line) in body.split('\n').enumerate() {
        let line_no = idx + 1;
        last_line = line_no;

        if let Some(_closed_at) = want_separator {
            if line.is_empty() {
                want_separator = None;
                continue;
            }
            return Err(FormatError::MissingSeparator { line: line_no });
        }

        if line.is_empty() {
            return Err(FormatError::UnexpectedBlank { line: line_no });
        }

        let (number, rest) = split_line_number(line, line_no)?;
        if number != expected_no {
            return Err(FormatError::LineNumber {
                line: line_no,
                expected: expected_no,
            });
        }
        let (user_part, system_part) = rest
            .split_once('\t')
            .ok_or(FormatError::MissingTab { line: line_no })?;
        if system_part.is_empty() {
            return Err(FormatError::EmptySide {
                line: line_no,
                speaker: Speaker::System,
            });
        }

        let system_tokens = split_side(system_part, line_no)?;
        if user_part.is_empty() {
            // Terminal api_call line.
            if system_tokens.first().map(String::as_str) != Some("api_call") {
                return Err(FormatError::EmptySide {
                    line: line_no,
                    speaker: Speaker::User,
                });
            }
            if system_tokens.len() != 5 {
                return Err(FormatError::BadApiCall { line: line_no });
            }
            let api_call = ApiCall::new(
                &system_tokens[1],
                &system_tokens[2],
                &system_tokens[3],
                &system_tokens[4],
            );
            dialogues.push(Dialogue {
                id: dialogues.len(),
                turns: core::mem::take(&mut turns),
                api_call,
            });
            expected_no = 1;
            want_separator = Some(line_no);
        } else {
            let user_tokens = split_side(user_part, line_no)?;
            turns.push(Turn::new(Speaker::User, user_tokens));
            turns.push(Turn::new(Speaker::System, system_tokens));
            expected_no += 1;
        }
    }

    if !turns.is_empty() {
        return Err(FormatError::MissingApiCall { line: last_line });
    }
    if want_separator.is_none() {
        // Ended on a separator blank line with nothing after it.
        return Err(FormatError::UnexpectedBlank { line: last_line });
    }
    Ok(dialogues)
}

fn split_line_number(line: &str, line_no: usize) -> Result<(u32, &str), FormatError> {
    let (head, rest) = line.split_once(' ').ok_or(FormatError::MissingTab { line: line_no })?;
    let number = head.parse::<u32>().map_err(|_| FormatError::LineNumber {
        line: line_no,
        expected: 0,
    })?;
    Ok((number, rest))
}

fn split_side(side: &str, line_no: usize) -> Result<Vec<String>, FormatError> {
    let mut tokens = Vec::new();
    for piece in side.split(' ') {
        if piece.is_empty() {
            return Err(FormatError::UnnormalizedToken {
                line: line_no,
                token: String::new(),
            });
        }
        let normalized = tokenize(piece);
        if normalized.len() != 1 || normalized[0] != piece {
            return Err(FormatError::UnnormalizedToken {
                line: line_no,
                token: piece.to_string(),
            });
        }
        tokens.push(normalized.into_iter().next().unwrap());
    }
    Ok(tokens)
}

/// Serializes dialogues to the corpus text format.
pub fn serialize_dialog_file(dialogues: &[Dialogue]) -> Result<String, SerializationError> {
    let mut out = String::new();
    for (pos, d) in dialogues.iter().enumerate() {
        validate_dialogue(d)?;
        if pos > 0 {
            out.push('\n');
        }
        let mut line_no = 1u32;
        for (user, system) in d.turns.chunks_exact(2).map(|p| (&p[0], &p[1])) {
            out.push_str(&format!("{line_no} {}\t{}\n", user.text(), system.text()));
            line_no += 1;
        }
        out.push_str(&format!("{line_no} \t{}\n", d.api_call));
    }
    Ok(out)
}

fn validate_dialogue(d: &Dialogue) -> Result<(), SerializationError> {
    if d.turns.len() % 2 != 0 {
        return Err(SerializationError::OddTurnCount { dialogue: d.id });
    }
    for (i, turn) in d.turns.iter().enumerate() {
        let expected = if i % 2 == 0 { Speaker::User } else { Speaker::System };
        if turn.speaker != expected {
            return Err(SerializationError::WrongSpeakerOrder { dialogue: d.id });
        }
        if turn.tokens.is_empty() {
            return Err(SerializationError::EmptyTurn { dialogue: d.id });
        }
        for token in &turn.tokens {
            if token.contains(['\t', '\n']) || token.contains(' ') || token.is_empty() {
                return Err(SerializationError::IllegalToken {
                    dialogue: d.id,
                    token: token.clone(),
                });
            }
        }
    }
    for value in d.api_call.values() {
        if value.is_empty() || value.contains(['\t', '\n', ' ']) {
            return Err(SerializationError::IllegalToken {
                dialogue: d.id,
                token: value.to_string(),
            });
        }
        let mentioned = d
            .user_turns()
            .any(|t| t.tokens.iter().any(|tok| tok == value));
        if !mentioned {
            return Err(SerializationError::UnmentionedSlotValue {
                dialogue: d.id,
                value: value.to_string(),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn sample_file() -> &'static str {
        "1 good morning\thello what can i help you with today\n\
         2 i'd like to book a table in a cheap price range\ti'm on it any preference on a type of cuisine\n\
         3 with spanish food\twhere should it be\n\
         4 in tokyo\thow many people would be in your party\n\
         5 for eight people please\tok let me look into some options for you\n\
         6 \tapi_call spanish tokyo eight cheap\n"
    }

    #[test]
    fn parses_single_dialogue() {
        let ds = parse_dialog_file(sample_file()).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds[0].turns.len(), 10);
        assert_eq!(ds[0].api_call, ApiCall::new("spanish", "tokyo", "eight", "cheap"));
        assert_eq!(ds[0].turns[0].speaker, Speaker::User);
        assert_eq!(ds[0].turns[1].text(), "hello what can i help you with today");
    }

    #[test]
    fn empty_input_is_empty_corpus() {
        assert_eq!(parse_dialog_file("").unwrap(), vec![]);
    }

    #[test]
    fn final_line_sets_api_call() {
        let text = "1 hi\thello what can i help you with today\n\
                    2 a table with spanish food in tokyo for eight in a cheap price range\tok let me look into some options for you\n\
                    3 \tapi_call spanish tokyo eight cheap\n";
        let ds = parse_dialog_file(text).unwrap();
        assert_eq!(ds[0].api_call, ApiCall::new("spanish", "tokyo", "eight", "cheap"));
    }

    #[test]
    fn round_trip_is_identity() {
        let ds = parse_dialog_file(sample_file()).unwrap();
        assert_eq!(serialize_dialog_file(&ds).unwrap(), sample_file());
    }

    #[test]
    fn extract_returns_api_call() {
        let ds = parse_dialog_file(sample_file()).unwrap();
        assert_eq!(
            extract_api_call(&ds[0]),
            &ApiCall::new("spanish", "tokyo", "eight", "cheap")
        );
    }

    #[test]
    fn bad_line_number_is_reported_with_index() {
        let text = "1 hi\thello\n3 with spanish food\tok\n";
        match parse_dialog_file(text) {
            Err(FormatError::LineNumber { line, expected }) => {
                assert_eq!(line, 2);
                assert_eq!(expected, 2);
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn missing_api_call_is_an_error() {
        let text = "1 hi\thello what can i help you with today\n";
        assert!(matches!(
            parse_dialog_file(text),
            Err(FormatError::MissingApiCall { .. })
        ));
    }

    #[test]
    fn empty_system_side_is_alternation_error() {
        let text = "1 hi\t\n";
        assert!(matches!(
            parse_dialog_file(text),
            Err(FormatError::EmptySide { speaker: Speaker::System, .. })
        ));
    }

    #[test]
    fn empty_user_side_without_api_call_is_alternation_error() {
        let text = "1 \thello there\n";
        assert!(matches!(
            parse_dialog_file(text),
            Err(FormatError::EmptySide { speaker: Speaker::User, .. })
        ));
    }

    #[test]
    fn tokenize_lowercases_and_strips_punctuation() {
        assert_eq!(
            tokenize("I'd like a table, please!"),
            vec!["i'd", "like", "a", "table", "please"]
        );
        assert_eq!(tokenize("??"), Vec::<String>::new());
    }

    #[test]
    fn tokenize_is_idempotent() {
        let toks = tokenize("Hello, what CAN I help you with today?");
        assert_eq!(tokenize(&toks.join(" ")), toks);
    }

    #[test]
    fn serialize_rejects_unmentioned_slot_value() {
        let d = Dialogue {
            id: 3,
            turns: vec![
                Turn::from_text(Speaker::User, "hi"),
                Turn::from_text(Speaker::System, "hello"),
            ],
            api_call: ApiCall::new("french", "london", "four", "expensive"),
        };
        assert_eq!(
            serialize_dialog_file(core::slice::from_ref(&d)),
            Err(SerializationError::UnmentionedSlotValue {
                dialogue: 3,
                value: "french".into()
            })
        );
    }
}
