use std::fmt;

use serde::{Deserialize, Serialize};

use super::phoneme::{Inventory, Phoneme};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WordId(String);

impl WordId {
    pub fn new(id: impl Into<String>) -> Self {
        WordId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for WordId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for WordId {
    fn from(id: &str) -> Self {
        WordId::new(id)
    }
}

/// One grapheme of a word and the sound(s) it realizes.
///
/// `letters` may be discontinuous (`[1, 3]` for the o…e of *home*).
/// An empty `phonemes` list marks a silent grapheme.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentUnit {
    pub letters: Vec<usize>,
    pub phonemes: Vec<Phoneme>,
}

impl AlignmentUnit {
    pub fn new(letters: Vec<usize>, phonemes: &[&str]) -> Self {
        AlignmentUnit {
            letters,
            phonemes: phonemes.iter().copied().map(Phoneme::from).collect(),
        }
    }

    /// Grapheme text with `_` marking each gap, e.g. `o_e`.
    pub fn grapheme(&self, spelling: &str) -> String {
        let bytes = spelling.as_bytes();
        let mut out = String::new();
        for (i, &idx) in self.letters.iter().enumerate() {
            if i > 0 && idx != self.letters[i - 1] + 1 {
                out.push('_');
            }
            if let Some(&b) = bytes.get(idx) {
                out.push(b as char);
            }
        }
        out
    }
}

/// A lexicon entry, stored one JSON object per line in lexicon files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Word {
    pub id: WordId,
    pub spelling: String,
    pub units: Vec<AlignmentUnit>,
    pub grade: u8,
    pub sentence: String,
    pub audio: Option<String>,
    /// Declared pronunciation, checked against the units when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pronunciation: Option<Vec<Phoneme>>,
}

impl Word {
    /// Concatenation of every unit's phonemes.
    pub fn phonemes(&self) -> Vec<Phoneme> {
        self.units.iter().flat_map(|u| u.phonemes.iter().cloned()).collect()
    }

    pub fn unit(&self, idx: usize) -> Option<&AlignmentUnit> {
        self.units.get(idx)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    InvalidSpelling,
    GradeOutOfRange { grade: u8 },
    EmptyUnit { unit: usize },
    UnsortedLetters { unit: usize },
    LetterOutOfRange { unit: usize, letter: usize },
    OverlappingLetter { letter: usize, units: Vec<usize> },
    CoverageGap { letter: usize },
    UnitsOutOfOrder { unit: usize },
    UnknownPhoneme { unit: usize, phoneme: Phoneme },
    PronunciationMismatch,
    DuplicateId { id: WordId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::InvalidSpelling => write!(f, "spelling must be non-empty lowercase a-z"),
            Violation::GradeOutOfRange { grade } => write!(f, "grade {grade} outside 1-12"),
            Violation::EmptyUnit { unit } => write!(f, "unit {unit} has no letters"),
            Violation::UnsortedLetters { unit } => {
                write!(f, "unit {unit} letters not strictly increasing")
            }
            Violation::LetterOutOfRange { unit, letter } => {
                write!(f, "unit {unit} references letter {letter} past the spelling")
            }
            Violation::OverlappingLetter { letter, units } => {
                write!(f, "letter {letter} claimed by units {units:?}")
            }
            Violation::CoverageGap { letter } => write!(f, "letter {letter} not covered by any unit"),
            Violation::UnitsOutOfOrder { unit } => {
                write!(f, "unit {unit} starts before the previous unit")
            }
            Violation::UnknownPhoneme { unit, phoneme } => {
                write!(f, "unit {unit} uses phoneme {phoneme} outside the inventory")
            }
            Violation::PronunciationMismatch => {
                write!(f, "unit phonemes do not spell out the declared pronunciation")
            }
            Violation::DuplicateId { id } => write!(f, "duplicate word id {id}"),
        }
    }
}

/// Checks every structural invariant of a word record.
pub fn validate_word(word: &Word, inventory: &Inventory) -> Vec<Violation> {
    let mut out = Vec::new();
    let len = word.spelling.len();
    if word.spelling.is_empty() || !word.spelling.bytes().all(|b| b.is_ascii_lowercase()) {
        out.push(Violation::InvalidSpelling);
    }
    if !(1..=12).contains(&word.grade) {
        out.push(Violation::GradeOutOfRange { grade: word.grade });
    }

    let mut owners: Vec<Vec<usize>> = vec![Vec::new(); len];
    let mut prev_start: Option<usize> = None;
    for (ui, unit) in word.units.iter().enumerate() {
        if unit.letters.is_empty() {
            out.push(Violation::EmptyUnit { unit: ui });
            continue;
        }
        if unit.letters.windows(2).any(|w| w[0] >= w[1]) {
            out.push(Violation::UnsortedLetters { unit: ui });
        }
        for &letter in &unit.letters {
            match owners.get_mut(letter) {
                Some(o) => o.push(ui),
                None => out.push(Violation::LetterOutOfRange { unit: ui, letter }),
            }
        }
        let start = *unit.letters.iter().min().expect("non-empty");
        if prev_start.is_some_and(|p| start <= p) {
            out.push(Violation::UnitsOutOfOrder { unit: ui });
        }
        prev_start = Some(start);
        for p in &unit.phonemes {
            if !inventory.contains(p) {
                out.push(Violation::UnknownPhoneme {
                    unit: ui,
                    phoneme: p.clone(),
                });
            }
        }
    }
    for (letter, units) in owners.into_iter().enumerate() {
        match units.len() {
            0 => out.push(Violation::CoverageGap { letter }),
            1 => {}
            _ => out.push(Violation::OverlappingLetter { letter, units }),
        }
    }
    if let Some(declared) = &word.pronunciation {
        if *declared != word.phonemes() {
            out.push(Violation::PronunciationMismatch);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn home() -> Word {
        Word {
            id: "w-home".into(),
            spelling: "home".into(),
            units: vec![
                AlignmentUnit::new(vec![0], &["HH"]),
                AlignmentUnit::new(vec![1, 3], &["OW"]),
                AlignmentUnit::new(vec![2], &["M"]),
            ],
            grade: 1,
            sentence: "We walked home.".into(),
            audio: Some("home.wav".into()),
            pronunciation: None,
        }
    }

    #[test]
    fn well_formed_home_is_clean() {
        assert!(validate_word(&home(), &Inventory::arpabet()).is_empty());
    }

    #[test]
    fn missing_letter_is_a_coverage_gap() {
        let mut w = home();
        w.units.remove(2);
        assert_eq!(
            validate_word(&w, &Inventory::arpabet()),
            vec![Violation::CoverageGap { letter: 2 }]
        );
    }

    #[test]
    fn declared_pronunciation_must_agree() {
        let mut w = home();
        w.pronunciation = Some(vec!["HH".into(), "OW".into(), "M".into()]);
        assert!(validate_word(&w, &Inventory::arpabet()).is_empty());
        w.pronunciation = Some(vec!["HH".into(), "AA".into(), "M".into()]);
        assert_eq!(
            validate_word(&w, &Inventory::arpabet()),
            vec![Violation::PronunciationMismatch]
        );
    }

    #[test]
    fn overlap_range_order_and_inventory_are_reported() {
        let mut w = home();
        w.units[2].letters = vec![2, 3];
        let v = validate_word(&w, &Inventory::arpabet());
        assert_eq!(v, vec![Violation::OverlappingLetter { letter: 3, units: vec![1, 2] }]);

        let mut w = home();
        w.units[2].letters = vec![7];
        let v = validate_word(&w, &Inventory::arpabet());
        assert!(v.contains(&Violation::LetterOutOfRange { unit: 2, letter: 7 }));
        assert!(v.contains(&Violation::CoverageGap { letter: 2 }));

        let mut w = home();
        w.units.swap(1, 2);
        assert_eq!(
            validate_word(&w, &Inventory::arpabet()),
            vec![Violation::UnitsOutOfOrder { unit: 2 }]
        );

        let mut w = home();
        w.units[0].phonemes = vec!["H".into()];
        assert_eq!(
            validate_word(&w, &Inventory::arpabet()),
            vec![Violation::UnknownPhoneme { unit: 0, phoneme: "H".into() }]
        );
    }

    #[test]
    fn silent_unit_is_allowed() {
        let w = Word {
            id: "w-know-alt".into(),
            spelling: "know".into(),
            units: vec![
                AlignmentUnit::new(vec![0], &[]),
                AlignmentUnit::new(vec![1], &["N"]),
                AlignmentUnit::new(vec![2, 3], &["OW"]),
            ],
            grade: 1,
            sentence: "I know it.".into(),
            audio: None,
            pronunciation: None,
        };
        assert!(validate_word(&w, &Inventory::arpabet()).is_empty());
    }

    #[test]
    fn bad_spelling_and_grade() {
        let mut w = home();
        w.spelling = "Home".into();
        w.grade = 13;
        let v = validate_word(&w, &Inventory::arpabet());
        assert!(v.contains(&Violation::InvalidSpelling));
        assert!(v.contains(&Violation::GradeOutOfRange { grade: 13 }));
    }

    #[test]
    fn grapheme_text_marks_gaps() {
        let w = home();
        assert_eq!(w.units[1].grapheme(&w.spelling), "o_e");
        assert_eq!(AlignmentUnit::new(vec![1, 2, 3], &["AY"]).grapheme("light"), "igh");
    }

    #[test]
    fn record_json_matches_file_format() {
        let line = r#"{"id":"w-home","spelling":"home","units":[{"letters":[0],"phonemes":["HH"]},{"letters":[1,3],"phonemes":["OW"]},{"letters":[2],"phonemes":["M"]}],"grade":1,"sentence":"We walked home.","audio":"home.wav"}"#;
        let w: Word = serde_json::from_str(line).unwrap();
        assert_eq!(w, home());
        assert_eq!(serde_json::to_string(&w).unwrap(), line);
    }
}
