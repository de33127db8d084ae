//! Words as grapheme/phoneme alignments, the pattern notation, and lexicon
//! ingestion and querying.

mod pattern;
mod phoneme;
mod report;
mod word;

use std::collections::BTreeMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use pattern::{is_consonant, is_vowel, GraphemePattern, NamedPattern, PatternItem};
pub use phoneme::{CategoryRegistry, Inventory, Phoneme, SoundCategory, ARPABET};
pub use report::{consistency_report, ConsistencyReport, PrincipleWitnesses, UnitWitness};
pub use word::{validate_word, AlignmentUnit, Violation, Word, WordId};

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("empty pattern")]
    EmptyPattern,
    #[error("illegal character {ch:?} at position {pos} in pattern")]
    IllegalCharacter { ch: char, pos: usize },
    #[error("pattern {0:?} has no literal letter")]
    NoLiteral(String),
    #[error("unit index {index} out of range for a word with {len} units")]
    UnitOutOfRange { index: usize, len: usize },
    #[error("word {word} matches several patterns: {patterns:?}")]
    AmbiguousClassification { word: WordId, patterns: Vec<String> },
    #[error("unknown category {0}")]
    UnknownCategory(String),
    #[error("unknown pattern {0}")]
    UnknownPattern(String),
    #[error("invalid category {0:?}")]
    InvalidCategory(String),
    #[error("duplicate category {0}")]
    DuplicateCategory(String),
    #[error("malformed registry: {0}")]
    MalformedRegistry(String),
    #[error("unreadable lexicon stream: {0}")]
    UnreadableStream(#[from] std::io::Error),
    #[error("malformed record on line {line}: {message}")]
    MalformedRecord { line: usize, message: String },
}

/// Pattern sets per sound category, used for the pattern stage of sorting
/// and for pattern-filtered queries.
///
/// Serialized as a JSON object mapping category name to pattern sources.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PatternRegistry {
    sets: BTreeMap<String, Vec<NamedPattern>>,
}

impl PatternRegistry {
    /// long-o: oa, ow, oCe; long-i: igh, y, iCe.
    pub fn standard() -> Self {
        let mut reg = PatternRegistry::default();
        reg.insert("long-o", &["oa", "ow", "oCe"]).expect("valid");
        reg.insert("long-i", &["igh", "y", "iCe"]).expect("valid");
        reg
    }

    pub fn insert(&mut self, category: &str, sources: &[&str]) -> Result<(), LexiconError> {
        let set = sources
            .iter()
            .map(|s| NamedPattern::from_source(s))
            .collect::<Result<Vec<_>, _>>()?;
        self.sets.insert(category.to_string(), set);
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, LexiconError> {
        let raw: BTreeMap<String, Vec<String>> = serde_json::from_str(text)
            .map_err(|e| LexiconError::MalformedRegistry(e.to_string()))?;
        let mut reg = PatternRegistry::default();
        for (cat, sources) in raw {
            let refs: Vec<&str> = sources.iter().map(String::as_str).collect();
            reg.insert(&cat, &refs)?;
        }
        Ok(reg)
    }

    pub fn to_json(&self) -> String {
        let raw: BTreeMap<&str, Vec<&str>> = self
            .sets
            .iter()
            .map(|(k, v)| (k.as_str(), v.iter().map(|p| p.name.as_str()).collect()))
            .collect();
        serde_json::to_string_pretty(&raw).expect("string map serializes")
    }

    pub fn for_category(&self, category: &str) -> Option<&[NamedPattern]> {
        self.sets.get(category).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[NamedPattern])> {
        self.sets.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    /// Categories whose pattern set contains a pattern called `name`.
    pub fn categories_with(&self, name: &str) -> Vec<&str> {
        self.sets
            .iter()
            .filter(|(_, set)| set.iter().any(|p| p.name == name))
            .map(|(k, _)| k.as_str())
            .collect()
    }
}

/// Query filter for [`Lexicon::query`]. Absent fields do not constrain.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordFilter {
    pub grade: Option<u8>,
    pub category: Option<String>,
    pub pattern: Option<String>,
}

/// A validated, immutable word collection with its category and pattern
/// registries.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    words: BTreeMap<WordId, Word>,
    categories: CategoryRegistry,
    patterns: PatternRegistry,
    inventory: Inventory,
}

/// Result of reading a lexicon file: the loaded lexicon plus every rejected
/// record with its 1-based line number.
#[derive(Debug)]
pub struct Ingested {
    pub lexicon: Lexicon,
    pub rejected: Vec<(usize, Violation)>,
}

impl Lexicon {
    pub fn new(categories: CategoryRegistry, patterns: PatternRegistry) -> Self {
        Lexicon {
            words: BTreeMap::new(),
            categories,
            patterns,
            inventory: Inventory::arpabet(),
        }
    }

    /// Reads line-delimited JSON word records.
    ///
    /// Records that parse but break a word invariant (or reuse an id) are
    /// skipped and reported; a line that is not a word record at all aborts
    /// with [`LexiconError::MalformedRecord`].
    pub fn ingest<R: BufRead>(
        reader: R,
        categories: CategoryRegistry,
        patterns: PatternRegistry,
    ) -> Result<Ingested, LexiconError> {
        let mut lexicon = Lexicon::new(categories, patterns);
        let mut rejected = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let word: Word =
                serde_json::from_str(&line).map_err(|e| LexiconError::MalformedRecord {
                    line: line_no,
                    message: e.to_string(),
                })?;
            let violations = validate_word(&word, &lexicon.inventory);
            if !violations.is_empty() {
                rejected.extend(violations.into_iter().map(|v| (line_no, v)));
                continue;
            }
            if lexicon.words.contains_key(&word.id) {
                rejected.push((line_no, Violation::DuplicateId { id: word.id }));
                continue;
            }
            lexicon.words.insert(word.id.clone(), word);
        }
        Ok(Ingested { lexicon, rejected })
    }

    /// Adds a word after validating it. Returns the violations on failure.
    pub fn insert(&mut self, word: Word) -> Result<(), Vec<Violation>> {
        let mut violations = validate_word(&word, &self.inventory);
        if self.words.contains_key(&word.id) {
            violations.push(Violation::DuplicateId { id: word.id.clone() });
        }
        if !violations.is_empty() {
            return Err(violations);
        }
        self.words.insert(word.id.clone(), word);
        Ok(())
    }

    pub fn word(&self, id: &WordId) -> Option<&Word> {
        self.words.get(id)
    }

    pub fn words(&self) -> impl Iterator<Item = &Word> {
        self.words.values()
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn categories(&self) -> &CategoryRegistry {
        &self.categories
    }

    pub fn patterns(&self) -> &PatternRegistry {
        &self.patterns
    }

    pub fn inventory(&self) -> &Inventory {
        &self.inventory
    }

    pub fn category(&self, name: &str) -> Result<&SoundCategory, LexiconError> {
        self.categories
            .get(name)
            .ok_or_else(|| LexiconError::UnknownCategory(name.to_string()))
    }

    /// Words in file order by spelling then id, as JSON lines.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for w in self.sorted_words() {
            out.push_str(&serde_json::to_string(w).expect("word serializes"));
            out.push('\n');
        }
        out
    }

    fn sorted_words(&self) -> Vec<&Word> {
        let mut v: Vec<&Word> = self.words.values().collect();
        v.sort_by(|a, b| a.spelling.cmp(&b.spelling).then_with(|| a.id.cmp(&b.id)));
        v
    }

    /// Word ids passing every present filter field, ordered by spelling then id.
    pub fn query(&self, filter: &WordFilter) -> Result<Vec<WordId>, LexiconError> {
        let category = filter.category.as_deref().map(|c| self.category(c)).transpose()?;
        // (category, pattern set) pairs the pattern filter is evaluated under
        let pattern_scopes: Vec<(&SoundCategory, &[NamedPattern])> = match &filter.pattern {
            None => Vec::new(),
            Some(name) => {
                let cats: Vec<&str> = match category {
                    Some(c) => self
                        .patterns
                        .for_category(&c.name)
                        .filter(|set| set.iter().any(|p| &p.name == name))
                        .map(|_| vec![c.name.as_str()])
                        .unwrap_or_default(),
                    None => self.patterns.categories_with(name),
                };
                if cats.is_empty() {
                    return Err(LexiconError::UnknownPattern(name.clone()));
                }
                cats.into_iter()
                    .map(|c| {
                        let cat = self.category(c)?;
                        Ok((cat, self.patterns.for_category(c).expect("listed")))
                    })
                    .collect::<Result<_, LexiconError>>()?
            }
        };

        let mut out = Vec::new();
        for w in self.sorted_words() {
            if filter.grade.is_some_and(|g| g != w.grade) {
                continue;
            }
            if let Some(cat) = category {
                if target_unit(w, cat).is_none() {
                    continue;
                }
            }
            if let Some(name) = &filter.pattern {
                let mut hit = false;
                for (cat, set) in &pattern_scopes {
                    if let Some(ui) = target_unit(w, cat) {
                        if classify_unit(w, ui, set)?.is_some_and(|n| n == name) {
                            hit = true;
                            break;
                        }
                    }
                }
                if !hit {
                    continue;
                }
            }
            out.push(w.id.clone());
        }
        Ok(out)
    }
}

/// True iff `pattern` describes unit `unit_idx` of `word`.
pub fn pattern_matches(
    pattern: &GraphemePattern,
    word: &Word,
    unit_idx: usize,
) -> Result<bool, LexiconError> {
    let unit = word.unit(unit_idx).ok_or(LexiconError::UnitOutOfRange {
        index: unit_idx,
        len: word.units.len(),
    })?;
    Ok(pattern.matches_unit(word.spelling.as_bytes(), &unit.letters))
}

/// Index of the first unit realizing a phoneme of `category`.
pub fn target_unit(word: &Word, category: &SoundCategory) -> Option<usize> {
    word.units.iter().position(|u| category.intersects(&u.phonemes))
}

/// Name of the unique pattern in `patterns` describing the unit, if any.
pub fn classify_unit<'p>(
    word: &Word,
    unit_idx: usize,
    patterns: &'p [NamedPattern],
) -> Result<Option<&'p str>, LexiconError> {
    let mut hits = Vec::new();
    for p in patterns {
        if pattern_matches(&p.pattern, word, unit_idx)? {
            hits.push(p.name.as_str());
        }
    }
    match hits.len() {
        0 => Ok(None),
        1 => Ok(Some(hits[0])),
        _ => Err(LexiconError::AmbiguousClassification {
            word: word.id.clone(),
            patterns: hits.into_iter().map(str::to_string).collect(),
        }),
    }
}

/// The seed lexicon shipped with the crate: every word the sorting and
/// matching examples are built from.
pub mod seed {
    use super::*;

    pub const LEXICON_JSONL: &str = include_str!("../../data/seed_lexicon.jsonl");
    pub const CATEGORIES_JSON: &str = include_str!("../../data/categories.json");
    pub const PATTERNS_JSON: &str = include_str!("../../data/patterns.json");

    pub fn lexicon() -> Lexicon {
        let cats = CategoryRegistry::from_json(CATEGORIES_JSON, &Inventory::arpabet())
            .expect("seed categories parse");
        let pats = PatternRegistry::from_json(PATTERNS_JSON).expect("seed patterns parse");
        let ingested =
            Lexicon::ingest(LEXICON_JSONL.as_bytes(), cats, pats).expect("seed lexicon parses");
        assert!(ingested.rejected.is_empty(), "seed lexicon is clean");
        ingested.lexicon
    }
}
