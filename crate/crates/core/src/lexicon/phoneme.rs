use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::LexiconError;

/// The 39 stress-free ARPAbet phonemes of General American English.
pub const ARPABET: [&str; 39] = [
    "AA", "AE", "AH", "AO", "AW", "AY", "B", "CH", "D", "DH", "EH", "ER", "EY", "F", "G", "HH",
    "IH", "IY", "JH", "K", "L", "M", "N", "NG", "OW", "OY", "P", "R", "S", "SH", "T", "TH", "UH",
    "UW", "V", "W", "Y", "Z", "ZH",
];

/// An ARPAbet-style phoneme code such as `K`, `OW` or `AY`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Phoneme(String);

impl Phoneme {
    pub fn new(code: impl Into<String>) -> Self {
        Phoneme(code.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Phoneme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Phoneme {
    fn from(code: &str) -> Self {
        Phoneme::new(code)
    }
}

/// The set of phoneme codes a lexicon is allowed to use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Inventory {
    codes: BTreeSet<String>,
}

impl Inventory {
    pub fn arpabet() -> Self {
        Inventory {
            codes: ARPABET.iter().map(|c| c.to_string()).collect(),
        }
    }

    pub fn from_codes<I, S>(codes: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Inventory {
            codes: codes.into_iter().map(Into::into).collect(),
        }
    }

    pub fn contains(&self, phoneme: &Phoneme) -> bool {
        self.codes.contains(phoneme.as_str())
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }
}

impl Default for Inventory {
    fn default() -> Self {
        Inventory::arpabet()
    }
}

/// A named set of phonemes used as a sorting target, e.g. `long-o = {OW}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SoundCategory {
    pub name: String,
    pub members: BTreeSet<Phoneme>,
}

impl SoundCategory {
    pub fn contains(&self, phoneme: &Phoneme) -> bool {
        self.members.contains(phoneme)
    }

    /// True when any phoneme of `seq` belongs to this category.
    pub fn intersects(&self, seq: &[Phoneme]) -> bool {
        seq.iter().any(|p| self.members.contains(p))
    }
}

/// Registry of sound categories keyed by name.
///
/// Serialized as a JSON object mapping each name to a list of phoneme codes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CategoryRegistry {
    categories: BTreeMap<String, SoundCategory>,
}

impl CategoryRegistry {
    /// The registry shipped with the seed lexicon.
    pub fn standard() -> Self {
        let mut reg = CategoryRegistry::default();
        for (name, codes) in [
            ("long-o", &["OW"][..]),
            ("long-i", &["AY"][..]),
            ("k-sound", &["K"][..]),
            ("s-sound", &["S"][..]),
            ("f-sound", &["F"][..]),
        ] {
            reg.insert(name, codes.iter().copied().map(Phoneme::from))
                .expect("standard categories are well formed");
        }
        reg
    }

    pub fn insert<I>(&mut self, name: &str, members: I) -> Result<(), LexiconError>
    where
        I: IntoIterator<Item = Phoneme>,
    {
        let members: BTreeSet<Phoneme> = members.into_iter().collect();
        if name.is_empty() || members.is_empty() {
            return Err(LexiconError::InvalidCategory(name.to_string()));
        }
        if self.categories.contains_key(name) {
            return Err(LexiconError::DuplicateCategory(name.to_string()));
        }
        self.categories.insert(
            name.to_string(),
            SoundCategory {
                name: name.to_string(),
                members,
            },
        );
        Ok(())
    }

    /// Parses the JSON registry format, checking every member against `inventory`.
    pub fn from_json(text: &str, inventory: &Inventory) -> Result<Self, LexiconError> {
        let raw: BTreeMap<String, Vec<String>> = serde_json::from_str(text)
            .map_err(|e| LexiconError::MalformedRegistry(e.to_string()))?;
        let mut reg = CategoryRegistry::default();
        for (name, codes) in raw {
            let members: Vec<Phoneme> = codes.into_iter().map(Phoneme::new).collect();
            if let Some(bad) = members.iter().find(|p| !inventory.contains(p)) {
                return Err(LexiconError::MalformedRegistry(format!(
                    "category {name} uses unknown phoneme {bad}"
                )));
            }
            reg.insert(&name, members)?;
        }
        Ok(reg)
    }

    pub fn to_json(&self) -> String {
        let raw: BTreeMap<&str, Vec<&str>> = self
            .categories
            .iter()
            .map(|(k, c)| (k.as_str(), c.members.iter().map(Phoneme::as_str).collect()))
            .collect();
        serde_json::to_string_pretty(&raw).expect("string map serializes")
    }

    pub fn get(&self, name: &str) -> Option<&SoundCategory> {
        self.categories.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &SoundCategory> {
        self.categories.values()
    }

    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }
}
