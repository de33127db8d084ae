//! The grapheme-pattern notation.
//!
//! A pattern is a string of lowercase literal letters plus two wildcards:
//! `C` (any consonant) and `V` (any vowel). `oCe` describes the split
//! grapheme o…e with one foreign consonant between its letters, as in *home*.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::LexiconError;

const VOWELS: [u8; 5] = *b"aeiou";

/// Vowel letters for wildcard purposes. `y` is a consonant here.
pub fn is_vowel(letter: u8) -> bool {
    VOWELS.contains(&letter)
}

pub fn is_consonant(letter: u8) -> bool {
    letter.is_ascii_lowercase() && !is_vowel(letter)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PatternItem {
    Literal(u8),
    AnyConsonant,
    AnyVowel,
}

impl PatternItem {
    fn accepts(self, letter: u8) -> bool {
        match self {
            PatternItem::Literal(c) => c == letter,
            PatternItem::AnyConsonant => is_consonant(letter),
            PatternItem::AnyVowel => is_vowel(letter),
        }
    }

    fn symbol(self) -> char {
        match self {
            PatternItem::Literal(c) => c as char,
            PatternItem::AnyConsonant => 'C',
            PatternItem::AnyVowel => 'V',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GraphemePattern {
    items: Vec<PatternItem>,
}

impl GraphemePattern {
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        if text.is_empty() {
            return Err(LexiconError::EmptyPattern);
        }
        let items = text
            .char_indices()
            .map(|(pos, ch)| match ch {
                'a'..='z' => Ok(PatternItem::Literal(ch as u8)),
                'C' => Ok(PatternItem::AnyConsonant),
                'V' => Ok(PatternItem::AnyVowel),
                other => Err(LexiconError::IllegalCharacter { ch: other, pos }),
            })
            .collect::<Result<Vec<_>, _>>()?;
        if !items.iter().any(|i| matches!(i, PatternItem::Literal(_))) {
            return Err(LexiconError::NoLiteral(text.to_string()));
        }
        Ok(GraphemePattern { items })
    }

    pub fn items(&self) -> &[PatternItem] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Renders the pattern back to its source notation.
    pub fn render(&self) -> String {
        self.items.iter().map(|i| i.symbol()).collect()
    }

    /// Checks the pattern against one alignment unit of `spelling`.
    ///
    /// The literal items must land exactly on `unit_letters` (in order) and
    /// every wildcard must land on a letter of the right class lying outside
    /// the unit. Because the first literal is pinned to the unit's first
    /// letter, at most one span can qualify.
    pub fn matches_unit(&self, spelling: &[u8], unit_letters: &[usize]) -> bool {
        let literal_count = self
            .items
            .iter()
            .filter(|i| matches!(i, PatternItem::Literal(_)))
            .count();
        if literal_count != unit_letters.len() || unit_letters.is_empty() {
            return false;
        }
        let first_literal = self
            .items
            .iter()
            .position(|i| matches!(i, PatternItem::Literal(_)))
            .expect("parsed patterns carry a literal");
        let Some(start) = unit_letters[0].checked_sub(first_literal) else {
            return false;
        };
        if start + self.items.len() > spelling.len() {
            return false;
        }

        let mut unit = unit_letters.iter().copied().peekable();
        for (offset, item) in self.items.iter().enumerate() {
            let pos = start + offset;
            if !item.accepts(spelling[pos]) {
                return false;
            }
            match item {
                PatternItem::Literal(_) => {
                    if unit.next() != Some(pos) {
                        return false;
                    }
                }
                _ => {
                    if unit_letters.contains(&pos) {
                        return false;
                    }
                }
            }
        }
        unit.peek().is_none()
    }
}

impl fmt::Display for GraphemePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl FromStr for GraphemePattern {
    type Err = LexiconError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GraphemePattern::parse(s)
    }
}

impl Serialize for GraphemePattern {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.render())
    }
}

impl<'de> Deserialize<'de> for GraphemePattern {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        GraphemePattern::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// A pattern together with the name games and queries refer to it by.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedPattern {
    pub name: String,
    pub pattern: GraphemePattern,
}

impl NamedPattern {
    /// Names the pattern after its own source text.
    pub fn from_source(text: &str) -> Result<Self, LexiconError> {
        Ok(NamedPattern {
            name: text.to_string(),
            pattern: GraphemePattern::parse(text)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_split_digraph_pattern() {
        let p = GraphemePattern::parse("oCe").unwrap();
        assert_eq!(
            p.items(),
            &[
                PatternItem::Literal(b'o'),
                PatternItem::AnyConsonant,
                PatternItem::Literal(b'e')
            ]
        );
    }

    #[test]
    fn parses_plain_trigraph() {
        let p = GraphemePattern::parse("igh").unwrap();
        assert_eq!(
            p.items(),
            &[
                PatternItem::Literal(b'i'),
                PatternItem::Literal(b'g'),
                PatternItem::Literal(b'h')
            ]
        );
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(GraphemePattern::parse(""), Err(LexiconError::EmptyPattern)));
        assert!(matches!(
            GraphemePattern::parse("oXe"),
            Err(LexiconError::IllegalCharacter { ch: 'X', pos: 1 })
        ));
        assert!(matches!(
            GraphemePattern::parse("o e"),
            Err(LexiconError::IllegalCharacter { ch: ' ', .. })
        ));
        assert!(matches!(GraphemePattern::parse("CVC"), Err(LexiconError::NoLiteral(_))));
    }

    #[test]
    fn split_pattern_matches_home_but_not_boat() {
        let oce = GraphemePattern::parse("oCe").unwrap();
        assert!(oce.matches_unit(b"home", &[1, 3]));
        assert!(!oce.matches_unit(b"boat", &[1, 2]));
        let oa = GraphemePattern::parse("oa").unwrap();
        assert!(oa.matches_unit(b"boat", &[1, 2]));
    }

    #[test]
    fn wildcard_class_is_enforced() {
        // y is a consonant for wildcard purposes
        let ice = GraphemePattern::parse("iCe").unwrap();
        assert!(ice.matches_unit(b"iye", &[0, 2]));
        assert!(!ice.matches_unit(b"iae", &[0, 2]));
        let vowel = GraphemePattern::parse("qVe").unwrap();
        assert!(vowel.matches_unit(b"que", &[0, 2]));
        assert!(!vowel.matches_unit(b"qxe", &[0, 2]));
    }

    #[test]
    fn pattern_must_cover_whole_unit() {
        let i = GraphemePattern::parse("i").unwrap();
        assert!(!i.matches_unit(b"hide", &[1, 3]));
        let ig = GraphemePattern::parse("ig").unwrap();
        assert!(!ig.matches_unit(b"light", &[1, 2, 3]));
    }

    #[test]
    fn span_running_off_either_end_fails() {
        let p = GraphemePattern::parse("Ce").unwrap();
        assert!(!p.matches_unit(b"e", &[0]));
        let p = GraphemePattern::parse("eC").unwrap();
        assert!(!p.matches_unit(b"be", &[1]));
    }

    fn pattern_source() -> impl Strategy<Value = String> {
        "[a-zCV]{0,5}[a-z][a-zCV]{0,5}"
    }

    proptest! {
        #[test]
        fn render_round_trips(src in pattern_source()) {
            let p = GraphemePattern::parse(&src).unwrap();
            prop_assert_eq!(p.render(), src.clone());
            prop_assert_eq!(GraphemePattern::parse(&p.render()).unwrap(), p);
        }
    }
}
