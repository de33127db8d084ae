//! Core engine for the wordify spelling tutor.
//!
//! Three layers, each usable on its own:
//!
//! * [`lexicon`] models words as grapheme/phoneme alignments and provides the
//!   grapheme-pattern notation (`oCe`, `igh`, ...) used to classify spellings.
//! * [`gamekit`] holds the Word Sorting and Word Matching state machines.
//! * [`roster`] manages users and folds game event logs into progress reports.

pub mod gamekit;
pub mod lexicon;
pub mod roster;

pub use lexicon::{Lexicon, LexiconError, Word, WordId};
