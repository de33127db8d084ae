//! Sound/spelling consistency statistics over a lexicon.
//!
//! An ideally transparent writing system would have each grapheme always
//! spell the same sound, each sound always spelled by the same grapheme, one
//! sound per grapheme and one letter per sound. The report lists every
//! witness against each of those four properties.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{Lexicon, Phoneme, WordId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitWitness {
    pub word: WordId,
    pub unit: usize,
    pub grapheme: String,
    pub phonemes: Vec<Phoneme>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrincipleWitnesses {
    /// Graphemes realized by two or more distinct phoneme sequences.
    pub ambiguous_graphemes: Vec<String>,
    /// Phonemes spelled by two or more distinct graphemes.
    pub variant_spellings: Vec<Phoneme>,
    /// Units whose grapheme stands for two or more phonemes.
    pub multi_sound_units: Vec<UnitWitness>,
    /// Units whose grapheme is two or more letters.
    pub multi_letter_units: Vec<UnitWitness>,
}

impl PrincipleWitnesses {
    /// Witness counts in the order: ambiguous graphemes, variant spellings,
    /// multi-sound units, multi-letter units.
    pub fn counts(&self) -> [usize; 4] {
        [
            self.ambiguous_graphemes.len(),
            self.variant_spellings.len(),
            self.multi_sound_units.len(),
            self.multi_letter_units.len(),
        ]
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub grapheme_to_phonemes: BTreeMap<String, BTreeSet<Vec<Phoneme>>>,
    pub phoneme_to_graphemes: BTreeMap<Phoneme, BTreeSet<String>>,
    pub witnesses: PrincipleWitnesses,
}

pub fn consistency_report(lex: &Lexicon) -> ConsistencyReport {
    let mut report = ConsistencyReport::default();
    let mut words: Vec<_> = lex.words().collect();
    words.sort_by(|a, b| a.spelling.cmp(&b.spelling).then_with(|| a.id.cmp(&b.id)));

    for w in words {
        for (ui, unit) in w.units.iter().enumerate() {
            let grapheme = unit.grapheme(&w.spelling);
            report
                .grapheme_to_phonemes
                .entry(grapheme.clone())
                .or_default()
                .insert(unit.phonemes.clone());
            for p in &unit.phonemes {
                report
                    .phoneme_to_graphemes
                    .entry(p.clone())
                    .or_default()
                    .insert(grapheme.clone());
            }
            let witness = || UnitWitness {
                word: w.id.clone(),
                unit: ui,
                grapheme: grapheme.clone(),
                phonemes: unit.phonemes.clone(),
            };
            if unit.phonemes.len() >= 2 {
                report.witnesses.multi_sound_units.push(witness());
            }
            if unit.letters.len() >= 2 {
                report.witnesses.multi_letter_units.push(witness());
            }
        }
    }
    report.witnesses.ambiguous_graphemes = report
        .grapheme_to_phonemes
        .iter()
        .filter(|(_, r)| r.len() >= 2)
        .map(|(g, _)| g.clone())
        .collect();
    report.witnesses.variant_spellings = report
        .phoneme_to_graphemes
        .iter()
        .filter(|(_, g)| g.len() >= 2)
        .map(|(p, _)| p.clone())
        .collect();
    report
}
