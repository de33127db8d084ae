//! Word Sorting: for each word in turn the student picks its sound category,
//! then the grapheme pattern spelling that sound, then types the word.

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::event::{EventKind, Session};
use super::rng::Lcg64;
use super::{GameError, GameId, Outcome};
use crate::lexicon::{classify_unit, target_unit, Lexicon, NamedPattern, WordId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SortingConfig {
    pub category_a: String,
    pub category_b: String,
    /// Pattern sources per category. A category left out here uses the
    /// lexicon's registered pattern set; the stored game always carries the
    /// resolved sets.
    #[serde(default)]
    pub patterns: BTreeMap<String, Vec<String>>,
    pub word_ids: Vec<WordId>,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SortingStage {
    SoundSort,
    PatternChoice,
    Spelling,
    Finished,
}

/// The correct answers for one word. Never leaves the server.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnswerKey {
    pub spelling: String,
    pub category: String,
    pub pattern: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SortingGame {
    pub game_id: GameId,
    pub config: SortingConfig,
    pub created_at: DateTime<Utc>,
    pub word_order: Vec<WordId>,
    pub cursor: usize,
    pub stage: SortingStage,
    pub attempts_this_stage: u32,
    #[serde(flatten)]
    pub session: Session,
    #[serde(skip)]
    keys: Vec<AnswerKey>,
}

fn invalid(msg: impl Into<String>) -> GameError {
    GameError::ConfigInvalid(msg.into())
}

/// Resolves pattern sets and checks every config invariant against `lex`,
/// returning the answer key of each word in `order`.
fn resolve(
    cfg: &mut SortingConfig,
    order: &[WordId],
    lex: &Lexicon,
    strict_ids: bool,
) -> Result<Vec<AnswerKey>, GameError> {
    if cfg.category_a == cfg.category_b {
        return Err(invalid("the two categories must differ"));
    }
    if cfg.word_ids.is_empty() {
        return Err(invalid("no words"));
    }
    let mut sets: Vec<(String, Vec<NamedPattern>)> = Vec::new();
    for name in [&cfg.category_a, &cfg.category_b] {
        lex.category(name)
            .map_err(|_| invalid(format!("unknown category {name}")))?;
        let set = match cfg.patterns.get(name) {
            Some(sources) => sources
                .iter()
                .map(|s| NamedPattern::from_source(s))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| invalid(format!("pattern for {name}: {e}")))?,
            None => lex
                .patterns()
                .for_category(name)
                .ok_or_else(|| invalid(format!("no patterns registered for {name}")))?
                .to_vec(),
        };
        if set.is_empty() {
            return Err(invalid(format!("empty pattern set for {name}")));
        }
        sets.push((name.clone(), set));
    }
    if let Some(extra) = cfg
        .patterns
        .keys()
        .find(|k| **k != cfg.category_a && **k != cfg.category_b)
    {
        return Err(invalid(format!("patterns given for unused category {extra}")));
    }
    cfg.patterns = sets
        .iter()
        .map(|(c, set)| (c.clone(), set.iter().map(|p| p.name.clone()).collect()))
        .collect();

    let mut keys = Vec::with_capacity(order.len());
    for id in order {
        let word = lex.word(id).ok_or_else(|| {
            if strict_ids {
                GameError::UnknownWordId(id.clone())
            } else {
                invalid(format!("unknown word {id}"))
            }
        })?;
        let mut hits = Vec::new();
        for (name, set) in &sets {
            let cat = lex.category(name).expect("checked above");
            if let Some(ui) = target_unit(word, cat) {
                hits.push((name, set, ui));
            }
        }
        let (name, set, ui) = match hits.as_slice() {
            [one] => *one,
            [] => return Err(invalid(format!("{id} has neither sound"))),
            _ => return Err(invalid(format!("{id} has both sounds"))),
        };
        let pattern = classify_unit(word, ui, set)
            .map_err(|e| invalid(e.to_string()))?
            .ok_or_else(|| invalid(format!("{id} fits none of the {name} patterns")))?;
        keys.push(AnswerKey {
            spelling: word.spelling.clone(),
            category: name.clone(),
            pattern: pattern.to_string(),
        });
    }
    Ok(keys)
}

impl SortingGame {
    pub fn new(
        game_id: GameId,
        mut config: SortingConfig,
        lex: &Lexicon,
        at: DateTime<Utc>,
    ) -> Result<Self, GameError> {
        let mut order = config.word_ids.clone();
        let mut sorted = order.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != order.len() {
            return Err(invalid("duplicate word ids"));
        }
        Lcg64::from_seed(config.seed).shuffle(&mut order);
        let keys = resolve(&mut config, &order, lex, false)?;
        Ok(SortingGame {
            game_id,
            config,
            created_at: at,
            word_order: order,
            cursor: 0,
            stage: SortingStage::SoundSort,
            attempts_this_stage: 0,
            session: Session::new(),
            keys,
        })
    }

    /// Rebuilds the answer keys of a deserialized game and checks that its
    /// state is internally consistent.
    pub(crate) fn attach(&mut self, lex: &Lexicon) -> Result<(), GameError> {
        let mut cfg = self.config.clone();
        let mut expected = self.word_order.clone();
        expected.sort();
        let mut ids = cfg.word_ids.clone();
        ids.sort();
        if expected != ids {
            return Err(GameError::SchemaMismatch("word order is not a permutation of the config".into()));
        }
        let finished = self.stage == SortingStage::Finished;
        if self.cursor > self.word_order.len() || finished != (self.cursor == self.word_order.len())
        {
            return Err(GameError::SchemaMismatch("cursor and stage disagree".into()));
        }
        self.keys = resolve(&mut cfg, &self.word_order, lex, true).map_err(|e| match e {
            GameError::UnknownWordId(id) => GameError::UnknownWordId(id),
            other => GameError::SchemaMismatch(other.to_string()),
        })?;
        if cfg != self.config {
            return Err(GameError::SchemaMismatch("unresolved pattern sets".into()));
        }
        Ok(())
    }

    pub fn is_finished(&self) -> bool {
        self.stage == SortingStage::Finished
    }

    pub fn current_word(&self) -> Option<&WordId> {
        self.word_order.get(self.cursor)
    }

    pub fn current_answer(&self) -> Option<&AnswerKey> {
        self.keys.get(self.cursor)
    }

    pub fn patterns_for(&self, category: &str) -> Option<&[String]> {
        self.config.patterns.get(category).map(Vec::as_slice)
    }

    fn guard(&self, stage: SortingStage) -> Result<(), GameError> {
        if self.is_finished() {
            return Err(GameError::GameFinished);
        }
        if self.session.paused {
            return Err(GameError::GamePaused);
        }
        if self.stage != stage {
            return Err(GameError::WrongStage {
                expected: stage,
                actual: self.stage,
            });
        }
        Ok(())
    }

    /// Logs one answer, then either advances to `next` or counts a retry.
    fn answer(
        &self,
        submitted: String,
        correct: bool,
        next: SortingStage,
        at: DateTime<Utc>,
        make: fn(WordId, String, bool, u32) -> EventKind,
    ) -> (SortingGame, Outcome) {
        let mut s = self.clone();
        let word_id = s.word_order[s.cursor].clone();
        s.session
            .push(at, make(word_id, submitted, correct, s.attempts_this_stage + 1));
        if correct {
            s.attempts_this_stage = 0;
            s.stage = next;
            if next == SortingStage::SoundSort {
                s.cursor += 1;
                if s.cursor == s.word_order.len() {
                    s.stage = SortingStage::Finished;
                    s.session.push(at, EventKind::Complete);
                }
            }
        } else {
            s.attempts_this_stage += 1;
        }
        s.session.version += 1;
        let completed = s.is_finished();
        (s, Outcome { correct: Some(correct), completed, revealed: None })
    }

    pub fn submit_sound_choice(
        &self,
        chosen: &str,
        at: DateTime<Utc>,
    ) -> Result<(SortingGame, Outcome), GameError> {
        self.guard(SortingStage::SoundSort)?;
        if chosen != self.config.category_a && chosen != self.config.category_b {
            return Err(GameError::UnknownCategory(chosen.to_string()));
        }
        let correct = self.keys[self.cursor].category == chosen;
        Ok(self.answer(chosen.to_string(), correct, SortingStage::PatternChoice, at, |w, s, c, a| {
            EventKind::SoundChoice { word_id: w, submitted: s, correct: c, attempt: a }
        }))
    }

    pub fn submit_pattern_choice(
        &self,
        chosen: &str,
        at: DateTime<Utc>,
    ) -> Result<(SortingGame, Outcome), GameError> {
        self.guard(SortingStage::PatternChoice)?;
        let key = &self.keys[self.cursor];
        let known = self.config.patterns[&key.category].iter().any(|p| p == chosen);
        if !known {
            return Err(GameError::UnknownPattern(chosen.to_string()));
        }
        let correct = key.pattern == chosen;
        Ok(self.answer(chosen.to_string(), correct, SortingStage::Spelling, at, |w, s, c, a| {
            EventKind::PatternChoice { word_id: w, submitted: s, correct: c, attempt: a }
        }))
    }

    /// Answers are trimmed and lowercased before comparison.
    pub fn submit_spelling(
        &self,
        text: &str,
        at: DateTime<Utc>,
    ) -> Result<(SortingGame, Outcome), GameError> {
        self.guard(SortingStage::Spelling)?;
        let normalized = text.trim().to_lowercase();
        if normalized.is_empty() {
            return Err(GameError::EmptyAnswer);
        }
        let correct = self.keys[self.cursor].spelling == normalized;
        Ok(self.answer(normalized, correct, SortingStage::SoundSort, at, |w, s, c, a| {
            EventKind::SpellingAttempt { word_id: w, submitted: s, correct: c, attempt: a }
        }))
    }
}
