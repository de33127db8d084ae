//! Game state machines.
//!
//! Every operation takes the current state by reference and returns a new
//! state, so callers can keep or discard either. Accepted actions bump
//! `session.version` by one and append to the event log; rejected actions
//! return an error and change nothing.

mod event;
mod matching;
pub mod rng;
mod sorting;

use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use event::{EventKind, GameEvent, Session};
pub use matching::{Card, CardStatus, MatchingConfig, MatchingGame};
pub use sorting::{AnswerKey, SortingConfig, SortingGame, SortingStage};

use crate::lexicon::{Lexicon, WordId};

/// Current version of the serialized game document.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GameId(String);

impl GameId {
    pub fn new(id: impl Into<String>) -> Self {
        GameId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for GameId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for GameId {
    fn from(id: &str) -> Self {
        GameId::new(id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("invalid game config: {0}")]
    ConfigInvalid(String),
    #[error("word pool for {0} is too small")]
    PoolTooSmall(String),
    #[error("action expects stage {expected:?} but game is at {actual:?}")]
    WrongStage {
        expected: SortingStage,
        actual: SortingStage,
    },
    #[error("game is paused")]
    GamePaused,
    #[error("game is finished")]
    GameFinished,
    #[error("game is already paused")]
    AlreadyPaused,
    #[error("game is not paused")]
    NotPaused,
    #[error("category {0} is not one of this game's choices")]
    UnknownCategory(String),
    #[error("pattern {0} is not one of this word's choices")]
    UnknownPattern(String),
    #[error("empty answer")]
    EmptyAnswer,
    #[error("card {0} is not face down")]
    CardNotFaceDown(usize),
    #[error("card index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("action {action} does not apply to a {kind} game")]
    WrongKind { action: &'static str, kind: GameKind },
    #[error("game document does not match schema: {0}")]
    SchemaMismatch(String),
    #[error("game references unknown word {0}")]
    UnknownWordId(WordId),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RevealedCard {
    pub index: usize,
    pub word_id: WordId,
    pub category: String,
}

/// What an accepted action did.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcome {
    /// `None` for actions that are not judged (pause, first card of a pair).
    pub correct: Option<bool>,
    pub completed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub revealed: Option<RevealedCard>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameKind {
    Sorting,
    Matching,
}

impl fmt::Display for GameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GameKind::Sorting => "sorting",
            GameKind::Matching => "matching",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GameAction {
    SoundChoice { category: String },
    PatternChoice { pattern: String },
    Spelling { text: String },
    Flip { card: usize },
    Pause,
    Resume,
}

impl GameAction {
    pub fn name(&self) -> &'static str {
        match self {
            GameAction::SoundChoice { .. } => "sound_choice",
            GameAction::PatternChoice { .. } => "pattern_choice",
            GameAction::Spelling { .. } => "spelling",
            GameAction::Flip { .. } => "flip",
            GameAction::Pause => "pause",
            GameAction::Resume => "resume",
        }
    }
}

/// Game configuration as submitted by a client, tagged by kind.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "config", rename_all = "snake_case")]
pub enum GameConfig {
    Sorting(SortingConfig),
    Matching(MatchingConfig),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GameState {
    Sorting(SortingGame),
    Matching(MatchingGame),
}

impl GameState {
    pub fn new(
        game_id: GameId,
        config: GameConfig,
        lex: &Lexicon,
        at: DateTime<Utc>,
    ) -> Result<Self, GameError> {
        Ok(match config {
            GameConfig::Sorting(c) => GameState::Sorting(SortingGame::new(game_id, c, lex, at)?),
            GameConfig::Matching(c) => GameState::Matching(MatchingGame::new(game_id, c, lex, at)?),
        })
    }

    pub fn kind(&self) -> GameKind {
        match self {
            GameState::Sorting(_) => GameKind::Sorting,
            GameState::Matching(_) => GameKind::Matching,
        }
    }

    pub fn game_id(&self) -> &GameId {
        match self {
            GameState::Sorting(g) => &g.game_id,
            GameState::Matching(g) => &g.game_id,
        }
    }

    pub fn created_at(&self) -> DateTime<Utc> {
        match self {
            GameState::Sorting(g) => g.created_at,
            GameState::Matching(g) => g.created_at,
        }
    }

    pub fn session(&self) -> &Session {
        match self {
            GameState::Sorting(g) => &g.session,
            GameState::Matching(g) => &g.session,
        }
    }

    fn session_mut(&mut self) -> &mut Session {
        match self {
            GameState::Sorting(g) => &mut g.session,
            GameState::Matching(g) => &mut g.session,
        }
    }

    pub fn version(&self) -> u64 {
        self.session().version
    }

    pub fn is_finished(&self) -> bool {
        match self {
            GameState::Sorting(g) => g.is_finished(),
            GameState::Matching(g) => g.is_complete(),
        }
    }

    pub fn pause(&self, at: DateTime<Utc>) -> Result<(GameState, Outcome), GameError> {
        if self.is_finished() {
            return Err(GameError::GameFinished);
        }
        if self.session().paused {
            return Err(GameError::AlreadyPaused);
        }
        Ok(self.toggle_pause(true, EventKind::Pause, at))
    }

    pub fn resume(&self, at: DateTime<Utc>) -> Result<(GameState, Outcome), GameError> {
        if !self.session().paused {
            return Err(GameError::NotPaused);
        }
        Ok(self.toggle_pause(false, EventKind::Resume, at))
    }

    fn toggle_pause(&self, paused: bool, kind: EventKind, at: DateTime<Utc>) -> (GameState, Outcome) {
        let mut s = self.clone();
        let session = s.session_mut();
        session.paused = paused;
        session.push(at, kind);
        session.version += 1;
        (s, Outcome { correct: None, completed: false, revealed: None })
    }

    pub fn apply(
        &self,
        action: &GameAction,
        at: DateTime<Utc>,
    ) -> Result<(GameState, Outcome), GameError> {
        let wrong_kind = || GameError::WrongKind {
            action: action.name(),
            kind: self.kind(),
        };
        match (self, action) {
            (_, GameAction::Pause) => self.pause(at),
            (_, GameAction::Resume) => self.resume(at),
            (GameState::Sorting(g), GameAction::SoundChoice { category }) => {
                g.submit_sound_choice(category, at).map(sorting_result)
            }
            (GameState::Sorting(g), GameAction::PatternChoice { pattern }) => {
                g.submit_pattern_choice(pattern, at).map(sorting_result)
            }
            (GameState::Sorting(g), GameAction::Spelling { text }) => {
                g.submit_spelling(text, at).map(sorting_result)
            }
            (GameState::Matching(g), GameAction::Flip { card }) => g
                .flip(*card, at)
                .map(|(g, o)| (GameState::Matching(g), o)),
            _ => Err(wrong_kind()),
        }
    }

    /// The versioned JSON document used for persistence.
    pub fn to_document(&self) -> serde_json::Value {
        serde_json::to_value(GameDocument {
            schema_version: SCHEMA_VERSION,
            state: self.clone(),
        })
        .expect("game state serializes")
    }

    /// Parses a stored document, re-deriving answer keys from `lex`.
    pub fn from_document(doc: &serde_json::Value, lex: &Lexicon) -> Result<Self, GameError> {
        let parsed: GameDocument = serde_json::from_value(doc.clone())
            .map_err(|e| GameError::SchemaMismatch(e.to_string()))?;
        if parsed.schema_version != SCHEMA_VERSION {
            return Err(GameError::SchemaMismatch(format!(
                "unsupported schemaVersion {}",
                parsed.schema_version
            )));
        }
        let mut state = parsed.state;
        match &mut state {
            GameState::Sorting(g) => g.attach(lex)?,
            GameState::Matching(g) => g.attach(lex)?,
        }
        Ok(state)
    }
}

fn sorting_result((g, o): (SortingGame, Outcome)) -> (GameState, Outcome) {
    (GameState::Sorting(g), o)
}

#[derive(Serialize, Deserialize)]
struct GameDocument {
    #[serde(rename = "schemaVersion")]
    schema_version: u32,
    #[serde(flatten)]
    state: GameState,
}
