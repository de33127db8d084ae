use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::lexicon::WordId;

/// One entry of a game's append-only log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameEvent {
    pub at: DateTime<Utc>,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    SoundChoice {
        word_id: WordId,
        submitted: String,
        correct: bool,
        attempt: u32,
    },
    PatternChoice {
        word_id: WordId,
        submitted: String,
        correct: bool,
        attempt: u32,
    },
    SpellingAttempt {
        word_id: WordId,
        submitted: String,
        correct: bool,
        attempt: u32,
    },
    CardFlip {
        card: usize,
        word_id: WordId,
    },
    /// Emitted when the second card of a pair is turned. `cards`,
    /// `word_ids` and `categories` are in flip order.
    PairResolved {
        cards: [usize; 2],
        word_ids: [WordId; 2],
        categories: [String; 2],
        correct: bool,
    },
    Pause,
    Resume,
    Complete,
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::SoundChoice { .. } => "sound_choice",
            EventKind::PatternChoice { .. } => "pattern_choice",
            EventKind::SpellingAttempt { .. } => "spelling_attempt",
            EventKind::CardFlip { .. } => "card_flip",
            EventKind::PairResolved { .. } => "pair_resolved",
            EventKind::Pause => "pause",
            EventKind::Resume => "resume",
            EventKind::Complete => "complete",
        }
    }
}

/// Pause flag, version counter and event log shared by both game kinds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub paused: bool,
    pub version: u64,
    pub events: Vec<GameEvent>,
}

impl Session {
    pub(crate) fn new() -> Self {
        Session {
            paused: false,
            version: 0,
            events: Vec::new(),
        }
    }

    pub(crate) fn push(&mut self, at: DateTime<Utc>, kind: EventKind) {
        self.events.push(GameEvent { at, kind });
    }

    /// Event kinds with timestamps stripped, for replay comparisons.
    pub fn untimed_events(&self) -> Vec<EventKind> {
        self.events.iter().map(|e| e.kind.clone()).collect()
    }
}
