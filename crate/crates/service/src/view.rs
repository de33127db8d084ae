//! What clients are allowed to see of a game.
//!
//! Sorting views never name the pending word, its category or its pattern;
//! the word is only reachable as audio through a game-scoped URL. Matching
//! views reveal a card only once it is face up or matched.

use serde::Serialize;
use wordify_core::gamekit::{
    CardStatus, GameKind, GameState, MatchingGame, Outcome, SortingGame, SortingStage,
};
use wordify_core::Lexicon;

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum GameView {
    Sorting(SortingView),
    Matching(MatchingView),
}

#[derive(Debug, Clone, Serialize)]
pub struct SortingView {
    pub game_id: String,
    pub kind: GameKind,
    pub version: u64,
    pub paused: bool,
    pub finished: bool,
    pub stage: SortingStage,
    pub position: usize,
    pub total: usize,
    pub attempts_this_stage: u32,
    pub audio_url: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CardView {
    pub index: usize,
    pub status: CardStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub face: Option<CardFace>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CardFace {
    pub word_id: String,
    pub spelling: String,
    /// Only once the card is matched; a face-up card's category would give
    /// the pairing away.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    pub audio_url: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MatchingView {
    pub game_id: String,
    pub kind: GameKind,
    pub version: u64,
    pub paused: bool,
    pub finished: bool,
    pub matched: usize,
    pub cards: Vec<CardView>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutcomeView {
    pub correct: Option<bool>,
    pub completed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub revealed: Option<CardView>,
}

pub fn audio_url(key: &str) -> String {
    format!("/api/v1/audio/{key}")
}

fn sorting_view(g: &SortingGame) -> SortingView {
    let finished = g.is_finished();
    SortingView {
        game_id: g.game_id.to_string(),
        kind: GameKind::Sorting,
        version: g.session.version,
        paused: g.session.paused,
        finished,
        stage: g.stage,
        position: g.cursor,
        total: g.word_order.len(),
        attempts_this_stage: g.attempts_this_stage,
        audio_url: (!finished).then(|| format!("/api/v1/games/{}/audio", g.game_id)),
    }
}

fn card_face(g: &MatchingGame, idx: usize, lex: &Lexicon) -> CardFace {
    let card = &g.cards[idx];
    let word = lex.word(&card.word_id);
    CardFace {
        word_id: card.word_id.to_string(),
        spelling: word.map(|w| w.spelling.clone()).unwrap_or_default(),
        category: (card.status == CardStatus::Matched).then(|| card.category.clone()),
        audio_url: word.and_then(|w| w.audio.as_deref()).map(audio_url),
    }
}

fn matching_view(g: &MatchingGame, lex: &Lexicon) -> MatchingView {
    MatchingView {
        game_id: g.game_id.to_string(),
        kind: GameKind::Matching,
        version: g.session.version,
        paused: g.session.paused,
        finished: g.is_complete(),
        matched: g.matched_count(),
        cards: g
            .cards
            .iter()
            .enumerate()
            .map(|(i, c)| CardView {
                index: i,
                status: c.status,
                face: (c.status != CardStatus::FaceDown).then(|| card_face(g, i, lex)),
            })
            .collect(),
    }
}

pub fn game_view(state: &GameState, lex: &Lexicon) -> GameView {
    match state {
        GameState::Sorting(g) => GameView::Sorting(sorting_view(g)),
        GameState::Matching(g) => GameView::Matching(matching_view(g, lex)),
    }
}

/// Outcome of an action as sent to the client. A flipped card is revealed
/// even when it has already turned back face down.
pub fn outcome_view(state: &GameState, outcome: &Outcome, lex: &Lexicon) -> OutcomeView {
    let revealed = match (state, &outcome.revealed) {
        (GameState::Matching(g), Some(card)) => Some(CardView {
            index: card.index,
            status: g.cards[card.index].status,
            face: Some(card_face(g, card.index, lex)),
        }),
        _ => None,
    };
    OutcomeView {
        correct: outcome.correct,
        completed: outcome.completed,
        revealed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::DateTime;
    use wordify_core::gamekit::{GameConfig, SortingConfig};
    use wordify_core::lexicon::seed;

    #[test]
    fn sorting_view_hides_the_pending_word() {
        let lex = seed::lexicon();
        let cfg = GameConfig::Sorting(SortingConfig {
            category_a: "long-o".into(),
            category_b: "long-i".into(),
            patterns: Default::default(),
            word_ids: vec!["w-sky".into()],
            seed: 0,
        });
        let g = GameState::new("g-1".into(), cfg, &lex, DateTime::UNIX_EPOCH).unwrap();
        let body = serde_json::to_string(&game_view(&g, &lex)).unwrap();
        for secret in ["sky", "long-i", "y", "w-sky"] {
            assert!(!body.contains(secret), "{secret} leaked in {body}");
        }
        assert!(body.contains("/api/v1/games/g-1/audio"));
    }
}
