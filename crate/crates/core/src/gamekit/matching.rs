//! Word Matching: a face-down grid of word cards; turning two cards of the
//! same sound category keeps them face up as a matched pair.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::event::{EventKind, Session};
use super::rng::Lcg64;
use super::{GameError, GameId, Outcome, RevealedCard};
use crate::lexicon::{target_unit, Lexicon, WordId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchingConfig {
    pub contrast: Vec<String>,
    /// Must be even so every category pairs off completely.
    pub cards_per_category: usize,
    pub word_pool: BTreeMap<String, Vec<WordId>>,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CardStatus {
    FaceDown,
    FaceUp,
    Matched,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Card {
    pub word_id: WordId,
    pub category: String,
    pub status: CardStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchingGame {
    pub game_id: GameId,
    pub config: MatchingConfig,
    pub created_at: DateTime<Utc>,
    pub cards: Vec<Card>,
    pub face_up: Vec<usize>,
    #[serde(flatten)]
    pub session: Session,
}

fn invalid(msg: impl Into<String>) -> GameError {
    GameError::ConfigInvalid(msg.into())
}

fn check_config(cfg: &MatchingConfig, lex: &Lexicon) -> Result<(), GameError> {
    if cfg.contrast.len() < 2 {
        return Err(invalid("a contrast needs at least two categories"));
    }
    let distinct: BTreeSet<&String> = cfg.contrast.iter().collect();
    if distinct.len() != cfg.contrast.len() {
        return Err(invalid("contrast repeats a category"));
    }
    if cfg.cards_per_category == 0 || !cfg.cards_per_category.is_multiple_of(2) {
        return Err(invalid(format!(
            "cards_per_category must be even and positive, got {}",
            cfg.cards_per_category
        )));
    }
    for name in &cfg.contrast {
        let cat = lex
            .category(name)
            .map_err(|_| invalid(format!("unknown category {name}")))?;
        let pool = cfg.word_pool.get(name).map(Vec::as_slice).unwrap_or_default();
        let unique: BTreeSet<&WordId> = pool.iter().collect();
        if unique.len() != pool.len() {
            return Err(invalid(format!("pool for {name} repeats a word")));
        }
        for id in pool {
            let word = lex
                .word(id)
                .ok_or_else(|| invalid(format!("unknown word {id}")))?;
            if target_unit(word, cat).is_none() {
                return Err(invalid(format!("{id} does not contain the {name} sound")));
            }
        }
        if pool.len() < cfg.cards_per_category {
            return Err(GameError::PoolTooSmall(name.clone()));
        }
    }
    if let Some(extra) = cfg.word_pool.keys().find(|k| !cfg.contrast.contains(k)) {
        return Err(invalid(format!("pool given for unused category {extra}")));
    }
    Ok(())
}

impl MatchingGame {
    pub fn new(
        game_id: GameId,
        config: MatchingConfig,
        lex: &Lexicon,
        at: DateTime<Utc>,
    ) -> Result<Self, GameError> {
        check_config(&config, lex)?;
        let mut rng = Lcg64::from_seed(config.seed);
        let mut cards = Vec::new();
        for name in &config.contrast {
            let mut pool = config.word_pool[name].clone();
            rng.shuffle(&mut pool);
            cards.extend(pool.into_iter().take(config.cards_per_category).map(|word_id| Card {
                word_id,
                category: name.clone(),
                status: CardStatus::FaceDown,
            }));
        }
        rng.shuffle(&mut cards);
        Ok(MatchingGame {
            game_id,
            config,
            created_at: at,
            cards,
            face_up: Vec::new(),
            session: Session::new(),
        })
    }

    pub(crate) fn attach(&self, lex: &Lexicon) -> Result<(), GameError> {
        for card in &self.cards {
            if lex.word(&card.word_id).is_none() {
                return Err(GameError::UnknownWordId(card.word_id.clone()));
            }
        }
        check_config(&self.config, lex).map_err(|e| GameError::SchemaMismatch(e.to_string()))?;
        let up: Vec<usize> = (0..self.cards.len())
            .filter(|&i| self.cards[i].status == CardStatus::FaceUp)
            .collect();
        let mut listed = self.face_up.clone();
        listed.sort();
        if up != listed || up.len() > 1 {
            return Err(GameError::SchemaMismatch("face-up cards inconsistent".into()));
        }
        Ok(())
    }

    pub fn is_complete(&self) -> bool {
        self.cards.iter().all(|c| c.status == CardStatus::Matched)
    }

    pub fn matched_count(&self) -> usize {
        self.cards.iter().filter(|c| c.status == CardStatus::Matched).count()
    }

    /// Turns a card. When it is the second card up, the pair is resolved
    /// before returning: a same-category pair becomes Matched, anything else
    /// goes back face down.
    pub fn flip(&self, idx: usize, at: DateTime<Utc>) -> Result<(MatchingGame, Outcome), GameError> {
        if self.is_complete() {
            return Err(GameError::GameFinished);
        }
        if self.session.paused {
            return Err(GameError::GamePaused);
        }
        let card = self.cards.get(idx).ok_or(GameError::IndexOutOfRange(idx))?;
        if card.status != CardStatus::FaceDown {
            return Err(GameError::CardNotFaceDown(idx));
        }

        let mut s = self.clone();
        s.cards[idx].status = CardStatus::FaceUp;
        s.face_up.push(idx);
        s.session.push(
            at,
            EventKind::CardFlip {
                card: idx,
                word_id: card.word_id.clone(),
            },
        );
        let revealed = RevealedCard {
            index: idx,
            word_id: card.word_id.clone(),
            category: card.category.clone(),
        };
        let mut correct = None;
        if let [first, second] = s.face_up[..] {
            let (a, b) = (&s.cards[first], &s.cards[second]);
            let matched = a.category == b.category;
            s.session.push(
                at,
                EventKind::PairResolved {
                    cards: [first, second],
                    word_ids: [a.word_id.clone(), b.word_id.clone()],
                    categories: [a.category.clone(), b.category.clone()],
                    correct: matched,
                },
            );
            let status = if matched { CardStatus::Matched } else { CardStatus::FaceDown };
            s.cards[first].status = status;
            s.cards[second].status = status;
            s.face_up.clear();
            correct = Some(matched);
        }
        let completed = s.is_complete();
        if completed {
            s.session.push(at, EventKind::Complete);
        }
        s.session.version += 1;
        Ok((
            s,
            Outcome {
                correct,
                completed,
                revealed: Some(revealed),
            },
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::seed;

    fn t0() -> DateTime<Utc> {
        DateTime::UNIX_EPOCH
    }

    fn ids(words: &[&str]) -> Vec<WordId> {
        words.iter().map(|w| WordId::new(format!("w-{w}"))).collect()
    }

    fn cfg(k: usize, seed: u64) -> MatchingConfig {
        MatchingConfig {
            contrast: vec!["long-o".into(), "long-i".into()],
            cards_per_category: k,
            word_pool: [
                ("long-o".to_string(), ids(&["rope", "boat", "know", "home"])),
                ("long-i".to_string(), ids(&["ripe", "light", "sky", "hide"])),
            ]
            .into_iter()
            .collect(),
            seed,
        }
    }

    fn game() -> MatchingGame {
        MatchingGame::new("g-m".into(), cfg(2, 42), &seed::lexicon(), t0()).unwrap()
    }

    fn pair_of(g: &MatchingGame, category: &str) -> (usize, usize) {
        let v: Vec<usize> = (0..g.cards.len()).filter(|&i| g.cards[i].category == category).collect();
        (v[0], v[1])
    }

    #[test]
    fn layout_is_face_down_and_seeded() {
        let g = game();
        assert_eq!(g.cards.len(), 4);
        assert!(g.cards.iter().all(|c| c.status == CardStatus::FaceDown));
        let again = game();
        assert_eq!(g.cards, again.cards);
        assert_eq!(g.cards.iter().filter(|c| c.category == "long-o").count(), 2);
    }

    #[test]
    fn config_errors() {
        let lex = seed::lexicon();
        assert!(matches!(
            MatchingGame::new("g".into(), cfg(3, 1), &lex, t0()),
            Err(GameError::ConfigInvalid(_))
        ));
        assert!(matches!(
            MatchingGame::new("g".into(), cfg(0, 1), &lex, t0()),
            Err(GameError::ConfigInvalid(_))
        ));
        let mut c = cfg(2, 1);
        c.word_pool.insert("long-i".into(), ids(&["sky"]));
        assert!(matches!(
            MatchingGame::new("g".into(), c, &lex, t0()),
            Err(GameError::PoolTooSmall(ref cat)) if cat == "long-i"
        ));
        let mut c = cfg(2, 1);
        c.word_pool.insert("long-i".into(), ids(&["sky", "rope"]));
        assert!(matches!(
            MatchingGame::new("g".into(), c, &lex, t0()),
            Err(GameError::ConfigInvalid(_))
        ));
        let mut c = cfg(2, 1);
        c.contrast.pop();
        assert!(MatchingGame::new("g".into(), c, &lex, t0()).is_err());
    }

    #[test]
    fn same_category_pair_stays_up() {
        let g = game();
        let (a, b) = pair_of(&g, "long-i");
        let (g, out) = g.flip(a, t0()).unwrap();
        assert_eq!(out.correct, None);
        assert_eq!(g.cards[a].status, CardStatus::FaceUp);
        let (g, out) = g.flip(b, t0()).unwrap();
        assert_eq!(out.correct, Some(true));
        assert_eq!(g.cards[a].status, CardStatus::Matched);
        assert_eq!(g.cards[b].status, CardStatus::Matched);
        assert!(g.face_up.is_empty());
        assert!(matches!(g.flip(a, t0()), Err(GameError::CardNotFaceDown(_))));
    }

    #[test]
    fn mismatched_pair_flips_back_within_the_call() {
        let g = game();
        let (i, _) = pair_of(&g, "long-i");
        let (o, _) = pair_of(&g, "long-o");
        let (g, _) = g.flip(i, t0()).unwrap();
        let (g, out) = g.flip(o, t0()).unwrap();
        assert_eq!(out.correct, Some(false));
        assert_eq!(g.cards[i].status, CardStatus::FaceDown);
        assert_eq!(g.cards[o].status, CardStatus::FaceDown);
        assert!(matches!(
            g.session.events.last().unwrap().kind,
            EventKind::PairResolved { correct: false, .. }
        ));
        assert_eq!(g.session.version, 2);
    }

    #[test]
    fn completing_the_grid_logs_complete() {
        let mut g = game();
        for cat in ["long-o", "long-i"] {
            let (a, b) = pair_of(&g, cat);
            g = g.flip(a, t0()).unwrap().0;
            g = g.flip(b, t0()).unwrap().0;
        }
        assert!(g.is_complete());
        assert_eq!(g.session.events.last().unwrap().kind, EventKind::Complete);
        assert!(matches!(g.flip(0, t0()), Err(GameError::GameFinished)));
    }

    #[test]
    fn index_and_face_up_guards() {
        let g = game();
        assert!(matches!(g.flip(4, t0()), Err(GameError::IndexOutOfRange(4))));
        let (g, _) = g.flip(0, t0()).unwrap();
        assert!(matches!(g.flip(0, t0()), Err(GameError::CardNotFaceDown(0))));
    }
}
