use std::collections::HashSet;

use chrono::{DateTime, Duration, Utc};
use proptest::prelude::*;
use wordify_core::gamekit::{
    CardStatus, EventKind, GameAction, GameConfig, GameState, MatchingConfig, SortingConfig,
};
use wordify_core::lexicon::seed;
use wordify_core::{Lexicon, WordId};

const LONG_O: [&str; 5] = ["rope", "boat", "know", "home", "phone"];
const LONG_I: [&str; 6] = ["ripe", "light", "sky", "rice", "hide", "kite"];

fn id(w: &str) -> WordId {
    WordId::new(format!("w-{w}"))
}

fn sorting_config(mask: u16, seed: u64) -> GameConfig {
    let mut words: Vec<WordId> = LONG_O
        .iter()
        .chain(LONG_I.iter())
        .enumerate()
        .filter(|(i, _)| mask & (1 << i) != 0)
        .map(|(_, w)| id(w))
        .collect();
    if words.is_empty() {
        words.push(id("hide"));
    }
    GameConfig::Sorting(SortingConfig {
        category_a: "long-o".into(),
        category_b: "long-i".into(),
        patterns: Default::default(),
        word_ids: words,
        seed,
    })
}

fn matching_config(k: usize, seed: u64) -> GameConfig {
    GameConfig::Matching(MatchingConfig {
        contrast: vec!["long-o".into(), "long-i".into()],
        cards_per_category: k,
        word_pool: [
            ("long-o".to_string(), LONG_O.iter().map(|w| id(w)).collect()),
            ("long-i".to_string(), LONG_I.iter().map(|w| id(w)).collect()),
        ]
        .into_iter()
        .collect(),
        seed,
    })
}

/// Turns a raw choice number into an action that is plausible for the game.
fn action_for(state: &GameState, raw: u32) -> GameAction {
    let pick = |opts: &[&str]| opts[raw as usize / 8 % opts.len()].to_string();
    match raw % 8 {
        0 => GameAction::Pause,
        1 => GameAction::Resume,
        _ => match state {
            GameState::Sorting(_) => match raw % 3 {
                0 => GameAction::SoundChoice { category: pick(&["long-o", "long-i"]) },
                1 => GameAction::PatternChoice { pattern: pick(&["oa", "ow", "oCe", "igh", "y", "iCe"]) },
                _ => GameAction::Spelling { text: pick(&LONG_O.iter().chain(LONG_I.iter()).copied().collect::<Vec<_>>()) },
            },
            GameState::Matching(g) => GameAction::Flip { card: raw as usize / 8 % (g.cards.len() + 1) },
        },
    }
}

fn count(state: &GameState, name: &str) -> usize {
    state.session().events.iter().filter(|e| e.kind.name() == name).count()
}

fn check_invariants(state: &GameState) {
    match state {
        GameState::Sorting(g) => {
            assert_eq!(g.is_finished(), g.cursor == g.word_order.len());
            // spelling attempts never precede a correct pattern choice for the word
            let mut pattern_ok: HashSet<&WordId> = HashSet::new();
            for e in &g.session.events {
                match &e.kind {
                    EventKind::PatternChoice { word_id, correct: true, .. } => {
                        pattern_ok.insert(word_id);
                    }
                    EventKind::SpellingAttempt { word_id, .. } => {
                        assert!(pattern_ok.contains(word_id));
                    }
                    _ => {}
                }
            }
        }
        GameState::Matching(g) => {
            assert!(g.face_up.len() <= 1);
            for e in &g.session.events {
                if let EventKind::PairResolved { cards, categories, correct: true, .. } = &e.kind {
                    assert_eq!(categories[0], categories[1]);
                    assert_eq!(g.cards[cards[0]].category, g.cards[cards[1]].category);
                    assert_eq!(g.cards[cards[0]].status, CardStatus::Matched);
                }
            }
            let completes = count(state, "complete");
            assert_eq!(completes == 1, g.is_complete());
            assert!(completes <= 1);
        }
    }
}

fn progress(state: &GameState) -> (usize, usize) {
    match state {
        GameState::Sorting(g) => (g.cursor, 0),
        GameState::Matching(g) => (0, g.matched_count()),
    }
}

fn run(lex: &Lexicon, config: GameConfig, raws: &[u32]) -> (GameState, Vec<(&'static str, bool)>) {
    let t0 = DateTime::<Utc>::UNIX_EPOCH;
    let mut state = GameState::new("g-prop".into(), config, lex, t0).unwrap();
    let mut log = Vec::new();
    for (i, &raw) in raws.iter().enumerate() {
        let action = action_for(&state, raw);
        let at = t0 + Duration::seconds(i as i64);
        let before = state.clone();
        match state.apply(&action, at) {
            Ok((next, _)) => {
                assert_eq!(next.version(), before.version() + 1);
                assert!(next.session().events.len() > before.session().events.len());
                assert_eq!(next.session().events[..before.session().events.len()], before.session().events[..]);
                let (c0, m0) = progress(&before);
                let (c1, m1) = progress(&next);
                assert!(c1 >= c0 && m1 >= m0);
                state = next;
                log.push((action.name(), true));
            }
            Err(_) => log.push((action.name(), false)),
        }
        check_invariants(&state);
        let doc = state.to_document();
        assert_eq!(GameState::from_document(&doc, lex).unwrap(), state);
    }
    (state, log)
}

fn accepted(log: &[(&str, bool)], name: &str) -> usize {
    log.iter().filter(|(n, ok)| *n == name && *ok).count()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sorting_invariants(mask in 1u16..2048, seed in any::<u64>(), raws in prop::collection::vec(any::<u32>(), 0..120)) {
        let lex = seed::lexicon();
        let (state, log) = run(&lex, sorting_config(mask, seed), &raws);
        prop_assert_eq!(count(&state, "sound_choice"), accepted(&log, "sound_choice"));
        prop_assert_eq!(count(&state, "pattern_choice"), accepted(&log, "pattern_choice"));
        prop_assert_eq!(count(&state, "spelling_attempt"), accepted(&log, "spelling"));
        let (again, _) = run(&lex, sorting_config(mask, seed), &raws);
        prop_assert_eq!(again.session().untimed_events(), state.session().untimed_events());
    }

    #[test]
    fn matching_invariants(half in 1usize..3, seed in any::<u64>(), raws in prop::collection::vec(any::<u32>(), 0..120)) {
        let lex = seed::lexicon();
        let (state, log) = run(&lex, matching_config(half * 2, seed), &raws);
        prop_assert_eq!(count(&state, "card_flip"), accepted(&log, "flip"));
        let (again, _) = run(&lex, matching_config(half * 2, seed), &raws);
        prop_assert_eq!(again, state);
    }
}
