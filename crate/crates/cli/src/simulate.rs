//! Headless game runs driven by a player policy.
//!
//! Runs use a synthetic clock (one second per action from `start`) so the
//! same script always produces the same event log, timestamps included.

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;
use wordify_core::gamekit::rng::Lcg64;
use wordify_core::gamekit::{
    CardStatus, EventKind, GameAction, GameConfig, GameError, GameEvent, GameKind, GameState,
    SortingStage,
};
use wordify_core::roster::{build_progress, ProgressRecord, Role, User};
use wordify_core::Lexicon;

/// Upper bound on actions per run; random play finishes far sooner.
pub const MAX_STEPS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Policy {
    Scripted { actions: Vec<GameAction> },
    AlwaysCorrect,
    UniformRandom { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimScript {
    #[serde(flatten)]
    pub game: GameConfig,
    pub policy: Policy,
    #[serde(default = "default_start")]
    pub start: DateTime<Utc>,
}

fn default_start() -> DateTime<Utc> {
    DateTime::from_timestamp(1_700_000_000, 0).expect("valid timestamp")
}

impl SimScript {
    pub fn kind(&self) -> GameKind {
        match self.game {
            GameConfig::Sorting(_) => GameKind::Sorting,
            GameConfig::Matching(_) => GameKind::Matching,
        }
    }

    /// The same script with both the game seed and (for random play) the
    /// policy seed replaced by `seed`.
    pub fn reseeded(&self, seed: u64) -> SimScript {
        let mut s = self.clone();
        match &mut s.game {
            GameConfig::Sorting(c) => c.seed = seed,
            GameConfig::Matching(c) => c.seed = seed,
        }
        if let Policy::UniformRandom { seed: p } = &mut s.policy {
            *p = seed;
        }
        s
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("script action {index} ({action}) is not valid for a {kind} game")]
    InvalidScript {
        index: usize,
        action: &'static str,
        kind: GameKind,
    },
    #[error("game could not be created: {0}")]
    Setup(GameError),
    #[error("step {step}: {action} rejected: {error}")]
    Rejected {
        step: usize,
        action: &'static str,
        error: GameError,
    },
    #[error("step {step}: invariant violated: {message}")]
    Invariant { step: usize, message: String },
    #[error("game not finished after {0} steps")]
    Stalled(usize),
}

#[derive(Debug, Clone, Serialize)]
pub struct SimReport {
    #[serde(serialize_with = "as_document")]
    pub final_state: GameState,
    pub steps: usize,
    pub events: Vec<GameEvent>,
    pub progress: ProgressRecord,
}

fn as_document<S: serde::Serializer>(g: &GameState, s: S) -> Result<S::Ok, S::Error> {
    g.to_document().serialize(s)
}

/// One line of a batch run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run: usize,
    pub seed: u64,
    pub kind: GameKind,
    pub finished: bool,
    /// Words in a sorting game, cards in a matching game.
    pub items: usize,
    pub steps: usize,
    pub events: usize,
    pub correct: usize,
    pub incorrect: usize,
    /// SHA-256 of the JSON event log.
    pub digest: String,
}

fn sim_student() -> User {
    User {
        id: "sim-student".into(),
        display_name: "simulated student".into(),
        role: Role::Student,
        credential: Default::default(),
        teacher_id: None,
        school_id: None,
    }
}

fn check_script(script: &SimScript) -> Result<(), SimError> {
    let Policy::Scripted { actions } = &script.policy else {
        return Ok(());
    };
    let kind = script.kind();
    for (index, a) in actions.iter().enumerate() {
        let ok = match a {
            GameAction::Pause | GameAction::Resume => true,
            GameAction::Flip { .. } => kind == GameKind::Matching,
            _ => kind == GameKind::Sorting,
        };
        if !ok {
            return Err(SimError::InvalidScript {
                index,
                action: a.name(),
                kind,
            });
        }
    }
    Ok(())
}

struct Player<'a> {
    policy: &'a Policy,
    rng: Lcg64,
    next_script: usize,
}

impl Player<'_> {
    fn next(&mut self, game: &GameState) -> Option<GameAction> {
        match self.policy {
            Policy::Scripted { actions } => {
                let a = actions.get(self.next_script).cloned();
                self.next_script += 1;
                a
            }
            _ if game.is_finished() => None,
            _ if game.session().paused => Some(GameAction::Resume),
            Policy::AlwaysCorrect => Some(correct_action(game)),
            Policy::UniformRandom { .. } => Some(self.random_action(game)),
        }
    }

    fn pick<'s>(&mut self, options: &'s [String]) -> &'s str {
        &options[self.rng.below(options.len() as u32) as usize]
    }

    fn random_action(&mut self, game: &GameState) -> GameAction {
        if self.rng.below(16) == 0 {
            return GameAction::Pause;
        }
        match game {
            GameState::Sorting(g) => {
                let key = g.current_answer().expect("unfinished game has a pending word");
                match g.stage {
                    SortingStage::SoundSort => GameAction::SoundChoice {
                        category: self
                            .pick(&[g.config.category_a.clone(), g.config.category_b.clone()])
                            .to_string(),
                    },
                    SortingStage::PatternChoice => GameAction::PatternChoice {
                        pattern: self
                            .pick(g.patterns_for(&key.category).unwrap_or_default())
                            .to_string(),
                    },
                    _ => GameAction::Spelling {
                        text: self
                            .pick(&[key.spelling.clone(), format!("{}x", key.spelling)])
                            .to_string(),
                    },
                }
            }
            GameState::Matching(g) => {
                let down: Vec<usize> = (0..g.cards.len())
                    .filter(|&i| g.cards[i].status == CardStatus::FaceDown)
                    .collect();
                GameAction::Flip {
                    card: down[self.rng.below(down.len() as u32) as usize],
                }
            }
        }
    }
}

fn correct_action(game: &GameState) -> GameAction {
    match game {
        GameState::Sorting(g) => {
            let key = g.current_answer().expect("unfinished game has a pending word");
            match g.stage {
                SortingStage::SoundSort => GameAction::SoundChoice {
                    category: key.category.clone(),
                },
                SortingStage::PatternChoice => GameAction::PatternChoice {
                    pattern: key.pattern.clone(),
                },
                _ => GameAction::Spelling {
                    text: key.spelling.clone(),
                },
            }
        }
        GameState::Matching(g) => {
            let want = g.face_up.first().map(|&i| &g.cards[i].category);
            let card = (0..g.cards.len())
                .find(|&i| {
                    g.cards[i].status == CardStatus::FaceDown
                        && want.is_none_or(|c| &g.cards[i].category == c)
                })
                .expect("a face-down card remains");
            GameAction::Flip { card }
        }
    }
}

/// Checks one accepted transition.
fn check_step(before: &GameState, after: &GameState) -> Result<(), String> {
    if after.version() != before.version() + 1 {
        return Err(format!("version {} -> {}", before.version(), after.version()));
    }
    let (old, new) = (&before.session().events, &after.session().events);
    if new.len() <= old.len() || new[..old.len()] != old[..] {
        return Err("event log is not an extension of the previous log".into());
    }
    match (before, after) {
        (GameState::Sorting(a), GameState::Sorting(b)) => {
            if b.cursor < a.cursor || b.cursor > a.cursor + 1 {
                return Err(format!("cursor {} -> {}", a.cursor, b.cursor));
            }
            if b.is_finished() != (b.cursor == b.word_order.len()) {
                return Err("finished flag disagrees with cursor".into());
            }
        }
        (GameState::Matching(a), GameState::Matching(b)) => {
            if b.matched_count() < a.matched_count() {
                return Err("matched cards turned back".into());
            }
            if b.face_up.len() > 1 {
                return Err("more than one unresolved face-up card".into());
            }
            let matched: Vec<_> = b.cards.iter().filter(|c| c.status == CardStatus::Matched).collect();
            for cat in &b.config.contrast {
                if matched.iter().filter(|c| &c.category == cat).count() % 2 != 0 {
                    return Err(format!("odd number of matched {cat} cards"));
                }
            }
        }
        _ => return Err("game kind changed".into()),
    }
    Ok(())
}

/// Plays `script` to completion (or to the end of a scripted action list).
pub fn run(script: &SimScript, lex: &Lexicon) -> Result<SimReport, SimError> {
    check_script(script)?;
    let mut game = GameState::new("sim".into(), script.game.clone(), lex, script.start)
        .map_err(SimError::Setup)?;
    let mut player = Player {
        policy: &script.policy,
        rng: Lcg64::from_seed(match script.policy {
            Policy::UniformRandom { seed } => seed,
            _ => 0,
        }),
        next_script: 0,
    };
    let mut steps = 0;
    while let Some(action) = player.next(&game) {
        if steps == MAX_STEPS {
            return Err(SimError::Stalled(steps));
        }
        steps += 1;
        let at = script.start + Duration::seconds(steps as i64);
        let (next, _) = game.apply(&action, at).map_err(|error| SimError::Rejected {
            step: steps,
            action: action.name(),
            error,
        })?;
        check_step(&game, &next).map_err(|message| SimError::Invariant { step: steps, message })?;
        game = next;
    }
    if !matches!(script.policy, Policy::Scripted { .. }) && !game.is_finished() {
        return Err(SimError::Stalled(steps));
    }
    let progress = build_progress(&game, Some(&sim_student())).expect("simulated owner is a student");
    Ok(SimReport {
        events: game.session().events.clone(),
        final_state: game,
        steps,
        progress,
    })
}

pub fn summarize(run_index: usize, seed: u64, report: &SimReport) -> RunSummary {
    let (mut correct, mut incorrect) = (0, 0);
    for ev in &report.events {
        let judged = match &ev.kind {
            EventKind::SoundChoice { correct, .. }
            | EventKind::PatternChoice { correct, .. }
            | EventKind::SpellingAttempt { correct, .. }
            | EventKind::PairResolved { correct, .. } => Some(*correct),
            _ => None,
        };
        match judged {
            Some(true) => correct += 1,
            Some(false) => incorrect += 1,
            None => {}
        }
    }
    let log = serde_json::to_vec(&report.events).expect("events serialize");
    RunSummary {
        run: run_index,
        seed,
        kind: report.final_state.kind(),
        finished: report.final_state.is_finished(),
        items: match &report.final_state {
            GameState::Sorting(g) => g.word_order.len(),
            GameState::Matching(g) => g.cards.len(),
        },
        steps: report.steps,
        events: report.events.len(),
        correct,
        incorrect,
        digest: hex::encode(Sha256::digest(&log)),
    }
}

/// Runs `script` `runs` times, reseeded with `first_seed`, `first_seed + 1`, ...
pub fn run_batch(
    script: &SimScript,
    lex: &Lexicon,
    runs: usize,
    first_seed: u64,
) -> Result<Vec<RunSummary>, SimError> {
    (0..runs)
        .map(|i| {
            let seed = first_seed.wrapping_add(i as u64);
            run(&script.reseeded(seed), lex).map(|r| summarize(i, seed, &r))
        })
        .collect()
}
