//! Folding game event logs into per-student progress.

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{Role, Roster, RosterError, User, UserId};
use crate::gamekit::{EventKind, GameId, GameKind, GameState};
use crate::lexicon::WordId;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub correct: u32,
    pub incorrect: u32,
}

impl Tally {
    fn record(&mut self, correct: bool) {
        if correct {
            self.correct += 1;
        } else {
            self.incorrect += 1;
        }
    }

    fn add(&mut self, other: &Tally) {
        self.correct += other.correct;
        self.incorrect += other.incorrect;
    }
}

/// Attempt counts for one word, one counter per game stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCounts {
    pub sound: u32,
    pub pattern: u32,
    pub spelling: u32,
    pub flips: u32,
}

impl StageCounts {
    fn add(&mut self, other: &StageCounts) {
        self.sound += other.sound;
        self.pattern += other.pattern;
        self.spelling += other.spelling;
        self.flips += other.flips;
    }

    pub fn stages(&self) -> [(&'static str, u32); 4] {
        [
            ("sound", self.sound),
            ("pattern", self.pattern),
            ("spelling", self.spelling),
            ("flips", self.flips),
        ]
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgressTotals {
    pub per_word: BTreeMap<WordId, StageCounts>,
    pub per_pattern: BTreeMap<String, Tally>,
    pub per_category: BTreeMap<String, Tally>,
}

impl ProgressTotals {
    pub fn add(&mut self, other: &ProgressTotals) {
        for (k, v) in &other.per_word {
            self.per_word.entry(k.clone()).or_default().add(v);
        }
        for (k, v) in &other.per_pattern {
            self.per_pattern.entry(k.clone()).or_default().add(v);
        }
        for (k, v) in &other.per_category {
            self.per_category.entry(k.clone()).or_default().add(v);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgressRecord {
    pub student_id: UserId,
    pub game_id: GameId,
    pub game_kind: GameKind,
    pub started_at: DateTime<Utc>,
    pub finished_at: Option<DateTime<Utc>>,
    #[serde(flatten)]
    pub totals: ProgressTotals,
}

/// Aggregates a game's event log for its owning student.
///
/// Sound and pattern choices are tallied under the value the student
/// submitted. A mismatched card pair counts once, against the category of
/// the card turned first.
pub fn build_progress(game: &GameState, owner: Option<&User>) -> Result<ProgressRecord, RosterError> {
    let owner = owner
        .filter(|u| u.role == Role::Student)
        .ok_or_else(|| RosterError::OrphanGame(game.game_id().clone()))?;
    let mut totals = ProgressTotals::default();
    let mut finished_at = None;
    for ev in &game.session().events {
        match &ev.kind {
            EventKind::SoundChoice { word_id, submitted, correct, .. } => {
                totals.per_word.entry(word_id.clone()).or_default().sound += 1;
                totals.per_category.entry(submitted.clone()).or_default().record(*correct);
            }
            EventKind::PatternChoice { word_id, submitted, correct, .. } => {
                totals.per_word.entry(word_id.clone()).or_default().pattern += 1;
                totals.per_pattern.entry(submitted.clone()).or_default().record(*correct);
            }
            EventKind::SpellingAttempt { word_id, .. } => {
                totals.per_word.entry(word_id.clone()).or_default().spelling += 1;
            }
            EventKind::CardFlip { word_id, .. } => {
                totals.per_word.entry(word_id.clone()).or_default().flips += 1;
            }
            EventKind::PairResolved { categories, correct, .. } => {
                totals.per_category.entry(categories[0].clone()).or_default().record(*correct);
            }
            EventKind::Complete => finished_at = Some(ev.at),
            EventKind::Pause | EventKind::Resume => {}
        }
    }
    Ok(ProgressRecord {
        student_id: owner.id.clone(),
        game_id: game.game_id().clone(),
        game_kind: game.kind(),
        started_at: game.created_at(),
        finished_at,
        totals,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StudentSummary {
    pub student_id: UserId,
    pub display_name: String,
    pub games: usize,
    pub finished_games: usize,
    #[serde(flatten)]
    pub totals: ProgressTotals,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassReport {
    pub teacher_id: UserId,
    pub students: Vec<StudentSummary>,
    pub totals: ProgressTotals,
}

impl ClassReport {
    /// Same counters with student identities replaced by ordinal labels.
    pub fn anonymized(&self) -> ClassReport {
        let mut out = self.clone();
        for (i, s) in out.students.iter_mut().enumerate() {
            s.student_id = UserId::new(format!("student-{}", i + 1));
            s.display_name = format!("Student {}", i + 1);
        }
        out
    }

    /// CSV with one row per (student, word, stage) that saw any attempts.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["student_id", "display_name", "word_id", "stage", "attempts"])
            .expect("in-memory write");
        for s in &self.students {
            write_word_rows(&mut w, &s.student_id, &s.display_name, &s.totals);
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8 csv")
    }
}

impl ProgressRecord {
    pub fn to_csv(records: &[ProgressRecord], display_name: &str) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["student_id", "display_name", "game_id", "word_id", "stage", "attempts"])
            .expect("in-memory write");
        for r in records {
            for (word, counts) in &r.totals.per_word {
                for (stage, n) in counts.stages() {
                    if n > 0 {
                        w.write_record([
                            r.student_id.as_str(),
                            display_name,
                            r.game_id.as_str(),
                            word.as_str(),
                            stage,
                            &n.to_string(),
                        ])
                        .expect("in-memory write");
                    }
                }
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8 csv")
    }
}

fn write_word_rows(w: &mut csv::Writer<Vec<u8>>, id: &UserId, name: &str, totals: &ProgressTotals) {
    for (word, counts) in &totals.per_word {
        for (stage, n) in counts.stages() {
            if n > 0 {
                w.write_record([id.as_str(), name, word.as_str(), stage, &n.to_string()])
                    .expect("in-memory write");
            }
        }
    }
}

/// Sums the progress of every student registered under `teacher_id`.
///
/// `games` may contain games of any owner; only the teacher's students'
/// games are counted.
pub fn class_report<'a, I>(
    roster: &Roster,
    teacher_id: &UserId,
    games: I,
) -> Result<ClassReport, RosterError>
where
    I: IntoIterator<Item = (&'a UserId, &'a GameState)>,
{
    roster
        .get(teacher_id)
        .filter(|u| u.role == Role::Teacher)
        .ok_or_else(|| RosterError::UnknownTeacher(teacher_id.clone()))?;
    let students = roster.students_of(teacher_id);
    let mut summaries: Vec<StudentSummary> = students
        .iter()
        .map(|s| StudentSummary {
            student_id: s.id.clone(),
            display_name: s.display_name.clone(),
            games: 0,
            finished_games: 0,
            totals: ProgressTotals::default(),
        })
        .collect();
    for (owner, game) in games {
        let Some(pos) = students.iter().position(|s| &s.id == owner) else {
            continue;
        };
        let record = build_progress(game, Some(students[pos]))?;
        let summary = &mut summaries[pos];
        summary.games += 1;
        summary.finished_games += usize::from(record.finished_at.is_some());
        summary.totals.add(&record.totals);
    }
    let mut totals = ProgressTotals::default();
    for s in &summaries {
        totals.add(&s.totals);
    }
    Ok(ClassReport {
        teacher_id: teacher_id.clone(),
        students: summaries,
        totals,
    })
}
