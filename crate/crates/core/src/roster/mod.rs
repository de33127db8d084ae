//! Users, roles, enrollment, and progress aggregation.

pub mod access;
mod progress;
mod user;

use thiserror::Error;

pub use progress::{
    build_progress, class_report, ClassReport, ProgressRecord, ProgressTotals, StageCounts,
    StudentSummary, Tally,
};
pub use user::{CreateUser, CredentialHash, Role, Roster, User, UserId};

use crate::gamekit::GameId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RosterError {
    #[error("unknown teacher {0}")]
    UnknownTeacher(UserId),
    #[error("invalid role {0:?}")]
    InvalidRole(String),
    #[error("name {0:?} already taken in this school")]
    DuplicateName(String),
    #[error("only students can be registered under a teacher")]
    TeacherOnNonStudent,
    #[error("user name must not be blank")]
    InvalidName,
    #[error("game {0} has no student owner")]
    OrphanGame(GameId),
}
