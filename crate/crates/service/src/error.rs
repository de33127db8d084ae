use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde_json::json;
use wordify_core::gamekit::GameError;
use wordify_core::lexicon::LexiconError;
use wordify_core::roster::RosterError;

use crate::store::StoreError;

/// An error response: `{"error": <code>, "message": <text>}` plus, for
/// version conflicts, the current game state under `"state"`.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub state: Option<serde_json::Value>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
            state: None,
        }
    }

    pub fn unauthorized(message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNAUTHORIZED, "unauthorized", message)
    }

    pub fn forbidden() -> Self {
        Self::new(StatusCode::FORBIDDEN, "forbidden", "not allowed for this user")
    }

    pub fn not_found(what: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", what)
    }

    pub fn bad_request(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "error": self.code, "message": self.message });
        if let Some(state) = self.state {
            body["state"] = state;
        }
        (self.status, Json(body)).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::Roster(r) => r.into(),
            other => {
                tracing::error!(error = %other, "datastore failure");
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", other.to_string())
            }
        }
    }
}

impl From<RosterError> for ApiError {
    fn from(e: RosterError) -> Self {
        let code = match e {
            RosterError::DuplicateName(_) => {
                return ApiError::new(StatusCode::CONFLICT, "duplicate_name", e.to_string())
            }
            RosterError::UnknownTeacher(_) => "unknown_teacher",
            RosterError::InvalidRole(_) => "invalid_role",
            RosterError::TeacherOnNonStudent => "teacher_on_non_student",
            RosterError::InvalidName => "invalid_name",
            RosterError::OrphanGame(_) => "orphan_game",
        };
        ApiError::bad_request(code, e.to_string())
    }
}

impl From<LexiconError> for ApiError {
    fn from(e: LexiconError) -> Self {
        let code = match e {
            LexiconError::UnknownCategory(_) => "unknown_category",
            LexiconError::UnknownPattern(_) => "unknown_pattern",
            _ => "lexicon_error",
        };
        ApiError::bad_request(code, e.to_string())
    }
}

impl From<GameError> for ApiError {
    fn from(e: GameError) -> Self {
        let code = match e {
            GameError::ConfigInvalid(_) => "config_invalid",
            GameError::PoolTooSmall(_) => "pool_too_small",
            GameError::WrongStage { .. } => "wrong_stage",
            GameError::GamePaused => "game_paused",
            GameError::GameFinished => "game_finished",
            GameError::AlreadyPaused => "already_paused",
            GameError::NotPaused => "not_paused",
            GameError::UnknownCategory(_) => "unknown_category",
            GameError::UnknownPattern(_) => "unknown_pattern",
            GameError::EmptyAnswer => "empty_answer",
            GameError::CardNotFaceDown(_) => "card_not_face_down",
            GameError::IndexOutOfRange(_) => "index_out_of_range",
            GameError::WrongKind { .. } => "wrong_kind",
            GameError::SchemaMismatch(_) | GameError::UnknownWordId(_) => {
                tracing::error!(error = %e, "stored game unreadable");
                return ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string());
            }
        };
        ApiError::bad_request(code, e.to_string())
    }
}
