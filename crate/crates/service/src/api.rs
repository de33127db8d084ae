use std::collections::BTreeMap;
use std::time::Instant;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{FromRequestParts, Path, Query, Request, State};
use axum::http::header::{
    AUTHORIZATION, CACHE_CONTROL, CONTENT_TYPE, ETAG, IF_NONE_MATCH,
};
use axum::http::request::Parts;
use axum::http::{HeaderMap, HeaderValue, StatusCode};
use axum::middleware::Next;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::Utc;
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};
use wordify_core::gamekit::{GameAction, GameConfig, GameId, GameKind, GameState};
use wordify_core::lexicon::WordFilter;
use wordify_core::roster::{access, build_progress, class_report, CreateUser, ProgressRecord, ProgressTotals, Role, User, UserId};

use crate::error::ApiError;
use crate::view::{audio_url, game_view, outcome_view};
use crate::AppState;

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/v1/sessions", post(login))
        .route("/api/v1/words", get(list_words))
        .route("/api/v1/categories", get(list_categories))
        .route("/api/v1/users", post(create_user))
        .route("/api/v1/users/me", get(me))
        .route("/api/v1/games", post(create_game))
        .route("/api/v1/games/{id}", get(get_game))
        .route("/api/v1/games/{id}/choices", get(game_choices))
        .route("/api/v1/games/{id}/audio", get(game_audio))
        .route("/api/v1/games/{id}/actions", post(game_action))
        .route("/api/v1/students/{id}/progress", get(student_progress))
        .route("/api/v1/teachers/{id}/class-report", get(teacher_report))
        .route("/api/v1/audio/{key}", get(audio))
        .layer(axum::middleware::from_fn(log_request))
        .with_state(state)
}

async fn log_request(req: Request, next: Next) -> Response {
    let method = req.method().clone();
    let path = req.uri().path().to_string();
    let started = Instant::now();
    let resp = next.run(req).await;
    tracing::info!(
        method = %method,
        path = %path,
        status = resp.status().as_u16(),
        micros = started.elapsed().as_micros() as u64,
        "request"
    );
    resp
}

/// The authenticated caller, resolved from a bearer token.
pub struct Caller(pub User);

impl FromRequestParts<AppState> for Caller {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &AppState) -> Result<Self, ApiError> {
        let header = parts
            .headers
            .get(AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .ok_or_else(|| ApiError::unauthorized("missing bearer token"))?;
        let token = header
            .strip_prefix("Bearer ")
            .ok_or_else(|| ApiError::unauthorized("missing bearer token"))?;
        let claims = state
            .signer()
            .verify(token, Utc::now())
            .map_err(|e| ApiError::unauthorized(e.to_string()))?;
        let roster = state.store().load_roster()?;
        let user = roster
            .get(&claims.sub)
            .filter(|u| u.role == claims.role)
            .cloned()
            .ok_or_else(|| ApiError::unauthorized("unknown user"))?;
        Ok(Caller(user))
    }
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    payload
        .map(|Json(v)| v)
        .map_err(|e| ApiError::bad_request("invalid_body", e.body_text()))
}

fn etag_of(bytes: &[u8]) -> String {
    format!("\"{}\"", hex::encode(&Sha256::digest(bytes)[..16]))
}

/// Serves `bytes` with an ETag, answering 304 when the client already holds it.
fn cached(headers: &HeaderMap, bytes: Vec<u8>, content_type: &str, cache_control: &'static str) -> Response {
    let etag = etag_of(&bytes);
    let fresh = headers
        .get(IF_NONE_MATCH)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.split(',').any(|t| t.trim() == etag || t.trim() == "*"));
    let mut resp = if fresh {
        StatusCode::NOT_MODIFIED.into_response()
    } else {
        let mut r = bytes.into_response();
        r.headers_mut()
            .insert(CONTENT_TYPE, HeaderValue::from_str(content_type).expect("valid media type"));
        r
    };
    let h = resp.headers_mut();
    h.insert(ETAG, HeaderValue::from_str(&etag).expect("hex etag"));
    h.insert(CACHE_CONTROL, HeaderValue::from_static(cache_control));
    resp
}

#[derive(Deserialize)]
struct LoginRequest {
    name: String,
    credential: String,
}

#[derive(Serialize)]
struct LoginResponse {
    token: String,
    user_id: UserId,
    role: Role,
    expires_at: chrono::DateTime<Utc>,
}

async fn login(
    State(state): State<AppState>,
    payload: Result<Json<LoginRequest>, JsonRejection>,
) -> Result<Json<LoginResponse>, ApiError> {
    let req = body(payload)?;
    let roster = state.store().load_roster()?;
    let user = roster
        .authenticate(&req.name, &req.credential)
        .ok_or_else(|| ApiError::unauthorized("invalid credentials"))?;
    let (token, expires_at) = state.signer().issue(user, Utc::now());
    Ok(Json(LoginResponse {
        token,
        user_id: user.id.clone(),
        role: user.role,
        expires_at,
    }))
}

#[derive(Serialize)]
struct WordSummary<'a> {
    id: &'a str,
    spelling: &'a str,
    grade: u8,
    sentence: &'a str,
    audio_url: Option<String>,
}

async fn list_words(
    State(state): State<AppState>,
    _caller: Caller,
    headers: HeaderMap,
    filter: Result<Query<WordFilter>, QueryRejection>,
) -> Result<Response, ApiError> {
    let Query(filter) = filter.map_err(|e| ApiError::bad_request("invalid_query", e.body_text()))?;
    let lex = state.lexicon();
    let ids = lex.query(&filter)?;
    let words: Vec<WordSummary> = ids
        .iter()
        .filter_map(|id| lex.word(id))
        .map(|w| WordSummary {
            id: w.id.as_str(),
            spelling: &w.spelling,
            grade: w.grade,
            sentence: &w.sentence,
            audio_url: w.audio.as_deref().map(audio_url),
        })
        .collect();
    let bytes = serde_json::to_vec(&json!({ "words": words })).expect("json");
    Ok(cached(&headers, bytes, "application/json", "private, no-cache"))
}

async fn list_categories(
    State(state): State<AppState>,
    _caller: Caller,
    headers: HeaderMap,
) -> Response {
    let lex = state.lexicon();
    let categories: BTreeMap<&str, Vec<&str>> = lex
        .categories()
        .iter()
        .map(|c| (c.name.as_str(), c.members.iter().map(|p| p.as_str()).collect()))
        .collect();
    let patterns: BTreeMap<&str, Vec<&str>> = lex
        .patterns()
        .iter()
        .map(|(c, set)| (c, set.iter().map(|p| p.name.as_str()).collect()))
        .collect();
    let bytes = serde_json::to_vec(&json!({ "categories": categories, "patterns": patterns }))
        .expect("json");
    cached(&headers, bytes, "application/json", "private, no-cache")
}

async fn create_user(
    State(state): State<AppState>,
    Caller(caller): Caller,
    payload: Result<Json<CreateUser>, JsonRejection>,
) -> Result<(StatusCode, Json<User>), ApiError> {
    let req = body(payload)?;
    let role: Role = req.role.parse()?;
    let roster = state.store().load_roster()?;
    let teacher = req.teacher_id.as_ref().and_then(|t| roster.get(t));
    if !access::can_create_user(&caller, role, teacher, req.school_id.as_deref()) {
        return Err(ApiError::forbidden());
    }
    let user = state.store().create_user(&mut |roster| roster.create_user(req.clone()))?;
    Ok((StatusCode::CREATED, Json(user)))
}

async fn me(Caller(caller): Caller) -> Json<User> {
    Json(caller)
}

#[derive(Deserialize)]
struct CreateGameRequest {
    kind: GameKind,
    config: serde_json::Value,
    #[serde(default)]
    student_id: Option<UserId>,
}

async fn create_game(
    State(state): State<AppState>,
    Caller(caller): Caller,
    payload: Result<Json<CreateGameRequest>, JsonRejection>,
) -> Result<(StatusCode, Json<serde_json::Value>), ApiError> {
    let req = body(payload)?;
    let roster = state.store().load_roster()?;
    let owner = match (&req.student_id, caller.role) {
        (None, Role::Student) => caller.clone(),
        (Some(id), _) => roster.get(id).cloned().ok_or_else(|| ApiError::not_found("student"))?,
        (None, _) => return Err(ApiError::bad_request("student_required", "student_id is required")),
    };
    if !access::can_create_game_for(&caller, &owner) {
        return Err(ApiError::forbidden());
    }
    let config = match req.kind {
        GameKind::Sorting => serde_json::from_value(req.config).map(GameConfig::Sorting),
        GameKind::Matching => serde_json::from_value(req.config).map(GameConfig::Matching),
    }
    .map_err(|e| ApiError::bad_request("config_invalid", e.to_string()))?;
    let lex = state.lexicon();
    let now = Utc::now();
    let stored = state
        .store()
        .create_game(&owner.id, &mut |id| GameState::new(id, config.clone(), &lex, now))??;
    let game = GameState::from_document(&stored.document, &lex)?;
    Ok((
        StatusCode::CREATED,
        Json(json!({ "game_id": stored.game_id, "state": game_view(&game, &lex) })),
    ))
}

enum Access {
    Read,
    Play,
}

/// Loads a game the caller may read (owner, the owner's teacher, school
/// administrators, system administrators) or play (owner only).
fn load_for(
    state: &AppState,
    caller: &User,
    id: &str,
    access_kind: Access,
) -> Result<(crate::store::StoredGame, GameState), ApiError> {
    let stored = state
        .store()
        .load_game(&GameId::new(id))?
        .ok_or_else(|| ApiError::not_found(format!("game {id}")))?;
    let allowed = match access_kind {
        Access::Play => stored.owner == caller.id,
        Access::Read => {
            stored.owner == caller.id || {
                let roster = state.store().load_roster()?;
                roster
                    .get(&stored.owner)
                    .is_some_and(|owner| access::can_view_progress(caller, owner))
            }
        }
    };
    if !allowed {
        return Err(ApiError::forbidden());
    }
    let game = GameState::from_document(&stored.document, &state.lexicon())?;
    Ok((stored, game))
}

async fn get_game(
    State(state): State<AppState>,
    Caller(caller): Caller,
    Path(id): Path<String>,
) -> Result<Json<serde_json::Value>, ApiError> {
    let (_, game) = load_for(&state, &caller, &id, Access::Read)?;
    Ok(Json(serde_json::to_value(game_view(&game, &state.lexicon())).expect("json")))
}

async fn game_choices(
    State(state): State<AppState>,
    Caller(caller): Caller,
    Path(id): Path<String>,
) -> Result<Json<serde_json::Value>, ApiError> {
    let (_, game) = load_for(&state, &caller, &id, Access::Read)?;
    Ok(Json(match &game {
        GameState::Sorting(g) => json!({
            "categories": [g.config.category_a, g.config.category_b],
            "patterns": g.config.patterns,
        }),
        GameState::Matching(g) => json!({ "categories": g.config.contrast }),
    }))
}

/// Audio of the word currently being sorted, so the client never needs its id.
async fn game_audio(
    State(state): State<AppState>,
    Caller(caller): Caller,
    Path(id): Path<String>,
    headers: HeaderMap,
) -> Result<Response, ApiError> {
    let (_, game) = load_for(&state, &caller, &id, Access::Read)?;
    let GameState::Sorting(g) = &game else {
        return Err(ApiError::not_found("matching games expose audio per card"));
    };
    let key = g
        .current_word()
        .and_then(|w| state.lexicon().word(w).and_then(|w| w.audio.clone()))
        .ok_or_else(|| ApiError::not_found("no audio for the current word"))?;
    let asset = state
        .store()
        .get_audio(&key)?
        .ok_or_else(|| ApiError::not_found("audio asset"))?;
    Ok(cached(&headers, asset.bytes, &asset.media_type, "private, no-cache"))
}

#[derive(Deserialize)]
struct ActionRequest {
    expected_version: u64,
    action: GameAction,
}

async fn game_action(
    State(state): State<AppState>,
    Caller(caller): Caller,
    Path(id): Path<String>,
    payload: Result<Json<ActionRequest>, JsonRejection>,
) -> Result<Json<serde_json::Value>, ApiError> {
    let req = body(payload)?;
    let (stored, game) = load_for(&state, &caller, &id, Access::Play)?;
    let lex = state.lexicon();
    let conflict = |game: &GameState, version: u64| {
        let mut e = ApiError::new(
            StatusCode::CONFLICT,
            "version_conflict",
            format!("expected version {}, game is at {version}", req.expected_version),
        );
        e.state = Some(serde_json::to_value(game_view(game, &lex)).expect("json"));
        e
    };
    if stored.version != req.expected_version {
        return Err(conflict(&game, stored.version));
    }
    let (next, outcome) = game.apply(&req.action, Utc::now())?;
    if !state
        .store()
        .update_game(&stored.game_id, stored.version, &next.to_document(), next.version())?
    {
        let current = state
            .store()
            .load_game(&stored.game_id)?
            .ok_or_else(|| ApiError::not_found(format!("game {id}")))?;
        let game = GameState::from_document(&current.document, &lex)?;
        return Err(conflict(&game, current.version));
    }
    Ok(Json(json!({
        "outcome": outcome_view(&next, &outcome, &lex),
        "state": game_view(&next, &lex),
    })))
}

#[derive(Deserialize, Default)]
struct FormatQuery {
    format: Option<String>,
}

fn wants_csv(q: &FormatQuery) -> Result<bool, ApiError> {
    match q.format.as_deref() {
        None | Some("json") => Ok(false),
        Some("csv") => Ok(true),
        Some(other) => Err(ApiError::bad_request("invalid_query", format!("unknown format {other}"))),
    }
}

fn csv_response(text: String) -> Response {
    ([(CONTENT_TYPE, "text/csv; charset=utf-8")], text).into_response()
}

async fn student_progress(
    State(state): State<AppState>,
    Caller(caller): Caller,
    Path(id): Path<String>,
    Query(q): Query<FormatQuery>,
) -> Result<Response, ApiError> {
    let roster = state.store().load_roster()?;
    let student = roster
        .get(&UserId::new(id.as_str()))
        .filter(|u| u.role == Role::Student)
        .ok_or_else(|| ApiError::not_found(format!("student {id}")))?;
    if !access::can_view_progress(&caller, student) {
        return Err(ApiError::forbidden());
    }
    let lex = state.lexicon();
    let mut records: Vec<ProgressRecord> = Vec::new();
    for stored in state.store().games_owned_by(std::slice::from_ref(&student.id))? {
        let game = GameState::from_document(&stored.document, &lex)?;
        records.push(build_progress(&game, Some(student))?);
    }
    if wants_csv(&q)? {
        return Ok(csv_response(ProgressRecord::to_csv(&records, &student.display_name)));
    }
    let mut totals = ProgressTotals::default();
    for r in &records {
        totals.add(&r.totals);
    }
    Ok(Json(json!({
        "student_id": student.id,
        "display_name": student.display_name,
        "records": records,
        "totals": totals,
    }))
    .into_response())
}

async fn teacher_report(
    State(state): State<AppState>,
    Caller(caller): Caller,
    Path(id): Path<String>,
    Query(q): Query<FormatQuery>,
) -> Result<Response, ApiError> {
    let roster = state.store().load_roster()?;
    let teacher = roster
        .get(&UserId::new(id.as_str()))
        .filter(|u| u.role == Role::Teacher)
        .ok_or_else(|| ApiError::not_found(format!("teacher {id}")))?;
    let anonymize = if access::can_view_class(&caller, teacher) {
        false
    } else if access::can_view_anonymized(&caller) {
        true
    } else {
        return Err(ApiError::forbidden());
    };
    let students: Vec<UserId> = roster.students_of(&teacher.id).iter().map(|u| u.id.clone()).collect();
    let lex = state.lexicon();
    let mut games = Vec::new();
    for stored in state.store().games_owned_by(&students)? {
        games.push((stored.owner, GameState::from_document(&stored.document, &lex)?));
    }
    let mut report = class_report(&roster, &teacher.id, games.iter().map(|(o, g)| (o, g)))?;
    if anonymize {
        report = report.anonymized();
    }
    if wants_csv(&q)? {
        return Ok(csv_response(report.to_csv()));
    }
    Ok(Json(report).into_response())
}

async fn audio(
    State(state): State<AppState>,
    _caller: Caller,
    Path(key): Path<String>,
    headers: HeaderMap,
) -> Result<Response, ApiError> {
    let asset = state
        .store()
        .get_audio(&key)?
        .ok_or_else(|| ApiError::not_found(format!("audio {key}")))?;
    Ok(cached(&headers, asset.bytes, &asset.media_type, "private, max-age=86400"))
}
