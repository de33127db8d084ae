//! Durable storage behind the [`Datastore`] trait, with a SQLite backend.
//!
//! Several service processes may open the same database file; every write
//! is a single transaction and game updates are compare-and-set on version.

use std::path::Path;
use std::sync::Mutex;

use rusqlite::{params, Connection, OpenFlags, OptionalExtension, TransactionBehavior};
use thiserror::Error;
use wordify_core::gamekit::{GameId, GameState};
use wordify_core::roster::{CredentialHash, Role, Roster, RosterError, User, UserId};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("datastore error: {0}")]
    Sqlite(#[from] rusqlite::Error),
    #[error("corrupt stored record: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Roster(#[from] RosterError),
}

/// The lexicon as stored: word lines plus the two registries, all as text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoredLexicon {
    pub revision: i64,
    pub words_jsonl: String,
    pub categories_json: String,
    pub patterns_json: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoredGame {
    pub game_id: GameId,
    pub owner: UserId,
    pub version: u64,
    pub document: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AudioAsset {
    pub media_type: String,
    pub bytes: Vec<u8>,
}

pub trait Datastore: Send + Sync {
    fn save_lexicon(&self, words_jsonl: &str, categories_json: &str, patterns_json: &str)
        -> Result<i64, StoreError>;
    fn load_lexicon(&self) -> Result<Option<StoredLexicon>, StoreError>;
    /// Revision of the latest stored lexicon, without its contents.
    fn lexicon_revision(&self) -> Result<Option<i64>, StoreError>;

    fn put_audio(&self, key: &str, asset: &AudioAsset) -> Result<(), StoreError>;
    fn get_audio(&self, key: &str) -> Result<Option<AudioAsset>, StoreError>;

    fn load_roster(&self) -> Result<Roster, StoreError>;
    /// Runs `create` against the current roster and persists the user it
    /// returns, all inside one write transaction.
    fn create_user(
        &self,
        create: &mut dyn FnMut(&mut Roster) -> Result<User, RosterError>,
    ) -> Result<User, StoreError>;

    /// Allocates the next `g-<n>` id, builds the game with it and stores it
    /// at version 0.
    fn create_game(
        &self,
        owner: &UserId,
        build: &mut dyn FnMut(GameId) -> Result<GameState, wordify_core::gamekit::GameError>,
    ) -> Result<Result<StoredGame, wordify_core::gamekit::GameError>, StoreError>;
    fn load_game(&self, id: &GameId) -> Result<Option<StoredGame>, StoreError>;
    /// Replaces the game document iff the stored version is still
    /// `expected`. Returns false on a version conflict.
    fn update_game(
        &self,
        id: &GameId,
        expected: u64,
        document: &serde_json::Value,
        version: u64,
    ) -> Result<bool, StoreError>;
    /// Every stored version of a game, oldest first.
    fn game_history(&self, id: &GameId) -> Result<Vec<u64>, StoreError>;
    fn games_owned_by(&self, owners: &[UserId]) -> Result<Vec<StoredGame>, StoreError>;

    /// Token signing secret, created on first use and shared by all replicas.
    fn token_secret(&self) -> Result<Vec<u8>, StoreError>;
}

pub struct SqliteStore {
    conn: Mutex<Connection>,
}

const SCHEMA: &str = "
CREATE TABLE IF NOT EXISTS meta (key TEXT PRIMARY KEY, value BLOB NOT NULL);
CREATE TABLE IF NOT EXISTS lexicon (
    revision INTEGER PRIMARY KEY AUTOINCREMENT,
    words TEXT NOT NULL,
    categories TEXT NOT NULL,
    patterns TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS audio (key TEXT PRIMARY KEY, media_type TEXT NOT NULL, bytes BLOB NOT NULL);
CREATE TABLE IF NOT EXISTS users (
    seq INTEGER PRIMARY KEY AUTOINCREMENT,
    id TEXT NOT NULL UNIQUE,
    display_name TEXT NOT NULL,
    role TEXT NOT NULL,
    credential TEXT NOT NULL,
    teacher_id TEXT,
    school_id TEXT
);
CREATE TABLE IF NOT EXISTS games (
    seq INTEGER PRIMARY KEY AUTOINCREMENT,
    id TEXT NOT NULL UNIQUE,
    owner TEXT NOT NULL,
    version INTEGER NOT NULL,
    document TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS game_versions (
    game_id TEXT NOT NULL,
    version INTEGER NOT NULL,
    document TEXT NOT NULL,
    PRIMARY KEY (game_id, version)
);
";

impl SqliteStore {
    /// Opens (creating if needed) a store file.
    pub fn create(path: &Path) -> Result<Self, StoreError> {
        Self::open_with(path, OpenFlags::SQLITE_OPEN_READ_WRITE | OpenFlags::SQLITE_OPEN_CREATE)
    }

    /// Opens an existing store file; fails if it does not exist.
    pub fn open(path: &Path) -> Result<Self, StoreError> {
        Self::open_with(path, OpenFlags::SQLITE_OPEN_READ_WRITE)
    }

    fn open_with(path: &Path, flags: OpenFlags) -> Result<Self, StoreError> {
        let conn = Connection::open_with_flags(path, flags | OpenFlags::SQLITE_OPEN_NO_MUTEX)?;
        conn.busy_timeout(std::time::Duration::from_secs(10))?;
        conn.pragma_update(None, "journal_mode", "WAL")?;
        conn.execute_batch(SCHEMA)?;
        Ok(SqliteStore { conn: Mutex::new(conn) })
    }

    fn conn(&self) -> std::sync::MutexGuard<'_, Connection> {
        self.conn.lock().unwrap_or_else(|e| e.into_inner())
    }
}

fn parse_doc(text: &str) -> Result<serde_json::Value, StoreError> {
    serde_json::from_str(text).map_err(|e| StoreError::Corrupt(e.to_string()))
}

fn row_to_game(row: &rusqlite::Row<'_>) -> rusqlite::Result<(String, String, i64, String)> {
    Ok((row.get(0)?, row.get(1)?, row.get(2)?, row.get(3)?))
}

fn to_stored((id, owner, version, doc): (String, String, i64, String)) -> Result<StoredGame, StoreError> {
    Ok(StoredGame {
        game_id: GameId::new(id),
        owner: UserId::new(owner),
        version: version as u64,
        document: parse_doc(&doc)?,
    })
}

fn load_users(conn: &Connection) -> Result<Vec<User>, StoreError> {
    let mut stmt = conn.prepare(
        "SELECT id, display_name, role, credential, teacher_id, school_id FROM users ORDER BY seq",
    )?;
    let rows = stmt.query_map([], |r| {
        Ok((
            r.get::<_, String>(0)?,
            r.get::<_, String>(1)?,
            r.get::<_, String>(2)?,
            r.get::<_, String>(3)?,
            r.get::<_, Option<String>>(4)?,
            r.get::<_, Option<String>>(5)?,
        ))
    })?;
    let mut users = Vec::new();
    for row in rows {
        let (id, name, role, cred, teacher, school) = row?;
        let role: Role = role.parse().map_err(|_| StoreError::Corrupt(format!("role {role}")))?;
        users.push(User {
            id: UserId::new(id),
            display_name: name,
            role,
            credential: CredentialHash::from_stored(cred),
            teacher_id: teacher.map(UserId::new),
            school_id: school,
        });
    }
    Ok(users)
}

impl Datastore for SqliteStore {
    fn save_lexicon(&self, words: &str, categories: &str, patterns: &str) -> Result<i64, StoreError> {
        let conn = self.conn();
        conn.execute(
            "INSERT INTO lexicon (words, categories, patterns) VALUES (?1, ?2, ?3)",
            params![words, categories, patterns],
        )?;
        Ok(conn.last_insert_rowid())
    }

    fn load_lexicon(&self) -> Result<Option<StoredLexicon>, StoreError> {
        let conn = self.conn();
        Ok(conn
            .query_row(
                "SELECT revision, words, categories, patterns FROM lexicon ORDER BY revision DESC LIMIT 1",
                [],
                |r| {
                    Ok(StoredLexicon {
                        revision: r.get(0)?,
                        words_jsonl: r.get(1)?,
                        categories_json: r.get(2)?,
                        patterns_json: r.get(3)?,
                    })
                },
            )
            .optional()?)
    }

    fn lexicon_revision(&self) -> Result<Option<i64>, StoreError> {
        Ok(self
            .conn()
            .query_row("SELECT MAX(revision) FROM lexicon", [], |r| r.get(0))?)
    }

    fn put_audio(&self, key: &str, asset: &AudioAsset) -> Result<(), StoreError> {
        self.conn().execute(
            "INSERT OR REPLACE INTO audio (key, media_type, bytes) VALUES (?1, ?2, ?3)",
            params![key, asset.media_type, asset.bytes],
        )?;
        Ok(())
    }

    fn get_audio(&self, key: &str) -> Result<Option<AudioAsset>, StoreError> {
        Ok(self
            .conn()
            .query_row("SELECT media_type, bytes FROM audio WHERE key = ?1", [key], |r| {
                Ok(AudioAsset {
                    media_type: r.get(0)?,
                    bytes: r.get(1)?,
                })
            })
            .optional()?)
    }

    fn load_roster(&self) -> Result<Roster, StoreError> {
        Ok(Roster::from_users(load_users(&self.conn())?))
    }

    fn create_user(
        &self,
        create: &mut dyn FnMut(&mut Roster) -> Result<User, RosterError>,
    ) -> Result<User, StoreError> {
        let mut conn = self.conn();
        let tx = conn.transaction_with_behavior(TransactionBehavior::Immediate)?;
        let mut roster = Roster::from_users(load_users(&tx)?);
        let user = create(&mut roster)?;
        tx.execute(
            "INSERT INTO users (id, display_name, role, credential, teacher_id, school_id)
             VALUES (?1, ?2, ?3, ?4, ?5, ?6)",
            params![
                user.id.as_str(),
                user.display_name,
                user.role.as_str(),
                user.credential.as_stored(),
                user.teacher_id.as_ref().map(UserId::as_str),
                user.school_id,
            ],
        )?;
        tx.commit()?;
        Ok(user)
    }

    fn create_game(
        &self,
        owner: &UserId,
        build: &mut dyn FnMut(GameId) -> Result<GameState, wordify_core::gamekit::GameError>,
    ) -> Result<Result<StoredGame, wordify_core::gamekit::GameError>, StoreError> {
        let mut conn = self.conn();
        let tx = conn.transaction_with_behavior(TransactionBehavior::Immediate)?;
        let next: i64 = tx.query_row(
            "SELECT COALESCE((SELECT seq FROM sqlite_sequence WHERE name = 'games'), 0) + 1",
            [],
            |r| r.get(0),
        )?;
        let game_id = GameId::new(format!("g-{next}"));
        let state = match build(game_id.clone()) {
            Ok(s) => s,
            Err(e) => return Ok(Err(e)),
        };
        let doc = state.to_document();
        let text = doc.to_string();
        tx.execute(
            "INSERT INTO games (seq, id, owner, version, document) VALUES (?1, ?2, ?3, ?4, ?5)",
            params![next, game_id.as_str(), owner.as_str(), state.version() as i64, text],
        )?;
        tx.execute(
            "INSERT INTO game_versions (game_id, version, document) VALUES (?1, ?2, ?3)",
            params![game_id.as_str(), state.version() as i64, text],
        )?;
        tx.commit()?;
        Ok(Ok(StoredGame {
            game_id,
            owner: owner.clone(),
            version: state.version(),
            document: doc,
        }))
    }

    fn load_game(&self, id: &GameId) -> Result<Option<StoredGame>, StoreError> {
        let row = self
            .conn()
            .query_row(
                "SELECT id, owner, version, document FROM games WHERE id = ?1",
                [id.as_str()],
                row_to_game,
            )
            .optional()?;
        row.map(to_stored).transpose()
    }

    fn update_game(
        &self,
        id: &GameId,
        expected: u64,
        document: &serde_json::Value,
        version: u64,
    ) -> Result<bool, StoreError> {
        let mut conn = self.conn();
        let tx = conn.transaction_with_behavior(TransactionBehavior::Immediate)?;
        let text = document.to_string();
        let changed = tx.execute(
            "UPDATE games SET document = ?1, version = ?2 WHERE id = ?3 AND version = ?4",
            params![text, version as i64, id.as_str(), expected as i64],
        )?;
        if changed == 0 {
            return Ok(false);
        }
        tx.execute(
            "INSERT INTO game_versions (game_id, version, document) VALUES (?1, ?2, ?3)",
            params![id.as_str(), version as i64, text],
        )?;
        tx.commit()?;
        Ok(true)
    }

    fn game_history(&self, id: &GameId) -> Result<Vec<u64>, StoreError> {
        let conn = self.conn();
        let mut stmt =
            conn.prepare("SELECT version FROM game_versions WHERE game_id = ?1 ORDER BY version")?;
        let rows = stmt.query_map([id.as_str()], |r| r.get::<_, i64>(0))?;
        rows.map(|r| Ok(r? as u64)).collect()
    }

    fn games_owned_by(&self, owners: &[UserId]) -> Result<Vec<StoredGame>, StoreError> {
        let conn = self.conn();
        let mut stmt =
            conn.prepare("SELECT id, owner, version, document FROM games WHERE owner = ?1 ORDER BY seq")?;
        let mut out = Vec::new();
        for owner in owners {
            for row in stmt.query_map([owner.as_str()], row_to_game)? {
                out.push(to_stored(row?)?);
            }
        }
        Ok(out)
    }

    fn token_secret(&self) -> Result<Vec<u8>, StoreError> {
        use rand::RngCore;
        let mut conn = self.conn();
        let tx = conn.transaction_with_behavior(TransactionBehavior::Immediate)?;
        let existing: Option<Vec<u8>> = tx
            .query_row("SELECT value FROM meta WHERE key = 'token_secret'", [], |r| r.get(0))
            .optional()?;
        let secret = match existing {
            Some(s) => s,
            None => {
                let mut s = vec![0u8; 32];
                rand::thread_rng().fill_bytes(&mut s);
                tx.execute("INSERT INTO meta (key, value) VALUES ('token_secret', ?1)", [&s])?;
                s
            }
        };
        tx.commit()?;
        Ok(secret)
    }
}
