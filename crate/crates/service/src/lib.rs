//! HTTP service for the Wordification games.
//!
//! Handlers keep no per-game state in memory: every request reloads the
//! game from the [`Datastore`], so any number of replicas can share one
//! store file.

mod api;
pub mod auth;
pub mod error;
pub mod store;
pub mod view;

use std::sync::{Arc, RwLock};

use tokio::net::TcpListener;
use wordify_core::lexicon::{CategoryRegistry, Inventory, PatternRegistry};
use wordify_core::Lexicon;

pub use api::{router, Caller};
pub use auth::TokenSigner;
pub use error::ApiError;
pub use store::{Datastore, SqliteStore, StoreError};

#[derive(Debug, thiserror::Error)]
pub enum StartupError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("store holds no lexicon; run `wordify ingest` first")]
    NoLexicon,
    #[error("stored lexicon is unusable: {0}")]
    Lexicon(String),
}

struct Inner {
    store: Arc<dyn Datastore>,
    lexicon: RwLock<(i64, Arc<Lexicon>)>,
    signer: TokenSigner,
}

/// Shared handler state. Cheap to clone.
#[derive(Clone)]
pub struct AppState(Arc<Inner>);

impl AppState {
    /// `revision` is the stored lexicon revision `lexicon` was built from.
    pub fn new(
        store: Arc<dyn Datastore>,
        revision: i64,
        lexicon: Arc<Lexicon>,
        signer: TokenSigner,
    ) -> Self {
        AppState(Arc::new(Inner {
            store,
            lexicon: RwLock::new((revision, lexicon)),
            signer,
        }))
    }

    /// Builds state from whatever the store holds: the latest lexicon
    /// revision and the shared token secret.
    pub fn from_store(
        store: Arc<dyn Datastore>,
        token_ttl: chrono::Duration,
    ) -> Result<Self, StartupError> {
        let stored = store.load_lexicon()?.ok_or(StartupError::NoLexicon)?;
        let lexicon = load_lexicon(&stored).map_err(StartupError::Lexicon)?;
        let signer = TokenSigner::new(store.token_secret()?, token_ttl);
        Ok(Self::new(store, stored.revision, Arc::new(lexicon), signer))
    }

    pub fn store(&self) -> &dyn Datastore {
        self.0.store.as_ref()
    }

    /// The current lexicon snapshot. A newer stored revision replaces the
    /// snapshot; if it cannot be loaded the old one keeps serving.
    pub fn lexicon(&self) -> Arc<Lexicon> {
        let (rev, lex) = self.0.lexicon.read().expect("lexicon lock").clone();
        let Ok(Some(latest)) = self.0.store.lexicon_revision() else {
            return lex;
        };
        if latest == rev {
            return lex;
        }
        match self.0.store.load_lexicon() {
            Ok(Some(stored)) => match load_lexicon(&stored) {
                Ok(fresh) => {
                    let fresh = Arc::new(fresh);
                    let mut slot = self.0.lexicon.write().expect("lexicon lock");
                    if slot.0 < stored.revision {
                        *slot = (stored.revision, fresh.clone());
                    }
                    slot.1.clone()
                }
                Err(e) => {
                    tracing::warn!(revision = stored.revision, error = %e, "ignoring unusable lexicon");
                    lex
                }
            },
            _ => lex,
        }
    }

    pub fn signer(&self) -> &TokenSigner {
        &self.0.signer
    }
}

/// Rebuilds a lexicon from its stored text form. Words that fail
/// validation are an error here: ingestion already filtered them.
pub fn load_lexicon(stored: &store::StoredLexicon) -> Result<Lexicon, String> {
    let categories = CategoryRegistry::from_json(&stored.categories_json, &Inventory::arpabet())
        .map_err(|e| e.to_string())?;
    let patterns = PatternRegistry::from_json(&stored.patterns_json).map_err(|e| e.to_string())?;
    let ingested = Lexicon::ingest(stored.words_jsonl.as_bytes(), categories, patterns)
        .map_err(|e| e.to_string())?;
    if let Some((line, v)) = ingested.rejected.first() {
        return Err(format!("line {line}: {v:?}"));
    }
    Ok(ingested.lexicon)
}

/// Serves until ctrl-c.
pub async fn serve(listener: TcpListener, state: AppState) -> std::io::Result<()> {
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
