//! Commands behind the `wordify` binary.
//!
//! Exit codes: 0 success, 1 validation or simulation failure, 2 environment
//! or I/O failure.

pub mod simulate;

use std::fs;
use std::io::{BufReader, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;
use wordify_core::lexicon::{
    consistency_report, seed, CategoryRegistry, ConsistencyReport, Inventory, PatternRegistry,
    WordFilter,
};
use wordify_core::roster::CreateUser;
use wordify_core::Lexicon;
use wordify_service::store::AudioAsset;
use wordify_service::{AppState, Datastore, SqliteStore, StartupError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Environment(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Environment(_) => 2,
        }
    }
}

fn env_err(e: impl std::fmt::Display) -> CliError {
    CliError::Environment(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "wordify", version, about = "Wordification lexicon and game tooling")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a line-delimited lexicon file and load it into a store.
    Ingest(IngestArgs),
    /// Print the sound/spelling consistency report of a store's lexicon.
    Report {
        store: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// List words matching a grade, sound category and/or spelling pattern.
    Query {
        store: PathBuf,
        #[arg(long)]
        grade: Option<u8>,
        #[arg(long)]
        category: Option<String>,
        #[arg(long)]
        pattern: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Play a game headlessly from a JSON script.
    Simulate(SimulateArgs),
    /// Run the HTTP API.
    Serve(ServeArgs),
    /// Manage users.
    #[command(subcommand)]
    User(UserCommand),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    pub file: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Sound category registry (JSON); defaults to the built-in one.
    #[arg(long)]
    pub categories: Option<PathBuf>,
    /// Spelling pattern registry (JSON); defaults to the built-in one.
    #[arg(long)]
    pub patterns: Option<PathBuf>,
    /// Directory holding the audio files named by the records; defaults to
    /// `audio/` next to the lexicon file when present.
    #[arg(long)]
    pub audio_dir: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub script: PathBuf,
    #[arg(long)]
    pub store: PathBuf,
    /// Play the script this many times, reseeding each run, and print one
    /// summary line per run.
    #[arg(long)]
    pub runs: Option<usize>,
    /// Seed of the first batch run.
    #[arg(long, default_value_t = 0)]
    pub first_seed: u64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "WORDIFY_STORE")]
    pub store: PathBuf,
    #[arg(long, env = "WORDIFY_LISTEN", default_value = "127.0.0.1:8080")]
    pub listen: SocketAddr,
    /// Ingest this lexicon file into the store before serving.
    #[arg(long, env = "WORDIFY_LEXICON")]
    pub lexicon: Option<PathBuf>,
    #[arg(long, env = "WORDIFY_CATEGORIES")]
    pub categories: Option<PathBuf>,
    #[arg(long, env = "WORDIFY_PATTERNS")]
    pub patterns: Option<PathBuf>,
    /// Token lifetime in minutes.
    #[arg(long, env = "WORDIFY_TOKEN_TTL", default_value_t = 60)]
    pub token_ttl: i64,
}

#[derive(Debug, Subcommand)]
pub enum UserCommand {
    /// Register a user directly in the store (no authorization check).
    Add {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        name: String,
        #[arg(long)]
        role: String,
        #[arg(long, env = "WORDIFY_CREDENTIAL")]
        credential: String,
        #[arg(long)]
        teacher: Option<String>,
        #[arg(long)]
        school: Option<String>,
    },
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Ingest(args) => ingest(&args, out),
        Command::Report { store, json } => report(&store, json, out),
        Command::Query {
            store,
            grade,
            category,
            pattern,
            json,
        } => query(&store, WordFilter { grade, category, pattern }, json, out),
        Command::Simulate(args) => simulate(&args, out),
        Command::Serve(args) => serve(&args, out),
        Command::User(UserCommand::Add {
            store,
            name,
            role,
            credential,
            teacher,
            school,
        }) => {
            let store = open_store(&store)?;
            let req = CreateUser {
                name,
                role,
                credential,
                teacher_id: teacher.map(wordify_core::roster::UserId::new),
                school_id: school,
            };
            let user = store
                .create_user(&mut |r| r.create_user(req.clone()))
                .map_err(|e| CliError::Invalid(e.to_string()))?;
            writeln!(out, "{}", serde_json::to_string(&user).expect("json")).map_err(env_err)
        }
    }
}

fn open_store(path: &Path) -> Result<SqliteStore, CliError> {
    SqliteStore::open(path).map_err(|e| env_err(format!("{}: {e}", path.display())))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| env_err(format!("{}: {e}", path.display())))
}

fn registries(
    categories: Option<&Path>,
    patterns: Option<&Path>,
) -> Result<(String, String, CategoryRegistry, PatternRegistry), CliError> {
    let cat_text = match categories {
        Some(p) => read_text(p)?,
        None => seed::CATEGORIES_JSON.to_string(),
    };
    let pat_text = match patterns {
        Some(p) => read_text(p)?,
        None => seed::PATTERNS_JSON.to_string(),
    };
    let cats = CategoryRegistry::from_json(&cat_text, &Inventory::arpabet())
        .map_err(|e| CliError::Invalid(format!("category registry: {e}")))?;
    let pats = PatternRegistry::from_json(&pat_text)
        .map_err(|e| CliError::Invalid(format!("pattern registry: {e}")))?;
    Ok((cat_text, pat_text, cats, pats))
}

fn media_type(path: &Path) -> &'static str {
    match path.extension().and_then(|e| e.to_str()) {
        Some("wav") => "audio/wav",
        Some("mp3") => "audio/mpeg",
        Some("ogg") => "audio/ogg",
        _ => "application/octet-stream",
    }
}

/// Validates `file` and, if every record is valid, stores the lexicon and
/// its audio. Returns the number of words stored.
fn load_into_store(
    store: &dyn Datastore,
    file: &Path,
    categories: Option<&Path>,
    patterns: Option<&Path>,
    audio_dir: Option<&Path>,
    out: &mut dyn Write,
) -> Result<usize, CliError> {
    let (cat_text, pat_text, cats, pats) = registries(categories, patterns)?;
    let reader = fs::File::open(file)
        .map(BufReader::new)
        .map_err(|e| env_err(format!("{}: {e}", file.display())))?;
    let ingested = Lexicon::ingest(reader, cats, pats).map_err(|e| match e {
        wordify_core::LexiconError::UnreadableStream(io) => env_err(format!("{}: {io}", file.display())),
        other => CliError::Invalid(other.to_string()),
    })?;
    if !ingested.rejected.is_empty() {
        let _ = writeln!(out, "{:>6}  {:<24}  detail", "line", "violation");
        for (line, v) in &ingested.rejected {
            let kind = serde_json::to_value(v).expect("json")["kind"]
                .as_str()
                .unwrap_or_default()
                .to_string();
            let _ = writeln!(out, "{line:>6}  {kind:<24}  {v}");
        }
        return Err(CliError::Invalid(format!(
            "{} violation(s); nothing stored",
            ingested.rejected.len()
        )));
    }
    let lex = ingested.lexicon;
    store
        .save_lexicon(&lex.to_jsonl(), &cat_text, &pat_text)
        .map_err(env_err)?;

    let default_dir = file.parent().map(|p| p.join("audio"));
    let audio_dir = audio_dir.map(Path::to_path_buf).or(default_dir.filter(|d| d.is_dir()));
    if let Some(dir) = audio_dir {
        let mut missing = Vec::new();
        for key in lex.words().filter_map(|w| w.audio.as_deref()) {
            let path = dir.join(key);
            match fs::read(&path) {
                Ok(bytes) => store
                    .put_audio(
                        key,
                        &AudioAsset {
                            media_type: media_type(&path).into(),
                            bytes,
                        },
                    )
                    .map_err(env_err)?,
                Err(_) => missing.push(key),
            }
        }
        if !missing.is_empty() {
            let _ = writeln!(out, "warning: no audio file for {}", missing.join(", "));
        }
    }
    Ok(lex.len())
}

fn ingest(args: &IngestArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if !args.file.is_file() {
        return Err(env_err(format!("{}: no such file", args.file.display())));
    }
    let store = SqliteStore::create(&args.out).map_err(|e| env_err(format!("{}: {e}", args.out.display())))?;
    let loaded = load_into_store(
        &store,
        &args.file,
        args.categories.as_deref(),
        args.patterns.as_deref(),
        args.audio_dir.as_deref(),
        out,
    )?;
    if args.json {
        writeln!(out, "{}", serde_json::json!({ "words_loaded": loaded, "violations": [] }))
    } else {
        writeln!(out, "{loaded} words loaded")
    }
    .map_err(env_err)
}

/// The store's current lexicon, or an empty one if nothing was ingested.
fn stored_lexicon(store: &SqliteStore) -> Result<Lexicon, CliError> {
    match store.load_lexicon().map_err(env_err)? {
        Some(stored) => wordify_service::load_lexicon(&stored).map_err(CliError::Invalid),
        None => Ok(Lexicon::default()),
    }
}

fn phonemes(ps: &[impl std::fmt::Display]) -> String {
    format!("[{}]", ps.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" "))
}

fn write_report(r: &ConsistencyReport, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "grapheme -> phonemes")?;
    for (g, set) in &r.grapheme_to_phonemes {
        let all: Vec<String> = set.iter().map(|ps| phonemes(ps)).collect();
        writeln!(out, "  {g:<6} {}", all.join(" "))?;
    }
    writeln!(out, "phoneme -> graphemes")?;
    for (p, set) in &r.phoneme_to_graphemes {
        writeln!(out, "  {:<6} {}", p.to_string(), set.iter().cloned().collect::<Vec<_>>().join(" "))?;
    }
    let w = &r.witnesses;
    writeln!(out, "(i) graphemes with several sounds: {}", w.ambiguous_graphemes.join(" "))?;
    writeln!(
        out,
        "(ii) sounds with several spellings: {}",
        w.variant_spellings.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" ")
    )?;
    writeln!(out, "(iii) units spelling several sounds:")?;
    for u in &w.multi_sound_units {
        writeln!(out, "  {} {} {}", u.word, u.grapheme, phonemes(&u.phonemes))?;
    }
    writeln!(out, "(iv) units of several letters:")?;
    for u in &w.multi_letter_units {
        writeln!(out, "  {} {} {}", u.word, u.grapheme, phonemes(&u.phonemes))?;
    }
    Ok(())
}

fn report(store: &Path, json: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let lex = stored_lexicon(&open_store(store)?)?;
    let r = consistency_report(&lex);
    if json {
        writeln!(out, "{}", serde_json::to_string_pretty(&r).expect("json"))
    } else {
        write_report(&r, out)
    }
    .map_err(env_err)
}

fn query(store: &Path, filter: WordFilter, json: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let lex = stored_lexicon(&open_store(store)?)?;
    let ids = lex.query(&filter).map_err(|e| CliError::Invalid(e.to_string()))?;
    if json {
        writeln!(out, "{}", serde_json::to_string(&ids).expect("json")).map_err(env_err)
    } else {
        for id in ids {
            let w = lex.word(&id).expect("queried id exists");
            writeln!(out, "{}\t{}\tgrade {}", id, w.spelling, w.grade).map_err(env_err)?;
        }
        Ok(())
    }
}

fn simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let script: simulate::SimScript = serde_json::from_str(&read_text(&args.script)?)
        .map_err(|e| CliError::Invalid(format!("{}: {e}", args.script.display())))?;
    let store = open_store(&args.store)?;
    let lex = match store.load_lexicon().map_err(env_err)? {
        Some(stored) => wordify_service::load_lexicon(&stored).map_err(CliError::Invalid)?,
        None => return Err(env_err("store holds no lexicon; run `wordify ingest` first")),
    };
    let sim_err = |e: simulate::SimError| CliError::Invalid(e.to_string());
    if let Some(runs) = args.runs {
        for s in simulate::run_batch(&script, &lex, runs, args.first_seed).map_err(sim_err)? {
            if args.json {
                writeln!(out, "{}", serde_json::to_string(&s).expect("json"))
            } else {
                writeln!(
                    out,
                    "run {} seed {}: {} steps, {} correct, {} incorrect, finished={} {}",
                    s.run, s.seed, s.steps, s.correct, s.incorrect, s.finished, s.digest
                )
            }
            .map_err(env_err)?;
        }
        return Ok(());
    }
    let report = simulate::run(&script, &lex).map_err(sim_err)?;
    if args.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("json")).map_err(env_err)
    } else {
        let s = simulate::summarize(0, 0, &report);
        writeln!(
            out,
            "{} game: {} steps, {} events ({} correct, {} incorrect), finished={}",
            s.kind, s.steps, s.events, s.correct, s.incorrect, s.finished
        )
        .map_err(env_err)?;
        for ev in &report.events {
            writeln!(out, "  {}", serde_json::to_string(ev).expect("json")).map_err(env_err)?;
        }
        Ok(())
    }
}

fn serve(args: &ServeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let store = Arc::new(open_store(&args.store)?);
    if let Some(file) = &args.lexicon {
        load_into_store(
            store.as_ref(),
            file,
            args.categories.as_deref(),
            args.patterns.as_deref(),
            None,
            out,
        )?;
    }
    let state = AppState::from_store(store, chrono::Duration::minutes(args.token_ttl)).map_err(|e| match e {
        StartupError::Lexicon(m) => CliError::Invalid(m),
        other => env_err(other),
    })?;
    tracing_subscriber::fmt()
        .json()
        .with_writer(std::io::stdout)
        .try_init()
        .ok();
    let rt = tokio::runtime::Runtime::new().map_err(env_err)?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind(args.listen).await.map_err(env_err)?;
        let addr = listener.local_addr().map_err(env_err)?;
        writeln!(out, "listening on {addr}").map_err(env_err)?;
        out.flush().map_err(env_err)?;
        wordify_service::serve(listener, state).await.map_err(env_err)
    })
}
