#![allow(dead_code)]

use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output, Stdio};
use std::sync::mpsc;
use std::time::Duration;

pub fn wordify() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wordify"))
}

pub fn run(args: &[&str]) -> Output {
    wordify().args(args).output().expect("wordify runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn seed_file() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/seed_lexicon.jsonl")
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

/// Ingests the seed lexicon (with audio) into `dir/store.db` and registers
/// a teacher `tara` (u-1) with students `sam` (u-2) and `sue` (u-3).
/// Credentials are `<name>-pw`.
pub fn seeded_store(dir: &Path) -> PathBuf {
    let store = dir.join("store.db");
    let s = path_str(&store);
    let o = run(&["ingest", path_str(&seed_file()), "--out", s]);
    assert!(o.status.success(), "{}", stderr(&o));
    for (name, role, extra) in [
        ("tara", "teacher", ["--school", "s1"]),
        ("sam", "student", ["--teacher", "u-1"]),
        ("sue", "student", ["--teacher", "u-1"]),
    ] {
        let cred = format!("{name}-pw");
        let mut args = vec!["user", "add", "--store", s, "--name", name, "--role", role, "--credential", &cred];
        args.extend(extra);
        let o = run(&args);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    store
}

/// A running `wordify serve` process, killed on drop.
pub struct Server {
    child: Child,
    pub base: String,
}

impl Server {
    pub fn start(store: &Path) -> Server {
        let mut child = wordify()
            .args(["serve", "--store", path_str(store), "--listen", "127.0.0.1:0"])
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .expect("serve starts");
        let out = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            let mut lines = BufReader::new(out).lines();
            if let Some(Ok(first)) = lines.next() {
                let _ = tx.send(first);
            }
            // keep draining the request log so the server never blocks
            for _ in lines {}
        });
        let first = rx
            .recv_timeout(Duration::from_secs(20))
            .expect("server announces its address");
        let addr = first.strip_prefix("listening on ").expect("listening line").to_string();
        Server {
            child,
            base: format!("http://{addr}"),
        }
    }

    pub fn url(&self, path: &str) -> String {
        format!("{}{}", self.base, path)
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
