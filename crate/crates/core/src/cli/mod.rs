//! Command-line experiment runner: `run`, `validate` and `replay`.

pub mod config;
pub mod experiments;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use config::{Experiment, ExperimentConfig};
pub use experiments::{OutputFile, Progress};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Library(#[from] crate::error::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("replay mismatch: {0}")]
    Mismatch(String),
}

impl CliError {
    /// 0 success, 1 replay mismatch or I/O failure, 2 usage, 3 numerical guard.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Library(e) if e.is_numerical() => 3,
            CliError::Library(_) => 2,
            CliError::Io(_) | CliError::Mismatch(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qvdp", version, about = "Quantum van der Pol oscillators under repeated measurement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an experiment and write its outputs and manifest.
    Run {
        experiment: String,
        #[command(flatten)]
        opts: ConfigOpts,
        /// Worker threads (does not change results).
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, short)]
        quiet: bool,
    },
    /// Check a configuration without running it.
    Validate {
        experiment: String,
        #[command(flatten)]
        opts: ConfigOpts,
    },
    /// Re-run a manifest and compare output digests.
    Replay {
        manifest: PathBuf,
        /// Directory for the re-run outputs (default: `<manifest dir>/replay`).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, short)]
        quiet: bool,
    },
    /// List the accepted keys of an experiment.
    Keys { experiment: String },
}

#[derive(Debug, Args)]
struct ConfigOpts {
    /// TOML file with flat `key = value` entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key (`key=value`, TOML syntax); repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory (same as `--set out_dir=...`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Start from the published trajectory counts.
    #[arg(long)]
    paper_scale: bool,
}

impl ConfigOpts {
    /// Defaults, then paper scale, then file, then flags.
    fn resolve(&self, experiment: &str) -> Result<ExperimentConfig, CliError> {
        let e: Experiment = experiment.parse()?;
        let mut cfg = ExperimentConfig::defaults(e, self.paper_scale);
        if let Some(path) = &self.config {
            cfg.merge_file(path)?;
        }
        for a in &self.set {
            cfg.set_assignment(a)?;
        }
        if let Some(out) = &self.out {
            cfg.set_toml("out_dir", &toml::Value::String(out.display().to_string()))?;
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputDigest {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: String,
    pub version: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub wall_time_s: f64,
    pub workers: usize,
    pub outputs: Vec<OutputDigest>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read manifest {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("invalid manifest {}: {e}", path.display())))
    }

    pub fn resolved_config(&self) -> Result<ExperimentConfig, CliError> {
        ExperimentConfig::from_json(self.experiment.parse()?, &self.config)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Write through a temporary sibling and rename into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp"));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match workers {
        None => Ok(f()),
        Some(0) => Err(CliError::Usage("--workers must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Usage(format!("cannot start {n} workers: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Run a resolved configuration, writing outputs then the manifest into `out_dir`.
pub fn run_config(cfg: &ExperimentConfig, workers: Option<usize>, progress: Progress) -> Result<RunManifest, CliError> {
    let (bad, _) = experiments::check(cfg);
    if let Some(first) = bad.first() {
        return Err(CliError::Usage(first.clone()));
    }
    let out_dir = PathBuf::from(cfg.str("out_dir"));
    let start = Instant::now();
    let (files, n_workers) = with_workers(workers, || {
        (experiments::run(cfg, progress), rayon::current_num_threads())
    })?;
    let files = files?;
    let wall = start.elapsed().as_secs_f64();
    fs::create_dir_all(&out_dir)?;
    let mut outputs = Vec::with_capacity(files.len());
    for f in &files {
        write_atomic(&out_dir.join(&f.name), &f.bytes)?;
        outputs.push(OutputDigest { path: f.name.clone(), bytes: f.bytes.len() as u64, sha256: sha256_hex(&f.bytes) });
    }
    let manifest = RunManifest {
        experiment: cfg.experiment.name().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.u64("seed"),
        config: cfg.to_json(),
        wall_time_s: wall,
        workers: n_workers,
        outputs,
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest).expect("serializable");
    bytes.push(b'\n');
    write_atomic(&out_dir.join(MANIFEST_NAME), &bytes)?;
    progress.line(format!("wrote {} files to {} in {wall:.1} s", files.len(), out_dir.display()));
    Ok(manifest)
}

/// Re-run `manifest` into `out_dir` and compare digests file by file.
pub fn replay(manifest: &RunManifest, out_dir: &Path, workers: Option<usize>, progress: Progress) -> Result<RunManifest, CliError> {
    let mut cfg = manifest.resolved_config()?;
    cfg.set_toml("out_dir", &toml::Value::String(out_dir.display().to_string()))?;
    let again = run_config(&cfg, workers, progress)?;
    let mut diffs = Vec::new();
    for old in &manifest.outputs {
        match again.outputs.iter().find(|o| o.path == old.path) {
            Some(new) if new.sha256 == old.sha256 => {}
            Some(_) => diffs.push(format!("{} differs", old.path)),
            None => diffs.push(format!("{} missing", old.path)),
        }
    }
    for new in &again.outputs {
        if !manifest.outputs.iter().any(|o| o.path == new.path) {
            diffs.push(format!("{} is new", new.path));
        }
    }
    if diffs.is_empty() {
        Ok(again)
    } else {
        Err(CliError::Mismatch(diffs.join(", ")))
    }
}

/// Dry-run report; `Ok(true)` when no violation was found.
pub fn validate(cfg: &ExperimentConfig, w: &mut impl Write) -> std::io::Result<bool> {
    let (bad, info) = experiments::check(cfg);
    writeln!(w, "experiment: {}", cfg.experiment)?;
    for l in &info {
        writeln!(w, "  {l}")?;
    }
    for b in &bad {
        writeln!(w, "  violation: {b}")?;
    }
    writeln!(w, "{}", if bad.is_empty() { "ok" } else { "invalid" })?;
    Ok(bad.is_empty())
}

/// Parse `args` and execute; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Run { experiment, opts, workers, quiet } => {
            let cfg = opts.resolve(&experiment)?;
            run_config(&cfg, workers, Progress { quiet })?;
            Ok(0)
        }
        Command::Validate { experiment, opts } => {
            let cfg = opts.resolve(&experiment)?;
            let ok = validate(&cfg, &mut std::io::stdout().lock())?;
            Ok(if ok { 0 } else { 2 })
        }
        Command::Replay { manifest, out, workers, quiet } => {
            let m = RunManifest::load(&manifest)?;
            let out = out.unwrap_or_else(|| manifest.parent().unwrap_or(Path::new(".")).join("replay"));
            replay(&m, &out, workers, Progress { quiet })?;
            println!("replay matches: {} outputs", m.outputs.len());
            Ok(0)
        }
        Command::Keys { experiment } => {
            let e: Experiment = experiment.parse()?;
            for (k, default, help) in ExperimentConfig::describe(e) {
                println!("{k:<14} {default:<24} {help}");
            }
            Ok(0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_are_distinct() {
        use crate::error::Error;
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
        assert_eq!(CliError::from(Error::Truncation("x".into())).exit_code(), 3);
        assert_eq!(CliError::from(Error::Argument("x".into())).exit_code(), 2);
        assert_eq!(CliError::Mismatch("x".into()).exit_code(), 1);
    }

    #[test]
    fn unknown_experiment_is_usage() {
        assert_eq!(main_with_args(["qvdp", "run", "fig9", "-q"]), 2);
        assert_eq!(main_with_args(["qvdp", "validate", "wigner-panels", "--set", "nope=1"]), 2);
        assert_eq!(main_with_args(["qvdp", "frobnicate"]), 2);
    }

    #[test]
    fn atomic_write_leaves_no_temp() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        write_atomic(&p, b"x,y\n").unwrap();
        write_atomic(&p, b"x,y\n1,2\n").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"x,y\n1,2\n");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn digest_is_sha256() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
