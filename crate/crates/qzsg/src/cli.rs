//! Experiment driver behind the `qzsg` binary.
//!
//! A run is described by a JSON [`RunConfig`]: a game (inline or by path),
//! exactly one mode block, an output directory and optionally a reference
//! equilibrium. Every run writes plot-ready CSV artifacts, a `summary.json`
//! and a [`RunManifest`] recording the canonical config hash and the seeds,
//! so identical configs reproduce byte-identical data files.
//!
//! Exit-code contract of the binary: 0 success, 2 validation failure
//! (unparseable config, non-Hermitian game, bad parameters, unusable
//! reference), 3 numerical failure at run time.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::AnalysisError;
use crate::game::{
    cmatrix_to_rows, embed_classical_diagonal, embed_unitary, matching_pennies_payoff,
    multi_qubit_interior_game, random_unitary, GameError, GameSpec, NashCertificate,
    PayoffObservable, Provenance,
};
use crate::linalg::{herm_eig, random_density, LinalgError};
use crate::mmwu::{self, MmwuConfig, MmwuError};
use crate::replicator::{self, ReplicatorConfig, ReplicatorError};

/// Offset used to derive Bob's seed from a sweep seed.
const SIGMA_SEED_OFFSET: u64 = 0x9E37_79B9_7F4A_7C15;

/// Failures split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Exit code 2: the inputs cannot be run.
    Validation(String),
    /// Exit code 3: the run itself failed numerically.
    Numerical(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(msg) => write!(f, "validation error: {msg}"),
            CliError::Numerical(msg) => write!(f, "numerical error: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    fn validation(err: impl std::fmt::Display) -> Self {
        CliError::Validation(err.to_string())
    }

    fn numerical(err: impl std::fmt::Display) -> Self {
        CliError::Numerical(err.to_string())
    }
}

impl From<GameError> for CliError {
    fn from(err: GameError) -> Self {
        CliError::validation(err)
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::validation(err)
    }
}

impl From<MmwuError> for CliError {
    fn from(err: MmwuError) -> Self {
        match err {
            MmwuError::BadConfig(_) | MmwuError::SubsampledTrajectory(_) | MmwuError::Game(_) => {
                CliError::validation(err)
            }
            MmwuError::Analysis(AnalysisError::ReferenceNotFullyMixed { .. }) => {
                CliError::validation(err)
            }
            MmwuError::Linalg(_) | MmwuError::Analysis(_) => CliError::numerical(err),
        }
    }
}

impl From<ReplicatorError> for CliError {
    fn from(err: ReplicatorError) -> Self {
        match err {
            ReplicatorError::BadConfig(_)
            | ReplicatorError::InvalidSimplex(_)
            | ReplicatorError::Game(_) => CliError::validation(err),
            ReplicatorError::Analysis(AnalysisError::ReferenceNotFullyMixed { .. }) => {
                CliError::validation(err)
            }
            ReplicatorError::Linalg(LinalgError::NotPositiveDefinite { .. }) => {
                CliError::numerical(err)
            }
            ReplicatorError::Linalg(_) | ReplicatorError::Analysis(_) => CliError::numerical(err),
        }
    }
}

/// A game given inline or as a path to a GameSpec JSON file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GameRef {
    Path(PathBuf),
    Inline(GameSpec),
}

impl GameRef {
    fn load(&self) -> Result<(GameSpec, PayoffObservable), CliError> {
        let spec = match self {
            GameRef::Path(path) => GameSpec::load(path)?,
            GameRef::Inline(spec) => spec.clone(),
        };
        let game = spec.to_observable()?;
        Ok((spec, game))
    }
}

/// Reference equilibrium for entropy tracking.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceSpec {
    /// Load a saved certificate (for games with a known equilibrium).
    Analytic(PathBuf),
    /// Compute an ε-approximate equilibrium with MMWU defaults.
    Mmwu(f64),
}

/// Game-generation request.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GameKind {
    MatchingPennies,
    /// Diagonal embedding of a classical payoff matrix read from a JSON
    /// file containing an array of rows of reals.
    Diagonal { p_file: PathBuf },
    /// Unitary embedding; V and W come from `seed` and `seed + 1`.
    Unitary { p_file: PathBuf, seed: u64 },
    MultiQubit { qubits: u32, seed: u64 },
}

/// Replicator run block: integration settings plus artifact switches.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplicatorMode {
    #[serde(flatten)]
    pub config: ReplicatorConfig,
    /// Also write a JSON-lines sidecar with the full state matrices.
    #[serde(default)]
    pub dump_states: bool,
    #[serde(default = "default_return_frac")]
    pub return_frac: f64,
}

/// Recurrence-sweep block: one trajectory per seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepMode {
    pub replicator: ReplicatorConfig,
    pub seeds: Vec<u64>,
    #[serde(default = "default_return_frac")]
    pub return_frac: f64,
}

fn default_return_frac() -> f64 {
    0.1
}

/// Exactly one mode block per run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Mmwu(MmwuConfig),
    Replicator(ReplicatorMode),
    FindNash { epsilon: f64 },
    RecurrenceSweep(SweepMode),
    GenGame { game: GameKind, out: PathBuf },
    ProbeLimit { mus: Vec<f64>, steps: usize, seed: u64 },
    ProbeDivergence { states: usize, seed: u64, fd_step: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default)]
    pub game: Option<GameRef>,
    pub mode: Mode,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub reference: Option<ReferenceSpec>,
}

/// Reproducibility record written next to every run's artifacts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    /// SHA-256 of the canonicalized (key-sorted, compact) config JSON;
    /// stable across field reordering in the source file.
    pub config_hash: String,
    pub seeds: Vec<u64>,
    pub wall_time_s: f64,
    pub artifact_paths: Vec<PathBuf>,
}

/// Canonical hash of a config value: serde_json maps are key-sorted, so
/// re-serializing compactly canonicalizes field order.
pub fn config_hash(config: &serde_json::Value) -> String {
    let canonical = serde_json::to_string(config).expect("value reserializes");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

fn read_payoff_file(path: &Path) -> Result<Vec<Vec<f64>>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read payoff file {path:?}: {e}")))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("invalid payoff file {path:?}: {e}")))
}

/// Builds a game, writes its GameSpec JSON and prints an eigenvalue summary.
pub fn cmd_gen_game(kind: &GameKind, out: &Path) -> Result<GameSpec, CliError> {
    let spec = match kind {
        GameKind::MatchingPennies => {
            let p = matching_pennies_payoff();
            let game = embed_classical_diagonal(&p)?;
            GameSpec::from_observable(
                "matching-pennies".into(),
                &game,
                Provenance::ClassicalDiagonal { p },
            )
        }
        GameKind::Diagonal { p_file } => {
            let p = read_payoff_file(p_file)?;
            let game = embed_classical_diagonal(&p)?;
            GameSpec::from_observable(
                format!("diagonal-{}", file_stem(p_file)),
                &game,
                Provenance::ClassicalDiagonal { p },
            )
        }
        GameKind::Unitary { p_file, seed } => {
            let p = read_payoff_file(p_file)?;
            let n = p.len();
            let v = random_unitary(n, *seed);
            let w = random_unitary(n, seed.wrapping_add(1));
            let game = embed_unitary(&p, &v, &w)?;
            GameSpec::from_observable(
                format!("unitary-{}-{seed}", file_stem(p_file)),
                &game,
                Provenance::UnitaryEmbedded { p, seed: *seed },
            )
        }
        GameKind::MultiQubit { qubits, seed } => multi_qubit_interior_game(*qubits, *seed)?,
    };
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    spec.save(out)?;

    let game = spec.to_observable()?;
    let eigs = herm_eig(game.observable()).map_err(CliError::numerical)?;
    println!(
        "wrote {} ({}x{} joint space) to {}",
        spec.name,
        spec.dim_a,
        spec.dim_b,
        out.display()
    );
    if eigs.eigenvalues.len() <= 16 {
        println!("eigenvalues: {:?}", eigs.eigenvalues);
    } else {
        println!(
            "eigenvalues: min {:.6}, max {:.6} ({} total)",
            eigs.min(),
            eigs.max(),
            eigs.eigenvalues.len()
        );
    }
    Ok(spec)
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "game".into())
}

fn resolve_reference(
    game: &PayoffObservable,
    spec: &Option<ReferenceSpec>,
) -> Result<Option<NashCertificate>, CliError> {
    match spec {
        None => Ok(None),
        Some(ReferenceSpec::Analytic(path)) => {
            let cert = NashCertificate::load(path)?;
            if cert.rho_star.dim() != game.dim_a() || cert.sigma_star.dim() != game.dim_b() {
                return Err(CliError::Validation(format!(
                    "reference dimensions ({}, {}) do not match game ({}, {})",
                    cert.rho_star.dim(),
                    cert.sigma_star.dim(),
                    game.dim_a(),
                    game.dim_b()
                )));
            }
            Ok(Some(cert))
        }
        Some(ReferenceSpec::Mmwu(epsilon)) => {
            if *epsilon <= 0.0 {
                return Err(CliError::Validation(format!(
                    "reference epsilon must be positive, got {epsilon}"
                )));
            }
            Ok(Some(mmwu::find_nash(game, *epsilon)?))
        }
    }
}

fn require_game(config: &RunConfig) -> Result<(GameSpec, PayoffObservable), CliError> {
    config
        .game
        .as_ref()
        .ok_or_else(|| CliError::Validation("this mode requires a `game`".into()))?
        .load()
}

fn require_reference(
    game: &PayoffObservable,
    config: &RunConfig,
) -> Result<NashCertificate, CliError> {
    resolve_reference(game, &config.reference)?.ok_or_else(|| {
        CliError::Validation("this mode requires a `reference` (analytic path or mmwu epsilon)".into())
    })
}

struct ArtifactWriter {
    dir: PathBuf,
    paths: Vec<PathBuf>,
}

impl ArtifactWriter {
    fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            paths: Vec::new(),
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.paths.push(p.clone());
        p
    }

    fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        let p = self.path(name);
        fs::write(
            &p,
            serde_json::to_string_pretty(value).map_err(CliError::validation)?,
        )?;
        Ok(())
    }

    fn write_csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let p = self.path(name);
        let mut w = csv::Writer::from_path(&p).map_err(CliError::validation)?;
        w.write_record(header).map_err(CliError::validation)?;
        for row in rows {
            w.write_record(row).map_err(CliError::validation)?;
        }
        w.flush().map_err(CliError::validation)?;
        Ok(())
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn certificate_summary(cert: &NashCertificate) -> serde_json::Value {
    serde_json::json!({
        "value": cert.value,
        "exploitability": cert.exploitability,
        "epsilon_target": cert.epsilon_target,
        "min_eig_rho": cert.min_eig_rho,
        "min_eig_sigma": cert.min_eig_sigma,
        "fully_mixed": cert.fully_mixed(),
    })
}

fn replicator_csv_rows(traj: &replicator::Trajectory) -> Vec<Vec<String>> {
    traj.samples
        .iter()
        .map(|s| {
            let (brx, bry, brz) = match s.bloch_rho {
                Some((x, y, z)) => (Some(x), Some(y), Some(z)),
                None => (None, None, None),
            };
            let (bsx, bsy, bsz) = match s.bloch_sigma {
                Some((x, y, z)) => (Some(x), Some(y), Some(z)),
                None => (None, None, None),
            };
            vec![
                fmt_f64(s.t),
                fmt_f64(s.s_rho),
                fmt_f64(s.s_sigma),
                fmt_f64(s.s_total),
                fmt_f64(s.frob_return),
                fmt_f64(s.max_abs_eig_a_prime),
                fmt_f64(s.max_abs_eig_b_prime),
                fmt_opt(brx),
                fmt_opt(bry),
                fmt_opt(brz),
                fmt_opt(bsx),
                fmt_opt(bsy),
                fmt_opt(bsz),
            ]
        })
        .collect()
}

const REPLICATOR_CSV_HEADER: [&str; 13] = [
    "t",
    "s_rho",
    "s_sigma",
    "s_total",
    "frob_return",
    "max_eig_a_prime",
    "max_eig_b_prime",
    "bloch_rho_x",
    "bloch_rho_y",
    "bloch_rho_z",
    "bloch_sigma_x",
    "bloch_sigma_y",
    "bloch_sigma_z",
];

/// Executes a config and writes its artifacts. Returns the manifest, which
/// is also written to `manifest.json` in the output directory.
pub fn cmd_run(config_path: &Path) -> Result<RunManifest, CliError> {
    let started = Instant::now();
    let text = fs::read_to_string(config_path)
        .map_err(|e| CliError::Validation(format!("cannot read config {config_path:?}: {e}")))?;
    let raw: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("config is not valid JSON: {e}")))?;
    let config: RunConfig = serde_json::from_value(raw.clone())
        .map_err(|e| CliError::Validation(format!("config does not match the schema: {e}")))?;

    let mut writer = ArtifactWriter::new(&config.output_dir)?;
    let seeds = execute_mode(&config, &mut writer)?;

    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: config_hash(&raw),
        seeds,
        wall_time_s: started.elapsed().as_secs_f64(),
        artifact_paths: writer.paths.clone(),
    };
    let manifest_path = config.output_dir.join("manifest.json");
    fs::write(
        &manifest_path,
        serde_json::to_string_pretty(&manifest).map_err(CliError::validation)?,
    )?;
    Ok(manifest)
}

/// Runs a recurrence-sweep config; rejects any other mode.
pub fn cmd_recurrence_sweep(config_path: &Path) -> Result<RunManifest, CliError> {
    let text = fs::read_to_string(config_path)
        .map_err(|e| CliError::Validation(format!("cannot read config {config_path:?}: {e}")))?;
    let config: RunConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("config does not match the schema: {e}")))?;
    if !matches!(config.mode, Mode::RecurrenceSweep(_)) {
        return Err(CliError::Validation(
            "sweep requires a `recurrence-sweep` mode block".into(),
        ));
    }
    cmd_run(config_path)
}

fn execute_mode(config: &RunConfig, writer: &mut ArtifactWriter) -> Result<Vec<u64>, CliError> {
    match &config.mode {
        Mode::GenGame { game, out } => {
            let out_path = if out.is_absolute() {
                out.clone()
            } else {
                writer.dir.join(out)
            };
            cmd_gen_game(game, &out_path)?;
            writer.paths.push(out_path);
            let seeds = match game {
                GameKind::Unitary { seed, .. } | GameKind::MultiQubit { seed, .. } => vec![*seed],
                _ => vec![],
            };
            Ok(seeds)
        }
        Mode::Mmwu(cfg) => {
            let (spec, game) = require_game(config)?;
            let reference = resolve_reference(&game, &config.reference)?;
            let (traj, cert) = mmwu::run_mmwu(&game, cfg)?;

            let rows: Vec<Vec<String>> = traj
                .samples
                .iter()
                .map(|s| {
                    vec![
                        s.step.to_string(),
                        fmt_f64(s.mu_applied),
                        fmt_f64(s.log_tr_a),
                        fmt_f64(s.log_tr_b),
                    ]
                })
                .collect();
            writer.write_csv(
                "trajectory.csv",
                &["step", "mu", "log_tr_a", "log_tr_b"],
                &rows,
            )?;

            let mut ledger_rows = None;
            if let Some(reference) = &reference {
                if traj.record_every == 1 {
                    let rows = mmwu::entropy_ledger(&game, &traj, reference)?;
                    let csv_rows: Vec<Vec<String>> = rows
                        .iter()
                        .map(|r| {
                            vec![
                                r.step.to_string(),
                                fmt_f64(r.delta_s_rho),
                                fmt_f64(r.delta_s_sigma),
                                fmt_f64(r.log_ratio_a),
                                fmt_f64(r.log_ratio_b),
                                fmt_f64(r.lower_bound),
                                fmt_f64(r.upper_bound),
                            ]
                        })
                        .collect();
                    writer.write_csv(
                        "ledger.csv",
                        &[
                            "step",
                            "delta_s_rho",
                            "delta_s_sigma",
                            "log_ratio_a",
                            "log_ratio_b",
                            "lower_bound",
                            "upper_bound",
                        ],
                        &csv_rows,
                    )?;
                    ledger_rows = Some(rows.len());
                }
            }

            writer.write_json(
                "summary.json",
                &serde_json::json!({
                    "game": spec.name,
                    "mode": "mmwu",
                    "iterations": traj.samples.last().map(|s| s.step).unwrap_or(0),
                    "certificate": certificate_summary(&cert),
                    "ledger_rows": ledger_rows,
                }),
            )?;
            let nash_path = writer.path("nash.json");
            cert.save(&nash_path)?;
            Ok(vec![cfg.seed_rho0, cfg.seed_sigma0])
        }
        Mode::FindNash { epsilon } => {
            let (spec, game) = require_game(config)?;
            if *epsilon <= 0.0 {
                return Err(CliError::Validation(format!(
                    "epsilon must be positive, got {epsilon}"
                )));
            }
            let cert = mmwu::find_nash(&game, *epsilon)?;
            let nash_path = writer.path("nash.json");
            cert.save(&nash_path)?;
            writer.write_json(
                "summary.json",
                &serde_json::json!({
                    "game": spec.name,
                    "mode": "find-nash",
                    "certificate": certificate_summary(&cert),
                }),
            )?;
            Ok(vec![])
        }
        Mode::Replicator(mode) => {
            let (spec, game) = require_game(config)?;
            let reference = require_reference(&game, config)?;
            let traj = replicator::integrate(&game, &mode.config, &reference)?;

            writer.write_csv(
                "trajectory.csv",
                &REPLICATOR_CSV_HEADER,
                &replicator_csv_rows(&traj),
            )?;
            if mode.dump_states {
                let path = writer.path("states.jsonl");
                let mut f = fs::File::create(&path)?;
                for s in &traj.samples {
                    let line = serde_json::json!({
                        "t": s.t,
                        "rho": cmatrix_to_rows(s.rho.matrix()),
                        "sigma": cmatrix_to_rows(s.sigma.matrix()),
                    });
                    writeln!(f, "{line}")?;
                }
            }

            let conservation = traj.conservation(&reference).map_err(CliError::numerical)?;
            let recurrence = if traj.samples.len() >= 3 {
                Some(traj.recurrence(mode.return_frac))
            } else {
                None
            };
            writer.write_json(
                "summary.json",
                &serde_json::json!({
                    "game": spec.name,
                    "mode": "replicator",
                    "samples": traj.samples.len(),
                    "conservation": conservation,
                    "recurrence": recurrence,
                    "reference": certificate_summary(&reference),
                }),
            )?;
            Ok(vec![mode.config.seed_rho0, mode.config.seed_sigma0])
        }
        Mode::RecurrenceSweep(mode) => {
            let (spec, game) = require_game(config)?;
            let reference = require_reference(&game, config)?;
            if mode.seeds.is_empty() {
                return Err(CliError::Validation("sweep needs at least one seed".into()));
            }
            let steps = (mode.replicator.t_end / mode.replicator.step_h).round() as usize;
            if steps / mode.replicator.record_every.max(1) + 1 < 3 {
                return Err(CliError::Validation(
                    "sweep trajectories need at least 3 recorded samples".into(),
                ));
            }

            let pool = thread_pool()?;
            let reports: Vec<Result<crate::analysis::RecurrenceReport, ReplicatorError>> = pool
                .install(|| {
                    use rayon::prelude::*;
                    mode.seeds
                        .par_iter()
                        .map(|&seed| {
                            let cfg = ReplicatorConfig {
                                seed_rho0: seed,
                                seed_sigma0: seed.wrapping_add(SIGMA_SEED_OFFSET),
                                ..mode.replicator.clone()
                            };
                            replicator::integrate(&game, &cfg, &reference)
                                .map(|traj| traj.recurrence(mode.return_frac))
                        })
                        .collect()
                });

            let mut rows = Vec::with_capacity(mode.seeds.len());
            let mut recurred = 0usize;
            let mut reports_json = Vec::new();
            for (seed, report) in mode.seeds.iter().zip(reports) {
                let report = report.map_err(CliError::from)?;
                if report.recurred {
                    recurred += 1;
                }
                rows.push(vec![
                    seed.to_string(),
                    fmt_opt(report.t_return),
                    fmt_f64(report.max_excursion),
                ]);
                reports_json.push(serde_json::json!({ "seed": seed, "report": report }));
            }
            writer.write_csv("sweep.csv", &["seed", "t_return", "max_excursion"], &rows)?;
            writer.write_json(
                "summary.json",
                &serde_json::json!({
                    "game": spec.name,
                    "mode": "recurrence-sweep",
                    "seeds": mode.seeds,
                    "recurrence_fraction": recurred as f64 / mode.seeds.len() as f64,
                    "reports": reports_json,
                }),
            )?;
            Ok(mode.seeds.clone())
        }
        Mode::ProbeLimit { mus, steps, seed } => {
            let (spec, game) = require_game(config)?;
            if mus.is_empty() || mus.windows(2).any(|w| w[0] <= w[1]) || mus.iter().any(|&m| m <= 0.0)
            {
                return Err(CliError::Validation(
                    "probe-limit needs strictly decreasing positive step sizes".into(),
                ));
            }
            let out = mmwu::vanishing_limit_probe(&game, mus, *steps, mmwu::Init::Random, *seed);
            let rows: Vec<Vec<String>> = out
                .iter()
                .map(|&(mu, v)| vec![fmt_f64(mu), fmt_f64(v)])
                .collect();
            writer.write_csv("probe.csv", &["mu", "max_abs_ds_total_over_mu"], &rows)?;
            writer.write_json(
                "summary.json",
                &serde_json::json!({
                    "game": spec.name,
                    "mode": "probe-limit",
                    "steps": steps,
                    "points": out.iter().map(|&(mu, v)| serde_json::json!({"mu": mu, "ratio": v})).collect::<Vec<_>>(),
                }),
            )?;
            Ok(vec![*seed])
        }
        Mode::ProbeDivergence { states, seed, fd_step } => {
            let (spec, game) = require_game(config)?;
            if *states == 0 || *fd_step <= 0.0 {
                return Err(CliError::Validation(
                    "probe-divergence needs states >= 1 and a positive fd_step".into(),
                ));
            }
            let mut rows = Vec::with_capacity(*states);
            let mut max_abs: f64 = 0.0;
            for i in 0..*states {
                let base = seed.wrapping_add(2 * i as u64);
                let rho = random_density(game.dim_a(), base);
                let sigma = random_density(game.dim_b(), base.wrapping_add(1));
                let state = replicator::DualState {
                    t: 0.0,
                    a: replicator::diffeo_inverse(&rho).map_err(CliError::from)?,
                    b: replicator::diffeo_inverse(&sigma).map_err(CliError::from)?,
                };
                let div = replicator::divergence_probe(&game, &state, *fd_step);
                max_abs = max_abs.max(div.abs());
                rows.push(vec![i.to_string(), fmt_f64(div)]);
            }
            writer.write_csv("divergence.csv", &["state", "divergence"], &rows)?;
            writer.write_json(
                "summary.json",
                &serde_json::json!({
                    "game": spec.name,
                    "mode": "probe-divergence",
                    "states": states,
                    "fd_step": fd_step,
                    "max_abs_divergence": max_abs,
                }),
            )?;
            Ok(vec![*seed])
        }
    }
}

/// Worker pool for sweeps; `QZSG_THREADS` caps its size.
fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var("QZSG_THREADS") {
        let n: usize = raw.parse().map_err(|_| {
            CliError::Validation(format!("QZSG_THREADS must be a positive integer, got {raw:?}"))
        })?;
        if n == 0 {
            return Err(CliError::Validation(
                "QZSG_THREADS must be a positive integer".into(),
            ));
        }
        builder = builder.num_threads(n);
    }
    builder.build().map_err(CliError::validation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::matching_pennies;

    fn write_config(dir: &Path, value: serde_json::Value) -> PathBuf {
        let path = dir.join("config.json");
        fs::write(&path, serde_json::to_string_pretty(&value).unwrap()).unwrap();
        path
    }

    fn mp_game_file(dir: &Path) -> PathBuf {
        let path = dir.join("mp.json");
        cmd_gen_game(&GameKind::MatchingPennies, &path).unwrap();
        path
    }

    fn uniform_reference_file(dir: &Path) -> PathBuf {
        let path = dir.join("uniform.json");
        NashCertificate::uniform(&matching_pennies())
            .unwrap()
            .save(&path)
            .unwrap();
        path
    }

    #[test]
    fn gen_game_writes_a_loadable_spec() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("mp.json");
        let spec = cmd_gen_game(&GameKind::MatchingPennies, &out).unwrap();
        assert_eq!(spec.name, "matching-pennies");
        let loaded = GameSpec::load(&out).unwrap();
        let g = loaded.to_observable().unwrap();
        for (i, want) in [1.0, -1.0, -1.0, 1.0].iter().enumerate() {
            assert_eq!(g.observable().matrix()[(i, i)].re, *want);
        }
    }

    #[test]
    fn gen_game_multi_qubit_has_interior_uniform_nash() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("mq.json");
        cmd_gen_game(&GameKind::MultiQubit { qubits: 2, seed: 3 }, &out).unwrap();
        let game = GameSpec::load(&out).unwrap().to_observable().unwrap();
        let u = crate::linalg::DensityMatrix::maximally_mixed(4);
        assert!(game.exploitability(&u, &u) <= 1e-8);
    }

    #[test]
    fn gen_game_unitary_reports_classical_eigenvalues() {
        let dir = tempfile::tempdir().unwrap();
        let p_file = dir.path().join("p.json");
        fs::write(&p_file, "[[1.0, -1.0], [-1.0, 1.0]]").unwrap();
        let out = dir.path().join("u.json");
        cmd_gen_game(&GameKind::Unitary { p_file, seed: 7 }, &out).unwrap();
        let game = GameSpec::load(&out).unwrap().to_observable().unwrap();
        let eigs = herm_eig(game.observable()).unwrap();
        let want = [-1.0, -1.0, 1.0, 1.0];
        for (e, w) in eigs.eigenvalues.iter().zip(want.iter()) {
            assert!((e - w).abs() < 1e-10);
        }
    }

    #[test]
    fn run_mmwu_mode_end_to_end() {
        let dir = tempfile::tempdir().unwrap();
        let game_path = mp_game_file(dir.path());
        let out_dir = dir.path().join("out");
        let config = write_config(
            dir.path(),
            serde_json::json!({
                "game": game_path,
                "mode": {"mmwu": {"epsilon": 0.1, "init": "random", "seed_rho0": 5, "seed_sigma0": 6, "record_every": 500}},
                "output_dir": out_dir,
            }),
        );
        let manifest = cmd_run(&config).unwrap();
        assert!(out_dir.join("trajectory.csv").exists());
        assert!(out_dir.join("summary.json").exists());
        assert!(out_dir.join("nash.json").exists());
        assert!(out_dir.join("manifest.json").exists());
        assert_eq!(manifest.seeds, vec![5, 6]);

        let summary: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap())
                .unwrap();
        let expl = summary["certificate"]["exploitability"].as_f64().unwrap();
        assert!(expl <= 0.1);
    }

    #[test]
    fn run_replicator_mode_with_zero_horizon() {
        let dir = tempfile::tempdir().unwrap();
        let game_path = mp_game_file(dir.path());
        let ref_path = uniform_reference_file(dir.path());
        let out_dir = dir.path().join("out");
        let config = write_config(
            dir.path(),
            serde_json::json!({
                "game": game_path,
                "mode": {"replicator": {"t_end": 0.0, "step_h": 0.001, "seed_rho0": 1, "seed_sigma0": 2}},
                "output_dir": out_dir,
                "reference": {"analytic": ref_path},
            }),
        );
        cmd_run(&config).unwrap();
        let summary: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap())
                .unwrap();
        assert_eq!(summary["samples"], 1);
        assert_eq!(summary["conservation"]["max_drift"], 0.0);
    }

    #[test]
    fn malformed_game_json_is_a_validation_error() {
        let dir = tempfile::tempdir().unwrap();
        // break hermiticity
        let game_path = dir.path().join("bad.json");
        let mut spec = GameSpec::from_observable(
            "bad".into(),
            &matching_pennies(),
            Provenance::Explicit,
        );
        spec.r[0][1] = [3.0, 1.0];
        spec.save(&game_path).unwrap();
        let config = write_config(
            dir.path(),
            serde_json::json!({
                "game": game_path,
                "mode": {"find-nash": {"epsilon": 0.1}},
                "output_dir": dir.path().join("out"),
            }),
        );
        let err = cmd_run(&config).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().to_lowercase().contains("hermitian"));
    }

    #[test]
    fn identical_configs_produce_byte_identical_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let game_path = mp_game_file(dir.path());
        let ref_path = uniform_reference_file(dir.path());
        let mut outputs = Vec::new();
        for run in 0..2 {
            let out_dir = dir.path().join(format!("out{run}"));
            let config = write_config(
                dir.path(),
                serde_json::json!({
                    "game": game_path,
                    "mode": {"replicator": {"t_end": 1.0, "step_h": 0.01, "seed_rho0": 9, "seed_sigma0": 10, "record_every": 10}},
                    "output_dir": out_dir,
                    "reference": {"analytic": ref_path},
                }),
            );
            cmd_run(&config).unwrap();
            outputs.push(fs::read(out_dir.join("trajectory.csv")).unwrap());
        }
        assert_eq!(outputs[0], outputs[1]);
    }

    #[test]
    fn config_hash_is_stable_under_key_reordering() {
        let a: serde_json::Value =
            serde_json::from_str(r#"{"alpha": 1, "beta": {"x": [1.5, 2], "y": "z"}}"#).unwrap();
        let b: serde_json::Value =
            serde_json::from_str(r#"{"beta": {"y": "z", "x": [1.5, 2]}, "alpha": 1}"#).unwrap();
        assert_eq!(config_hash(&a), config_hash(&b));
    }

    #[test]
    fn sweep_runs_one_row_per_seed_ordered() {
        let dir = tempfile::tempdir().unwrap();
        let game_path = mp_game_file(dir.path());
        let ref_path = uniform_reference_file(dir.path());
        let out_dir = dir.path().join("out");
        let config = write_config(
            dir.path(),
            serde_json::json!({
                "game": game_path,
                "mode": {"recurrence-sweep": {
                    "replicator": {"t_end": 30.0, "step_h": 0.01, "record_every": 10},
                    "seeds": [3, 1, 2],
                }},
                "output_dir": out_dir,
                "reference": {"analytic": ref_path},
            }),
        );
        let manifest = cmd_recurrence_sweep(&config).unwrap();
        assert_eq!(manifest.seeds, vec![3, 1, 2]);
        let csv = fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("3,"));
        assert!(lines[2].starts_with("1,"));
        assert!(lines[3].starts_with("2,"));
        let summary: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap())
                .unwrap();
        assert_eq!(summary["recurrence_fraction"], 1.0);
    }

    #[test]
    fn sweep_with_short_horizon_reports_zero_recurrence() {
        let dir = tempfile::tempdir().unwrap();
        let game_path = mp_game_file(dir.path());
        let ref_path = uniform_reference_file(dir.path());
        let out_dir = dir.path().join("out");
        let config = write_config(
            dir.path(),
            serde_json::json!({
                "game": game_path,
                "mode": {"recurrence-sweep": {
                    // far shorter than any excursion-and-return cycle
                    "replicator": {"t_end": 0.5, "step_h": 0.01, "record_every": 10},
                    "seeds": [4],
                }},
                "output_dir": out_dir,
                "reference": {"analytic": ref_path},
            }),
        );
        cmd_run(&config).unwrap();
        let summary: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap())
                .unwrap();
        assert_eq!(summary["recurrence_fraction"], 0.0);
        // one seed, one row, empty t_return column
        let csv = fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[1].starts_with("4,,"));
    }

    #[test]
    fn sweep_command_rejects_other_modes() {
        let dir = tempfile::tempdir().unwrap();
        let config = write_config(
            dir.path(),
            serde_json::json!({
                "mode": {"find-nash": {"epsilon": 0.1}},
                "output_dir": dir.path().join("out"),
            }),
        );
        let err = cmd_recurrence_sweep(&config).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn missing_reference_for_replicator_is_a_validation_error() {
        let dir = tempfile::tempdir().unwrap();
        let game_path = mp_game_file(dir.path());
        let config = write_config(
            dir.path(),
            serde_json::json!({
                "game": game_path,
                "mode": {"replicator": {"t_end": 1.0, "step_h": 0.01}},
                "output_dir": dir.path().join("out"),
            }),
        );
        let err = cmd_run(&config).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn probe_modes_write_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let game_path = mp_game_file(dir.path());
        let out_dir = dir.path().join("probe");
        let config = write_config(
            dir.path(),
            serde_json::json!({
                "game": game_path,
                "mode": {"probe-limit": {"mus": [0.1, 0.01], "steps": 50, "seed": 4}},
                "output_dir": out_dir,
            }),
        );
        cmd_run(&config).unwrap();
        assert!(out_dir.join("probe.csv").exists());

        let out_dir2 = dir.path().join("div");
        let config = write_config(
            dir.path(),
            serde_json::json!({
                "game": game_path,
                "mode": {"probe-divergence": {"states": 3, "seed": 11, "fd_step": 1e-5}},
                "output_dir": out_dir2,
            }),
        );
        cmd_run(&config).unwrap();
        let summary: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(out_dir2.join("summary.json")).unwrap())
                .unwrap();
        assert!(summary["max_abs_divergence"].as_f64().unwrap() <= 1e-6);
    }

    #[test]
    fn inline_game_specs_are_accepted() {
        let dir = tempfile::tempdir().unwrap();
        let spec = GameSpec::from_observable(
            "inline-mp".into(),
            &matching_pennies(),
            Provenance::Explicit,
        );
        let config = write_config(
            dir.path(),
            serde_json::json!({
                "game": spec,
                "mode": {"find-nash": {"epsilon": 0.5}},
                "output_dir": dir.path().join("out"),
            }),
        );
        let manifest = cmd_run(&config).unwrap();
        assert!(manifest.artifact_paths.iter().any(|p| p.ends_with("nash.json")));
    }
}
