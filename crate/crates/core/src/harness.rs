//! Scenario execution, sweeps, probing, and the files they produce.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::analysis::{
    population_classification, weight_stats, PopulationClassification, SchemeLabel,
};
use crate::config::{ConfigError, RunConfig};
use crate::engine::{Simulation, StepRecord};
use crate::model::{MotivationMode, GENOME_LEN};
use crate::rng::derive_seed;
use crate::snapshot::{load_snapshot, save_snapshot, Snapshot, SnapshotError};

pub const TIMESERIES_HEADER: &str = "t,N,births,deaths,grass_cells,mean_energy,total_energy,\
act_rest,act_move_left,act_move_right,act_jump,act_eat,act_mate_left,act_mate_right";
pub const WEIGHTS_HEADER: &str = "t,gene_index,mean,std";
pub const SUMMARY_HEADER: &str = "run_index,grass_probability,motivation,seed,status,survived,\
final_population,extinction_iteration,iterations_run,majority_label,frac_reflex_only,\
frac_motivation_gated,frac_other,mating_suppressed_fraction";
pub const PROBE_HEADER: &str = "agent_index,position,energy,label,mating_suppressed_when_hungry,\
rule_food_seeking,rule_mating_on_neighbor,rule_rest_on_empty";

pub const TIMESERIES_FILE: &str = "timeseries.csv";
pub const WEIGHTS_FILE: &str = "weights.csv";
pub const SNAPSHOT_FILE: &str = "snapshot.txt";
pub const MANIFEST_FILE: &str = "manifest.txt";
pub const SUMMARY_FILE: &str = "summary.csv";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Snapshot(SnapshotError),
}

impl From<SnapshotError> for HarnessError {
    fn from(e: SnapshotError) -> Self {
        match e {
            SnapshotError::Io { path, source } => HarnessError::Io {
                path: path.into(),
                source,
            },
            other => HarnessError::Snapshot(other),
        }
    }
}

impl HarnessError {
    /// Process exit code: 1 for bad input, 2 for I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(ConfigError::Read { .. }) | HarnessError::Io { .. } => 2,
            HarnessError::Config(_) | HarnessError::Snapshot(_) => 1,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// What a finished run reports.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub seed: u64,
    pub final_population: usize,
    /// Iteration during which the last agent died.
    pub extinction_iteration: Option<u64>,
    /// Index of the next iteration that would run.
    pub iterations_run: u64,
    pub classification: Option<PopulationClassification>,
}

impl RunOutcome {
    pub fn survived(&self) -> bool {
        self.final_population > 0
    }

    pub fn majority_label(&self) -> Option<SchemeLabel> {
        self.classification.as_ref().map(|c| c.majority)
    }

    fn from_simulation(sim: &Simulation, last: Option<&StepRecord>) -> Self {
        let final_population = sim.world.agents.len();
        let extinction_iteration = match last {
            Some(r) if final_population == 0 => Some(r.t),
            _ => None,
        };
        Self {
            seed: sim.config.seed,
            final_population,
            extinction_iteration,
            iterations_run: sim.t,
            classification: population_classification(&sim.world.agents),
        }
    }

    /// Manifest `key=value` lines describing the outcome.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        let c = self.classification.as_ref();
        let frac = |l: SchemeLabel| c.map_or("".into(), |c| format!("{:?}", c.fraction(l)));
        vec![
            (
                "outcome",
                if self.survived() {
                    "survived"
                } else {
                    "extinct"
                }
                .into(),
            ),
            ("final_population", self.final_population.to_string()),
            (
                "extinction_iteration",
                self.extinction_iteration
                    .map_or("none".into(), |t| t.to_string()),
            ),
            ("iterations_run", self.iterations_run.to_string()),
            (
                "majority_label",
                self.majority_label()
                    .map_or("none".into(), |l| l.to_string()),
            ),
            ("frac_reflex_only", frac(SchemeLabel::ReflexOnly)),
            ("frac_motivation_gated", frac(SchemeLabel::MotivationGated)),
            ("frac_other", frac(SchemeLabel::Other)),
            (
                "mating_suppressed_fraction",
                c.map_or("".into(), |c| format!("{:?}", c.mating_suppressed_fraction)),
            ),
        ]
    }
}

/// Runs `sim` to completion without writing anything.
pub fn execute(mut sim: Simulation) -> (RunOutcome, Simulation) {
    let mut last = None;
    sim.run_with(|_, rec| last = Some(rec.clone()));
    (RunOutcome::from_simulation(&sim, last.as_ref()), sim)
}

pub fn timeseries_row(rec: &StepRecord) -> String {
    let a = &rec.actions;
    format!(
        "{},{},{},{},{},{:?},{:?},{},{},{},{},{},{},{}",
        rec.t,
        rec.population,
        rec.births,
        rec.deaths,
        rec.grass_cells,
        rec.mean_energy(),
        rec.total_energy,
        a[0],
        a[1],
        a[2],
        a[3],
        a[4],
        a[5],
        a[6]
    )
}

struct RunWriter {
    dir: PathBuf,
    timeseries: BufWriter<File>,
    weights: BufWriter<File>,
}

impl RunWriter {
    fn create(dir: &Path, append: bool) -> Result<Self, HarnessError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let open = |name: &str, header: &str| -> Result<BufWriter<File>, HarnessError> {
            let path = dir.join(name);
            let exists = path.exists();
            let file = fs::OpenOptions::new()
                .create(true)
                .write(true)
                .append(append)
                .truncate(!append)
                .open(&path)
                .map_err(io_err(&path))?;
            let mut w = BufWriter::new(file);
            if !(append && exists) {
                writeln!(w, "{header}").map_err(io_err(&path))?;
            }
            Ok(w)
        };
        Ok(Self {
            timeseries: open(TIMESERIES_FILE, TIMESERIES_HEADER)?,
            weights: open(WEIGHTS_FILE, WEIGHTS_HEADER)?,
            dir: dir.to_path_buf(),
        })
    }

    fn weights(&mut self, sim: &Simulation) -> Result<(), HarnessError> {
        let genomes = sim.world.agents.iter().map(|a| &a.genome);
        if let Some(stats) = weight_stats(genomes, sim.t) {
            let path = self.dir.join(WEIGHTS_FILE);
            for i in 0..GENOME_LEN {
                writeln!(
                    self.weights,
                    "{},{},{:?},{:?}",
                    stats.t, i, stats.mean[i], stats.std[i]
                )
                .map_err(io_err(&path))?;
            }
        }
        Ok(())
    }

    fn record(&mut self, rec: &StepRecord) -> Result<(), HarnessError> {
        writeln!(self.timeseries, "{}", timeseries_row(rec))
            .map_err(io_err(&self.dir.join(TIMESERIES_FILE)))
    }

    fn finish(mut self) -> Result<(), HarnessError> {
        self.timeseries
            .flush()
            .map_err(io_err(&self.dir.join(TIMESERIES_FILE)))?;
        self.weights
            .flush()
            .map_err(io_err(&self.dir.join(WEIGHTS_FILE)))
    }
}

fn write_manifest(
    dir: &Path,
    config: &RunConfig,
    status: &str,
    outcome: Option<&RunOutcome>,
) -> Result<(), HarnessError> {
    let mut text = String::new();
    text.push_str("format_version=1\n");
    text.push_str(&format!("status={status}\n"));
    for (k, v) in config.to_pairs() {
        text.push_str(&format!("{k}={v}\n"));
    }
    if let Some(o) = outcome {
        for (k, v) in o.to_pairs() {
            text.push_str(&format!("{k}={v}\n"));
        }
    }
    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, text).map_err(io_err(&path))
}

/// Drives `sim` to completion, writing every output into `dir`.
pub fn run_simulation_to_dir(
    mut sim: Simulation,
    dir: &Path,
    append: bool,
) -> Result<RunOutcome, HarnessError> {
    let config = sim.config.clone();
    let result = (|| {
        let mut writer = RunWriter::create(dir, append)?;
        let mut last: Option<StepRecord> = None;
        while !sim.is_finished() {
            let t = sim.t;
            if t.is_multiple_of(config.weights_interval) {
                writer.weights(&sim)?;
            }
            if config.snapshot_every > 0 && t > 0 && t.is_multiple_of(config.snapshot_every) {
                let path = dir.join(format!("snapshot_{t}.txt"));
                save_snapshot(&Snapshot::capture(&sim), &path)?;
            }
            let rec = sim.step();
            if rec.t.is_multiple_of(config.timeseries_interval) {
                writer.record(&rec)?;
            }
            last = Some(rec);
        }
        writer.finish()?;
        save_snapshot(&Snapshot::capture(&sim), &dir.join(SNAPSHOT_FILE))?;
        Ok(RunOutcome::from_simulation(&sim, last.as_ref()))
    })();
    match result {
        Ok(outcome) => {
            write_manifest(dir, &config, "complete", Some(&outcome))?;
            Ok(outcome)
        }
        Err(e) => {
            // best effort: the directory itself may be what failed
            let _ = write_manifest(dir, &config, &format!("failed: {e}; outputs partial"), None);
            Err(e)
        }
    }
}

/// Fresh run of `config` into `config.output_directory`.
pub fn run_scenario(config: &RunConfig) -> Result<RunOutcome, HarnessError> {
    config.validate()?;
    run_simulation_to_dir(
        Simulation::new(config.clone()),
        &config.output_directory,
        false,
    )
}

/// Continues a snapshot, appending to the CSVs already in `dir`.
pub fn resume_scenario(
    snapshot: Snapshot,
    max_iterations: Option<u64>,
    dir: &Path,
) -> Result<RunOutcome, HarnessError> {
    let mut sim = snapshot.into_simulation();
    if let Some(n) = max_iterations {
        sim.config.max_iterations = n;
    }
    sim.config.output_directory = dir.to_path_buf();
    run_simulation_to_dir(sim, dir, true)
}

/// One cell of a sweep grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRun {
    pub index: usize,
    pub grass_probability: f64,
    pub mode: MotivationMode,
    pub replicate: usize,
    pub seed: u64,
}

impl SweepRun {
    pub fn dir_name(&self) -> String {
        format!(
            "run{:03}_pg{}_{}_seed{}",
            self.index, self.grass_probability, self.mode, self.seed
        )
    }

    pub fn config(&self, base: &RunConfig, root: &Path) -> RunConfig {
        let mut c = base.clone();
        c.world.grass_probability = self.grass_probability;
        c.world.motivation_mode = self.mode;
        c.seed = self.seed;
        c.output_directory = root.join("runs").join(self.dir_name());
        c
    }
}

/// Grid in (P_g, mode, replicate) order. Replicate `k` uses
/// `derive_seed(master, k)` in every cell, so modes are paired by seed.
pub fn sweep_grid(
    grass_probabilities: &[f64],
    modes: &[MotivationMode],
    replicates: usize,
    master_seed: u64,
) -> Vec<SweepRun> {
    let mut runs = Vec::new();
    for &pg in grass_probabilities {
        for &mode in modes {
            for k in 0..replicates {
                runs.push(SweepRun {
                    index: runs.len(),
                    grass_probability: pg,
                    mode,
                    replicate: k,
                    seed: derive_seed(master_seed, k as u64),
                });
            }
        }
    }
    runs
}

/// Runs every grid cell in memory, in parallel, returning outcomes in grid order.
pub fn sweep_outcomes(base: &RunConfig, runs: &[SweepRun]) -> Vec<RunOutcome> {
    runs.par_iter()
        .map(|r| execute(Simulation::new(r.config(base, Path::new("")))).0)
        .collect()
}

pub fn summary_row(run: &SweepRun, result: &Result<RunOutcome, String>) -> String {
    match result {
        Ok(o) => {
            let c = o.classification.as_ref();
            let frac = |l: SchemeLabel| c.map_or(String::new(), |c| format!("{:?}", c.fraction(l)));
            format!(
                "{},{:?},{},{},complete,{},{},{},{},{},{},{},{},{}",
                run.index,
                run.grass_probability,
                run.mode,
                run.seed,
                o.survived(),
                o.final_population,
                o.extinction_iteration
                    .map_or(String::new(), |t| t.to_string()),
                o.iterations_run,
                o.majority_label().map_or("none".into(), |l| l.to_string()),
                frac(SchemeLabel::ReflexOnly),
                frac(SchemeLabel::MotivationGated),
                frac(SchemeLabel::Other),
                c.map_or(String::new(), |c| format!(
                    "{:?}",
                    c.mating_suppressed_fraction
                )),
            )
        }
        Err(e) => format!(
            "{},{:?},{},{},\"error: {}\",,,,,,,,,",
            run.index,
            run.grass_probability,
            run.mode,
            run.seed,
            e.replace('"', "'")
        ),
    }
}

/// Runs the grid with per-run output directories under `out/runs/` and
/// writes `out/summary.csv` in grid order.
pub fn sweep(
    base: &RunConfig,
    runs: &[SweepRun],
    out: &Path,
) -> Result<Vec<Result<RunOutcome, String>>, HarnessError> {
    base.validate()?;
    fs::create_dir_all(out.join("runs")).map_err(io_err(out))?;
    let results: Vec<Result<RunOutcome, String>> = runs
        .par_iter()
        .map(|r| run_scenario(&r.config(base, out)).map_err(|e| e.to_string()))
        .collect();
    let mut text = String::from(SUMMARY_HEADER);
    text.push('\n');
    for (run, result) in runs.iter().zip(&results) {
        text.push_str(&summary_row(run, result));
        text.push('\n');
    }
    let path = out.join(SUMMARY_FILE);
    fs::write(&path, text).map_err(io_err(&path))?;
    Ok(results)
}

/// Per-agent classification of a snapshot's population.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    pub csv: String,
    pub summary: String,
    pub classification: Option<PopulationClassification>,
}

pub fn probe_snapshot(snapshot: &Snapshot) -> ProbeReport {
    let agents = &snapshot.world.agents;
    let mut csv = String::from(PROBE_HEADER);
    csv.push('\n');
    let classification = population_classification(agents);
    let summary = match &classification {
        None => format!("iteration {}: no agents\n", snapshot.t),
        Some(pc) => {
            for (i, (a, c)) in agents.iter().zip(&pc.per_agent).enumerate() {
                csv.push_str(&format!(
                    "{},{},{:?},{},{},{},{},{}\n",
                    i,
                    a.position,
                    a.energy,
                    c.label,
                    c.mating_suppressed_when_hungry,
                    c.rules.food_seeking,
                    c.rules.mating_on_neighbor,
                    c.rules.rest_on_empty
                ));
            }
            let mut s = format!("iteration {}: {} agents\n", snapshot.t, agents.len());
            for l in SchemeLabel::ALL {
                s.push_str(&format!("{l}: {:.4}\n", pc.fraction(l)));
            }
            s.push_str(&format!(
                "mating_suppressed_when_hungry: {:.4}\nmajority: {}\n",
                pc.mating_suppressed_fraction, pc.majority
            ));
            s
        }
    };
    ProbeReport {
        csv,
        summary,
        classification,
    }
}

/// Loads a snapshot and writes `probe.csv` and `probe_summary.txt` into `out`.
pub fn probe_command(snapshot_path: &Path, out: &Path) -> Result<ProbeReport, HarnessError> {
    let snapshot = load_snapshot(snapshot_path)?;
    let report = probe_snapshot(&snapshot);
    fs::create_dir_all(out).map_err(io_err(out))?;
    let csv = out.join("probe.csv");
    fs::write(&csv, &report.csv).map_err(io_err(&csv))?;
    let txt = out.join("probe_summary.txt");
    fs::write(&txt, &report.summary).map_err(io_err(&txt))?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shape_and_pairing() {
        let modes = [MotivationMode::Enabled, MotivationMode::Suppressed];
        let grid = sweep_grid(&[0.0005, 0.005, 0.05], &modes, 10, 7);
        assert_eq!(grid.len(), 60);
        assert!(grid.iter().enumerate().all(|(i, r)| r.index == i));
        assert_eq!(grid[0].seed, grid[10].seed);
        assert_ne!(grid[0].seed, grid[1].seed);
        assert_eq!(sweep_grid(&[0.05], &modes[..1], 3, 1).len(), 3);
    }

    #[test]
    fn header_column_counts() {
        assert_eq!(TIMESERIES_HEADER.split(',').count(), 14);
        assert_eq!(SUMMARY_HEADER.split(',').count(), 14);
        let run = &sweep_grid(&[0.05], &[MotivationMode::Enabled], 1, 1)[0];
        let err = summary_row(run, &Err("boom".into()));
        assert_eq!(err.split(',').count(), 14);
    }

    #[test]
    fn exit_codes() {
        let cfg = HarnessError::Config(ConfigError::Invalid(vec![]));
        assert_eq!(cfg.exit_code(), 1);
        let io = HarnessError::Io {
            path: "x".into(),
            source: std::io::Error::other("x"),
        };
        assert_eq!(io.exit_code(), 2);
    }
}
