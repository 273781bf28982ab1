//! Versioned line-oriented snapshot of a running simulation.
//!
//! ```text
//! animat-snapshot 1
//! iteration 120
//! config n_cells=900
//! ...
//! rng <64 hex key> <stream> <word position>
//! agents 2
//! agent <position> <energy> <63 weights>
//! agent ...
//! grass 1
//! patch <cell> <iterations left>
//! end
//! ```
//!
//! Reals are written in Rust's shortest round-trip form, so
//! `load(save(s)) == s` bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::config::{RunConfig, KEYS};
use crate::engine::Simulation;
use crate::model::{Agent, Genome, World, GENOME_LEN};
use crate::rng::RngState;

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "animat-snapshot";

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("unsupported snapshot version {0} (expected {FORMAT_VERSION})")]
    Version(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("snapshot truncated: {0}")]
    Truncated(String),
    #[error("invalid snapshot state: {0}")]
    Invariant(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub config: RunConfig,
    /// Next iteration to run.
    pub t: u64,
    pub world: World,
    pub rng: RngState,
}

impl Snapshot {
    pub fn capture(sim: &Simulation) -> Self {
        Self {
            config: sim.config.clone(),
            t: sim.t,
            world: sim.world.clone(),
            rng: sim.rng_state(),
        }
    }

    pub fn into_simulation(self) -> Simulation {
        Simulation::from_parts(self.config, self.world, &self.rng, self.t)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{MAGIC} {FORMAT_VERSION}").unwrap();
        writeln!(s, "iteration {}", self.t).unwrap();
        for (k, v) in self.config.to_pairs() {
            writeln!(s, "config {k}={v}").unwrap();
        }
        let key: String = self.rng.key.iter().map(|b| format!("{b:02x}")).collect();
        writeln!(s, "rng {key} {} {}", self.rng.stream, self.rng.word_pos).unwrap();
        writeln!(s, "agents {}", self.world.agents.len()).unwrap();
        for a in &self.world.agents {
            write!(s, "agent {} {:?}", a.position, a.energy).unwrap();
            for w in a.genome.weights() {
                write!(s, " {w:?}").unwrap();
            }
            s.push('\n');
        }
        let patches: Vec<(usize, u32)> = self
            .world
            .cells
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.grass.map(|g| (i, g)))
            .collect();
        writeln!(s, "grass {}", patches.len()).unwrap();
        for (cell, left) in patches {
            writeln!(s, "patch {cell} {left}").unwrap();
        }
        s.push_str("end\n");
        s
    }

    pub fn parse(text: &str) -> Result<Self, SnapshotError> {
        Parser::new(text).parse()
    }
}

struct Parser<'a> {
    lines: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    line: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            lines: text.lines().enumerate().peekable(),
            line: 0,
        }
    }

    fn err(&self, message: impl Into<String>) -> SnapshotError {
        SnapshotError::Parse {
            line: self.line,
            message: message.into(),
        }
    }

    fn next(&mut self, what: &str) -> Result<&'a str, SnapshotError> {
        match self.lines.next() {
            Some((i, l)) => {
                self.line = i + 1;
                Ok(l)
            }
            None => Err(SnapshotError::Truncated(format!("expected {what}"))),
        }
    }

    /// Next line, which must start with `tag`; returns the remainder.
    fn tagged(&mut self, tag: &str) -> Result<&'a str, SnapshotError> {
        let line = self.next(tag)?;
        match line.split_once(' ') {
            Some((t, rest)) if t == tag => Ok(rest),
            _ if line == tag => Ok(""),
            _ => Err(self.err(format!("expected `{tag}` record, got {line:?}"))),
        }
    }

    fn number<T: std::str::FromStr>(&self, field: &str, s: &str) -> Result<T, SnapshotError> {
        s.parse()
            .map_err(|_| self.err(format!("bad {field} value {s:?}")))
    }

    fn parse(mut self) -> Result<Snapshot, SnapshotError> {
        let header = self.next("header")?;
        let version = header
            .strip_prefix(MAGIC)
            .map(str::trim)
            .ok_or_else(|| self.err("not an animat snapshot"))?;
        if version != FORMAT_VERSION.to_string() {
            return Err(SnapshotError::Version(version.to_string()));
        }
        let t: u64 = {
            let v = self.tagged("iteration")?;
            self.number("iteration", v)?
        };

        let mut config = RunConfig::default();
        let mut seen = Vec::new();
        while matches!(self.lines.peek(), Some((_, l)) if l.starts_with("config ")) {
            let rest = self.tagged("config")?;
            let (k, v) = rest
                .split_once('=')
                .ok_or_else(|| self.err("config record needs key=value"))?;
            config
                .set(k, v)
                .map_err(|v| self.err(format!("config {v}")))?;
            seen.push(k.to_string());
        }
        if let Some(missing) = KEYS.iter().find(|k| !seen.iter().any(|s| s == *k)) {
            return Err(self.err(format!("config key {missing} missing")));
        }
        if let Err(e) = config.validate() {
            return Err(SnapshotError::Invariant(e.to_string()));
        }

        let rng = {
            let rest = self.tagged("rng")?;
            let parts: Vec<&str> = rest.split_whitespace().collect();
            if parts.len() != 3 || parts[0].len() != 64 || !parts[0].is_ascii() {
                return Err(self.err("rng record needs <64 hex> <stream> <word_pos>"));
            }
            let mut key = [0u8; 32];
            for (i, b) in key.iter_mut().enumerate() {
                *b = u8::from_str_radix(&parts[0][2 * i..2 * i + 2], 16)
                    .map_err(|_| self.err("bad rng key"))?;
            }
            RngState {
                key,
                stream: self.number("rng stream", parts[1])?,
                word_pos: self.number("rng word position", parts[2])?,
            }
        };

        let mut world = World::new(config.world.clone());
        let n_agents: usize = {
            let v = self.tagged("agents")?;
            self.number("agents", v)?
        };
        for k in 0..n_agents {
            let rest = self.tagged("agent")?;
            let agent = self.agent(rest).map_err(|e| match e {
                SnapshotError::Parse { line, message } => SnapshotError::Parse {
                    line,
                    message: format!("agent record {k}: {message}"),
                },
                other => other,
            })?;
            if agent.energy.is_nan() || agent.energy <= 0.0 {
                return Err(SnapshotError::Invariant(format!(
                    "agent record {k}: non-positive energy {}",
                    agent.energy
                )));
            }
            if agent.position >= world.n_cells() {
                return Err(SnapshotError::Invariant(format!(
                    "agent record {k}: position {} outside the world",
                    agent.position
                )));
            }
            let pos = agent.position;
            if world.add_agent(agent).is_none() {
                return Err(SnapshotError::Invariant(format!(
                    "agent record {k}: cell {pos} already occupied"
                )));
            }
        }

        let n_patches: usize = {
            let v = self.tagged("grass")?;
            self.number("grass", v)?
        };
        let lifetime = config.physiology.grass_lifetime;
        for k in 0..n_patches {
            let rest = self.tagged("patch")?;
            let (cell, left) = rest
                .split_once(' ')
                .ok_or_else(|| self.err(format!("patch record {k}: needs <cell> <left>")))?;
            let cell: usize = self.number("patch cell", cell)?;
            let left: u32 = self.number("patch lifetime", left)?;
            if cell >= world.n_cells() || !(1..=lifetime).contains(&left) {
                return Err(SnapshotError::Invariant(format!(
                    "patch record {k}: cell {cell} / lifetime {left} out of range"
                )));
            }
            if world.cells[cell].grass.replace(left).is_some() {
                return Err(SnapshotError::Invariant(format!(
                    "patch record {k}: duplicate patch in cell {cell}"
                )));
            }
        }
        self.tagged("end")?;
        if let Some((i, l)) = self.lines.find(|(_, l)| !l.trim().is_empty()) {
            self.line = i + 1;
            return Err(self.err(format!("trailing content {l:?}")));
        }
        world
            .check_consistency()
            .map_err(SnapshotError::Invariant)?;
        Ok(Snapshot {
            config,
            t,
            world,
            rng,
        })
    }

    fn agent(&self, rest: &str) -> Result<Agent, SnapshotError> {
        let fields: Vec<&str> = rest.split_whitespace().collect();
        if fields.len() != 2 + GENOME_LEN {
            return Err(self.err(format!(
                "expected {} fields, found {}",
                2 + GENOME_LEN,
                fields.len()
            )));
        }
        let position = self.number("position", fields[0])?;
        let energy: f64 = self.number("energy", fields[1])?;
        let mut weights = [0.0; GENOME_LEN];
        for (w, s) in weights.iter_mut().zip(&fields[2..]) {
            *w = self.number::<f64>("weight", s)?;
            if !w.is_finite() {
                return Err(self.err(format!("non-finite weight {s:?}")));
            }
        }
        Ok(Agent {
            position,
            energy,
            genome: Genome(weights),
        })
    }
}

pub fn save_snapshot(snapshot: &Snapshot, path: &Path) -> Result<(), SnapshotError> {
    std::fs::write(path, snapshot.to_text()).map_err(|source| SnapshotError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_snapshot(path: &Path) -> Result<Snapshot, SnapshotError> {
    let text = std::fs::read_to_string(path).map_err(|source| SnapshotError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Snapshot::parse(&text)
}
