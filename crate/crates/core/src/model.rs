//! World, agent and parameter types, motivations, and sensing.
//!
//! Energies are stored as `f64` in units of the base energy unit `r`, so
//! `r == 1.0` throughout.

use std::fmt;

/// Number of controller inputs.
pub const N_INPUTS: usize = 9;
/// Number of action neurons.
pub const N_ACTIONS: usize = 7;
/// Genome length, one weight per (neuron, input) pair.
pub const GENOME_LEN: usize = N_INPUTS * N_ACTIONS;

/// Sensory input indices, in controller column order.
pub mod input {
    pub const FOOD_LEFT: usize = 0;
    pub const FOOD_HERE: usize = 1;
    pub const FOOD_RIGHT: usize = 2;
    pub const AGENT_LEFT: usize = 3;
    pub const AGENT_RIGHT: usize = 4;
    pub const MATE_LEFT: usize = 5;
    pub const MATE_RIGHT: usize = 6;
    pub const M_E: usize = 7;
    pub const M_R: usize = 8;

    /// Columns fed from motivations (own or neighbors').
    pub const MOTIVATIONAL: [usize; 4] = [MATE_LEFT, MATE_RIGHT, M_E, M_R];

    pub const NAMES: [&str; super::N_INPUTS] = [
        "food_left",
        "food_here",
        "food_right",
        "agent_left",
        "agent_right",
        "mate_left",
        "mate_right",
        "m_e",
        "m_r",
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Rest = 0,
    MoveLeft = 1,
    MoveRight = 2,
    Jump = 3,
    Eat = 4,
    MateLeft = 5,
    MateRight = 6,
}

impl Action {
    pub const ALL: [Action; N_ACTIONS] = [
        Action::Rest,
        Action::MoveLeft,
        Action::MoveRight,
        Action::Jump,
        Action::Eat,
        Action::MateLeft,
        Action::MateRight,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Action> {
        Self::ALL.get(index).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Action::Rest => "rest",
            Action::MoveLeft => "move_left",
            Action::MoveRight => "move_right",
            Action::Jump => "jump",
            Action::Eat => "eat",
            Action::MateLeft => "mate_left",
            Action::MateRight => "mate_right",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Energy economy of an agent, all values in units of `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysiologyParams {
    pub cost_rest: f64,
    pub cost_eat: f64,
    pub cost_move: f64,
    pub cost_jump: f64,
    pub cost_mate: f64,
    /// Energy handed to a newborn, half from each parent. A parent holding
    /// less than half gives only what it has.
    pub child_transfer_total: f64,
    /// Optimal resource; food motivation vanishes at and above it.
    pub r0: f64,
    /// Resource at which mating motivation saturates.
    pub r1: f64,
    pub eat_gain: f64,
    pub grass_lifetime: u32,
    pub jump_distance: usize,
}

impl Default for PhysiologyParams {
    fn default() -> Self {
        let r = 1.0;
        let r0 = 10_000.0 * r;
        Self {
            cost_rest: r,
            cost_eat: 2.0 * r,
            cost_move: 4.0 * r,
            cost_jump: 20.0 * r,
            cost_mate: 20.0 * r,
            child_transfer_total: 1000.0 * r,
            r0,
            r1: 0.5 * r0,
            eat_gain: 0.02 * r0,
            grass_lifetime: 20,
            jump_distance: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MotivationMode {
    Enabled,
    Suppressed,
}

impl MotivationMode {
    pub fn as_str(self) -> &'static str {
        match self {
            MotivationMode::Enabled => "on",
            MotivationMode::Suppressed => "off",
        }
    }
}

impl fmt::Display for MotivationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for MotivationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "on" | "enabled" | "true" | "1" => Ok(MotivationMode::Enabled),
            "off" | "suppressed" | "false" | "0" => Ok(MotivationMode::Suppressed),
            other => Err(format!("expected on|off, got {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldParams {
    pub n_cells: usize,
    pub grass_probability: f64,
    pub motivation_mode: MotivationMode,
}

impl Default for WorldParams {
    fn default() -> Self {
        Self {
            n_cells: 900,
            grass_probability: 1.0 / 200.0,
            motivation_mode: MotivationMode::Enabled,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionParams {
    pub mutation_intensity: f64,
    pub initial_population: usize,
}

impl Default for EvolutionParams {
    fn default() -> Self {
        Self {
            mutation_intensity: 0.05,
            initial_population: 200,
        }
    }
}

/// Controller weights laid out as `weights[neuron * N_INPUTS + input]`.
#[derive(Clone, PartialEq)]
pub struct Genome(pub [f64; GENOME_LEN]);

impl Genome {
    pub fn zeros() -> Self {
        Genome([0.0; GENOME_LEN])
    }

    pub fn from_slice(weights: &[f64]) -> Option<Self> {
        let arr: [f64; GENOME_LEN] = weights.try_into().ok()?;
        Some(Genome(arr))
    }

    pub fn weights(&self) -> &[f64; GENOME_LEN] {
        &self.0
    }

    pub fn get(&self, action: Action, input: usize) -> f64 {
        self.0[action.index() * N_INPUTS + input]
    }

    pub fn set(&mut self, action: Action, input: usize, value: f64) {
        self.0[action.index() * N_INPUTS + input] = value;
    }

    pub fn row(&self, action: Action) -> &[f64] {
        let start = action.index() * N_INPUTS;
        &self.0[start..start + N_INPUTS]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|w| w.is_finite())
    }

    /// Zero every weight fed by a motivation-derived input.
    pub fn zero_motivational_columns(&mut self) {
        for action in Action::ALL {
            for col in input::MOTIVATIONAL {
                self.set(action, col, 0.0);
            }
        }
    }
}

impl fmt::Debug for Genome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl std::ops::Neg for &Genome {
    type Output = Genome;

    fn neg(self) -> Genome {
        let mut out = self.clone();
        out.0.iter_mut().for_each(|w| *w = -*w);
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub position: usize,
    pub energy: f64,
    pub genome: Genome,
}

/// Index of an agent in `World::agents`; valid for one world state.
pub type AgentId = usize;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Cell {
    pub occupant: Option<AgentId>,
    /// Iterations left before the patch withers.
    pub grass: Option<u32>,
}

/// The ring of cells together with the agents living on it.
///
/// `cells[p].occupant == Some(i)` iff `agents[i].position == p`.
#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub params: WorldParams,
    pub cells: Vec<Cell>,
    pub agents: Vec<Agent>,
}

impl World {
    pub fn new(params: WorldParams) -> Self {
        let cells = vec![Cell::default(); params.n_cells];
        Self {
            params,
            cells,
            agents: Vec::new(),
        }
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn left_of(&self, pos: usize) -> usize {
        (pos + self.n_cells() - 1) % self.n_cells()
    }

    pub fn right_of(&self, pos: usize) -> usize {
        (pos + 1) % self.n_cells()
    }

    /// Cell reached by moving `distance` cells right (`dir > 0`) or left.
    pub fn offset(&self, pos: usize, distance: usize, dir: i8) -> usize {
        let n = self.n_cells();
        let d = distance % n;
        if dir > 0 {
            (pos + d) % n
        } else {
            (pos + n - d) % n
        }
    }

    pub fn population(&self) -> usize {
        self.agents.len()
    }

    pub fn total_energy(&self) -> f64 {
        self.agents.iter().map(|a| a.energy).sum()
    }

    pub fn grass_cells(&self) -> usize {
        self.cells.iter().filter(|c| c.grass.is_some()).count()
    }

    pub fn is_free(&self, pos: usize) -> bool {
        self.cells[pos].occupant.is_none()
    }

    /// Place a new agent; returns `None` if the cell is out of range or taken.
    pub fn add_agent(&mut self, agent: Agent) -> Option<AgentId> {
        let cell = self.cells.get_mut(agent.position)?;
        if cell.occupant.is_some() {
            return None;
        }
        let id = self.agents.len();
        cell.occupant = Some(id);
        self.agents.push(agent);
        Some(id)
    }

    pub fn set_grass(&mut self, pos: usize, lifetime: u32) {
        self.cells[pos].grass = Some(lifetime);
    }

    /// Recompute the occupancy index from agent positions.
    pub fn reindex(&mut self) {
        for c in &mut self.cells {
            c.occupant = None;
        }
        for (id, a) in self.agents.iter().enumerate() {
            self.cells[a.position].occupant = Some(id);
        }
    }

    /// Checks positions, energies, genomes and the occupancy index.
    pub fn check_consistency(&self) -> Result<(), String> {
        let mut seen = vec![None; self.n_cells()];
        for (id, a) in self.agents.iter().enumerate() {
            if a.position >= self.n_cells() {
                return Err(format!("agent {id}: position {} out of range", a.position));
            }
            if a.energy <= 0.0 || !a.energy.is_finite() {
                return Err(format!("agent {id}: non-positive energy {}", a.energy));
            }
            if !a.genome.is_finite() {
                return Err(format!("agent {id}: non-finite weight"));
            }
            if let Some(other) = seen[a.position] {
                return Err(format!("agents {other} and {id} share cell {}", a.position));
            }
            seen[a.position] = Some(id);
        }
        for (pos, cell) in self.cells.iter().enumerate() {
            if cell.occupant != seen[pos] {
                return Err(format!("occupancy index stale at cell {pos}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Motivations {
    pub m_e: f64,
    pub m_r: f64,
}

/// Food and mating motivations for a resource level `energy`.
pub fn compute_motivations(energy: f64, phys: &PhysiologyParams) -> Motivations {
    let m_r = (energy / phys.r1).min(1.0);
    let m_e = ((phys.r0 - energy) / phys.r0).max(0.0);
    // R is never negative for a live agent; the clamp keeps the range closed anyway.
    Motivations {
        m_e: m_e.clamp(0.0, 1.0),
        m_r: m_r.clamp(0.0, 1.0),
    }
}

pub type SensoryVector = [f64; N_INPUTS];

/// Controller input of `agent_id` read from the current world state.
pub fn sense(world: &World, agent_id: AgentId, phys: &PhysiologyParams) -> SensoryVector {
    let agent = &world.agents[agent_id];
    let pos = agent.position;
    let left = world.left_of(pos);
    let right = world.right_of(pos);
    let flag = |b: bool| if b { 1.0 } else { 0.0 };

    let mut v = [0.0; N_INPUTS];
    v[input::FOOD_LEFT] = flag(world.cells[left].grass.is_some());
    v[input::FOOD_HERE] = flag(world.cells[pos].grass.is_some());
    v[input::FOOD_RIGHT] = flag(world.cells[right].grass.is_some());
    let left_agent = world.cells[left].occupant;
    let right_agent = world.cells[right].occupant;
    v[input::AGENT_LEFT] = flag(left_agent.is_some());
    v[input::AGENT_RIGHT] = flag(right_agent.is_some());

    if world.params.motivation_mode == MotivationMode::Enabled {
        let neighbor_mr = |id: Option<AgentId>| {
            id.map_or(0.0, |i| {
                compute_motivations(world.agents[i].energy, phys).m_r
            })
        };
        v[input::MATE_LEFT] = neighbor_mr(left_agent);
        v[input::MATE_RIGHT] = neighbor_mr(right_agent);
        let own = compute_motivations(agent.energy, phys);
        v[input::M_E] = own.m_e;
        v[input::M_R] = own.m_r;
    }
    v
}

/// Energy subtracted for performing `action`, successful or not.
pub fn action_cost(action: Action, phys: &PhysiologyParams) -> f64 {
    match action {
        Action::Rest => phys.cost_rest,
        Action::MoveLeft | Action::MoveRight => phys.cost_move,
        Action::Jump => phys.cost_jump,
        Action::Eat => phys.cost_eat,
        Action::MateLeft | Action::MateRight => phys.cost_mate,
    }
}
