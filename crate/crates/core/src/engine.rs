//! One iteration of the world: grass, simultaneous choice, phased resolution.

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::config::RunConfig;
use crate::controller::decide;
use crate::evolution::{instinct_genome, offspring_genome};
use crate::model::{
    action_cost, sense, Action, Agent, AgentId, EvolutionParams, PhysiologyParams, World, N_ACTIONS,
};
use crate::rng::{seeded_rng, RngState, SimRng};

#[derive(Debug, Error, PartialEq)]
pub enum EngineError {
    #[error("action map covers {got} agents but the world holds {expected}")]
    ActionMismatch { expected: usize, got: usize },
}

/// Energy flows of one iteration.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EnergyLedger {
    pub gains_from_eating: f64,
    pub costs_paid: f64,
    /// Sum of the (non-positive) resources of agents removed this iteration.
    pub energy_lost_to_deaths: f64,
    pub energy_to_newborns: f64,
    pub energy_from_parents: f64,
}

/// Metrics of iteration `t`.
///
/// `population` and `total_energy` describe the world at the start of the
/// iteration (the agents that acted); the `*_after` fields describe it at
/// the end. `grass_cells` counts patches visible to the agents this iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: u64,
    pub population: usize,
    pub births: usize,
    pub deaths: usize,
    pub grass_cells: usize,
    pub actions: [u64; N_ACTIONS],
    pub total_energy: f64,
    pub population_after: usize,
    pub energy_after: f64,
    pub ledger: EnergyLedger,
}

impl StepRecord {
    pub fn mean_energy(&self) -> f64 {
        if self.population == 0 {
            0.0
        } else {
            self.total_energy / self.population as f64
        }
    }

    /// Residual of `after - before = gains - costs - lost_to_deaths`, with
    /// the parent-to-child transfer required to cancel.
    pub fn ledger_imbalance(&self) -> f64 {
        let l = &self.ledger;
        let expected = l.gains_from_eating - l.costs_paid - l.energy_lost_to_deaths
            + (l.energy_to_newborns - l.energy_from_parents);
        (self.energy_after - self.total_energy) - expected
    }
}

/// Ages every patch, drops withered ones, then seeds bare cells with probability `P_g`.
pub fn grass_update<R: Rng + ?Sized>(world: &mut World, phys: &PhysiologyParams, rng: &mut R) {
    let p = world.params.grass_probability;
    for cell in &mut world.cells {
        cell.grass = match cell.grass {
            Some(left) if left > 1 => Some(left - 1),
            Some(_) => None,
            None => None,
        };
    }
    if p <= 0.0 {
        return;
    }
    for cell in &mut world.cells {
        if cell.grass.is_none() && rng.gen_bool(p) {
            cell.grass = Some(phys.grass_lifetime);
        }
    }
}

/// Every agent's action, decided against the same world state.
pub fn choose_actions(world: &World, phys: &PhysiologyParams) -> Vec<Action> {
    (0..world.agents.len())
        .map(|id| decide(&world.agents[id].genome, &sense(world, id, phys)))
        .collect()
}

/// Executes `actions` (indexed by agent id) in phases: costs, eating,
/// movement, mating, deaths.
pub fn resolve_actions<R: Rng + ?Sized>(
    world: &mut World,
    actions: &[Action],
    phys: &PhysiologyParams,
    evo: &EvolutionParams,
    rng: &mut R,
    t: u64,
) -> Result<StepRecord, EngineError> {
    let n_agents = world.agents.len();
    if actions.len() != n_agents {
        return Err(EngineError::ActionMismatch {
            expected: n_agents,
            got: actions.len(),
        });
    }
    let mut rec = StepRecord {
        t,
        population: n_agents,
        births: 0,
        deaths: 0,
        grass_cells: world.grass_cells(),
        actions: [0; N_ACTIONS],
        total_energy: world.total_energy(),
        population_after: 0,
        energy_after: 0.0,
        ledger: EnergyLedger::default(),
    };

    // costs
    for (agent, &action) in world.agents.iter_mut().zip(actions) {
        let cost = action_cost(action, phys);
        agent.energy -= cost;
        rec.ledger.costs_paid += cost;
        rec.actions[action.index()] += 1;
    }

    // eating
    for (agent, &action) in world.agents.iter_mut().zip(actions) {
        if action == Action::Eat && world.cells[agent.position].grass.take().is_some() {
            agent.energy += phys.eat_gain;
            rec.ledger.gains_from_eating += phys.eat_gain;
        }
    }

    // movement
    let mut movers: Vec<AgentId> = (0..n_agents)
        .filter(|&i| {
            matches!(
                actions[i],
                Action::MoveLeft | Action::MoveRight | Action::Jump
            )
        })
        .collect();
    movers.shuffle(rng);
    for id in movers {
        let from = world.agents[id].position;
        let to = match actions[id] {
            Action::MoveLeft => world.left_of(from),
            Action::MoveRight => world.right_of(from),
            _ => {
                let dir = if rng.gen::<bool>() { 1 } else { -1 };
                world.offset(from, phys.jump_distance, dir)
            }
        };
        if to != from && world.is_free(to) {
            world.cells[from].occupant = None;
            world.cells[to].occupant = Some(id);
            world.agents[id].position = to;
        }
    }

    // mating: (left partner chose MateRight, right partner chose MateLeft)
    let mut pairs: Vec<(AgentId, AgentId)> = Vec::new();
    for (i, &action) in actions.iter().enumerate() {
        if action != Action::MateRight {
            continue;
        }
        let right = world.right_of(world.agents[i].position);
        if let Some(j) = world.cells[right].occupant {
            if j < n_agents && actions[j] == Action::MateLeft {
                pairs.push((i, j));
            }
        }
    }
    pairs.shuffle(rng);
    let half = phys.child_transfer_total / 2.0;
    for (i, j) in pairs {
        let outer_left = world.left_of(world.agents[i].position);
        let outer_right = world.right_of(world.agents[j].position);
        let mut free: Vec<usize> = Vec::with_capacity(2);
        if world.is_free(outer_left) {
            free.push(outer_left);
        }
        if outer_right != outer_left && world.is_free(outer_right) {
            free.push(outer_right);
        }
        let cell = match free.len() {
            0 => continue,
            1 => free[0],
            _ => free[rng.gen_range(0..2)],
        };
        let genome = offspring_genome(&world.agents[i].genome, &world.agents[j].genome, evo, rng);
        // a parent gives at most what it holds, so births never create energy
        let mut given = 0.0;
        for p in [i, j] {
            let share = half.min(world.agents[p].energy.max(0.0));
            world.agents[p].energy -= share;
            given += share;
        }
        rec.ledger.energy_from_parents += given;
        rec.ledger.energy_to_newborns += given;
        world
            .add_agent(Agent {
                position: cell,
                energy: given,
                genome,
            })
            .expect("birth cell checked free");
        rec.births += 1;
    }

    // deaths
    let before = world.agents.len();
    let mut lost = 0.0;
    world.agents.retain(|a| {
        if a.energy > 0.0 {
            true
        } else {
            lost += a.energy;
            false
        }
    });
    rec.deaths = before - world.agents.len();
    rec.ledger.energy_lost_to_deaths = lost;
    if rec.deaths > 0 || rec.births > 0 {
        world.reindex();
    }

    rec.population_after = world.agents.len();
    rec.energy_after = world.total_energy();
    Ok(rec)
}

pub fn step<R: Rng + ?Sized>(
    world: &mut World,
    phys: &PhysiologyParams,
    evo: &EvolutionParams,
    rng: &mut R,
    t: u64,
) -> StepRecord {
    grass_update(world, phys, rng);
    let actions = choose_actions(world, phys);
    resolve_actions(world, &actions, phys, evo, rng, t).expect("actions chosen for every agent")
}

/// A world together with the random stream and clock that drive it.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub config: RunConfig,
    pub world: World,
    pub rng: SimRng,
    /// Index of the next iteration to run.
    pub t: u64,
}

impl Simulation {
    /// Founding population: `initial_population` instinct agents at `R0`
    /// on distinct uniformly chosen cells.
    pub fn new(config: RunConfig) -> Self {
        let mut rng = seeded_rng(config.seed);
        let mut world = World::new(config.world.clone());
        let n = config.world.n_cells;
        let k = config.evolution.initial_population.min(n);
        let founder = instinct_genome();
        for pos in rand::seq::index::sample(&mut rng, n, k).into_iter() {
            world.add_agent(Agent {
                position: pos,
                energy: config.physiology.r0,
                genome: founder.clone(),
            });
        }
        Self {
            config,
            world,
            rng,
            t: 0,
        }
    }

    pub fn from_parts(config: RunConfig, world: World, rng_state: &RngState, t: u64) -> Self {
        Self {
            config,
            world,
            rng: rng_state.restore(),
            t,
        }
    }

    pub fn rng_state(&self) -> RngState {
        RngState::capture(&self.rng)
    }

    pub fn step(&mut self) -> StepRecord {
        let rec = step(
            &mut self.world,
            &self.config.physiology,
            &self.config.evolution,
            &mut self.rng,
            self.t,
        );
        self.t += 1;
        rec
    }

    pub fn is_finished(&self) -> bool {
        self.world.agents.is_empty() || self.t >= self.config.max_iterations
    }

    /// Steps until extinction or `max_iterations`, handing each record to `sink`.
    pub fn run_with<F: FnMut(&Simulation, &StepRecord)>(&mut self, mut sink: F) {
        while !self.is_finished() {
            let rec = self.step();
            sink(self, &rec);
        }
    }
}

/// Full record series of a fresh run seeded from `config.seed`.
pub fn run(config: &RunConfig) -> (Vec<StepRecord>, Simulation) {
    let mut sim = Simulation::new(config.clone());
    let mut records = Vec::new();
    sim.run_with(|_, rec| records.push(rec.clone()));
    (records, sim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{MotivationMode, WorldParams};

    fn world(n: usize, p_g: f64) -> World {
        World::new(WorldParams {
            n_cells: n,
            grass_probability: p_g,
            motivation_mode: MotivationMode::Enabled,
        })
    }

    fn agent(pos: usize, energy: f64) -> Agent {
        Agent {
            position: pos,
            energy,
            genome: instinct_genome(),
        }
    }

    fn phys() -> PhysiologyParams {
        PhysiologyParams::default()
    }

    #[test]
    fn grass_extremes() {
        let mut rng = seeded_rng(1);
        let mut w = world(50, 0.0);
        for _ in 0..100 {
            grass_update(&mut w, &phys(), &mut rng);
        }
        assert_eq!(w.grass_cells(), 0);
        let mut w = world(50, 1.0);
        grass_update(&mut w, &phys(), &mut rng);
        assert_eq!(w.grass_cells(), 50);
    }

    #[test]
    fn grass_lifetime() {
        let mut rng = seeded_rng(1);
        let mut w = world(10, 0.0);
        // created during the update of iteration t
        w.set_grass(3, phys().grass_lifetime);
        for _ in 1..20 {
            grass_update(&mut w, &phys(), &mut rng);
            assert!(w.cells[3].grass.is_some());
        }
        grass_update(&mut w, &phys(), &mut rng);
        assert!(w.cells[3].grass.is_none());
    }

    #[test]
    fn lone_agent_rests() {
        let mut w = world(20, 0.0);
        w.add_agent(agent(5, 100.0));
        assert_eq!(choose_actions(&w, &phys()), vec![Action::Rest]);
    }

    #[test]
    fn adjacent_pair_courts() {
        let mut w = world(20, 0.0);
        w.add_agent(agent(5, 100.0));
        w.add_agent(agent(6, 100.0));
        assert_eq!(
            choose_actions(&w, &phys()),
            vec![Action::MateRight, Action::MateLeft]
        );
        w.set_grass(5, 20);
        assert_eq!(choose_actions(&w, &phys())[0], Action::Eat);
    }

    #[test]
    fn rest_to_death() {
        let mut w = world(20, 0.0);
        w.add_agent(agent(5, 1.0));
        let rec = resolve_actions(
            &mut w,
            &[Action::Rest],
            &phys(),
            &EvolutionParams::default(),
            &mut seeded_rng(0),
            0,
        )
        .unwrap();
        assert_eq!(rec.deaths, 1);
        assert_eq!(rec.population_after, 0);
        assert!(w.agents.is_empty());
        assert_eq!(rec.ledger_imbalance(), 0.0);
    }

    #[test]
    fn coordinated_birth() {
        let mut w = world(20, 0.0);
        w.add_agent(agent(5, 5000.0));
        w.add_agent(agent(6, 5000.0));
        let rec = resolve_actions(
            &mut w,
            &[Action::MateRight, Action::MateLeft],
            &phys(),
            &EvolutionParams::default(),
            &mut seeded_rng(0),
            0,
        )
        .unwrap();
        assert_eq!(rec.births, 1);
        assert_eq!(w.agents[0].energy, 5000.0 - 20.0 - 500.0);
        assert_eq!(w.agents[1].energy, 5000.0 - 20.0 - 500.0);
        assert_eq!(w.agents[2].energy, 1000.0);
        assert!(w.agents[2].position == 4 || w.agents[2].position == 7);
        assert_eq!(rec.ledger_imbalance(), 0.0);
        w.check_consistency().unwrap();
    }

    #[test]
    fn enclosed_pair_has_no_child() {
        let mut w = world(20, 0.0);
        for p in 4..=7 {
            w.add_agent(agent(p, 5000.0));
        }
        let acts = [
            Action::Rest,
            Action::MateRight,
            Action::MateLeft,
            Action::Rest,
        ];
        let rec = resolve_actions(
            &mut w,
            &acts,
            &phys(),
            &EvolutionParams::default(),
            &mut seeded_rng(0),
            0,
        )
        .unwrap();
        assert_eq!(rec.births, 0);
        assert_eq!(w.agents[1].energy, 4980.0);
        assert_eq!(w.agents[2].energy, 4980.0);
    }

    #[test]
    fn uncoordinated_mate_only_costs() {
        let mut w = world(20, 0.0);
        w.add_agent(agent(5, 100.0));
        w.add_agent(agent(6, 100.0));
        let rec = resolve_actions(
            &mut w,
            &[Action::MateRight, Action::Rest],
            &phys(),
            &EvolutionParams::default(),
            &mut seeded_rng(0),
            0,
        )
        .unwrap();
        assert_eq!(rec.births, 0);
        assert_eq!(w.agents[0].energy, 80.0);
    }

    #[test]
    fn blocked_move_stays_and_pays() {
        let mut w = world(20, 0.0);
        w.add_agent(agent(5, 100.0));
        w.add_agent(agent(6, 100.0));
        resolve_actions(
            &mut w,
            &[Action::MoveRight, Action::Rest],
            &phys(),
            &EvolutionParams::default(),
            &mut seeded_rng(0),
            0,
        )
        .unwrap();
        assert_eq!(w.agents[0].position, 5);
        assert_eq!(w.agents[0].energy, 96.0);
    }

    #[test]
    fn jump_lands_five_cells_away() {
        for seed in 0..10 {
            let mut w = world(20, 0.0);
            w.add_agent(agent(10, 100.0));
            resolve_actions(
                &mut w,
                &[Action::Jump],
                &phys(),
                &EvolutionParams::default(),
                &mut seeded_rng(seed),
                0,
            )
            .unwrap();
            assert!(matches!(w.agents[0].position, 5 | 15));
            assert_eq!(w.agents[0].energy, 80.0);
        }
    }

    #[test]
    fn eating_consumes_patch() {
        let mut w = world(20, 0.0);
        w.add_agent(agent(5, 100.0));
        w.set_grass(5, 7);
        let rec = resolve_actions(
            &mut w,
            &[Action::Eat],
            &phys(),
            &EvolutionParams::default(),
            &mut seeded_rng(0),
            0,
        )
        .unwrap();
        assert_eq!(w.agents[0].energy, 100.0 - 2.0 + 200.0);
        assert!(w.cells[5].grass.is_none());
        assert_eq!(rec.ledger.gains_from_eating, 200.0);
    }

    #[test]
    fn action_map_mismatch() {
        let mut w = world(20, 0.0);
        w.add_agent(agent(5, 100.0));
        let err = resolve_actions(
            &mut w,
            &[],
            &phys(),
            &EvolutionParams::default(),
            &mut seeded_rng(0),
            0,
        )
        .unwrap_err();
        assert_eq!(
            err,
            EngineError::ActionMismatch {
                expected: 1,
                got: 0
            }
        );
    }

    #[test]
    fn empty_world_step() {
        let mut w = world(30, 0.5);
        let rec = step(
            &mut w,
            &phys(),
            &EvolutionParams::default(),
            &mut seeded_rng(4),
            0,
        );
        assert_eq!(rec.population, 0);
        assert_eq!(rec.births + rec.deaths, 0);
        assert_eq!(rec.actions, [0; N_ACTIONS]);
        assert!(w.grass_cells() > 0);
    }

    #[test]
    fn lone_agent_lifetime() {
        let mut w = world(30, 0.0);
        w.add_agent(agent(3, 37.0));
        let mut rng = seeded_rng(0);
        let mut t = 0;
        while !w.agents.is_empty() {
            step(&mut w, &phys(), &EvolutionParams::default(), &mut rng, t);
            t += 1;
        }
        assert_eq!(t, 37);
    }

    #[test]
    fn zero_transfer_newborn_dies_immediately() {
        let mut p = phys();
        p.child_transfer_total = 0.0;
        let mut w = world(20, 0.0);
        w.add_agent(agent(5, 100.0));
        w.add_agent(agent(6, 100.0));
        let rec = resolve_actions(
            &mut w,
            &[Action::MateRight, Action::MateLeft],
            &p,
            &EvolutionParams::default(),
            &mut seeded_rng(0),
            0,
        )
        .unwrap();
        assert_eq!((rec.births, rec.deaths), (1, 1));
        assert_eq!(w.agents.len(), 2);
    }

    #[test]
    fn poor_parent_gives_only_what_it_holds() {
        let mut w = world(20, 0.0);
        w.add_agent(agent(5, 320.0));
        w.add_agent(agent(6, 5000.0));
        let rec = resolve_actions(
            &mut w,
            &[Action::MateRight, Action::MateLeft],
            &phys(),
            &EvolutionParams::default(),
            &mut seeded_rng(0),
            0,
        )
        .unwrap();
        // 320 - 20 leaves 300 to give; the poor parent ends at exactly 0 and dies
        assert_eq!((rec.births, rec.deaths), (1, 1));
        assert_eq!(w.agents.len(), 2);
        assert_eq!(w.agents[0].energy, 4480.0);
        assert_eq!(w.agents[1].energy, 800.0);
        assert_eq!(rec.ledger.energy_to_newborns, 800.0);
        assert_eq!(rec.ledger.energy_lost_to_deaths, 0.0);
        assert!(rec.ledger_imbalance().abs() < 1e-9);
    }

    #[test]
    fn broke_parents_leave_a_stillborn() {
        let mut w = world(20, 0.0);
        w.add_agent(agent(5, 10.0));
        w.add_agent(agent(6, 15.0));
        let rec = resolve_actions(
            &mut w,
            &[Action::MateRight, Action::MateLeft],
            &phys(),
            &EvolutionParams::default(),
            &mut seeded_rng(0),
            0,
        )
        .unwrap();
        assert_eq!((rec.births, rec.deaths), (1, 3));
        assert!(w.agents.is_empty());
        assert_eq!(rec.ledger.energy_to_newborns, 0.0);
        assert_eq!(rec.ledger.energy_lost_to_deaths, -15.0);
        assert!(rec.ledger_imbalance().abs() < 1e-9);
    }

    #[test]
    fn three_cell_ring_birth() {
        let mut w = world(3, 0.0);
        w.add_agent(agent(0, 5000.0));
        w.add_agent(agent(1, 5000.0));
        let rec = resolve_actions(
            &mut w,
            &[Action::MateRight, Action::MateLeft],
            &phys(),
            &EvolutionParams::default(),
            &mut seeded_rng(0),
            0,
        )
        .unwrap();
        assert_eq!(rec.births, 1);
        assert_eq!(w.agents[2].position, 2);
    }
}
