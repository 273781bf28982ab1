//! Population statistics and behavioral probing of evolved controllers.
//!
//! A controller is probed on every combination of the five binary external
//! sensors and the four corners of the (M_E, M_R) square. The two physically
//! reachable corners are "hungry" (M_E=1, M_R=0) and "sated" (M_E=0, M_R=1);
//! the classifier reads only those.

use std::fmt;

use crate::controller::decide;
use crate::model::{input, Action, Agent, Genome, SensoryVector, GENOME_LEN, N_INPUTS};

#[derive(Debug, Clone, PartialEq)]
pub struct WeightStats {
    pub t: u64,
    pub mean: [f64; GENOME_LEN],
    /// Population (not sample) standard deviation.
    pub std: [f64; GENOME_LEN],
}

/// Per-gene mean and standard deviation; `None` for an empty population.
pub fn weight_stats<'a, I>(genomes: I, t: u64) -> Option<WeightStats>
where
    I: IntoIterator<Item = &'a Genome>,
{
    // Welford's running update
    let mut n = 0u64;
    let mut mean = [0.0; GENOME_LEN];
    let mut m2 = [0.0; GENOME_LEN];
    for g in genomes {
        n += 1;
        let nf = n as f64;
        for i in 0..GENOME_LEN {
            let x = g.0[i];
            let delta = x - mean[i];
            mean[i] += delta / nf;
            m2[i] += delta * (x - mean[i]);
        }
    }
    if n == 0 {
        return None;
    }
    let std = m2.map(|s| (s / n as f64).max(0.0).sqrt());
    Some(WeightStats { t, mean, std })
}

/// One probe row: the five binary external sensors plus a motivation corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ProbeSituation {
    pub food_left: bool,
    pub food_here: bool,
    pub food_right: bool,
    pub agent_left: bool,
    pub agent_right: bool,
    pub m_e: bool,
    pub m_r: bool,
}

pub const N_PATTERNS: usize = 32;
pub const N_CORNERS: usize = 4;
pub const N_PROBES: usize = N_PATTERNS * N_CORNERS;

impl ProbeSituation {
    /// Bits 0..5 of `pattern` are food_left, food_here, food_right,
    /// agent_left, agent_right.
    pub fn new(pattern: usize, m_e: bool, m_r: bool) -> Self {
        let bit = |i: usize| pattern & (1 << i) != 0;
        Self {
            food_left: bit(0),
            food_here: bit(1),
            food_right: bit(2),
            agent_left: bit(3),
            agent_right: bit(4),
            m_e,
            m_r,
        }
    }

    pub fn pattern(&self) -> usize {
        [
            self.food_left,
            self.food_here,
            self.food_right,
            self.agent_left,
            self.agent_right,
        ]
        .iter()
        .enumerate()
        .map(|(i, &b)| (b as usize) << i)
        .sum()
    }

    pub fn corner(&self) -> usize {
        ((self.m_e as usize) << 1) | self.m_r as usize
    }

    pub fn index(&self) -> usize {
        self.pattern() * N_CORNERS + self.corner()
    }

    pub fn has_food(&self) -> bool {
        self.food_left || self.food_here || self.food_right
    }

    /// Neighbors are assumed to share the probed mating motivation.
    pub fn to_input(&self) -> SensoryVector {
        let f = |b: bool| if b { 1.0 } else { 0.0 };
        let m_r = f(self.m_r);
        let mut x = [0.0; N_INPUTS];
        x[input::FOOD_LEFT] = f(self.food_left);
        x[input::FOOD_HERE] = f(self.food_here);
        x[input::FOOD_RIGHT] = f(self.food_right);
        x[input::AGENT_LEFT] = f(self.agent_left);
        x[input::AGENT_RIGHT] = f(self.agent_right);
        x[input::MATE_LEFT] = if self.agent_left { m_r } else { 0.0 };
        x[input::MATE_RIGHT] = if self.agent_right { m_r } else { 0.0 };
        x[input::M_E] = f(self.m_e);
        x[input::M_R] = m_r;
        x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Corner {
    /// M_E = 1, M_R = 0
    Hungry,
    /// M_E = 0, M_R = 1
    Sated,
}

impl Corner {
    fn flags(self) -> (bool, bool) {
        match self {
            Corner::Hungry => (true, false),
            Corner::Sated => (false, true),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BehaviorTable {
    /// Indexed by `ProbeSituation::index`.
    pub actions: [Action; N_PROBES],
}

impl BehaviorTable {
    pub fn get(&self, s: &ProbeSituation) -> Action {
        self.actions[s.index()]
    }

    pub fn at(&self, pattern: usize, corner: Corner) -> Action {
        let (m_e, m_r) = corner.flags();
        self.get(&ProbeSituation::new(pattern, m_e, m_r))
    }

    pub fn rows(&self) -> impl Iterator<Item = (ProbeSituation, Action)> + '_ {
        (0..N_PATTERNS).flat_map(move |p| {
            (0..N_CORNERS).map(move |c| {
                let s = ProbeSituation::new(p, c & 2 != 0, c & 1 != 0);
                (s, self.actions[s.index()])
            })
        })
    }

    /// Number of patterns whose action differs between two corners.
    pub fn corner_mismatches(&self, a: usize, b: usize) -> usize {
        (0..N_PATTERNS)
            .filter(|p| self.actions[p * N_CORNERS + a] != self.actions[p * N_CORNERS + b])
            .count()
    }
}

pub fn probe_agent(genome: &Genome) -> BehaviorTable {
    let mut actions = [Action::Rest; N_PROBES];
    for pattern in 0..N_PATTERNS {
        for corner in 0..N_CORNERS {
            let s = ProbeSituation::new(pattern, corner & 2 != 0, corner & 1 != 0);
            actions[s.index()] = decide(genome, &s.to_input());
        }
    }
    BehaviorTable { actions }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeLabel {
    ReflexOnly,
    MotivationGated,
    Other,
}

impl SchemeLabel {
    pub const ALL: [SchemeLabel; 3] = [
        SchemeLabel::ReflexOnly,
        SchemeLabel::MotivationGated,
        SchemeLabel::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SchemeLabel::ReflexOnly => "reflex_only",
            SchemeLabel::MotivationGated => "motivation_gated",
            SchemeLabel::Other => "other",
        }
    }
}

impl fmt::Display for SchemeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RuleSummary {
    /// Food seeking at the hungry corner.
    pub food_seeking: bool,
    /// Mating with a lone neighbor at the sated corner.
    pub mating_on_neighbor: bool,
    /// Resting with an empty field of vision at both corners.
    pub rest_on_empty: bool,
}

impl RuleSummary {
    pub fn all(&self) -> bool {
        self.food_seeking && self.mating_on_neighbor && self.rest_on_empty
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchemeClassification {
    pub label: SchemeLabel,
    pub mating_suppressed_when_hungry: bool,
    pub rules: RuleSummary,
}

const AGENT_LEFT_ONLY: usize = 1 << 3;
const AGENT_RIGHT_ONLY: usize = 1 << 4;

/// Eat on food, otherwise step toward it (either side when food flanks both).
fn food_seeking_at(table: &BehaviorTable, corner: Corner) -> bool {
    (0..N_PATTERNS)
        .map(|p| ProbeSituation::new(p, false, false))
        .filter(ProbeSituation::has_food)
        .all(|s| {
            let a = table.at(s.pattern(), corner);
            if s.food_here {
                a == Action::Eat
            } else if s.food_left && s.food_right {
                matches!(a, Action::MoveLeft | Action::MoveRight)
            } else if s.food_left {
                a == Action::MoveLeft
            } else {
                a == Action::MoveRight
            }
        })
}

fn mates_with_lone_neighbor(table: &BehaviorTable, corner: Corner) -> [bool; 2] {
    [
        table.at(AGENT_LEFT_ONLY, corner) == Action::MateLeft,
        table.at(AGENT_RIGHT_ONLY, corner) == Action::MateRight,
    ]
}

fn rests_on_empty(table: &BehaviorTable, corner: Corner) -> bool {
    table.at(0, corner) == Action::Rest
}

pub fn classify_scheme(table: &BehaviorTable) -> SchemeClassification {
    use Corner::{Hungry, Sated};

    let rules = RuleSummary {
        food_seeking: food_seeking_at(table, Hungry),
        mating_on_neighbor: mates_with_lone_neighbor(table, Sated).iter().all(|&m| m),
        rest_on_empty: rests_on_empty(table, Hungry) && rests_on_empty(table, Sated),
    };

    let sated = mates_with_lone_neighbor(table, Sated);
    let hungry = mates_with_lone_neighbor(table, Hungry);
    let suppressed = sated.iter().zip(&hungry).all(|(&s, &h)| s && !h);

    let reflex_at_both = rules.all()
        && food_seeking_at(table, Sated)
        && mates_with_lone_neighbor(table, Hungry).iter().all(|&m| m);

    let label = if rules.all() && suppressed {
        SchemeLabel::MotivationGated
    } else if reflex_at_both && !suppressed {
        SchemeLabel::ReflexOnly
    } else {
        SchemeLabel::Other
    };
    SchemeClassification {
        label,
        mating_suppressed_when_hungry: suppressed,
        rules,
    }
}

pub fn classify_genome(genome: &Genome) -> SchemeClassification {
    classify_scheme(&probe_agent(genome))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationClassification {
    pub per_agent: Vec<SchemeClassification>,
    /// Fractions in `SchemeLabel::ALL` order.
    pub fractions: [f64; 3],
    pub mating_suppressed_fraction: f64,
    /// Most common label; earlier labels in `SchemeLabel::ALL` win ties.
    pub majority: SchemeLabel,
}

impl PopulationClassification {
    pub fn fraction(&self, label: SchemeLabel) -> f64 {
        self.fractions[label as usize]
    }
}

pub fn population_classification(agents: &[Agent]) -> Option<PopulationClassification> {
    if agents.is_empty() {
        return None;
    }
    let per_agent: Vec<_> = agents.iter().map(|a| classify_genome(&a.genome)).collect();
    let n = per_agent.len() as f64;
    let mut counts = [0usize; 3];
    let mut suppressed = 0usize;
    for c in &per_agent {
        counts[c.label as usize] += 1;
        suppressed += c.mating_suppressed_when_hungry as usize;
    }
    let mut majority = 0;
    for i in 1..3 {
        if counts[i] > counts[majority] {
            majority = i;
        }
    }
    Some(PopulationClassification {
        fractions: counts.map(|c| c as f64 / n),
        mating_suppressed_fraction: suppressed as f64 / n,
        majority: SchemeLabel::ALL[majority],
        per_agent,
    })
}
