//! Genetic operators and the instinct genome of the founding population.

use rand::Rng;

use crate::model::{input, Action, EvolutionParams, Genome, GENOME_LEN};

/// Uniform recombination: each gene comes from either parent with probability 1/2.
pub fn recombine<R: Rng + ?Sized>(a: &Genome, b: &Genome, rng: &mut R) -> Genome {
    let mut child = Genome::zeros();
    for i in 0..GENOME_LEN {
        child.0[i] = if rng.gen::<bool>() { b.0[i] } else { a.0[i] };
    }
    child
}

/// Adds an independent uniform draw from `[-p_m, p_m]` to every gene.
pub fn mutate<R: Rng + ?Sized>(genome: &Genome, p_m: f64, rng: &mut R) -> Genome {
    let mut out = genome.clone();
    for w in out.0.iter_mut() {
        // Always draw so the stream position does not depend on p_m.
        let u: f64 = rng.gen();
        *w += p_m * (2.0 * u - 1.0);
    }
    out
}

pub fn offspring_genome<R: Rng + ?Sized>(
    a: &Genome,
    b: &Genome,
    params: &EvolutionParams,
    rng: &mut R,
) -> Genome {
    let child = recombine(a, b, rng);
    mutate(&child, params.mutation_intensity, rng)
}

/// Hand-built founder genome: food replenishment, mating with a seen
/// neighbor, and jumping away when boxed in. All motivational weights are 0.
pub fn instinct_genome() -> Genome {
    use input::*;
    let mut g = Genome::zeros();
    g.set(Action::MoveLeft, FOOD_LEFT, 4.0);
    g.set(Action::MoveLeft, FOOD_HERE, -8.0);
    g.set(Action::MoveRight, FOOD_RIGHT, 4.0);
    g.set(Action::MoveRight, FOOD_HERE, -8.0);
    g.set(Action::Eat, FOOD_HERE, 8.0);
    g.set(Action::Jump, AGENT_LEFT, 1.5);
    g.set(Action::Jump, AGENT_RIGHT, 1.5);
    g.set(Action::MateLeft, AGENT_LEFT, 2.0);
    g.set(Action::MateLeft, AGENT_RIGHT, -2.0);
    g.set(Action::MateRight, AGENT_RIGHT, 2.0);
    g.set(Action::MateRight, AGENT_LEFT, -2.0);
    g
}
