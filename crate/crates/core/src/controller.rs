//! Single-layer logistic network and argmax action choice.

use crate::model::{Action, Genome, SensoryVector, N_ACTIONS, N_INPUTS};

pub type NetworkOutputs = [f64; N_ACTIONS];

pub fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Weighted input sums, one per action neuron.
pub fn scores(genome: &Genome, input: &SensoryVector) -> [f64; N_ACTIONS] {
    let w = genome.weights();
    let mut out = [0.0; N_ACTIONS];
    for (a, slot) in out.iter_mut().enumerate() {
        let row = &w[a * N_INPUTS..(a + 1) * N_INPUTS];
        *slot = row.iter().zip(input).map(|(w, x)| w * x).sum();
    }
    out
}

pub fn forward(genome: &Genome, input: &SensoryVector) -> NetworkOutputs {
    scores(genome, input).map(logistic)
}

/// Index of the largest value; the lowest index wins ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub fn select_action(outputs: &NetworkOutputs) -> Action {
    Action::ALL[argmax(outputs)]
}

pub fn decide(genome: &Genome, input: &SensoryVector) -> Action {
    select_action(&forward(genome, input))
}
