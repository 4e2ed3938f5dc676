//! Neighbourhoods and models of influence.

use super::config::{ModelOfInfluence, Topology};

/// Indices of particle `i`'s neighbourhood, sorted ascending.
pub fn neighborhood(topology: Topology, swarm_size: usize, i: usize) -> Vec<usize> {
    assert!(i < swarm_size, "particle index {i} out of range");
    match topology {
        Topology::FullyConnected => (0..swarm_size).collect(),
        Topology::Ring => {
            let mut n = vec![(i + swarm_size - 1) % swarm_size, i, (i + 1) % swarm_size];
            n.sort_unstable();
            n.dedup();
            n
        }
    }
}

/// Index of the lowest value among `candidates`; ties go to the lowest index.
pub fn best_index(candidates: &[usize], values: &[f64]) -> usize {
    let mut best = candidates[0];
    for &c in candidates {
        if values[c] < values[best] || (values[c] == values[best] && c < best) {
            best = c;
        }
    }
    best
}

/// An informant: whose personal best is used and with what weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Informant {
    pub index: usize,
    pub weight: f64,
}

/// Best-of-neighbourhood yields the cognitive informant `i` followed by the
/// social informant (best personal best in the neighbourhood), both with unit
/// weight. Fully-informed yields every neighbour (including `i`) with weight
/// `1/|N|`.
pub fn informants(
    model: ModelOfInfluence,
    neighborhood: &[usize],
    personal_best_values: &[f64],
    i: usize,
) -> Vec<Informant> {
    assert!(!neighborhood.is_empty(), "empty neighbourhood");
    match model {
        ModelOfInfluence::BestOfNeighborhood => vec![
            Informant { index: i, weight: 1.0 },
            Informant { index: best_index(neighborhood, personal_best_values), weight: 1.0 },
        ],
        ModelOfInfluence::FullyInformed => {
            let w = 1.0 / neighborhood.len() as f64;
            neighborhood.iter().map(|&k| Informant { index: k, weight: w }).collect()
        }
    }
}
