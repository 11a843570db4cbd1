//! Ancestral (forward) sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::Dataset;
use crate::model::{BayesianNetwork, Cell, Cpd};

/// Draws `n` independent rows from the joint distribution; deterministic
/// given `seed`.
pub fn sample_forward(net: &BayesianNetwork, n: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells = vec![Cell::State(0); net.len()];
    let clamped = vec![false; net.len()];
    let rows = (0..n)
        .map(|_| {
            sample_into(net, &mut cells, &clamped, &mut rng);
            cells.clone()
        })
        .collect();
    Dataset::new(net.variables().to_vec(), rows).expect("sampled cells match their domains")
}

/// Samples every unclamped variable in topological order, given its parents'
/// current cells.
pub(crate) fn sample_into<R: Rng>(net: &BayesianNetwork, cells: &mut [Cell], clamped: &[bool], rng: &mut R) {
    for &i in net.topological_order() {
        if !clamped[i] {
            cells[i] = sample_local(net, i, cells, rng);
        }
    }
}

pub(crate) fn sample_local<R: Rng>(net: &BayesianNetwork, i: usize, cells: &[Cell], rng: &mut R) -> Cell {
    let cfg = net.config_index(i, cells);
    match net.cpd(i) {
        Cpd::Table(t) => Cell::State(draw_discrete(&t.rows[cfg], rng)),
        Cpd::Clg(c) => {
            let row = &c.rows[cfg];
            Cell::Real(draw_normal(net.clg_mean(i, row, cells), row.variance, rng))
        }
    }
}

/// Index drawn from non-negative weights (need not be normalized).
pub(crate) fn draw_discrete<R: Rng>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (k, w) in weights.iter().enumerate() {
        if u < *w {
            return k;
        }
        u -= w;
    }
    // Rounding can leave `u` a hair above the last weight.
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

pub(crate) fn draw_normal<R: Rng>(mean: f64, variance: f64, rng: &mut R) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    mean + variance.sqrt() * z
}
