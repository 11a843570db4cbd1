//! Gibbs sampling for general hybrid networks.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::elimination::{categorical, resolve_evidence, resolve_query};
use super::sampling::{draw_discrete, draw_normal, sample_into, sample_local};
use super::{Component, InferenceError, Marginal, Marginals};
use crate::model::{BayesianNetwork, Cell, Cpd};
use crate::script::Evidence;

/// Attempts at finding an initial state consistent with the evidence.
const MAX_RESTARTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GibbsOptions {
    /// Total sweeps, including burn-in.
    pub samples: usize,
    pub burn_in: usize,
    pub seed: u64,
}

impl Default for GibbsOptions {
    fn default() -> Self {
        GibbsOptions { samples: 50_000, burn_in: 5_000, seed: 0 }
    }
}

/// Approximate posteriors from the sweeps after burn-in.
///
/// Discrete marginals average the sampled conditionals of each sweep. A
/// continuous marginal is a mixture with one component per configuration
/// of the variable's discrete parents, fitted to the samples drawn under it.
pub fn gibbs_query(
    net: &BayesianNetwork,
    evidence: &Evidence,
    query: &[String],
    opts: &GibbsOptions,
) -> Result<Marginals, InferenceError> {
    if opts.samples <= opts.burn_in {
        return Err(InferenceError::InvalidSettings(format!(
            "samples ({}) must exceed burn-in ({})",
            opts.samples, opts.burn_in
        )));
    }
    let observed = resolve_evidence(net, evidence)?;
    let query = resolve_query(net, query)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut chain = GibbsChain::new(net, &observed, &mut rng)?;

    let kept = opts.samples - opts.burn_in;
    let mut discrete: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    let mut continuous: BTreeMap<usize, BTreeMap<usize, Moments>> = BTreeMap::new();
    for &q in &query {
        if net.variable(q).domain.is_discrete() {
            discrete.insert(q, vec![0.0; net.cardinality(q)]);
        } else {
            continuous.insert(q, BTreeMap::new());
        }
    }

    for t in 0..opts.samples {
        chain.sweep(&mut rng);
        if t < opts.burn_in {
            continue;
        }
        for (&q, acc) in discrete.iter_mut() {
            match observed[q] {
                Some(Cell::State(s)) => acc[s] += 1.0,
                _ => {
                    for (a, p) in acc.iter_mut().zip(chain.discrete_conditional(q)) {
                        *a += p;
                    }
                }
            }
        }
        for (&q, groups) in continuous.iter_mut() {
            let cfg = net.config_index(q, &chain.cells);
            groups.entry(cfg).or_default().add(chain.cells[q].real());
        }
    }

    let mut out = Marginals::default();
    for q in query {
        let marginal = match discrete.remove(&q) {
            Some(acc) => categorical(net, q, acc.iter().map(|a| a / kept as f64).collect()),
            None => Marginal::GaussianMixture {
                components: continuous[&q]
                    .values()
                    .map(|m| m.component(kept))
                    .collect(),
            },
        };
        out.push(&net.variable(q).name, marginal);
    }
    Ok(out)
}

#[derive(Default)]
struct Moments {
    count: usize,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn add(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn component(&self, total: usize) -> Component {
        let n = self.count as f64;
        let mean = self.sum / n;
        Component { weight: n / total as f64, mean, variance: (self.sum_sq / n - mean * mean).max(0.0) }
    }
}

/// A Markov chain over full network states with the evidence clamped.
pub(crate) struct GibbsChain<'a> {
    net: &'a BayesianNetwork,
    pub cells: Vec<Cell>,
    clamped: Vec<bool>,
}

impl<'a> GibbsChain<'a> {
    /// Starts from a forward sample with evidence clamped, retrying until the
    /// state has positive probability.
    pub fn new<R: Rng>(net: &'a BayesianNetwork, observed: &[Option<Cell>], rng: &mut R) -> Result<Self, InferenceError> {
        let clamped: Vec<bool> = observed.iter().map(Option::is_some).collect();
        let mut cells: Vec<Cell> = (0..net.len())
            .map(|i| observed[i].unwrap_or(if net.variable(i).domain.is_discrete() { Cell::State(0) } else { Cell::Real(0.0) }))
            .collect();
        for _ in 0..MAX_RESTARTS {
            sample_into(net, &mut cells, &clamped, rng);
            if net.log_joint_cells(&cells) > f64::NEG_INFINITY {
                return Ok(GibbsChain { net, cells, clamped });
            }
        }
        Err(InferenceError::ZeroProbabilityEvidence)
    }

    /// Resamples every unclamped variable once, in topological order. A
    /// discrete variable is drawn jointly with its unobserved continuous leaf
    /// children: those integrate out of its conditional and are then redrawn
    /// given the new state.
    pub fn sweep<R: Rng>(&mut self, rng: &mut R) {
        for &i in self.net.topological_order() {
            if self.clamped[i] {
                continue;
            }
            if self.net.variable(i).domain.is_discrete() {
                self.cells[i] = Cell::State(draw_discrete(&self.discrete_conditional(i), rng));
                for &c in self.net.children(i) {
                    if self.is_free_leaf(c) {
                        self.cells[c] = sample_local(self.net, c, &self.cells, rng);
                    }
                }
            } else {
                let (mean, variance) = self.gaussian_conditional(i);
                self.cells[i] = Cell::Real(draw_normal(mean, variance, rng));
            }
        }
    }

    fn is_free_leaf(&self, c: usize) -> bool {
        !self.clamped[c] && !self.net.variable(c).domain.is_discrete() && self.net.children(c).is_empty()
    }

    /// P(X_i | everything except X_i and its free continuous leaf children)
    /// for a discrete variable.
    pub fn discrete_conditional(&mut self, i: usize) -> Vec<f64> {
        let saved = self.cells[i];
        let children: Vec<usize> = self.net.children(i).iter().copied().filter(|&c| !self.is_free_leaf(c)).collect();
        let logs: Vec<f64> = (0..self.net.cardinality(i))
            .map(|s| {
                self.cells[i] = Cell::State(s);
                self.net.local_log_prob(i, &self.cells)
                    + children.iter().map(|&c| self.net.local_log_prob(c, &self.cells)).sum::<f64>()
            })
            .collect();
        self.cells[i] = saved;
        let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
        let total: f64 = weights.iter().sum();
        weights.into_iter().map(|w| w / total).collect()
    }

    /// Mean and variance of the Gaussian full conditional of a continuous
    /// variable: its own CLG prior combined with each child's linear term.
    fn gaussian_conditional(&self, i: usize) -> (f64, f64) {
        let net = self.net;
        let Cpd::Clg(own) = net.cpd(i) else { unreachable!() };
        let row = &own.rows[net.config_index(i, &self.cells)];
        let mut precision = 1.0 / row.variance;
        let mut weighted = net.clg_mean(i, row, &self.cells) / row.variance;
        for &c in net.children(i) {
            let Cpd::Clg(child) = net.cpd(c) else { unreachable!("discrete child of a continuous variable") };
            let crow = &child.rows[net.config_index(c, &self.cells)];
            let k = net.continuous_parents(c).iter().position(|&p| p == i).unwrap();
            let b = crow.coefficients[k];
            let rest = net.clg_mean(c, crow, &self.cells) - b * self.cells[i].real();
            precision += b * b / crow.variance;
            weighted += b * (self.cells[c].real() - rest) / crow.variance;
        }
        (weighted / precision, 1.0 / precision)
    }
}
