//! Random network generation for property tests and benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{BayesianNetwork, Cpd, DiscreteTable, Variable};
use crate::script::Evidence;

/// Most parents any generated variable gets.
pub const MAX_GENERATED_PARENTS: usize = 3;

/// Builds an all-discrete network with variables `V0..Vn` (`cards[i]`
/// states each). `arcs[i * n + j]` requests an arc `Vi -> Vj`; only `i < j`
/// is honoured so the graph is acyclic, and each variable keeps at most
/// [`MAX_GENERATED_PARENTS`] parents. Table entries are drawn from `seed`.
pub fn random_network(cards: &[usize], arcs: &[bool], seed: u64) -> BayesianNetwork {
    let n = cards.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let variables: Vec<Variable> = cards
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let states: Vec<String> = (0..c).map(|s| format!("s{s}")).collect();
            let refs: Vec<&str> = states.iter().map(String::as_str).collect();
            Variable::discrete(&format!("V{i}"), &refs)
        })
        .collect();
    let mut cpds = Vec::with_capacity(n);
    for j in 0..n {
        let parents: Vec<usize> =
            (0..j).filter(|&i| arcs.get(i * n + j).copied().unwrap_or(false)).take(MAX_GENERATED_PARENTS).collect();
        let configs: usize = parents.iter().map(|&p| cards[p]).product();
        let rows = (0..configs)
            .map(|_| {
                let raw: Vec<f64> = (0..cards[j]).map(|_| rng.random_range(0.05..1.0)).collect();
                let sum: f64 = raw.iter().sum();
                raw.into_iter().map(|x| x / sum).collect()
            })
            .collect();
        cpds.push(Cpd::Table(DiscreteTable {
            parents: parents.iter().map(|&p| format!("V{p}")).collect(),
            rows,
        }));
    }
    BayesianNetwork::new(variables, cpds).expect("generated network is well formed")
}

/// Random binary network: each forward pair gets an arc with probability
/// `density`.
pub fn random_binary_network(n: usize, density: f64, seed: u64) -> BayesianNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let arcs: Vec<bool> = (0..n * n).map(|_| rng.random_bool(density)).collect();
    random_network(&vec![2; n], &arcs, seed)
}

/// Observes a random subset of variables (each with probability one third)
/// at random states.
pub fn random_evidence(net: &BayesianNetwork, seed: u64) -> Evidence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut e = Evidence::new();
    for v in net.variables() {
        if rng.random_bool(1.0 / 3.0) {
            let states = v.domain.states().expect("discrete network");
            e = e.with_state(&v.name, &states[rng.random_range(0..states.len())]);
        }
    }
    e
}

/// Brute-force posteriors of every variable of an all-discrete network by
/// summing the full joint. `None` when the evidence has probability zero.
pub fn enumerate_posteriors(net: &BayesianNetwork, evidence: &Evidence) -> Option<Vec<Vec<f64>>> {
    let observed: Vec<Option<usize>> = (0..net.len())
        .map(|i| evidence.get(&net.variable(i).name).map(|o| net.resolve(i, o).expect("valid evidence").state()))
        .collect();
    let cards: Vec<usize> = (0..net.len()).map(|i| net.cardinality(i)).collect();
    let mut sums: Vec<Vec<f64>> = cards.iter().map(|&c| vec![0.0; c]).collect();
    let mut digits = vec![0usize; net.len()];
    for p in net.dense_joint() {
        if observed.iter().zip(&digits).all(|(o, d)| o.is_none_or(|s| s == *d)) {
            for (i, &d) in digits.iter().enumerate() {
                sums[i][d] += p;
            }
        }
        for k in (0..digits.len()).rev() {
            digits[k] += 1;
            if digits[k] < cards[k] {
                break;
            }
            digits[k] = 0;
        }
    }
    let total: f64 = sums.first().map_or(1.0, |s| s.iter().sum());
    if total <= 0.0 {
        return None;
    }
    Some(sums.into_iter().map(|row| row.into_iter().map(|x| x / total).collect()).collect())
}
