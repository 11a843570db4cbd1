use std::collections::{BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{learn_parameters, LearnError, LearnOptions, Structure};
use crate::inference::Dataset;
use crate::model::{BayesianNetwork, Cell};

/// Probability of each forward arc in a random restart graph.
const RESTART_ARC_DENSITY: f64 = 0.3;

/// Smallest score gain that counts as an improvement.
const MIN_GAIN: f64 = 1e-9;

/// Greedy hill climbing over add, delete and reverse moves, maximizing BIC
/// of the Dirichlet-smoothed fit. The first run starts from the empty graph,
/// later restarts from random DAGs drawn from one seeded stream. Among equal
/// scores the move (or run) found first in lexicographic order wins. The
/// winning structure comes back with fitted parameters.
pub fn learn_structure(data: &Dataset, opts: &LearnOptions) -> Result<(BayesianNetwork, Vec<String>), LearnError> {
    if data.variables().len() < 2 {
        return Err(LearnError::TooFewColumns);
    }
    if data.is_empty() {
        return Err(LearnError::EmptyDataset);
    }
    if let Some(v) = data.variables().iter().find(|v| !v.domain.is_discrete()) {
        return Err(LearnError::ContinuousColumn(v.name.clone()));
    }
    let alpha = opts.dirichlet_alpha;
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(LearnError::InvalidAlpha(alpha));
    }

    let mut search = Search::new(data, alpha);
    let d = data.variables().len();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<(f64, Vec<BTreeSet<usize>>)> = None;
    for restart in 0..opts.restarts.max(1) {
        let start = if restart == 0 { vec![BTreeSet::new(); d] } else { random_dag(d, opts.max_parents, &mut rng) };
        let (score, graph) = search.climb(start, opts.max_parents);
        if best.as_ref().is_none_or(|(s, _)| score > *s) {
            best = Some((score, graph));
        }
    }
    let (_, graph) = best.expect("at least one run");
    let structure = Structure {
        variables: data.variables().to_vec(),
        parents: graph
            .iter()
            .map(|ps| ps.iter().map(|&p| data.variables()[p].name.clone()).collect())
            .collect(),
    };
    learn_parameters(&structure, data, opts)
}

struct Search {
    columns: Vec<Vec<usize>>,
    cards: Vec<usize>,
    alpha: f64,
    ln_n: f64,
    cache: HashMap<(usize, Vec<usize>), f64>,
}

impl Search {
    fn new(data: &Dataset, alpha: f64) -> Self {
        let d = data.variables().len();
        let columns = (0..d).map(|c| data.rows().iter().map(|r| Cell::state(r[c])).collect()).collect();
        Search {
            columns,
            cards: data.variables().iter().map(|v| v.domain.cardinality()).collect(),
            alpha,
            ln_n: (data.len() as f64).ln(),
            cache: HashMap::new(),
        }
    }

    /// BIC term of `child` with the given parents, using smoothed estimates.
    fn family(&mut self, child: usize, parents: &BTreeSet<usize>) -> f64 {
        let key = (child, parents.iter().copied().collect::<Vec<_>>());
        if let Some(&s) = self.cache.get(&key) {
            return s;
        }
        let k = self.cards[child];
        let configs: usize = parents.iter().map(|&p| self.cards[p]).product();
        let mut counts = vec![0.0; configs * k];
        for r in 0..self.columns[child].len() {
            let cfg = parents.iter().fold(0, |acc, &p| acc * self.cards[p] + self.columns[p][r]);
            counts[cfg * k + self.columns[child][r]] += 1.0;
        }
        let mut loglik = 0.0;
        for row in counts.chunks(k) {
            let total: f64 = row.iter().sum::<f64>() + self.alpha * k as f64;
            for &n in row.iter().filter(|&&n| n > 0.0) {
                loglik += n * ((n + self.alpha) / total).ln();
            }
        }
        let score = loglik - (configs * (k - 1)) as f64 / 2.0 * self.ln_n;
        self.cache.insert(key, score);
        score
    }

    fn climb(&mut self, mut graph: Vec<BTreeSet<usize>>, max_parents: usize) -> (f64, Vec<BTreeSet<usize>>) {
        let d = graph.len();
        let mut family: Vec<f64> = (0..d).map(|c| self.family(c, &graph[c])).collect();
        loop {
            let mut best: Option<(f64, Move)> = None;
            for a in 0..d {
                for b in (0..d).filter(|&b| b != a) {
                    for mv in [Move::Add(a, b), Move::Delete(a, b), Move::Reverse(a, b)] {
                        let Some(gain) = self.gain(&graph, &family, mv, max_parents) else { continue };
                        if gain > MIN_GAIN && best.as_ref().is_none_or(|(g, _)| gain > *g) {
                            best = Some((gain, mv));
                        }
                    }
                }
            }
            let Some((_, mv)) = best else { break };
            match mv {
                Move::Add(a, b) => {
                    graph[b].insert(a);
                }
                Move::Delete(a, b) => {
                    graph[b].remove(&a);
                }
                Move::Reverse(a, b) => {
                    graph[b].remove(&a);
                    graph[a].insert(b);
                }
            }
            for c in [mv.ends().0, mv.ends().1] {
                family[c] = self.family(c, &graph[c]);
            }
        }
        (family.iter().sum(), graph)
    }

    /// Score change of a legal move, or `None` if the move is not allowed.
    fn gain(&mut self, graph: &[BTreeSet<usize>], family: &[f64], mv: Move, max_parents: usize) -> Option<f64> {
        match mv {
            Move::Add(a, b) => {
                if graph[b].contains(&a) || graph[a].contains(&b) || graph[b].len() >= max_parents || reaches(graph, b, a) {
                    return None;
                }
                let mut ps = graph[b].clone();
                ps.insert(a);
                Some(self.family(b, &ps) - family[b])
            }
            Move::Delete(a, b) => {
                if !graph[b].contains(&a) {
                    return None;
                }
                let mut ps = graph[b].clone();
                ps.remove(&a);
                Some(self.family(b, &ps) - family[b])
            }
            Move::Reverse(a, b) => {
                if !graph[b].contains(&a) || graph[a].len() >= max_parents {
                    return None;
                }
                let mut without = graph.to_vec();
                without[b].remove(&a);
                if reaches(&without, a, b) {
                    return None;
                }
                let mut pa = graph[a].clone();
                pa.insert(b);
                Some(self.family(b, &without[b]) - family[b] + self.family(a, &pa) - family[a])
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Move {
    Add(usize, usize),
    Delete(usize, usize),
    Reverse(usize, usize),
}

impl Move {
    fn ends(self) -> (usize, usize) {
        match self {
            Move::Add(a, b) | Move::Delete(a, b) | Move::Reverse(a, b) => (a, b),
        }
    }
}

/// Whether a directed path `from -> ... -> to` exists (graph as parent sets).
fn reaches(graph: &[BTreeSet<usize>], from: usize, to: usize) -> bool {
    let mut stack = vec![from];
    let mut seen = vec![false; graph.len()];
    while let Some(v) = stack.pop() {
        if v == to {
            return true;
        }
        if std::mem::replace(&mut seen[v], true) {
            continue;
        }
        stack.extend((0..graph.len()).filter(|&c| graph[c].contains(&v)));
    }
    false
}

fn random_dag(d: usize, max_parents: usize, rng: &mut ChaCha8Rng) -> Vec<BTreeSet<usize>> {
    let mut order: Vec<usize> = (0..d).collect();
    for k in (1..d).rev() {
        order.swap(k, rng.random_range(0..=k));
    }
    let mut graph = vec![BTreeSet::new(); d];
    for j in 0..d {
        for i in 0..j {
            if graph[order[j]].len() < max_parents && rng.random_bool(RESTART_ARC_DENSITY) {
                graph[order[j]].insert(order[i]);
            }
        }
    }
    graph
}
