use super::rebuild::{index_map, rebuild_cpds};
use super::{align_states, disjoint_fallback, shared_variables, union_structure, MergeError, MergeMethod, MergeOptions, MergeReport};
use crate::model::BayesianNetwork;

/// Initial mirror-descent step. On a single conflicting shared variable and
/// on consistent sources this step lands on the optimum directly.
const INITIAL_STEP: f64 = 0.5;
const MIN_STEP: f64 = 1e-12;

/// Finds the joint `q` over the union of both variable sets that minimizes
/// `KL(q|V1 || P1) + KL(q|V2 || P2)`, where `q|Vi` is `q` marginalized to
/// source `i`'s variables, then rebuilds tables on the union of arcs.
///
/// Runs exponentiated-gradient (mirror) descent on the simplex from
/// `q ~ P1 * P2`, with backtracking on the step. Stops once the Frank-Wolfe
/// gap, an upper bound on the distance to the optimal objective, is at most
/// `opts.tolerance`.
pub fn merge_optimize(
    bn1: &BayesianNetwork,
    bn2: &BayesianNetwork,
    opts: &MergeOptions,
) -> Result<(BayesianNetwork, MergeReport), MergeError> {
    let shared = shared_variables(bn1, bn2)?;
    for net in [bn1, bn2] {
        if let Some(v) = net.variables().iter().find(|v| !v.domain.is_discrete()) {
            return Err(MergeError::ContinuousVariablesPresent(v.name.clone()));
        }
    }
    if shared.is_empty() {
        return disjoint_fallback(bn1, bn2, MergeMethod::Optimize);
    }
    let bn2 = align_states(bn1, bn2, &shared)?;
    let structure = union_structure(bn1, &bn2)?;

    let cards: Vec<usize> = structure.variables.iter().map(|v| v.domain.cardinality()).collect();
    let states = cards.iter().fold(1u128, |acc, &c| acc.saturating_mul(c as u128));
    let cap = opts.max_states.min(u32::MAX as u128);
    if states > cap {
        return Err(MergeError::StateSpaceTooLarge { states, cap: opts.max_states });
    }
    let in_union = |net: &BayesianNetwork| -> Vec<usize> {
        net.variables().iter().map(|v| structure.index_of(&v.name).unwrap()).collect()
    };
    let problem = Problem {
        idx1: index_map(&cards, &in_union(bn1)),
        idx2: index_map(&cards, &in_union(&bn2)),
        p1: bn1.dense_joint(),
        p2: bn2.dense_joint(),
    };

    let (q, objective, iterations) = problem.descend(opts, &mut |_| {})?;

    let (cpds, warnings) = rebuild_cpds(&q, &structure)?;
    let net = BayesianNetwork::new(structure.variables.clone(), cpds)?;
    let mut report = MergeReport::new(shared, MergeMethod::Optimize);
    report.objective = Some(objective.max(0.0));
    report.iterations = Some(iterations);
    report.warnings = warnings;
    Ok((net, report))
}

pub(super) struct Problem {
    idx1: Vec<u32>,
    idx2: Vec<u32>,
    p1: Vec<f64>,
    p2: Vec<f64>,
}

impl Problem {
    /// Mirror descent from the normalized product `P1 * P2`. Calls
    /// `on_iterate` with every accepted iterate, the start included.
    pub(super) fn descend(&self, opts: &MergeOptions, on_iterate: &mut dyn FnMut(&[f64])) -> Result<(Vec<f64>, f64, usize), MergeError> {
        let mut q: Vec<f64> =
            self.idx1.iter().zip(&self.idx2).map(|(&a, &b)| self.p1[a as usize] * self.p2[b as usize]).collect();
        let z: f64 = q.iter().sum();
        if !(z > 0.0) {
            return Err(MergeError::InfeasibleSupport);
        }
        q.iter_mut().for_each(|x| *x /= z);
        on_iterate(&q);

        let mut iterations = 0;
        let mut objective = self.objective(&q);
        loop {
            let g = self.gradient(&q);
            let g_min = q.iter().zip(&g).filter(|(x, _)| **x > 0.0).map(|(_, g)| *g).fold(f64::INFINITY, f64::min);
            let gap = q.iter().zip(&g).map(|(x, g)| x * g).sum::<f64>() - g_min;
            if gap <= opts.tolerance {
                return Ok((q, objective, iterations));
            }
            if iterations >= opts.max_iterations {
                return Err(MergeError::NotConverged { iterations, gap });
            }
            iterations += 1;
            let mut step = INITIAL_STEP;
            loop {
                let mut next: Vec<f64> = q.iter().zip(&g).map(|(x, g)| x * (-step * (g - g_min)).exp()).collect();
                let z: f64 = next.iter().sum();
                next.iter_mut().for_each(|x| *x /= z);
                let value = self.objective(&next);
                if value <= objective {
                    q = next;
                    objective = value;
                    on_iterate(&q);
                    break;
                }
                step /= 2.0;
                if step < MIN_STEP {
                    return Err(MergeError::NotConverged { iterations, gap });
                }
            }
        }
    }

    fn marginals(&self, q: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut m1 = vec![0.0; self.p1.len()];
        let mut m2 = vec![0.0; self.p2.len()];
        for ((x, &a), &b) in q.iter().zip(&self.idx1).zip(&self.idx2) {
            m1[a as usize] += x;
            m2[b as usize] += x;
        }
        (m1, m2)
    }

    fn objective(&self, q: &[f64]) -> f64 {
        let (m1, m2) = self.marginals(q);
        kl(&m1, &self.p1) + kl(&m2, &self.p2)
    }

    /// Partial derivatives up to an additive constant.
    fn gradient(&self, q: &[f64]) -> Vec<f64> {
        let (m1, m2) = self.marginals(q);
        let r1 = log_ratio(&m1, &self.p1);
        let r2 = log_ratio(&m2, &self.p2);
        self.idx1.iter().zip(&self.idx2).map(|(&a, &b)| r1[a as usize] + r2[b as usize]).collect()
    }
}

fn kl(m: &[f64], p: &[f64]) -> f64 {
    m.iter().zip(p).filter(|(x, _)| **x > 0.0).map(|(x, p)| x * (x / p).ln()).sum()
}

fn log_ratio(m: &[f64], p: &[f64]) -> Vec<f64> {
    m.iter().zip(p).map(|(x, p)| if *x > 0.0 { (x / p).ln() } else { 0.0 }).collect()
}
