use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{align_states, disjoint_fallback, shared_variables, union_structure, MergeError, MergeMethod, MergeOptions, MergeReport};
use crate::inference::{sample_into, Dataset, GibbsChain};
use crate::learning::{learn_parameters, LearnOptions};
use crate::model::{BayesianNetwork, Cell};

/// Merges by simulation and re-learning.
///
/// Each pooled row: a fair coin picks a source network, which is forward
/// sampled; the other network is then sampled given the realized shared
/// values (clamped forward sampling when the shared variables have no other
/// ancestors there, Gibbs otherwise). Rows whose shared values are impossible
/// under the other network are redrawn; more than half redrawn aborts. The
/// merged network is fitted on the union of arcs with Dirichlet alpha = 1.
pub fn merge_simulate(
    bn1: &BayesianNetwork,
    bn2: &BayesianNetwork,
    opts: &MergeOptions,
) -> Result<(BayesianNetwork, MergeReport), MergeError> {
    let shared = shared_variables(bn1, bn2)?;
    if shared.is_empty() {
        return disjoint_fallback(bn1, bn2, MergeMethod::Simulate);
    }
    let bn2 = align_states(bn1, bn2, &shared)?;
    let structure = union_structure(bn1, &bn2)?;
    let nets = [bn1, &bn2];
    let sides = [Side::new(nets[0], nets[1], &shared), Side::new(nets[1], nets[0], &shared)];
    // Where each union variable is read from, per choice of first network.
    let sources: Vec<[(bool, usize); 2]> = structure
        .variables
        .iter()
        .map(|v| {
            [0, 1].map(|first| match nets[first].index_of(&v.name) {
                Some(i) => (true, i),
                None => (false, nets[1 - first].index_of(&v.name).unwrap()),
            })
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut cells: [Vec<Cell>; 2] = [initial_cells(nets[0]), initial_cells(nets[1])];
    let mut rows = Vec::with_capacity(opts.sample_count);
    let mut rejected = 0usize;
    while rows.len() < opts.sample_count {
        let first = usize::from(rng.random_bool(0.5));
        let second = 1 - first;
        let [c0, c1] = &mut cells;
        let (cf, cs) = if first == 0 { (c0, c1) } else { (c1, c0) };
        sample_into(nets[first], cf, &vec![false; nets[first].len()], &mut rng);
        if !sides[first].condition(nets[second], cf, cs, opts.gibbs_sweeps, &mut rng) {
            rejected += 1;
            if rejected > opts.sample_count {
                return Err(MergeError::ZeroProbabilityEvidence { rejected, attempts: rejected + rows.len() });
            }
            continue;
        }
        rows.push(
            sources
                .iter()
                .map(|src| {
                    let (in_first, i) = src[first];
                    if in_first { cf[i] } else { cs[i] }
                })
                .collect(),
        );
    }

    let data = Dataset::new(structure.variables.clone(), rows).expect("sampled rows match the union domains");
    let learn = LearnOptions { dirichlet_alpha: 1.0, ..LearnOptions::default() };
    let (net, learn_warnings) = learn_parameters(&structure, &data, &learn)?;
    let mut report = MergeReport::new(shared, MergeMethod::Simulate);
    report.sample_count = Some(opts.sample_count);
    if rejected > 0 {
        report.warnings.push(format!(
            "{rejected} sampled shared configurations had zero probability in the other network and were redrawn"
        ));
    }
    report.warnings.extend(learn_warnings);
    Ok((net, report))
}

fn initial_cells(net: &BayesianNetwork) -> Vec<Cell> {
    net.variables()
        .iter()
        .map(|v| if v.domain.is_discrete() { Cell::State(0) } else { Cell::Real(0.0) })
        .collect()
}

/// How to sample the second network once the first has been drawn.
struct Side {
    /// (index in first, index in second) for each shared variable.
    pairs: Vec<(usize, usize)>,
    clamped: Vec<bool>,
    /// Shared variables have no unshared ancestors in the second network.
    forward_exact: bool,
}

impl Side {
    fn new(first: &BayesianNetwork, second: &BayesianNetwork, shared: &[String]) -> Self {
        let pairs: Vec<(usize, usize)> =
            shared.iter().map(|n| (first.index_of(n).unwrap(), second.index_of(n).unwrap())).collect();
        let mut clamped = vec![false; second.len()];
        for &(_, j) in &pairs {
            clamped[j] = true;
        }
        let ancestors = second.ancestral_set(pairs.iter().map(|&(_, j)| j));
        let forward_exact = (0..second.len()).all(|i| !ancestors[i] || clamped[i]);
        Side { pairs, clamped, forward_exact }
    }

    /// Fills `cs` with a draw from `second` given the shared values in `cf`.
    /// False when those values have zero probability there.
    fn condition<R: Rng>(&self, second: &BayesianNetwork, cf: &[Cell], cs: &mut [Cell], sweeps: usize, rng: &mut R) -> bool {
        for &(i, j) in &self.pairs {
            cs[j] = cf[i];
        }
        if self.forward_exact {
            sample_into(second, cs, &self.clamped, rng);
            return second.log_joint_cells(cs) > f64::NEG_INFINITY;
        }
        let observed: Vec<Option<Cell>> = (0..second.len()).map(|j| self.clamped[j].then_some(cs[j])).collect();
        match GibbsChain::new(second, &observed, rng) {
            Ok(mut chain) => {
                for _ in 0..sweeps {
                    chain.sweep(rng);
                }
                cs.copy_from_slice(&chain.cells);
                true
            }
            Err(_) => false,
        }
    }
}
