use super::MergeError;
use crate::learning::Structure;
use crate::model::{Cpd, DiscreteTable};

/// Tables `q(X | Pa(X))` for every variable of `structure`, read off a joint
/// over its variables (mixed radix, first variable most significant).
/// Parent configurations with no mass get uniform rows and a warning.
pub fn rebuild_cpds(joint: &[f64], structure: &Structure) -> Result<(Vec<Cpd>, Vec<String>), MergeError> {
    let vars = &structure.variables;
    if let Some(v) = vars.iter().find(|v| !v.domain.is_discrete()) {
        return Err(MergeError::ContinuousVariablesPresent(v.name.clone()));
    }
    let cards: Vec<usize> = vars.iter().map(|v| v.domain.cardinality()).collect();
    let total: usize = cards.iter().product();
    if joint.len() != total {
        return Err(MergeError::InvalidJoint(format!("{} entries for a space of {total}", joint.len())));
    }
    let mass: f64 = joint.iter().sum();
    if (mass - 1.0).abs() > 1e-9 || joint.iter().any(|p| !(*p >= 0.0)) {
        return Err(MergeError::InvalidJoint(format!("not a distribution (sums to {mass})")));
    }
    let parents = structure.parent_indices().map_err(|e| match e {
        crate::model::ModelError::Cycle { cycle } => MergeError::CycleInUnion { cycle },
        other => MergeError::Model(other),
    })?;

    let mut cpds = Vec::with_capacity(vars.len());
    let mut warnings = Vec::new();
    for (i, v) in vars.iter().enumerate() {
        let mut family = parents[i].clone();
        family.push(i);
        let counts = marginalize(joint, &cards, &family);
        let k = cards[i];
        let rows = counts
            .chunks(k)
            .enumerate()
            .map(|(cfg, row)| {
                let sum: f64 = row.iter().sum();
                if sum > 0.0 {
                    row.iter().map(|x| x / sum).collect()
                } else {
                    warnings.push(format!("{}: parent configuration {cfg} has zero mass, using a uniform row", v.name));
                    vec![1.0 / k as f64; k]
                }
            })
            .collect();
        cpds.push(Cpd::Table(DiscreteTable {
            parents: parents[i].iter().map(|&p| vars[p].name.clone()).collect(),
            rows,
        }));
    }
    Ok((cpds, warnings))
}

/// Sums a joint down to `subset` (in the given order, first most significant).
pub(crate) fn marginalize(joint: &[f64], cards: &[usize], subset: &[usize]) -> Vec<f64> {
    let map = index_map(cards, subset);
    let size: usize = subset.iter().map(|&v| cards[v]).product();
    let mut out = vec![0.0; size];
    for (p, &k) in joint.iter().zip(&map) {
        out[k as usize] += p;
    }
    out
}

/// For each joint index, the index of its projection onto `subset`.
pub(crate) fn index_map(cards: &[usize], subset: &[usize]) -> Vec<u32> {
    let n = cards.len();
    let mut sub_stride = vec![0usize; n];
    let mut s = 1;
    for &v in subset.iter().rev() {
        sub_stride[v] = s;
        s *= cards[v];
    }
    let total: usize = cards.iter().product();
    let mut map = Vec::with_capacity(total);
    let mut digits = vec![0usize; n];
    let mut idx = 0usize;
    for _ in 0..total {
        map.push(idx as u32);
        for k in (0..n).rev() {
            digits[k] += 1;
            idx += sub_stride[k];
            if digits[k] < cards[k] {
                break;
            }
            idx -= sub_stride[k] * cards[k];
            digits[k] = 0;
        }
    }
    map
}
