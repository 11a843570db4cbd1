use nalgebra::{DMatrix, DVector};

use super::{LearnError, LearnOptions, Structure};
use crate::inference::Dataset;
use crate::model::{BayesianNetwork, Cell, ClgRow, ClgSpec, Cpd, DiscreteTable, Domain, ModelError, Variable};

/// Smallest fitted variance; keeps degenerate fits valid.
pub const VARIANCE_FLOOR: f64 = 1e-9;

/// Fits every local distribution of `structure` to `data`.
///
/// Tables use Dirichlet smoothing: `(count + alpha) / (total + alpha * k)`.
/// Continuous variables get one least-squares regression on their continuous
/// parents per discrete-parent configuration, with the residual variance
/// (maximum likelihood, floored) as the CLG variance. Returns the network and
/// warnings about configurations with no data.
pub fn learn_parameters(
    structure: &Structure,
    data: &Dataset,
    opts: &LearnOptions,
) -> Result<(BayesianNetwork, Vec<String>), LearnError> {
    let alpha = opts.dirichlet_alpha;
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(LearnError::InvalidAlpha(alpha));
    }
    if data.is_empty() {
        return Err(LearnError::EmptyDataset);
    }
    let parents = structure.parent_indices()?;
    let rows = align(&structure.variables, data)?;
    let vars = &structure.variables;
    let mut warnings = Vec::new();
    let mut cpds = Vec::with_capacity(vars.len());

    for (i, v) in vars.iter().enumerate() {
        let dp: Vec<usize> = parents[i].iter().copied().filter(|&p| vars[p].domain.is_discrete()).collect();
        let cp: Vec<usize> = parents[i].iter().copied().filter(|&p| !vars[p].domain.is_discrete()).collect();
        let names = |ps: &[usize]| ps.iter().map(|&p| vars[p].name.clone()).collect::<Vec<_>>();
        let configs: usize = dp.iter().map(|&p| vars[p].domain.cardinality()).product();
        let config_of = |row: &[Cell]| dp.iter().fold(0, |acc, &p| acc * vars[p].domain.cardinality() + row[p].state());

        match &v.domain {
            Domain::Discrete(states) => {
                if let Some(&p) = cp.first() {
                    return Err(ModelError::DiscreteChildOfContinuous { child: v.name.clone(), parent: vars[p].name.clone() }.into());
                }
                let k = states.len();
                let mut counts = vec![vec![0.0; k]; configs];
                for row in &rows {
                    counts[config_of(row)][row[i].state()] += 1.0;
                }
                let table = counts
                    .into_iter()
                    .enumerate()
                    .map(|(cfg, c)| {
                        let total: f64 = c.iter().sum::<f64>() + alpha * k as f64;
                        if total > 0.0 {
                            c.into_iter().map(|x| (x + alpha) / total).collect()
                        } else {
                            warnings.push(format!("{}: no data for {}, using a uniform row", v.name, describe(vars, &dp, cfg)));
                            vec![1.0 / k as f64; k]
                        }
                    })
                    .collect();
                cpds.push(Cpd::Table(DiscreteTable { parents: names(&dp), rows: table }));
            }
            Domain::Continuous => {
                let mut groups: Vec<Vec<usize>> = vec![Vec::new(); configs];
                for (r, row) in rows.iter().enumerate() {
                    groups[config_of(row)].push(r);
                }
                let all: Vec<usize> = (0..rows.len()).collect();
                let fits = groups
                    .iter()
                    .enumerate()
                    .map(|(cfg, g)| {
                        if g.is_empty() {
                            warnings.push(format!("{}: no data for {}, using the pooled fit", v.name, describe(vars, &dp, cfg)));
                            fit_linear(&rows, &all, i, &cp)
                        } else {
                            fit_linear(&rows, g, i, &cp)
                        }
                    })
                    .collect();
                cpds.push(Cpd::Clg(ClgSpec { discrete_parents: names(&dp), continuous_parents: names(&cp), rows: fits }));
            }
        }
    }
    Ok((BayesianNetwork::new(vars.clone(), cpds)?, warnings))
}

/// Least-squares fit of `target` on `[1, parents...]` over the given rows.
fn fit_linear(rows: &[Vec<Cell>], subset: &[usize], target: usize, parents: &[usize]) -> ClgRow {
    let n = subset.len();
    let y = DVector::from_iterator(n, subset.iter().map(|&r| rows[r][target].real()));
    if parents.is_empty() {
        let mean = y.mean();
        let variance = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        return ClgRow { intercept: mean, coefficients: Vec::new(), variance: variance.max(VARIANCE_FLOOR) };
    }
    let x = DMatrix::from_fn(n, parents.len() + 1, |r, c| if c == 0 { 1.0 } else { rows[subset[r]][parents[c - 1]].real() });
    let beta = x.clone().svd(true, true).solve(&y, 1e-12).expect("SVD with both factors computed");
    let residual = &y - &x * &beta;
    let variance = residual.norm_squared() / n as f64;
    ClgRow { intercept: beta[0], coefficients: beta.iter().skip(1).copied().collect(), variance: variance.max(VARIANCE_FLOOR) }
}

fn describe(vars: &[Variable], dp: &[usize], mut cfg: usize) -> String {
    if dp.is_empty() {
        return "(none)".into();
    }
    let mut parts = Vec::with_capacity(dp.len());
    for &p in dp.iter().rev() {
        let states = vars[p].domain.states().unwrap();
        parts.push(format!("{}={}", vars[p].name, states[cfg % states.len()]));
        cfg /= states.len();
    }
    parts.reverse();
    parts.join(", ")
}

/// Rows re-expressed over `variables` (by column name), with discrete states
/// mapped onto the variables' state lists.
pub(crate) fn align(variables: &[Variable], data: &Dataset) -> Result<Vec<Vec<Cell>>, LearnError> {
    let mut maps = Vec::with_capacity(variables.len());
    for v in variables {
        let c = data.column_index(&v.name).ok_or_else(|| LearnError::MissingColumn(v.name.clone()))?;
        let remap = match (&v.domain, &data.variables()[c].domain) {
            (Domain::Discrete(want), Domain::Discrete(have)) => Some(
                have.iter()
                    .map(|s| {
                        want.iter().position(|w| w == s).ok_or_else(|| LearnError::DomainMismatch {
                            column: v.name.clone(),
                            detail: format!("state `{s}` is not declared"),
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?,
            ),
            (Domain::Continuous, Domain::Continuous) => None,
            _ => {
                return Err(LearnError::DomainMismatch {
                    column: v.name.clone(),
                    detail: "discrete/continuous kind differs".into(),
                })
            }
        };
        maps.push((c, remap));
    }
    Ok(data
        .rows()
        .iter()
        .map(|row| {
            maps.iter()
                .map(|(c, remap)| match remap {
                    Some(m) => Cell::State(m[row[*c].state()]),
                    None => row[*c],
                })
                .collect()
        })
        .collect())
}
