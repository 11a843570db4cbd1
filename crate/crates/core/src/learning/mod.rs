//! Parameter learning, BIC scoring and hill-climbing structure search over
//! complete datasets.

mod parameters;
mod score;
mod search;

pub use parameters::learn_parameters;
pub use score::{bic_score, family_scores};
pub use search::learn_structure;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{topological_order, BayesianNetwork, ModelError, Variable};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LearnError {
    #[error("dataset has no rows")]
    EmptyDataset,
    #[error("structure learning needs at least two columns")]
    TooFewColumns,
    #[error("dataset has no column `{0}`")]
    MissingColumn(String),
    #[error("column `{column}` does not match the variable's domain: {detail}")]
    DomainMismatch { column: String, detail: String },
    #[error("structure learning needs discrete data; `{0}` is continuous")]
    ContinuousColumn(String),
    #[error("Dirichlet pseudo-count must be finite and non-negative, got {0}")]
    InvalidAlpha(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl LearnError {
    pub fn code(&self) -> &'static str {
        match self {
            LearnError::EmptyDataset => "empty_dataset",
            LearnError::TooFewColumns => "too_few_columns",
            LearnError::MissingColumn(_) => "missing_column",
            LearnError::DomainMismatch { .. } => "domain_mismatch",
            LearnError::ContinuousColumn(_) => "continuous_column",
            LearnError::InvalidAlpha(_) => "invalid_alpha",
            LearnError::Model(e) => e.code(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LearnOptions {
    /// Dirichlet pseudo-count added to every table cell.
    pub dirichlet_alpha: f64,
    pub max_parents: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for LearnOptions {
    fn default() -> Self {
        LearnOptions { dirichlet_alpha: 1.0, max_parents: 3, restarts: 5, seed: 0 }
    }
}

/// A DAG over named variables, without parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Structure {
    pub variables: Vec<Variable>,
    /// Parent names per variable, aligned with `variables`.
    pub parents: Vec<Vec<String>>,
}

impl Structure {
    /// Checks names and acyclicity. On a cycle, returns it in parent-to-child
    /// order.
    pub fn new(variables: Vec<Variable>, parents: Vec<Vec<String>>) -> Result<Self, ModelError> {
        let s = Structure { variables, parents };
        s.parent_indices()?;
        Ok(s)
    }

    pub fn empty(variables: Vec<Variable>) -> Self {
        let parents = vec![Vec::new(); variables.len()];
        Structure { variables, parents }
    }

    pub fn from_network(net: &BayesianNetwork) -> Self {
        Structure {
            variables: net.variables().to_vec(),
            parents: (0..net.len())
                .map(|i| net.parents(i).into_iter().map(|p| net.variable(p).name.clone()).collect())
                .collect(),
        }
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    /// Parent lists as indices, after validating names and acyclicity.
    pub fn parent_indices(&self) -> Result<Vec<Vec<usize>>, ModelError> {
        if self.parents.len() != self.variables.len() {
            return Err(ModelError::Shape { variable: String::new(), detail: "one parent list per variable".into() });
        }
        let mut seen = std::collections::BTreeSet::new();
        for v in &self.variables {
            if !seen.insert(&v.name) {
                return Err(ModelError::DuplicateVariable(v.name.clone()));
            }
        }
        let idx = self
            .parents
            .iter()
            .zip(&self.variables)
            .map(|(ps, v)| {
                ps.iter()
                    .map(|p| {
                        self.index_of(p)
                            .ok_or_else(|| ModelError::UnknownParent { variable: v.name.clone(), parent: p.clone() })
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        topological_order(&idx).map_err(|cycle| ModelError::Cycle {
            cycle: cycle.into_iter().map(|i| self.variables[i].name.clone()).collect(),
        })?;
        Ok(idx)
    }

    pub fn arcs(&self) -> std::collections::BTreeSet<(String, String)> {
        self.variables
            .iter()
            .zip(&self.parents)
            .flat_map(|(v, ps)| ps.iter().map(move |p| (p.clone(), v.name.clone())))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::fixtures::{SCRIPT1, SCRIPT2};
    use crate::inference::{sample_forward, Dataset};
    use crate::model::{load_network, Cell, ClgRow, ClgSpec, Cpd, DiscreteTable};
    use crate::testutil::random_network;

    fn max_table_error(a: &BayesianNetwork, b: &BayesianNetwork) -> f64 {
        let mut worst: f64 = 0.0;
        for (ca, cb) in a.cpds().iter().zip(b.cpds()) {
            if let (Cpd::Table(ta), Cpd::Table(tb)) = (ca, cb) {
                for (ra, rb) in ta.rows.iter().zip(&tb.rows) {
                    for (x, y) in ra.iter().zip(rb) {
                        worst = worst.max((x - y).abs());
                    }
                }
            }
        }
        worst
    }

    #[test]
    fn recovers_script1_parameters() {
        let net = load_network(SCRIPT1).unwrap();
        let data = sample_forward(&net, 100_000, 11);
        let (learned, warnings) = learn_parameters(&Structure::from_network(&net), &data, &LearnOptions::default()).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(learned.arcs(), net.arcs());
        assert!(max_table_error(&learned, &net) < 0.01);
    }

    #[test]
    fn recovers_script2_means() {
        let net = load_network(SCRIPT2).unwrap();
        let data = sample_forward(&net, 100_000, 12);
        let (learned, _) = learn_parameters(&Structure::from_network(&net), &data, &LearnOptions::default()).unwrap();
        let Cpd::Clg(c) = learned.cpd(learned.require("Fever").unwrap()) else { panic!() };
        assert!((c.rows[0].intercept - 103.0).abs() < 0.05);
        assert!((c.rows[1].intercept - 98.6).abs() < 0.05);
        assert!((c.rows[1].variance - 1.0).abs() < 0.05);
    }

    #[test]
    fn recovers_linear_coefficients() {
        let truth = BayesianNetwork::new(
            vec![Variable::continuous("X"), Variable::continuous("Y")],
            vec![
                Cpd::Clg(ClgSpec {
                    discrete_parents: vec![],
                    continuous_parents: vec![],
                    rows: vec![ClgRow { intercept: 1.0, coefficients: vec![], variance: 4.0 }],
                }),
                Cpd::Clg(ClgSpec {
                    discrete_parents: vec![],
                    continuous_parents: vec!["X".into()],
                    rows: vec![ClgRow { intercept: 2.0, coefficients: vec![-0.5], variance: 0.25 }],
                }),
            ],
        )
        .unwrap();
        let data = sample_forward(&truth, 20_000, 5);
        let (learned, _) = learn_parameters(&Structure::from_network(&truth), &data, &LearnOptions::default()).unwrap();
        let Cpd::Clg(c) = learned.cpd(1) else { panic!() };
        assert!((c.rows[0].intercept - 2.0).abs() < 0.02);
        assert!((c.rows[0].coefficients[0] + 0.5).abs() < 0.01);
        assert!((c.rows[0].variance - 0.25).abs() < 0.01);
    }

    #[test]
    fn laplace_single_row() {
        let v = Variable::discrete("A", &["seen", "unseen"]);
        let data = Dataset::new(vec![v.clone()], vec![vec![Cell::State(0)]]).unwrap();
        let (net, _) = learn_parameters(&Structure::empty(vec![v]), &data, &LearnOptions::default()).unwrap();
        let Cpd::Table(t) = net.cpd(0) else { panic!() };
        assert!((t.rows[0][0] - 2.0 / 3.0).abs() < 1e-15 && (t.rows[0][1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn unsmoothed_empty_configuration_is_uniform() {
        let a = Variable::discrete("A", &["a1", "a2"]);
        let b = Variable::discrete("B", &["b1", "b2", "b3"]);
        let data = Dataset::new(vec![a.clone(), b.clone()], vec![vec![Cell::State(0), Cell::State(2)]]).unwrap();
        let structure = Structure::new(vec![a, b], vec![vec![], vec!["A".into()]]).unwrap();
        let opts = LearnOptions { dirichlet_alpha: 0.0, ..Default::default() };
        let (net, warnings) = learn_parameters(&structure, &data, &opts).unwrap();
        let Cpd::Table(t) = net.cpd(1) else { panic!() };
        assert_eq!(t.rows[0], vec![0.0, 0.0, 1.0]);
        assert_eq!(t.rows[1], vec![1.0 / 3.0; 3]);
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("A=a2"), "{warnings:?}");
    }

    #[test]
    fn learning_errors() {
        let net = load_network(SCRIPT1).unwrap();
        let empty = Dataset::new(net.variables().to_vec(), vec![]).unwrap();
        let s = Structure::from_network(&net);
        assert_eq!(learn_parameters(&s, &empty, &LearnOptions::default()).unwrap_err(), LearnError::EmptyDataset);
        let one = Dataset::new(vec![net.variable(0).clone()], vec![vec![Cell::State(0)]]).unwrap();
        assert_eq!(
            learn_parameters(&s, &one, &LearnOptions::default()).unwrap_err(),
            LearnError::MissingColumn("Haemorrhage".into())
        );
        assert_eq!(learn_structure(&one, &LearnOptions::default()).unwrap_err(), LearnError::TooFewColumns);
        let bad = LearnOptions { dirichlet_alpha: -1.0, ..Default::default() };
        let data = sample_forward(&net, 10, 0);
        assert_eq!(learn_parameters(&s, &data, &bad).unwrap_err(), LearnError::InvalidAlpha(-1.0));
        let cyclic = Structure::new(net.variables().to_vec(), vec![vec!["Haemorrhage".into()], vec!["EbolaVirusDisease".into()]]);
        assert!(matches!(cyclic, Err(ModelError::Cycle { .. })));
    }

    #[test]
    fn parameter_error_shrinks_with_data() {
        let net = load_network(SCRIPT1).unwrap();
        let s = Structure::from_network(&net);
        // Mean of the max-abs error over a family of seeds.
        let errors: Vec<f64> = [1_000, 10_000, 100_000]
            .iter()
            .map(|&n| {
                let seeds = 20..30u64;
                let total: f64 = seeds
                    .clone()
                    .map(|seed| {
                        let data = sample_forward(&net, n, seed);
                        max_table_error(&learn_parameters(&s, &data, &LearnOptions::default()).unwrap().0, &net)
                    })
                    .sum();
                total / seeds.count() as f64
            })
            .collect();
        assert!(errors[0] >= errors[1] && errors[1] >= errors[2], "{errors:?}");
    }

    fn two_node(p_b_given: [f64; 2]) -> BayesianNetwork {
        BayesianNetwork::new(
            vec![Variable::discrete("A", &["a1", "a2"]), Variable::discrete("B", &["b1", "b2"])],
            vec![
                Cpd::Table(DiscreteTable { parents: vec![], rows: vec![vec![0.5, 0.5]] }),
                Cpd::Table(DiscreteTable {
                    parents: vec!["A".into()],
                    rows: vec![vec![p_b_given[0], 1.0 - p_b_given[0]], vec![p_b_given[1], 1.0 - p_b_given[1]]],
                }),
            ],
        )
        .unwrap()
    }

    #[test]
    fn bic_prefers_true_chain() {
        let chain = two_node([0.8, 0.3]);
        let data = sample_forward(&chain, 10_000, 2);
        let opts = LearnOptions::default();
        let (fitted_chain, _) = learn_parameters(&Structure::from_network(&chain), &data, &opts).unwrap();
        let (fitted_empty, _) = learn_parameters(&Structure::empty(chain.variables().to_vec()), &data, &opts).unwrap();
        let s_chain = bic_score(&fitted_chain, &data).unwrap();
        assert!(s_chain > bic_score(&fitted_empty, &data).unwrap());
        assert_eq!(s_chain, bic_score(&fitted_chain.clone(), &data).unwrap());
        let parts: f64 = family_scores(&fitted_chain, &data).unwrap().iter().sum();
        assert!((parts - s_chain).abs() < 1e-9);
    }

    #[test]
    fn structure_learning_finds_dependence() {
        let net = two_node([0.9, 0.1]);
        let data = sample_forward(&net, 20_000, 4);
        let (learned, _) = learn_structure(&data, &LearnOptions::default()).unwrap();
        let arcs = learned.arcs();
        assert_eq!(arcs.len(), 1);
        let (p, c) = arcs.iter().next().unwrap();
        assert!((p == "A" && c == "B") || (p == "B" && c == "A"));

        let independent = two_node([0.5, 0.5]);
        let data = sample_forward(&independent, 20_000, 4);
        let (learned, _) = learn_structure(&data, &LearnOptions::default()).unwrap();
        assert!(learned.arcs().is_empty());
    }

    #[test]
    fn more_restarts_never_score_lower() {
        let truth = random_network(&[2, 3, 2, 2, 3], &[true; 25], 8);
        let data = sample_forward(&truth, 3_000, 8);
        let one = LearnOptions { restarts: 1, seed: 99, ..Default::default() };
        let five = LearnOptions { restarts: 5, ..one };
        let (a, _) = learn_structure(&data, &one).unwrap();
        let (b, _) = learn_structure(&data, &five).unwrap();
        assert!(bic_score(&b, &data).unwrap() >= bic_score(&a, &data).unwrap());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn learned_rows_are_normalized(seed in any::<u64>(), alpha in 0.0f64..3.0, n in 1usize..200) {
            let truth = random_network(&[2, 3, 2], &[false, true, true, false, false, true, false, false, false], seed);
            let data = sample_forward(&truth, n, seed);
            let opts = LearnOptions { dirichlet_alpha: alpha, ..Default::default() };
            let (net, _) = learn_parameters(&Structure::from_network(&truth), &data, &opts).unwrap();
            for cpd in net.cpds() {
                let Cpd::Table(t) = cpd else { unreachable!() };
                for row in &t.rows {
                    prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn learned_structures_are_valid(seed in any::<u64>(), max_parents in 1usize..3) {
            let truth = random_network(&[2, 2, 3, 2, 2], &[true; 25], seed);
            let data = sample_forward(&truth, 400, seed);
            let opts = LearnOptions { max_parents, restarts: 3, seed, ..Default::default() };
            let (net, _) = learn_structure(&data, &opts).unwrap();
            for i in 0..net.len() {
                prop_assert!(net.parents(i).len() <= max_parents);
            }
            let (empty, _) = learn_parameters(&Structure::empty(data.variables().to_vec()), &data, &opts).unwrap();
            prop_assert!(bic_score(&net, &data).unwrap() >= bic_score(&empty, &data).unwrap() - 1e-9);
        }
    }
}
