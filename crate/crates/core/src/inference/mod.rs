//! Posterior queries: variable elimination for discrete networks, exact
//! CLG-leaf inference, forward sampling and Gibbs sampling.

mod clg;
mod dataset;
mod elimination;
mod error;
mod factor;
mod gibbs;
mod marginals;
mod sampling;

pub use clg::{infer_clg_leaf, is_clg_leaf_network};
pub use dataset::{Dataset, DatasetError};
pub use elimination::{eliminate, eliminate_in_order, evidence_log_probability, ZERO_EVIDENCE_THRESHOLD};
pub use error::InferenceError;
pub use gibbs::{gibbs_query, GibbsOptions};
pub use marginals::{Component, Marginal, Marginals, VariableMarginal};
pub use sampling::sample_forward;

pub(crate) use gibbs::GibbsChain;
pub(crate) use sampling::sample_into;

use serde::{Deserialize, Serialize};

use crate::model::BayesianNetwork;
use crate::script::Evidence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InferenceMethod {
    VariableElimination,
    ClgLeaf,
    Gibbs,
}

/// Answers a query with the best available method: elimination for
/// discrete networks, CLG-leaf inference when continuous variables are
/// leaves, Gibbs sampling otherwise or when `gibbs` is given.
pub fn infer(
    net: &BayesianNetwork,
    evidence: &Evidence,
    query: &[String],
    gibbs: Option<&GibbsOptions>,
) -> Result<(Marginals, InferenceMethod), InferenceError> {
    if let Some(opts) = gibbs {
        return Ok((gibbs_query(net, evidence, query, opts)?, InferenceMethod::Gibbs));
    }
    if net.is_all_discrete() {
        Ok((eliminate(net, evidence, query)?, InferenceMethod::VariableElimination))
    } else if is_clg_leaf_network(net) {
        Ok((infer_clg_leaf(net, evidence, query)?, InferenceMethod::ClgLeaf))
    } else {
        Ok((gibbs_query(net, evidence, query, &GibbsOptions::default())?, InferenceMethod::Gibbs))
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::fixtures::{SCRIPT1, SCRIPT2};
    use crate::model::{load_network, normal_log_density, ClgRow, ClgSpec, Cpd, DiscreteTable, Variable};
    use crate::testutil::{enumerate_posteriors, random_binary_network, random_evidence, random_network};

    const EVD: &str = "EbolaVirusDisease";

    fn q(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn fever_posterior_oracle(x: f64) -> f64 {
        let has = 0.1 * normal_log_density(x, 103.0, 1.0).exp();
        let not = 0.9 * normal_log_density(x, 98.6, 1.0).exp();
        has / (has + not)
    }

    #[test]
    fn script1_posterior_given_haemorrhage() {
        let net = load_network(SCRIPT1).unwrap();
        let m = eliminate(&net, &Evidence::new().with_state("Haemorrhage", "yes"), &q(&[EVD])).unwrap();
        assert!((m.probability(EVD, "has").unwrap() - 0.09 / 0.099).abs() < 1e-9);
        assert!((m.probability(EVD, "not").unwrap() - 0.009 / 0.099).abs() < 1e-9);
    }

    #[test]
    fn script1_prior_and_point_evidence() {
        let net = load_network(SCRIPT1).unwrap();
        let m = eliminate(&net, &Evidence::new(), &q(&[EVD])).unwrap();
        assert!((m.probability(EVD, "has").unwrap() - 0.1).abs() < 1e-12);
        let m = eliminate(&net, &Evidence::new().with_state(EVD, "has"), &q(&[EVD])).unwrap();
        assert_eq!(m.get(EVD).unwrap(), &Marginal::Categorical {
            states: vec!["has".into(), "not".into()],
            probabilities: vec![1.0, 0.0]
        });
    }

    #[test]
    fn elimination_errors() {
        let net = load_network(SCRIPT1).unwrap();
        assert_eq!(
            eliminate(&net, &Evidence::new(), &q(&["Nope"])).unwrap_err(),
            InferenceError::UnknownVariable("Nope".into())
        );
        assert_eq!(
            eliminate(&net, &Evidence::new().with_state("Nope", "x"), &q(&[EVD])).unwrap_err(),
            InferenceError::UnknownVariable("Nope".into())
        );
        let hybrid = load_network(SCRIPT2).unwrap();
        assert!(matches!(eliminate(&hybrid, &Evidence::new(), &[]), Err(InferenceError::ContinuousVariable(_))));

        let certain = SCRIPT1.replace("{yes: 0.01; no: 0.99;}", "{yes: 0.0; no: 1.0;}").replace("has: 0.1; not: 0.9", "has: 0.0; not: 1.0");
        let net = load_network(&certain).unwrap();
        let e = Evidence::new().with_state("Haemorrhage", "yes");
        assert_eq!(eliminate(&net, &e, &q(&[EVD])).unwrap_err(), InferenceError::ZeroProbabilityEvidence);
        assert_eq!(evidence_log_probability(&net, &e).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn tiny_evidence_mass_is_not_zero() {
        // Chain of 60 observations each with probability 1e-4: mass 1e-240.
        let n = 60;
        let variables: Vec<Variable> = (0..n).map(|i| Variable::discrete(&format!("X{i}"), &["a", "b"])).collect();
        let cpds = (0..n)
            .map(|_| Cpd::Table(DiscreteTable { parents: vec![], rows: vec![vec![1e-4, 1.0 - 1e-4]] }))
            .collect();
        let net = BayesianNetwork::new(variables, cpds).unwrap();
        let mut e = Evidence::new();
        for i in 0..n {
            e = e.with_state(&format!("X{i}"), "a");
        }
        let lp = evidence_log_probability(&net, &e).unwrap();
        assert!((lp - 60.0 * 1e-4f64.ln()).abs() < 1e-9);
        assert!(eliminate(&net, &e, &q(&["X0"])).is_ok());
    }

    #[test]
    fn random_networks_match_enumeration() {
        for seed in 0..40 {
            let net = random_binary_network(8, 0.35, seed);
            let e = random_evidence(&net, seed + 1000);
            let oracle = enumerate_posteriors(&net, &e).unwrap();
            let m = eliminate(&net, &e, &[]).unwrap();
            for (i, vm) in m.iter().enumerate() {
                let Marginal::Categorical { probabilities, .. } = &vm.marginal else { panic!() };
                for (a, b) in probabilities.iter().zip(&oracle[i]) {
                    assert!((a - b).abs() < 1e-9, "seed {seed} var {i}: {a} vs {b}");
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn elimination_equals_enumeration(
            cards in proptest::collection::vec(2usize..=3, 1..=7),
            arc_seed in any::<u64>(),
            seed in any::<u64>(),
        ) {
            let n = cards.len();
            let arcs: Vec<bool> = (0..n * n).map(|k| (arc_seed >> (k % 64)) & 1 == 1).collect();
            let net = random_network(&cards, &arcs, seed);
            let e = random_evidence(&net, seed.wrapping_add(1));
            let oracle = enumerate_posteriors(&net, &e).unwrap();
            let m = eliminate(&net, &e, &[]).unwrap();
            for (i, vm) in m.iter().enumerate() {
                let Marginal::Categorical { probabilities, .. } = &vm.marginal else { unreachable!() };
                let total: f64 = probabilities.iter().sum();
                prop_assert!((total - 1.0).abs() < 1e-9);
                for (a, b) in probabilities.iter().zip(&oracle[i]) {
                    prop_assert!((a - b).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn elimination_order_does_not_matter(seed in any::<u64>(), perm_seed in any::<u64>()) {
            let net = random_binary_network(7, 0.4, seed);
            let e = random_evidence(&net, seed ^ 5);
            let mut names: Vec<String> = net.variables().iter().map(|v| v.name.clone()).collect();
            // Deterministic shuffle from the second seed.
            let mut s = perm_seed;
            for k in (1..names.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                names.swap(k, (s >> 33) as usize % (k + 1));
            }
            let base = eliminate(&net, &e, &[]).unwrap();
            let other = eliminate_in_order(&net, &e, &[], &names).unwrap();
            for (a, b) in base.iter().zip(other.iter()) {
                let (Marginal::Categorical { probabilities: pa, .. }, Marginal::Categorical { probabilities: pb, .. }) =
                    (&a.marginal, &b.marginal) else { unreachable!() };
                for (x, y) in pa.iter().zip(pb) {
                    prop_assert!((x - y).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn script2_fever_posterior() {
        let net = load_network(SCRIPT2).unwrap();
        let m = infer_clg_leaf(&net, &Evidence::new().with_real("Fever", 100.0), &q(&[EVD])).unwrap();
        let p = m.probability(EVD, "has").unwrap();
        assert!((p - fever_posterior_oracle(100.0)).abs() < 1e-9);
        assert!((p - 0.00328).abs() < 5e-5, "{p}");
    }

    #[test]
    fn script2_fever_marginals() {
        let net = load_network(SCRIPT2).unwrap();
        let m = infer_clg_leaf(&net, &Evidence::new(), &q(&["Fever"])).unwrap();
        let c = m.get("Fever").unwrap().components();
        assert_eq!(c.len(), 2);
        assert!((c[0].weight - 0.1).abs() < 1e-12 && c[0].mean == 103.0 && c[0].variance == 1.0);
        assert!((c[1].weight - 0.9).abs() < 1e-12 && c[1].mean == 98.6 && c[1].variance == 1.0);
        assert!((m.get("Fever").unwrap().mean().unwrap() - 99.04).abs() < 1e-9);

        let m = infer_clg_leaf(&net, &Evidence::new().with_state(EVD, "not"), &q(&["Fever"])).unwrap();
        assert_eq!(m.get("Fever").unwrap().components(), &[Component { weight: 1.0, mean: 98.6, variance: 1.0 }]);

        let m = infer_clg_leaf(&net, &Evidence::new().with_real("Fever", 101.5), &q(&["Fever"])).unwrap();
        assert_eq!(m.get("Fever").unwrap().components(), &[Component { weight: 1.0, mean: 101.5, variance: 0.0 }]);
    }

    /// Replacing the observed leaf by a discrete child whose "observed" row
    /// is proportional to the Gaussian density must give the same answer.
    #[test]
    fn soft_evidence_matches_transformed_network() {
        let net = load_network(SCRIPT2).unwrap();
        for x in [96.0, 100.0, 101.7, 104.2] {
            let d_has = normal_log_density(x, 103.0, 1.0).exp();
            let d_not = normal_log_density(x, 98.6, 1.0).exp();
            let scale = 1.0 / d_has.max(d_not);
            let variables = vec![
                Variable::discrete(EVD, &["has", "not"]),
                Variable::discrete("FeverSeen", &["seen", "other"]),
            ];
            let cpds = vec![
                Cpd::Table(DiscreteTable { parents: vec![], rows: vec![vec![0.1, 0.9]] }),
                Cpd::Table(DiscreteTable {
                    parents: vec![EVD.into()],
                    rows: vec![
                        vec![d_has * scale, 1.0 - d_has * scale],
                        vec![d_not * scale, 1.0 - d_not * scale],
                    ],
                }),
            ];
            let transformed = BayesianNetwork::new(variables, cpds).unwrap();
            let a = infer_clg_leaf(&net, &Evidence::new().with_real("Fever", x), &q(&[EVD])).unwrap();
            let b = eliminate(&transformed, &Evidence::new().with_state("FeverSeen", "seen"), &q(&[EVD])).unwrap();
            assert!((a.probability(EVD, "has").unwrap() - b.probability(EVD, "has").unwrap()).abs() < 1e-12);
        }
    }

    fn chain_xy() -> BayesianNetwork {
        // X ~ N(1, 4); Y | X ~ N(2 + 0.5 X, 1).
        BayesianNetwork::new(
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
                    rows: vec![ClgRow { intercept: 2.0, coefficients: vec![0.5], variance: 1.0 }],
                }),
            ],
        )
        .unwrap()
    }

    #[test]
    fn clg_leaf_rejects_continuous_parents() {
        let net = chain_xy();
        assert_eq!(
            infer_clg_leaf(&net, &Evidence::new().with_real("X", 0.0), &[]).unwrap_err(),
            InferenceError::NonLeafContinuousEvidence("X".into())
        );
        assert_eq!(
            infer_clg_leaf(&net, &Evidence::new(), &[]).unwrap_err(),
            InferenceError::ContinuousNonLeaf("X".into())
        );
    }

    #[test]
    fn forward_sampling_matches_priors() {
        let net = load_network(SCRIPT1).unwrap();
        let data = sample_forward(&net, 100_000, 1);
        assert_eq!(data.len(), 100_000);
        assert!((data.frequency(EVD, "has").unwrap() - 0.1).abs() < 0.01);
        assert_eq!(sample_forward(&net, 1, 9).len(), 1);
        assert_eq!(sample_forward(&net, 500, 4), sample_forward(&net, 500, 4));

        let hybrid = load_network(SCRIPT2).unwrap();
        let data = sample_forward(&hybrid, 100_000, 2);
        assert!((data.mean("Fever").unwrap() - 99.04).abs() < 0.05);
    }

    #[test]
    fn gibbs_script1() {
        let net = load_network(SCRIPT1).unwrap();
        let opts = GibbsOptions { samples: 50_000, burn_in: 5_000, seed: 7 };
        let e = Evidence::new().with_state("Haemorrhage", "yes");
        let m = gibbs_query(&net, &e, &q(&[EVD]), &opts).unwrap();
        assert!((m.probability(EVD, "has").unwrap() - 10.0 / 11.0).abs() < 0.01);
        assert_eq!(m, gibbs_query(&net, &e, &q(&[EVD]), &opts).unwrap());

        let m = gibbs_query(&net, &Evidence::new(), &[], &opts).unwrap();
        let data = sample_forward(&net, 50_000, 7);
        for (var, state) in [(EVD, "has"), ("Haemorrhage", "yes")] {
            assert!((m.probability(var, state).unwrap() - data.frequency(var, state).unwrap()).abs() < 0.01);
        }

        let all = Evidence::new().with_state(EVD, "has").with_state("Haemorrhage", "no");
        let m = gibbs_query(&net, &all, &[], &GibbsOptions { samples: 10, burn_in: 1, seed: 0 }).unwrap();
        assert_eq!(m.probability(EVD, "has"), Some(1.0));
        assert_eq!(m.probability("Haemorrhage", "no"), Some(1.0));
    }

    #[test]
    fn gibbs_script2() {
        let net = load_network(SCRIPT2).unwrap();
        let opts = GibbsOptions { samples: 50_000, burn_in: 5_000, seed: 11 };
        let m = gibbs_query(&net, &Evidence::new().with_real("Fever", 100.0), &q(&[EVD]), &opts).unwrap();
        assert!((m.probability(EVD, "has").unwrap() - fever_posterior_oracle(100.0)).abs() < 0.01);
        let m = gibbs_query(&net, &Evidence::new(), &q(&["Fever", EVD]), &opts).unwrap();
        assert!((m.probability(EVD, "has").unwrap() - 0.1).abs() < 0.01);
        let c = m.get("Fever").unwrap().components();
        assert_eq!(c.len(), 2);
        assert!((c[0].weight - 0.1).abs() < 0.01 && (c[0].mean - 103.0).abs() < 0.05);
        assert!((c[1].mean - 98.6).abs() < 0.05 && (c[1].variance - 1.0).abs() < 0.05);
    }

    #[test]
    fn gibbs_gaussian_chain_matches_closed_form() {
        // Posterior of X given Y = 4: precision 1/4 + 0.25 = 0.5, mean
        // (1/4 + 0.5 * (4 - 2)) / 0.5 = 2.5, variance 2.
        let net = chain_xy();
        let opts = GibbsOptions { samples: 60_000, burn_in: 1_000, seed: 3 };
        let m = gibbs_query(&net, &Evidence::new().with_real("Y", 4.0), &q(&["X"]), &opts).unwrap();
        let c = m.get("X").unwrap().components();
        assert!((c[0].mean - 2.5).abs() < 0.05, "{c:?}");
        assert!((c[0].variance - 2.0).abs() < 0.1, "{c:?}");
        let (_, method) = infer(&net, &Evidence::new(), &[], None).unwrap();
        assert_eq!(method, InferenceMethod::Gibbs);
    }

    #[test]
    fn gibbs_settings_and_zero_evidence() {
        let net = load_network(SCRIPT1).unwrap();
        let bad = GibbsOptions { samples: 10, burn_in: 10, seed: 0 };
        assert!(matches!(gibbs_query(&net, &Evidence::new(), &[], &bad), Err(InferenceError::InvalidSettings(_))));
        let certain = SCRIPT1.replace("{yes: 0.01; no: 0.99;}", "{yes: 0.0; no: 1.0;}").replace("has: 0.1; not: 0.9", "has: 0.0; not: 1.0");
        let net = load_network(&certain).unwrap();
        let e = Evidence::new().with_state("Haemorrhage", "yes");
        assert_eq!(
            gibbs_query(&net, &e, &[], &GibbsOptions::default()).unwrap_err(),
            InferenceError::ZeroProbabilityEvidence
        );
    }

    #[test]
    fn dispatch_picks_exact_methods() {
        let (_, m) = infer(&load_network(SCRIPT1).unwrap(), &Evidence::new(), &[], None).unwrap();
        assert_eq!(m, InferenceMethod::VariableElimination);
        let (_, m) = infer(&load_network(SCRIPT2).unwrap(), &Evidence::new(), &[], None).unwrap();
        assert_eq!(m, InferenceMethod::ClgLeaf);
    }

    #[test]
    fn marginals_json_shape() {
        let net = load_network(SCRIPT2).unwrap();
        let m = infer_clg_leaf(&net, &Evidence::new(), &q(&[EVD, "Fever"])).unwrap();
        let json = serde_json::to_value(&m).unwrap();
        assert_eq!(json[0]["variable"], EVD);
        assert_eq!(json[0]["kind"], "categorical");
        assert_eq!(json[1]["kind"], "gaussian_mixture");
        assert_eq!(json[1]["components"][0]["mean"], 103.0);
        let back: Marginals = serde_json::from_value(json).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn dataset_csv_round_trip() {
        let net = load_network(SCRIPT2).unwrap();
        let data = sample_forward(&net, 50, 5);
        let text = data.to_csv_string();
        assert!(text.starts_with("EbolaVirusDisease,Fever\n"));
        let back = Dataset::read_csv(text.as_bytes(), Some(net.variables())).unwrap();
        assert_eq!(back, data);
        let inferred = Dataset::read_csv(text.as_bytes(), None).unwrap();
        assert!(!inferred.variables()[1].domain.is_discrete());
        assert_eq!(inferred.variables()[0].domain.states().unwrap().len(), data.frequency(EVD, "has").map_or(1, |f| if f > 0.0 && f < 1.0 { 2 } else { 1 }));

        let missing = "A,B\na1,\n";
        assert!(matches!(Dataset::read_csv(missing.as_bytes(), None), Err(DatasetError::MissingCell { row: 1, .. })));
        let schema = [Variable::discrete("A", &["a1", "a2"])];
        assert!(matches!(
            Dataset::read_csv("A\na3\n".as_bytes(), Some(&schema)),
            Err(DatasetError::InvalidCell { row: 1, .. })
        ));
        assert!(matches!(Dataset::read_csv("Z\n1\n".as_bytes(), Some(&schema)), Err(DatasetError::UnknownColumn(_))));
    }
}
