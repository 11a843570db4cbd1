use serde::{Deserialize, Serialize};

/// One weighted Gaussian in a mixture marginal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub weight: f64,
    pub mean: f64,
    pub variance: f64,
}

/// Posterior of a single variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Marginal {
    Categorical { states: Vec<String>, probabilities: Vec<f64> },
    GaussianMixture { components: Vec<Component> },
}

impl Marginal {
    /// Probability of `state` for categorical marginals.
    pub fn probability(&self, state: &str) -> Option<f64> {
        match self {
            Marginal::Categorical { states, probabilities } => {
                states.iter().position(|s| s == state).map(|k| probabilities[k])
            }
            Marginal::GaussianMixture { .. } => None,
        }
    }

    pub fn components(&self) -> &[Component] {
        match self {
            Marginal::GaussianMixture { components } => components,
            Marginal::Categorical { .. } => &[],
        }
    }

    /// Mean of a mixture marginal.
    pub fn mean(&self) -> Option<f64> {
        match self {
            Marginal::GaussianMixture { components } => Some(components.iter().map(|c| c.weight * c.mean).sum()),
            Marginal::Categorical { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableMarginal {
    pub variable: String,
    #[serde(flatten)]
    pub marginal: Marginal,
}

/// Posteriors for the queried variables, in query order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Marginals(pub Vec<VariableMarginal>);

impl Marginals {
    pub fn get(&self, variable: &str) -> Option<&Marginal> {
        self.0.iter().find(|m| m.variable == variable).map(|m| &m.marginal)
    }

    /// Shorthand for `get(variable)?.probability(state)`.
    pub fn probability(&self, variable: &str, state: &str) -> Option<f64> {
        self.get(variable)?.probability(state)
    }

    pub fn iter(&self) -> impl Iterator<Item = &VariableMarginal> {
        self.0.iter()
    }

    pub(crate) fn push(&mut self, variable: &str, marginal: Marginal) {
        self.0.push(VariableMarginal { variable: variable.into(), marginal });
    }
}
