//! Syntax tree for `.bns` model scripts.

/// A parsed model script: node definitions in source order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModelAst {
    pub nodes: Vec<NodeDef>,
}

impl ModelAst {
    pub fn node(&self, name: &str) -> Option<&NodeDef> {
        self.nodes.iter().find(|n| n.name == name)
    }
}

/// One `defineNode` block.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeDef {
    pub name: String,
    /// Optional free text; empty when the script gave none.
    pub description: String,
    pub domain: DomainDecl,
    /// Parents listed in the `p(Node | ...)` header, in written order.
    pub parents: Vec<String>,
    pub distribution: DistExpr,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DomainDecl {
    Discrete(Vec<String>),
    Continuous,
}

impl DomainDecl {
    pub fn states(&self) -> Option<&[String]> {
        match self {
            DomainDecl::Discrete(s) => Some(s),
            DomainDecl::Continuous => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DistExpr {
    Table(TableLiteral),
    Gaussian(GaussianLiteral),
    /// Ordered `if / else if / else` branches, evaluated first-match.
    Conditional(Vec<Branch>),
}

/// Probabilities aligned with the owning node's declared state order.
#[derive(Debug, Clone, PartialEq)]
pub struct TableLiteral {
    pub probabilities: Vec<f64>,
}

/// `NormalDist(mean + b1*P1 + ..., variance)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianLiteral {
    pub mean: f64,
    pub terms: Vec<LinearTerm>,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearTerm {
    pub coefficient: f64,
    pub parent: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    /// Conjunction of equality tests; empty for a trailing `else`.
    pub guard: Vec<GuardTest>,
    pub body: LeafDist,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LeafDist {
    Table(TableLiteral),
    Gaussian(GaussianLiteral),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GuardTest {
    pub variable: String,
    pub state: String,
}

impl NodeDef {
    /// Identifiers referenced by guards and linear terms, in first-reference order.
    pub fn referenced_parents(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let mut push = |name: &str| {
            if !out.iter().any(|n| n == name) {
                out.push(name.to_string());
            }
        };
        let leaf_terms = |leaf: &LeafDist| -> Vec<String> {
            match leaf {
                LeafDist::Gaussian(g) => g.terms.iter().map(|t| t.parent.clone()).collect(),
                LeafDist::Table(_) => Vec::new(),
            }
        };
        match &self.distribution {
            DistExpr::Table(_) => {}
            DistExpr::Gaussian(g) => g.terms.iter().for_each(|t| push(&t.parent)),
            DistExpr::Conditional(branches) => {
                for b in branches {
                    for test in &b.guard {
                        push(&test.variable);
                    }
                    for t in leaf_terms(&b.body) {
                        push(&t);
                    }
                }
            }
        }
        out
    }
}
