//! Geospatial dangerousness pyramid: a quadtree of binary hot/cold regions.

use serde::{Deserialize, Serialize};

use super::CorpusError;
use crate::model::{BayesianNetwork, Cpd, DiscreteTable, Variable};

pub const HOT: &str = "hot_zone";
pub const COLD: &str = "cold_zone";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoParams {
    pub depth: u32,
    /// P(child hot | parent hot); the cold-parent row is its mirror.
    pub k: f64,
    pub root_hot_prior: f64,
}

impl GeoParams {
    /// Largest supported depth (the pyramid has `(4^D - 1) / 3` nodes).
    pub const MAX_DEPTH: u32 = 8;

    pub fn new(depth: u32, k: f64, root_hot_prior: f64) -> Result<Self, CorpusError> {
        GeoParams { depth, k, root_hot_prior }.validated()
    }

    pub fn validated(self) -> Result<Self, CorpusError> {
        if !(1..=Self::MAX_DEPTH).contains(&self.depth) {
            return Err(CorpusError::InvalidParams(format!("depth must be in 1..={}, got {}", Self::MAX_DEPTH, self.depth)));
        }
        if !(self.k > 0.5 && self.k < 1.0) {
            return Err(CorpusError::InvalidParams(format!("k must satisfy 0.5 < k < 1, got {}", self.k)));
        }
        if !(self.root_hot_prior > 0.0 && self.root_hot_prior < 1.0) {
            return Err(CorpusError::InvalidParams(format!(
                "root hot prior must be in (0, 1), got {}",
                self.root_hot_prior
            )));
        }
        Ok(self)
    }
}

impl Default for GeoParams {
    fn default() -> Self {
        GeoParams { depth: 3, k: 0.9, root_hot_prior: 0.05 }
    }
}

/// `DZ_<depth>_<x>_<y>`.
pub fn region_name(depth: u32, x: u32, y: u32) -> String {
    format!("DZ_{depth}_{x}_{y}")
}

/// Inverse of [`region_name`].
pub fn parse_region(name: &str) -> Option<(u32, u32, u32)> {
    let mut parts = name.strip_prefix("DZ_")?.split('_').map(|p| p.parse::<u32>().ok());
    let (d, x, y) = (parts.next()??, parts.next()??, parts.next()??);
    if parts.next().is_some() || d == 0 {
        return None;
    }
    let side = 1u32.checked_shl(d - 1)?;
    ((1..=side).contains(&x) && (1..=side).contains(&y)).then_some((d, x, y))
}

/// Region that contains `(depth, x, y)` one level up.
pub fn parent_region(depth: u32, x: u32, y: u32) -> Option<(u32, u32, u32)> {
    (depth > 1).then(|| (depth - 1, x.div_ceil(2), y.div_ceil(2)))
}

/// Builds the pyramid breadth first: depth, then x, then y.
pub fn generate_geospatial(params: &GeoParams) -> Result<BayesianNetwork, CorpusError> {
    let params = params.validated()?;
    let (k, p0) = (params.k, params.root_hot_prior);
    let mut variables = Vec::new();
    let mut cpds = Vec::new();
    for depth in 1..=params.depth {
        let side = 1u32 << (depth - 1);
        for x in 1..=side {
            for y in 1..=side {
                variables.push(Variable::discrete(&region_name(depth, x, y), &[HOT, COLD]));
                cpds.push(match parent_region(depth, x, y) {
                    None => Cpd::Table(DiscreteTable { parents: vec![], rows: vec![vec![p0, 1.0 - p0]] }),
                    Some((d, px, py)) => Cpd::Table(DiscreteTable {
                        parents: vec![region_name(d, px, py)],
                        rows: vec![vec![k, 1.0 - k], vec![1.0 - k, k]],
                    }),
                });
            }
        }
    }
    Ok(BayesianNetwork::new(variables, cpds)?)
}
