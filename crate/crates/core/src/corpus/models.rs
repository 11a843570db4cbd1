//! Regional spread, virus mutation and patient models, and their composition
//! with the geospatial pyramid. Table entries are illustrative; only their
//! directions (warning systems slow spread, larger populations raise the
//! mutation chance, severity rises with every patient-model parent) matter.

use super::geo::{generate_geospatial, region_name, GeoParams, COLD, HOT};
use super::CorpusError;
use crate::model::{BayesianNetwork, Cpd, DiscreteTable, Variable};

pub const DANGEROUSNESS: &str = "DangerousnessOfZone";
pub const HUMAN_POPULATION: &str = "HumanPopulation";
pub const IS_MUTATED: &str = "IsMutatedVirus";
pub const PATIENT_COUNTS: [&str; 4] = ["Confirmed", "Probable", "Suspected", "Fatality"];

const LEVELS: [&str; 3] = ["low", "medium", "high"];
const POPULATION_PRIOR: [f64; 3] = [0.5, 0.3, 0.2];

fn table(parents: &[&str], rows: Vec<Vec<f64>>) -> Cpd {
    Cpd::Table(DiscreteTable { parents: parents.iter().map(|p| p.to_string()).collect(), rows })
}

/// Percentages to a probability row; the last entry takes the remainder.
fn percent(head: &[u32]) -> Vec<f64> {
    let rest = 100 - head.iter().sum::<u32>();
    head.iter().chain(std::iter::once(&rest)).map(|&p| p as f64 / 100.0).collect()
}

/// HasWarningSystems -> RegionalSpreadRate -> DangerousnessOfZone.
pub fn regional_spread() -> BayesianNetwork {
    BayesianNetwork::new(
        vec![
            Variable::discrete("HasWarningSystems", &["yes", "no"]),
            Variable::discrete("RegionalSpreadRate", &["low", "high"]),
            Variable::discrete(DANGEROUSNESS, &[HOT, COLD]),
        ],
        vec![
            table(&[], vec![percent(&[50])]),
            table(&["HasWarningSystems"], vec![percent(&[90]), percent(&[70])]),
            // P(hot) = 0.05 overall, matching the default pyramid root prior.
            table(&["RegionalSpreadRate"], vec![percent(&[2]), percent(&[17])]),
        ],
    )
    .expect("regional spread model is well formed")
}

/// AnimalPopulation, HumanPopulation -> IsMutatedVirus.
pub fn virus_mutation() -> BayesianNetwork {
    let rows = (0..3u32).flat_map(|a| (0..3u32).map(move |h| percent(&[5 + 10 * (a + h)]))).collect();
    BayesianNetwork::new(
        vec![
            Variable::discrete("AnimalPopulation", &LEVELS),
            Variable::discrete(HUMAN_POPULATION, &LEVELS),
            Variable::discrete(IS_MUTATED, &["yes", "no"]),
        ],
        vec![
            table(&[], vec![POPULATION_PRIOR.to_vec()]),
            table(&[], vec![POPULATION_PRIOR.to_vec()]),
            table(&["AnimalPopulation", HUMAN_POPULATION], rows),
        ],
    )
    .expect("virus mutation model is well formed")
}

/// ReservoirPopulationSize, HumanPopulation, VirusType -> each patient count,
/// with IsMutatedVirus -> VirusType. Counts are binned into none/low/high.
pub fn patient() -> BayesianNetwork {
    let mut variables = vec![
        Variable::discrete("ReservoirPopulationSize", &["small", "large"]),
        Variable::discrete(HUMAN_POPULATION, &LEVELS),
        Variable::discrete(IS_MUTATED, &["yes", "no"]),
        Variable::discrete("VirusType", &["novel", "known"]),
    ];
    let mut cpds = vec![
        table(&[], vec![percent(&[60])]),
        table(&[], vec![POPULATION_PRIOR.to_vec()]),
        table(&[], vec![percent(&[20])]),
        table(&[IS_MUTATED], vec![percent(&[95]), percent(&[10])]),
    ];
    // (none at lowest severity, high at lowest severity) per count.
    let bases = [(60, 10), (65, 8), (70, 5), (85, 2)];
    for (name, (none, high)) in PATIENT_COUNTS.iter().zip(bases) {
        let mut rows = Vec::new();
        for r in 0..2u32 {
            for h in 0..3u32 {
                for novel in [1u32, 0] {
                    let severity = r + h + novel;
                    let high = high + 8 * severity;
                    let none = none - 12 * severity;
                    rows.push(vec![none as f64 / 100.0, (100 - none - high) as f64 / 100.0, high as f64 / 100.0]);
                }
            }
        }
        variables.push(Variable::discrete(name, &["none", "low", "high"]));
        cpds.push(table(&["ReservoirPopulationSize", HUMAN_POPULATION, "VirusType"], rows));
    }
    BayesianNetwork::new(variables, cpds).expect("patient model is well formed")
}

/// The regional spread model with its DangerousnessOfZone identified with
/// the pyramid root, ready to share that node with the geospatial model.
pub fn regional_spread_for(params: &GeoParams) -> Result<BayesianNetwork, CorpusError> {
    let _ = params.validated()?;
    Ok(regional_spread().rename_variable(DANGEROUSNESS, &region_name(1, 1, 1))?)
}

/// Arc-union composition of the four models. A variable defined by several
/// parts takes its distribution from the part where it has parents: the root
/// region from regional spread, IsMutatedVirus from the mutation model.
pub fn integrated(params: &GeoParams) -> Result<BayesianNetwork, CorpusError> {
    let parts = [regional_spread_for(params)?, generate_geospatial(params)?, virus_mutation(), patient()];
    let mut variables: Vec<Variable> = Vec::new();
    let mut cpds: Vec<Cpd> = Vec::new();
    for part in &parts {
        for (v, cpd) in part.variables().iter().zip(part.cpds()) {
            match variables.iter().position(|w| w.name == v.name) {
                Some(existing) => {
                    if cpds[existing].parents().is_empty() && !cpd.parents().is_empty() {
                        cpds[existing] = cpd.clone();
                    }
                }
                None => {
                    variables.push(v.clone());
                    cpds.push(cpd.clone());
                }
            }
        }
    }
    Ok(BayesianNetwork::new(variables, cpds)?)
}
