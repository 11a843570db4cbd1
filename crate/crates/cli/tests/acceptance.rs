//! Acceptance checks: one PASS/FAIL line per criterion, each with its
//! tolerance and time budget. Exits non-zero when any check fails.

use std::collections::BTreeSet;
use std::net::SocketAddr;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use bayescloud_client::Client;
use bayescloud_core::api::{InferRequest, ModelUpdate, NewModel};
use bayescloud_core::corpus::{generate_geospatial, GeoParams, HOT};
use bayescloud_core::fixtures::{SCRIPT1, SCRIPT2};
use bayescloud_core::inference::{eliminate, gibbs_query, infer, infer_clg_leaf, sample_forward, GibbsOptions};
use bayescloud_core::integration::{merge_disjoint, merge_optimize, merge_simulate, MergeOptions};
use bayescloud_core::learning::{learn_parameters, learn_structure, LearnOptions, Structure};
use bayescloud_core::model::{load_network, normal_log_density, BayesianNetwork, Cpd, DiscreteTable, Variable};
use bayescloud_core::script::{parse_evidence, Evidence};
use bayescloud_core::testutil::{enumerate_posteriors, random_binary_network, random_evidence};
use serde::Deserialize;

const EVD: &str = "EbolaVirusDisease";

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn check(name: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
        Err(format!("panicked: {}", msg.unwrap_or_default()))
    });
    let elapsed = start.elapsed();
    let result = match result {
        Ok(detail) if elapsed > budget => Err(format!("{detail}; took {elapsed:.2?}, budget {budget:?}")),
        other => other,
    };
    match &result {
        Ok(detail) => println!("PASS  {name}: {detail} [{elapsed:.2?} / {budget:?}]"),
        Err(detail) => println!("FAIL  {name}: {detail} [{elapsed:.2?} / {budget:?}]"),
    }
    result.is_ok()
}

fn q(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn prior(name: &str, p: f64) -> BayesianNetwork {
    BayesianNetwork::new(
        vec![Variable::discrete(name, &["a1", "a2"])],
        vec![Cpd::Table(DiscreteTable { parents: vec![], rows: vec![vec![p, 1.0 - p]] })],
    )
    .unwrap()
}

fn table(net: &BayesianNetwork, name: &str) -> Vec<Vec<f64>> {
    match net.cpd(net.require(name).unwrap()) {
        Cpd::Table(t) => t.rows.clone(),
        Cpd::Clg(_) => panic!("{name} is continuous"),
    }
}

fn script1_posterior() -> Outcome {
    let net = load_network(SCRIPT1).map_err(|e| e.to_string())?;
    let ev = Evidence::new().with_state("Haemorrhage", "yes");
    let oracle = enumerate_posteriors(&net, &ev).unwrap()[net.require(EVD).unwrap()][0];
    ensure((oracle - 0.09 / 0.099).abs() < 1e-12, || format!("enumeration gave {oracle}"))?;
    let exact = eliminate(&net, &ev, &q(&[EVD])).map_err(|e| e.to_string())?.probability(EVD, "has").unwrap();
    ensure((exact - oracle).abs() < 1e-9, || format!("exact {exact} vs {oracle}"))?;
    let opts = GibbsOptions { samples: 50_000, burn_in: 5_000, seed: 1 };
    let gibbs = gibbs_query(&net, &ev, &q(&[EVD]), &opts).map_err(|e| e.to_string())?.probability(EVD, "has").unwrap();
    ensure((gibbs - oracle).abs() < 0.01, || format!("gibbs {gibbs} vs {oracle}"))?;
    Ok(format!("exact {exact:.9} (|err| {:.1e} < 1e-9), gibbs {gibbs:.4} (< 0.01)", (exact - oracle).abs()))
}

fn script2_posterior() -> Outcome {
    let net = load_network(SCRIPT2).map_err(|e| e.to_string())?;
    let x = 100.0;
    let (lh, ln) = (0.1f64.ln() + normal_log_density(x, 103.0, 1.0), 0.9f64.ln() + normal_log_density(x, 98.6, 1.0));
    let oracle = 1.0 / (1.0 + (ln - lh).exp());
    let got = infer_clg_leaf(&net, &Evidence::new().with_real("Fever", x), &q(&[EVD]))
        .map_err(|e| e.to_string())?
        .probability(EVD, "has")
        .unwrap();
    ensure((got - oracle).abs() < 1e-9, || format!("{got} vs {oracle}"))?;
    Ok(format!("P(has | Fever=100) = {got:.9}, oracle {oracle:.9}"))
}

fn enumeration_equivalence() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut zero = 0;
    for seed in 0..200u64 {
        let n = 1 + (seed % 10) as usize;
        let net = random_binary_network(n, 0.4, seed);
        let ev = random_evidence(&net, seed + 1000);
        match (enumerate_posteriors(&net, &ev), eliminate(&net, &ev, &[])) {
            (Some(oracle), Ok(m)) => {
                for (i, v) in net.variables().iter().enumerate() {
                    let Some(bayescloud_core::inference::Marginal::Categorical { probabilities, .. }) = m.get(&v.name)
                    else {
                        return Err(format!("seed {seed}: missing marginal for {}", v.name));
                    };
                    for (a, b) in probabilities.iter().zip(&oracle[i]) {
                        worst = worst.max((a - b).abs());
                    }
                }
            }
            (None, Err(_)) => zero += 1,
            (oracle, got) => return Err(format!("seed {seed}: oracle {oracle:?} vs {got:?}")),
        }
    }
    ensure(worst < 1e-9, || format!("max error {worst:e}"))?;
    Ok(format!("200 networks, max |error| {worst:.1e} (< 1e-9), {zero} zero-probability cases agree"))
}

fn merge_fixed_point() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..50u64 {
        let n = 1 + (seed % 4) as usize;
        let net = random_binary_network(n, 0.5, seed);
        let (merged, _) = merge_optimize(&net, &net, &MergeOptions::default()).map_err(|e| e.to_string())?;
        ensure(merged.arcs() == net.arcs(), || format!("seed {seed}: arcs changed"))?;
        for (a, b) in merged.dense_joint().iter().zip(net.dense_joint()) {
            worst = worst.max((a - b).abs());
        }
    }
    ensure(worst < 1e-6, || format!("max joint error {worst:e}"))?;
    Ok(format!("50 networks, max joint error {worst:.1e} (< 1e-6)"))
}

fn merge_conflict() -> Outcome {
    let (a, b) = (prior("A", 0.2), prior("A", 0.4));
    let (merged, _) = merge_optimize(&a, &b, &MergeOptions::default()).map_err(|e| e.to_string())?;
    let got = table(&merged, "A")[0][0];
    let objective = |x: f64| {
        let kl = |p: f64| x * (x / p).ln() + (1.0 - x) * ((1.0 - x) / (1.0 - p)).ln();
        kl(0.2) + kl(0.4)
    };
    let (mut best, mut best_value) = (0.0, f64::INFINITY);
    for k in 1..1_000_000 {
        let x = k as f64 * 1e-6;
        let v = objective(x);
        if v < best_value {
            (best, best_value) = (x, v);
        }
    }
    ensure((got - best).abs() < 1e-4, || format!("optimize {got} vs grid {best}"))?;
    let opts = MergeOptions { sample_count: 50_000, seed: 1, ..Default::default() };
    let (sim, _) = merge_simulate(&a, &b, &opts).map_err(|e| e.to_string())?;
    let sim = table(&sim, "A")[0][0];
    ensure((sim - 0.30).abs() < 0.02, || format!("simulate {sim}"))?;
    Ok(format!("optimize {got:.5} vs grid {best:.6} (< 1e-4); simulate {sim:.4} vs 0.30 (< 0.02)"))
}

fn merge_scripts() -> Outcome {
    let (s1, s2) = (load_network(SCRIPT1).unwrap(), load_network(SCRIPT2).unwrap());
    let opts = MergeOptions { sample_count: 50_000, seed: 3, ..Default::default() };
    let (net, _) = merge_simulate(&s1, &s2, &opts).map_err(|e| e.to_string())?;
    let expected: BTreeSet<(String, String)> =
        [(EVD, "Haemorrhage"), (EVD, "Fever")].iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
    ensure(net.arcs() == expected, || format!("arcs {:?}", net.arcs()))?;
    let has = table(&net, EVD)[0][0];
    let haem = table(&net, "Haemorrhage")[0][0];
    ensure((has - 0.1).abs() < 0.01, || format!("P(has) = {has}"))?;
    ensure((haem - 0.9).abs() < 0.02, || format!("P(Haem=yes | has) = {haem}"))?;
    Ok(format!("arcs match, P(has) {has:.4} (0.1 +- 0.01), P(Haem=yes | has) {haem:.4} (0.9 +- 0.02)"))
}

fn disjoint_merge() -> Outcome {
    let a = random_binary_network(3, 0.6, 7);
    let b = random_binary_network(2, 0.6, 8).rename_variable("V0", "W0").unwrap().rename_variable("V1", "W1").unwrap();
    let (net, _) = merge_disjoint(&a, &b).map_err(|e| e.to_string())?;
    let joint = net.dense_joint();
    let cards: Vec<usize> = (0..net.len()).map(|i| net.cardinality(i)).collect();
    let mut worst: f64 = 0.0;
    for x in 0..a.len() {
        for y in a.len()..net.len() {
            let mut pxy = [[0.0f64; 2]; 2];
            for (idx, p) in joint.iter().enumerate() {
                let digit = |v: usize| (idx / cards[v + 1..].iter().product::<usize>()) % cards[v];
                pxy[digit(x)][digit(y)] += p;
            }
            let px = [pxy[0][0] + pxy[0][1], pxy[1][0] + pxy[1][1]];
            let py = [pxy[0][0] + pxy[1][0], pxy[0][1] + pxy[1][1]];
            let mut mi = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    mi += pxy[i][j] * (pxy[i][j] / (px[i] * py[j])).ln();
                }
            }
            worst = worst.max(mi.abs());
        }
    }
    ensure(net.arcs().len() == a.arcs().len() + b.arcs().len(), || "arcs changed".into())?;
    ensure(worst < 1e-12, || format!("mutual information {worst:e}"))?;
    Ok(format!("{} cross pairs, max |MI| {worst:.1e} (< 1e-12)", a.len() * b.len()))
}

fn learning_recovery() -> Outcome {
    let s1 = load_network(SCRIPT1).unwrap();
    let data = sample_forward(&s1, 100_000, 21);
    let (learned, _) = learn_parameters(&Structure::from_network(&s1), &data, &LearnOptions::default()).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for name in [EVD, "Haemorrhage"] {
        for (ra, rb) in table(&learned, name).iter().zip(table(&s1, name)) {
            for (x, y) in ra.iter().zip(rb) {
                worst = worst.max((x - y).abs());
            }
        }
    }
    let s2 = load_network(SCRIPT2).unwrap();
    let data = sample_forward(&s2, 100_000, 22);
    let (learned2, _) = learn_parameters(&Structure::from_network(&s2), &data, &LearnOptions::default()).map_err(|e| e.to_string())?;
    for (ra, rb) in table(&learned2, EVD).iter().zip(table(&s2, EVD)) {
        for (x, y) in ra.iter().zip(rb) {
            worst = worst.max((x - y).abs());
        }
    }
    ensure(worst < 0.01, || format!("max table error {worst}"))?;
    let (Cpd::Clg(got), Cpd::Clg(truth)) = (learned2.cpd(learned2.require("Fever").unwrap()), s2.cpd(s2.require("Fever").unwrap())) else {
        return Err("Fever is not CLG".into());
    };
    let mean_err = got.rows.iter().zip(&truth.rows).map(|(a, b)| (a.intercept - b.intercept).abs()).fold(0.0, f64::max);
    ensure(mean_err < 0.05, || format!("max Gaussian mean error {mean_err}"))?;

    let dependent = load_network(
        "defineNode(A); { defineState(Discrete, a1, a2); p(A) = {a1: 0.5; a2: 0.5;} }
         defineNode(B); { defineState(Discrete, b1, b2); p(B | A) = if (A == a1) {b1: 0.9; b2: 0.1;} else {b1: 0.1; b2: 0.9;} }",
    )
    .unwrap();
    let (found, _) = learn_structure(&sample_forward(&dependent, 20_000, 23), &LearnOptions::default()).map_err(|e| e.to_string())?;
    let skeleton: BTreeSet<(String, String)> =
        found.arcs().into_iter().map(|(a, b)| if a < b { (a, b) } else { (b, a) }).collect();
    ensure(skeleton == [("A".to_string(), "B".to_string())].into(), || format!("dependent arcs {:?}", found.arcs()))?;
    let independent = load_network(
        "defineNode(A); { defineState(Discrete, a1, a2); p(A) = {a1: 0.5; a2: 0.5;} }
         defineNode(B); { defineState(Discrete, b1, b2); p(B) = {b1: 0.3; b2: 0.7;} }",
    )
    .unwrap();
    let (none, _) = learn_structure(&sample_forward(&independent, 20_000, 24), &LearnOptions::default()).map_err(|e| e.to_string())?;
    ensure(none.arcs().is_empty(), || format!("independent arcs {:?}", none.arcs()))?;
    Ok(format!(
        "table error {worst:.4} (< 0.01), mean error {mean_err:.4} (< 0.05), skeleton A-B recovered, independent data gives no arcs"
    ))
}

fn geospatial() -> Outcome {
    let net = generate_geospatial(&GeoParams::default()).map_err(|e| e.to_string())?;
    ensure(net.len() == 21 && net.arcs().len() == 20, || format!("{} nodes, {} arcs", net.len(), net.arcs().len()))?;
    let regions: Vec<String> = net.variables().iter().map(|v| v.name.clone()).collect();
    let before = eliminate(&net, &Evidence::new(), &regions).map_err(|e| e.to_string())?;
    let after = eliminate(&net, &Evidence::new().with_state("DZ_3_1_3", HOT), &regions).map_err(|e| e.to_string())?;
    let p = |m: &bayescloud_core::inference::Marginals, r: &str| m.probability(r, HOT).unwrap();
    let siblings = ["DZ_3_1_4", "DZ_3_2_3", "DZ_3_2_4"];
    let cousins = ["DZ_3_1_2", "DZ_3_2_2", "DZ_3_1_1", "DZ_3_2_1", "DZ_3_3_1", "DZ_3_4_4"];
    for r in siblings.iter().chain(&cousins) {
        ensure(p(&after, r) > p(&before, r), || format!("{r} not raised"))?;
    }
    let spread = siblings.iter().map(|s| (p(&after, s) - p(&after, siblings[0])).abs()).fold(0.0, f64::max);
    ensure(spread < 1e-9, || format!("sibling spread {spread:e}"))?;
    Ok(format!(
        "21 nodes / 20 arcs; sibling {:.4} > prior {:.4}, cousin {:.4} > prior {:.4}; sibling spread {spread:.1e} (< 1e-9)",
        p(&after, siblings[0]),
        p(&before, siblings[0]),
        p(&after, cousins[0]),
        p(&before, cousins[0])
    ))
}

#[derive(Deserialize)]
struct InferFixture {
    model: String,
    evidence: String,
    query: Vec<String>,
}

fn registry_contract() -> Outcome {
    let data = tempfile::tempdir().map_err(|e| e.to_string())?;
    let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    let start = |dir: &Path| {
        let config = bayescloud_server::ServerConfig { port: 0, data_dir: dir.to_path_buf(), ui_dir: None };
        let (addr, server) =
            rt.block_on(bayescloud_server::bind(&config, SocketAddr::from(([127, 0, 0, 1], 0)))).expect("server binds");
        (Client::new(&format!("http://{addr}")), rt.spawn(server))
    };
    let (client, server) = start(data.path());
    let err = |e: bayescloud_client::ClientError| e.to_string();
    let register = |title: &str, script: &str| NewModel {
        title: title.into(),
        description: "fixture".into(),
        author: "acceptance".into(),
        keywords: vec!["ebola".into()],
        script: script.into(),
    };
    let id1 = rt.block_on(client.register(&register("Haemorrhage model", SCRIPT1))).map_err(err)?;
    let id2 = rt.block_on(client.register(&register("Fever model", SCRIPT2))).map_err(err)?;
    let hits = rt.block_on(client.search("Ebola haemorrhage")).map_err(err)?;
    ensure(hits.first().map(|h| h.id.as_str()) == Some(id1.as_str()), || "search ranking".into())?;
    let updated = rt
        .block_on(client.update(&id2, &ModelUpdate { title: Some("Fever model v2".into()), ..Default::default() }))
        .map_err(err)?;
    ensure(updated.script == SCRIPT2 && updated.updated_at > updated.created_at, || "update isolation".into())?;

    let fixtures: Vec<InferFixture> =
        serde_json::from_str(include_str!("fixtures/remote_infer.json")).map_err(|e| e.to_string())?;
    for f in &fixtures {
        let (id, script) = if f.model == "script1" { (&id1, SCRIPT1) } else { (&id2, SCRIPT2) };
        let request = InferRequest { evidence: f.evidence.clone(), query: f.query.clone(), gibbs: None };
        let remote = rt.block_on(client.infer(id, &request)).map_err(err)?;
        let net = load_network(script).unwrap();
        let (local, method) = infer(&net, &parse_evidence(&f.evidence).unwrap(), &f.query, None).map_err(|e| e.to_string())?;
        let same_bits = remote.marginals.iter().zip(local.iter()).all(|(a, b)| {
            serde_json::to_string(a).unwrap() == serde_json::to_string(b).unwrap()
        });
        ensure(remote.marginals == local && remote.method == method && same_bits, || {
            format!("{} / {:?} differs", f.model, f.evidence)
        })?;
    }

    let doomed = rt.block_on(client.register(&register("temporary", SCRIPT1))).map_err(err)?;
    rt.block_on(client.delete(&doomed)).map_err(err)?;
    ensure(rt.block_on(client.get(&doomed)).is_err(), || "deleted record still readable".into())?;
    let before = (rt.block_on(client.get(&id1)).map_err(err)?, rt.block_on(client.get(&id2)).map_err(err)?);
    server.abort();

    let (client, _server) = start(data.path());
    let after = (rt.block_on(client.get(&id1)).map_err(err)?, rt.block_on(client.get(&id2)).map_err(err)?);
    ensure(before == after, || "records changed across restart".into())?;
    ensure(rt.block_on(client.search("")).map_err(err)?.len() == 2, || "record count changed".into())?;
    Ok(format!("lifecycle ok, {} inference fixtures bit-identical, records survive restart", fixtures.len()))
}

fn main() {
    let checks: [(&str, u64, fn() -> Outcome); 10] = [
        ("script-1 posterior", 1, script1_posterior),
        ("script-2 hybrid posterior", 1, script2_posterior),
        ("enumeration equivalence", 30, enumeration_equivalence),
        ("merge fixed point", 60, merge_fixed_point),
        ("merge conflict case", 10, merge_conflict),
        ("merge of script 1 and script 2 by simulation", 30, merge_scripts),
        ("disjoint merge", 1, disjoint_merge),
        ("learning recovery", 60, learning_recovery),
        ("geospatial properties", 10, geospatial),
        ("registry contract", 10, registry_contract),
    ];
    let mut failed = 0;
    for (name, secs, f) in checks {
        if !check(name, Duration::from_secs(secs), f) {
            failed += 1;
        }
    }
    println!("{} of {} acceptance checks passed", checks.len() - failed, checks.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
