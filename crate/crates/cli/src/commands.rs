use std::fs;

use anyhow::{anyhow, Context};
use lcd_core::adjustment::{ate_set, check_gbc, optimal_adjustment_set, possible_descendants, AteSet, EffectEstimator, OptimalSet};
use lcd_core::bench::{execute, records_csv, report, SuiteSpec};
use lcd_core::ci::{CiQuery, CiVerdict};
use lcd_core::discovery::{self, run_combined, run_sd};
use lcd_core::faithfulness::{hybrid_procedure, test_mff, test_sd_result, FaithfulnessVerdict, HybridOrder};
use lcd_core::fixtures;
use lcd_core::io::{graph_to_json, model_to_json, overrides_to_json, to_pretty, AteReport, DiscoveryReport, SCHEMA};
use lcd_core::synth::{generate_graph, sample_data, sample_sem, CovMed, DgpConfig, DgpKind};
use lcd_core::{Algorithm, CiError, Dag, LocalStructure, NodeSet};
use rayon::prelude::*;
use serde::Serialize;

use crate::inputs::{emit, load_graph, read, setup, Setup};
use crate::{
    engine, input, AdjustArgs, BenchArgs, CmdResult, DiscoverArgs, FaithfulnessArgs, Failure,
    GenerateArgs, GeneratorKind, OrderArg, SampleArgs, TesterKind,
};

fn ci_failure(e: CiError) -> Failure {
    match e {
        CiError::CapReached(_) => Failure::Capped,
        e => engine(e),
    }
}

fn names_of(names: &[String], s: &NodeSet) -> Vec<String> {
    s.iter().map(|&v| names[v].clone()).collect()
}

pub fn generate(args: &GenerateArgs) -> CmdResult {
    if let Some(name) = &args.fixture {
        return generate_fixture(args, name);
    }
    let cfg = match (&args.config, args.kind) {
        (Some(path), _) => serde_json::from_str::<DgpConfig>(&read(path)?)
            .with_context(|| format!("parsing {}", path.display()))
            .map_err(input)?,
        (None, Some(kind)) => {
            let kind = match kind {
                GeneratorKind::CovMed => DgpKind::CovMed(CovMed::default()),
                GeneratorKind::ErdosRenyi => DgpKind::ErdosRenyi {
                    n: args.nodes,
                    p: args.edge_prob,
                },
                GeneratorKind::Fig5a => DgpKind::Fig5a { clique: args.clique },
                GeneratorKind::Fig5b => DgpKind::Fig5b {
                    sep: args.sep,
                    clique: args.clique,
                },
            };
            DgpConfig::new(kind, args.seed)
        }
        (None, None) => return Err(input(anyhow!("give one of --config, --kind or --fixture"))),
    };
    let g = generate_graph(&cfg).map_err(input)?;
    emit(args.out.as_ref(), &graph_text(&g, args))
}

fn graph_text(g: &Dag, args: &GenerateArgs) -> String {
    if args.structure_only {
        graph_to_json(g)
    } else {
        model_to_json(&sample_sem(g, args.seed))
    }
}

fn generate_fixture(args: &GenerateArgs, name: &str) -> CmdResult {
    let (g, overrides) = match name {
        "fig1" => (fixtures::fig1(), None),
        "fig5a" => (fixtures::fig5a(args.clique), None),
        "fig5b" => (fixtures::fig5b(args.sep, args.clique), None),
        other => {
            let s = fixtures::scenario(other)
                .ok_or_else(|| input(anyhow!("unknown fixture `{other}`")))?;
            (s.graph, Some(s.overrides))
        }
    };
    match (&args.overrides_out, overrides) {
        (Some(path), Some(ov)) => fs::write(path, overrides_to_json(&ov, &g))
            .with_context(|| format!("writing {}", path.display()))
            .map_err(input)?,
        (Some(_), None) => {
            return Err(input(anyhow!("fixture `{name}` has no overrides")));
        }
        _ => {}
    }
    emit(args.out.as_ref(), &graph_text(&g, args))
}

pub fn sample(args: &SampleArgs) -> CmdResult {
    let file = load_graph(&args.graph)?;
    let model = match (&file.weights, &file.noise_var) {
        (None, None) => sample_sem(&file.dag, args.seed),
        _ => file
            .model()
            .ok_or_else(|| input(anyhow!("graph file needs both weights and noise variances")))?,
    };
    let data = sample_data(&model, args.samples, args.seed);
    let mut buf = Vec::new();
    data.write_csv(&mut buf).map_err(input)?;
    emit(args.out.as_ref(), &String::from_utf8(buf).expect("csv output is UTF-8"))
}

#[derive(Serialize)]
struct DiscoverOutput {
    schema: &'static str,
    discovery: DiscoveryReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    winner: Option<Algorithm>,
    ate: AteReport,
}

fn run(st: &Setup, algo: Algorithm) -> Result<(LocalStructure, Option<Algorithm>), Failure> {
    if algo == Algorithm::Combined {
        let r = run_combined(|_| st.src.fork(), st.x).map_err(ci_failure)?;
        return Ok((r.structure, Some(r.winner)));
    }
    let ls = discovery::discover(&st.src, st.x, algo).map_err(ci_failure)?;
    Ok((ls, None))
}

pub fn discover(args: &DiscoverArgs) -> CmdResult {
    if args.trace && args.algo == Algorithm::Combined {
        return Err(input(anyhow!("--trace is not available with --algo combined")));
    }
    let st = setup(&args.engine, args.trace)?;
    let (ls, winner) = run(&st, args.algo)?;
    let ate = if ls.capped {
        AteSet::new(args.algo.name())
    } else {
        ate_set(&ls, st.y, &st.estimator, args.algo.name()).map_err(engine)?
    };
    let trace = args.trace.then(|| st.src.trace());
    let out = DiscoverOutput {
        schema: SCHEMA,
        discovery: DiscoveryReport::new(args.algo.name(), &ls, &st.names, trace.as_deref()),
        winner,
        ate: AteReport::new(&ate, &st.names, st.x, st.y),
    };
    emit(args.out.as_ref(), &to_pretty(&out))?;
    if ls.capped {
        return Err(Failure::Capped);
    }
    Ok(())
}

#[derive(Serialize)]
struct SetReport {
    set: Vec<String>,
    theta: f64,
}

#[derive(Serialize)]
struct CheckReport {
    set: Vec<String>,
    valid: bool,
    failing_witness: Option<String>,
}

#[derive(Serialize)]
struct AdjustOutput {
    schema: &'static str,
    algorithm: Algorithm,
    treatment: String,
    outcome: String,
    possible_descendants: Vec<String>,
    /// `None` when no valid adjustment set exists.
    optimal: Option<SetReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    check: Option<CheckReport>,
}

pub fn adjust(args: &AdjustArgs) -> CmdResult {
    let st = setup(&args.engine, false)?;
    let (ls, _) = run(&st, args.algo)?;
    if ls.capped {
        return Err(Failure::Capped);
    }
    let poss = possible_descendants(&st.src, &ls).map_err(ci_failure)?;
    let optimal = match optimal_adjustment_set(&st.src, &ls, st.y).map_err(ci_failure)? {
        OptimalSet::NoValidAdj => None,
        OptimalSet::Set(s) => Some(SetReport {
            set: names_of(&st.names, &s),
            theta: st.estimator.theta(st.x, st.y, &s).map_err(engine)?,
        }),
    };
    let check = match &args.set {
        None => None,
        Some(names) => {
            let z: NodeSet = names
                .iter()
                .filter(|n| !n.is_empty())
                .map(|n| st.node(n))
                .collect::<Result<_, _>>()?;
            let r = check_gbc(&st.src, &ls, st.y, &z).map_err(|e| match e {
                CiError::InvalidQuery(m) => input(anyhow!(m)),
                e => ci_failure(e),
            })?;
            Some(CheckReport {
                set: names_of(&st.names, &z),
                valid: r.valid,
                failing_witness: r.failing_witness.map(|v| st.names[v].clone()),
            })
        }
    };
    let out = AdjustOutput {
        schema: SCHEMA,
        algorithm: args.algo,
        treatment: st.names[st.x].clone(),
        outcome: st.names[st.y].clone(),
        possible_descendants: names_of(&st.names, &poss),
        optimal,
        check,
    };
    emit(args.out.as_ref(), &to_pretty(&out))
}

#[derive(Serialize)]
struct QueryReport {
    a: String,
    b: String,
    s: Vec<String>,
    independent: bool,
}

#[derive(Serialize)]
struct VerdictReport {
    /// Tested node for `mff`; collider endpoints and middle for `sd`.
    subject: Vec<String>,
    status: lcd_core::faithfulness::FaithfulnessStatus,
    evidence: Vec<QueryReport>,
}

#[derive(Serialize)]
struct FaithfulnessOutput {
    schema: &'static str,
    test: &'static str,
    treatment: String,
    fail: bool,
    verdicts: Vec<VerdictReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    switched: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ate: Option<AteReport>,
}

fn verdict_report(names: &[String], subject: Vec<String>, v: &FaithfulnessVerdict) -> VerdictReport {
    let query = |(q, r): &(CiQuery, CiVerdict)| QueryReport {
        a: names[q.a()].clone(),
        b: names[q.b()].clone(),
        s: q.s().iter().map(|&v| names[v].clone()).collect(),
        independent: r.independent,
    };
    VerdictReport {
        subject,
        status: v.status,
        evidence: v.evidence.iter().map(query).collect(),
    }
}

pub fn faithfulness(args: &FaithfulnessArgs) -> CmdResult {
    let st = setup(&args.engine, false)?;
    let names = &st.names;
    let mut out = FaithfulnessOutput {
        schema: SCHEMA,
        test: match args.test {
            TesterKind::Mff => "mff",
            TesterKind::Sd => "sd",
            TesterKind::Hybrid => "hybrid",
        },
        treatment: names[st.x].clone(),
        fail: false,
        verdicts: Vec::new(),
        switched: None,
        ate: None,
    };
    match args.test {
        TesterKind::Mff => {
            let ls = discovery::discover(&st.src, st.x, Algorithm::Ldecc).map_err(ci_failure)?;
            let ne = ls.neighbors();
            let nodes: Vec<usize> = match &args.node {
                Some(n) => {
                    let v = st.node(n)?;
                    if v == st.x || ne.contains(&v) {
                        return Err(input(anyhow!("`{n}` is the treatment or one of its neighbors")));
                    }
                    vec![v]
                }
                None => (0..names.len())
                    .filter(|v| *v != st.x && !ne.contains(v))
                    .collect(),
            };
            for v in nodes {
                let verdict = test_mff(&st.src, st.x, &ne, v).map_err(ci_failure)?;
                out.verdicts
                    .push(verdict_report(names, vec![names[v].clone()], &verdict));
            }
        }
        TesterKind::Sd => {
            let ls = run_sd(&st.src, st.x, false).map_err(ci_failure)?;
            for (uc, _, verdict) in test_sd_result(&st.src, &ls).map_err(ci_failure)? {
                let subject = [uc.p, uc.r, uc.q].iter().map(|&v| names[v].clone()).collect();
                out.verdicts.push(verdict_report(names, subject, &verdict));
            }
        }
        TesterKind::Hybrid => {
            let order = match args.order {
                OrderArg::SdFirst => HybridOrder::SdFirst,
                OrderArg::LdeccFirst => HybridOrder::LdeccFirst,
            };
            let h = hybrid_procedure(&st.src, st.x, st.y, order, &st.estimator)
                .map_err(ci_failure)?;
            for v in &h.verdicts {
                out.verdicts.push(verdict_report(names, Vec::new(), v));
            }
            out.switched = Some(h.switched);
            out.ate = Some(AteReport::new(&h.ate, names, st.x, st.y));
        }
    }
    out.fail = out
        .verdicts
        .iter()
        .any(|v| v.status == lcd_core::faithfulness::FaithfulnessStatus::Fail);
    emit(args.out.as_ref(), &to_pretty(&out))
}

pub fn bench(args: &BenchArgs) -> CmdResult {
    let mut suite: SuiteSpec = serde_json::from_str(&read(&args.suite)?)
        .with_context(|| format!("parsing {}", args.suite.display()))
        .map_err(input)?;
    if args.test_cap.is_some() {
        suite.test_cap = args.test_cap;
    }
    let runs = lcd_core::bench::expand(&suite);
    let records: Vec<_> = runs
        .par_iter()
        .map(|r| execute(r, &suite.ci, suite.test_cap))
        .collect();
    let csv = records_csv(&records).map_err(input)?;
    let json = to_pretty(&report(records));
    match &args.out {
        None => emit(None, &json),
        Some(dir) => {
            fs::create_dir_all(dir)
                .with_context(|| format!("creating {}", dir.display()))
                .map_err(input)?;
            emit(Some(&dir.join("records.csv")), &csv)?;
            emit(Some(&dir.join("report.json")), &json)
        }
    }
}
