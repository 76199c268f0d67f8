use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, Context};
use lcd_core::adjustment::{AdjustmentError, EffectEstimator, SemCovariance};
use lcd_core::io::{parse_graph, parse_overrides, GraphFile};
use lcd_core::synth::sample_sem;
use lcd_core::{CiSource, Dataset, NodeSet};

use crate::{input, CiKind, EngineArgs, Failure};

pub fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(input)
}

pub fn load_graph(path: &Path) -> Result<GraphFile, Failure> {
    parse_graph(&read(path)?)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(input)
}

/// Writes `text` to `out`, or to stdout when no path is given.
pub fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text)
            .with_context(|| format!("writing {}", p.display()))
            .map_err(input),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Effect estimates for a run: population values from the SEM under the
/// graph engines, least squares on the data under Fisher-z.
pub enum Estimator {
    Population(SemCovariance),
    Sample(Arc<Dataset>),
}

impl EffectEstimator for Estimator {
    fn theta(&self, x: usize, y: usize, s: &NodeSet) -> Result<f64, AdjustmentError> {
        match self {
            Estimator::Population(c) => c.theta(x, y, s),
            Estimator::Sample(d) => d.theta(x, y, s),
        }
    }
}

/// Everything a CI-driven command needs.
pub struct Setup {
    pub src: CiSource,
    pub names: Vec<String>,
    pub estimator: Estimator,
    pub x: usize,
    pub y: usize,
}

impl Setup {
    pub fn node(&self, name: &str) -> Result<usize, Failure> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| input(anyhow!("unknown node `{name}`")))
    }
}

pub fn setup(args: &EngineArgs, trace: bool) -> Result<Setup, Failure> {
    let (src, names, estimator) = match args.ci {
        CiKind::FisherZ => {
            let path = args
                .data
                .as_ref()
                .ok_or_else(|| input(anyhow!("--ci fisher-z needs --data")))?;
            let data = Arc::new(
                Dataset::from_csv_path(path)
                    .with_context(|| format!("reading {}", path.display()))
                    .map_err(input)?,
            );
            let src = CiSource::fisher_z(data.clone(), args.alpha).map_err(input)?;
            (src, data.names().to_vec(), Estimator::Sample(data))
        }
        CiKind::Oracle | CiKind::Scripted => {
            let path = args
                .graph
                .as_ref()
                .ok_or_else(|| input(anyhow!("--ci {:?} needs --graph", args.ci)))?;
            let file = load_graph(path)?;
            let model = match file.model() {
                Some(m) => m,
                None => sample_sem(&file.dag, args.seed),
            };
            let dag = Arc::new(file.dag);
            let src = match (args.ci, &args.overrides) {
                (CiKind::Scripted, Some(p)) => {
                    let ov = parse_overrides(&read(p)?, &dag)
                        .with_context(|| format!("parsing {}", p.display()))
                        .map_err(input)?;
                    CiSource::scripted(dag.clone(), &ov)
                }
                (CiKind::Scripted, None) => {
                    return Err(input(anyhow!("--ci scripted needs --overrides")))
                }
                (_, Some(_)) => {
                    return Err(input(anyhow!("--overrides only applies to --ci scripted")))
                }
                _ => CiSource::oracle(dag.clone()),
            };
            (src, dag.names().to_vec(), Estimator::Population(model.covariance()))
        }
    };
    let mut out = Setup {
        src: src.with_cap(args.test_cap).with_trace(trace),
        names,
        estimator,
        x: 0,
        y: 0,
    };
    out.x = out.node(&args.treatment)?;
    out.y = out.node(&args.outcome)?;
    if out.x == out.y {
        return Err(input(anyhow!("treatment and outcome must differ")));
    }
    Ok(out)
}
