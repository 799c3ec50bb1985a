//! Benchmark sweeps: one row per (network, protocol) cell.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use log::info;
use radiosync::analysis::{time_bound, BoundMode};
use radiosync::model::VerifyStatus;
use radiosync::protocols::{
    baseline_cycle_len, baseline_families, block_regime_delta, run_baseline_selective, run_broadcast, run_wakeup,
    WakeSchedule,
};
use radiosync::radionet::{gen_network, NetworkModel, RadioNetwork};
use radiosync::synchronizer::SynchronizerFamily;
use rayon::prelude::*;
use serde::Deserialize;

use crate::formats::{read_family, write_family, FamilyFile};
use crate::{generate, CliError, GenKind, GenRequest};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    /// Seed for every generated family.
    pub seed: u64,
    #[serde(default = "default_c_urs")]
    pub c_urs: f64,
    #[serde(default = "default_c_block")]
    pub c_block: f64,
    #[serde(default = "default_c_sel")]
    pub c_sel: f64,
    #[serde(default = "default_c_sel")]
    pub c_baseline: f64,
    #[serde(default = "default_attempts")]
    pub max_attempts: u32,
    /// Samples per verification beyond the exhaustive budgets.
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default = "default_protocols")]
    pub protocols: Vec<Protocol>,
    pub sweep: Vec<Sweep>,
}

fn default_c_urs() -> f64 {
    8.0
}
fn default_c_block() -> f64 {
    2.0
}
fn default_c_sel() -> f64 {
    3.0
}
fn default_attempts() -> u32 {
    50
}
fn default_trials() -> u64 {
    2000
}
fn default_protocols() -> Vec<Protocol> {
    vec![Protocol::Broadcast, Protocol::Wakeup, Protocol::Baseline]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    Broadcast,
    Wakeup,
    Baseline,
}

impl Protocol {
    fn as_str(&self) -> &'static str {
        match self {
            Protocol::Broadcast => "broadcast",
            Protocol::Wakeup => "wakeup",
            Protocol::Baseline => "baseline",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Sweep {
    LayeredRandom { layers: Vec<usize>, width: Vec<usize>, seeds: Vec<u64> },
    RandomDag { n: Vec<usize>, p: f64, seeds: Vec<u64> },
    BoundedIndeg { n: Vec<usize>, cap: Vec<usize>, seeds: Vec<u64> },
}

impl Sweep {
    fn models(&self) -> Vec<(String, NetworkModel)> {
        let mut out = Vec::new();
        match self {
            Sweep::LayeredRandom { layers, width, seeds } => {
                for &l in layers {
                    for &w in width {
                        for &seed in seeds {
                            out.push((format!("layered-random(L={l} w={w})"), NetworkModel::LayeredRandom { layers: l, width: w, seed }));
                        }
                    }
                }
            }
            Sweep::RandomDag { n, p, seeds } => {
                for &n in n {
                    for &seed in seeds {
                        out.push((format!("random-dag(n={n} p={p})"), NetworkModel::RandomDag { n, p: *p, seed }));
                    }
                }
            }
            Sweep::BoundedIndeg { n, cap, seeds } => {
                for &n in n {
                    for &cap in cap {
                        for &seed in seeds {
                            out.push((format!("bounded-indeg(n={n} cap={cap})"), NetworkModel::BoundedIndeg { n, cap, seed }));
                        }
                    }
                }
            }
        }
        out
    }
}

fn model_seed(model: &NetworkModel) -> u64 {
    match *model {
        NetworkModel::LayeredRandom { seed, .. } | NetworkModel::RandomDag { seed, .. } | NetworkModel::BoundedIndeg { seed, .. } => {
            seed
        }
        _ => 0,
    }
}

pub fn parse_config(text: &str) -> Result<BenchConfig, CliError> {
    toml::from_str(text).map_err(|e| {
        let line = e.span().map_or(1, |s| text[..s.start].matches('\n').count() + 1);
        CliError::Parse { line, msg: e.message().to_string() }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub cell: usize,
    pub protocol: Protocol,
    pub model: String,
    pub net_seed: u64,
    pub n: usize,
    pub ecc: usize,
    pub delta: usize,
    pub family: String,
    pub verification: String,
    pub completion: Option<u64>,
    pub bound: Option<u64>,
    pub error: String,
}

impl BenchRow {
    pub fn ratio(&self) -> Option<f64> {
        match (self.completion, self.bound) {
            (Some(c), Some(b)) if b > 0 => Some(c as f64 / b as f64),
            _ => None,
        }
    }
}

pub const CSV_HEADER: &str = "protocol,model,net_seed,n,D,delta,family,verification,completion,bound,ratio,error";

pub fn rows_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    let opt = |x: Option<u64>| x.map_or(String::new(), |x| x.to_string());
    for r in rows {
        let ratio = r.ratio().map_or(String::new(), |x| format!("{x:.4}"));
        let _ = writeln!(
            out,
            "{},\"{}\",{},{},{},{},{},{},{},{},{},\"{}\"",
            r.protocol.as_str(),
            r.model,
            r.net_seed,
            r.n,
            r.ecc,
            r.delta,
            r.family,
            r.verification,
            opt(r.completion),
            opt(r.bound),
            ratio,
            r.error.replace('"', "'")
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum FamilyKey {
    Urs { n: usize },
    Block { n: usize, ecc: usize, delta: usize },
}

impl FamilyKey {
    fn file_name(&self, cfg: &BenchConfig) -> String {
        match self {
            FamilyKey::Urs { n } => format!("urs-n{n}-c{}-seed{}.fam", cfg.c_urs, cfg.seed),
            FamilyKey::Block { n, ecc, delta } => {
                format!("block-n{n}-D{ecc}-delta{delta}-c{}-csel{}-seed{}.fam", cfg.c_block, cfg.c_sel, cfg.seed)
            }
        }
    }

    fn request(&self, cfg: &BenchConfig) -> GenRequest {
        let (kind, c) = match *self {
            FamilyKey::Urs { n } => (GenKind::Urs { n }, cfg.c_urs),
            FamilyKey::Block { n, ecc, delta } => (GenKind::Block { n, ecc, delta, c_sel: cfg.c_sel }, cfg.c_block),
        };
        GenRequest { kind, c, seed: cfg.seed, max_attempts: cfg.max_attempts, mode: None, trials: cfg.trials }
    }
}

struct Cell {
    label: String,
    model: NetworkModel,
    net: Result<RadioNetwork, String>,
}

/// Runs the sweep. Families are cached in `out_dir/families` keyed by kind,
/// parameters, constant and seed; rows come back in canonical order.
pub fn run_bench(cfg: &BenchConfig, out_dir: &Path) -> Result<Vec<BenchRow>, CliError> {
    let fam_dir = out_dir.join("families");
    std::fs::create_dir_all(&fam_dir)?;
    let cells: Vec<Cell> = cfg
        .sweep
        .iter()
        .flat_map(Sweep::models)
        .map(|(label, model)| Cell { label, model, net: gen_network(model).map_err(|e| e.to_string()) })
        .collect();

    let mut keys = Vec::new();
    for cell in &cells {
        let Ok(net) = &cell.net else { continue };
        let (n, ecc, delta) = (net.n(), net.ecc().unwrap_or(0), net.max_indegree());
        if cfg.protocols.contains(&Protocol::Wakeup) {
            keys.push(FamilyKey::Urs { n });
        }
        if cfg.protocols.contains(&Protocol::Broadcast) {
            if let Some(d) = block_regime_delta(n, ecc, delta) {
                keys.push(FamilyKey::Block { n, ecc, delta: d });
            }
        }
    }
    keys.sort();
    keys.dedup();

    let mut families: BTreeMap<FamilyKey, Result<SynchronizerFamily, String>> = BTreeMap::new();
    for key in keys {
        let path = fam_dir.join(key.file_name(cfg));
        let loaded = if path.exists() {
            info!("reusing cached family {}", path.display());
            std::fs::read_to_string(&path)
                .map_err(CliError::from)
                .and_then(|t| read_family(&t))
                .map_err(|e| e.to_string())
        } else {
            info!("generating family {}", path.display());
            let made = generate(&key.request(cfg));
            if let Ok(file) = &made {
                std::fs::write(&path, write_family(file))?;
            }
            made.map_err(|e| e.to_string())
        };
        let family = loaded.and_then(|f| match f {
            FamilyFile::Sync { family, .. } => Ok(family),
            FamilyFile::Selective { .. } => Err("cached file holds a selective family".to_string()),
        });
        families.insert(key, family);
    }

    let mut rows: Vec<BenchRow> = cells
        .par_iter()
        .enumerate()
        .flat_map_iter(|(i, cell)| cfg.protocols.iter().map(move |&p| (i, cell, p)))
        .map(|(i, cell, protocol)| run_cell(cfg, i, cell, protocol, &families))
        .collect();
    rows.sort_by_key(|r| (r.cell, r.protocol));
    Ok(rows)
}

fn status_str(s: VerifyStatus) -> String {
    s.to_string()
}

fn run_cell(
    cfg: &BenchConfig,
    index: usize,
    cell: &Cell,
    protocol: Protocol,
    families: &BTreeMap<FamilyKey, Result<SynchronizerFamily, String>>,
) -> BenchRow {
    let mut row = BenchRow {
        cell: index,
        protocol,
        model: cell.label.clone(),
        net_seed: model_seed(&cell.model),
        n: 0,
        ecc: 0,
        delta: 0,
        family: String::new(),
        verification: String::new(),
        completion: None,
        bound: None,
        error: String::new(),
    };
    let net = match &cell.net {
        Ok(net) => net,
        Err(e) => {
            row.error = e.clone();
            return row;
        }
    };
    row.n = net.n();
    row.ecc = net.ecc().unwrap_or(0);
    row.delta = net.max_indegree();
    let (n, ecc, delta) = (row.n, row.ecc.max(1), row.delta.max(1));
    let outcome: Result<(Option<u64>, u64), String> = (|| match protocol {
        Protocol::Broadcast => {
            let d = block_regime_delta(n, ecc, delta).ok_or("outside the block regime; see baseline")?;
            let family = families[&FamilyKey::Block { n, ecc, delta: d }].as_ref().map_err(Clone::clone)?;
            row.family = format!("block(D={ecc} delta={d} BB={} c={})", family.sync_block_len(), family.params.c);
            row.verification = status_str(family.verified);
            let bound = time_bound(BoundMode::Broadcast { big_block: family.sync_block_len() }, n, ecc, delta, family.params.c)
                .map_err(|e| e.to_string())?;
            let trace = run_broadcast(net, family, 10 * bound).map_err(|e| e.to_string())?;
            Ok((trace.completion, bound))
        }
        Protocol::Wakeup => {
            let family = families[&FamilyKey::Urs { n }].as_ref().map_err(Clone::clone)?;
            row.family = format!("urs(c={})", family.params.c);
            row.verification = status_str(family.verified);
            let bound = time_bound(BoundMode::Wakeup, n, ecc, delta, family.params.c).map_err(|e| e.to_string())?;
            let mut wake = vec![None; n];
            wake[net.source().unwrap_or(0)] = Some(0);
            let wake = WakeSchedule::new(wake).map_err(|e| e.to_string())?;
            let trace = run_wakeup(net, family, &wake, 10 * bound).map_err(|e| e.to_string())?;
            Ok((trace.completion, bound))
        }
        Protocol::Baseline => {
            let fams = baseline_families(n, delta, true, cfg.c_baseline, cfg.seed).map_err(|e| e.to_string())?;
            row.family = format!("selective(k<={} c={})", fams.last().map_or(0, |f| f.k()), cfg.c_baseline);
            row.verification = fams
                .iter()
                .map(|f| f.verified.to_string())
                .min()
                .unwrap_or_default();
            let bound = 2 * ecc as u64 * baseline_cycle_len(&fams);
            let trace = run_baseline_selective(net, true, cfg.c_baseline, cfg.seed, 10 * bound).map_err(|e| e.to_string())?;
            Ok((trace.completion, bound))
        }
    })();
    match outcome {
        Ok((completion, bound)) => {
            row.completion = completion;
            row.bound = Some(bound);
            if completion.is_none() {
                row.error = "did not complete".into();
            }
        }
        Err(e) => row.error = e,
    }
    row
}
