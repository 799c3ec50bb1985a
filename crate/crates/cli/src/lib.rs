//! Command implementations behind the `radiosync` binary: family
//! generation and verification, simulation, and benchmark sweeps.

pub mod bench;
pub mod formats;

use std::fmt::Write as _;

use radiosync::analysis::{time_bound, BoundMode};
use radiosync::oracle::{
    exhaustive_selective_feasible, generate_verified_block, generate_verified_selective, generate_verified_upper_block,
    generate_verified_urs, verify_block_synchronizer, verify_selective_family, verify_urs, Mode, Verdict, Witness,
    EXHAUSTIVE_MAX_N_BLOCK, EXHAUSTIVE_MAX_N_URS,
};
use radiosync::protocols::{
    baseline_cycle_len, baseline_families, run_baseline_selective, run_broadcast, run_wakeup, SimulationTrace,
    WakeSchedule,
};
use radiosync::radionet::RadioNetwork;
use radiosync::synchronizer::FamilyKind;
use thiserror::Error;

use crate::formats::FamilyFile;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("incompatible inputs: {0}")]
    Incompatible(String),
    #[error(transparent)]
    Lib(#[from] radiosync::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 1 for failed generation, 2 for budget refusals, 3 for bad input.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Lib(radiosync::Error::GenerationFailed { .. }) => 1,
            CliError::Lib(radiosync::Error::BudgetExceeded(_)) => 2,
            _ => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GenKind {
    Selective { n: usize, k: usize },
    Urs { n: usize },
    UpperBlock { n: usize, ecc: usize, delta: usize },
    Block { n: usize, ecc: usize, delta: usize, c_sel: f64 },
}

impl GenKind {
    pub fn n(&self) -> usize {
        match *self {
            GenKind::Selective { n, .. }
            | GenKind::Urs { n }
            | GenKind::UpperBlock { n, .. }
            | GenKind::Block { n, .. } => n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenRequest {
    pub kind: GenKind,
    pub c: f64,
    pub seed: u64,
    pub max_attempts: u32,
    /// `None` picks exhaustive mode when it fits the budgets.
    pub mode: Option<Mode>,
    pub trials: u64,
}

/// Exhaustive when the budgets allow, otherwise `trials` samples.
pub fn default_mode(kind: &GenKind, trials: u64, seed: u64) -> Mode {
    let exhaustive = match *kind {
        GenKind::Selective { n, k } => exhaustive_selective_feasible(n, k),
        GenKind::Urs { n } => n <= EXHAUSTIVE_MAX_N_URS,
        GenKind::UpperBlock { n, .. } | GenKind::Block { n, .. } => n <= EXHAUSTIVE_MAX_N_BLOCK,
    };
    if exhaustive {
        Mode::Exhaustive
    } else {
        Mode::Sampled { trials, seed }
    }
}

pub fn generate(req: &GenRequest) -> Result<FamilyFile, CliError> {
    let mode = req.mode.unwrap_or_else(|| default_mode(&req.kind, req.trials, req.seed));
    let (c, attempts, seed) = (req.c, req.max_attempts, req.seed);
    Ok(match req.kind {
        GenKind::Selective { n, k } => {
            let g = generate_verified_selective(n, k, c, mode, attempts, seed)?;
            FamilyFile::Selective { family: g.family, attempts: g.attempts }
        }
        GenKind::Urs { n } => {
            let g = generate_verified_urs(n, c, mode, attempts, seed)?;
            FamilyFile::Sync { family: g.family, attempts: g.attempts }
        }
        GenKind::UpperBlock { n, ecc, delta } => {
            let g = generate_verified_upper_block(n, ecc, delta, c, mode, attempts, seed)?;
            FamilyFile::Sync { family: g.family, attempts: g.attempts }
        }
        GenKind::Block { n, ecc, delta, c_sel } => {
            let g = generate_verified_block(n, ecc, delta, c, c_sel, mode, attempts, seed)?;
            FamilyFile::Sync { family: g.family, attempts: g.attempts }
        }
    })
}

/// Re-verifies a family file. `delta` overrides the stored in-degree bound
/// for block families.
pub fn verify(file: &FamilyFile, mode: Mode, delta: Option<usize>) -> Result<Verdict, CliError> {
    Ok(match file {
        FamilyFile::Selective { family, .. } => verify_selective_family(family, mode)?,
        FamilyFile::Sync { family, .. } => match family.kind {
            FamilyKind::Urs => verify_urs(family, mode)?,
            _ => verify_block_synchronizer(family, delta.unwrap_or(family.params.delta), mode)?,
        },
    })
}

/// Small text record of a verdict, with 1-based node ids.
pub fn verdict_record(verdict: &Verdict) -> String {
    let mut out = String::new();
    match &verdict.counterexample {
        None => {
            let _ = writeln!(out, "status={}", verdict.status);
        }
        Some(cx) => {
            let members = match &cx.witness {
                Witness::Set(set) => set.iter().map(|v| (v + 1).to_string()).collect::<Vec<_>>(),
                Witness::Core(core) => core.members.iter().map(|(v, o)| format!("{}@{o}", v + 1)).collect(),
            };
            let _ = writeln!(out, "status=falsified");
            let _ = writeln!(out, "counterexample={}", members.join(";"));
            let _ = writeln!(out, "unit={}", cx.unit);
            let _ = writeln!(out, "window={}", cx.window);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimRequest {
    Broadcast,
    Wakeup { wake: WakeSchedule },
    Baseline { k_doubling: bool, c: f64, seed: u64 },
}

/// Runs one simulation. `max_steps` defaults to ten times the mode's bound.
/// Returns the trace and the seed to record in its header.
pub fn simulate(
    net: &RadioNetwork,
    family: Option<&FamilyFile>,
    req: &SimRequest,
    max_steps: Option<u64>,
) -> Result<(SimulationTrace, u64), CliError> {
    let family_seed = family.map_or(0, FamilyFile::seed);
    let sync = match family {
        Some(FamilyFile::Sync { family, .. }) => Some(family),
        Some(FamilyFile::Selective { .. }) => {
            return Err(CliError::Incompatible("simulation needs a synchronizer family".into()))
        }
        None => None,
    };
    if let Some(f) = sync {
        if f.n() != net.n() {
            return Err(CliError::Incompatible(format!("family has n={}, graph has n={}", f.n(), net.n())));
        }
    }
    let n = net.n();
    let ecc = net.ecc().unwrap_or(n.saturating_sub(1)).max(1);
    let delta = net.max_indegree().max(1);
    match req {
        SimRequest::Broadcast => {
            let f = sync.ok_or_else(|| CliError::Incompatible("broadcast needs a block family".into()))?;
            let limit = max_steps
                .unwrap_or(10 * time_bound(BoundMode::Broadcast { big_block: f.sync_block_len() }, n, ecc, delta, f.params.c)?);
            let trace = run_broadcast(net, f, limit).map_err(incompatible)?;
            Ok((trace, family_seed))
        }
        SimRequest::Wakeup { wake } => {
            let f = sync.ok_or_else(|| CliError::Incompatible("wake-up needs a universal synchronizer".into()))?;
            let limit = max_steps.unwrap_or(10 * time_bound(BoundMode::Wakeup, n, ecc, delta, f.params.c)?);
            let trace = run_wakeup(net, f, wake, limit).map_err(incompatible)?;
            Ok((trace, family_seed))
        }
        SimRequest::Baseline { k_doubling, c, seed } => {
            let limit = match max_steps {
                Some(m) => m,
                None => {
                    let fams = baseline_families(n, delta, *k_doubling, *c, *seed)?;
                    10 * 2 * ecc as u64 * baseline_cycle_len(&fams)
                }
            };
            let trace = run_baseline_selective(net, *k_doubling, *c, *seed, limit).map_err(incompatible)?;
            Ok((trace, *seed))
        }
    }
}

fn incompatible(e: radiosync::Error) -> CliError {
    match e {
        radiosync::Error::Domain(msg) => CliError::Incompatible(msg),
        radiosync::Error::Unreachable(v) => CliError::Incompatible(format!("node {} is unreachable", v + 1)),
        other => CliError::Lib(other),
    }
}
