//! Broadcast over block synchronizers, wake-up over universal synchronizers,
//! and a repeated selective-family broadcast used outside the block regime.

use std::collections::BTreeMap;

use crate::error::{domain, Error, Result};
use crate::model::{mu_b, Schedules};
use crate::oracle::{exhaustive_selective_feasible, generate_verified_selective, Mode};
use crate::radionet::{deliver, RadioNetwork};
use crate::selective::SelectiveFamily;
use crate::synchronizer::{FamilyKind, SynchronizerFamily};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimMode {
    Broadcast,
    Wakeup,
    Baseline,
}

impl SimMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            SimMode::Broadcast => "broadcast",
            SimMode::Wakeup => "wakeup",
            SimMode::Baseline => "baseline",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepRecord {
    pub step: u64,
    pub transmitters: Vec<usize>,
    /// Receiver to sender, for every successful reception.
    pub receptions: BTreeMap<usize, usize>,
    /// Nodes whose first reception happened at this step; they are active from `step + 1`.
    pub newly_active: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationTrace {
    pub mode: SimMode,
    /// First simulated step.
    pub start: u64,
    pub steps: Vec<StepRecord>,
    pub activation: Vec<Option<u64>>,
    /// Step by which every node is active.
    pub completion: Option<u64>,
}

impl SimulationTrace {
    pub fn is_complete(&self) -> bool {
        self.completion.is_some()
    }

    /// Steps from the first simulated step to completion.
    pub fn duration(&self) -> Option<u64> {
        self.completion.map(|c| c - self.start)
    }
}

/// Spontaneous wake-up times chosen by the adversary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WakeSchedule {
    spontaneous: Vec<Option<u64>>,
}

impl WakeSchedule {
    pub fn new(spontaneous: Vec<Option<u64>>) -> Result<Self> {
        if spontaneous.iter().all(Option::is_none) {
            return domain("a wake schedule needs at least one spontaneous node");
        }
        Ok(Self { spontaneous })
    }

    pub fn spontaneous(&self) -> &[Option<u64>] {
        &self.spontaneous
    }

    pub fn earliest(&self) -> u64 {
        self.spontaneous.iter().flatten().copied().min().unwrap()
    }

    /// Every spontaneous time moved `t` steps later.
    pub fn shifted(&self, t: u64) -> Self {
        Self { spontaneous: self.spontaneous.iter().map(|s| s.map(|x| x + t)).collect() }
    }
}

/// Shared step loop. `transmits(v, activation, step)` decides whether an
/// active node sends at `step`.
fn simulate(
    net: &RadioNetwork,
    mode: SimMode,
    start: u64,
    mut activation: Vec<Option<u64>>,
    max_steps: u64,
    transmits: impl Fn(usize, u64, u64) -> bool,
) -> Result<SimulationTrace> {
    let n = net.n();
    let mut received = vec![false; n];
    let mut steps = Vec::new();
    let mut completion = None;
    let mut t = start;
    loop {
        if activation.iter().all(|a| a.is_some_and(|a| a <= t)) {
            completion = Some(t);
            break;
        }
        if t - start >= max_steps {
            break;
        }
        let transmitters: Vec<usize> =
            (0..n).filter(|&v| activation[v].is_some_and(|a| a <= t && transmits(v, a, t))).collect();
        let outcome = deliver(net, &transmitters)?;
        let mut newly_active = Vec::new();
        for &u in outcome.receptions.keys() {
            if !received[u] {
                received[u] = true;
                if activation[u].is_none_or(|a| a > t + 1) {
                    activation[u] = Some(t + 1);
                    newly_active.push(u);
                }
            }
        }
        steps.push(StepRecord { step: t, transmitters: outcome.transmitters, receptions: outcome.receptions, newly_active });
        t += 1;
    }
    Ok(SimulationTrace { mode, start, steps, activation, completion })
}

/// Broadcast with a block synchronizer: a node activated at step `i`
/// transmits at `mu(i) + j` iff `S^v_j = 1`, for `j < D * BB`.
pub fn run_broadcast(net: &RadioNetwork, family: &SynchronizerFamily, max_steps: u64) -> Result<SimulationTrace> {
    let Some(source) = net.source() else {
        return domain("broadcast needs a source");
    };
    if family.kind != FamilyKind::Block {
        return domain("broadcast needs a composed block synchronizer");
    }
    if family.n() != net.n() {
        return domain(format!("family has n={}, network has n={}", family.n(), net.n()));
    }
    let (ecc, delta) = (net.ecc().unwrap_or(0), net.max_indegree());
    if family.params.ecc < ecc || family.params.delta < delta {
        return domain(format!(
            "family built for D={}, delta={} but network has D={ecc}, delta={delta}",
            family.params.ecc, family.params.delta
        ));
    }
    let big_block = family.sync_block_len();
    let len = family.len();
    let mut activation = vec![None; net.n()];
    activation[source] = Some(0);
    simulate(net, SimMode::Broadcast, 0, activation, max_steps, |v, a, t| {
        let begin = mu_b(a, big_block).expect("block length is positive");
        t >= begin && t - begin < len && family.bit(v, t - begin)
    })
}

/// Wake-up with a universal synchronizer: a node active from step `i`
/// transmits at `i + j` iff `S^v_j = 1`, for `j < g(n)`.
pub fn run_wakeup(
    net: &RadioNetwork,
    family: &SynchronizerFamily,
    wake: &WakeSchedule,
    max_steps: u64,
) -> Result<SimulationTrace> {
    if family.kind != FamilyKind::Urs {
        return domain("wake-up needs a universal synchronizer");
    }
    if family.n() != net.n() || wake.spontaneous().len() != net.n() {
        return domain("family, network and wake schedule must agree on n");
    }
    let roots: Vec<usize> = (0..net.n()).filter(|&v| wake.spontaneous()[v].is_some()).collect();
    let (dist, _) = net.bfs(&roots);
    if let Some(v) = dist.iter().position(Option::is_none) {
        return Err(Error::Unreachable(v));
    }
    let len = family.len();
    simulate(net, SimMode::Wakeup, wake.earliest(), wake.spontaneous().to_vec(), max_steps, |v, a, t| {
        t - a < len && family.bit(v, t - a)
    })
}

/// Verified selective families applied back to back: thresholds `2^i` for
/// `i = 1..=ceil(log2 delta)` capped at `n` when `k_doubling`, else just `delta`.
pub fn baseline_families(n: usize, delta: usize, k_doubling: bool, c: f64, seed: u64) -> Result<Vec<SelectiveFamily>> {
    let delta = delta.clamp(1, n);
    let ks: Vec<usize> = if k_doubling {
        let top = (delta as f64).log2().ceil().max(1.0) as u32;
        let mut ks: Vec<usize> = (1..=top).map(|i| (1usize << i).min(n)).collect();
        ks.dedup();
        ks
    } else {
        vec![delta]
    };
    ks.into_iter()
        .map(|k| {
            let mode = if exhaustive_selective_feasible(n, k) {
                Mode::Exhaustive
            } else {
                Mode::Sampled { trials: 10_000, seed }
            };
            generate_verified_selective(n, k, c, mode, 100, seed).map(|g| g.family)
        })
        .collect()
}

/// Broadcast by cycling through [`baseline_families`]. A node transmits in
/// an application only if it was active when that application began.
pub fn run_baseline_selective(
    net: &RadioNetwork,
    k_doubling: bool,
    c: f64,
    seed: u64,
    max_steps: u64,
) -> Result<SimulationTrace> {
    let Some(source) = net.source() else {
        return domain("broadcast needs a source");
    };
    let families = baseline_families(net.n(), net.max_indegree(), k_doubling, c, seed)?;
    let lens: Vec<u64> = families.iter().map(|f| f.len() as u64).collect();
    let cycle: u64 = lens.iter().sum();
    let mut activation = vec![None; net.n()];
    activation[source] = Some(0);
    simulate(net, SimMode::Baseline, 0, activation, max_steps, |v, a, t| {
        let round_start = t - t % cycle;
        let mut offset = t % cycle;
        let mut app_start = round_start;
        for (f, &len) in families.iter().zip(&lens) {
            if offset < len {
                return a <= app_start && f.bit(v, offset);
            }
            offset -= len;
            app_start += len;
        }
        unreachable!("offset lies inside the cycle")
    })
}

/// One full cycle of the baseline families, in steps.
pub fn baseline_cycle_len(families: &[SelectiveFamily]) -> u64 {
    families.iter().map(|f| f.len() as u64).sum()
}

/// In-degree bound to build a block synchronizer with. Inside the regime
/// `n < D * delta` this is `delta`; otherwise `floor(n/D) + 1` when that is
/// still at most `n`. `None` means the baseline must be used.
pub fn block_regime_delta(n: usize, ecc: usize, delta: usize) -> Option<usize> {
    if ecc == 0 || delta == 0 || ecc > n {
        return None;
    }
    if n < ecc * delta {
        return Some(delta);
    }
    let raised = n / ecc + 1;
    (raised <= n && n < ecc * raised).then_some(raised)
}
