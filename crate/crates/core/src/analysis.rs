//! Layer decomposition along a shortest path, leading-layer accounting and
//! running-time bounds.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{domain, Error, Result};
use crate::model::{ceil_count, slog};
use crate::protocols::SimulationTrace;
use crate::radionet::RadioNetwork;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerDecomposition {
    pub target: usize,
    /// Shortest path from the source to the target.
    pub path: Vec<usize>,
    /// Layer index to sorted members. Layer `path.len()` holds only the target.
    pub layers: BTreeMap<usize, Vec<usize>>,
    /// Nodes that are in-neighbors of no path node.
    pub discarded: Vec<usize>,
}

impl LayerDecomposition {
    /// Layer of each node, `None` for discarded nodes.
    pub fn layer_of(&self, n: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; n];
        for (&l, members) in &self.layers {
            for &v in members {
                out[v] = Some(l);
            }
        }
        out
    }
}

/// Layer `l <= d` holds the nodes whose furthest out-neighbor on the path
/// is `P_l`; layer `d + 1` is the target alone.
pub fn decompose_layers(net: &RadioNetwork, target: usize) -> Result<LayerDecomposition> {
    let Some(source) = net.source() else {
        return domain("layer decomposition needs a source");
    };
    if target >= net.n() {
        return Err(Error::UnknownNode(target));
    }
    let (dist, parent) = net.bfs(&[source]);
    if dist[target].is_none() {
        return Err(Error::Unreachable(target));
    }
    let mut path = vec![target];
    while let Some(p) = parent[*path.last().unwrap()] {
        path.push(p);
    }
    path.reverse();
    let d = path.len() - 1;

    let mut furthest: Vec<Option<usize>> = vec![None; net.n()];
    for (i, &p) in path.iter().enumerate() {
        for &u in net.in_neighbors(p) {
            furthest[u] = Some(furthest[u].map_or(i, |f| f.max(i)));
        }
    }
    let mut layers: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut discarded = Vec::new();
    for v in 0..net.n() {
        if v == target {
            layers.entry(d + 1).or_default().push(v);
        } else if let Some(l) = furthest[v] {
            layers.entry(l).or_default().push(v);
        } else {
            discarded.push(v);
        }
    }
    Ok(LayerDecomposition { target, path, layers, discarded })
}

/// Steps each layer spends as the leading layer (highest index holding an
/// active node), over the steps before the target becomes active.
pub fn leading_layer_durations(trace: &SimulationTrace, decomposition: &LayerDecomposition) -> BTreeMap<usize, u64> {
    let n = trace.activation.len();
    let layer_of = decomposition.layer_of(n);
    let end = trace.activation[decomposition.target].unwrap_or(trace.start + trace.steps.len() as u64);
    let mut durations = BTreeMap::new();
    for t in trace.start..end {
        let leading = (0..n)
            .filter(|&v| trace.activation[v].is_some_and(|a| a <= t))
            .filter_map(|v| layer_of[v])
            .max();
        if let Some(l) = leading {
            *durations.entry(l).or_insert(0) += 1;
        }
    }
    durations
}

/// Per-layer leading bound `BB * ceil((q + r) / r)` for a layer of `q` nodes.
pub fn layer_bound(q: usize, big_block: u64, r: usize) -> u64 {
    big_block * ((q + r) as u64).div_ceil(r as u64)
}

/// CSV with columns `layer,size,duration,bound`.
pub fn durations_csv(
    decomposition: &LayerDecomposition,
    durations: &BTreeMap<usize, u64>,
    big_block: u64,
    r: usize,
) -> String {
    let mut out = String::from("layer,size,duration,bound\n");
    for (&l, members) in &decomposition.layers {
        let q = members.len();
        let _ = writeln!(out, "{l},{q},{},{}", durations.get(&l).copied().unwrap_or(0), layer_bound(q, big_block, r));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundMode {
    /// Broadcast with composite block length `big_block`.
    Broadcast { big_block: u64 },
    Wakeup,
}

/// Closed-form completion bounds: `3 * BB * D` for broadcast and
/// `ceil(c * min(n, D*delta) * log n * log delta / log log delta)` for wake-up.
pub fn time_bound(mode: BoundMode, n: usize, ecc: usize, delta: usize, c: f64) -> Result<u64> {
    if n == 0 {
        return domain("n must be at least 1");
    }
    match mode {
        BoundMode::Broadcast { big_block } => Ok(3 * big_block * ecc as u64),
        BoundMode::Wakeup => {
            if !(c > 0.0) {
                return domain("generator constant must be positive");
            }
            let m = n.min(ecc * delta) as f64;
            let ld = slog(delta as f64);
            Ok(ceil_count(c * m * slog(n as f64) * ld / slog(ld)))
        }
    }
}

/// Exact maximum of `sum h(q_i)` over `parts` sizes `0 <= q_i <= cap` with
/// `sum q_i <= n`, for cross-checking the closed forms. `h(0)` counts as 0.
pub fn max_packing(n: usize, parts: usize, cap: usize, h: impl Fn(usize) -> u64) -> u64 {
    let values: Vec<u64> = (0..=cap.min(n)).map(|q| if q == 0 { 0 } else { h(q) }).collect();
    // best[s]: maximum over the parts seen so far using total size at most s.
    let mut best = vec![0u64; n + 1];
    for _ in 0..parts {
        let mut next = best.clone();
        for s in 0..=n {
            for (q, &v) in values.iter().enumerate().take(s + 1) {
                next[s] = next[s].max(best[s - q] + v);
            }
        }
        best = next;
    }
    best[n]
}
