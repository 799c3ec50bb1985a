//! Directed radio networks and one-step delivery without collision detection.

use std::collections::{BTreeMap, VecDeque};

use crate::draw;
use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RadioNetwork {
    n: usize,
    out_adj: Vec<Vec<usize>>,
    in_adj: Vec<Vec<usize>>,
    source: Option<usize>,
    ecc: Option<usize>,
    delta: usize,
}

impl RadioNetwork {
    /// Builds and validates a network. Metadata is always recomputed.
    pub fn new(n: usize, edges: &[(usize, usize)], source: Option<usize>) -> Result<Self> {
        if n == 0 {
            return domain("a network has at least one node");
        }
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n {
                return Err(Error::UnknownNode(u));
            }
            if v >= n {
                return Err(Error::UnknownNode(v));
            }
            if u == v {
                return domain(format!("self-loop at node {u}"));
            }
            out_adj[u].push(v);
            in_adj[v].push(u);
        }
        for (u, list) in out_adj.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return domain(format!("duplicate edge {u} -> {}", w[0]));
            }
        }
        for list in &mut in_adj {
            list.sort_unstable();
        }
        if let Some(s) = source {
            if s >= n {
                return Err(Error::UnknownNode(s));
            }
        }
        let delta = in_adj.iter().map(Vec::len).max().unwrap_or(0);
        let mut net = Self { n, out_adj, in_adj, source, ecc: None, delta };
        if source.is_some() {
            let (ecc, _) = compute_metadata(&net)?;
            net.ecc = Some(ecc);
        }
        Ok(net)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn source(&self) -> Option<usize> {
        self.source
    }

    /// Source eccentricity, when a source is set.
    pub fn ecc(&self) -> Option<usize> {
        self.ecc
    }

    pub fn max_indegree(&self) -> usize {
        self.delta
    }

    pub fn out_neighbors(&self, v: usize) -> &[usize] {
        &self.out_adj[v]
    }

    pub fn in_neighbors(&self, v: usize) -> &[usize] {
        &self.in_adj[v]
    }

    pub fn edge_count(&self) -> usize {
        self.out_adj.iter().map(Vec::len).sum()
    }

    /// Edges in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.out_adj.iter().enumerate().flat_map(|(u, vs)| vs.iter().map(move |&v| (u, v))).collect()
    }

    /// BFS distances and lowest-id BFS parents from a set of roots.
    pub fn bfs(&self, roots: &[usize]) -> (Vec<Option<usize>>, Vec<Option<usize>>) {
        let mut dist = vec![None; self.n];
        let mut parent = vec![None; self.n];
        let mut queue = VecDeque::new();
        for &r in roots {
            if dist[r].is_none() {
                dist[r] = Some(0);
                queue.push_back(r);
            }
        }
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap();
            for &v in &self.out_adj[u] {
                if dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        // Parent: lowest-id in-neighbor one level closer.
        for v in 0..self.n {
            if let Some(d) = dist[v] {
                if d > 0 {
                    parent[v] = self.in_adj[v].iter().copied().find(|&w| dist[w] == Some(d - 1));
                }
            }
        }
        (dist, parent)
    }
}

/// Eccentricity of the source and maximum in-degree.
pub fn compute_metadata(net: &RadioNetwork) -> Result<(usize, usize)> {
    let Some(s) = net.source else {
        return domain("metadata needs a source");
    };
    let (dist, _) = net.bfs(&[s]);
    let mut ecc = 0;
    for (v, d) in dist.iter().enumerate() {
        match d {
            Some(d) => ecc = ecc.max(*d),
            None => return Err(Error::Unreachable(v)),
        }
    }
    Ok((ecc, net.delta))
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StepOutcome {
    /// Sorted transmitter ids.
    pub transmitters: Vec<usize>,
    /// Receiver to its unique transmitting in-neighbor.
    pub receptions: BTreeMap<usize, usize>,
}

/// One synchronous step: a listening node receives iff exactly one of its
/// in-neighbors transmits. Transmitters hear nothing.
pub fn deliver(net: &RadioNetwork, transmitters: &[usize]) -> Result<StepOutcome> {
    let mut sending = vec![false; net.n];
    for &t in transmitters {
        if t >= net.n {
            return Err(Error::UnknownNode(t));
        }
        sending[t] = true;
    }
    let mut heard: Vec<(u32, usize)> = vec![(0, 0); net.n];
    for (t, _) in sending.iter().enumerate().filter(|(_, &s)| s) {
        for &u in &net.out_adj[t] {
            heard[u].0 += 1;
            heard[u].1 = t;
        }
    }
    let receptions = heard
        .iter()
        .enumerate()
        .filter(|&(u, &(count, _))| count == 1 && !sending[u])
        .map(|(u, &(_, w))| (u, w))
        .collect();
    let transmitters = (0..net.n).filter(|&v| sending[v]).collect();
    Ok(StepOutcome { transmitters, receptions })
}

/// Test-instance generators. Node 0 is the source in every model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NetworkModel {
    /// `0 -> 1 -> ... -> n-1`.
    Path { n: usize },
    /// Source hub with an edge to each leaf.
    Star { leaves: usize },
    /// Source feeds `leaves` nodes which all point into one hub.
    StarIn { leaves: usize },
    /// Source plus `layers` layers of `width` nodes; every node has a
    /// parent in the previous layer and extra in-edges only from layers at
    /// depth at least its own minus one, so depth equals layer index.
    LayeredRandom { layers: usize, width: usize, seed: u64 },
    /// Forward edges `i -> j` (`i < j`) with probability `p`, plus a
    /// backbone edge for every node left without a forward in-edge.
    RandomDag { n: usize, p: f64, seed: u64 },
    /// Every node but the source gets a random earlier parent, then random
    /// extra in-neighbors up to an in-degree drawn from `1..=cap`.
    BoundedIndeg { n: usize, cap: usize, seed: u64 },
}

pub fn gen_network(model: NetworkModel) -> Result<RadioNetwork> {
    let (n, edges) = match model {
        NetworkModel::Path { n } => (n, (1..n).map(|v| (v - 1, v)).collect::<Vec<_>>()),
        NetworkModel::Star { leaves } => (leaves + 1, (1..=leaves).map(|v| (0, v)).collect()),
        NetworkModel::StarIn { leaves } => {
            if leaves == 0 {
                return domain("star-in needs at least one leaf");
            }
            let hub = leaves + 1;
            let edges = (1..=leaves).flat_map(|v| [(0, v), (v, hub)]).collect();
            (leaves + 2, edges)
        }
        NetworkModel::LayeredRandom { layers, width, seed } => layered(layers, width, seed)?,
        NetworkModel::RandomDag { n, p, seed } => {
            if n == 0 || !(0.0..=1.0).contains(&p) {
                return domain("random-dag needs n >= 1 and p in [0, 1]");
            }
            let mut rng = draw::rng(seed);
            let mut edges = Vec::new();
            for j in 1..n {
                let before = edges.len();
                for i in 0..j {
                    if draw::bernoulli(&mut rng, p) {
                        edges.push((i, j));
                    }
                }
                if edges.len() == before {
                    edges.push((draw::below(&mut rng, j as u64) as usize, j));
                }
            }
            (n, edges)
        }
        NetworkModel::BoundedIndeg { n, cap, seed } => {
            if n == 0 || (cap == 0 && n > 1) {
                return domain("bounded-indeg needs n >= 1 and cap >= 1 when n > 1");
            }
            let mut rng = draw::rng(seed);
            let mut edges = Vec::new();
            for v in 1..n {
                let target = (1 + draw::below(&mut rng, cap as u64) as usize).min(n - 1);
                let mut ins = vec![draw::below(&mut rng, v as u64) as usize];
                while ins.len() < target {
                    let w = draw::below(&mut rng, n as u64) as usize;
                    if w != v && !ins.contains(&w) {
                        ins.push(w);
                    }
                }
                edges.extend(ins.into_iter().map(|w| (w, v)));
            }
            (n, edges)
        }
    };
    RadioNetwork::new(n, &edges, Some(0))
}

fn layered(layers: usize, width: usize, seed: u64) -> Result<(usize, Vec<(usize, usize)>)> {
    if layers == 0 || width == 0 {
        return domain("layered-random needs at least one layer of width at least one");
    }
    let n = layers * width + 1;
    let layer_nodes = |l: usize| -> std::ops::Range<usize> {
        if l == 0 {
            0..1
        } else {
            1 + (l - 1) * width..1 + l * width
        }
    };
    let mut rng = draw::rng(seed);
    let mut edges = Vec::new();
    for l in 1..=layers {
        for v in layer_nodes(l) {
            let prev = layer_nodes(l - 1);
            let parent = prev.start + draw::below(&mut rng, prev.len() as u64) as usize;
            edges.push((parent, v));
            for (ll, p) in [(l - 1, 0.5), (l, 0.25), (l + 1, 0.25)] {
                if ll > layers {
                    continue;
                }
                for w in layer_nodes(ll) {
                    if w != v && w != parent && draw::bernoulli(&mut rng, p) {
                        edges.push((w, v));
                    }
                }
            }
        }
    }
    Ok((n, edges))
}
