//! Text formats: graphs, families, wake schedules and trace CSV.
//!
//! Node ids are 1-based in every file and 0-based in memory.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use radiosync::model::{Schedule, SyncParams, VerifyStatus};
use radiosync::protocols::{SimulationTrace, WakeSchedule};
use radiosync::radionet::RadioNetwork;
use radiosync::selective::SelectiveFamily;
use radiosync::synchronizer::{FamilyKind, SynchronizerFamily};

use crate::CliError;

fn parse_err(line: usize, msg: impl Into<String>) -> CliError {
    CliError::Parse { line, msg: msg.into() }
}

fn parse_num<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T, CliError> {
    tok.parse().map_err(|_| parse_err(line, format!("bad {what} {tok:?}")))
}

/// Lines that carry content, with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty())
}

fn node_id(tok: &str, line: usize, n: usize) -> Result<usize, CliError> {
    let v: usize = parse_num(tok, line, "node id")?;
    if v == 0 || v > n {
        return Err(parse_err(line, format!("node id {v} outside 1..={n}")));
    }
    Ok(v - 1)
}

pub fn read_graph(text: &str) -> Result<RadioNetwork, CliError> {
    let mut lines = content_lines(text).filter(|(_, l)| !l.starts_with('#'));
    let (first, header) = lines.next().ok_or_else(|| parse_err(1, "empty graph file"))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    let [n, m] = toks[..] else {
        return Err(parse_err(first, "expected `n m`"));
    };
    let n: usize = parse_num(n, first, "node count")?;
    let m: usize = parse_num(m, first, "edge count")?;
    let mut edges = Vec::with_capacity(m);
    let mut source = None;
    let mut last = first;
    for (line, l) in lines {
        last = line;
        let toks: Vec<&str> = l.split_whitespace().collect();
        match toks[..] {
            ["source", s] if source.is_none() => source = Some(node_id(s, line, n)?),
            [u, v] if edges.len() < m => edges.push((node_id(u, line, n)?, node_id(v, line, n)?)),
            _ => return Err(parse_err(line, format!("unexpected line {l:?}"))),
        }
    }
    if edges.len() != m {
        return Err(parse_err(last, format!("expected {m} edges, found {}", edges.len())));
    }
    RadioNetwork::new(n, &edges, source).map_err(|e| parse_err(first, e.to_string()))
}

pub fn write_graph(net: &RadioNetwork) -> String {
    let mut out = format!("{} {}\n", net.n(), net.edge_count());
    for (u, v) in net.edges() {
        let _ = writeln!(out, "{} {}", u + 1, v + 1);
    }
    if let Some(s) = net.source() {
        let _ = writeln!(out, "source {}", s + 1);
    }
    out
}

/// Either family type a file can hold.
#[derive(Debug, Clone, PartialEq)]
pub enum FamilyFile {
    Selective { family: SelectiveFamily, attempts: u32 },
    Sync { family: SynchronizerFamily, attempts: u32 },
}

impl FamilyFile {
    pub fn kind_str(&self) -> &'static str {
        match self {
            FamilyFile::Selective { .. } => "selective",
            FamilyFile::Sync { family, .. } => family.kind.as_str(),
        }
    }

    pub fn n(&self) -> usize {
        match self {
            FamilyFile::Selective { family, .. } => family.n(),
            FamilyFile::Sync { family, .. } => family.n(),
        }
    }

    /// Seed the generation was started from.
    pub fn seed(&self) -> u64 {
        match self {
            FamilyFile::Selective { family, attempts } => requested_seed(family.params.seed, *attempts),
            FamilyFile::Sync { family, attempts } => requested_seed(family.params.seed, *attempts),
        }
    }
}

/// The header records the seed the caller asked for; the stored candidate
/// came from attempt `attempts`, which used `seed + attempts - 1`.
fn requested_seed(candidate: u64, attempts: u32) -> u64 {
    candidate.wrapping_sub(u64::from(attempts.saturating_sub(1)))
}

pub fn write_family(file: &FamilyFile) -> String {
    let mut header: Vec<(&str, String)> = vec![("kind", file.kind_str().to_string())];
    let rows = match file {
        FamilyFile::Selective { family, attempts } => {
            let p = &family.params;
            header.extend([
                ("n", p.n.to_string()),
                ("k", p.k.to_string()),
                ("c", p.c.to_string()),
                ("seed", requested_seed(p.seed, *attempts).to_string()),
                ("attempts", attempts.to_string()),
                ("status", family.verified.to_string()),
            ]);
            family.schedules()
        }
        FamilyFile::Sync { family, attempts } => {
            let p = &family.params;
            header.push(("n", p.n.to_string()));
            if family.kind != FamilyKind::Urs {
                header.extend([
                    ("D", p.ecc.to_string()),
                    ("delta", p.delta.to_string()),
                    ("r", p.r.to_string()),
                    ("B", p.block_len.to_string()),
                ]);
            }
            if let Some(parts) = &family.block {
                let sel = &parts.selective;
                header.extend([
                    ("slot", parts.slot().to_string()),
                    ("BB", parts.big_block.to_string()),
                    ("c_sel", sel.params.c.to_string()),
                    ("seed_sel", sel.params.seed.to_string()),
                    ("status_sel", sel.verified.to_string()),
                ]);
            }
            header.extend([
                ("c", p.c.to_string()),
                ("seed", requested_seed(p.seed, *attempts).to_string()),
                ("attempts", attempts.to_string()),
                ("status", family.verified.to_string()),
            ]);
            family.schedules()
        }
    };
    let mut out = String::new();
    for (k, v) in header {
        let _ = writeln!(out, "# {k}={v}");
    }
    for row in rows {
        out.push_str(&row.to_bitstring());
        out.push('\n');
    }
    out
}

struct Header {
    values: BTreeMap<String, (usize, String)>,
    last_line: usize,
}

impl Header {
    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<T, CliError> {
        let (line, raw) = self.values.get(key).ok_or_else(|| parse_err(self.last_line, format!("missing header key {key}")))?;
        parse_num(raw, *line, key)
    }

    fn line(&self, key: &str) -> usize {
        self.values.get(key).map_or(self.last_line, |(l, _)| *l)
    }
}

pub fn read_family(text: &str) -> Result<FamilyFile, CliError> {
    let mut values = BTreeMap::new();
    let mut rows = Vec::new();
    let mut last_line = 1;
    for (line, l) in content_lines(text) {
        last_line = line;
        if let Some(rest) = l.strip_prefix('#') {
            if !rows.is_empty() {
                return Err(parse_err(line, "header line after schedules"));
            }
            let (k, v) = rest.trim().split_once('=').ok_or_else(|| parse_err(line, "expected `# key=value`"))?;
            values.insert(k.trim().to_string(), (line, v.trim().to_string()));
        } else {
            let row = Schedule::from_bitstring(l).map_err(|_| parse_err(line, "schedule rows hold only 0 and 1"))?;
            if let Some((_, first)) = rows.first() {
                if row.len() != Schedule::len(first) {
                    return Err(parse_err(line, format!("row length {} differs from {}", row.len(), first.len())));
                }
            }
            rows.push((line, row));
        }
    }
    let header = Header { values, last_line };
    let kind: String = header.get("kind")?;
    let n: usize = header.get("n")?;
    if rows.len() != n {
        return Err(parse_err(last_line, format!("expected {n} schedule rows, found {}", rows.len())));
    }
    let c: f64 = header.get("c")?;
    let attempts: u32 = header.get("attempts")?;
    if attempts == 0 {
        return Err(parse_err(header.line("attempts"), "attempts must be at least 1"));
    }
    let seed = header.get::<u64>("seed")?.wrapping_add(u64::from(attempts - 1));
    let status: VerifyStatus = header.get("status")?;
    let schedules: Vec<Schedule> = rows.into_iter().map(|(_, r)| r).collect();
    let lib_err = |key: &str, e: radiosync::Error| parse_err(header.line(key), e.to_string());

    if kind == "selective" {
        let k: usize = header.get("k")?;
        let params = SyncParams::selective(n, k, c, seed).map_err(|e| lib_err("k", e))?;
        let mut family = SelectiveFamily::from_schedules(params, schedules).map_err(|e| lib_err("n", e))?;
        family.verified = status;
        return Ok(FamilyFile::Selective { family, attempts });
    }
    let kind: FamilyKind = kind.parse().map_err(|e| lib_err("kind", e))?;
    let (params, selective) = match kind {
        FamilyKind::Urs => (SyncParams::urs(n, c, seed).map_err(|e| lib_err("n", e))?, None),
        FamilyKind::UpperBlock | FamilyKind::Block => {
            let ecc: usize = header.get("D")?;
            let delta: usize = header.get("delta")?;
            let params = SyncParams::block(n, ecc, delta, c, seed).map_err(|e| lib_err("D", e))?;
            for (key, stored, derived) in [("r", header.get::<u64>("r")?, params.r as u64), ("B", header.get("B")?, params.block_len)] {
                if stored != derived {
                    return Err(parse_err(header.line(key), format!("{key}={stored} but the parameters give {derived}")));
                }
            }
            let selective = if kind == FamilyKind::Block {
                let slot: usize = header.get("slot")?;
                let big_block: u64 = header.get("BB")?;
                if big_block != slot as u64 + params.block_len {
                    return Err(parse_err(header.line("BB"), "BB must equal slot + B"));
                }
                if slot == 0 || slot > schedules[0].len() {
                    return Err(parse_err(header.line("slot"), "slot outside the schedule length"));
                }
                let sel_params = SyncParams::selective(n, params.r, header.get("c_sel")?, header.get("seed_sel")?)
                    .map_err(|e| lib_err("c_sel", e))?;
                let rows = schedules.iter().map(|s| Schedule::new(s.bits()[..slot].to_vec())).collect();
                let mut sel = SelectiveFamily::from_schedules(sel_params, rows).map_err(|e| lib_err("slot", e))?;
                sel.verified = header.get("status_sel")?;
                Some(sel)
            } else {
                None
            };
            (params, selective)
        }
    };
    let family = SynchronizerFamily::from_parts(kind, params, schedules, selective, status)
        .map_err(|e| parse_err(last_line, e.to_string()))?;
    if let Some(parts) = &family.block {
        // Every block must open with the same selective slot.
        let slot = parts.slot();
        for (v, row) in family.schedules().iter().enumerate() {
            for b in 1..params.ecc as u64 {
                let start = (b * parts.big_block) as usize;
                if row.bits()[start..start + slot as usize] != row.bits()[..slot as usize] {
                    return Err(parse_err(header.line("slot"), format!("node {} block {b} does not repeat the selective slot", v + 1)));
                }
            }
        }
    }
    Ok(FamilyFile::Sync { family, attempts })
}

/// `node time` lines; nodes not listed never wake spontaneously.
pub fn read_wake(text: &str, n: usize) -> Result<WakeSchedule, CliError> {
    let mut times = vec![None; n];
    for (line, l) in content_lines(text).filter(|(_, l)| !l.starts_with('#')) {
        let toks: Vec<&str> = l.split_whitespace().collect();
        let [v, t] = toks[..] else {
            return Err(parse_err(line, "expected `node time`"));
        };
        let v = node_id(v, line, n)?;
        if times[v].is_some() {
            return Err(parse_err(line, format!("node {} listed twice", v + 1)));
        }
        times[v] = Some(parse_num(t, line, "time")?);
    }
    WakeSchedule::new(times).map_err(|_| CliError::Incompatible("wake file lists no node".into()))
}

pub fn write_wake(wake: &WakeSchedule) -> String {
    let mut out = String::new();
    for (v, t) in wake.spontaneous().iter().enumerate() {
        if let Some(t) = t {
            let _ = writeln!(out, "{} {t}", v + 1);
        }
    }
    out
}

fn id_list(ids: impl IntoIterator<Item = usize>) -> String {
    ids.into_iter().map(|v| (v + 1).to_string()).collect::<Vec<_>>().join(";")
}

pub fn write_trace(trace: &SimulationTrace, net: &RadioNetwork, seed: u64) -> String {
    let ecc = net.ecc().map_or("none".to_string(), |d| d.to_string());
    let mut out = format!("# seed={seed}\n# n={} D={ecc} delta={}\n", net.n(), net.max_indegree());
    out.push_str("step,transmitters,receptions,newly_active\n");
    for row in &trace.steps {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            row.step,
            id_list(row.transmitters.iter().copied()),
            id_list(row.receptions.keys().copied()),
            id_list(row.newly_active.iter().copied())
        );
    }
    let completion = trace.completion.map_or("none".to_string(), |c| c.to_string());
    let _ = writeln!(out, "# completion={completion}");
    out
}
