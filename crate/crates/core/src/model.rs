//! Shared arithmetic conventions, the basic schedule types, the column-hit
//! predicate and core extraction.
//!
//! Node ids are 0-based throughout the library; file formats shift them to
//! 1-based at the boundary.

use crate::error::{domain, Error, Result};

/// Logarithm base 2, clamped from below at 1.
///
/// Every size and delay formula in the crate goes through this so that
/// `log(1)`, `log(log 2)` and friends stay well defined and positive.
pub fn safe_log(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("safe_log of non-positive or non-finite value {x}"));
    }
    Ok(x.log2().max(1.0))
}

/// `safe_log` for callers that have already validated positivity.
pub(crate) fn slog(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    x.log2().max(1.0)
}

/// Ceiling used for every real-valued column count.
///
/// A relative slack of 1e-9 keeps mathematically integral products (which
/// can come out of `f64` a hair above the integer) from rounding up.
pub(crate) fn ceil_count(x: f64) -> u64 {
    let slack = 1e-9 * x.abs().max(1.0);
    (x - slack).ceil().max(0.0) as u64
}

/// Rounds `x` up to the next multiple of `b`.
pub fn mu_b(x: u64, b: u64) -> Result<u64> {
    if b == 0 {
        return domain("mu_B with block length 0");
    }
    Ok(x.div_ceil(b) * b)
}

/// Delay function of a universal radio synchronizer:
/// `ceil(c * q * log q * log n / log log q)` with clamped logarithms.
pub fn g_urs(q: usize, n: usize, c: f64) -> Result<u64> {
    if q == 0 {
        return domain("g(q) is undefined for q = 0");
    }
    if n == 0 {
        return domain("g(q) needs n >= 1");
    }
    if !(c > 0.0) {
        return domain(format!("generator constant must be positive, got {c}"));
    }
    let q = q as f64;
    let lq = slog(q);
    Ok(ceil_count(c * q * lq * slog(n as f64) / slog(lq)))
}

/// Read access to a family of per-node transmission patterns.
///
/// Out-of-range columns read as silence.
pub trait Schedules {
    fn node_count(&self) -> usize;

    /// Common schedule length in columns.
    fn length(&self) -> u64;

    fn bit(&self, node: usize, column: u64) -> bool;

    /// Bit at a possibly negative column `column - offset`.
    fn bit_shifted(&self, node: usize, column: u64, offset: u64) -> bool {
        column >= offset && self.bit(node, column - offset)
    }
}

/// One node's binary transmission pattern, indexed from column 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Schedule {
    bits: Vec<bool>,
}

impl Schedule {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn zeros(len: usize) -> Self {
        Self { bits: vec![false; len] }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Bit at column `j`; anything outside `[0, len)` is 0.
    pub fn get(&self, j: i64) -> bool {
        j >= 0 && self.bits.get(j as usize).copied().unwrap_or(false)
    }

    pub fn at(&self, j: u64) -> bool {
        usize::try_from(j).ok().and_then(|j| self.bits.get(j)).copied().unwrap_or(false)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn first_one(&self) -> Option<u64> {
        self.bits.iter().position(|&b| b).map(|j| j as u64)
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// `0`/`1` string rendering.
    pub fn to_bitstring(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    pub fn from_bitstring(s: &str) -> Result<Self> {
        s.chars()
            .map(|ch| match ch {
                '0' => Ok(false),
                '1' => Ok(true),
                other => domain(format!("invalid schedule character {other:?}")),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }
}

impl Schedules for [Schedule] {
    fn node_count(&self) -> usize {
        self.len()
    }

    fn length(&self) -> u64 {
        self.iter().map(Schedule::len).max().unwrap_or(0) as u64
    }

    fn bit(&self, node: usize, column: u64) -> bool {
        self.get(node).is_some_and(|s| s.at(column))
    }
}

impl Schedules for Vec<Schedule> {
    fn node_count(&self) -> usize {
        self.as_slice().node_count()
    }

    fn length(&self) -> u64 {
        self.as_slice().length()
    }

    fn bit(&self, node: usize, column: u64) -> bool {
        self.as_slice().bit(node, column)
    }
}

/// Per-node activation times.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivationSchedule {
    times: Vec<u64>,
}

impl ActivationSchedule {
    pub fn new(times: Vec<u64>) -> Self {
        Self { times }
    }

    pub fn time(&self, v: usize) -> Result<u64> {
        self.times.get(v).copied().ok_or(Error::UnknownNode(v))
    }

    pub fn times(&self) -> &[u64] {
        &self.times
    }

    /// Earliest activation over `set`; undefined for an empty set.
    pub fn min_over(&self, set: &[usize]) -> Result<u64> {
        let mut best: Option<u64> = None;
        for &v in set {
            let t = self.time(v)?;
            best = Some(best.map_or(t, |b| b.min(t)));
        }
        best.ok_or_else(|| Error::Domain("omega(X) of an empty set".into()))
    }

    /// Every time shifted by `t`.
    pub fn shifted(&self, t: u64) -> Self {
        Self::new(self.times.iter().map(|&x| x + t).collect())
    }
}

/// Verification state carried by a generated family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VerifyStatus {
    Unverified,
    Exhaustive,
    Sampled { trials: u64 },
}

impl VerifyStatus {
    pub fn is_verified(&self) -> bool {
        !matches!(self, VerifyStatus::Unverified)
    }
}

impl std::fmt::Display for VerifyStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VerifyStatus::Unverified => f.write_str("unverified"),
            VerifyStatus::Exhaustive => f.write_str("verified-exhaustive"),
            VerifyStatus::Sampled { trials } => write!(f, "verified-sampled({trials})"),
        }
    }
}

impl std::str::FromStr for VerifyStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unverified" => Ok(Self::Unverified),
            "verified-exhaustive" => Ok(Self::Exhaustive),
            _ => s
                .strip_prefix("verified-sampled(")
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|t| t.parse().ok())
                .map(|trials| Self::Sampled { trials })
                .ok_or_else(|| Error::Domain(format!("unknown verification status {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoreKind {
    /// Offsets are shifted activation times.
    Wakeup,
    /// Offsets are block counts.
    Block,
}

/// The members of a set that matter for its hitting window, with offsets
/// shifted so the earliest is 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Core {
    pub kind: CoreKind,
    /// `(node, offset)` sorted by node id.
    pub members: Vec<(usize, u64)>,
}

impl Core {
    pub fn new(kind: CoreKind, mut members: Vec<(usize, u64)>) -> Result<Self> {
        if members.is_empty() {
            return domain("a core has at least one member");
        }
        members.sort_unstable();
        if members.windows(2).any(|w| w[0].0 == w[1].0) {
            return domain("core members must be distinct nodes");
        }
        if members.iter().all(|&(_, o)| o != 0) {
            return domain("some core member must have offset 0");
        }
        Ok(Self { kind, members })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn nodes(&self) -> Vec<usize> {
        self.members.iter().map(|&(v, _)| v).collect()
    }

    /// Offsets in columns: identity for wake-up cores, `block_len * phi` for block cores.
    pub fn column_offsets(&self, block_len: u64) -> Vec<(usize, u64)> {
        match self.kind {
            CoreKind::Wakeup => self.members.clone(),
            CoreKind::Block => self.members.iter().map(|&(v, o)| (v, o * block_len)).collect(),
        }
    }
}

/// Parameters of a generated family. Fields that do not apply to a kind are
/// set to neutral values (see the constructors).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyncParams {
    pub n: usize,
    /// Selectivity threshold.
    pub k: usize,
    /// Maximum in-degree.
    pub delta: usize,
    /// Source eccentricity.
    pub ecc: usize,
    /// Set-size increment per block.
    pub r: usize,
    /// Block length in columns.
    pub block_len: u64,
    pub c: f64,
    pub seed: u64,
}

impl SyncParams {
    pub fn selective(n: usize, k: usize, c: f64, seed: u64) -> Result<Self> {
        let p = Self { n, k, delta: n, ecc: n, r: 1, block_len: 1, c, seed };
        p.validate()?;
        Ok(p)
    }

    pub fn urs(n: usize, c: f64, seed: u64) -> Result<Self> {
        let p = Self { n, k: n, delta: n, ecc: n, r: 1, block_len: 1, c, seed };
        p.validate()?;
        Ok(p)
    }

    /// Upper-block parameters: `r = max(1, floor(n/D))` and
    /// `B = ceil(c * (n/D) * log D * log log (D*delta/n))`.
    ///
    /// Requires `D, delta <= n < D * delta`.
    pub fn block(n: usize, ecc: usize, delta: usize, c: f64, seed: u64) -> Result<Self> {
        if n == 0 || ecc == 0 || delta == 0 {
            return domain("block synchronizers need n, D, delta >= 1");
        }
        if ecc > n || delta > n {
            return domain(format!("need D, delta <= n (n={n}, D={ecc}, delta={delta})"));
        }
        if n >= ecc * delta {
            return domain(format!(
                "n={n} >= D*delta={}: outside the block-synchronizer regime",
                ecc * delta
            ));
        }
        if !(c > 0.0) {
            return domain(format!("generator constant must be positive, got {c}"));
        }
        let r = (n / ecc).max(1);
        let block_len = ceil_count(c * (n as f64 / ecc as f64) * slog(ecc as f64) * loglog_ratio(n, ecc, delta)).max(1);
        let p = Self { n, k: r, delta, ecc, r, block_len, c, seed };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return domain("n must be at least 1");
        }
        if self.k == 0 || self.k > self.n {
            return domain(format!("need 1 <= k <= n (k={}, n={})", self.k, self.n));
        }
        if self.delta > self.n || self.ecc > self.n {
            return domain("delta and D must not exceed n");
        }
        if self.r == 0 || self.block_len == 0 {
            return domain("r and B must be at least 1");
        }
        if !(self.c > 0.0) || !self.c.is_finite() {
            return domain(format!("generator constant must be positive, got {}", self.c));
        }
        Ok(())
    }

    /// Phase length `ceil(2 log log (D*delta/n))` of the upper-block generator.
    pub fn phase_len(&self) -> u64 {
        ceil_count(2.0 * loglog_ratio(self.n, self.ecc, self.delta)).max(1)
    }

    /// Numerator `c * log D * log log (D*delta/n)` of the upper-block probabilities.
    pub fn block_weight(&self) -> f64 {
        self.c * slog(self.ecc as f64) * loglog_ratio(self.n, self.ecc, self.delta)
    }
}

/// `log log (D*delta/n)` with clamped logarithms.
pub(crate) fn loglog_ratio(n: usize, ecc: usize, delta: usize) -> f64 {
    slog(slog((ecc as f64) * (delta as f64) / (n as f64)))
}

/// True iff exactly one member transmits in column `j`, where member `v`
/// reads its own schedule at `j - offset(v)` and out-of-range reads are 0.
pub fn column_hit<S: Schedules + ?Sized>(family: &S, members: &[(usize, u64)], j: u64) -> bool {
    let mut count = 0u32;
    for &(v, off) in members {
        if family.bit_shifted(v, j, off) {
            count += 1;
            if count > 1 {
                return false;
            }
        }
    }
    count == 1
}

/// Smallest column in `[from, to)` hit by `members`, if any.
pub fn first_hit<S: Schedules + ?Sized>(family: &S, members: &[(usize, u64)], from: u64, to: u64) -> Option<u64> {
    (from..to).find(|&j| column_hit(family, members, j))
}

fn check_set(set: &[usize]) -> Result<()> {
    if set.is_empty() {
        return domain("core of an empty set");
    }
    let mut sorted = set.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return domain("set contains duplicate nodes");
    }
    Ok(())
}

/// Wake-up core of `set` under `omega` for delay function `g`.
///
/// `j'` is the smallest column with `j' - omega(X) >= g(|X_j'|)`, where
/// `X_j` holds the members active by column `j`; the core keeps members
/// activated strictly before `j'`.
pub fn extract_wakeup_core<G>(set: &[usize], omega: &ActivationSchedule, g: G) -> Result<Core>
where
    G: Fn(usize) -> u64,
{
    check_set(set)?;
    let start = omega.min_over(set)?;
    let mut times = set.iter().map(|&v| omega.time(v)).collect::<Result<Vec<_>>>()?;
    times.sort_unstable();
    let limit = start + g(set.len());

    let mut active = 0usize;
    let mut j = start;
    let cut = loop {
        while active < times.len() && times[active] <= j {
            active += 1;
        }
        if j - start >= g(active) {
            break j;
        }
        if j >= limit {
            // Unreachable for a nondecreasing g.
            break j;
        }
        j += 1;
    };

    let members = set
        .iter()
        .map(|&v| (v, omega.time(v).unwrap()))
        .filter(|&(_, t)| t < cut)
        .map(|(v, t)| (v, t - start))
        .collect();
    Core::new(CoreKind::Wakeup, members)
}

/// Block core of `set` under `omega` with block length `block_len` and increment `r`.
///
/// Start columns are `s(v) = mu_B(omega(v))`; `j'` is the smallest column
/// with `j' - s(X) >= B * |X_j'| / r`; offsets are block counts.
pub fn extract_block_core(set: &[usize], omega: &ActivationSchedule, block_len: u64, r: usize) -> Result<Core> {
    check_set(set)?;
    if block_len == 0 || r == 0 {
        return domain("block core needs B, r >= 1");
    }
    let starts = set
        .iter()
        .map(|&v| mu_b(omega.time(v)?, block_len).map(|s| (v, s)))
        .collect::<Result<Vec<_>>>()?;
    let s_x = starts.iter().map(|&(_, s)| s).min().unwrap();
    let mut sorted: Vec<u64> = starts.iter().map(|&(_, s)| s).collect();
    sorted.sort_unstable();
    let r = r as u64;
    let limit = s_x + block_len * (set.len() as u64).div_ceil(r);

    let mut active = 0usize;
    let mut j = s_x;
    let cut = loop {
        while active < sorted.len() && sorted[active] <= j {
            active += 1;
        }
        if (j - s_x) * r >= block_len * active as u64 || j >= limit {
            break j;
        }
        j += 1;
    };

    let members = starts
        .into_iter()
        .filter(|&(_, s)| s < cut)
        .map(|(v, s)| (v, (s - s_x) / block_len))
        .collect();
    Core::new(CoreKind::Block, members)
}
