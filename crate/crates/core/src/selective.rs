//! `(n,k)`-selective families: every nonempty set of at most `k` nodes is
//! isolated by some column.

use crate::draw;
use crate::error::{domain, Result};
use crate::model::{ceil_count, slog, Schedule, Schedules, SyncParams, VerifyStatus};

#[derive(Debug, Clone, PartialEq)]
pub struct SelectiveFamily {
    pub params: SyncParams,
    schedules: Vec<Schedule>,
    pub verified: VerifyStatus,
}

/// Family length `ceil(c * k * log(n/k))`, at least 1.
pub fn selective_length(n: usize, k: usize, c: f64) -> Result<u64> {
    if k == 0 || k > n {
        return domain(format!("need 1 <= k <= n (k={k}, n={n})"));
    }
    if !(c > 0.0) {
        return domain(format!("generator constant must be positive, got {c}"));
    }
    Ok(ceil_count(c * k as f64 * slog(n as f64 / k as f64)).max(1))
}

/// Candidate `(n,k)`-selective family: each bit is 1 independently with
/// probability `1/k`. Deterministic in `(n, k, c, seed)`.
pub fn gen_selective_family(n: usize, k: usize, c: f64, seed: u64) -> Result<SelectiveFamily> {
    let params = SyncParams::selective(n, k, c, seed)?;
    let m = selective_length(n, k, c)? as usize;
    let p = 1.0 / k as f64;
    let mut rng = draw::rng(seed);
    let schedules = (0..n)
        .map(|_| Schedule::new((0..m).map(|_| draw::bernoulli(&mut rng, p)).collect()))
        .collect();
    Ok(SelectiveFamily { params, schedules, verified: VerifyStatus::Unverified })
}

impl SelectiveFamily {
    /// Wraps explicit schedules; all must share one nonzero length.
    pub fn from_schedules(params: SyncParams, schedules: Vec<Schedule>) -> Result<Self> {
        params.validate()?;
        if schedules.len() != params.n {
            return domain(format!("expected {} schedules, got {}", params.n, schedules.len()));
        }
        let m = schedules.first().map(Schedule::len).unwrap_or(0);
        if m == 0 || schedules.iter().any(|s| s.len() != m) {
            return domain("selective family schedules must share a nonzero length");
        }
        Ok(Self { params, schedules, verified: VerifyStatus::Unverified })
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn k(&self) -> usize {
        self.params.k
    }

    pub fn len(&self) -> usize {
        self.schedules[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn schedules(&self) -> &[Schedule] {
        &self.schedules
    }

    /// Same schedules, different selectivity claim.
    pub fn with_threshold(&self, k: usize) -> Result<Self> {
        let params = SyncParams { k, ..self.params };
        params.validate()?;
        Ok(Self { params, schedules: self.schedules.clone(), verified: VerifyStatus::Unverified })
    }

    /// First column where exactly one member of `set` transmits.
    pub fn hits_set(&self, set: &[usize]) -> Option<u64> {
        (0..self.len()).find(|&j| set.iter().filter(|&&v| self.schedules[v].bits()[j]).count() == 1).map(|j| j as u64)
    }

    /// Per-column transmitter bitmasks; only for `n <= 64`.
    pub(crate) fn column_masks(&self) -> Option<Vec<u64>> {
        if self.n() > 64 {
            return None;
        }
        Some(
            (0..self.len())
                .map(|j| {
                    self.schedules
                        .iter()
                        .enumerate()
                        .filter(|(_, s)| s.bits()[j])
                        .fold(0u64, |acc, (v, _)| acc | (1 << v))
                })
                .collect(),
        )
    }
}

impl Schedules for SelectiveFamily {
    fn node_count(&self) -> usize {
        self.n()
    }

    fn length(&self) -> u64 {
        self.len() as u64
    }

    fn bit(&self, node: usize, column: u64) -> bool {
        self.schedules.bit(node, column)
    }
}
