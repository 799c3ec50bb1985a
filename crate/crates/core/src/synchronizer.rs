//! Universal radio synchronizers, upper block synchronizers and composed
//! block synchronizers, plus the column-load diagnostics used to sanity
//! check the generation probabilities.

use std::fmt::Write as _;

use crate::draw;
use crate::error::{domain, Result};
use crate::model::{ceil_count, g_urs, loglog_ratio, slog, Core, CoreKind, Schedule, Schedules, SyncParams, VerifyStatus};
use crate::selective::SelectiveFamily;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyKind {
    Urs,
    UpperBlock,
    Block,
}

impl FamilyKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            FamilyKind::Urs => "urs",
            FamilyKind::UpperBlock => "upper-block",
            FamilyKind::Block => "block",
        }
    }
}

impl std::str::FromStr for FamilyKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "urs" => Ok(Self::Urs),
            "upper-block" => Ok(Self::UpperBlock),
            "block" => Ok(Self::Block),
            other => domain(format!("unknown family kind {other:?}")),
        }
    }
}

/// The pieces a block synchronizer is assembled from.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockParts {
    /// The selective family inserted at the start of every block, already
    /// padded with silent columns to its slot width.
    pub selective: SelectiveFamily,
    /// Composite block length: selective slot plus upper block length.
    pub big_block: u64,
}

impl BlockParts {
    pub fn slot(&self) -> u64 {
        self.selective.len() as u64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynchronizerFamily {
    pub kind: FamilyKind,
    pub params: SyncParams,
    schedules: Vec<Schedule>,
    pub block: Option<BlockParts>,
    pub verified: VerifyStatus,
}

/// Where a composite column reads from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnSource {
    Selective(u64),
    Upper(u64),
}

/// Composite column `j` maps to `R[j mod BB]` when that residue is inside
/// the selective slot, else to upper column `j - ceil(j / BB) * |R|`.
pub fn composite_source(j: u64, slot: u64, big_block: u64) -> ColumnSource {
    let within = j % big_block;
    if within < slot {
        ColumnSource::Selective(within)
    } else {
        ColumnSource::Upper(j - j.div_ceil(big_block) * slot)
    }
}

/// Inverse of [`composite_source`] for upper columns.
pub fn upper_to_composite(col: u64, slot: u64, upper_block: u64) -> u64 {
    col + (col / upper_block + 1) * slot
}

/// URS generation probability `c log n / (6 (j + c log n))`.
pub fn urs_probability(n: usize, c: f64, j: u64) -> f64 {
    let w = c * slog(n as f64);
    w / (6.0 * (j as f64 + w))
}

/// Upper-block generation probability
/// `min(1, c log D log log(D delta/n) / ((B + j) 2^(rho(j)+1)))`.
pub fn upper_block_probability(params: &SyncParams, j: u64) -> f64 {
    (upper_block_weight(params, j) / (params.block_len as f64 + j as f64)).min(1.0)
}

fn upper_block_weight(params: &SyncParams, j: u64) -> f64 {
    let rho = j % params.phase_len();
    params.block_weight() / 2f64.powi(rho as i32 + 1)
}

fn draw_family(n: usize, len: u64, seed: u64, prob: impl Fn(u64) -> f64) -> Vec<Schedule> {
    let probs: Vec<f64> = (0..len).map(prob).collect();
    let mut rng = draw::rng(seed);
    (0..n)
        .map(|_| Schedule::new(probs.iter().map(|&p| draw::bernoulli(&mut rng, p)).collect()))
        .collect()
}

/// Candidate `(n, g)` universal radio synchronizer of length `g(n)`.
pub fn gen_urs_candidate(n: usize, c: f64, seed: u64) -> Result<SynchronizerFamily> {
    let params = SyncParams::urs(n, c, seed)?;
    let len = g_urs(n, n, c)?;
    let schedules = draw_family(n, len, seed, |j| urs_probability(n, c, j));
    Ok(SynchronizerFamily { kind: FamilyKind::Urs, params, schedules, block: None, verified: VerifyStatus::Unverified })
}

/// Candidate upper block synchronizer of length `D * B`.
pub fn gen_upper_block_candidate(n: usize, ecc: usize, delta: usize, c: f64, seed: u64) -> Result<SynchronizerFamily> {
    let params = SyncParams::block(n, ecc, delta, c, seed)?;
    let len = ecc as u64 * params.block_len;
    let schedules = draw_family(n, len, seed, |j| upper_block_probability(&params, j));
    Ok(SynchronizerFamily {
        kind: FamilyKind::UpperBlock,
        params,
        schedules,
        block: None,
        verified: VerifyStatus::Unverified,
    })
}

/// Slot width reserved for the selective family inside each block:
/// `ceil(c_sel * (n/D) * log D * log log (D delta / n))`, never shorter than
/// the family itself.
pub fn selective_slot(params: &SyncParams, c_sel: f64, natural_len: u64) -> u64 {
    let target = ceil_count(
        c_sel * (params.n as f64 / params.ecc as f64) * slog(params.ecc as f64) * loglog_ratio(params.n, params.ecc, params.delta),
    );
    target.max(natural_len)
}

/// Extends every schedule with silent columns up to `len`.
pub fn pad_selective(family: &SelectiveFamily, len: u64) -> SelectiveFamily {
    if len as usize <= family.len() {
        return family.clone();
    }
    let schedules = family
        .schedules()
        .iter()
        .map(|s| {
            let mut bits = s.bits().to_vec();
            bits.resize(len as usize, false);
            Schedule::new(bits)
        })
        .collect();
    let mut padded = SelectiveFamily::from_schedules(family.params, schedules).expect("padding keeps shape");
    padded.verified = family.verified;
    padded
}

/// Inserts `selective` at the start of every block of `upper`.
pub fn compose_block_synchronizer(upper: &SynchronizerFamily, selective: &SelectiveFamily) -> Result<SynchronizerFamily> {
    if upper.kind != FamilyKind::UpperBlock {
        return domain("composition needs an upper block synchronizer");
    }
    if selective.n() != upper.n() {
        return domain(format!("selective family has n={}, upper has n={}", selective.n(), upper.n()));
    }
    let params = upper.params;
    let slot = selective.len() as u64;
    let big_block = slot + params.block_len;
    let total = params.ecc as u64 * big_block;
    let schedules = (0..upper.n())
        .map(|v| {
            Schedule::new(
                (0..total)
                    .map(|j| match composite_source(j, slot, big_block) {
                        ColumnSource::Selective(col) => selective.bit(v, col),
                        ColumnSource::Upper(col) => upper.bit(v, col),
                    })
                    .collect(),
            )
        })
        .collect();
    Ok(SynchronizerFamily {
        kind: FamilyKind::Block,
        params,
        schedules,
        block: Some(BlockParts { selective: selective.clone(), big_block }),
        verified: VerifyStatus::Unverified,
    })
}

impl SynchronizerFamily {
    /// Rebuilds a family from stored schedules. For block families the
    /// selective part is recovered from the first `slot` columns.
    pub fn from_parts(
        kind: FamilyKind,
        params: SyncParams,
        schedules: Vec<Schedule>,
        selective: Option<SelectiveFamily>,
        verified: VerifyStatus,
    ) -> Result<Self> {
        params.validate()?;
        if schedules.len() != params.n {
            return domain(format!("expected {} schedules, got {}", params.n, schedules.len()));
        }
        let expected = match kind {
            FamilyKind::Urs => g_urs(params.n, params.n, params.c)?,
            FamilyKind::UpperBlock => params.ecc as u64 * params.block_len,
            FamilyKind::Block => {
                let Some(sel) = &selective else {
                    return domain("block family needs its selective part");
                };
                params.ecc as u64 * (sel.len() as u64 + params.block_len)
            }
        };
        if schedules.iter().any(|s| s.len() as u64 != expected) {
            return domain(format!("{} schedules must have length {expected}", kind.as_str()));
        }
        let block = match (kind, selective) {
            (FamilyKind::Block, Some(sel)) => {
                let big_block = sel.len() as u64 + params.block_len;
                Some(BlockParts { selective: sel, big_block })
            }
            _ => None,
        };
        Ok(Self { kind, params, schedules, block, verified })
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn len(&self) -> u64 {
        self.schedules.first().map_or(0, |s| s.len() as u64)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn schedules(&self) -> &[Schedule] {
        &self.schedules
    }

    /// Block length seen by the block-synchronizer property: the composite
    /// block for `Block`, `B` for `UpperBlock`, 1 for `Urs`.
    pub fn sync_block_len(&self) -> u64 {
        match (&self.block, self.kind) {
            (Some(parts), _) => parts.big_block,
            (None, FamilyKind::UpperBlock) => self.params.block_len,
            _ => 1,
        }
    }

    /// Upper-synchronizer column behind a composite column, for round-trip checks.
    pub fn source_of(&self, j: u64) -> ColumnSource {
        match &self.block {
            Some(parts) => composite_source(j, parts.slot(), parts.big_block),
            None => ColumnSource::Upper(j),
        }
    }
}

impl Schedules for SynchronizerFamily {
    fn node_count(&self) -> usize {
        self.n()
    }

    fn length(&self) -> u64 {
        self.len()
    }

    fn bit(&self, node: usize, column: u64) -> bool {
        self.schedules.bit(node, column)
    }
}

/// Load `f_C(j)`: expected number of transmitters in column `j` of `core`
/// under the generation probabilities (unclamped).
pub fn column_load(core: &Core, params: &SyncParams, kind: CoreKind, j: u64) -> Result<f64> {
    if core.kind != kind {
        return domain("core kind does not match the requested load kind");
    }
    Ok(match kind {
        CoreKind::Wakeup => {
            let w = params.c * slog(params.n as f64);
            core.members
                .iter()
                .filter(|&&(_, psi)| psi <= j)
                .map(|&(_, psi)| w / (6.0 * ((j - psi) as f64 + w)))
                .sum()
        }
        CoreKind::Block => {
            let b = params.block_len;
            let weight = upper_block_weight(params, j);
            core.members
                .iter()
                .filter(|&&(_, phi)| b * phi <= j)
                .map(|&(_, phi)| weight / ((j - b * phi + b) as f64))
                .sum()
        }
    })
}

/// Column loads of a core over a range of columns.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadProfile {
    pub core: Core,
    pub loads: Vec<(u64, f64)>,
}

impl LoadProfile {
    pub fn compute(core: &Core, params: &SyncParams, columns: std::ops::Range<u64>) -> Result<Self> {
        let loads = columns
            .map(|j| column_load(core, params, core.kind, j).map(|f| (j, f)))
            .collect::<Result<_>>()?;
        Ok(Self { core: core.clone(), loads })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("column,load\n");
        for (j, f) in &self.loads {
            let _ = writeln!(out, "{j},{f}");
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadViolation {
    pub column: u64,
    pub load: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadReport {
    pub columns_checked: u64,
    pub violations: Vec<LoadViolation>,
}

impl LoadReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the lower load bounds the existence arguments rest on.
///
/// Wake-up cores: `f_C(j) > log log |C| / (12 log |C|)` for all `j < g(|C|)`.
/// Block cores: `f_C(j) > 1/6` on phase-start columns with `B/2 <= j < B|C|/r`.
pub fn check_load_bounds(core: &Core, params: &SyncParams, kind: CoreKind) -> Result<LoadReport> {
    if core.is_empty() {
        return domain("load bounds of an empty core");
    }
    let size = core.len();
    let mut violations = Vec::new();
    let mut checked = 0;
    match kind {
        CoreKind::Wakeup => {
            let ls = slog(size as f64);
            let bound = slog(ls) / (12.0 * ls);
            for j in 0..g_urs(size, params.n, params.c)? {
                checked += 1;
                let load = column_load(core, params, kind, j)?;
                if load <= bound {
                    violations.push(LoadViolation { column: j, load, bound });
                }
            }
        }
        CoreKind::Block => {
            let b = params.block_len;
            let phase = params.phase_len();
            let r = params.r as u64;
            let bound = 1.0 / 6.0;
            let first = b.div_ceil(2).div_ceil(phase) * phase;
            let mut j = first;
            while j * r < b * size as u64 {
                checked += 1;
                let load = column_load(core, params, kind, j)?;
                if load <= bound {
                    violations.push(LoadViolation { column: j, load, bound });
                }
                j += phase;
            }
        }
    }
    Ok(LoadReport { columns_checked: checked, violations })
}

/// A textual summary of a load report, one violation per line.
pub fn describe_report(report: &LoadReport) -> String {
    let mut out = format!("checked={} violations={}\n", report.columns_checked, report.violations.len());
    for v in &report.violations {
        let _ = writeln!(out, "column {}: load {} <= bound {}", v.column, v.load, v.bound);
    }
    out
}
