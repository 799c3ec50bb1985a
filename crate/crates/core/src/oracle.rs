//! Verifiers for selective families and synchronizers, and the Las Vegas
//! loops that retry generation until a candidate verifies.
//!
//! Exhaustive synchronizer verification walks core space depth first:
//! members are added in nondecreasing offset order, and a branch is cut as
//! soon as a column that no later member can touch is hit by exactly one
//! member. Every state of the walk is itself a core, so a state without a
//! hit in its window is a counterexample.

use std::fmt;

use rand::seq::index::sample;

use crate::draw;
use crate::error::{Error, Result};
use crate::model::{
    column_hit, extract_block_core, extract_wakeup_core, g_urs, ActivationSchedule, Core, CoreKind, Schedules, SyncParams,
    VerifyStatus,
};
use crate::selective::{gen_selective_family, SelectiveFamily};
use crate::synchronizer::{
    compose_block_synchronizer, gen_upper_block_candidate, gen_urs_candidate, pad_selective, selective_slot, FamilyKind,
    SynchronizerFamily,
};

/// Largest `n` for exhaustive selective-family checks.
pub const EXHAUSTIVE_MAX_N_SELECTIVE: usize = 20;
/// Largest number of subsets an exhaustive selective check may enumerate.
pub const EXHAUSTIVE_SUBSET_BUDGET: u64 = 1 << 24;
/// Largest `n` for exhaustive universal-synchronizer checks.
pub const EXHAUSTIVE_MAX_N_URS: usize = 8;
/// Largest `n` for exhaustive block-synchronizer checks.
pub const EXHAUSTIVE_MAX_N_BLOCK: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exhaustive,
    Sampled { trials: u64, seed: u64 },
}

/// What a counterexample is made of.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// A set of nodes no column isolates.
    Set(Vec<usize>),
    /// A core with no hit in its window.
    Core(Core),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub witness: Witness,
    /// Columns per offset unit (1 for sets and wake-up cores).
    pub unit: u64,
    /// No column in `[0, window)` is hit.
    pub window: u64,
}

impl Counterexample {
    /// `(node, column offset)` pairs.
    pub fn members(&self) -> Vec<(usize, u64)> {
        match &self.witness {
            Witness::Set(set) => set.iter().map(|&v| (v, 0)).collect(),
            Witness::Core(core) => core.column_offsets(self.unit),
        }
    }

    /// True iff the family really has no hit in the window.
    pub fn replays<S: Schedules + ?Sized>(&self, family: &S) -> bool {
        let members = self.members();
        !(0..self.window).any(|j| column_hit(family, &members, j))
    }
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = match &self.witness {
            Witness::Set(set) => set.iter().map(|v| v.to_string()).collect(),
            Witness::Core(core) => core.members.iter().map(|(v, o)| format!("{v}@{o}")).collect(),
        };
        write!(f, "{{{}}} unhit in [0,{})", parts.join(","), self.window)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub status: VerifyStatus,
    pub counterexample: Option<Counterexample>,
}

impl Verdict {
    fn pass(mode: Mode) -> Self {
        let status = match mode {
            Mode::Exhaustive => VerifyStatus::Exhaustive,
            Mode::Sampled { trials, .. } => VerifyStatus::Sampled { trials },
        };
        Self { status, counterexample: None }
    }

    fn fail(cx: Counterexample) -> Self {
        Self { status: VerifyStatus::Unverified, counterexample: Some(cx) }
    }

    pub fn holds(&self) -> bool {
        self.counterexample.is_none()
    }
}

fn check_trials(mode: Mode) -> Result<()> {
    match mode {
        Mode::Sampled { trials: 0, .. } => Err(Error::Domain("sampled verification needs at least one trial".into())),
        _ => Ok(()),
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Verifies that every nonempty set of at most `k` nodes is isolated by a column.
pub fn verify_selective_family(family: &SelectiveFamily, mode: Mode) -> Result<Verdict> {
    check_trials(mode)?;
    let n = family.n();
    let k = family.k();
    let found = match mode {
        Mode::Exhaustive => {
            if n > EXHAUSTIVE_MAX_N_SELECTIVE {
                return Err(Error::BudgetExceeded(format!(
                    "selective family with n={n} > {EXHAUSTIVE_MAX_N_SELECTIVE}"
                )));
            }
            let subsets: u64 = (1..=k as u64).map(|s| binomial(n as u64, s)).fold(0, u64::saturating_add);
            if subsets > EXHAUSTIVE_SUBSET_BUDGET {
                return Err(Error::BudgetExceeded(format!("{subsets} subsets > {EXHAUSTIVE_SUBSET_BUDGET}")));
            }
            exhaustive_selective(family, k)
        }
        Mode::Sampled { trials, seed } => {
            let mut rng = draw::rng(seed);
            (0..trials).find_map(|_| {
                let size = 1 + draw::below(&mut rng, k as u64) as usize;
                let mut set = sample(&mut rng, n, size).into_vec();
                set.sort_unstable();
                family.hits_set(&set).is_none().then_some(set)
            })
        }
    };
    let Some(set) = found else {
        return Ok(Verdict::pass(mode));
    };
    let set = minimize_set(family, set);
    let cx = Counterexample { witness: Witness::Set(set), unit: 1, window: family.len() as u64 };
    if !cx.replays(family) {
        return Err(Error::UnsoundCounterexample(cx.to_string()));
    }
    Ok(Verdict::fail(cx))
}

fn exhaustive_selective(family: &SelectiveFamily, k: usize) -> Option<Vec<usize>> {
    let n = family.n();
    let masks = family.column_masks()?;
    let limit = 1u64 << n;
    for size in 1..=k {
        // Gosper's hack: next larger integer with the same popcount.
        let mut x: u64 = (1 << size) - 1;
        while x < limit {
            if !masks.iter().any(|&col| (col & x).count_ones() == 1) {
                return Some((0..n).filter(|&v| x >> v & 1 == 1).collect());
            }
            let c = x & x.wrapping_neg();
            let r = x + c;
            x = (((r ^ x) >> 2) / c) | r;
        }
    }
    None
}

fn minimize_set(family: &SelectiveFamily, mut set: Vec<usize>) -> Vec<usize> {
    let mut i = 0;
    while i < set.len() && set.len() > 1 {
        let mut smaller = set.clone();
        smaller.remove(i);
        if family.hits_set(&smaller).is_none() {
            set = smaller;
        } else {
            i += 1;
        }
    }
    set
}

/// Core-validity and window rules shared by the two synchronizer notions.
#[derive(Debug, Clone)]
enum Rules {
    /// Wake-up cores: `g` indexed by core size.
    Wakeup { g: Vec<u64> },
    /// Block cores with block length `unit` and increment `r`. Upper block
    /// families use the unrounded window `unit * |C| / r`.
    Block { unit: u64, r: u64, upper: bool },
}

impl Rules {
    fn unit(&self) -> u64 {
        match self {
            Rules::Wakeup { .. } => 1,
            Rules::Block { unit, .. } => *unit,
        }
    }

    fn kind(&self) -> CoreKind {
        match self {
            Rules::Wakeup { .. } => CoreKind::Wakeup,
            Rules::Block { .. } => CoreKind::Block,
        }
    }

    /// Hitting window in columns for a core of `size` members.
    fn window(&self, size: usize) -> u64 {
        match self {
            Rules::Wakeup { g } => g[size],
            Rules::Block { unit, r, upper: false } => unit * (size as u64).div_ceil(*r),
            Rules::Block { unit, r, upper: true } => (unit * size as u64).div_ceil(*r),
        }
    }

    /// Column `j` lies before the core cut when `count` members start at or before it.
    fn open(&self, j: u64, count: usize) -> bool {
        match self {
            Rules::Wakeup { g } => j < g[count],
            Rules::Block { unit, r, .. } => j * r < unit * count as u64,
        }
    }

    /// Whether a member may join at unit offset `o` when the current core
    /// has `count` members and maximal offset `max`.
    fn admits(&self, o: u64, max: u64, count: usize) -> bool {
        let unit = self.unit();
        (o == max || self.open(o * unit - 1, count)) && self.open(o * unit, count + 1)
    }

    /// Members (unit offsets) form a valid, normalized core.
    fn valid(&self, members: &[(usize, u64)]) -> bool {
        let mut offsets: Vec<u64> = members.iter().map(|&(_, o)| o).collect();
        offsets.sort_unstable();
        if offsets.first() != Some(&0) {
            return false;
        }
        let unit = self.unit();
        let last = offsets[offsets.len() - 1] * unit;
        (0..=last).all(|j| self.open(j, offsets.iter().filter(|&&o| o * unit <= j).count()))
    }
}

struct CoreSearch<'a, S: ?Sized> {
    family: &'a S,
    rules: &'a Rules,
    min_size: usize,
    max_size: usize,
    len: u64,
    counts: Vec<u32>,
    used: Vec<bool>,
    members: Vec<(usize, u64)>,
}

impl<S: Schedules + ?Sized> CoreSearch<'_, S> {
    fn apply(&mut self, v: usize, o: u64, add: bool) {
        let base = o * self.rules.unit();
        for j in 0..self.len {
            if self.family.bit(v, j) {
                let c = &mut self.counts[(base + j) as usize];
                if add {
                    *c += 1;
                } else {
                    *c -= 1;
                }
            }
        }
        self.used[v] = add;
        if add {
            self.members.push((v, o));
        } else {
            self.members.pop();
        }
    }

    fn first_hit_from(&self, from: u64) -> u64 {
        (from..self.counts.len() as u64).find(|&j| self.counts[j as usize] == 1).unwrap_or(u64::MAX)
    }

    fn run(&mut self) -> Option<Vec<(usize, u64)>> {
        for v in 0..self.family.node_count() {
            self.apply(v, 0, true);
            let found = self.dfs();
            self.apply(v, 0, false);
            if found.is_some() {
                return found;
            }
        }
        None
    }

    fn dfs(&mut self) -> Option<Vec<(usize, u64)>> {
        let count = self.members.len();
        let &(last, max) = self.members.last().unwrap();
        let unit = self.rules.unit();
        let first = self.first_hit_from(max * unit);
        if count >= self.min_size && first >= self.rules.window(count) {
            return Some(self.members.clone());
        }
        if count == self.max_size {
            return None;
        }
        let n = self.family.node_count();
        let mut o = max;
        // Offsets past the first hit would finalize that hit.
        while o * unit <= first && self.rules.admits(o, max, count) {
            let lo = if o == max { last + 1 } else { 0 };
            for v in lo..n {
                if self.used[v] {
                    continue;
                }
                self.apply(v, o, true);
                let found = self.dfs();
                self.apply(v, o, false);
                if found.is_some() {
                    return found;
                }
            }
            o += 1;
        }
        // A later offset that still admits members but lies past `first` cannot lead to a counterexample.
        None
    }
}

fn search_cores<S: Schedules + ?Sized>(
    family: &S,
    rules: &Rules,
    min_size: usize,
    max_size: usize,
) -> Option<Vec<(usize, u64)>> {
    let unit = rules.unit();
    let max_offset_cols = rules.window(max_size);
    let len = family.length();
    let mut search = CoreSearch {
        family,
        rules,
        min_size,
        max_size,
        len,
        counts: vec![0; (max_offset_cols + unit + len) as usize],
        used: vec![false; family.node_count()],
        members: Vec::with_capacity(max_size),
    };
    search.run()
}

fn sample_cores<S: Schedules + ?Sized>(
    family: &S,
    rules: &Rules,
    min_size: usize,
    max_size: usize,
    trials: u64,
    seed: u64,
) -> Result<Option<Vec<(usize, u64)>>> {
    let n = family.node_count();
    let mut rng = draw::rng(seed);
    for _ in 0..trials {
        let size = min_size + draw::below(&mut rng, (max_size - min_size + 1) as u64) as usize;
        let set = sample(&mut rng, n, size).into_vec();
        let span = rules.window(size).max(1);
        let mut times = vec![0u64; n];
        for (i, &v) in set.iter().enumerate() {
            times[v] = if i == 0 { 0 } else { draw::below(&mut rng, span) };
        }
        let omega = ActivationSchedule::new(times);
        let core = match rules {
            Rules::Wakeup { g } => extract_wakeup_core(&set, &omega, |q| g[q])?,
            Rules::Block { unit, r, .. } => extract_block_core(&set, &omega, *unit, *r as usize)?,
        };
        if core.len() < min_size {
            continue;
        }
        let members = core.column_offsets(rules.unit());
        if !(0..rules.window(core.len())).any(|j| column_hit(family, &members, j)) {
            return Ok(Some(core.members));
        }
    }
    Ok(None)
}

fn core_unhit<S: Schedules + ?Sized>(family: &S, rules: &Rules, members: &[(usize, u64)]) -> bool {
    let unit = rules.unit();
    let cols: Vec<(usize, u64)> = members.iter().map(|&(v, o)| (v, o * unit)).collect();
    !(0..rules.window(members.len())).any(|j| column_hit(family, &cols, j))
}

/// Greedy removal of members while the rest stays an unhit valid core.
fn minimize_core<S: Schedules + ?Sized>(
    family: &S,
    rules: &Rules,
    min_size: usize,
    mut members: Vec<(usize, u64)>,
) -> Vec<(usize, u64)> {
    let mut i = 0;
    while i < members.len() && members.len() > min_size.max(1) {
        let mut smaller = members.clone();
        smaller.remove(i);
        let shift = smaller.iter().map(|&(_, o)| o).min().unwrap();
        for m in &mut smaller {
            m.1 -= shift;
        }
        if rules.valid(&smaller) && core_unhit(family, rules, &smaller) {
            members = smaller;
            i = 0;
        } else {
            i += 1;
        }
    }
    members
}

fn verify_cores<S: Schedules + ?Sized>(
    family: &S,
    rules: &Rules,
    sizes: (usize, usize),
    cap: usize,
    mode: Mode,
) -> Result<Verdict> {
    let (min_size, max_size) = sizes;
    check_trials(mode)?;
    let n = family.node_count();
    let found = match mode {
        Mode::Exhaustive => {
            if n > cap {
                return Err(Error::BudgetExceeded(format!("n={n} > {cap} for exhaustive core search")));
            }
            search_cores(family, rules, min_size, max_size)
        }
        Mode::Sampled { trials, seed } => sample_cores(family, rules, min_size, max_size, trials, seed)?,
    };
    let Some(members) = found else {
        return Ok(Verdict::pass(mode));
    };
    let members = minimize_core(family, rules, min_size, members);
    let size = members.len();
    let cx = Counterexample {
        witness: Witness::Core(Core::new(rules.kind(), members.clone())?),
        unit: rules.unit(),
        window: rules.window(size),
    };
    if !rules.valid(&members) || !cx.replays(family) {
        return Err(Error::UnsoundCounterexample(cx.to_string()));
    }
    Ok(Verdict::fail(cx))
}

fn urs_rules(n: usize, c: f64) -> Result<Rules> {
    let mut g = vec![0];
    for q in 1..=n {
        g.push(g_urs(q, n, c)?);
    }
    Ok(Rules::Wakeup { g })
}

/// Verifies the universal radio synchronizer property: every wake-up core
/// `C` is hit at some column below `g(|C|)`.
pub fn verify_urs(family: &SynchronizerFamily, mode: Mode) -> Result<Verdict> {
    if family.kind != FamilyKind::Urs {
        return Err(Error::Domain("not a universal synchronizer".into()));
    }
    let rules = urs_rules(family.n(), family.params.c)?;
    verify_cores(family, &rules, (1, family.n()), EXHAUSTIVE_MAX_N_URS, mode)
}

/// Verifies the block synchronizer property for cores of at most `delta`
/// members: every block core `C` is hit below `BB * ceil(|C| / r)`, where
/// `BB` is the family's block length. Upper block families only answer for
/// cores of at least `r` members, within `B * |C| / r` columns.
pub fn verify_block_synchronizer(family: &SynchronizerFamily, delta: usize, mode: Mode) -> Result<Verdict> {
    if family.kind == FamilyKind::Urs {
        return Err(Error::Domain("not a block synchronizer".into()));
    }
    if delta == 0 || delta > family.n() {
        return Err(Error::Domain(format!("need 1 <= delta <= n (delta={delta})")));
    }
    let r = family.params.r;
    let upper = family.kind == FamilyKind::UpperBlock;
    let rules = Rules::Block { unit: family.sync_block_len(), r: r as u64, upper };
    let min_size = if upper { r.min(delta) } else { 1 };
    verify_cores(family, &rules, (min_size, delta), EXHAUSTIVE_MAX_N_BLOCK, mode)
}

/// A verified family and the number of candidates drawn to get it.
#[derive(Debug, Clone, PartialEq)]
pub struct Generated<T> {
    pub family: T,
    pub attempts: u32,
}

fn las_vegas<T>(
    max_attempts: u32,
    seed: u64,
    mut attempt: impl FnMut(u64) -> Result<(T, Verdict)>,
) -> Result<Generated<T>> {
    if max_attempts == 0 {
        return Err(Error::Domain("max_attempts must be at least 1".into()));
    }
    let mut last = String::new();
    for i in 0..max_attempts {
        let (family, verdict) = attempt(seed.wrapping_add(i as u64))?;
        match verdict.counterexample {
            None => return Ok(Generated { family, attempts: i + 1 }),
            Some(cx) => last = cx.to_string(),
        }
    }
    Err(Error::GenerationFailed { attempts: max_attempts, last })
}

/// Draws selective-family candidates with seeds `seed, seed+1, ...` until one verifies.
pub fn generate_verified_selective(
    n: usize,
    k: usize,
    c: f64,
    mode: Mode,
    max_attempts: u32,
    seed: u64,
) -> Result<Generated<SelectiveFamily>> {
    las_vegas(max_attempts, seed, |s| {
        let mut family = gen_selective_family(n, k, c, s)?;
        let verdict = verify_selective_family(&family, mode)?;
        family.verified = verdict.status;
        Ok((family, verdict))
    })
}

/// Las Vegas loop for universal radio synchronizers.
pub fn generate_verified_urs(n: usize, c: f64, mode: Mode, max_attempts: u32, seed: u64) -> Result<Generated<SynchronizerFamily>> {
    las_vegas(max_attempts, seed, |s| {
        let mut family = gen_urs_candidate(n, c, s)?;
        let verdict = verify_urs(&family, mode)?;
        family.verified = verdict.status;
        Ok((family, verdict))
    })
}

/// Las Vegas loop for upper block synchronizers.
pub fn generate_verified_upper_block(
    n: usize,
    ecc: usize,
    delta: usize,
    c: f64,
    mode: Mode,
    max_attempts: u32,
    seed: u64,
) -> Result<Generated<SynchronizerFamily>> {
    las_vegas(max_attempts, seed, |s| {
        let mut family = gen_upper_block_candidate(n, ecc, delta, c, s)?;
        let verdict = verify_block_synchronizer(&family, delta, mode)?;
        family.verified = verdict.status;
        Ok((family, verdict))
    })
}

/// Builds a verified block synchronizer: a verified `(n, r)`-selective
/// family padded to its slot, composed with upper candidates until the
/// composite verifies. `attempts` counts upper candidates.
pub fn generate_verified_block(
    n: usize,
    ecc: usize,
    delta: usize,
    c: f64,
    c_sel: f64,
    mode: Mode,
    max_attempts: u32,
    seed: u64,
) -> Result<Generated<SynchronizerFamily>> {
    let params = SyncParams::block(n, ecc, delta, c, seed)?;
    let selective = generate_verified_selective(n, params.r, c_sel, selective_mode(n, params.r, mode), max_attempts, seed)?;
    let slot = selective_slot(&params, c_sel, selective.family.len() as u64);
    let selective = pad_selective(&selective.family, slot);
    las_vegas(max_attempts, seed, |s| {
        let upper = gen_upper_block_candidate(n, ecc, delta, c, s)?;
        let mut family = compose_block_synchronizer(&upper, &selective)?;
        let verdict = verify_block_synchronizer(&family, delta, mode)?;
        family.verified = verdict.status;
        Ok((family, verdict))
    })
}

/// Whether an exhaustive `(n, k)`-selective check fits the budgets.
pub fn exhaustive_selective_feasible(n: usize, k: usize) -> bool {
    let subsets: u64 = (1..=k as u64).map(|s| binomial(n as u64, s)).fold(0, u64::saturating_add);
    n <= EXHAUSTIVE_MAX_N_SELECTIVE && subsets <= EXHAUSTIVE_SUBSET_BUDGET
}

/// Exhaustive selective checks are cheap; keep them exhaustive when the
/// budget allows even if the composite is only sampled.
fn selective_mode(n: usize, k: usize, mode: Mode) -> Mode {
    if exhaustive_selective_feasible(n, k) {
        Mode::Exhaustive
    } else {
        mode
    }
}

/// Monte Carlo falsification: `trials` random sets and activation patterns,
/// reduced to cores and checked. Usable at any `n`.
pub fn mc_falsify(family: &SynchronizerFamily, delta: usize, trials: u64, seed: u64) -> Result<Verdict> {
    let mode = Mode::Sampled { trials, seed };
    match family.kind {
        FamilyKind::Urs => verify_urs(family, mode),
        _ => verify_block_synchronizer(family, delta, mode),
    }
}
