//! Reference checks written straight from the definitions, sharing no code
//! with the library's verifiers.

#![allow(dead_code)]

use radiosync::g_urs;
use radiosync::synchronizer::SynchronizerFamily;

/// Exactly one of `(row, offset)` reads a 1 at column `j`.
fn isolated(rows: &[&[bool]], offsets: &[u64], j: u64) -> bool {
    let mut ones = 0;
    for (row, &o) in rows.iter().zip(offsets) {
        if j >= o && row.get((j - o) as usize).copied().unwrap_or(false) {
            ones += 1;
        }
    }
    ones == 1
}

/// Raw (X, omega) enumeration of the universal synchronizer property.
///
/// Offsets range over `[0, g(|X|))` with at least one member at 0. A member
/// at `g(|X|)` or later reads nothing inside the window, and the smaller set
/// without it has a window no longer than this one, so those cases are
/// already covered by smaller `X`.
pub fn naive_urs_holds(family: &SynchronizerFamily) -> bool {
    let n = family.n();
    let c = family.params.c;
    let bits: Vec<&[bool]> = family.schedules().iter().map(|s| s.bits()).collect();
    for mask in 1u32..(1 << n) {
        let rows: Vec<&[bool]> = (0..n).filter(|v| mask >> v & 1 == 1).map(|v| bits[v]).collect();
        let g = g_urs(rows.len(), n, c).unwrap();
        let mut offsets = vec![0u64; rows.len()];
        loop {
            if offsets.contains(&0) && !(0..g).any(|j| isolated(&rows, &offsets, j)) {
                return false;
            }
            let mut i = 0;
            while i < offsets.len() {
                offsets[i] += 1;
                if offsets[i] < g {
                    break;
                }
                offsets[i] = 0;
                i += 1;
            }
            if i == offsets.len() {
                break;
            }
        }
    }
    true
}

/// Every set of at most `k` nodes is isolated by one of the first `cols` columns.
pub fn naive_isolates_small_sets(family: &SynchronizerFamily, k: usize, cols: u64) -> bool {
    let n = family.n();
    let bits: Vec<&[bool]> = family.schedules().iter().map(|s| s.bits()).collect();
    (1u32..(1 << n)).filter(|m| m.count_ones() as usize <= k).all(|mask| {
        let rows: Vec<&[bool]> = (0..n).filter(|v| mask >> v & 1 == 1).map(|v| bits[v]).collect();
        let zeros = vec![0; rows.len()];
        (0..cols).any(|j| isolated(&rows, &zeros, j))
    })
}
