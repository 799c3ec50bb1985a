//! Deterministic broadcast and wake-up in ad-hoc radio networks.
//!
//! The crate generates and verifies selective families, universal radio
//! synchronizers and block synchronizers, simulates the protocols built on
//! them over directed radio networks, and provides the layer analysis used
//! to reason about their running time.

mod draw;
pub mod analysis;
pub mod error;
pub mod model;
pub mod oracle;
pub mod protocols;
pub mod radionet;
pub mod selective;
pub mod synchronizer;

pub use error::{Error, Result};
pub use model::{
    column_hit, extract_block_core, extract_wakeup_core, first_hit, g_urs, mu_b, safe_log, ActivationSchedule, Core,
    CoreKind, Schedule, Schedules, SyncParams, VerifyStatus,
};
pub use selective::{gen_selective_family, SelectiveFamily};
pub use synchronizer::{
    compose_block_synchronizer, gen_upper_block_candidate, gen_urs_candidate, FamilyKind, SynchronizerFamily,
};
