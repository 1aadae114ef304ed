//! The random order over edge copies.
//!
//! Every edge `{u, v}` contributes `K` START copies and one EXTEND copy. A run
//! processes them in a uniformly random order. Ranks here realize that order
//! either as a keyed hash (eager) or by sampling order statistics on demand
//! (lazy), and expose per-vertex streams "the i-th lowest incident element".

mod element;
mod model;
mod params;
mod seed;

pub use element::{ElementRef, Kind, Rank, Side};
pub use model::{color, eager_rank, freeze_coin, frozen, Backend, Entry, RankError, RankModel};
pub use params::{theoretical_delta, GraphShape, ParamError, ParamSet, DEFAULT_C, FREEZE_P};
pub use seed::{Seed, SeedParseError};
