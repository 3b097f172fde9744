//! Synthesis and verification of uniform strategies in two-player
//! turn-based games.
//!
//! A uniformity property is an LTL formula extended with a modality `R`
//! ("in every related play") whose meaning is given by a rational relation
//! between finite plays, presented as a finite-state transducer. This crate
//! provides:
//!
//! - [`arena`]: arenas, plays, finite-memory strategies and their outcomes,
//! - [`relations`]: relation transducers and information-set tracking,
//! - [`rltl`]: the formula language, its parser and a lasso evaluator,
//! - [`omega`]: LTL to Büchi translation, emptiness and determinization,
//! - [`elimination`]: the layered information-set construction that removes
//!   `R` modalities one nesting level at a time,
//! - [`game`]: parity games and fully-uniform strategy synthesis,
//! - [`verify`]: checkers for fully- and strictly-uniform strategies.
//!
//! # `no_std` support
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the
//! command-line front end and example generators live in the `unisynt`
//! crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod arena;
pub mod elimination;
pub mod game;
pub mod graph;
pub mod omega;
pub mod relations;
pub mod rltl;
pub mod verify;

pub use arena::{Arena, FinitePlay, Lasso, OutcomeProduct, Player, RawArena, StrategyMachine};
pub use elimination::{eliminate_all, ElimError, Elimination, Layer};
pub use game::{ltl_game, synthesize_fully_uniform, zielonka_solve, ParityGame, SynthesisResult};
pub use relations::{InfoState, RelationTransducer};
pub use rltl::{parse, Formula};
pub use verify::{check_fully_uniform, check_strictly_uniform, Verdict};
