//! Crossword tile-game simulator for measuring how much of the outcome is
//! decided by the tile order.
//!
//! A fixed permutation of the tiles is drawn from both ends, player 1 from
//! the front and player 2 from the back, so the same order can be replayed
//! many times with fresh bot randomness. The harness plays orders ×
//! replicates and the analysis module splits the outcome variance into a
//! between-order and a within-order part.

pub mod analysis;
pub mod board;
pub mod bot;
pub mod engine;
pub mod harness;
pub mod lexicon;
pub mod movegen;
pub mod record;
pub mod reservoir;
pub mod ruleset;
pub mod tiles;

pub use board::{Board, Direction, Placement};
pub use bot::{BotConfig, LeaveTable, SpeedyBot};
pub use engine::{play_game, GameOptions, GameRng, MoveChoice, Player};
pub use harness::{run_experiment, run_with, ExperimentConfig, GameOutcome, OutcomeTable};
pub use lexicon::Lexicon;
pub use record::GameRecord;
pub use reservoir::{Reservoir, TileSequence};
pub use ruleset::RuleSet;
