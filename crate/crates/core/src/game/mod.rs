//! The location-based game loop.
//!
//! Accepted submissions earn points scaled by where they were collected
//! (uncharted and stale cells pay more), the CHW's daily streak and any
//! active campaign. Every score is an entry in an append-only ledger from
//! which a [`GameState`] can be rebuilt exactly.

mod leaderboard;
mod quests;
mod rules;
mod scoring;
mod state;

pub use leaderboard::{leaderboard, BoardEntry, Leaderboard, LeaderboardMember};
pub use quests::{generate_quests, Quest, QuestKind};
pub use rules::RewardRules;
pub use scoring::{campaign_multiplier, score_submission, Campaign, CellContext, CellKind, ScoreEvent};
pub use state::{award_badges, update_streak, Badge, GameState};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("contract violation: {0}")]
    ContractViolation(String),
}
