//! Online measurement of incentive-compatibility regret for black-box auctions.
//!
//! An auction is only observable through per-block averages of allocation and
//! payment. Learners in [`policy`] pick bids so that the largest utility gain
//! from misreporting is found quickly; [`accounting`] scores them against a
//! Monte Carlo oracle, and [`harness`] runs repeated experiments to CSV and SVG.

pub mod accounting;
pub mod auction;
pub mod env;
pub mod error;
pub mod estimator;
pub mod gsp;
pub mod harness;
pub mod policy;

pub use auction::{AuctionEnvironment, AuctionOutcome, BidGrid, BlockObservation};
pub use error::{Error, Result};
