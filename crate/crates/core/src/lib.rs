//! Bus adherence and ridership analytics.
//!
//! Raw adherence, passenger-count, and fare files are parsed and aligned by
//! [`ingest`] into stop events, housed in an immutable [`store::Store`],
//! summarized by [`aggregate`], and served as JSON by [`server`].

pub mod aggregate;
pub mod api;
pub mod ingest;
pub mod model;
pub mod server;
pub mod store;
pub mod synth;
pub mod time;

pub use model::{FareContribution, FareTally, Network, PassengerCounts, Route, Stop, StopEvent};
pub use store::Store;
