//! Estimating virality of tweets inside polarized retweet communities.
//!
//! The pipeline ingests tweet records, reconstructs retweet cascades, splits
//! the retweet network into two groups, attributes exposures along the
//! follower graph, fits a per-tweet virality by maximum likelihood and relates
//! log-virality to coded tweet features with a cross-validated group lasso.

pub mod error;
pub mod exposure;
pub mod graph;
pub mod ingest;
pub mod labels;
pub mod lasso;
pub mod pipeline;
pub mod sim;
pub mod text;
pub mod textstats;
pub mod virality;

pub use error::{Error, Result};
