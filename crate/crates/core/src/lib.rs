//! Web spam detection from page content and link structure.
//!
//! Pages are reduced to eight categorical attributes ([`record::SiteRecord`])
//! using KMP keyword scoring and a tolerant tag scanner, a CHAID tree is grown
//! over the resulting dataset, and root-to-leaf paths are reported as spam
//! pattern rules alongside precision/recall/F evaluation.

pub mod chaid;
pub mod config;
pub mod corpus;
pub mod dataset;
pub mod error;
pub mod features;
pub mod metrics;
pub mod pattern_match;
pub mod record;
pub mod synth;

pub use error::{Error, Result};
