//! Zero-shot hypernym prediction with prompt-based log-probability scoring.
//!
//! The crate is organized around a small pipeline:
//!
//! - [`backend`] — the scoring contract (tokenize + per-token conditional
//!   log-probabilities) with an HTTP client for completions-style logprob
//!   endpoints and two deterministic test backends (table, uniform).
//! - [`prompts`] — slotted sentence templates, instantiation of
//!   (hyponym, hypernym\[, co-hyponym\]) triples, pluralization, and the
//!   bundled prompt catalogs.
//! - [`scoring`] — full and selective sequence scores, prompt combination,
//!   candidate ranking, and a persistent score cache.
//! - [`datasets`] — loaders for hypernymysuite-format benchmark files and
//!   per-target candidate pools.
//! - [`metrics`] — average precision, mean average precision, and
//!   Pearson/Spearman correlation.
//! - [`cohypo`] — co-hyponym discovery (embedding neighbors, edit-distance
//!   and lexicon filters, prompt rerank) and co-hyponym-augmented prompts.
//! - [`iterative`] — the iterative hypernym-chain ranking algorithm with
//!   its stopping criterion and step-last / step-mean rankings.

pub mod backend;
pub mod cohypo;
pub mod datasets;
pub mod iterative;
pub mod metrics;
pub mod prompts;
pub mod scoring;
