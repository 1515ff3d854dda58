//! Core algorithms for splice-based sequence derivation.
//!
//! A target token sequence is built by repeatedly splicing spans of retrieved
//! neighbor sequences into a canvas. This crate provides the splice action
//! algebra, a minimum-cost chart parser that finds shortest derivations, the
//! greedy left-to-right policies, a brute-force verifier, neighbor retrieval
//! (set-F1 table distance, cosine, k-means prototypes), and the masking and
//! padding preprocessing steps.
//!
//! The crate is `no_std`-compatible: it only needs `alloc`, plus a `libm`
//! backend for float math when the `std` feature is disabled.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("no_std builds need the `libm` feature for float math");

pub mod action;
pub mod bruteforce;
pub mod extract;
pub mod kmeans;
pub mod match_table;
pub mod neighbors;
pub mod oracle;
pub mod parser;
pub mod prep;
pub mod retrieval;
pub mod seq;
pub mod vocab;

mod num;

pub use action::{check_non_interleaving, ginsert, replay, GinsertError, ProvenanceTrace, ReplayError, SpliceAction};
pub use bruteforce::{
    gen_micro_instance, min_actions_bruteforce, min_actions_bruteforce_with, min_spans_l2rs_dp,
    LimitExceeded, MicroInstance, SearchConfig, SearchLimits, SearchOutcome,
};
pub use extract::{extract_actions, token_checksum, verify_derivation, Derivation, ExtractError};
pub use kmeans::{kmeans_prototypes, KMeansError};
pub use match_table::MatchTable;
pub use neighbors::{expand_neighbors, ExpandedNeighborSet, NeighborEntry, Origin};
pub use oracle::{oracle_full, oracle_l2rs, oracle_l2rt, OracleError};
pub use parser::{parse_min_cost, parse_with_table, ParseError, ParseOutcome, ParseStats, ParseTree};
pub use prep::{
    dedupe_pairs, mask_pmi, mask_source_overlap, source_runs, stopword_ids, extract_source_spans,
    PmiTable, DEFAULT_PMI_MIN_COUNT, DEFAULT_PMI_TAU, STOPWORDS,
};
pub use retrieval::{
    cosine_distance, table_distance, top_k_by, top_k_embeddings, top_k_tables, RetrievalError,
    TableSource,
};
pub use seq::{AlreadyPadded, TokenSequence};
pub use vocab::{tokens_match, whitespace_tokenize, TokenId, Vocab, BOS, EOS, MASK};
