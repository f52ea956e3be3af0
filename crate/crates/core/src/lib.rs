//! Symbolic dynamical systems on countable digraphs.
//!
//! [`netgraph`] supplies lazily explored digraphs and their growth
//! statistics, [`symsys`] the systems themselves, [`entropydim`] pattern
//! counting, [`counterexample`] a two-dimensional positively expansive
//! system with its trace decoder, and [`metricspace`] Cantor metrics based
//! at an estuary.

pub mod counterexample;
pub mod entropydim;
pub mod metricspace;
pub mod netgraph;
pub mod symsys;
