//! Orbit counting in conjugacy classes for free groups acting on the
//! universal covering trees of finite metric graphs.
//!
//! The pipeline runs bottom-up:
//!
//! * [`graph`] parses metric graphs, fixes a free basis of the fundamental
//!   group through a breadth-first spanning tree, and measures displacement
//!   `L(x) = d(o, o·x)` by non-backtracking edge-path reduction;
//! * [`words`] holds reduced words, enumeration and conjugacy classes;
//! * [`coding`] tabulates the locally constant increment `r = L - L∘σ`;
//! * [`transfer`] builds the weighted matrices `A_s` / `B_s`, their Perron
//!   data, the entropy `h` with `β(h) = 1`, and certified spectral bounds;
//! * [`counting`] runs exact brute-force counts and the residue constants
//!   predicting `N(T) ~ (c₀/h) e^{hT}` and `N_C(T) ~ C e^{hT/2}`.

pub mod coding;
pub mod counting;
pub mod error;
pub mod graph;
pub mod transfer;
pub mod words;

pub use error::{Error, ErrorKind, Result};
