//! Reduced-order modeling of SISO linear systems by moment matching with
//! linear pole, zero and derivative constraints, plus the data-driven
//! counterpart built from generalized Loewner matrices.
//!
//! Every model of order `nu` that matches the moments of `K(s) = C(sI-A)^{-1}B`
//! at the spectrum of a generator pair `(S, L)` is `F = S - GL`, input `G`,
//! output `W = C Pi`, where `A Pi + B L = Pi S`. The free vector `G` is then
//! pinned by stacking linear conditions (see [`constraints`]), or obtained
//! from samples alone as `G = -LL^{-1} V` (see [`loewner`]).

pub mod baselines;
pub mod compare;
pub mod complex;
pub mod constraints;
pub mod error;
pub mod io;
pub mod linalg;
pub mod loewner;
pub mod lti;
pub mod metrics;
pub mod moments;
pub mod sylvester;
pub mod synth;

pub use error::{Error, Result};
pub use lti::{ComplexStateSpace, StateSpace, TransferSample};
