//! Numerical toolkit for process matrices with indefinite causal order, in
//! finite dimensions and for continuous-variable systems.
//!
//! The crate is organized in five layers:
//!
//! * [`operator_core`] — dense complex linear algebra over labeled
//!   tensor-product spaces (tensor products, partial traces, positivity).
//! * [`finite_process`] — the finite-dimensional process-matrix formalism:
//!   Choi-Jamiołkowski operators, instruments, the probability rule, process
//!   validity conditions, causal-order and separability checks.
//! * [`phase_space`] — discretized Weyl symbols and characteristic functions
//!   on phase-space grids, with the Fourier-domain trace-preservation and
//!   process-structure checks that replace the operator conditions in
//!   infinite dimensions.
//! * [`propagation`] — Green functions, Gaussian wavepackets, complex
//!   Gaussian quadratic forms, and a split-step Fourier grid propagator used
//!   as an independent cross-check.
//! * [`switch`] — the continuous-variable quantum switch: branch amplitudes,
//!   measure-and-reprepare instruments, the three-component outcome
//!   densities, marginal-signaling analysis, and the causal-nonseparability
//!   evidence report.

pub mod config;
pub mod error;
pub mod finite_process;
pub mod operator_core;
pub mod phase_space;
pub mod propagation;
pub mod switch;

pub use error::Error;
