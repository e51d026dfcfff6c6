//! Fourier decay, Riesz energies and digit-block sets on `[0, 1]`.
//!
//! Measures are either piecewise constant on dyadic cells
//! ([`measure::DyadicMeasure`]) or finite sums of point masses
//! ([`measure::AtomicMeasure`]). For these the crate computes
//!
//! - Fourier coefficients, singly or for a whole range of integers by FFT,
//!   and a band-wise fit of their decay rate ([`fourier`]);
//! - Riesz `s`-energies in closed form over cell pairs ([`energy`]);
//! - how small `sup_j |mu^(j)|` can be for a probability measure on
//!   `[eps, 1]`, both as a pairing bound and as a linear minimax ([`lemma`]);
//! - the sets `{f even}` and `{f odd}` defined by which binary digit blocks
//!   of `x` are zero, and the two ways a measure on one of them is forced to
//!   decay slowly ([`construction`]).
//!
//! [`oracle`] recomputes the closed forms by quadrature and enumeration, and
//! [`harness`] drives the `lab` binary.
//!
//! The `examples/` directory is the best place to start:
//!
//! | example | shows |
//! |---|---|
//! | `pushforward` | `x -> 2^l x mod 1` and `nu^(j) = mu^(2^l j)` |
//! | `fourier_decay` | decay fits for Lebesgue, Cantor and random measures |
//! | `riesz_energy` | energies and the cell-counting lower bound |
//! | `infsup_lemma` | the `sup |mu^|` lower bound against a minimax |
//! | `digit_blocks` | the sets `A` and `B` for a small spec |
//! | `dichotomy` | both branches at the default spec |
//!
//! ```
//! use fourier_lab::fourier::SpectralMeasure;
//! use fourier_lab::measure::DyadicMeasure;
//!
//! let mu = DyadicMeasure::lebesgue(4).unwrap();
//! let v = mu.transform(0.5).norm();
//! assert!((v - 2.0 / std::f64::consts::PI).abs() < 1e-15);
//! ```

pub mod cantor;
pub mod construction;
pub mod cylinder;
pub mod energy;
mod error;
pub mod exact;
pub mod fourier;
pub mod harness;
pub mod lemma;
pub mod measure;
pub mod oracle;
pub mod quadrature;

pub use error::{Error, Result};
