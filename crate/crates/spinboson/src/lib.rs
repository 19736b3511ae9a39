//! Objectivity indicators for the pure-dephasing spin-boson model.
//!
//! A two-level system coupled through σ_z to a bath of harmonic oscillators
//! loses coherence without exchanging energy. When part of the bath is
//! observed, the joint state of the qubit and the observed fraction can
//! approach a spectrum broadcast structure — the operational form of an
//! objective record. This crate computes the functions that diagnose that
//! approach, over Ohmic-family spectral densities J(ω) = ω^s Λ^{1-s} e^{-ω/Λ}
//! with configurable observed/unobserved frequency partitions:
//!
//! * the decoherence factor log|Γ(t)| induced by the unobserved modes,
//! * the generalized overlap (Uhlmann fidelity) log B(t) of the conditional
//!   observed-environment states,
//! * the canonical decoherence rate γ(t) and the non-Markovianity measure
//!   𝒩 = -∫_{γ<0} γ dt,
//! * long-time asymptotics of both indicators.
//!
//! Everything is computed twice where feasible — by adaptive quadrature
//! ([`quad`], [`indicators`]) and by closed special-function forms
//! ([`closed_form`]) — and validated against exact finite-mode quantum
//! mechanics on truncated Fock spaces ([`oracle`]).
//!
//! Units: ħ = k_B = 1; frequencies carry the same unit as the cutoff Λ and
//! times its inverse.

pub mod closed_form;
pub mod error;
pub mod indicators;
pub mod quad;
pub mod spectral;

pub use error::{Error, Result};
pub use indicators::{Asymptote, IndicatorSeries, Method, NMResult, Thermo};
pub use spectral::{discretize, EnvPartition, Mode, ModeSet, Role, SpectralDensity};
