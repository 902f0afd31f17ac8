//! Generalized Thomas–Reiche–Kuhn sum rules for light-dressed matter.
//!
//! The crate builds 1D grid and few-level matter models, dresses them with a
//! periodic classical field (truncated Sambe space) or a single quantized
//! cavity mode, and evaluates the energy-weighted dipole sums in every form:
//!
//! - [`sumrule::static_trk`] for bare matter,
//! - [`sumrule::sumrule_sambe`] over the full truncated Floquet spectrum,
//! - [`sumrule::sumrule_ffbz`] over zone representatives with
//!   Fourier-resolved dipoles, and its stick spectrum,
//! - [`qed::sumrule_qed`] over polariton states.
//!
//! Each report carries the double-commutator oracle `⟨α|[d,[H,d]]|α⟩`, which
//! the spectral sum matches exactly in finite dimension.

pub mod error;
pub mod floquet;
pub mod linalg;
pub mod model;
pub mod qed;
pub mod sumrule;

pub use error::{Error, Result};
pub use linalg::{Spectrum, C64};
