//! Entropy costs for importance sampling: divergences, worst-case-optimal
//! Gibbs proposals, tempered sequential Monte Carlo, and required-sample-size
//! bounds.
//!
//! The crate treats the relative entropy `Ent(target | proposal)` as the
//! logarithmic cost of importance sampling and builds the machinery around
//! that idea:
//!
//! * [`measures`] - finite distributions, weighted ensembles, statistics,
//!   and the sampler/log-density contract for continuous references.
//! * [`entropy`] - exact and Monte Carlo relative entropy, Renyi profiles,
//!   the variance identity, and the conditional chain rule.
//! * [`gibbs`] - exponential-family proposals `mu_beta ~ exp<beta,T> d pi`:
//!   moment maps, linear-family Newton solves, and entropy projection onto
//!   convex moment sets.
//! * [`smc`] - a tempered SMC sampler for Gibbs proposals and their
//!   normalizing constants.
//! * [`bounds`] - required-sample-size brackets `|ln N* - Ent| <= R(Y)` and
//!   the empirical critical-sample-size probe.
//! * [`wlc`] - worst-case log-cost of a proposal over entropy balls of
//!   targets, two-atom closed forms, and adversarial strip targets on the
//!   unit square.
//! * [`adaptive`] - cross-entropy iteration with moment matching or
//!   confidence-set projection.
//!
//! ```
//! use entis::entropy::relative_entropy_finite;
//! use entis::measures::FiniteDistribution;
//!
//! let pi = FiniteDistribution::from_probs(vec![0.7, 0.3])?;
//! let dirac = FiniteDistribution::from_probs(vec![1.0, 0.0])?;
//! let cost = relative_entropy_finite(&dirac, &pi)?;
//! assert!((cost - (-(0.7f64.ln()))).abs() < 1e-12);
//! # Ok::<(), entis::Error>(())
//! ```

pub mod adaptive;
pub mod bounds;
pub mod entropy;
pub mod error;
pub mod gibbs;
pub mod measures;
pub mod numeric;
pub mod rng;
pub mod serde_ext;
pub mod smc;
pub mod wlc;

pub use error::{Error, Result};
