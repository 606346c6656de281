//! Runs the guide's code samples as doctests.
//!
//! mdbook itself cannot compile snippets against external crates, so each
//! chapter is included here as module documentation; `cargo test --doc`
//! then builds and runs every ```rust block in the book. One module per
//! chapter keeps failures attributable to their source file.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/distributions.md")]
pub mod distributions {}

#[doc = include_str!("../../../book/src/entropies.md")]
pub mod entropies {}

#[doc = include_str!("../../../book/src/gibbs.md")]
pub mod gibbs {}

#[doc = include_str!("../../../book/src/smc.md")]
pub mod smc {}

#[doc = include_str!("../../../book/src/bounds.md")]
pub mod bounds {}

#[doc = include_str!("../../../book/src/worst_case.md")]
pub mod worst_case {}

#[doc = include_str!("../../../book/src/adaptive.md")]
pub mod adaptive {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
