//! Two-sided numerical checks of operator-norm interpolation inequalities
//! (McIntosh, Cordes, Heinz-Kato, Loewner-Heinz), with certified refinements
//! for separated spectra and equality-case analysis.
//!
//! The guide in `book/` walks through the modules; its code blocks run as
//! doctests.

pub mod approx;
pub mod cli;
pub mod equality;
pub mod error;
pub mod fuzz;
pub mod inequalities;
pub mod linalg;
pub mod quad;
pub mod refinement;
pub mod rng;
pub mod selftest;
pub mod spectral;
pub mod strip;

// Each book chapter is a doc comment here so `cargo test --doc` runs its
// snippets; one module per chapter keeps failures attributable.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/spectral.md")]
    mod spectral {}
    #[doc = include_str!("../../../book/src/inequalities.md")]
    mod inequalities {}
    #[doc = include_str!("../../../book/src/refinement.md")]
    mod refinement {}
    #[doc = include_str!("../../../book/src/strip.md")]
    mod strip {}
    #[doc = include_str!("../../../book/src/equality.md")]
    mod equality {}
    #[doc = include_str!("../../../book/src/approx.md")]
    mod approx {}
    #[doc = include_str!("../../../book/src/campaigns.md")]
    mod campaigns {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/acceptance.md")]
    mod acceptance {}
}
