//! Diameter-perfect q-ary constant-weight codes from Steiner systems.
//!
//! - [`steiner`]: validated S(t, k, n) systems, derivation, resolutions,
//!   cyclic generation and the bundled catalog.
//! - [`codes`]: codes, verification and the block/complement constructions.
//! - [`anticode`]: the A′ and A″ anticode families, EKR bounds and exact
//!   maximum anticodes.
//! - [`coloring`]: exact chromatic numbers of minimum-distance graphs.
//! - [`bounds`]: bounds on the least alphabet sizes q′₀ and q″₀.
//!
//! ```
//! use dpcodes::codes::{construct_f5prime, verify_code, Expected};
//! use dpcodes::steiner::catalog;
//!
//! let code = construct_f5prime(&catalog("fano").unwrap(), 4).unwrap();
//! assert!(verify_code(&code, Expected { d: Some(5), ..Default::default() }, Some(2)).passed());
//! ```

pub mod anticode;
pub mod bounds;
pub mod codes;
pub mod coloring;
pub mod math;
mod ser;
pub mod steiner;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/steiner.md")]
    mod steiner {}
    #[doc = include_str!("../../../book/src/constructions.md")]
    mod constructions {}
    #[doc = include_str!("../../../book/src/anticodes.md")]
    mod anticodes {}
    #[doc = include_str!("../../../book/src/chromatic.md")]
    mod chromatic {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
