//! The guide in `book/` compiled as doc-tests, one module per chapter.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/words.md")]
pub mod words {}
#[doc = include_str!("../../../book/src/free-products.md")]
pub mod free_products {}
#[doc = include_str!("../../../book/src/exponent-sums.md")]
pub mod exponent_sums {}
#[doc = include_str!("../../../book/src/cosets.md")]
pub mod cosets {}
#[doc = include_str!("../../../book/src/homology.md")]
pub mod homology {}
#[doc = include_str!("../../../book/src/theorems.md")]
pub mod theorems {}
#[doc = include_str!("../../../book/src/solver.md")]
pub mod solver {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
