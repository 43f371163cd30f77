//! Guide chapters compiled as doc-tests, so every snippet in `book/src`
//! runs under `cargo test`. One module per chapter keeps failures traceable.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/representations.md")]
pub mod representations {}
#[doc = include_str!("../../../book/src/simulation.md")]
pub mod simulation {}
#[doc = include_str!("../../../book/src/qpt.md")]
pub mod qpt {}
#[doc = include_str!("../../../book/src/self_consistent.md")]
pub mod self_consistent {}
#[doc = include_str!("../../../book/src/metrics.md")]
pub mod metrics {}
#[doc = include_str!("../../../book/src/campaigns.md")]
pub mod campaigns {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
