//! Hierarchical, reconfigurable place/transition nets with label subtyping.

pub mod dpo;
pub mod format;
pub mod hier;
pub mod lset;
pub mod matching;
pub mod net;
pub mod poset;
pub mod sim;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/posets.md")]
    mod posets {}
    #[doc = include_str!("../../../book/src/labelled-sets.md")]
    mod labelled_sets {}
    #[doc = include_str!("../../../book/src/nets.md")]
    mod nets {}
    #[doc = include_str!("../../../book/src/matching.md")]
    mod matching {}
    #[doc = include_str!("../../../book/src/rewriting.md")]
    mod rewriting {}
    #[doc = include_str!("../../../book/src/hierarchy.md")]
    mod hierarchy {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
