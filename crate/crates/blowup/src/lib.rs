//! Sparse blow-up machinery: regularity verifiers, host pseudorandomness
//! checks, partition construction, and randomized greedy embeddings of a
//! bounded-degree graph `H` into a subgraph `G` of a sparse host `Γ`.

pub mod embed;
pub mod graph;
pub mod matching;
pub mod order;
pub mod partition;
pub mod props;
pub mod regularity;
pub mod rga;
pub mod scenario;
pub mod rng;

pub use graph::{Graph, GraphError, VertexSet};
pub use rng::Rng;

/// Guide chapters, compiled here so their snippets run as doctests.
pub mod guide {
    #[doc = include_str!("../../../book/src/ch1-graphs.md")]
    pub mod chapter1 {}
    #[doc = include_str!("../../../book/src/ch2-regularity.md")]
    pub mod chapter2 {}
    #[doc = include_str!("../../../book/src/ch3-properties.md")]
    pub mod chapter3 {}
    #[doc = include_str!("../../../book/src/ch4-partitions.md")]
    pub mod chapter4 {}
    #[doc = include_str!("../../../book/src/ch5-embedding.md")]
    pub mod chapter5 {}
    #[doc = include_str!("../../../book/src/ch6-matching.md")]
    pub mod chapter6 {}
}
