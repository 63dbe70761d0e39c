//! Standard instance families: clique factors placed into random or
//! multipartite hosts, with one part per clique position.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::graph::{blowup, gnp, k_factor, Graph, VertexSet};
use crate::partition::Blueprint;
use crate::rng::Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HostKind {
    /// `Γ = G = G(n, p)` cut into consecutive blocks.
    Gnp,
    /// Edges only between parts, each present with probability `p`.
    Multipartite,
}

impl fmt::Display for HostKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HostKind::Gnp => "gnp",
            HostKind::Multipartite => "multipartite",
        })
    }
}

impl FromStr for HostKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gnp" => Ok(HostKind::Gnp),
            "multipartite" => Ok(HostKind::Multipartite),
            _ => Err(format!("unknown host kind {s:?}")),
        }
    }
}

/// `K_k`-factor with `size` copies against a host with `k` parts of `size`
/// vertices; `R = R′ = K_k`.
pub fn clique_factor(k: usize, size: usize, host: HostKind, p: f64, rng: &mut Rng) -> Blueprint {
    let (h, xparts) = k_factor(k, size);
    let n = k * size;
    let (gamma, vparts) = match host {
        HostKind::Gnp => {
            let g = gnp(n, p, rng);
            let parts = (0..k).map(|i| VertexSet::from_ids(n, i * size..(i + 1) * size)).collect();
            (g, parts)
        }
        HostKind::Multipartite => blowup(&Graph::complete(k), &vec![size; k], p, rng),
    };
    Blueprint::unrestricted(gamma.clone(), gamma, h, Graph::complete(k), xparts, vparts)
}
