//! Isometries as (possibly partial) vertex permutations.
//!
//! Truncated spaces only carry partial translations; consumers treat
//! `OutOfDomain` as "skip this sample", never as a mathematical failure.

use thiserror::Error;

use crate::graph::VertexId;
use crate::metric::Metric;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IsometryError {
    #[error("vertex {0} is outside the domain of isometry '{1}'")]
    OutOfDomain(VertexId, String),
    #[error("permutation image {0} out of range (n = {1})")]
    ImageOutOfRange(VertexId, usize),
    #[error("isometry '{name}' not injective: {u} and {v} both map to {image}")]
    NotInjective {
        name: String,
        u: VertexId,
        v: VertexId,
        image: VertexId,
    },
    #[error("isometry '{name}' distorts d({x},{y}): {before} -> {after}")]
    Distorts {
        name: String,
        x: VertexId,
        y: VertexId,
        before: u32,
        after: u32,
    },
}

/// A distance-preserving map defined on a subset of the vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Isometry {
    name: String,
    map: Vec<Option<VertexId>>,
}

impl Isometry {
    pub fn new(name: impl Into<String>, map: Vec<Option<VertexId>>) -> Result<Self, IsometryError> {
        let name = name.into();
        let n = map.len();
        let mut preimage: Vec<Option<VertexId>> = vec![None; n];
        for (u, img) in map.iter().enumerate() {
            if let Some(v) = *img {
                if v as usize >= n {
                    return Err(IsometryError::ImageOutOfRange(v, n));
                }
                if let Some(prev) = preimage[v as usize] {
                    return Err(IsometryError::NotInjective {
                        name,
                        u: prev,
                        v: u as VertexId,
                        image: v,
                    });
                }
                preimage[v as usize] = Some(u as VertexId);
            }
        }
        Ok(Isometry { name, map })
    }

    pub fn total(name: impl Into<String>, perm: Vec<VertexId>) -> Result<Self, IsometryError> {
        Self::new(name, perm.into_iter().map(Some).collect())
    }

    pub fn identity(n: usize) -> Self {
        Isometry {
            name: "id".into(),
            map: (0..n as VertexId).map(Some).collect(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn is_total(&self) -> bool {
        self.map.iter().all(Option::is_some)
    }

    /// Apply to a vertex; errors on the truncation boundary.
    pub fn act(&self, x: VertexId) -> Result<VertexId, IsometryError> {
        self.map
            .get(x as usize)
            .copied()
            .flatten()
            .ok_or_else(|| IsometryError::OutOfDomain(x, self.name.clone()))
    }

    /// Apply without the error plumbing.
    pub fn try_act(&self, x: VertexId) -> Option<VertexId> {
        self.map.get(x as usize).copied().flatten()
    }

    pub fn in_domain(&self, x: VertexId) -> bool {
        self.try_act(x).is_some()
    }

    /// Composition `outer . inner` (first inner, then outer); the domain is
    /// the set where both stages are defined.
    pub fn compose(outer: &Isometry, inner: &Isometry) -> Isometry {
        let map = inner
            .map
            .iter()
            .map(|img| img.and_then(|v| outer.try_act(v)))
            .collect();
        Isometry {
            name: format!("{}.{}", outer.name, inner.name),
            map,
        }
    }

    pub fn inverse(&self) -> Isometry {
        let n = self.map.len();
        let mut map = vec![None; n];
        for (u, img) in self.map.iter().enumerate() {
            if let Some(v) = *img {
                map[v as usize] = Some(u as VertexId);
            }
        }
        Isometry {
            name: format!("{}^-1", self.name),
            map,
        }
    }

    pub fn power(&self, k: u32) -> Isometry {
        let mut acc = Isometry::identity(self.map.len());
        for _ in 0..k {
            acc = Isometry::compose(self, &acc);
        }
        acc.name = format!("{}^{}", self.name, k);
        acc
    }
}

/// Exhaustively check distance preservation on the domain.
pub fn verify_isometry<M: Metric>(m: &M, iso: &Isometry) -> Result<(), IsometryError> {
    let n = m.n() as VertexId;
    for x in 0..n {
        let Some(gx) = iso.try_act(x) else { continue };
        let row_x = m.row(x);
        let row_gx = m.row(gx);
        for y in x..n {
            let Some(gy) = iso.try_act(y) else { continue };
            let before = row_x[y as usize] as u32;
            let after = row_gx[gy as usize] as u32;
            if before != after {
                return Err(IsometryError::Distorts {
                    name: iso.name().to_string(),
                    x,
                    y,
                    before,
                    after,
                });
            }
        }
    }
    Ok(())
}
