//! Finite connected simple graphs with dense vertex ids `0..n`.
//!
//! Construction validates simplicity and connectivity up front, so no
//! downstream code ever sees an infinite distance.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

pub type VertexId = u32;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("edge list is empty")]
    EmptyEdgeList,
    #[error("self-loop at vertex {0}")]
    SelfLoop(VertexId),
    #[error("graph is disconnected into {} components: {}", components.len(), describe_components(components))]
    Disconnected { components: Vec<Vec<VertexId>> },
    #[error("edge ({0}, {1}) references a vertex outside 0..{2}")]
    EdgeOutOfRange(VertexId, VertexId, usize),
    #[error("graph too large: {0} vertices (limit {1})")]
    TooLarge(usize, usize),
}

fn describe_components(components: &[Vec<VertexId>]) -> String {
    let mut parts = Vec::new();
    for c in components.iter().take(4) {
        let head: Vec<String> = c.iter().take(6).map(|v| v.to_string()).collect();
        let ellipsis = if c.len() > 6 { ", .." } else { "" };
        parts.push(format!(
            "[{}{}] ({} vertices)",
            head.join(", "),
            ellipsis,
            c.len()
        ));
    }
    if components.len() > 4 {
        parts.push(format!(".. and {} more", components.len() - 4));
    }
    parts.join(", ")
}

/// Hard cap on vertex count; distances are stored as u16 so anything larger
/// could not be tabulated anyway.
pub const MAX_VERTICES: usize = 1 << 20;

/// An undirected, simple, connected graph. Neighbor lists are sorted and
/// symmetric.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGraph {
    adj: Vec<Vec<VertexId>>,
}

impl FiniteGraph {
    /// Build from an edge list. Duplicate edges (in either orientation) are
    /// merged; vertex ids are compacted to `0..n` preserving order.
    pub fn build(edges: &[(VertexId, VertexId)]) -> Result<Self, GraphError> {
        if edges.is_empty() {
            return Err(GraphError::EmptyEdgeList);
        }
        for &(u, v) in edges {
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
        }
        let mut ids = BTreeSet::new();
        for &(u, v) in edges {
            ids.insert(u);
            ids.insert(v);
        }
        let remap: BTreeMap<VertexId, VertexId> = ids
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, i as VertexId))
            .collect();
        let compacted: Vec<(VertexId, VertexId)> =
            edges.iter().map(|&(u, v)| (remap[&u], remap[&v])).collect();
        Self::from_parts(remap.len(), &compacted)
    }

    /// Build from a dense vertex count plus edges. Unlike [`FiniteGraph::build`]
    /// this allows the degenerate single-vertex graph (n = 1, no edges).
    pub fn from_parts(n: usize, edges: &[(VertexId, VertexId)]) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::EmptyEdgeList);
        }
        if n > MAX_VERTICES {
            return Err(GraphError::TooLarge(n, MAX_VERTICES));
        }
        let mut adj: Vec<BTreeSet<VertexId>> = vec![BTreeSet::new(); n];
        for &(u, v) in edges {
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if u as usize >= n || v as usize >= n {
                return Err(GraphError::EdgeOutOfRange(u, v, n));
            }
            adj[u as usize].insert(v);
            adj[v as usize].insert(u);
        }
        let adj: Vec<Vec<VertexId>> = adj.into_iter().map(|s| s.into_iter().collect()).collect();
        let g = FiniteGraph { adj };
        let components = g.components();
        if components.len() > 1 {
            return Err(GraphError::Disconnected { components });
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adj[v as usize]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v as usize].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Sorted list of edges with u < v.
    pub fn edges(&self) -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (u, nbrs) in self.adj.iter().enumerate() {
            for &v in nbrs {
                if (u as VertexId) < v {
                    out.push((u as VertexId, v));
                }
            }
        }
        out
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.adj[u as usize].binary_search(&v).is_ok()
    }

    /// A connected graph is a tree iff it has n - 1 edges.
    pub fn is_tree(&self) -> bool {
        self.edge_count() == self.n() - 1
    }

    /// BFS distances from `src` to every vertex.
    pub fn bfs_row(&self, src: VertexId) -> Vec<u32> {
        let n = self.n();
        let mut dist = vec![u32::MAX; n];
        let mut queue = VecDeque::new();
        dist[src as usize] = 0;
        queue.push_back(src);
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize];
            for &v in &self.adj[u as usize] {
                if dist[v as usize] == u32::MAX {
                    dist[v as usize] = du + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// BFS limited to depth `r`; returns (vertex, distance) pairs sorted by
    /// vertex id. Used for local-finiteness bounds without a full table.
    pub fn bfs_ball(&self, src: VertexId, r: u32) -> Vec<(VertexId, u32)> {
        let mut dist: BTreeMap<VertexId, u32> = BTreeMap::new();
        dist.insert(src, 0);
        let mut queue = VecDeque::new();
        queue.push_back(src);
        while let Some(u) = queue.pop_front() {
            let du = dist[&u];
            if du == r {
                continue;
            }
            for &v in &self.adj[u as usize] {
                dist.entry(v).or_insert_with(|| {
                    queue.push_back(v);
                    du + 1
                });
            }
        }
        dist.into_iter().collect()
    }

    fn components(&self) -> Vec<Vec<VertexId>> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut components = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut comp = Vec::new();
            let mut queue = VecDeque::new();
            seen[start] = true;
            queue.push_back(start as VertexId);
            while let Some(u) = queue.pop_front() {
                comp.push(u);
                for &v in &self.adj[u as usize] {
                    if !seen[v as usize] {
                        seen[v as usize] = true;
                        queue.push_back(v);
                    }
                }
            }
            components.push(comp);
        }
        components
    }
}
