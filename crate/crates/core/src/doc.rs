//! On-disk formats: plain-text edge lists, the structured graph document
//! (vertices, edges, optional labels and named automorphisms as permutation
//! arrays), and the triangular metric document for the rescale pipeline.
//! All emitters sort their content, so output bytes are deterministic.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{FiniteGraph, GraphError, VertexId};
use crate::isometry::{Isometry, IsometryError};
use crate::metric::{FiniteMetric, Metric, MetricError};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum DocError {
    #[error("line {0}: expected `u v`, got {1:?}")]
    BadEdgeLine(usize, String),
    #[error("unsupported schema version {0} (this build reads {SCHEMA_VERSION})")]
    BadSchema(u32),
    #[error("vertex list must be exactly 0..n, found {0} at position {1}")]
    BadVertexList(VertexId, usize),
    #[error("labels array has {0} entries for {1} vertices")]
    BadLabels(usize, usize),
    #[error("automorphism '{0}' has {1} entries for {2} vertices")]
    BadPermLength(String, usize, usize),
    #[error("metric document: expected {0} upper-triangle entries, found {1}")]
    BadTriangle(usize, usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Isometry(#[from] IsometryError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Parse a plain-text edge list: one `u v` pair per line, `#` comments.
pub fn parse_edge_list(text: &str) -> Result<FiniteGraph, DocError> {
    let mut edges = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(u), Some(v), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(DocError::BadEdgeLine(lineno + 1, raw.to_string()));
        };
        let u: VertexId = u
            .parse()
            .map_err(|_| DocError::BadEdgeLine(lineno + 1, raw.to_string()))?;
        let v: VertexId = v
            .parse()
            .map_err(|_| DocError::BadEdgeLine(lineno + 1, raw.to_string()))?;
        edges.push((u, v));
    }
    Ok(FiniteGraph::build(&edges)?)
}

/// Emit the sorted edge list.
pub fn emit_edge_list(g: &FiniteGraph) -> String {
    let mut out = String::new();
    for (u, v) in g.edges() {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AutomorphismDoc {
    pub name: String,
    /// Image per vertex; null marks the truncation boundary.
    pub perm: Vec<Option<VertexId>>,
}

/// The structured single-document graph format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphDoc {
    pub schema_version: u32,
    pub vertices: Vec<VertexId>,
    pub edges: Vec<(VertexId, VertexId)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub automorphisms: Option<Vec<AutomorphismDoc>>,
}

impl GraphDoc {
    pub fn new(g: &FiniteGraph) -> Self {
        GraphDoc {
            schema_version: SCHEMA_VERSION,
            vertices: (0..g.n() as VertexId).collect(),
            edges: g.edges(),
            labels: None,
            automorphisms: None,
        }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        self.labels = Some(labels);
        self
    }

    pub fn with_automorphisms(mut self, isos: &[Isometry]) -> Self {
        let mut autos: Vec<AutomorphismDoc> = isos
            .iter()
            .map(|iso| AutomorphismDoc {
                name: iso.name().to_string(),
                perm: (0..iso.len() as VertexId).map(|v| iso.try_act(v)).collect(),
            })
            .collect();
        autos.sort_by(|a, b| a.name.cmp(&b.name));
        self.automorphisms = Some(autos);
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("doc serialization");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, DocError> {
        let doc: GraphDoc = serde_json::from_str(text)?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(DocError::BadSchema(doc.schema_version));
        }
        Ok(doc)
    }

    /// Validate and build the graph plus named automorphisms.
    pub fn build(&self) -> Result<(FiniteGraph, Vec<Isometry>), DocError> {
        for (i, &v) in self.vertices.iter().enumerate() {
            if v as usize != i {
                return Err(DocError::BadVertexList(v, i));
            }
        }
        let n = self.vertices.len();
        let graph = FiniteGraph::from_parts(n, &self.edges)?;
        if let Some(labels) = &self.labels {
            if labels.len() != n {
                return Err(DocError::BadLabels(labels.len(), n));
            }
        }
        let mut isos = Vec::new();
        if let Some(autos) = &self.automorphisms {
            for a in autos {
                if a.perm.len() != n {
                    return Err(DocError::BadPermLength(a.name.clone(), a.perm.len(), n));
                }
                isos.push(Isometry::new(a.name.clone(), a.perm.clone())?);
            }
        }
        Ok((graph, isos))
    }
}

/// General finite metric as a document: n points and the upper triangle of
/// the distance table in row-major order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricDoc {
    pub schema_version: u32,
    pub points: usize,
    pub dist_upper: Vec<u32>,
}

impl MetricDoc {
    pub fn from_metric<M: Metric>(m: &M) -> Self {
        let n = m.n();
        let mut dist_upper = Vec::with_capacity(n * (n - 1) / 2);
        for u in 0..n as VertexId {
            let row = m.row(u);
            for v in (u as usize + 1)..n {
                dist_upper.push(row[v] as u32);
            }
        }
        MetricDoc {
            schema_version: SCHEMA_VERSION,
            points: n,
            dist_upper,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("doc serialization");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, DocError> {
        let doc: MetricDoc = serde_json::from_str(text)?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(DocError::BadSchema(doc.schema_version));
        }
        Ok(doc)
    }

    pub fn build(&self) -> Result<FiniteMetric, DocError> {
        let n = self.points;
        let expected = n * (n - 1) / 2;
        if self.dist_upper.len() != expected {
            return Err(DocError::BadTriangle(expected, self.dist_upper.len()));
        }
        let mut cells = vec![0u16; n * n];
        let mut it = self.dist_upper.iter();
        for u in 0..n {
            for v in (u + 1)..n {
                let d = *it.next().unwrap();
                if d > u16::MAX as u32 {
                    return Err(DocError::Metric(MetricError::DistanceOverflow(d)));
                }
                cells[u * n + v] = d as u16;
                cells[v * n + u] = d as u16;
            }
        }
        Ok(FiniteMetric::new(n, cells)?)
    }
}
