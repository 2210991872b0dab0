//! Cayley balls of free groups with the word metric.
//!
//! A rank-r free group ball of inner radius N is materialized as the graph
//! on all reduced words of length <= 2N, one edge per generator
//! multiplication. Geodesics between points of the N-ball stay inside the
//! 2N-ball, so BFS distances in the truncated graph agree with the word
//! metric on every pair of N-ball points; the metric is only trusted there.
//! Left translations are partial isometries with explicit domains.

use std::collections::HashMap;

use thiserror::Error;

use crate::graph::{FiniteGraph, VertexId};
use crate::isometry::Isometry;
use crate::metric::Metric;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CayleyError {
    #[error(
        "ball of rank {rank} and radius {radius} would have ~{estimate} vertices (limit {limit})"
    )]
    SizeLimit {
        rank: u32,
        radius: u32,
        estimate: u64,
        limit: u64,
    },
    #[error("rank and radius must be at least 1")]
    BadParameters,
    #[error("safe region is empty: margin {margin} exceeds the ball radius {radius}")]
    EmptyRegion { margin: u32, radius: u32 },
    #[error("radius {0} exceeds the inner radius {1}")]
    RadiusTooLarge(u32, u32),
}

/// A reduced word over generators 1..=rank; negative letters are inverses.
pub type Word = Vec<i8>;

pub(crate) fn reduce_concat(a: &[i8], b: &[i8]) -> Word {
    let mut out: Word = a.to_vec();
    for &l in b {
        if out.last() == Some(&-l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

pub(crate) fn invert(w: &[i8]) -> Word {
    w.iter().rev().map(|&l| -l).collect()
}

fn letter_label(l: i8) -> char {
    let idx = l.unsigned_abs() - 1;
    if l > 0 {
        (b'a' + idx) as char
    } else {
        (b'A' + idx) as char
    }
}

fn word_label(w: &[i8]) -> String {
    if w.is_empty() {
        "e".to_string()
    } else {
        w.iter().map(|&l| letter_label(l)).collect()
    }
}

/// The ball B(1, 2N) of a free group Cayley graph.
pub struct GroupBall {
    pub graph: FiniteGraph,
    pub rank: u32,
    /// N: the radius on which the metric is trusted.
    pub inner_radius: u32,
    /// Vertex of the identity (always 0).
    pub center: VertexId,
    words: Vec<Word>,
    labels: Vec<String>,
    index: HashMap<Word, VertexId>,
}

const BALL_VERTEX_LIMIT: u64 = 2_000_000;

/// Number of reduced words of length <= len over `rank` free generators.
fn ball_size(rank: u64, len: u32) -> u64 {
    let mut total = 1u64;
    let mut sphere = 2 * rank;
    for _ in 1..=len {
        total = total.saturating_add(sphere);
        sphere = sphere.saturating_mul(2 * rank - 1);
    }
    total
}

/// Generate the ball of radius 2N of the rank-r free group.
pub fn free_group_ball(rank: u32, inner_radius: u32) -> Result<GroupBall, CayleyError> {
    if rank < 1 || inner_radius < 1 {
        return Err(CayleyError::BadParameters);
    }
    let outer = 2 * inner_radius;
    let estimate = ball_size(rank as u64, outer);
    if estimate > BALL_VERTEX_LIMIT {
        return Err(CayleyError::SizeLimit {
            rank,
            radius: inner_radius,
            estimate,
            limit: BALL_VERTEX_LIMIT,
        });
    }
    let mut words: Vec<Word> = vec![Vec::new()];
    let mut index: HashMap<Word, VertexId> = HashMap::new();
    index.insert(Vec::new(), 0);
    let mut edges: Vec<(VertexId, VertexId)> = Vec::new();
    let mut head = 0usize;
    while head < words.len() {
        let w = words[head].clone();
        let v = head as VertexId;
        head += 1;
        if w.len() as u32 == outer {
            continue;
        }
        for g in 1..=rank as i8 {
            for letter in [g, -g] {
                if w.last() == Some(&-letter) {
                    continue;
                }
                let mut next = w.clone();
                next.push(letter);
                let id = *index.entry(next.clone()).or_insert_with(|| {
                    words.push(next);
                    (words.len() - 1) as VertexId
                });
                edges.push((v, id));
            }
        }
    }
    let labels = words.iter().map(|w| word_label(w)).collect();
    let graph = FiniteGraph::from_parts(words.len(), &edges).unwrap();
    Ok(GroupBall {
        graph,
        rank,
        inner_radius,
        center: 0,
        words,
        labels,
        index,
    })
}

impl GroupBall {
    pub fn n(&self) -> usize {
        self.words.len()
    }

    pub fn outer_radius(&self) -> u32 {
        2 * self.inner_radius
    }

    pub fn word(&self, v: VertexId) -> &Word {
        &self.words[v as usize]
    }

    pub fn label(&self, v: VertexId) -> &str {
        &self.labels[v as usize]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn lookup(&self, w: &[i8]) -> Option<VertexId> {
        self.index.get(w).copied()
    }

    /// Word length of the vertex, i.e. its distance from the identity.
    pub fn word_len(&self, v: VertexId) -> u32 {
        self.words[v as usize].len() as u32
    }

    /// Exact word metric |x^{-1} y|, independent of any BFS.
    pub fn word_dist(&self, x: VertexId, y: VertexId) -> u32 {
        reduce_concat(&invert(self.word(x)), self.word(y)).len() as u32
    }

    /// Left translation by `g` as a partial isometry; defined wherever the
    /// reduced product stays in the 2N-ball.
    pub fn translation(&self, g: &[i8]) -> Isometry {
        let map = self
            .words
            .iter()
            .map(|w| self.lookup(&reduce_concat(g, w)))
            .collect();
        Isometry::new(word_label(g), map).unwrap()
    }

    /// The vertex of generator^power (generator indices start at 1), as long
    /// as it stays in the ball.
    pub fn generator_power(&self, generator: u32, power: u32) -> Option<VertexId> {
        let w: Word = vec![generator as i8; power as usize];
        self.lookup(&w)
    }

    /// Vertices x with d(1, x) <= 2N - margin.
    pub fn safe_region(&self, margin: u32) -> Result<Vec<VertexId>, CayleyError> {
        let outer = self.outer_radius();
        if margin > outer {
            return Err(CayleyError::EmptyRegion {
                margin,
                radius: outer,
            });
        }
        let cap = outer - margin;
        Ok((0..self.n() as VertexId)
            .filter(|&v| self.word_len(v) <= cap)
            .collect())
    }

    /// Total isometries fixing the identity, induced by permutations and
    /// inversions of the generator letters: map each word letterwise.
    pub fn letter_autos(&self) -> Vec<Isometry> {
        type LetterMap = (String, Box<dyn Fn(i8) -> i8>);
        let mut autos = Vec::new();
        let mut letter_maps: Vec<LetterMap> = Vec::new();
        if self.rank >= 2 {
            letter_maps.push((
                "swap_ab".to_string(),
                Box::new(|l: i8| match l.unsigned_abs() {
                    1 => {
                        if l > 0 {
                            2
                        } else {
                            -2
                        }
                    }
                    2 => {
                        if l > 0 {
                            1
                        } else {
                            -1
                        }
                    }
                    _ => l,
                }),
            ));
        }
        letter_maps.push((
            "invert_a".to_string(),
            Box::new(|l: i8| if l.unsigned_abs() == 1 { -l } else { l }),
        ));
        for (name, f) in letter_maps {
            let map = self
                .words
                .iter()
                .map(|w| {
                    let image: Word = w.iter().map(|&l| f(l)).collect();
                    self.lookup(&image)
                })
                .collect();
            autos.push(Isometry::new(name, map).unwrap());
        }
        autos
    }
}

/// Outcome of verifying the identification (x, y) -> (x, x^{-1} y) of
/// distance-bounded pairs with B(1, N) x B(1, R).
#[derive(Debug, Clone, serde::Serialize)]
pub struct PairIdentReport {
    pub radius: u32,
    pub pairs: u64,
    pub expected: u64,
    pub injective: bool,
    pub surjective: bool,
    pub equivariant_samples: u64,
    pub failures: Vec<(VertexId, VertexId)>,
}

impl PairIdentReport {
    pub fn passed(&self) -> bool {
        self.injective && self.surjective && self.failures.is_empty() && self.pairs == self.expected
    }
}

/// Check that (x, y) -> (x, x^{-1} y) is a bijection from
/// {(x, y) : x in B(1, N), d(x, y) <= R} onto B(1, N) x B(1, R), and that
/// the second coordinate is invariant under left translation (sampled over
/// g). The second coordinate of a pair ranges over the ambient 2N-ball,
/// which holds the whole R-ball of every inner point.
pub fn pair_identification<M: Metric>(
    ball: &GroupBall,
    metric: &M,
    radius: u32,
) -> Result<PairIdentReport, CayleyError> {
    let n_rad = ball.inner_radius;
    if radius > n_rad {
        return Err(CayleyError::RadiusTooLarge(radius, n_rad));
    }
    let inner: Vec<VertexId> = (0..ball.n() as VertexId)
        .filter(|&v| ball.word_len(v) <= n_rad)
        .collect();
    let small: Vec<VertexId> = (0..ball.n() as VertexId)
        .filter(|&v| ball.word_len(v) <= radius)
        .collect();
    let mut failures = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut pairs = 0u64;
    for &x in &inner {
        let row = metric.row(x);
        for y in 0..ball.n() as VertexId {
            if (row[y as usize] as u32) > radius {
                continue;
            }
            pairs += 1;
            let quot = reduce_concat(&invert(ball.word(x)), ball.word(y));
            match ball.lookup(&quot) {
                Some(q) if ball.word_len(q) <= radius => {
                    if !seen.insert((x, q)) {
                        failures.push((x, y));
                    }
                }
                // x^{-1} y longer than R: the word metric and the BFS metric
                // disagree, which must not happen on inner pairs.
                _ => failures.push((x, y)),
            }
        }
    }
    let expected = inner.len() as u64 * small.len() as u64;
    let injective = failures.is_empty();
    let surjective = seen.len() as u64 == expected;
    // Equivariance: (g x, g y) -> (g x, x^{-1} y); sample translations g.
    let mut equivariant_samples = 0u64;
    for g_len in 1..=n_rad.min(2) {
        let g: Word = vec![1i8; g_len as usize];
        let t = ball.translation(&g);
        for &x in inner.iter().step_by(7) {
            for y in (0..ball.n() as VertexId).step_by(5) {
                if metric.dist(x, y) > radius {
                    continue;
                }
                let (Some(gx), Some(gy)) = (t.try_act(x), t.try_act(y)) else {
                    continue;
                };
                let before = reduce_concat(&invert(ball.word(x)), ball.word(y));
                let after = reduce_concat(&invert(ball.word(gx)), ball.word(gy));
                if before != after {
                    failures.push((x, y));
                } else {
                    equivariant_samples += 1;
                }
            }
        }
    }
    Ok(PairIdentReport {
        radius,
        pairs,
        expected,
        injective,
        surjective,
        equivariant_samples,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{Metric, MetricTable};

    #[test]
    fn rank1_ball_is_path() {
        let ball = free_group_ball(1, 3).unwrap();
        // Words a^-6 .. a^6.
        assert_eq!(ball.n(), 13);
        assert!(ball.graph.is_tree());
        assert_eq!(ball.graph.max_degree(), 2);
    }

    #[test]
    fn rank2_ball_counts() {
        let ball = free_group_ball(2, 2).unwrap();
        // 1 + 4 + 12 + 36 + 108
        assert_eq!(ball.n(), 161);
        assert!(ball.graph.is_tree());
        // Sphere sizes 4 * 3^(k-1).
        let m = MetricTable::from_graph(&ball.graph).unwrap();
        for k in 1..=4u32 {
            let count = crate::metric::sphere(&m, 0, k).len() as u32;
            assert_eq!(count, 4 * 3u32.pow(k - 1));
        }
    }

    #[test]
    fn word_length_is_distance() {
        let ball = free_group_ball(2, 2).unwrap();
        let v = ball.lookup(&[1, 2, -1]).unwrap(); // a b a^-1
        assert_eq!(ball.word_len(v), 3);
        let m = MetricTable::from_graph(&ball.graph).unwrap();
        assert_eq!(m.dist(0, v), 3);
        assert_eq!(ball.label(v), "abA");
    }

    #[test]
    fn inner_metric_matches_word_metric() {
        let ball = free_group_ball(2, 2).unwrap();
        let m = MetricTable::from_graph(&ball.graph).unwrap();
        let inner = ball.safe_region(2).unwrap();
        for &x in &inner {
            for &y in &inner {
                assert_eq!(m.dist(x, y), ball.word_dist(x, y), "x={x} y={y}");
            }
        }
    }

    #[test]
    fn translation_is_partial_isometry_on_safe_pairs() {
        let ball = free_group_ball(2, 2).unwrap();
        let m = MetricTable::from_graph(&ball.graph).unwrap();
        let t = ball.translation(&[1]);
        // e -> a, and left invariance d(e, b) = d(a, a b) = 1.
        let e = 0;
        let b = ball.lookup(&[2]).unwrap();
        assert_eq!(t.act(e).unwrap(), ball.lookup(&[1]).unwrap());
        assert_eq!(m.dist(t.act(e).unwrap(), t.act(b).unwrap()), m.dist(e, b));
        // Its domain excludes words ending deep on the boundary.
        assert!(!t.is_total());
    }

    #[test]
    fn safe_region_margins() {
        let ball = free_group_ball(2, 3).unwrap();
        let whole = ball.safe_region(0).unwrap();
        assert_eq!(whole.len(), ball.n());
        let b2 = ball.safe_region(4).unwrap();
        assert!(b2.iter().all(|&v| ball.word_len(v) <= 2));
        assert_eq!(b2.len(), 1 + 4 + 12);
        assert!(ball.safe_region(7).is_err());
    }

    #[test]
    fn size_limit_enforced() {
        assert!(matches!(
            free_group_ball(2, 9),
            Err(CayleyError::SizeLimit { .. })
        ));
    }

    #[test]
    fn pair_identification_r0_and_r1() {
        let ball = free_group_ball(2, 3).unwrap();
        let m = MetricTable::from_graph(&ball.graph).unwrap();
        let r0 = pair_identification(&ball, &m, 0).unwrap();
        assert!(r0.passed());
        assert_eq!(r0.pairs, (1 + 4 + 12 + 36) as u64);
        let r1 = pair_identification(&ball, &m, 1).unwrap();
        assert!(r1.passed());
        // |B(1,3)| * |B(1,1)| with |B(1,1)| = 5 in F2.
        assert_eq!(r1.expected, (1 + 4 + 12 + 36) as u64 * 5);
    }

    #[test]
    fn letter_autos_are_total_isometries() {
        let ball = free_group_ball(2, 2).unwrap();
        let m = MetricTable::from_graph(&ball.graph).unwrap();
        for auto in ball.letter_autos() {
            assert!(auto.is_total());
            crate::isometry::verify_isometry(&m, &auto).unwrap();
            assert_eq!(auto.act(0).unwrap(), 0);
        }
    }

    #[test]
    fn lazy_metric_agrees_with_dense_on_ball() {
        let ball = free_group_ball(2, 2).unwrap();
        let dense = MetricTable::from_graph(&ball.graph).unwrap();
        let lazy = crate::metric::LazyMetric::new(&ball.graph);
        for v in (0..ball.n() as u32).step_by(13) {
            for w in (0..ball.n() as u32).step_by(17) {
                assert_eq!(dense.dist(v, w), lazy.dist(v, w));
            }
        }
    }
}
