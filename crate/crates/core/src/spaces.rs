//! Built-in example spaces with their symmetries: lines, ladders, cycles,
//! regular tree balls, edge subdivision, and a seeded sampler for
//! automorphisms of arbitrary finite trees.

use std::collections::HashMap;

use crate::graph::{FiniteGraph, VertexId};
use crate::isometry::Isometry;
use crate::util::SplitMix64;

/// A named graph together with the symmetries the tests exercise.
/// Translations on windows are only partially defined.
pub struct BuiltinSpace {
    pub name: String,
    pub graph: FiniteGraph,
    pub total_autos: Vec<Isometry>,
    pub partial_autos: Vec<Isometry>,
}

/// Path with v = 0..=len, plus its reflection.
pub fn line(len: u32) -> BuiltinSpace {
    assert!(len >= 1);
    let edges: Vec<(u32, u32)> = (0..len).map(|i| (i, i + 1)).collect();
    let graph = FiniteGraph::build(&edges).unwrap();
    let reflect = Isometry::total("reflect", (0..=len).rev().collect()).unwrap();
    let mut partial_autos = Vec::new();
    for k in 1..=(len / 2).min(3) {
        partial_autos.push(line_translation(len, k));
    }
    BuiltinSpace {
        name: format!("line({len})"),
        graph,
        total_autos: vec![reflect],
        partial_autos,
    }
}

/// Partial shift i -> i + k on the window [0, len].
pub fn line_translation(len: u32, k: u32) -> Isometry {
    let map = (0..=len).map(|i| (i + k <= len).then_some(i + k)).collect();
    Isometry::new(format!("shift_{k}"), map).unwrap()
}

/// The ladder on columns 0..=len: vertex (i, side) has id 2 i + side, rungs
/// join the two sides of a column, rails join adjacent columns.
pub fn ladder(len: u32) -> BuiltinSpace {
    assert!(len >= 1);
    let mut edges = Vec::new();
    for i in 0..=len {
        edges.push((2 * i, 2 * i + 1));
        if i < len {
            edges.push((2 * i, 2 * (i + 1)));
            edges.push((2 * i + 1, 2 * (i + 1) + 1));
        }
    }
    let graph = FiniteGraph::build(&edges).unwrap();
    let n = 2 * (len + 1);
    let flip = Isometry::total("flip", (0..n).map(|v| v ^ 1).collect()).unwrap();
    let reflect = Isometry::total(
        "reflect",
        (0..n).map(|v| 2 * (len - v / 2) + (v & 1)).collect(),
    )
    .unwrap();
    let both = Isometry::compose(&flip, &reflect);
    let mut partial_autos = Vec::new();
    for k in 1..=(len / 2).min(4) {
        partial_autos.push(ladder_translation(len, k));
    }
    BuiltinSpace {
        name: format!("ladder({len})"),
        graph,
        total_autos: vec![flip, reflect, both],
        partial_autos,
    }
}

/// Partial column shift (i, side) -> (i + k, side) on the ladder window.
pub fn ladder_translation(len: u32, k: u32) -> Isometry {
    let map = (0..2 * (len + 1))
        .map(|v| {
            let (i, side) = (v / 2, v & 1);
            (i + k <= len).then_some(2 * (i + k) + side)
        })
        .collect();
    Isometry::new(format!("shift_{k}"), map).unwrap()
}

/// Cycle C_n with its rotation and a reflection.
pub fn cycle(n: u32) -> BuiltinSpace {
    assert!(n >= 3);
    let edges: Vec<(u32, u32)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    let graph = FiniteGraph::build(&edges).unwrap();
    let rotate = Isometry::total("rot", (0..n).map(|i| (i + 1) % n).collect()).unwrap();
    let reflect = Isometry::total("reflect", (0..n).map(|i| (n - i) % n).collect()).unwrap();
    BuiltinSpace {
        name: format!("cycle({n})"),
        graph,
        total_autos: vec![rotate, reflect],
        partial_autos: Vec::new(),
    }
}

/// Ball of radius `r` in the q-regular tree, rooted at vertex 0. Interior
/// vertices have degree q; vertices at depth r are leaves.
pub fn regular_tree(q: u32, r: u32) -> BuiltinSpace {
    assert!(q >= 2 && r >= 1);
    let mut edges = Vec::new();
    let mut next = 1u32;
    let mut frontier = vec![0u32];
    for depth in 0..r {
        let mut nf = Vec::new();
        for &v in &frontier {
            let children = if depth == 0 { q } else { q - 1 };
            for _ in 0..children {
                edges.push((v, next));
                nf.push(next);
                next += 1;
            }
        }
        frontier = nf;
    }
    let graph = FiniteGraph::build(&edges).unwrap();
    // One explicit generator: swap the first two root branches.
    let rooted = RootedTree::new(&graph, 0);
    let swap = swap_root_branches(&graph, &rooted);
    BuiltinSpace {
        name: format!("tree({q},{r})"),
        graph,
        total_autos: vec![swap],
        partial_autos: Vec::new(),
    }
}

/// Replace every edge by a path with `parts` edges.
pub fn subdivide(g: &FiniteGraph, parts: u32) -> FiniteGraph {
    assert!(parts >= 1);
    let mut edges = Vec::new();
    let mut next = g.n() as u32;
    for (u, v) in g.edges() {
        if parts == 1 {
            edges.push((u, v));
            continue;
        }
        let mut prev = u;
        for _ in 0..parts - 1 {
            edges.push((prev, next));
            prev = next;
            next += 1;
        }
        edges.push((prev, v));
    }
    FiniteGraph::from_parts(next as usize, &edges).unwrap()
}

/// Parent/children structure of a tree rooted at `root`.
pub struct RootedTree {
    pub root: VertexId,
    pub parent: Vec<Option<VertexId>>,
    pub children: Vec<Vec<VertexId>>,
    pub order: Vec<VertexId>, // BFS order from the root
}

impl RootedTree {
    pub fn new(g: &FiniteGraph, root: VertexId) -> Self {
        assert!(g.is_tree(), "rooted structure requires a tree");
        let n = g.n();
        let mut parent = vec![None; n];
        let mut children = vec![Vec::new(); n];
        let mut order = Vec::with_capacity(n);
        let mut seen = vec![false; n];
        let mut queue = std::collections::VecDeque::new();
        seen[root as usize] = true;
        queue.push_back(root);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &v in g.neighbors(u) {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    parent[v as usize] = Some(u);
                    children[u as usize].push(v);
                    queue.push_back(v);
                }
            }
        }
        RootedTree {
            root,
            parent,
            children,
            order,
        }
    }
}

/// AHU canonical codes: two subtrees get equal codes iff they are
/// isomorphic as rooted trees.
pub fn subtree_codes(rt: &RootedTree) -> Vec<u64> {
    let n = rt.parent.len();
    let mut codes = vec![0u64; n];
    let mut interner: HashMap<Vec<u64>, u64> = HashMap::new();
    for &v in rt.order.iter().rev() {
        let mut child_codes: Vec<u64> = rt.children[v as usize]
            .iter()
            .map(|&c| codes[c as usize])
            .collect();
        child_codes.sort_unstable();
        let next_id = interner.len() as u64;
        codes[v as usize] = *interner.entry(child_codes).or_insert(next_id);
    }
    codes
}

/// Swap the first two isomorphic branches below the root, as a total
/// automorphism. Falls back to the identity when no two root branches are
/// isomorphic.
fn swap_root_branches(g: &FiniteGraph, rt: &RootedTree) -> Isometry {
    let codes = subtree_codes(rt);
    let kids = &rt.children[rt.root as usize];
    for i in 0..kids.len() {
        for j in i + 1..kids.len() {
            if codes[kids[i] as usize] == codes[kids[j] as usize] {
                let mut perm: Vec<VertexId> = (0..g.n() as VertexId).collect();
                map_subtree(
                    rt,
                    kids[i],
                    kids[j],
                    &codes,
                    &mut perm,
                    &mut SplitMix64::new(0),
                );
                map_subtree(
                    rt,
                    kids[j],
                    kids[i],
                    &codes,
                    &mut perm,
                    &mut SplitMix64::new(0),
                );
                return Isometry::total("branch_swap", perm).unwrap();
            }
        }
    }
    Isometry::identity(g.n())
}

/// Map the subtree at `src` onto the isomorphic subtree at `dst`,
/// matching children by canonical code (shuffled within classes).
fn map_subtree(
    rt: &RootedTree,
    src: VertexId,
    dst: VertexId,
    codes: &[u64],
    perm: &mut [VertexId],
    rng: &mut SplitMix64,
) {
    perm[src as usize] = dst;
    let mut dst_kids: Vec<VertexId> = rt.children[dst as usize].clone();
    // Group destination children by code, shuffle within groups.
    let mut by_code: HashMap<u64, Vec<VertexId>> = HashMap::new();
    rng.shuffle(&mut dst_kids);
    for &c in &dst_kids {
        by_code.entry(codes[c as usize]).or_default().push(c);
    }
    for &sc in &rt.children[src as usize] {
        let bucket = by_code
            .get_mut(&codes[sc as usize])
            .expect("isomorphic subtrees must have matching child codes");
        let target = bucket.pop().expect("child class sizes must agree");
        map_subtree(rt, sc, target, codes, perm, rng);
    }
}

/// Seeded uniform-ish automorphism of a finite tree: at every vertex the
/// children are permuted within their isomorphism classes.
pub fn sample_tree_automorphism(g: &FiniteGraph, rt: &RootedTree, seed: u64) -> Isometry {
    let codes = subtree_codes(rt);
    let mut rng = SplitMix64::new(seed);
    let mut perm: Vec<VertexId> = vec![0; g.n()];
    map_subtree(rt, rt.root, rt.root, &codes, &mut perm, &mut rng);
    Isometry::total(format!("tree_auto_{seed}"), perm).unwrap()
}
