//! Bipartite intersection graphs of the pieces, the refinement operation,
//! tree testing with explicit cycle witnesses, and the dendrite verdict.
//!
//! White vertices are pieces (multiindices at a level), black vertices are
//! intersection points. Black vertices are named by a canonical identity —
//! the level-1 cluster they rescale from plus the prefix word applied to it
//! — so graphs at successive levels share a coherent naming scheme and a
//! refinement-built graph can be compared against a directly built one by
//! plain equality.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::intersection::{self, FiReport, FiVerdict};
use crate::sim::SimSystem;
use crate::word::Word;

/// Cap on white vertices of a directly built graph.
pub const DEFAULT_GRAPH_BUDGET: usize = 100_000;

/// Canonical identity of a black vertex: the level-1 cluster index
/// (into the deduplicated cluster list of the FI report) carried to a
/// deeper level by a prefix word.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct BlackId {
    pub prefix: Word,
    pub cluster: usize,
}

impl fmt::Display for BlackId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.prefix, self.cluster)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlackInfo {
    pub position: Complex64,
    pub radius: f64,
}

/// A bipartite intersection graph: pieces as white vertices, intersection
/// points as black vertices, an edge whenever the piece contains the point.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IntersectionGraph {
    whites: BTreeSet<Word>,
    blacks: BTreeMap<BlackId, BlackInfo>,
    edges: BTreeSet<(Word, BlackId)>,
}

/// Either side of the bipartition, as named vertices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Vertex {
    White(Word),
    Black(BlackId),
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Vertex::White(w) => write!(f, "K_{w}"),
            Vertex::Black(b) => write!(f, "p_{b}"),
        }
    }
}

/// Gluing target for one boundary black vertex during refinement.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum GlueTarget {
    /// The point falls strictly inside this template piece: the outer black
    /// vertex is kept and joined to that white by a new edge.
    White(Word),
    /// The point coincides with a black vertex of the template: the two are
    /// identified (the outer name survives).
    Black(BlackId),
}

impl IntersectionGraph {
    pub fn from_parts(
        whites: impl IntoIterator<Item = Word>,
        blacks: impl IntoIterator<Item = (BlackId, BlackInfo)>,
        edges: impl IntoIterator<Item = (Word, BlackId)>,
    ) -> Result<Self> {
        let g = IntersectionGraph {
            whites: whites.into_iter().collect(),
            blacks: blacks.into_iter().collect(),
            edges: edges.into_iter().collect(),
        };
        for (w, b) in &g.edges {
            if !g.whites.contains(w) || !g.blacks.contains_key(b) {
                return Err(Error::Domain(format!("edge ({w}, {b}) references a missing vertex")));
            }
        }
        Ok(g)
    }

    pub fn whites(&self) -> &BTreeSet<Word> {
        &self.whites
    }

    pub fn blacks(&self) -> &BTreeMap<BlackId, BlackInfo> {
        &self.blacks
    }

    pub fn edges(&self) -> &BTreeSet<(Word, BlackId)> {
        &self.edges
    }

    pub fn white_count(&self) -> usize {
        self.whites.len()
    }

    pub fn black_count(&self) -> usize {
        self.blacks.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn black_degree(&self, b: &BlackId) -> usize {
        self.edges.iter().filter(|(_, eb)| eb == b).count()
    }

    pub fn neighbors_of_white(&self, w: &Word) -> Vec<BlackId> {
        self.edges
            .iter()
            .filter(|(ew, _)| ew == w)
            .map(|(_, b)| b.clone())
            .collect()
    }

    pub fn neighbors_of_black(&self, b: &BlackId) -> Vec<Word> {
        self.edges
            .iter()
            .filter(|(_, eb)| eb == b)
            .map(|(w, _)| w.clone())
            .collect()
    }

    /// GraphViz DOT dump. Bit-exact contract: whites as boxes labeled by
    /// multiindex and ordered by word, then blacks as filled circles
    /// labeled `(x, y)` with six decimals and ordered by coordinate, then
    /// edges ordered by (word, coordinate). Node ids are `K_<word>` and
    /// `p_<prefix>#<cluster>`.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = String::new();
        out.push_str(&format!("graph {name} {{\n"));
        for w in &self.whites {
            out.push_str(&format!("  \"K_{w}\" [shape=box, label=\"{w}\"];\n"));
        }
        let mut blacks: Vec<(&BlackId, &BlackInfo)> = self.blacks.iter().collect();
        blacks.sort_by(|a, b| {
            (a.1.position.re, a.1.position.im, a.0)
                .partial_cmp(&(b.1.position.re, b.1.position.im, b.0))
                .expect("finite positions")
        });
        for (id, info) in &blacks {
            out.push_str(&format!(
                "  \"p_{id}\" [shape=circle, style=filled, label=\"({:.6}, {:.6})\"];\n",
                info.position.re, info.position.im
            ));
        }
        let mut edges: Vec<&(Word, BlackId)> = self.edges.iter().collect();
        edges.sort_by(|a, b| {
            let pa = self.blacks[&a.1].position;
            let pb = self.blacks[&b.1].position;
            (&a.0, pa.re, pa.im, &a.1)
                .partial_cmp(&(&b.0, pb.re, pb.im, &b.1))
                .expect("finite positions")
        });
        for (w, b) in edges {
            out.push_str(&format!("  \"K_{w}\" -- \"p_{b}\";\n"));
        }
        out.push_str("}\n");
        out
    }
}

/// Outcome of the tree test.
#[derive(Debug, Clone, PartialEq)]
pub enum TreeCheck {
    Tree,
    /// Shortest cycle found, as an alternating closed vertex list
    /// (the last vertex connects back to the first).
    NotTree(Vec<Vertex>),
    Disconnected,
}

impl TreeCheck {
    pub fn is_tree(&self) -> bool {
        matches!(self, TreeCheck::Tree)
    }
}

/// Connectivity plus `|E| = |V| - 1`; failures come with an explicit
/// shortest alternating cycle found by BFS.
pub fn is_tree(g: &IntersectionGraph) -> TreeCheck {
    let vertices: Vec<Vertex> = g
        .whites
        .iter()
        .cloned()
        .map(Vertex::White)
        .chain(g.blacks.keys().cloned().map(Vertex::Black))
        .collect();
    if vertices.is_empty() {
        return TreeCheck::Tree;
    }
    let index: HashMap<&Vertex, usize> = vertices.iter().zip(0..).collect();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); vertices.len()];
    for (w, b) in &g.edges {
        let (wi, bi) = (
            index[&Vertex::White(w.clone())],
            index[&Vertex::Black(b.clone())],
        );
        adj[wi].push(bi);
        adj[bi].push(wi);
    }
    for nbrs in &mut adj {
        nbrs.sort_unstable();
    }

    // connectivity
    let mut seen = vec![false; vertices.len()];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut reached = 1;
    while let Some(x) = queue.pop_front() {
        for &y in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                reached += 1;
                queue.push_back(y);
            }
        }
    }
    if reached < vertices.len() {
        return TreeCheck::Disconnected;
    }
    if g.edges.len() == vertices.len() - 1 {
        return TreeCheck::Tree;
    }

    // shortest cycle via BFS from every vertex
    let mut best: Option<Vec<usize>> = None;
    for start in 0..vertices.len() {
        if let Some(cycle) = shortest_cycle_through(start, &adj) {
            if best.as_ref().map_or(true, |b| cycle.len() < b.len()) {
                best = Some(cycle);
            }
        }
    }
    let cycle = best.expect("|E| > |V| - 1 and connected implies a cycle");
    // rotate so a white vertex leads
    let mut named: Vec<Vertex> = cycle.into_iter().map(|i| vertices[i].clone()).collect();
    if let Some(pos) = named.iter().position(|v| matches!(v, Vertex::White(_))) {
        named.rotate_left(pos);
    }
    TreeCheck::NotTree(named)
}

fn shortest_cycle_through(start: usize, adj: &[Vec<usize>]) -> Option<Vec<usize>> {
    let n = adj.len();
    let mut parent = vec![usize::MAX; n];
    let mut depth = vec![usize::MAX; n];
    depth[start] = 0;
    let mut queue = VecDeque::from([start]);
    while let Some(x) = queue.pop_front() {
        for &y in &adj[x] {
            if depth[y] == usize::MAX {
                depth[y] = depth[x] + 1;
                parent[y] = x;
                queue.push_back(y);
            } else if parent[x] != y && depth[y] >= depth[x] {
                // cross edge closing a cycle through the BFS tree
                let mut left = vec![x];
                let mut right = vec![y];
                let (mut a, mut b) = (x, y);
                while depth[a] > depth[b] {
                    a = parent[a];
                    left.push(a);
                }
                while depth[b] > depth[a] {
                    b = parent[b];
                    right.push(b);
                }
                while a != b {
                    a = parent[a];
                    b = parent[b];
                    left.push(a);
                    right.push(b);
                }
                right.pop();
                right.reverse();
                left.extend(right);
                return Some(left);
            }
        }
    }
    None
}

/// Build the level-`n` intersection graph. Black vertices are the level-1
/// clusters rescaled through every prefix word of length below `n`; an
/// edge is drawn whenever the piece's certified expansion still meets the
/// cluster disk at the disk's own scale.
pub fn build_graph(system: &SimSystem, n: usize, fi: &FiReport) -> Result<IntersectionGraph> {
    build_graph_with_budget(system, n, fi, DEFAULT_GRAPH_BUDGET)
}

pub fn build_graph_with_budget(
    system: &SimSystem,
    n: usize,
    fi: &FiReport,
    budget: usize,
) -> Result<IntersectionGraph> {
    if n == 0 {
        return Err(Error::Domain("graph level must be at least 1".into()));
    }
    if !fi.is_usable() {
        return Err(Error::Domain(
            "intersection graph needs an FI-certified or FI-likely system".into(),
        ));
    }
    let m = system.len();
    if m.checked_pow(n as u32).map_or(true, |count| count > budget) {
        return Err(Error::Resource {
            what: "graph white vertices",
            used: budget,
            achieved: n as f64,
        });
    }

    let base = fi.merged_clusters();
    let whites = words_of_length(system, n);

    let mut blacks: BTreeMap<BlackId, BlackInfo> = BTreeMap::new();
    for k in 0..n {
        for prefix in words_of_length(system, k) {
            let map = system.compose(&prefix)?;
            for (ci, cluster) in base.iter().enumerate() {
                blacks.insert(
                    BlackId {
                        prefix: prefix.clone(),
                        cluster: ci,
                    },
                    BlackInfo {
                        position: map.apply(cluster.center),
                        radius: map.ratio() * cluster.radius,
                    },
                );
            }
        }
    }
    merge_coincident_blacks(&mut blacks);

    let mut edges = BTreeSet::new();
    for (id, info) in &blacks {
        let mut degree = 0usize;
        for white in whites.iter().filter(|w| id.prefix.is_prefix_of(w)) {
            let resolution = info.radius.max(1e-12);
            if intersection::piece_meets_disk(system, white, info.position, info.radius, resolution)? {
                edges.insert((white.clone(), id.clone()));
                degree += 1;
            }
        }
        if degree < 2 {
            return Err(Error::Inconclusive(format!(
                "black vertex {id} has degree {degree}; cluster data too coarse for level {n}"
            )));
        }
    }

    Ok(IntersectionGraph {
        whites: whites.into_iter().collect(),
        blacks,
        edges,
    })
}

/// Distinct `(prefix, cluster)` identities can land on the same geometric
/// point when a critical point is also a deeper image of another one.
/// Keep the lexicographically smallest identity of each overlap group.
fn merge_coincident_blacks(blacks: &mut BTreeMap<BlackId, BlackInfo>) {
    let ids: Vec<BlackId> = blacks.keys().cloned().collect();
    let mut dropped: BTreeSet<BlackId> = BTreeSet::new();
    for i in 0..ids.len() {
        if dropped.contains(&ids[i]) {
            continue;
        }
        let a = blacks[&ids[i]];
        for j in (i + 1)..ids.len() {
            if dropped.contains(&ids[j]) {
                continue;
            }
            let b = blacks[&ids[j]];
            if (a.position - b.position).norm() <= a.radius + b.radius {
                dropped.insert(ids[j].clone());
            }
        }
    }
    for id in dropped {
        blacks.remove(&id);
    }
}

pub fn words_of_length(system: &SimSystem, len: usize) -> Vec<Word> {
    let m = system.len() as u8;
    let mut words = vec![Word::empty()];
    for _ in 0..len {
        let mut next = Vec::with_capacity(words.len() * m as usize);
        for w in &words {
            for letter in 1..=m {
                next.push(w.child(letter));
            }
        }
        words = next;
    }
    words
}

/// The level-1 graph of the subtree below `prefix`, relabeled into the
/// global naming scheme: whites `prefix·i`, blacks `(prefix, cluster)`.
/// This is the natural template for refining the white vertex `prefix`.
pub fn level_one_template(
    system: &SimSystem,
    fi: &FiReport,
    prefix: &Word,
) -> Result<IntersectionGraph> {
    let base = fi.merged_clusters();
    let map = system.compose(prefix)?;
    let whites: Vec<Word> = (1..=system.len() as u8).map(|l| prefix.child(l)).collect();
    let mut blacks = BTreeMap::new();
    let mut edges = BTreeSet::new();
    for (ci, cluster) in base.iter().enumerate() {
        let id = BlackId {
            prefix: prefix.clone(),
            cluster: ci,
        };
        let info = BlackInfo {
            position: map.apply(cluster.center),
            radius: map.ratio() * cluster.radius,
        };
        for white in &whites {
            let resolution = info.radius.max(1e-12);
            if intersection::piece_meets_disk(system, white, info.position, info.radius, resolution)? {
                edges.insert((white.clone(), id.clone()));
            }
        }
        blacks.insert(id, info);
    }
    Ok(IntersectionGraph {
        whites: whites.into_iter().collect(),
        blacks,
        edges,
    })
}

/// Replace the white vertex `l` by a refinement template.
///
/// Deletes `l`'s star, inserts the template, then reattaches every former
/// black neighbor of `l` according to the gluing: glued to a template
/// black, the two points are identified under the outer name; glued to a
/// template white, the outer black gains an edge into that piece. The
/// gluing must cover every neighbor of `l` and be injective.
pub fn refine_graph(
    g: &IntersectionGraph,
    l: &Word,
    template: &IntersectionGraph,
    gluing: &BTreeMap<BlackId, GlueTarget>,
) -> Result<IntersectionGraph> {
    if !g.whites.contains(l) {
        return Err(Error::Domain(format!("refine target {l} is not a white vertex")));
    }
    let boundary = g.neighbors_of_white(l);
    for p in &boundary {
        if !gluing.contains_key(p) {
            return Err(Error::Domain(format!("gluing misses boundary point {p}")));
        }
    }
    let mut seen_targets = BTreeSet::new();
    for (p, target) in gluing {
        if !seen_targets.insert(target.clone()) {
            return Err(Error::GluingNotInjective(match target {
                GlueTarget::White(w) => w.clone(),
                GlueTarget::Black(b) => b.prefix.clone(),
            }));
        }
        match target {
            GlueTarget::White(w) if !template.whites.contains(w) => {
                return Err(Error::Domain(format!("gluing of {p} targets missing white {w}")))
            }
            GlueTarget::Black(b) if !template.blacks.contains_key(b) => {
                return Err(Error::Domain(format!("gluing of {p} targets missing black {b}")))
            }
            _ => {}
        }
    }

    let mut whites = g.whites.clone();
    whites.remove(l);
    for w in &template.whites {
        if !whites.insert(w.clone()) {
            return Err(Error::Domain(format!("template white {w} collides with host")));
        }
    }

    let mut blacks = g.blacks.clone();
    let mut edges: BTreeSet<(Word, BlackId)> = g
        .edges
        .iter()
        .filter(|(w, _)| w != l)
        .cloned()
        .collect();

    // identified template blacks are renamed to the outer vertex they glue to
    let mut rename: BTreeMap<&BlackId, &BlackId> = BTreeMap::new();
    for (p, target) in gluing {
        if let GlueTarget::Black(b) = target {
            rename.insert(b, p);
        }
    }
    for (id, info) in &template.blacks {
        if !rename.contains_key(id) {
            if blacks.insert(id.clone(), *info).is_some() {
                return Err(Error::Domain(format!("template black {id} collides with host")));
            }
        }
    }
    for (w, b) in &template.edges {
        let b = rename.get(b).map(|&r| r.clone()).unwrap_or_else(|| b.clone());
        edges.insert((w.clone(), b));
    }
    for (p, target) in gluing {
        if !boundary.contains(p) {
            continue;
        }
        if let GlueTarget::White(w) = target {
            edges.insert((w.clone(), p.clone()));
        }
    }

    Ok(IntersectionGraph {
        whites,
        blacks,
        edges,
    })
}

/// Compute the natural gluing for refining white `l` of a level-`n` graph
/// with its level-1 template: each boundary black of `l` is pulled back by
/// `S_l⁻¹` and matched against the level-1 clusters, falling back to the
/// unique first-level piece containing it.
pub fn natural_gluing(
    system: &SimSystem,
    fi: &FiReport,
    g: &IntersectionGraph,
    l: &Word,
) -> Result<BTreeMap<BlackId, GlueTarget>> {
    let base = fi.merged_clusters();
    let inverse = system.compose(l)?.inverse();
    let scale = inverse.ratio();
    let mut gluing = BTreeMap::new();
    for p in g.neighbors_of_white(l) {
        let info = g.blacks[&p];
        let q = inverse.apply(info.position);
        let q_radius = scale * info.radius;
        let mut target = None;
        for (ci, cluster) in base.iter().enumerate() {
            if (q - cluster.center).norm() <= 2.0 * (cluster.radius + q_radius) {
                target = Some(GlueTarget::Black(BlackId {
                    prefix: l.clone(),
                    cluster: ci,
                }));
                break;
            }
        }
        if target.is_none() {
            let resolution = q_radius.max(1e-12);
            let mut containing = Vec::new();
            for letter in 1..=system.len() as u8 {
                let word = Word::from_letters(vec![letter])?;
                if intersection::piece_meets_disk(system, &word, q, q_radius, resolution)? {
                    containing.push(l.child(letter));
                }
            }
            match containing.len() {
                1 => target = Some(GlueTarget::White(containing.pop().expect("len checked"))),
                0 => {
                    return Err(Error::Inconclusive(format!(
                        "boundary point {p} of {l} pulled back outside every piece"
                    )))
                }
                _ => {
                    return Err(Error::Inconclusive(format!(
                        "boundary point {p} of {l} pulled back onto an undeclared critical point"
                    )))
                }
            }
        }
        gluing.insert(p, target.expect("set above"));
    }
    Ok(gluing)
}

/// Outcome of the dendrite criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DendriteOutcome {
    Dendrite,
    NotDendrite,
    Inconclusive,
}

/// Witness attached to a negative or inconclusive verdict.
#[derive(Debug, Clone, PartialEq)]
pub enum DendriteWitness {
    /// A cycle in Γ_level, alternating pieces and points.
    Cycle { level: usize, vertices: Vec<Vertex> },
    /// The FI hypothesis of the criterion failed for this pair.
    FiFailure { pair: (u8, u8), details: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DendriteVerdict {
    pub outcome: DendriteOutcome,
    pub witness: Option<DendriteWitness>,
    /// Levels whose intersection graphs were actually built and tested.
    pub checked_levels: usize,
    pub note: Option<String>,
}

/// Decide the dendrite criterion: with a certified FI report, the attractor
/// is a dendrite exactly when Γ₁ is a tree. Levels up to `max_level` are
/// verified as a sanity suite (tree-ness propagates level to level, so a
/// deep cycle on a tree Γ₁ would flag an internal inconsistency). A cycle
/// under a merely likely FI report is not trusted as a witness.
pub fn dendrite_verdict(system: &SimSystem, max_level: usize, tol: f64) -> Result<DendriteVerdict> {
    let fi = intersection::fi_report(system, tol)?;
    dendrite_verdict_with_fi(system, max_level, &fi)
}

pub fn dendrite_verdict_with_fi(
    system: &SimSystem,
    max_level: usize,
    fi: &FiReport,
) -> Result<DendriteVerdict> {
    if let FiVerdict::NotFi { pair, details } = &fi.verdict {
        return Ok(DendriteVerdict {
            outcome: DendriteOutcome::Inconclusive,
            witness: Some(DendriteWitness::FiFailure {
                pair: *pair,
                details: details.clone(),
            }),
            checked_levels: 0,
            note: Some("pieces overlap in a continuum; the criterion does not apply".into()),
        });
    }
    let certified = matches!(fi.verdict, FiVerdict::Certified { .. });
    let mut checked = 0usize;
    for level in 1..=max_level.max(1) {
        let graph = match build_graph(system, level, fi) {
            Ok(g) => g,
            Err(Error::Resource { .. }) if checked > 0 => break,
            Err(Error::Resource { what, used, achieved }) => {
                return Ok(DendriteVerdict {
                    outcome: DendriteOutcome::Inconclusive,
                    witness: None,
                    checked_levels: 0,
                    note: Some(format!("resource limit before level 1: {what} {used} ({achieved})")),
                })
            }
            Err(e) => return Err(e),
        };
        checked = level;
        match is_tree(&graph) {
            TreeCheck::Tree => {}
            TreeCheck::Disconnected => {
                return Ok(DendriteVerdict {
                    outcome: DendriteOutcome::Inconclusive,
                    witness: None,
                    checked_levels: checked,
                    note: Some("attractor disconnected: intersection graph splits".into()),
                });
            }
            TreeCheck::NotTree(cycle) => {
                if certified {
                    return Ok(DendriteVerdict {
                        outcome: DendriteOutcome::NotDendrite,
                        witness: Some(DendriteWitness::Cycle {
                            level,
                            vertices: cycle,
                        }),
                        checked_levels: checked,
                        note: None,
                    });
                }
                return Ok(DendriteVerdict {
                    outcome: DendriteOutcome::Inconclusive,
                    witness: Some(DendriteWitness::Cycle {
                        level,
                        vertices: cycle,
                    }),
                    checked_levels: checked,
                    note: Some("cycle found but FI report is only likely; not certified".into()),
                });
            }
        }
    }
    if certified {
        Ok(DendriteVerdict {
            outcome: DendriteOutcome::Dendrite,
            witness: None,
            checked_levels: checked,
            note: None,
        })
    } else {
        Ok(DendriteVerdict {
            outcome: DendriteOutcome::Inconclusive,
            witness: None,
            checked_levels: checked,
            note: Some("all checked graphs are trees but FI is only likely".into()),
        })
    }
}

/// Render a cycle witness as its own DOT graph (same vertex contract as
/// [`IntersectionGraph::to_dot`], cycle edges only).
pub fn cycle_to_dot(g: &IntersectionGraph, cycle: &[Vertex]) -> String {
    let mut out = String::new();
    out.push_str("graph cycle_witness {\n");
    for v in cycle {
        match v {
            Vertex::White(w) => {
                out.push_str(&format!("  \"K_{w}\" [shape=box, label=\"{w}\"];\n"));
            }
            Vertex::Black(b) => {
                let info = &g.blacks()[b];
                out.push_str(&format!(
                    "  \"p_{b}\" [shape=circle, style=filled, label=\"({:.6}, {:.6})\"];\n",
                    info.position.re, info.position.im
                ));
            }
        }
    }
    for k in 0..cycle.len() {
        let a = &cycle[k];
        let b = &cycle[(k + 1) % cycle.len()];
        out.push_str(&format!("  \"{a}\" -- \"{b}\";\n"));
    }
    out.push_str("}\n");
    out
}
