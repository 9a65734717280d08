//! Certified detection of piece intersections.
//!
//! The engine refines pairs of incomparable multiindices breadth-first,
//! always splitting the larger piece, and prunes a pair as soon as the two
//! bounding disks are separated by a positive gap (with outward rounding,
//! so "pruned" certifies disjointness). Survivors at the target tolerance
//! are merged into clusters by disk overlap; cluster survival is only ever
//! an over-approximation, so verdicts err toward the inconclusive side and
//! never toward a false certificate.

use std::collections::{BTreeMap, HashMap, VecDeque};

use num_complex::Complex64;
use serde::Serialize;

use crate::attractor::{bounding_disk, BoundingDisk};
use crate::error::{Error, Result};
use crate::sim::{SimSystem, Similarity};
use crate::word::{word_relation, Address, Word, WordRelation};

/// Default cap on visited pairs for one expansion.
pub const DEFAULT_PAIR_BUDGET: usize = 1_000_000;

/// Componentwise tolerance for recurrence of relative similarities.
/// FI systems have no exact overlaps, so a recurrence of the relative map
/// within this tolerance signals a genuine periodic contact.
pub const RECURRENCE_TOL: f64 = 1e-9;

/// One step of the surviving pair chain: the two words and the relative
/// similarity `S_u⁻¹ ∘ S_v` at that step.
#[derive(Debug, Clone)]
pub struct ChainLink {
    pub u: Word,
    pub v: Word,
    pub relative: Similarity,
}

/// A certified approximate intersection point of two incomparable pieces.
///
/// The part of the true intersection locus tracked by this cluster lies in
/// `B(center, radius)`. `witness_pairs` are the surviving incomparable
/// pairs whose pieces both meet the cluster; `chains` retain the ancestor
/// chain of one deepest witness per contributing pair run, which is what
/// periodicity detection inspects.
#[derive(Debug, Clone)]
pub struct IntersectionCluster {
    pub center: Complex64,
    pub radius: f64,
    pub witness_pairs: Vec<(Word, Word)>,
    pub address_pair: Option<(Address, Address)>,
    pub(crate) chains: Vec<Vec<ChainLink>>,
}

/// Verdict of a finite-intersection analysis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum FiVerdict {
    /// Cluster counts stabilized across the last two tolerance decades and
    /// radii shrank proportionally.
    Certified { s: usize },
    /// Expansion finished but the stabilization evidence is incomplete.
    Likely { s: usize },
    /// A pair shows the continuum-overlap signature: survivor extent does
    /// not shrink while counts keep growing.
    NotFi { pair: (u8, u8), details: String },
}

/// Full per-pair intersection analysis of the first-level pieces.
#[derive(Debug, Clone)]
pub struct FiReport {
    pub verdict: FiVerdict,
    /// max cluster count over pairs (0 when all pieces are disjoint).
    pub s: usize,
    pub clusters: BTreeMap<(u8, u8), Vec<IntersectionCluster>>,
    /// Pairs whose expansion ran out of budget without a continuum
    /// signature, with the achieved tolerance.
    pub inconclusive_pairs: Vec<((u8, u8), f64)>,
}

impl FiReport {
    pub fn is_usable(&self) -> bool {
        !matches!(self.verdict, FiVerdict::NotFi { .. })
    }

    /// All clusters across pairs, geometrically deduplicated (a point where
    /// three or more pieces meet shows up in several pair runs) and sorted
    /// by position.
    pub fn merged_clusters(&self) -> Vec<IntersectionCluster> {
        let all: Vec<IntersectionCluster> = self
            .clusters
            .values()
            .flat_map(|v| v.iter().cloned())
            .collect();
        merge_overlapping(all)
    }
}

#[derive(Debug, Clone, Copy)]
struct LevelStat {
    count: usize,
    max_diam: f64,
    min: Complex64,
    max: Complex64,
}

impl LevelStat {
    fn new() -> Self {
        LevelStat {
            count: 0,
            max_diam: 0.0,
            min: Complex64::new(f64::INFINITY, f64::INFINITY),
            max: Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    fn absorb(&mut self, midpoint: Complex64, diam: f64) {
        self.count += 1;
        self.max_diam = self.max_diam.max(diam);
        self.min = Complex64::new(self.min.re.min(midpoint.re), self.min.im.min(midpoint.im));
        self.max = Complex64::new(self.max.re.max(midpoint.re), self.max.im.max(midpoint.im));
    }

    fn extent(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.max - self.min).norm()
        }
    }
}

/// Why an expansion could not finish within budget.
#[derive(Debug, Clone)]
pub(crate) struct Overflow {
    pub visited: usize,
    pub achieved_tol: f64,
    levels: Vec<LevelStat>,
}

impl Overflow {
    /// The continuum-overlap signature: over the last completed depth
    /// window, survivor counts keep growing geometrically while their
    /// spatial extent stays an order of magnitude above the piece scale.
    pub fn continuum_signature(&self) -> bool {
        let complete: Vec<&LevelStat> = self
            .levels
            .iter()
            .take(self.levels.len().saturating_sub(1)) // last level may be partial
            .filter(|l| l.count > 0)
            .collect();
        if complete.len() < 6 {
            return false;
        }
        let window = &complete[complete.len() - 4..];
        let first = window[0];
        let last = window[window.len() - 1];
        last.count >= 100
            && last.count as f64 >= 1.5 * first.count as f64
            && window.windows(2).all(|w| w[1].count >= w[0].count)
            && last.extent() >= 10.0 * last.max_diam
            && last.extent() >= 0.5 * first.extent()
    }

    fn to_error(&self) -> Error {
        Error::Resource {
            what: "pair expansion",
            used: self.visited,
            achieved: self.achieved_tol,
        }
    }
}

struct Node {
    parent: u32,
    /// Letter appended by this node and the side it extended.
    letter: u8,
    extended_v: bool,
    u_map: Similarity,
    relative: Similarity,
}

const ROOT: u32 = u32::MAX;

struct Expansion<'a> {
    system: &'a SimSystem,
    disk: BoundingDisk,
    nodes: Vec<Node>,
    u0: Word,
    v0: Word,
}

impl<'a> Expansion<'a> {
    fn diams(&self, node: &Node) -> (f64, f64) {
        let ru = node.u_map.ratio();
        let rv = ru * node.relative.ratio();
        (2.0 * ru * self.disk.radius, 2.0 * rv * self.disk.radius)
    }

    fn disks(&self, node: &Node) -> (Complex64, f64, Complex64, f64) {
        let cu = node.u_map.apply(self.disk.center);
        let cv = node.u_map.apply(node.relative.apply(self.disk.center));
        let ru = node.u_map.ratio() * self.disk.radius;
        let rv = ru * node.relative.ratio();
        (cu, ru, cv, rv)
    }

    fn words(&self, mut idx: u32) -> (Word, Word) {
        let mut u_suffix = Vec::new();
        let mut v_suffix = Vec::new();
        while idx != ROOT {
            let node = &self.nodes[idx as usize];
            if node.letter != 0 {
                if node.extended_v {
                    v_suffix.push(node.letter);
                } else {
                    u_suffix.push(node.letter);
                }
            }
            idx = node.parent;
        }
        u_suffix.reverse();
        v_suffix.reverse();
        let mut u = self.u0.clone();
        let mut v = self.v0.clone();
        for l in u_suffix {
            u.push(l);
        }
        for l in v_suffix {
            v.push(l);
        }
        (u, v)
    }

    fn chain(&self, mut idx: u32) -> Vec<ChainLink> {
        let mut indices = Vec::new();
        while idx != ROOT {
            indices.push(idx);
            idx = self.nodes[idx as usize].parent;
        }
        indices.reverse();
        let mut links = Vec::with_capacity(indices.len());
        for i in indices {
            let (u, v) = self.words(i);
            links.push(ChainLink {
                u,
                v,
                relative: self.nodes[i as usize].relative,
            });
        }
        links
    }
}

/// Separation test with outward rounding: a positive return certifies the
/// two disks (hence the pieces inside them) are disjoint.
fn certified_gap(c1: Complex64, r1: f64, c2: Complex64, r2: f64) -> f64 {
    let margin = 64.0 * f64::EPSILON * (c1.norm() + c2.norm() + r1 + r2 + 1.0);
    (c1 - c2).norm() - r1 - r2 - margin
}

pub(crate) fn expand_pairs(
    system: &SimSystem,
    u0: &Word,
    v0: &Word,
    tol: f64,
    budget: usize,
) -> std::result::Result<Result<Vec<IntersectionCluster>>, Overflow> {
    match prepare(system, u0, v0, tol) {
        Ok(None) => return Ok(Ok(Vec::new())),
        Ok(Some(_)) => {}
        Err(e) => return Ok(Err(e)),
    }
    let disk = bounding_disk(system);
    let u_map = system.compose(u0).expect("validated");
    let v_map = system.compose(v0).expect("validated");
    let relative = u_map.inverse().compose(&v_map);

    let mut exp = Expansion {
        system,
        disk,
        nodes: vec![Node {
            parent: ROOT,
            letter: 0,
            extended_v: false,
            u_map,
            relative,
        }],
        u0: u0.clone(),
        v0: v0.clone(),
    };
    let mut levels: Vec<LevelStat> = vec![LevelStat::new()];
    let mut queue: VecDeque<(u32, u32)> = VecDeque::new(); // (node index, depth)
    let mut survivors: Vec<u32> = Vec::new();

    {
        let root = &exp.nodes[0];
        let (cu, ru, cv, rv) = exp.disks(root);
        if certified_gap(cu, ru, cv, rv) > 0.0 {
            return Ok(Ok(Vec::new()));
        }
        let (du, dv) = exp.diams(root);
        levels[0].absorb((cu + cv) / 2.0, du.max(dv));
        queue.push_back((0, 0));
    }

    let mut achieved: f64 = f64::INFINITY;
    while let Some((idx, depth)) = queue.pop_front() {
        let (du, dv) = exp.diams(&exp.nodes[idx as usize]);
        if du <= tol && dv <= tol {
            survivors.push(idx);
            continue;
        }
        // queue is depth-ordered, so this tracks the deepest scale reached
        achieved = du.max(dv);
        if exp.nodes.len() + exp.system.len() > budget {
            return Err(Overflow {
                visited: exp.nodes.len(),
                achieved_tol: achieved,
                levels,
            });
        }
        let extend_v = dv > du; // split the larger piece; ties split u
        for letter in 1..=exp.system.len() as u8 {
            let parent = &exp.nodes[idx as usize];
            let step = exp.system.map(letter).expect("letter in range");
            let (u_map, relative) = if extend_v {
                (parent.u_map, parent.relative.compose(step))
            } else {
                (parent.u_map.compose(step), step.inverse().compose(&parent.relative))
            };
            let node = Node {
                parent: idx,
                letter,
                extended_v: extend_v,
                u_map,
                relative,
            };
            let (cu, ru, cv, rv) = exp.disks(&node);
            if certified_gap(cu, ru, cv, rv) > 0.0 {
                continue;
            }
            let (ndu, ndv) = exp.diams(&node);
            if levels.len() <= depth as usize + 1 {
                levels.push(LevelStat::new());
            }
            levels[depth as usize + 1].absorb((cu + cv) / 2.0, ndu.max(ndv));
            exp.nodes.push(node);
            queue.push_back(((exp.nodes.len() - 1) as u32, depth + 1));
        }
    }

    Ok(Ok(cluster_survivors(&exp, &survivors)))
}

fn prepare(system: &SimSystem, u0: &Word, v0: &Word, tol: f64) -> Result<Option<()>> {
    u0.check_in(system)?;
    v0.check_in(system)?;
    if word_relation(u0, v0) != WordRelation::Incomparable {
        return Err(Error::Domain(format!(
            "pair expansion needs incomparable words, got {u0} and {v0}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    Ok(Some(()))
}

/// Smallest disk containing two disks.
fn covering_disk(c1: Complex64, r1: f64, c2: Complex64, r2: f64) -> (Complex64, f64) {
    let d = (c1 - c2).norm();
    if d + r1 <= r2 {
        (c2, r2)
    } else if d + r2 <= r1 {
        (c1, r1)
    } else if d == 0.0 {
        (c1, r1.max(r2))
    } else {
        let radius = (d + r1 + r2) / 2.0;
        let center = c1 + (c2 - c1) * ((radius - r1) / d);
        (center, radius)
    }
}

fn cluster_survivors(exp: &Expansion, survivors: &[u32]) -> Vec<IntersectionCluster> {
    let mut members: Vec<(Complex64, f64, Word, Word, u32)> = survivors
        .iter()
        .map(|&idx| {
            let (cu, ru, cv, rv) = exp.disks(&exp.nodes[idx as usize]);
            let (c, r) = covering_disk(cu, ru, cv, rv);
            let (u, v) = exp.words(idx);
            (c, r, u, v, idx)
        })
        .collect();
    members.sort_by(|a, b| (a.2.clone(), a.3.clone()).cmp(&(b.2.clone(), b.3.clone())));

    let groups = group_by_overlap(
        &members
            .iter()
            .map(|&(c, r, ..)| (c, r))
            .collect::<Vec<_>>(),
    );

    let mut clusters = Vec::new();
    for group in groups {
        let centroid = group
            .iter()
            .map(|&i| members[i].0)
            .fold(Complex64::new(0.0, 0.0), |a, b| a + b)
            / group.len() as f64;
        let radius = group
            .iter()
            .map(|&i| (members[i].0 - centroid).norm() + members[i].1)
            .fold(0.0, f64::max);
        let witness_pairs: Vec<(Word, Word)> = group
            .iter()
            .map(|&i| (members[i].2.clone(), members[i].3.clone()))
            .collect();
        // deepest witness carries the chain used for periodicity detection
        let deepest = group
            .iter()
            .max_by_key(|&&i| (members[i].2.len() + members[i].3.len(), std::cmp::Reverse(i)))
            .copied()
            .expect("groups are nonempty");
        let chain = exp.chain(members[deepest].4);
        clusters.push(IntersectionCluster {
            center: centroid,
            radius,
            witness_pairs,
            address_pair: None,
            chains: vec![chain],
        });
    }
    clusters.sort_by(|a, b| {
        (a.center.re, a.center.im)
            .partial_cmp(&(b.center.re, b.center.im))
            .expect("finite centers")
    });
    clusters
}

/// Union-find over disks, merging overlapping ones. Buckets on a grid
/// sized by the largest radius keep this near-linear.
fn group_by_overlap(disks: &[(Complex64, f64)]) -> Vec<Vec<usize>> {
    let n = disks.len();
    let mut dsu: Vec<usize> = (0..n).collect();
    fn find(dsu: &mut Vec<usize>, mut x: usize) -> usize {
        while dsu[x] != x {
            dsu[x] = dsu[dsu[x]];
            x = dsu[x];
        }
        x
    }
    if n > 0 {
        let cell = disks
            .iter()
            .map(|&(_, r)| r)
            .fold(0.0f64, f64::max)
            .max(1e-300)
            * 2.0;
        let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, &(c, _)) in disks.iter().enumerate() {
            let key = ((c.re / cell).floor() as i64, (c.im / cell).floor() as i64);
            buckets.entry(key).or_default().push(i);
        }
        for (i, &(ci, ri)) in disks.iter().enumerate() {
            let key = ((ci.re / cell).floor() as i64, (ci.im / cell).floor() as i64);
            for dx in -1..=1 {
                for dy in -1..=1 {
                    if let Some(cands) = buckets.get(&(key.0 + dx, key.1 + dy)) {
                        for &j in cands {
                            if j <= i {
                                continue;
                            }
                            let (cj, rj) = disks[j];
                            if (ci - cj).norm() <= ri + rj {
                                let (a, b) = (find(&mut dsu, i), find(&mut dsu, j));
                                if a != b {
                                    dsu[a.max(b)] = a.min(b);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let root = find(&mut dsu, i);
        groups.entry(root).or_default().push(i);
    }
    groups.into_values().collect()
}

fn merge_overlapping(clusters: Vec<IntersectionCluster>) -> Vec<IntersectionCluster> {
    let disks: Vec<(Complex64, f64)> = clusters.iter().map(|c| (c.center, c.radius)).collect();
    let groups = group_by_overlap(&disks);
    let mut merged = Vec::new();
    for group in groups {
        if group.len() == 1 {
            merged.push(clusters[group[0]].clone());
            continue;
        }
        let centroid = group
            .iter()
            .map(|&i| clusters[i].center)
            .fold(Complex64::new(0.0, 0.0), |a, b| a + b)
            / group.len() as f64;
        let radius = group
            .iter()
            .map(|&i| (clusters[i].center - centroid).norm() + clusters[i].radius)
            .fold(0.0, f64::max);
        let mut witness_pairs = Vec::new();
        let mut chains = Vec::new();
        let mut address_pair = None;
        for &i in &group {
            witness_pairs.extend(clusters[i].witness_pairs.iter().cloned());
            chains.extend(clusters[i].chains.iter().cloned());
            if address_pair.is_none() {
                address_pair = clusters[i].address_pair.clone();
            }
        }
        witness_pairs.sort();
        witness_pairs.dedup();
        merged.push(IntersectionCluster {
            center: centroid,
            radius,
            witness_pairs,
            address_pair,
            chains,
        });
    }
    merged.sort_by(|a, b| {
        (a.center.re, a.center.im)
            .partial_cmp(&(b.center.re, b.center.im))
            .expect("finite centers")
    });
    merged
}

/// Certified clusters covering `K_u0 ∩ K_v0`, each with diameter driven
/// down to `tol`. An empty result certifies the pieces are disjoint.
pub fn pair_expand(
    system: &SimSystem,
    u0: &Word,
    v0: &Word,
    tol: f64,
) -> Result<Vec<IntersectionCluster>> {
    pair_expand_with_budget(system, u0, v0, tol, crate::budget_from_env(DEFAULT_PAIR_BUDGET))
}

pub fn pair_expand_with_budget(
    system: &SimSystem,
    u0: &Word,
    v0: &Word,
    tol: f64,
    budget: usize,
) -> Result<Vec<IntersectionCluster>> {
    match expand_pairs(system, u0, v0, tol, budget) {
        Ok(result) => result,
        Err(overflow) => Err(overflow.to_error()),
    }
}

/// The tolerance schedule used by [`fi_report`]: two decades above the
/// target, then the target itself. Stabilization across the last two
/// decides certification.
pub fn fi_schedule(tol: f64) -> [f64; 3] {
    [tol * 1e4, tol * 1e2, tol]
}

/// Run pair expansion over all first-level pairs `i < j` and classify the
/// system: `Certified(s)` needs every pair's cluster count stable across
/// the last two tolerance decades with proportionally shrinking radii;
/// `NotFi` needs a continuum-overlap signature; anything else is `Likely`.
pub fn fi_report(system: &SimSystem, tol: f64) -> Result<FiReport> {
    fi_report_with_budget(system, tol, crate::budget_from_env(DEFAULT_PAIR_BUDGET))
}

pub fn fi_report_with_budget(system: &SimSystem, tol: f64, budget: usize) -> Result<FiReport> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let schedule = fi_schedule(tol);
    let m = system.len() as u8;
    let mut clusters = BTreeMap::new();
    let mut inconclusive = Vec::new();
    let mut all_certified = true;
    let mut s = 0usize;

    for i in 1..=m {
        for j in (i + 1)..=m {
            let u = Word::from_letters(vec![i])?;
            let v = Word::from_letters(vec![j])?;
            let mut runs: Vec<Vec<IntersectionCluster>> = Vec::new();
            let mut overflowed = None;
            for &t in &schedule {
                match expand_pairs(system, &u, &v, t, budget) {
                    Ok(result) => runs.push(result?),
                    Err(overflow) => {
                        overflowed = Some(overflow);
                        break;
                    }
                }
            }
            if let Some(overflow) = overflowed {
                if overflow.continuum_signature() {
                    return Ok(FiReport {
                        verdict: FiVerdict::NotFi {
                            pair: (i, j),
                            details: format!(
                                "survivor extent does not shrink below tolerance {:.3e} \
                                 ({} pairs visited)",
                                overflow.achieved_tol, overflow.visited
                            ),
                        },
                        s: 0,
                        clusters,
                        inconclusive_pairs: inconclusive,
                    });
                }
                inconclusive.push(((i, j), overflow.achieved_tol));
                all_certified = false;
                continue;
            }

            let last = &runs[runs.len() - 1];
            let prev = &runs[runs.len() - 2];
            let max_r = |v: &Vec<IntersectionCluster>| {
                v.iter().map(|c| c.radius).fold(0.0f64, f64::max)
            };
            let (r_last, r_prev) = (max_r(last), max_r(prev));
            let counts_stable = last.len() == prev.len();
            let radii_shrink = last.is_empty() || r_last <= 0.1 * r_prev;

            if counts_stable && !radii_shrink && r_last > 0.5 * r_prev && r_last > 1e3 * tol {
                // completed expansion whose survivor extent refuses to
                // shrink: same continuum signature, observed directly.
                return Ok(FiReport {
                    verdict: FiVerdict::NotFi {
                        pair: (i, j),
                        details: format!(
                            "cluster radius stuck near {r_last:.3e} across two tolerance decades"
                        ),
                    },
                    s: 0,
                    clusters,
                    inconclusive_pairs: inconclusive,
                });
            }
            if !(counts_stable && radii_shrink) {
                all_certified = false;
            }
            s = s.max(last.len());
            let mut final_clusters = runs.pop().expect("schedule is nonempty");
            for cluster in &mut final_clusters {
                cluster.address_pair = detect_address_pair(system, cluster, 8)?;
            }
            clusters.insert((i, j), final_clusters);
        }
    }

    let verdict = if all_certified {
        FiVerdict::Certified { s }
    } else {
        FiVerdict::Likely { s }
    };
    Ok(FiReport {
        verdict,
        s,
        clusters,
        inconclusive_pairs: inconclusive,
    })
}

/// Reconstruct eventually periodic addresses for both sides of a cluster
/// by finding a recurrence of the relative similarity along the surviving
/// pair chain. Verified by evaluating both addresses back into the cluster
/// disk; `None` when no verified recurrence with period length at most
/// `max_period` exists.
pub fn detect_address_pair(
    system: &SimSystem,
    cluster: &IntersectionCluster,
    max_period: usize,
) -> Result<Option<(Address, Address)>> {
    if max_period == 0 {
        return Ok(None);
    }
    for chain in &cluster.chains {
        for k2 in 1..chain.len() {
            for k1 in 0..k2 {
                let early = &chain[k1];
                let late = &chain[k2];
                if !early.relative.approx_eq(&late.relative, RECURRENCE_TOL) {
                    continue;
                }
                let a = strip_prefix(&early.u, &late.u);
                let b = strip_prefix(&early.v, &late.v);
                let (a, b) = match (a, b) {
                    (Some(a), Some(b)) if !a.is_empty() && !b.is_empty() => (a, b),
                    _ => continue,
                };
                if a.len().max(b.len()) > max_period {
                    continue;
                }
                let addr_u = Address::new(early.u.clone(), a)?;
                let addr_v = Address::new(early.v.clone(), b)?;
                let slack = cluster.radius * 1.0001 + 1e-12;
                let pu = crate::word::eval_address(system, &addr_u)?;
                let pv = crate::word::eval_address(system, &addr_v)?;
                if (pu - cluster.center).norm() <= slack && (pv - cluster.center).norm() <= slack {
                    return Ok(Some((addr_u, addr_v)));
                }
            }
        }
    }
    Ok(None)
}

fn strip_prefix(prefix: &Word, word: &Word) -> Option<Word> {
    if prefix.is_prefix_of(word) {
        Word::from_letters(word.letters()[prefix.len()..].to_vec()).ok()
    } else {
        None
    }
}

/// All contact clusters of `K_j` against the other pieces of the same
/// level, geometrically deduplicated. This is the self-similar boundary
/// `∂K_j` whenever the intersections are finite.
pub fn boundary_points(
    system: &SimSystem,
    j: &Word,
    tol: f64,
) -> Result<Vec<IntersectionCluster>> {
    j.check_in(system)?;
    if j.is_empty() {
        return Err(Error::Domain("boundary_points needs a nonempty word".into()));
    }
    let mut collected = Vec::new();
    for other in same_level_words(system, j.len()) {
        if &other == j {
            continue;
        }
        collected.extend(pair_expand(system, j, &other, tol)?);
    }
    let mut merged = merge_overlapping(collected);
    for cluster in &mut merged {
        if cluster.address_pair.is_none() {
            cluster.address_pair = detect_address_pair(system, cluster, 8)?;
        }
    }
    Ok(merged)
}

fn same_level_words(system: &SimSystem, level: usize) -> Vec<Word> {
    let m = system.len() as u8;
    let mut words = vec![Word::empty()];
    for _ in 0..level {
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

/// Does the piece `K_word` meet the closed disk `B(center, radius)`?
/// Certified pruning with refinement down to `resolution`: `false` is a
/// certificate, `true` means a leaf of diameter ≤ `resolution` still meets
/// the disk.
pub(crate) fn piece_meets_disk(
    system: &SimSystem,
    word: &Word,
    center: Complex64,
    radius: f64,
    resolution: f64,
) -> Result<bool> {
    let disk = bounding_disk(system);
    let root = system.compose(word)?;
    let mut stack = vec![root];
    while let Some(map) = stack.pop() {
        let piece = disk.map(&map);
        if certified_gap(piece.center, piece.radius, center, radius) > 0.0 {
            continue;
        }
        if 2.0 * piece.radius <= resolution {
            return Ok(true);
        }
        for letter in 1..=system.len() as u8 {
            stack.push(map.compose(system.map(letter)?));
        }
    }
    Ok(false)
}

/// An axis-aligned rectangle, used for declared open sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn contains(&self, z: Complex64) -> bool {
        z.re > self.x0 && z.re < self.x1 && z.im > self.y0 && z.im < self.y1
    }
}

/// Result of the sampled open-set-condition check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OscCheck {
    pub images_inside: bool,
    pub images_disjoint: bool,
    pub violation: Option<String>,
}

impl OscCheck {
    pub fn holds(&self) -> bool {
        self.images_inside && self.images_disjoint
    }
}

/// Heuristic consistency check of a declared open set (a union of
/// rectangles): on a deterministic sample grid, the map images must stay
/// inside the union and must not collide with each other. This samples
/// rather than proves; a failed check refutes the declaration, a passing
/// one merely fails to.
pub fn check_osc_rectangles(system: &SimSystem, rects: &[Rect]) -> Result<OscCheck> {
    if rects.is_empty() {
        return Err(Error::Domain("open set declaration has no rectangles".into()));
    }
    let inside = |z: Complex64| rects.iter().any(|r| r.contains(z));
    let min_side = rects
        .iter()
        .map(|r| (r.x1 - r.x0).min(r.y1 - r.y0))
        .fold(f64::INFINITY, f64::min);
    if !(min_side > 0.0) {
        return Err(Error::Domain("open set rectangle has nonpositive side".into()));
    }
    let collide_cell = min_side * system.r_min() / 64.0;

    let mut occupied: HashMap<(i64, i64), usize> = HashMap::new();
    let samples_per_side = 48;
    for (mi, map) in system.maps().iter().enumerate() {
        for rect in rects {
            for sx in 0..samples_per_side {
                for sy in 0..samples_per_side {
                    let fx = (sx as f64 + 0.5) / samples_per_side as f64;
                    let fy = (sy as f64 + 0.5) / samples_per_side as f64;
                    let z = Complex64::new(
                        rect.x0 + fx * (rect.x1 - rect.x0),
                        rect.y0 + fy * (rect.y1 - rect.y0),
                    );
                    let image = map.apply(z);
                    if !inside(image) {
                        return Ok(OscCheck {
                            images_inside: false,
                            images_disjoint: true,
                            violation: Some(format!(
                                "S_{} maps sample ({:.4}, {:.4}) outside the open set",
                                mi + 1,
                                z.re,
                                z.im
                            )),
                        });
                    }
                    let key = (
                        (image.re / collide_cell).floor() as i64,
                        (image.im / collide_cell).floor() as i64,
                    );
                    if let Some(&other) = occupied.get(&key) {
                        if other != mi {
                            return Ok(OscCheck {
                                images_inside: true,
                                images_disjoint: false,
                                violation: Some(format!(
                                    "images of S_{} and S_{} collide near ({:.4}, {:.4})",
                                    other + 1,
                                    mi + 1,
                                    image.re,
                                    image.im
                                )),
                            });
                        }
                    } else {
                        occupied.insert(key, mi);
                    }
                }
            }
        }
    }
    Ok(OscCheck {
        images_inside: true,
        images_disjoint: true,
        violation: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    #[test]
    fn gasket_pair_meets_at_midpoint() {
        let sys = systems::gasket();
        let clusters = pair_expand(&sys, &w("1"), &w("2"), 1e-6).unwrap();
        assert_eq!(clusters.len(), 1);
        let cl = &clusters[0];
        assert!((cl.center - c(0.5, 0.0)).norm() < 1e-5);
        assert!(cl.radius <= 1e-5);
        assert!(!cl.witness_pairs.is_empty());
        for (u, v) in &cl.witness_pairs {
            assert_eq!(word_relation(u, v), WordRelation::Incomparable);
        }
    }

    #[test]
    fn cantor_pieces_prune_to_nothing() {
        let sys = systems::cantor_pair();
        let clusters = pair_expand(&sys, &w("1"), &w("2"), 1e-6).unwrap();
        assert!(clusters.is_empty());
    }

    #[test]
    fn vicsek_corner_meets_center_once() {
        let sys = systems::vicsek();
        let clusters = pair_expand(&sys, &w("1"), &w("5"), 1e-6).unwrap();
        assert_eq!(clusters.len(), 1);
        assert!((clusters[0].center - c(1.0 / 3.0, 1.0 / 3.0)).norm() < 1e-5);
    }

    #[test]
    fn comparable_words_are_rejected() {
        let sys = systems::gasket();
        assert!(pair_expand(&sys, &w("1"), &w("12"), 1e-4).is_err());
    }

    #[test]
    fn gasket_fi_certified_one_point_three_clusters() {
        let sys = systems::gasket();
        let report = fi_report(&sys, 1e-7).unwrap();
        assert_eq!(report.verdict, FiVerdict::Certified { s: 1 });
        let total: usize = report.clusters.values().map(|v| v.len()).sum();
        assert_eq!(total, 3);
        for clusters in report.clusters.values() {
            for cl in clusters {
                assert!(cl.radius <= 1e-5);
            }
        }
    }

    #[test]
    fn vicsek_fi_certified_four_contacts() {
        let sys = systems::vicsek();
        let report = fi_report(&sys, 1e-7).unwrap();
        assert_eq!(report.verdict, FiVerdict::Certified { s: 1 });
        let total: usize = report.clusters.values().map(|v| v.len()).sum();
        assert_eq!(total, 4);
        // corner pieces pairwise disjoint; only (i,5) pairs contribute
        for (&(i, j), clusters) in &report.clusters {
            if j != 5 {
                assert!(clusters.is_empty(), "pair ({i},{j}) should be disjoint");
            } else {
                assert_eq!(clusters.len(), 1);
            }
        }
    }

    #[test]
    fn overlap_pair_is_not_fi() {
        let sys = systems::overlap_pair();
        let report = fi_report(&sys, 1e-7).unwrap();
        match report.verdict {
            FiVerdict::NotFi { pair, .. } => assert_eq!(pair, (1, 2)),
            other => panic!("expected NotFi, got {other:?}"),
        }
    }

    #[test]
    fn segment_predicts_single_midpoint() {
        let sys = systems::segment();
        let report = fi_report(&sys, 1e-7).unwrap();
        assert_eq!(report.verdict, FiVerdict::Certified { s: 1 });
        let cl = &report.clusters[&(1, 2)];
        assert_eq!(cl.len(), 1);
        assert!((cl[0].center - c(0.5, 0.0)).norm() < 1e-5);
    }

    #[test]
    fn gasket_addresses_at_midpoint() {
        let sys = systems::gasket();
        let clusters = pair_expand(&sys, &w("1"), &w("2"), 1e-8).unwrap();
        let pair = detect_address_pair(&sys, &clusters[0], 8).unwrap().unwrap();
        let a1 = Address::new(w("1"), w("2")).unwrap();
        let a2 = Address::new(w("2"), w("1")).unwrap();
        assert_eq!(pair, (a1, a2));
    }

    #[test]
    fn vicsek_addresses_at_corner_contact() {
        let sys = systems::vicsek();
        let clusters = pair_expand(&sys, &w("1"), &w("5"), 1e-8).unwrap();
        let (a1, a2) = detect_address_pair(&sys, &clusters[0], 8).unwrap().unwrap();
        assert_eq!(a1, Address::new(w("1"), w("4")).unwrap());
        assert_eq!(a2, Address::new(w("5"), w("1")).unwrap());
        // both addresses evaluate into the cluster
        let p = crate::word::eval_address(&sys, &a1).unwrap();
        assert!((p - clusters[0].center).norm() <= clusters[0].radius * 1.01);
    }

    #[test]
    fn zero_max_period_disables_detection() {
        let sys = systems::gasket();
        let clusters = pair_expand(&sys, &w("1"), &w("2"), 1e-8).unwrap();
        assert!(detect_address_pair(&sys, &clusters[0], 0).unwrap().is_none());
    }

    #[test]
    fn gasket_boundary_of_first_piece() {
        let sys = systems::gasket();
        let pts = boundary_points(&sys, &w("1"), 1e-7).unwrap();
        assert_eq!(pts.len(), 2);
        let expected = [c(0.5, 0.0), c(0.25, 3f64.sqrt() / 4.0)];
        for e in expected {
            assert!(
                pts.iter().any(|p| (p.center - e).norm() < 1e-5),
                "missing boundary point {e}"
            );
        }
    }

    #[test]
    fn vicsek_center_boundary_has_four_points() {
        let sys = systems::vicsek();
        let pts = boundary_points(&sys, &w("5"), 1e-7).unwrap();
        assert_eq!(pts.len(), 4);
    }

    #[test]
    fn cantor_piece_has_empty_boundary() {
        let sys = systems::cantor_pair();
        let pts = boundary_points(&sys, &w("1"), 1e-7).unwrap();
        assert!(pts.is_empty());
    }

    #[test]
    fn level_invariance_under_prefix_map() {
        // clusters of (K_u, K_v) map under S_w to clusters of (K_wu, K_wv)
        let sys = systems::gasket();
        let base = pair_expand(&sys, &w("1"), &w("2"), 1e-7).unwrap();
        let prefix = w("3");
        let map = sys.compose(&prefix).unwrap();
        let deeper = pair_expand(&sys, &w("31"), &w("32"), 1e-7).unwrap();
        assert_eq!(base.len(), deeper.len());
        for (b, d) in base.iter().zip(&deeper) {
            assert!((map.apply(b.center) - d.center).norm() < 2e-7 + b.radius);
        }
    }

    #[test]
    fn fi_s_monotone_under_refinement() {
        // s at level 2 never exceeds s at level 1 (gasket: both are 1)
        let sys = systems::gasket();
        let report = fi_report(&sys, 1e-6).unwrap();
        let mut s2 = 0usize;
        for u in same_level_words(&sys, 2) {
            for v in same_level_words(&sys, 2) {
                if u < v {
                    s2 = s2.max(pair_expand(&sys, &u, &v, 1e-6).unwrap().len());
                }
            }
        }
        assert!(s2 <= report.s);
    }

    #[test]
    fn osc_check_vicsek_square_passes_gasket_square_fails() {
        let unit = Rect {
            x0: 0.0,
            y0: 0.0,
            x1: 1.0,
            y1: 1.0,
        };
        let ok = check_osc_rectangles(&systems::vicsek(), &[unit]).unwrap();
        assert!(ok.holds(), "{:?}", ok.violation);
        // the unit square is not an OSC witness for the gasket: S₃'s image
        // overlaps S₁'s
        let bad = check_osc_rectangles(&systems::gasket(), &[unit]).unwrap();
        assert!(!bad.holds());
    }

    #[test]
    fn piece_meets_disk_agrees_with_geometry() {
        let sys = systems::gasket();
        assert!(piece_meets_disk(&sys, &w("1"), c(0.5, 0.0), 1e-9, 1e-6).unwrap());
        assert!(piece_meets_disk(&sys, &w("2"), c(0.5, 0.0), 1e-9, 1e-6).unwrap());
        assert!(!piece_meets_disk(&sys, &w("3"), c(0.5, 0.0), 1e-9, 1e-6).unwrap());
    }
}
