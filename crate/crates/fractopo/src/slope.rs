//! Invariant arcs at periodic points and their slope parameters.
//!
//! An invariant arc is a Jordan arc γ ending at the fixed point of a
//! composed map `S_i`, with `S_iⁿ(γ) ⊆ γ`. Near its endpoint the arc is a
//! logarithmic spiral up to bounded wobble: the slope parameter λ is the
//! ratio of the argument increment to the log-distance increment, and the
//! wobble bound is the residual `M`.
//!
//! Arcs are extracted from cell covers: the classical construction picks a
//! boundary preimage `y`, iterates a first-entry map `φ` on the finite
//! candidate set until it cycles, threads a shortest cell path from `y` to
//! `S_iⁿ(y)` through the fundamental annulus, and concatenates forward
//! images. Polyline endpoints are the exactly known points (cluster
//! pullbacks and their images), so endpoint quantization does not pollute
//! λ; only interior vertices are cell centers.

use num_complex::Complex64;
use serde::Serialize;
use std::collections::{HashMap, HashSet, VecDeque};

use crate::attractor::{cover, Cell, CellCover};
use crate::error::{Error, Result};
use crate::intersection::{self, IntersectionCluster};
use crate::order::diameter_estimate;
use crate::sim::{SimSystem, Similarity};
use crate::word::Word;

/// A polyline approximation of an invariant Jordan arc, running from its
/// free endpoint `y = polyline[0]` toward the anchor fixed point (the last
/// vertex is the anchor itself).
#[derive(Debug, Clone)]
pub struct InvariantArc {
    /// The fixed point `z0 = fix(S_period)`.
    pub anchor: Complex64,
    pub polyline: Vec<Complex64>,
    pub period_word: Word,
    /// The composed period map (never orientation-reversing: reflective
    /// words are doubled during construction).
    pub period_map: Similarity,
    /// `n` with `S_periodⁿ(γ) ⊆ γ`.
    pub fundamental_count: usize,
    /// Cell size of the cover the interior vertices were drawn from.
    pub resolution: f64,
    /// Vertices of the fundamental subarc: `polyline[..head_len]` runs
    /// from `y` to `S_periodⁿ(y)` and covers `γ \ S_periodⁿ(γ)`.
    head_len: usize,
}

impl InvariantArc {
    /// Assemble an arc from explicit data (synthetic arcs in tests and
    /// callers that build their own polylines).
    pub fn from_parts(
        anchor: Complex64,
        polyline: Vec<Complex64>,
        period_word: Word,
        period_map: Similarity,
        fundamental_count: usize,
        head_len: usize,
        resolution: f64,
    ) -> Result<Self> {
        if head_len < 2 || head_len > polyline.len() {
            return Err(Error::Domain(format!(
                "fundamental head needs 2..=len vertices, got {head_len} of {}",
                polyline.len()
            )));
        }
        if fundamental_count == 0 {
            return Err(Error::Domain("fundamental count must be positive".into()));
        }
        for (k, z) in polyline.iter().enumerate() {
            if *z == anchor && k + 1 != polyline.len() {
                return Err(Error::Domain(format!("interior vertex {k} sits at the anchor")));
            }
        }
        Ok(InvariantArc {
            anchor,
            polyline,
            period_word,
            period_map,
            fundamental_count,
            resolution,
            head_len,
        })
    }

    /// The fundamental subarc `y → S_periodⁿ(y)`.
    pub fn head(&self) -> &[Complex64] {
        &self.polyline[..self.head_len]
    }

    /// Vertices that stay clear of the anchor (all but the final vertex
    /// when the polyline terminates at the anchor itself).
    pub fn spiral_vertices(&self) -> &[Complex64] {
        match self.polyline.last() {
            Some(&last) if last == self.anchor => &self.polyline[..self.polyline.len() - 1],
            _ => &self.polyline[..],
        }
    }

    /// The same arc analyzed with the period word doubled: the fundamental
    /// domain doubles, the map ratio squares, λ is invariant.
    pub fn doubled_period(&self) -> Result<InvariantArc> {
        let new_head = 2 * self.head_len - 1;
        if new_head > self.spiral_vertices().len() {
            return Err(Error::Domain(
                "polyline too short to double the fundamental domain".into(),
            ));
        }
        Ok(InvariantArc {
            anchor: self.anchor,
            polyline: self.polyline.clone(),
            period_word: self.period_word.concat(&self.period_word),
            period_map: self.period_map.compose(&self.period_map),
            fundamental_count: self.fundamental_count,
            resolution: self.resolution,
            head_len: new_head,
        })
    }

    /// Cumulative `(log |z - z0|, unwrapped arg increment)` profile along
    /// the spiral vertices. Subarc deviations for the strip property are
    /// differences of `arg - λ·log` between two profile rows.
    pub fn strip_profile(&self) -> Result<Vec<(f64, f64)>> {
        let pts = self.spiral_vertices();
        let mut profile = Vec::with_capacity(pts.len());
        let mut cumulative = 0.0f64;
        profile.push(((pts[0] - self.anchor).norm().ln(), 0.0));
        for k in 1..pts.len() {
            cumulative += segment_increment(pts[k - 1], pts[k], self.anchor)?;
            profile.push((((pts[k] - self.anchor).norm()).ln(), cumulative));
        }
        Ok(profile)
    }
}

/// Slope measurement of one invariant arc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeEstimate {
    /// λ = ΔArg / (n · log ratio) over the fundamental domain.
    pub lambda: f64,
    /// Winding of the fundamental subarc relative to the map's own
    /// rotation: `m = round((ΔArg - n·θ) / 2π)`.
    pub winding: i64,
    /// Argument increment over the fundamental domain.
    pub delta_arg: f64,
    /// `n · log ratio` of the period map (negative).
    pub log_lip: f64,
    /// Strip half-width: max deviation `|ΔArg - λ·Δlog|` over all subarcs
    /// with vertices on the polyline.
    pub residual: f64,
}

/// Argument increment of `z - z0` along a polyline.
///
/// Each straight segment not passing through `z0` subtends an angle of
/// absolute value below π, so the principal value per segment unwraps the
/// total exactly; a step at ±π means the segment crosses `z0`.
pub fn arg_increment(polyline: &[Complex64], z0: Complex64) -> Result<f64> {
    if polyline.len() < 2 {
        return Err(Error::Domain("argument increment needs at least 2 vertices".into()));
    }
    let mut total = 0.0;
    for k in 1..polyline.len() {
        total += segment_increment(polyline[k - 1], polyline[k], z0)?;
    }
    Ok(total)
}

fn segment_increment(a: Complex64, b: Complex64, z0: Complex64) -> Result<f64> {
    let (da, db) = (a - z0, b - z0);
    if da.norm() == 0.0 || db.norm() == 0.0 {
        return Err(Error::Domain("polyline vertex coincides with the center".into()));
    }
    if (a - b).norm() == 0.0 {
        return Ok(0.0);
    }
    let step = (db / da).arg();
    if step.abs() >= std::f64::consts::PI - 1e-12 {
        return Err(Error::Domain(
            "polyline segment passes through the center; no finite subdivision resolves it"
                .into(),
        ));
    }
    Ok(step)
}

/// Slope parameter of an invariant arc, per the spiral model: λ is the
/// fundamental argument increment divided by `n·log(ratio)`. A reflective
/// period map has no rotation number; the word is doubled internally
/// first.
pub fn slope_parameter(arc: &InvariantArc) -> Result<SlopeEstimate> {
    if arc.period_map.is_reflecting() {
        return slope_parameter(&arc.doubled_period()?);
    }
    let n = arc.fundamental_count as f64;
    let delta_arg = arg_increment(arc.head(), arc.anchor)?;
    let log_lip = n * arc.period_map.ratio().ln();
    let lambda = delta_arg / log_lip;
    let theta = arc.period_map.rotation();
    let winding = ((delta_arg - n * theta) / (2.0 * std::f64::consts::PI)).round() as i64;

    let profile = arc.strip_profile()?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &(logdist, cum) in &profile {
        let phi = cum - lambda * logdist;
        lo = lo.min(phi);
        hi = hi.max(phi);
    }
    Ok(SlopeEstimate {
        lambda,
        winding,
        delta_arg,
        log_lip,
        residual: hi - lo,
    })
}

// ---------------------------------------------------------------------
// arc extraction

struct ComponentMap {
    cover: CellCover,
    alive: HashSet<Cell>,
    component_of: HashMap<Cell, usize>,
    count: usize,
}

impl ComponentMap {
    fn build(cov: CellCover, z0: Complex64) -> ComponentMap {
        let comps = cov.components(Some((z0, 3.0 * cov.cell_size())));
        let mut component_of = HashMap::new();
        for (idx, comp) in comps.iter().enumerate() {
            for &cell in comp {
                component_of.insert(cell, idx);
            }
        }
        ComponentMap {
            alive: component_of.keys().copied().collect(),
            component_of,
            count: comps.len(),
            cover: cov,
        }
    }

    /// Component of the cell nearest to `z` (searching a small window).
    fn locate(&self, z: Complex64) -> Option<usize> {
        let cell = self.cover.cell_of(z);
        let mut best: Option<(f64, usize)> = None;
        for dx in -3i64..=3 {
            for dy in -3i64..=3 {
                let probe = (cell.0 + dx, cell.1 + dy);
                if let Some(&comp) = self.component_of.get(&probe) {
                    let d = (self.cover.cell_center(probe) - z).norm();
                    if best.map_or(true, |(bd, _)| d < bd) {
                        best = Some((d, comp));
                    }
                }
            }
        }
        best.map(|(_, comp)| comp)
    }

    /// Farthest cell center from `z0` within a component; distance ties
    /// break on cell coordinates so the choice is deterministic.
    fn far_representative(&self, comp: usize, z0: Complex64) -> Complex64 {
        let mut best: Option<(f64, Cell)> = None;
        for (&cell, &c) in &self.component_of {
            if c == comp {
                let d = (self.cover.cell_center(cell) - z0).norm();
                if best.map_or(true, |(bd, bc)| d > bd || (d == bd && cell < bc)) {
                    best = Some((d, cell));
                }
            }
        }
        self.cover.cell_center(best.expect("components are nonempty").1)
    }

    /// Shortest 8-neighbor path between two cells, restricted to `allowed`.
    fn shortest_path(
        &self,
        from: Cell,
        to_ring: &HashSet<Cell>,
        allowed: impl Fn(Cell) -> bool,
    ) -> Option<Vec<Cell>> {
        if !self.alive.contains(&from) {
            return None;
        }
        let mut parent: HashMap<Cell, Cell> = HashMap::new();
        let mut queue = VecDeque::from([from]);
        parent.insert(from, from);
        while let Some(cell) = queue.pop_front() {
            if to_ring.contains(&cell) {
                let mut path = vec![cell];
                let mut cur = cell;
                while parent[&cur] != cur {
                    cur = parent[&cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            for dx in -1i64..=1 {
                for dy in -1i64..=1 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let next = (cell.0 + dx, cell.1 + dy);
                    if self.alive.contains(&next) && allowed(next) && !parent.contains_key(&next)
                    {
                        parent.insert(next, cell);
                        queue.push_back(next);
                    }
                }
            }
        }
        None
    }
}

/// Construct the invariant arc for `S_i` inside the component of
/// `K \ {fix(S_i)}` holding `component_seed`, at cover resolution `eps`.
///
/// Follows the fixed-point construction: boundary preimages are the arc
/// endpoint candidates, the component permutation under `S_i` picks the
/// return power `l`, the first-entry map φ is iterated to a cycle to find
/// a genuinely recurrent `y`, and the fundamental path from `y` to
/// `S_iⁿ(y)` threads the closure of `Q \ S_iⁿ(Q)` as a shortest cell path.
pub fn invariant_arc(
    system: &SimSystem,
    period: &Word,
    component_seed: Complex64,
    eps: f64,
) -> Result<InvariantArc> {
    if period.is_empty() {
        return Err(Error::Domain("period word must be nonempty".into()));
    }
    let mut per = system.compose(period)?;
    let mut period_word = period.clone();
    if per.is_reflecting() {
        period_word = period_word.concat(&period_word);
        per = per.compose(&per);
    }
    let z0 = per.fixed_point()?;
    let (diam, _) = diameter_estimate(system);

    // coarse pass: component structure and the return power of the
    // component permutation σ (σ(k) is where S_i sends component k)
    let eps_coarse = eps.min(per.ratio() * diam / 16.0);
    let coarse = ComponentMap::build(cover(system, &Word::empty(), eps_coarse)?, z0);
    if coarse.count == 0 {
        return Err(Error::Domain("cover vanished near the fixed point; shrink eps".into()));
    }
    let q_coarse = coarse
        .locate(component_seed)
        .ok_or_else(|| Error::Domain(format!("seed {component_seed} is not near the attractor")))?;
    let mut sigma = vec![usize::MAX; coarse.count];
    for k in 0..coarse.count {
        let rep = coarse.far_representative(k, z0);
        sigma[k] = coarse.locate(per.apply(rep)).ok_or_else(|| {
            Error::Inconclusive("component image fell off the cover; shrink eps".into())
        })?;
    }
    let mut l = 1usize;
    let mut at = sigma[q_coarse];
    while at != q_coarse {
        at = sigma[at];
        l += 1;
        if l > coarse.count + 1 {
            return Err(Error::Inconclusive(
                "component permutation has no finite return; cover too coarse".into(),
            ));
        }
    }
    let return_word = period_word.repeat(l);
    let return_map = system.compose(&return_word)?;

    // fine pass: resolution small enough that the target ring near z0
    // lies inside the return piece K_{i^l} (entry detection terminates)
    let eps = eps_coarse.min(return_map.ratio() * diam / 16.0);
    let map = if eps < eps_coarse {
        ComponentMap::build(cover(system, &Word::empty(), eps)?, z0)
    } else {
        coarse
    };
    let h = map.cover.cell_size();
    let q = map
        .locate(component_seed)
        .ok_or_else(|| Error::Domain(format!("seed {component_seed} is not near the attractor")))?;

    // boundary preimages: D = S_i⁻¹(∂K_i) ∩ Q
    let boundary = intersection::boundary_points(system, &period_word, (h * 1e-3).min(1e-7))?;
    let inverse = per.inverse();
    let mut candidates: Vec<Complex64> = Vec::new();
    for cl in &boundary {
        let y = inverse.apply(cl.center);
        if map.locate(y) == Some(q) {
            candidates.push(y);
        }
    }
    if candidates.is_empty() {
        return Err(Error::Inconclusive(format!(
            "no boundary preimage lands in the seed component at {component_seed}"
        )));
    }
    candidates.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).expect("finite"));

    // ring of target cells just outside the deleted ball
    let ring: HashSet<Cell> = map
        .alive
        .iter()
        .copied()
        .filter(|&cell| {
            map.component_of.get(&cell) == Some(&q)
                && (map.cover.cell_center(cell) - z0).norm() <= 5.0 * h
        })
        .collect();
    if ring.is_empty() {
        return Err(Error::Inconclusive(
            "seed component does not approach the fixed point; cover too coarse".into(),
        ));
    }

    // first-entry map φ on the candidate set
    let in_q = |cell: Cell| map.component_of.get(&cell) == Some(&q);
    let phi = |z: Complex64| -> Result<Option<usize>> {
        let from = nearest_alive_in(&map, z, q)
            .ok_or_else(|| Error::Inconclusive("candidate drifted off its component".into()))?;
        let path = match map.shortest_path(from, &ring, in_q) {
            Some(p) => p,
            None => return Ok(None),
        };
        for &cell in &path {
            let center = map.cover.cell_center(cell);
            if intersection::piece_meets_disk(system, &return_word, center, h, h)? {
                let pulled = return_map.inverse().apply(center);
                let snapped = candidates
                    .iter()
                    .enumerate()
                    .min_by(|(_, a), (_, b)| {
                        (pulled - **a)
                            .norm()
                            .partial_cmp(&(pulled - **b).norm())
                            .expect("finite")
                    })
                    .map(|(idx, _)| idx);
                return Ok(snapped);
            }
        }
        Ok(None)
    };

    // iterate φ to a cycle; \#D iterations suffice
    let mut phi_of = vec![None; candidates.len()];
    for (idx, &cand) in candidates.iter().enumerate() {
        phi_of[idx] = phi(cand)?;
    }
    let mut recurrent: Vec<(usize, usize)> = Vec::new(); // (candidate, cycle length)
    for start in 0..candidates.len() {
        let mut seen = vec![usize::MAX; candidates.len()];
        let mut cur = start;
        let mut step = 0usize;
        loop {
            if seen[cur] != usize::MAX {
                if cur == start {
                    recurrent.push((start, step - seen[cur]));
                }
                break;
            }
            seen[cur] = step;
            step += 1;
            match phi_of[cur] {
                Some(next) => cur = next,
                None => break,
            }
        }
    }
    if recurrent.is_empty() {
        return Err(Error::Inconclusive(
            "first-entry map found no recurrent endpoint; cover too coarse".into(),
        ));
    }
    let (y_idx, cycle_len) = recurrent
        .iter()
        .copied()
        .min_by(|a, b| {
            let da = (candidates[a.0] - component_seed).norm();
            let db = (candidates[b.0] - component_seed).norm();
            da.partial_cmp(&db).expect("finite")
        })
        .expect("nonempty");
    let y = candidates[y_idx];
    let n = l * cycle_len;
    let n_word = period_word.repeat(n);
    let n_map = system.compose(&n_word)?;
    let y_image = n_map.apply(y);

    // fundamental path from y to S_iⁿ(y) through the closure of Q \ S_iⁿ(Q)
    let inside_cache = std::cell::RefCell::new(HashMap::<Cell, bool>::new());
    let target_cell = map.cover.cell_of(y_image);
    let goal: HashSet<Cell> = [target_cell].into_iter().collect();
    let from = nearest_alive_in(&map, y, q)
        .ok_or_else(|| Error::Inconclusive("arc endpoint is off the cover".into()))?;
    let allowed = |cell: Cell| -> bool {
        if map.component_of.get(&cell) != Some(&q) {
            return false;
        }
        let center = map.cover.cell_center(cell);
        if (center - y_image).norm() <= 2.0 * h {
            return true; // the target sits on the image boundary
        }
        // closure of Q minus the image piece
        let inside = *inside_cache.borrow_mut().entry(cell).or_insert_with(|| {
            intersection::piece_meets_disk(system, &n_word, center, 0.25 * h, 0.25 * h)
                .unwrap_or(false)
        });
        !inside
    };
    let delta_path = map.shortest_path(from, &goal, allowed).ok_or_else(|| {
        Error::Domain(format!(
            "fundamental annulus disconnected at resolution {eps}; retry with smaller eps"
        ))
    })?;

    // polyline: exact endpoints, cell centers inside
    let mut delta: Vec<Complex64> = Vec::with_capacity(delta_path.len() + 2);
    delta.push(y);
    for &cell in &delta_path {
        let center = map.cover.cell_center(cell);
        if (center - y).norm() > h && (center - y_image).norm() > h {
            delta.push(center);
        }
    }
    delta.push(y_image);

    // γ = δ ∪ S_iⁿ(δ) ∪ S_i²ⁿ(δ) ∪ … down to the stop radius, then z0
    let head_len = delta.len();
    let mut polyline = delta.clone();
    let stop = eps * (y - z0).norm();
    let mut power = n_map;
    while (*polyline.last().expect("nonempty") - z0).norm() > stop && power.ratio() > 1e-14 {
        for z in delta.iter().skip(1) {
            polyline.push(power.apply(*z));
        }
        power = power.compose(&n_map);
    }
    polyline.push(z0);

    InvariantArc::from_parts(z0, polyline, period_word, per, n, head_len, h)
}

fn nearest_alive_in(map: &ComponentMap, z: Complex64, comp: usize) -> Option<Cell> {
    let cell = map.cover.cell_of(z);
    let mut best: Option<(f64, Cell)> = None;
    for dx in -3i64..=3 {
        for dy in -3i64..=3 {
            let probe = (cell.0 + dx, cell.1 + dy);
            if map.component_of.get(&probe) == Some(&comp) {
                let d = (map.cover.cell_center(probe) - z).norm();
                if best.map_or(true, |(bd, _)| d < bd) {
                    best = Some((d, probe));
                }
            }
        }
    }
    best.map(|(_, cell)| cell)
}

/// Outcome of the slope comparison at an intersection point.
#[derive(Debug, Clone)]
pub enum ParamMatch {
    /// All arcs agree within tolerance; λ is their mean.
    Matched {
        lambda: f64,
        arms: Vec<(String, SlopeEstimate)>,
    },
    /// Certified inputs produced disagreeing slopes: surfaced loudly, not
    /// averaged away.
    Mismatched { arms: Vec<(String, SlopeEstimate)> },
    Inconclusive { reason: String },
}

/// Build one invariant arc in every component of `K \ {fix(S_period)}`
/// (components whose construction comes back inconclusive are skipped).
pub fn arcs_with_labels(
    system: &SimSystem,
    period: &Word,
    eps: f64,
) -> Result<Vec<(String, InvariantArc)>> {
    let per = system.compose(period)?;
    let per = if per.is_reflecting() { per.compose(&per) } else { per };
    let z0 = per.fixed_point()?;
    let (diam, _) = diameter_estimate(system);
    let eps = (per.ratio() * diam / 16.0).min(eps);
    let comp_map = ComponentMap::build(cover(system, &Word::empty(), eps)?, z0);
    let mut arcs = Vec::new();
    for k in 0..comp_map.count {
        let seed = comp_map.far_representative(k, z0);
        match invariant_arc(system, period, seed, eps) {
            Ok(arc) => arcs.push((format!("component{k}@{seed:.4}"), arc)),
            Err(Error::Inconclusive(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(arcs)
}

/// Slope estimates for the arcs at `fix(S_period)`, one per component.
pub fn arcs_at_period(
    system: &SimSystem,
    period: &Word,
    eps: f64,
) -> Result<Vec<(String, SlopeEstimate)>> {
    let mut rows = Vec::new();
    for (label, arc) in arcs_with_labels(system, period, eps)? {
        rows.push((label, slope_parameter(&arc)?));
    }
    Ok(rows)
}

/// Compare slope parameters of the invariant arcs at a preperiodic
/// intersection point. Each detected address `j·ī` pulls the point back to
/// the fixed point of `S_i`; arcs are built in every component there, and
/// all slopes (which are invariant under the similarity pull-back) must
/// agree within `tol`.
pub fn parameter_match(
    system: &SimSystem,
    cluster: &IntersectionCluster,
    tol: f64,
) -> Result<ParamMatch> {
    let addresses = match &cluster.address_pair {
        Some((a, b)) => vec![a.clone(), b.clone()],
        None => match intersection::detect_address_pair(system, cluster, 8)? {
            Some((a, b)) => vec![a, b],
            None => {
                return Ok(ParamMatch::Inconclusive {
                    reason: "no preperiodic address detected at the cluster".into(),
                })
            }
        },
    };

    let mut arms: Vec<(String, SlopeEstimate)> = Vec::new();
    for address in &addresses {
        for (label, estimate) in arcs_at_period(system, address.period(), 1.0 / 128.0)? {
            arms.push((format!("{address}/{label}"), estimate));
        }
    }
    if arms.is_empty() {
        return Ok(ParamMatch::Inconclusive {
            reason: "no invariant arc could be constructed".into(),
        });
    }
    let lambdas: Vec<f64> = arms.iter().map(|(_, e)| e.lambda).collect();
    let spread = lambda_spread(&lambdas);
    if arms.iter().any(|(_, e)| !e.residual.is_finite()) {
        return Ok(ParamMatch::Mismatched { arms });
    }
    if spread <= tol {
        let lambda = lambdas.iter().sum::<f64>() / lambdas.len() as f64;
        Ok(ParamMatch::Matched { lambda, arms })
    } else {
        Ok(ParamMatch::Mismatched { arms })
    }
}

fn lambda_spread(lambdas: &[f64]) -> f64 {
    let lo = lambdas.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = lambdas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn quarter_circle_increment() {
        let pts: Vec<Complex64> = (0..=32)
            .map(|k| Complex64::from_polar(1.0, PI / 2.0 * k as f64 / 32.0))
            .collect();
        let inc = arg_increment(&pts, c(0.0, 0.0)).unwrap();
        assert!((inc - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn radial_segment_increment_is_zero() {
        let pts = vec![c(1.0, 0.0), c(1.5, 0.0), c(2.0, 0.0)];
        assert!(arg_increment(&pts, c(0.0, 0.0)).unwrap().abs() < 1e-15);
    }

    #[test]
    fn square_loop_increment_is_two_pi() {
        let pts = vec![c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0), c(1.0, 0.0)];
        let inc = arg_increment(&pts, c(0.0, 0.0)).unwrap();
        assert!((inc - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn segment_through_center_is_rejected() {
        let pts = vec![c(1.0, 0.0), c(-1.0, 0.0)];
        assert!(arg_increment(&pts, c(0.0, 0.0)).is_err());
        let pts = vec![c(1.0, 0.0), c(0.0, 0.0)];
        assert!(arg_increment(&pts, c(0.0, 0.0)).is_err());
    }

    /// Synthetic logarithmic spiral for S(z) = r·e^{iθ}·z with winding m:
    /// z(t) = exp(t·(ln r + i(θ + 2πm))), t ∈ [0, turns].
    fn spiral_arc(r: f64, theta: f64, m: i64, samples: usize, turns: usize) -> InvariantArc {
        let mu = Complex64::new(r.ln(), theta + 2.0 * PI * m as f64);
        let mut polyline = Vec::new();
        for k in 0..=(samples * turns) {
            let t = k as f64 / samples as f64;
            polyline.push((mu * t).exp());
        }
        let map = Similarity::new(r, theta, false, c(0.0, 0.0)).unwrap();
        let word = Word::parse("1").unwrap();
        InvariantArc::from_parts(c(0.0, 0.0), polyline, word, map, 1, samples + 1, 1e-3)
            .unwrap()
    }

    #[test]
    fn spiral_slope_matches_closed_form() {
        // S(z) = (1/2)e^{iπ/2} z: λ = (π/2)/ln(1/2)
        let arc = spiral_arc(0.5, PI / 2.0, 0, 64, 6);
        let est = slope_parameter(&arc).unwrap();
        let expect = (PI / 2.0) / 0.5f64.ln();
        assert!((est.lambda - expect).abs() < 1e-3, "{} vs {expect}", est.lambda);
        assert_eq!(est.winding, 0);
        assert!(est.residual < 1e-9, "pure spiral has no wobble");
    }

    #[test]
    fn extra_winding_changes_lambda_as_predicted() {
        // same map, arc winding once the other way: ΔArg = π/2 - 2π
        let arc = spiral_arc(0.5, PI / 2.0, -1, 256, 6);
        let est = slope_parameter(&arc).unwrap();
        let expect = (PI / 2.0 - 2.0 * PI) / 0.5f64.ln();
        assert!((est.lambda - expect).abs() < 1e-3, "{} vs {expect}", est.lambda);
        assert_eq!(est.winding, -1);
    }

    #[test]
    fn radial_arc_has_zero_slope() {
        let map = Similarity::new(0.5, 0.0, false, c(0.0, 0.0)).unwrap();
        let polyline: Vec<Complex64> = (0..=40).map(|k| c(2f64.powf(-(k as f64) / 10.0), 0.0)).collect();
        let arc = InvariantArc::from_parts(
            c(0.0, 0.0),
            polyline,
            Word::parse("1").unwrap(),
            map,
            1,
            11,
            1e-3,
        )
        .unwrap();
        let est = slope_parameter(&arc).unwrap();
        assert_eq!(est.lambda, 0.0);
        assert_eq!(est.winding, 0);
    }

    #[test]
    fn doubling_the_period_word_preserves_lambda() {
        let arc = spiral_arc(0.5, PI / 2.0, 0, 64, 6);
        let est = slope_parameter(&arc).unwrap();
        let doubled = arc.doubled_period().unwrap();
        let est2 = slope_parameter(&doubled).unwrap();
        assert!((est.lambda - est2.lambda).abs() < 1e-6);
        assert!((est2.delta_arg - 2.0 * est.delta_arg).abs() < 1e-9);
        assert!((est2.log_lip - 2.0 * est.log_lip).abs() < 1e-12);
    }

    #[test]
    fn reflective_period_is_doubled_automatically() {
        // S(z) = (1/2)·conj(z): S² = z/4, a radial map
        let map = Similarity::new(0.5, 0.0, true, c(0.0, 0.0)).unwrap();
        let polyline: Vec<Complex64> = (0..=40).map(|k| c(2f64.powf(-(k as f64) / 10.0), 0.0)).collect();
        let arc = InvariantArc::from_parts(
            c(0.0, 0.0),
            polyline,
            Word::parse("1").unwrap(),
            map,
            1,
            11,
            1e-3,
        )
        .unwrap();
        let est = slope_parameter(&arc).unwrap();
        assert_eq!(est.lambda, 0.0);
        assert!((est.log_lip - 2.0 * 0.5f64.ln()).abs() < 1e-12, "squared ratio");
    }

    #[test]
    fn strip_property_holds_on_profiles() {
        let arc = spiral_arc(0.6, 1.0, 0, 48, 8);
        let est = slope_parameter(&arc).unwrap();
        let profile = arc.strip_profile().unwrap();
        for i in (0..profile.len()).step_by(7) {
            for j in (i + 1..profile.len()).step_by(11) {
                let d_arg = profile[j].1 - profile[i].1;
                let d_log = profile[j].0 - profile[i].0;
                assert!(
                    (d_arg - est.lambda * d_log).abs() <= est.residual + 1e-12,
                    "subarc ({i},{j}) exceeds residual"
                );
            }
        }
    }

    #[test]
    fn vicsek_center_arc_follows_the_diagonal() {
        let sys = systems::vicsek();
        let arc = invariant_arc(&sys, &Word::parse("5").unwrap(), c(0.9, 0.9), 0.01).unwrap();
        // y = S₅⁻¹((2/3, 2/3)) = (1, 1)
        assert!((arc.polyline[0] - c(1.0, 1.0)).norm() < 1e-5);
        assert!((arc.anchor - c(0.5, 0.5)).norm() < 1e-12);
        assert_eq!(arc.fundamental_count, 1);
        // the polyline hugs the diagonal y = x
        for z in arc.spiral_vertices() {
            assert!((z.re - z.im).abs() <= 2.0 * arc.resolution + 1e-9, "off-diagonal {z}");
        }
        let est = slope_parameter(&arc).unwrap();
        assert!(est.lambda.abs() < 1e-3, "diagonal arc has slope 0, got {}", est.lambda);
    }

    #[test]
    fn segment_arc_runs_toward_zero() {
        let sys = systems::segment();
        let arc = invariant_arc(&sys, &Word::parse("1").unwrap(), c(0.9, 0.0), 0.01).unwrap();
        assert!((arc.polyline[0] - c(1.0, 0.0)).norm() < 1e-5);
        assert!(arc.anchor.norm() < 1e-12);
        let est = slope_parameter(&arc).unwrap();
        assert!(est.lambda.abs() < 1e-3);
    }

    #[test]
    fn gasket_arc_runs_along_an_edge() {
        let sys = systems::gasket();
        let arc = invariant_arc(&sys, &Word::parse("1").unwrap(), c(0.55, 0.0), 0.01).unwrap();
        // y = S₁⁻¹(1/2) = 1, the arc lives on the real segment [0, 1]
        assert!((arc.polyline[0] - c(1.0, 0.0)).norm() < 1e-5);
        for z in arc.spiral_vertices() {
            assert!(z.im.abs() <= 2.0 * arc.resolution + 1e-9, "off-edge vertex {z}");
        }
        let est = slope_parameter(&arc).unwrap();
        assert!(est.lambda.abs() < 1e-3);
    }

    #[test]
    fn arc_invariance_under_period_map() {
        // S_iⁿ(polyline) stays within 2 cells of the polyline tail
        let sys = systems::vicsek();
        let arc = invariant_arc(&sys, &Word::parse("5").unwrap(), c(0.9, 0.9), 0.01).unwrap();
        let n_map = (0..arc.fundamental_count).fold(Similarity::identity(), |acc, _| {
            acc.compose(&arc.period_map)
        });
        let tail: Vec<Complex64> = arc.polyline[arc.head_len - 1..].to_vec();
        for z in arc.spiral_vertices() {
            let image = n_map.apply(*z);
            let dist = tail
                .iter()
                .map(|t| (image - t).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(dist <= 2.0 * arc.resolution + 1e-9, "image {image} strays {dist}");
        }
    }

    #[test]
    fn gasket_midpoint_parameters_match_at_zero() {
        let sys = systems::gasket();
        let clusters =
            intersection::pair_expand(&sys, &Word::parse("1").unwrap(), &Word::parse("2").unwrap(), 1e-8)
                .unwrap();
        match parameter_match(&sys, &clusters[0], 1e-3).unwrap() {
            ParamMatch::Matched { lambda, arms } => {
                assert!(lambda.abs() < 1e-3, "rotation-free system forces λ = 0");
                assert!(arms.len() >= 2, "arcs from both addresses");
                for (_, est) in &arms {
                    assert!(est.lambda.abs() < 1e-3);
                    assert!(est.residual.is_finite());
                }
            }
            other => panic!("expected match, got {other:?}"),
        }
    }

    #[test]
    fn vicsek_contact_parameters_match_at_zero() {
        let sys = systems::vicsek();
        let clusters =
            intersection::pair_expand(&sys, &Word::parse("1").unwrap(), &Word::parse("5").unwrap(), 1e-8)
                .unwrap();
        match parameter_match(&sys, &clusters[0], 1e-3).unwrap() {
            ParamMatch::Matched { lambda, .. } => assert!(lambda.abs() < 1e-3),
            other => panic!("expected match, got {other:?}"),
        }
    }
}
