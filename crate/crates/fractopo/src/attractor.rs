//! Certified cell-cover approximations of the attractor and its pieces.
//!
//! The engine expands the multiindex tree, not pixel iterations of the
//! Hutchinson operator: every leaf word `j` carries the certified diameter
//! bound `ratio(S_j) · 2R` from an invariant bounding disk, so the cover
//! quality is known before a single cell is drawn. Cells are grid-aligned
//! squares keyed by integer coordinates, which keeps adjacency queries O(1)
//! for the component counting downstream.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sim::{SimSystem, Similarity};
use crate::word::Word;

/// Default cap on the number of leaves a single cover may expand to.
pub const DEFAULT_LEAF_BUDGET: usize = 20_000_000;

/// A disk invariant under every map of the system: `S_i(B) ⊆ B` for all i.
/// The attractor and all its pieces live inside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingDisk {
    pub center: Complex64,
    pub radius: f64,
}

impl BoundingDisk {
    pub fn contains(&self, z: Complex64) -> bool {
        (z - self.center).norm() <= self.radius
    }

    /// Image under a similarity: disks map to disks.
    pub fn map(&self, s: &Similarity) -> BoundingDisk {
        BoundingDisk {
            center: s.apply(self.center),
            radius: s.ratio() * self.radius,
        }
    }
}

/// An invariant disk: center at `fix(S₁)`, radius
/// `max_i |S_i(c) - c| / (1 - r_max)`, floored away from zero for
/// degenerate systems whose maps share the fixed point.
pub fn bounding_disk(system: &SimSystem) -> BoundingDisk {
    let c = system.maps()[0]
        .fixed_point()
        .expect("system maps are contracting");
    let worst = system
        .maps()
        .iter()
        .map(|s| (s.apply(c) - c).norm())
        .fold(0.0, f64::max);
    let radius = (worst / (1.0 - system.r_max())).max(1e-12);
    let disk = BoundingDisk { center: c, radius };
    for s in system.maps() {
        let image = disk.map(s);
        let slack = 1e-9 * (1.0 + radius);
        assert!(
            (image.center - disk.center).norm() + image.radius <= disk.radius + slack,
            "invariant disk verification failed"
        );
    }
    disk
}

/// Grid cell at integer coordinates; cell `(ix, iy)` covers the square
/// `[ix·h, (ix+1)·h] × [iy·h, (iy+1)·h]`.
pub type Cell = (i64, i64);

/// A set of grid-aligned square cells covering a target set (the attractor
/// or one of its pieces) together with a guaranteed two-sided error:
/// the target is contained in the cell union, and every cell lies within
/// `error_bound` of the target.
#[derive(Debug, Clone, PartialEq)]
pub struct CellCover {
    cell_size: f64,
    cells: BTreeSet<Cell>,
    error_bound: f64,
    leaf_count: usize,
}

impl CellCover {
    /// Assemble a cover from raw cells (unions of piece covers keep the
    /// worst member error bound).
    pub(crate) fn from_raw_parts(
        cell_size: f64,
        cells: BTreeSet<Cell>,
        error_bound: f64,
    ) -> CellCover {
        let leaf_count = cells.len();
        CellCover {
            cell_size,
            cells,
            error_bound,
            leaf_count,
        }
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn cells(&self) -> &BTreeSet<Cell> {
        &self.cells
    }

    pub fn error_bound(&self) -> f64 {
        self.error_bound
    }

    /// Number of multiindex-tree leaves the cover was rasterized from.
    pub fn leaf_count(&self) -> usize {
        self.leaf_count
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains_cell(&self, cell: Cell) -> bool {
        self.cells.contains(&cell)
    }

    /// The cell containing a point.
    pub fn cell_of(&self, z: Complex64) -> Cell {
        point_cell(z, self.cell_size)
    }

    pub fn cell_center(&self, cell: Cell) -> Complex64 {
        Complex64::new(
            (cell.0 as f64 + 0.5) * self.cell_size,
            (cell.1 as f64 + 0.5) * self.cell_size,
        )
    }

    /// Distance from a point to the cell union (0 if inside a cell).
    pub fn distance_to(&self, z: Complex64) -> f64 {
        self.cells
            .iter()
            .map(|&cell| point_rect_distance(z, cell, self.cell_size))
            .fold(f64::INFINITY, f64::min)
    }

    /// Inclusive integer bounding box `(min_x, min_y, max_x, max_y)`.
    pub fn bbox(&self) -> Option<(i64, i64, i64, i64)> {
        if self.cells.is_empty() {
            return None;
        }
        let mut it = self.cells.iter();
        let &(x0, y0) = it.next().unwrap();
        let (mut bx0, mut by0, mut bx1, mut by1) = (x0, y0, x0, y0);
        for &(x, y) in self.cells.iter() {
            bx0 = bx0.min(x);
            by0 = by0.min(y);
            bx1 = bx1.max(x);
            by1 = by1.max(y);
        }
        Some((bx0, by0, bx1, by1))
    }

    /// Re-express the cover on a finer grid whose cell size divides this
    /// one by a power of two. The covered point set and the error bound are
    /// unchanged.
    pub fn rescaled_to(&self, cell_size: f64) -> Result<CellCover> {
        if cell_size == self.cell_size {
            return Ok(self.clone());
        }
        let factor = self.cell_size / cell_size;
        let k = factor.round() as i64;
        if k < 1 || (factor - k as f64).abs() > 1e-9 || (k & (k - 1)) != 0 {
            return Err(Error::Domain(format!(
                "grid {} is not a power-of-two refinement of {}",
                cell_size, self.cell_size
            )));
        }
        let mut cells = BTreeSet::new();
        for &(x, y) in &self.cells {
            for dx in 0..k {
                for dy in 0..k {
                    cells.insert((x * k + dx, y * k + dy));
                }
            }
        }
        Ok(CellCover {
            cell_size,
            cells,
            error_bound: self.error_bound,
            leaf_count: self.leaf_count,
        })
    }

    /// Connected components of the cell set under 8-neighbor adjacency,
    /// optionally deleting all cells whose center lies within `radius` of
    /// `center` first. Components come back sorted by their smallest cell,
    /// largest first on ties, so the result is deterministic.
    pub fn components(&self, deleted: Option<(Complex64, f64)>) -> Vec<Vec<Cell>> {
        let alive: HashSet<Cell> = self
            .cells
            .iter()
            .copied()
            .filter(|&cell| match deleted {
                Some((z, radius)) => (self.cell_center(cell) - z).norm() > radius,
                None => true,
            })
            .collect();
        let mut seen: HashSet<Cell> = HashSet::new();
        let mut components = Vec::new();
        // BTreeSet iteration keeps seeding order deterministic.
        for &start in &self.cells {
            if !alive.contains(&start) || seen.contains(&start) {
                continue;
            }
            let mut comp = Vec::new();
            let mut queue = VecDeque::from([start]);
            seen.insert(start);
            while let Some(cell) = queue.pop_front() {
                comp.push(cell);
                for dx in -1..=1i64 {
                    for dy in -1..=1i64 {
                        if dx == 0 && dy == 0 {
                            continue;
                        }
                        let next = (cell.0 + dx, cell.1 + dy);
                        if alive.contains(&next) && seen.insert(next) {
                            queue.push_back(next);
                        }
                    }
                }
            }
            comp.sort_unstable();
            components.push(comp);
        }
        components.sort_by(|a, b| a[0].cmp(&b[0]));
        components
    }

    /// Portable bitmap dump. Bit-exact contract: `P1`, width and height on
    /// the second line, then one text row per grid row from the top
    /// (largest y) down, `1` = occupied cell, no separators within a row.
    pub fn write_pbm<W: Write>(&self, mut out: W) -> Result<()> {
        let (x0, y0, x1, y1) = match self.bbox() {
            Some(b) => b,
            None => {
                out.write_all(b"P1\n0 0\n")?;
                return Ok(());
            }
        };
        let (w, h) = ((x1 - x0 + 1) as usize, (y1 - y0 + 1) as usize);
        write!(out, "P1\n{} {}\n", w, h)?;
        let mut row = String::with_capacity(w + 1);
        for y in (y0..=y1).rev() {
            row.clear();
            for x in x0..=x1 {
                row.push(if self.cells.contains(&(x, y)) { '1' } else { '0' });
            }
            row.push('\n');
            out.write_all(row.as_bytes())?;
        }
        Ok(())
    }

    pub fn pbm_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_pbm(&mut buf).expect("write to Vec cannot fail");
        String::from_utf8(buf).expect("pbm is ascii")
    }
}

pub(crate) fn point_cell(z: Complex64, cell_size: f64) -> Cell {
    (
        (z.re / cell_size).floor() as i64,
        (z.im / cell_size).floor() as i64,
    )
}

fn point_rect_distance(z: Complex64, cell: Cell, h: f64) -> f64 {
    let (x0, y0) = (cell.0 as f64 * h, cell.1 as f64 * h);
    let dx = (x0 - z.re).max(z.re - (x0 + h)).max(0.0);
    let dy = (y0 - z.im).max(z.im - (y0 + h)).max(0.0);
    (dx * dx + dy * dy).sqrt()
}

/// Largest power of two not exceeding `eps`; the shared grid convention
/// keeps covers at different tolerances mutually rescalable.
fn snap_cell_size(eps: f64) -> f64 {
    2f64.powi(eps.log2().floor() as i32)
}

/// Cover the piece `K_target` (the whole attractor for the empty word) with
/// grid cells so that the target is inside the cell union and every cell is
/// within the reported `error_bound ≤ 2ε` of the target.
pub fn cover(system: &SimSystem, target: &Word, eps: f64) -> Result<CellCover> {
    cover_with_budget(system, target, eps, crate::budget_from_env(DEFAULT_LEAF_BUDGET))
}

pub fn cover_with_budget(
    system: &SimSystem,
    target: &Word,
    eps: f64,
    leaf_budget: usize,
) -> Result<CellCover> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::Domain(format!("cover tolerance must be positive, got {eps}")));
    }
    target.check_in(system)?;
    let disk = bounding_disk(system);

    // Expand below the target until every leaf diameter bound is ≤ ε.
    let root = system.compose(target)?;
    let mut frontier: Vec<(Word, Similarity)> = vec![(target.clone(), root)];
    let mut leaves: Vec<Similarity> = Vec::new();
    let mut worst_pending: f64 = 0.0;
    while let Some((word, map)) = frontier.pop() {
        let diam = 2.0 * map.ratio() * disk.radius;
        if diam <= eps {
            leaves.push(map);
            if leaves.len() > leaf_budget {
                return Err(Error::Resource {
                    what: "cover leaves",
                    used: leaves.len(),
                    achieved: worst_pending.max(diam),
                });
            }
        } else {
            worst_pending = worst_pending.max(diam);
            for letter in 1..=system.len() as u8 {
                let child = map.compose(system.map(letter)?);
                frontier.push((word.child(letter), child));
            }
            if frontier.len() + leaves.len() > leaf_budget {
                return Err(Error::Resource {
                    what: "cover leaves",
                    used: frontier.len() + leaves.len(),
                    achieved: worst_pending,
                });
            }
        }
    }

    // Rasterize each leaf's bounding disk; radius ≤ ε/2 by the loop above.
    let cell_size = snap_cell_size(eps);
    let mut cells = BTreeSet::new();
    let mut max_leaf_radius: f64 = 0.0;
    for map in &leaves {
        let leaf_disk = disk.map(map);
        max_leaf_radius = max_leaf_radius.max(leaf_disk.radius);
        rasterize_disk(&mut cells, leaf_disk, cell_size);
    }
    Ok(CellCover {
        cell_size,
        cells,
        error_bound: cell_size * std::f64::consts::SQRT_2 + max_leaf_radius,
        leaf_count: leaves.len(),
    })
}

fn rasterize_disk(cells: &mut BTreeSet<Cell>, disk: BoundingDisk, h: f64) {
    let x0 = ((disk.center.re - disk.radius) / h).floor() as i64;
    let x1 = ((disk.center.re + disk.radius) / h).floor() as i64;
    let y0 = ((disk.center.im - disk.radius) / h).floor() as i64;
    let y1 = ((disk.center.im + disk.radius) / h).floor() as i64;
    for x in x0..=x1 {
        for y in y0..=y1 {
            if point_rect_distance(disk.center, (x, y), h) <= disk.radius {
                cells.insert((x, y));
            }
        }
    }
}

/// A certified upper bound on the Hausdorff distance between the two true
/// target sets: Hausdorff distance of the cell unions (computed on cell
/// centers, then inflated by both cell diagonals) plus both error bounds.
pub fn hausdorff_upper(a: &CellCover, b: &CellCover) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Domain("hausdorff_upper on an empty cover".into()));
    }
    // Work on the finer grid of the two.
    let h = a.cell_size.min(b.cell_size);
    let fine_a = a.rescaled_to(h)?;
    let fine_b = b.rescaled_to(h)?;
    let d_ab = directed_center_distance(&fine_a, &fine_b);
    let d_ba = directed_center_distance(&fine_b, &fine_a);
    let grid = d_ab.max(d_ba) + h * std::f64::consts::SQRT_2;
    Ok(grid + a.error_bound + b.error_bound)
}

/// max over cells of `from` of the distance to the nearest cell of `to`,
/// measured between cell centers. Expanding-ring search on the integer
/// grid; rings past the first hit are scanned far enough that the returned
/// minimum is exact.
fn directed_center_distance(from: &CellCover, to: &CellCover) -> f64 {
    let h = to.cell_size;
    let mut by_ring: HashMap<Cell, ()> = HashMap::with_capacity(to.cells.len());
    for &cell in &to.cells {
        by_ring.insert(cell, ());
    }
    let mut worst: f64 = 0.0;
    for &cell in &from.cells {
        let mut best = f64::INFINITY;
        let mut ring: i64 = 0;
        let mut limit: Option<i64> = None;
        loop {
            if let Some(l) = limit {
                if ring > l {
                    break;
                }
            }
            let mut hit = false;
            for (dx, dy) in ring_offsets(ring) {
                let probe = (cell.0 + dx, cell.1 + dy);
                if by_ring.contains_key(&probe) {
                    hit = true;
                    let dist = (((dx * dx + dy * dy) as f64).sqrt()) * h;
                    best = best.min(dist);
                }
            }
            if hit && limit.is_none() {
                // Chebyshev ring k can hide a smaller Euclidean distance up
                // to ring ceil(k·√2).
                limit = Some(((ring as f64) * std::f64::consts::SQRT_2).ceil() as i64);
            }
            ring += 1;
            if ring > 4_000_000 {
                break; // unreachable for nonempty covers at sane scales
            }
        }
        worst = worst.max(best);
    }
    worst
}

fn ring_offsets(k: i64) -> Vec<(i64, i64)> {
    if k == 0 {
        return vec![(0, 0)];
    }
    let mut v = Vec::with_capacity((8 * k) as usize);
    for d in -k..=k {
        v.push((d, k));
        v.push((d, -k));
    }
    for d in (-k + 1)..k {
        v.push((k, d));
        v.push((-k, d));
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gasket_disk_is_unit_disk_at_origin() {
        let disk = bounding_disk(&systems::gasket());
        assert!((disk.center).norm() < 1e-14);
        assert!((disk.radius - 1.0).abs() < 1e-12);
        // contains the three outer vertices
        for v in [c(0.0, 0.0), c(1.0, 0.0), c(0.5, 3f64.sqrt() / 2.0)] {
            assert!(disk.contains(v));
        }
    }

    #[test]
    fn degenerate_shared_fixed_point_gets_positive_radius() {
        let s = Similarity::new(0.5, 0.0, false, c(0.0, 0.0)).unwrap();
        let sys = SimSystem::new(vec![s, s]).unwrap();
        let disk = bounding_disk(&sys);
        assert!(disk.radius > 0.0);
    }

    #[test]
    fn vicsek_disk_contains_unit_square() {
        // the far corner (1,1) sits exactly on the boundary (R = √2)
        let disk = bounding_disk(&systems::vicsek());
        for corner in [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0), c(1.0, 1.0)] {
            assert!((corner - disk.center).norm() <= disk.radius + 1e-12);
        }
    }

    #[test]
    fn gasket_leaf_counts_follow_the_tree() {
        // Leaf diameter bound at level n is 2R·2⁻ⁿ with R = 1, so the
        // expansion stops at the first n with 2^(1-n) ≤ ε, giving 3ⁿ leaves.
        let sys = systems::gasket();
        for (eps, expect) in [(2.0, 1usize), (1.01, 3), (0.51, 9), (0.26, 27)] {
            let cov = cover(&sys, &Word::empty(), eps).unwrap();
            assert_eq!(cov.leaf_count(), expect, "eps = {eps}");
            assert!(cov.error_bound() <= 2.0 * eps);
        }
    }

    #[test]
    fn whole_disk_tolerance_needs_single_leaf() {
        let sys = systems::cantor_pair();
        let disk = bounding_disk(&sys);
        let cov = cover(&sys, &Word::empty(), 2.0 * disk.radius + 0.1).unwrap();
        assert_eq!(cov.leaf_count(), 1);
    }

    #[test]
    fn vicsek_two_levels_is_25_leaves() {
        let sys = systems::vicsek();
        let disk = bounding_disk(&sys);
        let cov = cover(&sys, &Word::empty(), 2.0 * disk.radius / 9.0).unwrap();
        assert_eq!(cov.leaf_count(), 25);
    }

    #[test]
    fn budget_exhaustion_reports_achievable_eps() {
        let sys = systems::gasket();
        match cover_with_budget(&sys, &Word::empty(), 1e-4, 100) {
            Err(Error::Resource { achieved, .. }) => assert!(achieved > 1e-4),
            other => panic!("expected resource error, got {other:?}"),
        }
    }

    #[test]
    fn identical_covers_have_small_hausdorff_bound() {
        let sys = systems::gasket();
        let cov = cover(&sys, &Word::empty(), 0.125).unwrap();
        let d = hausdorff_upper(&cov, &cov).unwrap();
        // zero grid distance + one cell diagonal + both error bounds
        assert!(d <= 2.0 * cov.error_bound() + cov.cell_size() * 1.5);
    }

    #[test]
    fn refinement_shrinks_hausdorff_bound() {
        let sys = systems::gasket();
        let mut last = f64::INFINITY;
        for eps in [0.5, 0.25, 0.125, 0.0625] {
            let a = cover(&sys, &Word::empty(), eps).unwrap();
            let b = cover(&sys, &Word::empty(), eps / 2.0).unwrap();
            let d = hausdorff_upper(&a, &b).unwrap();
            assert!(d < last, "bound should decrease with refinement");
            last = d;
        }
    }

    #[test]
    fn cantor_pieces_are_a_third_apart() {
        let sys = systems::cantor_pair();
        let a = cover(&sys, &Word::parse("1").unwrap(), 0.02).unwrap();
        let b = cover(&sys, &Word::parse("2").unwrap(), 0.02).unwrap();
        // hausdorff_upper is an upper bound on H(K₁, K₂) — which is 2/3
        // here (sup over points, not the gap) — and must respect the true
        // inf-gap 1/3 from below after removing the certified errors:
        // every point of either cover is within error of the true pieces,
        // so the bound cannot fall below 1/3 - errors.
        let d = hausdorff_upper(&a, &b).unwrap();
        assert!(d >= 1.0 / 3.0 - a.error_bound() - b.error_bound());
        assert!(d <= 2.0 / 3.0 + a.error_bound() + b.error_bound() + 3.0 * a.cell_size());
    }

    #[test]
    fn error_bound_monotone_under_halving() {
        let sys = systems::vicsek();
        let mut eps = 0.5;
        let mut last = f64::INFINITY;
        for _ in 0..4 {
            let cov = cover(&sys, &Word::empty(), eps).unwrap();
            assert!(cov.error_bound() <= last);
            last = cov.error_bound();
            eps /= 2.0;
        }
    }

    #[test]
    fn hutchinson_image_stays_inside_dilated_cover() {
        // T(cover) ⊆ cover dilated by error_bound: map every cell center,
        // it must land within error_bound (+ mapped cell radius) of a cell.
        let sys = systems::gasket();
        let cov = cover(&sys, &Word::empty(), 0.125).unwrap();
        let half_diag = cov.cell_size() * std::f64::consts::SQRT_2 / 2.0;
        for s in sys.maps() {
            for &cell in cov.cells() {
                let image = s.apply(cov.cell_center(cell));
                let slack = cov.error_bound() + s.ratio() * half_diag;
                assert!(
                    cov.distance_to(image) <= slack,
                    "image cell strayed {} > {}",
                    cov.distance_to(image),
                    slack
                );
            }
        }
    }

    #[test]
    fn piece_cover_matches_mapped_whole_cover() {
        // cover(j, ε) vs S_j(cover(whole, ε / ratio_j)): both are certified
        // covers of the same piece, so their Hausdorff bound is small.
        let sys = systems::gasket();
        let j = Word::parse("12").unwrap();
        let ratio = sys.compose(&j).unwrap().ratio();
        let eps = 0.0625;
        let piece = cover(&sys, &j, eps).unwrap();
        let whole = cover(&sys, &Word::empty(), eps / ratio).unwrap();

        // map the whole-cover cell centers through S_j and measure how far
        // they sit from the piece cover (and vice versa via its own bound)
        let map = sys.compose(&j).unwrap();
        let mut worst: f64 = 0.0;
        for &cell in whole.cells() {
            let image = map.apply(whole.cell_center(cell));
            worst = worst.max(piece.distance_to(image));
        }
        let tol = piece.error_bound() + ratio * whole.error_bound() + piece.cell_size();
        assert!(worst <= tol, "{worst} > {tol}");
    }

    #[test]
    fn components_split_when_center_removed() {
        let sys = systems::vicsek();
        let cov = cover(&sys, &Word::empty(), 0.02).unwrap();
        let whole = cov.components(None);
        assert_eq!(whole.len(), 1, "vicsek cover is connected");
        let comps = cov.components(Some((c(0.5, 0.5), 3.0 * cov.cell_size())));
        assert_eq!(comps.len(), 4, "deleting the center splits the X into 4 arms");
    }

    #[test]
    fn pbm_has_expected_shape() {
        let sys = systems::segment();
        let cov = cover(&sys, &Word::empty(), 0.25).unwrap();
        let pbm = cov.pbm_string();
        let mut lines = pbm.lines();
        assert_eq!(lines.next(), Some("P1"));
        let dims: Vec<usize> = lines
            .next()
            .unwrap()
            .split(' ')
            .map(|t| t.parse().unwrap())
            .collect();
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), dims[1]);
        assert!(rows.iter().all(|r| r.len() == dims[0]));
        assert!(rows.iter().any(|r| r.contains('1')));
    }

    #[test]
    fn rescaling_preserves_area_and_error() {
        let sys = systems::gasket();
        let cov = cover(&sys, &Word::empty(), 0.25).unwrap();
        let fine = cov.rescaled_to(cov.cell_size() / 4.0).unwrap();
        assert_eq!(fine.len(), cov.len() * 16);
        assert_eq!(fine.error_bound(), cov.error_bound());
        assert!(cov.rescaled_to(cov.cell_size() / 3.0).is_err());
    }
}
