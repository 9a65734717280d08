//! Planar contracting similarities and finite systems of them.
//!
//! A similarity is kept in polar form `(ratio, rotation, reflect, shift)`
//! rather than as a 2x2 matrix, so the contraction ratio and rotation angle
//! can be read off exactly. The slope machinery divides by `log ratio`, and
//! recurrence detection compares rotations componentwise; neither survives a
//! round-trip through matrix entries.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::word::Word;

/// An orientation-preserving or -reversing similarity of the plane,
///
/// ```text
///   z ↦ ratio · e^{i·rotation} · z        + shift   (reflect = false)
///   z ↦ ratio · e^{i·rotation} · conj(z)  + shift   (reflect = true)
/// ```
///
/// Rotation is kept unnormalized while composing and reduced to `(-π, π]`
/// on read, which avoids branch-cut churn in long products.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Similarity {
    ratio: f64,
    rotation: f64,
    reflect: bool,
    shift: Complex64,
}

impl Similarity {
    /// A contracting similarity. Fails unless `ratio ∈ (0, 1)`.
    pub fn new(ratio: f64, rotation: f64, reflect: bool, shift: Complex64) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) || !ratio.is_finite() {
            return Err(Error::NonContracting { ratio });
        }
        Ok(Self::raw(ratio, rotation, reflect, shift))
    }

    /// Unvalidated constructor for derived maps (inverses, relative maps,
    /// the identity of an empty composition). `ratio` must be positive.
    pub(crate) fn raw(ratio: f64, rotation: f64, reflect: bool, shift: Complex64) -> Self {
        debug_assert!(ratio > 0.0);
        Similarity {
            ratio,
            rotation,
            reflect,
            shift,
        }
    }

    /// The identity map, flagged non-contracting (`ratio = 1`).
    pub fn identity() -> Self {
        Self::raw(1.0, 0.0, false, Complex64::new(0.0, 0.0))
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    /// Rotation angle normalized to `(-π, π]`.
    pub fn rotation(&self) -> f64 {
        normalize_angle(self.rotation)
    }

    pub fn is_reflecting(&self) -> bool {
        self.reflect
    }

    pub fn shift(&self) -> Complex64 {
        self.shift
    }

    pub fn is_contracting(&self) -> bool {
        self.ratio < 1.0
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        let w = if self.reflect { z.conj() } else { z };
        Complex64::from_polar(self.ratio, self.rotation) * w + self.shift
    }

    /// `self ∘ other`, i.e. `z ↦ self(other(z))`.
    ///
    /// Dihedral rule: a reflection in the outer map negates the inner
    /// rotation contribution.
    pub fn compose(&self, other: &Similarity) -> Similarity {
        let rotation = if self.reflect {
            self.rotation - other.rotation
        } else {
            self.rotation + other.rotation
        };
        Similarity::raw(
            self.ratio * other.ratio,
            rotation,
            self.reflect ^ other.reflect,
            self.apply(other.shift),
        )
    }

    /// The inverse similarity (expanding when `self` contracts).
    pub fn inverse(&self) -> Similarity {
        let ratio = 1.0 / self.ratio;
        if self.reflect {
            // z = conj(w - shift) e^{iθ} / r
            let rot = Complex64::from_polar(ratio, self.rotation);
            Similarity::raw(ratio, self.rotation, true, -(rot * self.shift.conj()))
        } else {
            let rot = Complex64::from_polar(ratio, -self.rotation);
            Similarity::raw(ratio, -self.rotation, false, -(rot * self.shift))
        }
    }

    /// The unique fixed point of a contracting map.
    ///
    /// Orientation-preserving: `shift / (1 - r e^{iθ})`. Reflective maps
    /// fix no complex-linear equation, so the 2x2 real system is solved
    /// directly (its determinant is `1 - r² > 0`).
    pub fn fixed_point(&self) -> Result<Complex64> {
        if !self.is_contracting() {
            return Err(Error::NonContracting { ratio: self.ratio });
        }
        if self.reflect {
            let a = self.ratio * self.rotation.cos();
            let b = self.ratio * self.rotation.sin();
            let det = 1.0 - self.ratio * self.ratio;
            let x = ((1.0 + a) * self.shift.re + b * self.shift.im) / det;
            let y = (b * self.shift.re + (1.0 - a) * self.shift.im) / det;
            Ok(Complex64::new(x, y))
        } else {
            let one = Complex64::new(1.0, 0.0);
            Ok(self.shift / (one - Complex64::from_polar(self.ratio, self.rotation)))
        }
    }

    /// Componentwise comparison on `(ratio, rotation, reflect, shift)`.
    /// Rotations are compared as angles (wrapped difference).
    pub fn approx_eq(&self, other: &Similarity, tol: f64) -> bool {
        self.reflect == other.reflect
            && (self.ratio - other.ratio).abs() <= tol * self.ratio.max(other.ratio).max(1.0)
            && angle_distance(self.rotation, other.rotation) <= tol
            && (self.shift - other.shift).norm() <= tol * (1.0 + self.shift.norm())
    }
}

/// Reduce an angle to `(-π, π]`.
pub fn normalize_angle(a: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut x = a % two_pi;
    if x <= -std::f64::consts::PI {
        x += two_pi;
    } else if x > std::f64::consts::PI {
        x -= two_pi;
    }
    x
}

/// Absolute distance between two angles on the circle.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    normalize_angle(a - b).abs()
}

/// An ordered system `S_1, …, S_m` of contracting similarities, `m ≥ 2`.
/// Letters of multiindices are 1-based positions into this list.
#[derive(Debug, Clone, PartialEq)]
pub struct SimSystem {
    maps: Vec<Similarity>,
}

impl SimSystem {
    pub fn new(maps: Vec<Similarity>) -> Result<Self> {
        if maps.len() < 2 {
            return Err(Error::InvalidSystem(format!(
                "need at least 2 maps, got {}",
                maps.len()
            )));
        }
        for (k, s) in maps.iter().enumerate() {
            if !s.is_contracting() {
                return Err(Error::InvalidSystem(format!(
                    "map {} is not contracting (ratio {})",
                    k + 1,
                    s.ratio()
                )));
            }
        }
        Ok(SimSystem { maps })
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        false // m ≥ 2 by construction
    }

    pub fn maps(&self) -> &[Similarity] {
        &self.maps
    }

    /// The map for a 1-based letter.
    pub fn map(&self, letter: u8) -> Result<&Similarity> {
        let idx = letter as usize;
        if idx == 0 || idx > self.maps.len() {
            return Err(Error::LetterOutOfRange {
                letter,
                m: self.maps.len(),
            });
        }
        Ok(&self.maps[idx - 1])
    }

    pub fn r_min(&self) -> f64 {
        self.maps.iter().map(|s| s.ratio()).fold(f64::MAX, f64::min)
    }

    pub fn r_max(&self) -> f64 {
        self.maps.iter().map(|s| s.ratio()).fold(0.0, f64::max)
    }

    /// `S_j = S_{j₁} ∘ S_{j₂} ∘ … ∘ S_{jₙ}`. The empty word composes to the
    /// identity, which downstream code treats as non-contracting.
    pub fn compose(&self, word: &Word) -> Result<Similarity> {
        let mut acc = Similarity::identity();
        for &letter in word.letters() {
            acc = acc.compose(self.map(letter)?);
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::Word;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn compose_two_gasket_letters() {
        let sys = crate::systems::gasket();
        let s = sys.compose(&Word::parse("12").unwrap()).unwrap();
        // S₁(S₂(z)) = (z/2 + 1/2)/2 = z/4 + 1/4
        assert!((s.ratio() - 0.25).abs() < 1e-15);
        assert!(s.rotation().abs() < 1e-15);
        assert!(!s.is_reflecting());
        assert!((s.shift() - c(0.25, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn compose_single_letter_is_the_map() {
        let sys = crate::systems::gasket();
        let s = sys.compose(&Word::parse("2").unwrap()).unwrap();
        assert_eq!(s, *sys.map(2).unwrap());
    }

    #[test]
    fn reflection_composed_with_itself_cancels() {
        // S₁(z) = conj(z)/2; S₁∘S₁(z) = z/4 with no reflection.
        let s1 = Similarity::new(0.5, 0.0, true, c(0.0, 0.0)).unwrap();
        let s11 = s1.compose(&s1);
        assert!(!s11.is_reflecting());
        assert!((s11.ratio() - 0.25).abs() < 1e-15);
        assert!(s11.rotation().abs() < 1e-15);
        assert!((s11.apply(c(0.8, -0.3)) - c(0.2, -0.075)).norm() < 1e-15);
    }

    #[test]
    fn compose_empty_word_is_identity_and_not_contracting() {
        let sys = crate::systems::gasket();
        let id = sys.compose(&Word::empty()).unwrap();
        assert!(!id.is_contracting());
        assert!(id.fixed_point().is_err());
        assert_eq!(id.apply(c(0.3, -0.7)), c(0.3, -0.7));
    }

    #[test]
    fn compose_rejects_bad_letter() {
        let sys = crate::systems::gasket();
        assert!(matches!(
            sys.compose(&Word::from_letters(vec![1, 9]).unwrap()),
            Err(Error::LetterOutOfRange { letter: 9, .. })
        ));
    }

    #[test]
    fn fixed_point_examples() {
        // S(z) = z/2 + 1/2 → 1
        let s = Similarity::new(0.5, 0.0, false, c(0.5, 0.0)).unwrap();
        assert!((s.fixed_point().unwrap() - c(1.0, 0.0)).norm() < 1e-15);

        // S(z) = conj(z)/2 → 0
        let s = Similarity::new(0.5, 0.0, true, c(0.0, 0.0)).unwrap();
        assert!(s.fixed_point().unwrap().norm() < 1e-15);

        // S(z) = iz/2 + 1 → 0.8 + 0.4i, checked as s(z₀) = z₀ too
        let s = Similarity::new(0.5, PI / 2.0, false, c(1.0, 0.0)).unwrap();
        let z0 = s.fixed_point().unwrap();
        assert!((z0 - c(0.8, 0.4)).norm() < 1e-12);
        assert!((s.apply(z0) - z0).norm() < 1e-15);
    }

    #[test]
    fn reflective_fixed_point_is_fixed() {
        let s = Similarity::new(0.6, 1.1, true, c(0.4, -0.2)).unwrap();
        let z0 = s.fixed_point().unwrap();
        assert!((s.apply(z0) - z0).norm() < 1e-14);
    }

    #[test]
    fn inverse_undoes_map() {
        for &(refl, th) in &[(false, 0.7), (true, -2.1), (false, PI), (true, 0.0)] {
            let s = Similarity::new(0.37, th, refl, c(0.2, 0.9)).unwrap();
            let inv = s.inverse();
            let z = c(-0.4, 1.3);
            assert!((inv.apply(s.apply(z)) - z).norm() < 1e-14);
            assert!((s.apply(inv.apply(z)) - z).norm() < 1e-14);
            let both = inv.compose(&s);
            assert!(both.approx_eq(&Similarity::identity(), 1e-12));
        }
    }

    #[test]
    fn similarity_scales_distances_exactly_by_ratio() {
        let s = Similarity::new(0.62, 2.3, true, c(1.0, -0.5)).unwrap();
        let (a, b) = (c(0.1, 0.2), c(-0.7, 0.9));
        let before = (a - b).norm();
        let after = (s.apply(a) - s.apply(b)).norm();
        assert!((after / before - 0.62).abs() < 1e-14);
    }

    #[test]
    fn angle_normalization_range() {
        assert!((normalize_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((normalize_angle(-PI) - PI).abs() < 1e-12);
        assert!(normalize_angle(0.1) == 0.1);
        assert!(angle_distance(PI - 0.05, -PI + 0.05) < 0.1 + 1e-12);
    }

    #[test]
    fn system_requires_two_maps() {
        let s = Similarity::new(0.5, 0.0, false, c(0.0, 0.0)).unwrap();
        assert!(SimSystem::new(vec![s]).is_err());
    }
}
