//! A small zoo of classic systems used throughout the tests, examples and
//! bundled spec files.

use num_complex::Complex64;

use crate::sim::{Similarity, SimSystem};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn direct(ratio: f64, shift: Complex64) -> Similarity {
    Similarity::new(ratio, 0.0, false, shift).unwrap()
}

/// Sierpinski gasket: `S_k(z) = z/2 + v_k/2` with vertices
/// `v = 0, 1, (1 + i√3)/2`. Three pairwise contacts at edge midpoints;
/// contains simple closed curves.
pub fn gasket() -> SimSystem {
    SimSystem::new(vec![
        direct(0.5, c(0.0, 0.0)),
        direct(0.5, c(0.5, 0.0)),
        direct(0.5, c(0.25, 3f64.sqrt() / 4.0)),
    ])
    .unwrap()
}

/// The diagonal ("X") Vicsek fractal: four corner maps and a center map,
/// all with ratio 1/3. Fixed points sit at the unit square's corners and
/// center; the attractor is a dendrite made of the two diagonals repeated.
pub fn vicsek() -> SimSystem {
    SimSystem::new(vec![
        direct(1.0 / 3.0, c(0.0, 0.0)),
        direct(1.0 / 3.0, c(2.0 / 3.0, 0.0)),
        direct(1.0 / 3.0, c(0.0, 2.0 / 3.0)),
        direct(1.0 / 3.0, c(2.0 / 3.0, 2.0 / 3.0)),
        direct(1.0 / 3.0, c(1.0 / 3.0, 1.0 / 3.0)),
    ])
    .unwrap()
}

/// Vicsek variant whose center map rotates by π/2 while keeping the same
/// fixed point (1/2, 1/2). The corner contacts survive the twist.
pub fn rotated_vicsek() -> SimSystem {
    SimSystem::new(vec![
        direct(1.0 / 3.0, c(0.0, 0.0)),
        direct(1.0 / 3.0, c(2.0 / 3.0, 0.0)),
        direct(1.0 / 3.0, c(0.0, 2.0 / 3.0)),
        direct(1.0 / 3.0, c(2.0 / 3.0, 2.0 / 3.0)),
        // t = fix · (1 - e^{iπ/2}/3) with fix = (1+i)/2, i.e. (2+i)/3
        Similarity::new(
            1.0 / 3.0,
            std::f64::consts::FRAC_PI_2,
            false,
            c(2.0 / 3.0, 1.0 / 3.0),
        )
        .unwrap(),
    ])
    .unwrap()
}

/// Strongly separated middle-thirds pair: `z/3` and `z/3 + 2/3`.
/// The attractor is the Cantor set in [0, 1]; the pieces are 1/3 apart.
pub fn cantor_pair() -> SimSystem {
    SimSystem::new(vec![direct(1.0 / 3.0, c(0.0, 0.0)), direct(1.0 / 3.0, c(2.0 / 3.0, 0.0))]).unwrap()
}

/// Two maps with ratio 0.7 whose pieces share the whole segment
/// [0.3, 0.7]: the standard non-FI overlap example.
pub fn overlap_pair() -> SimSystem {
    SimSystem::new(vec![direct(0.7, c(0.0, 0.0)), direct(0.7, c(0.3, 0.0))]).unwrap()
}

/// The segment [0, 1] as the attractor of `z/2` and `z/2 + 1/2`:
/// one contact point at 1/2, the simplest dendrite.
pub fn segment() -> SimSystem {
    SimSystem::new(vec![direct(0.5, c(0.0, 0.0)), direct(0.5, c(0.5, 0.0))]).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_points_of_vicsek_are_square_corners_and_center() {
        let sys = vicsek();
        let expect = [
            c(0.0, 0.0),
            c(1.0, 0.0),
            c(0.0, 1.0),
            c(1.0, 1.0),
            c(0.5, 0.5),
        ];
        for (k, want) in expect.iter().enumerate() {
            let got = sys.maps()[k].fixed_point().unwrap();
            assert!((got - want).norm() < 1e-14, "map {}: {} vs {}", k + 1, got, want);
        }
    }

    #[test]
    fn rotated_vicsek_center_keeps_fixed_point() {
        let sys = rotated_vicsek();
        let got = sys.maps()[4].fixed_point().unwrap();
        assert!((got - c(0.5, 0.5)).norm() < 1e-14);
    }
}
