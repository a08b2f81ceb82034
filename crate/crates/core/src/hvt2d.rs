//! The explicit hidden-variable model for two-dimensional Hilbert space.
//!
//! States and rank-1 projectors are Bloch directions; the quantum probability
//! that the projector along `m` is true in the state along `n` is
//! ½(1 + n·m). Completing the state with a hidden variable λ, uniform on
//! [-1/2, 1/2], the model assigns the definite value
//!
//! ```text
//! V = ½ · [1 + Sign(λ + ½·|n·m|·Sign(n·m))]
//! ```
//!
//! with the convention Sign(0) = +1. Averaging V over λ reproduces the
//! quantum probability exactly, which is what this module verifies both in
//! closed form and by Monte Carlo.
//!
//! This is the one floating-point corner of the crate: unit vectors on the
//! sphere are irrational in general, so identities hold to 1e-12 rather than
//! exactly.

use serde_json::{json, Value};
use thiserror::Error;

use crate::rng::RandomSource;

/// Tolerance for the unit-norm invariant and the analytic identities.
pub const UNIT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HvtError {
    #[error("vector has squared norm {0}, expected 1 within {UNIT_TOLERANCE}")]
    NotUnit(f64),
    #[error("cannot normalize a zero-length vector")]
    ZeroLength,
    #[error("hidden variable {0} is outside [-1/2, 1/2]")]
    LambdaOutOfRange(f64),
}

/// A Bloch-sphere direction: a real unit 3-vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVec3 {
    x: f64,
    y: f64,
    z: f64,
}

impl UnitVec3 {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self, HvtError> {
        let norm_sq = x * x + y * y + z * z;
        if (norm_sq - 1.0).abs() > UNIT_TOLERANCE {
            return Err(HvtError::NotUnit(norm_sq));
        }
        Ok(Self { x, y, z })
    }

    /// Rescales an arbitrary nonzero vector onto the sphere.
    pub fn normalized(x: f64, y: f64, z: f64) -> Result<Self, HvtError> {
        let norm = (x * x + y * y + z * z).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(HvtError::ZeroLength);
        }
        Self::new(x / norm, y / norm, z / norm)
    }

    pub fn coords(&self) -> (f64, f64, f64) {
        (self.x, self.y, self.z)
    }

    pub fn dot(&self, other: &UnitVec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }
}

/// The completing variable λ ∈ [-1/2, 1/2].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HiddenVar {
    lambda: f64,
}

impl HiddenVar {
    pub fn new(lambda: f64) -> Result<Self, HvtError> {
        if !(-0.5..=0.5).contains(&lambda) {
            return Err(HvtError::LambdaOutOfRange(lambda));
        }
        Ok(Self { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

fn sign(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Quantum probability that the projector along `m` is true in the state
/// along `n`: ½(1 + n·m).
pub fn born_prob(n: &UnitVec3, m: &UnitVec3) -> f64 {
    0.5 * (1.0 + n.dot(m))
}

/// The model's definite 0/1 value for the projector along `m`, in the
/// completed state (n, λ). Total: Sign(0) = +1.
pub fn hvt_value(n: &UnitVec3, m: &UnitVec3, h: HiddenVar) -> u8 {
    let nm = n.dot(m);
    let v = 0.5 * (1.0 + sign(h.lambda() + 0.5 * nm.abs() * sign(nm)));
    v as u8
}

/// Exact λ-measure of `{λ : hvt_value = 1}` under the uniform distribution:
/// the length of the part of [-1/2, 1/2] where λ + ½(n·m) > 0. Equals the
/// quantum probability up to the measure-zero Sign(0) convention.
pub fn hvt_prob_analytic(n: &UnitVec3, m: &UnitVec3) -> f64 {
    let nm = n.dot(m);
    let cutoff = -0.5 * nm.abs() * sign(nm);
    (0.5 - cutoff.max(-0.5)).max(0.0)
}

/// Monte Carlo estimate of the λ-average of `hvt_value`, with its binomial
/// standard error. Deterministic given the seed.
pub fn hvt_prob_mc(n: &UnitVec3, m: &UnitVec3, samples: u64, seed: u64) -> (f64, f64) {
    assert!(samples >= 1, "at least one sample required");
    let mut rng = RandomSource::from_seed(seed);
    let mut ones = 0u64;
    for _ in 0..samples {
        let lambda = rng.unit_f64() - 0.5;
        let h = HiddenVar::new(lambda).expect("draw lies in range");
        ones += u64::from(hvt_value(n, m, h));
    }
    let estimate = ones as f64 / samples as f64;
    let std_error = (estimate * (1.0 - estimate) / samples as f64).sqrt();
    (estimate, std_error)
}

/// One verification row: a direction pair and everything compared about it.
#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub n_dot_m: f64,
    pub analytic: f64,
    pub born: f64,
    pub mc_estimate: f64,
    pub std_error: f64,
}

impl GridRow {
    pub fn to_json_value(&self) -> Value {
        json!({
            "nDotM": self.n_dot_m,
            "analytic": self.analytic,
            "born": self.born,
            "mcEstimate": self.mc_estimate,
            "stdError": self.std_error,
        })
    }
}

/// Deterministic grid of direction pairs whose overlaps sweep [-1, 1],
/// hitting -1, 0, and +1 exactly when `pairs` is odd.
pub fn verification_grid(pairs: usize) -> Vec<(UnitVec3, UnitVec3)> {
    assert!(pairs >= 2, "a grid needs at least two pairs");
    const GOLDEN_ANGLE: f64 = 2.399963229728653;
    let mut grid = Vec::with_capacity(pairs);
    for j in 0..pairs {
        let target = -1.0 + 2.0 * j as f64 / (pairs - 1) as f64;
        // spread the base directions over the sphere
        let polar = std::f64::consts::PI * (j as f64 + 0.5) / pairs as f64;
        let azimuth = GOLDEN_ANGLE * j as f64;
        let n = UnitVec3::new(
            polar.sin() * azimuth.cos(),
            polar.sin() * azimuth.sin(),
            polar.cos(),
        )
        .expect("spherical coordinates give unit vectors");
        // an orthonormal partner for n, seeded away from alignment
        let helper = if n.z.abs() < 0.9 {
            (0.0, 0.0, 1.0)
        } else {
            (1.0, 0.0, 0.0)
        };
        let proj = n.x * helper.0 + n.y * helper.1 + n.z * helper.2;
        let u = UnitVec3::normalized(
            helper.0 - proj * n.x,
            helper.1 - proj * n.y,
            helper.2 - proj * n.z,
        )
        .expect("helper is never parallel to n");
        let ortho = (1.0 - target * target).max(0.0).sqrt();
        let m = UnitVec3::normalized(
            target * n.x + ortho * u.x,
            target * n.y + ortho * u.y,
            target * n.z + ortho * u.z,
        )
        .expect("unit combination of an orthonormal pair");
        grid.push((n, m));
    }
    grid
}

/// Runs the verification grid: analytic value, quantum value, and a seeded
/// Monte Carlo estimate per pair. Row `j` uses the derived seed `(seed, j)`.
pub fn verification_table(pairs: usize, samples: u64, seed: u64) -> Vec<GridRow> {
    verification_grid(pairs)
        .into_iter()
        .enumerate()
        .map(|(j, (n, m))| {
            let mut row_rng = RandomSource::derived(seed, j as u64);
            let mut ones = 0u64;
            for _ in 0..samples {
                let lambda = row_rng.unit_f64() - 0.5;
                let h = HiddenVar::new(lambda).expect("draw lies in range");
                ones += u64::from(hvt_value(&n, &m, h));
            }
            let mc_estimate = ones as f64 / samples as f64;
            let std_error = (mc_estimate * (1.0 - mc_estimate) / samples as f64).sqrt();
            GridRow {
                n_dot_m: n.dot(&m),
                analytic: hvt_prob_analytic(&n, &m),
                born: born_prob(&n, &m),
                mc_estimate,
                std_error,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn z() -> UnitVec3 {
        UnitVec3::new(0.0, 0.0, 1.0).unwrap()
    }

    fn x() -> UnitVec3 {
        UnitVec3::new(1.0, 0.0, 0.0).unwrap()
    }

    fn minus_z() -> UnitVec3 {
        UnitVec3::new(0.0, 0.0, -1.0).unwrap()
    }

    #[test]
    fn unit_constructor_enforces_norm() {
        assert!(UnitVec3::new(1.0, 1.0, 0.0).is_err());
        assert!(UnitVec3::normalized(1.0, 1.0, 0.0).is_ok());
        assert!(UnitVec3::normalized(0.0, 0.0, 0.0).is_err());
        assert!(HiddenVar::new(0.5).is_ok());
        assert!(HiddenVar::new(-0.5).is_ok());
        assert!(HiddenVar::new(0.6).is_err());
    }

    #[test]
    fn born_examples() {
        assert_eq!(born_prob(&z(), &z()), 1.0);
        assert_eq!(born_prob(&z(), &minus_z()), 0.0);
        assert_eq!(born_prob(&z(), &x()), 0.5);
    }

    #[test]
    fn value_examples() {
        let at = |lambda: f64| HiddenVar::new(lambda).unwrap();
        // aligned: argument is +1/2
        assert_eq!(hvt_value(&z(), &z(), at(0.0)), 1);
        // anti-aligned: argument is -1/2
        assert_eq!(hvt_value(&z(), &minus_z(), at(0.0)), 0);
        // zero overlap: threshold sits at λ = 0 under Sign(0) = +1
        assert_eq!(hvt_value(&z(), &x(), at(-0.3)), 0);
        assert_eq!(hvt_value(&z(), &x(), at(0.3)), 1);
        assert_eq!(hvt_value(&z(), &x(), at(0.0)), 1);
    }

    #[test]
    fn analytic_examples() {
        assert!((hvt_prob_analytic(&z(), &z()) - 1.0).abs() < UNIT_TOLERANCE);
        // overlap -0.6: value is 1 on [0.3, 0.5], length 0.2
        let m = UnitVec3::new(0.8, 0.0, -0.6).unwrap();
        assert!((hvt_prob_analytic(&z(), &m) - 0.2).abs() < UNIT_TOLERANCE);
        assert!((born_prob(&z(), &m) - 0.2).abs() < UNIT_TOLERANCE);
    }

    #[test]
    fn analytic_matches_born_on_grid() {
        for (n, m) in verification_grid(101) {
            let gap = (hvt_prob_analytic(&n, &m) - born_prob(&n, &m)).abs();
            assert!(gap < UNIT_TOLERANCE, "gap {gap} at overlap {}", n.dot(&m));
        }
    }

    #[test]
    fn grid_covers_the_overlap_range() {
        let grid = verification_grid(101);
        let overlaps: Vec<f64> = grid.iter().map(|(n, m)| n.dot(m)).collect();
        assert!((overlaps[0] + 1.0).abs() < 1e-9);
        assert!((overlaps[50]).abs() < 1e-9);
        assert!((overlaps[100] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn mc_aligned_is_exactly_one() {
        let (estimate, std_error) = hvt_prob_mc(&z(), &z(), 10_000, 4);
        assert_eq!(estimate, 1.0);
        assert_eq!(std_error, 0.0);
    }

    #[test]
    fn mc_tracks_analytic_values() {
        let samples = 100_000;
        // zero overlap
        let (est, se) = hvt_prob_mc(&z(), &x(), samples, 21);
        assert!((est - 0.5).abs() < 4.0 * se);
        // overlap 0.8: analytic value 0.9
        let m = UnitVec3::new(0.6, 0.0, 0.8).unwrap();
        let (est, se) = hvt_prob_mc(&z(), &m, samples, 22);
        assert!((est - 0.9).abs() < 4.0 * se);
    }

    #[test]
    fn mc_is_deterministic_per_seed() {
        let a = hvt_prob_mc(&z(), &x(), 10_000, 5);
        let b = hvt_prob_mc(&z(), &x(), 10_000, 5);
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn value_is_monotone_in_lambda(
            polar in 0.0..std::f64::consts::PI,
            azimuth in 0.0..(2.0 * std::f64::consts::PI),
            l1 in -0.5..0.5,
            l2 in -0.5..0.5,
        ) {
            let m = UnitVec3::new(
                polar.sin() * azimuth.cos(),
                polar.sin() * azimuth.sin(),
                polar.cos(),
            ).unwrap();
            let (lo, hi) = if l1 <= l2 { (l1, l2) } else { (l2, l1) };
            let v_lo = hvt_value(&z(), &m, HiddenVar::new(lo).unwrap());
            let v_hi = hvt_value(&z(), &m, HiddenVar::new(hi).unwrap());
            prop_assert!(v_lo <= v_hi);
        }

        #[test]
        fn value_is_total_and_repeatable(
            polar in 0.0..std::f64::consts::PI,
            lambda in -0.5..0.5,
        ) {
            let m = UnitVec3::new(polar.sin(), 0.0, polar.cos()).unwrap();
            let h = HiddenVar::new(lambda).unwrap();
            let v = hvt_value(&z(), &m, h);
            prop_assert!(v == 0 || v == 1);
            prop_assert_eq!(v, hvt_value(&z(), &m, h));
        }
    }
}
