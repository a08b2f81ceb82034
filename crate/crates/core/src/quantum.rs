//! Exact outcome probabilities for two parties measuring a shared maximally
//! entangled 4-dimensional state in bases drawn from a vector set.
//!
//! Everything is rational: rays have integer coordinates, so the squared
//! overlap (u·v)²/(‖u‖²‖v‖²) never leaves ℚ, and the joint outcome law
//! ¼·overlap per cell is exact. Perfection of the entangled protocol is a
//! statement about exact zeros, not floating-point small numbers.
//!
//! The state is expressible in any of the set's bases because each basis is
//! real and orthogonal; [`completeness_check`] verifies the resolution of the
//! identity that underwrites that re-expression.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::ks::{IntVec4, KsError, KsSet};
use crate::rng::RandomSource;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuantumError {
    #[error("probability {0} is outside [0, 1]")]
    OutOfRange(String),
    #[error("probability denominator is zero")]
    ZeroDenominator,
    #[error("cannot parse {0:?} as a probability (expected \"num/den\" or \"num\")")]
    Parse(String),
    #[error(transparent)]
    Set(#[from] KsError),
    #[error("basis {index} fails the completeness check")]
    IncompleteBasis { index: usize },
    #[error("distribution entries sum to {0}, expected 1")]
    NotNormalized(String),
    #[error("both halves of the entangled pair are already measured")]
    AlreadyMeasured,
}

/// A probability as an exact non-negative rational in [0, 1], kept in lowest
/// terms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactProb(BigRational);

impl ExactProb {
    pub fn new(num: u64, den: u64) -> Result<Self, QuantumError> {
        if den == 0 {
            return Err(QuantumError::ZeroDenominator);
        }
        Self::from_ratio(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_ratio(ratio: BigRational) -> Result<Self, QuantumError> {
        if ratio.is_negative() || ratio > BigRational::one() {
            return Err(QuantumError::OutOfRange(format_ratio(&ratio)));
        }
        Ok(Self(ratio))
    }

    pub fn zero() -> Self {
        Self(BigRational::zero())
    }

    pub fn one() -> Self {
        Self(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Canonical `"num/den"` rendering, e.g. `"35/36"`, `"0/1"`, `"1/1"`.
    pub fn fraction(&self) -> String {
        format_ratio(&self.0)
    }

    pub fn complement(&self) -> Self {
        Self(BigRational::one() - &self.0)
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0)
    }

    /// Sum, rejecting results above 1.
    pub fn try_add(&self, other: &Self) -> Result<Self, QuantumError> {
        Self::from_ratio(&self.0 + &other.0)
    }
}

fn format_ratio(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

impl fmt::Display for ExactProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.fraction())
    }
}

impl FromStr for ExactProb {
    type Err = QuantumError;

    fn from_str(s: &str) -> Result<Self, QuantumError> {
        let parse = |t: &str| BigInt::from_str(t.trim()).map_err(|_| QuantumError::Parse(s.into()));
        let ratio = match s.split_once('/') {
            Some((num, den)) => {
                let den = parse(den)?;
                if den.is_zero() {
                    return Err(QuantumError::ZeroDenominator);
                }
                BigRational::new(parse(num)?, den)
            }
            None => BigRational::from(parse(s)?),
        };
        Self::from_ratio(ratio)
    }
}

/// Probability that measuring along `u` collapses onto `v`:
/// (u·v)² / (‖u‖²·‖v‖²), exactly.
pub fn overlap_prob(u: &IntVec4, v: &IntVec4) -> ExactProb {
    let d = u.dot(v);
    let ratio = BigRational::new(BigInt::from(d * d), BigInt::from(u.norm_sq() * v.norm_sq()));
    ExactProb::from_ratio(ratio).expect("squared overlap is within [0,1] by Cauchy-Schwarz")
}

/// True iff Σᵢ uᵢuᵢᵀ/‖uᵢ‖² is exactly the 4×4 identity.
///
/// Takes raw 4-tuples so that deficient candidates (repeats, rank loss) can
/// be probed, not only valid bases.
pub fn completeness_check(vectors: &[IntVec4; 4]) -> bool {
    let mut matrix: Vec<Vec<BigRational>> = vec![vec![BigRational::zero(); 4]; 4];
    for u in vectors {
        let coords = u.coords();
        let norm = BigInt::from(u.norm_sq());
        for (r, row) in matrix.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell += BigRational::new(BigInt::from(coords[r] * coords[c]), norm.clone());
            }
        }
    }
    matrix.iter().enumerate().all(|(r, row)| {
        row.iter().enumerate().all(|(c, cell)| {
            if r == c {
                cell.is_one()
            } else {
                cell.is_zero()
            }
        })
    })
}

/// The exact 4×4 joint outcome law for one party measuring in `alice_basis`
/// and the other in `bob_basis`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointDistribution {
    alice_basis: usize,
    bob_basis: usize,
    probs: [[ExactProb; 4]; 4],
}

impl JointDistribution {
    /// Builds a distribution from explicit cells, enforcing normalization.
    pub fn from_probs(
        alice_basis: usize,
        bob_basis: usize,
        probs: [[ExactProb; 4]; 4],
    ) -> Result<Self, QuantumError> {
        let total: BigRational = probs.iter().flatten().map(|p| p.ratio().clone()).sum();
        if !total.is_one() {
            return Err(QuantumError::NotNormalized(format_ratio(&total)));
        }
        Ok(Self {
            alice_basis,
            bob_basis,
            probs,
        })
    }

    pub fn alice_basis(&self) -> usize {
        self.alice_basis
    }

    pub fn bob_basis(&self) -> usize {
        self.bob_basis
    }

    pub fn prob(&self, alice_slot: usize, bob_slot: usize) -> &ExactProb {
        &self.probs[alice_slot][bob_slot]
    }

    /// Alice's marginal for outcome `alice_slot`.
    pub fn row_sum(&self, alice_slot: usize) -> BigRational {
        self.probs[alice_slot]
            .iter()
            .map(|p| p.ratio().clone())
            .sum()
    }

    /// Bob's marginal for outcome `bob_slot`.
    pub fn col_sum(&self, bob_slot: usize) -> BigRational {
        self.probs
            .iter()
            .map(|row| row[bob_slot].ratio().clone())
            .sum()
    }

    pub fn to_json_value(&self) -> Value {
        json!({
            "aliceBasis": self.alice_basis + 1,
            "bobBasis": self.bob_basis + 1,
            "probs": self.probs.iter()
                .map(|row| row.iter().map(|p| p.fraction()).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        })
    }
}

/// Joint outcome law for the maximally entangled state measured in two of the
/// set's bases: cell (i, j) carries ¼·overlap(uᵢ, vⱼ).
///
/// Fails if either basis fails the completeness check, since re-expressing
/// the state in that basis would then be invalid.
pub fn joint_distribution(
    set: &KsSet,
    alice_basis: usize,
    bob_basis: usize,
) -> Result<JointDistribution, QuantumError> {
    let alice = set.basis(alice_basis)?;
    let bob = set.basis(bob_basis)?;
    for (index, basis) in [(alice_basis, alice), (bob_basis, bob)] {
        if !completeness_check(basis.vectors()) {
            return Err(QuantumError::IncompleteBasis { index });
        }
    }
    let quarter = BigRational::new(BigInt::one(), BigInt::from(4));
    let probs = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let overlap = overlap_prob(alice.vector(i), bob.vector(j));
            ExactProb::from_ratio(&quarter * overlap.ratio())
                .expect("quarter of an overlap is within [0,1]")
        })
    });
    JointDistribution::from_probs(alice_basis, bob_basis, probs)
}

fn common_denominator_thresholds(probs: &[&ExactProb]) -> (u128, Vec<u128>) {
    let lcm = probs
        .iter()
        .fold(BigInt::one(), |acc, p| acc.lcm(p.ratio().denom()));
    let lcm_u128 = lcm
        .to_u128()
        .expect("bounded coordinates keep the common denominator within 128 bits");
    let scaled = probs
        .iter()
        .map(|p| {
            let num = p.ratio().numer() * (&lcm / p.ratio().denom());
            num.to_u128()
                .expect("scaled numerator fits alongside its denominator")
        })
        .collect();
    (lcm_u128, scaled)
}

/// Draws one (alice_slot, bob_slot) pair with cell probabilities exactly
/// those of `d`: inverse-CDF over the 16 cells in row-major order against a
/// uniform draw at the cells' common denominator.
pub fn sample_joint(d: &JointDistribution, rng: &mut RandomSource) -> (usize, usize) {
    let cells: Vec<&ExactProb> = d.probs.iter().flatten().collect();
    let (total, scaled) = common_denominator_thresholds(&cells);
    debug_assert_eq!(scaled.iter().sum::<u128>(), total);
    let mut draw = rng.uniform_below(total);
    for (k, &mass) in scaled.iter().enumerate() {
        if draw < mass {
            return (k / 4, k % 4);
        }
        draw -= mass;
    }
    unreachable!("normalized cells cover every draw")
}

/// Simulator for one shared maximally entangled pair.
///
/// The first measurement on either half collapses uniformly over its basis;
/// the second samples the exact conditional given the first. The resulting
/// joint law equals [`joint_distribution`] of the two bases, whichever half
/// measures first.
#[derive(Debug)]
pub struct EntangledPair<'a> {
    set: &'a KsSet,
    rng: RandomSource,
    first: Option<(usize, usize)>,
    done: bool,
}

impl<'a> EntangledPair<'a> {
    pub fn new(set: &'a KsSet, rng: RandomSource) -> Self {
        Self {
            set,
            rng,
            first: None,
            done: false,
        }
    }

    /// Measures one half in the given basis, returning the collapsed slot.
    /// At most two measurements per pair, one per half.
    pub fn measure(&mut self, basis: usize) -> Result<usize, QuantumError> {
        if self.done {
            return Err(QuantumError::AlreadyMeasured);
        }
        let basis_ref = self.set.basis(basis)?;
        match self.first {
            None => {
                let slot = self.rng.uniform_below(4) as usize;
                self.first = Some((basis, slot));
                Ok(slot)
            }
            Some((first_basis, first_slot)) => {
                self.done = true;
                let collapsed = self.set.basis(first_basis)?.vector(first_slot);
                let conditional: Vec<ExactProb> = basis_ref
                    .vectors()
                    .iter()
                    .map(|v| overlap_prob(collapsed, v))
                    .collect();
                let refs: Vec<&ExactProb> = conditional.iter().collect();
                let (total, scaled) = common_denominator_thresholds(&refs);
                debug_assert_eq!(scaled.iter().sum::<u128>(), total);
                let mut draw = self.rng.uniform_below(total);
                for (slot, &mass) in scaled.iter().enumerate() {
                    if draw < mass {
                        return Ok(slot);
                    }
                    draw -= mass;
                }
                unreachable!("conditional masses cover every draw")
            }
        }
    }
}
