//! Noncontextual and contextual 0/1 valuations of a vector set.
//!
//! A noncontextual assignment gives every distinct ray one bit; it satisfies
//! the set when every basis carries exactly one 1. The exhaustive search
//! enumerates all such assignments with per-basis pruning, and the parity
//! certificate proves emptiness without enumeration whenever the basis count
//! is odd and every ray occurs an even number of times: summing the
//! one-per-basis equations then yields an even left side against an odd right
//! side.
//!
//! Contextual assignments value each (basis, slot) occurrence instead, still
//! with exactly one 1 per basis. The minimum-contextuality search finds how
//! few rays must take different values in their two occurrences.

use std::collections::BTreeMap;

use serde_json::{json, Value};
use thiserror::Error;

use crate::ks::{CanonicalVec, KsSet};

/// Sets with more than 2^24 raw assignments are refused.
pub const MAX_SEARCH_VECTORS: usize = 24;
/// Contextual enumerations beyond 4^12 choice tuples are refused.
pub const MAX_CONTEXT_BASES: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ColoringError {
    #[error("assignment domain does not match the set's {expected} distinct rays (got {got})")]
    DomainMismatch { expected: usize, got: usize },
    #[error("set has {0} distinct rays; exhaustive search is capped at {MAX_SEARCH_VECTORS}")]
    TooManyVectors(usize),
    #[error("set has {0} bases; contextual enumeration is capped at {MAX_CONTEXT_BASES}")]
    TooManyBases(usize),
    #[error(
        "ray {0} occurs {1} times; the contextual search needs every ray to occur once or twice"
    )]
    UnsupportedOccurrences(CanonicalVec, usize),
}

/// One bit per distinct ray, independent of the basis it appears in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NcAssignment {
    values: BTreeMap<CanonicalVec, bool>,
}

impl NcAssignment {
    pub fn new(values: BTreeMap<CanonicalVec, bool>) -> Self {
        Self { values }
    }

    /// Builds an assignment over `set`'s distinct rays from bits in
    /// first-appearance order.
    pub fn from_bits(set: &KsSet, bits: &[bool]) -> Result<Self, ColoringError> {
        if bits.len() != set.distinct().len() {
            return Err(ColoringError::DomainMismatch {
                expected: set.distinct().len(),
                got: bits.len(),
            });
        }
        Ok(Self {
            values: set
                .distinct()
                .iter()
                .copied()
                .zip(bits.iter().copied())
                .collect(),
        })
    }

    pub fn value(&self, v: &CanonicalVec) -> Option<bool> {
        self.values.get(v).copied()
    }

    pub fn values(&self) -> &BTreeMap<CanonicalVec, bool> {
        &self.values
    }

    pub fn to_json_value(&self) -> Value {
        self.values
            .iter()
            .map(|(v, &b)| (v.to_string(), json!(u8::from(b))))
            .collect::<serde_json::Map<_, _>>()
            .into()
    }
}

/// True iff every basis of `set` holds exactly one ray valued 1.
///
/// The assignment's domain must be exactly the set's distinct rays.
pub fn satisfies(assignment: &NcAssignment, set: &KsSet) -> Result<bool, ColoringError> {
    let distinct = set.distinct();
    if assignment.values.len() != distinct.len()
        || !distinct.iter().all(|v| assignment.values.contains_key(v))
    {
        return Err(ColoringError::DomainMismatch {
            expected: distinct.len(),
            got: assignment.values.len(),
        });
    }
    for bi in 0..set.num_bases() {
        let ones = (0..4)
            .filter(|&s| assignment.values[set.canonical_at(bi, s)])
            .count();
        if ones != 1 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Exhaustively enumerates every satisfying noncontextual assignment.
///
/// Distinct rays are assigned in first-appearance order; a partial assignment
/// is pruned as soon as some basis carries two 1s, or a fully-assigned basis
/// carries none. Results come out in lexicographic order of the bit tuple
/// (0 before 1).
pub fn search_noncontextual(set: &KsSet) -> Result<Vec<NcAssignment>, ColoringError> {
    let n = set.distinct().len();
    if n > MAX_SEARCH_VECTORS {
        return Err(ColoringError::TooManyVectors(n));
    }
    let occurrences = set.occurrence_lists();
    let mut ones = vec![0u8; set.num_bases()];
    let mut assigned = vec![0u8; set.num_bases()];
    let mut bits = vec![false; n];
    let mut found = Vec::new();

    struct Dfs<'a> {
        occurrences: &'a [Vec<(usize, usize)>],
        ones: &'a mut [u8],
        assigned: &'a mut [u8],
        bits: &'a mut [bool],
        found: &'a mut Vec<Vec<bool>>,
    }

    impl Dfs<'_> {
        fn go(&mut self, id: usize) {
            if id == self.bits.len() {
                self.found.push(self.bits.to_vec());
                return;
            }
            for value in [false, true] {
                self.bits[id] = value;
                let mut viable = true;
                for &(basis, _) in &self.occurrences[id] {
                    self.assigned[basis] += 1;
                    if value {
                        self.ones[basis] += 1;
                    }
                    if self.ones[basis] > 1 || (self.assigned[basis] == 4 && self.ones[basis] == 0)
                    {
                        viable = false;
                    }
                }
                if viable {
                    self.go(id + 1);
                }
                for &(basis, _) in &self.occurrences[id] {
                    self.assigned[basis] -= 1;
                    if value {
                        self.ones[basis] -= 1;
                    }
                }
            }
        }
    }

    let mut raw = Vec::new();
    Dfs {
        occurrences,
        ones: &mut ones,
        assigned: &mut assigned,
        bits: &mut bits,
        found: &mut raw,
    }
    .go(0);

    for bits in raw {
        found.push(NcAssignment::from_bits(set, &bits)?);
    }
    Ok(found)
}

/// Witness that no satisfying noncontextual assignment can exist: an odd
/// number of per-basis equations whose left sides count every ray an even
/// number of times.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityCertificate {
    basis_count: usize,
    occurrence_counts: BTreeMap<CanonicalVec, usize>,
}

impl ParityCertificate {
    pub fn basis_count(&self) -> usize {
        self.basis_count
    }

    pub fn occurrence_counts(&self) -> &BTreeMap<CanonicalVec, usize> {
        &self.occurrence_counts
    }

    pub fn to_json_value(&self) -> Value {
        json!({
            "basisCount": self.basis_count,
            "occurrenceCounts": self.occurrence_counts.iter()
                .map(|(v, n)| (v.to_string(), json!(n)))
                .collect::<serde_json::Map<_, _>>(),
        })
    }
}

/// Returns a certificate iff the basis count is odd and every occurrence
/// count is even. `None` does not imply satisfiability.
pub fn parity_certificate(set: &KsSet) -> Option<ParityCertificate> {
    if set.num_bases().is_multiple_of(2) {
        return None;
    }
    let counts: BTreeMap<CanonicalVec, usize> = set
        .distinct()
        .iter()
        .copied()
        .zip(set.occurrence_lists().iter().map(Vec::len))
        .collect();
    if counts.values().any(|&n| !n.is_multiple_of(2)) {
        return None;
    }
    Some(ParityCertificate {
        basis_count: set.num_bases(),
        occurrence_counts: counts,
    })
}

/// One bit per (basis, slot) occurrence with exactly one 1 per basis,
/// represented by the marked slot of each basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CtxAssignment {
    choices: Vec<usize>,
}

impl CtxAssignment {
    pub fn new(set: &KsSet, choices: Vec<usize>) -> Result<Self, ColoringError> {
        if choices.len() != set.num_bases() || choices.iter().any(|&c| c >= 4) {
            return Err(ColoringError::DomainMismatch {
                expected: set.num_bases(),
                got: choices.len(),
            });
        }
        Ok(Self { choices })
    }

    /// Marked slot per basis, in basis order.
    pub fn choices(&self) -> &[usize] {
        &self.choices
    }

    pub fn value(&self, basis: usize, slot: usize) -> bool {
        self.choices[basis] == slot
    }

    /// Rays whose two occurrences receive different values, in
    /// first-appearance order.
    pub fn mismatched_vectors(&self, set: &KsSet) -> Vec<CanonicalVec> {
        set.distinct()
            .iter()
            .zip(set.occurrence_lists())
            .filter(|(_, occ)| {
                occ.len() == 2 && self.value(occ[0].0, occ[0].1) != self.value(occ[1].0, occ[1].1)
            })
            .map(|(v, _)| *v)
            .collect()
    }
}

/// Result of the exhaustive minimum-contextuality search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinContextuality {
    pub defect: usize,
    pub witness: CtxAssignment,
    pub mismatched: Vec<CanonicalVec>,
}

impl MinContextuality {
    pub fn to_json_value(&self) -> Value {
        json!({
            "defect": self.defect,
            "witness": self.witness.choices().iter().map(|c| c + 1).collect::<Vec<_>>(),
            "mismatchedVectors": self.mismatched.iter()
                .map(|v| v.coords().to_vec())
                .collect::<Vec<_>>(),
        })
    }
}

/// A (basis, slot) occurrence of a ray.
type Occurrence = (usize, usize);

fn context_pairs(set: &KsSet) -> Result<Vec<(Occurrence, Occurrence)>, ColoringError> {
    if set.num_bases() > MAX_CONTEXT_BASES {
        return Err(ColoringError::TooManyBases(set.num_bases()));
    }
    let mut pairs = Vec::new();
    for (v, occ) in set.distinct().iter().zip(set.occurrence_lists()) {
        match occ.len() {
            1 => {}
            2 => pairs.push((occ[0], occ[1])),
            n => return Err(ColoringError::UnsupportedOccurrences(*v, n)),
        }
    }
    Ok(pairs)
}

/// Runs `visit` on every choice tuple (one marked slot per basis) in
/// lexicographic order, passing the tuple and its defect.
fn for_each_choice_tuple(
    num_bases: usize,
    pairs: &[(Occurrence, Occurrence)],
    mut visit: impl FnMut(&[usize], usize),
) {
    let mut choices = vec![0usize; num_bases];
    loop {
        let defect = pairs
            .iter()
            .filter(|(a, b)| (choices[a.0] == a.1) != (choices[b.0] == b.1))
            .count();
        visit(&choices, defect);
        // odometer increment, last basis fastest, keeps lexicographic order
        let mut i = num_bases;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if choices[i] < 3 {
                choices[i] += 1;
                break;
            }
            choices[i] = 0;
        }
    }
}

/// Exhaustively minimizes, over all 4^bases contextual assignments, the
/// number of rays whose two occurrences disagree. Ties break to the
/// lexicographically smallest slot-choice tuple.
///
/// Every ray must occur once or twice.
pub fn min_contextuality(set: &KsSet) -> Result<MinContextuality, ColoringError> {
    let pairs = context_pairs(set)?;
    let mut best: Option<(usize, Vec<usize>)> = None;
    for_each_choice_tuple(set.num_bases(), &pairs, |choices, defect| {
        if best.as_ref().is_none_or(|(d, _)| defect < *d) {
            best = Some((defect, choices.to_vec()));
        }
    });
    let (defect, choices) = best.expect("enumeration visits at least one tuple");
    let witness = CtxAssignment { choices };
    let mismatched = witness.mismatched_vectors(set);
    Ok(MinContextuality {
        defect,
        witness,
        mismatched,
    })
}

/// Finds the lexicographically least contextual assignment whose only
/// mismatched ray is `target`, valued 1 at its occurrence in `one_context`
/// and 0 at the other. `None` when no such assignment exists.
pub fn contextual_witness_for(
    set: &KsSet,
    target: &CanonicalVec,
    one_context: usize,
) -> Result<Option<CtxAssignment>, ColoringError> {
    let pairs = context_pairs(set)?;
    let occ = match set.occurrences_of(target) {
        Some(occ) if occ.len() == 2 => occ,
        Some(occ) => {
            return Err(ColoringError::UnsupportedOccurrences(*target, occ.len()));
        }
        None => return Ok(None),
    };
    let Some(&(b1, s1)) = occ.iter().find(|(b, _)| *b == one_context) else {
        return Ok(None);
    };
    let &(b2, s2) = occ.iter().find(|(b, _)| *b != one_context).unwrap();
    let mut found: Option<Vec<usize>> = None;
    for_each_choice_tuple(set.num_bases(), &pairs, |choices, defect| {
        // the two slot constraints make target mismatched with the wanted
        // orientation; defect 1 then pins the mismatch set to exactly it
        if found.is_none() && defect == 1 && choices[b1] == s1 && choices[b2] != s2 {
            found = Some(choices.to_vec());
        }
    });
    Ok(found.map(|choices| CtxAssignment { choices }))
}
