//! Strategies for the two-player coloring game.
//!
//! A question hands Alice a basis index and Bob one ray from that basis
//! (without saying which basis it came from). Alice answers four bits, one
//! per slot of her basis; Bob answers one bit. They win when Alice's answer
//! carries exactly one 1 and both assign the same bit to the shared ray.
//!
//! Four strategies are implemented: the entangled-state protocol, plain
//! deterministic tables, the best deterministic tables found by exhaustive
//! search, an explicit single-cbit protocol, and shared-randomness mixtures
//! of deterministic strategies. Each carries its exact win probability next
//! to its playable form, so sampled runs can be checked against closed-form
//! rationals.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::coloring::{self, ColoringError};
use crate::ks::{CanonicalVec, IntVec4, KsError, KsSet};
use crate::quantum::{joint_distribution, EntangledPair, ExactProb, QuantumError};
use crate::rng::RandomSource;

/// One referee question: a basis for Alice, a slot of that basis for Bob.
/// Indices are 0-based; serialized forms add 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Question {
    pub alice_set: usize,
    pub bob_slot: usize,
}

/// Alice's four bits, one per slot of her basis. Nothing forces exactly one
/// 1 at construction; an invalid answer simply loses the round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AliceAnswer {
    pub bits: [bool; 4],
}

impl AliceAnswer {
    pub fn one_hot(slot: usize) -> Self {
        let mut bits = [false; 4];
        bits[slot] = true;
        Self { bits }
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BobAnswer {
    pub bit: bool,
}

/// The classical channel between the players, metered per direction.
#[derive(Debug, Default)]
pub struct Channel {
    alice_to_bob: Vec<bool>,
    bob_to_alice: Vec<bool>,
    bob_cursor: usize,
    alice_cursor: usize,
}

impl Channel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn alice_send(&mut self, bit: bool) {
        self.alice_to_bob.push(bit);
    }

    pub fn bob_send(&mut self, bit: bool) {
        self.bob_to_alice.push(bit);
    }

    /// Next unread bit Alice sent, if any.
    pub fn bob_recv(&mut self) -> Option<bool> {
        let bit = self.alice_to_bob.get(self.bob_cursor).copied();
        if bit.is_some() {
            self.bob_cursor += 1;
        }
        bit
    }

    pub fn alice_recv(&mut self) -> Option<bool> {
        let bit = self.bob_to_alice.get(self.alice_cursor).copied();
        if bit.is_some() {
            self.alice_cursor += 1;
        }
        bit
    }

    pub fn bits_alice_to_bob(&self) -> usize {
        self.alice_to_bob.len()
    }

    pub fn bits_bob_to_alice(&self) -> usize {
        self.bob_to_alice.len()
    }

    pub fn total_bits(&self) -> usize {
        self.bits_alice_to_bob() + self.bits_bob_to_alice()
    }
}

// Stream lanes under one (seed, round). Lane 0 belongs to the referee's
// question draw; rounds use the rest.
const LANE_SHARED: u64 = 1;
const LANE_ALICE: u64 = 2;
const LANE_BOB: u64 = 3;
const LANE_ENTANGLED: u64 = 4;
const LANES_PER_ROUND: u64 = 8;

pub(crate) fn round_stream(round: u64, lane: u64) -> u64 {
    round
        .checked_mul(LANES_PER_ROUND)
        .and_then(|r| r.checked_add(lane))
        .expect("round index within 2^61")
}

/// Per-round randomness: a shared tape both players can copy, plus a private
/// lane for each player.
#[derive(Debug)]
pub struct RoundRandomness {
    shared_tape: RandomSource,
    pub alice: RandomSource,
    pub bob: RandomSource,
}

impl RoundRandomness {
    pub fn derive(seed: u64, round: u64) -> Self {
        Self {
            shared_tape: RandomSource::derived(seed, round_stream(round, LANE_SHARED)),
            alice: RandomSource::derived(seed, round_stream(round, LANE_ALICE)),
            bob: RandomSource::derived(seed, round_stream(round, LANE_BOB)),
        }
    }

    /// A fresh copy of the shared tape. Both players read identical bytes,
    /// which is what shared randomness means.
    pub fn shared(&self) -> RandomSource {
        self.shared_tape.clone()
    }
}

/// Everything one round provides to the players: randomness, the metered
/// channel, and the shared entangled pair.
#[derive(Debug)]
pub struct Round<'a> {
    pub randomness: RoundRandomness,
    pub channel: Channel,
    pub entangled: EntangledPair<'a>,
}

impl<'a> Round<'a> {
    pub fn new(set: &'a KsSet, seed: u64, round: u64) -> Self {
        Self {
            randomness: RoundRandomness::derive(seed, round),
            channel: Channel::new(),
            entangled: EntangledPair::new(
                set,
                RandomSource::derived(seed, round_stream(round, LANE_ENTANGLED)),
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StrategyError {
    #[error("ray {0} is not part of the strategy's set")]
    UnknownVector(CanonicalVec),
    #[error("expected one slot choice per basis ({expected}), got {got}")]
    ChoiceCount { expected: usize, got: usize },
    #[error("slot {0} is out of range (slots are 1..=4 in files, 0..=3 in code)")]
    SlotOutOfRange(usize),
    #[error("bob table domain mismatch: {0}")]
    TableDomain(String),
    #[error("mixture weights sum to {0}, expected exactly 1")]
    WeightsNotNormalized(String),
    #[error("a mixture needs at least one component")]
    EmptyMixture,
    #[error("no contextual witness with the required mismatch exists for this set")]
    NoWitness,
    #[error("expected a bit on the channel, found none")]
    ChannelEmpty,
    #[error("unknown strategy {0:?}")]
    UnknownName(String),
    #[error("set has {count} distinct rays; the table search is capped at {max}")]
    TooManyVectors { count: usize, max: usize },
    #[error("strategy definition: {0}")]
    Parse(String),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Coloring(#[from] ColoringError),
    #[error(transparent)]
    Set(#[from] KsError),
}

/// A playable strategy. Alice's procedure sees her basis index, Bob's only
/// his ray; both see their round's resources (randomness lanes, channel,
/// entangled pair).
pub trait Strategy {
    fn name(&self) -> &str;

    /// Promises the channel stays untouched; the referee scores any write by
    /// such a strategy as a lost round.
    fn no_communication(&self) -> bool;

    fn alice_answer(
        &self,
        alice_set: usize,
        round: &mut Round<'_>,
    ) -> Result<AliceAnswer, StrategyError>;

    fn bob_answer(
        &self,
        bob_vector: &CanonicalVec,
        round: &mut Round<'_>,
    ) -> Result<BobAnswer, StrategyError>;

    /// Exact win probability under the uniform question distribution, when
    /// the strategy admits exact analysis.
    fn exact_win_probability(&self) -> Option<ExactProb>;
}

// ---------------------------------------------------------------------------
// Quantum strategy
// ---------------------------------------------------------------------------

/// The entangled protocol: Alice measures her basis and marks her outcome;
/// Bob measures the lowest-index basis containing his ray and answers 1 iff
/// he collapsed onto that ray. No channel use.
#[derive(Debug, Clone)]
pub struct QuantumStrategy {
    set: KsSet,
}

impl QuantumStrategy {
    pub fn new(set: &KsSet) -> Result<Self, StrategyError> {
        for k in 0..set.num_bases() {
            if !crate::quantum::completeness_check(set.basis(k)?.vectors()) {
                return Err(QuantumError::IncompleteBasis { index: k }.into());
            }
        }
        Ok(Self { set: set.clone() })
    }

    /// Bob's measurement basis for a given ray: the lowest-index basis
    /// containing it.
    pub fn bob_basis(&self, v: &CanonicalVec) -> Result<usize, StrategyError> {
        self.set
            .occurrences_of(v)
            .map(|occ| occ[0].0)
            .ok_or(StrategyError::UnknownVector(*v))
    }

    /// Exact probability that a given question is lost: the mass of outcome
    /// pairs where the two bits on the shared ray disagree.
    pub fn question_loss(&self, q: &Question) -> Result<ExactProb, StrategyError> {
        let v = *self.set.canonical_at(q.alice_set, q.bob_slot);
        let m = self.bob_basis(&v)?;
        let t = self
            .set
            .occurrences_of(&v)
            .unwrap()
            .iter()
            .find(|(b, _)| *b == m)
            .unwrap()
            .1;
        let d = joint_distribution(&self.set, q.alice_set, m)?;
        let mut loss = BigRational::zero();
        for i in 0..4 {
            if i != q.bob_slot {
                loss += d.prob(i, t).ratio();
            }
        }
        for j in 0..4 {
            if j != t {
                loss += d.prob(q.bob_slot, j).ratio();
            }
        }
        Ok(ExactProb::from_ratio(loss)?)
    }
}

impl Strategy for QuantumStrategy {
    fn name(&self) -> &str {
        "quantum"
    }

    fn no_communication(&self) -> bool {
        true
    }

    fn alice_answer(
        &self,
        alice_set: usize,
        round: &mut Round<'_>,
    ) -> Result<AliceAnswer, StrategyError> {
        let slot = round.entangled.measure(alice_set)?;
        Ok(AliceAnswer::one_hot(slot))
    }

    fn bob_answer(
        &self,
        bob_vector: &CanonicalVec,
        round: &mut Round<'_>,
    ) -> Result<BobAnswer, StrategyError> {
        let m = self.bob_basis(bob_vector)?;
        let own_slot = self
            .set
            .occurrences_of(bob_vector)
            .unwrap()
            .iter()
            .find(|(b, _)| *b == m)
            .unwrap()
            .1;
        let outcome = round.entangled.measure(m)?;
        Ok(BobAnswer {
            bit: outcome == own_slot,
        })
    }

    fn exact_win_probability(&self) -> Option<ExactProb> {
        let mut win = BigRational::zero();
        let total = 4 * self.set.num_bases();
        for alice_set in 0..self.set.num_bases() {
            for bob_slot in 0..4 {
                let loss = self
                    .question_loss(&Question {
                        alice_set,
                        bob_slot,
                    })
                    .ok()?;
                win += BigRational::one() - loss.ratio();
            }
        }
        ExactProb::from_ratio(win / BigRational::from(BigInt::from(total))).ok()
    }
}

// ---------------------------------------------------------------------------
// Deterministic strategy
// ---------------------------------------------------------------------------

/// Fixed tables: Alice marks one pre-chosen slot per basis, Bob answers a
/// fixed bit per ray. No randomness, no channel.
#[derive(Debug, Clone)]
pub struct DeterministicStrategy {
    set: KsSet,
    label: String,
    alice_choices: Vec<usize>,
    bob_table: BTreeMap<CanonicalVec, bool>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct DeterministicSpec {
    /// 1-based marked slot per basis, in basis order.
    alice_choices: Vec<usize>,
    /// Ray rendered as "(a,b,c,d)" -> 0 or 1.
    bob_table: BTreeMap<String, u8>,
}

impl DeterministicStrategy {
    pub fn new(
        set: &KsSet,
        alice_choices: Vec<usize>,
        bob_table: BTreeMap<CanonicalVec, bool>,
    ) -> Result<Self, StrategyError> {
        if alice_choices.len() != set.num_bases() {
            return Err(StrategyError::ChoiceCount {
                expected: set.num_bases(),
                got: alice_choices.len(),
            });
        }
        if let Some(&bad) = alice_choices.iter().find(|&&c| c >= 4) {
            return Err(StrategyError::SlotOutOfRange(bad));
        }
        if bob_table.len() != set.distinct().len()
            || !set.distinct().iter().all(|v| bob_table.contains_key(v))
        {
            return Err(StrategyError::TableDomain(format!(
                "table covers {} rays, set has {} distinct",
                bob_table.len(),
                set.distinct().len()
            )));
        }
        Ok(Self {
            set: set.clone(),
            label: "deterministic".to_string(),
            alice_choices,
            bob_table,
        })
    }

    fn labeled(mut self, label: &str) -> Self {
        self.label = label.to_string();
        self
    }

    pub fn alice_choices(&self) -> &[usize] {
        &self.alice_choices
    }

    pub fn bob_table(&self) -> &BTreeMap<CanonicalVec, bool> {
        &self.bob_table
    }

    /// Whether a specific question is won; total per-question analysis.
    pub fn question_won(&self, q: &Question) -> bool {
        let v = self.set.canonical_at(q.alice_set, q.bob_slot);
        let alice_bit = self.alice_choices[q.alice_set] == q.bob_slot;
        alice_bit == self.bob_table[v]
    }

    pub fn from_json_str(set: &KsSet, text: &str) -> Result<Self, StrategyError> {
        let spec: DeterministicSpec =
            serde_json::from_str(text).map_err(|e| StrategyError::Parse(e.to_string()))?;
        Self::from_spec(set, &spec)
    }

    fn from_spec(set: &KsSet, spec: &DeterministicSpec) -> Result<Self, StrategyError> {
        let mut choices = Vec::with_capacity(spec.alice_choices.len());
        for &slot in &spec.alice_choices {
            if !(1..=4).contains(&slot) {
                return Err(StrategyError::SlotOutOfRange(slot));
            }
            choices.push(slot - 1);
        }
        let mut table = BTreeMap::new();
        for (key, &bit) in &spec.bob_table {
            let ray: IntVec4 = key
                .parse()
                .map_err(|e: KsError| StrategyError::Parse(e.to_string()))?;
            if bit > 1 {
                return Err(StrategyError::Parse(format!(
                    "table value for {key} must be 0 or 1, got {bit}"
                )));
            }
            table.insert(ray.canonical(), bit == 1);
        }
        Self::new(set, choices, table)
    }

    pub fn to_json_value(&self) -> Value {
        json!({
            "aliceChoices": self.alice_choices.iter().map(|c| c + 1).collect::<Vec<_>>(),
            "bobTable": self.bob_table.iter()
                .map(|(v, &b)| (v.to_string(), json!(u8::from(b))))
                .collect::<serde_json::Map<_, _>>(),
        })
    }
}

impl Strategy for DeterministicStrategy {
    fn name(&self) -> &str {
        &self.label
    }

    fn no_communication(&self) -> bool {
        true
    }

    fn alice_answer(
        &self,
        alice_set: usize,
        _round: &mut Round<'_>,
    ) -> Result<AliceAnswer, StrategyError> {
        Ok(AliceAnswer::one_hot(self.alice_choices[alice_set]))
    }

    fn bob_answer(
        &self,
        bob_vector: &CanonicalVec,
        _round: &mut Round<'_>,
    ) -> Result<BobAnswer, StrategyError> {
        let bit = self
            .bob_table
            .get(bob_vector)
            .copied()
            .ok_or(StrategyError::UnknownVector(*bob_vector))?;
        Ok(BobAnswer { bit })
    }

    fn exact_win_probability(&self) -> Option<ExactProb> {
        let total = 4 * self.set.num_bases();
        let wins = (0..self.set.num_bases())
            .flat_map(|alice_set| {
                (0..4).map(move |bob_slot| Question {
                    alice_set,
                    bob_slot,
                })
            })
            .filter(|q| self.question_won(q))
            .count();
        Some(ExactProb::new(wins as u64, total as u64).expect("wins <= total"))
    }
}

// ---------------------------------------------------------------------------
// Best classical strategy (exhaustive search)
// ---------------------------------------------------------------------------

/// Cap on distinct rays for the 2^n table search.
pub const MAX_TABLE_VECTORS: usize = 24;

/// Exhaustively maximizes the deterministic win probability.
///
/// For a fixed Bob table, each basis contributes independently: if the table
/// puts t ones in a basis, the best slot choice loses exactly |t - 1| of that
/// basis's four questions. So the search ranges over all 2^n Bob tables,
/// minimizing Σ|t_k - 1|; Alice's per-basis choice is then read off the
/// table. Since every mixture of deterministic strategies is a convex
/// combination, this maximum also bounds all shared-randomness strategies.
///
/// Returns the exact optimum and the lexicographically least optimal
/// strategy (table bits in first-appearance ray order, 0 before 1; then the
/// smallest optimal slot per basis).
pub fn best_classical(set: &KsSet) -> Result<(ExactProb, DeterministicStrategy), StrategyError> {
    let n = set.distinct().len();
    if n > MAX_TABLE_VECTORS {
        return Err(StrategyError::TooManyVectors {
            count: n,
            max: MAX_TABLE_VECTORS,
        });
    }
    let num_bases = set.num_bases();
    let ids: Vec<[usize; 4]> = (0..num_bases)
        .map(|b| std::array::from_fn(|s| set.id_at(b, s)))
        .collect();

    // bit of ray `id` inside a mask, with id 0 as the most significant bit so
    // ascending masks enumerate tables in lexicographic order
    let bit = |mask: u32, id: usize| mask >> (n - 1 - id) & 1;

    let mut best_loss = usize::MAX;
    let mut best_mask = 0u32;
    for mask in 0..1u32 << n {
        let mut loss = 0usize;
        for slots in &ids {
            let t: u32 = slots.iter().map(|&id| bit(mask, id)).sum();
            loss += (t as i64 - 1).unsigned_abs() as usize;
        }
        if loss < best_loss {
            best_loss = loss;
            best_mask = mask;
        }
    }

    let bob_table: BTreeMap<CanonicalVec, bool> = set
        .distinct()
        .iter()
        .enumerate()
        .map(|(id, v)| (*v, bit(best_mask, id) == 1))
        .collect();
    let alice_choices: Vec<usize> = ids
        .iter()
        .map(|slots| {
            slots
                .iter()
                .position(|&id| bit(best_mask, id) == 1)
                .unwrap_or(0)
        })
        .collect();

    let total = 4 * num_bases;
    let win = ExactProb::new((total - best_loss) as u64, total as u64)
        .expect("losses never exceed the question count");
    let strategy =
        DeterministicStrategy::new(set, alice_choices, bob_table)?.labeled("best-classical");
    debug_assert_eq!(strategy.exact_win_probability().as_ref(), Some(&win));
    Ok((win, strategy))
}

// ---------------------------------------------------------------------------
// One-cbit strategy
// ---------------------------------------------------------------------------

/// The single-cbit protocol: both players hold a contextual witness whose
/// only mismatched ray is (0,0,0,1); Alice tells Bob whether her basis is the
/// one where that ray takes value 1, and Bob resolves his bit for that ray
/// from the received bit. Exactly one bit Alice→Bob per round.
#[derive(Debug, Clone)]
pub struct OneCbitStrategy {
    set: KsSet,
    alice_choices: Vec<usize>,
    bob_table: BTreeMap<CanonicalVec, bool>,
    contextual: CanonicalVec,
    one_context_basis: usize,
}

impl OneCbitStrategy {
    pub fn new(set: &KsSet) -> Result<Self, StrategyError> {
        let contextual = IntVec4::new([0, 0, 0, 1])
            .expect("constant ray")
            .canonical();
        let occ = set
            .occurrences_of(&contextual)
            .ok_or(StrategyError::NoWitness)?;
        if occ.len() != 2 {
            return Err(StrategyError::NoWitness);
        }
        let one_context_basis = occ[0].0;
        let witness = coloring::contextual_witness_for(set, &contextual, one_context_basis)?
            .ok_or(StrategyError::NoWitness)?;
        let mut bob_table = BTreeMap::new();
        for (v, occ) in set.distinct().iter().zip(set.occurrence_lists()) {
            if *v == contextual {
                continue;
            }
            // defect-1 witness: all rays but the contextual one are consistent
            let (b, s) = occ[0];
            bob_table.insert(*v, witness.value(b, s));
        }
        Ok(Self {
            set: set.clone(),
            alice_choices: witness.choices().to_vec(),
            bob_table,
            contextual,
            one_context_basis,
        })
    }

    pub fn contextual_vector(&self) -> &CanonicalVec {
        &self.contextual
    }

    pub fn one_context_basis(&self) -> usize {
        self.one_context_basis
    }

    fn bob_bit(&self, v: &CanonicalVec, in_one_context: bool) -> Result<bool, StrategyError> {
        if *v == self.contextual {
            Ok(in_one_context)
        } else {
            self.bob_table
                .get(v)
                .copied()
                .ok_or(StrategyError::UnknownVector(*v))
        }
    }
}

impl Strategy for OneCbitStrategy {
    fn name(&self) -> &str {
        "one-cbit"
    }

    fn no_communication(&self) -> bool {
        false
    }

    fn alice_answer(
        &self,
        alice_set: usize,
        round: &mut Round<'_>,
    ) -> Result<AliceAnswer, StrategyError> {
        // bit 0: her basis is the value-1 context; bit 1: it is not
        round
            .channel
            .alice_send(alice_set != self.one_context_basis);
        Ok(AliceAnswer::one_hot(self.alice_choices[alice_set]))
    }

    fn bob_answer(
        &self,
        bob_vector: &CanonicalVec,
        round: &mut Round<'_>,
    ) -> Result<BobAnswer, StrategyError> {
        let not_one_context = round
            .channel
            .bob_recv()
            .ok_or(StrategyError::ChannelEmpty)?;
        Ok(BobAnswer {
            bit: self.bob_bit(bob_vector, !not_one_context)?,
        })
    }

    fn exact_win_probability(&self) -> Option<ExactProb> {
        let total = 4 * self.set.num_bases();
        let mut wins = 0u64;
        for alice_set in 0..self.set.num_bases() {
            for bob_slot in 0..4 {
                let v = self.set.canonical_at(alice_set, bob_slot);
                let alice_bit = self.alice_choices[alice_set] == bob_slot;
                let bob_bit = self.bob_bit(v, alice_set == self.one_context_basis).ok()?;
                if alice_bit == bob_bit {
                    wins += 1;
                }
            }
        }
        ExactProb::new(wins, total as u64).ok()
    }
}

// ---------------------------------------------------------------------------
// Shared-randomness mixture
// ---------------------------------------------------------------------------

/// A convex mixture of deterministic strategies. Each round, both players
/// read the same draw off the shared tape and play the selected component.
#[derive(Debug, Clone)]
pub struct MixtureStrategy {
    components: Vec<(ExactProb, DeterministicStrategy)>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct MixtureSpec {
    components: Vec<MixtureComponentSpec>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct MixtureComponentSpec {
    /// Exact weight as "num/den".
    weight: String,
    strategy: DeterministicSpec,
}

impl MixtureStrategy {
    pub fn new(components: Vec<(ExactProb, DeterministicStrategy)>) -> Result<Self, StrategyError> {
        if components.is_empty() {
            return Err(StrategyError::EmptyMixture);
        }
        let total: BigRational = components.iter().map(|(w, _)| w.ratio().clone()).sum();
        if !total.is_one() {
            return Err(StrategyError::WeightsNotNormalized(format!(
                "{}/{}",
                total.numer(),
                total.denom()
            )));
        }
        Ok(Self { components })
    }

    pub fn from_json_str(set: &KsSet, text: &str) -> Result<Self, StrategyError> {
        let spec: MixtureSpec =
            serde_json::from_str(text).map_err(|e| StrategyError::Parse(e.to_string()))?;
        let mut components = Vec::with_capacity(spec.components.len());
        for c in &spec.components {
            let weight: ExactProb = c
                .weight
                .parse()
                .map_err(|e: QuantumError| StrategyError::Parse(e.to_string()))?;
            components.push((weight, DeterministicStrategy::from_spec(set, &c.strategy)?));
        }
        Self::new(components)
    }

    /// Component selected this round; identical for both players because each
    /// reads a private copy of the same shared tape.
    fn draw_component(&self, round: &Round<'_>) -> usize {
        let denominator = self
            .components
            .iter()
            .fold(BigInt::one(), |acc, (w, _)| acc.lcm(w.ratio().denom()));
        let total = denominator
            .to_biguint()
            .expect("lcm of positive denominators is positive");
        let mut tape = round.randomness.shared();
        let mut draw = tape.uniform_below_big(&total);
        for (idx, (w, _)) in self.components.iter().enumerate() {
            let mass = (w.ratio().numer() * (&denominator / w.ratio().denom()))
                .to_biguint()
                .expect("weights are non-negative");
            if draw < mass {
                return idx;
            }
            draw -= mass;
        }
        self.components.len() - 1
    }
}

impl Strategy for MixtureStrategy {
    fn name(&self) -> &str {
        "mixture"
    }

    fn no_communication(&self) -> bool {
        true
    }

    fn alice_answer(
        &self,
        alice_set: usize,
        round: &mut Round<'_>,
    ) -> Result<AliceAnswer, StrategyError> {
        let idx = self.draw_component(round);
        self.components[idx].1.alice_answer(alice_set, round)
    }

    fn bob_answer(
        &self,
        bob_vector: &CanonicalVec,
        round: &mut Round<'_>,
    ) -> Result<BobAnswer, StrategyError> {
        let idx = self.draw_component(round);
        self.components[idx].1.bob_answer(bob_vector, round)
    }

    fn exact_win_probability(&self) -> Option<ExactProb> {
        let mut total = BigRational::zero();
        for (w, s) in &self.components {
            total += w.ratio() * s.exact_win_probability()?.ratio();
        }
        ExactProb::from_ratio(total).ok()
    }
}

/// Builds one of the self-contained strategies by its public name:
/// "quantum", "one-cbit", or "best-classical".
pub fn builtin(set: &KsSet, name: &str) -> Result<Box<dyn Strategy>, StrategyError> {
    match name {
        "quantum" => Ok(Box::new(QuantumStrategy::new(set)?)),
        "one-cbit" => Ok(Box::new(OneCbitStrategy::new(set)?)),
        "best-classical" => Ok(Box::new(best_classical(set)?.1)),
        other => Err(StrategyError::UnknownName(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coloring::min_contextuality;
    use crate::ks::cabello_set;

    fn v(coords: [i64; 4]) -> IntVec4 {
        IntVec4::new(coords).unwrap()
    }

    fn all_questions(set: &KsSet) -> Vec<Question> {
        (0..set.num_bases())
            .flat_map(|alice_set| {
                (0..4).map(move |bob_slot| Question {
                    alice_set,
                    bob_slot,
                })
            })
            .collect()
    }

    fn zeros_table(set: &KsSet) -> BTreeMap<CanonicalVec, bool> {
        set.distinct().iter().map(|v| (*v, false)).collect()
    }

    #[test]
    fn quantum_bob_picks_lowest_containing_basis() {
        let set = cabello_set();
        let strategy = QuantumStrategy::new(&set).unwrap();
        // (1,-1,1,-1) opens both the third and fourth printed bases
        let ray = v([1, -1, 1, -1]).canonical();
        assert_eq!(strategy.bob_basis(&ray).unwrap(), 2);
    }

    #[test]
    fn quantum_loss_is_exactly_zero_on_every_question() {
        let set = cabello_set();
        let strategy = QuantumStrategy::new(&set).unwrap();
        for q in all_questions(&set) {
            assert!(strategy.question_loss(&q).unwrap().is_zero(), "{q:?}");
        }
        assert!(strategy.exact_win_probability().unwrap().is_one());
    }

    #[test]
    fn quantum_uses_no_communication() {
        let set = cabello_set();
        let strategy = QuantumStrategy::new(&set).unwrap();
        for round_idx in 0..20 {
            let mut round = Round::new(&set, 5, round_idx);
            let a = strategy.alice_answer(3, &mut round).unwrap();
            let b = strategy
                .bob_answer(set.canonical_at(3, 1), &mut round)
                .unwrap();
            assert_eq!(round.channel.total_bits(), 0);
            assert_eq!(a.ones(), 1);
            // perfect correlation on the shared ray
            assert_eq!(a.bits[1], b.bit);
        }
    }

    #[test]
    fn deterministic_wins_iff_table_matches_choice() {
        let set = cabello_set();
        let mut table = zeros_table(&set);
        // mark the ray Alice marks in basis 0, slot 2
        table.insert(*set.canonical_at(0, 2), true);
        let choices = vec![2, 0, 0, 0, 0, 0, 0, 0, 0];
        let s = DeterministicStrategy::new(&set, choices, table).unwrap();
        assert!(s.question_won(&Question {
            alice_set: 0,
            bob_slot: 2
        }));
    }

    #[test]
    fn all_zero_table_loses_where_alice_marks() {
        let set = cabello_set();
        let s = DeterministicStrategy::new(&set, vec![0; 9], zeros_table(&set)).unwrap();
        // oracle: walk all 36 questions by the win rule directly
        let mut wins = 0;
        for q in all_questions(&set) {
            let alice_bit = q.bob_slot == 0;
            let won = !alice_bit;
            assert_eq!(s.question_won(&q), won);
            if won {
                wins += 1;
            }
        }
        // the marked question of each basis disagrees, the other three agree
        assert_eq!(wins, 27);
        assert_eq!(
            s.exact_win_probability().unwrap(),
            ExactProb::new(27, 36).unwrap()
        );
    }

    #[test]
    fn no_deterministic_strategy_is_perfect_on_the_canonical_set() {
        let set = cabello_set();
        let (best, strategy) = best_classical(&set).unwrap();
        assert!(best < ExactProb::one());
        assert_eq!(best, ExactProb::new(35, 36).unwrap());
        assert_eq!(strategy.exact_win_probability().unwrap(), best);
        // random tables stay at or below the optimum
        let mut rng = RandomSource::from_seed(99);
        for _ in 0..50 {
            let mask = rng.next_u64();
            let table: BTreeMap<CanonicalVec, bool> = set
                .distinct()
                .iter()
                .enumerate()
                .map(|(i, v)| (*v, mask >> i & 1 == 1))
                .collect();
            let choices: Vec<usize> = (0..9).map(|k| (mask >> (2 * k) & 3) as usize).collect();
            let s = DeterministicStrategy::new(&set, choices, table).unwrap();
            assert!(s.exact_win_probability().unwrap() <= best);
        }
    }

    #[test]
    fn best_classical_single_basis_is_perfect() {
        let raw = [[
            v([1, 0, 0, 0]),
            v([0, 1, 0, 0]),
            v([0, 0, 1, 0]),
            v([0, 0, 0, 1]),
        ]];
        let set = KsSet::from_raw(&raw).unwrap();
        let (best, s) = best_classical(&set).unwrap();
        assert!(best.is_one());
        for q in all_questions(&set) {
            assert!(s.question_won(&q));
        }
    }

    #[test]
    fn best_classical_two_canonical_bases_is_perfect() {
        let cab = cabello_set();
        let set = KsSet::new(cab.bases()[..2].to_vec()).unwrap();
        // defect 0 from the contextual search promises a perfect strategy
        assert_eq!(min_contextuality(&set).unwrap().defect, 0);
        let (best, _) = best_classical(&set).unwrap();
        assert!(best.is_one());
    }

    #[test]
    fn best_classical_agrees_with_contextual_defect() {
        let set = cabello_set();
        let (best, _) = best_classical(&set).unwrap();
        let defect = min_contextuality(&set).unwrap().defect;
        assert_eq!(defect, 1);
        assert_eq!(best, ExactProb::new((36 - defect) as u64, 36).unwrap());
    }

    #[test]
    fn one_cbit_wins_everything_with_one_bit() {
        let set = cabello_set();
        let strategy = OneCbitStrategy::new(&set).unwrap();
        assert!(strategy.exact_win_probability().unwrap().is_one());
        for (idx, q) in all_questions(&set).into_iter().enumerate() {
            let mut round = Round::new(&set, 42, idx as u64);
            let a = strategy.alice_answer(q.alice_set, &mut round).unwrap();
            let b = strategy
                .bob_answer(set.canonical_at(q.alice_set, q.bob_slot), &mut round)
                .unwrap();
            assert_eq!(round.channel.bits_alice_to_bob(), 1);
            assert_eq!(round.channel.bits_bob_to_alice(), 0);
            assert_eq!(a.ones(), 1);
            assert_eq!(a.bits[q.bob_slot], b.bit, "lost {q:?}");
        }
    }

    #[test]
    fn one_cbit_contextual_trace() {
        let set = cabello_set();
        let strategy = OneCbitStrategy::new(&set).unwrap();
        assert_eq!(strategy.contextual_vector(), &v([0, 0, 0, 1]).canonical());
        assert_eq!(strategy.one_context_basis(), 0);
        // question: second basis, its first slot, which holds (0,0,0,1)
        let mut round = Round::new(&set, 0, 0);
        let a = strategy.alice_answer(1, &mut round).unwrap();
        let b = strategy
            .bob_answer(set.canonical_at(1, 0), &mut round)
            .unwrap();
        // Bob hears "not the value-1 context" and answers 0; Alice's mark in
        // that basis avoids slot 0, so both say 0 on the shared ray
        assert!(!b.bit);
        assert!(!a.bits[0]);
    }

    #[test]
    fn mixture_of_one_behaves_like_component() {
        let set = cabello_set();
        let (_, best) = best_classical(&set).unwrap();
        let mixture = MixtureStrategy::new(vec![(ExactProb::one(), best.clone())]).unwrap();
        assert_eq!(
            mixture.exact_win_probability(),
            best.exact_win_probability()
        );
        for round_idx in 0..10 {
            let q = Question {
                alice_set: round_idx % 9,
                bob_slot: round_idx % 4,
            };
            let mut r1 = Round::new(&set, 7, round_idx as u64);
            let mut r2 = Round::new(&set, 7, round_idx as u64);
            assert_eq!(
                mixture.alice_answer(q.alice_set, &mut r1).unwrap(),
                best.alice_answer(q.alice_set, &mut r2).unwrap()
            );
        }
    }

    #[test]
    fn mixture_win_probability_is_linear() {
        let set = cabello_set();
        let (best_p, best) = best_classical(&set).unwrap();
        let zeros = DeterministicStrategy::new(&set, vec![0; 9], zeros_table(&set)).unwrap();
        let zeros_p = zeros.exact_win_probability().unwrap();
        let half = ExactProb::new(1, 2).unwrap();
        let mixture =
            MixtureStrategy::new(vec![(half.clone(), best), (half.clone(), zeros)]).unwrap();
        let expected =
            ExactProb::from_ratio(half.ratio() * best_p.ratio() + half.ratio() * zeros_p.ratio())
                .unwrap();
        assert_eq!(mixture.exact_win_probability().unwrap(), expected);
    }

    #[test]
    fn random_mixtures_never_beat_the_classical_bound() {
        let set = cabello_set();
        let bound = ExactProb::new(35, 36).unwrap();
        let mut rng = RandomSource::from_seed(2024);
        for _ in 0..20 {
            let mut components = Vec::new();
            let parts = 2 + (rng.next_u64() % 3) as usize;
            for i in 0..parts {
                let mask = rng.next_u64();
                let table: BTreeMap<CanonicalVec, bool> = set
                    .distinct()
                    .iter()
                    .enumerate()
                    .map(|(k, v)| (*v, mask >> k & 1 == 1))
                    .collect();
                let choices: Vec<usize> =
                    (0..9).map(|k| (mask >> (2 * k + 1) & 3) as usize).collect();
                let weight = if i == parts - 1 {
                    // remainder keeps the weights exactly normalized
                    ExactProb::new((parts - i) as u64, parts as u64).unwrap()
                } else {
                    ExactProb::new(1, parts as u64).unwrap()
                };
                components.push((
                    weight,
                    DeterministicStrategy::new(&set, choices, table).unwrap(),
                ));
            }
            let mixture = MixtureStrategy::new(components).unwrap();
            assert!(mixture.exact_win_probability().unwrap() <= bound);
        }
    }

    #[test]
    fn mixture_rejects_bad_weights() {
        let set = cabello_set();
        let zeros = DeterministicStrategy::new(&set, vec![0; 9], zeros_table(&set)).unwrap();
        let third = ExactProb::new(1, 3).unwrap();
        assert!(matches!(
            MixtureStrategy::new(vec![(third.clone(), zeros.clone()), (third, zeros)]),
            Err(StrategyError::WeightsNotNormalized(_))
        ));
        assert!(matches!(
            MixtureStrategy::new(vec![]),
            Err(StrategyError::EmptyMixture)
        ));
    }

    #[test]
    fn classical_bob_answers_ignore_alices_basis() {
        // For no-communication classical strategies, Bob's realized bit is a
        // function of (ray, randomness) alone: replaying the same round with
        // the other containing basis on Alice's side cannot change it.
        let set = cabello_set();
        let (_, best) = best_classical(&set).unwrap();
        let mixture = MixtureStrategy::new(vec![
            (ExactProb::new(1, 2).unwrap(), best.clone()),
            (
                ExactProb::new(1, 2).unwrap(),
                DeterministicStrategy::new(&set, vec![1; 9], zeros_table(&set)).unwrap(),
            ),
        ])
        .unwrap();
        let strategies: Vec<&dyn Strategy> = vec![&best, &mixture];
        for strategy in strategies {
            for (v, occ) in set.distinct().iter().zip(set.occurrence_lists()) {
                assert_eq!(occ.len(), 2);
                for seed in [1u64, 99] {
                    let mut bits = Vec::new();
                    for &(alice_set, _) in occ {
                        let mut round = Round::new(&set, seed, 17);
                        strategy.alice_answer(alice_set, &mut round).unwrap();
                        bits.push(strategy.bob_answer(v, &mut round).unwrap().bit);
                    }
                    assert_eq!(
                        bits[0],
                        bits[1],
                        "{} leaked context for {v}",
                        strategy.name()
                    );
                }
            }
        }
    }

    #[test]
    fn quantum_bob_marginal_is_uniform_in_every_context() {
        // the distribution-level no-signalling statement for the entangled
        // protocol: Bob's chance of collapsing onto his ray is exactly 1/4
        // whichever containing basis Alice measures
        let set = cabello_set();
        for (v, occ) in set.distinct().iter().zip(set.occurrence_lists()) {
            let m = occ[0].0;
            let t = occ[0].1;
            for &(alice_set, _) in occ {
                let d = joint_distribution(&set, alice_set, m).unwrap();
                assert_eq!(
                    d.col_sum(t),
                    BigRational::new(BigInt::one(), BigInt::from(4)),
                    "ray {v}"
                );
            }
        }
    }

    #[test]
    fn deterministic_json_roundtrip() {
        let set = cabello_set();
        let (_, best) = best_classical(&set).unwrap();
        let text = serde_json::to_string(&best.to_json_value()).unwrap();
        let parsed = DeterministicStrategy::from_json_str(&set, &text).unwrap();
        assert_eq!(parsed.alice_choices(), best.alice_choices());
        assert_eq!(parsed.bob_table(), best.bob_table());
    }

    #[test]
    fn deterministic_rejects_bad_tables() {
        let set = cabello_set();
        assert!(matches!(
            DeterministicStrategy::new(&set, vec![0; 8], zeros_table(&set)),
            Err(StrategyError::ChoiceCount { .. })
        ));
        assert!(matches!(
            DeterministicStrategy::new(&set, vec![4; 9], zeros_table(&set)),
            Err(StrategyError::SlotOutOfRange(4))
        ));
        let mut table = zeros_table(&set);
        table.remove(&v([0, 0, 0, 1]).canonical());
        assert!(matches!(
            DeterministicStrategy::new(&set, vec![0; 9], table),
            Err(StrategyError::TableDomain(_))
        ));
    }

    #[test]
    fn best_classical_cap_refuses_oversized_sets() {
        let mut raw: Vec<[IntVec4; 4]> =
            cabello_set().bases().iter().map(|b| *b.vectors()).collect();
        for k in [2i64, 3, 4] {
            raw.push([
                v([1, k, 0, 0]),
                v([k, -1, 0, 0]),
                v([0, 0, 1, k]),
                v([0, 0, k, -1]),
            ]);
        }
        let set = KsSet::from_raw(&raw).unwrap();
        assert!(matches!(
            best_classical(&set),
            Err(StrategyError::TooManyVectors { .. })
        ));
    }

    #[test]
    fn builtin_by_name() {
        let set = cabello_set();
        assert_eq!(builtin(&set, "quantum").unwrap().name(), "quantum");
        assert_eq!(builtin(&set, "one-cbit").unwrap().name(), "one-cbit");
        assert_eq!(
            builtin(&set, "best-classical").unwrap().name(),
            "best-classical"
        );
        assert!(matches!(
            builtin(&set, "psychic"),
            Err(StrategyError::UnknownName(_))
        ));
    }
}
