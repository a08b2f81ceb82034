//! The referee: draws questions, runs rounds against a strategy, meters
//! communication, scores the winning condition, and aggregates transcripts.
//!
//! Round `i` of a run draws all of its randomness from streams derived from
//! `(seed, i)`, so transcripts are byte-reproducible and rounds are
//! order-independent. Strategy failures lose the affected round instead of
//! aborting a run, and a strategy that promised no communication loses any
//! round in which it wrote to the channel.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Value};
use thiserror::Error;

use crate::ks::KsSet;
use crate::quantum::ExactProb;
use crate::rng::RandomSource;
use crate::strategies::{round_stream, AliceAnswer, BobAnswer, Question, Round, Strategy};

const LANE_QUESTION: u64 = 0;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HarnessError {
    #[error("a run needs at least one round")]
    NoRounds,
    #[error("strategy {0:?} does not admit exact analysis")]
    NotExactlyAnalyzable(String),
}

/// Uniform draw over all questions: a basis for Alice, then a slot of that
/// basis for Bob, independently.
pub fn draw_question(set: &KsSet, rng: &mut RandomSource) -> Question {
    let alice_set = rng.uniform_below(set.num_bases() as u128) as usize;
    let bob_slot = rng.uniform_below(4) as usize;
    Question {
        alice_set,
        bob_slot,
    }
}

/// The winning condition: exactly one of Alice's bits is 1, and her bit on
/// the shared ray equals Bob's bit.
pub fn evaluate_win(q: &Question, a: &AliceAnswer, b: &BobAnswer) -> bool {
    a.ones() == 1 && a.bits[q.bob_slot] == b.bit
}

/// One played round, with everything the winning condition inspects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundRecord {
    pub index: u64,
    pub question: Question,
    pub alice: AliceAnswer,
    pub bob: BobAnswer,
    pub won: bool,
    pub bits_alice_to_bob: usize,
    pub bits_bob_to_alice: usize,
    /// Present only when the strategy failed or broke its no-communication
    /// promise; such rounds are scored as losses.
    pub error: Option<String>,
}

/// Exact aggregates over a transcript's rounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Summary {
    pub rounds: u64,
    pub wins: u64,
    pub win_rate: ExactProb,
    pub mean_bits: BigRational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    pub seed: u64,
    pub strategy: String,
    pub rounds: Vec<RoundRecord>,
    pub summary: Summary,
}

impl Transcript {
    pub fn to_json_value(&self) -> Value {
        json!({
            "seed": self.seed,
            "strategy": self.strategy,
            "rounds": self.rounds.iter().map(|r| {
                let mut record = json!({
                    "i": r.index,
                    "set": r.question.alice_set + 1,
                    "slot": r.question.bob_slot + 1,
                    "alice": r.alice.bits.iter().map(|&b| u8::from(b)).collect::<Vec<_>>(),
                    "bob": u8::from(r.bob.bit),
                    "won": r.won,
                    "bitsAB": r.bits_alice_to_bob,
                    "bitsBA": r.bits_bob_to_alice,
                });
                if let Some(err) = &r.error {
                    record["error"] = json!(err);
                }
                record
            }).collect::<Vec<_>>(),
            "summary": {
                "rounds": self.summary.rounds,
                "wins": self.summary.wins,
                "winRate": self.summary.win_rate.fraction(),
                "meanBits": format!("{}/{}", self.summary.mean_bits.numer(), self.summary.mean_bits.denom()),
            },
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("transcripts serialize")
    }
}

/// Plays `n` seeded rounds of `strategy` against the referee.
pub fn play_rounds(
    set: &KsSet,
    strategy: &dyn Strategy,
    n: u64,
    seed: u64,
) -> Result<Transcript, HarnessError> {
    if n == 0 {
        return Err(HarnessError::NoRounds);
    }
    let mut rounds = Vec::with_capacity(n as usize);
    let mut wins = 0u64;
    let mut total_bits = 0u64;
    for index in 0..n {
        let mut question_rng = RandomSource::derived(seed, round_stream(index, LANE_QUESTION));
        let question = draw_question(set, &mut question_rng);
        let mut round = Round::new(set, seed, index);

        let mut error: Option<String> = None;
        let alice = match strategy.alice_answer(question.alice_set, &mut round) {
            Ok(a) => a,
            Err(e) => {
                error = Some(e.to_string());
                AliceAnswer { bits: [false; 4] }
            }
        };
        let bob = if error.is_none() {
            match strategy.bob_answer(
                set.canonical_at(question.alice_set, question.bob_slot),
                &mut round,
            ) {
                Ok(b) => b,
                Err(e) => {
                    error = Some(e.to_string());
                    BobAnswer { bit: false }
                }
            }
        } else {
            BobAnswer { bit: false }
        };

        let bits_alice_to_bob = round.channel.bits_alice_to_bob();
        let bits_bob_to_alice = round.channel.bits_bob_to_alice();
        if error.is_none() && strategy.no_communication() && round.channel.total_bits() > 0 {
            error = Some("no-communication strategy wrote to the channel".to_string());
        }

        let won = error.is_none() && evaluate_win(&question, &alice, &bob);
        if won {
            wins += 1;
        }
        total_bits += (bits_alice_to_bob + bits_bob_to_alice) as u64;
        rounds.push(RoundRecord {
            index,
            question,
            alice,
            bob,
            won,
            bits_alice_to_bob,
            bits_bob_to_alice,
            error,
        });
    }
    let summary = Summary {
        rounds: n,
        wins,
        win_rate: ExactProb::new(wins, n).expect("wins never exceed rounds"),
        mean_bits: BigRational::new(BigInt::from(total_bits), BigInt::from(n)),
    };
    Ok(Transcript {
        seed,
        strategy: strategy.name().to_string(),
        rounds,
        summary,
    })
}

/// Exact win probability of a strategy that admits exact analysis, bypassing
/// sampling entirely.
pub fn exact_win_probability(strategy: &dyn Strategy) -> Result<ExactProb, HarnessError> {
    strategy
        .exact_win_probability()
        .ok_or_else(|| HarnessError::NotExactlyAnalyzable(strategy.name().to_string()))
}
