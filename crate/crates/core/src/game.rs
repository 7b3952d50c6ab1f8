//! Oracle access to a live population of tags, and the indistinguishability
//! game played over it.
//!
//! A strategy never touches protocol state. It gets an [`Oracles`] value,
//! which exposes execute, block, inject (when enabled), corrupt (when
//! enabled) and test queries over opaque [`TagHandle`]s. Hidden state is only
//! reachable through [`OracleWorld`], which the judge holds.
//!
//! ```compile_fail
//! use rfid_lab::game::{Capabilities, OracleWorld};
//! use rfid_lab::ihrma::{Ihrma, IhrmaParams};
//! use rfid_lab::session::Variant;
//!
//! let proto = Ihrma::new(IhrmaParams::new(16, Variant::Original).unwrap(), 1);
//! let mut world = OracleWorld::new(proto, 2, 7);
//! let handles = world.handles();
//! let oracles = world.oracles(Capabilities::PASSIVE);
//! // Strategies cannot look inside tags.
//! let _ = oracles.inspect(handles[0]);
//! ```

use std::fmt;

use thiserror::Error;

use crate::codec::GameRecord;
use crate::i2srs::{I2srs, I2srsTagMessage};
use crate::ihrma::{Ihrma, IhrmaServerMessage, IhrmaTagResponse};
use crate::primitives::PrimitiveSuite;
use crate::protocol::Protocol;
use crate::rng::SeededRng;
use crate::session::{Action, Interceptor, Passive, SessionTranscript};
use crate::word::Word;

/// z for a two-sided 99% normal interval.
pub const Z_99: f64 = 2.5758;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("unknown step {step:?}; this protocol has {known:?}")]
    UnknownStep {
        step: String,
        known: &'static [&'static str],
    },
    #[error("{0} queries are disabled in this game")]
    NotPermitted(&'static str),
    #[error("no tag behind handle {0}")]
    UnknownHandle(usize),
    #[error("test needs two distinct tags")]
    SameHandle,
    #[error("the test query was already issued")]
    ChallengeIssued,
}

/// Opaque name of a tag, as the adversary sees it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TagHandle(usize);

impl TagHandle {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for TagHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Capabilities {
    pub corrupt: bool,
    pub inject: bool,
}

impl Capabilities {
    pub const PASSIVE: Capabilities = Capabilities {
        corrupt: false,
        inject: false,
    };
    pub const ACTIVE: Capabilities = Capabilities {
        corrupt: false,
        inject: true,
    };
    pub const CORRUPT: Capabilities = Capabilities {
        corrupt: true,
        inject: false,
    };
    pub const ALL: Capabilities = Capabilities {
        corrupt: true,
        inject: true,
    };
}

/// A population of enrolled tags sharing one back end.
#[derive(Debug, Clone)]
pub struct OracleWorld<P: Protocol> {
    protocol: P,
    backend: P::Backend,
    tags: Vec<P::Tag>,
    /// Handle index -> tag index. The challenge handle is appended here.
    aliases: Vec<usize>,
    blocks: Vec<(usize, &'static str)>,
    challenge: Option<usize>,
    rng: SeededRng,
    seed: u64,
    sessions: u64,
    log: Vec<SessionTranscript>,
}

impl<P: Protocol> OracleWorld<P> {
    /// Enrolls `population` fresh tags.
    pub fn new(protocol: P, population: usize, seed: u64) -> Self {
        let mut setup = SeededRng::new(seed).fork(0);
        let mut backend = protocol.new_backend(&mut setup);
        let tags: Vec<_> = (0..population)
            .map(|_| protocol.enroll(&mut backend, &mut setup))
            .collect();
        Self {
            protocol,
            backend,
            aliases: (0..tags.len()).collect(),
            tags,
            blocks: Vec::new(),
            challenge: None,
            rng: SeededRng::new(seed).fork(1),
            seed,
            sessions: 0,
            log: Vec::new(),
        }
    }

    pub fn protocol(&self) -> &P {
        &self.protocol
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Handles of the enrolled tags, not including any challenge handle.
    pub fn handles(&self) -> Vec<TagHandle> {
        (0..self.tags.len()).map(TagHandle).collect()
    }

    pub fn oracles(&mut self, caps: Capabilities) -> Oracles<'_, P> {
        Oracles {
            world: self,
            caps,
            sessions: 0,
        }
    }

    fn resolve(&self, h: TagHandle) -> Result<usize, OracleError> {
        self.aliases
            .get(h.0)
            .copied()
            .ok_or(OracleError::UnknownHandle(h.0))
    }

    /// Judge-side view of a tag's state.
    pub fn inspect(&self, h: TagHandle) -> Option<&P::Tag> {
        self.resolve(h).ok().map(|i| &self.tags[i])
    }

    pub fn backend(&self) -> &P::Backend {
        &self.backend
    }

    pub fn synchronized(&self, h: TagHandle) -> bool {
        self.inspect(h)
            .is_some_and(|t| self.protocol.synchronized(t, &self.backend))
    }

    /// Every session run in this world, in order.
    pub fn transcripts(&self) -> &[SessionTranscript] {
        &self.log
    }

    pub fn into_transcripts(self) -> Vec<SessionTranscript> {
        self.log
    }

    fn stamp(&mut self, mut t: SessionTranscript) -> SessionTranscript {
        t.seed = self.seed;
        t.session = self.sessions;
        self.sessions += 1;
        self.log.push(t.clone());
        t
    }

    fn run(
        &mut self,
        idx: usize,
        interceptor: &mut dyn Interceptor<P::Message>,
    ) -> SessionTranscript {
        let blocked: Vec<&'static str> = self
            .blocks
            .iter()
            .filter(|(i, _)| *i == idx)
            .map(|(_, s)| *s)
            .collect();
        self.blocks.retain(|(i, _)| *i != idx);
        let mut guarded = |step: &'static str, m: &P::Message| {
            if blocked.contains(&step) {
                Action::Block
            } else {
                interceptor.intercept(step, m)
            }
        };
        let t = self.protocol.run_session(
            &mut self.tags[idx],
            &mut self.backend,
            &mut self.rng,
            &mut guarded,
        );
        self.stamp(t)
    }
}

/// The adversary's view of a world.
pub struct Oracles<'w, P: Protocol> {
    world: &'w mut OracleWorld<P>,
    caps: Capabilities,
    sessions: u64,
}

impl<P: Protocol> Oracles<'_, P> {
    pub fn capabilities(&self) -> Capabilities {
        self.caps
    }

    /// Public primitives, so strategies can compute `H` and `P`.
    pub fn suite(&self) -> &PrimitiveSuite {
        self.world.protocol.suite()
    }

    pub fn width(&self) -> u32 {
        self.world.protocol.width()
    }

    pub fn steps(&self) -> &'static [&'static str] {
        self.world.protocol.steps()
    }

    pub fn handles(&self) -> Vec<TagHandle> {
        self.world.handles()
    }

    /// Sessions this adversary has caused so far.
    pub fn sessions_used(&self) -> u64 {
        self.sessions
    }

    /// Adversary-side randomness.
    pub fn rng(&mut self) -> &mut SeededRng {
        &mut self.world.rng
    }

    /// Fresh adversary word at the protocol width.
    pub fn draw(&mut self) -> Word {
        let w = self.width();
        self.world.rng.draw(w)
    }

    /// Fresh nonzero XOR mask at the protocol width.
    pub fn draw_mask(&mut self) -> Word {
        let w = self.width();
        self.world.rng.draw_mask(w)
    }

    /// One honest session, observed.
    pub fn execute(&mut self, h: TagHandle) -> Result<SessionTranscript, OracleError> {
        let idx = self.world.resolve(h)?;
        self.sessions += 1;
        Ok(self.world.run(idx, &mut Passive))
    }

    /// Suppresses `step` in the next session of `h`.
    pub fn block_next(&mut self, h: TagHandle, step: &str) -> Result<(), OracleError> {
        let idx = self.world.resolve(h)?;
        let known = self.world.protocol.steps();
        let Some(&step) = known.iter().find(|s| **s == step) else {
            return Err(OracleError::UnknownStep {
                step: step.to_string(),
                known,
            });
        };
        self.world.blocks.push((idx, step));
        Ok(())
    }

    /// A session in which the adversary may alter any message in flight.
    pub fn execute_with(
        &mut self,
        h: TagHandle,
        interceptor: &mut dyn Interceptor<P::Message>,
    ) -> Result<SessionTranscript, OracleError> {
        self.require_inject()?;
        let idx = self.world.resolve(h)?;
        self.sessions += 1;
        Ok(self.world.run(idx, interceptor))
    }

    pub fn corrupt(&mut self, h: TagHandle) -> Result<P::Secrets, OracleError> {
        if !self.caps.corrupt {
            return Err(OracleError::NotPermitted("corrupt"));
        }
        let idx = self.world.resolve(h)?;
        Ok(self.world.protocol.secrets(&self.world.tags[idx]))
    }

    /// Draws the hidden bit and returns a handle that acts as `t_b`.
    pub fn test(&mut self, t0: TagHandle, t1: TagHandle) -> Result<TestChallenge, OracleError> {
        if self.world.challenge.is_some() {
            return Err(OracleError::ChallengeIssued);
        }
        let (i0, i1) = (self.world.resolve(t0)?, self.world.resolve(t1)?);
        if i0 == i1 {
            return Err(OracleError::SameHandle);
        }
        let b = u8::from(self.world.rng.coin());
        let target = if b == 0 { i0 } else { i1 };
        self.world.aliases.push(target);
        self.world.challenge = Some(target);
        Ok(TestChallenge {
            handle: TagHandle(self.world.aliases.len() - 1),
            b,
        })
    }

    /// Closes the game.
    pub fn guess(&self, challenge: TestChallenge, guess: u8, cost: u64) -> GameResult {
        GameResult {
            guess,
            b: challenge.b,
            primitive_evaluations: cost,
            success: guess == challenge.b,
        }
    }

    fn require_inject(&self) -> Result<(), OracleError> {
        if self.caps.inject {
            Ok(())
        } else {
            Err(OracleError::NotPermitted("inject"))
        }
    }
}

impl Oracles<'_, Ihrma> {
    /// Talks to tag `h` as a reader: sends `r_r`, then whatever `forge`
    /// builds from the tag's response.
    pub fn impersonate_reader(
        &mut self,
        h: TagHandle,
        r_r: Word,
        forge: impl FnOnce(&IhrmaTagResponse) -> Option<IhrmaServerMessage>,
    ) -> Result<SessionTranscript, OracleError> {
        self.require_inject()?;
        let idx = self.world.resolve(h)?;
        self.sessions += 1;
        let w = &mut *self.world;
        let t = w.protocol.probe_tag(&mut w.tags[idx], r_r, &mut w.rng, forge);
        Ok(w.stamp(t))
    }

    /// Answers a genuine reader query with `forge(R_r)`.
    pub fn impersonate_tag(
        &mut self,
        forge: impl FnOnce(Word) -> IhrmaTagResponse,
    ) -> Result<SessionTranscript, OracleError> {
        self.require_inject()?;
        self.sessions += 1;
        let w = &mut *self.world;
        let t = w.protocol.impersonate_tag(&mut w.backend, &mut w.rng, forge);
        Ok(w.stamp(t))
    }
}

impl Oracles<'_, I2srs> {
    /// Answers a genuine reader query with `forge(R_r)`.
    pub fn impersonate_tag(
        &mut self,
        forge: impl FnOnce(Word) -> I2srsTagMessage,
    ) -> Result<SessionTranscript, OracleError> {
        self.require_inject()?;
        self.sessions += 1;
        let w = &mut *self.world;
        let t = w.protocol.impersonate_tag(&mut w.backend, &mut w.rng, forge);
        Ok(w.stamp(t))
    }
}

/// The open challenge. Dropping it forfeits the game; guessing consumes it.
pub struct TestChallenge {
    handle: TagHandle,
    b: u8,
}

impl TestChallenge {
    pub fn handle(&self) -> TagHandle {
        self.handle
    }
}

impl fmt::Debug for TestChallenge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestChallenge")
            .field("handle", &self.handle)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GameResult {
    pub guess: u8,
    pub b: u8,
    pub primitive_evaluations: u64,
    pub success: bool,
}

/// An adversary for the game.
pub trait Strategy<P: Protocol> {
    fn name(&self) -> &str;
    fn capabilities(&self) -> Capabilities;
    /// Plays one full game: learning, `test`, challenge, `guess`.
    fn play(&self, oracles: &mut Oracles<'_, P>) -> Result<GameResult, OracleError>;
}

/// Monte Carlo summary of a game.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdvantageEstimate {
    pub trials: u64,
    pub successes: u64,
    /// `|successes / trials - 1/2|`.
    pub advantage: f64,
    pub half_width: f64,
    pub max_cost: u64,
    pub total_cost: u64,
}

impl AdvantageEstimate {
    pub fn from_counts(trials: u64, successes: u64, max_cost: u64, total_cost: u64) -> Self {
        let (advantage, half_width) = if trials == 0 {
            (0.0, 0.0)
        } else {
            let p = successes as f64 / trials as f64;
            ((p - 0.5).abs(), Z_99 * (p * (1.0 - p) / trials as f64).sqrt())
        };
        Self {
            trials,
            successes,
            advantage,
            half_width,
            max_cost,
            total_cost,
        }
    }

    pub fn merge(self, other: Self) -> Self {
        Self::from_counts(
            self.trials + other.trials,
            self.successes + other.successes,
            self.max_cost.max(other.max_cost),
            self.total_cost + other.total_cost,
        )
    }
}

/// Games of one estimate, with the first few worlds' sessions kept.
#[derive(Debug, Clone)]
pub struct GameRun {
    pub estimate: AdvantageEstimate,
    pub records: Vec<GameRecord>,
    pub transcripts: Vec<SessionTranscript>,
}

/// Plays `trials` independent games. Game `i` runs in the world built by
/// `make_world(seed_i)`, where `seed_i` derives from `seed` and `i` only.
pub fn estimate_advantage<P, S>(
    strategy: &S,
    make_world: impl Fn(u64) -> OracleWorld<P>,
    trials: u64,
    seed: u64,
    keep_transcripts: u64,
) -> Result<GameRun, OracleError>
where
    P: Protocol,
    S: Strategy<P> + ?Sized,
{
    let root = SeededRng::new(seed);
    let mut run = GameRun {
        estimate: AdvantageEstimate::from_counts(0, 0, 0, 0),
        records: Vec::with_capacity(trials as usize),
        transcripts: Vec::new(),
    };
    for i in 0..trials {
        let game_seed = root.fork(i).seed();
        let mut world = make_world(game_seed);
        let result = strategy.play(&mut world.oracles(strategy.capabilities()))?;
        let cost = result.primitive_evaluations;
        run.estimate = run.estimate.merge(AdvantageEstimate::from_counts(
            1,
            u64::from(result.success),
            cost,
            cost,
        ));
        run.records.push(GameRecord {
            strategy: strategy.name().to_string(),
            protocol: world.protocol().id(),
            variant: world.protocol().variant(),
            b: result.b,
            guess: result.guess,
            cost,
            seed: game_seed,
        });
        if i < keep_transcripts {
            run.transcripts.extend(world.into_transcripts());
        }
    }
    Ok(run)
}

/// Monte Carlo success rate of a non-game experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    pub trials: u64,
    pub successes: u64,
    pub rate: f64,
    pub half_width: f64,
    pub max_cost: u64,
}

impl RateEstimate {
    pub fn from_counts(trials: u64, successes: u64, max_cost: u64) -> Self {
        let (rate, half_width) = if trials == 0 {
            (0.0, 0.0)
        } else {
            let p = successes as f64 / trials as f64;
            (p, Z_99 * (p * (1.0 - p) / trials as f64).sqrt())
        };
        Self {
            trials,
            successes,
            rate,
            half_width,
            max_cost,
        }
    }

    pub fn merge(self, other: Self) -> Self {
        Self::from_counts(
            self.trials + other.trials,
            self.successes + other.successes,
            self.max_cost.max(other.max_cost),
        )
    }
}

/// Runs `trial(seed_i)` for `i < trials`; each returns `(success, cost)`.
pub fn estimate_rate(
    trials: u64,
    seed: u64,
    mut trial: impl FnMut(u64, u64) -> (bool, u64),
) -> RateEstimate {
    let root = SeededRng::new(seed);
    (0..trials).fold(RateEstimate::from_counts(0, 0, 0), |acc, i| {
        let (ok, cost) = trial(i, root.fork(i).seed());
        acc.merge(RateEstimate::from_counts(1, u64::from(ok), cost))
    })
}

/// Always guesses 0.
#[derive(Debug, Clone, Copy, Default)]
pub struct BlindGuess;

impl<P: Protocol> Strategy<P> for BlindGuess {
    fn name(&self) -> &str {
        "blind"
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities::PASSIVE
    }

    fn play(&self, oracles: &mut Oracles<'_, P>) -> Result<GameResult, OracleError> {
        let h = oracles.handles();
        let c = oracles.test(h[0], h[1])?;
        Ok(oracles.guess(c, 0, 0))
    }
}

/// Corrupts `t0` and the challenge tag and compares. Always wins.
#[derive(Debug, Clone, Copy, Default)]
pub struct CorruptCompare;

impl<P: Protocol> Strategy<P> for CorruptCompare {
    fn name(&self) -> &str {
        "corrupt-compare"
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities::CORRUPT
    }

    fn play(&self, oracles: &mut Oracles<'_, P>) -> Result<GameResult, OracleError> {
        let h = oracles.handles();
        let before = oracles.corrupt(h[0])?;
        let c = oracles.test(h[0], h[1])?;
        let guess = u8::from(oracles.corrupt(c.handle())? != before);
        Ok(oracles.guess(c, guess, 0))
    }
}
