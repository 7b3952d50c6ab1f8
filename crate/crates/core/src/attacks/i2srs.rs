//! Attacks on I2SRS.
//!
//! The original tag leaks `Z = β ^ γ ^ α = K ^ α ^ P(α ^ K)`, which does not
//! depend on the nonce. That one constant drives key recovery and tracing;
//! the linear way `R_t` enters `M_1`'s input, `β` and `γ` drives the
//! replays; and the `P`-chain key update drives the forward and backward
//! linking.

use crate::game::{Capabilities, GameResult, OracleError, Oracles, Strategy, TagHandle};
use crate::i2srs::{steps, I2srs, I2srsMessage, I2srsTagMessage};
use crate::primitives::{MeteredSuite, Primitives};
use crate::session::{Action, SessionTranscript};
use crate::word::Word;

use super::search::{fits_residue, joint_preimages, residue_candidates};
use super::AttackOutcome;

fn field(t: &SessionTranscript, step: &str, name: &str) -> Word {
    t.field(step, name)
        .unwrap_or_else(|| panic!("transcript lacks {name} at step {step}"))
}

fn tag_message(t: &SessionTranscript) -> I2srsTagMessage {
    I2srsTagMessage {
        m1: field(t, steps::RESPONSE, "m1"),
        beta: field(t, steps::RESPONSE, "beta"),
        gamma: field(t, steps::RESPONSE, "gamma"),
        alpha: field(t, steps::RESPONSE, "alpha"),
    }
}

/// `β ^ γ ^ α`.
pub fn residue(m: &I2srsTagMessage) -> Word {
    m.beta ^ m.gamma ^ m.alpha
}

/// Result of the key search.
#[derive(Debug, Clone)]
pub struct Reveal {
    /// Key at the first transcript, when exactly one candidate survived.
    pub k_i: Option<Word>,
    /// The same key carried forward to `last`.
    pub k_current: Option<Word>,
    /// Last observed session; the tag has not updated since.
    pub last: SessionTranscript,
    /// Evaluations spent against each transcript.
    pub costs: Vec<u64>,
    pub sessions_used: u64,
}

impl Reveal {
    pub fn outcome(&self) -> AttackOutcome {
        let mut out = AttackOutcome {
            primitive_evaluations: self.costs.iter().sum(),
            max_transcript_cost: self.costs.iter().copied().max().unwrap_or(0),
            sessions_used: self.sessions_used,
            ..AttackOutcome::default()
        };
        if let (Some(k), Some(cur)) = (self.k_i, self.k_current) {
            out.recovered.insert("k_i".into(), k);
            out.recovered.insert("k_current".into(), cur);
        }
        out
    }
}

/// How many extra transcripts the search may use to break ties.
pub const MAX_TIEBREAK_ROUNDS: usize = 4;

/// Observes a session with `M_2` blocked and keeps every key that fits its
/// residue. If more than one fits, lets the tag update once and checks each
/// survivor's `P`-successor against a new blocked session.
pub fn secret_reveal(o: &mut Oracles<'_, I2srs>, h: TagHandle) -> Result<Reveal, OracleError> {
    let suite = o.suite().clone();
    o.block_next(h, steps::FINAL)?;
    let mut last = o.execute(h)?;
    let m = tag_message(&last);

    let metered = MeteredSuite::new(&suite);
    let found = residue_candidates(&metered, m.alpha, residue(&m));
    let mut costs = vec![metered.evaluations()];
    // (key at the first transcript, key now)
    let mut survivors: Vec<(Word, Word)> = found.into_iter().map(|k| (k, k)).collect();

    let mut rounds = 0;
    while survivors.len() > 1 && rounds < MAX_TIEBREAK_ROUNDS {
        rounds += 1;
        o.execute(h)?;
        o.block_next(h, steps::FINAL)?;
        last = o.execute(h)?;
        let m = tag_message(&last);
        let z = residue(&m);
        let metered = MeteredSuite::new(&suite);
        survivors = survivors
            .into_iter()
            .map(|(k0, k)| (k0, metered.prng(k)))
            .filter(|&(_, k)| fits_residue(&metered, k, m.alpha, z))
            .collect();
        costs.push(metered.evaluations());
    }

    let unique = (survivors.len() == 1).then(|| survivors[0]);
    Ok(Reveal {
        k_i: unique.map(|(k, _)| k),
        k_current: unique.map(|(_, k)| k),
        last,
        costs,
        sessions_used: o.sessions_used(),
    })
}

/// The forged reply to a fresh `R_r'`: keep `M_1` and `α`, and move the
/// nonce to `R_t' = R_t ^ R_r ^ R_r'` so that `P(EPC ^ R_r' ^ R_t')` is the
/// recorded one. `γ` carries `R_t` linearly in both variants, so it is
/// shifted by the same amount.
fn forge(recorded: &SessionTranscript, k: Word, r_r2: Word) -> I2srsTagMessage {
    let m = tag_message(recorded);
    let r_r = field(recorded, steps::QUERY, "r_r");
    let r_t = m.beta ^ k;
    let r_t2 = r_t ^ r_r ^ r_r2;
    I2srsTagMessage {
        m1: m.m1,
        beta: r_t2 ^ k,
        gamma: m.gamma ^ r_t ^ r_t2,
        alpha: m.alpha,
    }
}

/// Recovers the key, then answers a genuine reader with the forged reply.
pub fn tag_impersonation(o: &mut Oracles<'_, I2srs>, h: TagHandle) -> Result<AttackOutcome, OracleError> {
    let reveal = secret_reveal(o, h)?;
    let k = reveal
        .k_current
        .unwrap_or_else(|| Word::zero(o.width()));
    let attack = o.impersonate_tag(|r_r2| forge(&reveal.last, k, r_r2))?;
    let mut out = reveal.outcome();
    out.succeeded = attack.outcome.server_accepted == Some(true);
    out.sessions_used = o.sessions_used();
    Ok(out)
}

/// Replays an observed reply to a fresh `R_r'` with `β` and `γ` shifted by
/// `R_r ^ R_r'`. Needs no key.
pub fn replay(o: &mut Oracles<'_, I2srs>, h: TagHandle) -> Result<AttackOutcome, OracleError> {
    let seen = o.execute(h)?;
    let attack = o.impersonate_tag(|r_r2| forge(&seen, Word::zero(r_r2.width()), r_r2))?;
    Ok(AttackOutcome {
        succeeded: attack.outcome.server_accepted == Some(true),
        sessions_used: o.sessions_used(),
        ..AttackOutcome::default()
    })
}

/// Replays an observed reply verbatim to a fresh `R_r'`.
pub fn plain_replay(o: &mut Oracles<'_, I2srs>, h: TagHandle) -> Result<AttackOutcome, OracleError> {
    let seen = o.execute(h)?;
    let m = tag_message(&seen);
    let attack = o.impersonate_tag(|_| m)?;
    Ok(AttackOutcome {
        succeeded: attack.outcome.server_accepted == Some(true),
        sessions_used: o.sessions_used(),
        ..AttackOutcome::default()
    })
}

/// Flips bits of `M_2` on its way to the tag, then runs an honest session.
pub fn desync_dos(
    o: &mut Oracles<'_, I2srs>,
    h: TagHandle,
    tamper: bool,
) -> Result<AttackOutcome, OracleError> {
    let mask = o.draw_mask();
    let mut flip = |step: &'static str, m: &I2srsMessage| match (step, m, tamper) {
        (steps::FINAL, I2srsMessage::Final(m2), true) => Action::Replace(I2srsMessage::Final(*m2 ^ mask)),
        _ => Action::Deliver,
    };
    let hit = o.execute_with(h, &mut flip)?;
    let after = o.execute(h)?;
    Ok(AttackOutcome {
        succeeded: hit.outcome.tag_accepted == Some(false) && hit.outcome.server_updated,
        lasting: Some(!after.outcome.mutual()),
        sessions_used: o.sessions_used(),
        ..AttackOutcome::default()
    })
}

/// Which on-air combination the tracing strategy compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LinkRule {
    /// `β ^ γ ^ α`, constant while the tag does not update.
    #[default]
    Residue,
    /// `α ^ β` as printed; `β` carries a fresh nonce each session.
    AlphaBeta,
}

impl LinkRule {
    fn apply(self, m: &I2srsTagMessage) -> Word {
        match self {
            LinkRule::Residue => residue(m),
            LinkRule::AlphaBeta => m.alpha ^ m.beta,
        }
    }
}

/// Blocks `M_2` to `T_0` so it keeps its secrets, then compares the
/// challenge tag's linkable value with `T_0`'s.
#[derive(Debug, Clone, Copy, Default)]
pub struct Traceability {
    pub rule: LinkRule,
}

impl Strategy<I2srs> for Traceability {
    fn name(&self) -> &str {
        match self.rule {
            LinkRule::Residue => "i2srs-traceability",
            LinkRule::AlphaBeta => "i2srs-traceability-alpha-beta",
        }
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities::PASSIVE
    }

    fn play(&self, o: &mut Oracles<'_, I2srs>) -> Result<GameResult, OracleError> {
        let h = o.handles();
        o.block_next(h[0], steps::FINAL)?;
        let learned = self.rule.apply(&tag_message(&o.execute(h[0])?));
        let c = o.test(h[0], h[1])?;
        let seen = self.rule.apply(&tag_message(&o.execute(c.handle())?));
        Ok(o.guess(c, u8::from(seen != learned), 0))
    }
}

/// Corrupts `T_0`, lets the challenge tag run two sessions, and predicts
/// `M_1` of the third from `P(P(K))`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ForwardTraceability;

/// `𝔥 = P(EPC ^ R_r ^ β ^ 𝔣) ^ 𝔣` with `𝔣` the predicted key; equals `M_1`
/// when the prediction is right.
pub fn forward_prediction(prims: &impl Primitives, key: Word, epc: Word, r_r: Word, beta: Word) -> Word {
    let g = beta ^ key;
    prims.prng(epc ^ r_r ^ g) ^ key
}

impl Strategy<I2srs> for ForwardTraceability {
    fn name(&self) -> &str {
        "i2srs-forward-traceability"
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities::CORRUPT
    }

    fn play(&self, o: &mut Oracles<'_, I2srs>) -> Result<GameResult, OracleError> {
        let h = o.handles();
        let secrets = o.corrupt(h[0])?;
        let c = o.test(h[0], h[1])?;
        o.execute(c.handle())?;
        o.execute(c.handle())?;
        let t = o.execute(c.handle())?;

        let suite = o.suite().clone();
        let m = MeteredSuite::new(&suite);
        let f = m.prng(m.prng(secrets.keys.k));
        let predicted = forward_prediction(&m, f, secrets.epc, field(&t, steps::QUERY, "r_r"), field(&t, steps::RESPONSE, "beta"));
        let guess = u8::from(predicted != field(&t, steps::RESPONSE, "m1"));
        Ok(o.guess(c, guess, m.evaluations()))
    }
}

/// Records a session of the challenge tag, corrupts `T_0`, inverts one
/// `P` step of its keys by brute force and checks whether the recorded
/// `M_2` is explained by them.
#[derive(Debug, Clone, Copy, Default)]
pub struct BackwardTraceability;

impl Strategy<I2srs> for BackwardTraceability {
    fn name(&self) -> &str {
        "i2srs-backward-traceability"
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities::CORRUPT
    }

    fn play(&self, o: &mut Oracles<'_, I2srs>) -> Result<GameResult, OracleError> {
        let h = o.handles();
        let c = o.test(h[0], h[1])?;
        let t = o.execute(c.handle())?;
        let m2 = field(&t, steps::FINAL, "m2");
        let beta = field(&t, steps::RESPONSE, "beta");
        let secrets = o.corrupt(h[0])?;

        let suite = o.suite().clone();
        let m = MeteredSuite::new(&suite);
        let (ks, ps) = joint_preimages(&m, secrets.keys.k, secrets.keys.p);
        let linked = ks.iter().any(|&k| {
            let base = m.prng(secrets.epc ^ beta ^ k);
            ps.iter().any(|&p| base ^ p == m2)
        });
        Ok(o.guess(c, u8::from(!linked), m.evaluations()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{estimate_advantage, OracleWorld};
    use crate::i2srs::I2srsParams;
    use crate::primitives::PrimitiveSuite;
    use crate::protocol::Protocol;
    use crate::session::{Slot, Variant};

    fn world(width: u32, variant: Variant, seed: u64) -> OracleWorld<I2srs> {
        OracleWorld::new(I2srs::new(I2srsParams::new(width, variant).unwrap(), seed ^ 0x99), 2, seed)
    }

    fn reveal_in(w: &mut OracleWorld<I2srs>) -> Reveal {
        let h = w.handles()[0];
        secret_reveal(&mut w.oracles(Capabilities::PASSIVE), h).unwrap()
    }

    #[test]
    fn reveal_recovers_the_key_within_budget() {
        for seed in 0..40 {
            let mut w = world(16, Variant::Original, seed);
            let h = w.handles()[0];
            let k0 = w.inspect(h).unwrap().keys.k;
            let r = reveal_in(&mut w);
            assert_eq!(r.k_i, Some(k0), "seed {seed}");
            assert_eq!(r.k_current, Some(w.inspect(h).unwrap().keys.k));
            assert_eq!(r.costs[0], 1 << 16);
            assert!(r.costs.iter().all(|&c| c <= 1 << 16));
        }
    }

    #[test]
    fn reveal_search_matches_independent_oracle_w8() {
        for seed in 0..64 {
            let mut w = world(8, Variant::Original, seed);
            let k0 = w.inspect(w.handles()[0]).unwrap().keys.k;
            let r = reveal_in(&mut w);
            let m = tag_message(&w.transcripts()[0]);
            let suite = PrimitiveSuite::uniform(w.protocol().suite().seed(), 8);
            // Independent sweep over raw integers.
            let (a, z) = (m.alpha.value(), (m.beta ^ m.gamma ^ m.alpha).value());
            let expected: Vec<Word> = (0u128..256)
                .filter(|&k| k ^ a ^ suite.prng_p(Word::new(a ^ k, 8)).value() == z)
                .map(|k| Word::new(k, 8))
                .collect();
            let metered = MeteredSuite::new(&suite);
            assert_eq!(residue_candidates(&metered, m.alpha, residue(&m)), expected);
            assert!(expected.contains(&k0));
            if let Some(k) = r.k_i {
                assert_eq!(k, k0, "seed {seed}");
            }
        }
    }

    #[test]
    fn reveal_fails_on_improved() {
        let hits = (0..200)
            .filter(|&seed| {
                let mut w = world(16, Variant::Improved, seed);
                let h = w.handles()[0];
                let k0 = w.inspect(h).unwrap().keys.k;
                reveal_in(&mut w).k_i == Some(k0)
            })
            .count();
        assert!(hits <= 2, "{hits}");
    }

    #[test]
    fn impersonation_and_replay_hit_the_old_slot() {
        for seed in 0..30 {
            let mut w = world(16, Variant::Original, seed);
            let h = w.handles()[0];
            let out = tag_impersonation(&mut w.oracles(Capabilities::ACTIVE), h).unwrap();
            assert!(out.succeeded, "seed {seed}");
            assert_eq!(w.transcripts().last().unwrap().outcome.server_slot, Some(Slot::Old));

            let mut w = world(16, Variant::Original, seed);
            assert!(replay(&mut w.oracles(Capabilities::ACTIVE), h).unwrap().succeeded);
            let mut w = world(16, Variant::Original, seed);
            assert!(!plain_replay(&mut w.oracles(Capabilities::ACTIVE), h).unwrap().succeeded);
        }
    }

    #[test]
    fn improved_rejects_forgeries() {
        // The shifted γ always verifies; M_1 matches by chance only, 2^-16
        // per slot tried.
        let mut accepted = 0;
        for seed in 0..300 {
            let mut w = world(16, Variant::Improved, seed);
            let h = w.handles();
            let mut o = w.oracles(Capabilities::ACTIVE);
            accepted += usize::from(replay(&mut o, h[0]).unwrap().succeeded);
            accepted += usize::from(plain_replay(&mut o, h[1]).unwrap().succeeded);
        }
        assert!(accepted <= 3, "{accepted}");
    }

    #[test]
    fn forward_prediction_is_exact_on_the_same_tag() {
        for seed in 0..50 {
            let mut w = world(16, Variant::Original, seed);
            let h = w.handles()[0];
            let mut o = w.oracles(Capabilities::CORRUPT);
            let s = o.corrupt(h).unwrap();
            o.execute(h).unwrap();
            o.execute(h).unwrap();
            let t = o.execute(h).unwrap();
            let suite = o.suite().clone();
            let f = suite.prng_p(suite.prng_p(s.keys.k));
            let got = forward_prediction(&suite, f, s.epc, field(&t, steps::QUERY, "r_r"), field(&t, steps::RESPONSE, "beta"));
            assert_eq!(got, field(&t, steps::RESPONSE, "m1"));
        }
    }

    #[test]
    fn backward_inverter_matches_exhaustive_oracle_w8() {
        let suite = PrimitiveSuite::uniform(21, 8);
        let image: Vec<Word> = (0u128..256).map(|v| suite.prng_p(Word::new(v, 8))).collect();
        for (x, &k) in image.iter().enumerate() {
            let (pre, _) = joint_preimages(&suite, k, k);
            let oracle: Vec<Word> = (0..256)
                .filter(|&y| image[y] == k)
                .map(|y| Word::new(y as u128, 8))
                .collect();
            assert_eq!(pre, oracle);
            assert!(pre.contains(&Word::new(x as u128, 8)));
        }
    }

    #[test]
    fn games_separate_the_variants() {
        let n = 400;
        for (strategy, name) in [
            (&Traceability::default() as &dyn Strategy<I2srs>, "trace"),
            (&ForwardTraceability, "forward"),
            (&BackwardTraceability, "backward"),
        ] {
            let o = estimate_advantage(strategy, |s| world(16, Variant::Original, s), n, 5, 0).unwrap().estimate;
            assert!(o.advantage >= 0.45, "{name}: {o:?}");
            assert!(o.max_cost <= 1 << 17, "{name}: {o:?}");
            let i = estimate_advantage(strategy, |s| world(16, Variant::Improved, s), n, 5, 0).unwrap().estimate;
            assert!(i.advantage <= 0.08, "{name}: {i:?}");
        }
    }

    #[test]
    fn printed_link_rule_is_not_session_invariant() {
        let e = estimate_advantage(
            &Traceability { rule: LinkRule::AlphaBeta },
            |s| world(16, Variant::Original, s),
            400,
            6,
            0,
        )
        .unwrap()
        .estimate;
        assert!(e.advantage <= 0.08, "{e:?}");
    }

    #[test]
    fn unrelated_tags_rarely_share_a_residue() {
        let mut same = 0;
        for seed in 0..20_000 {
            let mut w = world(16, Variant::Original, seed);
            let h = w.handles();
            let mut o = w.oracles(Capabilities::PASSIVE);
            let a = residue(&tag_message(&o.execute(h[0]).unwrap()));
            let b = residue(&tag_message(&o.execute(h[1]).unwrap()));
            same += usize::from(a == b);
        }
        // 2^-16 per pair.
        assert!(same <= 4, "{same}");
    }

    #[test]
    fn dos_is_recoverable() {
        for variant in Variant::ALL {
            for seed in 0..100 {
                let mut w = world(16, variant, seed);
                let h = w.handles()[0];
                let out = desync_dos(&mut w.oracles(Capabilities::ACTIVE), h, true).unwrap();
                assert!(out.succeeded);
                assert_eq!(out.lasting, Some(false));
                let mut w = world(16, variant, seed);
                assert!(!desync_dos(&mut w.oracles(Capabilities::ACTIVE), h, false).unwrap().succeeded);
            }
        }
    }
}
