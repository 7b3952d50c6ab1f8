//! Attacks on IHRMA.
//!
//! Both impersonations exploit the original `RID`: whenever the two nonces
//! involved are below `S_j`, `RID` is `1 || S_j` in both sessions, so a value
//! bound to `RID` in one session verifies in the other once the nonce
//! difference is patched in through the XOR-blinded `D`.

use crate::game::{Capabilities, GameResult, OracleError, Oracles, Strategy, TagHandle};
use crate::ihrma::{steps, Ihrma, IhrmaMessage, IhrmaServerMessage, IhrmaTagResponse};
use crate::session::{Action, SessionTranscript, Variant};
use crate::word::Word;

use super::AttackOutcome;

fn field(t: &SessionTranscript, step: &str, name: &str) -> Word {
    t.field(step, name)
        .unwrap_or_else(|| panic!("transcript lacks {name} at step {step}"))
}

/// Learns `(C_1, D)` from a session the server rejects, then answers a fresh
/// `R_r'` with `C_1` and `D ^ R_r ^ R_r'`.
pub fn tag_impersonation(o: &mut Oracles<'_, Ihrma>, h: TagHandle) -> Result<AttackOutcome, OracleError> {
    let mask = o.draw_mask();
    // Spoiling D keeps the server from authenticating the tag, so neither
    // side moves on.
    let mut spoil = |step: &'static str, m: &IhrmaMessage| match (step, m) {
        (steps::RESPONSE, IhrmaMessage::Response(r)) => {
            Action::Replace(IhrmaMessage::Response(IhrmaTagResponse { d: r.d ^ mask, ..*r }))
        }
        _ => Action::Deliver,
    };
    let learned = o.execute_with(h, &mut spoil)?;
    let r_r = field(&learned, steps::QUERY, "r_r");
    let c1 = field(&learned, steps::RESPONSE, "c1");
    let d = field(&learned, steps::RESPONSE, "d");

    let attack = o.impersonate_tag(|r_r2| IhrmaTagResponse {
        c1,
        d: d ^ r_r ^ r_r2,
    })?;
    Ok(AttackOutcome {
        succeeded: attack.outcome.server_accepted == Some(true),
        sessions_used: o.sessions_used(),
        ..AttackOutcome::default()
    })
}

/// The final message rebased onto a new tag response: the difference of the
/// two `D` values is the difference of the two nonces, which is all `C_4`
/// and `C_5` need to follow.
fn rebase(stored: &IhrmaServerMessage, d: Word, d_new: Word) -> IhrmaServerMessage {
    let delta = d ^ d_new;
    IhrmaServerMessage {
        data: stored.data,
        c3: stored.c3,
        c4: stored.c4.map(|c| c ^ delta),
        c5: stored.c5.map(|c| c ^ delta),
    }
}

fn final_message(t: &SessionTranscript) -> IhrmaServerMessage {
    IhrmaServerMessage {
        data: field(t, steps::FINAL, "data"),
        c3: field(t, steps::FINAL, "c3"),
        c4: t.field(steps::FINAL, "c4"),
        c5: t.field(steps::FINAL, "c5"),
    }
}

/// Blocks the final message of one session, then poses as a reader and
/// sends the tag that message rebased onto its new response.
pub fn reader_impersonation(
    o: &mut Oracles<'_, Ihrma>,
    h: TagHandle,
) -> Result<AttackOutcome, OracleError> {
    o.block_next(h, steps::FINAL)?;
    let learned = o.execute(h)?;
    let stored = final_message(&learned);
    let d = field(&learned, steps::RESPONSE, "d");

    let r_r = o.draw();
    let attack = o.impersonate_reader(h, r_r, |resp| Some(rebase(&stored, d, resp.d)))?;
    Ok(AttackOutcome {
        succeeded: attack.outcome.tag_accepted == Some(true),
        sessions_used: o.sessions_used(),
        ..AttackOutcome::default()
    })
}

/// Flips bits of `C_4` (original) or `C_3` (improved) in flight, then runs an
/// honest session. `tamper == false` is the control run.
pub fn desync_dos(
    o: &mut Oracles<'_, Ihrma>,
    h: TagHandle,
    variant: Variant,
    tamper: bool,
) -> Result<AttackOutcome, OracleError> {
    let mask = o.draw_mask();
    let mut flip = |step: &'static str, m: &IhrmaMessage| match (step, m, tamper) {
        (steps::FINAL, IhrmaMessage::Final(f), true) => {
            let mut f = *f;
            match variant {
                Variant::Original => f.c4 = f.c4.map(|c| c ^ mask),
                Variant::Improved => f.c3 ^= mask,
            }
            Action::Replace(IhrmaMessage::Final(f))
        }
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

/// Links the challenge tag to `T_0` by replaying a blocked final message of
/// `T_0`, rebased as in [`reader_impersonation`], until the tag accepts.
/// Only `T_0` can ever accept it.
#[derive(Debug, Clone, Copy)]
pub struct ProbeTraceability {
    pub probes: u32,
}

impl Default for ProbeTraceability {
    fn default() -> Self {
        Self { probes: 128 }
    }
}

impl Strategy<Ihrma> for ProbeTraceability {
    fn name(&self) -> &str {
        "ihrma-traceability"
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities::ACTIVE
    }

    fn play(&self, o: &mut Oracles<'_, Ihrma>) -> Result<GameResult, OracleError> {
        let h = o.handles();
        o.block_next(h[0], steps::FINAL)?;
        let learned = o.execute(h[0])?;
        let stored = final_message(&learned);
        let d = field(&learned, steps::RESPONSE, "d");

        let c = o.test(h[0], h[1])?;
        let mut guess = 1;
        for _ in 0..self.probes {
            let r_r = o.draw();
            let t = o.impersonate_reader(c.handle(), r_r, |resp| Some(rebase(&stored, d, resp.d)))?;
            if t.outcome.tag_accepted == Some(true) {
                guess = 0;
                break;
            }
        }
        Ok(o.guess(c, guess, 0))
    }
}
