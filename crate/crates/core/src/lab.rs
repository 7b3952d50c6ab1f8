//! Experiment runner and the feature matrix.
//!
//! An experiment is one attack against one variant, repeated over seeded
//! independent worlds. Its measured rate (or game advantage) is turned into a
//! verdict by [`Tolerances`], and the verdicts of all twenty-two experiments
//! form the [`FeatureMatrixReport`].

use std::fmt::Write as _;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::attacks::{self, AttackId, AttackKind, AttackOutcome};
use crate::codec::GameRecord;
use crate::game::{estimate_advantage, Capabilities, OracleError, OracleWorld, Strategy};
use crate::i2srs::{I2srs, I2srsParams};
use crate::ihrma::{Ihrma, IhrmaParams};
use crate::protocol::{ParamError, Protocol};
use crate::rng::derive_seed;
use crate::session::{ProtocolId, SessionTranscript, Variant};

/// Trials whose sessions are kept for the transcript log.
pub const KEPT_TRIALS: u64 = 10;
/// Evaluation budget per transcript for the key search.
pub const REVEAL_BUDGET: u64 = 1 << 16;
/// Evaluation budget per game for backward tracing.
pub const BACKWARD_BUDGET: u64 = 1 << 17;

#[derive(Debug, Error)]
pub enum LabError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("attack {attack} targets {protocol}, which is not selected")]
    ProtocolMismatch {
        attack: AttackId,
        protocol: ProtocolId,
    },
    #[error("feature matrix is incomplete; missing {}", .0.join(", "))]
    IncompleteMatrix(Vec<String>),
}

/// Bands that turn a measurement into a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Minimum rate confirming a probabilistic impersonation.
    pub impersonation: f64,
    /// Minimum advantage confirming a tracing attack.
    pub traceability: f64,
    /// Maximum rate or advantage counted as resisted.
    pub resisted: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            impersonation: 0.2,
            traceability: 0.45,
            resisted: 0.02,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Vulnerable,
    Resisted,
    Inconclusive,
}

impl Tolerances {
    pub fn verdict(&self, kind: AttackKind, value: f64) -> Verdict {
        let vulnerable = match kind {
            AttackKind::Probabilistic => value >= self.impersonation,
            AttackKind::Deterministic => value == 1.0,
            AttackKind::Game => value >= self.traceability,
        };
        if vulnerable {
            Verdict::Vulnerable
        } else if value <= self.resisted {
            Verdict::Resisted
        } else {
            Verdict::Inconclusive
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    SuccessRate,
    /// Share of trials whose follow-up honest session also failed.
    LastingDesyncRate,
    Advantage,
}

fn ser_attack<S: Serializer>(a: &AttackId, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(a.as_str())
}

/// One attack against one variant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    #[serde(serialize_with = "ser_attack")]
    pub attack: AttackId,
    pub feature: &'static str,
    pub protocol: ProtocolId,
    pub variant: Variant,
    pub width: u32,
    pub trials: u64,
    pub seed: u64,
    pub metric: Metric,
    pub successes: u64,
    pub value: f64,
    pub half_width: f64,
    /// Denial of service only: share of attacked sessions that ended with
    /// the server updated and the tag not.
    pub session_desync_rate: Option<f64>,
    pub max_cost: u64,
    pub max_sessions: u64,
    pub verdict: Verdict,
    /// Verdict the reference tables give this variant.
    pub expected: Verdict,
    pub passed: bool,
}

/// Honest-session check for one variant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HonestResult {
    pub protocol: ProtocolId,
    pub variant: Variant,
    pub width: u32,
    pub trials: u64,
    pub seed: u64,
    pub completed: u64,
    pub passed: bool,
}

/// Everything an experiment produced.
#[derive(Debug, Clone)]
pub struct ExperimentRun<R> {
    pub result: R,
    pub transcripts: Vec<SessionTranscript>,
    pub games: Vec<GameRecord>,
}

pub fn default_width(protocol: ProtocolId) -> u32 {
    match protocol {
        ProtocolId::Ihrma => IhrmaParams::DEFAULT_WIDTH,
        ProtocolId::I2srs => I2srsParams::DEFAULT_WIDTH,
    }
}

pub fn check_width(protocol: ProtocolId, width: u32) -> Result<(), ParamError> {
    match protocol {
        ProtocolId::Ihrma => IhrmaParams::new(width, Variant::Original).map(|_| ()),
        ProtocolId::I2srs => I2srsParams::new(width, Variant::Original).map(|_| ()),
    }
}

fn expected_verdict(variant: Variant) -> Verdict {
    match variant {
        Variant::Original => Verdict::Vulnerable,
        Variant::Improved => Verdict::Resisted,
    }
}

fn variant_index(v: Variant) -> u64 {
    match v {
        Variant::Original => 0,
        Variant::Improved => 1,
    }
}

/// Seed of an experiment, derived from the run seed, the attack and the
/// variant only.
pub fn experiment_seed(seed: u64, attack: AttackId, variant: Variant) -> u64 {
    let idx = AttackId::ALL.iter().position(|a| *a == attack).unwrap() as u64;
    derive_seed(seed, 2 + 2 * idx + variant_index(variant))
}

fn honest_seed(seed: u64, protocol: ProtocolId, variant: Variant) -> u64 {
    let p = match protocol {
        ProtocolId::Ihrma => 0,
        ProtocolId::I2srs => 1,
    };
    derive_seed(seed, 1000 + 2 * p + variant_index(variant))
}

fn suite_seed(seed: u64) -> u64 {
    derive_seed(seed, u64::MAX)
}

fn trial_seed(seed: u64, i: u64) -> u64 {
    derive_seed(seed, i)
}

/// Per-trial bookkeeping shared by all non-game experiments.
struct Tally {
    trials: u64,
    successes: u64,
    lasting: u64,
    desync: u64,
    max_cost: u64,
    max_sessions: u64,
    transcripts: Vec<SessionTranscript>,
}

impl Tally {
    fn new() -> Self {
        Self {
            trials: 0,
            successes: 0,
            lasting: 0,
            desync: 0,
            max_cost: 0,
            max_sessions: 0,
            transcripts: Vec::new(),
        }
    }

    fn add<P: Protocol>(&mut self, out: &AttackOutcome, world: OracleWorld<P>) {
        if self.trials < KEPT_TRIALS {
            self.transcripts.extend(world.into_transcripts());
        }
        self.trials += 1;
        self.successes += u64::from(out.succeeded);
        self.lasting += u64::from(out.lasting == Some(true));
        self.desync += u64::from(out.lasting.is_some() && out.succeeded);
        self.max_cost = self.max_cost.max(out.max_transcript_cost);
        self.max_sessions = self.max_sessions.max(out.sessions_used);
    }
}

fn ihrma_trial(attack: AttackId, proto: &Ihrma, seed: u64) -> Result<(AttackOutcome, OracleWorld<Ihrma>), LabError> {
    let mut world = OracleWorld::new(proto.clone(), 1, seed);
    let h = world.handles()[0];
    let mut o = world.oracles(Capabilities::ACTIVE);
    let out = match attack {
        AttackId::IhrmaTagImpersonation => attacks::ihrma::tag_impersonation(&mut o, h)?,
        AttackId::IhrmaReaderImpersonation => attacks::ihrma::reader_impersonation(&mut o, h)?,
        AttackId::IhrmaDesyncDos => attacks::ihrma::desync_dos(&mut o, h, proto.params().variant(), true)?,
        other => unreachable!("{other} is not a single-tag IHRMA attack"),
    };
    Ok((out, world))
}

fn i2srs_trial(attack: AttackId, proto: &I2srs, seed: u64) -> Result<(AttackOutcome, OracleWorld<I2srs>), LabError> {
    let mut world = OracleWorld::new(proto.clone(), 1, seed);
    let h = world.handles()[0];
    let enrolled_key = world.inspect(h).map(|t| t.keys.k);
    let mut o = world.oracles(Capabilities::ACTIVE);
    let out = match attack {
        AttackId::I2srsSecretReveal => {
            let mut out = attacks::i2srs::secret_reveal(&mut o, h)?.outcome();
            // Judged here, against state the strategy never saw.
            out.succeeded = out.recovered.get("k_i").copied() == enrolled_key;
            out
        }
        AttackId::I2srsReplay => attacks::i2srs::replay(&mut o, h)?,
        AttackId::I2srsTagImpersonation => attacks::i2srs::tag_impersonation(&mut o, h)?,
        AttackId::I2srsDesyncDos => attacks::i2srs::desync_dos(&mut o, h, true)?,
        other => unreachable!("{other} is not a single-tag I2SRS attack"),
    };
    Ok((out, world))
}

fn game_strategy_i2srs(attack: AttackId) -> Box<dyn Strategy<I2srs>> {
    match attack {
        AttackId::I2srsTraceability => Box::new(attacks::i2srs::Traceability::default()),
        AttackId::I2srsForwardTraceability => Box::new(attacks::i2srs::ForwardTraceability),
        AttackId::I2srsBackwardTraceability => Box::new(attacks::i2srs::BackwardTraceability),
        other => unreachable!("{other} is not an I2SRS game"),
    }
}

/// Runs one attack against one variant.
pub fn run_experiment(
    attack: AttackId,
    variant: Variant,
    width: u32,
    trials: u64,
    seed: u64,
    tolerances: &Tolerances,
) -> Result<ExperimentRun<ExperimentResult>, LabError> {
    if trials == 0 {
        return Err(LabError::NoTrials);
    }
    let suite = suite_seed(seed);
    let kind = attack.kind();
    let mut games = Vec::new();
    let transcripts;
    let (metric, successes, value, half_width, desync, max_cost, max_sessions);

    if kind == AttackKind::Game {
        let run = match attack.protocol() {
            ProtocolId::Ihrma => {
                let proto = Ihrma::new(IhrmaParams::new(width, variant)?, suite);
                let strategy = attacks::ihrma::ProbeTraceability::default();
                estimate_advantage(&strategy, |s| OracleWorld::new(proto.clone(), 2, s), trials, seed, KEPT_TRIALS)?
            }
            ProtocolId::I2srs => {
                let proto = I2srs::new(I2srsParams::new(width, variant)?, suite);
                let strategy = game_strategy_i2srs(attack);
                estimate_advantage(strategy.as_ref(), |s| OracleWorld::new(proto.clone(), 2, s), trials, seed, KEPT_TRIALS)?
            }
        };
        metric = Metric::Advantage;
        successes = run.estimate.successes;
        value = run.estimate.advantage;
        half_width = run.estimate.half_width;
        desync = None;
        max_cost = run.estimate.max_cost;
        max_sessions = 0;
        games = run.records;
        transcripts = run.transcripts;
    } else {
        let mut tally = Tally::new();
        match attack.protocol() {
            ProtocolId::Ihrma => {
                let proto = Ihrma::new(IhrmaParams::new(width, variant)?, suite);
                for i in 0..trials {
                    let (out, world) = ihrma_trial(attack, &proto, trial_seed(seed, i))?;
                    tally.add(&out, world);
                }
            }
            ProtocolId::I2srs => {
                let proto = I2srs::new(I2srsParams::new(width, variant)?, suite);
                for i in 0..trials {
                    let (out, world) = i2srs_trial(attack, &proto, trial_seed(seed, i))?;
                    tally.add(&out, world);
                }
            }
        }
        let is_dos = matches!(attack, AttackId::IhrmaDesyncDos | AttackId::I2srsDesyncDos);
        let hits = if is_dos { tally.lasting } else { tally.successes };
        let est = crate::game::RateEstimate::from_counts(tally.trials, hits, tally.max_cost);
        metric = if is_dos { Metric::LastingDesyncRate } else { Metric::SuccessRate };
        successes = hits;
        value = est.rate;
        half_width = est.half_width;
        desync = is_dos.then(|| tally.desync as f64 / tally.trials as f64);
        max_cost = tally.max_cost;
        max_sessions = tally.max_sessions;
        transcripts = tally.transcripts;
    }

    let verdict = tolerances.verdict(kind, value);
    let expected = expected_verdict(variant);
    let within_budget = match attack {
        AttackId::I2srsSecretReveal | AttackId::I2srsTagImpersonation => max_cost <= REVEAL_BUDGET,
        AttackId::I2srsBackwardTraceability => max_cost <= BACKWARD_BUDGET,
        _ => true,
    };
    Ok(ExperimentRun {
        result: ExperimentResult {
            attack,
            feature: attack.feature(),
            protocol: attack.protocol(),
            variant,
            width,
            trials,
            seed,
            metric,
            successes,
            value,
            half_width,
            session_desync_rate: desync,
            max_cost,
            max_sessions,
            verdict,
            expected,
            passed: verdict == expected && within_budget,
        },
        transcripts,
        games,
    })
}

fn honest_world_ok<P: Protocol + Clone>(proto: &P, seed: u64, keep: &mut Vec<SessionTranscript>, kept: bool) -> bool {
    let mut world = OracleWorld::new(proto.clone(), 1, seed);
    let h = world.handles()[0];
    let mut ok = true;
    {
        let mut o = world.oracles(Capabilities::PASSIVE);
        for _ in 0..2 {
            ok &= o.execute(h).map(|t| t.outcome.mutual()).unwrap_or(false);
        }
    }
    ok &= world.synchronized(h);
    if kept {
        keep.extend(world.into_transcripts());
    }
    ok
}

/// Runs `trials` fresh worlds of two honest sessions each.
pub fn run_honest(
    protocol: ProtocolId,
    variant: Variant,
    width: u32,
    trials: u64,
    seed: u64,
) -> Result<ExperimentRun<HonestResult>, LabError> {
    if trials == 0 {
        return Err(LabError::NoTrials);
    }
    let suite = suite_seed(seed);
    let mut transcripts = Vec::new();
    let mut completed = 0;
    for i in 0..trials {
        let s = trial_seed(seed, i);
        let kept = i < KEPT_TRIALS;
        let ok = match protocol {
            ProtocolId::Ihrma => {
                honest_world_ok(&Ihrma::new(IhrmaParams::new(width, variant)?, suite), s, &mut transcripts, kept)
            }
            ProtocolId::I2srs => {
                honest_world_ok(&I2srs::new(I2srsParams::new(width, variant)?, suite), s, &mut transcripts, kept)
            }
        };
        completed += u64::from(ok);
    }
    Ok(ExperimentRun {
        result: HonestResult {
            protocol,
            variant,
            width,
            trials,
            seed,
            completed,
            passed: completed == trials,
        },
        transcripts,
        games: Vec::new(),
    })
}

/// A validated selection of experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct LabConfig {
    pub protocols: Vec<ProtocolId>,
    pub variants: Vec<Variant>,
    pub attacks: Vec<AttackId>,
    pub trials: u64,
    pub seed: u64,
    pub width: Option<u32>,
    pub tolerances: Tolerances,
}

impl LabConfig {
    pub fn validate(&self) -> Result<(), LabError> {
        if self.trials == 0 {
            return Err(LabError::NoTrials);
        }
        for &attack in &self.attacks {
            if !self.protocols.contains(&attack.protocol()) {
                return Err(LabError::ProtocolMismatch {
                    attack,
                    protocol: attack.protocol(),
                });
            }
        }
        if let Some(w) = self.width {
            for &p in &self.protocols {
                check_width(p, w)?;
            }
        }
        Ok(())
    }

    pub fn width_for(&self, protocol: ProtocolId) -> u32 {
        self.width.unwrap_or_else(|| default_width(protocol))
    }
}

/// Results of a whole run, in a fixed order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabReport {
    pub seed: u64,
    pub trials: u64,
    pub tolerances: Tolerances,
    pub honest: Vec<HonestResult>,
    pub experiments: Vec<ExperimentResult>,
    pub matrix: Option<FeatureMatrixReport>,
    pub passed: bool,
}

/// Runs the selection. `sink` receives every kept transcript and game
/// record, in run order.
pub fn run(config: &LabConfig, mut sink: impl FnMut(LogItem<'_>)) -> Result<LabReport, LabError> {
    config.validate()?;
    let mut honest = Vec::new();
    for &p in &config.protocols {
        for &v in &config.variants {
            let run = run_honest(p, v, config.width_for(p), config.trials, honest_seed(config.seed, p, v))?;
            run.transcripts.iter().for_each(|t| sink(LogItem::Session(t)));
            honest.push(run.result);
        }
    }
    let mut experiments = Vec::new();
    for &attack in &config.attacks {
        for &v in &config.variants {
            let run = run_experiment(
                attack,
                v,
                config.width_for(attack.protocol()),
                config.trials,
                experiment_seed(config.seed, attack, v),
                &config.tolerances,
            )?;
            run.transcripts.iter().for_each(|t| sink(LogItem::Session(t)));
            run.games.iter().for_each(|g| sink(LogItem::Game(g)));
            experiments.push(run.result);
        }
    }
    let matrix = emit_matrix(&experiments).ok();
    let passed = honest.iter().all(|h| h.passed)
        && experiments.iter().all(|e| e.passed)
        && matrix.as_ref().map_or(true, |m| m.matches_expected);
    Ok(LabReport {
        seed: config.seed,
        trials: config.trials,
        tolerances: config.tolerances,
        honest,
        experiments,
        matrix,
        passed,
    })
}

pub enum LogItem<'a> {
    Session(&'a SessionTranscript),
    Game(&'a GameRecord),
}

/// One cell: a feature for one protocol variant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixCell {
    pub variant: Variant,
    /// `"YES"` when the variant resisted, `"NO"` when the attack worked,
    /// `"?"` when the measurement fell between the bands.
    pub provides: &'static str,
    pub expected: &'static str,
    pub value: f64,
    pub metric: Metric,
    pub trials: u64,
    pub seed: u64,
    pub max_cost: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixRow {
    pub feature: &'static str,
    pub name: &'static str,
    #[serde(serialize_with = "ser_attack")]
    pub attack: AttackId,
    pub cells: Vec<MatrixCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixTable {
    pub protocol: ProtocolId,
    pub rows: Vec<MatrixRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureMatrixReport {
    pub tables: Vec<MatrixTable>,
    pub matches_expected: bool,
    /// Cells that differ from the reference, as `feature/protocol/variant`.
    pub mismatches: Vec<String>,
}

fn yes_no(v: Verdict) -> &'static str {
    match v {
        Verdict::Resisted => "YES",
        Verdict::Vulnerable => "NO",
        Verdict::Inconclusive => "?",
    }
}

/// Builds both tables. Every attack must have been run on both variants.
pub fn emit_matrix(results: &[ExperimentResult]) -> Result<FeatureMatrixReport, LabError> {
    let find = |a: AttackId, v: Variant| results.iter().find(|r| r.attack == a && r.variant == v);
    let missing: Vec<String> = AttackId::ALL
        .iter()
        .flat_map(|&a| Variant::ALL.map(|v| (a, v)))
        .filter(|&(a, v)| find(a, v).is_none())
        .map(|(a, v)| format!("{a}/{v}"))
        .collect();
    if !missing.is_empty() {
        return Err(LabError::IncompleteMatrix(missing));
    }
    let mut mismatches = Vec::new();
    let tables = ProtocolId::ALL
        .iter()
        .map(|&p| MatrixTable {
            protocol: p,
            rows: AttackId::for_protocol(p)
                .map(|a| MatrixRow {
                    feature: a.feature(),
                    name: a.feature_name(),
                    attack: a,
                    cells: Variant::ALL
                        .iter()
                        .map(|&v| {
                            let r = find(a, v).unwrap();
                            let cell = MatrixCell {
                                variant: v,
                                provides: yes_no(r.verdict),
                                expected: yes_no(r.expected),
                                value: r.value,
                                metric: r.metric,
                                trials: r.trials,
                                seed: r.seed,
                                max_cost: r.max_cost,
                            };
                            if cell.provides != cell.expected {
                                mismatches.push(format!("{}/{p}/{v}", a.feature()));
                            }
                            cell
                        })
                        .collect(),
                })
                .collect(),
        })
        .collect();
    Ok(FeatureMatrixReport {
        tables,
        matches_expected: mismatches.is_empty(),
        mismatches,
    })
}

impl LabReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    /// Fixed-width text rendering.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "seed {}  trials {}", self.seed, self.trials);
        if !self.honest.is_empty() {
            let _ = writeln!(s, "\nhonest sessions");
            for h in &self.honest {
                let _ = writeln!(
                    s,
                    "  {:<6} {:<9} W={:<3} {:>7}/{:<7} {}",
                    h.protocol.as_str(),
                    h.variant.as_str(),
                    h.width,
                    h.completed,
                    h.trials,
                    pass(h.passed)
                );
            }
        }
        if !self.experiments.is_empty() {
            let _ = writeln!(s, "\nexperiments");
            let _ = writeln!(
                s,
                "  {:<28} {:<4} {:<9} {:>8} {:>8} {:>9} {:<12} {:<12} ",
                "attack", "feat", "variant", "value", "±99%", "max cost", "verdict", "expected"
            );
            for e in &self.experiments {
                let _ = writeln!(
                    s,
                    "  {:<28} {:<4} {:<9} {:>8.4} {:>8.4} {:>9} {:<12} {:<12} {}",
                    e.attack.as_str(),
                    e.feature,
                    e.variant.as_str(),
                    e.value,
                    e.half_width,
                    e.max_cost,
                    verdict_str(e.verdict),
                    verdict_str(e.expected),
                    pass(e.passed)
                );
            }
        }
        if let Some(m) = &self.matrix {
            for t in &m.tables {
                let _ = writeln!(s, "\n{} feature matrix (measured / expected)", t.protocol.as_str());
                let _ = writeln!(s, "  {:<5} {:<44} {:<10} {:<10}", "", "feature", "original", "improved");
                for r in &t.rows {
                    let cell = |c: &MatrixCell| format!("{}/{}", c.provides, c.expected);
                    let _ = writeln!(
                        s,
                        "  {:<5} {:<44} {:<10} {:<10}",
                        r.feature,
                        r.name,
                        cell(&r.cells[0]),
                        cell(&r.cells[1])
                    );
                }
            }
            if m.matches_expected {
                let _ = writeln!(s, "\nmatrix matches the reference tables");
            } else {
                let _ = writeln!(s, "\nmatrix differs at {}", m.mismatches.join(", "));
            }
        }
        let _ = writeln!(s, "\n{}", if self.passed { "all criteria pass" } else { "some criteria FAIL" });
        s
    }
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Vulnerable => "vulnerable",
        Verdict::Resisted => "resisted",
        Verdict::Inconclusive => "inconclusive",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(attacks: Vec<AttackId>, protocols: Vec<ProtocolId>) -> LabConfig {
        LabConfig {
            protocols,
            variants: Variant::ALL.to_vec(),
            attacks,
            trials: 20,
            seed: 7,
            width: None,
            tolerances: Tolerances::default(),
        }
    }

    #[test]
    fn verdict_bands() {
        let t = Tolerances::default();
        assert_eq!(t.verdict(AttackKind::Probabilistic, 0.25), Verdict::Vulnerable);
        assert_eq!(t.verdict(AttackKind::Probabilistic, 0.1), Verdict::Inconclusive);
        assert_eq!(t.verdict(AttackKind::Deterministic, 0.99), Verdict::Inconclusive);
        assert_eq!(t.verdict(AttackKind::Deterministic, 1.0), Verdict::Vulnerable);
        assert_eq!(t.verdict(AttackKind::Game, 0.01), Verdict::Resisted);
        assert_eq!(t.verdict(AttackKind::Game, 0.47), Verdict::Vulnerable);
    }

    #[test]
    fn validation() {
        assert!(config(vec![AttackId::I2srsReplay], vec![ProtocolId::I2srs]).validate().is_ok());
        assert!(matches!(
            config(vec![AttackId::I2srsReplay], vec![ProtocolId::Ihrma]).validate(),
            Err(LabError::ProtocolMismatch { .. })
        ));
        let mut c = config(vec![], vec![ProtocolId::I2srs]);
        c.width = Some(40);
        assert!(matches!(c.validate(), Err(LabError::Param(_))));
        c.width = Some(12);
        assert!(c.validate().is_ok());
        c.trials = 0;
        assert!(matches!(c.validate(), Err(LabError::NoTrials)));
    }

    #[test]
    fn partial_runs_have_no_matrix() {
        let c = config(vec![AttackId::I2srsReplay], vec![ProtocolId::I2srs]);
        let report = run(&c, |_| {}).unwrap();
        assert!(report.matrix.is_none());
        assert_eq!(report.experiments.len(), 2);
        assert!(matches!(
            emit_matrix(&report.experiments),
            Err(LabError::IncompleteMatrix(m)) if m.len() == 20
        ));
    }

    #[test]
    fn runs_are_reproducible() {
        let c = config(
            vec![AttackId::IhrmaTagImpersonation, AttackId::I2srsTraceability],
            ProtocolId::ALL.to_vec(),
        );
        let mut log_a = Vec::new();
        let a = run(&c, |item| {
            if let LogItem::Game(g) = item {
                log_a.push(g.clone())
            }
        })
        .unwrap();
        let b = run(&c, |_| {}).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.to_text(), b.to_text());
        assert_eq!(log_a.len(), 40);
    }

    #[test]
    fn secret_reveal_experiment() {
        let t = Tolerances::default();
        let orig = run_experiment(AttackId::I2srsSecretReveal, Variant::Original, 16, 10, 3, &t).unwrap();
        assert_eq!(orig.result.value, 1.0);
        assert!(orig.result.max_cost <= REVEAL_BUDGET);
        assert!(orig.result.passed);
        let imp = run_experiment(AttackId::I2srsSecretReveal, Variant::Improved, 16, 10, 3, &t).unwrap();
        assert_eq!(imp.result.value, 0.0);
        assert!(imp.result.passed);
        assert!(!orig.transcripts.is_empty());
    }
}
