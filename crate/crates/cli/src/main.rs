use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use rfid_lab::attacks::AttackId;
use rfid_lab::codec;
use rfid_lab::lab::{self, LabConfig, LogItem, Tolerances};
use rfid_lab::session::{ProtocolId, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProtocolArg {
    Ihrma,
    I2srs,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    Original,
    Improved,
    Both,
}

/// Runs protocol attacks over seeded worlds and prints the feature matrix.
#[derive(Debug, Parser)]
#[command(name = "rfid-lab", version)]
struct Cli {
    #[arg(long, value_enum, default_value = "all")]
    protocol: ProtocolArg,

    #[arg(long, value_enum, default_value = "both")]
    variant: VariantArg,

    /// Attack ids, comma separated, or `all`.
    #[arg(long, default_value = "all", value_delimiter = ',')]
    attack: Vec<String>,

    /// Trials per experiment.
    #[arg(long, default_value_t = 10_000)]
    trials: u64,

    #[arg(long, env = "LAB_SEED", default_value_t = 1)]
    seed: u64,

    /// Word width for every selected protocol.
    #[arg(long)]
    width: Option<u32>,

    /// Write the JSON report here.
    #[arg(long)]
    report: Option<PathBuf>,

    /// Write JSONL transcripts here.
    #[arg(long)]
    transcripts: Option<PathBuf>,

    /// Print the JSON report instead of the table.
    #[arg(long)]
    json: bool,

    /// List attack ids and exit.
    #[arg(long)]
    list: bool,

    #[arg(long, default_value_t = Tolerances::default().impersonation)]
    tolerance_impersonation: f64,

    #[arg(long, default_value_t = Tolerances::default().traceability)]
    tolerance_traceability: f64,

    #[arg(long, default_value_t = Tolerances::default().resisted)]
    tolerance_resisted: f64,
}

const CONFIG_ERROR: u8 = 2;

impl Cli {
    fn config(&self) -> Result<LabConfig, String> {
        let protocols = match self.protocol {
            ProtocolArg::Ihrma => vec![ProtocolId::Ihrma],
            ProtocolArg::I2srs => vec![ProtocolId::I2srs],
            ProtocolArg::All => ProtocolId::ALL.to_vec(),
        };
        let variants = match self.variant {
            VariantArg::Original => vec![Variant::Original],
            VariantArg::Improved => vec![Variant::Improved],
            VariantArg::Both => Variant::ALL.to_vec(),
        };
        let attacks = if self.attack.iter().any(|a| a == "all") {
            AttackId::ALL
                .into_iter()
                .filter(|a| protocols.contains(&a.protocol()))
                .collect()
        } else {
            let mut ids = Vec::new();
            for a in &self.attack {
                let id: AttackId = a.parse()?;
                if !ids.contains(&id) {
                    ids.push(id);
                }
            }
            ids
        };
        for (name, t) in [
            ("impersonation", self.tolerance_impersonation),
            ("traceability", self.tolerance_traceability),
            ("resisted", self.tolerance_resisted),
        ] {
            if !(0.0..=1.0).contains(&t) {
                return Err(format!("tolerance {name} must lie in [0, 1], got {t}"));
            }
        }
        let config = LabConfig {
            protocols,
            variants,
            attacks,
            trials: self.trials,
            seed: self.seed,
            width: self.width,
            tolerances: Tolerances {
                impersonation: self.tolerance_impersonation,
                traceability: self.tolerance_traceability,
                resisted: self.tolerance_resisted,
            },
        };
        config.validate().map_err(|e| e.to_string())?;
        Ok(config)
    }
}

fn create(path: &PathBuf) -> Result<BufWriter<File>, String> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn run(cli: &Cli) -> Result<bool, (u8, String)> {
    let config = cli.config().map_err(|e| (CONFIG_ERROR, e))?;
    let mut log = match &cli.transcripts {
        Some(p) => Some(create(p).map_err(|e| (CONFIG_ERROR, e))?),
        None => None,
    };
    let mut log_err = None;
    let report = lab::run(&config, |item| {
        let (Some(out), None) = (log.as_mut(), &log_err) else {
            return;
        };
        let res = match item {
            LogItem::Session(t) => codec::write_session(out, t),
            LogItem::Game(g) => codec::write_game(out, g),
        };
        if let Err(e) = res {
            log_err = Some(e);
        }
    })
    .map_err(|e| (CONFIG_ERROR, e.to_string()))?;

    let io_fail = |e: io::Error| (1, e.to_string());
    if let Some(e) = log_err {
        return Err(io_fail(e));
    }
    if let Some(mut out) = log {
        out.flush().map_err(io_fail)?;
    }
    if let Some(p) = &cli.report {
        let mut out = create(p).map_err(|e| (1, e))?;
        out.write_all(report.to_json().as_bytes()).map_err(io_fail)?;
        out.flush().map_err(io_fail)?;
    }
    let text = if cli.json { report.to_json() } else { report.to_text() };
    io::stdout().write_all(text.as_bytes()).map_err(io_fail)?;
    Ok(report.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.list {
        for a in AttackId::ALL {
            println!("{:<30} {:<4} {}", a.as_str(), a.feature(), a.feature_name());
        }
        return ExitCode::SUCCESS;
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err((code, msg)) => {
            eprintln!("rfid-lab: {msg}");
            ExitCode::from(code)
        }
    }
}
