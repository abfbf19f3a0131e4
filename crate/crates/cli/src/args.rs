use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "pvc", version, about = "Vector Diffie-Hellman matrix cipher toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a prime and three generators
    Params {
        /// Prime, decimal or 0x-prefixed hex
        prime: String,
        g1: String,
        g2: String,
        g3: String,
    },
    /// Walk through the published example (a = 3, b = 7)
    Demo {
        #[arg(long, env = "PVC_SEED")]
        seed: Option<u64>,
    },
    /// Run an authenticated handshake between two in-process parties
    Exchange {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long, env = "PVC_SEED")]
        seed: Option<u64>,
    },
    /// Encrypt a file to a receiver's public vector
    Encrypt {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Receiver public vector "x,y,z"
        #[arg(long)]
        peer_public: String,
        /// Sender ephemeral secret; drawn fresh when omitted
        #[arg(long)]
        secret: Option<u64>,
        #[command(flatten)]
        group: GroupArgs,
        #[command(flatten)]
        layout: LayoutArgs,
        #[arg(long, value_enum, default_value_t = Toggle::On)]
        offsets: Toggle,
        #[arg(long, env = "PVC_SEED")]
        seed: Option<u64>,
    },
    /// Decrypt a .pvc file with the receiver secret
    Decrypt {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        secret: u64,
        #[arg(long, value_enum, default_value_t = Toggle::On)]
        offsets: Toggle,
    },
    /// Run one of the measurements and print a key=value report
    Analyze {
        #[arg(value_enum)]
        kind: AnalysisKind,
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long)]
        shape: Option<String>,
        #[arg(long, value_enum, default_value_t = Toggle::On)]
        offsets: Toggle,
        /// Trial or session count override
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, env = "PVC_SEED")]
        seed: Option<u64>,
    },
}

#[derive(Args, Debug, Clone)]
pub struct GroupArgs {
    #[arg(long, default_value = "12347")]
    pub prime: String,
    /// Three distinct primitive roots "g1,g2,g3"
    #[arg(long, default_value = "2,5,6")]
    pub gvec: String,
}

#[derive(Args, Debug, Clone)]
pub struct LayoutArgs {
    /// Master matrix shape "MxN"
    #[arg(long, default_value = "8x10")]
    pub shape: String,
    /// 1-based start cell "row,col"
    #[arg(long, default_value = "1,1")]
    pub start: String,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Toggle {
    On,
    Off,
}

impl Toggle {
    pub fn on(self) -> bool {
        self == Toggle::On
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalysisKind {
    Entropy,
    Avalanche,
    Randomness,
    Ops,
    Kpa,
}

impl AnalysisKind {
    pub fn name(self) -> &'static str {
        match self {
            AnalysisKind::Entropy => "entropy",
            AnalysisKind::Avalanche => "avalanche",
            AnalysisKind::Randomness => "randomness",
            AnalysisKind::Ops => "ops",
            AnalysisKind::Kpa => "kpa",
        }
    }

    pub fn default_shape(self) -> (usize, usize) {
        match self {
            AnalysisKind::Randomness => (12, 23),
            _ => (8, 10),
        }
    }
}
