use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use irsfac::decomposition::{parafac_als, tucker_hosvd, AlsOptions, DEFAULT_EPSILON};
use irsfac::system::codec::{self, FeedbackMessage};
use irsfac::system::{
    baseline_payload, dbm_to_watts, feedback_duration, parafac_payload, tucker_payload, ModelKind, Payload,
    SystemParams, TuckerBitAccounting,
};
use irsfac::tensor::tensorize;
use irsfac_sim::config::{ExperimentConfig, Scenario};
use irsfac_sim::messages::random_message;
use irsfac_sim::phase_file::read_phases;
use irsfac_sim::{emit_csv, run_experiment, write_csv, SimError};

#[derive(Parser)]
#[command(
    name = "irsfac",
    version,
    about = "Tensor-factorized IRS phase-shift feedback simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a phase vector file and print the fit report.
    Decompose(DecomposeArgs),
    /// Print payload sizes and feedback durations for one configuration.
    Payload(PayloadArgs),
    /// Run a Monte-Carlo experiment and write CSV.
    Simulate(SimulateArgs),
    /// Decode a feedback message file and check that it re-encodes identically.
    Codec(CodecArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Baseline,
    Parafac,
    Tucker,
}

#[derive(Clone, Copy, ValueEnum)]
enum Accounting {
    Literal,
    CorePhaseResolution,
    Codec,
}

impl From<Accounting> for TuckerBitAccounting {
    fn from(a: Accounting) -> Self {
        match a {
            Accounting::Literal => Self::Literal,
            Accounting::CorePhaseResolution => Self::CorePhaseResolution,
            Accounting::Codec => Self::Codec,
        }
    }
}

#[derive(Args)]
struct DecomposeArgs {
    /// Text file with one angle (radians) or `re im` pair per line.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "parafac")]
    model: Model,
    /// Factor sizes, e.g. `32,32`.
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    r: usize,
    /// Tucker ranks, e.g. `4,4`.
    #[arg(long, value_delimiter = ',')]
    ranks: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 500)]
    max_iters: usize,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
}

#[derive(Args)]
struct PayloadArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum, default_value = "parafac")]
    model: Model,
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long, default_value_t = 1)]
    r: usize,
    #[arg(long, value_delimiter = ',')]
    ranks: Option<Vec<usize>>,
    /// Phase resolution per factor (and for the baseline).
    #[arg(long, default_value_t = 3)]
    bits: u8,
    #[arg(long, default_value_t = 3)]
    weight_bits: u8,
    #[arg(long, value_enum, default_value = "literal")]
    accounting: Accounting,
    /// Leave the preamble out of the factorized payloads.
    #[arg(long)]
    no_preamble: bool,
    #[arg(long, default_value_t = SystemParams::DEFAULT_B_F)]
    bf_hz: f64,
    #[arg(long, default_value_t = SystemParams::DEFAULT_P_F_DBM)]
    pf_dbm: f64,
    #[arg(long, default_value_t = 110.0)]
    pathloss_db: f64,
}

#[derive(Args)]
struct SimulateArgs {
    /// Key-value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Use a scenario preset instead of (or before) a config file.
    #[arg(long)]
    scenario: Option<String>,
    /// Cap the number of trials for a fast run.
    #[arg(long)]
    quick: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// CSV destination; stdout when absent and the config names none.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CodecArgs {
    /// Message file to check.
    #[arg(long, required_unless_present = "random")]
    input: Option<PathBuf>,
    /// Write a random valid message of this model instead of reading one.
    #[arg(long, value_enum, requires = "output")]
    random: Option<Model>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Decompose(a) => decompose(a),
        Command::Payload(a) => payload(a),
        Command::Simulate(a) => simulate(a),
        Command::Codec(a) => codec_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn decompose(a: DecomposeArgs) -> Result<(), SimError> {
    let s = read_phases(&a.input)?;
    let t = tensorize(s.entries(), &a.sizes)?;
    let report = match a.model {
        Model::Parafac => {
            let opts = AlsOptions {
                max_iters: a.max_iters,
                epsilon: a.epsilon,
                seed: a.seed,
            };
            let (model, report) = parafac_als(&t, a.r, &opts)?;
            println!("weights = {:?}", model.sorted_by_weight().weights);
            report
        }
        Model::Tucker => {
            let ranks = a
                .ranks
                .ok_or_else(|| SimError::Input("--ranks is required for tucker".into()))?;
            let (model, report) = tucker_hosvd(&t, &ranks)?;
            println!("sigmas = {:?}", model.sigmas);
            report
        }
        Model::Baseline => return Err(SimError::Input("nothing to fit for the baseline".into())),
    };
    println!("iterations = {}", report.iterations);
    println!("converged = {}", report.converged);
    println!("final_nmse = {:.6e}", report.final_nmse);
    println!("over_parameterized = {}", report.over_parameterized);
    Ok(())
}

fn payload(a: PayloadArgs) -> Result<(), SimError> {
    let sizes = || {
        let s = a
            .sizes
            .clone()
            .ok_or_else(|| SimError::Input("--sizes is required".into()))?;
        if s.iter().product::<usize>() != a.n {
            return Err(SimError::Input(format!("sizes {s:?} do not multiply to {}", a.n)));
        }
        Ok(s)
    };
    let base = baseline_payload(a.n, a.bits)?;
    let (p, include): (Payload, bool) = match a.model {
        Model::Baseline => (base, false),
        Model::Parafac => {
            let s = sizes()?;
            (
                parafac_payload(&s, a.r, &vec![a.bits; s.len()], a.weight_bits)?,
                !a.no_preamble,
            )
        }
        Model::Tucker => {
            let s = sizes()?;
            let ranks = a
                .ranks
                .clone()
                .ok_or_else(|| SimError::Input("--ranks is required for tucker".into()))?;
            let p = tucker_payload(&s, &ranks, &vec![a.bits; s.len()], a.weight_bits, a.accounting.into())?;
            (p, !a.no_preamble)
        }
    };
    let params = SystemParams {
        b_f: a.bf_hz,
        p_f: dbm_to_watts(a.pf_dbm),
        pathloss: irsfac::system::db_to_linear(-a.pathloss_db),
        ..SystemParams::table_defaults(a.n, 1, 1)
    };
    let bits = p.total_bits(include);
    let t_f = feedback_duration(bits, params.feedback_capacity(params.pathloss))?;
    println!("conveyed_phases = {}", p.conveyed_phases);
    println!("phase_ratio = {}", a.n as f64 / p.conveyed_phases as f64);
    println!("phase_bits = {}", p.phase_bits);
    println!("weight_bits = {}", p.weight_bits);
    println!("core_bits = {}", p.core_bits);
    println!("preamble_bits = {}", if include { p.preamble_bits } else { 0 });
    println!("payload_bits = {bits}");
    println!("baseline_bits = {}", base.total_bits(false));
    println!("tf_s = {t_f:.6e}");
    Ok(())
}

fn simulate(a: SimulateArgs) -> Result<(), SimError> {
    let mut cfg = match (&a.config, &a.scenario) {
        (Some(path), _) => ExperimentConfig::parse(&std::fs::read_to_string(path)?)?,
        (None, Some(s)) => ExperimentConfig::preset(s.parse::<Scenario>()?),
        (None, None) => return Err(SimError::Input("pass --config or --scenario".into())),
    };
    if a.quick {
        cfg = cfg.quick();
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(t) = a.trials {
        cfg.trials = t;
    }
    if a.output.is_some() {
        cfg.output = a.output;
    }
    let rows = run_experiment(&cfg)?;
    match &cfg.output {
        Some(path) => {
            emit_csv(&rows, path)?;
            eprintln!("wrote {} rows to {}", rows.len(), path.display());
        }
        None => write_csv(&rows, std::io::stdout().lock())?,
    }
    Ok(())
}

fn codec_cmd(a: CodecArgs) -> Result<(), SimError> {
    if let Some(model) = a.random {
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
        let kind = match model {
            Model::Baseline => ModelKind::Baseline,
            Model::Parafac => ModelKind::Parafac,
            Model::Tucker => ModelKind::Tucker,
        };
        let msg = random_message(kind, &mut rng);
        let bytes = codec::encode(&msg)?;
        let path = a.output.expect("required by clap");
        std::fs::write(&path, &bytes)?;
        println!(
            "wrote {} bits ({} bytes) to {}",
            msg.bit_len(),
            bytes.len(),
            path.display()
        );
        return Ok(());
    }
    let path = a.input.expect("required by clap");
    let bytes = std::fs::read(&path)?;
    let msg = codec::decode(&bytes)?;
    let again = codec::encode(&msg)?;
    if again != bytes {
        return Err(SimError::Input("message does not re-encode to the same bytes".into()));
    }
    match &msg {
        FeedbackMessage::Uncompressed { phase_bits, indices } => {
            println!("model = uncompressed, n = {}, phase_bits = {phase_bits}", indices.len())
        }
        FeedbackMessage::Parafac(m) => println!(
            "model = parafac, sizes = {:?}, rank = {}, phase_bits = {:?}, weight_bits = {}",
            m.sizes, m.rank, m.phase_bits, m.weight_bits
        ),
        FeedbackMessage::Tucker(m) => println!(
            "model = tucker, sizes = {:?}, ranks = {:?}, phase_bits = {:?}, weight_bits = {}",
            m.sizes, m.ranks, m.phase_bits, m.weight_bits
        ),
    }
    println!("bits = {}", msg.bit_len());
    println!("round_trip = ok");
    Ok(())
}
