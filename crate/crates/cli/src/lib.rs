//! Command-line front end for the `aapt-core` certificates.
//!
//! Every artifact is a [`MatrixDocument`]. The exit status carries the
//! verdict: `0` true or success, `1` false, `2` usage or format error, `3`
//! numerical failure (including rank decisions whose singular-value gap ratio
//! is below [`GAP_RATIO_THRESHOLD`]).

pub mod document;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use aapt_core::channel::{classify, Channel};
use aapt_core::jamiolkowski::certify_faithful;
use aapt_core::linalg::{random_density, unit, ComplexMatrix, DimPair, RandomSeed, SingularGap, Subsystem};
use aapt_core::reconstruct::{noise_stress, reconstruct_channel, ReconstructionReport};
use aapt_core::sensitivity::{certify_sensitive, make_cq_state, make_prop4_state, ChannelClass};
use aapt_core::state::{max_entangled, random_mixed, random_product, BipartiteState};
use aapt_core::witness::{faithfulness_witness, lemma1_decompose, HermitianPreservingMap};
use aapt_core::{FaithfulnessCertificate, TransferMatrix};
use clap::{Args, Parser, Subcommand, ValueEnum};

pub use document::{format_number, Kind, MatrixDocument};

/// Rank decisions with `retained / discarded` below this are reported as ambiguous.
pub const GAP_RATIO_THRESHOLD: f64 = 10.0;

/// Slack for reading hand-written documents.
pub const INPUT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    True = 0,
    False = 1,
    Usage = 2,
    Numerical = 3,
}

impl Status {
    pub fn code(self) -> u8 {
        self as u8
    }

    fn verdict(v: bool) -> Status {
        if v {
            Status::True
        } else {
            Status::False
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("malformed document: {0}")]
    Format(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Core(#[from] aapt_core::Error),
}

impl CliError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn status(&self) -> Status {
        use aapt_core::Error as E;
        match self {
            CliError::Numerical(_) | CliError::Core(E::Verification(_)) => Status::Numerical,
            CliError::Core(E::NotFaithful { .. }) => Status::False,
            _ => Status::Usage,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "aapt",
    version,
    about = "Faithfulness and sensitivity certificates for ancilla-assisted process tomography"
)]
pub struct Cli {
    /// Rank threshold on singular values; 0 picks max(rows, cols) * sigma_max * 1e-12.
    #[arg(long, global = true, default_value_t = 0.0)]
    pub tol: f64,

    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Output file(s); `witness` and `decompose` take two. Without it the
    /// document goes to stdout.
    #[arg(long, global = true, num_args = 1..=2, value_name = "PATH")]
    pub out: Vec<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a state document.
    Gen(GenArgs),
    /// Certify faithfulness or sensitivity of a state.
    Certify(CertifyArgs),
    /// Emit two distinct channels with identical output on a non-faithful state.
    Witness(WitnessArgs),
    /// Recover a channel from a faithful probe and its output.
    Reconstruct(ReconstructArgs),
    /// Split a trace-annihilating Hermitian-preserving map into a scaled difference of two channels.
    Decompose(DecomposeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    MaxEntangled,
    Product,
    Cq,
    Prop4,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SigmaKind {
    /// `sigma_i = |i mod db><i mod db|`.
    Basis,
    /// Independent full-rank random densities.
    Random,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(value_enum)]
    pub family: Family,
    /// Dimension for max-entangled and prop4.
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub da: Option<usize>,
    #[arg(long)]
    pub db: Option<usize>,
    /// Classical distribution for cq, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub p: Vec<f64>,
    /// Spectrum for prop4, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub lambda: Vec<f64>,
    /// Rank of a random state.
    #[arg(long)]
    pub rank: Option<usize>,
    /// Conditional states of a cq state.
    #[arg(long, value_enum, default_value_t = SigmaKind::Basis)]
    pub sigmas: SigmaKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Faithful,
    Sensitive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClassArg {
    Unitary,
    Unital,
}

fn parse_side(s: &str) -> std::result::Result<Subsystem, String> {
    s.parse().map_err(|e: aapt_core::Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    pub state: PathBuf,
    #[arg(long, default_value = "A", value_parser = parse_side)]
    pub side: Subsystem,
    #[arg(long, value_enum, default_value_t = Mode::Faithful)]
    pub mode: Mode,
    /// Channel class for sensitivity.
    #[arg(long, value_enum, default_value_t = ClassArg::Unital)]
    pub class: ClassArg,
}

#[derive(Debug, Args)]
pub struct WitnessArgs {
    pub state: PathBuf,
    #[arg(long, default_value = "A", value_parser = parse_side)]
    pub side: Subsystem,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    pub probe: PathBuf,
    /// Measured output state.
    #[arg(conflicts_with = "channel", required_unless_present = "channel")]
    pub output: Option<PathBuf>,
    /// Known channel; outputs are synthesized from it.
    #[arg(long)]
    pub channel: Option<PathBuf>,
    /// Frobenius norm of the perturbation added to each synthesized output.
    #[arg(long, default_value_t = 0.0, requires = "channel")]
    pub noise: f64,
    #[arg(long, default_value_t = 1, requires = "channel")]
    pub trials: usize,
    #[arg(long, default_value = "A", value_parser = parse_side)]
    pub side: Subsystem,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    pub transfer: PathBuf,
}

/// Parses `args`, runs the command and reports errors on stderr.
pub fn main_with<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { Status::Usage.code() } else { Status::True.code() };
        }
    };
    match run(&cli) {
        Ok(status) => status.code(),
        Err(e) => {
            eprintln!("aapt: {e}");
            e.status().code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<Status> {
    if !(cli.tol >= 0.0 && cli.tol.is_finite()) {
        return Err(CliError::Usage(format!("--tol must be a nonnegative number, got {}", cli.tol)));
    }
    let outputs = match cli.command {
        Command::Witness(_) | Command::Decompose(_) => 2,
        _ => 1,
    };
    if outputs == 2 && cli.out.len() != 2 {
        return Err(CliError::Usage("this command writes two documents; pass --out K0 K1".into()));
    }
    if outputs == 1 && cli.out.len() > 1 {
        return Err(CliError::Usage("this command writes one document; pass a single --out path".into()));
    }
    let ctx = Context { tol: cli.tol, seed: cli.seed, out: &cli.out };
    match &cli.command {
        Command::Gen(args) => ctx.gen(args),
        Command::Certify(args) => ctx.certify(args),
        Command::Witness(args) => ctx.witness(args),
        Command::Reconstruct(args) => ctx.reconstruct(args),
        Command::Decompose(args) => ctx.decompose(args),
    }
}

struct Context<'a> {
    tol: f64,
    seed: u64,
    out: &'a [PathBuf],
}

impl Context<'_> {
    fn emit(&self, docs: &[MatrixDocument]) -> Result<()> {
        if self.out.is_empty() {
            for doc in docs {
                print!("{}", doc.to_json()?);
            }
            return Ok(());
        }
        for (doc, path) in docs.iter().zip(self.out) {
            doc.write(path)?;
            println!("{}", path.display());
        }
        Ok(())
    }

    fn stamp(&self, doc: MatrixDocument) -> MatrixDocument {
        doc.with_meta("seed", self.seed).with_meta("tol", format_number(self.tol))
    }

    fn gen(&self, args: &GenArgs) -> Result<Status> {
        let seed = RandomSeed(self.seed);
        let (state, params) = match args.family {
            Family::MaxEntangled => {
                let d = args.d.unwrap_or(2);
                (max_entangled(d)?, format!("d={d}"))
            }
            Family::Product => {
                let (da, db) = (args.da.unwrap_or(2), args.db.unwrap_or(2));
                (random_product(da, db, seed)?, format!("da={da},db={db}"))
            }
            Family::Cq => {
                if args.p.is_empty() {
                    return Err(CliError::Usage("cq needs --p".into()));
                }
                let db = args.db.unwrap_or(2);
                if db == 0 {
                    return Err(CliError::Usage("--db must be positive".into()));
                }
                let sigmas = (0..args.p.len())
                    .map(|i| match args.sigmas {
                        SigmaKind::Basis => Ok(unit(db, i % db, i % db)),
                        SigmaKind::Random => random_density(db, db, seed.derive(i as u64)),
                    })
                    .collect::<aapt_core::Result<Vec<_>>>()?;
                let sigma_name = match args.sigmas {
                    SigmaKind::Basis => "basis",
                    SigmaKind::Random => "random",
                };
                (make_cq_state(&args.p, &sigmas)?, format!("p={},db={db},sigmas={sigma_name}", join(&args.p)))
            }
            Family::Prop4 => {
                if args.lambda.is_empty() {
                    return Err(CliError::Usage("prop4 needs --lambda".into()));
                }
                if let Some(d) = args.d.filter(|&d| d != args.lambda.len()) {
                    return Err(CliError::Usage(format!("--d {d} does not match {} eigenvalues", args.lambda.len())));
                }
                (make_prop4_state(&args.lambda)?, format!("lambda={}", join(&args.lambda)))
            }
            Family::Random => {
                let (da, db) = (args.da.unwrap_or(2), args.db.unwrap_or(2));
                let rank = args.rank.unwrap_or(da * db);
                (random_mixed(da, db, rank, seed)?, format!("da={da},db={db},rank={rank}"))
            }
        };
        let family = args.family.to_possible_value().expect("no skipped variants").get_name().to_string();
        let dims = state.dims();
        let doc = MatrixDocument::new(Kind::State, vec![dims.dim_a, dims.dim_b])
            .with_matrix(state.matrix())
            .with_meta("family", family)
            .with_meta("params", params)
            .with_meta("seed", self.seed);
        self.emit(&[doc])?;
        Ok(Status::True)
    }

    fn certify(&self, args: &CertifyArgs) -> Result<Status> {
        let rho = read_state(&args.state)?;
        let dims = rho.dims();
        let base = self
            .stamp(MatrixDocument::new(Kind::Certificate, vec![dims.dim_a, dims.dim_b]))
            .with_meta("side", args.side);
        let (doc, verdict, gap) = match args.mode {
            Mode::Faithful => {
                let cert = certify_faithful(&rho, args.side, self.tol);
                let doc = faithfulness_meta(base.with_meta("mode", "faithful"), &cert);
                (doc, cert.faithful, cert.gap)
            }
            Mode::Sensitive => {
                let class = match args.class {
                    ClassArg::Unitary => ChannelClass::Unitary,
                    ClassArg::Unital => ChannelClass::Unital,
                };
                let cert = certify_sensitive(&rho, args.side, class, self.tol)?;
                let mut doc = base
                    .with_meta("mode", "sensitive")
                    .with_meta("class", args.class.to_possible_value().expect("named").get_name())
                    .with_meta("verdict", cert.sensitive)
                    .with_meta("nullity", cert.nullity);
                doc.set_number("rank_tol", cert.tol);
                gap_meta(&mut doc, cert.gap);
                if let Some(m) = &cert.pcq_measurement {
                    doc = doc.with_meta("projectors", m.len()).with_meta("projector_dim", dims.of(args.side));
                    doc.set_number("algebra_residual", m.algebra_residual());
                    doc.set_number("invariance_residual", m.invariance_residual(&rho.oriented(args.side)));
                    for p in &m.projectors {
                        doc.stack(p);
                    }
                }
                (doc, cert.sensitive, cert.gap)
            }
        };
        self.emit(&[doc])?;
        if gap.ratio() < GAP_RATIO_THRESHOLD {
            eprintln!("aapt: rank decision is ambiguous (gap ratio {:.3e} < {GAP_RATIO_THRESHOLD})", gap.ratio());
            return Ok(Status::Numerical);
        }
        Ok(Status::verdict(verdict))
    }

    fn witness(&self, args: &WitnessArgs) -> Result<Status> {
        let rho = read_state(&args.state)?;
        let cert = certify_faithful(&rho, args.side, self.tol);
        check_gap(cert.gap)?;
        if cert.faithful {
            eprintln!(
                "aapt: state is faithful on {} (rank {}/{}); no witness exists",
                args.side, cert.rank, cert.required_rank
            );
            return Ok(Status::False);
        }
        let w = faithfulness_witness(&rho, args.side, self.tol)?
            .ok_or_else(|| CliError::Numerical("rank certificate and witness construction disagree".into()))?;
        let dims = rho.dims();
        let docs: Vec<MatrixDocument> = [("k0", &w.k0), ("k1", &w.k1)]
            .into_iter()
            .map(|(role, ch)| {
                let mut doc = self
                    .stamp(channel_document(ch))
                    .with_meta("role", role)
                    .with_meta("side", args.side)
                    .with_meta("state_dims", format!("{},{}", dims.dim_a, dims.dim_b))
                    .with_meta("restricted_dims", format!("{},{}", w.restricted_dims.dim_a, w.restricted_dims.dim_b));
                doc.set_number("alpha", w.alpha);
                doc.set_number("output_gap", w.output_gap);
                doc.set_number("channel_gap", w.channel_gap);
                doc
            })
            .collect();
        self.emit(&docs)?;
        Ok(Status::True)
    }

    fn reconstruct(&self, args: &ReconstructArgs) -> Result<Status> {
        let probe = read_state(&args.probe)?;
        let cert = certify_faithful(&probe, args.side, self.tol);
        if !cert.faithful {
            eprintln!("aapt: probe is not faithful on {} (rank {}/{})", args.side, cert.rank, cert.required_rank);
            return Ok(Status::False);
        }
        check_gap(cert.gap)?;
        let d = probe.dims().of(args.side);
        let doc = self
            .stamp(MatrixDocument::new(Kind::Report, vec![d, d]))
            .with_meta("repr", "choi")
            .with_meta("side", args.side);
        let doc = match (&args.output, &args.channel) {
            (Some(output), _) => {
                let output = read_state(output)?;
                let report = reconstruct_channel(&probe, &output, args.side, self.tol)?;
                report_document(doc, &[report])
            }
            (None, Some(truth)) => {
                if !(args.noise >= 0.0 && args.noise.is_finite()) {
                    return Err(CliError::Usage(format!("--noise must be nonnegative, got {}", args.noise)));
                }
                if args.trials == 0 {
                    return Err(CliError::Usage("--trials must be positive".into()));
                }
                let truth = read_channel(truth)?;
                if (truth.dim_in(), truth.dim_out()) != (d, d) {
                    return Err(CliError::Format(format!(
                        "channel acts {}->{}, probe side has dimension {d}",
                        truth.dim_in(),
                        truth.dim_out()
                    )));
                }
                let reports = noise_stress(&probe, &truth, args.side, args.noise, args.trials, RandomSeed(self.seed))?;
                let mut doc = report_document(doc.with_meta("trials", args.trials), &reports);
                doc.set_number("noise", args.noise);
                doc
            }
            (None, None) => return Err(CliError::Usage("need an output state or --channel".into())),
        };
        self.emit(&[doc])?;
        Ok(Status::True)
    }

    fn decompose(&self, args: &DecomposeArgs) -> Result<Status> {
        let doc = MatrixDocument::read(&args.transfer)?;
        doc.expect_kind(&[Kind::Transfer])?;
        let (din, dout) = doc.dim_pair()?;
        let t = TransferMatrix::new(doc.matrix(dout * dout, din * din)?, din, dout)?;
        let dec = lemma1_decompose(&HermitianPreservingMap::new(t)?)?;
        let docs: Vec<MatrixDocument> = [("k0", &dec.k0), ("k1", &dec.k1)]
            .into_iter()
            .map(|(role, ch)| {
                let mut doc = self.stamp(channel_document(ch)).with_meta("role", role);
                doc.set_number("alpha", dec.alpha);
                doc
            })
            .collect();
        self.emit(&docs)?;
        Ok(Status::True)
    }
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn check_gap(gap: SingularGap) -> Result<()> {
    if gap.ratio() < GAP_RATIO_THRESHOLD {
        return Err(CliError::Numerical(format!(
            "rank decision is ambiguous (gap ratio {:.3e} < {GAP_RATIO_THRESHOLD})",
            gap.ratio()
        )));
    }
    Ok(())
}

fn gap_meta(doc: &mut MatrixDocument, gap: SingularGap) {
    if let Some(r) = gap.retained {
        doc.set_number("gap_retained", r);
    }
    if let Some(d) = gap.discarded {
        doc.set_number("gap_discarded", d);
    }
    let ratio = gap.ratio();
    if ratio.is_finite() {
        doc.set_number("gap_ratio", ratio);
    } else {
        doc.meta.insert("gap_ratio".into(), "inf".into());
    }
}

fn faithfulness_meta(doc: MatrixDocument, cert: &FaithfulnessCertificate) -> MatrixDocument {
    let sv: Vec<String> = cert.singular_values.iter().map(|&s| format_number(s)).collect();
    let mut doc = doc
        .with_meta("verdict", cert.faithful)
        .with_meta("rank", cert.rank)
        .with_meta("required_rank", cert.required_rank)
        .with_meta("restricted_dims", format!("{},{}", cert.restricted_dims.dim_a, cert.restricted_dims.dim_b))
        .with_meta("singular_values", sv.join(","));
    doc.set_number("rank_tol", cert.tol);
    gap_meta(&mut doc, cert.gap);
    doc
}

fn report_document(mut doc: MatrixDocument, reports: &[ReconstructionReport]) -> MatrixDocument {
    let max = |f: &dyn Fn(&ReconstructionReport) -> f64| reports.iter().map(f).fold(0.0, f64::max);
    doc.set_number("cp_deviation", max(&|r| r.cp_deviation));
    doc.set_number("tp_deviation", max(&|r| r.tp_deviation));
    doc.set_number("condition", max(&|r| r.condition));
    let errors: Vec<f64> = reports.iter().filter_map(|r| r.choi_error).collect();
    if !errors.is_empty() {
        doc.set_number("choi_error", errors.iter().copied().fold(0.0, f64::max));
        doc.set_number("choi_error_mean", errors.iter().sum::<f64>() / errors.len() as f64);
        let list: Vec<String> = errors.iter().map(|&e| format_number(e)).collect();
        doc.meta.insert("choi_errors".into(), list.join(","));
    }
    for r in reports {
        doc.stack(&r.channel.choi());
    }
    doc
}

/// A channel document stores the Choi matrix `sum_ij |i><j| (x) E(|i><j|)`.
pub fn channel_document(ch: &Channel) -> MatrixDocument {
    MatrixDocument::new(Kind::Channel, vec![ch.dim_in(), ch.dim_out()])
        .with_matrix(&ch.choi())
        .with_meta("repr", "choi")
}

pub fn state_from_document(doc: &MatrixDocument) -> Result<BipartiteState> {
    doc.expect_kind(&[Kind::State])?;
    let (da, db) = doc.dim_pair()?;
    let m = doc.matrix(da * db, da * db)?;
    Ok(BipartiteState::with_tolerance(m, DimPair::new(da, db)?, INPUT_TOL)?)
}

/// Reads a CPTP channel from a channel document or the Choi data of a report.
pub fn channel_from_document(doc: &MatrixDocument) -> Result<Channel> {
    doc.expect_kind(&[Kind::Channel, Kind::Report])?;
    let (din, dout) = doc.dim_pair()?;
    let n = din * dout;
    let choi: ComplexMatrix = doc.matrix(n, n)?;
    let ch = Channel::from_choi(choi, din, dout)?;
    let report = classify(&ch, INPUT_TOL);
    if !(report.is_cp && report.is_tp) {
        return Err(CliError::Format(format!(
            "channel is not CPTP (min Choi eigenvalue {:e}, TP residual {:e})",
            report.min_choi_eigenvalue, report.tp_residual
        )));
    }
    Ok(ch)
}

pub fn read_state(path: &Path) -> Result<BipartiteState> {
    state_from_document(&MatrixDocument::read(path)?).map_err(|e| prefix(path, e))
}

pub fn read_channel(path: &Path) -> Result<Channel> {
    channel_from_document(&MatrixDocument::read(path)?).map_err(|e| prefix(path, e))
}

fn prefix(path: &Path, e: CliError) -> CliError {
    match e {
        CliError::Format(msg) => CliError::Format(format!("{}: {msg}", path.display())),
        e @ CliError::Io { .. } => e,
        other if other.status() != Status::Usage => other,
        other => CliError::Format(format!("{}: {other}", path.display())),
    }
}
