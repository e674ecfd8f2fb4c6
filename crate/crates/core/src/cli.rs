//! The `upb` command line.
//!
//! Exit codes: 0 success, 1 verification failed, 2 search budget
//! exhausted, 3 invalid input.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::constructions::{
    construct_upb_4k4, verify_certificate, Certificate, VerificationReport, VerifyOptions,
};
use crate::document::{certificate_from_str, certificate_to_string, configuration_to_dot};
use crate::error::Error;
use crate::model::PartyLayout;
use crate::search::{
    exhaustive_min_upb, find_upb, pair_config_max_parties, AnchorConstraint, FindResult,
    MaxParties, MinUpbVerdict, Outcome, PairSearchOptions, ProgressEvent, SearchBudget,
    UpbConstraints,
};
use crate::states::{export_states_text, make_basis_family, realize_configuration, ORTHOGONAL_TOL};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_EXHAUSTED: i32 = 2;
pub const EXIT_INVALID: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "upb",
    version,
    about = "Build, check and search for unextendible product bases on qubits"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the 4k+4 state UPB on 4k qubits and write it as a document
    Construct {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check that a document describes a UPB
    Verify {
        path: PathBuf,
        /// Also realize the states numerically and check orthogonality
        #[arg(long)]
        numeric: bool,
        #[arg(long, default_value_t = ORTHOGONAL_TOL)]
        tol: f64,
    },
    /// Find the smallest UPB on a number of qubits by exhaustive search
    SearchMin {
        #[arg(long)]
        parties: usize,
        #[arg(long)]
        max_states: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Largest pair system that avoids the extension rule
    SearchPairs {
        #[arg(long)]
        pairs_per_party: usize,
        #[arg(long)]
        excess: usize,
        /// Every pair contains exactly one of pairs-per-party anchor vertices
        #[arg(long)]
        anchored: bool,
        /// No two parties may hold the same set of pairs
        #[arg(long)]
        distinct: bool,
        #[arg(long, default_value_t = 12)]
        max_parties: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Search for a UPB with given numbers of parties and states
    Find {
        #[arg(long)]
        parties: usize,
        #[arg(long)]
        states: usize,
        /// Largest region on any party
        #[arg(long)]
        max_region: Option<usize>,
        /// Most regions of size two on any party
        #[arg(long)]
        max_two_regions: Option<usize>,
        /// VALUE:COUNT, exactly COUNT parties have VALUE regions of size two
        #[arg(long, value_parser = parse_value_count)]
        two_region_parties: Option<(usize, usize)>,
        /// Node allowance per randomized restart
        #[arg(long)]
        restart_nodes: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Write one graph file per party
    Export {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = ExportFormat::Dot)]
        format: ExportFormat,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Write the realized product states, one per line
    Realize {
        path: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ExportFormat {
    Dot,
}

#[derive(Debug, Args)]
struct BudgetArgs {
    /// Stop after expanding this many search nodes
    #[arg(long)]
    node_limit: Option<u64>,
    /// Stop after this many seconds
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0 lets the runtime choose)
    #[arg(long, env = "UPB_THREADS", default_value_t = 0)]
    threads: usize,
    /// Emit JSON progress lines on stderr
    #[arg(long)]
    progress: bool,
}

fn parse_value_count(s: &str) -> Result<(usize, usize), String> {
    let (v, c) = s.split_once(':').ok_or("expected VALUE:COUNT")?;
    let v = v.trim().parse().map_err(|_| format!("bad value {v:?}"))?;
    let c = c.trim().parse().map_err(|_| format!("bad count {c:?}"))?;
    Ok((v, c))
}

/// A failure with its exit code.
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: EXIT_INVALID,
            message: e.to_string(),
        }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INVALID,
        message: message.into(),
    }
}

impl BudgetArgs {
    fn budget(&self) -> Result<SearchBudget, Failure> {
        let mut b = SearchBudget::default().with_seed(self.seed);
        if let Some(n) = self.node_limit {
            b = b.with_node_limit(n);
        }
        if let Some(t) = self.time_limit {
            if !(t.is_finite() && t > 0.0) {
                return Err(invalid("time limit must be a positive number of seconds"));
            }
            b = b.with_time_limit(Duration::from_secs_f64(t));
        }
        if self.progress {
            let sink = Arc::new(|e: &ProgressEvent| eprintln!("{}", e.to_json_line()));
            b = b.with_progress(sink, 1 << 16);
        }
        b.validate()?;
        Ok(b)
    }

    fn configure_threads(&self) {
        if self.threads > 0 {
            // a second call in one process fails harmlessly
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(self.threads)
                .build_global();
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32, Failure> {
    match command {
        Command::Construct { k, out: path } => construct(k, path.as_deref(), out),
        Command::Verify { path, numeric, tol } => verify(&path, numeric, tol, out),
        Command::SearchMin {
            parties,
            max_states,
            out: path,
            budget,
        } => {
            budget.configure_threads();
            search_min(parties, max_states, path.as_deref(), &budget.budget()?, out)
        }
        Command::SearchPairs {
            pairs_per_party,
            excess,
            anchored,
            distinct,
            max_parties,
            out: path,
            budget,
        } => {
            budget.configure_threads();
            let options = PairSearchOptions {
                anchors: anchored.then(|| AnchorConstraint::first(pairs_per_party)),
                distinct_parties: distinct,
                max_parties,
            };
            search_pairs(
                pairs_per_party,
                excess,
                &options,
                path.as_deref(),
                &budget.budget()?,
                out,
            )
        }
        Command::Find {
            parties,
            states,
            max_region,
            max_two_regions,
            two_region_parties,
            restart_nodes,
            out: path,
            budget,
        } => {
            budget.configure_threads();
            let constraints = UpbConstraints {
                max_region_size: max_region,
                max_two_regions,
                two_region_parties,
            };
            let mut b = budget.budget()?;
            if let Some(r) = restart_nodes {
                b = b.with_restart_nodes(r);
            }
            b.validate()?;
            find(parties, states, &constraints, path.as_deref(), &b, out)
        }
        Command::Export {
            path,
            format: ExportFormat::Dot,
            out_dir,
        } => export(&path, &out_dir, out),
        Command::Realize { path, out: target } => realize(&path, &target, out),
    }
}

fn read_certificate(path: &Path) -> Result<Certificate, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    certificate_from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| invalid(format!("cannot write {}: {e}", path.display())))
}

fn construct(k: usize, path: Option<&Path>, out: &mut dyn Write) -> Result<i32, Failure> {
    if k < 2 {
        return Err(invalid(format!(
            "the construction requires k >= 2 (got k = {k})"
        )));
    }
    let cert = construct_upb_4k4(k)?;
    let report = verify_certificate(&cert, VerifyOptions::default());
    if let Some(p) = path {
        write_file(p, &certificate_to_string(&cert))?;
    }
    let _ = writeln!(out, "states: {}", report.num_states);
    let _ = writeln!(out, "parties: {}", report.num_parties);
    let _ = writeln!(out, "edges: {}", report.covered_edges);
    let _ = writeln!(out, "verified: {}", report.passed());
    Ok(if report.passed() {
        EXIT_OK
    } else {
        EXIT_FAILED
    })
}

fn describe_region(layout: &PartyLayout, r: usize) -> String {
    let vs: Vec<String> = layout.regions()[r]
        .iter()
        .map(|v| format!("v{v}"))
        .collect();
    format!("{{{}}}", vs.join(", "))
}

fn print_report(cert: &Certificate, report: &VerificationReport, out: &mut dyn Write) {
    let _ = writeln!(out, "states: {}", report.num_states);
    let _ = writeln!(out, "parties: {}", report.num_parties);
    let total = report.num_states * report.num_states.saturating_sub(1) / 2;
    let _ = writeln!(out, "edges: {} of {}", report.covered_edges, total);
    let _ = writeln!(
        out,
        "product basis: {}",
        report.product_basis.is_product_basis
    );
    for e in report.product_basis.missing.iter().take(10) {
        let (a, b) = (e.0, e.1);
        let _ = writeln!(out, "  missing edge: v{a} -- v{b}");
    }
    let _ = writeln!(out, "unextendible: {}", report.unextendible());
    if let Some(w) = &report.extension {
        let _ = writeln!(out, "extension witness:");
        for (j, choice) in w.choices.iter().enumerate() {
            if let Some(r) = choice {
                let region = describe_region(&cert.config.parties()[j], *r);
                let _ = writeln!(out, "  party {j}: region {r} {region}");
            }
        }
    }
    let _ = writeln!(
        out,
        "all regions paired: {}",
        report.pairing_violations.is_empty()
    );
    for v in &report.pairing_violations {
        let _ = writeln!(out, "  {v:?}");
    }
    if let Some(n) = &report.numeric {
        match &n.realization_error {
            Some(e) => {
                let _ = writeln!(out, "numeric check: failed to realize: {e}");
            }
            None => {
                let _ = writeln!(
                    out,
                    "numeric check (tol {:e}): orthonormal {}, graph round trip {}",
                    n.tol, n.orthonormal, n.round_trip
                );
                for (a, b) in n.offending.iter().take(10) {
                    let _ = writeln!(out, "  not orthogonal: v{a}, v{b}");
                }
            }
        }
    }
    let _ = writeln!(out, "verified: {}", report.passed());
}

fn verify(path: &Path, numeric: bool, tol: f64, out: &mut dyn Write) -> Result<i32, Failure> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    let cert = read_certificate(path)?;
    let options = VerifyOptions {
        numeric_tol: numeric.then_some(tol),
    };
    let report = verify_certificate(&cert, options);
    print_report(&cert, &report, out);
    Ok(if report.passed() {
        EXIT_OK
    } else {
        EXIT_FAILED
    })
}

fn search_min(
    p: usize,
    s_max: usize,
    path: Option<&Path>,
    budget: &SearchBudget,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    match exhaustive_min_upb(p, s_max, budget)? {
        Outcome::Complete(r) => {
            let _ = match r.verdict {
                MinUpbVerdict::Found { size } => writeln!(out, "f({p}) = {size}"),
                MinUpbVerdict::NoneUpTo { s_max } => {
                    writeln!(
                        out,
                        "no UPB on {p} parties with at most {s_max} states: f({p}) >= {}",
                        s_max + 1
                    )
                }
            };
            let _ = writeln!(out, "nodes: {}", r.nodes);
            if let (Some(p), Some(w)) = (path, &r.witness) {
                write_file(p, &certificate_to_string(w))?;
            }
            Ok(EXIT_OK)
        }
        Outcome::Exhausted(partial) => {
            let _ = writeln!(
                out,
                "budget exhausted after {} nodes: no UPB on {p} parties with at most {} states",
                partial.nodes, partial.none_up_to
            );
            Ok(EXIT_EXHAUSTED)
        }
    }
}

fn search_pairs(
    ppp: usize,
    excess: usize,
    options: &PairSearchOptions,
    path: Option<&Path>,
    budget: &SearchBudget,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    match pair_config_max_parties(ppp, excess, options, budget)? {
        Outcome::Complete(r) => {
            let _ = match r.max_parties {
                MaxParties::Exact(m) => writeln!(out, "max parties: {m}"),
                MaxParties::AtLeast(m) => writeln!(out, "max parties: at least {m} (cap reached)"),
            };
            for (j, party) in r.witness.parties().iter().enumerate() {
                let pairs: Vec<String> =
                    party.iter().map(|(a, b)| format!("{{{a},{b}}}")).collect();
                let _ = writeln!(out, "  party {j}: {}", pairs.join(" "));
            }
            if let Some(a) = &r.witness_anchors {
                let _ = writeln!(out, "  anchors: {:?}", a.anchors());
            }
            let _ = writeln!(out, "nodes: {}", r.nodes);
            if let Some(p) = path {
                let text = serde_json::to_string_pretty(&r).expect("results serialize");
                write_file(p, &(text + "\n"))?;
            }
            Ok(EXIT_OK)
        }
        Outcome::Exhausted(partial) => {
            let _ = writeln!(
                out,
                "budget exhausted after {} nodes: at least {} parties",
                partial.nodes, partial.best_so_far
            );
            Ok(EXIT_EXHAUSTED)
        }
    }
}

fn find(
    p: usize,
    s: usize,
    constraints: &UpbConstraints,
    path: Option<&Path>,
    budget: &SearchBudget,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    match find_upb(p, s, constraints, budget)? {
        Outcome::Complete(FindResult::Found(cert)) => {
            let _ = writeln!(out, "found: {s} states on {p} parties");
            if let Some(seed) = cert.provenance.seed {
                let _ = writeln!(out, "seed: {seed}");
            }
            if let Some(path) = path {
                write_file(path, &certificate_to_string(&cert))?;
            }
            Ok(EXIT_OK)
        }
        Outcome::Complete(FindResult::NotFound) => {
            let _ = writeln!(
                out,
                "none: no UPB of {s} states on {p} parties satisfies the constraints"
            );
            Ok(EXIT_OK)
        }
        Outcome::Exhausted(partial) => {
            let _ = writeln!(
                out,
                "budget exhausted after {} nodes and {} restarts",
                partial.nodes, partial.restarts
            );
            Ok(EXIT_EXHAUSTED)
        }
    }
}

fn export(path: &Path, out_dir: &Path, out: &mut dyn Write) -> Result<i32, Failure> {
    let cert = read_certificate(path)?;
    fs::create_dir_all(out_dir)
        .map_err(|e| invalid(format!("cannot create {}: {e}", out_dir.display())))?;
    let dots = configuration_to_dot(&cert.config);
    for (j, dot) in dots.iter().enumerate() {
        let target = out_dir.join(format!("party{j}.dot"));
        write_file(&target, dot)?;
        let _ = writeln!(out, "{}", target.display());
    }
    Ok(EXIT_OK)
}

fn realize(path: &Path, target: &Path, out: &mut dyn Write) -> Result<i32, Failure> {
    let cert = read_certificate(path)?;
    let family = make_basis_family(cert.assignment.bases_needed().max(1))?;
    let states = realize_configuration(&cert.config, &cert.assignment, &family)?;
    write_file(target, &export_states_text(&states))?;
    let _ = writeln!(
        out,
        "wrote {} states on {} qubits",
        states.len(),
        cert.num_parties()
    );
    Ok(EXIT_OK)
}
