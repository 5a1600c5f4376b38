mod render;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ramsey_locc::cliques::orthogonality_summary;
use ramsey_locc::protocol::{
    bound_report, epsilon_schedule, exclusion_schedule, greedy_exclusion, parse_epsilon, plan_distinguish,
    synthesize_exclusion, ProtocolTree, Strategy, DEFAULT_MAX_THRESHOLD, DEFAULT_SCAN_MAX,
};
use ramsey_locc::ramsey::{
    brute_force_ramsey, check_exclusion_conditions, BruteForceOptions, ConditionQuery, Deriver, Ledger, RamseyQuery,
    Status, LEDGER_ENV,
};
use ramsey_locc::simulate::{run_trace, verify_exclusion, verify_identification};
use ramsey_locc::states::{
    extract_coloring, random_coloring, realize, ColoringFile, EdgeColoring, ProductStateSet, RealizeOptions,
    StateSetFile,
};
use serde::de::DeserializeOwned;
use serde::Serialize;

const SCHEMAS: &str = r#"FILE SCHEMAS (JSON)
  states    {"parties":r,"dims":[d,..],"zero_tol":x,"gap_tol":y,
             "states":[{"parts":[[re,im,re,im,..],..]},..]}
  coloring  {"n":N,"r":r,"edges":[{"u":u,"v":v,"colors":[j,..]},..]}
  tree      {"candidates":[i,..],"target":{"exclude":k}|"identify","copies_used":c,"root":NODE}
            NODE = {"copy":c,"subsystem":j,"projectors":[i,..],"children":{"i":NODE,..,"REST":NODE}}
                 | {"survivors":[i,..],"next":stage}     ("next" only inside plans)
  plan      {"n":N,"parties":r,"worst_case_copies":g,"schedule":{..},"root":stage,
             "stages":[{"id":s,"survivors":[..],"bound":b,"candidates":[..],"exclude":k,
                        "source":"theorem"|"greedy"|"pairwise","tree":NODE},..]}
            each stage runs on a fresh copy; its tree uses copy index 1
  ledger    {"version":"..","entries":[{"targets":[i,..],"lower":l|null,"upper":u|null,
             "exact":bool,"source":"Table1".."Table4"},..]}
States, subsystems and colors are 0-based; copies are 1-based.

EXIT CODES
  0 success or verification passed, 1 verification failed, 2 usage or validation error"#;

#[derive(Parser)]
#[command(name = "ramsey-locc", version, about = "Ramsey-bound certified LOCC exclusion and identification of orthogonal product states", after_help = SCHEMAS)]
struct Cli {
    /// Emit machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Ledger file replacing the built-in Ramsey table.
    #[arg(long, global = true, env = LEDGER_ENV)]
    ledger: Option<PathBuf>,
    /// Override the zero tolerance of loaded or realized state sets.
    #[arg(long, global = true)]
    zero_tol: Option<f64>,
    /// Override the gap tolerance of loaded or realized state sets.
    #[arg(long, global = true)]
    gap_tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ramsey-number ledger queries and certification.
    #[command(subcommand, after_help = SCHEMAS)]
    Ramsey(RamseyCmd),
    /// Product-state sets and orthogonality colorings.
    #[command(subcommand, after_help = SCHEMAS)]
    States(StatesCmd),
    /// Monochromatic cliques of a coloring.
    #[command(subcommand, after_help = SCHEMAS)]
    Cliques(CliquesCmd),
    /// Protocol synthesis, planning and copy bounds.
    #[command(subcommand, after_help = SCHEMAS)]
    Protocol(ProtocolCmd),
    /// Exhaustive verification and sampled runs.
    #[command(subcommand, after_help = SCHEMAS)]
    Simulate(SimulateCmd),
    /// Random coloring, realization, plan and verification in one go.
    E2e {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum RamseyCmd {
    /// Certified interval for R(i_1, .., i_r).
    Query {
        #[arg(required = true)]
        targets: Vec<u32>,
    },
    /// Three-valued check of the exclusion inequalities for (r, m, k).
    Check {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        k: u32,
    },
    /// Exhaustive search over colorings of K_n for n up to --max-n.
    Brute {
        #[arg(required = true)]
        targets: Vec<u32>,
        #[arg(long)]
        max_n: u32,
        /// Backtrack edge by edge instead of enumerating every coloring.
        #[arg(long)]
        prune: bool,
    },
}

#[derive(Args)]
struct OutArg {
    /// Write the artifact here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum StatesCmd {
    /// Check normalization, orthogonality and the tolerance gap.
    Validate { states: PathBuf },
    /// Orthogonality coloring of a state set.
    Extract {
        states: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
    /// Random product states with exactly the given orthogonality coloring.
    Realize {
        coloring: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Per-subsystem dimensions (default N each).
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Uniformly random single-color coloring of K_n.
    RandomColoring {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Subcommand)]
enum CliquesCmd {
    /// Largest monochromatic clique per color.
    Summary { coloring: PathBuf },
}

#[derive(Subcommand)]
enum ProtocolCmd {
    /// Single-copy exclusion tree; certified when --k is given, greedy otherwise.
    Synthesize {
        states: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        /// Base clique size of the certificate (default: smallest that applies).
        #[arg(long)]
        m: Option<u32>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Adaptive multi-copy identification strategy.
    Plan {
        states: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
    /// Copy-count upper bounds for n states.
    Bounds {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
    },
    /// Schedule with copies at most ceil(eps N) for large N.
    Epsilon {
        /// Decimal or p/q.
        #[arg(long)]
        eps: String,
        #[arg(long)]
        r: usize,
        #[arg(long, default_value_t = DEFAULT_SCAN_MAX)]
        scan_max: u64,
    },
}

#[derive(Subcommand)]
enum SimulateCmd {
    /// Check that a tree excludes at least k candidates on every branch.
    VerifyExclusion {
        states: PathBuf,
        tree: PathBuf,
        #[arg(long)]
        k: usize,
    },
    /// Check that a plan identifies every candidate.
    VerifyIdentify { states: PathBuf, plan: PathBuf },
    /// Sample one run of a plan.
    Trace {
        states: PathBuf,
        plan: PathBuf,
        #[arg(long)]
        truth: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Usage or validation error; exits with code 2.
struct Failure {
    message: String,
}

type CliResult<T> = Result<T, Failure>;

fn invalid(context: impl std::fmt::Display, e: impl std::fmt::Display) -> Failure {
    Failure {
        message: format!("{context}: {e}"),
    }
}

#[derive(Serialize)]
struct Tolerances {
    zero_tol: f64,
    gap_tol: f64,
}

impl Tolerances {
    fn of(s: &ProductStateSet) -> Self {
        Self {
            zero_tol: s.zero_tol(),
            gap_tol: s.gap_tol(),
        }
    }
}

/// Envelope shared by every report.
#[derive(Serialize)]
struct Report<T> {
    command: String,
    ledger_version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    tolerances: Option<Tolerances>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pass: Option<bool>,
    result: T,
}

struct Ctx {
    json: bool,
    ledger: Ledger,
    zero_tol: Option<f64>,
    gap_tol: Option<f64>,
}

/// What a subcommand produced: a report, plus whether verification passed.
struct Outcome {
    report: serde_json::Value,
    pass: Option<bool>,
}

impl Ctx {
    fn report<T: Serialize>(
        &self,
        command: &str,
        tolerances: Option<Tolerances>,
        seed: Option<u64>,
        pass: Option<bool>,
        result: T,
    ) -> CliResult<Outcome> {
        let report = Report {
            command: command.to_string(),
            ledger_version: self.ledger.version().to_string(),
            tolerances,
            seed,
            pass,
            result,
        };
        let report = serde_json::to_value(&report).map_err(|e| invalid(command, e))?;
        Ok(Outcome { report, pass })
    }

    fn read_json<T: DeserializeOwned>(&self, path: &Path) -> CliResult<T> {
        let text = fs::read_to_string(path).map_err(|e| invalid(path.display(), e))?;
        serde_json::from_str(&text).map_err(|e| invalid(path.display(), e))
    }

    fn load_states(&self, path: &Path) -> CliResult<ProductStateSet> {
        let mut file: StateSetFile = self.read_json(path)?;
        file.zero_tol = self.zero_tol.unwrap_or(file.zero_tol);
        file.gap_tol = self.gap_tol.unwrap_or(file.gap_tol);
        ProductStateSet::from_file(&file).map_err(|e| invalid(path.display(), e))
    }

    fn load_coloring(&self, path: &Path) -> CliResult<EdgeColoring> {
        let file: ColoringFile = self.read_json(path)?;
        EdgeColoring::from_file(&file).map_err(|e| invalid(path.display(), e))
    }

    fn realize_options(&self, dims: Option<Vec<usize>>) -> RealizeOptions {
        let d = RealizeOptions::default();
        RealizeOptions {
            dims,
            zero_tol: self.zero_tol.unwrap_or(d.zero_tol),
            gap_tol: self.gap_tol.unwrap_or(d.gap_tol),
            ..d
        }
    }

    /// Writes `artifact` to `out`, or returns it as the report when absent.
    fn emit<T: Serialize, S: Serialize>(
        &self,
        command: &str,
        artifact: &T,
        out: &OutArg,
        tolerances: Option<Tolerances>,
        seed: Option<u64>,
        summary: S,
    ) -> CliResult<Outcome> {
        match &out.out {
            Some(path) => {
                let text = serde_json::to_string_pretty(artifact).map_err(|e| invalid(command, e))?;
                fs::write(path, text + "\n").map_err(|e| invalid(path.display(), e))?;
                #[derive(Serialize)]
                struct Written<S> {
                    written: String,
                    #[serde(flatten)]
                    summary: S,
                }
                let written = Written {
                    written: path.display().to_string(),
                    summary,
                };
                self.report(command, tolerances, seed, None, written)
            }
            None => Ok(Outcome {
                report: serde_json::to_value(artifact).map_err(|e| invalid(command, e))?,
                pass: None,
            }),
        }
    }
}

fn run(cli: Cli) -> CliResult<(Outcome, bool)> {
    let ledger = match &cli.ledger {
        Some(path) => Ledger::load(path).map_err(|e| invalid(path.display(), e))?,
        None => Ledger::builtin(),
    };
    let ctx = Ctx {
        json: cli.json,
        ledger,
        zero_tol: cli.zero_tol,
        gap_tol: cli.gap_tol,
    };
    // Artifacts printed to stdout are always JSON.
    let mut raw = false;
    let outcome = match cli.command {
        Command::Ramsey(cmd) => ramsey(&ctx, cmd)?,
        Command::States(cmd) => {
            raw = matches!(
                &cmd,
                StatesCmd::Extract {
                    out: OutArg { out: None },
                    ..
                } | StatesCmd::Realize {
                    out: OutArg { out: None },
                    ..
                } | StatesCmd::RandomColoring {
                    out: OutArg { out: None },
                    ..
                }
            );
            states(&ctx, cmd)?
        }
        Command::Cliques(CliquesCmd::Summary { coloring }) => {
            let c = ctx.load_coloring(&coloring)?;
            ctx.report("cliques summary", None, None, None, orthogonality_summary(&c))?
        }
        Command::Protocol(cmd) => {
            raw = matches!(
                &cmd,
                ProtocolCmd::Synthesize {
                    out: OutArg { out: None },
                    ..
                } | ProtocolCmd::Plan {
                    out: OutArg { out: None },
                    ..
                }
            );
            protocol(&ctx, cmd)?
        }
        Command::Simulate(cmd) => simulate(&ctx, cmd)?,
        Command::E2e { n, r, seed } => e2e(&ctx, n, r, seed)?,
    };
    Ok((outcome, raw || ctx.json))
}

fn ramsey(ctx: &Ctx, cmd: RamseyCmd) -> CliResult<Outcome> {
    let mut d = Deriver::new(&ctx.ledger);
    match cmd {
        RamseyCmd::Query { targets } => {
            let q = RamseyQuery::new(&targets).map_err(|e| invalid("targets", e))?;
            let b = d.derive(&q);
            #[derive(Serialize)]
            struct QueryResult {
                query: String,
                value: String,
                bounds: ramsey_locc::ramsey::BoundInterval,
            }
            let result = QueryResult {
                query: q.to_string(),
                value: b.to_string(),
                bounds: b,
            };
            ctx.report("ramsey query", None, None, None, result)
        }
        RamseyCmd::Check { r, m, k } => {
            let q = ConditionQuery::new(r, m, k).map_err(|e| invalid("(r, m, k)", e))?;
            let v = check_exclusion_conditions(&mut d, q).map_err(|e| invalid("(r, m, k)", e))?;
            #[derive(Serialize)]
            struct CheckResult {
                lines: Vec<String>,
                #[serde(flatten)]
                verdict: ramsey_locc::ramsey::CertificationVerdict,
            }
            let lines = v.witness.iter().map(|l| format!("t={}: {}", l.t, l.render())).collect();
            ctx.report("ramsey check", None, None, None, CheckResult { lines, verdict: v })
        }
        RamseyCmd::Brute { targets, max_n, prune } => {
            let rep =
                brute_force_ramsey(&targets, max_n, BruteForceOptions { prune }).map_err(|e| invalid("targets", e))?;
            ctx.report("ramsey brute", None, None, None, rep)
        }
    }
}

fn states(ctx: &Ctx, cmd: StatesCmd) -> CliResult<Outcome> {
    match cmd {
        StatesCmd::Validate { states } => {
            let s = ctx.load_states(&states)?;
            let rep = s.validate();
            if !rep.is_clean() {
                let detail = serde_json::to_string(&rep).unwrap_or_default();
                return Err(invalid(states.display(), format!("validation failed: {detail}")));
            }
            ctx.report("states validate", Some(Tolerances::of(&s)), None, None, rep)
        }
        StatesCmd::Extract { states, out } => {
            let s = ctx.load_states(&states)?;
            let c = extract_coloring(&s).map_err(|e| invalid(states.display(), e))?;
            #[derive(Serialize)]
            struct Shape {
                n: usize,
                r: usize,
            }
            let shape = Shape {
                n: c.n(),
                r: c.colors(),
            };
            ctx.emit(
                "states extract",
                &c.to_file(),
                &out,
                Some(Tolerances::of(&s)),
                None,
                shape,
            )
        }
        StatesCmd::Realize {
            coloring,
            seed,
            dims,
            out,
        } => {
            let c = ctx.load_coloring(&coloring)?;
            let s = realize(&c, seed, &ctx.realize_options(dims)).map_err(|e| invalid(coloring.display(), e))?;
            #[derive(Serialize)]
            struct Shape {
                states: usize,
                dims: Vec<usize>,
            }
            let shape = Shape {
                states: s.len(),
                dims: s.dims().to_vec(),
            };
            ctx.emit(
                "states realize",
                &s.to_file(),
                &out,
                Some(Tolerances::of(&s)),
                Some(seed),
                shape,
            )
        }
        StatesCmd::RandomColoring { n, r, seed, out } => {
            let c = random_coloring(n, r, seed).map_err(|e| invalid("--n/--r", e))?;
            #[derive(Serialize)]
            struct Shape {
                n: usize,
                r: usize,
            }
            ctx.emit(
                "states random-coloring",
                &c.to_file(),
                &out,
                None,
                Some(seed),
                Shape { n, r },
            )
        }
    }
}

fn synthesize(ctx: &Ctx, s: &ProductStateSet, k: Option<usize>, m: Option<u32>) -> Result<ProtocolTree, String> {
    let Some(k) = k else {
        return greedy_exclusion(s).map_err(|e| e.to_string());
    };
    let mut d = Deriver::new(&ctx.ledger);
    let r = s.parties();
    let explicit = m.is_some();
    let ms: Vec<u32> = match m {
        Some(m) => vec![m],
        None => (2..=k as u32).collect(),
    };
    let mut last = format!("no base clique size m <= {k} certifies excluding {k}");
    for m in ms {
        let q = ConditionQuery::new(r, m, k as u32).map_err(|e| e.to_string())?;
        let cert = check_exclusion_conditions(&mut d, q).map_err(|e| e.to_string())?;
        let applies = cert.status == Status::Certified && cert.certified_threshold.is_some_and(|t| t <= s.len() as u64);
        // An explicit m is always attempted so its rejection is reported.
        if applies || explicit {
            return synthesize_exclusion(s, k, &cert).map_err(|e| e.to_string());
        }
        last = format!(
            "(r={r}, m={m}, k={k}) is {:?}, threshold {:?}",
            cert.status, cert.certified_threshold
        );
    }
    Err(last)
}

fn protocol(ctx: &Ctx, cmd: ProtocolCmd) -> CliResult<Outcome> {
    match cmd {
        ProtocolCmd::Synthesize { states, k, m, out } => {
            let s = ctx.load_states(&states)?;
            let tree = synthesize(ctx, &s, k, m).map_err(|e| invalid(states.display(), e))?;
            #[derive(Serialize)]
            struct Summary {
                target: ramsey_locc::protocol::Target,
                nodes: usize,
            }
            let summary = Summary {
                target: tree.target,
                nodes: tree.root.node_count(),
            };
            ctx.emit(
                "protocol synthesize",
                &tree,
                &out,
                Some(Tolerances::of(&s)),
                None,
                summary,
            )
        }
        ProtocolCmd::Plan { states, out } => {
            let s = ctx.load_states(&states)?;
            let sched = exclusion_schedule(&mut Deriver::new(&ctx.ledger), s.parties(), DEFAULT_MAX_THRESHOLD)
                .map_err(|e| invalid(states.display(), e))?;
            let plan = plan_distinguish(&s, &sched).map_err(|e| invalid(states.display(), e))?;
            #[derive(Serialize)]
            struct Summary {
                n: usize,
                stages: usize,
                worst_case_copies: usize,
            }
            let summary = Summary {
                n: plan.n,
                stages: plan.stages.len(),
                worst_case_copies: plan.worst_case_copies,
            };
            ctx.emit("protocol plan", &plan, &out, Some(Tolerances::of(&s)), None, summary)
        }
        ProtocolCmd::Bounds { n, r } => {
            let sched = exclusion_schedule(&mut Deriver::new(&ctx.ledger), r, DEFAULT_MAX_THRESHOLD)
                .map_err(|e| invalid("--r", e))?;
            let b = bound_report(n, &sched).map_err(|e| invalid("--n", e))?;
            #[derive(Serialize)]
            struct BoundsResult {
                #[serde(flatten)]
                bounds: ramsey_locc::protocol::BoundReport,
                copy_schedule: ramsey_locc::protocol::CopySchedule,
                note: &'static str,
            }
            let result = BoundsResult {
                bounds: b,
                copy_schedule: sched.copy_schedule(n),
                note: "paper_f2 is arithmetic only: it relies on an exclude-4-of-7 subroutine this build does not \
                       implement; the planner guarantees `scheduler` copies",
            };
            ctx.report("protocol bounds", None, None, None, result)
        }
        ProtocolCmd::Epsilon { eps, r, scan_max } => {
            let e = parse_epsilon(&eps).map_err(|e| invalid("--eps", e))?;
            let sched =
                epsilon_schedule(&mut Deriver::new(&ctx.ledger), e, r, scan_max).map_err(|e| invalid("--eps", e))?;
            ctx.report("protocol epsilon", None, None, None, sched)
        }
    }
}

fn simulate(ctx: &Ctx, cmd: SimulateCmd) -> CliResult<Outcome> {
    match cmd {
        SimulateCmd::VerifyExclusion { states, tree, k } => {
            let s = ctx.load_states(&states)?;
            let t: ProtocolTree = ctx.read_json(&tree)?;
            let rep = verify_exclusion(&t, &s, k).map_err(|e| invalid(tree.display(), e))?;
            ctx.report(
                "simulate verify-exclusion",
                Some(Tolerances::of(&s)),
                None,
                Some(rep.pass),
                rep,
            )
        }
        SimulateCmd::VerifyIdentify { states, plan } => {
            let s = ctx.load_states(&states)?;
            let p: Strategy = ctx.read_json(&plan)?;
            let rep = verify_identification(&p, &s).map_err(|e| invalid(plan.display(), e))?;
            ctx.report(
                "simulate verify-identify",
                Some(Tolerances::of(&s)),
                None,
                Some(rep.pass),
                rep,
            )
        }
        SimulateCmd::Trace {
            states,
            plan,
            truth,
            seed,
        } => {
            let s = ctx.load_states(&states)?;
            let p: Strategy = ctx.read_json(&plan)?;
            let rec = run_trace(&p, &s, truth, seed).map_err(|e| invalid(plan.display(), e))?;
            ctx.report("simulate trace", Some(Tolerances::of(&s)), Some(seed), None, rec)
        }
    }
}

fn e2e(ctx: &Ctx, n: usize, r: usize, seed: u64) -> CliResult<Outcome> {
    let c = random_coloring(n, r, seed).map_err(|e| invalid("--n/--r", e))?;
    let s = realize(&c, seed, &ctx.realize_options(None)).map_err(|e| invalid("realize", e))?;
    let sched =
        exclusion_schedule(&mut Deriver::new(&ctx.ledger), r, DEFAULT_MAX_THRESHOLD).map_err(|e| invalid("--r", e))?;
    let plan = plan_distinguish(&s, &sched).map_err(|e| invalid("plan", e))?;
    let rep = verify_identification(&plan, &s).map_err(|e| invalid("verify", e))?;
    let bounds = bound_report(n, &sched).map_err(|e| invalid("--n", e))?;
    #[derive(Serialize)]
    struct Summary {
        n: usize,
        r: usize,
        stages: usize,
        copies_used: Option<usize>,
        guaranteed_copies: usize,
        within_guarantee: bool,
        bounds: ramsey_locc::protocol::BoundReport,
        counterexample: Option<ramsey_locc::simulate::Counterexample>,
    }
    let within = rep.max_copies.unwrap_or(0) <= plan.worst_case_copies;
    let pass = rep.pass && within;
    let summary = Summary {
        n,
        r,
        stages: plan.stages.len(),
        copies_used: rep.max_copies,
        guaranteed_copies: plan.worst_case_copies,
        within_guarantee: within,
        bounds,
        counterexample: rep.counterexample,
    };
    ctx.report("e2e", Some(Tolerances::of(&s)), Some(seed), Some(pass), summary)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((outcome, json)) => {
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&outcome.report).expect("reports serialize")
                );
            } else {
                print!("{}", render::human(&outcome.report));
            }
            match outcome.pass {
                Some(false) => ExitCode::from(1),
                _ => ExitCode::SUCCESS,
            }
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(2)
        }
    }
}
