//! Command-line front end: solve relaxations, inspect term-sparsity
//! patterns and sign-symmetries, export SDPA files, generate benchmark
//! instances and verify certificates.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use tssos::gen::GeneratorSpec;
use tssos::relax::{
    self, build_problem, certificate_support_ok, extract_certificate, unconstrained_basis, verify_certificate,
    BasisChoice, Pop, RelaxOptions, RelaxationResult, SparseOrder,
};
use tssos::sdp::{write_sdpa, Form, SolveStatus, SolverConfig};
use tssos::signsym::{sign_symmetries, signsym_partition};
use tssos::tsp::{tsp_iterate_unconstrained, BlockPartition, TspState};
use tssos::{standard_basis, MonomialBasis, Polynomial};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Solver(String),
    #[error("{0}")]
    Verify(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Solver(_) => EXIT_SOLVER,
            CliError::Verify(_) => EXIT_VERIFY,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

#[derive(Parser, Debug)]
#[command(name = "tssos", version, about = "Term-sparsity SOS relaxations for polynomial optimization")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Assemble and solve a relaxation.
    Solve {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        relax: RelaxArgs,
        #[command(flatten)]
        out: OutputArgs,
        /// JSON array of job specifications to run instead of a single input.
        #[arg(long)]
        batch: Option<PathBuf>,
        /// Maximum number of batch jobs run concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// List the block partitions of every sparse order up to stabilization.
    Pattern {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        relax: RelaxArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Compute the sign-symmetries and the partition they induce.
    Signsym {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        relax: RelaxArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Write the relaxation as an SDPA sparse file.
    Export {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        relax: RelaxArgs,
        /// Destination `.dat-s` file; standard output when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Emit a benchmark instance as a problem file.
    Generate {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long)]
        n: usize,
        /// Degree `2d` of the random families.
        #[arg(long, default_value_t = 4)]
        two_d: u32,
        /// Number of squares (randpoly1).
        #[arg(long, default_value_t = 1)]
        t: usize,
        /// Monomial keep probability (randpoly1).
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        /// Number of terms (randpoly2).
        #[arg(long)]
        s: Option<usize>,
        /// Domain size (network2).
        #[arg(long, default_value_t = 2.0)]
        g: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Solve, extract the SOS certificate and verify it.
    Certify {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        relax: RelaxArgs,
        #[command(flatten)]
        out: OutputArgs,
        /// Coefficient and eigenvalue tolerance.
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
    },
}

#[derive(Args, Debug, Clone, Default)]
pub struct InputArgs {
    /// Number of variables for `--poly`.
    #[arg(long)]
    pub n: Option<usize>,
    /// Objective polynomial, e.g. "1+x1^4-2*x1*x2".
    #[arg(long)]
    pub poly: Option<String>,
    /// Constraint `g >= 0`; repeatable.
    #[arg(long = "constraint")]
    pub constraints: Vec<String>,
    /// Problem file (JSON with n, objective, constraints).
    #[arg(long, conflicts_with_all = ["n", "poly", "constraints"])]
    pub input: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct RelaxArgs {
    /// Relaxation order for constrained problems; defaults to the minimum.
    #[arg(long)]
    pub order: Option<u32>,
    /// Sparse order: a positive integer or "stabilize".
    #[arg(long, value_parser = parse_sparse_order)]
    pub sparse_order: Option<SparseOrder>,
    #[arg(long, value_enum, default_value_t = BasisArg::Newton)]
    pub basis: BasisArg,
    #[arg(long, value_enum, default_value_t = FormArg::Sos)]
    pub form: FormArg,
    #[arg(long, default_value_t = 1e-8)]
    pub gap_tol: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub feas_tol: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
    /// Print solver iterations to standard error.
    #[arg(long)]
    pub verbose: bool,
}

#[derive(Args, Debug, Clone, Default)]
pub struct OutputArgs {
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisArg {
    #[default]
    Newton,
    Standard,
}

#[derive(ValueEnum, Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormArg {
    #[default]
    Sos,
    Moment,
}

#[derive(ValueEnum, Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Json,
    Text,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Randpoly1,
    Randpoly2,
    Broyden,
    Network1,
    Network2,
}

pub fn parse_sparse_order(s: &str) -> Result<SparseOrder, String> {
    if s.eq_ignore_ascii_case("stabilize") {
        return Ok(SparseOrder::Stabilize);
    }
    match s.parse::<usize>() {
        Ok(k) if k >= 1 => Ok(SparseOrder::Fixed(k)),
        _ => Err(format!("sparse order must be a positive integer or \"stabilize\", got {s:?}")),
    }
}

/// On-disk problem description. Parameter fields are only present for
/// parametric instances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PopFile {
    pub n: usize,
    pub objective: String,
    #[serde(default)]
    pub constraints: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<String>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub param_floor: f64,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

impl PopFile {
    pub fn from_pop(pop: &Pop) -> Self {
        PopFile {
            n: pop.n,
            objective: pop.objective.to_string(),
            constraints: pop.constraints.iter().map(|g| g.to_string()).collect(),
            params: pop.params.iter().map(|p| p.to_string()).collect(),
            param_floor: pop.param_floor,
        }
    }

    pub fn to_pop(&self) -> Result<Pop, CliError> {
        let parse = |what: &str, s: &str| {
            Polynomial::parse(s, self.n).map_err(|e| usage(format!("{what}: {e}")))
        };
        let f = parse("objective", &self.objective)?;
        let gs = self
            .constraints
            .iter()
            .enumerate()
            .map(|(i, s)| parse(&format!("constraint {}", i + 1), s))
            .collect::<Result<Vec<_>, _>>()?;
        let ps = self
            .params
            .iter()
            .enumerate()
            .map(|(i, s)| parse(&format!("parameter {}", i + 1), s))
            .collect::<Result<Vec<_>, _>>()?;
        let pop = Pop::new(f, gs).map_err(usage)?;
        if ps.is_empty() {
            Ok(pop)
        } else {
            pop.with_params(ps, self.param_floor).map_err(usage)
        }
    }
}

fn read_pop_file(path: &Path) -> Result<Pop, CliError> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let file: PopFile =
        serde_json::from_str(&text).map_err(|e| usage(format!("invalid problem file {}: {e}", path.display())))?;
    file.to_pop()
}

impl InputArgs {
    pub fn load(&self) -> Result<Pop, CliError> {
        if let Some(path) = &self.input {
            return read_pop_file(path);
        }
        let poly = self
            .poly
            .as_ref()
            .ok_or_else(|| usage("no problem given: use --poly with --n, or --input"))?;
        let n = self.n.ok_or_else(|| usage("--poly requires --n"))?;
        PopFile {
            n,
            objective: poly.clone(),
            constraints: self.constraints.clone(),
            params: Vec::new(),
            param_floor: 0.0,
        }
        .to_pop()
    }
}

impl RelaxArgs {
    pub fn options(&self, default_order: SparseOrder) -> RelaxOptions {
        RelaxOptions {
            sparse_order: self.sparse_order.unwrap_or(default_order),
            basis: match self.basis {
                BasisArg::Newton => BasisChoice::Newton,
                BasisArg::Standard => BasisChoice::Standard,
            },
            form: match self.form {
                FormArg::Sos => Form::Sos,
                FormArg::Moment => Form::Moment,
            },
            order: self.order,
            solver: SolverConfig {
                gap_tol: self.gap_tol,
                feas_tol: self.feas_tol,
                max_iter: self.max_iter,
                verbose: self.verbose,
            },
        }
    }
}

/// One entry of a batch file. Exactly one of `input`, `problem` and
/// `generator` names the problem; the remaining fields override defaults.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobSpec {
    pub input: Option<PathBuf>,
    pub problem: Option<PopFile>,
    pub generator: Option<GeneratorSpec>,
    pub order: Option<u32>,
    pub sparse_order: Option<Value>,
    pub basis: Option<BasisArg>,
    pub form: Option<FormArg>,
    pub gap_tol: Option<f64>,
    pub feas_tol: Option<f64>,
    pub max_iter: Option<usize>,
}

impl JobSpec {
    fn pop(&self, base: &Path) -> Result<Pop, CliError> {
        match (&self.input, &self.problem, &self.generator) {
            (Some(p), None, None) => read_pop_file(&base.join(p)),
            (None, Some(f), None) => f.to_pop(),
            (None, None, Some(g)) => g.generate().map_err(usage),
            _ => Err(usage("job needs exactly one of input, problem, generator")),
        }
    }

    fn options(&self) -> Result<RelaxOptions, CliError> {
        let sparse_order = match &self.sparse_order {
            None => SparseOrder::Fixed(1),
            Some(Value::Number(k)) => parse_sparse_order(&k.to_string()).map_err(usage)?,
            Some(Value::String(s)) => parse_sparse_order(s).map_err(usage)?,
            Some(other) => return Err(usage(format!("invalid sparse_order {other}"))),
        };
        let defaults = SolverConfig::default();
        let args = RelaxArgs {
            order: self.order,
            sparse_order: Some(sparse_order),
            basis: self.basis.unwrap_or_default(),
            form: self.form.unwrap_or_default(),
            gap_tol: self.gap_tol.unwrap_or(defaults.gap_tol),
            feas_tol: self.feas_tol.unwrap_or(defaults.feas_tol),
            max_iter: self.max_iter.unwrap_or(defaults.max_iter),
            verbose: false,
        };
        Ok(args.options(sparse_order))
    }
}

fn block_stats_json(stats: &[Vec<(usize, usize)>]) -> Value {
    stats
        .iter()
        .map(|t| t.iter().map(|&(size, count)| json!({"size": size, "count": count})).collect::<Vec<_>>())
        .collect::<Vec<_>>()
        .into()
}

fn form_str(form: Form) -> &'static str {
    match form {
        Form::Sos => "sos",
        Form::Moment => "moment",
    }
}

pub fn result_json(r: &RelaxationResult, wall_time_ms: f64) -> Value {
    let mut v = json!({
        "bound": r.bound,
        "status": r.status.as_str(),
        "k_used": r.k_used,
        "stabilized": r.stabilized,
        "block_stats": block_stats_json(&r.block_stats),
        "gap": r.gap,
        "wall_time_ms": wall_time_ms,
        "form": form_str(r.form),
        "order": r.d_hat,
        "iterations": r.iterations,
        "message": r.message,
    });
    if !r.params.is_empty() {
        v["params"] = json!(r.params);
    }
    v
}

fn table_string(table: &[(usize, usize)]) -> String {
    table
        .iter()
        .map(|(s, c)| format!("{s}×{c}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn result_text(r: &RelaxationResult, wall_time_ms: f64) -> String {
    let mut s = format!(
        "bound: {:.10e}\nstatus: {}\nk_used: {}\nstabilized: {}\n",
        r.bound, r.status, r.k_used, r.stabilized
    );
    for (j, t) in r.block_stats.iter().enumerate() {
        s += &format!("blocks[{j}]: {}\n", table_string(t));
    }
    s += &format!("gap: {:.3e}\nwall_time_ms: {wall_time_ms:.1}\n", r.gap);
    if !r.params.is_empty() {
        s += &format!("params: {:?}\n", r.params);
    }
    s
}

fn emit(out: &OutputArgs, json: &Value, text: String, stdout: &mut dyn Write) -> Result<(), CliError> {
    let body = match out.format {
        Format::Json => serde_json::to_string_pretty(json).map_err(usage)? + "\n",
        Format::Text => text,
    };
    write_body(out.output.as_deref(), &body, stdout)
}

fn write_body(path: Option<&Path>, body: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, body).map_err(|e| usage(format!("cannot write {}: {e}", p.display()))),
        None => stdout.write_all(body.as_bytes()).map_err(usage),
    }
}

fn solve_one(pop: &Pop, opts: &RelaxOptions) -> Result<(RelaxationResult, f64), CliError> {
    let start = Instant::now();
    let r = relax::solve_pop(pop, opts).map_err(usage)?;
    Ok((r, start.elapsed().as_secs_f64() * 1e3))
}

fn cmd_solve(input: &InputArgs, relax: &RelaxArgs, out: &OutputArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let pop = input.load()?;
    let opts = relax.options(SparseOrder::Fixed(1));
    let (r, ms) = solve_one(&pop, &opts)?;
    emit(out, &result_json(&r, ms), result_text(&r, ms), stdout)?;
    Ok(if r.status == SolveStatus::Optimal { EXIT_OK } else { EXIT_SOLVER })
}

fn run_job(job: &JobSpec, base: &Path) -> (Value, i32) {
    let outcome = job
        .pop(base)
        .and_then(|pop| Ok((pop, job.options()?)))
        .and_then(|(pop, opts)| solve_one(&pop, &opts));
    match outcome {
        Ok((r, ms)) => {
            let code = if r.status == SolveStatus::Optimal { EXIT_OK } else { EXIT_SOLVER };
            (result_json(&r, ms), code)
        }
        Err(e) => (json!({"error": e.to_string()}), e.exit_code()),
    }
}

fn cmd_batch(path: &Path, jobs: usize, out: &OutputArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let specs: Vec<JobSpec> =
        serde_json::from_str(&text).map_err(|e| usage(format!("invalid batch file {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let results: Mutex<Vec<Option<(Value, i32)>>> = Mutex::new(vec![None; specs.len()]);
    let next = AtomicUsize::new(0);
    let workers = jobs.clamp(1, specs.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= specs.len() {
                    break;
                }
                let r = run_job(&specs[i], &base);
                results.lock().expect("result lock")[i] = Some(r);
            });
        }
    });
    let results: Vec<(Value, i32)> = results
        .into_inner()
        .expect("result lock")
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect();
    let code = results.iter().map(|r| r.1).fold(EXIT_OK, |acc, c| match (acc, c) {
        (EXIT_USAGE, _) | (_, EXIT_USAGE) => EXIT_USAGE,
        (a, b) => a.max(b),
    });
    let values: Vec<Value> = results.into_iter().map(|r| r.0).collect();
    let text = values
        .iter()
        .enumerate()
        .map(|(i, v)| format!("job {i}: {v}\n"))
        .collect::<String>();
    emit(out, &Value::Array(values), text, stdout)?;
    Ok(code)
}

fn partition_json(basis: &MonomialBasis, p: &BlockPartition) -> Value {
    json!({
        "table": p.block_table().iter().map(|&(s, c)| json!({"size": s, "count": c})).collect::<Vec<_>>(),
        "blocks": p
            .blocks
            .iter()
            .map(|b| b.iter().map(|&i| basis.get(i).to_string()).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
    })
}

fn cmd_pattern(input: &InputArgs, relax: &RelaxArgs, out: &OutputArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let pop = input.load()?;
    let opts = relax.options(SparseOrder::Stabilize);
    let k_max = match opts.sparse_order {
        SparseOrder::Fixed(k) => k,
        SparseOrder::Stabilize => usize::MAX,
    };
    let mut steps = Vec::new();
    let mut text = String::new();
    let stabilized;
    if pop.is_plain() {
        let basis = unconstrained_basis(&pop.objective, opts.basis).map_err(usage)?;
        let run = tsp_iterate_unconstrained(&relax::sos_support(&pop.objective), &basis, k_max).map_err(usage)?;
        for s in &run.steps {
            text += &format!("k={}: {}\n", s.k, s.partition.table_string());
            steps.push(json!({"k": s.k, "partitions": [partition_json(&basis, &s.partition)]}));
        }
        stabilized = run.stabilized;
    } else {
        let d_hat = opts.order.unwrap_or_else(|| pop.minimum_order());
        let mut state = TspState::new(&pop.objective, &pop.constraints, d_hat).map_err(usage)?;
        state.add_initial_support(pop.params.iter().flat_map(|p| p.support()));
        loop {
            let next = state.step();
            if next.stabilized || next.k > k_max {
                stabilized = next.stabilized;
                break;
            }
            let tables: Vec<String> = next.partitions.iter().map(|p| p.table_string()).collect();
            text += &format!("k={}: {}\n", next.k, tables.join(" | "));
            steps.push(json!({
                "k": next.k,
                "partitions": next
                    .partitions
                    .iter()
                    .zip(&next.bases)
                    .map(|(p, b)| partition_json(b, p))
                    .collect::<Vec<_>>(),
            }));
            state = next;
        }
    }
    text += &format!("stabilized: {stabilized}\n");
    let v = json!({"steps": steps, "stabilized": stabilized});
    emit(out, &v, text, stdout)?;
    Ok(EXIT_OK)
}

fn cmd_signsym(input: &InputArgs, relax: &RelaxArgs, out: &OutputArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let pop = input.load()?;
    let mut support = pop.objective.support();
    for g in pop.constraints.iter().chain(&pop.params) {
        support.extend(g.support());
    }
    let r = sign_symmetries(&support, pop.n);
    let basis = if pop.is_plain() {
        unconstrained_basis(&pop.objective, relax.options(SparseOrder::Fixed(1)).basis).map_err(usage)?
    } else {
        let d_hat = relax.order.unwrap_or_else(|| pop.minimum_order());
        standard_basis(pop.n, d_hat).map_err(usage)?
    };
    let part = signsym_partition(&basis, &r);
    let vectors: Vec<String> = r
        .vectors
        .iter()
        .map(|v| v.bits().iter().map(|&b| if b { '1' } else { '0' }).collect())
        .collect();
    let mut text = format!("rank: {}\n", vectors.len());
    for v in &vectors {
        text += &format!("r: {v}\n");
    }
    for b in &part.blocks {
        let names: Vec<String> = b.iter().map(|&i| basis.get(i).to_string()).collect();
        text += &format!("block: {{{}}}\n", names.join(", "));
    }
    let v = json!({
        "rank": vectors.len(),
        "vectors": vectors,
        "partition": partition_json(&basis, &part),
    });
    emit(out, &v, text, stdout)?;
    Ok(EXIT_OK)
}

fn cmd_export(input: &InputArgs, relax: &RelaxArgs, output: Option<&Path>, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let pop = input.load()?;
    let problem = build_problem(&pop, &relax.options(SparseOrder::Fixed(1))).map_err(usage)?;
    write_body(output, &write_sdpa(&problem), stdout)?;
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn cmd_generate(
    family: Family,
    n: usize,
    two_d: u32,
    t: usize,
    p: f64,
    s: Option<usize>,
    g: f64,
    seed: u64,
    output: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<i32, CliError> {
    let spec = match family {
        Family::Randpoly1 => GeneratorSpec::Randpoly1 { n, two_d, t, p, seed },
        Family::Randpoly2 => GeneratorSpec::Randpoly2 {
            n,
            two_d,
            s: s.ok_or_else(|| usage("randpoly2 requires --s"))?,
            seed,
        },
        Family::Broyden => GeneratorSpec::Broyden { n },
        Family::Network1 => GeneratorSpec::Network1 { n, seed },
        Family::Network2 => GeneratorSpec::Network2 { n, g, seed },
    };
    let pop = spec.generate().map_err(usage)?;
    let body = serde_json::to_string_pretty(&PopFile::from_pop(&pop)).map_err(usage)? + "\n";
    write_body(output, &body, stdout)?;
    Ok(EXIT_OK)
}

fn cmd_certify(
    input: &InputArgs,
    relax: &RelaxArgs,
    out: &OutputArgs,
    tol: f64,
    stdout: &mut dyn Write,
) -> Result<i32, CliError> {
    let pop = input.load()?;
    let opts = relax.options(SparseOrder::Fixed(1));
    let (r, ms) = solve_one(&pop, &opts)?;
    let cert = extract_certificate(&r, &pop).map_err(|e| CliError::Solver(e.to_string()))?;
    let report = verify_certificate(&cert, &pop, r.bound, tol).map_err(|e| CliError::Solver(e.to_string()))?;
    let mut support = pop.objective.support();
    for g in pop.constraints.iter().chain(&pop.params) {
        support.extend(g.support());
    }
    let support_ok = certificate_support_ok(&cert, &sign_symmetries(&support, pop.n));
    let v = json!({
        "bound": r.bound,
        "status": r.status.as_str(),
        "max_residual": report.max_residual,
        "min_eigenvalue": report.min_eigenvalue,
        "support_ok": support_ok,
        "passed": report.passed,
        "tol": tol,
        "wall_time_ms": ms,
    });
    let text = format!(
        "bound: {:.10e}\nmax_residual: {:.3e}\nmin_eigenvalue: {:.3e}\nsupport_ok: {support_ok}\npassed: {}\n",
        r.bound, report.max_residual, report.min_eigenvalue, report.passed
    );
    emit(out, &v, text, stdout)?;
    Ok(if report.passed { EXIT_OK } else { EXIT_VERIFY })
}

pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<i32, CliError> {
    match &cli.command {
        Command::Solve {
            input,
            relax,
            out,
            batch,
            jobs,
        } => match batch {
            Some(path) => cmd_batch(path, *jobs, out, stdout),
            None => cmd_solve(input, relax, out, stdout),
        },
        Command::Pattern { input, relax, out } => cmd_pattern(input, relax, out, stdout),
        Command::Signsym { input, relax, out } => cmd_signsym(input, relax, out, stdout),
        Command::Export { input, relax, output } => cmd_export(input, relax, output.as_deref(), stdout),
        Command::Generate {
            family,
            n,
            two_d,
            t,
            p,
            s,
            g,
            seed,
            output,
        } => cmd_generate(*family, *n, *two_d, *t, *p, *s, *g, *seed, output.as_deref(), stdout),
        Command::Certify {
            input,
            relax,
            out,
            tol,
        } => cmd_certify(input, relax, out, *tol, stdout),
    }
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run_cli<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    // clap's rendering already starts with "error:".
                    let _ = write!(stderr, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(&cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
