use std::fs;
use std::io::Write;
use std::process::ExitCode;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde_json::{json, Value};
use thiserror::Error;

use unicrit::audit::{run_claim, AuditReport, Claim, ClaimParams, ProgressEvent, RunOptions};
use unicrit::certify::{
    local_global_family, pick_universal_prefix, proportion_by_enumeration, proportion_closed_form,
    verify_word_irreducible, CaseTag, CertifyError, ProportionStats, VerifyOutcome,
};
use unicrit::classify::{classify_type, classify_type_rational};
use unicrit::modp::{local_global_scan, ScanReport};
use unicrit::report::{digest, sorted, SCHEMA_VERSION};
use unicrit::semigroup::{count_words, parse_rational, GeneratorSet, Word};

/// Irreducibility certificates for compositions of x^p + c.
#[derive(Debug, Parser)]
#[command(name = "unicrit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Worker threads for scans and audits (default: logical CPUs).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Print large integers in full instead of a digest.
    #[arg(long, global = true)]
    full: bool,

    /// Refuse orbit values larger than this many bits.
    #[arg(long, global = true)]
    bit_guard: Option<u64>,

    /// Omit wall-clock timings so repeated runs are byte-identical.
    #[arg(long, global = true)]
    no_timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Irreducibility and Type I / Type II witnesses of x^p + c.
    Classify {
        #[arg(long)]
        p: u32,
        /// Integer or rational such as -12 or -29/16.
        #[arg(long, allow_hyphen_values = true)]
        c: String,
    },
    /// Universal certified prefix for a generator set.
    Certify {
        #[command(flatten)]
        set: SetArg,
    },
    /// Per-word check of prefix ∘ word.
    Verify {
        #[command(flatten)]
        set: SetArg,
        #[arg(long)]
        prefix: String,
        #[arg(long)]
        word: String,
        /// Assert the prefix as this case instead of deriving it.
        #[arg(long)]
        case: Option<String>,
    },
    /// Reducibility of a word modulo every prime up to --qmax.
    Modscan {
        /// Local-global family "p,t".
        #[arg(long, conflicts_with_all = ["set", "word"])]
        family: Option<String>,
        /// Extra generators appended to the family.
        #[arg(long, allow_hyphen_values = true, requires = "family")]
        extra: Vec<String>,
        #[arg(long, requires = "word")]
        set: Option<String>,
        #[arg(long, requires = "set")]
        word: Option<String>,
        #[arg(long, default_value_t = 1000)]
        qmax: u64,
    },
    /// Words up to --maxlen and the share extending the certified prefix.
    Enumerate {
        #[command(flatten)]
        set: SetArg,
        #[arg(long)]
        maxlen: usize,
        /// Report proportions instead of listing words.
        #[arg(long)]
        stats: bool,
    },
    /// Bounded computational audit of one claim.
    Audit {
        /// One of mod24, squares, refinement, pth, diophantine, curves,
        /// quartic, witness-bound, coincidence.
        #[arg(long)]
        claim: String,
        #[arg(long, default_value_t = 60)]
        range: i64,
        #[arg(long, default_value_t = 3)]
        p: u32,
        /// Curve id for the curves claim; all curves when omitted.
        #[arg(long)]
        curve: Option<String>,
        #[arg(long, default_value_t = 10_000)]
        chunk_size: u64,
        #[arg(long, default_value_t = 0)]
        resume_from: usize,
        /// Suppress progress on stderr.
        #[arg(long)]
        quiet: bool,
    },
    /// Coefficients of the composition named by a word.
    Expand {
        #[command(flatten)]
        set: SetArg,
        #[arg(long)]
        word: String,
        /// Largest degree to expand.
        #[arg(long, default_value_t = 4096)]
        cap: u64,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Classify { .. } => "classify",
            Command::Certify { .. } => "certify",
            Command::Verify { .. } => "verify",
            Command::Modscan { .. } => "modscan",
            Command::Enumerate { .. } => "enumerate",
            Command::Audit { .. } => "audit",
            Command::Expand { .. } => "expand",
        }
    }
}

#[derive(Debug, Args)]
struct SetArg {
    /// Generator set as inline JSON {"p":2,"c":["-12","-4"]} or a path to
    /// such a file.
    #[arg(long = "set")]
    set: String,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("{0}")]
    OpenCase(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::OpenCase(_) => 3,
        }
    }
}

fn invalid(e: impl ToString) -> CliError {
    CliError::Invalid(e.to_string())
}

/// A finished command: the report and whether it counts as success.
struct Output {
    value: Value,
    ok: bool,
    csv: Option<String>,
    text: Option<String>,
}

impl Output {
    fn new(value: Value, ok: bool) -> Self {
        Output { value, ok, csv: None, text: None }
    }
}

struct Ctx {
    full: bool,
    bit_guard: Option<u64>,
    timing: bool,
}

impl Ctx {
    fn set(&self, arg: &SetArg) -> Result<GeneratorSet, CliError> {
        let src = arg.set.trim();
        let text = if src.starts_with('{') {
            src.to_string()
        } else {
            fs::read_to_string(src).map_err(|e| invalid(format!("cannot read {src}: {e}")))?
        };
        let set: GeneratorSet = serde_json::from_str(&text).map_err(invalid)?;
        Ok(match self.bit_guard {
            Some(bits) => set.with_bit_guard(bits),
            None => set,
        })
    }
}

fn word(s: &str) -> Result<Word, CliError> {
    Word::from_str(s).map_err(invalid)
}

fn certify_error(e: CertifyError) -> Result<Output, CliError> {
    match e {
        CertifyError::OpenCase { .. } => Err(CliError::OpenCase(e.to_string())),
        CertifyError::NoIrreducibleGenerator | CertifyError::InternalContradiction(_) => {
            Ok(Output::new(json!({ "error": e.to_string() }), false))
        }
        other => Err(invalid(other)),
    }
}

fn classify(ctx: &Ctx, p: u32, c: &str) -> Result<Output, CliError> {
    if p < 2 || !unicrit::arith::is_prime_u64(u64::from(p)) {
        return Err(invalid(format!("p must be prime, got {p}")));
    }
    let c = parse_rational(c).map_err(invalid)?;
    let value = if c.is_integer() {
        classify_type(p, c.numer()).to_json(ctx.full)
    } else {
        classify_type_rational(p, &c).to_json()
    };
    Ok(Output::new(value, true))
}

fn certify(ctx: &Ctx, set: &SetArg) -> Result<Output, CliError> {
    let set = ctx.set(set)?;
    match pick_universal_prefix(&set) {
        Ok(cert) => Ok(Output::new(cert.to_json(ctx.full), true)),
        Err(e) => certify_error(e),
    }
}

fn verify(ctx: &Ctx, set: &SetArg, prefix: &str, w: &str, case: Option<&str>) -> Result<Output, CliError> {
    let set = ctx.set(set)?;
    let case = case.map(CaseTag::from_str).transpose().map_err(invalid)?;
    match verify_word_irreducible(&set, &word(prefix)?, &word(w)?, case) {
        Ok(out) => {
            let ok = matches!(out, VerifyOutcome::Certified(_));
            Ok(Output::new(out.to_json(ctx.full), ok))
        }
        Err(e) => certify_error(e),
    }
}

fn parse_int(s: &str) -> Result<BigInt, CliError> {
    BigInt::from_str(s.trim()).map_err(|_| invalid(format!("not an integer: {s:?}")))
}

fn modscan(
    ctx: &Ctx,
    family: Option<&str>,
    extra: &[String],
    set: Option<&str>,
    w: Option<&str>,
    qmax: u64,
) -> Result<Output, CliError> {
    let report: ScanReport = match (family, set, w) {
        (Some(fam), _, _) => {
            let (p, t) = fam
                .split_once(',')
                .ok_or_else(|| invalid(format!("--family expects p,t, got {fam:?}")))?;
            let p: u32 = p.trim().parse().map_err(|_| invalid(format!("bad p in {fam:?}")))?;
            let t = parse_int(t)?;
            let extras = extra.iter().map(|c| parse_int(c)).collect::<Result<Vec<_>, _>>()?;
            let cert = match local_global_family(p, &t, &extras) {
                Ok(c) => c,
                Err(e) => return certify_error(e),
            };
            local_global_scan(&cert.generators, &cert.prefix, qmax, Some(t))
        }
        (None, Some(s), Some(w)) => {
            let set = ctx.set(&SetArg { set: s.to_string() })?;
            let w = word(w)?;
            set.check_word(&w).map_err(invalid)?;
            if w.is_empty() {
                return Err(invalid("word must be nonempty"));
            }
            local_global_scan(&set, &w, qmax, None)
        }
        _ => return Err(invalid("give either --family or both --set and --word")),
    };
    // A family scan succeeds when every reduction is reducible.
    let ok = family.is_none() || report.all_reducible;
    let mut out = Output::new(report.to_json(ctx.full), ok);
    out.csv = Some(report.to_csv());
    out.text = Some(format!(
        "word {} over p = {}: {} primes up to {}, irreducible mod {:?}, all_reducible = {}",
        report.word,
        report.p,
        report.entries.len(),
        report.q_max,
        report.entries.iter().filter(|e| e.irreducible).map(|e| e.q).collect::<Vec<_>>(),
        report.all_reducible
    ));
    Ok(out)
}

/// Largest word count walked explicitly; beyond it only the closed form is used.
const ENUMERATION_LIMIT: u128 = 4_000_000;
const LISTING_LIMIT: u128 = 100_000;

fn stats_csv(s: &ProportionStats) -> String {
    let mut out = String::from("length,certified,total\n");
    for (n, c, t) in &s.per_length {
        out.push_str(&format!("{n},{c},{t}\n"));
    }
    out
}

fn enumerate(ctx: &Ctx, set: &SetArg, maxlen: usize, stats: bool) -> Result<Output, CliError> {
    let set = ctx.set(set)?;
    if maxlen == 0 {
        return Err(invalid("--maxlen must be at least 1"));
    }
    let cert = match pick_universal_prefix(&set) {
        Ok(c) => c,
        Err(e) => return certify_error(e),
    };
    let total = count_words(set.r(), maxlen);
    if !stats {
        if total.is_none_or(|n| n > LISTING_LIMIT) {
            return Err(invalid(format!("more than {LISTING_LIMIT} words; use --stats")));
        }
        let words: Vec<Value> = set
            .words(maxlen)
            .map(|w| json!({ "word": w.to_string(), "extends_prefix": w.starts_with(&cert.prefix) }))
            .collect();
        let value = json!({ "prefix": cert.prefix.to_string(), "case": cert.case.name(), "words": words });
        return Ok(Output::new(value, true));
    }
    if set.r() > 1 && (set.r() as f64).powi(maxlen as i32) > 1e30 {
        return Err(invalid("--maxlen too large for exact counts"));
    }
    let closed = proportion_closed_form(set.r(), cert.prefix.len(), maxlen);
    let (method, agree) = match total {
        Some(n) if n <= ENUMERATION_LIMIT => {
            let walked = proportion_by_enumeration(&set, &cert.prefix, maxlen);
            ("enumeration+closed_form", walked == closed)
        }
        _ => ("closed_form", true),
    };
    // Every length n >= |prefix| has exactly the fraction r^-|prefix|.
    let bound_holds = closed
        .per_length
        .iter()
        .filter(|(n, _, _)| *n >= cert.prefix.len())
        .all(|&(_, c, t)| c * (set.r() as u128).pow(cert.prefix.len() as u32) == t);
    let mut value = closed.to_json();
    value["prefix"] = json!(cert.prefix.to_string());
    value["case"] = json!(cert.case.name());
    value["method"] = json!(method);
    value["routes_agree"] = json!(agree);
    value["per_length_meets_bound"] = json!(bound_holds);
    let mut out = Output::new(value, agree && bound_holds);
    out.csv = Some(stats_csv(&closed));
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn audit(
    ctx: &Ctx,
    claim: &str,
    range: i64,
    p: u32,
    curve: Option<String>,
    chunk_size: u64,
    resume_from: usize,
    quiet: bool,
) -> Result<Output, CliError> {
    let claim = Claim::from_str(claim).map_err(invalid)?;
    if chunk_size == 0 {
        return Err(invalid("--chunk-size must be positive"));
    }
    let mut opts = RunOptions { chunk_size, resume_from, progress: None };
    if !quiet {
        let last = Arc::new(AtomicUsize::new(usize::MAX));
        opts.progress = Some(Arc::new(move |ev: ProgressEvent| {
            let step = (ev.done * 10).checked_div(ev.total).unwrap_or(10);
            if last.swap(step, Ordering::Relaxed) != step {
                eprintln!("{claim}: {}/{} chunks", ev.done, ev.total);
            }
        }));
    }
    let params = ClaimParams { range, p, curve };
    let report: AuditReport = run_claim(claim, &params, &opts).map_err(invalid)?;
    let mut out = Output::new(report.to_json(ctx.full, ctx.timing), report.pass());
    let mut csv = String::from("claim,what,rechecked,values\n");
    for v in &report.violations {
        let vals: Vec<String> = v.values.iter().map(|(k, x)| format!("{k}={}", digest(x, ctx.full))).collect();
        csv.push_str(&format!("{},\"{}\",{},\"{}\"\n", report.claim, v.what, v.rechecked, vals.join(" ")));
    }
    out.csv = Some(csv);
    out.text = Some(report.to_string());
    Ok(out)
}

fn expand(ctx: &Ctx, set: &SetArg, w: &str, cap: u64) -> Result<Output, CliError> {
    let set = ctx.set(set)?;
    let w = word(w)?;
    let f = set.expand_word(&w, cap).map_err(invalid)?;
    let value = json!({
        "word": w.to_string(),
        "degree": f.degree(),
        "coeffs": f.coeffs().iter().map(|c| digest(c, ctx.full)).collect::<Vec<_>>(),
    });
    let mut out = Output::new(value, true);
    out.text = Some(f.to_string());
    Ok(out)
}

/// `key.sub[0] = value` lines for formats without a dedicated renderer.
fn flatten(prefix: &str, v: &Value, out: &mut Vec<String>) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, out);
            }
        }
        Value::String(s) => out.push(format!("{prefix} = {s}")),
        other => out.push(format!("{prefix} = {other}")),
    }
}

fn config(cli: &Cli) -> Value {
    let args: Vec<String> = std::env::args().skip(1).collect();
    json!({
        "command": cli.command.name(),
        "args": args,
    })
}

fn dispatch(cli: &Cli, ctx: &Ctx) -> Result<Output, CliError> {
    match &cli.command {
        Command::Classify { p, c } => classify(ctx, *p, c),
        Command::Certify { set } => certify(ctx, set),
        Command::Verify { set, prefix, word, case } => verify(ctx, set, prefix, word, case.as_deref()),
        Command::Modscan { family, extra, set, word, qmax } => {
            modscan(ctx, family.as_deref(), extra, set.as_deref(), word.as_deref(), *qmax)
        }
        Command::Enumerate { set, maxlen, stats } => enumerate(ctx, set, *maxlen, *stats),
        Command::Audit { claim, range, p, curve, chunk_size, resume_from, quiet } => {
            audit(ctx, claim, *range, *p, curve.clone(), *chunk_size, *resume_from, *quiet)
        }
        Command::Expand { set, word, cap } => expand(ctx, set, word, *cap),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if n == 0 {
            eprintln!("error: invalid input: --jobs must be positive");
            return ExitCode::from(2);
        }
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let ctx = Ctx { full: cli.full, bit_guard: cli.bit_guard, timing: !cli.no_timing };
    let out = match dispatch(&cli, &ctx) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.code());
        }
    };
    let rendered = match cli.format {
        Format::Json => {
            let doc = json!({
                "schema_version": SCHEMA_VERSION,
                "config": config(&cli),
                "result": out.value,
            });
            serde_json::to_string_pretty(&sorted(doc)).expect("serializable")
        }
        Format::Csv => match out.csv {
            Some(csv) => csv.trim_end().to_string(),
            None => {
                eprintln!("error: invalid input: csv output is available for modscan, enumerate --stats and audit");
                return ExitCode::from(2);
            }
        },
        Format::Text => out.text.unwrap_or_else(|| {
            let mut lines = Vec::new();
            flatten("", &sorted(out.value), &mut lines);
            lines.join("\n")
        }),
    };
    // A closed pipe (e.g. `| head`) is not an error worth reporting.
    let _ = writeln!(std::io::stdout().lock(), "{rendered}");
    ExitCode::from(if out.ok { 0 } else { 1 })
}
