//! Command-line front end and the verification campaign runner.
//!
//! Every subcommand writes one JSON document (or DOT text) to standard output
//! and diagnostics to standard error. Exit codes: 0 success, 1 verification
//! failure, 2 usage, 3 shapes do not fit the box, 4 empty product.

use std::collections::BTreeSet;
use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::error::Error;
use crate::grothendieck::{buch_product, expansion_order, lr_product, oracle_product};
use crate::involutions::{build_matching, verify_matching, Matching, MatchingReport};
use crate::partition::{partitions_up_to, AmbientBox, Partition};
use crate::poset::{build_poset, check_main_theorem, mobius};
use crate::richardson::{
    basic_demolition, is_k_multiplicity_free, is_multiplicity_free, Demolition, RichardsonQuadruple,
    StembridgeCase,
};
use crate::svt::enumerate_buch_tableaux;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_EMPTY: i32 = 4;

/// Worker count override for `verify`.
pub const WORKERS_ENV: &str = "KGRASS_WORKERS";

#[derive(Parser, Debug)]
#[command(name = "kgrass", version, about = "K-theoretic Littlewood-Richardson coefficients on Grassmannians")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Expand g_lambda * g_mu in the Grothendieck basis.
    Expand {
        #[command(flatten)]
        shapes: Shapes,
        /// Keep only the degree-preserving (Littlewood-Richardson) part.
        #[arg(long)]
        cohomology: bool,
    },
    /// Content poset of the product, optionally with Möbius values.
    Poset {
        #[command(flatten)]
        shapes: Shapes,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        mobius: bool,
    },
    /// Stembridge case, multiplicity-freeness and the basic demolition.
    Classify {
        #[command(flatten)]
        shapes: Shapes,
    },
    /// Demolition transcript down to the basic quadruple.
    Demolish {
        #[command(flatten)]
        shapes: Shapes,
    },
    /// Run the verification campaign over a range of instances.
    Verify(CampaignArgs),
    /// Compare the tableau rule with polynomial arithmetic.
    Oracle {
        #[command(flatten)]
        shapes: Shapes,
    },
}

#[derive(Args, Debug)]
struct Shapes {
    /// Comma-separated parts; `-` is the empty partition.
    #[arg(long, allow_hyphen_values = true)]
    lambda: String,
    #[arg(long, allow_hyphen_values = true)]
    mu: String,
    /// Ambient box `RxC`; defaults to the smallest box holding every term.
    #[arg(long = "box")]
    bx: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Dot,
}

#[derive(Args, Debug)]
struct CampaignArgs {
    /// Largest |lambda| and |mu|.
    #[arg(long, default_value_t = 4)]
    max_size: u32,
    /// Largest box `RxC`; every box inside it is visited.
    #[arg(long = "box", default_value = "4x4")]
    bx: String,
    /// Comma-separated Stembridge case tags to keep, e.g. `1,3d`.
    #[arg(long)]
    cases: Option<String>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Skip the polynomial cross-check.
    #[arg(long)]
    no_oracle: bool,
    /// Also write the report to this file.
    #[arg(long)]
    report: Option<std::path::PathBuf>,
    /// Replace the matching of one instance `lambda;mu;RxC` by a wrong one.
    #[arg(long, hide = true)]
    inject_fault: Option<String>,
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::DoesNotFit(..) | Error::InvalidBox { .. } => EXIT_DOMAIN,
            Error::EmptyProduct => EXIT_EMPTY,
            Error::NotAPartition(_) | Error::Parse(_) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        };
        let message = match e {
            Error::EmptyProduct => "empty product".to_string(),
            e => e.to_string(),
        };
        Failure { code, message }
    }
}

type Outcome = std::result::Result<(String, i32), Failure>;

/// Parses `args` (program name first), runs the subcommand and returns the
/// exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                let _ = out.write_all(text.as_bytes());
            } else {
                let _ = err.write_all(text.as_bytes());
            }
            return code;
        }
    };
    let result = match cli.command {
        Command::Expand { shapes, cohomology } => expand(&shapes, cohomology),
        Command::Poset { shapes, format, mobius } => poset(&shapes, format, mobius),
        Command::Classify { shapes } => classify(&shapes),
        Command::Demolish { shapes } => demolish(&shapes),
        Command::Verify(args) => verify(&args),
        Command::Oracle { shapes } => oracle(&shapes),
    };
    match result {
        Ok((text, code)) => {
            let _ = out.write_all(text.as_bytes());
            if !text.ends_with('\n') {
                let _ = out.write_all(b"\n");
            }
            code
        }
        Err(f) => {
            let _ = writeln!(err, "kgrass: {}", f.message);
            f.code
        }
    }
}

fn parse_partition(s: &str) -> std::result::Result<Partition, Failure> {
    s.parse::<Partition>().map_err(|e| Failure {
        code: EXIT_USAGE,
        message: e.to_string(),
    })
}

fn parse_box(s: &str) -> std::result::Result<AmbientBox, Failure> {
    s.parse::<AmbientBox>().map_err(|e| Failure {
        code: EXIT_USAGE,
        message: e.to_string(),
    })
}

fn quadruple(s: &Shapes) -> std::result::Result<RichardsonQuadruple, Failure> {
    let lambda = parse_partition(&s.lambda)?;
    let mu = parse_partition(&s.mu)?;
    let bx = match &s.bx {
        Some(b) => parse_box(b)?,
        None => AmbientBox::unbounded_for(&lambda, &mu),
    };
    Ok(RichardsonQuadruple::new(lambda, mu, bx)?)
}

#[derive(Serialize)]
struct Term<'a, C> {
    nu: &'a Partition,
    coeff: C,
}

#[derive(Serialize)]
struct Terms<'a, C> {
    terms: Vec<Term<'a, C>>,
}

fn sorted_terms<C: Copy>(coeffs: &std::collections::BTreeMap<Partition, C>) -> Vec<Term<'_, C>> {
    let mut terms: Vec<_> = coeffs.iter().map(|(nu, &coeff)| Term { nu, coeff }).collect();
    terms.sort_by(|a, b| expansion_order(a.nu, b.nu));
    terms
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("serializable")
}

fn expand(s: &Shapes, cohomology: bool) -> Outcome {
    let q = quadruple(s)?;
    if !cohomology {
        return Ok((buch_product(&q.lambda, &q.mu, q.bx).to_json(), EXIT_OK));
    }
    let lr = lr_product(&q.lambda, &q.mu, q.bx);
    Ok((to_json(&Terms { terms: sorted_terms(&lr) }), EXIT_OK))
}

fn poset(s: &Shapes, format: Format, with_mobius: bool) -> Outcome {
    let q = quadruple(s)?;
    let p = build_poset(&q.lambda, &q.mu, q.bx)?;
    let m = with_mobius.then(|| mobius(&p));
    let text = match format {
        Format::Json => p.to_json(m.as_ref()),
        Format::Dot => p.to_dot(m.as_ref()),
    };
    Ok((text, EXIT_OK))
}

fn classify(s: &Shapes) -> Outcome {
    let q = quadruple(s)?;
    let h = is_multiplicity_free(&q);
    let transcript = match basic_demolition(&q) {
        Demolition::ZeroProduct => serde_json::Value::Null,
        Demolition::Basic(b, t) => {
            let mut v = t.to_json();
            v["basic"] = json!(b);
            v
        }
    };
    let v = json!({
        "quadruple": q,
        "stembridgeCase": h.evidence.stembridge_case(),
        "hMultiplicityFree": h.verdict,
        "kMultiplicityFree": is_k_multiplicity_free(&q),
        "evidence": h.evidence,
        "basicDemolition": transcript,
    });
    Ok((to_json(&v), EXIT_OK))
}

fn demolish(s: &Shapes) -> Outcome {
    let q = quadruple(s)?;
    let v = match basic_demolition(&q) {
        Demolition::ZeroProduct => json!({ "quadruple": q, "zeroProduct": true, "steps": [] }),
        Demolition::Basic(b, t) => {
            let mut v = t.to_json();
            v["quadruple"] = json!(q);
            v["zeroProduct"] = json!(false);
            v["basic"] = json!(b);
            v
        }
    };
    Ok((to_json(&v), EXIT_OK))
}

fn oracle(s: &Shapes) -> Outcome {
    #[derive(Serialize)]
    struct Report<'a> {
        quadruple: &'a RichardsonQuadruple,
        tableau: Vec<Term<'a, i64>>,
        polynomial: Vec<Term<'a, i64>>,
        agree: bool,
    }
    let q = quadruple(s)?;
    let tableau = buch_product(&q.lambda, &q.mu, q.bx);
    let poly = oracle_product(&q.lambda, &q.mu, q.bx)?;
    let agree = tableau.coeffs == poly;
    let report = Report {
        quadruple: &q,
        tableau: sorted_terms(&tableau.coeffs),
        polynomial: sorted_terms(&poly),
        agree,
    };
    Ok((to_json(&report), if agree { EXIT_OK } else { EXIT_FAILURE }))
}

/// Instance range of a campaign.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CampaignSpec {
    pub max_partition_size: u32,
    pub box_limits: AmbientBox,
    /// Keep only instances whose basic quadruple is in one of these cases.
    pub case_filter: Option<BTreeSet<StembridgeCase>>,
    #[serde(skip)]
    pub parallelism: usize,
    pub oracle: bool,
    /// Test hook: this instance gets an empty matching.
    #[serde(skip)]
    pub fault: Option<RichardsonQuadruple>,
}

impl CampaignSpec {
    pub fn new(max_partition_size: u32, box_limits: AmbientBox) -> Self {
        CampaignSpec {
            max_partition_size,
            box_limits,
            case_filter: None,
            parallelism: 1,
            oracle: true,
            fault: None,
        }
    }

    /// Every nonzero multiplicity-free quadruple in range, in a fixed order.
    pub fn instances(&self) -> Vec<RichardsonQuadruple> {
        let mut out = Vec::new();
        for rows in 1..=self.box_limits.rows {
            for cols in 1..=self.box_limits.cols {
                let bx = AmbientBox::new(rows, cols).expect("positive sides");
                let shapes = partitions_up_to(self.max_partition_size, bx);
                for l in &shapes {
                    for m in &shapes {
                        let q = RichardsonQuadruple::new(l.clone(), m.clone(), bx).expect("shapes fit");
                        if q.is_zero_product() {
                            continue;
                        }
                        let v = is_multiplicity_free(&q);
                        if !v.verdict {
                            continue;
                        }
                        if let Some(filter) = &self.case_filter {
                            match v.evidence.stembridge_case() {
                                Some(c) if filter.contains(&c) => {}
                                _ => continue,
                            }
                        }
                        out.push(q);
                    }
                }
            }
        }
        out
    }
}

/// Outcome of one campaign instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct InstanceFailure {
    pub instance: String,
    pub problems: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CampaignReport {
    pub spec: CampaignSpec,
    pub instances: usize,
    pub tableaux: usize,
    pub failures: Vec<InstanceFailure>,
    pub pass: bool,
}

/// Checks one instance: matching, Möbius theorem and (optionally) the
/// polynomial oracle. Returns the number of fillings and any problems.
pub fn check_instance(q: &RichardsonQuadruple, oracle: bool, fault: bool) -> (usize, Vec<String>) {
    let (l, m, bx) = (&q.lambda, &q.mu, q.bx);
    let all = enumerate_buch_tableaux(l, m, bx);
    let mut problems = Vec::new();
    let matching = if fault {
        Ok(Matching { fixed: all.clone(), pairs: Vec::new(), route: Vec::new() })
    } else {
        build_matching(l, m, bx)
    };
    match matching {
        Ok(matching) => {
            let rep = verify_matching(&matching, l, m, bx, &all);
            if !rep.all_pass() {
                problems.push(format!("matching: {}", describe(&rep)));
            }
        }
        Err(e) => problems.push(format!("matching: {e}")),
    }
    match check_main_theorem(l, m, bx) {
        Ok(r) if r.verdict() => {}
        Ok(r) => {
            let bad: Vec<String> = r
                .vertices
                .iter()
                .filter(|v| !v.pass)
                .map(|v| format!("{} mobius {} coefficient {}", v.nu, v.mobius, v.coefficient))
                .collect();
            problems.push(format!("mobius: {}", bad.join("; ")));
        }
        Err(e) => problems.push(format!("mobius: {e}")),
    }
    if oracle {
        match oracle_product(l, m, bx) {
            Ok(poly) if poly == buch_product(l, m, bx).coeffs => {}
            Ok(_) => problems.push("oracle: coefficients differ".to_string()),
            Err(e) => problems.push(format!("oracle: {e}")),
        }
    }
    (all.len(), problems)
}

fn describe(rep: &MatchingReport) -> String {
    let mut s = Vec::new();
    for (ok, name) in [
        (rep.covered, "not a partition of the fillings"),
        (rep.sign_reversing, "a pair does not differ in size by one"),
        (rep.involutive, "not an involution"),
        (rep.unique_fixed_point, "fixed points are not unique"),
        (rep.fixed_is_lex_min, "fixed point is not the lex-min tableau"),
        (rep.mobius_agrees, "Möbius values disagree"),
    ] {
        if !ok {
            s.push(name.to_string());
        }
    }
    s.extend(rep.problems.iter().cloned());
    s.join(", ")
}

/// Runs the campaign on a pool of `spec.parallelism` workers. The report
/// does not depend on the pool size.
pub fn run_campaign(spec: &CampaignSpec) -> CampaignReport {
    let instances = spec.instances();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.parallelism.max(1))
        .build()
        .expect("thread pool");
    let results: Vec<(usize, Vec<String>)> = pool.install(|| {
        instances
            .par_iter()
            .map(|q| check_instance(q, spec.oracle, spec.fault.as_ref() == Some(q)))
            .collect()
    });
    let tableaux = results.iter().map(|r| r.0).sum();
    let failures: Vec<InstanceFailure> = instances
        .iter()
        .zip(results)
        .filter(|(_, r)| !r.1.is_empty())
        .map(|(q, r)| InstanceFailure {
            instance: q.to_string(),
            problems: r.1,
        })
        .collect();
    CampaignReport {
        spec: spec.clone(),
        instances: instances.len(),
        tableaux,
        pass: failures.is_empty(),
        failures,
    }
}

fn parse_cases(s: &str) -> std::result::Result<BTreeSet<StembridgeCase>, Failure> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            StembridgeCase::from_tag(t.trim()).ok_or_else(|| Failure {
                code: EXIT_USAGE,
                message: format!("unknown case tag {t:?}"),
            })
        })
        .collect()
}

fn parse_instance(s: &str) -> std::result::Result<RichardsonQuadruple, Failure> {
    let parts: Vec<&str> = s.split(';').collect();
    let [l, m, b] = parts[..] else {
        return Err(Failure {
            code: EXIT_USAGE,
            message: format!("instance {s:?} is not of the form lambda;mu;RxC"),
        });
    };
    Ok(RichardsonQuadruple::new(parse_partition(l)?, parse_partition(m)?, parse_box(b)?)?)
}

fn workers(flag: usize) -> std::result::Result<usize, Failure> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v.trim().parse::<usize>().ok().filter(|&n| n > 0).ok_or_else(|| Failure {
            code: EXIT_USAGE,
            message: format!("{WORKERS_ENV}={v:?} is not a positive integer"),
        }),
        Err(_) if flag == 0 => Err(Failure {
            code: EXIT_USAGE,
            message: "--workers must be positive".to_string(),
        }),
        Err(_) => Ok(flag),
    }
}

fn verify(a: &CampaignArgs) -> Outcome {
    let mut spec = CampaignSpec::new(a.max_size, parse_box(&a.bx)?);
    spec.case_filter = a.cases.as_deref().map(parse_cases).transpose()?;
    spec.parallelism = workers(a.workers)?;
    spec.oracle = !a.no_oracle;
    spec.fault = a.inject_fault.as_deref().map(parse_instance).transpose()?;
    if let Some(q) = &spec.fault {
        if !spec.instances().contains(q) {
            return Err(Failure {
                code: EXIT_USAGE,
                message: format!("{q} is not in the campaign range"),
            });
        }
    }
    let report = run_campaign(&spec);
    let text = serde_json::to_string_pretty(&report).expect("serializable");
    if let Some(path) = &a.report {
        std::fs::write(path, format!("{text}\n")).map_err(|e| Failure {
            code: EXIT_FAILURE,
            message: format!("cannot write {}: {e}", path.display()),
        })?;
    }
    Ok((text, if report.pass { EXIT_OK } else { EXIT_FAILURE }))
}
