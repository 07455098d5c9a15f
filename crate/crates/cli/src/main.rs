use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use loplab::acceptance::{self, CriterionOutcome, SuiteConfig};
use loplab::algebra::{Conjunct, Dnf, VarId};
use loplab::covering::{hunt_sub_factorial, min_cover, CoverInstance, CoverUniverse, HuntOutcome};
use loplab::formulas::{least_number, least_number_refutation, lop, AxiomFamily};
use loplab::normalize::{merge, normalize_dnf, Padding};
use loplab::order::CanonicalTerm;
use loplab::pe::{check_conditions, PeEngine};
use loplab::ratio::format as rat;
use loplab::reductions::{
    check_ce_formulation, check_formulation, factorize, random_formulation, transform_sa_proof, CeFormulation,
    Formulation, SearchProblem,
};
use loplab::sa::{check_sa_proof, lp_degree_oracle, verify_oracle_result, OracleVerdict, SAProof};
use loplab::{Error, Limits};

#[derive(Parser)]
#[command(name = "loplab", version, about = "Exact pseudo-expectations, Sherali-Adams certificates and reductions for the linear ordering principle")]
struct Cli {
    /// Worker threads (defaults to available parallelism).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Write machine-readable output here: JSON, or TSV for a `.tsv` path. For
    /// `report` this is a directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a family's axioms as DNFs and polynomials.
    Encode(FamilyArgs),
    /// Uniform-order pseudo-expectation of an axiom, a DNF or an axiom-conjunct product.
    Pe(PeArgs),
    /// Check the degree-d pseudo-expectation conditions for the uniform-order PE.
    CheckConditions(ConditionsArgs),
    /// Rewrite an order DNF into normalized chain-term form.
    Normalize(NormalizeArgs),
    /// Verify a Sherali-Adams certificate.
    CheckSa(CheckSaArgs),
    /// Decide degree-d refutability with the exact LP and verify the answer.
    FindSa(ConditionsArgs),
    /// Check a formulation (and optionally a counter-example formulation) between two problems.
    CheckReduction(ReductionArgs),
    /// Split a formulation into a weakening step and a counter-example step.
    Factorize(ReductionArgs),
    /// Pull a refutation of the target problem back along a formulation.
    TransformProof(TransformArgs),
    /// Minimum cover of a set of orders by order-pattern sets.
    Cover(CoverArgs),
    /// Run the acceptance experiments and emit their tables.
    Report(ReportArgs),
}

#[derive(Args)]
struct FamilyArgs {
    /// `lop`, `least-number`, or a path to a family JSON file.
    #[arg(long)]
    family: String,
    #[arg(long, default_value_t = 0)]
    n: usize,
}

#[derive(Args)]
struct PeArgs {
    #[command(flatten)]
    fam: FamilyArgs,
    /// Axiom label; without it every axiom is listed.
    #[arg(long)]
    axiom: Option<String>,
    /// An explicit DNF such as `x1,2 & ~x2,3 | x3,1`, used instead of an axiom.
    #[arg(long, conflicts_with = "axiom")]
    dnf: Option<String>,
    /// Multiply by this conjunct, e.g. `x1,2 & x2,3`.
    #[arg(long)]
    times: Option<String>,
}

#[derive(Args)]
struct ConditionsArgs {
    #[command(flatten)]
    fam: FamilyArgs,
    #[arg(long)]
    d: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum PaddingArg {
    Minimal,
    #[value(name = "2d+1")]
    TwiceDegreePlusOne,
}

#[derive(Args)]
struct NormalizeArgs {
    #[arg(long)]
    n: usize,
    /// The DNF to normalize, e.g. `x1,2 & ~x2,3 | x3,1`.
    #[arg(long, required_unless_present = "axiom")]
    dnf: Option<String>,
    /// Normalize this LOP axiom instead.
    #[arg(long)]
    axiom: Option<String>,
    #[arg(long, value_enum, default_value = "minimal")]
    padding: PaddingArg,
    /// Merge the result with this chain term (elements in order, starting with 1).
    #[arg(long, num_args = 1.., value_delimiter = ' ')]
    merge: Option<Vec<usize>>,
}

#[derive(Args)]
struct CheckSaArgs {
    #[command(flatten)]
    fam: FamilyArgs,
    /// `builtin` (LeastNumber only) or a path to a certificate JSON file.
    #[arg(long)]
    cert: String,
}

#[derive(Args)]
struct ReductionArgs {
    /// Source problem: `least-number:N` or a path to a problem or plain family JSON file.
    #[arg(long)]
    q: String,
    /// Target problem, same forms as `--q`.
    #[arg(long)]
    r: String,
    /// `identity`, `random`, or a path to a formulation JSON file.
    #[arg(long, default_value = "random")]
    phi: String,
    /// Counter-example formulation JSON to check as well.
    #[arg(long)]
    ce: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Depth of the random `f` trees.
    #[arg(long, default_value_t = 2)]
    f_depth: usize,
}

#[derive(Args)]
struct TransformArgs {
    #[command(flatten)]
    red: ReductionArgs,
    /// `builtin` (LeastNumber target), `oracle`, or a path to a certificate JSON file.
    #[arg(long, default_value = "oracle")]
    proof: String,
    /// Highest degree the LP is asked for when `--proof oracle`.
    #[arg(long, default_value_t = 3)]
    max_degree: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum UniverseArg {
    Ord,
    OrdStar,
    Term,
}

#[derive(Args)]
struct CoverArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long, value_enum, default_value = "ord")]
    universe: UniverseArg,
    /// The chain term for `--universe term`, elements separated by spaces.
    #[arg(long, num_args = 1.., value_delimiter = ' ')]
    term: Option<Vec<usize>>,
    /// Only sets whose pattern starts with 1 (normalized weakenings of M1).
    #[arg(long)]
    anchored: bool,
    /// Instead of the minimum, look for a cover of Ord*1 below d! within this many nodes.
    #[arg(long)]
    hunt: Option<u64>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long, default_value_t = SuiteConfig::default().seed)]
    seed: u64,
    /// Criteria to run, e.g. `1,2,9`.
    #[arg(long, value_delimiter = ',')]
    criteria: Option<Vec<u8>>,
}

/// A verification outcome; `Err` is reserved for usage and input errors.
enum Verdict {
    Ok,
    Failed,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(w) = cli.workers {
        if w == 0 {
            eprintln!("error: --workers must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let limits = Limits::from_env();
    match run(cli, &limits) {
        Ok(Verdict::Ok) => ExitCode::SUCCESS,
        Ok(Verdict::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli, limits: &Limits) -> anyhow::Result<Verdict> {
    let out = cli.out.as_deref();
    match cli.command {
        Command::Encode(a) => encode(&a, out),
        Command::Pe(a) => pe(&a, limits, out),
        Command::CheckConditions(a) => conditions(&a, limits, out),
        Command::Normalize(a) => normalize(&a, limits, out),
        Command::CheckSa(a) => check_sa(&a, limits, out),
        Command::FindSa(a) => find_sa(&a, limits, out),
        Command::CheckReduction(a) => check_reduction(&a, limits, out),
        Command::Factorize(a) => factorize_cmd(&a, limits, out),
        Command::TransformProof(a) => transform(&a, limits, out),
        Command::Cover(a) => cover(&a, limits, out),
        Command::Report(a) => report(&a, limits, out),
    }
}

fn write_json<T: Serialize>(out: Option<&Path>, value: &T) -> anyhow::Result<()> {
    if let Some(p) = out {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        fs::write(p, s).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn write_table<T: Serialize>(out: Option<&Path>, value: &T, header: &[&str], rows: &[Vec<String>]) -> anyhow::Result<()> {
    match out {
        Some(p) if p.extension().is_some_and(|e| e == "tsv") => {
            let mut s = header.join("\t");
            s.push('\n');
            for r in rows {
                s.push_str(&r.join("\t"));
                s.push('\n');
            }
            fs::write(p, s).with_context(|| format!("writing {}", p.display()))?;
            Ok(())
        }
        _ => write_json(out, value),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load_family(a: &FamilyArgs) -> anyhow::Result<AxiomFamily> {
    match a.family.as_str() {
        "lop" => Ok(lop(a.n)?),
        "least-number" => Ok(least_number(a.n)?),
        path => {
            let fam: AxiomFamily = read_json(Path::new(path))?;
            fam.validate()?;
            Ok(fam)
        }
    }
}

/// The `n` of an order family, needed by the PE engine.
fn order_n(fam: &AxiomFamily) -> anyhow::Result<usize> {
    if fam.universe.order_n == 0 {
        bail!("`{}` has no order variables; the uniform-order PE needs an order family", fam.name);
    }
    Ok(fam.universe.order_n)
}

fn parse_conjunct(s: &str) -> anyhow::Result<Conjunct> {
    let s = s.trim();
    match s {
        "1" | "true" => return Ok(Conjunct::top()),
        "0" | "false" => return Ok(Conjunct::zero()),
        _ => {}
    }
    let mut lits = Vec::new();
    for lit in s.split('&') {
        let lit = lit.trim();
        let (neg, name) = match lit.strip_prefix('~').or_else(|| lit.strip_prefix('!')) {
            Some(rest) => (true, rest),
            None => (false, lit),
        };
        let v: VarId = name.parse()?;
        lits.push((v, !neg));
    }
    Ok(Conjunct::from_literals(lits))
}

fn parse_dnf(s: &str) -> anyhow::Result<Dnf> {
    if s.trim().is_empty() {
        return Ok(Dnf::new(Vec::new()));
    }
    Ok(Dnf::new(s.split('|').map(parse_conjunct).collect::<anyhow::Result<_>>()?))
}

fn encode(a: &FamilyArgs, out: Option<&Path>) -> anyhow::Result<Verdict> {
    let fam = load_family(a)?;
    println!("{} over {} ({} axioms, degree {})", fam.name, fam.universe, fam.len(), fam.degree());
    for ax in &fam.axioms {
        println!("{}: {}", ax.label, ax.dnf);
        println!("  poly: {}", ax.dnf.to_poly());
    }
    write_json(out, &fam)?;
    Ok(Verdict::Ok)
}

#[derive(Serialize)]
struct PeRow {
    label: String,
    #[serde(with = "loplab::ratio")]
    value: num_rational::BigRational,
}

fn pe(a: &PeArgs, limits: &Limits, out: Option<&Path>) -> anyhow::Result<Verdict> {
    let (n, targets): (usize, Vec<(String, Dnf)>) = if let Some(text) = &a.dnf {
        if a.fam.n == 0 {
            bail!("--dnf needs --n");
        }
        (a.fam.n, vec![(text.clone(), parse_dnf(text)?)])
    } else {
        let fam = load_family(&a.fam)?;
        let n = order_n(&fam)?;
        let targets = match &a.axiom {
            Some(l) => vec![(l.clone(), fam.require(l)?.clone())],
            None => fam.axioms.iter().map(|ax| (ax.label.clone(), ax.dnf.clone())).collect(),
        };
        (n, targets)
    };
    let e = PeEngine::with_limits(n, limits.clone());
    let times = a.times.as_deref().map(parse_conjunct).transpose()?;
    let mut rows = Vec::new();
    for (label, d) in targets {
        let value = match &times {
            Some(t) => e.pe_product(&d, t)?,
            None => e.pe_dnf(&d)?,
        };
        let label = match &times {
            Some(t) => format!("{label} * ({t})"),
            None => label,
        };
        rows.push(PeRow { label, value });
    }
    if rows.len() == 1 && a.axiom.is_some() || a.dnf.is_some() {
        println!("{}", rat(&rows[0].value));
    } else {
        for r in &rows {
            println!("{}\t{}", r.label, rat(&r.value));
        }
    }
    let table: Vec<Vec<String>> = rows.iter().map(|r| vec![r.label.clone(), rat(&r.value)]).collect();
    write_table(out, &rows, &["label", "pe"], &table)?;
    Ok(Verdict::Ok)
}

fn conditions(a: &ConditionsArgs, limits: &Limits, out: Option<&Path>) -> anyhow::Result<Verdict> {
    let fam = load_family(&a.fam)?;
    let e = PeEngine::with_limits(order_n(&fam)?, limits.clone());
    let rep = check_conditions(&fam, a.d, &e, limits)?;
    println!(
        "{}: degree {}, {} conjuncts, {} products",
        rep.family, rep.degree, rep.conjuncts_checked, rep.products_checked
    );
    match &rep.violation {
        None => println!("OK"),
        Some(v) => println!(
            "FAIL: condition {} on {}{} = {}",
            v.condition,
            v.axiom.as_deref().map(|l| format!("{l} * ")).unwrap_or_default(),
            v.conjunct,
            rat(&v.value)
        ),
    }
    write_json(out, &rep)?;
    Ok(if rep.passed { Verdict::Ok } else { Verdict::Failed })
}

fn normalize(a: &NormalizeArgs, limits: &Limits, out: Option<&Path>) -> anyhow::Result<Verdict> {
    let w = match (&a.dnf, &a.axiom) {
        (Some(text), _) => parse_dnf(text)?,
        (None, Some(l)) => lop(a.n)?.require(l)?.clone(),
        (None, None) => unreachable!("clap requires one of them"),
    };
    let padding = match a.padding {
        PaddingArg::Minimal => Padding::Minimal,
        PaddingArg::TwiceDegreePlusOne => Padding::TwiceDegreePlusOne,
    };
    let e = PeEngine::with_limits(a.n, limits.clone());
    let mut nd = normalize_dnf(&w, a.n, padding)?;
    println!("input: {w} (degree {}, pe {})", w.degree(), rat(&e.pe_dnf(&w)?));
    if let Some(seq) = &a.merge {
        let t = CanonicalTerm::new(seq.clone())?;
        nd = merge(&nd, &t, a.n)?;
        println!("merged with {t}");
    }
    println!("k = {}, {} terms, pe {}", nd.k, nd.len(), rat(&e.pe_normalized(&nd)?));
    for t in &nd.terms {
        println!("  {t}");
    }
    write_json(out, &nd)?;
    Ok(Verdict::Ok)
}

fn check_sa(a: &CheckSaArgs, limits: &Limits, out: Option<&Path>) -> anyhow::Result<Verdict> {
    let fam = load_family(&a.fam)?;
    let proof: SAProof = if a.cert == "builtin" {
        if a.fam.family != "least-number" {
            bail!("the built-in certificate exists for least-number only");
        }
        least_number_refutation(a.fam.n)?
    } else {
        read_json(Path::new(&a.cert))?
    };
    match check_sa_proof(&fam, &proof, limits) {
        Ok(m) => {
            println!(
                "OK: degree {}, unary size {}, {} weakened axioms",
                m.degree,
                m.unary_size.as_deref().unwrap_or("n/a (fractional weights)"),
                m.entries
            );
            write_json(out, &m)?;
            Ok(Verdict::Ok)
        }
        Err(e @ (Error::IdentityFailed { .. } | Error::WeakeningFailed { .. })) => {
            println!("FAIL: {e}");
            Ok(Verdict::Failed)
        }
        Err(e) => Err(e.into()),
    }
}

fn find_sa(a: &ConditionsArgs, limits: &Limits, out: Option<&Path>) -> anyhow::Result<Verdict> {
    let fam = load_family(&a.fam)?;
    let r = lp_degree_oracle(&fam, a.d, limits)?;
    println!(
        "{} at degree {}: {} columns, {} rows, {} pivots",
        r.family, r.degree, r.columns, r.rows, r.pivots
    );
    let verdict = verify_oracle_result(&fam, &r, limits)?;
    match &verdict {
        OracleVerdict::Refutation(m) => println!(
            "refutation: degree {}, unary size {}, verified",
            m.degree,
            m.unary_size.as_deref().unwrap_or("n/a (fractional weights)")
        ),
        OracleVerdict::Dual(rep) => match &rep.violation {
            None => println!(
                "no refutation: dual on {} monomials passes the PE conditions",
                r.dual.as_ref().map_or(0, Vec::len)
            ),
            Some(v) => println!("FAIL: dual violates condition {} on {}", v.condition, v.conjunct),
        },
    }
    write_json(out, &r)?;
    Ok(if verdict.is_valid() { Verdict::Ok } else { Verdict::Failed })
}

fn load_problem(spec: &str) -> anyhow::Result<SearchProblem> {
    if let Some(n) = spec.strip_prefix("least-number:") {
        let n: usize = n.parse().map_err(|_| anyhow!("bad size in `{spec}`"))?;
        return Ok(SearchProblem::from_family(&least_number(n)?)?);
    }
    let text = fs::read_to_string(spec).with_context(|| format!("reading {spec}"))?;
    if let Ok(p) = serde_json::from_str::<SearchProblem>(&text) {
        p.validate()?;
        return Ok(p);
    }
    let fam: AxiomFamily = serde_json::from_str(&text).with_context(|| format!("parsing {spec}"))?;
    Ok(SearchProblem::from_family(&fam)?)
}

fn load_formulation(
    a: &ReductionArgs,
    q: &SearchProblem,
    r: &SearchProblem,
    limits: &Limits,
) -> anyhow::Result<Formulation> {
    match a.phi.as_str() {
        "identity" => Ok(Formulation::identity(q)),
        "random" => {
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            Ok(random_formulation(&mut rng, q, r, a.f_depth, limits)?)
        }
        path => read_json(Path::new(path)),
    }
}

fn print_counterexample(what: &str, c: &loplab::reductions::ReductionCounterexample, q: &SearchProblem, r: &SearchProblem) {
    println!(
        "FAIL ({what}): x = {}, target solution {}, witness {}{}",
        c.x,
        r.outputs[c.b],
        q.witnesses[c.z],
        c.c.map(|k| format!(", h gives {}", r.witnesses[k])).unwrap_or_default()
    );
}

#[derive(Serialize)]
struct ReductionReport {
    q: String,
    r: String,
    size: usize,
    depth: usize,
    formulation: Formulation,
    counterexample: Option<loplab::reductions::ReductionCounterexample>,
    ce_counterexample: Option<loplab::reductions::ReductionCounterexample>,
}

fn check_reduction(a: &ReductionArgs, limits: &Limits, out: Option<&Path>) -> anyhow::Result<Verdict> {
    let q = load_problem(&a.q)?;
    let r = load_problem(&a.r)?;
    if let Some(x) = q.totality_counterexample(limits)? {
        bail!("`{}` is not total: input {x} has no solution", q.name);
    }
    let phi = load_formulation(a, &q, &r, limits)?;
    let cx = check_formulation(&q, &r, &phi, limits)?;
    println!("{} -> {}: size {}, depth {}", q.name, r.name, phi.size(), phi.depth());
    match &cx {
        None => println!("formulation OK"),
        Some(c) => print_counterexample("formulation", c, &q, &r),
    }
    let ce_cx = match &a.ce {
        Some(path) => {
            let psi: CeFormulation = read_json(path)?;
            let c = check_ce_formulation(&q, &r, &psi, limits)?;
            match &c {
                None => println!("counter-example formulation OK"),
                Some(c) => print_counterexample("counter-example formulation", c, &q, &r),
            }
            c
        }
        None => None,
    };
    let ok = cx.is_none() && ce_cx.is_none();
    write_json(
        out,
        &ReductionReport {
            q: q.name.clone(),
            r: r.name.clone(),
            size: phi.size(),
            depth: phi.depth(),
            formulation: phi,
            counterexample: cx,
            ce_counterexample: ce_cx,
        },
    )?;
    Ok(if ok { Verdict::Ok } else { Verdict::Failed })
}

fn factorize_cmd(a: &ReductionArgs, limits: &Limits, out: Option<&Path>) -> anyhow::Result<Verdict> {
    let q = load_problem(&a.q)?;
    let r = load_problem(&a.r)?;
    let phi = load_formulation(a, &q, &r, limits)?;
    let fac = match factorize(&q, &r, &phi, limits) {
        Ok(f) => f,
        Err(e @ Error::WeakeningFailed { .. }) => {
            println!("FAIL: {e}");
            return Ok(Verdict::Failed);
        }
        Err(e) => return Err(e.into()),
    };
    let red = &fac.reduced;
    println!(
        "reduced problem {}: {} inputs, {} outputs, {} axioms, size {}, depth {}",
        red.problem.name,
        red.problem.input_bits,
        red.problem.outputs.len(),
        red.family.len(),
        red.size,
        red.depth
    );
    println!("weakening step and counter-example step verified");
    let composite = fac.compose();
    let same = composite == phi;
    println!("composite reproduces the formulation: {}", if same { "yes" } else { "no" });
    write_json(out, &fac)?;
    Ok(if same { Verdict::Ok } else { Verdict::Failed })
}

fn target_refutation(a: &TransformArgs, r: &SearchProblem, limits: &Limits) -> anyhow::Result<SAProof> {
    match a.proof.as_str() {
        "builtin" => {
            let n = a
                .red
                .r
                .strip_prefix("least-number:")
                .and_then(|n| n.parse().ok())
                .ok_or_else(|| anyhow!("the built-in refutation needs --r least-number:N"))?;
            Ok(least_number_refutation(n)?)
        }
        "oracle" => {
            let fam = r.to_family()?;
            for d in 1..=a.max_degree {
                if let Some(p) = lp_degree_oracle(&fam, d, limits)?.refutation {
                    return Ok(p);
                }
            }
            bail!("`{}` has no refutation up to degree {}", r.name, a.max_degree)
        }
        path => read_json(Path::new(path)),
    }
}

fn transform(a: &TransformArgs, limits: &Limits, out: Option<&Path>) -> anyhow::Result<Verdict> {
    let q = load_problem(&a.red.q)?;
    let r = load_problem(&a.red.r)?;
    let phi = load_formulation(&a.red, &q, &r, limits)?;
    let refutation = target_refutation(a, &r, limits)?;
    let t = transform_sa_proof(&q, &r, &phi, &refutation, limits)?;
    let ok = t.metrics.degree <= t.degree_bound;
    println!(
        "{}: source degree {}, formulation depth {}, size {}",
        if ok { "OK" } else { "FAIL" },
        t.source_degree,
        t.depth,
        t.size
    );
    println!(
        "transformed refutation: degree {} (bound {}), unary size {}",
        t.metrics.degree,
        t.degree_bound,
        t.metrics.unary_size.as_deref().unwrap_or("n/a (fractional weights)")
    );
    write_json(out, &t)?;
    Ok(if ok { Verdict::Ok } else { Verdict::Failed })
}

fn cover(a: &CoverArgs, limits: &Limits, out: Option<&Path>) -> anyhow::Result<Verdict> {
    if let Some(budget) = a.hunt {
        let (h, nodes) = hunt_sub_factorial(a.n, a.d, a.anchored, budget, limits)?;
        match &h {
            HuntOutcome::Found(c) => {
                println!("found a cover with {} sets ({nodes} nodes)", c.len());
                for s in c {
                    println!("  {s}");
                }
            }
            HuntOutcome::NoneExists => println!("none below {}! ({nodes} nodes)", a.d),
            HuntOutcome::Unknown => println!("unknown: budget exhausted after {nodes} nodes"),
        }
        write_json(out, &h)?;
        return Ok(Verdict::Ok);
    }
    let universe = match a.universe {
        UniverseArg::Ord => CoverUniverse::Ord,
        UniverseArg::OrdStar => CoverUniverse::OrdStar,
        UniverseArg::Term => {
            let seq = a.term.clone().ok_or_else(|| anyhow!("--universe term needs --term"))?;
            CoverUniverse::Term(CanonicalTerm::new(seq)?)
        }
    };
    let mut inst = CoverInstance::new(a.n, a.d, universe);
    inst.anchored = a.anchored;
    let r = min_cover(&inst, limits)?;
    match r.min {
        Some(m) => println!("min={m}"),
        None => println!("min=none (some order is in no set)"),
    }
    println!("universe size {}, counting bound {}, {} nodes", r.universe_size, r.counting_bound, r.nodes);
    for s in &r.cover {
        println!("  {s}");
    }
    write_json(out, &r)?;
    Ok(Verdict::Ok)
}

#[derive(Serialize)]
struct Report<'a> {
    version: &'a str,
    seed: u64,
    limits: &'a Limits,
    criteria: &'a [CriterionOutcome],
}

fn report(a: &ReportArgs, limits: &Limits, out: Option<&Path>) -> anyhow::Result<Verdict> {
    let cfg = SuiteConfig {
        seed: a.seed,
        limits: limits.clone(),
    };
    let ids = a.criteria.clone().unwrap_or_else(|| acceptance::CRITERIA.to_vec());
    if let Some(dir) = out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut outcomes = Vec::new();
    for id in ids {
        let o = acceptance::run(id, &cfg)?;
        println!("{}", o.line());
        print!("{}", o.tsv());
        println!();
        if let Some(dir) = out {
            fs::write(dir.join(format!("criterion_{id:02}.tsv")), o.tsv())?;
        }
        outcomes.push(o);
    }
    if let Some(dir) = out {
        let rep = Report {
            version: env!("CARGO_PKG_VERSION"),
            seed: cfg.seed,
            limits: &cfg.limits,
            criteria: &outcomes,
        };
        let mut s = serde_json::to_string_pretty(&rep)?;
        s.push('\n');
        fs::write(dir.join("report.json"), s)?;
    }
    let failed: Vec<u8> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    if failed.is_empty() {
        println!("all criteria passed");
        Ok(Verdict::Ok)
    } else {
        println!("failed criteria: {failed:?}");
        Ok(Verdict::Failed)
    }
}
