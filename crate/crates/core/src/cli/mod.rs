//! Command-line front end: every operation with JSON or text output and a fixed exit-code contract.

pub mod dsl;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::games::bm::{banach_mazur_simulate, Adversary, BmTarget};
use crate::games::engine::{play, GameConfig, GameKind, PlayerI};
use crate::games::strategies::{builtin_reduction, describe_params, StrategyParams};
use crate::games::verify::{catalog_points, verify};
use crate::measure::density::{density_sequence_with, CERTAINTY};
use crate::measure::interval::{measure_exact, measure_interval};
use crate::measure::tree::density_tree;
use crate::rational::{floor_q, fmt_q, one, parse_q, pow2, MeasureInterval, Q};
use crate::reductions::constructions::{
    approximate_in_degree, empty_interior_closed, large_frontier_regular, pi03_member, pi03_section_code,
    supports_counterexample, w_from_tree, w_identity_table,
};
use crate::reductions::p3::{p3_trace, Generator, P3Config};
use crate::reductions::sparse::{check_sparse_full, sparse_sequence, Ambient};
use crate::sets::clopen::ClopenTree;
use crate::sets::expr::{as_clopen, serialize, Expr};
use crate::sets::localize::localize;
use crate::sets::member::member_at_depth;
use crate::word::{parse_word, word_label, Lasso};

pub use dsl::{parse_dsl, parse_expr, DslProgram};

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Parser, Debug)]
#[command(name = "cantor-density", version, about = "Exact measures, densities and Wadge-style constructions on Cantor space")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Measure of a set: an enclosure at a budget, or exact/within a tolerance.
    Measure {
        expr: String,
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long)]
        tol: Option<String>,
    },
    /// Density sequence along a lasso and its verdict.
    Density {
        expr: String,
        #[arg(long)]
        point: String,
        #[arg(long, default_value_t = 30)]
        budget: u32,
        #[arg(long, default_value_t = CERTAINTY)]
        p: u32,
    },
    /// Three-valued membership of a lasso.
    Member {
        expr: String,
        #[arg(long)]
        point: String,
        #[arg(long, default_value_t = 64)]
        depth: usize,
    },
    /// The positive-measure tree to a depth.
    Dtree {
        expr: String,
        #[arg(long, default_value_t = 4)]
        depth: usize,
    },
    /// Fraction of seeded random prefixes of high relative measure, against the measure.
    Lebesgue {
        expr: String,
        #[arg(long, default_value_t = 400)]
        samples: usize,
        #[arg(long, default_value_t = 40)]
        depth: usize,
        #[arg(long, default_value_t = 5)]
        p: u32,
    },
    /// Named constructions and their certificates
    #[command(subcommand)]
    Construct(Construct),
    /// Codes of sets in the Borel hierarchy
    #[command(subcommand)]
    Code(Code),
    /// Continuous reductions to density sets
    #[command(subcommand)]
    Reduce(Reduce),
    /// Lipschitz, Wadge and Banach–Mazur games
    #[command(subcommand)]
    Game(Game),
}

#[derive(Subcommand, Debug)]
enum Construct {
    /// A sparse sequence in the full tree and its defining conditions.
    Sparse {
        #[arg(long, default_value = "n*2+2")]
        order: String,
        #[arg(long, default_value_t = 16)]
        count: usize,
        #[arg(long, default_value_t = 4)]
        density_len: usize,
    },
    /// A closed set with empty interior and measure loss below `eps`.
    EmptyInterior {
        #[arg(long, default_value = "1/4")]
        eps: String,
        #[arg(long, default_value_t = 6)]
        horizon: usize,
    },
    /// The regular open set with a frontier of positive measure.
    LargeFrontier {
        #[arg(long, default_value_t = 10)]
        depth: usize,
    },
    /// Two sets at positive distance with the same inner and outer supports.
    Supports {
        #[arg(long, default_value_t = 8)]
        depth: usize,
    },
    /// `W` built from a tree, with the localization identity table.
    Wfromtree {
        expr: String,
        #[arg(long, default_value_t = 6)]
        depth: usize,
    },
    /// `D ∪ t⌢B` approximating a set.
    Approx {
        expr: String,
        #[arg(long)]
        eps: String,
        #[arg(long, default_value = "full")]
        b: String,
    },
}

#[derive(Subcommand, Debug)]
enum Code {
    /// Clopen sections of the Π⁰₃ code of the density-one set.
    Pi03 {
        expr: String,
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long, default_value_t = 0)]
        n: usize,
        #[arg(long, default_value_t = 6)]
        mmax: usize,
        #[arg(long)]
        point: Option<String>,
    },
}

#[derive(Subcommand, Debug)]
enum Reduce {
    /// The reduction of P₃ along a generator.
    P3 {
        #[arg(default_value = "@empty-interior")]
        expr: String,
        #[arg(long, default_value = "zero")]
        gen: String,
        #[arg(long, default_value_t = 8)]
        steps: usize,
        #[arg(long, default_value_t = 20_000)]
        max_nodes: usize,
    },
}

#[derive(Args, Debug, Clone)]
struct StratArgs {
    /// Integer schedule `f`, e.g. `n*1+1` or `[2,3]`.
    #[arg(long)]
    f: Option<String>,
    /// Rake family, e.g. `clopen{0}` or `clopen{0}, full; cycle`.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    pole: bool,
    #[arg(long)]
    a: Option<String>,
    #[arg(long)]
    b: Option<String>,
    #[arg(long)]
    r: Option<String>,
    #[arg(long)]
    d: Option<String>,
    #[arg(long)]
    t: Option<String>,
    #[arg(long)]
    witness_in: Option<String>,
    #[arg(long)]
    witness_out: Option<String>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Lipschitz,
    Wadge,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum TargetArg {
    Minus,
    Plus,
    Both,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum AdversaryArg {
    Greedy,
    Shrink,
    TowardEmpty,
    TowardFull,
}

#[derive(Subcommand, Debug)]
enum Game {
    /// Play a builtin strategy against a lasso.
    Play {
        #[arg(long)]
        strategy: String,
        #[arg(long)]
        point: String,
        #[arg(long, default_value_t = 32)]
        rounds: usize,
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
        #[command(flatten)]
        params: StratArgs,
    },
    /// Check a builtin strategy on catalog, listed or seeded random lassos.
    Verify {
        #[arg(long)]
        strategy: String,
        #[arg(long, default_value_t = 64)]
        horizon: usize,
        /// Comma-separated lassos; the catalog when absent.
        #[arg(long)]
        points: Option<String>,
        /// Add this many seeded random lassos.
        #[arg(long, default_value_t = 0)]
        sample: usize,
        #[command(flatten)]
        params: StratArgs,
    },
    /// The Banach–Mazur game on the measure algebra.
    Bm {
        #[arg(long, value_enum, default_value_t = TargetArg::Both)]
        target: TargetArg,
        #[arg(long, value_enum, default_value_t = AdversaryArg::Greedy)]
        adversary: AdversaryArg,
        #[arg(long, default_value_t = 20)]
        rounds: usize,
    },
}

/// What a command produced.
struct Report {
    json: Value,
    text: String,
    code: i32,
}

impl Report {
    fn ok(json: Value, text: impl Into<String>) -> Self {
        Report { json, text: text.into(), code: 0 }
    }
}

/// Exit code of an error: 2 for exhausted precision, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Precision { .. } => 2,
        _ => 1,
    }
}

/// Named constructions usable wherever an expression is expected.
///
/// `@empty-interior[:eps]`, `@large-frontier`, `@large-frontier-tree`, `@supports-a`,
/// `@supports-b`; anything else is DSL text.
pub fn resolve_expr(text: &str) -> Result<Expr> {
    let t = text.trim();
    let Some(name) = t.strip_prefix('@') else { return parse_expr(t) };
    let (name, arg) = name.split_once(':').map_or((name, None), |(n, a)| (n, Some(a)));
    match name {
        "empty-interior" => {
            let eps = arg.map(parse_q).transpose()?.unwrap_or_else(|| pow2(-2));
            Ok(empty_interior_closed(Ambient::Full, &eps)?.expr)
        }
        "large-frontier" => Ok(large_frontier_regular()?.open),
        "large-frontier-tree" => Ok(large_frontier_regular()?.tree.expr),
        "supports-a" => Ok(supports_counterexample()?.a),
        "supports-b" => Ok(supports_counterexample()?.b),
        other => Err(Error::Parse(format!("unknown construction `@{other}`"))),
    }
}

/// Interval text; long rationals are rounded outward to multiples of `2^(-32)`.
fn short(m: &MeasureInterval) -> String {
    if fmt_q(&m.lo).len() + fmt_q(&m.hi).len() <= 40 {
        return if m.is_exact() { fmt_q(&m.lo) } else { m.to_string() };
    }
    let scale = pow2(32);
    let lo = Q::from_integer(floor_q(&(&m.lo * &scale))) / &scale;
    let hi = -Q::from_integer(floor_q(&(-(&m.hi * &scale)))) / &scale;
    format!("[{}, {}]", fmt_q(&lo), fmt_q(&hi))
}

fn lasso_arg(s: &str) -> Result<Lasso> {
    Lasso::parse(s)
}

fn random_lasso(rng: &mut ChaCha8Rng) -> Lasso {
    let pl = rng.gen_range(0..=6);
    let cl = rng.gen_range(1..=4);
    let bits = |n: usize, rng: &mut ChaCha8Rng| (0..n).map(|_| rng.gen_range(0..=1u8)).collect::<Vec<u8>>();
    let pre = bits(pl, rng);
    let cyc = bits(cl, rng);
    Lasso::new(pre, cyc).expect("nonempty cycle")
}

fn strategy_params(a: &StratArgs) -> Result<StrategyParams> {
    let mut p = StrategyParams::catalog();
    if let Some(f) = &a.f {
        p.f = dsl::parse_int_sched(f)?;
    }
    if let Some(fam) = &a.family {
        p.family = dsl::parse_family(fam)?;
    }
    p.pole = a.pole;
    if let Some(s) = &a.a {
        p.a = resolve_expr(s)?;
    }
    if let Some(s) = &a.b {
        p.b = resolve_expr(s)?;
    }
    if let Some(r) = &a.r {
        p.r = parse_q(r)?;
    }
    if let Some(d) = &a.d {
        p.d = as_clopen(&resolve_expr(d)?).ok_or_else(|| Error::domain("--d must be a clopen set"))?;
    }
    if let Some(t) = &a.t {
        p.t = parse_word(t)?;
    }
    p.witness_in = a.witness_in.as_deref().map(lasso_arg).transpose()?;
    p.witness_out = a.witness_out.as_deref().map(lasso_arg).transpose()?;
    Ok(p)
}

fn run(cli: Cli) -> Result<Report> {
    match cli.cmd {
        Cmd::Measure { expr, depth, tol } => {
            let e = resolve_expr(&expr)?;
            let m = match (tol, depth) {
                (Some(t), _) => measure_exact(&e, &parse_q(&t)?)?.interval(),
                (None, d) => measure_interval(&e, d.unwrap_or(20)),
            };
            let text = short(&m);
            Ok(Report::ok(serde_json::to_value(&m).expect("serializable"), text))
        }
        Cmd::Density { expr, point, budget, p } => {
            let e = resolve_expr(&expr)?;
            let x = lasso_arg(&point)?;
            let rep = density_sequence_with(&e, &x, (budget / 2) as usize, budget, p);
            let text = format!("{} along {}", rep.verdict.label(), x);
            Ok(Report::ok(serde_json::to_value(&rep).expect("serializable"), text))
        }
        Cmd::Member { expr, point, depth } => {
            let e = resolve_expr(&expr)?;
            let x = lasso_arg(&point)?;
            let v = member_at_depth(&e, &x, depth);
            Ok(Report::ok(json!({ "point": x.to_string(), "verdict": v }), format!("{v:?}")))
        }
        Cmd::Dtree { expr, depth } => {
            let e = resolve_expr(&expr)?;
            let nodes = density_tree(&e, depth)?;
            let rows: Vec<Value> = nodes
                .iter()
                .map(|s| json!({ "node": word_label(s), "measure": measure_interval(&localize(&e, s), 24) }))
                .collect();
            let text = nodes.iter().map(|s| word_label(s)).collect::<Vec<_>>().join(" ");
            Ok(Report::ok(json!({ "depth": depth, "nodes": rows }), text))
        }
        Cmd::Lebesgue { expr, samples, depth, p } => {
            let e = resolve_expr(&expr)?;
            let mu = measure_exact(&e, &pow2(-12))?.interval();
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            let thr = one() - pow2(-(p as i64));
            let mut hits = 0usize;
            for _ in 0..samples {
                let s: Vec<u8> = (0..depth).map(|_| rng.gen_range(0..=1u8)).collect();
                if measure_interval(&localize(&e, &s), 16).lo > thr {
                    hits += 1;
                }
            }
            let frac = Q::new((hits as i64).into(), (samples.max(1) as i64).into());
            let text = format!("{hits}/{samples} prefixes above {} (μ in {})", fmt_q(&thr), short(&mu));
            Ok(Report::ok(
                json!({ "samples": samples, "depth": depth, "hits": hits, "fraction": fmt_q(&frac), "measure": mu, "seed": cli.seed }),
                text,
            ))
        }
        Cmd::Construct(c) => construct(c),
        Cmd::Code(Code::Pi03 { expr, k, n, mmax, point }) => {
            let e = resolve_expr(&expr)?;
            let secs = pi03_section_code(&e, k, n, mmax)?;
            let labels: Vec<String> = secs.iter().map(ClopenTree::to_string).collect();
            let member = point.as_deref().map(lasso_arg).transpose()?.map(|x| pi03_member(&e, &x, k, mmax)).transpose()?;
            let text = labels.iter().enumerate().map(|(m, s)| format!("C({k},{m}) = {s}")).collect::<Vec<_>>().join("\n");
            Ok(Report::ok(json!({ "k": k, "n": n, "sections": labels, "member": member }), text))
        }
        Cmd::Reduce(Reduce::P3 { expr, gen, steps, max_nodes }) => {
            let e = resolve_expr(&expr)?;
            let g = Generator::parse(&gen)?;
            let cfg = P3Config { max_nodes, ..P3Config::default() };
            let tr = p3_trace(&e, &g, steps, &cfg);
            let text = tr
                .steps
                .iter()
                .map(|s| format!("n={} case={} len={} rho={}", s.n, s.case, s.len, s.rho.map_or("?".into(), |r| r.to_string())))
                .chain(tr.error.iter().map(|e| format!("stopped: {e}")))
                .collect::<Vec<_>>()
                .join("\n");
            let code = if tr.error.is_some() { 1 } else { 0 };
            Ok(Report { json: serde_json::to_value(&tr).expect("serializable"), text, code })
        }
        Cmd::Game(g) => game(g, cli.seed),
    }
}

fn construct(c: Construct) -> Result<Report> {
    match c {
        Construct::Sparse { order, count, density_len } => {
            let order = dsl::parse_int_sched(&order)?;
            let (_, seq) = sparse_sequence(Ambient::Full, order, count)?;
            let check = check_sparse_full(&seq, density_len);
            let text = format!("{} nodes: {}\nconditions ok: {}", seq.nodes.len(), seq.nodes.join(" "), check.all_ok());
            let code = if check.all_ok() { 0 } else { 3 };
            Ok(Report { json: json!({ "sequence": seq, "check": check }), text, code })
        }
        Construct::EmptyInterior { eps, horizon } => {
            let t = empty_interior_closed(Ambient::Full, &parse_q(&eps)?)?;
            let m = measure_interval(&t.expr, 24);
            let empty_int = t.empty_interior_to(horizon);
            let text = format!(
                "order {} loss ≤ {} measure {} empty interior to {horizon}: {empty_int}",
                t.order.describe(),
                fmt_q(&t.loss_bound),
                short(&m)
            );
            Ok(Report::ok(
                json!({ "order": t.order.describe(), "loss_bound": fmt_q(&t.loss_bound), "measure": m, "horizon": horizon, "empty_interior": empty_int }),
                text,
            ))
        }
        Construct::LargeFrontier { depth } => {
            let rep = large_frontier_regular()?.certify(depth);
            let text = format!(
                "{} nodes, max μ(U|t) {}, bound ok: {}, frontier {}",
                rep.nodes_checked,
                short(&rep.max_local_hi),
                rep.bound_ok,
                short(&rep.frontier)
            );
            let code = if rep.bound_ok { 0 } else { 3 };
            Ok(Report { json: serde_json::to_value(&rep).expect("serializable"), text, code })
        }
        Construct::Supports { depth } => {
            let rep = supports_counterexample()?.report(depth);
            let text = format!(
                "δ {} outer full {}/{} inner equal {}",
                short(&rep.delta), rep.outer_full_a, rep.outer_full_b, rep.inner_equal
            );
            Ok(Report::ok(serde_json::to_value(&rep).expect("serializable"), text))
        }
        Construct::Wfromtree { expr, depth } => {
            let t = resolve_expr(&expr)?;
            let w = w_from_tree(&t)?;
            let rows = w_identity_table(&t, &w, depth)?;
            let all = rows.iter().all(|(_, a, b)| a == b);
            let js: Vec<Value> = rows.iter().map(|(s, a, b)| json!({ "t": word_label(s), "w": fmt_q(a), "tree": fmt_q(b) })).collect();
            let code = if all { 0 } else { 3 };
            Ok(Report { json: json!({ "w": serialize(&w), "rows": js, "identity": all }), text: format!("{} rows, identity holds: {all}", rows.len()), code })
        }
        Construct::Approx { expr, eps, b } => {
            let target = resolve_expr(&expr)?;
            let b = resolve_expr(&b)?;
            let ap = approximate_in_degree(&target, &parse_q(&eps)?, &b)?;
            Ok(Report::ok(
                json!({ "expr": serialize(&ap.expr), "d": ap.d.to_string(), "t": word_label(&ap.t), "depth": ap.depth, "delta_d": fmt_q(&ap.delta_d) }),
                serialize(&ap.expr),
            ))
        }
    }
}

fn game(g: Game, seed: u64) -> Result<Report> {
    match g {
        Game::Play { strategy, point, rounds, kind, params } => {
            let p = strategy_params(&params)?;
            let red = builtin_reduction(&strategy, &p)?;
            let kind = match kind {
                Some(KindArg::Lipschitz) => GameKind::Lipschitz,
                Some(KindArg::Wadge) => GameKind::Wadge,
                None => red.strategy.kind(),
            };
            let cfg = GameConfig { kind, set_i: red.domain.clone(), set_ii: red.target.clone(), rounds };
            let t = play(&cfg, PlayerI::Point(lasso_arg(&point)?), red.strategy.as_ref())?;
            let text = format!(
                "I : {}\nII: {}\npasses: {}\nI {:?}, II {:?}",
                crate::word::word_string(&t.moves_i),
                crate::word::word_string(&t.moves_ii),
                t.passes.len(),
                t.verdict_i,
                t.verdict_ii
            );
            Ok(Report::ok(serde_json::to_value(&t).expect("serializable"), text))
        }
        Game::Verify { strategy, horizon, points, sample, params } => {
            let p = strategy_params(&params)?;
            let red = builtin_reduction(&strategy, &p)?;
            let mut pts = match points {
                Some(list) => list.split(',').map(lasso_arg).collect::<Result<Vec<_>>>()?,
                None => catalog_points(),
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            pts.extend((0..sample).map(|_| random_lasso(&mut rng)));
            let rep = verify(&red, &pts, horizon);
            let text = format!(
                "{}: {} agreements, {} unknown, {} contradictions, {} violations",
                rep.strategy, rep.agreements, rep.unknowns, rep.contradictions, rep.violations
            );
            let code = if rep.ok() { 0 } else { 3 };
            let mut js = serde_json::to_value(&rep).expect("serializable");
            js["construction"] = describe_params(&p);
            Ok(Report { json: js, text, code })
        }
        Game::Bm { target, adversary, rounds } => {
            let target = match target {
                TargetArg::Minus => BmTarget::Minus,
                TargetArg::Plus => BmTarget::Plus,
                TargetArg::Both => BmTarget::Both,
            };
            let adv = match adversary {
                AdversaryArg::Greedy => Adversary::Greedy,
                AdversaryArg::Shrink => Adversary::Shrink,
                AdversaryArg::TowardEmpty => Adversary::Toward(ClopenTree::empty()),
                AdversaryArg::TowardFull => Adversary::Toward(ClopenTree::full()),
            };
            let tr = banach_mazur_simulate(target, &adv, rounds)?;
            let ok = tr.all_rounds_ok();
            let text = tr
                .rounds
                .iter()
                .map(|r| format!("n={} cases={} radius={} ok={}", r.n, r.cases.join(","), fmt_q(&r.ball_ii.radius), r.ok()))
                .collect::<Vec<_>>()
                .join("\n");
            let code = if ok { 0 } else { 3 };
            Ok(Report { json: serde_json::to_value(&tr).expect("serializable"), text, code })
        }
    }
}

/// Parse `argv` (program name first), run the command, and return the exit code with the output.
pub fn run_command<I, T>(argv: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            return (code, e.render().to_string());
        }
    };
    let format = cli.format;
    match run(cli) {
        Ok(r) => {
            let out = match format {
                Format::Json => serde_json::to_string(&r.json).expect("serializable"),
                Format::Text => r.text,
            };
            (r.code, out)
        }
        Err(e) => {
            let code = exit_code(&e);
            let out = match format {
                Format::Json => {
                    let mut js = json!({ "error": e.to_string() });
                    if let Error::Precision { best, .. } = &e {
                        js["best"] = serde_json::to_value(best).expect("serializable");
                    }
                    js.to_string()
                }
                Format::Text => format!("error: {e}"),
            };
            (code, out)
        }
    }
}
