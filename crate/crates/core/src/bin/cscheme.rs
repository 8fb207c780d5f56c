//! Batch front-end. Data goes to --out (or stdout) as JSON Lines; summaries and errors go to stderr.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use itertools::Itertools;
use serde_json::{json, Value};

use cscheme::ad::{ad_piece, ad_intersection_bound, g_s_system, representation_check, FinitePoset};
use cscheme::applications::{
    captured_realization_check, entangled_f, finite_metric_search, parse_level_metrics, scheme_metric, FiniteMetric,
    LevelMetrics, RealizationType, Q,
};
use cscheme::capturing::{search_captured, Star};
use cscheme::forcing::{extend_to_next_limit, CSequence, Forcing};
use cscheme::io::{
    json_line, parse_family, parse_ordinal, parse_ordinal_set, read_text, read_type_spec, scheme_from_jsonl,
    scheme_to_jsonl, write_text,
};
use cscheme::metrics::MetricContext;
use cscheme::scheme::omega_scheme_prefix;
use cscheme::types::fixtures::{t4, t_e};
use cscheme::types::{LevelParams, Schedule};
use cscheme::verify::{run_all, scheme_dump_suite, to_jsonl, VerifyConfig};
use cscheme::{Error, OrdinalCode, Result, SchemePrefix, TypeSpec};

/// Highest level the entangled command will touch.
const ENTANGLED_BUDGET: usize = 3;

#[derive(Parser)]
#[command(name = "cscheme", version, about = "Construction schemes over finite prefixes of ω·S")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Global {
    /// Type spec JSON; defaults to the built-in T₄ (T_E for `entangled`).
    #[arg(long, global = true)]
    type_spec: Option<PathBuf>,
    /// Top level K, or a range a..b where the command takes one.
    #[arg(long, global = true)]
    levels: Option<Levels>,
    #[arg(long, global = true)]
    horizon: Option<usize>,
    /// Write data here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Summaries and errors on stderr as JSON.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Clone, Copy)]
struct Levels {
    lo: Option<usize>,
    hi: usize,
}

impl FromStr for Levels {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("bad level {t:?}"));
        match s.split_once("..") {
            Some((a, b)) => {
                let (lo, hi) = (num(a)?, num(b.trim_start_matches('='))?);
                if lo > hi {
                    return Err(format!("empty level range {s}"));
                }
                Ok(Levels { lo: Some(lo), hi })
            }
            None => Ok(Levels { lo: None, hi: num(s)? }),
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Extend a type prefix to level K along its diagonal schedule.
    GenType {
        /// n for new levels when no spec is given.
        #[arg(long, default_value_t = 2)]
        default_n: usize,
    },
    /// Dump the scheme on m_K points.
    GenScheme,
    /// ρ and Δ for every pair, Ξ for every point and level.
    Metrics {
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Search a family for captured subfamilies.
    Capture {
        /// JSON list of integer lists.
        #[arg(long)]
        family: PathBuf,
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// Subset of "rho,delta".
        #[arg(long, default_value = "")]
        star: String,
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Run the greedy filter over γ and dump the extended scheme.
    Extend {
        #[arg(long)]
        ground: Option<PathBuf>,
        #[arg(long, default_value = "ω")]
        gamma: String,
        /// "alpha:A" with A comma-separated, repeatable.
        #[arg(long)]
        ih1: Vec<String>,
        #[arg(long)]
        c_seq: Option<PathBuf>,
    },
    /// AD pieces A^k_α and the disjointness bound for every pair.
    Ad {
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Represent a finite poset and judge every clause.
    Represent {
        /// Poset JSON {"elements":[…],"lt":[[a,b],…]}.
        #[arg(long, conflicts_with = "kind")]
        poset: Option<PathBuf>,
        /// chain:N, antichain:N or diamond.
        #[arg(long, default_value = "chain:3")]
        kind: String,
        /// Also build g_S for this comma-separated set of element indices.
        #[arg(long)]
        s: Option<String>,
    },
    /// f_α for every point, optionally with realization checks.
    Entangled {
        /// Realization type such as "<" or "<>".
        #[arg(long)]
        realize: Option<String>,
    },
    /// Scheme metric over the domain, or the monotone search.
    Metric {
        #[arg(long)]
        level_metrics: Option<PathBuf>,
        #[arg(long)]
        search: bool,
        #[arg(long, default_value = "1")]
        c: String,
        #[arg(long, default_value_t = 5)]
        max_size: usize,
        #[arg(long, default_value = "1,3/4,1/2,1/4")]
        grid: String,
    },
    /// Run the property suites, or check a scheme dump.
    Verify {
        #[arg(long)]
        rep_levels: Option<usize>,
        #[arg(long)]
        metric_size: Option<usize>,
        /// All bounds 0.
        #[arg(long)]
        zero: bool,
        #[arg(long)]
        dump: Option<PathBuf>,
    },
}

/// Data lines plus a summary; `failed` maps to exit 1.
struct Output {
    data: String,
    summary: Value,
    failed: bool,
}

impl Output {
    fn ok(data: String, summary: Value) -> Self {
        Output { data, summary, failed: false }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(3);
        }
    };
    let g = &cli.global;
    let result = run(&cli).and_then(|o| {
        match &g.out {
            Some(p) => write_text(p, &o.data)?,
            None => std::io::stdout().write_all(o.data.as_bytes()).map_err(|e| Error::Io(e.to_string()))?,
        }
        Ok(o)
    });
    match result {
        Ok(o) => {
            report(g.json, &o.summary);
            ExitCode::from(if o.failed { 1 } else { 0 })
        }
        Err(e) => {
            let code = e.exit_code();
            if g.json {
                eprint!("{}", json_line(&json!({"error": e.to_string(), "exit": code})));
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(code as u8)
        }
    }
}

fn report(as_json: bool, summary: &Value) {
    if summary.is_null() {
        return;
    }
    if as_json {
        eprint!("{}", json_line(summary));
    } else if let Value::Object(m) = summary {
        for (k, v) in m {
            eprintln!("{k}: {v}");
        }
    }
}

fn spec_or(g: &Global, fallback: fn() -> TypeSpec) -> Result<TypeSpec> {
    match &g.type_spec {
        Some(p) => read_type_spec(p),
        None => Ok(fallback()),
    }
}

fn top_level(g: &Global, spec: &TypeSpec) -> usize {
    g.levels.map_or(spec.top(), |l| l.hi)
}

fn scheme_for(spec: &TypeSpec, dump: Option<&Path>, k: usize) -> Result<SchemePrefix> {
    match dump {
        Some(p) => scheme_from_jsonl(spec, &read_text(p)?),
        None => omega_scheme_prefix(spec, k),
    }
}

fn lines<T: serde::Serialize>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|x| json_line(&x)).collect()
}

fn run(cli: &Cli) -> Result<Output> {
    let g = &cli.global;
    match &cli.cmd {
        Cmd::GenType { default_n } => {
            let base = match &g.type_spec {
                Some(p) => read_type_spec(p)?,
                None => TypeSpec::with_schedule(vec![LevelParams::base()], Schedule { default_n: *default_n, cursor: 0 })?,
            };
            let k = g.levels.map_or(base.top(), |l| l.hi);
            let spec = base.extended_to(k);
            Ok(Output::ok(json_line(&spec), json!({"levels": spec.top() + 1})))
        }
        Cmd::GenScheme => {
            let spec = spec_or(g, t4)?;
            let s = omega_scheme_prefix(&spec, top_level(g, &spec))?;
            let summary = json!({"blocks": s.block_count(), "per_level": s.summary()});
            Ok(Output::ok(scheme_to_jsonl(&s), summary))
        }
        Cmd::Metrics { dump } => {
            let spec = spec_or(g, t4)?;
            let k = top_level(g, &spec);
            let ctx = MetricContext::new(scheme_for(&spec, dump.as_deref(), k)?);
            let dom = ctx.scheme().domain().to_vec();
            let mut pairs = Vec::new();
            for (a, b) in dom.iter().tuple_combinations() {
                pairs.push(json!({"a": a, "b": b, "rho": ctx.rho(*a, *b)?, "delta": ctx.delta(*a, *b)?}));
            }
            let top = ctx.scheme().num_levels().saturating_sub(1);
            let mut xi = Vec::new();
            for a in &dom {
                for l in 0..=top {
                    xi.push(json!([a, l, ctx.xi(*a, l)?]));
                }
            }
            let summary = json!({"points": dom.len(), "pairs": pairs.len()});
            Ok(Output::ok(json_line(&json!({"pairs": pairs, "xi": xi})), summary))
        }
        Cmd::Capture { family, n, star, dump } => {
            let spec = spec_or(g, t4)?;
            let levels = g.levels.unwrap_or(Levels { lo: None, hi: spec.top() });
            let ctx = MetricContext::new(scheme_for(&spec, dump.as_deref(), levels.hi)?);
            let fam = parse_family(&read_text(family)?)?;
            for b in &fam {
                ctx.scheme().check_points(b)?;
            }
            let range = levels.lo.unwrap_or(1)..=levels.hi;
            let reports = search_captured(&ctx, &fam, *n, Star::parse(star)?, range)?;
            let summary = json!({"family": fam.len(), "reports": reports.len()});
            Ok(Output::ok(lines(&reports), summary))
        }
        Cmd::Extend { ground, gamma, ih1, c_seq } => extend(g, ground.as_deref(), gamma, ih1, c_seq.as_deref()),
        Cmd::Ad { dump } => {
            let spec = spec_or(g, t4)?;
            let k = top_level(g, &spec);
            let ctx = MetricContext::new(scheme_for(&spec, dump.as_deref(), k)?);
            let top = ctx.scheme().num_levels().saturating_sub(1);
            let dom = ctx.scheme().domain().to_vec();
            let mut out = String::new();
            for a in &dom {
                for l in 1..=top {
                    out += &json_line(&ad_piece(&ctx, *a, l)?);
                }
            }
            let mut failures = 0;
            for (a, b) in dom.iter().tuple_combinations() {
                let v = ad_intersection_bound(&ctx, *a, *b, top)?;
                failures += usize::from(!v.passed());
                out += &json_line(&json!({"alpha": a, "beta": b, "bound": v}));
            }
            Ok(Output { data: out, summary: json!({"points": dom.len(), "failures": failures}), failed: failures > 0 })
        }
        Cmd::Represent { poset, kind, s } => {
            let spec = spec_or(g, t4)?;
            let poset = match poset {
                Some(p) => FinitePoset::from_json(&read_text(p)?)?,
                None => poset_kind(kind)?,
            };
            let ctx = MetricContext::new(omega_scheme_prefix(&spec, spec.top())?);
            let k = g.levels.map_or(spec.top().saturating_sub(1), |l| l.hi);
            let rep = representation_check(&ctx, &poset, k)?;
            let mut out = lines(&rep.judgments);
            let mut failed = !rep.passed();
            if let Some(s) = s {
                let set: BTreeSet<usize> = s
                    .split(',')
                    .map(str::trim)
                    .filter(|x| !x.is_empty())
                    .map(|x| x.parse().map_err(|_| Error::Invalid(format!("bad element index {x:?}"))))
                    .collect::<Result<_>>()?;
                let sys = g_s_system(&ctx, &poset, set, k)?;
                failed |= !sys.steps.iter().all(|st| st.passed());
                out += &lines(&sys.steps);
            }
            Ok(Output { data: out, summary: json!({"phi": rep.phi, "passed": !failed}), failed })
        }
        Cmd::Entangled { realize } => {
            let spec = spec_or(g, t_e)?;
            let k = top_level(g, &spec);
            if k > ENTANGLED_BUDGET {
                return Err(Error::Invalid(format!("level {k} is over the entangled budget of {ENTANGLED_BUDGET}")));
            }
            let ctx = MetricContext::new(omega_scheme_prefix(&spec, k)?);
            let dom = ctx.scheme().domain().to_vec();
            let mut out = String::new();
            for a in &dom {
                out += &json_line(&entangled_f(&ctx, *a, k)?);
            }
            let mut failed = false;
            if let Some(t) = realize {
                let t = RealizationType::parse(t)?;
                let singletons: Vec<_> = dom.iter().map(|x| vec![*x]).collect();
                for r in search_captured(&ctx, &singletons, spec.n(k), Star::DELTA, k..=k)? {
                    let check = captured_realization_check(&ctx, &r, &t)?;
                    failed |= check.realized != t;
                    out += &json_line(&check);
                }
            }
            Ok(Output { data: out, summary: json!({"points": dom.len(), "levels": k}), failed })
        }
        Cmd::Metric { level_metrics, search, c, max_size, grid } => {
            if *search {
                let c = parse_q(c)?;
                let grid: Vec<Q> = grid.split(',').map(parse_q).collect::<Result<_>>()?;
                let outcome = finite_metric_search(c, *max_size, &grid)?;
                return Ok(Output::ok(json_line(&outcome), Value::Null));
            }
            let spec = spec_or(g, t4)?;
            let ctx = MetricContext::new(omega_scheme_prefix(&spec, top_level(g, &spec))?);
            let metrics = match level_metrics {
                Some(p) => parse_level_metrics(&spec, &read_text(p)?)?,
                None => LevelMetrics::discrete(&spec),
            };
            let dom = ctx.scheme().domain().to_vec();
            let mut matrix = Vec::new();
            for a in &dom {
                matrix.push(dom.iter().map(|b| scheme_metric(&ctx, &metrics, *a, *b)).collect::<Result<Vec<_>>>()?);
            }
            let mut out = String::new();
            for (i, j) in (0..dom.len()).tuple_combinations() {
                out += &json_line(&json!({"alpha": dom[i], "beta": dom[j], "d": matrix[i][j].to_string()}));
            }
            let axioms = FiniteMetric::new(matrix);
            let summary = json!({"points": dom.len(), "metric": axioms.is_ok(), "error": axioms.as_ref().err().map(ToString::to_string)});
            Ok(Output { data: out, summary, failed: axioms.is_err() })
        }
        Cmd::Verify { rep_levels, metric_size, zero, dump } => {
            if let Some(p) = dump {
                let spec = spec_or(g, t4)?;
                let r = scheme_dump_suite(&scheme_from_jsonl(&spec, &read_text(p)?)?);
                let failed = !r.passed;
                return Ok(Output { data: json_line(&r), summary: Value::Null, failed });
            }
            let mut cfg = if *zero { VerifyConfig::zero() } else { VerifyConfig::default() };
            if let Some(l) = g.levels {
                cfg.levels = l.hi;
            }
            cfg.horizon = g.horizon.unwrap_or(cfg.horizon);
            cfg.rep_levels = rep_levels.unwrap_or(cfg.rep_levels);
            cfg.metric_size = metric_size.unwrap_or(cfg.metric_size);
            cfg.seed = g.seed;
            let results = run_all(&cfg);
            let failed: Vec<_> = results.iter().filter(|r| !r.passed).map(|r| r.suite).collect();
            let summary = json!({"suites": results.len(), "failed": failed});
            Ok(Output { data: to_jsonl(&results), summary, failed: !failed.is_empty() })
        }
    }
}

fn extend(g: &Global, ground: Option<&Path>, gamma: &str, ih1: &[String], c_seq: Option<&Path>) -> Result<Output> {
    let spec = spec_or(g, t4)?;
    let ground = scheme_for(&spec, ground, top_level(g, &spec))?;
    let gamma = parse_ordinal(gamma)?;
    let instances = ih1.iter().map(|s| parse_ih1(s)).collect::<Result<Vec<_>>>()?;
    let forcing = Forcing::new(ground, gamma)?;
    let ext = extend_to_next_limit(&forcing, g.horizon.unwrap_or(6), &instances)?;
    let mut out = String::new();
    if let Some(p) = c_seq {
        let c = CSequence::from_json(&read_text(p)?)?;
        out += &json_line(&json!({"c_seq": c}));
    }
    for (i, p) in ext.chain.conditions.iter().enumerate() {
        out += &json_line(&json!({"step": i, "condition": p}));
    }
    out += &json_line(&json!({"met": ext.chain.met}));
    out += &scheme_to_jsonl(&ext.scheme);
    let generic_ok = ext.generic_part.check().passed();
    let summary = json!({"conditions": ext.chain.conditions.len(), "blocks": ext.scheme.block_count(), "generic_part_is_scheme": generic_ok});
    Ok(Output { data: out, summary, failed: !generic_ok })
}

fn parse_ih1(s: &str) -> Result<(OrdinalCode, Vec<OrdinalCode>)> {
    let (a, set) = s.split_once(':').ok_or_else(|| Error::Invalid(format!("--ih1 wants alpha:A, got {s:?}")))?;
    Ok((parse_ordinal(a)?, parse_ordinal_set(set)?))
}

fn parse_q(s: &str) -> Result<Q> {
    Q::from_str(s.trim()).map_err(|_| Error::Invalid(format!("bad rational {s:?}")))
}

fn poset_kind(kind: &str) -> Result<FinitePoset> {
    let bad = || Error::Invalid(format!("unknown poset kind {kind:?}"));
    match kind.split_once(':') {
        Some(("chain", n)) => Ok(FinitePoset::chain(n.parse().map_err(|_| bad())?)),
        Some(("antichain", n)) => Ok(FinitePoset::antichain(n.parse().map_err(|_| bad())?)),
        None if kind == "diamond" => Ok(FinitePoset::diamond()),
        _ => Err(bad()),
    }
}
