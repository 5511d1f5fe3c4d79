//! `vlab`: command-line front end for variable exponent Lebesgue space
//! computations — norms, modulars, essential ranges, disjoint sequences,
//! projections, series certificates, and DSS inclusion analysis.

mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use vlab_core::dss::{self, DssStatus};
use vlab_core::json as wire;
use vlab_core::modular::{luxemburg_norm, modular, PwFun};
use vlab_core::projection::{opnorm_lower_bound, ProjOp, ProjectionSpec};
use vlab_core::sequence::{build_gk, orlicz_psi_indicator};
use vlab_core::series;
use vlab_core::{corpus, Error, IntervalSet, SequenceExpr};

use report::{write_report, Report};

#[derive(Parser)]
#[command(name = "vlab", version, about = "variable exponent Lebesgue space lab")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Luxemburg norm of a function under an exponent.
    Norm {
        f: PathBuf,
        p: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Modular (integral of |f|^{p(t)}) with a certified error bound.
    Modular {
        f: PathBuf,
        p: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Essential range and bounds of an exponent.
    Range {
        p: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Decreasing rearrangement of a step function.
    Rearrange {
        f: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Normalized disjoint indicator family over given sets.
    Gk {
        sets: PathBuf,
        p: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Averaged power functions of the exponent over given sets.
    Psi {
        sets: PathBuf,
        p: PathBuf,
        #[arg(long, default_value_t = 99)]
        grid: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Apply a rank-per-set projection to a function.
    Project {
        spec: PathBuf,
        f: PathBuf,
        #[arg(long, default_value = "orthogonal")]
        op: String,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Operator-norm lower-bound sweep for the two-band projection family.
    Example24 {
        #[arg(long, default_value_t = 64)]
        kmax: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Certify convergence/divergence of a series, or re-validate a
    /// certificate against its terms.
    Series {
        terms: PathBuf,
        #[arg(long, default_value_t = 1)]
        n0: u64,
        #[arg(long)]
        recheck: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Decide DSS status of the inclusion L^{p(.)} -> L^{q(.)}.
    DssCheck {
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        q: PathBuf,
        #[arg(long)]
        x_gen: Option<PathBuf>,
        #[arg(long)]
        r_gen: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Re-validate the certificates/witnesses embedded in a dss-check report.
    DssRecheck {
        report_file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a built-in example instance (ejemp2, power-family, example24, all).
    Corpus {
        name: String,
        #[arg(long)]
        dss_check: bool,
        #[arg(long, default_value_t = 2.0)]
        r: f64,
        #[arg(long, default_value_t = 1.0)]
        q: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn eval_budget() -> usize {
    std::env::var("VLAB_EVAL_BUDGET")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(100_000)
}

/// Exit codes: 0 success/DSS, 1 NOT_DSS, 2 UNKNOWN, 3 input error,
/// 4 unsupported construct.
fn exit_for_error(e: &anyhow::Error) -> u8 {
    if let Some(core) = e.downcast_ref::<Error>() {
        if matches!(core, Error::Unsupported(_)) {
            return 4;
        }
    }
    3
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let argv: Vec<String> = std::env::args().collect();
    match run(cli, argv) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_for_error(&e))
        }
    }
}

fn load_json(path: &Path, rep: &mut Report) -> anyhow::Result<Value> {
    let bytes = std::fs::read(path)
        .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
    rep.digest_input(path, &bytes);
    let v = serde_json::from_slice(&bytes)
        .map_err(|e| anyhow::anyhow!("{}: line {}: {e}", path.display(), e.line()))?;
    Ok(v)
}

fn interval_sets_from_json(v: &Value) -> anyhow::Result<Vec<IntervalSet>> {
    let arr = v
        .as_array()
        .ok_or_else(|| anyhow::anyhow!("sets: expected an array of interval sets"))?;
    Ok(arr
        .iter()
        .map(wire::interval_set_from_json)
        .collect::<vlab_core::Result<Vec<_>>>()?)
}

fn emit(rep: Report, results: Value, out: Option<&Path>) -> anyhow::Result<()> {
    let full = rep.finish(results);
    if let Some(path) = out {
        write_report(path, &full)?;
    }
    Ok(())
}

fn run(cli: Cli, argv: Vec<String>) -> anyhow::Result<u8> {
    let mut rep = Report::new(argv);
    let budget = eval_budget();
    match cli.cmd {
        Cmd::Norm { f, p, report } => {
            let fv = wire::pwfun_from_json(&load_json(&f, &mut rep)?)?;
            let pv = wire::exponent_from_json(&load_json(&p, &mut rep)?)?;
            let value = luxemburg_norm(&fv, &pv, budget)?;
            println!("norm = {value}");
            let results = json!({"norm": {
                "value": value,
                "abs_error_bound": 1e-12 * value.max(1.0),
            }});
            emit(rep, results, report.as_deref())?;
            Ok(0)
        }
        Cmd::Modular { f, p, report } => {
            let fv = wire::pwfun_from_json(&load_json(&f, &mut rep)?)?;
            let pv = wire::exponent_from_json(&load_json(&p, &mut rep)?)?;
            let (value, err) = modular(&fv, &pv, budget)?;
            println!("modular = {value} (abs error <= {err:e})");
            let results = json!({"modular": {"value": value, "abs_error_bound": err}});
            emit(rep, results, report.as_deref())?;
            Ok(0)
        }
        Cmd::Range { p, report } => {
            let pv = wire::exponent_from_json(&load_json(&p, &mut rep)?)?;
            let range = pv.essential_range()?;
            println!(
                "p- = {}, p+ = {}, {} isolated values, {} segments",
                pv.p_minus(),
                pv.p_plus(),
                range.points().len(),
                range.intervals().len()
            );
            let results = json!({
                "p_minus": pv.p_minus(),
                "p_plus": pv.p_plus(),
                "points": range.points(),
                "intervals": range.intervals().iter().map(|(a, b)| json!([a, b])).collect::<Vec<_>>(),
            });
            emit(rep, results, report.as_deref())?;
            Ok(0)
        }
        Cmd::Rearrange { f, report } => {
            let fv = wire::step_from_json(&load_json(&f, &mut rep)?)?;
            let star = fv.decreasing_rearrangement()?;
            println!("rearranged into {} cells", star.cells().len());
            emit(rep, json!({"rearranged": wire::step_to_json(&star)}), report.as_deref())?;
            Ok(0)
        }
        Cmd::Gk { sets, p, report } => {
            let sv = interval_sets_from_json(&load_json(&sets, &mut rep)?)?;
            let pv = wire::exponent_from_json(&load_json(&p, &mut rep)?)?;
            let gs = build_gk(&sv, &pv)?;
            let mut mods = Vec::with_capacity(gs.len());
            for g in &gs {
                let (m, _) = modular(&PwFun::Step(g.clone()), &pv, budget)?;
                mods.push(m);
            }
            println!("built {} normalized functions", gs.len());
            let results = json!({
                "functions": gs.iter().map(wire::step_to_json).collect::<Vec<_>>(),
                "modulars": mods,
            });
            emit(rep, results, report.as_deref())?;
            Ok(0)
        }
        Cmd::Psi { sets, p, grid, csv, report } => {
            let sv = interval_sets_from_json(&load_json(&sets, &mut rep)?)?;
            let pv = wire::exponent_from_json(&load_json(&p, &mut rep)?)?;
            let mut rows = String::from("set,s,psi\n");
            let mut entries = Vec::new();
            for (i, set) in sv.iter().enumerate() {
                // construction already verifies convexity on a grid
                let psi = orlicz_psi_indicator(set, &pv)?;
                let convex = true;
                for j in 1..=grid {
                    let s = j as f64 / (grid as f64 + 1.0);
                    rows.push_str(&format!("{i},{s},{}\n", psi.eval(s)));
                }
                entries.push(json!({
                    "terms": psi.terms().iter().map(|(c, e)| json!([c, e])).collect::<Vec<_>>(),
                    "convex": convex,
                }));
            }
            if let Some(path) = &csv {
                std::fs::write(path, rows)?;
            }
            println!("evaluated {} averaged power functions", entries.len());
            emit(rep, json!({"psi": entries}), report.as_deref())?;
            Ok(0)
        }
        Cmd::Project { spec, f, op, report } => {
            let sj = load_json(&spec, &mut rep)?;
            let sm = sj
                .as_object()
                .ok_or_else(|| anyhow::anyhow!("projection spec: expected an object"))?;
            let sets = interval_sets_from_json(
                sm.get("sets")
                    .ok_or_else(|| anyhow::anyhow!("projection spec: missing \"sets\""))?,
            )?;
            let pv = wire::exponent_from_json(
                sm.get("p")
                    .ok_or_else(|| anyhow::anyhow!("projection spec: missing \"p\""))?,
            )?;
            let pspec = ProjectionSpec::new(sets, pv)?;
            let fv = wire::step_from_json(&load_json(&f, &mut rep)?)?;
            let which = match op.as_str() {
                "orthogonal" => ProjOp::Orthogonal,
                "averaging" => ProjOp::Averaging,
                other => anyhow::bail!("unknown projection op \"{other}\""),
            };
            let out = pspec.apply(which, &fv)?;
            let nf = luxemburg_norm(&PwFun::Step(fv), pspec.exponent(), budget)?;
            let np = luxemburg_norm(&PwFun::Step(out.clone()), pspec.exponent(), budget)?;
            println!("norm ratio = {}", if nf > 0.0 { np / nf } else { f64::NAN });
            let results = json!({
                "projected": wire::step_to_json(&out),
                "input_norm": nf,
                "output_norm": np,
            });
            emit(rep, results, report.as_deref())?;
            Ok(0)
        }
        Cmd::Example24 { kmax, csv, report } => {
            let (table, rows) = example24_sweep(kmax, budget)?;
            if let Some(path) = &csv {
                std::fs::write(path, rows)?;
            }
            for (k, b) in &table {
                println!("K = {k:3}  lower bound = {b}");
            }
            let results = json!({"table": table.iter().map(|(k, b)| json!([k, b])).collect::<Vec<_>>()});
            emit(rep, results, report.as_deref())?;
            Ok(0)
        }
        Cmd::Series { terms, n0, recheck, report } => {
            let tv = wire::seq_expr_from_json(&load_json(&terms, &mut rep)?)?;
            if let Some(cert_path) = recheck {
                let cert = wire::series_cert_from_json(&load_json(&cert_path, &mut rep)?)?;
                let ok = series::recheck(&tv, &cert)?;
                println!("recheck: {}", if ok { "valid" } else { "INVALID" });
                emit(rep, json!({"recheck_valid": ok}), report.as_deref())?;
                return Ok(if ok { 0 } else { 2 });
            }
            let v = series::certify(&tv, n0);
            let status = match v.status {
                series::SeriesStatus::Converges => "CONVERGES",
                series::SeriesStatus::Diverges => "DIVERGES",
                series::SeriesStatus::Unknown => "UNKNOWN",
            };
            println!("series: {status}");
            let results = json!({
                "status": status,
                "certificate": v.certificate.as_ref().map(wire::series_cert_to_json),
                "partial_sum": v.partial_sum,
                "tail_bound": v.tail_bound,
            });
            emit(rep, results, report.as_deref())?;
            Ok(if v.status == series::SeriesStatus::Unknown { 2 } else { 0 })
        }
        Cmd::DssCheck { p, q, x_gen, r_gen, seed, report } => {
            let pv = wire::exponent_from_json(&load_json(&p, &mut rep)?)?;
            let qv = wire::exponent_from_json(&load_json(&q, &mut rep)?)?;
            let prob = dss::EmbeddingProblem::new(pv, qv);
            let x_gens = match x_gen {
                Some(path) => vec![wire::seq_expr_from_json(&load_json(&path, &mut rep)?)?],
                None => vec![],
            };
            let r_gens = match r_gen {
                Some(path) => vec![wire::seq_expr_from_json(&load_json(&path, &mut rep)?)?],
                None => vec![],
            };
            let (results, code) = dss_check_results(&prob, &x_gens, &r_gens, seed)?;
            emit(rep, results, report.as_deref())?;
            Ok(code)
        }
        Cmd::DssRecheck { report_file, seed } => {
            let doc = load_json(&report_file, &mut rep)?;
            let ok = recheck_report(&doc, seed)?;
            println!("dss-recheck: {}", if ok { "all valid" } else { "INVALID" });
            Ok(if ok { 0 } else { 2 })
        }
        Cmd::Corpus { name, dss_check, r, q, seed, csv, report } => {
            run_corpus(&name, dss_check, r, q, seed, csv.as_deref(), report.as_deref(), rep, budget)
        }
    }
}

fn dss_check_results(
    prob: &dss::EmbeddingProblem<f64>,
    x_gens: &[SequenceExpr],
    r_gens: &[SequenceExpr],
    seed: u64,
) -> anyhow::Result<(Value, u8)> {
    let verdict = dss::dss_verdict(prob, x_gens, r_gens, seed)?;
    println!("verdict: {}", wire::status_str(verdict.status));
    for d in &verdict.diagnostics {
        println!("  - {d}");
    }
    let code = match verdict.status {
        DssStatus::Dss => 0,
        DssStatus::NotDss => 1,
        DssStatus::Unknown => 2,
    };
    let results = json!({
        "problem": wire::problem_to_json(prob),
        "seed": seed,
        "verdict": wire::verdict_to_json(&verdict),
    });
    Ok((results, code))
}

/// Re-validates every certificate/witness found in a report document
/// (either a single dss-check result or a full-corpus bundle).
fn recheck_report(doc: &Value, seed: u64) -> anyhow::Result<bool> {
    let results = doc
        .get("results")
        .ok_or_else(|| anyhow::anyhow!("report: missing \"results\""))?;
    let mut found = 0usize;
    let mut all_ok = true;
    for entry in dss_entries(results) {
        let prob = wire::problem_from_json(
            entry
                .get("problem")
                .ok_or_else(|| anyhow::anyhow!("report entry: missing \"problem\""))?,
        )?;
        let verdict = entry
            .get("verdict")
            .ok_or_else(|| anyhow::anyhow!("report entry: missing \"verdict\""))?;
        if let Some(cert) = verdict.get("certificate").filter(|c| !c.is_null()) {
            found += 1;
            let cert = wire::dss_cert_from_json(cert)?;
            let ok = dss::recheck_certificate(&prob, &cert)?;
            println!("certificate: {}", if ok { "valid" } else { "INVALID" });
            all_ok &= ok;
        }
        if let Some(wit) = verdict.get("witness").filter(|w| !w.is_null()) {
            found += 1;
            let wit = wire::witness_from_json(wit)?;
            let ok = dss::validate_witness(&prob, &wit, seed)?;
            println!("witness: {}", if ok { "valid" } else { "INVALID" });
            all_ok &= ok;
        }
    }
    if found == 0 {
        anyhow::bail!("report contains no certificates or witnesses");
    }
    Ok(all_ok)
}

/// Collects every object holding a problem/verdict pair, at any nesting
/// depth (full-corpus bundles group entries by instance).
fn dss_entries(results: &Value) -> Vec<&Value> {
    let mut out = Vec::new();
    if results.get("verdict").is_some() {
        out.push(results);
    } else if let Some(m) = results.as_object() {
        for v in m.values() {
            out.extend(dss_entries(v));
        }
    }
    out
}

fn example24_sweep(kmax: usize, budget: usize) -> anyhow::Result<(Vec<(usize, f64)>, String)> {
    let p = corpus::example24_exponent()?;
    let mut table = Vec::new();
    let mut rows = String::from("K,lower_bound\n");
    for k in [4usize, 8, 16, 32, 64] {
        if k > kmax {
            break;
        }
        let fam = corpus::example24_family(k)?;
        let spec = ProjectionSpec::new(fam.sets.clone(), p.clone())?;
        let family = vlab_core::projection::two_band_test_family(&fam)?;
        let bound = opnorm_lower_bound(&spec, &family, ProjOp::Orthogonal, budget)?;
        rows.push_str(&format!("{k},{bound}\n"));
        table.push((k, bound));
    }
    Ok((table, rows))
}

#[allow(clippy::too_many_arguments)]
fn run_corpus(
    name: &str,
    dss_check: bool,
    r: f64,
    q: f64,
    seed: u64,
    csv: Option<&Path>,
    report_path: Option<&Path>,
    rep: Report,
    budget: usize,
) -> anyhow::Result<u8> {
    match name {
        "ejemp2" => {
            let prob = corpus::ejemp2_problem()?;
            let gens = vec![corpus::ejemp2_x_gen()];
            if dss_check {
                let (results, code) = dss_check_results(&prob, &gens, &[], seed)?;
                emit(rep, results, report_path)?;
                Ok(code)
            } else {
                let results = json!({
                    "problem": wire::problem_to_json(&prob),
                    "x_gen": wire::seq_expr_to_json(&gens[0]),
                });
                println!("materialized corpus entry \"ejemp2\"");
                emit(rep, results, report_path)?;
                Ok(0)
            }
        }
        "power-family" => {
            let prob = corpus::power_family_problem(r, q)?;
            if dss_check {
                let (results, code) = dss_check_results(&prob, &[], &[], seed)?;
                emit(rep, results, report_path)?;
                Ok(code)
            } else {
                println!("materialized corpus entry \"power-family\" (r = {r}, q = {q})");
                emit(rep, json!({"problem": wire::problem_to_json(&prob)}), report_path)?;
                Ok(0)
            }
        }
        "example24" => {
            let (table, rows) = example24_sweep(64, budget)?;
            if let Some(path) = csv {
                std::fs::write(path, &rows)?;
            }
            for (k, b) in &table {
                println!("K = {k:3}  lower bound = {b}");
            }
            let results = json!({
                "table": table.iter().map(|(k, b)| json!([k, b])).collect::<Vec<_>>(),
            });
            emit(rep, results, report_path)?;
            Ok(0)
        }
        "all" => {
            let ejemp = corpus::ejemp2_problem()?;
            let (ejemp_res, _) = dss_check_results(&ejemp, &[corpus::ejemp2_x_gen()], &[], seed)?;
            let mut power_res = serde_json::Map::new();
            for rr in [1.0, 2.0, 3.0] {
                let prob = corpus::power_family_problem(rr, 1.0)?;
                let (res, _) = dss_check_results(&prob, &[], &[], seed)?;
                power_res.insert(format!("r{rr}"), res);
            }
            let (table, rows) = example24_sweep(64, budget)?;
            if let Some(path) = csv {
                std::fs::write(path, &rows)?;
            }
            let results = json!({
                "ejemp2": ejemp_res,
                "power-family": Value::Object(power_res),
                "example24": {
                    "table": table.iter().map(|(k, b)| json!([k, b])).collect::<Vec<_>>(),
                },
            });
            emit(rep, results, report_path)?;
            Ok(0)
        }
        other => Err(Error::UnknownCorpus(other.to_string()).into()),
    }
}
