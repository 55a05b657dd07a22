//! One function per CLI command. Each returns the CSV table, the JSON
//! report and the overall verdict; property violations carry
//! machine-readable witnesses in the JSON.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use ftl_core::disc::sample_disc;
use ftl_core::disc::ContainmentSpec;
use ftl_core::domain::DomainModel;
use ftl_core::io;
use ftl_core::kobayashi::{self, disc_family};
use ftl_core::renorm::suite::{find_suite, SuiteReport};
use ftl_core::rescale;
use ftl_core::rng;
use ftl_core::verify::{self, tau_bisection_oracle, Check};
use ftl_core::{FtlError, Result};
use serde_json::{json, Value};

use crate::report::{Cell, Csv};

pub type Tolerances = BTreeMap<String, f64>;

pub struct Outcome {
    pub csv: Csv,
    pub json: Value,
    pub all_ok: bool,
}

fn tol(tols: &Tolerances, name: &str, default: f64) -> f64 {
    tols.get(name).copied().unwrap_or(default)
}

fn load_domain(path: &str) -> Result<DomainModel> {
    let text = fs::read_to_string(path).map_err(|e| FtlError::Parse {
        file: path.to_string(),
        line: 0,
        msg: e.to_string(),
    })?;
    io::parse_domain(path, &text)
}

fn load_text(path: &str) -> Result<String> {
    fs::read_to_string(path).map_err(|e| FtlError::Parse {
        file: path.to_string(),
        line: 0,
        msg: e.to_string(),
    })
}

/// Resolves a domain path relative to the descriptor's directory when the
/// path does not exist as given.
fn resolve_domain_path(descriptor: &str, domain: &str) -> String {
    if Path::new(domain).exists() {
        return domain.to_string();
    }
    if let Some(parent) = Path::new(descriptor).parent() {
        let joined = parent.join(domain);
        if joined.exists() {
            return joined.to_string_lossy().into_owned();
        }
        // descriptors bundled under domains/ refer to "domains/<file>"
        if let Some(grand) = parent.parent() {
            let joined = grand.join(domain);
            if joined.exists() {
                return joined.to_string_lossy().into_owned();
            }
        }
    }
    domain.to_string()
}

fn checks_json(checks: &[Check]) -> Value {
    json!({
        "checks": checks,
        "violations": checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| {
                json!({
                    "invariant": c.name,
                    "value": c.value,
                    "threshold": c.threshold,
                    "witness": c.witness,
                })
            })
            .collect::<Vec<_>>(),
    })
}

fn checks_csv(checks: &[Check]) -> Csv {
    let mut csv = Csv::new(&["name", "value", "threshold", "pass"]);
    for c in checks {
        csv.row(&[
            Cell::Str(c.name.clone()),
            Cell::Num(c.value),
            Cell::Num(c.threshold),
            Cell::Bool(c.pass),
        ]);
    }
    csv
}

/// `tau`: closed form against the bisection oracle on the configured
/// domain; config is a domain file.
pub fn tau(config: &str, seed: u64, tols: &Tolerances) -> Result<Outcome> {
    let domain = load_domain(config)?;
    let rel_tol = tol(tols, "tau-rel", 1e-10);
    let samples = tol(tols, "samples", 1000.0) as usize;
    let mut csv = Csv::new(&[
        "sample", "w1_re", "w1_im", "w2_re", "w2_im", "eps", "tau", "tau_bisect", "rel_err",
    ]);
    let mut worst = 0.0f64;
    for i in 0..samples {
        let mut r = rng::stream(seed, "cli-tau", i as u64);
        let eta = domain.sample_interior(&mut r);
        let eps = rng::log_uniform(&mut r, 1e-6, 1.0);
        let closed = domain.tau(&eta, eps)?;
        let mixed = domain.poly().recentre(eta.w1).mixed_part();
        let oracle = tau_bisection_oracle(&mixed, eps);
        let rel = (closed - oracle).abs() / oracle;
        worst = worst.max(rel);
        csv.row(&[
            Cell::Int(i as i64),
            Cell::Num(eta.w1.re),
            Cell::Num(eta.w1.im),
            Cell::Num(eta.w2.re),
            Cell::Num(eta.w2.im),
            Cell::Num(eps),
            Cell::Num(closed),
            Cell::Num(oracle),
            Cell::Num(rel),
        ]);
    }
    let ok = worst <= rel_tol;
    let json = json!({
        "command": "tau",
        "domain": config,
        "samples": samples,
        "max_rel_err": worst,
        "tolerance": rel_tol,
        "ok": ok,
        "violations": if ok { json!([]) } else {
            json!([{"invariant": "tau/oracle-agreement", "value": worst, "threshold": rel_tol}])
        },
    });
    Ok(Outcome { csv, json, all_ok: ok })
}

/// `frame`: per-point bundles on random interior points with the gauge
/// invariants.
pub fn frame(config: &str, seed: u64, tols: &Tolerances) -> Result<Outcome> {
    let domain = load_domain(config)?;
    let samples = tol(tols, "samples", 1000.0) as usize;
    let mut csv = Csv::new(&[
        "sample", "eps", "eps_tilde", "tau", "rho_hat", "j_to_hat",
    ]);
    let mut worst_ratio = 0.0f64;
    let mut worst_rigid = 0.0f64;
    let mut worst_rho = 0.0f64;
    let mut worst_j = 0.0f64;
    for i in 0..samples {
        let mut r = rng::stream(seed, "cli-frame", i as u64);
        let eta = domain.sample_interior(&mut r);
        let f = domain.frame(&eta)?;
        let j_hat = f.j_to(&f.eta_hat);
        worst_ratio = worst_ratio.max(f.eps_tilde.abs() / f.eps);
        worst_rigid = worst_rigid.max((f.eps_tilde - f.eps).abs() / f.eps.max(1e-300));
        worst_rho = worst_rho.max(domain.rho(&f.eta_hat).abs());
        worst_j = worst_j.max((j_hat - 1.0).abs());
        csv.row(&[
            Cell::Int(i as i64),
            Cell::Num(f.eps),
            Cell::Num(f.eps_tilde),
            Cell::Num(f.tau),
            Cell::Num(domain.rho(&f.eta_hat)),
            Cell::Num(j_hat),
        ]);
    }
    let checks = vec![
        ("frame/eps-tilde-ratio", worst_ratio, 2.0),
        ("frame/rigid-equality", worst_rigid, 1e-12),
        ("frame/boundary-root", worst_rho, 1e-10),
        ("frame/j-to-hat-is-one", worst_j, 1e-12),
    ];
    let all_ok = checks.iter().all(|&(_, v, t)| v <= t);
    let json = json!({
        "command": "frame",
        "domain": config,
        "samples": samples,
        "ok": all_ok,
        "violations": checks
            .iter()
            .filter(|&&(_, v, t)| v > t)
            .map(|&(n, v, t)| json!({"invariant": n, "value": v, "threshold": t}))
            .collect::<Vec<_>>(),
    });
    Ok(Outcome { csv, json, all_ok })
}

/// `constants`: the pseudo-ball constants fit.
pub fn constants(config: &str, seed: u64, tols: &Tolerances) -> Result<Outcome> {
    let domain = load_domain(config)?;
    let samples = tol(tols, "samples", 13_000.0) as usize;
    let rep = domain.measure_catlin_constants(samples, seed)?;
    let mut csv = Csv::new(&["c0", "c1", "c2", "c3", "c4", "c5", "q_pairs"]);
    csv.row(&[
        Cell::Num(rep.c0),
        Cell::Num(rep.c1),
        Cell::Num(rep.c2),
        Cell::Num(rep.c3),
        Cell::Num(rep.c4),
        Cell::Num(rep.c5),
        Cell::Int(rep.q_pairs as i64),
    ]);
    let ok = rep.middle_counterexample.is_none();
    let json = json!({
        "command": "constants",
        "domain": config,
        "report": rep,
        "ok": ok,
        "violations": match rep.middle_counterexample {
            None => json!([]),
            Some(w) => json!([{
                "invariant": "constants/tau-sandwich",
                "witness": format!("eps={}, eps'={}, tau={} outside [{}, {}]",
                                   w.eps, w.eps_prime, w.tau, w.lower, w.upper),
            }]),
        },
    });
    Ok(Outcome { csv, json, all_ok: ok })
}

fn suite_outcome(report: SuiteReport) -> Outcome {
    let columns: Vec<&str> = report.table.columns.iter().map(|s| s.as_str()).collect();
    let mut csv = Csv::new(&columns);
    for row in &report.table.rows {
        let cells: Vec<Cell> = row.iter().map(|&v| Cell::Num(v)).collect();
        csv.row(&cells);
    }
    let all_ok = report.all_pass();
    let json = json!({
        "command": "renorm",
        "suite": report.suite,
        "verdicts": report.verdicts,
        "ok": all_ok,
        "violations": report.verdicts
            .iter()
            .filter(|v| !v.pass)
            .map(|v| json!({"invariant": v.name, "value": v.value, "witness": v.witness}))
            .collect::<Vec<_>>(),
    });
    Outcome { csv, json, all_ok }
}

/// `renorm`: run a named suite from its descriptor.
pub fn renorm(config: &str, seed: u64, _tols: &Tolerances) -> Result<Outcome> {
    let text = load_text(config)?;
    let desc = io::parse_suite(config, &text)?;
    let suite = find_suite(&desc.name).ok_or_else(|| FtlError::Parse {
        file: config.to_string(),
        line: 1,
        msg: format!("unknown suite `{}`", desc.name),
    })?;
    let mut cfg = suite.default_config(seed);
    if let Some(p) = desc.params {
        cfg.params = p;
    }
    if let Some(idx) = desc.indices {
        cfg.indices = idx;
    }
    Ok(suite_outcome(suite.run(&cfg)?))
}

/// `rescale`: limit of the rescaled polynomials along the descriptor's
/// sequence plus the indicator gap at the tail.
pub fn rescale_cmd(config: &str, _seed: u64, tols: &Tolerances) -> Result<Outcome> {
    let text = load_text(config)?;
    let desc = io::parse_experiment(config, &text)?;
    let domain = load_domain(&resolve_domain_path(config, &desc.domain_file))?;
    let etas = desc.sequence.points();
    let rep = rescale::limit_domain(&domain, &etas)?;
    let gap_tol = tol(tols, "hausdorff", 0.01);
    let tail = &etas[etas.len() - 1];
    let gap = rescale::hausdorff_gap(&domain, tail, &rep.poly, 1.5, 10)?;
    let brody = rescale::brody_hyperbolic(&rep.poly);

    let mut csv = Csv::new(&["index", "variation", "sup_norm"]);
    for row in &rep.table {
        csv.row(&[
            Cell::Int(row.index as i64),
            Cell::Num(row.variation),
            Cell::Num(row.sup_norm),
        ]);
    }
    let checks = vec![
        ("rescale/tail-variation", rep.tail_variation, 1e-6),
        (
            "rescale/limit-sup-norm",
            (rep.poly.sup_norm() - 1.0).abs(),
            1e-9,
        ),
        ("rescale/hausdorff-gap", gap, gap_tol),
        ("rescale/brody", if brody { 0.0 } else { 1.0 }, 0.0),
    ];
    let all_ok = checks.iter().all(|&(_, v, t)| v <= t);
    let json = json!({
        "command": "rescale",
        "domain": desc.domain_file,
        "limit_poly": rep.poly,
        "tail_variation": rep.tail_variation,
        "hausdorff_gap_tail": gap,
        "brody_hyperbolic": brody,
        "ok": all_ok,
        "violations": checks
            .iter()
            .filter(|&&(_, v, t)| v > t)
            .map(|&(n, v, t)| json!({"invariant": n, "value": v, "threshold": t}))
            .collect::<Vec<_>>(),
    });
    Ok(Outcome { csv, json, all_ok })
}

/// `normality`: rescaled polynomial discs along the sequence stay
/// uniformly bounded by the chain bound.
pub fn normality(config: &str, seed: u64, _tols: &Tolerances) -> Result<Outcome> {
    let text = load_text(config)?;
    let desc = io::parse_experiment(config, &text)?;
    let mut domain = load_domain(&resolve_domain_path(config, &desc.domain_file))?;
    if domain.constants.c5.is_none() {
        domain.calibrate(2000, seed ^ 0xe99)?;
    }
    let etas = desc.sequence.points();
    let spec = ContainmentSpec::default();
    let count = desc.disc_count.min(etas.len());
    let mut discs = Vec::with_capacity(count);
    for (i, eta) in etas.iter().rev().take(count).rev().enumerate() {
        let mut r = rng::stream(desc.disc_seed ^ seed, "cli-normality", i as u64);
        let disc = sample_disc(&domain, *eta, desc.disc_degree, &mut r, &spec)
            .ok_or(FtlError::NoAdmissibleDisc)?;
        discs.push((i as u32, disc));
    }
    let rep = rescale::normality_experiment(&domain, &discs, desc.compact_box, desc.compact_grid)?;
    let mut csv = Csv::new(&["index", "sup", "chain_len", "skipped"]);
    for row in &rep.rows {
        csv.row(&[
            Cell::Int(row.index as i64),
            Cell::Num(row.sup),
            Cell::Int(row.max_chain_len as i64),
            Cell::Bool(row.skipped),
        ]);
    }
    let json = json!({
        "command": "normality",
        "domain": desc.domain_file,
        "sup_overall": rep.sup_overall,
        "bound": rep.bound,
        "p_max": rep.p_max,
        "ok": rep.normal,
        "violations": if rep.normal { json!([]) } else {
            json!([{"invariant": "normality/sup-vs-bound", "value": rep.sup_overall, "threshold": rep.bound}])
        },
    });
    Ok(Outcome {
        csv,
        json,
        all_ok: rep.normal,
    })
}

/// `pba`: the disc-separation probe; config is a domain file.
pub fn pba(config: &str, seed: u64, tols: &Tolerances) -> Result<Outcome> {
    let domain = load_domain(config)?;
    let k = tol(tols, "pba-k", 1.0);
    let trials = tol(tols, "pba-trials", 30.0) as usize;
    let rep = rescale::pba_probe(&domain, k, trials, seed)?;
    let mut csv = Csv::new(&["r0_hat", "c_hat", "pairs_tested", "violations"]);
    csv.row(&[
        Cell::Num(rep.r0_hat),
        Cell::Num(rep.c_hat),
        Cell::Int(rep.pairs_tested as i64),
        Cell::Int(rep.violations.len() as i64),
    ]);
    let ok = rep.r0_hat >= tol(tols, "pba-r0", 0.05) && rep.c_hat >= tol(tols, "pba-c", 0.02);
    let json = json!({
        "command": "pba",
        "domain": config,
        "report": rep,
        "ok": ok,
        "violations": if ok { json!([]) } else {
            json!([{"invariant": "pba/ladder-pair", "value": [rep.r0_hat, rep.c_hat]}])
        },
    });
    Ok(Outcome { csv, json, all_ok: ok })
}

/// `kobayashi`: the metric comparison sweep from its descriptor.
pub fn kobayashi_cmd(config: &str, _seed: u64, tols: &Tolerances) -> Result<Outcome> {
    let text = load_text(config)?;
    let desc = io::parse_sweep(config, &text)?;
    let domain = load_domain(&resolve_domain_path(config, &desc.domain_file))?;
    let family = disc_family(&desc.family).ok_or_else(|| FtlError::Parse {
        file: config.to_string(),
        line: 1,
        msg: format!("unknown disc family `{}`", desc.family),
    })?;
    let deltas = kobayashi::log_grid(desc.delta_min, desc.delta_max, desc.count);
    let rep = kobayashi::metric_ratio_sweep(&domain, &deltas, &desc.direction, family.as_ref())?;
    let mut csv = Csv::new(&["delta", "mVal", "kUpper", "kLower", "ratio"]);
    for row in &rep.rows {
        csv.row(&[
            Cell::Num(row.delta),
            Cell::Num(row.m_val),
            Cell::Num(row.k_upper),
            Cell::Num(row.k_lower),
            Cell::Num(row.ratio),
        ]);
    }
    let factor = (rep.ratio_max / rep.ratio_min).max(rep.ratio_max.max(1.0 / rep.ratio_min));
    let ok = factor <= tol(tols, "ratio-factor", 10.0);
    let json = json!({
        "command": "kobayashi",
        "domain": desc.domain_file,
        "family": desc.family,
        "slope_m": rep.slope_m,
        "slope_upper": rep.slope_upper,
        "ratio_min": rep.ratio_min,
        "ratio_max": rep.ratio_max,
        "a_hat": rep.a_hat,
        "ok": ok,
        "violations": if ok { json!([]) } else {
            json!([{"invariant": "kobayashi/ratio-factor", "value": factor, "threshold": 10.0}])
        },
    });
    Ok(Outcome { csv, json, all_ok: ok })
}

/// `verify-all`: the whole battery. Wall-clock figures are deliberately
/// excluded so the outputs are byte-identical across runs.
pub fn verify_all(seed: u64, threads: usize) -> Result<Outcome> {
    type Group = fn(u64) -> Result<Vec<Check>>;
    let groups: Vec<(&str, Group)> = vec![
        ("tau-oracle", verify::check_tau_oracle),
        ("sandwich", verify::check_sandwich),
        ("eps-tilde", verify::check_eps_tilde),
        ("constants", verify::check_constants_stability),
        ("chains", verify::check_chains),
        ("renorm", |s| verify::check_renorm_suites(s, None)),
        ("schwarz-claim", |s| verify::check_schwarz_claim(s, 200)),
        ("pba", verify::check_pba),
        ("normality", verify::check_normality),
        ("limit", verify::check_limit_domain),
        ("kobayashi", verify::check_kobayashi),
    ];
    let results: Vec<Result<Vec<Check>>> = if threads > 1 {
        use rayon::prelude::*;
        groups.par_iter().map(|(_, f)| f(seed)).collect()
    } else {
        groups.iter().map(|(_, f)| f(seed)).collect()
    };
    let mut checks = Vec::new();
    for r in results {
        checks.extend(r?);
    }
    let all_ok = checks.iter().all(|c| c.pass);
    let json = json!({
        "command": "verify-all",
        "seed": seed,
        "ok": all_ok,
    });
    let mut json = json;
    json.as_object_mut()
        .unwrap()
        .extend(checks_json(&checks).as_object().unwrap().clone());
    Ok(Outcome {
        csv: checks_csv(&checks),
        json,
        all_ok,
    })
}

