//! The named property battery: every check the CLI `verify-all` command
//! and the acceptance suite run, with its measured value, threshold and
//! verdict. All sampling flows from the run seed through per-item derived
//! streams, so the battery is reproducible bit for bit.

use num_complex::Complex64;
use serde::Serialize;

use crate::disc::AnalyticDisc;
use crate::domain::{DomainModel, PointC2};
use crate::error::Result;
use crate::kobayashi::{self, disc_family, TangentVec};
use crate::poly::MixedPoly;
use crate::renorm::suite::find_suite;
use crate::rescale;
use crate::rng;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
    pub witness: Option<String>,
}

impl Check {
    fn le(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            pass: value <= threshold,
            witness: None,
        }
    }

    fn ge(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            pass: value >= threshold,
            witness: None,
        }
    }

    fn flag(name: impl Into<String>, pass: bool) -> Self {
        Self {
            name: name.into(),
            value: if pass { 1.0 } else { 0.0 },
            threshold: 1.0,
            pass,
            witness: None,
        }
    }

    fn with_witness(mut self, w: impl Into<String>) -> Self {
        self.witness = Some(w.into());
        self
    }
}

/// The bundled domains the battery runs on.
pub fn bundled_domains() -> Vec<(&'static str, DomainModel)> {
    vec![
        ("egg1", DomainModel::egg(1, 1.0)),
        ("egg2", DomainModel::egg(2, 1.0)),
        ("egg3", DomainModel::egg(3, 1.0)),
        ("two-term", DomainModel::two_term(1.0)),
        ("cross", DomainModel::cross_term(1.0)),
    ]
}

/// Independent reference for tau: bisection directly on the defining
/// equation || (1/eps) P_eta(tau .) ||_inf = 1. Kept free of the closed
/// form it cross-checks.
pub fn tau_bisection_oracle(mixed: &MixedPoly, eps: f64) -> f64 {
    let norm_at = |t: f64| -> f64 {
        mixed
            .terms()
            .filter(|&(j, k, _)| j >= 1 && k >= 1)
            .map(|(j, k, a)| a.norm() * t.powi((j + k) as i32) / eps)
            .fold(0.0, f64::max)
    };
    let mut hi = 1.0;
    while norm_at(hi) < 1.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if norm_at(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Closed-form tau against the bisection oracle over random
/// (domain, eta, eps) triples.
pub fn check_tau_oracle(seed: u64) -> Result<Vec<Check>> {
    let domains = bundled_domains();
    let per_domain = 250usize;
    let mut worst = 0.0f64;
    let mut triples = 0usize;
    for (di, (_, d)) in domains.iter().enumerate() {
        for i in 0..per_domain {
            let mut r = rng::stream(seed, "tau-oracle", (di * per_domain + i) as u64);
            let eta = d.sample_interior(&mut r);
            let eps = rng::log_uniform(&mut r, 1e-6, 1.0);
            let closed = d.tau(&eta, eps)?;
            let mixed = d.poly().recentre(eta.w1).mixed_part();
            let oracle = tau_bisection_oracle(&mixed, eps);
            worst = worst.max((closed - oracle).abs() / oracle);
            triples += 1;
        }
    }
    Ok(vec![
        Check::le("tau-oracle/max-rel-err", worst, 1e-10),
        Check::ge("tau-oracle/triples", triples as f64, 1000.0),
    ])
}

/// The exact sandwich (eps/eps')^(1/2) tau(eta,eps') <= tau(eta,eps)
/// <= (eps/eps')^(1/m) tau(eta,eps') over sampled triples.
pub fn check_sandwich(seed: u64) -> Result<Vec<Check>> {
    let domains = bundled_domains();
    let per_domain = 2500usize;
    let mut violations = 0usize;
    let mut witness = None;
    let mut triples = 0usize;
    for (di, (name, d)) in domains.iter().enumerate() {
        let m = d.m() as f64;
        for i in 0..per_domain {
            let mut r = rng::stream(seed, "sandwich", (di * per_domain + i) as u64);
            let eta = d.sample_interior(&mut r);
            let eps_hi = rng::log_uniform(&mut r, 1e-6, 1.0);
            let eps_lo = rng::log_uniform(&mut r, 1e-6 * eps_hi, eps_hi);
            let tau_hi = d.tau(&eta, eps_hi)?;
            let tau_lo = d.tau(&eta, eps_lo)?;
            let ratio = eps_lo / eps_hi;
            let lower = ratio.sqrt() * tau_hi;
            let upper = ratio.powf(1.0 / m) * tau_hi;
            triples += 1;
            if tau_lo < lower * (1.0 - 1e-9) || tau_lo > upper * (1.0 + 1e-9) {
                violations += 1;
                witness.get_or_insert(format!(
                    "{name}: eta=({},{}), eps={eps_lo}, eps'={eps_hi}, tau={tau_lo}, [{lower}, {upper}]",
                    eta.w1, eta.w2
                ));
            }
        }
    }
    let mut c = Check::le("sandwich/violations", violations as f64, 0.0);
    if let Some(w) = witness {
        c = c.with_witness(w);
    }
    Ok(vec![
        c,
        Check::ge("sandwich/triples", triples as f64, 10_000.0),
    ])
}

/// |eps_tilde| <= 2 eps on random interior points; exact equality on
/// rigid models.
pub fn check_eps_tilde(seed: u64) -> Result<Vec<Check>> {
    let domains = bundled_domains();
    let per_domain = 250usize;
    let mut worst_ratio = 0.0f64;
    let mut worst_rigid = 0.0f64;
    let mut points = 0usize;
    for (di, (_, d)) in domains.iter().enumerate() {
        for i in 0..per_domain {
            let mut r = rng::stream(seed, "eps-tilde", (di * per_domain + i) as u64);
            let eta = d.sample_interior(&mut r);
            let f = d.frame(&eta)?;
            worst_ratio = worst_ratio.max(f.eps_tilde.abs() / f.eps);
            worst_rigid = worst_rigid.max((f.eps_tilde - f.eps).abs() / f.eps.max(1e-300));
            points += 1;
        }
    }
    Ok(vec![
        Check::le("eps-tilde/max-abs-ratio", worst_ratio, 2.0),
        Check::le("eps-tilde/max-rigid-deviation", worst_rigid, 1e-12),
        Check::ge("eps-tilde/points", points as f64, 1000.0),
    ])
}

/// Fitted pseudo-ball constants: finite, stable under sample doubling,
/// no exact-inequality counterexample.
pub fn check_constants_stability(seed: u64) -> Result<Vec<Check>> {
    let d = DomainModel::egg(1, 1.0);
    let base = 13_000usize;
    let tuples = d.sample_constant_tuples(2 * base, seed);
    let half = d.measure_constants_on(&tuples[..base])?;
    let full = d.measure_constants_on(&tuples)?;
    let drift = |a: f64, b: f64| (b - a).abs() / a.max(1e-300);
    let mut checks = vec![
        Check::le("constants/c2-drift", drift(half.c2, full.c2), 0.05),
        Check::le("constants/c3-drift", drift(half.c3, full.c3), 0.05),
        Check::le("constants/c4-drift", drift(half.c4, full.c4), 0.05),
        Check::flag(
            "constants/finite",
            half.c2.is_finite() && half.c3.is_finite() && half.c4.is_finite(),
        ),
        Check::ge("constants/admissible-pairs", half.q_pairs as f64, 10_000.0),
    ];
    let mut cx = Check::le(
        "constants/middle-counterexamples",
        if full.middle_counterexample.is_some() {
            1.0
        } else {
            0.0
        },
        0.0,
    );
    if let Some(w) = full.middle_counterexample {
        cx = cx.with_witness(format!(
            "eps={}, eps'={}, tau={} outside [{}, {}]",
            w.eps, w.eps_prime, w.tau, w.lower, w.upper
        ));
    }
    checks.push(cx);
    Ok(checks)
}

/// Draws a random chain of the requested number of links, each link
/// verified J < 1, scaled so the engulfing certificate applies.
fn sample_chain(
    domain: &DomainModel,
    links: usize,
    cp: f64,
    rng_: &mut rand_chacha::ChaCha8Rng,
) -> Option<Vec<PointC2>> {
    let eps0 = domain.constants.eps0;
    let delta_top = (0.5 * eps0 / cp).min(1e-3);
    let delta = rng::log_uniform(rng_, 1e-7_f64.min(delta_top / 10.0), delta_top);
    let mut q = PointC2::new(Complex64::ZERO, Complex64::new(-delta, 0.0));
    let mut chain = vec![q];
    for _ in 0..links {
        let f = domain.frame(&q).ok()?;
        let v1 = rng::complex_in_disc(rng_, 0.4) * f.tau;
        let v2 = rng::complex_in_disc(rng_, 0.4) * f.eps;
        let cand = PointC2::new(
            q.w1 + v1,
            q.w2 + v2 - Complex64::new(0.1 * f.eps, 0.0),
        );
        if !domain.is_interior(&cand) || !domain.contains_in_box(&cand) {
            return None;
        }
        if domain.j_func(&q, &cand).ok()? >= 1.0 {
            return None;
        }
        chain.push(cand);
        q = cand;
    }
    Some(chain)
}

/// Random admissible chains (length <= 5) on the egg domains: every
/// dilated endpoint must land inside C(p) D^2.
pub fn check_chains(seed: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let mut total = 0usize;
    for k in [1u32, 2, 3] {
        let mut egg = DomainModel::egg(k, 1.0);
        egg.calibrate(2000, seed ^ 0xe99)?;
        let c5 = egg.constants.c5.unwrap();
        let target = 334usize;
        let mut ok = 0usize;
        let mut tested = 0usize;
        let mut attempt = 0u64;
        while tested < target && attempt < 60_000 {
            let mut r = rng::stream(seed, "chains", (k as u64) << 32 | attempt);
            attempt += 1;
            let links = (attempt % 5) as usize + 1;
            let cp = 3.0 * c5.powi(links as i32 - 1);
            let Some(chain) = sample_chain(&egg, links, cp, &mut r) else {
                continue;
            };
            match egg.chain_engulf(&chain) {
                Ok(cert) => {
                    tested += 1;
                    if cert.ok {
                        ok += 1;
                    }
                }
                Err(_) => continue,
            }
        }
        total += tested;
        checks.push(Check::ge(
            format!("chains/egg{k}-ok-rate"),
            if tested == 0 {
                0.0
            } else {
                ok as f64 / tested as f64
            },
            1.0,
        ));
    }
    checks.push(Check::ge("chains/count", total as f64, 1000.0));
    Ok(checks)
}

/// The renormalization suites on the sphere sequences.
pub fn check_renorm_suites(seed: u64, indices: Option<Vec<u32>>) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for name in ["zalcman-nz", "zalcman-exp"] {
        let suite = find_suite(name).expect("builtin suite");
        let mut cfg = suite.default_config(seed);
        if let Some(idx) = &indices {
            cfg.indices = idx.clone();
        }
        let report = suite.run(&cfg)?;
        for v in report.verdicts {
            checks.push(Check {
                name: format!("renorm/{}", v.name),
                value: v.value,
                threshold: f64::NAN,
                pass: v.pass,
                witness: v.witness,
            });
        }
    }
    Ok(checks)
}

/// The Schwarz-property claim for discs into the egg domain with the
/// clamped boundary parameters.
pub fn check_schwarz_claim(seed: u64, discs: usize) -> Result<Vec<Check>> {
    let suite = find_suite("catlin-discs").expect("builtin suite");
    let mut cfg = suite.default_config(seed);
    cfg.indices = (0..discs as u32).collect();
    let report = suite.run(&cfg)?;
    Ok(report
        .verdicts
        .into_iter()
        .map(|v| Check {
            name: format!("schwarz-claim/{}", v.name),
            value: v.value,
            threshold: f64::NAN,
            pass: v.pass,
            witness: v.witness,
        })
        .collect())
}

/// The probe for the disc-separation lemma on every bundled domain.
pub fn check_pba(seed: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for (name, d) in bundled_domains() {
        let rep = rescale::pba_probe(&d, 1.0, 30, seed ^ 0x9ba)?;
        checks.push(Check::ge(format!("pba/{name}-r0"), rep.r0_hat, 0.05));
        checks.push(Check::ge(format!("pba/{name}-c"), rep.c_hat, 0.02));
        checks.push(Check::ge(
            format!("pba/{name}-pairs"),
            rep.pairs_tested as f64,
            10_000.0,
        ));
        checks.push(Check::le(
            format!("pba/{name}-violations-at-pair"),
            rep.violations.iter().filter(|v| v.r0 <= rep.r0_hat).count() as f64,
            0.0,
        ));
    }
    Ok(checks)
}

/// Normality of the rescaled disc families on the unit egg.
pub fn check_normality(seed: u64) -> Result<Vec<Check>> {
    let mut egg = DomainModel::egg(1, 1.0);
    egg.calibrate(2000, seed ^ 0xe99)?;
    let mut checks = Vec::new();
    for (fam_name, quad) in [("affine", false), ("quadratic", true)] {
        let discs: Vec<(u32, AnalyticDisc)> = (1..=200u32)
            .map(|n| {
                let eta = PointC2::new(Complex64::ZERO, Complex64::new(-0.02 / n as f64, 0.0));
                let frame = egg.frame(&eta).expect("interior");
                let c1 = vec![eta.w1, Complex64::new(0.5 * frame.tau, 0.0)];
                let c2 = if quad {
                    vec![
                        eta.w2,
                        Complex64::ZERO,
                        Complex64::new(0.3 * frame.eps, 0.0),
                    ]
                } else {
                    vec![eta.w2]
                };
                (n, AnalyticDisc { c1, c2 })
            })
            .collect();
        let rep = rescale::normality_experiment(&egg, &discs, 0.5, 24)?;
        checks.push(Check::le(
            format!("normality/{fam_name}-sup-vs-bound"),
            rep.sup_overall,
            rep.bound,
        ));
        checks.push(Check::ge(
            format!("normality/{fam_name}-indices"),
            rep.rows.iter().filter(|r| !r.skipped).count() as f64,
            195.0,
        ));
    }
    Ok(checks)
}

/// Limit of the rescaled polynomials on the two-term domain, hyperbolicity
/// of the limit, and the indicator gap at the tail.
pub fn check_limit_domain(_seed: u64) -> Result<Vec<Check>> {
    let d = DomainModel::two_term(1.0);
    let etas: Vec<PointC2> = (1..=2000)
        .map(|n| PointC2::new(Complex64::ZERO, Complex64::new(-1.0 / n as f64, 0.0)))
        .collect();
    let rep = rescale::limit_domain(&d, &etas)?;
    let mut gap_worst = 0.0f64;
    for n in [1000usize, 1500, 2000] {
        let eta = PointC2::new(Complex64::ZERO, Complex64::new(-1.0 / n as f64, 0.0));
        let gap = rescale::hausdorff_gap(&d, &eta, &rep.poly, 1.5, 10)?;
        gap_worst = gap_worst.max(gap);
    }
    Ok(vec![
        Check::le("limit/tail-variation", rep.tail_variation, 1e-6),
        Check::le(
            "limit/sup-norm-deviation",
            (rep.poly.sup_norm() - 1.0).abs(),
            1e-9,
        ),
        Check::flag("limit/brody-hyperbolic", rescale::brody_hyperbolic(&rep.poly)),
        Check::le("limit/hausdorff-gap-tail", gap_worst, 0.01),
    ])
}

/// Metric sweep slopes and the upper/gauge ratio on the egg domains.
pub fn check_kobayashi(_seed: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let deltas = kobayashi::log_grid(1e-4, 1e-1, 13);
    let family = disc_family("affine+quad").expect("registered family");
    for k in [1u32, 2, 3] {
        let egg = DomainModel::egg(k, 1.0);
        let tangential = TangentVec::new(Complex64::new(1.0, 0.0), Complex64::ZERO);
        let normal = TangentVec::new(Complex64::ZERO, Complex64::new(1.0, 0.0));
        let want_tan = -1.0 / (2.0 * k as f64);

        let rep = kobayashi::metric_ratio_sweep(&egg, &deltas, &tangential, family.as_ref())?;
        checks.push(Check::le(
            format!("kobayashi/egg{k}-slope-m-tangential"),
            (rep.slope_m - want_tan).abs(),
            0.01,
        ));
        checks.push(Check::le(
            format!("kobayashi/egg{k}-slope-upper-tangential"),
            (rep.slope_upper - want_tan).abs(),
            0.05,
        ));
        let factor_tan = (rep.ratio_max / rep.ratio_min)
            .max(rep.ratio_max.max(1.0 / rep.ratio_min));
        checks.push(Check::le(
            format!("kobayashi/egg{k}-ratio-factor-tangential"),
            factor_tan,
            10.0,
        ));

        let rep = kobayashi::metric_ratio_sweep(&egg, &deltas, &normal, family.as_ref())?;
        checks.push(Check::le(
            format!("kobayashi/egg{k}-slope-m-normal"),
            (rep.slope_m + 1.0).abs(),
            0.01,
        ));
        checks.push(Check::le(
            format!("kobayashi/egg{k}-slope-upper-normal"),
            (rep.slope_upper + 1.0).abs(),
            0.05,
        ));
        let factor_norm = (rep.ratio_max / rep.ratio_min)
            .max(rep.ratio_max.max(1.0 / rep.ratio_min));
        checks.push(Check::le(
            format!("kobayashi/egg{k}-ratio-factor-normal"),
            factor_norm,
            10.0,
        ));
    }
    Ok(checks)
}

/// The whole battery in a fixed order.
pub fn run_all(seed: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    checks.extend(check_tau_oracle(seed)?);
    checks.extend(check_sandwich(seed)?);
    checks.extend(check_eps_tilde(seed)?);
    checks.extend(check_constants_stability(seed)?);
    checks.extend(check_chains(seed)?);
    checks.extend(check_renorm_suites(seed, None)?);
    checks.extend(check_schwarz_claim(seed, 200)?);
    checks.extend(check_pba(seed)?);
    checks.extend(check_normality(seed)?);
    checks.extend(check_limit_domain(seed)?);
    checks.extend(check_kobayashi(seed)?);
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tau_oracle_battery_is_clean_and_fast() {
        let checks = check_tau_oracle(42).unwrap();
        assert!(checks.iter().all(|c| c.pass), "{checks:?}");
    }

    #[test]
    fn eps_tilde_battery_is_clean() {
        let checks = check_eps_tilde(42).unwrap();
        assert!(checks.iter().all(|c| c.pass), "{checks:?}");
    }

    #[test]
    fn checks_are_reproducible() {
        let a = check_tau_oracle(7).unwrap();
        let b = check_tau_oracle(7).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.value.to_bits(), y.value.to_bits());
        }
    }
}
