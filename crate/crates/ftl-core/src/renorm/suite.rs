//! Named renormalization suites behind a common trait, selected at runtime
//! by the CLI. `zalcman-nz` and `zalcman-exp` drive the engine on the
//! classical sphere sequences; `zalcman-const` is the degenerate error-path
//! suite; `catlin-discs` certifies the Schwarz property and the vanishing
//! profile for the finite-type family.

use num_complex::Complex64;
use serde::Serialize;

use crate::disc::{sample_disc, ContainmentSpec};
use crate::domain::{DomainModel, PointC2};
use crate::error::{FtlError, Result};
use crate::renorm::{
    renormalize, schwarz_check, vanishing_profile, CatlinJFamily, JFamily, Modulus, RenormOptions,
    RenormReport, SchwarzGrid, SchwarzParams, SphereJFamily, SpherePoint,
};
use crate::rng;

/// A flat numeric table; the CLI turns it into CSV.
#[derive(Clone, Debug, Serialize, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }
}

/// A named pass/fail observation with its measured value.
#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub witness: Option<String>,
}

impl Verdict {
    pub fn new(name: impl Into<String>, pass: bool, value: f64) -> Self {
        Self {
            name: name.into(),
            pass,
            value,
            witness: None,
        }
    }

    pub fn with_witness(mut self, witness: impl Into<String>) -> Self {
        self.witness = Some(witness.into());
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub table: Table,
    pub verdicts: Vec<Verdict>,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }
}

/// Runtime configuration of a suite run.
#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub params: SchwarzParams,
    pub indices: Vec<u32>,
    pub seed: u64,
}

/// A registered suite: a family of maps (or discs) plus the certification
/// recipe.
pub trait RenormSuite: Send + Sync {
    fn name(&self) -> &'static str;

    /// The parameters the suite was designed for; descriptors may override.
    fn default_config(&self, seed: u64) -> SuiteConfig;

    fn run(&self, cfg: &SuiteConfig) -> Result<SuiteReport>;
}

pub fn builtin_suites() -> Vec<Box<dyn RenormSuite>> {
    vec![
        Box::new(ZalcmanSuite { exponential: false }),
        Box::new(ZalcmanSuite { exponential: true }),
        Box::new(ConstantSuite),
        Box::new(CatlinDiscSuite),
    ]
}

pub fn find_suite(name: &str) -> Option<Box<dyn RenormSuite>> {
    builtin_suites().into_iter().find(|s| s.name() == name)
}

/// Schwarz parameters valid for holomorphic maps into the sphere with the
/// chordal J: a chordal ball of radius 1 charts into the Euclidean disc of
/// radius 1/sqrt(3), so the classical Schwarz lemma gives the linear
/// modulus 2/(sqrt(3) alpha_plus) under the guard c = 1.
pub fn sphere_schwarz_params(k: f64) -> SchwarzParams {
    SchwarzParams::new(0.5, 0.7, 1.0, Modulus::Linear { slope: 1.65 }, k)
        .expect("sphere parameters are valid")
}

struct ZalcmanSuite {
    exponential: bool,
}

impl ZalcmanSuite {
    fn map(&self, n: u32, t: Complex64) -> SpherePoint {
        if self.exponential {
            SpherePoint((t * n as f64).exp())
        } else {
            SpherePoint(t * n as f64)
        }
    }

    /// Hypothesis witness at t' = 0: the smallest ladder radius whose
    /// J-separation reaches k, scanned over the four axis directions.
    fn witness(&self, fam: &SphereJFamily, k: f64, n: u32) -> Option<(Complex64, Complex64)> {
        let dirs = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, -1.0),
        ];
        let origin = self.map(n, Complex64::ZERO);
        let steps = 400;
        let ratio = (1.0f64 / 1e-6).powf(1.0 / steps as f64);
        for i in 0..=steps {
            let r = 1e-6 * ratio.powi(i);
            if r >= 1.0 {
                break;
            }
            for d in dirs {
                let eps = d * r;
                if fam.j(&origin, &self.map(n, eps)) >= k {
                    return Some((Complex64::ZERO, eps));
                }
            }
        }
        None
    }
}

impl RenormSuite for ZalcmanSuite {
    fn name(&self) -> &'static str {
        if self.exponential {
            "zalcman-exp"
        } else {
            "zalcman-nz"
        }
    }

    fn default_config(&self, seed: u64) -> SuiteConfig {
        SuiteConfig {
            params: sphere_schwarz_params(0.5),
            indices: (10..=200).collect(),
            seed,
        }
    }

    fn run(&self, cfg: &SuiteConfig) -> Result<SuiteReport> {
        let fam = SphereJFamily;
        let mut witnesses = Vec::with_capacity(cfg.indices.len());
        for &n in &cfg.indices {
            let w = self
                .witness(&fam, cfg.params.k, n)
                .ok_or(FtlError::EmptyWitnessSet)?;
            witnesses.push(w);
        }
        let report = renormalize(
            &cfg.indices,
            |n, t| self.map(n, t),
            &fam,
            &cfg.params,
            &witnesses,
            &RenormOptions::default(),
        )?;
        Ok(self.certify(&fam, cfg, report))
    }
}

impl ZalcmanSuite {
    fn certify(&self, fam: &SphereJFamily, cfg: &SuiteConfig, report: RenormReport) -> SuiteReport {
        let mut table = Table::new(&[
            "n", "retained", "sigma", "t_abs", "eps_abs", "R", "r0_abs", "sep", "worst_schwarz",
        ]);
        for d in &report.dropped {
            table.rows.push(vec![
                d.index as f64,
                0.0,
                f64::NAN,
                f64::NAN,
                f64::NAN,
                f64::NAN,
                f64::NAN,
                f64::NAN,
                f64::NAN,
            ]);
        }
        for r in &report.retained {
            table.rows.push(vec![
                r.index as f64,
                1.0,
                r.sigma,
                r.t.norm(),
                r.eps.norm(),
                r.big_r,
                r.r0_abs,
                r.sep,
                r.worst_schwarz,
            ]);
        }
        table
            .rows
            .sort_by(|a, b| a[0].partial_cmp(&b[0]).unwrap());

        let recs = &report.retained;
        let mut verdicts = Vec::new();
        let eps_decreasing = recs.windows(2).all(|w| w[1].eps.norm() < w[0].eps.norm());
        let eps_tail = recs.last().map_or(f64::NAN, |r| r.eps.norm());
        verdicts.push(Verdict::new(
            format!("{}/eps-strictly-decreasing", self.name()),
            !recs.is_empty() && eps_decreasing,
            eps_tail,
        ));
        verdicts.push(Verdict::new(
            format!("{}/eps-tail-below-0.05", self.name()),
            eps_tail < 0.05,
            eps_tail,
        ));
        let r_increasing = recs.windows(2).all(|w| w[1].big_r > w[0].big_r);
        let r_tail = recs.last().map_or(f64::NAN, |r| r.big_r);
        verdicts.push(Verdict::new(
            format!("{}/R-strictly-increasing", self.name()),
            !recs.is_empty() && r_increasing,
            r_tail,
        ));
        verdicts.push(Verdict::new(
            format!("{}/R-tail-above-10", self.name()),
            r_tail > 10.0,
            r_tail,
        ));
        let min_sep = recs.iter().map(|r| r.sep).fold(f64::INFINITY, f64::min);
        verdicts.push(Verdict::new(
            format!("{}/separation-at-least-k", self.name()),
            min_sep >= cfg.params.k,
            min_sep,
        ));
        let max_worst = recs
            .iter()
            .map(|r| r.worst_schwarz)
            .fold(f64::NEG_INFINITY, f64::max);
        verdicts.push(Verdict::new(
            format!("{}/schwarz-worst-nonpositive", self.name()),
            max_worst <= 0.0,
            max_worst,
        ));

        // Cauchy behaviour of the renormalized maps on a fixed 20-point grid
        let grid: Vec<Complex64> = (0..20)
            .map(|i| {
                let r = if i < 10 { 0.4 } else { 0.8 };
                Complex64::from_polar(r, std::f64::consts::TAU * (i % 10) as f64 / 10.0)
            })
            .collect();
        let mut diffs = Vec::new();
        for w in recs.windows(2) {
            let g = |r: &crate::renorm::RenormRecord, z: Complex64| {
                self.map(r.index, r.t + r.eps * z)
            };
            let mut sup: f64 = 0.0;
            for &z in &grid {
                sup = sup.max(fam.dist(&g(&w[0], z), &g(&w[1], z)));
            }
            diffs.push(sup);
        }
        let cauchy = if diffs.len() < 2 {
            !diffs.is_empty()
        } else {
            let half = diffs.len() / 2;
            let head: f64 = diffs[..half].iter().fold(0.0f64, |a, &b| a.max(b));
            let tail: f64 = diffs[half..].iter().fold(0.0f64, |a, &b| a.max(b));
            tail <= head + 1e-9 && *diffs.last().unwrap() <= 1e-3
        };
        verdicts.push(Verdict::new(
            format!("{}/renormalized-cauchy", self.name()),
            cauchy,
            diffs.last().copied().unwrap_or(f64::NAN),
        ));
        // nonconstant limit: the separation survives in the limit records
        verdicts.push(Verdict::new(
            format!("{}/limit-nonconstant", self.name()),
            min_sep >= cfg.params.k,
            min_sep,
        ));

        SuiteReport {
            suite: self.name().to_string(),
            table,
            verdicts,
        }
    }
}

/// Constant maps: the witness scan finds no separation, so the engine
/// reports the empty witness set. Exercises the error path end to end.
struct ConstantSuite;

impl RenormSuite for ConstantSuite {
    fn name(&self) -> &'static str {
        "zalcman-const"
    }

    fn default_config(&self, seed: u64) -> SuiteConfig {
        SuiteConfig {
            params: sphere_schwarz_params(0.5),
            indices: (1..=10).collect(),
            seed,
        }
    }

    fn run(&self, cfg: &SuiteConfig) -> Result<SuiteReport> {
        let fam = SphereJFamily;
        let point = SpherePoint(Complex64::new(0.3, 0.1));
        // the witness set is empty at every index; report it via the
        // engine's own estimator on the first index
        let _ = cfg;
        crate::renorm::sigma_estimate(
            |_t| point,
            &fam,
            cfg.params.k,
            &crate::renorm::SigmaGrid {
                radial_t: 10,
                phase_t: 4,
                radial_eps: 40,
                phase_eps: 4,
                ..Default::default()
            },
            &[],
        )?;
        unreachable!("constant maps cannot produce a witness")
    }
}

/// Schwarz-property and vanishing-profile certification for the
/// finite-type family on the unit egg.
struct CatlinDiscSuite;

impl CatlinDiscSuite {
    fn domain() -> DomainModel {
        DomainModel::egg(1, 1.0)
    }
}

impl RenormSuite for CatlinDiscSuite {
    fn name(&self) -> &'static str {
        "catlin-discs"
    }

    fn default_config(&self, seed: u64) -> SuiteConfig {
        // the boundary instantiation: alpha_pm = c = 1, s(u) = |u|
        let params = SchwarzParams::new(1.0 - 1e-9, 1.0, 1.0, Modulus::Linear { slope: 1.0 }, 1.0)
            .expect("catlin parameters are valid");
        SuiteConfig {
            params,
            indices: (0..200).collect(),
            seed,
        }
    }

    fn run(&self, cfg: &SuiteConfig) -> Result<SuiteReport> {
        let domain = Self::domain();
        let fam = CatlinJFamily::new(domain.clone());
        let spec = ContainmentSpec::default();
        let mut table = Table::new(&["disc", "worst", "unguarded", "ok"]);
        let mut all_ok = true;
        let mut worst_overall = f64::NEG_INFINITY;
        let mut clamp_flagged = 0usize;

        for (i, &idx) in cfg.indices.iter().enumerate() {
            let mut r = rng::stream(cfg.seed, "catlin-disc", idx as u64);
            // anchor points sweep towards the boundary point
            let depth = 0.3 * 0.97f64.powi(i as i32 % 64) + 1e-3;
            let base = PointC2::from_re(0.0, 0.0, -depth, 0.0);
            let disc = sample_disc(&domain, base, 4, &mut r, &spec)
                .ok_or(FtlError::NoAdmissibleDisc)?;
            let rep = schwarz_check(
                |t| disc.eval(t),
                &fam,
                &cfg.params,
                &SchwarzGrid {
                    pairs: 12,
                    guard_boundary: 128,
                    guard_rings: 4,
                    check_radial: 10,
                    check_phase: 10,
                    seed: cfg.seed ^ (idx as u64).wrapping_mul(0x9e37),
                },
            );
            all_ok &= rep.ok;
            worst_overall = worst_overall.max(rep.worst);
            if rep.near_clamp_margin {
                clamp_flagged += 1;
            }
            table.rows.push(vec![
                idx as f64,
                rep.worst,
                rep.pairs_unguarded as f64,
                if rep.ok { 1.0 } else { 0.0 },
            ]);
        }

        let compact = [
            PointC2::from_re(0.0, 0.0, -0.2, 0.0),
            PointC2::from_re(0.3, 0.1, -0.3, 0.1),
            PointC2::from_re(-0.2, 0.2, -0.25, -0.1),
            PointC2::from_re(0.1, -0.3, -0.15, 0.05),
        ];
        let taus: Vec<f64> = (0..7).map(|i| 0.04 * 0.5f64.powi(i)).collect();
        let profile = vanishing_profile(&fam, &compact, &taus, 300, cfg.seed)?;

        let mut verdicts = vec![
            Verdict::new("catlin-discs/schwarz-all-ok", all_ok, worst_overall),
            Verdict::new(
                "catlin-discs/vanishing-profile",
                profile.certified,
                profile.rows.last().map_or(f64::NAN, |r| r.sup),
            ),
        ];
        if clamp_flagged > 0 {
            verdicts.push(
                Verdict::new("catlin-discs/clamp-sensitive", true, clamp_flagged as f64)
                    .with_witness(format!(
                        "{clamp_flagged} certifications within the alpha_plus clamp slack"
                    )),
            );
        }
        Ok(SuiteReport {
            suite: self.name().to_string(),
            table,
            verdicts,
        })
    }
}
