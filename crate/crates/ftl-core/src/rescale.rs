//! The rescaling method: blowing up a model domain along a point sequence
//! approaching the boundary point (0,0).
//!
//! S_n = Delta o phi at the boundary lift of eta_n maps eta_hat to the
//! origin and eta_n to (0,-1); the rescaled defining polynomials P_n have
//! unit sup-norm, and along admissible sequences they converge to the
//! defining polynomial of an unbounded rigid limit domain, which is
//! Brody-hyperbolic whenever the limit is subharmonic and non-harmonic.

use num_complex::Complex64;
use serde::Serialize;

use crate::disc::{containment, AnalyticDisc, ContainmentSpec};
use crate::domain::{CatlinFrame, DomainModel, PointC2};
use crate::error::{FtlError, Result};
use crate::poly::MixedPoly;
use crate::rng;

/// Coefficient tail-variation threshold for declaring convergence.
pub const LIMIT_TAIL_TOL: f64 = 1e-6;

/// The affine-polynomial rescaling map S = Delta o phi at the frame of eta.
#[derive(Clone, Debug)]
pub struct RescaleMap {
    pub frame: CatlinFrame,
}

impl RescaleMap {
    pub fn apply(&self, w: &PointC2) -> PointC2 {
        self.frame.rescale(w)
    }

    pub fn apply_inverse(&self, v: &PointC2) -> PointC2 {
        self.frame.rescale_inverse(v)
    }
}

/// Builds S at eta; S(eta_hat) = (0,0) exactly and S(eta) = (0,-1) for
/// rigid models.
pub fn rescale_map(domain: &DomainModel, eta: &PointC2) -> Result<RescaleMap> {
    let frame = domain.frame(eta)?;
    debug_assert!(frame.rescale(&frame.eta_hat).norm_inf() < 1e-14);
    Ok(RescaleMap { frame })
}

/// P_n(w) = (1/eps) P_hat(tau w): coefficients a_{j,k} tau^(j+k) / eps.
/// The tau closed form makes the sup-norm exactly 1.
pub fn rescaled_polynomial(domain: &DomainModel, eta: &PointC2) -> Result<MixedPoly> {
    let frame = domain.frame(eta)?;
    rescale_mixed(&frame)
}

fn rescale_mixed(frame: &CatlinFrame) -> Result<MixedPoly> {
    let terms: Vec<(u32, u32, Complex64)> = frame
        .mixed
        .upper_terms()
        .map(|(j, k, a)| (j, k, a * frame.tau.powi((j + k) as i32) / frame.eps))
        .collect();
    MixedPoly::from_terms(&terms)
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitRow {
    pub index: usize,
    /// sup coefficient distance to the previous rescaled polynomial
    pub variation: f64,
    pub sup_norm: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitDomainReport {
    /// the limit defining polynomial (the last rescaled polynomial once the
    /// Cauchy tail test passes)
    pub poly: MixedPoly,
    pub table: Vec<LimitRow>,
    pub tail_variation: f64,
}

/// Coefficientwise limit of the rescaled polynomials along a point
/// sequence converging to (0,0). The tail (last quarter, at least 3 steps)
/// must vary below `LIMIT_TAIL_TOL`, otherwise the oscillating coefficient
/// is reported.
pub fn limit_domain(domain: &DomainModel, etas: &[PointC2]) -> Result<LimitDomainReport> {
    if etas.len() < 8 {
        return Err(FtlError::Precondition(
            "limit detection needs at least 8 points".into(),
        ));
    }
    let tail_start = etas.len() - (etas.len() / 4).max(3);
    // the sequence must approach (0,0)
    for (i, eta) in etas.iter().enumerate() {
        if i >= tail_start && eta.norm_inf() >= 1e-3 {
            return Err(FtlError::Precondition(format!(
                "sequence tail not converging to the origin: ||eta_{i}|| = {}",
                eta.norm_inf()
            )));
        }
    }
    let mut prev: Option<MixedPoly> = None;
    let mut table = Vec::with_capacity(etas.len());
    let mut tail_variation: f64 = 0.0;
    let mut worst_coeff = (0u32, 0u32);
    let mut last = MixedPoly::zero();
    for (i, eta) in etas.iter().enumerate() {
        let pn = rescaled_polynomial(domain, eta)?;
        let variation = prev.as_ref().map_or(f64::NAN, |p| p.sup_distance(&pn));
        if i >= tail_start {
            if variation > tail_variation {
                tail_variation = variation;
                // locate the worst coefficient for the error report
                if let Some(p) = &prev {
                    let mut worst = 0.0;
                    for (j, k, a) in pn.terms() {
                        let d = (a - p.coeff(j, k)).norm();
                        if d > worst {
                            worst = d;
                            worst_coeff = (j, k);
                        }
                    }
                    for (j, k, a) in p.terms() {
                        let d = (a - pn.coeff(j, k)).norm();
                        if d > worst {
                            worst = d;
                            worst_coeff = (j, k);
                        }
                    }
                }
            }
        }
        table.push(LimitRow {
            index: i,
            variation,
            sup_norm: pn.sup_norm(),
        });
        prev = Some(pn.clone());
        last = pn;
    }
    if tail_variation >= LIMIT_TAIL_TOL {
        return Err(FtlError::NonConvergence(
            worst_coeff.0,
            worst_coeff.1,
            tail_variation,
        ));
    }
    // limit invariants
    debug_assert!((last.sup_norm() - 1.0).abs() <= 1e-9);
    debug_assert!(last.harmonic_part().is_zero());
    Ok(LimitDomainReport {
        poly: last,
        table,
        tail_variation,
    })
}

/// A rigid domain D_P is Brody-hyperbolic when P is subharmonic and not
/// harmonic: entire curves into it are constant.
pub fn brody_hyperbolic(p: &MixedPoly) -> bool {
    let subharmonic = p
        .is_subharmonic(1.0, 64)
        .map(|(ok, _)| ok)
        .unwrap_or(false);
    subharmonic && !p.laplacian().is_zero()
}

/// Indicator disagreement between S_n(U0^-) and D_P over an n^4 grid on
/// the compact box [-box, box]^4. Membership in the image is tested by
/// pulling back through S^{-1}: the pullback must land in U0 with rho < 0.
pub fn hausdorff_gap(
    domain: &DomainModel,
    eta: &PointC2,
    limit: &MixedPoly,
    box_: f64,
    n: usize,
) -> Result<f64> {
    if n < 2 {
        return Err(FtlError::Precondition("grid needs n >= 2".into()));
    }
    let map = rescale_map(domain, eta)?;
    let mut disagree = 0usize;
    let mut total = 0usize;
    let step = |i: usize| -box_ + 2.0 * box_ * i as f64 / (n - 1) as f64;
    for i1 in 0..n {
        for i2 in 0..n {
            let w1 = Complex64::new(step(i1), step(i2));
            let p_val = limit.eval(w1);
            for i3 in 0..n {
                for i4 in 0..n {
                    let v = PointC2::new(w1, Complex64::new(step(i3), step(i4)));
                    let in_limit = 2.0 * v.w2.re + p_val < 0.0;
                    let back = map.apply_inverse(&v);
                    let in_image = domain.rho(&back) < 0.0 && domain.contains_in_box(&back);
                    total += 1;
                    if in_limit != in_image {
                        disagree += 1;
                    }
                }
            }
        }
    }
    Ok(disagree as f64 / total as f64)
}

#[derive(Clone, Debug, Serialize)]
pub struct NormalityRow {
    pub index: u32,
    pub sup: f64,
    pub max_chain_len: usize,
    pub skipped: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct NormalityReport {
    pub rows: Vec<NormalityRow>,
    /// sup over retained indices of the rescaled sup-norm
    pub sup_overall: f64,
    /// the engulfing bound C(p_max) the sup is checked against
    pub bound: f64,
    pub p_max: usize,
    pub normal: bool,
}

/// Runs the normality experiment: for discs f_n with f_n(0) = eta_n -> 0,
/// the rescaled family S_n o f_n must be uniformly bounded on the compact
/// |t| <= compact_radius by the chain bound C(p).
///
/// Chains in parameter space connect 0 to each sample through steps small
/// enough that consecutive images satisfy J < 1; the step is halved until
/// the links certify. Indices whose engulfing scale exceeds eps0 are
/// skipped and reported, mirroring the passage to a tail.
pub fn normality_experiment(
    domain: &DomainModel,
    discs: &[(u32, AnalyticDisc)],
    compact_radius: f64,
    compact_samples: usize,
) -> Result<NormalityReport> {
    if !(0.0 < compact_radius && compact_radius < 1.0) {
        return Err(FtlError::Precondition(
            "compact radius must lie in (0,1)".into(),
        ));
    }
    let c5 = domain.constants.c5.ok_or(FtlError::NotCalibrated)?;
    let spec = ContainmentSpec::default();
    // precondition: centers converge to the origin
    let tail = discs.len().saturating_sub((discs.len() / 4).max(1));
    for (i, (_, d)) in discs.iter().enumerate() {
        if i >= tail && d.center().norm_inf() >= 1e-3 {
            return Err(FtlError::Precondition(format!(
                "disc centers do not converge to the origin: ||f({i})(0)|| = {}",
                d.center().norm_inf()
            )));
        }
    }

    let tau = std::f64::consts::TAU;
    let mut rows = Vec::new();
    let mut sup_overall: f64 = 0.0;
    let mut p_max = 0usize;
    for (idx, disc) in discs {
        let (ok, _, offender) = containment(domain, disc, &spec);
        if !ok {
            return Err(FtlError::DiscEscape {
                index: *idx as usize,
                t: offender.unwrap_or(Complex64::ZERO),
            });
        }
        let center = disc.center();
        let frame = domain.frame(&center)?;
        let map = RescaleMap {
            frame,
        };
        let mut sup: f64 = 0.0;
        let mut max_chain = 0usize;
        let mut skipped = false;
        for s in 0..compact_samples {
            // two rings plus the center direction sweep
            let r = compact_radius * ((s / 8) as f64 + 1.0) / ((compact_samples / 8) as f64 + 1.0);
            let t = Complex64::from_polar(r, tau * (s % 8) as f64 / 8.0);
            // build a parameter chain 0 -> t with J-admissible links
            let mut pieces = 1usize;
            let chain = loop {
                let mut pts = Vec::with_capacity(pieces + 1);
                for i in 0..=pieces {
                    pts.push(disc.eval(t * (i as f64 / pieces as f64)));
                }
                let mut admissible = true;
                for i in 0..pieces {
                    if domain.j_func(&pts[i], &pts[i + 1])? >= 1.0 {
                        admissible = false;
                        break;
                    }
                }
                if admissible {
                    break pts;
                }
                pieces *= 2;
                if pieces > 64 {
                    return Err(FtlError::ChainLink {
                        index: 0,
                        j: f64::INFINITY,
                    });
                }
            };
            let p = chain.len() - 1;
            // engulfing scale condition; violations mark the index skipped
            let cp = if p == 0 { 3.0 } else { 3.0 * c5.powi(p as i32 - 1) };
            if p >= 1 && cp * map.frame.eps >= domain.constants.eps0 {
                skipped = true;
                break;
            }
            max_chain = max_chain.max(p);
            sup = sup.max(map.apply(&disc.eval(t)).norm_inf());
        }
        if !skipped {
            sup_overall = sup_overall.max(sup);
            p_max = p_max.max(max_chain);
        }
        rows.push(NormalityRow {
            index: *idx,
            sup,
            max_chain_len: max_chain,
            skipped,
        });
    }
    let bound = if p_max == 0 {
        3.0
    } else {
        3.0 * c5.powi(p_max as i32 - 1)
    };
    Ok(NormalityReport {
        rows,
        sup_overall,
        bound,
        p_max,
        normal: sup_overall < bound,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PbaViolation {
    pub disc: usize,
    pub r0: f64,
    pub c: f64,
    pub j: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PbaReport {
    pub r0_hat: f64,
    pub c_hat: f64,
    pub pairs_tested: usize,
    pub violations: Vec<PbaViolation>,
}

/// Probes the largest ladder pair (r0, c) such that every sampled disc
/// with ||f(0)||_inf <= c keeps J_{f(0)}(f(t)) < k on |t| < r0. The ladder
/// steps are r0 in {0.05 i}, c in {0.02 i}; violations one rung above the
/// certified pair are returned as witnesses.
pub fn pba_probe(domain: &DomainModel, k: f64, trials: usize, seed: u64) -> Result<PbaReport> {
    if !(0.0 < k && k <= 1.0) {
        return Err(FtlError::Precondition("k must lie in (0, 1]".into()));
    }
    let spec = ContainmentSpec {
        boundary_samples: 64,
        radial_samples: 16,
        ..Default::default()
    };
    let r_steps: Vec<f64> = (1..=19).map(|i| 0.05 * i as f64).collect();
    let c_steps: Vec<f64> = (1..=19).map(|i| 0.02 * i as f64).collect();
    let t_rings = 24usize;
    let t_phases = 16usize;

    // per disc: center norm and the running max of J over |t| <= r rings
    struct Probe {
        center_norm: f64,
        max_j_upto: Vec<f64>, // indexed like r_steps
    }
    let mut probes = Vec::with_capacity(trials);
    let mut pairs_tested = 0usize;
    let tau = std::f64::consts::TAU;
    for trial in 0..trials {
        let mut r = rng::stream(seed, "pba-disc", trial as u64);
        // center norms spread across the ladder range
        let target = rng::log_uniform(&mut r, 1e-3, c_steps.last().copied().unwrap());
        let w1 = rng::complex_in_disc(&mut r, target);
        let depth = rng::log_uniform(&mut r, 1e-4, target.max(2e-4));
        let base = PointC2::new(
            w1,
            Complex64::new(-domain.poly().eval(w1) / 2.0 - depth, 0.0),
        );
        if !domain.is_interior(&base) || !domain.contains_in_box(&base) {
            continue;
        }
        let Some(disc) = crate::disc::sample_disc(domain, base, 4, &mut r, &spec) else {
            continue;
        };
        let frame = domain.frame(&base)?;
        let mut max_j_upto = vec![0.0f64; r_steps.len()];
        for (ri, &rr) in r_steps.iter().enumerate() {
            let r_lo = if ri == 0 { 0.0 } else { r_steps[ri - 1] };
            let mut ring_max: f64 = if ri == 0 { 0.0 } else { max_j_upto[ri - 1] };
            let rings_here = (t_rings / r_steps.len()).max(2);
            for q in 1..=rings_here {
                let rad = r_lo + (rr - r_lo) * q as f64 / rings_here as f64;
                for p in 0..t_phases {
                    let t = Complex64::from_polar(rad, tau * p as f64 / t_phases as f64);
                    ring_max = ring_max.max(frame.j_to(&disc.eval(t)));
                    pairs_tested += 1;
                }
            }
            max_j_upto[ri] = ring_max;
        }
        probes.push(Probe {
            center_norm: base.norm_inf(),
            max_j_upto,
        });
    }

    // certify the largest violation-free ladder pair, maximizing the rung
    // sum with r0 preferred on ties
    let mut best = (0usize, 0usize);
    let mut found = false;
    for (ci, &c) in c_steps.iter().enumerate() {
        for (ri, _) in r_steps.iter().enumerate() {
            let violated = probes
                .iter()
                .any(|p| p.center_norm <= c && p.max_j_upto[ri] >= k);
            if !violated {
                let better = !found
                    || (ri + ci > best.0 + best.1)
                    || (ri + ci == best.0 + best.1 && ri > best.0);
                if better {
                    best = (ri, ci);
                    found = true;
                }
            }
        }
    }
    if !found {
        return Ok(PbaReport {
            r0_hat: 0.0,
            c_hat: 0.0,
            pairs_tested,
            violations: Vec::new(),
        });
    }
    let (ri, ci) = best;
    // witnesses one rung above
    let mut violations = Vec::new();
    if ri + 1 < r_steps.len() {
        for (di, p) in probes.iter().enumerate() {
            if p.center_norm <= c_steps[ci] && p.max_j_upto[ri + 1] >= k {
                violations.push(PbaViolation {
                    disc: di,
                    r0: r_steps[ri + 1],
                    c: c_steps[ci],
                    j: p.max_j_upto[ri + 1],
                });
            }
        }
    }
    Ok(PbaReport {
        r0_hat: r_steps[ri],
        c_hat: c_steps[ci],
        pairs_tested,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rescale_map_closed_form_on_egg() {
        let egg = DomainModel::egg(1, 1.0);
        let delta = 0.04;
        let eta = PointC2::from_re(0.0, 0.0, -delta, 0.0);
        let map = rescale_map(&egg, &eta).unwrap();
        // S(w) = (w1/sqrt(delta), w2/delta)
        let w = PointC2::from_re(0.1, 0.05, -0.02, 0.01);
        let v = map.apply(&w);
        assert!((v.w1 - w.w1 / delta.sqrt()).norm() < 1e-14);
        assert!((v.w2 - w.w2 / delta).norm() < 1e-14);
        // S(eta) = (0, -1)
        let se = map.apply(&eta);
        assert!(se.dist_inf(&PointC2::from_re(0.0, 0.0, -1.0, 0.0)) < 1e-14);
    }

    #[test]
    fn rescale_fixes_hat_and_round_trips() {
        let d = DomainModel::cross_term(1.0);
        let mut r = stream(3, "rescale", 0);
        for _ in 0..100 {
            let eta = d.sample_interior(&mut r);
            let map = rescale_map(&d, &eta).unwrap();
            assert!(map.apply(&map.frame.eta_hat).norm_inf() < 1e-13);
            assert!(
                map.apply(&eta)
                    .dist_inf(&PointC2::from_re(0.0, 0.0, -1.0, 0.0))
                    < 1e-12
            );
            let w = d.sample_interior(&mut r);
            assert!(map.apply_inverse(&map.apply(&w)).dist_inf(&w) < 1e-12 * w.norm_inf().max(1.0));
        }
    }

    #[test]
    fn rescaled_polynomial_is_self_similar_on_eggs() {
        for k in [1u32, 2, 3] {
            let egg = DomainModel::egg(k, 1.0);
            for i in 1..20 {
                let eta = PointC2::from_re(0.0, 0.0, -0.3 / i as f64, 0.0);
                let pn = rescaled_polynomial(&egg, &eta).unwrap();
                assert!((pn.coeff(k, k) - c(1.0, 0.0)).norm() < 1e-12);
                assert_eq!(pn.terms().count(), 1);
            }
        }
    }

    #[test]
    fn rescaled_polynomial_has_unit_norm_and_small_coeffs() {
        let d = DomainModel::cross_term(1.0);
        let mut r = stream(7, "unit-norm", 0);
        for _ in 0..1000 {
            let eta = d.sample_interior(&mut r);
            let pn = rescaled_polynomial(&d, &eta).unwrap();
            assert!((pn.sup_norm() - 1.0).abs() < 1e-12);
            for (_, _, a) in pn.terms() {
                assert!(a.norm() <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn limit_domain_on_two_term_is_modulus_squared() {
        // tau = eps^(1/2) shrinks the quartic coefficient like eps
        let d = DomainModel::two_term(1.0);
        let etas: Vec<PointC2> = (1..=1500)
            .map(|n| PointC2::from_re(0.0, 0.0, -1.0 / n as f64, 0.0))
            .collect();
        let rep = limit_domain(&d, &etas).unwrap();
        assert!((rep.poly.coeff(1, 1).re - 1.0).abs() < 1e-9);
        assert!(rep.poly.coeff(2, 2).norm() < 2e-3);
        assert!((rep.poly.sup_norm() - 1.0).abs() < 1e-9);
        assert!(rep.tail_variation < LIMIT_TAIL_TOL);
        assert!(brody_hyperbolic(&rep.poly));
    }

    #[test]
    fn limit_domain_flags_two_limit_points() {
        // alternate between two rays with different mixed structure: the
        // cross-term domain recentred off-axis oscillates
        let d = DomainModel::cross_term(1.0);
        let etas: Vec<PointC2> = (1..=200)
            .map(|n| {
                let x = if n % 2 == 0 { 5e-4 } else { -5e-4 };
                PointC2::from_re(x, 0.0, -1.0 / (2000.0 + n as f64), 0.0)
            })
            .collect();
        match limit_domain(&d, &etas) {
            Err(FtlError::NonConvergence(_, _, v)) => assert!(v >= LIMIT_TAIL_TOL),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn limit_domain_rejects_non_converging_sequence() {
        let d = DomainModel::egg(1, 1.0);
        let etas: Vec<PointC2> = (1..=20)
            .map(|_| PointC2::from_re(0.0, 0.0, -0.5, 0.0))
            .collect();
        assert!(matches!(
            limit_domain(&d, &etas),
            Err(FtlError::Precondition(_))
        ));
    }

    #[test]
    fn brody_examples() {
        assert!(brody_hyperbolic(&MixedPoly::modulus_power(1)));
        assert!(brody_hyperbolic(&MixedPoly::modulus_power(2)));
        // harmonic Re(w^2) is not
        let h = MixedPoly::from_terms(&[(2, 0, c(0.5, 0.0))]).unwrap();
        assert!(!brody_hyperbolic(&h));
        // negative laplacian is not
        assert!(!brody_hyperbolic(&MixedPoly::modulus_power(1).scale(-1.0)));
    }

    #[test]
    fn hausdorff_gap_vanishes_on_self_similar_eggs() {
        let egg = DomainModel::egg(2, 1.0);
        let eta = PointC2::from_re(0.0, 0.0, -0.001, 0.0);
        let p = MixedPoly::modulus_power(2);
        let gap = hausdorff_gap(&egg, &eta, &p, 1.5, 8).unwrap();
        assert_eq!(gap, 0.0);
    }

    #[test]
    fn hausdorff_gap_shrinks_along_the_ray_and_detects_mismatch() {
        let d = DomainModel::two_term(1.0);
        let p_true = MixedPoly::modulus_power(1);
        let mut prev = f64::INFINITY;
        for n in [50u32, 200, 800] {
            let eta = PointC2::from_re(0.0, 0.0, -1.0 / n as f64, 0.0);
            let gap = hausdorff_gap(&d, &eta, &p_true, 1.5, 8).unwrap();
            assert!(gap <= prev + 1e-12, "gap not shrinking");
            prev = gap;
        }
        assert!(prev < 0.01);
        // wrong limit stays bounded away from zero
        let p_wrong = MixedPoly::modulus_power(2);
        let eta = PointC2::from_re(0.0, 0.0, -1.0 / 800.0, 0.0);
        let gap = hausdorff_gap(&d, &eta, &p_wrong, 1.5, 8).unwrap();
        assert!(gap > 0.02, "mismatched limit not detected, gap = {gap}");
    }

    #[test]
    fn normality_constant_discs() {
        let mut egg = DomainModel::egg(1, 1.0);
        egg.calibrate(500, 42).unwrap();
        let discs: Vec<(u32, AnalyticDisc)> = (1..=30)
            .map(|n| {
                let eta = PointC2::from_re(0.0, 0.0, -0.005 / n as f64, 0.0);
                (
                    n,
                    AnalyticDisc {
                        c1: vec![eta.w1],
                        c2: vec![eta.w2],
                    },
                )
            })
            .collect();
        let rep = normality_experiment(&egg, &discs, 0.5, 24).unwrap();
        assert!(rep.normal);
        // constant discs: sup = ||S(eta)||_inf = 1, single trivial link
        for row in &rep.rows {
            assert!((row.sup - 1.0).abs() < 1e-12);
            assert!(row.max_chain_len <= 1);
        }
    }

    #[test]
    fn normality_affine_discs_bounded() {
        let mut egg = DomainModel::egg(1, 1.0);
        egg.calibrate(500, 42).unwrap();
        let discs: Vec<(u32, AnalyticDisc)> = (1..=40)
            .map(|n| {
                let eta = PointC2::from_re(0.0, 0.0, -0.02 / n as f64, 0.0);
                let frame = egg.frame(&eta).unwrap();
                (
                    n,
                    AnalyticDisc::affine(eta, c(0.5 * frame.tau, 0.0), Complex64::ZERO),
                )
            })
            .collect();
        let rep = normality_experiment(&egg, &discs, 0.8, 24).unwrap();
        assert!(rep.normal, "sup {} vs bound {}", rep.sup_overall, rep.bound);
        assert!(rep.sup_overall < 5.0);
    }

    #[test]
    fn normality_rejects_non_vanishing_centers() {
        let mut egg = DomainModel::egg(1, 1.0);
        egg.constants.c5 = Some(30.0);
        let discs: Vec<(u32, AnalyticDisc)> = (1..=10)
            .map(|n| {
                (
                    n,
                    AnalyticDisc {
                        c1: vec![Complex64::ZERO],
                        c2: vec![c(-0.3, 0.0)],
                    },
                )
            })
            .collect();
        assert!(matches!(
            normality_experiment(&egg, &discs, 0.5, 8),
            Err(FtlError::Precondition(_))
        ));
    }

    #[test]
    fn normality_rejects_escaping_disc() {
        let mut egg = DomainModel::egg(1, 1.0);
        egg.constants.c5 = Some(30.0);
        let discs = vec![(
            1u32,
            AnalyticDisc::affine(
                PointC2::from_re(0.0, 0.0, -1e-4, 0.0),
                Complex64::ZERO,
                c(0.5, 0.0),
            ),
        )];
        assert!(matches!(
            normality_experiment(&egg, &discs, 0.5, 8),
            Err(FtlError::DiscEscape { .. })
        ));
    }

    #[test]
    fn pba_probe_certifies_a_positive_pair() {
        let egg = DomainModel::egg(1, 1.0);
        let rep = pba_probe(&egg, 1.0, 60, 42).unwrap();
        assert!(rep.r0_hat >= 0.05, "r0_hat = {}", rep.r0_hat);
        assert!(rep.c_hat >= 0.02, "c_hat = {}", rep.c_hat);
        assert!(rep.pairs_tested > 1000);
    }

    #[test]
    fn pba_probe_constant_discs_never_violate() {
        // J of a constant disc is zero at every radius; certified pair
        // reaches the ladder top in r0
        let egg = DomainModel::egg(2, 1.0);
        let rep = pba_probe(&egg, 1.0, 40, 7).unwrap();
        assert!(rep.r0_hat > 0.0);
    }
}
