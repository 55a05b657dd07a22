//! Kobayashi pseudo-metric estimates on model domains.
//!
//! Three quantities per (point, tangent vector): the anisotropic gauge
//! metric M, an upper bound on the Kobayashi metric from an extremal disc
//! search over a named disc family, and the derivative-based lower-bound
//! formula. The sweep along the inward ray fits the log-log slopes and the
//! upper/gauge ratio.

use num_complex::Complex64;
use serde::Serialize;

use crate::domain::{tau_from_mixed, DomainModel, PointC2};
use crate::error::{FtlError, Result};

/// A tangent vector at a point of C^2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangentVec {
    pub x1: Complex64,
    pub x2: Complex64,
}

impl TangentVec {
    pub fn new(x1: Complex64, x2: Complex64) -> Self {
        Self { x1, x2 }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            x1: self.x1 * s,
            x2: self.x2 * s,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.x1.norm() == 0.0 && self.x2.norm() == 0.0
    }
}

/// M(eta, X) = max(|(phi' X)_1| / tau(eta, eps(eta)), |(phi' X)_2| / eps(eta))
/// with phi the normalizing map at eta itself (not at the boundary lift).
pub fn m_metric(domain: &DomainModel, eta: &PointC2, x: &TangentVec) -> Result<f64> {
    let rho = domain.rho(eta);
    if rho >= 0.0 {
        return Err(FtlError::NotInterior { rho });
    }
    if x.is_zero() {
        return Ok(0.0);
    }
    let eps = domain.epsilon_of(eta);
    let (phi, mixed) = domain.normalizing_map(eta);
    let tau = tau_from_mixed(&mixed, eps)?;
    let (y1, y2) = phi.jacobian_at_base((x.x1, x.x2));
    Ok((y1.norm() / tau).max(y2.norm() / eps))
}

/// The lower-bound formula
/// (1/A) max(|X_1|/tau(eta), |rho_w1 X_1 + rho_w2 X_2| / |rho(eta)|)
/// with tau(eta) built from the mixed derivatives of rho at eta:
/// for polynomial models the (j,k) derivative is j! k! b_{j,k}, so the
/// min runs over ((j+k)! |rho| / (j! k! |b_{j,k}|))^(1/(j+k)).
pub fn catlin_lower_bound(
    domain: &DomainModel,
    eta: &PointC2,
    x: &TangentVec,
    a: f64,
) -> Result<f64> {
    let rho = domain.rho(eta);
    if rho >= 0.0 {
        return Err(FtlError::NotInterior { rho });
    }
    if a < 1.0 {
        return Err(FtlError::Precondition(format!("A must be >= 1, got {a}")));
    }
    let recentred = domain.poly().recentre(eta.w1);
    let mut tau_thm = f64::INFINITY;
    for (j, k, b) in recentred.terms() {
        if j >= 1 && k >= 1 {
            let jk = (j + k) as i32;
            let fact = factorial(j + k) / (factorial(j) * factorial(k));
            tau_thm = tau_thm.min((fact * rho.abs() / b.norm()).powf(1.0 / jk as f64));
        }
    }
    if !tau_thm.is_finite() {
        return Err(FtlError::InfiniteType);
    }
    // rho_w1 = b_{1,0}, rho_w2 = 1 for rigid models
    let rho_w1 = recentred.coeff(1, 0);
    let normal_term = (rho_w1 * x.x1 + x.x2).norm() / rho.abs();
    Ok((x.x1.norm() / tau_thm).max(normal_term) / a)
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// A disc achieving the reported upper bound.
#[derive(Clone, Debug, Serialize)]
pub struct DiscWitness {
    pub radius: f64,
    /// quadratic correction on the second coordinate, zero for affine discs
    #[serde(with = "crate::renorm::complex_serde")]
    pub quad: Complex64,
}

#[derive(Clone, Debug, Serialize)]
pub struct UpperBound {
    pub value: f64,
    pub witness: DiscWitness,
}

/// Containment test resolution for the disc search: for rigid models the
/// restriction of rho to a disc boundary is a trigonometric polynomial of
/// degree <= deg(P) + 2, so 256 angular samples certify the sign.
#[derive(Clone, Copy, Debug)]
pub struct SearchSpec {
    pub boundary_samples: usize,
    pub radial_samples: usize,
    pub bisection_steps: usize,
}

impl Default for SearchSpec {
    fn default() -> Self {
        Self {
            boundary_samples: 256,
            radial_samples: 64,
            bisection_steps: 80,
        }
    }
}

/// An extremal-disc strategy: bounds the Kobayashi metric from above over
/// a family of admissible discs through (eta, X).
pub trait DiscFamily: Send + Sync {
    fn name(&self) -> &'static str;

    fn upper_bound(&self, domain: &DomainModel, eta: &PointC2, x: &TangentVec)
        -> Result<UpperBound>;
}

/// Affine discs f(t) = eta + t R X, R maximized by bisection on the
/// containment certificate.
pub struct AffineFamily {
    pub spec: SearchSpec,
}

/// Affine discs plus a quadratic correction eta + t R X + (0, q t^2) with
/// q on a small lattice scaled by eps(eta); the correction lets the disc
/// bend away from the boundary.
pub struct AffineQuadFamily {
    pub spec: SearchSpec,
}

pub fn disc_family(name: &str) -> Option<Box<dyn DiscFamily>> {
    match name {
        "affine" => Some(Box::new(AffineFamily {
            spec: SearchSpec::default(),
        })),
        "affine+quad" => Some(Box::new(AffineQuadFamily {
            spec: SearchSpec::default(),
        })),
        _ => None,
    }
}

/// Largest R such that t -> eta + t R X + (0, q t^2) stays in the domain,
/// certified on the sampling lattice; 0 if even tiny discs escape.
fn max_radius(
    domain: &DomainModel,
    eta: &PointC2,
    x: &TangentVec,
    q: Complex64,
    spec: &SearchSpec,
) -> f64 {
    let contained = |r: f64| -> bool {
        let disc = crate::disc::AnalyticDisc {
            c1: vec![eta.w1, x.x1 * r],
            c2: vec![eta.w2, x.x2 * r, q],
        };
        let tau = std::f64::consts::TAU;
        let radius = 1.0 - 1e-6;
        // boundary circle first: most likely to fail
        for b in 0..spec.boundary_samples {
            let t = Complex64::from_polar(radius, tau * b as f64 / spec.boundary_samples as f64);
            let w = disc.eval(t);
            if domain.rho(&w) >= 0.0 || !domain.contains_in_box(&w) {
                return false;
            }
        }
        for ir in 1..=spec.radial_samples {
            let rr = radius * ir as f64 / (spec.radial_samples + 1) as f64;
            for b in 0..16 {
                let t = Complex64::from_polar(rr, tau * b as f64 / 16.0);
                let w = disc.eval(t);
                if domain.rho(&w) >= 0.0 || !domain.contains_in_box(&w) {
                    return false;
                }
            }
        }
        true
    };

    let mut lo = 0.0f64;
    let mut hi = 1e-8;
    if !contained(hi) {
        return 0.0;
    }
    while contained(hi) {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            break;
        }
    }
    for _ in 0..spec.bisection_steps {
        let mid = 0.5 * (lo + hi);
        if contained(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

impl DiscFamily for AffineFamily {
    fn name(&self) -> &'static str {
        "affine"
    }

    fn upper_bound(
        &self,
        domain: &DomainModel,
        eta: &PointC2,
        x: &TangentVec,
    ) -> Result<UpperBound> {
        let rho = domain.rho(eta);
        if rho >= 0.0 {
            return Err(FtlError::NotInterior { rho });
        }
        if x.is_zero() {
            return Err(FtlError::Precondition("X must be nonzero".into()));
        }
        let r = max_radius(domain, eta, x, Complex64::ZERO, &self.spec);
        if r == 0.0 {
            return Err(FtlError::NoAdmissibleDisc);
        }
        Ok(UpperBound {
            value: 1.0 / r,
            witness: DiscWitness {
                radius: r,
                quad: Complex64::ZERO,
            },
        })
    }
}

impl DiscFamily for AffineQuadFamily {
    fn name(&self) -> &'static str {
        "affine+quad"
    }

    fn upper_bound(
        &self,
        domain: &DomainModel,
        eta: &PointC2,
        x: &TangentVec,
    ) -> Result<UpperBound> {
        let rho = domain.rho(eta);
        if rho >= 0.0 {
            return Err(FtlError::NotInterior { rho });
        }
        if x.is_zero() {
            return Err(FtlError::Precondition("X must be nonzero".into()));
        }
        let eps = domain.epsilon_of(eta);
        let mut best: Option<(f64, Complex64)> = None;
        for gr in -2..=2i32 {
            for gi in -2..=2i32 {
                let q = Complex64::new(gr as f64, gi as f64) * (0.5 * eps);
                let r = max_radius(domain, eta, x, q, &self.spec);
                if r > 0.0 && best.map_or(true, |(rb, _)| r > rb) {
                    best = Some((r, q));
                }
            }
        }
        let (r, q) = best.ok_or(FtlError::NoAdmissibleDisc)?;
        Ok(UpperBound {
            value: 1.0 / r,
            witness: DiscWitness { radius: r, quad: q },
        })
    }
}

/// One sample of the metric comparison.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MetricSample {
    pub delta: f64,
    pub m_val: f64,
    pub k_upper: f64,
    pub k_lower: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub rows: Vec<MetricSample>,
    pub slope_m: f64,
    pub slope_upper: f64,
    pub ratio_min: f64,
    pub ratio_max: f64,
    /// fitted A: max of k_lower(A=1)/k_upper over the sweep
    pub a_hat: f64,
}

/// Sweeps eta_delta = (0, -delta) over the grid, computing M, the disc
/// upper bound and the lower-bound formula at A = 1; fits log-log slopes
/// by least squares and reports the upper/gauge ratio range.
pub fn metric_ratio_sweep(
    domain: &DomainModel,
    deltas: &[f64],
    x: &TangentVec,
    family: &dyn DiscFamily,
) -> Result<SweepReport> {
    if deltas.is_empty() {
        return Err(FtlError::Precondition("empty delta grid".into()));
    }
    if deltas.iter().any(|&d| !(0.0 < d && d <= 0.1)) {
        return Err(FtlError::Precondition(
            "deltas must lie in (0, 0.1]".into(),
        ));
    }
    if x.is_zero() {
        return Err(FtlError::Precondition("X must be nonzero".into()));
    }
    let mut rows = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let eta = PointC2::new(Complex64::ZERO, Complex64::new(-delta, 0.0));
        let m_val = m_metric(domain, &eta, x)?;
        let upper = family.upper_bound(domain, &eta, x)?;
        let k_lower = catlin_lower_bound(domain, &eta, x, 1.0)?;
        rows.push(MetricSample {
            delta,
            m_val,
            k_upper: upper.value,
            k_lower,
            ratio: upper.value / m_val,
        });
    }
    let slope = |get: &dyn Fn(&MetricSample) -> f64| -> f64 {
        let n = rows.len() as f64;
        let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
        for r in &rows {
            let lx = r.delta.ln();
            let ly = get(r).ln();
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
        }
        (n * sxy - sx * sy) / (n * sxx - sx * sx)
    };
    let ratio_min = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let ratio_max = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let a_hat = rows
        .iter()
        .map(|r| r.k_lower / r.k_upper)
        .fold(0.0, f64::max);
    Ok(SweepReport {
        slope_m: slope(&|r| r.m_val),
        slope_upper: slope(&|r| r.k_upper),
        ratio_min,
        ratio_max,
        a_hat,
        rows,
    })
}

/// Log-spaced delta grid in [lo, hi] with exact endpoints.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| {
            if i == 0 || count == 1 {
                lo
            } else if i == count - 1 {
                hi
            } else {
                let u = i as f64 / (count - 1) as f64;
                (lo.ln() + u * (hi.ln() - lo.ln())).exp()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn tangential() -> TangentVec {
        TangentVec::new(c(1.0, 0.0), Complex64::ZERO)
    }

    fn normal() -> TangentVec {
        TangentVec::new(Complex64::ZERO, c(1.0, 0.0))
    }

    #[test]
    fn m_metric_closed_forms_on_egg() {
        let egg = DomainModel::egg(1, 1.0);
        let eta = PointC2::from_re(0.0, 0.0, -0.01, 0.0);
        let m = m_metric(&egg, &eta, &tangential()).unwrap();
        assert!((m - 10.0).abs() < 1e-12); // 1/sqrt(0.01)
        let m = m_metric(&egg, &eta, &normal()).unwrap();
        assert!((m - 100.0).abs() < 1e-12); // 1/0.01
        let zero = TangentVec::new(Complex64::ZERO, Complex64::ZERO);
        assert_eq!(m_metric(&egg, &eta, &zero).unwrap(), 0.0);
    }

    #[test]
    fn lower_bound_closed_forms_on_egg() {
        let egg = DomainModel::egg(1, 1.0);
        let delta = 0.01;
        let eta = PointC2::from_re(0.0, 0.0, -delta, 0.0);
        // normal direction: |rho_w2 X_2| / |rho| = 1/(2 delta)
        let v = catlin_lower_bound(&egg, &eta, &normal(), 1.0).unwrap();
        assert!((v - 1.0 / (2.0 * delta)).abs() < 1e-10);
        // tangential: tau = (2! * 2 delta / 1)^(1/2) = 2 sqrt(delta)
        let v = catlin_lower_bound(&egg, &eta, &tangential(), 1.0).unwrap();
        assert!((v - 1.0 / (2.0 * delta.sqrt())).abs() < 1e-10);
        // A = 2 halves the bound exactly
        let v2 = catlin_lower_bound(&egg, &eta, &tangential(), 2.0).unwrap();
        assert!((v2 - v / 2.0).abs() < 1e-14);
    }

    #[test]
    fn upper_bound_scales_linearly_in_x() {
        let egg = DomainModel::egg(1, 1.0);
        let eta = PointC2::from_re(0.0, 0.0, -0.02, 0.0);
        let fam = AffineFamily {
            spec: SearchSpec::default(),
        };
        let v1 = fam.upper_bound(&egg, &eta, &tangential()).unwrap().value;
        let v2 = fam
            .upper_bound(&egg, &eta, &tangential().scale(2.0))
            .unwrap()
            .value;
        assert!((v2 - 2.0 * v1).abs() < 1e-9 * v2);
    }

    #[test]
    fn upper_bound_orders_of_magnitude() {
        let egg = DomainModel::egg(1, 1.0);
        let delta = 1e-3;
        let eta = PointC2::from_re(0.0, 0.0, -delta, 0.0);
        let fam = AffineFamily {
            spec: SearchSpec::default(),
        };
        // normal: the half-plane factor gives R ~ delta
        let v = fam.upper_bound(&egg, &eta, &normal()).unwrap().value;
        assert!(v > 0.5 / delta && v < 4.0 / delta, "v = {v}");
        // tangential: |R t|^2 containment gives R ~ sqrt(2 delta)
        let v = fam.upper_bound(&egg, &eta, &tangential()).unwrap().value;
        let expected = 1.0 / (2.0 * delta).sqrt();
        assert!(v > 0.5 * expected && v < 2.0 * expected, "v = {v}");
    }

    #[test]
    fn quad_family_never_worse_than_affine() {
        let d = DomainModel::cross_term(1.0);
        let affine = AffineFamily {
            spec: SearchSpec::default(),
        };
        let quad = AffineQuadFamily {
            spec: SearchSpec::default(),
        };
        for delta in [1e-3, 1e-2] {
            let eta = PointC2::from_re(0.05, 0.02, -delta, 0.0);
            for x in [tangential(), normal(), TangentVec::new(c(0.6, 0.2), c(0.1, -0.4))] {
                let va = affine.upper_bound(&d, &eta, &x).unwrap().value;
                let vq = quad.upper_bound(&d, &eta, &x).unwrap().value;
                assert!(vq <= va * (1.0 + 1e-12), "family enlargement increased the bound");
            }
        }
    }

    #[test]
    fn metric_homogeneity() {
        let d = DomainModel::two_term(1.0);
        let eta = PointC2::from_re(0.1, -0.05, -0.03, 0.02);
        let x = TangentVec::new(c(0.3, 0.7), c(-0.2, 0.1));
        for s in [0.5, 2.0, 7.5] {
            let m1 = m_metric(&d, &eta, &x).unwrap();
            let m2 = m_metric(&d, &eta, &x.scale(s)).unwrap();
            assert!((m2 - s * m1).abs() < 1e-9 * m2);
            let l1 = catlin_lower_bound(&d, &eta, &x, 1.0).unwrap();
            let l2 = catlin_lower_bound(&d, &eta, &x.scale(s), 1.0).unwrap();
            assert!((l2 - s * l1).abs() < 1e-9 * l2);
        }
    }

    #[test]
    fn sweep_slopes_on_eggs() {
        for k in [1u32, 2] {
            let egg = DomainModel::egg(k, 1.0);
            let deltas = log_grid(1e-3, 1e-1, 7);
            let fam = AffineFamily {
                spec: SearchSpec::default(),
            };
            let rep = metric_ratio_sweep(&egg, &deltas, &tangential(), &fam).unwrap();
            let want = -1.0 / (2.0 * k as f64);
            assert!(
                (rep.slope_m - want).abs() < 0.01,
                "m slope {} vs {want}",
                rep.slope_m
            );
            assert!(
                (rep.slope_upper - want).abs() < 0.05,
                "upper slope {} vs {want}",
                rep.slope_upper
            );
            assert!(rep.ratio_max / rep.ratio_min < 10.0);
            assert!(rep.a_hat.is_finite());

            let rep = metric_ratio_sweep(&egg, &deltas, &normal(), &fam).unwrap();
            assert!((rep.slope_m + 1.0).abs() < 0.01);
            assert!((rep.slope_upper + 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn lower_bound_stays_below_upper_with_fitted_a() {
        let egg = DomainModel::egg(1, 1.0);
        let deltas = log_grid(1e-3, 1e-1, 9);
        let fam = AffineQuadFamily {
            spec: SearchSpec::default(),
        };
        let x = TangentVec::new(c(0.7, 0.1), c(0.2, -0.3));
        let rep = metric_ratio_sweep(&egg, &deltas, &x, &fam).unwrap();
        let a = rep.a_hat.max(1.0);
        for r in &rep.rows {
            assert!(r.k_lower / a <= r.k_upper * (1.0 + 1e-12));
        }
        // stability under grid refinement
        let fine = metric_ratio_sweep(&egg, &log_grid(1e-3, 1e-1, 17), &x, &fam).unwrap();
        assert!((fine.a_hat - rep.a_hat).abs() <= 0.05 * rep.a_hat.max(1.0));
    }

    #[test]
    fn registry_lookup() {
        assert!(disc_family("affine").is_some());
        assert!(disc_family("affine+quad").is_some());
        assert!(disc_family("cubic").is_none());
    }
}
