//! J-families: a metric target space together with the separation
//! functionals J_eta. Each variant implements the same trait so the engine
//! and the suites can swap them at runtime.

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;

use crate::domain::{DomainModel, PointC2};
use crate::rng;

/// A family (J_eta) of positive functionals on a metric space, with
/// J_eta(eta) = 0. The engine is generic over this trait; `j_from` lets an
/// implementation amortize per-center work across many evaluations.
pub trait JFamily {
    type Point: Clone;

    fn dist(&self, a: &Self::Point, b: &Self::Point) -> f64;

    fn j(&self, eta: &Self::Point, w: &Self::Point) -> f64;

    /// Curried evaluator centred at `eta`.
    fn j_from<'a>(&'a self, eta: &Self::Point) -> Box<dyn Fn(&Self::Point) -> f64 + 'a> {
        let eta = eta.clone();
        Box::new(move |w| self.j(&eta, w))
    }

    /// Draws a point within distance `radius` of `center`; used by the
    /// vanishing-profile certification.
    fn sample_near(&self, center: &Self::Point, radius: f64, rng_: &mut ChaCha8Rng)
        -> Self::Point;
}

/// A point of the Riemann sphere; non-finite components encode infinity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpherePoint(pub Complex64);

impl SpherePoint {
    pub fn infinity() -> Self {
        SpherePoint(Complex64::new(f64::INFINITY, 0.0))
    }

    pub fn is_infinite(&self) -> bool {
        !self.0.re.is_finite() || !self.0.im.is_finite() || self.0.norm() > 1e150
    }
}

/// Chordal distance d(z, w) = 2 |z - w| / sqrt((1 + |z|^2)(1 + |w|^2)),
/// extended continuously to infinity.
pub fn chordal(a: &SpherePoint, b: &SpherePoint) -> f64 {
    match (a.is_infinite(), b.is_infinite()) {
        (true, true) => 0.0,
        (true, false) => 2.0 / (1.0f64).hypot(b.0.norm()),
        (false, true) => 2.0 / (1.0f64).hypot(a.0.norm()),
        (false, false) => {
            let na = (1.0f64).hypot(a.0.norm());
            let nb = (1.0f64).hypot(b.0.norm());
            2.0 * (a.0 - b.0).norm() / (na * nb)
        }
    }
}

/// J_eta = chordal distance: the classical renormalization setting for
/// holomorphic maps into the sphere.
#[derive(Clone, Copy, Debug, Default)]
pub struct SphereJFamily;

impl JFamily for SphereJFamily {
    type Point = SpherePoint;

    fn dist(&self, a: &SpherePoint, b: &SpherePoint) -> f64 {
        chordal(a, b)
    }

    fn j(&self, eta: &SpherePoint, w: &SpherePoint) -> f64 {
        chordal(eta, w)
    }

    fn sample_near(&self, center: &SpherePoint, radius: f64, rng_: &mut ChaCha8Rng) -> SpherePoint {
        if center.is_infinite() {
            // neighbours of infinity: large modulus
            let r = 2.0 / radius.max(1e-12);
            return SpherePoint(rng::complex_in_annulus(rng_, r, 4.0 * r));
        }
        // planar radius matching a chordal ball of the given radius,
        // then rejection
        let scale = radius * (1.0 + center.0.norm_sqr());
        for _ in 0..64 {
            let cand = SpherePoint(center.0 + rng::complex_in_disc(rng_, scale));
            if chordal(center, &cand) <= radius {
                return cand;
            }
        }
        *center
    }
}

/// J_eta = Euclidean distance on the plane; the degenerate sanity-check
/// family used by the Schwarz-property tests.
#[derive(Clone, Copy, Debug, Default)]
pub struct PlaneJFamily;

impl JFamily for PlaneJFamily {
    type Point = Complex64;

    fn dist(&self, a: &Complex64, b: &Complex64) -> f64 {
        (a - b).norm()
    }

    fn j(&self, eta: &Complex64, w: &Complex64) -> f64 {
        (eta - w).norm()
    }

    fn sample_near(&self, center: &Complex64, radius: f64, rng_: &mut ChaCha8Rng) -> Complex64 {
        center + rng::complex_in_disc(rng_, radius)
    }
}

/// The finite-type family: X = U0^- with the sup-norm distance and
/// J_eta(w) = || S_eta(w) - S_eta(eta) ||_inf built from the Catlin frame
/// at eta. Centers must be interior; J extends by +infinity outside.
pub struct CatlinJFamily {
    domain: DomainModel,
}

impl CatlinJFamily {
    pub fn new(domain: DomainModel) -> Self {
        Self { domain }
    }

    pub fn domain(&self) -> &DomainModel {
        &self.domain
    }
}

impl JFamily for CatlinJFamily {
    type Point = PointC2;

    fn dist(&self, a: &PointC2, b: &PointC2) -> f64 {
        a.dist_inf(b)
    }

    fn j(&self, eta: &PointC2, w: &PointC2) -> f64 {
        match self.domain.frame(eta) {
            Ok(f) => f.j_to(w),
            Err(_) => f64::INFINITY,
        }
    }

    fn j_from<'a>(&'a self, eta: &PointC2) -> Box<dyn Fn(&PointC2) -> f64 + 'a> {
        match self.domain.frame(eta) {
            Ok(f) => Box::new(move |w| f.j_to(w)),
            Err(_) => Box::new(|_| f64::INFINITY),
        }
    }

    fn sample_near(&self, center: &PointC2, radius: f64, rng_: &mut ChaCha8Rng) -> PointC2 {
        for _ in 0..128 {
            let cand = PointC2::new(
                center.w1 + rng::complex_in_disc(rng_, radius),
                center.w2 + rng::complex_in_disc(rng_, radius),
            );
            if self.domain.is_interior(&cand) && self.domain.contains_in_box(&cand) {
                return cand;
            }
        }
        *center
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn chordal_examples() {
        let fam = SphereJFamily;
        // antipodal points
        let d = fam.dist(&SpherePoint(c(0.0, 0.0)), &SpherePoint::infinity());
        assert!((d - 2.0).abs() < 1e-15);
        // coincident points
        assert_eq!(fam.dist(&SpherePoint(c(0.3, -0.4)), &SpherePoint(c(0.3, -0.4))), 0.0);
        // direct formula: d(1, -1) = 2*2/sqrt(2*2) = 2
        let d = fam.dist(&SpherePoint(c(1.0, 0.0)), &SpherePoint(c(-1.0, 0.0)));
        assert!((d - 2.0).abs() < 1e-15);
    }

    #[test]
    fn chordal_is_robust_for_huge_moduli() {
        let a = SpherePoint(c(1e120, 0.0));
        let b = SpherePoint::infinity();
        let d = chordal(&a, &b);
        assert!(d.is_finite() && d < 1e-100);
    }

    #[test]
    fn catlin_family_values() {
        let fam = CatlinJFamily::new(DomainModel::egg(1, 1.0));
        let eta = PointC2::from_re(0.1, 0.0, -0.3, 0.0);
        assert_eq!(fam.j(&eta, &eta), 0.0);
        let hat = fam.domain().eta_hat(&eta);
        assert!((fam.j(&eta, &hat) - 1.0).abs() < 1e-12);
        // exterior center evaluates to infinity
        let outside = PointC2::from_re(0.0, 0.0, 0.5, 0.0);
        assert!(fam.j(&outside, &eta).is_infinite());
    }

    #[test]
    fn sampled_neighbours_respect_radius() {
        let fam = SphereJFamily;
        let mut r = crate::rng::stream(2, "near", 0);
        let center = SpherePoint(c(1.5, -0.5));
        for _ in 0..200 {
            let p = fam.sample_near(&center, 0.05, &mut r);
            assert!(chordal(&center, &p) <= 0.05 + 1e-12);
        }
    }
}
