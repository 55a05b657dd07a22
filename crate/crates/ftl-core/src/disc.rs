//! Polynomial analytic discs into a model domain, with containment
//! certification by boundary sampling. For rigid models the restriction of
//! rho to a disc is a trigonometric polynomial in the angle, so a sampling
//! density of a few times the degree certifies the sign.

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;

use crate::domain::{DomainModel, PointC2};
use crate::rng;

/// f(t) = (sum c1[i] t^i, sum c2[i] t^i); c*[0] is the center f(0).
#[derive(Clone, Debug)]
pub struct AnalyticDisc {
    pub c1: Vec<Complex64>,
    pub c2: Vec<Complex64>,
}

impl AnalyticDisc {
    pub fn affine(base: PointC2, dir1: Complex64, dir2: Complex64) -> Self {
        Self {
            c1: vec![base.w1, dir1],
            c2: vec![base.w2, dir2],
        }
    }

    pub fn eval(&self, t: Complex64) -> PointC2 {
        PointC2::new(horner(&self.c1, t), horner(&self.c2, t))
    }

    pub fn center(&self) -> PointC2 {
        PointC2::new(
            self.c1.first().copied().unwrap_or(Complex64::ZERO),
            self.c2.first().copied().unwrap_or(Complex64::ZERO),
        )
    }

    /// f'(0)
    pub fn derivative_at_zero(&self) -> (Complex64, Complex64) {
        (
            self.c1.get(1).copied().unwrap_or(Complex64::ZERO),
            self.c2.get(1).copied().unwrap_or(Complex64::ZERO),
        )
    }

    pub fn degree(&self) -> usize {
        self.c1.len().max(self.c2.len()).saturating_sub(1)
    }
}

fn horner(coeffs: &[Complex64], t: Complex64) -> Complex64 {
    let mut acc = Complex64::ZERO;
    for &c in coeffs.iter().rev() {
        acc = acc * t + c;
    }
    acc
}

/// Containment sampling density.
#[derive(Clone, Copy, Debug)]
pub struct ContainmentSpec {
    pub boundary_samples: usize,
    pub radial_samples: usize,
    pub boundary_radius: f64,
}

impl Default for ContainmentSpec {
    fn default() -> Self {
        Self {
            boundary_samples: 256,
            radial_samples: 64,
            boundary_radius: 1.0 - 1e-6,
        }
    }
}

/// Checks rho(f(t)) < 0 and box containment over the sampled closed disc;
/// returns the worst sampled rho and the first offending parameter.
pub fn containment(
    domain: &DomainModel,
    disc: &AnalyticDisc,
    spec: &ContainmentSpec,
) -> (bool, f64, Option<Complex64>) {
    let tau = std::f64::consts::TAU;
    let mut worst = f64::NEG_INFINITY;
    let mut offender = None;
    let mut probe = |t: Complex64| {
        let w = disc.eval(t);
        let r = domain.rho(&w);
        if r > worst {
            worst = r;
        }
        if (r >= 0.0 || !domain.contains_in_box(&w)) && offender.is_none() {
            offender = Some(t);
        }
    };
    probe(Complex64::ZERO);
    for b in 0..spec.boundary_samples {
        probe(Complex64::from_polar(
            spec.boundary_radius,
            tau * b as f64 / spec.boundary_samples as f64,
        ));
    }
    for ir in 1..=spec.radial_samples {
        let r = spec.boundary_radius * ir as f64 / (spec.radial_samples + 1) as f64;
        for b in 0..16 {
            probe(Complex64::from_polar(r, tau * b as f64 / 16.0));
        }
    }
    (offender.is_none(), worst, offender)
}

/// Draws a polynomial disc of the given degree anchored at `base`, with
/// coefficients on the Catlin scale of the frame at `base`, shrunk until
/// the containment certificate passes.
pub fn sample_disc(
    domain: &DomainModel,
    base: PointC2,
    degree: usize,
    rng_: &mut ChaCha8Rng,
    spec: &ContainmentSpec,
) -> Option<AnalyticDisc> {
    let frame = domain.frame(&base).ok()?;
    let mut scale = 0.8;
    for _ in 0..24 {
        let mut c1 = vec![base.w1];
        let mut c2 = vec![base.w2];
        let mut fall = 1.0;
        for _ in 1..=degree.max(1) {
            c1.push(rng::complex_in_disc(rng_, frame.tau * scale * fall));
            c2.push(rng::complex_in_disc(rng_, frame.eps * scale * fall));
            fall *= 0.5;
        }
        let disc = AnalyticDisc { c1, c2 };
        if containment(domain, &disc, spec).0 {
            return Some(disc);
        }
        scale *= 0.7;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn affine_disc_eval() {
        let d = AnalyticDisc::affine(
            PointC2::from_re(0.0, 0.0, -0.5, 0.0),
            Complex64::new(0.1, 0.0),
            Complex64::ZERO,
        );
        let p = d.eval(Complex64::new(1.0, 0.0));
        assert!((p.w1.re - 0.1).abs() < 1e-15);
        assert!((p.w2.re + 0.5).abs() < 1e-15);
        assert_eq!(d.derivative_at_zero().0, Complex64::new(0.1, 0.0));
    }

    #[test]
    fn containment_flags_escape() {
        let egg = DomainModel::egg(1, 1.0);
        // vertical disc that crosses the boundary
        let d = AnalyticDisc::affine(
            PointC2::from_re(0.0, 0.0, -0.1, 0.0),
            Complex64::ZERO,
            Complex64::new(0.2, 0.0),
        );
        let (ok, worst, off) = containment(&egg, &d, &ContainmentSpec::default());
        assert!(!ok);
        assert!(worst > 0.0);
        assert!(off.is_some());
    }

    #[test]
    fn sampled_discs_are_contained() {
        let egg = DomainModel::egg(2, 1.0);
        let mut r = stream(5, "discs", 0);
        let spec = ContainmentSpec::default();
        let mut found = 0;
        for i in 0..50 {
            let base = PointC2::from_re(0.0, 0.0, -0.01 - 0.001 * i as f64, 0.0);
            if let Some(d) = sample_disc(&egg, base, 4, &mut r, &spec) {
                found += 1;
                assert!(containment(&egg, &d, &spec).0);
                assert!(d.center().dist_inf(&base) == 0.0);
            }
        }
        assert!(found >= 45, "only {found} discs sampled");
    }
}
