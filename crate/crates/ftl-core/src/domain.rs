//! Rigid polynomial model domains in C^2 and the Catlin apparatus.
//!
//! The model is U0^- = { rho < 0 } with rho(w1, w2) = 2 Re w2 + P(w1, conj w1)
//! on the polydisc U0 = { |w1| < box, |w2| < box }. For such rigid models the
//! normalizing automorphisms, the boundary gauge eps(eta), the anisotropic
//! radius tau(eta, eps), the dilations and the pseudo-balls Q[eta, eps] are
//! all exact finite computations.

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{FtlError, Result};
use crate::poly::MixedPoly;
use crate::rng;

/// Grid resolution for the subharmonicity certificate at construction.
const SUBH_GRID: usize = 101;

/// A point of C^2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointC2 {
    pub w1: Complex64,
    pub w2: Complex64,
}

impl PointC2 {
    pub fn new(w1: Complex64, w2: Complex64) -> Self {
        Self { w1, w2 }
    }

    pub fn from_re(x1: f64, y1: f64, x2: f64, y2: f64) -> Self {
        Self::new(Complex64::new(x1, y1), Complex64::new(x2, y2))
    }

    /// max(|w1|, |w2|)
    pub fn norm_inf(&self) -> f64 {
        self.w1.norm().max(self.w2.norm())
    }

    pub fn dist_inf(&self, other: &PointC2) -> f64 {
        (self.w1 - other.w1)
            .norm()
            .max((self.w2 - other.w2).norm())
    }
}

/// Tunable constants attached to a domain. `eps0` and `alpha0` bound the
/// scales at which the pseudo-ball estimates are invoked; `c5` is the
/// engulfing constant, measured per domain and then frozen.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DomainConstants {
    pub eps0: f64,
    pub alpha0: f64,
    pub c5: Option<f64>,
}

impl Default for DomainConstants {
    fn default() -> Self {
        Self {
            eps0: 0.1,
            alpha0: 0.1,
            c5: None,
        }
    }
}

/// Rigid model domain rho = 2 Re w2 + P(w1, conj w1) of finite type m.
#[derive(Clone, Debug)]
pub struct DomainModel {
    poly: MixedPoly,
    m: u32,
    box_: f64,
    pub constants: DomainConstants,
}

impl DomainModel {
    /// Validates the defining polynomial: no constant or harmonic terms,
    /// at least one mixed term, even type, subharmonic on the box.
    pub fn new(poly: MixedPoly, box_: f64) -> Result<Self> {
        if box_ <= 0.0 {
            return Err(FtlError::InvalidDomain(format!(
                "box half-width must be positive, got {box_}"
            )));
        }
        if let Some((j, k, _)) = poly.harmonic_part().upper_terms().next() {
            return Err(FtlError::InvalidDomain(format!(
                "defining polynomial has harmonic coefficient ({j},{k}); \
                 rigid models admit only mixed terms"
            )));
        }
        if !poly.has_mixed_terms() {
            return Err(FtlError::InvalidDomain(
                "defining polynomial has no mixed term: infinite type".into(),
            ));
        }
        let m = poly.degree();
        if m % 2 != 0 || m < 2 {
            return Err(FtlError::InvalidDomain(format!(
                "type m = {m} must be an even integer >= 2"
            )));
        }
        let (subharmonic, min) = poly.is_subharmonic(box_, SUBH_GRID)?;
        if !subharmonic {
            return Err(FtlError::InvalidDomain(format!(
                "defining polynomial is not subharmonic on the box (grid min {min:.3e})"
            )));
        }
        Ok(Self {
            poly,
            m,
            box_,
            constants: DomainConstants::default(),
        })
    }

    pub fn with_constants(mut self, constants: DomainConstants) -> Self {
        self.constants = constants;
        self
    }

    /// Egg domain |w1|^(2k).
    pub fn egg(k: u32, box_: f64) -> Self {
        Self::new(MixedPoly::modulus_power(k), box_).expect("egg domains are valid")
    }

    /// Two-term domain |w1|^4 + |w1|^2; type 4, but the quadratic term
    /// dominates the rescaling limit at the origin.
    pub fn two_term(box_: f64) -> Self {
        let p = MixedPoly::modulus_power(2).add(&MixedPoly::modulus_power(1));
        Self::new(p, box_).expect("two-term domain is valid")
    }

    /// |w1|^4 + 0.5 |w1|^2 + 0.5 Re(w1^2 conj(w1)): a domain with an
    /// off-diagonal coefficient, still subharmonic everywhere.
    pub fn cross_term(box_: f64) -> Self {
        let p = MixedPoly::modulus_power(2)
            .add(&MixedPoly::modulus_power(1).scale(0.5))
            .add(&MixedPoly::monomial(2, 1, Complex64::new(0.25, 0.0)).unwrap());
        Self::new(p, box_).expect("cross-term domain is valid")
    }

    pub fn poly(&self) -> &MixedPoly {
        &self.poly
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn box_half_width(&self) -> f64 {
        self.box_
    }

    /// rho(w) = 2 Re w2 + P(w1)
    pub fn rho(&self, w: &PointC2) -> f64 {
        2.0 * w.w2.re + self.poly.eval(w.w1)
    }

    pub fn contains_in_box(&self, w: &PointC2) -> bool {
        w.w1.norm() < self.box_ && w.w2.norm() < self.box_
    }

    pub fn is_interior(&self, w: &PointC2) -> bool {
        self.rho(w) < 0.0
    }

    /// The unique real eps with rho(eta + (0, eps)) = 0; closed form
    /// -rho(eta)/2 for rigid models. Positive iff eta is interior.
    pub fn epsilon_of(&self, eta: &PointC2) -> f64 {
        -self.rho(eta) / 2.0
    }

    /// Vertical projection of eta to the boundary: eta + (0, eps(eta)).
    pub fn eta_hat(&self, eta: &PointC2) -> PointC2 {
        PointC2::new(eta.w1, eta.w2 + Complex64::new(self.epsilon_of(eta), 0.0))
    }

    /// The normalizing automorphism at eta together with the recentred
    /// mixed coefficients a_{j,k}(eta). The harmonic part of
    /// rho o phi^{-1} - rho(eta) cancels exactly: d_k = -b_{k,0} where b
    /// is the recentring of P at eta.w1.
    pub fn normalizing_map(&self, eta: &PointC2) -> (NormalizingMap, MixedPoly) {
        let recentred = self.poly.recentre(eta.w1);
        let mut d = vec![Complex64::ZERO; self.m as usize];
        for (j, k, a) in recentred.terms() {
            if k == 0 && j >= 1 {
                d[(j - 1) as usize] = -a;
            }
        }
        let map = NormalizingMap {
            base: *eta,
            d0: Complex64::new(1.0, 0.0),
            d,
        };
        (map, recentred.mixed_part())
    }

    /// tau(eta, eps): the exact solution of
    /// inf { tau > 0 : || (1/eps) P_eta(tau w) ||_inf = 1 } under the
    /// max-coefficient norm, i.e. the minimum over mixed terms of
    /// (eps / |a_{j,k}|)^(1/(j+k)).
    pub fn tau(&self, eta: &PointC2, eps: f64) -> Result<f64> {
        let mixed = self.poly.recentre(eta.w1).mixed_part();
        tau_from_mixed(&mixed, eps)
    }

    /// Assembles the per-point bundle at an interior point.
    pub fn frame(&self, eta: &PointC2) -> Result<CatlinFrame> {
        let rho = self.rho(eta);
        if rho >= 0.0 {
            return Err(FtlError::NotInterior { rho });
        }
        let eps = -rho / 2.0;
        let eta_hat = self.eta_hat(eta);
        let (phi_hat, mixed) = self.normalizing_map(&eta_hat);
        let tau = tau_from_mixed(&mixed, eps)?;
        let image = phi_hat.apply(eta);
        debug_assert!(image.w1.norm() < 1e-14);
        let eps_tilde = -image.w2.re;
        debug_assert!(image.w2.im.abs() < 1e-12);
        Ok(CatlinFrame {
            eta: *eta,
            eta_hat,
            eps,
            eps_tilde,
            phi_hat,
            mixed,
            tau,
        })
    }

    /// Membership in the pseudo-ball Q[center, eps] =
    /// phi_center^{-1}(D_tau x D_eps), with strict inequalities.
    pub fn in_q(&self, center: &PointC2, eps: f64, w: &PointC2) -> Result<bool> {
        let (phi, mixed) = self.normalizing_map(center);
        let tau = tau_from_mixed(&mixed, eps)?;
        let v = phi.apply(w);
        Ok(v.w1.norm() < tau && v.w2.norm() < eps)
    }

    /// The smallest lambda (up to the boundary case) with
    /// w in Q[center, lambda]; used to fit the engulfing constants.
    pub fn q_scale_of(&self, center: &PointC2, w: &PointC2) -> f64 {
        let (phi, mixed) = self.normalizing_map(center);
        let v = phi.apply(w);
        let r1 = v.w1.norm();
        // need tau(center, lambda) > r1, i.e. lambda > |a| r1^(j+k) for all terms
        let mut lam = v.w2.norm();
        for (j, k, a) in mixed.terms() {
            lam = lam.max(a.norm() * r1.powi((j + k) as i32));
        }
        lam
    }

    /// J_eta(w) = || Delta o phi_hat (w) - Delta o phi_hat (eta) ||_inf.
    pub fn j_func(&self, eta: &PointC2, w: &PointC2) -> Result<f64> {
        Ok(self.frame(eta)?.j_to(w))
    }

    /// Verifies the chain-engulfing estimate: for a chain q_0 .. q_p with
    /// J_{q_i}(q_{i+1}) < 1, the dilated image of q_p lies in C(p) D^2
    /// with C(p) = 3 C5^(p-1) (C(0) = 3 for the single-point chain).
    pub fn chain_engulf(&self, chain: &[PointC2]) -> Result<ChainCertificate> {
        if chain.is_empty() {
            return Err(FtlError::Precondition("empty chain".into()));
        }
        let c5 = self.constants.c5.ok_or(FtlError::NotCalibrated)?;
        for (i, q) in chain.iter().enumerate() {
            let rho = self.rho(q);
            if rho >= 0.0 {
                return Err(FtlError::NotInterior { rho });
            }
            let _ = i;
        }
        let p = chain.len() - 1;
        let head = self.frame(&chain[0])?;
        for i in 0..p {
            let j = self.j_func(&chain[i], &chain[i + 1])?;
            if j >= 1.0 {
                return Err(FtlError::ChainLink { index: i, j });
            }
        }
        let cp = if p == 0 {
            3.0
        } else {
            3.0 * c5.powi(p as i32 - 1)
        };
        if p >= 1 {
            let scale = cp * head.eps;
            if scale >= self.constants.eps0 {
                return Err(FtlError::ChainScale {
                    scale,
                    eps0: self.constants.eps0,
                });
            }
        }
        let image = head.rescale(&chain[p]);
        Ok(ChainCertificate {
            ok: image.norm_inf() < cp,
            cp,
            image,
        })
    }

    /// Draws a uniform-ish interior point, margin away from the box edge.
    pub fn sample_interior(&self, rng_: &mut ChaCha8Rng) -> PointC2 {
        let b = self.box_ * 0.9;
        loop {
            let w1 = rng::complex_in_disc(rng_, b);
            let ceiling = -self.poly.eval(w1) / 2.0;
            let lo = -b;
            let hi = ceiling.min(b) - 1e-12;
            if hi <= lo {
                continue;
            }
            let x2 = lo + (hi - lo) * rand::Rng::random::<f64>(rng_);
            let y2 = -b + 2.0 * b * rand::Rng::random::<f64>(rng_);
            let w = PointC2::from_re(w1.re, w1.im, x2, y2);
            if self.rho(&w) < 0.0 && self.contains_in_box(&w) {
                return w;
            }
        }
    }

    /// Empirically fits the pseudo-ball constants over `samples` random
    /// tuples; also checks the exact tau sandwich inequalities and reports
    /// the first counterexample if one exists.
    pub fn measure_catlin_constants(&self, samples: usize, seed: u64) -> Result<ConstantsReport> {
        if samples < 1 {
            return Err(FtlError::Precondition("samples must be >= 1".into()));
        }
        let tuples = self.sample_constant_tuples(samples, seed);
        self.measure_constants_on(&tuples)
    }

    /// Tuple stream for the constants fit; sample i is identical for every
    /// run with the same seed (nested: the first n of 2n samples coincide).
    pub fn sample_constant_tuples(&self, samples: usize, seed: u64) -> Vec<ConstantTuple> {
        let mut out = Vec::with_capacity(samples);
        for i in 0..samples {
            let mut r = rng::stream(seed, "catlin-constants", i as u64);
            let eta = self.sample_interior(&mut r);
            let eta_p = self.sample_interior(&mut r);
            let eps_hi = rng::log_uniform(&mut r, 1e-6, 1.0);
            let eps_lo = rng::log_uniform(&mut r, 1e-6 * eps_hi, eps_hi);
            // a candidate point inside Q[eta_p, eps_q]; biased towards the
            // boundary of the pseudo-ball so the fitted maxima saturate
            let eps_q = rng::log_uniform(&mut r, 1e-5, self.constants.alpha0);
            let radial = 1.0 - 0.5 * rand::Rng::random::<f64>(&mut r).powi(3);
            let th1 = rand::Rng::random_range(&mut r, 0.0..std::f64::consts::TAU);
            let th2 = rand::Rng::random_range(&mut r, 0.0..std::f64::consts::TAU);
            let v = PointC2::new(
                Complex64::from_polar(radial, th1),
                Complex64::from_polar(radial, th2),
            );
            out.push(ConstantTuple {
                eta,
                eta_p,
                eps_lo,
                eps_hi,
                eps_q,
                ball_dir: v,
            });
        }
        out
    }

    /// The fit itself, on explicit tuples (the degenerate single-tuple case
    /// is exercised directly by tests).
    pub fn measure_constants_on(&self, tuples: &[ConstantTuple]) -> Result<ConstantsReport> {
        let mut c0 = f64::INFINITY;
        let mut c1: f64 = 0.0;
        let mut c2: f64 = 1.0;
        let mut c3: f64 = 1.0;
        let mut c4: f64 = 1.0;
        let mut middle_counterexample = None;
        let mut q_pairs = 0usize;

        for t in tuples {
            // exact sandwich: (e/e')^(1/2) tau(eta, e') <= tau(eta, e)
            //              <= (e/e')^(1/m) tau(eta, e')
            let tau_hi = self.tau(&t.eta, t.eps_hi)?;
            let tau_lo = self.tau(&t.eta, t.eps_lo)?;
            let ratio = t.eps_lo / t.eps_hi;
            let lower = ratio.sqrt() * tau_hi;
            let upper = ratio.powf(1.0 / self.m as f64) * tau_hi;
            let rel = 1e-9;
            if tau_lo < lower * (1.0 - rel) || tau_lo > upper * (1.0 + rel) {
                middle_counterexample.get_or_insert(MiddleCounterexample {
                    eta: t.eta,
                    eps: t.eps_lo,
                    eps_prime: t.eps_hi,
                    tau: tau_lo,
                    lower,
                    upper,
                });
            }
            c0 = c0.min(tau_lo / t.eps_lo.sqrt());
            c1 = c1.max(tau_lo / t.eps_lo.powf(1.0 / self.m as f64));

            // pseudo-ball clauses on pairs with eta in Q[eta', eps_q]
            let (phi_p, mixed_p) = self.normalizing_map(&t.eta_p);
            let tau_p = tau_from_mixed(&mixed_p, t.eps_q)?;
            let cand = phi_p.apply_inverse(&PointC2::new(
                t.ball_dir.w1 * tau_p,
                t.ball_dir.w2 * t.eps_q,
            ));
            if !self.contains_in_box(&cand) {
                continue;
            }
            q_pairs += 1;
            // (i) eps(eta) <= C2 (eps(eta') + eps)
            let num = self.epsilon_of(&cand);
            let den = self.epsilon_of(&t.eta_p) + t.eps_q;
            if den > 0.0 && num > 0.0 {
                c2 = c2.max(num / den);
            }
            // (ii)/(iii) Q[eta, eps] subset Q[eta', C3 eps] and conversely:
            // push boundary points of one ball through the other
            let (phi_c, mixed_c) = self.normalizing_map(&cand);
            let tau_c = tau_from_mixed(&mixed_c, t.eps_q)?;
            for dir in BALL_DIRECTIONS {
                let w_from_c = phi_c.apply_inverse(&PointC2::new(
                    dir.w1 * tau_c * 0.999,
                    dir.w2 * t.eps_q * 0.999,
                ));
                c3 = c3.max(self.q_scale_of(&t.eta_p, &w_from_c) / t.eps_q);
                let w_from_p = phi_p.apply_inverse(&PointC2::new(
                    dir.w1 * tau_p * 0.999,
                    dir.w2 * t.eps_q * 0.999,
                ));
                c3 = c3.max(self.q_scale_of(&cand, &w_from_p) / t.eps_q);
            }
            // (iv) tau comparability
            let r = tau_c / tau_p;
            c4 = c4.max(r.max(1.0 / r));
        }

        Ok(ConstantsReport {
            c0: if c0.is_finite() { c0 } else { 1.0 },
            c1: if c1 > 0.0 { c1 } else { 1.0 },
            c2,
            c3,
            c4,
            c5: (2.0 + 4.0 * c2) * c3,
            q_pairs,
            middle_counterexample,
        })
    }

    /// Measures the constants and freezes C5 into the domain configuration.
    pub fn calibrate(&mut self, samples: usize, seed: u64) -> Result<ConstantsReport> {
        let report = self.measure_catlin_constants(samples, seed)?;
        self.constants.c5 = Some(report.c5);
        Ok(report)
    }
}

/// Fixed probe directions on the torus |v1| = |v2| = 1, used when fitting
/// the ball-inclusion constants.
const BALL_DIRECTIONS: [PointC2; 4] = [
    PointC2 {
        w1: Complex64 { re: 1.0, im: 0.0 },
        w2: Complex64 { re: 1.0, im: 0.0 },
    },
    PointC2 {
        w1: Complex64 { re: -1.0, im: 0.0 },
        w2: Complex64 { re: 0.0, im: 1.0 },
    },
    PointC2 {
        w1: Complex64 { re: 0.0, im: 1.0 },
        w2: Complex64 { re: -1.0, im: 0.0 },
    },
    PointC2 {
        w1: Complex64 { re: 0.0, im: -1.0 },
        w2: Complex64 { re: 0.0, im: -1.0 },
    },
];

/// One sampled tuple for the constants fit.
#[derive(Clone, Copy, Debug)]
pub struct ConstantTuple {
    pub eta: PointC2,
    pub eta_p: PointC2,
    pub eps_lo: f64,
    pub eps_hi: f64,
    pub eps_q: f64,
    pub ball_dir: PointC2,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct MiddleCounterexample {
    #[serde(skip)]
    pub eta: PointC2,
    pub eps: f64,
    pub eps_prime: f64,
    pub tau: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConstantsReport {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    pub q_pairs: usize,
    pub middle_counterexample: Option<MiddleCounterexample>,
}

/// The triangular automorphism phi_eta of C^2 with
/// phi^{-1}(w1, w2) = eta + (w1, d0 w2 + sum d_k w1^k).
#[derive(Clone, Debug)]
pub struct NormalizingMap {
    base: PointC2,
    d0: Complex64,
    d: Vec<Complex64>,
}

impl NormalizingMap {
    pub fn base(&self) -> &PointC2 {
        &self.base
    }

    pub fn d0(&self) -> Complex64 {
        self.d0
    }

    /// d_k for k = 1..m
    pub fn d(&self) -> &[Complex64] {
        &self.d
    }

    fn poly_part(&self, v1: Complex64) -> Complex64 {
        let mut acc = Complex64::ZERO;
        let mut p = Complex64::new(1.0, 0.0);
        for dk in &self.d {
            p *= v1;
            acc += dk * p;
        }
        acc
    }

    /// phi_eta(w): the normalized coordinates of w.
    pub fn apply(&self, w: &PointC2) -> PointC2 {
        let v1 = w.w1 - self.base.w1;
        let v2 = (w.w2 - self.base.w2 - self.poly_part(v1)) / self.d0;
        PointC2::new(v1, v2)
    }

    /// phi_eta^{-1}(v)
    pub fn apply_inverse(&self, v: &PointC2) -> PointC2 {
        PointC2::new(
            self.base.w1 + v.w1,
            self.base.w2 + self.d0 * v.w2 + self.poly_part(v.w1),
        )
    }

    /// Jacobian action at the base point: (X1, (X2 - d1 X1)/d0).
    pub fn jacobian_at_base(&self, x: (Complex64, Complex64)) -> (Complex64, Complex64) {
        let d1 = self.d.first().copied().unwrap_or(Complex64::ZERO);
        (x.0, (x.1 - d1 * x.0) / self.d0)
    }
}

/// Per-point bundle: eta, its boundary lift, the gauge eps, the normalized
/// coordinates at the lift, the mixed coefficients and the radius tau.
#[derive(Clone, Debug)]
pub struct CatlinFrame {
    pub eta: PointC2,
    pub eta_hat: PointC2,
    pub eps: f64,
    pub eps_tilde: f64,
    pub phi_hat: NormalizingMap,
    pub mixed: MixedPoly,
    pub tau: f64,
}

impl CatlinFrame {
    /// Anisotropic dilation (w1/tau, w2/eps).
    pub fn dilate(&self, w: &PointC2) -> PointC2 {
        PointC2::new(w.w1 / self.tau, w.w2 / self.eps)
    }

    pub fn dilate_inverse(&self, v: &PointC2) -> PointC2 {
        PointC2::new(v.w1 * self.tau, v.w2 * self.eps)
    }

    /// S(w) = Delta o phi_hat (w); S(eta_hat) = 0 exactly.
    pub fn rescale(&self, w: &PointC2) -> PointC2 {
        self.dilate(&self.phi_hat.apply(w))
    }

    pub fn rescale_inverse(&self, v: &PointC2) -> PointC2 {
        self.phi_hat.apply_inverse(&self.dilate_inverse(v))
    }

    /// J_eta(w) = || S(w) - S(eta) ||_inf
    pub fn j_to(&self, w: &PointC2) -> f64 {
        let a = self.rescale(w);
        let b = self.s_eta();
        a.dist_inf(&b)
    }

    /// S(eta) = (0, -eps_tilde/eps); exactly (0, -1) for rigid models.
    pub fn s_eta(&self) -> PointC2 {
        PointC2::new(
            Complex64::ZERO,
            Complex64::new(-self.eps_tilde / self.eps, 0.0),
        )
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ChainCertificate {
    pub ok: bool,
    pub cp: f64,
    #[serde(skip)]
    pub image: PointC2,
}

/// Closed-form tau from a mixed coefficient set:
/// min over stored terms of (eps/|a|)^(1/(j+k)).
pub fn tau_from_mixed(mixed: &MixedPoly, eps: f64) -> Result<f64> {
    if eps <= 0.0 {
        return Err(FtlError::Precondition(format!(
            "tau needs eps > 0, got {eps}"
        )));
    }
    let mut tau = f64::INFINITY;
    for (j, k, a) in mixed.terms() {
        if j >= 1 && k >= 1 {
            tau = tau.min((eps / a.norm()).powf(1.0 / (j + k) as f64));
        }
    }
    if tau.is_finite() {
        Ok(tau)
    } else {
        Err(FtlError::InfiniteType)
    }
}
