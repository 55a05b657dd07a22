//! Real-valued mixed polynomials in (w, conj(w)).
//!
//! A `MixedPoly` stores the coefficients a_{j,k} of
//! sum a_{j,k} w^j conj(w)^k with the reality constraint
//! a_{k,j} = conj(a_{j,k}). Construction always goes through the upper
//! triangle (j >= k) and mirrors exactly, so the constraint holds
//! bit-for-bit, not merely up to rounding.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{FtlError, Result};

/// Coefficients with modulus below this are snapped to exact zero on
/// construction; prevents floating residue from inflating the degree.
pub const COEFF_ZERO_SNAP: f64 = 1e-14;

/// Grid certificate tolerance: the Laplacian minimum may dip this far
/// below zero and still count as subharmonic.
pub const SUBHARMONIC_TOL: f64 = -1e-10;

#[derive(Clone, Debug, PartialEq, Default)]
pub struct MixedPoly {
    coeffs: BTreeMap<(u32, u32), Complex64>,
}

impl MixedPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Builds from upper-triangle terms (j >= k); the conjugate pair is
    /// implied. Diagonal terms must be real to within the snap threshold.
    pub fn from_terms(terms: &[(u32, u32, Complex64)]) -> Result<Self> {
        let mut upper: BTreeMap<(u32, u32), Complex64> = BTreeMap::new();
        for &(j, k, a) in terms {
            if j < k {
                return Err(FtlError::InvalidDomain(format!(
                    "term ({j},{k}) is below the diagonal; list only j >= k"
                )));
            }
            if j == k && a.im.abs() > COEFF_ZERO_SNAP {
                return Err(FtlError::InvalidDomain(format!(
                    "diagonal coefficient ({j},{k}) must be real, got im = {}",
                    a.im
                )));
            }
            let a = if j == k { Complex64::new(a.re, 0.0) } else { a };
            *upper.entry((j, k)).or_insert(Complex64::ZERO) += a;
        }
        Ok(Self::from_upper(upper))
    }

    /// Single monomial `a * w^j conj(w)^k + conj(a) * w^k conj(w)^j`
    /// (the mirror is dropped when j == k).
    pub fn monomial(j: u32, k: u32, a: Complex64) -> Result<Self> {
        if j >= k {
            Self::from_terms(&[(j, k, a)])
        } else {
            Self::from_terms(&[(k, j, a.conj())])
        }
    }

    /// |w|^(2k)
    pub fn modulus_power(k: u32) -> Self {
        Self::from_terms(&[(k, k, Complex64::new(1.0, 0.0))]).expect("diagonal term is real")
    }

    fn from_upper(upper: BTreeMap<(u32, u32), Complex64>) -> Self {
        let mut coeffs = BTreeMap::new();
        for ((j, k), a) in upper {
            debug_assert!(j >= k);
            if a.norm() < COEFF_ZERO_SNAP {
                continue;
            }
            let a = if j == k { Complex64::new(a.re, 0.0) } else { a };
            coeffs.insert((j, k), a);
            if j != k {
                coeffs.insert((k, j), a.conj());
            }
        }
        Self { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Max total degree j + k over stored terms; 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.coeffs.keys().map(|&(j, k)| j + k).max().unwrap_or(0)
    }

    pub fn coeff(&self, j: u32, k: u32) -> Complex64 {
        self.coeffs.get(&(j, k)).copied().unwrap_or(Complex64::ZERO)
    }

    /// All stored (j, k, a_{j,k}) in lexicographic order.
    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, Complex64)> + '_ {
        self.coeffs.iter().map(|(&(j, k), &a)| (j, k, a))
    }

    /// Upper-triangle view (j >= k), the canonical external form.
    pub fn upper_terms(&self) -> impl Iterator<Item = (u32, u32, Complex64)> + '_ {
        self.terms().filter(|&(j, k, _)| j >= k)
    }

    /// Evaluates at z. The imaginary parts of the conjugate pairs cancel;
    /// the residue is asserted small and truncated.
    pub fn eval(&self, z: Complex64) -> f64 {
        if self.coeffs.is_empty() {
            return 0.0;
        }
        let deg = self.degree() as usize;
        let zp = power_table(z, deg);
        let zb = power_table(z.conj(), deg);
        let mut acc = Complex64::ZERO;
        for (&(j, k), &a) in &self.coeffs {
            acc += a * zp[j as usize] * zb[k as usize];
        }
        debug_assert!(
            acc.im.abs() <= 1e-12 * (1.0 + acc.re.abs()),
            "imaginary residue {} too large",
            acc.im
        );
        acc.re
    }

    /// Taylor recentring: returns Q with Q(w) = P(c + w) - P(c) as an
    /// identity of polynomials; the constant term of Q is exactly zero.
    pub fn recentre(&self, c: Complex64) -> MixedPoly {
        let deg = self.degree() as usize;
        let cp = power_table(c, deg);
        let cb = power_table(c.conj(), deg);
        let binom = binomial_table(deg);
        let mut upper: BTreeMap<(u32, u32), Complex64> = BTreeMap::new();
        for p in 0..=deg as u32 {
            for q in 0..=p {
                if p == 0 && q == 0 {
                    continue; // constant term removed by definition
                }
                let mut acc = Complex64::ZERO;
                for (&(j, k), &a) in &self.coeffs {
                    if j >= p && k >= q {
                        let w = binom[j as usize][p as usize] * binom[k as usize][q as usize];
                        acc += a * w * cp[(j - p) as usize] * cb[(k - q) as usize];
                    }
                }
                if acc.norm() >= COEFF_ZERO_SNAP {
                    upper.insert((p, q), acc);
                }
            }
        }
        MixedPoly::from_upper(upper)
    }

    /// Laplacian: Delta(w^j conj(w)^k) = 4jk w^(j-1) conj(w)^(k-1).
    pub fn laplacian(&self) -> MixedPoly {
        let mut upper = BTreeMap::new();
        for (&(j, k), &a) in &self.coeffs {
            if j >= 1 && k >= 1 && j >= k {
                upper.insert((j - 1, k - 1), 4.0 * (j as f64) * (k as f64) * a);
            }
        }
        MixedPoly::from_upper(upper)
    }

    /// Max modulus over stored coefficients.
    pub fn sup_norm(&self) -> f64 {
        self.coeffs.values().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Certifies Delta P >= 0 on an n x n grid over [-box, box]^2.
    /// Returns (certified, grid minimum). Requires n >= 2.
    pub fn is_subharmonic(&self, box_: f64, n: usize) -> Result<(bool, f64)> {
        if n < 2 {
            return Err(FtlError::Precondition(format!(
                "subharmonicity grid needs n >= 2, got {n}"
            )));
        }
        let lap = self.laplacian();
        let mut min = f64::INFINITY;
        for i in 0..n {
            let x = -box_ + 2.0 * box_ * (i as f64) / ((n - 1) as f64);
            for l in 0..n {
                let y = -box_ + 2.0 * box_ * (l as f64) / ((n - 1) as f64);
                let v = lap.eval(Complex64::new(x, y));
                if v < min {
                    min = v;
                }
            }
        }
        Ok((min >= SUBHARMONIC_TOL, min))
    }

    /// Terms with j, k >= 1.
    pub fn mixed_part(&self) -> MixedPoly {
        let upper = self
            .coeffs
            .iter()
            .filter(|(&(j, k), _)| j >= 1 && k >= 1 && j >= k)
            .map(|(&jk, &a)| (jk, a))
            .collect();
        MixedPoly::from_upper(upper)
    }

    /// Terms with j == 0 or k == 0 (including the constant).
    pub fn harmonic_part(&self) -> MixedPoly {
        let upper = self
            .coeffs
            .iter()
            .filter(|(&(j, k), _)| (j == 0 || k == 0) && j >= k)
            .map(|(&jk, &a)| (jk, a))
            .collect();
        MixedPoly::from_upper(upper)
    }

    pub fn has_mixed_terms(&self) -> bool {
        self.coeffs.keys().any(|&(j, k)| j >= 1 && k >= 1)
    }

    /// Scales by a real factor.
    pub fn scale(&self, factor: f64) -> MixedPoly {
        let upper = self
            .coeffs
            .iter()
            .filter(|(&(j, k), _)| j >= k)
            .map(|(&jk, &a)| (jk, a * factor))
            .collect();
        MixedPoly::from_upper(upper)
    }

    pub fn add(&self, other: &MixedPoly) -> MixedPoly {
        let mut upper: BTreeMap<(u32, u32), Complex64> = BTreeMap::new();
        for (&(j, k), &a) in self.coeffs.iter().chain(other.coeffs.iter()) {
            if j >= k {
                *upper.entry((j, k)).or_insert(Complex64::ZERO) += a;
            }
        }
        MixedPoly::from_upper(upper)
    }

    /// Largest coefficient-wise difference to another polynomial.
    pub fn sup_distance(&self, other: &MixedPoly) -> f64 {
        let mut keys: Vec<(u32, u32)> = self.coeffs.keys().copied().collect();
        keys.extend(other.coeffs.keys().copied());
        keys.sort_unstable();
        keys.dedup();
        keys.iter()
            .map(|&(j, k)| (self.coeff(j, k) - other.coeff(j, k)).norm())
            .fold(0.0, f64::max)
    }

    /// Exact conjugate symmetry of the stored map. Always true for values
    /// built through the public constructors; used by tests.
    pub fn is_real(&self) -> bool {
        self.coeffs
            .iter()
            .all(|(&(j, k), &a)| self.coeff(k, j) == a.conj())
    }
}

impl serde::Serialize for MixedPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(None)?;
        for (j, k, a) in self.upper_terms() {
            seq.serialize_element(&(j, k, a.re, a.im))?;
        }
        seq.end()
    }
}

impl fmt::Display for MixedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (j, k, a) in self.upper_terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:.6}{:+.6}i) w^{} wb^{}", a.re, a.im, j, k)?;
        }
        Ok(())
    }
}

fn power_table(z: Complex64, deg: usize) -> Vec<Complex64> {
    let mut t = Vec::with_capacity(deg + 1);
    t.push(Complex64::new(1.0, 0.0));
    for i in 1..=deg {
        let prev = t[i - 1];
        t.push(prev * z);
    }
    t
}

fn binomial_table(n: usize) -> Vec<Vec<f64>> {
    let mut b = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..=n {
        b[i][0] = 1.0;
        for j in 1..=i {
            b[i][j] = b[i - 1][j - 1] + if j <= i - 1 { b[i - 1][j] } else { 0.0 };
        }
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Independent term-by-term evaluation used as the oracle for eval
    /// and recentre: no power tables, no shared code path.
    fn eval_oracle(p: &MixedPoly, z: Complex64) -> f64 {
        let mut acc = Complex64::ZERO;
        for (j, k, a) in p.terms() {
            let mut term = a;
            for _ in 0..j {
                term *= z;
            }
            for _ in 0..k {
                term *= z.conj();
            }
            acc += term;
        }
        acc.re
    }

    #[test]
    fn eval_single_monomial() {
        let p = MixedPoly::modulus_power(1);
        assert_eq!(p.eval(c(2.0, 0.0)), 4.0);
    }

    #[test]
    fn eval_zero_poly() {
        assert_eq!(MixedPoly::zero().eval(c(3.0, -1.0)), 0.0);
    }

    #[test]
    fn eval_two_term_example() {
        // |w|^4 + Re(w^2 conj(w)): a22 = 1, a21 = 1/2 (mirror implied)
        let p = MixedPoly::from_terms(&[(2, 2, c(1.0, 0.0)), (2, 1, c(0.5, 0.0))]).unwrap();
        let v = p.eval(c(1.0, 0.0));
        assert!((v - 2.0).abs() < 1e-12, "got {v}");
        // cross-check against the oracle at a non-trivial point
        let z = c(0.7, -0.3);
        assert!((p.eval(z) - eval_oracle(&p, z)).abs() < 1e-12);
    }

    #[test]
    fn recentre_at_origin_is_identity() {
        let p = MixedPoly::modulus_power(1);
        assert_eq!(p.recentre(Complex64::ZERO), p);
    }

    #[test]
    fn recentre_unit_egg_at_one() {
        // |1 + w|^2 - 1 = w + conj(w) + |w|^2
        let p = MixedPoly::modulus_power(1);
        let q = p.recentre(c(1.0, 0.0));
        assert_eq!(q.coeff(1, 0), c(1.0, 0.0));
        assert_eq!(q.coeff(0, 1), c(1.0, 0.0));
        assert_eq!(q.coeff(1, 1), c(1.0, 0.0));
        assert_eq!(q.coeff(0, 0), Complex64::ZERO);
    }

    #[test]
    fn recentre_matches_eval_oracle() {
        let p = MixedPoly::modulus_power(2);
        let ctr = c(0.5, 0.0);
        let q = p.recentre(ctr);
        let pc = eval_oracle(&p, ctr);
        let mut worst = 0.0f64;
        for i in 0..100 {
            let th = (i as f64) * 0.37;
            let w = Complex64::from_polar(0.05 + 0.009 * i as f64, th);
            let lhs = q.eval(w);
            let rhs = eval_oracle(&p, ctr + w) - pc;
            worst = worst.max((lhs - rhs).abs());
        }
        assert!(worst < 1e-12, "worst recentre error {worst}");
    }

    #[test]
    fn laplacian_of_modulus_squared_is_four() {
        let p = MixedPoly::modulus_power(1);
        let lap = p.laplacian();
        assert_eq!(lap.coeff(0, 0), c(4.0, 0.0));
        assert_eq!(lap.degree(), 0);
    }

    #[test]
    fn laplacian_of_harmonic_is_zero() {
        // Re(w^3) = (w^3 + conj(w)^3)/2
        let p = MixedPoly::from_terms(&[(3, 0, c(0.5, 0.0))]).unwrap();
        assert!(p.laplacian().is_zero());
    }

    #[test]
    fn laplacian_matches_finite_differences() {
        let p = MixedPoly::modulus_power(2); // Delta = 16 |w|^2
        let lap = p.laplacian();
        let h = 1e-4;
        let mut worst = 0.0f64;
        for i in 0..20 {
            let z = Complex64::from_polar(0.1 + 0.04 * i as f64, 1.7 * i as f64);
            let fd = (eval_oracle(&p, z + c(h, 0.0)) + eval_oracle(&p, z - c(h, 0.0))
                + eval_oracle(&p, z + c(0.0, h))
                + eval_oracle(&p, z - c(0.0, h))
                - 4.0 * eval_oracle(&p, z))
                / (h * h);
            worst = worst.max((fd - lap.eval(z)).abs());
        }
        assert!(worst < 1e-6, "finite-difference Laplacian error {worst}");
    }

    #[test]
    fn sup_norm_examples() {
        assert_eq!(MixedPoly::modulus_power(1).sup_norm(), 1.0);
        assert_eq!(MixedPoly::zero().sup_norm(), 0.0);
        // 0.3 |w|^2 + Re(w^2): enumerated moduli {0.3, 0.5, 0.5} -> 0.5
        let p = MixedPoly::from_terms(&[(1, 1, c(0.3, 0.0)), (2, 0, c(0.5, 0.0))]).unwrap();
        let oracle = p.terms().map(|(_, _, a)| a.norm()).fold(0.0, f64::max);
        assert_eq!(p.sup_norm(), oracle);
        assert_eq!(p.sup_norm(), 0.5);
    }

    #[test]
    fn subharmonic_examples() {
        let p4 = MixedPoly::modulus_power(2);
        let (ok, min) = p4.is_subharmonic(1.0, 50).unwrap();
        assert!(ok);
        assert!(min >= 0.0);

        let neg = MixedPoly::modulus_power(1).scale(-1.0);
        let (ok, min) = neg.is_subharmonic(1.0, 10).unwrap();
        assert!(!ok);
        assert!((min + 4.0).abs() < 1e-12);

        // |w|^4 - 0.5 |w|^2 has Delta(0) = -2
        let p = MixedPoly::modulus_power(2).add(&MixedPoly::modulus_power(1).scale(-0.5));
        let (ok, _) = p.is_subharmonic(1.0, 100).unwrap();
        assert!(!ok);
        assert!((p.laplacian().eval(Complex64::ZERO) + 2.0).abs() < 1e-12);
    }

    #[test]
    fn subharmonic_rejects_tiny_grid() {
        assert!(MixedPoly::zero().is_subharmonic(1.0, 1).is_err());
    }

    #[test]
    fn zero_snap_on_construction() {
        let p = MixedPoly::from_terms(&[(1, 1, c(1e-15, 0.0))]).unwrap();
        assert!(p.is_zero());
    }

    #[test]
    fn diagonal_must_be_real() {
        assert!(MixedPoly::from_terms(&[(1, 1, c(1.0, 0.5))]).is_err());
    }

    #[test]
    fn laplacian_zero_iff_no_mixed_terms() {
        // harmonic direction
        let h = MixedPoly::from_terms(&[(2, 0, c(0.3, 0.7)), (5, 0, c(-1.0, 0.2))]).unwrap();
        assert!(!h.has_mixed_terms());
        assert!(h.laplacian().is_zero());
        // mixed direction
        let m = MixedPoly::from_terms(&[(3, 1, c(0.1, 0.0))]).unwrap();
        assert!(m.has_mixed_terms());
        assert!(!m.laplacian().is_zero());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_coeff() -> impl Strategy<Value = Complex64> {
            (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex64::new(re, im))
        }

        fn arb_poly() -> impl Strategy<Value = MixedPoly> {
            proptest::collection::vec(((0u32..5), (0u32..5), arb_coeff()), 1..6).prop_map(
                |terms| {
                    let upper: Vec<_> = terms
                        .into_iter()
                        .map(|(a, b, z)| {
                            let (j, k) = if a >= b { (a, b) } else { (b, a) };
                            let z = if j == k { Complex64::new(z.re, 0.0) } else { z };
                            (j, k, z)
                        })
                        .collect();
                    MixedPoly::from_terms(&upper).unwrap()
                },
            )
        }

        proptest! {
            #[test]
            fn recentre_identity(p in arb_poly(), cr in -0.8f64..0.8, ci in -0.8f64..0.8,
                                  wr in -0.8f64..0.8, wi in -0.8f64..0.8) {
                let ctr = Complex64::new(cr, ci);
                let w = Complex64::new(wr, wi);
                let q = p.recentre(ctr);
                let lhs = q.eval(w);
                let rhs = eval_oracle(&p, ctr + w) - eval_oracle(&p, ctr);
                prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + rhs.abs()));
            }

            #[test]
            fn reality_preserved(p in arb_poly(), cr in -0.8f64..0.8, ci in -0.8f64..0.8) {
                let ctr = Complex64::new(cr, ci);
                prop_assert!(p.is_real());
                prop_assert!(p.recentre(ctr).is_real());
                prop_assert!(p.laplacian().is_real());
            }

            #[test]
            fn laplacian_vanishes_iff_harmonic(p in arb_poly()) {
                prop_assert_eq!(p.laplacian().is_zero(), !p.has_mixed_terms());
            }

            #[test]
            fn sup_norm_homogeneous(p in arb_poly(), alpha in -3.0f64..3.0) {
                let lhs = p.scale(alpha).sup_norm();
                let rhs = alpha.abs() * p.sup_norm();
                // scaling can snap tiny coefficients to zero; allow that slack
                prop_assert!((lhs - rhs).abs() <= COEFF_ZERO_SNAP + 1e-12 * rhs.abs());
            }
        }
    }
}
