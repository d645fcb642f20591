//! Dense complex polynomials: representation, compensated evaluation,
//! differentiation, expansion from roots, and the named sequence generators.

mod literal;
mod sequence;

pub use literal::{format_complex, parse_complex};
pub use sequence::{Family, PolySequenceSpec, DEGREE_CAP};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::wide::{WideComplex, WidePoly};

/// Magnitude below which trailing coefficients are treated as phantom
/// leading terms and stripped.
const TRAILING_EPS: f64 = 1e-300;

/// Dense polynomial over the complex numbers, coefficients in ascending
/// degree order. The leading coefficient is nonzero unless the polynomial is
/// identically zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

impl Polynomial {
    /// Build from ascending coefficients. Rejects empty and non-finite
    /// input; strips trailing coefficients of magnitude at most 1e-300
    /// (warning when they are not exact zeros).
    pub fn new(coeffs: Vec<Complex64>) -> Result<Polynomial> {
        if coeffs.is_empty() {
            return Err(Error::InvalidInput(
                "polynomial needs at least one coefficient".into(),
            ));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite { what: "polynomial coefficient" });
        }
        let mut coeffs = coeffs;
        let mut stripped_tiny = false;
        while coeffs.len() > 1 && coeffs.last().unwrap().norm() <= TRAILING_EPS {
            stripped_tiny |= *coeffs.last().unwrap() != Complex64::new(0.0, 0.0);
            coeffs.pop();
        }
        if stripped_tiny {
            log::warn!("stripped trailing coefficients of magnitude <= {TRAILING_EPS:e}");
        }
        Ok(Polynomial { coeffs })
    }

    /// The constant polynomial `c`.
    pub fn constant(c: Complex64) -> Polynomial {
        assert!(c.re.is_finite() && c.im.is_finite());
        Polynomial { coeffs: vec![c] }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Leading coefficient; zero only for the zero polynomial.
    pub fn gamma(&self) -> Complex64 {
        *self.coeffs.last().unwrap()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> Complex64 {
        self.coeffs.get(j).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == Complex64::new(0.0, 0.0)
    }

    /// Horner evaluation with compensated accumulation (error-free product
    /// and sum transformations), accurate to a few ulps of the condition-free
    /// bound even for ill-scaled coefficients.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::NonFinite { what: "evaluation point" });
        }
        Ok(comp_horner(&self.coeffs, z))
    }

    /// Coefficient-wise derivative. The degree drops by exactly one, so a
    /// constant input is refused rather than collapsed to the zero polynomial.
    pub fn derivative(&self) -> Result<Polynomial> {
        if self.degree() == 0 {
            return Err(Error::ConstantDerivative);
        }
        let coeffs: Vec<Complex64> = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, c)| c * j as f64)
            .collect();
        Polynomial::new(coeffs)
    }

    /// Expand `gamma * prod (z - root)`. The product is accumulated in
    /// extended-range arithmetic so intermediate coefficient growth cannot
    /// overflow; only the final narrowing to f64 can fail.
    pub fn from_roots(roots: &[Complex64], gamma: Complex64) -> Result<Polynomial> {
        if gamma == Complex64::new(0.0, 0.0) {
            return Err(Error::InvalidInput("leading coefficient must be nonzero".into()));
        }
        if !gamma.re.is_finite() || !gamma.im.is_finite() {
            return Err(Error::NonFinite { what: "leading coefficient" });
        }
        if roots.iter().any(|r| !r.re.is_finite() || !r.im.is_finite()) {
            return Err(Error::NonFinite { what: "root" });
        }
        let mut coeffs = vec![WideComplex::ZERO; roots.len() + 1];
        coeffs[0] = WideComplex::from_c64(gamma);
        let mut len = 1;
        for r in roots {
            let rw = WideComplex::from_c64(*r);
            coeffs[len] = coeffs[len - 1];
            for j in (1..len).rev() {
                coeffs[j] = coeffs[j - 1].sub(coeffs[j].mul(rw));
            }
            coeffs[0] = coeffs[0].mul(rw).neg();
            len += 1;
        }
        let narrow = WidePoly::from_coeffs(coeffs).narrow().ok_or_else(|| {
            Error::InvalidInput("expanded coefficients exceed the f64 range".into())
        })?;
        Polynomial::new(narrow)
    }

    /// `self - w`: the level-set shift used by fiber solving.
    pub fn shifted(&self, w: Complex64) -> Result<Polynomial> {
        if !w.re.is_finite() || !w.im.is_finite() {
            return Err(Error::NonFinite { what: "level value" });
        }
        let mut coeffs = self.coeffs.clone();
        coeffs[0] -= w;
        Polynomial::new(coeffs)
    }

    pub(crate) fn to_wide(&self) -> WidePoly {
        WidePoly::from_c64_slice(&self.coeffs)
    }
}

impl std::fmt::Display for Polynomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut first = true;
        for c in &self.coeffs {
            if !first {
                f.write_str(",")?;
            }
            first = false;
            f.write_str(&format_complex(*c))?;
        }
        Ok(())
    }
}

impl std::str::FromStr for Polynomial {
    type Err = Error;

    fn from_str(s: &str) -> Result<Polynomial> {
        literal::parse_polynomial(s)
    }
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, f64::mul_add(a, b, -p))
}

/// Complex Horner with a compensation channel: every product and sum keeps
/// its rounding error, and the error polynomial is accumulated alongside the
/// value, effectively doubling the working precision.
pub(crate) fn comp_horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let mut s = *coeffs.last().unwrap();
    let mut c = Complex64::new(0.0, 0.0);
    for a in coeffs.iter().rev().skip(1) {
        let (p_rr, e_rr) = two_prod(s.re, z.re);
        let (p_ii, e_ii) = two_prod(s.im, z.im);
        let (p_ri, e_ri) = two_prod(s.re, z.im);
        let (p_ir, e_ir) = two_prod(s.im, z.re);
        let (d_re, f_re) = two_sum(p_rr, -p_ii);
        let (d_im, f_im) = two_sum(p_ri, p_ir);
        let (s_re, g_re) = two_sum(d_re, a.re);
        let (s_im, g_im) = two_sum(d_im, a.im);
        let err = Complex64::new(
            ((e_rr - e_ii) + f_re) + g_re,
            ((e_ri + e_ir) + f_im) + g_im,
        );
        c = c * z + err;
        s = Complex64::new(s_re, s_im);
    }
    s + c
}
