//! Generators for the three named polynomial families and their derivative
//! towers: k-fold iterates of a base polynomial, the Mandelbrot center
//! sequence q_1 = c, q_{k+1} = q_k^2 + c, and Chebyshev polynomials rescaled
//! to an interval.
//!
//! Coefficients of high-index members grow doubly exponentially, so all
//! generation runs in extended-exponent arithmetic and only the final
//! narrowing to f64 can fail. Point evaluation of high-index members through
//! their dense coefficients is catastrophically ill-conditioned near the
//! filled Julia set, so the `jet` path evaluates values and derivatives
//! through the defining recurrences instead; root solving and escape
//! iteration build on it.

use num_complex::Complex64;

use super::Polynomial;
use crate::error::{Error, Result};
use crate::wide::{WideComplex, WidePoly, WideSeries};

/// Hard cap on realized degrees; keeps dense storage and fiber solves at
/// desk scale.
pub const DEGREE_CAP: u64 = 8192;

/// Which sequence a `PolySequenceSpec` draws from.
#[derive(Clone, Debug)]
pub enum Family {
    /// q_k = the k-fold composition of a fixed base polynomial (degree >= 2).
    Iterate(Polynomial),
    /// q_1(c) = c, q_{k+1}(c) = q_k(c)^2 + c; degree 2^{k-1}, monic.
    MandelbrotCenter,
    /// Classical degree-k Chebyshev polynomial rescaled from [-1, 1] to [a, b].
    ChebyshevInterval { a: f64, b: f64 },
}

/// Descriptor of one member q_k^{(m)} of a family: index k (from 1) and
/// derivative order m (from 0). Validated so the realized polynomial is
/// nonconstant and its degree is within `DEGREE_CAP`.
#[derive(Clone, Debug)]
pub struct PolySequenceSpec {
    family: Family,
    k: u32,
    m: u32,
    n_k: u64,
}

impl PolySequenceSpec {
    pub fn new(family: Family, k: u32, m: u32) -> Result<PolySequenceSpec> {
        if k == 0 {
            return Err(Error::InvalidInput("sequence index k must be at least 1".into()));
        }
        match &family {
            Family::Iterate(base) => {
                if base.degree() < 2 {
                    return Err(Error::InvalidInput(format!(
                        "iterate family needs a base of degree >= 2, got {}",
                        base.degree()
                    )));
                }
            }
            Family::MandelbrotCenter => {}
            Family::ChebyshevInterval { a, b } => {
                if !a.is_finite() || !b.is_finite() {
                    return Err(Error::NonFinite { what: "interval endpoint" });
                }
                if a >= b {
                    return Err(Error::InvalidInput(format!(
                        "interval must satisfy a < b, got [{a}, {b}]"
                    )));
                }
            }
        }
        let n_k = raw_degree(&family, k)?;
        if n_k <= m as u64 {
            return Err(Error::InvalidInput(format!(
                "derivative order {m} leaves no degree: the base member has degree {n_k}"
            )));
        }
        Ok(PolySequenceSpec { family, k, m, n_k })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Degree of the underived member q_k.
    pub fn n_k(&self) -> u64 {
        self.n_k
    }

    /// Degree of the realized polynomial q_k^{(m)}.
    pub fn degree(&self) -> u64 {
        self.n_k - self.m as u64
    }

    /// Same family and derivative order at another index.
    pub fn with_k(&self, k: u32) -> Result<PolySequenceSpec> {
        PolySequenceSpec::new(self.family.clone(), k, self.m)
    }

    /// Same family and index at another derivative order.
    pub fn with_m(&self, m: u32) -> Result<PolySequenceSpec> {
        PolySequenceSpec::new(self.family.clone(), self.k, m)
    }

    /// log |leading coefficient| of the realized polynomial, computed in
    /// closed form (exact in the log domain even when the coefficient itself
    /// overflows f64).
    pub fn log_gamma_abs(&self) -> f64 {
        let base_part = match &self.family {
            Family::Iterate(base) => {
                let d = base.degree() as u64;
                // gamma_k = gamma_base^{1 + d + ... + d^{k-1}}
                let mut exp_sum = 0u64;
                let mut pw = 1u64;
                for _ in 0..self.k {
                    exp_sum += pw;
                    pw *= d;
                }
                exp_sum as f64 * base.gamma().norm().ln()
            }
            Family::MandelbrotCenter => 0.0,
            Family::ChebyshevInterval { a, b } => {
                let kf = self.k as f64;
                (kf - 1.0) * std::f64::consts::LN_2 + kf * (2.0 / (b - a)).ln()
            }
        };
        let falling: f64 = (0..self.m as u64).map(|i| ((self.n_k - i) as f64).ln()).sum();
        base_part + falling
    }

    /// |leading coefficient| of the realized polynomial; may overflow to
    /// infinity for extreme parameters (the log form never does).
    pub fn gamma_abs(&self) -> f64 {
        self.log_gamma_abs().exp()
    }

    /// Dense coefficients of q_k^{(m)}. Fails with the smallest index whose
    /// coefficients leave the f64 range.
    pub fn generate(&self) -> Result<Polynomial> {
        let (wp, first_overflow) = self.wide_realized();
        match wp.narrow() {
            Some(coeffs) => Polynomial::new(coeffs),
            None => Err(Error::Overflow {
                smallest_failing_k: first_overflow.unwrap_or(self.k),
            }),
        }
    }

    /// Extended-range dense coefficients of the realized polynomial plus the
    /// smallest level (if any) whose coefficients already exceed f64 range.
    pub(crate) fn wide_realized(&self) -> (WidePoly, Option<u32>) {
        let (mut wp, mut first_overflow) = self.wide_base();
        for _ in 0..self.m {
            wp = wp.derivative();
        }
        if first_overflow.is_none() && wp.max_exp() > 1023 {
            first_overflow = Some(self.k);
        }
        (wp, first_overflow)
    }

    /// Wide coefficients of the underived q_k, tracking the first level at
    /// which some coefficient magnitude passes 2^1023.
    fn wide_base(&self) -> (WidePoly, Option<u32>) {
        let mut first_overflow = None;
        let cur = match &self.family {
            Family::Iterate(base) => {
                let bw = base.to_wide();
                let mut cur = bw.clone();
                for level in 2..=self.k {
                    cur = compose_wide(&bw, &cur);
                    if first_overflow.is_none() && cur.max_exp() > 1023 {
                        first_overflow = Some(level);
                    }
                }
                cur
            }
            Family::MandelbrotCenter => {
                let mut cur = WidePoly::from_c64_slice(&[
                    Complex64::new(0.0, 0.0),
                    Complex64::new(1.0, 0.0),
                ]);
                for level in 2..=self.k {
                    cur = cur.mul(&cur).added(1, WideComplex::ONE);
                    if first_overflow.is_none() && cur.max_exp() > 1023 {
                        first_overflow = Some(level);
                    }
                }
                cur
            }
            Family::ChebyshevInterval { a, b } => {
                let ell = WidePoly::from_c64_slice(&[
                    Complex64::new(-(a + b) / (b - a), 0.0),
                    Complex64::new(2.0 / (b - a), 0.0),
                ]);
                let mut prev = WidePoly::from_coeffs(vec![WideComplex::ONE]);
                let mut cur = ell.clone();
                for level in 2..=self.k {
                    let next = ell.mul(&cur).scale_f64(2.0).sub(&prev);
                    prev = cur;
                    cur = next;
                    if first_overflow.is_none() && cur.max_exp() > 1023 {
                        first_overflow = Some(level);
                    }
                }
                cur
            }
        };
        (cur, first_overflow)
    }

    /// Derivatives q_k^{(m)}, q_k^{(m+1)}, ..., q_k^{(m+extra)} at `z`,
    /// evaluated through the defining recurrence on truncated Taylor jets.
    /// This is backward-stable where dense-coefficient evaluation is not, and
    /// it never overflows.
    pub(crate) fn jet(&self, z: WideComplex, extra: usize) -> Vec<WideComplex> {
        let order = self.m as usize + extra;
        let series = match &self.family {
            Family::Iterate(base) => {
                let coeffs: Vec<WideComplex> =
                    base.coeffs().iter().map(|&c| WideComplex::from_c64(c)).collect();
                let mut s = WideSeries::variable(z, order);
                for _ in 0..self.k {
                    s = compose_series(&coeffs, &s);
                }
                s
            }
            Family::MandelbrotCenter => {
                let var = WideSeries::variable(z, order);
                let mut s = var.clone();
                for _ in 2..=self.k {
                    s = s.mul(&s).add(&var);
                }
                s
            }
            Family::ChebyshevInterval { a, b } => {
                let alpha = 2.0 / (b - a);
                let beta = -(a + b) / (b - a);
                let mut ell = WideSeries::constant(
                    z.mul_f64(alpha).add(WideComplex::from_f64(beta)),
                    order,
                );
                if order >= 1 {
                    ell.c[1] = WideComplex::from_f64(alpha);
                }
                let two = WideComplex::from_f64(2.0);
                let mut prev = WideSeries::constant(WideComplex::ONE, order);
                let mut cur = ell.clone();
                for _ in 2..=self.k {
                    let next = ell.mul(&cur).scale(two).sub(&prev);
                    prev = cur;
                    cur = next;
                }
                cur
            }
        };
        let derivs = series.derivatives();
        derivs[self.m as usize..=order].to_vec()
    }

    /// Realized value and first derivative at a plain point.
    pub(crate) fn value_and_deriv(&self, z: Complex64) -> (WideComplex, WideComplex) {
        let j = self.jet(WideComplex::from_c64(z), 1);
        (j[0], j[1])
    }

    /// Realized value at a wide point (escape iteration).
    pub(crate) fn value_wide(&self, z: WideComplex) -> WideComplex {
        self.jet(z, 0)[0]
    }
}

/// Degree of the underived q_k, bailing out past `DEGREE_CAP`.
fn raw_degree(family: &Family, k: u32) -> Result<u64> {
    let bail = |acc: u64| Error::DegreeCap { degree: acc, cap: DEGREE_CAP };
    match family {
        Family::Iterate(base) => {
            let d = base.degree() as u64;
            let mut acc = 1u64;
            for _ in 0..k {
                acc = acc.saturating_mul(d);
                if acc > DEGREE_CAP {
                    return Err(bail(acc));
                }
            }
            Ok(acc)
        }
        Family::MandelbrotCenter => {
            let mut acc = 1u64;
            for _ in 2..=k {
                acc *= 2;
                if acc > DEGREE_CAP {
                    return Err(bail(acc));
                }
            }
            Ok(acc)
        }
        Family::ChebyshevInterval { .. } => {
            let acc = k as u64;
            if acc > DEGREE_CAP {
                return Err(bail(acc));
            }
            Ok(acc)
        }
    }
}

/// outer(inner) by Horner over polynomial coefficients.
fn compose_wide(outer: &WidePoly, inner: &WidePoly) -> WidePoly {
    let cs = outer.coeffs();
    let mut acc = WidePoly::from_coeffs(vec![*cs.last().unwrap()]);
    for c in cs.iter().rev().skip(1) {
        acc = acc.mul(inner).added(0, *c);
    }
    acc
}

/// outer(series) by Horner over truncated jets.
fn compose_series(outer: &[WideComplex], s: &WideSeries) -> WideSeries {
    let order = s.order();
    let mut acc = WideSeries::constant(*outer.last().unwrap(), order);
    for c in outer.iter().rev().skip(1) {
        acc = acc.mul(s).add_const(*c);
    }
    acc
}
