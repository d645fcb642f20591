//! Extended-exponent complex arithmetic.
//!
//! Orbit values and coefficients of high-index sequence polynomials grow
//! doubly exponentially and leave the f64 range long before they stop being
//! meaningful. `WideComplex` carries a complex mantissa with a shared
//! power-of-two exponent, so evaluation never overflows or underflows while
//! keeping 53-bit precision. `WidePoly` stores dense coefficients in that
//! form; it drives Horner evaluation, Newton-polygon root radii, and the
//! narrowing back to plain `f64` coefficients.

use num_complex::Complex64;

/// 2^e for |e| <= 1023, exact.
#[inline]
fn pow2i(e: i32) -> f64 {
    debug_assert!((-1022..=1023).contains(&e));
    f64::from_bits(((e + 1023) as u64) << 52)
}

/// Binary exponent of a finite, nonzero, normal f64.
#[inline]
fn exp_of(x: f64) -> i32 {
    (((x.to_bits() >> 52) & 0x7ff) as i32) - 1023
}

/// Complex number `(re + i im) * 2^exp` with `max(|re|, |im|)` kept in
/// `[1, 2)` (or exact zero with `exp == 0`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct WideComplex {
    re: f64,
    im: f64,
    exp: i64,
}

impl WideComplex {
    pub const ZERO: WideComplex = WideComplex { re: 0.0, im: 0.0, exp: 0 };
    pub const ONE: WideComplex = WideComplex { re: 1.0, im: 0.0, exp: 0 };

    #[inline]
    fn normalized(re: f64, im: f64, exp: i64) -> WideComplex {
        let s = re.abs().max(im.abs());
        if s == 0.0 {
            return WideComplex::ZERO;
        }
        // Mantissas between ops stay well inside the normal range, so the
        // exponent extraction is exact.
        let e = exp_of(s);
        if e == 0 {
            WideComplex { re, im, exp }
        } else {
            let sc = pow2i(-e);
            // Saturating: orbits contracting toward an attracting fixed point
            // shrink doubly exponentially and would wrap the exponent range.
            WideComplex { re: re * sc, im: im * sc, exp: exp.saturating_add(e as i64) }
        }
    }

    #[inline]
    pub fn from_c64(z: Complex64) -> WideComplex {
        debug_assert!(z.re.is_finite() && z.im.is_finite());
        let s = z.re.abs().max(z.im.abs());
        if s == 0.0 {
            return WideComplex::ZERO;
        }
        // Rescale subnormals before exponent extraction.
        if s < f64::MIN_POSITIVE {
            let sc = pow2i(200);
            Self::normalized(z.re * sc, z.im * sc, -200)
        } else {
            Self::normalized(z.re, z.im, 0)
        }
    }

    #[inline]
    pub fn from_f64(x: f64) -> WideComplex {
        Self::from_c64(Complex64::new(x, 0.0))
    }

    /// Narrow to f64, saturating to infinity / flushing to zero outside range.
    pub fn to_c64(self) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        if self.exp > 1023 {
            return Complex64::new(self.re * f64::INFINITY, self.im * f64::INFINITY);
        }
        if self.exp < -1070 {
            return Complex64::new(0.0, 0.0);
        }
        if self.exp >= -1022 {
            let sc = pow2i(self.exp as i32);
            Complex64::new(self.re * sc, self.im * sc)
        } else {
            let sc = pow2i((self.exp + 537) as i32) ;
            let fix = pow2i(-537);
            Complex64::new(self.re * sc * fix, self.im * sc * fix)
        }
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }

    #[inline]
    pub fn mul(self, rhs: WideComplex) -> WideComplex {
        Self::normalized(
            self.re * rhs.re - self.im * rhs.im,
            self.re * rhs.im + self.im * rhs.re,
            self.exp.saturating_add(rhs.exp),
        )
    }

    #[inline]
    pub fn sqr(self) -> WideComplex {
        self.mul(self)
    }

    #[inline]
    pub fn mul_f64(self, x: f64) -> WideComplex {
        Self::normalized(self.re * x, self.im * x, self.exp)
    }

    #[inline]
    pub fn neg(self) -> WideComplex {
        WideComplex { re: -self.re, im: -self.im, exp: self.exp }
    }

    pub fn add(self, rhs: WideComplex) -> WideComplex {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (hi, lo) = if self.exp >= rhs.exp { (self, rhs) } else { (rhs, self) };
        let d = hi.exp.saturating_sub(lo.exp);
        if d > 120 {
            return hi;
        }
        let sc = pow2i(-(d as i32));
        Self::normalized(hi.re + lo.re * sc, hi.im + lo.im * sc, hi.exp)
    }

    #[inline]
    pub fn sub(self, rhs: WideComplex) -> WideComplex {
        self.add(rhs.neg())
    }

    /// log of the modulus, natural base; `-inf` for zero.
    pub fn ln_abs(self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        0.5 * (self.re * self.re + self.im * self.im).ln() + self.exp as f64 * std::f64::consts::LN_2
    }

    /// self / rhs narrowed to f64, saturating far out of range.
    pub fn ratio_c64(self, rhs: WideComplex) -> Complex64 {
        if rhs.is_zero() {
            return Complex64::new(f64::INFINITY, f64::INFINITY);
        }
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        let den = rhs.re * rhs.re + rhs.im * rhs.im;
        let q = Complex64::new(
            (self.re * rhs.re + self.im * rhs.im) / den,
            (self.im * rhs.re - self.re * rhs.im) / den,
        );
        let e = self.exp - rhs.exp;
        if e > 2000 {
            return q * f64::INFINITY;
        }
        if e < -2000 {
            return Complex64::new(0.0, 0.0);
        }
        let mut out = q;
        let mut rem = e;
        while rem != 0 {
            let step = rem.clamp(-1000, 1000);
            out *= pow2i(step as i32);
            rem -= step;
        }
        out
    }
}

/// Dense polynomial with extended-range coefficients, ascending powers.
#[derive(Clone, Debug)]
pub(crate) struct WidePoly {
    coeffs: Vec<WideComplex>,
}

impl WidePoly {
    pub fn from_coeffs(coeffs: Vec<WideComplex>) -> WidePoly {
        let mut p = WidePoly { coeffs };
        p.trim();
        p
    }

    pub fn from_c64_slice(coeffs: &[Complex64]) -> WidePoly {
        Self::from_coeffs(coeffs.iter().map(|&c| WideComplex::from_c64(c)).collect())
    }

    fn trim(&mut self) {
        while self.coeffs.len() > 1 && self.coeffs.last().unwrap().is_zero() {
            self.coeffs.pop();
        }
        if self.coeffs.is_empty() {
            self.coeffs.push(WideComplex::ZERO);
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[WideComplex] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> WideComplex {
        self.coeffs.get(j).copied().unwrap_or(WideComplex::ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_zero()
    }

    /// Value at a (wide) point.
    pub fn horner(&self, z: WideComplex) -> WideComplex {
        let mut v = *self.coeffs.last().unwrap();
        for c in self.coeffs.iter().rev().skip(1) {
            v = v.mul(z).add(*c);
        }
        v
    }

    /// Value and first derivative in one pass.
    pub fn horner_pair(&self, z: Complex64) -> (WideComplex, WideComplex) {
        let zw = WideComplex::from_c64(z);
        let mut v = *self.coeffs.last().unwrap();
        let mut d = WideComplex::ZERO;
        for c in self.coeffs.iter().rev().skip(1) {
            d = d.mul(zw).add(v);
            v = v.mul(zw).add(*c);
        }
        (v, d)
    }

    pub fn derivative(&self) -> WidePoly {
        if self.coeffs.len() == 1 {
            return WidePoly::from_coeffs(vec![WideComplex::ZERO]);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, c)| c.mul_f64(j as f64))
            .collect();
        WidePoly::from_coeffs(coeffs)
    }

    pub fn mul(&self, rhs: &WidePoly) -> WidePoly {
        if self.is_zero() || rhs.is_zero() {
            return WidePoly::from_coeffs(vec![WideComplex::ZERO]);
        }
        let n = self.coeffs.len() + rhs.coeffs.len() - 1;
        let mut out = vec![WideComplex::ZERO; n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].add(a.mul(*b));
            }
        }
        WidePoly::from_coeffs(out)
    }

    /// Replace the constant term by `coeff(0) - w`.
    pub fn shift_constant(&self, w: Complex64) -> WidePoly {
        let mut coeffs = self.coeffs.clone();
        coeffs[0] = coeffs[0].sub(WideComplex::from_c64(w));
        WidePoly::from_coeffs(coeffs)
    }

    /// Add `v` to the coefficient of degree `j`, extending with zeros if needed.
    pub fn added(&self, j: usize, v: WideComplex) -> WidePoly {
        let mut coeffs = self.coeffs.clone();
        if coeffs.len() <= j {
            coeffs.resize(j + 1, WideComplex::ZERO);
        }
        coeffs[j] = coeffs[j].add(v);
        WidePoly::from_coeffs(coeffs)
    }

    pub fn sub(&self, rhs: &WidePoly) -> WidePoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|j| self.coeff(j).sub(rhs.coeff(j))).collect();
        WidePoly::from_coeffs(coeffs)
    }

    pub fn scale_f64(&self, x: f64) -> WidePoly {
        WidePoly::from_coeffs(self.coeffs.iter().map(|c| c.mul_f64(x)).collect())
    }

    /// log(sum of coefficient moduli) via log-sum-exp.
    pub fn ln_coeff_sum(&self, skip_leading: bool) -> f64 {
        let end = if skip_leading { self.coeffs.len() - 1 } else { self.coeffs.len() };
        let m = self.coeffs[..end].iter().map(|c| c.ln_abs()).fold(f64::NEG_INFINITY, f64::max);
        if m == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        let s: f64 = self.coeffs[..end].iter().map(|c| (c.ln_abs() - m).exp()).sum();
        m + s.ln()
    }

    /// Narrow all coefficients to f64; `None` if any magnitude leaves range.
    pub fn narrow(&self) -> Option<Vec<Complex64>> {
        let mut out = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            let z = c.to_c64();
            if !z.re.is_finite() || !z.im.is_finite() {
                return None;
            }
            out.push(z);
        }
        Some(out)
    }

    pub fn max_exp(&self) -> i64 {
        self.coeffs.iter().filter(|c| !c.is_zero()).map(|c| c.exp).max().unwrap_or(0)
    }

    /// Per-root initial moduli from the Newton polygon: the upper convex hull
    /// of (j, log|c_j|) yields, per hull segment, the classical estimate of
    /// that many root moduli. Returned ascending, length = degree.
    pub fn newton_polygon_radii(&self) -> Vec<f64> {
        let pts: Vec<(usize, f64)> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| (j, c.ln_abs()))
            .collect();
        debug_assert!(!pts.is_empty());
        // Upper hull, left to right: slopes strictly decreasing.
        let mut hull: Vec<(usize, f64)> = Vec::new();
        for &p in &pts {
            while hull.len() >= 2 {
                let a = hull[hull.len() - 2];
                let b = hull[hull.len() - 1];
                let cross = (b.0 - a.0) as f64 * (p.1 - a.1) - (p.0 - a.0) as f64 * (b.1 - a.1);
                if cross >= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        let mut radii = Vec::with_capacity(self.degree());
        for seg in hull.windows(2) {
            let (j1, y1) = seg[0];
            let (j2, y2) = seg[1];
            let r = ((y1 - y2) / (j2 - j1) as f64).exp();
            for _ in j1..j2 {
                radii.push(r);
            }
        }
        // Leading gaps (exact zero low-order coefficients) are the caller's
        // business; polygon radii only cover hull-spanned roots.
        radii
    }
}

/// Truncated Taylor series over wide scalars: `c[j]` is the j-th series
/// coefficient (divided derivative). Fixed truncation order.
#[derive(Clone, Debug)]
pub(crate) struct WideSeries {
    pub c: Vec<WideComplex>,
}

impl WideSeries {
    pub fn constant(v: WideComplex, order: usize) -> WideSeries {
        let mut c = vec![WideComplex::ZERO; order + 1];
        c[0] = v;
        WideSeries { c }
    }

    /// Series of the identity map at `z`: z + t.
    pub fn variable(z: WideComplex, order: usize) -> WideSeries {
        let mut s = Self::constant(z, order);
        if order >= 1 {
            s.c[1] = WideComplex::ONE;
        }
        s
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn mul(&self, rhs: &WideSeries) -> WideSeries {
        let ord = self.order();
        debug_assert_eq!(ord, rhs.order());
        let mut out = vec![WideComplex::ZERO; ord + 1];
        for i in 0..=ord {
            if self.c[i].is_zero() {
                continue;
            }
            for j in 0..=(ord - i) {
                out[i + j] = out[i + j].add(self.c[i].mul(rhs.c[j]));
            }
        }
        WideSeries { c: out }
    }

    pub fn add(&self, rhs: &WideSeries) -> WideSeries {
        debug_assert_eq!(self.order(), rhs.order());
        WideSeries { c: self.c.iter().zip(&rhs.c).map(|(a, b)| a.add(*b)).collect() }
    }

    pub fn sub(&self, rhs: &WideSeries) -> WideSeries {
        debug_assert_eq!(self.order(), rhs.order());
        WideSeries { c: self.c.iter().zip(&rhs.c).map(|(a, b)| a.sub(*b)).collect() }
    }

    pub fn add_const(&self, v: WideComplex) -> WideSeries {
        let mut out = self.clone();
        out.c[0] = out.c[0].add(v);
        out
    }

    pub fn scale(&self, v: WideComplex) -> WideSeries {
        WideSeries { c: self.c.iter().map(|a| a.mul(v)).collect() }
    }

    /// Derivatives `f^(j)` from series coefficients: `c[j] * j!`.
    pub fn derivatives(&self) -> Vec<WideComplex> {
        let mut fact = 1.0;
        self.c
            .iter()
            .enumerate()
            .map(|(j, c)| {
                if j > 1 {
                    fact *= j as f64;
                }
                c.mul_f64(fact)
            })
            .collect()
    }
}
