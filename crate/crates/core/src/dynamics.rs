//! Polynomial dynamics: escape radii, Green's functions via escape-time
//! iteration, filled-Julia membership, Brolin backward-orbit sampling,
//! closed-form capacities, reference domains, and sampled Green fields.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::jsonfmt;
use crate::measure::DiscreteMeasure;
use crate::parallel::map_indexed;
use crate::poly::{Polynomial, PolySequenceSpec};
use crate::roots::solve_level;
use crate::wide::{WideComplex, WidePoly};

/// Iteration budget for membership tests and raster rendering.
pub const DEFAULT_RENDER_ITERS: u32 = 256;
/// Iteration budget when the Green value itself is the quantity of interest.
pub const DEFAULT_GREEN_ITERS: u32 = 1024;

/// Once an orbit satisfies log|w| >= log R0 + REFINE_MARGIN, truncating the
/// escape product costs at most e^{-REFINE_MARGIN} relative error.
const REFINE_MARGIN: f64 = 30.0;

/// Radius outside which every orbit of `p` at least doubles in modulus:
/// R0 = max(2, 2 (1 + sum_{j<n} |a_j|) / |a_n|).
pub fn escape_radius(p: &Polynomial) -> Result<f64> {
    if p.degree() < 2 {
        return Err(Error::InvalidInput(format!(
            "escape radius needs degree >= 2, got {}",
            p.degree()
        )));
    }
    let lower: f64 = p.coeffs()[..p.degree()].iter().map(|c| c.norm()).sum();
    Ok((2.0 * (1.0 + lower) / p.gamma().norm()).max(2.0))
}

/// One polynomial map in a form iterable on extended-exponent points.
enum MapEval<'a> {
    Dense(&'a WidePoly),
    Seq(&'a PolySequenceSpec),
}

/// Escape-time Green evaluator: the estimate at depth j is
/// d^{-j} (log|w_j| + log|gamma|/(d-1)), exact for pure monomials and with
/// O(e^{-REFINE_MARGIN} d^{-j}) error once past the refinement threshold.
struct EscapeMap<'a> {
    eval: MapEval<'a>,
    degree: f64,
    ln_r0: f64,
    ln_gamma_term: f64,
}

impl<'a> EscapeMap<'a> {
    fn dense(wide: &'a WidePoly) -> Result<EscapeMap<'a>> {
        let n = wide.degree();
        if n < 2 {
            return Err(Error::InvalidInput(format!(
                "escape iteration needs degree >= 2, got {n}"
            )));
        }
        let ln_gamma = wide.coeff(n).ln_abs();
        let ln_lower = ln_add_one(wide.ln_coeff_sum(true));
        let ln_r0 = (2f64.ln() + ln_lower - ln_gamma).max(2f64.ln());
        Ok(EscapeMap {
            eval: MapEval::Dense(wide),
            degree: n as f64,
            ln_r0,
            ln_gamma_term: ln_gamma / (n as f64 - 1.0),
        })
    }

    fn seq(spec: &'a PolySequenceSpec) -> Result<EscapeMap<'a>> {
        let n = spec.degree();
        if n < 2 {
            return Err(Error::InvalidInput(format!(
                "escape iteration needs degree >= 2, got {n}"
            )));
        }
        let (wide, _) = spec.wide_realized();
        let ln_gamma = spec.log_gamma_abs();
        let ln_lower = ln_add_one(wide.ln_coeff_sum(true));
        let ln_r0 = (2f64.ln() + ln_lower - ln_gamma).max(2f64.ln());
        Ok(EscapeMap {
            eval: MapEval::Seq(spec),
            degree: n as f64,
            ln_r0,
            ln_gamma_term: ln_gamma / (n as f64 - 1.0),
        })
    }

    fn step(&self, w: WideComplex) -> WideComplex {
        match &self.eval {
            MapEval::Dense(p) => p.horner(w),
            MapEval::Seq(s) => s.value_wide(w),
        }
    }

    /// Green's function of the filled Julia set at z; 0 when the orbit stays
    /// bounded through `max_iter` steps.
    fn green(&self, z: Complex64, max_iter: u32) -> Result<f64> {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::NonFinite { what: "green evaluation point" });
        }
        let mut w = WideComplex::from_c64(z);
        let mut j: u32 = 0;
        loop {
            let ln_w = w.ln_abs();
            if ln_w >= self.ln_r0 {
                if ln_w >= self.ln_r0 + REFINE_MARGIN || j >= max_iter {
                    return Ok(self.degree.powi(-(j as i32)) * (ln_w + self.ln_gamma_term));
                }
            } else if j >= max_iter {
                return Ok(0.0);
            }
            w = self.step(w);
            j += 1;
        }
    }
}

/// log(1 + e^x) without overflow, for the 1 + sum term of the escape radius.
fn ln_add_one(ln_sum: f64) -> f64 {
    if ln_sum == f64::NEG_INFINITY {
        0.0
    } else if ln_sum > 0.0 {
        ln_sum + (-ln_sum).exp().ln_1p()
    } else {
        ln_sum.exp().ln_1p()
    }
}

/// Green's function of K(p) at z by escape iteration; 0 when the orbit stays
/// bounded within the budget. Past the first escape the orbit is refined a
/// few more steps, so the returned value carries relative error at most
/// about e^{-30}.
pub fn escape_green(p: &Polynomial, z: Complex64, max_iter: u32) -> Result<f64> {
    let wide = p.to_wide();
    EscapeMap::dense(&wide)?.green(z, max_iter)
}

/// `escape_green` for a sequence member, evaluated through the structured
/// recurrences so coefficient overflow never enters.
pub fn escape_green_spec(spec: &PolySequenceSpec, z: Complex64, max_iter: u32) -> Result<f64> {
    EscapeMap::seq(spec)?.green(z, max_iter)
}

/// Membership in the filled Julia set, decided by non-escape within the
/// budget (so boundary-hugging exterior points may report inside).
pub fn filled_julia_member(p: &Polynomial, z: Complex64, max_iter: u32) -> Result<bool> {
    Ok(escape_green(p, z, max_iter)? == 0.0)
}

/// Green's function of the complement of the Mandelbrot set at c, via the
/// critical orbit z_0 = c, z_{j+1} = z_j^2 + c.
pub fn mandelbrot_green(c: Complex64, max_iter: u32) -> Result<f64> {
    if !c.re.is_finite() || !c.im.is_finite() {
        return Err(Error::NonFinite { what: "green evaluation point" });
    }
    let ln_r0 = c.norm().max(2.0).ln();
    let cw = WideComplex::from_c64(c);
    let mut w = cw;
    let mut j: u32 = 0;
    loop {
        let ln_w = w.ln_abs();
        if ln_w >= ln_r0 {
            if ln_w >= ln_r0 + REFINE_MARGIN || j >= max_iter {
                return Ok(2f64.powi(-(j as i32)) * ln_w);
            }
        } else if j >= max_iter {
            return Ok(0.0);
        }
        w = w.sqr().add(cw);
        j += 1;
    }
}

/// Cap K(p) = |gamma|^{-1/(n-1)} for degree n >= 2 with leading gamma.
pub fn cap_filled_julia(p: &Polynomial) -> Result<f64> {
    if p.degree() < 2 {
        return Err(Error::InvalidInput(format!(
            "filled Julia capacity needs degree >= 2, got {}",
            p.degree()
        )));
    }
    Ok((-p.gamma().norm().ln() / (p.degree() as f64 - 1.0)).exp())
}

/// Same, from the closed-form log|gamma| of a sequence member (exact even
/// when the dense coefficients overflow).
pub fn cap_filled_julia_spec(spec: &PolySequenceSpec) -> Result<f64> {
    if spec.degree() < 2 {
        return Err(Error::InvalidInput(format!(
            "filled Julia capacity needs degree >= 2, got {}",
            spec.degree()
        )));
    }
    Ok((-spec.log_gamma_abs() / (spec.degree() as f64 - 1.0)).exp())
}

/// Cap p^{-1}(L) = (Cap L / |gamma|)^{1/n} for compact L of positive
/// capacity.
pub fn cap_preimage(p: &Polynomial, cap_l: f64) -> Result<f64> {
    if !(cap_l > 0.0) || !cap_l.is_finite() {
        return Err(Error::InvalidInput(format!(
            "preimage capacity needs a finite positive Cap L, got {cap_l}"
        )));
    }
    if p.degree() < 1 {
        return Err(Error::InvalidInput("preimage capacity needs degree >= 1".into()));
    }
    Ok(((cap_l.ln() - p.gamma().norm().ln()) / p.degree() as f64).exp())
}

/// `cap_preimage` from the closed-form log|gamma| of a sequence member.
pub fn cap_preimage_spec(spec: &PolySequenceSpec, cap_l: f64) -> Result<f64> {
    if !(cap_l > 0.0) || !cap_l.is_finite() {
        return Err(Error::InvalidInput(format!(
            "preimage capacity needs a finite positive Cap L, got {cap_l}"
        )));
    }
    Ok(((cap_l.ln() - spec.log_gamma_abs()) / spec.degree() as f64).exp())
}

/// Brolin backward-orbit sampler for the equilibrium measure of K(p):
/// starting outside the escape radius, repeatedly jump to a uniformly chosen
/// preimage (counted with multiplicity), discard `burn_in` steps, then record
/// `n_samples` points with equal weight.
pub fn brolin_sample(
    p: &Polynomial,
    n_samples: usize,
    burn_in: usize,
    seed: u64,
) -> Result<DiscreteMeasure> {
    let d = p.degree();
    if d < 2 {
        return Err(Error::InvalidInput(format!(
            "backward-orbit sampling needs degree >= 2, got {d}"
        )));
    }
    if d > 256 {
        return Err(Error::InvalidInput(format!(
            "backward-orbit sampling at degree {d} > 256 is impractical; use a pullback measure"
        )));
    }
    if n_samples == 0 {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut z = Complex64::new(escape_radius(p)? + 1.0, 0.0);
    let mut samples = Vec::with_capacity(n_samples);
    for step in 0..burn_in + n_samples {
        let fiber = solve_level(p, z).map_err(|_| Error::BrolinStep { step })?;
        if !fiber.all_converged() {
            return Err(Error::BrolinStep { step });
        }
        let branches = fiber.expanded();
        z = branches[rng.gen_range(0..branches.len())];
        if step >= burn_in {
            samples.push(z);
        }
    }
    DiscreteMeasure::uniform(&samples)
}

/// Compact reference sets with known (or computable) potential theory.
#[derive(Clone, Debug)]
pub enum ReferenceDomain {
    /// Closed disk of radius r centered at the origin.
    Disk { r: f64 },
    /// Real segment [a, b].
    Interval { a: f64, b: f64 },
    /// Filled Julia set of a degree >= 2 polynomial.
    FilledJulia { base: Polynomial },
    /// The Mandelbrot set.
    Mandelbrot,
}

impl ReferenceDomain {
    pub fn disk(r: f64) -> Result<ReferenceDomain> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::InvalidInput(format!("disk radius must be positive and finite, got {r}")));
        }
        Ok(ReferenceDomain::Disk { r })
    }

    pub fn interval(a: f64, b: f64) -> Result<ReferenceDomain> {
        if !a.is_finite() || !b.is_finite() || !(a < b) {
            return Err(Error::InvalidInput(format!(
                "interval needs finite a < b, got [{a}, {b}]"
            )));
        }
        Ok(ReferenceDomain::Interval { a, b })
    }

    pub fn filled_julia(base: Polynomial) -> Result<ReferenceDomain> {
        if base.degree() < 2 {
            return Err(Error::InvalidInput(format!(
                "filled Julia domain needs degree >= 2, got {}",
                base.degree()
            )));
        }
        Ok(ReferenceDomain::FilledJulia { base })
    }

    /// Green's function of the complement with pole at infinity, 0 on the
    /// set. Closed form for disks and intervals; escape iteration (budget
    /// `DEFAULT_GREEN_ITERS`) for Julia and Mandelbrot domains.
    pub fn green(&self, z: Complex64) -> Result<f64> {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::NonFinite { what: "green evaluation point" });
        }
        match self {
            ReferenceDomain::Disk { r } => Ok((z.norm() / r).ln().max(0.0)),
            ReferenceDomain::Interval { a, b } => {
                let u = (2.0 * z - a - b) / (b - a);
                let w = joukowski_outer(u);
                Ok(w.norm().ln().max(0.0))
            }
            ReferenceDomain::FilledJulia { base } => escape_green(base, z, DEFAULT_GREEN_ITERS),
            ReferenceDomain::Mandelbrot => mandelbrot_green(z, DEFAULT_GREEN_ITERS),
        }
    }

    /// Complex derivative g' = 2 dg/dz where a closed form exists and z lies
    /// strictly outside the set; None otherwise.
    pub fn green_deriv(&self, z: Complex64) -> Option<Complex64> {
        match self {
            ReferenceDomain::Disk { r } => {
                if z.norm() > *r {
                    Some(z.inv())
                } else {
                    None
                }
            }
            ReferenceDomain::Interval { a, b } => {
                if z.im == 0.0 && z.re >= *a && z.re <= *b {
                    return None;
                }
                let u = (2.0 * z - a - b) / (b - a);
                let mut s = (u * u - Complex64::new(1.0, 0.0)).sqrt();
                // Pick the branch matching the exterior map (|u + s| >= 1).
                if (u + s).norm() < (u - s).norm() {
                    s = -s;
                }
                Some(2.0 / (b - a) / s)
            }
            _ => None,
        }
    }

    /// Logarithmic capacity, when known in closed form.
    pub fn capacity(&self) -> Option<f64> {
        match self {
            ReferenceDomain::Disk { r } => Some(*r),
            ReferenceDomain::Interval { a, b } => Some((b - a) / 4.0),
            ReferenceDomain::FilledJulia { base } => cap_filled_julia(base).ok(),
            ReferenceDomain::Mandelbrot => Some(1.0),
        }
    }

    /// Candidate points along the outer boundary, for Fekete selection.
    /// Disks get equispaced circle points, intervals Chebyshev-Lobatto nodes
    /// (endpoints included); the fractal domains have no parametrization.
    pub fn boundary_sample(&self, resolution: usize) -> Result<Vec<Complex64>> {
        if resolution < 2 {
            return Err(Error::InvalidInput("boundary sample needs resolution >= 2".into()));
        }
        match self {
            ReferenceDomain::Disk { r } => Ok((0..resolution)
                .map(|j| {
                    let t = std::f64::consts::TAU * j as f64 / resolution as f64;
                    Complex64::new(r * t.cos(), r * t.sin())
                })
                .collect()),
            ReferenceDomain::Interval { a, b } => {
                let mid = 0.5 * (a + b);
                let half = 0.5 * (b - a);
                Ok((0..resolution)
                    .map(|j| {
                        let t = std::f64::consts::PI * j as f64 / (resolution - 1) as f64;
                        Complex64::new(mid + half * t.cos(), 0.0)
                    })
                    .collect())
            }
            other => Err(Error::UnsupportedDomain(format!(
                "no boundary parametrization for {other:?}"
            ))),
        }
    }

    /// Radius of the smallest origin-centered disk containing the set. Exact
    /// for disks, intervals, and the Mandelbrot set; estimated from iterated
    /// preimages of the escape circle for filled Julia sets.
    pub fn outer_radius(&self) -> Result<f64> {
        match self {
            ReferenceDomain::Disk { r } => Ok(*r),
            ReferenceDomain::Interval { a, b } => Ok(a.abs().max(b.abs())),
            ReferenceDomain::Mandelbrot => Ok(2.0),
            ReferenceDomain::FilledJulia { base } => julia_outer_radius(base),
        }
    }
}

/// The exterior inverse Joukowski image: w with u = (w + 1/w)/2, |w| >= 1.
fn joukowski_outer(u: Complex64) -> Complex64 {
    let mut s = (u * u - Complex64::new(1.0, 0.0)).sqrt();
    if (u + s).norm() < (u - s).norm() {
        s = -s;
    }
    u + s
}

/// Pull the escape circle back through successive fiber levels (leaf budget
/// 512) and take the largest modulus at the deepest level: iterated
/// preimages approach the Julia set from outside, so the deepest level gives
/// the tightest enclosing estimate while earlier levels sit far outside K.
fn julia_outer_radius(base: &Polynomial) -> Result<f64> {
    let r0 = escape_radius(base)?;
    let mut targets: Vec<Complex64> = (0..8)
        .map(|j| {
            let t = std::f64::consts::TAU * j as f64 / 8.0;
            Complex64::new(r0 * t.cos(), r0 * t.sin())
        })
        .collect();
    for _ in 0..8 {
        let fibers = map_indexed(targets.len(), |i| solve_level(base, targets[i]));
        let mut next = Vec::with_capacity(targets.len() * base.degree() as usize);
        for fiber in fibers {
            next.extend(fiber?.expanded());
        }
        targets = next;
        if targets.len() * base.degree() as usize > 512 {
            break;
        }
    }
    Ok(targets.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Green's function sampled on a pixel grid: row 0 is the top of the
/// bounding box and values are row-major at pixel centers.
#[derive(Clone, Debug, PartialEq)]
pub struct GreenField {
    pub width: usize,
    pub height: usize,
    /// [x0, y0, x1, y1] with x0 < x1, y0 < y1.
    pub bbox: [f64; 4],
    pub values: Vec<f64>,
    pub inside: Vec<bool>,
}

impl GreenField {
    pub fn to_json(&self) -> String {
        let mut out = String::with_capacity(32 * self.values.len() + 128);
        out.push_str(&format!(
            "{{\"width\": {}, \"height\": {}, \"bbox\": [{}, {}, {}, {}], \"values\": [",
            self.width,
            self.height,
            jsonfmt::number(self.bbox[0]),
            jsonfmt::number(self.bbox[1]),
            jsonfmt::number(self.bbox[2]),
            jsonfmt::number(self.bbox[3]),
        ));
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            out.push_str(&jsonfmt::number(*v));
        }
        out.push_str("], \"inside\": [");
        for (i, b) in self.inside.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            out.push_str(if *b { "true" } else { "false" });
        }
        out.push_str("]}");
        out
    }
}

fn check_grid(bbox: [f64; 4], width: usize, height: usize) -> Result<()> {
    let [x0, y0, x1, y1] = bbox;
    if !bbox.iter().all(|v| v.is_finite()) || !(x0 < x1) || !(y0 < y1) {
        return Err(Error::InvalidInput(format!(
            "bounding box needs finite x0 < x1 and y0 < y1, got [{x0}, {y0}, {x1}, {y1}]"
        )));
    }
    if width == 0 || height == 0 {
        return Err(Error::InvalidInput("grid needs positive width and height".into()));
    }
    if width.saturating_mul(height) > 64_000_000 {
        return Err(Error::InvalidInput(format!(
            "grid {width} x {height} exceeds the 64 megapixel budget"
        )));
    }
    Ok(())
}

fn field_from_map(
    map: &EscapeMap<'_>,
    bbox: [f64; 4],
    width: usize,
    height: usize,
    max_iter: u32,
) -> Result<GreenField> {
    check_grid(bbox, width, height)?;
    let [x0, y0, x1, y1] = bbox;
    let dx = (x1 - x0) / width as f64;
    let dy = (y1 - y0) / height as f64;
    let rows = map_indexed(height, |row| {
        let y = y1 - (row as f64 + 0.5) * dy;
        let mut vals = Vec::with_capacity(width);
        for col in 0..width {
            let x = x0 + (col as f64 + 0.5) * dx;
            vals.push(map.green(Complex64::new(x, y), max_iter));
        }
        vals
    });
    let mut values = Vec::with_capacity(width * height);
    for row in rows {
        for v in row {
            values.push(v?);
        }
    }
    let inside = values.iter().map(|&g| g == 0.0).collect();
    Ok(GreenField { width, height, bbox, values, inside })
}

/// Sample the Green's function of K(p) over a pixel grid.
pub fn green_field(
    p: &Polynomial,
    bbox: [f64; 4],
    width: usize,
    height: usize,
    max_iter: u32,
) -> Result<GreenField> {
    let wide = p.to_wide();
    field_from_map(&EscapeMap::dense(&wide)?, bbox, width, height, max_iter)
}

/// `green_field` for a sequence member through the structured recurrences.
pub fn green_field_spec(
    spec: &PolySequenceSpec,
    bbox: [f64; 4],
    width: usize,
    height: usize,
    max_iter: u32,
) -> Result<GreenField> {
    field_from_map(&EscapeMap::seq(spec)?, bbox, width, height, max_iter)
}
