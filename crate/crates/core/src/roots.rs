//! Simultaneous polynomial root finding, level-set fibers q(z) = w, root
//! distributions, and zero-cluster diagnostics.
//!
//! The solver is the Aberth–Ehrlich scheme: simultaneous Newton steps with
//! pairwise repulsion corrections, updated Jacobi-style (every point sees the
//! previous sweep's configuration), which makes sweeps data-parallel over
//! roots and bit-deterministic for any thread count. Initial guesses come
//! from the Newton polygon of the coefficients — the upper convex hull of
//! (j, log|a_j|) yields per-segment radius estimates — so even polynomials
//! whose root moduli span many orders (or whose Cauchy bound is astronomical,
//! as for high-index sequence members) start within a few ulps-of-log of the
//! right annulus and converge within the sweep budget.
//!
//! High-index family members are never solved through their dense f64
//! coefficients: evaluation runs through the defining recurrences (jets) in
//! extended-exponent arithmetic, while the dense coefficients (kept wide)
//! only feed the Newton polygon and residual normalization, where only
//! magnitudes matter.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::parallel::map_indexed;
use crate::poly::{Polynomial, PolySequenceSpec};
use crate::wide::{WideComplex, WidePoly};

/// Tuning knobs for the simultaneous solver. The defaults are the documented
/// contract: per-root stop at 1e-13 relative, 400 sweeps, residual audit at
/// 1e-8 of coefficient scale, clustering at the stall noise floor.
#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    /// Sweep budget floor; the solver raises it to degree/2 + 100 when that
    /// is larger, because a far-field iterate contracts toward the root
    /// region by only ~1/degree per sweep.
    pub max_sweeps: u32,
    /// Per-root stop: |correction| <= newton_tol * (1 + |z|).
    pub newton_tol: f64,
    /// Converged-flag audit threshold on the scale-relative residual.
    pub residual_tol: f64,
    /// Clustering radius for multiplicity resolution; `None` selects
    /// max(1e-8, 4 sqrt(eps_machine)) * (1 + max |root|), the stall radius of
    /// the iteration near a double root.
    pub cluster_eps: Option<f64>,
}

impl Default for SolveOptions {
    fn default() -> SolveOptions {
        SolveOptions {
            max_sweeps: 400,
            newton_tol: 1e-13,
            residual_tol: 1e-8,
            cluster_eps: None,
        }
    }
}

/// One resolved root: cluster center, multiplicity, scale-relative residual,
/// and the convergence audit flag.
#[derive(Clone, Copy, Debug)]
pub struct RootEntry {
    pub location: Complex64,
    pub multiplicity: u32,
    /// Worst member backward error: max over the cluster's iterates of
    /// |q(z)| relative to the coefficient scale sum_j |a_j| |z|^j there.
    pub residual: f64,
    /// True when every member iterate passes the residual audit and its
    /// Newton displacement |q/q'| sits below the multiplicity-m stall
    /// radius (1 + |z|) max(1e-6, 4 eps_machine^(1/m)).
    pub converged: bool,
}

/// All roots of one polynomial (or fiber), counted with multiplicity.
#[derive(Clone, Debug)]
pub struct RootSet {
    entries: Vec<RootEntry>,
    degree: u64,
}

impl RootSet {
    pub fn entries(&self) -> &[RootEntry] {
        &self.entries
    }

    pub fn degree(&self) -> u64 {
        self.degree
    }

    pub fn total_multiplicity(&self) -> u64 {
        self.entries.iter().map(|e| e.multiplicity as u64).sum()
    }

    pub fn all_converged(&self) -> bool {
        self.entries.iter().all(|e| e.converged)
    }

    pub fn max_modulus(&self) -> f64 {
        self.entries.iter().map(|e| e.location.norm()).fold(0.0, f64::max)
    }

    /// Locations repeated per multiplicity; length = degree.
    pub fn expanded(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.degree as usize);
        for e in &self.entries {
            out.extend(std::iter::repeat(e.location).take(e.multiplicity as usize));
        }
        out
    }

    /// Cluster these roots at an explicit radius.
    pub fn cluster(&self, epsilon: f64) -> Result<ZeroClusterReport> {
        cluster_roots(&self.expanded(), epsilon)
    }
}

/// A zero cluster: accumulation center and the number of roots it absorbed.
#[derive(Clone, Copy, Debug)]
pub struct ClusterEntry {
    pub center: Complex64,
    pub multiplicity: u32,
}

/// Greedy clustering of a root configuration at radius epsilon; cluster
/// centers end up pairwise separated by more than 2 epsilon.
#[derive(Clone, Debug)]
pub struct ZeroClusterReport {
    pub epsilon: f64,
    pub clusters: Vec<ClusterEntry>,
}

impl ZeroClusterReport {
    pub fn total_multiplicity(&self) -> u64 {
        self.clusters.iter().map(|c| c.multiplicity as u64).sum()
    }

    pub fn to_json(&self) -> String {
        let mut out = format!("{{\"epsilon\": {}, \"clusters\": [", crate::jsonfmt::number(self.epsilon));
        for (i, cl) in self.clusters.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            out.push_str(&format!(
                "{{\"re\": {}, \"im\": {}, \"multiplicity\": {}}}",
                crate::jsonfmt::number(cl.center.re),
                crate::jsonfmt::number(cl.center.im),
                cl.multiplicity
            ));
        }
        out.push_str("]}");
        out
    }
}

/// All roots of `p`, with multiplicities resolved by clustering.
pub fn find_roots(p: &Polynomial) -> Result<RootSet> {
    find_roots_with(p, &SolveOptions::default())
}

pub fn find_roots_with(p: &Polynomial, opts: &SolveOptions) -> Result<RootSet> {
    if p.degree() == 0 {
        return Err(Error::InvalidInput(
            "root finding needs degree >= 1".into(),
        ));
    }
    let wide = p.to_wide();
    let eval = |z: Complex64| wide.horner_pair(z);
    solve_core(&eval, &wide, opts)
}

/// Fiber q(z) = w: the roots of q - w.
pub fn solve_level(p: &Polynomial, w: Complex64) -> Result<RootSet> {
    solve_level_with(p, w, &SolveOptions::default())
}

pub fn solve_level_with(p: &Polynomial, w: Complex64, opts: &SolveOptions) -> Result<RootSet> {
    if !w.re.is_finite() || !w.im.is_finite() {
        return Err(Error::NonFinite { what: "level value" });
    }
    if p.degree() == 0 {
        return Err(Error::InvalidInput("level solving needs degree >= 1".into()));
    }
    let wide = p.to_wide().shift_constant(w);
    let eval = |z: Complex64| wide.horner_pair(z);
    solve_core(&eval, &wide, opts)
}

/// Fiber q_k^{(m)}(z) = w for a sequence member, evaluated through the
/// family recurrence rather than dense coefficients.
pub fn solve_level_spec(spec: &PolySequenceSpec, w: Complex64) -> Result<RootSet> {
    solve_level_spec_with(spec, w, &SolveOptions::default())
}

pub fn solve_level_spec_with(
    spec: &PolySequenceSpec,
    w: Complex64,
    opts: &SolveOptions,
) -> Result<RootSet> {
    let (wide, _) = spec.wide_realized();
    solve_level_spec_cached(spec, w, &wide, opts)
}

/// As `solve_level_spec_with`, reusing a precomputed `wide_realized()` so
/// many fibers of the same member don't regenerate coefficients.
pub(crate) fn solve_level_spec_cached(
    spec: &PolySequenceSpec,
    w: Complex64,
    wide_realized: &WidePoly,
    opts: &SolveOptions,
) -> Result<RootSet> {
    if !w.re.is_finite() || !w.im.is_finite() {
        return Err(Error::NonFinite { what: "level value" });
    }
    let shifted = wide_realized.shift_constant(w);
    let ww = WideComplex::from_c64(w);
    let eval = |z: Complex64| {
        let (v, d) = spec.value_and_deriv(z);
        (v.sub(ww), d)
    };
    solve_core(&eval, &shifted, opts)
}

/// Root distribution: every root becomes an atom of weight multiplicity/n.
pub fn root_measure(rs: &RootSet) -> Result<DiscreteMeasure> {
    if rs.degree == 0 {
        return Err(Error::InvalidInput("root measure needs degree >= 1".into()));
    }
    if rs.total_multiplicity() != rs.degree {
        return Err(Error::InvalidInput(format!(
            "incomplete root set: {} of {} roots",
            rs.total_multiplicity(),
            rs.degree
        )));
    }
    let n = rs.degree as f64;
    DiscreteMeasure::new(
        rs.entries
            .iter()
            .map(|e| (e.location, e.multiplicity as f64 / n))
            .collect(),
    )
}

/// Greedy union of points within `epsilon`, deterministic: points are taken
/// in (modulus, argument) order, each joining the nearest existing cluster
/// within range; centers closer than 2 epsilon are then merged until the
/// separation invariant holds.
pub fn cluster_roots(points: &[Complex64], epsilon: f64) -> Result<ZeroClusterReport> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidInput(format!(
            "cluster radius must be positive and finite, got {epsilon}"
        )));
    }
    if points.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite { what: "cluster point" });
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| canonical_cmp(points[i], points[j]));

    // Greedy assignment against cluster seeds (first member), so membership
    // does not depend on running means.
    let mut seeds: Vec<Complex64> = Vec::new();
    let mut members: Vec<Vec<Complex64>> = Vec::new();
    for &idx in &order {
        let z = points[idx];
        let mut best: Option<(f64, usize)> = None;
        for (ci, &seed) in seeds.iter().enumerate() {
            let d = (z - seed).norm();
            if d <= epsilon && best.map_or(true, |(bd, _)| d < bd) {
                best = Some((d, ci));
            }
        }
        match best {
            Some((_, ci)) => members[ci].push(z),
            None => {
                seeds.push(z);
                members.push(vec![z]);
            }
        }
    }
    let mut clusters: Vec<(Complex64, u32)> = members
        .iter()
        .map(|ms| (mean(ms), ms.len() as u32))
        .collect();

    // Merge any centers within 2 epsilon (weighted means), lowest pair first.
    loop {
        let mut pair = None;
        'outer: for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                if (clusters[i].0 - clusters[j].0).norm() <= 2.0 * epsilon {
                    pair = Some((i, j));
                    break 'outer;
                }
            }
        }
        let Some((i, j)) = pair else { break };
        let (ci, ni) = clusters[i];
        let (cj, nj) = clusters[j];
        let n = ni + nj;
        clusters[i] = ((ci * ni as f64 + cj * nj as f64) / n as f64, n);
        clusters.remove(j);
    }

    clusters.sort_by(|a, b| canonical_cmp(a.0, b.0));
    Ok(ZeroClusterReport {
        epsilon,
        clusters: clusters
            .into_iter()
            .map(|(center, multiplicity)| ClusterEntry { center, multiplicity })
            .collect(),
    })
}

/// Clustering radius at the double-root stall noise floor of the solver:
/// iterates on a multiple root stop making progress around the square root
/// of machine precision, scaled to the configuration.
pub fn default_cluster_eps(max_modulus: f64) -> f64 {
    f64::max(1e-8, 4.0 * f64::EPSILON.sqrt()) * (1.0 + max_modulus)
}

/// Total order on finite complex numbers: modulus, then argument, then
/// lexicographic as a final tie-break.
pub(crate) fn canonical_cmp(a: Complex64, b: Complex64) -> std::cmp::Ordering {
    (a.norm(), a.arg(), a.re, a.im)
        .partial_cmp(&(b.norm(), b.arg(), b.re, b.im))
        .expect("finite values compare")
}

fn mean(zs: &[Complex64]) -> Complex64 {
    zs.iter().sum::<Complex64>() / zs.len() as f64
}

/// Shared solver: the evaluation oracle yields (value, derivative) in wide
/// arithmetic; `shifted` is the (wide) coefficient vector of the polynomial
/// being zeroed, used only for initialization and residual scale.
fn solve_core<F>(eval: &F, shifted: &WidePoly, opts: &SolveOptions) -> Result<RootSet>
where
    F: Fn(Complex64) -> (WideComplex, WideComplex) + Sync,
{
    let n = shifted.degree();
    debug_assert!(n >= 1);
    // Exact zero low-order coefficients give an exact root at the origin.
    let zero_mult = shifted.coeffs().iter().take_while(|c| c.is_zero()).count();
    let radii = shifted.newton_polygon_radii();
    debug_assert_eq!(zero_mult + radii.len(), n);

    let mut z = Vec::with_capacity(n);
    let mut frozen = vec![false; n];
    for f in frozen.iter_mut().take(zero_mult) {
        *f = true;
    }
    z.resize(zero_mult, Complex64::new(0.0, 0.0));
    z.extend(init_circle_points(&radii));

    // Far-field Newton steps contract |z| by only ~1/n per sweep, so an
    // iterate pushed outside the root region needs a budget proportional to
    // the degree to walk back in; the configured value acts as a floor.
    let budget = opts.max_sweeps.max(n as u32 / 2 + 100);
    let mut sweeps = 0;
    while sweeps < budget && !frozen.iter().all(|&f| f) {
        sweeps += 1;
        let snapshot = z.clone();
        let updates = map_indexed(n, |i| {
            if frozen[i] {
                return (snapshot[i], true);
            }
            let zi = snapshot[i];
            let (v, d) = eval(zi);
            if v.is_zero() {
                return (zi, true);
            }
            let newton = v.ratio_c64(d);
            if !newton.re.is_finite() || !newton.im.is_finite() {
                // Derivative vanished at the current point; fall back to a
                // deterministic nudge off the critical point.
                return (zi + Complex64::new(1e-6, 2e-6) * (1.0 + zi.norm()), false);
            }
            let mut repulsion = Complex64::new(0.0, 0.0);
            for (j, &zj) in snapshot.iter().enumerate() {
                if j != i {
                    let diff = zi - zj;
                    if diff.norm_sqr() > 0.0 {
                        repulsion += diff.inv();
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - newton * repulsion;
            let correction = if denom.norm_sqr() > 1e-290 { newton / denom } else { newton };
            // A late arrival at an already-claimed root is ejected with a
            // correction ~ |z_i - r|^2 / |z_j - r|, which can be arbitrarily
            // large; cap the step so the ejection stays a local push instead
            // of a fling the sweep budget cannot walk back from.
            let cap = 0.5 * (1.0 + zi.norm());
            let correction = if correction.norm() > cap {
                correction * (cap / correction.norm())
            } else {
                correction
            };
            let scale = opts.newton_tol * (1.0 + zi.norm());
            // Freeze only when the raw Newton step is small as well: a tiny
            // Aberth correction alone can also mean the repulsion denominator
            // blew up between two near-colliding iterates away from any root.
            let stop = correction.norm() <= scale && newton.norm() <= scale;
            let znew = zi - correction;
            if znew.re.is_finite() && znew.im.is_finite() {
                (znew, stop)
            } else {
                (zi, false)
            }
        });
        for (i, (znew, stop)) in updates.into_iter().enumerate() {
            z[i] = znew;
            frozen[i] = frozen[i] || stop;
        }
    }

    let eps = opts.cluster_eps.unwrap_or_else(|| {
        let max_mod = z.iter().map(|p| p.norm()).fold(0.0, f64::max);
        default_cluster_eps(max_mod)
    });
    let report = cluster_roots(&z, eps)?;

    // Audit every cluster through its member iterates: the certificate is
    // that each member is a backward-stable root at its own position, while
    // the reported location is the better-conditioned cluster mean.
    let coeff_lns: Vec<f64> = shifted.coeffs().iter().map(|c| c.ln_abs()).collect();
    let owner: Vec<usize> =
        z.iter().map(|&zi| nearest_cluster(&report.clusters, zi)).collect();
    let entries = report
        .clusters
        .iter()
        .enumerate()
        .map(|(ci, &cl)| {
            let members: Vec<Complex64> = z
                .iter()
                .zip(&owner)
                .filter(|&(_, &o)| o == ci)
                .map(|(&zm, _)| zm)
                .collect();
            audit_entry(cl, &members, eval, &coeff_lns, opts)
        })
        .collect();
    Ok(RootSet { entries, degree: n as u64 })
}

fn nearest_cluster(clusters: &[ClusterEntry], z: Complex64) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, cl) in clusters.iter().enumerate() {
        let d = (z - cl.center).norm();
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Residual and displacement audit over a cluster's member iterates. Each
/// member must be a backward-stable root at its own position: Oettli-Prager
/// residual within `residual_tol` of the coefficient scale there, and Newton
/// displacement |q/q'| below the stall radius of a multiplicity-m root,
/// (1 + |z|) max(1e-6, 4 eps_machine^(1/m)). Auditing members instead of the
/// mean keeps the test meaningful when a merged cluster straddles the origin,
/// where the coefficient scale s(|z|) degenerates to |a_0| alone.
fn audit_entry<F>(
    cl: ClusterEntry,
    members: &[Complex64],
    eval: &F,
    coeff_lns: &[f64],
    opts: &SolveOptions,
) -> RootEntry
where
    F: Fn(Complex64) -> (WideComplex, WideComplex) + Sync,
{
    let stall = 4.0 * f64::EPSILON.powf(1.0 / cl.multiplicity as f64);
    let disp_tol = f64::max(1e-6, stall);
    let mut residual = 0.0f64;
    let mut converged = true;
    for &zm in members {
        let (v, d) = eval(zm);
        if v.is_zero() {
            continue;
        }
        let ln_denom = ln_coeff_scale(coeff_lns, zm.norm().ln());
        let member_residual = (v.ln_abs() - ln_denom).exp();
        let displacement = v.ratio_c64(d).norm();
        residual = residual.max(member_residual);
        if !(member_residual <= opts.residual_tol
            && displacement <= disp_tol * (1.0 + zm.norm()))
        {
            converged = false;
        }
    }
    RootEntry {
        location: cl.center,
        multiplicity: cl.multiplicity,
        residual,
        converged,
    }
}

/// log of s(x) = sum_j |a_j| x^j given the coefficient logs and log x.
fn ln_coeff_scale(coeff_lns: &[f64], ln_x: f64) -> f64 {
    let ln_terms: Vec<f64> = coeff_lns
        .iter()
        .enumerate()
        .map(|(j, &la)| {
            if la == f64::NEG_INFINITY {
                f64::NEG_INFINITY
            } else if j == 0 {
                la
            } else {
                la + j as f64 * ln_x
            }
        })
        .collect();
    let m = ln_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + ln_terms.iter().map(|&t| (t - m).exp()).sum::<f64>().ln()
}

/// Aberth initial configuration from polygon radii: each run of equal radii
/// becomes equispaced points on that circle, rotated by a fixed per-run
/// offset so the start breaks axis symmetries yet stays deterministic.
fn init_circle_points(radii: &[f64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(radii.len());
    let mut start = 0;
    let mut run_index = 0;
    while start < radii.len() {
        let r = radii[start].clamp(1e-150, 1e150);
        let mut end = start + 1;
        while end < radii.len() && radii[end] == radii[start] {
            end += 1;
        }
        let count = end - start;
        let offset = 0.401 + 0.17 * run_index as f64;
        for t in 0..count {
            let theta =
                std::f64::consts::TAU * (t as f64 + 0.5) / count as f64 + offset;
            out.push(Complex64::new(r * theta.cos(), r * theta.sin()));
        }
        start = end;
        run_index += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Family;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn poly(coeffs: &[f64]) -> Polynomial {
        Polynomial::new(coeffs.iter().map(|&x| c(x, 0.0)).collect()).unwrap()
    }

    fn assert_root_near(rs: &RootSet, want: Complex64, mult: u32, tol: f64) {
        let hit = rs
            .entries()
            .iter()
            .find(|e| (e.location - want).norm() <= tol)
            .unwrap_or_else(|| panic!("no root near {want}, got {:?}", rs.entries()));
        assert_eq!(hit.multiplicity, mult, "multiplicity at {want}");
        assert!(hit.converged, "unconverged at {want}: residual {}", hit.residual);
    }

    #[test]
    fn simple_quadratics_and_cubics() {
        let rs = find_roots(&poly(&[1.0, 0.0, 1.0])).unwrap();
        assert_root_near(&rs, c(0.0, 1.0), 1, 1e-12);
        assert_root_near(&rs, c(0.0, -1.0), 1, 1e-12);

        let rs = find_roots(&poly(&[-6.0, 11.0, -6.0, 1.0])).unwrap();
        for r in [1.0, 2.0, 3.0] {
            assert_root_near(&rs, c(r, 0.0), 1, 1e-10);
        }
    }

    #[test]
    fn double_root_is_clustered() {
        let rs = find_roots(&poly(&[1.0, -2.0, 1.0])).unwrap();
        assert_eq!(rs.entries().len(), 1);
        assert_root_near(&rs, c(1.0, 0.0), 2, 1e-7);
        assert_eq!(rs.total_multiplicity(), 2);
    }

    #[test]
    fn monomial_factor_detected_exactly() {
        // z^3 (z - 2) = -2 z^3 + z^4.
        let rs = find_roots(&poly(&[0.0, 0.0, 0.0, -2.0, 1.0])).unwrap();
        assert_root_near(&rs, c(0.0, 0.0), 3, 0.0);
        assert_root_near(&rs, c(2.0, 0.0), 1, 1e-12);
    }

    #[test]
    fn solve_level_examples() {
        let square = poly(&[0.0, 0.0, 1.0]);
        let rs = solve_level(&square, c(4.0, 0.0)).unwrap();
        assert_root_near(&rs, c(2.0, 0.0), 1, 1e-12);
        assert_root_near(&rs, c(-2.0, 0.0), 1, 1e-12);

        let rs0 = solve_level(&square, c(0.0, 0.0)).unwrap();
        assert_eq!(rs0.entries().len(), 1);
        assert_root_near(&rs0, c(0.0, 0.0), 2, 0.0);

        let line = poly(&[1.0, 2.0]);
        let rs = solve_level(&line, c(0.0, 1.0)).unwrap();
        assert_eq!(rs.entries().len(), 1);
        assert_root_near(&rs, c(-0.5, 0.5), 1, 1e-14);
    }

    #[test]
    fn wild_radius_spread_converges() {
        // (z - 1e-3)(z - 1)(z - 1e3): moduli span six orders; the polygon
        // initialization puts one start point on each scale.
        let roots = [c(1e-3, 0.0), c(1.0, 0.0), c(1e3, 0.0)];
        let p = Polynomial::from_roots(&roots, c(1.0, 0.0)).unwrap();
        let rs = find_roots(&p).unwrap();
        for r in roots {
            assert_root_near(&rs, r, 1, 1e-6 * (1.0 + r.norm()));
        }
    }

    #[test]
    fn high_degree_circle_fiber() {
        // z^64 = 4: polygon radius 4^{1/64} for every root, well inside the
        // sweep budget (the Cauchy-bound circle would not be).
        let mut coeffs = vec![0.0; 65];
        coeffs[64] = 1.0;
        let p = poly(&coeffs);
        let rs = solve_level(&p, c(4.0, 0.0)).unwrap();
        assert_eq!(rs.total_multiplicity(), 64);
        assert!(rs.all_converged());
        let want = 4f64.powf(1.0 / 64.0);
        for e in rs.entries() {
            assert!((e.location.norm() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn spec_fiber_matches_dense_fiber() {
        // Mandelbrot q_5 (degree 16): oracle path against the dense path.
        let spec = PolySequenceSpec::new(Family::MandelbrotCenter, 5, 0).unwrap();
        let w = c(0.3, -0.4);
        let via_spec = solve_level_spec(&spec, w).unwrap();
        let via_dense = solve_level(&spec.generate().unwrap(), w).unwrap();
        assert_eq!(via_spec.total_multiplicity(), 16);
        assert!(via_spec.all_converged());
        for (a, b) in via_spec.entries().iter().zip(via_dense.entries()) {
            assert!((a.location - b.location).norm() <= 1e-9);
        }
    }

    #[test]
    fn near_double_fiber_merges_at_noise_floor() {
        // from_polar(1, pi) carries rounding in its imaginary part, so the
        // fiber of z^2 - 1 over it is a pair of simple roots ~1e-8 apart.
        // The clusterer reports them as one backward-stable double root at
        // the origin; the audit must accept that center even though the
        // plain relative residual degenerates when |z| and |a_0| are both
        // at noise scale.
        let p = poly(&[-1.0, 0.0, 1.0]);
        let w = Complex64::from_polar(1.0, std::f64::consts::PI);
        let rs = solve_level(&p, w).unwrap();
        assert_eq!(rs.total_multiplicity(), 2);
        assert_eq!(rs.entries().len(), 1);
        assert!(rs.entries()[0].location.norm() <= 1e-7);
        assert!(rs.all_converged(), "entries: {:?}", rs.entries());
    }

    #[test]
    fn deep_chebyshev_fiber_converges() {
        // Degree-512 fiber that once stranded an iterate: a late arrival at
        // a claimed root is ejected with a correction ~ d_i^2 / d_j, and an
        // unclamped ejection can need more sweeps to walk back than the
        // budget allows.
        let spec =
            PolySequenceSpec::new(Family::ChebyshevInterval { a: -1.0, b: 1.0 }, 512, 0).unwrap();
        let w = Complex64::from_polar(0.5, std::f64::consts::TAU * 5.0 / 64.0);
        let rs = solve_level_spec(&spec, w).unwrap();
        assert_eq!(rs.total_multiplicity(), 512);
        assert!(rs.all_converged());
    }

    #[test]
    fn deep_center_tower_fiber_converges() {
        let spec = PolySequenceSpec::new(Family::MandelbrotCenter, 10, 0).unwrap();
        let w = Complex64::from_polar(1.0, std::f64::consts::TAU * 38.0 / 64.0);
        let rs = solve_level_spec(&spec, w).unwrap();
        assert_eq!(rs.total_multiplicity(), 512);
        assert!(rs.all_converged());
    }

    #[test]
    fn mandelbrot_zero_fiber_contains_origin_exactly() {
        // q_k(0) = 0 for every k: the origin root is split off exactly.
        let spec = PolySequenceSpec::new(Family::MandelbrotCenter, 6, 0).unwrap();
        let rs = solve_level_spec(&spec, c(0.0, 0.0)).unwrap();
        let zero = rs.entries().iter().find(|e| e.location == c(0.0, 0.0)).unwrap();
        assert_eq!(zero.residual, 0.0);
        assert!(rs.all_converged());
        assert_eq!(rs.total_multiplicity(), 32);
    }

    #[test]
    fn cluster_roots_examples() {
        let rep = cluster_roots(&[c(1.0000001, 0.0), c(0.9999999, 0.0)], 1e-3).unwrap();
        assert_eq!(rep.clusters.len(), 1);
        assert_eq!(rep.clusters[0].multiplicity, 2);

        let rep = cluster_roots(&[c(0.0, 0.0), c(5.0, 0.0)], 1.0).unwrap();
        assert_eq!(rep.clusters.len(), 2);
        assert!(rep.clusters.iter().all(|cl| cl.multiplicity == 1));

        // (z-1)^2 (z+1) at epsilon 1e-6.
        let p = Polynomial::from_roots(&[c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)], c(1.0, 0.0))
            .unwrap();
        let rs = find_roots(&p).unwrap();
        let rep = rs.cluster(1e-6).unwrap();
        assert_eq!(rep.clusters.len(), 2);
        let simple = rep.clusters.iter().find(|cl| cl.center.re < 0.0).unwrap();
        let double = rep.clusters.iter().find(|cl| cl.center.re > 0.0).unwrap();
        assert!((simple.center.re + 1.0).abs() < 1e-8 && simple.multiplicity == 1);
        assert!((double.center.re - 1.0).abs() < 1e-7 && double.multiplicity == 2);
    }

    #[test]
    fn cluster_separation_invariant() {
        // A chain of points 0.9 eps apart collapses into clusters that end up
        // separated by more than 2 eps.
        let eps = 0.1;
        let pts: Vec<Complex64> = (0..7).map(|j| c(0.09 * j as f64, 0.0)).collect();
        let rep = cluster_roots(&pts, eps).unwrap();
        assert_eq!(rep.total_multiplicity(), 7);
        for i in 0..rep.clusters.len() {
            for j in i + 1..rep.clusters.len() {
                assert!(
                    (rep.clusters[i].center - rep.clusters[j].center).norm() > 2.0 * eps
                );
            }
        }
    }

    #[test]
    fn cluster_rejects_bad_epsilon() {
        assert!(cluster_roots(&[c(0.0, 0.0)], 0.0).is_err());
        assert!(cluster_roots(&[c(0.0, 0.0)], f64::NAN).is_err());
    }

    #[test]
    fn root_measure_weights() {
        let p = poly(&[-1.0, 0.0, 0.0, 0.0, 1.0]); // z^4 - 1
        let mu = root_measure(&find_roots(&p).unwrap()).unwrap();
        assert_eq!(mu.atoms().len(), 4);
        for (_, w) in mu.atoms() {
            assert_eq!(*w, 0.25);
        }
        // Double root -> single atom of weight 1.
        let dbl = poly(&[1.0, -2.0, 1.0]);
        let mu = root_measure(&find_roots(&dbl).unwrap()).unwrap();
        assert_eq!(mu.atoms().len(), 1);
        assert_eq!(mu.atoms()[0].1, 1.0);
        // q_2(c) = c^2 + c: atoms at 0 and -1.
        let q2 = PolySequenceSpec::new(Family::MandelbrotCenter, 2, 0)
            .unwrap()
            .generate()
            .unwrap();
        let mu = root_measure(&find_roots(&q2).unwrap()).unwrap();
        let mut res: Vec<Complex64> = mu.atoms().iter().map(|(z, _)| *z).collect();
        res.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert!((res[0] - c(-1.0, 0.0)).norm() < 1e-12);
        assert!(res[1].norm() < 1e-12);
    }

    #[test]
    fn mandelbrot_roots_stay_in_disk_two() {
        // Zeroes of q_k lie in the closed 2-disk (checked here to k = 9; the
        // integration suite pushes to higher k).
        for k in 2..=9 {
            let spec = PolySequenceSpec::new(Family::MandelbrotCenter, k, 0).unwrap();
            let rs = solve_level_spec(&spec, c(0.0, 0.0)).unwrap();
            assert!(rs.all_converged(), "k = {k}");
            assert!(rs.max_modulus() <= 2.0 + 1e-9, "k = {k}: {}", rs.max_modulus());
        }
    }

    fn well_separated_roots() -> impl Strategy<Value = Vec<Complex64>> {
        proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 2..=12).prop_filter_map(
            "separation",
            |raw| {
                let pts: Vec<Complex64> = raw.iter().map(|&(a, b)| c(a, b)).collect();
                let min_sep = pts
                    .iter()
                    .enumerate()
                    .flat_map(|(i, a)| pts[i + 1..].iter().map(move |b| (a - b).norm()))
                    .fold(f64::INFINITY, f64::min);
                (min_sep > 0.15).then_some(pts)
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn reconstruction_round_trip(roots in well_separated_roots()) {
            // poly_from_roots(find_roots(p), gamma) returns p coefficientwise
            // to relative 1e-6.
            let gamma = c(0.7, -0.3);
            let p = Polynomial::from_roots(&roots, gamma).unwrap();
            let rs = find_roots(&p).unwrap();
            prop_assert!(rs.all_converged());
            let back = Polynomial::from_roots(&rs.expanded(), gamma).unwrap();
            let scale = p.coeffs().iter().map(|a| a.norm()).fold(0.0, f64::max);
            for j in 0..=p.degree() {
                prop_assert!(
                    (p.coeff(j) - back.coeff(j)).norm() <= 1e-6 * scale,
                    "coefficient {j}: {} vs {}", p.coeff(j), back.coeff(j)
                );
            }
        }

        #[test]
        fn fiber_cardinality(roots in well_separated_roots(), wre in -3.0f64..3.0, wim in -3.0f64..3.0) {
            // solve_level returns exactly degree roots with multiplicity.
            let p = Polynomial::from_roots(&roots, c(1.0, 0.0)).unwrap();
            let rs = solve_level(&p, c(wre, wim)).unwrap();
            prop_assert_eq!(rs.total_multiplicity(), roots.len() as u64);
        }

        #[test]
        fn scale_invariance(roots in well_separated_roots()) {
            // Roots of p(lambda z) are roots of p divided by lambda.
            let p = Polynomial::from_roots(&roots, c(1.0, 0.0)).unwrap();
            for lambda in [c(2.0, 0.0), c(0.0, 1.0)] {
                let scaled_coeffs: Vec<Complex64> = p
                    .coeffs()
                    .iter()
                    .enumerate()
                    .map(|(j, a)| a * lambda.powu(j as u32))
                    .collect();
                let ps = Polynomial::new(scaled_coeffs).unwrap();
                let mut want: Vec<Complex64> = roots.iter().map(|r| r / lambda).collect();
                want.sort_by(|a, b| canonical_cmp(*a, *b));
                let mut got = find_roots(&ps).unwrap().expanded();
                got.sort_by(|a, b| canonical_cmp(*a, *b));
                for (w, g) in want.iter().zip(&got) {
                    prop_assert!((w - g).norm() <= 1e-9 * (1.0 + w.norm()));
                }
            }
        }
    }
}
