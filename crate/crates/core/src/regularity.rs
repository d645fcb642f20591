//! Regularity and centering diagnostics for polynomial sequences.
//!
//! Four instruments, all built on the same probe/fiber machinery:
//!
//! - [`pullback_equilibrium`]: the balanced pullback of the uniform measure
//!   on a circle |w| = r — every fiber q^{-1}(r e^{i theta_j}) contributes
//!   total weight exactly 1/n_angles, each root weighted by its multiplicity.
//! - [`kreg_error`]: how far (1/deg) log|q| is from the reference Green's
//!   function on a probe circle, together with the matching logarithmic-
//!   derivative error, centering counts, and a zero-cluster report.
//! - [`heredity_check`] / [`derivative_gap`]: the same diagnostics for a
//!   member and its next derivative side by side, plus the normalized gap
//!   sup |log|q'|/(deg-1) - log|q|/deg| that controls how regularity passes
//!   down the derivative tower.
//! - [`converge_experiment`]: sampled measures (pullback or backward-orbit)
//!   across a list of indices k, with energies, formula capacities, moment
//!   vectors, and moment distances between consecutive members and to a
//!   closed-form reference measure when one exists.
//!
//! Probe points and fiber angles are deterministic equispaced grids, and all
//! parallel legs are reduced in index order, so every report is
//! bit-reproducible.

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::dynamics::{
    brolin_sample, cap_filled_julia_spec, cap_preimage_spec, ReferenceDomain,
};
use crate::error::{Error, Result};
use crate::jsonfmt;
use crate::measure::{reference_equilibrium, DiscreteMeasure, MomentVector};
use crate::parallel::map_indexed;
use crate::poly::{Family, PolySequenceSpec, Polynomial};
use crate::roots::{
    default_cluster_eps, find_roots, solve_level_spec_cached, solve_level_with, RootSet,
    SolveOptions, ZeroClusterReport,
};
use crate::wide::WideComplex;

/// Default fiber count for balanced pullbacks.
pub const DEFAULT_N_ANGLES: usize = 64;
/// Default probe count on the test circle.
pub const DEFAULT_N_PROBE: usize = 256;
/// Default probe radius; every shipped reference domain fits in D-bar(2).
pub const DEFAULT_PROBE_RADIUS: f64 = 2.0;
/// Default Green-sublevel thresholds for centering counts.
pub const DEFAULT_EPS_LIST: [f64; 4] = [0.05, 0.1, 0.2, 0.5];
/// Default moment order for convergence experiments.
pub const DEFAULT_MOMENT_ORDER: u32 = 8;

/// The mandelbrot domain has no closed-form Green's function; its reference
/// is the sequence's own normalized log at index (max tested k) + this.
const SELF_REFERENCE_EXTRA: u32 = 4;
/// Atom count of closed-form reference measures in convergence reports.
const REFERENCE_ATOMS: usize = 4096;
/// Moments are only comparable on supports within this radius; experiment
/// measures are halved together until they all fit.
const MOMENT_SUPPORT_LIMIT: f64 = 4.0;
const MAX_RESCALE_HALVINGS: u32 = 8;

// ---------------------------------------------------------------------------
// Balanced pullback sampling
// ---------------------------------------------------------------------------

/// Balanced pullback of the uniform measure on |w| = r under `p`: for
/// equispaced angles theta_j = 2 pi j / n_angles, every root of
/// p(z) = r e^{i theta_j} becomes an atom of weight
/// multiplicity / (deg p * n_angles). Approximates the equilibrium measure
/// of p^{-1}(D-bar(r)).
pub fn pullback_equilibrium(
    p: &Polynomial,
    r: f64,
    n_angles: usize,
) -> Result<DiscreteMeasure> {
    if p.degree() < 1 {
        return Err(Error::InvalidInput(
            "pullback needs a polynomial of degree >= 1".into(),
        ));
    }
    validate_circle(r, n_angles)?;
    let fibers = map_indexed(n_angles, |j| {
        let w = Complex64::from_polar(r, TAU * j as f64 / n_angles as f64);
        solve_level_with(p, w, &SolveOptions::default())
    });
    assemble_pullback(fibers, p.degree() as u64, n_angles)
}

/// As [`pullback_equilibrium`] for a sequence member, sharing one realized
/// coefficient table across all fibers and solving through the member's
/// stable evaluation recurrence.
pub fn pullback_equilibrium_spec(
    spec: &PolySequenceSpec,
    r: f64,
    n_angles: usize,
) -> Result<DiscreteMeasure> {
    validate_circle(r, n_angles)?;
    let (wide, _) = spec.wide_realized();
    let opts = SolveOptions::default();
    let fibers = map_indexed(n_angles, |j| {
        let w = Complex64::from_polar(r, TAU * j as f64 / n_angles as f64);
        solve_level_spec_cached(spec, w, &wide, &opts)
    });
    assemble_pullback(fibers, spec.degree(), n_angles)
}

fn validate_circle(r: f64, n_angles: usize) -> Result<()> {
    if !r.is_finite() || r <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "circle radius must be positive and finite, got {r}"
        )));
    }
    if n_angles == 0 {
        return Err(Error::InvalidInput("need at least one fiber angle".into()));
    }
    Ok(())
}

fn assemble_pullback(
    fibers: Vec<Result<RootSet>>,
    degree: u64,
    n_angles: usize,
) -> Result<DiscreteMeasure> {
    // Rational weight denominator: multiplicities over all fibers sum to
    // degree * n_angles exactly, so the rational weights sum to exactly 1.
    let denom = (degree * n_angles as u64) as f64;
    let mut atoms = Vec::new();
    for (j, fiber) in fibers.into_iter().enumerate() {
        let theta = TAU * j as f64 / n_angles as f64;
        let fiber = fiber.map_err(|e| {
            Error::Unconverged {
                context: format!("pullback fiber {j} at angle theta = {theta:.6}: {e}"),
            }
        })?;
        if fiber.total_multiplicity() != degree || !fiber.all_converged() {
            return Err(Error::Unconverged {
                context: format!(
                    "pullback fiber {j} at angle theta = {theta:.6}: resolved {} of {} roots",
                    fiber.total_multiplicity(),
                    degree
                ),
            });
        }
        for e in fiber.entries() {
            atoms.push((e.location, e.multiplicity as f64 / denom));
        }
    }
    DiscreteMeasure::new(atoms)
}

// ---------------------------------------------------------------------------
// Reference Green evaluators
// ---------------------------------------------------------------------------

/// How a probe comparison obtains its target Green's function. Every domain
/// with a closed form or an escape evaluator is used directly; the
/// mandelbrot domain instead compares against the sequence's own normalized
/// log at a deeper index, which is the only computable stand-in.
enum Reference<'a> {
    Domain(&'a ReferenceDomain),
    SelfSequence { spec: PolySequenceSpec, inv_n: f64 },
}

impl<'a> Reference<'a> {
    fn resolve(domain: &'a ReferenceDomain, max_tested_k: u32) -> Result<Reference<'a>> {
        match domain {
            ReferenceDomain::Mandelbrot => {
                let spec = PolySequenceSpec::new(
                    Family::MandelbrotCenter,
                    max_tested_k + SELF_REFERENCE_EXTRA,
                    0,
                )?;
                let inv_n = 1.0 / spec.degree() as f64;
                Ok(Reference::SelfSequence { spec, inv_n })
            }
            other => Ok(Reference::Domain(other)),
        }
    }

    /// Green value and, where available, the derivative g' = 2 dg/dz.
    fn eval(&self, z: Complex64) -> Result<(f64, Option<Complex64>)> {
        match self {
            Reference::Domain(d) => Ok((d.green(z)?, d.green_deriv(z))),
            Reference::SelfSequence { spec, inv_n } => {
                let jets = spec.jet(WideComplex::from_c64(z), 1);
                let g = jets[0].ln_abs() * *inv_n;
                let dg = if jets[0].is_zero() {
                    None
                } else {
                    Some(jets[1].ratio_c64(jets[0]) * *inv_n)
                };
                Ok((g, dg))
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Regularity reports
// ---------------------------------------------------------------------------

/// Probe-circle diagnostics for one sequence member q_k^{(m)}.
#[derive(Clone, Debug)]
pub struct RegularityReport {
    pub k: u32,
    pub m: u32,
    /// Probe circle radius.
    pub r_probe: f64,
    /// Realized degree n_k - m.
    pub degree: u64,
    /// sup over probes of |(1/degree) log|q| - g_Omega|.
    pub sup_error: f64,
    /// sup over probes of |(1/degree) q'/q - g'_Omega| where the reference
    /// supplies a derivative; None otherwise.
    pub logderiv_error: Option<f64>,
    /// For each threshold eps (ascending), the number of roots zeta of the
    /// member, counted with multiplicity, with g_Omega(zeta) >= eps.
    pub centering_counts: Vec<(f64, u64)>,
    /// Greedy clustering of the member's zero set.
    pub cluster_report: ZeroClusterReport,
}

impl RegularityReport {
    pub fn to_json(&self) -> String {
        let logderiv = match self.logderiv_error {
            Some(v) => jsonfmt::number(v),
            None => "null".into(),
        };
        let mut counts = String::from("[");
        for (i, (eps, count)) in self.centering_counts.iter().enumerate() {
            if i > 0 {
                counts.push_str(", ");
            }
            counts.push_str(&format!(
                "{{\"epsilon\": {}, \"count\": {count}}}",
                jsonfmt::number(*eps)
            ));
        }
        counts.push(']');
        format!(
            "{{\"k\": {}, \"m\": {}, \"R\": {}, \"degree\": {}, \"sup_error\": {}, \
             \"logderiv_error\": {logderiv}, \"centering_counts\": {counts}, \
             \"cluster_report\": {}}}",
            self.k,
            self.m,
            jsonfmt::number(self.r_probe),
            self.degree,
            jsonfmt::number(self.sup_error),
            self.cluster_report.to_json()
        )
    }
}

/// Regularity error of one member against a reference domain: probes
/// n_probe equispaced points on |z| = r_probe and reports the sup deviation
/// of the normalized log (and log-derivative where the domain has one),
/// plus centering counts at [`DEFAULT_EPS_LIST`] and a zero-cluster report.
///
/// The probe circle must enclose the domain (r_probe at least the domain's
/// outer radius).
pub fn kreg_error(
    spec: &PolySequenceSpec,
    domain: &ReferenceDomain,
    r_probe: f64,
    n_probe: usize,
) -> Result<RegularityReport> {
    let reference = Reference::resolve(domain, spec.k())?;
    kreg_with(spec, domain, &reference, r_probe, n_probe, 0.0, &DEFAULT_EPS_LIST)
}

/// Shared core: probe sweep + zero-fiber diagnostics against a resolved
/// reference. `probe_offset` shifts the equispaced angles by a fraction of a
/// step (only the rotation-stability smoke test uses a nonzero value).
fn kreg_with(
    spec: &PolySequenceSpec,
    domain: &ReferenceDomain,
    reference: &Reference,
    r_probe: f64,
    n_probe: usize,
    probe_offset: f64,
    eps_list: &[f64],
) -> Result<RegularityReport> {
    validate_probe_circle(domain, r_probe, n_probe)?;
    let deg = spec.degree() as f64;
    let probes: Vec<Result<(f64, Option<f64>)>> = map_indexed(n_probe, |i| {
        let theta = TAU * (i as f64 + probe_offset) / n_probe as f64;
        let z = Complex64::from_polar(r_probe, theta);
        let jets = spec.jet(WideComplex::from_c64(z), 1);
        let (g_ref, dg_ref) = reference.eval(z)?;
        let sup = (jets[0].ln_abs() / deg - g_ref).abs();
        let logderiv =
            dg_ref.map(|dg| (jets[1].ratio_c64(jets[0]) / deg - dg).norm());
        Ok((sup, logderiv))
    });
    let mut sup_error = 0.0f64;
    let mut logderiv_error = Some(0.0f64);
    for probe in probes {
        let (sup, logderiv) = probe?;
        sup_error = sup_error.max(sup);
        logderiv_error = match (logderiv_error, logderiv) {
            (Some(acc), Some(v)) => Some(acc.max(v)),
            _ => None,
        };
    }
    let zeros = member_zero_fiber(spec)?;
    let centering_counts = counts_for_roots(domain, &zeros, &normalize_eps_list(eps_list)?)?;
    let cluster_report = zeros.cluster(default_cluster_eps(zeros.max_modulus()))?;
    Ok(RegularityReport {
        k: spec.k(),
        m: spec.m(),
        r_probe,
        degree: spec.degree(),
        sup_error,
        logderiv_error,
        centering_counts,
        cluster_report,
    })
}

fn validate_probe_circle(
    domain: &ReferenceDomain,
    r_probe: f64,
    n_probe: usize,
) -> Result<()> {
    if !r_probe.is_finite() || r_probe <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "probe radius must be positive and finite, got {r_probe}"
        )));
    }
    if n_probe == 0 {
        return Err(Error::InvalidInput("need at least one probe point".into()));
    }
    let outer = domain.outer_radius()?;
    // "At least" rather than "strictly larger": the default probe radius 2
    // coincides with the mandelbrot outer radius, and the sup is still well
    // defined on the boundary circle.
    if r_probe + 1e-9 < outer {
        return Err(Error::InvalidInput(format!(
            "probe radius {r_probe} lies inside the domain (outer radius {outer:.6})"
        )));
    }
    Ok(())
}

fn member_zero_fiber(spec: &PolySequenceSpec) -> Result<RootSet> {
    let (wide, _) = spec.wide_realized();
    solve_level_spec_cached(
        spec,
        Complex64::new(0.0, 0.0),
        &wide,
        &SolveOptions::default(),
    )
}

fn normalize_eps_list(eps_list: &[f64]) -> Result<Vec<f64>> {
    if eps_list.is_empty() {
        return Err(Error::InvalidInput("need at least one threshold".into()));
    }
    let mut eps = eps_list.to_vec();
    for &e in &eps {
        if !e.is_finite() || e <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "thresholds must be positive and finite, got {e}"
            )));
        }
    }
    eps.sort_by(|a, b| a.total_cmp(b));
    eps.dedup();
    Ok(eps)
}

/// Counts per ascending threshold; monotone nonincreasing because the
/// sublevel sets {g >= eps} shrink as eps grows.
fn counts_for_roots(
    domain: &ReferenceDomain,
    roots: &RootSet,
    eps: &[f64],
) -> Result<Vec<(f64, u64)>> {
    let greens: Vec<f64> = roots
        .entries()
        .iter()
        .map(|e| domain.green(e.location))
        .collect::<Result<_>>()?;
    Ok(eps
        .iter()
        .map(|&threshold| {
            let count = roots
                .entries()
                .iter()
                .zip(&greens)
                .filter(|(_, &g)| g >= threshold)
                .map(|(e, _)| e.multiplicity as u64)
                .sum();
            (threshold, count)
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Centering checks
// ---------------------------------------------------------------------------

/// For each threshold eps, the number of roots of `p` (with multiplicity)
/// whose Green value over the domain is at least eps — a sublevel proxy for
/// "roots escaping every neighborhood of the set". Thresholds are returned
/// sorted ascending with duplicates removed.
pub fn centering_check(
    p: &Polynomial,
    domain: &ReferenceDomain,
    eps_list: &[f64],
) -> Result<Vec<(f64, u64)>> {
    let eps = normalize_eps_list(eps_list)?;
    if p.degree() == 0 {
        return Ok(eps.into_iter().map(|e| (e, 0)).collect());
    }
    let roots = find_roots(p)?;
    counts_for_roots(domain, &roots, &eps)
}

/// As [`centering_check`] for a sequence member, solving the zero fiber
/// through the member's stable evaluation recurrence (works at indices whose
/// dense coefficients overflow f64).
pub fn centering_check_spec(
    spec: &PolySequenceSpec,
    domain: &ReferenceDomain,
    eps_list: &[f64],
) -> Result<Vec<(f64, u64)>> {
    let eps = normalize_eps_list(eps_list)?;
    let zeros = member_zero_fiber(spec)?;
    counts_for_roots(domain, &zeros, &eps)
}

// ---------------------------------------------------------------------------
// Heredity
// ---------------------------------------------------------------------------

/// One k of a heredity experiment: the member's report, the next
/// derivative's report, and the normalized log gap between them.
#[derive(Clone, Debug)]
pub struct HeredityRecord {
    pub k: u32,
    /// Report for derivative order m.
    pub base: RegularityReport,
    /// Report for derivative order m + 1.
    pub derived: RegularityReport,
    /// sup over probes of |log|q'|/(deg-1) - log|q|/deg| for the order-m
    /// member; regularity passes to the derivative exactly when this tends
    /// to zero, and sup_error(m+1) <= sup_error(m) + this gap.
    pub derivative_gap: f64,
}

impl HeredityRecord {
    pub fn to_json(&self) -> String {
        format!(
            "{{\"k\": {}, \"base\": {}, \"derived\": {}, \"derivative_gap\": {}}}",
            self.k,
            self.base.to_json(),
            self.derived.to_json(),
            jsonfmt::number(self.derivative_gap)
        )
    }
}

/// Normalized gap sup over |z| = r_probe of
/// |log|q^{(m+1)}(z)|/(deg-1) - log|q^{(m)}(z)|/deg| for the member `spec`
/// of degree deg >= 2.
pub fn derivative_gap(
    spec: &PolySequenceSpec,
    r_probe: f64,
    n_probe: usize,
) -> Result<f64> {
    if spec.degree() < 2 {
        return Err(Error::InvalidInput(
            "derivative gap needs a member of degree >= 2".into(),
        ));
    }
    if !r_probe.is_finite() || r_probe <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "probe radius must be positive and finite, got {r_probe}"
        )));
    }
    if n_probe == 0 {
        return Err(Error::InvalidInput("need at least one probe point".into()));
    }
    let deg = spec.degree() as f64;
    let gaps = map_indexed(n_probe, |i| {
        let theta = TAU * i as f64 / n_probe as f64;
        let z = Complex64::from_polar(r_probe, theta);
        let jets = spec.jet(WideComplex::from_c64(z), 1);
        (jets[1].ln_abs() / (deg - 1.0) - jets[0].ln_abs() / deg).abs()
    });
    Ok(gaps.into_iter().fold(0.0, f64::max))
}

/// Side-by-side regularity reports for orders m and m + 1 at each index in
/// `k_list` (strictly increasing), plus the derivative gap, all against one
/// shared reference (for the mandelbrot domain, the self-reference is built
/// once at max(k_list) + 4). Probes `DEFAULT_N_PROBE` points on
/// |z| = r_probe.
pub fn heredity_check(
    spec: &PolySequenceSpec,
    domain: &ReferenceDomain,
    r_probe: f64,
    k_list: &[u32],
) -> Result<Vec<HeredityRecord>> {
    validate_k_list(k_list)?;
    let reference = Reference::resolve(domain, *k_list.last().unwrap())?;
    let mut records = Vec::with_capacity(k_list.len());
    for &k in k_list {
        let at_m = spec.with_k(k)?;
        let at_m1 = at_m.with_m(spec.m() + 1)?;
        let base = kreg_with(
            &at_m,
            domain,
            &reference,
            r_probe,
            DEFAULT_N_PROBE,
            0.0,
            &DEFAULT_EPS_LIST,
        )?;
        let derived = kreg_with(
            &at_m1,
            domain,
            &reference,
            r_probe,
            DEFAULT_N_PROBE,
            0.0,
            &DEFAULT_EPS_LIST,
        )?;
        let gap = derivative_gap(&at_m, r_probe, DEFAULT_N_PROBE)?;
        records.push(HeredityRecord { k, base, derived, derivative_gap: gap });
    }
    Ok(records)
}

fn validate_k_list(k_list: &[u32]) -> Result<()> {
    if k_list.is_empty() {
        return Err(Error::InvalidInput("need at least one index k".into()));
    }
    if k_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(
            "indices k must be strictly increasing".into(),
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Convergence experiments
// ---------------------------------------------------------------------------

/// How a convergence experiment samples each member's measure.
#[derive(Clone, Copy, Debug)]
pub enum SampleSource {
    /// Balanced pullback of the uniform measure on |w| = r.
    Pullback { r: f64, n_angles: usize },
    /// Backward-orbit sampling of the member's filled-Julia equilibrium.
    Brolin { samples: usize, burn_in: usize, seed: u64 },
}

/// Sampled statistics for one member in a convergence experiment.
#[derive(Clone, Debug)]
pub struct ConvergenceRecord {
    pub k: u32,
    pub degree: u64,
    /// |gamma_k| of the underived member (may overflow to infinity; the log
    /// stays finite).
    pub gamma_abs: f64,
    pub log_gamma_abs: f64,
    /// Formula capacity: (Cap D-bar(r) / |gamma|)^{1/n} for pullback
    /// sources, |gamma|^{-1/(n-1)} for backward-orbit sources.
    pub capacity: f64,
    /// Discrete energy of the sampled measure (unscaled support).
    pub energy: f64,
    /// Moments of the sampled measure after the report-wide rescaling.
    pub moments: MomentVector,
}

/// Measures across a k-list compared through their moment vectors.
#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub records: Vec<ConvergenceRecord>,
    /// Moment distance between records i and i+1.
    pub consecutive_distances: Vec<f64>,
    /// Moment distance of each record to the closed-form reference measure,
    /// when the family has one (intervals: arcsine; monomial iterates:
    /// uniform circle).
    pub reference_distances: Option<Vec<f64>>,
    /// Number of times every support was halved so moments stay comparable;
    /// applied uniformly to all sampled measures and the reference.
    pub rescale_halvings: u32,
}

impl ConvergenceReport {
    pub fn to_json(&self) -> String {
        let mut records = String::from("[");
        for (i, r) in self.records.iter().enumerate() {
            if i > 0 {
                records.push_str(", ");
            }
            records.push_str(&format!(
                "{{\"k\": {}, \"degree\": {}, \"gamma_abs\": {}, \"log_gamma_abs\": {}, \
                 \"capacity\": {}, \"energy\": {}, \"moments\": {}}}",
                r.k,
                r.degree,
                jsonfmt::number(r.gamma_abs),
                jsonfmt::number(r.log_gamma_abs),
                jsonfmt::number(r.capacity),
                jsonfmt::number(r.energy),
                r.moments.to_json()
            ));
        }
        records.push(']');
        let reference = match &self.reference_distances {
            Some(d) => json_number_array(d),
            None => "null".into(),
        };
        format!(
            "{{\"rescale_halvings\": {}, \"records\": {records}, \
             \"consecutive_distances\": {}, \"reference_distances\": {reference}}}",
            self.rescale_halvings,
            json_number_array(&self.consecutive_distances)
        )
    }
}

fn json_number_array(xs: &[f64]) -> String {
    let mut out = String::from("[");
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&jsonfmt::number(*x));
    }
    out.push(']');
    out
}

/// Samples the measure of each member `spec.with_k(k)` per `source`,
/// computes energies, formula capacities, and order-`max_order` moments, and
/// reports moment distances between consecutive members and to the family's
/// closed-form reference measure when one exists. Supports are halved
/// uniformly (and the count recorded) until every sampled measure fits in
/// the moment comparison radius.
pub fn converge_experiment(
    spec: &PolySequenceSpec,
    k_list: &[u32],
    source: SampleSource,
    max_order: u32,
) -> Result<ConvergenceReport> {
    validate_k_list(k_list)?;
    if max_order == 0 {
        return Err(Error::InvalidInput("moment order must be >= 1".into()));
    }
    match source {
        SampleSource::Pullback { r, n_angles } => validate_circle(r, n_angles)?,
        SampleSource::Brolin { samples, .. } => {
            if samples == 0 {
                return Err(Error::InvalidInput("need at least one sample".into()));
            }
        }
    }

    let mut members = Vec::with_capacity(k_list.len());
    let mut measures = Vec::with_capacity(k_list.len());
    for &k in k_list {
        let member = spec.with_k(k)?;
        let mu = match source {
            SampleSource::Pullback { r, n_angles } => {
                pullback_equilibrium_spec(&member, r, n_angles)?
            }
            SampleSource::Brolin { samples, burn_in, seed } => {
                brolin_sample(&member.generate()?, samples, burn_in, seed)?
            }
        };
        members.push(member);
        measures.push(mu);
    }

    let reference = reference_measure_for(spec.family())?;
    let mut rescale_halvings = 0u32;
    loop {
        let scale = 0.5f64.powi(rescale_halvings as i32);
        let fits = measures
            .iter()
            .chain(reference.iter())
            .all(|mu| mu.support_radius() * scale <= MOMENT_SUPPORT_LIMIT);
        if fits {
            break;
        }
        rescale_halvings += 1;
        if rescale_halvings > MAX_RESCALE_HALVINGS {
            return Err(Error::InvalidInput(format!(
                "support radius stays above {MOMENT_SUPPORT_LIMIT} after {MAX_RESCALE_HALVINGS} halvings"
            )));
        }
    }
    let scale = 0.5f64.powi(rescale_halvings as i32);

    let mut records = Vec::with_capacity(k_list.len());
    for (member, mu) in members.iter().zip(&measures) {
        let capacity = match source {
            SampleSource::Pullback { r, .. } => cap_preimage_spec(member, r)?,
            SampleSource::Brolin { .. } => cap_filled_julia_spec(member)?,
        };
        let moments = mu.scaled(scale)?.moments(max_order)?;
        records.push(ConvergenceRecord {
            k: member.k(),
            degree: member.degree(),
            gamma_abs: member.gamma_abs(),
            log_gamma_abs: member.log_gamma_abs(),
            capacity,
            energy: mu.energy()?,
            moments,
        });
    }
    debug_assert!(records.windows(2).all(|w| w[0].degree < w[1].degree));

    let consecutive_distances = records
        .windows(2)
        .map(|w| w[0].moments.distance(&w[1].moments))
        .collect::<Result<Vec<_>>>()?;
    let reference_distances = match &reference {
        Some(omega) => {
            let omega_moments = omega.scaled(scale)?.moments(max_order)?;
            Some(
                records
                    .iter()
                    .map(|r| r.moments.distance(&omega_moments))
                    .collect::<Result<Vec<_>>>()?,
            )
        }
        None => None,
    };

    Ok(ConvergenceReport {
        records,
        consecutive_distances,
        reference_distances,
        rescale_halvings,
    })
}

/// Closed-form limit measure of a family's preimages, when one exists:
/// arcsine on [a, b] for the interval family, the uniform circle of radius
/// |gamma|^{-1/(d-1)} for iterates of a monomial gamma z^d. The derivative
/// tower shares the limit, so only the family matters.
pub fn reference_measure_for(family: &Family) -> Result<Option<DiscreteMeasure>> {
    match family {
        Family::ChebyshevInterval { a, b } => {
            let domain = ReferenceDomain::interval(*a, *b)?;
            Ok(Some(reference_equilibrium(&domain, REFERENCE_ATOMS)?))
        }
        Family::Iterate(base) => {
            let d = base.degree();
            let monomial = d >= 2
                && base.coeffs()[..d]
                    .iter()
                    .all(|c| c.re == 0.0 && c.im == 0.0);
            if monomial {
                let r = (-base.gamma().norm().ln() / (d as f64 - 1.0)).exp();
                let domain = ReferenceDomain::disk(r)?;
                Ok(Some(reference_equilibrium(&domain, REFERENCE_ATOMS)?))
            } else {
                Ok(None)
            }
        }
        Family::MandelbrotCenter => Ok(None),
    }
}
