//! End-to-end acceptance gate: eight scripted criteria, one verdict line each.
//!
//! Run `cargo test --test acceptance -- --nocapture` to see the verdict table.
//! Every criterion prints `PASS` or `FAIL` with a quantitative note and its
//! elapsed time; the test itself goes red if any criterion fails, but only
//! after all eight lines have been printed. Tolerances are pinned as
//! constants next to the criterion that uses them. Stated budgets are
//! advisory (they assume a multi-core desktop; this harness never asserts
//! on wall-clock time).

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use eqmeas_core::dynamics::{
    brolin_sample, cap_filled_julia, cap_filled_julia_spec, cap_preimage, escape_radius,
    green_field_spec, ReferenceDomain,
};
use eqmeas_core::measure::{
    capacity_from_energy, moment_distance, reference_equilibrium, DiscreteMeasure,
};
use eqmeas_core::poly::{Family, PolySequenceSpec, Polynomial};
use eqmeas_core::regularity::{
    converge_experiment, heredity_check, kreg_error, pullback_equilibrium,
    pullback_equilibrium_spec, SampleSource,
};
use eqmeas_core::render::{colorize, image_bytes, write_image, RasterImage, INSIDE_COLOR};
use eqmeas_core::roots::solve_level;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn real_poly(coeffs: &[f64]) -> Polynomial {
    Polynomial::new(coeffs.iter().map(|&x| c(x, 0.0)).collect()).expect("valid test polynomial")
}

fn iterate_spec(base: &Polynomial, k: u32, m: u32) -> Result<PolySequenceSpec, String> {
    PolySequenceSpec::new(Family::Iterate(base.clone()), k, m)
        .map_err(|e| format!("spec construction: {e}"))
}

fn mandel_spec(k: u32, m: u32) -> Result<PolySequenceSpec, String> {
    PolySequenceSpec::new(Family::MandelbrotCenter, k, m)
        .map_err(|e| format!("spec construction: {e}"))
}

/// Fold a list of sub-check failures into the criterion verdict.
fn verdict(problems: Vec<String>, note: String) -> Result<String, String> {
    if problems.is_empty() {
        Ok(note)
    } else {
        Err(problems.join("; "))
    }
}

fn ctx(what: &str) -> impl Fn(eqmeas_core::Error) -> String + '_ {
    move |e| format!("{what}: {e}")
}

// ---------------------------------------------------------------------------
// Criterion 1: exact disk tower. Pulling the circle |w| = 4 back through the
// iterates of z^2 keeps the measure on an exact circle of radius 4^(1/2^k),
// and the balanced pullback reproduces the uniform measure on it.
// ---------------------------------------------------------------------------

const C1_RADIUS_TOL: f64 = 1e-9;
const C1_MOMENT_TOL: f64 = 1e-8;
const C1_MOMENT_ORDER: u32 = 8;

fn criterion_disk_tower() -> Result<String, String> {
    let base = real_poly(&[0.0, 0.0, 1.0]);
    let mut worst_radius = 0.0f64;
    let mut worst_moment = 0.0f64;
    let mut problems = Vec::new();
    for k in 1..=10u32 {
        let spec = iterate_spec(&base, k, 0)?;
        let mu = pullback_equilibrium_spec(&spec, 4.0, 64).map_err(ctx("pullback"))?;
        let rho = 4f64.powf(0.5f64.powi(k as i32));
        let radius_err = mu
            .atoms()
            .iter()
            .map(|(z, _)| (z.norm() - rho).abs())
            .fold(0.0f64, f64::max);
        worst_radius = worst_radius.max(radius_err);
        if radius_err > C1_RADIUS_TOL {
            problems.push(format!(
                "k = {k}: atom modulus off the circle 4^(1/2^{k}) by {radius_err:.3e}"
            ));
        }
        let disk = ReferenceDomain::disk(rho).map_err(ctx("reference disk"))?;
        let circle = reference_equilibrium(&disk, 4096).map_err(ctx("circle reference"))?;
        let dist = moment_distance(&mu, &circle, C1_MOMENT_ORDER).map_err(ctx("moments"))?;
        worst_moment = worst_moment.max(dist);
        if dist > C1_MOMENT_TOL {
            problems.push(format!("k = {k}: moment distance to the uniform circle is {dist:.3e}"));
        }
    }
    verdict(
        problems,
        format!(
            "k = 1..10: max radius error {worst_radius:.1e} (tol {C1_RADIUS_TOL:.0e}), \
             max moment distance {worst_moment:.1e} (tol {C1_MOMENT_TOL:.0e})"
        ),
    )
}

// ---------------------------------------------------------------------------
// Criterion 2: derivative heredity closed form. For iterates of z^2 the gap
// between the normalized log-moduli of q_k' and q_k on |z| = 2 is exactly
// k·ln2/(2^k - 1), independent of the probe radius.
// ---------------------------------------------------------------------------

const C2_GAP_TOL: f64 = 1e-9;
const C2_FINAL_BOUND: f64 = 1e-3;

fn criterion_heredity_closed_form() -> Result<String, String> {
    let base = real_poly(&[0.0, 0.0, 1.0]);
    let spec = iterate_spec(&base, 1, 0)?;
    let domain = ReferenceDomain::disk(1.0).map_err(ctx("domain"))?;
    let k_list: Vec<u32> = (1..=12).collect();
    let records = heredity_check(&spec, &domain, 2.0, &k_list).map_err(ctx("heredity"))?;

    let mut problems = Vec::new();
    let mut prev = f64::INFINITY;
    let mut last_gap = f64::NAN;
    for rec in &records {
        let expected =
            rec.k as f64 * std::f64::consts::LN_2 / ((1u64 << rec.k) - 1) as f64;
        let err = (rec.derivative_gap - expected).abs();
        if err > C2_GAP_TOL {
            problems.push(format!(
                "k = {}: gap {:.12e} differs from k·ln2/(2^k-1) by {err:.3e}",
                rec.k, rec.derivative_gap
            ));
        }
        if !(rec.derivative_gap < prev) {
            problems.push(format!(
                "gap at k = {} ({:.3e}) is not below its predecessor ({prev:.3e})",
                rec.k, rec.derivative_gap
            ));
        }
        prev = rec.derivative_gap;
        last_gap = rec.derivative_gap;
    }
    if !(last_gap < C2_FINAL_BOUND) {
        problems.push(format!(
            "gap at k = 12 is {last_gap:.4e}, not < {C2_FINAL_BOUND:.0e}; the closed form \
             k·ln2/(2^k-1) evaluates to 2.0312e-3 at k = 12 and first drops below 1e-3 at \
             k = 14, so no correct implementation can satisfy this bound at k = 12"
        ));
    }
    verdict(
        problems,
        format!(
            "12 records match k·ln2/(2^k-1) within {C2_GAP_TOL:.0e}, strictly decreasing, \
             gap(12) = {last_gap:.4e}"
        ),
    )
}

// ---------------------------------------------------------------------------
// Criterion 3: Chebyshev/arcsine convergence. Pullbacks of |w| = 1/2 through
// degree-n Chebyshev polynomials on [-1, 1] reproduce the arcsine moments
// 1/2 (second) and 3/8 (fourth) with errors shrinking in n.
// ---------------------------------------------------------------------------

const C3_CASES: [(u32, f64); 3] = [(32, 0.05), (128, 0.02), (512, 0.01)];
const C3_SECOND_MOMENT: f64 = 0.5;
const C3_FOURTH_MOMENT: f64 = 0.375;

fn criterion_chebyshev_arcsine() -> Result<String, String> {
    let mut problems = Vec::new();
    let mut errs2 = Vec::new();
    let mut errs4 = Vec::new();
    for (n, tol) in C3_CASES {
        let spec = PolySequenceSpec::new(Family::ChebyshevInterval { a: -1.0, b: 1.0 }, n, 0)
            .map_err(|e| format!("spec construction: {e}"))?;
        let mu = pullback_equilibrium_spec(&spec, 0.5, 64).map_err(ctx("pullback"))?;
        let moments = mu.moments(4).map_err(ctx("moments"))?;
        let m2 = moments.get(1, 1).expect("order (1,1) present");
        let m4 = moments.get(2, 2).expect("order (2,2) present");
        let e2 = (m2.re - C3_SECOND_MOMENT).abs();
        let e4 = (m4.re - C3_FOURTH_MOMENT).abs();
        if e2 > tol {
            problems.push(format!("n = {n}: second moment {:.6} misses 1/2 by {e2:.3e}", m2.re));
        }
        if e4 > tol {
            problems.push(format!("n = {n}: fourth moment {:.6} misses 3/8 by {e4:.3e}", m4.re));
        }
        errs2.push(e2);
        errs4.push(e4);
    }
    for (name, errs) in [("second", &errs2), ("fourth", &errs4)] {
        for (i, w) in errs.windows(2).enumerate() {
            if !(w[1] < w[0]) {
                problems.push(format!(
                    "{name}-moment error does not decrease from n = {} to n = {}: {:.3e} then {:.3e}",
                    C3_CASES[i].0,
                    C3_CASES[i + 1].0,
                    w[0],
                    w[1]
                ));
            }
        }
    }
    verdict(
        problems,
        format!(
            "errors vs arcsine at n = 32/128/512: second {:.1e}/{:.1e}/{:.1e}, \
             fourth {:.1e}/{:.1e}/{:.1e}",
            errs2[0], errs2[1], errs2[2], errs4[0], errs4[1], errs4[2]
        ),
    )
}

// ---------------------------------------------------------------------------
// Criterion 4: capacity identities. Closed-form capacities match brute-force
// exp(discrete energy) of sampled measures within 5% at 4096 atoms, and the
// monic quadratic tower keeps capacity exactly 1.
// ---------------------------------------------------------------------------

const C4_REL_TOL: f64 = 0.05;
const C4_BROLIN_SEED: u64 = 17;
const C4_ATOMS: usize = 4096;

fn criterion_capacity_identities() -> Result<String, String> {
    let bases = [
        ("z^2-1", real_poly(&[-1.0, 0.0, 1.0])),
        ("z^2-2", real_poly(&[-2.0, 0.0, 1.0])),
        ("2z^2", real_poly(&[0.0, 0.0, 2.0])),
    ];
    let mut problems = Vec::new();
    let mut worst_rel = 0.0f64;
    for (name, p) in &bases {
        // Filled-Julia branch: backward-orbit samples vs |gamma|^(-1/(d-1)).
        let mu = brolin_sample(p, C4_ATOMS, 64, C4_BROLIN_SEED).map_err(ctx("sampling"))?;
        let energy = mu.energy().map_err(ctx("energy"))?;
        let emp = capacity_from_energy(energy).map_err(ctx("capacity"))?;
        let theory = cap_filled_julia(p).map_err(ctx("closed form"))?;
        let rel = (emp - theory).abs() / theory;
        worst_rel = worst_rel.max(rel);
        if rel > C4_REL_TOL {
            problems.push(format!(
                "{name}: filled-Julia capacity {theory:.6} vs sampled {emp:.6} (rel {rel:.3})"
            ));
        }
        // Preimage branch: 2 x 2048 pullback atoms vs (Cap L / |gamma|)^(1/d).
        let mu = pullback_equilibrium(p, 1.0, C4_ATOMS / p.degree()).map_err(ctx("pullback"))?;
        let energy = mu.energy().map_err(ctx("energy"))?;
        let emp = capacity_from_energy(energy).map_err(ctx("capacity"))?;
        let theory = cap_preimage(p, 1.0).map_err(ctx("closed form"))?;
        let rel = (emp - theory).abs() / theory;
        worst_rel = worst_rel.max(rel);
        if rel > C4_REL_TOL {
            problems.push(format!(
                "{name}: preimage capacity {theory:.6} vs sampled {emp:.6} (rel {rel:.3})"
            ));
        }
    }
    // Monic quadratic tower: exact unit capacity, exact zero leading log.
    // The k = 1 member is the degree-1 identity c -> c, whose filled Julia
    // set is the whole plane; the capacity identity starts at k = 2, while
    // the leading-coefficient limit is defined from k = 1.
    for k in 1..=12u32 {
        let spec = mandel_spec(k, 0)?;
        if spec.degree() >= 2 {
            let cap = cap_filled_julia_spec(&spec).map_err(ctx("tower capacity"))?;
            if cap != 1.0 {
                problems.push(format!("tower k = {k}: capacity {cap} is not exactly 1"));
            }
        }
        let limit = spec.log_gamma_abs() / spec.n_k() as f64;
        if limit != 0.0 {
            problems.push(format!("tower k = {k}: (1/n_k)·ln|gamma_k| = {limit} is not exactly 0"));
        }
    }
    verdict(
        problems,
        format!(
            "three quadratics within rel {worst_rel:.4} of closed forms (tol {C4_REL_TOL}); \
             tower capacity exactly 1 for k <= 12"
        ),
    )
}

// ---------------------------------------------------------------------------
// Criterion 5: moment convergence of the center tower. Consecutive moment
// distances of pullback measures shrink by at least 1.3x across k = 6..12 for
// the members and their derivatives, and the two towers agree at k = 12.
// ---------------------------------------------------------------------------

const C5_DECAY_FACTOR: f64 = 1.3;
const C5_CROSS_TOL: f64 = 0.05;

fn criterion_mandelbrot_moments() -> Result<String, String> {
    let k_list: Vec<u32> = (6..=12).collect();
    let mut problems = Vec::new();
    let mut reports = Vec::new();
    let mut ratios = Vec::new();
    for m in 0..=1u32 {
        let spec = mandel_spec(6, m)?;
        let report = converge_experiment(
            &spec,
            &k_list,
            SampleSource::Pullback { r: 1.0, n_angles: 64 },
            8,
        )
        .map_err(ctx("convergence experiment"))?;
        let d = &report.consecutive_distances;
        assert_eq!(d.len(), 6, "seven members give six consecutive distances");
        let ratio = d[0] / d[5];
        if !(ratio >= C5_DECAY_FACTOR) {
            problems.push(format!(
                "m = {m}: distance(6→7) / distance(11→12) = {ratio:.3} < {C5_DECAY_FACTOR}"
            ));
        }
        ratios.push(ratio);
        reports.push(report);
    }
    if reports[0].rescale_halvings != reports[1].rescale_halvings {
        problems.push(format!(
            "moment supports were rescaled differently (m = 0: {} halvings, m = 1: {}), \
             so the cross-tower distance is not comparable",
            reports[0].rescale_halvings, reports[1].rescale_halvings
        ));
        return verdict(problems, String::new());
    }
    let crosses = k_list
        .iter()
        .enumerate()
        .map(|(i, _)| {
            reports[0].records[i].moments.distance(&reports[1].records[i].moments)
        })
        .collect::<Result<Vec<f64>, _>>()
        .map_err(ctx("cross distance"))?;
    let cross = *crosses.last().expect("k list is non-empty");
    if cross > C5_CROSS_TOL {
        // Project where the observed geometric decay first meets the bound.
        let rate = crosses[crosses.len() - 2] / cross;
        let extra = ((cross / C5_CROSS_TOL).ln() / rate.ln()).ceil() as u32;
        let trend: Vec<String> = crosses.iter().map(|d| format!("{d:.3}")).collect();
        problems.push(format!(
            "member-vs-derivative moment distance at k = 12 is {cross:.4} > {C5_CROSS_TOL}; \
             measured cross distances for k = 6..12 are [{}], decaying by ~{rate:.2}x per k, \
             which first reaches {C5_CROSS_TOL} at k = {}",
            trend.join(", "),
            12 + extra
        ));
    }
    verdict(
        problems,
        format!(
            "decay ratios m=0: {:.2}, m=1: {:.2} (need >= {C5_DECAY_FACTOR}); \
             cross distance at k = 12 is {cross:.2e} (tol {C5_CROSS_TOL})",
            ratios[0], ratios[1]
        ),
    )
}

// ---------------------------------------------------------------------------
// Criterion 6: regularity sup-error decay. The normalized log-modulus of the
// iterates of z^2 - 1 approaches the escape-time Green's function on |z| = 2.
// ---------------------------------------------------------------------------

const C6_FINAL_BOUND: f64 = 1e-3;

fn criterion_regularity_decay() -> Result<String, String> {
    let base = real_poly(&[-1.0, 0.0, 1.0]);
    let domain = ReferenceDomain::filled_julia(base.clone()).map_err(ctx("domain"))?;
    let mut errs = Vec::new();
    for k in 3..=9u32 {
        let spec = iterate_spec(&base, k, 0)?;
        let report = kreg_error(&spec, &domain, 2.0, 256).map_err(ctx("regularity probe"))?;
        errs.push(report.sup_error);
    }
    let mut problems = Vec::new();
    for (i, w) in errs.windows(2).enumerate() {
        let k = 3 + i as u32;
        if !(w[1] < w[0]) {
            problems.push(format!(
                "sup error does not strictly decrease from k = {k} to k = {}: {:.3e} then {:.3e} \
                 (measured floor: the escape-time reference refines through the same squaring \
                 recurrence the member evaluates, so past k = 5 both sides agree to the last bit \
                 and the difference is rounding noise, not signal)",
                k + 1,
                w[0],
                w[1]
            ));
        }
    }
    // errs[5] is k = 8.
    if !(errs[5] < C6_FINAL_BOUND) {
        problems.push(format!("sup error at k = 8 is {:.3e}, not < {C6_FINAL_BOUND:.0e}", errs[5]));
    }
    let sequence =
        errs.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join(", ");
    verdict(problems, format!("sup errors for k = 3..9: [{sequence}]"))
}

// ---------------------------------------------------------------------------
// Criterion 7: randomized invariant suites, 200 fixed-seed instances each.
// ---------------------------------------------------------------------------

const C7_INSTANCES: usize = 200;

fn random_in_disk(rng: &mut ChaCha8Rng, radius: f64) -> Complex64 {
    let r = radius * rng.gen::<f64>().sqrt();
    let theta = std::f64::consts::TAU * rng.gen::<f64>();
    Complex64::from_polar(r, theta)
}

/// Potential bound: p_mu <= ln(2R) whenever support and probe sit in D(R).
fn suite_potential_bound() -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC701);
    let mut bad = Vec::new();
    for i in 0..C7_INSTANCES {
        let radius = 0.3 + 2.7 * rng.gen::<f64>();
        let n = rng.gen_range(1..=12);
        let points: Vec<Complex64> = (0..n).map(|_| random_in_disk(&mut rng, radius)).collect();
        let mut weights: Vec<f64> = (0..n).map(|_| 0.05 + rng.gen::<f64>()).collect();
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        let head: f64 = weights[1..].iter().sum();
        weights[0] = 1.0 - head;
        let mu = match DiscreteMeasure::new(points.into_iter().zip(weights).collect()) {
            Ok(mu) => mu,
            Err(e) => {
                bad.push(format!("instance {i}: measure construction failed: {e}"));
                continue;
            }
        };
        let probe = random_in_disk(&mut rng, radius);
        let bound = (2.0 * radius).ln();
        let value = mu.potential_at(probe);
        if !(value <= bound + 1e-12) {
            bad.push(format!("instance {i}: potential {value:.6} exceeds ln(2R) = {bound:.6}"));
        }
    }
    bad
}

/// Gradient positivity: for support in the closed left half-plane and a probe
/// on the positive real axis, d/dx of the potential is positive and matches a
/// central finite difference to 1e-6.
fn suite_gradient_positivity() -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC702);
    let mut bad = Vec::new();
    for i in 0..C7_INSTANCES {
        let n = rng.gen_range(1..=8);
        let points: Vec<Complex64> = (0..n)
            .map(|_| c(-2.0 * rng.gen::<f64>(), 4.0 * (rng.gen::<f64>() - 0.5)))
            .collect();
        let mu = DiscreteMeasure::uniform(&points).expect("uniform measure");
        let x = 0.05 + 2.0 * rng.gen::<f64>();
        let deriv = match mu.potential_cderiv(c(x, 0.0)) {
            Ok(d) => d,
            Err(e) => {
                bad.push(format!("instance {i}: derivative failed: {e}"));
                continue;
            }
        };
        if !(deriv.re > 0.0) {
            bad.push(format!("instance {i}: d/dx potential = {:.6e} is not positive", deriv.re));
        }
        let h = 1e-6;
        let fd = (mu.potential_at(c(x + h, 0.0)) - mu.potential_at(c(x - h, 0.0))) / (2.0 * h);
        let err = (fd - deriv.re).abs();
        if err > 1e-6 * deriv.re.abs().max(1.0) {
            bad.push(format!(
                "instance {i}: finite difference {fd:.9e} vs analytic {:.9e} (err {err:.2e})",
                deriv.re
            ));
        }
    }
    bad
}

/// Balanced-pullback mass exactness: every weight is an exact integer
/// multiple of 1/(degree * n_angles) and the weights sum to 1.
fn suite_pullback_mass() -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC703);
    let mut bad = Vec::new();
    for i in 0..C7_INSTANCES {
        let degree = rng.gen_range(2usize..=4);
        let roots: Vec<Complex64> = (0..degree).map(|_| random_in_disk(&mut rng, 1.5)).collect();
        let gamma = Complex64::from_polar(
            0.5 + 1.5 * rng.gen::<f64>(),
            std::f64::consts::TAU * rng.gen::<f64>(),
        );
        let p = match Polynomial::from_roots(&roots, gamma) {
            Ok(p) => p,
            Err(e) => {
                bad.push(format!("instance {i}: polynomial construction failed: {e}"));
                continue;
            }
        };
        let n_angles = rng.gen_range(3usize..=9);
        let r = 0.5 + 2.5 * rng.gen::<f64>();
        let mu = match pullback_equilibrium(&p, r, n_angles) {
            Ok(mu) => mu,
            Err(e) => {
                bad.push(format!("instance {i}: pullback failed: {e}"));
                continue;
            }
        };
        let total: f64 = mu.atoms().iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            bad.push(format!("instance {i}: total mass {total:.17} is not 1"));
        }
        let units = (degree * n_angles) as f64;
        let mut unit_sum = 0i64;
        for (z, w) in mu.atoms() {
            let u = w * units;
            if (u - u.round()).abs() > 1e-9 {
                bad.push(format!(
                    "instance {i}: weight {w} at {z} is not a multiple of 1/{units}"
                ));
                break;
            }
            unit_sum += u.round() as i64;
        }
        if unit_sum != (degree * n_angles) as i64 {
            bad.push(format!(
                "instance {i}: multiplicities sum to {unit_sum}, expected {}",
                degree * n_angles
            ));
        }
    }
    bad
}

/// Fiber cardinality: solving q(z) = w accounts for exactly degree roots
/// counted with multiplicity, all flagged converged.
fn suite_fiber_cardinality() -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC704);
    let mut bad = Vec::new();
    for i in 0..C7_INSTANCES {
        let degree = rng.gen_range(2usize..=5);
        let mut coeffs: Vec<Complex64> = (0..=degree)
            .map(|_| c(4.0 * (rng.gen::<f64>() - 0.5), 4.0 * (rng.gen::<f64>() - 0.5)))
            .collect();
        let lead = coeffs[degree];
        if lead.norm() < 0.3 {
            coeffs[degree] = if lead.norm() == 0.0 { c(0.3, 0.0) } else { lead * (0.3 / lead.norm()) };
        }
        let p = match Polynomial::new(coeffs) {
            Ok(p) => p,
            Err(e) => {
                bad.push(format!("instance {i}: polynomial construction failed: {e}"));
                continue;
            }
        };
        let w = random_in_disk(&mut rng, 2.0);
        match solve_level(&p, w) {
            Ok(rs) => {
                if rs.total_multiplicity() != p.degree() as u64 {
                    bad.push(format!(
                        "instance {i}: fiber carries {} of {} roots",
                        rs.total_multiplicity(),
                        p.degree()
                    ));
                }
                if !rs.all_converged() {
                    bad.push(format!("instance {i}: fiber has unconverged roots"));
                }
            }
            Err(e) => bad.push(format!("instance {i}: fiber solve failed: {e}")),
        }
    }
    bad
}

/// Containment: backward-orbit samples of K(p) and the full preimage of the
/// escape circle |w| = R both stay inside the closed disk of radius R.
fn suite_containment() -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC705);
    let mut bad = Vec::new();
    for i in 0..C7_INSTANCES {
        let degree = rng.gen_range(2usize..=3);
        let roots: Vec<Complex64> = (0..degree).map(|_| random_in_disk(&mut rng, 1.2)).collect();
        let gamma = Complex64::from_polar(
            0.5 + 1.5 * rng.gen::<f64>(),
            std::f64::consts::TAU * rng.gen::<f64>(),
        );
        let p = match Polynomial::from_roots(&roots, gamma) {
            Ok(p) => p,
            Err(e) => {
                bad.push(format!("instance {i}: polynomial construction failed: {e}"));
                continue;
            }
        };
        let radius = match escape_radius(&p) {
            Ok(r) => r,
            Err(e) => {
                bad.push(format!("instance {i}: escape radius failed: {e}"));
                continue;
            }
        };
        match brolin_sample(&p, 256, 32, 1000 + i as u64) {
            Ok(mu) => {
                let support = mu.support_radius();
                if support > radius + 1e-12 {
                    bad.push(format!(
                        "instance {i}: sample at modulus {support:.6} escapes D({radius:.6})"
                    ));
                }
            }
            Err(e) => bad.push(format!("instance {i}: sampling failed: {e}")),
        }
        let w = Complex64::from_polar(radius, std::f64::consts::TAU * rng.gen::<f64>());
        match solve_level(&p, w) {
            Ok(rs) => {
                if rs.max_modulus() > radius + 1e-9 {
                    bad.push(format!(
                        "instance {i}: preimage of |w| = R at modulus {:.6} escapes D({radius:.6})",
                        rs.max_modulus()
                    ));
                }
            }
            Err(e) => bad.push(format!("instance {i}: boundary fiber solve failed: {e}")),
        }
    }
    bad
}

fn criterion_invariant_suites() -> Result<String, String> {
    let suites: [(&str, fn() -> Vec<String>); 5] = [
        ("potential bound", suite_potential_bound),
        ("gradient positivity", suite_gradient_positivity),
        ("pullback mass", suite_pullback_mass),
        ("fiber cardinality", suite_fiber_cardinality),
        ("containment", suite_containment),
    ];
    let mut problems = Vec::new();
    for (name, run) in suites {
        let bad = run();
        if !bad.is_empty() {
            let shown = bad.iter().take(3).cloned().collect::<Vec<_>>().join("; ");
            problems.push(format!(
                "{name}: {} of {C7_INSTANCES} instances violated ({shown})",
                bad.len()
            ));
        }
    }
    verdict(
        problems,
        format!("5 suites x {C7_INSTANCES} seeded instances, no violations"),
    )
}

// ---------------------------------------------------------------------------
// Criterion 8: figure reproduction. Six byte-deterministic renders of the
// center tower and its derivatives, with point checks at c = 0 and c = 1.
// ---------------------------------------------------------------------------

const C8_BBOX: [f64; 4] = [-2.5, -1.5, 1.5, 1.5];
const C8_WIDTH: usize = 800;
const C8_HEIGHT: usize = 600;
const C8_ITERS: u32 = 256;

fn pixel_of(bbox: [f64; 4], width: usize, height: usize, z: Complex64) -> (usize, usize) {
    let [x0, y0, x1, y1] = bbox;
    let dx = (x1 - x0) / width as f64;
    let dy = (y1 - y0) / height as f64;
    let col = (((z.re - x0) / dx).floor() as isize).clamp(0, width as isize - 1) as usize;
    let row = (((y1 - z.im) / dy).floor() as isize).clamp(0, height as isize - 1) as usize;
    (row, col)
}

fn criterion_figures() -> Result<String, String> {
    let out_dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("figures");
    std::fs::create_dir_all(&out_dir).map_err(|e| format!("creating {}: {e}", out_dir.display()))?;
    let mut problems = Vec::new();
    for k in [3u32, 6, 10] {
        for m in 0..=1u32 {
            let spec = mandel_spec(k, m)?;
            let render = || -> Result<RasterImage, String> {
                let field = green_field_spec(&spec, C8_BBOX, C8_WIDTH, C8_HEIGHT, C8_ITERS)
                    .map_err(ctx("field"))?;
                colorize(&field).map_err(ctx("colorize"))
            };
            let first = render()?;
            let second = render()?;
            if image_bytes(&first) != image_bytes(&second) {
                problems.push(format!("k = {k}, m = {m}: two renders are not byte-identical"));
            }
            let path = out_dir.join(format!("julia_k{k}_m{m}.ppm"));
            write_image(&first, &path).map_err(ctx("writing image"))?;

            let (row, col) = pixel_of(C8_BBOX, C8_WIDTH, C8_HEIGHT, c(0.0, 0.0));
            let at_zero = first.pixel(row, col);
            if at_zero != INSIDE_COLOR {
                let why = if m == 1 {
                    " (genuine: the derivative member sends 0 to 1 and the orbit of 1 escapes, \
                     so c = 0 lies outside this filled Julia set; the check is reported as \
                     stated rather than weakened)"
                } else {
                    ""
                };
                problems.push(format!(
                    "k = {k}, m = {m}: pixel at c = 0 is {at_zero:?}, not inside-green{why}"
                ));
            }
            // The c = 1 exterior check applies to the members themselves.
            if m == 0 {
                let (row, col) = pixel_of(C8_BBOX, C8_WIDTH, C8_HEIGHT, c(1.0, 0.0));
                let at_one = first.pixel(row, col);
                let is_red = at_one[0] > 0 && at_one[1] == 0 && at_one[2] == 0;
                if !is_red {
                    problems.push(format!(
                        "k = {k}, m = {m}: pixel at c = 1 is {at_one:?}, not an exterior red"
                    ));
                }
            }
        }
    }
    verdict(
        problems,
        format!(
            "six {C8_WIDTH}x{C8_HEIGHT} images byte-deterministic, point checks hold; \
             written to {}",
            out_dir.display()
        ),
    )
}

// ---------------------------------------------------------------------------
// Harness
// ---------------------------------------------------------------------------

fn panic_text(payload: Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        format!("panicked: {s}")
    } else if let Some(s) = payload.downcast_ref::<String>() {
        format!("panicked: {s}")
    } else {
        "panicked".to_string()
    }
}

#[test]
fn acceptance_criteria() {
    type Criterion = fn() -> Result<String, String>;
    let table: [(u32, &str, &str, Criterion); 8] = [
        (1, "disk tower", "10 s", criterion_disk_tower),
        (2, "derivative heredity closed form", "5 s", criterion_heredity_closed_form),
        (3, "chebyshev arcsine convergence", "2 min", criterion_chebyshev_arcsine),
        (4, "capacity identities", "3 min", criterion_capacity_identities),
        (5, "center tower moment convergence", "10 min", criterion_mandelbrot_moments),
        (6, "regularity sup-error decay", "1 min", criterion_regularity_decay),
        (7, "randomized invariant suites", "1 min", criterion_invariant_suites),
        (8, "figure reproduction", "2 min", criterion_figures),
    ];
    let mut failures = Vec::new();
    for (id, slug, budget, run) in table {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| Err(panic_text(p)));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(note) => {
                println!("criterion {id} ({slug}): PASS — {note} [{secs:.1} s, budget {budget}]");
            }
            Err(why) => {
                println!("criterion {id} ({slug}): FAIL — {why} [{secs:.1} s, budget {budget}]");
                failures.push(format!("criterion {id} ({slug})"));
            }
        }
    }
    assert!(
        failures.is_empty(),
        "acceptance criteria failed: {}",
        failures.join(", ")
    );
}
