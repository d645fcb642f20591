//! Discrete probability measures with logarithmic potential, energy,
//! capacity, transfinite-diameter and Fekete oracles, closed-form reference
//! measures, and moment-based weak* probes.

use num_complex::Complex64;

use crate::dynamics::ReferenceDomain;
use crate::error::{Error, Result};
use crate::jsonfmt;
use crate::parallel::map_indexed;
use crate::sum::{sum_indexed, sum_indexed_complex, Neumaier};

/// Finite weighted point set approximating a probability measure: atoms
/// (point, weight) with nonnegative weights summing to 1 within 1e-12.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure {
    atoms: Vec<(Complex64, f64)>,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<(Complex64, f64)>) -> Result<DiscreteMeasure> {
        if atoms.is_empty() {
            return Err(Error::InvalidInput("measure needs at least one atom".into()));
        }
        for (z, w) in &atoms {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite { what: "measure atom" });
            }
            if !w.is_finite() || *w < 0.0 {
                return Err(Error::InvalidInput(format!("weight {w} must be a finite nonnegative real")));
            }
        }
        let mut acc = Neumaier::new();
        for (_, w) in &atoms {
            acc.add(*w);
        }
        let total = acc.total();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "weights sum to {total}, not 1 (tolerance 1e-12)"
            )));
        }
        Ok(DiscreteMeasure { atoms })
    }

    /// Equal weights 1/n on the given points.
    pub fn uniform(points: &[Complex64]) -> Result<DiscreteMeasure> {
        if points.is_empty() {
            return Err(Error::InvalidInput("measure needs at least one atom".into()));
        }
        let w = 1.0 / points.len() as f64;
        DiscreteMeasure::new(points.iter().map(|&z| (z, w)).collect())
    }

    pub fn atoms(&self) -> &[(Complex64, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Largest atom modulus.
    pub fn support_radius(&self) -> f64 {
        self.atoms.iter().map(|(z, _)| z.norm()).fold(0.0, f64::max)
    }

    /// The pushforward under z -> s z (weights unchanged).
    pub fn scaled(&self, s: f64) -> Result<DiscreteMeasure> {
        if !s.is_finite() {
            return Err(Error::NonFinite { what: "scale factor" });
        }
        DiscreteMeasure::new(self.atoms.iter().map(|&(z, w)| (z * s, w)).collect())
    }

    /// Logarithmic potential p_mu(z) = sum w_j log |z - zeta_j|; minus
    /// infinity when z sits on an atom of positive weight.
    pub fn potential_at(&self, z: Complex64) -> f64 {
        sum_indexed(self.atoms.len(), |i| {
            let (zeta, w) = self.atoms[i];
            if w == 0.0 {
                0.0
            } else {
                w * (z - zeta).norm().ln()
            }
        })
    }

    /// 2 d/dz of the potential: sum w_j / (z - zeta_j). Errors when z
    /// coincides with an atom.
    pub fn potential_cderiv(&self, z: Complex64) -> Result<Complex64> {
        if self.atoms.iter().any(|&(zeta, w)| w > 0.0 && zeta == z) {
            return Err(Error::InvalidInput(format!(
                "potential derivative undefined on an atom ({z})"
            )));
        }
        Ok(sum_indexed_complex(self.atoms.len(), |i| {
            let (zeta, w) = self.atoms[i];
            if w == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                w * (z - zeta).inv()
            }
        }))
    }

    /// Off-diagonal discrete energy sum_{i != j} w_i w_j log |z_i - z_j|.
    /// Coincident distinct atoms make it minus infinity.
    pub fn energy(&self) -> Result<f64> {
        let n = self.atoms.len();
        if n < 2 {
            return Err(Error::InvalidInput("energy needs at least 2 atoms".into()));
        }
        // Row i sums the pairs (i, j < i); rows are independent and combined
        // in index order, then doubled.
        let half = sum_indexed(n, |i| {
            let (zi, wi) = self.atoms[i];
            if wi == 0.0 {
                return 0.0;
            }
            let mut row = Neumaier::new();
            for &(zj, wj) in &self.atoms[..i] {
                if wj > 0.0 {
                    row.add(wj * (zi - zj).norm().ln());
                }
            }
            wi * row.total()
        });
        Ok(2.0 * half)
    }

    /// Weighted power sums integral z^a conj(z)^b d mu for all a + b <= M,
    /// ordered by total order then by a.
    pub fn moments(&self, max_order: u32) -> Result<MomentVector> {
        if max_order < 1 {
            return Err(Error::InvalidInput("moment order must be at least 1".into()));
        }
        let m = max_order as usize;
        let n_entries = (m + 1) * (m + 2) / 2;
        let n = self.atoms.len();
        const CHUNK: usize = 512;
        let chunks = n.div_ceil(CHUNK);
        let partials = map_indexed(chunks, |c| {
            let mut acc = vec![Complex64::new(0.0, 0.0); n_entries];
            let mut zp = vec![Complex64::new(0.0, 0.0); m + 1];
            let mut cp = vec![Complex64::new(0.0, 0.0); m + 1];
            for &(z, w) in &self.atoms[c * CHUNK..((c + 1) * CHUNK).min(n)] {
                zp[0] = Complex64::new(1.0, 0.0);
                cp[0] = Complex64::new(1.0, 0.0);
                for j in 1..=m {
                    zp[j] = zp[j - 1] * z;
                    cp[j] = cp[j - 1] * z.conj();
                }
                let mut e = 0;
                for total in 0..=m {
                    for a in 0..=total {
                        // Product before weight: z^a conj(z)^b and its (b, a)
                        // mirror are then exact floating-point conjugates.
                        acc[e] += zp[a] * cp[total - a] * w;
                        e += 1;
                    }
                }
            }
            acc
        });
        let mut entries = Vec::with_capacity(n_entries);
        let mut e = 0;
        for total in 0..=max_order {
            for a in 0..=total {
                let mut re = Neumaier::new();
                let mut im = Neumaier::new();
                for p in &partials {
                    re.add(p[e].re);
                    im.add(p[e].im);
                }
                entries.push(MomentEntry {
                    a,
                    b: total - a,
                    value: Complex64::new(re.total(), im.total()),
                });
                e += 1;
            }
        }
        Ok(MomentVector { max_order, entries })
    }
}

/// All moments integral z^a conj(z)^b d mu with a + b <= M.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentVector {
    max_order: u32,
    entries: Vec<MomentEntry>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentEntry {
    pub a: u32,
    pub b: u32,
    pub value: Complex64,
}

impl MomentVector {
    pub fn max_order(&self) -> u32 {
        self.max_order
    }

    pub fn entries(&self) -> &[MomentEntry] {
        &self.entries
    }

    pub fn get(&self, a: u32, b: u32) -> Option<Complex64> {
        let total = a + b;
        if total > self.max_order {
            return None;
        }
        let idx = (total * (total + 1) / 2 + a) as usize;
        Some(self.entries[idx].value)
    }

    /// Max absolute difference over shared entries; both vectors must carry
    /// the same order.
    pub fn distance(&self, other: &MomentVector) -> Result<f64> {
        if self.max_order != other.max_order {
            return Err(Error::InvalidInput(format!(
                "moment orders differ: {} vs {}",
                self.max_order, other.max_order
            )));
        }
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a.value - b.value).norm())
            .fold(0.0, f64::max))
    }

    /// JSON form `{"M": int, "moments": [{"a":..,"b":..,"re":..,"im":..}]}`
    /// with floats at 17 significant digits.
    pub fn to_json(&self) -> String {
        let mut out = String::with_capacity(64 * self.entries.len());
        out.push_str(&format!("{{\"M\": {}, \"moments\": [", self.max_order));
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            out.push_str(&format!(
                "{{\"a\": {}, \"b\": {}, \"re\": {}, \"im\": {}}}",
                e.a,
                e.b,
                jsonfmt::number(e.value.re),
                jsonfmt::number(e.value.im)
            ));
        }
        out.push_str("]}");
        out
    }
}

/// exp of a finite logarithmic energy.
pub fn capacity_from_energy(energy: f64) -> Result<f64> {
    if !energy.is_finite() {
        return Err(Error::InvalidInput(format!("energy must be finite, got {energy}")));
    }
    Ok(energy.exp())
}

/// Geometric-mean pairwise distance (prod_{i<j} |z_i - z_j|)^{2/(n(n-1))},
/// computed in log space; duplicate points give 0.
pub fn transfinite_diameter(points: &[Complex64]) -> Result<f64> {
    let n = points.len();
    if n < 2 {
        return Err(Error::InvalidInput("transfinite diameter needs at least 2 points".into()));
    }
    if points.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite { what: "point" });
    }
    let log_sum = sum_indexed(n, |i| {
        let mut row = Neumaier::new();
        for zj in &points[..i] {
            row.add((points[i] - zj).norm().ln());
        }
        row.total()
    });
    Ok((2.0 * log_sum / (n as f64 * (n - 1) as f64)).exp())
}

/// Max moment-difference probe for weak* convergence; both measures must be
/// supported in the closed 4-disk (rescale first otherwise).
pub fn moment_distance(mu: &DiscreteMeasure, nu: &DiscreteMeasure, max_order: u32) -> Result<f64> {
    for (name, m) in [("first", mu), ("second", nu)] {
        let r = m.support_radius();
        if r > 4.0 + 1e-9 {
            return Err(Error::InvalidInput(format!(
                "{name} measure has support radius {r} > 4; rescale before comparing moments"
            )));
        }
    }
    mu.moments(max_order)?.distance(&nu.moments(max_order)?)
}

/// Closed-form equilibrium discretizations: n equispaced circle atoms for a
/// disk, Chebyshev nodes (arcsine quadrature) for an interval.
pub fn reference_equilibrium(domain: &ReferenceDomain, n: usize) -> Result<DiscreteMeasure> {
    if n == 0 {
        return Err(Error::InvalidInput("need at least one atom".into()));
    }
    match domain {
        ReferenceDomain::Disk { r } => {
            let pts: Vec<Complex64> = (0..n)
                .map(|j| {
                    let t = std::f64::consts::TAU * j as f64 / n as f64;
                    Complex64::new(r * t.cos(), r * t.sin())
                })
                .collect();
            DiscreteMeasure::uniform(&pts)
        }
        ReferenceDomain::Interval { a, b } => {
            let mid = 0.5 * (a + b);
            let half = 0.5 * (b - a);
            let pts: Vec<Complex64> = (0..n)
                .map(|j| {
                    let t = std::f64::consts::PI * (2.0 * j as f64 + 1.0) / (2.0 * n as f64);
                    Complex64::new(mid + half * t.cos(), 0.0)
                })
                .collect();
            DiscreteMeasure::uniform(&pts)
        }
        other => Err(Error::UnsupportedDomain(format!(
            "no closed-form equilibrium for {other:?}; sample it via brolin or pullback"
        ))),
    }
}

/// Greedy-then-exchange Fekete points over a discretized domain boundary:
/// an oracle for capacity lower bounds, not a certified optimum.
pub fn fekete_points(
    domain: &ReferenceDomain,
    n: usize,
    boundary_resolution: usize,
) -> Result<Vec<Complex64>> {
    if n < 2 {
        return Err(Error::InvalidInput("Fekete selection needs n >= 2".into()));
    }
    if boundary_resolution < n {
        return Err(Error::InvalidInput(format!(
            "boundary resolution {boundary_resolution} < n = {n}"
        )));
    }
    let candidates = domain.boundary_sample(boundary_resolution)?;
    Ok(fekete_select(&candidates, n))
}

/// Fekete selection over an explicit candidate cloud, for sets with no
/// closed-form boundary parametrization (e.g. root clusters of a sequence).
pub fn fekete_subset(candidates: &[Complex64], n: usize) -> Result<Vec<Complex64>> {
    if n < 2 {
        return Err(Error::InvalidInput("Fekete selection needs n >= 2".into()));
    }
    if candidates.len() < n {
        return Err(Error::InvalidInput(format!(
            "candidate cloud of {} points cannot supply {n} Fekete points",
            candidates.len()
        )));
    }
    if candidates.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite { what: "Fekete candidate".into() });
    }
    Ok(fekete_select(candidates, n))
}

/// Selection on an explicit candidate set (deterministic: first best index
/// wins ties; exchange passes stop at no improvement or after 32 rounds).
pub(crate) fn fekete_select(candidates: &[Complex64], n: usize) -> Vec<Complex64> {
    debug_assert!(n >= 2 && candidates.len() >= n);
    // Seed with the farthest pair.
    let (mut bi, mut bj, mut bd) = (0, 1, -1.0);
    for i in 0..candidates.len() {
        for j in i + 1..candidates.len() {
            let d = (candidates[i] - candidates[j]).norm();
            if d > bd {
                (bi, bj, bd) = (i, j, d);
            }
        }
    }
    let mut selected = vec![candidates[bi], candidates[bj]];

    let log_gain = |z: Complex64, sel: &[Complex64], skip: Option<usize>| -> f64 {
        let mut acc = Neumaier::new();
        for (t, s) in sel.iter().enumerate() {
            if Some(t) != skip {
                acc.add((z - s).norm().ln());
            }
        }
        acc.total()
    };

    while selected.len() < n {
        let scores = map_indexed(candidates.len(), |ci| log_gain(candidates[ci], &selected, None));
        let best = scores
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a.partial_cmp(b).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        selected.push(candidates[best]);
    }

    // Single-point exchange passes.
    for _ in 0..32 {
        let mut improved = false;
        for si in 0..selected.len() {
            let current = log_gain(selected[si], &selected, Some(si));
            let scores =
                map_indexed(candidates.len(), |ci| log_gain(candidates[ci], &selected, Some(si)));
            let (mut best_ci, mut best_score) = (None, current);
            for (ci, &sc) in scores.iter().enumerate() {
                if sc > best_score + 1e-12 {
                    best_ci = Some(ci);
                    best_score = sc;
                }
            }
            if let Some(ci) = best_ci {
                selected[si] = candidates[ci];
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }

    selected.sort_by(|a, b| crate::roots::canonical_cmp(*a, *b));
    selected
}

/// CSV serialization: header `re,im,weight`, one atom per row, '.' decimal
/// separator, shortest round-trip float formatting.
pub fn measure_to_csv(mu: &DiscreteMeasure) -> String {
    let mut out = String::from("re,im,weight\n");
    for (z, w) in mu.atoms() {
        out.push_str(&format!("{},{},{}\n", z.re, z.im, w));
    }
    out
}

pub fn measure_from_csv(text: &str) -> Result<DiscreteMeasure> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty measure CSV".into()))?;
    if header.trim_end_matches('\r') != "re,im,weight" {
        return Err(Error::Parse(format!(
            "measure CSV must start with 're,im,weight', got {header:?}"
        )));
    }
    let mut atoms = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Parse(format!(
                "measure CSV row {}: expected 3 fields, got {}",
                lineno + 2,
                fields.len()
            )));
        }
        let num = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("measure CSV row {}: bad number {s:?}", lineno + 2)))
        };
        atoms.push((Complex64::new(num(fields[0])?, num(fields[1])?), num(fields[2])?));
    }
    DiscreteMeasure::new(atoms)
}

pub fn write_measure_csv(mu: &DiscreteMeasure, path: &std::path::Path) -> Result<()> {
    std::fs::write(path, measure_to_csv(mu))?;
    Ok(())
}

pub fn read_measure_csv(path: &std::path::Path) -> Result<DiscreteMeasure> {
    measure_from_csv(&std::fs::read_to_string(path)?)
}
