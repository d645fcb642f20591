//! Subcommand execution: build core inputs from parsed flags, run, emit.
//!
//! Data goes to `--out` or standard output; diagnostics go to standard
//! error through the logger. Computation failures map to domain errors
//! (exit 1); everything caught at flag level is a usage error (exit 2).

use std::io::Write;
use std::path::PathBuf;

use eqmeas_core::dynamics::{brolin_sample, cap_filled_julia_spec, green_field_spec, ReferenceDomain};
use eqmeas_core::jsonfmt;
use eqmeas_core::measure::measure_to_csv;
use eqmeas_core::poly::{parse_complex, Family};
use eqmeas_core::regularity::{
    converge_experiment, kreg_error, pullback_equilibrium_spec, SampleSource, DEFAULT_N_PROBE,
};
use eqmeas_core::render::{colorize, image_bytes};
use eqmeas_core::roots::{find_roots_with, RootSet, SolveOptions};

use crate::args::{
    domain, parse_bbox, parse_pair, parse_px, usage, BrolinArgs, CapacityArgs, CliError, Command,
    ConvergeArgs, DomainKind, FamilyKind, GenArgs, GreenArgs, PullbackArgs, RegularityArgs,
    RenderArgs, RootsArgs, SourceKind,
};

#[cfg(feature = "parallel")]
pub fn configure_threads(threads: Option<usize>) -> Result<(), CliError> {
    let Some(n) = threads else { return Ok(()) };
    if n == 0 {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}

#[cfg(not(feature = "parallel"))]
pub fn configure_threads(threads: Option<usize>) -> Result<(), CliError> {
    match threads {
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => {
            if n > 1 {
                log::warn!("built without the parallel feature; running single-threaded");
            }
            Ok(())
        }
        None => Ok(()),
    }
}

pub fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Gen(a) => gen(a),
        Command::Roots(a) => roots(a),
        Command::Pullback(a) => pullback(a),
        Command::Brolin(a) => brolin(a),
        Command::Capacity(a) => capacity(a),
        Command::Green(a) => green(a),
        Command::Regularity(a) => regularity(a),
        Command::Converge(a) => converge(a),
        Command::Render(a) => render(a),
    }
}

fn gen(a: GenArgs) -> Result<(), CliError> {
    let spec = a.fam.spec(a.k)?;
    let member = spec.generate().map_err(domain)?;
    emit_text(&a.out, &format!("{member}\n"))
}

fn roots(a: RootsArgs) -> Result<(), CliError> {
    let p = crate::args::parse_poly(&a.poly)?;
    if p.degree() == 0 {
        return Err(CliError::Usage("--poly: a constant has no roots".into()));
    }
    let mut opts = SolveOptions::default();
    if let Some(eps) = a.cluster_eps {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(CliError::Usage(format!(
                "--cluster-eps must be positive and finite, got {eps}"
            )));
        }
        opts.cluster_eps = Some(eps);
    }
    let target = match &a.level {
        Some(w) => p.shifted(parse_complex(w).map_err(usage)?).map_err(domain)?,
        None => p,
    };
    let rs = find_roots_with(&target, &opts).map_err(domain)?;
    if !rs.all_converged() {
        log::warn!(
            "{} of {} roots did not meet the residual tolerance; see the residual column",
            rs.entries().iter().filter(|e| !e.converged).count(),
            rs.entries().len()
        );
    }
    emit_text(&a.out, &roots_to_csv(&rs))
}

fn roots_to_csv(rs: &RootSet) -> String {
    let mut out = String::from("re,im,multiplicity,residual\n");
    for e in rs.entries() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            e.location.re, e.location.im, e.multiplicity, e.residual
        ));
    }
    out
}

fn pullback(a: PullbackArgs) -> Result<(), CliError> {
    let spec = a.fam.spec(a.k)?;
    let mu = pullback_equilibrium_spec(&spec, a.r, a.angles).map_err(domain)?;
    log::info!("pullback: {} atoms from degree {}", mu.len(), spec.degree());
    emit_text(&a.out, &measure_to_csv(&mu))
}

fn brolin(a: BrolinArgs) -> Result<(), CliError> {
    let spec = a.fam.spec(a.k)?;
    let member = spec.generate().map_err(domain)?;
    let mu = brolin_sample(&member, a.samples, a.burn, a.seed.unwrap_or(0)).map_err(domain)?;
    log::info!("brolin: {} samples from degree {}", mu.len(), member.degree());
    emit_text(&a.out, &measure_to_csv(&mu))
}

fn capacity(a: CapacityArgs) -> Result<(), CliError> {
    let spec = a.fam.spec(a.k)?;
    let cap = cap_filled_julia_spec(&spec).map_err(domain)?;
    let limit_check = spec.log_gamma_abs() / spec.n_k() as f64;
    let json = format!(
        "{{\"gamma_abs\": {}, \"degree\": {}, \"cap_filled_julia\": {}, \"cap_limit_check\": {}}}",
        jsonfmt::number(spec.gamma_abs()),
        spec.degree(),
        jsonfmt::number(cap),
        jsonfmt::number(limit_check)
    );
    emit_text(&a.out, &format!("{json}\n"))
}

fn green(a: GreenArgs) -> Result<(), CliError> {
    let spec = a.fam.spec(a.k)?;
    let bbox = resolve_bbox(a.bbox.as_deref(), spec.family())?;
    let (width, height) = parse_px(&a.px)?;
    let field = green_field_spec(&spec, bbox, width, height, a.iters).map_err(domain)?;
    emit_text(&a.out, &format!("{}\n", field.to_json()))
}

fn regularity(a: RegularityArgs) -> Result<(), CliError> {
    if a.kmax == 0 {
        return Err(CliError::Usage("--kmax must be at least 1".into()));
    }
    let reference = resolve_domain(&a)?;
    let mut parts = Vec::with_capacity(a.kmax as usize);
    for k in 1..=a.kmax {
        let spec = a.fam.spec(k)?;
        let report = kreg_error(&spec, &reference, a.r_probe, DEFAULT_N_PROBE).map_err(domain)?;
        parts.push(report.to_json());
    }
    emit_text(&a.out, &format!("[{}]\n", parts.join(", ")))
}

fn resolve_domain(a: &RegularityArgs) -> Result<ReferenceDomain, CliError> {
    let kind = a.domain.unwrap_or(match a.fam.family {
        Some(FamilyKind::Mandelbrot) => DomainKind::Mandelbrot,
        Some(FamilyKind::Chebyshev) => DomainKind::Interval,
        _ => DomainKind::Julia,
    });
    match kind {
        DomainKind::Disk => ReferenceDomain::disk(a.domain_radius).map_err(usage),
        DomainKind::Interval => {
            let text = a.domain_interval.as_deref().unwrap_or(&a.fam.interval);
            let (lo, hi) = parse_pair(text, "--domain-interval")?;
            ReferenceDomain::interval(lo, hi).map_err(usage)
        }
        DomainKind::Mandelbrot => Ok(ReferenceDomain::Mandelbrot),
        DomainKind::Julia => {
            let base = a
                .fam
                .base_poly()?
                .ok_or_else(|| CliError::Usage("--domain julia needs --poly".into()))?;
            ReferenceDomain::filled_julia(base).map_err(usage)
        }
    }
}

fn converge(a: ConvergeArgs) -> Result<(), CliError> {
    if a.kmin == 0 || a.kmin > a.kmax {
        return Err(CliError::Usage(format!(
            "need 1 <= kmin <= kmax, got kmin = {}, kmax = {}",
            a.kmin, a.kmax
        )));
    }
    let spec = a.fam.spec(a.kmin)?;
    let k_list: Vec<u32> = (a.kmin..=a.kmax).collect();
    let source = match a.source {
        SourceKind::Pullback => SampleSource::Pullback { r: a.r, n_angles: a.angles },
        SourceKind::Brolin => SampleSource::Brolin {
            samples: a.samples,
            burn_in: a.burn,
            seed: a.seed.unwrap_or(0),
        },
    };
    let report = converge_experiment(&spec, &k_list, source, a.orders).map_err(domain)?;
    emit_text(&a.out, &format!("{}\n", report.to_json()))
}

fn render(a: RenderArgs) -> Result<(), CliError> {
    let spec = a.fam.spec(a.k)?;
    let bbox = resolve_bbox(a.bbox.as_deref(), spec.family())?;
    let (width, height) = parse_px(&a.px)?;
    let field = green_field_spec(&spec, bbox, width, height, a.iters).map_err(domain)?;
    let image = colorize(&field).map_err(domain)?;
    emit_bytes(&a.out, &image_bytes(&image))
}

fn resolve_bbox(flag: Option<&str>, family: &Family) -> Result<[f64; 4], CliError> {
    match flag {
        Some(text) => parse_bbox(text),
        None => Ok(match family {
            Family::MandelbrotCenter => [-2.5, -1.5, 1.5, 1.5],
            _ => [-2.0, -1.5, 2.0, 1.5],
        }),
    }
}

fn emit_text(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    emit_bytes(out, text.as_bytes())
}

fn emit_bytes(out: &Option<PathBuf>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| domain(format!("writing {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| domain(format!("writing standard output: {e}"))),
    }
}
