//! Argument grammar, config-file/environment defaults, and error taxonomy.
//!
//! Precedence, highest first: command-line flags, `--config` file keys
//! (which mirror long flag names), then the environment variables
//! `EQMEAS_SEED` and `EQMEAS_THREADS`. Defaults are injected as synthetic
//! tokens before clap parses, so `--help` always shows the effective
//! grammar and unknown flags are still rejected with the offending token.

use std::collections::BTreeSet;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use eqmeas_core::poly::{Family, PolySequenceSpec, Polynomial};

/// Process outcome: usage errors exit 2, domain (computation) errors exit 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(String),
}

pub fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

pub fn domain<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Domain(e.to_string())
}

#[derive(Parser)]
#[command(
    name = "eqmeas",
    version,
    about = "Equilibrium measures, capacities, and Green's functions for polynomial sequences"
)]
pub struct Cli {
    /// JSON file whose keys mirror long flag names; explicit flags win.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Worker threads for data-parallel sections (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Print the coefficient literal of a sequence member q_k^(m).
    Gen(GenArgs),
    /// Roots of a polynomial, optionally of p(z) = w, as CSV.
    Roots(RootsArgs),
    /// Balanced pullback of the uniform measure on |w| = r, as measure CSV.
    Pullback(PullbackArgs),
    /// Backward-orbit samples of the filled-Julia equilibrium, as measure CSV.
    Brolin(BrolinArgs),
    /// Capacity identities of a sequence member, as JSON.
    Capacity(CapacityArgs),
    /// Green's-function samples of a member over a pixel grid, as JSON.
    Green(GreenArgs),
    /// Regularity diagnostics for k = 1..kmax, as a JSON array.
    Regularity(RegularityArgs),
    /// Moment-convergence experiment across member indices, as JSON.
    Converge(ConvergeArgs),
    /// Rasterize a member's filled Julia set to a binary portable pixmap.
    Render(RenderArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyKind {
    /// Iterates p, p∘p, ... of the base polynomial given by --poly.
    Iterate,
    /// q_1 = c, q_{k+1} = q_k^2 + c (centers recursion).
    Mandelbrot,
    /// Chebyshev polynomials rescaled to the --interval segment.
    Chebyshev,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DomainKind {
    Disk,
    Interval,
    Mandelbrot,
    Julia,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SourceKind {
    Pullback,
    Brolin,
}

/// Flags selecting a polynomial family and derivative order.
#[derive(clap::Args)]
pub struct FamilyArgs {
    /// Sequence family (defaults to `iterate` when --poly is given).
    #[arg(long, value_enum)]
    pub family: Option<FamilyKind>,

    /// Base polynomial literal: comma-separated complex coefficients in
    /// ascending degree order, e.g. "-1,0,1" for z^2 - 1.
    #[arg(long, value_name = "COEFFS", allow_hyphen_values = true)]
    pub poly: Option<String>,

    /// Endpoints "a,b" for the chebyshev family.
    #[arg(long, value_name = "A,B", default_value = "-1,1", allow_hyphen_values = true)]
    pub interval: String,

    /// Derivative order m (0 = the member itself).
    #[arg(long, default_value_t = 0, value_name = "M")]
    pub deriv: u32,
}

impl FamilyArgs {
    pub fn family(&self) -> Result<Family, CliError> {
        match (self.family, &self.poly) {
            (Some(FamilyKind::Mandelbrot), _) => Ok(Family::MandelbrotCenter),
            (Some(FamilyKind::Chebyshev), _) => {
                let (a, b) = parse_pair(&self.interval, "--interval")?;
                Ok(Family::ChebyshevInterval { a, b })
            }
            (Some(FamilyKind::Iterate) | None, Some(literal)) => {
                Ok(Family::Iterate(parse_poly(literal)?))
            }
            (Some(FamilyKind::Iterate), None) => {
                Err(CliError::Usage("the iterate family needs --poly".into()))
            }
            (None, None) => Err(CliError::Usage("one of --family or --poly is required".into())),
        }
    }

    pub fn spec(&self, k: u32) -> Result<PolySequenceSpec, CliError> {
        PolySequenceSpec::new(self.family()?, k, self.deriv).map_err(domain)
    }

    /// The base polynomial, if this invocation names one.
    pub fn base_poly(&self) -> Result<Option<Polynomial>, CliError> {
        self.poly.as_deref().map(parse_poly).transpose()
    }
}

#[derive(clap::Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub fam: FamilyArgs,
    /// Member index k (from 1).
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    /// Output path (defaults to standard output).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(clap::Args)]
pub struct RootsArgs {
    /// Polynomial literal to solve.
    #[arg(long, value_name = "COEFFS", allow_hyphen_values = true)]
    pub poly: String,
    /// Solve p(z) = w instead of p(z) = 0 (complex literal).
    #[arg(long, value_name = "W", allow_hyphen_values = true)]
    pub level: Option<String>,
    /// Clustering radius for multiplicity assignment.
    #[arg(long = "cluster-eps", value_name = "EPS")]
    pub cluster_eps: Option<f64>,
    /// Output path (defaults to standard output).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(clap::Args)]
pub struct PullbackArgs {
    #[command(flatten)]
    pub fam: FamilyArgs,
    /// Member index k (from 1).
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    /// Radius of the pulled-back circle |w| = r.
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// Number of equispaced target angles.
    #[arg(long, default_value_t = 64)]
    pub angles: usize,
    /// Output path (defaults to standard output).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(clap::Args)]
pub struct BrolinArgs {
    #[command(flatten)]
    pub fam: FamilyArgs,
    /// Member index k (from 1).
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    /// Number of retained samples.
    #[arg(long, default_value_t = 4096)]
    pub samples: usize,
    /// Burn-in pullback steps discarded before sampling.
    #[arg(long, default_value_t = 50)]
    pub burn: usize,
    /// RNG seed (default: EQMEAS_SEED, then 0).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output path (defaults to standard output).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(clap::Args)]
pub struct CapacityArgs {
    #[command(flatten)]
    pub fam: FamilyArgs,
    /// Member index k (from 1).
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    /// Output path (defaults to standard output).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(clap::Args)]
pub struct GreenArgs {
    #[command(flatten)]
    pub fam: FamilyArgs,
    /// Member index k (from 1).
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    /// View box "x0,y0,x1,y1" (default: family-dependent).
    #[arg(long, value_name = "X0,Y0,X1,Y1", allow_hyphen_values = true)]
    pub bbox: Option<String>,
    /// Grid size "W" or "W,H" (H defaults to 3W/4).
    #[arg(long, default_value = "800,600", value_name = "W[,H]")]
    pub px: String,
    /// Escape-iteration budget per pixel.
    #[arg(long, default_value_t = 256)]
    pub iters: u32,
    /// Output path (defaults to standard output).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(clap::Args)]
pub struct RegularityArgs {
    #[command(flatten)]
    pub fam: FamilyArgs,
    /// Largest member index; reports cover k = 1..kmax.
    #[arg(long, default_value_t = 6)]
    pub kmax: u32,
    /// Probe-circle radius R (must contain the reference domain).
    #[arg(long = "R", default_value_t = 2.0, value_name = "R")]
    pub r_probe: f64,
    /// Reference domain (default: inferred from the family).
    #[arg(long, value_enum)]
    pub domain: Option<DomainKind>,
    /// Radius for --domain disk.
    #[arg(long = "domain-radius", default_value_t = 1.0, value_name = "R")]
    pub domain_radius: f64,
    /// Endpoints "a,b" for --domain interval (default: the --interval value).
    #[arg(long = "domain-interval", value_name = "A,B", allow_hyphen_values = true)]
    pub domain_interval: Option<String>,
    /// Output path (defaults to standard output).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(clap::Args)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub fam: FamilyArgs,
    /// Smallest member index in the sweep.
    #[arg(long, default_value_t = 1)]
    pub kmin: u32,
    /// Largest member index in the sweep.
    #[arg(long, default_value_t = 10)]
    pub kmax: u32,
    /// Sampling source for each member's measure.
    #[arg(long, value_enum, default_value_t = SourceKind::Pullback)]
    pub source: SourceKind,
    /// Pullback circle radius.
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// Pullback target angles.
    #[arg(long, default_value_t = 64)]
    pub angles: usize,
    /// Brolin sample count.
    #[arg(long, default_value_t = 4096)]
    pub samples: usize,
    /// Brolin burn-in steps.
    #[arg(long, default_value_t = 50)]
    pub burn: usize,
    /// RNG seed for the brolin source (default: EQMEAS_SEED, then 0).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Highest moment order compared.
    #[arg(long, default_value_t = 8)]
    pub orders: u32,
    /// Output path (defaults to standard output).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(clap::Args)]
pub struct RenderArgs {
    #[command(flatten)]
    pub fam: FamilyArgs,
    /// Member index k (from 1).
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    /// View box "x0,y0,x1,y1" (default: family-dependent).
    #[arg(long, value_name = "X0,Y0,X1,Y1", allow_hyphen_values = true)]
    pub bbox: Option<String>,
    /// Image size "W" or "W,H" (H defaults to 3W/4).
    #[arg(long, default_value = "800,600", value_name = "W[,H]")]
    pub px: String,
    /// Escape-iteration budget per pixel.
    #[arg(long, default_value_t = 256)]
    pub iters: u32,
    /// Output path (defaults to standard output).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

// ---------------------------------------------------------------------------
// Literal parsing helpers
// ---------------------------------------------------------------------------

fn normalize_minus(s: &str) -> String {
    s.chars().map(|c| if c == '\u{2212}' { '-' } else { c }).collect()
}

pub fn parse_poly(literal: &str) -> Result<Polynomial, CliError> {
    literal.parse::<Polynomial>().map_err(usage)
}

pub fn parse_f64(token: &str, flag: &str) -> Result<f64, CliError> {
    let v: f64 = normalize_minus(token.trim())
        .parse()
        .map_err(|_| CliError::Usage(format!("{flag}: invalid number {token:?}")))?;
    if !v.is_finite() {
        return Err(CliError::Usage(format!("{flag}: non-finite number {token:?}")));
    }
    Ok(v)
}

pub fn parse_pair(text: &str, flag: &str) -> Result<(f64, f64), CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(CliError::Usage(format!("{flag}: expected \"a,b\", got {text:?}")));
    }
    Ok((parse_f64(parts[0], flag)?, parse_f64(parts[1], flag)?))
}

pub fn parse_bbox(text: &str) -> Result<[f64; 4], CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 4 {
        return Err(CliError::Usage(format!("--bbox: expected \"x0,y0,x1,y1\", got {text:?}")));
    }
    let mut bbox = [0.0; 4];
    for (slot, part) in bbox.iter_mut().zip(&parts) {
        *slot = parse_f64(part, "--bbox")?;
    }
    Ok(bbox)
}

/// "W" or "W,H"; a lone width implies the 4:3 height used by the defaults.
pub fn parse_px(text: &str) -> Result<(usize, usize), CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    let parse_dim = |token: &str| -> Result<usize, CliError> {
        let v: usize = token
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("--px: invalid pixel count {token:?}")))?;
        if v == 0 {
            return Err(CliError::Usage("--px: dimensions must be positive".into()));
        }
        Ok(v)
    };
    match parts.as_slice() {
        [w] => {
            let w = parse_dim(w)?;
            Ok((w, (w * 3 / 4).max(1)))
        }
        [w, h] => Ok((parse_dim(w)?, parse_dim(h)?)),
        _ => Err(CliError::Usage(format!("--px: expected \"W\" or \"W,H\", got {text:?}"))),
    }
}

// ---------------------------------------------------------------------------
// Config-file and environment defaults
// ---------------------------------------------------------------------------

/// Config keys that make sense per subcommand; other keys warn and are
/// skipped so one config file can serve several subcommands.
fn allowed_keys(sub: &str) -> &'static [&'static str] {
    match sub {
        "gen" => &["family", "poly", "interval", "k", "deriv", "out"],
        "roots" => &["poly", "level", "cluster-eps", "out"],
        "pullback" => &["family", "poly", "interval", "k", "deriv", "r", "angles", "out"],
        "brolin" => {
            &["family", "poly", "interval", "k", "deriv", "samples", "burn", "seed", "out"]
        }
        "capacity" => &["family", "poly", "interval", "k", "deriv", "out"],
        "green" => &["family", "poly", "interval", "k", "deriv", "bbox", "px", "iters", "out"],
        "regularity" => &[
            "family",
            "poly",
            "interval",
            "kmax",
            "deriv",
            "R",
            "domain",
            "domain-radius",
            "domain-interval",
            "out",
        ],
        "converge" => &[
            "family", "poly", "interval", "kmin", "kmax", "deriv", "source", "r", "angles",
            "samples", "burn", "seed", "orders", "out",
        ],
        "render" => &["family", "poly", "interval", "k", "deriv", "bbox", "px", "iters", "out"],
        _ => &[],
    }
}

/// First token that is not a flag or a flag value: the subcommand name.
fn subcommand_of(tokens: &[String]) -> Option<String> {
    let mut i = 1;
    while i < tokens.len() {
        let t = &tokens[i];
        if let Some(stripped) = t.strip_prefix("--") {
            // `--flag=value` is one token; `--flag value` is two. Help and
            // version take no value.
            if stripped.contains('=') || matches!(stripped, "help" | "version") {
                i += 1;
            } else {
                i += 2;
            }
        } else if t.starts_with('-') && t.len() > 1 {
            i += 1;
        } else {
            return Some(t.clone());
        }
    }
    None
}

fn config_path(tokens: &[String]) -> Option<String> {
    for (i, t) in tokens.iter().enumerate() {
        if t == "--config" {
            return tokens.get(i + 1).cloned();
        }
        if let Some(rest) = t.strip_prefix("--config=") {
            return Some(rest.to_string());
        }
    }
    None
}

fn provided_flags(tokens: &[String]) -> BTreeSet<String> {
    tokens
        .iter()
        .filter_map(|t| t.strip_prefix("--"))
        .map(|s| s.split('=').next().unwrap_or(s).to_string())
        .collect()
}

/// Append synthetic `--key value` tokens for config-file keys and the
/// `EQMEAS_SEED` / `EQMEAS_THREADS` environment variables, lowest precedence
/// last, skipping anything the command line already provides.
pub fn with_injected_defaults(mut tokens: Vec<String>) -> Result<Vec<String>, CliError> {
    let sub = subcommand_of(&tokens);
    let allowed = sub.as_deref().map(allowed_keys).unwrap_or(&[]);
    let mut have = provided_flags(&tokens);

    if let Some(path) = config_path(&tokens) {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Usage(format!("config {path}: {e}")))?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("config {path}: {e}")))?;
        let object = value
            .as_object()
            .ok_or_else(|| CliError::Usage(format!("config {path}: top level must be a JSON object")))?;
        for (key, val) in object {
            if have.contains(key.as_str()) {
                continue;
            }
            if key != "threads" && !allowed.contains(&key.as_str()) {
                log::warn!("config key {key:?} does not apply to this subcommand; ignored");
                continue;
            }
            let rendered = match val {
                serde_json::Value::Number(n) => n.to_string(),
                serde_json::Value::String(s) => s.clone(),
                other => {
                    return Err(CliError::Usage(format!(
                        "config {path}: key {key:?} must be a number or string, got {other}"
                    )));
                }
            };
            tokens.push(format!("--{key}"));
            tokens.push(rendered);
            have.insert(key.clone());
        }
    }

    for (var, key) in [("EQMEAS_SEED", "seed"), ("EQMEAS_THREADS", "threads")] {
        if let Ok(value) = std::env::var(var) {
            if value.is_empty() || have.contains(key) {
                continue;
            }
            if key != "threads" && !allowed.contains(&key) {
                continue;
            }
            tokens.push(format!("--{key}"));
            tokens.push(value);
            have.insert(key.to_string());
        }
    }
    Ok(tokens)
}
