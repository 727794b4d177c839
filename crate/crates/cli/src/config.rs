//! Command-line and config-file parsing into a validated [`RunConfig`].
//!
//! Every value is looked up flag first, then config file, then built-in
//! default. Each resolved value is echoed into the output metadata, and the
//! keys that fell back to a default are listed under `defaulted`.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use soundcone::bounds::{BoundKind, GongParams, HKParams};
use soundcone::channel::ChannelSpec;
use soundcone::hopping::HoppingModel;
use soundcone::lattice::{
    hopping_interactions, normalization_factor, power_law_interactions, reproducibility_constant,
    Boundary, DecayParams, LatticeSpec,
};
use soundcone::numerics::RealSymmetricMatrix;

use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "soundcone",
    version,
    about = "Propagation bounds and long-range lattice dynamics on spacetime grids"
)]
pub struct Cli {
    /// TOML file with parameter defaults; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Commutator bounds on a (distance, time) grid.
    Bound {
        kind: BoundSel,
        #[command(flatten)]
        params: Params,
    },
    /// Free-fermion hopping chain quenched from the staggered state.
    Hopping {
        quantity: HoppingSel,
        #[command(flatten)]
        params: Params,
    },
    /// Single-particle dispersion of the hopping chain.
    Dispersion {
        form: DispersionSel,
        #[command(flatten)]
        params: Params,
    },
    /// Density of group velocities.
    Dos {
        #[command(flatten)]
        params: Params,
    },
    /// Binary Ising signalling channel.
    Channel {
        kind: ChannelSel,
        #[command(flatten)]
        params: Params,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundSel {
    Hk,
    Rescaled,
    Matexp,
    Gong,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HoppingSel {
    Occupation,
    Correlations,
    MutualInfo,
    Velocity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DispersionSel {
    Finite,
    Infinite,
    Delta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChannelSel {
    Curve,
    Exponent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConventionArg {
    /// `½ d^-α` on a periodic chain, the hopping amplitudes.
    HalfBare,
    /// `strength · (1+d)^-α`.
    Regularized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryArg {
    Periodic,
    Open,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingsArg {
    PowerLaw,
    /// Symmetric couplings drawn uniformly from [0, 1) with `--seed`.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn as_str(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Every tunable parameter. The same struct is read from flags and from
/// the config file, where keys are spelled as the long flag names.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Params {
    /// Number of lattice sites.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Number of time steps; the grid has t_steps + 1 points from 0 to t_max.
    #[arg(long)]
    pub t_steps: Option<usize>,
    #[arg(long)]
    pub delta_min: Option<usize>,
    #[arg(long)]
    pub delta_max: Option<usize>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub v: Option<f64>,
    #[arg(long)]
    pub size_a: Option<usize>,
    #[arg(long)]
    pub size_b: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub dimension: Option<usize>,
    #[arg(long)]
    pub strength: Option<f64>,
    #[arg(long, value_enum)]
    pub convention: Option<ConventionArg>,
    #[arg(long, value_enum)]
    pub boundary: Option<BoundaryArg>,
    /// Cone threshold as a fraction of the grid maximum.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Source site of the matrix-exponential bound.
    #[arg(long)]
    pub site: Option<usize>,
    #[arg(long)]
    pub n_k: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub v_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub v_max: Option<f64>,
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub n_list: Option<Vec<usize>>,
    #[arg(long, value_enum)]
    pub couplings: Option<CouplingsArg>,
    /// Add an exact-diagonalisation column to channel curves.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub oracle: Option<bool>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

macro_rules! merge_fields {
    ($a:expr, $b:expr; $($f:ident),*) => {
        Params { $($f: $a.$f.or($b.$f)),* }
    };
}

macro_rules! set_keys {
    ($p:expr; $($f:ident),*) => {{
        let mut keys = Vec::new();
        $(if $p.$f.is_some() { keys.push(flag_name(stringify!($f))); })*
        keys
    }};
}

macro_rules! with_fields {
    ($m:ident!($($args:tt)*)) => {
        $m!($($args)*; n, alpha, t_max, t_steps, delta_min, delta_max, c, v, size_a, size_b,
            lambda, p, dimension, strength, convention, boundary, threshold, site, n_k, v_min,
            v_max, bins, epsilon, n_list, couplings, oracle, format, output, seed)
    };
}

fn flag_name(field: &str) -> String {
    field.replace('_', "-")
}

impl Params {
    /// Field-wise `self` if set, else `fallback`.
    pub fn or(self, fallback: Params) -> Params {
        with_fields!(merge_fields!(self, fallback))
    }

    fn set_keys(&self) -> Vec<String> {
        with_fields!(set_keys!(self))
    }
}

pub fn load_config_file(path: &Path) -> Result<Params, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config file {}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| CliError::Usage(format!("config file {}: {}", path.display(), e.message())))
}

/// A fully validated run: the job plus output settings and the echoed
/// parameter metadata.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: String,
    pub job: Job,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub seed: u64,
    pub meta: BTreeMap<String, String>,
}

#[derive(Debug, Clone)]
pub enum Job {
    Bound {
        kind: BoundKind,
        deltas: Vec<usize>,
        times: Vec<f64>,
    },
    Hopping {
        model: HoppingModel,
        quantity: HoppingSel,
        rows: Vec<usize>,
        times: Vec<f64>,
        /// Relative cone threshold, velocity only.
        threshold: f64,
    },
    Dispersion {
        form: DispersionSel,
        alpha: f64,
        n: usize,
    },
    Dos {
        alpha: f64,
        n_k: usize,
        edges: Vec<f64>,
    },
    ChannelCurve {
        spec: ChannelSpec,
        times: Vec<f64>,
        oracle: bool,
    },
    ChannelExponent {
        alpha: f64,
        epsilon: f64,
        n_list: Vec<usize>,
    },
}

/// Parses `argv` (program name first) and an optional config file.
pub fn parse_config<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(CliError::Clap)?;
    let file = match &cli.config {
        Some(path) => load_config_file(path)?,
        None => Params::default(),
    };
    resolve(cli.command, file)
}

/// Applies precedence and defaults to already parsed flags.
pub fn resolve(command: CommandArgs, file: Params) -> Result<RunConfig, CliError> {
    let (name, flags) = match &command {
        CommandArgs::Bound { kind, params } => (format!("bound {}", sel_name(*kind)), params),
        CommandArgs::Hopping { quantity, params } => {
            (format!("hopping {}", sel_name(*quantity)), params)
        }
        CommandArgs::Dispersion { form, params } => {
            (format!("dispersion {}", sel_name(*form)), params)
        }
        CommandArgs::Dos { params } => ("dos".to_string(), params),
        CommandArgs::Channel { kind, params } => (format!("channel {}", sel_name(*kind)), params),
    };
    let mut r = Resolver::new(flags.clone().or(file));
    let format = r.or("format", |p| p.format, Format::Csv, Format::as_str)?;
    let output = r.params.output.clone();
    r.used.push("output".into());
    let job = match command {
        CommandArgs::Bound { kind, .. } => bound_job(&mut r, kind)?,
        CommandArgs::Hopping { quantity, .. } => hopping_job(&mut r, quantity)?,
        CommandArgs::Dispersion { form, .. } => dispersion_job(&mut r, form)?,
        CommandArgs::Dos { .. } => dos_job(&mut r)?,
        CommandArgs::Channel { kind, .. } => channel_job(&mut r, kind)?,
    };
    let unused: Vec<String> = r
        .params
        .set_keys()
        .into_iter()
        .filter(|k| !r.used.contains(k))
        .collect();
    if let Some(k) = unused.first() {
        return Err(CliError::Usage(format!(
            "--{k} is not a parameter of `{name}`"
        )));
    }
    let mut meta = r.meta;
    if !r.defaulted.is_empty() {
        meta.insert("defaulted".into(), r.defaulted.join(","));
    }
    meta.insert("command".into(), name.clone());
    Ok(RunConfig {
        command: name,
        job,
        format,
        output,
        seed: r.seed,
        meta,
    })
}

fn sel_name<T: ValueEnum>(v: T) -> String {
    v.to_possible_value()
        .map(|p| p.get_name().to_string())
        .unwrap_or_default()
}

struct Resolver {
    params: Params,
    used: Vec<String>,
    defaulted: Vec<String>,
    meta: BTreeMap<String, String>,
    seed: u64,
}

fn usage(key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("--{key}: {msg}"))
}

impl Resolver {
    fn new(params: Params) -> Self {
        Resolver {
            params,
            used: Vec::new(),
            defaulted: Vec::new(),
            meta: BTreeMap::new(),
            seed: 0,
        }
    }

    fn mark(&mut self, key: &str) {
        self.used.push(key.to_string());
    }

    fn record(&mut self, key: &str, shown: String) {
        self.meta.insert(key.replace('-', "_"), shown);
    }

    fn req<T: Clone>(
        &mut self,
        key: &str,
        get: impl Fn(&Params) -> Option<T>,
        show: impl Fn(&T) -> String,
    ) -> Result<T, CliError> {
        self.mark(key);
        match get(&self.params) {
            Some(v) => {
                self.record(key, show(&v));
                Ok(v)
            }
            None => Err(usage(key, "required but not given")),
        }
    }

    fn or<T: Clone, S: ToString>(
        &mut self,
        key: &str,
        get: impl Fn(&Params) -> Option<T>,
        default: T,
        show: impl Fn(T) -> S,
    ) -> Result<T, CliError> {
        self.mark(key);
        let v = match get(&self.params) {
            Some(v) => v,
            None => {
                self.defaulted.push(key.to_string());
                default
            }
        };
        self.record(key, show(v.clone()).to_string());
        Ok(v)
    }

    fn opt<T: Clone>(&mut self, key: &str, get: impl Fn(&Params) -> Option<T>) -> Option<T> {
        self.mark(key);
        get(&self.params)
    }

    fn req_f64(
        &mut self,
        key: &str,
        get: impl Fn(&Params) -> Option<f64>,
    ) -> Result<f64, CliError> {
        let v = self.req(key, get, |x| x.to_string())?;
        finite(key, v)
    }

    fn f64_or(
        &mut self,
        key: &str,
        get: impl Fn(&Params) -> Option<f64>,
        default: f64,
    ) -> Result<f64, CliError> {
        let v = self.or(key, get, default, |x| x)?;
        finite(key, v)
    }

    fn usize_or(
        &mut self,
        key: &str,
        get: impl Fn(&Params) -> Option<usize>,
        default: usize,
    ) -> Result<usize, CliError> {
        self.or(key, get, default, |x| x)
    }

    fn req_usize(
        &mut self,
        key: &str,
        get: impl Fn(&Params) -> Option<usize>,
    ) -> Result<usize, CliError> {
        self.req(key, get, |x| x.to_string())
    }

    fn times(&mut self, t_max_default: f64, steps_default: usize) -> Result<Vec<f64>, CliError> {
        let t_max = self.f64_or("t-max", |p| p.t_max, t_max_default)?;
        let steps = self.usize_or("t-steps", |p| p.t_steps, steps_default)?;
        if t_max <= 0.0 {
            return Err(usage("t-max", format!("must be positive, got {t_max}")));
        }
        if steps == 0 {
            return Err(usage("t-steps", "must be at least 1"));
        }
        Ok((0..=steps)
            .map(|i| t_max * i as f64 / steps as f64)
            .collect())
    }

    fn deltas(
        &mut self,
        min_default: usize,
        max_default: usize,
        upper: Option<usize>,
    ) -> Result<Vec<usize>, CliError> {
        let lo = self.usize_or("delta-min", |p| p.delta_min, min_default)?;
        let hi = self.usize_or("delta-max", |p| p.delta_max, max_default)?;
        if lo > hi {
            return Err(usage("delta-min", format!("{lo} exceeds --delta-max {hi}")));
        }
        if let Some(u) = upper {
            if hi > u {
                return Err(usage(
                    "delta-max",
                    format!("{hi} exceeds the largest admissible value {u}"),
                ));
            }
        }
        Ok((lo..=hi).collect())
    }

    fn boundary(&mut self) -> Result<Boundary, CliError> {
        let b = self.or(
            "boundary",
            |p| p.boundary,
            BoundaryArg::Periodic,
            |b| boundary_of(b).as_str(),
        )?;
        Ok(boundary_of(b))
    }
}

fn boundary_of(b: BoundaryArg) -> Boundary {
    match b {
        BoundaryArg::Periodic => Boundary::Periodic,
        BoundaryArg::Open => Boundary::Open,
    }
}

fn finite(key: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(usage(key, format!("must be finite, got {v}")))
    }
}

/// Wraps a core constructor error as a usage error on `key`.
fn param<T>(key: &str, r: soundcone::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| match e {
        soundcone::Error::ResourceGuard(_) => CliError::Compute(e),
        other => usage(key, other),
    })
}

fn diameter(n: usize, b: Boundary) -> usize {
    match b {
        Boundary::Periodic => n / 2,
        Boundary::Open => n.saturating_sub(1),
    }
}

const FREE_DELTA_MAX: usize = 50;

fn bound_job(r: &mut Resolver, kind: BoundSel) -> Result<Job, CliError> {
    let (kind, deltas) = match kind {
        BoundSel::Hk => {
            let c = r.req_f64("c", |p| p.c)?;
            let v = r.req_f64("v", |p| p.v)?;
            let alpha = r.req_f64("alpha", |p| p.alpha)?;
            let a = r.usize_or("size-a", |p| p.size_a, 1)?;
            let b = r.usize_or("size-b", |p| p.size_b, 1)?;
            let dim = r.usize_or("dimension", |p| p.dimension, 1)?;
            let hk = param("alpha", HKParams::new(c, v, alpha, a, b, dim))?;
            (
                BoundKind::HastingsKoma(hk),
                r.deltas(1, FREE_DELTA_MAX, None)?,
            )
        }
        BoundSel::Rescaled => {
            let n = r.req_usize("n", |p| p.n)?;
            let alpha = r.req_f64("alpha", |p| p.alpha)?;
            let boundary = r.boundary()?;
            let lattice = param("n", LatticeSpec::chain(n, boundary))?;
            let lambda = r.f64_or("lambda", |p| p.lambda, 1.0)?;
            let p = match r.opt("p", |p| p.p) {
                Some(p) => p,
                None => {
                    r.defaulted.push("p".into());
                    param("alpha", reproducibility_constant(&lattice, alpha))?
                }
            };
            r.record("p", p.to_string());
            let decay = param("p", DecayParams::new(alpha, lambda, p))?;
            let n_factor = param("alpha", normalization_factor(&lattice, alpha))?;
            r.record("n_factor", n_factor.to_string());
            let size_a = r.usize_or("size-a", |p| p.size_a, 1)?;
            let size_b = r.usize_or("size-b", |p| p.size_b, 1)?;
            let kind = BoundKind::Rescaled {
                decay,
                size_a,
                size_b,
                n_factor,
            };
            (
                kind,
                r.deltas(1, diameter(n, boundary), Some(diameter(n, boundary)))?,
            )
        }
        BoundSel::Matexp => {
            let n = r.req_usize("n", |p| p.n)?;
            let alpha = r.req_f64("alpha", |p| p.alpha)?;
            let convention = r.or(
                "convention",
                |p| p.convention,
                ConventionArg::HalfBare,
                |c| sel_name(c),
            )?;
            let interactions = match convention {
                ConventionArg::HalfBare => {
                    if r.opt("strength", |p| p.strength).is_some() {
                        return Err(usage("strength", "not used with --convention half-bare"));
                    }
                    if r.opt("boundary", |p| p.boundary) == Some(BoundaryArg::Open) {
                        return Err(usage(
                            "boundary",
                            "half-bare couplings are defined on a periodic chain",
                        ));
                    }
                    r.record("boundary", "periodic".into());
                    param("alpha", hopping_interactions(n, alpha))?
                }
                ConventionArg::Regularized => {
                    let strength = r.f64_or("strength", |p| p.strength, 1.0)?;
                    let boundary = r.boundary()?;
                    let lattice = param("n", LatticeSpec::chain(n, boundary))?;
                    param("alpha", power_law_interactions(&lattice, alpha, strength))?
                }
            };
            let source = r.usize_or("site", |p| p.site, 0)?;
            if source >= n {
                return Err(usage("site", format!("{source} outside 0..{n}")));
            }
            let diam = diameter(n, interactions.lattice().boundary());
            let deltas = r.deltas(1, diam, Some(n - 1))?;
            (
                BoundKind::Matexp {
                    interactions,
                    source,
                },
                deltas,
            )
        }
        BoundSel::Gong => {
            let alpha = r.req_f64("alpha", |p| p.alpha)?;
            let dim = r.usize_or("dimension", |p| p.dimension, 1)?;
            let g = match r.opt("lambda", |p| p.lambda) {
                Some(lambda) => {
                    r.record("lambda", lambda.to_string());
                    param("lambda", GongParams::new(alpha, dim, lambda))?
                }
                None if dim == 1 => {
                    r.defaulted.push("lambda".into());
                    let g = param("alpha", GongParams::from_chain(alpha))?;
                    r.record("lambda", format!("{} (2 zeta(alpha))", g.lambda()));
                    g
                }
                None => return Err(usage("lambda", "required for --dimension > 1")),
            };
            (BoundKind::Gong(g), r.deltas(1, FREE_DELTA_MAX, None)?)
        }
    };
    let times = r.times(10.0, 100)?;
    Ok(Job::Bound {
        kind,
        deltas,
        times,
    })
}

fn hopping_model(r: &mut Resolver) -> Result<HoppingModel, CliError> {
    let n = r.req_usize("n", |p| p.n)?;
    let alpha = r.req_f64("alpha", |p| p.alpha)?;
    param("n", HoppingModel::new(n, alpha))
}

fn hopping_job(r: &mut Resolver, quantity: HoppingSel) -> Result<Job, CliError> {
    let model = hopping_model(r)?;
    let n = model.n();
    let rows = match quantity {
        HoppingSel::Occupation => r.deltas(0, n - 1, Some(n - 1))?,
        _ => r.deltas(1, n / 2, Some(n - 1))?,
    };
    if quantity == HoppingSel::MutualInfo && rows[0] == 0 {
        return Err(usage("delta-min", "mutual information needs delta >= 1"));
    }
    let threshold = if quantity == HoppingSel::Velocity {
        let th = r.f64_or("threshold", |p| p.threshold, 0.05)?;
        if !(th > 0.0 && th < 1.0) {
            return Err(usage("threshold", format!("must lie in (0, 1), got {th}")));
        }
        th
    } else {
        f64::NAN
    };
    let times = r.times(n as f64 / 4.0, 200)?;
    Ok(Job::Hopping {
        model,
        quantity,
        rows,
        times,
        threshold,
    })
}

fn dispersion_job(r: &mut Resolver, form: DispersionSel) -> Result<Job, CliError> {
    let alpha = r.req_f64("alpha", |p| p.alpha)?;
    let n = match form {
        DispersionSel::Infinite => r.usize_or("n", |p| p.n, 256)?,
        _ => r.req_usize("n", |p| p.n)?,
    };
    if form != DispersionSel::Infinite {
        param("n", HoppingModel::new(n, alpha))?;
    } else if n == 0 {
        return Err(usage("n", "needs at least one k point"));
    }
    r.record("k_grid", "k = 2 pi m / n, m = 0..n-1".into());
    Ok(Job::Dispersion { form, alpha, n })
}

fn dos_job(r: &mut Resolver) -> Result<Job, CliError> {
    let alpha = r.req_f64("alpha", |p| p.alpha)?;
    let n_k = r.usize_or("n-k", |p| p.n_k, 100_000)?;
    let lo = r.f64_or("v-min", |p| p.v_min, -5.0)?;
    let hi = r.f64_or("v-max", |p| p.v_max, 5.0)?;
    let bins = r.usize_or("bins", |p| p.bins, 100)?;
    if lo >= hi {
        return Err(usage("v-min", format!("{lo} is not below --v-max {hi}")));
    }
    if bins == 0 {
        return Err(usage("bins", "must be at least 1"));
    }
    r.record("k_grid", "k = 2 pi m / n_k, m = 0..n_k-1".into());
    let edges = (0..=bins)
        .map(|i| lo + (hi - lo) * i as f64 / bins as f64)
        .collect();
    Ok(Job::Dos { alpha, n_k, edges })
}

/// Symmetric couplings with zero diagonal, uniform in [0, 1).
pub fn random_couplings(n: usize, seed: u64) -> Result<RealSymmetricMatrix, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    RealSymmetricMatrix::from_upper(n, |i, j| if i == j { 0.0 } else { rng.random::<f64>() })
        .map_err(|e| usage("n", e))
}

fn channel_job(r: &mut Resolver, output: ChannelSel) -> Result<Job, CliError> {
    match output {
        ChannelSel::Curve => {
            let n = r.req_usize("n", |p| p.n)?;
            let couplings = r.or(
                "couplings",
                |p| p.couplings,
                CouplingsArg::PowerLaw,
                |c| sel_name(c),
            )?;
            let spec = match couplings {
                CouplingsArg::PowerLaw => {
                    let alpha = r.req_f64("alpha", |p| p.alpha)?;
                    param("alpha", ChannelSpec::power_law(n, alpha))?
                }
                CouplingsArg::Random => {
                    let seed = r.or("seed", |p| p.seed, 0, |s| s)?;
                    r.seed = seed;
                    param("n", ChannelSpec::from_matrix(random_couplings(n, seed)?))?
                }
            };
            let oracle = r.or("oracle", |p| p.oracle, false, |o| o)?;
            if oracle && n > soundcone::channel::ED_MAX_SITES {
                return Err(usage(
                    "oracle",
                    format!(
                        "exact diagonalisation is limited to {} sites",
                        soundcone::channel::ED_MAX_SITES
                    ),
                ));
            }
            let times = r.times(1.0, 100)?;
            Ok(Job::ChannelCurve {
                spec,
                times,
                oracle,
            })
        }
        ChannelSel::Exponent => {
            let alpha = r.req_f64("alpha", |p| p.alpha)?;
            let epsilon = r.f64_or("epsilon", |p| p.epsilon, 1e-8)?;
            let n_list = r.or(
                "n-list",
                |p| p.n_list.clone(),
                default_n_list(),
                |l| {
                    l.iter()
                        .map(|n| n.to_string())
                        .collect::<Vec<_>>()
                        .join(" ")
                },
            )?;
            if n_list.len() < 3 {
                return Err(usage("n-list", "needs at least three chain lengths"));
            }
            Ok(Job::ChannelExponent {
                alpha,
                epsilon,
                n_list,
            })
        }
    }
}

/// Twelve chain lengths log-spaced over 100..2000.
pub fn default_n_list() -> Vec<usize> {
    (0..12)
        .map(|i| (100.0 * 20f64.powf(i as f64 / 11.0)).round() as usize)
        .collect()
}
