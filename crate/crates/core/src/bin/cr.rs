use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cr_core::coefficients::{build_table, load_table, save_table, BuildOptions, CouplingTable, Family};
use cr_core::config::{IntegratorKind, Preset, RunConfig};
use cr_core::error::{CrError, Result};
use cr_core::integrate::{evolve, EvolveOptions};
use cr_core::nls::{compare_flows, CompareOptions, NlsSystem};
use cr_core::oracle::{oracle_nodes, tensor_product_integral};
use cr_core::resonant::ResonantSystem;
use cr_core::stability::{discriminant, find_stationary, unstable_mode_count, Constraint, FindOptions, Sense};
use cr_core::subspaces::e2_modes;

#[derive(Parser)]
#[command(name = "cr", version, about = "Continuous resonant equation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a coupling table and write it to disk.
    Coeffs {
        family: Family,
        cutoff: u32,
        /// Output file; defaults to `<family>-<cutoff>.crt` in the table cache.
        out: Option<PathBuf>,
        /// Cross-check a random 5% sample against the tensor-grid oracle.
        #[arg(long)]
        verify_oracle: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Evolve the resonant system and write a trajectory CSV.
    Simulate(RunArgs),
    /// Discriminant table of the linearization around `φ_{N,N}`.
    Stability {
        #[arg(long, default_value_t = 1)]
        n_min: u32,
        #[arg(long, default_value_t = 20)]
        n_max: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for a constrained extremizer of the Hamiltonian.
    Stationary(StationaryArgs),
    /// Compare the truncated trapped NLS with the resonant flow.
    CompareNls(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Flat TOML config; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<PresetArg>,
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long)]
    cutoff: Option<u32>,
    #[arg(long)]
    integrator: Option<IntegratorArg>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StationaryArgs {
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    cutoff: u32,
    #[arg(long, value_enum, default_value_t = ConstraintArg::Mass)]
    constraint: ConstraintArg,
    #[arg(long, default_value_t = 1.0)]
    mu0: f64,
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    p0: f64,
    #[arg(long, value_enum, default_value_t = SenseArg::Min)]
    sense: SenseArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Restrict the seed to the modes (2,2), (2,0), (2,-2).
    #[arg(long)]
    e2: bool,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    PureMode,
    E2Catalogue,
    GaussianOrbit,
    RandomSeeded,
}

#[derive(Clone, Copy, ValueEnum)]
enum IntegratorArg {
    Rk4,
    Rk45,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConstraintArg {
    Mass,
    MassMomentum,
    MassAndMomentum,
}

#[derive(Clone, Copy, ValueEnum)]
enum SenseArg {
    Min,
    Max,
}

impl RunArgs {
    fn resolve(&self, base: RunConfig) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => base,
        };
        if let Some(p) = self.preset {
            let preset = match p {
                PresetArg::PureMode => Preset::PureMode,
                PresetArg::E2Catalogue => Preset::E2Catalogue,
                PresetArg::GaussianOrbit => Preset::GaussianOrbit,
                PresetArg::RandomSeeded => Preset::RandomSeeded,
            };
            if self.config.is_none() {
                cfg = RunConfig { family: cfg.family, ..RunConfig::preset(preset) };
            } else {
                cfg.preset = preset;
            }
        }
        if let Some(v) = &self.table {
            cfg.table = Some(v.clone());
        }
        if let Some(v) = self.cutoff {
            cfg.cutoff = v;
        }
        if let Some(v) = self.integrator {
            cfg.integrator = match v {
                IntegratorArg::Rk4 => IntegratorKind::Rk4,
                IntegratorArg::Rk45 => IntegratorKind::Rk45,
            };
        }
        if let Some(v) = self.step {
            cfg.step = v;
        }
        if let Some(v) = self.tol {
            cfg.tol = v;
        }
        if let Some(v) = self.t_end {
            cfg.t_end = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = &self.out {
            cfg.out = Some(v.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn cache_dir() -> PathBuf {
    std::env::var_os("CR_TABLE_CACHE").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."))
}

fn cache_path(family: Family, cutoff: u32) -> PathBuf {
    cache_dir().join(format!("{family}-{cutoff}.crt"))
}

/// Loads `explicit`, else the cached table if it exists and matches, else builds.
fn obtain_table(explicit: Option<&Path>, family: Family, cutoff: u32, jobs: Option<usize>) -> Result<CouplingTable> {
    if let Some(p) = explicit {
        return load_table(p);
    }
    let cached = cache_path(family, cutoff);
    if std::env::var_os("CR_TABLE_CACHE").is_some() && cached.exists() {
        let t = load_table(&cached)?;
        if t.family() == family && t.cutoff() >= cutoff {
            return Ok(t);
        }
    }
    let t = build_table(family, cutoff, BuildOptions { jobs: jobs.unwrap_or(0), ..BuildOptions::default() })?;
    if std::env::var_os("CR_TABLE_CACHE").is_some() {
        std::fs::create_dir_all(cache_dir()).map_err(|e| CrError::io(&cache_dir(), e))?;
        save_table(&t, &cached)?;
    }
    Ok(t)
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p).map_err(|e| CrError::io(p, e))?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn write_err(path: Option<&Path>, e: std::io::Error) -> CrError {
    CrError::io(path.unwrap_or(Path::new("<stdout>")), e)
}

/// `Ok(true)` when every internal check passed.
fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Coeffs { family, cutoff, out, verify_oracle, seed, jobs } => {
            let table = build_table(family, cutoff, BuildOptions { jobs: jobs.unwrap_or(0), ..BuildOptions::default() })?;
            let out = out.unwrap_or_else(|| cache_path(family, cutoff));
            save_table(&table, &out)?;
            eprintln!("wrote {} entries to {}", table.len(), out.display());
            if !verify_oracle {
                return Ok(true);
            }
            let mut entries = table.entries().to_vec();
            entries.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let k = entries.len().div_ceil(20);
            let mut worst = 0.0f64;
            for e in &entries[..k] {
                let q = e.key.q;
                let oracle = tensor_product_integral(q, oracle_nodes(&q)).re;
                worst = worst.max((oracle - e.value).abs());
            }
            let ok = worst <= 1e-8;
            eprintln!("oracle check on {k} entries: max deviation {worst:.3e} ({})", if ok { "ok" } else { "FAILED" });
            Ok(ok)
        }
        Command::Simulate(args) => {
            let cfg = args.resolve(RunConfig::default())?;
            let table = obtain_table(cfg.table.as_deref(), cfg.family, cfg.cutoff, args.jobs)?;
            let system = ResonantSystem::new(&table, cfg.cutoff)?;
            let u0 = cfg.initial_state()?;
            let opts = EvolveOptions { integrator: cfg.integrator(), sample_stride: cfg.sample_stride };
            let traj = evolve(&u0, &system, cfg.t_end, opts)?;
            let out = cfg.out.as_deref();
            let mut w = open_out(out)?;
            traj.write_csv(&mut w).and_then(|_| w.flush()).map_err(|e| write_err(out, e))?;
            let dm = traj.relative_drift(|c| c.mass);
            let de = traj.relative_drift(|c| c.hamiltonian);
            eprintln!("t_end={} mass drift {dm:.3e}, energy drift {de:.3e}", cfg.t_end);
            Ok(traj.final_state().is_finite() && dm < 1e-6 && de < 1e-6)
        }
        Command::Stability { n_min, n_max, out } => {
            if n_min == 0 || n_min > n_max {
                return Err(CrError::InvalidArgument(format!("need 1 ≤ n_min ≤ n_max, got {n_min}..{n_max}")));
            }
            let mut w = open_out(out.as_deref())?;
            let mut ok = true;
            let mut body = String::from("N,k,delta,count\n");
            for n in n_min..=n_max {
                let count = unstable_mode_count(n);
                for k in (0..=2 * n).filter(|&k| k != n) {
                    let d = discriminant(n, k);
                    ok &= d.is_finite() && (d - discriminant(n, 2 * n - k)).abs() <= 1e-12 * d.abs().max(1.0);
                    body.push_str(&format!("{n},{k},{d:e},{count}\n"));
                }
            }
            w.write_all(body.as_bytes()).and_then(|_| w.flush()).map_err(|e| write_err(out.as_deref(), e))?;
            Ok(ok)
        }
        Command::Stationary(a) => {
            let table = obtain_table(a.table.as_deref(), Family::General2d, a.cutoff, a.jobs)?;
            let system = ResonantSystem::new(&table, a.cutoff)?;
            let constraint = match a.constraint {
                ConstraintArg::Mass => Constraint::Mass { mu0: a.mu0 },
                ConstraintArg::MassMomentum => Constraint::MassMomentum { alpha: a.alpha, mu0: a.mu0 },
                ConstraintArg::MassAndMomentum => Constraint::MassAndMomentum { mu0: a.mu0, p0: a.p0 },
            };
            let sense = match a.sense {
                SenseArg::Min => Sense::Min,
                SenseArg::Max => Sense::Max,
            };
            let opts = FindOptions { support: a.e2.then(|| e2_modes().to_vec()), ..FindOptions::default() };
            let (wave, ok) = match find_stationary(&system, constraint, sense, a.seed, &opts) {
                Ok(w) => (w, true),
                Err(CrError::NotStationary { best, .. }) => (*best, false),
                Err(e) => return Err(e),
            };
            let residual = wave.el_residual(&system)?;
            let mut text = format!(
                "# omega={:.16e} rot_rate={:.16e} energy={:.16e} residual={:.3e} seed={}\n",
                wave.omega,
                wave.rot_rate,
                system.hamiltonian(&wave.profile)?,
                residual,
                a.seed
            );
            for (q, c) in wave.profile.iter().filter(|(_, c)| c.norm() > 0.0) {
                text.push_str(&format!("{} {} {:.16e} {:.16e}\n", q.n(), q.m(), c.re, c.im));
            }
            let mut w = open_out(a.out.as_deref())?;
            w.write_all(text.as_bytes()).and_then(|_| w.flush()).map_err(|e| write_err(a.out.as_deref(), e))?;
            eprintln!("Euler-Lagrange residual {residual:.3e}");
            Ok(ok)
        }
        Command::CompareNls(args) => {
            let base = RunConfig { cutoff: 8, ..RunConfig::preset(Preset::RandomSeeded) };
            let cfg = args.resolve(base)?;
            let full = obtain_table(cfg.table.as_deref(), Family::FullProduct, cfg.cutoff, args.jobs)?;
            let nls = NlsSystem::new(&full, cfg.cutoff)?;
            let cr = ResonantSystem::new(&full.resonant_part(), cfg.cutoff)?;
            let u0 = cfg.initial_state()?;
            let opts = CompareOptions { s: cfg.s, integrator: cfg.integrator(), normalize: true };
            let report = compare_flows(&u0, &cfg.t_grid, &cfg.b_list, &nls, &cr, opts)?;
            let out = cfg.out.as_deref();
            let mut w = open_out(out)?;
            report.write_csv(&mut w).and_then(|_| w.flush()).map_err(|e| write_err(out, e))?;
            Ok(report.rows.iter().all(|r| r.error_hs.is_finite()))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
