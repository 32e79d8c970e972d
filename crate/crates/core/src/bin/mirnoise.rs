use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mirnoise::geometry::{LossAngle, Material};
use mirnoise::susceptibility::{optical_mass_approx, TruncationPolicy};
use mirnoise::sweep::{self, Scenario, SweepParam, SweepSpec};
use mirnoise::Error;

/// Internal thermal noise of a plano-convex mirror.
#[derive(Parser, Debug)]
#[command(name = "mirnoise", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Radius, diameter and paraxiality of the sharp-edged mirror.
    Geometry,
    /// Zero-frequency effective susceptibility.
    Chi0,
    /// Force and displacement noise over a log-spaced frequency grid.
    Spectrum {
        /// Lowest angular frequency (rad/s); defaults to a ten-thousandth of the fundamental.
        #[arg(long)]
        omega_min: Option<f64>,
        /// Highest angular frequency (rad/s); defaults to ten times the fundamental.
        #[arg(long)]
        omega_max: Option<f64>,
        #[arg(long, default_value_t = 100)]
        points: usize,
    },
    /// Zero-frequency susceptibility as one parameter varies.
    Sweep {
        /// thickness, waist, offset, mass or mode-count
        #[arg(long)]
        param: SweepParam,
        #[arg(long)]
        from: Option<f64>,
        #[arg(long)]
        to: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Partial sums at increasing mode counts.
    Converge {
        #[arg(long, value_delimiter = ',', default_value = "100,1000,10000,100000,1000000")]
        checkpoints: Vec<u64>,
    },
    /// Plano-convex against the cylindrical-mirror reference.
    Compare {
        #[arg(long)]
        no_cylindrical: bool,
    },
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Mirror mass (kg).
    #[arg(long, global = true)]
    mass: Option<f64>,
    /// Central thickness (m).
    #[arg(long, global = true)]
    thickness: Option<f64>,
    /// Optical beam waist (m).
    #[arg(long, global = true)]
    waist: Option<f64>,
    /// Beam offset from the mirror axis (m, or waists with --offset-in-waists).
    #[arg(long, global = true)]
    offset: Option<f64>,
    #[arg(long, global = true)]
    offset_in_waists: bool,
    /// Temperature (K).
    #[arg(long, global = true)]
    temperature: Option<f64>,
    #[arg(long, global = true)]
    loss_angle: Option<f64>,
    /// Density (kg/m^3).
    #[arg(long, global = true)]
    density: Option<f64>,
    /// Longitudinal sound speed (m/s).
    #[arg(long, global = true)]
    sound_speed: Option<f64>,
    /// Relative tail tolerance.
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    #[arg(long, global = true)]
    max_modes: Option<u64>,
    /// Worker threads for sweeps and spectra.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Adds a wall-time column to sweep output.
    #[arg(long, global = true)]
    timing: bool,
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Flat `key = value` file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

const CONFIG_KEYS: &[&str] = &[
    "mass",
    "thickness",
    "waist",
    "offset",
    "offset-in-waists",
    "temperature",
    "loss-angle",
    "density",
    "sound-speed",
    "epsilon",
    "max-modes",
    "jobs",
    "timing",
];

struct Settings {
    scenario: Scenario,
    offset_in_waists: bool,
    jobs: usize,
    timing: bool,
}

fn pick<T: std::str::FromStr>(cli: Option<T>, file: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, Error> {
    if cli.is_some() {
        return Ok(cli);
    }
    match file.get(key) {
        None => Ok(None),
        Some(text) => text
            .parse()
            .map(Some)
            .map_err(|_| Error::InvalidSpec(format!("config key `{key}`: cannot parse `{text}`"))),
    }
}

fn flag(cli: bool, file: &BTreeMap<String, String>, key: &str) -> Result<bool, Error> {
    Ok(cli || pick::<bool>(None, file, key)?.unwrap_or(false))
}

fn settings(common: &Common) -> Result<Settings, Error> {
    let file = match &common.config {
        Some(path) => sweep::parse_config(&fs::read_to_string(path)?)?,
        None => BTreeMap::new(),
    };
    if let Some(key) = file.keys().find(|k| !CONFIG_KEYS.contains(&k.as_str())) {
        return Err(Error::InvalidSpec(format!("unknown config key `{key}`")));
    }
    let defaults = Scenario::default();
    let silica = Material::fused_silica();
    let loss = pick(common.loss_angle, &file, "loss-angle")?.unwrap_or(1e-6);
    let material = Material::new(
        pick(common.density, &file, "density")?.unwrap_or(silica.density()),
        pick(common.sound_speed, &file, "sound-speed")?.unwrap_or(silica.sound_speed()),
        LossAngle::Constant(loss),
    )?;
    let policy = TruncationPolicy {
        epsilon: pick(common.epsilon, &file, "epsilon")?.unwrap_or(defaults.policy.epsilon),
        max_modes: pick(common.max_modes, &file, "max-modes")?.unwrap_or(defaults.policy.max_modes),
        ..defaults.policy
    };
    let offset_in_waists = flag(common.offset_in_waists, &file, "offset-in-waists")?;
    let waist = pick(common.waist, &file, "waist")?.unwrap_or(defaults.waist);
    let mut offset = pick(common.offset, &file, "offset")?.unwrap_or(0.0);
    if offset_in_waists {
        offset *= waist;
    }
    let scenario = Scenario {
        mass: pick(common.mass, &file, "mass")?.unwrap_or(defaults.mass),
        thickness: pick(common.thickness, &file, "thickness")?.unwrap_or(defaults.thickness),
        waist,
        offset,
        temperature: pick(common.temperature, &file, "temperature")?.unwrap_or(defaults.temperature),
        material,
        policy,
    };
    let jobs = pick(common.jobs, &file, "jobs")?.unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    });
    if jobs == 0 {
        return Err(Error::InvalidSpec("--jobs must be at least 1".into()));
    }
    Ok(Settings {
        scenario,
        offset_in_waists,
        jobs,
        timing: flag(common.timing, &file, "timing")?,
    })
}

/// Runs the command into `out`; returns whether every value converged.
fn run(command: &Command, s: &Settings, out: &mut Vec<u8>) -> Result<bool, Error> {
    let sc = &s.scenario;
    let eps = sc.policy.epsilon;
    match command {
        Command::Geometry => {
            let g = sc.geometry()?;
            sweep::write_geometry_csv(out, &g)?;
            if g.paraxial_warning() {
                eprintln!(
                    "warning: h0/R = {:.3} exceeds the paraxial limit",
                    g.paraxiality_ratio()
                );
            }
            Ok(true)
        }
        Command::Chi0 => {
            let (g, beam) = sc.resolve()?;
            let result = sweep::chi0_or_partial(&g, &beam, &sc.policy)?;
            let approx = optical_mass_approx(&g, &beam).ok().map(|a| a.chi_approx);
            sweep::write_chi0_csv(out, &beam, &result, approx, eps)?;
            Ok(result.converged(eps))
        }
        Command::Spectrum {
            omega_min,
            omega_max,
            points,
        } => {
            let g = sc.geometry()?;
            let fundamental = g.fundamental_frequency();
            let lo = omega_min.unwrap_or(fundamental / 1e4);
            let hi = omega_max.unwrap_or(10.0 * fundamental);
            let omegas = sweep::log_space(lo, hi, *points)?;
            let rows = sweep::run_spectrum(sc, &omegas, s.jobs)?;
            sweep::write_spectrum_csv(out, &rows, eps)?;
            Ok(rows.iter().all(|p| p.tail_bound <= eps))
        }
        Command::Sweep {
            param,
            from,
            to,
            points,
        } => {
            let (d_from, d_to, d_points) = param.default_range();
            let scale = if *param == SweepParam::Offset && s.offset_in_waists {
                sc.waist
            } else {
                1.0
            };
            let spec = SweepSpec::new(
                *param,
                from.map(|v| v * scale).unwrap_or(d_from),
                to.map(|v| v * scale).unwrap_or(d_to),
                points.unwrap_or(d_points),
                sc.clone(),
            )?;
            let rows = sweep::run_sweep(&spec, s.jobs)?;
            sweep::write_sweep_csv(out, *param, &rows, s.timing)?;
            Ok(rows.iter().all(|r| r.converged))
        }
        Command::Converge { checkpoints } => {
            let (g, beam) = sc.resolve()?;
            let points = mirnoise::susceptibility::convergence_study(&g, &beam, checkpoints, &sc.policy)?;
            let reference = points.last().map(|p| p.value).unwrap_or(f64::NAN);
            writeln!(out, "{}", sweep::CSV_BANNER)?;
            writeln!(out, "checkpoint,modes_used,chi0_m_per_n,relative_to_last")?;
            for p in &points {
                writeln!(
                    out,
                    "{},{},{:.8e},{:.8e}",
                    p.checkpoint,
                    p.modes_used,
                    p.value,
                    (reference - p.value) / reference
                )?;
            }
            Ok(true)
        }
        Command::Compare { no_cylindrical } => {
            let (g, beam) = sc.resolve()?;
            let report = sweep::compare_report(&g, &beam, &sc.policy, !no_cylindrical)?;
            sweep::write_compare_csv(out, &report)?;
            Ok(report.plano_convex.converged(eps))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = settings(&cli.common).and_then(|s| {
        let mut buf = Vec::new();
        let converged = run(&cli.command, &s, &mut buf)?;
        match &cli.common.output {
            Some(path) => fs::write(path, &buf)?,
            None => io::stdout().write_all(&buf)?,
        }
        Ok(converged)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("warning: some values did not reach the requested tolerance");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) | Error::ConvergenceFailure(_) | Error::RecurrenceOverflow { .. } => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}
