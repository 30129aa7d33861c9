//! `qudit`: run SPDC spectral scenarios from the command line.
//!
//! Exit codes: 0 on success, 2 when the input does not validate, 3 when
//! the computation or file output fails.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qudit_core::designer::DesignObjective;
use qudit_core::scenario::{
    parse_values, preset, presets, run_scenario, run_sweep, MaskConfig, ScenarioConfig, DESIGN_FILE,
};
use qudit_core::{Error, ProfileKind, SuperpositionMode};

const EXIT_VALIDATION: u8 = 2;
const EXIT_COMPUTATION: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "qudit", version, about = "Frequency-entangled qudits from spatially shaped SPDC pumping")]
struct Cli {
    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate one scenario and write its outputs.
    Simulate {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a scenario once per value of one parameter.
    Sweep {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        overrides: Overrides,
        /// Dotted field to vary, e.g. `pump.beam_radius_mm` or `mask.width`.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for a mask producing a d-mode state.
    Design {
        /// Base scenario; its mask is replaced unless it already asks for a design.
        #[command(flatten)]
        input: OptionalInput,
        #[command(flatten)]
        overrides: Overrides,
        /// Target number of frequency modes.
        #[arg(long)]
        dimension: Option<usize>,
        #[arg(long, default_value_t = 41)]
        bins: usize,
        #[arg(long, value_enum)]
        profile: Option<Profile>,
        /// Maximum number of forward-model evaluations.
        #[arg(long, default_value_t = 400)]
        budget: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the named presets.
    Presets {
        /// Also print captions and flags.
        #[arg(long)]
        verbose: bool,
    },
    /// Check a scenario without computing anything.
    Validate {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        overrides: Overrides,
        /// Print the effective configuration.
        #[arg(long)]
        print: bool,
    },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct Input {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Named preset.
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Args, Debug)]
#[group(required = false, multiple = false)]
struct OptionalInput {
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Args, Debug)]
struct Overrides {
    /// Grid points, `N` or `NSxNI`.
    #[arg(long)]
    grid: Option<String>,
    /// Superposition of the angular components.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Mode {
    Coherent,
    Incoherent,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Profile {
    Gaussian,
    FlatTop,
}

fn load(scenario: Option<&Path>, preset_name: Option<&str>) -> Result<ScenarioConfig, Error> {
    match (scenario, preset_name) {
        (Some(path), _) => ScenarioConfig::from_file(path).map_err(|e| match e {
            Error::Io { path, source } => Error::invalid("--scenario", format!("{path}: {source}")),
            other => other,
        }),
        (None, Some(name)) => Ok(preset(name)?.config),
        (None, None) => Err(Error::invalid("input", "give --scenario or --preset")),
    }
}

fn parse_grid(text: &str) -> Result<(usize, usize), Error> {
    let bad = || Error::invalid("--grid", format!("`{text}`: expected N or NSxNI"));
    let parts: Vec<&str> = text.split(['x', 'X']).collect();
    let nums: Vec<usize> = parts
        .iter()
        .map(|p| p.trim().parse::<usize>().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    match nums[..] {
        [n] => Ok((n, n)),
        [s, i] => Ok((s, i)),
        _ => Err(bad()),
    }
}

fn apply(mut cfg: ScenarioConfig, o: &Overrides) -> Result<ScenarioConfig, Error> {
    if let Some(g) = &o.grid {
        let (s, i) = parse_grid(g)?;
        cfg.grid = cfg.grid.with_points(s, i);
    }
    match o.mode {
        Some(Mode::Coherent) => cfg.mode = SuperpositionMode::Coherent,
        Some(Mode::Incoherent) => cfg.mode = SuperpositionMode::Incoherent,
        None => {}
    }
    Ok(cfg)
}

fn out_dir(flag: Option<PathBuf>, cfg: &ScenarioConfig) -> PathBuf {
    flag.or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| {
        let name = if cfg.name.is_empty() { "scenario" } else { cfg.name.as_str() };
        PathBuf::from("out").join(name)
    })
}

fn print_report(cfg: &ScenarioConfig, out: &Path, report: &qudit_core::scenario::Report) {
    println!("{}: {} peak(s) in the signal marginal", display_name(cfg), report.signal_peaks.len());
    for p in &report.signal_peaks.peaks {
        println!("  {:8.2} nm  height {:.4e}  fwhm {:.2} nm", p.center_nm, p.height, p.fwhm_nm);
    }
    if let Some(w) = report.signal_fwhm_nm {
        println!("  marginal FWHM {w:.2} nm");
    }
    if let Some(s) = &report.schmidt {
        println!("  Schmidt number {:.4}", s.schmidt_number);
    }
    println!("  outputs in {}", out.display());
}

fn display_name(cfg: &ScenarioConfig) -> &str {
    if cfg.name.is_empty() {
        "scenario"
    } else {
        &cfg.name
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Simulate { input, overrides, out } => {
            let cfg = apply(load(input.scenario.as_deref(), input.preset.as_deref())?, &overrides)?;
            let dir = out_dir(out, &cfg);
            let result = run_scenario(&cfg, &dir)?;
            for w in &result.index.warnings {
                eprintln!("warning: {w}");
            }
            print_report(&cfg, &dir, &result.simulation.report);
        }
        Command::Sweep {
            input,
            overrides,
            param,
            values,
            out,
        } => {
            let cfg = apply(load(input.scenario.as_deref(), input.preset.as_deref())?, &overrides)?;
            let values = parse_values(&values)?;
            let dir = out_dir(out, &cfg);
            let items = run_sweep(&cfg, &param, &values, &dir)?;
            let mut failed = 0;
            for it in &items {
                match &it.outcome {
                    Ok(r) => println!(
                        "{param} = {}: {} peak(s), mean spacing {}",
                        it.value,
                        r.peak_count,
                        r.mean_spacing_nm.map(|s| format!("{s:.2} nm")).unwrap_or_else(|| "-".into())
                    ),
                    Err(e) => {
                        failed += 1;
                        println!("{param} = {}: failed: {e}", it.value);
                    }
                }
            }
            println!("summary in {}", dir.join(qudit_core::scenario::SWEEP_SUMMARY_FILE).display());
            if failed == items.len() {
                return Err(Error::invalid("sweep", "every sweep item failed"));
            }
        }
        Command::Design {
            input,
            overrides,
            dimension,
            bins,
            profile,
            budget,
            out,
        } => {
            let mut cfg = match (input.scenario.as_deref(), input.preset.as_deref()) {
                (None, None) => preset("fig2-a1")?.config,
                (s, p) => load(s, p)?,
            };
            cfg = apply(cfg, &overrides)?;
            if let Some(p) = profile {
                cfg.pump.profile = match p {
                    Profile::Gaussian => ProfileKind::Gaussian,
                    Profile::FlatTop => ProfileKind::FlatTop,
                };
            }
            let keep = matches!(cfg.mask, MaskConfig::Design { .. }) && dimension.is_none();
            if !keep {
                let d = dimension.ok_or_else(|| Error::invalid("--dimension", "required unless the scenario asks for a design"))?;
                cfg.mask = MaskConfig::Design {
                    bins,
                    aperture_mm: qudit_core::pump::DEFAULT_APERTURE_MM,
                    objective: DesignObjective::new(d),
                    budget,
                    exhaustive: true,
                };
                cfg.name = format!("design-d{d}");
            }
            let dir = out_dir(out, &cfg);
            let result = run_scenario(&cfg, &dir)?;
            let report = &result.simulation.report;
            if let (Some(mask), Some(design)) = (&report.mask, &report.design) {
                println!("pattern   {}", mask.pattern);
                println!("blocks    {:?} (1-based start, width)", mask.blocks);
                println!("blocks_mm {:?} (center, width)", mask.blocks_mm);
                println!(
                    "objective {:.5} after {} evaluations; {} peak(s), weights {:?}",
                    design.objective,
                    design.evaluations,
                    design.final_evaluation.peak_count,
                    design.final_evaluation.mode_weights
                );
            }
            println!("design in {}", dir.join(DESIGN_FILE).display());
        }
        Command::Presets { verbose } => {
            // a closed pipe (`qudit presets | head`) just ends the listing
            let mut out = std::io::stdout().lock();
            for p in presets() {
                let flag = if verbose && p.qualitative { " [qualitative]" } else { "" };
                let mut line = format!("{:<10} {}{flag}\n", p.name, p.description);
                if verbose && !p.caption.is_empty() {
                    line.push_str(&format!("{:<10} caption: {}\n", "", p.caption));
                }
                if out.write_all(line.as_bytes()).is_err() {
                    break;
                }
            }
        }
        Command::Validate { input, overrides, print } => {
            let cfg = apply(load(input.scenario.as_deref(), input.preset.as_deref())?, &overrides)?;
            cfg.resolve()?;
            if print {
                print!("{}", cfg.effective());
            }
            println!("{}: valid", display_name(&cfg));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be >= 1");
            return ExitCode::from(EXIT_VALIDATION);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_COMPUTATION);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { EXIT_VALIDATION } else { EXIT_COMPUTATION })
        }
    }
}
