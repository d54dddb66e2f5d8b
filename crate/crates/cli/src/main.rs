//! `wavesym`: decide observability of the 1D periodic wave equation from a
//! spacetime region.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0    | observable (or the command succeeded) |
//! | 1    | `witness` refused: the region is observable |
//! | 2    | input error (I/O, syntax, invalid flags) |
//! | 10   | not observable |
//! | 11   | indeterminate at this resolution |

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use wavesym::estimator::{gram_matrix, indicator_fourier, ModeBand};
use wavesym::region::{parse_region_in, rasterize, CircleArc, RasterMask, RegionExpr, Resolution, SpacetimeRegion};
use wavesym::report::{
    exit_code, format_arcs, read_wave_csv, render_pgm, render_svg, write_matrix_dump, write_series_csv, write_text,
    write_trajectory_dump, write_witness_csv, AnalysisReport, SimulationSummary, SvgOverlay,
};
use wavesym::symmetry::{build_fiber_graph, SymmetryVerdict};
use wavesym::verdict::{classify_product, classify_with, ClassifyOptions, Tri, Verdict};
use wavesym::wave::{solve_forced_wave, solve_free_wave, total_energy, Forcing, SpectralState};
use wavesym::geometry::fiber_profiles;

#[derive(Parser)]
#[command(name = "wavesym", version, about = "Observability, unique continuation and controllability of the wave equation on the circle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct GridArgs {
    /// Number of spatial bins (dt = dx = 2π/n).
    #[arg(long, default_value_t = 256)]
    n: usize,
    /// Sub-triangle refinement used when rasterizing.
    #[arg(long, default_value_t = 4)]
    supersample: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a region and write a report.
    Analyze {
        region: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        /// Attach spectral estimates of the observability constant.
        #[arg(long)]
        estimate: bool,
        /// Highest trial frequency for the estimator.
        #[arg(long, default_value_t = 32)]
        modes: usize,
        /// Recorded in the report; the analysis itself is deterministic.
        #[arg(long)]
        seed: Option<u64>,
        /// Report file (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Write the observed-energy matrix at order `--modes`.
        #[arg(long)]
        dump_matrix: Option<PathBuf>,
    },
    /// Write initial data defeating observability, as CSV `x,u0x,u1`.
    Witness {
        region: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw the region as PGM (default) or SVG (by extension).
    Render {
        region: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: PathBuf,
        /// Pixels per cell side in PGM output.
        #[arg(long, default_value_t = 2)]
        scale: usize,
        /// SVG only: draw this many characteristics of each family.
        #[arg(long, default_value_t = 0)]
        characteristics: usize,
        /// SVG only: color G by fiber-graph component.
        #[arg(long)]
        components: bool,
    },
    /// Evolve data and export E(t), I(t) and the cumulative observed energy.
    Simulate {
        region: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        /// Initial data as CSV with columns u0x,u1.
        #[arg(long, conflicts_with_all = ["witness", "random"])]
        data: Option<PathBuf>,
        /// Use the region's witness data.
        #[arg(long, conflicts_with = "random")]
        witness: bool,
        /// Random band-limited data up to this frequency.
        #[arg(long)]
        random: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Arcs of x + t for the conserved functional, e.g. "[0,pi]".
        #[arg(long)]
        a: Option<String>,
        /// Arcs of x − t for the conserved functional.
        #[arg(long)]
        b: Option<String>,
        /// Constant source applied on G.
        #[arg(long)]
        force: Option<f64>,
        /// CSV series `t,E,I,observed_cum`.
        #[arg(long)]
        export: Option<PathBuf>,
        /// Binary dump of the characteristic fields.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
}

/// Failure with the exit code to report.
struct Failure(u8, String);

impl From<wavesym::Error> for Failure {
    fn from(e: wavesym::Error) -> Self {
        Failure(2, e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, msg)) => {
            eprintln!("wavesym: {msg}");
            ExitCode::from(code)
        }
    }
}

fn load(path: &Path, grid: &GridArgs) -> Result<(SpacetimeRegion, RasterMask), Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure(2, format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let region = parse_region_in(&text, base).map_err(|e| Failure(2, format!("{}: {e}", path.display())))?;
    let res = Resolution::new(grid.n, region.horizon())?;
    let mask = rasterize(&region, res, grid.supersample)?;
    Ok((region, mask))
}

fn verdict_for(region: &SpacetimeRegion, mask: &RasterMask, grid: &GridArgs, options: &ClassifyOptions) -> Result<Verdict, Failure> {
    match region.root() {
        RegionExpr::Product { times, arcs } if options.estimate_orders.is_empty() => {
            Ok(classify_product(times, arcs, region.horizon(), grid.n, grid.supersample)?)
        }
        _ => Ok(classify_with(mask, options)?),
    }
}

fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Analyze {
            region,
            grid,
            estimate,
            modes,
            seed,
            out,
            format,
            dump_matrix,
        } => {
            let (reg, mask) = load(&region, &grid)?;
            let orders = if estimate {
                let mut o: Vec<usize> = [modes / 4, modes / 2, modes].into_iter().filter(|&m| m >= 1).collect();
                o.dedup();
                o
            } else {
                Vec::new()
            };
            let verdict = verdict_for(&reg, &mask, &grid, &ClassifyOptions { estimate_orders: orders })?;
            if let Some(path) = dump_matrix {
                let spec = indicator_fourier(&mask, 2 * modes)?;
                write_matrix_dump(&path, &gram_matrix(&spec, ModeBand::up_to(modes))?)?;
            }
            let code = exit_code(verdict.observable) as u8;
            let mut report = AnalysisReport::new(&reg, verdict);
            report.seed = seed;
            let text = match format {
                Format::Text => report.to_text(),
                Format::Json => report.to_json() + "\n",
            };
            match out {
                Some(path) => write_text(&path, &text)?,
                None => print!("{text}"),
            }
            Ok(code)
        }
        Command::Witness { region, grid, out } => {
            let (reg, mask) = load(&region, &grid)?;
            let verdict = verdict_for(&reg, &mask, &grid, &ClassifyOptions::default())?;
            if verdict.observable == Tri::Yes {
                return Err(Failure(
                    1,
                    "region is observable: every datum is seen, so no witness exists".to_string(),
                ));
            }
            let w = verdict
                .witness
                .ok_or_else(|| Failure(1, "no witness available at this resolution".to_string()))?;
            write_witness_csv(&out, &w.state)?;
            let mut levels: Vec<f64> = w.state.p().iter().chain(&w.state.q()).map(|v| (v * 1e6).round() / 1e6).collect();
            levels.sort_by(f64::total_cmp);
            levels.dedup();
            println!("kind: {:?}", w.kind);
            println!("total: {:.9}", w.total);
            println!("observed: {:.6e}", w.observed);
            println!("ratio: {:.6e}", w.ratio());
            if levels.len() <= 8 {
                let shown: Vec<String> = levels.iter().map(|v| format!("{v}")).collect();
                println!("levels: {{{}}}", shown.join(", "));
            }
            Ok(0)
        }
        Command::Render {
            region,
            grid,
            out,
            scale,
            characteristics,
            components,
        } => {
            let ext = out.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
            if !matches!(ext.as_deref(), Some("svg" | "pgm")) {
                return Err(Failure(2, format!("{}: output must end in .pgm or .svg", out.display())));
            }
            let (_, mask) = load(&region, &grid)?;
            if ext.as_deref() == Some("svg") {
                let graph = components.then(|| build_fiber_graph(&fiber_profiles(&mask)));
                let overlay = SvgOverlay {
                    characteristics,
                    components: graph.as_ref(),
                };
                write_text(&out, &render_svg(&mask, &overlay))?;
            } else {
                wavesym::region::write_pgm(&out, &render_pgm(&mask, scale))?;
            }
            Ok(0)
        }
        Command::Simulate {
            region,
            grid,
            data,
            witness,
            random,
            seed,
            a,
            b,
            force,
            export,
            dump,
        } => {
            let (reg, mask) = load(&region, &grid)?;
            let res = mask.resolution();
            let needs_verdict = witness || (a.is_none() && b.is_none());
            let verdict = if needs_verdict {
                Some(verdict_for(&reg, &mask, &grid, &ClassifyOptions::default())?)
            } else {
                None
            };
            let state = if let Some(path) = data {
                read_wave_csv(&path)?
            } else if witness {
                verdict
                    .as_ref()
                    .and_then(|v| v.witness.as_ref())
                    .map(|w| w.state.clone())
                    .ok_or_else(|| Failure(1, "region is observable: no witness to simulate".to_string()))?
            } else if let Some(modes) = random {
                SpectralState::seeded_band(modes, 1, seed).to_grid(res.n)
            } else {
                return Err(Failure(2, "one of --data, --witness or --random is required".to_string()));
            };
            if state.n() != res.n {
                return Err(Failure(
                    2,
                    format!("shape mismatch: data have {} samples, grid has n = {}", state.n(), res.n),
                ));
            }
            let (xi_set, eta_set) = match (&a, &b) {
                (None, None) => match verdict.as_ref().and_then(|v| v.symmetry.as_ref()) {
                    Some(SymmetryVerdict::Pair { xi_set, eta_set, .. }) => (xi_set.clone(), eta_set.clone()),
                    _ => (Vec::new(), Vec::new()),
                },
                _ => (arc_bins(a.as_deref(), res.n)?, arc_bins(b.as_deref(), res.n)?),
            };
            let traj = match force {
                Some(f) => solve_forced_wave(&state, &Forcing::constant(res, f), &mask)?,
                None => solve_free_wave(&state, res)?,
            };
            let summary = SimulationSummary::from_trajectory(&traj, &mask, &xi_set, &eta_set);
            if let Some(path) = export {
                write_series_csv(&path, &summary.rows)?;
            }
            if let Some(path) = dump {
                write_trajectory_dump(&path, &traj)?;
            }
            let dx = res.dx();
            let e0 = total_energy(&state);
            let last = summary.rows.last().expect("at least one level");
            println!("resolution: n={} nt={} T_eff={:.6}", res.n, res.nt, res.t_eff());
            println!("A: {}", format_arcs(&xi_set, dx));
            println!("B: {}", format_arcs(&eta_set, dx));
            println!("energy_initial: {e0:.9}");
            println!("energy_final: {:.9}", last.energy);
            println!("invariant_initial: {:.9}", summary.rows[0].invariant);
            println!("invariant_drift: {:.3e}", summary.invariant_drift());
            println!("observed_total: {:.9}", last.observed_cum);
            if e0 > 0.0 {
                println!("observed_ratio: {:.6e}", last.observed_cum / e0);
            }
            Ok(0)
        }
    }
}

/// Bins whose centres lie in the arcs written as in the region language,
/// e.g. `[0,pi],[3*pi/2,2*pi]`.
fn arc_bins(spec: Option<&str>, n: usize) -> Result<Vec<usize>, Failure> {
    let Some(spec) = spec else {
        return Ok(Vec::new());
    };
    let probe = format!("region {{ T=1 charband {{ xi={spec} }} }}");
    let region = wavesym::region::parse_region(&probe).map_err(|e| Failure(2, format!("bad arc list `{spec}`: {e}")))?;
    let arcs: Vec<CircleArc> = match region.root() {
        RegionExpr::CharBand { arcs, .. } => arcs.clone(),
        _ => unreachable!("probe is a characteristic band"),
    };
    let dx = std::f64::consts::TAU / n as f64;
    Ok((0..n)
        .filter(|&k| arcs.iter().any(|a| a.contains((k as f64 + 0.5) * dx)))
        .collect())
}
