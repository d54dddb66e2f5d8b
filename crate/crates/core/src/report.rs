//! Analysis reports, file formats and renderings.
//!
//! File formats:
//!
//! * Reports: structured text with a fixed key order, or JSON.
//! * Witness data: CSV with header `x,u0x,u1`.
//! * Time series: CSV with header `t,E,I,observed_cum`.
//! * Trajectory dump: little-endian binary. The layout is the magic bytes
//!   `WVSTRAJ1`, then `n: u64`, `nt: u64` (stored levels minus one),
//!   `dt: f64` and `fields: u64 = 2`. After that come the `p` rows and then
//!   the `q` rows, each `levels × n` values of `f64`, row-major in time.
//! * Matrix dump: little-endian binary. The layout is the magic bytes
//!   `WVSGRAM1`, then `order: u64`, then `order²` complex pairs
//!   `(re: f64, im: f64)` in row-major order.
//! * Region renders: binary PGM (`P5`), or SVG with overlays.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::estimator::GramMatrix;
use crate::region::{serialize_region, GrayImage, RasterMask, SpacetimeRegion, Triangle, TRIANGLES};
use crate::symmetry::{FiberGraph, SymmetryVerdict};
use crate::verdict::{Tri, Verdict, WitnessKind};
use crate::wave::{conservation_functional, observed_series, Trajectory, WaveState};

const TRAJ_MAGIC: &[u8; 8] = b"WVSTRAJ1";
const GRAM_MAGIC: &[u8; 8] = b"WVSGRAM1";

/// One row of a simulation time series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub t: f64,
    /// Energy `E(t)`.
    #[serde(rename = "E")]
    pub energy: f64,
    /// Conserved functional `I(t)` of the declared pair.
    #[serde(rename = "I")]
    pub invariant: f64,
    /// `∫_{G ∩ [0,t]} |u_t|²`.
    pub observed_cum: f64,
}

/// Time series of a simulation together with the pair it was measured for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub xi_set: Vec<usize>,
    pub eta_set: Vec<usize>,
    pub rows: Vec<SeriesRow>,
}

impl SimulationSummary {
    /// Tabulates `E`, `I` and the cumulative observed energy of a grid
    /// trajectory.
    pub fn from_trajectory(traj: &Trajectory, mask: &RasterMask, xi_set: &[usize], eta_set: &[usize]) -> Self {
        let obs = observed_series(traj, mask);
        let rows = (0..traj.levels())
            .map(|i| SeriesRow {
                t: traj.times[i],
                energy: traj.energy(i),
                invariant: conservation_functional(traj, xi_set, eta_set, i),
                observed_cum: obs.get(i).copied().unwrap_or(*obs.last().unwrap_or(&0.0)),
            })
            .collect();
        Self {
            xi_set: xi_set.to_vec(),
            eta_set: eta_set.to_vec(),
            rows,
        }
    }

    /// `max_t |I(t) − I(0)|`.
    pub fn invariant_drift(&self) -> f64 {
        let i0 = self.rows.first().map_or(0.0, |r| r.invariant);
        self.rows.iter().map(|r| (r.invariant - i0).abs()).fold(0.0, f64::max)
    }
}

/// Complete result of an analysis run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    /// Normalized region text.
    pub region: String,
    pub seed: Option<u64>,
    pub verdict: Verdict,
    pub simulation: Option<SimulationSummary>,
}

impl AnalysisReport {
    pub fn new(region: &SpacetimeRegion, verdict: Verdict) -> Self {
        Self {
            region: serialize_region(region),
            seed: None,
            verdict,
            simulation: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports contain only finite numbers")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("malformed report: {e}")))
    }

    /// Human-readable rendering with a fixed key order.
    pub fn to_text(&self) -> String {
        let v = &self.verdict;
        let mut s = String::new();
        let r = &v.resolution;
        let _ = writeln!(s, "observable: {}", v.observable);
        let _ = writeln!(s, "ucp: {}", v.ucp);
        let _ = writeln!(s, "controllable: {}", v.controllable);
        let _ = writeln!(s, "resolution: n={} nt={} supersample={} T_eff={:.6}", r.n, r.nt, r.supersample, r.t_eff);
        if let Some(seed) = self.seed {
            let _ = writeln!(s, "seed: {seed}");
        }
        let _ = writeln!(s, "measure: {:.6}", v.measure);
        let g = &v.gcc;
        let _ = writeln!(s, "gcc.holds: {}", g.holds);
        let _ = writeln!(s, "gcc.c0_time: {:.6}", g.c0_est);
        let _ = writeln!(s, "gcc.c0_line: {:.6}", g.c0_line_est);
        let _ = writeln!(s, "gcc.c0_every_line: {:.6}", g.c0_every_line);
        let _ = writeln!(s, "gcc.floor: {:.6}", g.gcc_floor);
        let _ = writeln!(s, "gcc.weak_holds: {}", g.weak_holds);
        for w in &g.worst_fibers {
            let _ = writeln!(s, "gcc.weakest: {:?} node {} measure {:.6}", w.family, w.node, w.measure);
        }
        let dx = std::f64::consts::TAU / r.n as f64;
        match &v.symmetry {
            None => {
                let _ = writeln!(s, "symmetry: skipped (product region)");
            }
            Some(SymmetryVerdict::NoPair { components, fragile }) => {
                let _ = writeln!(s, "symmetry: no_pair ({components} component, fragile={fragile})");
            }
            Some(SymmetryVerdict::WeakGccFailure { xi_zero, eta_zero }) => {
                let _ = writeln!(s, "symmetry: weak_gcc_failure");
                let _ = writeln!(s, "symmetry.xi_zero: {}", format_arcs(xi_zero, dx));
                let _ = writeln!(s, "symmetry.eta_zero: {}", format_arcs(eta_zero, dx));
            }
            Some(SymmetryVerdict::Pair {
                decomposition,
                xi_set,
                eta_set,
                symdiff,
            }) => {
                let _ = writeln!(s, "symmetry: pair ({} classes)", decomposition.classes.len());
                let _ = writeln!(s, "symmetry.A: {}", format_arcs(xi_set, dx));
                let _ = writeln!(s, "symmetry.B: {}", format_arcs(eta_set, dx));
                let _ = writeln!(s, "symmetry.symdiff: {symdiff:.3e}");
            }
        }
        if let Some(p) = &v.product {
            let _ = writeln!(
                s,
                "product: |E|={:.6} |F|={:.6} sum_condition={}",
                p.time_measure, p.space_measure, p.sum_condition
            );
        }
        if let Some(w) = &v.witness {
            let kind = match w.kind {
                WitnessKind::SymmetryPair => "symmetry_pair",
                WitnessKind::ZeroFiber => "zero_fiber",
                WitnessKind::NecessityProbe => "necessity_probe",
            };
            let _ = writeln!(s, "witness.kind: {kind}");
            let _ = writeln!(s, "witness.total: {:.9}", w.total);
            let _ = writeln!(s, "witness.observed: {:.6e}", w.observed);
            let _ = writeln!(s, "witness.ratio: {:.6e}", w.ratio());
        }
        if let Some(trace) = &v.estimate {
            for e in trace {
                let _ = writeln!(s, "estimate.lambda_min[N={}]: {:.6e}", e.band.hi, e.lambda_min);
            }
        }
        if let Some(sim) = &self.simulation {
            let _ = writeln!(s, "simulation.invariant_drift: {:.3e}", sim.invariant_drift());
            if let Some(last) = sim.rows.last() {
                let _ = writeln!(s, "simulation.observed_total: {:.6e}", last.observed_cum);
            }
        }
        for (k, reason) in v.reasons.iter().enumerate() {
            let _ = writeln!(s, "reason[{k}]: {reason}");
        }
        let _ = writeln!(s, "region:");
        for line in self.region.lines() {
            let _ = writeln!(s, "  {line}");
        }
        s
    }
}

/// Formats a set of bins as a union of closed intervals in radians.
pub fn format_arcs(bins: &[usize], dx: f64) -> String {
    let mut sorted = bins.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut parts = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let start = sorted[i];
        let mut end = start;
        while i + 1 < sorted.len() && sorted[i + 1] == end + 1 {
            i += 1;
            end += 1;
        }
        parts.push(format!("[{:.4},{:.4}]", start as f64 * dx, (end + 1) as f64 * dx));
        i += 1;
    }
    if parts.is_empty() {
        "∅".to_string()
    } else {
        parts.join("∪")
    }
}

/// Exit status of `analyze` for an observability verdict.
pub fn exit_code(observable: Tri) -> i32 {
    match observable {
        Tri::Yes => 0,
        Tri::No => 10,
        Tri::Indeterminate => 11,
    }
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Writes witness data as CSV `x,u0x,u1`, one row per grid point.
pub fn write_witness_csv(path: &Path, state: &WaveState) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(["x", "u0x", "u1"]).map_err(|e| csv_err(path, e))?;
    let dx = std::f64::consts::TAU / state.n() as f64;
    for j in 0..state.n() {
        w.write_record([
            (j as f64 * dx).to_string(),
            state.u0x[j].to_string(),
            state.u1[j].to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Reads wave data written by [`write_witness_csv`] (only the `u0x` and
/// `u1` columns are used).
pub fn read_wave_csv(path: &Path) -> Result<WaveState> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let headers = r.headers().map_err(|e| csv_err(path, e))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::InvalidInput(format!("{}: missing column `{name}`", path.display())))
    };
    let (a, b) = (col("u0x")?, col("u1")?);
    let (mut u0x, mut u1) = (Vec::new(), Vec::new());
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let num = |k: usize| {
            rec.get(k)
                .and_then(|v| v.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::InvalidInput(format!("{}: non-numeric entry in row {:?}", path.display(), rec)))
        };
        u0x.push(num(a)?);
        u1.push(num(b)?);
    }
    WaveState::new(u0x, u1)
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::InvalidInput(format!("{}: {e}", path.display()))
}

/// Writes a time series as CSV `t,E,I,observed_cum`.
pub fn write_series_csv(path: &Path, rows: &[SeriesRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Binary trajectory dump; see the module documentation for the layout.
pub fn write_trajectory_dump(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut buf = Vec::with_capacity(40 + 16 * traj.levels() * traj.n);
    buf.extend_from_slice(TRAJ_MAGIC);
    buf.extend_from_slice(&(traj.n as u64).to_le_bytes());
    buf.extend_from_slice(&(traj.levels().saturating_sub(1) as u64).to_le_bytes());
    buf.extend_from_slice(&traj.dt.to_le_bytes());
    buf.extend_from_slice(&2u64.to_le_bytes());
    for field in [&traj.p, &traj.q] {
        for row in field {
            for v in row {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    std::fs::write(path, buf).map_err(|e| io_err(path, e))
}

/// Header and fields of a trajectory dump.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryDump {
    pub n: usize,
    pub nt: usize,
    pub dt: f64,
    pub p: Vec<Vec<f64>>,
    pub q: Vec<Vec<f64>>,
}

/// Reads a dump written by [`write_trajectory_dump`].
pub fn read_trajectory_dump(path: &Path) -> Result<TrajectoryDump> {
    let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
    let bad = |why: &str| Error::InvalidInput(format!("{}: {why}", path.display()));
    if bytes.len() < 40 || &bytes[..8] != TRAJ_MAGIC {
        return Err(bad("not a trajectory dump"));
    }
    let word = |k: usize| <[u8; 8]>::try_from(&bytes[8 + 8 * k..16 + 8 * k]).expect("8 bytes");
    let n = u64::from_le_bytes(word(0)) as usize;
    let nt = u64::from_le_bytes(word(1)) as usize;
    let dt = f64::from_le_bytes(word(2));
    let fields = u64::from_le_bytes(word(3)) as usize;
    let levels = nt + 1;
    if fields != 2 || bytes.len() != 40 + 8 * fields * levels * n {
        return Err(bad("inconsistent header"));
    }
    let mut values = bytes[40..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")));
    let mut field = || {
        (0..levels)
            .map(|_| values.by_ref().take(n).collect::<Vec<_>>())
            .collect::<Vec<_>>()
    };
    let p = field();
    let q = field();
    Ok(TrajectoryDump { n, nt, dt, p, q })
}

/// Binary matrix dump; see the module documentation for the layout.
pub fn write_matrix_dump(path: &Path, gram: &GramMatrix) -> Result<()> {
    let order = gram.q.nrows();
    let mut buf = Vec::with_capacity(16 + 16 * order * order);
    buf.extend_from_slice(GRAM_MAGIC);
    buf.extend_from_slice(&(order as u64).to_le_bytes());
    for r in 0..order {
        for c in 0..order {
            buf.extend_from_slice(&gram.q[(r, c)].to_le_bytes());
            buf.extend_from_slice(&0f64.to_le_bytes());
        }
    }
    std::fs::write(path, buf).map_err(|e| io_err(path, e))
}

/// Grayscale render: each cell is `scale × scale` pixels, time increasing
/// downwards and `x` to the right; every pixel shows the occupancy of the
/// triangle it falls in (black = inside `G`).
pub fn render_pgm(mask: &RasterMask, scale: usize) -> GrayImage {
    let scale = scale.max(1);
    let (n, nt) = (mask.n(), mask.nt());
    let (width, height) = (n * scale, nt * scale);
    let mut pixels = vec![0u8; width * height];
    for row in 0..height {
        let (i, u) = (row / scale, ((row % scale) as f64 + 0.5) / scale as f64);
        for col in 0..width {
            let (j, v) = (col / scale, ((col % scale) as f64 + 0.5) / scale as f64);
            let o = if scale == 1 {
                mask.w(i, j)
            } else {
                mask.quad(i, j)[Triangle::locate(u, v) as usize]
            };
            pixels[row * width + col] = (255.0 * (1.0 - o)).round().clamp(0.0, 255.0) as u8;
        }
    }
    GrayImage { width, height, pixels }
}

/// Overlays for [`render_svg`].
#[derive(Debug, Clone, Default)]
pub struct SvgOverlay<'a> {
    /// Draw this many evenly spaced `ξ`- and `η`-characteristics.
    pub characteristics: usize,
    /// Color each triangle of `G` by its fiber-graph component.
    pub components: Option<&'a FiberGraph>,
}

const PALETTE: [&str; 8] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666"];

/// SVG render in `(x, t)` coordinates, one polygon per occupied triangle.
pub fn render_svg(mask: &RasterMask, overlay: &SvgOverlay) -> String {
    let (n, nt) = (mask.n(), mask.nt());
    let px = 2.0;
    let (w, h) = (n as f64 * px, nt as f64 * px);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    for i in 0..nt {
        for j in 0..n {
            let o = mask.quad(i, j);
            for (k, tri) in TRIANGLES.iter().enumerate() {
                if o[k] <= 0.0 {
                    continue;
                }
                let color = overlay
                    .components
                    .and_then(|g| g.xi_label(tri.bins(i, j, n).0))
                    .map_or("black", |c| PALETTE[c % PALETTE.len()]);
                let pts: Vec<String> = tri
                    .local_vertices()
                    .iter()
                    .map(|&(u, v)| format!("{},{}", (j as f64 + v) * px, (i as f64 + u) * px))
                    .collect();
                let _ = writeln!(
                    s,
                    r#"<polygon points="{}" fill="{color}" fill-opacity="{:.3}"/>"#,
                    pts.join(" "),
                    o[k]
                );
            }
        }
    }
    if overlay.characteristics > 0 {
        let step = (n / overlay.characteristics).max(1);
        for k in (0..n).step_by(step) {
            let x0 = k as f64 * px;
            // x + t = const runs left as t grows; x − t = const runs right.
            for (dir, color) in [(-1.0, "#c00000"), (1.0, "#0040c0")] {
                let _ = writeln!(
                    s,
                    r#"<line x1="{x0}" y1="0" x2="{}" y2="{h}" stroke="{color}" stroke-width="0.5"/>"#,
                    x0 + dir * h
                );
            }
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Writes an SVG string to disk.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| io_err(path, e))
}
