//! Observability, unique continuation and controllability verdicts.
//!
//! * Observability holds exactly when every characteristic spends a uniform
//!   positive time in `G` and no nontrivial observable-symmetry pair exists.
//! * Unique continuation holds exactly when every characteristic meets `G`
//!   with positive time and no nontrivial pair exists.
//! * Controllability from `G` is dual to observability and is reported
//!   identically.
//!
//! At finite resolution a verdict can only be indeterminate near
//! thresholds. A "no" carries data that defeat the inequality, checked by
//! simulation.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};
use crate::estimator::{convergence_trace, EstimatorResult};
use crate::geometry::{check_gcc, fiber_profiles, FiberData, GccReport};
use crate::region::{rasterize, CharCoord, CircleArc, RasterMask, RegionExpr, Resolution, SpacetimeRegion, TimeInterval};
use crate::symmetry::{detect_osc, witness_from_pair, zero_fiber_witness, SymmetryVerdict};
use crate::wave::{observed_energy, solve_free_wave, solve_transport, total_energy, transport_observed_energy, WaveState};

/// A pair whose symmetric difference exceeds this fraction of `|G|` is not
/// trusted as an exact pair.
pub const SYM_TOL: f64 = 0.05;

/// Three-valued answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tri {
    Yes,
    No,
    /// Too close to a threshold to decide at this resolution.
    Indeterminate,
}

impl fmt::Display for Tri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tri::Yes => "yes",
            Tri::No => "no",
            Tri::Indeterminate => "indeterminate-at-resolution",
        })
    }
}

/// Grid a verdict was reached on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolutionInfo {
    pub n: usize,
    pub nt: usize,
    pub supersample: usize,
    pub t_eff: f64,
}

impl ResolutionInfo {
    fn of(mask: &RasterMask) -> Self {
        let res = mask.resolution();
        Self {
            n: res.n,
            nt: res.nt,
            supersample: mask.supersample(),
            t_eff: res.t_eff(),
        }
    }
}

/// How a witness was built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    /// Levels constant on the classes of an observable-symmetry pair.
    SymmetryPair,
    /// Data carried by characteristics that miss `G`.
    ZeroFiber,
    /// Data concentrated next to the weakest characteristic; the best
    /// bin-resolution datum when `G` misses a single line only.
    NecessityProbe,
}

/// Initial data defeating observability, with its simulated energies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub kind: WitnessKind,
    pub state: WaveState,
    /// `∫_G |u_t|²` of the free evolution.
    pub observed: f64,
    /// `‖∂_x u₀‖² + ‖u₁‖²`.
    pub total: f64,
}

impl Witness {
    pub fn ratio(&self) -> f64 {
        self.observed / self.total
    }

    fn simulate(kind: WitnessKind, state: WaveState, mask: &RasterMask) -> Result<Self> {
        let traj = solve_free_wave(&state, mask.resolution())?;
        Ok(Self {
            kind,
            observed: observed_energy(&traj, mask)?,
            total: total_energy(&state),
            state,
        })
    }
}

/// `|E| + |F| ≥ 2π` check for product regions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductDiagnostic {
    pub time_measure: f64,
    pub space_measure: f64,
    /// `|E| + |F| ≥ 2π`, necessary for the GCC on a product.
    pub sum_condition: bool,
}

/// Combined verdict and its evidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub observable: Tri,
    pub ucp: Tri,
    /// Identical to `observable` by duality.
    pub controllable: Tri,
    /// Ordered human-readable reasons.
    pub reasons: Vec<String>,
    pub resolution: ResolutionInfo,
    pub measure: f64,
    pub gcc: GccReport,
    /// Absent on the product fast path.
    pub symmetry: Option<SymmetryVerdict>,
    pub witness: Option<Witness>,
    pub estimate: Option<Vec<EstimatorResult>>,
    pub product: Option<ProductDiagnostic>,
}

impl Verdict {
    /// Recomputes the verdict classes from the attached component reports;
    /// equal to the stored classes for every verdict produced here.
    pub fn recompose(&self) -> (Tri, Tri) {
        let dx = std::f64::consts::TAU / self.resolution.n as f64;
        match &self.symmetry {
            Some(sym) => compose(&self.gcc, sym, dx, self.measure),
            None => (gcc_only(&self.gcc), gcc_only(&self.gcc)),
        }
    }
}

/// Options for [`classify_with`].
#[derive(Debug, Clone, Default)]
pub struct ClassifyOptions {
    /// Trial orders for the estimator evidence, if any.
    pub estimate_orders: Vec<usize>,
}

fn class_floor(sym_classes: &crate::symmetry::DecompositionPair) -> f64 {
    sym_classes
        .classes
        .iter()
        .map(|c| c.xi_measure.min(c.eta_measure))
        .fold(f64::INFINITY, f64::min)
}

/// Observability verdict from the GCC alone.
fn gcc_only(gcc: &GccReport) -> Tri {
    if gcc.c0_est <= 0.0 {
        Tri::No
    } else if gcc.c0_est <= 2.0 * gcc.gcc_floor {
        Tri::Indeterminate
    } else {
        Tri::Yes
    }
}

/// `(observable, ucp)` from the component reports.
fn compose(gcc: &GccReport, sym: &SymmetryVerdict, dx: f64, measure: f64) -> (Tri, Tri) {
    match sym {
        SymmetryVerdict::Pair {
            decomposition,
            symdiff,
            ..
        } => {
            let shaky = class_floor(decomposition) <= 2.0 * dx + 1e-12 || *symdiff > SYM_TOL * measure;
            let t = if shaky { Tri::Indeterminate } else { Tri::No };
            (t, t)
        }
        SymmetryVerdict::WeakGccFailure { xi_zero, eta_zero } => {
            let zero_measure = (xi_zero.len() + eta_zero.len()) as f64 * dx;
            let ucp = if zero_measure <= 2.0 * dx + 1e-12 {
                Tri::Indeterminate
            } else {
                Tri::No
            };
            (Tri::No, ucp)
        }
        SymmetryVerdict::NoPair { fragile, .. } => {
            let ucp = if *fragile || gcc.min_bin_average <= gcc.gcc_floor {
                Tri::Indeterminate
            } else {
                Tri::Yes
            };
            let observable = match gcc_only(gcc) {
                Tri::Yes if *fragile => Tri::Indeterminate,
                t => t,
            };
            (observable, ucp)
        }
    }
}

/// Classifies a mask.
pub fn classify(mask: &RasterMask) -> Result<Verdict> {
    classify_with(mask, &ClassifyOptions::default())
}

/// Classifies a mask, optionally attaching estimator evidence.
pub fn classify_with(mask: &RasterMask, options: &ClassifyOptions) -> Result<Verdict> {
    if mask.measure() <= 0.0 {
        return Err(Error::InvalidInput("the observation region is empty".into()));
    }
    let fibers = fiber_profiles(mask);
    let gcc = check_gcc(&fibers);
    let sym = detect_osc(&fibers, &gcc);
    let dx = fibers.dx;
    let (observable, ucp) = compose(&gcc, &sym, dx, fibers.measure);
    let mut reasons = vec![gcc_reason(&gcc)];
    reasons.push(match &sym {
        SymmetryVerdict::NoPair { fragile: false, .. } => {
            "fiber graph connected: no observable-symmetry pair".to_string()
        }
        SymmetryVerdict::NoPair { fragile: true, .. } => {
            "fiber graph connected only through exactly half-occupied diamonds: a pair may be hidden at this resolution"
                .to_string()
        }
        SymmetryVerdict::Pair {
            decomposition,
            xi_set,
            eta_set,
            symdiff,
        } => format!(
            "observable-symmetry pair with {} classes; chosen A has {} bins ({:.4} rad), B has {} bins ({:.4} rad), symmetric difference {:.3e}",
            decomposition.classes.len(),
            xi_set.len(),
            xi_set.len() as f64 * dx,
            eta_set.len(),
            eta_set.len() as f64 * dx,
            symdiff
        ),
        SymmetryVerdict::WeakGccFailure { xi_zero, eta_zero } => format!(
            "weak GCC fails: {} xi-bins and {} eta-bins miss G",
            xi_zero.len(),
            eta_zero.len()
        ),
    });
    let witness = if observable == Tri::Yes {
        None
    } else {
        let w = build_witness(mask, &fibers, &gcc, &sym)?;
        if let Some(w) = &w {
            reasons.push(format!(
                "witness ({:?}): observed {:.3e} of total energy {:.4} (ratio {:.3e})",
                w.kind,
                w.observed,
                w.total,
                w.ratio()
            ));
        }
        w
    };
    let estimate = if options.estimate_orders.is_empty() {
        None
    } else {
        let trace = convergence_trace(mask, &options.estimate_orders)?;
        reasons.push(format!(
            "minimal observed-energy ratio by trial order: {}",
            trace
                .iter()
                .map(|e| format!("N={}: {:.4e}", e.band.hi, e.lambda_min))
                .collect::<Vec<_>>()
                .join(", ")
        ));
        Some(trace)
    };
    reasons.push("controllability reported identical to observability (duality)".to_string());
    Ok(Verdict {
        observable,
        ucp,
        controllable: observable,
        reasons,
        resolution: ResolutionInfo::of(mask),
        measure: fibers.measure,
        gcc,
        symmetry: Some(sym),
        witness,
        estimate,
        product: None,
    })
}

fn gcc_reason(gcc: &GccReport) -> String {
    format!(
        "GCC {}: c0 = {:.4} (time), {:.4} (line measure), floor {:.4}; weak GCC {}",
        if gcc.holds { "holds" } else { "fails" },
        gcc.c0_est,
        gcc.c0_line_est,
        gcc.gcc_floor,
        if gcc.weak_holds { "holds" } else { "fails" }
    )
}

fn build_witness(mask: &RasterMask, fibers: &FiberData, gcc: &GccReport, sym: &SymmetryVerdict) -> Result<Option<Witness>> {
    let res = mask.resolution();
    Ok(match sym {
        SymmetryVerdict::Pair { xi_set, eta_set, .. } => {
            let w = witness_from_pair(xi_set, eta_set, res)?;
            Some(Witness::simulate(WitnessKind::SymmetryPair, w.state, mask)?)
        }
        SymmetryVerdict::WeakGccFailure { xi_zero, eta_zero } => {
            let state = zero_fiber_witness(xi_zero, eta_zero, res)?;
            Some(Witness::simulate(WitnessKind::ZeroFiber, state, mask)?)
        }
        SymmetryVerdict::NoPair { .. } => match gcc.worst_fibers.first() {
            Some(worst) => {
                let state = straddling_datum(fibers.n, worst.family, worst.node);
                Some(Witness::simulate(WitnessKind::NecessityProbe, state, mask)?)
            }
            None => None,
        },
    })
}

/// Mean-free wave data `±1` on the two bins meeting at a node line, carried
/// by that line's family only.
fn straddling_datum(n: usize, family: CharCoord, node: usize) -> WaveState {
    let mut f = vec![0.0; n];
    f[(node + n - 1) % n] = 1.0;
    f[node % n] = -1.0;
    let zero = vec![0.0; n];
    match family {
        CharCoord::Xi => WaveState::from_characteristic(&f, &zero),
        CharCoord::Eta => WaveState::from_characteristic(&zero, &f),
    }
}

/// Fast path for products `E × F`: observable exactly when the GCC holds.
pub fn classify_product(times: &[TimeInterval], arcs: &[CircleArc], horizon: f64, n: usize, supersample: usize) -> Result<Verdict> {
    if times.is_empty() || arcs.is_empty() {
        return Err(Error::InvalidInput("both product factors must be nonempty".into()));
    }
    let region = SpacetimeRegion::new(
        horizon,
        RegionExpr::Product {
            times: times.to_vec(),
            arcs: arcs.to_vec(),
        },
    )
    .ok_or_else(|| Error::InvalidInput("horizon must be positive".into()))?;
    let mask = rasterize(&region, Resolution::new(n, horizon)?, supersample)?;
    if mask.measure() <= 0.0 {
        return Err(Error::InvalidInput("the product region is empty".into()));
    }
    let fibers = fiber_profiles(&mask);
    let gcc = check_gcc(&fibers);
    let time_measure: f64 = union_length(times.iter().map(|i| (i.lo, i.hi)).collect());
    let space_measure: f64 = arc_union_length(arcs);
    let diag = ProductDiagnostic {
        time_measure,
        space_measure,
        sum_condition: time_measure + space_measure >= std::f64::consts::TAU - 1e-9,
    };
    let observable = gcc_only(&gcc);
    let mut reasons = vec![
        gcc_reason(&gcc),
        "product region: observable-symmetry pairs cannot occur, so observability is equivalent to the GCC".to_string(),
        format!(
            "|E| + |F| = {:.4} + {:.4} {} 2π",
            time_measure,
            space_measure,
            if diag.sum_condition { ">=" } else { "<" }
        ),
    ];
    let witness = if observable == Tri::Yes {
        None
    } else {
        let sym = detect_osc(&fibers, &gcc);
        let w = build_witness(&mask, &fibers, &gcc, &sym)?;
        if let Some(w) = &w {
            reasons.push(format!("witness ({:?}): ratio {:.3e}", w.kind, w.ratio()));
        }
        w
    };
    Ok(Verdict {
        observable,
        ucp: if gcc.weak_holds { Tri::Yes } else { Tri::No },
        controllable: observable,
        reasons,
        resolution: ResolutionInfo::of(&mask),
        measure: fibers.measure,
        gcc,
        symmetry: None,
        witness,
        estimate: None,
        product: Some(diag),
    })
}

fn union_length(mut spans: Vec<(f64, f64)>) -> f64 {
    spans.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut total = 0.0;
    let mut cur: Option<(f64, f64)> = None;
    for (a, b) in spans {
        cur = match cur {
            Some((lo, hi)) if a <= hi => Some((lo, hi.max(b))),
            Some((lo, hi)) => {
                total += hi - lo;
                Some((a, b))
            }
            None => Some((a, b)),
        };
    }
    total + cur.map_or(0.0, |(lo, hi)| hi - lo)
}

fn arc_union_length(arcs: &[CircleArc]) -> f64 {
    let tau = std::f64::consts::TAU;
    let mut spans = Vec::new();
    for a in arcs {
        let s = a.start.rem_euclid(tau);
        let e = s + a.len();
        if e > tau {
            spans.push((s, tau));
            spans.push((0.0, e - tau));
        } else {
            spans.push((s, e));
        }
    }
    union_length(spans).min(tau)
}

/// For open regions: if every characteristic line (not just almost every)
/// spends more than twice the floor in `G`, no observable-symmetry pair can
/// exist and observability holds. Otherwise falls back to [`classify`].
pub fn classify_open_everywhere(mask: &RasterMask, region: &SpacetimeRegion) -> Result<Verdict> {
    if !region.is_open() {
        return Err(Error::InvalidInput(
            "region is not declared open (raster literals, differences and complements are excluded)".into(),
        ));
    }
    let mut v = classify(mask)?;
    if v.gcc.c0_every_line > 2.0 * v.gcc.gcc_floor {
        v.reasons.insert(
            0,
            format!(
                "every characteristic line spends at least {:.4} in the open region: observability holds",
                v.gcc.c0_every_line
            ),
        );
        v.observable = Tri::Yes;
        v.controllable = Tri::Yes;
        v.ucp = Tri::Yes;
        v.witness = None;
    } else {
        v.reasons.insert(
            0,
            format!(
                "every-line GCC fails (least on-line time {:.4}); falling back to the almost-everywhere analysis",
                v.gcc.c0_every_line
            ),
        );
    }
    Ok(v)
}

/// One probe of the necessity of the GCC.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NecessityProbe {
    pub family: CharCoord,
    pub bin: usize,
    /// Bin-average time the probed characteristics spend in `G`.
    pub fiber_mass: f64,
    /// `∫_G|u|²/‖u₀‖²` for transport of the bin indicator.
    pub transport_ratio: f64,
    /// `∫_G|u_t|²/E` for the wave lifted from the same datum.
    pub wave_ratio: f64,
    /// `fiber_mass + dt`.
    pub bound: f64,
    pub passes: bool,
}

/// Probes of the weakest characteristic bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NecessityReport {
    pub probes: Vec<NecessityProbe>,
    pub all_pass: bool,
    /// Smallest wave ratio over the probes.
    pub min_wave_ratio: f64,
}

/// Concentrates transport data on the `trials` weakest bins (both
/// families), lifts each to a wave travelling along the same family, and
/// checks that the observed fraction does not exceed the fiber mass.
pub fn gcc_necessity_check(mask: &RasterMask, trials: usize) -> Result<NecessityReport> {
    let fibers = fiber_profiles(mask);
    let res = mask.resolution();
    let n = res.n;
    let mut bins: Vec<(CharCoord, usize, f64)> = [CharCoord::Xi, CharCoord::Eta]
        .iter()
        .flat_map(|&fam| {
            fibers
                .bin_averages(fam)
                .iter()
                .enumerate()
                .map(move |(b, &m)| (fam, b, m))
                .collect::<Vec<_>>()
        })
        .collect();
    bins.sort_by(|a, b| a.2.total_cmp(&b.2).then(a.1.cmp(&b.1)));
    let mut probes = Vec::new();
    for &(family, bin, mass) in bins.iter().take(trials.max(1)) {
        let mut f = vec![0.0; n];
        f[bin] = 1.0;
        let direction = if family == CharCoord::Xi { -1 } else { 1 };
        let traj = solve_transport(&f, direction, res)?;
        let transport_ratio = transport_observed_energy(&traj, mask)? / res.dx();
        let zero = vec![0.0; n];
        let state = match family {
            CharCoord::Xi => WaveState::from_characteristic(&f, &zero),
            CharCoord::Eta => WaveState::from_characteristic(&zero, &f),
        };
        let wtraj = solve_free_wave(&state, res)?;
        let wave_ratio = observed_energy(&wtraj, mask)? / total_energy(&state);
        let bound = mass + res.dt();
        probes.push(NecessityProbe {
            family,
            bin,
            fiber_mass: mass,
            transport_ratio,
            wave_ratio,
            bound,
            passes: wave_ratio <= bound + 1e-12 && transport_ratio <= bound + 1e-12,
        });
    }
    let min_wave_ratio = probes.iter().map(|p| p.wave_ratio).fold(f64::INFINITY, f64::min);
    Ok(NecessityReport {
        all_pass: probes.iter().all(|p| p.passes),
        probes,
        min_wave_ratio,
    })
}
