//! Observable-symmetry pairs and the initial data they make invisible.
//!
//! A free wave has `u_ξ` constant along `ξ`-lines and `u_η` constant along
//! `η`-lines, so `u_t = u_ξ − u_η` vanishes on `G` exactly when the two
//! fiber values agree wherever a `ξ`-line and an `η`-line meet inside `G`.
//! Each such meeting equates one `ξ`-bin with one `η`-bin. Connected
//! components of the resulting bipartite graph are the classes on which
//! invisible data must be constant. One component means no nontrivial pair
//! exists; several components are a decomposition pair.

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::geometry::{FiberData, GccReport, ZERO_MASS};
use crate::region::Resolution;
use crate::wave::WaveState;

/// A `(ξ-bin, η-bin)` diamond of `G` joins its two fibers when more than
/// this fraction of it is occupied. Exactly half-occupied diamonds are
/// ambiguous at the raster scale and do not join.
pub const EDGE_COUPLING: f64 = 0.5;

/// Largest `n` accepted by [`brute_force_osc`].
pub const BRUTE_FORCE_MAX_N: usize = 12;

/// One class `(A_k, B_k)` of a decomposition pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassPair {
    /// `ξ`-bins of the class, ascending.
    pub xi_bins: Vec<usize>,
    /// `η`-bins of the class, ascending.
    pub eta_bins: Vec<usize>,
    /// `|A_k|` in radians.
    pub xi_measure: f64,
    /// `|B_k|` in radians.
    pub eta_measure: f64,
}

/// Partition of the fiber bins into classes `(A_k, B_k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionPair {
    pub classes: Vec<ClassPair>,
}

/// Bipartite graph on `ξ`-bins (nodes `0..n`) and `η`-bins (nodes `n..2n`).
#[derive(Debug, Clone)]
pub struct FiberGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    /// Component label per node; `None` for nodes without edges.
    labels: Vec<Option<usize>>,
    classes: Vec<ClassPair>,
}

impl FiberGraph {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Edges `(ξ-bin, η-bin)`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn xi_label(&self, p: usize) -> Option<usize> {
        self.labels[p]
    }

    pub fn eta_label(&self, q: usize) -> Option<usize> {
        self.labels[self.n + q]
    }

    /// Components sorted by `ξ`-measure descending, ties by lowest bin.
    pub fn components(&self) -> &[ClassPair] {
        &self.classes
    }

    pub fn component_count(&self) -> usize {
        self.classes.len()
    }
}

/// Adjacency of the fiber graph as an `n × n` boolean matrix.
///
/// A diamond joins its two bins when it is more than half occupied. A bin that
/// carries mass but has no such diamond (for instance, one only grazed by
/// `G`) is joined to its most-occupied diamonds so that it is not treated as
/// a free class of its own.
///
/// With `strict`, exactly half-occupied diamonds do not count; comparing the
/// two graphs tells whether connectivity hinges on such ties.
fn adjacency(f: &FiberData, strict: bool) -> Vec<bool> {
    let n = f.n;
    let mut adj: Vec<bool> = f
        .coupling
        .iter()
        .map(|&c| if strict { c > EDGE_COUPLING + 1e-12 } else { c >= EDGE_COUPLING - 1e-12 })
        .collect();
    let connect_best = |adj: &mut Vec<bool>, cells: &[usize]| {
        let best = cells.iter().map(|&c| f.coupling[c]).fold(0.0, f64::max);
        if best > 0.0 {
            for &c in cells {
                if f.coupling[c] >= best * (1.0 - 1e-9) {
                    adj[c] = true;
                }
            }
        }
    };
    for p in 0..n {
        let row: Vec<usize> = (0..n).map(|q| p * n + q).collect();
        if f.m_plus[p] > ZERO_MASS && !row.iter().any(|&c| adj[c]) {
            connect_best(&mut adj, &row);
        }
    }
    for q in 0..n {
        let col: Vec<usize> = (0..n).map(|p| p * n + q).collect();
        if f.m_minus[q] > ZERO_MASS && !col.iter().any(|&c| adj[c]) {
            connect_best(&mut adj, &col);
        }
    }
    adj
}

/// Builds the fiber graph and its components.
pub fn build_fiber_graph(fibers: &FiberData) -> FiberGraph {
    graph_from(fibers, adjacency(fibers, false))
}

fn graph_from(fibers: &FiberData, adj: Vec<bool>) -> FiberGraph {
    let n = fibers.n;
    let mut uf = UnionFind::<usize>::new(2 * n);
    let mut edges = Vec::new();
    let mut has_edge = vec![false; 2 * n];
    for p in 0..n {
        for q in 0..n {
            if adj[p * n + q] {
                edges.push((p, q));
                uf.union(p, n + q);
                has_edge[p] = true;
                has_edge[n + q] = true;
            }
        }
    }
    let roots = uf.into_labeling();
    let mut by_root: Vec<(usize, ClassPair)> = Vec::new();
    for node in (0..2 * n).filter(|&v| has_edge[v]) {
        let root = roots[node];
        let idx = match by_root.iter().position(|(r, _)| *r == root) {
            Some(i) => i,
            None => {
                by_root.push((
                    root,
                    ClassPair {
                        xi_bins: Vec::new(),
                        eta_bins: Vec::new(),
                        xi_measure: 0.0,
                        eta_measure: 0.0,
                    },
                ));
                by_root.len() - 1
            }
        };
        let class = &mut by_root[idx].1;
        if node < n {
            class.xi_bins.push(node);
        } else {
            class.eta_bins.push(node - n);
        }
    }
    let mut classes: Vec<ClassPair> = by_root.into_iter().map(|(_, c)| c).collect();
    for c in &mut classes {
        c.xi_measure = c.xi_bins.len() as f64 * fibers.dx;
        c.eta_measure = c.eta_bins.len() as f64 * fibers.dx;
    }
    let first_bin = |c: &ClassPair| {
        let a = c.xi_bins.first().copied().unwrap_or(usize::MAX);
        let b = c.eta_bins.first().copied().unwrap_or(usize::MAX);
        a.min(b)
    };
    classes.sort_by(|a, b| {
        b.xi_bins
            .len()
            .cmp(&a.xi_bins.len())
            .then_with(|| first_bin(a).cmp(&first_bin(b)))
    });
    let mut labels = vec![None; 2 * n];
    for (k, c) in classes.iter().enumerate() {
        for &p in &c.xi_bins {
            labels[p] = Some(k);
        }
        for &q in &c.eta_bins {
            labels[n + q] = Some(k);
        }
    }
    FiberGraph {
        n,
        edges,
        labels,
        classes,
    }
}

/// Outcome of the observable-symmetry analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SymmetryVerdict {
    /// The fiber graph is connected: no nontrivial pair exists. `fragile`
    /// records that the graph falls apart once exactly half-occupied
    /// diamonds are dropped, so connectivity rests on boundary ties.
    NoPair { components: usize, fragile: bool },
    /// A nontrivial pair `(A, B)`, the first class of `decomposition`.
    Pair {
        decomposition: DecompositionPair,
        xi_set: Vec<usize>,
        eta_set: Vec<usize>,
        /// `osc_check_pair` of the chosen pair, in `(t, x)` area units.
        symdiff: f64,
    },
    /// Some characteristic bins miss `G` entirely.
    WeakGccFailure {
        xi_zero: Vec<usize>,
        eta_zero: Vec<usize>,
    },
}

impl SymmetryVerdict {
    /// Name of the verdict class, used to compare two analyses.
    pub fn class_name(&self) -> &'static str {
        match self {
            SymmetryVerdict::NoPair { .. } => "no_pair",
            SymmetryVerdict::Pair { .. } => "pair",
            SymmetryVerdict::WeakGccFailure { .. } => "weak_gcc_failure",
        }
    }
}

/// Searches for a nontrivial observable-symmetry pair.
pub fn detect_osc(fibers: &FiberData, gcc: &GccReport) -> SymmetryVerdict {
    if !gcc.weak_holds {
        return SymmetryVerdict::WeakGccFailure {
            xi_zero: gcc.xi_zero.clone(),
            eta_zero: gcc.eta_zero.clone(),
        };
    }
    let graph = build_fiber_graph(fibers);
    if graph.component_count() <= 1 {
        let strict = graph_from(fibers, adjacency(fibers, true));
        return SymmetryVerdict::NoPair {
            components: graph.component_count(),
            fragile: strict.component_count() > 1,
        };
    }
    let first = graph.classes[0].clone();
    let symdiff = osc_check_pair(fibers, &first.xi_bins, &first.eta_bins);
    SymmetryVerdict::Pair {
        decomposition: DecompositionPair {
            classes: graph.classes,
        },
        xi_set: first.xi_bins,
        eta_set: first.eta_bins,
        symdiff,
    }
}

fn indicator(n: usize, bins: &[usize]) -> Vec<bool> {
    let mut v = vec![false; n];
    for &b in bins {
        v[b % n] = true;
    }
    v
}

/// Area of `(G ∩ L_{ξ∈A}) Δ (G ∩ L_{η∈B})` at the raster level, in `(t, x)`
/// area units. Zero exactly when `(A, B)` is a raster pair.
pub fn osc_check_pair(fibers: &FiberData, xi_set: &[usize], eta_set: &[usize]) -> f64 {
    let n = fibers.n;
    let a = indicator(n, xi_set);
    let b = indicator(n, eta_set);
    let mut s = 0.0;
    for p in 0..n {
        for q in 0..n {
            if a[p] != b[q] {
                s += fibers.mu(p, q);
            }
        }
    }
    s * fibers.dx
}

/// Exhaustive search over all `ξ`-bin subsets; an oracle for [`detect_osc`].
///
/// For each nonempty proper `A`, the only candidate partner is the set `B`
/// of `η`-bins adjacent to `A`; the pair is accepted when every `ξ`-bin
/// adjacent to `B` lies in `A`.
pub fn brute_force_osc(fibers: &FiberData) -> Result<SymmetryVerdict> {
    let n = fibers.n;
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::TooLarge {
            n,
            limit: BRUTE_FORCE_MAX_N,
        });
    }
    let zeros = |v: &[f64]| -> Vec<usize> { (0..n).filter(|&k| v[k] <= ZERO_MASS).collect() };
    let (xi_zero, eta_zero) = (zeros(&fibers.m_plus), zeros(&fibers.m_minus));
    if !xi_zero.is_empty() || !eta_zero.is_empty() {
        return Ok(SymmetryVerdict::WeakGccFailure { xi_zero, eta_zero });
    }
    let adj = adjacency(fibers, false);
    // Neighbour masks as bit sets.
    let xi_nb: Vec<u32> = (0..n)
        .map(|p| (0..n).filter(|&q| adj[p * n + q]).fold(0, |m, q| m | 1 << q))
        .collect();
    let eta_nb: Vec<u32> = (0..n)
        .map(|q| (0..n).filter(|&p| adj[p * n + q]).fold(0, |m, p| m | 1 << p))
        .collect();
    let full = (1u32 << n) - 1;
    let union_of = |mask: u32, nb: &[u32]| {
        (0..n)
            .filter(|&k| mask >> k & 1 == 1)
            .fold(0u32, |m, k| m | nb[k])
    };
    let bins = |mask: u32| -> Vec<usize> { (0..n).filter(|&k| mask >> k & 1 == 1).collect() };
    for a in 1..full {
        let b = union_of(a, &xi_nb);
        if union_of(b, &eta_nb) & !a == 0 {
            let (xa, eb) = (bins(a), bins(b));
            let (xc, ec) = (bins(full & !a), bins(full & !b));
            let class = |x: Vec<usize>, e: Vec<usize>| ClassPair {
                xi_measure: x.len() as f64 * fibers.dx,
                eta_measure: e.len() as f64 * fibers.dx,
                xi_bins: x,
                eta_bins: e,
            };
            let symdiff = osc_check_pair(fibers, &xa, &eb);
            return Ok(SymmetryVerdict::Pair {
                decomposition: DecompositionPair {
                    classes: vec![class(xa.clone(), eb.clone()), class(xc, ec)],
                },
                xi_set: xa,
                eta_set: eb,
                symdiff,
            });
        }
    }
    Ok(SymmetryVerdict::NoPair {
        components: 1,
        fragile: false,
    })
}

/// Invisible initial data built from a pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub state: WaveState,
    /// Level `a` taken by `u_ξ` off `A` and by `u_η` off `B`.
    pub level: f64,
    /// Predicted `I(0) = 2(|A| + |B|)` with `U = u_x + u_t`, `V = u_x − u_t`.
    pub predicted_invariant: f64,
}

/// Data with `u_ξ|_{t=0} = χ_A + aχ_{Aᶜ}` and `u_η|_{t=0} = χ_B + aχ_{Bᶜ}`,
/// where `a = −(|A|+|B|)/(4π−|A|−|B|)` makes `u_x|_{t=0}` mean-free.
pub fn witness_from_pair(xi_set: &[usize], eta_set: &[usize], res: Resolution) -> Result<Witness> {
    let n = res.n;
    let a_ind = indicator(n, xi_set);
    let b_ind = indicator(n, eta_set);
    let na = a_ind.iter().filter(|&&v| v).count();
    let nb = b_ind.iter().filter(|&&v| v).count();
    if (na == 0 && nb == 0) || (na == n && nb == n) {
        return Err(Error::InvalidInput(
            "trivial pair: both sets empty or both full".into(),
        ));
    }
    if na + nb == 2 * n {
        return Err(Error::InvalidInput(
            "|A| + |B| = 4π leaves the level a undefined".into(),
        ));
    }
    let dx = res.dx();
    let (ma, mb) = (na as f64 * dx, nb as f64 * dx);
    let level = -(ma + mb) / (2.0 * TAU - ma - mb);
    let pick = |inside: bool| if inside { 1.0 } else { level };
    let p: Vec<f64> = a_ind.iter().map(|&v| pick(v)).collect();
    let q: Vec<f64> = b_ind.iter().map(|&v| pick(v)).collect();
    Ok(Witness {
        state: WaveState::from_characteristic(&p, &q),
        level,
        predicted_invariant: 2.0 * (ma + mb),
    })
}

/// Invisible data carried by fibers that miss `G`.
///
/// With `η`-bins `Z` missing `G`, `u_η = φ` supported on `Z` and `u_ξ = 0`
/// give `u_t = −u_η(x − t) = 0` on `G`. `φ` takes the value `+1` on the
/// first half of `Z` and a negative constant on the rest so that `u_x` is
/// mean-free. A single empty bin cannot carry mean-free data; it is paired
/// with a uniform `−1/n` background, which is visible only at order `dx`.
/// `ξ`-bins are handled symmetrically and take precedence.
pub fn zero_fiber_witness(xi_zero: &[usize], eta_zero: &[usize], res: Resolution) -> Result<WaveState> {
    let n = res.n;
    let (set, on_xi) = if !xi_zero.is_empty() {
        (xi_zero, true)
    } else if !eta_zero.is_empty() {
        (eta_zero, false)
    } else {
        return Err(Error::InvalidInput("no empty fibers".into()));
    };
    let mut phi = vec![0.0; n];
    if set.len() == 1 {
        phi.iter_mut().for_each(|v| *v = -1.0 / n as f64);
        phi[set[0] % n] += 1.0;
    } else {
        let h1 = set.len() / 2;
        let h2 = set.len() - h1;
        for (k, &b) in set.iter().enumerate() {
            phi[b % n] = if k < h1 { 1.0 } else { -(h1 as f64) / h2 as f64 };
        }
    }
    let zero = vec![0.0; n];
    Ok(if on_xi {
        WaveState::from_characteristic(&phi, &zero)
    } else {
        WaveState::from_characteristic(&zero, &phi)
    })
}

/// A step function `Σ s_k χ_{A_k}` on the bin grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    pub n: usize,
    /// `(s_k, A_k)` pieces.
    pub pieces: Vec<(f64, Vec<usize>)>,
}

impl StepFunction {
    /// Groups bin samples by value (within `tol`).
    pub fn from_samples(values: &[f64], tol: f64) -> Self {
        let mut pieces: Vec<(f64, Vec<usize>)> = Vec::new();
        for (j, &v) in values.iter().enumerate() {
            match pieces.iter_mut().find(|(s, _)| (s - v).abs() <= tol) {
                Some((_, bins)) => bins.push(j),
                None => pieces.push((v, vec![j])),
            }
        }
        Self {
            n: values.len(),
            pieces,
        }
    }
}

/// Membership of a step-function pair in the symmetric classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum SymmetricClass {
    /// Finitely many classes.
    Finite { k: usize, levels: Vec<f64> },
    /// A truncation of a countable family of classes.
    Countable { k: usize, levels: Vec<f64> },
    /// The named clause of the definition fails.
    Neither { violated: String },
}

/// Tests whether `(f, g)` is a symmetric function pair: common distinct
/// levels, `{A_k}` and `{B_k}` each a disjoint cover of the circle, and
/// `∫(f + g) = 0`. `truncated` marks a finite representation of a
/// countable family.
pub fn classify_symmetric_pair(f: &StepFunction, g: &StepFunction, truncated: bool) -> SymmetricClass {
    let neither = |s: &str| SymmetricClass::Neither {
        violated: s.to_string(),
    };
    if f.n != g.n || f.n == 0 {
        return neither("functions live on different grids");
    }
    let n = f.n;
    for h in [f, g] {
        let mut seen = vec![false; n];
        for (_, bins) in &h.pieces {
            for &b in bins {
                if b >= n || seen[b] {
                    return neither("level sets are not disjoint");
                }
                seen[b] = true;
            }
        }
        if seen.iter().any(|&s| !s) {
            return neither("level sets do not cover the circle");
        }
        for (i, (s, _)) in h.pieces.iter().enumerate() {
            if h.pieces[..i].iter().any(|(t, _)| t == s) {
                return neither("levels are not distinct");
            }
        }
    }
    let mut levels: Vec<f64> = f.pieces.iter().map(|(s, _)| *s).collect();
    for (s, _) in &g.pieces {
        if !levels.contains(s) {
            levels.push(*s);
        }
    }
    let dx = TAU / n as f64;
    let mean: f64 = f
        .pieces
        .iter()
        .chain(&g.pieces)
        .map(|(s, bins)| s * bins.len() as f64 * dx)
        .sum();
    let scale: f64 = f
        .pieces
        .iter()
        .chain(&g.pieces)
        .map(|(s, bins)| s.abs() * bins.len() as f64 * dx)
        .sum();
    if mean.abs() > 1e-9 * scale.max(1.0) {
        return neither("integral of f + g is not zero");
    }
    let k = levels.len();
    if truncated {
        SymmetricClass::Countable { k, levels }
    } else {
        SymmetricClass::Finite { k, levels }
    }
}
