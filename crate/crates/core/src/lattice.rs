//! Lattices T·ℤⁿ, node sets, separation and covering metrics, and the exact
//! packing/covering decisions for lattice sampling and interpolation.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::certificate::{Certificate, Verdict};
use crate::error::{check_dim, CertError, Result};
use crate::geometry::{ConvexBody, Euclidean, Level};
use crate::spectrum::{norm, Spectrum};

/// Upper bound on enumerated coefficient boxes and grid sizes.
const ENUM_LIMIT: u64 = 50_000_000;

/// The lattice T·ℤⁿ; the columns of T are the basis vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    generator: DMatrix<f64>,
    inverse: DMatrix<f64>,
    det: f64,
}

impl Lattice {
    pub fn new(t: DMatrix<f64>) -> Result<Self> {
        let n = t.nrows();
        if n == 0 || t.ncols() != n {
            return Err(CertError::InvalidLattice(format!(
                "generator must be square, got {}x{}",
                t.nrows(),
                t.ncols()
            )));
        }
        if t.iter().any(|v| !v.is_finite()) {
            return Err(CertError::InvalidLattice("generator has non-finite entries".into()));
        }
        let det = t.determinant();
        let scale = t.norm().powi(n as i32);
        if !(det.abs() > 1e-12 * scale) {
            return Err(CertError::InvalidLattice(format!(
                "generator is singular (|det| = {:e})",
                det.abs()
            )));
        }
        let inverse = t
            .clone()
            .try_inverse()
            .ok_or_else(|| CertError::InvalidLattice("generator is not invertible".into()))?;
        Ok(Lattice { generator: t, inverse, det: det.abs() })
    }

    /// Generator from rows (row-major).
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(CertError::InvalidLattice("generator must be a square matrix".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(DMatrix::from_row_slice(n, n, &flat))
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(DMatrix::identity(n, n))
    }

    pub fn diag(d: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(d)))
    }

    /// a·ℤⁿ.
    pub fn scaled_identity(n: usize, a: f64) -> Result<Self> {
        Self::diag(&vec![a; n])
    }

    /// Hexagonal lattice with basis (1,0), (1/2, √3/2).
    pub fn hexagonal() -> Result<Self> {
        Self::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 3f64.sqrt() / 2.0]))
    }

    pub fn dim(&self) -> usize {
        self.generator.nrows()
    }

    pub fn generator(&self) -> &DMatrix<f64> {
        &self.generator
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| self.generator.row(i).iter().copied().collect())
            .collect()
    }

    /// |det T|.
    pub fn det(&self) -> f64 {
        self.det
    }

    /// Number of points per unit volume, 1/det.
    pub fn density(&self) -> f64 {
        1.0 / self.det
    }

    /// The dual lattice, generated by (T⁻¹)ᵀ.
    pub fn dual(&self) -> Lattice {
        let g = self.inverse.transpose();
        let inverse = self.generator.transpose();
        Lattice { generator: g, inverse, det: 1.0 / self.det }
    }

    pub fn scale(&self, a: f64) -> Result<Lattice> {
        Lattice::new(&self.generator * a)
    }

    pub fn basis(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|j| self.generator.column(j).iter().copied().collect())
            .collect()
    }

    pub fn point(&self, k: &[i64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.generator[(i, j)] * k[j] as f64).sum())
            .collect()
    }

    /// Coordinates T⁻¹x.
    pub fn coords(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.inverse[(i, j)] * x[j]).sum())
            .collect()
    }

    /// Whether x lies in the lattice (up to `tol` in coefficient space).
    pub fn contains_vector(&self, x: &[f64], tol: f64) -> bool {
        self.coords(x).iter().all(|c| (c - c.round()).abs() <= tol)
    }

    /// All lattice vectors of Euclidean norm ≤ radius.
    pub fn vectors_within(&self, radius: f64) -> Result<Vec<Vec<f64>>> {
        let n = self.dim();
        let bounds: Vec<i64> = (0..n)
            .map(|i| {
                let rn = self.inverse.row(i).norm();
                (radius * rn + 1e-9).floor() as i64
            })
            .collect();
        let total: u64 = bounds
            .iter()
            .try_fold(1u64, |a, b| a.checked_mul(2 * *b as u64 + 1))
            .unwrap_or(u64::MAX);
        if total > ENUM_LIMIT {
            return Err(CertError::Unsupported(format!(
                "enumeration of {total} coefficient vectors exceeds the limit"
            )));
        }
        let mut out = Vec::new();
        let mut k: Vec<i64> = bounds.iter().map(|b| -b).collect();
        let lim = radius * (1.0 + 1e-12);
        loop {
            let p = self.point(&k);
            if norm(&p) <= lim {
                out.push(p);
            }
            let mut i = 0;
            loop {
                if i == n {
                    return Ok(out);
                }
                if k[i] < bounds[i] {
                    k[i] += 1;
                    break;
                }
                k[i] = -bounds[i];
                i += 1;
            }
        }
    }
}

impl Serialize for Lattice {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Out {
            generator: Vec<Vec<f64>>,
        }
        Out { generator: self.rows() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Lattice {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Gen {
            Nested(Vec<Vec<f64>>),
            Flat(Vec<f64>),
        }
        #[derive(Deserialize)]
        struct In {
            generator: Gen,
        }
        let raw = In::deserialize(d)?;
        let rows = match raw.generator {
            Gen::Nested(r) => r,
            Gen::Flat(f) => {
                let n = (f.len() as f64).sqrt().round() as usize;
                if n * n != f.len() || n == 0 {
                    return Err(serde::de::Error::custom("flat generator length is not a square"));
                }
                f.chunks(n).map(|c| c.to_vec()).collect()
            }
        };
        Lattice::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// Displacement of one base-lattice point, addressed by its coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Displacement {
    pub coeffs: Vec<i64>,
    pub delta: Vec<f64>,
}

/// A countable or finite configuration of nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NodeSet {
    Finite { points: Vec<Vec<f64>> },
    Lattice { lattice: Lattice },
    /// ⋃ⱼ (base + uⱼ).
    ShiftedUnion { base: Lattice, shifts: Vec<Vec<f64>> },
    /// Base points within `window`, some of them displaced.
    Perturbed {
        base: Lattice,
        window: f64,
        displacements: Vec<Displacement>,
    },
}

impl From<Lattice> for NodeSet {
    fn from(lattice: Lattice) -> Self {
        NodeSet::Lattice { lattice }
    }
}

impl NodeSet {
    pub fn finite(points: Vec<Vec<f64>>) -> Result<Self> {
        let ns = NodeSet::Finite { points };
        ns.validate()?;
        Ok(ns)
    }

    pub fn shifted_union(base: Lattice, shifts: Vec<Vec<f64>>) -> Result<Self> {
        let ns = NodeSet::ShiftedUnion { base, shifts };
        ns.validate()?;
        Ok(ns)
    }

    /// Nodes {±π(m − 1/4) : m ≥ 1} with |x| ≤ radius.
    pub fn ingham_counterexample(radius: f64) -> Self {
        let mut pts = Vec::new();
        let mut m = 1.0;
        loop {
            let x = PI * (m - 0.25);
            if x > radius {
                break;
            }
            pts.push(vec![-x]);
            pts.push(vec![x]);
            m += 1.0;
        }
        pts.sort_by(|a, b| a[0].total_cmp(&b[0]));
        NodeSet::Finite { points: pts }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        match self {
            NodeSet::Finite { points } => {
                for p in points {
                    check_dim(n, p.len())?;
                    if p.iter().any(|v| !v.is_finite()) {
                        return Err(CertError::InvalidNodes("non-finite coordinate".into()));
                    }
                }
                let mut sorted: Vec<&Vec<f64>> = points.iter().collect();
                sorted.sort_by(|a, b| {
                    a.iter()
                        .zip(b.iter())
                        .map(|(x, y)| x.total_cmp(y))
                        .find(|o| o.is_ne())
                        .unwrap_or(std::cmp::Ordering::Equal)
                });
                if sorted.windows(2).any(|w| w[0] == w[1]) {
                    return Err(CertError::InvalidNodes("duplicate points".into()));
                }
            }
            NodeSet::Lattice { .. } => {}
            NodeSet::ShiftedUnion { base, shifts } => {
                if shifts.is_empty() {
                    return Err(CertError::InvalidNodes("shifted union needs a shift".into()));
                }
                for u in shifts {
                    check_dim(n, u.len())?;
                }
                for i in 0..shifts.len() {
                    for j in 0..i {
                        let d: Vec<f64> = shifts[i].iter().zip(&shifts[j]).map(|(a, b)| a - b).collect();
                        if base.contains_vector(&d, 1e-9) {
                            return Err(CertError::InvalidNodes(format!(
                                "shifts {j} and {i} coincide modulo the base lattice"
                            )));
                        }
                    }
                }
            }
            NodeSet::Perturbed { window, displacements, .. } => {
                if !(window.is_finite() && *window > 0.0) {
                    return Err(CertError::InvalidNodes("window must be positive".into()));
                }
                for d in displacements {
                    check_dim(n, d.coeffs.len())?;
                    check_dim(n, d.delta.len())?;
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            NodeSet::Finite { points } => points.first().map_or(0, |p| p.len()),
            NodeSet::Lattice { lattice } => lattice.dim(),
            NodeSet::ShiftedUnion { base, .. } | NodeSet::Perturbed { base, .. } => base.dim(),
        }
    }

    /// Radius beyond which the set is unknown, if any.
    pub fn known_radius(&self) -> Option<f64> {
        match self {
            NodeSet::Perturbed { window, .. } => Some(*window),
            _ => None,
        }
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self, NodeSet::Lattice { .. } | NodeSet::ShiftedUnion { .. })
    }

    /// Period lattice and motif of a periodic node set.
    pub fn periodic_parts(&self) -> Option<(&Lattice, Vec<Vec<f64>>)> {
        match self {
            NodeSet::Lattice { lattice } => Some((lattice, vec![vec![0.0; lattice.dim()]])),
            NodeSet::ShiftedUnion { base, shifts } => Some((base, shifts.clone())),
            _ => None,
        }
    }

    /// All nodes with Euclidean norm ≤ radius.
    pub fn points_in_ball(&self, radius: f64) -> Result<Vec<Vec<f64>>> {
        match self {
            NodeSet::Finite { points } => Ok(points
                .iter()
                .filter(|p| norm(p) <= radius * (1.0 + 1e-12))
                .cloned()
                .collect()),
            NodeSet::Lattice { lattice } => lattice.vectors_within(radius),
            NodeSet::ShiftedUnion { base, shifts } => {
                let umax = shifts.iter().map(|u| norm(u)).fold(0.0, f64::max);
                let mut out = Vec::new();
                for v in base.vectors_within(radius + umax)? {
                    for u in shifts {
                        let p: Vec<f64> = v.iter().zip(u).map(|(a, b)| a + b).collect();
                        if norm(&p) <= radius * (1.0 + 1e-12) {
                            out.push(p);
                        }
                    }
                }
                Ok(out)
            }
            NodeSet::Perturbed { base, window, displacements } => {
                if radius > *window * (1.0 + 1e-12) {
                    return Err(CertError::WindowRequired(format!(
                        "radius {radius} exceeds the perturbation window {window}"
                    )));
                }
                let mut out = Vec::new();
                for v in base.vectors_within(*window)? {
                    let k: Vec<i64> = base.coords(&v).iter().map(|c| c.round() as i64).collect();
                    let mut p = v.clone();
                    if let Some(d) = displacements.iter().find(|d| d.coeffs == k) {
                        for (a, b) in p.iter_mut().zip(&d.delta) {
                            *a += b;
                        }
                    }
                    if norm(&p) <= radius * (1.0 + 1e-12) {
                        out.push(p);
                    }
                }
                Ok(out)
            }
        }
    }

    pub fn scale(&self, a: f64) -> Result<NodeSet> {
        let sc = |v: &Vec<f64>| v.iter().map(|x| x * a).collect::<Vec<f64>>();
        Ok(match self {
            NodeSet::Finite { points } => NodeSet::Finite { points: points.iter().map(sc).collect() },
            NodeSet::Lattice { lattice } => NodeSet::Lattice { lattice: lattice.scale(a)? },
            NodeSet::ShiftedUnion { base, shifts } => NodeSet::ShiftedUnion {
                base: base.scale(a)?,
                shifts: shifts.iter().map(sc).collect(),
            },
            NodeSet::Perturbed { base, window, displacements } => NodeSet::Perturbed {
                base: base.scale(a)?,
                window: window * a,
                displacements: displacements
                    .iter()
                    .map(|d| Displacement { coeffs: d.coeffs.clone(), delta: sc(&d.delta) })
                    .collect(),
            },
        })
    }
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn min_pairwise(points: &[Vec<f64>], level: &dyn Level) -> Result<f64> {
    if points.len() < 2 {
        return Err(CertError::UndefinedSeparation(format!(
            "need at least two nodes, got {}",
            points.len()
        )));
    }
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| points[a][0].total_cmp(&points[b][0]));
    // level(d) ≥ |d| / reach(1) ≥ |d₀| / reach(1)
    let r1 = level.reach(1.0);
    let mut best = f64::INFINITY;
    for i in 0..idx.len() {
        let p = &points[idx[i]];
        for &j in &idx[i + 1..] {
            let q = &points[j];
            if (q[0] - p[0]) / r1 >= best {
                break;
            }
            best = best.min(level.value(&sub(q, p)));
        }
    }
    Ok(best)
}

/// Least level(λ − λ′) over distinct nodes. For periodic sets the value is
/// exact; finite and perturbed sets use the nodes inside `window_radius`.
pub fn min_separation_in(ns: &NodeSet, level: &dyn Level, window_radius: f64) -> Result<f64> {
    check_dim(ns.dim(), level.dim())?;
    match ns {
        NodeSet::Lattice { .. } | NodeSet::ShiftedUnion { .. } => {
            let (lat, motif) = ns.periodic_parts().expect("periodic");
            let s = lat
                .basis()
                .iter()
                .map(|b| level.value(b))
                .fold(f64::INFINITY, f64::min);
            let mut dmax = 0.0f64;
            for a in &motif {
                for b in &motif {
                    dmax = dmax.max(norm(&sub(a, b)));
                }
            }
            let cands = lat.vectors_within(level.reach(s) + dmax)?;
            let mut best = s;
            for a in &motif {
                for b in &motif {
                    let d = sub(a, b);
                    for v in &cands {
                        let w: Vec<f64> = v.iter().zip(&d).map(|(x, y)| x + y).collect();
                        if norm(&w) > 1e-12 * (1.0 + norm(v)) {
                            best = best.min(level.value(&w));
                        }
                    }
                }
            }
            Ok(best)
        }
        NodeSet::Finite { points } => {
            let pts: Vec<Vec<f64>> = if window_radius.is_finite() {
                ns.points_in_ball(window_radius)?
            } else {
                points.clone()
            };
            min_pairwise(&pts, level)
        }
        NodeSet::Perturbed { window, .. } => {
            let pts = ns.points_in_ball(window_radius.min(*window))?;
            min_pairwise(&pts, level)
        }
    }
}

/// Euclidean separation δ(Λ).
pub fn min_separation(ns: &NodeSet, window_radius: f64) -> Result<f64> {
    min_separation_in(ns, &Euclidean(ns.dim()), window_radius)
}

/// Result of a covering sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringReport {
    /// Largest distance from a grid point to the nearest node (lower estimate).
    pub rho_half: f64,
    /// Twice `rho_half` (the covering radius in the doubled convention).
    pub rho_doubled: f64,
    /// Conservative upper bound: rho_half plus the Lipschitz slack.
    pub rho_upper: f64,
    pub margin: f64,
    pub grid_step: f64,
    pub grid_points: u64,
    /// Grid point attaining `rho_half`.
    pub witness: Vec<f64>,
    /// Whether the sweep covered a full period (true) or a bounded domain.
    pub periodic: bool,
}

struct Cell {
    origin: Vec<f64>,
    edges: Vec<Vec<f64>>,
}

impl Cell {
    fn vertex_extremes(&self, scale: &[f64]) -> (f64, f64) {
        // (max |vertex|, max |half-diagonal|) over the cell and its sub-cells
        let n = self.edges.len();
        let mut far = 0.0f64;
        let mut half = 0.0f64;
        for mask in 0..(1u32 << n) {
            let mut v = self.origin.clone();
            let mut h = vec![0.0; n];
            for (i, e) in self.edges.iter().enumerate() {
                let on = mask & (1 << i) != 0;
                let sgn = if on { 1.0 } else { -1.0 };
                for d in 0..n {
                    if on {
                        v[d] += e[d];
                    }
                    h[d] += sgn * e[d] * scale[i] * 0.5;
                }
            }
            far = far.max(norm(&v));
            half = half.max(norm(&h));
        }
        (far, half)
    }
}

fn odd_count(len: f64, step: f64) -> usize {
    let m = (len / step).ceil().max(1.0) as usize;
    if m % 2 == 0 {
        m + 1
    } else {
        m
    }
}

/// sup over a cell-centered grid of min over candidates of level(y − c).
fn sweep(cell: &Cell, counts: &[usize], cands: &[Vec<f64>], level: &dyn Level) -> (f64, Vec<f64>) {
    let n = cell.edges.len();
    let mut j = vec![0usize; n];
    let mut best = 0.0f64;
    let mut arg = cell.origin.clone();
    let mut y = vec![0.0; n];
    let mut d = vec![0.0; n];
    loop {
        for k in 0..n {
            y[k] = cell.origin[k];
        }
        for (i, e) in cell.edges.iter().enumerate() {
            let s = (j[i] as f64 + 0.5) / counts[i] as f64;
            for k in 0..n {
                y[k] += s * e[k];
            }
        }
        let mut m = f64::INFINITY;
        for c in cands {
            for k in 0..n {
                d[k] = y[k] - c[k];
            }
            let v = level.value(&d);
            if v < m {
                m = v;
                if m <= best {
                    break;
                }
            }
        }
        if m > best {
            best = m;
            arg.copy_from_slice(&y);
        }
        let mut i = 0;
        loop {
            if i == n {
                return (best, arg);
            }
            j[i] += 1;
            if j[i] < counts[i] {
                break;
            }
            j[i] = 0;
            i += 1;
        }
    }
}

fn periodic_covering(
    lat: &Lattice,
    motif: &[Vec<f64>],
    level: &dyn Level,
    grid_step: Option<f64>,
) -> Result<CoveringReport> {
    let n = lat.dim();
    check_dim(n, level.dim())?;
    let cell = Cell { origin: vec![0.0; n], edges: lat.basis() };
    let (diam, _) = cell.vertex_extremes(&vec![0.0; n]);
    let step = grid_step.unwrap_or(diam / 200.0);
    if !(step > 0.0) || step >= diam {
        return Err(CertError::ResolutionTooCoarse(format!(
            "grid step {step} must be positive and below the cell diameter {diam}"
        )));
    }
    let counts: Vec<usize> = cell.edges.iter().map(|e| odd_count(norm(e), step)).collect();
    let total: u64 = counts.iter().map(|&c| c as u64).product();
    if total > ENUM_LIMIT {
        return Err(CertError::Unsupported(format!("covering grid of {total} points is too large")));
    }
    let inv: Vec<f64> = counts.iter().map(|&c| 1.0 / c as f64).collect();
    let (_, half) = cell.vertex_extremes(&inv);
    let umax = motif.iter().map(|u| norm(u)).fold(0.0, f64::max);
    let rho_bound = level.upper(diam + umax);
    let radius = diam + level.reach(rho_bound) + umax;
    let center: Vec<f64> = (0..n)
        .map(|k| 0.5 * cell.edges.iter().map(|e| e[k]).sum::<f64>())
        .collect();
    let mut cands = Vec::new();
    for v in lat.vectors_within(radius)? {
        for u in motif {
            cands.push(v.iter().zip(u).map(|(a, b)| a + b).collect::<Vec<f64>>());
        }
    }
    cands.sort_by(|a, b| norm(&sub(a, &center)).total_cmp(&norm(&sub(b, &center))));
    let (rho, witness) = sweep(&cell, &counts, &cands, level);
    let margin = level.lipschitz() * half;
    Ok(CoveringReport {
        rho_half: rho,
        rho_doubled: 2.0 * rho,
        rho_upper: rho + margin,
        margin,
        grid_step: step,
        grid_points: total,
        witness,
        periodic: true,
    })
}

/// Covering radius of a node set in the distance given by `level`.
///
/// Periodic sets are swept over one period cell; other sets over the cube
/// [−domain_radius, domain_radius]ⁿ.
pub fn covering_radius_in(
    ns: &NodeSet,
    level: &dyn Level,
    domain_radius: f64,
    grid_step: Option<f64>,
) -> Result<CoveringReport> {
    check_dim(ns.dim(), level.dim())?;
    if let Some((lat, motif)) = ns.periodic_parts() {
        return periodic_covering(lat, &motif, level, grid_step);
    }
    let n = ns.dim();
    if !(domain_radius > 0.0) {
        return Err(CertError::InvalidSpec("domain radius must be positive".into()));
    }
    let extent = 2.0 * domain_radius;
    let step = grid_step.unwrap_or(extent * (n as f64).sqrt() / 200.0);
    if !(step > 0.0) || step >= extent {
        return Err(CertError::ResolutionTooCoarse(format!(
            "grid step {step} must be positive and below the domain extent {extent}"
        )));
    }
    let mut cands = match ns.known_radius() {
        Some(w) => ns.points_in_ball(w)?,
        None => ns.points_in_ball(f64::INFINITY)?,
    };
    if cands.is_empty() {
        return Err(CertError::InvalidNodes("no nodes to cover with".into()));
    }
    cands.sort_by(|a, b| norm(a).total_cmp(&norm(b)));
    let mut edges = vec![vec![0.0; n]; n];
    for (i, e) in edges.iter_mut().enumerate() {
        e[i] = extent;
    }
    let cell = Cell { origin: vec![-domain_radius; n], edges };
    let counts = vec![odd_count(extent, step); n];
    let total: u64 = counts.iter().map(|&c| c as u64).product();
    if total > ENUM_LIMIT {
        return Err(CertError::Unsupported(format!("covering grid of {total} points is too large")));
    }
    let inv: Vec<f64> = counts.iter().map(|&c| 1.0 / c as f64).collect();
    let (_, half) = cell.vertex_extremes(&inv);
    let (rho, witness) = sweep(&cell, &counts, &cands, level);
    let margin = level.lipschitz() * half;
    Ok(CoveringReport {
        rho_half: rho,
        rho_doubled: 2.0 * rho,
        rho_upper: rho + margin,
        margin,
        grid_step: step,
        grid_points: total,
        witness,
        periodic: false,
    })
}

/// Covering radius measured in the gauge of `body`.
pub fn covering_radius(
    ns: &NodeSet,
    body: &ConvexBody,
    domain_radius: f64,
    grid_step: Option<f64>,
) -> Result<CoveringReport> {
    covering_radius_in(ns, body, domain_radius, grid_step)
}

/// Packing and covering decisions for E(Λ) on the spectrum S.
///
/// Packing of S + 2πΛ* decides sampling; covering decides interpolation.
pub fn lattice_decide(s: &Spectrum, lat: &Lattice, grid_step: Option<f64>) -> Result<Certificate> {
    check_dim(s.dim(), lat.dim())?;
    let period = lat.dual().scale(2.0 * PI)?;
    let mut cert = Certificate::new("lattice_decision");
    cert.constant("det", lat.det());
    cert.constant("density", lat.density());

    match s {
        Spectrum::Body { body } => {
            let vs = period.vectors_within(body.reach(2.0))?;
            let mut best = f64::INFINITY;
            for v in &vs {
                if norm(v) > 0.0 {
                    best = best.min(body.gauge_of(v));
                }
            }
            cert.constant("packing_min_gauge", best);
            if best < 2.0 * (1.0 - 1e-12) {
                cert.finding(
                    "sampling",
                    Verdict::Refuted,
                    "refuted",
                    format!("a dual translate 2πλ* has gauge {best:.6} < 2, so S and S + 2πλ* overlap in positive measure"),
                );
            } else {
                cert.finding(
                    "sampling",
                    Verdict::Proved,
                    "proved",
                    "every nonzero 2πλ* has gauge >= 2: translates of S by 2πΛ* pack",
                );
            }
        }
        Spectrum::BoxUnion { boxes } => {
            let vs = period.vectors_within(2.0 * s.reach(1.0))?;
            let mut worst = 0.0f64;
            for v in vs.iter().filter(|v| norm(v) > 0.0) {
                for a in boxes {
                    for b in boxes {
                        worst = worst.max(a.overlap_with_shift(b, v));
                    }
                }
            }
            let tiny = 1e-12 * boxes.iter().map(|b| b.measure()).fold(f64::INFINITY, f64::min);
            cert.constant("packing_max_overlap", worst);
            if worst > tiny {
                cert.finding("sampling", Verdict::Refuted, "refuted", format!("translates overlap in measure {worst:e}"));
            } else {
                cert.finding("sampling", Verdict::Proved, "proved", "translates of S by 2πΛ* pack");
            }
        }
    }

    let cov = periodic_covering(&period, &[vec![0.0; lat.dim()]], s, grid_step)?;
    cert.constant("covering_level", cov.rho_half);
    cert.constant("covering_level_upper", cov.rho_upper);
    cert.tolerance("grid_step", cov.grid_step);
    cert.tolerance("covering_margin", cov.margin);
    if cov.rho_half > 1.0 + 1e-12 {
        cert.finding(
            "interpolation",
            Verdict::Refuted,
            "refuted",
            format!("point {:?} is not covered by S + 2πΛ* (level {:.6})", cov.witness, cov.rho_half),
        );
    } else if cov.rho_upper <= 1.0 {
        cert.finding("interpolation", Verdict::Proved, "proved", "S + 2πΛ* covers the period cell with margin");
    } else {
        cert.finding(
            "interpolation",
            Verdict::Consistent,
            "consistent",
            "every grid point is covered, but not with the margin needed for a proof",
        );
    }
    cert.note("covering is tested on a grid over one period cell of 2πΛ*");
    Ok(cert)
}

/// Lattices of extreme density that fail sampling (Λ₁, density > 1/ε) and
/// interpolation (Λ₂, density < ε) for the body S.
pub fn degenerate_lattice_pair(n: usize, eps: f64, s: &ConvexBody) -> Result<(Lattice, Lattice)> {
    if n < 2 {
        return Err(CertError::Precondition("construction requires n >= 2".into()));
    }
    check_dim(n, s.dim())?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(CertError::InvalidSpec("epsilon must be positive".into()));
    }
    let mut en = vec![0.0; n];
    en[n - 1] = 1.0;
    // Λ₁: the dual vector e_n/t has 2π-gauge 1 < 2, so packing fails; the
    // first entry is shrunk until the density exceeds 1/ε.
    let t = 2.0 * PI * s.gauge_of(&en);
    let mut d1 = vec![1.0; n];
    d1[n - 1] = t;
    let rest: f64 = d1[1..].iter().product();
    d1[0] = eps / (2.0 * rest);
    let l1 = Lattice::diag(&d1)?;
    // Λ₂: the dual gap 2π/d = 4 h_S(e_n) is twice the width of S along e_n,
    // so covering fails; the first entry is stretched until density < ε.
    let d = PI / (2.0 * s.support_of(&en)?);
    let mut d2 = vec![1.0; n];
    d2[n - 1] = d;
    let rest: f64 = d2[1..].iter().product();
    d2[0] = 2.0 / (eps * rest);
    let l2 = Lattice::diag(&d2)?;
    Ok((l1, l2))
}
