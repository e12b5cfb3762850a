//! Small perturbations of ℤⁿ whose exponentials form Riesz bases on every
//! set of the families Ω(k):
//!
//!   S = 2^{−k} ⋃_j ([0, 2π]ⁿ + 2π m_j),  m_j ∈ ℤⁿ distinct, |m_j| < 2^k,
//!
//! built level by level as unions of 2^{kn} shifted copies of 2^k ℤⁿ.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CertError, Result};
use crate::expsys::{gram_section, nodes_in_cube, shift_matrix};
use crate::lattice::{Lattice, NodeSet};
use crate::linalg::{complex_det, min_singular_value};
use crate::spectrum::{AxisBox, Spectrum};

/// Above this many selections a family is sampled.
pub const ENUMERATION_LIMIT: usize = 10_000;
/// Random selections drawn when a family is sampled.
pub const SAMPLED_SETS: usize = 32;

/// One member of Ω(k), with x = 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OmegaSet {
    pub level: usize,
    pub translates: Vec<Vec<i64>>,
}

impl OmegaSet {
    pub fn dim(&self) -> usize {
        self.translates[0].len()
    }

    pub fn scale(&self) -> f64 {
        0.5f64.powi(self.level as i32)
    }

    pub fn spectrum(&self) -> Result<Spectrum> {
        let s = self.scale();
        let boxes = self
            .translates
            .iter()
            .map(|m| {
                let lo: Vec<f64> = m.iter().map(|&v| s * 2.0 * PI * v as f64).collect();
                let hi: Vec<f64> = lo.iter().map(|v| v + s * 2.0 * PI).collect();
                AxisBox::new(lo, hi)
            })
            .collect::<Result<Vec<_>>>()?;
        Spectrum::box_union(boxes)
    }

    /// The same set written at level `level + 1`.
    pub fn refine(&self) -> OmegaSet {
        let n = self.dim();
        let mut out = Vec::with_capacity(self.translates.len() << n);
        for m in &self.translates {
            for e in 0..(1usize << n) {
                out.push((0..n).map(|a| 2 * m[a] + ((e >> a) & 1) as i64).collect());
            }
        }
        out.sort();
        OmegaSet { level: self.level + 1, translates: out }
    }

    /// The same set written at a finer level.
    pub fn at_level(&self, level: usize) -> OmegaSet {
        let mut s = self.clone();
        while s.level < level {
            s = s.refine();
        }
        s
    }
}

fn candidates(n: usize, k: usize) -> Vec<Vec<i64>> {
    let b = (1i64 << k) - 1;
    let side = (2 * b + 1) as usize;
    let total = side.pow(n as u32);
    (0..total)
        .map(|mut i| {
            let mut m = vec![0i64; n];
            for a in (0..n).rev() {
                m[a] = (i % side) as i64 - b;
                i /= side;
            }
            m
        })
        .collect()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).map(|i| (n - i) as f64 / (i + 1) as f64).product()
}

/// Ω(k) in dimension n: all selections when there are at most 10⁴,
/// otherwise the refined members of Ω(k − 1) plus a seeded random sample.
pub fn omega_family(n: usize, k: usize, seed: u64) -> Result<Vec<OmegaSet>> {
    if n == 0 {
        return Err(CertError::InvalidSpec("dimension must be >= 1".into()));
    }
    let count = 1usize.checked_shl((k * n) as u32).filter(|&c| c <= 64).ok_or_else(|| {
        CertError::InvalidSpec(format!("2^(kn) = 2^{} exceeds 64", k * n))
    })?;
    let cand = candidates(n, k);
    if binomial(cand.len(), count) <= ENUMERATION_LIMIT as f64 {
        let mut out = Vec::new();
        let mut pick: Vec<usize> = (0..count).collect();
        loop {
            out.push(OmegaSet { level: k, translates: pick.iter().map(|&i| cand[i].clone()).collect() });
            // next combination in lexicographic order
            let mut i = count;
            while i > 0 && pick[i - 1] == cand.len() - count + i - 1 {
                i -= 1;
            }
            if i == 0 {
                return Ok(out);
            }
            pick[i - 1] += 1;
            for j in i..count {
                pick[j] = pick[j - 1] + 1;
            }
        }
    }
    let mut out: Vec<OmegaSet> = omega_family(n, k - 1, seed)?.iter().map(OmegaSet::refine).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..SAMPLED_SETS {
        let mut idx = sample(&mut rng, cand.len(), count).into_vec();
        idx.sort_unstable();
        let set = OmegaSet { level: k, translates: idx.into_iter().map(|i| cand[i].clone()).collect() };
        if !out.contains(&set) {
            out.push(set);
        }
    }
    Ok(out)
}

/// Checks of one candidate shift family on one Ω-set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetMargin {
    /// Level of the set before refinement.
    pub set_level: usize,
    pub translates: Vec<Vec<i64>>,
    pub det_abs: f64,
    pub det_tol: f64,
    pub sigma_min: f64,
    /// (window radius, Gram eig_min) pairs.
    pub eig_min: Vec<(f64, f64)>,
    pub floor: f64,
}

impl SetMargin {
    pub fn det_ok(&self) -> bool {
        self.det_abs > self.det_tol
    }

    pub fn eig_ok(&self) -> bool {
        self.eig_min.iter().all(|&(_, e)| e >= self.floor)
    }

    pub fn margin(&self) -> f64 {
        self.eig_min.iter().map(|&(_, e)| e).fold(f64::INFINITY, f64::min)
    }
}

/// Tolerance on |det A| for a d×d shift matrix: 1e-8·√(d!).
pub fn det_tolerance(d: usize) -> f64 {
    1e-8 * (1..=d).map(|i| i as f64).product::<f64>().sqrt()
}

/// Gram windows used at level k.
pub fn gram_windows(n: usize, k: usize) -> Vec<f64> {
    let s = (1u64 << k) as f64;
    if n == 1 {
        vec![8.0 * s, 16.0 * s]
    } else {
        vec![s, 2.0 * s]
    }
}

const ABSOLUTE_FLOOR: f64 = 1e-12;

struct DetCheck {
    det_abs: f64,
    sigma_min: f64,
    fine: OmegaSet,
}

fn determinant_check(shifts: &[Vec<f64>], level: usize, set: &OmegaSet) -> Result<DetCheck> {
    let fine = set.at_level(level);
    if fine.translates.len() != shifts.len() {
        return Err(CertError::InvalidSpec(format!(
            "{} shifts for a set of {} cubes",
            shifts.len(),
            fine.translates.len()
        )));
    }
    let scale = 0.5f64.powi(level as i32);
    let scaled: Vec<Vec<f64>> = shifts.iter().map(|u| u.iter().map(|v| v * scale).collect()).collect();
    let a = shift_matrix(&scaled, &fine.translates)?;
    Ok(DetCheck { det_abs: complex_det(&a).norm(), sigma_min: min_singular_value(&a), fine })
}

fn gram_margin(shifts: &[Vec<f64>], level: usize, set: &OmegaSet, d: DetCheck) -> Result<SetMargin> {
    let n = set.dim();
    let cell = 0.5f64.powi((level * n) as i32);
    // lower Riesz bound of the full system on S
    let floor = 0.5 * (2.0 * PI).powi(n as i32) * cell * d.sigma_min * d.sigma_min + ABSOLUTE_FLOOR;
    let ns = NodeSet::shifted_union(Lattice::scaled_identity(n, (1u64 << level) as f64)?, shifts.to_vec())?;
    let spectrum = d.fine.spectrum()?;
    let mut eig_min = Vec::new();
    for r in gram_windows(n, level) {
        let nodes = nodes_in_cube(&ns, r)?;
        eig_min.push((r, gram_section(&spectrum, &nodes)?.eig_min));
    }
    Ok(SetMargin {
        set_level: set.level,
        translates: set.translates.clone(),
        det_abs: d.det_abs,
        det_tol: det_tolerance(shifts.len()),
        sigma_min: d.sigma_min,
        eig_min,
        floor,
    })
}

/// Determinant and Gram checks of ⋃(2^k ℤⁿ + u_l) on an Ω-set (refined to
/// level k when it comes from a coarser level).
pub fn evaluate_shifts(shifts: &[Vec<f64>], level: usize, set: &OmegaSet) -> Result<SetMargin> {
    let d = determinant_check(shifts, level, set)?;
    gram_margin(shifts, level, set, d)
}

/// Record of one level of the construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub level: usize,
    pub epsilon: f64,
    pub attempts_used: usize,
    /// Candidates whose determinants passed but whose Gram check failed.
    pub disagreements: usize,
    pub shifts: Vec<Vec<f64>>,
    pub margins: Vec<SetMargin>,
}

/// ⋃_l (2^k ℤⁿ + u_l) with the record of how it was reached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbedLattice {
    pub n: usize,
    pub level: usize,
    pub shifts: Vec<Vec<f64>>,
    /// Integer position each coset started from; u_l − offsets_l is the
    /// displacement of every point of the coset.
    pub offsets: Vec<Vec<i64>>,
    /// ε(0), ε(1), …
    pub epsilons: Vec<f64>,
    pub levels: Vec<LevelRecord>,
    /// Margins of the final set on every Ω(j), j ≤ level. A set of Ω(j)
    /// that also belongs to a finer family shares its numbers.
    #[serde(default)]
    pub final_margins: Vec<SetMargin>,
    #[serde(default)]
    pub failure: Option<String>,
}

impl PerturbedLattice {
    /// Λ(0) = ℤⁿ with ε(0) = ε/2.
    pub fn initial(n: usize, epsilon: f64) -> Result<Self> {
        if n == 0 || !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(CertError::InvalidSpec(format!("need n >= 1 and epsilon > 0, got {n}, {epsilon}")));
        }
        Ok(PerturbedLattice {
            n,
            level: 0,
            shifts: vec![vec![0.0; n]],
            offsets: vec![vec![0; n]],
            epsilons: vec![epsilon / 2.0],
            levels: Vec::new(),
            final_margins: Vec::new(),
            failure: None,
        })
    }

    pub fn node_set(&self) -> Result<NodeSet> {
        NodeSet::shifted_union(Lattice::scaled_identity(self.n, (1u64 << self.level) as f64)?, self.shifts.clone())
    }

    /// Largest distance of a point from its integer origin.
    pub fn max_displacement(&self) -> f64 {
        self.shifts
            .iter()
            .zip(&self.offsets)
            .map(|(u, m)| u.iter().zip(m).map(|(a, b)| (a - *b as f64).powi(2)).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }
}

fn ball_point(rng: &mut ChaCha8Rng, n: usize, radius: f64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        if v.iter().map(|x| x * x).sum::<f64>() < 1.0 {
            return v.into_iter().map(|x| x * radius).collect();
        }
    }
}

fn step_seed(seed: u64, level: usize, attempt: usize) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(((level as u64) << 32) | attempt as u64)
}

/// One induction step: split every coset of 2^{k−1}ℤⁿ into 2ⁿ cosets of
/// 2^k ℤⁿ and move each by less than epsilon_k until all Ω-sets pass.
pub fn perturb_step(
    state: &PerturbedLattice,
    omega_sets: &[OmegaSet],
    epsilon_k: f64,
    seed: u64,
    attempts: usize,
) -> Result<PerturbedLattice> {
    let prev = *state.epsilons.last().expect("epsilons start with ε(0)");
    if !(epsilon_k > 0.0 && epsilon_k < prev / 2.0) {
        return Err(CertError::Precondition(format!(
            "epsilon_k = {epsilon_k} must lie in (0, {})",
            prev / 2.0
        )));
    }
    let n = state.n;
    let k = state.level + 1;
    let half = (1i64 << (k - 1)) as f64;
    let mut base = Vec::new();
    let mut offsets = Vec::new();
    for (u, m) in state.shifts.iter().zip(&state.offsets) {
        for e in 0..(1usize << n) {
            let bits: Vec<i64> = (0..n).map(|a| ((e >> a) & 1) as i64).collect();
            base.push(u.iter().zip(&bits).map(|(x, b)| x + half * *b as f64).collect::<Vec<f64>>());
            offsets.push(m.iter().zip(&bits).map(|(x, b)| x + (1i64 << (k - 1)) * b).collect::<Vec<i64>>());
        }
    }
    // best candidate so far: (smallest |det|/tol, smallest |det|, smallest eig_min)
    let mut best: Option<(f64, f64, f64)> = None;
    let mut disagreements = 0;
    for attempt in 0..attempts {
        let mut rng = ChaCha8Rng::seed_from_u64(step_seed(seed, k, attempt));
        let shifts: Vec<Vec<f64>> = base
            .iter()
            .map(|u| {
                let d = ball_point(&mut rng, n, epsilon_k);
                u.iter().zip(&d).map(|(a, b)| a + b).collect()
            })
            .collect();
        let tol = det_tolerance(shifts.len());
        let mut dets = Vec::with_capacity(omega_sets.len());
        let mut cand_det = f64::INFINITY;
        let mut raw_det = f64::INFINITY;
        for set in omega_sets {
            let d = determinant_check(&shifts, k, set)?;
            cand_det = cand_det.min(d.det_abs / tol);
            raw_det = raw_det.min(d.det_abs);
            dets.push(d);
        }
        let mut cand_eig = f64::NAN;
        let mut margins = Vec::with_capacity(omega_sets.len());
        let mut ok = cand_det > 1.0;
        if ok {
            for (set, d) in omega_sets.iter().zip(dets) {
                let m = gram_margin(&shifts, k, set, d)?;
                cand_eig = cand_eig.min(m.margin());
                let pass = m.eig_ok();
                margins.push(m);
                if !pass {
                    // the determinant passed, so this is a cross-check disagreement
                    disagreements += 1;
                    ok = false;
                    break;
                }
            }
        }
        if best.is_none_or(|(d, _, _)| cand_det > d) {
            best = Some((cand_det, raw_det, cand_eig));
        }
        if ok {
            let mut next = state.clone();
            next.level = k;
            next.shifts = shifts.clone();
            next.offsets = offsets;
            next.epsilons.push(epsilon_k);
            next.levels.push(LevelRecord { level: k, epsilon: epsilon_k, attempts_used: attempt + 1, disagreements, shifts, margins });
            next.final_margins.clear();
            return Ok(next);
        }
    }
    let (_, worst_det, worst_eig) = best.unwrap_or((f64::NAN, f64::NAN, f64::NAN));
    Err(CertError::StepFailed { level: k, worst_det, worst_eig })
}

/// Default attempts per step.
pub const DEFAULT_ATTEMPTS: usize = 32;

/// Runs the induction from ℤⁿ up to `depth` with ε(k) = 0.45·ε(k−1).
/// A failing step stops the run; the partial result carries the report.
pub fn universal_perturbation(n: usize, depth: usize, epsilon: f64, seed: u64) -> Result<PerturbedLattice> {
    let in_range = (n == 1 && depth <= 3) || (n == 2 && depth <= 2);
    if !in_range {
        return Err(CertError::InvalidSpec(format!(
            "supported sizes are n = 1 with depth <= 3 and n = 2 with depth <= 2, got n = {n}, depth = {depth}"
        )));
    }
    let mut state = PerturbedLattice::initial(n, epsilon)?;
    for k in 1..=depth {
        let sets = omega_family(n, k, seed)?;
        let eps_k = 0.9 * state.epsilons.last().copied().unwrap_or(epsilon / 2.0) / 2.0;
        match perturb_step(&state, &sets, eps_k, seed, DEFAULT_ATTEMPTS) {
            Ok(next) => state = next,
            Err(e) => {
                state.failure = Some(e.to_string());
                break;
            }
        }
    }
    // members of coarser families reappear refined in the finest one
    let mut finals: Vec<SetMargin> = state.levels.last().map(|l| l.margins.clone()).unwrap_or_default();
    let mut known: HashMap<OmegaSet, usize> = finals
        .iter()
        .enumerate()
        .map(|(i, m)| (OmegaSet { level: m.set_level, translates: m.translates.clone() }.at_level(state.level), i))
        .collect();
    for j in (0..=state.level).rev() {
        for set in omega_family(n, j, seed)? {
            let fine = set.at_level(state.level);
            let m = match known.get(&fine) {
                Some(&i) if finals[i].set_level == j => continue,
                Some(&i) => SetMargin { set_level: j, translates: set.translates.clone(), ..finals[i].clone() },
                None => evaluate_shifts(&state.shifts, state.level, &set)?,
            };
            known.entry(fine).or_insert(finals.len());
            finals.push(m);
        }
    }
    state.final_margins = finals;
    Ok(state)
}


#[cfg(test)]
mod runs {
    use super::*;

    #[test]
    fn depth_zero_is_the_integer_lattice() {
        let p = universal_perturbation(2, 0, 0.2, 3).unwrap();
        assert_eq!(p.shifts, vec![vec![0.0, 0.0]]);
        assert!(p.failure.is_none());
        assert_eq!(p.final_margins.len(), 1);
    }

    #[test]
    fn one_step_in_one_dimension() {
        let p = universal_perturbation(1, 1, 0.1, 7).unwrap();
        assert!(p.failure.is_none(), "{:?}", p.failure);
        assert_eq!(p.level, 1);
        assert!(p.max_displacement() < 0.1);
        assert!(p.final_margins.iter().all(|m| m.det_ok() && m.eig_ok()));
        let again = universal_perturbation(1, 1, 0.1, 7).unwrap();
        assert_eq!(serde_json::to_string(&p).unwrap(), serde_json::to_string(&again).unwrap());
    }
}
