//! Single-beam interference alignment search by alternating leakage
//! minimization, the zero-forcing / direct-link verification, and the
//! slot-orthogonalization construction.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelInstance;
use crate::error::{Error, Result};
use crate::linalg::{canonicalize, frobenius_sq, hermitian_eigen, inner, min_eigenvector, CMat, CVec, C64};
use crate::rng::{derive_seed, random_unit_vector, rng_from_seed};

/// Transmit (`v`) and receive (`u`) beamformers, one stream per user.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerSet {
    pub u: Vec<CVec>,
    pub v: Vec<CVec>,
}

impl BeamformerSet {
    /// Normalizes every vector and applies the canonical phase.
    pub fn new(mut u: Vec<CVec>, mut v: Vec<CVec>) -> Self {
        u.iter_mut().chain(v.iter_mut()).for_each(canonicalize);
        Self { u, v }
    }

    pub fn k(&self) -> usize {
        self.v.len()
    }

    pub fn random(k: usize, nr: usize, nt: usize, seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        let v = (0..k).map(|_| random_unit_vector(&mut rng, nt)).collect();
        let u = (0..k).map(|_| random_unit_vector(&mut rng, nr)).collect();
        Self::new(u, v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub restarts: usize,
    /// Threshold on the normalized leakage.
    pub tol_leakage: f64,
    /// Threshold on the normalized direct-link margin.
    pub tol_margin: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { max_iters: 5000, restarts: 20, tol_leakage: 1e-9, tol_margin: 1e-4, seed: 0 }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || self.restarts == 0 {
            return Err(Error::Config("max_iters and restarts must be >= 1".into()));
        }
        if !(self.tol_leakage > 0.0 && self.tol_margin > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        Ok(())
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

/// Numerical search can certify feasibility but never infeasibility.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Feasible,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub verdict: Verdict,
    pub best_leakage: f64,
    pub direct_margin: f64,
    pub iters_used: usize,
    pub restart_index: usize,
    pub wall_ms: f64,
}

fn check_dims(ch: &ChannelInstance, beams: &BeamformerSet) -> Result<()> {
    let k = ch.k();
    if beams.u.len() != k || beams.v.len() != k {
        return Err(Error::DimensionMismatch(format!(
            "{} receive and {} transmit beams for K = {k}",
            beams.u.len(),
            beams.v.len()
        )));
    }
    if let Some(u) = beams.u.iter().find(|u| u.len() != ch.nr()) {
        return Err(Error::DimensionMismatch(format!("receive beam of length {} for Nr = {}", u.len(), ch.nr())));
    }
    if let Some(v) = beams.v.iter().find(|v| v.len() != ch.nt()) {
        return Err(Error::DimensionMismatch(format!("transmit beam of length {} for Nt = {}", v.len(), ch.nt())));
    }
    Ok(())
}

fn cross_energy(ch: &ChannelInstance) -> f64 {
    let k = ch.k();
    (0..k)
        .flat_map(|rx| (0..k).filter(move |&tx| tx != rx).map(move |tx| (rx, tx)))
        .map(|(rx, tx)| frobenius_sq(ch.h(rx, tx)))
        .sum()
}

fn raw_leakage(ch: &ChannelInstance, beams: &BeamformerSet) -> f64 {
    let k = ch.k();
    let mut total = 0.0;
    for rx in 0..k {
        for tx in 0..k {
            if tx != rx {
                total += inner(&beams.u[rx], &(ch.h(rx, tx) * &beams.v[tx])).norm_sqr();
            }
        }
    }
    total
}

/// Interference leakage `sum_{k != j} |u_k^H H_kj v_j|^2`, normalized by the
/// total cross-link energy `sum_{k != j} ||H_kj||_F^2`.
pub fn leakage(ch: &ChannelInstance, beams: &BeamformerSet) -> Result<f64> {
    check_dims(ch, beams)?;
    let den = cross_energy(ch);
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok(raw_leakage(ch, beams) / den)
}

/// `min_k |u_k^H H_kk v_k| / ||H_kk||_F`.
pub fn direct_margin(ch: &ChannelInstance, beams: &BeamformerSet) -> Result<f64> {
    check_dims(ch, beams)?;
    Ok((0..ch.k())
        .map(|k| {
            let hkk = ch.h(k, k);
            let norm = hkk.norm();
            if norm == 0.0 {
                0.0
            } else {
                inner(&beams.u[k], &(hkk * &beams.v[k])).norm() / norm
            }
        })
        .fold(f64::INFINITY, f64::min))
}

pub fn verify(ch: &ChannelInstance, beams: &BeamformerSet, tol_leakage: f64, tol_margin: f64) -> Result<bool> {
    Ok(leakage(ch, beams)? < tol_leakage && direct_margin(ch, beams)? > tol_margin)
}

/// Interference covariance at receiver `rx`: `sum_{j != rx} H v_j v_j^H H^H`.
fn receive_covariance(ch: &ChannelInstance, v: &[CVec], rx: usize) -> CMat {
    let mut q = CMat::zeros(ch.nr(), ch.nr());
    for (tx, vj) in v.iter().enumerate() {
        if tx != rx {
            let y = ch.h(rx, tx) * vj;
            q.ger(C64::new(1.0, 0.0), &y, &y.conjugate(), C64::new(1.0, 0.0));
        }
    }
    q
}

/// Interference covariance seen from transmitter `tx`.
fn transmit_covariance(ch: &ChannelInstance, u: &[CVec], tx: usize) -> CMat {
    let mut r = CMat::zeros(ch.nt(), ch.nt());
    for (rx, uk) in u.iter().enumerate() {
        if rx != tx {
            let y = ch.h(rx, tx).ad_mul(uk);
            r.ger(C64::new(1.0, 0.0), &y, &y.conjugate(), C64::new(1.0, 0.0));
        }
    }
    r
}

/// One alternating-minimization sweep: every receiver moves to the minimum
/// eigenvector of its interference covariance, then every transmitter does
/// the same against the updated receivers. Users with no interferer keep
/// their current vector.
pub fn alt_min_step(ch: &ChannelInstance, beams: &BeamformerSet) -> Result<BeamformerSet> {
    check_dims(ch, beams)?;
    let k = ch.k();
    if k == 1 {
        return Ok(BeamformerSet::new(beams.u.clone(), beams.v.clone()));
    }
    let u: Vec<CVec> = (0..k)
        .map(|rx| min_eigenvector(&receive_covariance(ch, &beams.v, rx)))
        .collect::<Result<_>>()?;
    let v: Vec<CVec> = (0..k)
        .map(|tx| min_eigenvector(&transmit_covariance(ch, &u, tx)))
        .collect::<Result<_>>()?;
    Ok(BeamformerSet { u, v })
}

/// Replaces each receiver by the direct signal projected onto the
/// near-null space of its interference covariance, as long as the extra
/// leakage stays within `budget` (normalized) in total.
fn zero_forcing_receivers(ch: &ChannelInstance, beams: &BeamformerSet, budget: f64) -> Result<BeamformerSet> {
    let k = ch.k();
    let den = cross_energy(ch);
    let per_user = if k > 1 { budget * den / k as f64 } else { f64::INFINITY };
    let mut u = Vec::with_capacity(k);
    for rx in 0..k {
        let q = receive_covariance(ch, &beams.v, rx);
        let eig = hermitian_eigen(&q)?;
        let cutoff = eig.values[0] + per_user;
        let signal = ch.h(rx, rx) * &beams.v[rx];
        let mut proj = CVec::zeros(ch.nr());
        for (i, &val) in eig.values.iter().enumerate() {
            if val > cutoff {
                break;
            }
            let e = eig.vectors.column(i);
            proj += e * e.dotc(&signal);
        }
        if proj.norm() > 0.0 {
            canonicalize(&mut proj);
            u.push(proj);
        } else {
            u.push(beams.u[rx].clone());
        }
    }
    Ok(BeamformerSet { u, v: beams.v.clone() })
}

/// Once a run drops below the leakage threshold it continues until the
/// leakage is this factor below the threshold (or stops improving) before
/// the direct-link margin is judged.
const CONFIRM_FACTOR: f64 = 1e-6;

struct RunResult {
    beams: BeamformerSet,
    leakage: f64,
    margin: f64,
    iters: usize,
}

fn run_from(
    ch: &ChannelInstance,
    mut beams: BeamformerSet,
    cfg: &SolverConfig,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<RunResult> {
    let mut leak = leakage(ch, &beams)?;
    if let Some(t) = trace.as_deref_mut() {
        t.push(leak);
    }
    let mut iters = 0;
    while leak >= cfg.tol_leakage && iters < cfg.max_iters {
        beams = alt_min_step(ch, &beams)?;
        leak = leakage(ch, &beams)?;
        iters += 1;
        if let Some(t) = trace.as_deref_mut() {
            t.push(leak);
        }
    }
    let mut margin = direct_margin(ch, &beams)?;
    if leak < cfg.tol_leakage {
        // Keep iterating past the threshold: a genuine solution holds its
        // direct-link margin while leakage keeps falling, whereas a run
        // drifting toward a degenerate point loses it.
        let target = cfg.tol_leakage * CONFIRM_FACTOR;
        let mut extra = 0;
        while leak > target && extra < cfg.max_iters {
            let next = alt_min_step(ch, &beams)?;
            let next_leak = leakage(ch, &next)?;
            if next_leak >= leak {
                break;
            }
            beams = next;
            leak = next_leak;
            margin = direct_margin(ch, &beams)?;
            extra += 1;
            if let Some(t) = trace.as_deref_mut() {
                t.push(leak);
            }
        }
        iters += extra;
        let refined = zero_forcing_receivers(ch, &beams, target)?;
        let (rl, rm) = (leakage(ch, &refined)?, direct_margin(ch, &refined)?);
        if rl < cfg.tol_leakage && rm > margin {
            beams = refined;
            leak = rl;
            margin = rm;
        }
    }
    Ok(RunResult { beams, leakage: leak, margin, iters })
}

/// Output of [`solve`]: the best beams found and the report describing them.
#[derive(Debug, Clone)]
pub struct Solution {
    pub beams: BeamformerSet,
    pub report: FeasibilityReport,
}

/// Runs up to `cfg.restarts` seeded random initializations and returns the
/// first feasible run, or the lowest-leakage run if none is feasible.
pub fn solve(ch: &ChannelInstance, cfg: &SolverConfig) -> Result<Solution> {
    solve_inner(ch, cfg, None)
}

/// Like [`solve`], also returning the leakage after every iteration of the
/// returned run.
pub fn solve_traced(ch: &ChannelInstance, cfg: &SolverConfig) -> Result<(Solution, Vec<f64>)> {
    let mut trace = Vec::new();
    let sol = solve_inner(ch, cfg, Some(&mut trace))?;
    Ok((sol, trace))
}

fn solve_inner(ch: &ChannelInstance, cfg: &SolverConfig, mut trace: Option<&mut Vec<f64>>) -> Result<Solution> {
    cfg.validate()?;
    let start = Instant::now();
    let mut best: Option<(usize, RunResult, Vec<f64>)> = None;
    for restart in 0..cfg.restarts {
        let init = BeamformerSet::random(ch.k(), ch.nr(), ch.nt(), derive_seed(cfg.seed, &[restart as u64]));
        let mut run_trace = Vec::new();
        let run = run_from(ch, init, cfg, trace.as_ref().map(|_| &mut run_trace))?;
        let feasible = run.leakage < cfg.tol_leakage && run.margin > cfg.tol_margin;
        let better = match &best {
            None => true,
            Some((_, b, _)) => (run.leakage, -run.margin) < (b.leakage, -b.margin),
        };
        if feasible || better {
            best = Some((restart, run, run_trace));
        }
        if feasible {
            break;
        }
    }
    let (restart_index, run, run_trace) = best.expect("at least one restart");
    if let Some(t) = trace.as_deref_mut() {
        *t = run_trace;
    }
    let verdict = if run.leakage < cfg.tol_leakage && run.margin > cfg.tol_margin {
        Verdict::Feasible
    } else {
        Verdict::Undetermined
    };
    Ok(Solution {
        beams: run.beams,
        report: FeasibilityReport {
            verdict,
            best_leakage: run.leakage,
            direct_margin: run.margin,
            iters_used: run.iters,
            restart_index,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        },
    })
}

/// Leakage level at which alignment residuals sit far below
/// [`crate::linalg::RANK_TOL`], so rank-based independence tests on the
/// beams are reliable.
pub const POLISH_TARGET: f64 = 1e-24;

/// Continues alternating minimization from `beams` until the normalized
/// leakage drops below `target` or `max_iters` steps have run.
pub fn polish(ch: &ChannelInstance, beams: &BeamformerSet, target: f64, max_iters: usize) -> Result<BeamformerSet> {
    let mut cur = beams.clone();
    let mut leak = leakage(ch, &cur)?;
    for _ in 0..max_iters {
        if leak < target {
            break;
        }
        let next = alt_min_step(ch, &cur)?;
        let next_leak = leakage(ch, &next)?;
        if next_leak >= leak {
            break;
        }
        cur = next;
        leak = next_leak;
    }
    Ok(cur)
}

/// Users each slot of a block-diagonal family can serve without
/// interference from the other slots.
pub fn slot_capacity(ch: &ChannelInstance) -> Result<(usize, crate::channel::SlotLayout)> {
    let layout = ch
        .blocks
        .family
        .slot_layout()
        .ok_or_else(|| Error::UnsupportedFamily(format!("{} has no slot structure", ch.blocks.family.name())))?;
    Ok((layout.mr + layout.mt - 1, layout))
}

/// Orthogonalization scheme: users fill the slots in order, at most
/// `Mr + Mt - 1` per slot; each slot's constant sub-network is aligned
/// numerically and the beams are zero outside their slot.
pub fn orthogonal_scheme(ch: &ChannelInstance, cfg: &SolverConfig) -> Result<BeamformerSet> {
    let (per_slot, layout) = slot_capacity(ch)?;
    let k = ch.k();
    let capacity = per_slot * layout.t;
    if k > capacity {
        return Err(Error::TooManyUsers { k, capacity });
    }
    let mut u = vec![CVec::zeros(ch.nr()); k];
    let mut v = vec![CVec::zeros(ch.nt()); k];
    for slot in 0..layout.t {
        let users: Vec<usize> = (slot * per_slot..((slot + 1) * per_slot).min(k)).collect();
        if users.is_empty() {
            break;
        }
        let rows = slot * layout.mr..(slot + 1) * layout.mr;
        let cols = slot * layout.mt..(slot + 1) * layout.mt;
        let sub = ch.restrict(&users, rows.clone(), cols.clone());
        let sol = solve(&sub, &cfg.with_seed(derive_seed(cfg.seed, &[0x5107, slot as u64])))?;
        if sol.report.verdict != Verdict::Feasible {
            return Err(Error::SlotSolveFailed { slot, leakage: sol.report.best_leakage });
        }
        for (i, &user) in users.iter().enumerate() {
            u[user].rows_mut(rows.start, rows.len()).copy_from(&sol.beams.u[i]);
            v[user].rows_mut(cols.start, cols.len()).copy_from(&sol.beams.v[i]);
        }
    }
    Ok(BeamformerSet::new(u, v))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::channel::{build_blocks, sample_instance, ChannelFamily};

    fn instance(f: ChannelFamily, k: usize, seed: u64) -> ChannelInstance {
        sample_instance(&Arc::new(build_blocks(&f).unwrap()), k, seed).unwrap()
    }

    fn brute_force_leakage(ch: &ChannelInstance, b: &BeamformerSet) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for k in 0..ch.k() {
            for j in 0..ch.k() {
                if k == j {
                    continue;
                }
                let h = ch.h(k, j);
                let mut acc = C64::new(0.0, 0.0);
                for p in 0..h.nrows() {
                    for q in 0..h.ncols() {
                        acc += b.u[k][p].conj() * h[(p, q)] * b.v[j][q];
                        den += h[(p, q)].norm_sqr();
                    }
                }
                num += acc.norm_sqr();
            }
        }
        num / den
    }

    #[test]
    fn single_user_has_no_leakage() {
        let ch = instance(ChannelFamily::MimoConstant { mt: 2, mr: 3 }, 1, 4);
        let b = BeamformerSet::random(1, 3, 2, 9);
        assert_eq!(leakage(&ch, &b).unwrap(), 0.0);
    }

    #[test]
    fn leakage_matches_double_loop() {
        let ch = instance(ChannelFamily::MimoGenericExt { mt: 2, mr: 2, t: 2 }, 3, 21);
        for seed in 0..5 {
            let b = BeamformerSet::random(3, 4, 4, seed);
            let ours = leakage(&ch, &b).unwrap();
            let oracle = brute_force_leakage(&ch, &b);
            assert!((ours - oracle).abs() <= 1e-13 * oracle);
        }
    }

    #[test]
    fn direct_margin_matches_entrywise_product() {
        let ch = instance(ChannelFamily::MimoConstant { mt: 2, mr: 2 }, 2, 8);
        let b = BeamformerSet::random(2, 2, 2, 3);
        let oracle = (0..2)
            .map(|k| {
                let h = ch.h(k, k);
                let mut acc = C64::new(0.0, 0.0);
                let mut fro = 0.0;
                for p in 0..2 {
                    for q in 0..2 {
                        acc += b.u[k][p].conj() * h[(p, q)] * b.v[k][q];
                        fro += h[(p, q)].norm_sqr();
                    }
                }
                acc.norm() / fro.sqrt()
            })
            .fold(f64::INFINITY, f64::min);
        assert!((direct_margin(&ch, &b).unwrap() - oracle).abs() < 1e-14);
    }

    #[test]
    fn matched_filter_margin_is_positive() {
        let ch = instance(ChannelFamily::SisoGenericExt { t: 3 }, 2, 1);
        let mut b = BeamformerSet::random(2, 3, 3, 1);
        for k in 0..2 {
            b.u[k] = ch.h(k, k) * &b.v[k];
            canonicalize(&mut b.u[k]);
        }
        assert!(direct_margin(&ch, &b).unwrap() > 0.0);
    }

    #[test]
    fn degenerate_disjoint_pattern_has_zero_margin() {
        let t = 4;
        let ch = instance(ChannelFamily::SisoGenericExt { t }, 3, 5);
        let mut ur = CVec::from_element(t, C64::new(1.0, 0.0));
        ur[0] = C64::new(0.0, 0.0);
        let mut vt = CVec::zeros(t);
        vt[0] = C64::new(1.0, 0.0);
        let b = BeamformerSet::new(vec![ur; 3], vec![vt; 3]);
        assert!(leakage(&ch, &b).unwrap() < 1e-30);
        assert_eq!(direct_margin(&ch, &b).unwrap(), 0.0);
        assert!(!verify(&ch, &b, 1e-9, 1e-4).unwrap());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let ch = instance(ChannelFamily::MimoConstant { mt: 2, mr: 2 }, 2, 0);
        let b = BeamformerSet::random(2, 3, 2, 0);
        assert!(matches!(leakage(&ch, &b), Err(Error::DimensionMismatch(_))));
        let b = BeamformerSet::random(3, 2, 2, 0);
        assert!(matches!(direct_margin(&ch, &b), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn alt_min_never_increases_leakage() {
        for seed in 0..100u64 {
            let f = match seed % 3 {
                0 => ChannelFamily::MimoConstant { mt: 2, mr: 2 },
                1 => ChannelFamily::SisoGenericExt { t: 3 },
                _ => ChannelFamily::MimoGenericExt { mt: 1, mr: 2, t: 2 },
            };
            let ch = instance(f, 2 + (seed as usize % 3), seed);
            let b = BeamformerSet::random(ch.k(), ch.nr(), ch.nt(), seed + 1000);
            let before = leakage(&ch, &b).unwrap();
            let after = leakage(&ch, &alt_min_step(&ch, &b).unwrap()).unwrap();
            assert!(after <= before + 1e-12, "seed {seed}: {before} -> {after}");
        }
    }

    #[test]
    fn single_user_step_only_canonicalizes() {
        let ch = instance(ChannelFamily::MimoConstant { mt: 2, mr: 2 }, 1, 0);
        let b = BeamformerSet::random(1, 2, 2, 77);
        assert_eq!(alt_min_step(&ch, &b).unwrap(), b);
    }

    #[test]
    fn zero_leakage_is_a_fixed_point() {
        let ch = instance(ChannelFamily::SisoGenericExt { t: 3 }, 3, 2);
        let b = orthogonal_scheme(&ch, &SolverConfig::default()).unwrap();
        let next = alt_min_step(&ch, &b).unwrap();
        assert!(leakage(&ch, &next).unwrap() <= 1e-12);
    }

    #[test]
    fn constant_mimo_three_users_is_feasible() {
        let ch = instance(ChannelFamily::MimoConstant { mt: 2, mr: 2 }, 3, 0);
        let sol = solve(&ch, &SolverConfig { restarts: 20, ..Default::default() }).unwrap();
        assert_eq!(sol.report.verdict, Verdict::Feasible);
        assert!(sol.report.best_leakage < 1e-9);
        assert!(verify(&ch, &sol.beams, 1e-9, 1e-4).unwrap());
    }

    #[test]
    fn siso_above_bound_stays_undetermined() {
        let ch = instance(ChannelFamily::SisoGenericExt { t: 2 }, 4, 0);
        let cfg = SolverConfig { restarts: 20, max_iters: 1000, ..Default::default() };
        let sol = solve(&ch, &cfg).unwrap();
        assert_eq!(sol.report.verdict, Verdict::Undetermined);
    }

    #[test]
    fn single_user_uses_matched_filter() {
        for f in [ChannelFamily::AcsConstant { t: 2 }, ChannelFamily::SisoLTap { n: 3, delays: vec![0, 2] }] {
            let ch = instance(f, 1, 3);
            let sol = solve(&ch, &SolverConfig::default()).unwrap();
            assert_eq!(sol.report.verdict, Verdict::Feasible);
            let mut mf = ch.h(0, 0) * &sol.beams.v[0];
            canonicalize(&mut mf);
            assert!((mf - &sol.beams.u[0]).norm() < 1e-12);
        }
    }

    #[test]
    fn siso_orthogonal_scheme_uses_unit_vectors() {
        let ch = instance(ChannelFamily::SisoGenericExt { t: 3 }, 3, 4);
        let b = orthogonal_scheme(&ch, &SolverConfig::default()).unwrap();
        for k in 0..3 {
            let e = CVec::from_fn(3, |i, _| C64::new(if i == k { 1.0 } else { 0.0 }, 0.0));
            assert!((&b.v[k] - &e).norm() < 1e-15);
            assert!((&b.u[k] - &e).norm() < 1e-15);
        }
        assert!(leakage(&ch, &b).unwrap() < 1e-14);
        assert!(verify(&ch, &b, 1e-9, 1e-4).unwrap());
    }

    #[test]
    fn orthogonal_scheme_rejects_excess_users() {
        let ch = instance(ChannelFamily::SisoGenericExt { t: 2 }, 3, 0);
        assert!(matches!(
            orthogonal_scheme(&ch, &SolverConfig::default()),
            Err(Error::TooManyUsers { k: 3, capacity: 2 })
        ));
        let ch = instance(ChannelFamily::AcsConstant { t: 1 }, 2, 0);
        assert!(matches!(orthogonal_scheme(&ch, &SolverConfig::default()), Err(Error::UnsupportedFamily(_))));
    }

    #[test]
    fn invalid_config_is_rejected() {
        let ch = instance(ChannelFamily::MimoConstant { mt: 1, mr: 1 }, 1, 0);
        let cfg = SolverConfig { restarts: 0, ..Default::default() };
        assert!(matches!(solve(&ch, &cfg), Err(Error::Config(_))));
        let cfg = SolverConfig { tol_margin: 0.0, ..Default::default() };
        assert!(matches!(solve(&ch, &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn solve_is_deterministic() {
        let ch = instance(ChannelFamily::MimoConstant { mt: 2, mr: 2 }, 3, 9);
        let cfg = SolverConfig { seed: 5, ..Default::default() };
        let a = solve(&ch, &cfg).unwrap();
        let b = solve(&ch, &cfg).unwrap();
        assert_eq!(a.beams, b.beams);
        assert_eq!(a.report.best_leakage.to_bits(), b.report.best_leakage.to_bits());
        assert_eq!(a.report.iters_used, b.report.iters_used);
    }
}
