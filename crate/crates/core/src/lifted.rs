//! Lifted alignment condition: every transmit beam is replaced by its
//! stacked copies `(tau^1 v; ...; tau^L v)`, which removes the building
//! blocks from the independence test. Includes the implication check
//! against the original condition and audits of lifted zero-forcing
//! solutions.

use serde::{Deserialize, Serialize};

use crate::channel::ChannelInstance;
use crate::error::{Error, Result};
use crate::linalg::{columns, numerical_rank, CVec, C64, RANK_TOL};

/// Coefficients and transmit beams of a lifted system.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedInstance {
    pub k: usize,
    pub n: usize,
    pub l: usize,
    /// Flattened `K x K x L`, index `(rx * K + tx) * L + l`.
    pub tau: Vec<C64>,
    pub v: Vec<CVec>,
}

impl LiftedInstance {
    pub fn new(k: usize, n: usize, l: usize, tau: Vec<C64>, v: Vec<CVec>) -> Result<Self> {
        if tau.len() != k * k * l {
            return Err(Error::DimensionMismatch(format!("expected {} coefficients, got {}", k * k * l, tau.len())));
        }
        if v.len() != k || v.iter().any(|x| x.len() != n) {
            return Err(Error::DimensionMismatch(format!("need {k} transmit beams of length {n}")));
        }
        Ok(Self { k, n, l, tau, v })
    }

    /// Uses the stored coefficients of `ch` directly.
    pub fn from_channel(ch: &ChannelInstance, v: &[CVec]) -> Result<Self> {
        Self::new(ch.k(), ch.nt(), ch.l(), ch.tau_all().to_vec(), v.to_vec())
    }

    pub fn tau(&self, rx: usize, tx: usize) -> &[C64] {
        let base = (rx * self.k + tx) * self.l;
        &self.tau[base..base + self.l]
    }

    /// Divides every pair's coefficients by its first one, so `tau^1 = 1`
    /// wherever it was nonzero.
    pub fn normalized(&self) -> Self {
        let mut out = self.clone();
        for chunk in out.tau.chunks_mut(self.l.max(1)) {
            let first = chunk[0];
            if first.norm() > 0.0 {
                chunk.iter_mut().for_each(|t| *t /= first);
            }
        }
        out
    }

    pub fn lifted(&self, rx: usize, tx: usize) -> CVec {
        lift(&self.v[tx], self.tau(rx, tx))
    }
}

/// `(tau^1 v; ...; tau^L v)`.
pub fn lift(v: &CVec, tau: &[C64]) -> CVec {
    let n = v.len();
    CVec::from_fn(n * tau.len(), |i, _| tau[i / n] * v[i % n])
}

fn unit_columns(vectors: &[CVec], nrows: usize) -> crate::linalg::CMat {
    let normalized: Vec<CVec> = vectors
        .iter()
        .map(|x| {
            let norm = x.norm();
            if norm > 0.0 {
                x.unscale(norm)
            } else {
                x.clone()
            }
        })
        .collect();
    columns(&normalized, nrows)
}

/// True iff `direct` is linearly independent of the span of
/// `interference`, with columns normalized before the rank tests.
pub fn independent_of(direct: &CVec, interference: &[CVec], tol: f64) -> bool {
    if direct.norm() == 0.0 {
        return false;
    }
    let nrows = direct.len();
    let base = numerical_rank(&unit_columns(interference, nrows), tol);
    let mut all = interference.to_vec();
    all.push(direct.clone());
    numerical_rank(&unit_columns(&all, nrows), tol) == base + 1
}

/// Lifted condition at every receiver.
pub fn check_lifted(inst: &LiftedInstance, tol: f64) -> bool {
    (0..inst.k).all(|rx| {
        let interference: Vec<CVec> = (0..inst.k).filter(|&tx| tx != rx).map(|tx| inst.lifted(rx, tx)).collect();
        independent_of(&inst.lifted(rx, rx), &interference, tol)
    })
}

/// Original condition: `H_kk v_k` is independent of `span{H_kj v_j}` at
/// every receiver.
pub fn check_original(ch: &ChannelInstance, v: &[CVec], tol: f64) -> Result<bool> {
    if v.len() != ch.k() || v.iter().any(|x| x.len() != ch.nt()) {
        return Err(Error::DimensionMismatch(format!("need {} transmit beams of length {}", ch.k(), ch.nt())));
    }
    Ok((0..ch.k()).all(|rx| {
        let interference: Vec<CVec> =
            (0..ch.k()).filter(|&tx| tx != rx).map(|tx| ch.h(rx, tx) * &v[tx]).collect();
        independent_of(&(ch.h(rx, rx) * &v[rx]), &interference, tol)
    }))
}

/// Joint outcome of the original and lifted checks. `Violation` means the
/// original condition holds while the lifted one fails, which the
/// implication rules out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Implication {
    BothHold,
    LiftedOnly,
    Neither,
    Violation,
}

pub fn lemma_implication_test(ch: &ChannelInstance, v: &[CVec], tol: f64) -> Result<Implication> {
    let original = check_original(ch, v, tol)?;
    let lifted = check_lifted(&LiftedInstance::from_channel(ch, v)?, tol);
    Ok(match (original, lifted) {
        (true, true) => Implication::BothHold,
        (false, true) => Implication::LiftedOnly,
        (false, false) => Implication::Neither,
        (true, false) => Implication::Violation,
    })
}

/// Lifted receive beams `u_k^l = A_l^H u_k` induced by original receive
/// beams; they satisfy the lifted zero-forcing equations whenever the
/// original beams zero-force.
pub fn lifted_receivers(ch: &ChannelInstance, u: &[CVec]) -> Vec<Vec<CVec>> {
    u.iter().map(|uk| ch.blocks.blocks.iter().map(|a| a.ad_mul(uk)).collect()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserAudit {
    /// Transmitters whose beam is orthogonal to every block of this
    /// receiver.
    pub omega: Vec<usize>,
    /// Dimension of the span of those transmit beams.
    pub p: usize,
    /// Dimension of the span of this receiver's blocks.
    pub dim_u: usize,
    pub ineq_ok: bool,
    /// Set only when `p = N - 1`: whether `K <= |omega| + L`.
    pub claim_checked: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionAudit {
    pub users: Vec<UserAudit>,
}

impl DimensionAudit {
    pub fn holds(&self) -> bool {
        self.users.iter().all(|u| u.ineq_ok && u.claim_checked != Some(false))
    }

    pub fn p(&self) -> Vec<usize> {
        self.users.iter().map(|u| u.p).collect()
    }
}

/// Audits a lifted zero-forcing solution. `u_blocks[k][l]` is block `l` of
/// receiver `k`. Orthogonality is judged relative to the vector norms with
/// tolerance `tol`.
pub fn dimension_audit(u_blocks: &[Vec<CVec>], inst: &LiftedInstance, tol: f64) -> Result<DimensionAudit> {
    let (k, n, l) = (inst.k, inst.n, inst.l);
    if u_blocks.len() != k || u_blocks.iter().any(|b| b.len() != l || b.iter().any(|x| x.len() != n)) {
        return Err(Error::DimensionMismatch(format!("need {k} x {l} receive blocks of length {n}")));
    }
    let stacked: Vec<CVec> =
        u_blocks.iter().map(|b| CVec::from_iterator(n * l, b.iter().flat_map(|x| x.iter().copied()))).collect();
    let mut worst: f64 = 0.0;
    for rx in 0..k {
        for tx in (0..k).filter(|&tx| tx != rx) {
            let lv = inst.lifted(rx, tx);
            let scale = stacked[rx].norm() * lv.norm();
            if scale > 0.0 {
                worst = worst.max(stacked[rx].dotc(&lv).norm() / scale);
            }
        }
    }
    if worst > tol {
        return Err(Error::NotAZeroForcingSolution { residual: worst, tol });
    }

    let users = (0..k)
        .map(|rx| {
            let blocks = &u_blocks[rx];
            let omega: Vec<usize> = (0..k)
                .filter(|&tx| tx != rx)
                .filter(|&tx| {
                    let vn = inst.v[tx].norm();
                    blocks.iter().all(|b| b.dotc(&inst.v[tx]).norm() <= tol * b.norm() * vn)
                })
                .collect();
            let omega_beams: Vec<CVec> = omega.iter().map(|&tx| inst.v[tx].clone()).collect();
            let p = numerical_rank(&unit_columns(&omega_beams, n), RANK_TOL);
            let dim_u = numerical_rank(&unit_columns(blocks, n), RANK_TOL);
            let claim_checked = (n >= 1 && p == n - 1).then(|| k <= omega.len() + l);
            UserAudit { omega, p, dim_u, ineq_ok: p + dim_u <= n, claim_checked }
        })
        .collect();
    Ok(DimensionAudit { users })
}

/// Counting condition on a lifted solution: the overlapping pairs cannot
/// outnumber the free variables, `|omega_c| <= K((L+1)N - 2) - L sum(p)`.
pub fn rational_count_audit(k: usize, n: usize, l: usize, p: &[usize], omega_c: usize) -> bool {
    let (k, n, l) = (k as i128, n as i128, l as i128);
    let sum_p: i128 = p.iter().map(|&x| x as i128).sum();
    omega_c as i128 <= k * ((l + 1) * n - 2) - l * sum_p
}
