//! Channel families with finite diversity order: building blocks, generic
//! instances, and the diversity-order / full-rank membership checks.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{numerical_rank, CMat, C64, RANK_TOL};
use crate::rng::{complex_gaussian, real_gaussian, rng_from_seed};

/// A channel model whose matrices are generic combinations of `L` fixed
/// building blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelFamily {
    /// SISO with `t` generic time/frequency extensions (`L = T`).
    SisoGenericExt { t: usize },
    /// SISO `L`-tap channel seen over `n` frequency extensions, same tap
    /// delays on every link.
    SisoLTap { n: usize, delays: Vec<usize> },
    /// SISO block fading: extensions split into coherence blocks.
    SisoBlockFading { block_lengths: Vec<usize> },
    /// Flat-fading `mt x mr` MIMO, no extension.
    MimoConstant { mt: usize, mr: usize },
    /// `mt x mr` MIMO with `t` constant extensions.
    MimoConstantExt { mt: usize, mr: usize, t: usize },
    /// `mt x mr` MIMO with `t` generic extensions.
    MimoGenericExt { mt: usize, mr: usize, t: usize },
    /// SISO with `t` constant extensions under asymmetric complex signaling;
    /// each complex dimension becomes a real 2x2 block.
    AcsConstant { t: usize },
    /// Explicit `nr x nt` blocks.
    Custom {
        nr: usize,
        nt: usize,
        #[serde(with = "crate::io::matrix_list")]
        blocks: Vec<CMat>,
    },
}

/// Slot decomposition of a block-diagonal family: `t` slots, each an
/// `mr x mt` diagonal block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotLayout {
    pub t: usize,
    pub mt: usize,
    pub mr: usize,
}

impl ChannelFamily {
    pub fn name(&self) -> &'static str {
        match self {
            Self::SisoGenericExt { .. } => "siso-generic-ext",
            Self::SisoLTap { .. } => "siso-ltap",
            Self::SisoBlockFading { .. } => "siso-block-fading",
            Self::MimoConstant { .. } => "mimo-constant",
            Self::MimoConstantExt { .. } => "mimo-constant-ext",
            Self::MimoGenericExt { .. } => "mimo-generic-ext",
            Self::AcsConstant { .. } => "acs-constant",
            Self::Custom { .. } => "custom",
        }
    }

    /// Transmit antennas per channel use. ACS counts the real and imaginary
    /// parts as two real dimensions.
    pub fn mt(&self) -> usize {
        match self {
            Self::SisoGenericExt { .. } | Self::SisoLTap { .. } | Self::SisoBlockFading { .. } => 1,
            Self::MimoConstant { mt, .. } | Self::MimoConstantExt { mt, .. } | Self::MimoGenericExt { mt, .. } => *mt,
            Self::AcsConstant { .. } => 2,
            Self::Custom { nt, .. } => *nt,
        }
    }

    pub fn mr(&self) -> usize {
        match self {
            Self::SisoGenericExt { .. } | Self::SisoLTap { .. } | Self::SisoBlockFading { .. } => 1,
            Self::MimoConstant { mr, .. } | Self::MimoConstantExt { mr, .. } | Self::MimoGenericExt { mr, .. } => *mr,
            Self::AcsConstant { .. } => 2,
            Self::Custom { nr, .. } => *nr,
        }
    }

    /// Number of channel uses (extensions).
    pub fn t(&self) -> usize {
        match self {
            Self::SisoGenericExt { t } | Self::MimoConstantExt { t, .. } | Self::MimoGenericExt { t, .. } | Self::AcsConstant { t } => *t,
            Self::SisoLTap { n, .. } => *n,
            Self::SisoBlockFading { block_lengths } => block_lengths.iter().sum(),
            Self::MimoConstant { .. } | Self::Custom { .. } => 1,
        }
    }

    pub fn nt(&self) -> usize {
        self.mt() * self.t()
    }

    pub fn nr(&self) -> usize {
        self.mr() * self.t()
    }

    /// Declared diversity order.
    pub fn diversity(&self) -> usize {
        match self {
            Self::SisoGenericExt { t } => *t,
            Self::SisoLTap { delays, .. } => delays.len(),
            Self::SisoBlockFading { block_lengths } => block_lengths.len(),
            Self::MimoConstant { mt, mr } | Self::MimoConstantExt { mt, mr, .. } => mt * mr,
            Self::MimoGenericExt { mt, mr, t } => mt * mr * t,
            Self::AcsConstant { .. } => 2,
            Self::Custom { blocks, .. } => blocks.len(),
        }
    }

    /// Coefficients are real Gaussians instead of complex ones.
    pub fn real_coefficients(&self) -> bool {
        matches!(self, Self::AcsConstant { .. })
    }

    pub fn is_siso(&self) -> bool {
        matches!(self, Self::SisoGenericExt { .. } | Self::SisoLTap { .. } | Self::SisoBlockFading { .. })
    }

    /// Block-diagonal slot layout used by the orthogonalization scheme and
    /// the block-support machinery. `None` for families without one.
    pub fn slot_layout(&self) -> Option<SlotLayout> {
        match self {
            Self::SisoGenericExt { .. } | Self::SisoLTap { .. } | Self::SisoBlockFading { .. } => {
                Some(SlotLayout { t: self.t(), mt: 1, mr: 1 })
            }
            Self::MimoConstant { mt, mr } => Some(SlotLayout { t: 1, mt: *mt, mr: *mr }),
            Self::MimoConstantExt { mt, mr, t } | Self::MimoGenericExt { mt, mr, t } => {
                Some(SlotLayout { t: *t, mt: *mt, mr: *mr })
            }
            Self::AcsConstant { .. } | Self::Custom { .. } => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidFamilyParams(msg));
        match self {
            Self::SisoGenericExt { t } | Self::AcsConstant { t } if *t == 0 => bad("T must be >= 1".into()),
            Self::SisoLTap { n, delays } => {
                if *n == 0 {
                    return bad("N must be >= 1".into());
                }
                if delays.is_empty() || delays.len() > *n {
                    return bad(format!("need 1 <= L <= N, got L = {} and N = {}", delays.len(), n));
                }
                if delays.windows(2).any(|w| w[0] >= w[1]) {
                    return bad("tap delays must be strictly increasing".into());
                }
                if delays.iter().any(|&d| d >= *n) {
                    return bad(format!("tap delays must lie in [0, {}]", n - 1));
                }
                Ok(())
            }
            Self::SisoBlockFading { block_lengths } => {
                if block_lengths.is_empty() || block_lengths.contains(&0) {
                    bad("block lengths must be a non-empty list of positive integers".into())
                } else {
                    Ok(())
                }
            }
            Self::MimoConstant { mt, mr } if *mt == 0 || *mr == 0 => bad("Mt and Mr must be >= 1".into()),
            Self::MimoConstantExt { mt, mr, t } | Self::MimoGenericExt { mt, mr, t }
                if *mt == 0 || *mr == 0 || *t == 0 =>
            {
                bad("Mt, Mr and T must be >= 1".into())
            }
            Self::Custom { nr, nt, blocks } => {
                if *nr == 0 || *nt == 0 || blocks.is_empty() {
                    return bad("custom family needs positive dimensions and at least one block".into());
                }
                if let Some(b) = blocks.iter().find(|b| b.nrows() != *nr || b.ncols() != *nt) {
                    return bad(format!("block of shape {}x{} in a {}x{} family", b.nrows(), b.ncols(), nr, nt));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Parses a family from its name and a comma-separated parameter string
    /// such as `Mt=2,Mr=2` or `N=4,delays=0:1`.
    pub fn parse(name: &str, params: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for part in params.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::InvalidFamilyParams(format!("expected key=value, got {part:?}")))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Self::from_name_params(name, &map)
    }

    /// Parses a family from its CLI name and `key=value` parameters. List
    /// parameters (`delays`, `blocks`) use `:` as separator.
    pub fn from_name_params(name: &str, params: &BTreeMap<String, String>) -> Result<Self> {
        let get = |key: &str| -> Result<usize> {
            let raw = params
                .iter()
                .find(|(k, _)| k.eq_ignore_ascii_case(key))
                .map(|(_, v)| v)
                .ok_or_else(|| Error::InvalidFamilyParams(format!("family {name} needs parameter {key}")))?;
            raw.trim()
                .parse()
                .map_err(|_| Error::InvalidFamilyParams(format!("{key}={raw} is not a non-negative integer")))
        };
        let list = |key: &str| -> Result<Vec<usize>> {
            let raw = params
                .iter()
                .find(|(k, _)| k.eq_ignore_ascii_case(key))
                .map(|(_, v)| v)
                .ok_or_else(|| Error::InvalidFamilyParams(format!("family {name} needs parameter {key}")))?;
            raw.split(':')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| Error::InvalidFamilyParams(format!("bad entry {s:?} in {key}")))
                })
                .collect()
        };
        let family = match name.to_ascii_lowercase().replace('_', "-").as_str() {
            "siso-generic-ext" => Self::SisoGenericExt { t: get("T")? },
            "siso-ltap" => {
                let delays = list("delays")?;
                if let Ok(l) = get("L") {
                    if l != delays.len() {
                        return Err(Error::InvalidFamilyParams(format!("L = {l} but {} delays given", delays.len())));
                    }
                }
                Self::SisoLTap { n: get("N")?, delays }
            }
            "siso-block-fading" => {
                let block_lengths = list("blocks")?;
                if let Ok(t) = get("T") {
                    if t != block_lengths.iter().sum::<usize>() {
                        return Err(Error::InvalidFamilyParams(format!("block lengths do not sum to T = {t}")));
                    }
                }
                Self::SisoBlockFading { block_lengths }
            }
            "mimo-constant" => Self::MimoConstant { mt: get("Mt")?, mr: get("Mr")? },
            "mimo-constant-ext" => Self::MimoConstantExt { mt: get("Mt")?, mr: get("Mr")?, t: get("T")? },
            "mimo-generic-ext" => Self::MimoGenericExt { mt: get("Mt")?, mr: get("Mr")?, t: get("T")? },
            "acs-constant" => Self::AcsConstant { t: get("T")? },
            other => return Err(Error::InvalidFamilyParams(format!("unknown family {other:?}"))),
        };
        family.validate()?;
        Ok(family)
    }

    /// `key=value` pairs that reproduce this family through
    /// [`ChannelFamily::from_name_params`].
    pub fn params(&self) -> Vec<(String, String)> {
        let join = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(":");
        let kv = |k: &str, v: usize| (k.to_string(), v.to_string());
        match self {
            Self::SisoGenericExt { t } | Self::AcsConstant { t } => vec![kv("T", *t)],
            Self::SisoLTap { n, delays } => vec![kv("N", *n), ("delays".into(), join(delays))],
            Self::SisoBlockFading { block_lengths } => vec![("blocks".into(), join(block_lengths))],
            Self::MimoConstant { mt, mr } => vec![kv("Mt", *mt), kv("Mr", *mr)],
            Self::MimoConstantExt { mt, mr, t } | Self::MimoGenericExt { mt, mr, t } => {
                vec![kv("Mt", *mt), kv("Mr", *mr), kv("T", *t)]
            }
            Self::Custom { nr, nt, blocks } => vec![kv("Nr", *nr), kv("Nt", *nt), kv("L", blocks.len())],
        }
    }
}

impl fmt::Display for ChannelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params: Vec<String> = self.params().into_iter().map(|(k, v)| format!("{k}={v}")).collect();
        write!(f, "{}{{{}}}", self.name(), params.join(","))
    }
}

/// The `L` basis matrices of a channel family.
#[derive(Debug, Clone, PartialEq)]
pub struct BuildingBlocks {
    pub family: ChannelFamily,
    pub blocks: Vec<CMat>,
}

impl BuildingBlocks {
    pub fn nr(&self) -> usize {
        self.blocks[0].nrows()
    }

    pub fn nt(&self) -> usize {
        self.blocks[0].ncols()
    }

    pub fn l(&self) -> usize {
        self.blocks.len()
    }

    /// `sum_l coeffs[l] * A_l`.
    pub fn combine(&self, coeffs: &[C64]) -> CMat {
        let mut h = CMat::zeros(self.nr(), self.nt());
        for (a, &c) in self.blocks.iter().zip(coeffs) {
            h.zip_apply(a, |x, y| *x += c * y);
        }
        h
    }
}

fn diag(entries: impl IntoIterator<Item = C64>) -> CMat {
    let d: Vec<C64> = entries.into_iter().collect();
    CMat::from_diagonal(&nalgebra::DVector::from_vec(d))
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

/// Elementary `mr x mt` matrix placed in slot `slot` of a `t`-slot block
/// diagonal, or in every slot when `slot` is `None`.
fn elementary(mr: usize, mt: usize, t: usize, p: usize, q: usize, slot: Option<usize>) -> CMat {
    let mut m = CMat::zeros(mr * t, mt * t);
    for s in 0..t {
        if slot.is_none_or(|only| only == s) {
            m[(s * mr + p, s * mt + q)] = one();
        }
    }
    m
}

pub fn build_blocks(family: &ChannelFamily) -> Result<BuildingBlocks> {
    family.validate()?;
    let blocks: Vec<CMat> = match family {
        ChannelFamily::SisoGenericExt { t } => (0..*t)
            .map(|l| diag((0..*t).map(|i| if i == l { one() } else { zero() })))
            .collect(),
        ChannelFamily::SisoLTap { n, delays } => delays
            .iter()
            .map(|&lambda| {
                diag((0..*n).map(|i| {
                    let angle = 2.0 * PI * ((i * lambda) % n) as f64 / *n as f64;
                    C64::from_polar(1.0, angle)
                }))
            })
            .collect(),
        ChannelFamily::SisoBlockFading { block_lengths } => {
            let mut start = 0;
            block_lengths
                .iter()
                .map(|&len| {
                    let range = start..start + len;
                    start += len;
                    diag((0..family.t()).map(|i| if range.contains(&i) { one() } else { zero() }))
                })
                .collect()
        }
        ChannelFamily::MimoConstant { mt, mr } => (0..*mr)
            .flat_map(|p| (0..*mt).map(move |q| (p, q)))
            .map(|(p, q)| elementary(*mr, *mt, 1, p, q, None))
            .collect(),
        ChannelFamily::MimoConstantExt { mt, mr, t } => (0..*mr)
            .flat_map(|p| (0..*mt).map(move |q| (p, q)))
            .map(|(p, q)| elementary(*mr, *mt, *t, p, q, None))
            .collect(),
        ChannelFamily::MimoGenericExt { mt, mr, t } => (0..*t)
            .flat_map(|s| (0..*mr).flat_map(move |p| (0..*mt).map(move |q| (s, p, q))))
            .map(|(s, p, q)| elementary(*mr, *mt, *t, p, q, Some(s)))
            .collect(),
        ChannelFamily::AcsConstant { t } => {
            let ident = CMat::identity(2 * t, 2 * t);
            let mut rot = CMat::zeros(2 * t, 2 * t);
            for s in 0..*t {
                rot[(2 * s, 2 * s + 1)] = -one();
                rot[(2 * s + 1, 2 * s)] = one();
            }
            vec![ident, rot]
        }
        ChannelFamily::Custom { blocks, .. } => {
            let bb = BuildingBlocks { family: family.clone(), blocks: blocks.clone() };
            let order = diversity_order(&bb, RANK_TOL);
            if order != bb.l() {
                return Err(Error::DegenerateBlocks(format!(
                    "blocks are linearly dependent: rank {order} < L = {}",
                    bb.l()
                )));
            }
            if !check_psi(&bb, 8, 0x5eed, RANK_TOL) {
                return Err(Error::DegenerateBlocks(
                    "no generic combination of the blocks has full rank".into(),
                ));
            }
            return Ok(bb);
        }
    };
    Ok(BuildingBlocks { family: family.clone(), blocks })
}

/// Numerical rank of the `L x (Nr*Nt)` matrix of vectorized blocks.
pub fn diversity_order(blocks: &BuildingBlocks, tol: f64) -> usize {
    let width = blocks.nr() * blocks.nt();
    let stacked = CMat::from_fn(blocks.l(), width, |l, idx| blocks.blocks[l][idx]);
    numerical_rank(&stacked, tol)
}

/// Randomized full-rank membership test: true iff one of `trials` random
/// combinations of the blocks has rank `min(Nr, Nt)`.
pub fn check_psi(blocks: &BuildingBlocks, trials: usize, seed: u64, tol: f64) -> bool {
    let mut rng = rng_from_seed(seed);
    let target = blocks.nr().min(blocks.nt());
    (0..trials.max(1)).any(|_| {
        let coeffs: Vec<C64> = (0..blocks.l()).map(|_| complex_gaussian(&mut rng)).collect();
        numerical_rank(&blocks.combine(&coeffs), tol) == target
    })
}

/// A sampled `K`-user channel: coefficients and assembled matrices.
#[derive(Debug, Clone)]
pub struct ChannelInstance {
    k: usize,
    /// Flattened `K x K x L`, index `(rx * K + tx) * L + l`.
    tau: Vec<C64>,
    /// Flattened `K x K`, index `rx * K + tx`.
    h: Vec<CMat>,
    pub seed: u64,
    pub blocks: Arc<BuildingBlocks>,
}

impl ChannelInstance {
    /// Assembles `H_kj = sum_l tau_kj^l A_l` from explicit coefficients.
    pub fn from_tau(blocks: Arc<BuildingBlocks>, k: usize, tau: Vec<C64>, seed: u64) -> Result<Self> {
        let l = blocks.l();
        if tau.len() != k * k * l {
            return Err(Error::DimensionMismatch(format!(
                "expected {} coefficients for K = {k}, L = {l}, got {}",
                k * k * l,
                tau.len()
            )));
        }
        let h = tau.chunks(l).map(|c| blocks.combine(c)).collect();
        Ok(Self { k, tau, h, seed, blocks })
    }

    /// Sub-network seen by `users` on the row/column window of one slot.
    /// Blocks and coefficients are restricted accordingly, so the result is
    /// still a valid building-block instance.
    pub fn restrict(&self, users: &[usize], rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Self {
        let sub = |m: &CMat| m.view((rows.start, cols.start), (rows.len(), cols.len())).into_owned();
        let blocks: Vec<CMat> = self.blocks.blocks.iter().map(sub).collect();
        let family = ChannelFamily::Custom { nr: rows.len(), nt: cols.len(), blocks: blocks.clone() };
        let k = users.len();
        let mut tau = Vec::with_capacity(k * k * self.l());
        let mut h = Vec::with_capacity(k * k);
        for &rx in users {
            for &tx in users {
                tau.extend_from_slice(self.tau(rx, tx));
                h.push(sub(self.h(rx, tx)));
            }
        }
        Self { k, tau, h, seed: self.seed, blocks: Arc::new(BuildingBlocks { family, blocks }) }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn nr(&self) -> usize {
        self.h[0].nrows()
    }

    pub fn nt(&self) -> usize {
        self.h[0].ncols()
    }

    pub fn l(&self) -> usize {
        self.blocks.l()
    }

    /// Channel from transmitter `tx` to receiver `rx`.
    pub fn h(&self, rx: usize, tx: usize) -> &CMat {
        &self.h[rx * self.k + tx]
    }

    pub fn tau(&self, rx: usize, tx: usize) -> &[C64] {
        let l = self.l();
        &self.tau[(rx * self.k + tx) * l..(rx * self.k + tx + 1) * l]
    }

    pub fn tau_all(&self) -> &[C64] {
        &self.tau
    }

    /// Reciprocal network: `H'_kj = H_jk^H`, blocks `A_l^H`, coefficients
    /// conjugated. Transmit and receive roles swap.
    pub fn reciprocal(&self) -> Self {
        let l = self.l();
        let blocks: Vec<CMat> = self.blocks.blocks.iter().map(|a| a.adjoint()).collect();
        let (nr, nt) = (self.nt(), self.nr());
        let family = ChannelFamily::Custom { nr, nt, blocks: blocks.clone() };
        let mut tau = vec![zero(); self.tau.len()];
        let mut h = Vec::with_capacity(self.h.len());
        for rx in 0..self.k {
            for tx in 0..self.k {
                if l > 0 {
                    for (dst, src) in tau[(rx * self.k + tx) * l..][..l].iter_mut().zip(self.tau(tx, rx)) {
                        *dst = src.conj();
                    }
                }
                h.push(self.h(tx, rx).adjoint());
            }
        }
        Self { k: self.k, tau, h, seed: self.seed, blocks: Arc::new(BuildingBlocks { family, blocks }) }
    }

    /// Multiplies every link by the same scalar, coefficients included.
    pub fn scaled(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.tau.iter_mut().for_each(|t| *t *= s);
        out.h.iter_mut().for_each(|m| *m *= s);
        out
    }
}

/// Draws `tau` i.i.d. standard Gaussian (complex, or real for ACS) and
/// assembles the channel. Deterministic in `(blocks, k, seed)`.
pub fn sample_instance(blocks: &Arc<BuildingBlocks>, k: usize, seed: u64) -> Result<ChannelInstance> {
    if k == 0 {
        return Err(Error::InvalidFamilyParams("K must be >= 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    let real = blocks.family.real_coefficients();
    let tau: Vec<C64> = (0..k * k * blocks.l())
        .map(|_| {
            if real {
                C64::new(real_gaussian(&mut rng), 0.0)
            } else {
                complex_gaussian(&mut rng)
            }
        })
        .collect();
    ChannelInstance::from_tau(Arc::clone(blocks), k, tau, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn assert_mat_eq(a: &CMat, rows: &[&[C64]]) {
        assert_eq!(a.nrows(), rows.len());
        for (i, row) in rows.iter().enumerate() {
            for (j, z) in row.iter().enumerate() {
                assert!((a[(i, j)] - z).norm() < 1e-15, "entry ({i},{j}) = {} != {}", a[(i, j)], z);
            }
        }
    }

    #[test]
    fn siso_generic_blocks_are_unit_diagonals() {
        let bb = build_blocks(&ChannelFamily::SisoGenericExt { t: 3 }).unwrap();
        assert_eq!(bb.l(), 3);
        for (l, a) in bb.blocks.iter().enumerate() {
            assert_eq!(*a, diag((0..3).map(|i| if i == l { one() } else { zero() })));
        }
    }

    #[test]
    fn acs_blocks_match_identity_and_rotation() {
        let bb = build_blocks(&ChannelFamily::AcsConstant { t: 1 }).unwrap();
        assert_mat_eq(&bb.blocks[0], &[&[c(1., 0.), c(0., 0.)], &[c(0., 0.), c(1., 0.)]]);
        assert_mat_eq(&bb.blocks[1], &[&[c(0., 0.), c(-1., 0.)], &[c(1., 0.), c(0., 0.)]]);
    }

    #[test]
    fn two_tap_blocks_over_two_tones() {
        let bb = build_blocks(&ChannelFamily::SisoLTap { n: 2, delays: vec![0, 1] }).unwrap();
        assert_mat_eq(&bb.blocks[0], &[&[c(1., 0.), c(0., 0.)], &[c(0., 0.), c(1., 0.)]]);
        assert_mat_eq(&bb.blocks[1], &[&[c(1., 0.), c(0., 0.)], &[c(0., 0.), c(-1., 0.)]]);
    }

    #[test]
    fn block_fading_blocks_partition_identity() {
        let bb = build_blocks(&ChannelFamily::SisoBlockFading { block_lengths: vec![1, 2] }).unwrap();
        assert_eq!(bb.blocks[0], diag([one(), zero(), zero()]));
        assert_eq!(bb.blocks[1], diag([zero(), one(), one()]));
        assert_eq!(&bb.blocks[0] + &bb.blocks[1], CMat::identity(3, 3));
        assert!(check_psi(&bb, 1, 0, RANK_TOL));
    }

    #[test]
    fn mimo_generic_ext_blocks_are_per_slot_elementary() {
        let bb = build_blocks(&ChannelFamily::MimoGenericExt { mt: 2, mr: 2, t: 3 }).unwrap();
        assert_eq!(bb.l(), 12);
        for a in &bb.blocks {
            assert_eq!(a.iter().filter(|z| **z == one()).count(), 1);
        }
        let ext = build_blocks(&ChannelFamily::MimoConstantExt { mt: 1, mr: 2, t: 2 }).unwrap();
        assert_eq!((ext.nr(), ext.nt(), ext.l()), (4, 2, 2));
        assert_eq!(ext.blocks[0][(0, 0)], one());
        assert_eq!(ext.blocks[0][(2, 1)], one());
    }

    #[test]
    fn diversity_orders_of_named_examples() {
        let order = |f: ChannelFamily| diversity_order(&build_blocks(&f).unwrap(), RANK_TOL);
        assert_eq!(order(ChannelFamily::SisoGenericExt { t: 4 }), 4);
        assert_eq!(order(ChannelFamily::MimoGenericExt { mt: 2, mr: 2, t: 3 }), 12);
        assert_eq!(order(ChannelFamily::AcsConstant { t: 5 }), 2);
    }

    #[test]
    fn invalid_params_are_rejected() {
        let cases = [
            ChannelFamily::SisoLTap { n: 2, delays: vec![1, 0] },
            ChannelFamily::SisoLTap { n: 2, delays: vec![0, 2] },
            ChannelFamily::SisoLTap { n: 1, delays: vec![0, 1] },
            ChannelFamily::SisoBlockFading { block_lengths: vec![] },
            ChannelFamily::SisoBlockFading { block_lengths: vec![2, 0] },
            ChannelFamily::MimoConstant { mt: 0, mr: 2 },
            ChannelFamily::SisoGenericExt { t: 0 },
        ];
        for f in cases {
            assert!(matches!(build_blocks(&f), Err(Error::InvalidFamilyParams(_))), "{f:?}");
        }
    }

    #[test]
    fn degenerate_custom_blocks() {
        let mut e11 = CMat::zeros(2, 2);
        e11[(0, 0)] = one();
        let bb = BuildingBlocks { family: ChannelFamily::Custom { nr: 2, nt: 2, blocks: vec![e11.clone()] }, blocks: vec![e11.clone()] };
        assert!(!check_psi(&bb, 10, 3, RANK_TOL));
        let f = ChannelFamily::Custom { nr: 2, nt: 2, blocks: vec![e11.clone()] };
        assert!(matches!(build_blocks(&f), Err(Error::DegenerateBlocks(_))));
        let f = ChannelFamily::Custom { nr: 2, nt: 2, blocks: vec![e11.clone(), e11 * c(2.0, 0.0)] };
        assert!(matches!(build_blocks(&f), Err(Error::DegenerateBlocks(_))));
        let f = ChannelFamily::Custom { nr: 2, nt: 2, blocks: vec![CMat::identity(2, 2)] };
        assert!(build_blocks(&f).is_ok());
    }

    #[test]
    fn single_user_siso_instance_is_diagonal_of_tau() {
        let bb = Arc::new(build_blocks(&ChannelFamily::SisoGenericExt { t: 2 }).unwrap());
        let inst = sample_instance(&bb, 1, 0).unwrap();
        let tau = inst.tau(0, 0);
        assert_eq!(*inst.h(0, 0), diag([tau[0], tau[1]]));
    }

    #[test]
    fn sampling_is_deterministic_and_seed_sensitive() {
        let bb = Arc::new(build_blocks(&ChannelFamily::MimoConstant { mt: 2, mr: 2 }).unwrap());
        let a = sample_instance(&bb, 3, 11).unwrap();
        let b = sample_instance(&bb, 3, 11).unwrap();
        let c = sample_instance(&bb, 3, 12).unwrap();
        assert_eq!(a.tau_all(), b.tau_all());
        assert_ne!(a.tau_all(), c.tau_all());
    }

    #[test]
    fn acs_coefficients_are_real() {
        let bb = Arc::new(build_blocks(&ChannelFamily::AcsConstant { t: 2 }).unwrap());
        let inst = sample_instance(&bb, 2, 5).unwrap();
        assert!(inst.tau_all().iter().all(|z| z.im == 0.0));
        assert!(inst.h(0, 1).iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn reciprocal_swaps_links() {
        let bb = Arc::new(build_blocks(&ChannelFamily::MimoConstant { mt: 2, mr: 3 }).unwrap());
        let inst = sample_instance(&bb, 3, 2).unwrap();
        let rec = inst.reciprocal();
        assert_eq!((rec.nr(), rec.nt()), (2, 3));
        assert_eq!(*rec.h(0, 2), inst.h(2, 0).adjoint());
        let rebuilt = rec.blocks.combine(rec.tau(0, 2));
        assert!((rebuilt - rec.h(0, 2)).norm() < 1e-14);
    }

    #[test]
    fn family_round_trips_through_params() {
        let f = ChannelFamily::SisoLTap { n: 4, delays: vec![0, 2, 3] };
        let params: BTreeMap<String, String> = f.params().into_iter().collect();
        assert_eq!(ChannelFamily::from_name_params(f.name(), &params).unwrap(), f);
        assert_eq!(f.to_string(), "siso-ltap{N=4,delays=0:2:3}");
    }
}
