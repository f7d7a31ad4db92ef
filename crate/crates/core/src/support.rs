//! Support-level view of the zero-forcing equations: the scaled polynomial
//! system as monomial supports, partial systems, the disjoint/overlapping
//! pair partition of a support pattern, and the counting and induction
//! tests that rule patterns out.

use serde::{Deserialize, Serialize};

use crate::channel::{build_blocks, ChannelFamily, SlotLayout};
use crate::error::{Error, Result};
use crate::linalg::CVec;
use crate::solver::BeamformerSet;

/// Largest variable count [`improper_everywhere`] will enumerate.
pub const IMPROPER_MAX_VARS: usize = 22;

/// Largest variable count a [`ZfSystem`] can hold.
pub const MAX_VARS: usize = 128;

/// Default pattern budget for [`enumerate_block_patterns`].
pub const DEFAULT_PATTERN_BUDGET: u128 = 10_000_000;

/// Entries with modulus above this, after normalization, count as nonzero.
pub const SUPPORT_THRESHOLD: f64 = 1e-6;

pub type VarSet = u128;

/// Where a zero-forcing system came from.
#[derive(Debug, Clone, PartialEq)]
pub struct ZfMeta {
    pub family: ChannelFamily,
    pub k: usize,
    pub receive_anchors: Vec<usize>,
    pub transmit_anchors: Vec<usize>,
}

/// A polynomial system recorded only by which variables each monomial
/// touches, plus whether each equation keeps a constant term.
#[derive(Debug, Clone, PartialEq)]
pub struct ZfSystem {
    pub n: usize,
    pub m: usize,
    /// Per equation, the variable sets of its non-constant monomials.
    pub monomials: Vec<Vec<VarSet>>,
    pub has_constant: Vec<bool>,
    pub meta: Option<ZfMeta>,
}

fn full_set(n: usize) -> VarSet {
    if n >= MAX_VARS {
        VarSet::MAX
    } else {
        (1 << n) - 1
    }
}

impl ZfSystem {
    /// Builds a system from raw monomial supports. Duplicate monomials are
    /// merged and an empty variable set is treated as the constant term.
    pub fn from_parts(n: usize, monomials: Vec<Vec<VarSet>>, has_constant: Vec<bool>) -> Result<Self> {
        if n > MAX_VARS {
            return Err(Error::TooLarge { n, cap: MAX_VARS });
        }
        if monomials.len() != has_constant.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} monomial lists for {} equations",
                monomials.len(),
                has_constant.len()
            )));
        }
        let all = full_set(n);
        let mut has_constant = has_constant;
        let mut cleaned = Vec::with_capacity(monomials.len());
        for (eq, mons) in monomials.into_iter().enumerate() {
            let mut kept = Vec::new();
            for mon in mons {
                if mon & !all != 0 {
                    return Err(Error::DimensionMismatch(format!(
                        "equation {eq} references a variable outside [0, {n})"
                    )));
                }
                if mon == 0 {
                    has_constant[eq] = true;
                } else if !kept.contains(&mon) {
                    kept.push(mon);
                }
            }
            kept.sort_unstable();
            cleaned.push(kept);
        }
        Ok(Self { n, m: cleaned.len(), monomials: cleaned, has_constant, meta: None })
    }

    fn equation_nonzero(&self, eq: usize, support: VarSet) -> bool {
        self.has_constant[eq] || self.monomials[eq].iter().any(|&mon| mon & !support == 0)
    }

    /// Number of equations that survive restriction to `support`, without
    /// building the restricted system.
    pub fn count_nonzero_on(&self, support: VarSet) -> usize {
        (0..self.m).filter(|&eq| self.equation_nonzero(eq, support)).count()
    }
}

/// Variable numbering for a system built from a channel family: the free
/// receive entries of every user first, then the free transmit entries.
#[derive(Debug, Clone)]
struct VarIndex {
    nr: usize,
    nt: usize,
    receive_anchors: Vec<usize>,
    transmit_anchors: Vec<usize>,
}

impl VarIndex {
    fn n(&self) -> usize {
        let k = self.receive_anchors.len();
        k * (self.nr - 1) + k * (self.nt - 1)
    }

    fn receive(&self, k: usize, p: usize) -> Option<usize> {
        let r = self.receive_anchors[k];
        (p != r).then(|| k * (self.nr - 1) + if p < r { p } else { p - 1 })
    }

    fn transmit(&self, j: usize, q: usize) -> Option<usize> {
        let s = self.transmit_anchors[j];
        let base = self.receive_anchors.len() * (self.nr - 1);
        (q != s).then(|| base + j * (self.nt - 1) + if q < s { q } else { q - 1 })
    }
}

/// Scaled zero-forcing system with every user's first receive and transmit
/// entries fixed to one.
pub fn build_zf_system(family: &ChannelFamily, k: usize) -> Result<ZfSystem> {
    build_zf_system_with_anchors(family, k, &vec![0; k], &vec![0; k])
}

/// Scaled zero-forcing system with explicit anchors: user `k`'s receive
/// entry `receive_anchors[k]` and transmit entry `transmit_anchors[k]` are
/// fixed to one. One equation per ordered cross pair `(k, j)`, in row-major
/// order; monomials follow the union sparsity of the building blocks.
pub fn build_zf_system_with_anchors(
    family: &ChannelFamily,
    k: usize,
    receive_anchors: &[usize],
    transmit_anchors: &[usize],
) -> Result<ZfSystem> {
    let blocks = build_blocks(family)?;
    let (nr, nt) = (blocks.nr(), blocks.nt());
    if receive_anchors.len() != k || transmit_anchors.len() != k {
        return Err(Error::DimensionMismatch(format!("need {k} receive and transmit anchors")));
    }
    if receive_anchors.iter().any(|&r| r >= nr) || transmit_anchors.iter().any(|&s| s >= nt) {
        return Err(Error::DimensionMismatch("anchor index out of range".into()));
    }
    let index = VarIndex {
        nr,
        nt,
        receive_anchors: receive_anchors.to_vec(),
        transmit_anchors: transmit_anchors.to_vec(),
    };
    let n = index.n();
    if n > MAX_VARS {
        return Err(Error::TooLarge { n, cap: MAX_VARS });
    }
    let sparsity: Vec<(usize, usize)> = (0..nr)
        .flat_map(|p| (0..nt).map(move |q| (p, q)))
        .filter(|&(p, q)| blocks.blocks.iter().any(|a| a[(p, q)].norm() > 0.0))
        .collect();
    let bit = |v: Option<usize>| v.map_or(0, |i| 1 << i);
    let mut monomials = Vec::with_capacity(k * k.saturating_sub(1));
    let mut has_constant = Vec::with_capacity(monomials.capacity());
    for rx in 0..k {
        for tx in (0..k).filter(|&tx| tx != rx) {
            let mons: Vec<VarSet> = sparsity
                .iter()
                .map(|&(p, q)| bit(index.receive(rx, p)) | bit(index.transmit(tx, q)))
                .collect();
            monomials.push(mons);
            has_constant.push(false);
        }
    }
    let mut sys = ZfSystem::from_parts(n, monomials, has_constant)?;
    sys.meta = Some(ZfMeta {
        family: family.clone(),
        k,
        receive_anchors: receive_anchors.to_vec(),
        transmit_anchors: transmit_anchors.to_vec(),
    });
    Ok(sys)
}

/// Partial system on `support`: every monomial touching a variable outside
/// the support is dropped; constant terms survive.
pub fn restrict(sys: &ZfSystem, support: VarSet) -> ZfSystem {
    let monomials = sys
        .monomials
        .iter()
        .map(|mons| mons.iter().copied().filter(|&mon| mon & !support == 0).collect())
        .collect();
    ZfSystem { monomials, ..sys.clone() }
}

/// Equations that are not identically zero.
pub fn count_nonzero(sys: &ZfSystem) -> usize {
    (0..sys.m).filter(|&eq| sys.has_constant[eq] || !sys.monomials[eq].is_empty()).count()
}

/// True iff every partial system has more nonzero equations than variables.
pub fn improper_everywhere(sys: &ZfSystem) -> Result<bool> {
    if sys.n > IMPROPER_MAX_VARS {
        return Err(Error::TooLarge { n: sys.n, cap: IMPROPER_MAX_VARS });
    }
    Ok((0..1u128 << sys.n).all(|support| sys.count_nonzero_on(support) > support.count_ones() as usize))
}

/// Common view of entry-level and block-level support patterns.
pub trait Pattern {
    fn receive(&self) -> &[Vec<usize>];
    fn transmit(&self) -> &[Vec<usize>];
    /// Number of index positions each support is drawn from.
    fn positions(&self) -> usize;
    /// Variable count of the partial system and whether it is only an upper
    /// bound.
    fn j_count(&self) -> (usize, bool);

    fn k(&self) -> usize {
        self.receive().len()
    }
}

fn validate_sets(sets: &[Vec<usize>], limit: usize, what: &str) -> Result<()> {
    for (k, s) in sets.iter().enumerate() {
        if s.is_empty() {
            return Err(Error::Config(format!("{what} support of user {k} is empty")));
        }
        if s.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!("{what} support of user {k} must be strictly increasing")));
        }
        if s.iter().any(|&i| i >= limit) {
            return Err(Error::Config(format!("{what} support of user {k} exceeds {limit} positions")));
        }
    }
    Ok(())
}

/// Entry supports of diagonal (SISO) beamformers, 0-based. The anchors are
/// the smallest index of each support.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportPattern {
    #[serde(rename = "R")]
    pub r: Vec<Vec<usize>>,
    #[serde(rename = "S")]
    pub s: Vec<Vec<usize>>,
    #[serde(skip)]
    pub t: usize,
}

impl SupportPattern {
    pub fn new(t: usize, mut r: Vec<Vec<usize>>, mut s: Vec<Vec<usize>>) -> Result<Self> {
        for set in r.iter_mut().chain(s.iter_mut()) {
            set.sort_unstable();
            set.dedup();
        }
        if r.len() != s.len() {
            return Err(Error::Config(format!("{} receive and {} transmit supports", r.len(), s.len())));
        }
        validate_sets(&r, t, "receive")?;
        validate_sets(&s, t, "transmit")?;
        Ok(Self { r, s, t })
    }

    pub fn receive_anchors(&self) -> Vec<usize> {
        self.r.iter().map(|s| s[0]).collect()
    }

    pub fn transmit_anchors(&self) -> Vec<usize> {
        self.s.iter().map(|s| s[0]).collect()
    }

    /// The free variables of this pattern in the system built with its own
    /// anchors.
    pub fn variables(&self) -> VarSet {
        let index = VarIndex {
            nr: self.t,
            nt: self.t,
            receive_anchors: self.receive_anchors(),
            transmit_anchors: self.transmit_anchors(),
        };
        let mut set = 0;
        for (k, rk) in self.r.iter().enumerate() {
            set |= rk.iter().filter_map(|&p| index.receive(k, p)).fold(0, |acc, i| acc | 1 << i);
        }
        for (j, sj) in self.s.iter().enumerate() {
            set |= sj.iter().filter_map(|&q| index.transmit(j, q)).fold(0, |acc, i| acc | 1 << i);
        }
        set
    }
}

impl Pattern for SupportPattern {
    fn receive(&self) -> &[Vec<usize>] {
        &self.r
    }
    fn transmit(&self) -> &[Vec<usize>] {
        &self.s
    }
    fn positions(&self) -> usize {
        self.t
    }
    fn j_count(&self) -> (usize, bool) {
        let total: usize = self.r.iter().chain(&self.s).map(Vec::len).sum();
        (total - 2 * self.k(), false)
    }
}

/// Slot-level supports of block-diagonal beamformers, 0-based slot indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSupportPattern {
    #[serde(rename = "Rb")]
    pub rb: Vec<Vec<usize>>,
    #[serde(rename = "Sb")]
    pub sb: Vec<Vec<usize>>,
    #[serde(skip)]
    pub layout: Option<SlotLayout>,
}

impl BlockSupportPattern {
    pub fn new(layout: SlotLayout, mut rb: Vec<Vec<usize>>, mut sb: Vec<Vec<usize>>) -> Result<Self> {
        for set in rb.iter_mut().chain(sb.iter_mut()) {
            set.sort_unstable();
            set.dedup();
        }
        if rb.len() != sb.len() {
            return Err(Error::Config(format!("{} receive and {} transmit supports", rb.len(), sb.len())));
        }
        validate_sets(&rb, layout.t, "receive")?;
        validate_sets(&sb, layout.t, "transmit")?;
        Ok(Self { rb, sb, layout: Some(layout) })
    }

    fn layout(&self) -> SlotLayout {
        self.layout.expect("block pattern built without a slot layout")
    }
}

impl Pattern for BlockSupportPattern {
    fn receive(&self) -> &[Vec<usize>] {
        &self.rb
    }
    fn transmit(&self) -> &[Vec<usize>] {
        &self.sb
    }
    fn positions(&self) -> usize {
        self.layout().t
    }
    fn j_count(&self) -> (usize, bool) {
        let SlotLayout { mt, mr, .. } = self.layout();
        let total: usize =
            self.rb.iter().map(|s| s.len() * mr).sum::<usize>() + self.sb.iter().map(|s| s.len() * mt).sum::<usize>();
        (total - 2 * self.k(), mt * mr > 1)
    }
}

/// Result of the counting test on one pattern.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountReport {
    #[serde(rename = "J_size")]
    pub j_size: usize,
    /// Set when `j_size` is an upper bound rather than exact.
    #[serde(rename = "J_is_upper_bound")]
    pub j_is_upper_bound: bool,
    #[serde(rename = "PJ_size")]
    pub pj_size: usize,
    /// Ordered cross pairs `(k, j)` with disjoint supports.
    pub omega: Vec<(usize, usize)>,
    /// Ordered cross pairs with overlapping supports.
    pub omega_c: Vec<(usize, usize)>,
    pub ruled_out: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub audit: Option<bool>,
}

fn disjoint(a: &[usize], b: &[usize]) -> bool {
    !a.iter().any(|x| b.binary_search(x).is_ok())
}

/// Splits the ordered cross pairs by whether receive support `k` and
/// transmit support `j` are disjoint.
pub fn omega_partition<P: Pattern + ?Sized>(pattern: &P) -> (Vec<(usize, usize)>, Vec<(usize, usize)>) {
    let (r, s) = (pattern.receive(), pattern.transmit());
    let mut omega = Vec::new();
    let mut omega_c = Vec::new();
    for k in 0..pattern.k() {
        for j in (0..pattern.k()).filter(|&j| j != k) {
            if disjoint(&r[k], &s[j]) {
                omega.push((k, j));
            } else {
                omega_c.push((k, j));
            }
        }
    }
    (omega, omega_c)
}

pub fn count_j<P: Pattern + ?Sized>(pattern: &P) -> (usize, bool) {
    pattern.j_count()
}

/// Compares the nonzero equation count of the partial system (the number
/// of overlapping pairs) with its variable count.
pub fn counting_verdict<P: Pattern + ?Sized>(pattern: &P) -> CountReport {
    let (omega, omega_c) = omega_partition(pattern);
    let (j_size, j_is_upper_bound) = pattern.j_count();
    CountReport {
        j_size,
        j_is_upper_bound,
        pj_size: omega_c.len(),
        ruled_out: omega_c.len() > j_size,
        omega,
        omega_c,
        audit: None,
    }
}

/// Maximum user count per free position used by [`induction_audit`]:
/// `f(0) = 0`, `f(t) = (mr + mt) t - 1`.
pub fn default_f_upper(mt: usize, mr: usize) -> impl Fn(usize) -> usize {
    move |t| if t == 0 { 0 } else { (mr + mt) * t - 1 }
}

/// Checks that each receiver is disjoint from at most `f(T - a_k)`
/// transmitters and each transmitter from at most `f(T - b_j)` receivers.
pub fn induction_audit<P: Pattern + ?Sized>(pattern: &P, f_upper: &dyn Fn(usize) -> usize) -> bool {
    let t = pattern.positions();
    let k = pattern.k();
    let (omega, _) = omega_partition(pattern);
    let mut per_receiver = vec![0usize; k];
    let mut per_transmitter = vec![0usize; k];
    for &(rx, tx) in &omega {
        per_receiver[rx] += 1;
        per_transmitter[tx] += 1;
    }
    let receive_ok = (0..k).all(|i| per_receiver[i] <= f_upper(t - pattern.receive()[i].len()));
    let transmit_ok = (0..k).all(|i| per_transmitter[i] <= f_upper(t - pattern.transmit()[i].len()));
    receive_ok && transmit_ok
}

/// Every block-support pattern of a slot family with `k` users, each with
/// its counting verdict and induction audit (default `f`). Patterns are
/// produced in lexicographic order of their slot masks `(Rb_1..Rb_K,
/// Sb_1..Sb_K)`.
pub fn enumerate_block_patterns(
    family: &ChannelFamily,
    k: usize,
    budget: u128,
) -> Result<impl Iterator<Item = (BlockSupportPattern, CountReport)>> {
    let layout = family
        .slot_layout()
        .ok_or_else(|| Error::UnsupportedFamily(format!("{} has no slot structure", family.name())))?;
    if layout.t > 16 {
        return Err(Error::TooLarge { n: layout.t, cap: 16 });
    }
    let choices = (1u128 << layout.t) - 1;
    let needed = (0..2 * k).try_fold(1u128, |acc, _| acc.checked_mul(choices)).unwrap_or(u128::MAX);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let f = default_f_upper(layout.mt, layout.mr);
    let mut digits = vec![1u32; 2 * k];
    let mut done = k == 0;
    let max = choices as u32;
    Ok(std::iter::from_fn(move || {
        if done {
            return None;
        }
        let sets: Vec<Vec<usize>> =
            digits.iter().map(|&mask| (0..layout.t).filter(|&i| mask >> i & 1 == 1).collect()).collect();
        let pattern = BlockSupportPattern { rb: sets[..k].to_vec(), sb: sets[k..].to_vec(), layout: Some(layout) };
        let mut report = counting_verdict(&pattern);
        report.audit = Some(induction_audit(&pattern, &f));
        done = true;
        for d in digits.iter_mut().rev() {
            if *d < max {
                *d += 1;
                done = false;
                break;
            }
            *d = 1;
        }
        Some((pattern, report))
    }))
}

/// A pattern survives when it is neither ruled out by counting nor fails
/// the induction audit.
pub fn survives(report: &CountReport) -> bool {
    !report.ruled_out && report.audit != Some(false)
}

/// Indices of entries of the normalized vector with modulus above
/// `threshold`.
pub fn support_of(v: &CVec, threshold: f64) -> Vec<usize> {
    let norm = v.norm();
    if norm == 0.0 {
        return Vec::new();
    }
    v.iter().enumerate().filter(|(_, z)| z.norm() / norm > threshold).map(|(i, _)| i).collect()
}

/// Slots in which the normalized vector has an entry above `threshold`.
pub fn block_support_of(v: &CVec, t: usize, width: usize, threshold: f64) -> Vec<usize> {
    let entries = support_of(v, threshold);
    let mut slots: Vec<usize> = entries.into_iter().map(|i| i / width).filter(|&b| b < t).collect();
    slots.dedup();
    slots
}

/// Block-support pattern of numerical beams on a slot family.
pub fn empirical_block_pattern(
    beams: &BeamformerSet,
    layout: SlotLayout,
    threshold: f64,
) -> Result<BlockSupportPattern> {
    let rb = beams.u.iter().map(|u| block_support_of(u, layout.t, layout.mr, threshold)).collect();
    let sb = beams.v.iter().map(|v| block_support_of(v, layout.t, layout.mt, threshold)).collect();
    BlockSupportPattern::new(layout, rb, sb)
}

/// Pattern file contents: entry supports `{R, S}` or block supports
/// `{Rb, Sb}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PatternFile {
    Entry(SupportPattern),
    Block(BlockSupportPattern),
}

impl PatternFile {
    /// Validates the file against a family and returns the counting report
    /// with the default induction audit.
    pub fn evaluate(&self, family: &ChannelFamily) -> Result<CountReport> {
        let layout = family
            .slot_layout()
            .ok_or_else(|| Error::UnsupportedFamily(format!("{} has no slot structure", family.name())))?;
        let f = default_f_upper(layout.mt, layout.mr);
        let mut report;
        match self {
            Self::Entry(p) => {
                if !family.is_siso() {
                    return Err(Error::UnsupportedFamily(format!(
                        "entry supports need a SISO family; use block supports for {}",
                        family.name()
                    )));
                }
                let p = SupportPattern::new(layout.t, p.r.clone(), p.s.clone())?;
                report = counting_verdict(&p);
                report.audit = Some(induction_audit(&p, &f));
            }
            Self::Block(p) => {
                let p = BlockSupportPattern::new(layout, p.rb.clone(), p.sb.clone())?;
                report = counting_verdict(&p);
                report.audit = Some(induction_audit(&p, &f));
            }
        }
        Ok(report)
    }
}
