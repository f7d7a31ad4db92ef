//! Closed-form user-count and DoF bounds for single-beam alignment.

use serde::{Deserialize, Serialize};

use crate::channel::ChannelFamily;
use crate::error::Result;

/// Upper bound for `T` generic extensions of an `Mt x Mr` channel:
/// `(Mr + Mt) T - 1`.
pub fn thm1_upper(mt: usize, mr: usize, t: usize) -> usize {
    (mr + mt) * t - 1
}

/// Users served by slot orthogonalization: `(Mr + Mt - 1) T`.
pub fn thm1_achievable(mt: usize, mr: usize, t: usize) -> usize {
    (mr + mt - 1) * t
}

/// Upper bound for diversity order `L` and dimension `N = min(Nt, Nr)`:
/// `floor(N L + N^2 / 4)`.
pub fn thm2_upper(n: usize, l: usize) -> usize {
    n * l + n * n / 4
}

/// SISO single-beam DoF cap `min(sqrt(5K/4), L + T/4)`.
pub fn coro_dof_siso(k: usize, t: usize, l: usize) -> f64 {
    (1.25 * k as f64).sqrt().min(l as f64 + 0.25 * t as f64)
}

/// MIMO single-beam DoF cap `Mt sqrt(5 Mr K / 4)` with `Mt <= Mr`; larger
/// `Mt` is swapped in.
pub fn mimo_dof_single_beam_upper(mt: usize, mr: usize, k: usize) -> f64 {
    let (small, large) = if mt <= mr { (mt, mr) } else { (mr, mt) };
    small as f64 * (1.25 * large as f64 * k as f64).sqrt()
}

/// Users an orthogonalizing scheme reaches on favorable models: `N L`.
pub fn orthogonal_lower(n: usize, l: usize) -> usize {
    n * l
}

/// Constant MIMO user limit `Mt + Mr - 1`.
pub fn prop_constant_mimo(mt: usize, mr: usize) -> usize {
    mt + mr - 1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundEntry {
    pub tag: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub family: String,
    #[serde(rename = "K")]
    pub k: Option<usize>,
    pub n: usize,
    pub l: usize,
    pub t: usize,
    /// Tightest applicable upper bound on the user count.
    pub upper_k: usize,
    /// User count reached by a known construction.
    pub achievable_k: usize,
    pub dof_upper: f64,
    pub dof_lower: f64,
    /// Every number that went into the report, labelled by its source.
    pub formula_tags: Vec<BoundEntry>,
    pub notes: Vec<String>,
}

fn entry(tag: &str, value: f64) -> BoundEntry {
    BoundEntry { tag: tag.to_string(), value }
}

/// Collects the bounds that apply to `family`; `k` adds the DoF caps that
/// depend on the user count.
pub fn bound_report(family: &ChannelFamily, k: Option<usize>) -> Result<BoundReport> {
    family.validate()?;
    let (mt, mr, t, l) = (family.mt(), family.mr(), family.t(), family.diversity());
    let n = family.nt().min(family.nr());
    let mut tags = Vec::new();
    let mut notes = Vec::new();

    let general = thm2_upper(n, l);
    tags.push(entry("upper: diversity-order bound NL + N^2/4", general as f64));
    let mut upper = general;

    let generic_ext = matches!(
        family,
        ChannelFamily::SisoGenericExt { .. } | ChannelFamily::MimoGenericExt { .. } | ChannelFamily::MimoConstant { .. }
    );
    if generic_ext {
        let ext = thm1_upper(mt, mr, t);
        tags.push(entry("upper: generic-extension bound (Mr+Mt)T - 1", ext as f64));
        upper = upper.min(ext);
        if t >= 2 {
            notes.push("for T >= 2 the generic-extension bound is believed to improve by one; not applied".into());
        }
    }
    if let ChannelFamily::MimoConstant { mt, mr } = family {
        let p = prop_constant_mimo(*mt, *mr);
        tags.push(entry("upper: constant MIMO limit Mt + Mr - 1", p as f64));
        upper = upper.min(p);
    }

    let achievable = match family.slot_layout() {
        Some(layout) => {
            let a = thm1_achievable(layout.mt, layout.mr, layout.t);
            tags.push(entry("achievable: slot orthogonalization (Mr+Mt-1)T", a as f64));
            a
        }
        None => {
            tags.push(entry("achievable: trivial orthogonal scheme N", n as f64));
            n
        }
    };
    if matches!(family, ChannelFamily::MimoConstantExt { mt: 1, .. }) {
        tags.push(entry("achievable: SIMO orthogonal lower bound NL", orthogonal_lower(n, l) as f64));
    }

    let t_f = t as f64;
    let mut dof_upper = upper as f64 / t_f;
    if let Some(k) = k {
        if family.is_siso() {
            let c = coro_dof_siso(k, t, l);
            tags.push(entry("dof upper: SISO min(sqrt(5K/4), L + T/4)", c));
            dof_upper = dof_upper.min(c);
        } else if family.slot_layout().is_some() {
            let c = mimo_dof_single_beam_upper(mt, mr, k);
            tags.push(entry("dof upper: MIMO Mt sqrt(5 Mr K / 4)", c));
            dof_upper = dof_upper.min(c);
        }
        if k > upper {
            notes.push(format!("K = {k} exceeds the upper bound {upper}"));
        }
    }

    Ok(BoundReport {
        family: family.to_string(),
        k,
        n,
        l,
        t,
        upper_k: upper,
        achievable_k: achievable,
        dof_upper,
        dof_lower: achievable as f64 / t_f,
        formula_tags: tags,
        notes,
    })
}
