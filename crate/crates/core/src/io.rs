//! JSON file formats. Complex numbers are `[re, im]` pairs, matrices are
//! arrays of rows.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::channel::{build_blocks, BuildingBlocks, ChannelFamily, ChannelInstance};
use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec, C64};
use crate::solver::{BeamformerSet, FeasibilityReport};

pub type Pair = [f64; 2];

pub fn pair(z: C64) -> Pair {
    [z.re, z.im]
}

pub fn from_pair(p: Pair) -> C64 {
    C64::new(p[0], p[1])
}

pub fn vector_pairs(v: &CVec) -> Vec<Pair> {
    v.iter().copied().map(pair).collect()
}

pub fn vector_from_pairs(p: &[Pair]) -> CVec {
    CVec::from_iterator(p.len(), p.iter().copied().map(from_pair))
}

pub fn matrix_rows(m: &CMat) -> Vec<Vec<Pair>> {
    m.row_iter().map(|r| r.iter().copied().map(pair).collect()).collect()
}

pub fn matrix_from_rows(rows: &[Vec<Pair>]) -> Result<CMat> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::DimensionMismatch("ragged matrix rows".into()));
    }
    Ok(CMat::from_fn(rows.len(), ncols, |i, j| from_pair(rows[i][j])))
}

/// Serde adapter for `Vec<CMat>` as a list of row-major `[re, im]` matrices.
pub mod matrix_list {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::{matrix_from_rows, matrix_rows, Pair};
    use crate::linalg::CMat;

    pub fn serialize<S: Serializer>(blocks: &[CMat], s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<Vec<Pair>>> = blocks.iter().map(matrix_rows).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<CMat>, D::Error> {
        let rows = Vec::<Vec<Vec<Pair>>>::deserialize(d)?;
        rows.iter().map(|r| matrix_from_rows(r).map_err(D::Error::custom)).collect()
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

/// Building blocks as a JSON array of matrices.
pub fn blocks_json(blocks: &BuildingBlocks) -> Result<String> {
    let rows: Vec<Vec<Vec<Pair>>> = blocks.blocks.iter().map(matrix_rows).collect();
    Ok(serde_json::to_string_pretty(&rows)?)
}

/// A channel instance stored by its coefficients; matrices are rebuilt on
/// load.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceFile {
    pub family: ChannelFamily,
    #[serde(rename = "K")]
    pub k: usize,
    pub seed: u64,
    /// Indexed `[rx][tx][l]`.
    pub tau: Vec<Vec<Vec<Pair>>>,
}

impl InstanceFile {
    pub fn from_instance(ch: &ChannelInstance) -> Self {
        let k = ch.k();
        let tau = (0..k)
            .map(|rx| (0..k).map(|tx| ch.tau(rx, tx).iter().copied().map(pair).collect()).collect())
            .collect();
        Self { family: ch.blocks.family.clone(), k, seed: ch.seed, tau }
    }

    pub fn into_instance(self) -> Result<ChannelInstance> {
        let blocks = Arc::new(build_blocks(&self.family)?);
        if self.tau.len() != self.k || self.tau.iter().any(|r| r.len() != self.k) {
            return Err(Error::DimensionMismatch(format!("tau must be {0} x {0} x L", self.k)));
        }
        let tau: Vec<C64> = self.tau.iter().flatten().flatten().copied().map(from_pair).collect();
        ChannelInstance::from_tau(blocks, self.k, tau, self.seed)
    }
}

pub fn save_instance(path: &Path, ch: &ChannelInstance) -> Result<()> {
    write_json(path, &InstanceFile::from_instance(ch))
}

pub fn load_instance(path: &Path) -> Result<ChannelInstance> {
    read_json::<InstanceFile>(path)?.into_instance()
}

/// Beamformers plus, when written by the solver, its report fields.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BeamsFile {
    pub u: Vec<Vec<Pair>>,
    pub v: Vec<Vec<Pair>>,
    #[serde(flatten, default, skip_serializing_if = "Option::is_none")]
    pub report: Option<FeasibilityReport>,
}

impl BeamsFile {
    pub fn new(beams: &BeamformerSet, report: Option<FeasibilityReport>) -> Self {
        Self {
            u: beams.u.iter().map(vector_pairs).collect(),
            v: beams.v.iter().map(vector_pairs).collect(),
            report,
        }
    }

    pub fn beams(&self) -> BeamformerSet {
        BeamformerSet {
            u: self.u.iter().map(|p| vector_from_pairs(p)).collect(),
            v: self.v.iter().map(|p| vector_from_pairs(p)).collect(),
        }
    }
}
