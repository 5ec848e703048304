//! Binary field snapshots.
//!
//! Layout (all integers little-endian):
//!
//! | bytes | content |
//! |-------|---------|
//! | 8     | magic `PFSNAP01` |
//! | 4     | format version (u32) |
//! | 8     | header length `L` in bytes (u64) |
//! | L     | UTF-8 JSON header |
//! | rest  | for each field in header order, every node row-major, every component row-major: re, im as f64 |

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::field::{Slot, TensorField};
use super::grid::ChartGrid;
use crate::{Error, Result, C64};

pub const SNAPSHOT_MAGIC: &[u8; 8] = b"PFSNAP01";
pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
struct FieldHeader {
    name: String,
    grid: ChartGrid,
    slots: Vec<Slot>,
    dims: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct Header {
    time: f64,
    kind: String,
    fields: Vec<FieldHeader>,
}

/// Named fields captured at one flow time.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub kind: String,
    pub fields: Vec<(String, TensorField)>,
}

pub fn write_snapshot<W: Write>(mut out: W, snap: &Snapshot) -> Result<()> {
    let header = Header {
        time: snap.time,
        kind: snap.kind.clone(),
        fields: snap
            .fields
            .iter()
            .map(|(name, f)| FieldHeader {
                name: name.clone(),
                grid: f.grid.clone(),
                slots: f.slots.clone(),
                dims: f.dims.clone(),
            })
            .collect(),
    };
    let json = serde_json::to_vec(&header)?;
    out.write_all(SNAPSHOT_MAGIC)?;
    out.write_all(&SNAPSHOT_VERSION.to_le_bytes())?;
    out.write_all(&(json.len() as u64).to_le_bytes())?;
    out.write_all(&json)?;
    let mut buf = Vec::new();
    for (_, f) in &snap.fields {
        buf.clear();
        buf.reserve(f.values.len() * 16);
        for v in &f.values {
            buf.extend_from_slice(&v.re.to_le_bytes());
            buf.extend_from_slice(&v.im.to_le_bytes());
        }
        out.write_all(&buf)?;
    }
    Ok(())
}

pub fn read_snapshot<R: Read>(mut input: R) -> Result<Snapshot> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != SNAPSHOT_MAGIC {
        return Err(Error::Snapshot("bad magic".into()));
    }
    let mut b4 = [0u8; 4];
    input.read_exact(&mut b4)?;
    let version = u32::from_le_bytes(b4);
    if version != SNAPSHOT_VERSION {
        return Err(Error::Snapshot(format!("unsupported version {version}")));
    }
    let mut b8 = [0u8; 8];
    input.read_exact(&mut b8)?;
    let len = u64::from_le_bytes(b8) as usize;
    let mut json = vec![0u8; len];
    input.read_exact(&mut json)?;
    let header: Header = serde_json::from_slice(&json)?;
    let mut fields = Vec::with_capacity(header.fields.len());
    for fh in header.fields {
        let mut f = TensorField::zeros(&fh.grid, fh.slots, fh.dims)?;
        let mut raw = vec![0u8; f.values.len() * 16];
        input.read_exact(&mut raw)?;
        for (k, v) in f.values.iter_mut().enumerate() {
            let re = f64::from_le_bytes(raw[16 * k..16 * k + 8].try_into().unwrap());
            let im = f64::from_le_bytes(raw[16 * k + 8..16 * k + 16].try_into().unwrap());
            *v = C64::new(re, im);
        }
        fields.push((fh.name, f));
    }
    Ok(Snapshot {
        time: header.time,
        kind: header.kind,
        fields,
    })
}
