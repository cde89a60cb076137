//! Binary index and dataset files (little-endian throughout).
//!
//! Index file ("TIVF"): magic, version u16, metric u8, quantization u8,
//! dim u32, n_clusters u32, scalar-8 offset/scale rows when quantized,
//! centroid block (row-major f32), then per cluster: cluster_id u32,
//! count u64, ids (u64 each), vector payload (f32 rows, or u8 codes for
//! scalar-8). Loaders reject unknown magic or version and refuse
//! truncated files outright.
//!
//! Dataset file ("TDAT"): magic, version u16, dim u32, count u64, ids,
//! f32 rows.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::vecstore::{
    ClusterList, IvfIndex, ListPayload, Metric, QuantizationKind, Scalar8Params, VectorDataset,
};

pub(crate) const INDEX_MAGIC: &[u8; 4] = b"TIVF";
pub(crate) const INDEX_VERSION: u16 = 1;
pub(crate) const DATASET_MAGIC: &[u8; 4] = b"TDAT";
pub(crate) const DATASET_VERSION: u16 = 1;

pub(crate) fn write_u16(w: &mut impl Write, v: u16) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

pub(crate) fn write_u32(w: &mut impl Write, v: u32) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

pub(crate) fn write_u64(w: &mut impl Write, v: u64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

pub(crate) fn write_f32_slice(w: &mut impl Write, vs: &[f32]) -> Result<()> {
    for v in vs {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_exact(r: &mut impl Read, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf)
        .map_err(|_| Error::Format("unexpected end of file".into()))
}

pub(crate) fn read_u16(r: &mut impl Read) -> Result<u16> {
    let mut b = [0u8; 2];
    read_exact(r, &mut b)?;
    Ok(u16::from_le_bytes(b))
}

pub(crate) fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub(crate) fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(u64::from_le_bytes(b))
}

pub(crate) fn read_u8(r: &mut impl Read) -> Result<u8> {
    let mut b = [0u8; 1];
    read_exact(r, &mut b)?;
    Ok(b[0])
}

pub(crate) fn read_f32_vec(r: &mut impl Read, n: usize) -> Result<Vec<f32>> {
    let mut bytes = vec![0u8; n * 4];
    read_exact(r, &mut bytes)?;
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}

pub(crate) fn read_bytes(r: &mut impl Read, n: usize) -> Result<Vec<u8>> {
    let mut bytes = vec![0u8; n];
    read_exact(r, &mut bytes)?;
    Ok(bytes)
}

pub(crate) fn metric_tag(m: Metric) -> u8 {
    match m {
        Metric::L2 => 0,
        Metric::InnerProduct => 1,
    }
}

pub(crate) fn metric_from_tag(t: u8) -> Result<Metric> {
    match t {
        0 => Ok(Metric::L2),
        1 => Ok(Metric::InnerProduct),
        _ => Err(Error::Format(format!("unknown metric tag {t}"))),
    }
}

pub(crate) fn quant_tag(q: QuantizationKind) -> u8 {
    match q {
        QuantizationKind::None => 0,
        QuantizationKind::Scalar8 => 1,
    }
}

pub(crate) fn quant_from_tag(t: u8) -> Result<QuantizationKind> {
    match t {
        0 => Ok(QuantizationKind::None),
        1 => Ok(QuantizationKind::Scalar8),
        _ => Err(Error::Format(format!("unknown quantization tag {t}"))),
    }
}

pub(crate) fn write_payload(w: &mut impl Write, payload: &ListPayload) -> Result<()> {
    match payload {
        ListPayload::F32(data) => write_f32_slice(w, data),
        ListPayload::U8(data) => {
            w.write_all(data)?;
            Ok(())
        }
    }
}

pub(crate) fn read_payload(
    r: &mut impl Read,
    quant: QuantizationKind,
    count: usize,
    dim: usize,
) -> Result<ListPayload> {
    Ok(match quant {
        QuantizationKind::None => ListPayload::F32(read_f32_vec(r, count * dim)?),
        QuantizationKind::Scalar8 => ListPayload::U8(read_bytes(r, count * dim)?),
    })
}

pub fn save_index(index: &IvfIndex, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(INDEX_MAGIC)?;
    write_u16(&mut w, INDEX_VERSION)?;
    w.write_all(&[metric_tag(index.metric()), quant_tag(index.quantization())])?;
    write_u32(&mut w, index.dim() as u32)?;
    write_u32(&mut w, index.n_clusters() as u32)?;
    if let Some(p) = index.scalar8_params() {
        write_f32_slice(&mut w, &p.offset)?;
        write_f32_slice(&mut w, &p.scale)?;
    }
    write_f32_slice(&mut w, index.centroids())?;
    for (c, list) in index.lists().iter().enumerate() {
        write_u32(&mut w, c as u32)?;
        write_u64(&mut w, list.ids.len() as u64)?;
        for &id in &list.ids {
            write_u64(&mut w, id)?;
        }
        write_payload(&mut w, &list.payload)?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_index(path: &Path) -> Result<IvfIndex> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    read_exact(&mut r, &mut magic)?;
    if &magic != INDEX_MAGIC {
        return Err(Error::Format("bad index magic".into()));
    }
    let version = read_u16(&mut r)?;
    if version != INDEX_VERSION {
        return Err(Error::Format(format!("unsupported index version {version}")));
    }
    let metric = metric_from_tag(read_u8(&mut r)?)?;
    let quant_kind = quant_from_tag(read_u8(&mut r)?)?;
    let dim = read_u32(&mut r)? as usize;
    let n_clusters = read_u32(&mut r)? as usize;
    if dim == 0 {
        return Err(Error::Format("dim must be >= 1".into()));
    }
    let quant = match quant_kind {
        QuantizationKind::None => None,
        QuantizationKind::Scalar8 => Some(Scalar8Params {
            offset: read_f32_vec(&mut r, dim)?,
            scale: read_f32_vec(&mut r, dim)?,
        }),
    };
    let centroids = read_f32_vec(&mut r, n_clusters * dim)?;
    let mut lists = Vec::with_capacity(n_clusters);
    for expected in 0..n_clusters as u32 {
        let cluster_id = read_u32(&mut r)?;
        if cluster_id != expected {
            return Err(Error::Format(format!(
                "cluster id {cluster_id} out of order (expected {expected})"
            )));
        }
        let count = read_u64(&mut r)? as usize;
        let mut ids = Vec::with_capacity(count);
        for _ in 0..count {
            ids.push(read_u64(&mut r)?);
        }
        let payload = read_payload(&mut r, quant_kind, count, dim)?;
        lists.push(ClusterList { ids, payload });
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(Error::Format("trailing bytes after index payload".into()));
    }
    Ok(IvfIndex::from_parts(dim, metric, quant, centroids, lists))
}

pub fn save_dataset(dataset: &VectorDataset, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(DATASET_MAGIC)?;
    write_u16(&mut w, DATASET_VERSION)?;
    write_u32(&mut w, dataset.dim() as u32)?;
    write_u64(&mut w, dataset.len() as u64)?;
    for &id in dataset.ids() {
        write_u64(&mut w, id)?;
    }
    for row in dataset.rows() {
        write_f32_slice(&mut w, row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_dataset(path: &Path) -> Result<VectorDataset> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    read_exact(&mut r, &mut magic)?;
    if &magic != DATASET_MAGIC {
        return Err(Error::Format("bad dataset magic".into()));
    }
    let version = read_u16(&mut r)?;
    if version != DATASET_VERSION {
        return Err(Error::Format(format!(
            "unsupported dataset version {version}"
        )));
    }
    let dim = read_u32(&mut r)? as usize;
    let count = read_u64(&mut r)? as usize;
    let mut ids = Vec::with_capacity(count);
    for _ in 0..count {
        ids.push(read_u64(&mut r)?);
    }
    let data = read_f32_vec(&mut r, count * dim)?;
    VectorDataset::new(dim, ids, data)
}
