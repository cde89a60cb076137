//! Shard files ("TSHD", little-endian).
//!
//! Header: magic, version u16, shard_id u16, metric u8, quantization u8,
//! dim u32, n_local_clusters u32, scalar-8 offset/scale rows when
//! quantized. Then per local cluster: global_id u32, local_id u32,
//! count u64, centroid row (f32), ids (u64 each), vector payload. The
//! metric/quantization/dim fields mirror the index header so a shard
//! file parses standalone.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::splitter::ShardIndex;
use crate::vecstore::io::{
    metric_from_tag, metric_tag, quant_from_tag, quant_tag, read_bytes, read_f32_vec,
    read_payload, read_u16, read_u32, read_u64, read_u8, write_f32_slice, write_payload,
    write_u16, write_u32, write_u64,
};
use crate::vecstore::{ClusterList, IvfIndex, QuantizationKind, Scalar8Params};

const SHARD_MAGIC: &[u8; 4] = b"TSHD";
const SHARD_VERSION: u16 = 1;

pub fn save_shard(shard: &ShardIndex, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let index = &shard.index;
    w.write_all(SHARD_MAGIC)?;
    write_u16(&mut w, SHARD_VERSION)?;
    write_u16(&mut w, shard.shard_id)?;
    w.write_all(&[metric_tag(index.metric()), quant_tag(index.quantization())])?;
    write_u32(&mut w, index.dim() as u32)?;
    write_u32(&mut w, index.n_clusters() as u32)?;
    if let Some(p) = index.scalar8_params() {
        write_f32_slice(&mut w, &p.offset)?;
        write_f32_slice(&mut w, &p.scale)?;
    }
    for local in 0..index.n_clusters() {
        let list = &index.lists()[local];
        write_u32(&mut w, shard.global_ids[local])?;
        write_u32(&mut w, local as u32)?;
        write_u64(&mut w, list.ids.len() as u64)?;
        write_f32_slice(&mut w, index.centroid(local as u32))?;
        for &id in &list.ids {
            write_u64(&mut w, id)?;
        }
        write_payload(&mut w, &list.payload)?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_shard(path: &Path) -> Result<ShardIndex> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| Error::Format("unexpected end of file".into()))?;
    if &magic != SHARD_MAGIC {
        return Err(Error::Format("bad shard magic".into()));
    }
    let version = read_u16(&mut r)?;
    if version != SHARD_VERSION {
        return Err(Error::Format(format!("unsupported shard version {version}")));
    }
    let shard_id = read_u16(&mut r)?;
    let metric = metric_from_tag(read_u8(&mut r)?)?;
    let quant_kind = quant_from_tag(read_u8(&mut r)?)?;
    let dim = read_u32(&mut r)? as usize;
    let n_local = read_u32(&mut r)? as usize;
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
    let mut global_ids = Vec::with_capacity(n_local);
    let mut centroids = Vec::with_capacity(n_local * dim);
    let mut lists = Vec::with_capacity(n_local);
    for expected in 0..n_local as u32 {
        let global_id = read_u32(&mut r)?;
        let local_id = read_u32(&mut r)?;
        if local_id != expected {
            return Err(Error::Format(format!(
                "local id {local_id} out of order (expected {expected})"
            )));
        }
        let count = read_u64(&mut r)? as usize;
        centroids.extend(read_f32_vec(&mut r, dim)?);
        let mut ids = Vec::with_capacity(count);
        for _ in 0..count {
            ids.push(read_u64(&mut r)?);
        }
        let payload = read_payload(&mut r, quant_kind, count, dim)?;
        global_ids.push(global_id);
        lists.push(ClusterList { ids, payload });
    }
    if read_bytes(&mut r, 1).is_ok() {
        return Err(Error::Format("trailing bytes after shard payload".into()));
    }
    Ok(ShardIndex {
        shard_id,
        global_ids,
        index: IvfIndex::from_parts(dim, metric, quant, centroids, lists),
    })
}
