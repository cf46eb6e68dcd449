//! Checkpoint serialization.
//!
//! Fixed little-endian layout: magic, version, network dims, the training
//! config, training progress (exploration, step counters), then the online
//! and target parameters as 32-bit floats and the Adam moments as 64-bit
//! floats, closed by a footer. Weights quantize to f32 on save; loading
//! widens them back, so save-load-save reproduces the file byte for byte.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::adam::AdamState;
use super::network::{NetDims, NetworkParams};
use crate::config::TrainConfig;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"LNCHGQN\0";
const FOOTER: &[u8; 8] = b"LNCHGEND";
const VERSION: u32 = 1;

/// Everything needed to evaluate or resume training.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub dims: NetDims,
    pub train: TrainConfig,
    pub params: NetworkParams,
    pub target: NetworkParams,
    pub adam: AdamState,
    /// Exploration rate at save time.
    pub eps: f64,
    /// Gradient steps taken so far.
    pub grad_steps: u64,
    /// Training episodes completed so far.
    pub episodes_done: u32,
}

fn w_u32<W: Write>(w: &mut W, v: u32) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn w_u64<W: Write>(w: &mut W, v: u64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn w_f64<W: Write>(w: &mut W, v: f64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn r_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(u32::from_le_bytes(b))
}

fn r_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(u64::from_le_bytes(b))
}

fn r_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(f64::from_le_bytes(b))
}

fn r_f32<R: Read>(r: &mut R) -> Result<f32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(f32::from_le_bytes(b))
}

fn truncated(e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::Checkpoint("file is truncated".into())
    } else {
        Error::Io(e)
    }
}

fn write_params_f32<W: Write>(w: &mut W, p: &NetworkParams) -> Result<()> {
    for (_, tensor) in p.tensors() {
        for &v in tensor {
            w.write_all(&(v as f32).to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_params_f32<R: Read>(r: &mut R, p: &mut NetworkParams) -> Result<()> {
    for (_, tensor) in p.tensors_mut() {
        for v in tensor.iter_mut() {
            *v = r_f32(r)? as f64;
        }
    }
    Ok(())
}

fn write_params_f64<W: Write>(w: &mut W, p: &NetworkParams) -> Result<()> {
    for (_, tensor) in p.tensors() {
        for &v in tensor {
            w_f64(w, v)?;
        }
    }
    Ok(())
}

fn read_params_f64<R: Read>(r: &mut R, p: &mut NetworkParams) -> Result<()> {
    for (_, tensor) in p.tensors_mut() {
        for v in tensor.iter_mut() {
            *v = r_f64(r)?;
        }
    }
    Ok(())
}

pub fn save(path: &Path, ckpt: &Checkpoint) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w_u32(&mut w, VERSION)?;

    let d = &ckpt.dims;
    for dim in [
        d.grid_h, d.grid_w, d.aux_len, d.conv1_out, d.conv1_kh, d.conv1_kw, d.conv2_out,
        d.conv2_kh, d.conv2_kw, d.dense1, d.dense2, d.actions,
    ] {
        w_u32(&mut w, dim as u32)?;
    }

    let t = &ckpt.train;
    w_f64(&mut w, t.gamma)?;
    w_f64(&mut w, t.learning_rate)?;
    w_u64(&mut w, t.batch_size as u64)?;
    w_u64(&mut w, t.buffer_capacity as u64)?;
    w_u64(&mut w, t.target_sync_every)?;
    w_f64(&mut w, t.eps_start)?;
    w_f64(&mut w, t.eps_decay)?;
    w_f64(&mut w, t.eps_min)?;

    w_f64(&mut w, ckpt.eps)?;
    w_u64(&mut w, ckpt.grad_steps)?;
    w_u32(&mut w, ckpt.episodes_done)?;

    w_u64(&mut w, ckpt.adam.step)?;
    w_f64(&mut w, ckpt.adam.beta1)?;
    w_f64(&mut w, ckpt.adam.beta2)?;
    w_f64(&mut w, ckpt.adam.epsilon)?;

    w_u64(&mut w, ckpt.params.value_count() as u64)?;
    write_params_f32(&mut w, &ckpt.params)?;
    write_params_f32(&mut w, &ckpt.target)?;
    write_params_f64(&mut w, &ckpt.adam.m)?;
    write_params_f64(&mut w, &ckpt.adam.v)?;

    w.write_all(FOOTER)?;
    w.flush()?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Checkpoint> {
    let mut r = BufReader::new(File::open(path)?);

    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(truncated)?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint("unrecognized file magic".into()));
    }
    let version = r_u32(&mut r)?;
    if version != VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported version {version}, expected {VERSION}"
        )));
    }

    let mut dims_raw = [0u32; 12];
    for d in dims_raw.iter_mut() {
        *d = r_u32(&mut r)?;
    }
    let dims = NetDims {
        grid_h: dims_raw[0] as usize,
        grid_w: dims_raw[1] as usize,
        aux_len: dims_raw[2] as usize,
        conv1_out: dims_raw[3] as usize,
        conv1_kh: dims_raw[4] as usize,
        conv1_kw: dims_raw[5] as usize,
        conv2_out: dims_raw[6] as usize,
        conv2_kh: dims_raw[7] as usize,
        conv2_kw: dims_raw[8] as usize,
        dense1: dims_raw[9] as usize,
        dense2: dims_raw[10] as usize,
        actions: dims_raw[11] as usize,
    };
    dims.validate()
        .map_err(|e| Error::Checkpoint(format!("stored dims are invalid: {e}")))?;

    let train = TrainConfig {
        gamma: r_f64(&mut r)?,
        learning_rate: r_f64(&mut r)?,
        batch_size: r_u64(&mut r)? as usize,
        buffer_capacity: r_u64(&mut r)? as usize,
        target_sync_every: r_u64(&mut r)?,
        eps_start: r_f64(&mut r)?,
        eps_decay: r_f64(&mut r)?,
        eps_min: r_f64(&mut r)?,
    };

    let eps = r_f64(&mut r)?;
    let grad_steps = r_u64(&mut r)?;
    let episodes_done = r_u32(&mut r)?;

    let adam_step = r_u64(&mut r)?;
    let beta1 = r_f64(&mut r)?;
    let beta2 = r_f64(&mut r)?;
    let epsilon = r_f64(&mut r)?;

    let declared = r_u64(&mut r)?;
    let mut params = NetworkParams::zeros(&dims);
    if declared != params.value_count() as u64 {
        return Err(Error::Checkpoint(format!(
            "parameter count {declared} does not match the stored dims ({})",
            params.value_count()
        )));
    }
    read_params_f32(&mut r, &mut params)?;
    let mut target = NetworkParams::zeros(&dims);
    read_params_f32(&mut r, &mut target)?;
    let mut m = NetworkParams::zeros(&dims);
    read_params_f64(&mut r, &mut m)?;
    let mut v = NetworkParams::zeros(&dims);
    read_params_f64(&mut r, &mut v)?;

    let mut footer = [0u8; 8];
    r.read_exact(&mut footer).map_err(truncated)?;
    if &footer != FOOTER {
        return Err(Error::Checkpoint("footer mismatch, file corrupt".into()));
    }

    Ok(Checkpoint {
        dims,
        train,
        params,
        target,
        adam: AdamState {
            m,
            v,
            step: adam_step,
            beta1,
            beta2,
            epsilon,
        },
        eps,
        grad_steps,
        episodes_done,
    })
}
