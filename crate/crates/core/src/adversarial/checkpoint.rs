use std::io::{Read, Write};

use super::models::{LinearModel, MlpModel, Model};
use super::{AdversarialError, Result};

pub const HDGM_MAGIC: [u8; 4] = *b"HDGM";
pub const HDGM_VERSION: u32 = 1;

/// Layer sizes above this are treated as corruption.
const MAX_DIM: u32 = 1 << 24;

fn fmt_err(msg: impl Into<String>) -> AdversarialError {
    AdversarialError::Format(msg.into())
}

type Layer<'a> = (&'a [f64], &'a [f64]);

/// Little-endian layout: magic, version, layer count `L`, `L + 1` layer
/// widths, then per layer its weight matrix (row-major, one row per output
/// unit) followed by its bias. A linear model is one layer of width 1.
pub fn write_model(out: &mut impl Write, model: &Model) -> Result<()> {
    let (dims, layers): (Vec<usize>, Vec<Layer>) = match model {
        Model::Linear(m) => (vec![m.w().len(), 1], vec![(m.w(), std::slice::from_ref(&m.b))]),
        Model::Mlp(m) => (vec![m.n_in, m.hidden, m.classes], vec![(&m.w1, &m.b1), (&m.w2, &m.b2)]),
    };
    let mut buf = Vec::new();
    buf.extend_from_slice(&HDGM_MAGIC);
    buf.extend_from_slice(&HDGM_VERSION.to_le_bytes());
    buf.extend_from_slice(&(layers.len() as u32).to_le_bytes());
    for d in &dims {
        buf.extend_from_slice(&(*d as u32).to_le_bytes());
    }
    for (w, b) in layers {
        for v in w.iter().chain(b) {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    out.write_all(&buf)?;
    Ok(())
}

fn read_u32(input: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    input.read_exact(&mut b).map_err(|_| fmt_err("truncated header"))?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64s(input: &mut impl Read, count: usize) -> Result<Vec<f64>> {
    let mut bytes = vec![0u8; count * 8];
    input.read_exact(&mut bytes).map_err(|_| fmt_err("truncated weights"))?;
    Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
}

pub fn read_model(input: &mut impl Read) -> Result<Model> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic).map_err(|_| fmt_err("truncated header"))?;
    if magic != HDGM_MAGIC {
        return Err(fmt_err("bad magic"));
    }
    let version = read_u32(input)?;
    if version != HDGM_VERSION {
        return Err(fmt_err(format!("unsupported version {version}")));
    }
    let layers = read_u32(input)?;
    if !(1..=2).contains(&layers) {
        return Err(fmt_err(format!("{layers} layers; only 1 or 2 are supported")));
    }
    let mut dims = Vec::new();
    for _ in 0..=layers {
        let d = read_u32(input)?;
        if d == 0 || d > MAX_DIM {
            return Err(fmt_err(format!("layer width {d} out of range")));
        }
        dims.push(d as usize);
    }
    let mut params = Vec::new();
    for l in 0..layers as usize {
        let w = read_f64s(input, dims[l] * dims[l + 1])?;
        let b = read_f64s(input, dims[l + 1])?;
        params.push((w, b));
    }
    let mut rest = [0u8; 1];
    if input.read(&mut rest)? != 0 {
        return Err(fmt_err("trailing bytes"));
    }
    let bad = |e: AdversarialError| fmt_err(e.to_string());
    if layers == 1 {
        if dims[1] != 1 {
            return Err(fmt_err("a single-layer model must have one output"));
        }
        let (w, b) = params.pop().unwrap();
        return Ok(Model::Linear(LinearModel::new(w, b[0]).map_err(bad)?));
    }
    let (w2, b2) = params.pop().unwrap();
    let (w1, b1) = params.pop().unwrap();
    Ok(Model::Mlp(MlpModel::new(dims[0], dims[1], dims[2], w1, b1, w2, b2).map_err(bad)?))
}
