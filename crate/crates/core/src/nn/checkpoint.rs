//! Binary parameter checkpoints.
//!
//! All integers and floats are little-endian:
//!
//! ```text
//! magic      b"SRNN"
//! version    u32 (= 1)
//! input_len  u64
//! side_len   u64
//! layers     u32
//! per layer  tag u8, then u64 fields:
//!            0 dense   inputs, outputs
//!            1 conv1d  in_channels, out_channels, kernel, stride, padding, in_len
//!            2 tanh    len
//!            3 relu    len
//!            4 concat  len, extra
//! params     u64 count, then count f64 bit patterns
//! ```
//!
//! Parameters are stored bit-exact, so a round trip reproduces the network.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::layer::{ConvSpec, Layer};
use super::network::Network;
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"SRNN";
const VERSION: u32 = 1;

fn io_err(e: std::io::Error) -> Error {
    Error::Checkpoint(e.to_string())
}

fn put_u64<W: Write>(w: &mut W, v: usize) -> Result<()> {
    w.write_all(&(v as u64).to_le_bytes()).map_err(io_err)
}

pub(crate) fn get_u64<R: Read>(r: &mut R) -> Result<usize> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(io_err)?;
    usize::try_from(u64::from_le_bytes(b)).map_err(|_| Error::Checkpoint("length overflows usize".into()))
}

fn get_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(io_err)?;
    Ok(u32::from_le_bytes(b))
}

pub fn write_network<W: Write>(w: &mut W, net: &Network) -> Result<()> {
    w.write_all(MAGIC).map_err(io_err)?;
    w.write_all(&VERSION.to_le_bytes()).map_err(io_err)?;
    put_u64(w, net.input_len())?;
    put_u64(w, net.side_len())?;
    w.write_all(&(net.layers().len() as u32).to_le_bytes()).map_err(io_err)?;
    for layer in net.layers() {
        let (tag, fields): (u8, Vec<usize>) = match *layer {
            Layer::Dense { inputs, outputs, .. } => (0, vec![inputs, outputs]),
            Layer::Conv1d { spec, in_len, .. } => (
                1,
                vec![spec.in_channels, spec.out_channels, spec.kernel, spec.stride, spec.padding, in_len],
            ),
            Layer::Tanh { len } => (2, vec![len]),
            Layer::Relu { len } => (3, vec![len]),
            Layer::Concat { len, extra } => (4, vec![len, extra]),
        };
        w.write_all(&[tag]).map_err(io_err)?;
        for f in fields {
            put_u64(w, f)?;
        }
    }
    put_u64(w, net.param_count())?;
    for p in net.params() {
        w.write_all(&p.to_bits().to_le_bytes()).map_err(io_err)?;
    }
    Ok(())
}

pub fn read_network<R: Read>(r: &mut R) -> Result<Network> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(io_err)?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint("not a network checkpoint".into()));
    }
    let version = get_u32(r)?;
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let input_len = get_u64(r)?;
    let side_len = get_u64(r)?;
    let count = get_u32(r)? as usize;
    let mut layers = Vec::with_capacity(count.min(1024));
    let mut offset = 0;
    for _ in 0..count {
        let mut tag = [0u8; 1];
        r.read_exact(&mut tag).map_err(io_err)?;
        let layer = match tag[0] {
            0 => Layer::Dense {
                inputs: get_u64(r)?,
                outputs: get_u64(r)?,
                offset,
            },
            1 => {
                let spec = ConvSpec {
                    in_channels: get_u64(r)?,
                    out_channels: get_u64(r)?,
                    kernel: get_u64(r)?,
                    stride: get_u64(r)?,
                    padding: get_u64(r)?,
                };
                let in_len = get_u64(r)?;
                let out_len = spec.output_len(in_len)?;
                Layer::Conv1d { spec, in_len, out_len, offset }
            }
            2 => Layer::Tanh { len: get_u64(r)? },
            3 => Layer::Relu { len: get_u64(r)? },
            4 => Layer::Concat {
                len: get_u64(r)?,
                extra: get_u64(r)?,
            },
            t => return Err(Error::Checkpoint(format!("unknown layer tag {t}"))),
        };
        offset += layer.param_count();
        layers.push(layer);
    }
    let n = get_u64(r)?;
    if n != offset {
        return Err(Error::Checkpoint(format!("{n} parameters stored, layers need {offset}")));
    }
    let mut params = Vec::with_capacity(n);
    let mut b = [0u8; 8];
    for _ in 0..n {
        r.read_exact(&mut b).map_err(io_err)?;
        params.push(f64::from_bits(u64::from_le_bytes(b)));
    }
    Network::from_parts(layers, params, input_len, side_len)
}

pub fn save_network(path: &Path, net: &Network) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_network(&mut w, net)?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_network(path: &Path) -> Result<Network> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_network(&mut BufReader::new(file))
}
