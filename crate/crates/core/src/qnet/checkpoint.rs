//! Binary checkpoint format, all integers and floats little-endian:
//!
//! ```text
//! "LDQN"  version:u32  in_h:u32 in_w:u32 in_c:u32  layer_count:u32
//! per layer: kind:u32 (0 conv, 1 dense)  size:u32 (filters/units)
//!            kernel:u32  stride:u32  relu:u32        (kernel/stride 0 for dense)
//! per layer: weights:f32[..]  bias:f32[..]           row-major
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use super::arch::{Arch, LayerSpec};
use super::net::{Layer, QParams};
use super::NetError;

pub const MAGIC: &[u8; 4] = b"LDQN";
pub const VERSION: u32 = 1;

pub fn encode_params(params: &QParams<f32>) -> Vec<u8> {
    let mut out = Vec::with_capacity(32 + params.param_count() * 4);
    let put = |v: u32, out: &mut Vec<u8>| out.extend_from_slice(&v.to_le_bytes());
    out.extend_from_slice(MAGIC);
    put(VERSION, &mut out);
    for d in params.arch.input {
        put(d as u32, &mut out);
    }
    put(params.arch.layers.len() as u32, &mut out);
    for layer in &params.arch.layers {
        let fields = match *layer {
            LayerSpec::Conv { filters, kernel, stride, relu } => [0, filters, kernel, stride, relu as usize],
            LayerSpec::Dense { units, relu } => [1, units, 0, 0, relu as usize],
        };
        for f in fields {
            put(f as u32, &mut out);
        }
    }
    for t in params.tensors() {
        for x in t {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], NetError> {
        let end = self.pos + n;
        let bytes = self
            .data
            .get(self.pos..end)
            .ok_or_else(|| NetError::Checkpoint("truncated file".into()))?;
        self.pos = end;
        Ok(bytes)
    }

    fn u32(&mut self) -> Result<u32, NetError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

pub fn decode_params(data: &[u8]) -> Result<QParams<f32>, NetError> {
    let mut r = Reader { data, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(NetError::Checkpoint("bad magic".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(NetError::Checkpoint(format!("unsupported version {version}")));
    }
    let input = [r.u32()? as usize, r.u32()? as usize, r.u32()? as usize];
    let count = r.u32()? as usize;
    if count > 1024 {
        return Err(NetError::Checkpoint(format!("implausible layer count {count}")));
    }
    let mut layers = Vec::with_capacity(count);
    for _ in 0..count {
        let [kind, size, kernel, stride, relu] = [r.u32()?, r.u32()?, r.u32()?, r.u32()?, r.u32()?];
        let relu = match relu {
            0 => false,
            1 => true,
            other => return Err(NetError::Checkpoint(format!("bad relu flag {other}"))),
        };
        layers.push(match kind {
            0 => LayerSpec::Conv { filters: size as usize, kernel: kernel as usize, stride: stride as usize, relu },
            1 => LayerSpec::Dense { units: size as usize, relu },
            other => return Err(NetError::Checkpoint(format!("bad layer kind {other}"))),
        });
    }
    let arch = Arch { input, layers };
    let shapes = arch.resolve()?;
    let mut read_vec = |n: usize| -> Result<Vec<f32>, NetError> {
        let bytes = r.take(n * 4)?;
        Ok(bytes.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect())
    };
    let mut out = Vec::with_capacity(shapes.len());
    for shape in shapes {
        let weights = read_vec(shape.weight_len())?;
        let bias = read_vec(shape.bias_len())?;
        out.push(Layer { shape, weights, bias });
    }
    if r.pos != data.len() {
        return Err(NetError::Checkpoint(format!("{} trailing bytes", data.len() - r.pos)));
    }
    Ok(QParams { arch, layers: out })
}

/// Write through a temporary file and rename, so readers never see a partial checkpoint.
pub fn save_params(params: &QParams<f32>, path: &Path) -> Result<(), NetError> {
    let io = |e: std::io::Error| NetError::Io(format!("{}: {e}", path.display()));
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let file_name = path.file_name().ok_or_else(|| NetError::Io("checkpoint path has no file name".into()))?;
    let tmp = dir.join(format!(".{}.tmp", file_name.to_string_lossy()));
    {
        let mut f = fs::File::create(&tmp).map_err(io)?;
        f.write_all(&encode_params(params)).map_err(io)?;
        f.sync_all().map_err(io)?;
    }
    fs::rename(&tmp, path).map_err(io)
}

pub fn load_params(path: &Path) -> Result<QParams<f32>, NetError> {
    let data = fs::read(path).map_err(|e| NetError::Io(format!("{}: {e}", path.display())))?;
    decode_params(&data)
}

/// Load and require a specific architecture.
pub fn load_params_for(path: &Path, arch: &Arch) -> Result<QParams<f32>, NetError> {
    let params = load_params(path)?;
    if &params.arch != arch {
        return Err(NetError::Shape(format!(
            "checkpoint architecture {} on {:?} does not match expected {} on {:?}",
            params.arch, params.arch.input, arch, arch.input
        )));
    }
    Ok(params)
}
