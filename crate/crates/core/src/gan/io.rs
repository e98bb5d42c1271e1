//! Binary generator format.
//!
//! ```text
//! magic       8 bytes  b"FSGEN001"
//! latent_dim  u32 LE
//! n_layers    u32 LE
//! per layer   u32 LE inputs, u32 LE outputs, u32 LE activation
//!             (0 leaky-relu, 1 sigmoid, 2 tanh, 3 linear)
//! parameters  f64 LE, per layer: weights row-major (inputs x outputs), then biases
//! ```

use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};

use super::net::{Activation, Dense, DenseNet};
use super::GeneratorModel;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"FSGEN001";

pub fn write_generator<W: Write>(gen: &GeneratorModel, mut w: W) -> std::io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(gen.latent_dim as u32).to_le_bytes())?;
    let layers = gen.net.layers();
    w.write_all(&(layers.len() as u32).to_le_bytes())?;
    for l in layers {
        w.write_all(&(l.input_dim() as u32).to_le_bytes())?;
        w.write_all(&(l.output_dim() as u32).to_le_bytes())?;
        w.write_all(&l.activation.code().to_le_bytes())?;
    }
    for p in gen.net.params_flat() {
        w.write_all(&p.to_le_bytes())?;
    }
    Ok(())
}

fn bad(msg: &str) -> Error {
    Error::Serialization(msg.to_string())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(|_| bad("truncated header"))?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(|_| bad("truncated parameter block"))?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_generator<R: Read>(mut r: R) -> Result<GeneratorModel> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(|_| bad("truncated header"))?;
    if &magic != MAGIC {
        return Err(bad("not a generator file"));
    }
    let latent_dim = read_u32(&mut r)? as usize;
    let n_layers = read_u32(&mut r)? as usize;
    let mut shapes = Vec::with_capacity(n_layers);
    for _ in 0..n_layers {
        let i = read_u32(&mut r)? as usize;
        let o = read_u32(&mut r)? as usize;
        let act = Activation::from_code(read_u32(&mut r)?).ok_or_else(|| bad("unknown activation"))?;
        shapes.push((i, o, act));
    }
    let mut layers = Vec::with_capacity(n_layers);
    for (i, o, activation) in shapes {
        let w = (0..i * o).map(|_| read_f64(&mut r)).collect::<Result<Vec<_>>>()?;
        let b = (0..o).map(|_| read_f64(&mut r)).collect::<Result<Vec<_>>>()?;
        layers.push(Dense {
            weights: Array2::from_shape_vec((i, o), w).map_err(|_| bad("bad layer shape"))?,
            biases: Array1::from(b),
            activation,
        });
    }
    let net = DenseNet::new(layers)?;
    if net.input_dim() != latent_dim {
        return Err(bad("latent dimension does not match first layer"));
    }
    Ok(GeneratorModel { net, latent_dim })
}

pub fn save_generator(gen: &GeneratorModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    write_generator(gen, &mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_generator(path: impl AsRef<Path>) -> Result<GeneratorModel> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_generator(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gan::GanConfig;

    #[test]
    fn round_trip_and_rejections() {
        let gen = GeneratorModel::initial(3, &GanConfig::wasserstein());
        let mut buf = Vec::new();
        write_generator(&gen, &mut buf).unwrap();
        assert_eq!(read_generator(buf.as_slice()).unwrap(), gen);

        assert!(read_generator(&buf[..buf.len() - 1]).is_err());
        let mut wrong = buf.clone();
        wrong[0] = b'X';
        assert!(read_generator(wrong.as_slice()).is_err());
    }
}
