//! Binary snapshot files.
//!
//! Layout, all little-endian: magic `KEF1`, `u32` dimension, `u32` points
//! per axis, `f64` box length, `u32` field count, then per field a `u32`
//! byte length followed by the UTF-8 name, then the fields' grid samples
//! as row-major `f64` arrays in the same order as the names.

use std::io::{Read, Write};

use super::{FieldError, Grid, ScalarField};

pub const MAGIC: &[u8; 4] = b"KEF1";

/// Named scalar fields on one grid.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub grid: Grid,
    pub fields: Vec<(String, Vec<f64>)>,
}

impl Snapshot {
    pub fn new(grid: Grid) -> Self {
        Self { grid, fields: Vec::new() }
    }

    pub fn push(&mut self, name: &str, field: &ScalarField) {
        self.fields.push((name.to_string(), field.values()));
    }

    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.fields.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    pub fn field(&self, name: &str) -> Result<ScalarField, FieldError> {
        let v = self.get(name).ok_or_else(|| FieldError::Snapshot(format!("missing field {name}")))?;
        ScalarField::from_values(&self.grid, v)
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<(), FieldError> {
        w.write_all(MAGIC)?;
        w.write_all(&(self.grid.dim() as u32).to_le_bytes())?;
        w.write_all(&(self.grid.n() as u32).to_le_bytes())?;
        w.write_all(&self.grid.length().to_le_bytes())?;
        w.write_all(&(self.fields.len() as u32).to_le_bytes())?;
        for (name, _) in &self.fields {
            w.write_all(&(name.len() as u32).to_le_bytes())?;
            w.write_all(name.as_bytes())?;
        }
        for (_, vals) in &self.fields {
            let mut buf = Vec::with_capacity(vals.len() * 8);
            for v in vals {
                buf.extend_from_slice(&v.to_le_bytes());
            }
            w.write_all(&buf)?;
        }
        Ok(())
    }

    /// Reads a snapshot; the truncation rule is not stored and defaults to 2/3.
    pub fn read_from(mut r: impl Read) -> Result<Self, FieldError> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(FieldError::Snapshot("bad magic".into()));
        }
        let dim = read_u32(&mut r)? as usize;
        let n = read_u32(&mut r)? as usize;
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let length = f64::from_le_bytes(b8);
        let grid = Grid::new(dim, n, length, 2.0 / 3.0)?;
        let count = read_u32(&mut r)? as usize;
        let mut names = Vec::with_capacity(count);
        for _ in 0..count {
            let len = read_u32(&mut r)? as usize;
            let mut b = vec![0u8; len];
            r.read_exact(&mut b)?;
            names.push(String::from_utf8(b).map_err(|_| FieldError::Snapshot("field name is not UTF-8".into()))?);
        }
        let np = grid.num_points();
        let mut fields = Vec::with_capacity(count);
        for name in names {
            let mut raw = vec![0u8; np * 8];
            r.read_exact(&mut raw)?;
            let vals = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
            fields.push((name, vals));
        }
        Ok(Self { grid, fields })
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), FieldError> {
        let f = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(f))
    }

    pub fn load(path: &std::path::Path) -> Result<Self, FieldError> {
        let f = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(f))
    }
}

fn read_u32(r: &mut impl Read) -> Result<u32, FieldError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_bit_exact() {
        let g = Grid::periodic(2, 8).unwrap();
        let f = ScalarField::from_fn(&g, |x| x[0].sin() + 0.25 * x[1].cos());
        let mut s = Snapshot::new(g);
        s.push("rho", &f);
        s.push("w_0", &f.scale(-2.0));
        let mut buf = Vec::new();
        s.write_to(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"KEF1");
        let back = Snapshot::read_from(buf.as_slice()).unwrap();
        assert_eq!(back.grid, g);
        assert_eq!(back.fields.len(), 2);
        for ((a, va), (b, vb)) in s.fields.iter().zip(&back.fields) {
            assert_eq!(a, b);
            assert!(va.iter().zip(vb).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }

    #[test]
    fn rejects_bad_magic() {
        assert!(Snapshot::read_from(&b"KEF0\0\0\0\0"[..]).is_err());
    }
}
