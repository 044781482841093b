//! CSV and binary containers for sample batches.
//!
//! Binary layout, little-endian throughout:
//!
//! ```text
//! magic   4 bytes  "BIOE"
//! version u16      1
//! n       u32      points per configuration
//! count   u64      number of records
//! record  count × (chain u32, step u64, n × f64)
//! ```

use super::{Draws, SampleBatch};
use crate::error::{Error, Result};
use std::io::{BufRead, Read, Write};

pub const BINARY_MAGIC: [u8; 4] = *b"BIOE";
pub const BINARY_VERSION: u16 = 1;

impl Draws {
    /// Columns chain, step, x_1..x_N; floats in shortest round-trip form.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "chain,step")?;
        for k in 1..=self.n {
            write!(w, ",x_{k}")?;
        }
        writeln!(w)?;
        for i in 0..self.len() {
            write!(w, "{},{}", self.chain[i], self.step[i])?;
            for x in self.configuration(i) {
                write!(w, ",{x}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::Format("empty CSV".into()))??;
        let cols = header.split(',').count();
        if cols < 3 || !header.starts_with("chain,step,") {
            return Err(Error::Format(format!("unexpected CSV header '{header}'")));
        }
        let mut d = Draws::new(cols - 2);
        for (ln, line) in lines.enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let bad = |what: &str| Error::Format(format!("line {}: {what}", ln + 2));
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != cols {
                return Err(bad("wrong number of fields"));
            }
            d.chain.push(f[0].parse().map_err(|_| bad("bad chain"))?);
            d.step.push(f[1].parse().map_err(|_| bad("bad step"))?);
            for s in &f[2..] {
                d.positions.push(s.parse().map_err(|_| bad("bad coordinate"))?);
            }
        }
        Ok(d)
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&BINARY_MAGIC)?;
        w.write_all(&BINARY_VERSION.to_le_bytes())?;
        let n = u32::try_from(self.n).map_err(|_| Error::Format("N does not fit in u32".into()))?;
        w.write_all(&n.to_le_bytes())?;
        w.write_all(&(self.len() as u64).to_le_bytes())?;
        for i in 0..self.len() {
            w.write_all(&self.chain[i].to_le_bytes())?;
            w.write_all(&self.step[i].to_le_bytes())?;
            for x in self.configuration(i) {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if magic != BINARY_MAGIC {
            return Err(Error::Format("missing BIOE magic".into()));
        }
        let version = u16::from_le_bytes(read_array(&mut r)?);
        if version != BINARY_VERSION {
            return Err(Error::Format(format!("unsupported container version {version}")));
        }
        let n = u32::from_le_bytes(read_array(&mut r)?) as usize;
        let count = u64::from_le_bytes(read_array(&mut r)?);
        let mut d = Draws::new(n);
        for _ in 0..count {
            d.chain.push(u32::from_le_bytes(read_array(&mut r)?));
            d.step.push(u64::from_le_bytes(read_array(&mut r)?));
            for _ in 0..n {
                d.positions.push(f64::from_le_bytes(read_array(&mut r)?));
            }
        }
        Ok(d)
    }
}

fn read_array<R: Read, const K: usize>(r: &mut R) -> Result<[u8; K]> {
    let mut b = [0u8; K];
    r.read_exact(&mut b)?;
    Ok(b)
}

impl SampleBatch {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        self.draws.write_csv(w)
    }

    pub fn write_binary<W: Write>(&self, w: W) -> Result<()> {
        self.draws.write_binary(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn draws() -> Draws {
        let mut d = Draws::new(2);
        d.push(0, 10, &[0.25, 0.1]);
        d.push(3, 15, &[1e-300, 0.1 + 0.2]);
        d
    }

    #[test]
    fn csv_round_trip() {
        let d = draws();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("chain,step,x_1,x_2\n0,10,0.1,0.25\n"));
        assert_eq!(Draws::read_csv(&buf[..]).unwrap(), d);
    }

    #[test]
    fn binary_round_trip_and_header() {
        let d = draws();
        let mut buf = Vec::new();
        d.write_binary(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"BIOE");
        assert_eq!(u16::from_le_bytes([buf[4], buf[5]]), 1);
        assert_eq!(buf.len(), 4 + 2 + 4 + 8 + 2 * (4 + 8 + 16));
        assert_eq!(Draws::read_binary(&buf[..]).unwrap(), d);
        buf[0] = b'X';
        assert!(matches!(Draws::read_binary(&buf[..]), Err(Error::Format(_))));
    }

    #[test]
    fn truncated_binary_is_an_error() {
        let mut buf = Vec::new();
        draws().write_binary(&mut buf).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(Draws::read_binary(&buf[..]).is_err());
    }
}
