//! Binary coefficient format `EFC1`.
//!
//! Layout, all little-endian: the magic bytes, `u32 n`, `u32 d`, `u8 kind`
//! (0 past, 1 future), `f64 η`, then for each `k = 2..=d` exactly `n^k`
//! values of `f64`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use hinf_energy::{CoeffVector, EnergyKind, EnergyPolynomial};

use crate::error::{CliError, CliResult};

pub const MAGIC: &[u8; 4] = b"EFC1";
pub const HEADER_LEN: usize = 4 + 4 + 4 + 1 + 8;

fn kind_byte(kind: EnergyKind) -> u8 {
    match kind {
        EnergyKind::Past => 0,
        EnergyKind::Future => 1,
    }
}

/// Number of bytes a file with this header must contain.
pub fn expected_len(n: usize, d: usize) -> Option<u64> {
    let mut total = HEADER_LEN as u64;
    for k in 2..=d {
        let len = (n as u64).checked_pow(k as u32)?;
        total = total.checked_add(len.checked_mul(8)?)?;
    }
    Some(total)
}

pub fn write_coeffs<W: Write>(mut w: W, poly: &EnergyPolynomial) -> CliResult<()> {
    let n = u32::try_from(poly.n).map_err(|_| CliError::parse("n does not fit in u32"))?;
    w.write_all(MAGIC)?;
    w.write_all(&n.to_le_bytes())?;
    w.write_all(&(poly.degree() as u32).to_le_bytes())?;
    w.write_all(&[kind_byte(poly.kind)])?;
    w.write_all(&poly.eta.to_le_bytes())?;
    let mut buf = Vec::with_capacity(8 * 4096);
    for c in &poly.coeffs {
        for chunk in c.data.chunks(4096) {
            buf.clear();
            buf.extend(chunk.iter().flat_map(|v| v.to_le_bytes()));
            w.write_all(&buf)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_coeffs<R: Read>(mut r: R) -> CliResult<EnergyPolynomial> {
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header).map_err(|_| CliError::parse("coefficient file shorter than its header"))?;
    if &header[..4] != MAGIC {
        return Err(CliError::parse("bad magic, expected EFC1"));
    }
    let word = |i: usize| u32::from_le_bytes(header[i..i + 4].try_into().expect("4 bytes")) as usize;
    let (n, d) = (word(4), word(8));
    let kind = match header[12] {
        0 => EnergyKind::Past,
        1 => EnergyKind::Future,
        b => return Err(CliError::parse(format!("unknown energy kind byte {b}"))),
    };
    let eta = f64::from_le_bytes(header[13..21].try_into().expect("8 bytes"));
    if n == 0 || d < 2 {
        return Err(CliError::parse(format!("invalid header n={n} d={d}")));
    }
    expected_len(n, d).ok_or_else(|| CliError::parse("header sizes overflow"))?;

    let mut coeffs = Vec::with_capacity(d - 1);
    let mut bytes = vec![0u8; 8 * 4096];
    for k in 2..=d {
        let len = n.pow(k as u32);
        let mut data = Vec::with_capacity(len);
        while data.len() < len {
            let take = (len - data.len()).min(4096);
            r.read_exact(&mut bytes[..8 * take]).map_err(|_| CliError::parse("coefficient file truncated"))?;
            data.extend(bytes[..8 * take].chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes"))));
        }
        coeffs.push(CoeffVector::new(n, k, data)?);
    }
    if r.read(&mut [0u8; 1])? != 0 {
        return Err(CliError::parse("trailing bytes after the last coefficient"));
    }
    Ok(EnergyPolynomial::new(kind, eta, n, coeffs)?)
}

pub fn save(path: &Path, poly: &EnergyPolynomial) -> CliResult<()> {
    write_coeffs(BufWriter::new(File::create(path)?), poly)
}

pub fn load(path: &Path) -> CliResult<EnergyPolynomial> {
    read_coeffs(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> EnergyPolynomial {
        let c2 = CoeffVector::new(2, 2, vec![1.0, 0.25, 0.25, -3.5]).unwrap();
        let c3 = CoeffVector::new(2, 3, (0..8).map(|i| f64::from(i) * 0.1 - 0.3).collect()).unwrap();
        EnergyPolynomial::new(EnergyKind::Future, 0.5, 2, vec![c2, c3]).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let mut buf = Vec::new();
        write_coeffs(&mut buf, &sample()).unwrap();
        assert_eq!(buf.len() as u64, expected_len(2, 3).unwrap());
        assert_eq!(&buf[..4], MAGIC);
        let back = read_coeffs(&buf[..]).unwrap();
        assert_eq!(back.kind, EnergyKind::Future);
        assert_eq!(back.eta.to_bits(), 0.5f64.to_bits());
        for (a, b) in back.coeffs.iter().zip(&sample().coeffs) {
            assert!(a.data.iter().zip(&b.data).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }

    #[test]
    fn length_must_match_header() {
        let mut buf = Vec::new();
        write_coeffs(&mut buf, &sample()).unwrap();
        assert!(matches!(read_coeffs(&buf[..buf.len() - 1]), Err(CliError::Parse(_))));
        buf.push(0);
        assert!(matches!(read_coeffs(&buf[..]), Err(CliError::Parse(_))));
        buf[0] = b'X';
        assert!(matches!(read_coeffs(&buf[..]), Err(CliError::Parse(_))));
    }
}
