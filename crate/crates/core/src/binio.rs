//! Little-endian primitives for the versioned binary file formats (index
//! and model checkpoints). Every multi-byte value is little-endian; strings
//! are a u32 byte length followed by UTF-8 bytes.

use std::io::{Read, Write};

use crate::error::{CoreError, Result};

pub fn write_u32<W: Write>(w: &mut W, v: u32) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

pub fn write_u64<W: Write>(w: &mut W, v: u64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

pub fn write_f64<W: Write>(w: &mut W, v: f64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

pub fn write_str<W: Write>(w: &mut W, s: &str) -> Result<()> {
    let len: u32 = s
        .len()
        .try_into()
        .map_err(|_| CoreError::invalid("string longer than u32::MAX bytes"))?;
    write_u32(w, len)?;
    w.write_all(s.as_bytes())?;
    Ok(())
}

pub fn write_f64_slice<W: Write>(w: &mut W, values: &[f64]) -> Result<()> {
    write_u64(w, values.len() as u64)?;
    for &v in values {
        write_f64(w, v)?;
    }
    Ok(())
}

pub fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

pub fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

pub fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

/// Reads a length-prefixed string, refusing absurd lengths so a corrupt
/// file fails fast instead of attempting a giant allocation.
pub fn read_str<R: Read>(r: &mut R, max_len: u32) -> Result<String> {
    let len = read_u32(r)?;
    if len > max_len {
        return Err(CoreError::invalid(format!(
            "string length {len} exceeds limit {max_len}; corrupt file?"
        )));
    }
    let mut buf = vec![0u8; len as usize];
    r.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|e| CoreError::invalid(format!("invalid UTF-8: {e}")))
}

pub fn read_f64_vec<R: Read>(r: &mut R, max_len: u64) -> Result<Vec<f64>> {
    let len = read_u64(r)?;
    if len > max_len {
        return Err(CoreError::invalid(format!(
            "array length {len} exceeds limit {max_len}; corrupt file?"
        )));
    }
    let mut out = Vec::with_capacity(len as usize);
    for _ in 0..len {
        out.push(read_f64(r)?);
    }
    Ok(out)
}

/// Checks a fixed magic-plus-version header.
pub fn expect_magic<R: Read>(r: &mut R, magic: &[u8]) -> Result<()> {
    let mut buf = vec![0u8; magic.len()];
    r.read_exact(&mut buf)?;
    if buf != magic {
        return Err(CoreError::invalid(format!(
            "bad file header: expected {:?}, found {:?}",
            String::from_utf8_lossy(magic),
            String::from_utf8_lossy(&buf)
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_primitives() {
        let mut buf = Vec::new();
        write_u32(&mut buf, 7).unwrap();
        write_u64(&mut buf, u64::MAX).unwrap();
        write_f64(&mut buf, -0.125).unwrap();
        write_str(&mut buf, "héllo").unwrap();
        write_f64_slice(&mut buf, &[1.0, 2.5]).unwrap();

        let mut r = buf.as_slice();
        assert_eq!(read_u32(&mut r).unwrap(), 7);
        assert_eq!(read_u64(&mut r).unwrap(), u64::MAX);
        assert_eq!(read_f64(&mut r).unwrap(), -0.125);
        assert_eq!(read_str(&mut r, 1024).unwrap(), "héllo");
        assert_eq!(read_f64_vec(&mut r, 1024).unwrap(), vec![1.0, 2.5]);
        assert!(r.is_empty());
    }

    #[test]
    fn oversized_string_rejected() {
        let mut buf = Vec::new();
        write_u32(&mut buf, 1_000_000).unwrap();
        let mut r = buf.as_slice();
        assert!(read_str(&mut r, 1024).is_err());
    }

    #[test]
    fn magic_mismatch_rejected() {
        let mut r = b"WRONGMAG".as_slice();
        assert!(expect_magic(&mut r, b"RIGHTMAG").is_err());
    }

    #[test]
    fn truncated_input_is_an_error() {
        let mut buf = Vec::new();
        write_f64(&mut buf, 1.0).unwrap();
        buf.truncate(4);
        let mut r = buf.as_slice();
        assert!(read_f64(&mut r).is_err());
    }
}
