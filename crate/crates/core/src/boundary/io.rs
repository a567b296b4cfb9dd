//! `proxies.bin`: magic "BFPX", version u32, count u32, then per proxy three
//! f32 coordinates and the f32 weight, all little-endian.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::{Error, Result, Vec3};

pub const PROXY_MAGIC: &[u8; 4] = b"BFPX";
pub const PROXY_VERSION: u32 = 1;

pub fn write_proxies(path: &Path, positions: &[Vec3], weights: &[f64]) -> Result<()> {
    if positions.len() != weights.len() {
        return Err(Error::invalid("proxy positions and weights differ in length"));
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut put = |bytes: &[u8]| w.write_all(bytes).map_err(|e| Error::io(path, e));
    put(PROXY_MAGIC)?;
    put(&PROXY_VERSION.to_le_bytes())?;
    put(&(positions.len() as u32).to_le_bytes())?;
    for (p, wt) in positions.iter().zip(weights) {
        for c in p.iter() {
            put(&(*c as f32).to_le_bytes())?;
        }
        put(&(*wt as f32).to_le_bytes())?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Positions and weights stored in a proxy file.
pub fn read_proxies(path: &Path) -> Result<(Vec<Vec3>, Vec<f64>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);
    let mut take = |n: usize| -> Result<Vec<u8>> {
        let mut buf = vec![0u8; n];
        r.read_exact(&mut buf)
            .map_err(|_| Error::format(path, "truncated proxy file"))?;
        Ok(buf)
    };
    if take(4)? != PROXY_MAGIC {
        return Err(Error::format(path, "not a proxy file (bad magic)"));
    }
    let version = u32::from_le_bytes(take(4)?.try_into().unwrap());
    if version != PROXY_VERSION {
        return Err(Error::format(
            path,
            format!("unsupported proxy file version {version} (expected {PROXY_VERSION})"),
        ));
    }
    let count = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
    let body = take(count * 16)?;
    let f = |i: usize| f32::from_le_bytes(body[4 * i..4 * i + 4].try_into().unwrap()) as f64;
    let mut positions = Vec::with_capacity(count);
    let mut weights = Vec::with_capacity(count);
    for k in 0..count {
        positions.push(Vec3::new(f(4 * k), f(4 * k + 1), f(4 * k + 2)));
        weights.push(f(4 * k + 3));
    }
    Ok((positions, weights))
}
