//! `BFSF` frame files and the run manifest.
//!
//! ```text
//! "BFSF" | version u32 | frame index u32 | fluid count u32
//! positions 3xf32 * n | velocities 3xf32 * n | accelerations 3xf32 * n
//! ```

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::state::FluidState;
use crate::{Error, Result, Vec3};

pub const FRAME_MAGIC: &[u8; 4] = b"BFSF";
pub const FRAME_VERSION: u32 = 1;
pub const MANIFEST_NAME: &str = "manifest.txt";

pub fn frame_path(dir: &Path, index: usize) -> PathBuf {
    dir.join(format!("frame_{index:05}.bfsf"))
}

pub fn write_frame(path: &Path, index: usize, state: &FluidState) -> Result<()> {
    let io = |e| Error::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    let mut buf = Vec::with_capacity(16 + state.len() * 36);
    buf.extend_from_slice(FRAME_MAGIC);
    buf.extend_from_slice(&FRAME_VERSION.to_le_bytes());
    buf.extend_from_slice(&(index as u32).to_le_bytes());
    buf.extend_from_slice(&(state.len() as u32).to_le_bytes());
    for field in [&state.position, &state.velocity, &state.acceleration] {
        for v in field {
            for c in v.iter() {
                buf.extend_from_slice(&(*c as f32).to_le_bytes());
            }
        }
    }
    w.write_all(&buf).map_err(io)?;
    w.flush().map_err(io)
}

/// Read one frame; particle masses are set to `mass`.
pub fn read_frame(path: &Path, mass: f64) -> Result<(usize, FluidState)> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?)
        .read_to_end(&mut bytes)
        .map_err(|e| Error::io(path, e))?;
    if bytes.len() < 16 {
        return Err(Error::format(path, "truncated frame header"));
    }
    if &bytes[..4] != FRAME_MAGIC {
        return Err(Error::format(path, format!("bad magic {:?}", &bytes[..4])));
    }
    let word = |k: usize| u32::from_le_bytes([bytes[k], bytes[k + 1], bytes[k + 2], bytes[k + 3]]);
    let version = word(4);
    if version != FRAME_VERSION {
        return Err(Error::format(
            path,
            format!("frame version {version} is not supported (expected {FRAME_VERSION})"),
        ));
    }
    let index = word(8) as usize;
    let n = word(12) as usize;
    let expected = 16 + n * 36;
    if bytes.len() != expected {
        return Err(Error::format(
            path,
            format!("{} bytes for {n} particles, expected {expected}", bytes.len()),
        ));
    }
    let float = |k: usize| f32::from_le_bytes([bytes[k], bytes[k + 1], bytes[k + 2], bytes[k + 3]]) as f64;
    let field = |block: usize| -> Vec<Vec3> {
        (0..n)
            .map(|i| {
                let k = 16 + block * n * 12 + i * 12;
                Vec3::new(float(k), float(k + 4), float(k + 8))
            })
            .collect()
    };
    Ok((
        index,
        FluidState {
            position: field(0),
            velocity: field(1),
            acceleration: field(2),
            mass: vec![mass; n],
        },
    ))
}

/// Read every frame file of a run directory, ordered by frame index.
pub fn read_run_dir(dir: &Path, mass: f64) -> Result<Vec<FluidState>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "bfsf"))
        .collect();
    paths.sort();
    let mut frames = Vec::with_capacity(paths.len());
    for (k, p) in paths.iter().enumerate() {
        let (index, state) = read_frame(p, mass)?;
        if index != k {
            return Err(Error::format(p, format!("expected frame {k}, found frame {index}")));
        }
        frames.push(state);
    }
    Ok(frames)
}

/// Key-value record written next to the frames of a run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Manifest {
    pub entries: BTreeMap<String, String>,
}

impl Manifest {
    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.entries.insert(key.to_string(), value.to_string());
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text: String = self.entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut m = Manifest::default();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once(" = ")
                .ok_or_else(|| Error::format(path, format!("line {} is not `key = value`", n + 1)))?;
            m.set(k.trim(), v.trim());
        }
        Ok(m)
    }
}
