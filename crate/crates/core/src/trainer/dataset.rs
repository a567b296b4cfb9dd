//! `BFDS` training datasets.
//!
//! Layout, little-endian:
//!
//! ```text
//! "BFDS" | version u32 | meta length u32 | meta (TOML, UTF-8)
//! sequence count u32 | per sequence: frames u32, particles u32, offset u64,
//!                                    truncated u8, 3 pad bytes
//! frame blocks: per particle position 3xf32, velocity 3xf32,
//!               acceleration 3xf32, feature 23xf32, target 3xf32
//! ```
//!
//! Sample frame `n` of a sequence holds the state of physics frame `n`, its
//! features and the acceleration of frame `n + 1`. The sequence table is
//! written as a placeholder and patched by [`DatasetWriter::finish`], so
//! frames can be streamed without holding a sequence in memory.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::Config;
use crate::exec::Exec;
use crate::features::{FeatureExtractor, FeatureScratch, FeatureVector, FEATURE_LEN};
use crate::grid::NeighborGrid;
use crate::physics::PhysicsModel;
use crate::state::FluidState;
use crate::stepper::{run_frames, Truncation};
use crate::{Error, Result, Vec3};

pub const DATASET_MAGIC: &[u8; 4] = b"BFDS";
pub const DATASET_VERSION: u32 = 1;

/// f32 values per particle record.
pub const RECORD_FLOATS: usize = 9 + FEATURE_LEN + 3;
pub const RECORD_BYTES: usize = RECORD_FLOATS * 4;
const TABLE_ENTRY_BYTES: u64 = 20;

/// Provenance of a dataset. The full run configuration is embedded so the
/// vessel and constants can be rebuilt for rollouts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetMeta {
    pub h: f64,
    pub time_step: f64,
    pub seed: u64,
    /// Where the proxies came from (a file path or "config").
    pub proxy_source: String,
    pub config_hash: String,
    pub config: Config,
}

impl DatasetMeta {
    pub fn new(config: &Config, proxy_source: impl Into<String>) -> Self {
        Self {
            h: config.sph.h,
            time_step: config.fluid.time_step,
            seed: config.run.seed,
            proxy_source: proxy_source.into(),
            config_hash: config.hash(),
            config: config.clone(),
        }
    }

    /// Particle mass used to rebuild states from records.
    pub fn particle_mass(&self) -> f64 {
        let d = self.config.lattice_spacing();
        self.config.fluid.rest_density * d * d * d
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SequenceEntry {
    /// Sample frames in the sequence.
    pub frames: u32,
    pub particles: u32,
    /// Byte offset of the first frame block.
    pub offset: u64,
    /// The physics run stopped early on an instability.
    pub truncated: bool,
}

impl SequenceEntry {
    pub fn records(&self) -> u64 {
        self.frames as u64 * self.particles as u64
    }

    fn frame_bytes(&self) -> u64 {
        self.particles as u64 * RECORD_BYTES as u64
    }
}

/// One sample frame held in memory, in the stored `f32` precision.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SampleFrame {
    pub position: Vec<[f32; 3]>,
    pub velocity: Vec<[f32; 3]>,
    pub acceleration: Vec<[f32; 3]>,
    pub features: Vec<[f32; FEATURE_LEN]>,
    pub target: Vec<[f32; 3]>,
}

fn widen(v: &[f32; 3]) -> Vec3 {
    Vec3::new(v[0] as f64, v[1] as f64, v[2] as f64)
}

fn narrow(v: &Vec3) -> [f32; 3] {
    [v.x as f32, v.y as f32, v.z as f32]
}

impl SampleFrame {
    pub fn len(&self) -> usize {
        self.position.len()
    }

    pub fn is_empty(&self) -> bool {
        self.position.is_empty()
    }

    pub fn from_parts(state: &FluidState, features: &[FeatureVector], targets: &[Vec3]) -> Self {
        Self {
            position: state.position.iter().map(narrow).collect(),
            velocity: state.velocity.iter().map(narrow).collect(),
            acceleration: state.acceleration.iter().map(narrow).collect(),
            features: features.iter().map(|f| f.to_f32()).collect(),
            target: targets.iter().map(narrow).collect(),
        }
    }

    /// The raw state of this frame with uniform particle `mass`.
    pub fn state(&self, mass: f64) -> FluidState {
        FluidState {
            position: self.position.iter().map(widen).collect(),
            velocity: self.velocity.iter().map(widen).collect(),
            acceleration: self.acceleration.iter().map(widen).collect(),
            mass: vec![mass; self.len()],
        }
    }

    pub fn feature(&self, i: usize) -> [f64; FEATURE_LEN] {
        self.features[i].map(|v| v as f64)
    }

    pub fn target(&self, i: usize) -> Vec3 {
        widen(&self.target[i])
    }

    fn write_record(&self, i: usize, out: &mut Vec<u8>) {
        let parts: [&[f32]; 5] = [
            &self.position[i],
            &self.velocity[i],
            &self.acceleration[i],
            &self.features[i],
            &self.target[i],
        ];
        for part in parts {
            for v in part {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }

    fn encode(&self, out: &mut Vec<u8>) {
        out.clear();
        out.reserve(self.len() * RECORD_BYTES);
        for i in 0..self.len() {
            self.write_record(i, out);
        }
    }

    fn decode(bytes: &[u8], particles: usize) -> Self {
        let mut frame = SampleFrame {
            position: Vec::with_capacity(particles),
            velocity: Vec::with_capacity(particles),
            acceleration: Vec::with_capacity(particles),
            features: Vec::with_capacity(particles),
            target: Vec::with_capacity(particles),
        };
        let mut floats = bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]));
        let take3 = |it: &mut dyn Iterator<Item = f32>| -> [f32; 3] {
            [it.next().unwrap(), it.next().unwrap(), it.next().unwrap()]
        };
        for _ in 0..particles {
            frame.position.push(take3(&mut floats));
            frame.velocity.push(take3(&mut floats));
            frame.acceleration.push(take3(&mut floats));
            let mut f = [0f32; FEATURE_LEN];
            f.iter_mut().for_each(|slot| *slot = floats.next().unwrap());
            frame.features.push(f);
            frame.target.push(take3(&mut floats));
        }
        frame
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Sequence {
    pub frames: Vec<SampleFrame>,
    pub truncated: bool,
}

/// A whole dataset in memory.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameDataset {
    pub meta: DatasetMeta,
    pub sequences: Vec<Sequence>,
}

impl FrameDataset {
    pub fn records(&self) -> usize {
        self.sequences.iter().flat_map(|s| &s.frames).map(|f| f.len()).sum()
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut reader = DatasetReader::open(path)?;
        let mut sequences = Vec::with_capacity(reader.sequences().len());
        for s in 0..reader.sequences().len() {
            let entry = reader.sequences()[s];
            let frames = (0..entry.frames as usize)
                .map(|n| reader.read_frame(s, n))
                .collect::<Result<Vec<_>>>()?;
            sequences.push(Sequence {
                frames,
                truncated: entry.truncated,
            });
        }
        Ok(Self {
            meta: reader.meta().clone(),
            sequences,
        })
    }

    pub fn write(&self, path: &Path) -> Result<DatasetSummary> {
        let mut w = DatasetWriter::create(path, &self.meta, self.sequences.len())?;
        for seq in &self.sequences {
            let particles = seq.frames.first().map_or(0, |f| f.len());
            w.begin_sequence(particles)?;
            for frame in &seq.frames {
                w.write_sample_frame(frame)?;
            }
            w.end_sequence(seq.truncated)?;
        }
        w.finish()
    }
}

/// Totals returned after writing or streaming a dataset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetSummary {
    pub sequences: usize,
    pub records: u64,
    /// SHA-256 over all record bytes in file order.
    pub digest: String,
}

pub struct DatasetWriter {
    path: PathBuf,
    out: BufWriter<File>,
    table_pos: u64,
    table: Vec<SequenceEntry>,
    expected: usize,
    current: Option<SequenceEntry>,
    pos: u64,
    digest: Sha256,
    buf: Vec<u8>,
}

impl DatasetWriter {
    pub fn create(path: &Path, meta: &DatasetMeta, sequences: usize) -> Result<Self> {
        let io = |e| Error::io(path, e);
        let file = File::create(path).map_err(io)?;
        let mut out = BufWriter::new(file);
        let meta_text = toml::to_string(meta).map_err(|e| Error::invalid(format!("dataset metadata: {e}")))?;
        out.write_all(DATASET_MAGIC).map_err(io)?;
        out.write_all(&DATASET_VERSION.to_le_bytes()).map_err(io)?;
        out.write_all(&(meta_text.len() as u32).to_le_bytes()).map_err(io)?;
        out.write_all(meta_text.as_bytes()).map_err(io)?;
        out.write_all(&(sequences as u32).to_le_bytes()).map_err(io)?;
        let table_pos = 16 + meta_text.len() as u64;
        out.write_all(&vec![0u8; sequences * TABLE_ENTRY_BYTES as usize])
            .map_err(io)?;
        Ok(Self {
            path: path.to_path_buf(),
            out,
            table_pos,
            table: Vec::with_capacity(sequences),
            expected: sequences,
            current: None,
            pos: table_pos + sequences as u64 * TABLE_ENTRY_BYTES,
            digest: Sha256::new(),
            buf: Vec::new(),
        })
    }

    pub fn begin_sequence(&mut self, particles: usize) -> Result<()> {
        if self.current.is_some() {
            return Err(Error::invalid("previous sequence was not ended"));
        }
        if self.table.len() == self.expected {
            return Err(Error::invalid(format!(
                "dataset was created for {} sequences",
                self.expected
            )));
        }
        self.current = Some(SequenceEntry {
            frames: 0,
            particles: particles as u32,
            offset: self.pos,
            truncated: false,
        });
        Ok(())
    }

    pub fn write_frame(&mut self, state: &FluidState, features: &[FeatureVector], targets: &[Vec3]) -> Result<()> {
        if features.len() != state.len() || targets.len() != state.len() {
            return Err(Error::invalid("state, features and targets differ in length"));
        }
        self.write_sample_frame(&SampleFrame::from_parts(state, features, targets))
    }

    pub fn write_sample_frame(&mut self, frame: &SampleFrame) -> Result<()> {
        let entry = self
            .current
            .as_mut()
            .ok_or_else(|| Error::invalid("write_frame outside a sequence"))?;
        if frame.len() != entry.particles as usize {
            return Err(Error::invalid(format!(
                "frame has {} particles, sequence has {}",
                frame.len(),
                entry.particles
            )));
        }
        frame.encode(&mut self.buf);
        self.out.write_all(&self.buf).map_err(|e| Error::io(&self.path, e))?;
        self.digest.update(&self.buf);
        self.pos += self.buf.len() as u64;
        entry.frames += 1;
        Ok(())
    }

    pub fn end_sequence(&mut self, truncated: bool) -> Result<()> {
        let mut entry = self
            .current
            .take()
            .ok_or_else(|| Error::invalid("end_sequence without begin_sequence"))?;
        entry.truncated = truncated;
        self.table.push(entry);
        Ok(())
    }

    /// Patch the sequence table and flush.
    pub fn finish(mut self) -> Result<DatasetSummary> {
        if self.current.is_some() {
            return Err(Error::invalid("last sequence was not ended"));
        }
        if self.table.len() != self.expected {
            return Err(Error::invalid(format!(
                "{} of {} sequences written",
                self.table.len(),
                self.expected
            )));
        }
        let io = |e| Error::io(&self.path, e);
        self.out.flush().map_err(io)?;
        let mut file = self
            .out
            .into_inner()
            .map_err(|e| Error::io(&self.path, e.into_error()))?;
        file.seek(SeekFrom::Start(self.table_pos)).map_err(io)?;
        let mut table = Vec::with_capacity(self.table.len() * TABLE_ENTRY_BYTES as usize);
        for e in &self.table {
            table.extend_from_slice(&e.frames.to_le_bytes());
            table.extend_from_slice(&e.particles.to_le_bytes());
            table.extend_from_slice(&e.offset.to_le_bytes());
            table.extend_from_slice(&[e.truncated as u8, 0, 0, 0]);
        }
        file.write_all(&table).map_err(io)?;
        file.sync_all().map_err(io)?;
        Ok(DatasetSummary {
            sequences: self.table.len(),
            records: self.table.iter().map(|e| e.records()).sum(),
            digest: hex::encode(self.digest.finalize()),
        })
    }
}

pub struct DatasetReader {
    path: PathBuf,
    file: BufReader<File>,
    meta: DatasetMeta,
    table: Vec<SequenceEntry>,
    buf: Vec<u8>,
}

impl DatasetReader {
    pub fn open(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let len = file.metadata().map_err(|e| Error::io(path, e))?.len();
        let mut file = BufReader::new(file);
        let bad = |reason: String| Error::format(path, reason);
        let eof = |e: std::io::Error| Error::format(path, format!("truncated dataset header ({e})"));

        let mut magic = [0u8; 4];
        file.read_exact(&mut magic).map_err(eof)?;
        if &magic != DATASET_MAGIC {
            return Err(bad(format!("bad magic {magic:?}, expected {DATASET_MAGIC:?}")));
        }
        let version = read_u32(&mut file).map_err(eof)?;
        if version != DATASET_VERSION {
            return Err(bad(format!(
                "dataset version {version} is not supported (expected {DATASET_VERSION})"
            )));
        }
        let meta_len = read_u32(&mut file).map_err(eof)? as u64;
        if meta_len > len {
            return Err(bad(format!("metadata length {meta_len} exceeds the file size")));
        }
        let mut meta_bytes = vec![0u8; meta_len as usize];
        file.read_exact(&mut meta_bytes).map_err(eof)?;
        let meta_text = String::from_utf8(meta_bytes).map_err(|_| bad("metadata is not UTF-8".into()))?;
        let meta: DatasetMeta = toml::from_str(&meta_text).map_err(|e| bad(format!("metadata: {e}")))?;
        let count = read_u32(&mut file).map_err(eof)? as u64;
        if count * TABLE_ENTRY_BYTES > len {
            return Err(bad(format!("implausible sequence count {count}")));
        }
        let mut table = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let frames = read_u32(&mut file).map_err(eof)?;
            let particles = read_u32(&mut file).map_err(eof)?;
            let offset = read_u64(&mut file).map_err(eof)?;
            let mut flag = [0u8; 4];
            file.read_exact(&mut flag).map_err(eof)?;
            table.push(SequenceEntry {
                frames,
                particles,
                offset,
                truncated: flag[0] != 0,
            });
        }
        for (s, e) in table.iter().enumerate() {
            let end = e.offset + e.records() * RECORD_BYTES as u64;
            if end > len {
                return Err(bad(format!(
                    "sequence {s} needs {end} bytes but the file has {len} (truncated file?)"
                )));
            }
        }
        Ok(Self {
            path: path.to_path_buf(),
            file,
            meta,
            table,
            buf: Vec::new(),
        })
    }

    pub fn meta(&self) -> &DatasetMeta {
        &self.meta
    }

    pub fn sequences(&self) -> &[SequenceEntry] {
        &self.table
    }

    pub fn records(&self) -> u64 {
        self.table.iter().map(|e| e.records()).sum()
    }

    pub fn read_frame(&mut self, sequence: usize, frame: usize) -> Result<SampleFrame> {
        let entry = *self.table.get(sequence).ok_or(Error::OutOfRange {
            index: sequence,
            len: self.table.len(),
        })?;
        if frame >= entry.frames as usize {
            return Err(Error::OutOfRange {
                index: frame,
                len: entry.frames as usize,
            });
        }
        let io = |e| Error::io(&self.path, e);
        let bytes = entry.frame_bytes();
        self.file
            .seek(SeekFrom::Start(entry.offset + frame as u64 * bytes))
            .map_err(io)?;
        self.buf.resize(bytes as usize, 0);
        self.file.read_exact(&mut self.buf).map_err(io)?;
        Ok(SampleFrame::decode(&self.buf, entry.particles as usize))
    }

    /// Stream every record once, returning counts and the record digest.
    pub fn summarize(&mut self) -> Result<DatasetSummary> {
        let mut digest = Sha256::new();
        for e in self.table.clone() {
            let io = |err| Error::io(&self.path, err);
            self.file.seek(SeekFrom::Start(e.offset)).map_err(io)?;
            let bytes = e.frame_bytes() as usize;
            self.buf.resize(bytes, 0);
            for _ in 0..e.frames {
                self.file
                    .read_exact(&mut self.buf)
                    .map_err(|err| Error::io(&self.path, err))?;
                digest.update(&self.buf);
            }
        }
        Ok(DatasetSummary {
            sequences: self.table.len(),
            records: self.records(),
            digest: hex::encode(digest.finalize()),
        })
    }
}

fn read_u32(r: &mut impl Read) -> std::io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> std::io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

/// Result of capturing one physics sequence.
#[derive(Clone, Debug)]
pub struct CaptureSummary {
    pub sample_frames: usize,
    pub truncated: Option<Truncation>,
}

/// Run physics for `frames` frames (the initial one included) and stream
/// `frames - 1` sample frames into `writer` as one sequence.
pub fn capture_sequence(
    writer: &mut DatasetWriter,
    model: &PhysicsModel,
    initial: &FluidState,
    proxy_grid: &NeighborGrid,
    frames: usize,
    spec: crate::features::BinningSpec,
    exec: &Exec,
) -> Result<CaptureSummary> {
    writer.begin_sequence(initial.len())?;
    let mut written = 0usize;
    let outcome = run_frames(model, initial, proxy_grid, frames.saturating_sub(1), exec, |t| {
        let ex = FeatureExtractor {
            state: t.state,
            proxy_positions: proxy_grid.proxy_positions(),
            spec,
        };
        let features = exec.map_init(t.state.len(), FeatureScratch::default, |scratch, i| {
            ex.extract(i, t.lists.fluid(i), t.lists.proxy(i), scratch)
        });
        writer.write_frame(t.state, &features, &t.next.acceleration)?;
        written += 1;
        Ok(())
    })?;
    if let Some(t) = outcome.truncated {
        log::warn!(
            "capture truncated after {written} sample frames: frame {} diverged at particle {}",
            t.frame,
            t.particle
        );
    }
    writer.end_sequence(outcome.truncated.is_some())?;
    Ok(CaptureSummary {
        sample_frames: written,
        truncated: outcome.truncated,
    })
}
