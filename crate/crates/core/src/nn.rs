//! Small fully connected regressor with tanh hidden layers, a linear output
//! layer, frozen z-score normalization and exact backpropagation.
//!
//! Parameters live in one flat vector laid out layer by layer, each layer
//! as its row-major `out x in` weight matrix followed by its bias. The model
//! file stores them in the same order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result, Vec3};

pub const MODEL_MAGIC: &[u8; 4] = b"PCN1";
pub const MODEL_VERSION: u32 = 1;
const META_TAG: &[u8; 4] = b"META";

/// Smallest standard deviation used for normalization.
pub const STD_FLOOR: f64 = 1e-8;

/// Per-component affine normalization `(x - mean) / std`.
#[derive(Clone, Debug, PartialEq)]
pub struct Normalization {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Normalization {
    pub fn identity(len: usize) -> Self {
        Self {
            mean: vec![0.0; len],
            std: vec![1.0; len],
        }
    }

    /// Mean and population standard deviation of `samples`, each of length
    /// `len`. Stds are floored at [`STD_FLOOR`].
    pub fn fit<I>(len: usize, samples: I) -> Result<Self>
    where
        I: IntoIterator,
        I::Item: AsRef<[f64]>,
    {
        let mut count = 0usize;
        let mut mean = vec![0.0; len];
        let mut m2 = vec![0.0; len];
        for s in samples {
            let s = s.as_ref();
            if s.len() != len {
                return Err(Error::invalid(format!(
                    "sample of length {} where {len} expected",
                    s.len()
                )));
            }
            count += 1;
            for (k, &x) in s.iter().enumerate() {
                let delta = x - mean[k];
                mean[k] += delta / count as f64;
                m2[k] += delta * (x - mean[k]);
            }
        }
        if count == 0 {
            return Err(Error::invalid("cannot fit a normalization to zero samples"));
        }
        let std = m2.iter().map(|v| (v / count as f64).sqrt().max(STD_FLOOR)).collect();
        Ok(Self { mean, std })
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    pub fn normalize_into(&self, x: &[f64], out: &mut [f64]) {
        for k in 0..x.len() {
            out[k] = (x[k] - self.mean[k]) / self.std[k];
        }
    }

    pub fn denormalize_into(&self, y: &[f64], out: &mut [f64]) {
        for k in 0..y.len() {
            out[k] = y[k] * self.std[k] + self.mean[k];
        }
    }
}

/// Run settings a model was trained under. A model is only used with
/// matching settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelMeta {
    pub h: f64,
    pub time_step: f64,
    pub rest_density: f64,
    pub sound_speed: f64,
    pub speed_cap: f64,
    pub bins: u32,
}

impl ModelMeta {
    /// Describe the first mismatch against `other`, if any.
    pub fn mismatch(&self, other: &ModelMeta) -> Option<String> {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs());
        let fields = [
            ("h", self.h, other.h),
            ("time step", self.time_step, other.time_step),
            ("rest density", self.rest_density, other.rest_density),
            ("sound speed", self.sound_speed, other.sound_speed),
            ("speed cap", self.speed_cap, other.speed_cap),
        ];
        for (name, a, b) in fields {
            if !close(a, b) {
                return Some(format!("{name}: model {a}, run {b}"));
            }
        }
        if self.bins != other.bins {
            return Some(format!("bins: model {}, run {}", self.bins, other.bins));
        }
        None
    }
}

/// Reusable buffers for forward and backward passes.
#[derive(Clone, Debug, Default)]
pub struct Scratch {
    acts: Vec<Vec<f64>>,
    delta: Vec<f64>,
    next_delta: Vec<f64>,
    out: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    sizes: Vec<usize>,
    params: Vec<f64>,
    offsets: Vec<usize>,
    pub input_norm: Normalization,
    pub output_norm: Normalization,
    pub meta: Option<ModelMeta>,
}

fn layer_offsets(sizes: &[usize]) -> Vec<usize> {
    let mut offsets = vec![0];
    for w in sizes.windows(2) {
        let last = *offsets.last().expect("non-empty");
        offsets.push(last + w[0] * w[1] + w[1]);
    }
    offsets
}

impl Network {
    /// Glorot-uniform weights, zero biases, identity normalization. The
    /// weights are rounded to `f32` so a saved model reloads bitwise.
    pub fn init(sizes: &[usize], seed: u64) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::invalid(format!("bad layer sizes {sizes:?}")));
        }
        let offsets = layer_offsets(sizes);
        let mut params = vec![0.0; *offsets.last().expect("non-empty")];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (l, w) in sizes.windows(2).enumerate() {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let dist = Uniform::new_inclusive(-bound, bound);
            for p in &mut params[offsets[l]..offsets[l] + fan_in * fan_out] {
                *p = dist.sample(&mut rng) as f32 as f64;
            }
        }
        Ok(Self {
            input_norm: Normalization::identity(sizes[0]),
            output_norm: Normalization::identity(sizes[sizes.len() - 1]),
            sizes: sizes.to_vec(),
            params,
            offsets,
            meta: None,
        })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_len(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_len(&self) -> usize {
        self.sizes[self.sizes.len() - 1]
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// Weight matrix (row-major, `out x in`) and bias of layer `l`.
    pub fn layer(&self, l: usize) -> (&[f64], &[f64]) {
        let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
        let start = self.offsets[l];
        let split = start + n_in * n_out;
        (&self.params[start..split], &self.params[split..split + n_out])
    }

    pub fn quantize_params(&mut self) {
        self.params.iter_mut().for_each(|p| *p = *p as f32 as f64);
    }

    pub fn set_normalization(&mut self, input: Normalization, output: Normalization) -> Result<()> {
        if input.len() != self.input_len() || output.len() != self.output_len() {
            return Err(Error::invalid("normalization length does not match the layer sizes"));
        }
        self.input_norm = input;
        self.output_norm = output;
        Ok(())
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_len() {
            return Err(Error::invalid(format!(
                "network input has length {}, expected {}",
                x.len(),
                self.input_len()
            )));
        }
        if let Some(index) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                kind: "network input",
                index,
            });
        }
        Ok(())
    }

    /// Forward pass on an already-normalized input; fills `scratch.acts`.
    fn forward_normalized(&self, scratch: &mut Scratch) {
        let layers = self.sizes.len() - 1;
        for l in 0..layers {
            let (w, b) = self.layer(l);
            let n_in = self.sizes[l];
            let (head, tail) = scratch.acts.split_at_mut(l + 1);
            let input = &head[l];
            let out = &mut tail[0];
            for (o, slot) in out.iter_mut().enumerate() {
                let row = &w[o * n_in..(o + 1) * n_in];
                let z = b[o] + row.iter().zip(input).map(|(a, b)| a * b).sum::<f64>();
                *slot = if l + 1 < layers { z.tanh() } else { z };
            }
        }
    }

    fn prepare(&self, scratch: &mut Scratch) {
        if scratch.acts.len() != self.sizes.len() || scratch.acts.iter().zip(&self.sizes).any(|(a, &n)| a.len() != n) {
            scratch.acts = self.sizes.iter().map(|&n| vec![0.0; n]).collect();
            scratch.out = vec![0.0; self.output_len()];
        }
    }

    /// Denormalized output for one input, written into `scratch`.
    pub fn forward_with<'s>(&self, x: &[f64], scratch: &'s mut Scratch) -> Result<&'s [f64]> {
        self.check_input(x)?;
        self.prepare(scratch);
        self.input_norm.normalize_into(x, &mut scratch.acts[0]);
        self.forward_normalized(scratch);
        let last = scratch.acts.len() - 1;
        self.output_norm.denormalize_into(&scratch.acts[last], &mut scratch.out);
        Ok(&scratch.out)
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut scratch = Scratch::default();
        Ok(self.forward_with(x, &mut scratch)?.to_vec())
    }

    /// Forward pass for a three-component output.
    pub fn predict(&self, x: &[f64], scratch: &mut Scratch) -> Result<Vec3> {
        let y = self.forward_with(x, scratch)?;
        if y.len() != 3 {
            return Err(Error::invalid("network output is not three-dimensional"));
        }
        Ok(Vec3::new(y[0], y[1], y[2]))
    }

    /// Mean squared error over the normalized output components.
    pub fn loss(&self, x: &[f64], target: &[f64]) -> Result<f64> {
        let mut scratch = Scratch::default();
        let mut grad = Vec::new();
        self.loss_and_gradient(x, target, &mut scratch, &mut grad, false)
    }

    /// Loss and its exact gradient with respect to every parameter.
    pub fn gradient(&self, x: &[f64], target: &[f64], scratch: &mut Scratch, grad: &mut Vec<f64>) -> Result<f64> {
        self.loss_and_gradient(x, target, scratch, grad, true)
    }

    fn loss_and_gradient(
        &self,
        x: &[f64],
        target: &[f64],
        scratch: &mut Scratch,
        grad: &mut Vec<f64>,
        backward: bool,
    ) -> Result<f64> {
        self.check_input(x)?;
        let n_out = self.output_len();
        if target.len() != n_out {
            return Err(Error::invalid(format!(
                "target has length {}, expected {n_out}",
                target.len()
            )));
        }
        self.prepare(scratch);
        self.input_norm.normalize_into(x, &mut scratch.acts[0]);
        self.forward_normalized(scratch);
        let last = scratch.acts.len() - 1;
        scratch.delta.clear();
        let mut loss = 0.0;
        for (k, &t) in target.iter().enumerate() {
            let err = scratch.acts[last][k] - (t - self.output_norm.mean[k]) / self.output_norm.std[k];
            loss += err * err;
            scratch.delta.push(2.0 * err / n_out as f64);
        }
        loss /= n_out as f64;
        if !loss.is_finite() {
            return Err(Error::Divergence(format!("non-finite training loss {loss}")));
        }
        if !backward {
            return Ok(loss);
        }

        grad.clear();
        grad.resize(self.params.len(), 0.0);
        for l in (0..self.sizes.len() - 1).rev() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let start = self.offsets[l];
            let input = &scratch.acts[l];
            for o in 0..n_out {
                let d = scratch.delta[o];
                let row = &mut grad[start + o * n_in..start + (o + 1) * n_in];
                for (g, a) in row.iter_mut().zip(input) {
                    *g = d * a;
                }
                grad[start + n_in * n_out + o] = d;
            }
            if l > 0 {
                let (w, _) = self.layer(l);
                scratch.next_delta.clear();
                for i in 0..n_in {
                    let back: f64 = (0..n_out).map(|o| w[o * n_in + i] * scratch.delta[o]).sum();
                    let a = input[i];
                    scratch.next_delta.push(back * (1.0 - a * a));
                }
                std::mem::swap(&mut scratch.delta, &mut scratch.next_delta);
            }
        }
        Ok(loss)
    }

    /// One plain gradient-descent step; returns the loss before the update.
    pub fn train_step(&mut self, x: &[f64], target: &[f64], learning_rate: f64) -> Result<f64> {
        let mut opt = Sgd::new(learning_rate, 0.0)?;
        opt.step(self, x, target)
    }

    /// Save in the `PCN1` format.
    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_to(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// The exact bytes `save` writes.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to memory");
        out
    }

    /// SHA-256 of the saved form, hex encoded.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        hex::encode(Sha256::digest(self.to_bytes()))
    }

    fn write_to(&self, w: &mut impl Write) -> std::io::Result<()> {
        w.write_all(MODEL_MAGIC)?;
        w.write_all(&MODEL_VERSION.to_le_bytes())?;
        w.write_all(&(self.sizes.len() as u32).to_le_bytes())?;
        for &n in &self.sizes {
            w.write_all(&(n as u32).to_le_bytes())?;
        }
        for &p in &self.params {
            w.write_all(&(p as f32).to_le_bytes())?;
        }
        for norm in [&self.input_norm, &self.output_norm] {
            for (m, s) in norm.mean.iter().zip(&norm.std) {
                w.write_all(&m.to_le_bytes())?;
                w.write_all(&s.to_le_bytes())?;
            }
        }
        w.write_all(META_TAG)?;
        match &self.meta {
            None => w.write_all(&[0u8])?,
            Some(m) => {
                w.write_all(&[1u8])?;
                for v in [m.h, m.time_step, m.rest_density, m.sound_speed, m.speed_cap] {
                    w.write_all(&v.to_le_bytes())?;
                }
                w.write_all(&m.bins.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = BufReader::new(file);
        let bad = |reason: String| Error::format(path, reason);
        let eof = |e: std::io::Error| Error::format(path, format!("truncated model file ({e})"));

        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(eof)?;
        if &magic != MODEL_MAGIC {
            return Err(bad(format!("bad magic {magic:?}, expected {MODEL_MAGIC:?}")));
        }
        let version = read_u32(&mut r).map_err(eof)?;
        if version != MODEL_VERSION {
            return Err(bad(format!(
                "model version {version} is not supported (expected {MODEL_VERSION})"
            )));
        }
        let count = read_u32(&mut r).map_err(eof)? as usize;
        if !(2..=64).contains(&count) {
            return Err(bad(format!("implausible layer count {count}")));
        }
        let mut sizes = Vec::with_capacity(count);
        for _ in 0..count {
            let n = read_u32(&mut r).map_err(eof)? as usize;
            if n == 0 || n > 1 << 16 {
                return Err(bad(format!("implausible layer size {n}")));
            }
            sizes.push(n);
        }
        let offsets = layer_offsets(&sizes);
        let total = *offsets.last().expect("non-empty");
        let mut params = Vec::with_capacity(total);
        for _ in 0..total {
            params.push(read_f32(&mut r).map_err(eof)? as f64);
        }
        let mut norms = Vec::new();
        for len in [sizes[0], sizes[count - 1]] {
            let mut norm = Normalization {
                mean: Vec::with_capacity(len),
                std: Vec::with_capacity(len),
            };
            for _ in 0..len {
                norm.mean.push(read_f64(&mut r).map_err(eof)?);
                norm.std.push(read_f64(&mut r).map_err(eof)?);
            }
            if norm.std.iter().any(|s| !(*s > 0.0)) {
                return Err(bad("normalization std must be positive".into()));
            }
            norms.push(norm);
        }
        r.read_exact(&mut magic).map_err(eof)?;
        if &magic != META_TAG {
            return Err(bad("missing metadata block".into()));
        }
        let mut flag = [0u8];
        r.read_exact(&mut flag).map_err(eof)?;
        let meta = match flag[0] {
            0 => None,
            1 => {
                let mut v = [0.0; 5];
                for slot in &mut v {
                    *slot = read_f64(&mut r).map_err(eof)?;
                }
                Some(ModelMeta {
                    h: v[0],
                    time_step: v[1],
                    rest_density: v[2],
                    sound_speed: v[3],
                    speed_cap: v[4],
                    bins: read_u32(&mut r).map_err(eof)?,
                })
            }
            f => return Err(bad(format!("bad metadata flag {f}"))),
        };
        let mut rest = Vec::new();
        r.read_to_end(&mut rest).map_err(|e| Error::io(path, e))?;
        if !rest.is_empty() {
            return Err(bad(format!("{} trailing bytes", rest.len())));
        }
        let output_norm = norms.pop().expect("two norms");
        let input_norm = norms.pop().expect("two norms");
        Ok(Self {
            sizes,
            params,
            offsets,
            input_norm,
            output_norm,
            meta,
        })
    }
}

fn read_u32(r: &mut impl Read) -> std::io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f32(r: &mut impl Read) -> std::io::Result<f32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(f32::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> std::io::Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

/// Stochastic gradient descent with optional classical momentum.
#[derive(Clone, Debug)]
pub struct Sgd {
    pub learning_rate: f64,
    pub momentum: f64,
    velocity: Vec<f64>,
    grad: Vec<f64>,
    scratch: Scratch,
}

impl Sgd {
    pub fn new(learning_rate: f64, momentum: f64) -> Result<Self> {
        if !(learning_rate >= 0.0 && learning_rate.is_finite()) {
            return Err(Error::invalid(format!(
                "learning rate must be >= 0, got {learning_rate}"
            )));
        }
        if !(0.0..1.0).contains(&momentum) {
            return Err(Error::invalid(format!("momentum must lie in [0, 1), got {momentum}")));
        }
        Ok(Self {
            learning_rate,
            momentum,
            velocity: Vec::new(),
            grad: Vec::new(),
            scratch: Scratch::default(),
        })
    }

    /// Update `net` on one sample; returns the loss before the update.
    pub fn step(&mut self, net: &mut Network, x: &[f64], target: &[f64]) -> Result<f64> {
        let loss = net.gradient(x, target, &mut self.scratch, &mut self.grad)?;
        if self.learning_rate == 0.0 {
            return Ok(loss);
        }
        if self.momentum == 0.0 {
            for (p, g) in net.params.iter_mut().zip(&self.grad) {
                *p -= self.learning_rate * g;
            }
        } else {
            self.velocity.resize(net.params.len(), 0.0);
            for ((p, g), v) in net.params.iter_mut().zip(&self.grad).zip(&mut self.velocity) {
                *v = self.momentum * *v - self.learning_rate * g;
                *p += *v;
            }
        }
        if let Some(index) = net.params.iter().position(|p| !p.is_finite()) {
            return Err(Error::NonFinite {
                kind: "network parameter",
                index,
            });
        }
        Ok(loss)
    }
}
