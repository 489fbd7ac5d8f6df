use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::Rng;

use crate::game::Features;

use super::NeuralError;

const MAGIC: &[u8; 8] = b"NFSPMLP1";

/// Anything that can be fed to the first layer. Binary game encodings only
/// touch the weight rows of their set bits.
pub trait NetInput {
    fn width(&self) -> usize;
    fn for_each_nonzero(&self, f: impl FnMut(usize, f64));
}

impl NetInput for Features {
    fn width(&self) -> usize {
        self.len()
    }

    fn for_each_nonzero(&self, mut f: impl FnMut(usize, f64)) {
        for i in self.ones() {
            f(i, 1.0);
        }
    }
}

impl NetInput for [f64] {
    fn width(&self) -> usize {
        self.len()
    }

    fn for_each_nonzero(&self, mut f: impl FnMut(usize, f64)) {
        for (i, &x) in self.iter().enumerate() {
            if x != 0.0 {
                f(i, x);
            }
        }
    }
}

impl NetInput for Vec<f64> {
    fn width(&self) -> usize {
        self.len()
    }

    fn for_each_nonzero(&self, f: impl FnMut(usize, f64)) {
        self.as_slice().for_each_nonzero(f)
    }
}

/// Fully connected layer; `w[i * outputs + j]` connects input i to output j.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Layer {
    pub(crate) inputs: usize,
    pub(crate) outputs: usize,
    pub(crate) w: Vec<f64>,
    pub(crate) b: Vec<f64>,
}

impl Layer {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Layer { inputs, outputs, w: vec![0.0; inputs * outputs], b: vec![0.0; outputs] }
    }
}

/// Multilayer perceptron with ReLU hidden layers and a linear output.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub(crate) layers: Vec<Layer>,
}

/// Scratch space for one forward/backward pass.
#[derive(Debug, Clone)]
pub struct Workspace {
    /// Output of every layer; hidden entries are post-ReLU.
    acts: Vec<Vec<f64>>,
    deltas: Vec<Vec<f64>>,
}

/// Parameter-shaped gradient accumulator.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub(crate) layers: Vec<Layer>,
}

impl Gradients {
    pub fn flat(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|l| l.w.iter().chain(&l.b).copied()).collect()
    }
}

impl Mlp {
    /// Parameters all zero. `sizes` lists input width, hidden widths and
    /// output width.
    pub fn zeros(sizes: &[usize]) -> Self {
        assert!(sizes.len() >= 2, "a network needs an input and an output width");
        assert!(sizes.iter().all(|&s| s > 0), "layer widths must be positive");
        Mlp { layers: sizes.windows(2).map(|w| Layer::zeros(w[0], w[1])).collect() }
    }

    /// Glorot-uniform weights, zero biases.
    pub fn new(sizes: &[usize], rng: &mut impl Rng) -> Self {
        let mut net = Mlp::zeros(sizes);
        for l in &mut net.layers {
            let bound = (6.0 / (l.inputs + l.outputs) as f64).sqrt();
            for w in &mut l.w {
                *w = rng.gen_range(-bound..bound);
            }
        }
        net
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![self.layers[0].inputs];
        s.extend(self.layers.iter().map(|l| l.outputs));
        s
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_width(&self) -> usize {
        self.layers.last().expect("at least one layer").outputs
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    /// Parameters in checkpoint order: per layer, weights then biases.
    pub fn params(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|l| l.w.iter().chain(&l.b).copied()).collect()
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<(), NeuralError> {
        if params.len() != self.num_params() {
            return Err(NeuralError::ShapeMismatch { expected: self.num_params(), got: params.len() });
        }
        let mut it = params.iter();
        for l in &mut self.layers {
            for v in l.w.iter_mut().chain(l.b.iter_mut()) {
                *v = *it.next().expect("length checked");
            }
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(|l| l.w.iter().chain(&l.b).all(|v| v.is_finite()))
    }

    pub fn workspace(&self) -> Workspace {
        Workspace {
            acts: self.layers.iter().map(|l| vec![0.0; l.outputs]).collect(),
            deltas: self.layers.iter().map(|l| vec![0.0; l.outputs]).collect(),
        }
    }

    pub fn zero_gradients(&self) -> Gradients {
        Gradients { layers: self.layers.iter().map(|l| Layer::zeros(l.inputs, l.outputs)).collect() }
    }

    /// Forward pass leaving every layer's output in `ws`; returns the
    /// network output.
    pub fn forward_with<'w, I: NetInput + ?Sized>(&self, x: &I, ws: &'w mut Workspace) -> &'w [f64] {
        debug_assert_eq!(x.width(), self.input_width());
        let last = self.layers.len() - 1;
        for (k, l) in self.layers.iter().enumerate() {
            let (done, rest) = ws.acts.split_at_mut(k);
            let out = &mut rest[0];
            out.copy_from_slice(&l.b);
            let mut add_row = |i: usize, xi: f64| {
                let row = &l.w[i * l.outputs..(i + 1) * l.outputs];
                for (o, w) in out.iter_mut().zip(row) {
                    *o += xi * w;
                }
            };
            if k == 0 {
                x.for_each_nonzero(&mut add_row);
            } else {
                for (i, &a) in done[k - 1].iter().enumerate() {
                    if a != 0.0 {
                        add_row(i, a);
                    }
                }
            }
            if k < last {
                for o in out.iter_mut() {
                    *o = o.max(0.0);
                }
            }
        }
        &ws.acts[last]
    }

    pub fn forward<I: NetInput + ?Sized>(&self, x: &I) -> Vec<f64> {
        let mut ws = self.workspace();
        self.forward_with(x, &mut ws).to_vec()
    }

    /// Forward pass over a batch, checking input widths.
    pub fn forward_batch(&self, xs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, NeuralError> {
        let mut ws = self.workspace();
        xs.iter()
            .map(|x| {
                if x.len() != self.input_width() {
                    return Err(NeuralError::ShapeMismatch { expected: self.input_width(), got: x.len() });
                }
                Ok(self.forward_with(x, &mut ws).to_vec())
            })
            .collect()
    }

    /// Accumulates into `grads` the gradient of a loss whose derivative with
    /// respect to the output is `d_out`, for the input `x` whose forward pass
    /// is still held in `ws`.
    pub fn backward<I: NetInput + ?Sized>(&self, x: &I, d_out: &[f64], ws: &mut Workspace, grads: &mut Gradients) {
        let last = self.layers.len() - 1;
        ws.deltas[last].copy_from_slice(d_out);
        for k in (0..=last).rev() {
            let l = &self.layers[k];
            let g = &mut grads.layers[k];
            let (below, here) = ws.deltas.split_at_mut(k);
            let delta = &here[0];
            for (gb, d) in g.b.iter_mut().zip(delta) {
                *gb += d;
            }
            if k == 0 {
                x.for_each_nonzero(|i, xi| {
                    let row = &mut g.w[i * l.outputs..(i + 1) * l.outputs];
                    for (gw, d) in row.iter_mut().zip(delta) {
                        *gw += xi * d;
                    }
                });
            } else {
                let input = &ws.acts[k - 1];
                let d_in = &mut below[k - 1];
                for (i, &a) in input.iter().enumerate() {
                    // ReLU: a zero activation passes no gradient back
                    if a == 0.0 {
                        d_in[i] = 0.0;
                        continue;
                    }
                    let row = &l.w[i * l.outputs..(i + 1) * l.outputs];
                    let grow = &mut g.w[i * l.outputs..(i + 1) * l.outputs];
                    let mut s = 0.0;
                    for ((gw, w), d) in grow.iter_mut().zip(row).zip(delta) {
                        *gw += a * d;
                        s += w * d;
                    }
                    d_in[i] = s;
                }
            }
        }
    }

    /// Plain SGD step `θ -= lr * g`.
    pub fn apply_gradients(&mut self, grads: &Gradients, learning_rate: f64) {
        for (l, g) in self.layers.iter_mut().zip(&grads.layers) {
            for (w, gw) in l.w.iter_mut().zip(&g.w) {
                *w -= learning_rate * gw;
            }
            for (b, gb) in l.b.iter_mut().zip(&g.b) {
                *b -= learning_rate * gb;
            }
        }
    }

    /// Binary checkpoint: the 8-byte magic `NFSPMLP1`, the number of layer
    /// widths and the widths as little-endian u32, then every parameter as a
    /// little-endian f64 in `params()` order.
    pub fn write_to(&self, out: &mut impl Write) -> std::io::Result<()> {
        out.write_all(MAGIC)?;
        let sizes = self.sizes();
        out.write_all(&(sizes.len() as u32).to_le_bytes())?;
        for s in sizes {
            out.write_all(&(s as u32).to_le_bytes())?;
        }
        for p in self.params() {
            out.write_all(&p.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from(input: &mut impl Read) -> Result<Self, NeuralError> {
        let bad = |m: &str| NeuralError::BadCheckpoint(m.to_string());
        let mut magic = [0u8; 8];
        input.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(bad("wrong magic bytes"));
        }
        let mut word = [0u8; 4];
        input.read_exact(&mut word)?;
        let count = u32::from_le_bytes(word) as usize;
        if !(2..=64).contains(&count) {
            return Err(bad("implausible layer count"));
        }
        let mut sizes = Vec::with_capacity(count);
        for _ in 0..count {
            input.read_exact(&mut word)?;
            let s = u32::from_le_bytes(word) as usize;
            if s == 0 || s > 1 << 20 {
                return Err(bad("implausible layer width"));
            }
            sizes.push(s);
        }
        let mut net = Mlp::zeros(&sizes);
        let mut params = vec![0.0; net.num_params()];
        let mut buf = [0u8; 8];
        for p in &mut params {
            input.read_exact(&mut buf)?;
            *p = f64::from_le_bytes(buf);
        }
        net.set_params(&params)?;
        let mut extra = [0u8; 1];
        if input.read(&mut extra)? != 0 {
            return Err(bad("trailing bytes"));
        }
        Ok(net)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), NeuralError> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, NeuralError> {
        Mlp::read_from(&mut BufReader::new(File::open(path)?))
    }
}
