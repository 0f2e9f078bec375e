//! Toy-scale numeric reference for the fusion network's forward math.
//!
//! Nothing here is trained. All weights come from a seeded generator so the
//! arithmetic (pooling head, MLP-scored cross-attention, residual layer norm,
//! causal decoding, loss and its subgradient) can be checked against
//! independent scalar oracles at small dimensions.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{farthest_point_sample, PointCloud};
use crate::types::{OrientationVec, Trajectory};

/// Position-loss weight.
pub const LOSS_ALPHA: f64 = 0.63;
/// Orientation-loss weight.
pub const LOSS_BETA: f64 = 0.37;

/// Pyramid bin counts of the pooling head.
pub const PYRAMID_SCALES: [usize; 4] = [1, 2, 3, 6];

/// `H × W × C` feature map, channel-last.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureGrid {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f64>,
}

impl FeatureGrid {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 || channels == 0 {
            return Err(Error::invalid("feature grid dimensions must be positive"));
        }
        if data.len() != height * width * channels {
            return Err(Error::shape(format!(
                "grid data has {} entries, expected {height}x{width}x{channels}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("feature grid entries must be finite"));
        }
        Ok(FeatureGrid {
            height,
            width,
            channels,
            data,
        })
    }

    pub fn seeded(height: usize, width: usize, channels: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..height * width * channels)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        FeatureGrid::new(height, width, channels, data)
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.height, self.width, self.channels)
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.width + j) * self.channels + k]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureRole {
    Rgb,
    Depth,
    Fused,
}

/// `N × d` token features.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    rows: DMatrix<f64>,
    role: FeatureRole,
}

impl FeatureSet {
    pub fn new(rows: DMatrix<f64>, role: FeatureRole) -> Result<Self> {
        if rows.nrows() == 0 || rows.ncols() == 0 {
            return Err(Error::invalid("feature set must have at least one row and column"));
        }
        if rows.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("feature entries must be finite"));
        }
        Ok(FeatureSet { rows, role })
    }

    pub fn seeded(n: usize, d: usize, role: FeatureRole, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        FeatureSet::new(DMatrix::from_fn(n, d, |_, _| rng.random_range(-1.0..1.0)), role)
    }

    pub fn rows(&self) -> &DMatrix<f64> {
        &self.rows
    }

    pub fn role(&self) -> FeatureRole {
        self.role
    }

    pub fn len(&self) -> usize {
        self.rows.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.rows.ncols()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Tanh => x.tanh(),
            Activation::Identity => x,
        }
    }
}

/// Fully connected layer, `y = W x + b` with `W` of shape `out × in`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weight: DMatrix<f64>,
    pub bias: DVector<f64>,
}

impl Dense {
    pub fn new(weight: DMatrix<f64>, bias: DVector<f64>) -> Result<Self> {
        if weight.nrows() != bias.len() {
            return Err(Error::shape(format!(
                "layer weight has {} rows but bias has {} entries",
                weight.nrows(),
                bias.len()
            )));
        }
        Ok(Dense { weight, bias })
    }

    /// Uniform `±1/√fan_in` initialization.
    pub fn seeded(input: usize, output: usize, rng: &mut impl Rng) -> Self {
        let bound = 1.0 / (input as f64).sqrt();
        Dense {
            weight: DMatrix::from_fn(output, input, |_, _| rng.random_range(-bound..bound)),
            bias: DVector::from_fn(output, |_, _| rng.random_range(-bound..bound)),
        }
    }

    pub fn input_width(&self) -> usize {
        self.weight.ncols()
    }

    pub fn output_width(&self) -> usize {
        self.weight.nrows()
    }
}

/// Multi-layer perceptron; the activation follows every layer but the last.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpSpec {
    layers: Vec<Dense>,
    activation: Activation,
}

impl MlpSpec {
    pub fn new(layers: Vec<Dense>, activation: Activation) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::invalid("MLP needs at least one layer"));
        }
        for pair in layers.windows(2) {
            if pair[0].output_width() != pair[1].input_width() {
                return Err(Error::shape(format!(
                    "layer widths {} -> {} are inconsistent",
                    pair[0].output_width(),
                    pair[1].input_width()
                )));
            }
        }
        Ok(MlpSpec { layers, activation })
    }

    /// Seeded MLP over the given widths, e.g. `[in, hidden, out]`.
    pub fn seeded(widths: &[usize], activation: Activation, rng: &mut impl Rng) -> Result<Self> {
        if widths.len() < 2 || widths.contains(&0) {
            return Err(Error::invalid("MLP widths must list at least two positive sizes"));
        }
        let layers = widths.windows(2).map(|w| Dense::seeded(w[0], w[1], rng)).collect();
        MlpSpec::new(layers, activation)
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].input_width()
    }

    pub fn output_width(&self) -> usize {
        self.layers[self.layers.len() - 1].output_width()
    }

    pub fn forward(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.input_width() {
            return Err(Error::shape(format!(
                "MLP expects input width {}, got {}",
                self.input_width(),
                x.len()
            )));
        }
        let last = self.layers.len() - 1;
        let mut h = x.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            h = &layer.weight * h + &layer.bias;
            if i < last {
                h.apply(|v| *v = self.activation.apply(*v));
            }
        }
        Ok(h)
    }
}

/// Adaptive average pooling of every channel into `s × s` bins for each scale,
/// concatenated in scale order, bins row-major, channels innermost.
///
/// Bin `i` along an axis of length `n` covers `[⌊i·n/s⌋, ⌈(i+1)·n/s⌉)`.
pub fn pyramid_pool(grid: &FeatureGrid, scales: &[usize]) -> Result<Vec<f64>> {
    let (h, w, c) = grid.dims();
    let mut out = Vec::with_capacity(scales.iter().map(|s| s * s * c).sum());
    for &s in scales {
        if s == 0 || s > h.min(w) {
            return Err(Error::invalid(format!("pool scale {s} does not fit a {h}x{w} grid")));
        }
        for bi in 0..s {
            let (r0, r1) = (bi * h / s, ((bi + 1) * h).div_ceil(s));
            for bj in 0..s {
                let (c0, c1) = (bj * w / s, ((bj + 1) * w).div_ceil(s));
                let count = ((r1 - r0) * (c1 - c0)) as f64;
                for k in 0..c {
                    let mut sum = 0.0;
                    for i in r0..r1 {
                        for j in c0..c1 {
                            sum += grid.get(i, j, k);
                        }
                    }
                    out.push(sum / count);
                }
            }
        }
    }
    Ok(out)
}

/// Pyramid-pooled descriptor projected through an MLP into the embedding space.
pub fn fap_head(grid: &FeatureGrid, scales: &[usize], mlp: &MlpSpec) -> Result<DVector<f64>> {
    let pooled = pyramid_pool(grid, scales)?;
    if pooled.len() != mlp.input_width() {
        return Err(Error::shape(format!(
            "pooled descriptor has {} entries but the MLP expects {}",
            pooled.len(),
            mlp.input_width()
        )));
    }
    mlp.forward(&DVector::from_vec(pooled))
}

/// Row-wise softmax with per-row max subtraction. `-∞` entries get weight 0.
pub fn softmax_rows(scores: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = scores.clone();
    for mut row in out.row_iter_mut() {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttentionOutput {
    /// `N × M`, row-stochastic.
    pub attention: DMatrix<f64>,
    /// `A · V`, `N × d`.
    pub cross: DMatrix<f64>,
}

/// Projection weights plus the learned correlation MLP `φ: ℝ^{2d} → ℝ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossAttentionWeights {
    pub w_q: DMatrix<f64>,
    pub w_k: DMatrix<f64>,
    pub w_v: DMatrix<f64>,
    pub phi: MlpSpec,
}

impl CrossAttentionWeights {
    /// `φ` is a two-layer tanh MLP with hidden width `2d` and scalar output.
    pub fn seeded(d_depth: usize, d_rgb: usize, d: usize, rng: &mut impl Rng) -> Result<Self> {
        let mut proj = |rows: usize| {
            let bound = 1.0 / (rows as f64).sqrt();
            DMatrix::from_fn(rows, d, |_, _| rng.random_range(-bound..bound))
        };
        let (w_q, w_k, w_v) = (proj(d_depth), proj(d_rgb), proj(d_rgb));
        let phi = MlpSpec::seeded(&[2 * d, 2 * d, 1], Activation::Tanh, rng)?;
        Ok(CrossAttentionWeights { w_q, w_k, w_v, phi })
    }
}

/// Raw correlation scores `φ(Q_i, K_j)` for every query/key pair.
pub fn correlation_scores(q: &DMatrix<f64>, k: &DMatrix<f64>, phi: &MlpSpec) -> Result<DMatrix<f64>> {
    let d = q.ncols();
    if k.ncols() != d {
        return Err(Error::shape("queries and keys must share a width"));
    }
    if phi.input_width() != 2 * d || phi.output_width() != 1 {
        return Err(Error::shape(format!(
            "φ must map {} inputs to 1 output, has {} -> {}",
            2 * d,
            phi.input_width(),
            phi.output_width()
        )));
    }
    let mut scores = DMatrix::zeros(q.nrows(), k.nrows());
    let mut pair = DVector::zeros(2 * d);
    for i in 0..q.nrows() {
        pair.rows_mut(0, d).copy_from(&q.row(i).transpose());
        for j in 0..k.nrows() {
            pair.rows_mut(d, d).copy_from(&k.row(j).transpose());
            scores[(i, j)] = phi.forward(&pair)?[0];
        }
    }
    Ok(scores)
}

/// Depth tokens query RGB tokens: `A = softmax(φ(Q, K))`, output `A V`.
pub fn cross_attention(fd: &FeatureSet, fr: &FeatureSet, weights: &CrossAttentionWeights) -> Result<AttentionOutput> {
    let CrossAttentionWeights { w_q, w_k, w_v, phi } = weights;
    if fd.dim() != w_q.nrows() || fr.dim() != w_k.nrows() || fr.dim() != w_v.nrows() {
        return Err(Error::shape(format!(
            "projection inputs ({}, {}, {}) do not match feature widths (depth {}, rgb {})",
            w_q.nrows(),
            w_k.nrows(),
            w_v.nrows(),
            fd.dim(),
            fr.dim()
        )));
    }
    if w_q.ncols() != w_k.ncols() || w_k.ncols() != w_v.ncols() {
        return Err(Error::shape("projections must share an output width"));
    }
    let q = fd.rows() * w_q;
    let k = fr.rows() * w_k;
    let v = fr.rows() * w_v;
    let attention = softmax_rows(&correlation_scores(&q, &k, phi)?);
    let cross = &attention * v;
    Ok(AttentionOutput { attention, cross })
}

fn layer_norm_row_inplace(row: &mut [f64], eps: f64) {
    let n = row.len() as f64;
    let mean = row.iter().sum::<f64>() / n;
    let var = row.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let denom = (var + eps).sqrt();
    for x in row.iter_mut() {
        *x = (*x - mean) / denom;
    }
}

fn layer_norm_rows(m: &mut DMatrix<f64>, eps: f64) {
    let mut buf = vec![0.0; m.ncols()];
    for i in 0..m.nrows() {
        for (j, b) in buf.iter_mut().enumerate() {
            *b = m[(i, j)];
        }
        layer_norm_row_inplace(&mut buf, eps);
        for (j, b) in buf.iter().enumerate() {
            m[(i, j)] = *b;
        }
    }
}

/// `LN(F_R + F_cross)` with per-row normalization and no affine parameters.
pub fn residual_layernorm(fr: &FeatureSet, fcross: &DMatrix<f64>, eps: f64) -> Result<FeatureSet> {
    if fr.rows().shape() != fcross.shape() {
        return Err(Error::shape(format!(
            "residual shapes differ: {:?} vs {:?}",
            fr.rows().shape(),
            fcross.shape()
        )));
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::invalid("layer-norm eps must be positive"));
    }
    let mut sum = fr.rows() + fcross;
    layer_norm_rows(&mut sum, eps);
    FeatureSet::new(sum, FeatureRole::Fused)
}

/// Fixed sinusoidal positional table, `T × d`.
pub fn sinusoidal_positions(steps: usize, d: usize) -> DMatrix<f64> {
    DMatrix::from_fn(steps, d, |t, i| {
        let freq = 1.0 / 10_000f64.powf((2 * (i / 2)) as f64 / d as f64);
        let angle = t as f64 * freq;
        if i % 2 == 0 {
            angle.sin()
        } else {
            angle.cos()
        }
    })
}

/// Additive causal mask: `0` on and below the diagonal, `-∞` above.
pub fn causal_mask(steps: usize) -> DMatrix<f64> {
    DMatrix::from_fn(steps, steps, |i, j| if j <= i { 0.0 } else { f64::NEG_INFINITY })
}

/// `a · b` with each output entry a left-to-right dot product, so a row's
/// value never depends on how many other rows are present.
fn row_matmul(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    debug_assert_eq!(a.ncols(), b.nrows());
    DMatrix::from_fn(a.nrows(), b.ncols(), |i, j| {
        let mut acc = 0.0;
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, j)];
        }
        acc
    })
}

fn scaled_dot_attention(
    q: &DMatrix<f64>,
    k: &DMatrix<f64>,
    v: &DMatrix<f64>,
    mask: Option<&DMatrix<f64>>,
) -> DMatrix<f64> {
    let scale = 1.0 / (q.ncols() as f64).sqrt();
    let mut scores = row_matmul(q, &k.transpose()) * scale;
    if let Some(mask) = mask {
        scores += mask;
    }
    row_matmul(&softmax_rows(&scores), v)
}

/// Single-block, single-head decoder: masked self-attention, cross-attention
/// onto the fused context, and a ReLU feed-forward block, each with a
/// residual connection and layer norm.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderWeights {
    pub start_token: [f64; 2],
    pub embed: Dense,
    pub self_q: DMatrix<f64>,
    pub self_k: DMatrix<f64>,
    pub self_v: DMatrix<f64>,
    pub self_o: DMatrix<f64>,
    pub cross_q: DMatrix<f64>,
    pub cross_k: DMatrix<f64>,
    pub cross_v: DMatrix<f64>,
    pub cross_o: DMatrix<f64>,
    pub ffn_in: Dense,
    pub ffn_out: Dense,
    pub head: Dense,
    pub ln_eps: f64,
}

impl DecoderWeights {
    pub fn seeded(d: usize, hidden: usize, ln_eps: f64, rng: &mut impl Rng) -> Self {
        let bound = 1.0 / (d as f64).sqrt();
        let mut square = || DMatrix::from_fn(d, d, |_, _| rng.random_range(-bound..bound));
        let (self_q, self_k, self_v, self_o) = (square(), square(), square(), square());
        let (cross_q, cross_k, cross_v, cross_o) = (square(), square(), square(), square());
        DecoderWeights {
            start_token: [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)],
            embed: Dense::seeded(2, d, rng),
            self_q,
            self_k,
            self_v,
            self_o,
            cross_q,
            cross_k,
            cross_v,
            cross_o,
            ffn_in: Dense::seeded(d, hidden, rng),
            ffn_out: Dense::seeded(hidden, d, rng),
            head: Dense::seeded(d, 2, rng),
            ln_eps,
        }
    }

    pub fn model_width(&self) -> usize {
        self.embed.output_width()
    }

    fn dense_rows(x: &DMatrix<f64>, layer: &Dense) -> DMatrix<f64> {
        let mut y = row_matmul(x, &layer.weight.transpose());
        for mut row in y.row_iter_mut() {
            row += layer.bias.transpose();
        }
        y
    }

    /// Decode a full input-token sequence in one causally masked pass,
    /// returning one raw 2-vector per position.
    pub fn forward(&self, tokens: &[[f64; 2]], context: &FeatureSet) -> Result<DMatrix<f64>> {
        let d = self.model_width();
        if tokens.is_empty() {
            return Err(Error::invalid("decoder needs at least one input token"));
        }
        if context.dim() != d {
            return Err(Error::shape(format!(
                "context width {} does not match decoder width {d}",
                context.dim()
            )));
        }
        let steps = tokens.len();
        let input = DMatrix::from_fn(steps, 2, |t, i| tokens[t][i]);
        let mut h = Self::dense_rows(&input, &self.embed) + sinusoidal_positions(steps, d);

        let mask = causal_mask(steps);
        let attn = scaled_dot_attention(
            &row_matmul(&h, &self.self_q),
            &row_matmul(&h, &self.self_k),
            &row_matmul(&h, &self.self_v),
            Some(&mask),
        );
        h += row_matmul(&attn, &self.self_o);
        layer_norm_rows(&mut h, self.ln_eps);

        let ctx = context.rows();
        let attn = scaled_dot_attention(
            &row_matmul(&h, &self.cross_q),
            &row_matmul(ctx, &self.cross_k),
            &row_matmul(ctx, &self.cross_v),
            None,
        );
        h += row_matmul(&attn, &self.cross_o);
        layer_norm_rows(&mut h, self.ln_eps);

        let mut ffn = Self::dense_rows(&h, &self.ffn_in);
        ffn.apply(|v| *v = v.max(0.0));
        h += Self::dense_rows(&ffn, &self.ffn_out);
        layer_norm_rows(&mut h, self.ln_eps);

        Ok(Self::dense_rows(&h, &self.head))
    }
}

/// Autoregressive decoder state: the outputs generated so far.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderState {
    pub start_token: [f64; 2],
    pub prefix: Vec<[f64; 2]>,
}

impl DecoderState {
    pub fn new(start_token: [f64; 2]) -> Self {
        DecoderState {
            start_token,
            prefix: Vec::new(),
        }
    }

    /// 1-based index of the step about to be generated.
    pub fn step(&self) -> usize {
        self.prefix.len() + 1
    }

    /// Input queries: the start token followed by every previous output.
    pub fn queries(&self) -> Vec<[f64; 2]> {
        std::iter::once(self.start_token)
            .chain(self.prefix.iter().copied())
            .collect()
    }
}

fn check_context(context: &FeatureSet) -> Result<()> {
    if context.role() != FeatureRole::Fused {
        return Err(Error::invalid("decoder context must be the fused feature set"));
    }
    if context.is_empty() {
        return Err(Error::invalid("decoder context is empty"));
    }
    Ok(())
}

/// Raw decoder output at `state.step()`.
pub fn decode_step(state: &DecoderState, context: &FeatureSet, weights: &DecoderWeights) -> Result<[f64; 2]> {
    check_context(context)?;
    let out = weights.forward(&state.queries(), context)?;
    let last = out.nrows() - 1;
    Ok([out[(last, 0)], out[(last, 1)]])
}

/// Teacher-forced decoding: the queries are the start token followed by
/// `targets[..T-1]`, all positions evaluated in one masked pass.
pub fn decode_teacher_forced(
    targets: &[[f64; 2]],
    context: &FeatureSet,
    weights: &DecoderWeights,
) -> Result<Vec<[f64; 2]>> {
    check_context(context)?;
    if targets.is_empty() {
        return Err(Error::invalid("teacher forcing needs at least one target"));
    }
    let queries: Vec<[f64; 2]> = std::iter::once(weights.start_token)
        .chain(targets[..targets.len() - 1].iter().copied())
        .collect();
    let out = weights.forward(&queries, context)?;
    Ok((0..out.nrows()).map(|t| [out[(t, 0)], out[(t, 1)]]).collect())
}

/// Independent position and orientation decoders over a shared context.
#[derive(Debug, Clone, PartialEq)]
pub struct DualDecoder {
    pub position: DecoderWeights,
    pub orientation: DecoderWeights,
}

impl DualDecoder {
    pub fn seeded(d: usize, hidden: usize, ln_eps: f64, rng: &mut impl Rng) -> Self {
        DualDecoder {
            position: DecoderWeights::seeded(d, hidden, ln_eps, rng),
            orientation: DecoderWeights::seeded(d, hidden, ln_eps, rng),
        }
    }
}

/// Generate `steps` positions and unit orientations autoregressively. The
/// orientation decoder feeds back its normalized outputs.
pub fn decode_trajectory(context: &FeatureSet, steps: usize, decoders: &DualDecoder) -> Result<Trajectory> {
    if steps == 0 {
        return Err(Error::invalid("trajectory length must be at least 1"));
    }
    check_context(context)?;
    let mut pos_state = DecoderState::new(decoders.position.start_token);
    let mut ori_state = DecoderState::new(decoders.orientation.start_token);
    let mut orientations = Vec::with_capacity(steps);
    for _ in 0..steps {
        let p = decode_step(&pos_state, context, &decoders.position)?;
        pos_state.prefix.push(p);
        let raw = decode_step(&ori_state, context, &decoders.orientation)?;
        let o = OrientationVec::from_raw(raw[0], raw[1]);
        orientations.push(o);
        ori_state.prefix.push([o.c, o.s]);
    }
    Trajectory::new(pos_state.prefix, orientations)
}

fn check_loss_inputs(pred: &Trajectory, gt: &Trajectory, alpha: f64, beta: f64) -> Result<()> {
    if pred.len() != gt.len() {
        return Err(Error::shape(format!(
            "prediction has {} points, ground truth {}",
            pred.len(),
            gt.len()
        )));
    }
    if !(alpha >= 0.0 && beta >= 0.0) {
        return Err(Error::invalid("loss weights must be non-negative"));
    }
    Ok(())
}

/// `α·mean‖p − p̂‖₁ + β·mean‖o − ô‖₁`.
pub fn docking_loss(pred: &Trajectory, gt: &Trajectory, alpha: f64, beta: f64) -> Result<f64> {
    check_loss_inputs(pred, gt, alpha, beta)?;
    let n = gt.len() as f64;
    let pos: f64 = pred
        .positions()
        .iter()
        .zip(gt.positions())
        .map(|(a, b)| (a[0] - b[0]).abs() + (a[1] - b[1]).abs())
        .sum();
    let ori: f64 = pred
        .orientations()
        .iter()
        .zip(gt.orientations())
        .map(|(a, b)| (a.c - b.c).abs() + (a.s - b.s).abs())
        .sum();
    Ok(alpha * pos / n + beta * ori / n)
}

/// Subgradient of [`docking_loss`] with respect to the predicted positions and
/// the (unnormalized) predicted orientation components. `sign(0)` is taken as 0.
#[allow(clippy::type_complexity)]
pub fn docking_loss_grad(
    pred: &Trajectory,
    gt: &Trajectory,
    alpha: f64,
    beta: f64,
) -> Result<(Vec<[f64; 2]>, Vec<[f64; 2]>)> {
    check_loss_inputs(pred, gt, alpha, beta)?;
    let n = gt.len() as f64;
    let sign = |x: f64| {
        if x > 0.0 {
            1.0
        } else if x < 0.0 {
            -1.0
        } else {
            0.0
        }
    };
    let dp = pred
        .positions()
        .iter()
        .zip(gt.positions())
        .map(|(a, b)| [alpha / n * sign(a[0] - b[0]), alpha / n * sign(a[1] - b[1])])
        .collect();
    let dor = pred
        .orientations()
        .iter()
        .zip(gt.orientations())
        .map(|(a, b)| [beta / n * sign(a.c - b.c), beta / n * sign(a.s - b.s)])
        .collect();
    Ok((dp, dor))
}

/// Central-difference gradient estimate.
pub fn finite_diff_gradient<F>(mut f: F, point: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> f64,
{
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::invalid("finite-difference step must be positive"));
    }
    let mut x = point.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let orig = x[i];
        x[i] = orig + h;
        let fp = f(&x);
        x[i] = orig - h;
        let fm = f(&x);
        x[i] = orig;
        if !fp.is_finite() || !fm.is_finite() {
            return Err(Error::invalid(format!("function is not finite near coordinate {i}")));
        }
        grad.push((fp - fm) / (2.0 * h));
    }
    Ok(grad)
}

/// Opaque learned encoders are replaced by deterministic stubs behind this trait.
pub trait FeatureExtractor<I: ?Sized> {
    fn extract(&self, input: &I) -> Result<FeatureSet>;
}

/// Depth-branch stand-in: farthest-point sample `tokens` points, then a seeded
/// `tanh(W·xyz + b)` lift to width `d`.
#[derive(Debug, Clone)]
pub struct PointTokenStub {
    pub tokens: usize,
    pub lift: Dense,
}

impl PointTokenStub {
    pub fn seeded(tokens: usize, d: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        PointTokenStub {
            tokens,
            lift: Dense::seeded(3, d, &mut rng),
        }
    }
}

impl FeatureExtractor<PointCloud> for PointTokenStub {
    fn extract(&self, cloud: &PointCloud) -> Result<FeatureSet> {
        if cloud.is_empty() {
            return Err(Error::invalid("cannot encode an empty point cloud"));
        }
        let m = self.tokens.min(cloud.len());
        let sampled = farthest_point_sample(cloud, m)?;
        let d = self.lift.output_width();
        let rows = DMatrix::from_fn(self.tokens, d, |i, j| {
            let p = sampled.points[i % m];
            let w = self.lift.weight.row(j);
            (w[0] * p.x + w[1] * p.y + w[2] * p.z + self.lift.bias[j]).tanh()
        });
        FeatureSet::new(rows, FeatureRole::Depth)
    }
}

/// RGB-branch stand-in: average-pool the grid into `side × side` bins and lift
/// each bin's channel vector to width `d`.
#[derive(Debug, Clone)]
pub struct GridTokenStub {
    pub side: usize,
    pub lift: Dense,
}

impl GridTokenStub {
    pub fn seeded(side: usize, channels: usize, d: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        GridTokenStub {
            side,
            lift: Dense::seeded(channels, d, &mut rng),
        }
    }
}

impl FeatureExtractor<FeatureGrid> for GridTokenStub {
    fn extract(&self, grid: &FeatureGrid) -> Result<FeatureSet> {
        let c = grid.dims().2;
        if c != self.lift.input_width() {
            return Err(Error::shape("grid channel count does not match the token lift"));
        }
        let pooled = pyramid_pool(grid, &[self.side])?;
        let bins = self.side * self.side;
        let mut rows = DMatrix::zeros(bins, self.lift.output_width());
        for b in 0..bins {
            let x = DVector::from_row_slice(&pooled[b * c..(b + 1) * c]);
            let y = &self.lift.weight * x + &self.lift.bias;
            rows.row_mut(b).copy_from(&y.transpose());
        }
        FeatureSet::new(rows, FeatureRole::Rgb)
    }
}

/// Toy dimensions and seed for a fully seeded network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetConfig {
    pub seed: u64,
    pub grid_height: usize,
    pub grid_width: usize,
    pub grid_channels: usize,
    pub tokens: usize,
    pub model_width: usize,
    pub steps: usize,
    pub ffn_hidden: usize,
    pub embedding_width: usize,
    pub ln_eps: f64,
}

impl Default for NetConfig {
    fn default() -> Self {
        NetConfig {
            seed: 7,
            grid_height: 8,
            grid_width: 8,
            grid_channels: 4,
            tokens: 16,
            model_width: 32,
            steps: 8,
            ffn_hidden: 64,
            embedding_width: 32,
            ln_eps: 1e-5,
        }
    }
}

/// Every weight of the toy network, drawn from one seeded stream.
#[derive(Debug, Clone)]
pub struct NetModel {
    pub config: NetConfig,
    pub fap: MlpSpec,
    pub attention: CrossAttentionWeights,
    pub decoders: DualDecoder,
}

impl NetModel {
    pub fn seeded(config: &NetConfig) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let scales: Vec<usize> = PYRAMID_SCALES
            .iter()
            .copied()
            .filter(|&s| s <= config.grid_height.min(config.grid_width))
            .collect();
        let pooled: usize = scales.iter().map(|s| s * s * config.grid_channels).sum();
        let d = config.model_width;
        Ok(NetModel {
            config: config.clone(),
            fap: MlpSpec::seeded(
                &[pooled, config.embedding_width, config.embedding_width],
                Activation::Relu,
                &mut rng,
            )?,
            attention: CrossAttentionWeights::seeded(d, d, d, &mut rng)?,
            decoders: DualDecoder::seeded(d, config.ffn_hidden, config.ln_eps, &mut rng),
        })
    }

    pub fn scales(&self) -> Vec<usize> {
        PYRAMID_SCALES
            .iter()
            .copied()
            .filter(|&s| s <= self.config.grid_height.min(self.config.grid_width))
            .collect()
    }

    /// Fuse depth and RGB tokens and decode a trajectory.
    pub fn forward(&self, depth: &FeatureSet, rgb: &FeatureSet) -> Result<Trajectory> {
        let att = cross_attention(depth, rgb, &self.attention)?;
        let fused = residual_layernorm(rgb, &att.cross, self.config.ln_eps)?;
        decode_trajectory(&fused, self.config.steps, &self.decoders)
    }
}
