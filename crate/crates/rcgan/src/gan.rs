//! Bidirectional adversarial model with cycle consistency and a penalty
//! distribution.
//!
//! Four networks share the stage: an encoder E: x -> z, a generator
//! G: z -> x, a joint discriminator D_xz over (x, z) pairs, and a cycle
//! discriminator D_xx over (x, x') pairs. Discriminator losses are the
//! negated adversarial values; encoder/generator losses use the
//! non-saturating swap on generated terms. The penalty distribution
//! contributes an extra fake term to the D_xz loss only: penalty samples are
//! adversarial negatives for the discriminator, never a training signal for
//! E or G.
//!
//! Every loss function returns the exact gradient for all four networks so
//! the whole stack is finite-difference checkable; the training step then
//! applies only the sub-gradients that belong to the phase (discriminators
//! in the disc phase, encoder+generator in the gen phase).

use std::io::Write as IoWrite;
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dist::DistSpec;
use crate::error::{Error, Result};
use crate::nn::{Activation, AdamParams, AdamState, DenseNet, Gradients};
use crate::seeds::{stream_rng, streams};
use crate::tensor::Tensor;

/// Default hidden widths for the 2-D experiments.
pub const DEFAULT_HIDDEN: [usize; 2] = [64, 64];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrainMode {
    /// Full objective: adversarial + cycle + penalty negatives.
    Rcgan,
    /// Ablation: same objective without the penalty term.
    NoPenalty,
    /// Adversarially learned inference with cycle consistency; coincides
    /// with `NoPenalty` (the objective is identical) and exists as a named
    /// baseline.
    AliceBaseline,
}

impl TrainMode {
    pub fn uses_penalty(self) -> bool {
        matches!(self, TrainMode::Rcgan)
    }

    pub fn parse(s: &str) -> Result<TrainMode> {
        match s {
            "rcgan" => Ok(TrainMode::Rcgan),
            "no-penalty" => Ok(TrainMode::NoPenalty),
            "alice-baseline" => Ok(TrainMode::AliceBaseline),
            other => Err(Error::Config(format!(
                "unknown mode {other:?} (expected rcgan, no-penalty, alice-baseline)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TrainMode::Rcgan => "rcgan",
            TrainMode::NoPenalty => "no-penalty",
            TrainMode::AliceBaseline => "alice-baseline",
        }
    }
}

/// The four networks plus the latent and penalty distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelRepr")]
pub struct RCGANModel {
    encoder: DenseNet,
    generator: DenseNet,
    disc_xz: DenseNet,
    disc_xx: DenseNet,
    latent: DistSpec,
    penalty: DistSpec,
}

#[derive(Deserialize)]
struct ModelRepr {
    encoder: DenseNet,
    generator: DenseNet,
    disc_xz: DenseNet,
    disc_xx: DenseNet,
    latent: DistSpec,
    penalty: DistSpec,
}

impl TryFrom<ModelRepr> for RCGANModel {
    type Error = String;

    fn try_from(r: ModelRepr) -> std::result::Result<Self, String> {
        RCGANModel::new(r.encoder, r.generator, r.disc_xz, r.disc_xx, r.latent, r.penalty)
            .map_err(|e| e.to_string())
    }
}

impl RCGANModel {
    /// Validates the dimension contract: E: x->z, G: z->x,
    /// D_xz: (x,z)->1, D_xx: (x,x)->1; discriminators end in sigmoid,
    /// encoder and generator contain none; the latent spec matches z and the
    /// penalty spec matches x.
    pub fn new(
        encoder: DenseNet,
        generator: DenseNet,
        disc_xz: DenseNet,
        disc_xx: DenseNet,
        latent: DistSpec,
        penalty: DistSpec,
    ) -> Result<RCGANModel> {
        latent.validate()?;
        penalty.validate()?;
        let x_dim = encoder.in_dim();
        let z_dim = encoder.out_dim();
        let fail = |msg: String| Err(Error::Shape(msg));
        if generator.in_dim() != z_dim || generator.out_dim() != x_dim {
            return fail(format!(
                "generator maps {}->{}, expected {z_dim}->{x_dim}",
                generator.in_dim(),
                generator.out_dim()
            ));
        }
        if disc_xz.in_dim() != x_dim + z_dim || disc_xz.out_dim() != 1 {
            return fail(format!(
                "joint discriminator maps {}->{}, expected {}->1",
                disc_xz.in_dim(),
                disc_xz.out_dim(),
                x_dim + z_dim
            ));
        }
        if disc_xx.in_dim() != 2 * x_dim || disc_xx.out_dim() != 1 {
            return fail(format!(
                "cycle discriminator maps {}->{}, expected {}->1",
                disc_xx.in_dim(),
                disc_xx.out_dim(),
                2 * x_dim
            ));
        }
        if encoder.has_sigmoid() || generator.has_sigmoid() {
            return fail("encoder/generator must not contain sigmoid layers".into());
        }
        if disc_xz.final_activation() != Activation::Sigmoid
            || disc_xx.final_activation() != Activation::Sigmoid
        {
            return fail("discriminators must end with a sigmoid layer".into());
        }
        if latent.dim() != z_dim {
            return fail(format!(
                "latent spec dim {} != encoder output {z_dim}",
                latent.dim()
            ));
        }
        if penalty.dim() != x_dim {
            return fail(format!(
                "penalty spec dim {} != data dim {x_dim}",
                penalty.dim()
            ));
        }
        Ok(RCGANModel {
            encoder,
            generator,
            disc_xz,
            disc_xx,
            latent,
            penalty,
        })
    }

    /// Standard architecture: leaky-relu(0.2) hidden layers of the given
    /// widths for all four networks, identity outputs for E/G, sigmoid
    /// outputs for the discriminators.
    pub fn with_mlps<R: Rng>(
        x_dim: usize,
        hidden: &[usize],
        latent: DistSpec,
        penalty: DistSpec,
        rng: &mut R,
    ) -> Result<RCGANModel> {
        let z_dim = latent.dim();
        let dims = |i: usize, o: usize| -> Vec<usize> {
            let mut d = vec![i];
            d.extend_from_slice(hidden);
            d.push(o);
            d
        };
        let act = Activation::LeakyRelu(0.2);
        let encoder = DenseNet::mlp(&dims(x_dim, z_dim), act, Activation::Identity, rng)?;
        let generator = DenseNet::mlp(&dims(z_dim, x_dim), act, Activation::Identity, rng)?;
        let disc_xz = DenseNet::mlp(&dims(x_dim + z_dim, 1), act, Activation::Sigmoid, rng)?;
        let disc_xx = DenseNet::mlp(&dims(2 * x_dim, 1), act, Activation::Sigmoid, rng)?;
        RCGANModel::new(encoder, generator, disc_xz, disc_xx, latent, penalty)
    }

    pub fn x_dim(&self) -> usize {
        self.encoder.in_dim()
    }

    pub fn z_dim(&self) -> usize {
        self.encoder.out_dim()
    }

    pub fn encoder(&self) -> &DenseNet {
        &self.encoder
    }

    pub fn generator(&self) -> &DenseNet {
        &self.generator
    }

    pub fn disc_xz(&self) -> &DenseNet {
        &self.disc_xz
    }

    pub fn disc_xx(&self) -> &DenseNet {
        &self.disc_xx
    }

    pub fn latent(&self) -> &DistSpec {
        &self.latent
    }

    pub fn penalty(&self) -> &DistSpec {
        &self.penalty
    }

    pub fn encode(&self, x: &Tensor) -> Result<Tensor> {
        Ok(self.encoder.forward(x)?.output().clone())
    }

    /// G(E(x)).
    pub fn reconstruct(&self, x: &Tensor) -> Result<Tensor> {
        let z = self.encode(x)?;
        Ok(self.generator.forward(&z)?.output().clone())
    }

    pub fn n_params(&self) -> usize {
        self.nets().iter().map(|n| n.n_params()).sum()
    }

    /// All parameters in fixed order: encoder, generator, D_xz, D_xx.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for net in self.nets() {
            out.extend(net.flat_params());
        }
        out
    }

    pub fn set_flat_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.n_params() {
            return Err(Error::Shape(format!(
                "set_flat_params: {} values for {} params",
                flat.len(),
                self.n_params()
            )));
        }
        let mut off = 0;
        for net in [
            &mut self.encoder,
            &mut self.generator,
            &mut self.disc_xz,
            &mut self.disc_xx,
        ] {
            let n = net.n_params();
            net.set_flat_params(&flat[off..off + n])?;
            off += n;
        }
        Ok(())
    }

    fn nets(&self) -> [&DenseNet; 4] {
        [&self.encoder, &self.generator, &self.disc_xz, &self.disc_xx]
    }
}

/// Gradients for every network of the model, in the same fixed order as
/// `RCGANModel::flat_params`. Networks untouched by a loss carry zeros.
#[derive(Debug, Clone)]
pub struct ModelGrads {
    pub encoder: Gradients,
    pub generator: Gradients,
    pub disc_xz: Gradients,
    pub disc_xx: Gradients,
}

impl ModelGrads {
    pub fn zeros(model: &RCGANModel) -> ModelGrads {
        ModelGrads {
            encoder: Gradients::zeros_like(&model.encoder),
            generator: Gradients::zeros_like(&model.generator),
            disc_xz: Gradients::zeros_like(&model.disc_xz),
            disc_xx: Gradients::zeros_like(&model.disc_xx),
        }
    }

    /// Concatenated parameter gradient matching `RCGANModel::flat_params`.
    pub fn flat(&self) -> Vec<f64> {
        let mut out = self.encoder.flat();
        out.extend(self.generator.flat());
        out.extend(self.disc_xz.flat());
        out.extend(self.disc_xx.flat());
        out
    }
}

// Mean of -ln(y) over the batch plus its upstream d/dy = -1/(B y).
fn neg_log_mean(y: &Tensor) -> (f64, Tensor) {
    let b = y.len() as f64;
    let loss = y.data().iter().map(|v| -v.ln()).sum::<f64>() / b;
    let up: Vec<f64> = y.data().iter().map(|v| -1.0 / (b * v)).collect();
    (loss, Tensor::new(y.shape().to_vec(), up).expect("finite upstream"))
}

// Mean of -ln(1 - y) over the batch plus its upstream d/dy = 1/(B (1-y)).
fn neg_log_one_minus_mean(y: &Tensor) -> (f64, Tensor) {
    let b = y.len() as f64;
    let loss = y.data().iter().map(|v| -(1.0 - v).ln()).sum::<f64>() / b;
    let up: Vec<f64> = y.data().iter().map(|v| 1.0 / (b * (1.0 - v))).collect();
    (loss, Tensor::new(y.shape().to_vec(), up).expect("finite upstream"))
}

fn ensure_finite(name: &str, loss: f64) -> Result<f64> {
    if loss.is_finite() {
        Ok(loss)
    } else {
        Err(Error::NonFinite(format!("{name} loss is {loss}")))
    }
}

/// Discriminator side of the adversarial loss:
/// `-mean ln D(x, E(x)) - mean ln(1 - D(G(z), z)) [- mean ln(1 - D(xp, E(xp)))]`.
/// The penalty batch `x_pen` contributes the bracketed term when present and
/// must match the real batch size.
pub fn loss_grads_ano_disc(
    model: &RCGANModel,
    x: &Tensor,
    z: &Tensor,
    x_pen: Option<&Tensor>,
) -> Result<(f64, ModelGrads)> {
    check_batch(model, x, Some(z))?;
    if let Some(xp) = x_pen {
        if xp.shape() != x.shape() {
            return Err(Error::Shape(format!(
                "penalty batch {:?} must match real batch {:?}",
                xp.shape(),
                x.shape()
            )));
        }
    }
    let x_dim = model.x_dim();
    let mut g = ModelGrads::zeros(model);

    // Real pairs (x, E(x)): positives.
    let tr_e = model.encoder.forward(x)?;
    let pair_real = Tensor::concat_cols(x, tr_e.output())?;
    let tr_real = model.disc_xz.forward(&pair_real)?;
    let (l_real, up_real) = neg_log_mean(tr_real.output());
    let gd = model.disc_xz.backward(&tr_real, &up_real)?;
    let ge = model.encoder.backward(&tr_e, &gd.input.slice_cols(x_dim, pair_real.ncols()))?;
    g.disc_xz.add_assign(&gd);
    g.encoder.add_assign(&ge);

    // Generated pairs (G(z), z): negatives.
    let tr_g = model.generator.forward(z)?;
    let pair_gen = Tensor::concat_cols(tr_g.output(), z)?;
    let tr_fake = model.disc_xz.forward(&pair_gen)?;
    let (l_fake, up_fake) = neg_log_one_minus_mean(tr_fake.output());
    let gd = model.disc_xz.backward(&tr_fake, &up_fake)?;
    let gg = model.generator.backward(&tr_g, &gd.input.slice_cols(0, x_dim))?;
    g.disc_xz.add_assign(&gd);
    g.generator.add_assign(&gg);

    // Penalty pairs (x_pen, E(x_pen)): additional negatives.
    let mut l_pen = 0.0;
    if let Some(xp) = x_pen {
        let tr_ep = model.encoder.forward(xp)?;
        let pair_pen = Tensor::concat_cols(xp, tr_ep.output())?;
        let tr_pen = model.disc_xz.forward(&pair_pen)?;
        let (l, up_pen) = neg_log_one_minus_mean(tr_pen.output());
        l_pen = l;
        let gd = model.disc_xz.backward(&tr_pen, &up_pen)?;
        let ge = model
            .encoder
            .backward(&tr_ep, &gd.input.slice_cols(x_dim, pair_pen.ncols()))?;
        g.disc_xz.add_assign(&gd);
        g.encoder.add_assign(&ge);
    }
    Ok((ensure_finite("ano-disc", l_real + l_fake + l_pen)?, g))
}

/// Encoder/generator side of the adversarial loss, non-saturating form:
/// `mean ln D(x, E(x)) - mean ln D(G(z), z)`. The encoder pushes real pairs
/// toward the fake label by minimizing the first term as-is; the generated
/// term swaps `min ln(1-D)` for `max ln D`. Penalty samples never appear.
pub fn loss_grads_ano_gen(model: &RCGANModel, x: &Tensor, z: &Tensor) -> Result<(f64, ModelGrads)> {
    check_batch(model, x, Some(z))?;
    let x_dim = model.x_dim();
    let mut g = ModelGrads::zeros(model);

    let tr_e = model.encoder.forward(x)?;
    let pair_real = Tensor::concat_cols(x, tr_e.output())?;
    let tr_real = model.disc_xz.forward(&pair_real)?;
    // +mean ln D: negate the -ln upstream.
    let (l_real_neg, up) = neg_log_mean(tr_real.output());
    let up_real = Tensor::new(
        up.shape().to_vec(),
        up.data().iter().map(|v| -v).collect(),
    )?;
    let gd = model.disc_xz.backward(&tr_real, &up_real)?;
    let ge = model.encoder.backward(&tr_e, &gd.input.slice_cols(x_dim, pair_real.ncols()))?;
    g.disc_xz.add_assign(&gd);
    g.encoder.add_assign(&ge);

    let tr_g = model.generator.forward(z)?;
    let pair_gen = Tensor::concat_cols(tr_g.output(), z)?;
    let tr_fake = model.disc_xz.forward(&pair_gen)?;
    let (l_fake, up_fake) = neg_log_mean(tr_fake.output());
    let gd = model.disc_xz.backward(&tr_fake, &up_fake)?;
    let gg = model.generator.backward(&tr_g, &gd.input.slice_cols(0, x_dim))?;
    g.disc_xz.add_assign(&gd);
    g.generator.add_assign(&gg);

    Ok((ensure_finite("ano-gen", -l_real_neg + l_fake)?, g))
}

/// Discriminator side of the cycle loss:
/// `-mean ln D_xx(x, x) - mean ln(1 - D_xx(x, G(E(x))))`.
pub fn loss_grads_cycle_disc(model: &RCGANModel, x: &Tensor) -> Result<(f64, ModelGrads)> {
    check_batch(model, x, None)?;
    let x_dim = model.x_dim();
    let mut g = ModelGrads::zeros(model);

    let tr_e = model.encoder.forward(x)?;
    let tr_g = model.generator.forward(tr_e.output())?;

    let pair_real = Tensor::concat_cols(x, x)?;
    let tr_real = model.disc_xx.forward(&pair_real)?;
    let (l_real, up_real) = neg_log_mean(tr_real.output());
    let gd = model.disc_xx.backward(&tr_real, &up_real)?;
    g.disc_xx.add_assign(&gd);

    let pair_fake = Tensor::concat_cols(x, tr_g.output())?;
    let tr_fake = model.disc_xx.forward(&pair_fake)?;
    let (l_fake, up_fake) = neg_log_one_minus_mean(tr_fake.output());
    let gd = model.disc_xx.backward(&tr_fake, &up_fake)?;
    let gg = model
        .generator
        .backward(&tr_g, &gd.input.slice_cols(x_dim, 2 * x_dim))?;
    let ge = model.encoder.backward(&tr_e, &gg.input)?;
    g.disc_xx.add_assign(&gd);
    g.generator.add_assign(&gg);
    g.encoder.add_assign(&ge);

    Ok((ensure_finite("cycle-disc", l_real + l_fake)?, g))
}

/// Encoder/generator side of the cycle loss, non-saturating:
/// `-mean ln D_xx(x, G(E(x)))`, pushing reconstructions toward the real label.
pub fn loss_grads_cycle_gen(model: &RCGANModel, x: &Tensor) -> Result<(f64, ModelGrads)> {
    check_batch(model, x, None)?;
    let x_dim = model.x_dim();
    let mut g = ModelGrads::zeros(model);

    let tr_e = model.encoder.forward(x)?;
    let tr_g = model.generator.forward(tr_e.output())?;
    let pair_fake = Tensor::concat_cols(x, tr_g.output())?;
    let tr_fake = model.disc_xx.forward(&pair_fake)?;
    let (l_fake, up_fake) = neg_log_mean(tr_fake.output());
    let gd = model.disc_xx.backward(&tr_fake, &up_fake)?;
    let gg = model
        .generator
        .backward(&tr_g, &gd.input.slice_cols(x_dim, 2 * x_dim))?;
    let ge = model.encoder.backward(&tr_e, &gg.input)?;
    g.disc_xx.add_assign(&gd);
    g.generator.add_assign(&gg);
    g.encoder.add_assign(&ge);

    Ok((ensure_finite("cycle-gen", l_fake)?, g))
}

fn check_batch(model: &RCGANModel, x: &Tensor, z: Option<&Tensor>) -> Result<()> {
    if x.shape().len() != 2 || x.ncols() != model.x_dim() {
        return Err(Error::Shape(format!(
            "data batch {:?} does not match x dim {}",
            x.shape(),
            model.x_dim()
        )));
    }
    if x.nrows() == 0 {
        return Err(Error::Shape("empty batch".into()));
    }
    if let Some(z) = z {
        if z.shape().len() != 2 || z.ncols() != model.z_dim() || z.nrows() != x.nrows() {
            return Err(Error::Shape(format!(
                "latent batch {:?} does not match z dim {} / batch {}",
                z.shape(),
                model.z_dim(),
                x.nrows()
            )));
        }
    }
    Ok(())
}

/// Training hyperparameters. `disc_steps` discriminator updates run per
/// encoder/generator update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub mode: TrainMode,
    pub epochs: usize,
    pub batch_size: usize,
    pub disc_steps: usize,
    pub adam: AdamParams,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            mode: TrainMode::Rcgan,
            epochs: 100,
            batch_size: 128,
            disc_steps: 1,
            adam: AdamParams {
                lr: 5e-4,
                beta1: 0.5,
                beta2: 0.999,
                epsilon: 1e-8,
            },
            seed: 0,
        }
    }
}

/// Losses recorded at one training step (the disc values are from the last
/// discriminator update of the step).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepLoss {
    pub step: usize,
    pub v_ano_disc: f64,
    pub v_ano_gen: f64,
    pub v_cycle_disc: f64,
    pub v_cycle_gen: f64,
}

/// Per-step loss curves for a whole run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub steps: Vec<StepLoss>,
}

impl LossReport {
    pub fn write_csv<W: IoWrite>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "step,v_ano_disc,v_ano_gen,v_cycle_disc,v_cycle_gen")?;
        for s in &self.steps {
            writeln!(
                w,
                "{},{},{},{},{}",
                s.step, s.v_ano_disc, s.v_ano_gen, s.v_cycle_disc, s.v_cycle_gen
            )?;
        }
        Ok(())
    }
}

/// Cycles through the data in shuffled order, reshuffling on exhaustion, so
/// every batch has exactly `batch_size` rows regardless of the data size.
struct Batcher {
    order: Vec<usize>,
    pos: usize,
}

impl Batcher {
    fn new(n: usize) -> Batcher {
        Batcher {
            order: (0..n).collect(),
            pos: n, // force a shuffle before the first batch
        }
    }

    fn next<R: Rng>(&mut self, data: &Tensor, batch: usize, rng: &mut R) -> Tensor {
        use rand::seq::SliceRandom;
        let mut idx = Vec::with_capacity(batch);
        while idx.len() < batch {
            if self.pos >= self.order.len() {
                self.order.shuffle(rng);
                self.pos = 0;
            }
            idx.push(self.order[self.pos]);
            self.pos += 1;
        }
        data.gather_rows(&idx)
    }
}

/// Alternating optimization of the combined objective. Each step runs
/// `disc_steps` discriminator updates (fresh batches each) followed by one
/// encoder/generator update. Batches, latent draws, and penalty draws all
/// come from the root seed's training stream, so a (config, seed, data) triple
/// fully determines the trained model.
pub fn train(model: &mut RCGANModel, data: &Tensor, cfg: &TrainConfig) -> Result<LossReport> {
    if data.shape().len() != 2 || data.ncols() != model.x_dim() {
        return Err(Error::Shape(format!(
            "training data {:?} does not match x dim {}",
            data.shape(),
            model.x_dim()
        )));
    }
    if data.nrows() == 0 {
        return Err(Error::Config("training data is empty".into()));
    }
    if cfg.batch_size == 0 || cfg.disc_steps == 0 {
        return Err(Error::Config("batch_size and disc_steps must be >= 1".into()));
    }
    let mut rng = stream_rng(cfg.seed, streams::TRAIN);
    let mut batcher = Batcher::new(data.nrows());
    let mut opt = OptimizerSet::new(model, cfg.adam);
    let steps_per_epoch = data.nrows().div_ceil(cfg.batch_size);
    let total_steps = cfg.epochs * steps_per_epoch;
    let mut report = LossReport::default();
    for step in 0..total_steps {
        let loss = train_step(model, data, cfg, &mut batcher, &mut opt, &mut rng)
            .map_err(|e| match e {
                Error::NonFinite(what) => Error::Diverged { step, what },
                other => other,
            })?;
        report.steps.push(StepLoss { step, ..loss });
    }
    Ok(report)
}

/// Adam states for the four networks of one model.
pub struct OptimizerSet {
    encoder: AdamState,
    generator: AdamState,
    disc_xz: AdamState,
    disc_xx: AdamState,
}

impl OptimizerSet {
    pub fn new(model: &RCGANModel, hp: AdamParams) -> OptimizerSet {
        OptimizerSet {
            encoder: AdamState::new(hp, model.encoder.n_params()),
            generator: AdamState::new(hp, model.generator.n_params()),
            disc_xz: AdamState::new(hp, model.disc_xz.n_params()),
            disc_xx: AdamState::new(hp, model.disc_xx.n_params()),
        }
    }
}

fn train_step(
    model: &mut RCGANModel,
    data: &Tensor,
    cfg: &TrainConfig,
    batcher: &mut Batcher,
    opt: &mut OptimizerSet,
    rng: &mut ChaCha8Rng,
) -> Result<StepLoss> {
    let b = cfg.batch_size;
    let mut v_ano_disc = 0.0;
    let mut v_cycle_disc = 0.0;
    // Discriminator phase: update D_xz and D_xx on their summed losses with
    // E and G frozen.
    for _ in 0..cfg.disc_steps {
        let x = batcher.next(data, b, rng);
        let z = model.latent.sample(b, rng)?;
        let x_pen = if cfg.mode.uses_penalty() {
            Some(model.penalty.sample(b, rng)?)
        } else {
            None
        };
        let (la, ga) = loss_grads_ano_disc(model, &x, &z, x_pen.as_ref())?;
        let (lc, gc) = loss_grads_cycle_disc(model, &x)?;
        model.disc_xz.adam_step(&mut opt.disc_xz, &ga.disc_xz)?;
        model.disc_xx.adam_step(&mut opt.disc_xx, &gc.disc_xx)?;
        v_ano_disc = la;
        v_cycle_disc = lc;
    }
    // Encoder/generator phase: one update on the summed non-saturating
    // losses with both discriminators frozen.
    let x = batcher.next(data, b, rng);
    let z = model.latent.sample(b, rng)?;
    let (v_ano_gen, ga) = loss_grads_ano_gen(model, &x, &z)?;
    let (v_cycle_gen, gc) = loss_grads_cycle_gen(model, &x)?;
    let mut ge = ga.encoder;
    ge.add_assign(&gc.encoder);
    let mut gg = ga.generator;
    gg.add_assign(&gc.generator);
    model.encoder.adam_step(&mut opt.encoder, &ge)?;
    model.generator.adam_step(&mut opt.generator, &gg)?;
    Ok(StepLoss {
        step: 0,
        v_ano_disc,
        v_ano_gen,
        v_cycle_disc,
        v_cycle_gen,
    })
}

/// Versioned plain-text (JSON) checkpoint; floats round-trip bit-exactly.
#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    format: String,
    version: u32,
    model: RCGANModel,
}

const CHECKPOINT_FORMAT: &str = "rcgan-checkpoint";
const CHECKPOINT_VERSION: u32 = 1;

pub fn save_checkpoint(path: &Path, model: &RCGANModel) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let wrapper = CheckpointFile {
        format: CHECKPOINT_FORMAT.into(),
        version: CHECKPOINT_VERSION,
        model: model.clone(),
    };
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), &wrapper)
        .map_err(|e| Error::Checkpoint(e.to_string()))
}

pub fn load_checkpoint(path: &Path) -> Result<RCGANModel> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let wrapper: CheckpointFile = serde_json::from_reader(std::io::BufReader::new(file))
        .map_err(|e| Error::Checkpoint(format!("{}: {e}", path.display())))?;
    if wrapper.format != CHECKPOINT_FORMAT {
        return Err(Error::Checkpoint(format!(
            "{}: unexpected format {:?}",
            path.display(),
            wrapper.format
        )));
    }
    if wrapper.version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!(
            "{}: unsupported version {}",
            path.display(),
            wrapper.version
        )));
    }
    Ok(wrapper.model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Layer;

    fn zero_model() -> RCGANModel {
        // All-zero single-layer nets: E(x) = 0, G(z) = 0, and both
        // discriminators output sigmoid(0) = 1/2 exactly.
        let lin = |i: usize, o: usize, act: Activation| Layer {
            weight: Tensor::zeros(vec![o, i]),
            bias: Tensor::zeros(vec![o]),
            activation: act,
        };
        RCGANModel::new(
            DenseNet::new(vec![lin(2, 2, Activation::Identity)]).unwrap(),
            DenseNet::new(vec![lin(2, 2, Activation::Identity)]).unwrap(),
            DenseNet::new(vec![lin(4, 1, Activation::Sigmoid)]).unwrap(),
            DenseNet::new(vec![lin(4, 1, Activation::Sigmoid)]).unwrap(),
            DistSpec::gaussian(2, 0.0, 1.0),
            DistSpec::gaussian(2, 0.0, 1.0),
        )
        .unwrap()
    }

    fn small_model(seed: u64) -> RCGANModel {
        let mut rng = stream_rng(seed, streams::INIT);
        RCGANModel::with_mlps(
            2,
            &[8, 8],
            DistSpec::gaussian(2, 0.0, 1.0),
            DistSpec::gaussian(2, 0.0, 1.0),
            &mut rng,
        )
        .unwrap()
    }

    fn batches(seed: u64, b: usize) -> (Tensor, Tensor, Tensor) {
        let mut rng = stream_rng(seed, streams::DATA);
        let spec = DistSpec::gaussian(2, 0.0, 1.0);
        (
            spec.sample(b, &mut rng).unwrap(),
            spec.sample(b, &mut rng).unwrap(),
            spec.sample(b, &mut rng).unwrap(),
        )
    }

    #[test]
    fn half_probability_discriminators_give_log2_losses() {
        // With D = 1/2 everywhere: each -ln term is ln 2, so the adversarial
        // disc loss is 2 ln 2 without penalty and 3 ln 2 with it, and the
        // cycle disc loss is 2 ln 2.
        let model = zero_model();
        let (x, z, xp) = batches(1, 16);
        let ln2 = std::f64::consts::LN_2;
        let (l, _) = loss_grads_ano_disc(&model, &x, &z, None).unwrap();
        assert!((l - 2.0 * ln2).abs() < 1e-12, "no penalty: {l}");
        let (l, _) = loss_grads_ano_disc(&model, &x, &z, Some(&xp)).unwrap();
        assert!((l - 3.0 * ln2).abs() < 1e-12, "with penalty: {l}");
        let (l, _) = loss_grads_cycle_disc(&model, &x).unwrap();
        assert!((l - 2.0 * ln2).abs() < 1e-12, "cycle: {l}");
        let (l, _) = loss_grads_cycle_gen(&model, &x).unwrap();
        assert!((l - ln2).abs() < 1e-12, "cycle gen: {l}");
        // Gen loss: mean ln(1/2) - mean ln(1/2) = 0.
        let (l, _) = loss_grads_ano_gen(&model, &x, &z).unwrap();
        assert!(l.abs() < 1e-12, "ano gen: {l}");
    }

    #[test]
    fn all_four_losses_pass_finite_difference_check() {
        let model = small_model(3);
        let (x, z, xp) = batches(3, 4);
        type LossFn<'a> = Box<dyn Fn(&RCGANModel) -> (f64, ModelGrads) + 'a>;
        let losses: Vec<(&str, LossFn)> = vec![
            (
                "ano-disc",
                Box::new(|m: &RCGANModel| loss_grads_ano_disc(m, &x, &z, Some(&xp)).unwrap()),
            ),
            (
                "ano-gen",
                Box::new(|m: &RCGANModel| loss_grads_ano_gen(m, &x, &z).unwrap()),
            ),
            (
                "cycle-disc",
                Box::new(|m: &RCGANModel| loss_grads_cycle_disc(m, &x).unwrap()),
            ),
            (
                "cycle-gen",
                Box::new(|m: &RCGANModel| loss_grads_cycle_gen(m, &x).unwrap()),
            ),
        ];
        let params = model.flat_params();
        let h = 1e-5;
        for (name, f) in &losses {
            let (_, grads) = f(&model);
            let flat = grads.flat();
            assert_eq!(flat.len(), params.len());
            let mut worst = 0.0f64;
            for i in 0..params.len() {
                let mut m = model.clone();
                let mut p = params.clone();
                p[i] += h;
                m.set_flat_params(&p).unwrap();
                let up = f(&m).0;
                p[i] -= 2.0 * h;
                m.set_flat_params(&p).unwrap();
                let down = f(&m).0;
                let fd = (up - down) / (2.0 * h);
                let denom = flat[i].abs().max(fd.abs()).max(1e-6);
                worst = worst.max(((flat[i] - fd) / denom).abs());
            }
            assert!(worst < 1e-4, "{name}: max rel err {worst}");
        }
    }

    #[test]
    fn model_constructor_rejects_contract_violations() {
        let mut rng = stream_rng(0, streams::INIT);
        let latent = DistSpec::gaussian(2, 0.0, 1.0);
        let pen2 = DistSpec::gaussian(2, 0.0, 1.0);
        let e = DenseNet::mlp(&[2, 4, 2], Activation::Tanh, Activation::Identity, &mut rng)
            .unwrap();
        let g = DenseNet::mlp(&[2, 4, 2], Activation::Tanh, Activation::Identity, &mut rng)
            .unwrap();
        let dxz = DenseNet::mlp(&[4, 4, 1], Activation::Tanh, Activation::Sigmoid, &mut rng)
            .unwrap();
        let dxx = DenseNet::mlp(&[4, 4, 1], Activation::Tanh, Activation::Sigmoid, &mut rng)
            .unwrap();
        // Valid reference model.
        assert!(RCGANModel::new(
            e.clone(),
            g.clone(),
            dxz.clone(),
            dxx.clone(),
            latent.clone(),
            pen2.clone()
        )
        .is_ok());
        // Encoder with sigmoid output.
        let e_sig =
            DenseNet::mlp(&[2, 4, 2], Activation::Tanh, Activation::Sigmoid, &mut rng).unwrap();
        assert!(RCGANModel::new(
            e_sig,
            g.clone(),
            dxz.clone(),
            dxx.clone(),
            latent.clone(),
            pen2.clone()
        )
        .is_err());
        // Discriminator without sigmoid.
        let d_id =
            DenseNet::mlp(&[4, 4, 1], Activation::Tanh, Activation::Identity, &mut rng).unwrap();
        assert!(RCGANModel::new(
            e.clone(),
            g.clone(),
            d_id,
            dxx.clone(),
            latent.clone(),
            pen2.clone()
        )
        .is_err());
        // Latent dim mismatch.
        assert!(RCGANModel::new(
            e.clone(),
            g.clone(),
            dxz.clone(),
            dxx.clone(),
            DistSpec::gaussian(3, 0.0, 1.0),
            pen2.clone()
        )
        .is_err());
        // Penalty dim mismatch.
        assert!(RCGANModel::new(e, g, dxz, dxx, latent, DistSpec::gaussian(5, 0.0, 1.0)).is_err());
    }

    #[test]
    fn loss_fns_reject_bad_batches() {
        let model = small_model(1);
        let (x, z, _) = batches(1, 4);
        let bad_z = Tensor::zeros(vec![3, 2]); // batch mismatch
        assert!(loss_grads_ano_disc(&model, &x, &bad_z, None).is_err());
        let bad_x = Tensor::zeros(vec![4, 3]);
        assert!(loss_grads_cycle_disc(&model, &bad_x).is_err());
        let bad_pen = Tensor::zeros(vec![3, 2]);
        assert!(loss_grads_ano_disc(&model, &x, &z, Some(&bad_pen)).is_err());
    }

    #[test]
    fn training_is_deterministic_per_seed() {
        let cfg = TrainConfig {
            epochs: 2,
            batch_size: 16,
            ..TrainConfig::default()
        };
        let data = DistSpec::gaussian(2, 0.0, 1.0)
            .sample(64, &mut stream_rng(5, streams::DATA))
            .unwrap();
        let run = |seed: u64| {
            let mut model = small_model(9);
            let cfg = TrainConfig { seed, ..cfg.clone() };
            let report = train(&mut model, &data, &cfg).unwrap();
            (model.flat_params(), report)
        };
        let (p1, r1) = run(7);
        let (p2, r2) = run(7);
        assert_eq!(p1, p2);
        assert_eq!(r1, r2);
        let (p3, _) = run(8);
        assert_ne!(p1, p3);
    }

    #[test]
    fn no_penalty_and_alice_baseline_coincide() {
        let data = DistSpec::gaussian(2, 0.0, 1.0)
            .sample(64, &mut stream_rng(6, streams::DATA))
            .unwrap();
        let run = |mode: TrainMode| {
            let mut model = small_model(2);
            let cfg = TrainConfig {
                mode,
                epochs: 2,
                batch_size: 16,
                seed: 3,
                ..TrainConfig::default()
            };
            train(&mut model, &data, &cfg).unwrap();
            model.flat_params()
        };
        assert_eq!(run(TrainMode::NoPenalty), run(TrainMode::AliceBaseline));
        assert_ne!(run(TrainMode::NoPenalty), run(TrainMode::Rcgan));
    }

    #[test]
    fn zero_epochs_leaves_model_untouched() {
        let mut model = small_model(4);
        let before = model.flat_params();
        let data = Tensor::zeros(vec![10, 2]);
        let cfg = TrainConfig {
            epochs: 0,
            ..TrainConfig::default()
        };
        let report = train(&mut model, &data, &cfg).unwrap();
        assert!(report.steps.is_empty());
        assert_eq!(model.flat_params(), before);
    }

    #[test]
    fn training_reports_losses_every_step() {
        let mut model = small_model(5);
        let data = DistSpec::gaussian(2, 0.0, 1.0)
            .sample(40, &mut stream_rng(7, streams::DATA))
            .unwrap();
        let cfg = TrainConfig {
            epochs: 3,
            batch_size: 16,
            disc_steps: 2,
            seed: 1,
            ..TrainConfig::default()
        };
        // ceil(40/16) = 3 steps per epoch.
        let report = train(&mut model, &data, &cfg).unwrap();
        assert_eq!(report.steps.len(), 9);
        for (i, s) in report.steps.iter().enumerate() {
            assert_eq!(s.step, i);
            for v in [s.v_ano_disc, s.v_ano_gen, s.v_cycle_disc, s.v_cycle_gen] {
                assert!(v.is_finite());
            }
        }
        let mut csv = Vec::new();
        report.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("step,v_ano_disc,v_ano_gen,v_cycle_disc,v_cycle_gen\n"));
        assert_eq!(text.lines().count(), 10);
    }

    #[test]
    fn absurd_learning_rate_reports_divergence() {
        let mut model = small_model(6);
        let data = DistSpec::gaussian(2, 0.0, 1.0)
            .sample(64, &mut stream_rng(8, streams::DATA))
            .unwrap();
        let cfg = TrainConfig {
            epochs: 5,
            batch_size: 32,
            adam: AdamParams {
                lr: 1e200,
                ..AdamParams::default()
            },
            ..TrainConfig::default()
        };
        match train(&mut model, &data, &cfg) {
            Err(Error::Diverged { .. }) => {}
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn checkpoint_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        let mut model = small_model(7);
        let data = DistSpec::gaussian(2, 0.0, 1.0)
            .sample(64, &mut stream_rng(9, streams::DATA))
            .unwrap();
        let cfg = TrainConfig {
            epochs: 1,
            batch_size: 32,
            ..TrainConfig::default()
        };
        train(&mut model, &data, &cfg).unwrap();
        save_checkpoint(&path, &model).unwrap();
        let back = load_checkpoint(&path).unwrap();
        assert_eq!(model, back);
        // Round-tripping again produces byte-identical files.
        let path2 = dir.path().join("model2.json");
        save_checkpoint(&path2, &back).unwrap();
        assert_eq!(
            std::fs::read(&path).unwrap(),
            std::fs::read(&path2).unwrap()
        );
    }

    #[test]
    fn checkpoint_rejects_corruption_and_bad_version() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_checkpoint(&path, &small_model(8)).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let bad = text.replace("\"version\": 1", "\"version\": 99");
        std::fs::write(&path, bad).unwrap();
        assert!(matches!(load_checkpoint(&path), Err(Error::Checkpoint(_))));
        // Truncated file.
        std::fs::write(&path, &text[..text.len() / 2]).unwrap();
        assert!(load_checkpoint(&path).is_err());
        // Missing file is an I/O error.
        assert!(matches!(
            load_checkpoint(&dir.path().join("nope.json")),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn mode_names_parse_and_round_trip() {
        for mode in [TrainMode::Rcgan, TrainMode::NoPenalty, TrainMode::AliceBaseline] {
            assert_eq!(TrainMode::parse(mode.name()).unwrap(), mode);
        }
        assert!(TrainMode::parse("dcgan").is_err());
    }
}
