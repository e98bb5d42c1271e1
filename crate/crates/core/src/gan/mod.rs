//! Dense networks and the two GAN oversamplers built from them.
//!
//! Vanilla GAN: discriminator `d → 128 → 64 → 32 → 8 → 1`, binary
//! cross-entropy, one discriminator step then one generator step per epoch,
//! Adam. Wasserstein GAN: critic `d → 256 → 128 → 64 → 32 → 1` with a linear
//! head, `critic_steps` RMSProp critic updates per generator update, critic
//! weights clipped after every critic step. Hidden layers use leaky ReLU.
//!
//! Generators mirror their discriminator (`latent → 32 → 64 → 128 → d` and
//! `latent → 64 → 128 → 256 → d`) and end in a sigmoid, so every generated
//! coordinate lies in (0, 1), matching min-max normalized features.
//!
//! An "epoch" is one generator update on a mini-batch.

mod io;
pub mod net;
pub mod optim;

use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub use io::{load_generator, read_generator, save_generator, write_generator};
pub use net::{sigmoid, softplus, Activation, Dense, DenseNet, ForwardCache, Gradients};
use optim::{Adam, Optimizer, RmsProp};

use crate::error::{Error, Result};
use crate::rng::{seeded_rng, RngSeed, SeededRng};
use crate::types::FeatureVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GanVariant {
    Vanilla,
    Wasserstein,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GanConfig {
    pub latent_dim: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub variant: GanVariant,
    pub wgan_clip: f64,
    pub critic_steps: usize,
    pub seed: RngSeed,
}

impl GanConfig {
    pub fn vanilla() -> Self {
        GanConfig {
            latent_dim: 32,
            epochs: 10_000,
            batch_size: 64,
            learning_rate: 2e-4,
            variant: GanVariant::Vanilla,
            wgan_clip: 0.01,
            critic_steps: 5,
            seed: RngSeed(0),
        }
    }

    pub fn wasserstein() -> Self {
        GanConfig {
            variant: GanVariant::Wasserstein,
            ..GanConfig::vanilla()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.latent_dim == 0 || self.batch_size == 0 || self.critic_steps == 0 {
            return Err(Error::Config(
                "latent_dim, batch_size and critic_steps must be positive".into(),
            ));
        }
        if !(self.wgan_clip > 0.0) || !(self.learning_rate > 0.0) {
            return Err(Error::Config("wgan_clip and learning_rate must be positive".into()));
        }
        Ok(())
    }

    fn generator_dims(&self, data_dim: usize) -> Vec<usize> {
        match self.variant {
            GanVariant::Vanilla => vec![self.latent_dim, 32, 64, 128, data_dim],
            GanVariant::Wasserstein => vec![self.latent_dim, 64, 128, 256, data_dim],
        }
    }

    fn discriminator_dims(&self, data_dim: usize) -> Vec<usize> {
        match self.variant {
            GanVariant::Vanilla => vec![data_dim, 128, 64, 32, 8, 1],
            GanVariant::Wasserstein => vec![data_dim, 256, 128, 64, 32, 1],
        }
    }
}

impl Default for GanConfig {
    fn default() -> Self {
        GanConfig::vanilla()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorModel {
    pub net: DenseNet,
    pub latent_dim: usize,
}

impl GeneratorModel {
    /// The untrained generator that [`train_gan`] starts from.
    pub fn initial(data_dim: usize, cfg: &GanConfig) -> Self {
        let mut rng = seeded_rng(cfg.seed);
        init_generator(data_dim, cfg, &mut rng)
    }

    pub fn data_dim(&self) -> usize {
        self.net.output_dim()
    }
}

fn init_generator(data_dim: usize, cfg: &GanConfig, rng: &mut SeededRng) -> GeneratorModel {
    let net = DenseNet::init(
        &cfg.generator_dims(data_dim),
        Activation::LeakyRelu,
        Activation::Sigmoid,
        rng,
    );
    GeneratorModel {
        net,
        latent_dim: cfg.latent_dim,
    }
}

/// Progress notifications emitted during training.
pub enum TrainEvent<'a> {
    /// The discriminator (vanilla) or critic (Wasserstein) was just updated.
    DiscriminatorUpdated { epoch: usize, net: &'a DenseNet },
    GeneratorUpdated { epoch: usize, discriminator_loss: f64, generator_loss: f64 },
}

pub fn train_gan(minority: &[FeatureVector], cfg: &GanConfig) -> Result<GeneratorModel> {
    train_gan_observed(minority, cfg, |_| {})
}

pub fn train_gan_observed(
    minority: &[FeatureVector],
    cfg: &GanConfig,
    mut observe: impl FnMut(TrainEvent<'_>),
) -> Result<GeneratorModel> {
    cfg.validate()?;
    let first = minority
        .first()
        .ok_or_else(|| Error::Config("GAN training needs at least one sample".into()))?;
    let d = first.dim();
    if let Some(bad) = minority.iter().find(|v| v.dim() != d) {
        return Err(Error::dim(d, bad.dim()));
    }
    let data = Array2::from_shape_fn((minority.len(), d), |(i, j)| minority[i].values()[j]);

    let mut rng = seeded_rng(cfg.seed);
    let mut gen = init_generator(d, cfg, &mut rng);
    // Both heads emit raw scores; the vanilla discriminator's probability is
    // `sigmoid(logit)`, see [`discriminator_probability`].
    let mut disc = DenseNet::init(
        &cfg.discriminator_dims(d),
        Activation::LeakyRelu,
        Activation::Linear,
        &mut rng,
    );

    match cfg.variant {
        GanVariant::Vanilla => {
            let mut opt_d = Adam::new(&disc, cfg.learning_rate);
            let mut opt_g = Adam::new(&gen.net, cfg.learning_rate);
            for epoch in 0..cfg.epochs {
                let n = cfg.batch_size as f64;
                let real = sample_rows(&data, cfg.batch_size, &mut rng);
                let fake = gen.net.forward_batch(&latent_batch(cfg, &mut rng));

                let cr = disc.forward_cached(real);
                let cf = disc.forward_cached(fake);
                let d_loss = cr.output().iter().map(|&l| softplus(-l)).sum::<f64>() / n
                    + cf.output().iter().map(|&l| softplus(l)).sum::<f64>() / n;
                let (mut grads, _) = disc.backward(&cr, &cr.output().mapv(|l| (sigmoid(l) - 1.0) / n));
                let (gf, _) = disc.backward(&cf, &cf.output().mapv(|l| sigmoid(l) / n));
                grads.accumulate(&gf);
                opt_d.step(&mut disc, &grads);
                observe(TrainEvent::DiscriminatorUpdated { epoch, net: &disc });

                let gc = gen.net.forward_cached(latent_batch(cfg, &mut rng));
                let dc = disc.forward_cached(gc.output().clone());
                let g_loss = dc.output().iter().map(|&l| softplus(-l)).sum::<f64>() / n;
                let (_, grad_fake) = disc.backward(&dc, &dc.output().mapv(|l| (sigmoid(l) - 1.0) / n));
                let (ggrads, _) = gen.net.backward(&gc, &grad_fake);
                opt_g.step(&mut gen.net, &ggrads);

                if !d_loss.is_finite() || !g_loss.is_finite() {
                    return Err(Error::TrainingDiverged { epoch });
                }
                observe(TrainEvent::GeneratorUpdated {
                    epoch,
                    discriminator_loss: d_loss,
                    generator_loss: g_loss,
                });
            }
        }
        GanVariant::Wasserstein => {
            let mut opt_c = RmsProp::new(&disc, cfg.learning_rate);
            let mut opt_g = RmsProp::new(&gen.net, cfg.learning_rate);
            disc.clip_params(cfg.wgan_clip);
            for epoch in 0..cfg.epochs {
                let n = cfg.batch_size as f64;
                let mut c_loss = 0.0;
                for _ in 0..cfg.critic_steps {
                    let real = sample_rows(&data, cfg.batch_size, &mut rng);
                    let fake = gen.net.forward_batch(&latent_batch(cfg, &mut rng));
                    let cr = disc.forward_cached(real);
                    let cf = disc.forward_cached(fake);
                    c_loss = cf.output().mean().unwrap() - cr.output().mean().unwrap();
                    let (mut grads, _) = disc.backward(&cr, &Array2::from_elem(cr.output().raw_dim(), -1.0 / n));
                    let (gf, _) = disc.backward(&cf, &Array2::from_elem(cf.output().raw_dim(), 1.0 / n));
                    grads.accumulate(&gf);
                    opt_c.step(&mut disc, &grads);
                    disc.clip_params(cfg.wgan_clip);
                    observe(TrainEvent::DiscriminatorUpdated { epoch, net: &disc });
                }

                let gc = gen.net.forward_cached(latent_batch(cfg, &mut rng));
                let dc = disc.forward_cached(gc.output().clone());
                let g_loss = -dc.output().mean().unwrap();
                let (_, grad_fake) = disc.backward(&dc, &Array2::from_elem(dc.output().raw_dim(), -1.0 / n));
                let (ggrads, _) = gen.net.backward(&gc, &grad_fake);
                opt_g.step(&mut gen.net, &ggrads);

                if !c_loss.is_finite() || !g_loss.is_finite() {
                    return Err(Error::TrainingDiverged { epoch });
                }
                observe(TrainEvent::GeneratorUpdated {
                    epoch,
                    discriminator_loss: c_loss,
                    generator_loss: g_loss,
                });
            }
        }
    }
    Ok(gen)
}

/// Probability that each row is real, from a vanilla discriminator.
pub fn discriminator_probability(disc: &DenseNet, x: &Array2<f64>) -> Vec<f64> {
    disc.forward_batch(x).iter().map(|&l| sigmoid(l)).collect()
}

fn sample_rows(data: &Array2<f64>, n: usize, rng: &mut SeededRng) -> Array2<f64> {
    let rows = data.nrows();
    let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..rows)).collect();
    Array2::from_shape_fn((n, data.ncols()), |(i, j)| data[[idx[i], j]])
}

fn latent_batch(cfg: &GanConfig, rng: &mut SeededRng) -> Array2<f64> {
    Array2::from_shape_fn((cfg.batch_size, cfg.latent_dim), |_| rng.sample(StandardNormal))
}

/// Draws `n` samples from a trained generator.
pub fn generate_samples(gen: &GeneratorModel, n: usize, seed: RngSeed) -> Vec<FeatureVector> {
    if n == 0 {
        return Vec::new();
    }
    let mut rng = seeded_rng(seed);
    let z = Array2::from_shape_fn((n, gen.latent_dim), |_| rng.sample(StandardNormal));
    let out = gen.net.forward_batch(&z);
    out.rows()
        .into_iter()
        .map(|row| FeatureVector::from_vec_unchecked(row.to_vec()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point_mass(n: usize, v: f64) -> Vec<FeatureVector> {
        (0..n).map(|_| FeatureVector::new(vec![v]).unwrap()).collect()
    }

    fn small(variant: GanVariant, epochs: usize) -> GanConfig {
        GanConfig {
            epochs,
            batch_size: 16,
            latent_dim: 4,
            variant,
            seed: RngSeed(11),
            ..GanConfig::vanilla()
        }
    }

    #[test]
    fn zero_epochs_returns_initialization() {
        let data = point_mass(5, 0.3);
        for v in [GanVariant::Vanilla, GanVariant::Wasserstein] {
            let cfg = small(v, 0);
            let gen = train_gan(&data, &cfg).unwrap();
            assert_eq!(gen, GeneratorModel::initial(1, &cfg));
        }
    }

    #[test]
    fn training_is_deterministic() {
        let data: Vec<_> = (0..20)
            .map(|i| FeatureVector::new(vec![i as f64 / 20.0, 0.5]).unwrap())
            .collect();
        for v in [GanVariant::Vanilla, GanVariant::Wasserstein] {
            let cfg = small(v, 20);
            let a = train_gan(&data, &cfg).unwrap();
            let b = train_gan(&data, &cfg).unwrap();
            assert_eq!(a, b);
            assert_eq!(generate_samples(&a, 10, RngSeed(3)), generate_samples(&b, 10, RngSeed(3)));
        }
    }

    #[test]
    fn samples_lie_in_open_unit_interval() {
        let data = point_mass(8, 0.9);
        let gen = train_gan(&data, &small(GanVariant::Vanilla, 10)).unwrap();
        assert!(generate_samples(&gen, 0, RngSeed(0)).is_empty());
        let s = generate_samples(&gen, 500, RngSeed(1));
        assert_eq!(s.len(), 500);
        assert!(s.iter().all(|v| v.values().iter().all(|&x| x > 0.0 && x < 1.0)));
    }

    #[test]
    fn wasserstein_critic_stays_clipped() {
        let data = point_mass(8, 0.2);
        let cfg = small(GanVariant::Wasserstein, 5);
        let mut checks = 0;
        train_gan_observed(&data, &cfg, |ev| {
            if let TrainEvent::DiscriminatorUpdated { net, .. } = ev {
                assert!(net.params_flat().iter().all(|p| p.abs() <= cfg.wgan_clip));
                checks += 1;
            }
        })
        .unwrap();
        assert_eq!(checks, 5 * cfg.critic_steps);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(train_gan(&[], &GanConfig::vanilla()).is_err());
        let cfg = GanConfig {
            wgan_clip: 0.0,
            ..GanConfig::wasserstein()
        };
        assert!(train_gan(&point_mass(2, 0.5), &cfg).is_err());
    }
}
