use infodemic::encoder::{EncoderConfig, EncoderModel, EncoderOptions, TokenSequence, Vocabulary};
use infodemic::topics::{AutoencoderConfig, AutoencoderModel};
use infodemic::Label;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STEP: f64 = 1e-4;
const TOL: f64 = 1e-4;
/// Below this magnitude both gradients count as zero.
const FLOOR: f64 = 1e-7;

fn rel_err(a: f64, n: f64) -> f64 {
    let scale = a.abs().max(n.abs());
    if scale < FLOOR {
        0.0
    } else {
        (a - n).abs() / scale
    }
}

fn check(name: &str, analytic: &[f64], params: &[f64], mut loss_at: impl FnMut(&[f64]) -> f64) {
    assert_eq!(analytic.len(), params.len());
    let mut worst = 0.0f64;
    let mut p = params.to_vec();
    for i in 0..p.len() {
        let orig = p[i];
        p[i] = orig + STEP;
        let up = loss_at(&p);
        p[i] = orig - STEP;
        let down = loss_at(&p);
        p[i] = orig;
        let numeric = (up - down) / (2.0 * STEP);
        let err = rel_err(analytic[i], numeric);
        assert!(
            err < TOL,
            "{name}: parameter {i}: analytic {} numeric {numeric} rel err {err}",
            analytic[i]
        );
        worst = worst.max(err);
    }
    println!(
        "{name}: {} parameters, worst relative error {worst:.2e}",
        p.len()
    );
}

fn tiny_lstm() -> EncoderModel {
    let vocab = Vocabulary::build(["alpha beta gamma"], 1).unwrap();
    let cfg = EncoderConfig {
        embed_dim: 4,
        hidden_dim: 4,
        init_scale: 0.5,
        seed: 17,
        ..EncoderConfig::default()
    };
    EncoderModel::new(vocab, cfg, EncoderOptions::default()).unwrap()
}

#[test]
fn lstm_gradients_match_finite_differences() {
    let base = tiny_lstm();
    // Three tokens, one of them a feature id with its own embedding row.
    let seq = TokenSequence {
        ids: vec![103, 105, 32011],
    };
    for label in [Label::Fake, Label::Real] {
        let (_, grads) = base.loss_and_gradients(&seq, label).unwrap();
        let analytic = grads.to_flat(&base.params);
        let mut probe = base.clone();
        check("lstm", &analytic, &base.flat_params(), |p| {
            probe.set_flat_params(p);
            probe.loss(&seq, label).unwrap()
        });
    }
}

#[test]
fn autoencoder_gradients_match_finite_differences() {
    let cfg = AutoencoderConfig {
        latent_dim: 2,
        seed: 5,
        ..AutoencoderConfig::default()
    };
    let base = AutoencoderModel::new(4, cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let data: Vec<Vec<f64>> = (0..6)
        .map(|_| (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let (_, grads) = base.loss_and_gradients(&data);
    let mut probe = base.clone();
    check("autoencoder", &grads.to_flat(), &base.flat_params(), |p| {
        probe.set_flat_params(p);
        probe.loss(&data)
    });
}
