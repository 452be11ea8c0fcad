//! Classifier properties: threshold monotonicity, oracle equivalence of the
//! composed slip detector, and the no-false-positive guarantee on static
//! windows.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use vtgrasp_core::classifiers::{
    contact_classify, slip_detect, ClassifierConfig, ContactScoreProvider, ProviderError,
    SlipMethod,
};
use vtgrasp_core::common::SensorUnit;
use vtgrasp_core::image::{GrayImage, TactileFrame};
use vtgrasp_core::tactile::{brightness, filter_image, FilterConfig, FrameSequence};

struct FixedScore(f64);

impl ContactScoreProvider for FixedScore {
    fn unit(&self) -> SensorUnit {
        SensorUnit::A
    }

    fn score(&self, _frame: &TactileFrame) -> Result<f64, ProviderError> {
        Ok(self.0)
    }
}

#[test]
fn raising_thresholds_never_flips_zero_to_one() {
    let frame = TactileFrame::filled(8, 8, [0; 3], 0, SensorUnit::A);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..500 {
        let score = rng.random_range(0.0..=1.0);
        let t1 = rng.random_range(0.0..=1.0);
        let t2 = rng.random_range(t1..=1.0);
        let mut cfg = ClassifierConfig {
            contact_threshold_a: t1,
            ..ClassifierConfig::default()
        };
        let low = contact_classify(&frame, &FixedScore(score), &cfg).unwrap();
        cfg.contact_threshold_a = t2;
        let high = contact_classify(&frame, &FixedScore(score), &cfg).unwrap();
        // Monotone: the higher threshold can only clear a positive.
        assert!(high.positive <= low.positive);
    }
}

fn random_window(rng: &mut ChaCha8Rng) -> FrameSequence {
    let (w, h) = (60, 80);
    let mut frames = Vec::new();
    let base: Vec<u8> = (0..w * h).map(|_| rng.random_range(60..120)).collect();
    for f in 0..4 {
        let mut data = base.clone();
        // Per-frame sensor wiggle.
        for v in data.iter_mut() {
            let noise: i16 = rng.random_range(-5..=5);
            *v = (*v as i16 + noise).clamp(0, 255) as u8;
        }
        // Sometimes a moving bright patch.
        if f == 3 && rng.random_bool(0.5) {
            let side = rng.random_range(6..30);
            let ox = rng.random_range(0..w - side);
            let oy = rng.random_range(0..h - side);
            for y in oy..oy + side {
                for x in ox..ox + side {
                    data[y * w + x] = 230;
                }
            }
        }
        frames.push(GrayImage::new(w, h, data).unwrap());
    }
    FrameSequence::new(frames, vec![0, 33, 66, 99], SensorUnit::A).unwrap()
}

#[test]
fn slip_detect_equals_the_composed_pipeline() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let cfg = ClassifierConfig::default();
    let filter = FilterConfig::default();
    for _ in 0..300 {
        let seq = random_window(&mut rng);
        let label = slip_detect(&seq, SlipMethod::Brightness, None, &cfg, &filter).unwrap();
        let by_hand = brightness(&filter_image(&seq, &filter).unwrap()).unwrap()
            >= cfg.slip_threshold_brightness;
        assert_eq!(label.positive, by_hand);
    }
}

#[test]
fn static_windows_never_trigger_slip() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let filter = FilterConfig::default();
    for _ in 0..200 {
        let (w, h) = (48, 64);
        let data: Vec<u8> = (0..w * h).map(|_| rng.random()).collect();
        let frame = GrayImage::new(w, h, data).unwrap();
        let seq = FrameSequence::new(vec![frame; 4], vec![0, 33, 66, 99], SensorUnit::B).unwrap();
        // Any positive threshold (down to the brightness granularity of one
        // white pixel) stays quiet on a noise-free static window.
        let granularity = 255.0 / (w * h) as f64;
        for t in [granularity, 1.0, 5.0, 10.0, 100.0] {
            let cfg = ClassifierConfig {
                slip_threshold_brightness: t,
                ..ClassifierConfig::default()
            };
            let label = slip_detect(&seq, SlipMethod::Brightness, None, &cfg, &filter).unwrap();
            assert!(!label.positive);
        }
    }
}
