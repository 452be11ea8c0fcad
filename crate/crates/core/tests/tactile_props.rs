//! Property suites for the tactile filter pipeline, checked against
//! brute-force per-pixel oracles that implement the morphology definitions
//! directly.

use proptest::prelude::*;

use vtgrasp_core::common::SensorUnit;
use vtgrasp_core::image::{GrayImage, TactileFrame};
use vtgrasp_core::morphology::{dilate, erode, open, FilteredImage, StructuringElement};
use vtgrasp_core::tactile::{
    brightness, filter_image, frame_difference, to_grayscale, FilterConfig, FrameSequence,
};

mod oracle {
    use vtgrasp_core::morphology::{FilteredImage, StructuringElement};

    /// Erosion straight from the definition: a pixel stays white iff every
    /// element cell over it is in bounds and white.
    pub fn erode(img: &FilteredImage, se: &StructuringElement) -> FilteredImage {
        let (w, h) = (img.width() as isize, img.height() as isize);
        let offsets = se.offsets();
        let mut out = FilteredImage::black(img.width(), img.height());
        for y in 0..h {
            for x in 0..w {
                let all_white = offsets.iter().all(|&(dx, dy)| {
                    let (sx, sy) = (x + dx, y + dy);
                    sx >= 0
                        && sy >= 0
                        && sx < w
                        && sy < h
                        && img.get(sx as usize, sy as usize) == 255
                });
                if all_white {
                    out.set_white(x as usize, y as usize);
                }
            }
        }
        out
    }

    /// Dilation straight from the definition: stamp the element at every
    /// white pixel.
    pub fn dilate(img: &FilteredImage, se: &StructuringElement) -> FilteredImage {
        let (w, h) = (img.width() as isize, img.height() as isize);
        let offsets = se.offsets();
        let mut out = FilteredImage::black(img.width(), img.height());
        for y in 0..h {
            for x in 0..w {
                if img.get(x as usize, y as usize) != 255 {
                    continue;
                }
                for &(dx, dy) in &offsets {
                    let (tx, ty) = (x + dx, y + dy);
                    if tx >= 0 && ty >= 0 && tx < w && ty < h {
                        out.set_white(tx as usize, ty as usize);
                    }
                }
            }
        }
        out
    }

    pub fn open(img: &FilteredImage, se: &StructuringElement) -> FilteredImage {
        dilate(&erode(img, se), se)
    }
}

fn binary_image(max_w: usize, max_h: usize) -> impl Strategy<Value = FilteredImage> {
    (4..max_w, 4..max_h).prop_flat_map(|(w, h)| {
        proptest::collection::vec(prop_oneof![Just(0u8), Just(255u8)], w * h)
            .prop_map(move |data| FilteredImage::new(w, h, data).unwrap())
    })
}

fn element() -> impl Strategy<Value = StructuringElement> {
    prop_oneof![
        Just(StructuringElement::square(3).unwrap()),
        Just(StructuringElement::square(5).unwrap()),
        Just(StructuringElement::cross(3).unwrap()),
        Just(StructuringElement::cross(5).unwrap()),
        // Irregular asymmetric mask.
        Just(
            StructuringElement::from_mask(
                3,
                3,
                vec![true, false, false, true, true, false, false, false, true],
            )
            .unwrap()
        ),
    ]
}

proptest! {
    #[test]
    fn erosion_and_dilation_match_the_oracle(img in binary_image(24, 20), se in element()) {
        prop_assert_eq!(erode(&img, &se), oracle::erode(&img, &se));
        prop_assert_eq!(dilate(&img, &se), oracle::dilate(&img, &se));
    }

    #[test]
    fn opening_is_idempotent(img in binary_image(32, 24), se in element()) {
        let once = open(&img, &se);
        let twice = open(&once, &se);
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn opening_is_anti_extensive(img in binary_image(32, 24), se in element()) {
        let opened = open(&img, &se);
        for (before, after) in img.data().iter().zip(opened.data()) {
            // No pixel turns white that was black.
            prop_assert!(after <= before);
        }
        prop_assert!(brightness(&opened).unwrap() <= brightness(&img).unwrap());
    }

    #[test]
    fn grayscale_is_idempotent_on_gray_frames(v in 0u8..=255, w in 2usize..16, h in 2usize..16) {
        let frame = TactileFrame::filled(w, h, [v, v, v], 0, SensorUnit::A);
        let gray = to_grayscale(&frame);
        prop_assert!(gray.data().iter().all(|&g| g == v));
        // Re-wrapping the gray values as an RGB frame maps to itself.
        let mut rgb = Vec::with_capacity(w * h * 3);
        for &g in gray.data() {
            rgb.extend_from_slice(&[g, g, g]);
        }
        let again = to_grayscale(&TactileFrame::new(w, h, rgb, 1, SensorUnit::A).unwrap());
        prop_assert_eq!(again.data(), gray.data());
    }

    #[test]
    fn static_sequences_filter_to_black(seed in 0u64..1_000, w in 8usize..48, h in 8usize..48) {
        // Arbitrary but identical frames: psi must be all black.
        let mut value = seed;
        let data: Vec<u8> = (0..w * h)
            .map(|_| {
                value = value.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (value >> 33) as u8
            })
            .collect();
        let frame = GrayImage::new(w, h, data).unwrap();
        let seq = FrameSequence::new(vec![frame; 4], vec![0, 33, 66, 99], SensorUnit::B).unwrap();
        let psi = filter_image(&seq, &FilterConfig::default()).unwrap();
        prop_assert!(psi.is_all_black());
    }
}

/// Full-pipeline oracle check: a moving contact blob must leave a white
/// region; the composed stages are recomputed naively here.
#[test]
fn moving_blob_survives_the_pipeline() {
    let (w, h) = (240, 320);
    let draw_blob = |ox: usize| {
        let mut img = GrayImage::filled(w, h, 40);
        for y in 100..120 {
            for x in ox..ox + 20 {
                img.set(x, y, 200);
            }
        }
        img
    };
    let seq = FrameSequence::new(
        vec![draw_blob(60), draw_blob(63), draw_blob(66), draw_blob(70)],
        vec![0, 33, 66, 99],
        SensorUnit::A,
    )
    .unwrap();
    let cfg = FilterConfig::default();
    let psi = filter_image(&seq, &cfg).unwrap();
    assert!(
        psi.count_white() >= 100,
        "white pixels: {}",
        psi.count_white()
    );

    // Naive recomputation of every stage.
    let diff = frame_difference(&seq);
    let mut expected = FilteredImage::black(w, h);
    for y in 0..h {
        for x in 0..w {
            if diff.get(x, y) >= cfg.binarize_threshold {
                expected.set_white(x, y);
            }
        }
    }
    let expected = oracle::open(&expected, &cfg.element().unwrap());
    assert_eq!(psi, expected);
}

#[test]
fn block_preservation_matches_oracle() {
    // 50x50 solid block: interior preserved through erode-then-dilate.
    let mut img = FilteredImage::black(128, 128);
    for y in 30..80 {
        for x in 30..80 {
            img.set_white(x, y);
        }
    }
    let se = StructuringElement::square(5).unwrap();
    let opened = open(&img, &se);
    assert_eq!(opened, oracle::open(&img, &se));
    assert_eq!(opened, img);
}
