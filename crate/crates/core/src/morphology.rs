//! Binary morphology: erosion, dilation and opening with a configurable
//! structuring element.
//!
//! Pixels outside the image are treated as background (0), which makes the
//! results bit-exact across implementations. Erosion keeps a pixel white only
//! if every element cell over it is white; dilation stamps the (reflected)
//! element onto every white pixel. Opening is erosion followed by dilation
//! with the same element and removes features smaller than the element.

use crate::image::{ImageError, KernelShape, KernelSpec};

/// Binary image; every pixel is exactly 0 or 255.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilteredImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl FilteredImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self, ImageError> {
        if data.len() != width * height {
            return Err(ImageError::BadBufferLength {
                expected: width * height,
                got: data.len(),
            });
        }
        if data.iter().any(|&v| v != 0 && v != 255) {
            return Err(ImageError::NotBinary);
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn black(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0; width * height],
        }
    }

    pub fn white(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![255; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn set_white(&mut self, x: usize, y: usize) {
        self.data[y * self.width + x] = 255;
    }

    pub fn set_black(&mut self, x: usize, y: usize) {
        self.data[y * self.width + x] = 0;
    }

    pub fn count_white(&self) -> usize {
        self.data.iter().filter(|&&v| v == 255).count()
    }

    pub fn is_all_black(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn same_dims(&self, other: &FilteredImage) -> bool {
        self.width == other.width && self.height == other.height
    }
}

/// Structuring element: a boolean mask with odd dimensions, anchored at its
/// centre cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuringElement {
    width: usize,
    height: usize,
    mask: Vec<bool>,
    solid_rect: bool,
}

impl StructuringElement {
    pub fn from_mask(width: usize, height: usize, mask: Vec<bool>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::InvalidStructuringElement("zero-sized mask"));
        }
        if width.is_multiple_of(2) || height.is_multiple_of(2) {
            return Err(ImageError::InvalidStructuringElement(
                "dimensions must be odd",
            ));
        }
        if mask.len() != width * height {
            return Err(ImageError::InvalidStructuringElement(
                "mask length does not match dimensions",
            ));
        }
        if !mask.iter().any(|&b| b) {
            return Err(ImageError::InvalidStructuringElement(
                "mask must contain at least one true cell",
            ));
        }
        let solid_rect = mask.iter().all(|&b| b);
        Ok(Self {
            width,
            height,
            mask,
            solid_rect,
        })
    }

    /// All-true square element of the given odd side length.
    pub fn square(size: usize) -> Result<Self, ImageError> {
        Self::from_mask(size, size, vec![true; size * size])
    }

    /// Plus-shaped element of the given odd side length.
    pub fn cross(size: usize) -> Result<Self, ImageError> {
        if size == 0 || size.is_multiple_of(2) {
            return Err(ImageError::InvalidStructuringElement(
                "dimensions must be odd",
            ));
        }
        let c = size / 2;
        let mut mask = vec![false; size * size];
        for i in 0..size {
            mask[c * size + i] = true;
            mask[i * size + c] = true;
        }
        Self::from_mask(size, size, mask)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Anchor (centre) cell coordinates.
    pub fn anchor(&self) -> (usize, usize) {
        (self.width / 2, self.height / 2)
    }

    /// Offsets of true cells relative to the anchor.
    pub fn offsets(&self) -> Vec<(isize, isize)> {
        let (ax, ay) = self.anchor();
        let mut out = Vec::new();
        for y in 0..self.height {
            for x in 0..self.width {
                if self.mask[y * self.width + x] {
                    out.push((x as isize - ax as isize, y as isize - ay as isize));
                }
            }
        }
        out
    }

    fn is_solid_rect(&self) -> bool {
        self.solid_rect
    }
}

impl TryFrom<KernelSpec> for StructuringElement {
    type Error = ImageError;

    fn try_from(spec: KernelSpec) -> Result<Self, Self::Error> {
        match spec.shape {
            KernelShape::Square => StructuringElement::square(spec.size),
            KernelShape::Cross => StructuringElement::cross(spec.size),
        }
    }
}

/// Erosion: white iff every element cell over the pixel lies in bounds and is
/// white.
pub fn erode(img: &FilteredImage, se: &StructuringElement) -> FilteredImage {
    if img.width == 0 || img.height == 0 {
        return img.clone();
    }
    if se.is_solid_rect() {
        let rx = se.width / 2;
        let ry = se.height / 2;
        let horizontal = sliding_all_rows(img, rx);
        sliding_all_cols(&horizontal, ry)
    } else {
        erode_generic(img, se)
    }
}

/// Dilation: white iff any element cell stamped from a white pixel covers it.
pub fn dilate(img: &FilteredImage, se: &StructuringElement) -> FilteredImage {
    if img.width == 0 || img.height == 0 {
        return img.clone();
    }
    if se.is_solid_rect() {
        let rx = se.width / 2;
        let ry = se.height / 2;
        let horizontal = sliding_any_rows(img, rx);
        sliding_any_cols(&horizontal, ry)
    } else {
        dilate_generic(img, se)
    }
}

/// Morphological opening: erosion followed by dilation.
pub fn open(img: &FilteredImage, se: &StructuringElement) -> FilteredImage {
    dilate(&erode(img, se), se)
}

fn erode_generic(img: &FilteredImage, se: &StructuringElement) -> FilteredImage {
    let offsets = se.offsets();
    let (w, h) = (img.width as isize, img.height as isize);
    let mut out = FilteredImage::black(img.width, img.height);
    for y in 0..h {
        'pixel: for x in 0..w {
            for &(dx, dy) in &offsets {
                let (sx, sy) = (x + dx, y + dy);
                if sx < 0 || sy < 0 || sx >= w || sy >= h {
                    continue 'pixel; // background fails the all-white test
                }
                if img.data[(sy * w + sx) as usize] == 0 {
                    continue 'pixel;
                }
            }
            out.data[(y * w + x) as usize] = 255;
        }
    }
    out
}

fn dilate_generic(img: &FilteredImage, se: &StructuringElement) -> FilteredImage {
    let offsets = se.offsets();
    let (w, h) = (img.width as isize, img.height as isize);
    let mut out = FilteredImage::black(img.width, img.height);
    for y in 0..h {
        for x in 0..w {
            if img.data[(y * w + x) as usize] == 255 {
                for &(dx, dy) in &offsets {
                    let (tx, ty) = (x + dx, y + dy);
                    if tx >= 0 && ty >= 0 && tx < w && ty < h {
                        out.data[(ty * w + tx) as usize] = 255;
                    }
                }
            }
        }
    }
    out
}

// Separable passes for all-true rectangular elements. Each keeps a running
// count of white pixels inside the 1-D window.

fn sliding_all_rows(img: &FilteredImage, r: usize) -> FilteredImage {
    let (w, h) = (img.width, img.height);
    let win = 2 * r + 1;
    let mut out = FilteredImage::black(w, h);
    if w < win {
        return out; // every window sticks out of bounds
    }
    for y in 0..h {
        let row = &img.data[y * w..(y + 1) * w];
        let out_row = &mut out.data[y * w..(y + 1) * w];
        let mut count: usize = row[..win].iter().filter(|&&v| v == 255).count();
        if count == win {
            out_row[r] = 255;
        }
        for x in r + 1..w - r {
            if row[x - r - 1] == 255 {
                count -= 1;
            }
            if row[x + r] == 255 {
                count += 1;
            }
            if count == win {
                out_row[x] = 255;
            }
        }
    }
    out
}

fn sliding_all_cols(img: &FilteredImage, r: usize) -> FilteredImage {
    let (w, h) = (img.width, img.height);
    let win = 2 * r + 1;
    let mut out = FilteredImage::black(w, h);
    if h < win {
        return out;
    }
    let mut counts = vec![0usize; w];
    for y in 0..win {
        let row = &img.data[y * w..(y + 1) * w];
        for (c, &v) in counts.iter_mut().zip(row) {
            *c += (v == 255) as usize;
        }
    }
    write_row_if(&mut out, r, &counts, |c| c == win);
    for y in r + 1..h - r {
        let leave = &img.data[(y - r - 1) * w..(y - r) * w];
        let enter = &img.data[(y + r) * w..(y + r + 1) * w];
        for ((c, &l), &e) in counts.iter_mut().zip(leave).zip(enter) {
            *c -= (l == 255) as usize;
            *c += (e == 255) as usize;
        }
        write_row_if(&mut out, y, &counts, |c| c == win);
    }
    out
}

fn sliding_any_rows(img: &FilteredImage, r: usize) -> FilteredImage {
    let (w, h) = (img.width, img.height);
    let mut out = FilteredImage::black(w, h);
    for y in 0..h {
        let row = &img.data[y * w..(y + 1) * w];
        let out_row = &mut out.data[y * w..(y + 1) * w];
        let mut count: usize = row[..(r + 1).min(w)].iter().filter(|&&v| v == 255).count();
        if count > 0 {
            out_row[0] = 255;
        }
        for x in 1..w {
            if x > r && row[x - r - 1] == 255 {
                count -= 1;
            }
            if x + r < w && row[x + r] == 255 {
                count += 1;
            }
            if count > 0 {
                out_row[x] = 255;
            }
        }
    }
    out
}

fn sliding_any_cols(img: &FilteredImage, r: usize) -> FilteredImage {
    let (w, h) = (img.width, img.height);
    let mut out = FilteredImage::black(w, h);
    let mut counts = vec![0usize; w];
    for y in 0..(r + 1).min(h) {
        let row = &img.data[y * w..(y + 1) * w];
        for (c, &v) in counts.iter_mut().zip(row) {
            *c += (v == 255) as usize;
        }
    }
    write_row_if(&mut out, 0, &counts, |c| c > 0);
    for y in 1..h {
        if y > r {
            let leave = &img.data[(y - r - 1) * w..(y - r) * w];
            for (c, &l) in counts.iter_mut().zip(leave) {
                *c -= (l == 255) as usize;
            }
        }
        if y + r < h {
            let enter = &img.data[(y + r) * w..(y + r + 1) * w];
            for (c, &e) in counts.iter_mut().zip(enter) {
                *c += (e == 255) as usize;
            }
        }
        write_row_if(&mut out, y, &counts, |c| c > 0);
    }
    out
}

fn write_row_if(out: &mut FilteredImage, y: usize, counts: &[usize], pred: impl Fn(usize) -> bool) {
    let w = out.width;
    let row = &mut out.data[y * w..(y + 1) * w];
    for (o, &c) in row.iter_mut().zip(counts) {
        if pred(c) {
            *o = 255;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_rows(rows: &[&[u8]]) -> FilteredImage {
        let h = rows.len();
        let w = rows[0].len();
        let data: Vec<u8> = rows
            .iter()
            .flat_map(|r| r.iter().map(|&v| v * 255))
            .collect();
        FilteredImage::new(w, h, data).unwrap()
    }

    #[test]
    fn element_validation() {
        assert!(StructuringElement::square(4).is_err());
        assert!(StructuringElement::square(0).is_err());
        assert!(StructuringElement::from_mask(3, 3, vec![false; 9]).is_err());
        assert!(StructuringElement::square(5).is_ok());
        assert_eq!(StructuringElement::square(5).unwrap().anchor(), (2, 2));
    }

    #[test]
    fn opening_removes_isolated_pixel() {
        let mut img = FilteredImage::black(16, 16);
        img.set_white(8, 8);
        let se = StructuringElement::square(5).unwrap();
        assert!(open(&img, &se).is_all_black());
    }

    #[test]
    fn opening_of_empty_image_is_empty() {
        let se = StructuringElement::square(5).unwrap();
        assert!(open(&FilteredImage::black(20, 20), &se).is_all_black());
    }

    #[test]
    fn opening_preserves_large_block() {
        // 50x50 solid block away from the borders survives opening intact.
        let mut img = FilteredImage::black(80, 80);
        for y in 10..60 {
            for x in 10..60 {
                img.set_white(x, y);
            }
        }
        let se = StructuringElement::square(5).unwrap();
        assert_eq!(open(&img, &se), img);
    }

    #[test]
    fn erosion_uses_background_padding() {
        // A white image erodes away at the borders.
        let img = FilteredImage::white(8, 8);
        let se = StructuringElement::square(3).unwrap();
        let eroded = erode(&img, &se);
        assert_eq!(eroded.count_white(), 6 * 6);
        assert_eq!(eroded.get(0, 0), 0);
        assert_eq!(eroded.get(1, 1), 255);
    }

    #[test]
    fn cross_element_matches_generic_path() {
        let img = from_rows(&[
            &[0, 0, 0, 0, 0, 0],
            &[0, 1, 1, 1, 0, 0],
            &[0, 1, 1, 1, 1, 0],
            &[0, 1, 1, 1, 0, 0],
            &[0, 0, 1, 0, 0, 0],
            &[0, 0, 0, 0, 0, 0],
        ]);
        let se = StructuringElement::cross(3).unwrap();
        let eroded = erode(&img, &se);
        assert_eq!(eroded.get(2, 2), 255);
        assert_eq!(eroded.get(4, 2), 0);
    }

    #[test]
    fn rect_fast_path_matches_generic_definitions() {
        // Cross-check the separable passes against the direct per-pixel loops.
        let img = from_rows(&[
            &[1, 0, 1, 1, 1, 0, 0],
            &[0, 1, 1, 1, 0, 0, 1],
            &[1, 1, 1, 1, 1, 1, 0],
            &[0, 1, 1, 0, 1, 1, 0],
            &[1, 0, 1, 1, 1, 0, 1],
        ]);
        for size in [3usize, 5] {
            let se = StructuringElement::square(size).unwrap();
            assert_eq!(erode(&img, &se), erode_generic(&img, &se));
            assert_eq!(dilate(&img, &se), dilate_generic(&img, &se));
        }
    }
}
