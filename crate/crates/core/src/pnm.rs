//! Binary PNM codecs: PGM (P5) for grayscale, binary and 16-bit depth
//! images, PPM (P6) for RGB tactile frames.
//!
//! Rasters are row-major from the top-left pixel. 16-bit samples are stored
//! big-endian, as the format requires. Headers may contain `#` comments.

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::common::SensorUnit;
use crate::image::{DepthImage, GrayImage, ImageError, TactileFrame};
use crate::morphology::FilteredImage;

#[derive(Debug, Error)]
pub enum PnmError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("bad magic number: expected {expected}, got {got}")]
    BadMagic { expected: &'static str, got: String },
    #[error("malformed header: {0}")]
    BadHeader(&'static str),
    #[error("unsupported maxval {0}")]
    UnsupportedMaxval(u32),
    #[error("raster is truncated")]
    Truncated,
    #[error(transparent)]
    Image(#[from] ImageError),
}

struct Header {
    width: usize,
    height: usize,
    maxval: u32,
}

fn read_header<R: Read>(r: &mut R, magic: &'static str) -> Result<Header, PnmError> {
    let mut got = [0u8; 2];
    r.read_exact(&mut got)?;
    if got != magic.as_bytes()[..2] {
        return Err(PnmError::BadMagic {
            expected: magic,
            got: String::from_utf8_lossy(&got).into_owned(),
        });
    }
    let mut fields = [0u64; 3];
    for field in fields.iter_mut() {
        *field = read_header_int(r)?;
    }
    let maxval = u32::try_from(fields[2]).map_err(|_| PnmError::BadHeader("maxval too large"))?;
    if maxval == 0 || maxval > 65535 {
        return Err(PnmError::UnsupportedMaxval(maxval));
    }
    Ok(Header {
        width: fields[0] as usize,
        height: fields[1] as usize,
        maxval,
    })
}

/// Reads one whitespace-delimited decimal, skipping `#` comments. Consumes
/// exactly one trailing whitespace byte after the digits.
fn read_header_int<R: Read>(r: &mut R) -> Result<u64, PnmError> {
    let mut byte = [0u8; 1];
    // Skip whitespace and comments.
    loop {
        r.read_exact(&mut byte)?;
        match byte[0] {
            b' ' | b'\t' | b'\r' | b'\n' => continue,
            b'#' => {
                while byte[0] != b'\n' {
                    r.read_exact(&mut byte)?;
                }
            }
            _ => break,
        }
    }
    let mut value: u64 = 0;
    let mut digits = 0;
    loop {
        match byte[0] {
            b'0'..=b'9' => {
                value = value
                    .checked_mul(10)
                    .and_then(|v| v.checked_add((byte[0] - b'0') as u64))
                    .ok_or(PnmError::BadHeader("integer overflow"))?;
                digits += 1;
            }
            b' ' | b'\t' | b'\r' | b'\n' => break,
            _ => return Err(PnmError::BadHeader("unexpected character")),
        }
        r.read_exact(&mut byte)?;
    }
    if digits == 0 {
        return Err(PnmError::BadHeader("missing integer field"));
    }
    Ok(value)
}

fn read_raster<R: Read>(r: &mut R, len: usize) -> Result<Vec<u8>, PnmError> {
    let mut data = vec![0u8; len];
    r.read_exact(&mut data).map_err(|e| {
        if e.kind() == io::ErrorKind::UnexpectedEof {
            PnmError::Truncated
        } else {
            PnmError::Io(e)
        }
    })?;
    Ok(data)
}

fn write_header<W: Write>(
    w: &mut W,
    magic: &str,
    width: usize,
    height: usize,
    maxval: u32,
) -> io::Result<()> {
    write!(w, "{magic}\n{width} {height}\n{maxval}\n")
}

/// Writes an 8-bit grayscale image as binary PGM.
pub fn write_pgm<W: Write>(w: &mut W, img: &GrayImage) -> io::Result<()> {
    write_header(w, "P5", img.width(), img.height(), 255)?;
    w.write_all(img.data())
}

/// Reads an 8-bit binary PGM.
pub fn read_pgm<R: Read>(r: &mut R) -> Result<GrayImage, PnmError> {
    let h = read_header(r, "P5")?;
    if h.maxval > 255 {
        return Err(PnmError::UnsupportedMaxval(h.maxval));
    }
    let data = read_raster(r, h.width * h.height)?;
    Ok(GrayImage::new(h.width, h.height, data)?)
}

/// Writes a binary (0/255) image as PGM.
pub fn write_binary_pgm<W: Write>(w: &mut W, img: &FilteredImage) -> io::Result<()> {
    write_header(w, "P5", img.width(), img.height(), 255)?;
    w.write_all(img.data())
}

/// Reads a PGM and interprets nonzero pixels as white.
pub fn read_binary_pgm<R: Read>(r: &mut R) -> Result<FilteredImage, PnmError> {
    let gray = read_pgm(r)?;
    let data = gray
        .data()
        .iter()
        .map(|&v| if v != 0 { 255 } else { 0 })
        .collect();
    Ok(FilteredImage::new(gray.width(), gray.height(), data)?)
}

/// Writes a depth image as 16-bit big-endian PGM with maxval 65535.
pub fn write_depth_pgm<W: Write>(w: &mut W, img: &DepthImage) -> io::Result<()> {
    write_header(w, "P5", img.width(), img.height(), 65535)?;
    let mut buf = Vec::with_capacity(img.data().len() * 2);
    for &v in img.data() {
        buf.extend_from_slice(&v.to_be_bytes());
    }
    w.write_all(&buf)
}

/// Reads a 16-bit PGM depth image (values are millimetres).
pub fn read_depth_pgm<R: Read>(r: &mut R) -> Result<DepthImage, PnmError> {
    let h = read_header(r, "P5")?;
    if h.maxval < 256 {
        return Err(PnmError::UnsupportedMaxval(h.maxval));
    }
    let raw = read_raster(r, h.width * h.height * 2)?;
    let data = raw
        .chunks_exact(2)
        .map(|c| u16::from_be_bytes([c[0], c[1]]))
        .collect();
    Ok(DepthImage::new(h.width, h.height, data)?)
}

/// Writes an RGB tactile frame as binary PPM.
pub fn write_ppm<W: Write>(w: &mut W, frame: &TactileFrame) -> io::Result<()> {
    write_header(w, "P6", frame.width(), frame.height(), 255)?;
    w.write_all(frame.data())
}

/// Reads a binary PPM into a tactile frame. Timestamp and unit are not part
/// of the format and must be supplied by the caller.
pub fn read_ppm<R: Read>(
    r: &mut R,
    timestamp_ms: u64,
    unit: SensorUnit,
) -> Result<TactileFrame, PnmError> {
    let h = read_header(r, "P6")?;
    if h.maxval > 255 {
        return Err(PnmError::UnsupportedMaxval(h.maxval));
    }
    let data = read_raster(r, h.width * h.height * 3)?;
    Ok(TactileFrame::new(
        h.width,
        h.height,
        data,
        timestamp_ms,
        unit,
    )?)
}

pub fn write_pgm_file<P: AsRef<Path>>(path: P, img: &GrayImage) -> Result<(), PnmError> {
    let mut buf = Vec::new();
    write_pgm(&mut buf, img)?;
    fs::write(path, buf)?;
    Ok(())
}

pub fn read_pgm_file<P: AsRef<Path>>(path: P) -> Result<GrayImage, PnmError> {
    read_pgm(&mut fs::File::open(path)?)
}

pub fn write_binary_pgm_file<P: AsRef<Path>>(path: P, img: &FilteredImage) -> Result<(), PnmError> {
    let mut buf = Vec::new();
    write_binary_pgm(&mut buf, img)?;
    fs::write(path, buf)?;
    Ok(())
}

pub fn write_depth_pgm_file<P: AsRef<Path>>(path: P, img: &DepthImage) -> Result<(), PnmError> {
    let mut buf = Vec::new();
    write_depth_pgm(&mut buf, img)?;
    fs::write(path, buf)?;
    Ok(())
}

pub fn read_depth_pgm_file<P: AsRef<Path>>(path: P) -> Result<DepthImage, PnmError> {
    read_depth_pgm(&mut fs::File::open(path)?)
}

pub fn write_ppm_file<P: AsRef<Path>>(path: P, frame: &TactileFrame) -> Result<(), PnmError> {
    let mut buf = Vec::new();
    write_ppm(&mut buf, frame)?;
    fs::write(path, buf)?;
    Ok(())
}

pub fn read_ppm_file<P: AsRef<Path>>(
    path: P,
    timestamp_ms: u64,
    unit: SensorUnit,
) -> Result<TactileFrame, PnmError> {
    read_ppm(&mut fs::File::open(path)?, timestamp_ms, unit)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_bytes_are_exact() {
        let img = GrayImage::new(3, 2, vec![0, 10, 20, 30, 40, 50]).unwrap();
        let mut buf = Vec::new();
        write_pgm(&mut buf, &img).unwrap();
        assert_eq!(&buf[..], b"P5\n3 2\n255\n\x00\x0a\x14\x1e\x28\x32");
    }

    #[test]
    fn header_comments_are_skipped() {
        let bytes = b"P5 # a comment\n# another\n 2\t1 # w h\n255\n\x05\x06";
        let img = read_pgm(&mut &bytes[..]).unwrap();
        assert_eq!((img.width(), img.height()), (2, 1));
        assert_eq!(img.data(), &[5, 6]);
    }

    #[test]
    fn wrong_magic_is_rejected() {
        let bytes = b"P6\n1 1\n255\nxyz";
        assert!(matches!(
            read_pgm(&mut &bytes[..]),
            Err(PnmError::BadMagic { .. })
        ));
    }

    #[test]
    fn truncated_raster_is_rejected() {
        let bytes = b"P5\n4 4\n255\n\x00\x01";
        assert!(matches!(
            read_pgm(&mut &bytes[..]),
            Err(PnmError::Truncated)
        ));
    }

    #[test]
    fn depth_round_trip_is_big_endian() {
        let img = DepthImage::new(2, 1, vec![0x1234, 0x0001]).unwrap();
        let mut buf = Vec::new();
        write_depth_pgm(&mut buf, &img).unwrap();
        assert_eq!(&buf[..], b"P5\n2 1\n65535\n\x12\x34\x00\x01");
        let back = read_depth_pgm(&mut &buf[..]).unwrap();
        assert_eq!(back, img);
    }

    #[test]
    fn ppm_round_trip() {
        let frame = TactileFrame::new(2, 2, (0u8..12).collect(), 7, SensorUnit::B).unwrap();
        let mut buf = Vec::new();
        write_ppm(&mut buf, &frame).unwrap();
        let back = read_ppm(&mut &buf[..], 7, SensorUnit::B).unwrap();
        assert_eq!(back, frame);
    }
}
