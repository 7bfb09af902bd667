//! Pixel model, canonical 3D <-> 1D scan order and lossless file I/O.
//!
//! Pixels are addressed as `(x, y, z)`: row `x`, column `y`, channel `z`
//! (0 = R, 1 = G, 2 = B). The canonical linear index is
//! `(x * width + y) * 3 + z`, i.e. row-major over pixels with the channel
//! varying fastest. This is also the in-memory layout, so linearizing is a
//! copy.
//!
//! Only lossless 8-bit RGB containers are accepted: binary PPM (`P6`) and
//! non-interlaced PNG. A lossy re-encode would destroy ciphertext.

use std::fmt;
use std::fs;
use std::io::Cursor;
use std::path::Path;

use crate::error::{Error, Result};

pub const CHANNELS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelLabel {
    R,
    G,
    B,
}

impl ChannelLabel {
    pub const ALL: [ChannelLabel; 3] = [ChannelLabel::R, ChannelLabel::G, ChannelLabel::B];

    /// Channel index `z` in the image grid.
    pub fn index(self) -> usize {
        match self {
            ChannelLabel::R => 0,
            ChannelLabel::G => 1,
            ChannelLabel::B => 2,
        }
    }
}

impl fmt::Display for ChannelLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChannelLabel::R => "R",
            ChannelLabel::G => "G",
            ChannelLabel::B => "B",
        })
    }
}

/// One color plane, `height * width` gray values in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Channel {
    pub label: ChannelLabel,
    pub values: Vec<u8>,
}

impl Channel {
    pub fn new(label: ChannelLabel, values: Vec<u8>) -> Self {
        Channel { label, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn histogram(&self) -> [u64; 256] {
        histogram(self)
    }
}

/// An `height x width x 3` grid of 8-bit gray values.
#[derive(Clone, PartialEq, Eq)]
pub struct ColorImage {
    height: usize,
    width: usize,
    data: Vec<u8>,
}

impl fmt::Debug for ColorImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ColorImage")
            .field("height", &self.height)
            .field("width", &self.width)
            .finish_non_exhaustive()
    }
}

fn checked_len(height: usize, width: usize) -> Result<usize> {
    if height == 0 || width == 0 {
        return Err(Error::EmptyImage { height, width });
    }
    height
        .checked_mul(width)
        .and_then(|p| p.checked_mul(CHANNELS))
        .ok_or_else(|| Error::MalformedImage(format!("{height}x{width} image is too large")))
}

impl ColorImage {
    /// All-black image.
    pub fn new(height: usize, width: usize) -> Result<Self> {
        let len = checked_len(height, width)?;
        Ok(ColorImage {
            height,
            width,
            data: vec![0; len],
        })
    }

    /// Builds an image from `f(x, y, z)`.
    pub fn from_fn(
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize, usize) -> u8,
    ) -> Result<Self> {
        let mut img = ColorImage::new(height, width)?;
        for x in 0..height {
            for y in 0..width {
                for z in 0..CHANNELS {
                    let i = img.index_of(x, y, z);
                    img.data[i] = f(x, y, z);
                }
            }
        }
        Ok(img)
    }

    /// Wraps a byte buffer already in canonical scan order.
    pub fn from_bytes(height: usize, width: usize, data: Vec<u8>) -> Result<Self> {
        let expected = checked_len(height, width)?;
        if data.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                actual: data.len(),
            });
        }
        Ok(ColorImage {
            height,
            width,
            data,
        })
    }

    /// Number of rows, `M`.
    pub fn height(&self) -> usize {
        self.height
    }

    /// Number of columns, `N`.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn is_square(&self) -> bool {
        self.height == self.width
    }

    /// Total number of stored values, `M * N * 3`.
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn index_of(&self, x: usize, y: usize, z: usize) -> usize {
        debug_assert!(x < self.height && y < self.width && z < CHANNELS);
        (x * self.width + y) * CHANNELS + z
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> u8 {
        self.data[self.index_of(x, y, z)]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, z: usize, value: u8) {
        let i = self.index_of(x, y, z);
        self.data[i] = value;
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.data
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.data
    }

    pub fn channel(&self, label: ChannelLabel) -> Channel {
        let values = self
            .data
            .iter()
            .skip(label.index())
            .step_by(CHANNELS)
            .copied()
            .collect();
        Channel::new(label, values)
    }

    pub fn gray_value_sum(&self) -> u64 {
        gray_value_sum(self)
    }
}

/// Flattens the image in canonical scan order.
pub fn linearize(img: &ColorImage) -> Vec<u8> {
    img.data.clone()
}

/// Inverse of [`linearize`].
pub fn delinearize(seq: &[u8], height: usize, width: usize) -> Result<ColorImage> {
    ColorImage::from_bytes(height, width, seq.to_vec())
}

/// Exact sum of every gray value in the image.
pub fn gray_value_sum(img: &ColorImage) -> u64 {
    img.data.iter().map(|&v| u64::from(v)).sum()
}

/// Occurrence count of each gray level.
pub fn histogram(ch: &Channel) -> [u64; 256] {
    let mut counts = [0u64; 256];
    for &v in &ch.values {
        counts[v as usize] += 1;
    }
    counts
}

/// What to do with a fourth (alpha) channel when loading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AlphaPolicy {
    #[default]
    Reject,
    Strip,
}

/// Lossless containers understood by [`load_image`] and [`save_image`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Container {
    Ppm,
    Png,
}

impl Container {
    /// Picks the output container from a file extension. Unknown or missing
    /// extensions fall back to PPM; lossy extensions are refused.
    pub fn from_path(path: &Path) -> Result<Container> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        match ext.as_deref() {
            Some("png") => Ok(Container::Png),
            Some("jpg" | "jpeg" | "jpe" | "jfif") => Err(Error::LossyFormat("JPEG")),
            Some("webp") => Err(Error::LossyFormat("WebP")),
            _ => Ok(Container::Ppm),
        }
    }
}

/// Reads a PPM or PNG file, detected by its magic bytes.
pub fn load_image(path: impl AsRef<Path>, alpha: AlphaPolicy) -> Result<ColorImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode_image(&bytes, alpha)
}

/// Writes `img` losslessly; the container follows the file extension.
pub fn save_image(img: &ColorImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = match Container::from_path(path)? {
        Container::Ppm => encode_ppm(img),
        Container::Png => encode_png(img)?,
    };
    fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn decode_image(bytes: &[u8], alpha: AlphaPolicy) -> Result<ColorImage> {
    const PNG_MAGIC: &[u8] = b"\x89PNG\r\n\x1a\n";
    match bytes {
        [b'P', b'6', ..] => decode_ppm(bytes),
        [b'P', b'1'..=b'7', ..] => Err(Error::UnsupportedFormat(format!(
            "netpbm variant P{} (only binary RGB P6 is supported)",
            bytes[1] as char
        ))),
        _ if bytes.starts_with(PNG_MAGIC) => decode_png(bytes, alpha),
        [0xFF, 0xD8, 0xFF, ..] => Err(Error::LossyFormat("JPEG")),
        [b'R', b'I', b'F', b'F', _, _, _, _, b'W', b'E', b'B', b'P', ..] => {
            Err(Error::LossyFormat("WebP"))
        }
        [] => Err(Error::MalformedImage("empty file".into())),
        _ => Err(Error::UnsupportedFormat(
            "unrecognized file signature".into(),
        )),
    }
}

/// Binary PPM: `P6`, width, height, maxval 255, then raw RGB triplets.
pub fn encode_ppm(img: &ColorImage) -> Vec<u8> {
    let header = format!("P6\n{} {}\n255\n", img.width(), img.height());
    let mut out = Vec::with_capacity(header.len() + img.len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(img.as_bytes());
    out
}

pub fn decode_ppm(bytes: &[u8]) -> Result<ColorImage> {
    let mut pos = 0usize;
    if !bytes.starts_with(b"P6") {
        return Err(Error::UnsupportedFormat("not a binary PPM".into()));
    }
    pos += 2;
    let width = ppm_header_int(bytes, &mut pos)?;
    let height = ppm_header_int(bytes, &mut pos)?;
    let maxval = ppm_header_int(bytes, &mut pos)?;
    match maxval {
        255 => {}
        256..=65535 => return Err(Error::BitDepth(16)),
        _ => {
            return Err(Error::UnsupportedFormat(format!(
                "PPM maxval {maxval} (only 255 is supported)"
            )))
        }
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(Error::MalformedImage("PPM header not terminated".into())),
    }
    let len = checked_len(height, width)?;
    let raster = bytes
        .get(pos..pos + len)
        .ok_or_else(|| {
            Error::MalformedImage(format!(
                "PPM raster truncated: {} of {len} bytes",
                bytes.len().saturating_sub(pos)
            ))
        })?
        .to_vec();
    ColorImage::from_bytes(height, width, raster)
}

fn ppm_header_int(bytes: &[u8], pos: &mut usize) -> Result<usize> {
    loop {
        match bytes.get(*pos) {
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(b'#') => {
                while let Some(&b) = bytes.get(*pos) {
                    *pos += 1;
                    if b == b'\n' || b == b'\r' {
                        break;
                    }
                }
            }
            Some(_) => break,
            None => return Err(Error::MalformedImage("PPM header truncated".into())),
        }
    }
    let start = *pos;
    while bytes.get(*pos).is_some_and(u8::is_ascii_digit) {
        *pos += 1;
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::MalformedImage("bad number in PPM header".into()))
}

pub fn encode_png(img: &ColorImage) -> Result<Vec<u8>> {
    let too_big = || Error::MalformedImage("image too large for PNG".into());
    let width = u32::try_from(img.width()).map_err(|_| too_big())?;
    let height = u32::try_from(img.height()).map_err(|_| too_big())?;
    let mut out = Vec::new();
    let mut encoder = png::Encoder::new(&mut out, width, height);
    encoder.set_color(png::ColorType::Rgb);
    encoder.set_depth(png::BitDepth::Eight);
    let png_err = |e: png::EncodingError| Error::MalformedImage(format!("PNG encoding: {e}"));
    let mut writer = encoder.write_header().map_err(png_err)?;
    writer.write_image_data(img.as_bytes()).map_err(png_err)?;
    writer.finish().map_err(png_err)?;
    Ok(out)
}

pub fn decode_png(bytes: &[u8], alpha: AlphaPolicy) -> Result<ColorImage> {
    let png_err = |e: png::DecodingError| Error::MalformedImage(format!("PNG decoding: {e}"));
    let decoder = png::Decoder::new(Cursor::new(bytes));
    let mut reader = decoder.read_info().map_err(png_err)?;
    let info = reader.info();
    if info.bit_depth != png::BitDepth::Eight {
        return Err(Error::BitDepth(info.bit_depth as u32));
    }
    if info.interlaced {
        return Err(Error::UnsupportedFormat("interlaced PNG".into()));
    }
    let has_alpha = match info.color_type {
        png::ColorType::Rgb => false,
        png::ColorType::Rgba => true,
        other => {
            return Err(Error::UnsupportedFormat(format!(
                "PNG color type {other:?} (only RGB is supported)"
            )))
        }
    };
    if has_alpha && alpha == AlphaPolicy::Reject {
        return Err(Error::AlphaChannel);
    }
    let (width, height) = (info.width as usize, info.height as usize);
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::MalformedImage("PNG too large".into()))?;
    let mut buf = vec![0; size];
    let frame = reader.next_frame(&mut buf).map_err(png_err)?;
    buf.truncate(frame.buffer_size());
    let data = if has_alpha {
        buf.chunks_exact(4)
            .flat_map(|px| [px[0], px[1], px[2]])
            .collect()
    } else {
        buf
    };
    ColorImage::from_bytes(height, width, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ppm(width: usize, height: usize, raster: &[u8]) -> Vec<u8> {
        let mut v = format!("P6\n{width} {height}\n255\n").into_bytes();
        v.extend_from_slice(raster);
        v
    }

    #[test]
    fn black_ppm_decodes_to_zeros() {
        let img = decode_image(&ppm(2, 2, &[0; 12]), AlphaPolicy::Reject).unwrap();
        assert_eq!(img.dims(), (2, 2));
        assert_eq!(img.as_bytes(), &[0; 12]);
    }

    #[test]
    fn single_red_pixel() {
        let img = decode_image(&ppm(1, 1, &[255, 0, 0]), AlphaPolicy::Reject).unwrap();
        assert_eq!(img.get(0, 0, 0), 255);
        assert_eq!(img.get(0, 0, 1), 0);
        assert_eq!(img.get(0, 0, 2), 0);
    }

    #[test]
    fn ppm_header_comments_and_width_height_order() {
        let mut bytes = b"P6 # comment\n3 # w\n1\n255\n".to_vec();
        bytes.extend_from_slice(&[1, 2, 3, 4, 5, 6, 7, 8, 9]);
        let img = decode_ppm(&bytes).unwrap();
        assert_eq!(img.dims(), (1, 3));
        assert_eq!(img.get(0, 2, 0), 7);
    }

    #[test]
    fn ppm_rejects_truncation_and_deep_samples() {
        assert!(matches!(
            decode_ppm(&ppm(2, 2, &[0; 11])),
            Err(Error::MalformedImage(_))
        ));
        let deep = b"P6\n1 1\n65535\n\0\0\0\0\0\0".to_vec();
        assert!(matches!(decode_ppm(&deep), Err(Error::BitDepth(16))));
        assert!(matches!(
            decode_image(b"P3\n1 1\n255\n0 0 0\n", AlphaPolicy::Reject),
            Err(Error::UnsupportedFormat(_))
        ));
    }

    #[test]
    fn jpeg_is_refused() {
        let jpeg = [0xFF, 0xD8, 0xFF, 0xE0, 0, 16, b'J', b'F', b'I', b'F'];
        assert!(matches!(
            decode_image(&jpeg, AlphaPolicy::Reject),
            Err(Error::LossyFormat("JPEG"))
        ));
        assert!(matches!(
            Container::from_path(Path::new("out.JPG")),
            Err(Error::LossyFormat(_))
        ));
        assert_eq!(
            Container::from_path(Path::new("out")).unwrap(),
            Container::Ppm
        );
        assert_eq!(
            Container::from_path(Path::new("a.PNG")).unwrap(),
            Container::Png
        );
    }

    fn rgba_png() -> Vec<u8> {
        let mut out = Vec::new();
        let mut enc = png::Encoder::new(&mut out, 2, 1);
        enc.set_color(png::ColorType::Rgba);
        enc.set_depth(png::BitDepth::Eight);
        let mut w = enc.write_header().unwrap();
        w.write_image_data(&[1, 2, 3, 9, 4, 5, 6, 9]).unwrap();
        w.finish().unwrap();
        out
    }

    #[test]
    fn alpha_rejected_or_stripped() {
        let bytes = rgba_png();
        assert!(matches!(
            decode_image(&bytes, AlphaPolicy::Reject),
            Err(Error::AlphaChannel)
        ));
        let img = decode_image(&bytes, AlphaPolicy::Strip).unwrap();
        assert_eq!(img.as_bytes(), &[1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn sixteen_bit_png_rejected() {
        let mut out = Vec::new();
        let mut enc = png::Encoder::new(&mut out, 1, 1);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Sixteen);
        let mut w = enc.write_header().unwrap();
        w.write_image_data(&[0; 6]).unwrap();
        w.finish().unwrap();
        assert!(matches!(
            decode_image(&out, AlphaPolicy::Reject),
            Err(Error::BitDepth(16))
        ));
    }

    #[test]
    fn linearize_scan_order() {
        let one = ColorImage::from_bytes(1, 1, vec![7, 8, 9]).unwrap();
        assert_eq!(linearize(&one), vec![7, 8, 9]);

        // 1x2: pixel (0,0) = (1,2,3), pixel (0,1) = (4,5,6)
        let pixels = [[1u8, 2, 3], [4, 5, 6]];
        let img = ColorImage::from_fn(1, 2, |_, y, z| pixels[y][z]).unwrap();
        assert_eq!(linearize(&img), vec![1, 2, 3, 4, 5, 6]);

        // 2x2: row-major over (x, y), channel fastest
        let img = ColorImage::from_fn(2, 2, |x, y, z| (x * 100 + y * 10 + z) as u8).unwrap();
        assert_eq!(
            linearize(&img),
            vec![0, 1, 2, 10, 11, 12, 100, 101, 102, 110, 111, 112]
        );
    }

    #[test]
    fn delinearize_cases() {
        let img = delinearize(&[7, 8, 9], 1, 1).unwrap();
        assert_eq!(
            (img.get(0, 0, 0), img.get(0, 0, 1), img.get(0, 0, 2)),
            (7, 8, 9)
        );
        let black = delinearize(&[0; 6], 1, 2).unwrap();
        assert_eq!(black, ColorImage::new(1, 2).unwrap());
        assert!(matches!(
            delinearize(&[0; 5], 1, 2),
            Err(Error::LengthMismatch {
                expected: 6,
                actual: 5
            })
        ));
        assert!(matches!(
            ColorImage::new(0, 3),
            Err(Error::EmptyImage { .. })
        ));
    }

    #[test]
    fn gray_value_sum_cases() {
        assert_eq!(ColorImage::new(4, 4).unwrap().gray_value_sum(), 0);
        let white = ColorImage::from_bytes(1, 1, vec![255; 3]).unwrap();
        assert_eq!(gray_value_sum(&white), 765);
    }

    #[test]
    fn histogram_cases() {
        let h = histogram(&Channel::new(ChannelLabel::R, vec![5; 4]));
        assert_eq!(h[5], 4);
        assert_eq!(h.iter().sum::<u64>(), 4);
        let ramp = Channel::new(ChannelLabel::G, (0..=255).collect());
        assert!(ramp.histogram().iter().all(|&c| c == 1));
    }

    #[test]
    fn channel_extraction() {
        let img = ColorImage::from_fn(2, 3, |x, y, z| (x * 30 + y * 3 + z) as u8).unwrap();
        let g = img.channel(ChannelLabel::G);
        assert_eq!(g.values, vec![1, 4, 7, 31, 34, 37]);
    }

    fn arb_image(max: usize) -> impl Strategy<Value = ColorImage> {
        (1..=max, 1..=max).prop_flat_map(|(h, w)| {
            proptest::collection::vec(any::<u8>(), h * w * 3)
                .prop_map(move |data| ColorImage::from_bytes(h, w, data).unwrap())
        })
    }

    proptest! {
        #[test]
        fn linearize_round_trip(img in arb_image(12)) {
            let back = delinearize(&linearize(&img), img.height(), img.width()).unwrap();
            prop_assert_eq!(back, img);
        }

        #[test]
        fn codecs_round_trip(img in arb_image(16)) {
            let ppm = decode_image(&encode_ppm(&img), AlphaPolicy::Reject).unwrap();
            prop_assert_eq!(&ppm, &img);
            let png = decode_image(&encode_png(&img).unwrap(), AlphaPolicy::Reject).unwrap();
            prop_assert_eq!(&png, &img);
        }

        #[test]
        fn histogram_counts_sum_to_pixels(img in arb_image(12)) {
            for label in ChannelLabel::ALL {
                let ch = img.channel(label);
                prop_assert_eq!(ch.len(), img.height() * img.width());
                prop_assert_eq!(ch.histogram().iter().sum::<u64>() as usize, ch.len());
            }
        }
    }
}
