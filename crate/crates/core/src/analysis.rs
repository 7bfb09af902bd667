//! Statistical checks on plain/cipher image pairs.
//!
//! * chi-square of each channel's histogram against a flat one
//! * Pearson correlation of adjacent pixel pairs (horizontal, vertical,
//!   diagonal), sampled with a seeded generator and pooled over channels
//! * Shannon entropy per channel
//! * NPCR: percentage of positions where plain and cipher differ, per
//!   channel. Note this compares plain against cipher, not two ciphertexts
//!   of nearly equal plaintexts.
//! * key sensitivity: percentage of ciphertext bytes that change when one
//!   key component is nudged

use std::fmt::{self, Write as _};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cipher::{self, CipherKey, KeyComponent};
use crate::error::{Error, Result};
use crate::image::{histogram, Channel, ChannelLabel, ColorImage};

pub const DEFAULT_CORRELATION_SAMPLES: usize = 4096;

/// Perturbation used for the real-valued key components.
pub const DEFAULT_KEY_DELTA: f64 = 1e-14;

/// Below this many pixels the expected count per gray level drops under
/// one and chi-square stops being meaningful.
pub const CHI_SQUARE_MIN_PIXELS: usize = 256;

/// `sum (O_i - E_i)^2 / E_i` over the 256 gray levels, with the real-valued
/// expectation `E_i = len / 256`.
pub fn chi_square(ch: &Channel) -> Result<f64> {
    if ch.is_empty() {
        return Err(Error::EmptyChannel);
    }
    let expected = ch.len() as f64 / 256.0;
    Ok(histogram(ch)
        .iter()
        .map(|&o| {
            let diff = o as f64 - expected;
            diff * diff / expected
        })
        .sum())
}

/// Shannon entropy in bits per symbol. Zero for an empty channel.
pub fn shannon_entropy(ch: &Channel) -> f64 {
    if ch.is_empty() {
        return 0.0;
    }
    let total = ch.len() as f64;
    let h: f64 = histogram(ch)
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum();
    h.clamp(0.0, 8.0)
}

/// Percentage of positions in `channel` where `p` and `c` differ.
pub fn npcr(p: &ColorImage, c: &ColorImage, channel: ChannelLabel) -> Result<f64> {
    if p.dims() != c.dims() {
        return Err(Error::DimensionMismatch {
            left: p.dims(),
            right: c.dims(),
        });
    }
    let z = channel.index();
    let differing = p
        .as_bytes()
        .iter()
        .zip(c.as_bytes())
        .skip(z)
        .step_by(3)
        .filter(|(a, b)| a != b)
        .count();
    let positions = p.height() * p.width();
    Ok(differing as f64 / positions as f64 * 100.0)
}

/// Percentage of all bytes that differ between two equally sized images.
pub fn byte_difference_rate(a: &ColorImage, b: &ColorImage) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch {
            left: a.dims(),
            right: b.dims(),
        });
    }
    let differing = a
        .as_bytes()
        .iter()
        .zip(b.as_bytes())
        .filter(|(x, y)| x != y)
        .count();
    Ok(differing as f64 / a.len() as f64 * 100.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Horizontal,
    Vertical,
    Diagonal,
}

impl Direction {
    pub const ALL: [Direction; 3] = [
        Direction::Horizontal,
        Direction::Vertical,
        Direction::Diagonal,
    ];

    /// Row and column offset of the neighbor.
    fn offset(self) -> (usize, usize) {
        match self {
            Direction::Horizontal => (0, 1),
            Direction::Vertical => (1, 0),
            Direction::Diagonal => (1, 1),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Horizontal => "horizontal",
            Direction::Vertical => "vertical",
            Direction::Diagonal => "diagonal",
        })
    }
}

/// Draws `sample_count` neighbor pairs `(p, q)` with replacement. Any
/// channel may be picked; `q` is in the same channel as `p`.
pub fn sample_adjacent_pairs(
    img: &ColorImage,
    direction: Direction,
    sample_count: usize,
    seed: u64,
) -> Result<Vec<(u8, u8)>> {
    let (dx, dy) = direction.offset();
    let rows = img.height().saturating_sub(dx);
    let cols = img.width().saturating_sub(dy);
    if rows == 0 || cols == 0 {
        return Err(Error::NoAdjacentPairs);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..sample_count)
        .map(|_| {
            let x = rng.random_range(0..rows);
            let y = rng.random_range(0..cols);
            let z = rng.random_range(0..3);
            (img.get(x, y, z), img.get(x + dx, y + dy, z))
        })
        .collect())
}

/// Pearson correlation coefficient. Errors when either side is constant.
pub fn pearson(pairs: &[(u8, u8)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::NoAdjacentPairs);
    }
    let n = pairs.len() as f64;
    let mean_p = pairs.iter().map(|&(p, _)| f64::from(p)).sum::<f64>() / n;
    let mean_q = pairs.iter().map(|&(_, q)| f64::from(q)).sum::<f64>() / n;
    let (mut cov, mut var_p, mut var_q) = (0.0, 0.0, 0.0);
    for &(p, q) in pairs {
        let dp = f64::from(p) - mean_p;
        let dq = f64::from(q) - mean_q;
        cov += dp * dq;
        var_p += dp * dp;
        var_q += dq * dq;
    }
    if var_p == 0.0 || var_q == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((cov / (var_p.sqrt() * var_q.sqrt())).clamp(-1.0, 1.0))
}

pub fn adjacent_correlation(
    img: &ColorImage,
    direction: Direction,
    sample_count: usize,
    seed: u64,
) -> Result<f64> {
    pearson(&sample_adjacent_pairs(img, direction, sample_count, seed)?)
}

/// Byte-difference percentage between ciphertexts of `plain` under `key`
/// and under `key` with `component` shifted by `delta`.
pub fn key_sensitivity(
    plain: &ColorImage,
    key: &CipherKey,
    component: KeyComponent,
    delta: f64,
) -> Result<f64> {
    let base = cipher::encrypt(plain, key)?;
    sensitivity_against(plain, base.image(), key, component, delta)
}

fn sensitivity_against(
    plain: &ColorImage,
    base: &ColorImage,
    key: &CipherKey,
    component: KeyComponent,
    delta: f64,
) -> Result<f64> {
    let other = cipher::encrypt(plain, &key.perturbed(component, delta))?;
    byte_difference_rate(base, other.image())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerChannel {
    pub r: f64,
    pub g: f64,
    pub b: f64,
}

impl PerChannel {
    fn try_from_fn(mut f: impl FnMut(ChannelLabel) -> Result<f64>) -> Result<Self> {
        Ok(PerChannel {
            r: f(ChannelLabel::R)?,
            g: f(ChannelLabel::G)?,
            b: f(ChannelLabel::B)?,
        })
    }

    pub fn get(&self, label: ChannelLabel) -> f64 {
        match label {
            ChannelLabel::R => self.r,
            ChannelLabel::G => self.g,
            ChannelLabel::B => self.b,
        }
    }
}

/// One coefficient per direction; `None` where the correlation is
/// undefined (a constant marginal).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerDirection {
    pub horizontal: Option<f64>,
    pub vertical: Option<f64>,
    pub diagonal: Option<f64>,
}

impl PerDirection {
    fn measure(img: &ColorImage, samples: usize, seed: u64) -> Result<Self> {
        let one = |d| match adjacent_correlation(img, d, samples, seed) {
            Ok(r) => Ok(Some(r)),
            Err(Error::ZeroVariance) => Ok(None),
            Err(e) => Err(e),
        };
        Ok(PerDirection {
            horizontal: one(Direction::Horizontal)?,
            vertical: one(Direction::Vertical)?,
            diagonal: one(Direction::Diagonal)?,
        })
    }

    pub fn get(&self, d: Direction) -> Option<f64> {
        match d {
            Direction::Horizontal => self.horizontal,
            Direction::Vertical => self.vertical,
            Direction::Diagonal => self.diagonal,
        }
    }
}

/// Percentage of ciphertext bytes changed per perturbed key component;
/// `None` when the perturbed key's trajectory diverged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KeySensitivity {
    pub x0: Option<f64>,
    pub y0: Option<f64>,
    pub a1: Option<f64>,
    pub a2: Option<f64>,
    pub a3: Option<f64>,
    pub a4: Option<f64>,
    pub c0: Option<f64>,
}

impl KeySensitivity {
    pub fn get(&self, component: KeyComponent) -> Option<f64> {
        match component {
            KeyComponent::X0 => self.x0,
            KeyComponent::Y0 => self.y0,
            KeyComponent::A1 => self.a1,
            KeyComponent::A2 => self.a2,
            KeyComponent::A3 => self.a3,
            KeyComponent::A4 => self.a4,
            KeyComponent::C0 => self.c0,
        }
    }

    /// Reals are shifted by `delta`, `c0` by one.
    pub fn measure(plain: &ColorImage, key: &CipherKey, delta: f64) -> Result<Self> {
        let base = cipher::encrypt(plain, key)?;
        let one = |component| {
            let d = if component == KeyComponent::C0 {
                1.0
            } else {
                delta
            };
            match sensitivity_against(plain, base.image(), key, component, d) {
                Ok(v) => Ok(Some(v)),
                Err(Error::Divergence { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        };
        Ok(KeySensitivity {
            x0: one(KeyComponent::X0)?,
            y0: one(KeyComponent::Y0)?,
            a1: one(KeyComponent::A1)?,
            a2: one(KeyComponent::A2)?,
            a3: one(KeyComponent::A3)?,
            a4: one(KeyComponent::A4)?,
            c0: one(KeyComponent::C0)?,
        })
    }
}

/// Chi-square, correlation and entropy of the plain image, for comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlainMetrics {
    pub chi_square: PerChannel,
    pub correlation: PerDirection,
    pub entropy: PerChannel,
}

/// Metrics of a cipher image (top level) with its plain image alongside.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub seed: u64,
    pub correlation_samples: usize,
    pub chi_square: PerChannel,
    pub correlation: PerDirection,
    pub entropy: PerChannel,
    pub npcr: PerChannel,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub key_sensitivity: Option<KeySensitivity>,
    pub plain: PlainMetrics,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisOptions {
    pub seed: u64,
    pub correlation_samples: usize,
    pub key_delta: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            seed: 0,
            correlation_samples: DEFAULT_CORRELATION_SAMPLES,
            key_delta: DEFAULT_KEY_DELTA,
        }
    }
}

/// Runs every check. Key sensitivity is measured only when `key` is given,
/// by re-encrypting `plain`.
pub fn analyze(
    plain: &ColorImage,
    cipher: &ColorImage,
    key: Option<&CipherKey>,
    opts: &AnalysisOptions,
) -> Result<MetricsReport> {
    if plain.dims() != cipher.dims() {
        return Err(Error::DimensionMismatch {
            left: plain.dims(),
            right: cipher.dims(),
        });
    }
    let chi = |img: &ColorImage| PerChannel::try_from_fn(|l| chi_square(&img.channel(l)));
    let ent = |img: &ColorImage| PerChannel::try_from_fn(|l| Ok(shannon_entropy(&img.channel(l))));
    let samples = opts.correlation_samples;
    Ok(MetricsReport {
        seed: opts.seed,
        correlation_samples: samples,
        chi_square: chi(cipher)?,
        correlation: PerDirection::measure(cipher, samples, opts.seed)?,
        entropy: ent(cipher)?,
        npcr: PerChannel::try_from_fn(|l| npcr(plain, cipher, l))?,
        key_sensitivity: key
            .map(|k| KeySensitivity::measure(plain, k, opts.key_delta))
            .transpose()?,
        plain: PlainMetrics {
            chi_square: chi(plain)?,
            correlation: PerDirection::measure(plain, samples, opts.seed)?,
            entropy: ent(plain)?,
        },
    })
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Plain-text tables: chi-square, correlation, entropy, NPCR and key
    /// sensitivity, with original and encrypted rows where both apply.
    pub fn render_table(&self) -> String {
        fn opt(v: Option<f64>) -> String {
            v.map_or_else(|| "undefined".to_string(), |v| format!("{v:.4}"))
        }
        let mut s = String::new();
        let rgb = |s: &mut String, title: &str| {
            let _ = writeln!(s, "{title:<20}{:>12}{:>12}{:>12}", "R", "G", "B");
        };
        let row = |s: &mut String, name: &str, v: &PerChannel, prec: usize| {
            let _ = writeln!(
                s,
                "{name:<20}{:>12.prec$}{:>12.prec$}{:>12.prec$}",
                v.r, v.g, v.b
            );
        };

        rgb(&mut s, "Chi-square");
        row(&mut s, "Original", &self.plain.chi_square, 2);
        row(&mut s, "Encrypted", &self.chi_square, 2);
        s.push('\n');

        let _ = writeln!(
            s,
            "{:<20}{:>12}{:>12}{:>12}",
            "Correlation", "Horizontal", "Vertical", "Diagonal"
        );
        for (name, c) in [
            ("Original", &self.plain.correlation),
            ("Encrypted", &self.correlation),
        ] {
            let _ = writeln!(
                s,
                "{name:<20}{:>12}{:>12}{:>12}",
                opt(c.horizontal),
                opt(c.vertical),
                opt(c.diagonal)
            );
        }
        s.push('\n');

        rgb(&mut s, "Entropy");
        row(&mut s, "Original", &self.plain.entropy, 4);
        row(&mut s, "Encrypted", &self.entropy, 4);
        s.push('\n');

        rgb(&mut s, "NPCR (%)");
        row(&mut s, "Plain vs cipher", &self.npcr, 2);

        if let Some(ks) = &self.key_sensitivity {
            s.push('\n');
            let _ = writeln!(s, "Key sensitivity (% bytes changed)");
            for c in KeyComponent::ALL {
                let v = ks
                    .get(c)
                    .map_or_else(|| "diverged".to_string(), |v| format!("{v:.2}"));
                let _ = writeln!(s, "  {:<18}{v:>12}", c.name());
            }
        }
        s
    }
}
