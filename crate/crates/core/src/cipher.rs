//! Encryption and decryption pipelines.
//!
//! Encryption:
//!
//! 1. `gv_sum` = sum of all gray values of the plain image
//! 2. Arnold parameters derived from `gv_sum`
//! 3. Arnold scramble (`n` passes)
//! 4. linearize the scrambled image to `s`
//! 5. keystreams `k1`, `k2` of length `M * N * 3`
//! 6. `c[i] = s[i] ^ k1[i] ^ k2[i] ^ c[i - 1]`, with `c[-1]` = `c0`
//!
//! Decryption undoes step 6, then recomputes `gv_sum` from the *scrambled*
//! image it just recovered. The scramble only moves values around, so the
//! sum is the same as the plain image's and the Arnold parameters can be
//! re-derived without any side channel. The ciphertext is therefore a
//! plain image with no header.
//!
//! There is no authentication: decrypting with a wrong key silently yields
//! garbage.

use serde::Serialize;

use crate::arnold::{self, ArnoldParams};
use crate::error::{Error, Result};
use crate::hyperchaos::{self, ChaosParams};
use crate::image::{self, ColorImage};

/// Secret key: the chaotic map's parameters plus the chaining seed `c0`.
///
/// `c0` is key material, never transmitted. Reusing the same key for
/// several images keeps both keystreams identical across them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CipherKey {
    pub chaos: ChaosParams,
    pub c0: u8,
}

impl CipherKey {
    pub const fn new(chaos: ChaosParams, c0: u8) -> Self {
        CipherKey { chaos, c0 }
    }

    /// Reference chaos parameters with `c0 = 0`.
    pub const fn reference() -> Self {
        CipherKey {
            chaos: ChaosParams::REFERENCE,
            c0: 0,
        }
    }

    /// A copy of the key with one component shifted by `delta`. For `c0`
    /// the delta is rounded to an integer and added modulo 256.
    pub fn perturbed(&self, component: KeyComponent, delta: f64) -> CipherKey {
        let mut key = *self;
        let chaos = &mut key.chaos;
        match component {
            KeyComponent::X0 => chaos.x0 += delta,
            KeyComponent::Y0 => chaos.y0 += delta,
            KeyComponent::A1 => chaos.a1 += delta,
            KeyComponent::A2 => chaos.a2 += delta,
            KeyComponent::A3 => chaos.a3 += delta,
            KeyComponent::A4 => chaos.a4 += delta,
            KeyComponent::C0 => {
                let step = delta.round().rem_euclid(256.0) as u8;
                key.c0 = key.c0.wrapping_add(step);
            }
        }
        key
    }
}

/// Names one field of a [`CipherKey`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KeyComponent {
    X0,
    Y0,
    A1,
    A2,
    A3,
    A4,
    C0,
}

impl KeyComponent {
    pub const ALL: [KeyComponent; 7] = [
        KeyComponent::X0,
        KeyComponent::Y0,
        KeyComponent::A1,
        KeyComponent::A2,
        KeyComponent::A3,
        KeyComponent::A4,
        KeyComponent::C0,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KeyComponent::X0 => "x0",
            KeyComponent::Y0 => "y0",
            KeyComponent::A1 => "a1",
            KeyComponent::A2 => "a2",
            KeyComponent::A3 => "a3",
            KeyComponent::A4 => "a4",
            KeyComponent::C0 => "c0",
        }
    }
}

/// Encrypted pixels, same dimensions as the plain image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CipherText {
    image: ColorImage,
}

impl CipherText {
    pub fn new(image: ColorImage) -> Self {
        CipherText { image }
    }

    pub fn image(&self) -> &ColorImage {
        &self.image
    }

    pub fn into_image(self) -> ColorImage {
        self.image
    }
}

impl From<ColorImage> for CipherText {
    fn from(image: ColorImage) -> Self {
        CipherText::new(image)
    }
}

fn check_lengths(a: &[u8], k1: &[u8], k2: &[u8]) -> Result<()> {
    for k in [k1, k2] {
        if k.len() != a.len() {
            return Err(Error::LengthMismatch {
                expected: a.len(),
                actual: k.len(),
            });
        }
    }
    Ok(())
}

/// `c[i] = s[i] ^ k1[i] ^ k2[i] ^ c[i - 1]`, seeded with `c0`.
pub fn cbc_chain(s: &[u8], k1: &[u8], k2: &[u8], c0: u8) -> Result<Vec<u8>> {
    check_lengths(s, k1, k2)?;
    let mut prev = c0;
    Ok(s.iter()
        .zip(k1)
        .zip(k2)
        .map(|((&s, &k1), &k2)| {
            prev ^= s ^ k1 ^ k2;
            prev
        })
        .collect())
}

/// Inverse of [`cbc_chain`]: `s[i] = c[i] ^ k1[i] ^ k2[i] ^ c[i - 1]`.
pub fn cbc_unchain(c: &[u8], k1: &[u8], k2: &[u8], c0: u8) -> Result<Vec<u8>> {
    check_lengths(c, k1, k2)?;
    let mut prev = c0;
    Ok(c.iter()
        .zip(k1)
        .zip(k2)
        .map(|((&c, &k1), &k2)| {
            let s = c ^ k1 ^ k2 ^ prev;
            prev = c;
            s
        })
        .collect())
}

fn require_square(img: &ColorImage) -> Result<()> {
    if !img.is_square() {
        return Err(Error::NonSquare {
            height: img.height(),
            width: img.width(),
        });
    }
    Ok(())
}

/// Encrypts `plain`. See the module docs for the exact pipeline.
pub fn encrypt(plain: &ColorImage, key: &CipherKey) -> Result<CipherText> {
    encrypt_with_params(plain, key).map(|(c, _)| c)
}

/// [`encrypt`], also returning the Arnold parameters that were derived
/// from the plain image.
pub fn encrypt_with_params(
    plain: &ColorImage,
    key: &CipherKey,
) -> Result<(CipherText, ArnoldParams)> {
    require_square(plain)?;
    let params = arnold::derive_params(image::gray_value_sum(plain));
    let scrambled = arnold::scramble(plain, &params)?;
    let s = image::linearize(&scrambled);
    let ks = hyperchaos::generate_keystreams(&key.chaos, s.len())?;
    let c = cbc_chain(&s, &ks.k1, &ks.k2, key.c0)?;
    let image = image::delinearize(&c, plain.height(), plain.width())?;
    Ok((CipherText::new(image), params))
}

pub fn decrypt(cipher: &CipherText, key: &CipherKey) -> Result<ColorImage> {
    decrypt_with_params(cipher, key).map(|(p, _)| p)
}

/// [`decrypt`], also returning the Arnold parameters recovered from the
/// unchained scrambled image.
pub fn decrypt_with_params(
    cipher: &CipherText,
    key: &CipherKey,
) -> Result<(ColorImage, ArnoldParams)> {
    let img = cipher.image();
    require_square(img)?;
    let c = image::linearize(img);
    let ks = hyperchaos::generate_keystreams(&key.chaos, c.len())?;
    let s = cbc_unchain(&c, &ks.k1, &ks.k2, key.c0)?;
    let scrambled = image::delinearize(&s, img.height(), img.width())?;
    // permutation preserves the value multiset, hence gv_sum
    let params = arnold::derive_params(image::gray_value_sum(&scrambled));
    let plain = arnold::unscramble(&scrambled, &params)?;
    Ok((plain, params))
}
