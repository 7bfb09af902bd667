//! 2D hyper-chaotic map, fractional-part preprocessing and byte
//! quantization into the two keystreams.
//!
//! Floating-point contract: IEEE-754 binary64, each update evaluated in
//! the order written below with no fused multiply-add and no
//! re-association. Encryption and decryption must regenerate identical
//! keystreams, so any change to these expressions changes every ciphertext.
//!
//! Two forms of the map are available (see [`MapForm`]). The default,
//! [`MapForm::Reconstructed`], stays on a bounded attractor for the
//! reference key; [`MapForm::Literal`] escapes to infinity from that key
//! within about 20 steps and is kept for comparison.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which update rule drives the trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapForm {
    /// `x' = a1*y - a2*y^2`, `y' = a4*y - a3*x`.
    ///
    /// Bounded for the reference key, with long-run means of roughly
    /// (-0.170, 0.208) for the raw iterates.
    #[default]
    Reconstructed,
    /// `x' = a1*x - a2*y^2`, `y' = a3*x - a4*y`, evaluated as written.
    Literal,
}

impl MapForm {
    #[inline]
    fn step(self, p: &ChaosParams, x: f64, y: f64) -> (f64, f64) {
        match self {
            MapForm::Reconstructed => (p.a1 * y - p.a2 * (y * y), p.a4 * y - p.a3 * x),
            MapForm::Literal => (p.a1 * x - p.a2 * (y * y), p.a3 * x - p.a4 * y),
        }
    }
}

/// System parameters and initial conditions of the map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChaosParams {
    pub x0: f64,
    pub y0: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    #[serde(default)]
    pub form: MapForm,
}

impl ChaosParams {
    /// Reference configuration: `x0 = 0.2159, y0 = 0.5738, a1 = 1.55,
    /// a2 = 1.3, a3 = 1.1, a4 = 0.1`, default map form.
    pub const REFERENCE: ChaosParams = ChaosParams {
        x0: 0.2159,
        y0: 0.5738,
        a1: 1.55,
        a2: 1.3,
        a3: 1.1,
        a4: 0.1,
        form: MapForm::Reconstructed,
    };

    pub fn with_form(self, form: MapForm) -> Self {
        ChaosParams { form, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("x0", self.x0),
            ("y0", self.y0),
            ("a1", self.a1),
            ("a2", self.a2),
            ("a3", self.a3),
            ("a4", self.a4),
        ];
        match fields.iter().find(|(_, v)| !v.is_finite()) {
            Some(&(name, _)) => Err(Error::NonFiniteParameter { name }),
            None => Ok(()),
        }
    }

    /// Lazily iterates the map from `(x0, y0)`.
    pub fn orbit(&self) -> Orbit {
        Orbit {
            params: *self,
            x: self.x0,
            y: self.y0,
            step: 0,
        }
    }
}

/// Iterator over raw iterates `(x_n, y_n)`, `n >= 1`. Yields an error and
/// then stops once a non-finite value appears.
#[derive(Debug, Clone)]
pub struct Orbit {
    params: ChaosParams,
    x: f64,
    y: f64,
    step: usize,
}

impl Iterator for Orbit {
    type Item = Result<(f64, f64)>;

    fn next(&mut self) -> Option<Self::Item> {
        if !(self.x.is_finite() && self.y.is_finite()) {
            return None;
        }
        let (x, y) = self.params.form.step(&self.params, self.x, self.y);
        self.x = x;
        self.y = y;
        self.step += 1;
        if x.is_finite() && y.is_finite() {
            Some(Ok((x, y)))
        } else {
            Some(Err(Error::Divergence { step: self.step }))
        }
    }
}

/// The raw iterates, before preprocessing.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTrajectory {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl RawTrajectory {
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }
}

/// `count` iterates starting from the first one computed from `(x0, y0)`.
/// No transient is discarded.
pub fn iterate(params: &ChaosParams, count: usize) -> Result<RawTrajectory> {
    params.validate()?;
    let mut xs = Vec::with_capacity(count);
    let mut ys = Vec::with_capacity(count);
    for item in params.orbit().take(count) {
        let (x, y) = item?;
        xs.push(x);
        ys.push(y);
    }
    Ok(RawTrajectory { xs, ys })
}

const PREPROCESS_SCALE: f64 = 1e6;
const QUANTIZE_SCALE: f64 = 1e14;
const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

/// Fractional part of `1e6 * v`, taken as `w - floor(w)` so negative
/// inputs also land in `[0, 1)`.
pub fn preprocess(v: f64) -> f64 {
    let w = PREPROCESS_SCALE * v;
    if w.is_infinite() {
        // |w| >= 2^53 is integral, fractional part zero
        return 0.0;
    }
    let frac = w - w.floor();
    // a tiny negative w rounds w - floor(w) up to exactly 1.0
    if frac >= 1.0 {
        BELOW_ONE
    } else {
        frac
    }
}

/// `floor(u * 1e14) mod 256`. The product stays below 2^53, so the
/// integer part is exact.
pub fn quantize(u: f64) -> u8 {
    debug_assert!((0.0..1.0).contains(&u), "quantize input {u} outside [0, 1)");
    ((u * QUANTIZE_SCALE).floor() as u64 % 256) as u8
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeystreamPair {
    pub k1: Vec<u8>,
    pub k2: Vec<u8>,
}

impl KeystreamPair {
    pub fn len(&self) -> usize {
        self.k1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k1.is_empty()
    }
}

/// Runs the map for `length` steps and quantizes each preprocessed
/// coordinate into a byte. The dynamics always continue from the raw
/// values.
pub fn generate_keystreams(params: &ChaosParams, length: usize) -> Result<KeystreamPair> {
    params.validate()?;
    let mut k1 = Vec::with_capacity(length);
    let mut k2 = Vec::with_capacity(length);
    for item in params.orbit().take(length) {
        let (x, y) = item?;
        k1.push(quantize(preprocess(x)));
        k2.push(quantize(preprocess(y)));
    }
    Ok(KeystreamPair { k1, k2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn literal_reference() -> ChaosParams {
        ChaosParams::REFERENCE.with_form(MapForm::Literal)
    }

    #[test]
    fn origin_is_fixed() {
        let p = ChaosParams {
            x0: 0.0,
            y0: 0.0,
            ..ChaosParams::REFERENCE
        };
        for form in [MapForm::Reconstructed, MapForm::Literal] {
            let t = iterate(&p.with_form(form), 100).unwrap();
            assert!(t.xs.iter().chain(&t.ys).all(|&v| v == 0.0));
            let ks = generate_keystreams(&p.with_form(form), 100).unwrap();
            assert!(ks.k1.iter().chain(&ks.k2).all(|&b| b == 0));
        }
    }

    #[test]
    fn first_literal_iterate() {
        // 1.55*0.2159 - 1.3*0.5738^2 = 0.334645 - 0.428020372 = -0.093375372
        // 1.1*0.2159 - 0.1*0.5738   = 0.23749  - 0.05738     =  0.18011
        let t = iterate(&literal_reference(), 1).unwrap();
        assert_eq!(t.len(), 1);
        assert!((t.xs[0] - -0.093375372).abs() < 1e-12);
        assert!((t.ys[0] - 0.18011).abs() < 1e-12);
        assert_eq!(format!("{:.5}", t.xs[0]), "-0.09338");
        assert_eq!(format!("{:.5}", t.ys[0]), "0.18011");
    }

    #[test]
    fn first_reconstructed_iterate() {
        // 1.55*0.5738 - 1.3*0.5738^2 = 0.88939 - 0.428020372 = 0.461369628
        // 0.1*0.5738 - 1.1*0.2159   = 0.05738 - 0.23749     = -0.18011
        let t = iterate(&ChaosParams::REFERENCE, 1).unwrap();
        assert!((t.xs[0] - 0.461369628).abs() < 1e-12);
        assert!((t.ys[0] - -0.18011).abs() < 1e-12);
    }

    #[test]
    fn literal_form_diverges_from_reference_key() {
        match iterate(&literal_reference(), 1000) {
            Err(Error::Divergence { step }) => assert!(step < 100, "diverged late: {step}"),
            other => panic!("expected divergence, got {other:?}"),
        }
        assert!(matches!(
            generate_keystreams(&literal_reference(), 1000),
            Err(Error::Divergence { .. })
        ));
    }

    #[test]
    fn non_finite_parameters_rejected() {
        let p = ChaosParams {
            a3: f64::NAN,
            ..ChaosParams::REFERENCE
        };
        assert!(matches!(
            iterate(&p, 1),
            Err(Error::NonFiniteParameter { name: "a3" })
        ));
        let p = ChaosParams {
            x0: f64::INFINITY,
            ..ChaosParams::REFERENCE
        };
        assert!(matches!(
            generate_keystreams(&p, 1),
            Err(Error::NonFiniteParameter { name: "x0" })
        ));
    }

    #[test]
    fn iterate_returns_exact_count_and_matches_orbit() {
        let t = iterate(&ChaosParams::REFERENCE, 257).unwrap();
        assert_eq!(t.xs.len(), 257);
        assert_eq!(t.ys.len(), 257);
        let (x, y) = ChaosParams::REFERENCE.orbit().nth(256).unwrap().unwrap();
        assert_eq!((t.xs[256], t.ys[256]), (x, y));
    }

    #[test]
    fn preprocess_examples() {
        assert_eq!(preprocess(0.5), 0.0);
        assert_eq!(preprocess(-0.25), 0.0);
        assert_eq!(preprocess(0.0), 0.0);
        assert!((preprocess(0.1234567891) - 0.7891).abs() < 1e-9);
        // -1e-7 * 1e6 = -0.1 -> frac 0.9
        assert!((preprocess(-1e-7) - 0.9).abs() < 1e-12);
        assert!(preprocess(-1e-30) < 1.0);
    }

    /// Exact fractional part of `1e6 * v` for a finite double `v` in
    /// [-1, 1], via integer arithmetic on its mantissa/exponent.
    fn exact_frac_oracle(v: f64) -> f64 {
        let bits = v.to_bits();
        let negative = bits >> 63 == 1;
        let exp = ((bits >> 52) & 0x7ff) as i32;
        let frac_bits = bits & ((1u64 << 52) - 1);
        let (mant, e) = if exp == 0 {
            (frac_bits, -1074)
        } else {
            (frac_bits | (1u64 << 52), exp - 1075)
        };
        assert!(e < 0 && e > -128, "oracle covers moderate magnitudes only");
        let shift = (-e) as u32;
        let num = mant as u128 * 1_000_000u128;
        let denom = 1u128 << shift;
        let mut rem = num % denom;
        if negative && rem != 0 {
            rem = denom - rem;
        }
        // rem / 2^shift rounded to binary64
        rem as f64 / denom as f64
    }

    #[test]
    fn preprocess_close_to_exact_rational() {
        for &v in &[
            0.1234567891,
            -0.3141592653,
            0.2159,
            0.5738,
            -0.9999,
            0.000123,
        ] {
            let got = preprocess(v);
            let want = exact_frac_oracle(v);
            // one rounding of 1e6*v: error at most half an ulp of ~1e6,
            // measured around the circle (0.99999... and 0 are neighbors)
            let d = (got - want).abs();
            assert!(d.min(1.0 - d) < 1.2e-10, "{v}: {got} vs {want}");
        }
    }

    #[test]
    fn quantize_examples() {
        assert_eq!(quantize(0.0), 0);
        assert_eq!(quantize(511e-14), 255);
        assert_eq!(quantize(256e-14), 0);
        assert_eq!(quantize(BELOW_ONE), (99_999_999_999_999u64 % 256) as u8);
    }

    #[test]
    fn keystreams_are_deterministic() {
        let a = generate_keystreams(&ChaosParams::REFERENCE, 10_000).unwrap();
        let b = generate_keystreams(&ChaosParams::REFERENCE, 10_000).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.k1.len(), 10_000);
        assert_eq!(a.k2.len(), 10_000);
    }

    #[test]
    fn keystreams_follow_raw_trajectory() {
        let t = iterate(&ChaosParams::REFERENCE, 5000).unwrap();
        let ks = generate_keystreams(&ChaosParams::REFERENCE, 5000).unwrap();
        for i in 0..5000 {
            assert_eq!(ks.k1[i], quantize(preprocess(t.xs[i])));
            assert_eq!(ks.k2[i], quantize(preprocess(t.ys[i])));
        }
    }

    #[test]
    fn preprocessing_never_feeds_back() {
        // interleave raw steps with keystream generation of growing prefixes
        let mut orbit = ChaosParams::REFERENCE.orbit();
        let reference = iterate(&ChaosParams::REFERENCE, 1000).unwrap();
        for i in 0..1000 {
            let (x, y) = orbit.next().unwrap().unwrap();
            if i % 100 == 0 {
                let ks = generate_keystreams(&ChaosParams::REFERENCE, i + 1).unwrap();
                assert_eq!(ks.k1[i], quantize(preprocess(x)));
            }
            assert_eq!((x, y), (reference.xs[i], reference.ys[i]));
        }
    }

    #[test]
    fn keystream_bytes_roughly_uniform() {
        let n = 1_000_000;
        let ks = generate_keystreams(&ChaosParams::REFERENCE, n).unwrap();
        for stream in [&ks.k1, &ks.k2] {
            let mut counts = [0usize; 256];
            for &b in stream.iter() {
                counts[b as usize] += 1;
            }
            let max = *counts.iter().max().unwrap();
            assert!(max * 100 <= n, "a byte value occupies {max} of {n} samples");
        }
    }

    #[test]
    fn orbit_stops_after_divergence() {
        let mut orbit = literal_reference().orbit();
        let mut saw_error = false;
        for item in orbit.by_ref() {
            if item.is_err() {
                saw_error = true;
                break;
            }
        }
        assert!(saw_error);
        assert!(orbit.next().is_none());
    }

    proptest! {
        #[test]
        fn preprocess_in_unit_interval(v in prop_oneof![
            -1e300f64..1e300,
            -1e6f64..1e6,
            -1.0f64..1.0,
            -1e-12f64..1e-12,
            any::<f64>().prop_filter("finite", |v| v.is_finite()),
        ]) {
            let u = preprocess(v);
            prop_assert!((0.0..1.0).contains(&u), "{} -> {}", v, u);
        }

        #[test]
        fn quantize_total_on_unit_interval(u in 0.0f64..1.0) {
            // u8 by construction; the check is that it never panics and
            // agrees with integer arithmetic on the floored product
            let q = quantize(u);
            prop_assert_eq!(q as u64, (u * 1e14).floor() as u64 % 256);
        }
    }
}
