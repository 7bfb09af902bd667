//! JSON key files.
//!
//! ```json
//! {
//!   "x0": "0.2159", "y0": "0.5738",
//!   "a1": "1.55", "a2": "1.3", "a3": "1.1", "a4": "0.1",
//!   "c0": 0
//! }
//! ```
//!
//! Reals are decimal strings, parsed once with round-to-nearest into
//! binary64, so every reader of the file gets the same bits. An optional
//! `"map"` field selects the map form (`"reconstructed"`, the default, or
//! `"literal"`).

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use chaocipher::hyperchaos::{self, ChaosParams, MapForm};
use chaocipher::CipherKey;
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct KeyFile {
    x0: String,
    y0: String,
    a1: String,
    a2: String,
    a3: String,
    a4: String,
    c0: u8,
    #[serde(default)]
    map: MapForm,
}

fn real(name: &str, text: &str) -> Result<f64, String> {
    let v: f64 = text
        .trim()
        .parse()
        .map_err(|_| format!("{name}: {text:?} is not a decimal number"))?;
    if !v.is_finite() {
        return Err(format!("{name}: {text:?} is not finite"));
    }
    Ok(v)
}

pub fn parse_key(json: &str) -> Result<CipherKey, String> {
    let kf: KeyFile = serde_json::from_str(json).map_err(|e| e.to_string())?;
    let chaos = ChaosParams {
        x0: real("x0", &kf.x0)?,
        y0: real("y0", &kf.y0)?,
        a1: real("a1", &kf.a1)?,
        a2: real("a2", &kf.a2)?,
        a3: real("a3", &kf.a3)?,
        a4: real("a4", &kf.a4)?,
        form: kf.map,
    };
    Ok(CipherKey::new(chaos, kf.c0))
}

pub fn load_key(path: &Path) -> Result<CipherKey, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_key(&text).map_err(|e| format!("{}: {e}", path.display()))
}

/// Prefix examined by [`weakness`].
const PROBE_LEN: usize = 1024;
const MIN_DISTINCT: usize = 64;

/// Why a key is considered weak, if it is. A key is weak when the combined
/// keystream `k1 ^ k2` over the first 1024 positions takes fewer than 64
/// distinct values (an all-zero key gives one). Divergence is not weakness;
/// it is reported separately by the cipher.
pub fn weakness(key: &CipherKey) -> Option<String> {
    let ks = hyperchaos::generate_keystreams(&key.chaos, PROBE_LEN).ok()?;
    let distinct: HashSet<u8> = ks.k1.iter().zip(&ks.k2).map(|(a, b)| a ^ b).collect();
    (distinct.len() < MIN_DISTINCT).then(|| {
        format!(
            "keystream takes only {} distinct values in its first {PROBE_LEN} bytes",
            distinct.len()
        )
    })
}
