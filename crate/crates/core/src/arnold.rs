//! 3D Arnold transform over pixel positions.
//!
//! One application maps `(x, y, z)` on an `M x M x 3` grid to
//!
//! ```text
//! x' = (x + a*y)            mod M
//! y' = (b*x + (a*b + 1)*y)  mod M
//! z' = (c*x + d*y + z)      mod 3
//! ```
//!
//! The upper 2x2 block has determinant 1, so the map is a bijection on a
//! square grid and its inverse is again an integer matrix. The `z'` row
//! moves pixels between color planes.
//!
//! [`scramble`] reads the map as a permutation of positions applied to the
//! whole image at once (the pixel at `p` moves to `map(p)`), repeated `n`
//! times. It is not an in-place, pixel-by-pixel update.

use crate::error::{Error, Result};
use crate::image::{ColorImage, CHANNELS};

/// Control parameters of the transform: the four matrix entries and the
/// number of iterations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub struct ArnoldParams {
    pub a: u32,
    pub b: u32,
    pub c: u32,
    pub d: u32,
    pub n: u32,
}

impl ArnoldParams {
    pub const fn new(a: u32, b: u32, c: u32, d: u32, n: u32) -> Self {
        ArnoldParams { a, b, c, d, n }
    }

    /// Same matrix, different iteration count.
    pub const fn with_iterations(self, n: u32) -> Self {
        ArnoldParams { n, ..self }
    }
}

/// Derives the parameters from the gray-value sum of the plain image.
///
/// Each field reduces the same sum by its own modulus, giving
/// `a in [13, 109]`, `b in [23, 81]`, `c in [17, 95]`, `d in [37, 79]`,
/// `n in [7, 37]`.
pub fn derive_params(gv_sum: u64) -> ArnoldParams {
    let m = |modulus: u64| (gv_sum % modulus) as u32;
    ArnoldParams {
        a: 13 + m(97),
        b: 23 + m(59),
        c: 17 + m(79),
        d: 37 + m(43),
        n: 7 + m(31),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Position {
    pub x: usize,
    pub y: usize,
    pub z: usize,
}

impl Position {
    pub const fn new(x: usize, y: usize, z: usize) -> Self {
        Position { x, y, z }
    }
}

/// Matrix entries pre-reduced for one grid size, so each step only needs
/// small products.
#[derive(Debug, Clone, Copy)]
struct Reduced {
    size: u64,
    a: u64,
    b: u64,
    ab1: u64,
    c3: u64,
    d3: u64,
}

impl Reduced {
    fn new(params: &ArnoldParams, size: usize) -> Self {
        let size = size as u64;
        let (a, b) = (u64::from(params.a), u64::from(params.b));
        Reduced {
            size,
            a: a % size,
            b: b % size,
            ab1: (a * b + 1) % size,
            c3: u64::from(params.c) % 3,
            d3: u64::from(params.d) % 3,
        }
    }

    #[inline]
    fn forward(&self, x: u64, y: u64, z: u64) -> (u64, u64, u64) {
        let m = self.size;
        let nx = (x + self.a * y) % m;
        let ny = (self.b * x + self.ab1 * y) % m;
        let nz = (self.c3 * (x % 3) + self.d3 * (y % 3) + z) % 3;
        (nx, ny, nz)
    }

    /// Inverse of `forward`. Negative terms are handled by adding the
    /// modulus complement, so every result lands in `[0, modulus)`.
    #[inline]
    fn inverse(&self, x: u64, y: u64, z: u64) -> (u64, u64, u64) {
        let m = self.size;
        // x = (a*b+1)*x' - a*y',  y = -b*x' + y'
        let px = (self.ab1 * x + (m - self.a) * y) % m;
        let py = ((m - self.b) * x + y) % m;
        let shift = (self.c3 * (px % 3) + self.d3 * (py % 3)) % 3;
        let pz = (z + 3 - shift) % 3;
        (px, py, pz)
    }
}

fn require_square(height: usize, width: usize) -> Result<usize> {
    if height != width {
        return Err(Error::NonSquare { height, width });
    }
    Ok(height)
}

fn check_bounds(p: Position, size: usize) -> Result<()> {
    if p.x >= size || p.y >= size || p.z >= CHANNELS {
        return Err(Error::OutOfBounds {
            x: p.x,
            y: p.y,
            z: p.z,
            size,
        });
    }
    Ok(())
}

/// One application of the transform to a single position. `height` and
/// `width` must be equal.
pub fn map_point(
    p: Position,
    params: &ArnoldParams,
    height: usize,
    width: usize,
) -> Result<Position> {
    let size = require_square(height, width)?;
    check_bounds(p, size)?;
    let (x, y, z) = Reduced::new(params, size).forward(p.x as u64, p.y as u64, p.z as u64);
    Ok(Position::new(x as usize, y as usize, z as usize))
}

/// Undoes one application of [`map_point`].
pub fn inverse_map_point(
    p: Position,
    params: &ArnoldParams,
    height: usize,
    width: usize,
) -> Result<Position> {
    let size = require_square(height, width)?;
    check_bounds(p, size)?;
    let (x, y, z) = Reduced::new(params, size).inverse(p.x as u64, p.y as u64, p.z as u64);
    Ok(Position::new(x as usize, y as usize, z as usize))
}

/// For every linear index `i`, the linear index that position `i` is sent
/// to by one forward (or inverse) application.
fn step_table(params: &ArnoldParams, size: usize, inverse: bool) -> Vec<usize> {
    let r = Reduced::new(params, size);
    let mut table = Vec::with_capacity(size * size * CHANNELS);
    for x in 0..size as u64 {
        for y in 0..size as u64 {
            for z in 0..CHANNELS as u64 {
                let (nx, ny, nz) = if inverse {
                    r.inverse(x, y, z)
                } else {
                    r.forward(x, y, z)
                };
                table.push(((nx * size as u64 + ny) * CHANNELS as u64 + nz) as usize);
            }
        }
    }
    table
}

/// Moves every value to its destination `n` times over.
fn apply_passes(data: &[u8], dest: &[usize], passes: u32) -> Vec<u8> {
    let mut cur = data.to_vec();
    let mut next = vec![0u8; cur.len()];
    for _ in 0..passes {
        for (&v, &to) in cur.iter().zip(dest) {
            next[to] = v;
        }
        std::mem::swap(&mut cur, &mut next);
    }
    cur
}

/// Applies the transform `params.n` times. The output pixel at `map(p)`
/// equals the input pixel at `p` for each single application.
pub fn scramble(img: &ColorImage, params: &ArnoldParams) -> Result<ColorImage> {
    let size = require_square(img.height(), img.width())?;
    let dest = step_table(params, size, false);
    let data = apply_passes(img.as_bytes(), &dest, params.n);
    ColorImage::from_bytes(size, size, data)
}

/// Exact inverse of [`scramble`] with the same parameters.
pub fn unscramble(img: &ColorImage, params: &ArnoldParams) -> Result<ColorImage> {
    let size = require_square(img.height(), img.width())?;
    let dest = step_table(params, size, true);
    let data = apply_passes(img.as_bytes(), &dest, params.n);
    ColorImage::from_bytes(size, size, data)
}

pub const DEFAULT_PERIOD_CAP: u64 = 1_000_000;

/// Smallest `t >= 1` such that `t` applications of the map are the
/// identity on an `size x size x 3` grid, capped at [`DEFAULT_PERIOD_CAP`].
pub fn period_of(params: &ArnoldParams, size: usize) -> Result<u64> {
    period_of_capped(params, size, DEFAULT_PERIOD_CAP)
}

/// [`period_of`] with an explicit cap. The period is the lcm of the cycle
/// lengths of the one-step permutation.
pub fn period_of_capped(params: &ArnoldParams, size: usize, cap: u64) -> Result<u64> {
    if size == 0 {
        return Err(Error::EmptyImage {
            height: 0,
            width: 0,
        });
    }
    let dest = step_table(params, size, false);
    let mut seen = vec![false; dest.len()];
    let mut period = 1u64;
    for start in 0..dest.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0u64;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = dest[i];
            len += 1;
        }
        period = lcm(period, len);
        if period > cap {
            return Err(Error::PeriodCapExceeded { cap });
        }
    }
    Ok(period)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}
