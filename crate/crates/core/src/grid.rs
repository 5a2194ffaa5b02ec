//! Centered uniform grids and sampled functions/fields.
//!
//! A `GridSpec` fixes the discretization: `n` samples per axis at spacing
//! `dx`, covering `[-n·dx/2, n·dx/2)` with sample `j` at `(j - n/2)·dx`. The
//! dual (frequency) spacing is `dξ = 1/(n·dx)`, so the centered DFT of
//! [`crate::fftcore`] is exactly unitary between the two sample spaces.
//!
//! * [`SampledFunction`] — a complex function on `R^d` (`n^d` values).
//! * [`SampledField`] — a complex function on phase space `R^{2d}` with
//!   coordinates ordered `(x, ξ)`: the first `d` axes carry spacing `dx`, the
//!   last `d` axes spacing `dξ`.
//!
//! Integrals are centered Riemann sums; `⟨f, g⟩ = Σ f·conj(g)·dx^d`.
//! Operations that mix position and frequency axes of a field (tensors fed to
//! phase-space transforms, convolutions of symbols with them) require a
//! *self-dual* grid, `n·dx² = 1`, so that all `2d` axes share one spacing.
//! The default grid (`d=1`, `n=256`, `dx=1/16`) is self-dual.

use crate::fftcore;
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Errors for grid-level operations.
#[derive(Debug, thiserror::Error)]
pub enum GridError {
    #[error("unsupported dimension d={d} (d must be 1 or 2)")]
    UnsupportedDimension { d: usize },
    #[error("n={n} is not an even power of two >= 8")]
    BadSampleCount { n: usize },
    #[error("spacing dx={dx} must be positive and finite")]
    BadSpacing { dx: f64 },
    #[error("operands live on different grids")]
    GridMismatch,
    #[error("translation component {value} is not a multiple of the grid spacing {spacing} (nearest grid value {nearest})")]
    OffGridTranslation {
        value: f64,
        spacing: f64,
        nearest: f64,
    },
    #[error("operation requires a self-dual grid (n·dx² = 1), got n={n}, dx={dx}")]
    GridNotSelfDual { n: usize, dx: f64 },
    #[error("value length {len} does not match grid ({want} expected)")]
    LengthMismatch { len: usize, want: usize },
    #[error("non-finite sample encountered")]
    NonFinite,
}

/// Result alias for grid operations.
pub type Result<T> = std::result::Result<T, GridError>;

/// Discretization parameters: `n` samples per axis at spacing `dx`,
/// centered so sample `j` sits at `(j - n/2)·dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Dimension of the base space (1 or 2).
    pub d: usize,
    /// Samples per axis; a power of two.
    pub n: usize,
    /// Grid spacing.
    pub dx: f64,
}

impl GridSpec {
    /// Validates and builds a grid.
    pub fn new(d: usize, n: usize, dx: f64) -> Result<Self> {
        if d == 0 || d > 2 {
            return Err(GridError::UnsupportedDimension { d });
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(GridError::BadSampleCount { n });
        }
        if !(dx.is_finite() && dx > 0.0) {
            return Err(GridError::BadSpacing { dx });
        }
        Ok(GridSpec { d, n, dx })
    }

    /// Dual (frequency) spacing `1/(n·dx)`.
    pub fn dxi(&self) -> f64 {
        1.0 / (self.n as f64 * self.dx)
    }

    /// Coordinate of sample index `j` on a position axis.
    pub fn coord(&self, j: usize) -> f64 {
        (j as f64 - self.n as f64 / 2.0) * self.dx
    }

    /// Coordinate of sample index `m` on a frequency axis.
    pub fn freq_coord(&self, m: usize) -> f64 {
        (m as f64 - self.n as f64 / 2.0) * self.dxi()
    }

    /// Whether position and frequency axes share one spacing (`n·dx² = 1`).
    pub fn is_self_dual(&self) -> bool {
        (self.n as f64 * self.dx * self.dx - 1.0).abs() < 1e-12
    }

    /// Number of samples of a function on `R^d`.
    pub fn function_len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    /// Number of samples of a field on `R^{2d}`.
    pub fn field_len(&self) -> usize {
        self.n.pow(2 * self.d as u32)
    }

    /// Shape `[n; d]` of a function array.
    pub fn function_shape(&self) -> Vec<usize> {
        vec![self.n; self.d]
    }

    /// Shape `[n; 2d]` of a field array.
    pub fn field_shape(&self) -> Vec<usize> {
        vec![self.n; 2 * self.d]
    }

    /// Spacing of field axis `a` (`dx` for the first `d` axes, `dξ` after).
    pub fn field_axis_spacing(&self, axis: usize) -> f64 {
        if axis < self.d {
            self.dx
        } else {
            self.dxi()
        }
    }

    /// Quadrature weight `dx^d` for functions.
    pub fn function_weight(&self) -> f64 {
        self.dx.powi(self.d as i32)
    }

    /// Quadrature weight `dx^d·dξ^d` for fields.
    pub fn field_weight(&self) -> f64 {
        (self.dx * self.dxi()).powi(self.d as i32)
    }

    /// The grid whose position axes are this grid's frequency axes.
    pub fn dual(&self) -> GridSpec {
        GridSpec {
            d: self.d,
            n: self.n,
            dx: self.dxi(),
        }
    }
}

impl Default for GridSpec {
    /// Desk-scale default: `d=1`, `n=256`, `dx=1/16` (box `[-8, 8)`,
    /// self-dual).
    fn default() -> Self {
        GridSpec {
            d: 1,
            n: 256,
            dx: 1.0 / 16.0,
        }
    }
}

/// Decodes a row-major flat index into per-axis indices for `rank` axes of
/// length `n` each.
pub fn decode_index(flat: usize, n: usize, rank: usize) -> Vec<usize> {
    let mut idx = vec![0usize; rank];
    let mut rem = flat;
    for a in (0..rank).rev() {
        idx[a] = rem % n;
        rem /= n;
    }
    idx
}

/// A point `z = (x, ξ)` of phase space `R^{2d}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpacePoint {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
}

impl PhaseSpacePoint {
    pub fn new(x: Vec<f64>, xi: Vec<f64>) -> Self {
        assert_eq!(x.len(), xi.len(), "x and ξ must share a dimension");
        PhaseSpacePoint { x, xi }
    }

    /// Convenience constructor for `d = 1`.
    pub fn new_1d(x: f64, xi: f64) -> Self {
        PhaseSpacePoint {
            x: vec![x],
            xi: vec![xi],
        }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

/// A sampled complex function on `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    pub grid: GridSpec,
    pub values: Vec<Complex64>,
}

/// A sampled complex function on phase space `R^{2d}`, axes ordered `(x, ξ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    pub grid: GridSpec,
    pub values: Vec<Complex64>,
}

impl SampledFunction {
    /// All-zero function.
    pub fn zeros(grid: GridSpec) -> Self {
        SampledFunction {
            grid,
            values: vec![Complex64::ZERO; grid.function_len()],
        }
    }

    /// Samples `f` at the grid points; the closure receives the coordinate
    /// vector (length `d`).
    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(&[f64]) -> Complex64) -> Self {
        let n = grid.n;
        let d = grid.d;
        let values = (0..grid.function_len())
            .map(|flat| {
                let idx = decode_index(flat, n, d);
                let x: Vec<f64> = idx.iter().map(|&j| grid.coord(j)).collect();
                f(&x)
            })
            .collect();
        SampledFunction { grid, values }
    }

    /// The standard Gaussian `φ(t) = e^{-π|t|²}`.
    pub fn gaussian(grid: GridSpec) -> Self {
        Self::from_fn(grid, |x| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            Complex64::new((-PI * r2).exp(), 0.0)
        })
    }

    /// Quadrature-consistent point mass at the grid point nearest `x`:
    /// one-hot scaled by `1/dx^d`.
    pub fn delta_proxy(grid: GridSpec, x: &[f64]) -> Self {
        let mut out = Self::zeros(grid);
        let mut flat = 0usize;
        for &xi in x {
            let j = ((xi / grid.dx) + grid.n as f64 / 2.0).round() as i64;
            let j = j.clamp(0, grid.n as i64 - 1) as usize;
            flat = flat * grid.n + j;
        }
        out.values[flat] = Complex64::new(1.0 / grid.function_weight(), 0.0);
        out
    }

    /// `L²` norm with quadrature weights: `sqrt(Σ|f|²·dx^d)`.
    pub fn norm_l2(&self) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        (s * self.grid.function_weight()).sqrt()
    }

    /// Largest sample magnitude.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Pointwise scaling by a complex constant.
    pub fn scaled(&self, c: Complex64) -> Self {
        SampledFunction {
            grid: self.grid,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// Rejects non-finite samples.
    pub fn validate(&self) -> Result<()> {
        if self.values.len() != self.grid.function_len() {
            return Err(GridError::LengthMismatch {
                len: self.values.len(),
                want: self.grid.function_len(),
            });
        }
        if self.values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(GridError::NonFinite);
        }
        Ok(())
    }
}

impl SampledField {
    /// All-zero field.
    pub fn zeros(grid: GridSpec) -> Self {
        SampledField {
            grid,
            values: vec![Complex64::ZERO; grid.field_len()],
        }
    }

    /// Samples `F` at the phase-space grid points; the closure receives the
    /// position block (length `d`) and the frequency block (length `d`).
    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(&[f64], &[f64]) -> Complex64) -> Self {
        let n = grid.n;
        let d = grid.d;
        let values = (0..grid.field_len())
            .map(|flat| {
                let idx = decode_index(flat, n, 2 * d);
                let x: Vec<f64> = idx[..d].iter().map(|&j| grid.coord(j)).collect();
                let xi: Vec<f64> = idx[d..].iter().map(|&m| grid.freq_coord(m)).collect();
                f(&x, &xi)
            })
            .collect();
        SampledField { grid, values }
    }

    /// The constant symbol `a ≡ 1`.
    pub fn ones(grid: GridSpec) -> Self {
        SampledField {
            grid,
            values: vec![Complex64::new(1.0, 0.0); grid.field_len()],
        }
    }

    /// Quadrature-consistent point mass at the grid point nearest `z`:
    /// one-hot scaled by `1/(dx^d·dξ^d)`.
    pub fn delta_proxy(grid: GridSpec, z: &PhaseSpacePoint) -> Self {
        let mut out = Self::zeros(grid);
        let mut flat = 0usize;
        for &xv in &z.x {
            let j = ((xv / grid.dx) + grid.n as f64 / 2.0).round() as i64;
            let j = j.clamp(0, grid.n as i64 - 1) as usize;
            flat = flat * grid.n + j;
        }
        for &xiv in &z.xi {
            let m = ((xiv / grid.dxi()) + grid.n as f64 / 2.0).round() as i64;
            let m = m.clamp(0, grid.n as i64 - 1) as usize;
            flat = flat * grid.n + m;
        }
        out.values[flat] = Complex64::new(1.0 / grid.field_weight(), 0.0);
        out
    }

    /// `L²` norm with quadrature weights: `sqrt(Σ|F|²·dx^d·dξ^d)`.
    pub fn norm_l2(&self) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        (s * self.grid.field_weight()).sqrt()
    }

    /// Largest sample magnitude (`L^∞` over grid points).
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Pointwise scaling by a complex constant.
    pub fn scaled(&self, c: Complex64) -> Self {
        SampledField {
            grid: self.grid,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// Pointwise difference (same grid required).
    pub fn sub(&self, other: &SampledField) -> Result<SampledField> {
        if self.grid != other.grid {
            return Err(GridError::GridMismatch);
        }
        Ok(SampledField {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// Pointwise sum (same grid required).
    pub fn add(&self, other: &SampledField) -> Result<SampledField> {
        if self.grid != other.grid {
            return Err(GridError::GridMismatch);
        }
        Ok(SampledField {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Rejects non-finite samples.
    pub fn validate(&self) -> Result<()> {
        if self.values.len() != self.grid.field_len() {
            return Err(GridError::LengthMismatch {
                len: self.values.len(),
                want: self.grid.field_len(),
            });
        }
        if self.values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(GridError::NonFinite);
        }
        Ok(())
    }
}

/// `⟨f, g⟩ = Σ f·conj(g)·dx^d` (conjugate-linear in `g`).
pub fn inner_product(f: &SampledFunction, g: &SampledFunction) -> Result<Complex64> {
    if f.grid != g.grid {
        return Err(GridError::GridMismatch);
    }
    let s: Complex64 = f
        .values
        .iter()
        .zip(&g.values)
        .map(|(a, b)| a * b.conj())
        .sum();
    Ok(s * f.grid.function_weight())
}

/// `⟨F, G⟩ = Σ F·conj(G)·dx^d·dξ^d` for fields.
pub fn field_inner_product(f: &SampledField, g: &SampledField) -> Result<Complex64> {
    if f.grid != g.grid {
        return Err(GridError::GridMismatch);
    }
    let s: Complex64 = f
        .values
        .iter()
        .zip(&g.values)
        .map(|(a, b)| a * b.conj())
        .sum();
    Ok(s * f.grid.field_weight())
}

/// Unitary Fourier transform `f̂(ξ) = ∫ f(x) e^{-2πix·ξ} dx`, sampled on the
/// dual centered grid (spacing `dξ = 1/(n·dx)`).
pub fn fourier(f: &SampledFunction) -> SampledFunction {
    let mut values = f.values.clone();
    let shape = f.grid.function_shape();
    for axis in 0..f.grid.d {
        fftcore::centered_dft_axis(&mut values, &shape, axis, f.grid.dx, true)
            .expect("function shape is consistent by construction");
    }
    SampledFunction {
        grid: f.grid.dual(),
        values,
    }
}

/// Inverse of [`fourier`].
pub fn fourier_inverse(f: &SampledFunction) -> SampledFunction {
    let mut values = f.values.clone();
    let shape = f.grid.function_shape();
    for axis in 0..f.grid.d {
        fftcore::centered_dft_axis(&mut values, &shape, axis, f.grid.dx, false)
            .expect("function shape is consistent by construction");
    }
    SampledFunction {
        grid: f.grid.dual(),
        values,
    }
}

fn snap_to_grid(value: f64, spacing: f64) -> Result<i64> {
    let steps = value / spacing;
    let rounded = steps.round();
    if (steps - rounded).abs() > 1e-9 {
        return Err(GridError::OffGridTranslation {
            value,
            spacing,
            nearest: rounded * spacing,
        });
    }
    Ok(rounded as i64)
}

/// Time-frequency shift `π(z) = M_ξ T_x`: `(π(z)f)(t) = e^{2πiξ·t} f(t-x)`.
///
/// The translation component must lie on the grid (multiples of `dx`);
/// translation wraps periodically, which is exact for the periodized model
/// and negligible for well-localized samples. The modulation `ξ` is
/// unrestricted (pointwise unimodular phase).
pub fn tf_shift(z: &PhaseSpacePoint, f: &SampledFunction) -> Result<SampledFunction> {
    let grid = f.grid;
    if z.dim() != grid.d {
        return Err(GridError::UnsupportedDimension { d: z.dim() });
    }
    let shifts: Vec<i64> = z
        .x
        .iter()
        .map(|&xv| snap_to_grid(xv, grid.dx))
        .collect::<Result<_>>()?;
    let n = grid.n as i64;
    let d = grid.d;
    let mut out = SampledFunction::zeros(grid);
    for flat in 0..grid.function_len() {
        let idx = decode_index(flat, grid.n, d);
        // source index of T_x: t - x ↦ index j - m (periodic)
        let mut src = 0usize;
        for (a, &j) in idx.iter().enumerate() {
            let s = (j as i64 - shifts[a]).rem_euclid(n) as usize;
            src = src * grid.n + s;
        }
        let mut phase = 0.0;
        for (a, &j) in idx.iter().enumerate() {
            phase += z.xi[a] * grid.coord(j);
        }
        out.values[flat] = f.values[src] * Complex64::from_polar(1.0, 2.0 * PI * phase);
    }
    Ok(out)
}

/// Translates a field by the phase-space vector `z` (no modulation):
/// `(T_z F)(w) = F(w - z)`, with `z` on the phase-space grid.
pub fn field_translate(f: &SampledField, z: &PhaseSpacePoint) -> Result<SampledField> {
    let grid = f.grid;
    if z.dim() != grid.d {
        return Err(GridError::UnsupportedDimension { d: z.dim() });
    }
    let d = grid.d;
    let mut shifts = Vec::with_capacity(2 * d);
    for &xv in &z.x {
        shifts.push(snap_to_grid(xv, grid.dx)?);
    }
    for &xiv in &z.xi {
        shifts.push(snap_to_grid(xiv, grid.dxi())?);
    }
    let n = grid.n as i64;
    let mut out = SampledField::zeros(grid);
    for flat in 0..grid.field_len() {
        let idx = decode_index(flat, grid.n, 2 * d);
        let mut src = 0usize;
        for (a, &j) in idx.iter().enumerate() {
            let s = (j as i64 - shifts[a]).rem_euclid(n) as usize;
            src = src * grid.n + s;
        }
        out.values[flat] = f.values[src];
    }
    Ok(out)
}

/// Tensor with conjugation: `(f ⊗ conj g)(x, y) = f(x)·conj(g(y))`.
///
/// The result is a field whose second axis group holds the `y` variable;
/// phase-space transforms reinterpret it, which requires a self-dual grid.
pub fn tensor_conj(f: &SampledFunction, g: &SampledFunction) -> Result<SampledField> {
    if f.grid != g.grid {
        return Err(GridError::GridMismatch);
    }
    let grid = f.grid;
    if !grid.is_self_dual() {
        return Err(GridError::GridNotSelfDual {
            n: grid.n,
            dx: grid.dx,
        });
    }
    let nf = grid.function_len();
    let mut values = Vec::with_capacity(nf * nf);
    for a in &f.values {
        for b in &g.values {
            values.push(a * b.conj());
        }
    }
    Ok(SampledField { grid, values })
}

/// Star involution `F*(w) = conj(F(-w))`: index reversal about the grid
/// center plus conjugation. An involution: applying it twice is the identity.
pub fn involution_star(f: &SampledField) -> SampledField {
    let grid = f.grid;
    let n = grid.n;
    let rank = 2 * grid.d;
    let mut out = SampledField::zeros(grid);
    for flat in 0..grid.field_len() {
        let idx = decode_index(flat, n, rank);
        let mut src = 0usize;
        for &j in &idx {
            src = src * n + (n - j) % n;
        }
        out.values[flat] = f.values[src].conj();
    }
    out
}

/// Fraction of a field's `L¹` mass within `n/8` samples of any box edge.
///
/// Used as the aliasing guard for [`convolve`]: zero-padded convolution is
/// exact for the sampled data, but a field with substantial boundary mass is
/// itself a poor box truncation of its continuum counterpart.
pub fn boundary_tail_fraction(f: &SampledField) -> f64 {
    let n = f.grid.n;
    let rank = 2 * f.grid.d;
    let margin = n / 8;
    let mut tail = 0.0;
    let mut total = 0.0;
    for (flat, v) in f.values.iter().enumerate() {
        let idx = decode_index(flat, n, rank);
        let a = v.norm();
        total += a;
        if idx.iter().any(|&j| j < margin || j >= n - margin) {
            tail += a;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        tail / total
    }
}

/// Linear convolution of two fields over `R^{2d}`:
/// `(F * G)(w) = Σ_u F(u)·G(w - u)·dx^d·dξ^d`, restricted to the original box.
///
/// Implemented by zero-padding every axis to `2n` and multiplying plain FFTs,
/// so the result is the exact linear convolution of the sampled data (no
/// wraparound). If either input carries more than `1e-9` of its `L¹` mass
/// near the box boundary a warning is logged — the data is then a poor box
/// truncation and the restriction to the box loses tails; see
/// [`boundary_tail_fraction`].
pub fn convolve(f: &SampledField, g: &SampledField) -> Result<SampledField> {
    if f.grid != g.grid {
        return Err(GridError::GridMismatch);
    }
    let grid = f.grid;
    for (name, field) in [("left", f), ("right", g)] {
        let tail = boundary_tail_fraction(field);
        if tail > 1e-9 {
            log::warn!(
                "convolve: {name} input carries {tail:.3e} of its mass near the box boundary; \
                 box truncation may be inaccurate"
            );
        }
    }
    let n = grid.n;
    let rank = 2 * grid.d;
    let m = 2 * n;
    let padded_len = m.pow(rank as u32);
    let pad_shape = vec![m; rank];

    let embed = |src: &[Complex64]| -> Vec<Complex64> {
        let mut out = vec![Complex64::ZERO; padded_len];
        for (flat, v) in src.iter().enumerate() {
            let idx = decode_index(flat, n, rank);
            let mut dst = 0usize;
            for &j in &idx {
                dst = dst * m + j;
            }
            out[dst] = *v;
        }
        out
    };

    let mut fa = embed(&f.values);
    let mut gb = embed(&g.values);
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(m);
    let inv = planner.plan_fft_inverse(m);

    // plain (uncentered) FFT along every padded axis
    let apply_all = |data: &mut [Complex64], plan: &std::sync::Arc<dyn rustfft::Fft<f64>>| {
        let mut buf = vec![Complex64::ZERO; m];
        for axis in 0..rank {
            let stride: usize = pad_shape[axis + 1..].iter().product();
            let lines = padded_len / m;
            // iterate over all lines along `axis`
            let mut outer = vec![0usize; rank];
            for _ in 0..lines {
                let mut base = 0usize;
                for (a, &i) in outer.iter().enumerate() {
                    let st: usize = pad_shape[a + 1..].iter().product();
                    base += i * st;
                }
                for (j, b) in buf.iter_mut().enumerate() {
                    *b = data[base + j * stride];
                }
                plan.process(&mut buf);
                for (j, b) in buf.iter().enumerate() {
                    data[base + j * stride] = *b;
                }
                for a in (0..rank).rev() {
                    if a == axis {
                        continue;
                    }
                    outer[a] += 1;
                    if outer[a] < m {
                        break;
                    }
                    outer[a] = 0;
                }
            }
        }
    };
    apply_all(&mut fa, &fwd);
    apply_all(&mut gb, &fwd);
    for (a, b) in fa.iter_mut().zip(&gb) {
        *a *= b;
    }
    apply_all(&mut fa, &inv);
    let norm = 1.0 / (padded_len as f64);

    // extract: out[v] = conv[v + n/2 on each axis] · weight
    let weight = grid.field_weight() * norm;
    let mut out = SampledField::zeros(grid);
    for flat in 0..grid.field_len() {
        let idx = decode_index(flat, n, rank);
        let mut src = 0usize;
        for &j in &idx {
            src = src * m + (j + n / 2);
        }
        out.values[flat] = fa[src] * weight;
    }
    Ok(out)
}

/// Relative `L²` distance between fields after optimally aligning a global
/// phase: `min_θ ‖e^{iθ}·a − b‖₂ / ‖b‖₂`.
pub fn aligned_distance(a: &SampledField, b: &SampledField) -> Result<f64> {
    if a.grid != b.grid {
        return Err(GridError::GridMismatch);
    }
    let na = a.norm_l2();
    let nb = b.norm_l2();
    if nb == 0.0 {
        return Ok(if na == 0.0 { 0.0 } else { f64::INFINITY });
    }
    let ip = field_inner_product(a, b)?.norm();
    let sq = (na * na + nb * nb - 2.0 * ip).max(0.0);
    Ok(sq.sqrt() / nb)
}
