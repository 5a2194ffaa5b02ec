//! Centered discrete Fourier analysis on uniform grids.
//!
//! All transforms in this crate discretize the unitary continuum pair
//!
//! ```text
//! f̂(ξ) = ∫ f(x) e^{-2πi x·ξ} dx ≈ Σ_j f(x_j) e^{-2πi x_j ξ_m} dx
//! ```
//!
//! on centered grids `x_j = (j - N/2)·dx` and `ξ_m = (m - N/2)·dξ` with
//! `dξ = 1/(N·dx)`. With those conventions the transform is exactly unitary
//! between the sample spaces, and for even `N` it reduces to a plain radix-2
//! FFT conjugated by sign alternations.
//!
//! Beyond the axis transforms this module provides:
//!
//! * spectral translation along an axis (sampling the trigonometric
//!   interpolant at `x + s` for arbitrary real `s`),
//! * a Bluestein (chirp-z) evaluator that samples a line's interpolant on an
//!   affinely mapped grid `a·x + s`,
//! * a multi-axis resampler `F ↦ F(E·)` for an invertible matrix `E`, built
//!   from an LU factorization so that every pass is a one-dimensional affine
//!   resample.
//!
//! All array arguments are row-major with shape `[n; k]` (the last axis is
//! contiguous).

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Errors from the low-level transform engine.
#[derive(Debug, thiserror::Error)]
pub enum FftError {
    #[error("array length {len} does not match shape {shape:?}")]
    ShapeMismatch { len: usize, shape: Vec<usize> },
    #[error("axis {axis} out of range for {rank} axes")]
    AxisOutOfRange { axis: usize, rank: usize },
    #[error("resampling matrix is {got}x{got2}, expected {want}x{want}")]
    BadMatrixSize { got: usize, got2: usize, want: usize },
    #[error("resampling matrix is singular (|det| = {det:.3e})")]
    SingularMap { det: f64 },
}

fn check_shape(values: &[Complex64], shape: &[usize]) -> Result<(), FftError> {
    let len: usize = shape.iter().product();
    if values.len() != len {
        return Err(FftError::ShapeMismatch {
            len: values.len(),
            shape: shape.to_vec(),
        });
    }
    Ok(())
}

/// Row-major stride of `axis` for `shape`.
fn stride(shape: &[usize], axis: usize) -> usize {
    shape[axis + 1..].iter().product()
}

/// Visits every 1-D line along `axis`, calling `f(base_offset, outer_index)`.
///
/// `outer_index` has the full rank of `shape` but its `axis` slot is always 0;
/// the line's elements live at `base_offset + j·stride` for `j < shape[axis]`.
fn for_each_line(shape: &[usize], axis: usize, mut f: impl FnMut(usize, &[usize])) {
    let rank = shape.len();
    let mut idx = vec![0usize; rank];
    let total: usize = shape.iter().product();
    let lines = total / shape[axis];
    let st = stride(shape, axis);
    for _ in 0..lines {
        let mut base = 0usize;
        let mut acc = 1usize;
        for a in (0..rank).rev() {
            base += idx[a] * acc;
            acc *= shape[a];
        }
        f(base, &idx);
        // advance the outer index, skipping `axis`
        for a in (0..rank).rev() {
            if a == axis {
                continue;
            }
            idx[a] += 1;
            if idx[a] < shape[a] {
                break;
            }
            idx[a] = 0;
        }
        let _ = st;
    }
}

/// Centered unitary DFT along one axis, in place.
///
/// `spacing` is the sample spacing of the *input* axis. The forward direction
/// (`forward = true`) maps samples on the `x` grid to samples on the dual grid
/// with spacing `1/(n·spacing)` using the kernel `e^{-2πi x ξ}`; the inverse
/// direction uses `e^{+2πi x ξ}`. Applying forward with spacing `dx` and then
/// inverse with spacing `1/(n·dx)` is the identity to rounding error.
pub fn centered_dft_axis(
    values: &mut [Complex64],
    shape: &[usize],
    axis: usize,
    spacing: f64,
    forward: bool,
) -> Result<(), FftError> {
    check_shape(values, shape)?;
    if axis >= shape.len() {
        return Err(FftError::AxisOutOfRange {
            axis,
            rank: shape.len(),
        });
    }
    let n = shape[axis];
    debug_assert!(n % 2 == 0, "centered transforms require even n");
    let mut planner = FftPlanner::new();
    let fft = if forward {
        planner.plan_fft_forward(n)
    } else {
        planner.plan_fft_inverse(n)
    };
    // Global constant (-1)^{n/2} from recentering both grids.
    let c = if (n / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let scale = spacing * c;
    let st = stride(shape, axis);
    let mut buf = vec![Complex64::ZERO; n];
    for_each_line(shape, axis, |base, _| {
        for (j, b) in buf.iter_mut().enumerate() {
            let v = values[base + j * st];
            *b = if j % 2 == 0 { v } else { -v };
        }
        fft.process(&mut buf);
        for (m, b) in buf.iter().enumerate() {
            let sgn = if m % 2 == 0 { scale } else { -scale };
            values[base + m * st] = b * sgn;
        }
    });
    Ok(())
}

/// Centered unitary DFT along several axes with per-axis spacings.
pub fn centered_dft_axes(
    values: &mut [Complex64],
    shape: &[usize],
    axes: &[usize],
    spacings: &[f64],
    forward: bool,
) -> Result<(), FftError> {
    for (&axis, &sp) in axes.iter().zip(spacings) {
        centered_dft_axis(values, shape, axis, sp, forward)?;
    }
    Ok(())
}

/// Translates along `axis` by a per-line amount: `out(x) = in(x + s)`.
///
/// The shift `s` may be any real number; off-grid shifts sample the
/// trigonometric interpolant of the line (periodic extension). `shift` is
/// called once per line with the outer index (entry `axis` is 0).
pub fn translate_axis(
    values: &mut [Complex64],
    shape: &[usize],
    axis: usize,
    spacing: f64,
    shift: impl Fn(&[usize]) -> f64,
) -> Result<(), FftError> {
    check_shape(values, shape)?;
    let n = shape[axis];
    let dxi = 1.0 / (n as f64 * spacing);
    centered_dft_axis(values, shape, axis, spacing, true)?;
    let st = stride(shape, axis);
    for_each_line(shape, axis, |base, outer| {
        let s = shift(outer);
        if s == 0.0 {
            return;
        }
        for m in 0..n {
            let xi = (m as f64 - n as f64 / 2.0) * dxi;
            let ph = Complex64::from_polar(1.0, 2.0 * PI * xi * s);
            values[base + m * st] *= ph;
        }
    });
    centered_dft_axis(values, shape, axis, dxi, false)?;
    Ok(())
}

/// Precomputed chirp tables for sampling a centered spectrum on the grid
/// `a·x_j` (Bluestein's algorithm). One plan serves every line of a pass.
pub struct ZoomPlan {
    n: usize,
    m: usize,
    a: f64,
    /// `w^{k²/2 - K0·k}` applied to the spectrum before convolution.
    pre: Vec<Complex64>,
    /// `w^{j²/2 - K0·j + K0²}` applied after convolution.
    post: Vec<Complex64>,
    /// FFT of the chirp `w^{-r²/2}` laid out circularly on `m` points.
    vhat: Vec<Complex64>,
    fwd: std::sync::Arc<dyn rustfft::Fft<f64>>,
    inv: std::sync::Arc<dyn rustfft::Fft<f64>>,
}

impl ZoomPlan {
    /// Builds a plan for lines of length `n` and grid scale factor `a`
    /// (`w = e^{2πi a / n}`).
    pub fn new(n: usize, a: f64) -> Self {
        let sigma = a / n as f64;
        let k0 = n as f64 / 2.0;
        let m = (2 * n).next_power_of_two();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(m);
        let inv = planner.plan_fft_inverse(m);
        let w = |t: f64| Complex64::from_polar(1.0, 2.0 * PI * sigma * t);
        let pre: Vec<Complex64> = (0..n)
            .map(|k| {
                let kf = k as f64;
                w(kf * kf / 2.0 - k0 * kf)
            })
            .collect();
        let post: Vec<Complex64> = (0..n)
            .map(|j| {
                let jf = j as f64;
                w(jf * jf / 2.0 - k0 * jf + k0 * k0)
            })
            .collect();
        let mut vbuf = vec![Complex64::ZERO; m];
        for r in -(n as i64 - 1)..=(n as i64 - 1) {
            let rf = r as f64;
            let slot = ((r % m as i64 + m as i64) % m as i64) as usize;
            vbuf[slot] = w(-rf * rf / 2.0);
        }
        fwd.process(&mut vbuf);
        ZoomPlan {
            n,
            m,
            a,
            pre,
            post,
            vhat: vbuf,
            fwd,
            inv,
        }
    }

    /// Given a centered spectrum (`spec[k]` at `ξ_k = (k - n/2)·dξ`), returns
    /// the line `out_j = dξ·Σ_k spec[k] e^{2πi a ξ_k x_j}` for `x_j` on the
    /// centered grid with spacing `dx = 1/(n·dξ)`.
    pub fn apply(&self, spec: &[Complex64], dxi: f64) -> Vec<Complex64> {
        debug_assert_eq!(spec.len(), self.n);
        let mut u = vec![Complex64::ZERO; self.m];
        for k in 0..self.n {
            u[k] = spec[k] * self.pre[k];
        }
        self.fwd.process(&mut u);
        for (uv, vv) in u.iter_mut().zip(&self.vhat) {
            *uv *= vv;
        }
        self.inv.process(&mut u);
        let norm = 1.0 / self.m as f64;
        (0..self.n)
            .map(|j| u[j] * self.post[j] * norm * dxi)
            .collect()
    }

    /// The scale factor this plan was built for.
    pub fn scale(&self) -> f64 {
        self.a
    }
}

/// Affine resample along `axis`: `out(x) = in(a·x + s)` with per-line `s`.
///
/// Uses plain spectral translation when `a == 1` and Bluestein evaluation
/// otherwise. The interpolant is the line's trigonometric interpolant, so
/// content must be well localized away from the box edges and band limited
/// for the result to be accurate.
pub fn affine_resample_axis(
    values: &mut [Complex64],
    shape: &[usize],
    axis: usize,
    spacing: f64,
    a: f64,
    shift: impl Fn(&[usize]) -> f64,
) -> Result<(), FftError> {
    if a == 1.0 {
        return translate_axis(values, shape, axis, spacing, shift);
    }
    check_shape(values, shape)?;
    let n = shape[axis];
    let dxi = 1.0 / (n as f64 * spacing);
    centered_dft_axis(values, shape, axis, spacing, true)?;
    let plan = ZoomPlan::new(n, a);
    let st = stride(shape, axis);
    let mut spec = vec![Complex64::ZERO; n];
    for_each_line(shape, axis, |base, outer| {
        let s = shift(outer);
        for (m, sp) in spec.iter_mut().enumerate() {
            let xi = (m as f64 - n as f64 / 2.0) * dxi;
            let ph = Complex64::from_polar(1.0, 2.0 * PI * xi * s);
            *sp = values[base + m * st] * ph;
        }
        let line = plan.apply(&spec, dxi);
        for (j, v) in line.iter().enumerate() {
            values[base + j * st] = *v;
        }
    });
    Ok(())
}

/// Coordinate of index `i` on a centered grid.
#[inline]
pub fn centered_coord(i: usize, n: usize, spacing: f64) -> f64 {
    (i as f64 - n as f64 / 2.0) * spacing
}

/// Doubles the sampling rate of every axis by centered spectral zero-padding
/// (same box, half the spacing, exact on the trigonometric interpolant).
pub(crate) fn upsample2(
    values: &[Complex64],
    shape: &[usize],
    spacing: f64,
) -> Result<(Vec<Complex64>, Vec<usize>, f64), FftError> {
    let k = shape.len();
    let n = shape[0];
    let mut spec = values.to_vec();
    for axis in 0..k {
        centered_dft_axis(&mut spec, shape, axis, spacing, true)?;
    }
    let n2 = 2 * n;
    let fine_shape = vec![n2; k];
    let mut fine = vec![Complex64::ZERO; n2.pow(k as u32)];
    let mut idx = vec![0usize; k];
    for (flat, v) in spec.iter().enumerate() {
        let mut rem = flat;
        for a in (0..k).rev() {
            idx[a] = rem % n;
            rem /= n;
        }
        let mut dst = 0usize;
        for &j in &idx {
            dst = dst * n2 + (j + n / 2);
        }
        fine[dst] = *v;
    }
    let dxi = 1.0 / (n as f64 * spacing);
    for axis in 0..k {
        centered_dft_axis(&mut fine, &fine_shape, axis, dxi, false)?;
    }
    Ok((fine, fine_shape, spacing / 2.0))
}

/// Inverse of [`upsample2`]: truncates the centered spectrum back to the
/// original band (a projection; exact when the data stayed in band).
pub(crate) fn downsample2(
    fine: &[Complex64],
    fine_shape: &[usize],
    fine_spacing: f64,
) -> Result<Vec<Complex64>, FftError> {
    let k = fine_shape.len();
    let n2 = fine_shape[0];
    let n = n2 / 2;
    let mut spec = fine.to_vec();
    for axis in 0..k {
        centered_dft_axis(&mut spec, fine_shape, axis, fine_spacing, true)?;
    }
    let mut coarse = vec![Complex64::ZERO; n.pow(k as u32)];
    let mut idx = vec![0usize; k];
    for (flat, slot) in coarse.iter_mut().enumerate() {
        let mut rem = flat;
        for a in (0..k).rev() {
            idx[a] = rem % n;
            rem /= n;
        }
        let mut src = 0usize;
        for &j in &idx {
            src = src * n2 + (j + n / 2);
        }
        *slot = spec[src];
    }
    let shape = vec![n; k];
    let dxi = 1.0 / (n2 as f64 * fine_spacing); // = 1/(n·spacing): unchanged
    for axis in 0..k {
        centered_dft_axis(&mut coarse, &shape, axis, dxi, false)?;
    }
    Ok(coarse)
}

/// Resamples a `k`-axis array under an invertible linear map:
/// `out(w) = in(E·w)` for grid points `w`, all axes sharing `spacing`.
///
/// Integer unimodular maps are applied by exact (periodic) index relabeling.
/// General maps factor as `E = P·L·U` and are applied axis by axis; each pass
/// is a one-dimensional affine resample of the trigonometric interpolant.
/// The passes run on a 2× spectrally oversampled copy: a shear pass widens
/// the spectrum along the axes it couples (by up to the sum of the coupled
/// bandwidths), so evaluating later passes on the original grid would alias;
/// the doubled band absorbs that growth, and the result is projected back to
/// the original band at the end.
/// No volume factor is applied here — callers account for `|det E|` terms.
pub fn resample_linear_map(
    values: &mut Vec<Complex64>,
    shape: &[usize],
    spacing: f64,
    e: &nalgebra::DMatrix<f64>,
) -> Result<(), FftError> {
    check_shape(values, shape)?;
    let k = shape.len();
    if e.nrows() != k || e.ncols() != k {
        return Err(FftError::BadMatrixSize {
            got: e.nrows(),
            got2: e.ncols(),
            want: k,
        });
    }
    let n = shape[0];
    debug_assert!(shape.iter().all(|&s| s == n));

    // Exact path: integer entries and |det| = 1 give a bijective relabeling
    // of the periodized grid.
    let det = e.determinant();
    if det.abs() < 1e-12 {
        return Err(FftError::SingularMap { det });
    }
    let is_integer = e.iter().all(|&v| (v - v.round()).abs() < 1e-12);
    if is_integer && (det.abs() - 1.0).abs() < 1e-12 {
        let ei: Vec<i64> = e.iter().map(|&v| v.round() as i64).collect(); // column-major
        let half = n as i64 / 2;
        let total: usize = values.len();
        let mut out = vec![Complex64::ZERO; total];
        let mut idx = vec![0usize; k];
        for (flat, slot) in out.iter_mut().enumerate() {
            // decode row-major index
            let mut rem = flat;
            for a in (0..k).rev() {
                idx[a] = rem % n;
                rem /= n;
            }
            // source index u = E(v - c) + c, wrapped periodically
            let mut src = 0usize;
            for (i, _) in (0..k).enumerate() {
                let mut acc: i64 = half;
                for j in 0..k {
                    acc += ei[j * k + i] * (idx[j] as i64 - half);
                }
                let wrapped = acc.rem_euclid(n as i64) as usize;
                src = src * n + wrapped;
            }
            // row-major src was accumulated in axis order 0..k already
            *slot = values[src];
        }
        *values = out;
        return Ok(());
    }

    // General path: E = Pᵀ·L·U with partial pivoting (nalgebra: P·E = L·U).
    let lu = e.clone().lu();
    let l = lu.l();
    let u = lu.u();
    let pinv = {
        // nalgebra's convention is P·E = L·U, so E = P⁻¹·L·U. Recover P as a
        // row permutation by applying it to an index vector:
        // (P·E)[i] = E[pinv[i]].
        let mut v = nalgebra::DMatrix::<f64>::from_fn(k, 1, |i, _| i as f64);
        lu.p().permute_rows(&mut v);
        let perm: Vec<usize> = (0..k).map(|i| v[(i, 0)] as usize).collect();
        perm
    };

    // Run the axis passes at twice the sampling rate (see the doc comment),
    // then project back to the original band.
    let (mut fine, fine_shape, fine_spacing) = upsample2(values, shape, spacing)?;
    let nf = fine_shape[0];

    // Pass 1: F_P(w) = F(Pm·w) where Pm = P⁻¹: (Pm w)_i = w_{p(i)} with
    // p = pinv read as "row i of P·E came from row pinv[i] of E", hence
    // (P⁻¹)_{pinv[i], i} = 1 and (Pm w)_{pinv[i]} = w_i.
    let identity_perm: Vec<usize> = (0..k).collect();
    if pinv != identity_perm {
        let total = fine.len();
        let mut out = vec![Complex64::ZERO; total];
        let mut idx = vec![0usize; k];
        for (flat, slot) in out.iter_mut().enumerate() {
            let mut rem = flat;
            for a in (0..k).rev() {
                idx[a] = rem % nf;
                rem /= nf;
            }
            // want out[v] = in[u] with u_i = (Pm v)_i: u_{pinv[j]} = v_j
            let mut src = 0usize;
            for i in 0..k {
                // find j with pinv[j] == i
                let j = pinv.iter().position(|&pj| pj == i).unwrap();
                src = src * nf + idx[j];
            }
            *slot = fine[src];
        }
        fine = out;
    }

    // Pass 2: lower-triangular (unit diagonal): axis order 0..k-1, each axis
    // shifted by the already-final coordinates of lower-numbered axes.
    for i in 0..k {
        let mut nontrivial = false;
        for j in 0..i {
            if l[(i, j)].abs() > 0.0 {
                nontrivial = true;
            }
        }
        if !nontrivial {
            continue;
        }
        let row: Vec<f64> = (0..i).map(|j| l[(i, j)]).collect();
        translate_axis(&mut fine, &fine_shape, i, fine_spacing, |outer| {
            let mut s = 0.0;
            for (j, &lij) in row.iter().enumerate() {
                s += lij * centered_coord(outer[j], nf, fine_spacing);
            }
            s
        })?;
    }

    // Pass 3: upper-triangular: axis order k-1..0, scale by the diagonal and
    // shift by the already-final coordinates of higher-numbered axes.
    for i in (0..k).rev() {
        let a = u[(i, i)];
        let row: Vec<f64> = (i + 1..k).map(|j| u[(i, j)]).collect();
        let trivial = (a - 1.0).abs() < 1e-15 && row.iter().all(|&v| v == 0.0);
        if trivial {
            continue;
        }
        affine_resample_axis(&mut fine, &fine_shape, i, fine_spacing, a, |outer| {
            let mut s = 0.0;
            for (off, &uij) in row.iter().enumerate() {
                let j = i + 1 + off;
                s += uij * centered_coord(outer[j], nf, fine_spacing);
            }
            s
        })?;
    }

    *values = downsample2(&fine, &fine_shape, fine_spacing)?;
    Ok(())
}
