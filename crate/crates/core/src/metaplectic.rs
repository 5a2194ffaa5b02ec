//! Unitary operators realizing symplectic coordinate changes on sampled
//! functions of the doubled variables.
//!
//! Every symplectic matrix `A` (size `4d×4d`, acting on `R^{4d}`) lifts to a
//! unitary operator `Û(A)` on functions of `2d` variables, determined up to a
//! unimodular constant. This module fixes one concrete representative per
//! dispatch path:
//!
//! * `J` lifts to the full `2d`-variable Fourier transform.
//! * `D_E` lifts to the normalized dilation `(𝔗_E F)(w) = |det E|^{1/2} F(E·w)`.
//! * `V_C` lifts to the chirp product `F(w) ↦ e^{πi w·Cw} F(w)`.
//! * Matrices of the form `A_FT2·D_E` lift to the partial Fourier transform in
//!   the second variable group applied after `𝔗_E`.
//! * Matrices with the shift-covariant block pattern lift to a
//!   frequency-side chirp correction of the `A_half` path.
//! * Everything else goes through an explicit generator factorization.
//!
//! The named paths are authoritative: alternative routes to the same matrix
//! may differ by a constant phase. [`apply_metaplectic_inverse`] inverts the
//! chosen path step by step, so `Û(A)⁻¹Û(A) = Id` holds with no residual
//! constant — downstream quantization rules rely on that pairing.
//!
//! All paths require a self-dual grid (`n·dx² = 1`): Fourier steps then map
//! the sample lattice onto itself.

use crate::fftcore::{self, FftError};
use crate::grid::{GridError, GridSpec, SampledField};
use crate::sympmat::{standard_j, GeneratorStep, SympError, SymplecticMatrix};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Relative norm defect above which a coordinate-change step is rejected.
pub const UNITARITY_TOL: f64 = 1e-6;

/// Tolerance for recognizing the structured dispatch patterns.
const DISPATCH_TOL: f64 = 1e-10;

/// Errors raised by metaplectic application.
#[derive(Debug, thiserror::Error)]
pub enum MetapError {
    #[error(transparent)]
    Symplectic(#[from] SympError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Fft(#[from] FftError),
    #[error(
        "interpolation residual {residual:.3e} exceeds {limit:.1e}: the data is not \
         resolved well enough on this grid for the requested coordinate change"
    )]
    InterpolationResidualExceeded { residual: f64, limit: f64 },
    #[error("matrix acts on {matrix_d} degrees of freedom but the field has {field_d}")]
    DimensionMismatch { matrix_d: usize, field_d: usize },
    #[error("coordinate-change matrix is singular (det = {det:.3e})")]
    SingularChange { det: f64 },
}

/// Result alias for metaplectic operations.
pub type Result<T> = std::result::Result<T, MetapError>;

/// Resolved application strategy for one symplectic matrix.
#[derive(Debug, Clone)]
enum Path {
    Identity,
    /// `J`: full Fourier transform in all `2d` variables.
    FullFourier,
    /// `D_E`: normalized dilation by `E`.
    Linear(DMatrix<f64>),
    /// `V_C`: chirp product with symmetric `C`.
    Chirp(DMatrix<f64>),
    /// `A_FT2·D_E`: dilation by `E`, then the partial Fourier transform in
    /// the second variable group.
    Decomposable(DMatrix<f64>),
    /// Shift-covariant pattern: the `A_half` path followed by the
    /// frequency-side chirp `e^{-πi ζ·Bζ}` with symmetric `B`.
    Covariant(DMatrix<f64>),
    /// Generic: explicit generator word, applied first-to-last.
    Factored(Vec<GeneratorStep>),
}

fn max_abs_mat(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()))
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Coordinate-change matrix `E_τ` with `(E_τ w)_1 = x + τ·y`,
/// `(E_τ w)_2 = x - (1-τ)·y` blockwise.
fn e_tau_matrix(d: usize, tau: f64) -> DMatrix<f64> {
    let mut e = DMatrix::<f64>::zeros(2 * d, 2 * d);
    for i in 0..d {
        e[(i, i)] = 1.0;
        e[(i, d + i)] = tau;
        e[(d + i, i)] = 1.0;
        e[(d + i, d + i)] = -(1.0 - tau);
    }
    e
}

fn invert(e: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let det = e.determinant();
    e.clone()
        .try_inverse()
        .ok_or(MetapError::SingularChange { det })
}

/// Classifies `a` into the cheapest exactly-handled structure.
fn resolve(a: &SymplecticMatrix) -> Result<Path> {
    let d = a.dim();
    let m = a.matrix();
    let ident = DMatrix::<f64>::identity(4 * d, 4 * d);
    if max_abs_mat(&(m - &ident)) < DISPATCH_TOL {
        return Ok(Path::Identity);
    }
    if max_abs_mat(&(m - standard_j(2 * d))) < DISPATCH_TOL {
        return Ok(Path::FullFourier);
    }
    let ur = a.block2(0, 1);
    let ll = a.block2(1, 0);
    let id2 = DMatrix::<f64>::identity(2 * d, 2 * d);
    if max_abs_mat(&ur) < DISPATCH_TOL && max_abs_mat(&ll) < DISPATCH_TOL {
        return Ok(Path::Linear(a.block2(1, 1).transpose()));
    }
    if max_abs_mat(&ur) < DISPATCH_TOL
        && max_abs_mat(&(a.block2(0, 0) - &id2)) < DISPATCH_TOL
        && max_abs_mat(&(a.block2(1, 1) - &id2)) < DISPATCH_TOL
    {
        return Ok(Path::Chirp(symmetrize(&ll)));
    }
    if let Some(e) = a.totally_wigner_decomposable(DISPATCH_TOL) {
        return Ok(Path::Decomposable(e));
    }
    if let Some((a11, a13, a21)) = a.covariant_blocks(1e-9) {
        // A·A_half⁻¹ = [[I, B], [0, I]] with B assembled from the free blocks.
        let mut b = DMatrix::<f64>::zeros(2 * d, 2 * d);
        let half_minus_a11 = DMatrix::<f64>::identity(d, d) * 0.5 - &a11;
        for i in 0..d {
            for j in 0..d {
                b[(i, j)] = a13[(i, j)];
                b[(i, d + j)] = half_minus_a11[(i, j)];
                b[(d + i, j)] = half_minus_a11[(j, i)];
                b[(d + i, d + j)] = -a21[(i, j)];
            }
        }
        return Ok(Path::Covariant(symmetrize(&b)));
    }
    Ok(Path::Factored(a.factor_into_generators()?.steps))
}

fn require_self_dual(f: &SampledField) -> Result<()> {
    if !f.grid.is_self_dual() {
        return Err(MetapError::Grid(GridError::GridNotSelfDual {
            n: f.grid.n,
            dx: f.grid.dx,
        }));
    }
    Ok(())
}

fn require_dim(a: &SymplecticMatrix, f: &SampledField) -> Result<()> {
    let matrix_d = a.dim();
    if matrix_d != f.grid.d {
        return Err(MetapError::DimensionMismatch {
            matrix_d,
            field_d: f.grid.d,
        });
    }
    Ok(())
}

/// Full Fourier transform (all `2d` axes); `forward = false` inverts it.
fn full_fourier(f: &mut SampledField, forward: bool) -> Result<()> {
    let shape = f.grid.field_shape();
    let dx = f.grid.dx;
    for axis in 0..shape.len() {
        fftcore::centered_dft_axis(&mut f.values, &shape, axis, dx, forward)?;
    }
    Ok(())
}

/// Partial Fourier transform in the second variable group (axes `d..2d`).
fn half_fourier(f: &mut SampledField, forward: bool) -> Result<()> {
    let shape = f.grid.field_shape();
    let dx = f.grid.dx;
    let d = f.grid.d;
    for axis in d..2 * d {
        fftcore::centered_dft_axis(&mut f.values, &shape, axis, dx, forward)?;
    }
    Ok(())
}

/// Pointwise chirp product `F(w) ↦ e^{sign·πi w·Cw} F(w)`.
fn chirp_mul(f: &mut SampledField, c: &DMatrix<f64>, sign: f64) {
    let grid = f.grid;
    let n = grid.n;
    let k = 2 * grid.d;
    let mut idx = vec![0usize; k];
    let mut w = vec![0.0f64; k];
    for (flat, v) in f.values.iter_mut().enumerate() {
        let mut rem = flat;
        for a in (0..k).rev() {
            idx[a] = rem % n;
            rem /= n;
        }
        for a in 0..k {
            w[a] = (idx[a] as f64 - n as f64 / 2.0) * grid.field_axis_spacing(a);
        }
        let mut q = 0.0;
        for i in 0..k {
            for j in 0..k {
                q += w[i] * c[(i, j)] * w[j];
            }
        }
        *v *= Complex64::from_polar(1.0, sign * PI * q);
    }
}

/// Normalized dilation `(𝔗_E F)(w) = |det E|^{1/2} F(E·w)`.
///
/// Rejects the result when the relative norm defect exceeds
/// [`UNITARITY_TOL`]: the continuum operator is unitary, so a larger defect
/// means the grid cannot represent `F∘E` faithfully (content pushed past the
/// sampling band or the box).
fn linear_change(f: &mut SampledField, e: &DMatrix<f64>) -> Result<()> {
    let before = f.norm_l2();
    let shape = f.grid.field_shape();
    let dx = f.grid.dx;
    fftcore::resample_linear_map(&mut f.values, &shape, dx, e)?;
    let scale = e.determinant().abs().sqrt();
    for v in &mut f.values {
        *v *= scale;
    }
    if before > 0.0 {
        let after = f.norm_l2();
        let residual = ((after - before) / before).abs();
        if residual > UNITARITY_TOL {
            return Err(MetapError::InterpolationResidualExceeded {
                residual,
                limit: UNITARITY_TOL,
            });
        }
    }
    Ok(())
}

/// Embeds a field into a grid with twice the box and twice the band
/// (`4n` samples per axis at spacing `dx/2`; self-dual grids stay self-dual).
///
/// A generic generator word chirps and Fourier-transforms its intermediate
/// states, which can spread them well past the extent of the input data;
/// running the word with doubled headroom keeps those states representable.
/// [`restrict_headroom`] undoes the embedding.
fn embed_headroom(f: &SampledField) -> Result<SampledField> {
    let grid = f.grid;
    let k = 2 * grid.d;
    let shape = grid.field_shape();
    let (fine, fine_shape, fine_dx) = fftcore::upsample2(&f.values, &shape, grid.dx)?;
    let n2 = fine_shape[0]; // 2n samples at dx/2: same box, doubled band
    let n4 = 2 * n2; // 4n samples at dx/2: doubled box
    let mut values = vec![Complex64::ZERO; n4.pow(k as u32)];
    let mut idx = vec![0usize; k];
    for (flat, v) in fine.iter().enumerate() {
        let mut rem = flat;
        for a in (0..k).rev() {
            idx[a] = rem % n2;
            rem /= n2;
        }
        let mut dst = 0usize;
        for &j in &idx {
            dst = dst * n4 + (j + n2 / 2);
        }
        values[dst] = *v;
    }
    let embedded = GridSpec::new(grid.d, n4, fine_dx)?;
    Ok(SampledField {
        grid: embedded,
        values,
    })
}

/// Inverse of [`embed_headroom`]: crops the central box, then truncates the
/// band back to the original sampling rate.
fn restrict_headroom(f: &SampledField, original: GridSpec) -> Result<SampledField> {
    let k = 2 * original.d;
    let n4 = f.grid.n;
    let n2 = n4 / 2;
    let mut cropped = vec![Complex64::ZERO; n2.pow(k as u32)];
    let mut idx = vec![0usize; k];
    for (flat, slot) in cropped.iter_mut().enumerate() {
        let mut rem = flat;
        for a in (0..k).rev() {
            idx[a] = rem % n2;
            rem /= n2;
        }
        let mut src = 0usize;
        for &j in &idx {
            src = src * n4 + (j + n2 / 2);
        }
        *slot = f.values[src];
    }
    let shape2 = vec![n2; k];
    let coarse = fftcore::downsample2(&cropped, &shape2, f.grid.dx)?;
    Ok(SampledField {
        grid: original,
        values: coarse,
    })
}

/// Applies one generator step (`forward = false` applies its exact inverse).
fn run_step(f: &mut SampledField, step: &GeneratorStep, forward: bool) -> Result<()> {
    match step {
        GeneratorStep::Fourier => full_fourier(f, forward),
        GeneratorStep::LinearChange(e) => {
            if forward {
                linear_change(f, e)
            } else {
                linear_change(f, &invert(e)?)
            }
        }
        GeneratorStep::Chirp(c) => {
            chirp_mul(f, c, if forward { 1.0 } else { -1.0 });
            Ok(())
        }
    }
}

/// Runs a resolved path. With `forward = false` the steps are inverted and
/// applied in reverse order, so reverse∘forward is the identity up to
/// interpolation residue (and exactly phase-free).
fn run(path: &Path, d: usize, f: &SampledField, forward: bool) -> Result<SampledField> {
    let mut out = f.clone();
    match path {
        Path::Identity => {}
        Path::FullFourier => full_fourier(&mut out, forward)?,
        Path::Linear(e) => {
            if forward {
                linear_change(&mut out, e)?;
            } else {
                linear_change(&mut out, &invert(e)?)?;
            }
        }
        Path::Chirp(c) => chirp_mul(&mut out, c, if forward { 1.0 } else { -1.0 }),
        Path::Decomposable(e) => {
            if forward {
                linear_change(&mut out, e)?;
                half_fourier(&mut out, true)?;
            } else {
                half_fourier(&mut out, false)?;
                linear_change(&mut out, &invert(e)?)?;
            }
        }
        Path::Covariant(b) => {
            let e_half = e_tau_matrix(d, 0.5);
            if forward {
                linear_change(&mut out, &e_half)?;
                half_fourier(&mut out, true)?;
                full_fourier(&mut out, true)?;
                chirp_mul(&mut out, b, -1.0);
                full_fourier(&mut out, false)?;
            } else {
                full_fourier(&mut out, true)?;
                chirp_mul(&mut out, b, 1.0);
                full_fourier(&mut out, false)?;
                half_fourier(&mut out, false)?;
                linear_change(&mut out, &invert(&e_half)?)?;
            }
        }
        Path::Factored(steps) => {
            // Generator words need spread headroom; the embedded grid is
            // `(4n)^{2d}` samples, which is only affordable for d = 1.
            let original = out.grid;
            let embed = original.d == 1;
            if embed {
                out = embed_headroom(&out)?;
            }
            if forward {
                for step in steps {
                    run_step(&mut out, step, true)?;
                }
            } else {
                for step in steps.iter().rev() {
                    run_step(&mut out, step, false)?;
                }
            }
            if embed {
                out = restrict_headroom(&out, original)?;
            }
        }
    }
    Ok(out)
}

/// Applies a single generator step to a field (self-dual grid required).
pub fn apply_generator(step: &GeneratorStep, f: &SampledField) -> Result<SampledField> {
    f.validate()?;
    require_self_dual(f)?;
    let mut out = f.clone();
    run_step(&mut out, step, true)?;
    Ok(out)
}

/// Applies the unitary lift `Û(A)` of a symplectic matrix to a field.
pub fn apply_metaplectic(a: &SymplecticMatrix, f: &SampledField) -> Result<SampledField> {
    f.validate()?;
    require_self_dual(f)?;
    require_dim(a, f)?;
    let path = resolve(a)?;
    run(&path, f.grid.d, f, true)
}

/// Applies `Û(A)⁻¹` by inverting the same path [`apply_metaplectic`] chose,
/// so the two compose to the identity with no residual constant.
pub fn apply_metaplectic_inverse(a: &SymplecticMatrix, f: &SampledField) -> Result<SampledField> {
    f.validate()?;
    require_self_dual(f)?;
    require_dim(a, f)?;
    let path = resolve(a)?;
    run(&path, f.grid.d, f, false)
}

/// Applies `A` through its generator factorization regardless of structure.
///
/// Useful as an independent cross-check of the structured paths; the result
/// may differ from [`apply_metaplectic`] by a constant phase.
pub fn apply_via_factorization(a: &SymplecticMatrix, f: &SampledField) -> Result<SampledField> {
    f.validate()?;
    require_self_dual(f)?;
    require_dim(a, f)?;
    let steps = a.factor_into_generators()?.steps;
    run(&Path::Factored(steps), f.grid.d, f, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{aligned_distance, tensor_conj, GridSpec, SampledFunction};
    use crate::sympmat::random_covariant;

    fn self_dual_grid(d: usize, n: usize) -> GridSpec {
        GridSpec::new(d, n, 1.0 / (n as f64).sqrt()).unwrap()
    }

    /// A smooth, well-localized, non-symmetric test field.
    fn bump(grid: GridSpec) -> SampledField {
        SampledField::from_fn(grid, |x, xi| {
            let r2: f64 = x.iter().map(|v| v * v).sum::<f64>()
                + xi.iter().map(|v| v * v).sum::<f64>();
            let skew: f64 = x.iter().sum::<f64>() * 0.4 + xi.iter().sum::<f64>() * 0.1;
            Complex64::new((-PI * r2).exp() * (1.0 + skew), 0.3 * skew * (-PI * r2).exp())
        })
    }

    fn rel_l2(a: &SampledField, b: &SampledField) -> f64 {
        a.sub(b).unwrap().norm_l2() / b.norm_l2()
    }

    #[test]
    fn identity_path_returns_input() {
        let grid = self_dual_grid(1, 64);
        let f = bump(grid);
        let a = SymplecticMatrix::identity(1).unwrap();
        let out = apply_metaplectic(&a, &f).unwrap();
        assert!(rel_l2(&out, &f) < 1e-14);
    }

    #[test]
    fn fourier_path_fixes_the_standard_gaussian() {
        let grid = self_dual_grid(1, 256);
        let f = SampledField::from_fn(grid, |x, xi| {
            let r2: f64 =
                x.iter().map(|v| v * v).sum::<f64>() + xi.iter().map(|v| v * v).sum::<f64>();
            Complex64::new((-PI * r2).exp(), 0.0)
        });
        let a = SymplecticMatrix::j(1).unwrap();
        let out = apply_metaplectic(&a, &f).unwrap();
        let mut err = 0.0f64;
        for (got, want) in out.values.iter().zip(&f.values) {
            err = err.max((got - want).norm());
        }
        assert!(err < 1e-10, "err = {err}");
    }

    #[test]
    fn linear_path_matches_closed_form_dilation() {
        let grid = self_dual_grid(1, 256);
        let f = SampledField::from_fn(grid, |x, xi| {
            Complex64::new((-PI * (x[0] * x[0] + xi[0] * xi[0])).exp(), 0.0)
        });
        let e = DMatrix::from_row_slice(2, 2, &[0.8, 0.0, 0.0, 1.25]);
        let a = SymplecticMatrix::d_e(1, &e).unwrap();
        let out = apply_metaplectic(&a, &f).unwrap();
        let scale = e.determinant().abs().sqrt();
        let want = SampledField::from_fn(grid, |x, xi| {
            let u = 0.8 * x[0];
            let v = 1.25 * xi[0];
            Complex64::new(scale * (-PI * (u * u + v * v)).exp(), 0.0)
        });
        let mut err = 0.0f64;
        for (got, wantv) in out.values.iter().zip(&want.values) {
            err = err.max((got - wantv).norm());
        }
        assert!(err < 1e-9, "err = {err}");
    }

    #[test]
    fn chirp_path_multiplies_quadratic_phase() {
        let grid = self_dual_grid(1, 64);
        let f = bump(grid);
        let c = DMatrix::from_row_slice(2, 2, &[0.7, 0.2, 0.2, -0.4]);
        let a = SymplecticMatrix::v_c(1, &c).unwrap();
        let out = apply_metaplectic(&a, &f).unwrap();
        let want = SampledField::from_fn(grid, |x, xi| {
            let w = [x[0], xi[0]];
            let mut q = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    q += w[i] * c[(i, j)] * w[j];
                }
            }
            Complex64::from_polar(1.0, PI * q)
        });
        let mut err = 0.0f64;
        for (flat, got) in out.values.iter().enumerate() {
            err = err.max((got - f.values[flat] * want.values[flat]).norm());
        }
        assert!(err < 1e-12, "err = {err}");
    }

    /// Pins the second-variable Fourier convention: applying the lift of
    /// `A_ST` to `f ⊗ conj g` must reproduce the direct windowed-transform
    /// quadrature `Σ_t f(t)·conj(g(t-x))·e^{-2πitξ}·dx` exactly (both sides
    /// wrap periodically; the window keeps every wrapped term negligible).
    #[test]
    fn st_path_matches_windowed_transform_quadrature() {
        let grid = self_dual_grid(1, 64);
        let f = SampledFunction::from_fn(grid, |x| {
            Complex64::new((-PI * (x[0] - 0.5) * (x[0] - 0.5)).exp(), 0.0)
        });
        let g = SampledFunction::gaussian(grid);
        let tensor = tensor_conj(&f, &g).unwrap();
        let a = SymplecticMatrix::a_st(1).unwrap();
        let out = apply_metaplectic(&a, &tensor).unwrap();

        let n = grid.n;
        let mut err = 0.0f64;
        for jx in 0..n {
            let x = grid.coord(jx);
            for mxi in 0..n {
                let xi = grid.freq_coord(mxi);
                let mut acc = Complex64::ZERO;
                for jt in 0..n {
                    let t = grid.coord(jt);
                    // periodic window lookup, matching the discrete model
                    let shifted = (jt as i64 - (jx as i64 - n as i64 / 2)).rem_euclid(n as i64);
                    acc += f.values[jt]
                        * g.values[shifted as usize].conj()
                        * Complex64::from_polar(1.0, -2.0 * PI * t * xi);
                }
                acc *= grid.dx;
                err = err.max((out.values[jx * n + mxi] - acc).norm());
            }
        }
        assert!(err < 1e-10, "err = {err}");
    }

    /// Pins the τ-family path against the closed form for the standard
    /// Gaussian: with `q = τ² + (1-τ)²`,
    /// `q^{-1/2}·exp(-2πx² + π((2τ-1)²x² - ξ² + 2i(2τ-1)xξ)/q)`.
    #[test]
    fn tau_path_matches_gaussian_closed_form() {
        let grid = self_dual_grid(1, 256);
        let phi = SampledFunction::gaussian(grid);
        let tensor = tensor_conj(&phi, &phi).unwrap();
        for &tau in &[0.3, 0.5, 0.85] {
            let a = SymplecticMatrix::a_tau(1, tau).unwrap();
            let out = apply_metaplectic(&a, &tensor).unwrap();
            let q = tau * tau + (1.0 - tau) * (1.0 - tau);
            let want = SampledField::from_fn(grid, |x, xi| {
                let (x, xi) = (x[0], xi[0]);
                let s = 2.0 * tau - 1.0;
                let re = -2.0 * PI * x * x + PI * (s * s * x * x - xi * xi) / q;
                let im = PI * 2.0 * s * x * xi / q;
                Complex64::new(re.exp() * im.cos(), re.exp() * im.sin()) / q.sqrt()
            });
            let mut err = 0.0f64;
            for (got, wantv) in out.values.iter().zip(&want.values) {
                err = err.max((got - wantv).norm());
            }
            assert!(err < 1e-8, "tau = {tau}: err = {err}");
        }
    }

    #[test]
    fn all_paths_agree_with_factorization_up_to_phase() {
        let grid = self_dual_grid(1, 64);
        let f = bump(grid);
        let cases = vec![
            SymplecticMatrix::j(1).unwrap(),
            SymplecticMatrix::a_st(1).unwrap(),
            SymplecticMatrix::a_tau(1, 0.3).unwrap(),
            SymplecticMatrix::a_half(1).unwrap(),
            random_covariant(1, 7),
        ];
        for a in cases {
            let fast = apply_metaplectic(&a, &f).unwrap();
            let slow = apply_via_factorization(&a, &f).unwrap();
            let dist = aligned_distance(&slow, &fast).unwrap();
            assert!(dist < 1e-6, "matrix residual path disagreement: {dist}");
        }
    }

    #[test]
    fn inverse_undoes_apply_on_every_path() {
        let grid = self_dual_grid(1, 64);
        let f = bump(grid);
        let mut cases = vec![
            SymplecticMatrix::identity(1).unwrap(),
            SymplecticMatrix::j(1).unwrap(),
            SymplecticMatrix::d_e(1, &DMatrix::from_row_slice(2, 2, &[1.1, 0.2, 0.0, 0.9]))
                .unwrap(),
            SymplecticMatrix::v_c(1, &DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.1, -0.3]))
                .unwrap(),
            SymplecticMatrix::a_st(1).unwrap(),
            SymplecticMatrix::a_tau(1, 0.7).unwrap(),
            random_covariant(1, 3),
        ];
        // a generic product that reaches the factorization path
        let generic = random_covariant(1, 5).matrix() * SymplecticMatrix::j(1).unwrap().matrix();
        cases.push(SymplecticMatrix::from_matrix(1, generic).unwrap());
        for a in cases {
            let fwd = apply_metaplectic(&a, &f).unwrap();
            let back = apply_metaplectic_inverse(&a, &fwd).unwrap();
            let err = rel_l2(&back, &f);
            assert!(err < 1e-8, "roundtrip err = {err}");
        }
    }

    #[test]
    fn application_is_unitary_on_resolved_data() {
        let grid = self_dual_grid(1, 128);
        let f = bump(grid);
        let norm_in = f.norm_l2();
        for a in [
            SymplecticMatrix::j(1).unwrap(),
            SymplecticMatrix::a_st(1).unwrap(),
            SymplecticMatrix::a_tau(1, 0.3).unwrap(),
            random_covariant(1, 11),
        ] {
            let out = apply_metaplectic(&a, &f).unwrap();
            let defect = (out.norm_l2() - norm_in).abs() / norm_in;
            assert!(defect < 1e-9, "unitarity defect = {defect:.3e}");
        }
    }

    #[test]
    fn composition_matches_product_up_to_phase() {
        let grid = self_dual_grid(1, 64);
        let f = bump(grid);
        let a = SymplecticMatrix::a_tau(1, 0.3).unwrap();
        let b = random_covariant(1, 9);
        let product =
            SymplecticMatrix::from_matrix(1, a.matrix() * b.matrix()).unwrap();
        let staged = apply_metaplectic(&a, &apply_metaplectic(&b, &f).unwrap()).unwrap();
        let direct = apply_metaplectic(&product, &f).unwrap();
        let dist = aligned_distance(&direct, &staged).unwrap();
        assert!(dist < 1e-6, "composition disagreement: {dist}");
    }

    #[test]
    fn covariant_block_assembly_matches_matrix_algebra() {
        // A·A_half⁻¹ must be upper unitriangular in 2d-blocks with the
        // assembled B in the corner.
        let a = random_covariant(1, 21);
        let path = resolve(&a).unwrap();
        let b = match path {
            Path::Covariant(b) => b,
            other => panic!("expected covariant path, got {other:?}"),
        };
        let a_half = SymplecticMatrix::a_half(1).unwrap();
        let m = a.matrix() * a_half.symplectic_inverse().matrix();
        let d2 = 2;
        for i in 0..d2 {
            for j in 0..d2 {
                let want_ul = if i == j { 1.0 } else { 0.0 };
                assert!((m[(i, j)] - want_ul).abs() < 1e-12);
                assert!((m[(i, d2 + j)] - b[(i, j)]).abs() < 1e-12);
                assert!(m[(d2 + i, j)].abs() < 1e-12);
                assert!((m[(d2 + i, d2 + j)] - want_ul).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn two_dimensional_roundtrip_smoke() {
        // The d = 2 grid has a tight box (±2), so the data must be narrow:
        // e^{-2πr²} leaves ~1e-11 at the box and band edges.
        let grid = self_dual_grid(2, 16);
        let f = SampledField::from_fn(grid, |x, xi| {
            let r2: f64 =
                x.iter().map(|v| v * v).sum::<f64>() + xi.iter().map(|v| v * v).sum::<f64>();
            let skew = 1.0 + 0.3 * x[0] + 0.2 * xi[1];
            Complex64::new((-2.0 * PI * r2).exp() * skew, 0.1 * skew * (-2.0 * PI * r2).exp())
        });
        for a in [
            SymplecticMatrix::j(2).unwrap(),
            SymplecticMatrix::a_st(2).unwrap(),
            SymplecticMatrix::d_s(2).unwrap(),
            SymplecticMatrix::a_tau(2, 1.0).unwrap(), // integer-E decomposable
            random_covariant(2, 2),
        ] {
            let fwd = apply_metaplectic(&a, &f).unwrap();
            let defect = (fwd.norm_l2() - f.norm_l2()).abs() / f.norm_l2();
            assert!(defect < 1e-8, "unitarity defect = {defect:.3e}");
            let back = apply_metaplectic_inverse(&a, &fwd).unwrap();
            let err = rel_l2(&back, &f);
            assert!(err < 1e-7, "roundtrip err = {err}");
        }
    }

    #[test]
    fn mismatched_dimension_is_rejected() {
        let grid = self_dual_grid(1, 64);
        let f = bump(grid);
        let a = SymplecticMatrix::j(2).unwrap();
        assert!(matches!(
            apply_metaplectic(&a, &f),
            Err(MetapError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn non_self_dual_grid_is_rejected() {
        let grid = GridSpec::new(1, 64, 0.1).unwrap();
        let f = bump(grid);
        let a = SymplecticMatrix::j(1).unwrap();
        assert!(matches!(
            apply_metaplectic(&a, &f),
            Err(MetapError::Grid(GridError::GridNotSelfDual { .. }))
        ));
    }

    #[test]
    fn rough_data_triggers_the_interpolation_guard() {
        // Alternating-sign data sits at the sampling band edge; a shearing
        // coordinate change cannot be represented there.
        let grid = self_dual_grid(1, 64);
        let f = SampledField::from_fn(grid, |x, xi| {
            let s = ((x[0] / grid.dx).round() + (xi[0] / grid.dx).round()) as i64;
            Complex64::new(if s % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
        });
        let a = SymplecticMatrix::a_tau(1, 0.37).unwrap();
        let got = apply_metaplectic(&a, &f);
        assert!(matches!(
            got,
            Err(MetapError::InterpolationResidualExceeded { .. })
        ));
    }
}
