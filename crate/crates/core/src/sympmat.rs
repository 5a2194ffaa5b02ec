//! Symplectic `4d×4d` matrices: constructors, structure checks, and
//! factorization into the generator set.
//!
//! Phase space here is `R^{4d}` — points `(x, ξ)` with `x, ξ ∈ R^{2d}` — and
//! `Sp(2d, R)` consists of the real `4d×4d` matrices with `AᵀJA = J`, where
//! `J = [[0, I],[−I, 0]]` in `2d×2d` blocks. The group is generated by
//!
//! * `J` itself (realized on functions by the Fourier transform),
//! * `D_E = [[E⁻¹, 0],[0, Eᵀ]]` for invertible `E` (coordinate changes),
//! * `V_C = [[I, 0],[C, I]]` for symmetric `C` (chirp multiplications),
//!
//! and [`factor_into_generators`](SymplecticMatrix::factor_into_generators)
//! produces an explicit word in these generators for any symplectic matrix.
//!
//! The module also provides the named matrices used by the transforms in
//! [`crate::tfr`] (the partial-Fourier matrix, the windowed-transform matrix,
//! the `τ` family), the covariant block pattern and its residual report, the
//! block conditions tied to upper-block-triangularity of `A_half·A⁻¹`, and
//! the "coordinate change + partial Fourier" decomposition test.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;

/// Default tolerance for the symplectic residual `‖AᵀJA − J‖_max`.
pub const SYMP_TOL: f64 = 1e-10;
/// Default tolerance for block-pattern matching.
pub const PATTERN_TOL: f64 = 1e-8;

/// Errors from symplectic-matrix construction and factorization.
#[derive(Debug, thiserror::Error)]
pub enum SympError {
    #[error("matrix is not symplectic: ‖AᵀJA − J‖_max = {residual:.3e}")]
    NotSymplectic { residual: f64 },
    #[error("matrix size {got} does not match 4d = {want}")]
    SizeMismatch { got: usize, want: usize },
    #[error("E must be invertible: |det E| = {det:.3e}")]
    SingularE { det: f64 },
    #[error("C must be symmetric: ‖C − Cᵀ‖_max = {asym:.3e}")]
    NonSymmetricC { asym: f64 },
    #[error("factorization failed: {reason}")]
    FactorizationFailed { reason: String },
    #[error("unknown matrix name '{name}'")]
    UnknownName { name: String },
    #[error("matrix text parse error: {0}")]
    Parse(String),
}

/// Result alias for this module.
pub type Result<T> = std::result::Result<T, SympError>;

/// The standard symplectic form `J` of size `2k×2k` (`k×k` blocks
/// `[[0, I],[−I, 0]]`).
pub fn standard_j(k: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * k, 2 * k);
    for i in 0..k {
        j[(i, k + i)] = 1.0;
        j[(k + i, i)] = -1.0;
    }
    j
}

/// `‖AᵀJA − J‖_max` for a `4d×4d` candidate.
pub fn symplectic_residual(m: &DMatrix<f64>) -> f64 {
    let k = m.nrows() / 2;
    let j = standard_j(k);
    let r = m.transpose() * &j * m - &j;
    r.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()))
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()))
}

/// A validated element of `Sp(2d, R)` acting on `R^{4d}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix {
    d: usize,
    m: DMatrix<f64>,
}

/// One residual of a named block identity.
#[derive(Debug, Clone)]
pub struct ResidualEntry {
    pub name: &'static str,
    pub value: f64,
}

/// Result of the covariant-pattern check (eight named block identities).
#[derive(Debug, Clone)]
pub struct CovarianceReport {
    pub covariant: bool,
    pub tol: f64,
    pub residuals: Vec<ResidualEntry>,
}

impl CovarianceReport {
    /// The largest residual across all identities.
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.value).fold(0.0, f64::max)
    }
}

/// Result of the block-condition check, with the triangularity cross-check.
#[derive(Debug, Clone)]
pub struct BlockConditionReport {
    pub satisfied: bool,
    pub tol: f64,
    /// Residuals of the four block combinations that must vanish.
    pub residuals: Vec<ResidualEntry>,
    /// Max |entry| of the lower-left `2d×2d` block of `A_half·A⁻¹`
    /// (equivalently zero iff the four conditions hold).
    pub triangularity_residual: f64,
}

/// One generator in a metaplectic factorization.
#[derive(Debug, Clone)]
pub enum GeneratorStep {
    /// The full Fourier transform; matrix `J`.
    Fourier,
    /// Coordinate change `w ↦ E·w`; matrix `D_E` (E invertible `2d×2d`).
    LinearChange(DMatrix<f64>),
    /// Chirp multiplication `e^{πi w·Cw}`; matrix `V_C` (C symmetric `2d×2d`).
    Chirp(DMatrix<f64>),
}

impl GeneratorStep {
    /// The symplectic matrix realized by this step (for half-dimension `d`).
    pub fn matrix(&self, d: usize) -> Result<SymplecticMatrix> {
        match self {
            GeneratorStep::Fourier => SymplecticMatrix::j(d),
            GeneratorStep::LinearChange(e) => SymplecticMatrix::d_e(d, e),
            GeneratorStep::Chirp(c) => SymplecticMatrix::v_c(d, c),
        }
    }
}

/// An ordered generator word; applying the steps first-to-last realizes
/// `source` (up to the documented numerical tolerance).
#[derive(Debug, Clone)]
pub struct MetaplecticFactorization {
    pub d: usize,
    pub steps: Vec<GeneratorStep>,
}

impl MetaplecticFactorization {
    /// Multiplies the step matrices in application order (first step applied
    /// first, i.e. rightmost factor).
    pub fn recompose(&self) -> Result<SymplecticMatrix> {
        let mut acc = DMatrix::identity(4 * self.d, 4 * self.d);
        for step in &self.steps {
            let m = step.matrix(self.d)?;
            acc = m.m * acc;
        }
        SymplecticMatrix::from_matrix(self.d, acc)
    }
}

impl SymplecticMatrix {
    /// Validates symplecticity and wraps the matrix.
    pub fn from_matrix(d: usize, m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != 4 * d || m.ncols() != 4 * d {
            return Err(SympError::SizeMismatch {
                got: m.nrows(),
                want: 4 * d,
            });
        }
        let residual = symplectic_residual(&m);
        if residual > SYMP_TOL {
            return Err(SympError::NotSymplectic { residual });
        }
        Ok(SymplecticMatrix { d, m })
    }

    /// Assembles from sixteen `d×d` blocks in row-major block order.
    pub fn from_blocks(d: usize, blocks: &[DMatrix<f64>]) -> Result<Self> {
        assert_eq!(blocks.len(), 16, "expected 16 blocks");
        let mut m = DMatrix::zeros(4 * d, 4 * d);
        for bi in 0..4 {
            for bj in 0..4 {
                let b = &blocks[bi * 4 + bj];
                if b.nrows() != d || b.ncols() != d {
                    return Err(SympError::SizeMismatch {
                        got: b.nrows(),
                        want: d,
                    });
                }
                for i in 0..d {
                    for j in 0..d {
                        m[(bi * d + i, bj * d + j)] = b[(i, j)];
                    }
                }
            }
        }
        Self::from_matrix(d, m)
    }

    /// Half block dimension `d` (the matrix is `4d×4d`).
    pub fn dim(&self) -> usize {
        self.d
    }

    /// The underlying matrix.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// The `d×d` block at block position `(i, j)`, `i, j ∈ 0..4`.
    pub fn block(&self, i: usize, j: usize) -> DMatrix<f64> {
        let d = self.d;
        self.m.view((i * d, j * d), (d, d)).into()
    }

    /// The `2d×2d` block at position `(i, j)`, `i, j ∈ 0..2`.
    pub fn block2(&self, i: usize, j: usize) -> DMatrix<f64> {
        let k = 2 * self.d;
        self.m.view((i * k, j * k), (k, k)).into()
    }

    /// `‖AᵀJA − J‖_max` of this matrix.
    pub fn residual(&self) -> f64 {
        symplectic_residual(&self.m)
    }

    // ---- named matrices ------------------------------------------------

    /// The identity.
    pub fn identity(d: usize) -> Result<Self> {
        Self::from_matrix(d, DMatrix::identity(4 * d, 4 * d))
    }

    /// The standard symplectic matrix `J = [[0, I],[−I, 0]]` (2d-blocks).
    pub fn j(d: usize) -> Result<Self> {
        Self::from_matrix(d, standard_j(2 * d))
    }

    /// Partial-Fourier matrix: `[[I,0,0,0],[0,0,0,I],[0,0,I,0],[0,−I,0,0]]`
    /// in `d×d` blocks. Realized on functions by the Fourier transform in the
    /// second variable block.
    pub fn a_ft2(d: usize) -> Result<Self> {
        let i = DMatrix::identity(d, d);
        let z = DMatrix::zeros(d, d);
        Self::from_blocks(
            d,
            &[
                i.clone(), z.clone(), z.clone(), z.clone(),
                z.clone(), z.clone(), z.clone(), i.clone(),
                z.clone(), z.clone(), i.clone(), z.clone(),
                z.clone(), -i.clone(), z.clone(), z.clone(),
            ],
        )
    }

    /// The matrix whose phase-space transform is the windowed Fourier
    /// transform: `[[I,−I,0,0],[0,0,I,I],[0,0,0,−I],[−I,0,0,0]]`.
    pub fn a_st(d: usize) -> Result<Self> {
        let i = DMatrix::identity(d, d);
        let z = DMatrix::zeros(d, d);
        Self::from_blocks(
            d,
            &[
                i.clone(), -i.clone(), z.clone(), z.clone(),
                z.clone(), z.clone(), i.clone(), i.clone(),
                z.clone(), z.clone(), z.clone(), -i.clone(),
                -i.clone(), z.clone(), z.clone(), z.clone(),
            ],
        )
    }

    /// The `τ`-family matrix
    /// `[[(1−τ)I, τI, 0, 0],[0, 0, τI, −(1−τ)I],[0, 0, I, I],[−I, I, 0, 0]]`.
    pub fn a_tau(d: usize, tau: f64) -> Result<Self> {
        let i = DMatrix::identity(d, d);
        let z = DMatrix::zeros(d, d);
        Self::from_blocks(
            d,
            &[
                &i * (1.0 - tau), &i * tau, z.clone(), z.clone(),
                z.clone(), z.clone(), &i * tau, &i * (tau - 1.0),
                z.clone(), z.clone(), i.clone(), i.clone(),
                -i.clone(), i.clone(), z.clone(), z.clone(),
            ],
        )
    }

    /// `a_tau(d, 1/2)` — the matrix behind the classical Wigner transform.
    pub fn a_half(d: usize) -> Result<Self> {
        Self::a_tau(d, 0.5)
    }

    /// Coordinate-change matrix `D_E = [[E⁻¹, 0],[0, Eᵀ]]` (2d-blocks) for
    /// invertible `E` of size `2d×2d`.
    pub fn d_e(d: usize, e: &DMatrix<f64>) -> Result<Self> {
        let k = 2 * d;
        if e.nrows() != k || e.ncols() != k {
            return Err(SympError::SizeMismatch {
                got: e.nrows(),
                want: k,
            });
        }
        let det = e.determinant();
        if det.abs() < 1e-12 {
            return Err(SympError::SingularE { det });
        }
        let einv = e
            .clone()
            .try_inverse()
            .ok_or(SympError::SingularE { det })?;
        let mut m = DMatrix::zeros(2 * k, 2 * k);
        for i in 0..k {
            for j in 0..k {
                m[(i, j)] = einv[(i, j)];
                m[(k + i, k + j)] = e[(j, i)];
            }
        }
        Self::from_matrix(d, m)
    }

    /// Chirp matrix `V_C = [[I, 0],[C, I]]` (2d-blocks) for symmetric `C`.
    pub fn v_c(d: usize, c: &DMatrix<f64>) -> Result<Self> {
        let k = 2 * d;
        if c.nrows() != k || c.ncols() != k {
            return Err(SympError::SizeMismatch {
                got: c.nrows(),
                want: k,
            });
        }
        let asym = max_abs(&(c - c.transpose()));
        if asym > 1e-12 {
            return Err(SympError::NonSymmetricC { asym });
        }
        let mut m = DMatrix::identity(2 * k, 2 * k);
        for i in 0..k {
            for j in 0..k {
                m[(k + i, j)] = c[(i, j)];
            }
        }
        Self::from_matrix(d, m)
    }

    /// `D_S` for the swap `S = [[0, I],[I, 0]]` (d-blocks): exchanges the two
    /// halves of each variable group. `S⁻¹ = S = Sᵀ`.
    pub fn d_s(d: usize) -> Result<Self> {
        let mut s = DMatrix::zeros(2 * d, 2 * d);
        for i in 0..d {
            s[(i, d + i)] = 1.0;
            s[(d + i, i)] = 1.0;
        }
        Self::d_e(d, &s)
    }

    /// Resolves a matrix by name: `I`, `J`, `A_FT2`, `A_ST`, `A_half`,
    /// `A_tau` (requires `tau`), `D_S`. Case-insensitive.
    pub fn named(name: &str, d: usize, tau: Option<f64>) -> Result<Self> {
        match name.to_ascii_uppercase().as_str() {
            "I" | "ID" | "IDENTITY" => Self::identity(d),
            "J" => Self::j(d),
            "A_FT2" | "AFT2" => Self::a_ft2(d),
            "A_ST" | "AST" => Self::a_st(d),
            "A_HALF" | "AHALF" => Self::a_half(d),
            "A_TAU" | "ATAU" => {
                let t = tau.ok_or_else(|| SympError::Parse("A_tau requires --tau".into()))?;
                Self::a_tau(d, t)
            }
            "D_S" | "DS" => Self::d_s(d),
            _ => Err(SympError::UnknownName { name: name.into() }),
        }
    }

    // ---- structure -----------------------------------------------------

    /// Exact inverse by the block-transpose formula: for
    /// `A = [[P, Q],[R, S]]` (2d-blocks), `A⁻¹ = [[Sᵀ, −Qᵀ],[−Rᵀ, Pᵀ]]`.
    pub fn symplectic_inverse(&self) -> SymplecticMatrix {
        let k = 2 * self.d;
        let p = self.block2(0, 0);
        let q = self.block2(0, 1);
        let r = self.block2(1, 0);
        let s = self.block2(1, 1);
        let mut m = DMatrix::zeros(2 * k, 2 * k);
        for i in 0..k {
            for j in 0..k {
                m[(i, j)] = s[(j, i)];
                m[(i, k + j)] = -q[(j, i)];
                m[(k + i, j)] = -r[(j, i)];
                m[(k + i, k + j)] = p[(j, i)];
            }
        }
        SymplecticMatrix { d: self.d, m }
    }

    /// Checks the covariant block pattern
    /// `[[A₁₁, I−A₁₁, A₁₃, A₁₃],[A₂₁, −A₂₁, I−A₁₁ᵀ, −A₁₁ᵀ],[0,0,I,I],[−I,I,0,0]]`
    /// with `A₁₃, A₂₁` symmetric, reporting each identity's residual by name.
    pub fn is_covariant(&self, tol: f64) -> CovarianceReport {
        let d = self.d;
        let i = DMatrix::identity(d, d);
        let z = DMatrix::zeros(d, d);
        let a11 = self.block(0, 0);
        let a13 = self.block(0, 2);
        let a21 = self.block(1, 0);

        let rows34 = {
            let mut r: f64 = 0.0;
            let want: [(usize, usize, &DMatrix<f64>); 8] = [
                (2, 0, &z),
                (2, 1, &z),
                (2, 2, &i),
                (2, 3, &i),
                (3, 1, &i),
                (3, 2, &z),
                (3, 3, &z),
                (3, 0, &z), // placeholder; A₄₁ = −I handled below
            ];
            for &(bi, bj, target) in want.iter().take(7) {
                r = r.max(max_abs(&(self.block(bi, bj) - target)));
            }
            r = r.max(max_abs(&(self.block(3, 0) + &i)));
            r
        };

        let residuals = vec![
            ResidualEntry {
                name: "rows 3-4 pattern",
                value: rows34,
            },
            ResidualEntry {
                name: "A12 - (I - A11)",
                value: max_abs(&(self.block(0, 1) - (&i - &a11))),
            },
            ResidualEntry {
                name: "A22 + A21",
                value: max_abs(&(self.block(1, 1) + &a21)),
            },
            ResidualEntry {
                name: "A14 - A13",
                value: max_abs(&(self.block(0, 3) - &a13)),
            },
            ResidualEntry {
                name: "A23 - (I - A11^T)",
                value: max_abs(&(self.block(1, 2) - (&i - a11.transpose()))),
            },
            ResidualEntry {
                name: "A24 + A11^T",
                value: max_abs(&(self.block(1, 3) + a11.transpose())),
            },
            ResidualEntry {
                name: "A13 - A13^T",
                value: max_abs(&(&a13 - a13.transpose())),
            },
            ResidualEntry {
                name: "A21 - A21^T",
                value: max_abs(&(&a21 - a21.transpose())),
            },
        ];
        let covariant = residuals.iter().all(|r| r.value <= tol);
        CovarianceReport {
            covariant,
            tol,
            residuals,
        }
    }

    /// If covariant (within `tol`), extracts the pattern data
    /// `(A₁₁, A₁₃, A₂₁)`.
    pub fn covariant_blocks(&self, tol: f64) -> Option<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)> {
        let report = self.is_covariant(tol);
        if !report.covariant {
            return None;
        }
        Some((self.block(0, 0), self.block(0, 2), self.block(1, 0)))
    }

    /// Builds a covariant matrix from pattern data (`a13`, `a21` symmetric).
    pub fn covariant_from_blocks(
        d: usize,
        a11: &DMatrix<f64>,
        a13: &DMatrix<f64>,
        a21: &DMatrix<f64>,
    ) -> Result<Self> {
        let asym13 = max_abs(&(a13 - a13.transpose()));
        if asym13 > 1e-12 {
            return Err(SympError::NonSymmetricC { asym: asym13 });
        }
        let asym21 = max_abs(&(a21 - a21.transpose()));
        if asym21 > 1e-12 {
            return Err(SympError::NonSymmetricC { asym: asym21 });
        }
        let i = DMatrix::identity(d, d);
        let z = DMatrix::zeros(d, d);
        Self::from_blocks(
            d,
            &[
                a11.clone(), &i - a11, a13.clone(), a13.clone(),
                a21.clone(), -a21, &i - a11.transpose(), -a11.transpose(),
                z.clone(), z.clone(), i.clone(), i.clone(),
                -i.clone(), i.clone(), z.clone(), z,
            ],
        )
    }

    /// Checks the four block conditions
    /// `A₃₁+A₃₂ = 0`, `A₄₁+A₄₂ = 0`, `A₃₄−A₃₃ = 0`, `A₄₄−A₄₃ = 0`,
    /// which hold iff `A_half·A⁻¹` is upper block triangular in `2d×2d`
    /// blocks (the triangularity residual is reported as a cross-check).
    pub fn satisfies_block_conditions(&self, tol: f64) -> BlockConditionReport {
        let residuals = vec![
            ResidualEntry {
                name: "A31 + A32",
                value: max_abs(&(self.block(2, 0) + self.block(2, 1))),
            },
            ResidualEntry {
                name: "A41 + A42",
                value: max_abs(&(self.block(3, 0) + self.block(3, 1))),
            },
            ResidualEntry {
                name: "A34 - A33",
                value: max_abs(&(self.block(2, 3) - self.block(2, 2))),
            },
            ResidualEntry {
                name: "A44 - A43",
                value: max_abs(&(self.block(3, 3) - self.block(3, 2))),
            },
        ];
        let a_half = Self::a_half(self.d).expect("A_half is symplectic");
        let prod = a_half.m * self.symplectic_inverse().m;
        let k = 2 * self.d;
        let lower_left = prod.view((k, 0), (k, k));
        let triangularity_residual = lower_left.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));
        let satisfied = residuals.iter().all(|r| r.value <= tol);
        BlockConditionReport {
            satisfied,
            tol,
            residuals,
            triangularity_residual,
        }
    }

    /// Tests for the "coordinate change + partial Fourier" form
    /// `A = A_FT2·D_E`; returns `E` when `A_FT2⁻¹·A` matches the `D_E`
    /// pattern within `tol`.
    pub fn totally_wigner_decomposable(&self, tol: f64) -> Option<DMatrix<f64>> {
        let d = self.d;
        let k = 2 * d;
        let ft2 = Self::a_ft2(d).expect("A_FT2 is symplectic");
        let m = ft2.symplectic_inverse().m * &self.m;
        // D_E pattern: [[E⁻¹, 0],[0, Eᵀ]] in 2d-blocks
        let off1 = m.view((0, k), (k, k));
        let off2 = m.view((k, 0), (k, k));
        let off = off1
            .iter()
            .chain(off2.iter())
            .fold(0.0f64, |acc, &v| acc.max(v.abs()));
        if off > tol {
            return None;
        }
        let e: DMatrix<f64> = m.view((k, k), (k, k)).transpose().into();
        let einv_block: DMatrix<f64> = m.view((0, 0), (k, k)).into();
        let check = max_abs(&(einv_block * &e - DMatrix::identity(k, k)));
        if check > tol {
            return None;
        }
        Some(e)
    }

    /// Factors into generator steps (application order). Uses the
    /// `V_{SQ⁻¹}·D_{Q⁻¹}·J·V_{Q⁻¹P}` scheme when the upper-right `2d×2d`
    /// block `Q` is well conditioned; otherwise conjugates by a chirp and a
    /// Fourier step to reach an invertible-Q representative.
    pub fn factor_into_generators(&self) -> Result<MetaplecticFactorization> {
        let d = self.d;
        let k = 2 * d;
        let id = DMatrix::identity(4 * d, 4 * d);

        // Trivial and single-generator cases first.
        if max_abs(&(&self.m - &id)) < 1e-14 {
            return Ok(MetaplecticFactorization { d, steps: vec![] });
        }
        if max_abs(&(&self.m - standard_j(k))) < 1e-14 {
            return Ok(MetaplecticFactorization {
                d,
                steps: vec![GeneratorStep::Fourier],
            });
        }
        {
            // D_E pattern: upper-left invertible, off-diagonals zero
            let off = max_abs(&self.block2(0, 1)).max(max_abs(&self.block2(1, 0)));
            if off < 1e-14 {
                let e = self.block2(1, 1).transpose();
                return Ok(MetaplecticFactorization {
                    d,
                    steps: vec![GeneratorStep::LinearChange(e)],
                });
            }
        }
        {
            // V_C pattern
            let ik = DMatrix::identity(k, k);
            let diag_ok = max_abs(&(self.block2(0, 0) - &ik)) < 1e-14
                && max_abs(&(self.block2(1, 1) - &ik)) < 1e-14
                && max_abs(&self.block2(0, 1)) < 1e-14;
            if diag_ok {
                return Ok(MetaplecticFactorization {
                    d,
                    steps: vec![GeneratorStep::Chirp(self.block2(1, 0))],
                });
            }
        }

        // General scheme on a representative with invertible upper-right
        // block: B = A·V_C·J has upper-right block P + QC.
        let p = self.block2(0, 0);
        let q = self.block2(0, 1);

        let min_sv = |m: &DMatrix<f64>| -> f64 {
            m.clone()
                .svd(false, false)
                .singular_values
                .iter()
                .fold(f64::INFINITY, |a, &b| a.min(b))
        };

        // Candidate conjugations: None means factor A directly (requires Q
        // well conditioned); Some(C) factors B = A·V_C·J whose upper-right
        // block is P + QC. Deterministic candidate list: identity, then a
        // fixed-seed stream of random symmetric matrices.
        let sv_direct = min_sv(&q);
        let chosen_c: Option<DMatrix<f64>> = if sv_direct > 0.1 {
            None
        } else {
            let mut cands: Vec<DMatrix<f64>> = vec![DMatrix::identity(k, k)];
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x74666163);
            for _ in 0..24 {
                let mut c = DMatrix::zeros(k, k);
                for i in 0..k {
                    for j in 0..=i {
                        let v: f64 = rng.random_range(-1.0..1.0);
                        c[(i, j)] = v;
                        c[(j, i)] = v;
                    }
                }
                cands.push(c);
            }
            let best = cands
                .into_iter()
                .map(|c| (min_sv(&(&p + &q * &c)), c))
                .max_by(|a, b| a.0.total_cmp(&b.0))
                .expect("candidate list is nonempty");
            if best.0 <= 1e-6 {
                if sv_direct > 1e-6 {
                    None // Q is poorly but usably conditioned; fall back
                } else {
                    return Err(SympError::FactorizationFailed {
                        reason: "no chirp conjugation produced a well-conditioned block".into(),
                    });
                }
            } else {
                Some(best.1)
            }
        };

        let target = if chosen_c.is_none() {
            self.clone()
        } else {
            let chosen_c = chosen_c.as_ref().unwrap();
            // B = A·V_C·J
            let vc = Self::v_c(d, chosen_c)?;
            let jj = Self::j(d)?;
            Self::from_matrix(d, &self.m * vc.m * jj.m)?
        };

        // Standard scheme: target = V_{SQ⁻¹} · D_{Q⁻¹} · J · V_{Q⁻¹P}
        let tp = target.block2(0, 0);
        let tq = target.block2(0, 1);
        let ts = target.block2(1, 1);
        let tq_inv = tq.clone().try_inverse().ok_or_else(|| {
            SympError::FactorizationFailed {
                reason: "upper-right block not invertible after conditioning".into(),
            }
        })?;
        let c2 = &tq_inv * &tp; // symmetric by the symplectic relations
        let c1 = &ts * &tq_inv;
        let sym = |m: &DMatrix<f64>| (m + m.transpose()) * 0.5;
        let mut steps = vec![
            GeneratorStep::Chirp(sym(&c2)),
            GeneratorStep::Fourier,
            GeneratorStep::LinearChange(tq_inv),
            GeneratorStep::Chirp(sym(&c1)),
        ];
        if let Some(c) = &chosen_c {
            // A = B·J⁻¹·V_{−C} and J⁻¹ = D_{−I}·J, so apply V_{−C}, then
            // Fourier, then the coordinate flip, then B's steps.
            let mut prefix = vec![
                GeneratorStep::Chirp(-c),
                GeneratorStep::Fourier,
                GeneratorStep::LinearChange(-DMatrix::<f64>::identity(k, k)),
            ];
            prefix.extend(steps);
            steps = prefix;
        }
        let fact = MetaplecticFactorization { d, steps };
        let recomposed = fact.recompose()?;
        let err = max_abs(&(recomposed.m - &self.m));
        if err > 1e-8 {
            return Err(SympError::FactorizationFailed {
                reason: format!("recomposition residual {err:.3e}"),
            });
        }
        Ok(fact)
    }

    // ---- text format -----------------------------------------------------

    /// Serializes as `d=<int>` followed by `4d` rows of `4d` floats.
    pub fn to_text(&self) -> String {
        let mut s = format!("d={}\n", self.d);
        for i in 0..4 * self.d {
            let row: Vec<String> = (0..4 * self.d)
                .map(|j| format!("{:.17e}", self.m[(i, j)]))
                .collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }

    /// Parses the text format produced by [`to_text`](Self::to_text).
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| SympError::Parse("empty input".into()))?;
        let d: usize = header
            .trim()
            .strip_prefix("d=")
            .ok_or_else(|| SympError::Parse("first line must be d=<int>".into()))?
            .parse()
            .map_err(|e| SympError::Parse(format!("bad dimension: {e}")))?;
        let n = 4 * d;
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            let line = lines
                .next()
                .ok_or_else(|| SympError::Parse(format!("missing row {i}")))?;
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| SympError::Parse(format!("row {i}: {e}")))?;
            if vals.len() != n {
                return Err(SympError::Parse(format!(
                    "row {i} has {} entries, expected {n}",
                    vals.len()
                )));
            }
            for (j, v) in vals.into_iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Self::from_matrix(d, m)
    }
}

/// A covariant matrix with rounded-uniform pattern blocks drawn from a seeded
/// generator; used by the verification panels so runs are reproducible.
pub fn random_covariant(d: usize, seed: u64) -> SymplecticMatrix {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut a11 = DMatrix::zeros(d, d);
    for v in a11.iter_mut() {
        *v = rng.random_range(-0.7..0.7);
    }
    let mut sym = |scale: f64| {
        let mut m = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..=i {
                let v: f64 = rng.random_range(-scale..scale);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    };
    let a13 = sym(0.6);
    let a21 = sym(0.6);
    SymplecticMatrix::covariant_from_blocks(d, &a11, &a13, &a21)
        .expect("pattern matrices are always symplectic")
}

/// A random word of `count` generators (seeded); entries kept well
/// conditioned. Useful for property tests.
pub fn random_generator_product(d: usize, count: usize, seed: u64) -> SymplecticMatrix {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let k = 2 * d;
    let mut acc = DMatrix::<f64>::identity(4 * d, 4 * d);
    for _ in 0..count {
        let kind: u32 = rng.random_range(0..3);
        let step = match kind {
            0 => GeneratorStep::Fourier,
            1 => {
                // E = I + small perturbation: always invertible
                let mut e = DMatrix::identity(k, k);
                for v in e.iter_mut() {
                    *v += rng.random_range(-0.35..0.35);
                }
                GeneratorStep::LinearChange(e)
            }
            _ => {
                let mut c = DMatrix::zeros(k, k);
                for i in 0..k {
                    for j in 0..=i {
                        let v: f64 = rng.random_range(-0.8..0.8);
                        c[(i, j)] = v;
                        c[(j, i)] = v;
                    }
                }
                GeneratorStep::Chirp(c)
            }
        };
        let m = step.matrix(d).expect("generator matrices are symplectic");
        acc = m.m * acc;
    }
    SymplecticMatrix::from_matrix(d, acc).expect("products of symplectic matrices are symplectic")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_matrices_are_symplectic() {
        for d in [1usize, 2] {
            for (name, m) in [
                ("I", SymplecticMatrix::identity(d)),
                ("J", SymplecticMatrix::j(d)),
                ("A_FT2", SymplecticMatrix::a_ft2(d)),
                ("A_ST", SymplecticMatrix::a_st(d)),
                ("A_half", SymplecticMatrix::a_half(d)),
                ("A_tau(0.3)", SymplecticMatrix::a_tau(d, 0.3)),
                ("A_tau(0)", SymplecticMatrix::a_tau(d, 0.0)),
                ("A_tau(1)", SymplecticMatrix::a_tau(d, 1.0)),
                ("D_S", SymplecticMatrix::d_s(d)),
            ] {
                let m = m.unwrap_or_else(|e| panic!("{name} (d={d}): {e}"));
                assert!(m.residual() <= SYMP_TOL, "{name} residual {}", m.residual());
            }
        }
    }

    #[test]
    fn a_tau_at_half_equals_a_half() {
        let a = SymplecticMatrix::a_tau(1, 0.5).unwrap();
        let b = SymplecticMatrix::a_half(1).unwrap();
        assert_eq!(a.matrix(), b.matrix());
    }

    #[test]
    fn perturbed_matrix_is_rejected() {
        let mut m = SymplecticMatrix::a_half(1).unwrap().matrix().clone();
        m[(0, 0)] += 0.1;
        assert!(matches!(
            SymplecticMatrix::from_matrix(1, m),
            Err(SympError::NotSymplectic { .. })
        ));
    }

    #[test]
    fn inverse_formula_matches_numeric_inverse() {
        for (d, a) in [
            (1, SymplecticMatrix::a_tau(1, 0.37).unwrap()),
            (1, SymplecticMatrix::a_st(1).unwrap()),
            (2, SymplecticMatrix::a_ft2(2).unwrap()),
            (1, random_generator_product(1, 5, 7)),
        ] {
            let inv = a.symplectic_inverse();
            let numeric = a
                .matrix()
                .clone()
                .try_inverse()
                .expect("symplectic matrices are invertible");
            assert!(
                max_abs(&(inv.matrix() - &numeric)) < 1e-10,
                "d={d}: inverse mismatch"
            );
            let prod = inv.matrix() * a.matrix();
            assert!(max_abs(&(prod - DMatrix::identity(4 * d, 4 * d))) < 1e-9);
        }
    }

    #[test]
    fn j_inverse_is_minus_j() {
        let j = SymplecticMatrix::j(1).unwrap();
        let inv = j.symplectic_inverse();
        assert!(max_abs(&(inv.matrix() + j.matrix())) < 1e-15);
    }

    #[test]
    fn covariance_classification() {
        for tau in [0.0, 0.3, 1.0] {
            let a = SymplecticMatrix::a_tau(1, tau).unwrap();
            assert!(a.is_covariant(PATTERN_TOL).covariant, "A_tau({tau})");
        }
        let id = SymplecticMatrix::identity(1).unwrap();
        assert!(!id.is_covariant(PATTERN_TOL).covariant);
        let ast = SymplecticMatrix::a_st(1).unwrap();
        let report = ast.is_covariant(PATTERN_TOL);
        assert!(!report.covariant);
        assert!(report.max_residual() > 0.5);
    }

    #[test]
    fn random_covariant_matrices_are_symplectic_and_covariant() {
        for d in [1usize, 2] {
            for seed in 0..6 {
                let a = random_covariant(d, seed);
                assert!(a.residual() <= SYMP_TOL);
                assert!(a.is_covariant(PATTERN_TOL).covariant);
                assert!(a.satisfies_block_conditions(PATTERN_TOL).satisfied);
            }
        }
    }

    #[test]
    fn block_conditions_classification() {
        for tau in [0.0, 0.25, 0.5, 1.0] {
            let a = SymplecticMatrix::a_tau(1, tau).unwrap();
            let rep = a.satisfies_block_conditions(PATTERN_TOL);
            assert!(rep.satisfied, "A_tau({tau})");
            assert!(rep.triangularity_residual < 1e-9);
        }
        let j = SymplecticMatrix::j(1).unwrap();
        let rep = j.satisfies_block_conditions(PATTERN_TOL);
        assert!(!rep.satisfied);
        // the named residual for J: A31 + A32 = −I has magnitude 1
        let r = rep
            .residuals
            .iter()
            .find(|r| r.name == "A31 + A32")
            .unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        assert!(rep.triangularity_residual > 0.5);
        let ast = SymplecticMatrix::a_st(1).unwrap();
        let rep = ast.satisfies_block_conditions(PATTERN_TOL);
        assert!(!rep.satisfied);
        let r = rep.residuals.iter().find(|r| r.name == "A34 - A33").unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn block_conditions_iff_triangularity_on_mixed_panel() {
        let panel: Vec<SymplecticMatrix> = vec![
            SymplecticMatrix::a_tau(1, 0.1).unwrap(),
            SymplecticMatrix::a_st(1).unwrap(),
            SymplecticMatrix::j(1).unwrap(),
            SymplecticMatrix::identity(1).unwrap(),
            random_covariant(1, 3),
            random_generator_product(1, 4, 11),
        ];
        for a in &panel {
            let rep = a.satisfies_block_conditions(PATTERN_TOL);
            assert_eq!(
                rep.satisfied,
                rep.triangularity_residual <= 1e-8,
                "conditions and triangularity disagree (residual {:.3e})",
                rep.triangularity_residual
            );
        }
    }

    #[test]
    fn decomposability_roundtrip_and_named_cases() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let mut e = DMatrix::identity(2, 2);
        for v in e.iter_mut() {
            *v += rng.random_range(-0.4..0.4);
        }
        let a = SymplecticMatrix::from_matrix(
            1,
            SymplecticMatrix::a_ft2(1).unwrap().matrix()
                * SymplecticMatrix::d_e(1, &e).unwrap().matrix(),
        )
        .unwrap();
        let recovered = a.totally_wigner_decomposable(PATTERN_TOL).unwrap();
        assert!(max_abs(&(recovered - &e)) < 1e-9);

        // τ-family: E_τ = [[I, τI],[I, −(1−τ)I]]
        let tau = 0.3;
        let at = SymplecticMatrix::a_tau(1, tau).unwrap();
        let etau = at.totally_wigner_decomposable(PATTERN_TOL).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[1.0, tau, 1.0, -(1.0 - tau)]);
        assert!(max_abs(&(etau - expect)) < 1e-12);

        // windowed-transform matrix: E = [[0, I],[−I, I]]
        let ast = SymplecticMatrix::a_st(1).unwrap();
        let est = ast.totally_wigner_decomposable(PATTERN_TOL).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 1.0]);
        assert!(max_abs(&(est - expect)) < 1e-12);

        assert!(SymplecticMatrix::j(1)
            .unwrap()
            .totally_wigner_decomposable(PATTERN_TOL)
            .is_none());
    }

    #[test]
    fn factorization_recomposes_named_matrices() {
        let cases = vec![
            SymplecticMatrix::identity(1).unwrap(),
            SymplecticMatrix::j(1).unwrap(),
            SymplecticMatrix::a_ft2(1).unwrap(),
            SymplecticMatrix::a_st(1).unwrap(),
            SymplecticMatrix::a_half(1).unwrap(),
            SymplecticMatrix::a_tau(1, 0.0).unwrap(),
            SymplecticMatrix::a_tau(1, 0.85).unwrap(),
            SymplecticMatrix::d_s(1).unwrap(),
            random_covariant(1, 9),
        ];
        for a in cases {
            let f = a.factor_into_generators().unwrap();
            let r = f.recompose().unwrap();
            assert!(
                max_abs(&(r.matrix() - a.matrix())) < 1e-8,
                "recomposition failed"
            );
        }
    }

    #[test]
    fn factorization_special_cases_are_minimal() {
        let j = SymplecticMatrix::j(1).unwrap();
        let f = j.factor_into_generators().unwrap();
        assert_eq!(f.steps.len(), 1);
        assert!(matches!(f.steps[0], GeneratorStep::Fourier));

        let e = DMatrix::from_row_slice(2, 2, &[1.2, 0.3, -0.1, 0.9]);
        let de = SymplecticMatrix::d_e(1, &e).unwrap();
        let f = de.factor_into_generators().unwrap();
        assert_eq!(f.steps.len(), 1);
        match &f.steps[0] {
            GeneratorStep::LinearChange(got) => assert!(max_abs(&(got - &e)) < 1e-12),
            other => panic!("expected LinearChange, got {other:?}"),
        }
    }

    #[test]
    fn text_roundtrip() {
        let a = SymplecticMatrix::a_tau(1, 0.77).unwrap();
        let text = a.to_text();
        let b = SymplecticMatrix::from_text(&text).unwrap();
        assert!(max_abs(&(a.matrix() - b.matrix())) < 1e-15);
    }

    #[test]
    fn constructor_guards() {
        let singular = DMatrix::zeros(2, 2);
        assert!(matches!(
            SymplecticMatrix::d_e(1, &singular),
            Err(SympError::SingularE { .. })
        ));
        let asym = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            SymplecticMatrix::v_c(1, &asym),
            Err(SympError::NonSymmetricC { .. })
        ));
    }

    proptest::proptest! {
        #[test]
        fn generator_products_stay_symplectic(seed in 0u64..40, count in 1usize..8) {
            let a = random_generator_product(1, count, seed);
            proptest::prop_assert!(a.residual() < 1e-9);
        }

        #[test]
        fn factorization_roundtrips_on_random_products(seed in 0u64..24, count in 1usize..6) {
            let a = random_generator_product(1, count, seed);
            let f = a.factor_into_generators().unwrap();
            let r = f.recompose().unwrap();
            let err = max_abs(&(r.matrix() - a.matrix()));
            proptest::prop_assert!(err < 1e-8, "residual {}", err);
        }

        #[test]
        fn covariant_implies_block_conditions(seed in 0u64..24) {
            let a = random_covariant(1, seed);
            proptest::prop_assert!(a.is_covariant(PATTERN_TOL).covariant);
            proptest::prop_assert!(a.satisfies_block_conditions(PATTERN_TOL).satisfied);
        }
    }
}
