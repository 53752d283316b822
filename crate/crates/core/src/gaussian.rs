//! Covariance-matrix algebra for Gaussian states.
//!
//! Conventions used throughout the crate:
//!
//! * Shot-noise units: the vacuum covariance is the identity, `X = a + a†`,
//!   `P = -i(a - a†)`, so `[X, P] = 2i`.
//! * Quadrature ordering is `(X₁, P₁, X₂, P₂, …)`; the symplectic form is the
//!   direct sum of `[[0, 1], [-1, 0]]` blocks.
//! * Physicality is `σ + iΩ ⪰ 0`, i.e. every symplectic eigenvalue `≥ 1`.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix4, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest asymmetry accepted on construction, relative to the largest entry.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Floating-point slack added to physicality comparisons so that exact
/// states (vacuum, pure TMSV) pass with `tol = 0`.
const ROUNDOFF_SLACK: f64 = 64.0 * f64::EPSILON;

/// A Gaussian state over `n_modes` bosonic modes.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    n_modes: usize,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianState {
    /// Builds a state, rejecting covariances that are not symmetric to
    /// within [`SYMMETRY_TOL`] and symmetrizing the rest.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let cov = symmetrized(&cov)?;
        let dim = cov.nrows();
        if mean.len() != dim {
            return Err(Error::invalid(format!(
                "mean has length {} but covariance is {dim}x{dim}",
                mean.len()
            )));
        }
        Ok(GaussianState {
            n_modes: dim / 2,
            mean,
            cov,
        })
    }

    /// Zero-mean state with the given covariance.
    pub fn from_cov(cov: DMatrix<f64>) -> Result<Self> {
        let dim = cov.nrows();
        Self::new(DVector::zeros(dim), cov)
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Marginal state of the listed modes, in the listed order.
    pub fn reduce(&self, modes: &[usize]) -> Result<GaussianState> {
        if modes.is_empty() {
            return Err(Error::invalid("reduce: no modes selected"));
        }
        if let Some(&m) = modes.iter().find(|&&m| m >= self.n_modes) {
            return Err(Error::invalid(format!(
                "reduce: mode {m} out of range for {} modes",
                self.n_modes
            )));
        }
        let idx: Vec<usize> = modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
        let k = idx.len();
        let cov = DMatrix::from_fn(k, k, |i, j| self.cov[(idx[i], idx[j])]);
        let mean = DVector::from_fn(k, |i, _| self.mean[idx[i]]);
        GaussianState::new(mean, cov)
    }
}

/// Determinant invariants of a two-mode covariance
/// `[[α, γ], [γᵀ, β]]`: `det α`, `det β`, `det γ`, `det σ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetInvariants {
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub i4: f64,
}

/// The vacuum on `n_modes` modes.
pub fn vacuum_state(n_modes: usize) -> Result<GaussianState> {
    if n_modes == 0 {
        return Err(Error::invalid("vacuum_state: n_modes must be at least 1"));
    }
    GaussianState::from_cov(DMatrix::identity(2 * n_modes, 2 * n_modes))
}

/// Symplectic form `Ω = ⊕ [[0, 1], [-1, 0]]` on `n_modes` modes.
pub fn omega(n_modes: usize) -> DMatrix<f64> {
    let mut om = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        om[(2 * k, 2 * k + 1)] = 1.0;
        om[(2 * k + 1, 2 * k)] = -1.0;
    }
    om
}

/// Covariance of the two-mode squeezed vacuum with squeezing `r`:
/// `α = β = cosh 2r · I`, `γ = sinh 2r · diag(1, -1)`.
pub fn tmsv_cov(r: f64) -> DMatrix<f64> {
    let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    DMatrix::from_row_slice(
        4,
        4,
        &[
            c, 0.0, s, 0.0, //
            0.0, c, 0.0, -s, //
            s, 0.0, c, 0.0, //
            0.0, -s, 0.0, c,
        ],
    )
}

/// Validates shape and symmetry, returning `(σ + σᵀ)/2`.
pub fn symmetrized(cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (r, c) = cov.shape();
    if r != c || r == 0 || r % 2 != 0 {
        return Err(Error::invalid(format!(
            "covariance must be square with even nonzero dimension, got {r}x{c}"
        )));
    }
    if cov.iter().any(|x| !x.is_finite()) {
        return Err(Error::numeric("covariance contains non-finite entries"));
    }
    let scale = cov.amax().max(1.0);
    let asym = (cov - cov.transpose()).amax();
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::invalid(format!(
            "covariance is not symmetric (max |σ - σᵀ| = {asym:.3e})"
        )));
    }
    Ok((cov + cov.transpose()) * 0.5)
}

/// Symplectic eigenvalues of a positive-definite covariance, descending.
///
/// Computed as the singular values of `σ^{1/2} Ω σ^{1/2}`, whose spectrum is
/// `±iν` for each symplectic eigenvalue `ν`.
pub fn symplectic_eigenvalues(cov: &DMatrix<f64>) -> Result<Vec<f64>> {
    let cov = symmetrized(cov)?;
    let n = cov.nrows() / 2;
    let eig = SymmetricEigen::new(cov.clone());
    let min_ev = eig.eigenvalues.min();
    if min_ev <= 0.0 {
        return Err(Error::numeric(format!(
            "covariance is not positive definite (min eigenvalue {min_ev:.3e})"
        )));
    }
    let sqrt_diag = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    let root = &eig.eigenvectors * sqrt_diag * eig.eigenvectors.transpose();
    let k = &root * omega(n) * &root;
    let m = k.transpose() * &k;
    let mut nu2: Vec<f64> = SymmetricEigen::new((&m + m.transpose()) * 0.5)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    if nu2.iter().any(|v| !v.is_finite()) {
        return Err(Error::numeric("symplectic spectrum is not finite"));
    }
    nu2.sort_by(|a, b| b.total_cmp(a));
    Ok(nu2
        .chunks(2)
        .map(|pair| (0.5 * (pair[0] + pair[1])).max(0.0).sqrt())
        .collect())
}

/// True iff the smallest symplectic eigenvalue is at least `1 - tol`.
pub fn is_physical(state: &GaussianState, tol: f64) -> Result<bool> {
    is_physical_cov(state.cov(), tol)
}

/// [`is_physical`] on a bare covariance matrix.
pub fn is_physical_cov(cov: &DMatrix<f64>, tol: f64) -> Result<bool> {
    if !(tol >= 0.0) {
        return Err(Error::invalid("is_physical: tol must be nonnegative"));
    }
    let cov = symmetrized(cov)?;
    match symplectic_eigenvalues(&cov) {
        Ok(nu) => Ok(nu.last().is_some_and(|&m| m >= 1.0 - tol - ROUNDOFF_SLACK)),
        // Not positive definite: cannot satisfy the uncertainty bound.
        Err(Error::NumericFailure(_)) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Smallest symplectic eigenvalue (convenience for diagnostics).
pub fn min_symplectic_eigenvalue(cov: &DMatrix<f64>) -> Result<f64> {
    symplectic_eigenvalues(cov).map(|nu| *nu.last().expect("n_modes >= 1"))
}

/// Splits a 4×4 two-mode covariance into `(α, β, γ)`.
pub fn two_mode_blocks(cov: &DMatrix<f64>) -> Result<(Matrix2<f64>, Matrix2<f64>, Matrix2<f64>)> {
    if cov.shape() != (4, 4) {
        return Err(Error::invalid(format!(
            "expected a 4x4 two-mode covariance, got {}x{}",
            cov.nrows(),
            cov.ncols()
        )));
    }
    let block = |r: usize, c: usize| Matrix2::new(cov[(r, c)], cov[(r, c + 1)], cov[(r + 1, c)], cov[(r + 1, c + 1)]);
    Ok((block(0, 0), block(2, 2), block(0, 2)))
}

pub fn det_invariants(cov: &DMatrix<f64>) -> Result<DetInvariants> {
    let cov = symmetrized(cov)?;
    let (alpha, beta, gamma) = two_mode_blocks(&cov)?;
    let full = Matrix4::from_fn(|i, j| cov[(i, j)]);
    Ok(DetInvariants {
        i1: alpha.determinant(),
        i2: beta.determinant(),
        i3: gamma.determinant(),
        i4: full.determinant(),
    })
}

/// JSON wire form of a covariance matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovarianceFile {
    pub n_modes: usize,
    pub ordering: String,
    pub cov: Vec<Vec<f64>>,
}

impl CovarianceFile {
    pub const ORDERING: &'static str = "XPXP";

    pub fn from_matrix(cov: &DMatrix<f64>) -> Self {
        CovarianceFile {
            n_modes: cov.nrows() / 2,
            ordering: Self::ORDERING.to_string(),
            cov: cov.row_iter().map(|r| r.iter().copied().collect()).collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<DMatrix<f64>> {
        if self.ordering != Self::ORDERING {
            return Err(Error::invalid(format!(
                "unsupported quadrature ordering `{}` (expected XPXP)",
                self.ordering
            )));
        }
        let dim = 2 * self.n_modes;
        if self.n_modes == 0 || self.cov.len() != dim || self.cov.iter().any(|r| r.len() != dim) {
            return Err(Error::invalid(format!(
                "cov must be a {dim}x{dim} array of arrays for n_modes = {}",
                self.n_modes
            )));
        }
        let m = DMatrix::from_fn(dim, dim, |i, j| self.cov[i][j]);
        symmetrized(&m)
    }
}

/// Random symplectic transforms and physical covariances, for property tests
/// and oracle sweeps.
pub mod sampling {
    use nalgebra::{DMatrix, Matrix2};
    use rand::Rng;
    use rand_distr::{Distribution, Exp, Normal};

    fn rotation(theta: f64) -> Matrix2<f64> {
        let (s, c) = theta.sin_cos();
        Matrix2::new(c, s, -s, c)
    }

    /// Random single-mode symplectic: rotation · squeeze · rotation.
    pub fn random_single_mode<R: Rng + ?Sized>(rng: &mut R, sq_sigma: f64) -> Matrix2<f64> {
        let r: f64 = Normal::new(0.0, sq_sigma).unwrap().sample(rng);
        let t1 = rng.random_range(0.0..std::f64::consts::TAU);
        let t2 = rng.random_range(0.0..std::f64::consts::TAU);
        rotation(t1) * Matrix2::new(r.exp(), 0.0, 0.0, (-r).exp()) * rotation(t2)
    }

    /// Random local transform `S_A ⊕ S_B`.
    pub fn random_local<R: Rng + ?Sized>(rng: &mut R, sq_sigma: f64) -> DMatrix<f64> {
        let a = random_single_mode(rng, sq_sigma);
        let b = random_single_mode(rng, sq_sigma);
        let mut s = DMatrix::zeros(4, 4);
        s.view_mut((0, 0), (2, 2)).copy_from(&a);
        s.view_mut((2, 2), (2, 2)).copy_from(&b);
        s
    }

    /// Random two-mode symplectic built from local, beamsplitter and
    /// two-mode-squeezing layers.
    pub fn random_two_mode<R: Rng + ?Sized>(rng: &mut R) -> DMatrix<f64> {
        let normal = Normal::new(0.0, 0.6).unwrap();
        let mut s = DMatrix::identity(4, 4);
        for _ in 0..3 {
            s = random_local(rng, 0.5) * s;
            let th = rng.random_range(0.0..1.5);
            let (sn, cs) = f64::sin_cos(th);
            let bs = DMatrix::from_row_slice(
                4,
                4,
                &[cs, 0.0, sn, 0.0, 0.0, cs, 0.0, sn, -sn, 0.0, cs, 0.0, 0.0, -sn, 0.0, cs],
            );
            s = bs * s;
            let r: f64 = normal.sample(rng);
            let (ch, sh) = (r.cosh(), r.sinh());
            let tm = DMatrix::from_row_slice(
                4,
                4,
                &[ch, 0.0, sh, 0.0, 0.0, ch, 0.0, -sh, sh, 0.0, ch, 0.0, 0.0, -sh, 0.0, ch],
            );
            s = tm * s;
        }
        s
    }

    /// Random physical two-mode covariance `S · diag(ν₁,ν₁,ν₂,ν₂) · Sᵀ`.
    pub fn random_physical_cov<R: Rng + ?Sized>(rng: &mut R) -> DMatrix<f64> {
        let exp = Exp::new(1.0).unwrap();
        let n1 = 1.0 + exp.sample(rng);
        let n2 = 1.0 + exp.sample(rng);
        let s = random_two_mode(rng);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![n1, n1, n2, n2]));
        let c = &s * d * s.transpose();
        (&c + c.transpose()) * 0.5
    }

    /// Random physical covariance with an asymmetric cross block
    /// `diag(c₁, c₂)` before a random local transform; these populate the
    /// homodyne-optimal regime of the discord formula.
    pub fn random_classical_like_cov<R: Rng + ?Sized>(rng: &mut R) -> DMatrix<f64> {
        let exp = Exp::new(0.5).unwrap();
        let normal = Normal::new(0.0, 1.5).unwrap();
        loop {
            let a = 1.0 + exp.sample(rng);
            let b = 1.0 + exp.sample(rng);
            let c1: f64 = normal.sample(rng);
            let c2: f64 = normal.sample(rng);
            let c = DMatrix::from_row_slice(
                4,
                4,
                &[a, 0.0, c1, 0.0, 0.0, a, 0.0, c2, c1, 0.0, b, 0.0, 0.0, c2, 0.0, b],
            );
            if super::is_physical_cov(&c, 0.0).unwrap_or(false)
                && super::min_symplectic_eigenvalue(&c).is_ok_and(|m| m > 1.0 + 1e-6)
            {
                let l = random_local(rng, 0.5);
                let out = &l * c * l.transpose();
                return (&out + out.transpose()) * 0.5;
            }
        }
    }
}
