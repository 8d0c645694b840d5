//! Dense symmetric linear algebra on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Relative asymmetry accepted by [`cholesky`] before symmetrizing.
pub const SYMMETRY_TOL: f64 = 1e-9;

/// `(m + mᵀ) / 2`.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// In-place variant of [`symmetrize`].
pub fn symmetrize_mut(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Largest `|m_ij - m_ji|` relative to the largest entry magnitude.
pub fn relative_asymmetry(m: &DMatrix<f64>) -> f64 {
    let scale = m.amax();
    if scale == 0.0 {
        return 0.0;
    }
    (m - m.transpose()).amax() / scale
}

fn check_square(m: &DMatrix<f64>, context: &'static str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            context,
            expected: m.nrows(),
            actual: m.ncols(),
        });
    }
    Ok(())
}

fn check_finite(m: &DMatrix<f64>) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NotPositiveDefinite("matrix has non-finite entries".into()))
    }
}

/// Lower-triangular Cholesky factor `L` with `L Lᵀ = m`.
///
/// The input is symmetrized before factoring. No regularization is applied;
/// see [`cholesky_with_jitter`].
pub fn cholesky(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    cholesky_with_jitter(m, 0.0)
}

/// Cholesky factor of `(m + mᵀ)/2 + jitter·I`.
pub fn cholesky_with_jitter(m: &DMatrix<f64>, jitter: f64) -> Result<DMatrix<f64>> {
    check_square(m, "cholesky")?;
    check_finite(m)?;
    let asym = relative_asymmetry(m);
    if asym > SYMMETRY_TOL {
        return Err(Error::NotSymmetric(asym));
    }
    let mut sym = symmetrize(m);
    if jitter != 0.0 {
        for i in 0..sym.nrows() {
            sym[(i, i)] += jitter;
        }
    }
    let dim = sym.nrows();
    match nalgebra::linalg::Cholesky::new(sym) {
        Some(chol) => Ok(chol.unpack()),
        None => Err(Error::NotPositiveDefinite(format!(
            "cholesky pivot <= 0 in {dim}x{dim} matrix"
        ))),
    }
}

/// Lower-triangular square root of a positive *semi*definite matrix.
///
/// Pivots at or below `tol · trace` are treated as exact zeros and their
/// column is zeroed, so rank-deficient covariances (e.g. a perfectly known
/// initial state) still have a factor. Pivots below `-tol · trace` are
/// reported as indefinite.
pub fn psd_sqrt(m: &DMatrix<f64>, tol: f64) -> Result<DMatrix<f64>> {
    check_square(m, "psd_sqrt")?;
    check_finite(m)?;
    let a = symmetrize(m);
    let n = a.nrows();
    let threshold = tol * a.trace().abs();
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d < -threshold {
            return Err(Error::NotPositiveDefinite(format!(
                "pivot {j} is {d:e} in psd square root"
            )));
        }
        if d <= threshold {
            continue;
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// Solve `m · x = b` for symmetric positive definite `m` without forming
/// an inverse.
pub fn solve_spd(m: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if b.nrows() != m.nrows() {
        return Err(Error::DimensionMismatch {
            context: "solve_spd",
            expected: m.nrows(),
            actual: b.nrows(),
        });
    }
    let l = cholesky(m)?;
    Ok(solve_with_factor(&l, b))
}

/// Solve `L Lᵀ x = b` given the lower Cholesky factor `L`.
pub fn solve_with_factor(l: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let z = l
        .solve_lower_triangular(b)
        .expect("cholesky factor has positive diagonal");
    l.transpose()
        .solve_upper_triangular(&z)
        .expect("cholesky factor has positive diagonal")
}

/// Right-division `a · m⁻¹` for SPD `m`, i.e. the Kalman gain form
/// `P Cᵀ R_e⁻¹`.
pub fn right_solve_spd(a: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    // a m⁻¹ = (m⁻¹ aᵀ)ᵀ since m is symmetric.
    Ok(solve_spd(m, &a.transpose())?.transpose())
}

/// Smallest eigenvalue of the symmetric part of `m`.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(symmetrize(m))
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Checks `min eig(m) >= -rel_tol · |trace(m)|`.
pub fn ensure_psd(m: &DMatrix<f64>, rel_tol: f64, context: &str) -> Result<()> {
    let min_eig = min_eigenvalue(m);
    let trace = m.trace();
    if min_eig < -rel_tol * trace.abs() || !min_eig.is_finite() {
        return Err(Error::NotPositiveDefinite(format!(
            "{context}: min eigenvalue {min_eig:e} with trace {trace:e}"
        )));
    }
    Ok(())
}

/// Outer product `a bᵀ`.
pub fn outer(a: &DVector<f64>, b: &DVector<f64>) -> DMatrix<f64> {
    a * b.transpose()
}
