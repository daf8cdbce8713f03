//! Dense complex matrix substrate.
//!
//! Thin layer over `nalgebra` providing the handful of primitives the update
//! routines rely on: SVD-based pseudoinverse, conditioned solves, the
//! eigenvalues of a regular pencil and Hermitian spectra.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen, SVD};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Builds a matrix from row-major entries, rejecting NaN/Inf.
pub fn from_rows(rows: usize, cols: usize, entries: &[C64]) -> Result<CMatrix> {
    if entries.len() != rows * cols {
        return Err(Error::DimensionMismatch(format!(
            "{} entries for a {rows}x{cols} matrix",
            entries.len()
        )));
    }
    let m = CMatrix::from_row_slice(rows, cols, entries);
    check_finite("matrix", &m)?;
    Ok(m)
}

/// Row-major real matrix lifted to complex.
pub fn real_matrix(rows: usize, cols: usize, entries: &[f64]) -> CMatrix {
    assert_eq!(entries.len(), rows * cols, "real_matrix: entry count");
    CMatrix::from_row_iterator(rows, cols, entries.iter().map(|&x| c(x, 0.0)))
}

pub fn diag(entries: &[C64]) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_column_slice(entries))
}

pub fn real_diag(entries: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_iterator(
        entries.len(),
        entries.iter().map(|&x| c(x, 0.0)),
    ))
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn check_finite(name: &str, a: &CMatrix) -> Result<()> {
    if a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(name.to_string()))
    }
}

/// A vector as an `n×1` matrix.
pub fn col_matrix(v: &CVector) -> CMatrix {
    CMatrix::from_column_slice(v.nrows(), 1, v.as_slice())
}

pub fn fro(a: &CMatrix) -> f64 {
    a.norm()
}

pub fn is_real(a: &CMatrix, tol: f64) -> bool {
    let scale = fro(a).max(f64::MIN_POSITIVE);
    a.iter().all(|z| z.im.abs() <= tol * scale)
}

/// Block-diagonal concatenation.
pub fn block_diag(blocks: &[CMatrix]) -> CMatrix {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMatrix::zeros(rows, cols);
    let (mut r, mut c0) = (0, 0);
    for b in blocks {
        out.view_mut((r, c0), b.shape()).copy_from(b);
        r += b.nrows();
        c0 += b.ncols();
    }
    out
}

/// Horizontal concatenation `[A B ...]`.
pub fn hcat(parts: &[&CMatrix]) -> Result<CMatrix> {
    let rows = parts.first().map_or(0, |p| p.nrows());
    if parts.iter().any(|p| p.nrows() != rows) {
        return Err(Error::DimensionMismatch("hcat: row counts differ".into()));
    }
    let cols: usize = parts.iter().map(|p| p.ncols()).sum();
    let mut out = CMatrix::zeros(rows, cols);
    let mut c0 = 0;
    for p in parts {
        out.view_mut((0, c0), p.shape()).copy_from(*p);
        c0 += p.ncols();
    }
    Ok(out)
}

/// Vertical concatenation.
pub fn vcat(parts: &[&CMatrix]) -> Result<CMatrix> {
    let cols = parts.first().map_or(0, |p| p.ncols());
    if parts.iter().any(|p| p.ncols() != cols) {
        return Err(Error::DimensionMismatch("vcat: column counts differ".into()));
    }
    let rows: usize = parts.iter().map(|p| p.nrows()).sum();
    let mut out = CMatrix::zeros(rows, cols);
    let mut r = 0;
    for p in parts {
        out.view_mut((r, 0), p.shape()).copy_from(*p);
        r += p.nrows();
    }
    Ok(out)
}

/// Singular values in descending order.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    SVD::new(a.clone(), false, false)
        .singular_values
        .iter()
        .copied()
        .collect()
}

/// σ_min/σ_max; zero for a zero or empty matrix.
pub fn rcond(a: &CMatrix) -> f64 {
    let s = singular_values(a);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if hi > 0.0 => lo / hi,
        _ => 0.0,
    }
}

/// Numerical rank at relative cutoff [`tol::NUM`].
pub fn rank(a: &CMatrix) -> usize {
    let s = singular_values(a);
    let Some(&hi) = s.first() else { return 0 };
    if hi == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > tol::NUM * hi).count()
}

pub fn has_full_column_rank(a: &CMatrix) -> bool {
    a.ncols() <= a.nrows() && rank(a) == a.ncols()
}

/// Moore–Penrose pseudoinverse via SVD with relative cutoff [`tol::NUM`].
///
/// The zero matrix maps to the zero matrix of transposed shape.
pub fn pseudoinverse(a: &CMatrix) -> CMatrix {
    let (r, cols) = a.shape();
    if a.is_empty() || fro(a) == 0.0 {
        return CMatrix::zeros(cols, r);
    }
    let svd = SVD::new(a.clone(), true, true);
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let hi = svd.singular_values[0];
    let cutoff = tol::NUM * hi;
    let k = svd.singular_values.len();
    let mut out = CMatrix::zeros(cols, r);
    for i in 0..k {
        let s = svd.singular_values[i];
        if s <= cutoff {
            continue;
        }
        // V[:, i] * (1/s) * U[:, i]^*
        let vi = v_t.row(i).adjoint();
        let ui = u.column(i).adjoint();
        out += (vi * ui) * c(1.0 / s, 0.0);
    }
    out
}

/// Result of [`solve`]: the solution and the reciprocal condition number of A.
#[derive(Debug, Clone)]
pub struct Solved {
    pub x: CMatrix,
    pub rcond: f64,
}

/// Solves `A X = B` for square `A`.
pub fn solve(a: &CMatrix, b: &CMatrix) -> Result<Solved> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "solve: A is {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "solve: A has {} rows, B has {}",
            a.nrows(),
            b.nrows()
        )));
    }
    let rc = rcond(a);
    if rc <= tol::NUM {
        return Err(Error::SingularMatrix { rcond: rc });
    }
    let lu = a.clone().full_piv_lu();
    let x = lu.solve(b).ok_or(Error::SingularMatrix { rcond: rc })?;
    Ok(Solved { x, rcond: rc })
}

pub fn inverse(a: &CMatrix) -> Result<CMatrix> {
    solve(a, &identity(a.nrows())).map(|s| s.x)
}

/// Eigenvalues of a square matrix (standard problem), via complex Schur form.
pub fn eigvals(a: &CMatrix) -> Vec<C64> {
    let n = a.nrows();
    if n == 0 {
        return Vec::new();
    }
    let (_, t) = Schur::new(a.clone()).unpack();
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)].norm() > 0.0 {
            // 2x2 block left unreduced: eigenvalues from its characteristic polynomial
            let (p, q, r, s) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
            let tr = p + s;
            let det = p * s - q * r;
            let disc = (tr * tr - det * 4.0).sqrt();
            out.push((tr + disc) * 0.5);
            out.push((tr - disc) * 0.5);
            i += 2;
        } else {
            out.push(t[(i, i)]);
            i += 1;
        }
    }
    out
}

/// Ascending eigenvalues of the Hermitian part of `a`.
///
/// Fails with `NotHermitian` when `a` is not Hermitian within [`tol::STRUCT`].
pub fn herm_eigs(a: &CMatrix) -> Result<Vec<f64>> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch("herm_eigs: not square".into()));
    }
    let scale = fro(a);
    let skew = fro(&(a - a.adjoint()));
    if skew > tol::STRUCT * scale {
        return Err(Error::NotHermitian {
            residual: if scale > 0.0 { skew / scale } else { skew },
        });
    }
    Ok(herm_part_eigs(a))
}

/// Ascending eigenvalues of `(A + A^*)/2`, without the Hermitian check.
pub fn herm_part_eigs(a: &CMatrix) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let h = (a + a.adjoint()) * c(0.5, 0.0);
    let mut e: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

/// A pencil eigenvalue; infinite eigenvalues are a separate variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Eigenvalue {
    Finite(C64),
    Infinite,
}

impl Eigenvalue {
    pub fn finite(self) -> Option<C64> {
        match self {
            Eigenvalue::Finite(z) => Some(z),
            Eigenvalue::Infinite => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PencilEig {
    pub value: Eigenvalue,
    /// Unit-norm eigenvector for finite eigenvalues.
    pub vector: Option<CVector>,
}

/// Rotates a vector so that its largest-magnitude entry is real and positive.
pub fn fix_phase(v: &mut CVector) {
    if let Some((_, &z)) = v
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
    {
        if z.norm() > 0.0 {
            let ph = z.conj() / z.norm();
            *v *= ph;
        }
    }
}

/// Right singular vectors of the `k` smallest singular values of a square matrix.
fn smallest_right_singular(a: &CMatrix, k: usize) -> (Vec<CVector>, Vec<f64>) {
    let n = a.ncols();
    let svd = SVD::new(a.clone(), false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let mut out = Vec::with_capacity(k);
    let mut sv = Vec::with_capacity(k);
    for j in 0..k.min(n) {
        let i = n - 1 - j;
        out.push(v_t.row(i).adjoint());
        sv.push(svd.singular_values[i]);
    }
    (out, sv)
}

fn smallest_left_singular(a: &CMatrix) -> CVector {
    let svd = SVD::new(a.clone(), true, false);
    let u = svd.u.expect("u requested");
    u.column(u.ncols() - 1).into_owned()
}

/// Eigenvalues and eigenvectors of the regular pencil `λM + K`.
///
/// Uses a shift-and-invert reduction: for a shift σ with `σM + K` well
/// conditioned, the eigenvalues ν of `(σM+K)^{-1} M` give `λ = σ − 1/ν`,
/// and `ν = 0` marks an infinite eigenvalue. Each finite eigenvalue is then
/// polished by a two-sided Rayleigh step and its eigenvector taken from the
/// smallest singular triplet of `λM + K`.
pub fn eig_pencil(m: &CMatrix, k: &CMatrix) -> Result<Vec<PencilEig>> {
    let n = m.nrows();
    if m.ncols() != n || k.shape() != (n, n) {
        return Err(Error::DimensionMismatch(
            "eig_pencil: M and K must be square of equal size".into(),
        ));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let nm = fro(m);
    let nk = fro(k);
    if nm == 0.0 && nk == 0.0 {
        return Err(Error::SingularPencil);
    }
    let ratio = if nm > 0.0 && nk > 0.0 { nk / nm } else { 1.0 };

    // deterministic candidate shifts spread over the complex plane
    const DIRS: [(f64, f64); 6] = [
        (0.6173, 0.3457),
        (-0.4419, 0.7812),
        (0.2871, -0.9134),
        (-0.8377, -0.2290),
        (1.7364, 1.1118),
        (-0.1523, 2.3391),
    ];
    let mut best: Option<(f64, C64, CMatrix)> = None;
    for &(re, im) in &DIRS {
        let sigma = c(re, im) * ratio;
        let b = m * sigma + k;
        let rc = rcond(&b);
        if best.as_ref().is_none_or(|(r, _, _)| rc > *r) {
            best = Some((rc, sigma, b));
        }
    }
    let (rc, sigma, b) = best.expect("candidate shifts");
    if rc < 1e-14 {
        return Err(Error::SingularPencil);
    }
    let cmat = b.full_piv_lu().solve(m).ok_or(Error::SingularPencil)?;
    let nu = eigvals(&cmat);
    let cnorm = fro(&cmat);

    let mut values: Vec<Eigenvalue> = nu
        .iter()
        .map(|&v| {
            if v.norm() <= 1e-10 * cnorm {
                Eigenvalue::Infinite
            } else {
                Eigenvalue::Finite(sigma - v.inv())
            }
        })
        .collect();

    // polish finite eigenvalues
    for v in values.iter_mut() {
        if let Eigenvalue::Finite(lam) = v {
            *lam = polish(m, k, *lam);
        }
    }
    values.sort_by(|a, b| match (a, b) {
        (Eigenvalue::Finite(x), Eigenvalue::Finite(y)) => {
            x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im))
        }
        (Eigenvalue::Finite(_), Eigenvalue::Infinite) => std::cmp::Ordering::Less,
        (Eigenvalue::Infinite, Eigenvalue::Finite(_)) => std::cmp::Ordering::Greater,
        _ => std::cmp::Ordering::Equal,
    });

    // eigenvectors: clusters of numerically equal eigenvalues share a
    // singular subspace of the appropriate dimension
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while i < values.len() {
        match values[i] {
            Eigenvalue::Infinite => {
                out.push(PencilEig {
                    value: Eigenvalue::Infinite,
                    vector: None,
                });
                i += 1;
            }
            Eigenvalue::Finite(lam) => {
                let mut j = i + 1;
                while j < values.len() {
                    match values[j] {
                        Eigenvalue::Finite(mu) if same_eigenvalue(lam, mu, 1e-7) => j += 1,
                        _ => break,
                    }
                }
                let cluster = j - i;
                let center = (i..j)
                    .filter_map(|t| values[t].finite())
                    .fold(C64::new(0.0, 0.0), |acc, z| acc + z)
                    / cluster as f64;
                let a = if cluster == 1 {
                    m * lam + k
                } else {
                    m * center + k
                };
                let (vecs, _) = smallest_right_singular(&a, cluster);
                for (t, mut vec) in (i..j).zip(vecs) {
                    let nv = vec.norm();
                    if nv > 0.0 {
                        vec /= c(nv, 0.0);
                    }
                    fix_phase(&mut vec);
                    out.push(PencilEig {
                        value: values[t],
                        vector: Some(vec),
                    });
                }
                i = j;
            }
        }
    }
    Ok(out)
}

/// Two-sided Rayleigh refinement of an approximate eigenvalue.
fn polish(m: &CMatrix, k: &CMatrix, lam: C64) -> C64 {
    let mut best = lam;
    let mut best_res = sigma_min_rel(m, k, lam);
    let mut cur = lam;
    for _ in 0..3 {
        let a = m * cur + k;
        let (x, _) = smallest_right_singular(&a, 1);
        let x = &x[0];
        let y = smallest_left_singular(&a);
        let ymx = (y.adjoint() * m * x)[(0, 0)];
        if ymx.norm() <= 1e-14 * fro(m) {
            break;
        }
        let next = -(y.adjoint() * k * x)[(0, 0)] / ymx;
        let res = sigma_min_rel(m, k, next);
        if res < best_res {
            best = next;
            best_res = res;
            cur = next;
        } else {
            break;
        }
    }
    best
}

fn sigma_min_rel(m: &CMatrix, k: &CMatrix, lam: C64) -> f64 {
    let s = singular_values(&(m * lam + k));
    let lo = *s.last().unwrap_or(&0.0);
    lo / (lam.norm() * fro(m) + fro(k)).max(f64::MIN_POSITIVE)
}

/// |a−b| <= rel·(1 + max(|a|,|b|)).
pub fn same_eigenvalue(a: C64, b: C64, rel: f64) -> bool {
    (a - b).norm() <= rel * (1.0 + a.norm().max(b.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rnd(seed: u64, r: usize, cols: usize) -> CMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        CMatrix::from_fn(r, cols, |_, _| {
            c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        })
    }

    #[test]
    fn pinv_identity_and_diag() {
        let i3 = identity(3);
        assert!((pseudoinverse(&i3) - &i3).norm() < 1e-15);
        let d = real_diag(&[2.0, 0.0]);
        let p = pseudoinverse(&d);
        assert!((p - real_diag(&[0.5, 0.0])).norm() < 1e-15);
    }

    #[test]
    fn pinv_zero_maps_to_zero_transposed() {
        let z = CMatrix::zeros(2, 3);
        let p = pseudoinverse(&z);
        assert_eq!(p.shape(), (3, 2));
        assert_eq!(p.norm(), 0.0);
    }

    #[test]
    fn pinv_penrose_tall() {
        let a = rnd(7, 5, 3);
        let p = pseudoinverse(&a);
        assert!((&a * &p * &a - &a).norm() <= 1e-12 * a.norm());
    }

    #[test]
    fn solve_examples() {
        let b = real_matrix(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let s = solve(&identity(2), &b).unwrap();
        assert!((s.x - &b).norm() < 1e-15);
        assert!((s.rcond - 1.0).abs() < 1e-15);
        let s = solve(&real_diag(&[2.0, 4.0]), &identity(2)).unwrap();
        assert!((s.x - real_diag(&[0.5, 0.25])).norm() < 1e-15);
        let e = solve(&real_matrix(2, 2, &[1.0, 1.0, 1.0, 1.0]), &b).unwrap_err();
        assert_eq!(e.name(), "SingularMatrix");
    }

    #[test]
    fn solve_rejects_non_square() {
        let e = solve(&CMatrix::zeros(2, 3), &CMatrix::zeros(2, 1)).unwrap_err();
        assert_eq!(e.name(), "DimensionMismatch");
    }

    #[test]
    fn eig_pencil_diagonal() {
        let e = eig_pencil(&identity(2), &(-real_diag(&[3.0, 5.0]))).unwrap();
        let v: Vec<C64> = e.iter().map(|p| p.value.finite().unwrap()).collect();
        assert!((v[0] - c(3.0, 0.0)).norm() < 1e-13);
        assert!((v[1] - c(5.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn eig_pencil_singular_m_gives_infinite() {
        let e = eig_pencil(&real_diag(&[1.0, 0.0]), &identity(2)).unwrap();
        assert_eq!(e.len(), 2);
        assert!((e[0].value.finite().unwrap() - c(-1.0, 0.0)).norm() < 1e-13);
        assert_eq!(e[1].value, Eigenvalue::Infinite);
        assert!(e[1].vector.is_none());
    }

    #[test]
    fn eig_pencil_detects_singular_pencil() {
        // common null vector e2 makes det(λM+K) ≡ 0
        let m = real_diag(&[1.0, 0.0]);
        let k = real_diag(&[2.0, 0.0]);
        assert_eq!(eig_pencil(&m, &k).unwrap_err(), Error::SingularPencil);
    }

    #[test]
    fn eig_pencil_residuals_random() {
        let m = rnd(3, 6, 6);
        let k = rnd(4, 6, 6);
        for p in eig_pencil(&m, &k).unwrap() {
            let lam = p.value.finite().unwrap();
            let x = p.vector.unwrap();
            assert!((x.norm() - 1.0).abs() < 1e-12);
            let r = (&m * &x * lam + &k * &x).norm();
            assert!(r <= tol::EIG * (lam.norm() * m.norm() + k.norm()), "{r}");
        }
    }

    #[test]
    fn herm_eigs_examples() {
        let e = herm_eigs(&identity(2)).unwrap();
        assert_eq!(e, vec![1.0, 1.0]);
        let e = herm_eigs(&real_diag(&[3.0, -1.0])).unwrap();
        assert!((e[0] + 1.0).abs() < 1e-15 && (e[1] - 3.0).abs() < 1e-15);
        let b = rnd(11, 4, 4);
        let g = b.adjoint() * &b;
        let e = herm_eigs(&g).unwrap();
        assert!(e[0] >= -1e-12 * g.norm());
        let bad = real_matrix(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(herm_eigs(&bad).unwrap_err().name(), "NotHermitian");
    }

    #[test]
    fn from_rows_rejects_nan() {
        let e = from_rows(1, 2, &[c(1.0, 0.0), c(f64::NAN, 0.0)]).unwrap_err();
        assert_eq!(e.name(), "NonFinite");
        assert_eq!(from_rows(1, 2, &[c(1.0, 0.0)]).unwrap_err().name(), "DimensionMismatch");
    }

    #[test]
    fn eigvals_of_rotation() {
        let r = real_matrix(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let mut e = eigvals(&r);
        e.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!((e[0] - c(0.0, -1.0)).norm() < 1e-14);
        assert!((e[1] - c(0.0, 1.0)).norm() < 1e-14);
    }
}
