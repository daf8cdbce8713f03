//! Certificates for computed updates: residuals, structure, definiteness and
//! the full-spectrum check.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::numerics::{eig_pencil, eigvals, fro, herm_eigs, CMatrix, Eigenvalue, C64};
use crate::pencil::{deflation_residual, symmetry_residual, DeflationReport, Star, StructureTag, StructuredPencil};
use crate::tol;
use crate::update_structured::pencil_symmetry_residuals;
use crate::update_unstructured::{UpdateProblem, UpdateResult};

/// Minimum-cost assignment of rows to columns (Hungarian method).
///
/// Works for rectangular cost matrices; entry `i` of the result is the column
/// assigned to row `i`, or `None` when there are more rows than columns.
pub fn min_cost_assignment(cost: &[Vec<f64>]) -> Vec<Option<usize>> {
    let rows = cost.len();
    let cols = cost.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return vec![None; rows];
    }
    if rows > cols {
        let t: Vec<Vec<f64>> = (0..cols).map(|j| (0..rows).map(|i| cost[i][j]).collect()).collect();
        let by_col = min_cost_assignment(&t);
        let mut out = vec![None; rows];
        for (j, i) in by_col.into_iter().enumerate() {
            if let Some(i) = i {
                out[i] = Some(j);
            }
        }
        return out;
    }
    let (n, m) = (rows, cols);
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=m {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![None; n];
    for j in 1..=m {
        if p[j] != 0 {
            out[p[j] - 1] = Some(j - 1);
        }
    }
    out
}

/// `|a−b| / (1 + max(|a|,|b|))`; zero between two infinite values.
pub fn eigen_distance(a: Eigenvalue, b: Eigenvalue) -> f64 {
    match (a, b) {
        (Eigenvalue::Finite(x), Eigenvalue::Finite(y)) => (x - y).norm() / (1.0 + x.norm().max(y.norm())),
        (Eigenvalue::Infinite, Eigenvalue::Infinite) => 0.0,
        _ => f64::INFINITY,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub max_distance: f64,
    /// `(computed, expected, distance)` for each matched pair.
    pub matched: Vec<(Eigenvalue, Eigenvalue, f64)>,
    pub unmatched_computed: usize,
    pub unmatched_expected: usize,
}

impl SpectrumReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.unmatched_computed == 0 && self.unmatched_expected == 0 && self.max_distance <= tol
    }
}

/// Matches the spectrum of `λM+K` against an expected multiset.
pub fn match_spectra(computed: &[Eigenvalue], expected: &[Eigenvalue]) -> SpectrumReport {
    // finite cost for the assignment; mismatched kinds are reported as infinite
    let cost: Vec<Vec<f64>> = computed
        .iter()
        .map(|&a| expected.iter().map(|&b| eigen_distance(a, b).min(1e6)).collect())
        .collect();
    let assign = min_cost_assignment(&cost);
    let mut matched = Vec::new();
    let mut max_distance: f64 = 0.0;
    for (i, j) in assign.iter().enumerate() {
        if let Some(j) = *j {
            let d = eigen_distance(computed[i], expected[j]);
            max_distance = max_distance.max(d);
            matched.push((computed[i], expected[j], d));
        }
    }
    SpectrumReport {
        max_distance,
        unmatched_computed: computed.len() - matched.len(),
        unmatched_expected: expected.len() - matched.len(),
        matched,
    }
}

pub fn spectrum_match(m: &CMatrix, k: &CMatrix, expected: &[Eigenvalue]) -> Result<SpectrumReport> {
    let computed: Vec<Eigenvalue> = eig_pencil(m, k)?.into_iter().map(|e| e.value).collect();
    Ok(match_spectra(&computed, expected))
}

/// Matrices whose Hermitian definiteness can be requested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PsdTarget {
    DeltaM,
    DeltaK,
    UpdatedM,
    UpdatedK,
}

impl PsdTarget {
    pub fn label(self) -> &'static str {
        match self {
            PsdTarget::DeltaM => "DeltaM",
            PsdTarget::DeltaK => "DeltaK",
            PsdTarget::UpdatedM => "M+DeltaM",
            PsdTarget::UpdatedK => "K+DeltaK",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertifyOptions {
    pub tol_defl: f64,
    pub tol_struct: f64,
    pub tol_spectrum: f64,
    /// Structure the updated pencil must carry; defaults to the pencil's tag.
    pub tag: Option<StructureTag>,
    /// Check skew-Hamiltonian/Hamiltonian structure with this adjoint instead.
    pub shh: Option<Star>,
    pub psd: Vec<PsdTarget>,
    pub spectrum: bool,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            tol_defl: tol::DEFL,
            tol_struct: tol::STRUCT,
            tol_spectrum: 1e-7,
            tag: None,
            shh: None,
            psd: Vec::new(),
            spectrum: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub target_residual: DeflationReport,
    pub spillover_residual: Option<DeflationReport>,
    pub structure_residuals: Vec<(String, f64)>,
    /// Smallest eigenvalue of the Hermitian matrices requested.
    pub definiteness: Vec<(String, f64)>,
    pub spectrum_match: Option<SpectrumReport>,
    pub pass: bool,
    pub failures: Vec<String>,
}

fn worst_column(r: &CMatrix) -> usize {
    (0..r.ncols())
        .max_by(|&a, &b| r.column(a).norm().total_cmp(&r.column(b).norm()))
        .unwrap_or(0)
}

fn worst_entry(a: &CMatrix) -> (usize, usize) {
    let mut best = (0, 0, -1.0);
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            let v = a[(i, j)].norm();
            if v > best.2 {
                best = (i, j, v);
            }
        }
    }
    (best.0, best.1)
}

fn j_matrix_of(size: usize) -> CMatrix {
    crate::shh::j_matrix(size / 2)
}

/// Certifies `(ΔM, ΔK)` for the pencil `l` against the targets (and fixed
/// pair when present). Failures are reported, never raised, except for
/// inconsistent dimensions.
pub fn certify_delta(
    l: &StructuredPencil,
    dm: &CMatrix,
    dk: &CMatrix,
    problem: &UpdateProblem,
    opts: &CertifyOptions,
) -> Result<Certificate> {
    let m1 = &l.m + dm;
    let k1 = &l.k + dk;
    let mut failures = Vec::new();

    let mut target = deflation_residual(&m1, &k1, &problem.xa, &problem.lambda_a)?;
    target.pass = target.rel <= opts.tol_defl;
    if !target.pass {
        let r = &m1 * &problem.xa * &problem.lambda_a + &k1 * &problem.xa;
        failures.push(format!(
            "target residual {:.3e} exceeds {:.1e}; worst target column {}",
            target.rel,
            opts.tol_defl,
            worst_column(&r)
        ));
    }

    let spillover = match &problem.fixed {
        Some(f) => {
            let mut s = deflation_residual(&m1, &k1, &f.x, &f.lambda)?;
            s.pass = s.rel <= opts.tol_defl;
            if !s.pass {
                let r = &m1 * &f.x * &f.lambda + &k1 * &f.x;
                failures.push(format!(
                    "spillover residual {:.3e} exceeds {:.1e}; worst fixed column {}",
                    s.rel,
                    opts.tol_defl,
                    worst_column(&r)
                ));
            }
            Some(s)
        }
        None => None,
    };

    let mut structure = Vec::new();
    let mut check_sym = |label: &str, a: &CMatrix, star: Star, eps: f64, failures: &mut Vec<String>| {
        let r = symmetry_residual(a, star, eps);
        if r > opts.tol_struct {
            let (i, j) = worst_entry(&(star.mat(a) - a * crate::numerics::c(eps, 0.0)));
            failures.push(format!(
                "{label} symmetry residual {r:.3e} exceeds {:.1e}; largest defect at ({i}, {j})",
                opts.tol_struct
            ));
        }
        structure.push((label.to_string(), r));
    };
    if let Some(star) = opts.shh {
        let j = j_matrix_of(l.n());
        check_sym("J(M+DeltaM)", &(&j * &m1), star, -1.0, &mut failures);
        check_sym("J(K+DeltaK)", &(&j * &k1), star, 1.0, &mut failures);
        let (a, b) = pencil_symmetry_residuals(&(&j * dm), &(&j * dk), star, -1.0, 1.0);
        structure.push(("J*DeltaM".into(), a));
        structure.push(("J*DeltaK".into(), b));
        if a.max(b) > opts.tol_struct {
            failures.push(format!("J-twisted deltas lose structure: residuals {a:.3e}, {b:.3e}"));
        }
    } else if let StructureTag::Structured { star, eps1, eps2 } = opts.tag.unwrap_or(l.tag) {
        check_sym("M+DeltaM", &m1, star, eps1.value(), &mut failures);
        check_sym("K+DeltaK", &k1, star, eps2.value(), &mut failures);
        let (a, b) = pencil_symmetry_residuals(dm, dk, star, eps1.value(), eps2.value());
        structure.push(("DeltaM".into(), a));
        structure.push(("DeltaK".into(), b));
        if a.max(b) > opts.tol_struct {
            failures.push(format!("deltas lose structure: residuals {a:.3e}, {b:.3e}"));
        }
    }

    let mut definiteness = Vec::new();
    for &t in &opts.psd {
        let a = match t {
            PsdTarget::DeltaM => dm,
            PsdTarget::DeltaK => dk,
            PsdTarget::UpdatedM => &m1,
            PsdTarget::UpdatedK => &k1,
        };
        match herm_eigs(a) {
            Ok(ev) => {
                let min = ev.first().copied().unwrap_or(0.0);
                if min < -tol::PSD * fro(a).max(1.0) {
                    failures.push(format!("{} is not semidefinite: minimum eigenvalue {min:.3e}", t.label()));
                }
                definiteness.push((t.label().to_string(), min));
            }
            Err(e) => failures.push(format!("{}: {e}", t.label())),
        }
    }

    let spectrum = if opts.spectrum {
        match &problem.fixed {
            Some(f) if f.p() + problem.p() == l.n() => {
                let expected: Vec<Eigenvalue> = eigvals(&problem.lambda_a)
                    .into_iter()
                    .chain(eigvals(&f.lambda))
                    .map(Eigenvalue::Finite)
                    .collect();
                match spectrum_match(&m1, &k1, &expected) {
                    Ok(rep) => {
                        if !rep.passes(opts.tol_spectrum) {
                            failures.push(format!(
                                "spectrum mismatch: max matched distance {:.3e}, unmatched {}/{}",
                                rep.max_distance, rep.unmatched_computed, rep.unmatched_expected
                            ));
                        }
                        Some(rep)
                    }
                    Err(e) => {
                        failures.push(format!("spectrum: {e}"));
                        None
                    }
                }
            }
            _ => None,
        }
    } else {
        None
    };

    Ok(Certificate {
        target_residual: target,
        spillover_residual: spillover,
        structure_residuals: structure,
        definiteness,
        spectrum_match: spectrum,
        pass: failures.is_empty(),
        failures,
    })
}

pub fn certify(
    l: &StructuredPencil,
    result: &UpdateResult,
    problem: &UpdateProblem,
    opts: &CertifyOptions,
) -> Result<Certificate> {
    certify_delta(l, &result.delta_m, &result.delta_k, problem, opts)
}

/// Finite eigenvalues of a small block as an expected multiset.
pub fn finite(values: &[C64]) -> Vec<Eigenvalue> {
    values.iter().copied().map(Eigenvalue::Finite).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{c, identity, real_diag, real_matrix};
    use crate::pencil::DeflatingPair;

    #[test]
    fn assignment_small() {
        let cost = vec![vec![4.0, 1.0, 3.0], vec![2.0, 0.0, 5.0], vec![3.0, 2.0, 2.0]];
        let a = min_cost_assignment(&cost);
        let total: f64 = a.iter().enumerate().map(|(i, j)| cost[i][j.unwrap()]).sum();
        assert_eq!(total, 5.0);
        let wide = vec![vec![5.0, 1.0, 9.0]];
        assert_eq!(min_cost_assignment(&wide), vec![Some(1)]);
        let tall = vec![vec![5.0], vec![1.0]];
        assert_eq!(min_cost_assignment(&tall), vec![None, Some(0)]);
    }

    #[test]
    fn spectrum_is_order_free() {
        let m = identity(3);
        let k = -real_diag(&[1.0, 2.0, 3.0]);
        let e1 = finite(&[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]);
        let e2 = finite(&[c(3.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)]);
        let a = spectrum_match(&m, &k, &e1).unwrap();
        let b = spectrum_match(&m, &k, &e2).unwrap();
        assert!(a.max_distance < 1e-14);
        assert_eq!(a.max_distance, b.max_distance);
        assert!(a.passes(1e-12));
    }

    #[test]
    fn infinite_eigenvalues_match_each_other() {
        let m = real_diag(&[1.0, 0.0]);
        let rep = spectrum_match(&m, &identity(2), &[Eigenvalue::Infinite, Eigenvalue::Finite(c(-1.0, 0.0))]).unwrap();
        assert!(rep.passes(1e-12));
    }

    fn diag_setup() -> (StructuredPencil, UpdateProblem) {
        let l = StructuredPencil::new(identity(2), -real_diag(&[3.0, 5.0]), StructureTag::HERMITIAN).unwrap();
        let change = DeflatingPair::new(real_matrix(2, 1, &[1.0, 0.0]), real_diag(&[3.0])).unwrap();
        let fixed = DeflatingPair::new(real_matrix(2, 1, &[0.0, 1.0]), real_diag(&[5.0])).unwrap();
        let p = UpdateProblem::same_vectors(change, real_diag(&[3.0]), Some(fixed)).unwrap();
        (l, p)
    }

    #[test]
    fn zero_update_passes() {
        let (l, p) = diag_setup();
        let z = CMatrix::zeros(2, 2);
        let opts = CertifyOptions {
            psd: vec![PsdTarget::DeltaM, PsdTarget::DeltaK],
            ..Default::default()
        };
        let cert = certify_delta(&l, &z, &z, &p, &opts).unwrap();
        assert!(cert.pass, "{:?}", cert.failures);
        assert_eq!(cert.target_residual.abs, 0.0);
        assert_eq!(cert.spillover_residual.unwrap().abs, 0.0);
    }

    #[test]
    fn corrupted_delta_fails_with_diagnosis() {
        let (l, p) = diag_setup();
        let z = CMatrix::zeros(2, 2);
        let mut bad = z.clone();
        bad[(1, 1)] = c(1e-3, 0.0);
        let cert = certify_delta(&l, &z, &bad, &p, &CertifyOptions::default()).unwrap();
        assert!(!cert.pass);
        assert!(cert.failures.iter().any(|f| f.contains("spillover") && f.contains("column 0")));
        assert!(cert.failures.iter().any(|f| f.contains("spectrum")));
    }
}
