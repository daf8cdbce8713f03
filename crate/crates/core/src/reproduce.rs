//! The four worked examples, rerun from their printed data.
//!
//! Eigenpairs are recomputed at full precision from the printed pencils and
//! normalized the way the printed eigenvectors are; the printed update
//! parameters are then applied and the results compared with the printed
//! update matrices.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{c, diag, eig_pencil, fix_phase, from_rows, real_diag, real_matrix, CMatrix, CVector, C64};
use crate::pencil::{deflation_residual, m_normalize_columns, GramMode, Star, StructureTag, StructuredPencil};
use crate::shh::{j_matrix, shh_gramian, shh_residuals, shh_update, star_shh_params, ShhPencil};
use crate::specializations::{hermitian_update_z, star_even_update, star_odd_update, CoreParams};
use crate::update_unstructured::UpdateResult;
use crate::verify::PsdTarget;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExampleId {
    #[serde(rename = "herm-6.1")]
    Herm61,
    #[serde(rename = "odd-6.2")]
    Odd62,
    #[serde(rename = "even-6.3")]
    Even63,
    #[serde(rename = "shh-7")]
    Shh7,
}

impl ExampleId {
    pub const ALL: [ExampleId; 4] = [ExampleId::Herm61, ExampleId::Odd62, ExampleId::Even63, ExampleId::Shh7];

    pub fn name(self) -> &'static str {
        match self {
            ExampleId::Herm61 => "herm-6.1",
            ExampleId::Odd62 => "odd-6.2",
            ExampleId::Even63 => "even-6.3",
            ExampleId::Shh7 => "shh-7",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == s)
    }
}

/// Outcome of one rerun.
#[derive(Debug, Clone, Serialize)]
pub struct Reproduction {
    pub id: ExampleId,
    /// `max|computed − printed| / max|printed|` for ΔM and ΔK.
    pub deviation_dm: f64,
    pub deviation_dk: f64,
    /// `‖(M+ΔM)X_fΛ_f + (K+ΔK)X_f‖_F` with recomputed fixed eigenpairs.
    pub spillover: f64,
    pub printed_spillover: f64,
    /// Same norm for the targets `(X_c, Λ_a)`.
    pub target_residual: f64,
    /// Symmetry residuals of the updates (twisted by `J` for the SHH example).
    pub structure: Vec<(String, f64)>,
    /// Smallest Hermitian eigenvalue of the updates claimed semidefinite.
    pub definiteness: Vec<(String, f64)>,
    pub lambda_c: Vec<C64>,
    pub lambda_f: Vec<C64>,
    #[serde(skip)]
    pub result: UpdateResult,
    #[serde(skip)]
    pub printed_dm: CMatrix,
    #[serde(skip)]
    pub printed_dk: CMatrix,
}

/// Entries as (re, im) pairs, row-major.
fn cm(rows: usize, cols: usize, v: &[(f64, f64)]) -> CMatrix {
    let e: Vec<C64> = v.iter().map(|&(a, b)| c(a, b)).collect();
    from_rows(rows, cols, &e).expect("embedded data has consistent shape")
}

fn rm(rows: usize, cols: usize, v: &[f64]) -> CMatrix {
    real_matrix(rows, cols, v)
}

/// Max entrywise deviation relative to the largest printed entry.
pub fn relative_deviation(computed: &CMatrix, printed: &CMatrix) -> f64 {
    let scale = printed.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let diff = computed.iter().zip(printed.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

struct Eigs {
    values: Vec<C64>,
    vectors: Vec<CVector>,
}

/// Finite eigenpairs of the pencil, matched to `near` (one per entry) and the rest.
fn split_eigs(m: &CMatrix, k: &CMatrix, near: &[C64]) -> Result<(Eigs, Eigs)> {
    let mut all: Vec<(C64, CVector)> = eig_pencil(m, k)?
        .into_iter()
        .filter_map(|e| Some((e.value.finite()?, e.vector?)))
        .collect();
    let mut chosen = Eigs { values: vec![], vectors: vec![] };
    for &z in near {
        let (i, _) = all
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 .0 - z).norm().total_cmp(&(b.1 .0 - z).norm()))
            .ok_or(Error::SingularPencil)?;
        let (v, x) = all.remove(i);
        chosen.values.push(v);
        chosen.vectors.push(x);
    }
    let (values, vectors) = all.into_iter().unzip();
    Ok((chosen, Eigs { values, vectors }))
}

fn columns(v: &[CVector]) -> CMatrix {
    CMatrix::from_columns(v)
}

/// Scales each column so its largest-magnitude entry is exactly 1.
fn unit_max_entry(x: &CMatrix) -> CMatrix {
    let cols: Vec<CVector> = x
        .column_iter()
        .map(|col| {
            let mut v = col.into_owned();
            fix_phase(&mut v);
            let big = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
            v / c(big, 0.0)
        })
        .collect();
    CMatrix::from_columns(&cols)
}

fn psd_min(a: &CMatrix) -> f64 {
    crate::numerics::herm_part_eigs(a).first().copied().unwrap_or(0.0)
}

struct Outcome {
    result: UpdateResult,
    xc: CMatrix,
    lambda_a: CMatrix,
    xf: CMatrix,
    lambda_f: CMatrix,
    lambda_c: Vec<C64>,
}

fn finish(
    id: ExampleId,
    m: &CMatrix,
    k: &CMatrix,
    o: Outcome,
    printed: (CMatrix, CMatrix, f64),
    structure: Vec<(String, f64)>,
    psd: &[PsdTarget],
) -> Result<Reproduction> {
    let (dm, dk) = (&o.result.delta_m, &o.result.delta_k);
    let (m1, k1) = (m + dm, k + dk);
    let spill = deflation_residual(&m1, &k1, &o.xf, &o.lambda_f)?;
    let target = deflation_residual(&m1, &k1, &o.xc, &o.lambda_a)?;
    let definiteness = psd
        .iter()
        .map(|t| {
            let a = match t {
                PsdTarget::DeltaM => dm,
                PsdTarget::DeltaK => dk,
                PsdTarget::UpdatedM => &m1,
                PsdTarget::UpdatedK => &k1,
            };
            (t.label().to_string(), psd_min(a))
        })
        .collect();
    Ok(Reproduction {
        id,
        deviation_dm: relative_deviation(dm, &printed.0),
        deviation_dk: relative_deviation(dk, &printed.1),
        spillover: spill.abs,
        printed_spillover: printed.2,
        target_residual: target.abs,
        structure,
        definiteness,
        lambda_c: o.lambda_c,
        lambda_f: o.lambda_f.diagonal().iter().copied().collect(),
        result: o.result,
        printed_dm: printed.0,
        printed_dk: printed.1,
    })
}

fn sym(name: &str, a: &CMatrix, eps: f64) -> (String, f64) {
    (name.to_string(), crate::pencil::symmetry_residual(a, Star::Conj, eps))
}

/// The pencil data of an example: `(M, K, tag)`.
pub fn example_pencil(id: ExampleId) -> (CMatrix, CMatrix, &'static str) {
    match id {
        ExampleId::Herm61 => (herm_m(), herm_k(), "hermitian"),
        ExampleId::Odd62 => (odd_m(), odd_k(), "star-odd"),
        ExampleId::Even63 => (even_m(), even_k(), "star-even"),
        ExampleId::Shh7 => (shh_m(), shh_k(), "star-shh"),
    }
}

pub fn reproduce(id: ExampleId) -> Result<Reproduction> {
    match id {
        ExampleId::Herm61 => herm61(),
        ExampleId::Odd62 => odd62(),
        ExampleId::Even63 => even63(),
        ExampleId::Shh7 => shh7(),
    }
}

/// Normalized change and fixed pairs of a structured pencil.
fn normalized_pairs(l: &StructuredPencil, near: &[C64], mode: GramMode) -> Result<(CMatrix, Vec<C64>, CMatrix, CMatrix)> {
    let (ch, fx) = split_eigs(&l.m, &l.k, near)?;
    let xc = m_normalize_columns(l, &columns(&ch.vectors), mode, Some(&ch.values))?;
    let xf = m_normalize_columns(l, &columns(&fx.vectors), mode, Some(&fx.values))?;
    Ok((xc, ch.values, xf, diag(&fx.values)))
}

// ---------------------------------------------------------------- Hermitian

fn herm_m() -> CMatrix {
    real_diag(&[1.294; 5])
}

fn herm_k() -> CMatrix {
    rm(
        5,
        5,
        &[
            1188.5, 196.6, 0.0, 0.0, -642.4, //
            196.6, 626.3, 0.0, -555.6, 0.0, //
            0.0, 0.0, 1188.5, -196.6, -546.1, //
            0.0, -555.6, -196.6, 626.3, 196.6, //
            -642.4, 0.0, -546.1, 196.6, 4019.1,
        ],
    )
}

/// The Hermitian example as an update problem: pencil, `M`-normalized `X_c`,
/// `Λ_c`, `Λ_a`, and the recomputed fixed pair `(X_f, Λ_f)`.
pub struct HermitianExample {
    pub pencil: StructuredPencil,
    pub xc: CMatrix,
    pub lambda_c: Vec<C64>,
    pub lambda_a: CMatrix,
    pub xf: CMatrix,
    pub lambda_f: CMatrix,
}

pub fn hermitian_example() -> Result<HermitianExample> {
    let l = StructuredPencil::new(herm_m(), herm_k(), StructureTag::HERMITIAN)?;
    let (xc, lc, xf, lf) = normalized_pairs(&l, &[c(-3297.13, 0.0), c(-23.648, 0.0)], GramMode::M)?;
    let lc = lc.iter().map(|z| c(z.re, 0.0)).collect::<Vec<_>>();
    Ok(HermitianExample {
        pencil: l,
        xc,
        lambda_c: lc,
        lambda_a: real_diag(&[-3297.6, -23.148]),
        xf,
        lambda_f: lf,
    })
}

fn herm61() -> Result<Reproduction> {
    let (m, k) = (herm_m(), herm_k());
    let HermitianExample { pencil: l, xc, lambda_c: lc, lambda_a, xf, lambda_f: lf } = hermitian_example()?;
    let z1 = real_diag(&[0.0, 0.021592]);
    let z2 = real_diag(&[0.47136, 0.0]);
    let result = hermitian_update_z(&l, &xc, &diag(&lc), &lambda_a, &z1, &z2)?;
    let dm = rm(
        5,
        5,
        &[
            0.5674, -2.7703, -0.3878, -2.7695, 0.1747, //
            -2.7703, 13.5270, 1.8935, 13.5231, -0.8535, //
            -0.3878, 1.8935, 0.2651, 1.8930, -0.1196, //
            -2.7695, 13.5231, 1.8930, 13.5191, -0.8532, //
            0.1747, -0.8535, -0.1196, -0.8532, 0.0543,
        ],
    ) * c(1e-3, 0.0);
    let dk = rm(
        5,
        5,
        &[
            2.4878, 0.2557, 2.1517, -0.7948, -11.8415, //
            0.2557, 0.0263, 0.2211, -0.0817, -1.2170, //
            2.1517, 0.2211, 1.8611, -0.6874, -10.2420, //
            -0.7948, -0.0817, -0.6874, 0.2539, 3.7831, //
            -11.8415, -1.2170, -10.2420, 3.7831, 56.3650,
        ],
    ) * c(1e-2, 0.0);
    let structure = vec![sym("DeltaM", &result.delta_m, 1.0), sym("DeltaK", &result.delta_k, 1.0)];
    let o = Outcome { result, xc, lambda_a, xf, lambda_f: lf, lambda_c: lc };
    finish(ExampleId::Herm61, &m, &k, o, (dm, dk, 7.7524e-13), structure, &[PsdTarget::DeltaM, PsdTarget::DeltaK])
}

// ---------------------------------------------------------------- *-odd

fn odd_m() -> CMatrix {
    cm(
        4,
        4,
        &[
            (7.73863, 0.0), (-1.98637, -4.01069), (4.09960, -3.39198), (-0.13418, 2.89422),
            (-1.98637, 4.01069), (6.55893, 0.0), (1.90812, 3.90598), (-2.03549, 1.81182),
            (4.09960, 3.39198), (1.90812, -3.90598), (6.65654, 0.0), (1.02186, 1.42954),
            (-0.13418, -2.89422), (-2.03549, -1.81182), (1.02186, -1.42954), (6.46526, 0.0),
        ],
    )
}

fn odd_k() -> CMatrix {
    cm(
        4,
        4,
        &[
            (0.0, 3.90061), (2.0140, -0.30415), (1.34863, 1.79442), (0.05369, -1.38714),
            (-2.0140, -0.30415), (0.0, -2.49371), (0.30279, 1.11588), (0.35925, -1.54051),
            (-1.34863, 1.79442), (-0.30279, 1.11588), (0.0, -0.49211), (-0.97818, -1.32790),
            (-0.05369, -1.38714), (-0.35925, -1.54051), (0.97818, -1.32790), (0.0, 1.85364),
        ],
    )
}

fn odd62() -> Result<Reproduction> {
    let (m, k) = (odd_m(), odd_k());
    let l = StructuredPencil::new(m.clone(), k.clone(), StructureTag::STAR_ODD)?;
    let (xc, lc, xf, lf) = normalized_pairs(&l, &[c(0.0, 3.3841), c(0.0, -1.3100)], GramMode::M)?;
    let lc = lc.iter().map(|z| c(0.0, z.im)).collect::<Vec<_>>();
    let lambda_a = diag(&[c(0.0, -1.3492), c(0.0, 0.6320)]);
    let params = CoreParams::Z {
        z1: real_diag(&[8.9752, 2.5715]),
        z2: diag(&[c(0.0, -0.00717), c(0.0, -0.60271)]),
    };
    let result = star_odd_update(&l, &xc, &diag(&lc), &lambda_a, &params)?;
    let dm = cm(
        4,
        4,
        &[
            (2.91691, 0.0), (-1.34898, 0.69543), (0.58908, -1.38017), (-2.65147, -0.99875),
            (-1.34898, -0.69543), (1.59117, 0.0), (-0.77640, 0.88115), (1.14417, 1.21855),
            (0.58908, 1.38017), (-0.77640, -0.88115), (0.99350, 0.0), (-0.03741, -1.55808),
            (-2.65147, 0.99875), (1.14417, -1.21855), (-0.03741, 1.55808), (2.80188, 0.0),
        ],
    );
    let dk = cm(
        4,
        4,
        &[
            (0.0, -5.25520), (-0.87564, 0.59483), (-1.14421, -1.67866), (-1.92869, 4.08890),
            (0.87564, 0.59483), (0.0, 6.19427), (-2.65507, -1.39903), (-1.45840, 0.46343),
            (1.14421, -1.67866), (2.65507, -1.39903), (0.0, 0.98530), (-0.69246, 1.08993),
            (1.92869, 4.08890), (1.45840, 0.46343), (0.69246, 1.08993), (0.0, -3.49173),
        ],
    );
    let structure = vec![sym("DeltaM", &result.delta_m, 1.0), sym("DeltaK", &result.delta_k, -1.0)];
    let o = Outcome { result, xc, lambda_a, xf, lambda_f: lf, lambda_c: lc };
    finish(ExampleId::Odd62, &m, &k, o, (dm, dk, 1.2209e-14), structure, &[PsdTarget::DeltaM])
}

// ---------------------------------------------------------------- *-even

fn even_m() -> CMatrix {
    cm(
        4,
        4,
        &[
            (0.0, 0.20972), (-0.10697, 0.96717), (0.04080, -0.91135), (-3.59068, 1.77061),
            (0.10697, 0.96717), (0.0, -0.94422), (-0.98779, 1.35265), (3.55621, -0.03449),
            (-0.04080, -0.91135), (0.98779, 1.35265), (0.0, -0.79806), (-0.50440, -0.71953),
            (3.59068, 1.77061), (-3.55621, -0.03449), (0.50440, -0.71953), (0.0, -1.82468),
        ],
    )
}

fn even_k() -> CMatrix {
    cm(
        4,
        4,
        &[
            (5.25927, 0.0), (-1.36185, -0.39225), (-1.02993, 3.85132), (3.10502, 0.94912),
            (-1.36185, 0.39225), (5.18883, 0.0), (0.25646, 2.08573), (2.82543, -1.42028),
            (-1.02993, -3.85132), (0.25646, -2.08573), (12.57576, 0.0), (-0.35504, -4.89141),
            (3.10502, -0.94912), (2.82543, 1.42028), (-0.35504, 4.89141), (9.24337, 0.0),
        ],
    )
}

fn even63() -> Result<Reproduction> {
    let (m, k) = (even_m(), even_k());
    let l = StructuredPencil::new(m.clone(), k.clone(), StructureTag::STAR_EVEN)?;
    let (xc, lc, xf, lf) = normalized_pairs(&l, &[c(0.0, 6.96617), c(0.0, 1.84442)], GramMode::K)?;
    let lc = lc.iter().map(|z| c(0.0, z.im)).collect::<Vec<_>>();
    let lambda_a = diag(&[c(0.0, 7.63484), c(0.0, 2.73573)]);
    let params = CoreParams::Z {
        z1: diag(&[c(0.0, 0.10025), c(0.0, 0.47934)]),
        z2: real_diag(&[0.26054, 0.84128]),
    };
    let result = star_even_update(&l, &xc, &diag(&lc), &lambda_a, &params)?;
    let dm = cm(
        4,
        4,
        &[
            (0.0, 0.52241), (-0.06183, -0.22791), (0.00122, -0.11173), (-0.41289, 0.39407),
            (0.06183, -0.22791), (0.0, 0.20921), (-0.13366, 0.07568), (0.28312, -0.05364),
            (-0.00122, -0.11173), (0.13366, 0.07568), (0.0, 0.17138), (0.18351, -0.13284),
            (0.41289, 0.39407), (-0.28312, -0.05364), (-0.18351, -0.13284), (0.0, 0.70160),
        ],
    );
    let dk = cm(
        4,
        4,
        &[
            (3.00449, 0.0), (-1.05675, 0.30905), (-0.52100, 0.27793), (2.41288, 2.20342),
            (-1.05675, -0.30905), (1.57244, 0.0), (0.52079, 1.32381), (0.16989, -1.66602),
            (-0.52100, -0.27793), (0.52079, -1.32381), (1.79857, 0.0), (-0.75754, -1.70191),
            (2.41288, -2.20342), (0.16989, 1.66602), (-0.75754, 1.70191), (4.44366, 0.0),
        ],
    );
    let structure = vec![sym("DeltaM", &result.delta_m, -1.0), sym("DeltaK", &result.delta_k, 1.0)];
    let o = Outcome { result, xc, lambda_a, xf, lambda_f: lf, lambda_c: lc };
    finish(ExampleId::Even63, &m, &k, o, (dm, dk, 1.8766e-14), structure, &[PsdTarget::DeltaK])
}

// ---------------------------------------------------------------- *-SHH

fn shh_m() -> CMatrix {
    cm(
        4,
        4,
        &[
            (-0.25455, 0.95256), (0.02934, 0.05513), (0.0, -1.83635), (0.08681, -1.45077),
            (2.25023, -0.01156), (1.14852, -1.53017), (-0.08681, -1.45077), (0.0, 1.40120),
            (0.0, -0.96582), (-0.22366, -0.46730), (-0.25455, -0.95256), (2.25023, 0.01156),
            (0.22366, -0.46730), (0.0, -1.00248), (0.02934, -0.05513), (1.14852, 1.53017),
        ],
    )
}

fn shh_k() -> CMatrix {
    cm(
        4,
        4,
        &[
            (3.02148, 1.90489), (1.10499, 1.16245), (-1.26366, 0.0), (1.65942, 0.71011),
            (0.44232, -1.07299), (0.29350, -0.24688), (1.65942, -0.71011), (-0.19304, 0.0),
            (1.30628, 0.0), (-0.42739, 0.75761), (-3.02148, 1.90489), (-0.44232, -1.07299),
            (-0.42739, -0.75761), (0.52491, 0.0), (-1.10499, 1.16245), (-0.29350, -0.24688),
        ],
    )
}

fn shh7() -> Result<Reproduction> {
    let (m, k) = (shh_m(), shh_k());
    let l = ShhPencil::new(m.clone(), k.clone(), Star::Conj)?;
    let l1 = c(-0.92332, -0.75639);
    let near = [l1, -l1.conj(), c(0.0, -0.12114)];
    let (ch, fx) = split_eigs(&m, &k, &near)?;
    // mirror pairs exactly and keep the tail imaginary
    let mut lc = ch.values.clone();
    let mid = (lc[0] - lc[1].conj()) * c(0.5, 0.0);
    lc[0] = mid;
    lc[1] = -mid.conj();
    lc[2] = c(0.0, lc[2].im);
    let xc = unit_max_entry(&columns(&ch.vectors));
    let xf = unit_max_entry(&columns(&fx.vectors));
    let la1 = c(-0.76954, 0.53243);
    let lambda_a = diag(&[la1, -la1.conj(), c(0.0, -3.22147)]);
    let (g, _) = shh_gramian(&l, &xc)?;
    let a = c(0.06022, 0.19082);
    let b = c(-0.50561, 0.37741);
    let z1 = cm(3, 3, &[(0.0, 0.0), (a.re, a.im), (0.0, 0.0), (-a.re, a.im), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 1.19827)]);
    let z2 = cm(3, 3, &[(0.0, 0.0), (b.re, b.im), (0.0, 0.0), (b.re, -b.im), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (1.45556, 0.0)]);
    let core = star_shh_params(&g, &diag(&lc), &lambda_a, &z1, &z2)?;
    let result = shh_update(&l, &xc, &diag(&lc), &lambda_a, &core)?;
    let dm = cm(
        4,
        4,
        &[
            (0.27615, 0.21015), (-0.64643, -1.17676), (0.0, -0.45391), (0.95858, 0.57857),
            (-0.88139, -0.13297), (-1.84854, 0.99750), (-0.95858, 0.57857), (0.0, -2.19806),
            (0.0, 0.70112), (0.64985, -0.15198), (0.27615, -0.21015), (-0.88139, 0.13297),
            (-0.64985, -0.15198), (0.0, 1.69525), (-0.64643, 1.17676), (-1.84854, -0.99750),
        ],
    );
    let dk = cm(
        4,
        4,
        &[
            (-0.63477, -1.42656), (-1.93590, -0.08067), (-2.43388, 0.0), (0.04977, -2.40635),
            (-1.43606, 0.85246), (0.29333, 1.96152), (0.04977, 2.40635), (-2.93978, 0.0),
            (0.86197, 0.0), (0.63350, -1.45810), (0.63477, -1.42656), (1.43606, 0.85246),
            (0.63350, 1.45810), (1.46857, 0.0), (1.93590, -0.08067), (-0.29333, 1.96152),
        ],
    );
    let (rm_, rk_) = shh_residuals(&result.delta_m, &result.delta_k, Star::Conj);
    let j = j_matrix(2);
    let structure = vec![
        ("J*DeltaM".to_string(), rm_),
        ("J*DeltaK".to_string(), rk_),
        sym("J*(M+DeltaM)", &(&j * (&m + &result.delta_m)), -1.0),
        sym("J*(K+DeltaK)", &(&j * (&k + &result.delta_k)), 1.0),
    ];
    let o = Outcome {
        result,
        xc,
        lambda_a,
        xf,
        lambda_f: diag(&fx.values),
        lambda_c: lc,
    };
    finish(ExampleId::Shh7, &m, &k, o, (dm, dk, 1.5519e-14), structure, &[])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples_run() {
        for id in ExampleId::ALL {
            let r = reproduce(id).unwrap();
            eprintln!(
                "{}: dm {:.3e} dk {:.3e} spill {:.3e} target {:.3e} {:?} {:?}",
                id.name(),
                r.deviation_dm,
                r.deviation_dk,
                r.spillover,
                r.target_residual,
                r.structure,
                r.definiteness
            );
        }
    }
}
