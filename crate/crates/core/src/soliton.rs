//! Derivation algebras and algebraic solitons.
//!
//! A left-invariant metric is an algebraic soliton for a flow driven by a
//! curvature form ρ^{1,1} exactly when
//!
//! ```text
//! ρ^{1,1}(·,·) = c ω(·,·) + ½( ω(D·,·) + ω(·,D·) )
//! ```
//!
//! for a real constant c and a derivation D commuting with J (expanding when
//! c < 0).  Real J-commuting endomorphisms are parameterized by their
//! complex-linear (1,0) block E, with the (0,1) block conj(E); the linear
//! system for derivations and the soliton equation are both solved over that
//! block, which halves the system size.

use crate::exterior::GradedForm;
use crate::hermitian::{
    form_to_matrix, ricci_endomorphism, ricci_endomorphism_spectrum, HermitianMetric,
};
use crate::lie::StructureConstants;
use crate::scalar::{Scalar, C64};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

/// Relative least-squares acceptance threshold for soliton residuals.
pub const SOLITON_TOL: f64 = 1e-8;

/// Relative rank cutoff for null spaces and spectra.
const RANK_TOL: f64 = 1e-9;

/// A real endomorphism of 𝔤 in full-frame coordinates, satisfying the
/// reality constraint D(ē) = conj(D e).
#[derive(Debug, Clone)]
pub struct FrameEndomorphism {
    full: DMatrix<C64>,
}

impl FrameEndomorphism {
    pub fn full(&self) -> &DMatrix<C64> {
        &self.full
    }

    /// The n×n block acting on 𝔤^{1,0}; for J-commuting maps this is the
    /// whole story.
    pub fn holomorphic_block(&self) -> DMatrix<C64> {
        let n = self.full.nrows() / 2;
        DMatrix::from_fn(n, n, |a, b| self.full[(a, b)])
    }

    /// Max violation of D[x,y] = [Dx,y] + [x,Dy] over frame pairs.
    pub fn derivation_defect(&self, sc: &StructureConstants<C64>) -> f64 {
        let dim = sc.dim();
        let mut worst: f64 = 0.0;
        for alpha in 0..dim {
            for beta in (alpha + 1)..dim {
                let defect = derivation_defect_vector(sc, &self.full, alpha, beta);
                worst = worst.max(defect.iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
        worst
    }
}

fn column(m: &DMatrix<C64>, j: usize) -> Vec<C64> {
    (0..m.nrows()).map(|i| m[(i, j)]).collect()
}

/// D[e_α, e_β] − [D e_α, e_β] − [e_α, D e_β] as a full-frame vector.
fn derivation_defect_vector(
    sc: &StructureConstants<C64>,
    d: &DMatrix<C64>,
    alpha: usize,
    beta: usize,
) -> Vec<C64> {
    let dim = sc.dim();
    let br = sc.bracket_basis(alpha, beta);
    let mut out = vec![C64::from_re(0.0); dim];
    for (k, c) in br.iter().enumerate() {
        if c.norm() > 0.0 {
            for i in 0..dim {
                out[i] += d[(i, k)] * c;
            }
        }
    }
    let ea = column(d, alpha);
    let eb = column(d, beta);
    for k in 0..dim {
        if ea[k].norm() > 0.0 {
            for (i, c) in sc.bracket_basis(k, beta).iter().enumerate() {
                out[i] -= ea[k] * c;
            }
        }
        if eb[k].norm() > 0.0 {
            for (i, c) in sc.bracket_basis(alpha, k).iter().enumerate() {
                out[i] -= eb[k] * c;
            }
        }
    }
    out
}

/// Elementary generators of the endomorphism space being searched.
fn elementary_endomorphisms(n: usize, commute_with_j: bool) -> Vec<DMatrix<C64>> {
    let dim = 2 * n;
    let mut out = Vec::new();
    let units = [C64::from_re(1.0), C64::i()];
    for b in 0..n {
        for a in 0..n {
            for &u in &units {
                // e_a ↦ u e_b, ē_a ↦ conj(u) ē_b
                let mut d = DMatrix::<C64>::zeros(dim, dim);
                d[(b, a)] = u;
                d[(n + b, n + a)] = u.conj();
                out.push(d);
                if !commute_with_j {
                    // e_a ↦ u ē_b, ē_a ↦ conj(u) e_b
                    let mut d = DMatrix::<C64>::zeros(dim, dim);
                    d[(n + b, a)] = u;
                    d[(b, n + a)] = u.conj();
                    out.push(d);
                }
            }
        }
    }
    out
}

/// Real basis of the derivation algebra, restricted to J-commuting maps when
/// requested.  Computed as the null space of the linear system
/// D[x,y] = [Dx,y] + [x,Dy] over frame pairs.
pub fn derivation_space(
    sc: &StructureConstants<C64>,
    commute_with_j: bool,
) -> Vec<FrameEndomorphism> {
    let dim = sc.dim();
    let gens = elementary_endomorphisms(sc.n10(), commute_with_j);
    let pairs: Vec<(usize, usize)> = (0..dim)
        .flat_map(|a| ((a + 1)..dim).map(move |b| (a, b)))
        .collect();
    let rows = pairs.len() * dim * 2;
    let mut a = DMatrix::<f64>::zeros(rows, gens.len());
    for (col, gen) in gens.iter().enumerate() {
        let mut row = 0;
        for &(al, be) in &pairs {
            let defect = derivation_defect_vector(sc, gen, al, be);
            for v in defect {
                a[(row, col)] = v.re;
                a[(row + 1, col)] = v.im;
                row += 2;
            }
        }
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = RANK_TOL * smax.max(1.0);
    let mut basis = Vec::new();
    for (i, &sigma) in svd.singular_values.iter().enumerate() {
        if sigma <= cutoff {
            let mut d = DMatrix::<C64>::zeros(dim, dim);
            for (j, gen) in gens.iter().enumerate() {
                let w = v_t[(i, j)];
                if w != 0.0 {
                    d += gen * C64::from_re(w);
                }
            }
            basis.push(FrameEndomorphism { full: d });
        }
    }
    basis
}

/// Soliton certificate: ρ^{1,1} = cω + ½(ω(D·,·)+ω(·,D·)) with residual the
/// max-norm of the defect.  D is stored through its (1,0) block.
#[derive(Debug, Clone, Serialize)]
pub struct SolitonCertificate {
    pub c: f64,
    #[serde(rename = "D_block", serialize_with = "serialize_block")]
    pub d_block: DMatrix<C64>,
    pub residual: f64,
    pub expanding: bool,
}

#[derive(Serialize)]
struct ComplexParts {
    re: f64,
    im: f64,
}

fn serialize_block<Ser>(m: &DMatrix<C64>, s: Ser) -> std::result::Result<Ser::Ok, Ser::Error>
where
    Ser: serde::Serializer,
{
    use serde::ser::SerializeSeq;
    let mut rows = s.serialize_seq(Some(m.nrows()))?;
    for i in 0..m.nrows() {
        let row: Vec<ComplexParts> = (0..m.ncols())
            .map(|j| ComplexParts {
                re: m[(i, j)].re,
                im: m[(i, j)].im,
            })
            .collect();
        rows.serialize_element(&row)?;
    }
    rows.end()
}

impl SolitonCertificate {
    /// Rebuilds the full real endomorphism from the stored block.
    pub fn endomorphism(&self) -> FrameEndomorphism {
        let n = self.d_block.nrows();
        let mut full = DMatrix::<C64>::zeros(2 * n, 2 * n);
        for a in 0..n {
            for b in 0..n {
                full[(a, b)] = self.d_block[(a, b)];
                full[(n + a, n + b)] = self.d_block[(a, b)].conj();
            }
        }
        FrameEndomorphism { full }
    }
}

/// ½(Eᵀ G + G conj(E)): the Hermitian coefficient matrix of
/// ½(ω(D·,·) + ω(·,D·)) for the J-commuting D with (1,0) block E.
fn symmetrized_action(e: &DMatrix<C64>, g: &DMatrix<C64>) -> DMatrix<C64> {
    let eg = e.transpose() * g;
    (&eg + eg.adjoint()) * C64::from_re(0.5)
}

fn vectorize(m: &DMatrix<C64>) -> Vec<f64> {
    let mut v = Vec::with_capacity(2 * m.len());
    for x in m.iter() {
        v.push(x.re);
        v.push(x.im);
    }
    v
}

/// Solves the soliton equation for a computed curvature form by least
/// squares over (c, coefficients of D in the J-commuting derivation basis).
/// Returns a certificate iff the residual is at most
/// `SOLITON_TOL · (1 + max |ρ|)`.
pub fn detect_algebraic_soliton(
    sc: &StructureConstants<C64>,
    g: &HermitianMetric,
    rho: &GradedForm<C64>,
) -> Result<Option<SolitonCertificate>> {
    let n = sc.n10();
    if g.n10() != n || rho.n10() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: g.n10().max(rho.n10()),
        });
    }
    let r = form_to_matrix(&rho.projection(1, 1));
    let basis = derivation_space(sc, true);
    let blocks: Vec<DMatrix<C64>> = basis.iter().map(|d| d.holomorphic_block()).collect();

    let rows = 2 * n * n;
    let mut a = DMatrix::<f64>::zeros(rows, 1 + blocks.len());
    for (i, v) in vectorize(g.matrix()).iter().enumerate() {
        a[(i, 0)] = *v;
    }
    let sym: Vec<DMatrix<C64>> = blocks
        .iter()
        .map(|e| symmetrized_action(e, g.matrix()))
        .collect();
    for (j, s) in sym.iter().enumerate() {
        for (i, v) in vectorize(s).iter().enumerate() {
            a[(i, j + 1)] = *v;
        }
    }
    let b = DVector::from_vec(vectorize(&r));
    let svd = a.svd(true, true);
    let x = svd.solve(&b, RANK_TOL).map_err(|_| Error::SingularMetric)?;

    let c = x[0];
    let mut d_block = DMatrix::<C64>::zeros(n, n);
    let mut fit = g.matrix() * C64::from_re(c);
    for (j, (e, s)) in blocks.iter().zip(&sym).enumerate() {
        let w = C64::from_re(x[j + 1]);
        d_block += e * w;
        fit += s * w;
    }
    let residual = (&r - fit).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let scale = 1.0 + r.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if residual <= SOLITON_TOL * scale {
        Ok(Some(SolitonCertificate {
            c,
            d_block,
            residual,
            expanding: c < 0.0,
        }))
    } else {
        Ok(None)
    }
}

/// Shape criterion for Chern-Ricci solitons: 𝔥 block a positive multiple of
/// the identity, no mixed block; the 𝔍 block is free.  Agrees with
/// [`detect_algebraic_soliton`] applied to ρ_C.
pub fn classify_chern_ricci_soliton(g: &HermitianMetric, tol: f64) -> bool {
    let (r, n) = (g.n_h(), g.n10());
    let m = g.matrix();
    let lead = m[(0, 0)].re;
    for a in 0..r {
        for b in 0..r {
            if a == b {
                if (m[(a, a)] - C64::from_re(lead)).norm() > tol {
                    return false;
                }
            } else if m[(a, b)].norm() > tol {
                return false;
            }
        }
        for w in r..n {
            if m[(a, w)].norm() > tol {
                return false;
            }
        }
    }
    true
}

/// Report of the three equivalent soliton tests for the Chern-Ricci flow:
/// the affine-derivation test P = cI + D, the spectral test (eigenvalues in
/// {0, c} with c ≠ 0, kernel an abelian ideal, orthogonal complement a
/// subalgebra) and the direct solve of the soliton equation.
#[derive(Debug, Clone, Serialize)]
pub struct SolitonCriteria {
    /// P vanishes, which the equivalence excludes by hypothesis.
    pub degenerate: bool,
    pub affine_derivation: bool,
    pub spectral: bool,
    pub detected: bool,
    pub spectrum: Vec<f64>,
    pub c: Option<f64>,
}

impl SolitonCriteria {
    /// Whether the three routes agree (vacuously true when degenerate).
    pub fn consistent(&self) -> bool {
        self.degenerate
            || (self.affine_derivation == self.spectral && self.spectral == self.detected)
    }
}

pub fn chern_ricci_soliton_criteria(
    sc: &StructureConstants<C64>,
    g: &HermitianMetric,
    rho: &GradedForm<C64>,
) -> Result<SolitonCriteria> {
    let n = sc.n10();
    let p = ricci_endomorphism(rho, g)?;
    let pmax = p.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let spectrum = ricci_endomorphism_spectrum(rho, g)?;
    if pmax <= SOLITON_TOL {
        return Ok(SolitonCriteria {
            degenerate: true,
            affine_derivation: false,
            spectral: false,
            detected: detect_algebraic_soliton(sc, g, rho)?.is_some(),
            spectrum,
            c: None,
        });
    }

    // P = cI + D over the J-commuting derivation basis
    let basis = derivation_space(sc, true);
    let blocks: Vec<DMatrix<C64>> = basis.iter().map(|d| d.holomorphic_block()).collect();
    let rows = 2 * n * n;
    let mut a = DMatrix::<f64>::zeros(rows, 1 + blocks.len());
    for (i, v) in vectorize(&DMatrix::<C64>::identity(n, n))
        .iter()
        .enumerate()
    {
        a[(i, 0)] = *v;
    }
    for (j, e) in blocks.iter().enumerate() {
        for (i, v) in vectorize(e).iter().enumerate() {
            a[(i, j + 1)] = *v;
        }
    }
    let b = DVector::from_vec(vectorize(&p));
    let svd = a.svd(true, true);
    let x = svd.solve(&b, RANK_TOL).map_err(|_| Error::SingularMetric)?;
    let mut fit = DMatrix::<C64>::identity(n, n) * C64::from_re(x[0]);
    for (j, e) in blocks.iter().enumerate() {
        fit += e * C64::from_re(x[j + 1]);
    }
    let affine_residual = (&p - fit).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let affine_derivation = affine_residual <= SOLITON_TOL * (1.0 + pmax);

    // spectral route
    let scale = spectrum.iter().map(|e| e.abs()).fold(0.0, f64::max);
    let eig_tol = SOLITON_TOL * (1.0 + scale);
    let nonzero: Vec<f64> = spectrum
        .iter()
        .copied()
        .filter(|e| e.abs() > eig_tol)
        .collect();
    let mut spectral = !nonzero.is_empty();
    let mut c_spec = None;
    if spectral {
        let c = nonzero[0];
        spectral = nonzero.iter().all(|e| (e - c).abs() <= eig_tol);
        if spectral {
            c_spec = Some(c);
            spectral = kernel_is_abelian_ideal_with_subalgebra_complement(sc, g, &p)?;
        }
    }

    let detected = detect_algebraic_soliton(sc, g, rho)?.is_some();
    Ok(SolitonCriteria {
        degenerate: false,
        affine_derivation,
        spectral,
        detected,
        spectrum,
        c: c_spec,
    })
}

/// Kernel basis of a complex matrix from its SVD.
fn complex_kernel(m: &DMatrix<C64>) -> Vec<Vec<C64>> {
    let n = m.ncols();
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = RANK_TOL * smax.max(1.0);
    let mut out = Vec::new();
    for (i, &sigma) in svd.singular_values.iter().enumerate() {
        if sigma <= cutoff {
            out.push((0..n).map(|j| v_t[(i, j)].conj()).collect());
        }
    }
    out
}

/// Orthonormal full-frame basis of span{v, v̄ : v in the list}, for
/// projections.
fn real_span(vectors: &[Vec<C64>], n: usize) -> DMatrix<C64> {
    let dim = 2 * n;
    let mut cols: Vec<Vec<C64>> = Vec::new();
    for v in vectors {
        let mut a = vec![C64::from_re(0.0); dim];
        let mut b = vec![C64::from_re(0.0); dim];
        for (i, x) in v.iter().enumerate() {
            a[i] = *x;
            b[n + i] = x.conj();
        }
        cols.push(a);
        cols.push(b);
    }
    let m = DMatrix::<C64>::from_fn(dim, cols.len(), |i, j| cols[j][i]);
    let qr = m.qr();
    let q = qr.q();
    let r = qr.r();
    let mut keep = Vec::new();
    for j in 0..r.nrows().min(r.ncols()) {
        if r[(j, j)].norm() > 1e-10 {
            keep.push(j);
        }
    }
    DMatrix::<C64>::from_fn(dim, keep.len(), |i, j| q[(i, keep[j])])
}

fn distance_to_span(span: &DMatrix<C64>, v: &[C64]) -> f64 {
    let x = DVector::<C64>::from_column_slice(v);
    let proj = span * (span.adjoint() * &x);
    (x - proj).norm()
}

fn kernel_is_abelian_ideal_with_subalgebra_complement(
    sc: &StructureConstants<C64>,
    g: &HermitianMetric,
    p: &DMatrix<C64>,
) -> Result<bool> {
    let n = sc.n10();
    let dim = sc.dim();
    let kernel = complex_kernel(p);
    if kernel.is_empty() {
        return Ok(true);
    }
    let kspan = real_span(&kernel, n);
    let to_full = |v: &[C64]| {
        let mut full = vec![C64::from_re(0.0); dim];
        full[..n].copy_from_slice(v);
        full
    };
    let conj_full = |v: &[C64]| {
        let mut full = vec![C64::from_re(0.0); dim];
        for (i, x) in v.iter().enumerate() {
            full[n + i] = x.conj();
        }
        full
    };
    let mut kernel_vectors: Vec<Vec<C64>> = Vec::new();
    for v in &kernel {
        kernel_vectors.push(to_full(v));
        kernel_vectors.push(conj_full(v));
    }

    let tol = 1e-8;
    for x in &kernel_vectors {
        for y in &kernel_vectors {
            let br = sc.bracket(x, y)?;
            if br.iter().map(|z| z.norm()).fold(0.0, f64::max) > tol {
                return Ok(false);
            }
        }
    }
    for alpha in 0..dim {
        let mut e = vec![C64::from_re(0.0); dim];
        e[alpha] = C64::from_re(1.0);
        for y in &kernel_vectors {
            let br = sc.bracket(&e, y)?;
            if br.iter().map(|z| z.norm()).fold(0.0, f64::max) > tol
                && distance_to_span(&kspan, &br) > tol
            {
                return Ok(false);
            }
        }
    }
    // orthogonal complement (w.r.t. g) of the kernel inside the (1,0) part
    let k = kernel.len();
    let mut constraints = DMatrix::<C64>::zeros(k, n);
    for (row, v) in kernel.iter().enumerate() {
        // ⟨u, v⟩ = uᵀ G conj(v)
        let gv = g.matrix() * DVector::<C64>::from_iterator(n, v.iter().map(|z| z.conj()));
        for j in 0..n {
            constraints[(row, j)] = gv[j];
        }
    }
    let complement = complex_kernel(&constraints);
    if complement.is_empty() {
        return Ok(true);
    }
    let cspan = real_span(&complement, n);
    let mut complement_vectors: Vec<Vec<C64>> = Vec::new();
    for v in &complement {
        complement_vectors.push(to_full(v));
        complement_vectors.push(conj_full(v));
    }
    for x in &complement_vectors {
        for y in &complement_vectors {
            let br = sc.bracket(x, y)?;
            if br.iter().map(|z| z.norm()).fold(0.0, f64::max) > tol
                && distance_to_span(&cspan, &br) > tol
            {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
