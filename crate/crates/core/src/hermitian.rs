//! Hermitian metrics on the adapted frame and their Chern-Ricci and
//! Bismut-Ricci forms.
//!
//! A metric is the coefficient matrix g_{a b̄} = −√−1 ω(e_a, ē_b) over the
//! (1,0) frame (Z's first, then W's), equivalently ω = √−1 Σ g_{a b̄}
//! α^a ∧ ᾱ^b.  Curvature forms are evaluated from their algebraic
//! expressions:
//!
//! * ρ_C(X,Y) = −Σ_a ( ω([[X,Y]^{0,1},X_a],X̄_a) + ω([[X,Y]^{1,0},X̄_a],X_a) )
//!   over a unitary frame {X_a}, obtained from the lower-triangular
//!   factorization of g; the result does not depend on the metric on a Lie
//!   group, which the tests exercise.
//! * ρ_B(X,Y) = −Σ_{a,b} ( g^{a b̄} ω([[X,Y]^{1,0},X_a],X̄_b)
//!   + g^{ā b} ω([[X,Y]^{0,1},X̄_a],X_b) )
//!   + √−1 Σ_{a,b} g^{a b̄} ω([X,Y],J[X_a,X̄_b]) in the given frame.
//!
//! The split normal form (diagonal blocks plus mixed terms on the
//! off-diagonal-free columns) additionally has a closed-form expression for
//! ρ_B^{1,1}, kept in algebraic agreement with the direct evaluation by the
//! test suite.

use crate::exterior::{ce_differential, del_delbar, GradedForm};
use crate::lie::StructureConstants;
use crate::linalg::{self, Mat};
use crate::ot::OTParams;
use crate::scalar::{Scalar, C64};
use crate::{Error, Result};
use nalgebra::DMatrix;

const HERMITIAN_TOL: f64 = 1e-9;

/// Positive-definite Hermitian coefficient matrix on the (1,0) frame.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMetric {
    n_h: usize,
    n_i: usize,
    g: DMatrix<C64>,
}

impl HermitianMetric {
    pub fn new(n_h: usize, n_i: usize, g: DMatrix<C64>) -> Result<Self> {
        let n = n_h + n_i;
        if g.nrows() != n || g.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: g.nrows().max(g.ncols()),
            });
        }
        let defect = linalg::hermitian_defect(&linalg::from_nalgebra(&g));
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        // complex Cholesky happily takes sqrt of negative pivots, so test
        // positivity through the Hermitian spectrum
        let g = hermitize(&g);
        let min_eig = g
            .symmetric_eigenvalues()
            .iter()
            .fold(f64::INFINITY, |acc, &e| acc.min(e));
        if min_eig <= 0.0 || min_eig.is_nan() {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(HermitianMetric { n_h, n_i, g })
    }

    pub fn identity(n_h: usize, n_i: usize) -> Self {
        let n = n_h + n_i;
        HermitianMetric {
            n_h,
            n_i,
            g: DMatrix::identity(n, n),
        }
    }

    pub fn n_h(&self) -> usize {
        self.n_h
    }

    pub fn n_i(&self) -> usize {
        self.n_i
    }

    pub fn n10(&self) -> usize {
        self.n_h + self.n_i
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.g
    }

    pub fn rows(&self) -> Mat<C64> {
        linalg::from_nalgebra(&self.g)
    }

    pub fn scaled(&self, t: f64) -> Self {
        HermitianMetric {
            n_h: self.n_h,
            n_i: self.n_i,
            g: &self.g * C64::from_re(t),
        }
    }

    /// Lower-triangular L with g = L L^H and positive diagonal.
    pub fn cholesky_l(&self) -> DMatrix<C64> {
        self.g
            .clone()
            .cholesky()
            .expect("validated positive definite")
            .l()
    }

    /// ω = √−1 Σ g_{a b̄} α^a ∧ ᾱ^b as a graded form.
    pub fn fundamental_form(&self) -> GradedForm<C64> {
        fundamental_form(self.n_h, self.n_i, &self.rows())
    }
}

fn hermitize(g: &DMatrix<C64>) -> DMatrix<C64> {
    (g + g.adjoint()) * C64::from_re(0.5)
}

/// Degenerate limit matrices such as ω∞; deliberately a separate type so
/// they can never reach the curvature operations, which need g⁻¹.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitForm {
    n_h: usize,
    n_i: usize,
    m: DMatrix<C64>,
}

impl LimitForm {
    /// ω∞: (1/4)·identity on the 𝔥 block, zero elsewhere.
    pub fn omega_infinity(n_h: usize, n_i: usize) -> Self {
        let n = n_h + n_i;
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n_h {
            m[(i, i)] = C64::from_re(0.25);
        }
        LimitForm { n_h, n_i, m }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn scaled(&self, t: f64) -> Self {
        LimitForm {
            n_h: self.n_h,
            n_i: self.n_i,
            m: &self.m * C64::from_re(t),
        }
    }

    /// Adds the 𝔍⊕𝔍 block of a metric; the Cheeger-Gromov limits are of
    /// this shape.
    pub fn plus_ideal_block(&self, g: &HermitianMetric) -> Self {
        let mut m = self.m.clone();
        let n = self.n_h + self.n_i;
        for a in self.n_h..n {
            for b in self.n_h..n {
                m[(a, b)] += g.matrix()[(a, b)];
            }
        }
        LimitForm {
            n_h: self.n_h,
            n_i: self.n_i,
            m,
        }
    }
}

/// Split normal-form metric: diagonal 𝔥 block A_i, diagonal 𝔍 block B_i and
/// mixed entries C at positions (p, s+p); every left-invariant pluriclosed
/// metric takes this shape.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalFormMetric {
    a: Vec<f64>,
    b: Vec<f64>,
    mixed: Vec<(usize, C64)>,
}

impl NormalFormMetric {
    pub fn new(a: Vec<f64>, b: Vec<f64>, mixed: Vec<(usize, C64)>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.len(),
                got: b.len(),
            });
        }
        if a.iter().chain(b.iter()).any(|&x| x <= 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        let mut seen = std::collections::BTreeSet::new();
        for &(p, c) in &mixed {
            if p >= a.len() {
                return Err(Error::NotNormalForm(format!(
                    "mixed index {p} out of range for s = {}",
                    a.len()
                )));
            }
            if !seen.insert(p) {
                return Err(Error::NotNormalForm(format!("duplicate mixed index {p}")));
            }
            if a[p] * b[p] - c.norm_sqr() <= 0.0 {
                return Err(Error::NotPositiveDefinite);
            }
        }
        let mut mixed = mixed;
        mixed.sort_by_key(|&(p, _)| p);
        Ok(NormalFormMetric { a, b, mixed })
    }

    pub fn diagonal(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        Self::new(a, b, vec![])
    }

    pub fn s(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn mixed(&self) -> &[(usize, C64)] {
        &self.mixed
    }

    /// A_p B_p − |C_p|² at position p (C_p = 0 off the mixed set).
    pub fn gram(&self, p: usize) -> f64 {
        let c = self
            .mixed
            .iter()
            .find(|&&(q, _)| q == p)
            .map(|&(_, c)| c)
            .unwrap_or_else(|| C64::from_re(0.0));
        self.a[p] * self.b[p] - c.norm_sqr()
    }

    /// The mixed positions must sit inside the admissible set of the
    /// parameters for the closed forms to apply.
    pub fn check_admissible(&self, params: &OTParams) -> Result<()> {
        if params.s() != self.s() || params.r() != self.s() {
            return Err(Error::DimensionMismatch {
                expected: self.s(),
                got: params.s(),
            });
        }
        let admissible = params.admissible_mixed_indices()?;
        for &(p, _) in &self.mixed {
            if !admissible.contains(&p) {
                return Err(Error::NotNormalForm(format!(
                    "mixed entry at non-admissible index {}",
                    p + 1
                )));
            }
        }
        Ok(())
    }

    pub fn to_matrix(&self) -> DMatrix<C64> {
        let s = self.s();
        let mut g = DMatrix::zeros(2 * s, 2 * s);
        for i in 0..s {
            g[(i, i)] = C64::from_re(self.a[i]);
            g[(s + i, s + i)] = C64::from_re(self.b[i]);
        }
        for &(p, c) in &self.mixed {
            g[(p, s + p)] = c;
            g[(s + p, p)] = c.conj();
        }
        g
    }

    pub fn to_metric(&self) -> Result<HermitianMetric> {
        HermitianMetric::new(self.s(), self.s(), self.to_matrix())
    }
}

/// Basis vector of the full 2n frame.
fn basis<S: Scalar>(dim: usize, idx: usize) -> Vec<S> {
    let mut v = vec![S::zero(); dim];
    v[idx] = S::one();
    v
}

/// ω(u, v) for full-frame coefficient vectors, with
/// ω(e_a, ē_b) = √−1 g_{a b̄} and zero on pairs of equal bidegree.
fn form_eval<S: Scalar>(g: &Mat<S>, n: usize, u: &[S], v: &[S]) -> S {
    let mut acc = S::zero();
    for (a, row) in g.iter().enumerate() {
        for (b, gab) in row.iter().enumerate() {
            if gab.is_zero() {
                continue;
            }
            let t = u[a].clone() * v[n + b].clone() - v[a].clone() * u[n + b].clone();
            if !t.is_zero() {
                acc = acc + gab.clone() * t;
            }
        }
    }
    S::i() * acc
}

/// ω = √−1 Σ g_{a b̄} α^a ∧ ᾱ^b over an arbitrary coefficient matrix.
pub fn fundamental_form<S: Scalar>(n_h: usize, n_i: usize, g: &Mat<S>) -> GradedForm<S> {
    let n = n_h + n_i;
    let mut omega = GradedForm::zero(n_h, n_i, 2);
    for (a, row) in g.iter().enumerate() {
        for (b, gab) in row.iter().enumerate() {
            if !gab.is_zero() {
                let term = GradedForm::coframe(n_h, n_i, a)
                    .wedge(&GradedForm::coframe(n_h, n_i, n + b))
                    .expect("same coframe")
                    .scaled(S::i() * gab.clone());
                omega = omega.add(&term).expect("degree 2");
            }
        }
    }
    omega
}

/// Reads the Hermitian coefficient matrix R of the (1,1) part of a 2-form,
/// so that form^{1,1} = √−1 Σ R_{a b̄} α^a ∧ ᾱ^b.
pub fn form_to_matrix(form: &GradedForm<C64>) -> DMatrix<C64> {
    let n = form.n10();
    DMatrix::from_fn(n, n, |a, b| -C64::i() * form.coefficient(&[a, n + b]))
}

/// Chern-Ricci form evaluated over the unitary frame of g.  On a Lie group
/// the result is independent of g; it is real, closed and of pure type
/// (1,1), all of which the tests assert rather than assume.
pub fn chern_ricci(sc: &StructureConstants<C64>, g: &HermitianMetric) -> Result<GradedForm<C64>> {
    let n = sc.n10();
    let dim = sc.dim();
    if g.n10() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: g.n10(),
        });
    }
    let l = g
        .matrix()
        .clone()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite)?
        .l();
    let linv = l
        .solve_lower_triangular(&DMatrix::<C64>::identity(n, n))
        .ok_or(Error::SingularMetric)?;
    // unitary frame X_a = Σ_b (L⁻¹)[a][b] e_b
    let frames: Vec<(Vec<C64>, Vec<C64>)> = (0..n)
        .map(|a| {
            let mut x = vec![C64::from_re(0.0); dim];
            let mut xbar = vec![C64::from_re(0.0); dim];
            for b in 0..n {
                x[b] = linv[(a, b)];
                xbar[n + b] = linv[(a, b)].conj();
            }
            (x, xbar)
        })
        .collect();
    let gm = g.rows();

    let mut rho = GradedForm::zero(sc.n_h(), sc.n_i(), 2);
    for alpha in 0..dim {
        for beta in (alpha + 1)..dim {
            let br = sc.bracket_basis(alpha, beta).to_vec();
            let (br10, br01) = sc.bidegree_parts(&br);
            let mut val = C64::from_re(0.0);
            for (x, xbar) in &frames {
                val -= form_eval(&gm, n, &sc.bracket(&br01, x)?, xbar);
                val -= form_eval(&gm, n, &sc.bracket(&br10, xbar)?, x);
            }
            if val.norm() > 0.0 {
                let term = GradedForm::coframe(sc.n_h(), sc.n_i(), alpha)
                    .wedge(&GradedForm::coframe(sc.n_h(), sc.n_i(), beta))?
                    .scaled(val);
                rho = rho.add(&term)?;
            }
        }
    }
    Ok(rho)
}

/// Full Bismut-Ricci 2-form in the given frame, over either scalar type.
/// `g` is the metric coefficient matrix; its inverse supplies g^{a b̄}.
pub fn bismut_ricci<S: Scalar>(sc: &StructureConstants<S>, g: &Mat<S>) -> Result<GradedForm<S>> {
    let n = sc.n10();
    let dim = sc.dim();
    if g.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: g.len(),
        });
    }
    let p = linalg::invert(g)?; // g^{ā b} = p[a][b], g^{a b̄} = p[b][a]

    // J[X_a, X̄_b] precomputed per frame pair
    let mut jbr: Vec<Vec<Option<Vec<S>>>> = vec![vec![None; n]; n];
    for a in 0..n {
        for (b, slot) in jbr[a].iter_mut().enumerate() {
            let br = sc.bracket_basis(a, n + b);
            if br.iter().any(|c| !c.is_zero()) {
                *slot = Some(sc.apply_j(br));
            }
        }
    }

    let mut rho = GradedForm::zero(sc.n_h(), sc.n_i(), 2);
    for alpha in 0..dim {
        for beta in (alpha + 1)..dim {
            let br = sc.bracket_basis(alpha, beta).to_vec();
            let (br10, br01) = sc.bidegree_parts(&br);
            let mut val = S::zero();
            for a in 0..n {
                let ea = basis::<S>(dim, a);
                let ea_bar = basis::<S>(dim, n + a);
                for b in 0..n {
                    let g_up_ab = p[b][a].clone(); // g^{a b̄}
                    if !g_up_ab.is_zero() {
                        let t = form_eval(g, n, &sc.bracket(&br10, &ea)?, &basis(dim, n + b));
                        val = val - g_up_ab.clone() * t;
                        if let Some(j) = &jbr[a][b] {
                            let t = form_eval(g, n, &br, j);
                            val = val + S::i() * g_up_ab * t;
                        }
                    }
                    let g_up_ba = p[a][b].clone(); // g^{ā b}
                    if !g_up_ba.is_zero() {
                        let t = form_eval(g, n, &sc.bracket(&br01, &ea_bar)?, &basis(dim, b));
                        val = val - g_up_ba * t;
                    }
                }
            }
            if !val.is_zero() {
                let term = GradedForm::coframe(sc.n_h(), sc.n_i(), alpha)
                    .wedge(&GradedForm::coframe(sc.n_h(), sc.n_i(), beta))?
                    .scaled(val);
                rho = rho.add(&term)?;
            }
        }
    }
    Ok(rho)
}

/// The (1,1) part of the Bismut-Ricci form; real as a (1,1) form.
pub fn bismut_ricci_11(
    sc: &StructureConstants<C64>,
    g: &HermitianMetric,
) -> Result<GradedForm<C64>> {
    Ok(bismut_ricci(sc, &g.rows())?.projection(1, 1))
}

/// Same, as the Hermitian coefficient matrix.
pub fn bismut_ricci_11_matrix(
    sc: &StructureConstants<C64>,
    g: &HermitianMetric,
) -> Result<DMatrix<C64>> {
    let r = form_to_matrix(&bismut_ricci_11(sc, g)?);
    Ok(hermitize(&r))
}

/// Closed-form ρ_B^{1,1} for an admissible algebra and a split normal-form
/// metric:
///
/// ```text
/// ρ_B^{1,1} = −√−1 Σ_p (3/4)(1 + |C_p|²/u_p) ω^p∧ω̄^p               (mixed p)
///           − √−1 Σ_i (3/4) ω^i∧ω̄^i                                (other i)
///           − √−1 Σ_p (−3/16 − c_pp²/4 − √−1 c_pp/4)(B_p C_p/u_p) ω^p∧γ̄^p
///           + conjugates
/// ```
///
/// with u_p = A_p B_p − |C_p|².  The conjugate mixed coefficient is pinned
/// by the reality of ρ_B^{1,1}; the direct evaluation through
/// [`bismut_ricci`] serves as the independent oracle for the whole
/// expression.
pub fn bismut_ricci_closed_form<S: Scalar>(
    params: &OTParams,
    metric: &NormalFormMetric,
) -> Result<GradedForm<S>> {
    metric.check_admissible(params)?;
    let s = metric.s();
    let n = 2 * s;
    let mut rho = GradedForm::zero(s, s, 2);
    let three_quarter_i = S::from_parts(0.0, 0.75);

    let term = |i: usize, j: usize, v: S| {
        GradedForm::coframe(s, s, i)
            .wedge(&GradedForm::coframe(s, s, j))
            .expect("same coframe")
            .scaled(v)
    };

    // every combination is formed in S so the exact instantiation stays a
    // true algebraic identity, not a rounded one
    let four = S::from_re(4.0);
    for i in 0..s {
        let a_s = S::from_re(metric.a()[i]);
        let b_s = S::from_re(metric.b()[i]);
        let c_entry = metric.mixed().iter().find(|&&(p, _)| p == i);
        let coeff = match c_entry {
            None => -three_quarter_i.clone(),
            Some(&(_, c)) => {
                let c_s = S::from_parts(c.re, c.im);
                let csq = c_s.clone() * c_s.conj();
                let u = a_s.clone() * b_s.clone() - csq.clone();
                -(three_quarter_i.clone() * (S::one() + csq / u))
            }
        };
        rho = rho.add(&term(i, n + i, coeff))?;

        if let Some(&(_, c)) = c_entry {
            let cpp = S::from_re(params.c()[i][i]);
            let c_s = S::from_parts(c.re, c.im);
            let u = a_s * b_s.clone() - c_s.clone() * c_s.conj();
            let factor = -(S::from_re(3.0 / 16.0)
                + cpp.clone() * cpp.clone() / four.clone()
                + S::i() * cpp / four.clone());
            let mixed = -(S::i() * factor) * b_s * c_s / u;
            rho = rho.add(&term(i, n + s + i, mixed.clone()))?;
            // reality: the γ^p∧ω̄^p coefficient is −conj of the ω^p∧γ̄^p one
            rho = rho.add(&term(s + i, n + i, -mixed.conj()))?;
        }
    }
    Ok(rho)
}

/// Endomorphism P_a^b = ρ_{a k̄} g^{k̄ b} associated to a (1,1) form.
pub fn ricci_endomorphism(rho: &GradedForm<C64>, g: &HermitianMetric) -> Result<DMatrix<C64>> {
    let n = g.n10();
    if rho.n10() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: rho.n10(),
        });
    }
    let r = form_to_matrix(rho);
    let ginv = g
        .matrix()
        .clone()
        .try_inverse()
        .ok_or(Error::SingularMetric)?;
    Ok(r * ginv)
}

/// Real spectrum of the Ricci endomorphism: R G⁻¹ is similar to the
/// Hermitian matrix L⁻¹ R L⁻ᴴ, so its eigenvalues are real.
pub fn ricci_endomorphism_spectrum(rho: &GradedForm<C64>, g: &HermitianMetric) -> Result<Vec<f64>> {
    let n = g.n10();
    let r = hermitize(&form_to_matrix(rho));
    let l = g.cholesky_l();
    let id = DMatrix::<C64>::identity(n, n);
    let linv = l.solve_lower_triangular(&id).ok_or(Error::SingularMetric)?;
    let herm = hermitize(&(&linv * r * linv.adjoint()));
    let mut eigs: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(eigs)
}

/// Brute-force pluriclosed test: ∂∂̄ω = 0 to tolerance (exactly, over the
/// exact scalar type).
pub fn is_pluriclosed<S: Scalar>(sc: &StructureConstants<S>, g: &Mat<S>, tol: f64) -> Result<bool> {
    let omega = fundamental_form(sc.n_h(), sc.n_i(), g);
    Ok(del_delbar(&omega, sc)?.is_zero_tol(tol))
}

/// Shape-based pluriclosed classifier: 𝔥-block off-diagonal entries must be
/// purely imaginary, the 𝔍 block diagonal, and mixed entries confined to
/// admissible diagonal positions.
///
/// The 𝔥 condition is weaker than requiring a diagonal block: the ∂∂̄
/// contributions of ω^p∧ω̄^q and ω^q∧ω̄^p coincide, so the skew-imaginary
/// combinations cancel identically (the exact-arithmetic oracle confirms
/// this), while any real part obstructs.
pub fn classify_pluriclosed_shape(params: &OTParams, g: &DMatrix<C64>, tol: f64) -> Result<bool> {
    let s = params.s();
    if params.r() != s || g.nrows() != 2 * s {
        return Err(Error::DimensionMismatch {
            expected: 2 * s,
            got: g.nrows(),
        });
    }
    let admissible = params.admissible_mixed_indices()?;
    for a in 0..s {
        for b in 0..s {
            if a != b && (g[(a, b)].re.abs() > tol || g[(s + a, s + b)].norm() > tol) {
                return Ok(false);
            }
            let mixed_ok = a == b && admissible.contains(&a);
            if !mixed_ok && g[(a, s + b)].norm() > tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Closedness defect d(ρ) of a curvature form.
pub fn closedness_defect(rho: &GradedForm<C64>, sc: &StructureConstants<C64>) -> Result<f64> {
    Ok(ce_differential(rho, sc)?.max_abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::CExact;
    use crate::DEFAULT_TOL;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn admissible_params(s: usize, c: Vec<Vec<f64>>) -> OTParams {
        let b = (0..s)
            .map(|i| (0..s).map(|j| if i == j { -1.0 } else { 0.0 }).collect())
            .collect();
        OTParams::new(s, s, b, c).unwrap()
    }

    fn random_posdef(n: usize, rng: &mut StdRng) -> DMatrix<C64> {
        let a = DMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        &a * a.adjoint() + DMatrix::identity(n, n) * C64::from_re(0.5)
    }

    #[test]
    fn chern_ricci_of_canonical_metric_is_minus_omega_infinity() {
        let p = OTParams::new(
            2,
            1,
            vec![vec![-1.0], vec![-1.0]],
            vec![vec![0.7], vec![-0.3]],
        )
        .unwrap();
        let sc = p.build_algebra();
        let g = HermitianMetric::identity(2, 1);
        let rho = chern_ricci(&sc, &g).unwrap();
        assert!(rho.is_pure(1, 1));
        assert!(rho.reality_defect() < 1e-12);
        let r = form_to_matrix(&rho);
        let target = -LimitForm::omega_infinity(2, 1).matrix().clone();
        assert!((r - target).norm() < 1e-12);
    }

    #[test]
    fn chern_ricci_does_not_depend_on_the_metric() {
        let p = admissible_params(2, vec![vec![0.4, 0.0], vec![0.0, -0.9]]);
        let sc = p.build_algebra();
        let mut rng = StdRng::seed_from_u64(7);
        let reference = chern_ricci(&sc, &HermitianMetric::identity(2, 2)).unwrap();
        for _ in 0..5 {
            let g = HermitianMetric::new(2, 2, random_posdef(4, &mut rng)).unwrap();
            let rho = chern_ricci(&sc, &g).unwrap();
            assert!(rho.sub(&reference).unwrap().is_zero_tol(1e-10));
        }
        // and it is closed
        assert!(closedness_defect(&reference, &sc).unwrap() < 1e-12);
    }

    #[test]
    fn chern_ricci_of_abelian_algebra_vanishes() {
        let sc: StructureConstants<C64> = StructureConstants::zeros(1, 2);
        let rho = chern_ricci(&sc, &HermitianMetric::identity(1, 2)).unwrap();
        assert!(rho.is_empty());
    }

    #[test]
    fn bismut_ricci_of_diagonal_metric_is_three_quarters_on_h() {
        let p = admissible_params(2, vec![vec![0.8, 0.0], vec![0.3, -0.2]]);
        let sc = p.build_algebra();
        let g = NormalFormMetric::diagonal(vec![1.3, 0.7], vec![2.0, 0.4])
            .unwrap()
            .to_metric()
            .unwrap();
        let rho = bismut_ricci_11(&sc, &g).unwrap();
        let r = form_to_matrix(&rho);
        for i in 0..2 {
            assert!((r[(i, i)] - C64::from_re(-0.75)).norm() < 1e-12);
        }
        for a in 0..4 {
            for b in 0..4 {
                if a != b || a >= 2 {
                    assert!(r[(a, b)].norm() < 1e-12, "({a},{b}) = {}", r[(a, b)]);
                }
            }
        }
    }

    #[test]
    fn bismut_ricci_with_half_gram_mixed_term() {
        // A = B = 1, |C|² = 1/2 at an admissible index: the h-diagonal entry
        // doubles to −(3/2)√−1.
        let p = admissible_params(1, vec![vec![0.0]]);
        let sc = p.build_algebra();
        let c = C64::from_re(0.5f64.sqrt());
        let metric = NormalFormMetric::new(vec![1.0], vec![1.0], vec![(0, c)]).unwrap();
        let g = metric.to_metric().unwrap();
        let rho = bismut_ricci_11(&sc, &g).unwrap();
        let r = form_to_matrix(&rho);
        assert!((r[(0, 0)] - C64::from_re(-1.5)).norm() < 1e-12);
        // mixed coefficient: (3√2/16)√−1 on ω¹∧γ̄¹ when c_pp = 0
        let coeff = rho.coefficient(&[0, 3]);
        let expect = C64::new(0.0, 3.0 * 2.0f64.sqrt() / 16.0);
        assert!((coeff - expect).norm() < 1e-12, "{coeff} vs {expect}");
        // closed-form route agrees
        let closed = bismut_ricci_closed_form::<C64>(&p, &metric).unwrap();
        assert!(closed.sub(&rho).unwrap().is_zero_tol(1e-12));
    }

    #[test]
    fn closed_form_matches_direct_evaluation_with_nonzero_cpp() {
        let p = admissible_params(2, vec![vec![1.4, 0.0], vec![0.0, -0.6]]);
        let sc = p.build_algebra();
        let metric = NormalFormMetric::new(
            vec![2.0, 1.0],
            vec![1.5, 3.0],
            vec![(0, C64::new(0.5, -0.75)), (1, C64::new(-0.25, 0.5))],
        )
        .unwrap();
        let direct = bismut_ricci_11(&sc, &metric.to_metric().unwrap()).unwrap();
        let closed = bismut_ricci_closed_form::<C64>(&p, &metric).unwrap();
        assert!(direct.sub(&closed).unwrap().is_zero_tol(1e-12));
        assert!(direct.reality_defect() < 1e-12);
    }

    #[test]
    fn closed_form_is_exact_over_gaussian_rationals() {
        // values whose f64 squares/products round, so any float shortcut in
        // the closed form would break exact equality
        let p = admissible_params(2, vec![vec![0.3, 0.0], vec![0.9, 0.7]]);
        let sc: StructureConstants<CExact> = p.build_algebra();
        let metric = NormalFormMetric::new(
            vec![1.1, 2.3],
            vec![0.7, 1.9],
            vec![(1, C64::new(0.4, 0.3))],
        )
        .unwrap();
        let g = linalg::convert::<CExact>(&linalg::from_nalgebra(&metric.to_matrix()));
        let direct = bismut_ricci(&sc, &g).unwrap().projection(1, 1);
        let closed = bismut_ricci_closed_form::<CExact>(&p, &metric).unwrap();
        assert_eq!(direct, closed);
    }

    #[test]
    fn mixed_term_vanishes_when_c_is_zero() {
        let p = admissible_params(1, vec![vec![2.0]]);
        let metric = NormalFormMetric::diagonal(vec![3.0], vec![0.5]).unwrap();
        let rho = bismut_ricci_closed_form::<C64>(&p, &metric).unwrap();
        assert!(rho.coefficient(&[0, 3]).norm() == 0.0);
        assert!((rho.coefficient(&[0, 2]) - C64::new(0.0, -0.75)).norm() < 1e-15);
    }

    #[test]
    fn normal_form_constructor_rejects_degenerate_gram() {
        assert!(matches!(
            NormalFormMetric::new(vec![1.0], vec![1.0], vec![(0, C64::from_re(1.0))]),
            Err(Error::NotPositiveDefinite)
        ));
        assert!(NormalFormMetric::new(vec![1.0], vec![1.0], vec![(1, C64::from_re(0.1))]).is_err());
    }

    #[test]
    fn closed_form_rejects_non_admissible_mixed_position() {
        let p = admissible_params(2, vec![vec![0.0, 1.0], vec![0.0, 0.0]]);
        // column 2 has c_{12} = 1 ≠ 0, so index 1 is not admissible
        let metric =
            NormalFormMetric::new(vec![1.0, 1.0], vec![1.0, 1.0], vec![(1, C64::from_re(0.3))])
                .unwrap();
        assert!(matches!(
            bismut_ricci_closed_form::<C64>(&p, &metric),
            Err(Error::NotNormalForm(_))
        ));
    }

    #[test]
    fn ricci_endomorphism_spectrum_of_crs_metric() {
        let p = OTParams::new(
            2,
            1,
            vec![vec![-1.0], vec![-1.0]],
            vec![vec![0.2], vec![0.9]],
        )
        .unwrap();
        let sc = p.build_algebra();
        let a = 2.0;
        let mut gm = DMatrix::<C64>::identity(3, 3);
        gm[(0, 0)] = C64::from_re(a);
        gm[(1, 1)] = C64::from_re(a);
        gm[(2, 2)] = C64::from_re(5.0); // arbitrary positive ideal block
        let g = HermitianMetric::new(2, 1, gm).unwrap();
        let rho = chern_ricci(&sc, &g).unwrap();
        let eigs = ricci_endomorphism_spectrum(&rho, &g).unwrap();
        assert_eq!(eigs.len(), 3);
        assert!((eigs[0] + 1.0 / (4.0 * a)).abs() < 1e-12);
        assert!((eigs[1] + 1.0 / (4.0 * a)).abs() < 1e-12);
        assert!(eigs[2].abs() < 1e-12);
        // P itself: −1/(4A) on h, 0 on the ideal
        let pm = ricci_endomorphism(&rho, &g).unwrap();
        assert!((pm[(0, 0)] - C64::from_re(-1.0 / (4.0 * a))).norm() < 1e-12);
        assert!(pm[(2, 2)].norm() < 1e-12);
    }

    #[test]
    fn endomorphism_of_diagonal_pluriclosed_curvature() {
        // P = -3/(4A) diag(Id_h, 0) for diagonal metrics with equal A
        let p = admissible_params(2, vec![vec![0.2, 0.0], vec![0.0, -0.5]]);
        let sc = p.build_algebra();
        let a = 2.5;
        let g = NormalFormMetric::diagonal(vec![a, a], vec![0.9, 1.4])
            .unwrap()
            .to_metric()
            .unwrap();
        let rho = bismut_ricci_11(&sc, &g).unwrap();
        let pm = ricci_endomorphism(&rho, &g).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j && i < 2 {
                    C64::from_re(-3.0 / (4.0 * a))
                } else {
                    C64::from_re(0.0)
                };
                assert!((pm[(i, j)] - expect).norm() < 1e-12, "P[{i}][{j}]");
            }
        }
    }

    #[test]
    fn zero_form_gives_zero_endomorphism() {
        let g = HermitianMetric::identity(1, 1);
        let rho = GradedForm::zero(1, 1, 2);
        let p = ricci_endomorphism(&rho, &g).unwrap();
        assert!(p.norm() == 0.0);
    }

    #[test]
    fn pluriclosed_oracle_and_shape_classifier_agree() {
        let p = admissible_params(2, vec![vec![0.3, 0.0], vec![0.0, 1.1]]);
        let sc = p.build_algebra::<C64>();
        let good = NormalFormMetric::new(
            vec![1.0, 2.0],
            vec![1.0, 1.0],
            vec![(1, C64::new(0.2, 0.4))],
        )
        .unwrap()
        .to_matrix();
        assert!(is_pluriclosed(&sc, &linalg::from_nalgebra(&good), DEFAULT_TOL).unwrap());
        assert!(classify_pluriclosed_shape(&p, &good, DEFAULT_TOL).unwrap());

        // a real off-diagonal h entry breaks both
        let mut bad = good.clone();
        bad[(0, 1)] = C64::from_re(0.05);
        bad[(1, 0)] = C64::from_re(0.05);
        assert!(!is_pluriclosed(&sc, &linalg::from_nalgebra(&bad), DEFAULT_TOL).unwrap());
        assert!(!classify_pluriclosed_shape(&p, &bad, DEFAULT_TOL).unwrap());

        // a purely imaginary one cancels in ∂∂̄ and both classify it as
        // pluriclosed
        let mut skew = good.clone();
        skew[(0, 1)] = C64::new(0.0, 0.05);
        skew[(1, 0)] = C64::new(0.0, -0.05);
        assert!(is_pluriclosed(&sc, &linalg::from_nalgebra(&skew), DEFAULT_TOL).unwrap());
        assert!(classify_pluriclosed_shape(&p, &skew, DEFAULT_TOL).unwrap());

        // imaginary off-diagonal entries in the ideal block do not cancel
        let mut badj = good.clone();
        badj[(2, 3)] = C64::new(0.0, 0.05);
        badj[(3, 2)] = C64::new(0.0, -0.05);
        assert!(!is_pluriclosed(&sc, &linalg::from_nalgebra(&badj), DEFAULT_TOL).unwrap());
        assert!(!classify_pluriclosed_shape(&p, &badj, DEFAULT_TOL).unwrap());
    }

    #[test]
    fn degenerate_limit_form_is_not_a_metric() {
        let omega = LimitForm::omega_infinity(1, 1);
        assert!(HermitianMetric::new(1, 1, omega.matrix().clone()).is_err());
    }

    #[test]
    fn non_positive_definite_matrix_is_rejected() {
        let mut m = DMatrix::<C64>::identity(2, 2);
        m[(1, 1)] = C64::from_re(-1.0);
        assert!(matches!(
            HermitianMetric::new(1, 1, m),
            Err(Error::NotPositiveDefinite)
        ));
        let mut m = DMatrix::<C64>::identity(2, 2);
        m[(0, 1)] = C64::from_re(0.5);
        assert!(matches!(
            HermitianMetric::new(1, 1, m),
            Err(Error::NotHermitian(_))
        ));
    }
}
