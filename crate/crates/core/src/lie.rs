//! Complexified Lie algebras with an adapted frame and the splitting
//! 𝔤 = 𝔥 ⊕ 𝔍.
//!
//! The frame is ordered (Z₁..Z_r, W₁..W_s, Z̄₁..Z̄_r, W̄₁..W̄_s); indices
//! 0..n with n = r + s are the (1,0) vectors, indices n..2n their
//! conjugates.  Every module of the crate indexes against this order, which
//! makes bidegree bookkeeping purely positional.  All values are immutable
//! after construction and every operation is a pure function.

use crate::scalar::Scalar;
use crate::{Error, Result};

/// Complexified structure constants c[a][b][k] with
/// [e_a, e_b] = Σ_k c[a][b][k] e_k over the full 2(r+s) frame.
#[derive(Debug, Clone)]
pub struct StructureConstants<S: Scalar> {
    n_h: usize,
    n_i: usize,
    /// Whether 𝔍 = span{W, W̄} is declared an abelian ideal; validation then
    /// checks it.
    ot_type: bool,
    c: Vec<Vec<Vec<S>>>,
}

/// Worst constraint violations found by [`StructureConstants::validate`],
/// with the offending index triples.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub max_antisymmetry: f64,
    pub worst_antisymmetry: Option<(usize, usize, usize)>,
    pub max_jacobi: f64,
    pub worst_jacobi: Option<(usize, usize, usize)>,
    pub max_conjugation: f64,
    pub worst_conjugation: Option<(usize, usize, usize)>,
    /// Defect of 𝔍 being an abelian ideal; only populated for OT-type
    /// algebras.
    pub max_ideal: f64,
}

impl ValidationReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_antisymmetry <= tol
            && self.max_jacobi <= tol
            && self.max_conjugation <= tol
            && self.max_ideal <= tol
    }

    pub fn max_defect(&self) -> f64 {
        self.max_antisymmetry
            .max(self.max_jacobi)
            .max(self.max_conjugation)
            .max(self.max_ideal)
    }
}

impl<S: Scalar> StructureConstants<S> {
    pub fn zeros(n_h: usize, n_i: usize) -> Self {
        let dim = 2 * (n_h + n_i);
        StructureConstants {
            n_h,
            n_i,
            ot_type: false,
            c: vec![vec![vec![S::zero(); dim]; dim]; dim],
        }
    }

    pub fn flag_ot_type(mut self) -> Self {
        self.ot_type = true;
        self
    }

    /// Count of (1,0) frame vectors spanning 𝔥^{1,0}.
    pub fn n_h(&self) -> usize {
        self.n_h
    }

    /// Count of (1,0) frame vectors spanning 𝔍^{1,0}.
    pub fn n_i(&self) -> usize {
        self.n_i
    }

    /// Complex dimension r + s of the (1,0) part.
    pub fn n10(&self) -> usize {
        self.n_h + self.n_i
    }

    /// Real dimension 2(r + s) of the full frame.
    pub fn dim(&self) -> usize {
        2 * self.n10()
    }

    pub fn is_ot_type(&self) -> bool {
        self.ot_type
    }

    pub fn conj_index(&self, a: usize) -> usize {
        (a + self.n10()) % self.dim()
    }

    /// Whether frame index `a` is a (1,0) vector.
    pub fn is_holomorphic(&self, a: usize) -> bool {
        a < self.n10()
    }

    /// Adds v to c[a][b][k] and -v to c[b][a][k].
    pub fn add_bracket_term(&mut self, a: usize, b: usize, k: usize, v: S) {
        self.c[a][b][k] = self.c[a][b][k].clone() + v.clone();
        self.c[b][a][k] = self.c[b][a][k].clone() - v;
    }

    pub fn coefficient(&self, a: usize, b: usize, k: usize) -> &S {
        &self.c[a][b][k]
    }

    /// Coefficients of [e_a, e_b] over the full frame.
    pub fn bracket_basis(&self, a: usize, b: usize) -> &[S] {
        &self.c[a][b]
    }

    /// Bilinear extension of the coefficient table.
    pub fn bracket(&self, x: &[S], y: &[S]) -> Result<Vec<S>> {
        let dim = self.dim();
        if x.len() != dim || y.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: x.len().max(y.len()),
            });
        }
        let mut out = vec![S::zero(); dim];
        for (a, xa) in x.iter().enumerate() {
            if xa.is_zero() {
                continue;
            }
            for (b, yb) in y.iter().enumerate() {
                if yb.is_zero() {
                    continue;
                }
                let f = xa.clone() * yb.clone();
                for (k, c) in self.c[a][b].iter().enumerate() {
                    if !c.is_zero() {
                        out[k] = out[k].clone() + f.clone() * c.clone();
                    }
                }
            }
        }
        Ok(out)
    }

    /// Componentwise conjugation of a frame vector: coefficients conjugate
    /// and move to the conjugate slot.
    pub fn conj_vector(&self, x: &[S]) -> Vec<S> {
        let dim = self.dim();
        let mut out = vec![S::zero(); dim];
        for (a, v) in x.iter().enumerate() {
            out[self.conj_index(a)] = v.conj();
        }
        out
    }

    /// Splits a full-frame vector into its (1,0) and (0,1) parts.
    pub fn bidegree_parts(&self, x: &[S]) -> (Vec<S>, Vec<S>) {
        let n = self.n10();
        let mut h = vec![S::zero(); self.dim()];
        let mut a = vec![S::zero(); self.dim()];
        for (idx, v) in x.iter().enumerate() {
            if idx < n {
                h[idx] = v.clone();
            } else {
                a[idx] = v.clone();
            }
        }
        (h, a)
    }

    /// The complex structure on the complexified frame: +√−1 on (1,0)
    /// vectors, −√−1 on their conjugates.
    pub fn apply_j(&self, x: &[S]) -> Vec<S> {
        let n = self.n10();
        x.iter()
            .enumerate()
            .map(|(idx, v)| {
                if idx < n {
                    S::i() * v.clone()
                } else {
                    -(S::i() * v.clone())
                }
            })
            .collect()
    }

    /// Checks antisymmetry, conjugation consistency, the Jacobi identity and
    /// (for OT-type algebras) that 𝔍 is an abelian ideal.
    pub fn validate(&self) -> ValidationReport {
        let dim = self.dim();
        let mut report = ValidationReport::default();

        for a in 0..dim {
            for b in 0..dim {
                for k in 0..dim {
                    let d = (self.c[a][b][k].clone() + self.c[b][a][k].clone()).abs_f64();
                    if d > report.max_antisymmetry {
                        report.max_antisymmetry = d;
                        report.worst_antisymmetry = Some((a, b, k));
                    }
                    let ca = self.conj_index(a);
                    let cb = self.conj_index(b);
                    let ck = self.conj_index(k);
                    let d = (self.c[ca][cb][ck].clone() - self.c[a][b][k].conj()).abs_f64();
                    if d > report.max_conjugation {
                        report.max_conjugation = d;
                        report.worst_conjugation = Some((a, b, k));
                    }
                }
            }
        }

        // Jacobi on basis triples: [[a,b],c] + [[b,c],a] + [[c,a],b] = 0.
        for a in 0..dim {
            for b in (a + 1)..dim {
                for cc in (b + 1)..dim {
                    let mut acc = vec![S::zero(); dim];
                    for &(x, y, z) in &[(a, b, cc), (b, cc, a), (cc, a, b)] {
                        for k in 0..dim {
                            let f = self.c[x][y][k].clone();
                            if f.is_zero() {
                                continue;
                            }
                            for m in 0..dim {
                                let c2 = self.c[k][z][m].clone();
                                if !c2.is_zero() {
                                    acc[m] = acc[m].clone() + f.clone() * c2;
                                }
                            }
                        }
                    }
                    for v in &acc {
                        let d = v.abs_f64();
                        if d > report.max_jacobi {
                            report.max_jacobi = d;
                            report.worst_jacobi = Some((a, b, cc));
                        }
                    }
                }
            }
        }

        if self.ot_type {
            report.max_ideal = self.ideal_defect();
        }
        report
    }

    /// Max coefficient of [𝔤, 𝔍] escaping span{W, W̄}, plus any nonzero
    /// bracket inside 𝔍.
    fn ideal_defect(&self) -> f64 {
        let n = self.n10();
        let dim = self.dim();
        let in_ideal = |k: usize| (self.n_h..n).contains(&k) || (n + self.n_h..dim).contains(&k);
        let mut worst: f64 = 0.0;
        for a in 0..dim {
            for b in 0..dim {
                if !in_ideal(b) {
                    continue;
                }
                for k in 0..dim {
                    let v = self.c[a][b][k].abs_f64();
                    if !in_ideal(k) {
                        worst = worst.max(v);
                    } else if in_ideal(a) {
                        // abelian: brackets of two ideal vectors vanish
                        worst = worst.max(v);
                    }
                }
            }
        }
        worst
    }

    /// Integrability of the complex structure: every bracket of two (1,0)
    /// frame vectors has (0,1) component of norm ≤ tol.
    pub fn check_integrability(&self, tol: f64) -> bool {
        let n = self.n10();
        let dim = self.dim();
        for a in 0..n {
            for b in 0..n {
                for k in n..dim {
                    if self.c[a][b][k].abs_f64() > tol {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Convenience wrapper matching the operation map: validates and reports.
pub fn validate_algebra<S: Scalar>(sc: &StructureConstants<S>) -> ValidationReport {
    sc.validate()
}
