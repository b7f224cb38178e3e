//! Chevalley-Eilenberg exterior calculus on 𝔤*.
//!
//! Forms are sparse maps from strictly increasing multi-indices over the dual
//! frame {ω¹..ω^r, γ¹..γ^s, ω̄¹..ω̄^r, γ̄¹..γ̄^s} to complex coefficients.
//! The differential of a 1-form is read off the structure constants through
//! dα(x, y) = −α([x, y]) and extended as an antiderivation; ∂ and ∂̄ are the
//! bidegree projections of d, which exhaust d on integrable algebras.

use crate::lie::StructureConstants;
use crate::scalar::Scalar;
use crate::{Error, Result};
use std::collections::BTreeMap;
use std::fmt;

/// A form of homogeneous total degree in the bigraded basis Λ^{p,q}𝔤*.
/// Multi-indices are strictly increasing in the fixed frame order and no
/// zero coefficient is stored.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedForm<S: Scalar> {
    n_h: usize,
    n_i: usize,
    degree: usize,
    terms: BTreeMap<Vec<usize>, S>,
}

impl<S: Scalar> GradedForm<S> {
    pub fn zero(n_h: usize, n_i: usize, degree: usize) -> Self {
        GradedForm {
            n_h,
            n_i,
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n_h: usize, n_i: usize, value: S) -> Self {
        let mut f = Self::zero(n_h, n_i, 0);
        f.insert(vec![], value);
        f
    }

    /// The basis 1-form dual to frame index `idx`.
    pub fn coframe(n_h: usize, n_i: usize, idx: usize) -> Self {
        let mut f = Self::zero(n_h, n_i, 1);
        assert!(idx < 2 * (n_h + n_i), "coframe index out of range");
        f.insert(vec![idx], S::one());
        f
    }

    pub fn n_h(&self) -> usize {
        self.n_h
    }

    pub fn n_i(&self) -> usize {
        self.n_i
    }

    /// Complex dimension of the (1,0) coframe.
    pub fn n10(&self) -> usize {
        self.n_h + self.n_i
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> &BTreeMap<Vec<usize>, S> {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, key: &[usize]) -> S {
        self.terms.get(key).cloned().unwrap_or_else(S::zero)
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|v| v.abs_f64()).fold(0.0, f64::max)
    }

    pub fn is_zero_tol(&self, tol: f64) -> bool {
        self.max_abs() <= tol
    }

    fn prune(value: &S) -> bool {
        let eps = S::prune_eps();
        value.is_zero() || (eps > 0.0 && value.abs_f64() <= eps)
    }

    fn insert(&mut self, key: Vec<usize>, value: S) {
        debug_assert_eq!(key.len(), self.degree);
        if Self::prune(&value) {
            return;
        }
        let entry = self.terms.entry(key);
        match entry {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(value);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().clone() + value;
                if Self::prune(&sum) {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        if self.n_h != other.n_h || self.n_i != other.n_i {
            return Err(Error::CoframeMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        assert_eq!(self.degree, other.degree, "degrees must match for addition");
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.insert(k.clone(), v.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scaled(-S::one()))
    }

    pub fn scaled(&self, factor: S) -> Self {
        let mut out = Self::zero(self.n_h, self.n_i, self.degree);
        for (k, v) in &self.terms {
            out.insert(k.clone(), v.clone() * factor.clone());
        }
        out
    }

    /// Graded-antisymmetric product.  The sign of each merged multi-index is
    /// computed by counting transpositions; repeated indices drop out.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let degree = self.degree + other.degree;
        let mut out = Self::zero(self.n_h, self.n_i, degree);
        if degree > 2 * self.n10() {
            return Ok(out);
        }
        for (ka, va) in &self.terms {
            for (kb, vb) in &other.terms {
                if let Some((key, sign)) = merge_indices(ka, kb) {
                    let mut v = va.clone() * vb.clone();
                    if sign < 0 {
                        v = -v;
                    }
                    out.insert(key, v);
                }
            }
        }
        Ok(out)
    }

    /// Counts (unbarred, barred) indices of a term.
    fn term_bidegree(&self, key: &[usize]) -> (usize, usize) {
        let n = self.n10();
        let p = key.iter().filter(|&&i| i < n).count();
        (p, key.len() - p)
    }

    /// Partition of the form by bidegree; coefficients of the parts sum
    /// exactly to the input.
    pub fn bidegree_split(&self) -> BTreeMap<(usize, usize), Self> {
        let mut parts: BTreeMap<(usize, usize), Self> = BTreeMap::new();
        for (k, v) in &self.terms {
            let pq = self.term_bidegree(k);
            parts
                .entry(pq)
                .or_insert_with(|| Self::zero(self.n_h, self.n_i, self.degree))
                .insert(k.clone(), v.clone());
        }
        if self.terms.is_empty() && self.degree == 0 {
            parts.insert((0, 0), self.clone());
        }
        parts
    }

    /// The pure (p,q) component.
    pub fn projection(&self, p: usize, q: usize) -> Self {
        let mut out = Self::zero(self.n_h, self.n_i, self.degree);
        for (k, v) in &self.terms {
            if self.term_bidegree(k) == (p, q) {
                out.insert(k.clone(), v.clone());
            }
        }
        out
    }

    pub fn is_pure(&self, p: usize, q: usize) -> bool {
        self.terms.keys().all(|k| self.term_bidegree(k) == (p, q))
    }

    /// Complex conjugate form: conjugated coefficients on conjugated
    /// multi-indices.  A form is real iff it equals its conjugate.
    pub fn conj(&self) -> Self {
        let n = self.n10();
        let dim = 2 * n;
        let mut out = Self::zero(self.n_h, self.n_i, self.degree);
        for (k, v) in &self.terms {
            let mapped: Vec<usize> = k.iter().map(|&i| (i + n) % dim).collect();
            let (key, sign) = sort_with_sign(mapped);
            let mut c = v.conj();
            if sign < 0 {
                c = -c;
            }
            out.insert(key, c);
        }
        out
    }

    pub fn reality_defect(&self) -> f64 {
        match self.conj().sub(self) {
            Ok(d) => d.max_abs(),
            Err(_) => f64::INFINITY,
        }
    }
}

/// Merges two strictly increasing index lists; `None` when they share an
/// index, otherwise the sorted union with the permutation sign.
fn merge_indices(a: &[usize], b: &[usize]) -> Option<(Vec<usize>, i32)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let mut inversions = 0usize;
    let (mut i, mut j) = (0usize, 0usize);
    while i < a.len() && j < b.len() {
        if a[i] == b[j] {
            return None;
        }
        if a[i] < b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            // b[j] jumps over the remaining entries of a
            inversions += a.len() - i;
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    Some((out, if inversions.is_multiple_of(2) { 1 } else { -1 }))
}

/// Sorts an index list, returning the permutation sign; `sign = 0` never
/// occurs because inputs here have distinct entries.
fn sort_with_sign(mut v: Vec<usize>) -> (Vec<usize>, i32) {
    let mut swaps = 0usize;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            swaps += 1;
            j -= 1;
        }
    }
    (v, if swaps.is_multiple_of(2) { 1 } else { -1 })
}

/// d of the basis 1-form dual to `idx`: −Σ_{a<b} c[a][b][idx] e^a ∧ e^b.
fn coframe_differential<S: Scalar>(sc: &StructureConstants<S>, idx: usize) -> GradedForm<S> {
    let mut out = GradedForm::zero(sc.n_h(), sc.n_i(), 2);
    let dim = sc.dim();
    for a in 0..dim {
        for b in (a + 1)..dim {
            let c = sc.coefficient(a, b, idx).clone();
            if !c.is_zero() {
                out.insert(vec![a, b], -c);
            }
        }
    }
    out
}

/// Chevalley-Eilenberg differential, extended as an antiderivation:
/// d(e^{i₁}∧…∧e^{i_p}) = Σ_j (−1)^{j−1} e^{i₁}∧…∧d(e^{i_j})∧…∧e^{i_p}.
pub fn ce_differential<S: Scalar>(
    a: &GradedForm<S>,
    sc: &StructureConstants<S>,
) -> Result<GradedForm<S>> {
    if a.n10() != sc.n10() {
        return Err(Error::CoframeMismatch);
    }
    let mut out = GradedForm::zero(a.n_h, a.n_i, a.degree + 1);
    if a.degree + 1 > 2 * a.n10() {
        return Ok(out);
    }
    for (key, coeff) in &a.terms {
        for (j, &idx) in key.iter().enumerate() {
            let d_ej = coframe_differential(sc, idx);
            if d_ej.is_empty() {
                continue;
            }
            // prefix ∧ d(e^idx) ∧ suffix
            let mut rest: Vec<usize> = Vec::with_capacity(key.len() - 1);
            rest.extend_from_slice(&key[..j]);
            rest.extend_from_slice(&key[j + 1..]);
            let sign_front = if j % 2 == 0 { S::one() } else { -S::one() };
            for (dkey, dv) in &d_ej.terms {
                if let Some((merged, msign)) = merge_indices(dkey, &rest) {
                    let mut v = coeff.clone() * dv.clone() * sign_front.clone();
                    if msign < 0 {
                        v = -v;
                    }
                    out.insert(merged, v);
                }
            }
        }
    }
    Ok(out)
}

/// ∂: the (p+1, q) projection of d on a pure (p,q) form.
pub fn del<S: Scalar>(a: &GradedForm<S>, sc: &StructureConstants<S>) -> Result<GradedForm<S>> {
    let d = ce_differential(a, sc)?;
    let mut out = GradedForm::zero(a.n_h, a.n_i, a.degree + 1);
    for ((p, q), part) in d.bidegree_split() {
        for (pp, qq) in a.bidegree_split().keys() {
            if p == pp + 1 && q == *qq {
                out = out.add(&part)?;
            }
        }
    }
    Ok(out)
}

/// ∂̄: the (p, q+1) projection of d on a pure (p,q) form.
pub fn delbar<S: Scalar>(a: &GradedForm<S>, sc: &StructureConstants<S>) -> Result<GradedForm<S>> {
    let d = ce_differential(a, sc)?;
    let mut out = GradedForm::zero(a.n_h, a.n_i, a.degree + 1);
    for ((p, q), part) in d.bidegree_split() {
        for (pp, qq) in a.bidegree_split().keys() {
            if p == *pp && q == qq + 1 {
                out = out.add(&part)?;
            }
        }
    }
    Ok(out)
}

/// ∂∂̄ of a pure (1,1) form, computed as the (2,2) part of d applied twice
/// with bidegree projections in between.  Vanishes iff the form is
/// pluriclosed.
pub fn del_delbar<S: Scalar>(
    a: &GradedForm<S>,
    sc: &StructureConstants<S>,
) -> Result<GradedForm<S>> {
    if a.degree != 2 || !a.is_pure(1, 1) {
        return Err(Error::BidegreeMismatch(1, 1));
    }
    let db = ce_differential(a, sc)?.projection(1, 2);
    Ok(ce_differential(&db, sc)?.projection(2, 2))
}

impl<S: Scalar> fmt::Display for GradedForm<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let n = self.n10();
        let name = |i: usize| {
            let (base, bar) = if i < n { (i, "") } else { (i - n, "~") };
            if base < self.n_h {
                format!("w{}{}", bar, base + 1)
            } else {
                format!("g{}{}", bar, base - self.n_h + 1)
            }
        };
        let mut first = true;
        for (k, v) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let basis: Vec<String> = k.iter().map(|&i| name(i)).collect();
            write!(
                f,
                "({:.4}{:+.4}i) {}",
                v.re_f64(),
                v.im_f64(),
                basis.join("^")
            )?;
        }
        Ok(())
    }
}
