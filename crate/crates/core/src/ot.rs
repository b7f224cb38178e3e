//! Constructors for Oeljeklaus-Toma-type algebras and their diagonal
//! semidirect-product generalization.
//!
//! An OT algebra of type (r, s) is determined by real r×s matrices b, c
//! through λ_{ki} = (√−1/4) b_{ki} − (1/2) c_{ki} and the brackets
//!
//! ```text
//! [Z_k, Z̄_k] = −(√−1/2)(Z_k + Z̄_k)
//! [Z_k, W_i]  = −λ_{ki} W_i
//! [Z_k, W̄_i] =  λ̄_{ki} W̄_i
//! ```
//!
//! with all other brackets zero.  Each row of b must sum to −1.  The
//! number-theoretic provenance of b and c is not modeled; they are free
//! inputs subject only to those constraints.

use crate::lie::StructureConstants;
use crate::scalar::{Scalar, C64};
use crate::{Error, Result};
use serde::Serialize;

// Parameter structs deliberately do not derive Deserialize: construction has
// to run through the validating constructors.

/// b entries must sit within this distance of {0, −1} for the
/// pluriclosed-admissible normal form; inputs are user-specified and
/// near-exact.
pub const ADMISSIBLE_TOL: f64 = 1e-9;

/// Structure parameters of an OT-type algebra.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OTParams {
    r: usize,
    s: usize,
    b: Vec<Vec<f64>>,
    c: Vec<Vec<f64>>,
    /// Column reordering applied by the constructor to reach the normal form
    /// b_kk = −1, recorded for traceability; `perm[new] = old`.
    #[serde(skip_serializing_if = "Option::is_none")]
    column_permutation: Option<Vec<usize>>,
}

impl OTParams {
    /// Validates shapes and the row-sum constraint Σ_k b_{ik} = −1.  When b
    /// is a {0,−1} permutation pattern the columns of b and c are reordered
    /// so that b_kk = −1; downstream closed forms assume that normal form.
    pub fn new(r: usize, s: usize, b: Vec<Vec<f64>>, c: Vec<Vec<f64>>) -> Result<Self> {
        if b.len() != r || c.len() != r {
            return Err(Error::DimensionMismatch {
                expected: r,
                got: b.len().max(c.len()),
            });
        }
        for row in b.iter().chain(c.iter()) {
            if row.len() != s {
                return Err(Error::DimensionMismatch {
                    expected: s,
                    got: row.len(),
                });
            }
        }
        for (i, row) in b.iter().enumerate() {
            let sum: f64 = row.iter().sum();
            if (sum + 1.0).abs() > ADMISSIBLE_TOL {
                return Err(Error::RowSumViolation { row: i + 1, sum });
            }
        }
        let mut params = OTParams {
            r,
            s,
            b,
            c,
            column_permutation: None,
        };
        params.normalize_columns();
        Ok(params)
    }

    /// When b is a permuted {0,−1} pattern, reorder columns to put the −1
    /// entries on the diagonal.
    fn normalize_columns(&mut self) {
        if self.r != self.s || !self.has_admissible_pattern() {
            return;
        }
        let s = self.s;
        // i_k = column carrying the −1 of row k
        let targets: Vec<usize> = (0..s)
            .map(|k| {
                (0..s)
                    .find(|&i| (self.b[k][i] + 1.0).abs() <= ADMISSIBLE_TOL)
                    .expect("admissible pattern has a -1 per row")
            })
            .collect();
        if targets.iter().enumerate().all(|(k, &i)| k == i) {
            return;
        }
        // new column k = old column targets[k]
        let permute = |m: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            m.iter()
                .map(|row| (0..s).map(|k| row[targets[k]]).collect())
                .collect()
        };
        self.b = permute(&self.b);
        self.c = permute(&self.c);
        self.column_permutation = Some(targets);
    }

    fn has_admissible_pattern(&self) -> bool {
        if self.r != self.s {
            return false;
        }
        let near = |x: f64, v: f64| (x - v).abs() <= ADMISSIBLE_TOL;
        let mut col_count = vec![0usize; self.s];
        for row in &self.b {
            let mut row_count = 0;
            for (i, &x) in row.iter().enumerate() {
                if near(x, -1.0) {
                    row_count += 1;
                    col_count[i] += 1;
                } else if !near(x, 0.0) {
                    return false;
                }
            }
            if row_count != 1 {
                return false;
            }
        }
        col_count.iter().all(|&c| c == 1)
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn b(&self) -> &Vec<Vec<f64>> {
        &self.b
    }

    pub fn c(&self) -> &Vec<Vec<f64>> {
        &self.c
    }

    pub fn column_permutation(&self) -> Option<&Vec<usize>> {
        self.column_permutation.as_ref()
    }

    /// λ_{ki} = (√−1/4) b_{ki} − (1/2) c_{ki}, 0-based indices.
    pub fn lambda<S: Scalar>(&self, k: usize, i: usize) -> S {
        S::from_parts(-0.5 * self.c[k][i], 0.25 * self.b[k][i])
    }

    /// Whether the parameters are in the pluriclosed-admissible normal form:
    /// r = s and b is the identity {0,−1} pattern with b_kk = −1 (after the
    /// constructor's reordering), so Im λ_{ki} = −¼ δ_{ik}.
    pub fn is_pluriclosed_admissible(&self) -> bool {
        self.r == self.s
            && self.has_admissible_pattern()
            && (0..self.s).all(|k| (self.b[k][k] + 1.0).abs() <= ADMISSIBLE_TOL)
    }

    fn require_admissible(&self) -> Result<()> {
        if self.is_pluriclosed_admissible() {
            Ok(())
        } else {
            Err(Error::NotAdmissible(format!(
                "need r = s and a {{0,-1}} permutation pattern in b, got r={}, s={}",
                self.r, self.s
            )))
        }
    }

    /// The indices p (0-based) with λ_{jp} = 0 for all j ≠ p — equivalently
    /// c_{jp} = 0 off the diagonal.  Only these positions can carry mixed
    /// metric terms in a pluriclosed metric.
    pub fn admissible_mixed_indices(&self) -> Result<Vec<usize>> {
        self.require_admissible()?;
        Ok((0..self.s)
            .filter(|&p| (0..self.s).all(|j| j == p || self.c[j][p] == 0.0))
            .collect())
    }

    /// Builds the structure constants; the output passes validation and
    /// integrability by construction.
    pub fn build_algebra<S: Scalar>(&self) -> StructureConstants<S> {
        let (r, s) = (self.r, self.s);
        let n = r + s;
        let mut sc = StructureConstants::zeros(r, s);
        let minus_half_i = S::from_parts(0.0, -0.5);
        for k in 0..r {
            let (z, zb) = (k, n + k);
            sc.add_bracket_term(z, zb, z, minus_half_i.clone());
            sc.add_bracket_term(z, zb, zb, minus_half_i.clone());
            for i in 0..s {
                let lam: S = self.lambda(k, i);
                let (w, wb) = (r + i, n + r + i);
                sc.add_bracket_term(z, w, w, -lam.clone());
                sc.add_bracket_term(z, wb, wb, lam.conj());
                sc.add_bracket_term(zb, wb, wb, -lam.conj());
                sc.add_bracket_term(zb, w, w, lam);
            }
        }
        sc.flag_ot_type()
    }
}

/// Diagonal semidirect-product data 𝔤 = 𝔥 ⋉_λ 𝔍: eigenvalue tables for the
/// action of 𝔥^{1,0} on the conjugate frame W̄ (`lambda[i][a]` = λ_a(Z_i))
/// and optionally on W (`lambda_prime[i][a]` = λ'_a(Z_i)).  When absent, the
/// holomorphic action defaults to −conj(λ), the unique diagonal choice
/// compatible with the Jacobi identity.
#[derive(Debug, Clone, PartialEq)]
pub struct SemidirectParams {
    lambda: Vec<Vec<C64>>,
    lambda_prime: Option<Vec<Vec<C64>>>,
}

/// Which of the structural assumptions the built algebra satisfies.  The
/// first four hold by construction of the diagonal builder; the trace
/// conditions are measured from the supplied tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SemidirectConditions {
    /// 𝔥 is a sum of filiform pieces: [Z_k, Z̄_k] = −(√−1/2)(Z_k + Z̄_k),
    /// all other 𝔥-brackets zero.
    pub h_filiform: bool,
    /// 𝔍 is abelian and J-invariant.
    pub ideal_abelian: bool,
    /// The action of 𝔥^{1,0} preserves the bidegree splitting of 𝔍.
    pub action_preserves_types: bool,
    /// The action on W̄ is simultaneously diagonal in the chosen frame.
    pub conjugate_action_diagonal: bool,
    /// Σ_a Im λ_a(Z_i) does not depend on i.
    pub conjugate_trace_constant: bool,
    /// The action on W is diagonal and Σ_a Im λ'_a(Z_i) does not depend
    /// on i.
    pub holomorphic_action_constant: bool,
}

impl SemidirectConditions {
    /// The hypotheses of the closed-form flow: everything except the trace
    /// conditions.
    pub fn structural(&self) -> bool {
        self.h_filiform
            && self.ideal_abelian
            && self.action_preserves_types
            && self.conjugate_action_diagonal
    }
}

fn trace_constant(table: &[Vec<C64>], tol: f64) -> bool {
    let sums: Vec<f64> = table
        .iter()
        .map(|row| row.iter().map(|z| z.im).sum())
        .collect();
    match sums.first() {
        None => true,
        Some(&first) => sums.iter().all(|&v| (v - first).abs() <= tol),
    }
}

impl SemidirectParams {
    pub fn new(lambda: Vec<Vec<C64>>, lambda_prime: Option<Vec<Vec<C64>>>) -> Result<Self> {
        let r = lambda.len();
        let s = lambda.first().map_or(0, |row| row.len());
        if lambda.iter().any(|row| row.len() != s) {
            return Err(Error::DimensionMismatch {
                expected: s,
                got: 0,
            });
        }
        if let Some(lp) = &lambda_prime {
            if lp.len() != r || lp.iter().any(|row| row.len() != s) {
                return Err(Error::DimensionMismatch {
                    expected: r,
                    got: lp.len(),
                });
            }
        }
        Ok(SemidirectParams {
            lambda,
            lambda_prime,
        })
    }

    /// Embeds OT parameters: λ_a(Z_i) = λ̄_{ia} and λ'_a(Z_i) = −λ_{ia}.
    pub fn from_ot(p: &OTParams) -> Self {
        let lambda = (0..p.r())
            .map(|i| (0..p.s()).map(|a| p.lambda::<C64>(i, a).conj()).collect())
            .collect();
        let lambda_prime = (0..p.r())
            .map(|i| (0..p.s()).map(|a| -p.lambda::<C64>(i, a)).collect())
            .collect();
        SemidirectParams {
            lambda,
            lambda_prime: Some(lambda_prime),
        }
    }

    pub fn r(&self) -> usize {
        self.lambda.len()
    }

    pub fn s(&self) -> usize {
        self.lambda.first().map_or(0, |row| row.len())
    }

    /// The effective holomorphic action table: supplied, or −conj(λ).
    pub fn effective_lambda_prime(&self) -> Vec<Vec<C64>> {
        match &self.lambda_prime {
            Some(lp) => lp.clone(),
            None => self
                .lambda
                .iter()
                .map(|row| row.iter().map(|z| -z.conj()).collect())
                .collect(),
        }
    }

    /// Builds 𝔤 = 𝔥 ⋉_λ 𝔍 with the diagonal actions and reports which
    /// structural assumptions hold.  A supplied λ' that is not −conj(λ)
    /// produces a table that fails Jacobi validation.
    pub fn build_algebra(&self, tol: f64) -> (StructureConstants<C64>, SemidirectConditions) {
        let (r, s) = (self.r(), self.s());
        let n = r + s;
        let lp = self.effective_lambda_prime();
        let mut sc = StructureConstants::zeros(r, s);
        let minus_half_i = C64::new(0.0, -0.5);
        for i in 0..r {
            let (z, zb) = (i, n + i);
            sc.add_bracket_term(z, zb, z, minus_half_i);
            sc.add_bracket_term(z, zb, zb, minus_half_i);
            for a in 0..s {
                let (w, wb) = (r + a, n + r + a);
                sc.add_bracket_term(z, wb, wb, self.lambda[i][a]);
                sc.add_bracket_term(zb, w, w, self.lambda[i][a].conj());
                sc.add_bracket_term(z, w, w, lp[i][a]);
                sc.add_bracket_term(zb, wb, wb, lp[i][a].conj());
            }
        }
        let conditions = SemidirectConditions {
            h_filiform: true,
            ideal_abelian: true,
            action_preserves_types: true,
            conjugate_action_diagonal: true,
            conjugate_trace_constant: trace_constant(&self.lambda, tol),
            holomorphic_action_constant: trace_constant(&lp, tol),
        };
        (sc.flag_ot_type(), conditions)
    }
}
