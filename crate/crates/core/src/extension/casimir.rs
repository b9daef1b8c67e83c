use crate::deltaspace::DeltaVector;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::opalg::{casimir, essential_order, euler, lorentz_generator, OperatorExpr, Signature};
use crate::scalar::Scalar;
use crate::spectral::{kernel_projection_polynomial, restrict, restrict_between, tail};

use super::{apply_counterterm, ExtensionRecord};

/// An operator `C` together with generators `Rⁱ` and its expression
/// `C = Σ c · R^{w₁} ∘ … ∘ R^{w_k}` as a list of weighted words.
#[derive(Clone, Debug, PartialEq)]
pub struct CasimirSpec<S> {
    pub casimir: OperatorExpr<S>,
    pub generators: Vec<OperatorExpr<S>>,
    pub words: Vec<(S, Vec<usize>)>,
}

impl<S: Scalar> CasimirSpec<S> {
    /// Quadratic Lorentz Casimir with generators `L_{μν}`, `μ < ν`:
    /// `C = Σ_{μ<ν} 2 g^{μμ} g^{νν} L_{μν}²`.
    pub fn lorentz(n: usize, sig: &Signature) -> Result<Self> {
        let mut generators = Vec::new();
        let mut words = Vec::new();
        for mu in 0..n {
            for nu in mu + 1..n {
                let idx = generators.len();
                generators.push(lorentz_generator(n, mu, nu, sig)?);
                words.push((S::from_integer(2 * sig.g(mu) * sig.g(nu)), vec![idx, idx]));
            }
        }
        Ok(CasimirSpec {
            casimir: casimir(n, sig)?,
            generators,
            words,
        })
    }

    pub fn dim(&self) -> usize {
        self.casimir.dim()
    }

    /// `Σ c · R^{w₁} ∘ … ∘ R^{w_k}`
    pub fn evaluate_words(&self) -> Result<OperatorExpr<S>> {
        let n = self.dim();
        let mut out = OperatorExpr::zero(n);
        for (c, word) in &self.words {
            let mut t = OperatorExpr::scalar(n, c.clone());
            for &i in word {
                let g = self.generators.get(i).ok_or(Error::IndexOutOfRange {
                    index: i,
                    n: self.generators.len(),
                })?;
                t = t.compose(g);
            }
            out = out.add(&t);
        }
        Ok(out)
    }

    /// `C u̇` from the generator residues: the last letter of each word acts
    /// first, on its registered residue.
    fn residue_from_generators(&self, rec: &ExtensionRecord<S>) -> Result<DeltaVector<S>> {
        let mut out = DeltaVector::zero(rec.n);
        for (c, word) in &self.words {
            let (last, rest) = word.split_last().ok_or_else(|| {
                Error::HypothesisFailure("empty word in the Casimir expression".into())
            })?;
            let mut w = rec.require(&self.generators[*last])?.clone();
            for &i in rest.iter().rev() {
                w = self.generators[i].apply_delta(&w)?;
            }
            out = &out + &w.scale(c);
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CasimirReport {
    /// The level at which the restricted checks ran.
    pub level: i64,
    /// Every word has length at least two and the words sum to `C`.
    pub shape: bool,
    /// All generators have essential order 0.
    pub order_zero: bool,
    pub self_adjoint: bool,
    /// Generators that fail to commute with `C`, with the commutator.
    pub non_commuting: Vec<(usize, String)>,
    /// `dim ker C|_r` and `dim ∩ ker Rⁱ|_r`; the intersection is always
    /// contained in `ker C|_r`.
    pub kernel_dims: (usize, usize),
}

impl CasimirReport {
    pub fn kernel_equality(&self) -> bool {
        self.kernel_dims.0 == self.kernel_dims.1
    }

    pub fn passed(&self) -> bool {
        self.shape
            && self.order_zero
            && self.self_adjoint
            && self.non_commuting.is_empty()
            && self.kernel_equality()
    }

    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.shape {
            out.push("C is not a sum of words of length >= 2 in the generators".into());
        }
        if !self.order_zero {
            out.push("a generator has positive essential order".into());
        }
        if !self.self_adjoint {
            out.push(format!("C|_{} is not self-adjoint", self.level));
        }
        for (i, c) in &self.non_commuting {
            out.push(format!("[C, R{i}] = {c}"));
        }
        if !self.kernel_equality() {
            out.push(format!(
                "dim ker C|_{} = {} but the joint kernel of the generators has dimension {}",
                self.level, self.kernel_dims.0, self.kernel_dims.1
            ));
        }
        out
    }
}

/// Exact check of all hypotheses of the Casimir construction at level `r`.
pub fn verify_casimir_hypotheses<S: Scalar>(spec: &CasimirSpec<S>, r: i64) -> CasimirReport {
    let shape = spec.words.iter().all(|(_, w)| w.len() >= 2)
        && spec.evaluate_words().is_ok_and(|c| c == spec.casimir);
    let depth = r.max(0) as u32;
    let order_zero = spec
        .generators
        .iter()
        .all(|g| essential_order(g, depth).q == 0);
    let c_r = restrict_between(&spec.casimir, r, r);
    let self_adjoint = essential_order(&spec.casimir, depth).q == 0 && c_r.is_self_adjoint();
    let non_commuting = spec
        .generators
        .iter()
        .enumerate()
        .filter_map(|(i, g)| {
            let c = spec.casimir.commutator(g);
            (!c.is_zero()).then(|| (i, c.to_string()))
        })
        .collect();
    let ker_c = c_r.matrix.nullspace().len();
    let stacked = stack(
        spec.generators
            .iter()
            .map(|g| restrict(g, r).matrix)
            .collect(),
        c_r.matrix.cols(),
    );
    let joint = stacked.nullspace().len();
    CasimirReport {
        level: r,
        shape,
        order_zero,
        self_adjoint,
        non_commuting,
        kernel_dims: (ker_c, joint),
    }
}

fn stack<S: Scalar>(blocks: Vec<Matrix<S>>, cols: usize) -> Matrix<S> {
    let rows: Vec<Vec<S>> = blocks.iter().flat_map(|b| b.to_rows()).collect();
    if rows.is_empty() {
        return Matrix::zeros(0, cols);
    }
    Matrix::from_rows(rows).expect("blocks share a column count")
}

/// Counterterm `v` with `u̇ + v = b_r(C) u̇`, where `b_r(C|_r)` is the
/// orthogonal projection onto `ker C|_r`. Uses the residue registered for
/// `C` if there is one, otherwise derives it from the generator residues.
pub fn casimir_correction<S: Scalar>(
    rec: &ExtensionRecord<S>,
    spec: &CasimirSpec<S>,
) -> Result<DeltaVector<S>> {
    let report = verify_casimir_hypotheses(spec, rec.r);
    if !report.passed() {
        return Err(Error::HypothesisFailure(report.failures().join("; ")));
    }
    let w = match rec.residue(&spec.casimir) {
        Some(w) => w.clone(),
        None => spec.residue_from_generators(rec)?,
    };
    let c_r = restrict_between(&spec.casimir, rec.r, rec.r);
    let b = kernel_projection_polynomial(&c_r.matrix);
    let dom = c_r.domain_basis();
    w.check_degree(rec.r)?;
    let v = tail(&b).eval_on_vector(&c_r.matrix, &w.to_coords(&dom));
    Ok(DeltaVector::from_coords(rec.n, &dom, &v))
}

/// Composite counterterm: the Casimir projection (when `lorentz` is given)
/// followed by `p_r(P²)` with `P = Π R(a_j)^{N_j}`, where `p_r(P²|_r)` is the
/// projection onto `ker P|_r`. Needs the residue of `P` registered.
pub fn renorm_map<S: Scalar>(
    rec: &ExtensionRecord<S>,
    degrees: &[(i64, u32)],
    lorentz: Option<&CasimirSpec<S>>,
) -> Result<DeltaVector<S>> {
    let n = rec.n;
    let (v1, rec1) = match lorentz {
        Some(spec) => {
            let v = casimir_correction(rec, spec)?;
            let next = apply_counterterm(rec, &v)?;
            (v, next)
        }
        None => (DeltaVector::zero(n), rec.clone()),
    };
    let p_op = degrees
        .iter()
        .fold(OperatorExpr::identity(n), |acc, &(a, k)| {
            acc.compose(&euler(n, S::from_integer(a)).pow(k))
        });
    let w = rec1.require(&p_op)?;
    let p_r = restrict_between(&p_op, rec.r, rec.r);
    let square = p_r.matrix.mul(&p_r.matrix);
    let proj = kernel_projection_polynomial(&square);
    let dom = p_r.domain_basis();
    let pw = p_r.matrix.mul_vec(&w.to_coords(&dom));
    w.check_degree(rec.r)?;
    let v2 = tail(&proj).eval_on_vector(&square, &pw);
    Ok(&v1 + &DeltaVector::from_coords(n, &dom, &v2))
}
