//! Pointwise checks of the Bochner-type identity for `Φ(h)`, its in-proof
//! Clifford identities, the curvature-term pairing, and the quaternion-Kähler
//! chain ending in the semi-stability bound.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::clifford::CliffordRep;
use crate::curvature::{CurvatureTensor, SymTensor2};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{frobenius_inner, max_abs, SparseOp, C64};
use crate::spinlab::{
    eta_forms, hat, normalize_pure, parallel_constraint_residual, phi_from_images, solve_theta, GeometricDatum,
    SpinorForm, TwoFormFamily,
};
use crate::tolerances;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    pub inputs: BTreeMap<String, Value>,
    pub residuals: BTreeMap<String, f64>,
    /// Informational quantities; never gate `pass`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub values: BTreeMap<String, f64>,
    pub pass: bool,
    pub tol: f64,
    #[serde(rename = "elapsedMs", default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

impl VerificationReport {
    pub fn new(check: impl Into<String>, tol: f64) -> Self {
        Self {
            check: check.into(),
            inputs: BTreeMap::new(),
            residuals: BTreeMap::new(),
            values: BTreeMap::new(),
            pass: false,
            tol,
            elapsed_ms: None,
        }
    }

    pub fn input(mut self, key: impl Into<String>, value: impl Into<Value>) -> Self {
        self.inputs.insert(key.into(), value.into());
        self
    }

    pub fn residual(mut self, key: impl Into<String>, value: f64) -> Self {
        self.residuals.insert(key.into(), value);
        self
    }

    pub fn value(mut self, key: impl Into<String>, value: f64) -> Self {
        self.values.insert(key.into(), value);
        self
    }

    pub fn datum(self, datum: &GeometricDatum) -> Self {
        let s = self
            .input("label", datum.label.as_str())
            .input("n", datum.n())
            .input("r", datum.r())
            .input("m", datum.rep.m());
        match datum.seed {
            Some(seed) => s.input("seed", seed),
            None => s,
        }
    }

    /// Sets `pass` from the residuals: every one finite and below `tol`.
    pub fn finish(mut self) -> Self {
        self.pass = self.residuals.values().all(|r| r.is_finite() && *r < self.tol);
        self
    }

    /// The report with timing stripped, for run-to-run comparison.
    pub fn without_timing(&self) -> Self {
        Self { elapsed_ms: None, ..self.clone() }
    }
}

/// Surrogate `T_{klij}` for `(∇_{e_k}∇_{e_l} h)(e_i, e_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SecondDerivSymbol {
    n: usize,
    data: Vec<f64>,
}

impl SecondDerivSymbol {
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, k: usize, l: usize, i: usize, j: usize) -> f64 {
        self.data[((k * self.n + l) * self.n + i) * self.n + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// `T_{kkij}` summed over `k`.
    pub fn trace_kk(&self) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |i, j| (0..n).map(|k| self.get(k, k, i, j)).sum())
    }

    /// Worst violation of `T_{klij} = T_{klji}`.
    pub fn symmetry_residual(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0_f64;
        for k in 0..n {
            for l in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        worst = worst.max((self.get(k, l, i, j) - self.get(k, l, j, i)).abs());
                    }
                }
            }
        }
        worst
    }

    /// Worst violation of `T_{klij} − T_{lkij} = R_{lkip} h_{pj} + R_{lkjp} h_{ip}`.
    pub fn ricci_identity_residual(&self, r: &CurvatureTensor, h: &SymTensor2) -> f64 {
        let n = self.n;
        let mut worst = 0.0_f64;
        for k in 0..n {
            for l in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let curv: f64 =
                            (0..n).map(|p| r.get(l, k, i, p) * h.get(p, j) + r.get(l, k, j, p) * h.get(i, p)).sum();
                        worst = worst.max((self.get(k, l, i, j) - self.get(l, k, i, j) - curv).abs());
                    }
                }
            }
        }
        worst
    }
}

/// Random symmetric-in-`(k, l)` part plus the antisymmetric part fixed by the
/// Ricci identity, `½(R_{lkip} h_{pj} + R_{lkjp} h_{ip})`.
pub fn ricci_identity_symbol(r: &CurvatureTensor, h: &SymTensor2, seed: u64) -> Result<SecondDerivSymbol> {
    check_dim(r.n(), h.n())?;
    let n = r.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<f64> = (0..n.pow(4)).map(|_| rng.sample(StandardNormal)).collect();
    let at = |k: usize, l: usize, i: usize, j: usize| raw[((k * n + l) * n + i) * n + j];
    let mut data = Vec::with_capacity(n.pow(4));
    for k in 0..n {
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    // grouped so that both swaps leave the sum bit-identical
                    let sym = ((at(k, l, i, j) + at(l, k, i, j)) + (at(k, l, j, i) + at(l, k, j, i))) / 4.0;
                    let anti: f64 =
                        (0..n).map(|p| r.get(l, k, i, p) * h.get(p, j) + r.get(l, k, j, p) * h.get(i, p)).sum();
                    data.push(sym + 0.5 * anti);
                }
            }
        }
    }
    Ok(SecondDerivSymbol { n, data })
}

fn dense_gens(rep: &CliffordRep) -> Vec<DMatrix<C64>> {
    rep.base_generators().iter().map(SparseOp::to_dense).collect()
}

/// `D · S` for dense `D` and sparse `S`.
fn dense_times_sparse(d: &DMatrix<C64>, s: &SparseOp) -> DMatrix<C64> {
    let mut out = DMatrix::zeros(d.nrows(), s.dim());
    for a in 0..s.dim() {
        for (b, v) in s.row(a) {
            let col = d.column(a) * v;
            let mut target = out.column_mut(b);
            target += col;
        }
    }
    out
}

fn sparse_times_dense(s: &SparseOp, d: &DMatrix<C64>) -> DMatrix<C64> {
    let mut out = DMatrix::zeros(s.dim(), d.ncols());
    for a in 0..s.dim() {
        for (b, v) in s.row(a) {
            let row = d.row(b) * v;
            let mut target = out.row_mut(a);
            target += row;
        }
    }
    out
}

fn contract_pairs(gens: &[DMatrix<C64>], coeff: impl Fn(usize, usize) -> f64) -> DMatrix<C64> {
    let n = gens.len();
    let dim = gens[0].nrows();
    let mut acc = DMatrix::zeros(dim, dim);
    for k in 0..n {
        for l in 0..n {
            let c = coeff(k, l);
            if c != 0.0 {
                acc += &gens[k] * &gens[l] * C64::new(c, 0.0);
            }
        }
    }
    acc
}

fn rel_dev(a: &DMatrix<C64>, b: &DMatrix<C64>) -> (f64, f64) {
    let dev = (a - b).iter().fold(0.0_f64, |m, z| m.max(z.norm()));
    let scale = a.iter().chain(b.iter()).fold(0.0_f64, |m, z| m.max(z.norm()));
    (dev, scale)
}

/// Both sides of `Σ_{kli} R_{lkip} e_k e_l e_i = 2 Σ_l Ric_{pl} e_l`, one pair per `p`.
pub fn identity_one_sides(r: &CurvatureTensor, rep: &CliffordRep) -> Result<Vec<(DMatrix<C64>, DMatrix<C64>)>> {
    check_dim(rep.n(), r.n())?;
    let n = r.n();
    let gens = dense_gens(rep);
    let ric = r.ricci();
    let dim = rep.dim();
    Ok((0..n)
        .map(|p| {
            let mut lhs = DMatrix::zeros(dim, dim);
            for i in 0..n {
                let inner = contract_pairs(&gens, |k, l| r.get(l, k, i, p));
                lhs += dense_times_sparse(&inner, rep.base(i));
            }
            let mut rhs = DMatrix::zeros(dim, dim);
            for (l, g) in gens.iter().enumerate() {
                rhs += g * C64::new(2.0 * ric.get(p, l), 0.0);
            }
            (lhs, rhs)
        })
        .collect())
}

/// Both sides of `Σ_{kl} R_{lkjp} e_k e_l e_i = −Σ_{kl} R_{jpkl} e_i e_k e_l − 4 Σ_k R_{jpik} e_k`,
/// indexed `(i * n + j) * n + p`.
pub fn identity_two_sides(r: &CurvatureTensor, rep: &CliffordRep) -> Result<Vec<(DMatrix<C64>, DMatrix<C64>)>> {
    check_dim(rep.n(), r.n())?;
    let n = r.n();
    let gens = dense_gens(rep);
    let dim = rep.dim();
    let mut a = Vec::with_capacity(n * n);
    let mut b = Vec::with_capacity(n * n);
    for j in 0..n {
        for p in 0..n {
            a.push(contract_pairs(&gens, |k, l| r.get(l, k, j, p)));
            b.push(contract_pairs(&gens, |k, l| r.get(j, p, k, l)));
        }
    }
    let mut out = Vec::with_capacity(n.pow(3));
    for i in 0..n {
        for j in 0..n {
            for p in 0..n {
                let lhs = dense_times_sparse(&a[j * n + p], rep.base(i));
                let mut rhs = -sparse_times_dense(rep.base(i), &b[j * n + p]);
                let mut lin = DMatrix::<C64>::zeros(dim, dim);
                for (k, g) in gens.iter().enumerate() {
                    let c = r.get(j, p, i, k);
                    if c != 0.0 {
                        lin += g * C64::new(c, 0.0);
                    }
                }
                rhs -= lin * C64::new(4.0, 0.0);
                out.push((lhs, rhs));
            }
        }
    }
    Ok(out)
}

fn worst_relative(sides: &[(DMatrix<C64>, DMatrix<C64>)]) -> f64 {
    // relative to the largest entry over all instances, so that individually
    // vanishing sides do not blow up the ratio
    let (dev, scale) = sides
        .iter()
        .map(|(l, r)| rel_dev(l, r))
        .fold((0.0_f64, 0.0_f64), |(d, s), (d2, s2)| (d.max(d2), s.max(s2)));
    if scale == 0.0 {
        0.0
    } else {
        dev / scale
    }
}

/// Relative residual of `R_{lkip} e_k e_l e_i = 2 Ric_{pl} e_l`.
pub fn clifford_identity_one(r: &CurvatureTensor, rep: &CliffordRep) -> Result<f64> {
    Ok(worst_relative(&identity_one_sides(r, rep)?))
}

/// Relative residual of `R_{lkjp} e_k e_l e_i = −R_{jpkl} e_i e_k e_l − 4 R_{jpik} e_k`.
pub fn clifford_identity_two(r: &CurvatureTensor, rep: &CliffordRep) -> Result<f64> {
    Ok(worst_relative(&identity_two_sides(r, rep)?))
}

/// `e_i · P_{kl} ψ` for every `i` and ordered pair, indexed `[k * r + l][i]`.
fn mixed_images(rep: &CliffordRep, psi: &DVector<C64>) -> Vec<Vec<DVector<C64>>> {
    let r = rep.r();
    (0..r * r)
        .map(|kl| {
            let v = rep.pair(kl / r, kl % r).apply(psi);
            (0..rep.n()).map(|i| rep.apply_base(i, &v)).collect()
        })
        .collect()
}

/// `Σ_{kl} Σ_{ip} h_{ip} (Θ_{kl})_{pj} e_i f_k f_l ψ ⊗ e^j`.
fn theta_term(rep: &CliffordRep, psi: &DVector<C64>, h: &DMatrix<f64>, theta: &TwoFormFamily) -> SpinorForm {
    let r = rep.r();
    let images = mixed_images(rep, psi);
    let mut acc = SpinorForm::zeros(rep.n(), rep.dim());
    for k in 0..r {
        for l in 0..r {
            let th = theta.get(k, l);
            if k == l || th.iter().all(|&v| v == 0.0) {
                continue;
            }
            acc = acc.add(&phi_from_images(&images[k * r + l], &(h * th)));
        }
    }
    acc
}

fn ensure_parallel(datum: &GeometricDatum) -> Result<f64> {
    let res = parallel_constraint_residual(datum)?;
    if res > tolerances::PARALLEL {
        return Err(Error::InconsistentDatum(format!(
            "datum {:?} violates the parallel constraint (residual {res:e})",
            datum.label
        )));
    }
    Ok(res)
}

/// The two algebraic sides of the Bochner-type formula for `Φ(h)`.
pub struct Lemma31Sides {
    pub lhs: SpinorForm,
    pub rhs: SpinorForm,
}

pub fn lemma31_sides(datum: &GeometricDatum, h: &SymTensor2, t: &SecondDerivSymbol) -> Result<Lemma31Sides> {
    let n = datum.n();
    check_dim(n, h.n())?;
    check_dim(n, t.n())?;
    let rep = &datum.rep;
    let psi = datum.psi.coeffs();
    let e_psi: Vec<DVector<C64>> = (0..n).map(|i| rep.apply_base(i, psi)).collect();

    // Σ_{kl} e_k e_l Φ(T_{kl··})
    let mut lhs = SpinorForm::zeros(n, rep.dim());
    for k in 0..n {
        for l in 0..n {
            let slice = DMatrix::from_fn(n, n, |i, j| t.get(k, l, i, j));
            let phi = phi_from_images(&e_psi, &slice);
            for (j, comp) in phi.components.into_iter().enumerate() {
                let moved = rep.apply_base(k, &rep.apply_base(l, &comp));
                lhs.components[j] += moved;
            }
        }
    }

    let r = &datum.curvature;
    let tensor = -t.trace_kk() - r.ring_action(h)?.matrix() * 2.0 + r.ric_compose(h)?;
    let rhs = phi_from_images(&e_psi, &tensor).sub(&theta_term(rep, psi, h.matrix(), &datum.theta).scale(0.5));
    Ok(Lemma31Sides { lhs, rhs })
}

/// `Σ e_k e_l Φ(T_{kl})` against
/// `Φ(−T_{kk} − 2R̊h + Ric∘h) − ½ h_{ip}(Θ̂_{kl})_{pj} e_i f_k f_l ψ ⊗ e^j`.
pub fn lemma31_check(datum: &GeometricDatum, h: &SymTensor2, t: &SecondDerivSymbol, tol: f64) -> Result<VerificationReport> {
    let parallel = ensure_parallel(datum)?;
    let sides = lemma31_sides(datum, h, t)?;
    let diff = sides.lhs.sub(&sides.rhs).norm();
    let scale = sides.lhs.norm();
    let rel = if scale > 0.0 { diff / scale } else { diff };
    Ok(VerificationReport::new("lemma31", tol)
        .datum(datum)
        .residual("relative", rel)
        .value("lhs_norm", scale)
        .value("parallel_residual", parallel)
        .finish())
}

/// `Σ_{kl} ⟨η̂_{kl}∘h∘Θ̂_{kl}, h⟩` over all ordered pairs.
pub fn eta_h_theta(eta: &TwoFormFamily, h: &DMatrix<f64>, theta: &TwoFormFamily) -> f64 {
    let mut acc = 0.0;
    for k in 0..eta.r() {
        for l in 0..eta.r() {
            if k != l {
                acc += frobenius_inner(&(hat(eta.get(k, l)) * h * hat(theta.get(k, l))), h);
            }
        }
    }
    acc
}

/// Spinorial pairing `½ h_{ip}(Θ̂_{kl})_{pj} Re⟨e_i f_k f_l ψ ⊗ e^j, Φ(h)⟩`
/// against the matrix expression `−½⟨η̂_{kl}∘h∘Θ̂_{kl}, h⟩`.
pub fn curvature_term_pairing_check(datum: &GeometricDatum, h: &SymTensor2, tol: f64) -> Result<VerificationReport> {
    check_dim(datum.n(), h.n())?;
    let rep = &datum.rep;
    let psi = datum.psi.coeffs();
    let phi_h = crate::spinlab::phi_map(rep, &datum.psi, h.matrix())?;
    let spinorial = 0.5 * theta_term(rep, psi, h.matrix(), &datum.theta).real_inner(&phi_h);
    let eta = eta_forms(rep, &datum.psi)?;
    let matrix = -0.5 * eta_h_theta(&eta, h.matrix(), &datum.theta);
    Ok(VerificationReport::new("curvature_term_pairing", tol)
        .datum(datum)
        .residual("difference", (spinorial - matrix).abs())
        .value("spinorial", spinorial)
        .value("matrix", matrix)
        .finish())
}

/// `½⟨η̂_{kl}∘h∘Θ̂_{kl}, h⟩` against `⟨R̊h, h⟩`; their ratio should be 1.
pub fn koiso_reduction_check(datum: &GeometricDatum, h: &SymTensor2, tol: f64) -> Result<VerificationReport> {
    check_dim(datum.n(), h.n())?;
    let eta = eta_forms(&datum.rep, &datum.psi)?;
    let curvature_term = 0.5 * eta_h_theta(&eta, h.matrix(), &datum.theta);
    let ring = frobenius_inner(datum.curvature.ring_action(h)?.matrix(), h.matrix());
    let mut report = VerificationReport::new("koiso_reduction", tol)
        .datum(datum)
        .value("curvature_term", curvature_term)
        .value("ring_term", ring);
    if datum.curvature.is_zero() && datum.theta.is_zero() {
        return Ok(report.finish());
    }
    let ratio = curvature_term / ring;
    report = report.value("ratio", ratio).residual("ratio_deviation", (ratio - 1.0).abs());
    Ok(report.finish())
}

/// `−scal/(n(n/4 + 2r − 4))`.
pub fn herrera_coefficient(scal: f64, n: usize, r: usize) -> f64 {
    let (n, r) = (n as f64, r as f64);
    -scal / (n * (n / 4.0 + 2.0 * r - 4.0))
}

/// `r(r−1)/(n/4 + 2r − 4)`.
pub fn norm_formula(n: usize, r: usize) -> f64 {
    let (n, r) = (n as f64, r as f64);
    r * (r - 1.0) / (n / 4.0 + 2.0 * r - 4.0)
}

fn psi_prime(datum: &GeometricDatum) -> Result<&crate::clifford::Spinor> {
    datum
        .psi_prime
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument(format!("datum {:?} carries no purity-normalised spinor", datum.label)))
}

/// Fits `Θ̂_{kl} = λ η̂^{ψ′}_{kl}` with Θ re-solved from the parallel
/// constraint and compares λ with `−scal/(n(n/4 + 2r − 4))`.
pub fn herrera_ratio_check(datum: &GeometricDatum, tol: f64) -> Result<VerificationReport> {
    let pp = psi_prime(datum)?;
    let solved = solve_theta(&datum.rep, &datum.curvature, &datum.psi)?;
    let eta = eta_forms(&datum.rep, pp)?;
    let (mut num, mut den) = (0.0, 0.0);
    for (k, l) in eta.upper_pairs() {
        num += frobenius_inner(solved.theta.get(k, l), eta.get(k, l));
        den += frobenius_inner(eta.get(k, l), eta.get(k, l));
    }
    let lambda = if den > 0.0 { num / den } else { 0.0 };
    let fit = eta
        .upper_pairs()
        .map(|(k, l)| max_abs(&(solved.theta.get(k, l) - eta.get(k, l) * lambda)))
        .fold(0.0, f64::max);
    let scal = datum.curvature.scal();
    let expected = herrera_coefficient(scal, datum.n(), datum.r());
    Ok(VerificationReport::new("herrera_ratio", tol)
        .datum(datum)
        .residual("coefficient_deviation", (lambda - expected).abs())
        .residual("fit_residual", fit)
        .value("lambda", lambda)
        .value("expected", expected)
        .value("scal", scal)
        .value("solve_residual", solved.residual)
        .value("rank", solved.rank as f64)
        .finish())
}

/// `|ψ′|²` against `r(r−1)/(n/4 + 2r − 4)`.
pub fn norm_formula_check(datum: &GeometricDatum, tol: f64) -> Result<VerificationReport> {
    let measured = psi_prime(datum)?.norm_sq();
    let expected = norm_formula(datum.n(), datum.r());
    Ok(VerificationReport::new("norm_formula", tol)
        .datum(datum)
        .residual("deviation", (measured - expected).abs())
        .value("measured", measured)
        .value("expected", expected)
        .value("ratio", measured / expected)
        .finish())
}

/// `−⟨Ric∘h, h⟩ − ½⟨η̂^ψ_{kl}∘h∘Θ̂_{kl}, h⟩` with η from the unit spinor.
pub fn corollary32_rhs(datum: &GeometricDatum, h: &SymTensor2) -> Result<f64> {
    let eta = eta_forms(&datum.rep, &datum.psi)?;
    corollary32_with(datum, &eta, h)
}

fn corollary32_with(datum: &GeometricDatum, eta: &TwoFormFamily, h: &SymTensor2) -> Result<f64> {
    check_dim(datum.n(), h.n())?;
    let ric_term = frobenius_inner(&datum.curvature.ric_compose(h)?, h.matrix());
    Ok(-ric_term - 0.5 * eta_h_theta(eta, h.matrix(), &datum.theta))
}

/// Draws `trials` symmetric `h` (alternately trace-free) plus `h = Id`, and
/// requires `corollary32_rhs(h) ≥ −tol·|h|²` for each.
///
/// Also records the proof-chain constants: the fitted `c` in
/// `rhs = −E|h|² + c·E·Σ_{kl}⟨η̂^ψ∘h∘η̂^ψ, h⟩`, and the largest observed
/// `|Σ_{kl}⟨η̂^ψ∘h∘η̂^ψ, h⟩| / (r(r−1)|h|²)`.
pub fn semistability_pointwise_check(
    datum: &GeometricDatum,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<VerificationReport> {
    let n = datum.n();
    let e = datum.curvature.scal() / n as f64;
    if e > tol {
        return Err(Error::InvalidArgument(format!("Einstein constant {e} is positive")));
    }
    let eta = eta_forms(&datum.rep, &datum.psi)?;
    let r = datum.r() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = vec![SymTensor2::identity(n)];
    for t in 0..trials {
        samples.push(if t % 2 == 0 { SymTensor2::random(n, &mut rng) } else { SymTensor2::random_traceless(n, &mut rng) });
    }

    let mut violations = 0usize;
    let mut min_ratio = f64::INFINITY;
    let mut cs_factor = 0.0_f64;
    let (mut num, mut den) = (0.0, 0.0);
    let mut fit_points = Vec::new();
    for h in &samples {
        let norm = h.norm_sq();
        let value = corollary32_with(datum, &eta, h)?;
        if value < -tol * norm {
            violations += 1;
        }
        min_ratio = min_ratio.min(value / norm);
        let q = eta_h_theta(&eta, h.matrix(), &eta);
        if r >= 2.0 {
            cs_factor = cs_factor.max(q.abs() / (r * (r - 1.0) * norm));
        }
        let (y, x) = (value + e * norm, e * q);
        num += x * y;
        den += x * x;
        fit_points.push((x, y));
    }

    let mut report = VerificationReport::new("semistability_pointwise", tol)
        .datum(datum)
        .input("trials", trials)
        .input("trial_seed", seed)
        .residual("negative_part", (-min_ratio).max(0.0))
        .value("violations", violations as f64)
        .value("min_rhs_over_norm", min_ratio)
        .value("einstein_constant", e)
        .value("cauchy_schwarz_factor", cs_factor);
    if den > 0.0 {
        let c = num / den;
        let misfit = fit_points.iter().map(|(x, y)| (y - c * x).abs()).fold(0.0, f64::max);
        report = report.value("effective_c", c).value("effective_c_misfit", misfit);
    }
    if let Some(pp) = &datum.psi_prime {
        report = report.value("psi_prime_norm_sq", pp.norm_sq());
    }
    Ok(report.finish())
}

/// Re-derives ψ′ from the datum's unit spinor; used to cross-check models.
pub fn renormalized_psi_prime(datum: &GeometricDatum) -> Result<crate::clifford::Spinor> {
    Ok(normalize_pure(&datum.rep, &datum.psi)?.psi_prime)
}
