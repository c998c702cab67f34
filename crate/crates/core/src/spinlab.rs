//! The spinor-geometric layer: η two-forms, twisted purity, the Φ map, the
//! parallel-spinor curvature constraint and its least-squares inversion.
//!
//! Auxiliary pairs `(k, l)` are summed over all ordered pairs unless a
//! function says otherwise; the diagonal terms vanish.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::clifford::{CliffordRep, RepSpec, Spinor};
use crate::curvature::CurvatureTensor;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{herm_dot, max_abs, LeastSquaresSolver, C64};
use crate::tolerances;
use crate::verify::VerificationReport;

/// `ω̂`: the component array read as an endomorphism in the orthonormal frame.
/// Composition `ω̂∘σ̂` is the matrix product `ω̂ · σ̂`.
pub fn hat(omega: &DMatrix<f64>) -> DMatrix<f64> {
    omega.clone()
}

/// A family `Ω_{kl}` of base two-forms indexed by auxiliary pairs, with
/// `Ω_{lk} = −Ω_{kl}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoFormFamily {
    n: usize,
    r: usize,
    forms: Vec<DMatrix<f64>>,
}

#[derive(Serialize, Deserialize)]
struct RawFamily {
    n: usize,
    r: usize,
    forms: Vec<Vec<Vec<f64>>>,
}

impl Serialize for TwoFormFamily {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.n;
        let forms = (0..self.r)
            .map(|k| {
                (0..self.r)
                    .map(|l| {
                        let f = self.get(k, l);
                        (0..n * n).map(|ij| f[(ij / n, ij % n)]).collect()
                    })
                    .collect()
            })
            .collect();
        RawFamily { n, r: self.r, forms }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for TwoFormFamily {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = RawFamily::deserialize(d)?;
        let mut fam = TwoFormFamily::zeros(raw.n, raw.r);
        if raw.forms.len() != raw.r {
            return Err(D::Error::custom("forms must have r rows"));
        }
        for (k, row) in raw.forms.iter().enumerate() {
            if row.len() != raw.r {
                return Err(D::Error::custom("forms must have r columns"));
            }
            for (l, flat) in row.iter().enumerate() {
                if flat.len() != raw.n * raw.n {
                    return Err(D::Error::custom(format!("form ({k},{l}) must have n² entries")));
                }
                fam.forms[k * raw.r + l] = DMatrix::from_row_slice(raw.n, raw.n, flat);
            }
        }
        let res = fam.invariant_residual();
        if res > 1e-12 * (1.0 + fam.max_abs()) {
            return Err(D::Error::custom(format!("two-form family violates antisymmetry (residual {res:e})")));
        }
        Ok(fam)
    }
}

impl TwoFormFamily {
    pub fn zeros(n: usize, r: usize) -> Self {
        Self { n, r, forms: vec![DMatrix::zeros(n, n); r * r] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn get(&self, k: usize, l: usize) -> &DMatrix<f64> {
        &self.forms[k * self.r + l]
    }

    /// Sets `Ω_{kl} = form` and `Ω_{lk} = −form` (`k ≠ l`).
    pub fn set_pair(&mut self, k: usize, l: usize, form: DMatrix<f64>) {
        assert_ne!(k, l, "diagonal auxiliary pairs are identically zero");
        self.forms[l * self.r + k] = form.map(|v| 0.0 - v);
        self.forms[k * self.r + l] = form;
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { n: self.n, r: self.r, forms: self.forms.iter().map(|f| f * s).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.forms.iter().map(max_abs).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.forms.iter().all(|f| f.iter().all(|&v| v == 0.0))
    }

    /// Worst violation of the family invariants (pair and base antisymmetry).
    pub fn invariant_residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for k in 0..self.r {
            for l in 0..self.r {
                let f = self.get(k, l);
                worst = worst.max(max_abs(&(f + f.transpose())));
                worst = worst.max(max_abs(&(f + self.get(l, k))));
            }
        }
        worst
    }

    /// Ordered pairs `k < l`.
    pub fn upper_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let r = self.r;
        (0..r).flat_map(move |k| (k + 1..r).map(move |l| (k, l)))
    }
}

/// A consistent pointwise package `(rep, R, Θ, ψ)` with optional ψ′.
#[derive(Clone, Debug)]
pub struct GeometricDatum {
    pub rep: CliffordRep,
    pub curvature: CurvatureTensor,
    pub theta: TwoFormFamily,
    pub psi: Spinor,
    pub psi_prime: Option<Spinor>,
    pub label: String,
    pub seed: Option<u64>,
}

#[derive(Serialize, Deserialize)]
struct RawDatum {
    rep: RepSpec,
    #[serde(rename = "R")]
    curvature: CurvatureTensor,
    #[serde(rename = "Theta")]
    theta: TwoFormFamily,
    psi: Spinor,
    #[serde(rename = "psiPrime", default, skip_serializing_if = "Option::is_none")]
    psi_prime: Option<Spinor>,
    label: String,
    #[serde(default)]
    seed: Option<u64>,
}

impl Serialize for GeometricDatum {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RawDatum {
            rep: self.rep.spec(),
            curvature: self.curvature.clone(),
            theta: self.theta.clone(),
            psi: self.psi.clone(),
            psi_prime: self.psi_prime.clone(),
            label: self.label.clone(),
            seed: self.seed,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GeometricDatum {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = RawDatum::deserialize(d)?;
        let rep = CliffordRep::from_spec(&raw.rep).map_err(D::Error::custom)?;
        let datum = GeometricDatum {
            rep,
            curvature: raw.curvature,
            theta: raw.theta,
            psi: raw.psi,
            psi_prime: raw.psi_prime,
            label: raw.label,
            seed: raw.seed,
        };
        datum.check_shapes().map_err(D::Error::custom)?;
        Ok(datum)
    }
}

impl GeometricDatum {
    pub fn n(&self) -> usize {
        self.rep.n()
    }

    pub fn r(&self) -> usize {
        self.rep.r()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    /// Dimensions of every part agree with the representation.
    pub fn check_shapes(&self) -> Result<()> {
        check_dim(self.rep.n(), self.curvature.n())?;
        check_dim(self.rep.n(), self.theta.n())?;
        check_dim(self.rep.r(), self.theta.r())?;
        check_dim(self.rep.dim(), self.psi.dim())?;
        if let Some(p) = &self.psi_prime {
            check_dim(self.rep.dim(), p.dim())?;
        }
        Ok(())
    }

    /// Shapes, unit ψ and the parallel constraint.
    pub fn validate(&self) -> Result<()> {
        self.check_shapes()?;
        let norm_dev = (self.psi.norm() - 1.0).abs();
        if norm_dev > 1e-12 {
            return Err(Error::InconsistentDatum(format!("|psi| deviates from 1 by {norm_dev:e}")));
        }
        let res = parallel_constraint_residual(self)?;
        if res > tolerances::PARALLEL {
            return Err(Error::InconsistentDatum(format!("parallel-constraint residual {res:e}")));
        }
        Ok(())
    }
}

/// `η_{kl}(e_i, e_j) = Re⟨(e_i e_j + δ_{ij}) f_k f_l ψ, ψ⟩`.
pub fn eta_forms(rep: &CliffordRep, psi: &Spinor) -> Result<TwoFormFamily> {
    Ok(eta_forms_detailed(rep, psi)?.0)
}

/// As [`eta_forms`], also returning the largest imaginary part of the
/// underlying expectations (zero up to rounding: `e_i e_j f_k f_l` is Hermitian).
pub fn eta_forms_detailed(rep: &CliffordRep, psi: &Spinor) -> Result<(TwoFormFamily, f64)> {
    check_dim(rep.dim(), psi.dim())?;
    let (n, r) = (rep.n(), rep.r());
    let mut fam = TwoFormFamily::zeros(n, r);
    let e_psi: Vec<DVector<C64>> = (0..n).map(|i| rep.apply_base(i, psi.coeffs())).collect();
    let mut worst_imag = 0.0_f64;
    for k in 0..r {
        for l in k + 1..r {
            let v = rep.pair(k, l).apply(psi.coeffs());
            let e_v: Vec<DVector<C64>> = (0..n).map(|j| rep.apply_base(j, &v)).collect();
            let mut form = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in i + 1..n {
                    // ⟨e_i e_j v, ψ⟩ = −⟨e_j v, e_i ψ⟩ since e_i is skew-Hermitian
                    let z = -herm_dot(&e_v[j], &e_psi[i]);
                    worst_imag = worst_imag.max(z.im.abs());
                    form[(i, j)] = z.re;
                    form[(j, i)] = -z.re;
                }
            }
            fam.set_pair(k, l, form);
        }
    }
    Ok((fam, worst_imag))
}

/// Def.-style twisted purity: `η̂_{kl}∘η̂_{kl} = −Id` and, for `r ≠ 2`,
/// `(η_{kl} + 2 f_k f_l)·ψ = 0`, for every `k < l`.
pub fn twisted_pure_check(rep: &CliffordRep, psi: &Spinor, tol: f64) -> Result<VerificationReport> {
    let eta = eta_forms(rep, psi)?;
    let n = rep.n();
    let id = DMatrix::<f64>::identity(n, n);
    let mut report = VerificationReport::new("twisted_pure", tol)
        .input("n", n)
        .input("r", rep.r())
        .input("m", rep.m());
    for (k, l) in eta.upper_pairs() {
        let e = hat(eta.get(k, l));
        report = report.residual(format!("square_{k}{l}"), max_abs(&(&e * &e + &id)));
        if rep.r() != 2 {
            let act = rep.two_form_op(eta.get(k, l))?.apply(psi.coeffs());
            let pair = rep.pair(k, l).apply(psi.coeffs()) * C64::new(2.0, 0.0);
            report = report.residual(format!("annihilate_{k}{l}"), (act + pair).norm());
        }
    }
    Ok(report.finish())
}

/// A spinor-valued one-form: component `j` is the coefficient of `e^j`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinorForm {
    pub components: Vec<DVector<C64>>,
}

impl SpinorForm {
    pub fn zeros(n: usize, dim: usize) -> Self {
        Self { components: vec![DVector::zeros(dim); n] }
    }

    /// `Σ_j Re⟨a_j, b_j⟩`.
    pub fn real_inner(&self, other: &SpinorForm) -> f64 {
        self.components.iter().zip(&other.components).map(|(a, b)| herm_dot(a, b).re).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.components.iter().map(|c| c.norm_squared()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn sub(&self, other: &SpinorForm) -> SpinorForm {
        SpinorForm { components: self.components.iter().zip(&other.components).map(|(a, b)| a - b).collect() }
    }

    pub fn add(&self, other: &SpinorForm) -> SpinorForm {
        SpinorForm { components: self.components.iter().zip(&other.components).map(|(a, b)| a + b).collect() }
    }

    pub fn scale(&self, s: f64) -> SpinorForm {
        SpinorForm { components: self.components.iter().map(|a| a * C64::new(s, 0.0)).collect() }
    }
}

/// `Φ(A)_j = Σ_i A_{ij} e_i·ψ`, for any square `A`.
pub fn phi_map(rep: &CliffordRep, psi: &Spinor, a: &DMatrix<f64>) -> Result<SpinorForm> {
    check_dim(rep.dim(), psi.dim())?;
    let n = rep.n();
    check_dim(n, a.nrows())?;
    check_dim(n, a.ncols())?;
    let e_psi: Vec<DVector<C64>> = (0..n).map(|i| rep.apply_base(i, psi.coeffs())).collect();
    Ok(phi_from_images(&e_psi, a))
}

pub(crate) fn phi_from_images(e_psi: &[DVector<C64>], a: &DMatrix<f64>) -> SpinorForm {
    let n = e_psi.len();
    let dim = e_psi.first().map_or(0, |v| v.len());
    let components = (0..n)
        .map(|j| {
            let mut acc = DVector::zeros(dim);
            for (i, ei) in e_psi.iter().enumerate() {
                let c = a[(i, j)];
                if c != 0.0 {
                    acc += ei * C64::new(c, 0.0);
                }
            }
            acc
        })
        .collect();
    SpinorForm { components }
}

/// All products `e_k e_l ψ`, indexed `k * n + l`.
pub(crate) fn double_images(rep: &CliffordRep, psi: &DVector<C64>) -> Vec<DVector<C64>> {
    let n = rep.n();
    let singles: Vec<DVector<C64>> = (0..n).map(|l| rep.apply_base(l, psi)).collect();
    (0..n * n).map(|kl| rep.apply_base(kl / n, &singles[kl % n])).collect()
}

fn curvature_part(r: &CurvatureTensor, ee: &[DVector<C64>], p: usize, j: usize, dim: usize) -> DVector<C64> {
    let n = r.n();
    let mut acc = DVector::zeros(dim);
    for k in 0..n {
        for l in 0..n {
            let c = r.get(p, j, k, l);
            if c != 0.0 {
                acc += &ee[k * n + l] * C64::new(c, 0.0);
            }
        }
    }
    acc
}

/// `max_{p,j} |Σ_{kl} R_{pjkl} e_k e_l ψ + Σ_{kl} (Θ_{kl})_{pj} f_k f_l ψ|`.
pub fn parallel_constraint_residual(datum: &GeometricDatum) -> Result<f64> {
    datum.check_shapes()?;
    let (rep, psi) = (&datum.rep, datum.psi.coeffs());
    let (n, r, dim) = (rep.n(), rep.r(), rep.dim());
    let ee = double_images(rep, psi);
    let ff: Vec<DVector<C64>> = (0..r * r).map(|kl| rep.pair(kl / r, kl % r).apply(psi)).collect();
    let mut worst = 0.0_f64;
    for p in 0..n {
        for j in 0..n {
            let mut v = curvature_part(&datum.curvature, &ee, p, j, dim);
            for k in 0..r {
                for l in 0..r {
                    let c = datum.theta.get(k, l)[(p, j)];
                    if c != 0.0 {
                        v += &ff[k * r + l] * C64::new(c, 0.0);
                    }
                }
            }
            worst = worst.max(v.norm());
        }
    }
    Ok(worst)
}

#[derive(Clone, Debug)]
pub struct ThetaSolution {
    pub theta: TwoFormFamily,
    /// Largest per-(p, j) least-squares residual norm.
    pub residual: f64,
    pub rank: usize,
    pub degenerate: bool,
}

/// Least-squares Θ for the parallel constraint, given `R` and `ψ`.
///
/// For each `p < j` the unknowns are `(Θ_{kl})_{pj}`, `k < l`; the ordered sum
/// over `(k, l)` contributes `2 (Θ_{kl})_{pj} f_k f_l ψ`. Real and imaginary
/// parts are stacked so the unknowns stay real.
pub fn solve_theta(rep: &CliffordRep, r: &CurvatureTensor, psi: &Spinor) -> Result<ThetaSolution> {
    check_dim(rep.n(), r.n())?;
    check_dim(rep.dim(), psi.dim())?;
    let (n, rr, dim) = (rep.n(), rep.r(), rep.dim());
    if rr < 2 {
        return Err(Error::InvalidArgument("solving for Θ needs r >= 2".into()));
    }
    let pairs: Vec<(usize, usize)> = (0..rr).flat_map(|k| (k + 1..rr).map(move |l| (k, l))).collect();
    let mut a = DMatrix::<f64>::zeros(2 * dim, pairs.len());
    for (c, &(k, l)) in pairs.iter().enumerate() {
        let col = rep.pair(k, l).apply(psi.coeffs());
        for t in 0..dim {
            a[(t, c)] = 2.0 * col[t].re;
            a[(dim + t, c)] = 2.0 * col[t].im;
        }
    }
    let solver = LeastSquaresSolver::new(a, 1e-10);
    let ee = double_images(rep, psi.coeffs());
    let mut theta = TwoFormFamily::zeros(n, rr);
    let mut comps = vec![DMatrix::<f64>::zeros(n, n); pairs.len()];
    let mut residual = 0.0_f64;
    for p in 0..n {
        for j in p + 1..n {
            let v = curvature_part(r, &ee, p, j, dim);
            let b = DVector::from_iterator(2 * dim, v.iter().map(|z| -z.re).chain(v.iter().map(|z| -z.im)));
            let sol = solver.solve(&b);
            residual = residual.max(sol.residual);
            for (c, x) in sol.x.iter().enumerate() {
                comps[c][(p, j)] = *x;
                comps[c][(j, p)] = -*x;
            }
        }
    }
    for (c, &(k, l)) in pairs.iter().enumerate() {
        theta.set_pair(k, l, std::mem::replace(&mut comps[c], DMatrix::zeros(0, 0)));
    }
    let rank = solver.rank();
    Ok(ThetaSolution { theta, residual, rank, degenerate: rank < pairs.len() })
}

/// `Σ_{kl} η̂_{kl} · Θ̂_{kl}` over all ordered pairs.
pub fn eta_theta_contraction(eta: &TwoFormFamily, theta: &TwoFormFamily) -> DMatrix<f64> {
    let n = eta.n();
    let mut acc = DMatrix::zeros(n, n);
    for k in 0..eta.r() {
        for l in 0..eta.r() {
            if k != l {
                acc += hat(eta.get(k, l)) * hat(theta.get(k, l));
            }
        }
    }
    acc
}

/// `|ψ′|² Ric = η̂^{ψ′}_{kl}∘Θ̂_{kl}` with `(k, l)` fully summed.
///
/// The deviation of the half-sum form `|ψ′|² Ric = ½ Σ_{kl} η̂_{kl}∘Θ̂_{kl}`,
/// which is what contracting the parallel constraint gives directly, is
/// reported as an informational value.
pub fn eh_ricci_identity_check(datum: &GeometricDatum, tol: f64) -> Result<VerificationReport> {
    let psi_prime = datum
        .psi_prime
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("identity needs a purity-normalised spinor".into()))?;
    let eta = eta_forms(&datum.rep, psi_prime)?;
    let lhs = datum.curvature.ricci().matrix() * psi_prime.norm_sq();
    let rhs = eta_theta_contraction(&eta, &datum.theta);
    let n = datum.n() as f64;
    Ok(VerificationReport::new("eh_ricci_identity", tol)
        .input("label", datum.label.as_str())
        .input("n", datum.n())
        .input("r", datum.r())
        .residual("deviation", max_abs(&(&lhs - &rhs)))
        .value("half_sum_deviation", max_abs(&(&lhs - &rhs * 0.5)))
        .value("lhs_trace_over_n", lhs.trace() / n)
        .value("rhs_trace_over_n", rhs.trace() / n)
        .finish())
}

#[derive(Clone, Debug)]
pub struct Normalized {
    pub psi_prime: Spinor,
    /// Common value of `√(tr(−η̂²)/n)` before normalisation.
    pub scale: f64,
    /// Largest minus smallest per-pair scale.
    pub spread: f64,
}

/// Rescales `ψ₀` so that `η̂^{ψ′}_{kl}∘η̂^{ψ′}_{kl} = −Id` for every pair.
pub fn normalize_pure(rep: &CliffordRep, psi0: &Spinor) -> Result<Normalized> {
    if rep.r() < 2 {
        return Err(Error::NotPurifiable("no auxiliary pairs (r < 2)".into()));
    }
    let eta = eta_forms(rep, psi0)?;
    let n = rep.n();
    let id = DMatrix::<f64>::identity(n, n);
    let mut scales = Vec::new();
    for (k, l) in eta.upper_pairs() {
        let e = hat(eta.get(k, l));
        let sq = &e * &e;
        let c = -sq.trace() / n as f64;
        if c <= 0.0 {
            return Err(Error::NotPurifiable(format!("η_{k}{l} squares to a non-negative trace")));
        }
        let dev = max_abs(&(&sq + &id * c)) / c;
        if dev > 1e-8 {
            return Err(Error::NotPurifiable(format!("η̂_{k}{l}² is not a multiple of Id (relative deviation {dev:e})")));
        }
        scales.push(c.sqrt());
    }
    let mean = scales.iter().sum::<f64>() / scales.len() as f64;
    let spread = scales.iter().copied().fold(f64::MIN, f64::max) - scales.iter().copied().fold(f64::MAX, f64::min);
    if spread > 1e-8 * mean {
        return Err(Error::NotPurifiable(format!("pair scales disagree (spread {spread:e}, mean {mean})")));
    }
    Ok(Normalized { psi_prime: psi0.scaled(1.0 / mean.sqrt()), scale: mean, spread })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::build_twisted_rep;
    use crate::curvature::{random_curvature, SymTensor2};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    /// η computed straight from the definition with dense matrices.
    fn eta_oracle(rep: &CliffordRep, psi: &Spinor, k: usize, l: usize) -> DMatrix<f64> {
        let n = rep.n();
        let ff = rep.pair(k, l).to_dense();
        let id = DMatrix::<C64>::identity(rep.dim(), rep.dim());
        DMatrix::from_fn(n, n, |i, j| {
            let w = rep.base(i).to_dense() * rep.base(j).to_dense() + if i == j { id.clone() } else { id.scale(0.0) };
            let v = w * &ff * psi.coeffs();
            herm_dot(&v, psi.coeffs()).re
        })
    }

    #[test]
    fn hat_examples() {
        assert_eq!(hat(&DMatrix::zeros(3, 3)), DMatrix::<f64>::zeros(3, 3));
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 5.0]);
        assert_eq!(hat(&s), s);
        let j = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert_eq!(hat(&j) * hat(&j), -DMatrix::<f64>::identity(2, 2));
    }

    #[test]
    fn eta_matches_definition() {
        let rep = build_twisted_rep(4, 3, 1).unwrap();
        let psi = Spinor::random_unit(rep.dim(), &mut rng(1));
        let (eta, imag) = eta_forms_detailed(&rep, &psi).unwrap();
        assert!(imag < 1e-14);
        for (k, l) in [(0, 1), (0, 2), (1, 2), (2, 0)] {
            assert!(max_abs(&(eta.get(k, l) - eta_oracle(&rep, &psi, k, l))) < 1e-14);
        }
        assert!(eta.invariant_residual() == 0.0);
        for k in 0..3 {
            assert!(eta.get(k, k).iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn eta_of_zero_and_scaling() {
        let rep = build_twisted_rep(4, 3, 2).unwrap();
        assert!(eta_forms(&rep, &Spinor::zeros(rep.dim())).unwrap().is_zero());
        let psi = Spinor::random_unit(rep.dim(), &mut rng(2));
        let eta = eta_forms(&rep, &psi).unwrap();
        let eta3 = eta_forms(&rep, &psi.scaled(3.0)).unwrap();
        assert!((eta3.scaled(1.0 / 9.0).max_abs() - eta.max_abs()).abs() < 1e-14);
        for (k, l) in eta.upper_pairs() {
            assert!(max_abs(&(eta3.get(k, l) - eta.get(k, l) * 9.0)) < 1e-14);
        }
    }

    #[test]
    fn random_spinor_is_not_pure() {
        let rep = build_twisted_rep(4, 3, 1).unwrap();
        let psi = Spinor::random_unit(rep.dim(), &mut rng(3));
        let report = twisted_pure_check(&rep, &psi, 1e-9).unwrap();
        assert!(!report.pass);
        assert!(report.residuals["square_01"] > 1e-3);
        assert!(normalize_pure(&rep, &psi).is_err());
    }

    #[test]
    fn phi_examples() {
        let rep = build_twisted_rep(6, 2, 1).unwrap();
        let psi = Spinor::random_unit(rep.dim(), &mut rng(4));
        assert_eq!(phi_map(&rep, &psi, &DMatrix::zeros(6, 6)).unwrap().norm_sq(), 0.0);
        let id = phi_map(&rep, &psi, &DMatrix::identity(6, 6)).unwrap();
        assert!((id.norm_sq() - 6.0).abs() < 1e-13);
        assert!(phi_map(&rep, &psi, &DMatrix::zeros(5, 5)).is_err());
    }

    #[test]
    fn phi_is_isometric() {
        let rep = build_twisted_rep(4, 3, 1).unwrap();
        let mut g = rng(5);
        let psi = Spinor::random_unit(rep.dim(), &mut g);
        for _ in 0..20 {
            let (h, h2) = (SymTensor2::random(4, &mut g), SymTensor2::random(4, &mut g));
            let a = phi_map(&rep, &psi, h.matrix()).unwrap();
            let b = phi_map(&rep, &psi, h2.matrix()).unwrap();
            let oracle: f64 = h.matrix().component_mul(h2.matrix()).sum();
            assert!((a.real_inner(&b) - oracle).abs() < 1e-12 * (1.0 + oracle.abs()));
            assert!((a.norm_sq() - h.norm_sq()).abs() < 1e-12 * h.norm_sq());
        }
    }

    #[test]
    fn phi_isometry_independent_of_conjugation_slot() {
        // Re⟨a,b⟩ is symmetric, so flipping which slot is conjugated changes nothing.
        let rep = build_twisted_rep(4, 2, 1).unwrap();
        let mut g = rng(6);
        let psi = Spinor::random_unit(rep.dim(), &mut g);
        let h = SymTensor2::random(4, &mut g);
        let h2 = SymTensor2::random(4, &mut g);
        let a = phi_map(&rep, &psi, h.matrix()).unwrap();
        let b = phi_map(&rep, &psi, h2.matrix()).unwrap();
        assert!((a.real_inner(&b) - b.real_inner(&a)).abs() < 1e-14);
    }

    #[test]
    fn solve_theta_on_flat_data_is_zero() {
        let rep = build_twisted_rep(4, 3, 1).unwrap();
        let psi = Spinor::random_unit(rep.dim(), &mut rng(7));
        let sol = solve_theta(&rep, &CurvatureTensor::zeros(4), &psi).unwrap();
        assert!(sol.theta.is_zero());
        assert_eq!(sol.residual, 0.0);
        let rep1 = build_twisted_rep(4, 1, 1).unwrap();
        assert!(solve_theta(&rep1, &CurvatureTensor::zeros(4), &Spinor::zeros(rep1.dim())).is_err());
    }

    #[test]
    fn solved_theta_reaches_least_squares_residual() {
        // a random spinor admits no exact Θ; the solver must still report the
        // normal-equation optimum, checked against small perturbations.
        let rep = build_twisted_rep(4, 3, 1).unwrap();
        let mut g = rng(8);
        let psi = Spinor::random_unit(rep.dim(), &mut g);
        let r = random_curvature(4, 1).unwrap();
        let sol = solve_theta(&rep, &r, &psi).unwrap();
        assert!(!sol.degenerate);
        let base = GeometricDatum {
            rep: rep.clone(),
            curvature: r.clone(),
            theta: sol.theta.clone(),
            psi: psi.clone(),
            psi_prime: None,
            label: "test".into(),
            seed: None,
        };
        let res0 = parallel_constraint_residual(&base).unwrap();
        assert!(res0 > 0.0);
        for _ in 0..5 {
            let mut t = sol.theta.clone();
            let mut d = DMatrix::zeros(4, 4);
            let x: f64 = g.sample::<f64, _>(StandardNormal) * 1e-3;
            d[(0, 1)] = x;
            d[(1, 0)] = -x;
            t.set_pair(0, 1, t.get(0, 1) + &d);
            let perturbed = GeometricDatum { theta: t, ..base.clone() };
            assert!(parallel_constraint_residual(&perturbed).unwrap() >= res0 - 1e-12);
        }
    }

    #[test]
    fn family_json() {
        let mut fam = TwoFormFamily::zeros(2, 2);
        fam.set_pair(0, 1, DMatrix::from_row_slice(2, 2, &[0.0, 1.5, -1.5, 0.0]));
        let json = serde_json::to_string(&fam).unwrap();
        assert_eq!(
            json,
            r#"{"n":2,"r":2,"forms":[[[0.0,0.0,0.0,0.0],[0.0,1.5,-1.5,0.0]],[[0.0,-1.5,1.5,0.0],[0.0,0.0,0.0,0.0]]]}"#
        );
        assert_eq!(serde_json::from_str::<TwoFormFamily>(&json).unwrap(), fam);
        let broken = json.replace("-1.5,1.5", "1.5,1.5");
        assert!(serde_json::from_str::<TwoFormFamily>(&broken).is_err());
    }

    #[test]
    fn eh_identity_needs_psi_prime() {
        let rep = build_twisted_rep(4, 3, 1).unwrap();
        let datum = GeometricDatum {
            theta: TwoFormFamily::zeros(4, 3),
            curvature: CurvatureTensor::zeros(4),
            psi: Spinor::random_unit(rep.dim(), &mut rng(9)),
            psi_prime: None,
            label: "flat".into(),
            seed: Some(9),
            rep,
        };
        assert!(eh_ricci_identity_check(&datum, 1e-9).is_err());
        let with = GeometricDatum { psi_prime: Some(datum.psi.clone()), ..datum };
        let report = eh_ricci_identity_check(&with, 1e-9).unwrap();
        assert!(report.pass);
        assert_eq!(report.residuals["deviation"], 0.0);
    }
}
