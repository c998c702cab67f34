//! Complex representations of the Clifford algebra of `TM ⊕ F` on the twisted
//! spinor module `ΣM ⊗ (ΣF)^{⊗m}`.
//!
//! Base generators square to `-1`, so `X ∧ Y := XY + g(X, Y)` vanishes on
//! `X = Y`. Generators are built from Pauli strings (Jordan–Wigner), which
//! makes every one of them skew-Hermitian, unitary and monomial.
//!
//! For `m = 1` the auxiliary generators are `f_k = ω ⊗ δ_k`, where `ω` is the
//! Hermitian base volume element (`ω² = 1`, anticommuting with every base
//! generator) and `δ_k` generate `Cl(r)`. This needs `n` even. For `m > 1`
//! only the degree-two elements `f_k f_l` are realised, acting as a
//! derivation on the tensor power.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{herm_dot, kron_all, SparseOp, C64, I, ONE};

pub const CONSTRUCTION_TAG: &str = "jordan-wigner/volume-twist";

fn pauli_x() -> SparseOp {
    SparseOp::from_rows(2, vec![vec![(1, ONE)], vec![(0, ONE)]])
}

fn pauli_y() -> SparseOp {
    SparseOp::from_rows(2, vec![vec![(1, -I)], vec![(0, I)]])
}

fn pauli_z() -> SparseOp {
    SparseOp::diagonal(&[ONE, -ONE])
}

/// Hermitian generators `γ_i` with `γ_i γ_j + γ_j γ_i = 2δ_{ij}` of size `2^⌊n/2⌋`.
fn hermitian_gammas(n: usize) -> Vec<SparseOp> {
    let k = n / 2;
    let (x, y, z, id) = (pauli_x(), pauli_y(), pauli_z(), SparseOp::identity(2));
    let string = |j: usize, mid: &SparseOp| {
        let mut factors: Vec<&SparseOp> = Vec::with_capacity(k);
        factors.extend(std::iter::repeat_n(&z, j));
        factors.push(mid);
        factors.extend(std::iter::repeat_n(&id, k - j - 1));
        kron_all(&factors)
    };
    let mut out = Vec::with_capacity(n);
    for j in 0..k {
        out.push(string(j, &x));
        out.push(string(j, &y));
    }
    if n % 2 == 1 {
        out.push(volume_element(n));
    }
    out
}

/// `Z^{⊗⌊n/2⌋}`: Hermitian, squares to the identity, and anticommutes with all
/// `2⌊n/2⌋` Jordan–Wigner generators.
fn volume_element(n: usize) -> SparseOp {
    let z = pauli_z();
    kron_all(&vec![&z; n / 2])
}

/// Skew-Hermitian unitary generators `e_1, …, e_n` with `e_i e_j + e_j e_i = -2δ_{ij}`.
pub fn build_gamma(n: usize) -> Result<Vec<SparseOp>> {
    if n == 0 {
        return Err(Error::InvalidDimension("Clifford generators need n >= 1".into()));
    }
    Ok(hermitian_gammas(n).iter().map(|g| g.scale(-I)).collect())
}

/// A twisted spinor: coefficients in the standard basis of the module.
#[derive(Clone, Debug, PartialEq)]
pub struct Spinor {
    coeffs: DVector<C64>,
}

impl Spinor {
    pub fn new(coeffs: DVector<C64>) -> Self {
        Self { coeffs }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { coeffs: DVector::zeros(dim) }
    }

    /// Random spinor of unit norm with Gaussian coefficients.
    pub fn random_unit<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let coeffs = DVector::from_iterator(
            dim,
            (0..dim).map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))),
        );
        let norm = coeffs.norm();
        Self { coeffs: coeffs / C64::new(norm, 0.0) }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &DVector<C64> {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> DVector<C64> {
        self.coeffs
    }

    pub fn norm_sq(&self) -> f64 {
        self.coeffs.norm_squared()
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.norm()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { coeffs: &self.coeffs * C64::new(s, 0.0) }
    }

    pub fn normalized(&self) -> Self {
        self.scaled(1.0 / self.norm())
    }
}

impl Serialize for Spinor {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.coeffs.iter().map(|c| [c.re, c.im]).collect();
        pairs.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Spinor {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(deserializer)?;
        Ok(Self::new(DVector::from_iterator(pairs.len(), pairs.into_iter().map(|[re, im]| C64::new(re, im)))))
    }
}

/// Parameters from which a representation is rebuilt deterministically.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepSpec {
    pub n: usize,
    pub r: usize,
    pub m: usize,
    pub construction: String,
}

#[derive(Clone, Debug)]
pub struct CliffordRep {
    n: usize,
    r: usize,
    m: usize,
    dim: usize,
    base: Vec<SparseOp>,
    aux: Vec<SparseOp>,
    pairs: Vec<SparseOp>,
    chirality: Option<SparseOp>,
}

/// Builds the Clifford action of `TM ⊕ F` on `Σ(M, F, m)`, of complex
/// dimension `2^⌊n/2⌋ · (2^⌊r/2⌋)^m`.
pub fn build_twisted_rep(n: usize, r: usize, m: usize) -> Result<CliffordRep> {
    if n == 0 {
        return Err(Error::InvalidDimension("base dimension must be >= 1".into()));
    }
    if m == 0 {
        return Err(Error::InvalidDimension("twist exponent must be >= 1".into()));
    }
    if m == 1 && r > 0 && n % 2 == 1 {
        return Err(Error::Unsupported(format!(
            "odd base dimension n = {n} with auxiliary generators: the volume twist needs n even"
        )));
    }

    let gammas = build_gamma(n)?;
    let aux_gens = if r > 0 { build_gamma(r)? } else { Vec::new() };
    let slot_dim = aux_gens.first().map_or(1, SparseOp::dim);
    let slot_id = SparseOp::identity(slot_dim);
    let tail_dim = slot_dim.pow(m as u32);
    let tail_id = SparseOp::identity(tail_dim);
    let base_dim = gammas[0].dim();

    let base: Vec<SparseOp> = gammas.iter().map(|g| g.kron(&tail_id)).collect();
    let chirality = n.is_multiple_of(2).then(|| volume_element(n).kron(&tail_id));

    let (aux, pairs) = if m == 1 {
        let omega = volume_element(n);
        let aux: Vec<SparseOp> = aux_gens.iter().map(|d| omega.kron(d)).collect();
        let pairs = (0..r * r).map(|kl| &aux[kl / r] * &aux[kl % r]).collect();
        (aux, pairs)
    } else {
        let base_id = SparseOp::identity(base_dim);
        let pairs = (0..r * r)
            .map(|kl| {
                let slot_pair = &aux_gens[kl / r] * &aux_gens[kl % r];
                let terms: Vec<SparseOp> = (0..m)
                    .map(|s| {
                        let mut factors: Vec<&SparseOp> = vec![&base_id];
                        factors.extend(std::iter::repeat_n(&slot_id, s));
                        factors.push(&slot_pair);
                        factors.extend(std::iter::repeat_n(&slot_id, m - s - 1));
                        kron_all(&factors)
                    })
                    .collect();
                SparseOp::linear_combination(base_dim * tail_dim, terms.iter().map(|t| (ONE, t)))
            })
            .collect();
        (Vec::new(), pairs)
    };

    Ok(CliffordRep { n, r, m, dim: base_dim * tail_dim, base, aux, pairs, chirality })
}

impl CliffordRep {
    pub fn from_spec(spec: &RepSpec) -> Result<Self> {
        if spec.construction != CONSTRUCTION_TAG {
            return Err(Error::Unsupported(format!("unknown construction tag {:?}", spec.construction)));
        }
        build_twisted_rep(spec.n, spec.r, spec.m)
    }

    pub fn spec(&self) -> RepSpec {
        RepSpec { n: self.n, r: self.r, m: self.m, construction: CONSTRUCTION_TAG.to_string() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `e_i`, zero-based.
    pub fn base(&self, i: usize) -> &SparseOp {
        &self.base[i]
    }

    pub fn base_generators(&self) -> &[SparseOp] {
        &self.base
    }

    /// `f_k`, zero-based; only realised for `m = 1`.
    pub fn aux(&self, k: usize) -> Option<&SparseOp> {
        self.aux.get(k)
    }

    pub fn aux_generators(&self) -> &[SparseOp] {
        &self.aux
    }

    /// Action of the degree-two element `f_k f_l`.
    pub fn pair(&self, k: usize, l: usize) -> &SparseOp {
        &self.pairs[k * self.r + l]
    }

    /// Base volume element `ω ⊗ 1` (even `n` only).
    pub fn chirality(&self) -> Option<&SparseOp> {
        self.chirality.as_ref()
    }

    fn check_spinor(&self, s: &Spinor) -> Result<()> {
        check_dim(self.dim, s.dim())
    }

    pub fn apply_base(&self, i: usize, s: &DVector<C64>) -> DVector<C64> {
        self.base[i].apply(s)
    }

    /// Clifford action of `v ∈ R^n ⊕ R^r`. `v` may also have length `n`.
    pub fn act_vector(&self, v: &[f64], s: &Spinor) -> Result<Spinor> {
        self.check_spinor(s)?;
        if v.len() != self.n && v.len() != self.n + self.r {
            return Err(Error::DimensionMismatch { expected: self.n + self.r, got: v.len() });
        }
        let aux_part = &v[self.n.min(v.len())..];
        if aux_part.iter().any(|&x| x != 0.0) && self.aux.is_empty() {
            return Err(Error::Unsupported("single auxiliary generators exist only for m = 1".into()));
        }
        let mut out = DVector::zeros(self.dim);
        for (i, &x) in v[..self.n].iter().enumerate() {
            if x != 0.0 {
                out += self.base[i].apply(s.coeffs()) * C64::new(x, 0.0);
            }
        }
        for (k, &x) in aux_part.iter().enumerate() {
            if x != 0.0 {
                out += self.aux[k].apply(s.coeffs()) * C64::new(x, 0.0);
            }
        }
        Ok(Spinor::new(out))
    }

    /// `X·Y·s + g(X, Y) s` for base vectors `X`, `Y`.
    pub fn act_wedge(&self, x: &[f64], y: &[f64], s: &Spinor) -> Result<Spinor> {
        check_dim(self.n, x.len())?;
        check_dim(self.n, y.len())?;
        let ys = self.act_vector(y, s)?;
        let xys = self.act_vector(x, &ys)?;
        let g: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
        Ok(Spinor::new(xys.into_coeffs() + s.coeffs() * C64::new(g, 0.0)))
    }

    fn check_two_form(&self, omega: &DMatrix<f64>) -> Result<()> {
        if omega.nrows() != self.n || omega.ncols() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: omega.nrows() });
        }
        let scale = omega.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        let asym = (omega + omega.transpose()).iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if asym > 1e-12 * scale {
            return Err(Error::InvalidArgument(format!("two-form is not antisymmetric (residual {asym:e})")));
        }
        Ok(())
    }

    /// `Σ_{i<j} ω_{ij} e_i e_j · s`.
    pub fn act_two_form(&self, omega: &DMatrix<f64>, s: &Spinor) -> Result<Spinor> {
        self.check_two_form(omega)?;
        self.check_spinor(s)?;
        let mut out = DVector::zeros(self.dim);
        for j in 0..self.n {
            let ej = self.base[j].apply(s.coeffs());
            let mut acc = DVector::zeros(self.dim);
            let mut any = false;
            for i in 0..j {
                if omega[(i, j)] != 0.0 {
                    acc += self.base[i].apply(&ej) * C64::new(omega[(i, j)], 0.0);
                    any = true;
                }
            }
            if any {
                out += acc;
            }
        }
        Ok(Spinor::new(out))
    }

    /// The operator `Σ_{i<j} ω_{ij} e_i e_j`.
    pub fn two_form_op(&self, omega: &DMatrix<f64>) -> Result<SparseOp> {
        self.check_two_form(omega)?;
        let products: Vec<(C64, SparseOp)> = (0..self.n)
            .flat_map(|i| (i + 1..self.n).map(move |j| (i, j)))
            .filter(|&(i, j)| omega[(i, j)] != 0.0)
            .map(|(i, j)| (C64::new(omega[(i, j)], 0.0), &self.base[i] * &self.base[j]))
            .collect();
        Ok(SparseOp::linear_combination(self.dim, products.iter().map(|(c, op)| (*c, op))))
    }

    /// Hermitian product, conjugate-linear in the second slot.
    pub fn herm_inner(&self, a: &Spinor, b: &Spinor) -> Result<C64> {
        self.check_spinor(a)?;
        self.check_spinor(b)?;
        Ok(herm_dot(a.coeffs(), b.coeffs()))
    }

    /// Largest absolute deviation from the Clifford relations of `TM ⊕ F` and
    /// the pair-action invariants.
    pub fn relation_residual(&self) -> f64 {
        let id = SparseOp::identity(self.dim);
        let anti = |a: &SparseOp, b: &SparseOp, delta: bool| {
            let s = &(a * b) + &(b * a);
            let target = if delta { id.scale_real(-2.0) } else { SparseOp::zero(self.dim) };
            (&s - &target).max_abs()
        };
        let mut worst = 0.0_f64;
        for i in 0..self.n {
            for j in 0..self.n {
                worst = worst.max(anti(&self.base[i], &self.base[j], i == j));
            }
            for f in &self.aux {
                worst = worst.max(anti(&self.base[i], f, false));
            }
        }
        for k in 0..self.aux.len() {
            for l in 0..self.aux.len() {
                worst = worst.max(anti(&self.aux[k], &self.aux[l], k == l));
                worst = worst.max((&(&self.aux[k] * &self.aux[l]) - self.pair(k, l)).max_abs());
            }
        }
        for k in 0..self.r {
            for l in 0..self.r {
                if k != l {
                    worst = worst.max((self.pair(l, k) + self.pair(k, l)).max_abs());
                }
                for i in 0..self.n {
                    for j in 0..self.n {
                        let eij = &self.base[i] * &self.base[j];
                        let p = self.pair(k, l);
                        worst = worst.max((&(&eij * p) - &(p * &eij)).max_abs());
                    }
                }
            }
        }
        worst
    }

    /// Largest deviation of any generator from skew-Hermitian unitarity.
    pub fn unitarity_residual(&self) -> f64 {
        let id = SparseOp::identity(self.dim);
        self.base
            .iter()
            .chain(&self.aux)
            .map(|g| {
                let skew = (g + &g.adjoint()).max_abs();
                let unit = (&(&g.adjoint() * g) - &id).max_abs();
                skew.max(unit)
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit_vec(len: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; len];
        v[i] = 1.0;
        v
    }

    #[test]
    fn rank_one_generator() {
        let g = build_gamma(1).unwrap();
        assert_eq!(g.len(), 1);
        let d = g[0].to_dense();
        assert_eq!(d.nrows(), 1);
        assert_eq!(d[(0, 0)], C64::new(0.0, -1.0));
        assert_eq!((d.clone() * d)[(0, 0)], C64::new(-1.0, 0.0));
    }

    #[test]
    fn zero_dimension_rejected() {
        assert!(matches!(build_gamma(0), Err(Error::InvalidDimension(_))));
        assert!(matches!(build_twisted_rep(0, 1, 1), Err(Error::InvalidDimension(_))));
        assert!(matches!(build_twisted_rep(2, 1, 0), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn two_dimensional_generators_anticommute() {
        let g = build_gamma(2).unwrap();
        let (a, b) = (g[0].to_dense(), g[1].to_dense());
        assert_eq!(a.nrows(), 2);
        assert!((&a * &b + &b * &a).norm() < 1e-15);
        assert!((a.adjoint() + &a).norm() < 1e-15);
    }

    #[test]
    fn six_dimensional_relations() {
        let g = build_gamma(6).unwrap();
        assert_eq!(g[0].dim(), 8);
        let id = nalgebra::DMatrix::<C64>::identity(8, 8);
        for i in 0..6 {
            for j in 0..6 {
                let (a, b) = (g[i].to_dense(), g[j].to_dense());
                let target = if i == j { &id * C64::new(-2.0, 0.0) } else { id.scale(0.0).map(|x| x) };
                assert!((&a * &b + &b * &a - target).norm() < 1e-14, "({i},{j})");
            }
        }
    }

    #[test]
    fn twisted_dimensions() {
        assert_eq!(build_twisted_rep(2, 0, 1).unwrap().dim(), 2);
        let rep = build_twisted_rep(4, 3, 1).unwrap();
        assert_eq!(rep.dim(), 8);
        assert!(rep.relation_residual() < 1e-14);
        assert_eq!(build_twisted_rep(12, 3, 1).unwrap().dim(), 128);
        assert_eq!(build_twisted_rep(12, 3, 3).unwrap().dim(), 512);
        assert!(build_twisted_rep(2, 0, 1).unwrap().aux_generators().is_empty());
    }

    #[test]
    fn odd_base_with_auxiliary_is_unsupported() {
        assert!(matches!(build_twisted_rep(5, 2, 1), Err(Error::Unsupported(_))));
        // no auxiliary generators, or pair action only: fine
        assert!(build_twisted_rep(5, 0, 1).is_ok());
        let rep = build_twisted_rep(5, 3, 2).unwrap();
        assert!(rep.relation_residual() < 1e-14);
    }

    #[test]
    fn tensor_power_pairs_are_derivations() {
        let rep = build_twisted_rep(4, 3, 2).unwrap();
        assert!(rep.aux(0).is_none());
        assert!(rep.relation_residual() < 1e-14);
        // [P_01, P_12] = 2 P_02 on every slot, as for so(3) acting through f_k f_l / 2.
        let (p01, p12, p02) = (rep.pair(0, 1), rep.pair(1, 2), rep.pair(0, 2));
        let comm = &(p01 * p12) - &(p12 * p01);
        assert!((&comm - &p02.scale_real(-2.0)).max_abs() < 1e-14 || (&comm - &p02.scale_real(2.0)).max_abs() < 1e-14);
    }

    #[test]
    fn vector_actions_square_to_minus_norm() {
        let rep = build_twisted_rep(4, 2, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = Spinor::random_unit(rep.dim(), &mut rng);
        for idx in [0, 4] {
            let v = unit_vec(6, idx);
            let twice = rep.act_vector(&v, &rep.act_vector(&v, &s).unwrap()).unwrap();
            assert!((twice.coeffs() + s.coeffs()).norm() < 1e-14);
        }
        let mut v = vec![0.0; 6];
        v[0] = 0.6;
        v[4] = 0.8;
        let twice = rep.act_vector(&v, &rep.act_vector(&v, &s).unwrap()).unwrap();
        assert!((twice.coeffs() + s.coeffs()).norm() < 1e-14);
    }

    #[test]
    fn auxiliary_vector_needs_m_one() {
        let rep = build_twisted_rep(4, 3, 2).unwrap();
        let s = Spinor::zeros(rep.dim());
        let mut v = vec![0.0; 7];
        v[5] = 1.0;
        assert!(matches!(rep.act_vector(&v, &s), Err(Error::Unsupported(_))));
        assert!(matches!(rep.act_vector(&[1.0, 0.0], &s), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn wedge_conventions() {
        let rep = build_twisted_rep(4, 0, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = Spinor::random_unit(rep.dim(), &mut rng);
        let e1 = unit_vec(4, 0);
        let e2 = unit_vec(4, 1);
        assert!(rep.act_wedge(&e1, &e1, &s).unwrap().norm() < 1e-15);
        let w12 = rep.act_wedge(&e1, &e2, &s).unwrap();
        let direct = rep.base(0).apply(&rep.base(1).apply(s.coeffs()));
        assert!((w12.coeffs() - &direct).norm() < 1e-15);
        let w21 = rep.act_wedge(&e2, &e1, &s).unwrap();
        assert!((w12.coeffs() + w21.coeffs()).norm() < 1e-15);
    }

    #[test]
    fn two_form_action() {
        let rep = build_twisted_rep(4, 0, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s = Spinor::random_unit(rep.dim(), &mut rng);
        let zero = DMatrix::zeros(4, 4);
        assert!(rep.act_two_form(&zero, &s).unwrap().norm() == 0.0);
        let mut w = DMatrix::zeros(4, 4);
        w[(0, 1)] = 1.0;
        w[(1, 0)] = -1.0;
        let single = rep.act_two_form(&w, &s).unwrap();
        let wedge = rep.act_wedge(&unit_vec(4, 0), &unit_vec(4, 1), &s).unwrap();
        assert!((single.coeffs() - wedge.coeffs()).norm() < 1e-15);
        let op = rep.two_form_op(&w).unwrap();
        assert!((op.apply(s.coeffs()) - single.coeffs()).norm() < 1e-15);
        w[(1, 0)] = 0.5;
        assert!(matches!(rep.act_two_form(&w, &s), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn two_form_linearity() {
        let rep = build_twisted_rep(6, 2, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = Spinor::random_unit(rep.dim(), &mut rng);
        let rand_form = |rng: &mut ChaCha8Rng| {
            let a = DMatrix::<f64>::from_fn(6, 6, |_, _| rng.sample(StandardNormal));
            &a - a.transpose()
        };
        for _ in 0..5 {
            let (a, b) = (rand_form(&mut rng), rand_form(&mut rng));
            let lhs = rep.act_two_form(&(&a * 2.0 + &b * -0.5), &s).unwrap();
            let rhs = rep.act_two_form(&a, &s).unwrap().coeffs() * C64::new(2.0, 0.0)
                + rep.act_two_form(&b, &s).unwrap().coeffs() * C64::new(-0.5, 0.0);
            assert!((lhs.coeffs() - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn hermitian_product() {
        let rep = build_twisted_rep(4, 2, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let s = Spinor::random_unit(rep.dim(), &mut rng).scaled(1.7);
        let ss = rep.herm_inner(&s, &s).unwrap();
        assert!((ss.re - s.norm_sq()).abs() < 1e-14 && ss.im == 0.0);
        let e0s = Spinor::new(rep.base(0).apply(s.coeffs()));
        assert!((rep.herm_inner(&e0s, &e0s).unwrap().re - s.norm_sq()).abs() < 1e-13);
        let e01s = Spinor::new(rep.base(0).apply(&rep.base(1).apply(s.coeffs())));
        assert!(rep.herm_inner(&e01s, &s).unwrap().re.abs() < 1e-14);
        // conjugate-linear in the second slot
        let is = Spinor::new(s.coeffs() * I);
        assert!((rep.herm_inner(&s, &is).unwrap() - (-I) * ss).norm() < 1e-13);
    }

    #[test]
    fn unitary_generators() {
        for (n, r) in [(2, 0), (4, 3), (6, 2)] {
            assert!(build_twisted_rep(n, r, 1).unwrap().unitarity_residual() < 1e-15);
        }
    }

    #[test]
    fn mixed_degree_four_elements_are_hermitian() {
        let rep = build_twisted_rep(4, 3, 1).unwrap();
        let op = &(&(rep.base(0) * rep.base(2)) * rep.aux(0).unwrap()) * rep.aux(2).unwrap();
        assert!((&op - &op.adjoint()).max_abs() < 1e-15);
    }

    #[test]
    fn spinor_json_roundtrip() {
        let s = Spinor::new(DVector::from_vec(vec![C64::new(1.0, -2.0), C64::new(0.5, 0.0)]));
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, "[[1.0,-2.0],[0.5,0.0]]");
        assert_eq!(serde_json::from_str::<Spinor>(&json).unwrap(), s);
    }

    #[test]
    fn rep_rebuilds_from_spec() {
        let rep = build_twisted_rep(4, 3, 1).unwrap();
        let json = serde_json::to_string(&rep.spec()).unwrap();
        let back = CliffordRep::from_spec(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back.base(2), rep.base(2));
        let mut bad = rep.spec();
        bad.construction = "other".into();
        assert!(CliffordRep::from_spec(&bad).is_err());
    }
}
