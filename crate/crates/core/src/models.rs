//! Explicit consistent pointwise data: flat, Kähler (r = 2), tautological
//! spin^n and quaternion-Kähler spin^3.
//!
//! Spinors are extracted numerically as joint kernels, so nothing here
//! depends on closed-form spinor components.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::clifford::{build_twisted_rep, CliffordRep, Spinor};
use crate::curvature::{qk_model, CurvatureTensor};
use crate::error::{Error, Result};
use crate::linalg::{nullspace, real_nullspace, Nullspace, SparseOp, C64, I};
use crate::spinlab::{eta_forms, normalize_pure, twisted_pure_check, GeometricDatum, TwoFormFamily};
use crate::tolerances;
use crate::verify::herrera_coefficient;

pub const FLAT: &str = "flat";
pub const KAEHLER_FLAT: &str = "kaehler-flat";
pub const TAUTOLOGICAL: &str = "taut-spin-n";
pub const QK: &str = "qk";

/// `R = 0`, `Θ = 0`, random unit ψ.
pub fn flat_datum(n: usize, r: usize, seed: u64) -> Result<GeometricDatum> {
    let rep = build_twisted_rep(n, r, 1)?;
    let psi = Spinor::random_unit(rep.dim(), &mut ChaCha8Rng::seed_from_u64(seed));
    let datum = GeometricDatum {
        curvature: CurvatureTensor::zeros(n),
        theta: TwoFormFamily::zeros(n, r),
        psi,
        psi_prime: None,
        label: FLAT.into(),
        seed: Some(seed),
        rep,
    };
    self_check(&datum)?;
    Ok(datum)
}

fn first_unit_vector(kernel: &Nullspace) -> Spinor {
    Spinor::new(kernel.vector(0)).normalized()
}

/// Flat Kähler pure spinor on `R^{2k}` with `r = 2`: annihilated by every
/// `e_{2j} + i e_{2j+1}` and an eigenvector of `f_1 f_2`.
pub fn kaehler_pure_flat(k: usize) -> Result<GeometricDatum> {
    if k == 0 {
        return Err(Error::InvalidDimension("kaehler_pure_flat needs k >= 1".into()));
    }
    let n = 2 * k;
    let rep = build_twisted_rep(n, 2, 1)?;
    let mut ops: Vec<SparseOp> = (0..k).map(|j| rep.base(2 * j) + &rep.base(2 * j + 1).scale(I)).collect();
    let id = SparseOp::identity(rep.dim());
    let mut kernel = None;
    for eig in [-I, I] {
        ops.push(rep.pair(0, 1) - &id.scale(eig));
        let ker = nullspace(&ops, tolerances::KERNEL_RELATIVE);
        ops.pop();
        if ker.dim() > 0 {
            kernel = Some(ker);
            break;
        }
    }
    let kernel = kernel.ok_or_else(|| Error::Construction("annihilator kernel is empty".into()))?;
    let psi = first_unit_vector(&kernel);
    let datum = GeometricDatum {
        curvature: CurvatureTensor::zeros(n),
        theta: TwoFormFamily::zeros(n, 2),
        psi_prime: Some(psi.clone()),
        psi,
        label: KAEHLER_FLAT.into(),
        seed: None,
        rep,
    };
    self_check(&datum)?;
    Ok(datum)
}

/// Kernel of the base annihilators alone, for rank diagnostics.
pub fn kaehler_annihilator_kernel_dim(k: usize) -> Result<usize> {
    let rep = build_twisted_rep(2 * k, 0, 1)?;
    let ops: Vec<SparseOp> = (0..k).map(|j| rep.base(2 * j) + &rep.base(2 * j + 1).scale(I)).collect();
    Ok(nullspace(&ops, tolerances::KERNEL_RELATIVE).dim())
}

/// Joint kernel of `{e_k e_l + f_k f_l : k < l}` on the spin^n module of `R^n`.
pub fn tautological_kernel(n: usize) -> Result<(CliffordRep, Nullspace)> {
    if n % 2 == 1 || !(2..=8).contains(&n) {
        return Err(Error::InvalidDimension(format!("tautological model needs even 2 <= n <= 8, got {n}")));
    }
    let rep = build_twisted_rep(n, n, 1)?;
    let ops: Vec<SparseOp> = (0..n)
        .flat_map(|k| (k + 1..n).map(move |l| (k, l)))
        .map(|(k, l)| &(rep.base(k) * rep.base(l)) + rep.pair(k, l))
        .collect();
    let kernel = nullspace(&ops, tolerances::KERNEL_RELATIVE);
    Ok((rep, kernel))
}

/// Inside the kernel, the sum of the extreme base-chirality eigenvectors.
///
/// The joint kernel is not one-dimensional; the balanced combination has
/// vanishing four-form expectations, which is what makes the curvature term
/// reduce to `⟨R̊h, h⟩`.
fn balanced_kernel_vector(rep: &CliffordRep, kernel: &Nullspace) -> Spinor {
    let k = &kernel.basis;
    if k.ncols() == 1 {
        return first_unit_vector(kernel);
    }
    let chir = rep.chirality().expect("n is even").to_dense();
    let restricted = k.adjoint() * chir * k;
    let herm = (&restricted + restricted.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    let (mut lo, mut hi) = (0, 0);
    for (i, &v) in eig.eigenvalues.iter().enumerate() {
        if v < eig.eigenvalues[lo] {
            lo = i;
        }
        if v > eig.eigenvalues[hi] {
            hi = i;
        }
    }
    if lo == hi {
        return first_unit_vector(kernel);
    }
    let plus: DVector<C64> = k * eig.eigenvectors.column(hi);
    let minus: DVector<C64> = k * eig.eigenvectors.column(lo);
    Spinor::new(plus + minus).normalized()
}

/// Tautological spin^n datum: `F = TM`, `(Θ_{kl})_{pj} = R_{pjkl}`, for any
/// attached algebraic curvature tensor.
pub fn tautological_spin_n(n: usize, curvature: CurvatureTensor, seed: Option<u64>) -> Result<GeometricDatum> {
    if curvature.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: curvature.n() });
    }
    let (rep, kernel) = tautological_kernel(n)?;
    if kernel.dim() == 0 {
        return Err(Error::Construction(format!(
            "empty joint kernel for n = {n} (smallest singular values {:?})",
            kernel.smallest
        )));
    }
    let psi = balanced_kernel_vector(&rep, &kernel);
    let mut theta = TwoFormFamily::zeros(n, n);
    for k in 0..n {
        for l in k + 1..n {
            theta.set_pair(k, l, DMatrix::from_fn(n, n, |p, j| curvature.get(p, j, k, l)));
        }
    }
    let datum = GeometricDatum { rep, curvature, theta, psi, psi_prime: None, label: TAUTOLOGICAL.into(), seed };
    self_check(&datum)?;
    Ok(datum)
}

/// Auxiliary pairs in the order their candidate forms are assigned.
const QK_PAIRS: [(usize, usize); 3] = [(0, 1), (1, 2), (2, 0)];

/// Outcome of the quaternion-Kähler construction, with its diagnostics.
#[derive(Clone, Debug)]
pub struct QkConstruction {
    pub datum: GeometricDatum,
    /// `assignment[t]` is the structure `J_c` used for pair `QK_PAIRS[t]`.
    pub assignment: [usize; 3],
    pub signs: [i32; 3],
    pub kernel_dim: usize,
    /// η scale of the raw kernel vector.
    pub scale: f64,
    pub spread: f64,
    pub structures: [DMatrix<f64>; 3],
}

/// `sp(m)`: antisymmetric matrices commuting with all three structures.
pub fn quaternionic_commutant(js: &[DMatrix<f64>; 3]) -> Vec<DMatrix<f64>> {
    let n = js[0].nrows();
    let basis: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let elem = |(i, j): (usize, usize)| {
        let mut a = DMatrix::zeros(n, n);
        a[(i, j)] = 1.0;
        a[(j, i)] = -1.0;
        a
    };
    let mut system = DMatrix::zeros(3 * n * n, basis.len());
    for (c, &ij) in basis.iter().enumerate() {
        let a = elem(ij);
        for (t, j) in js.iter().enumerate() {
            let comm = &a * j - j * &a;
            for (s, v) in comm.iter().enumerate() {
                system[(t * n * n + s, c)] = *v;
            }
        }
    }
    let kernel = real_nullspace(&system, 1e-10);
    (0..kernel.ncols())
        .map(|c| {
            let mut a = DMatrix::zeros(n, n);
            for (b, &ij) in basis.iter().enumerate() {
                a += elem(ij) * kernel[(b, c)];
            }
            a
        })
        .collect()
}

fn assignments() -> Vec<[usize; 3]> {
    let first = [2, 0, 1];
    let mut out = vec![first];
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                let p = [a, b, c];
                if a != b && b != c && a != c && p != first {
                    out.push(p);
                }
            }
        }
    }
    out
}

/// Quaternion-Kähler datum on `R^{4m}` with `r = 3`, twist exponent `m`.
///
/// Candidate η forms are the Kähler forms `ω_{J}(X, Y) = g(JX, Y)` of the
/// structures, assigned cyclically to the auxiliary pairs; ψ₀ spans the joint
/// kernel of the purity operators `ω_{J} + 2 f_k f_l` together with the `sp(m)`
/// two-form operators (ψ₀ must be fixed by the holonomy commuting with the
/// structures). All 48 assignments and signs are searched, the cyclic
/// `(12)→J₃, (23)→J₁, (31)→J₂` first.
pub fn qk_spinor_detailed(m: usize, sign: i32) -> Result<QkConstruction> {
    let model = qk_model(m, sign)?;
    let n = 4 * m;
    let rep = build_twisted_rep(n, 3, m)?;
    let js = model.structures.clone();
    let holonomy_rows: Vec<SparseOp> = quaternionic_commutant(&js)
        .iter()
        .map(|a| rep.two_form_op(a))
        .collect::<Result<_>>()?;
    let kaehler: Vec<DMatrix<f64>> = js.iter().map(|j| j.transpose()).collect();

    let mut diagnostics = Vec::new();
    for assignment in assignments() {
        for bits in 0..8u32 {
            let signs = [0, 1, 2].map(|t| if bits >> t & 1 == 0 { 1 } else { -1 });
            let mut ops = holonomy_rows.clone();
            for (t, &(k, l)) in QK_PAIRS.iter().enumerate() {
                let form = &kaehler[assignment[t]] * f64::from(signs[t]);
                ops.push(&rep.two_form_op(&form)? + &rep.pair(k, l).scale_real(2.0));
            }
            let kernel = nullspace(&ops, tolerances::KERNEL_RELATIVE);
            if kernel.dim() == 0 {
                diagnostics.push(format!("{assignment:?}{signs:?}: {:?}", kernel.smallest));
                continue;
            }
            let psi0 = first_unit_vector(&kernel);
            let normalized = normalize_pure(&rep, &psi0)?;
            let psi_prime = normalized.psi_prime;
            let eta = eta_forms(&rep, &psi_prime)?;
            let lambda = herrera_coefficient(model.curvature.scal(), n, 3);
            let datum = GeometricDatum {
                curvature: model.curvature.clone(),
                theta: eta.scaled(lambda),
                psi: psi_prime.normalized(),
                psi_prime: Some(psi_prime),
                label: QK.into(),
                seed: None,
                rep,
            };
            self_check(&datum)?;
            return Ok(QkConstruction {
                datum,
                assignment,
                signs,
                kernel_dim: kernel.dim(),
                scale: normalized.scale,
                spread: normalized.spread,
                structures: js,
            });
        }
    }
    Err(Error::Construction(format!(
        "no assignment of Kähler forms admits a kernel; smallest singular values per assignment: {}",
        diagnostics.join("; ")
    )))
}

pub fn qk_spinor(m: usize, sign: i32) -> Result<GeometricDatum> {
    Ok(qk_spinor_detailed(m, sign)?.datum)
}

/// Consistency suite every model passes before it is handed out: unit ψ,
/// parallel constraint, purity where ψ′ is present, Einstein for QK.
pub fn self_check(datum: &GeometricDatum) -> Result<()> {
    datum.validate()?;
    if let Some(pp) = &datum.psi_prime {
        let report = twisted_pure_check(&datum.rep, pp, tolerances::MODEL)?;
        if !report.pass {
            return Err(Error::InconsistentDatum(format!("ψ′ is not twisted pure: {:?}", report.residuals)));
        }
    }
    if datum.label == QK {
        let res = datum.curvature.einstein_residual();
        if res > tolerances::IDENTITY {
            return Err(Error::InconsistentDatum(format!("curvature is not Einstein (residual {res:e})")));
        }
    }
    Ok(())
}

/// Builds a datum by label with the parameters the CLI exposes.
pub fn build_by_label(label: &str, n: usize, r: usize, m: usize, sign: i32, curvature: Option<CurvatureTensor>, seed: u64) -> Result<GeometricDatum> {
    match label {
        FLAT => flat_datum(n, r, seed),
        KAEHLER_FLAT => {
            if n % 2 == 1 {
                return Err(Error::InvalidDimension("kaehler-flat needs even n".into()));
            }
            kaehler_pure_flat(n / 2)
        }
        TAUTOLOGICAL => {
            let curvature = match curvature {
                Some(c) => c,
                None => crate::curvature::random_curvature(n, seed)?,
            };
            tautological_spin_n(n, curvature, Some(seed))
        }
        QK => qk_spinor(m, sign),
        other => Err(Error::InvalidArgument(format!("unknown model label {other:?}"))),
    }
}
