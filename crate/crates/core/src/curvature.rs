//! Algebraic curvature tensors at a point, in an orthonormal frame.
//!
//! Index order follows `R_{ijkl} = g(R_{e_i e_j} e_k, e_l)`, with
//! `Ric_{ij} = R_{ikkj}` and `scal = R_{ikki}`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCurvature", into = "RawCurvature")]
pub struct CurvatureTensor {
    n: usize,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawCurvature {
    n: usize,
    #[serde(rename = "R")]
    r: Vec<f64>,
}

impl TryFrom<RawCurvature> for CurvatureTensor {
    type Error = Error;
    fn try_from(raw: RawCurvature) -> Result<Self> {
        CurvatureTensor::from_flat(raw.n, raw.r)
    }
}

impl From<CurvatureTensor> for RawCurvature {
    fn from(t: CurvatureTensor) -> Self {
        RawCurvature { n: t.n, r: t.data }
    }
}

impl CurvatureTensor {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n.pow(4)] }
    }

    /// Wraps a row-major array without checking any symmetry. Used to build
    /// deliberately broken tensors.
    pub fn from_flat_unchecked(n: usize, data: Vec<f64>) -> Result<Self> {
        check_dim(n.pow(4), data.len())?;
        Ok(Self { n, data })
    }

    /// Row-major array, validated against the pair symmetries and first Bianchi.
    pub fn from_flat(n: usize, data: Vec<f64>) -> Result<Self> {
        let t = Self::from_flat_unchecked(n, data)?;
        let scale = 1.0 + t.max_abs();
        let sym = t.symmetry_residual();
        let bianchi = t.bianchi_residual();
        if sym > 1e-10 * scale || bianchi > 1e-10 * scale {
            return Err(Error::InvalidArgument(format!(
                "not an algebraic curvature tensor (symmetry residual {sym:e}, Bianchi residual {bianchi:e})"
            )));
        }
        Ok(t)
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize, usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n.pow(4));
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        data.push(f(i, j, k, l));
                    }
                }
            }
        }
        Self { n, data }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.n + j) * self.n + k) * self.n + l
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.data[self.idx(i, j, k, l)]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    /// Largest violation of `R_{ijkl} = -R_{jikl} = -R_{ijlk} = R_{klij}`.
    pub fn symmetry_residual(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let v = self.get(i, j, k, l);
                        worst = worst
                            .max((v + self.get(j, i, k, l)).abs())
                            .max((v + self.get(i, j, l, k)).abs())
                            .max((v - self.get(k, l, i, j)).abs());
                    }
                }
            }
        }
        worst
    }

    /// Largest entry of `R_{ijkl} + R_{jkil} + R_{kijl}`.
    pub fn bianchi_residual(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let c = self.get(i, j, k, l) + self.get(j, k, i, l) + self.get(k, i, j, l);
                        worst = worst.max(c.abs());
                    }
                }
            }
        }
        worst
    }

    pub fn ricci(&self) -> SymTensor2 {
        let n = self.n;
        let raw = DMatrix::from_fn(n, n, |i, j| (0..n).map(|k| self.get(i, k, k, j)).sum::<f64>());
        // pair symmetry makes this symmetric already; average away rounding
        SymTensor2 { h: (&raw + raw.transpose()) * 0.5 }
    }

    pub fn scal(&self) -> f64 {
        let n = self.n;
        (0..n).flat_map(|i| (0..n).map(move |k| (i, k))).map(|(i, k)| self.get(i, k, k, i)).sum()
    }

    /// `(R̊h)_{kj} = h_{ip} R_{ikjp}`.
    pub fn ring_action(&self, h: &SymTensor2) -> Result<SymTensor2> {
        check_dim(self.n, h.n())?;
        let n = self.n;
        let mut out = DMatrix::zeros(n, n);
        for k in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for i in 0..n {
                    for p in 0..n {
                        acc += h.h[(i, p)] * self.get(i, k, j, p);
                    }
                }
                out[(k, j)] = acc;
            }
        }
        Ok(SymTensor2 { h: (&out + out.transpose()) * 0.5 })
    }

    /// `(Ric∘h)_{lj} = Ric_{lp} h_{pj}`.
    pub fn ric_compose(&self, h: &SymTensor2) -> Result<DMatrix<f64>> {
        check_dim(self.n, h.n())?;
        Ok(self.ricci().h * &h.h)
    }

    /// Largest deviation of Ric from `(scal/n)·Id`.
    pub fn einstein_residual(&self) -> f64 {
        let ric = self.ricci();
        let e = self.scal() / self.n as f64;
        (ric.h - DMatrix::identity(self.n, self.n) * e).amax()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymTensor2 {
    h: DMatrix<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawSym {
    n: usize,
    h: Vec<f64>,
}

impl Serialize for SymTensor2 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.n();
        let flat = (0..n * n).map(|ij| self.h[(ij / n, ij % n)]).collect();
        RawSym { n, h: flat }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SymTensor2 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawSym::deserialize(d)?;
        if raw.h.len() != raw.n * raw.n {
            return Err(serde::de::Error::custom(format!("expected {} entries, got {}", raw.n * raw.n, raw.h.len())));
        }
        SymTensor2::new(DMatrix::from_row_slice(raw.n, raw.n, &raw.h)).map_err(serde::de::Error::custom)
    }
}

impl SymTensor2 {
    /// Exact symmetry is required.
    pub fn new(h: DMatrix<f64>) -> Result<Self> {
        if h.nrows() != h.ncols() {
            return Err(Error::DimensionMismatch { expected: h.nrows(), got: h.ncols() });
        }
        if h != h.transpose() {
            return Err(Error::InvalidArgument("tensor is not symmetric".into()));
        }
        Ok(Self { h })
    }

    /// Symmetric part of an arbitrary square matrix.
    pub fn symmetrize(a: &DMatrix<f64>) -> Self {
        let mut h = (a + a.transpose()) * 0.5;
        // force bit-exact symmetry
        for i in 0..h.nrows() {
            for j in 0..i {
                h[(i, j)] = h[(j, i)];
            }
        }
        Self { h }
    }

    pub fn identity(n: usize) -> Self {
        Self { h: DMatrix::identity(n, n) }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let a = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        Self::symmetrize(&a)
    }

    pub fn random_traceless<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut t = Self::random(n, rng);
        let shift = t.trace() / n as f64;
        for i in 0..n {
            t.h[(i, i)] -= shift;
        }
        t
    }

    pub fn n(&self) -> usize {
        self.h.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.h
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.h[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.h.trace()
    }

    pub fn is_traceless(&self, tol: f64) -> bool {
        self.trace().abs() <= tol
    }

    pub fn norm_sq(&self) -> f64 {
        self.h.norm_squared()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { h: &self.h * s }
    }
}

fn normal_array(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n.pow(4)).map(|_| rng.sample(StandardNormal)).collect()
}

fn pair_symmetrize(n: usize, raw: &[f64]) -> CurvatureTensor {
    let a = CurvatureTensor { n, data: raw.to_vec() };
    let anti = CurvatureTensor::from_fn(n, |i, j, k, l| {
        (a.get(i, j, k, l) - a.get(j, i, k, l) - a.get(i, j, l, k) + a.get(j, i, l, k)) / 4.0
    });
    CurvatureTensor::from_fn(n, |i, j, k, l| (anti.get(i, j, k, l) + anti.get(k, l, i, j)) / 2.0)
}

fn check_random_dim(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidDimension(format!("curvature needs n >= 2, got {n}")));
    }
    Ok(())
}

/// Seeded random algebraic curvature tensor: antisymmetrize, pair-symmetrize,
/// then remove the cyclic part `b(R)_{ijkl} = (R_{ijkl} + R_{jkil} + R_{kijl})/3`.
pub fn random_curvature(n: usize, seed: u64) -> Result<CurvatureTensor> {
    check_random_dim(n)?;
    let a = pair_symmetrize(n, &normal_array(n, seed));
    Ok(CurvatureTensor::from_fn(n, |i, j, k, l| {
        a.get(i, j, k, l) - (a.get(i, j, k, l) + a.get(j, k, i, l) + a.get(k, i, j, l)) / 3.0
    }))
}

/// Same draw as [`random_curvature`] with the Bianchi projection skipped.
pub fn random_curvature_unprojected(n: usize, seed: u64) -> Result<CurvatureTensor> {
    check_random_dim(n)?;
    Ok(pair_symmetrize(n, &normal_array(n, seed)))
}

/// `R_{ijkl} = κ(δ_{il}δ_{jk} − δ_{ik}δ_{jl})`, so that `Ric = κ(n−1)·Id`.
pub fn constant_curvature(n: usize, kappa: f64) -> Result<CurvatureTensor> {
    check_random_dim(n)?;
    let d = |a: usize, b: usize| f64::from(u8::from(a == b));
    Ok(CurvatureTensor::from_fn(n, |i, j, k, l| kappa * (d(i, l) * d(j, k) - d(i, k) * d(j, l))))
}

/// Left multiplication by the unit quaternion `q ∈ {i, j, k}` on `H = span(1, i, j, k)`.
fn quaternion_left(c: usize) -> [[f64; 4]; 4] {
    // columns are the images of 1, i, j, k
    let cols: [[f64; 4]; 4] = match c {
        0 => [[0., 1., 0., 0.], [-1., 0., 0., 0.], [0., 0., 0., 1.], [0., 0., -1., 0.]],
        1 => [[0., 0., 1., 0.], [0., 0., 0., -1.], [-1., 0., 0., 0.], [0., 1., 0., 0.]],
        _ => [[0., 0., 0., 1.], [0., 0., 1., 0.], [0., -1., 0., 0.], [-1., 0., 0., 0.]],
    };
    let mut m = [[0.0; 4]; 4];
    for (col, image) in cols.iter().enumerate() {
        for row in 0..4 {
            m[row][col] = image[row];
        }
    }
    m
}

/// The quaternionic structures `J_1, J_2, J_3` on `R^{4m} = H^m` (left
/// multiplication by i, j, k, block-diagonal).
pub fn quaternionic_structures(m: usize) -> [DMatrix<f64>; 3] {
    let n = 4 * m;
    let build = |c: usize| {
        let q = quaternion_left(c);
        let mut j = DMatrix::zeros(n, n);
        for b in 0..m {
            for row in 0..4 {
                for col in 0..4 {
                    j[(4 * b + row, 4 * b + col)] = q[row][col];
                }
            }
        }
        j
    };
    [build(0), build(1), build(2)]
}

#[derive(Clone, Debug)]
pub struct QkModel {
    pub curvature: CurvatureTensor,
    pub structures: [DMatrix<f64>; 3],
    pub sign: i32,
}

/// Curvature of quaternionic projective space (`sign = +1`) or its dual:
/// `R(X,Y)Z = ±¼[g(Y,Z)X − g(X,Z)Y + Σ_c (g(J_cY,Z)J_cX − g(J_cX,Z)J_cY + 2g(X,J_cY)J_cZ)]`.
pub fn qk_model(m: usize, sign: i32) -> Result<QkModel> {
    if m < 1 {
        return Err(Error::InvalidDimension("quaternionic dimension must be >= 1".into()));
    }
    if sign != 1 && sign != -1 {
        return Err(Error::InvalidArgument(format!("sign must be +1 or -1, got {sign}")));
    }
    let n = 4 * m;
    let js = quaternionic_structures(m);
    let s = f64::from(sign) / 4.0;
    let d = |a: usize, b: usize| f64::from(u8::from(a == b));
    let curvature = CurvatureTensor::from_fn(n, |i, j, k, l| {
        let mut v = d(j, k) * d(i, l) - d(i, k) * d(j, l);
        for jc in &js {
            v += jc[(k, j)] * jc[(l, i)] - jc[(k, i)] * jc[(l, j)] + 2.0 * jc[(i, j)] * jc[(l, k)];
        }
        s * v
    });
    Ok(QkModel { curvature, structures: js, sign })
}
