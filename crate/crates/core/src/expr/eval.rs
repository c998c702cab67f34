//! Einstein-summation evaluation against bound tensors and Clifford data.
//!
//! Every intermediate is an array over named indices whose elements are
//! reals, operators (dense `dim × dim`, column-major) or spinors. Operator
//! and spinor factors keep their textual order; real factors commute.

use std::collections::{BTreeMap, HashMap};

use nalgebra::{DMatrix, DMatrixView, DVector, DVectorView};

use super::ast::{Expr, Factor, Term};
use super::ExprError;
use crate::clifford::CliffordRep;
use crate::curvature::{CurvatureTensor, SymTensor2};
use crate::linalg::C64;
use crate::spinlab::{eta_forms, GeometricDatum};
use crate::verify::SecondDerivSymbol;

pub const RESERVED: [&str; 11] = ["e", "f", "psi", "delta", "R", "Ric", "scal", "h", "eta", "Theta", "T"];

#[derive(Clone, Debug)]
pub enum Binding {
    /// Real array with per-axis extents, row-major.
    Real { extents: Vec<usize>, data: Vec<f64> },
    /// Indexed family of operators (one index).
    Operators(Vec<DMatrix<C64>>),
    Spinor(DVector<C64>),
    /// Kronecker delta; extents follow the indices it touches.
    Delta,
}

#[derive(Clone, Debug, Default)]
pub struct Environment {
    bindings: HashMap<String, Binding>,
    base_dim: usize,
    op_dim: Option<usize>,
}

impl Environment {
    /// Empty environment over an `n`-dimensional base, with `delta` bound.
    pub fn new(n: usize) -> Self {
        let mut env = Self { bindings: HashMap::new(), base_dim: n, op_dim: None };
        env.bindings.insert("delta".into(), Binding::Delta);
        env
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn get(&self, name: &str) -> Option<&Binding> {
        self.bindings.get(name)
    }

    /// User binding; reserved names are refused.
    pub fn bind(&mut self, name: &str, binding: Binding) -> Result<(), ExprError> {
        if RESERVED.contains(&name) {
            return Err(ExprError::Reserved(name.to_string()));
        }
        self.insert(name, binding)
    }

    fn insert(&mut self, name: &str, binding: Binding) -> Result<(), ExprError> {
        let d = match &binding {
            Binding::Operators(ops) => ops.first().map(|m| m.nrows()),
            Binding::Spinor(v) => Some(v.len()),
            _ => None,
        };
        if let (Some(d), Some(existing)) = (d, self.op_dim) {
            if d != existing {
                return Err(ExprError::Type(format!("{name} acts on dimension {d}, environment uses {existing}")));
            }
        }
        self.op_dim = self.op_dim.or(d);
        self.bindings.insert(name.to_string(), binding);
        Ok(())
    }

    pub fn bind_scalar(&mut self, name: &str, value: f64) -> Result<(), ExprError> {
        self.bind(name, Binding::Real { extents: vec![], data: vec![value] })
    }

    pub fn bind_curvature(&mut self, r: &CurvatureTensor) -> Result<(), ExprError> {
        let n = r.n();
        self.insert("R", Binding::Real { extents: vec![n; 4], data: r.as_slice().to_vec() })?;
        let ric = r.ricci();
        let data = (0..n * n).map(|ij| ric.get(ij / n, ij % n)).collect();
        self.insert("Ric", Binding::Real { extents: vec![n, n], data })?;
        self.insert("scal", Binding::Real { extents: vec![], data: vec![r.scal()] })
    }

    pub fn bind_h(&mut self, h: &SymTensor2) -> Result<(), ExprError> {
        let n = h.n();
        let data = (0..n * n).map(|ij| h.get(ij / n, ij % n)).collect();
        self.insert("h", Binding::Real { extents: vec![n, n], data })
    }

    pub fn bind_t(&mut self, t: &SecondDerivSymbol) -> Result<(), ExprError> {
        self.insert("T", Binding::Real { extents: vec![t.n(); 4], data: t.as_slice().to_vec() })
    }

    pub fn bind_psi(&mut self, psi: &crate::clifford::Spinor) -> Result<(), ExprError> {
        self.insert("psi", Binding::Spinor(psi.coeffs().clone()))
    }

    pub fn bind_rep(&mut self, rep: &CliffordRep) -> Result<(), ExprError> {
        self.insert("e", Binding::Operators(rep.base_generators().iter().map(|g| g.to_dense()).collect()))?;
        if !rep.aux_generators().is_empty() {
            self.insert("f", Binding::Operators(rep.aux_generators().iter().map(|g| g.to_dense()).collect()))?;
        }
        Ok(())
    }

    /// Binds every reserved name a datum provides: `e`, `f` (m = 1), `psi`,
    /// `R`, `Ric`, `scal`, `eta[i,j,k,l] = η_{kl}(e_i, e_j)` and
    /// `Theta[p,j,k,l] = (Θ_{kl})_{pj}`.
    pub fn from_datum(datum: &GeometricDatum) -> Result<Self, crate::error::Error> {
        let (n, r) = (datum.n(), datum.r());
        let mut env = Self::new(n);
        env.bind_rep(&datum.rep)?;
        env.insert("psi", Binding::Spinor(datum.psi.coeffs().clone()))?;
        env.bind_curvature(&datum.curvature)?;
        let eta = eta_forms(&datum.rep, &datum.psi)?;
        let pack = |get: &dyn Fn(usize, usize, usize, usize) -> f64| {
            let mut data = Vec::with_capacity(n * n * r * r);
            for i in 0..n {
                for j in 0..n {
                    for k in 0..r {
                        for l in 0..r {
                            data.push(get(i, j, k, l));
                        }
                    }
                }
            }
            Binding::Real { extents: vec![n, n, r, r], data }
        };
        env.insert("eta", pack(&|i, j, k, l| eta.get(k, l)[(i, j)]))?;
        env.insert("Theta", pack(&|p, j, k, l| datum.theta.get(k, l)[(p, j)]))?;
        Ok(env)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Real,
    Operator,
    Spinor,
}

/// Result of evaluation: an array over `indices` (sorted) whose entries are
/// blocks of `kind`.
#[derive(Clone, Debug)]
pub struct Value {
    pub indices: Vec<String>,
    pub extents: Vec<usize>,
    pub kind: Kind,
    pub dim: usize,
    data: Vec<C64>,
}

impl Value {
    fn scalar(x: f64) -> Self {
        Self { indices: vec![], extents: vec![], kind: Kind::Real, dim: 1, data: vec![C64::new(x, 0.0)] }
    }

    fn block(&self) -> usize {
        match self.kind {
            Kind::Real => 1,
            Kind::Operator => self.dim * self.dim,
            Kind::Spinor => self.dim,
        }
    }

    pub fn len(&self) -> usize {
        self.extents.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn offset(&self, multi: &[usize]) -> usize {
        multi.iter().zip(&self.extents).fold(0, |acc, (i, e)| acc * e + i)
    }

    /// Real entry at a multi-index (in `indices` order).
    pub fn real(&self, multi: &[usize]) -> f64 {
        assert_eq!(self.kind, Kind::Real);
        self.data[self.offset(multi)].re
    }

    /// Block at a multi-index, flattened (operators column-major).
    pub fn entry(&self, multi: &[usize]) -> &[C64] {
        let b = self.block();
        let o = self.offset(multi) * b;
        &self.data[o..o + b]
    }

    pub fn operator(&self, multi: &[usize]) -> DMatrix<C64> {
        assert_eq!(self.kind, Kind::Operator);
        DMatrix::from_column_slice(self.dim, self.dim, self.entry(multi))
    }

    pub fn as_scalar(&self) -> Option<f64> {
        (self.kind == Kind::Real && self.indices.is_empty()).then(|| self.data[0].re)
    }

    /// Largest absolute entry over all indices and block entries.
    pub fn max_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Real values widen to `x·Id` when an operator is expected.
    fn widened(&self, kind: Kind, dim: usize) -> Result<Value, ExprError> {
        if self.kind == kind {
            return Ok(self.clone());
        }
        match (self.kind, kind) {
            (Kind::Real, Kind::Operator) => {
                let mut data = Vec::with_capacity(self.len() * dim * dim);
                for z in &self.data {
                    for c in 0..dim {
                        for r in 0..dim {
                            data.push(if r == c { *z } else { C64::new(0.0, 0.0) });
                        }
                    }
                }
                Ok(Value { kind, dim, data, ..self.clone() })
            }
            _ => Err(ExprError::Type(format!("cannot add {:?} and {:?} values", self.kind, kind))),
        }
    }

    /// Same entries, axes reordered to `order`.
    fn permuted(&self, order: &[String]) -> Value {
        if order == self.indices.as_slice() {
            return self.clone();
        }
        let pos: Vec<usize> = order.iter().map(|i| self.indices.iter().position(|j| j == i).unwrap()).collect();
        let extents: Vec<usize> = pos.iter().map(|&p| self.extents[p]).collect();
        let b = self.block();
        let mut data = Vec::with_capacity(self.data.len());
        for multi in odometer(&extents) {
            let mut src = vec![0; multi.len()];
            for (a, &p) in pos.iter().enumerate() {
                src[p] = multi[a];
            }
            let o = self.offset(&src) * b;
            data.extend_from_slice(&self.data[o..o + b]);
        }
        Value { indices: order.to_vec(), extents, kind: self.kind, dim: self.dim, data }
    }

    /// `self - other` after aligning axes; used by identity checks.
    pub fn difference(&self, other: &Value) -> Result<Value, ExprError> {
        let rhs = other.scale(-1.0);
        add_values(self.clone(), rhs)
    }

    fn scale(&self, s: f64) -> Value {
        Value { data: self.data.iter().map(|z| z * s).collect(), ..self.clone() }
    }
}

fn odometer(extents: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let total: usize = extents.iter().product();
    (0..total).map(move |mut flat| {
        let mut multi = vec![0; extents.len()];
        for a in (0..extents.len()).rev() {
            multi[a] = flat % extents[a];
            flat /= extents[a];
        }
        multi
    })
}

fn add_values(a: Value, b: Value) -> Result<Value, ExprError> {
    let kind = match (a.kind, b.kind) {
        (x, y) if x == y => x,
        (Kind::Real, Kind::Operator) | (Kind::Operator, Kind::Real) => Kind::Operator,
        (x, y) => return Err(ExprError::Type(format!("cannot add {x:?} and {y:?} values"))),
    };
    let dim = a.dim.max(b.dim);
    if a.kind != Kind::Real && b.kind != Kind::Real && a.dim != b.dim {
        return Err(ExprError::Type("operator dimensions differ".into()));
    }
    let (a, b) = (a.widened(kind, dim)?, b.widened(kind, dim)?);
    let b = b.permuted(&a.indices);
    if a.extents != b.extents {
        return Err(ExprError::Extent(format!("index ranges differ: {:?} vs {:?}", a.extents, b.extents)));
    }
    let data = a.data.iter().zip(&b.data).map(|(x, y)| x + y).collect();
    Ok(Value { data, ..a })
}

/// Product of two blocks, `x` on the left.
fn block_mul(xk: Kind, x: &[C64], yk: Kind, y: &[C64], dim: usize, out: &mut [C64]) -> Result<(), ExprError> {
    match (xk, yk) {
        (Kind::Real, _) => {
            let s = x[0];
            for (o, v) in out.iter_mut().zip(y) {
                *o += s * v;
            }
        }
        (_, Kind::Real) => {
            let s = y[0];
            for (o, v) in out.iter_mut().zip(x) {
                *o += v * s;
            }
        }
        (Kind::Operator, Kind::Operator) => {
            let a = DMatrixView::from_slice(x, dim, dim);
            let b = DMatrixView::from_slice(y, dim, dim);
            let prod = a * b;
            for (o, v) in out.iter_mut().zip(prod.as_slice()) {
                *o += v;
            }
        }
        (Kind::Operator, Kind::Spinor) => {
            let a = DMatrixView::from_slice(x, dim, dim);
            let v = DVectorView::from_slice(y, dim);
            let prod = a * v;
            for (o, w) in out.iter_mut().zip(prod.as_slice()) {
                *o += w;
            }
        }
        (Kind::Spinor, Kind::Spinor) => return Err(ExprError::PsiTwice),
        (Kind::Spinor, Kind::Operator) => {
            return Err(ExprError::Type("a spinor must be the last operator factor of a term".into()))
        }
    }
    Ok(())
}

/// Contracts every index the two operands share.
fn combine(x: &Value, y: &Value) -> Result<Value, ExprError> {
    let shared: Vec<String> = x.indices.iter().filter(|i| y.indices.contains(i)).cloned().collect();
    for s in &shared {
        let ex = x.extents[x.indices.iter().position(|i| i == s).unwrap()];
        let ey = y.extents[y.indices.iter().position(|i| i == s).unwrap()];
        if ex != ey {
            return Err(ExprError::Extent(format!("index {s} ranges over {ex} and {ey}")));
        }
    }
    let mut out_idx = Vec::new();
    let mut out_ext = Vec::new();
    for (i, e) in x.indices.iter().zip(&x.extents).chain(y.indices.iter().zip(&y.extents)) {
        if !shared.contains(i) {
            out_idx.push(i.clone());
            out_ext.push(*e);
        }
    }
    let kind = match (x.kind, y.kind) {
        (Kind::Real, k) | (k, Kind::Real) => k,
        (Kind::Operator, Kind::Operator) => Kind::Operator,
        (Kind::Operator, Kind::Spinor) => Kind::Spinor,
        (Kind::Spinor, Kind::Spinor) => return Err(ExprError::PsiTwice),
        (Kind::Spinor, Kind::Operator) => {
            return Err(ExprError::Type("a spinor must be the last operator factor of a term".into()))
        }
    };
    let dim = x.dim.max(y.dim);
    let shared_ext: Vec<usize> =
        shared.iter().map(|s| x.extents[x.indices.iter().position(|i| i == s).unwrap()]).collect();
    let mut result = Value { indices: out_idx.clone(), extents: out_ext.clone(), kind, dim, data: Vec::new() };
    let block = result.block();
    result.data = vec![C64::new(0.0, 0.0); result.len() * block];

    let locate = |v: &Value, out_multi: &[usize], shared_multi: &[usize]| {
        let multi: Vec<usize> = v
            .indices
            .iter()
            .map(|i| match shared.iter().position(|s| s == i) {
                Some(p) => shared_multi[p],
                None => out_multi[out_idx.iter().position(|o| o == i).unwrap()],
            })
            .collect();
        v.offset(&multi) * v.block()
    };
    let shared_all: Vec<Vec<usize>> = odometer(&shared_ext).collect();
    for (flat, out_multi) in odometer(&out_ext).enumerate() {
        let target = &mut result.data[flat * block..(flat + 1) * block];
        for shared_multi in &shared_all {
            let ox = locate(x, &out_multi, shared_multi);
            let oy = locate(y, &out_multi, shared_multi);
            block_mul(x.kind, &x.data[ox..ox + x.block()], y.kind, &y.data[oy..oy + y.block()], dim, target)?;
        }
    }
    Ok(result)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ContractionOrder {
    /// Repeatedly contract the admissible pair with the smallest result.
    #[default]
    Greedy,
    /// Fold factors in textual order.
    LeftToRight,
}

struct Evaluator<'a> {
    env: &'a Environment,
    order: ContractionOrder,
}

impl Evaluator<'_> {
    fn expr(&self, expr: &Expr, outer: &BTreeMap<String, usize>) -> Result<Value, ExprError> {
        let mut total: Option<Value> = None;
        for term in &expr.terms {
            let mut v = self.term(term, outer)?;
            if term.negative {
                v = v.scale(-1.0);
            }
            let mut sorted = v.indices.clone();
            sorted.sort();
            let v = v.permuted(&sorted);
            total = Some(match total {
                None => v,
                Some(acc) => add_values(acc, v)?,
            });
        }
        total.ok_or_else(|| ExprError::Type("empty expression".into()))
    }

    /// Extents fixed by the term's own tensor references, on top of `outer`.
    fn extents(&self, term: &Term, outer: &BTreeMap<String, usize>) -> Result<BTreeMap<String, usize>, ExprError> {
        let mut map = outer.clone();
        let mut fixed: BTreeMap<String, usize> = BTreeMap::new();
        for f in &term.factors {
            if let Factor::Tensor { name, indices } = f {
                let ext: Vec<usize> = match self.env.get(name) {
                    Some(Binding::Real { extents, .. }) if extents.len() == indices.len() => extents.clone(),
                    Some(Binding::Operators(ops)) if indices.len() == 1 => vec![ops.len()],
                    _ => continue,
                };
                for (i, e) in indices.iter().zip(ext) {
                    if let Some(prev) = fixed.insert(i.clone(), e) {
                        if prev != e {
                            return Err(ExprError::Extent(format!("index {i} ranges over {prev} and {e}")));
                        }
                    }
                }
            }
        }
        map.extend(fixed);
        Ok(map)
    }

    fn term(&self, term: &Term, outer: &BTreeMap<String, usize>) -> Result<Value, ExprError> {
        let ext = self.extents(term, outer)?;
        let mut items: Vec<Value> = Vec::with_capacity(term.factors.len());
        for f in &term.factors {
            items.push(self.factor(f, &ext)?);
        }
        if items.iter().filter(|v| v.kind == Kind::Spinor).count() > 1 {
            return Err(ExprError::PsiTwice);
        }
        match self.order {
            ContractionOrder::LeftToRight => {
                let mut acc = items.remove(0);
                for v in &items {
                    acc = combine(&acc, v)?;
                }
                Ok(acc)
            }
            ContractionOrder::Greedy => {
                while items.len() > 1 {
                    let (a, b) = self.cheapest_pair(&items);
                    let merged = combine(&items[a], &items[b])?;
                    // the merged value takes the slot of its operator operand so
                    // operator factors stay in textual order
                    let keep = if items[b].kind != Kind::Real { b } else { a };
                    let drop = if keep == a { b } else { a };
                    items[keep] = merged;
                    items.remove(drop);
                }
                Ok(items.pop().unwrap())
            }
        }
    }

    fn cheapest_pair(&self, items: &[Value]) -> (usize, usize) {
        let ops: Vec<usize> = (0..items.len()).filter(|&i| items[i].kind != Kind::Real).collect();
        let mut best = (usize::MAX, 0, 1);
        for a in 0..items.len() {
            for b in a + 1..items.len() {
                let both_ops = items[a].kind != Kind::Real && items[b].kind != Kind::Real;
                if both_ops {
                    let pa = ops.iter().position(|&i| i == a).unwrap();
                    if ops.get(pa + 1) != Some(&b) {
                        continue;
                    }
                }
                let size = result_size(&items[a], &items[b]);
                if size < best.0 {
                    best = (size, a, b);
                }
            }
        }
        (best.1, best.2)
    }

    fn factor(&self, f: &Factor, ext: &BTreeMap<String, usize>) -> Result<Value, ExprError> {
        match f {
            Factor::Number(x) => Ok(Value::scalar(*x)),
            Factor::Group(inner) => self.expr(inner, ext),
            Factor::Name(name) => match self.env.get(name) {
                None => Err(ExprError::Unbound(name.clone())),
                Some(Binding::Real { extents, data }) if extents.is_empty() => Ok(Value::scalar(data[0])),
                Some(Binding::Spinor(v)) => Ok(Value {
                    indices: vec![],
                    extents: vec![],
                    kind: Kind::Spinor,
                    dim: v.len(),
                    data: v.as_slice().to_vec(),
                }),
                Some(b) => Err(ExprError::Arity { name: name.clone(), expected: arity(b), got: 0 }),
            },
            Factor::Tensor { name, indices } => {
                let binding = self.env.get(name).ok_or_else(|| ExprError::Unbound(name.clone()))?;
                let expected = arity(binding);
                if binding_has_arity(binding) && expected != indices.len() {
                    return Err(ExprError::Arity { name: name.clone(), expected, got: indices.len() });
                }
                match binding {
                    Binding::Real { extents, data } => {
                        let full = Value {
                            indices: (0..indices.len()).map(|a| format!("#{a}")).collect(),
                            extents: extents.clone(),
                            kind: Kind::Real,
                            dim: 1,
                            data: data.iter().map(|&x| C64::new(x, 0.0)).collect(),
                        };
                        Ok(relabel(&full, indices))
                    }
                    Binding::Operators(ops) => {
                        let dim = ops[0].nrows();
                        let mut data = Vec::with_capacity(ops.len() * dim * dim);
                        for m in ops {
                            data.extend_from_slice(m.as_slice());
                        }
                        Ok(Value { indices: indices.clone(), extents: vec![ops.len()], kind: Kind::Operator, dim, data })
                    }
                    Binding::Delta => {
                        if indices.len() != 2 {
                            return Err(ExprError::Arity { name: name.clone(), expected: 2, got: indices.len() });
                        }
                        // an index without a fixed range follows its partner
                        let (a, b) = (ext.get(&indices[0]).copied(), ext.get(&indices[1]).copied());
                        let d0 = a.or(b).unwrap_or(self.env.base_dim);
                        let d1 = b.or(a).unwrap_or(self.env.base_dim);
                        if d0 != d1 {
                            return Err(ExprError::Extent(format!("delta over ranges {d0} and {d1}")));
                        }
                        let data = (0..d0 * d0).map(|ij| C64::new(f64::from(u8::from(ij / d0 == ij % d0)), 0.0)).collect();
                        let full = Value {
                            indices: vec!["#0".into(), "#1".into()],
                            extents: vec![d0, d0],
                            kind: Kind::Real,
                            dim: 1,
                            data,
                        };
                        Ok(relabel(&full, indices))
                    }
                    Binding::Spinor(_) => unreachable!("arity check rejects indexed spinors"),
                }
            }
        }
    }
}

fn arity(b: &Binding) -> usize {
    match b {
        Binding::Real { extents, .. } => extents.len(),
        Binding::Operators(_) => 1,
        Binding::Spinor(_) => 0,
        Binding::Delta => 2,
    }
}

fn binding_has_arity(b: &Binding) -> bool {
    !matches!(b, Binding::Delta)
}

fn result_size(a: &Value, b: &Value) -> usize {
    let mut size = 1usize;
    for (i, e) in a.indices.iter().zip(&a.extents).chain(b.indices.iter().zip(&b.extents)) {
        let in_a = a.indices.contains(i);
        let in_b = b.indices.contains(i);
        if !(in_a && in_b) {
            size = size.saturating_mul(*e);
        }
    }
    let block = match (a.kind, b.kind) {
        (Kind::Real, Kind::Real) => 1,
        _ => a.block().max(b.block()),
    };
    size.saturating_mul(block)
}

/// Renames positional axes to `indices`, taking diagonals where an index repeats.
fn relabel(full: &Value, indices: &[String]) -> Value {
    let mut uniq: Vec<String> = Vec::new();
    let mut uniq_ext = Vec::new();
    for (i, e) in indices.iter().zip(&full.extents) {
        if !uniq.contains(i) {
            uniq.push(i.clone());
            uniq_ext.push(*e);
        }
    }
    let mut repeated: Vec<String> = Vec::new();
    for i in &uniq {
        if indices.iter().filter(|j| *j == i).count() == 2 {
            repeated.push(i.clone());
        }
    }
    let out_idx: Vec<String> = uniq.iter().filter(|i| !repeated.contains(i)).cloned().collect();
    let out_ext: Vec<usize> = out_idx.iter().map(|i| uniq_ext[uniq.iter().position(|u| u == i).unwrap()]).collect();
    let rep_ext: Vec<usize> = repeated.iter().map(|i| uniq_ext[uniq.iter().position(|u| u == i).unwrap()]).collect();
    let mut data = Vec::new();
    for out_multi in odometer(&out_ext) {
        let mut acc = C64::new(0.0, 0.0);
        for rep_multi in odometer(&rep_ext) {
            let multi: Vec<usize> = indices
                .iter()
                .map(|i| match repeated.iter().position(|r| r == i) {
                    Some(p) => rep_multi[p],
                    None => out_multi[out_idx.iter().position(|o| o == i).unwrap()],
                })
                .collect();
            acc += full.data[full.offset(&multi)];
        }
        data.push(acc);
    }
    Value { indices: out_idx, extents: out_ext, kind: Kind::Real, dim: 1, data }
}

pub fn evaluate(expr: &Expr, env: &Environment) -> Result<Value, ExprError> {
    evaluate_with(expr, env, ContractionOrder::Greedy)
}

pub fn evaluate_with(expr: &Expr, env: &Environment, order: ContractionOrder) -> Result<Value, ExprError> {
    Evaluator { env, order }.expr(expr, &BTreeMap::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::build_twisted_rep;
    use crate::curvature::{constant_curvature, random_curvature};
    use crate::expr::parse;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn env4() -> Environment {
        let mut env = Environment::new(4);
        env.bind_rep(&build_twisted_rep(4, 0, 1).unwrap()).unwrap();
        env.bind_curvature(&constant_curvature(4, 1.0).unwrap()).unwrap();
        env
    }

    #[test]
    fn clifford_square_sum() {
        let v = evaluate(&parse("e[i] e[i]").unwrap(), &env4()).unwrap();
        assert_eq!(v.kind, Kind::Operator);
        let m = v.operator(&[]);
        assert!((m + DMatrix::<C64>::identity(4, 4) * C64::new(4.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn ricci_contraction() {
        let v = evaluate(&parse("R[i,k,k,j]").unwrap(), &env4()).unwrap();
        assert_eq!(v.indices, vec!["i", "j"]);
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(v.real(&[i, j]), if i == j { 3.0 } else { 0.0 });
            }
        }
        let s = evaluate(&parse("R[i,k,k,i]").unwrap(), &env4()).unwrap();
        assert_eq!(s.as_scalar(), Some(12.0));
    }

    #[test]
    fn spinor_application() {
        let rep = build_twisted_rep(4, 0, 1).unwrap();
        let mut env = env4();
        let psi = crate::clifford::Spinor::random_unit(rep.dim(), &mut ChaCha8Rng::seed_from_u64(1));
        env.insert("psi", Binding::Spinor(psi.coeffs().clone())).unwrap();
        let v = evaluate(&parse("e[i] e[j] psi").unwrap(), &env).unwrap();
        let direct = rep.apply_base(0, &rep.apply_base(2, psi.coeffs()));
        let got = DVector::from_column_slice(v.entry(&[0, 2]));
        assert!((got - direct).norm() < 1e-14);
        assert!(matches!(evaluate(&parse("psi e[i] psi").unwrap(), &env), Err(ExprError::PsiTwice)));
        assert!(matches!(evaluate(&parse("psi psi").unwrap(), &env), Err(ExprError::PsiTwice)));
    }

    #[test]
    fn errors() {
        let mut env = env4();
        let h = SymTensor2::identity(4);
        env.bind_h(&h).unwrap();
        assert!(matches!(
            evaluate(&parse("h[i,j] h[i,j,k]").unwrap(), &env),
            Err(ExprError::Arity { expected: 2, got: 3, .. })
        ));
        assert!(matches!(evaluate(&parse("Q[i]").unwrap(), &env), Err(ExprError::Unbound(_))));
        assert!(matches!(env.bind("R", Binding::Delta), Err(ExprError::Reserved(_))));
        assert!(matches!(evaluate(&parse("scal[i]").unwrap(), &env), Err(ExprError::Arity { .. })));
    }

    #[test]
    fn real_broadcasts_to_identity() {
        let v = evaluate(&parse("e[i] e[j] + e[j] e[i] + 2 delta[i,j]").unwrap(), &env4()).unwrap();
        assert!(v.max_norm() < 1e-14);
    }

    #[test]
    fn orders_agree() {
        let mut env = Environment::new(5);
        env.bind_rep(&build_twisted_rep(5, 0, 1).unwrap()).unwrap();
        env.bind_curvature(&random_curvature(5, 3).unwrap()).unwrap();
        let e = parse("R[l,k,j,p] e[k] e[l] e[i] - 2 Ric[j,p] e[i] + R[i,k,k,m] R[m,q,q,j] e[p]").unwrap();
        let g = evaluate_with(&e, &env, ContractionOrder::Greedy).unwrap();
        let l = evaluate_with(&e, &env, ContractionOrder::LeftToRight).unwrap();
        let d = g.difference(&l).unwrap();
        assert!(d.max_norm() < 1e-12 * (1.0 + g.max_norm()));
    }

    #[test]
    fn per_axis_extents() {
        let mut env = Environment::new(3);
        env.bind("A", Binding::Real { extents: vec![3, 2], data: vec![1., 2., 3., 4., 5., 6.] }).unwrap();
        let v = evaluate(&parse("A[i,k] A[j,k]").unwrap(), &env).unwrap();
        assert_eq!(v.extents, vec![3, 3]);
        assert_eq!(v.real(&[0, 1]), 1. * 3. + 2. * 4.);
        let d = evaluate(&parse("A[i,k] delta[k,l]").unwrap(), &env).unwrap();
        assert_eq!(d.extents, vec![3, 2]);
        assert!(matches!(evaluate(&parse("A[i,k] A[k,j]").unwrap(), &env), Err(ExprError::Extent(_))));
    }
}
