//! Truncated Fock-space operator algebra on a fixed tensor-product ordering
//! (qubit, phonon[, cavity]).

use crate::error::{Error, Result};
use crate::sparse::Csr;
use crate::C64;
use nalgebra::DMatrix;
use std::fmt;
use std::ops::{Add, Mul, Sub};

/// Operators on spaces up to this size are kept dense.
pub const DENSE_LIMIT: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HilbertSpace {
    dims: Vec<usize>,
    total: usize,
}

impl HilbertSpace {
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.total
    }

    pub fn n_slots(&self) -> usize {
        self.dims.len()
    }

    /// Flat index of a per-slot multi-index (first slot most significant).
    pub fn flat_index(&self, levels: &[usize]) -> usize {
        levels.iter().zip(&self.dims).fold(0, |acc, (&l, &d)| acc * d + l)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (k, &d) in self.dims.iter().enumerate().rev() {
            out[k] = flat % d;
            flat /= d;
        }
        out
    }
}

impl fmt::Display for HilbertSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.dims.iter().map(|d| d.to_string()).collect();
        write!(f, "[{}]", s.join("x"))
    }
}

pub fn make_space(dims: &[usize]) -> Result<HilbertSpace> {
    if dims.is_empty() {
        return Err(Error::InvalidArgument("empty subsystem list".into()));
    }
    if dims.iter().any(|&d| d == 0) {
        return Err(Error::InvalidArgument("subsystem dimension must be positive".into()));
    }
    Ok(HilbertSpace { dims: dims.to_vec(), total: dims.iter().product() })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Repr {
    Dense(DMatrix<C64>),
    Sparse(Csr),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    space: HilbertSpace,
    repr: Repr,
}

impl Operator {
    /// Picks the dense or sparse representation from the space size.
    pub fn from_csr(space: &HilbertSpace, m: Csr) -> Result<Operator> {
        let n = space.total_dim();
        if m.nrows != n || m.ncols != n {
            return Err(Error::DimensionMismatch { expected: n, got: m.nrows.max(m.ncols) });
        }
        let repr = if n <= DENSE_LIMIT { Repr::Dense(m.to_dense()) } else { Repr::Sparse(m) };
        Ok(Operator { space: space.clone(), repr })
    }

    pub fn from_dense(space: &HilbertSpace, m: DMatrix<C64>) -> Result<Operator> {
        let n = space.total_dim();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: m.nrows().max(m.ncols()) });
        }
        if n <= DENSE_LIMIT {
            Ok(Operator { space: space.clone(), repr: Repr::Dense(m) })
        } else {
            Ok(Operator { space: space.clone(), repr: Repr::Sparse(Csr::from_dense(&m)) })
        }
    }

    /// Single-subsystem operator from a small dense matrix.
    pub fn local(m: DMatrix<C64>) -> Operator {
        let space = make_space(&[m.nrows()]).expect("nonempty matrix");
        Operator::from_dense(&space, m).expect("square matrix")
    }

    pub fn zeros(space: &HilbertSpace) -> Operator {
        Operator::from_csr(space, Csr::zeros(space.total_dim(), space.total_dim())).unwrap()
    }

    pub fn identity(space: &HilbertSpace) -> Operator {
        Operator::from_csr(space, Csr::identity(space.total_dim())).unwrap()
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn repr(&self) -> &Repr {
        &self.repr
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.repr, Repr::Sparse(_))
    }

    pub fn to_csr(&self) -> Csr {
        match &self.repr {
            Repr::Dense(m) => Csr::from_dense(m),
            Repr::Sparse(s) => s.clone(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        match &self.repr {
            Repr::Dense(m) => m.clone(),
            Repr::Sparse(s) => s.to_dense(),
        }
    }

    pub fn dagger(&self) -> Operator {
        let repr = match &self.repr {
            Repr::Dense(m) => Repr::Dense(m.adjoint()),
            Repr::Sparse(s) => Repr::Sparse(s.adjoint()),
        };
        Operator { space: self.space.clone(), repr }
    }

    pub fn scale(&self, s: C64) -> Operator {
        let repr = match &self.repr {
            Repr::Dense(m) => Repr::Dense(m * s),
            Repr::Sparse(c) => Repr::Sparse(c.scale(s)),
        };
        Operator { space: self.space.clone(), repr }
    }

    pub fn scale_re(&self, s: f64) -> Operator {
        self.scale(C64::new(s, 0.0))
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        match &self.repr {
            Repr::Dense(m) => m[(i, j)],
            Repr::Sparse(s) => s.get(i, j),
        }
    }

    pub fn max_abs(&self) -> f64 {
        match &self.repr {
            Repr::Dense(m) => m.iter().fold(0.0f64, |a, v| a.max(v.norm())),
            Repr::Sparse(s) => s.max_abs(),
        }
    }

    /// max|A - A^dag| / max|A| (0 for the zero operator).
    pub fn hermiticity_error(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let diff = match &self.repr {
            Repr::Dense(m) => (m - m.adjoint()).iter().fold(0.0f64, |a, v| a.max(v.norm())),
            Repr::Sparse(s) => s.add_scaled(&s.adjoint(), C64::new(-1.0, 0.0)).max_abs(),
        };
        diff / scale
    }

    pub fn commutator(&self, other: &Operator) -> Operator {
        &(self * other) - &(other * self)
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        (self - other).max_abs()
    }

    fn check_same(&self, other: &Operator) {
        assert_eq!(self.space, other.space, "operators live on different spaces");
    }
}

impl<'a> Add<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn add(self, o: &Operator) -> Operator {
        self.check_same(o);
        let repr = match (&self.repr, &o.repr) {
            (Repr::Dense(a), Repr::Dense(b)) => Repr::Dense(a + b),
            _ => Repr::Sparse(self.to_csr().add_scaled(&o.to_csr(), C64::new(1.0, 0.0))),
        };
        Operator { space: self.space.clone(), repr }
    }
}

impl<'a> Sub<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn sub(self, o: &Operator) -> Operator {
        self.check_same(o);
        let repr = match (&self.repr, &o.repr) {
            (Repr::Dense(a), Repr::Dense(b)) => Repr::Dense(a - b),
            _ => Repr::Sparse(self.to_csr().add_scaled(&o.to_csr(), C64::new(-1.0, 0.0))),
        };
        Operator { space: self.space.clone(), repr }
    }
}

impl<'a> Mul<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn mul(self, o: &Operator) -> Operator {
        self.check_same(o);
        let repr = match (&self.repr, &o.repr) {
            (Repr::Dense(a), Repr::Dense(b)) => Repr::Dense(a * b),
            _ => Repr::Sparse(self.to_csr().matmul(&o.to_csr())),
        };
        Operator { space: self.space.clone(), repr }
    }
}

impl Mul<C64> for &Operator {
    type Output = Operator;
    fn mul(self, s: C64) -> Operator {
        self.scale(s)
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, s: f64) -> Operator {
        self.scale_re(s)
    }
}

/// Building blocks on a single subsystem.
pub mod local {
    use super::*;

    pub fn destroy(n: usize) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(n, n);
        for k in 1..n {
            m[(k - 1, k)] = C64::new((k as f64).sqrt(), 0.0);
        }
        m
    }

    pub fn number(n: usize) -> DMatrix<C64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |k, _| C64::new(k as f64, 0.0)))
    }

    pub fn identity(n: usize) -> DMatrix<C64> {
        DMatrix::identity(n, n)
    }

    /// Qubit lowering operator. Level 0 is the ground state, so this equals `destroy(2)`.
    pub fn sigma_minus() -> DMatrix<C64> {
        destroy(2)
    }

    pub fn sigma_plus() -> DMatrix<C64> {
        destroy(2).adjoint()
    }

    /// Qubit inversion sigma+ sigma- - sigma- sigma+ in the ladder basis: diag(-1, +1).
    pub fn sigma_z() -> DMatrix<C64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(-1.0, 0.0), C64::new(1.0, 0.0)]))
    }

    /// Textbook Pauli Z, diag(+1, -1).
    pub fn pauli_z() -> DMatrix<C64> {
        -sigma_z()
    }
}

/// `I ⊗ … ⊗ op ⊗ … ⊗ I` with `op` at `slot`.
pub fn embed(op: &Operator, space: &HilbertSpace, slot: usize) -> Result<Operator> {
    if slot >= space.n_slots() {
        return Err(Error::InvalidArgument(format!("slot {slot} out of range for {space}")));
    }
    let d = space.dims()[slot];
    if op.space().total_dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: op.space().total_dim() });
    }
    let left: usize = space.dims()[..slot].iter().product();
    let right: usize = space.dims()[slot + 1..].iter().product();
    let m = Csr::identity(left).kron(&op.to_csr()).kron(&Csr::identity(right));
    Operator::from_csr(space, m)
}

pub fn embed_dense(m: DMatrix<C64>, space: &HilbertSpace, slot: usize) -> Result<Operator> {
    embed(&Operator::local(m), space, slot)
}

pub fn destroy(space: &HilbertSpace, slot: usize) -> Result<Operator> {
    let d = *space
        .dims()
        .get(slot)
        .ok_or_else(|| Error::InvalidArgument(format!("slot {slot} out of range for {space}")))?;
    if d < 2 {
        return Err(Error::InvalidArgument("destroy needs at least two levels".into()));
    }
    embed_dense(local::destroy(d), space, slot)
}

pub fn create(space: &HilbertSpace, slot: usize) -> Result<Operator> {
    Ok(destroy(space, slot)?.dagger())
}

pub fn number(space: &HilbertSpace, slot: usize) -> Result<Operator> {
    let d = *space
        .dims()
        .get(slot)
        .ok_or_else(|| Error::InvalidArgument(format!("slot {slot} out of range for {space}")))?;
    embed_dense(local::number(d), space, slot)
}

fn qubit_slot(space: &HilbertSpace, slot: usize) -> Result<()> {
    match space.dims().get(slot) {
        Some(2) => Ok(()),
        Some(d) => Err(Error::DimensionMismatch { expected: 2, got: *d }),
        None => Err(Error::InvalidArgument(format!("slot {slot} out of range for {space}"))),
    }
}

pub fn sigma_minus(space: &HilbertSpace, slot: usize) -> Result<Operator> {
    qubit_slot(space, slot)?;
    embed_dense(local::sigma_minus(), space, slot)
}

pub fn sigma_plus(space: &HilbertSpace, slot: usize) -> Result<Operator> {
    qubit_slot(space, slot)?;
    embed_dense(local::sigma_plus(), space, slot)
}

pub fn sigma_z(space: &HilbertSpace, slot: usize) -> Result<Operator> {
    qubit_slot(space, slot)?;
    embed_dense(local::sigma_z(), space, slot)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    space: HilbertSpace,
    matrix: DMatrix<C64>,
}

impl DensityMatrix {
    /// Wraps a matrix without normalising; see [`DensityMatrix::validate`].
    pub fn new(space: &HilbertSpace, matrix: DMatrix<C64>) -> Result<DensityMatrix> {
        let n = space.total_dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: matrix.nrows() });
        }
        Ok(DensityMatrix { space: space.clone(), matrix })
    }

    pub fn pure(space: &HilbertSpace, ket: &[C64]) -> Result<DensityMatrix> {
        let v = nalgebra::DVector::from_column_slice(ket);
        let nrm = v.norm();
        if nrm == 0.0 {
            return Err(Error::InvalidArgument("zero ket".into()));
        }
        let v = v / C64::new(nrm, 0.0);
        DensityMatrix::new(space, &v * v.adjoint())
    }

    /// Column-major vectorisation, as used by the Liouvillian.
    pub fn from_vec(space: &HilbertSpace, v: &[C64]) -> Result<DensityMatrix> {
        let n = space.total_dim();
        if v.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: v.len() });
        }
        DensityMatrix::new(space, DMatrix::from_column_slice(n, n, v))
    }

    pub fn to_vec(&self) -> Vec<C64> {
        self.matrix.as_slice().to_vec()
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// Divide by the trace and symmetrise.
    pub fn normalized(&self) -> DensityMatrix {
        let m = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        let t = m.trace();
        DensityMatrix { space: self.space.clone(), matrix: m / t }
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).iter().fold(0.0f64, |a, v| a.max(v.norm()))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        h.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.matrix.nrows()).map(|i| self.matrix[(i, i)].re).collect()
    }

    /// Checks trace, Hermiticity and (for small spaces) positivity.
    pub fn validate(&self) -> Result<()> {
        let t = self.trace();
        if (t - C64::new(1.0, 0.0)).norm() > 1e-8 {
            return Err(Error::InvalidArgument(format!("trace {t} differs from 1")));
        }
        let h = self.hermiticity_error();
        if h > 1e-10 {
            return Err(Error::NotHermitian(h));
        }
        if self.matrix.nrows() <= 400 {
            let e = self.min_eigenvalue();
            if e < -1e-7 {
                return Err(Error::InvalidArgument(format!("negative eigenvalue {e:.3e}")));
            }
        }
        Ok(())
    }

    /// Trace distance ½‖ρ − σ‖₁.
    pub fn trace_distance(&self, other: &DensityMatrix) -> f64 {
        let d = &self.matrix - &other.matrix;
        let h = (&d + d.adjoint()) * C64::new(0.5, 0.0);
        0.5 * h.symmetric_eigenvalues().iter().map(|e| e.abs()).sum::<f64>()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SlotState {
    Fock(usize),
    Coherent(C64),
    Thermal(f64),
}

fn slot_density(kind: &SlotState, d: usize) -> Result<DMatrix<C64>> {
    match *kind {
        SlotState::Fock(n) => {
            if n >= d {
                return Err(Error::Truncation(format!("Fock index {n} beyond {d} levels")));
            }
            let mut m = DMatrix::zeros(d, d);
            m[(n, n)] = C64::new(1.0, 0.0);
            Ok(m)
        }
        SlotState::Coherent(alpha) => {
            // amplitudes e^{-|a|²/2} aⁿ/√n!, built recursively
            let mut c = Vec::with_capacity(d);
            let mut amp = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
            for n in 0..d {
                c.push(amp);
                amp = amp * alpha / ((n + 1) as f64).sqrt();
            }
            let total: f64 = c.iter().map(|z| z.norm_sqr()).sum();
            let top = c[d - 1].norm_sqr();
            if top > 1e-6 * total {
                return Err(Error::Truncation(format!(
                    "coherent amplitude {alpha} puts {:.2e} of its weight in the top level",
                    top / total
                )));
            }
            let v = nalgebra::DVector::from_vec(c) / C64::new(total.sqrt(), 0.0);
            Ok(&v * v.adjoint())
        }
        SlotState::Thermal(nbar) => {
            if nbar < 0.0 {
                return Err(Error::InvalidArgument("negative thermal occupation".into()));
            }
            let mut m = DMatrix::zeros(d, d);
            let r = nbar / (1.0 + nbar);
            let mut p = 1.0 / (1.0 + nbar);
            let mut total = 0.0;
            for n in 0..d {
                m[(n, n)] = C64::new(p, 0.0);
                total += p;
                p *= r;
            }
            Ok(m / C64::new(total, 0.0))
        }
    }
}

/// Product state, one kind per slot.
pub fn make_state(space: &HilbertSpace, kinds: &[SlotState]) -> Result<DensityMatrix> {
    if kinds.len() != space.n_slots() {
        return Err(Error::DimensionMismatch { expected: space.n_slots(), got: kinds.len() });
    }
    let mut m = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
    for (k, &d) in kinds.iter().zip(space.dims()) {
        m = m.kronecker(&slot_density(k, d)?);
    }
    DensityMatrix::new(space, m)
}

/// Vacuum (ground) state on every slot.
pub fn ground_state(space: &HilbertSpace) -> DensityMatrix {
    let kinds = vec![SlotState::Fock(0); space.n_slots()];
    make_state(space, &kinds).expect("vacuum always fits")
}

pub fn expectation(op: &Operator, state: &DensityMatrix) -> Result<C64> {
    if op.space() != state.space() {
        return Err(Error::InvalidArgument(format!(
            "operator on {} but state on {}",
            op.space(),
            state.space()
        )));
    }
    let rho = state.matrix();
    let mut s = C64::new(0.0, 0.0);
    match op.repr() {
        Repr::Dense(m) => {
            for j in 0..m.ncols() {
                for i in 0..m.nrows() {
                    s += m[(i, j)] * rho[(j, i)];
                }
            }
        }
        Repr::Sparse(c) => {
            for (i, j, v) in c.iter() {
                s += v * rho[(j, i)];
            }
        }
    }
    Ok(s)
}

pub fn partial_trace(state: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let space = state.space();
    if keep.is_empty() {
        return Err(Error::InvalidArgument("keep set is empty".into()));
    }
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.iter().any(|&k| k >= space.n_slots()) {
        return Err(Error::InvalidArgument("keep slot out of range".into()));
    }
    let kdims: Vec<usize> = keep.iter().map(|&k| space.dims()[k]).collect();
    let out_space = make_space(&kdims)?;
    let n = space.total_dim();
    let m = out_space.total_dim();
    let mut out = DMatrix::zeros(m, m);
    let idx: Vec<Vec<usize>> = (0..n).map(|i| space.multi_index(i)).collect();
    let reduced: Vec<usize> =
        idx.iter().map(|mi| out_space.flat_index(&keep.iter().map(|&k| mi[k]).collect::<Vec<_>>())).collect();
    let traced: Vec<usize> = idx
        .iter()
        .map(|mi| {
            (0..space.n_slots())
                .filter(|s| !keep.contains(s))
                .fold(0, |acc, s| acc * space.dims()[s] + mi[s])
        })
        .collect();
    let rho = state.matrix();
    for i in 0..n {
        for j in 0..n {
            if traced[i] == traced[j] {
                out[(reduced[i], reduced[j])] += rho[(i, j)];
            }
        }
    }
    DensityMatrix::new(&out_space, out)
}

/// Population of the top `count` levels of `slot`.
pub fn top_level_population(state: &DensityMatrix, slot: usize, count: usize) -> f64 {
    let space = state.space();
    let d = space.dims()[slot];
    let lo = d.saturating_sub(count);
    (0..space.total_dim())
        .filter(|&i| space.multi_index(i)[slot] >= lo)
        .map(|i| state.matrix()[(i, i)].re)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one() -> C64 {
        C64::new(1.0, 0.0)
    }

    #[test]
    fn space_sizes() {
        assert_eq!(make_space(&[2]).unwrap().total_dim(), 2);
        assert_eq!(make_space(&[2, 60]).unwrap().total_dim(), 120);
        assert_eq!(make_space(&[2, 60, 5]).unwrap().total_dim(), 600);
        assert!(make_space(&[]).is_err());
        assert!(make_space(&[2, 0]).is_err());
    }

    #[test]
    fn index_round_trip() {
        let s = make_space(&[2, 3, 4]).unwrap();
        for i in 0..s.total_dim() {
            assert_eq!(s.flat_index(&s.multi_index(i)), i);
        }
    }

    #[test]
    fn destroy_on_qubit_is_sigma_minus() {
        let s = make_space(&[2]).unwrap();
        assert_eq!(destroy(&s, 0).unwrap(), sigma_minus(&s, 0).unwrap());
    }

    #[test]
    fn destroy_lowers_fock_four() {
        let s = make_space(&[6]).unwrap();
        let a = destroy(&s, 0).unwrap().to_dense();
        let mut ket = nalgebra::DVector::zeros(6);
        ket[4] = one();
        let out = a * ket;
        assert_eq!(out[3], C64::new(2.0, 0.0));
        assert_eq!(out.iter().filter(|v| v.norm() > 0.0).count(), 1);
    }

    #[test]
    fn truncated_commutator() {
        let n = 7;
        let s = make_space(&[n]).unwrap();
        let a = destroy(&s, 0).unwrap();
        let c = a.commutator(&a.dagger()).to_dense();
        for i in 0..n {
            for j in 0..n {
                let expect = if i != j {
                    0.0
                } else if i == n - 1 {
                    1.0 - n as f64
                } else {
                    1.0
                };
                assert!((c[(i, j)] - C64::new(expect, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn embed_identity_and_pauli() {
        let s = make_space(&[2, 3]).unwrap();
        let id = embed(&Operator::local(local::identity(3)), &s, 1).unwrap();
        assert_eq!(id, Operator::identity(&s));
        let z = embed_dense(local::pauli_z(), &s, 0).unwrap().to_dense();
        let expect = [1.0, 1.0, 1.0, -1.0, -1.0, -1.0];
        for i in 0..6 {
            for j in 0..6 {
                let e = if i == j { expect[i] } else { 0.0 };
                assert_eq!(z[(i, j)], C64::new(e, 0.0));
            }
        }
    }

    #[test]
    fn embed_rejects_wrong_size() {
        let s = make_space(&[2, 3]).unwrap();
        assert!(embed_dense(local::destroy(4), &s, 1).is_err());
        assert!(destroy(&s, 5).is_err());
    }

    #[test]
    fn distinct_slots_commute() {
        let s = make_space(&[2, 5, 3]).unwrap();
        let a = destroy(&s, 1).unwrap();
        let c = destroy(&s, 2).unwrap().dagger();
        let sm = sigma_minus(&s, 0).unwrap();
        assert!(a.commutator(&c).max_abs() <= 1e-12);
        assert!(a.commutator(&sm).max_abs() <= 1e-12);
        assert!(sm.commutator(&c).max_abs() <= 1e-12);
    }

    #[test]
    fn sparse_and_dense_agree() {
        // 2x40 = 80 > DENSE_LIMIT
        let s = make_space(&[2, 40]).unwrap();
        let b = destroy(&s, 1).unwrap();
        assert!(b.is_sparse());
        let n = &b.dagger() * &b;
        let d = n.to_dense();
        assert_eq!(d[(41, 41)], one());
        assert!((d[(3, 3)] - C64::new(3.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn dagger_round_trip_exact() {
        let s = make_space(&[2, 4]).unwrap();
        let a = destroy(&s, 1).unwrap();
        assert_eq!(a.dagger().dagger(), a);
    }

    #[test]
    fn expectations_of_simple_states() {
        let s = make_space(&[2, 30]).unwrap();
        let rho = make_state(&s, &[SlotState::Fock(0), SlotState::Coherent(C64::new(2.0, 0.0))]).unwrap();
        let n = number(&s, 1).unwrap();
        assert!((expectation(&n, &rho).unwrap().re - 4.0).abs() < 1e-9);
        assert!((expectation(&Operator::identity(&s), &rho).unwrap() - one()).norm() < 1e-12);
        assert!((expectation(&sigma_z(&s, 0).unwrap(), &rho).unwrap().re + 1.0).abs() < 1e-14);
    }

    #[test]
    fn thermal_populations_geometric() {
        let s = make_space(&[40]).unwrap();
        let rho = make_state(&s, &[SlotState::Thermal(1.0)]).unwrap();
        for n in 0..10 {
            let p = rho.matrix()[(n, n)].re;
            assert!((p - 0.5f64.powi(n as i32 + 1)).abs() < 1e-10);
        }
    }

    #[test]
    fn state_errors() {
        let s = make_space(&[5]).unwrap();
        assert!(matches!(make_state(&s, &[SlotState::Fock(5)]), Err(Error::Truncation(_))));
        assert!(matches!(make_state(&s, &[SlotState::Coherent(C64::new(3.0, 0.0))]), Err(Error::Truncation(_))));
    }

    #[test]
    fn partial_trace_of_product() {
        let s = make_space(&[2, 6]).unwrap();
        let rho = make_state(&s, &[SlotState::Fock(1), SlotState::Thermal(0.3)]).unwrap();
        let ph = partial_trace(&rho, &[1]).unwrap();
        let expect = make_state(&make_space(&[6]).unwrap(), &[SlotState::Thermal(0.3)]).unwrap();
        assert!((ph.matrix() - expect.matrix()).norm() < 1e-14);
        assert!((ph.trace().re - 1.0).abs() < 1e-10);
        assert!(partial_trace(&rho, &[]).is_err());
    }

    #[test]
    fn bell_state_reduces_to_mixed() {
        let s = make_space(&[2, 2]).unwrap();
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let zero = C64::new(0.0, 0.0);
        let rho = DensityMatrix::pure(&s, &[h, zero, zero, h]).unwrap();
        let q = partial_trace(&rho, &[0]).unwrap();
        let half = DMatrix::identity(2, 2) * C64::new(0.5, 0.0);
        assert!((q.matrix() - half).norm() < 1e-14);
    }

    #[test]
    fn expectation_space_mismatch() {
        let s1 = make_space(&[2, 3]).unwrap();
        let s2 = make_space(&[2, 4]).unwrap();
        assert!(expectation(&Operator::identity(&s1), &ground_state(&s2)).is_err());
    }
}
