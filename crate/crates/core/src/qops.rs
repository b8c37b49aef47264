//! Operator algebra for the two-level ⊗ Fock composite space: ladder and
//! Pauli operators, tensor products, expectation values and the standard
//! thermal states. Operators pick a dense or sparse backing automatically;
//! both behave identically through the public API.

use ndarray::Array2;
use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::hermitian_eigenvalues;
use crate::sparse::{CooBuilder, CsrMatrix};

/// Operators below this dimension stay dense regardless of fill.
const DENSE_DIM_LIMIT: usize = 16;
/// Above `DENSE_DIM_LIMIT`, operators with at most this fill go sparse.
const SPARSE_FILL_LIMIT: f64 = 0.05;

#[derive(Debug, Error, PartialEq)]
pub enum QopsError {
    #[error("Fock cutoff must be at least 2, got {0}")]
    FockCutoffTooSmall(usize),
    #[error("tensor product dimension {0} x {1} overflows")]
    DimensionOverflow(usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
enum OpRepr {
    Dense(Array2<Complex64>),
    Sparse(CsrMatrix),
}

/// Square complex operator on a finite Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    dim: usize,
    repr: OpRepr,
}

impl Operator {
    pub fn from_dense(mat: Array2<Complex64>) -> Operator {
        assert_eq!(mat.nrows(), mat.ncols(), "operator must be square");
        let dim = mat.nrows();
        let nnz = mat.iter().filter(|v| **v != Complex64::ZERO).count();
        if dim >= DENSE_DIM_LIMIT && (nnz as f64) <= SPARSE_FILL_LIMIT * (dim * dim) as f64 {
            Operator {
                dim,
                repr: OpRepr::Sparse(CsrMatrix::from_dense(&mat)),
            }
        } else {
            Operator {
                dim,
                repr: OpRepr::Dense(mat),
            }
        }
    }

    pub fn from_csr(mat: CsrMatrix) -> Operator {
        assert_eq!(mat.nrows(), mat.ncols(), "operator must be square");
        let dim = mat.nrows();
        if dim < DENSE_DIM_LIMIT
            || (mat.nnz() as f64) > SPARSE_FILL_LIMIT * (dim * dim) as f64
        {
            Operator {
                dim,
                repr: OpRepr::Dense(mat.to_dense()),
            }
        } else {
            Operator {
                dim,
                repr: OpRepr::Sparse(mat),
            }
        }
    }

    pub fn zeros(dim: usize) -> Operator {
        Operator::from_dense(Array2::zeros((dim, dim)))
    }

    pub fn identity(dim: usize) -> Operator {
        Operator::from_csr(CsrMatrix::identity(dim))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.repr, OpRepr::Sparse(_))
    }

    pub fn to_csr(&self) -> CsrMatrix {
        match &self.repr {
            OpRepr::Dense(m) => CsrMatrix::from_dense(m),
            OpRepr::Sparse(m) => m.clone(),
        }
    }

    pub fn to_dense(&self) -> Array2<Complex64> {
        match &self.repr {
            OpRepr::Dense(m) => m.clone(),
            OpRepr::Sparse(m) => m.to_dense(),
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        match &self.repr {
            OpRepr::Dense(m) => m[[i, j]],
            OpRepr::Sparse(m) => {
                let (cols, vals) = m.row(i);
                cols.iter()
                    .position(|&c| c == j)
                    .map_or(Complex64::ZERO, |p| vals[p])
            }
        }
    }

    /// Conjugate transpose; preserves the representation.
    pub fn dagger(&self) -> Operator {
        let repr = match &self.repr {
            OpRepr::Dense(m) => {
                let mut out = Array2::zeros((self.dim, self.dim));
                for i in 0..self.dim {
                    for j in 0..self.dim {
                        out[[i, j]] = m[[j, i]].conj();
                    }
                }
                OpRepr::Dense(out)
            }
            OpRepr::Sparse(m) => OpRepr::Sparse(m.adjoint()),
        };
        Operator {
            dim: self.dim,
            repr,
        }
    }

    pub fn scale(&self, s: Complex64) -> Operator {
        match &self.repr {
            OpRepr::Dense(m) => Operator::from_dense(m.mapv(|v| v * s)),
            OpRepr::Sparse(m) => Operator::from_csr(m.scale(s)),
        }
    }

    pub fn add(&self, other: &Operator) -> Operator {
        assert_eq!(self.dim, other.dim, "operator dimensions must match");
        match (&self.repr, &other.repr) {
            (OpRepr::Sparse(a), OpRepr::Sparse(b)) => {
                let mut acc = CooBuilder::new(self.dim, self.dim);
                acc.add_scaled(a, Complex64::ONE);
                acc.add_scaled(b, Complex64::ONE);
                Operator::from_csr(acc.build())
            }
            _ => Operator::from_dense(self.to_dense() + other.to_dense()),
        }
    }

    pub fn sub(&self, other: &Operator) -> Operator {
        self.add(&other.scale(-Complex64::ONE))
    }

    pub fn matmul(&self, other: &Operator) -> Operator {
        assert_eq!(self.dim, other.dim, "operator dimensions must match");
        match (&self.repr, &other.repr) {
            (OpRepr::Sparse(a), OpRepr::Sparse(b)) => Operator::from_csr(a.matmul(b)),
            _ => {
                let a = self.to_dense();
                let b = other.to_dense();
                let mut out = Array2::zeros((self.dim, self.dim));
                for i in 0..self.dim {
                    for k in 0..self.dim {
                        let aik = a[[i, k]];
                        if aik == Complex64::ZERO {
                            continue;
                        }
                        for j in 0..self.dim {
                            out[[i, j]] += aik * b[[k, j]];
                        }
                    }
                }
                Operator::from_dense(out)
            }
        }
    }

    /// Integer power by repeated multiplication; `pow(0)` is the identity.
    pub fn pow(&self, exp: u32) -> Operator {
        let mut out = Operator::identity(self.dim);
        for _ in 0..exp {
            out = out.matmul(self);
        }
        out
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.dim);
        match &self.repr {
            OpRepr::Sparse(m) => m.matvec(x),
            OpRepr::Dense(m) => (0..self.dim)
                .map(|i| (0..self.dim).map(|j| m[[i, j]] * x[j]).sum())
                .collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        match &self.repr {
            OpRepr::Dense(m) => m.iter().map(|v| v.norm()).fold(0.0, f64::max),
            OpRepr::Sparse(m) => m.max_abs(),
        }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let d = self.to_dense();
        for i in 0..self.dim {
            for j in i..self.dim {
                if (d[[i, j]] - d[[j, i]].conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }
}

/// Annihilation operator on a truncated Fock space:
/// ⟨n−1|a|n⟩ = √n for 1 ≤ n ≤ n_fock−1.
pub fn destroy(n_fock: usize) -> Result<Operator, QopsError> {
    if n_fock < 2 {
        return Err(QopsError::FockCutoffTooSmall(n_fock));
    }
    let mut b = CooBuilder::with_capacity(n_fock, n_fock, n_fock - 1);
    for n in 1..n_fock {
        b.push(n - 1, n, Complex64::new((n as f64).sqrt(), 0.0));
    }
    Ok(Operator::from_csr(b.build()))
}

/// Creation operator, the adjoint of `destroy`.
pub fn create(n_fock: usize) -> Result<Operator, QopsError> {
    Ok(destroy(n_fock)?.dagger())
}

/// Number operator a†a as an explicit diagonal.
pub fn number(n_fock: usize) -> Result<Operator, QopsError> {
    if n_fock < 2 {
        return Err(QopsError::FockCutoffTooSmall(n_fock));
    }
    let mut b = CooBuilder::with_capacity(n_fock, n_fock, n_fock);
    for n in 1..n_fock {
        b.push(n, n, Complex64::new(n as f64, 0.0));
    }
    Ok(Operator::from_csr(b.build()))
}

/// Two-level operators (σ_-, σ_+, σ_z) in basis order |g⟩ = 0, |e⟩ = 1,
/// with σ_- = |g⟩⟨e| and σ_z = σ_+σ_- − σ_-σ_+.
pub fn atom_ops() -> (Operator, Operator, Operator) {
    let mut sm = Array2::zeros((2, 2));
    sm[[0, 1]] = Complex64::ONE;
    let minus = Operator::from_dense(sm);
    let plus = minus.dagger();
    let z = plus.matmul(&minus).sub(&minus.matmul(&plus));
    (minus, plus, z)
}

/// Projector |e⟩⟨e| on the two-level space (the atomic energy observable).
pub fn excited_projector() -> Operator {
    let (minus, plus, _) = atom_ops();
    plus.matmul(&minus)
}

/// Tensor product with the first factor slowest: composite index
/// i_a·dim(B) + i_b.
pub fn kron(a: &Operator, b: &Operator) -> Result<Operator, QopsError> {
    a.dim()
        .checked_mul(b.dim())
        .ok_or(QopsError::DimensionOverflow(a.dim(), b.dim()))?;
    Ok(Operator::from_csr(a.to_csr().kron(&b.to_csr())))
}

pub fn commutator(a: &Operator, b: &Operator) -> Operator {
    a.matmul(b).sub(&b.matmul(a))
}

/// Density matrix, stored dense; `n_fock` records the Fock cutoff when the
/// state lives on (or contains) a truncated field factor.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    data: Array2<Complex64>,
    n_fock: Option<usize>,
}

/// Trace, Hermiticity and positivity diagnostics for a state, as reported
/// by solver postconditions.
#[derive(Debug, Clone, Copy)]
pub struct StateDiagnostics {
    pub trace_error: f64,
    pub hermiticity_defect: f64,
    pub min_eigenvalue: f64,
}

impl DensityMatrix {
    pub fn from_matrix(data: Array2<Complex64>, n_fock: Option<usize>) -> DensityMatrix {
        assert_eq!(data.nrows(), data.ncols(), "density matrix must be square");
        DensityMatrix { data, n_fock }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_fock(&self) -> Option<usize> {
        self.n_fock
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.data
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.data[[i, j]]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.data[[i, i]]).sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim() {
            for j in i..self.dim() {
                worst = worst.max((self.data[[i, j]] - self.data[[j, i]].conj()).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.data)[0]
    }

    pub fn diagnostics(&self) -> StateDiagnostics {
        StateDiagnostics {
            trace_error: (self.trace() - Complex64::ONE).norm(),
            hermiticity_defect: self.hermiticity_defect(),
            min_eigenvalue: self.min_eigenvalue(),
        }
    }

    /// (ρ + ρ†)/2, keeping the metadata.
    pub fn hermitized(&self) -> DensityMatrix {
        let n = self.dim();
        let mut out = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                out[[i, j]] = 0.5 * (self.data[[i, j]] + self.data[[j, i]].conj());
            }
        }
        DensityMatrix {
            data: out,
            n_fock: self.n_fock,
        }
    }

    pub fn normalized(&self) -> DensityMatrix {
        let tr = self.trace().re;
        assert!(tr.abs() > 0.0, "cannot normalize a traceless state");
        DensityMatrix {
            data: self.data.mapv(|v| v / tr),
            n_fock: self.n_fock,
        }
    }
}

/// Pure basis state |idx⟩⟨idx|.
pub fn basis_state(dim: usize, idx: usize) -> DensityMatrix {
    assert!(idx < dim);
    let mut m = Array2::zeros((dim, dim));
    m[[idx, idx]] = Complex64::ONE;
    DensityMatrix::from_matrix(m, None)
}

/// Truncated, renormalized thermal field state with mean occupation
/// `n_th` (before truncation); n_th = 0 is the vacuum.
pub fn thermal_fock(n_fock: usize, n_th: f64) -> DensityMatrix {
    assert!(n_fock >= 1 && n_th >= 0.0);
    let mut m = Array2::zeros((n_fock, n_fock));
    if n_th == 0.0 {
        m[[0, 0]] = Complex64::ONE;
    } else {
        let r = n_th / (n_th + 1.0);
        let mut p = 1.0;
        let mut total = 0.0;
        for n in 0..n_fock {
            m[[n, n]] = Complex64::new(p, 0.0);
            total += p;
            p *= r;
        }
        for n in 0..n_fock {
            m[[n, n]] /= total;
        }
    }
    DensityMatrix::from_matrix(m, Some(n_fock))
}

/// Thermal two-level state: excited population m_th/(2m_th + 1), the
/// detailed-balance fixed point of the γ(m_th+1)/γ·m_th channel pair.
pub fn thermal_qubit(m_th: f64) -> DensityMatrix {
    assert!(m_th >= 0.0);
    let pe = m_th / (2.0 * m_th + 1.0);
    let mut m = Array2::zeros((2, 2));
    m[[0, 0]] = Complex64::new(1.0 - pe, 0.0);
    m[[1, 1]] = Complex64::new(pe, 0.0);
    DensityMatrix::from_matrix(m, None)
}

/// Product state atom ⊗ field in the composite index convention.
pub fn tensor_state(atom: &DensityMatrix, field: &DensityMatrix) -> DensityMatrix {
    let (da, df) = (atom.dim(), field.dim());
    let mut m = Array2::zeros((da * df, da * df));
    for ia in 0..da {
        for ja in 0..da {
            let va = atom.entry(ia, ja);
            if va == Complex64::ZERO {
                continue;
            }
            for if_ in 0..df {
                for jf in 0..df {
                    m[[ia * df + if_, ja * df + jf]] = va * field.entry(if_, jf);
                }
            }
        }
    }
    DensityMatrix::from_matrix(m, Some(df))
}

/// Reduced 2×2 atom state of a composite density matrix.
pub fn atom_marginal(rho: &DensityMatrix, n_fock: usize) -> Array2<Complex64> {
    assert_eq!(rho.dim(), 2 * n_fock);
    let mut out = Array2::zeros((2, 2));
    for ia in 0..2 {
        for ja in 0..2 {
            for n in 0..n_fock {
                out[[ia, ja]] += rho.entry(ia * n_fock + n, ja * n_fock + n);
            }
        }
    }
    out
}

/// Reduced field state of a composite density matrix.
pub fn field_marginal(rho: &DensityMatrix, n_fock: usize) -> Array2<Complex64> {
    assert_eq!(rho.dim(), 2 * n_fock);
    let mut out = Array2::zeros((n_fock, n_fock));
    for n in 0..n_fock {
        for m in 0..n_fock {
            for ia in 0..2 {
                out[[n, m]] += rho.entry(ia * n_fock + n, ia * n_fock + m);
            }
        }
    }
    out
}

/// Tr(Aρ). For Hermitian A the imaginary part is round-off only.
pub fn expect(a: &Operator, rho: &DensityMatrix) -> Complex64 {
    assert_eq!(a.dim(), rho.dim(), "operator/state dimension mismatch");
    match a.is_sparse() {
        true => a
            .to_csr()
            .iter()
            .map(|(i, j, v)| v * rho.entry(j, i))
            .sum(),
        false => {
            let m = a.to_dense();
            let mut acc = Complex64::ZERO;
            for i in 0..a.dim() {
                for j in 0..a.dim() {
                    acc += m[[i, j]] * rho.entry(j, i);
                }
            }
            acc
        }
    }
}

/// Trace distance ½‖ρ − σ‖₁ between two states of equal dimension.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    assert_eq!(rho.dim(), sigma.dim());
    let diff = rho.matrix() - sigma.matrix();
    0.5 * hermitian_eigenvalues(&diff)
        .iter()
        .map(|e| e.abs())
        .sum::<f64>()
}
