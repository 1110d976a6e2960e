//! Qubit and N-qubit density operators, collective spin operators and
//! symmetric logarithmic derivatives.
//!
//! Basis convention: qubit 0 is the most significant bit of a computational
//! basis index, and bit value 0 is |H⟩ (σz = +1) while 1 is |V⟩.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_size, Error, Result};
use crate::numeric::{eigh, max_abs, real, CMatrix, CVector};
use crate::parametrization::Parametrization;
use crate::spin::HalfInt;

/// Largest N for which dense 2^N × 2^N operators are built.
pub const MAX_DENSE_QUBITS: usize = 12;
/// Largest N for which the angular eigenbasis is diagonalized.
pub const MAX_EIGENBASIS_QUBITS: usize = 8;

/// Which of the two parameters a derivative, SLD or Fisher quantity refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parameter {
    Epsilon,
    Phi,
}

impl fmt::Display for Parameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Self::Epsilon => "epsilon",
            Self::Phi => "phi",
        })
    }
}

/// A qubit whose Bloch vector s(ε)·(sin φ, 0, cos φ) lies in the x–z plane.
#[derive(Clone, Debug, PartialEq)]
pub struct BlochState {
    epsilon: f64,
    phi: f64,
    parametrization: Parametrization,
}

impl BlochState {
    pub fn new(epsilon: f64, phi: f64, parametrization: Parametrization) -> Result<Self> {
        let (lo, hi) = parametrization.domain();
        if !(epsilon >= lo && epsilon <= hi) {
            return Err(Error::EpsilonDomain { epsilon, lo, hi });
        }
        let s = parametrization.s(epsilon);
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::BlochLength(s));
        }
        if !phi.is_finite() {
            return Err(Error::Invalid(format!("phi = {phi} is not finite")));
        }
        Ok(Self {
            epsilon,
            phi,
            parametrization,
        })
    }

    /// State with the identity parametrization, so that ε = s and ∂s/∂ε = 1.
    pub fn with_length(s: f64, phi: f64) -> Result<Self> {
        Self::new(s, phi, Parametrization::Identity)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn parametrization(&self) -> &Parametrization {
        &self.parametrization
    }

    pub fn s(&self) -> f64 {
        self.parametrization.s(self.epsilon)
    }

    pub fn ds(&self) -> f64 {
        self.parametrization.ds(self.epsilon)
    }

    /// 1 − s, accurate for nearly pure states.
    pub fn deficit(&self) -> f64 {
        self.parametrization.deficit(self.epsilon)
    }

    /// 1 − s², accurate for nearly pure states.
    pub fn one_minus_s_sq(&self) -> f64 {
        let d = self.deficit();
        d * (2.0 - d)
    }

    /// tanh β = s; infinite for a pure state.
    pub fn beta(&self) -> f64 {
        let d = self.deficit();
        0.5 * ((2.0 - d).ln() - d.ln())
    }

    pub fn bloch_vector(&self) -> [f64; 3] {
        let s = self.s();
        [s * self.phi.sin(), 0.0, s * self.phi.cos()]
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(epsilon, self.phi, self.parametrization.clone())
    }

    pub fn with_phi(&self, phi: f64) -> Result<Self> {
        Self::new(self.epsilon, phi, self.parametrization.clone())
    }

    /// Single-qubit ½(1 + s·σ).
    pub fn qubit_density(&self) -> CMatrix {
        qubit_density_raw(self.s(), self.phi)
    }

    /// ∂ρ/∂θ for a single qubit.
    pub fn qubit_derivative(&self, which: Parameter) -> CMatrix {
        let (s, ds, phi) = (self.s(), self.ds(), self.phi);
        let (x, z) = match which {
            Parameter::Epsilon => (ds * phi.sin(), ds * phi.cos()),
            Parameter::Phi => (s * phi.cos(), -s * phi.sin()),
        };
        CMatrix::from_row_slice(
            2,
            2,
            &[real(z / 2.0), real(x / 2.0), real(x / 2.0), real(-z / 2.0)],
        )
    }
}

pub(crate) fn qubit_density_raw(s: f64, phi: f64) -> CMatrix {
    let (x, z) = (s * phi.sin(), s * phi.cos());
    CMatrix::from_row_slice(
        2,
        2,
        &[
            real((1.0 + z) / 2.0),
            real(x / 2.0),
            real(x / 2.0),
            real((1.0 - z) / 2.0),
        ],
    )
}

/// e^{-iσ_y φ/2}.
pub fn qubit_rotation(phi: f64) -> CMatrix {
    let (c, s) = ((phi / 2.0).cos(), (phi / 2.0).sin());
    CMatrix::from_row_slice(2, 2, &[real(c), real(-s), real(s), real(c)])
}

pub(crate) fn kron_power(single: &CMatrix, n: usize) -> CMatrix {
    let mut acc = single.clone();
    for _ in 1..n {
        acc = acc.kronecker(single);
    }
    acc
}

/// A dense complex operator on an N-qubit space.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    entries: CMatrix,
}

impl DenseOperator {
    pub fn new(entries: CMatrix) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::Dimension(format!(
                "operator must be square, got {}×{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        Ok(Self { entries })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: CMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            entries: CMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix {
        self.entries
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    /// Largest modulus of A − A†.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for r in 0..d {
            for c in r..d {
                worst = worst.max((self.entries[(r, c)] - self.entries[(c, r)].conj()).norm());
            }
        }
        worst
    }

    /// Expectation tr{ρ A} with `self` as ρ.
    pub fn expectation(&self, observable: &CMatrix) -> Complex64 {
        let d = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..d {
            for c in 0..d {
                acc += self.entries[(r, c)] * observable[(c, r)];
            }
        }
        acc
    }

    /// Checks the density-operator invariants (Hermitian, unit trace, positive).
    pub fn validate_density(&self) -> Result<()> {
        let defect = self.hermiticity_defect();
        if defect > 1e-12 {
            return Err(Error::NotHermitian(defect));
        }
        let tr = self.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > 1e-12 {
            return Err(Error::Invalid(format!("density operator has trace {tr}")));
        }
        let (values, _) = eigh(&self.entries);
        if values[0] < -1e-10 {
            return Err(Error::Invalid(format!(
                "density operator has eigenvalue {}",
                values[0]
            )));
        }
        Ok(())
    }

    /// Trace distance ½‖A − B‖₁.
    pub fn trace_distance(&self, other: &DenseOperator) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension(format!(
                "{} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        let (values, _) = eigh(&(&self.entries - &other.entries));
        Ok(0.5 * values.iter().map(|v| v.abs()).sum::<f64>())
    }
}

/// N-qubit density ρ(ε, φ)^{⊗N} as a Kronecker power.
pub fn build_density(state: &BlochState, n: usize) -> Result<DenseOperator> {
    check_size(n, 1, MAX_DENSE_QUBITS)?;
    let s = state.s();
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::BlochLength(s));
    }
    DenseOperator::new(kron_power(&state.qubit_density(), n))
}

/// The same density built as e^{-iJ_yφ} e^{2βJ_z} e^{iJ_yφ} / (2 cosh β)^N.
///
/// Requires s < 1; the rotation is obtained by diagonalizing the collective J_y.
pub fn density_rotated_thermal(state: &BlochState, n: usize) -> Result<DenseOperator> {
    check_size(n, 1, MAX_DENSE_QUBITS)?;
    let s = state.s();
    if !(0.0..1.0).contains(&s) {
        return Err(Error::BlochLength(s));
    }
    let beta = state.beta();
    let spin = collective_spin(n)?;
    let (values, vectors) = eigh(spin.jy.matrix());
    let phases = CMatrix::from_diagonal(&CVector::from_iterator(
        values.len(),
        values
            .iter()
            .map(|&m| Complex64::from_polar(1.0, -state.phi() * m)),
    ));
    let rotation = &vectors * phases * vectors.adjoint();
    let norm = (2.0 * beta.cosh()).powi(n as i32);
    let thermal = CMatrix::from_diagonal(&CVector::from_iterator(
        1 << n,
        spin.jz
            .matrix()
            .diagonal()
            .iter()
            .map(|m| real((2.0 * beta * m.re).exp() / norm)),
    ));
    DenseOperator::new(&rotation * thermal * rotation.adjoint())
}

/// ∂ρ_N/∂θ by the product rule over the N factors.
pub fn density_derivative(state: &BlochState, n: usize, which: Parameter) -> Result<DenseOperator> {
    check_size(n, 1, MAX_DENSE_QUBITS)?;
    let rho = state.qubit_density();
    let drho = state.qubit_derivative(which);
    let mut total = CMatrix::zeros(1 << n, 1 << n);
    for slot in 0..n {
        let mut acc = if slot == 0 { drho.clone() } else { rho.clone() };
        for k in 1..n {
            acc = acc.kronecker(if k == slot { &drho } else { &rho });
        }
        total += acc;
    }
    DenseOperator::new(total)
}

/// e^{-iJ_yφ} on N qubits.
pub fn collective_rotation(phi: f64, n: usize) -> Result<CMatrix> {
    check_size(n, 1, MAX_DENSE_QUBITS)?;
    Ok(kron_power(&qubit_rotation(phi), n))
}

/// Collective spin J = ½ Σ σ⁽ⁱ⁾ and J².
#[derive(Clone, Debug)]
pub struct CollectiveSpin {
    pub n: usize,
    pub jx: DenseOperator,
    pub jy: DenseOperator,
    pub jz: DenseOperator,
    pub jsq: DenseOperator,
}

type SparseColumns = Vec<Vec<(usize, Complex64)>>;

fn sparse_component(n: usize, axis: usize) -> SparseColumns {
    let dim = 1usize << n;
    (0..dim)
        .map(|x| {
            if axis == 2 {
                let m: f64 = (0..n)
                    .map(|q| if x >> q & 1 == 0 { 0.5 } else { -0.5 })
                    .sum();
                return vec![(x, real(m))];
            }
            (0..n)
                .map(|q| {
                    let mask = 1usize << (n - 1 - q);
                    let coeff = match (axis, x & mask == 0) {
                        (0, _) => real(0.5),
                        (_, true) => Complex64::new(0.0, 0.5),
                        (_, false) => Complex64::new(0.0, -0.5),
                    };
                    (x ^ mask, coeff)
                })
                .collect()
        })
        .collect()
}

fn sparse_to_dense(cols: &SparseColumns) -> CMatrix {
    let dim = cols.len();
    let mut m = CMatrix::zeros(dim, dim);
    for (c, col) in cols.iter().enumerate() {
        for &(r, v) in col {
            m[(r, c)] += v;
        }
    }
    m
}

fn accumulate_square(cols: &SparseColumns, into: &mut CMatrix) {
    for (c, col) in cols.iter().enumerate() {
        for &(mid, a) in col {
            for &(r, b) in &cols[mid] {
                into[(r, c)] += b * a;
            }
        }
    }
}

/// Builds J_x, J_y, J_z and J² = J_x² + J_y² + J_z² for N qubits.
pub fn collective_spin(n: usize) -> Result<CollectiveSpin> {
    check_size(n, 1, MAX_DENSE_QUBITS)?;
    let parts: Vec<SparseColumns> = (0..3).map(|axis| sparse_component(n, axis)).collect();
    let dim = 1usize << n;
    let mut jsq = CMatrix::zeros(dim, dim);
    for p in &parts {
        accumulate_square(p, &mut jsq);
    }
    Ok(CollectiveSpin {
        n,
        jx: DenseOperator {
            entries: sparse_to_dense(&parts[0]),
        },
        jy: DenseOperator {
            entries: sparse_to_dense(&parts[1]),
        },
        jz: DenseOperator {
            entries: sparse_to_dense(&parts[2]),
        },
        jsq: DenseOperator { entries: jsq },
    })
}

/// Closed-form SLDs: L_ε = ∂s/∂ε · [2 R J_z R† − N s] / (1 − s²) and
/// L_φ = 2 s R J_x R†, with R = e^{-iJ_yφ}.
pub fn sld_closed_form(state: &BlochState, n: usize, which: Parameter) -> Result<DenseOperator> {
    let spin = collective_spin(n)?;
    sld_from_spin(state, &spin, which)
}

pub(crate) fn sld_from_spin(
    state: &BlochState,
    spin: &CollectiveSpin,
    which: Parameter,
) -> Result<DenseOperator> {
    let (s, phi) = (state.s(), state.phi());
    let (c, sn) = (phi.cos(), phi.sin());
    let jx = spin.jx.matrix();
    let jz = spin.jz.matrix();
    let entries = match which {
        Parameter::Epsilon => {
            if s >= 1.0 {
                return Err(Error::SingularSld);
            }
            let rotated_z = jz * real(c) + jx * real(sn);
            let dim = jx.nrows();
            (rotated_z * real(2.0) - CMatrix::identity(dim, dim) * real(spin.n as f64 * s))
                * real(state.ds() / state.one_minus_s_sq())
        }
        Parameter::Phi => (jx * real(c) - jz * real(sn)) * real(2.0 * s),
    };
    DenseOperator::new(entries)
}

/// Solves ½(Lρ + ρL) = ∂ρ in the eigenbasis of ρ.
///
/// Pairs of eigenvalues whose sum is below 1e-12 × λ_max are treated as
/// kernel and L is set to zero there.
pub fn sld_numeric(rho: &DenseOperator, drho: &DenseOperator) -> Result<DenseOperator> {
    if rho.dim() != drho.dim() {
        return Err(Error::Dimension(format!(
            "ρ is {}, ∂ρ is {}",
            rho.dim(),
            drho.dim()
        )));
    }
    let scale = max_abs(rho.matrix()).max(1.0);
    for op in [rho, drho] {
        let defect = op.hermiticity_defect();
        if defect > 1e-10 * scale {
            return Err(Error::NotHermitian(defect));
        }
    }
    let tr = drho.trace().norm();
    if tr > 1e-10 {
        return Err(Error::Invalid(format!("∂ρ has trace {tr:e}, expected 0")));
    }
    let (values, vectors) = eigh(rho.matrix());
    let lambda_max = values.iter().cloned().fold(0.0, f64::max);
    let threshold = 1e-12 * lambda_max;
    let rotated = vectors.adjoint() * drho.matrix() * &vectors;
    let d = rho.dim();
    let l = CMatrix::from_fn(d, d, |a, b| {
        let denom = values[a] + values[b];
        if denom > threshold {
            rotated[(a, b)] * (2.0 / denom)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    DenseOperator::new(&vectors * l * vectors.adjoint())
}

/// A simultaneous eigenvector |j, m, g⟩ of J² and J_z.
#[derive(Clone, Debug)]
pub struct AngularEigenvector {
    pub j: HalfInt,
    pub m: HalfInt,
    /// Multiplicity label in 1..=μ_j.
    pub g: usize,
    pub vector: CVector,
}

/// Complete orthonormal eigenbasis of (J², J_z) on N ≤ 8 qubits.
///
/// J_z is diagonal in the computational basis, so J² is diagonalized inside
/// each fixed-m block. Within a (j, m) eigenspace the vectors are produced by
/// Gram–Schmidt over the projections of computational basis states taken in
/// ascending index order, which makes the multiplicity labels independent of
/// the eigen-solver's internal choices.
pub fn angular_eigenbasis(n: usize) -> Result<Vec<AngularEigenvector>> {
    check_size(n, 1, MAX_EIGENBASIS_QUBITS)?;
    let spin = collective_spin(n)?;
    let jsq = spin.jsq.matrix();
    let mut out = Vec::with_capacity(1 << n);
    for flips in 0..=n {
        let m = HalfInt::from_twice(n as i64 - 2 * flips as i64);
        let block: Vec<usize> = (0..1usize << n)
            .filter(|x| x.count_ones() as usize == flips)
            .collect();
        let size = block.len();
        let sub = DMatrix::<f64>::from_fn(size, size, |r, c| jsq[(block[r], block[c])].re);
        let eig = sub.symmetric_eigen();

        let mut by_j: Vec<(HalfInt, Vec<usize>)> = Vec::new();
        for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
            let j = (-1.0 + (1.0 + 4.0 * lambda).sqrt()) / 2.0;
            let j = HalfInt::from_twice((2.0 * j).round() as i64);
            match by_j.iter_mut().find(|(jj, _)| *jj == j) {
                Some((_, ks)) => ks.push(k),
                None => by_j.push((j, vec![k])),
            }
        }
        by_j.sort_by_key(|e| std::cmp::Reverse(e.0));

        for (j, ks) in by_j {
            let projector = DMatrix::<f64>::from_fn(size, size, |r, c| {
                ks.iter()
                    .map(|&k| eig.eigenvectors[(r, k)] * eig.eigenvectors[(c, k)])
                    .sum()
            });
            let mut basis: Vec<nalgebra::DVector<f64>> = Vec::with_capacity(ks.len());
            for seed in 0..size {
                if basis.len() == ks.len() {
                    break;
                }
                let mut v = projector.column(seed).clone_owned();
                for _ in 0..2 {
                    for u in &basis {
                        let overlap = u.dot(&v);
                        v -= u * overlap;
                    }
                }
                let norm = v.norm();
                if norm > 1e-6 {
                    basis.push(v / norm);
                }
            }
            if basis.len() != ks.len() {
                return Err(Error::Invalid(format!(
                    "could not span the j = {j}, m = {m} eigenspace"
                )));
            }
            for (g, v) in basis.into_iter().enumerate() {
                let mut full = CVector::zeros(1 << n);
                for (r, &x) in block.iter().enumerate() {
                    full[x] = real(v[r]);
                }
                out.push(AngularEigenvector {
                    j,
                    m,
                    g: g + 1,
                    vector: full,
                });
            }
        }
    }
    Ok(out)
}

/// Projectors P_j onto each total-angular-momentum subspace, largest j first.
pub fn j_projectors(n: usize) -> Result<Vec<(HalfInt, DenseOperator)>> {
    let basis = angular_eigenbasis(n)?;
    let dim = 1usize << n;
    let mut out: Vec<(HalfInt, CMatrix)> = Vec::new();
    for v in &basis {
        let outer = &v.vector * v.vector.adjoint();
        match out.iter_mut().find(|(j, _)| *j == v.j) {
            Some((_, p)) => *p += outer,
            None => out.push((v.j, outer)),
        }
    }
    out.sort_by_key(|e| std::cmp::Reverse(e.0));
    debug_assert!(out.iter().all(|(_, p)| p.nrows() == dim));
    Ok(out
        .into_iter()
        .map(|(j, p)| (j, DenseOperator { entries: p }))
        .collect())
}
