//! Lindblad generators in jump, GKS and standard form, with validity checks,
//! σ-detailed balance, modular spectral data and fixed-point algebras.
//!
//! The canonical internal convention is the half form
//! L(x) = i[H,x] + Σ_j c_j (V_j† x V_j − ½{V_j†V_j, x});
//! double-convention inputs (2V†xV − {V†V,x}) are folded in by doubling the
//! weight. GKS coefficient matrices are read in the half convention as well:
//! L = i[H,·] + Σ_{αβ} c_{αβ} (F_α†·F_β − ½{F_α†F_β,·}).

use crate::condexp::{block_structure, SubalgebraSpec};
use crate::error::{Error, Result};
use crate::mat::{
    self, commutator, eye, hermitian_eig, matrix_unit, max_abs, ntrace, re, tau_inner,
    CMat, DensityMatrix, Superop,
};
use crate::tol;

/// Whether the dissipative terms read V†xV − ½{V†V,x} or 2V†xV − {V†V,x}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    Half,
    Double,
}

/// One jump operator with its nonnegative weight.
#[derive(Debug, Clone)]
pub struct Jump {
    pub op: CMat,
    pub weight: f64,
}

/// A Lindblad generator given by a Hamiltonian and weighted jump operators.
#[derive(Debug, Clone)]
pub struct LindbladGenerator {
    dim: usize,
    hamiltonian: CMat,
    jumps: Vec<Jump>,
    convention: Convention,
}

impl LindbladGenerator {
    pub fn new(hamiltonian: CMat, jumps: Vec<Jump>, convention: Convention) -> Result<Self> {
        let dim = hamiltonian.nrows();
        if !mat::is_hermitian(&hamiltonian, tol::HERMITIAN) {
            return Err(Error::NotHermitian {
                deviation: mat::hermitian_deviation(&hamiltonian),
                tol: tol::HERMITIAN,
            });
        }
        for j in &jumps {
            if j.op.nrows() != dim || j.op.ncols() != dim {
                return Err(Error::dim(format!(
                    "jump is {}x{}, expected {dim}x{dim}",
                    j.op.nrows(),
                    j.op.ncols()
                )));
            }
            if !j.weight.is_finite() || j.weight < 0.0 {
                return Err(Error::input(format!("jump weight {} must be >= 0", j.weight)));
            }
        }
        Ok(LindbladGenerator { dim, hamiltonian, jumps, convention })
    }

    /// Purely dissipative generator from weighted jumps, half convention.
    pub fn from_jumps(dim: usize, jumps: Vec<Jump>) -> Result<Self> {
        LindbladGenerator::new(mat::zeros(dim), jumps, Convention::Half)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hamiltonian(&self) -> &CMat {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    fn dissipative_factor(&self) -> f64 {
        match self.convention {
            Convention::Half => 1.0,
            Convention::Double => 2.0,
        }
    }

    /// Heisenberg action L(x).
    pub fn apply(&self, x: &CMat) -> CMat {
        let mut out = commutator(&self.hamiltonian, x) * mat::c(0.0, 1.0);
        let f = re(self.dissipative_factor());
        for j in &self.jumps {
            if j.weight == 0.0 {
                continue;
            }
            let vd = j.op.adjoint();
            let vv = &vd * &j.op;
            let term = &vd * x * &j.op - (&vv * x + x * &vv) * re(0.5);
            out += term * f * re(j.weight);
        }
        out
    }

    /// Matrix of L over row-major vectorizations; applying it to vec(x)
    /// equals vec(L(x)).
    pub fn superoperator(&self) -> Superop {
        let n = self.dim;
        let id = eye(n);
        let mut m = (self.hamiltonian.kronecker(&id) - id.kronecker(&self.hamiltonian.transpose()))
            * mat::c(0.0, 1.0);
        let f = self.dissipative_factor();
        for j in &self.jumps {
            if j.weight == 0.0 {
                continue;
            }
            let vd = j.op.adjoint();
            let vv = &vd * &j.op;
            let term = vd.kronecker(&j.op.transpose())
                - (vv.kronecker(&id) + id.kronecker(&vv.transpose())) * re(0.5);
            m += term * re(f * j.weight);
        }
        Superop { n, mat: m }
    }

    /// Schrödinger (predual) action L_*(ρ).
    pub fn apply_predual(&self, rho: &CMat) -> CMat {
        let mut out = commutator(&self.hamiltonian, rho) * mat::c(0.0, -1.0);
        let f = re(self.dissipative_factor());
        for j in &self.jumps {
            if j.weight == 0.0 {
                continue;
            }
            let vd = j.op.adjoint();
            let vv = &vd * &j.op;
            let term = &j.op * rho * &vd - (&vv * rho + rho * &vv) * re(0.5);
            out += term * f * re(j.weight);
        }
        out
    }

    pub fn predual_superop(&self) -> Superop {
        self.superoperator().adjoint()
    }
}

/// ‖L - L'‖ as a map on L²(M,τ) (largest singular value).
pub fn distance_2_2(a: &LindbladGenerator, b: &LindbladGenerator) -> f64 {
    (&a.superoperator() - &b.superoperator()).op_norm()
}

// ---------------------------------------------------------------------------
// GKS form
// ---------------------------------------------------------------------------

/// GKS representation over a τ-orthonormal traceless basis (the identity
/// element F_{(1,1)} = I is implicit and carries no coefficients). The
/// coefficient matrix acts in the half convention; inputs written in the
/// factor-2 convention of the usual GKS theorem must be doubled first.
#[derive(Debug, Clone)]
pub struct GksForm {
    pub basis: Vec<CMat>,
    pub coeff: CMat,
    pub hamiltonian: CMat,
}

impl GksForm {
    pub fn validate(&self) -> Result<()> {
        let m = self.basis.len();
        if self.coeff.nrows() != m || self.coeff.ncols() != m {
            return Err(Error::dim(format!(
                "coeff is {}x{} for {m} basis elements",
                self.coeff.nrows(),
                self.coeff.ncols()
            )));
        }
        let n = self.hamiltonian.nrows();
        for (i, f) in self.basis.iter().enumerate() {
            if f.nrows() != n || f.ncols() != n {
                return Err(Error::dim(format!("basis element {i} has wrong shape")));
            }
            if ntrace(f).norm() > tol::HERMITIAN * (1.0 + max_abs(f)) {
                return Err(Error::input(format!("basis element {i} is not traceless")));
            }
            for (j, g) in self.basis.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                if (tau_inner(f, g) - re(want)).norm() > 1e-8 {
                    return Err(Error::input(format!(
                        "basis elements {i},{j} are not τ-orthonormal"
                    )));
                }
            }
        }
        if !mat::is_hermitian(&self.coeff, tol::HERMITIAN) {
            return Err(Error::NotHermitian {
                deviation: mat::hermitian_deviation(&self.coeff),
                tol: tol::HERMITIAN,
            });
        }
        Ok(())
    }

    pub fn superoperator(&self) -> Superop {
        let n = self.hamiltonian.nrows();
        let id = eye(n);
        let mut m = (self.hamiltonian.kronecker(&id) - id.kronecker(&self.hamiltonian.transpose()))
            * mat::c(0.0, 1.0);
        for (a, fa) in self.basis.iter().enumerate() {
            for (b, fb) in self.basis.iter().enumerate() {
                let c = self.coeff[(a, b)];
                if c.norm() == 0.0 {
                    continue;
                }
                let fafb = fa.adjoint() * fb;
                let term = fa.adjoint().kronecker(&fb.transpose())
                    - (fafb.kronecker(&id) + id.kronecker(&fafb.transpose())) * re(0.5);
                m += term * c;
            }
        }
        Superop { n, mat: m }
    }
}

// ---------------------------------------------------------------------------
// Standard form
// ---------------------------------------------------------------------------

/// Standard form: traceless τ-orthonormal jump directions with nonnegative
/// weights. `folded` hands out the weight-absorbed operators √c_γ · V_γ.
#[derive(Debug, Clone)]
pub struct StandardForm {
    pub dim: usize,
    pub hamiltonian: CMat,
    pub jumps: Vec<Jump>,
}

impl StandardForm {
    pub fn folded(&self) -> Vec<CMat> {
        self.jumps.iter().map(|j| &j.op * re(j.weight.sqrt())).collect()
    }

    pub fn to_generator(&self) -> LindbladGenerator {
        LindbladGenerator {
            dim: self.dim,
            hamiltonian: self.hamiltonian.clone(),
            jumps: self.jumps.clone(),
            convention: Convention::Half,
        }
    }

    pub fn superoperator(&self) -> Superop {
        self.to_generator().superoperator()
    }
}

/// Canonicalize a jump-form generator: fold the convention factor into the
/// weights, strip trace parts (which move into the Hamiltonian), and rotate
/// onto a τ-orthonormal traceless jump family by diagonalizing the GKS
/// coefficient matrix. The induced superoperator is preserved and verified.
pub fn to_standard_form(gen: &LindbladGenerator) -> Result<StandardForm> {
    let n = gen.dim;
    let factor = gen.dissipative_factor();
    let id = eye(n);

    // weight-folded jumps, traceless parts, Hamiltonian correction
    let mut hamiltonian = gen.hamiltonian.clone();
    let mut folded: Vec<CMat> = Vec::new();
    for j in &gen.jumps {
        if j.weight == 0.0 {
            continue;
        }
        let w = (factor * j.weight).sqrt();
        let v = &j.op * re(w);
        let t = ntrace(&v);
        let tl = &v - &id * t;
        // V = Ṽ + tI contributes an extra Hamiltonian -(i/2)(t Ṽ† - t̄ Ṽ)
        hamiltonian += (tl.adjoint() * t - &tl * t.conj()) * mat::c(0.0, -0.5);
        if mat::tau_norm(&tl) > 0.0 {
            folded.push(tl);
        }
    }

    let basis = mat::orthonormalize_traceless(&folded);
    let m = basis.len();
    let mut jumps = Vec::new();
    if m > 0 {
        // GKS coefficients over the orthonormal basis, then diagonalize
        let mut coeff = CMat::zeros(m, m);
        for v in &folded {
            let beta: Vec<_> = basis.iter().map(|f| tau_inner(f, v)).collect();
            for k in 0..m {
                for l in 0..m {
                    coeff[(k, l)] += beta[k].conj() * beta[l];
                }
            }
        }
        let eig = hermitian_eig(&coeff)?;
        let cmax = eig.max().max(0.0);
        for g in 0..m {
            let c = eig.eigenvalues[g];
            if c <= tol::RANK * cmax {
                continue;
            }
            let mut v = mat::zeros(n);
            for k in 0..m {
                // coeff = Σ_γ ū_{γk} c_γ u_{γl} with u_{γk} = conj(Q_{kγ})
                v += &basis[k] * eig.eigenvectors[(k, g)].conj();
            }
            jumps.push(Jump { op: v, weight: c });
        }
    }

    let sf = StandardForm { dim: n, hamiltonian, jumps };
    let resid = (&sf.superoperator() - &gen.superoperator()).op_norm();
    let scale = 1.0 + gen.superoperator().op_norm();
    if resid > tol::SUPEROP_IDENTITY * scale {
        return Err(Error::VerificationFailed {
            context: "standard form does not reproduce the generator".into(),
            residual: resid,
        });
    }
    Ok(sf)
}

/// Standard form of a GKS-form generator. Fails with `CoeffNotPsd` when the
/// coefficient matrix has an eigenvalue below -tol.
pub fn gks_to_standard_form(gks: &GksForm) -> Result<StandardForm> {
    gks.validate()?;
    let n = gks.hamiltonian.nrows();
    let m = gks.basis.len();
    let mut jumps = Vec::new();
    if m > 0 {
        let eig = hermitian_eig(&gks.coeff)?;
        let scale = 1.0 + eig.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max);
        if eig.min() < -tol::PSD * scale {
            return Err(Error::CoeffNotPsd { min_eig: eig.min() });
        }
        let cmax = eig.max().max(0.0);
        for g in 0..m {
            let c = eig.eigenvalues[g];
            if c <= tol::RANK * cmax || c <= 0.0 {
                continue;
            }
            let mut v = mat::zeros(n);
            for k in 0..m {
                v += &gks.basis[k] * eig.eigenvectors[(k, g)].conj();
            }
            jumps.push(Jump { op: v, weight: c });
        }
    }
    let sf = StandardForm { dim: n, hamiltonian: gks.hamiltonian.clone(), jumps };
    let resid = (&sf.superoperator() - &gks.superoperator()).op_norm();
    if resid > tol::SUPEROP_IDENTITY * (1.0 + gks.superoperator().op_norm()) {
        return Err(Error::VerificationFailed {
            context: "standard form does not reproduce the GKS generator".into(),
            residual: resid,
        });
    }
    Ok(sf)
}

// ---------------------------------------------------------------------------
// Validity of arbitrary superoperators (Theorem-2.2 style)
// ---------------------------------------------------------------------------

/// Outcome of checking whether a superoperator matrix generates a quantum
/// Markov semigroup: L(I) = 0, *-preservation, and complete positivity of the
/// gradient form via the m-matrix.
#[derive(Debug, Clone)]
pub struct LindbladValidation {
    pub valid: bool,
    /// max |L(I)|.
    pub unital_residual: f64,
    /// max over matrix units of |L(x†) - L(x)†|.
    pub star_residual: f64,
    /// smallest eigenvalue of the gradient matrix m_L.
    pub gradient_min_eigenvalue: f64,
}

pub fn validate_lindblad(superop: &Superop, tol: f64) -> Result<LindbladValidation> {
    let n = superop.n;
    let scale = 1.0 + max_abs(&superop.mat);
    let unital_residual = max_abs(&superop.apply(&eye(n)));
    let mut star_residual: f64 = 0.0;
    for r in 0..n {
        for s in 0..n {
            let lx = superop.apply(&matrix_unit(n, r, s));
            let lxd = superop.apply(&matrix_unit(n, s, r));
            star_residual = star_residual.max(max_abs(&(lx.adjoint() - lxd)));
        }
    }
    let m = crate::gradient::gradient_matrix(superop);
    // m_L of a *-preserving map is Hermitian; symmetrize so garbage input
    // still gets a verdict instead of an error
    let eig = hermitian_eig(&((&m + m.adjoint()) * re(0.5)))?;
    let gscale = 1.0 + eig.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max);
    let gradient_min_eigenvalue = eig.min();
    let valid = unital_residual <= tol * scale
        && star_residual <= tol * scale
        && gradient_min_eigenvalue >= -tol * gscale;
    Ok(LindbladValidation { valid, unital_residual, star_residual, gradient_min_eigenvalue })
}

// ---------------------------------------------------------------------------
// Detailed balance
// ---------------------------------------------------------------------------

/// Gram matrix of the GNS inner product ⟨x,y⟩₁ = Tr(σ x†y) over matrix units
/// in row-major vec ordering.
pub fn gns_gram(sigma: &DensityMatrix) -> CMat {
    eye(sigma.dim()).kronecker(&sigma.matrix().transpose())
}

/// σ-detailed balance: L self-adjoint for ⟨x,y⟩₁ = Tr(σ x†y), tested as
/// S†G = GS on the superoperator matrix.
pub fn check_detailed_balance(
    gen: &LindbladGenerator,
    sigma: &DensityMatrix,
    tol: f64,
) -> Result<bool> {
    Ok(detailed_balance_residual(gen, sigma)? <= tol)
}

/// Relative residual of the GNS self-adjointness identity.
pub fn detailed_balance_residual(gen: &LindbladGenerator, sigma: &DensityMatrix) -> Result<f64> {
    sigma.require_strict()?;
    if sigma.dim() != gen.dim {
        return Err(Error::dim("sigma dimension differs from generator"));
    }
    let s = gen.superoperator().mat;
    let g = gns_gram(sigma);
    let lhs = s.adjoint() * &g;
    let rhs = &g * &s;
    let scale = 1.0 + max_abs(&rhs);
    Ok(max_abs(&(lhs - rhs)) / scale)
}

/// One jump of a detailed-balanced generator: a Δ_σ eigenvector with
/// Δ_σ(V) = e^{-ω} V and weight c ≥ 0.
#[derive(Debug, Clone)]
pub struct DbJump {
    pub op: CMat,
    pub weight: f64,
    pub omega: f64,
}

/// Spectral data of a σ-detailed-balanced generator: jumps regrouped into
/// modular-operator eigenvectors, partitioned by frequency ω.
#[derive(Debug, Clone)]
pub struct DetailedBalanceData {
    pub sigma: DensityMatrix,
    pub jumps: Vec<DbJump>,
    /// (ω_k, indices into `jumps`), ascending in ω.
    pub partition: Vec<(f64, Vec<usize>)>,
}

impl DetailedBalanceData {
    pub fn dim(&self) -> usize {
        self.sigma.dim()
    }

    pub fn to_generator(&self) -> LindbladGenerator {
        LindbladGenerator {
            dim: self.dim(),
            hamiltonian: mat::zeros(self.dim()),
            jumps: self
                .jumps
                .iter()
                .map(|j| Jump { op: j.op.clone(), weight: j.weight })
                .collect(),
            convention: Convention::Half,
        }
    }

    /// Tensor with an identity reference system of dimension d: jumps become
    /// V⊗1_d, still τ-orthonormal Δ-eigenvectors for σ⊗(1/d).
    pub fn amplify(&self, d: usize) -> DetailedBalanceData {
        let idd = eye(d);
        let sig = mat::kron(self.sigma.matrix(), &(idd.clone() * re(1.0 / d as f64)));
        let sigma = DensityMatrix::new(sig, true).expect("amplified state stays strict");
        let jumps = self
            .jumps
            .iter()
            .map(|j| DbJump { op: mat::kron(&j.op, &idd), weight: j.weight, omega: j.omega })
            .collect();
        DetailedBalanceData { sigma, jumps, partition: self.partition.clone() }
    }
}

/// Regroup a detailed-balanced generator into modular spectral data.
///
/// The jumps come out as exact Δ_σ eigenvectors (built inside σ's eigenbasis),
/// τ-orthonormal, with frequencies paired: the class at -ω is the adjoint of
/// the class at +ω with weights scaled by e^ω (the c_γ σ_j = c_γ' σ_i rule).
/// The total superoperator is verified against the input.
pub fn db_spectral_data(
    gen: &LindbladGenerator,
    sigma: &DensityMatrix,
) -> Result<DetailedBalanceData> {
    let residual = detailed_balance_residual(gen, sigma)?;
    if residual > 1e-8 {
        return Err(Error::NotDetailedBalanced { residual });
    }
    let n = gen.dim;
    let sf = to_standard_form(gen)?;
    let h_traceless = &sf.hamiltonian - eye(n) * ntrace(&sf.hamiltonian);
    let h_norm = max_abs(&h_traceless);
    if h_norm > 1e-8 * (1.0 + max_abs(&sf.hamiltonian)) {
        return Err(Error::NotDetailedBalanced { residual: h_norm });
    }

    let seig = sigma.eig();
    let u = &seig.eigenvectors;
    let logs: Vec<f64> = seig.eigenvalues.iter().map(|&x| x.ln()).collect();

    // modular frequency of the (a,b) matrix unit in σ's eigenbasis:
    // Δ_σ(ẽ_ab) = (s_a/s_b) ẽ_ab = e^{-ω} ẽ_ab, so ω = ln s_b - ln s_a
    let mut omegas: Vec<(f64, usize, usize)> = Vec::new();
    for a in 0..n {
        for b in 0..n {
            omegas.push((logs[b] - logs[a], a, b));
        }
    }
    omegas.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let mut classes: Vec<(f64, Vec<(usize, usize)>)> = Vec::new();
    for (w, a, b) in omegas {
        match classes.last_mut() {
            Some((w0, members)) if (w - *w0).abs() <= tol::EIGENVALUE_GAP => {
                members.push((a, b));
            }
            _ => classes.push((w, vec![(a, b)])),
        }
    }
    let class_of = |a: usize, b: usize| -> usize {
        let w = logs[b] - logs[a];
        classes
            .iter()
            .position(|(w0, _)| (w - w0).abs() <= tol::EIGENVALUE_GAP)
            .expect("every unit belongs to a class")
    };

    // τ-coordinates of the standard-form jumps in the √n ẽ_ab basis
    let sqrt_n = (n as f64).sqrt();
    let coords: Vec<CMat> = sf
        .jumps
        .iter()
        .map(|j| (u.adjoint() * &j.op * u) * re(1.0 / sqrt_n))
        .collect();
    let weights: Vec<f64> = sf.jumps.iter().map(|j| j.weight).collect();

    // under DB the coefficient operator is block diagonal over the classes;
    // verify the cross terms vanish
    let mut cross: f64 = 0.0;
    let mut cscale: f64 = 0.0;
    for (g, chi) in coords.iter().enumerate() {
        let mut per_class: Vec<f64> = vec![0.0; classes.len()];
        for a in 0..n {
            for b in 0..n {
                per_class[class_of(a, b)] += weights[g] * chi[(a, b)].norm_sqr();
            }
        }
        let total: f64 = per_class.iter().sum();
        cscale = cscale.max(total);
        // mass of χ_γ outside its dominant class couples classes in M
        let dominant = per_class.iter().cloned().fold(0.0, f64::max);
        cross = cross.max((total - dominant).sqrt() * dominant.sqrt());
    }
    if cross > 1e-8 * (1.0 + cscale) {
        return Err(Error::NotDetailedBalanced { residual: cross });
    }

    let mut jumps: Vec<DbJump> = Vec::new();
    for (w, members) in classes.iter().filter(|(w, _)| *w >= -tol::EIGENVALUE_GAP) {
        let d = members.len();
        if w.abs() <= tol::EIGENVALUE_GAP {
            // ω = 0 class: work in a self-adjoint basis so the eigenvectors
            // come out self-adjoint (the V_γ = V_γ† case of the theorem)
            let mut hbasis: Vec<CMat> = Vec::new();
            for &(a, b) in members {
                use std::cmp::Ordering::*;
                match a.cmp(&b) {
                    Equal => hbasis.push(matrix_unit(n, a, a) * re(sqrt_n)),
                    Less => {
                        let s = re(sqrt_n / 2f64.sqrt());
                        hbasis.push((matrix_unit(n, a, b) + matrix_unit(n, b, a)) * s);
                        hbasis.push(
                            (matrix_unit(n, a, b) * mat::c(0.0, -1.0)
                                + matrix_unit(n, b, a) * mat::c(0.0, 1.0))
                                * s,
                        );
                    }
                    Greater => {} // covered by its mirror (b, a)
                }
            }
            let dh = hbasis.len();
            let mut m0 = CMat::zeros(dh, dh);
            for (g, chi) in coords.iter().enumerate() {
                let chi_h: Vec<_> = hbasis
                    .iter()
                    .map(|hb| {
                        let mut acc = re(0.0);
                        for a in 0..n {
                            for b in 0..n {
                                // τ-inner product ⟨hb-in-eigenbasis, √n·chi⟩
                                acc += hb[(a, b)].conj() * chi[(a, b)] * re(sqrt_n / n as f64);
                            }
                        }
                        acc
                    })
                    .collect();
                for k in 0..dh {
                    for l in 0..dh {
                        m0[(k, l)] += chi_h[k].conj() * chi_h[l] * re(weights[g]);
                    }
                }
            }
            // GNS symmetry makes this matrix real in the self-adjoint basis
            let imag = m0.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
            if imag > 1e-7 * (1.0 + max_abs(&m0)) {
                return Err(Error::NotDetailedBalanced { residual: imag });
            }
            let m0r = CMat::from_fn(dh, dh, |r_, c_| re(0.5 * (m0[(r_, c_)].re + m0[(c_, r_)].re)));
            let eig = hermitian_eig(&m0r)?;
            let cmax = eig.max().max(0.0);
            for g in 0..dh {
                let c = eig.eigenvalues[g];
                if c <= 1e-12 * cmax.max(1.0) {
                    continue;
                }
                let mut vt = mat::zeros(n);
                for k in 0..dh {
                    vt += &hbasis[k] * eig.eigenvectors[(k, g)].conj();
                }
                let v = u * vt * u.adjoint();
                jumps.push(DbJump { op: v, weight: c, omega: 0.0 });
            }
        } else {
            // strictly positive class: diagonalize its coefficient block,
            // then mirror to -ω through adjoints with weights scaled by e^ω
            let mut mw = CMat::zeros(d, d);
            for (g, chi) in coords.iter().enumerate() {
                for (k, &(a, b)) in members.iter().enumerate() {
                    for (l, &(a2, b2)) in members.iter().enumerate() {
                        mw[(k, l)] += chi[(a, b)].conj() * chi[(a2, b2)] * re(weights[g]);
                    }
                }
            }
            let eig = hermitian_eig(&mw)?;
            let cmax = eig.max().max(0.0);
            for g in 0..d {
                let c = eig.eigenvalues[g];
                if c <= 1e-12 * cmax.max(1.0) {
                    continue;
                }
                let mut vt = mat::zeros(n);
                for (k, &(a, b)) in members.iter().enumerate() {
                    vt += matrix_unit(n, a, b) * (eig.eigenvectors[(k, g)].conj() * re(sqrt_n));
                }
                let v = u * vt * u.adjoint();
                jumps.push(DbJump { op: v.adjoint(), weight: c * w.exp(), omega: -w });
                jumps.push(DbJump { op: v, weight: c, omega: *w });
            }
        }
    }

    // deterministic order: ascending ω, then descending weight
    jumps.sort_by(|a, b| {
        a.omega
            .partial_cmp(&b.omega)
            .unwrap()
            .then(b.weight.partial_cmp(&a.weight).unwrap())
    });
    let mut partition: Vec<(f64, Vec<usize>)> = Vec::new();
    for (i, j) in jumps.iter().enumerate() {
        match partition.last_mut() {
            Some((w0, idx)) if (j.omega - *w0).abs() <= tol::EIGENVALUE_GAP => idx.push(i),
            _ => partition.push((j.omega, vec![i])),
        }
    }

    let data = DetailedBalanceData { sigma: sigma.clone(), jumps, partition };
    let resid = (&data.to_generator().superoperator() - &gen.superoperator()).op_norm();
    if resid > tol::SUPEROP_IDENTITY * (1.0 + gen.superoperator().op_norm()) {
        return Err(Error::VerificationFailed {
            context: "spectral regrouping does not reproduce the generator".into(),
            residual: resid,
        });
    }
    Ok(data)
}

// ---------------------------------------------------------------------------
// Fixed-point algebra
// ---------------------------------------------------------------------------

/// The fixed-point algebra N = {V_j, V_j†, H}′ of a detailed-balanced
/// generator, with its block structure.
#[derive(Debug, Clone)]
pub struct FixedPointAlgebra {
    /// Frobenius-orthonormal basis of N.
    pub basis: Vec<CMat>,
    pub spec: SubalgebraSpec,
}

/// Compute N as the joint commutant of the jump operators (and adjoints) and
/// the Hamiltonian, check it against ker L, and recover the block structure.
pub fn fixed_point_algebra(gen: &LindbladGenerator) -> Result<FixedPointAlgebra> {
    let n = gen.dim;
    let sf = to_standard_form(gen)?;
    let mut stack_rows: Vec<CMat> = Vec::new();
    for j in &sf.jumps {
        stack_rows.push(Superop::commutator_with(&j.op).mat);
        stack_rows.push(Superop::commutator_with(&j.op.adjoint()).mat);
    }
    let h_traceless = &sf.hamiltonian - eye(n) * ntrace(&sf.hamiltonian);
    if max_abs(&h_traceless) > tol::RANK {
        stack_rows.push(Superop::commutator_with(&h_traceless).mat);
    }
    let stacked = if stack_rows.is_empty() {
        CMat::zeros(n * n, n * n)
    } else {
        let mut m = CMat::zeros(stack_rows.len() * n * n, n * n);
        for (i, r) in stack_rows.iter().enumerate() {
            m.view_mut((i * n * n, 0), (n * n, n * n)).copy_from(r);
        }
        m
    };
    let null = mat::nullspace(&stacked);
    let commutant_dim = null.ncols();
    let basis: Vec<CMat> = (0..commutant_dim)
        .map(|i| mat::unvec_rm(&null.column(i).into_owned(), n))
        .collect();

    // guard: the commutant must coincide with ker L
    let superop = gen.superoperator();
    let kernel_dim = mat::nullspace(&superop.mat).ncols();
    if kernel_dim != commutant_dim {
        return Err(Error::FixedPointsNotAlgebra { kernel_dim, commutant_dim });
    }
    let scale = 1.0 + superop.op_norm();
    for b in &basis {
        let r = max_abs(&superop.apply(b));
        if r > tol::SUPEROP_IDENTITY * scale {
            return Err(Error::FixedPointsNotAlgebra { kernel_dim, commutant_dim });
        }
    }

    let spec = block_structure(&basis, n)?;
    Ok(FixedPointAlgebra { basis, spec })
}

// ---------------------------------------------------------------------------
// Stock generator families
// ---------------------------------------------------------------------------

pub mod families {
    //! Constructors for standard generator families used in experiments and
    //! tests: two-level damping, depolarizers, and seeded random
    //! detailed-balanced generators.

    use super::*;
    use rand::Rng;

    /// σ₋ = |g⟩⟨e| with |e⟩ the first basis vector.
    pub fn sigma_minus() -> CMat {
        matrix_unit(2, 1, 0)
    }

    pub fn sigma_plus() -> CMat {
        matrix_unit(2, 0, 1)
    }

    /// Two-level generator with decay weight `c_down` and excitation weight
    /// `c_up`; σ-detailed balance for σ = diag(σ_e, σ_g) holds iff
    /// c_down σ_e = c_up σ_g.
    pub fn two_level(c_down: f64, c_up: f64) -> LindbladGenerator {
        LindbladGenerator::from_jumps(
            2,
            vec![
                Jump { op: sigma_minus(), weight: c_down },
                Jump { op: sigma_plus(), weight: c_up },
            ],
        )
        .expect("valid jumps")
    }

    /// The full-basis depolarizer -n²(I - E_τ) realized through the matrix
    /// unit completion {I, √n e_rs}.
    pub fn depolarizer(n: usize) -> LindbladGenerator {
        let mut jumps = Vec::new();
        let sqrt_n = (n as f64).sqrt();
        for r in 0..n {
            for s in 0..n {
                jumps.push(Jump { op: matrix_unit(n, r, s) * re(sqrt_n), weight: 1.0 });
            }
        }
        LindbladGenerator::from_jumps(n, jumps).expect("valid jumps")
    }

    /// Seeded random generator with exact σ-detailed balance: jumps are matrix
    /// units in σ's eigenbasis with conjugate-paired weights, plus a Hermitian
    /// σ-diagonal jump. With `connect_all`, every |u⟩⟨u+1| transition appears,
    /// so the fixed-point algebra is trivial (ℂI).
    pub fn random_db(
        sigma: &DensityMatrix,
        connect_all: bool,
        rng: &mut impl Rng,
    ) -> LindbladGenerator {
        let n = sigma.dim();
        let seig = sigma.eig();
        let u = &seig.eigenvectors;
        let sqrt_n = (n as f64).sqrt();
        let mut jumps = Vec::new();
        for a in 0..n {
            for b in (a + 1)..n {
                let present = (connect_all && b == a + 1) || rng.gen_bool(0.6);
                if !present {
                    continue;
                }
                let c: f64 = rng.gen_range(0.2..1.5);
                let e_ab = u * matrix_unit(n, a, b) * u.adjoint() * re(sqrt_n);
                // pairing c_ab σ_b = c_ba σ_a
                let c_ba = c * seig.eigenvalues[b] / seig.eigenvalues[a];
                jumps.push(Jump { op: e_ab.adjoint(), weight: c_ba });
                jumps.push(Jump { op: e_ab, weight: c });
            }
        }
        // a random Hermitian σ-diagonal jump (ω = 0)
        let mut diag = mat::zeros(n);
        for a in 0..n {
            diag[(a, a)] = re(rng.gen_range(-1.0..1.0));
        }
        let diag = &diag - eye(n) * ntrace(&diag);
        let tn = mat::tau_norm(&diag);
        if tn > 1e-6 {
            let w: f64 = rng.gen_range(0.2..1.0);
            jumps.push(Jump { op: u * diag * u.adjoint() * re(1.0 / tn), weight: w });
        }
        LindbladGenerator::from_jumps(n, jumps).expect("valid jumps")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::sample;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pauli_z() -> CMat {
        CMat::from_row_slice(2, 2, &[re(1.0), re(0.0), re(0.0), re(-1.0)])
    }

    #[test]
    fn superoperator_matches_apply() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let gen = LindbladGenerator::new(
            sample::hermitian(3, &mut rng),
            vec![
                Jump { op: sample::ginibre(3, &mut rng), weight: 0.7 },
                Jump { op: sample::ginibre(3, &mut rng), weight: 1.3 },
            ],
            Convention::Half,
        )
        .unwrap();
        let s = gen.superoperator();
        for _ in 0..5 {
            let x = sample::ginibre(3, &mut rng);
            assert!(max_abs(&(s.apply(&x) - gen.apply(&x))) < 1e-12);
        }
        assert!(max_abs(&gen.apply(&eye(3))) < 1e-12);
        // predual is the Frobenius adjoint: Tr(L(x)† ρ) = Tr(x† L_*(ρ))
        let x = sample::ginibre(3, &mut rng);
        let rho = sample::ginibre(3, &mut rng);
        let lhs = mat::frob_inner(&gen.apply(&x), &rho);
        let rhs = mat::frob_inner(&x, &gen.apply_predual(&rho));
        assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn hamiltonian_only_spectrum() {
        let gen = LindbladGenerator::new(pauli_z(), vec![], Convention::Half).unwrap();
        let eigs = gen.superoperator().mat.complex_eigenvalues();
        let mut ims: Vec<f64> = eigs.iter().map(|z| z.im).collect();
        ims.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (got, want) in ims.iter().zip([-2.0, 0.0, 0.0, 2.0]) {
            assert_relative_eq!(*got, want, epsilon = 1e-10);
        }
        assert!(eigs.iter().all(|z| z.re.abs() < 1e-10));
    }

    #[test]
    fn depolarizer_is_identity_minus_projection() {
        for n in [2usize, 3] {
            let gen = families::depolarizer(n);
            let want =
                Superop::from_apply(n, |x| (eye(n) * ntrace(x) - x) * re((n * n) as f64));
            assert!((&gen.superoperator() - &want).op_norm() < 1e-9 * (n * n) as f64);
        }
    }

    #[test]
    fn convention_roundtrip_preserves_superoperator() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let v = sample::ginibre(3, &mut rng);
        let double = LindbladGenerator::new(
            mat::zeros(3),
            vec![Jump { op: v.clone(), weight: 0.8 }],
            Convention::Double,
        )
        .unwrap();
        let sf = to_standard_form(&double).unwrap();
        assert!((&sf.superoperator() - &double.superoperator()).op_norm() < 1e-10);
        // folding doubles the weight
        let total: f64 = sf.jumps.iter().map(|j| j.weight).sum();
        let expected = 1.6 * mat::tau_norm(&(&v - eye(3) * ntrace(&v))).powi(2);
        assert_relative_eq!(total, expected, epsilon = 1e-9);
    }

    #[test]
    fn standard_form_strips_trace_parts() {
        // single jump σ_x + I: real offset, so H stays zero
        let sx = CMat::from_row_slice(2, 2, &[re(0.0), re(1.0), re(1.0), re(0.0)]);
        let gen =
            LindbladGenerator::from_jumps(2, vec![Jump { op: &sx + eye(2), weight: 1.0 }])
                .unwrap();
        let sf = to_standard_form(&gen).unwrap();
        assert_eq!(sf.jumps.len(), 1);
        assert!(ntrace(&sf.jumps[0].op).norm() < 1e-12);
        assert_relative_eq!(mat::tau_norm(&sf.jumps[0].op), 1.0, epsilon = 1e-12);
        assert!(max_abs(&sf.hamiltonian) < 1e-12);
        // complex offset shifts the Hamiltonian but keeps the action
        let gen2 = LindbladGenerator::from_jumps(
            2,
            vec![Jump { op: &sx + eye(2) * mat::c(0.3, 0.9), weight: 1.0 }],
        )
        .unwrap();
        let sf2 = to_standard_form(&gen2).unwrap();
        assert!((&sf2.superoperator() - &gen2.superoperator()).op_norm() < 1e-10);
        assert!(max_abs(&sf2.hamiltonian) > 1e-3);
    }

    #[test]
    fn standard_form_idempotent() {
        let v = families::sigma_minus() * re(2f64.sqrt());
        let gen =
            LindbladGenerator::from_jumps(2, vec![Jump { op: v.clone(), weight: 1.0 }]).unwrap();
        let sf = to_standard_form(&gen).unwrap();
        assert_eq!(sf.jumps.len(), 1);
        assert_relative_eq!(sf.jumps[0].weight, 1.0, epsilon = 1e-12);
        assert_relative_eq!(tau_inner(&sf.jumps[0].op, &v).norm(), 1.0, epsilon = 1e-12);
        let sf2 = to_standard_form(&sf.to_generator()).unwrap();
        assert!((&sf2.superoperator() - &sf.superoperator()).op_norm() < 1e-12);
    }

    #[test]
    fn gks_identity_coeff_gives_depolarizer() {
        for n in [2usize, 3] {
            // a τ-orthonormal traceless basis spanning the same dissipator as
            // the matrix-unit completion
            let mut units = Vec::new();
            let sqrt_n = (n as f64).sqrt();
            for r in 0..n {
                for s in 0..n {
                    units.push(matrix_unit(n, r, s) * re(sqrt_n));
                }
            }
            let basis = mat::orthonormalize_traceless(&units);
            assert_eq!(basis.len(), n * n - 1);
            let m = basis.len();
            let gks = GksForm { basis, coeff: eye(m), hamiltonian: mat::zeros(n) };
            let want =
                Superop::from_apply(n, |x| (eye(n) * ntrace(x) - x) * re((n * n) as f64));
            assert!((&gks.superoperator() - &want).op_norm() < 1e-9 * (n * n) as f64);
            let sf = gks_to_standard_form(&gks).unwrap();
            assert!((&sf.superoperator() - &want).op_norm() < 1e-9 * (n * n) as f64);
        }
    }

    #[test]
    fn gks_rejects_negative_coeff() {
        let basis = mat::orthonormalize_traceless(&[pauli_z()]);
        let gks = GksForm { basis, coeff: eye(1) * re(-1.0), hamiltonian: mat::zeros(2) };
        assert!(matches!(gks_to_standard_form(&gks), Err(Error::CoeffNotPsd { .. })));
    }

    #[test]
    fn validate_accepts_lindblad_rejects_others() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let gen = LindbladGenerator::new(
            sample::hermitian(2, &mut rng),
            vec![Jump { op: sample::ginibre(2, &mut rng), weight: 1.0 }],
            Convention::Half,
        )
        .unwrap();
        let v = validate_lindblad(&gen.superoperator(), 1e-9).unwrap();
        assert!(v.valid, "{v:?}");

        // identity map: L(I) = I ≠ 0
        let v = validate_lindblad(&Superop::identity(2), 1e-9).unwrap();
        assert!(!v.valid);
        assert!(v.unital_residual > 0.5);

        // x ↦ x - xᵀ is not *-preserving (check lands on e₁₂)
        let s = Superop::from_apply(2, |x| x - x.transpose());
        let v = validate_lindblad(&s, 1e-9).unwrap();
        assert!(!v.valid);
        assert!(v.star_residual > 0.5);
    }

    #[test]
    fn detailed_balance_two_level() {
        let sigma = DensityMatrix::from_probabilities(&[0.7, 0.3]).unwrap();
        // c_down σ_e = c_up σ_g with σ = diag(σ_e, σ_g)
        let balanced = families::two_level(0.3 * 1.2, 0.7 * 1.2);
        assert!(check_detailed_balance(&balanced, &sigma, 1e-9).unwrap());
        let unbalanced = families::two_level(1.0, 1.0);
        assert!(!check_detailed_balance(&unbalanced, &sigma, 1e-9).unwrap());
    }

    #[test]
    fn self_adjoint_jumps_balance_at_uniform_sigma() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let v = sample::hermitian(3, &mut rng);
        let gen = LindbladGenerator::from_jumps(3, vec![Jump { op: v, weight: 1.0 }]).unwrap();
        assert!(check_detailed_balance(&gen, &DensityMatrix::maximally_mixed(3), 1e-9).unwrap());
    }

    #[test]
    fn hamiltonian_alone_is_not_detailed_balanced() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let gen =
            LindbladGenerator::new(sample::hermitian(3, &mut rng), vec![], Convention::Half)
                .unwrap();
        let sigma = sample::density(3, 0.2, &mut rng);
        assert!(!check_detailed_balance(&gen, &sigma, 1e-9).unwrap());
    }

    #[test]
    fn spectral_data_two_level() {
        let p = [0.7, 0.3];
        let sigma = DensityMatrix::from_probabilities(&p).unwrap();
        let gen = families::two_level(p[1] * 1.4, p[0] * 1.4);
        let data = db_spectral_data(&gen, &sigma).unwrap();
        assert_eq!(data.jumps.len(), 2);
        let want = (p[0] / p[1]).ln();
        let mut omegas: Vec<f64> = data.jumps.iter().map(|j| j.omega).collect();
        omegas.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_relative_eq!(omegas[0], -want, epsilon = 1e-10);
        assert_relative_eq!(omegas[1], want, epsilon = 1e-10);
        // modular eigenvector relation Δ_σ(V) = e^{-ω} V
        let s = sigma.matrix();
        let s_inv = sigma.eig().map(|l| 1.0 / l);
        for j in &data.jumps {
            let delta = s * &j.op * &s_inv;
            assert!(max_abs(&(delta - &j.op * re((-j.omega).exp()))) < 1e-8);
        }
        // pairing: weights obey c_γ σ_j = c_γ' σ_i across the ±ω pair
        let up = data.jumps.iter().find(|j| j.omega > 0.1).unwrap();
        let down = data.jumps.iter().find(|j| j.omega < -0.1).unwrap();
        assert_relative_eq!(down.weight, up.weight * up.omega.exp(), epsilon = 1e-9);
        let overlap = tau_inner(&up.op.adjoint(), &down.op);
        assert!(max_abs(&(&down.op - up.op.adjoint() * overlap)) < 1e-8);
        assert_relative_eq!(overlap.norm(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn spectral_data_uniform_sigma_all_omega_zero() {
        let n = 3;
        let gen = families::depolarizer(n);
        let data = db_spectral_data(&gen, &DensityMatrix::maximally_mixed(n)).unwrap();
        assert_eq!(data.jumps.len(), n * n - 1);
        assert_eq!(data.partition.len(), 1);
        for j in &data.jumps {
            assert_eq!(j.omega, 0.0);
            assert!(mat::hermitian_deviation(&j.op) < 1e-9);
        }
    }

    #[test]
    fn spectral_data_random_db() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for n in [2usize, 3, 4] {
            let sigma = sample::density(n, 0.25, &mut rng);
            let gen = families::random_db(&sigma, true, &mut rng);
            assert!(check_detailed_balance(&gen, &sigma, 1e-9).unwrap());
            let data = db_spectral_data(&gen, &sigma).unwrap();
            for (w, idx) in &data.partition {
                if w.abs() > 1e-9 {
                    let mirror = data
                        .partition
                        .iter()
                        .find(|(w2, _)| (w2 + w).abs() < 1e-7)
                        .expect("mirror class exists");
                    assert_eq!(idx.len(), mirror.1.len());
                }
            }
            assert!(detailed_balance_residual(&data.to_generator(), &sigma).unwrap() < 1e-9);
        }
    }

    #[test]
    fn fixed_points_depolarizer_and_free() {
        let gen = families::depolarizer(3);
        let fp = fixed_point_algebra(&gen).unwrap();
        assert_eq!(fp.basis.len(), 1);
        assert_eq!(fp.spec.blocks, vec![(1, 3)]);

        let free = LindbladGenerator::from_jumps(3, vec![]).unwrap();
        let fp = fixed_point_algebra(&free).unwrap();
        assert_eq!(fp.basis.len(), 9);
        assert_eq!(fp.spec.blocks, vec![(3, 1)]);
    }

    #[test]
    fn fixed_points_tensor_factor() {
        // jumps 1 ⊗ {σ_x, σ_y, σ_z}: commutant is M₂ ⊗ 1₂
        let paulis = [
            CMat::from_row_slice(2, 2, &[re(0.0), re(1.0), re(1.0), re(0.0)]),
            CMat::from_row_slice(2, 2, &[re(0.0), mat::c(0.0, -1.0), mat::c(0.0, 1.0), re(0.0)]),
            pauli_z(),
        ];
        let jumps = paulis
            .iter()
            .map(|p| Jump { op: mat::kron(&eye(2), p), weight: 1.0 })
            .collect();
        let gen = LindbladGenerator::from_jumps(4, jumps).unwrap();
        let fp = fixed_point_algebra(&gen).unwrap();
        assert_eq!(fp.basis.len(), 4);
        assert_eq!(fp.spec.blocks, vec![(2, 2)]);
        for b in &fp.basis {
            for p in &paulis {
                assert!(max_abs(&commutator(&mat::kron(&eye(2), p), b)) < 1e-9);
            }
        }
    }

    #[test]
    fn gns_self_adjointness_gram_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let sigma = sample::density(3, 0.2, &mut rng);
        let gen = families::random_db(&sigma, true, &mut rng);
        let s = gen.superoperator().mat;
        let g = gns_gram(&sigma);
        // S^{½} L S^{-½} Hermitian ⇔ GS = S†G
        let geig = hermitian_eig(&g).unwrap();
        let g_half = geig.map(f64::sqrt);
        let g_mhalf = geig.map(|l| 1.0 / l.sqrt());
        let conj = &g_half * &s * &g_mhalf;
        assert!(mat::hermitian_deviation(&conj) < 1e-8 * (1.0 + max_abs(&conj)));
    }
}
