//! Dense complex linear algebra shared by every module: Hermitian
//! eigendecompositions, PSD tests, tensor / partial-trace operations, the
//! four inner products (HS, GNS, KMS, BKM) and τ-orthonormalization.
//!
//! Trace conventions: `trace` is Tr, `ntrace` is τ = Tr/n. The Hilbert-Schmidt
//! inner product of the crate is the τ-normalized one, ⟨x,y⟩ = τ(x†y);
//! the unnormalized Tr(x†y) is called the Frobenius pairing here.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::tol;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// n×n zero matrix.
pub fn zeros(n: usize) -> CMat {
    CMat::zeros(n, n)
}

/// n×n identity.
pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Matrix unit e_rs = |r⟩⟨s| (0-indexed).
pub fn matrix_unit(n: usize, r: usize, s: usize) -> CMat {
    let mut m = CMat::zeros(n, n);
    m[(r, s)] = re(1.0);
    m
}

/// Largest entry magnitude.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// max |M - M†|.
pub fn hermitian_deviation(m: &CMat) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// Hermitian within `tol * (1 + max|M|)`.
pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    m.is_square() && hermitian_deviation(m) <= tol * (1.0 + max_abs(m))
}

fn require_hermitian(m: &CMat, tol: f64) -> Result<()> {
    if !m.is_square() {
        return Err(Error::dim(format!("{}x{} matrix is not square", m.nrows(), m.ncols())));
    }
    let dev = hermitian_deviation(m);
    if dev > tol * (1.0 + max_abs(m)) {
        return Err(Error::NotHermitian { deviation: dev, tol });
    }
    Ok(())
}

pub fn trace(m: &CMat) -> C64 {
    m.diagonal().iter().sum()
}

/// Normalized trace τ = Tr/n.
pub fn ntrace(m: &CMat) -> C64 {
    trace(m) / re(m.nrows() as f64)
}

/// Unnormalized Frobenius pairing Tr(x†y).
pub fn frob_inner(x: &CMat, y: &CMat) -> C64 {
    x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum()
}

/// τ-normalized Hilbert-Schmidt inner product τ(x†y).
pub fn tau_inner(x: &CMat, y: &CMat) -> C64 {
    frob_inner(x, y) / re(x.nrows() as f64)
}

pub fn frob_norm(m: &CMat) -> f64 {
    frob_inner(m, m).re.sqrt()
}

/// τ-norm, the L²(M,τ) norm.
pub fn tau_norm(m: &CMat) -> f64 {
    tau_inner(m, m).re.sqrt()
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn anticommutator(a: &CMat, b: &CMat) -> CMat {
    a * b + b * a
}

// ---------------------------------------------------------------------------
// Vectorization (row-major) and superoperators
// ---------------------------------------------------------------------------

/// Row-major vectorization: vec(X)[r*n + s] = X[r,s].
pub fn vec_rm(m: &CMat) -> CVec {
    let (nr, nc) = m.shape();
    CVec::from_fn(nr * nc, |i, _| m[(i / nc, i % nc)])
}

/// Inverse of [`vec_rm`] for square matrices.
pub fn unvec_rm(v: &CVec, n: usize) -> CMat {
    CMat::from_fn(n, n, |r, s| v[r * n + s])
}

/// A linear map on M_n stored as an n²×n² matrix over row-major
/// vectorizations: mat · vec(X) = vec(map X).
#[derive(Debug, Clone, PartialEq)]
pub struct Superop {
    pub n: usize,
    pub mat: CMat,
}

impl Superop {
    pub fn new(n: usize, mat: CMat) -> Result<Self> {
        if mat.nrows() != n * n || mat.ncols() != n * n {
            return Err(Error::dim(format!(
                "superoperator on M_{n} must be {0}x{0}, got {1}x{2}",
                n * n,
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(Superop { n, mat })
    }

    pub fn zero(n: usize) -> Self {
        Superop { n, mat: CMat::zeros(n * n, n * n) }
    }

    pub fn identity(n: usize) -> Self {
        Superop { n, mat: CMat::identity(n * n, n * n) }
    }

    /// Build column by column from the action on matrix units.
    pub fn from_apply(n: usize, f: impl Fn(&CMat) -> CMat) -> Self {
        let mut mat = CMat::zeros(n * n, n * n);
        for r in 0..n {
            for s in 0..n {
                let col = vec_rm(&f(&matrix_unit(n, r, s)));
                mat.set_column(r * n + s, &col);
            }
        }
        Superop { n, mat }
    }

    /// Superoperator of x ↦ a·x·b.
    pub fn sandwich(a: &CMat, b: &CMat) -> Self {
        let n = a.nrows();
        Superop { n, mat: a.kronecker(&b.transpose()) }
    }

    /// Superoperator of x ↦ [a, x].
    pub fn commutator_with(a: &CMat) -> Self {
        let n = a.nrows();
        let id = eye(n);
        Superop {
            n,
            mat: a.kronecker(&id) - id.kronecker(&a.transpose()),
        }
    }

    pub fn apply(&self, x: &CMat) -> CMat {
        unvec_rm(&(&self.mat * vec_rm(x)), self.n)
    }

    pub fn compose(&self, other: &Superop) -> Superop {
        Superop { n: self.n, mat: &self.mat * &other.mat }
    }

    /// Adjoint with respect to the Frobenius pairing (same as the τ one).
    pub fn adjoint(&self) -> Superop {
        Superop { n: self.n, mat: self.mat.adjoint() }
    }

    /// 2→2 operator norm on L²(M,τ): the largest singular value. The τ
    /// normalization cancels between domain and codomain, so the plain
    /// Frobenius-vectorization singular value is already the right number.
    pub fn op_norm(&self) -> f64 {
        singular_values(&self.mat).first().copied().unwrap_or(0.0)
    }

    /// Amplify to M_n ⊗ M_d acting as self ⊗ id.
    pub fn amplify(&self, d: usize) -> Superop {
        let n = self.n;
        let nd = n * d;
        Superop::from_apply(nd, |x| {
            // apply blockwise: X = Σ e_uv ⊗ X_uv with X_uv ∈ M_d? No: the
            // factor order here is H ⊗ R, so X has n×n blocks of size d.
            let mut out = CMat::zeros(nd, nd);
            // (L ⊗ id)(X): contract L's matrix against the n-indices.
            for r in 0..n {
                for s in 0..n {
                    let xb = x.view((r * d, s * d), (d, d)).into_owned();
                    if max_abs(&xb) == 0.0 {
                        continue;
                    }
                    let image = self.apply(&matrix_unit(n, r, s));
                    for u in 0..n {
                        for v in 0..n {
                            let w = image[(u, v)];
                            if w != re(0.0) {
                                let mut view = out.view_mut((u * d, v * d), (d, d));
                                view += &xb * w;
                            }
                        }
                    }
                }
            }
            out
        })
    }
}

impl std::ops::Sub<&Superop> for &Superop {
    type Output = Superop;
    fn sub(self, rhs: &Superop) -> Superop {
        Superop { n: self.n, mat: &self.mat - &rhs.mat }
    }
}

impl std::ops::Add<&Superop> for &Superop {
    type Output = Superop;
    fn add(self, rhs: &Superop) -> Superop {
        Superop { n: self.n, mat: &self.mat + &rhs.mat }
    }
}

impl std::ops::Mul<f64> for &Superop {
    type Output = Superop;
    fn mul(self, rhs: f64) -> Superop {
        Superop { n: self.n, mat: &self.mat * re(rhs) }
    }
}

// ---------------------------------------------------------------------------
// Eigen / singular value machinery
// ---------------------------------------------------------------------------

/// Hermitian eigendecomposition M = U diag(λ) U†, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    pub eigenvalues: Vec<f64>,
    /// Columns are the eigenvectors, unitary.
    pub eigenvectors: CMat,
}

impl HermitianEig {
    pub fn reconstruct(&self) -> CMat {
        let d = CMat::from_diagonal(&CVec::from_iterator(
            self.eigenvalues.len(),
            self.eigenvalues.iter().map(|&l| re(l)),
        ));
        &self.eigenvectors * d * self.eigenvectors.adjoint()
    }

    /// Apply a real function to the spectrum.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMat {
        let d = CMat::from_diagonal(&CVec::from_iterator(
            self.eigenvalues.len(),
            self.eigenvalues.iter().map(|&l| re(f(l))),
        ));
        &self.eigenvectors * d * self.eigenvectors.adjoint()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }
}

/// Eigendecomposition of a Hermitian matrix. Fails with `NotHermitian` if the
/// deviation exceeds `tol::HERMITIAN` relative to the matrix scale.
pub fn hermitian_eig(m: &CMat) -> Result<HermitianEig> {
    hermitian_eig_tol(m, tol::HERMITIAN)
}

pub fn hermitian_eig_tol(m: &CMat, tol: f64) -> Result<HermitianEig> {
    require_hermitian(m, tol)?;
    // Symmetrize so the solver sees an exactly Hermitian input.
    let h = (m + m.adjoint()) * re(0.5);
    let eig = nalgebra::SymmetricEigen::new(h);
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let eigenvalues: Vec<f64> = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let n = m.nrows();
    let eigenvectors = CMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, idx[c])]);
    Ok(HermitianEig { eigenvalues, eigenvectors })
}

/// PSD test by minimum eigenvalue: true iff
/// min λ ≥ -tol * (1 + max|λ|). Returns the quantitative margin alongside.
pub fn psd_margin(m: &CMat, tol: f64) -> Result<(bool, f64)> {
    let eig = hermitian_eig(m)?;
    let scale = 1.0 + eig.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max);
    let min = eig.min();
    Ok((min >= -tol * scale, min))
}

pub fn is_psd(m: &CMat, tol: f64) -> Result<bool> {
    Ok(psd_margin(m, tol)?.0)
}

/// Singular values, descending.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

/// Orthonormal basis (columns) of the nullspace of `m`, rank cutoff relative
/// to the largest singular value.
pub fn nullspace(m: &CMat) -> CMat {
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("svd with V requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cut = tol::RANK * smax.max(1e-300);
    let mut cols: Vec<CVec> = Vec::new();
    for i in 0..v_t.nrows() {
        if svd.singular_values[i] <= cut {
            cols.push(v_t.row(i).adjoint());
        }
    }
    // svd only returns min(nr,nc) singular triples; a wide matrix has extra
    // nullspace directions not covered, but all uses here are tall or square.
    let ncols = cols.len();
    let mut out = CMat::zeros(m.ncols(), ncols);
    for (i, col) in cols.into_iter().enumerate() {
        out.set_column(i, &col);
    }
    out
}

/// Hermitian power via the spectrum; eigenvalues clipped at 0 for fractional
/// powers. Used for σ^s of strictly positive σ.
pub fn herm_pow(m: &CMat, p: f64) -> Result<CMat> {
    let eig = hermitian_eig(m)?;
    Ok(eig.map(|l| if l <= 0.0 { 0.0 } else { l.powf(p) }))
}

// ---------------------------------------------------------------------------
// Tensor structure
// ---------------------------------------------------------------------------

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Which tensor factor to trace out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Traced {
    First,
    Second,
}

/// Partial trace of an operator on H_A ⊗ H_B (dims given explicitly).
/// `Traced::Second` returns Tr_B(M) on H_A, and conversely.
pub fn partial_trace(m: &CMat, dim_a: usize, dim_b: usize, traced: Traced) -> Result<CMat> {
    let n = dim_a * dim_b;
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::dim(format!(
            "partial trace of {}x{} with factors {dim_a}x{dim_b}",
            m.nrows(),
            m.ncols()
        )));
    }
    match traced {
        Traced::Second => {
            let mut out = CMat::zeros(dim_a, dim_a);
            for i in 0..dim_a {
                for j in 0..dim_a {
                    let mut acc = re(0.0);
                    for k in 0..dim_b {
                        acc += m[(i * dim_b + k, j * dim_b + k)];
                    }
                    out[(i, j)] = acc;
                }
            }
            Ok(out)
        }
        Traced::First => {
            let mut out = CMat::zeros(dim_b, dim_b);
            for k in 0..dim_b {
                for l in 0..dim_b {
                    let mut acc = re(0.0);
                    for i in 0..dim_a {
                        acc += m[(i * dim_b + k, i * dim_b + l)];
                    }
                    out[(k, l)] = acc;
                }
            }
            Ok(out)
        }
    }
}

// ---------------------------------------------------------------------------
// Density matrices and the inner-product family
// ---------------------------------------------------------------------------

/// A state: Hermitian, PSD, trace one. `strict` additionally certifies a
/// strictly positive spectrum.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    mat: CMat,
    strict: bool,
}

impl DensityMatrix {
    pub fn new(mat: CMat, strict: bool) -> Result<Self> {
        require_hermitian(&mat, tol::HERMITIAN)?;
        let eig = hermitian_eig(&mat)?;
        let scale = 1.0 + eig.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max);
        if eig.min() < -tol::PSD * scale {
            return Err(Error::InvalidDensity {
                context: format!("negative eigenvalue {:.3e}", eig.min()),
            });
        }
        let tr = trace(&mat);
        if (tr.re - 1.0).abs() > tol::TRACE * scale || tr.im.abs() > tol::TRACE * scale {
            return Err(Error::InvalidDensity {
                context: format!("trace {} != 1", tr),
            });
        }
        if strict && eig.min() <= tol::PSD {
            return Err(Error::SigmaNotStrict { min_eig: eig.min() });
        }
        Ok(DensityMatrix { mat, strict })
    }

    /// Uniform state I/n.
    pub fn maximally_mixed(n: usize) -> Self {
        DensityMatrix { mat: eye(n) * re(1.0 / n as f64), strict: true }
    }

    /// Diagonal state from probabilities (must sum to 1).
    pub fn from_probabilities(p: &[f64]) -> Result<Self> {
        let n = p.len();
        let mat = CMat::from_fn(n, n, |r, s| if r == s { re(p[r]) } else { re(0.0) });
        let strict = p.iter().all(|&x| x > tol::PSD);
        DensityMatrix::new(mat, strict)
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn is_strict(&self) -> bool {
        self.strict
    }

    pub fn eig(&self) -> HermitianEig {
        hermitian_eig(&self.mat).expect("validated on construction")
    }

    pub fn require_strict(&self) -> Result<()> {
        if !self.strict {
            let eig = self.eig();
            return Err(Error::SigmaNotStrict { min_eig: eig.min() });
        }
        Ok(())
    }

    pub fn pow(&self, p: f64) -> CMat {
        self.eig().map(|l| if l <= 0.0 { 0.0 } else { l.powf(p) })
    }
}

/// The inner products of the σ-detailed-balance framework.
#[derive(Debug, Clone)]
pub enum InnerProductKind {
    /// τ(x†y); σ-free.
    HsNormalized,
    /// ⟨x,y⟩₁ = Tr(σ x†y).
    Gns(DensityMatrix),
    /// Tr(σ^½ x† σ^½ y).
    Kms(DensityMatrix),
    /// ∫₀¹ Tr(σ^{1-s} x† σ^s y) ds, evaluated exactly in σ's eigenbasis with
    /// the logarithmic-mean kernel.
    Bkm(DensityMatrix),
}

/// Logarithmic mean (λ-μ)/(log λ - log μ) with the analytic limit λ on the
/// diagonal; arguments within `tol::LOG_MEAN_COINCIDENT` relative are treated
/// as coincident.
pub fn log_mean(a: f64, b: f64) -> f64 {
    let m = a.abs().max(b.abs());
    if (a - b).abs() < tol::LOG_MEAN_COINCIDENT * m {
        0.5 * (a + b)
    } else {
        (a - b) / (a.ln() - b.ln())
    }
}

pub fn inner_product(x: &CMat, y: &CMat, kind: &InnerProductKind) -> Result<C64> {
    if x.shape() != y.shape() || !x.is_square() {
        return Err(Error::dim("inner product needs equal square shapes"));
    }
    match kind {
        InnerProductKind::HsNormalized => Ok(tau_inner(x, y)),
        InnerProductKind::Gns(sigma) => {
            sigma.require_strict()?;
            Ok(trace(&(sigma.matrix() * x.adjoint() * y)))
        }
        InnerProductKind::Kms(sigma) => {
            sigma.require_strict()?;
            let s = sigma.pow(0.5);
            Ok(trace(&(&s * x.adjoint() * &s * y)))
        }
        InnerProductKind::Bkm(sigma) => {
            sigma.require_strict()?;
            Ok(bkm_inner(&sigma.eig(), x, y))
        }
    }
}

/// BKM inner product given σ's eigendecomposition.
pub fn bkm_inner(sigma_eig: &HermitianEig, x: &CMat, y: &CMat) -> C64 {
    let u = &sigma_eig.eigenvectors;
    let xt = u.adjoint() * x * u;
    let yt = u.adjoint() * y * u;
    let n = x.nrows();
    let mut acc = re(0.0);
    for a in 0..n {
        for b in 0..n {
            let k = log_mean(sigma_eig.eigenvalues[a], sigma_eig.eigenvalues[b]);
            acc += re(k) * xt[(b, a)].conj() * yt[(b, a)];
        }
    }
    acc
}

// ---------------------------------------------------------------------------
// τ-orthonormalization
// ---------------------------------------------------------------------------

/// Project away the identity component and τ-orthonormalize. The output is a
/// traceless τ-orthonormal family spanning span{inputs, I} ⊖ ℂI; rank
/// decisions use singular values with the `tol::RANK` cutoff.
pub fn orthonormalize_traceless(ops: &[CMat]) -> Vec<CMat> {
    if ops.is_empty() {
        return Vec::new();
    }
    let n = ops[0].nrows();
    let id = eye(n);
    let mut cols = CMat::zeros(n * n, ops.len());
    for (i, op) in ops.iter().enumerate() {
        let t = op - &id * ntrace(op);
        cols.set_column(i, &vec_rm(&t));
    }
    let svd = cols.svd(true, false);
    let u = svd.u.expect("svd with U requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return Vec::new();
    }
    let cut = tol::RANK * smax;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap());
    let mut out = Vec::new();
    for i in order {
        if svd.singular_values[i] > cut {
            // Columns of U are Frobenius-orthonormal; scale to τ-norm 1.
            let m = unvec_rm(&u.column(i).into_owned(), n) * re((n as f64).sqrt());
            out.push(m);
        }
    }
    out
}

/// Self-adjoint basis of M_r in the generalized Gell-Mann ordering (identity,
/// diagonal, symmetric pairs, antisymmetric pairs), normalized so that
/// Tr(B_i B_j) = r δ_ij. The identity is element 0.
pub fn self_adjoint_basis(r: usize) -> Vec<CMat> {
    let rf = r as f64;
    let mut out = vec![eye(r)];
    // diagonal, traceless: d_k ∝ diag(1,..,1,-k,0,..) for k = 1..r-1
    for k in 1..r {
        let mut m = CMat::zeros(r, r);
        for i in 0..k {
            m[(i, i)] = re(1.0);
        }
        m[(k, k)] = re(-(k as f64));
        let norm2 = (k + k * k) as f64; // Tr(m²) = k + k²
        out.push(m * re((rf / norm2).sqrt()));
    }
    let s = re((rf / 2.0).sqrt());
    for i in 0..r {
        for j in (i + 1)..r {
            let mut sym = CMat::zeros(r, r);
            sym[(i, j)] = re(1.0);
            sym[(j, i)] = re(1.0);
            out.push(sym * s);
            let mut asym = CMat::zeros(r, r);
            asym[(i, j)] = c(0.0, -1.0);
            asym[(j, i)] = c(0.0, 1.0);
            out.push(asym * s);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Seeded sampling helpers
// ---------------------------------------------------------------------------

pub mod sample {
    use super::*;
    use rand_distr::StandardNormal;

    /// Matrix with iid standard complex Gaussian entries.
    pub fn ginibre(n: usize, rng: &mut impl Rng) -> CMat {
        CMat::from_fn(n, n, |_, _| {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            c(a, b)
        })
    }

    pub fn hermitian(n: usize, rng: &mut impl Rng) -> CMat {
        let g = ginibre(n, rng);
        (&g + g.adjoint()) * re(0.5)
    }

    /// Haar-ish unitary from the QR of a Ginibre matrix.
    pub fn unitary(n: usize, rng: &mut impl Rng) -> CMat {
        let g = ginibre(n, rng);
        let qr = g.qr();
        let mut q = qr.q();
        let r = qr.r();
        for i in 0..n {
            let d = r[(i, i)];
            if d.norm() > 0.0 {
                let phase = d / re(d.norm());
                for k in 0..n {
                    q[(k, i)] *= phase;
                }
            }
        }
        q
    }

    /// Random density matrix; `floor > 0` mixes in floor·I/n which makes it
    /// strict.
    pub fn density(n: usize, floor: f64, rng: &mut impl Rng) -> DensityMatrix {
        let g = ginibre(n, rng);
        let mut p = &g * g.adjoint();
        let tr = trace(&p).re;
        p *= re((1.0 - floor) / tr);
        p += eye(n) * re(floor / n as f64);
        DensityMatrix::new(p, floor > 0.0).expect("constructed positive")
    }
}
