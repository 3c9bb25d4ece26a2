//! Finite-dimensional tracial von Neumann algebras.
//!
//! An algebra is a direct sum of complex matrix blocks `⊕_k M_{n_k}(ℂ)` with
//! trace `τ(x) = Σ_k w_k · Tr(x_k)` for positive block weights `w_k`. Elements
//! are dense per-block matrices. The module provides the weighted trace,
//! spectral calculus for self-adjoint elements, `L^p` norms, subalgebras with
//! orthonormal bases, joint fixed-point subalgebras of automorphisms, and
//! trace-preserving conditional expectations.
//!
//! Every operation works in a fixed orthonormal coordinate frame for the
//! inner product `⟨x, y⟩ = τ(y* x)`: the coordinates of `x` are the entries
//! `√w_k · x_k[i, j]`. In this frame adjoints of linear maps are conjugate
//! transposes and trace-preserving automorphisms are unitary matrices.

use crate::channels::ChannelOperator;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use num_complex::Complex64;
use rand::Rng;

/// Tolerance for merging degenerate eigenvalues.
pub const EIGEN_MERGE_TOL: f64 = 1e-10;
/// Singular-value cutoff for kernel computations.
pub const KERNEL_CUTOFF: f64 = 1e-9;
/// Spectral tolerance for self-adjointness / positivity predicates.
pub const SPECTRAL_TOL: f64 = 1e-10;

/// A direct sum of matrix blocks with a weighted trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceAlgebra {
    blocks: Vec<(usize, f64)>,
    normalized: bool,
}

impl TraceAlgebra {
    /// Builds an algebra from `(block_dim, weight)` pairs.
    ///
    /// If `normalized` is set, `τ(1) = Σ w_k n_k` must equal 1 within 1e-12.
    pub fn new(blocks: Vec<(usize, f64)>, normalized: bool) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Domain("algebra needs at least one block".into()));
        }
        for &(dim, weight) in &blocks {
            if dim == 0 {
                return Err(Error::Domain("block dimension must be >= 1".into()));
            }
            if !(weight > 0.0) || !weight.is_finite() {
                return Err(Error::Domain(format!("block weight must be positive, got {weight}")));
            }
        }
        let alg = TraceAlgebra { blocks, normalized };
        if normalized && (alg.trace_of_unit() - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "normalized algebra must have τ(1) = 1, got {}",
                alg.trace_of_unit()
            )));
        }
        Ok(alg)
    }

    /// The diagonal algebra on `points` atoms of equal weight, normalized.
    pub fn diagonal(points: usize) -> Result<Self> {
        let w = 1.0 / points as f64;
        Self::new(vec![(1, w); points], true)
    }

    /// A single `n × n` matrix block with the normalized trace.
    pub fn matrix_block(n: usize) -> Result<Self> {
        Self::new(vec![(n, 1.0 / n as f64)], true)
    }

    pub fn blocks(&self) -> &[(usize, f64)] {
        &self.blocks
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// `τ(1) = Σ w_k n_k`; the total measure seen by singular-number profiles.
    pub fn trace_of_unit(&self) -> f64 {
        self.blocks.iter().map(|&(n, w)| w * n as f64).sum()
    }

    /// Dimension of the coordinate space `Σ n_k²`.
    pub fn coord_dim(&self) -> usize {
        self.blocks.iter().map(|&(n, _)| n * n).sum()
    }

    pub fn zero(&self) -> AlgElement {
        AlgElement {
            blocks: self.blocks.iter().map(|&(n, _)| CMat::zeros(n, n)).collect(),
        }
    }

    pub fn unit(&self) -> AlgElement {
        AlgElement {
            blocks: self.blocks.iter().map(|&(n, _)| CMat::identity(n, n)).collect(),
        }
    }

    /// The matrix-unit element `E_{ij}` in one block, zero elsewhere.
    pub fn matrix_unit(&self, block: usize, i: usize, j: usize) -> AlgElement {
        let mut x = self.zero();
        x.blocks[block][(i, j)] = Complex64::new(1.0, 0.0);
        x
    }

    /// Builds an element from per-block matrices, validating shapes.
    pub fn element(&self, blocks: Vec<CMat>) -> Result<AlgElement> {
        let x = AlgElement { blocks };
        self.check_element(&x)?;
        Ok(x)
    }

    /// A diagonal element (entries laid out block by block).
    pub fn diagonal_element(&self, entries: &[f64]) -> Result<AlgElement> {
        let total: usize = self.blocks.iter().map(|&(n, _)| n).sum();
        if entries.len() != total {
            return Err(Error::Shape(format!(
                "expected {total} diagonal entries, got {}",
                entries.len()
            )));
        }
        let mut x = self.zero();
        let mut k = 0;
        for (b, &(n, _)) in self.blocks.iter().enumerate() {
            for i in 0..n {
                x.blocks[b][(i, i)] = Complex64::new(entries[k], 0.0);
                k += 1;
            }
        }
        Ok(x)
    }

    pub fn check_element(&self, x: &AlgElement) -> Result<()> {
        if x.blocks.len() != self.blocks.len() {
            return Err(Error::Shape(format!(
                "element has {} blocks, algebra has {}",
                x.blocks.len(),
                self.blocks.len()
            )));
        }
        for (b, (&(n, _), m)) in self.blocks.iter().zip(&x.blocks).enumerate() {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::Shape(format!(
                    "block {b} is {}×{}, expected {n}×{n}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        Ok(())
    }

    /// Coordinates of `x` in the orthonormal frame `√w_k · x_k[i,j]`.
    pub fn to_coords(&self, x: &AlgElement) -> CVec {
        let mut v = CVec::zeros(self.coord_dim());
        let mut k = 0;
        for (b, &(n, w)) in self.blocks.iter().enumerate() {
            let s = w.sqrt();
            for i in 0..n {
                for j in 0..n {
                    v[k] = x.blocks[b][(i, j)] * s;
                    k += 1;
                }
            }
        }
        v
    }

    pub fn from_coords(&self, v: &CVec) -> AlgElement {
        let mut x = self.zero();
        let mut k = 0;
        for (b, &(n, w)) in self.blocks.iter().enumerate() {
            let s = 1.0 / w.sqrt();
            for i in 0..n {
                for j in 0..n {
                    x.blocks[b][(i, j)] = v[k] * s;
                    k += 1;
                }
            }
        }
        x
    }

    /// `τ(x)`; linear, and `τ(x* x) ≥ 0`.
    pub fn trace(&self, x: &AlgElement) -> Result<Complex64> {
        self.check_element(x)?;
        let mut t = Complex64::new(0.0, 0.0);
        for (&(n, w), m) in self.blocks.iter().zip(&x.blocks) {
            let mut tr = Complex64::new(0.0, 0.0);
            for i in 0..n {
                tr += m[(i, i)];
            }
            t += tr * w;
        }
        Ok(t)
    }

    /// `⟨x, y⟩ = τ(y* x)`.
    pub fn inner(&self, x: &AlgElement, y: &AlgElement) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for ((m, ym), &(_, w)) in x.blocks.iter().zip(&y.blocks).zip(&self.blocks) {
            let mut s = Complex64::new(0.0, 0.0);
            for (a, b) in m.iter().zip(ym.iter()) {
                s += b.conj() * a;
            }
            acc += s * w;
        }
        acc
    }

    /// Weighted Schatten norm `τ(|x|^p)^{1/p}`; `p = ∞` is the operator norm.
    pub fn lp_norm(&self, x: &AlgElement, p: f64) -> Result<f64> {
        self.check_element(x)?;
        if p.is_nan() || p < 1.0 {
            return Err(Error::Domain(format!("lp_norm requires p >= 1 or ∞, got {p}")));
        }
        if p.is_infinite() {
            let mut sup: f64 = 0.0;
            for m in &x.blocks {
                sup = sup.max(linalg::singular_values(m).first().copied().unwrap_or(0.0));
            }
            return Ok(sup);
        }
        let mut acc = 0.0;
        for (m, &(_, w)) in x.blocks.iter().zip(&self.blocks) {
            for s in linalg::singular_values(m) {
                acc += w * s.powf(p);
            }
        }
        Ok(acc.powf(1.0 / p))
    }

    pub fn l2_norm(&self, x: &AlgElement) -> f64 {
        self.inner(x, x).re.max(0.0).sqrt()
    }

    pub fn linf_norm(&self, x: &AlgElement) -> f64 {
        self.lp_norm(x, f64::INFINITY).expect("∞-norm")
    }

    /// Spectral decomposition of a self-adjoint element: pairs `(λ_i, e_i)`
    /// with eigenvalues ascending, eigenvalues closer than [`EIGEN_MERGE_TOL`]
    /// merged, projections mutually orthogonal and summing to 1.
    pub fn spectral_decomposition(&self, x: &AlgElement) -> Result<Vec<(f64, AlgElement)>> {
        self.check_element(x)?;
        if !x.is_self_adjoint(SPECTRAL_TOL) {
            return Err(Error::Domain("spectral decomposition needs a self-adjoint element".into()));
        }
        // (eigenvalue, block, column vector)
        let mut pairs: Vec<(f64, usize, CVec)> = Vec::new();
        for (b, m) in x.blocks.iter().enumerate() {
            let (vals, vecs) = linalg::hermitian_eigen(m);
            for (i, &v) in vals.iter().enumerate() {
                pairs.push((v, b, vecs.column(i).into_owned()));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out: Vec<(f64, AlgElement)> = Vec::new();
        let mut idx = 0;
        while idx < pairs.len() {
            let mut j = idx + 1;
            while j < pairs.len() && pairs[j].0 - pairs[j - 1].0 <= EIGEN_MERGE_TOL {
                j += 1;
            }
            let group = &pairs[idx..j];
            let lambda = group.iter().map(|g| g.0).sum::<f64>() / group.len() as f64;
            let mut proj = self.zero();
            for (_, b, v) in group {
                let outer = v * v.adjoint();
                proj.blocks[*b] += outer;
            }
            out.push((lambda, proj));
            idx = j;
        }
        Ok(out)
    }

    /// `f(x)` for self-adjoint `x`, applied on the spectrum.
    pub fn spectral_map(&self, x: &AlgElement, f: impl Fn(f64) -> f64) -> Result<AlgElement> {
        let decomp = self.spectral_decomposition(x)?;
        let mut y = self.zero();
        for (lambda, e) in decomp {
            y = y.add(&e.scale_re(f(lambda)));
        }
        Ok(y)
    }

    /// `χ_I(x)`: the sum of eigenprojections with eigenvalue in the interval.
    pub fn spectral_projection(&self, x: &AlgElement, interval: Interval) -> Result<AlgElement> {
        let decomp = self.spectral_decomposition(x)?;
        let mut e = self.zero();
        for (lambda, p) in decomp {
            if interval.contains(lambda) {
                e = e.add(&p);
            }
        }
        Ok(e)
    }

    /// For `0 ≤ b ≤ 1`, the spectral projection `e = χ_{[1/2,1]}(b)` together
    /// with its trace defect `τ(1−e)` and a left-inverse witness `b⁻` with
    /// `‖b⁻‖ ≤ 2` and `e = b·b⁻`. The defect bound `τ(1−e) ≤ 2 τ(1−b)` is
    /// certified before returning.
    pub fn half_projection(&self, b: &AlgElement) -> Result<HalfProjection> {
        self.check_element(b)?;
        let decomp = self.spectral_decomposition(b)?;
        let lo = decomp.first().map(|p| p.0).unwrap_or(0.0);
        let hi = decomp.last().map(|p| p.0).unwrap_or(0.0);
        if lo < -SPECTRAL_TOL || hi > 1.0 + SPECTRAL_TOL {
            return Err(Error::Domain(format!(
                "half_projection needs 0 ≤ b ≤ 1, spectrum is [{lo}, {hi}]"
            )));
        }
        let mut e = self.zero();
        let mut witness = self.zero();
        for (lambda, p) in &decomp {
            if *lambda >= 0.5 {
                e = e.add(p);
                witness = witness.add(&p.scale_re(1.0 / lambda.max(0.5)));
            }
        }
        let unit = self.unit();
        let defect = self.trace(&unit.sub(&e))?.re;
        let slack = self.trace(&unit.sub(b))?.re;
        if defect > 2.0 * slack + 1e-10 {
            return Err(Error::Numeric(format!(
                "half_projection bound violated: τ(1−e) = {defect} > 2·τ(1−b) = {}",
                2.0 * slack
            )));
        }
        Ok(HalfProjection { projection: e, defect, left_inverse: witness })
    }

    /// Random element with independent complex Gaussian entries, scaled to
    /// operator norm roughly 1.
    pub fn random_element<R: Rng>(&self, rng: &mut R) -> AlgElement {
        let dist = linalg::rand_distr_standard();
        let mut x = self.zero();
        for m in &mut x.blocks {
            for z in m.iter_mut() {
                *z = Complex64::new(rng.sample(&dist), rng.sample(&dist));
            }
        }
        let norm = self.linf_norm(&x);
        if norm > 0.0 {
            x = x.scale_re(1.0 / norm);
        }
        x
    }

    pub fn random_self_adjoint<R: Rng>(&self, rng: &mut R) -> AlgElement {
        let x = self.random_element(rng);
        let h = x.add(&x.adjoint()).scale_re(0.5);
        let norm = self.linf_norm(&h);
        if norm > 0.0 {
            h.scale_re(1.0 / norm)
        } else {
            h
        }
    }

    /// Random positive element with spectrum in `[0, 1]`.
    pub fn random_positive<R: Rng>(&self, rng: &mut R) -> AlgElement {
        let x = self.random_element(rng);
        let p = x.mul(&x.adjoint());
        let norm = self.linf_norm(&p);
        if norm > 0.0 {
            p.scale_re(1.0 / norm)
        } else {
            p
        }
    }

    /// Random unitary element (blockwise Haar-ish).
    pub fn random_unitary<R: Rng>(&self, rng: &mut R) -> AlgElement {
        AlgElement {
            blocks: self.blocks.iter().map(|&(n, _)| linalg::haar_unitary(rng, n)).collect(),
        }
    }
}

/// Result of [`TraceAlgebra::half_projection`].
#[derive(Debug, Clone)]
pub struct HalfProjection {
    pub projection: AlgElement,
    /// `τ(1 − e)`.
    pub defect: f64,
    /// `b⁻` with `‖b⁻‖ ≤ 2` and `b·b⁻ = e`.
    pub left_inverse: AlgElement,
}

/// A real interval with configurable endpoint openness, for spectral filters.
#[derive(Debug, Clone, Copy)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl Interval {
    /// `[lo, hi]`
    pub fn closed(lo: f64, hi: f64) -> Self {
        Interval { lo, hi, lo_open: false, hi_open: false }
    }

    /// `(lo, hi]`
    pub fn left_open(lo: f64, hi: f64) -> Self {
        Interval { lo, hi, lo_open: true, hi_open: false }
    }

    /// `(lo, ∞)`
    pub fn greater_than(lo: f64) -> Self {
        Interval { lo, hi: f64::INFINITY, lo_open: true, hi_open: true }
    }

    pub fn contains(&self, t: f64) -> bool {
        let above = if self.lo_open { t > self.lo } else { t >= self.lo };
        let below = if self.hi_open { t < self.hi } else { t <= self.hi };
        above && below
    }
}

/// An element of a [`TraceAlgebra`]: one dense complex matrix per block.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgElement {
    pub(crate) blocks: Vec<CMat>,
}

impl AlgElement {
    pub fn block(&self, b: usize) -> &CMat {
        &self.blocks[b]
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    pub fn add(&self, other: &AlgElement) -> AlgElement {
        debug_assert_eq!(self.blocks.len(), other.blocks.len());
        AlgElement {
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &AlgElement) -> AlgElement {
        debug_assert_eq!(self.blocks.len(), other.blocks.len());
        AlgElement {
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, c: Complex64) -> AlgElement {
        AlgElement { blocks: self.blocks.iter().map(|a| a.map(|z| z * c)).collect() }
    }

    pub fn scale_re(&self, c: f64) -> AlgElement {
        AlgElement { blocks: self.blocks.iter().map(|a| a.map(|z| z * c)).collect() }
    }

    /// Blockwise matrix product.
    pub fn mul(&self, other: &AlgElement) -> AlgElement {
        debug_assert_eq!(self.blocks.len(), other.blocks.len());
        AlgElement {
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a * b).collect(),
        }
    }

    pub fn adjoint(&self) -> AlgElement {
        AlgElement { blocks: self.blocks.iter().map(|a| a.adjoint()).collect() }
    }

    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        self.blocks.iter().all(|m| linalg::max_abs(&(m - m.adjoint())) <= tol)
    }

    /// Positivity tested spectrally: self-adjoint and min eigenvalue ≥ −tol.
    pub fn is_positive(&self, tol: f64) -> bool {
        if !self.is_self_adjoint(tol) {
            return false;
        }
        self.blocks.iter().all(|m| linalg::min_eigenvalue(m) >= -tol)
    }

    /// Unitarity check `‖u*u − 1‖_max ≤ tol` per block.
    pub fn is_unitary(&self, tol: f64) -> bool {
        self.blocks.iter().all(|m| {
            let n = m.nrows();
            linalg::max_abs(&(m.adjoint() * m - CMat::identity(n, n))) <= tol
        })
    }

    /// Max absolute entry across blocks; cheap zero-distance surrogate.
    pub fn max_abs(&self) -> f64 {
        self.blocks.iter().map(linalg::max_abs).fold(0.0, f64::max)
    }
}

/// A unital *-subalgebra, represented by an orthonormal self-adjoint basis
/// with respect to `⟨x, y⟩ = τ(y* x)`.
#[derive(Debug, Clone)]
pub struct Subalgebra {
    parent: TraceAlgebra,
    basis: Vec<AlgElement>,
}

impl Subalgebra {
    /// Validates and wraps an orthonormal spanning set: the span must contain
    /// the unit, be closed under adjoints exactly and under products within
    /// 1e-9 in the trace norm, and the basis must be orthonormal within 1e-10.
    pub fn new(parent: TraceAlgebra, basis: Vec<AlgElement>) -> Result<Self> {
        for b in &basis {
            parent.check_element(b)?;
        }
        let sub = Subalgebra { parent, basis };
        sub.validate()?;
        Ok(sub)
    }

    /// Closes a spanning set under unit, adjoints and products, then
    /// orthonormalizes into a self-adjoint basis.
    pub fn from_spanning_set(parent: TraceAlgebra, generators: &[AlgElement]) -> Result<Self> {
        for g in generators {
            parent.check_element(g)?;
        }
        let mut span: Vec<CVec> = Vec::new();
        let add = |alg: &TraceAlgebra, span: &mut Vec<CVec>, x: &AlgElement| -> bool {
            let mut v = alg.to_coords(x);
            for u in span.iter() {
                let c = u.dotc(&v);
                v -= u.map(|z| z * c);
            }
            // re-orthogonalize once for stability
            for u in span.iter() {
                let c = u.dotc(&v);
                v -= u.map(|z| z * c);
            }
            let n = v.norm();
            if n > 1e-8 {
                span.push(v.map(|z| z / Complex64::new(n, 0.0)));
                true
            } else {
                false
            }
        };
        add(&parent, &mut span, &parent.unit());
        for g in generators {
            add(&parent, &mut span, g);
            add(&parent, &mut span, &g.adjoint());
        }
        let dim_cap = parent.coord_dim();
        loop {
            let members: Vec<AlgElement> = span.iter().map(|v| parent.from_coords(v)).collect();
            let mut grew = false;
            'outer: for a in &members {
                for b in &members {
                    if add(&parent, &mut span, &a.mul(b)) {
                        grew = true;
                        if span.len() >= dim_cap {
                            break 'outer;
                        }
                    }
                }
            }
            if !grew || span.len() >= dim_cap {
                break;
            }
        }
        Self::from_coord_span(parent, &span)
    }

    /// Builds the subalgebra from an orthonormal coordinate span that is
    /// already known to be *-closed (e.g. a joint fixed-point space of
    /// automorphisms). The basis is rebuilt from self-adjoint representatives
    /// so adjoint-closure holds exactly.
    pub(crate) fn from_coord_span(parent: TraceAlgebra, span: &[CVec]) -> Result<Self> {
        let target = span.len();
        let mut candidates: Vec<AlgElement> = Vec::with_capacity(2 * target);
        for v in span {
            let x = parent.from_coords(v);
            candidates.push(x.add(&x.adjoint()).scale_re(0.5));
            candidates.push(x.sub(&x.adjoint()).scale(Complex64::new(0.0, -0.5)));
        }
        // Real Gram-Schmidt over self-adjoint elements; τ(yx) is real there.
        let mut basis: Vec<AlgElement> = Vec::with_capacity(target);
        for c in candidates {
            if basis.len() == target {
                break;
            }
            let mut x = c;
            for _ in 0..2 {
                for b in &basis {
                    let coeff = parent.inner(&x, b).re;
                    x = x.sub(&b.scale_re(coeff));
                }
            }
            let norm = parent.l2_norm(&x);
            if norm > 1e-8 {
                basis.push(x.scale_re(1.0 / norm));
            }
        }
        if basis.len() != target {
            return Err(Error::Numeric(format!(
                "could not extract a self-adjoint basis: got {} of {target}",
                basis.len()
            )));
        }
        Self::new(parent, basis)
    }

    fn validate(&self) -> Result<()> {
        let n = self.basis.len();
        if n == 0 {
            return Err(Error::Domain("subalgebra must contain the unit".into()));
        }
        for i in 0..n {
            for j in 0..n {
                let g = self.parent.inner(&self.basis[i], &self.basis[j]);
                let expect = if i == j { 1.0 } else { 0.0 };
                if (g - Complex64::new(expect, 0.0)).norm() > 1e-10 {
                    return Err(Error::Domain(format!(
                        "basis not orthonormal: ⟨b{i}, b{j}⟩ = {g}"
                    )));
                }
            }
        }
        let unit = self.parent.unit();
        if self.distance_from_span(&unit) > 1e-9 {
            return Err(Error::Domain("subalgebra does not contain the unit".into()));
        }
        for b in &self.basis {
            if self.distance_from_span(&b.adjoint()) > 1e-12 {
                return Err(Error::Domain("subalgebra not closed under adjoints".into()));
            }
        }
        for a in &self.basis {
            for b in &self.basis {
                if self.distance_from_span(&a.mul(b)) > 1e-9 {
                    return Err(Error::Domain("subalgebra not closed under products".into()));
                }
            }
        }
        Ok(())
    }

    /// Trace-norm distance from `x` to the span of the basis.
    pub fn distance_from_span(&self, x: &AlgElement) -> f64 {
        let mut r = x.clone();
        for b in &self.basis {
            let c = self.parent.inner(&r, b);
            r = r.sub(&b.scale(c));
        }
        self.parent.l2_norm(&r)
    }

    pub fn parent(&self) -> &TraceAlgebra {
        &self.parent
    }

    pub fn basis(&self) -> &[AlgElement] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// The whole algebra as a subalgebra of itself.
    pub fn full(parent: TraceAlgebra) -> Result<Self> {
        let mut span = Vec::new();
        let dim = parent.coord_dim();
        for k in 0..dim {
            let mut v = CVec::zeros(dim);
            v[k] = Complex64::new(1.0, 0.0);
            span.push(v);
        }
        Self::from_coord_span(parent, &span)
    }

    /// The scalar subalgebra `ℂ·1`.
    pub fn scalars(parent: TraceAlgebra) -> Result<Self> {
        let u = parent.unit();
        let norm = parent.l2_norm(&u);
        Self::new(parent.clone(), vec![u.scale_re(1.0 / norm)])
    }
}

/// Joint fixed-point subalgebra `{x : α(x) = x for all supplied α}` of a
/// family of trace-preserving *-automorphisms, computed as the kernel of the
/// stacked maps `α − id` with singular-value cutoff [`KERNEL_CUTOFF`].
pub fn fixed_point_subalgebra(maps: &[ChannelOperator], alg: &TraceAlgebra) -> Result<Subalgebra> {
    if maps.is_empty() {
        return Err(Error::Domain("need at least one map".into()));
    }
    let dim = alg.coord_dim();
    for (k, m) in maps.iter().enumerate() {
        if m.algebra() != alg {
            return Err(Error::Shape(format!("map {k} acts on a different algebra")));
        }
        if !m.flags().automorphism {
            return Err(Error::Domain(format!("map {k} is not a certified automorphism")));
        }
    }
    let mut stacked = CMat::zeros(dim * maps.len(), dim);
    for (k, m) in maps.iter().enumerate() {
        let diff = m.matrix() - CMat::identity(dim, dim);
        stacked.view_mut((k * dim, 0), (dim, dim)).copy_from(&diff);
    }
    let kernel = linalg::null_space(&stacked, KERNEL_CUTOFF);
    if kernel.is_empty() {
        return Err(Error::Numeric("fixed space is empty; the unit should always be fixed".into()));
    }
    Subalgebra::from_coord_span(alg.clone(), &kernel)
}

/// The τ-preserving conditional expectation onto a subalgebra: the orthogonal
/// projection onto its span in `⟨x,y⟩ = τ(y*x)`, packaged as a channel.
///
/// The returned operator is certified unital, idempotent, self-adjoint,
/// trace-preserving, positive on a deterministic random sample, and satisfies
/// the bimodule law `E(a x b) = a E(x) b` for `a, b` in the subalgebra.
pub fn conditional_expectation(sub: &Subalgebra) -> Result<ChannelOperator> {
    let alg = sub.parent();
    let dim = alg.coord_dim();
    let mut p = CMat::zeros(dim, dim);
    for b in sub.basis() {
        let v = alg.to_coords(b);
        p += &v * v.adjoint();
    }
    let e = ChannelOperator::from_matrix(alg.clone(), p)?;

    let unit = alg.unit();
    if e.apply(&unit)?.sub(&unit).max_abs() > 1e-9 {
        return Err(Error::Domain("conditional expectation is not unital".into()));
    }
    let m = e.matrix();
    if linalg::max_abs(&(m * m - m)) > 1e-9 {
        return Err(Error::Numeric("projection is not idempotent".into()));
    }
    if linalg::max_abs(&(m.adjoint() - m)) > 1e-10 {
        return Err(Error::Numeric("projection is not self-adjoint".into()));
    }
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x45_58_50);
    for _ in 0..8 {
        let x = alg.random_positive(&mut rng);
        if !e.apply(&x)?.is_positive(1e-9) {
            return Err(Error::Numeric("expectation failed positivity on a sample".into()));
        }
        let tr_x = alg.trace(&x)?;
        let tr_ex = alg.trace(&e.apply(&x)?)?;
        if (tr_x - tr_ex).norm() > 1e-9 {
            return Err(Error::Numeric("expectation is not trace-preserving".into()));
        }
        // bimodule law over basis pairs
        let y = alg.random_element(&mut rng);
        let ey = e.apply(&y)?;
        for a in sub.basis().iter().take(3) {
            for b in sub.basis().iter().take(3) {
                let lhs = e.apply(&a.mul(&y).mul(b))?;
                let rhs = a.mul(&ey).mul(b);
                if lhs.sub(&rhs).max_abs() > 1e-9 {
                    return Err(Error::Numeric("bimodule law E(a x b) = a E(x) b failed".into()));
                }
            }
        }
    }
    Ok(e)
}
