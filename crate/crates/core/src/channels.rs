//! Markov operators on a trace algebra and their certification.
//!
//! A channel is stored as a dense matrix on the orthonormal coordinate frame
//! of its algebra, so adjoints are conjugate transposes and the `L²(τ)`
//! operator norm is the matrix 2-norm. Markov flags (unital, trace-preserving,
//! positive, completely positive, contractive) are computed lazily, cached,
//! and certified numerically rather than trusted.

use crate::algebra::{AlgElement, TraceAlgebra};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::orlicz::{self, OrliczFunction};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;

/// Threshold for unitality / trace preservation / Choi positivity.
pub const MARKOV_TOL: f64 = 1e-10;

/// A linear map on a [`TraceAlgebra`], stored as a coordinate matrix.
#[derive(Debug, Clone)]
pub struct ChannelOperator {
    algebra: TraceAlgebra,
    matrix: CMat,
    flags: OnceLock<FlagReport>,
}

/// Numerically certified properties of a channel.
#[derive(Debug, Clone)]
pub struct FlagReport {
    pub unital: bool,
    pub unital_residual: f64,
    pub trace_preserving: bool,
    pub trace_residual: f64,
    /// Positivity witnessed on a deterministic sample of positive inputs.
    pub positive: bool,
    pub positivity_margin: f64,
    pub completely_positive: bool,
    pub choi_min_eigenvalue: f64,
    pub linf_contraction: bool,
    pub linf_excess: f64,
    pub l1_contraction: bool,
    pub l1_excess: f64,
    /// `L²(τ)` operator norm of the coordinate matrix.
    pub l2_operator_norm: f64,
    pub self_adjoint: bool,
    pub automorphism: bool,
    pub multiplicativity_residual: f64,
}

impl FlagReport {
    /// Unital, trace-preserving and completely positive.
    pub fn is_markov(&self) -> bool {
        self.unital && self.trace_preserving && self.completely_positive
    }
}

impl ChannelOperator {
    pub fn from_matrix(algebra: TraceAlgebra, matrix: CMat) -> Result<Self> {
        let d = algebra.coord_dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::Shape(format!(
                "channel matrix is {}×{}, coordinate dimension is {d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(ChannelOperator { algebra, matrix, flags: OnceLock::new() })
    }

    /// Builds the coordinate matrix by applying a linear action to the
    /// matrix-unit basis.
    pub fn from_action(
        algebra: TraceAlgebra,
        action: impl Fn(&AlgElement) -> AlgElement,
    ) -> Result<Self> {
        let d = algebra.coord_dim();
        let mut m = CMat::zeros(d, d);
        let mut col = 0;
        for (b, &(n, _)) in algebra.blocks().iter().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    let e = algebra.matrix_unit(b, i, j);
                    let image = action(&e);
                    algebra.check_element(&image)?;
                    // account for the √w scaling of the input basis vector
                    let w = algebra.blocks()[b].1.sqrt();
                    let coords = algebra.to_coords(&image);
                    m.set_column(col, &coords.map(|z| z / Complex64::new(w, 0.0)));
                    col += 1;
                }
            }
        }
        Self::from_matrix(algebra, m)
    }

    pub fn identity(algebra: TraceAlgebra) -> Self {
        let d = algebra.coord_dim();
        ChannelOperator { algebra, matrix: CMat::identity(d, d), flags: OnceLock::new() }
    }

    /// Conjugation `x ↦ u x u*` by a unitary element.
    pub fn conjugation(algebra: &TraceAlgebra, u: &AlgElement) -> Result<Self> {
        algebra.check_element(u)?;
        if !u.is_unitary(1e-10) {
            return Err(Error::Domain("conjugation needs a unitary element".into()));
        }
        let ustar = u.adjoint();
        Self::from_action(algebra.clone(), |x| u.mul(x).mul(&ustar))
    }

    /// Permutation automorphism of a diagonal algebra; `perm[i]` is the image
    /// of atom `i`. Weights must be constant along orbits.
    pub fn permutation(algebra: &TraceAlgebra, perm: &[usize]) -> Result<Self> {
        let n = algebra.blocks().len();
        if algebra.blocks().iter().any(|&(d, _)| d != 1) {
            return Err(Error::Domain("permutation channels need a diagonal algebra".into()));
        }
        if perm.len() != n {
            return Err(Error::Shape(format!("permutation of length {}, expected {n}", perm.len())));
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || seen[p] {
                return Err(Error::Domain("not a permutation".into()));
            }
            seen[p] = true;
        }
        for (i, &p) in perm.iter().enumerate() {
            if (algebra.blocks()[i].1 - algebra.blocks()[p].1).abs() > 1e-14 {
                return Err(Error::Domain("permutation must preserve trace weights".into()));
            }
        }
        Self::from_action(algebra.clone(), |x| {
            let mut y = algebra.zero();
            for i in 0..n {
                y.blocks_mut()[perm[i]][(0, 0)] = x.block(i)[(0, 0)];
            }
            y
        })
    }

    /// `x ↦ τ(x)/τ(1) · 1`.
    pub fn trace_replacement(algebra: &TraceAlgebra) -> Result<Self> {
        let total = algebra.trace_of_unit();
        let alg = algebra.clone();
        Self::from_action(algebra.clone(), move |x| {
            let t = alg.trace(x).expect("validated element") / Complex64::new(total, 0.0);
            alg.unit().scale(t)
        })
    }

    pub fn algebra(&self) -> &TraceAlgebra {
        &self.algebra
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn apply(&self, x: &AlgElement) -> Result<AlgElement> {
        self.algebra.check_element(x)?;
        let v = self.algebra.to_coords(x);
        Ok(self.algebra.from_coords(&(&self.matrix * v)))
    }

    /// Adjoint with respect to `⟨x, y⟩ = τ(y* x)`; exact involution by
    /// representation (conjugate transpose).
    pub fn adjoint(&self) -> Self {
        ChannelOperator {
            algebra: self.algebra.clone(),
            matrix: self.matrix.adjoint(),
            flags: OnceLock::new(),
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.algebra != other.algebra {
            return Err(Error::Shape("composing channels on different algebras".into()));
        }
        Self::from_matrix(self.algebra.clone(), &self.matrix * &other.matrix)
    }

    pub fn power(&self, n: usize) -> Self {
        let d = self.algebra.coord_dim();
        let mut m = CMat::identity(d, d);
        for _ in 0..n {
            m = &m * &self.matrix;
        }
        ChannelOperator { algebra: self.algebra.clone(), matrix: m, flags: OnceLock::new() }
    }

    /// Real-linear combination `Σ c_k T_k`.
    pub fn linear_combination(terms: &[(f64, &ChannelOperator)]) -> Result<Self> {
        let first = terms.first().ok_or_else(|| Error::Domain("empty combination".into()))?;
        let alg = first.1.algebra.clone();
        let d = alg.coord_dim();
        let mut m = CMat::zeros(d, d);
        for (c, t) in terms {
            if t.algebra != alg {
                return Err(Error::Shape("combining channels on different algebras".into()));
            }
            m += t.matrix.map(|z| z * *c);
        }
        Self::from_matrix(alg, m)
    }

    /// Lazily computed, cached flag report; deterministic across calls.
    pub fn flags(&self) -> &FlagReport {
        self.flags.get_or_init(|| self.certify())
    }

    /// Full Markov certification: unitality, trace preservation, Choi
    /// complete positivity, and operator-norm / `L¹` contraction on samples.
    pub fn certify_markov(&self) -> &FlagReport {
        self.flags()
    }

    pub fn is_markov(&self) -> bool {
        self.flags().is_markov()
    }

    fn certify(&self) -> FlagReport {
        let alg = &self.algebra;
        let unit = alg.unit();
        let unital_residual = self.apply(&unit).expect("unit").sub(&unit).max_abs();
        // τ∘T = τ on a basis is T*(1) = 1 in coordinates.
        let one = alg.to_coords(&unit);
        let trace_residual = linalg::max_abs_vec(&(self.matrix.adjoint() * &one - &one));

        let (choi_min, _) = self.choi_min();
        let completely_positive = choi_min >= -MARKOV_TOL;

        let mut rng = ChaCha8Rng::seed_from_u64(0x4d41524b);
        let mut positivity_margin = f64::INFINITY;
        let mut linf_excess: f64 = 0.0;
        let mut l1_excess: f64 = 0.0;
        let mut mult_residual: f64 = 0.0;
        for _ in 0..24 {
            let p = alg.random_positive(&mut rng);
            let image = self.apply(&p).expect("sample");
            let margin = if image.is_self_adjoint(1e-8) {
                image
                    .blocks()
                    .iter()
                    .map(|m| {
                        let h = (m + m.adjoint()).scale(0.5);
                        linalg::min_eigenvalue(&h)
                    })
                    .fold(f64::INFINITY, f64::min)
            } else {
                f64::NEG_INFINITY
            };
            positivity_margin = positivity_margin.min(margin);

            let x = alg.random_element(&mut rng);
            let tx = self.apply(&x).expect("sample");
            linf_excess = linf_excess.max(alg.linf_norm(&tx) - alg.linf_norm(&x));
            l1_excess = l1_excess
                .max(alg.lp_norm(&tx, 1.0).expect("p=1") - alg.lp_norm(&x, 1.0).expect("p=1"));

            let y = alg.random_element(&mut rng);
            let lhs = self.apply(&x.mul(&y)).expect("sample");
            let rhs = self.apply(&x).expect("x").mul(&self.apply(&y).expect("y"));
            mult_residual = mult_residual.max(lhs.sub(&rhs).max_abs());
        }

        let unital = unital_residual <= MARKOV_TOL;
        let trace_preserving = trace_residual <= MARKOV_TOL;
        let d = alg.coord_dim();
        let coord_unitary =
            linalg::max_abs(&(self.matrix.adjoint() * &self.matrix - CMat::identity(d, d))) <= 1e-9;
        FlagReport {
            unital,
            unital_residual,
            trace_preserving,
            trace_residual,
            positive: completely_positive || positivity_margin >= -MARKOV_TOL,
            positivity_margin,
            completely_positive,
            choi_min_eigenvalue: choi_min,
            linf_contraction: linf_excess <= MARKOV_TOL,
            linf_excess,
            l1_contraction: l1_excess <= MARKOV_TOL,
            l1_excess,
            l2_operator_norm: linalg::operator_norm(&self.matrix),
            self_adjoint: linalg::max_abs(&(self.matrix.adjoint() - &self.matrix)) <= 1e-10,
            automorphism: unital && trace_preserving && coord_unitary && mult_residual <= 1e-9,
            multiplicativity_residual: mult_residual,
        }
    }

    /// Choi matrices per (input block, output block) pair with the overall
    /// minimum eigenvalue; a map is completely positive iff every block-pair
    /// Choi matrix is positive semidefinite.
    pub fn choi_blocks(&self) -> Vec<ChoiBlock> {
        let alg = &self.algebra;
        let nblocks = alg.blocks().len();
        // images of all matrix units, computed once
        let mut images: Vec<Vec<AlgElement>> = Vec::with_capacity(nblocks);
        for (b, &(n, _)) in alg.blocks().iter().enumerate() {
            let mut per_block = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    per_block.push(self.apply(&alg.matrix_unit(b, i, j)).expect("matrix unit"));
                }
            }
            images.push(per_block);
        }
        let mut out = Vec::new();
        for (bi, &(n_in, _)) in alg.blocks().iter().enumerate() {
            for (bo, &(n_out, _)) in alg.blocks().iter().enumerate() {
                let mut choi = CMat::zeros(n_in * n_out, n_in * n_out);
                for i in 0..n_in {
                    for j in 0..n_in {
                        let img = &images[bi][i * n_in + j].blocks()[bo];
                        for r in 0..n_out {
                            for c in 0..n_out {
                                choi[(i * n_out + r, j * n_out + c)] = img[(r, c)];
                            }
                        }
                    }
                }
                let min_eigenvalue = linalg::min_eigenvalue(&choi);
                out.push(ChoiBlock { in_block: bi, out_block: bo, matrix: choi, min_eigenvalue });
            }
        }
        out
    }

    fn choi_min(&self) -> (f64, usize) {
        let blocks = self.choi_blocks();
        let mut min = f64::INFINITY;
        let mut arg = 0;
        for (k, cb) in blocks.iter().enumerate() {
            if cb.min_eigenvalue < min {
                min = cb.min_eigenvalue;
                arg = k;
            }
        }
        (min, arg)
    }
}

/// One (input block, output block) component of the Choi certification.
#[derive(Debug, Clone)]
pub struct ChoiBlock {
    pub in_block: usize,
    pub out_block: usize,
    pub matrix: CMat,
    pub min_eigenvalue: f64,
}

/// Report of the Dunford–Schwartz checks on samples: `L^∞` and `L¹`
/// contraction, the head-integral majorization `∫₀ᵗ μ(Tx) ≤ ∫₀ᵗ μ(x)`, and
/// `‖Tx‖_Φ ≤ ‖x‖_Φ` for every supplied Orlicz function.
#[derive(Debug, Clone)]
pub struct DunfordSchwartzReport {
    pub samples: usize,
    pub linf_excess: f64,
    pub l1_excess: f64,
    pub head_integral_excess: f64,
    pub orlicz_excess: Vec<(String, f64)>,
    pub holds: bool,
}

pub fn dunford_schwartz_check(
    t: &ChannelOperator,
    samples: usize,
    phis: &[OrliczFunction],
    seed: u64,
) -> Result<DunfordSchwartzReport> {
    let alg = t.algebra();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut linf_excess: f64 = 0.0;
    let mut l1_excess: f64 = 0.0;
    let mut head_excess: f64 = 0.0;
    let mut orlicz_excess: Vec<(String, f64)> =
        phis.iter().map(|p| (p.name().to_string(), 0.0f64)).collect();
    for _ in 0..samples {
        let x = alg.random_element(&mut rng);
        let tx = t.apply(&x)?;
        linf_excess = linf_excess.max(alg.linf_norm(&tx) - alg.linf_norm(&x));
        l1_excess = l1_excess.max(alg.lp_norm(&tx, 1.0)? - alg.lp_norm(&x, 1.0)?);
        let mu_x = orlicz::s_numbers(alg, &x)?;
        let mu_tx = orlicz::s_numbers(alg, &tx)?;
        let mut ts: Vec<f64> = mu_x.breakpoints();
        ts.extend(mu_tx.breakpoints());
        for &s in &ts {
            head_excess = head_excess.max(mu_tx.integral_to(s) - mu_x.integral_to(s));
        }
        for (k, phi) in phis.iter().enumerate() {
            let nx = orlicz::orlicz_norm(alg, &x, phi)?;
            let ntx = orlicz::orlicz_norm(alg, &tx, phi)?;
            orlicz_excess[k].1 = orlicz_excess[k].1.max(ntx - nx);
        }
    }
    let tol = MARKOV_TOL;
    let holds = linf_excess <= tol
        && l1_excess <= tol
        && head_excess <= tol
        && orlicz_excess.iter().all(|(_, e)| *e <= tol);
    Ok(DunfordSchwartzReport {
        samples,
        linf_excess,
        l1_excess,
        head_integral_excess: head_excess,
        orlicz_excess,
        holds,
    })
}

/// Checks `T(x)* T(x) ≤ T(x* x)` on samples for a unital completely positive
/// map, via the spectral minimum of the difference.
#[derive(Debug, Clone)]
pub struct KadisonReport {
    pub samples: usize,
    pub worst_margin: f64,
    pub holds: bool,
}

pub fn kadison_check(t: &ChannelOperator, samples: usize, seed: u64) -> Result<KadisonReport> {
    let flags = t.flags();
    if !(flags.unital && flags.completely_positive) {
        return Err(Error::HypothesisNotMet(
            "Kadison inequality needs a unital completely positive map".into(),
        ));
    }
    let alg = t.algebra();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..samples {
        let x = alg.random_element(&mut rng);
        let tx = t.apply(&x)?;
        let diff = t.apply(&x.adjoint().mul(&x))?.sub(&tx.adjoint().mul(&tx));
        let margin = diff
            .blocks()
            .iter()
            .map(|m| linalg::min_eigenvalue(m))
            .fold(f64::INFINITY, f64::min);
        worst = worst.min(margin);
    }
    Ok(KadisonReport { samples, worst_margin: worst, holds: worst >= -1e-9 })
}

/// Explicit dilation data for a factorizable Markov operator: an ancilla of
/// dimension `k` with a weight vector, a unitary on the enlarged algebra
/// `⊕_b M_{n_b·k}`, the embedding `x ↦ x ⊗ 1_k` and the weighted partial
/// trace back.
#[derive(Debug, Clone)]
pub struct Factorization {
    base: TraceAlgebra,
    ancilla_dim: usize,
    ancilla_weights: Vec<f64>,
    unitary: AlgElement,
}

impl Factorization {
    pub fn new(
        base: TraceAlgebra,
        ancilla_dim: usize,
        ancilla_weights: Vec<f64>,
        unitary: AlgElement,
    ) -> Result<Self> {
        if ancilla_dim == 0 {
            return Err(Error::Domain("ancilla dimension must be >= 1".into()));
        }
        if ancilla_weights.len() != ancilla_dim {
            return Err(Error::Shape("one weight per ancilla level required".into()));
        }
        if ancilla_weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::Domain("ancilla weights must be positive".into()));
        }
        let sum: f64 = ancilla_weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("ancilla weights must sum to 1, got {sum}")));
        }
        let f = Factorization { base, ancilla_dim, ancilla_weights, unitary };
        f.enlarged_algebra()?.check_element(&f.unitary)?;
        if !f.unitary.is_unitary(1e-10) {
            return Err(Error::Domain("dilation element is not unitary".into()));
        }
        Ok(f)
    }

    pub fn uniform(base: TraceAlgebra, ancilla_dim: usize, unitary: AlgElement) -> Result<Self> {
        let w = 1.0 / ancilla_dim as f64;
        Self::new(base, ancilla_dim, vec![w; ancilla_dim], unitary)
    }

    /// Dilation of a convex combination `Σ c_i Ad_{v_i}`: a block-diagonal
    /// unitary over the ancilla with the combination weights as ancilla
    /// weights.
    pub fn convex_combination(
        base: TraceAlgebra,
        weights: Vec<f64>,
        unitaries: &[AlgElement],
    ) -> Result<Self> {
        let k = weights.len();
        if unitaries.len() != k {
            return Err(Error::Shape("one unitary per weight required".into()));
        }
        let mut blocks = Vec::new();
        for (b, &(n, _)) in base.blocks().iter().enumerate() {
            let mut m = CMat::zeros(n * k, n * k);
            for (a, v) in unitaries.iter().enumerate() {
                let vb = &v.blocks()[b];
                for i in 0..n {
                    for j in 0..n {
                        m[(i * k + a, j * k + a)] = vb[(i, j)];
                    }
                }
            }
            blocks.push(m);
        }
        let enlarged_unitary = AlgElement::from_blocks(blocks);
        Self::new(base, k, weights, enlarged_unitary)
    }

    /// The algebra `⊕_b M_{n_b·k}` with weights `w_b / k`, so the embedding is
    /// trace-preserving.
    pub fn enlarged_algebra(&self) -> Result<TraceAlgebra> {
        let k = self.ancilla_dim;
        TraceAlgebra::new(
            self.base
                .blocks()
                .iter()
                .map(|&(n, w)| (n * k, w / k as f64))
                .collect(),
            self.base.is_normalized(),
        )
    }

    /// `ι(x) = x ⊗ 1_k` (ancilla index fastest).
    pub fn embed(&self, x: &AlgElement) -> Result<AlgElement> {
        self.base.check_element(x)?;
        let k = self.ancilla_dim;
        let blocks = x
            .blocks()
            .iter()
            .map(|m| linalg::kron(m, &CMat::identity(k, k)))
            .collect();
        Ok(AlgElement::from_blocks(blocks))
    }

    /// Weighted partial trace over the ancilla:
    /// `Ê(z)_b[i,j] = Σ_a c_a · z_b[(i,a),(j,a)]`.
    pub fn expect_back(&self, z: &AlgElement) -> Result<AlgElement> {
        let enlarged = self.enlarged_algebra()?;
        enlarged.check_element(z)?;
        let k = self.ancilla_dim;
        let mut out = self.base.zero();
        for (b, &(n, _)) in self.base.blocks().iter().enumerate() {
            let zb = &z.blocks()[b];
            for i in 0..n {
                for j in 0..n {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (a, &c) in self.ancilla_weights.iter().enumerate() {
                        acc += zb[(i * k + a, j * k + a)] * c;
                    }
                    out.blocks_mut()[b][(i, j)] = acc;
                }
            }
        }
        Ok(out)
    }

    pub fn unitary(&self) -> &AlgElement {
        &self.unitary
    }

    pub fn ancilla_dim(&self) -> usize {
        self.ancilla_dim
    }
}

/// Composes `Ê ∘ Ad_u ∘ ι` and certifies the result is a Markov operator with
/// `L²(τ)` norm at most `1 + 1e−10`.
pub fn factorized_channel(f: &Factorization) -> Result<ChannelOperator> {
    let ustar = f.unitary.adjoint();
    let t = ChannelOperator::from_action(f.base_algebra().clone(), |x| {
        let embedded = f.embed(x).expect("validated shapes");
        let rotated = f.unitary.mul(&embedded).mul(&ustar);
        f.expect_back(&rotated).expect("validated shapes")
    })?;
    let flags = t.flags();
    if !flags.is_markov() {
        return Err(Error::Domain(format!(
            "factorization does not compose to a Markov operator \
             (unital residual {:.2e}, trace residual {:.2e}, Choi min {:.2e})",
            flags.unital_residual, flags.trace_residual, flags.choi_min_eigenvalue
        )));
    }
    if flags.l2_operator_norm > 1.0 + 1e-10 {
        return Err(Error::Numeric(format!(
            "factorized channel has L² norm {} > 1",
            flags.l2_operator_norm
        )));
    }
    Ok(t)
}

impl Factorization {
    pub fn base_algebra(&self) -> &TraceAlgebra {
        &self.base
    }
}

/// The alternating sequence `A_n x = T^n (T*)^n x` and its mirror
/// `(T*)^n T^n x`, with per-step increments, and a residual check against a
/// supplied nested family of conditional expectations when available.
#[derive(Debug, Clone)]
pub struct RotaSequence {
    /// `T^n (T*)^n x` for `n = 1..=N`.
    pub forward: Vec<AlgElement>,
    /// `(T*)^n T^n x` for `n = 1..=N`.
    pub backward: Vec<AlgElement>,
    /// `‖A_{n+1} x − A_n x‖_∞` (forward sequence, starting from `A_1−A_0`
    /// with `A_0 x = x`).
    pub increments: Vec<f64>,
    /// `‖(T*)^n T^n x − E(E_n x)‖_∞` when the nested data is supplied.
    pub expectation_residuals: Option<Vec<f64>>,
}

pub fn rota_sequence(
    t: &ChannelOperator,
    x: &AlgElement,
    n_max: usize,
    nested: Option<(&ChannelOperator, &[ChannelOperator])>,
) -> Result<RotaSequence> {
    if n_max == 0 {
        return Err(Error::Domain("rota_sequence needs N >= 1".into()));
    }
    if !t.flags().is_markov() {
        return Err(Error::Domain("rota_sequence needs a Markov operator".into()));
    }
    let alg = t.algebra();
    alg.check_element(x)?;
    if let Some((_, ens)) = nested {
        if ens.len() < n_max {
            return Err(Error::Shape(format!(
                "need {n_max} nested expectations, got {}",
                ens.len()
            )));
        }
    }
    let d = alg.coord_dim();
    let m = t.matrix();
    let mh = m.adjoint();
    let mut fwd_op = CMat::identity(d, d);
    let mut bwd_op = CMat::identity(d, d);
    let mut forward = Vec::with_capacity(n_max);
    let mut backward = Vec::with_capacity(n_max);
    let mut increments = Vec::with_capacity(n_max);
    let mut residuals = nested.map(|_| Vec::with_capacity(n_max));
    let coords = alg.to_coords(x);
    let mut prev = x.clone();
    for n in 1..=n_max {
        fwd_op = m * &fwd_op * &mh;
        bwd_op = &mh * &bwd_op * m;
        let fx = alg.from_coords(&(&fwd_op * &coords));
        let bx = alg.from_coords(&(&bwd_op * &coords));
        increments.push(alg.linf_norm(&fx.sub(&prev)));
        prev = fx.clone();
        if let (Some((e, ens)), Some(res)) = (nested, residuals.as_mut()) {
            let expect = e.apply(&ens[n - 1].apply(x)?)?;
            res.push(bx.sub(&expect).max_abs());
        }
        forward.push(fx);
        backward.push(bx);
    }
    Ok(RotaSequence { forward, backward, increments, expectation_residuals: residuals })
}

impl AlgElement {
    pub(crate) fn from_blocks(blocks: Vec<CMat>) -> Self {
        AlgElement { blocks }
    }

    pub(crate) fn blocks_mut(&mut self) -> &mut Vec<CMat> {
        &mut self.blocks
    }
}
