//! Spherical averages of an alphabet action and their convergence.
//!
//! The engine realizes the sphere average `S_n = Σ_{|ω|=n} μ(ω) α_ω` two
//! ways: by brute-force enumeration of reduced words (the oracle, cost one
//! word-operator application per word) and through the direct-sum operator
//!
//! ```text
//! T(x)_j = Σ_i (p_i p_{ij} / p_j) α_j(x_i)
//! ```
//!
//! whose iterates satisfy `Tⁿ(x,…,x)_j = S_n^{(j)}(x)/p_j`, giving `S_n x`
//! in `Θ(n·|I|²)` channel applications. The direct sum `⊕_i M` is itself a
//! trace algebra with block weights `p_i w_b`, so `T` and the involution
//! `U(y)_j = α_j(y_{−j})` are ordinary channels on it and the even-radius
//! operator identities become matrix identities in its coordinate frame.

use crate::algebra::{conditional_expectation, fixed_point_subalgebra, AlgElement, TraceAlgebra};
use crate::channels::ChannelOperator;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use crate::orlicz::{self, OrliczFunction};
use crate::words::{sphere, AlphabetKind, LetterAction, SphereChain, SPHERE_GUARD};
use num_complex::Complex64;

/// An alphabet action together with a compatible chain: the home of the
/// direct-sum machinery.
#[derive(Debug, Clone)]
pub struct DirectSum {
    action: LetterAction,
    chain: SphereChain,
    amplified: TraceAlgebra,
    /// coefficient `c[j][i] = p_i p_{ij} / p_j`
    coeff: Vec<Vec<f64>>,
}

/// A tuple `(x_i)_{i ∈ I}` of elements over a common algebra.
#[derive(Debug, Clone)]
pub struct DirectSumElement {
    components: Vec<AlgElement>,
}

impl DirectSumElement {
    pub fn components(&self) -> &[AlgElement] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &AlgElement {
        &self.components[i]
    }

    pub fn sub(&self, other: &DirectSumElement) -> DirectSumElement {
        DirectSumElement {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }
}

impl DirectSum {
    pub fn new(action: LetterAction, chain: SphereChain) -> Result<Self> {
        if action.alphabet() != chain.alphabet() {
            return Err(Error::Shape("action and chain use different alphabets".into()));
        }
        let s = chain.alphabet().size();
        let base = action.algebra().clone();
        let mut blocks = Vec::with_capacity(s * base.blocks().len());
        for i in 0..s {
            let p = chain.weight_at(i);
            for &(n, w) in base.blocks() {
                blocks.push((n, p * w));
            }
        }
        let amplified = TraceAlgebra::new(blocks, base.is_normalized())?;
        let mut coeff = vec![vec![0.0; s]; s];
        for j in 0..s {
            for i in 0..s {
                coeff[j][i] = chain.weight_at(i) * chain.transition_at(i, j) / chain.weight_at(j);
            }
        }
        Ok(DirectSum { action, chain, amplified, coeff })
    }

    pub fn action(&self) -> &LetterAction {
        &self.action
    }

    pub fn chain(&self) -> &SphereChain {
        &self.chain
    }

    pub fn base_algebra(&self) -> &TraceAlgebra {
        self.action.algebra()
    }

    /// The direct sum `⊕_i M` as a trace algebra with weights `p_i · w_b`.
    pub fn amplified_algebra(&self) -> &TraceAlgebra {
        &self.amplified
    }

    pub fn tuple(&self, components: Vec<AlgElement>) -> Result<DirectSumElement> {
        if components.len() != self.chain.alphabet().size() {
            return Err(Error::Shape(format!(
                "tuple needs {} components",
                self.chain.alphabet().size()
            )));
        }
        for c in &components {
            self.base_algebra().check_element(c)?;
        }
        Ok(DirectSumElement { components })
    }

    /// The constant tuple `(x, …, x)`.
    pub fn constant_tuple(&self, x: &AlgElement) -> Result<DirectSumElement> {
        self.base_algebra().check_element(x)?;
        let s = self.chain.alphabet().size();
        Ok(DirectSumElement { components: vec![x.clone(); s] })
    }

    /// A tuple as one element of the amplified algebra.
    pub fn flatten(&self, tuple: &DirectSumElement) -> AlgElement {
        let mut blocks = Vec::new();
        for c in tuple.components() {
            blocks.extend(c.blocks().iter().cloned());
        }
        AlgElement::from_blocks(blocks)
    }

    /// Inverse of [`DirectSum::flatten`].
    pub fn unflatten(&self, x: &AlgElement) -> Result<DirectSumElement> {
        self.amplified.check_element(x)?;
        let nb = self.base_algebra().blocks().len();
        let comps =
            x.blocks().chunks(nb).map(|ch| AlgElement::from_blocks(ch.to_vec())).collect();
        self.tuple(comps)
    }

    /// Weighted norm `‖(x_i)‖_p = (Σ p_i ‖x_i‖_p^p)^{1/p}`; `p = ∞` takes the
    /// component maximum.
    pub fn weighted_p_norm(&self, x: &DirectSumElement, p: f64) -> Result<f64> {
        let base = self.base_algebra();
        if p.is_infinite() {
            let mut sup: f64 = 0.0;
            for c in &x.components {
                sup = sup.max(base.linf_norm(c));
            }
            return Ok(sup);
        }
        let mut acc = 0.0;
        for (i, c) in x.components.iter().enumerate() {
            acc += self.chain.weight_at(i) * base.lp_norm(c, p)?.powf(p);
        }
        Ok(acc.powf(1.0 / p))
    }

    /// One application of `T`, componentwise (the fast path used by the
    /// recursion): `y_j = α_j( Σ_i c_{ji} x_i )`.
    pub fn t_apply(&self, x: &DirectSumElement) -> DirectSumElement {
        let coords: Vec<CVec> =
            x.components.iter().map(|c| self.base_algebra().to_coords(c)).collect();
        let out = self.t_apply_coords(&coords);
        DirectSumElement {
            components: out.iter().map(|v| self.base_algebra().from_coords(v)).collect(),
        }
    }

    fn t_apply_coords(&self, coords: &[CVec]) -> Vec<CVec> {
        let s = coords.len();
        let dim = coords[0].len();
        let mut out = Vec::with_capacity(s);
        for j in 0..s {
            let mut mix = CVec::zeros(dim);
            for i in 0..s {
                let c = self.coeff[j][i];
                if c != 0.0 {
                    mix.axpy(Complex64::new(c, 0.0), &coords[i], Complex64::new(1.0, 0.0));
                }
            }
            out.push(self.action.op_at(j).matrix() * mix);
        }
        out
    }

    /// `T` as a channel on the amplified algebra.
    pub fn t_channel(&self) -> Result<ChannelOperator> {
        let base = self.base_algebra();
        let d = base.coord_dim();
        let s = self.chain.alphabet().size();
        let mut big = CMat::zeros(s * d, s * d);
        for j in 0..s {
            let aj = self.action.op_at(j).matrix();
            for i in 0..s {
                let scale = (self.chain.weight_at(i) / self.chain.weight_at(j)).sqrt()
                    * self.chain.transition_at(i, j);
                if scale != 0.0 {
                    big.view_mut((j * d, i * d), (d, d)).copy_from(&aj.map(|z| z * scale));
                }
            }
        }
        ChannelOperator::from_matrix(self.amplified.clone(), big)
    }

    /// The involution `U(y)_j = α_j(y_{−j})` on the amplified algebra, with
    /// its symmetry residuals `‖U²−1‖` and `‖UTU − T*‖` certified.
    pub fn involution_u(&self) -> Result<Involution> {
        let alphabet = self.chain.alphabet();
        if alphabet.kind() != AlphabetKind::Group {
            return Err(Error::Domain("the involution needs a group alphabet".into()));
        }
        let base = self.base_algebra();
        let d = base.coord_dim();
        let s = alphabet.size();
        let mut big = CMat::zeros(s * d, s * d);
        for j in 0..s {
            let letter = alphabet.letter_at(j);
            let minus = alphabet.index(-letter)?;
            let scale = (self.chain.weight_at(minus) / self.chain.weight_at(j)).sqrt();
            let aj = self.action.op_at(j).matrix();
            big.view_mut((j * d, minus * d), (d, d)).copy_from(&aj.map(|z| z * scale));
        }
        let u = ChannelOperator::from_matrix(self.amplified.clone(), big)?;
        let dim = s * d;
        let u_squared_residual =
            linalg::max_abs(&(u.matrix() * u.matrix() - CMat::identity(dim, dim)));
        if u_squared_residual > 1e-12 {
            return Err(Error::Numeric(format!(
                "U² deviates from the identity by {u_squared_residual:.3e}"
            )));
        }
        let t = self.t_channel()?;
        let conj = u.matrix() * t.matrix() * u.matrix();
        let conjugation_residual = linalg::max_abs(&(conj - t.matrix().adjoint()));
        if conjugation_residual > 1e-10 {
            return Err(Error::Numeric(format!(
                "UTU − T* has residual {conjugation_residual:.3e}"
            )));
        }
        Ok(Involution { channel: u, u_squared_residual, conjugation_residual })
    }

    /// Operator matrices of `x ↦ S_k x` on the base algebra for `k = 0..=n`,
    /// built from the partial-average recursion
    /// `S_{k+1}^{(j)} = Σ_i p_{ij} α_j S_k^{(i)}` with `S_0^{(j)} = p_j·id`.
    pub fn sphere_channels(&self, n: usize) -> Result<Vec<ChannelOperator>> {
        let base = self.base_algebra();
        let d = base.coord_dim();
        let s = self.chain.alphabet().size();
        let mut partial: Vec<CMat> =
            (0..s).map(|j| CMat::identity(d, d).map(|z| z * self.chain.weight_at(j))).collect();
        let mut out = Vec::with_capacity(n + 1);
        out.push(ChannelOperator::identity(base.clone()));
        for _ in 1..=n {
            let mut next = Vec::with_capacity(s);
            for j in 0..s {
                let mut mix = CMat::zeros(d, d);
                for i in 0..s {
                    let p_ij = self.chain.transition_at(i, j);
                    if p_ij != 0.0 {
                        mix += partial[i].map(|z| z * p_ij);
                    }
                }
                next.push(self.action.op_at(j).matrix() * mix);
            }
            partial = next;
            let mut sum = CMat::zeros(d, d);
            for v in &partial {
                sum += v;
            }
            out.push(ChannelOperator::from_matrix(base.clone(), sum)?);
        }
        Ok(out)
    }
}

/// The involution `U` with its certified symmetry residuals.
#[derive(Debug, Clone)]
pub struct Involution {
    pub channel: ChannelOperator,
    pub u_squared_residual: f64,
    pub conjugation_residual: f64,
}

fn guard_sphere(chain: &SphereChain, n: usize, guard: Option<u128>) -> Result<()> {
    let size = chain.alphabet().sphere_size(n);
    let limit = guard.unwrap_or(SPHERE_GUARD);
    if size > limit {
        return Err(Error::Resource(format!(
            "sphere of radius {n} has {size} words, over the guard limit {limit}"
        )));
    }
    Ok(())
}

/// `S_n x` by exact enumeration of the sphere; the oracle for every
/// recursion check. Cost: one word-operator application per reduced word.
pub fn spherical_avg_bruteforce(
    action: &LetterAction,
    chain: &SphereChain,
    n: usize,
    x: &AlgElement,
    guard: Option<u128>,
) -> Result<AlgElement> {
    action.algebra().check_element(x)?;
    if n == 0 {
        return Ok(x.clone());
    }
    guard_sphere(chain, n, guard)?;
    let mut acc = action.algebra().zero();
    for w in sphere(chain.alphabet(), n) {
        let mu = chain.markov_measure(&w)?;
        if mu != 0.0 {
            acc = acc.add(&action.apply_word(&w, x)?.scale_re(mu));
        }
    }
    Ok(acc)
}

/// `S_n^{(i)} x`: the brute-force sum restricted to words ending in `i`.
pub fn partial_spherical(
    action: &LetterAction,
    chain: &SphereChain,
    n: usize,
    letter: i32,
    x: &AlgElement,
    guard: Option<u128>,
) -> Result<AlgElement> {
    if n == 0 {
        return Err(Error::Domain("partial spherical averages need n >= 1".into()));
    }
    guard_sphere(chain, n, guard)?;
    if !chain.alphabet().contains(letter) {
        return Err(Error::Domain(format!("letter {letter} outside the alphabet")));
    }
    let mut acc = action.algebra().zero();
    for w in sphere(chain.alphabet(), n) {
        if *w.letters().last().expect("n >= 1") != letter {
            continue;
        }
        let mu = chain.markov_measure(&w)?;
        if mu != 0.0 {
            acc = acc.add(&action.apply_word(&w, x)?.scale_re(mu));
        }
    }
    Ok(acc)
}

/// All partial sums `S_n^{(i)} x` in one sphere enumeration, indexed in
/// alphabet order.
pub fn partial_spherical_sums(
    action: &LetterAction,
    chain: &SphereChain,
    n: usize,
    x: &AlgElement,
    guard: Option<u128>,
) -> Result<Vec<AlgElement>> {
    if n == 0 {
        return Err(Error::Domain("partial spherical averages need n >= 1".into()));
    }
    guard_sphere(chain, n, guard)?;
    let alphabet = chain.alphabet();
    let mut acc = vec![action.algebra().zero(); alphabet.size()];
    for w in sphere(alphabet, n) {
        let mu = chain.markov_measure(&w)?;
        if mu != 0.0 {
            let idx = alphabet.index(*w.letters().last().expect("n >= 1"))?;
            acc[idx] = acc[idx].add(&action.apply_word(&w, x)?.scale_re(mu));
        }
    }
    Ok(acc)
}

/// `S_n x` through the direct-sum recursion: `Θ(n·|I|²)` channel
/// applications instead of a sphere enumeration.
pub fn spherical_avg_recursive(ds: &DirectSum, n: usize, x: &AlgElement) -> Result<AlgElement> {
    let base = ds.base_algebra();
    base.check_element(x)?;
    if n == 0 {
        return Ok(x.clone());
    }
    let s = ds.chain().alphabet().size();
    let mut coords: Vec<CVec> = vec![base.to_coords(x); s];
    for _ in 0..n {
        coords = ds.t_apply_coords(&coords);
    }
    Ok(base.from_coords(&weighted_component_sum(ds, &coords)))
}

fn weighted_component_sum(ds: &DirectSum, coords: &[CVec]) -> CVec {
    let dim = coords[0].len();
    let mut sum = CVec::zeros(dim);
    for (i, v) in coords.iter().enumerate() {
        sum.axpy(Complex64::new(ds.chain().weight_at(i), 0.0), v, Complex64::new(1.0, 0.0));
    }
    sum
}

/// The Cesàro average `A_n x = (1/n) Σ_{k=0}^{n−1} S_k x` together with its
/// componentwise parts `A_n^{(i)} x` (which sum back to `A_n x`).
#[derive(Debug, Clone)]
pub struct CesaroAverage {
    pub average: AlgElement,
    pub components: Vec<AlgElement>,
}

pub fn cesaro_average(ds: &DirectSum, n: usize, x: &AlgElement) -> Result<CesaroAverage> {
    if n == 0 {
        return Err(Error::Domain("Cesàro averages need n >= 1".into()));
    }
    let base = ds.base_algebra();
    base.check_element(x)?;
    let s = ds.chain().alphabet().size();
    let x_coords = base.to_coords(x);
    let mut coords: Vec<CVec> = vec![x_coords.clone(); s];
    // k = 0 term with the convention S_0^{(i)} = p_i · id
    let mut comp_acc: Vec<CVec> =
        (0..s).map(|i| x_coords.map(|z| z * ds.chain().weight_at(i))).collect();
    for _ in 1..n {
        coords = ds.t_apply_coords(&coords);
        for (i, acc) in comp_acc.iter_mut().enumerate() {
            let w = Complex64::new(ds.chain().weight_at(i), 0.0);
            acc.axpy(w, &coords[i], Complex64::new(1.0, 0.0));
        }
    }
    let scale = 1.0 / n as f64;
    let components: Vec<AlgElement> =
        comp_acc.iter().map(|v| base.from_coords(&v.map(|z| z * scale))).collect();
    let mut average = base.zero();
    for c in &components {
        average = average.add(c);
    }
    Ok(CesaroAverage { average, components })
}

/// One row of the even-radius relation check.
#[derive(Debug, Clone)]
pub struct RelationRow {
    pub n: usize,
    /// `‖(T*)ⁿTⁿ − [(2m−2)/(2m−1)·U T^{2n−1} + 1/(2m−1)·(T*)^{n−1}T^{n−1}]‖`
    pub residual_first: f64,
    /// residual of the companion identity with a `+` between the U-terms
    pub residual_second_plus: f64,
    /// residual of the companion identity with a `−` between the U-terms
    pub residual_second_minus: f64,
}

/// Report of the even-radius operator identities, compared as coordinate
/// matrices on the amplified algebra.
#[derive(Debug, Clone)]
pub struct RelationReport {
    pub rows: Vec<RelationRow>,
    pub max_residual_first: f64,
    /// which sign convention in the companion identity vanishes, if either
    pub vanishing_sign: Option<char>,
}

pub fn check_relation_even(ds: &DirectSum, n_max: usize) -> Result<RelationReport> {
    let m = ds.chain().alphabet().generators();
    if ds.chain().alphabet().kind() != AlphabetKind::Group {
        return Err(Error::Domain("the relation check needs a group alphabet".into()));
    }
    if m < 2 {
        return Err(Error::Domain(
            "the relation coefficients need 2m−2 > 0; the single-generator chain is degenerate"
                .into(),
        ));
    }
    let t = ds.t_channel()?;
    let u = ds.involution_u()?.channel;
    let b = t.matrix().clone();
    let um = u.matrix();
    let dim = b.nrows();
    let c1 = (2 * m - 2) as f64 / (2 * m - 1) as f64;
    let c2 = 1.0 / (2 * m - 1) as f64;
    let d1 = (2 * m - 1) as f64 / (2 * m - 2) as f64;
    let d2 = 1.0 / (2 * m - 2) as f64;

    let mut rows = Vec::with_capacity(n_max);
    let mut alt_prev = CMat::identity(dim, dim); // (T*)^{n−1} T^{n−1}
    let mut fwd = CMat::identity(dim, dim); // T^n
    let mut max_first: f64 = 0.0;
    let mut max_plus: f64 = 0.0;
    let mut max_minus: f64 = 0.0;
    for n in 1..=n_max {
        fwd = &fwd * &b;
        let alt = fwd.adjoint() * &fwd; // (T*)^n T^n
        let mut odd = CMat::identity(dim, dim); // T^{2n−1}
        for _ in 0..(2 * n - 1) {
            odd = &odd * &b;
        }
        let residual_first =
            linalg::max_abs(&(&alt - (um * &odd).map(|z| z * c1) - alt_prev.map(|z| z * c2)));
        let u_alt = um * &alt;
        let u_prev = um * &alt_prev;
        let residual_second_plus =
            linalg::max_abs(&(&odd - u_alt.map(|z| z * d1) - u_prev.map(|z| z * d2)));
        let residual_second_minus =
            linalg::max_abs(&(&odd - u_alt.map(|z| z * d1) + u_prev.map(|z| z * d2)));
        max_first = max_first.max(residual_first);
        max_plus = max_plus.max(residual_second_plus);
        max_minus = max_minus.max(residual_second_minus);
        rows.push(RelationRow { n, residual_first, residual_second_plus, residual_second_minus });
        alt_prev = alt;
    }
    let vanishing_sign = if max_minus <= 1e-9 {
        Some('-')
    } else if max_plus <= 1e-9 {
        Some('+')
    } else {
        None
    };
    Ok(RelationReport { rows, max_residual_first: max_first, vanishing_sign })
}

/// Residuals of the sphere-composition identities at the operator level.
#[derive(Debug, Clone)]
pub struct SphereIdentityReport {
    /// `(n, residual)` for
    /// `S₁²S_{2n} = ((2m−1)/2m)² S_{2n+2} + (2m−1)/(2m²) S_{2n} + 1/(4m²) S_{2n−2}`
    pub squared_rows: Vec<(usize, f64)>,
    /// `(n, residual)` for `S₁Sₙ = λS_{n+1} + (1−λ)S_{n−1}`, `λ = (2m−1)/2m`
    pub one_step_rows: Vec<(usize, f64)>,
    pub max_squared: f64,
    pub max_one_step: f64,
}

/// Verifies the `S₁²`-composition identity for `n = 1..=n_max` and the
/// one-step recursion for `n = 2..=one_step_max`, comparing coordinate
/// matrices of the sphere averages.
pub fn check_sphere_identities(
    ds: &DirectSum,
    n_max: usize,
    one_step_max: usize,
) -> Result<SphereIdentityReport> {
    if ds.chain().alphabet().kind() != AlphabetKind::Group {
        return Err(Error::Domain("sphere identities need the free-group chain".into()));
    }
    let m = ds.chain().alphabet().generators() as f64;
    let horizon = (2 * n_max + 2).max(one_step_max + 1);
    let spheres = ds.sphere_channels(horizon)?;
    let s1 = spheres[1].matrix();
    let lambda = (2.0 * m - 1.0) / (2.0 * m);
    let a = lambda * lambda;
    let b = (2.0 * m - 1.0) / (2.0 * m * m);
    let c = 1.0 / (4.0 * m * m);

    let mut squared_rows = Vec::with_capacity(n_max);
    let mut max_squared: f64 = 0.0;
    for n in 1..=n_max {
        let lhs = s1 * s1 * spheres[2 * n].matrix();
        let rhs = spheres[2 * n + 2].matrix().map(|z| z * a)
            + spheres[2 * n].matrix().map(|z| z * b)
            + spheres[2 * n - 2].matrix().map(|z| z * c);
        let r = linalg::max_abs(&(lhs - rhs));
        max_squared = max_squared.max(r);
        squared_rows.push((n, r));
    }

    let mut one_step_rows = Vec::new();
    let mut max_one_step: f64 = 0.0;
    for n in 2..=one_step_max {
        let lhs = s1 * spheres[n].matrix();
        let rhs = spheres[n + 1].matrix().map(|z| z * lambda)
            + spheres[n - 1].matrix().map(|z| z * (1.0 - lambda));
        let r = linalg::max_abs(&(lhs - rhs));
        max_one_step = max_one_step.max(r);
        one_step_rows.push((n, r));
    }
    Ok(SphereIdentityReport { squared_rows, one_step_rows, max_squared, max_one_step })
}

/// The conditional expectation onto the joint fixed-point algebra of all
/// two-letter products `α_g ∘ α_h` — a generating set for the image of the
/// even subgroup. Invariance `E∘(α_g α_h) = E` is certified.
pub fn even_fixed_expectation(action: &LetterAction) -> Result<ChannelOperator> {
    if action.alphabet().kind() != AlphabetKind::Group {
        return Err(Error::Domain("the even-subgroup expectation needs a group action".into()));
    }
    let algebra = action.algebra().clone();
    let letters = action.alphabet().letters();
    let mut pairs = Vec::with_capacity(letters.len() * letters.len());
    for &g in &letters {
        for &h in &letters {
            // the word gh acts by α_h ∘ α_g
            pairs.push(action.op(h)?.compose(action.op(g)?)?);
        }
    }
    let fixed = fixed_point_subalgebra(&pairs, &algebra)?;
    let e2 = conditional_expectation(&fixed)?;
    for pair in &pairs {
        let residual = linalg::max_abs(&(e2.matrix() * pair.matrix() - e2.matrix()));
        if residual > 1e-9 {
            return Err(Error::Numeric(format!(
                "the expectation is not invariant under a generator pair (residual {residual:.3e})"
            )));
        }
    }
    Ok(e2)
}

/// A finite certificate in the style of bilateral almost-uniform
/// convergence: a projection `e` with `τ(1−e) ≤ ε` and the achieved
/// `sup_n ‖e(x_n − x)e‖_∞`.
#[derive(Debug, Clone)]
pub struct BauCertificate {
    pub projection: AlgElement,
    pub trace_defect: f64,
    pub sup_residual: f64,
    /// true when `e = 1` already meets the target
    pub full_projection: bool,
}

/// Greedy certificate search: if the uniform norm already meets `target`,
/// return `e = 1`; otherwise remove top spectral directions of
/// `Σ_n 2^{−n} |x_n − x|²` while the trace defect stays within `ε`, keeping
/// the candidate that minimizes the sup residual.
pub fn bau_certificate(
    alg: &TraceAlgebra,
    sequence: &[AlgElement],
    limit: &AlgElement,
    epsilon: f64,
    target: f64,
) -> Result<BauCertificate> {
    if !(epsilon >= 0.0) {
        return Err(Error::Domain("ε must be nonnegative".into()));
    }
    alg.check_element(limit)?;
    let diffs: Vec<AlgElement> = sequence.iter().map(|x| x.sub(limit)).collect();
    let sup_plain = diffs.iter().map(|d| alg.linf_norm(d)).fold(0.0, f64::max);
    if sup_plain <= target {
        return Ok(BauCertificate {
            projection: alg.unit(),
            trace_defect: 0.0,
            sup_residual: sup_plain,
            full_projection: true,
        });
    }
    // weighted square sum of deviations
    let mut h = alg.zero();
    let mut w = 1.0;
    for d in &diffs {
        w *= 0.5;
        h = h.add(&d.adjoint().mul(d).scale_re(w));
    }
    // per-block eigenpairs, descending
    let mut dirs: Vec<(f64, usize, CVec)> = Vec::new();
    for (b, m) in h.blocks().iter().enumerate() {
        let (vals, vecs) = linalg::hermitian_eigen(m);
        for (k, &v) in vals.iter().enumerate() {
            dirs.push((v, b, vecs.column(k).into_owned()));
        }
    }
    dirs.sort_by(|a, b| b.0.total_cmp(&a.0));

    let sup_for = |e: &AlgElement| -> f64 {
        diffs.iter().map(|d| alg.linf_norm(&e.mul(d).mul(e))).fold(0.0, f64::max)
    };
    let mut best = BauCertificate {
        projection: alg.unit(),
        trace_defect: 0.0,
        sup_residual: sup_plain,
        full_projection: false,
    };
    let mut removed = alg.zero();
    let mut defect = 0.0;
    for (_, b, v) in dirs {
        defect += alg.blocks()[b].1;
        if defect > epsilon + 1e-15 {
            break;
        }
        let mut rank_one = alg.zero();
        let outer = &v * v.adjoint();
        rank_one.blocks_mut()[b] += outer;
        removed = removed.add(&rank_one);
        let e = alg.unit().sub(&removed);
        let sup = sup_for(&e);
        if sup < best.sup_residual - 1e-15 {
            best = BauCertificate {
                projection: e,
                trace_defect: defect,
                sup_residual: sup,
                full_projection: false,
            };
        }
    }
    Ok(best)
}

/// One row of a convergence table: errors against the limit in several norms.
#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub n: usize,
    pub err_inf: f64,
    pub err_l2: f64,
    pub err_orlicz: Vec<f64>,
}

/// Convergence table with a target threshold and an optional finite
/// certificate. Serializes to CSV with 17 significant digits.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub orlicz_names: Vec<String>,
    pub rows: Vec<ConvergenceRow>,
    pub target: f64,
    /// first row index `n` with `err_l2 ≤ target`
    pub first_n_below: Option<usize>,
    /// whether the error stays at or below the target from that row on
    pub eventually_below: bool,
    pub certificate: Option<BauCertificate>,
}

impl ConvergenceReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,err_inf,err_l2");
        for name in &self.orlicz_names {
            out.push_str(&format!(",err_{name}"));
        }
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!("{},{},{}", r.n, fmt_float(r.err_inf), fmt_float(r.err_l2)));
            for v in &r.err_orlicz {
                out.push_str(&format!(",{}", fmt_float(*v)));
            }
            out.push('\n');
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        match self.first_n_below {
            Some(n) => s.push_str(&format!(
                "l2 error first reaches the target {:.1e} at n = {n}{}\n",
                self.target,
                if self.eventually_below { " and stays below it" } else { "" }
            )),
            None => s.push_str(&format!(
                "l2 error never reaches the target {:.1e} within the horizon\n",
                self.target
            )),
        }
        if let Some(c) = &self.certificate {
            s.push_str(&format!(
                "certificate: τ(1−e) = {:.3e}, sup residual {:.3e}{}\n",
                c.trace_defect,
                c.sup_residual,
                if c.full_projection { " (e = 1)" } else { "" }
            ));
        }
        s
    }
}

/// Formats a float with 17 significant digits (round-trip exact for f64).
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Tabulates `‖S_{2k} x − E⁽²⁾x‖` for `k = 1..=n_pairs` in the uniform, `L²`
/// and configured Orlicz norms, using the recursive engine, and attaches a
/// finite certificate (with `e = 1` whenever uniform convergence already
/// meets the target).
pub fn converge_even_spheres(
    ds: &DirectSum,
    e2: &ChannelOperator,
    x: &AlgElement,
    n_pairs: usize,
    phis: &[OrliczFunction],
    target: f64,
    epsilon: f64,
) -> Result<ConvergenceReport> {
    let base = ds.base_algebra();
    base.check_element(x)?;
    let limit = e2.apply(x)?;
    let s = ds.chain().alphabet().size();
    let mut coords: Vec<CVec> = vec![base.to_coords(x); s];
    let mut rows = Vec::with_capacity(n_pairs);
    let mut evens = Vec::with_capacity(n_pairs);
    for k in 1..=n_pairs {
        coords = ds.t_apply_coords(&coords);
        coords = ds.t_apply_coords(&coords);
        let s2k = base.from_coords(&weighted_component_sum(ds, &coords));
        let diff = s2k.sub(&limit);
        let err_orlicz = phis
            .iter()
            .map(|phi| orlicz::orlicz_norm(base, &diff, phi))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(ConvergenceRow {
            n: 2 * k,
            err_inf: base.linf_norm(&diff),
            err_l2: base.l2_norm(&diff),
            err_orlicz,
        });
        evens.push(s2k);
    }
    let first_n_below = rows.iter().find(|r| r.err_l2 <= target).map(|r| r.n);
    let eventually_below = match first_n_below {
        Some(n) => rows.iter().filter(|r| r.n >= n).all(|r| r.err_l2 <= target),
        None => false,
    };
    let certificate = Some(bau_certificate(base, &evens, &limit, epsilon, target)?);
    Ok(ConvergenceReport {
        orlicz_names: phis.iter().map(|p| p.name().to_string()).collect(),
        rows,
        target,
        first_n_below,
        eventually_below,
        certificate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::Word;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// The worked 2-point scenario: α₁ = swap, α₂ = id on two atoms.
    fn swap_scenario() -> DirectSum {
        let alg = TraceAlgebra::diagonal(2).unwrap();
        let swap = ChannelOperator::permutation(&alg, &[1, 0]).unwrap();
        let id = ChannelOperator::identity(alg.clone());
        let action = LetterAction::group_from_automorphisms(alg, vec![swap, id]).unwrap();
        let chain = SphereChain::free_group(2).unwrap();
        DirectSum::new(action, chain).unwrap()
    }

    /// m = 2 permutation scenario on 8 points with a transitive even action.
    fn eight_point_scenario() -> DirectSum {
        let alg = TraceAlgebra::diagonal(8).unwrap();
        let cycle = ChannelOperator::permutation(&alg, &[1, 2, 3, 4, 5, 6, 7, 0]).unwrap();
        let transp = ChannelOperator::permutation(&alg, &[1, 0, 2, 3, 4, 5, 6, 7]).unwrap();
        let action = LetterAction::group_from_automorphisms(alg, vec![cycle, transp]).unwrap();
        let chain = SphereChain::free_group(2).unwrap();
        DirectSum::new(action, chain).unwrap()
    }

    #[test]
    fn brute_force_basics() {
        let ds = swap_scenario();
        let alg = ds.base_algebra().clone();
        let x = alg.diagonal_element(&[1.0, 0.0]).unwrap();
        // n = 0 returns x
        let s0 = spherical_avg_bruteforce(ds.action(), ds.chain(), 0, &x, None).unwrap();
        assert!(s0.sub(&x).max_abs() < 1e-15);
        // four single-letter words of weight 1/4: (x + swap x + swap x + x)/4
        let s1 = spherical_avg_bruteforce(ds.action(), ds.chain(), 1, &x, None).unwrap();
        assert!(s1.sub(&alg.diagonal_element(&[0.5, 0.5]).unwrap()).max_abs() < 1e-14);
    }

    #[test]
    fn brute_force_identity_action() {
        let alg = TraceAlgebra::diagonal(3).unwrap();
        let id1 = ChannelOperator::identity(alg.clone());
        let id2 = ChannelOperator::identity(alg.clone());
        let action = LetterAction::group_from_automorphisms(alg.clone(), vec![id1, id2]).unwrap();
        let chain = SphereChain::free_group(2).unwrap();
        let x = alg.diagonal_element(&[1.0, -2.0, 0.5]).unwrap();
        for n in 0..=4 {
            let s = spherical_avg_bruteforce(&action, &chain, n, &x, None).unwrap();
            assert!(s.sub(&x).max_abs() < 1e-13);
        }
    }

    #[test]
    fn brute_force_guard() {
        let ds = eight_point_scenario();
        let x = ds.base_algebra().unit();
        let err = spherical_avg_bruteforce(ds.action(), ds.chain(), 20, &x, Some(1000));
        assert!(matches!(err, Err(Error::Resource(_))));
    }

    #[test]
    fn partial_sums_to_total() {
        let ds = eight_point_scenario();
        let alg = ds.base_algebra().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let x = alg.random_self_adjoint(&mut rng);
        for n in 1..=3 {
            let total = spherical_avg_bruteforce(ds.action(), ds.chain(), n, &x, None).unwrap();
            let mut acc = alg.zero();
            for &i in &ds.chain().alphabet().letters() {
                acc =
                    acc.add(&partial_spherical(ds.action(), ds.chain(), n, i, &x, None).unwrap());
            }
            assert!(acc.sub(&total).max_abs() < 1e-12);
        }
        // n = 1: S₁^{(i)} = μ(i)·α_i
        let p1 = partial_spherical(ds.action(), ds.chain(), 1, 1, &x, None).unwrap();
        let expect = ds.action().op(1).unwrap().apply(&x).unwrap().scale_re(0.25);
        assert!(p1.sub(&expect).max_abs() < 1e-13);
    }

    #[test]
    fn partial_restriction_counts_words() {
        // m=2, n=2, i=2: three words (j,2) with j ≠ −2, each of measure 1/12
        let ds = swap_scenario();
        let alg = ds.base_algebra().clone();
        let x = alg.diagonal_element(&[1.0, -1.0]).unwrap();
        let p = partial_spherical(ds.action(), ds.chain(), 2, 2, &x, None).unwrap();
        let mut acc = alg.zero();
        for j in [-1i32, 1, 2] {
            let w = Word::new(ds.chain().alphabet(), vec![j, 2]).unwrap();
            acc = acc.add(&ds.action().apply_word(&w, &x).unwrap().scale_re(1.0 / 12.0));
        }
        assert!(p.sub(&acc).max_abs() < 1e-14);
    }

    #[test]
    fn direct_sum_fixed_point_and_formula() {
        // all α = id: constant tuples are fixed by stationarity
        let alg = TraceAlgebra::diagonal(2).unwrap();
        let action = LetterAction::group_from_automorphisms(
            alg.clone(),
            vec![ChannelOperator::identity(alg.clone()), ChannelOperator::identity(alg.clone())],
        )
        .unwrap();
        let chain = SphereChain::free_group(2).unwrap();
        let ds = DirectSum::new(action, chain).unwrap();
        let c = alg.unit().scale_re(0.7);
        let tup = ds.constant_tuple(&c).unwrap();
        let out = ds.t_apply(&tup);
        for comp in out.components() {
            assert!(comp.sub(&c).max_abs() < 1e-14);
        }

        // m=2 free chain: y_j = (1/3) Σ_{i ≠ −j} α_j(x_i)
        let ds = swap_scenario();
        let alg = ds.base_algebra().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        let comps: Vec<AlgElement> = (0..4).map(|_| alg.random_self_adjoint(&mut rng)).collect();
        let tup = ds.tuple(comps.clone()).unwrap();
        let out = ds.t_apply(&tup);
        // j = 1 sits at index 2; allowed i are −2, 1, 2 (indices 0, 2, 3)
        let a1 = ds.action().op(1).unwrap();
        let expect =
            a1.apply(&comps[0].add(&comps[2]).add(&comps[3]).scale_re(1.0 / 3.0)).unwrap();
        assert!(out.component(2).sub(&expect).max_abs() < 1e-13);
    }

    #[test]
    fn direct_sum_contraction_sweep() {
        let ds = eight_point_scenario();
        let alg = ds.base_algebra().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..500 {
            let comps: Vec<AlgElement> = (0..4).map(|_| alg.random_element(&mut rng)).collect();
            let tup = ds.tuple(comps).unwrap();
            let out = ds.t_apply(&tup);
            let before = ds.weighted_p_norm(&tup, 2.0).unwrap();
            let after = ds.weighted_p_norm(&out, 2.0).unwrap();
            assert!(after <= before + 1e-10, "{after} > {before}");
        }
    }

    #[test]
    fn recursive_matches_brute_force() {
        let ds = eight_point_scenario();
        let alg = ds.base_algebra().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(54);
        let x = alg.random_self_adjoint(&mut rng);
        for n in 0..=6 {
            let fast = spherical_avg_recursive(&ds, n, &x).unwrap();
            let slow = spherical_avg_bruteforce(ds.action(), ds.chain(), n, &x, None).unwrap();
            assert!(fast.sub(&slow).max_abs() < 1e-10, "n = {n}");
        }
    }

    #[test]
    fn diagonal_identity_components() {
        // Tⁿ(x,…,x)_j = S_n^{(j)} x / p_j against the brute-force partials
        let ds = swap_scenario();
        let alg = ds.base_algebra().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        let x = alg.random_self_adjoint(&mut rng);
        let mut tup = ds.constant_tuple(&x).unwrap();
        for n in 1..=5 {
            tup = ds.t_apply(&tup);
            for (idx, &i) in ds.chain().alphabet().letters().iter().enumerate() {
                let partial = partial_spherical(ds.action(), ds.chain(), n, i, &x, None).unwrap();
                let scaled = partial.scale_re(1.0 / ds.chain().weight_at(idx));
                assert!(tup.component(idx).sub(&scaled).max_abs() < 1e-10, "n={n} i={i}");
            }
        }
    }

    #[test]
    fn cesaro_basics() {
        let ds = swap_scenario();
        let alg = ds.base_algebra().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(56);
        let x = alg.random_self_adjoint(&mut rng);
        // n = 1 → x
        let a1 = cesaro_average(&ds, 1, &x).unwrap();
        assert!(a1.average.sub(&x).max_abs() < 1e-14);
        // A₂ = (x + S₁x)/2
        let a2 = cesaro_average(&ds, 2, &x).unwrap();
        let s1 = spherical_avg_bruteforce(ds.action(), ds.chain(), 1, &x, None).unwrap();
        assert!(a2.average.sub(&x.add(&s1).scale_re(0.5)).max_abs() < 1e-13);
        // components partition the average
        let mut acc = alg.zero();
        for c in &a2.components {
            acc = acc.add(c);
        }
        assert!(acc.sub(&a2.average).max_abs() < 1e-12);
    }

    #[test]
    fn involution_symmetries() {
        for ds in [swap_scenario(), eight_point_scenario()] {
            let inv = ds.involution_u().unwrap();
            assert!(inv.u_squared_residual <= 1e-14);
            assert!(inv.conjugation_residual <= 1e-12);
            // U is a trace-preserving isometry of the weighted L²-norm
            let f = inv.channel.flags();
            assert!(f.unital && f.trace_preserving);
            assert!((f.l2_operator_norm - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn involution_flip_for_identity_action() {
        let alg = TraceAlgebra::diagonal(2).unwrap();
        let action = LetterAction::group_from_automorphisms(
            alg.clone(),
            vec![ChannelOperator::identity(alg.clone()), ChannelOperator::identity(alg.clone())],
        )
        .unwrap();
        let chain = SphereChain::free_group(2).unwrap();
        let ds = DirectSum::new(action, chain).unwrap();
        let inv = ds.involution_u().unwrap();
        // U flips component j ↔ −j
        let comps: Vec<AlgElement> = (0..4).map(|k| alg.unit().scale_re(k as f64)).collect();
        let tup = ds.tuple(comps).unwrap();
        let big = ds.flatten(&tup);
        let out = inv.channel.apply(&big).unwrap();
        let got = ds.unflatten(&out).unwrap();
        for (idx, &i) in ds.chain().alphabet().letters().iter().enumerate() {
            let minus = ds.chain().alphabet().index(-i).unwrap();
            assert!(got.component(idx).sub(tup.component(minus)).max_abs() < 1e-13);
        }
    }

    #[test]
    fn relation_even_identities() {
        let ds = eight_point_scenario();
        let rep = check_relation_even(&ds, 5).unwrap();
        assert!(rep.max_residual_first <= 1e-9, "{rep:?}");
        assert_eq!(rep.vanishing_sign, Some('-'));

        // m = 1 is rejected
        let alg = TraceAlgebra::diagonal(2).unwrap();
        let action = LetterAction::group_from_automorphisms(
            alg.clone(),
            vec![ChannelOperator::permutation(&alg, &[1, 0]).unwrap()],
        )
        .unwrap();
        let chain = SphereChain::free_group(1).unwrap();
        let ds1 = DirectSum::new(action, chain).unwrap();
        assert!(matches!(check_relation_even(&ds1, 2), Err(Error::Domain(_))));
    }

    #[test]
    fn relation_identity_scalar_check() {
        // trivial action: identities reduce to stochastic-matrix identities
        let alg = TraceAlgebra::diagonal(2).unwrap();
        let action = LetterAction::group_from_automorphisms(
            alg.clone(),
            vec![ChannelOperator::identity(alg.clone()), ChannelOperator::identity(alg.clone())],
        )
        .unwrap();
        let chain = SphereChain::free_group(2).unwrap();
        let ds = DirectSum::new(action, chain).unwrap();
        let rep = check_relation_even(&ds, 4).unwrap();
        assert!(rep.max_residual_first <= 1e-12);
    }

    #[test]
    fn sphere_identity_checks() {
        let ds = eight_point_scenario();
        let rep = check_sphere_identities(&ds, 4, 8).unwrap();
        assert!(rep.max_squared <= 1e-9, "{rep:?}");
        assert!(rep.max_one_step <= 1e-9, "{rep:?}");

        // sphere channels match the brute force as operators on a sample
        let alg = ds.base_algebra().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(57);
        let x = alg.random_self_adjoint(&mut rng);
        let spheres = ds.sphere_channels(4).unwrap();
        for n in 0..=4 {
            let via_op = spheres[n].apply(&x).unwrap();
            let brute = spherical_avg_bruteforce(ds.action(), ds.chain(), n, &x, None).unwrap();
            assert!(via_op.sub(&brute).max_abs() < 1e-11, "n={n}");
        }
    }

    #[test]
    fn rota_sequence_matches_relation_right_side() {
        // the alternating products of the direct-sum channel satisfy the
        // even-radius relation elementwise
        let ds = eight_point_scenario();
        let t = ds.t_channel().unwrap();
        let u = ds.involution_u().unwrap().channel;
        let amplified = ds.amplified_algebra().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        let x = amplified.random_self_adjoint(&mut rng);
        let seq = crate::channels::rota_sequence(&t, &x, 4, None).unwrap();
        let m = 2usize;
        let c1 = (2 * m - 2) as f64 / (2 * m - 1) as f64;
        let c2 = 1.0 / (2 * m - 1) as f64;
        let mut prev = x.clone(); // (T*)⁰T⁰ x
        for (k, bx) in seq.backward.iter().enumerate() {
            let n = k + 1;
            let odd = t.power(2 * n - 1).apply(&x).unwrap();
            let rhs = u.apply(&odd).unwrap().scale_re(c1).add(&prev.scale_re(c2));
            assert!(bx.sub(&rhs).max_abs() < 1e-12, "n = {n}");
            prev = bx.clone();
        }
    }

    #[test]
    fn convergence_answers_swap_scenario_question() {
        // α₁ = swap, α₂ = id with x = diag(1,0): S₂x = (2/3)·swap(x) + (1/3)·x
        // is not yet the limit; the report records where the error passes 1e-6
        let ds = swap_scenario();
        let alg = ds.base_algebra().clone();
        let e2 = even_fixed_expectation(ds.action()).unwrap();
        let x = alg.diagonal_element(&[1.0, 0.0]).unwrap();
        let s2 = spherical_avg_recursive(&ds, 2, &x).unwrap();
        let expect = alg.diagonal_element(&[1.0 / 3.0, 2.0 / 3.0]).unwrap();
        assert!(s2.sub(&expect).max_abs() < 1e-13);
        assert!(s2.sub(&e2.apply(&x).unwrap()).max_abs() > 0.1, "not converged at n = 2");
        let rep = converge_even_spheres(&ds, &e2, &x, 30, &[], 1e-6, 0.05).unwrap();
        let n_star = rep.first_n_below.expect("reaches the target");
        assert!(n_star > 2 && rep.eventually_below, "{}", rep.summary());
    }

    #[test]
    fn sphere_identity_coefficients_sum_to_one() {
        let m = 2.0f64;
        let a = ((2.0 * m - 1.0) / (2.0 * m)).powi(2);
        let b = (2.0 * m - 1.0) / (2.0 * m * m);
        let c = 1.0 / (4.0 * m * m);
        assert!((a + b + c - 1.0).abs() < 1e-15);
    }

    #[test]
    fn even_expectation_examples() {
        // α₁ = α₂ = swap: every two-letter product is the identity → E⁽²⁾ = id
        let alg = TraceAlgebra::diagonal(2).unwrap();
        let swap = ChannelOperator::permutation(&alg, &[1, 0]).unwrap();
        let action =
            LetterAction::group_from_automorphisms(alg.clone(), vec![swap.clone(), swap.clone()])
                .unwrap();
        let e2 = even_fixed_expectation(&action).unwrap();
        assert!(linalg::max_abs(&(e2.matrix() - CMat::identity(2, 2))) < 1e-10);

        // α₁ = swap, α₂ = id: the even subgroup contains the swap → E⁽²⁾ = τ(·)1
        let action2 = LetterAction::group_from_automorphisms(
            alg.clone(),
            vec![swap, ChannelOperator::identity(alg.clone())],
        )
        .unwrap();
        let e2 = even_fixed_expectation(&action2).unwrap();
        let expect = ChannelOperator::trace_replacement(&alg).unwrap();
        assert!(linalg::max_abs(&(e2.matrix() - expect.matrix())) < 1e-10);
        let f = e2.flags();
        assert!(f.unital && f.trace_preserving && f.completely_positive);
    }

    #[test]
    fn convergence_invariant_input() {
        let ds = eight_point_scenario();
        let e2 = even_fixed_expectation(ds.action()).unwrap();
        // x in the fixed algebra: all errors at machine zero
        let x = ds.base_algebra().unit().scale_re(0.3);
        let rep = converge_even_spheres(&ds, &e2, &x, 6, &[], 1e-6, 0.05).unwrap();
        for row in &rep.rows {
            assert!(row.err_inf < 1e-10 && row.err_l2 < 1e-10);
        }
        assert_eq!(rep.first_n_below, Some(2));
        assert!(rep.certificate.as_ref().unwrap().full_projection);
    }

    #[test]
    fn convergence_transitive_scenario() {
        let ds = eight_point_scenario();
        let e2 = even_fixed_expectation(ds.action()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(58);
        let x = ds.base_algebra().random_self_adjoint(&mut rng);
        let rep = converge_even_spheres(&ds, &e2, &x, 20, &[OrliczFunction::llogl()], 1e-6, 0.05)
            .unwrap();
        assert!(rep.first_n_below.is_some(), "{}", rep.summary());
        assert!(rep.eventually_below);
        assert!(rep.rows.last().unwrap().err_l2 < 1e-6);
        let csv = rep.to_csv();
        assert!(csv.starts_with("n,err_inf,err_l2,err_llogl\n"));
    }

    #[test]
    fn bau_certificate_cases() {
        let alg = TraceAlgebra::diagonal(4).unwrap();
        let x = alg.diagonal_element(&[0.4, 0.1, -0.2, 0.9]).unwrap();
        // constant sequence → e = 1, residual 0
        let cert = bau_certificate(&alg, &[x.clone(), x.clone()], &x, 0.1, 1e-9).unwrap();
        assert!(cert.full_projection && cert.sup_residual < 1e-15);

        // x_n = x + δ·q for a small projection q: removing q kills the residual
        let q = alg.diagonal_element(&[0.0, 0.0, 0.0, 1.0]).unwrap();
        let seq: Vec<AlgElement> = (0..5).map(|_| x.add(&q.scale_re(0.5))).collect();
        let cert = bau_certificate(&alg, &seq, &x, 0.25 + 1e-12, 1e-9).unwrap();
        assert!(cert.trace_defect <= 0.25 + 1e-12);
        assert!(cert.sup_residual < 1e-12, "{cert:?}");

        // ε = 0 forces e = 1
        let cert = bau_certificate(&alg, &seq, &x, 0.0, 1e-9).unwrap();
        assert!(cert.trace_defect.abs() < 1e-15);
        assert!((cert.sup_residual - 0.5).abs() < 1e-12);
    }
}
