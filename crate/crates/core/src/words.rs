//! Alphabets, reduced words, spheres, and stochastic chains with stationary
//! distributions.
//!
//! Group alphabets are `{−m,…,−1, 1,…,m}` with `−i` the formal inverse of
//! `i`; semigroup alphabets are `{1,…,m}`. Reduced words never contain a
//! letter followed by its inverse. Sphere enumeration is lazy and
//! lexicographic in the order `−m < … < −1 < 1 < … < m`.

use crate::algebra::{AlgElement, TraceAlgebra};
use crate::channels::ChannelOperator;
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Hard cap on eager sphere materialization in brute-force sums.
pub const SPHERE_GUARD: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphabetKind {
    Group,
    Semigroup,
}

/// The index set `I` of generators (and inverses, for the group kind).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Alphabet {
    kind: AlphabetKind,
    m: usize,
}

impl Alphabet {
    pub fn group(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Domain("alphabet needs m >= 1".into()));
        }
        Ok(Alphabet { kind: AlphabetKind::Group, m })
    }

    pub fn semigroup(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Domain("alphabet needs m >= 1".into()));
        }
        Ok(Alphabet { kind: AlphabetKind::Semigroup, m })
    }

    pub fn kind(&self) -> AlphabetKind {
        self.kind
    }

    pub fn generators(&self) -> usize {
        self.m
    }

    /// Number of letters: `2m` for groups, `m` for semigroups.
    pub fn size(&self) -> usize {
        match self.kind {
            AlphabetKind::Group => 2 * self.m,
            AlphabetKind::Semigroup => self.m,
        }
    }

    /// Letters in enumeration order.
    pub fn letters(&self) -> Vec<i32> {
        let m = self.m as i32;
        match self.kind {
            AlphabetKind::Group => (-m..=m).filter(|&i| i != 0).collect(),
            AlphabetKind::Semigroup => (1..=m).collect(),
        }
    }

    pub fn contains(&self, letter: i32) -> bool {
        let m = self.m as i32;
        match self.kind {
            AlphabetKind::Group => letter != 0 && letter.abs() <= m,
            AlphabetKind::Semigroup => letter >= 1 && letter <= m,
        }
    }

    /// Position of a letter in enumeration order.
    pub fn index(&self, letter: i32) -> Result<usize> {
        if !self.contains(letter) {
            return Err(Error::Domain(format!("letter {letter} outside the alphabet")));
        }
        let m = self.m as i32;
        Ok(match self.kind {
            AlphabetKind::Group => {
                if letter < 0 {
                    (letter + m) as usize
                } else {
                    (m + letter - 1) as usize
                }
            }
            AlphabetKind::Semigroup => (letter - 1) as usize,
        })
    }

    pub fn letter_at(&self, index: usize) -> i32 {
        self.letters()[index]
    }

    /// Whether `b` may follow `a` in a reduced word.
    pub fn may_follow(&self, a: i32, b: i32) -> bool {
        match self.kind {
            AlphabetKind::Group => a + b != 0,
            AlphabetKind::Semigroup => true,
        }
    }

    /// `|𝕊_n|`: `2m(2m−1)^{n−1}` for groups (n ≥ 1), `m^n` for semigroups.
    pub fn sphere_size(&self, n: usize) -> u128 {
        if n == 0 {
            return 1;
        }
        match self.kind {
            AlphabetKind::Group => {
                let m = self.m as u128;
                2 * m * (2 * m - 1).pow((n - 1) as u32)
            }
            AlphabetKind::Semigroup => (self.m as u128).pow(n as u32),
        }
    }
}

/// A finite word over an alphabet, with its reduced flag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Word {
    letters: Vec<i32>,
    reduced: bool,
}

impl Word {
    pub fn new(alphabet: &Alphabet, letters: Vec<i32>) -> Result<Self> {
        for &l in &letters {
            if !alphabet.contains(l) {
                return Err(Error::Domain(format!("letter {l} outside the alphabet")));
            }
        }
        let reduced = letters.windows(2).all(|w| alphabet.may_follow(w[0], w[1]));
        Ok(Word { letters, reduced })
    }

    pub fn empty() -> Self {
        Word { letters: Vec::new(), reduced: true }
    }

    pub fn letters(&self) -> &[i32] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced
    }
}

/// Lazy lexicographic iterator over the reduced words of length `n`.
pub struct SphereIter {
    alphabet: Alphabet,
    n: usize,
    /// current letter indices, or None before the first word
    state: Option<Vec<usize>>,
    done: bool,
}

pub fn sphere(alphabet: &Alphabet, n: usize) -> SphereIter {
    SphereIter { alphabet: *alphabet, n, state: None, done: false }
}

impl SphereIter {
    fn first_allowed(&self, prev: Option<i32>, from: usize) -> Option<usize> {
        let letters = self.alphabet.letters();
        (from..letters.len())
            .find(|&k| prev.map_or(true, |p| self.alphabet.may_follow(p, letters[k])))
    }

    /// Fills positions `i..n` with the smallest allowed letters.
    fn fill_smallest(&self, idx: &mut Vec<usize>, mut i: usize) -> bool {
        let letters = self.alphabet.letters();
        while i < self.n {
            let prev = if i == 0 { None } else { Some(letters[idx[i - 1]]) };
            match self.first_allowed(prev, 0) {
                Some(k) => idx[i] = k,
                None => return false,
            }
            i += 1;
        }
        true
    }
}

impl Iterator for SphereIter {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        if self.done {
            return None;
        }
        if self.n == 0 {
            self.done = true;
            return Some(Word::empty());
        }
        let letters = self.alphabet.letters();
        let next_state = match self.state.take() {
            None => {
                let mut idx = vec![0usize; self.n];
                self.fill_smallest(&mut idx, 0).then_some(idx)
            }
            Some(mut idx) => {
                // advance like an odometer, skipping non-reduced continuations
                let mut advanced = None;
                let mut pos = self.n;
                while pos > 0 {
                    pos -= 1;
                    let prev = if pos == 0 { None } else { Some(letters[idx[pos - 1]]) };
                    if let Some(k) = self.first_allowed(prev, idx[pos] + 1) {
                        idx[pos] = k;
                        let mut idx2 = idx.clone();
                        if self.fill_smallest(&mut idx2, pos + 1) {
                            advanced = Some(idx2);
                            break;
                        }
                    }
                }
                advanced
            }
        };
        match next_state {
            Some(idx) => {
                let w: Vec<i32> = idx.iter().map(|&k| letters[k]).collect();
                self.state = Some(idx);
                Some(Word { letters: w, reduced: true })
            }
            None => {
                self.done = true;
                None
            }
        }
    }
}

/// A stochastic matrix over an alphabet together with a strictly positive
/// stationary distribution; induces the Markov measure on cylinder sets.
#[derive(Debug, Clone)]
pub struct SphereChain {
    alphabet: Alphabet,
    p: DMatrix<f64>,
    stationary: DVector<f64>,
}

impl SphereChain {
    pub fn new(alphabet: Alphabet, p: DMatrix<f64>, stationary: DVector<f64>) -> Result<Self> {
        let s = alphabet.size();
        if p.nrows() != s || p.ncols() != s || stationary.len() != s {
            return Err(Error::Shape(format!(
                "chain needs a {s}×{s} matrix and a length-{s} stationary vector"
            )));
        }
        for i in 0..s {
            let row: f64 = p.row(i).iter().sum();
            if (row - 1.0).abs() > 1e-12 {
                return Err(Error::Domain(format!("row {i} sums to {row}, expected 1")));
            }
            for j in 0..s {
                if p[(i, j)] < 0.0 {
                    return Err(Error::Domain(format!("negative transition p[{i}][{j}]")));
                }
            }
            if !(stationary[i] > 0.0) {
                return Err(Error::Domain(format!("stationary weight {i} must be positive")));
            }
        }
        for j in 0..s {
            let flow: f64 = (0..s).map(|i| stationary[i] * p[(i, j)]).sum();
            if (flow - stationary[j]).abs() > 1e-12 {
                return Err(Error::Domain(format!(
                    "stationarity fails at {j}: Σ p_i p_ij = {flow} vs p_j = {}",
                    stationary[j]
                )));
            }
        }
        let total: f64 = stationary.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("stationary weights sum to {total}, expected 1")));
        }
        Ok(SphereChain { alphabet, p, stationary })
    }

    /// The free-group chain: no backtracking (`p_{i,−i} = 0`), all other
    /// transitions `1/(2m−1)`, uniform stationary weights `1/(2m)`.
    pub fn free_group(m: usize) -> Result<Self> {
        let alphabet = Alphabet::group(m)?;
        let s = alphabet.size();
        let letters = alphabet.letters();
        let mut p = DMatrix::zeros(s, s);
        for (a, &i) in letters.iter().enumerate() {
            for (b, &j) in letters.iter().enumerate() {
                p[(a, b)] = if i == -j { 0.0 } else { 1.0 / (2 * m - 1) as f64 };
            }
        }
        let stationary = DVector::from_element(s, 1.0 / (2 * m) as f64);
        Self::new(alphabet, p, stationary)
    }

    /// Uniform chain on the free semigroup: all transitions `1/m`.
    pub fn free_semigroup_uniform(m: usize) -> Result<Self> {
        let alphabet = Alphabet::semigroup(m)?;
        let s = alphabet.size();
        let p = DMatrix::from_element(s, s, 1.0 / m as f64);
        let stationary = DVector::from_element(s, 1.0 / m as f64);
        Self::new(alphabet, p, stationary)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn transition(&self, i: i32, j: i32) -> Result<f64> {
        Ok(self.p[(self.alphabet.index(i)?, self.alphabet.index(j)?)])
    }

    pub fn weight(&self, i: i32) -> Result<f64> {
        Ok(self.stationary[self.alphabet.index(i)?])
    }

    pub fn weight_at(&self, index: usize) -> f64 {
        self.stationary[index]
    }

    pub fn transition_at(&self, i: usize, j: usize) -> f64 {
        self.p[(i, j)]
    }

    /// `μ(ω) = p_{ω₁} · p_{ω₁ω₂} ⋯ p_{ω_{n−1}ω_n}` on the cylinder of `ω`.
    pub fn markov_measure(&self, word: &Word) -> Result<f64> {
        if word.is_empty() {
            return Err(Error::Domain("Markov measure of the empty word is undefined".into()));
        }
        let mut mu = self.weight(word.letters()[0])?;
        for w in word.letters().windows(2) {
            mu *= self.transition(w[0], w[1])?;
        }
        Ok(mu)
    }

    /// Probe for strict irreducibility: the first `n ≤ horizon` with
    /// `(P·Pᵗ)ⁿ` entrywise positive, if any.
    pub fn strict_irreducibility_probe(&self, horizon: usize) -> Option<usize> {
        let q = &self.p * self.p.transpose();
        let mut power = q.clone();
        for n in 1..=horizon {
            if power.iter().all(|&v| v > 0.0) {
                return Some(n);
            }
            power *= &q;
        }
        None
    }
}

/// An action of the alphabet by channels, `letter i ↦ α_i`, with
/// `α_{−i} = α_i^{−1}` for group alphabets.
#[derive(Debug, Clone)]
pub struct LetterAction {
    alphabet: Alphabet,
    algebra: TraceAlgebra,
    /// channels in alphabet enumeration order
    ops: Vec<ChannelOperator>,
}

impl LetterAction {
    /// Group action from generator automorphisms; inverses are the adjoints
    /// (trace-preserving automorphisms are coordinate-unitary).
    pub fn group_from_automorphisms(
        algebra: TraceAlgebra,
        generators: Vec<ChannelOperator>,
    ) -> Result<Self> {
        let m = generators.len();
        let alphabet = Alphabet::group(m)?;
        for (k, g) in generators.iter().enumerate() {
            if g.algebra() != &algebra {
                return Err(Error::Shape(format!("generator {k} acts on a different algebra")));
            }
            if !g.flags().automorphism {
                return Err(Error::Domain(format!(
                    "generator {k} is not a certified trace-preserving automorphism"
                )));
            }
        }
        let mut ops = Vec::with_capacity(2 * m);
        for g in generators.iter().rev() {
            ops.push(g.adjoint()); // letters −m..−1
        }
        ops.extend(generators); // letters 1..m
        Ok(LetterAction { alphabet, algebra, ops })
    }

    /// Semigroup action from Markov operators (no inverses needed).
    pub fn semigroup(algebra: TraceAlgebra, maps: Vec<ChannelOperator>) -> Result<Self> {
        let alphabet = Alphabet::semigroup(maps.len())?;
        for (k, t) in maps.iter().enumerate() {
            if t.algebra() != &algebra {
                return Err(Error::Shape(format!("map {k} acts on a different algebra")));
            }
            if !t.flags().is_markov() {
                return Err(Error::Domain(format!("map {k} is not a certified Markov operator")));
            }
        }
        Ok(LetterAction { alphabet, algebra, ops: maps })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn algebra(&self) -> &TraceAlgebra {
        &self.algebra
    }

    pub fn op(&self, letter: i32) -> Result<&ChannelOperator> {
        Ok(&self.ops[self.alphabet.index(letter)?])
    }

    pub fn op_at(&self, index: usize) -> &ChannelOperator {
        &self.ops[index]
    }

    /// `α_ω = α_{ω_n} ∘ ⋯ ∘ α_{ω₁}` (first letter applied first);
    /// the empty word gives the identity.
    pub fn word_operator(&self, word: &Word) -> Result<ChannelOperator> {
        let mut acc = ChannelOperator::identity(self.algebra.clone());
        for &l in word.letters() {
            acc = self.op(l)?.compose(&acc)?;
        }
        Ok(acc)
    }

    /// Applies `α_ω` to an element by sequential letter application.
    pub fn apply_word(&self, word: &Word, x: &AlgElement) -> Result<AlgElement> {
        let mut v = self.algebra.to_coords(x);
        for &l in word.letters() {
            v = self.op(l)?.matrix() * v;
        }
        Ok(self.algebra.from_coords(&v))
    }
}
