//! The builtin verification suite: one entry per acceptance criterion,
//! shared between the CLI `verify` subcommand and the integration tests.
//!
//! Every check pins its tolerance in code and reports the achieved residual;
//! nothing is calibrated at run time.

use super::{build_scenario, builtin_permutation_8, ScenarioConfig};
use crate::algebra::{conditional_expectation, Subalgebra, TraceAlgebra};
use crate::cesaro::{chebyshev_family, merge_limits_check, semigroup_power_average};
use crate::channels::{rota_sequence, ChannelOperator};
use crate::error::{Error, Result};
use crate::linalg;
use crate::orlicz::{
    check_hlp, check_lemma_leq, orlicz_norm, p_convexity_check, s_numbers, GridSpec,
    OrliczFunction,
};
use crate::spherical::{
    check_relation_even, check_sphere_identities, converge_even_spheres, even_fixed_expectation,
    partial_spherical_sums, spherical_avg_bruteforce, spherical_avg_recursive, DirectSum,
};
use crate::words::{LetterAction, SphereChain};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use std::fmt::Write as _;
use std::time::Instant;

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: usize,
    pub name: String,
    pub passed: bool,
    pub details: String,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {}: {} — {}\n    {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.details.replace('\n', "\n    ")
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    All,
    Identities,
    Orlicz,
    Convergence,
}

impl Suite {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "all" => Ok(Suite::All),
            "identities" => Ok(Suite::Identities),
            "orlicz" => Ok(Suite::Orlicz),
            "convergence" => Ok(Suite::Convergence),
            other => Err(Error::Config(format!(
                "unknown suite '{other}' (expected all|identities|orlicz|convergence)"
            ))),
        }
    }
}

/// Runs the selected criteria and returns their results in order.
pub fn run_suite(suite: Suite) -> Result<Vec<CriterionResult>> {
    let ids: &[usize] = match suite {
        Suite::All => &[1, 2, 3, 4, 5, 6, 7, 8],
        Suite::Identities => &[1, 2, 3, 5, 7],
        Suite::Orlicz => &[4],
        Suite::Convergence => &[6, 8],
    };
    let mut out = Vec::with_capacity(ids.len());
    for &id in ids {
        out.push(match id {
            1 => criterion_1_oracle_equivalence()?,
            2 => criterion_2_contraction()?,
            3 => criterion_3_identities()?,
            4 => criterion_4_orlicz()?,
            5 => criterion_5_rota()?,
            6 => criterion_6_convergence()?,
            7 => criterion_7_certification()?,
            8 => criterion_8_determinism()?,
            _ => unreachable!(),
        });
    }
    Ok(out)
}

fn small_algebra(variant: usize) -> Result<TraceAlgebra> {
    match variant % 3 {
        0 => TraceAlgebra::diagonal(4),
        1 => TraceAlgebra::diagonal(6),
        _ => TraceAlgebra::new(vec![(2, 0.25), (1, 0.25), (1, 0.25)], true),
    }
}

fn random_unitary_scenario(m: usize, seed: u64, variant: usize) -> Result<DirectSum> {
    let alg = small_algebra(variant)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let gens = (0..m)
        .map(|_| ChannelOperator::conjugation(&alg, &alg.random_unitary(&mut rng)))
        .collect::<Result<Vec<_>>>()?;
    let action = LetterAction::group_from_automorphisms(alg, gens)?;
    DirectSum::new(action, SphereChain::free_group(m)?)
}

/// Criterion 1: recursive averages agree with brute-force enumeration for
/// 50 seeded scenarios at all n ≤ 6, and the recursion is at least 50× faster
/// at m = 2, n = 6 with both measurements finishing inside one second.
pub fn criterion_1_oracle_equivalence() -> Result<CriterionResult> {
    let mut max_dev: f64 = 0.0;
    for m in [2usize, 3] {
        for k in 0..25u64 {
            let ds = random_unitary_scenario(m, 1000 * m as u64 + k, k as usize)?;
            let alg = ds.base_algebra().clone();
            let mut rng = ChaCha20Rng::seed_from_u64(9000 + k);
            let x = alg.random_self_adjoint(&mut rng);
            for n in 0..=6usize {
                let fast = spherical_avg_recursive(&ds, n, &x)?;
                let slow = spherical_avg_bruteforce(ds.action(), ds.chain(), n, &x, None)?;
                max_dev = max_dev.max(fast.sub(&slow).max_abs());
            }
        }
    }

    // timing at m = 2, n = 6: 972-word sphere vs 6 recursion levels
    let ds = random_unitary_scenario(2, 31337, 2)?;
    let alg = ds.base_algebra().clone();
    let mut rng = ChaCha20Rng::seed_from_u64(424242);
    let x = alg.random_self_adjoint(&mut rng);
    let wall = Instant::now();
    let t0 = Instant::now();
    let slow = spherical_avg_bruteforce(ds.action(), ds.chain(), 6, &x, None)?;
    let brute_secs = t0.elapsed().as_secs_f64();
    let reps = 200;
    let t0 = Instant::now();
    let mut fast = None;
    for _ in 0..reps {
        fast = Some(spherical_avg_recursive(&ds, 6, &x)?);
    }
    let rec_secs = t0.elapsed().as_secs_f64() / reps as f64;
    let total = wall.elapsed().as_secs_f64();
    let timing_dev = fast.expect("reps > 0").sub(&slow).max_abs();
    max_dev = max_dev.max(timing_dev);
    let speedup = brute_secs / rec_secs.max(1e-12);

    let passed = max_dev <= 1e-10 && speedup >= 50.0 && total < 1.0;
    Ok(CriterionResult {
        id: 1,
        name: "oracle equivalence and recursion speedup".into(),
        passed,
        details: format!(
            "max deviation {max_dev:.3e} (≤ 1e-10); brute {brute_secs:.4}s vs recursive \
             {rec_secs:.6}s per call → speedup {speedup:.0}× (≥ 50); timing block {total:.3}s (< 1s)"
        ),
    })
}

/// Criterion 2: the direct-sum operator contracts every weighted p-norm,
/// p ∈ {1, 2, 4, ∞}, on 500 random tuples per scenario.
pub fn criterion_2_contraction() -> Result<CriterionResult> {
    let mut worst: f64 = 0.0;
    for (label, cfg) in super::builtin_scenarios() {
        let sc = build_scenario(&cfg)?;
        let ds = DirectSum::new(sc.action.clone(), sc.chain.clone())?;
        let mut rng = ChaCha20Rng::seed_from_u64(0xC0_47 ^ label.len() as u64);
        for _ in 0..500 {
            let comps = (0..sc.chain.alphabet().size())
                .map(|_| sc.algebra.random_element(&mut rng))
                .collect::<Vec<_>>();
            let tuple = ds.tuple(comps)?;
            let image = ds.t_apply(&tuple);
            for p in [1.0, 2.0, 4.0, f64::INFINITY] {
                worst = worst.max(ds.weighted_p_norm(&image, p)? - ds.weighted_p_norm(&tuple, p)?);
            }
        }
    }
    Ok(CriterionResult {
        id: 2,
        name: "direct-sum weighted-norm contraction".into(),
        passed: worst <= 1e-10,
        details: format!("worst excess {worst:.3e} over 2×500 tuples, p ∈ {{1,2,4,∞}} (≤ 1e-10)"),
    })
}

/// Criterion 3: the operator-identity suite on both builtin scenarios.
pub fn criterion_3_identities() -> Result<CriterionResult> {
    let mut details = String::new();
    let mut passed = true;
    for (label, cfg) in super::builtin_scenarios() {
        let sc = build_scenario(&cfg)?;
        let ds = DirectSum::new(sc.action.clone(), sc.chain.clone())?;
        let rel = check_relation_even(&ds, 5)?;
        let ids = check_sphere_identities(&ds, 4, 8)?;
        let inv = ds.involution_u()?;
        let mut diag_worst: f64 = 0.0;
        let x = &sc.samples[0];
        let mut tuple = ds.constant_tuple(x)?;
        for n in 1..=6usize {
            tuple = ds.t_apply(&tuple);
            let parts = partial_spherical_sums(&sc.action, &sc.chain, n, x, None)?;
            for (idx, part) in parts.iter().enumerate() {
                let scaled = part.scale_re(1.0 / sc.chain.weight_at(idx));
                diag_worst = diag_worst.max(tuple.component(idx).sub(&scaled).max_abs());
            }
        }
        let ok = rel.max_residual_first <= 1e-9
            && diag_worst <= 1e-10
            && ids.max_squared <= 1e-9
            && ids.max_one_step <= 1e-9
            && inv.u_squared_residual <= 1e-12
            && inv.conjugation_residual <= 1e-10;
        passed &= ok;
        let _ = writeln!(
            details,
            "{label}: relation(1) {:.2e}, diagonal {:.2e}, S₁² {:.2e}, one-step {:.2e}, \
             U² {:.2e}, UTU−T* {:.2e}",
            rel.max_residual_first,
            diag_worst,
            ids.max_squared,
            ids.max_one_step,
            inv.u_squared_residual,
            inv.conjugation_residual
        );
    }
    Ok(CriterionResult {
        id: 3,
        name: "even-radius relation, diagonal identity, sphere compositions, involution".into(),
        passed,
        details: details.trim_end().into(),
    })
}

/// Criterion 4: the Orlicz suite. The p-convexity sub-check pins the three
/// expected verdicts on the checker's default grid; the middle one
/// (`t·log(1+t)` at `p = 10/9`) is mathematically unattainable there — the
/// 0.9-th power of that function turns concave past `t ≈ e⁸ − 1 ≈ 2980`, so
/// the checker reports a genuine witness and this criterion stays red.
pub fn criterion_4_orlicz() -> Result<CriterionResult> {
    let started = Instant::now();
    let alg = TraceAlgebra::new(vec![(2, 0.25), (1, 0.25), (1, 0.25)], true)?;
    let mut rng = ChaCha20Rng::seed_from_u64(0x0041_0c5a);
    let mut details = String::new();

    // Luxemburg norm agrees with the p-norm for power functions
    let mut norm_dev: f64 = 0.0;
    for p in [1.0, 2.0, 4.0] {
        let phi = OrliczFunction::power(p)?;
        for _ in 0..30 {
            let x = alg.random_element(&mut rng);
            norm_dev = norm_dev.max((orlicz_norm(&alg, &x, &phi)? - alg.lp_norm(&x, p)?).abs());
        }
    }
    let norms_ok = norm_dev <= 1e-9;
    let _ = writeln!(details, "power-function norm agreement: max dev {norm_dev:.3e} (≤ 1e-9)");

    // unit-ball inequality on 1000 positives
    let psi = OrliczFunction::llogl();
    let mut violations = 0usize;
    for k in 0..1000 {
        let x = alg.random_positive(&mut rng);
        let nrm = orlicz_norm(&alg, &x, &psi)?;
        if nrm <= 1e-12 {
            continue;
        }
        let scale = 0.05 + 0.95 * (k as f64 / 1000.0);
        let y = x.scale_re(scale / nrm);
        if !check_lemma_leq(&alg, &y, &psi)?.holds {
            violations += 1;
        }
    }
    let leq_ok = violations == 0;
    let _ = writeln!(details, "unit-ball trace inequality: {violations} violations in 1000");

    // HLP implication on 200 contraction-generated majorization pairs
    let scal = Subalgebra::scalars(alg.clone())?;
    let e0 = conditional_expectation(&scal)?;
    let mut hlp_fail = 0usize;
    for k in 0..200u64 {
        let mut srng = ChaCha20Rng::seed_from_u64(7000 + k);
        let u = alg.random_unitary(&mut srng);
        let v = alg.random_unitary(&mut srng);
        let w = 0.2 + 0.6 * (k as f64 / 200.0);
        let t = ChannelOperator::linear_combination(&[
            (w * 0.7, &ChannelOperator::conjugation(&alg, &u)?),
            (w * 0.3, &ChannelOperator::conjugation(&alg, &v)?),
            (1.0 - w, &e0),
        ])?;
        let x = alg.random_element(&mut srng);
        let f = s_numbers(&alg, &t.apply(&x)?)?;
        let g = s_numbers(&alg, &x)?;
        if !check_hlp(&f, &g, &psi)?.holds {
            hlp_fail += 1;
        }
    }
    let hlp_ok = hlp_fail == 0;
    let _ = writeln!(details, "majorization implication: {hlp_fail} failures in 200 pairs");

    // p-convexity verdicts on the default grid
    let grid = GridSpec::default();
    let v1 = p_convexity_check(&OrliczFunction::power(2.0)?, 2.0, &grid)?;
    let v2 = p_convexity_check(&psi, 10.0 / 9.0, &grid)?;
    let v3 = p_convexity_check(&OrliczFunction::power(1.0)?, 2.0, &grid)?;
    let verdicts_ok = v1.convex && v2.convex && !v3.convex;
    let _ = writeln!(
        details,
        "p-convexity verdicts (expected yes/yes/no): t² → {}, t·log(1+t) at 10/9 → {} \
         (worst increment {:.2e} at t ≈ {:.0}), t → {}",
        v1.convex, v2.convex, v2.worst_second_difference, v2.witness, v3.convex
    );
    if !v2.convex {
        let _ = writeln!(
            details,
            "note: (t·log(1+t))^0.9 has decreasing slopes beyond t ≈ e⁸−1 ≈ 2980, so the \
             yes-verdict cannot hold on the default grid [1e-6, 1e6]; the checker's witness \
             above is genuine"
        );
    }

    let secs = started.elapsed().as_secs_f64();
    let time_ok = secs < 10.0;
    let _ = writeln!(details, "runtime {secs:.2}s (< 10s)");
    Ok(CriterionResult {
        id: 4,
        name: "Orlicz norms, trace inequality, majorization, p-convexity verdicts".into(),
        passed: norms_ok && leq_ok && hlp_ok && verdicts_ok && time_ok,
        details: details.trim_end().into(),
    })
}

/// The bit-shift channel on the diagonal algebra of {0,1}^k: shift the
/// configuration right and average over the fresh leading bit. Its
/// alternating products are exactly the expectations that forget the
/// leading bits.
fn bit_shift_channel(k: u32) -> Result<(TraceAlgebra, ChannelOperator, Vec<ChannelOperator>)> {
    let points = 1usize << k;
    let alg = TraceAlgebra::diagonal(points)?;
    let t = ChannelOperator::from_action(alg.clone(), |x| {
        let mut blocks = alg.zero();
        for i in 0..points {
            let low = i >> 1;
            let high = (1 << (k - 1)) + (i >> 1);
            blocks.blocks_mut()[i][(0, 0)] =
                (x.block(low)[(0, 0)] + x.block(high)[(0, 0)]) * Complex64::new(0.5, 0.0);
        }
        blocks
    })?;
    let mut expectations = Vec::new();
    for n in 1..=8u32 {
        let keep = k.saturating_sub(n);
        let en = ChannelOperator::from_action(alg.clone(), |x| {
            let mut out = alg.zero();
            let count = 1usize << (k - keep);
            for i in 0..points {
                let low_bits = i & ((1usize << keep) - 1);
                let mut acc = Complex64::new(0.0, 0.0);
                for a in 0..count {
                    acc += x.block((a << keep) + low_bits)[(0, 0)];
                }
                out.blocks_mut()[i][(0, 0)] = acc / Complex64::new(count as f64, 0.0);
            }
            out
        })?;
        expectations.push(en);
    }
    Ok((alg, t, expectations))
}

/// Criterion 5: alternating products match the closed forms exactly for an
/// expectation and an automorphism, and match the supplied nested
/// expectations for the bit-shift realization up to n = 8.
pub fn criterion_5_rota() -> Result<CriterionResult> {
    let mut details = String::new();

    let alg = TraceAlgebra::matrix_block(2)?;
    let scal = Subalgebra::scalars(alg.clone())?;
    let e = conditional_expectation(&scal)?;
    let mut rng = ChaCha20Rng::seed_from_u64(0x0b07);
    let x = alg.random_element(&mut rng);
    let seq = rota_sequence(&e, &x, 6, None)?;
    let ex = e.apply(&x)?;
    let mut worst_e: f64 = 0.0;
    for a in seq.forward.iter().chain(seq.backward.iter()) {
        worst_e = worst_e.max(a.sub(&ex).max_abs());
    }
    let _ = writeln!(details, "T = E: max deviation from E x is {worst_e:.3e} (≤ 1e-12)");

    let u = alg.random_unitary(&mut rng);
    let auto = ChannelOperator::conjugation(&alg, &u)?;
    let seq = rota_sequence(&auto, &x, 6, None)?;
    let mut worst_a: f64 = 0.0;
    for a in seq.forward.iter().chain(seq.backward.iter()) {
        worst_a = worst_a.max(a.sub(&x).max_abs());
    }
    let _ = writeln!(details, "T = automorphism: max deviation from x is {worst_a:.3e} (≤ 1e-12)");

    let (balg, t, ens) = bit_shift_channel(3)?;
    let id = ChannelOperator::identity(balg.clone());
    let mut rng = ChaCha20Rng::seed_from_u64(0x0b08);
    let y = balg.random_self_adjoint(&mut rng);
    let seq = rota_sequence(&t, &y, 8, Some((&id, &ens)))?;
    let worst_nested = seq
        .expectation_residuals
        .expect("nested data supplied")
        .into_iter()
        .fold(0.0f64, f64::max);
    let _ = writeln!(
        details,
        "bit-shift dilation: max ‖(T*)ⁿTⁿx − E(Eₙx)‖ = {worst_nested:.3e} for n ≤ 8 (≤ 1e-9)"
    );

    // monotonicity surrogate: the expectations stabilize at n = 3 and the
    // l2 distance to the stabilized limit never increases
    let tail = ens.last().expect("eight expectations").apply(&y)?;
    let mut monotone = true;
    let mut prev = f64::INFINITY;
    for bx in &seq.backward {
        let d = balg.l2_norm(&bx.sub(&tail));
        monotone &= d <= prev + 1e-10;
        prev = d;
    }
    let _ = writeln!(details, "distance to the stabilized expectation nonincreasing: {monotone}");

    Ok(CriterionResult {
        id: 5,
        name: "alternating sequence against closed forms and nested expectations".into(),
        passed: worst_e <= 1e-12 && worst_a <= 1e-12 && worst_nested <= 1e-9 && monotone,
        details: details.trim_end().into(),
    })
}

pub(crate) struct BaselineRow {
    pub scenario: String,
    pub n: usize,
    pub err_inf: f64,
    pub err_l2: f64,
    pub err_llogl: f64,
}

pub(crate) fn parse_baseline(text: &str) -> Result<Vec<BaselineRow>> {
    let mut rows = Vec::new();
    for (k, line) in text.lines().enumerate() {
        if k == 0 || line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 5 {
            return Err(Error::Config(format!("baseline line {k} malformed: {line}")));
        }
        rows.push(BaselineRow {
            scenario: parts[0].to_string(),
            n: parts[1].parse().map_err(|_| Error::Config("bad n".into()))?,
            err_inf: parts[2].parse().map_err(|_| Error::Config("bad err_inf".into()))?,
            err_l2: parts[3].parse().map_err(|_| Error::Config("bad err_l2".into()))?,
            err_llogl: parts[4].parse().map_err(|_| Error::Config("bad err_llogl".into()))?,
        });
    }
    Ok(rows)
}

fn rel_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()) + 1e-300
}

fn convergence_curve(cfg: &ScenarioConfig) -> Result<(String, Vec<(usize, f64, f64, f64)>)> {
    let sc = build_scenario(cfg)?;
    let ds = DirectSum::new(sc.action.clone(), sc.chain.clone())?;
    let e2 = even_fixed_expectation(&sc.action)?;
    let rep = converge_even_spheres(
        &ds,
        &e2,
        &sc.samples[0],
        cfg.n_max,
        &sc.orlicz,
        cfg.tolerances.convergence_target,
        0.05,
    )?;
    let rows = rep
        .rows
        .iter()
        .map(|r| (r.n, r.err_inf, r.err_l2, r.err_orlicz.first().copied().unwrap_or(0.0)))
        .collect();
    Ok((sc.label, rows))
}

/// Regenerates the committed baseline blob from the builtin scenarios.
pub fn compute_baseline_blob() -> Result<String> {
    let mut out = String::from("scenario,n,err_inf,err_l2,err_llogl\n");
    for (_, cfg) in super::builtin_scenarios() {
        let (label, rows) = convergence_curve(&cfg)?;
        for (n, inf, l2, llogl) in rows {
            out.push_str(&format!(
                "{label},{n},{},{},{}\n",
                crate::spherical::fmt_float(inf),
                crate::spherical::fmt_float(l2),
                crate::spherical::fmt_float(llogl)
            ));
        }
    }
    Ok(out)
}

/// Criterion 6: reproduced convergence curves match the committed baseline to
/// 1e−12 relative, the l2 error passes 1e−6 no later than the recorded
/// radius, the limit is invariant under generator pairs, and the semigroup
/// power averages merge under the irreducibility probe.
pub fn criterion_6_convergence() -> Result<CriterionResult> {
    let baseline = parse_baseline(super::BASELINE_CURVES)?;
    if baseline.is_empty() {
        return Ok(CriterionResult {
            id: 6,
            name: "even-sphere convergence against the committed baseline".into(),
            passed: false,
            details: "baseline file is empty; regenerate it with the `baseline` subcommand".into(),
        });
    }
    let mut details = String::new();
    let mut passed = true;
    for (_, cfg) in super::builtin_scenarios() {
        let (label, rows) = convergence_curve(&cfg)?;
        let expected: Vec<&BaselineRow> =
            baseline.iter().filter(|r| r.scenario == label).collect();
        if expected.len() != rows.len() {
            passed = false;
            let _ = writeln!(
                details,
                "{label}: baseline has {} rows, reproduction has {}",
                expected.len(),
                rows.len()
            );
            continue;
        }
        let mut max_rel: f64 = 0.0;
        let mut matches = true;
        for (got, want) in rows.iter().zip(&expected) {
            matches &= got.0 == want.n
                && rel_close(got.1, want.err_inf)
                && rel_close(got.2, want.err_l2)
                && rel_close(got.3, want.err_llogl);
            for (a, b) in
                [(got.1, want.err_inf), (got.2, want.err_l2), (got.3, want.err_llogl)]
            {
                let denom = a.abs().max(b.abs()).max(1e-300);
                max_rel = max_rel.max((a - b).abs() / denom);
            }
        }
        let recorded_nstar = expected.iter().find(|r| r.err_l2 <= 1e-6).map(|r| r.n);
        let reproduced_nstar = rows.iter().find(|r| r.2 <= 1e-6).map(|r| r.0);
        let nstar_ok = match (recorded_nstar, reproduced_nstar) {
            (Some(recorded), Some(reproduced)) => reproduced <= recorded,
            _ => false,
        };

        let sc = build_scenario(&cfg)?;
        let e2 = even_fixed_expectation(&sc.action)?;
        let mut invariance: f64 = 0.0;
        for &g in &sc.chain.alphabet().letters() {
            for &h in &sc.chain.alphabet().letters() {
                let pair = sc.action.op(h)?.compose(sc.action.op(g)?)?;
                invariance =
                    invariance.max(linalg::max_abs(&(e2.matrix() * pair.matrix() - e2.matrix())));
            }
        }

        // semigroup power averages on the positive generators
        let maps = (1..=cfg.m as i32)
            .map(|i| sc.action.op(i).cloned())
            .collect::<Result<Vec<_>>>()?;
        let sg_action = LetterAction::semigroup(sc.algebra.clone(), maps)?;
        let sg = DirectSum::new(sg_action, SphereChain::free_semigroup_uniform(cfg.m)?)?;
        let t = sg.t_channel()?;
        let flat = sg.flatten(&sg.constant_tuple(&sc.samples[0])?);
        let power = semigroup_power_average(&t, &flat, 16)?;
        let tuple = sg.unflatten(&power.limit)?;
        let merge = merge_limits_check(&sg, &tuple, 8, 2.0)?;

        let ok = matches
            && nstar_ok
            && invariance <= 1e-9
            && power.fixed_point_residual <= 1e-9
            && merge.max_pairwise_distance.max(merge.max_invariance_residual) <= 1e-8;
        passed &= ok;
        let _ = writeln!(
            details,
            "{label}: curve rel dev {max_rel:.2e} (≤ 1e-12), N* recorded {recorded_nstar:?} \
             reproduced {reproduced_nstar:?}, invariance {invariance:.2e}, semigroup fixed \
             {:.2e}, merging {:.2e}",
            power.fixed_point_residual,
            merge.max_pairwise_distance.max(merge.max_invariance_residual)
        );
    }
    Ok(CriterionResult {
        id: 6,
        name: "even-sphere convergence against the committed baseline".into(),
        passed,
        details: details.trim_end().into(),
    })
}

/// Criterion 7: every constructed `S_n`, `A_n`, `M_n` passes Markov
/// certification, and the half-projection trace bound holds on 1000 samples.
pub fn criterion_7_certification() -> Result<CriterionResult> {
    let cfg = builtin_permutation_8();
    let sc = build_scenario(&cfg)?;
    let ds = DirectSum::new(sc.action.clone(), sc.chain.clone())?;
    let spheres = ds.sphere_channels(8)?;
    let mut all_markov = true;
    for s in &spheres {
        all_markov &= s.flags().is_markov();
    }
    // Cesàro averages A_n of the spheres, for every n up to the horizon
    for n in 1..=spheres.len() {
        let terms: Vec<(f64, &ChannelOperator)> =
            spheres[..n].iter().map(|s| (1.0 / n as f64, s)).collect();
        all_markov &= ChannelOperator::linear_combination(&terms)?.flags().is_markov();
    }
    // the free-group family and its running averages M_n
    let fam = chebyshev_family(&spheres[1], 0.75, 6)?;
    all_markov &= fam.markov_preserved.iter().all(|&b| b);
    for n in 0..=fam.horizon() {
        all_markov &= fam.mn_channel(n)?.flags().is_markov();
    }

    let alg = TraceAlgebra::new(vec![(3, 0.2), (1, 0.4)], false)?;
    let mut rng = ChaCha20Rng::seed_from_u64(0x4a1f);
    let mut worst_gap = f64::NEG_INFINITY;
    let mut violations = 0usize;
    for _ in 0..1000 {
        let b = alg.random_positive(&mut rng);
        let hp = alg.half_projection(&b)?;
        let slack = alg.trace(&alg.unit().sub(&b))?.re;
        let gap = hp.defect - 2.0 * slack;
        worst_gap = worst_gap.max(gap);
        if gap > 1e-10 {
            violations += 1;
        }
    }
    Ok(CriterionResult {
        id: 7,
        name: "Markov certification of all averages; half-projection bound".into(),
        passed: all_markov && violations == 0,
        details: format!(
            "S_0..S_8, A_1..A_9, M_0..M_6 markov: {all_markov}; defect bound violations \
             {violations} in 1000 (worst slack {worst_gap:.3e})"
        ),
    })
}

/// Criterion 8: two runs with the same config and seed produce byte-identical
/// CSV artifacts.
pub fn criterion_8_determinism() -> Result<CriterionResult> {
    let base = std::env::temp_dir().join(format!("ncergo-verify-{}", std::process::id()));
    let mut cfg = builtin_permutation_8();
    cfg.n_max = 10;
    let dir_a = base.join("run-a");
    let dir_b = base.join("run-b");
    let _ = std::fs::remove_dir_all(&base);
    let rep_a = super::run_experiment(&cfg, &dir_a, false)?;
    let rep_b = super::run_experiment(&cfg, &dir_b, false)?;
    let mut identical = true;
    let mut compared = 0usize;
    for (a, b) in rep_a.csv_paths.iter().zip(&rep_b.csv_paths) {
        let ba = std::fs::read(a).map_err(|e| Error::Config(e.to_string()))?;
        let bb = std::fs::read(b).map_err(|e| Error::Config(e.to_string()))?;
        identical &= ba == bb;
        compared += 1;
    }
    let _ = std::fs::remove_dir_all(&base);
    Ok(CriterionResult {
        id: 8,
        name: "byte-identical CSV artifacts for identical (config, seed)".into(),
        passed: identical && compared > 0,
        details: format!("{compared} CSV artifacts compared bytewise"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_shift_channel_is_markov_with_nested_products() {
        let (_, t, ens) = bit_shift_channel(3).unwrap();
        assert!(t.flags().is_markov());
        for e in &ens {
            assert!(e.flags().is_markov());
            let m = e.matrix();
            assert!(linalg::max_abs(&(m * m - m)) < 1e-12, "projection");
        }
        // expectations decrease: E_{n+1} E_n = E_{n+1}
        for w in ens.windows(2) {
            let prod = w[1].compose(&w[0]).unwrap();
            assert!(linalg::max_abs(&(prod.matrix() - w[1].matrix())) < 1e-12);
        }
    }

    #[test]
    fn suite_parse() {
        assert_eq!(Suite::parse("all").unwrap(), Suite::All);
        assert_eq!(Suite::parse("orlicz").unwrap(), Suite::Orlicz);
        assert!(Suite::parse("bogus").is_err());
    }
}
