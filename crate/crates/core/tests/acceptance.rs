//! Acceptance criteria, one line per criterion. Runs without the libtest
//! harness so the lines are printed even when everything passes.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wmrep_core::circle::random_moebius;
use wmrep_core::constructions::{
    cancelling_triple, coboundary, cocycle_obstruction, direct_sum, doubled_torus, elliptic_abelian,
    fuchsian_bounded, fuchsian_closed_genus2, heisenberg_extend, orientation_reverse, polydisk, project_to_cocycles,
    random_free, sym_cube, HeisenbergOutcome,
};
use wmrep_core::invariants::{q_causal_check, toledo, toledo_with_lifts, wm_defect, Representation, BOUNDARY_ITERS};
use wmrep_core::lift::{DominanceVerdict, LiftedSymplectic};
use wmrep_core::order::{reconstruction_check, CircleOrder};
use wmrep_core::surface::SurfacePresentation;
use wmrep_core::symplectic::{kashiwara_index, maslov_beta, random_hamiltonian_exp, random_lagrangian, random_symmetric};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn timed(f: impl FnOnce() -> Outcome) -> (Outcome, Duration) {
    let start = Instant::now();
    let o = f();
    (o, start.elapsed())
}

fn calibration() -> Outcome {
    let start = Instant::now();
    let t = toledo(&fuchsian_closed_genus2()).unwrap();
    let elapsed = start.elapsed();
    outcome(
        t.value == 2.0 && t.winding_integer == 2 && elapsed < Duration::from_secs(1),
        format!("T = {}, winding {}, mw_margin {}", t.value, t.winding_integer, t.mw_margin),
    )
}

fn milnor_wood_sweep() -> Outcome {
    let mut worst = f64::INFINITY;
    let mut count = 0;
    for (g, b) in [(1, 1), (0, 3)] {
        let p = SurfacePresentation::new(g, b).unwrap();
        for seed in 0..200u64 {
            let n = 1 + (seed % 3) as usize;
            let rep = random_free(&p, n, seed, 1.0).unwrap();
            worst = worst.min(toledo(&rep).unwrap().mw_margin);
            count += 1;
        }
    }
    outcome(worst >= -1e-3, format!("{count} representations, smallest margin {worst:.4}"))
}

fn polydisk_maximality() -> Outcome {
    let f = fuchsian_closed_genus2();
    let r = orientation_reverse(&f);
    let mut ok = true;
    let mut values = Vec::new();
    for n in 1..=3usize {
        let same: Vec<&Representation> = vec![&f; n];
        let t = toledo(&polydisk(&same).unwrap()).unwrap().value;
        ok &= (t - 2.0 * n as f64).abs() <= 1e-4;
        let mut mixed = same.clone();
        mixed[0] = &r;
        let tm = toledo(&polydisk(&mixed).unwrap()).unwrap().value;
        ok &= (tm - 2.0 * (n as f64 - 2.0)).abs() <= 1e-4;
        values.push(format!("n={n}: {t}/{tm}"));
    }
    outcome(ok, format!("T preserved/reversed {}", values.join(", ")))
}

fn cancelling_triple_check() -> Outcome {
    let f = fuchsian_closed_genus2();
    let rho_a = doubled_torus(&f.images()[0], &f.images()[1]).unwrap();
    let triple = cancelling_triple(&f, &rho_a).unwrap();
    let t = toledo(&triple).unwrap().value;
    let wm = wm_defect(&triple, &f, 1, 64).unwrap();
    let reducible = elliptic_abelian(f.presentation(), &[0.3, 0.7, 1.1, 0.2]).unwrap();
    let control = polydisk(&[&reducible, &rho_a, &reducible]).unwrap();
    let bad = wm_defect(&control, &f, 1, 64).unwrap();
    outcome(
        (t - 2.0).abs() <= 1e-4 && wm.defect <= 0.05 && bad.defect > 0.05,
        format!(
            "T = {t}, defect {:.2e} over {} words; control T = {:.1e}, defect {:.3}",
            wm.defect, wm.sample_count, bad.toledo, bad.defect
        ),
    )
}

fn reconstruction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut pairs = 0;
    let mut violations = 0;
    let mut outside = 0;
    let start = Instant::now();
    while pairs < 20 {
        let g = random_moebius(&mut rng, 2.0, 3);
        if !g.dominant_exact() {
            continue;
        }
        let h = random_moebius(&mut rng, 2.0, 3);
        let report = reconstruction_check(&CircleOrder, &g, &h, 200).unwrap();
        violations += report.violations.len();
        outside += report.outside_window.len();
        pairs += 1;
    }
    let elapsed = start.elapsed();
    outcome(
        violations == 0 && outside == 0 && elapsed < Duration::from_secs(30),
        format!("{pairs} pairs, n <= 200, {violations} bracket violations, {outside} off-window minima"),
    )
}

fn maslov_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut ok = true;
    let mut quads = 0;
    let perms: [([usize; 3], i32); 6] =
        [([0, 1, 2], 1), ([1, 2, 0], 1), ([2, 0, 1], 1), ([1, 0, 2], -1), ([0, 2, 1], -1), ([2, 1, 0], -1)];
    for n in 1..=3usize {
        let mut found = 0;
        while found < 500 {
            let l: Vec<_> = (0..4).map(|_| random_lagrangian(&mut rng, n)).collect();
            let transverse = (0..4).all(|i| (i + 1..4).all(|j| l[i].transversality_margin(&l[j]).unwrap() > 1e-6));
            if !transverse {
                continue;
            }
            let idx = |a: usize, b: usize, c: usize| kashiwara_index(&l[a], &l[b], &l[c]);
            let (Ok(i234), Ok(i134), Ok(i124), Ok(i123)) = (idx(1, 2, 3), idx(0, 2, 3), idx(0, 1, 3), idx(0, 1, 2)) else {
                continue;
            };
            found += 1;
            ok &= i234 - i134 + i124 - i123 == 0;
            ok &= i123.abs() <= n as i32 && (i123 + n as i32) % 2 == 0;
            for (p, sign) in perms {
                ok &= idx(p[0], p[1], p[2]).map(|v| v == sign * i123).unwrap_or(false);
            }
            let beta = maslov_beta(&l[0], &l[1], &l[2]).unwrap();
            ok &= (2.0 * beta).fract() == 0.0;
            let g = random_hamiltonian_exp(n, rng.random(), 1.0).unwrap();
            if let Ok(moved) = kashiwara_index(&l[0].apply(&g), &l[1].apply(&g), &l[2].apply(&g)) {
                ok &= moved == i123;
            }
        }
        quads += found;
    }
    outcome(ok, format!("{quads} quadruples over n = 1..3"))
}

fn psi_suite() -> Outcome {
    let start = Instant::now();
    let k_iters = 2000;
    let mut ok = true;
    for n in 1..=3 {
        for k in -3..=3 {
            ok &= LiftedSymplectic::central(n, k).psi(k_iters).unwrap().value == k as f64;
        }
    }
    let central_ok = ok;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_tau: f64 = 0.0;
    for _ in 0..200 {
        let f = random_moebius(&mut rng, 1.5, 2);
        let psi = LiftedSymplectic::from_moebius(&f).psi(k_iters).unwrap();
        worst_tau = worst_tau.max((psi.value - f.translation_number_exact()).abs());
    }
    ok &= worst_tau <= 1e-4;
    let mut homogeneity = 0;
    let mut conjugacy = 0;
    for i in 0..100u64 {
        let n = 1 + (i % 3) as usize;
        let lift = |seed: u64, w: i64| {
            LiftedSymplectic::central(n, w).compose(&LiftedSymplectic::base(random_hamiltonian_exp(n, seed, 0.7).unwrap()))
        };
        let g = lift(i, (i % 3) as i64 - 1);
        let m = 2 + (i % 7) as i64;
        let a = g.psi(k_iters).unwrap();
        let b = g.power(m).psi(k_iters).unwrap();
        if (b.value - m as f64 * a.value).abs() > 2.0 * (b.error + m as f64 * a.error) {
            homogeneity += 1;
        }
        let h = lift(i + 1000, 0);
        let c = h.compose(&g).compose(&h.inverse()).psi(k_iters).unwrap();
        if (c.value - a.value).abs() > 2.0 * (c.error + a.error) {
            conjugacy += 1;
        }
    }
    ok &= homogeneity == 0 && conjugacy == 0;
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(120);
    outcome(
        ok,
        format!(
            "central exact: {central_ok}, max |psi - tau| {worst_tau:.1e}, homogeneity failures {homogeneity}, conjugacy failures {conjugacy}"
        ),
    )
}

fn dominance_coherence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut incoherent = 0;
    let mut verdicts = [0usize; 3];
    for i in 0..300u64 {
        let n = 1 + (i % 3) as usize;
        let causal = i % 2 == 0;
        let g = if causal {
            let a = random_symmetric(2 * n, &mut rng, 1.0);
            let s = &a * a.transpose() + DMatrix::identity(2 * n, 2 * n) * 0.05;
            LiftedSymplectic::exp_causal(&s, 8).unwrap()
        } else {
            let w = rng.random_range(-1..=2);
            LiftedSymplectic::central(n, w).compose(&LiftedSymplectic::base(random_hamiltonian_exp(n, i, 0.8).unwrap()))
        };
        let verdict = g.dominance_verdict(32, i, 1000).unwrap();
        let psi = g.psi(1000).unwrap();
        match verdict {
            DominanceVerdict::CertifiedDominant => {
                verdicts[0] += 1;
                if psi.value <= 0.0 {
                    incoherent += 1;
                }
            }
            DominanceVerdict::NotDominant(_) => {
                verdicts[1] += 1;
                if causal {
                    incoherent += 1;
                }
            }
            DominanceVerdict::Unknown => verdicts[2] += 1,
        }
    }
    outcome(
        incoherent == 0,
        format!(
            "300 samples: {} dominant, {} not dominant, {} unknown, {incoherent} incoherent",
            verdicts[0], verdicts[1], verdicts[2]
        ),
    )
}

fn heisenberg() -> Outcome {
    let f = fuchsian_closed_genus2();
    let cube = sym_cube(&f).unwrap();
    let pi = direct_sum(&cube, &orientation_reverse(&f)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut coboundary_max: f64 = 0.0;
    for _ in 0..20 {
        let v = DVector::from_fn(6, |_, _| rng.random_range(-1.0..1.0));
        coboundary_max = coboundary_max.max(cocycle_obstruction(&pi, &coboundary(&pi, &v)).unwrap().abs());
    }
    let b: Vec<DVector<f64>> = (0..4).map(|_| DVector::from_fn(6, |_, _| rng.random_range(-1.0..1.0))).collect();
    let (built, result) = heisenberg_extend(&pi, &b, Some(2)).unwrap();
    let HeisenbergOutcome::Built { scale, obstruction } = result else {
        return outcome(false, format!("no extension: {result:?}"));
    };
    let rho = built.expect("built");
    let unscaled = cocycle_obstruction(&pi, &project_to_cocycles(&pi, &b).unwrap()).unwrap();
    let t_rho = toledo(&rho).unwrap();
    let t_pi = toledo(&pi).unwrap();
    let t_cube = toledo(&cube).unwrap().value;
    let tol = 2.0 * (t_rho.error_estimate + t_pi.error_estimate);
    let wm = wm_defect(&rho, &f, 1, 64).unwrap();
    let convention = if (t_rho.value - 1.0).abs() < 1e-6 { "n1 - n2" } else { "(n1 - n2)|chi|" };
    outcome(
        coboundary_max <= 1e-8
            && obstruction.abs() <= 1e-8
            && rho.relator_residual() <= 1e-7
            && (t_rho.value - t_pi.value).abs() <= tol.max(1e-9)
            && wm.defect <= 0.05,
        format!(
            "coboundary obstruction {coboundary_max:.1e}, unscaled {unscaled:.3}, rescaled by {scale:.4} to {obstruction:.1e}; \
             residual {:.1e}; T(rho) = {} = T(pi) = {t_cube} - 2, matching {convention}; defect {:.2e}",
            rho.relator_residual(),
            t_rho.value,
            wm.defect
        ),
    )
}

fn lift_independence_and_additivity() -> Outcome {
    let mut shifted = 0;
    let mut changed = 0;
    let f = fuchsian_closed_genus2();
    let torus = fuchsian_bounded(1, 1, [3.0, 3.0, 3.5]).unwrap();
    let pants = fuchsian_bounded(0, 3, [3.0, 3.0, -3.0]).unwrap();
    let free = random_free(torus.presentation(), 2, 9, 1.0).unwrap();
    for rep in [&f, &torus, &pants, &free] {
        let base = rep.base_lifts();
        let reference = toledo_with_lifts(rep, &base, BOUNDARY_ITERS).unwrap().value;
        for i in 0..base.len() {
            for k in [-3, -1, 1, 2] {
                let mut lifts = base.clone();
                lifts[i] = lifts[i].deck(k);
                shifted += 1;
                if toledo_with_lifts(rep, &lifts, BOUNDARY_ITERS).unwrap().value != reference {
                    changed += 1;
                }
            }
        }
    }
    let mut additivity = 0;
    for seed in 0..50u64 {
        let p = SurfacePresentation::new((seed % 2) as usize, 1 + 2 * ((seed + 1) % 2) as usize).unwrap();
        let a = random_free(&p, 1 + (seed % 2) as usize, seed, 1.0).unwrap();
        let b = random_free(&p, 1, seed + 500, 0.8).unwrap();
        let (ta, tb) = (toledo(&a).unwrap(), toledo(&b).unwrap());
        let ts = toledo(&direct_sum(&a, &b).unwrap()).unwrap();
        let tol = 2.0 * (ta.error_estimate + tb.error_estimate + ts.error_estimate);
        if (ts.value - ta.value - tb.value).abs() > tol {
            additivity += 1;
        }
    }
    outcome(
        changed == 0 && additivity == 0,
        format!("{shifted} deck shifts, {changed} changed T; 50 sums, {additivity} additivity failures"),
    )
}

fn q_causal_scan() -> Outcome {
    let f = fuchsian_closed_genus2();
    let pd = polydisk(&[&f, &f]).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for q in 0..=2 {
        let r = q_causal_check(&pd, &f, q, 11, 64).unwrap();
        ok &= r.not_dominant == 0;
        parts.push(format!("q={q}: {}/{} dominant", r.certified_dominant, r.eligible));
    }
    let rho_a = doubled_torus(&f.images()[0], &f.images()[1]).unwrap();
    let triple = cancelling_triple(&f, &rho_a).unwrap();
    let mut recorded = Vec::new();
    for q in 0..=2 {
        let r = q_causal_check(&triple, &f, q, 11, 64).unwrap();
        recorded.push(format!("q={q}: {} refuted, {} unknown", r.not_dominant, r.unknown));
    }
    outcome(ok, format!("polydisk {}; cancelling triple (recorded) {}", parts.join(", "), recorded.join(", ")))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("calibration", calibration),
        ("milnor-wood sweep", milnor_wood_sweep),
        ("polydisk maximality", polydisk_maximality),
        ("cancelling triple", cancelling_triple_check),
        ("reconstruction", reconstruction),
        ("maslov cocycle", maslov_suite),
        ("psi suite", psi_suite),
        ("dominance coherence", dominance_coherence),
        ("heisenberg extension", heisenberg),
        ("lift independence and additivity", lift_independence_and_additivity),
        ("q-causal scan", q_causal_scan),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let (o, elapsed) = timed(run);
        let mark = if o.passed { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {mark} {name} ({:.2} s): {}", i + 1, elapsed.as_secs_f64(), o.detail);
        if !o.passed {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
