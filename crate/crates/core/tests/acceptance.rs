//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines are always printed. The
//! process fails when a criterion outside `KNOWN_RED` fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use swift_core::density::{
    density_coeffs, density_sum_residual_with, CfEvaluationCache, DensityVariant, ResidualSum,
    SwiftGrid,
};
use swift_core::models::{
    black_price, bs_cf, heston_cf, CharacteristicFunction, HestonCf, HestonParams, VanillaContract,
};
use swift_core::numerics::integrate_adaptive;
use swift_core::numerics::special::sinc;
use swift_core::paramselect::{
    grid_from_halfwidth, initial_halfwidth, refine, select_scale, RefineRule, ScaleRule,
    ToleranceConfig,
};
use swift_core::payoff::{
    forward_range, payoff_coeffs, payoff_moment_primitive, payoff_primitive, PayoffKind,
    PayoffVariant,
};
use swift_core::pricer::{error_metrics, reference_price, swift_price, swift_prices};
use swift_core::sincapprox::{
    sinc_approx, sinc_error_bound, trapezoid_error_bound, SincKind, SincVariant,
};
use swift_core::Execution;

/// Criteria documented as unattainable; they print FAIL without failing the run.
const KNOWN_RED: [u32; 1] = [8];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn refinement_example() -> HestonCf {
    heston_cf(HestonParams::new(4.0, 0.25, 1.0, -0.5, 0.01).unwrap(), 0.01).unwrap()
}

fn first_corner() -> HestonCf {
    heston_cf(HestonParams::new(0.1, 0.25, 3.0, 0.95, 1e-4).unwrap(), 10.0).unwrap()
}

fn wide_corner() -> HestonCf {
    heston_cf(HestonParams::new(0.01, 1.0, 3.0, -0.95, 1e-4).unwrap(), 10.0).unwrap()
}

fn six_digits(a: f64) -> String {
    format!("{a:.5e}")
}

fn criterion_1() -> Outcome {
    let cf = refinement_example();
    let cases = [
        (8, 18, 64, 7.130920268738627e-5),
        (9, 35, 128, 6.961299004415444e-5),
        (8, 35, 128, 8.968050746460676e-10),
        (8, 25, 128, 7.089187974429478e-7),
    ];
    let mut ok = true;
    let mut detail = Vec::new();
    for (m, kappa, j, printed) in cases {
        let g = SwiftGrid::uniform(m, kappa, j).unwrap();
        let mut cache = CfEvaluationCache::new();
        let c = density_coeffs(&cf, &g, DensityVariant::Trapezoid, &mut cache).unwrap();
        let eps = density_sum_residual_with(&c, ResidualSum::EndpointHalved);
        ok &= six_digits(eps) == six_digits(printed);
        detail.push(format!("({m},{kappa},2^{}) {eps:.9e}", j.trailing_zeros()));
    }
    outcome(ok, detail.join(" "))
}

fn criterion_2() -> Outcome {
    let cf = refinement_example();
    let cfg = ToleranceConfig {
        l: 4.0,
        eps_f: 1e-8,
        refine_rule: RefineRule::Romo,
        max_m: 22,
        ..Default::default()
    };
    let g0 = grid_from_halfwidth(initial_halfwidth(&cf, &cfg), 8, &cfg).unwrap();
    let mut cache = CfEvaluationCache::new();
    let (_, trace) = refine(&cf, &g0, &cfg, &mut cache).unwrap();
    let last = trace.last();
    let never = trace.steps.iter().all(|s| s.eps_f > 1e-8);
    let ok = !trace.converged
        && never
        && last.m == 22
        && (5.9e-5..=6.0e-5).contains(&last.eps_f);
    outcome(
        ok,
        format!(
            "{} steps, final m={} kappa={} log2J={} eps_f={:.9e}",
            trace.steps.len(),
            last.m,
            last.kappa,
            last.log2_j,
            last.eps_f
        ),
    )
}

fn criterion_3() -> Outcome {
    let maree = ToleranceConfig { eps_m: 1e-8, ..Default::default() };
    let m0 = select_scale(&refinement_example(), &maree, 0).unwrap();
    let corner = first_corner();
    let at = |eps: f64| {
        let cfg = ToleranceConfig { eps_m: eps, scale_rule: ScaleRule::Leitao, ..Default::default() };
        select_scale(&corner, &cfg, 0).unwrap()
    };
    let (m5, m6) = (at(1e-5), at(1e-6));
    outcome(
        m0 == 9 && m5 == 7 && m6 == 8,
        format!("refinement example m={m0}; first corner m={m5} at 1e-5, m={m6} at 1e-6"),
    )
}

struct ErrorRow {
    m: u32,
    eps_f: f64,
    log2_j: u32,
    printed: [f64; 6],
}

const CORNER_STRIKES: [f64; 6] = [100.0001, 101.0, 110.0, 200.0, 1000.0, 10000.0];

fn criterion_4() -> Outcome {
    let cf = wide_corner();
    let cfg = ToleranceConfig { l: 8.0, eps_f: 1e-8, ..Default::default() };
    let c0 = initial_halfwidth(&cf, &cfg);
    let g0 = grid_from_halfwidth(c0, 9, &cfg).unwrap();
    let mut cache = CfEvaluationCache::new();
    let (g, trace) = refine(&cf, &g0, &cfg, &mut cache).unwrap();
    let rel = (g.c - 1094.6).abs() / 1094.6;
    outcome(
        trace.converged && rel <= 5e-3,
        format!(
            "cumulant c={c0:.4}, refined c={:.4} (rel {rel:.2e}) after {} steps, kappa={}",
            g.c,
            trace.steps.len(),
            g.kappa
        ),
    )
}

fn criterion_5() -> Outcome {
    let cf = wide_corner();
    let printed = [
        3.032277336306425,
        3.2085075362598046,
        10.087170493728104,
        100.00002701432814,
        900.0000000000015,
        9900.0,
    ];
    let mut worst = 0.0f64;
    for (k, p) in CORNER_STRIKES.iter().zip(printed) {
        let put = VanillaContract::put(100.0, *k, 10.0).unwrap();
        let r = reference_price(&cf, &put).unwrap();
        worst = worst.max((r - p).abs());
    }
    outcome(worst <= 1e-8, format!("max |reference - printed| = {worst:.2e} (put prices)"))
}

fn criterion_6() -> Outcome {
    let rows = [
        ErrorRow {
            m: 9,
            eps_f: 1e-8,
            log2_j: 21,
            printed: [-3.17e-07, -3.20e-07, -3.48e-07, -6.34e-07, -3.17e-06, -3.17e-05],
        },
        ErrorRow {
            m: 8,
            eps_f: 1e-6,
            log2_j: 19,
            printed: [-4.37e-05, -4.38e-05, -4.82e-05, -8.74e-05, -4.37e-04, -4.37e-03],
        },
    ];
    let cf = wide_corner();
    let calls: Vec<VanillaContract> =
        CORNER_STRIKES.iter().map(|&k| VanillaContract::call(100.0, k, 10.0).unwrap()).collect();
    let refs: Vec<f64> = calls.iter().map(|c| reference_price(&cf, c).unwrap()).collect();
    let mut ok = true;
    let mut detail = Vec::new();
    for row in rows {
        let cfg = ToleranceConfig { l: 8.0, eps_f: row.eps_f, ..Default::default() };
        let g0 = grid_from_halfwidth(initial_halfwidth(&cf, &cfg), row.m, &cfg).unwrap();
        let mut cache = CfEvaluationCache::new();
        let (g, _) = refine(&cf, &g0, &cfg, &mut cache).unwrap();
        let prices = swift_prices(
            &cf,
            &calls,
            &g,
            DensityVariant::MidpointVieta,
            PayoffVariant::new(PayoffKind::Sem0),
            &mut cache,
            Execution::Parallel,
        )
        .unwrap();
        let errs: Vec<f64> = prices.iter().zip(&refs).map(|(p, r)| p.price - r).collect();
        let in_band = errs.iter().zip(row.printed).all(|(e, p)| {
            let ratio = e / p;
            (0.5..=2.0).contains(&ratio)
        });
        ok &= in_band && g.log2_j_payoff() == row.log2_j;
        detail.push(format!(
            "m={} eps_f={:e} log2J={} errors [{}]",
            row.m,
            row.eps_f,
            g.log2_j_payoff(),
            errs.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join(" ")
        ));
    }
    outcome(ok, detail.join("; "))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut violations = 0;
    let mut worst_ratio = 0.0f64;
    for _ in 0..500 {
        let x: f64 = rng.gen_range(-500.0..500.0);
        let j = rng.gen_range((x.abs().ceil() as usize).max(1)..=4096);
        let exact = sinc(x);
        for (kind, bound) in [
            (SincKind::VietaMidpoint, sinc_error_bound(x, j).unwrap()),
            (SincKind::Trapezoid, trapezoid_error_bound(x, j).unwrap()),
        ] {
            let err = (sinc_approx(x, SincVariant::new(kind, j).unwrap()) - exact).abs();
            // rounding floor of the cosine sums
            if err > bound + 1e-14 {
                violations += 1;
            }
            if bound > 0.0 {
                worst_ratio = worst_ratio.max(err / bound);
            }
        }
    }
    outcome(
        violations == 0,
        format!("500 draws x 2 rules, {violations} violations, max error/bound {worst_ratio:.3}"),
    )
}

fn criterion_8() -> Outcome {
    let cf = refinement_example();
    let cfg = ToleranceConfig { l: 8.0, ..Default::default() };
    let g0 = grid_from_halfwidth(initial_halfwidth(&cf, &cfg), 6, &cfg).unwrap();
    let g = SwiftGrid::new(6, g0.kappa, 1 << 10, 1 << 4, g0.c).unwrap();
    let contracts: Vec<VanillaContract> = (0..=20)
        .map(|i| {
            let k = 0.9 + 0.01 * i as f64;
            let c = VanillaContract::put(1.0, k, 0.01).unwrap();
            if k < 1.0 {
                c
            } else {
                c.with_style(swift_core::models::OptionStyle::Call)
            }
        })
        .collect();
    let refs: Vec<f64> = contracts.iter().map(|c| reference_price(&cf, c).unwrap()).collect();
    let mut cache = CfEvaluationCache::new();
    let rmse = |kind: PayoffKind, cache: &mut CfEvaluationCache| {
        let p = swift_prices(
            &cf,
            &contracts,
            &g,
            DensityVariant::Trapezoid,
            PayoffVariant::new(kind),
            cache,
            Execution::Parallel,
        )
        .unwrap();
        error_metrics(&p.iter().map(|r| r.price).collect::<Vec<_>>(), &refs).unwrap().rmse
    };
    let em: Vec<f64> = [PayoffKind::Sem0, PayoffKind::Fem0, PayoffKind::Fem1]
        .into_iter()
        .map(|k| rmse(k, &mut cache))
        .collect();
    let direct: Vec<f64> = [
        PayoffKind::DirectMidpoint,
        PayoffKind::DirectTrapezoid,
        PayoffKind::DirectSimpson,
        PayoffKind::DirectBoole,
    ]
    .into_iter()
    .map(|k| rmse(k, &mut cache))
    .collect();
    let spread = em.iter().cloned().fold(0.0, f64::max) / em.iter().cloned().fold(f64::INFINITY, f64::min);
    let min_ratio = direct.iter().map(|d| d / em[0]).fold(f64::INFINITY, f64::min);
    let ok = spread <= 2.0 && min_ratio >= 10.0;
    outcome(
        ok,
        format!(
            "m=6 kappa={} J=2^4: SEM0/FEM0/FEM1 rmse {:.3e}/{:.3e}/{:.3e} (spread {spread:.2}x); \
             smallest DIRECT/SEM0 ratio {min_ratio:.2}x (needs 10x)",
            g.kappa, em[0], em[1], em[2]
        ),
    )
}

/// Mid-point and trapezoid density sums evaluated one term at a time.
fn naive_density(cf: &dyn CharacteristicFunction, g: &SwiftGrid, midpoint: bool) -> Vec<f64> {
    let j = g.j_density;
    let root = 2f64.powf(g.m as f64 / 2.0);
    let s = g.scale();
    g.indices()
        .map(|k| {
            let mut acc = 0.0;
            if midpoint {
                for i in 1..=j {
                    let t = PI * (i as f64 - 0.5) / j as f64;
                    acc += (cf.eval(s * t) * Complex64::from_polar(1.0, t * k as f64)).re;
                }
            } else {
                for i in 0..=j {
                    let w = if i == 0 || i == j { 0.5 } else { 1.0 };
                    let t = PI * i as f64 / j as f64;
                    acc += w * (cf.eval(s * t) * Complex64::from_polar(1.0, t * k as f64)).re;
                }
            }
            root / j as f64 * acc
        })
        .collect()
}

/// Trapezoidal cosine expansion of the payoff, with the optional
/// first-derivative term, evaluated one node at a time.
fn naive_fem(contract: &VanillaContract, g: &SwiftGrid, with_d1: bool) -> Vec<f64> {
    let x = contract.log_moneyness();
    let (lo, hi) = forward_range(g, x).unwrap();
    let j = g.j_payoff;
    let jf = j as f64;
    let s = g.scale();
    let root = 2f64.powf(g.m as f64 / 2.0);
    g.indices()
        .map(|k| {
            let kf = k as f64;
            let mut acc = 0.0;
            for i in 0..=j {
                let w = if i == 0 || i == j { 0.5 } else { 1.0 };
                let t = PI * i as f64 / jf;
                acc += w * payoff_primitive(s * t, -t * kf, lo, hi, x).0;
            }
            let mut v = contract.forward * root / jf * acc;
            if with_d1 {
                let p = PI * s;
                let m1 = payoff_moment_primitive(p, -PI * kf, lo, hi, x).1;
                let m0 = payoff_primitive(p, -PI * kf, lo, hi, x).1;
                v += PI * root * contract.forward / (12.0 * jf * jf) * (s * m1 - kf * m0);
            }
            v
        })
        .collect()
}

fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

fn criterion_9() -> Outcome {
    let cf = refinement_example();
    let g = SwiftGrid::uniform(4, 8, 16).unwrap();
    let mut cache = CfEvaluationCache::new();
    let mut fft_err = 0.0f64;
    for (dv, mid) in [(DensityVariant::MidpointVieta, true), (DensityVariant::Trapezoid, false)] {
        let c = density_coeffs(&cf, &g, dv, &mut cache).unwrap();
        fft_err = fft_err.max(max_rel(&c.values, &naive_density(&cf, &g, mid)));
    }

    // real-space integral of the Gaussian density against the Vieta cosine sum
    let bs = bs_cf(0.25, 1.0).unwrap();
    let gv = SwiftGrid::uniform(3, 12, 16).unwrap();
    let c = density_coeffs(&bs, &gv, DensityVariant::MidpointVieta, &mut CfEvaluationCache::new()).unwrap();
    let (mu, sd) = (-0.5 * 0.0625, 0.25);
    let root = 2f64.powf(1.5);
    let vieta: Vec<f64> = gv
        .indices()
        .map(|k| {
            let f = |y: f64| {
                let u = 8.0 * y - k as f64;
                let sum: f64 = (1..=16).map(|j| (PI * (2 * j - 1) as f64 * u / 32.0).cos()).sum();
                bs.density(y) * sum / 16.0
            };
            root * integrate_adaptive(f, mu - 14.0 * sd, mu + 14.0 * sd, 1e-15, 0.0, 400).value
        })
        .collect();
    let vieta_err = max_rel(&c.values, &vieta);

    let put = VanillaContract::put(1.0, 1.064, 1.0).unwrap();
    let gp = SwiftGrid::uniform(6, 5, 16).unwrap();
    let mut fem_err = 0.0f64;
    for (kind, d1) in [(PayoffKind::Fem0, false), (PayoffKind::Fem1, true)] {
        let v = payoff_coeffs(&put, &gp, PayoffVariant::new(kind)).unwrap();
        fem_err = fem_err.max(max_rel(&v.values, &naive_fem(&put, &gp, d1)));
    }

    let bs = bs_cf(0.2, 1.0).unwrap();
    let cfg = ToleranceConfig { eps_m: 1e-10, eps_f: 1e-12, ..Default::default() };
    let m = select_scale(&bs, &cfg, 0).unwrap();
    let g0 = grid_from_halfwidth(initial_halfwidth(&bs, &cfg), m, &cfg).unwrap();
    let (gb, _) = refine(&bs, &g0, &cfg, &mut CfEvaluationCache::new()).unwrap();
    let atm = VanillaContract::call(100.0, 100.0, 1.0).unwrap();
    let p = swift_price(&bs, &atm, &gb, DensityVariant::MidpointVieta, PayoffVariant::default()).unwrap();
    let bs_err = (p.price - black_price(&atm, 0.2)).abs();

    let ok = fft_err <= 1e-12 && vieta_err <= 1e-12 && fem_err <= 1e-12 && bs_err <= 1e-9;
    outcome(
        ok,
        format!(
            "FFT vs naive {fft_err:.1e}; Vieta assembly {vieta_err:.1e}; FEM0/FEM1 FFT vs direct {fem_err:.1e}; \
             Black-Scholes ATM (m={m}) {bs_err:.1e}"
        ),
    )
}

fn criterion_10() -> Outcome {
    let cf = refinement_example();
    let j = 64;
    let mut detail = Vec::new();
    let mut ok = true;
    for (dv, expected) in [(DensityVariant::Trapezoid, j), (DensityVariant::MidpointVieta, 2 * j)] {
        let mut cache = CfEvaluationCache::new();
        let g = SwiftGrid::uniform(8, 35, j).unwrap();
        density_coeffs(&cf, &g, dv, &mut cache).unwrap();
        let before = cache.evaluations();
        let g2 = SwiftGrid::uniform(8, 35, 2 * j).unwrap();
        density_coeffs(&cf, &g2, dv, &mut cache).unwrap();
        let added = cache.evaluations() - before;
        ok &= added == expected;
        detail.push(format!("{} J=64->128: {added} new", dv.name()));
    }
    outcome(ok, detail.join(", "))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome, Option<Duration>); 10] = [
        (1, "refinement residual digits", criterion_1, Some(Duration::from_secs(1))),
        (2, "Romo non-convergence through m=22", criterion_2, Some(Duration::from_secs(60))),
        (3, "scale selection", criterion_3, None),
        (4, "truncation width of the wide corner case", criterion_4, None),
        (5, "reference prices", criterion_5, Some(Duration::from_secs(1))),
        (6, "wide corner signed errors", criterion_6, Some(Duration::from_secs(120))),
        (7, "sinc error bound", criterion_7, None),
        (8, "payoff variant ordering at m=6", criterion_8, None),
        (9, "oracle equivalences", criterion_9, None),
        (10, "evaluation reuse on J doubling", criterion_10, None),
    ];
    let mut unexpected = Vec::new();
    for (id, name, run, limit) in criteria {
        let start = Instant::now();
        let o = run();
        let elapsed = start.elapsed();
        let in_time = limit.map_or(true, |l| elapsed <= l);
        let pass = o.pass && in_time;
        let timing = match limit {
            Some(l) => format!("{:.2}s, limit {}s", elapsed.as_secs_f64(), l.as_secs()),
            None => format!("{:.2}s", elapsed.as_secs_f64()),
        };
        let known = KNOWN_RED.contains(&id);
        println!(
            "criterion {id:>2} {}: {name}: {} ({timing}){}",
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            if !pass && known { " [known red, see README]" } else { "" },
        );
        if !pass && !known {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
