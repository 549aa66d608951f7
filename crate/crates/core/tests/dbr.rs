use proptest::prelude::*;
use slotcav::dbr::*;
use slotcav::geometry::{build_solid_guide, GridSpec, Material, SlotArraySpec};

const LAMBDA: f64 = 637.0;

/// Quarter-wave stack reflectance from the admittance recursion: each
/// quarter-wave layer of index `n` maps the load admittance `Y` to `n^2 / Y`.
fn quarter_wave_oracle(layers: &[f64], surround: f64) -> f64 {
    let mut y = surround;
    for &n in layers.iter().rev() {
        y = n * n / y;
    }
    ((surround - y) / (surround + y)).powi(2)
}

fn quarter_wave_stack(layers: &[f64], surround: f64) -> GratingStack {
    let sections = layers.iter().map(|&n| Section { n_eff: n, length: LAMBDA * 1e-3 / (4.0 * n) }).collect();
    GratingStack::from_sections(sections, surround)
}

fn alternating(count: usize, n_hi: f64, n_lo: f64) -> Vec<f64> {
    (0..count).map(|i| if i % 2 == 0 { n_hi } else { n_lo }).collect()
}

#[test]
fn quarter_wave_stack_matches_closed_form() {
    for count in 1..=40 {
        for (hi, lo, s) in [(1.6, 1.31, 1.31), (2.4, 1.0, 1.0), (1.59, 1.31, 1.45)] {
            let layers = alternating(count, hi, lo);
            let got = transfer_matrix(&quarter_wave_stack(&layers, s), LAMBDA).r;
            let want = quarter_wave_oracle(&layers, s);
            assert!((got - want).abs() <= 1e-10, "{count} layers: {got} vs {want}");
        }
    }
}

#[test]
fn quarter_wave_closed_form_by_period_count() {
    // odd stacks H(LH)^N between n_s: Y = (n_H/n_L)^(2N) n_H^2 / n_s
    let (hi, lo, s): (f64, f64, f64) = (1.6, 1.31, 1.31);
    for n in 0..15i32 {
        let y = (hi / lo).powi(2 * n) * hi * hi / s;
        let want = ((s - y) / (s + y)).powi(2);
        let got = transfer_matrix(&quarter_wave_stack(&alternating(2 * n as usize + 1, hi, lo), s), LAMBDA).r;
        assert!((got - want).abs() <= 1e-10);
    }
}

#[test]
fn single_interface_is_fresnel() {
    let (a, b) = (1.31, 1.6);
    let m = interface_matrix(a, b);
    let r = -m[1][0] / m[1][1];
    let want = ((b - a) / (b + a)).powi(2);
    assert!((r.norm_sqr() - want).abs() < 1e-15);
    // a vanishing solid segment leaves no grating at all
    let thin = GratingStack::from_sections(vec![Section { n_eff: b, length: 1e-12 }], a);
    assert!(transfer_matrix(&thin, LAMBDA).r < 1e-20);
}

#[test]
fn half_wave_layer_is_transparent() {
    let s = GratingStack::from_sections(vec![Section { n_eff: 1.6, length: LAMBDA * 1e-3 / (2.0 * 1.6) }], 1.31);
    assert!(transfer_matrix(&s, LAMBDA).r < 1e-24);
}

fn asymmetric_stack() -> impl Strategy<Value = GratingStack> {
    (
        150.0..300.0f64,
        0.1..0.9f64,
        (1usize..40).prop_map(|k| k as f64 * 0.5),
        1.0..2.0f64,
        0.01..1.5f64,
        1.0..2.5f64,
    )
        .prop_map(|(p, duty, np, lo, dn, s)| build_grating(p, duty, np, lo, lo + dn, s).unwrap())
}

proptest! {
    #[test]
    fn energy_is_conserved(stack in asymmetric_stack(), lambda in 400.0..1000.0f64) {
        let (r, t) = amplitudes(&stack, lambda);
        prop_assert!((r.norm_sqr() + t.norm_sqr() - 1.0).abs() <= 1e-12);
        let rt = transfer_matrix(&stack, lambda);
        prop_assert!(rt.r >= 0.0 && rt.r <= 1.0);
        prop_assert_eq!(rt.r + rt.t, 1.0);
    }

    #[test]
    fn reversal_is_reciprocal(stack in asymmetric_stack(), lambda in 400.0..1000.0f64) {
        let fwd = transfer_matrix(&stack, lambda).r;
        let back = transfer_matrix(&stack.reversed(), lambda).r;
        prop_assert!((fwd - back).abs() <= 1e-12);
    }

    #[test]
    fn matrix_determinants(a in 1.0..3.0f64, b in 1.0..3.0f64, n in 1.0..3.0f64, l in 0.0..5.0f64, lambda in 300.0..1500.0f64) {
        let d = det(&interface_matrix(a, b));
        prop_assert!((d.re - a / b).abs() <= 1e-12 && d.im.abs() <= 1e-12);
        let p = det(&propagation_matrix(n, l, lambda));
        prop_assert!((p.norm() - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn integer_periods_with_unequal_duty_are_not_mirror_symmetric() {
    let g = build_grating(220.0, 0.3, 6.0, 1.31, 1.6, 1.31).unwrap();
    let rev = g.reversed();
    assert_ne!(g.sections[0].n_eff, rev.sections[0].n_eff);
    assert!((transfer_matrix(&g, LAMBDA).r - transfer_matrix(&rev, LAMBDA).r).abs() < 1e-12);
}

#[test]
fn grating_layout() {
    let g = build_grating(220.0, 0.5, 4.5, 1.31, 1.6, 1.31).unwrap();
    assert_eq!(g.sections.len(), 9);
    assert_eq!((g.sections[0].n_eff, g.sections[8].n_eff), (1.6, 1.6));
    assert_eq!(build_grating(220.0, 0.5, 0.5, 1.31, 1.6, 1.31).unwrap().sections.len(), 1);
    assert!((build_grating(220.0, 0.5, 14.5, 1.31, 1.6, 1.31).unwrap().length() - 3.19).abs() < 1e-12);
    assert!(build_grating(220.0, 0.5, 2.25, 1.31, 1.6, 1.31).is_err());
    assert!(build_grating(-220.0, 0.5, 2.5, 1.31, 1.6, 1.31).is_err());
}

#[test]
fn reflection_grows_with_period_count() {
    let counts: Vec<f64> = (1..=80).map(|k| k as f64 * 0.5).collect();
    let template = build_grating(220.0, 0.5, 0.5, 1.31, 1.6, 1.31).unwrap();
    let curves = reflectivity_sweep(&template, &[219.0], &counts, LAMBDA).unwrap();
    // half-integer counts are the symmetric gratings; compare like with like
    let odd: Vec<f64> = curves.iter().filter(|c| c.periods.fract() != 0.0).map(|c| c.r_max).collect();
    for w in odd.windows(2) {
        assert!(w[1] > w[0], "{w:?}");
    }
}

#[test]
fn peak_sits_at_the_bragg_period() {
    let (lo, hi) = (1.31, 1.6);
    let step = 0.5;
    let range: Vec<f64> = (0..=160).map(|i| 180.0 + step * i as f64).collect();
    let template = build_grating(220.0, 0.5, 0.5, lo, hi, lo).unwrap();
    for c in reflectivity_sweep(&template, &range, &[9.5, 14.5, 19.5], LAMBDA).unwrap() {
        let bragg = LAMBDA / (lo + hi);
        assert!((c.argmax_period - bragg).abs() <= 2.0 * step, "N_p {}: {} vs {bragg}", c.periods, c.argmax_period);
        assert!((c.argmax_period - 220.0).abs() <= 10.0);
        assert_eq!(c.spectrum.axis, range);
    }
}

#[test]
fn transmission_falls_about_a_decade_per_five_periods() {
    let counts = [9.5, 14.5, 19.5, 24.5, 29.5];
    let t: Vec<f64> =
        counts.iter().map(|&n| transfer_matrix(&build_grating(220.0, 0.5, n, 1.31, 1.6, 1.31).unwrap(), LAMBDA).t).collect();
    let slope = log_linear_slope(&counts, &t).unwrap();
    assert!((slope + 0.2).abs() <= 0.05, "slope {slope}");
    assert!(log_linear_slope(&[1.0], &[0.1]).is_none());
    assert!(log_linear_slope(&[1.0, 1.0], &[0.1, 0.01]).is_none());
}

#[test]
fn paper_period_counts_bracket_the_quoted_losses() {
    let t = |n| transfer_matrix(&build_grating(220.0, 0.5, n, 1.31, 1.6, 1.31).unwrap(), LAMBDA).t;
    let (t14, t19) = (t(14.5), t(19.5));
    assert!(t14 > 0.5e-2 && t14 < 2e-2, "{t14}");
    assert!(t19 > 0.5e-3 && t19 < 2e-3, "{t19}");
}

#[test]
fn section_indices_from_the_mode_solver() {
    let grid = GridSpec::default();
    let slot = SlotArraySpec::diamond_slot();
    let slot_map = grid.cross_section(&slot).unwrap();
    let solid = build_solid_guide(300.0, 110.0, &Material::diamond(), grid.dx, grid.dy, grid.padding).unwrap();
    let (lo, hi) = effective_section_indices(&slot_map, &solid, LAMBDA).unwrap();
    assert!((lo - 1.31).abs() <= 0.05, "n_lo {lo}");
    assert!((hi - 1.6).abs() <= 0.08, "n_hi {hi}");

    let (a, b) = effective_section_indices(&slot_map, &slot_map, LAMBDA).unwrap();
    assert_eq!(a, b);
    let flat = build_grating(220.0, 0.5, 9.5, a, b, a).unwrap();
    assert!(transfer_matrix(&flat, LAMBDA).r < 1e-28);
}
