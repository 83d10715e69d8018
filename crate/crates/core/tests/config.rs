use std::f64::consts::TAU;

use proptest::prelude::*;
use zeeman_cep::config::{load_config, ConfigDocument, RunConfig, DEFAULTS_PRESET};
use zeeman_cep::scan::{spectrum, Model};

#[test]
fn defaults_preset_round_trips() {
    let a = load_config(DEFAULTS_PRESET).unwrap();
    let text = a.to_toml().unwrap();
    let b = load_config(&text).unwrap();
    assert_eq!(a, b);
    assert_eq!(b.to_toml().unwrap(), text);
    assert!((a.pulse.nu1() - TAU * 50e3).abs() < 1e-9);
    assert!((a.pulse.nu2() - TAU * 150e3).abs() < 1e-9);
}

#[test]
fn full_turn_spectra_are_equal() {
    let a = load_config("[grid]\nomega_points = 41\nphases_deg = [0.0]").unwrap();
    let b = load_config("[grid]\nomega_points = 41\nphases_deg = [360.0]").unwrap();
    for m in [Model::Perturbative, Model::TwoLevelOde] {
        let (a, b) = (a.with_model(m), b.with_model(m));
        let sa = spectrum(&a.grid, &a.pulse, &a.system, &a.integrator, None).unwrap();
        let sb = spectrum(&b.grid, &b.pulse, &b.system, &b.integrator, None).unwrap();
        for (x, y) in sa[0].valid().iter().zip(sb[0].valid()) {
            assert!((x.1 - y.1).abs() <= 1e-12, "{m}: {} vs {}", x.1, y.1);
        }
    }
}

fn arb_document() -> impl Strategy<Value = ConfigDocument> {
    (
        (1.0f64..100.0, 1.0f64..300.0, -720.0f64..720.0, -720.0f64..720.0, 0.0f64..5.0, 0.0f64..5.0, 10.0f64..500.0),
        (prop::option::of(1.0f64..500.0), 0.0f64..1e4, prop::bool::ANY),
        (1.0f64..100.0, 1.0f64..100.0, 2usize..500, prop::collection::vec(-360.0f64..360.0, 0..5)),
        (1e-12f64..1e-6, 1e-15f64..1e-9, prop::option::of(0.01f64..10.0), 1.0f64..8.0, 2usize..5000),
        prop::sample::select(Model::ALL.to_vec()),
    )
        .prop_map(|(pl, sy, gr, it, model)| {
            let mut d = ConfigDocument { model, ..Default::default() };
            (d.pulse.nu1_khz, d.pulse.nu2_khz, d.pulse.phi1_deg, d.pulse.phi2_deg) = (pl.0, pl.1, pl.2, pl.3);
            (d.pulse.b1_ut, d.pulse.b2_ut, d.pulse.fwhm_us) = (pl.4, pl.5, pl.6);
            d.system.omega_khz = sy.0;
            d.system.gamma_per_s = sy.1;
            if sy.2 && sy.0.is_none() {
                d.system.b0_ut = Some(3.0);
            }
            d.grid.omega_min_khz = gr.0;
            d.grid.omega_max_khz = gr.0 + gr.1;
            d.grid.omega_points = gr.2;
            d.grid.phases_deg = gr.3;
            (d.integrator.rel_tol, d.integrator.abs_tol, d.integrator.max_step_us) = (it.0, it.1, it.2);
            (d.integrator.t_cut_multiple, d.integrator.samples) = (it.3, it.4);
            d
        })
}

proptest! {
    #[test]
    fn load_serialize_load_is_identity(doc in arb_document()) {
        let a = RunConfig::from_document(doc).unwrap();
        let b = load_config(&a.to_toml().unwrap()).unwrap();
        prop_assert_eq!(a, b);
    }
}
