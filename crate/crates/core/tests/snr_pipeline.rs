use lnakit::nonlinear::{fit_from_specs, two_tone_response, PolynomialAmp, TwoToneSpec};
use lnakit::rf::nf_of_temperature;
use lnakit::snr::*;

fn long(averages: usize, seg: usize) -> SynthSettings {
    SynthSettings {
        duration_s: (averages + 1) as f64 * (seg / 2) as f64 * 100e-9,
        ..Default::default()
    }
}

fn band_power(spec: &SpectrumEstimate, f: f64, half: usize) -> f64 {
    let k = spec.bin_of(f);
    (k - half..=k + half).map(|i| spec.power_w[i]).sum()
}

#[test]
fn two_tone_power_is_sum_of_tones() {
    let s = synth_tones(&[-1e6, 1e6], &[-40.0, -43.0], &SynthSettings::default()).unwrap();
    let expected = dbm_to_watts(-40.0) + dbm_to_watts(-43.0);
    let db = 10.0 * (s.mean_power() / expected).log10();
    assert!(db.abs() < 0.01, "{db}");
    let spec = psd(&s, &WelchSettings::default()).unwrap();
    assert!(((spec.total_power() - s.mean_power()) / s.mean_power()).abs() < 1e-3);
}

#[test]
fn white_noise_floor_is_kt_per_bin() {
    let s = synth_tones(&[0.0], &[-400.0], &long(256, 256)).unwrap();
    let n = add_thermal_noise(&s, 290.0, 99).unwrap();
    let spec = psd(&n, &WelchSettings::default()).unwrap();
    assert!(spec.segments >= 64);
    let floor = spec.power_w.iter().sum::<f64>() / spec.len() as f64;
    let expected = BOLTZMANN * 290.0 * spec.bin_width_hz;
    let db = 10.0 * (floor / expected).log10();
    assert!(db.abs() < 0.3, "{db}");
}

#[test]
fn linear_amp_output_floor() {
    let s = synth_tones(&[0.0], &[-400.0], &long(256, 256)).unwrap();
    let input = add_thermal_noise(&s, 290.0, 1).unwrap();
    let amp = AmplifierSim { amp: PolynomialAmp::linear(4.0, 50.0), t_e: 100.0 };
    let out = amplify(&input, &amp, 2).unwrap();
    let expected = 16.0 * BOLTZMANN * 390.0 * 1e7;
    let db = 10.0 * (out.mean_power() / expected).log10();
    assert!(db.abs() < 0.3, "{db}");
}

#[test]
fn baseband_cubic_reproduces_passband_im3() {
    let amp = fit_from_specs(20.0, -15.0, 50.0).unwrap();
    let pin = -35.0;
    let s = synth_tones(&[-1e6, 1e6], &[pin, pin], &long(64, 1024)).unwrap();
    let out = amplify(&s, &AmplifierSim { amp, t_e: 0.0 }, 0).unwrap();
    let spec = psd(&out, &WelchSettings { segment_len: 1024 }).unwrap();
    let measured = watts_to_dbm(band_power(&spec, -3e6, 4));
    let expected = two_tone_response(&amp, &TwoToneSpec { center_hz: 1.6e9, detuning_hz: 1e6, tone_power_dbm: pin })
        .unwrap()
        .im3_dbm
        .unwrap();
    assert!((measured - expected).abs() < 0.1, "{measured} vs {expected}");
    let upper = watts_to_dbm(band_power(&spec, 3e6, 4));
    assert!((upper - expected).abs() < 0.1);
}

#[test]
fn measured_nf_ignores_linear_gain() {
    let run = |a1: f64| {
        let amp = AmplifierSim { amp: PolynomialAmp::linear(a1, 50.0), t_e: 50.0 };
        run_experiment(&SnrExperiment::one_tone(1e6, -90.0, amp, 512, 8)).unwrap().measurement.tones[0].nf_db
    };
    let (a, b) = (run(3.0), run(6.0));
    assert!((a - b).abs() < 0.01, "{a} vs {b}");
    assert!((a - nf_of_temperature(50.0)).abs() < 0.05);
}

#[test]
fn two_tone_nf_is_symmetric() {
    let amp = AmplifierSim { amp: PolynomialAmp::linear(10.0, 50.0), t_e: 30.0 };
    let exp = SnrExperiment {
        tone_offsets_hz: vec![-1e6, 1e6],
        tone_powers_dbm: vec![-90.0, -90.0],
        ..SnrExperiment::one_tone(0.0, 0.0, amp, 1024, 3)
    };
    let m = run_experiment(&exp).unwrap().measurement;
    assert_eq!(m.tones.len(), 2);
    assert!((m.tones[0].nf_db - m.tones[1].nf_db).abs() < 0.02);
}

#[test]
fn pipeline_is_deterministic() {
    let amp = AmplifierSim { amp: PolynomialAmp::linear(10.0, 50.0), t_e: 1.88 };
    let exp = SnrExperiment::one_tone(1e6, -90.0, amp, 128, 42);
    let a = run_experiment(&exp).unwrap();
    let b = run_experiment(&exp).unwrap();
    assert_eq!(a, b);
    let c = run_experiment(&SnrExperiment { seed: 43, ..exp }).unwrap();
    assert_ne!(a.output.samples, c.output.samples);
}
