use readtask::analysis::{correlation_table, descriptive_stats, detect_outliers, forward_model_pattern, band_patterns, Spearman};
use readtask::corpus::{synthesize_corpus, SynthSpec};
use readtask::evaluation::{within_subject_sentence, EvalConfig};
use readtask::features::{assemble_feature_set, FeatureContext};
use readtask::learners::{fit_scaler, train_svm, SvmParams};

const ZUCO1: [&str; 11] = ["ZAB", "ZDM", "ZDN", "ZGW", "ZJM", "ZJN", "ZJS", "ZKB", "ZKH", "ZKW", "ZMG"];

#[test]
fn planted_saccade_outlier_is_found() {
    let mut spec = SynthSpec::default();
    spec.n_subjects = 11;
    spec.sentences_per_class = 20;
    let mut c = synthesize_corpus(&spec, 10).unwrap();
    for (s, id) in c.subjects.iter_mut().zip(ZUCO1) {
        s.meta.subject_id = id.to_string();
        if id == "ZGW" {
            for sac in s.sentences.iter_mut().flat_map(|r| r.saccades.iter_mut()) {
                sac.duration_ms *= 3.0;
            }
        }
    }
    let r = detect_outliers(&c, "max_sacc_dur", &FeatureContext::default()).unwrap();
    assert_eq!(r.outliers, vec!["ZGW".to_string()]);
    assert_eq!(r.subject_means.len(), 11);

    let err = detect_outliers(&c, "sent_gaze", &FeatureContext::default()).unwrap_err();
    assert_eq!(err.kind(), "parameter");
}

#[test]
fn accuracy_monotone_in_covariate() {
    let mut spec = SynthSpec::default();
    spec.n_subjects = 6;
    let mut c = synthesize_corpus(&spec, 12).unwrap();
    let m = assemble_feature_set(&c, "omission_rate", &FeatureContext::default()).unwrap();
    let r = within_subject_sentence(&m, &EvalConfig::default(), 1).unwrap();
    for (s, u) in c.subjects.iter_mut().zip(&r.subjects) {
        s.meta.speed_tsr = 10.0 - u.accuracy;
    }
    let meta: Vec<_> = c.subjects.iter().map(|s| s.meta.clone()).collect();
    let table = correlation_table(std::slice::from_ref(&r), &meta).unwrap();
    assert_eq!(table.len(), 5);
    let row = table.iter().find(|x| x.covariate == "speed_tsr").unwrap();
    assert!(matches!(row.result, Spearman::Defined { rho, .. } if rho == -1.0));
    assert!(row.significant);
    assert_eq!(correlation_table(&[r], &meta[..5]).unwrap_err().kind(), "data");
}

#[test]
fn descriptive_table_has_three_quantities() {
    let c = synthesize_corpus(&SynthSpec::default(), 3).unwrap();
    let rows = descriptive_stats(&c).unwrap();
    let names: Vec<&str> = rows.iter().map(|r| r.quantity.as_str()).collect();
    assert_eq!(names, ["sentence_length", "reading_speed", "omission_rate"]);
    // Reading time differs by construction, length does not.
    assert!(rows[1].p_value < 1e-6);
    assert!(rows[1].nr.mean > rows[1].tsr.mean);
}

#[test]
fn gamma_pattern_peaks_on_informative_channels() {
    let mut spec = SynthSpec::default();
    spec.n_subjects = 1;
    spec.sentences_per_class = 150;
    let c = synthesize_corpus(&spec, 4).unwrap();
    let m = assemble_feature_set(&c, "electrode_features_gamma", &FeatureContext::default()).unwrap();
    let scaled = fit_scaler(&m).unwrap().apply(&m).unwrap();
    let model = train_svm(&scaled, &SvmParams::default(), 0).unwrap();
    let p = forward_model_pattern(&model, &scaled).unwrap();
    assert_eq!(p[0].label, "TSR");
    let bands = band_patterns(&p[0].values, &m.feature_names).unwrap();
    assert_eq!(bands[0].band, "gamma");
    let v = &bands[0].channel_values;
    let inside = v[..20].iter().sum::<f64>() / 20.0;
    let outside = v[20..].iter().sum::<f64>() / 85.0;
    // TSR raises gamma on channels 0..20.
    assert!(inside > 0.05 && inside > 5.0 * outside.abs(), "{inside} {outside}");
}
