use std::fs;
use std::path::Path;

use qarch::kernels::rma_weights;
use qarch::pipeline::{
    analyze_series, batch_report, load_manifest, load_prices, load_prices_file, save_prices, AnalysisConfig,
    ReportSource,
};
use qarch::simulate::{run_replicas, simulate, ProcessSpec};
use qarch::stats::InnovationDistribution;
use qarch::{KernelSpec, PriceSeries};

fn null_prices(kernel: &KernelSpec, innovations: usize, seed: u64, name: &str) -> PriceSeries {
    let k = kernel.build().unwrap();
    let len = k.len();
    simulate(&ProcessSpec::linear(k), innovations + len, seed).unwrap().prices(name).unwrap()
}

fn write_prices(path: &Path, series: &PriceSeries) {
    save_prices(fs::File::create(path).unwrap(), series).unwrap();
}

#[test]
fn saved_prices_read_back_bit_for_bit() {
    let series = null_prices(&"rma:20".parse().unwrap(), 9_980, 1, "roundtrip");
    assert_eq!(series.len(), 10_001);
    let mut buf = Vec::new();
    save_prices(&mut buf, &series).unwrap();
    let back = load_prices(buf.as_slice(), "roundtrip").unwrap();
    assert_eq!(back.dates(), series.dates());
    for (a, b) in back.prices().iter().zip(series.prices()) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
}

#[test]
fn null_paths_pass_the_variance_test() {
    let config = AnalysisConfig { assumptions: vec![InnovationDistribution::student(6.0)], ..AnalysisConfig::default() };
    let reports = run_replicas(20, 77, |i, seed| {
        analyze_series(&null_prices(&config.kernel, 50_000, seed, &format!("null{i}")), &config).unwrap()
    });
    let tol = 3.0 * (2.0f64 / 50_000.0).sqrt();
    for r in &reports {
        assert_eq!(r.length, 50_000);
        assert!((r.variance - 1.0).abs() <= tol, "{}: {}", r.name, r.variance);
    }
    let accepted = reports.iter().filter(|r| r.p_var[0].1 > 0.01).count();
    assert!(accepted as f64 >= 0.95 * reports.len() as f64, "{accepted}/{}", reports.len());
}

#[test]
fn reordered_input_is_sorted_and_flagged() {
    let text = "date,price\n2020-01-03,101\n2020-01-02,100\n2020-01-06,102\n";
    let s = load_prices(text.as_bytes(), "x").unwrap();
    assert!(s.reordered());
    assert_eq!(s.prices(), &[100.0, 101.0, 102.0]);
}

#[test]
fn batch_keeps_going_past_a_bad_file() {
    let dir = tempfile::tempdir().unwrap();
    let kernel: KernelSpec = "rma:20".parse().unwrap();
    write_prices(&dir.path().join("a.csv"), &null_prices(&kernel, 500, 1, "a"));
    write_prices(&dir.path().join("b.csv"), &null_prices(&kernel, 500, 2, "b"));
    fs::write(dir.path().join("bad.csv"), "date,price\n2020-01-02,100\n2020-01-03,-5\n").unwrap();
    fs::write(
        dir.path().join("manifest.csv"),
        "name,path,overrides\nA,a.csv,\nBad,bad.csv,\nB,b.csv,kernel=ema:0.9:50;returns=simple\n",
    )
    .unwrap();
    let entries = load_manifest(&dir.path().join("manifest.csv")).unwrap();
    let config = AnalysisConfig { kernel, ..AnalysisConfig::default() };
    let report = batch_report(&entries, &config).unwrap();
    assert_eq!(report.rows.len(), 3);
    assert_eq!(report.failures(), 1);
    let bad = report.rows[1].as_ref().unwrap_err();
    assert_eq!(bad.name, "Bad");
    assert!(bad.message.contains("2020-01-03"), "{}", bad.message);
    let b = report.rows[2].as_ref().unwrap();
    assert!(matches!(b.source, ReportSource::Analyzed { returns: qarch::ReturnKind::Simple, .. }));
    let csv = report.to_csv();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.lines().nth(2).unwrap().starts_with("Bad,"));
    assert!(report.to_text().contains("ERROR:"));

    let again = batch_report(&entries, &config).unwrap();
    assert_eq!(again.to_csv(), csv);
}

#[test]
fn short_series_name_the_required_length() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("short.csv");
    write_prices(&path, &null_prices(&"rma:10".parse().unwrap(), 50, 3, "short"));
    let prices = load_prices_file(&path).unwrap();
    assert_eq!(prices.name(), "short");
    let config = AnalysisConfig { kernel: "rma:10".parse().unwrap(), ..AnalysisConfig::default() };
    let err = analyze_series(&prices, &config).unwrap_err().to_string();
    assert!(err.contains("111"), "{err}");
}

#[test]
fn matched_kernel_reproduces_the_drawn_variance() {
    let kernel = rma_weights(40).unwrap();
    let path = simulate(&ProcessSpec::linear(kernel), 3000, 4).unwrap();
    let config = AnalysisConfig { kernel: "rma:40".parse().unwrap(), ..AnalysisConfig::default() };
    let report = analyze_series(&path.prices("p").unwrap(), &config).unwrap();
    let drawn = qarch::stats::moments(&path.drawn_eps()[40..]).unwrap();
    assert_eq!(report.length, drawn.n);
    assert!((report.variance - drawn.var_hat).abs() <= 1e-9);
}
