use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sspd-cavity")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

/// `quantity,value,unit` lookup in a design report.
fn report_value(csv: &str, quantity: &str) -> f64 {
    csv.lines()
        .find_map(|l| {
            let mut cols = l.split(',');
            (cols.next() == Some(quantity)).then(|| cols.next().unwrap().parse().unwrap())
        })
        .unwrap_or_else(|| panic!("{quantity} missing from\n{csv}"))
}

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines().skip(1).map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect()
}

fn argmax(rows: &[Vec<f64>], col: usize) -> f64 {
    rows.iter().max_by(|a, b| a[col].total_cmp(&b[col])).unwrap()[0]
}

#[test]
fn design_ssc_half_filling() {
    let out = run(&["design", "--cavity", "ssc", "--f", "0.5"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(format!("{:.1}", report_value(&text, "wire_thickness")), "11.6");
    assert!((report_value(&text, "impedance_ratio") - 1.0).abs() < 0.02);
}

#[test]
fn design_dsc_filling_0_4() {
    let out = run(&["design", "--cavity", "dsc", "--f", "0.4"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(format!("{:.1}", report_value(&text, "wire_thickness")), "8.2");
    assert!(text.contains("transformer_matched,true,"));
}

#[test]
fn design_mlc_wrong_ordering() {
    let out = run(&["design", "--cavity", "mlc", "--c1", "Ta2O5", "--c2", "SiO2"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with("error: ordering: "), "{err}");
    assert!(err.contains("smaller index"));
}

#[test]
fn unknown_material_is_single_line_error() {
    let out = run(&["design", "--cavity", "ssc", "--dielectric", "Mithril"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr(&out).trim(), "error: unknown-material: unknown material `Mithril`");
}

#[test]
fn usage_errors_exit_one() {
    let out = run(&["design", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("error: usage: "));
}

#[test]
fn wire_sweep_peaks_at_design() {
    let out = run(&["sweep", "--cavity", "ssc", "--from", "2", "--to", "25", "--step", "0.1"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().next().unwrap(), "x_nm,A_analytic,A_tmm,eta_ratio");
    let data = rows(&text);
    assert_eq!(data.len(), 231);
    assert!((argmax(&data, 1) - 11.6).abs() < 0.15);
    assert!((argmax(&data, 2) - 11.6).abs() < 0.3);
    let worst = data.iter().map(|r| (r[1] - r[2]).abs()).fold(0.0, f64::max);
    assert!(worst < 0.02, "{worst}");
}

#[test]
fn lossless_sweep_absorbs_nothing() {
    let out =
        run(&["sweep", "--cavity", "ssc", "--f", "0", "--mirror", "pec", "--from", "1", "--to", "25", "--step", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    for r in rows(&stdout(&out)) {
        assert!(r[1].abs() < 1e-10 && r[2].abs() < 1e-10, "{r:?}");
    }
}

#[test]
fn dsc_dielectric_sweep_peak() {
    let out = run(&["sweep", "--cavity", "dsc", "--f", "0.5", "--variable", "dielectric"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let data = rows(&stdout(&out));
    let peak = argmax(&data, 2);
    assert!((peak - 218.0).abs() <= 2.0, "{peak}");
}

#[test]
fn bad_sweep_range() {
    let out = run(&["sweep", "--from", "10", "--to", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("error: range: "));
    let out = run(&["sweep", "--from", "1", "--to", "2", "--step", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn thick_wire_warns_with_exit_two() {
    let out = run(&["sweep", "--cavity", "ssc", "--from", "30", "--to", "40", "--step", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("warning: "));
    assert_eq!(rows(&stdout(&out)).len(), 11);
}

#[test]
fn impedance_ratio_crosses_one_at_optimum() {
    let out = run(&["impedance", "--cavity", "ssc", "--from", "2", "--to", "25", "--step", "0.1"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("x_nm,A_analytic,A_tmm,eta_ratio,eta_ratio_analytic\n"));
    let data = rows(&text);
    let closest = data.iter().min_by(|a, b| (a[3] - 1.0).abs().total_cmp(&(b[3] - 1.0).abs())).unwrap();
    assert!((closest[0] - 11.6).abs() < 0.3, "{closest:?}");
}

#[test]
fn table2_default_passes() {
    let out = run(&["table2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 16);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",PASS")));
}

#[test]
fn table2_perturbed_nbn_fails_wire_cells() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("materials.toml");
    let extinction = 4.293 * 1.1;
    std::fs::write(
        &path,
        format!(
            "[[materials]]\nname = \"NbN\"\nn_re = 4.905\nn_im = {extinction}\nkind = \"metal\"\noverride = true\n"
        ),
    )
    .unwrap();
    let out = run(&["table2", "--materials", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("error: tolerance: "));
    let text = stdout(&out);
    let wire: Vec<&str> = text.lines().filter(|l| l.split(',').nth(1) == Some("wire")).collect();
    assert_eq!(wire.len(), 9);
    assert!(wire.iter().all(|l| l.ends_with(",FAIL")), "{text}");
}

#[test]
fn structured_report_has_raw_values() {
    let out = run(&["table2", "--format", "structured-report"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["command"], "table2");
    let cells = doc["result"]["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 15);
    let first = &cells[0];
    assert!(first["analytic_nm"].as_f64().unwrap() != first["published_nm"].as_f64().unwrap());
    assert_eq!(first["analytic_display"], "11.6");
}

#[test]
fn output_file_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let out = run(&[
            "sweep",
            "--cavity",
            "dsc",
            "--from",
            "2",
            "--to",
            "20",
            "--step",
            "0.25",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        assert!(out.stdout.is_empty());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let x = run(&["design", "--cavity", "mlc", "--format", "structured-report"]);
    let y = run(&["design", "--cavity", "mlc", "--format", "structured-report"]);
    assert_eq!(x.stdout, y.stdout);
}

#[test]
fn stack_file_drives_design() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("stack.toml");
    std::fs::write(&path, "cavity = \"dsc\"\n[wire]\nslit_nm = 120.0\n").unwrap();
    let out = run(&["design", "--stack", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(format!("{:.1}", report_value(&stdout(&out), "wire_thickness")), "8.2");
    let clash = run(&["design", "--stack", path.to_str().unwrap(), "--cavity", "ssc"]);
    assert_eq!(clash.status.code(), Some(1));
    std::fs::write(&path, "cavity = \"dsc\"\ncolour = \"red\"\n").unwrap();
    let strict = run(&["design", "--stack", path.to_str().unwrap()]);
    assert_eq!(strict.status.code(), Some(1));
    assert!(stderr(&strict).starts_with("error: config: "));
}

#[test]
fn mlc_convergence_table() {
    let out = run(&["mlc-convergence", "--max-periods", "14"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().next().unwrap(), "periods,A,T,delta");
    assert_eq!(text.lines().count(), 15);
    assert!(stderr(&out).contains("N = 11"));
}
