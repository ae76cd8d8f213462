use cantor_density::cli::run_command;

fn run(args: &[&str]) -> (i32, String) {
    let mut argv = vec!["cantor-density"];
    argv.extend_from_slice(args);
    run_command(argv)
}

fn json(args: &[&str]) -> serde_json::Value {
    let mut a = vec!["--format", "json"];
    a.extend_from_slice(args);
    let (code, out) = run(&a);
    assert_eq!(code, 0, "{out}");
    serde_json::from_str(&out).unwrap_or_else(|e| panic!("{e}: {out}"))
}

#[test]
fn measure_of_a_rake() {
    let v = json(&["measure", "rake(n*1+1; full)"]);
    assert_eq!(v["lo"], "2/3");
    assert_eq!(v["hi"], "2/3");
}

#[test]
fn density_verdict_text() {
    let (code, out) = run(&["density", "rake(n*0+1; full)", "--point", "(0)"]);
    assert_eq!(code, 0);
    assert!(out.contains("ConvergesTo1"), "{out}");
}

#[test]
fn membership() {
    assert_eq!(run(&["member", "clopen{01}", "--point", "01(1)"]).1.trim(), "In");
    assert_eq!(run(&["member", "clopen{01}", "--point", "(1)"]).1.trim(), "Out");
}

#[test]
fn sparse_construction_json() {
    let v = json(&["construct", "sparse", "--count", "6"]);
    let text = v.to_string();
    assert!(text.contains("101000000000"), "{text}");
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["measure", "clopen{2}"]).0, 1);
    assert_eq!(run(&["measure", "@empty-interior", "--tol", "1/1000000000000000000000000"]).0, 2);
    assert_eq!(run(&["no-such-command"]).0, 1);
    assert_eq!(run(&["--help"]).0, 0);
}

#[test]
fn errors_in_json() {
    let (code, out) = run(&["--format", "json", "measure", "clopen{2}"]);
    assert_eq!(code, 1);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v["error"].as_str().unwrap().contains("1:8"));
}

#[test]
fn game_verification_succeeds() {
    let (code, out) = run(&["game", "verify", "--strategy", "natural_bwd", "--sample", "4", "--seed", "3"]);
    assert_eq!(code, 0, "{out}");
}

#[test]
fn lebesgue_is_seeded() {
    let a = run(&["--seed", "9", "lebesgue", "clopen{01,1}", "--samples", "50", "--depth", "12"]);
    let b = run(&["--seed", "9", "lebesgue", "clopen{01,1}", "--samples", "50", "--depth", "12"]);
    assert_eq!(a.0, 0, "{}", a.1);
    assert_eq!(a, b);
}

#[test]
fn no_floats_in_output() {
    let (_, out) = run(&["measure", "@empty-interior"]);
    assert!(!out.contains('.') || out.contains("..."), "{out}");
}
