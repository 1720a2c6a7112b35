use std::path::Path;
use std::process::Command;

use tml_cli::document::{deserialize, serialize};
use tml_cli::{run_script, Session};

fn golden(name: &str) -> (String, String) {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let script = std::fs::read_to_string(dir.join(format!("{name}.tml"))).unwrap();
    let transcript = std::fs::read_to_string(dir.join(format!("{name}.out"))).unwrap();
    (script, transcript)
}

fn tml(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_tml")).args(args).output().unwrap()
}

#[test]
fn golden_transcripts() {
    for name in ["map", "pairs", "triples", "factorial", "swap", "errors"] {
        let (script, expected) = golden(name);
        let (got, ok) = run_script(&mut Session::default(), &script, true);
        assert_eq!(got, expected, "{name}");
        assert_eq!(ok, name != "errors", "{name}");
    }
}

#[test]
fn transcripts_are_deterministic() {
    let (script, _) = golden("map");
    let a = run_script(&mut Session::default(), &script, false).0;
    let b = run_script(&mut Session::default(), &script, false).0;
    assert_eq!(a, b);
}

#[test]
fn binary_runs_scripts() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.tml");
    std::fs::write(&empty, "").unwrap();
    let out = tml(&["--script", empty.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());

    let bad = dir.path().join("bad.tml");
    std::fs::write(&bad, "1 + true;\n2;\n").unwrap();
    let out = tml(&["--script", bad.to_str().unwrap()]);
    assert!(!out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("error: type error") && !text.contains("val it = 2"));

    let out = tml(&["--keep-going", "--script", bad.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("error: type error") && text.contains("val it = 2 : int"));

    let golden_map = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/map.tml");
    let out = tml(&["--script", golden_map.to_str().unwrap()]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), golden("map").1);
}

#[test]
fn fuel_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("loop.tml");
    std::fs::write(&script, "fun loop(n: int): int = loop n;\nloop 0;\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_tml"))
        .env("TML_FUEL", "77")
        .args(["--keep-going", "--script", script.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(String::from_utf8(out.stdout).unwrap().contains("fuel exhausted after 77 steps"));
}

#[test]
fn save_then_load_answers_alike() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("map.tmltrace");
    let (script, _) = golden("map");
    let mut s = Session::default();
    run_script(&mut s, &script, false);
    let queries = ["where t", "dependency t", "expression t", "show t", "slice t [2, _, _]", "obfuscate t [L |-> 2]", "replay t [L1 |-> 5]"];
    let before: Vec<String> = queries.iter().map(|q| s.command(q).unwrap()).collect();
    s.command(&format!(":save t {}", file.display())).unwrap();

    let mut fresh = Session::default();
    let loaded = fresh.command(&format!(":load t {}", file.display())).unwrap();
    assert_eq!(loaded, "val t = <trace> : ({L:int,L1:int,L2:int,L3:int}, int list) trace");
    let after: Vec<String> = queries.iter().map(|q| fresh.command(q).unwrap()).collect();
    assert_eq!(before, after);

    let bytes = std::fs::read(&file).unwrap();
    assert_eq!(serialize(&deserialize(&bytes).unwrap()), bytes);
}

#[test]
fn canonical_format_prints_json() {
    let mut s = Session::default();
    s.command(":format canonical").unwrap();
    s.command("trace (let x = (7@y, 1@z) in (snd x, fst x))").unwrap();
    let shown = s.command("show it").unwrap();
    assert!(shown.starts_with("{\"Let\":"), "{shown}");
    let sliced = s.command("slice it (1, _)").unwrap();
    assert!(sliced.starts_with("{\"version\":1,\"body\":{\"slice\":"), "{sliced}");
}

#[test]
fn labels_are_unique_and_closed() {
    let mut s = Session::default();
    s.command("val y = 2@L").unwrap();
    assert!(s.command("trace (1@L + y)").unwrap_err().to_string().contains("already in use"));
    assert!(s.command("trace ((fun f(x: int): int. x + 1@M) 2)").is_err());
    // Labels on the parts of a labelled value name paths below it.
    s.command("trace (fst ((1@A, 2)@P))").unwrap();
    assert_eq!(s.command("where it").unwrap(), "val it = 1@{A}");
    s.command("trace ((1@A, 2)@P)").unwrap();
    assert_eq!(s.command("dependency it").unwrap(), "val it = (1@{A},2@{})@{P}");
}

#[test]
fn check_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("fst.toml");
    std::fs::write(
        &file,
        r#"program = "fst (x, y)"
ints = [0, 1]
property = "obfuscation"
inputs = [{ name = "x", type = "int" }, { name = "y", type = "int" }]
view = { kind = "output" }
query = { kind = "in", env = "[y |-> 0]" }
"#,
    )
    .unwrap();
    let out = tml(&["check", file.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "obfuscation holds over 4 triples\n");
}
