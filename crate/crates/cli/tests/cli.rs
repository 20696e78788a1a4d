use std::io::Write;
use std::process::{Command, Output, Stdio};

fn placeq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_placeq")).args(args).env_remove("PLACEQ_SEED").output().expect("spawn")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).trim().to_string()
}

#[test]
fn decide_sphere_infeasible() {
    let o = placeq(&["decide", "--places", "2", "E x:vec. v[2](x)=0 & v[2](x-1)=0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "false");
}

#[test]
fn decide_json() {
    let o = placeq(&["decide", "--format", "json", "E x:vec. v[3](x)=0 & v[3](x-1)=0"]);
    assert_eq!(stdout(&o), r#"{"verdict":true}"#);
}

#[test]
fn witness_crt() {
    let o = placeq(&["witness", "--places", "2,3", "E y:vec. v[2](y-1)>=3 & v[3](y)>=2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), r#"{"y":"9"}"#);
    let o = placeq(&["witness", "--format", "json", "--places", "2,3", "E y:vec. v[2](y-1)>=3 & v[3](y)>=2"]);
    assert_eq!(stdout(&o), r#"{"witness":{"y":"9"}}"#);
}

#[test]
fn exit_codes() {
    assert_eq!(placeq(&["decide", "--places", "inf", "M[inf](x,x,x)"]).status.code(), Some(3));
    assert_eq!(placeq(&["decide", "--places", "2", "E x:vec. v[3](x) = 0"]).status.code(), Some(3));
    let o = placeq(&["decide", "E x:vec. (v[2](x) = "]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("1:"));
    assert_eq!(placeq(&["decide", "E g:val. v[2](g) = 0"]).status.code(), Some(4));
}

#[test]
fn eliminate_prints_surface_syntax() {
    let o = placeq(&["eliminate", "--places", "inf", "E y:vec. x < y & y < 1"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(!out.contains("E "), "{}", out);
    let eval = |x: &str| {
        let o = placeq(&["eval", "--assign", &format!("x={}", x), "--", &out]);
        stdout(&o)
    };
    assert_eq!(eval("1/2"), "true");
    assert_eq!(eval("1"), "false");
}

#[test]
fn eval_assign() {
    assert_eq!(stdout(&placeq(&["eval", "--assign", "x=3/4,y=2", "L[2](y, x)"])), "true");
    assert_eq!(stdout(&placeq(&["eval", "--assign", "x=3/4,y=2", "L[2](x, y)"])), "false");
    assert_eq!(placeq(&["eval", "--assign", "x=1", "x < y"]).status.code(), Some(1));
}

#[test]
fn translate_targets() {
    let o = placeq(&["translate", "--to", "two-sorted", "L[2](x, 1) & Q[5,2](x)"]);
    assert_eq!(stdout(&o), "0 <= v[2](x) & P[2](v[5](x))");
    let o = placeq(&["translate", "--to", "L", "x <= y"]);
    assert_eq!(stdout(&o), "L[inf](-x + y - 1, -x + y + 1)");
    let o = placeq(&["translate", "--to", "one-sorted", "0 <= v[2](x)"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn gadget_verify() {
    let o = placeq(&["gadget", "order"]);
    assert_eq!(stdout(&o), "L[inf](-x + y - 1, -x + y + 1)");
    let o = placeq(&["gadget", "mult", "--verify", "--samples", "200"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("verified on 200 samples"));
}

#[test]
fn stdin_with_comments() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_placeq"))
        .arg("decide")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .expect("spawn");
    child
        .stdin
        .take()
        .expect("stdin")
        .write_all(b"# open interval\nE x:vec. x > 0 # lower\n  & x < 1\n")
        .expect("write");
    let o = child.wait_with_output().expect("wait");
    assert_eq!(stdout(&o), "true");
}

#[test]
fn file_input() {
    let dir = std::env::temp_dir().join(format!("placeq-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("q.txt");
    std::fs::write(&path, "A x:vec. v[2](x + 1) >= 0 | v[2](x) < 0\n").unwrap();
    let o = placeq(&["decide", &format!("@{}", path.display())]);
    assert_eq!(stdout(&o), "true");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn deterministic_output() {
    let args = ["eliminate", "--places", "2,3", "E x:vec. v[2](x - a) = 1 & v[3](x) >= 2"];
    assert_eq!(placeq(&args).stdout, placeq(&args).stdout);
}
