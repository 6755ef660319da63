//! Compile and run a small C program against the generated header and
//! the static library, exercising the whole ABI from the C side.

use std::path::PathBuf;
use std::process::Command;

const C_PROGRAM: &str = r#"
#include <assert.h>
#include <stdint.h>
#include <stdio.h>
#include <string.h>
#include "svr.h"

static const char *SOURCE =
    "type nat = Z[] | S[nat]\n"
    "let rec add n m = match n with\n"
    "  | Z[]   -> m\n"
    "  | S[nn] -> S[add nn m]\n"
    "let two : nat = S[S[Z[]]]\n"
    "let four = add two two\n";

int main(void) {
    struct SvrModule *m = NULL;
    if (svr_module_load(SOURCE, 0, &m) != SVR_OK || m == NULL) {
        fprintf(stderr, "load failed\n");
        return 1;
    }
    char *json = NULL;
    if (svr_module_run_json(m, "four", 0, &json) != SVR_OK) {
        fprintf(stderr, "run failed\n");
        return 1;
    }
    if (strstr(json, "S[S[S[S[Z[]]]]]") == NULL) {
        fprintf(stderr, "unexpected result: %s\n", json);
        return 1;
    }
    svr_string_free(json);

    json = NULL;
    if (svr_module_equiv_json(m, "add Z[] Z[]", "Z[]", 0, &json) != SVR_OK) {
        fprintf(stderr, "equiv failed\n");
        return 1;
    }
    if (strstr(json, "\"status\": \"proved\"") == NULL) {
        fprintf(stderr, "unexpected verdict: %s\n", json);
        return 1;
    }
    svr_string_free(json);

    if (svr_module_load(NULL, 0, &m) != SVR_NULL_ARGUMENT) {
        fprintf(stderr, "null handling broken\n");
        return 1;
    }
    svr_module_free(m);
    printf("c-smoke ok: %s\n", svr_version());
    return 0;
}
"#;

#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let include_dir = manifest.join("include");
    assert!(include_dir.join("svr.h").exists(), "generated header missing");

    // the static library built for this test run
    let mut lib_dir = std::env::current_exe().unwrap();
    lib_dir.pop(); // test binary
    if lib_dir.ends_with("deps") {
        lib_dir.pop();
    }
    let lib = lib_dir.join("libsvr_ffi.a");
    if !lib.exists() {
        // static libraries are only produced for the library target; build
        // artifacts can lag the test binary in fresh checkouts
        let status = Command::new(env!("CARGO"))
            .args(["build", "-p", "svr-ffi"])
            .status()
            .expect("cargo runs");
        assert!(status.success());
    }
    assert!(lib.exists(), "static library not found at {}", lib.display());

    let work = std::env::temp_dir().join("svr-c-smoke");
    std::fs::create_dir_all(&work).unwrap();
    let c_file = work.join("smoke.c");
    let bin = work.join("smoke");
    std::fs::write(&c_file, C_PROGRAM).unwrap();

    let status = Command::new("cc")
        .arg(&c_file)
        .arg("-I")
        .arg(&include_dir)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .arg("-o")
        .arg(&bin)
        .status()
        .expect("cc is available");
    assert!(status.success(), "C compilation failed");

    let out = Command::new(&bin).output().expect("smoke binary runs");
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains("c-smoke ok"));
}
