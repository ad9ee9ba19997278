//! Compile a small C program against the generated header and the static
//! library, then run it.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "gearscan.h"

int main(void) {
    double signal[600] = {0};
    for (int i = 0; i < 600; i++) {
        double t = (i - 300) / 5.0;
        if (fabs(t) <= 4.0) signal[i] = gs_morlet(t) / sqrt(5.0);
    }
    double fitness = 0.0;
    bool degenerate = true;
    if (gs_shape_fitness(signal, 600, 5.0, 300.0, &fitness, &degenerate) != GS_STATUS_OK) return 1;
    if (fabs(fitness - 1.0) > 1e-9 || degenerate) return 2;

    GsSwarmConfig cfg = gs_swarm_config_default();
    GsScaleEstimate est;
    if (gs_best_scale_pso(signal, 600, 300, &cfg, &est) != GS_STATUS_OK) return 3;
    if (fabs(est.scale - 5.0) > 0.5) return 4;

    if (gs_shape_fitness(NULL, 4, 2.0, 1.0, &fitness, NULL) != GS_STATUS_NULL_POINTER) return 5;
    printf("%s\n", gs_last_error_message());

    GsSynthConfig sc = gs_synth_config_default();
    GsSignal *sig = NULL;
    if (gs_signal_synthesize(&sc, &sig) != GS_STATUS_OK) return 6;
    if (gs_signal_len(sig) != 1250) return 7;
    gs_signal_free(sig);
    return 0;
}
"#;

fn target_dir() -> PathBuf {
    // .../target/<profile>/deps/c_client-<hash>
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_and_runs() {
    let lib = target_dir().join("libgearscan_ffi.a");
    if !lib.exists() {
        panic!("static library not found at {}", lib.display());
    }
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("client.c");
    let exe = dir.path().join("client");
    std::fs::write(&src, PROGRAM).unwrap();

    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(cc)
        .args(["-std=c11", "-Wall", "-Werror", "-o"])
        .arg(&exe)
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .status()
        .expect("C compiler runs");
    assert!(status.success(), "compilation failed");

    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "client exited with {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "signal is null");
}
