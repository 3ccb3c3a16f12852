"""Smoke test of the pywdepth extension module.

Build and install it first:

    pip install maturin
    pip install -e crates/python --no-build-isolation
"""

import math
import os
import sys
import tempfile

import pywdepth


def check(cond, msg):
    if not cond:
        print(f"FAIL: {msg}")
        sys.exit(1)
    print(f"ok: {msg}")


def main():
    w9 = pywdepth.WitnessParams(0.369, 0.889, 0.268, 9, 9)
    f_min, l, t1, t2 = w9.min_f()
    check(f_min >= -1e-3 and w9.is_feasible(), f"published N=9 witness is valid (f_min={f_min:.2e})")
    check(abs(w9.value(0.05, 0.92, 0.015, 0.922) + 0.08165) < 1e-6, "witness value on the reference estimate")
    check(abs(w9.f_value(l, t1, t2) - f_min) < 1e-12, "f_value at the reported minimizer")
    check(pywdepth.min_depth(16) == 11, "minimum depth for 16 ensembles")

    try:
        pywdepth.WitnessParams(0.0, 0.0, 0.0, 3, 9)
        check(False, "invalid depth rejected")
    except pywdepth.WdepthError:
        check(True, "invalid depth rejected")

    model = pywdepth.ExperimentModel.paper_like(9, 0.0311).tuned_to_fidelity(0.92, 1)
    truth = model.ground_truth()
    check(abs(truth["F"] - 0.92) < 1e-9, "model tuned to the target fidelity")

    est = model.analytic().infer()
    check(abs(est["p1"] - truth["p1"]) < 1e-9 and est["F"] <= truth["F"] + 1e-9, "analytic inference")

    params, value, certifiable = pywdepth.optimize_params(est["p0"], est["p1"], est["p2"], est["F"], 9, 9)
    check(certifiable and value < 0 and params.is_feasible(1e-6), f"optimized W_9 = {value:.4f}")

    data = model.simulate(seed=7, trials=10_000_000, three_photon_trials=20_000_000_000)
    check(len(data) == 20 and data.n_modes == 9, "sampled campaign has 20 records")
    again = pywdepth.Dataset.from_jsonl(data.to_jsonl())
    check(again.to_jsonl() == data.to_jsonl(), "dataset round trip")

    cert = data.certify(seed=3, samples=2000)
    check(cert["k"] == 9 and cert["confidence"] > 0.99, f"certified depth {cert['k']} at {cert['confidence']:.4f}")
    conf = data.confidence(cert["params"], 2000, 3)
    check(math.isclose(conf, cert["confidence"]), "confidence of the certified witness")

    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "w.txt")
        with open(path, "w") as f:
            f.write("0.635 0.813 0.240 14 16\n")
        code, out, _ = pywdepth.run_cli(["validate-witness", path])
        check(code == 0 and out.startswith("PASS"), "command line validate-witness")
        code, _, err = pywdepth.run_cli(["infer", os.path.join(d, "missing.jsonl")])
        check(code == 2 and "missing.jsonl" in err, "command line input error")

    print("all smoke checks passed")


if __name__ == "__main__":
    main()
