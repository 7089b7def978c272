#!/usr/bin/env python3
"""Smoke test for the mcdm_py extension module.

Builds nothing itself: run `cargo build -p mcdm-py --release` first, then
`python3 python/smoke_test.py`. The script copies the cdylib next to a temp
directory as `mcdm_py.so` and drives the bindings end to end.
"""

import math
import pathlib
import shutil
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load_module():
    candidates = [
        ROOT / "target" / "release" / "libmcdm_py.so",
        ROOT / "target" / "debug" / "libmcdm_py.so",
        ROOT / "target" / "release" / "libmcdm_py.dylib",
        ROOT / "target" / "debug" / "libmcdm_py.dylib",
    ]
    built = next((p for p in candidates if p.exists()), None)
    if built is None:
        sys.exit("cdylib not found; run `cargo build -p mcdm-py --release` first")
    tmp = pathlib.Path(tempfile.mkdtemp(prefix="mcdm_py_"))
    shutil.copy2(built, tmp / "mcdm_py.so")
    sys.path.insert(0, str(tmp))
    import mcdm_py  # noqa: E402

    return mcdm_py


def check(name, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"{status} {name}{': ' + detail if detail else ''}")
    if not ok:
        sys.exit(1)


def main():
    m = load_module()

    p = m.ChirpParams.stock(256)
    check("stock params", p.k == 256 and p.n == 256 and p.has_fast_transform(),
          f"k={p.k} fs={p.fs:.0f} mu={p.mu:.3g}")

    w = m.chirp_waveform(p, 3)
    energy = sum(abs(s) ** 2 for s in w)
    check("waveform unit energy", abs(energy - 1.0) < 1e-9, f"energy={energy:.12f}")

    rho_same = m.cross_correlation(p, 5, 5)
    rho_diff = m.cross_correlation(p, 5, 9)
    check("orthogonality", abs(rho_same - 1.0) < 1e-10 and abs(rho_diff) < 1e-10,
          f"|rho_55-1|={abs(rho_same - 1):.2e} |rho_59|={abs(rho_diff):.2e}")

    coeffs = [complex((i % 3) - 1, (i % 5) - 2) for i in range(256)]
    x = m.idoct_fast(coeffs, p)
    back = m.doct_fast(x, p)
    worst = max(abs(a - b) for a, b in zip(back, coeffs))
    check("transform round trip", worst < 1e-9, f"max dev={worst:.2e}")

    slow = m.doct(x, p)
    worst = max(abs(a - b) for a, b in zip(slow, back))
    check("fast path matches direct path", worst < 1e-9, f"max dev={worst:.2e}")

    syms = m.gray_map([True, False], "qpsk")
    expect = complex(1, -1) / math.sqrt(2)
    check("gray mapping", abs(syms[0] - expect) < 1e-12, f"10 -> {syms[0]:.4f}")

    errors, bits = m.loopback_check(512, 2)
    check("loopback is error-free", errors == 0 and bits > 0, f"{errors} errors / {bits} bits")

    ber = m.oracle_ber("rayleigh_bpsk", 10.0)
    check("rayleigh oracle at 10 dB", abs(ber - 0.02327) < 5e-5, f"ber={ber:.5f}")

    e, b, measured = m.flat_ber_point(6.0, packets=3000, fading="rayleigh")
    expect = m.oracle_ber("rayleigh_bpsk", 6.0)
    check("single-tap rayleigh matches closed form",
          abs(measured - expect) < 0.004, f"measured={measured:.4f} expect={expect:.4f}")

    e, b, ber_low = m.ber_point(1024, 4.0, packets=150)
    e, b, ber_high = m.ber_point(1024, 12.0, packets=150)
    check("ber falls with snr", ber_high < ber_low, f"{ber_low:.4f} -> {ber_high:.4f}")

    chosen = m.adapt_round(7)
    check("adaptive round picks a stock K", chosen in (128, 256, 512, 1024), f"K={chosen}")

    print("smoke test complete")


if __name__ == "__main__":
    main()
