"""Smoke test for the tsabe Python extension.

Build first with `cargo build -p tsabe-py --release`, then run
`python3 python/smoke.py`. Set TSABE_PY_LIB to load a library from
another location.
"""

import importlib.machinery
import importlib.util
import os
import pathlib
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load():
    candidates = [os.environ.get("TSABE_PY_LIB")] + [
        str(ROOT / "target" / profile / "libtsabe_py.so") for profile in ("release", "debug")
    ]
    for path in filter(None, candidates):
        if os.path.exists(path):
            loader = importlib.machinery.ExtensionFileLoader("tsabe_py", path)
            spec = importlib.util.spec_from_file_location("tsabe_py", path, loader=loader)
            module = importlib.util.module_from_spec(spec)
            loader.exec_module(module)
            return module
    sys.exit("libtsabe_py.so not found; run `cargo build -p tsabe-py` first")


def expect_raises(exc, fn, *args):
    try:
        fn(*args)
    except exc:
        return
    raise AssertionError(f"{fn.__name__} did not raise {exc.__name__}")


def main():
    t = load()

    assert t.cover("2022-07-01..2022-09-02") == ["2022-JUL", "2022-AUG", "2022-SEP-01", "2022-SEP-02"]

    rows = {r[0]: r for r in t.bench(3, 4, 2, 4, 1)}
    assert rows["pk"][1][:2] == (14, 1)
    assert rows["sk"][1][:2] == (9, 1)
    assert rows["ct"][1][:2] == (3, 1)
    assert rows["decrypt"][1][2] == 7
    assert all(r[3] for r in rows.values())

    pk, mk = t.setup(["gold", "silver", "bronze"], seed=1)
    sk = t.keygen(pk, mk, "gold AND silver", "2022-07-01..2022-09-02", 77, seed=2)
    ct, msg = t.encrypt(pk, ["gold", "silver"], ["2022-08"], seed=3)
    assert t.decrypt(pk, sk, ct) == msg
    assert all(closed for _, closed in t.audit(pk, sk, ct))
    late, _ = t.encrypt(pk, ["gold", "silver"], ["2022-10"])
    expect_raises(t.AccessDenied, t.decrypt, pk, sk, late)

    paper_pk, paper_mk = t.setup(["gold", "silver"], mode="paper", seed=1)
    paper_sk = t.keygen(paper_pk, paper_mk, "gold AND silver", "2022-07-01..2022-09-02", 77)
    paper_ct, _ = t.encrypt(paper_pk, ["gold", "silver"], ["2022-08"])
    steps = dict(t.audit(paper_pk, paper_sk, paper_ct))
    assert not all(steps.values())

    content = bytes(range(256)) * 40
    pkg = t.seal(pk, "badguy.mp4", content, ["gold", "silver"], ["2022-08"], 1000)
    assert t.open_package(pk, sk, pkg) == content
    bad = bytearray(pkg)
    bad[-10] ^= 1
    expect_raises(t.IntegrityError, t.open_package, pk, sk, bytes(bad))

    metrics, log = t.simulate()
    assert metrics == t.replay(log)
    assert "hops=3" in metrics and "hops=1" in metrics
    assert t.simulate(seed=4) == t.simulate(seed=4)

    ledger = t.Ledger()
    pid = "pid-0000000000000007"
    assert ledger.revoke(pid, "2022-09-02", "2022-08-01")
    assert not ledger.revoke(pid, "2022-09-02", "2022-08-01")
    assert ledger.is_revoked(pid)
    assert ledger.prune("2022-09-03") == 1
    restored = t.Ledger.decode(ledger.encode())
    assert not restored.is_revoked(pid)
    tampered = bytearray(ledger.encode())
    tampered[20] ^= 4
    expect_raises(t.VerificationError, t.Ledger.decode, bytes(tampered))

    print("smoke ok")


if __name__ == "__main__":
    main()
