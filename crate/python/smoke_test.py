"""Smoke test for the Python extension.

Build it first:

    cargo build -p placeq-py --features extension-module --release

then run `python3 python/smoke_test.py`. Set PLACEQ_LIB to use a library
built elsewhere.
"""

import importlib.machinery
import importlib.util
import os
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load():
    lib = os.environ.get("PLACEQ_LIB")
    candidates = [Path(lib)] if lib else [
        ROOT / "target" / "release" / "libplaceq_py.so",
        ROOT / "target" / "debug" / "libplaceq_py.so",
    ]
    for path in candidates:
        if path.exists():
            loader = importlib.machinery.ExtensionFileLoader("placeq", str(path))
            spec = importlib.util.spec_from_loader("placeq", loader)
            module = importlib.util.module_from_spec(spec)
            loader.exec_module(module)
            return module
    sys.exit("extension not built; see the docstring of this script")


def expect_error(exc, fn, *args, **kwargs):
    try:
        fn(*args, **kwargs)
    except exc:
        return
    raise AssertionError(f"expected {exc.__name__}")


def main():
    pq = load()

    f = pq.Formula("E x:vec. v[2](x) = 0 & v[2](x - 1) = 0")
    assert not f.is_quantifier_free()
    assert f.places() == ["2"]
    assert pq.decide(f) is False
    assert pq.decide("E x:vec. v[3](x) = 0 & v[3](x - 1) = 0") is True

    w = pq.witness("E y:vec. v[2](y - 1) >= 3 & v[3](y) >= 2", places=["2", "3"])
    assert w == {"y": "9"}, w

    g = pq.eliminate("E y:vec. x < y & y < 1", places=["inf"])
    assert g.is_quantifier_free() and g.free_vars() == {"x": "vec"}
    assert pq.eval(g, {"x": "1/2"}) and not pq.eval(g, {"x": "1"})
    assert pq.check_equiv("E y:vec. x < y & y < 1", g) is None

    assert str(pq.translate("L[2](x, 1)", "two-sorted")) == "0 <= v[2](x)"
    assert pq.check_equiv("L[2](y, x)", "v[2](x) >= v[2](y)") is not None

    assert pq.vp("24/5", 2) == 3 and pq.vp("0", 7) is None
    for kind in ("order", "nonneg", "mult"):
        assert pq.verify_gadget(kind, samples=300)
    print(pq.gadget("order"))

    expect_error(pq.UnsupportedError, pq.decide, "E x:vec. M[inf](x, x, x)")
    expect_error(pq.ParseError, pq.Formula, "E x:vec. (v[2](x) = ")
    expect_error(pq.SortError, pq.Formula, "E g:val. L[2](g, 1)")
    assert issubclass(pq.ParseError, pq.PlaceqError)

    ok, detail = pq.run_criterion(4)
    assert ok, detail
    print("criterion 4:", detail)
    print("smoke test passed")


if __name__ == "__main__":
    main()
