"""Smoke test for the nospill extension module.

Build and install first:

    pip install maturin
    pip install --no-build-isolation -e crates/py
    python python/smoke_test.py
"""

import json

import numpy as np

import nospill


def residual(m, k, x, lam):
    m, k, x, lam = (np.asarray(a, dtype=complex) for a in (m, k, x, lam))
    return np.linalg.norm(m @ x @ lam + k @ x)


def check_hermitian_update():
    # diagonal pencil I·λ − diag(1, 2, 3): eigenvalues 1, 2, 3
    m = np.eye(3)
    k = -np.diag([1.0, 2.0, 3.0])
    pencil = nospill.Pencil(m, k, "hermitian")
    assert sorted(z.real for z in pencil.eigenvalues()) == [1.0, 2.0, 3.0]
    assert "hermitian" in pencil.classify()

    xc = [[1.0], [0.0], [0.0]]
    upd = pencil.update(xc, [1.0], [5.0])
    dm, dk = np.array(upd.delta_m), np.array(upd.delta_k)
    assert upd.result_structure == "hermitian"
    assert residual(m + dm, k + dk, xc, [[5.0]]) < 1e-12
    # the other eigenpairs are untouched
    assert residual(m + dm, k + dk, np.eye(3)[:, 1:], np.diag([2.0, 3.0])) < 1e-12

    same = pencil.update(xc, [1.0], [1.0])
    assert np.abs(same.delta_m).max() == 0 and np.abs(same.delta_k).max() == 0


def check_documents():
    problem, hidden = nospill.random_problem(7, 8, 3, "star-odd")
    doc = json.loads(problem)
    doc["fixed"] = json.loads(hidden)["fixed"]
    solution = json.loads(nospill.solve(json.dumps(doc)))
    assert solution["certificate"]["pass"], solution["certificate"]["failures"]

    pencil = json.dumps({"format": 1, "structure": doc["structure"], "M": doc["M"], "K": doc["K"]})
    cert = json.loads(nospill.verify(pencil, json.dumps(solution), [problem, hidden]))
    assert cert["pass"]


def check_examples():
    for ex in ("herm-6.1", "odd-6.2", "even-6.3", "shh-7"):
        r = json.loads(nospill.reproduce(ex))
        assert r["deviation_dm"] < 5e-4 and r["deviation_dk"] < 5e-4, ex


def check_errors():
    try:
        nospill.Pencil(np.eye(2), [[0.0, 1.0], [2.0, 0.0]], "hermitian")
    except nospill.NospillError as e:
        assert "StructureViolation" in str(e) or "NotHermitian" in str(e), e
    else:
        raise AssertionError("non-Hermitian K accepted")

    try:
        nospill.solve('{"format": 1}')
    except nospill.FormatError:
        pass
    else:
        raise AssertionError("malformed problem accepted")


if __name__ == "__main__":
    check_hermitian_update()
    check_documents()
    check_examples()
    check_errors()
    print(f"nospill {nospill.__version__}: smoke test passed")
