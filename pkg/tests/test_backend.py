import json
import os
import random
import subprocess
import sys

import numpy as np
import pytest

from ucqres import _fallback, kernels

compiled = pytest.importorskip("ucqres._kernels")


def _hom_case(rng):
    n_src, n_tgt, S = rng.randint(0, 6), rng.randint(0, 5), rng.randint(1, 2)
    edges = [(rng.randrange(S), rng.randrange(n_src), rng.randrange(n_src))
             for _ in range(rng.randint(0, 8))] if n_src else []
    adj = (np.array([rng.random() < 0.4 for _ in range(S * n_tgt * n_tgt)], dtype=np.uint8)
           .reshape(S, n_tgt, n_tgt))
    dom = np.array([rng.random() < 0.85 for _ in range(n_src * n_tgt)], dtype=np.uint8).reshape(n_src, n_tgt)
    return n_src, np.array(edges, dtype=np.int32).reshape(-1, 3), n_tgt, adj, dom


def _same(a, b):
    if a is None or b is None:
        return a is None and b is None
    return list(map(int, a)) == list(map(int, b))


def test_hom_search_backends_agree():
    rng = random.Random(7)
    for _ in range(500):
        case = _hom_case(rng)
        assert _same(_fallback.hom_search_binary(*case), compiled.hom_search_binary(*case))


def test_hitting_backends_agree():
    rng = random.Random(8)
    for _ in range(500):
        m = rng.randint(0, 16)
        masks = [sum(1 << i for i in rng.sample(range(m), rng.randint(1, min(m, 4)))) for _ in range(rng.randint(0, 10))] if m else []
        weights = [rng.randint(1, 3) for _ in range(m)]
        a = _fallback.min_hitting_deletion(masks, weights)
        b = compiled.min_hitting_deletion(masks, weights)
        assert (a is None) == (b is None)
        if a is not None:
            assert (int(a[0]), int(a[1])) == (int(b[0]), int(b[1]))


def test_compiled_backend_selected_by_default():
    if os.environ.get("UCQRES_PURE") != "1":
        assert kernels.BACKEND == "cython"


def test_pure_backend_end_to_end():
    code = (
        "import json, random\n"
        "from ucqres import kernels\n"
        "from ucqres.query import parse_ucq\n"
        "from ucqres.resilience import resilience_brute, resilience_exact\n"
        "from ucqres.structures import BagDatabase\n"
        "rng = random.Random(5)\n"
        "mu = parse_ucq('R(x,y) & R(y,z) & R(z,x)')\n"
        "out = []\n"
        "for _ in range(40):\n"
        "    n = rng.randint(2, 5)\n"
        "    rel = {(rng.randrange(n), rng.randrange(n)): rng.randint(1, 3) for _ in range(10)}\n"
        "    db = BagDatabase(n, {'R': rel})\n"
        "    out.append([resilience_brute(db, mu).value, resilience_exact(db, mu).value])\n"
        "print(json.dumps({'backend': kernels.BACKEND, 'values': out}))\n"
    )
    runs = {}
    for pure in ("1", "0"):
        env = dict(os.environ, UCQRES_PURE=pure)
        res = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        runs[pure] = json.loads(res.stdout)
    assert runs["1"]["backend"] == "python" and runs["0"]["backend"] == "cython"
    assert runs["1"]["values"] == runs["0"]["values"]
