"""Finite-difference gradient checking shared by the RL loss tests."""

import numpy as np

from hawkmm.nn import Params, flatten


def finite_diff(loss_fn, params: Params, h: float = 1e-6) -> Params:
    """Central differences of a scalar loss w.r.t. every parameter entry."""
    grads = []
    for w, b in params:
        gw = np.zeros_like(w)
        gb = np.zeros_like(b)
        for arr, g in ((w, gw), (b, gb)):
            it = np.nditer(arr, flags=["multi_index"])
            for _ in it:
                idx = it.multi_index
                old = arr[idx]
                arr[idx] = old + h
                up = loss_fn()
                arr[idx] = old - h
                down = loss_fn()
                arr[idx] = old
                g[idx] = (up - down) / (2 * h)
        grads.append((gw, gb))
    return grads


def relative_error(analytic: Params, numeric: Params) -> float:
    a = np.concatenate([g.ravel() for g in flatten(analytic)])
    n = np.concatenate([g.ravel() for g in flatten(numeric)])
    return float(np.linalg.norm(a - n) / max(np.linalg.norm(a) + np.linalg.norm(n), 1e-12))
