"""Central finite-difference oracle shared by the NN tests."""

import numpy as np

from bvpgaf.nn import loss_and_grad


def rel_error(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(a) + np.abs(b), 1e-8)))


def numeric_grad(f, x, h=1e-6):
    g = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        i = it.multi_index
        old = x[i]
        x[i] = old + h
        up = f()
        x[i] = old - h
        down = f()
        x[i] = old
        g[i] = (up - down) / (2 * h)
    return g


def check_layer(layer, x, seed=0):
    """Max relative error over the input gradient and every parameter gradient."""
    r = np.random.default_rng(seed).standard_normal(layer.forward(x).shape)

    def f():
        return float((layer.forward(x) * r).sum())

    layer.forward(x)
    dx = layer.backward(r)
    errs = [rel_error(dx, numeric_grad(f, x))]
    for k, p in layer.params.items():
        layer.forward(x)
        layer.backward(r)
        analytic = layer.grads[k].copy()
        errs.append(rel_error(analytic, numeric_grad(f, p)))
    return max(errs)


def check_model(model, x, y):
    _, grads = loss_and_grad(model, x, y)

    def f():
        return loss_and_grad(model, x, y)[0]

    return max(rel_error(g, numeric_grad(f, p)) for g, (_, p) in zip(grads, model.named_params()))
