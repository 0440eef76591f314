"""KAN layers: every (input, output) edge carries its own learnable activation

    phi(x) = gate * (w_base * silu(x) + w_spline * spline(x))

Layers are evaluated on batches; the forward pass caches what the analytic
backward pass needs.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .spline import SplineGrid, basis_derivatives, basis_values

CHECKPOINT_VERSION = 1
PARAM_NAMES = ("coeffs", "w_base", "w_spline", "gate", "bias")


class StateError(RuntimeError):
    """Backward was requested without a matching forward pass."""


def silu(x):
    x = np.asarray(x, dtype=np.float64)
    # x * sigmoid(x), written to avoid overflow in exp for large |x|
    return x * np.exp(-np.logaddexp(0.0, -x))


def silu_grad(x):
    x = np.asarray(x, dtype=np.float64)
    sig = np.exp(-np.logaddexp(0.0, -x))
    return sig * (1.0 + x * (1.0 - sig))


def edge_activation(coeffs, w_base, w_spline, gate, grid: SplineGrid, x):
    spline = basis_values(grid, x) @ np.asarray(coeffs, dtype=np.float64)
    return gate * (w_base * silu(x) + w_spline * spline)


class KanLayer:
    """d_in x d_out learnable edges sharing one spline grid, plus an output bias.

    Edge arrays are stored input-major: ``coeffs[p, q]`` belongs to the edge
    from input p to output q.
    """

    def __init__(self, d_in: int, d_out: int, grid: SplineGrid | None = None, rng=None):
        if d_in < 1 or d_out < 1:
            raise ValueError(f"layer dimensions must be positive, got {d_in}x{d_out}")
        self.d_in = d_in
        self.d_out = d_out
        self.grid = grid if grid is not None else SplineGrid()
        rng = np.random.default_rng() if rng is None else rng
        nb = self.grid.n_basis
        scale = 0.1 / nb
        self.coeffs = rng.uniform(-scale, scale, size=(d_in, d_out, nb))
        self.w_base = np.ones((d_in, d_out))
        self.w_spline = np.ones((d_in, d_out))
        self.gate = np.ones((d_in, d_out))
        self.bias = np.zeros(d_out)
        self._cache = None

    def parameters(self) -> list[np.ndarray]:
        return [getattr(self, name) for name in PARAM_NAMES]

    def parameter_count(self) -> int:
        return sum(p.size for p in self.parameters())

    def forward(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        xb = np.atleast_2d(x)
        if xb.ndim != 2 or xb.shape[1] != self.d_in:
            raise ValueError(f"expected input with {self.d_in} features, got shape {x.shape}")
        basis = basis_values(self.grid, xb)  # (B, d_in, nb)
        spline = np.einsum("bin,ion->bio", basis, self.coeffs)
        base = silu(xb)
        inner = self.w_base * base[:, :, None] + self.w_spline * spline
        out = self.bias + np.einsum("bio,io->bo", inner, self.gate)
        self._cache = (xb.copy(), basis, spline, base, inner)
        return out[0] if single else out

    def backward(self, x: np.ndarray, upstream: np.ndarray):
        """Gradients of sum(upstream * forward(x)); returns (param grads, input grad)."""
        if self._cache is None:
            raise StateError("backward called before forward")
        xb, basis, spline, base, inner = self._cache
        x = np.asarray(x, dtype=np.float64)
        if not np.array_equal(np.atleast_2d(x), xb):
            raise StateError("backward input does not match the cached forward input")
        single = np.ndim(upstream) == 1
        g = np.atleast_2d(np.asarray(upstream, dtype=np.float64))
        if g.shape != (xb.shape[0], self.d_out):
            raise ValueError(f"upstream gradient shape {g.shape} != {(xb.shape[0], self.d_out)}")

        d_bias = g.sum(axis=0)
        d_gate = np.einsum("bo,bio->io", g, inner)
        d_inner = g[:, None, :] * self.gate  # (B, d_in, d_out)
        d_w_base = np.einsum("bio,bi->io", d_inner, base)
        d_w_spline = np.einsum("bio,bio->io", d_inner, spline)
        d_coeffs = np.einsum("bio,bin->ion", d_inner * self.w_spline, basis)

        dbasis = basis_derivatives(self.grid, xb)
        dspline = np.einsum("bin,ion->bio", dbasis, self.coeffs)
        local = self.w_base * silu_grad(xb)[:, :, None] + self.w_spline * dspline
        d_x = np.einsum("bio,bio->bi", d_inner, local)

        grads = [d_coeffs, d_w_base, d_w_spline, d_gate, d_bias]
        return grads, (d_x[0] if single else d_x)


def parameter_count(layer: KanLayer) -> int:
    """(d_in * d_out) * (G + K + 3) + d_out"""
    g = layer.grid
    return layer.d_in * layer.d_out * (g.grid_size + g.order + 3) + layer.d_out


class KanNetwork:
    def __init__(
        self,
        shape=(36, 64, 6),
        grid: SplineGrid | None = None,
        seed: int = 0,
    ):
        shape = tuple(int(d) for d in shape)
        if len(shape) < 2:
            raise ValueError("network shape needs at least input and output dimensions")
        self.shape = shape
        self.grid = grid if grid is not None else SplineGrid()
        self.seed = seed
        rng = np.random.default_rng(seed)
        self.layers = [KanLayer(a, b, self.grid, rng) for a, b in zip(shape[:-1], shape[1:])]

    @property
    def input_dim(self) -> int:
        return self.shape[0]

    @property
    def output_dim(self) -> int:
        return self.shape[-1]

    def parameters(self) -> list[np.ndarray]:
        return [p for layer in self.layers for p in layer.parameters()]

    def parameter_count(self) -> int:
        return sum(layer.parameter_count() for layer in self.layers)

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Raw class scores; no softmax."""
        self._input = np.array(x, dtype=np.float64)
        for layer in self.layers:
            x = layer.forward(x)
        return x

    def backward(self, x: np.ndarray, upstream: np.ndarray):
        if getattr(self, "_input", None) is None:
            raise StateError("backward called before forward")
        if not np.array_equal(np.asarray(x, dtype=np.float64), self._input):
            raise StateError("backward input does not match the cached forward input")
        single = self._input.ndim == 1
        grads: list[list[np.ndarray]] = []
        g = np.atleast_2d(np.asarray(upstream, dtype=np.float64))
        for layer in reversed(self.layers):
            layer_grads, g = layer.backward(layer._cache[0], g)
            grads.append(layer_grads)
        flat = [arr for layer_grads in reversed(grads) for arr in layer_grads]
        return flat, (g[0] if single else g)

    def get_flat(self) -> np.ndarray:
        return np.concatenate([p.ravel() for p in self.parameters()])

    def set_flat(self, flat: np.ndarray) -> None:
        flat = np.asarray(flat, dtype=np.float64)
        if flat.size != self.parameter_count():
            raise ValueError(f"expected {self.parameter_count()} values, got {flat.size}")
        i = 0
        for p in self.parameters():
            p[...] = flat[i : i + p.size].reshape(p.shape)
            i += p.size

    def copy(self) -> "KanNetwork":
        other = KanNetwork(self.shape, self.grid, self.seed)
        other.set_flat(self.get_flat())
        return other


def network_forward(net: KanNetwork, x) -> np.ndarray:
    return net.forward(x)


def network_backward(net: KanNetwork, x, upstream_grad):
    return net.backward(x, upstream_grad)


# ---------------------------------------------------------------- checkpoints

def checkpoint_dict(net: KanNetwork) -> dict:
    g = net.grid
    return {
        "format_version": CHECKPOINT_VERSION,
        "shape": list(net.shape),
        "grid": {
            "grid_size": g.grid_size,
            "order": g.order,
            "range_lo": g.range_lo,
            "range_hi": g.range_hi,
        },
        "seed": net.seed,
        "param_order": list(PARAM_NAMES),
        "layers": [
            {name: [float(v) for v in getattr(layer, name).ravel()] for name in PARAM_NAMES}
            for layer in net.layers
        ],
    }


def save_checkpoint(net: KanNetwork, path) -> None:
    # json writes floats with repr(), which round-trips float64 exactly
    Path(path).write_text(json.dumps(checkpoint_dict(net), indent=1) + "\n")


def network_from_dict(doc: dict) -> KanNetwork:
    if doc.get("format_version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {doc.get('format_version')!r}")
    grid = SplineGrid(**doc["grid"])
    net = KanNetwork(doc["shape"], grid, doc.get("seed", 0))
    if len(doc["layers"]) != len(net.layers):
        raise ValueError("checkpoint layer count does not match its shape")
    for layer, values in zip(net.layers, doc["layers"]):
        for name in PARAM_NAMES:
            target = getattr(layer, name)
            arr = np.asarray(values[name], dtype=np.float64)
            if arr.size != target.size:
                raise ValueError(f"checkpoint parameter {name} has {arr.size} values, expected {target.size}")
            target[...] = arr.reshape(target.shape)
    return net


def load_checkpoint(path) -> KanNetwork:
    return network_from_dict(json.loads(Path(path).read_text()))
