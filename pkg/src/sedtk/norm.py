"""Frequency-wise instance normalization and its adaptive residual variant.

``freq_in`` whitens each frequency bin by the instance's own moments over
(channel, time). ``ada_res_norm`` blends the identity path with the
normalized path through a trainable balance ``a``, then applies scale ``b``
and shift ``c``:

    out = (a * x + (1 - a) * freq_in(x)) * b + c

Gradients are hand-written (no autodiff here); ``ada_res_norm_grad``
includes the dependence of the per-bin moments on the input.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import FeatureMap
from .errors import InvalidParameterError, ParseError, ShapeMismatchError


@dataclass(frozen=True)
class AdaResNormParams:
    """Trainable balance/scale/shift scalars plus the variance guard."""

    a: float
    b: float
    c: float
    eps: float = 1e-5

    def __post_init__(self):
        if not self.eps > 0:
            raise InvalidParameterError(f"eps must be > 0, got {self.eps}")
        for name in ("a", "b", "c"):
            if not np.isfinite(getattr(self, name)):
                raise InvalidParameterError(f"parameter {name} must be finite")


@dataclass(frozen=True)
class NormGradients:
    """Gradients of sum(upstream * ada_res_norm(x)) w.r.t. a, b, c, x."""

    d_a: float
    d_b: float
    d_c: float
    d_input: np.ndarray


def _bin_moments(x64: np.ndarray, eps: float):
    mu = x64.mean(axis=(0, 2), keepdims=True)
    var = x64.var(axis=(0, 2), keepdims=True)
    s = np.sqrt(var + eps)
    return mu, s


def freq_in(fmap: FeatureMap, eps: float = 1e-5) -> FeatureMap:
    """Whiten each frequency bin: (x - mu_f) / sqrt(var_f + eps)."""
    if not eps > 0:
        raise InvalidParameterError(f"eps must be > 0, got {eps}")
    x = fmap.data.astype(np.float64)
    mu, s = _bin_moments(x, eps)
    return FeatureMap(((x - mu) / s).astype(np.float32))


def ada_res_norm(fmap: FeatureMap, params: AdaResNormParams) -> FeatureMap:
    """Blend identity and whitened paths, then scale and shift."""
    x = fmap.data.astype(np.float64)
    mu, s = _bin_moments(x, params.eps)
    y = (x - mu) / s
    z = (params.a * x + (1.0 - params.a) * y) * params.b + params.c
    return FeatureMap(z.astype(np.float32))


def ada_res_norm_grad(
    fmap: FeatureMap, params: AdaResNormParams, upstream
) -> NormGradients:
    """Exact gradients of L = sum(upstream * ada_res_norm(x)).

    The input gradient accounts for the dependence of the per-bin mean and
    variance on x. For each frequency bin with m = C*T elements,
    y = (x - mu)/s and incoming per-bin cotangent g:

        dL/dx = a*b*u + (g - mean(g) - y * mean(g*y)) / s,  g = (1-a)*b*u

    where the means run over the bin's (channel, time) elements.
    """
    u = upstream.data if isinstance(upstream, FeatureMap) else np.asarray(upstream)
    if u.shape != fmap.shape:
        raise ShapeMismatchError(
            f"upstream shape {u.shape} != input shape {fmap.shape}"
        )
    x = fmap.data.astype(np.float64)
    u = u.astype(np.float64)
    a, b = params.a, params.b
    mu, s = _bin_moments(x, params.eps)
    y = (x - mu) / s

    d_c = u.sum()
    d_b = (u * (a * x + (1.0 - a) * y)).sum()
    d_a = b * (u * (x - y)).sum()

    g = (1.0 - a) * b * u
    g_mean = g.mean(axis=(0, 2), keepdims=True)
    gy_mean = (g * y).mean(axis=(0, 2), keepdims=True)
    d_input = a * b * u + (g - g_mean - y * gy_mean) / s
    return NormGradients(
        d_a=float(d_a), d_b=float(d_b), d_c=float(d_c), d_input=d_input
    )


def init_params(mode: str) -> AdaResNormParams:
    """``identity`` gives the exact identity map; ``neutral`` a 50/50 blend."""
    if mode == "identity":
        return AdaResNormParams(a=1.0, b=1.0, c=0.0)
    if mode == "neutral":
        return AdaResNormParams(a=0.5, b=1.0, c=0.0)
    raise InvalidParameterError(f"mode must be 'identity' or 'neutral', got {mode!r}")


def save_params(params: AdaResNormParams, path) -> None:
    """Write the plain-text parameter file ``a=<v> b=<v> c=<v> eps=<v>``."""
    text = f"a={params.a!r} b={params.b!r} c={params.c!r} eps={params.eps!r}\n"
    Path(path).write_text(text, encoding="utf-8")


def load_params(path) -> AdaResNormParams:
    """Read a parameter file written by ``save_params``."""
    fields = {}
    for token in Path(path).read_text(encoding="utf-8").split():
        if "=" not in token:
            raise ParseError(f"bad token {token!r} in parameter file", path=path)
        key, value = token.split("=", 1)
        try:
            fields[key] = float(value)
        except ValueError as exc:
            raise ParseError(f"bad value for {key}: {value!r}", path=path) from exc
    missing = {"a", "b", "c", "eps"} - fields.keys()
    if missing:
        raise ParseError(f"missing fields: {sorted(missing)}", path=path)
    return AdaResNormParams(
        a=fields["a"], b=fields["b"], c=fields["c"], eps=fields["eps"]
    )
