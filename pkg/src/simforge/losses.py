"""Task losses over the end-to-end operator, with analytic adjoints.

Every loss is a real scalar function of the complex operator G. Besides its
value, each kind supplies the Wirtinger adjoint dL/dG* so the chain rule can
push one backward pass through the cascade:

    dL/dphase_n(layer l) = -2 Im( t_n * [P_l Gbar^H S_l]_nn )

with t_n the atom's complex transmission and P_l / S_l the cascade prefix
and suffix products around layer l.
"""

import numpy as np

from .errors import InvalidParameter, NonFiniteLoss, ShapeError
from .stack import stack_chain

LN2 = np.log(2.0)


class MatrixFit:
    """Squared Frobenius distance to a target operator.

    With fit_scale=True a single complex scale applied to G is re-solved in
    closed form at every evaluation (least-squares projection), so the loss
    is scale-invariant in G; the gradient with the scale frozen at its
    optimum is exact for the minimized objective.
    """

    kind = "MatrixFit"

    def __init__(self, target, fit_scale=False):
        self.target = np.asarray(target, dtype=complex)
        self.fit_scale = bool(fit_scale)

    def check_shape(self, shape):
        if self.target.shape != shape:
            raise ShapeError(f"target shape {self.target.shape} != operator shape {shape}")

    def scale_for(self, G):
        if not self.fit_scale:
            return 1.0 + 0.0j
        gg = np.vdot(G, G).real
        if gg == 0.0:
            return 0.0 + 0.0j
        return np.vdot(G, self.target) / gg

    def value_and_adjoint(self, G):
        self.check_shape(G.shape)
        beta = self.scale_for(G)
        resid = beta * G - self.target
        val = np.vdot(resid, resid).real
        return val, np.conj(beta) * resid

    def value(self, G):
        self.check_shape(G.shape)
        resid = self.scale_for(G) * G - self.target
        return np.vdot(resid, resid).real


class InterferenceLeakage:
    """Total off-diagonal power of the stream matrix: sum_{s != s~} |G_{s,s~}|^2."""

    kind = "InterferenceLeakage"

    def value_and_adjoint(self, G):
        off = G.copy()
        k = min(G.shape)
        off[np.arange(k), np.arange(k)] = 0.0
        val = np.vdot(off, off).real
        return val, off

    def value(self, G):
        return self.value_and_adjoint(G)[0]


class NegSumRate:
    """Negated sum rate under per-stream SINR with fixed powers.

    G is the square user-by-antenna effective channel; user k decodes its
    own stream against noise plus the interference of the other streams.
    """

    kind = "NegSumRate"

    def __init__(self, powers, noise_power, power_budget=None):
        self.powers = np.asarray(powers, dtype=float)
        if np.any(self.powers < 0):
            raise InvalidParameter("powers must be nonnegative")
        if not (noise_power >= 0):
            raise InvalidParameter("noise_power must be nonnegative")
        self.noise_power = float(noise_power)
        self.power_budget = power_budget

    def check_shape(self, shape):
        k = self.powers.size
        if shape != (k, k):
            raise ShapeError(f"need a square {k}x{k} channel, got {shape}")

    def _terms(self, G):
        p = self.powers
        sq = np.abs(G) ** 2
        a = p * np.diag(sq)
        b = self.noise_power + sq @ p - a
        return a, b

    def value(self, G):
        self.check_shape(G.shape)
        a, b = self._terms(G)
        with np.errstate(divide="ignore", invalid="ignore"):
            return -float(np.sum(np.log2(a + b) - np.log2(b)))

    def value_and_adjoint(self, G):
        self.check_shape(G.shape)
        a, b = self._terms(G)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = -float(np.sum(np.log2(a + b) - np.log2(b)))
        if not np.isfinite(val):
            return val, np.zeros_like(G)
        r = 1.0 / (a + b)
        q = 1.0 / b
        w = np.tile((r - q)[:, None], (1, G.shape[1]))
        np.fill_diagonal(w, r)
        gbar = (-1.0 / LN2) * w * self.powers[None, :] * G
        return val, gbar


class EnergyRoutingCE:
    """Softmax cross-entropy over per-region output intensity for a labeled batch."""

    kind = "EnergyRoutingCE"

    def __init__(self, inputs, labels, regions):
        self.inputs = np.asarray(inputs, dtype=complex)
        self.labels = np.asarray(labels, dtype=int)
        if self.inputs.ndim != 2 or self.inputs.shape[0] != self.labels.size:
            raise ShapeError("inputs must be (batch, ports) matching labels")
        self.regions = [np.asarray(r, dtype=int) for r in regions]
        seen = set()
        for r in self.regions:
            if r.size == 0:
                raise InvalidParameter("detection regions must be nonempty")
            dup = seen.intersection(r.tolist())
            if dup:
                raise InvalidParameter(f"detection regions overlap at ports {sorted(dup)}")
            seen.update(r.tolist())
        c = len(self.regions)
        if np.any(self.labels < 0) or np.any(self.labels >= c):
            raise InvalidParameter(f"labels must lie in [0, {c})")

    def check_shape(self, shape):
        if shape[1] != self.inputs.shape[1]:
            raise ShapeError("operator columns do not match input field length")
        top = max(int(r.max()) for r in self.regions)
        if top >= shape[0]:
            raise ShapeError("a region indexes beyond the observation ports")

    def region_energies(self, out_fields):
        inten = np.abs(out_fields) ** 2
        return np.stack([inten[:, r].sum(axis=1) for r in self.regions], axis=1)

    def _softmax(self, e):
        z = e - e.max(axis=1, keepdims=True)
        ez = np.exp(z)
        return ez / ez.sum(axis=1, keepdims=True)

    def value(self, G):
        self.check_shape(G.shape)
        out = self.inputs @ G.T
        s = self._softmax(self.region_energies(out))
        picked = s[np.arange(self.labels.size), self.labels]
        with np.errstate(divide="ignore"):
            return -float(np.mean(np.log(picked)))

    def value_and_adjoint(self, G):
        self.check_shape(G.shape)
        out = self.inputs @ G.T
        s = self._softmax(self.region_energies(out))
        batch = self.labels.size
        picked = s[np.arange(batch), self.labels]
        with np.errstate(divide="ignore"):
            val = -float(np.mean(np.log(picked)))
        de = s.copy()
        de[np.arange(batch), self.labels] -= 1.0
        de /= batch
        weight = np.zeros((batch, G.shape[0]))
        for c, r in enumerate(self.regions):
            weight[:, r] = de[:, c][:, None]
        obar = weight * out
        return val, obar.T @ np.conj(self.inputs)

    def accuracy(self, G):
        """Fraction of samples whose highest-intensity region matches the label."""
        out = self.inputs @ G.T
        pred = np.argmax(self.region_energies(out), axis=1)
        return float(np.mean(pred == self.labels))


def _require_finite(val):
    if not np.isfinite(val):
        raise NonFiniteLoss(f"loss evaluated to {val}")
    return val


def chain_loss_value(chain, phases, loss):
    return _require_finite(loss.value(chain.operator(phases)))


def chain_loss_and_gradient(chain, phases, loss):
    """Loss and exact per-atom phase gradient through the cascade."""
    prefixes, suffixes, trans = chain.prefixes_suffixes(phases)
    G = (suffixes[-1] * trans[-1][None, :]) @ prefixes[-1]
    val, gbar = loss.value_and_adjoint(G)
    _require_finite(val)
    gh = gbar.conj().T
    grads = []
    for l in range(chain.num_layers):
        t = gh @ suffixes[l]
        c = np.einsum("ns,sn->n", prefixes[l], t)
        grads.append(-2.0 * np.imag(trans[l] * c))
    return val, grads


def chain_fd_gradient(chain, phases, loss, eps):
    """Central finite-difference gradient, every atom, step eps radians."""
    grads = []
    work = [p.copy() for p in phases]
    for l, p in enumerate(work):
        g = np.zeros_like(p)
        for n in range(p.size):
            orig = p[n]
            p[n] = orig + eps
            hi = loss.value(chain.operator(work))
            p[n] = orig - eps
            lo = loss.value(chain.operator(work))
            p[n] = orig
            g[n] = (hi - lo) / (2.0 * eps)
        grads.append(g)
        _require_finite(float(np.sum(g)))
    return grads


def loss_and_gradient(geom, prof, loss, gradient_mode="analytic", fd_epsilon=1e-6):
    """Loss and d(loss)/d(phase) for one stack, analytic or finite-difference."""
    chain = stack_chain(geom, prof)
    if gradient_mode == "analytic":
        return chain_loss_and_gradient(chain, prof.phases, loss)
    if gradient_mode == "finite_difference":
        val = chain_loss_value(chain, prof.phases, loss)
        return val, chain_fd_gradient(chain, prof.phases, loss, fd_epsilon)
    raise InvalidParameter(f"unknown gradient_mode {gradient_mode!r}")
