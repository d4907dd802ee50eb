"""Trainable stack state and the end-to-end transfer operator.

forward_operator composes W_out . Phi_L . W_L ... Phi_1 . W_in, where the
W's are the fixed free-space coupling matrices of the geometry and each
Phi_l = diag(amp * exp(j phase)) is a layer's programmable transmission.
The same cascade structure, fixed matrices interleaved with diagonal phase
layers, is reused for multi-stack links (PhaseChain), so the optimizer can
differentiate through any such chain uniformly.
"""

from dataclasses import dataclass

import numpy as np

from .diffraction import stack_matrices
from .errors import InvalidParameter, ShapeError

TWO_PI = 2.0 * np.pi


def wrap_phase(p):
    """Wrap to [0, 2 pi); mod can round a tiny negative up to exactly 2 pi."""
    wrapped = np.mod(p, TWO_PI)
    return np.where(wrapped == TWO_PI, 0.0, wrapped)


@dataclass
class PhaseProfile:
    """Per-layer transmission coefficients of one stack.

    phases: list of float arrays in [0, 2 pi), one entry per meta-atom.
    amplitudes: matching arrays in (0, 1]; all ones unless a lossy model
    is wanted (amplitudes are never trained).
    codebook_bits: when set, every phase is an exact member of the
    2^bits-point uniform codebook.
    trainable: optional per-layer boolean masks; False freezes an atom
    (input-encoder layers, for example).
    """

    phases: list
    amplitudes: list = None
    codebook_bits: int = None
    trainable: list = None

    def __post_init__(self):
        self.phases = [np.asarray(p, dtype=float) for p in self.phases]
        if self.amplitudes is None:
            self.amplitudes = [np.ones_like(p) for p in self.phases]
        else:
            self.amplitudes = [np.asarray(a, dtype=float) for a in self.amplitudes]
        if self.trainable is None:
            self.trainable = [np.ones(p.shape, dtype=bool) for p in self.phases]
        else:
            self.trainable = [np.asarray(t, dtype=bool) for t in self.trainable]
        if len(self.amplitudes) != len(self.phases) or len(self.trainable) != len(self.phases):
            raise ShapeError("phases, amplitudes and trainable must have matching layer counts")
        for p, a, t in zip(self.phases, self.amplitudes, self.trainable):
            if p.shape != a.shape or p.shape != t.shape:
                raise ShapeError("per-layer arrays must have matching lengths")
            if np.any(p < 0) or np.any(p >= TWO_PI):
                raise InvalidParameter("phases must lie in [0, 2*pi)")
            if np.any(a <= 0) or np.any(a > 1):
                raise InvalidParameter("amplitudes must lie in (0, 1]")
        if self.codebook_bits is not None:
            if self.codebook_bits < 1:
                raise InvalidParameter("codebook_bits must be >= 1")
            step = TWO_PI / (2**self.codebook_bits)
            for p in self.phases:
                k = np.rint(p / step).astype(int) % (2**self.codebook_bits)
                if not np.array_equal(k * step % TWO_PI, p):
                    raise InvalidParameter("phases are not exact codebook members")

    @property
    def num_layers(self):
        return len(self.phases)

    def transmissions(self):
        """Complex diagonal entries amp * exp(j phase), per layer."""
        return [a * np.exp(1j * p) for p, a in zip(self.phases, self.amplitudes)]

    def copy(self):
        return PhaseProfile(
            phases=[p.copy() for p in self.phases],
            amplitudes=[a.copy() for a in self.amplitudes],
            codebook_bits=self.codebook_bits,
            trainable=[t.copy() for t in self.trainable],
        )

    def with_phases(self, phases, codebook_bits="keep"):
        if codebook_bits == "keep":
            codebook_bits = self.codebook_bits
        return PhaseProfile(
            phases=[np.asarray(p, dtype=float).copy() for p in phases],
            amplitudes=[a.copy() for a in self.amplitudes],
            codebook_bits=codebook_bits,
            trainable=[t.copy() for t in self.trainable],
        )


@dataclass(frozen=True)
class TransferOperator:
    """End-to-end complex map from source ports to observation ports."""

    matrix: np.ndarray

    @property
    def shape(self):
        return self.matrix.shape


class PhaseChain:
    """Fixed matrices M_0..M_L interleaved with L diagonal phase layers.

    The composed operator is M_L diag(t_L) M_(L-1) ... diag(t_1) M_0 with
    t_l = amplitudes[l] * exp(j phases[l]). Layer sizes are dictated by the
    fixed matrices; profile layers of a stack map onto chain layers in
    order. Fixed matrices never change during training.
    """

    def __init__(self, fixed, amplitudes, trainable):
        if len(fixed) != len(amplitudes) + 1:
            raise ShapeError("need exactly one more fixed matrix than phase layers")
        self.fixed = [np.asarray(m, dtype=complex) for m in fixed]
        self.amplitudes = [np.asarray(a, dtype=float) for a in amplitudes]
        self.trainable = [np.asarray(t, dtype=bool) for t in trainable]
        for l, a in enumerate(self.amplitudes):
            if self.fixed[l].shape[0] != a.size or self.fixed[l + 1].shape[1] != a.size:
                raise ShapeError(f"phase layer {l} size mismatch with fixed matrices")

    @property
    def num_layers(self):
        return len(self.amplitudes)

    @property
    def layer_sizes(self):
        return [a.size for a in self.amplitudes]

    def operator(self, phases):
        """Compose the full chain for the given per-layer phase arrays."""
        acc = self.fixed[0]
        for l in range(self.num_layers):
            t = self.amplitudes[l] * np.exp(1j * phases[l])
            acc = self.fixed[l + 1] @ (t[:, None] * acc)
        return acc

    def prefixes_suffixes(self, phases):
        """P_l (input to just before layer l) and S_l (just after layer l to output).

        The operator factors as S_l diag(t_l) P_l for every l; these products
        drive both analytic gradients and single-atom update scans.
        """
        trans = [a * np.exp(1j * p) for a, p in zip(self.amplitudes, phases)]
        prefixes = [self.fixed[0]]
        for l in range(self.num_layers - 1):
            prefixes.append(self.fixed[l + 1] @ (trans[l][:, None] * prefixes[l]))
        suffixes = [None] * self.num_layers
        suffixes[-1] = self.fixed[-1]
        for l in range(self.num_layers - 2, -1, -1):
            suffixes[l] = (suffixes[l + 1] * trans[l + 1][None, :]) @ self.fixed[l + 1]
        return prefixes, suffixes, trans


def stack_chain(geom, prof):
    """Compile a stack geometry + profile into a PhaseChain."""
    if prof.num_layers != geom.num_layers:
        raise ShapeError("profile layer count does not match geometry")
    for l, p in enumerate(prof.phases):
        if p.size != geom.layers[l].count:
            raise ShapeError(f"layer {l} has {geom.layers[l].count} atoms, got {p.size} phases")
    mats = [m.entries for m in stack_matrices(geom)]
    return PhaseChain(mats, prof.amplitudes, prof.trainable)


def forward_operator(geom, prof):
    """End-to-end transfer operator of one stack."""
    chain = stack_chain(geom, prof)
    return TransferOperator(matrix=chain.operator(prof.phases))


def apply_field(op, x):
    """Propagate a source-port field vector through the operator."""
    x = np.asarray(x, dtype=complex)
    if x.shape != (op.matrix.shape[1],):
        raise ShapeError(
            f"field length {x.shape} does not match operator columns {op.matrix.shape[1]}"
        )
    if not np.all(np.isfinite(x)):
        raise InvalidParameter("field vector has non-finite entries")
    return op.matrix @ x


def quantize_phases(prof, bits):
    """Snap every phase to the nearest member of the 2^bits uniform codebook.

    Circular distance decides nearest; an exact midpoint goes to the smaller
    codebook index. Amplitudes are untouched.
    """
    if bits < 1:
        raise InvalidParameter("bits must be >= 1")
    n = 2**bits
    step = TWO_PI / n
    new_phases = []
    for p in prof.phases:
        x = p / step
        k = np.floor(x).astype(int)
        frac = x - k
        k = np.where(frac > 0.5, k + 1, k)
        # exact midpoint: the two candidates are indices k and k+1 (mod n)
        tie = frac == 0.5
        k = np.where(tie, np.minimum(k % n, (k + 1) % n), k)
        new_phases.append((k % n) * step % TWO_PI)
    return PhaseProfile(
        phases=new_phases,
        amplitudes=[a.copy() for a in prof.amplitudes],
        codebook_bits=bits,
        trainable=[t.copy() for t in prof.trainable],
    )


def random_profile(geom, seed):
    """Uniform random phases in [0, 2 pi), unit amplitudes, seeded."""
    rng = np.random.default_rng(seed)
    phases = [rng.uniform(0.0, TWO_PI, g.count) for g in geom.layers]
    return PhaseProfile(phases=phases)
