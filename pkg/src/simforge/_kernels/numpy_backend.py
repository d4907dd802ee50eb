"""Pure-numpy assembly of the free-space coupling matrix."""

import numpy as np

NAME = "numpy"


def rs_matrix(src, dst, normal, area_m2, lambda_m):
    """Pairwise diffraction coefficients, shape (len(dst), len(src)).

    Entry (n, m) couples source point m to destination point n:
    (area * cos an / d) * (1/(2 pi d) - j/lambda) * exp(j 2 pi d / lambda),
    with d the point separation and cos an the obliquity against the source
    plane normal. Returns (matrix, min_distance); the caller rejects
    coincident pairs via min_distance.
    """
    diff = dst[:, None, :] - src[None, :, :]
    d = np.sqrt(np.einsum("nmk,nmk->nm", diff, diff))
    dmin = float(d.min()) if d.size else np.inf
    if dmin == 0.0:
        return None, 0.0
    cos_zeta = (diff @ normal) / d
    amp = area_m2 * cos_zeta / d * (1.0 / (2.0 * np.pi * d))
    amp_im = -area_m2 * cos_zeta / (d * lambda_m)
    phase = np.exp((2j * np.pi / lambda_m) * d)
    return (amp + 1j * amp_im) * phase, dmin
