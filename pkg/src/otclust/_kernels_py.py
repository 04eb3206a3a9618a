"""Pure-NumPy implementation of the hot assignment kernel.

Twin of the compiled extension ``otclust._kernels``; ``otclust.kernels``
picks one of the two at import time.  Both expose the same function with
the same tie-breaking rule (smallest index wins), so results agree except
possibly in the last ulp of the accumulated sums.
"""

import numpy as np

BACKEND = "python"


def assign_and_masses(points, weights, positions, offsets):
    """Assign every sample to its best affine score and bin the masses.

    Sample ``i`` goes to ``argmax_j  <points[i], positions[j]> + offsets[j]``
    with ties broken toward the smallest ``j``.

    Returns
    -------
    assignment : (n,) int64 array of winning indices
    masses : (k,) float64 array, ``masses[j] = sum(weights[assignment == j])``
    score_mass : float, ``sum_i weights[i] * best_score_i`` (the empirical
        integral of the upper envelope, used by the transport energy)
    """
    scores = points @ positions.T + offsets
    assignment = np.argmax(scores, axis=1)  # first max wins ties
    masses = np.bincount(assignment, weights=weights, minlength=positions.shape[0])
    best = np.take_along_axis(scores, assignment[:, None], axis=1)[:, 0]
    return assignment.astype(np.int64), masses, float(weights @ best)
