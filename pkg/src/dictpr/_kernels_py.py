"""Pure numpy implementations of the inner-loop kernels.

These are the reference versions; ``_ckernels`` must agree with them to
roundoff.  ``A`` holds the measurement vectors as rows, so the i-th
intensity is ``|a_i^* x|^2 = |(conj(A) @ x)_i|^2``.
"""


def intensities(A, x):
    w = A.conj() @ x
    return w.real ** 2 + w.imag ** 2


def quartic_loss(A, x, y):
    """``sum_i (|a_i^* x|^2 - y_i)^2``."""
    r = intensities(A, x) - y
    return float(r @ r)


def quartic_loss_grad(A, x, y):
    """Loss and its gradient ``4 sum_i r_i a_i a_i^* x``.

    The gradient is twice the Wirtinger derivative with respect to
    ``conj(x)``; its real and imaginary parts are the partial derivatives
    with respect to ``Re x`` and ``Im x``.
    """
    w = A.conj() @ x
    r = w.real ** 2 + w.imag ** 2 - y
    grad = 4.0 * (A.T @ (r * w))
    return float(r @ r), grad


def lifted_lowrank(A, H, signs):
    """``a_i^* (sum_l s_l h_l h_l^*) a_i`` for the columns ``h_l`` of ``H``."""
    W = A.conj() @ H
    return (W.real ** 2 + W.imag ** 2) @ signs
