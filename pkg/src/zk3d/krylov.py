"""Restarted GMRES for matrix-free operators."""

from __future__ import annotations

import numpy as np

from .errors import KrylovStagnationError
from .spectral import SpectralField, spectral_inner


def _euclid(a, b):
    return float(np.vdot(a, b).real)


def gmres_solve(apply, rhs, tol=1e-8, restart=30, max_iters=1000,
                precond=None, x0=None, inner=None):
    """Solve ``apply(x) = rhs`` with right-preconditioned restarted GMRES.

    ``apply`` and ``precond`` act on objects of the same type as ``rhs``:
    plain ndarrays, or SpectralFields (which use the real full-cube inner
    product so that Hermitian symmetry survives the Arnoldi process).
    ``max_iters`` bounds the total number of operator applications.

    Returns x with ``||apply(x) - rhs|| <= tol * ||rhs||``; raises
    KrylovStagnationError carrying the best iterate otherwise.
    """
    if isinstance(rhs, SpectralField):
        grid = rhs.grid
        wrap = lambda a: SpectralField(grid, a)
        A = lambda a: apply(wrap(a)).coeffs
        M = (lambda a: precond(wrap(a)).coeffs) if precond is not None else None
        b = rhs.coeffs
        x = x0.coeffs.copy() if x0 is not None else np.zeros_like(b)
        if inner is None:
            inner = lambda a, c: spectral_inner(wrap(a), wrap(c))
        try:
            return wrap(_gmres(A, M, b, x, tol, restart, max_iters, inner))
        except KrylovStagnationError as err:
            err.best = wrap(err.best)
            raise
    b = np.asarray(rhs)
    dtype = np.result_type(b, float)
    x = np.array(x0, dtype=dtype) if x0 is not None else np.zeros_like(b, dtype=dtype)
    return _gmres(apply, precond, b, x, tol, restart, max_iters, inner or _euclid)


def _gmres(A, M, b, x, tol, restart, max_iters, inner):
    norm = lambda v: np.sqrt(max(inner(v, v), 0.0))
    bnorm = norm(b)
    if bnorm == 0.0:
        return np.zeros_like(b)
    M = M or (lambda v: v)
    r = b - A(x) if np.any(x) else b.copy()
    beta = norm(r)
    best, best_rel = x.copy(), beta / bnorm
    used = 0
    while True:
        if beta <= tol * bnorm:
            return x
        if used >= max_iters:
            break
        m = restart
        V = [r / beta]
        H = np.zeros((m + 1, m))
        cs = np.zeros(m)
        sn = np.zeros(m)
        g = np.zeros(m + 1)
        g[0] = beta
        k = 0
        for j in range(m):
            w = A(M(V[j]))
            used += 1
            for i in range(j + 1):
                H[i, j] = inner(V[i], w)
                w = w - H[i, j] * V[i]
            h_next = norm(w)
            H[j + 1, j] = h_next
            for i in range(j):
                t = cs[i] * H[i, j] + sn[i] * H[i + 1, j]
                H[i + 1, j] = -sn[i] * H[i, j] + cs[i] * H[i + 1, j]
                H[i, j] = t
            den = np.hypot(H[j, j], H[j + 1, j])
            if den == 0.0:
                cs[j], sn[j] = 1.0, 0.0
            else:
                cs[j], sn[j] = H[j, j] / den, H[j + 1, j] / den
            H[j, j] = den
            H[j + 1, j] = 0.0
            g[j + 1] = -sn[j] * g[j]
            g[j] = cs[j] * g[j]
            k = j + 1
            breakdown = h_next == 0.0
            converged = abs(g[j + 1]) <= tol * bnorm
            if converged or used >= max_iters or breakdown:
                break
            V.append(w / h_next)
        y = np.zeros(k)
        for i in range(k - 1, -1, -1):
            if H[i, i] == 0.0:
                y[i] = 0.0
                continue
            y[i] = (g[i] - H[i, i + 1:k] @ y[i + 1:k]) / H[i, i]
        update = sum(yi * vi for yi, vi in zip(y, V))
        x = x + M(update)
        r = b - A(x)
        beta = norm(r)
        if beta / bnorm < best_rel:
            best, best_rel = x.copy(), beta / bnorm
        if k < restart and abs(g[k]) > tol * bnorm and used < max_iters:
            # lucky breakdown that still misses the target: the Krylov space is exhausted
            break
    raise KrylovStagnationError(
        f"GMRES did not reach relative residual {tol:g} in {used} applications "
        f"(best {best_rel:.3e})",
        best=best,
        relative_residual=best_rel,
    )
