"""Diagonal jets of real-valued functions up to bidegree (2, 2).

A jet table maps (a, b), with a holomorphic and b antiholomorphic derivative
orders, to an array of shape (nu,) * (a + b); holomorphic indices come first.
For a real function the (b, a) entry is the conjugate of the (a, b) entry
with the two index groups swapped.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

__all__ = ["KernelJets", "ORDERS", "leibniz", "log_jets"]

ORDERS = [(a, b) for a in range(3) for b in range(3)]
_LETTERS = "ijkl"


def _swap_conj(arr, a, b):
    """Conjugate of an (a, b) table viewed as a (b, a) table."""
    axes = list(range(a, a + b)) + list(range(a))
    return np.conj(np.transpose(arr, axes)) if arr.ndim else np.conj(arr)


@dataclass
class KernelJets:
    """Jets of kappa(z) = K(z, z) at one point."""

    nu: int
    table: dict

    @classmethod
    def from_holomorphic_half(cls, nu, k0, d1, d11, d2, d21, d22):
        """Build the full table from the entries with a >= b."""
        t = {
            (0, 0): np.asarray(k0, dtype=complex),
            (1, 0): np.asarray(d1, dtype=complex),
            (1, 1): np.asarray(d11, dtype=complex),
            (2, 0): np.asarray(d2, dtype=complex),
            (2, 1): np.asarray(d21, dtype=complex),
            (2, 2): np.asarray(d22, dtype=complex),
        }
        for a, b in [(1, 0), (2, 0), (2, 1)]:
            t[(b, a)] = _swap_conj(t[(a, b)], a, b)
        return cls(nu=nu, table=t)

    def __getitem__(self, key):
        return self.table[key]

    @property
    def value(self) -> float:
        return float(np.real(self.table[(0, 0)]))

    def hermitian_defect(self) -> float:
        """Largest relative violation of the reality symmetry of the table."""
        worst = 0.0
        scale = max(np.max(np.abs(v)) for v in self.table.values())
        for a, b in ORDERS:
            if a < b:
                continue
            lhs = self.table[(b, a)]
            rhs = _swap_conj(self.table[(a, b)], a, b)
            worst = max(worst, float(np.max(np.abs(lhs - rhs))) / scale)
        return worst


def leibniz(f: KernelJets, g: KernelJets) -> KernelJets:
    """Jets of the product f g."""
    nu = f.nu
    out = {}
    for a, b in ORDERS:
        n = a + b
        letters = _LETTERS[:n]
        total = np.zeros((nu,) * n, dtype=complex)
        for mask in itertools.product((0, 1), repeat=n):
            fi = "".join(c for c, m in zip(letters, mask) if m)
            gi = "".join(c for c, m in zip(letters, mask) if not m)
            fa = sum(mask[:a])
            fb = sum(mask[a:])
            total = total + np.einsum(
                f"{fi},{gi}->{letters}", f[(fa, fb)], g[(a - fa, b - fb)]
            )
        out[(a, b)] = total
    return KernelJets(nu=nu, table=out)


def log_jets(j: KernelJets) -> dict:
    """Jets of psi = log kappa needed for the metric and curvature.

    Returns a dict with keys "1" (psi_j), "11" (psi_{j hbar}), "21"
    (psi_{j k hbar}) and "22" (psi_{j k hbar lbar}), obtained from moment to
    cumulant formulas with moments m_A = d^A kappa / kappa.
    """
    k = j[(0, 0)]
    a = j[(1, 0)] / k
    bb = j[(0, 1)] / k
    m_jh = j[(1, 1)] / k
    m_jk = j[(2, 0)] / k
    m_hl = j[(0, 2)] / k
    m_jkh = j[(2, 1)] / k
    m_jhl = j[(1, 2)] / k
    m_jkhl = j[(2, 2)] / k
    e = np.einsum

    psi1 = a
    psi11 = m_jh - e("j,h->jh", a, bb)
    psi21 = (
        m_jkh
        - e("jk,h->jkh", m_jk, bb)
        - e("jh,k->jkh", m_jh, a)
        - e("kh,j->jkh", m_jh, a)
        + 2 * e("j,k,h->jkh", a, a, bb)
    )
    psi22 = (
        m_jkhl
        - e("jkh,l->jkhl", m_jkh, bb)
        - e("jkl,h->jkhl", m_jkh, bb)
        - e("jhl,k->jkhl", m_jhl, a)
        - e("khl,j->jkhl", m_jhl, a)
        - e("jk,hl->jkhl", m_jk, m_hl)
        - e("jh,kl->jkhl", m_jh, m_jh)
        - e("jl,kh->jkhl", m_jh, m_jh)
        + 2
        * (
            e("jk,h,l->jkhl", m_jk, bb, bb)
            + e("jh,k,l->jkhl", m_jh, a, bb)
            + e("jl,k,h->jkhl", m_jh, a, bb)
            + e("kh,j,l->jkhl", m_jh, a, bb)
            + e("kl,j,h->jkhl", m_jh, a, bb)
            + e("hl,j,k->jkhl", m_hl, a, a)
        )
        - 6 * e("j,k,h,l->jkhl", a, a, bb, bb)
    )
    return {"1": psi1, "11": psi11, "21": psi21, "22": psi22}
