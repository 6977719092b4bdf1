"""Deterministic SVG figures.

Every figure goes through :func:`to_svg`, which pins the SVG id salt, keeps
text as text and drops the timestamp, so the same inputs give the same bytes.
"""

from __future__ import annotations

import io

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .plq import PLQFunction  # noqa: E402

RC = {
    "svg.hashsalt": "plqval",
    "svg.fonttype": "none",
    "path.simplify": True,
    "figure.dpi": 72,
}


def to_svg(fig) -> str:
    buf = io.StringIO()
    with matplotlib.rc_context(RC):
        fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    return buf.getvalue()


def _sample(u: PLQFunction, per_piece: int = 24):
    xs, ys = [], []
    for p in u.pieces:
        t = np.linspace(p.left, p.right, per_piece)
        xs.append(t)
        ys.append(p.value(t))
    return np.concatenate(xs), np.concatenate(ys)


def plot_stitch(result) -> str:
    """Overlay of ``a x**2`` (gray) and the stitched approximant (black)."""
    P = result.params
    with matplotlib.rc_context(RC):
        fig, ax = plt.subplots(figsize=(6, 4))
        t = np.linspace(-P.m, P.m, 200)
        ax.plot(t, P.a * t * t, color="0.6", lw=2, label=f"{P.a:g} x^2")
        x, y = _sample(result.v)
        ax.plot(x, y, color="black", lw=1, label=f"v_{P.n}")
        ax.plot(result.xs, [result.v.eval(v) for v in result.xs], "o", ms=3, color="tab:blue",
                label="x_i")
        ax.plot(result.ys, [result.v.eval(v) for v in result.ys], "s", ms=3, color="tab:red",
                label="y_i")
        ax.set_xlabel("x")
        ax.set_ylabel("value")
        ax.set_title(f"r={P.r:g}, a={P.a:g}, s={P.s:g}, m={P.m:g}, n={P.n}")
        ax.legend(loc="upper center")
        return to_svg(fig)


def plot_sequence(report) -> str:
    """``Z(u_k)``, ``L_k`` and ``d_H`` against ``k`` in three stacked panels."""
    k = report.column("k")
    with matplotlib.rc_context(RC):
        fig, axes = plt.subplots(3, 1, figsize=(6, 7), sharex=True)
        panels = [("value", "Z(u_k)"), ("lipschitz", "L_k"), ("hausdorff", "d_H(dom u_k, dom u)")]
        for ax, (attr, label) in zip(axes, panels):
            vals = np.array([np.nan if getattr(r, attr) is None else getattr(r, attr)
                             for r in report.records], dtype=float)
            ax.plot(k, vals, ".-", color="black", lw=1, ms=3)
            ax.set_ylabel(label)
        axes[-1].set_xlabel("k")
        axes[0].set_title(report.name)
        return to_svg(fig)


def plot_zeta(report) -> str:
    """Recovered ``zeta`` samples on log-log axes (positive samples only)."""
    a = np.array(report.a_grid)
    z = np.array(report.zeta_values)
    keep = (a > 0) & (z > 0)
    with matplotlib.rc_context(RC):
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.loglog(a[keep], z[keep], "o-", color="black", ms=3)
        ax.set_xlabel("a")
        ax.set_ylabel("zeta(a)")
        ax.set_title(f"c0={report.c0:.6g}, c1={report.c1:.6g}")
        return to_svg(fig)
