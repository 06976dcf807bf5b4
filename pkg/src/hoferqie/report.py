"""Serialization of certificates and scans, and the shell diagram."""

from __future__ import annotations

import csv
import io
import json
import math

import numpy as np

SCHEMA = "hoferqie.certificate/1"
SCAN_HEADER = ("N", "epsilon_N", "C", "C_N", "C_N_ratio")


def fmt_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        # JSON has no inf/nan literal
        return json.dumps(str(x))
    return "%.17g" % x


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with every float printed to 17 significant digits; key order preserved."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        obj = list(obj)
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def certificate_to_dict(cert, config=None) -> dict:
    out = {
        "schema": SCHEMA,
        "N": cert.N,
        "a": list(cert.a.a),
        "l": cert.l,
        "lower": cert.lower,
        "upper": cert.upper,
        "upper_direct_oscillation": cert.upper_direct,
        "upper_generator_sum": cert.upper_stepwise,
        "epsilon_N": cert.epsilon_N,
        "C": cert.C,
        "C_N": cert.C_N,
        "generator_oscillations": list(cert.generator_oscillations),
        "sandwich_consistent": cert.consistent,
        "notes": {
            "lower": "half the smaller certified capacity of the displaced regions",
            "upper": "oscillation of an explicit generating path; the true Hofer norm is not computed",
            "C": "max_k osc(H_k), an upper bound for max_k ||phi_{H_k}^1||",
            "pairs": "rho(phi(a), phi(b)) = ||phi(a - b)||",
        },
        "witnesses": {
            "displacement": cert.displacement.to_dict() if cert.displacement else None,
            "deck_dichotomy": cert.dichotomy.to_dict() if cert.dichotomy else None,
            "shell_embedding": cert.shell_embedding.to_dict() if cert.shell_embedding else None,
            "lambda_embedding": cert.lambda_embedding.to_dict() if cert.lambda_embedding else None,
        },
    }
    if config is not None:
        out["config"] = config.as_dict()
    return out


def failure_to_dict(exc, config=None) -> dict:
    point = getattr(exc, "point", None)
    witness = getattr(exc, "witness", None)
    out = {
        "schema": SCHEMA,
        "status": "witness_failure",
        "error": str(exc),
        "counterexample": None if point is None else {
            "q": [float(x) for x in np.atleast_1d(getattr(point, "q", point))],
            "p": [float(x) for x in np.atleast_1d(getattr(point, "p", []))],
        },
        "witness": witness.to_dict() if witness is not None else None,
    }
    if config is not None:
        out["config"] = config.as_dict()
    return out


def scan_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCAN_HEADER)
    prev = None
    for r in rows:
        ratio = "" if prev is None or r.N != prev.N + 1 else fmt_float(r.C_N / prev.C_N)
        w.writerow([r.N, fmt_float(r.epsilon_N), fmt_float(r.C), fmt_float(r.C_N), ratio])
        prev = r
    return buf.getvalue()


def point_cloud_csv(ball_points: np.ndarray, images: np.ndarray) -> str:
    dim = ball_points.shape[1]
    n = dim // 2
    header = [f"x{j}" for j in range(dim)] + [f"q{j}" for j in range(n)] + [f"p{j}" for j in range(n)]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for x, y in zip(ball_points, images):
        w.writerow([fmt_float(v) for v in np.concatenate([x, y])])
    return buf.getvalue()


def render_shells(N: int, path, dark: str = "black") -> None:
    """Draw the trace of the shells on one fiber: annuli between sqrt(s_lo)
    and sqrt(s_hi) inside the disc |p| < sqrt(3)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from matplotlib.patches import Circle, Wedge

    from .shells import build_shells

    outer = math.sqrt(3.0)
    with plt.rc_context({"svg.hashsalt": "hoferqie", "svg.fonttype": "none",
                         "path.simplify": False}):
        fig, ax = plt.subplots(figsize=(5, 5))
        ax.add_patch(Circle((0, 0), outer, fill=False, lw=1.2, ec=dark, gid="outer-disc"))
        for sh in build_shells(N):
            r_lo, r_hi = sh.radii
            ax.add_patch(Wedge((0, 0), r_hi, 0, 360, width=r_hi - r_lo, fc=dark, ec="none",
                               gid=f"shell-{sh.i}"))
        ax.plot([0], [0], marker="+", color=dark, ms=6)
        lim = outer * 1.08
        ax.set_xlim(-lim, lim)
        ax.set_ylim(-lim, lim)
        ax.set_aspect("equal")
        ax.set_axis_off()
        ax.set_title(f"momentum shells, N = {N}")
        fig.savefig(path, format="svg", metadata={"Date": None}, bbox_inches="tight")
        plt.close(fig)
