"""CSV and JSON serialisation of results.

CSV numbers use 17 significant digits; JSON uses Python's shortest
round-trip float repr.  Complex numbers are ``[re, im]`` pairs in JSON and a
``re_*``/``im_*`` column pair in CSV.  Every JSON document carries
``schema_version``.
"""

from __future__ import annotations

import csv
import io
import json
import math

import numpy as np

SCHEMA_VERSION = "1"


def fmt(x) -> str:
    return format(float(x) + 0.0, ".17g")  # + 0.0 drops negative zero


def _num(x):
    x = float(x) + 0.0
    if math.isnan(x):
        return None  # JSON has no NaN
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def cplx(z) -> list:
    z = complex(z)
    return [_num(z.real), _num(z.imag)]


def matrix_payload(a) -> dict:
    """Row-major flat values plus shape; complex matrices split into ``re``/``im``."""
    a = np.asarray(a)
    out = {"shape": list(a.shape)}
    if np.iscomplexobj(a):
        out["re"] = [_num(x) for x in a.real.ravel()]
        out["im"] = [_num(x) for x in a.imag.ravel()]
    else:
        out["values"] = [_num(x) for x in a.ravel()]
    return out


def dumps(payload: dict) -> str:
    doc = {"schema_version": SCHEMA_VERSION, **payload}
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def _csv(rows) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


# -- model ----------------------------------------------------------------


def operator_json(q) -> str:
    return dumps({**q.descriptor(), "sub": [_num(x) for x in q.sub], "sup": [_num(x) for x in q.sup]})


def operator_csv(q) -> str:
    return _csv([[fmt(x) for x in row] for row in q.entries])


def dense_csv(a) -> str:
    a = np.asarray(a)
    if np.iscomplexobj(a):
        return _csv([[fmt(x.real) + ("+" if x.imag >= 0 else "") + fmt(x.imag) + "j" for x in row] for row in a])
    return _csv([[fmt(x) for x in row] for row in a])


# -- spectral -------------------------------------------------------------


def sweep_csv(sr) -> str:
    header = ["t"]
    for k in range(1, sr.n + 1):
        header += [f"re_q{k}", f"im_q{k}"]
    header.append("n_real")
    rows = [header]
    for i, t in enumerate(sr.t_grid):
        row = [fmt(t)]
        for z in sr.trajectories[:, i]:
            row += [fmt(z.real), fmt(z.imag)]
        row.append(str(int(sr.real_count_per_t[i])))
        rows.append(row)
    return _csv(rows)


def sweep_json(sr) -> str:
    return dumps(
        {
            "n": sr.n,
            "word": str(sr.word),
            "t_grid": [_num(t) for t in sr.t_grid],
            "trajectories": [[cplx(z) for z in path] for path in sr.trajectories],
            "real_count_per_t": [int(c) for c in sr.real_count_per_t],
            "defective": [bool(x) for x in sr.defective],
            "low_confidence": [bool(x) for x in sr.low_confidence],
        }
    )


def classification_payload(q, spec, cls) -> dict:
    return {
        **q.descriptor(),
        "eigenvalues": [cplx(z) for z in spec.eigenvalues],
        "n_real": cls.n_real,
        "n_ghost": cls.n_ghost,
        "real_eigenvalues": [_num(x) for x in cls.real_eigenvalues],
        "ghost_pairs": [cplx(z) for z in cls.ghost_pairs],
        "tolerance_used": _num(cls.tolerance_used),
    }


def classification_csv(spec, cls) -> str:
    rows = [["index", "re", "im", "is_real"]]
    for k, z in enumerate(spec.eigenvalues):
        rows.append([str(k), fmt(z.real), fmt(z.imag), str(int(cls.real_mask[k]))])
    return _csv(rows)


# -- pseudospectrum -------------------------------------------------------


def field_csv(f) -> str:
    re_vals, im_vals = f.grid.re_values, f.grid.im_values
    rows = [["re_z", "im_z", "s"]]
    for i, x in enumerate(re_vals):
        for j, y in enumerate(im_vals):
            rows.append([fmt(x), fmt(y), fmt(f.s_values[i, j])])
    return _csv(rows)


def report_payload(f, rep, extra: dict | None = None) -> dict:
    out = {
        "grid": f.grid.to_dict(),
        "operator": f.descriptor,
        "ladder": [_num(e) for e in rep.epsilon_ladder],
        "component_counts": list(rep.component_counts),
        "grid_component_counts": list(rep.grid_component_counts),
        "clusters": [
            {"members": list(map(int, g)), "center": cplx(c), "kind": kind}
            for g, c, kind in zip(rep.clusters, rep.cluster_centers, rep.cluster_kinds)
        ],
        "merge_epsilon": [[_num(x) for x in row] for row in rep.merge_epsilon],
        "real_ghost_merge_epsilon": _num(rep.real_ghost_merge_epsilon()),
        "unresolved": [{"cluster": int(c), "epsilon": _num(e)} for c, e in rep.unresolved],
    }
    if extra:
        out.update(extra)
    return out


def contours_payload(lines_by_eps: dict) -> dict:
    return {
        "contours": [
            {"epsilon": _num(eps), "polylines": [[[_num(a), _num(b)] for a, b in line] for line in lines]}
            for eps, lines in lines_by_eps.items()
        ]
    }


# -- metric / phase -------------------------------------------------------


def metric_payload(q, sol) -> dict:
    return {
        **q.descriptor(),
        "kappa": [_num(k) for k in sol.kappa],
        "theta": matrix_payload(sol.theta),
        "residual": _num(sol.residual),
        "positive_definite": sol.positive_definite,
        "min_eigenvalue": _num(sol.min_eigenvalue),
        "condition_number": _num(sol.condition_number),
    }


def hermitization_payload(h) -> dict:
    return {
        "omega": matrix_payload(h.omega),
        "q_image": matrix_payload(h.q_image),
        "hermiticity_residual": _num(h.hermiticity_residual),
        "isospectral_residual": _num(h.isospectral_residual),
        "omega_condition": _num(h.omega_condition),
    }


def phase_table_csv(rows) -> str:
    out = [["index", "word", "n_real_before", "n_real_after", "t0"]]
    for r in rows:
        out.append([str(r.index), str(r.word), str(r.n_real_before), str(r.n_real_after), fmt(r.t0)])
    return _csv(out)


def phase_table_payload(n, t0, rows) -> dict:
    return {
        "n": n,
        "t0": _num(t0),
        "rows": [
            {
                "index": r.index,
                "word": str(r.word),
                "n_real_before": r.n_real_before,
                "n_real_after": r.n_real_after,
                "t0": _num(r.t0),
            }
            for r in rows
        ],
    }


def reduced_payload(q, rm, residuals: dict) -> dict:
    return {
        **q.descriptor(),
        "reduced_dim": rm.reduced_dim,
        "real_eigenvalues": [_num(x) for x in rm.real_eigenvalues],
        "ghost_eigenvalues": [cplx(z) for z in rm.ghost_eigenvalues],
        "projector": matrix_payload(rm.projector),
        "basis": matrix_payload(rm.basis),
        "q_reduced": matrix_payload(rm.q_reduced),
        "theta_reduced": matrix_payload(rm.theta_reduced),
        "residuals": {k: _num(v) for k, v in residuals.items()},
    }
