"""Report documents for the command-line front end.

A document is a `dict` of strings, lists and dicts with a `rows` list of flat records. JSON
writes the whole document; CSV writes the rows. Exact values are serialized as "p/q" strings and
floating-point text only appears under keys ending in `approx`.
"""

import csv
import io
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import mpmath # type: ignore

from qeslab.error import Error
from qeslab.exactalg import DEFAULT_PRECISION, Root, format_poly, to_mpf
from qeslab.repspace import JointEigen, SpectralLine
from qeslab.separation import ChainSolution, Completeness
from qeslab.verify import ConformanceItem, ContractionProbe, show

Document = Dict[str, Any]

# Significant digits of the `approx` fields.
APPROX_DIGITS = 20

def approx(root: Root, precision: int = DEFAULT_PRECISION) -> str:
    "Decimal text of a root's midpoint."
    return mpmath.nstr(root.approx(precision), APPROX_DIGITS)

def _root_key(root: Root) -> Any:
    return (-root.midpoint, root.imag[0] if root.imag else 0)

def _line_row(root: Root, multiplicity: int, labels: Sequence[Any], precision: int) -> Dict[str, Any]:
    return {
        "eigenvalue": root.format(),
        "eigenvalue_approx": approx(root, precision),
        "exact": root.is_exact,
        "labels": [show(label) for label in labels],
        "multiplicity": multiplicity,
    }

def spectrum_document(lines: Sequence[SpectralLine], config: Dict[str, Any],
                      joint: Sequence[JointEigen] = (),
                      precision: int = DEFAULT_PRECISION) -> Document:
    """Spectral lines sorted by decreasing real part, then multiplicity.

    When joint eigenvalues are given the rows carry their separation labels, one row per
    (labels, energy); `values` always lists the eigenvalues of the whole matrix.
    """

    ordered = sorted(lines, key=lambda l: (_root_key(l.eigenvalue), l.multiplicity))
    if joint:
        rows = [_line_row(j.energy, j.multiplicity, j.labels, precision)
                for j in sorted(joint, key=lambda j: (_root_key(j.energy), j.multiplicity,
                                                      repr(j.labels)))]
    else:
        rows = [_line_row(l.eigenvalue, l.multiplicity, l.labels, precision) for l in ordered]
    values: List[str] = []
    for line in ordered:
        values.extend([line.eigenvalue.format()] * line.multiplicity)
    return {
        "command": "spectrum",
        "config": config,
        "rows": rows,
        "values": values,
    }

def chains_document(solutions: Sequence[ChainSolution], check: Completeness,
                    config: Dict[str, Any], precision: int = DEFAULT_PRECISION) -> Document:
    "Separation chains with one row per radial energy."

    chains = []
    rows = []
    for s in solutions:
        chains.append({
            "constants": [show(c) for c in s.constants],
            "eigenfunctions": [{"energy": show(f.energy), "polynomial": format_poly(f.polynomial)}
                               for f in s.eigenfunctions],
            "energies": [line.energy.format() for line in s.energies],
            "exponents": [show(e) for e in s.exponents],
            "factor_degrees": list(s.factor_degrees),
            "heun_charpoly": format_poly(s.heun_charpoly),
            "labels": list(s.labels),
        })
        for line in sorted(s.energies, key=lambda l: _root_key(l.energy)):
            rows.append({
                "constants": [show(c) for c in s.constants],
                "energy": line.energy.format(),
                "energy_approx": approx(line.energy, precision),
                "eigenfunctions": len(line.polynomials),
                "labels": list(s.labels),
                "radial_degree": s.degree,
            })
    return {
        "command": "separate",
        "config": config,
        "chains": chains,
        "complete": check.complete,
        "chain_count": check.chain_count,
        "dimension": check.dimension,
        "mismatches": [[show(v) for v in m] for m in check.mismatches],
        "rows": rows,
    }

def items_document(items: Sequence[ConformanceItem], config: Dict[str, Any]) -> Document:
    "Conformance items in suite order."

    rows = [{
        "anchor": item.anchor,
        "corrected": item.corrected or "",
        "draws": list(item.draws),
        "id": item.id,
        "residual": item.residual,
        "status": item.status.value,
    } for item in items]
    summary = {}
    for row in rows:
        summary[row["status"]] = summary.get(row["status"], 0) + 1
    return {
        "command": "verify",
        "config": config,
        "rows": rows,
        "summary": summary,
    }

def contraction_document(probes: Sequence[ContractionProbe], orders: Sequence[Any],
                         limit_matches: bool, config: Dict[str, Any]) -> Document:
    "Distance between the scaled sphere matrix and the Euclidean one at each ε."

    rows = []
    for (i, probe) in enumerate(probes):
        rows.append({
            "difference": show(probe.difference),
            "difference_approx": mpmath.nstr(to_mpf(probe.difference), APPROX_DIGITS),
            "eps": show(probe.eps),
            "order_approx": mpmath.nstr(orders[i - 1], 6) if 0 < i <= len(orders) else "",
        })
    return {
        "command": "contract",
        "config": config,
        "euclid_matrix": [[show(v) for v in row] for row in probes[0].euclid] if probes else [],
        "limit_matches": limit_matches,
        "rows": rows,
    }

def _cell(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, list):
        return " | ".join(_cell(v) for v in value)
    return str(value)

def dumps(document: Document, fmt: str) -> str:
    "Serialize a document as JSON (the whole document) or CSV (its rows)."

    if fmt == "json":
        return json.dumps(document, sort_keys=True, indent=2) + "\n"
    if fmt == "csv":
        rows = document.get("rows", [])
        fields = sorted({key for row in rows for key in row})
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({key: _cell(value) for (key, value) in row.items()})
        return buffer.getvalue()
    raise Error(f"unknown output format: {fmt}")

def write(document: Document, fmt: str, path: Optional[Path] = None):
    "Write a document to a file or to stdout."
    text = dumps(document, fmt)
    if path is None:
        sys.stdout.write(text)
        return
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as ex:
        raise Error(f"cannot write {path}: {ex}") from ex
