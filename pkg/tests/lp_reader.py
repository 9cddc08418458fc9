"""Minimal reader for the LP text subset emitted by export_lp_text.

Kept deliberately independent of the writer: it re-tokenizes the text
and rebuilds an OptModel, so writer bugs cannot cancel out.
"""

import math
import re

from gridsched.optmodel import EQ, GE, LE, MAXIMIZE, MINIMIZE, OptModel

_TERM = re.compile(r"([+-]?)\s*(\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)?\s*([A-Za-z_][A-Za-z0-9_]*)?")


def _parse_expr(text):
    """-> (coeffs_by_name, constant)"""
    coeffs = {}
    constant = 0.0
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TERM.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse expression at {text[pos:]!r}")
        sign, num, name = m.groups()
        value = float(num) if num is not None else 1.0
        if sign == "-":
            value = -value
        if name is None:
            constant += value
        else:
            coeffs[name] = coeffs.get(name, 0.0) + value
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return coeffs, constant


def read_lp_text(text: str) -> OptModel:
    lines = [ln.rstrip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln.strip() and not ln.strip().startswith("\\")]
    section = None
    sense = MINIMIZE
    objective_line = []
    constraint_lines = []
    bound_lines = []
    generals = []
    binaries = []
    for ln in lines:
        word = ln.strip().lower()
        if word in ("minimize", "maximize", "subject to", "bounds", "general", "binary", "end"):
            section = word
            if word == "minimize":
                sense = MINIMIZE
            elif word == "maximize":
                sense = MAXIMIZE
            continue
        if section in ("minimize", "maximize"):
            objective_line.append(ln.strip())
        elif section == "subject to":
            constraint_lines.append(ln.strip())
        elif section == "bounds":
            bound_lines.append(ln.strip())
        elif section == "general":
            generals.append(ln.strip())
        elif section == "binary":
            binaries.append(ln.strip())

    obj_text = " ".join(objective_line)
    if ":" in obj_text:
        obj_text = obj_text.split(":", 1)[1]
    obj_coeffs, obj_const = _parse_expr(obj_text) if obj_text.strip() else ({}, 0.0)

    cons = []
    for ln in constraint_lines:
        body = ln.split(":", 1)[1] if ":" in ln else ln
        for rel_txt, rel in ((" <= ", LE), (" >= ", GE), (" = ", EQ)):
            if rel_txt in body:
                lhs, rhs = body.split(rel_txt)
                coeffs, const = _parse_expr(lhs)
                cons.append((coeffs, rel, float(rhs) - const))
                break
        else:
            raise ValueError(f"no relation in constraint line {ln!r}")

    names = []
    seen = set()

    def note(name):
        if name not in seen:
            seen.add(name)
            names.append(name)

    for name in obj_coeffs:
        note(name)
    for coeffs, _, _ in cons:
        for name in coeffs:
            note(name)

    lb = {}
    ub = {}
    for ln in bound_lines:
        if ln.endswith(" free"):
            name = ln[: -len(" free")].strip()
            note(name)
            lb[name] = -math.inf
            ub[name] = math.inf
            continue
        parts = ln.split("<=")
        if len(parts) == 3:
            lo, name, hi = parts[0].strip(), parts[1].strip(), parts[2].strip()
            note(name)
            lb[name] = float(lo)
            ub[name] = float(hi)
        elif len(parts) == 2:
            name, hi = parts[0].strip(), parts[1].strip()
            note(name)
            lb[name] = -math.inf
            ub[name] = float(hi)
        elif ">=" in ln:
            name, lo = (p.strip() for p in ln.split(">="))
            note(name)
            lb[name] = float(lo)
            ub[name] = math.inf
        else:
            raise ValueError(f"cannot parse bound line {ln!r}")
    for name in generals + binaries:
        note(name)

    model = OptModel(sense=sense)
    index = {}
    for name in names:
        lo = lb.get(name, 0.0)
        hi = ub.get(name, math.inf)
        if name in binaries:
            lo, hi = 0.0, 1.0
        index[name] = model.add_var(
            name, lb=lo, ub=hi, integer=name in generals or name in binaries
        )
    for name, v in obj_coeffs.items():
        model.set_objective_coeff(index[name], v)
    model.objective_constant = obj_const
    for k, (coeffs, rel, rhs) in enumerate(cons):
        model.add_constraint(f"r{k}", {index[n]: v for n, v in coeffs.items()}, rel, rhs)
    return model
