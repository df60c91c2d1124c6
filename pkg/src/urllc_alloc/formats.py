"""Config parsing and CSV / plot-data emission."""

import csv
import io
import sys

from .results import CnomaAllocation, MultiAllocation, NomaAllocation, OmaAllocation, RelayAllocation

CSV_COLUMNS = (
    "scheme", "sweep_param", "sweep_value", "feasible",
    "m1", "m2", "p1", "p2", "ps", "pr",
    "eps_target", "ln_eps_target", "eps_robot",
)
AVAILABILITY_COLUMNS = (
    "scheme", "sweep_param", "sweep_value", "n_draws", "n_available", "fraction", "seed", "target",
)


class ConfigError(ValueError):
    pass


def parse_config(text, allowed):
    """``key = value`` lines into a dict; '#' starts a comment, unknown keys are errors."""
    out = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"line {n}: expected 'key = value'")
        if key not in allowed:
            raise ConfigError(f"line {n}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"line {n}: duplicate key {key!r}")
        out[key] = value
    return out


def read_config(path, allowed):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    return parse_config(text, allowed)


def fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


def allocation_fields(a):
    """(m1, m2, p1, p2, ps, pr) with None for fields a scheme does not have."""
    if isinstance(a, OmaAllocation):
        return a.m1, a.m2, a.p1, a.p2, None, None
    if isinstance(a, NomaAllocation):
        return a.m, a.m, a.p1, a.p2, None, None
    if isinstance(a, RelayAllocation):
        return a.m1, a.m2, None, None, a.ps, a.pr
    if isinstance(a, CnomaAllocation):
        return a.m1, a.m2, a.p1, a.p2, None, a.pr
    if isinstance(a, MultiAllocation):
        # symbols spent on the constrained devices, then the target device
        return sum(a.m[:-1]), a.m[-1], None, a.p[-1], None, None
    return (None,) * 6


def row_values(row):
    o = row.outcome
    fields = allocation_fields(o.allocation) if o.feasible else (None,) * 6
    eps = o.eps_target if o.feasible else None
    return (
        o.scheme,
        row.sweep_param or "",
        row.sweep_value,
        o.feasible,
        *fields,
        eps.value if eps else 1.0,
        eps.log_value if eps else 0.0,
        o.eps_robot.value if (o.feasible and o.eps_robot is not None) else None,
    )


def _csv_bytes(header, records):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for rec in records:
        w.writerow([v if isinstance(v, str) else fmt(v) for v in rec])
    return buf.getvalue().encode("utf-8")


def emit_csv(rows):
    return _csv_bytes(CSV_COLUMNS, (row_values(r) for r in rows))


def emit_plotdata(rows):
    """Whitespace-separated blocks per scheme, separated by two blank lines."""
    rows = list(rows)
    out = []
    for scheme in dict.fromkeys(r.outcome.scheme for r in rows):
        if out:
            out.append("\n\n")
        out.append(f"# scheme {scheme}\n# sweep_value ln_eps_target eps_target feasible\n")
        for r in rows:
            if r.outcome.scheme != scheme:
                continue
            v = row_values(r)
            x = fmt(v[2]) if v[2] is not None else "0"
            out.append(f"{x} {fmt(v[11])} {fmt(v[10])} {fmt(v[3])}\n")
    return "".join(out).encode("utf-8")


def availability_values(rep):
    return (
        rep.scheme, rep.sweep_param or "", rep.sweep_value, rep.n_draws, rep.n_available,
        rep.fraction, rep.seed, rep.target,
    )


def emit_availability_csv(reports):
    return _csv_bytes(AVAILABILITY_COLUMNS, (availability_values(r) for r in reports))


def emit_availability_plotdata(reports):
    reports = list(reports)
    out = []
    for scheme in dict.fromkeys(r.scheme for r in reports):
        if out:
            out.append("\n\n")
        out.append(f"# scheme {scheme}\n# sweep_value fraction n_available n_draws\n")
        for r in reports:
            if r.scheme == scheme:
                x = fmt(r.sweep_value) if r.sweep_value is not None else "0"
                out.append(f"{x} {fmt(r.fraction)} {r.n_available} {r.n_draws}\n")
    return "".join(out).encode("utf-8")


def write_output(path, data):
    """Write bytes to ``path`` ('-' for stdout); failures name the path."""
    if path in (None, "-"):
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
        return
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from exc
