"""Scenario files: parsing, the end-to-end pipeline, and report rendering."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from . import weights as W
from .errors import CompletenessWarning, InvalidInputError
from .moduli import (
    ConeData,
    ModuliReport,
    cross_check,
    moduli_dim_AC,
    moduli_dim_compact,
    moduli_dim_CS,
    moduli_dim_CSAC,
    stability_check,
)
from .spectra import (
    Explicit,
    FlatTorus,
    LinkDescriptor,
    MeshLink,
    RoundSphere,
    Spectrum,
    resolve_link,
)
from .topology import ConifoldTopology, require_consistent

SCHEMA_VERSION = 1
SIG_DIGITS = 12

TOP_KEYS = {"schema_version", "m", "case", "ends", "topology", "options", "name", "description"}
END_KEYS = {"kind", "rate", "link", "sym_dim", "link_b1"}
TOPOLOGY_KEYS = {"b1", "b1_c", "b1_c_bullet"}
OPTION_KEYS = {"require_stable", "strict_completeness", "tolerances", "mesh"}
LINK_KEYS = {
    "sphere": {"type", "dim"},
    "torus": {"type", "basis"},
    "explicit": {"type", "spectrum", "cutoff"},
    "mesh": {"type", "path"},
}


@dataclass(frozen=True)
class EndConfig:
    kind: str
    rate: float | None
    link: LinkDescriptor
    sym_dim: int | None
    raw_link: dict


@dataclass
class ScenarioConfig:
    schema_version: int
    m: int
    case: str
    ends: list[EndConfig]
    topology: dict
    require_stable: bool = True
    strict_completeness: bool = True
    tol: float = W.DEFAULT_TOL
    mesh_tol: float = 1e-8
    mesh_strict: bool = False
    name: str | None = None
    warnings: list[str] = field(default_factory=list)
    raw: dict = field(default_factory=dict)

    @property
    def cs_ends(self) -> list[EndConfig]:
        return [e for e in self.ends if e.kind == "CS"]

    @property
    def ac_ends(self) -> list[EndConfig]:
        return [e for e in self.ends if e.kind == "AC"]


def _unknown(keys, allowed, where, strict, notes):
    extra = sorted(set(keys) - allowed)
    if extra:
        msg = f"unknown keys in {where}: {', '.join(extra)}"
        if strict:
            raise InvalidInputError(msg)
        notes.append(msg)


def _int(d, key, where, default=None, minimum=None):
    if key not in d:
        if default is None:
            raise InvalidInputError(f"{where}: missing required key {key!r}")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise InvalidInputError(f"{where}: {key!r} must be an integer, got {v!r}")
    if minimum is not None and v < minimum:
        raise InvalidInputError(f"{where}: {key!r} must be >= {minimum}, got {v}")
    return v


def _number(v, where):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise InvalidInputError(f"{where} must be a number, got {v!r}")
    return float(v)


def _parse_link(raw, where, base_dir: Path, opts, strict, notes) -> Any:
    if not isinstance(raw, dict) or "type" not in raw:
        raise InvalidInputError(f"{where}: link must be an object with a 'type'")
    kind = raw["type"]
    if kind not in LINK_KEYS:
        raise InvalidInputError(f"{where}: unknown link type {kind!r}")
    _unknown(raw, LINK_KEYS[kind], where, strict, notes)
    if kind == "sphere":
        return RoundSphere(_int(raw, "dim", where, minimum=2))
    if kind == "torus":
        basis = raw.get("basis")
        if not isinstance(basis, list) or not all(isinstance(r, list) for r in basis):
            raise InvalidInputError(f"{where}: torus basis must be a list of rows")
        return FlatTorus(tuple(tuple(_number(x, f"{where} basis entry") for x in r) for r in basis))
    if kind == "explicit":
        pairs = raw.get("spectrum")
        if not isinstance(pairs, list):
            raise InvalidInputError(f"{where}: explicit spectrum must be a list of [eigenvalue, multiplicity]")
        entries = []
        for p in pairs:
            if not (isinstance(p, list) and len(p) == 2):
                raise InvalidInputError(f"{where}: bad spectrum entry {p!r}")
            entries.append((_number(p[0], f"{where} eigenvalue"), _int({"k": p[1]}, "k", where, minimum=1)))
        cutoff = _number(raw["cutoff"], f"{where} cutoff") if "cutoff" in raw else max(e for e, _ in entries)
        return Explicit(Spectrum(tuple(entries), cutoff, "explicit"))
    path = Path(raw.get("path", ""))
    if not raw.get("path"):
        raise InvalidInputError(f"{where}: mesh link needs a 'path'")
    if not path.is_absolute():
        path = (base_dir / path).resolve()
    return MeshLink(path, tol=opts["mesh_tol"], strict=opts["mesh_strict"])


def parse_config(text: str, strict: bool = False, base_dir=None) -> ScenarioConfig:
    """Validate a JSON scenario description."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InvalidInputError("config must be a JSON object")
    base_dir = Path(base_dir) if base_dir is not None else Path.cwd()
    notes: list[str] = []
    _unknown(data, TOP_KEYS, "config", strict, notes)

    version = _int(data, "schema_version", "config")
    if version != SCHEMA_VERSION:
        raise InvalidInputError(f"unsupported schema_version {version}, expected {SCHEMA_VERSION}")
    m = _int(data, "m", "config")
    if m < 3:
        raise InvalidInputError(f"ambient dimension m must be at least 3, got {m}")
    case = data.get("case")
    if case not in W.CASES:
        raise InvalidInputError(f"case must be one of {W.CASES}, got {case!r}")

    raw_opts = data.get("options", {})
    if not isinstance(raw_opts, dict):
        raise InvalidInputError("options must be an object")
    _unknown(raw_opts, OPTION_KEYS, "options", strict, notes)
    tols = raw_opts.get("tolerances", {})
    mesh = raw_opts.get("mesh", {})
    _unknown(tols, {"exceptional"}, "options.tolerances", strict, notes)
    _unknown(mesh, {"tol", "strict"}, "options.mesh", strict, notes)
    opts = {
        "require_stable": bool(raw_opts.get("require_stable", True)),
        "strict_completeness": bool(raw_opts.get("strict_completeness", True)) or strict,
        "tol": _number(tols.get("exceptional", W.DEFAULT_TOL), "tolerances.exceptional"),
        "mesh_tol": _number(mesh.get("tol", 1e-8), "mesh.tol"),
        "mesh_strict": bool(mesh.get("strict", False)),
    }

    raw_ends = data.get("ends", [])
    if not isinstance(raw_ends, list):
        raise InvalidInputError("ends must be a list")
    ends = []
    for i, raw in enumerate(raw_ends):
        where = f"ends[{i}]"
        if not isinstance(raw, dict):
            raise InvalidInputError(f"{where} must be an object")
        _unknown(raw, END_KEYS, where, strict, notes)
        kind = raw.get("kind")
        if kind not in ("CS", "AC"):
            raise InvalidInputError(f"{where}: kind must be 'CS' or 'AC', got {kind!r}")
        if "rate" not in raw:
            raise InvalidInputError(f"{where}: missing required key 'rate'")
        rate = _number(raw["rate"], f"{where} rate")
        if kind == "CS" and not rate > 2:
            raise InvalidInputError(f"{where}: CS rate must exceed 2, got {rate}")
        if kind == "AC" and not rate < 2:
            raise InvalidInputError(f"{where}: AC rate must be below 2, got {rate}")
        if "link" not in raw:
            raise InvalidInputError(f"{where}: missing required key 'link'")
        variant = _parse_link(raw["link"], f"{where}.link", base_dir, opts, strict, notes)
        link_b1 = _int(raw, "link_b1", where, default=0, minimum=0)
        sym_dim = raw.get("sym_dim")
        if sym_dim is not None:
            sym_dim = _int(raw, "sym_dim", where, minimum=0)
            if sym_dim > m * m - 1:
                raise InvalidInputError(f"{where}: sym_dim {sym_dim} exceeds dim SU(m) = {m * m - 1}")
        elif kind == "CS":
            raise InvalidInputError(f"{where}: CS ends need 'sym_dim'")
        ends.append(EndConfig(kind, rate, LinkDescriptor(variant, 1, link_b1), sym_dim, raw["link"]))

    kinds = {e.kind for e in ends}
    expected = {"compact": set(), "AC": {"AC"}, "CS": {"CS"}, "CSAC": {"CS", "AC"}}[case]
    if kinds != expected:
        raise InvalidInputError(f"case {case} needs end kinds {sorted(expected)}, got {sorted(kinds)}")

    topo = data.get("topology")
    if not isinstance(topo, dict):
        raise InvalidInputError("config: missing required key 'topology'")
    _unknown(topo, TOPOLOGY_KEYS, "topology", strict, notes)
    b1 = _int(topo, "b1", "topology", minimum=0)
    if case == "compact":
        b1_c = _int(topo, "b1_c", "topology", default=b1, minimum=0)
    else:
        b1_c = _int(topo, "b1_c", "topology", minimum=0)
    b1_c_bullet = topo.get("b1_c_bullet")
    if b1_c_bullet is not None:
        b1_c_bullet = _int(topo, "b1_c_bullet", "topology", minimum=0)
    if case == "CSAC" and any(e.rate > 0 for e in ends if e.kind == "AC") and b1_c_bullet is None:
        raise InvalidInputError("topology: b1_c_bullet is required for CS/AC scenarios with lambda > 0")

    return ScenarioConfig(
        schema_version=version,
        m=m,
        case=case,
        ends=ends,
        topology={"b1": b1, "b1_c": b1_c, "b1_c_bullet": b1_c_bullet},
        require_stable=opts["require_stable"],
        strict_completeness=opts["strict_completeness"],
        tol=opts["tol"],
        mesh_tol=opts["mesh_tol"],
        mesh_strict=opts["mesh_strict"],
        name=data.get("name"),
        warnings=notes,
        raw=_normalized(data, ends),
    )


def _normalized(data: dict, ends: list[EndConfig]) -> dict:
    """Echo of the config with mesh paths made absolute."""
    out = json.loads(json.dumps(data))
    for raw, end in zip(out.get("ends", []), ends):
        if isinstance(end.link.variant, MeshLink):
            raw["link"]["path"] = str(end.link.variant.path)
    return out


def load_config(path, strict: bool = False) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InvalidInputError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, strict=strict, base_dir=path.parent)


def build_topology(cfg: ScenarioConfig) -> ConifoldTopology:
    ordered = cfg.cs_ends + cfg.ac_ends
    return ConifoldTopology(
        m=cfg.m,
        s=len(cfg.cs_ends),
        l=len(cfg.ac_ends),
        b1=cfg.topology["b1"],
        b1_c=cfg.topology["b1_c"],
        b1_c_bullet=cfg.topology["b1_c_bullet"],
        link_b1=tuple(e.link.b1 for e in ordered),
    )


def required_cutoff(kind: str, rate: float, m: int) -> float:
    """Spectrum range needed for one end: the rate window, plus 2m for stability of CS cones."""
    need = W.Window(min(2 - m, rate), max(0.0, rate)).required_cutoff(m)
    if kind == "CS":
        need = max(need, 2.0 * m)
    return need


@dataclass
class ResolvedEnd:
    config: EndConfig
    spectrum: Spectrum
    weights: tuple[tuple[float, int], ...]
    window: tuple[float, float]
    complete: bool


@dataclass
class RunReport:
    scenario: dict
    ends: list[ResolvedEnd]
    verdicts: list[tuple[int, Any]]
    moduli: ModuliReport | None
    cross_checks: list[str]
    warnings: list[str]


def resolve_ends(cfg: ScenarioConfig, notes: list[str]) -> list[ResolvedEnd]:
    # the Fredholm window is shared by all ends, so every link is resolved to the largest need
    need = max((required_cutoff(e.kind, e.rate, cfg.m) for e in cfg.ends), default=0.0)
    out = []
    for end in cfg.ends:
        spec = resolve_link(end.link, need, cfg.m)
        window = (min(2 - cfg.m, end.rate), max(2.0, end.rate))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", CompletenessWarning)
            ws = W.exceptional_set([spec], cfg.m, window, strict=False)
        if not ws.complete[0]:
            notes.append(
                f"{end.kind} end (rate {end.rate:g}): exceptional weights listed in "
                f"[{window[0]:g}, {window[1]:g}] are certified only up to eigenvalue "
                f"{spec.cutoff:.12g}; the full window needs {W.Window(*window).required_cutoff(cfg.m):.12g}"
            )
        out.append(ResolvedEnd(end, spec, ws.per_end[0], window, ws.complete[0]))
    return out


def run(cfg: ScenarioConfig) -> RunReport:
    """Resolve spectra, check topology, compute verdicts, dimensions and cross-checks."""
    notes = list(cfg.warnings)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", CompletenessWarning)
        top = build_topology(cfg)
        require_consistent(top)
        resolved = resolve_ends(cfg, notes)
        strict = cfg.strict_completeness
        cs = [r for r in resolved if r.config.kind == "CS"]
        ac = [r for r in resolved if r.config.kind == "AC"]
        cones = [
            ConeData(r.spectrum, cfg.m, r.config.sym_dim, r.config.link.is_sphere) for r in cs
        ]
        ac_ends = [W.ConeEnd("AC", r.spectrum, r.config.rate, r.config.sym_dim) for r in ac]
        mu = [r.config.rate for r in cs]
        lam = [r.config.rate for r in ac]

        verdicts = [(i, stability_check(c, cfg.tol)) for i, c in enumerate(cones)]
        if cfg.case == "compact":
            report = moduli_dim_compact(top.b1)
        elif cfg.case == "AC":
            report = moduli_dim_AC(top, ac_ends, lam, tol=cfg.tol, strict=strict)
        elif cfg.case == "CS":
            report = moduli_dim_CS(top, cones, mu, cfg.require_stable, tol=cfg.tol, strict=strict)
        else:
            report = moduli_dim_CSAC(
                top, cones, ac_ends, mu, lam, cfg.require_stable, tol=cfg.tol, strict=strict
            )
        checks = cross_check(report, top, cones, ac_ends, tol=cfg.tol, strict=strict)
    for w in caught:
        msg = str(w.message)
        if msg not in notes:
            notes.append(msg)
    return RunReport(cfg.raw, resolved, verdicts, report, checks, notes)


def _num(x):
    if isinstance(x, float):
        return float(f"{x:.{SIG_DIGITS}g}")
    return x


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return _num(obj)


def report_dict(report: RunReport) -> dict:
    ends = []
    for r in report.ends:
        ends.append({
            "kind": r.config.kind,
            "rate": r.config.rate,
            "sym_dim": r.config.sym_dim,
            "spectrum_source": r.spectrum.source,
            "spectrum_cutoff": r.spectrum.cutoff,
            "spectrum": [[e, k] for e, k in r.spectrum.entries],
            "window": list(r.window),
            "window_complete": r.complete,
            "exceptional_weights": [[g, k] for g, k in r.weights],
        })
    mr = report.moduli
    moduli = {
        "case": mr.case,
        "rate_regime": mr.rate_regime,
        "dim_I": mr.dim_I,
        "dim_O": mr.dim_O,
        "dim_O_is_bound": mr.dim_O_is_bound,
        "smooth": mr.smooth,
        "stability_required": mr.stability_required,
        "breakdown": [{"name": t.name, "value": t.value, "meaning": t.meaning} for t in mr.breakdown],
        "epsilon_max": list(mr.epsilon_max),
        "notes": list(mr.notes),
    }
    return _clean({
        "schema_version": SCHEMA_VERSION,
        "scenario": report.scenario,
        "ends": ends,
        "stability": [{"cs_end": i, **v.as_dict()} for i, v in report.verdicts],
        "moduli": moduli,
        "cross_checks": report.cross_checks,
        "warnings": report.warnings,
    })


def render(report: RunReport, fmt: str = "text") -> str:
    d = report_dict(report)
    if fmt == "machine":
        return json.dumps(d, indent=2, ensure_ascii=False) + "\n"
    if fmt != "text":
        raise InvalidInputError(f"unknown format {fmt!r}")
    return render_text(d)


def render_text(d: dict) -> str:
    sc = d["scenario"]
    mo = d["moduli"]
    lines = []
    title = sc.get("name") or "scenario"
    lines.append(f"{title}: m = {sc['m']}, case {sc['case']}")
    lines.append("")
    lines.append("Ends")
    for i, e in enumerate(d["ends"]):
        lines.append(
            f"  [{i}] {e['kind']} rate {e['rate']}  link spectrum ({e['spectrum_source']}, cutoff {e['spectrum_cutoff']})"
        )
        ws = ", ".join(f"{g}:{k}" for g, k in e["exceptional_weights"]) or "none"
        flag = "" if e["window_complete"] else "  (incomplete)"
        lines.append(f"      exceptional weights in [{e['window'][0]}, {e['window'][1]}]: {ws}{flag}")
    if d["stability"]:
        lines.append("")
        lines.append("Stability of CS cones")
        for v in d["stability"]:
            verdict = "stable" if v["stable"] else "unstable"
            parts = ", ".join(
                f"gamma={g}: {v['found'][g]}/{v['expected'][g]} {v['flags'][g]}" for g in v["expected"]
            )
            lines.append(f"  cone {v['cs_end']}: {verdict}  ({parts})")
            if v["extra_weights"]:
                extra = ", ".join(f"{g}:{k}" for g, k in v["extra_weights"])
                lines.append(f"      extra weights: {extra}")
    lines.append("")
    lines.append(f"Moduli ({mo['case']}, regime {mo['rate_regime']})")
    width = max(len(t["name"]) for t in mo["breakdown"])
    for t in mo["breakdown"]:
        lines.append(f"  {t['name']:<{width}}  {t['value']:>4}   {t['meaning']}")
    lines.append(f"  {'dim_I':<{width}}  {mo['dim_I']:>4}")
    bound = " (upper bound)" if mo["dim_O_is_bound"] else ""
    lines.append(f"  {'dim_O':<{width}}  {mo['dim_O']:>4}{bound}")
    lines.append(f"  smooth: {'yes' if mo['smooth'] else 'not guaranteed'}")
    if any(x is not None for x in mo["epsilon_max"]):
        eps = ", ".join("unbounded" if x is None else str(x) for x in mo["epsilon_max"])
        lines.append(f"  epsilon_max per CS end: {eps}")
    for n in mo["notes"]:
        lines.append(f"  note: {n}")
    lines.append("")
    lines.append("Cross-checks")
    for c in d["cross_checks"]:
        lines.append(f"  ok  {c}")
    lines.append("")
    lines.append("Warnings")
    if d["warnings"]:
        for w in d["warnings"]:
            lines.append(f"  - {w}")
    else:
        lines.append("  none")
    return "\n".join(lines) + "\n"


def verify_report(data: dict, base_dir=None) -> list[str]:
    """Recompute a machine report from its scenario echo; return mismatches."""
    cfg = parse_config(json.dumps(data["scenario"]), base_dir=base_dir)
    fresh = report_dict(run(cfg))
    problems = []
    for key in ("dim_I", "dim_O", "dim_O_is_bound", "rate_regime"):
        if fresh["moduli"][key] != data["moduli"][key]:
            problems.append(f"{key}: report {data['moduli'][key]}, recomputed {fresh['moduli'][key]}")
    old = {t["name"]: t["value"] for t in data["moduli"]["breakdown"]}
    new = {t["name"]: t["value"] for t in fresh["moduli"]["breakdown"]}
    if old != new:
        problems.append(f"breakdown: report {old}, recomputed {new}")
    for i, (a, b) in enumerate(zip(data["ends"], fresh["ends"])):
        if a["exceptional_weights"] != b["exceptional_weights"]:
            problems.append(f"end {i}: exceptional weights differ")
    if [v["stable"] for v in data["stability"]] != [v["stable"] for v in fresh["stability"]]:
        problems.append("stability verdicts differ")
    return problems
