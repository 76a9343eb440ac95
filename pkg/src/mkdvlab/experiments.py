"""Experiment configuration, dispatch and reports.

Configs are flat ``key = value`` text, one pair per line, ``#`` starts a
comment. ``parse_config`` validates every key against the preconditions
of the module that will consume it and reports all problems at once.
``run`` executes one experiment and returns an ``ExperimentReport`` whose
CSV form is byte-identical across runs with the same config and seed.
"""

from __future__ import annotations

import csv
import datetime as _dt
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field as dc_field

import numpy as np

from . import __version__
from .errors import ArgumentError, BlowUpError, ConfigError, LabError
from .estimates import (bilinear_decay, check_admissible, resonance_identity_check,
                        strichartz_dyadic_decay, sub_rng)
from .flows import EvolutionConfig, conserved_quantities, mkdv_solve
from .illposed import continuity_probe, inflation_sweep, u3_unit
from .norms import INF, NormSpec, embedding_ratio
from .spectral import Grid, SpectralField, to_spectral

EXPERIMENTS = ("evolve", "norms", "strichartz", "bilinear", "resonance", "inflate",
               "continuity", "embed")
DEFAULT_SEED = 20240117
CSV_COLUMNS = ("experiment", "index", "abscissa", "measured", "expected_exponent",
               "fitted_exponent", "residual", "pass")

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


# ------------------------------------------------------------ parsing

def _float(text: str) -> float:
    v = float(text)
    if math.isnan(v):
        raise ValueError("nan")
    return v


def _extended(text: str) -> float:
    if text.strip().lower() in ("inf", "infinity", "+inf"):
        return INF
    return _float(text)


def _int(text: str) -> int:
    try:
        return int(text.strip())
    except ValueError:
        pass
    v = float(text)
    if v != int(v):
        raise ValueError("not an integer")
    return int(v)


def _floats(text: str) -> tuple:
    items = [t for t in text.replace(";", ",").split(",") if t.strip()]
    if not items:
        raise ValueError("empty list")
    return tuple(_float(t) for t in items)


def _word(text: str) -> str:
    return text.strip()


# key -> (converter, expected type description)
KEYS = {
    "experiment": (_word, "one of " + "|".join(EXPERIMENTS)),
    "L": (_float, "real"), "n": (_int, "integer"),
    "N_list": (_floats, "comma-separated reals"), "lam_list": (_floats, "comma-separated reals"),
    "eps_list": (_floats, "comma-separated reals"),
    "s": (_float, "real"), "q": (_extended, "real or inf"), "p": (_extended, "real or inf"),
    "T": (_float, "real"), "dt": (_float, "real"), "M": (_int, "integer"),
    "t_eval": (_float, "real"), "delta": (_float, "real"), "sign": (_int, "integer"),
    "seed": (_int, "unsigned 64-bit integer"), "count": (_int, "integer"),
    "amplitude": (_float, "real"), "width": (_float, "real"),
    "modes_per_bump": (_int, "integer"), "integrator": (_word, "if-rk4|strang"),
    "samples": (_int, "integer"), "workers": (_int, "integer"),
    "randomize": (_int, "0 or 1"), "band": (_float, "real"),
    "out": (_word, "path"), "format": (_word, "csv|json|both"),
}

COMMON = {"seed": DEFAULT_SEED, "workers": 1, "format": "csv", "out": None}

DEFAULTS = {
    "evolve": {"L": 40.0, "n": 256, "amplitude": 0.5, "T": 1.0, "dt": 5e-3, "sign": -1,
               "integrator": "if-rk4"},
    "norms": {"L": 256.0, "n": 4096, "s": 0.25, "q": 2.0, "count": 50, "band": 32.0},
    "strichartz": {"L": 256.0, "N_list": (8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0),
                   "p": 8.0, "q": 4.0, "T": 1.0, "M": 256, "count": 20},
    "bilinear": {"L": 4096.0, "n": 65536, "lam_list": (4.0, 8.0, 16.0, 32.0), "width": 0.5,
                 "T": 1.0, "M": 256, "randomize": 0},
    "resonance": {"samples": 10000, "band": 100.0},
    "inflate": {"s": 0.0, "q": 2.0, "N_list": (16.0, 32.0, 64.0, 128.0, 256.0),
                "t_eval": 0.1, "M": 128, "modes_per_bump": 32, "sign": -1},
    "continuity": {"L": 128.0, "n": 512, "s": 0.25, "q": 2.0, "amplitude": 0.1,
                   "eps_list": (1e-2, 1e-3, 1e-4), "T": 1.0, "dt": 1e-2, "sign": -1},
    "embed": {"L": 256.0, "n": 8192, "q": 4.0, "count": 100, "band": 64.0},
}

REQUIRED = ("experiment",)


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    params: dict
    seed: int = DEFAULT_SEED

    def get(self, key, default=None):
        return self.params.get(key, default)

    def as_dict(self) -> dict:
        d = {"experiment": self.experiment, "seed": self.seed}
        d.update(self.params)
        return d


def parse_pairs(text: str) -> tuple[dict, list]:
    """Split config text into ``{key: raw value}``; collect syntax errors."""
    raw, errors = {}, []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value', got {line!r}")
            continue
        k, v = (t.strip() for t in line.split("=", 1))
        if k in raw:
            errors.append(f"line {lineno}: duplicate key {k!r}")
        raw[k] = v
    return raw, errors


def parse_config(text: str, overrides: dict | None = None) -> RunConfig:
    """Validate config text (plus string ``overrides``) into a RunConfig.

    Raises ConfigError carrying every violated constraint.
    """
    raw, errors = parse_pairs(text)
    raw.update({k: str(v) for k, v in (overrides or {}).items() if v is not None})
    for key in raw:
        if key not in KEYS:
            errors.append(f"unknown key {key!r}")
    missing = [k for k in REQUIRED if k not in raw]
    if missing:
        errors.append("missing required key(s): " + ", ".join(missing)
                      + "; experiment must be one of " + ", ".join(EXPERIMENTS))
    values = {}
    for key, text_val in raw.items():
        if key not in KEYS:
            continue
        conv, kind = KEYS[key]
        try:
            values[key] = conv(text_val)
        except (ValueError, OverflowError):
            errors.append(f"{key}: expected {kind}, got {text_val!r}")
    exp = values.get("experiment")
    if exp is not None and exp not in EXPERIMENTS:
        errors.append(f"experiment: expected one of {', '.join(EXPERIMENTS)}, got {exp!r}")
        exp = None
    if exp is None:
        raise ConfigError(errors)
    params = dict(COMMON)
    params.update(DEFAULTS[exp])
    params.update({k: v for k, v in values.items() if k not in ("experiment", "seed")})
    seed = values.get("seed", DEFAULT_SEED)
    errors.extend(_validate(exp, params, seed))
    if errors:
        raise ConfigError(errors)
    params.pop("seed", None)
    return RunConfig(exp, params, int(seed))


def _is_pow2(v) -> bool:
    return isinstance(v, int) and v > 0 and v & (v - 1) == 0


def _validate(exp: str, P: dict, seed) -> list:
    e = []

    def need(cond, msg):
        if not cond:
            e.append(msg)

    need(0 <= seed < 2 ** 64, "seed: must be an unsigned 64-bit integer")
    need(P["workers"] >= 1, "workers: must be >= 1")
    need(P["format"] in ("csv", "json", "both"), "format: expected csv|json|both")
    if "L" in P:
        need(P["L"] > 0 and math.isfinite(P["L"]), "L: torus length must be positive")
    if "n" in P:
        need(_is_pow2(P["n"]), "n: grid size must be a power of two")
    for key in ("T", "dt", "t_eval", "amplitude", "width", "band"):
        if key in P:
            need(P[key] > 0 and math.isfinite(P[key]), f"{key}: must be positive")
    if "sign" in P:
        need(P["sign"] in (1, -1), "sign: must be +1 (focusing) or -1 (defocusing)")
    if "count" in P:
        need(P["count"] >= 1, "count: must be >= 1")
    if "integrator" in P:
        need(P["integrator"] in ("if-rk4", "strang"), "integrator: expected if-rk4|strang")
    if "randomize" in P:
        need(P["randomize"] in (0, 1), "randomize: expected 0 or 1")
    for key in ("q", "p"):
        if key in P and exp in ("strichartz", "inflate", "norms", "embed", "continuity"):
            need(P[key] >= 1, f"{key}: norm exponent must lie in [1, inf]")
    if exp == "evolve":
        if not e:
            try:
                EvolutionConfig(sign=P["sign"], dt=P["dt"], T=P["T"],
                                integrator=P["integrator"])
            except ArgumentError as exc:
                e.append(f"evolve: {exc}")
    elif exp == "strichartz":
        need(P["M"] >= 2 and P["M"] % 2 == 0, "M: time intervals must be even and >= 2")
        try:
            check_admissible(P["p"], P["q"])
        except ArgumentError as exc:
            e.append(f"strichartz: {exc} (admissible pairs: 2/p + 1/q = 1/2, p >= 4, q >= 2)")
        for N in P["N_list"]:
            ok = N >= 1 and abs(math.log2(N) - round(math.log2(N))) < 1e-12
            need(ok, f"N_list: {N:g} is not a dyadic number >= 1")
    elif exp == "bilinear":
        need(P["M"] >= 2, "M: must be >= 2")
        need(all(v > 0 for v in P["lam_list"]), "lam_list: separations must be positive")
        need(len(P["lam_list"]) >= 3, "lam_list: a fit needs at least 3 separations")
        need(sorted(set(P["lam_list"])) == list(P["lam_list"]),
             "lam_list: must be strictly increasing")
        if _is_pow2(P["n"]) and P["L"] > 0:
            g = Grid(P["L"], P["n"])
            top = max(P["lam_list"]) + 1.5 * P["width"]
            need(top < g.nyquist, f"lam_list: product spectrum reaches {top:g} beyond "
                                  f"the grid band {g.nyquist:g}")
    elif exp == "resonance":
        need(P["samples"] >= 1, "samples: must be >= 1")
    elif exp == "inflate":
        need(P["M"] >= 64, "M: time quadrature needs at least 64 intervals")
        need(P["modes_per_bump"] >= 16, "modes_per_bump: bumps need at least 16 modes")
        need(all(N >= 8 for N in P["N_list"]), "N_list: bump frequency N must be >= 8")
        need(len(P["N_list"]) >= 3, "N_list: a fit needs at least 3 values")
        need(len(set(P["N_list"])) == len(P["N_list"]), "N_list: values must be distinct")
        need(P["q"] >= 1, "q: must lie in [1, inf]")
    elif exp == "continuity":
        need(all(0 < v < 1 for v in P["eps_list"]), "eps_list: perturbations must lie in (0, 1)")
        if not e:
            try:
                EvolutionConfig(sign=P["sign"], dt=P["dt"], T=P["T"])
            except ArgumentError as exc:
                e.append(f"continuity: {exc}")
    elif exp in ("norms", "embed"):
        if _is_pow2(P["n"]) and P["L"] > 0:
            g = Grid(P["L"], P["n"])
            need(g.dxi <= 0.25, "L: block norms need mode spacing 2 pi / L <= 1/4")
            need(P["band"] < g.nyquist, f"band: {P['band']:g} exceeds the grid band {g.nyquist:g}")
    return e


# ------------------------------------------------------------ reports

@dataclass
class ExperimentReport:
    experiment: str
    config: dict
    abscissae: list = dc_field(default_factory=list)
    measured: list = dc_field(default_factory=list)
    expected_exponent: float = math.nan
    fitted_exponent: float = math.nan
    residual: float = math.nan
    passed: bool = False
    window: list | None = None
    environment: dict = dc_field(default_factory=dict)
    metadata: dict = dc_field(default_factory=dict)
    error: dict | None = None

    def to_json(self) -> str:
        return json.dumps(_jsonable(asdict(self)), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentReport":
        d = _unjson(json.loads(text))
        return cls(**d)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    return v


_SPECIAL = {"nan": math.nan, "inf": math.inf, "-inf": -math.inf}


def _unjson(v):
    if isinstance(v, dict):
        return {k: _unjson(x) for k, x in v.items()}
    if isinstance(v, list):
        return [_unjson(x) for x in v]
    if isinstance(v, str) and v in _SPECIAL:
        return _SPECIAL[v]
    return v


def _g17(v) -> str:
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(v, ".17g")


def emit_csv(report: ExperimentReport) -> str:
    """Header plus one row per sweep point; floats with 17 significant digits."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for k, (x, y) in enumerate(zip(report.abscissae, report.measured)):
        w.writerow([report.experiment, k, _g17(x), _g17(y), _g17(report.expected_exponent),
                    _g17(report.fitted_exponent), _g17(report.residual),
                    int(bool(report.passed))])
    return buf.getvalue()


def parse_csv(text: str) -> list[dict]:
    """Inverse of ``emit_csv``: one dict per row with numeric fields restored."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != CSV_COLUMNS:
        raise ArgumentError("not an experiment CSV (bad header)")
    out = []
    for r in rows[1:]:
        out.append({"experiment": r[0], "index": int(r[1]), "abscissa": float(r[2]),
                    "measured": float(r[3]), "expected_exponent": float(r[4]),
                    "fitted_exponent": float(r[5]), "residual": float(r[6]),
                    "pass": bool(int(r[7]))})
    return out


# ------------------------------------------------------------ runners

def _random_bandlimited(grid: Grid, band: float, rng, real: bool = True) -> SpectralField:
    xi = grid.freqs
    c = (rng.standard_normal(grid.n) + 1j * rng.standard_normal(grid.n)) * (np.abs(xi) < band)
    f = SpectralField(grid, c)
    return f.symmetrized() if real else f


def _run_evolve(cfg: RunConfig, rep: ExperimentReport):
    P = cfg.params
    g = Grid(P["L"], P["n"])
    u0 = to_spectral(P["amplitude"] * np.exp(-g.x ** 2), g)
    ec = EvolutionConfig(sign=P["sign"], dt=P["dt"], T=P["T"], integrator=P["integrator"])
    tr = mkdv_solve(u0, ec)
    cq = conserved_quantities(tr, P["sign"])
    rep.abscissae = tr.times.tolist()
    rep.measured = cq.mass.tolist()
    rep.window = [0.0, 1e-8]
    rep.metadata.update(mass_drift=cq.mass_drift, energy_drift=cq.energy_drift,
                        dt_effective=ec.step, steps=ec.steps)
    rep.passed = cq.mass_drift < 1e-8


def _run_norms(cfg: RunConfig, rep: ExperimentReport):
    P = cfg.params
    g = Grid(P["L"], P["n"])
    rng = sub_rng(cfg.seed, 0)
    mod, sob = NormSpec.modulation(P["s"], P["q"]), NormSpec.sobolev(P["s"])
    ratios = [embedding_ratio(_random_bandlimited(g, P["band"], rng), mod, sob)
              for _ in range(P["count"])]
    rep.abscissae = list(range(1, len(ratios) + 1))
    rep.measured = ratios
    if P["q"] == 2:
        rep.window = [0.5, 2.0]
        rep.passed = all(0.5 <= r <= 2.0 for r in ratios)
    else:
        rep.passed = all(math.isfinite(r) and r > 0 for r in ratios)
    rep.metadata.update(outer=mod.label(), inner=sob.label())


def _fit_window(rep, res, tol):
    rep.abscissae = res.abscissae.tolist()
    rep.measured = res.measured.tolist()
    rep.expected_exponent = float(res.metadata["expected_exponent"])
    rep.fitted_exponent = res.fitted_exponent
    rep.residual = res.fit_residual
    rep.window = [rep.expected_exponent - tol, rep.expected_exponent + tol]
    rep.passed = bool(rep.window[0] <= res.fitted_exponent <= rep.window[1])
    rep.metadata.update(res.metadata)


def _run_strichartz(cfg: RunConfig, rep: ExperimentReport):
    P = cfg.params
    res = strichartz_dyadic_decay(P["N_list"], T=P["T"], count=P["count"], seed=cfg.seed,
                                  length=P["L"], M=P["M"], p=P["p"], q=P["q"])
    _fit_window(rep, res, 0.03)
    rep.passed = rep.passed and res.fit_residual < 0.1


def _run_bilinear(cfg: RunConfig, rep: ExperimentReport):
    P = cfg.params
    res = bilinear_decay(P["lam_list"], width=P["width"], T=P["T"], M=P["M"],
                         length=P["L"], n=P["n"], seed=cfg.seed,
                         randomize=bool(P["randomize"]))
    _fit_window(rep, res, 0.05)


def _run_resonance(cfg: RunConfig, rep: ExperimentReport):
    P = cfg.params
    rng = sub_rng(cfg.seed, 0)
    x = rng.uniform(-P["band"], P["band"], size=(P["samples"], 3))
    r = resonance_identity_check(x[:, 0], x[:, 1], x[:, 2], relative=True)
    rep.abscissae = list(range(1, len(r) + 1))
    rep.measured = np.asarray(r).tolist()
    rep.window = [0.0, 1e-6]
    rep.passed = bool(np.all(np.asarray(r) < 1e-6))
    rep.metadata["max_residual"] = float(np.max(r))


def _run_inflate(cfg: RunConfig, rep: ExperimentReport):
    P = cfg.params
    Ns = sorted(P["N_list"])
    cache = {}
    if P["workers"] > 1:
        def fill(N):
            u3_unit(N, P["t_eval"], P["M"], P["modes_per_bump"], "time", P["sign"], cache)
        with ThreadPoolExecutor(P["workers"]) as ex:
            list(ex.map(fill, Ns))
    res = inflation_sweep(P["s"], P["q"], Ns, t=P["t_eval"], M=P["M"],
                          modes_per_bump=P["modes_per_bump"], sign=P["sign"], cache=cache)
    _fit_window(rep, res, 0.15 if P["s"] <= -0.25 else 0.1)


def _run_continuity(cfg: RunConfig, rep: ExperimentReport):
    P = cfg.params
    g = Grid(P["L"], P["n"])
    u0 = to_spectral(P["amplitude"] * np.exp(-g.x ** 2), g)
    bump = to_spectral(np.exp(-(g.x - 1.0) ** 2) * np.cos(3 * g.x), g)
    ec = EvolutionConfig(sign=P["sign"], dt=P["dt"], T=P["T"])
    eps = sorted(P["eps_list"])
    ratios = [continuity_probe(u0, u0 + bump * e, P["s"], P["q"], ec).ratio for e in eps]
    rep.abscissae = eps
    rep.measured = ratios
    rep.window = [0.5, 2.0]
    spread = max(ratios) / min(ratios)
    rep.metadata["spread"] = spread
    rep.passed = spread <= 2.0


def _run_embed(cfg: RunConfig, rep: ExperimentReport):
    P = cfg.params
    g = Grid(P["L"], P["n"])
    q = P["q"]
    rng = sub_rng(cfg.seed, 0)
    outer = NormSpec.besov((0.0 if q == INF else 1.0 / q) - 0.25, q)
    inner = NormSpec.modulation(0.25, q)
    ratios = [embedding_ratio(_random_bandlimited(g, P["band"], rng), outer, inner)
              for _ in range(P["count"])]
    half = max(ratios[: max(1, len(ratios) // 2)])
    growth = max(ratios) / half
    rep.abscissae = list(range(1, len(ratios) + 1))
    rep.measured = ratios
    rep.window = [0.0, 1.1]
    rep.metadata.update(outer=outer.label(), inner=inner.label(), max_ratio=max(ratios),
                        growth_on_doubling=growth)
    rep.passed = all(math.isfinite(r) for r in ratios) and growth <= 1.1


_RUNNERS = {"evolve": _run_evolve, "norms": _run_norms, "strichartz": _run_strichartz,
            "bilinear": _run_bilinear, "resonance": _run_resonance, "inflate": _run_inflate,
            "continuity": _run_continuity, "embed": _run_embed}


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, (ConfigError, ArgumentError)):
        return EXIT_USAGE
    return EXIT_NUMERIC


def run(cfg: RunConfig, timestamp: str | None = None) -> ExperimentReport:
    """Execute ``cfg``. Module errors are caught and recorded in ``report.error``."""
    env = {"version": __version__,
           "timestamp": timestamp or _dt.datetime.now(_dt.timezone.utc).isoformat()}
    if "L" in cfg.params and "n" in cfg.params:
        env["grid"] = [cfg.params["L"], cfg.params["n"]]
    rep = ExperimentReport(cfg.experiment, cfg.as_dict(), environment=env)
    try:
        _RUNNERS[cfg.experiment](cfg, rep)
    except (LabError, FloatingPointError) as exc:
        rep.passed = False
        rep.error = {"type": type(exc).__name__, "message": str(exc),
                     "exit_code": exit_code_for(exc)}
        if isinstance(exc, BlowUpError):
            rep.error["last_valid_time"] = exc.last_valid_time
    return rep


def exit_code(rep: ExperimentReport) -> int:
    if rep.error:
        return int(rep.error.get("exit_code", EXIT_NUMERIC))
    return EXIT_PASS if rep.passed else EXIT_FAIL


__all__ = ["RunConfig", "ExperimentReport", "parse_config", "run", "emit_csv", "parse_csv",
           "exit_code", "EXPERIMENTS", "DEFAULT_SEED", "KEYS"]
