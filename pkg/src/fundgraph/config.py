"""Run configuration: INI-style sections of key = value pairs.

Command-line flags override file values; every value has a default so a
missing config file still yields a runnable configuration.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace

from .errors import ParameterError
from .trainer import TrainParams
from .walker import WalkParams

_KNOWN_KEYS = {
    "input": {"holdings", "format", "benchmarks"},
    "synth": {"n_funds", "n_assets", "n_communities", "overlap", "holdings_per_fund"},
    "cleaning": {"coverage_threshold", "validate_checksum"},
    "walks": {"r", "l", "p", "q"},
    "train": {"d", "window", "negatives", "epochs", "lr_initial", "lr_final"},
    "evaluate": {"k_min", "k_max", "beta"},
    "similarity": {"m_values"},
    "grid": {"rows"},
    "run": {"seed", "workers", "deterministic"},
}

_GRID_ROW_KEYS = {"d", "l", "r", "p", "q", "window", "negatives", "epochs"}


@dataclass
class SynthConfig:
    n_funds: int = 200
    n_assets: int = 1000
    n_communities: int = 2
    overlap: float = 0.1
    holdings_per_fund: int | None = None


@dataclass
class RunConfig:
    holdings_path: str | None = None
    holdings_format: str = "edge-csv"
    benchmarks_path: str | None = None
    synth: SynthConfig = field(default_factory=SynthConfig)
    coverage_threshold: float = 95.0
    validate_checksum: bool = False
    walk: WalkParams = field(default_factory=lambda: WalkParams(r=10, l=40, p=0.1, q=5.0))
    train: TrainParams = field(default_factory=lambda: TrainParams(d=16, window=5))
    k_min: int = 2
    k_max: int = 10
    beta: float = 0.01
    m_values: list[int] = field(default_factory=lambda: [5, 10, 20, 50])
    grid_rows: list[dict] = field(default_factory=list)
    seed: int = 7
    workers: int = 1
    deterministic: bool = True

    @property
    def source(self) -> str:
        return "file" if self.holdings_path else "synth"

    def resolved_walk(self) -> WalkParams:
        return replace(self.walk, seed=self.seed)

    def resolved_train(self) -> TrainParams:
        return replace(self.train, seed=self.seed)

    def grid(self) -> list[tuple[WalkParams, TrainParams]]:
        """Expand [grid] rows over the base walk/train parameters."""
        rows = []
        for overrides in self.grid_rows:
            wp = replace(
                self.resolved_walk(),
                **{k: overrides[k] for k in ("r", "l", "p", "q") if k in overrides},
            )
            tp = replace(
                self.resolved_train(),
                **{k: overrides[k] for k in ("d", "window", "negatives", "epochs") if k in overrides},
            )
            rows.append((wp, tp))
        return rows


def _to_bool(raw: str, where: str) -> bool:
    v = raw.strip().lower()
    if v in ("true", "yes", "1", "on"):
        return True
    if v in ("false", "no", "0", "off"):
        return False
    raise ParameterError(f"{where}: expected a boolean, got {raw!r}")


def _to_int(raw: str, where: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ParameterError(f"{where}: expected an integer, got {raw!r}") from None


def _to_float(raw: str, where: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ParameterError(f"{where}: expected a number, got {raw!r}") from None


def parse_grid_rows(raw: str) -> list[dict]:
    rows: list[dict] = []
    for line_no, line in enumerate(raw.strip().splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        overrides: dict = {}
        for tok in line.split():
            if "=" not in tok:
                raise ParameterError(f"grid row {line_no}: expected key=value, got {tok!r}")
            key, val = tok.split("=", 1)
            if key not in _GRID_ROW_KEYS:
                raise ParameterError(f"grid row {line_no}: unknown key {key!r}")
            if key in ("p", "q", "lr_initial", "lr_final"):
                overrides[key] = _to_float(val, f"grid row {line_no}")
            else:
                overrides[key] = _to_int(val, f"grid row {line_no}")
        if overrides:
            rows.append(overrides)
    return rows


def load_config(path=None) -> RunConfig:
    """Load configuration from an INI file; no file gives pure defaults."""
    cfg = RunConfig()
    if path is None:
        return cfg
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ParameterError(f"config parse failure: {exc}") from None

    for section in parser.sections():
        if section not in _KNOWN_KEYS:
            raise ParameterError(f"unknown config section [{section}]")
        for key in parser[section]:
            if key not in _KNOWN_KEYS[section]:
                raise ParameterError(f"unknown key {key!r} in section [{section}]")

    def get(section, key, default=None):
        return parser.get(section, key, fallback=default)

    cfg.holdings_path = get("input", "holdings") or None
    cfg.holdings_format = get("input", "format", "edge-csv")
    if cfg.holdings_format not in ("edge-csv", "nport-xml-subset"):
        raise ParameterError(
            f"[input] format must be edge-csv or nport-xml-subset, got {cfg.holdings_format!r}"
        )
    cfg.benchmarks_path = get("input", "benchmarks") or None

    s = cfg.synth
    if parser.has_section("synth"):
        s.n_funds = _to_int(get("synth", "n_funds", str(s.n_funds)), "[synth] n_funds")
        s.n_assets = _to_int(get("synth", "n_assets", str(s.n_assets)), "[synth] n_assets")
        s.n_communities = _to_int(
            get("synth", "n_communities", str(s.n_communities)), "[synth] n_communities"
        )
        s.overlap = _to_float(get("synth", "overlap", str(s.overlap)), "[synth] overlap")
        hp = get("synth", "holdings_per_fund")
        s.holdings_per_fund = _to_int(hp, "[synth] holdings_per_fund") if hp else None

    cfg.coverage_threshold = _to_float(
        get("cleaning", "coverage_threshold", str(cfg.coverage_threshold)),
        "[cleaning] coverage_threshold",
    )
    cfg.validate_checksum = _to_bool(
        get("cleaning", "validate_checksum", str(cfg.validate_checksum)),
        "[cleaning] validate_checksum",
    )

    cfg.walk = WalkParams(
        r=_to_int(get("walks", "r", str(cfg.walk.r)), "[walks] r"),
        l=_to_int(get("walks", "l", str(cfg.walk.l)), "[walks] l"),
        p=_to_float(get("walks", "p", str(cfg.walk.p)), "[walks] p"),
        q=_to_float(get("walks", "q", str(cfg.walk.q)), "[walks] q"),
    )
    cfg.train = TrainParams(
        d=_to_int(get("train", "d", str(cfg.train.d)), "[train] d"),
        window=_to_int(get("train", "window", str(cfg.train.window)), "[train] window"),
        negatives=_to_int(get("train", "negatives", str(cfg.train.negatives)), "[train] negatives"),
        epochs=_to_int(get("train", "epochs", str(cfg.train.epochs)), "[train] epochs"),
        lr_initial=_to_float(
            get("train", "lr_initial", str(cfg.train.lr_initial)), "[train] lr_initial"
        ),
        lr_final=_to_float(get("train", "lr_final", str(cfg.train.lr_final)), "[train] lr_final"),
    )

    cfg.k_min = _to_int(get("evaluate", "k_min", str(cfg.k_min)), "[evaluate] k_min")
    cfg.k_max = _to_int(get("evaluate", "k_max", str(cfg.k_max)), "[evaluate] k_max")
    cfg.beta = _to_float(get("evaluate", "beta", str(cfg.beta)), "[evaluate] beta")
    if cfg.k_min < 1 or cfg.k_min > cfg.k_max:
        raise ParameterError(f"[evaluate] bad K range [{cfg.k_min}, {cfg.k_max}]")

    raw_m = get("similarity", "m_values")
    if raw_m:
        try:
            cfg.m_values = [int(tok) for tok in raw_m.replace(" ", "").split(",") if tok]
        except ValueError:
            raise ParameterError(f"[similarity] m_values: bad list {raw_m!r}") from None
        if not cfg.m_values or any(m < 1 for m in cfg.m_values):
            raise ParameterError("[similarity] m_values must be positive integers")

    raw_rows = get("grid", "rows")
    if raw_rows:
        cfg.grid_rows = parse_grid_rows(raw_rows)

    cfg.seed = _to_int(get("run", "seed", str(cfg.seed)), "[run] seed")
    if cfg.seed < 0:
        raise ParameterError("[run] seed must be non-negative")
    cfg.workers = _to_int(get("run", "workers", str(cfg.workers)), "[run] workers")
    if cfg.workers < 1:
        raise ParameterError("[run] workers must be >= 1")
    cfg.deterministic = _to_bool(
        get("run", "deterministic", str(cfg.deterministic)), "[run] deterministic"
    )
    return cfg
