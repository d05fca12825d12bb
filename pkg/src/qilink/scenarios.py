"""Named experiment scenarios, generic sweeps, and CSV/JSON emission."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable

from . import __version__
from .chain import (
    alice_returned_state_is_classical,
    classicality_margin_db,
    classicality_threshold,
)
from .config import (
    SECURE_POINT_G_A_EXCESS,
    SECURE_POINT_N_S,
    ScenarioConfig,
    with_defaults,
)
from .detection import (
    ReceiverNoiseParams,
    alice_classical_decision_stats,
    alice_decision_stats,
    ase_variance_fraction,
    ber_alice_classical,
    ber_eve,
    ber_from_stats,
    eve_decision_stats,
    q_argument,
)
from .errors import ConfigError, OutputError, QilinkError
from .info import info_advantage, shannon_info_bsc
from .montecarlo import SimConfig, analytic_ber, binomial_sigma, empirical_ber, n_s_for_target_ber

SCHEMA_VERSION = 1


@dataclass
class ResultTable:
    scenario: str
    columns: list[str]
    rows: list[dict[str, Any]]
    config: ScenarioConfig
    notes: dict[str, Any] = field(default_factory=dict)

    def column(self, name: str, **where) -> list:
        return [
            r[name] for r in self.rows if all(r.get(k) == v for k, v in where.items())
        ]

    def metadata(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "scenario": self.scenario,
            "artifact": "qilink",
            "artifact_version": __version__,
            "seed": self.config.montecarlo.seed,
            "columns": self.columns,
            "notes": self.notes,
            "config": self.config.to_dict(),
            "generated_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        }


def _at_point(coord: str, value: float, fn: Callable[[], dict]) -> dict:
    """Evaluate one sweep point, tagging any failure with its coordinate."""
    try:
        return fn()
    except QilinkError as exc:
        raise type(exc)(f"at {coord}={value:.6g}: {exc}") from exc


def _fig2(cfg: ScenarioConfig) -> ResultTable:
    link, noise_a, noise_e = cfg.receivers()
    ideal_link = cfg.link.ideal_receiver()
    ideal = ReceiverNoiseParams.ideal()
    curves = {
        "alice_ideal": lambda x: alice_decision_stats(ideal_link, ideal, x),
        "alice": lambda x: alice_decision_stats(link, noise_a, x),
        "alice_classical_ideal": lambda x: alice_classical_decision_stats(
            ideal_link, ideal, x, classical_variances=cfg.classical_variances
        ),
        "eve_ideal": lambda x: eve_decision_stats(
            ideal_link, ideal, x, literal_variance=cfg.eve_literal_variance
        ),
        "eve": lambda x: eve_decision_stats(
            link, noise_e, x, literal_variance=cfg.eve_literal_variance
        ),
    }
    rows = []
    for n_s in _n_s_grid(cfg):
        for name, stats_fn in curves.items():
            def point(name=name, stats_fn=stats_fn, n_s=n_s):
                stats = stats_fn(n_s)
                return {
                    "n_s": n_s,
                    "curve": name,
                    "ber": ber_from_stats(stats),
                    "q_argument": q_argument(stats),
                }
            rows.append(_at_point("n_s", n_s, point))
    return ResultTable(cfg.scenario, ["n_s", "curve", "ber", "q_argument"], rows, cfg,
                       notes={"grid": _grid_note(cfg)})


def _fig3(cfg: ScenarioConfig) -> ResultTable:
    link, noise_a, _ = cfg.receivers()
    rows = []
    for n_s in _n_s_grid(cfg):
        def point(n_s=n_s):
            res = info_advantage(link, noise_a, n_s)
            return {"n_s": n_s, "ber_a": res.ber_a, "i_ab": res.i_ab,
                    "chi_ub": res.chi_ub, "delta_lb": res.delta_lb}
        rows.append(_at_point("n_s", n_s, point))
    best = max(rows, key=lambda r: r["delta_lb"])
    return ResultTable(
        cfg.scenario, ["n_s", "ber_a", "i_ab", "chi_ub", "delta_lb"], rows, cfg,
        notes={"grid": _grid_note(cfg), "kappa_2": cfg.link.kappa_2,
               "peak_delta_lb": best["delta_lb"], "peak_n_s": best["n_s"]},
    )


def _threshold(cfg: ScenarioConfig) -> ResultTable:
    link = cfg.link
    row = {
        "N_B": link.N_B,
        "N_B_thresh": classicality_threshold(link),
        "margin_db": classicality_margin_db(link),
        "alice_state_classical": alice_returned_state_is_classical(link),
    }
    return ResultTable(cfg.scenario, list(row), [row], cfg)


def _operating_point(cfg: ScenarioConfig, link, noise_a, noise_e, n_s: float) -> dict:
    info = info_advantage(link, noise_a, n_s)
    frac_plus, frac_minus = ase_variance_fraction(link, noise_a, n_s)
    return {
        "n_s": n_s,
        "G_A_minus_1": link.g_a_excess,
        "ber_a": info.ber_a,
        "ber_a_classical": ber_alice_classical(
            link, noise_a, n_s, classical_variances=cfg.classical_variances
        ),
        "ber_e": ber_eve(link, noise_e, n_s, literal_variance=cfg.eve_literal_variance),
        "i_ab": info.i_ab,
        "chi_ub": info.chi_ub,
        "delta_lb": info.delta_lb,
        "ase_fraction_plus": frac_plus,
        "ase_fraction_minus": frac_minus,
        "N_B_thresh": classicality_threshold(link),
        "margin_db": classicality_margin_db(link),
    }


def _secure_point(cfg: ScenarioConfig) -> ResultTable:
    link, noise_a, noise_e = cfg.receivers()
    row = _at_point("n_s", cfg.n_s, lambda: _operating_point(cfg, link, noise_a, noise_e, cfg.n_s))
    return ResultTable(cfg.scenario, list(row), [row], cfg)


def _montecarlo(cfg: ScenarioConfig) -> ResultTable:
    link, noise_a, _ = cfg.receivers()
    mc = cfg.montecarlo
    rows = []
    for target in mc.targets:
        n_s = n_s_for_target_ber(link, noise_a, target, mc.m_modes)
        exact = analytic_ber(link, noise_a, n_s, mc.m_modes)
        for mode in mc.sampling_modes:
            sim = SimConfig(m_modes=mc.m_modes, n_bits=mc.n_bits, seed=mc.seed, sampling_mode=mode)
            est = empirical_ber(link, noise_a, n_s, sim)
            rows.append({
                "target_ber": target,
                "n_s": n_s,
                "sampling_mode": mode,
                "m_modes": mc.m_modes,
                "n_bits": mc.n_bits,
                "analytic_ber": exact,
                "ber_hat": est.ber_hat,
                "ci_low": est.ci_low,
                "ci_high": est.ci_high,
                "n_errors": est.n_errors,
                "within_3sigma": abs(est.ber_hat - exact) <= 3 * binomial_sigma(exact, mc.n_bits),
                "i_ab_empirical": shannon_info_bsc(min(est.ber_hat, 0.5)),
            })
    return ResultTable(cfg.scenario, list(rows[0]), rows, cfg)


def _n_s_grid(cfg: ScenarioConfig):
    if cfg.sweep.variable != "n_s":
        raise ConfigError(f"scenario {cfg.scenario} sweeps n_s, not {cfg.sweep.variable}")
    return [float(x) for x in cfg.sweep.grid()]


def _grid_note(cfg: ScenarioConfig) -> str:
    s = cfg.sweep
    return f"{s.points} {s.spacing}-spaced points of {s.variable} over [{s.lo:g}, {s.hi:g}]"


_PRESET_DEFAULTS: dict[str, dict[str, Any]] = {
    "fig2-ber-curves": {},
    "fig3-info-top": {"link.kappa_2": 0.90},
    "fig3-info-bottom": {"link.kappa_2": 0.10},
    "threshold-report": {},
    "secure-point": {"link.G_A_minus_1": SECURE_POINT_G_A_EXCESS, "n_s": SECURE_POINT_N_S},
    "montecarlo-check": {},
}

_RUNNERS = {
    "fig2-ber-curves": _fig2,
    "fig3-info-top": _fig3,
    "fig3-info-bottom": _fig3,
    "threshold-report": _threshold,
    "secure-point": _secure_point,
    "montecarlo-check": _montecarlo,
}


def preset_config(cfg: ScenarioConfig, name: str) -> ScenarioConfig:
    """Apply a preset's parameter defaults beneath the user's explicit settings."""
    if name not in _RUNNERS:
        raise ConfigError(f"unknown scenario {name!r}; choose from {', '.join(_RUNNERS)}")
    return replace(with_defaults(cfg, _PRESET_DEFAULTS[name]), scenario=name)


def run_scenario(cfg: ScenarioConfig, name: str | None = None) -> ResultTable:
    """Run a named preset and return its table (after invariant checks)."""
    name = name or cfg.scenario
    if name is None:
        raise ConfigError("no scenario given")
    cfg = preset_config(cfg, name)
    table = _RUNNERS[name](cfg)
    check_rows(table)
    return table


def run_sweep(cfg: ScenarioConfig) -> ResultTable:
    """Evaluate the operating-point metrics across ``cfg.sweep``."""
    var = cfg.sweep.variable
    base_link, noise_a, noise_e = cfg.receivers()
    rows = []
    for value in cfg.sweep.grid():
        value = float(value)

        def point(value=value):
            if var == "n_s":
                link, n_s = base_link, value
            else:
                cast = int(round(value)) if var == "M" else value
                changes = {var: cast}
                if var == "M":
                    changes.update(W=None, T=None)
                link, n_s = replace(base_link, **changes), cfg.n_s
            row = {"sweep_variable": var, "sweep_value": value}
            row.update(_operating_point(cfg, link, noise_a, noise_e, n_s))
            row["alice_state_classical"] = alice_returned_state_is_classical(link)
            return row
        rows.append(_at_point(var, value, point))
    table = ResultTable("sweep", list(rows[0]), rows, cfg, notes={"grid": _grid_note(cfg)})
    check_rows(table)
    return table


def check_rows(table: ResultTable) -> None:
    """Re-assert value-level invariants on every row before it is written."""
    for i, row in enumerate(table.rows):
        for key, value in row.items():
            if isinstance(value, float) and math.isnan(value):
                raise QilinkError(f"row {i}: {key} is NaN")
            if key in ("ber", "ber_a", "ber_e", "ber_a_classical", "analytic_ber"):
                # Exactly zero only when Q underflows double precision.
                if not 0.0 <= value <= 0.5:
                    raise QilinkError(f"row {i}: {key}={value} outside [0, 0.5]")
            if key in ("i_ab",) and not 0.0 <= value <= 1.0:
                raise QilinkError(f"row {i}: i_ab={value} outside [0, 1]")
            if key == "chi_ub" and value < 0.0:
                raise QilinkError(f"row {i}: chi_ub={value} is negative")
        if {"i_ab", "chi_ub", "delta_lb"} <= row.keys():
            if row["delta_lb"] != row["i_ab"] - row["chi_ub"]:
                raise QilinkError(f"row {i}: delta_lb != i_ab - chi_ub")


def _csv_cell(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.16e}"
    return str(value)


def to_csv(table: ResultTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_csv_cell(row[c]) for c in table.columns])
    return buf.getvalue()


def to_json(table: ResultTable) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "metadata": table.metadata(),
        "columns": table.columns,
        "rows": table.rows,
    }
    return json.dumps(doc, indent=2, allow_nan=False)


def emit(table: ResultTable, path: str | Path | None, fmt: str = "csv") -> list[Path]:
    """Write ``table`` to ``path`` plus a ``.meta.json`` sidecar; stdout if ``path`` is None.

    Returns the paths written.
    """
    if not table.rows:
        raise QilinkError("refusing to emit an empty result table")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"unknown output format {fmt!r}")
    body = to_csv(table) if fmt == "csv" else to_json(table)
    if path is None:
        print(body, end="" if body.endswith("\n") else "\n")
        return []
    out = Path(path)
    meta = out.with_name(out.name + ".meta.json")
    try:
        out.write_text(body, newline="")
        meta.write_text(json.dumps(table.metadata(), indent=2) + "\n")
    except OSError as exc:
        raise OutputError(f"cannot write output {out}: {exc}") from exc
    return [out, meta]


def write_waveform(records, path: str | Path) -> Path:
    """Write per-bit records {index, sign, statistic, decoded} as CSV."""
    out = Path(path)
    try:
        with out.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\r\n")
            writer.writerow(["index", "sign", "statistic", "decoded"])
            for r in records:
                writer.writerow([r["index"], r["sign"], _csv_cell(r["statistic"]), r["decoded"]])
    except OSError as exc:
        raise OutputError(f"cannot write waveform {out}: {exc}") from exc
    return out


__all__ = [
    "ResultTable",
    "check_rows",
    "emit",
    "preset_config",
    "run_scenario",
    "run_sweep",
    "to_csv",
    "to_json",
    "write_waveform",
]
