"""
Experiment configuration, presets and CSV output.

Configuration files are flat `key = value` text with `#` comments. Values
are typed by the keys' declared JSON types in ncf/schemas/sweep-config.json,
the merged document (file, then flags) is validated against that schema and
the result is resolved into a SweepSpec.
"""
import logging
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

import pandas as pd
from pydantic import ValidationError

from ncf.config import settings
from ncf.errors import ConflictError, ParseError, UnknownPreset
from ncf.models.scenario_config import Mode
from ncf.models.sweep_spec import SweepPoint, SweepSpec
from ncf.sim import run_experiment
from ncf.utils.schema import schema_type_of, schema_violations

SCENARIO_KEYS = ("n", "m", "gateways_ratio", "pt", "mode", "w", "L", "gf_exp")

CSV_COLUMNS = [
    "sweep_var", "sweep_value", "scheme", "n", "m", "pt", "mode", "w", "trials", "seed",
    "mean_packets", "ci95_halfwidth", "savings", "decode_success_rate",
]

PRESETS: Dict[str, Dict[str, Any]] = {
    "network-size": {
        "scenario": {"pt": 0.5, "mode": "rand"},
        "variable": "n",
        "values": list(range(100, 1001, 100)),
    },
    "low-traffic": {
        "scenario": {"pt": 0.01, "mode": "rand"},
        "variable": "n",
        "values": list(range(100, 1001, 100)),
    },
    "traffic-load": {
        "scenario": {"n": 100, "m": 5, "mode": "rand"},
        "variable": "pt",
        "values": [i / 10 for i in range(1, 11)],
    },
    "connectivity": {
        "scenario": {"n": 1000, "pt": 0.5, "mode": "equal"},
        "variable": "w",
        "values": [1, 2, 3, 4, 5],
    },
}

# Short names accepted on the command line.
PRESET_ALIASES = {
    "fig3": "network-size",
    "fig4": "low-traffic",
    "fig5": "traffic-load",
    "fig6": "connectivity",
}


def _coerce(key: str, value: Any, line: Optional[int] = None) -> Any:
    """Type a raw value by the JSON type the schema declares for `key`."""
    if not isinstance(value, str):
        return value
    text = value.strip()
    kind = schema_type_of(key)
    try:
        if kind == "integer":
            return int(text)
        if kind == "number":
            return float(text)
        if kind == "array":
            return [_number(item) for item in text.replace(";", ",").split(",") if item.strip()]
    except ValueError:
        raise ParseError(f"{key}: cannot read {text!r} as {kind}", line)
    if key in ("mode", "sweep"):
        text = text.lower()
        if key == "sweep" and text == "p_t":
            return "pt"
    return text


def _number(text: str) -> Union[int, float]:
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        return float(text)


def read_config_file(path: Union[str, Path]) -> Tuple[Dict[str, Any], Dict[str, int]]:
    """
    Read a flat `key = value` configuration file.

    Returns:
        The typed values and the line each key was read from

    Raises:
        ParseError: a line is not `key = value`, names an unknown key or repeats a key
    """
    values: Dict[str, Any] = {}
    lines: Dict[str, int] = {}
    with open(path, "r") as f:
        for number, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParseError(f"expected 'key = value', got {raw.strip()!r}", number)
            key, value = (part.strip() for part in line.split("=", 1))
            if not schema_type_of(key):
                raise ParseError(f"unknown key {key!r}", number)
            if key in values:
                raise ParseError(f"duplicate key {key!r}", number)
            if not value:
                raise ParseError(f"key {key!r} has no value", number)
            values[key] = _coerce(key, value, number)
            lines[key] = number
    return values, lines


def _first_error(error: ValidationError) -> str:
    first = error.errors()[0]
    location = ".".join(str(p) for p in first.get("loc", ()))
    message = first.get("msg", str(error))
    return f"{location}: {message}" if location else message


def parse_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> SweepSpec:
    """
    Resolve a configuration file plus flag overrides into a SweepSpec.

    Flags win over the file; either alone is enough. m is derived from
    gateways_ratio (default 5% of n) when absent.

    Raises:
        ParseError: malformed text, unknown or missing keys, out-of-range values
        ConflictError: both m and gateways_ratio are given
    """
    values, lines = read_config_file(path) if path else ({}, {})
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if not schema_type_of(key):
            raise ParseError(f"unknown key {key!r}")
        values[key] = _coerce(key, value)
        lines.pop(key, None)

    if "m" in values and "gateways_ratio" in values:
        raise ConflictError("m and gateways_ratio exclude each other; give one of them")

    violations = schema_violations(values)
    if violations:
        key, message = violations[0]
        raise ParseError(message, lines.get(key))

    sweep = values.get("sweep")
    for key in ("n", "pt"):
        if key not in values and sweep != key:
            raise ParseError(f"missing required key {key!r}")
    if values.get("mode") == Mode.EQUAL.value and "w" not in values and sweep != "w":
        raise ParseError("missing key 'w', required when mode = equal")
    if sweep and "sweep_values" not in values:
        raise ParseError(f"missing key 'sweep_values' for sweep over {sweep!r}")

    try:
        return SweepSpec(
            variable=sweep,
            values=values.get("sweep_values", []),
            scenario={key: values[key] for key in SCENARIO_KEYS if key in values},
            trials=values.get("trials", settings.TRIALS),
            seed=values.get("seed", settings.SEED),
            output=values.get("output"),
        )
    except ValidationError as e:
        raise ParseError(_first_error(e)) from e


def emit_csv(points: List[SweepPoint], path: Union[str, Path]) -> Path:
    """
    Write one row per (swept value, scheme): values ascending, lorawan before ncf.

    The baseline rows carry savings 0 and decode_success_rate 1.
    """
    records = []
    for point in sorted(points, key=lambda p: p.value):
        config, stats = point.config, point.stats
        common = {
            "sweep_var": point.variable,
            "sweep_value": point.value,
            "n": config.n,
            "m": config.m,
            "pt": config.pt,
            "mode": config.mode.value,
            "w": config.w if config.mode is Mode.EQUAL else None,
            "trials": stats.trials,
            "seed": config.seed,
        }
        records.append({
            **common,
            "scheme": "lorawan",
            "mean_packets": stats.mean_lorawan,
            "ci95_halfwidth": stats.ci95_lorawan,
            "savings": 0.0,
            "decode_success_rate": 1.0,
        })
        records.append({
            **common,
            "scheme": "ncf",
            "mean_packets": stats.mean_ncf,
            "ci95_halfwidth": stats.ci95_ncf,
            "savings": stats.savings,
            "decode_success_rate": stats.decode_success_rate,
        })

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame.from_records(records, columns=CSV_COLUMNS)
    frame.to_csv(path, index=False, float_format="%.6g", lineterminator="\n")
    logging.info(f"Wrote {len(records)} rows to {path}")
    return path


def write_gnuplot_script(csv_path: Union[str, Path], xlabel: Optional[str] = None) -> Path:
    """Write a gnuplot script that plots both schemes' means with 95% error bars from the CSV."""
    csv_path = Path(csv_path)
    script_path = csv_path.with_suffix(".gp")
    image = csv_path.with_suffix(".png").name
    data = csv_path.name
    series = []
    for scheme, title in (("lorawan", "LoRaWAN"), ("ncf", "NCF")):
        series.append(
            f"'{data}' every ::1 using 2:(strcol(3) eq \"{scheme}\" ? $11 : NaN):12 "
            f"with yerrorlines title \"{title}\""
        )
    lines = [
        "set datafile separator ','",
        "set terminal pngcairo size 800,600",
        f"set output '{image}'",
        f"set xlabel '{xlabel or 'swept value'}'",
        "set ylabel 'packets forwarded per generation'",
        "set key left top",
        "set grid",
        "plot " + ", \\\n     ".join(series),
    ]
    script_path.write_text("\n".join(lines) + "\n")
    logging.info(f"Wrote gnuplot script {script_path}")
    return script_path


def run_sweep(spec: SweepSpec, default_name: str = "sweep") -> Path:
    """Run every swept value of `spec` and write the CSV (plus the gnuplot script when asked)."""
    if spec.variable is None:
        raise ParseError("no sweep variable; use the simulate command for a single scenario")
    output = spec.output or str(Path(settings.OUTPUT_DIR) / f"{default_name}.csv")

    points = []
    for value, config in spec.points():
        logging.info(f"Sweep {spec.variable.value} = {value:g}: {spec.trials} trials")
        stats = run_experiment(config, spec.trials, spec.workers)
        points.append(SweepPoint(variable=spec.variable.value, value=value, config=config, stats=stats))

    path = emit_csv(points, output)
    if spec.gnuplot:
        write_gnuplot_script(path, xlabel=spec.variable.value)
    return path


def preset_spec(
    name: str,
    trials: Optional[int] = None,
    seed: Optional[int] = None,
    output: Optional[str] = None,
    workers: Optional[int] = None,
    gnuplot: bool = False,
) -> SweepSpec:
    key = PRESET_ALIASES.get(name, name)
    if key not in PRESETS:
        known = ", ".join(sorted(PRESETS) + sorted(PRESET_ALIASES))
        raise UnknownPreset(f"Unknown preset {name!r}; choose one of {known}")
    preset = PRESETS[key]
    return SweepSpec(
        variable=preset["variable"],
        values=preset["values"],
        scenario=preset["scenario"],
        trials=trials or settings.TRIALS,
        seed=settings.SEED if seed is None else seed,
        output=output or str(Path(settings.OUTPUT_DIR) / f"{key}.csv"),
        gnuplot=gnuplot,
        workers=workers or settings.WORKERS,
    )


def run_preset(
    name: str,
    trials: Optional[int] = None,
    seed: Optional[int] = None,
    output: Optional[str] = None,
    workers: Optional[int] = None,
    gnuplot: bool = False,
) -> Path:
    """Run one of the bundled experiments and write its CSV."""
    spec = preset_spec(name, trials, seed, output, workers, gnuplot)
    logging.info(f"Running preset {name} over {spec.variable.value} = {spec.values}")
    return run_sweep(spec)
