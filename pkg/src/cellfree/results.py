"""CSV/JSON emission. Every file is written to a temp name and renamed into place."""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

from .evaluation import empirical_cdf
from .harness import ExperimentResult

SAMPLES_HEADER = "variant,snapshot,ue,sinr,se"
CDF_HEADER = "variant,metric,value,cdf"
SWEEP_HEADER = "alpha,se_95_likely,median_se"


def atomic_write_text(path: str | Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _num(x) -> str:
    return repr(float(x))


def samples_csv(result: ExperimentResult) -> str:
    lines = [SAMPLES_HEADER]
    for v in result.variants:
        s = result[v.name]
        for snap, ue, sinr, se in zip(s.snapshot, s.ue, s.sinr, s.se):
            lines.append(f"{v.name},{int(snap)},{int(ue)},{_num(sinr)},{_num(se)}")
    return "\n".join(lines) + "\n"


def cdf_csv(result: ExperimentResult) -> str:
    lines = [CDF_HEADER]
    for v in result.variants:
        s = result[v.name]
        for metric, values in (("per_user_se", s.se), ("min_se", s.min_se)):
            if len(values) == 0:
                raise ValueError(f"variant {v.name} has no {metric} samples")
            xs, fs = empirical_cdf(values)
            lines.extend(f"{v.name},{metric},{_num(x)},{_num(f)}" for x, f in zip(xs, fs))
    return "\n".join(lines) + "\n"


def summary_json(result: ExperimentResult, extra: dict | None = None) -> str:
    data = result.summary()
    if extra:
        data.update(extra)
    return json.dumps(data, indent=2) + "\n"


def emit_cdf_csv(result: ExperimentResult, path: str | Path) -> Path:
    return atomic_write_text(path, cdf_csv(result))


def write_samples_csv(result: ExperimentResult, path: str | Path) -> Path:
    return atomic_write_text(path, samples_csv(result))


def write_summary_json(result: ExperimentResult, path: str | Path, extra: dict | None = None) -> Path:
    return atomic_write_text(path, summary_json(result, extra))


def write_sweep_csv(rows, path: str | Path) -> Path:
    lines = [SWEEP_HEADER]
    lines.extend(f"{_num(r.alpha)},{_num(r.se_95_likely)},{_num(r.median_se)}" for r in rows)
    return atomic_write_text(path, "\n".join(lines) + "\n")


def write_experiment(result: ExperimentResult, out_dir: str | Path, stem: str,
                     extra: dict | None = None) -> list[Path]:
    # build all text first so a failure leaves no partial output behind
    texts = {
        f"{stem}_samples.csv": samples_csv(result),
        f"{stem}_cdf.csv": cdf_csv(result),
        f"{stem}_summary.json": summary_json(result, extra),
    }
    return [atomic_write_text(Path(out_dir) / name, text) for name, text in texts.items()]
