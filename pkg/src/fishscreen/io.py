"""Reading and writing sessions, feature tables, manifests and models.

Session files are JSON Lines, one session per line. The IMU stream is either
inline (``"samples"``) or in a sibling CSV named by ``"file"`` relative to
the JSONL file. CSV files may start with ``#`` comment lines carrying
provenance; readers skip them. Floats are written with 17 significant
digits so a write/read cycle is exact.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .model import (IMU_CHANNELS, ImuStream, Kind, Label, Modality, ProtocolConfig,
                    Section, Session, StimulusEvent, StimulusSchedule, TrialRecord)

IMU_HEADER = ("t_s",) + IMU_CHANNELS


class SessionFormatError(ValueError):
    pass


def _comment(provenance) -> str:
    return "# " + json.dumps(provenance, sort_keys=True, separators=(",", ":")) + "\n"


def _data_lines(path) -> list:
    with open(path) as fh:
        return [ln.rstrip("\n") for ln in fh if ln.strip() and not ln.startswith("#")]


# --- IMU CSV ---------------------------------------------------------------

def write_imu_csv(imu: ImuStream, path, provenance=None) -> None:
    arr = np.column_stack([imu.t, imu.data])
    with open(path, "w") as fh:
        if provenance is not None:
            fh.write(_comment(provenance))
        fh.write(",".join(IMU_HEADER) + "\n")
        np.savetxt(fh, arr, fmt="%.17g", delimiter=",")


def read_imu_csv(path, rate_hz: int = 25) -> ImuStream:
    lines = _data_lines(path)
    if not lines or tuple(c.strip() for c in lines[0].split(",")) != IMU_HEADER:
        raise SessionFormatError(f"{path}: header must be {','.join(IMU_HEADER)}")
    if len(lines) == 1:
        return ImuStream(np.empty(0), np.empty((0, 6)), rate_hz)
    try:
        arr = np.loadtxt(lines[1:], delimiter=",", dtype=float, ndmin=2)
    except ValueError as exc:
        raise SessionFormatError(f"{path}: {exc}") from None
    if arr.shape[1] != 7:
        raise SessionFormatError(f"{path}: expected 7 columns, got {arr.shape[1]}")
    return ImuStream(arr[:, 0], arr[:, 1:], rate_hz)


# --- sessions --------------------------------------------------------------

def session_to_dict(s: Session, imu_file: str = None) -> dict:
    cfg = s.schedule.config
    d = {
        "subject_id": s.subject_id,
        "label": s.label.value if s.label else None,
        "meta": dict(s.meta),
        "protocol": {"seed": cfg.seed, "isi_ms": cfg.isi_ms,
                     "stimulus_duration_ms": cfg.stimulus_duration_ms,
                     "practice_target_count": cfg.practice_target_count,
                     "base_point": cfg.base_point},
        "events": [[e.section.value, e.part, e.index, e.modality.value, e.kind.value, e.onset_s]
                   for e in s.schedule.events],
        "trials": [[t.responded, t.rt_ms] for t in s.trials],
    }
    if imu_file is None:
        d["imu"] = {"rate_hz": s.imu.rate_hz,
                    "samples": np.column_stack([s.imu.t, s.imu.data]).tolist()}
    else:
        d["imu"] = {"rate_hz": s.imu.rate_hz, "file": imu_file}
    return d


def session_from_dict(d: dict, base_dir=None) -> Session:
    try:
        cfg = ProtocolConfig(**d["protocol"])
        events = tuple(StimulusEvent(Section(sec), int(part), int(idx), Modality(mod), Kind(kind), float(on))
                       for sec, part, idx, mod, kind, on in d["events"])
        # trials reference events positionally; a length mismatch is kept for
        # validate_session to report
        trials = tuple(TrialRecord(events[i] if i < len(events) else events[-1], bool(resp),
                                   None if rt is None else float(rt))
                       for i, (resp, rt) in enumerate(d["trials"]))
        imu_d = d["imu"]
        rate = int(imu_d.get("rate_hz", 25))
        if "file" in imu_d:
            imu = read_imu_csv(Path(base_dir or ".") / imu_d["file"], rate)
        else:
            arr = np.asarray(imu_d["samples"], dtype=float).reshape(-1, 7)
            imu = ImuStream(arr[:, 0], arr[:, 1:], rate)
        label = Label(d["label"]) if d.get("label") else None
        return Session(str(d["subject_id"]), StimulusSchedule(events, cfg), trials, imu,
                       label, dict(d.get("meta") or {}))
    except SessionFormatError:
        raise
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise SessionFormatError(f"malformed session record: {exc!r}") from None


def write_sessions(sessions, path, imu_dir: str = "imu", provenance=None) -> None:
    """Write sessions as JSONL with IMU streams in ``<imu_dir>/<subject_id>.csv``.

    Pass ``imu_dir=None`` to inline the samples instead.
    """
    path = Path(path)
    if imu_dir is not None:
        (path.parent / imu_dir).mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        for s in sessions:
            rel = None
            if imu_dir is not None:
                rel = f"{imu_dir}/{s.subject_id}.csv"
                write_imu_csv(s.imu, path.parent / rel, provenance)
            d = session_to_dict(s, rel)
            if provenance is not None:
                d["provenance"] = provenance
            fh.write(json.dumps(d, sort_keys=True) + "\n")


def read_sessions(path) -> list:
    path = Path(path)
    out = []
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                d = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SessionFormatError(f"{path}:{n}: {exc}") from None
            out.append(session_from_dict(d, path.parent))
    return out


# --- feature tables and manifests -------------------------------------------

def write_feature_csv(table, path, provenance=None) -> None:
    with open(path, "w") as fh:
        if provenance is not None:
            fh.write(_comment(provenance))
        fh.write(",".join(("subject_id", "label") + tuple(table.names)) + "\n")
        for sid, lab, row in zip(table.subject_ids, table.labels, table.X):
            label = {1: "ADHD", -1: "Control"}.get(int(lab), "")
            fh.write(",".join([sid, label] + ["%.17g" % v for v in row]) + "\n")


def read_feature_csv(path):
    from .ml.pipeline import FeatureTable

    lines = _data_lines(path)
    if not lines:
        raise SessionFormatError(f"{path}: empty feature file")
    header = lines[0].split(",")
    if header[:2] != ["subject_id", "label"]:
        raise SessionFormatError(f"{path}: first columns must be subject_id,label")
    ids, labels, rows = [], [], []
    for ln in lines[1:]:
        cells = ln.split(",")
        ids.append(cells[0])
        labels.append(Label(cells[1]).sign if cells[1] else 0)
        rows.append([float(c) for c in cells[2:]])
    return FeatureTable(tuple(ids), np.array(labels, dtype=int), tuple(header[2:]),
                        np.array(rows, dtype=float).reshape(len(ids), len(header) - 2))


def write_manifest_csv(rows, path, version: str, provenance=None) -> None:
    """``rows`` is a sequence of ``(name, group)``."""
    with open(path, "w") as fh:
        fh.write(f"# manifest_version={version}\n")
        if provenance is not None:
            fh.write(_comment(provenance))
        fh.write("index,name,group\n")
        for i, (name, group) in enumerate(rows):
            fh.write(f"{i},{name},{group}\n")


def read_manifest_csv(path) -> list:
    lines = _data_lines(path)
    return [tuple(ln.split(",")[1:3]) for ln in lines[1:]]


# --- models ----------------------------------------------------------------

def model_to_dict(model) -> dict:
    return {
        "weights": [float(v) for v in model.weights],
        "bias": float(model.bias),
        "C": float(model.C),
        "feature_names": list(model.feature_names),
        "selected_indices": [int(i) for i in model.selected_indices],
        "scaler": model.scaler.to_dict(),
        "iterations": int(model.iterations),
    }


def model_from_dict(d: dict):
    from .ml.scaling import ScalerParams
    from .ml.svm import SvmModel

    return SvmModel(np.asarray(d["weights"], dtype=float), float(d["bias"]), float(d["C"]),
                    tuple(d["selected_indices"]), ScalerParams.from_dict(d["scaler"]),
                    tuple(d["feature_names"]), int(d.get("iterations", 0)))


def dump_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_json(path):
    with open(path) as fh:
        return json.load(fh)
