"""Trajectory, certificate, and report files.

Floats serialize via Python's shortest round-trip repr, so every file
reloads bit-exactly and repeated runs with equal inputs produce byte-equal
outputs (no timestamps anywhere). JSON objects are written with sorted
keys for the same reason.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from .errors import UsageError
from .systems import TailDominance, TailInfo, Trajectory


def write_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n",
                          encoding="utf-8")


def read_json(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def file_sha256(path) -> str:
    h = hashlib.sha256()
    h.update(Path(path).read_bytes())
    return h.hexdigest()


# --------------------------------------------------------------------------
# trajectories
# --------------------------------------------------------------------------

def trajectory_payload(traj: Trajectory) -> dict:
    tail = None
    if traj.tail is not None:
        tail = {"epsilon": traj.tail.epsilon, "dominating": traj.tail.dominance.value}
    return {
        "dim": traj.dim,
        "horizon": traj.horizon,
        "states": [[float(v) for v in row] for row in traj.states],
        "inputs": None if traj.inputs is None
        else [[float(v) for v in row] for row in traj.inputs],
        "policy_id": traj.policy_id,
        "tail": tail,
    }


def save_trajectory_json(traj: Trajectory, path) -> None:
    write_json(path, trajectory_payload(traj))


def load_trajectory_json(path) -> Trajectory:
    data = read_json(path)
    tail = None
    if data.get("tail") is not None:
        tail = TailInfo(epsilon=data["tail"]["epsilon"],
                        dominance=TailDominance(data["tail"]["dominating"]))
    traj = Trajectory(states=np.array(data["states"], dtype=np.float64),
                      inputs=None if data.get("inputs") is None
                      else np.array(data["inputs"], dtype=np.float64),
                      policy_id=data.get("policy_id"),
                      tail=tail,
                      name=Path(path).stem)
    if traj.dim != data["dim"] or traj.horizon != data["horizon"]:
        raise UsageError(f"{path}: dim/horizon fields disagree with the state array")
    return traj


def save_trajectory_csv(traj: Trajectory, path) -> None:
    """Flat variant: one row per time step, x-columns then u-columns.

    The final row has empty input cells (inputs stop one step earlier).
    """
    n = traj.dim
    v = 0 if traj.inputs is None else traj.inputs.shape[1]
    header = [f"x{j + 1}" for j in range(n)] + [f"u{j + 1}" for j in range(v)]
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(header)
        for t in range(traj.horizon + 1):
            row = [repr(float(x)) for x in traj.states[t]]
            if v:
                row += [repr(float(u)) for u in traj.inputs[t]] if t < traj.horizon \
                    else [""] * v
            w.writerow(row)


def load_trajectory_csv(path) -> Trajectory:
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    if not rows:
        raise UsageError(f"{path}: empty trajectory file")
    header = rows[0]
    n = sum(1 for h in header if h.startswith("x"))
    v = sum(1 for h in header if h.startswith("u"))
    states = np.array([[float(c) for c in row[:n]] for row in rows[1:]])
    inputs = None
    if v:
        inputs = np.array([[float(c) for c in row[n:n + v]]
                           for row in rows[1:-1]]) if len(rows) > 2 else np.empty((0, v))
    return Trajectory(states=states, inputs=inputs, name=Path(path).stem)


# --------------------------------------------------------------------------
# certificates
# --------------------------------------------------------------------------

def certificate_payload(*, mode: str, alpha: float, delta_u: float, p: np.ndarray,
                        n_traj: int, traj_paths: list[str], traj_hashes: list[str],
                        partition: dict, lipschitz: dict | None = None,
                        epsilons: list[float] | None = None,
                        pattern: dict | None = None, gamma: float | None = None,
                        controller_boxes: dict | None = None,
                        policies: list[dict] | None = None,
                        cap_active: bool = False) -> dict:
    p = np.asarray(p, dtype=np.float64)
    return {
        "format": "monocert-certificate-v1",
        "mode": mode,
        "alpha": alpha,
        "delta_u": delta_u,
        "coefficients": {
            "a": float(p[0]),
            "b": [float(v) for v in p[1:1 + n_traj]],
            "c": [float(v) for v in p[1 + n_traj:]],
        },
        "trajectories": [{"path": str(pth), "sha256": hsh}
                         for pth, hsh in zip(traj_paths, traj_hashes)],
        "partition": partition,
        "lipschitz": lipschitz,
        "epsilons": epsilons,
        "pattern": pattern,
        "gamma": gamma,
        "controller_boxes": controller_boxes,
        "policies": policies,
        "cap_active": cap_active,
    }


def save_certificate(path, payload: dict) -> None:
    write_json(path, payload)


def load_certificate(path) -> dict:
    data = read_json(path)
    if data.get("format") != "monocert-certificate-v1":
        raise UsageError(f"{path}: not a certificate file")
    return data


def verify_trajectory_hashes(cert: dict, base_dir) -> list[str]:
    """Resolve the certificate's trajectory references and check content hashes."""
    base = Path(base_dir)
    paths = []
    for ref in cert["trajectories"]:
        p = Path(ref["path"])
        if not p.is_absolute():
            p = base / p
        if not p.exists():
            raise UsageError(f"referenced trajectory missing: {p}")
        actual = file_sha256(p)
        if actual != ref["sha256"]:
            raise UsageError(f"trajectory {p} content hash mismatch "
                             f"(expected {ref['sha256'][:12]}..., got {actual[:12]}...)")
        paths.append(str(p))
    return paths
