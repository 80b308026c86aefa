"""Command-line pipeline: simulate, verify, synthesize, validate, eval-grid, info.

Exit codes
----------
0   success (certificate found and Monte-Carlo validation clean)
1   internal inconsistency (an Optimal certificate failed validation --
    that is a bug, not an inconclusive answer)
2   inconclusive (program infeasible / tail refusals / certificate rejected);
    the method is one-sided, so infeasibility never means "unsafe"
64  usage or configuration error

All outputs are deterministic for a fixed config and seed: no timestamps,
sorted JSON keys, shortest round-trip float formatting. Timings go to
stderr only.
"""

from __future__ import annotations

import argparse
import importlib
import sys
import time
from pathlib import Path

import numpy as np

from . import _kernels
from .certify import (
    Mode,
    SupportPattern,
    assemble_controlled_program,
    assemble_robust_program,
    controller_set,
    make_controlled_bases,
    make_robust_bases,
    policy_compat_table,
)
from .errors import ConfigError, TailAssumptionError, UsageError
from .fileio import (
    certificate_payload,
    file_sha256,
    load_certificate,
    load_trajectory_json,
    read_json,
    save_certificate,
    save_trajectory_csv,
    save_trajectory_json,
    verify_trajectory_hashes,
    write_json,
)
from .order import Box
from .partition import GridPartition, build_partition, cover_sets
from .solver import (
    DEFAULT_COEFF_CAP,
    Loss,
    Status,
    solve_controlled_program,
    solve_controlled_program_milp,
    solve_robust_program,
    template_from_p,
    write_lp_text,
    _build_program_lp,
)
from .systems import (
    BUILTIN_SYSTEMS,
    ConstantInput,
    FeedbackPolicy,
    InputRole,
    PolicyInput,
    SampledDisturbance,
    LipschitzBounds,
    SystemModel,
    TailDominance,
    TailInfo,
    estimate_compact_tail,
    simulate,
)
from .validate import monte_carlo_safety

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 64

DEFAULTS = {
    "alpha": 2.0,
    "delta_u": 1e-6,
    "gamma": 1e-6,
    "tail_window": 50,
    "coeff_cap": DEFAULT_COEFF_CAP,
    "loss": "l1",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # keep exit code 2 reserved for "inconclusive"
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _cfg_get(cfg: dict, path: str, default=None, required: bool = False):
    node = cfg
    for part in path.split("."):
        if not isinstance(node, dict) or part not in node:
            if required:
                raise ConfigError(path, "missing required field")
            return default
        node = node[part]
    return node


def _load_config(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigError(str(path), "config file not found")
    try:
        return read_json(p)
    except Exception as e:  # malformed JSON
        raise ConfigError(str(path), f"cannot parse: {e}")


def build_system(cfg: dict) -> SystemModel:
    name = _cfg_get(cfg, "system.name", required=True)
    params = _cfg_get(cfg, "system.params", default={})
    if name in BUILTIN_SYSTEMS:
        try:
            return BUILTIN_SYSTEMS[name](**params)
        except TypeError as e:
            raise ConfigError("system.params", str(e))
        except UsageError as e:
            raise ConfigError("system.params", str(e))
    if ":" in name:  # user-plugged "module:function"
        mod_name, fn_name = name.split(":", 1)
        try:
            fn = getattr(importlib.import_module(mod_name), fn_name)
        except (ImportError, AttributeError) as e:
            raise ConfigError("system.name", f"cannot import {name}: {e}")
        return fn(**params)
    raise ConfigError("system.name",
                      f"unknown system {name!r}; built-ins: {sorted(BUILTIN_SYSTEMS)}")


def build_policy(spec: dict, field: str) -> FeedbackPolicy:
    kind = spec.get("kind")
    if kind == "constant":
        if "u" not in spec:
            raise ConfigError(f"{field}.u", "constant policy needs a value")
        return FeedbackPolicy.constant(spec["u"], name=spec.get("name", "const"))
    if kind == "external":
        ref = spec.get("ref", "")
        if ":" not in ref:
            raise ConfigError(f"{field}.ref", "external policy needs module:function")
        mod_name, fn_name = ref.split(":", 1)
        fn = getattr(importlib.import_module(mod_name), fn_name)
        return FeedbackPolicy(fn, monotone=bool(spec.get("monotone", False)),
                              name=spec.get("name", fn_name))
    raise ConfigError(f"{field}.kind", f"unknown policy kind {kind!r}")


def _build_source(spec: dict | None, sys_model: SystemModel, field: str):
    kind = (spec or {}).get("kind", "none")
    if kind == "none":
        if sys_model.input_role is not InputRole.NONE:
            raise ConfigError(field, "system takes inputs; pick a source kind")
        return None
    if kind == "disturbance":
        return SampledDisturbance()
    if kind == "constant":
        return ConstantInput(spec["u"])
    if kind == "policy":
        return PolicyInput(build_policy(spec.get("policy", {}), f"{field}.policy"))
    raise ConfigError(f"{field}.kind", f"unknown input source {kind!r}")


def _lipschitz(cfg: dict) -> LipschitzBounds:
    node = _cfg_get(cfg, "lipschitz", required=True)
    try:
        return LipschitzBounds(L_x=float(node["L_x"]), L_w=float(node["L_w"]),
                               D_w=float(node["D_w"]))
    except (KeyError, TypeError) as e:
        raise ConfigError("lipschitz", f"need numeric L_x, L_w, D_w ({e})")


def _partition_payload(part: GridPartition) -> dict:
    return {"domain": {"lower": [float(v) for v in part.domain.lower],
                       "upper": [float(v) for v in part.domain.upper]},
            "counts": [int(c) for c in part.counts]}


def _partition_from_payload(node: dict) -> GridPartition:
    dom = Box(np.array(node["domain"]["lower"]), np.array(node["domain"]["upper"]))
    counts = np.array(node["counts"], dtype=np.int64)
    widths = np.where(dom.extent > 0, dom.extent / counts, 1.0)
    return GridPartition(domain=dom, counts=counts, widths=widths)


def _echo(msg: str) -> None:
    print(msg)


def _timing(msg: str) -> None:
    print(msg, file=sys.stderr)


# --------------------------------------------------------------------------
# simulate
# --------------------------------------------------------------------------

def cmd_simulate(cfg: dict, base: Path, seed_override: int | None = None) -> int:
    sys_model = build_system(cfg)
    window = int(_cfg_get(cfg, "tail_window", DEFAULTS["tail_window"]))
    runs = _cfg_get(cfg, "runs", required=True)
    if not isinstance(runs, list) or not runs:
        raise ConfigError("runs", "need a nonempty list of runs")
    for i, run in enumerate(runs):
        field = f"runs[{i}]"
        start = run.get("start")
        if start is None:
            raise ConfigError(f"{field}.start", "missing start state")
        T = int(run.get("horizon", 0))
        # an override rebases the seeds so distinct runs stay distinct
        seed = seed_override + i if seed_override is not None else run.get("seed")
        source = _build_source(run.get("source"), sys_model, f"{field}.source")
        traj = simulate(sys_model, start, source, T, seed=seed,
                        name=Path(run.get("output", f"run{i}")).stem)
        w = min(window, T)
        traj.tail = estimate_compact_tail(traj, w)
        if run.get("epsilon_override") is not None:
            traj.tail = TailInfo(epsilon=float(run["epsilon_override"]),
                                 dominance=traj.tail.dominance)
        out = run.get("output")
        if out is None:
            raise ConfigError(f"{field}.output", "missing output path")
        save_trajectory_json(traj, base / out)
        if run.get("csv"):
            save_trajectory_csv(traj, base / run["csv"])
        _echo(f"wrote {out}: T={T} tail_eps={traj.tail.epsilon!r} "
              f"tail={traj.tail.dominance.value}")
    return EXIT_OK


# --------------------------------------------------------------------------
# verify (robust)
# --------------------------------------------------------------------------

def _load_trajectories(cfg: dict, base: Path) -> tuple[list, list[str], list[str]]:
    paths = _cfg_get(cfg, "trajectories", required=True)
    if not isinstance(paths, list) or not paths:
        raise ConfigError("trajectories", "need a nonempty list of files")
    trajs, hashes = [], []
    for rel in paths:
        p = base / rel
        if not p.exists():
            raise ConfigError("trajectories", f"file not found: {p}")
        trajs.append(load_trajectory_json(p))
        hashes.append(file_sha256(p))
    return trajs, [str(r) for r in paths], hashes


def _common_numbers(cfg: dict):
    alpha = float(_cfg_get(cfg, "alpha", DEFAULTS["alpha"]))
    delta_u = float(_cfg_get(cfg, "delta_u", DEFAULTS["delta_u"]))
    cap = float(_cfg_get(cfg, "coeff_cap", DEFAULTS["coeff_cap"]))
    loss = {"zero": Loss.ZERO, "l1": Loss.L1,
            "support_size": Loss.SUPPORT_SIZE}.get(
        _cfg_get(cfg, "loss", DEFAULTS["loss"]))
    if loss is None:
        raise ConfigError("loss", "must be zero | l1 | support_size")
    return alpha, delta_u, cap, loss


def cmd_verify(cfg: dict, base: Path, lp_dump: str | None = None) -> int:
    sys_model = build_system(cfg)
    if sys_model.input_role is InputRole.CONTROL:
        raise ConfigError("system", "verify handles robust systems; use synthesize")
    trajs, traj_paths, traj_hashes = _load_trajectories(cfg, base)
    lips = _lipschitz(cfg)
    width = _cfg_get(cfg, "partition_width", required=True)
    alpha, delta_u, cap, loss = _common_numbers(cfg)

    t0 = time.perf_counter()
    part = build_partition(sys_model.state_set, float(width))
    covers = cover_sets(part, sys_model.initial_set, sys_model.unsafe_set)
    cs = assemble_robust_program(trajs, lips, part, covers, alpha=alpha, delta_u=delta_u)
    _timing(f"assembly: {cs.n_rows} rows in {time.perf_counter() - t0:.2f}s")

    if lp_dump:
        lp, _ = _build_program_lp(cs, loss if loss is not Loss.SUPPORT_SIZE else Loss.L1,
                                  cap)
        write_lp_text(lp, base / lp_dump)

    t0 = time.perf_counter()
    res = solve_robust_program(cs, loss=loss, coeff_cap=cap)
    _timing(f"solve: {res.iterations} iterations in {time.perf_counter() - t0:.2f}s")

    report = {
        "command": "verify",
        "alpha": alpha, "delta_u": delta_u, "loss": loss.value,
        "partition": _partition_payload(part),
        "rows": {"initial": len(covers.initial), "unsafe": len(covers.unsafe),
                 "sign": 2 * len(trajs), "total": cs.n_rows},
        "status": res.status.value,
    }
    out_report = _cfg_get(cfg, "output.report")

    if res.status is not Status.OPTIMAL:
        report["diagnostics"] = res.diagnostics
        report["exit_code"] = EXIT_INCONCLUSIVE
        if out_report:
            write_json(base / out_report, report)
        _echo("inconclusive: no certificate found at this partition width "
              "(infeasibility proves nothing; try a finer width or more data)")
        for d in res.diagnostics[:5]:
            _echo(f"  conflict row: {d}")
        return EXIT_INCONCLUSIVE

    uppers, lowers = make_robust_bases(trajs, lips, alpha)
    tpl = template_from_p(res.p, uppers, lowers, Mode.ROBUST)

    val_cfg = _cfg_get(cfg, "validation", default={})
    mc = monte_carlo_safety(
        sys_model, tpl,
        n_runs=int(val_cfg.get("runs", 1000)),
        horizon=int(val_cfg.get("horizon", max(t.horizon for t in trajs))),
        seed=int(val_cfg.get("seed", 4242)))

    support = tpl.support()
    report.update({
        "coefficients": {"a": float(res.p[0]),
                         "b": [float(v) for v in res.p[1:1 + len(trajs)]],
                         "c": [float(v) for v in res.p[1 + len(trajs):]]},
        "objective": res.objective,
        "iterations": res.iterations,
        "cap_active": res.cap_active,
        "support": {"kp": sorted(support.kp), "kq": sorted(support.kq)},
        "validation": mc.to_dict(),
    })

    out_cert = _cfg_get(cfg, "output.certificate")
    if out_cert:
        payload = certificate_payload(
            mode=Mode.ROBUST.value, alpha=alpha, delta_u=delta_u, p=res.p,
            n_traj=len(trajs), traj_paths=traj_paths, traj_hashes=traj_hashes,
            partition=_partition_payload(part),
            lipschitz={"L_x": lips.L_x, "L_w": lips.L_w, "D_w": lips.D_w},
            epsilons=[float(e) for e in cs.epsilons],
            cap_active=res.cap_active)
        save_certificate(base / out_cert, payload)
        _echo(f"wrote certificate {out_cert}")

    if not mc.ok:
        report["exit_code"] = EXIT_INTERNAL
        if out_report:
            write_json(base / out_report, report)
        _echo("INTERNAL ERROR: optimal certificate failed Monte-Carlo validation; "
              "this indicates a bug, not an unsafe system")
        return EXIT_INTERNAL
    report["exit_code"] = EXIT_OK
    if out_report:
        write_json(base / out_report, report)
    _echo(f"certificate found: a={float(res.p[0])!r}, support kp={sorted(support.kp)} "
          f"kq={sorted(support.kq)}; validation clean "
          f"(min margin {float(mc.min_margin)!r})")
    return EXIT_OK


# --------------------------------------------------------------------------
# synthesize (controlled)
# --------------------------------------------------------------------------

def cmd_synthesize(cfg: dict, base: Path, lp_dump: str | None = None,
                   use_milp: bool = False, jobs: int = 1) -> int:
    sys_model = build_system(cfg)
    if sys_model.input_role is not InputRole.CONTROL:
        raise ConfigError("system", "synthesize needs a control system")
    trajs, traj_paths, traj_hashes = _load_trajectories(cfg, base)
    pol_specs = _cfg_get(cfg, "policies", required=True)
    if len(pol_specs) != len(trajs):
        raise ConfigError("policies", "need exactly one policy per trajectory")
    policies = [build_policy(s, f"policies[{i}]") for i, s in enumerate(pol_specs)]
    width = _cfg_get(cfg, "partition_width", required=True)
    alpha, delta_u, cap, loss = _common_numbers(cfg)
    if loss is Loss.L1 and "loss" not in cfg:
        loss = Loss.SUPPORT_SIZE  # natural default for synthesis
    gamma = float(_cfg_get(cfg, "gamma", DEFAULTS["gamma"]))

    part = build_partition(sys_model.state_set, float(width))
    covers = cover_sets(part, sys_model.initial_set, sys_model.unsafe_set)
    table = policy_compat_table(policies, part)

    restrict = _cfg_get(cfg, "pattern")
    patterns_allowed = None
    if restrict is not None:
        patterns_allowed = SupportPattern.of(restrict.get("kp", []),
                                             restrict.get("kq", []))

    def assembler(pattern: SupportPattern):
        if patterns_allowed is not None and pattern != patterns_allowed:
            raise TailAssumptionError(f"pattern {pattern} excluded by config")
        return assemble_controlled_program(trajs, policies, part, covers, alpha=alpha,
                              delta_u=delta_u, pattern=pattern, compat=table)

    def accept(pattern: SupportPattern, _result):
        cset = controller_set(pattern, policies, part, sys_model.input_set)
        empties = cset.empty_cells()
        if empties:
            return False, f"controller set empty on {len(empties)} cells " \
                          f"(first {empties[0]})"
        return True, ""

    t0 = time.perf_counter()
    if use_milp:
        res, pattern, log = solve_controlled_program_milp(assembler, len(trajs), gamma=gamma,
                                             coeff_cap=cap)
        if pattern is not None:
            ok, why = accept(pattern, res)
            if not ok:
                res = type(res)(status=Status.INFEASIBLE,
                                diagnostics=[{"pattern": str(pattern), "detail": why}])
                pattern = None
    else:
        res, pattern, log = solve_controlled_program(assembler, len(trajs), loss=loss, gamma=gamma,
                                        coeff_cap=cap, accept=accept, jobs=jobs)
    _timing(f"pattern search in {time.perf_counter() - t0:.2f}s")

    report = {
        "command": "synthesize",
        "alpha": alpha, "delta_u": delta_u, "gamma": gamma, "loss": loss.value,
        "partition": _partition_payload(part),
        "rows": {"initial": len(covers.initial), "unsafe": len(covers.unsafe)},
        "patterns": [{"pattern": str(o.pattern), "state": o.state, "detail": o.detail}
                     for o in log],
        "status": res.status.value,
    }
    out_report = _cfg_get(cfg, "output.report")

    if res.status is not Status.OPTIMAL or pattern is None:
        report["exit_code"] = EXIT_INCONCLUSIVE
        if out_report:
            write_json(base / out_report, report)
        _echo("inconclusive: no support pattern admits a certificate "
              "(refusals and conflicts listed in the report)")
        for o in log:
            if o.state != "optimal":
                _echo(f"  {o.pattern}: {o.state} {o.detail[:80]}")
        return EXIT_INCONCLUSIVE

    if lp_dump:
        cs_win, _ = assembler(pattern)
        lp, _ = _build_program_lp(cs_win, Loss.L1, cap, floor=gamma)
        write_lp_text(lp, base / lp_dump)

    cset = controller_set(pattern, policies, part, sys_model.input_set)
    uppers, lowers = make_controlled_bases(trajs, policies, alpha, pattern)
    tpl = template_from_p(res.p, uppers, lowers, Mode.CONTROLLED)

    val_cfg = _cfg_get(cfg, "validation", default={})
    nominal = val_cfg.get("nominal")
    mc = monte_carlo_safety(
        sys_model, tpl,
        n_runs=int(val_cfg.get("runs", 1000)),
        horizon=int(val_cfg.get("horizon", max(t.horizon for t in trajs))),
        seed=int(val_cfg.get("seed", 4242)),
        controller=cset, part=part,
        nominal=None if nominal is None else np.asarray(nominal, dtype=np.float64))

    all_cells = list(part.iter_cells())
    lo_arr, hi_arr = cset.box_bounds(all_cells)
    boxes_payload = {
        "cells": [list(c) for c in all_cells],
        "lower": [[float(v) for v in row] for row in lo_arr],
        "upper": [[float(v) for v in row] for row in hi_arr],
    }
    pol_payload = []
    for pol, spec in zip(policies, pol_specs):
        if pol.constant_value is not None:
            pol_payload.append({"kind": "constant",
                                "u": [float(v) for v in pol.constant_value],
                                "name": pol.name})
        else:
            pol_payload.append({"kind": "external", "name": pol.name,
                                "ref": spec.get("ref", "")})

    support = tpl.support()
    report.update({
        "coefficients": {"a": float(res.p[0]),
                         "b": [float(v) for v in res.p[1:1 + len(trajs)]],
                         "c": [float(v) for v in res.p[1 + len(trajs):]]},
        "pattern": {"kp": sorted(pattern.kp), "kq": sorted(pattern.kq)},
        "support": {"kp": sorted(support.kp), "kq": sorted(support.kq)},
        "iterations": res.iterations,
        "cap_active": res.cap_active,
        "validation": mc.to_dict(),
    })

    out_cert = _cfg_get(cfg, "output.certificate")
    if out_cert:
        payload = certificate_payload(
            mode=Mode.CONTROLLED.value, alpha=alpha, delta_u=delta_u, p=res.p,
            n_traj=len(trajs), traj_paths=traj_paths, traj_hashes=traj_hashes,
            partition=_partition_payload(part),
            pattern={"kp": sorted(pattern.kp), "kq": sorted(pattern.kq)},
            gamma=gamma, controller_boxes=boxes_payload, policies=pol_payload,
            cap_active=res.cap_active)
        save_certificate(base / out_cert, payload)
        _echo(f"wrote certificate {out_cert}")

    if not mc.ok:
        report["exit_code"] = EXIT_INTERNAL
        if out_report:
            write_json(base / out_report, report)
        _echo("INTERNAL ERROR: synthesized controller failed Monte-Carlo validation")
        return EXIT_INTERNAL
    report["exit_code"] = EXIT_OK
    if out_report:
        write_json(base / out_report, report)
    _echo(f"controller synthesized with pattern {pattern}; validation clean")
    return EXIT_OK


# --------------------------------------------------------------------------
# validate an existing certificate
# --------------------------------------------------------------------------

def rebuild_template(cert: dict, base: Path, policies: list[FeedbackPolicy] | None = None):
    """Reconstruct trajectories, partition, bases, and template from a file.

    Re-derives every constraint row and re-checks it before the certificate
    is accepted; a failed row or a trajectory hash mismatch rejects the file.
    """
    traj_files = verify_trajectory_hashes(cert, base)
    trajs = [load_trajectory_json(p) for p in traj_files]
    part = _partition_from_payload(cert["partition"])
    n = len(trajs)
    coef = cert["coefficients"]
    p = np.concatenate(([coef["a"]], coef["b"], coef["c"]))

    if cert["mode"] == Mode.ROBUST.value:
        lips = LipschitzBounds(**cert["lipschitz"])
        eps = cert["epsilons"]
        for traj, e in zip(trajs, eps):
            dom = traj.tail.dominance if traj.tail else TailDominance.NEITHER
            traj.tail = TailInfo(epsilon=float(e), dominance=dom)
        uppers, lowers = make_robust_bases(trajs, lips, float(cert["alpha"]))
        tpl = template_from_p(p, uppers, lowers, Mode.ROBUST)
        return trajs, part, tpl, None, lips
    pattern = SupportPattern.of(cert["pattern"]["kp"], cert["pattern"]["kq"])
    if policies is None:
        policies = [build_policy(s, f"certificate.policies[{i}]")
                    for i, s in enumerate(cert["policies"])]
    uppers, lowers = make_controlled_bases(trajs, policies, float(cert["alpha"]),
                                           pattern)
    tpl = template_from_p(p, uppers, lowers, Mode.CONTROLLED)
    return trajs, part, tpl, (pattern, policies), None


def cmd_validate(cfg: dict, base: Path) -> int:
    sys_model = build_system(cfg)
    cert_path = _cfg_get(cfg, "certificate", required=True)
    cert = load_certificate(base / cert_path)
    policies = None
    if _cfg_get(cfg, "policies") is not None:
        policies = [build_policy(s, f"policies[{i}]")
                    for i, s in enumerate(cfg["policies"])]
    trajs, part, tpl, controlled, lips = rebuild_template(cert, base, policies)
    covers = cover_sets(part, sys_model.initial_set, sys_model.unsafe_set)

    # re-derive the constraint rows and re-check the stored coefficients
    p = tpl.coefficients()
    if cert["mode"] == Mode.ROBUST.value:
        cs = assemble_robust_program(trajs, lips, part, covers, alpha=float(cert["alpha"]),
                            delta_u=float(cert["delta_u"]))
        fails = cs.check_full(p, tol=1e-9)
    else:
        pattern, pols = controlled
        cs, rep = assemble_controlled_program(trajs, pols, part, covers,
                                 alpha=float(cert["alpha"]),
                                 delta_u=float(cert["delta_u"]), pattern=pattern)
        fails = cs.check_full(p, tol=1e-9,
                              gamma=float(cert["gamma"]) if cert.get("gamma") else None)
        if not rep.ok:
            fails.append(rep.describe())
    if fails:
        _echo("certificate rejected: stored coefficients fail re-verification")
        for f in fails[:5]:
            _echo(f"  {f}")
        return EXIT_INCONCLUSIVE

    val_cfg = _cfg_get(cfg, "validation", default={})
    kwargs = {}
    if cert["mode"] == Mode.CONTROLLED.value:
        pattern, pols = controlled
        kwargs["controller"] = controller_set(pattern, pols, part, sys_model.input_set)
        kwargs["part"] = part
    mc = monte_carlo_safety(sys_model, tpl,
                            n_runs=int(val_cfg.get("runs", 1000)),
                            horizon=int(val_cfg.get("horizon", 400)),
                            seed=int(val_cfg.get("seed", 911)), **kwargs)
    out_report = _cfg_get(cfg, "output.report")
    if out_report:
        write_json(base / out_report,
                   {"command": "validate", "rows_checked": cs.n_rows,
                    "validation": mc.to_dict(),
                    "exit_code": EXIT_OK if mc.ok else EXIT_INTERNAL})
    if not mc.ok:
        _echo("validation FAILED: certificate admitted violations")
        return EXIT_INTERNAL
    _echo(f"certificate re-verified ({cs.n_rows} rows) and validated "
          f"(min margin {mc.min_margin!r})")
    return EXIT_OK


# --------------------------------------------------------------------------
# eval-grid
# --------------------------------------------------------------------------

def cmd_eval_grid(cert_path: str, resolution: int, out_path: str,
                  axes: str | None, fix: str | None, base: Path) -> int:
    cert = load_certificate(base / cert_path)
    _, part, tpl, _, _ = rebuild_template(cert, base)
    dom = part.domain
    n = dom.dim
    if resolution < 1:
        raise UsageError("resolution must be >= 1")

    if axes is None:
        if n != 2 and fix is None:
            raise UsageError("n > 2 needs --axes/--fix to pick a 2-D slice")
        ax_i, ax_j = 0, 1
    else:
        try:
            ax_i, ax_j = (int(a) - 1 for a in axes.split(","))
        except ValueError:
            raise UsageError(f"bad --axes {axes!r}; expected like '1,2'")
    if not (0 <= ax_i < n and 0 <= ax_j < n and ax_i != ax_j):
        raise UsageError(f"slice axes out of range for dimension {n}")

    fixed = 0.5 * (dom.lower + dom.upper)
    if fix:
        for part_spec in fix.split(","):
            try:
                key, val = part_spec.split("=")
                fixed[int(key) - 1] = float(val)
            except (ValueError, IndexError):
                raise UsageError(f"bad --fix entry {part_spec!r}; expected like '3=5.0'")

    grid_i = np.linspace(dom.lower[ax_i], dom.upper[ax_i], resolution)
    grid_j = np.linspace(dom.lower[ax_j], dom.upper[ax_j], resolution)
    pts = np.tile(fixed, (resolution * resolution, 1))
    ii, jj = np.meshgrid(grid_i, grid_j, indexing="ij")
    pts[:, ax_i] = ii.ravel()
    pts[:, ax_j] = jj.ravel()
    vals = tpl.eval_many(pts)

    lines = [f"x{ax_i + 1},x{ax_j + 1},value"]
    for row, v in zip(pts, vals):
        lines.append(f"{float(row[ax_i])!r},{float(row[ax_j])!r},{float(v)!r}")
    Path(base / out_path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    _echo(f"wrote {out_path}: {resolution}x{resolution} nodes")
    return EXIT_OK


def cmd_info(cfg_path: str | None, base: Path) -> int:
    _echo("monocert: trajectory-based safety certificates for monotone systems")
    _echo(f"kernel backend: {_kernels.BACKEND} "
          f"(set MONOCERT_DISABLE_NUMBA=1 to force numpy)")
    _echo(f"defaults: {DEFAULTS}")
    _echo(f"built-in systems: {sorted(BUILTIN_SYSTEMS)}")
    if cfg_path:
        cfg = _load_config(base / cfg_path)
        sys_model = build_system(cfg)
        _echo(f"system {sys_model.name}: dim={sys_model.dim} "
              f"inputs={sys_model.input_dim} role={sys_model.input_role.value}")
        _echo(f"  state set: {sys_model.state_set.lower.tolist()} .. "
              f"{sys_model.state_set.upper.tolist()}")
    return EXIT_OK


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------

def main(argv=None) -> int:
    parser = _Parser(prog="monocert",
                     description="data-driven safety certificates for "
                                 "monotone discrete-time systems")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config(p):
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--jobs", type=int, default=1, help="worker cap")

    p_sim = sub.add_parser("simulate", help="generate trajectory data files")
    add_config(p_sim)
    p_ver = sub.add_parser("verify", help="search for a robust certificate")
    add_config(p_ver)
    p_ver.add_argument("--lp-dump", default=None, help="write the LP in text form")
    p_syn = sub.add_parser("synthesize", help="search for a safe controller")
    add_config(p_syn)
    p_syn.add_argument("--lp-dump", default=None)
    p_syn.add_argument("--milp", action="store_true",
                       help="branch-and-bound over pattern bits instead of enumeration")
    p_val = sub.add_parser("validate", help="re-verify and Monte-Carlo an existing certificate")
    add_config(p_val)
    p_grid = sub.add_parser("eval-grid", help="export certificate values on a grid")
    p_grid.add_argument("--certificate", required=True)
    p_grid.add_argument("--resolution", type=int, default=200)
    p_grid.add_argument("--out", required=True)
    p_grid.add_argument("--axes", default=None, help="1-based axis pair, e.g. '1,2'")
    p_grid.add_argument("--fix", default=None, help="fixed values, e.g. '3=5.0,4=5.0'")
    p_info = sub.add_parser("info", help="environment and defaults")
    p_info.add_argument("--config", default=None)

    args = parser.parse_args(argv)
    base = Path.cwd()
    try:
        if args.command == "simulate":
            return cmd_simulate(_load_config(base / args.config), base, args.seed)
        if args.command == "verify":
            return cmd_verify(_load_config(base / args.config), base, args.lp_dump)
        if args.command == "synthesize":
            return cmd_synthesize(_load_config(base / args.config), base,
                                  args.lp_dump, use_milp=args.milp, jobs=args.jobs)
        if args.command == "validate":
            return cmd_validate(_load_config(base / args.config), base)
        if args.command == "eval-grid":
            return cmd_eval_grid(args.certificate, args.resolution, args.out,
                                 args.axes, args.fix, base)
        if args.command == "info":
            return cmd_info(args.config, base)
        raise UsageError(f"unknown command {args.command}")
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
