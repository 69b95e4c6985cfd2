"""Command-line entry point: ``qmemcap <command> --config channel.json ...``.

Exit codes: 0 success, 2 bad input, 3 numerical failure, 4 a requested bound
was not reached, 5 the dimension cap would be exceeded.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import capacity as cap_mod
from . import coding, discrimination, typicality
from .channels import BranchMixture, Ensemble, KrausChannel, as_mixture, density_matrix
from .errors import BoundNotReachedError, InputError, QmemcapError

SCHEMA_VERSION = "qmemcap.report/1"
COMMANDS = ("capacity", "maximin", "discriminate", "typicality", "pack", "converse")
DEFAULT_FORMAT = {
    "capacity": "json",
    "maximin": "json",
    "discriminate": "csv",
    "typicality": "csv",
    "pack": "json",
    "converse": "json",
}


@dataclass
class RunConfig:
    command: str
    channel_spec_path: str | None
    params: dict = field(default_factory=dict)
    output_path: str | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise InputError(f"unknown command {self.command!r}")
        fmt = self.params.get("format") or DEFAULT_FORMAT[self.command]
        if fmt not in ("csv", "json"):
            raise InputError(f"output format must be csv or json, got {fmt!r}")
        self.params["format"] = fmt
        self.params.setdefault("seed", 0)

    def resolved(self) -> dict:
        return {
            "command": self.command,
            "config": self.channel_spec_path,
            "params": {k: self.params[k] for k in sorted(self.params)},
        }


# ---------------------------------------------------------------------------
# input parsing
# ---------------------------------------------------------------------------


def _complex_matrix(x, what: str, shape) -> np.ndarray:
    """Parse a matrix of known shape.

    Accepted layouts: nested rows of [re, im] pairs, nested rows of real
    numbers, or a flat row-major list of [re, im] pairs.
    """
    try:
        arr = np.asarray(x, dtype=float)
    except (TypeError, ValueError):
        raise InputError(f"{what}: entries must be numbers or [re, im] pairs") from None
    shape = tuple(shape)
    if arr.shape == shape + (2,):
        return arr[..., 0] + 1j * arr[..., 1]
    if arr.shape == shape:
        return arr.astype(complex)
    if arr.shape == (shape[0] * shape[1], 2):
        return (arr[:, 0] + 1j * arr[:, 1]).reshape(shape)
    raise InputError(f"{what}: cannot read a {shape[0]}x{shape[1]} matrix from an array of shape {arr.shape}")


def parse_channel(spec: dict, where: str = "channel") -> KrausChannel:
    if not isinstance(spec, dict):
        raise InputError(f"{where}: expected an object")
    for key in ("dim_in", "dim_out", "kraus"):
        if key not in spec:
            raise InputError(f"{where}: missing field '{key}'")
    try:
        d_in, d_out = int(spec["dim_in"]), int(spec["dim_out"])
    except (TypeError, ValueError):
        raise InputError(f"{where}: dim_in and dim_out must be integers") from None
    ks = spec["kraus"]
    if not isinstance(ks, list) or not ks:
        raise InputError(f"{where}.kraus: expected a non-empty list of operators")
    mats = [_complex_matrix(k, f"{where}.kraus[{r}]", (d_out, d_in)) for r, k in enumerate(ks)]
    try:
        return KrausChannel(np.stack(mats))
    except InputError as exc:
        raise InputError(f"{where}: {exc}") from None


def parse_mixture(spec: dict) -> BranchMixture:
    if isinstance(spec, dict) and "branches" in spec:
        branches = spec["branches"]
        if not isinstance(branches, list) or not branches:
            raise InputError("branches: expected a non-empty list of channel specs")
        chans = tuple(parse_channel(b, f"branches[{k}]") for k, b in enumerate(branches))
        if "gammas" not in spec:
            raise InputError("missing field 'gammas'")
        try:
            return BranchMixture(np.asarray(spec["gammas"], dtype=float), chans)
        except (TypeError, ValueError) as exc:
            raise InputError(f"gammas: {exc}") from None
    return as_mixture(parse_channel(spec))


def read_json(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def load_mixture(path) -> BranchMixture:
    """Read a channel spec or a mixture spec from a JSON file."""
    return parse_mixture(read_json(path))


def parse_ensemble(spec: dict, dim: int) -> Ensemble:
    try:
        probs = np.asarray(spec["probs"], dtype=float)
        states = tuple(
            density_matrix(_complex_matrix(s, f"ensemble.states[{k}]", (dim, dim))) for k, s in enumerate(spec["states"])
        )
    except KeyError as exc:
        raise InputError(f"ensemble: missing field {exc}") from None
    return Ensemble(probs, states)


def _int_list(text: str) -> list[int]:
    return [int(x) for x in str(text).split(",") if x.strip()]


def _float_list(text: str) -> list[float]:
    return [float(x) for x in str(text).split(",") if x.strip()]


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def _clean(x):
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    return x


def dumps_json(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


def dumps_csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _emit(cfg: RunConfig, report: dict, table=None):
    """Write ``report`` (json) or ``table`` = (columns, rows) (csv)."""
    if cfg.params["format"] == "csv":
        if table is None:
            raise InputError(f"{cfg.command} has no tabular output; use --format json")
        header = f"# schema_version: {SCHEMA_VERSION}\n# resolved_config: {json.dumps(_clean(cfg.resolved()), sort_keys=True)}\n"
        text = header + dumps_csv(*table)
    else:
        body = dict(report)
        if table is not None:
            cols, rows = table
            body["rows"] = [dict(zip(cols, r)) for r in rows]
        body["schema_version"] = SCHEMA_VERSION
        body["resolved_config"] = cfg.resolved()
        text = dumps_json(body)
    if cfg.output_path:
        Path(cfg.output_path).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


_OPTIMIZER_FIELDS = ("tol", "patience", "max_iterations", "support_cap")


def _optimizer(params, seed=None) -> cap_mod.OptimizerConfig:
    extra = {k: params[k] for k in _OPTIMIZER_FIELDS if params.get(k) is not None}
    return cap_mod.OptimizerConfig(
        seed=params["seed"] if seed is None else seed, threads=params["threads"], **extra
    )


def _best_of_trials(mixture, params) -> cap_mod.CapacityResult:
    """Run the optimizer ``trials`` times with spawned seeds and keep the best."""
    seeds = np.random.SeedSequence(params["seed"]).spawn(params["trials"]) if params["trials"] > 1 else None
    if seeds is None:
        return cap_mod.maximin_capacity(mixture, _optimizer(params))
    best = None
    for s in seeds:
        res = cap_mod.maximin_capacity(mixture, _optimizer(params, int(s.generate_state(1)[0])))
        if best is None or res.value > best.value:
            best = res
    return best


def _capacity_report(res: cap_mod.CapacityResult) -> dict:
    out = res.to_dict()
    out["ensemble_states"] = [np.stack([s.real, s.imag], axis=-1) for s in res.argmax_ensemble.states]
    return out


def cmd_capacity(cfg: RunConfig, spec: dict):
    mixture = parse_mixture(spec)
    if mixture.M != 1:
        raise InputError("capacity takes a single channel; use maximin for a mixture")
    _emit(cfg, _capacity_report(_best_of_trials(mixture, cfg.params)))


def cmd_maximin(cfg: RunConfig, spec: dict):
    mixture = parse_mixture(spec)
    res = _best_of_trials(mixture, cfg.params)
    report = _capacity_report(res)
    report["gammas"] = mixture.gammas
    _emit(cfg, report)


def cmd_discriminate(cfg: RunConfig, spec: dict):
    mixture = parse_mixture(spec)
    p = cfg.params
    probe_cfg = discrimination.ProbeConfig(seed=p["seed"], restarts=max(p["trials"], 1) + 5)
    builder = discrimination.preamble_builder(mixture, probe_cfg)
    m_max = p["m"] or 40
    rows = []
    for m in range(1, m_max + 1):
        pre = builder(m)
        success = discrimination.branch_id_success(pre)
        for i, s in enumerate(success):
            rows.append((m, i, s, discrimination.lemma_bound(pre.f, m, mixture.gammas[i], mixture.M), pre.f))
    report = {"M": mixture.M, "gammas": mixture.gammas, "m_max": m_max}
    if p.get("delta") is not None:
        report["selected_m"] = discrimination.select_m(builder, p["delta"], p.get("m_limit") or 10_000)
    _emit(cfg, report, (["m", "branch", "exact_success", "lemma_bound", "f"], rows))


def _typical_spec(spec: dict, n: int, eps: float) -> typicality.TypicalSpec:
    if "spectrum" in spec:
        lam = np.asarray(spec["spectrum"], dtype=float)
        return typicality.TypicalSpec.for_state(np.diag(lam).astype(complex), n, eps)
    if "state" in spec:
        d = len(spec["state"])
        return typicality.TypicalSpec.for_state(density_matrix(_complex_matrix(spec["state"], "state", (d, d))), n, eps)
    raise InputError("typicality needs a 'state' matrix or a 'spectrum' list in the config")


def cmd_typicality(cfg: RunConfig, spec: dict):
    p = cfg.params
    ns = p["n_list"] or [50]
    epss = p["epsilon_list"] or [0.1]
    rows, mc_rows = [], []
    for n in ns:
        for eps in epss:
            ts = _typical_spec(spec, n, eps)
            rep = typicality.typical_report(ts, seed=p["seed"])
            rows.append((n, eps, rep.probability_mass, rep.log2_dimension, rep.dimension_bound))
            if p["trials"] > 0:
                mc = typicality.sample_typical_membership(ts, p["seed"], p["trials"], threads=p["threads"])
                mc_rows.append({"n": n, "epsilon": eps, "estimate": mc.estimate, "half_width": mc.half_width})
    report = {"monte_carlo": mc_rows} if mc_rows else {}
    _emit(cfg, report, (["n", "epsilon", "mass", "log2_dim", "bound"], rows))


def _ensemble_for(mixture, spec, params) -> tuple[Ensemble, float | None]:
    if "ensemble" in spec:
        return parse_ensemble(spec["ensemble"], mixture.dim_in), None
    res = _best_of_trials(mixture, params)
    return res.argmax_ensemble, res.value


def cmd_pack(cfg: RunConfig, spec: dict):
    p = cfg.params
    mixture = parse_mixture(spec)
    ens, cap_value = _ensemble_for(mixture, spec, p)
    n = (p["n_list"] or [3])[0]
    eps = (p["epsilon_list"] or [0.1])[0]
    pcfg = coding.PackingConfig(
        ens,
        n,
        eps,
        typical_width=p.get("width"),
        threshold_coeff=p.get("threshold_coeff"),
        capacity=spec.get("capacity"),
    )
    if mixture.M == 1:
        code = coding.pack_memoryless(mixture.branches[0], pcfg)
        m = 0
    else:
        builder = discrimination.preamble_builder(mixture, discrimination.ProbeConfig(seed=p["seed"]))
        m = p["m"] or discrimination.select_m(builder, p.get("delta") or 0.05, p.get("m_limit") or 10_000)
        code = coding.pack_memory(mixture, builder(m), pcfg)
    if p.get("code"):
        Path(p["code"]).write_text(dumps_json(coding.code_to_bundle(code)))
    report = {
        "n": n,
        "epsilon": eps,
        "N": code.N,
        "n_total": code.n_total,
        "rate": code.rate,
        "m": m,
        "per_codeword_success": code.per_codeword_success,
        "threshold": code.threshold,
        "threshold_values": code.threshold_values,
        "p_e": coding.evaluate_error(code, mixture),
        "per_branch_error": coding.branch_errors(code, mixture),
        "povm_violation": coding.povm_violation(code),
        "capacity_estimate": cap_value,
        "packing": pcfg.summary(),
        "diagnostics": code.diagnostics,
    }
    _emit(cfg, report)
    if code.N == 0:
        raise BoundNotReachedError("packing accepted no codeword at this block length and epsilon")


def cmd_converse(cfg: RunConfig, spec: dict):
    p = cfg.params
    mixture = parse_mixture(spec)
    if not p.get("code"):
        raise InputError("converse needs --code PATH (a bundle written by `pack --code`)")
    code = coding.code_from_bundle(read_json(p["code"]))
    if p.get("capacity") is not None:
        c = p["capacity"]
    elif "capacity" in spec:
        c = float(spec["capacity"])
    else:
        c = _best_of_trials(mixture, p).value
    rep = coding.converse_check(code, mixture, c)
    out = rep.to_dict()
    out["p_e"] = rep.average_error
    out["epsilon"] = p["epsilon_list"][0] if p["epsilon_list"] else None
    _emit(cfg, out)


HANDLERS = {
    "capacity": cmd_capacity,
    "maximin": cmd_maximin,
    "discriminate": cmd_discriminate,
    "typicality": cmd_typicality,
    "pack": cmd_pack,
    "converse": cmd_converse,
}


def run(cfg: RunConfig) -> int:
    spec = read_json(cfg.channel_spec_path) if cfg.channel_spec_path else {}
    HANDLERS[cfg.command](cfg, spec)
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qmemcap", description="Classical capacity of quantum channels with long-term memory.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="channel or mixture spec (JSON)")
    ap.add_argument("--out", help="write the report here instead of stdout")
    ap.add_argument("--format", choices=("csv", "json"))
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--epsilon", help="float, or comma-separated list for typicality sweeps")
    ap.add_argument("--n", help="int, or comma-separated list for typicality sweeps")
    ap.add_argument("--m", type=int, help="preamble copies (discriminate: sweep 1..m)")
    ap.add_argument("--trials", type=int, default=1, help="optimizer restarts, or Monte-Carlo samples for typicality")
    ap.add_argument("--delta", type=float, help="target branch-identification failure for selecting m")
    ap.add_argument("--m-limit", type=int, help="largest m tried when selecting m")
    ap.add_argument("--code", help="code bundle path (written by pack, read by converse)")
    ap.add_argument("--capacity", type=float, help="capacity value used by converse")
    ap.add_argument("--width", type=float, help="typical window half-width used by pack")
    ap.add_argument("--tol", type=float, help="optimizer: improvement counted as progress")
    ap.add_argument("--patience", type=int, help="optimizer: stale rounds before stopping")
    ap.add_argument("--max-iterations", type=int, help="optimizer: round limit")
    ap.add_argument("--support-cap", type=int, help="optimizer: input ensemble size (at most d*d)")
    ap.add_argument("--threshold-coeff", type=float, help="epsilon coefficient in the packing threshold exponent")
    return ap


def config_from_args(args: argparse.Namespace) -> RunConfig:
    try:
        n_list = _int_list(args.n) if args.n else []
        eps_list = _float_list(args.epsilon) if args.epsilon else []
    except ValueError as exc:
        raise InputError(f"bad --n/--epsilon value: {exc}") from None
    if args.threads < 1:
        raise InputError("--threads must be at least 1")
    for flag in ("patience", "max_iterations", "support_cap"):
        if getattr(args, flag) is not None and getattr(args, flag) < 1:
            raise InputError(f"--{flag.replace('_', '-')} must be at least 1")
    if args.tol is not None and not args.tol > 0:
        raise InputError("--tol must be positive")
    if args.trials < 0:
        raise InputError("--trials must be non-negative")
    params = {
        "format": args.format,
        "seed": args.seed,
        "threads": args.threads,
        "n_list": n_list,
        "epsilon_list": eps_list,
        "m": args.m,
        "trials": args.trials,
        "delta": args.delta,
        "m_limit": args.m_limit,
        "code": args.code,
        "capacity": args.capacity,
        "width": args.width,
        "threshold_coeff": args.threshold_coeff,
        "tol": args.tol,
        "patience": args.patience,
        "max_iterations": args.max_iterations,
        "support_cap": args.support_cap,
    }
    return RunConfig(args.command, args.config, params, args.out)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return run(config_from_args(args))
    except QmemcapError as exc:
        print(f"qmemcap {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
