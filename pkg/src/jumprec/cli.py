"""Command-line surface over synthesis, recovery, benchmarking,
adversarial demonstration and stability-bound queries.

All artifacts are files (JSON or CSV); every command is deterministic
under fixed inputs and seed.  Exit codes: 0 success, 2 model/contract
violation, 3 numeric failure, 4 I/O or parse failure.
"""

from __future__ import annotations

import functools
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import click
import numpy as np

from .errors import ModelError, NumericError
from .localize import localize_jump, make_bump, prony_order0
from .model import (
    AprioriBounds,
    JumpModel,
    SmoothPart,
    adversarial_pair,
    load_model,
    phi_coeff_array,
    phi_eval,
    shift_jumps,
    smooth_catalog,
    synth_spectrum,
)
from .precision import parse_precision, recover_single_jump_mp
from .reconstruct import (
    Approximant,
    ReconstructionConfig,
    full_reconstruct,
    jump_free_error,
)
from .solver import half_order_recover, recover_single_jump
from .spectrum import FourierSpectrum, load_spectrum, save_spectrum
from .stability import (
    ERROR_FLOOR,
    PronyConfig,
    c9_bound,
    decimated_cap,
    fit_loglog_slope,
    method_gap_factor,
    misspec_exponent,
    node_perturbation_bound,
)

_METHODS = ("full-decimated", "half-order", "eckhoff-original")

# pipeline geometry shared with full_reconstruct; the bench variants
# rebuild it because they bypass the full pipeline on purpose
_USABLE_FRACTION = 0.75
_BENCH_BUMP_GATE = 5e-2


def _guard(fn):
    """Translate library errors into the documented exit codes."""

    @functools.wraps(fn)
    def inner(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ModelError as exc:
            click.echo(f"model error: {exc}", err=True)
            sys.exit(2)
        except NumericError as exc:
            click.echo(f"numeric error: {exc}", err=True)
            sys.exit(3)
        except (OSError, ValueError) as exc:
            click.echo(f"io error: {exc}", err=True)
            sys.exit(4)

    return inner


def _require_out(ctx) -> str:
    out = ctx.obj.get("out")
    if out is None:
        raise ModelError("this command writes an artifact; pass --out PATH")
    return out


def _load_bounds(path) -> AprioriBounds:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    try:
        return AprioriBounds(
            J=float(data["J"]), A=float(data["A"]),
            B=float(data["B"]), R=float(data["R"]),
        )
    except (KeyError, TypeError) as exc:
        raise ModelError(f"bounds file needs numeric J, A, B, R: {exc}") from exc


def _fmt(v: float) -> str:
    if isinstance(v, float) and math.isnan(v):
        return "nan"
    return repr(float(v))


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option(
    "--precision", default="double", show_default=True,
    help="Arithmetic mode: 'double' or 'extended:<digits>' with >= 50 digits.",
)
@click.option(
    "--seed", default=0, show_default=True,
    type=click.IntRange(0, 2**64 - 1),
    help="Fallback RNG seed (u64); a benchmark spec's own seed takes priority.",
)
@click.option(
    "--out", default=None, type=click.Path(),
    help="Output path: file for synth/recover/bench/bounds, directory for adversarial.",
)
@click.pass_context
def main(ctx, precision, seed, out):
    """Reconstruct piecewise-smooth functions from Fourier coefficients.

    Benchmark CSV columns: method, M, err_xi, err_a_0..err_a_d, err_sup,
    ratio_logerr_logM.  Footer comment lines ('#') carry fitted log-log
    slopes per method and mark rows excluded by the precision-floor
    guard or failed outright.
    """
    try:
        mode = parse_precision(precision)
    except ModelError as exc:
        click.echo(f"model error: {exc}", err=True)
        sys.exit(2)
    ctx.obj = {"precision": mode, "seed": seed, "out": out}


@main.command()
@click.argument("model_path", type=click.Path())
@click.option(
    "--smooth", "smooth_name", default="zero", show_default=True,
    help="Smooth-part catalog entry: zero, sin, expsin, poly-blend.",
)
@click.option(
    "--smooth-args", default="{}", show_default=True,
    help="JSON object of smooth-part parameters.",
)
@click.option(
    "-M", "--modes", "modes", required=True, type=click.IntRange(min=1),
    help="Highest retained frequency; the file stores c_-M..c_M.",
)
@click.pass_context
@_guard
def synth(ctx, model_path, smooth_name, smooth_args, modes):
    """Write the first M Fourier coefficients of model + smooth part."""
    out = _require_out(ctx)
    model = load_model(model_path)
    args = json.loads(smooth_args)
    if not isinstance(args, dict):
        raise ModelError("--smooth-args must be a JSON object")
    smooth = smooth_catalog(smooth_name, **args)
    spec = synth_spectrum(model, smooth, modes)
    save_spectrum(out, spec)
    click.echo(f"wrote spectrum with M={modes} to {out}")


def _recover_extended(spec, cfg, digits) -> Approximant:
    # single-jump algebraic solve at high working precision; windowing
    # and detection stay in double, so the gain is purely the removal
    # of internal cancellation in the moment/annihilator chain
    if cfg.K != 1:
        raise ModelError(
            "extended precision supports single-jump recovery only (K=1)"
        )
    prior = cfg.priors[0] if cfg.trust_priors else prony_order0(spec, 1)[0]
    M_eff = max(int(cfg.usable_fraction * spec.M), cfg.d + 2)
    est = recover_single_jump_mp(
        spec, cfg.d, prior, cfg.plan_kind, M=M_eff, digits=digits
    )
    mags = est.magnitudes
    if spec.real_valued:
        mags = tuple(float(np.real(a)) for a in mags)
    model = JumpModel(cfg.d, ((est.xi, mags),))
    corrected = spec.coeffs - phi_coeff_array(model, spec.M)
    prov = cfg.to_json_dict()
    prov["precision_digits"] = digits
    return Approximant(
        model,
        FourierSpectrum(spec.M, corrected, spec.real_valued),
        spec.M,
        prov,
    )


@main.command()
@click.argument("spectrum_path", type=click.Path())
@click.option("-d", "--order", "order", required=True, type=click.IntRange(min=0),
              help="Smoothness order: magnitudes a_0..a_d per jump.")
@click.option("-K", "--jumps", "jumps", required=True, type=click.IntRange(min=1),
              help="Number of jumps to recover.")
@click.option("--bounds", "bounds_path", required=True, type=click.Path(),
              help="JSON file with the a-priori constants J, A, B, R.")
@click.option("--plan", default="decimated", show_default=True,
              type=click.Choice(["decimated", "consecutive"]),
              help="Sampling plan for the full-order solve.")
@click.option("--priors", default=None,
              help="JSON list of K approximate jump locations.")
@click.option("--trust-priors", is_flag=True, default=False,
              help="Skip detection and refinement; use --priors as-is.")
@click.pass_context
@_guard
def recover(ctx, spectrum_path, order, jumps, bounds_path, plan, priors,
            trust_priors):
    """Estimate jumps and the corrected smooth spectrum from coefficients."""
    out = _require_out(ctx)
    mode, digits = ctx.obj["precision"]
    spec = load_spectrum(spectrum_path)
    bounds = _load_bounds(bounds_path)
    pri = None
    if priors is not None:
        parsed = json.loads(priors)
        if not isinstance(parsed, list):
            raise ModelError("--priors must be a JSON list of locations")
        pri = tuple(float(p) for p in parsed)
    cfg = ReconstructionConfig(
        d=order, K=jumps, bounds=bounds, plan_kind=plan,
        priors=pri, trust_priors=trust_priors,
    )
    if mode == "extended":
        appr = _recover_extended(spec, cfg, digits)
    else:
        appr = full_reconstruct(spec, cfg)
    with open(out, "w", encoding="utf-8") as fh:
        json.dump(appr.to_json_dict(), fh)
        fh.write("\n")
    locs = ", ".join(f"{x:.12g}" for x in appr.estimate.locations)
    click.echo(f"recovered {jumps} jump(s) at [{locs}] -> {out}")


@dataclass(frozen=True)
class BenchmarkSpec:
    """Validated contents of a benchmark sweep file."""

    model: JumpModel
    smooth: Optional[SmoothPart]
    noise_amp: float
    noise_decay: float
    methods: tuple
    M_values: tuple
    precision: tuple
    seed: int
    bounds: AprioriBounds


def _default_bounds(model: JumpModel, noise_amp: float) -> AprioriBounds:
    locs = model.locations
    if len(locs) >= 2:
        gaps = [
            min(abs(a - b) % (2 * np.pi), 2 * np.pi - abs(a - b) % (2 * np.pi))
            for i, a in enumerate(locs) for b in locs[i + 1:]
        ]
        J = min(min(gaps), np.pi / 2)
    else:
        J = np.pi / 2
    lead = min(abs(j[1][0]) for j in model.jumps)
    return AprioriBounds(
        J=float(J),
        A=2.0 * model.magnitude_sum(),
        B=0.5 * lead,
        R=max(float(noise_amp), 1.0),
    )


def load_bench_spec(path, fallback_seed: int = 0) -> BenchmarkSpec:
    """Parse and validate a benchmark sweep description.

    JSON shape: {"model": {...}, "smooth": {"name", "args"}|null,
    "noise": {"amp", "decay"}|null, "methods": [...], "M_values": [...],
    "precision": "double"|"extended:<digits>", "seed": int,
    "bounds": {"J","A","B","R"}}.  smooth, noise, precision, seed and
    bounds are optional; bounds default to values derived from the model.
    """
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict) or "model" not in data:
        raise ModelError("benchmark spec must be a JSON object with a 'model'")
    model = JumpModel.from_json_dict(data["model"])
    if model.K < 1:
        raise ModelError("benchmark model needs at least one jump")

    sm = data.get("smooth")
    smooth = None
    if sm is not None:
        if not isinstance(sm, dict) or "name" not in sm:
            raise ModelError("'smooth' must be {\"name\": ..., \"args\": {...}}")
        smooth = smooth_catalog(sm["name"], **dict(sm.get("args", {})))

    nz = data.get("noise")
    noise_amp, noise_decay = 0.0, float(model.order + 2)
    if nz is not None:
        try:
            noise_amp = float(nz["amp"])
            noise_decay = float(nz.get("decay", model.order + 2))
        except (KeyError, TypeError) as exc:
            raise ModelError(f"'noise' needs numeric amp (and decay): {exc}") from exc
        if noise_amp < 0:
            raise ModelError(f"noise amplitude must be >= 0, got {noise_amp}")

    methods = tuple(data.get("methods", list(_METHODS)))
    if not methods:
        raise ModelError("benchmark spec lists no methods")
    bad = [m for m in methods if m not in _METHODS]
    if bad:
        raise ModelError(f"unknown methods {bad}; choose from {list(_METHODS)}")
    if len(set(methods)) != len(methods):
        raise ModelError(f"duplicate methods in {list(methods)}")

    try:
        M_values = tuple(sorted(int(m) for m in data["M_values"]))
    except (KeyError, TypeError) as exc:
        raise ModelError(f"'M_values' must be a list of integers: {exc}") from exc
    if len(M_values) < 3:
        raise ModelError(f"need >= 3 M values for slope fitting, got {len(M_values)}")
    if M_values[-1] < 10 * M_values[0]:
        raise ModelError(
            f"M values must span a decade: {M_values[0]}..{M_values[-1]}"
        )
    floor_M = (model.order + 2) * model.K
    if M_values[0] < floor_M:
        raise ModelError(
            f"smallest M={M_values[0]} below (d+2)K = {floor_M}"
        )

    precision = parse_precision(data.get("precision", "double"))
    if precision[0] == "extended" and model.K != 1:
        raise ModelError("extended-precision benchmarks support K=1 only")
    seed = int(data.get("seed", fallback_seed))
    if not 0 <= seed < 2**64:
        raise ModelError(f"seed must be a u64, got {seed}")

    if "bounds" in data and data["bounds"] is not None:
        b = data["bounds"]
        try:
            bounds = AprioriBounds(
                J=float(b["J"]), A=float(b["A"]),
                B=float(b["B"]), R=float(b["R"]),
            )
        except (KeyError, TypeError) as exc:
            raise ModelError(f"'bounds' needs numeric J, A, B, R: {exc}") from exc
    else:
        bounds = _default_bounds(model, noise_amp)

    return BenchmarkSpec(
        model=model, smooth=smooth, noise_amp=noise_amp,
        noise_decay=noise_decay, methods=methods, M_values=M_values,
        precision=precision, seed=seed, bounds=bounds,
    )


def _noisy_spectrum(bs: BenchmarkSpec, M: int) -> FourierSpectrum:
    # noise is a function of (seed, M) only, so every method at a given
    # M sees the identical perturbed data
    spec = synth_spectrum(bs.model, bs.smooth, M)
    if bs.noise_amp == 0.0:
        return spec
    rng = np.random.default_rng((bs.seed, M))
    ks = np.arange(1, M + 1, dtype=float)
    pert = (
        bs.noise_amp * ks ** (-bs.noise_decay)
        * np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, size=M))
    )
    coeffs = spec.coeffs.copy()
    coeffs[M + 1:] += pert
    coeffs[:M] += np.conj(pert)[::-1]
    return FourierSpectrum(M, coeffs, real_valued=spec.real_valued)


def _variant_estimates(bs: BenchmarkSpec, method: str, spec: FourierSpectrum):
    """Run one method variant; returns (list of (xi, mags), order recovered)."""
    d, K = bs.model.order, bs.model.K
    M = spec.M
    digits = bs.precision[1]

    if method == "full-decimated" and digits is None:
        cfg = ReconstructionConfig(d=d, K=K, bounds=bs.bounds)
        appr = full_reconstruct(spec, cfg)
        return [(j[0], j[1]) for j in appr.estimate.jumps], d

    priors = prony_order0(spec, K)
    M_eff = max(int(_USABLE_FRACTION * M), d + 2)
    stride = M_eff // (d + 2)
    out = []
    for prior in priors:
        if K > 1:
            width = min(0.9 * bs.bounds.J, np.pi / 2)
            degree = max(1, min(M - M_eff, stride - 2))
            bump = make_bump(
                prior, width, M, plateau_tol=_BENCH_BUMP_GATE, degree=degree
            )
            data = localize_jump(spec, bump)
        else:
            data = spec
        if method == "half-order":
            est = half_order_recover(data, d // 2, M_eff)
            out.append((est.xi, est.magnitudes))
            order = d // 2
        elif method == "eckhoff-original":
            est = recover_single_jump(data, d, None, "consecutive", M=M_eff)
            out.append((est.xi, est.magnitudes))
            order = d
        else:
            ref = half_order_recover(data, d // 2, M_eff)
            if digits is not None:
                est = recover_single_jump_mp(
                    data, d, ref.xi, "decimated", M=M_eff, digits=digits
                )
            else:
                est = recover_single_jump(data, d, ref.xi, "decimated", M=M_eff)
            out.append((est.xi, est.magnitudes))
            order = d
    return out, order


def _circ(a: float, b: float) -> float:
    r = abs(a - b) % (2.0 * np.pi)
    return min(r, 2.0 * np.pi - r)


def _bench_point(bs: BenchmarkSpec, method: str, M: int):
    """One CSV row: errors of `method` on the (seed, M) data realization."""
    d = bs.model.order
    spec = _noisy_spectrum(bs, M)
    ests, order = _variant_estimates(bs, method, spec)

    err_xi = 0.0
    err_a = [0.0] * (order + 1) + [float("nan")] * (d - order)
    matched = []
    for xi_true, mags_true in bs.model.jumps:
        best = min(ests, key=lambda e: _circ(e[0], xi_true))
        matched.append(best)
        err_xi = max(err_xi, _circ(best[0], xi_true))
        for l in range(order + 1):
            err_a[l] = max(err_a[l], abs(best[1][l] - mags_true[l]))

    est_model = JumpModel(
        order,
        tuple(
            (float(e[0]), tuple(float(np.real(a)) for a in e[1]))
            for e in sorted(set(matched), key=lambda e: e[0])
        ),
    )
    corrected = spec.coeffs - phi_coeff_array(est_model, M)
    appr = Approximant(
        est_model, FourierSpectrum(M, corrected, spec.real_valued), M
    )

    def truth(xs):
        vals = phi_eval(bs.model, xs)
        if bs.smooth is not None:
            vals = vals + bs.smooth.evaluator(xs)
        return vals

    err_sup = jump_free_error(
        appr, truth, bs.bounds.J / 4.0, true_jumps=bs.model.locations
    )
    ratio = math.log(err_xi) / math.log(M) if err_xi > 0 else float("nan")
    return [err_xi] + err_a + [err_sup, ratio]


def run_bench(bs: BenchmarkSpec) -> str:
    """Execute the sweep and render the full CSV text (rows + footer)."""
    d = bs.model.order
    pairs = [(m, M) for m in bs.methods for M in bs.M_values]

    def worker(pair):
        method, M = pair
        try:
            return pair, _bench_point(bs, method, M), None
        except (ModelError, NumericError, ValueError,
                np.linalg.LinAlgError) as exc:
            return pair, None, f"{type(exc).__name__}: {exc}"

    with ThreadPoolExecutor(max_workers=min(8, len(pairs))) as pool:
        results = dict()
        for pair, row, err in pool.map(worker, pairs):
            results[pair] = (row, err)

    ncols = d + 4
    header = (
        "method,M,err_xi,"
        + ",".join(f"err_a_{l}" for l in range(d + 1))
        + ",err_sup,ratio_logerr_logM"
    )
    lines = [header]
    failures = []
    for method, M in pairs:
        row, err = results[(method, M)]
        if err is not None:
            failures.append((method, M, err))
            row = [float("nan")] * ncols
        lines.append(f"{method},{M}," + ",".join(_fmt(v) for v in row))

    for method in bs.methods:
        for col, idx in (("err_xi", 0), ("err_sup", d + 2)):
            Ms, errs = [], []
            for M in bs.M_values:
                row, err = results[(method, M)]
                if err is None:
                    Ms.append(M)
                    errs.append(row[idx])
            if len(Ms) >= 2:
                slope, used = fit_loglog_slope(Ms, errs, floor=ERROR_FLOOR)
                for M, ok in zip(Ms, used):
                    if not ok:
                        lines.append(
                            f"# floor-excluded method={method} M={M} column={col}"
                        )
            else:
                slope, used = float("nan"), []
            lines.append(
                f"# slope method={method} column={col} value={_fmt(slope)} "
                f"rows_used={int(np.sum(used))}"
            )
    for method, M, err in failures:
        lines.append(f"# failed method={method} M={M} reason={err}")
    return "\n".join(lines) + "\n"


@main.command()
@click.argument("spec_path", type=click.Path())
@click.pass_context
@_guard
def bench(ctx, spec_path):
    """Convergence sweep over methods and M values; writes a CSV report."""
    out = _require_out(ctx)
    bs = load_bench_spec(spec_path, ctx.obj["seed"])
    text = run_bench(bs)
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    click.echo(
        f"wrote {len(bs.methods) * len(bs.M_values)} benchmark rows to {out}"
    )


@main.command()
@click.argument("model_path", type=click.Path())
@click.option("-M", "--modes", "modes", required=True, type=click.IntRange(min=1),
              help="Number of retained coefficients on each side of zero.")
@click.option("--bounds", "bounds_path", required=True, type=click.Path(),
              help="JSON file with the a-priori constants J, A, B, R.")
@click.pass_context
@_guard
def adversarial(ctx, model_path, modes, bounds_path):
    """Emit two admissible spectra no method can tell apart from M modes."""
    out_dir = _require_out(ctx)
    model = load_model(model_path)
    bounds = _load_bounds(bounds_path)
    g, h, delta = adversarial_pair(model, modes, bounds)
    os.makedirs(out_dir, exist_ok=True)
    save_spectrum(os.path.join(out_dir, "g.json"), g)
    save_spectrum(os.path.join(out_dir, "h.json"), h)

    shifted = shift_jumps(model, delta)
    diff = phi_coeff_array(model, modes) - phi_coeff_array(shifted, modes)
    ks = np.concatenate([np.arange(-modes, 0), np.arange(1, modes + 1)])
    vals = np.concatenate([diff[:modes], diff[modes + 1:]])
    max_scaled = float(
        np.max(np.abs(vals) * np.abs(ks).astype(float) ** (model.order + 2))
    )
    report = {
        "M": modes,
        "d": model.order,
        "delta": delta,
        "jump_shift": "every location moved by +delta",
        "max_coeff_discrepancy": float(np.max(np.abs(g.coeffs - h.coeffs))),
        "max_scaled_correction": max_scaled,
        "correction_budget_R": bounds.R,
        "within_budget": bool(max_scaled < bounds.R),
    }
    with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    click.echo(
        f"delta = {delta:.6e}; wrote g.json, h.json, report.json to {out_dir}"
    )


_BOUND_OPS = ("node-perturbation", "decimated-cap", "c9", "method-gap",
              "misspec-exponent")


def _eval_bound(query: dict) -> dict:
    if not isinstance(query, dict) or "op" not in query:
        raise ModelError("each bound query must be an object with an 'op' key")
    op = query["op"]
    params = {k: v for k, v in query.items() if k != "op"}
    try:
        if op == "node-perturbation":
            cfg = PronyConfig(
                K=int(params["K"]),
                multiplicities=tuple(params["multiplicities"]),
                t=int(params.get("t", 0)),
                sigma=int(params["sigma"]),
                node_gap=float(params["node_gap"]),
                eps=float(params["eps"]),
            )
            value = node_perturbation_bound(
                cfg, int(params.get("j", 0)), float(params["a_lead"])
            )
        elif op == "decimated-cap":
            value = decimated_cap(
                int(params["d"]), float(params["R"]),
                float(params["B"]), int(params["N"]),
            )
        elif op == "c9":
            value = c9_bound(int(params["d"]))
        elif op == "method-gap":
            value = method_gap_factor(int(params["d"]))
        elif op == "misspec-exponent":
            value = float(
                misspec_exponent(int(params["d_used"]), int(params["d_true"]))
            )
        else:
            raise ModelError(
                f"unknown bound op {op!r}; choose from {list(_BOUND_OPS)}"
            )
    except (KeyError, TypeError) as exc:
        raise ModelError(f"bound query {op!r} missing parameter: {exc}") from exc
    return {"bound": float(value), "inputs": {"op": op, **params}}


@main.command()
@click.argument("query_path", type=click.Path())
@click.pass_context
@_guard
def bounds(ctx, query_path):
    """Evaluate stability-bound calculators from a JSON query file.

    The file holds one query object {"op": ..., ...parameters} or a list
    of them; each answer is {"bound": value, "inputs": {...}}.
    """
    with open(query_path, "r", encoding="utf-8") as fh:
        q = json.load(fh)
    if isinstance(q, list):
        result = [_eval_bound(item) for item in q]
    else:
        result = _eval_bound(q)
    text = json.dumps(result, indent=2, sort_keys=True) + "\n"
    out = ctx.obj.get("out")
    if out is not None:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
        click.echo(f"wrote bound report to {out}")
    else:
        click.echo(text, nl=False)


if __name__ == "__main__":
    main()
