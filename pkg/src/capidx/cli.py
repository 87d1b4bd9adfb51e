"""Command-line client for the capability-index service.

Every subcommand is a thin wrapper that builds a request, sends it to the
FastAPI app (in-process by default, or to a remote server via --server),
and prints the JSON response.  Exit codes: 0 ok, 1 domain/numeric error,
2 usage error.
"""

from __future__ import annotations

import asyncio
import csv
import io
import json
import sys
from pathlib import Path

import click
import httpx

from . import __version__


def _post(path: str, payload: dict, server: str | None) -> dict:
    if server:
        resp = httpx.post(server.rstrip("/") + path, json=payload, timeout=600.0)
    else:
        from .service import app

        async def _call() -> httpx.Response:
            transport = httpx.ASGITransport(app=app)
            async with httpx.AsyncClient(
                transport=transport, base_url="http://capidx.local", timeout=600.0
            ) as client:
                return await client.post(path, json=payload)

        resp = asyncio.run(_call())
    if resp.status_code >= 400:
        try:
            detail = resp.json().get("detail", resp.text)
        except ValueError:
            detail = resp.text
        raise click.ClickException(str(detail))
    return resp.json()


def _emit(payload: dict) -> None:
    click.echo(json.dumps(payload, indent=2, sort_keys=True))


def _read_sample(path: str, column: str | None) -> list[float]:
    text = Path(path).read_text()
    values: list[float] = []
    try:
        if column is not None:
            for row in csv.DictReader(io.StringIO(text)):
                cell = row.get(column)
                if cell is None:
                    raise click.ClickException(f"column {column!r} not found in {path}")
                if cell.strip():
                    values.append(float(cell))
        else:
            for line in text.splitlines():
                line = line.split("#", 1)[0].strip()
                if line:
                    values.append(float(line))
    except ValueError as exc:
        raise click.ClickException(f"unparseable data in {path}: {exc}") from exc
    if not values:
        raise click.ClickException(f"no data found in {path}")
    return values


def _side_options(fn):
    fn = click.option("--upper", type=float, default=None,
                      help="Upper tolerance limit U.")(fn)
    fn = click.option("--lower", type=float, default=None,
                      help="Lower tolerance limit L.")(fn)
    fn = click.option("--target", type=float, required=True, help="Target T.")(fn)
    return fn


def _resolve_side(upper: float | None, lower: float | None) -> tuple[str, float]:
    if (upper is None) == (lower is None):
        raise click.UsageError("specify exactly one of --upper or --lower")
    return ("upper", upper) if upper is not None else ("lower", lower)


_server_option = click.option(
    "--server", default=None, metavar="URL",
    help="Send requests to a running capidx server instead of in-process.",
)


@click.group()
@click.version_option(__version__)
def main() -> None:
    """Capability indices for unilateral tolerances."""


@main.command()
@_side_options
@click.option("--k", type=float, default=1.0, show_default=True,
              help="Asymmetry ratio (drift away from the limit is k times "
                   "less serious).")
@click.option("--mu", type=float, default=None, help="Process mean.")
@click.option("--sigma", type=float, default=None, help="Process std dev.")
@click.option("--median", type=float, default=None,
              help="Process median (percentile-based indices).")
@click.option("--lower-pct", type=float, default=None,
              help="0.135th percentile (with --median).")
@click.option("--upper-pct", type=float, default=None,
              help="99.865th percentile (with --median).")
@click.option("--u", "u_", type=float, default=None, help="Explicit u parameter.")
@click.option("--v", "v_", type=float, default=None, help="Explicit v parameter.")
@click.option("--clamp", is_flag=True, help="Floor indices at zero (Kane).")
@click.option("--legacy", "include_legacy", is_flag=True,
              help="Include the legacy one-sided indices.")
@_server_option
def index(upper, lower, target, k, mu, sigma, median, lower_pct, upper_pct,
          u_, v_, clamp, include_legacy, server):
    """Compute the four unilateral indices.

    Supply either the process moments (--mu, --sigma) or a percentile
    summary (--median, --lower-pct, --upper-pct).
    """
    side, limit = _resolve_side(upper, lower)
    has_moments = mu is not None and sigma is not None
    has_percentiles = (
        median is not None and lower_pct is not None and upper_pct is not None
    )
    if has_moments == has_percentiles:
        raise click.UsageError(
            "supply either --mu/--sigma or --median/--lower-pct/--upper-pct"
        )
    payload = {
        "side": side, "limit": limit, "target": target, "k": k,
        "clamp": clamp, "include_legacy": include_legacy,
    }
    if has_moments:
        payload.update(mu=mu, sigma=sigma)
    else:
        payload.update(median=median, lower_pct=lower_pct, upper_pct=upper_pct)
    if u_ is not None:
        payload["u"] = u_
    if v_ is not None:
        payload["v"] = v_
    _emit(_post("/index", payload, server))


@main.command()
@click.argument("datafile", type=click.Path(exists=True, dir_okay=False))
@_side_options
@click.option("--k", "k_values", type=float, multiple=True, default=(1.0,),
              show_default=True, help="Asymmetry ratio; repeatable.")
@click.option("--variant", type=click.Choice(["n", "n-1"]), default="n-1",
              show_default=True, help="Variance divisor for the normal path.")
@click.option("--method", type=click.Choice(["shore", "empirical"]),
              default="shore", show_default=True,
              help="Percentile method for the non-normal path.")
@click.option("--alpha", type=float, default=0.05, show_default=True,
              help="Normality-screen rejection level.")
@click.option("--force-nonnormal", is_flag=True,
              help="Skip the normality screen and use percentiles.")
@click.option("--clamp", is_flag=True, help="Floor indices at zero.")
@click.option("--column", default=None, help="CSV column to read.")
@_server_option
def estimate(datafile, upper, lower, target, k_values, variant, method, alpha,
             force_nonnormal, clamp, column, server):
    """Estimate capability indices from a data file.

    The file holds one number per line (# comments allowed), or a CSV
    column selected with --column.  A chi-square screen decides between
    the normal-theory and percentile-based index formulas.
    """
    side, limit = _resolve_side(upper, lower)
    payload = {
        "sample": _read_sample(datafile, column),
        "side": side, "limit": limit, "target": target,
        "k_values": list(k_values), "variant": variant, "method": method,
        "alpha": alpha, "force_nonnormal": force_nonnormal, "clamp": clamp,
    }
    _emit(_post("/estimate", payload, server))


@main.command("shore-fit")
@click.argument("datafile", type=click.Path(exists=True, dir_okay=False))
@click.option("--column", default=None, help="CSV column to read.")
@_server_option
def shore_fit_cmd(datafile, column, server):
    """Fit Shore's quantile coefficients to a data file."""
    payload = {"sample": _read_sample(datafile, column)}
    _emit(_post("/shore-fit", payload, server))


def _estimator_options(fn):
    fn = click.option("--index", "index_name",
                      type=click.Choice(["cp", "cpk", "cpm", "cpmk"]),
                      default=None, help="Named index couple.")(fn)
    fn = click.option("--u", "u_", type=float, default=None)(fn)
    fn = click.option("--v", "v_", type=float, default=None)(fn)
    fn = click.option("--n", type=int, required=True, help="Sample size.")(fn)
    fn = click.option("--mu", type=float, required=True)(fn)
    fn = click.option("--sigma", type=float, required=True)(fn)
    fn = click.option("--k", type=float, default=1.0, show_default=True)(fn)
    fn = click.option("--variant", type=click.Choice(["n", "n-1"]), default="n",
                      show_default=True)(fn)
    return fn


def _estimator_payload(side, limit, target, k, n, mu, sigma, variant,
                       index_name, u_, v_) -> dict:
    payload = {
        "side": side, "limit": limit, "target": target, "k": k,
        "n": n, "mu": mu, "sigma": sigma, "variant": variant,
    }
    if index_name is not None:
        payload["index"] = index_name
    else:
        if u_ is None and v_ is None:
            raise click.UsageError("specify --index or --u/--v")
        payload["u"] = u_ or 0.0
        payload["v"] = v_ or 0.0
    return payload


@main.command()
@_side_options
@_estimator_options
@click.option("--r", "r_", type=int, default=1, show_default=True,
              help="Moment order.")
@_server_option
def moments(upper, lower, target, index_name, u_, v_, n, mu, sigma, k,
            variant, r_, server):
    """Exact r-th moment of an index estimator."""
    side, limit = _resolve_side(upper, lower)
    payload = _estimator_payload(side, limit, target, k, n, mu, sigma,
                                 variant, index_name, u_, v_)
    payload["r"] = r_
    _emit(_post("/moments", payload, server))


@main.command()
@_side_options
@_estimator_options
@click.option("--x-min", type=float, required=True)
@click.option("--x-max", type=float, required=True)
@click.option("--points", type=int, default=201, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Write the curve as CSV to this file.")
@_server_option
def density(upper, lower, target, index_name, u_, v_, n, mu, sigma, k,
            variant, x_min, x_max, points, out, server):
    """Sampling density of an index estimator on an x grid."""
    side, limit = _resolve_side(upper, lower)
    payload = _estimator_payload(side, limit, target, k, n, mu, sigma,
                                 variant, index_name, u_, v_)
    payload.update(x_min=x_min, x_max=x_max, points=points)
    resp = _post("/density", payload, server)
    if out:
        from .estimators import DensityCurve

        curve = DensityCurve(
            xs=resp["xs"], fs=resp["fs"],
            domain_lo=resp["domain_lo"], domain_hi=resp["domain_hi"],
            meta=resp["meta"],
        )
        curve.to_csv(out)
        click.echo(f"wrote {len(resp['xs'])} points to {out}")
    else:
        _emit(resp)


@main.command()
@_side_options
@_estimator_options
@click.option("--replications", type=int, default=100000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--check", is_flag=True,
              help="Compare against the analytic moments (3-sigma verdict).")
@click.option("--bins", type=int, default=200, show_default=True)
@_server_option
def simulate(upper, lower, target, index_name, u_, v_, n, mu, sigma, k,
             variant, replications, seed, check, bins, server):
    """Monte Carlo simulation of an index estimator."""
    side, limit = _resolve_side(upper, lower)
    payload = _estimator_payload(side, limit, target, k, n, mu, sigma,
                                 variant, index_name, u_, v_)
    payload.update(replications=replications, seed=seed, check=check, bins=bins)
    _emit(_post("/simulate", payload, server))


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run("capidx.service:app", host=host, port=port)


if __name__ == "__main__":
    sys.exit(main())
