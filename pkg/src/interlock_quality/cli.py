"""Command-line entry point: ingest, clean, analyse and report.

Every subcommand reads the same INI-style config (sections ``input``,
``accuracy``, ``metrics``, ``sir``, ``completeness``, ``run``); flags given on
the command line win over the file. All outputs land in ``--out-dir``.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import logging
import math
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from ._validation import check_fraction, check_positive_int
from .accuracy import step1_exact_merge, step2_topo_merge
from .completeness import (
    PUBLISHED_COEFFICIENTS,
    coverage_by_size_class,
    estimate_completeness,
    estimate_rhat,
    expected_distribution,
    fit_c_relation,
    fit_indicator_model,
    impute_total_revenue_from_gdp,
    log_bins,
    observed_histogram,
)
from .diffusion import SirParams, sir_ensemble
from .exceptions import InsufficientData, InterlockError
from .graph import FirmGraph, export_edgelist, export_nodes, giant_component, project, read_graph
from .ingest import dump_table, load_table, parse_aggregates, parse_companies, parse_indicators
from .metrics import centralities, rank_correlation_curve, topology_summary

logger = logging.getLogger("interlock_quality")

STAGES = ("original", "step1", "step2")
ECONOMIC_VARS = ("revenue_usd", "employees", "market_cap_usd")


class ConfigError(InterlockError):
    pass


class StageError(InterlockError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


# -- configuration ----------------------------------------------------------------

def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(t) for t in text.replace(",", " ").split())


def _words(text: str) -> tuple[str, ...]:
    return tuple(t for t in text.replace(",", " ").split())


def _mapping(text: str) -> dict[str, str]:
    out = {}
    for item in text.replace("\n", ",").split(","):
        if not item.strip():
            continue
        key, sep, value = item.partition("=")
        if not sep or not key.strip() or not value.strip():
            raise ValueError(f"expected field=column pairs, got {item.strip()!r}")
        out[key.strip()] = value.strip()
    return out


def _opt_int(text: str):
    text = text.strip()
    return None if text.lower() in ("", "none", "exact") else int(text)


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass
class RunConfig:
    # input
    companies: str | None = None
    affiliations: str | None = None
    aggregates: str | None = None
    indicators: str | None = None
    log_indicators: tuple[str, ...] = ()
    country: str | None = None
    company_columns: dict = field(default_factory=dict)
    affiliation_columns: dict = field(default_factory=dict)
    aggregate_columns: dict = field(default_factory=dict)
    # accuracy
    jaccard_threshold: float = 0.5
    band: float = 0.8
    merge_policy: str = "sum"
    # metrics
    damping: float = 0.85
    distance_sample: int | None = None
    betweenness_sample: int | None = None
    economic: tuple[str, ...] = ECONOMIC_VARS
    k_grid: tuple[int, ...] = (50, 100, 200, 500)
    # sir
    beta: float = 0.5
    gamma: float = 0.3
    ensemble: int = 1000
    max_iter: int = 10_000
    dieoff_threshold: float = 0.01
    # completeness
    sigma: float = 2.0
    coefficients: str = "published"
    n_models: int = 1000
    subsample: float = 0.75
    core_size: int = 10
    svr_c: float = 1.0
    svr_epsilon: float = 0.1
    impute: bool = True
    gdp_indicator: str | None = None
    hist_low: float = 1e3
    hist_high: float = 1e11
    hist_bins: int = 16
    # run
    stages: tuple[str, ...] = STAGES
    seed: int = 0
    threads: int = 1
    out_dir: str = "out"
    lenient: bool = False
    base_dir: str = field(default=".", repr=False)
    cwd_paths: frozenset = field(default=frozenset(), repr=False)

    _SECTIONS = {
        "input": {"companies": str, "affiliations": str, "aggregates": str, "indicators": str,
                  "log_indicators": _words, "country": str, "company_columns": _mapping,
                  "affiliation_columns": _mapping, "aggregate_columns": _mapping},
        "accuracy": {"jaccard_threshold": float, "band": float, "merge_policy": str},
        "metrics": {"damping": float, "distance_sample": _opt_int, "betweenness_sample": _opt_int,
                    "economic": _words, "k_grid": _ints},
        "sir": {"beta": float, "gamma": float, "ensemble": int, "max_iter": int, "dieoff_threshold": float},
        "completeness": {"sigma": float, "coefficients": str, "n_models": int, "subsample": float,
                         "core_size": int, "svr_c": float, "svr_epsilon": float, "impute": _bool,
                         "gdp_indicator": str, "hist_low": float, "hist_high": float, "hist_bins": int},
        "run": {"stages": _words, "seed": int, "threads": int, "out_dir": str, "lenient": _bool},
    }

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        parser = configparser.ConfigParser(interpolation=None)
        try:
            parser.read(path, encoding="utf-8")
        except configparser.Error as exc:
            raise ConfigError(f"{path}: {exc}") from None
        values = {}
        for section in parser.sections():
            if section not in cls._SECTIONS:
                raise ConfigError(f"{path}: unknown section [{section}]")
            schema = cls._SECTIONS[section]
            for key, raw in parser.items(section):
                if key not in schema:
                    raise ConfigError(f"{path}: unknown key {key!r} in [{section}]")
                try:
                    values[key] = schema[key](raw.strip())
                except ValueError as exc:
                    raise ConfigError(f"{path}: [{section}] {key}: {exc}") from None
        cfg = cls(**values, base_dir=str(path.parent))
        return cfg

    def override(self, **kw) -> "RunConfig":
        for k, v in kw.items():
            if v is not None:
                setattr(self, k, v)
        return self

    def resolve(self, name: str) -> Path | None:
        value = getattr(self, name)
        if value is None:
            return None
        p = Path(value)
        if p.is_absolute() or name in self.cwd_paths:
            return p
        return Path(self.base_dir) / p

    def validate(self, required: tuple[str, ...] = ()) -> "RunConfig":
        for name in ("jaccard_threshold", "band", "subsample", "dieoff_threshold"):
            check_fraction(getattr(self, name), name)
        check_fraction(self.damping, "damping", high_closed=False)
        for name in ("ensemble", "max_iter", "n_models", "core_size", "hist_bins", "threads"):
            check_positive_int(getattr(self, name), name)
        if self.merge_policy not in ("sum", "max"):
            raise ConfigError(f"merge_policy must be 'sum' or 'max', got {self.merge_policy!r}")
        if self.coefficients not in ("published", "fit"):
            raise ConfigError(f"coefficients must be 'published' or 'fit', got {self.coefficients!r}")
        bad = [s for s in self.stages if s not in STAGES]
        if bad or len(set(self.stages)) != len(self.stages) or not self.stages:
            raise ConfigError(f"stages must be distinct names from {STAGES}, got {self.stages}")
        self.stages = tuple(s for s in STAGES if s in self.stages)
        if not self.k_grid or min(self.k_grid) < 3:
            raise ConfigError("k_grid values must be at least 3")
        if not (0 < self.hist_low < self.hist_high):
            raise ConfigError("hist_low must be positive and below hist_high")
        for name in required:
            if getattr(self, name) is None:
                raise ConfigError(f"no {name} file given (set [input] {name} or pass --{name})")
        for name in ("companies", "affiliations", "aggregates", "indicators"):
            p = self.resolve(name)
            if p is not None and not p.is_file():
                raise ConfigError(f"input file not found: {p}")
        return self

    def echo(self) -> dict:
        """Parameters that determine outputs; worker count and locations are left out."""
        skip = {"threads", "out_dir", "base_dir", "cwd_paths"}
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name not in skip}

    def sir_params(self, ensemble: int | None = None) -> SirParams:
        return SirParams(self.beta, self.gamma, ensemble or self.ensemble, self.max_iter, self.seed,
                         self.dieoff_threshold)


# -- output helpers -----------------------------------------------------------------

def _clean(value):
    if isinstance(value, (float, np.floating)):
        x = float(value)
        return float(f"{x:.12g}") if math.isfinite(x) else None
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.ndarray):
        return [_clean(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    return value


def write_json(obj, path) -> None:
    text = json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False)
    Path(path).write_text(text + "\n", encoding="utf-8")


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (float, np.floating)):
        return "" if math.isnan(x) else f"{float(x):.12g}"
    return str(x)


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


# -- stage runners -------------------------------------------------------------------

def _stage(name):
    def wrap(fn):
        def inner(*args, **kw):
            try:
                return fn(*args, **kw)
            except StageError:
                raise
            except (InterlockError, OSError, ValueError) as exc:
                raise StageError(name, exc) from exc
        return inner
    return wrap


def _load_table(cfg: RunConfig):
    return load_table(cfg.resolve("companies"), cfg.resolve("affiliations"), lenient=cfg.lenient,
                      company_mapping=cfg.company_columns, affiliation_mapping=cfg.affiliation_columns)


@_stage("ingest")
def ingest_graph(cfg: RunConfig) -> FirmGraph:
    table = _load_table(cfg)
    if table.rejected_lines or table.dangling_positions:
        logger.warning("ingest: %d rejected company lines, %d dangling positions",
                       table.rejected_lines, table.dangling_positions)
    g = project(table, cfg.country)
    return giant_component(g)


@_stage("clean")
def clean_stages(cfg: RunConfig, g: FirmGraph):
    """Graphs and merge reports for all three stages."""
    g1, r1 = step1_exact_merge(g, cfg.merge_policy)
    g2, r2 = step2_topo_merge(g1, cfg.jaccard_threshold, cfg.band, cfg.merge_policy)
    return {"original": g, "step1": g1, "step2": g2}, {"step1": r1, "step2": r2}


def _merge_summary(report) -> dict:
    d = report.to_dict()
    d.pop("clusters", None)
    d["merged_blocks"] = report.n_merged_blocks
    return d


def _load_graph_or_ingest(cfg: RunConfig, edges, nodes) -> FirmGraph:
    if edges:
        p = Path(edges)
        if not p.is_file():
            raise ConfigError(f"input file not found: {p}")
        if nodes and not Path(nodes).is_file():
            raise ConfigError(f"input file not found: {nodes}")
        try:
            return read_graph(p, nodes)
        except (InterlockError, OSError, ValueError) as exc:
            raise StageError("ingest", exc) from exc
    cfg.validate(("companies", "affiliations"))
    return ingest_graph(cfg)


def run_metrics(cfg: RunConfig, g: FirmGraph, stage: str, out: Path) -> dict:
    @_stage(f"metrics:{stage}")
    def body():
        summary = topology_summary(g, cfg.distance_sample, seed=cfg.seed)
        table = centralities(g, cfg.damping, cfg.betweenness_sample, seed=cfg.seed, threads=cfg.threads)
        cent_file = f"centrality_{stage}.csv"
        table.to_csv(out / cent_file)
        rows = []
        for var in cfg.economic:
            values = g.attribute(var)
            present = int((~np.isnan(values)).sum())
            ks = [k for k in cfg.k_grid if k <= present]
            if not ks:
                logger.info("%s: %s present on %d nodes, no rank correlation", stage, var, present)
                continue
            try:
                curve = rank_correlation_curve(g, table, var, ks)
            except InsufficientData as exc:
                logger.info("%s: %s", stage, exc)
                continue
            rows.extend(curve.rows())
        curve_file = f"rank_correlation_{stage}.csv"
        write_csv(out / curve_file, ["measure", "economic_var", "k", "rho"], rows)
        return {
            "topology": summary.to_dict(),
            "centrality_file": cent_file,
            "rank_correlation_file": curve_file,
            "rank_correlation": [{"measure": m, "economic_var": e, "k": k, "rho": r} for m, e, k, r in rows],
        }
    return body()


def run_sir(cfg: RunConfig, g: FirmGraph, stage: str, out: Path, ensemble: int | None = None) -> dict:
    @_stage(f"sir:{stage}")
    def body():
        s = sir_ensemble(g, cfg.sir_params(ensemble), threads=cfg.threads)
        traj = f"sir_{stage}_trajectory.csv"
        s.write_trajectory_csv(out / traj)
        finals = f"sir_{stage}_final_sizes.csv"
        write_csv(out / finals, ["run", "final_recovered_fraction"], enumerate(s.final_sizes))
        d = s.to_dict()
        d.pop("mean_S", None), d.pop("mean_I", None), d.pop("mean_R", None), d.pop("final_sizes", None)
        d["trajectory_file"] = traj
        d["final_sizes_file"] = finals
        return d
    return body()


@_stage("completeness")
def run_completeness(cfg: RunConfig, out: Path) -> dict:
    table = parse_companies(cfg.resolve("companies"), cfg.company_columns, lenient=cfg.lenient)
    aggregates = parse_aggregates(cfg.resolve("aggregates"), cfg.aggregate_columns)
    agg = {a.country: a for a in aggregates}
    indicators = parse_indicators(cfg.resolve("indicators"), cfg.log_indicators) if cfg.indicators else None

    revenues: dict[str, list[float]] = {}
    for comp in table.companies.values():
        if comp.revenue_usd is not None and comp.revenue_usd > 0:
            revenues.setdefault(comp.country, []).append(comp.revenue_usd)
    if cfg.country:
        revenues = {c: v for c, v in revenues.items() if c == cfg.country}

    r_hat: dict[str, tuple[float, str]] = {}
    for c, a in agg.items():
        if a.mean_revenue_usd is not None:
            r_hat[c] = (a.mean_revenue_usd, "aggregate")
    notes = {"log_base": "e", "sigma": cfg.sigma}

    if cfg.gdp_indicator and indicators is not None:
        def gdp(c):
            v = indicators.rows.get(c, {}).get(cfg.gdp_indicator)
            if v is None:
                return None
            return math.exp(v) if cfg.gdp_indicator in indicators.log_flags else v
        known = [(gdp(c), a.total_revenue_usd) for c, a in agg.items()
                 if a.total_revenue_usd is not None and gdp(c) is not None]
        for c, a in agg.items():
            if c not in r_hat and gdp(c) is not None and len(known) >= 3:
                imp = impute_total_revenue_from_gdp(known, gdp(c))
                r_hat[c] = (imp.total_revenue / a.firm_count, "gdp")
                notes.setdefault("gdp_fit", {"slope": imp.slope, "intercept": imp.intercept, "r2": imp.r2})

    model_info = None
    if indicators is not None:
        targets = {c: math.log(v) for c, (v, src) in r_hat.items() if src == "aggregate"}
        model = fit_indicator_model(indicators, targets, n_models=cfg.n_models, subsample=cfg.subsample,
                                    core_size=cfg.core_size, seed=cfg.seed, impute=cfg.impute,
                                    C=cfg.svr_c, epsilon=cfg.svr_epsilon, threads=cfg.threads)
        write_json(model.to_dict(), out / "indicator_model.json")
        model_info = "indicator_model.json"
        for c in indicators.countries:
            if c not in r_hat:
                est = estimate_rhat(model, indicators.rows[c])
                r_hat[c] = (est.r_hat_mean, "model-extrapolated" if est.extrapolated else "model")

    if cfg.coefficients == "fit":
        obs = []
        for c, (rh, src) in sorted(r_hat.items()):
            if src == "aggregate" and c in revenues and len(revenues[c]) <= agg[c].firm_count:
                obs.append((len(revenues[c]) / agg[c].firm_count, float(np.mean(revenues[c])), rh))
        coeffs = fit_c_relation(obs)
    else:
        coeffs = PUBLISHED_COEFFICIENTS

    bins = log_bins(cfg.hist_low, cfg.hist_high, cfg.hist_bins)
    hist_dir = out / "histograms"
    hist_dir.mkdir(exist_ok=True)
    rows, estimates = [], []
    for c in sorted(revenues):
        if c not in r_hat:
            logger.info("completeness: no R_hat source for %s, skipped", c)
            continue
        sample = np.asarray(revenues[c])
        rh, src = r_hat[c]
        est = estimate_completeness(coeffs, float(sample.mean()), rh, c, cfg.sigma)
        rows.append((c, est.r_obs_mean, est.r_hat_mean, est.mu, est.C, est.clamped, est.raw_C, src, len(sample)))
        d = est.to_dict()
        d.update(r_hat_source=src, n_observed=len(sample))
        estimates.append(d)
        obs_h = observed_histogram(sample, bins)
        exp_h = expected_distribution(est.mu, cfg.sigma, est.C, bins)
        write_csv(hist_dir / f"histogram_{c}.csv", ["bin_low", "bin_high", "observed", "expected"],
                  zip(bins[:-1], bins[1:], obs_h, exp_h))
    write_csv(out / "completeness.csv",
              ["country", "r_obs", "r_hat", "mu", "C", "clamped", "raw_C", "r_hat_source", "n_observed"], rows)

    coverage_file = None
    if any(a.size_class_counts is not None for a in aggregates):
        cov = coverage_by_size_class(table, aggregates)
        coverage_file = "coverage.csv"
        write_csv(out / coverage_file, ["country", "size_class", "coverage"],
                  [(c, band, v) for c, bands in cov.items() for band, v in bands.items()])

    return {
        "coefficients": {"source": cfg.coefficients, "a0": coeffs[0], "a1": coeffs[1], "a2": coeffs[2]},
        "estimates": estimates,
        "estimates_file": "completeness.csv",
        "histogram_dir": "histograms",
        "indicator_model_file": model_info,
        "coverage_file": coverage_file,
        "notes": notes,
    }


# -- subcommands ---------------------------------------------------------------------

def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_pipeline(cfg: RunConfig) -> dict:
    cfg.validate(("companies", "affiliations"))
    out = _out_dir(cfg)
    graphs, merges = clean_stages(cfg, ingest_graph(cfg))
    for name, rep in merges.items():
        write_json(rep.to_dict(), out / f"merge_{name}.json")
    report = {
        "version": __version__,
        "config": cfg.echo(),
        "stage_order": list(cfg.stages),
        "stages": {},
        "merge_reports": {name: dict(_merge_summary(rep), file=f"merge_{name}.json")
                          for name, rep in merges.items()},
    }
    for stage in cfg.stages:
        g = graphs[stage]
        entry = {"nodes": g.n_nodes, "edges": g.n_edges}
        entry.update(run_metrics(cfg, g, stage, out))
        entry["sir"] = run_sir(cfg, g, stage, out)
        report["stages"][stage] = entry
    if cfg.aggregates:
        report["completeness"] = run_completeness(cfg, out)
    write_json(report, out / "report.json")
    return report


def cmd_clean(cfg: RunConfig) -> dict:
    cfg.validate(("companies", "affiliations"))
    out = _out_dir(cfg)
    graphs, merges = clean_stages(cfg, ingest_graph(cfg))
    for stage, g in graphs.items():
        export_edgelist(g, out / f"{stage}_edges.tsv")
        export_nodes(g, out / f"{stage}_nodes.tsv")
    for name, rep in merges.items():
        write_json(rep.to_dict(), out / f"merge_{name}.json")
    summary = {"version": __version__, "config": cfg.echo(),
               "merge_reports": {n: _merge_summary(r) for n, r in merges.items()}}
    write_json(summary, out / "clean.json")
    return summary


def cmd_metrics(cfg: RunConfig, edges=None, nodes=None, stage: str = "graph") -> dict:
    g = _load_graph_or_ingest(cfg, edges, nodes)
    out = _out_dir(cfg)
    result = {"version": __version__, "nodes": g.n_nodes, "edges": g.n_edges}
    result.update(run_metrics(cfg, g, stage, out))
    write_json(result, out / f"metrics_{stage}.json")
    return result


def cmd_sir(cfg: RunConfig, edges=None, nodes=None, stage: str = "graph", ensemble=None) -> dict:
    g = _load_graph_or_ingest(cfg, edges, nodes)
    out = _out_dir(cfg)
    result = {"version": __version__, "nodes": g.n_nodes, "edges": g.n_edges,
              "sir": run_sir(cfg, g, stage, out, ensemble)}
    write_json(result, out / f"sir_{stage}.json")
    return result


def cmd_completeness(cfg: RunConfig) -> dict:
    cfg.validate(("companies", "aggregates"))
    out = _out_dir(cfg)
    result = {"version": __version__, "config": cfg.echo(), "completeness": run_completeness(cfg, out)}
    write_json(result, out / "completeness.json")
    return result


def cmd_export(cfg: RunConfig) -> dict:
    """Canonical CSV dumps of the ingested tables plus per-stage graph files."""
    cfg.validate(("companies", "affiliations"))
    out = _out_dir(cfg)
    try:
        table = _load_table(cfg)
        dump_table(table, out)
    except (InterlockError, OSError) as exc:
        raise StageError("ingest", exc) from exc
    graphs, _ = clean_stages(cfg, giant_component(project(table, cfg.country)))
    files = []
    for stage in cfg.stages:
        export_edgelist(graphs[stage], out / f"{stage}_edges.tsv")
        export_nodes(graphs[stage], out / f"{stage}_nodes.tsv")
        files += [f"{stage}_edges.tsv", f"{stage}_nodes.tsv"]
    return {"files": files}


def cmd_fixture(out_dir, kind: str, seed: int) -> dict:
    from .synthetic import make_country_panel, make_interlock_fixture, write_panel_files

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if kind == "interlock":
        fx = make_interlock_fixture(seed)
        c, a = dump_table(fx.table, out)
        truth = {"admin_groups": fx.admin_groups, "near_dup_groups": fx.near_dup_groups}
        write_json(truth, out / "truth.json")
        return {"companies": str(c), "affiliations": str(a)}
    countries = make_country_panel(seed=seed)
    return write_panel_files(countries, out, with_revenue_for=len(countries) * 3 // 4, seed=seed)


# -- argument parsing ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI config file with [input]/[accuracy]/[metrics]/[sir]/"
                                         "[completeness]/[run] sections")
    common.add_argument("--seed", type=int, help="base seed for all randomness")
    common.add_argument("--threads", type=int, help="worker cap; never changes results")
    common.add_argument("--out-dir", dest="out_dir", help="output directory")
    common.add_argument("--lenient", action="store_true", default=None,
                        help="skip duplicate company rows instead of failing")
    common.add_argument("--companies")
    common.add_argument("--affiliations")
    common.add_argument("--aggregates")
    common.add_argument("--indicators")
    common.add_argument("--country")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="interlock-quality",
                                description="Accuracy and completeness diagnostics for firm interlock networks.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    pp = sub.add_parser("pipeline", parents=[common], help="ingest, clean, analyse all stages, write report.json")
    pp.add_argument("--band", type=float)
    pc = sub.add_parser("clean", parents=[common], help="run both correction steps and export stage graphs")
    pc.add_argument("--band", type=float)
    for name, helptext in (("metrics", "topology, centralities and rank correlations"),
                           ("sir", "SIR ensemble on one graph")):
        sp = sub.add_parser(name, parents=[common], help=helptext)
        sp.add_argument("--edges", help="edge list (skips ingest)")
        sp.add_argument("--nodes", help="node table matching --edges")
        sp.add_argument("--stage", default="graph", help="label used in output file names")
        if name == "sir":
            sp.add_argument("--ensemble", type=int)
    sub.add_parser("completeness", parents=[common], help="per-country completeness and indicator model")
    sub.add_parser("export", parents=[common], help="canonical table dumps and per-stage graph files")
    fx = sub.add_parser("fixture", help="write a seeded synthetic input set")
    fx.add_argument("kind", choices=("interlock", "panel"))
    fx.add_argument("--out-dir", dest="out_dir", required=True)
    fx.add_argument("--seed", type=int, default=0)
    return p


def _config_from_args(args) -> RunConfig:
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    over = {k: getattr(args, k, None) for k in
            ("seed", "threads", "out_dir", "lenient", "companies", "affiliations", "aggregates",
             "indicators", "country", "band")}
    # paths given on the command line are relative to the working directory
    given = {k for k in ("companies", "affiliations", "aggregates", "indicators") if over[k] is not None}
    cfg.override(**over)
    cfg.cwd_paths = cfg.cwd_paths | given
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "fixture":
            files = cmd_fixture(args.out_dir, args.kind, args.seed)
            print(json.dumps({k: str(v) for k, v in files.items()}, sort_keys=True))
            return 0
        cfg = _config_from_args(args)
        if args.command == "pipeline":
            cmd_pipeline(cfg)
        elif args.command == "clean":
            cmd_clean(cfg)
        elif args.command == "metrics":
            cfg.validate()
            cmd_metrics(cfg, args.edges, args.nodes, args.stage)
        elif args.command == "sir":
            cfg.validate()
            cmd_sir(cfg, args.edges, args.nodes, args.stage, args.ensemble)
        elif args.command == "completeness":
            cmd_completeness(cfg)
        elif args.command == "export":
            cmd_export(cfg)
    except InterlockError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {cfg.out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
