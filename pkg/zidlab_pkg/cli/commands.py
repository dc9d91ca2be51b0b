# -*- coding: utf-8 -*-
"""
ZidLab — CLI command mixins.

One mixin per command family. Each `cmd_*` method reads `self.args` and
`self.config`, does the work, prints a short report on stdout and hands
files to `self.out`.
"""

import logging
from collections import defaultdict

import numpy as np
from scipy import stats

from ..discovery import run_discovery
from ..errors import NoWinningWalk, ValidationError, InsufficientTraces
from ..gridworld import load_map
from ..mdpgraph import (
    enumerate_graph, dump_graph, reward_density_exact, rewarded_edges, is_sparse,
    has_winning_walk, min_cut_ssb, classify_incentive, IncentiveReport, ZERO_INCENTIVE,
)
from ..resources import LEARNER_NOTE, SCORE_NOTE
from ..config import shaping_from_dict
from ..rollout import random_explore, random_traces, exact_exit_probability, rate_interval
from ..shaping import ShapingConfig
from ..tabular import LearnSchedule, learning_env, q_learning, delay_trend, beats_baseline, NO_SHAPING
from .output import line_chart, heatmap, box_plot
from .workers import run_jobs

log = logging.getLogger(__name__)

EXPLORE_COLUMNS = ["map", "variant", "horizon", "seed", "episodes", "exits", "deaths",
                   "truncations", "exit_rate"]
ORACLE_COLUMNS = ["map", "variant", "edges", "rewarded_edges", "density", "density_exact",
                  "horizon", "probability"]
CURVE_COLUMNS = ["condition", "seed", "train_step", "exit_rate"]
SUMMARY_COLUMNS = ["condition", "seeds", "mean_auc", "mean_final_exit_rate", "p_vs_baseline"]
HEATMAP_COLUMNS = ["n_agents", "x", "y", "score"]
TIMING_COLUMNS = ["n_agents", "run", "seconds_total", "seconds_per_cluster"]


def load_spec(path, variant=0):
    spec = load_map(path)
    if variant:
        if variant > spec.n_variants:
            raise ValidationError(f"{spec.name} defines variants up to M{spec.n_variants}")
        spec = spec.variant(variant)
    return spec


def condition_name(d):
    return NO_SHAPING if d is None else f"d={d}"


# ============================================================
# JOBS
# ============================================================
# Module-level and fed plain data, so a process pool can pickle them.


def explore_job(job):
    path, n, h, seed, step_budget = job
    log.info("explore M%d h=%d seed=%d", n, h, seed)
    return random_explore(load_spec(path, n), h, step_budget, seed)


def learn_job(job):
    path, d, seed, schedule, shaping, crossing_rule = job
    wrapper = None
    if d is not None:
        wrapper = ShapingConfig(d=d, gamma=schedule.gamma,
                                strict_paper_sign=shaping["strict_paper_sign"],
                                flush_on_truncation=shaping["flush_on_truncation"])
    env = learning_env(load_spec(path), schedule, wrapper, crossing_rule)
    log.info("learn %s seed=%d", condition_name(d), seed)
    return q_learning(env, schedule, seed)[1]


def discover_job(job):
    path, n, index, seed, cfg = job
    spec = load_spec(path)
    if n != spec.n_agents:
        spec = spec.with_agents(n)
    log.info("discover n=%d run=%d", n, index)
    return run_discovery(spec, cfg["total_steps"], cfg["interval"], seed + index,
                         horizon=cfg["horizon"], tolerance=cfg["tolerance"],
                         max_iterations=cfg["max_iterations"],
                         weighting=cfg["weighting"], local_graph=cfg["local_graph"])


# ============================================================
# GRAPH COMMANDS
# ============================================================


class AnalyzeMixin:
    """analyze / enumerate / explore."""

    def cmd_analyze(self):
        spec = load_spec(self.args.map, self.args.variant)
        g = enumerate_graph(spec, self.config["output"]["state_cap"])
        density = reward_density_exact(g)
        report = {
            "map": spec.name,
            "variant": spec.variant_index,
            "vertices": g.n_vertices,
            "edges": g.n_edges,
            "rewarded_edges": len(rewarded_edges(g)),
            "density": f"{density.numerator}/{density.denominator}",
            "density_decimal": float(density),
            "sparse": is_sparse(g),
            "winning_walk": has_winning_walk(g),
        }
        self.emit(report)
        if not report["winning_walk"]:
            self.out.write_json("analyze.json", report)
            raise NoWinningWalk(f"{spec.name}: no goal state is reachable from S0")

        cut = min_cut_ssb(g)
        incentive = self.measure_incentive(spec, g, cut)
        report.update(cut.to_dict(g))
        report["incentive"] = incentive.to_dict()
        self.emit({k: report[k] for k in ("cut_size", "is_zid", "max_cut_weight")})
        for record in report["cut_edges"]:
            self.emit_line(f"cut edge: {record['src']} --{record['action']}--> "
                           f"{record['dst']} (w={record['w']:g})")
        self.out.write_json("analyze.json", report)
        return report

    def measure_incentive(self, spec, g, cut):
        cfg = self.config["analyze"]
        if not cut.is_zid or cfg["trace_episodes"] == 0:
            return classify_incentive(g, cut)
        shaping = shaping_from_dict(self.config["shaping"]) if cfg["trace_shaping"] else None
        traces = random_traces(spec, cfg["trace_horizon"], cfg["trace_episodes"],
                               self.config["output"]["seed"], shaping)
        try:
            incentive = classify_incentive(g, cut, traces)
        except InsufficientTraces:
            log.warning("%s: none of %d traces crosses the cut; no delay measured",
                        spec.name, cfg["trace_episodes"])
            incentive = IncentiveReport(ZERO_INCENTIVE, {}, 0)
        self.emit_line(f"incentive: {incentive.kind} ({incentive.traversals} traversals)")
        return incentive

    def cmd_enumerate(self):
        spec = load_spec(self.args.map, self.args.variant)
        g = enumerate_graph(spec, self.config["output"]["state_cap"])
        self.emit({"vertices": g.n_vertices, "edges": g.n_edges,
                   "goals": len(g.goals), "deaths": len(g.deaths)})
        self.out.write_json("graph.json", dump_graph(g))
        return g

    def cmd_explore(self):
        cfg = self.config["explore"]
        spec = load_spec(self.args.map, self.args.variant)
        result = random_explore(spec, self.args.horizon, cfg["step_budget"],
                                self.config["output"]["seed"])
        self.emit(result.to_row())
        self.write_rows("explore", [result.to_row()], EXPLORE_COLUMNS)
        return result


# ============================================================
# EXPERIMENTS
# ============================================================


class ExperimentMixin:
    """density-experiment / delay-experiment."""

    def cmd_density_experiment(self):
        cfg = self.config["explore"]
        base = load_spec(cfg["map"])
        variants = sorted(cfg["variants"])
        horizons = sorted(cfg["horizons"])

        oracle_rows = []
        densities = {}
        for n in variants:
            spec = base.variant(n)
            g = enumerate_graph(spec, self.config["output"]["state_cap"])
            density = reward_density_exact(g)
            densities[n] = float(density)
            table = exact_exit_probability(g, max(horizons))
            for h in horizons:
                oracle_rows.append({
                    "map": spec.name, "variant": n, "edges": g.n_edges,
                    "rewarded_edges": len(rewarded_edges(g)),
                    "density": float(density),
                    "density_exact": f"{density.numerator}/{density.denominator}",
                    "horizon": h, "probability": table.at(h),
                })
        self.write_rows("density_oracle", oracle_rows, ORACLE_COLUMNS)
        for row in oracle_rows:
            self.emit_line(f"M{row['variant']} D={row['density_exact']} h={row['horizon']} "
                           f"P(exit)={row['probability']:.6f}")
        if self.args.oracle_only:
            return oracle_rows, []

        jobs = [(cfg["map"], n, h, seed, cfg["step_budget"])
                for n in variants for h in horizons for seed in cfg["seeds"]]
        results = run_jobs(explore_job, jobs, self.threads, self.pool)
        rows = [r.to_row() for r in results]
        self.write_rows("density_runs", rows, EXPLORE_COLUMNS)

        if self.wants_svg:
            series, bands = {}, {}
            for h in horizons:
                xs, ys, lo, hi = [], [], [], []
                for n in variants:
                    cell = [r for r in results if r.variant == n and r.horizon == h]
                    rates = [r.exit_rate for r in cell]
                    ci = [rate_interval(r) for r in cell]
                    xs.append(densities[n])
                    ys.append(float(np.mean(rates)))
                    lo.append(float(np.mean([c[0] for c in ci])))
                    hi.append(float(np.mean([c[1] for c in ci])))
                series[f"h={h}"] = (xs, ys)
                bands[f"h={h}"] = (lo, hi)
            fig = line_chart(series, "reward density", "exit rate",
                             f"{base.name}: random exploration", bands)
            self.out.write_svg("density.svg", fig)
        return oracle_rows, rows

    def cmd_delay_experiment(self):
        cfg = self.config["learning"]
        spec = load_spec(cfg["map"])
        schedule = LearnSchedule(
            total_steps=cfg["total_steps"],
            epsilon_anneal_steps=min(cfg["epsilon_anneal_steps"], cfg["total_steps"]),
            gamma=cfg["gamma"],
            learning_rate=cfg["learning_rate"],
            eval_interval=cfg["eval_interval"],
            eval_episodes=cfg["eval_episodes"],
            horizon=cfg["horizon"],
        )
        shaping = self.config["shaping"]
        conditions = ([None] if cfg["baseline"] else []) + sorted(cfg["delays"])
        jobs = [(cfg["map"], d, seed, schedule, shaping, cfg["crossing_rule"])
                for d in conditions for seed in cfg["seeds"]]
        curves = run_jobs(learn_job, jobs, self.threads, self.pool)
        rows = []
        by_condition = defaultdict(list)
        for (_, d, seed, *_), curve in zip(jobs, curves):
            by_condition[d].append(curve)
            for step, rate in zip(curve.steps, curve.exit_rates):
                rows.append({"condition": condition_name(d), "seed": seed,
                             "train_step": step, "exit_rate": rate})
        self.write_rows("delay_curves", rows, CURVE_COLUMNS)

        summary = []
        baseline = [c.final_exit_rate for c in by_condition.get(None, [])]
        for d in conditions:
            finals = [c.final_exit_rate for c in by_condition[d]]
            p = None
            if d is not None and len(baseline) > 1 and len(finals) > 1:
                p = beats_baseline(finals, baseline)
            summary.append({
                "condition": condition_name(d),
                "seeds": len(finals),
                "mean_auc": float(np.mean([c.auc() for c in by_condition[d]])),
                "mean_final_exit_rate": float(np.mean(finals)),
                "p_vs_baseline": p,
            })
        self.write_rows("delay_summary", summary, SUMMARY_COLUMNS)
        for row in summary:
            self.emit_line(f"{row['condition']}: auc={row['mean_auc']:.4f} "
                           f"final={row['mean_final_exit_rate']:.3f}")
        delays = {d: [c.auc() for c in by_condition[d]] for d in conditions if d is not None}
        if len(delays) > 1 and len(cfg["seeds"]) > 1:
            rho, p = delay_trend(delays)
            self.emit_line(f"spearman(auc, d) = {rho:.3f} (one-sided p = {p:.4f})")

        if self.wants_svg:
            series, bands = {}, {}
            for d in conditions:
                group = by_condition[d]
                rates = np.array([c.exit_rates for c in group])
                mean = rates.mean(axis=0)
                if len(group) > 1:
                    half = stats.sem(rates, axis=0) * stats.t.ppf(0.975, len(group) - 1)
                else:
                    half = np.zeros_like(mean)
                series[condition_name(d)] = (list(group[0].steps), mean.tolist())
                bands[condition_name(d)] = ((mean - half).tolist(), (mean + half).tolist())
            fig = line_chart(series, "training steps", "exit rate",
                             f"{spec.name}: {LEARNER_NOTE}", bands)
            self.out.write_svg("delay.svg", fig)
        return summary


# ============================================================
# DISCOVERY
# ============================================================


class DiscoverMixin:
    """discover."""

    def cmd_discover(self):
        cfg = self.config["discovery"]
        base = load_spec(cfg["map"])
        seed = self.config["output"]["seed"]
        jobs = [(cfg["map"], n, index, seed, cfg)
                for n in sorted(cfg["agents"]) for index in range(cfg["runs"])]
        results = run_jobs(discover_job, jobs, self.threads, self.pool)
        heat_rows, timing_rows = [], []
        timings = defaultdict(list)
        for (_, n, index, *_), (scores, timing) in zip(jobs, results):
            timing_rows.append(timing.to_row(index))
            timings[n].append(timing.seconds_total)
            if index:
                continue
            for x in range(base.width):
                for y in range(base.height):
                    heat_rows.append({"n_agents": n, "x": x, "y": y,
                                      "score": float(scores.vertex_scores[x, y])})
            top = scores.ranking()[0]
            self.emit_line(f"n={n}: top cell {top} score={scores.vertex_scores[top]:g} "
                           f"({timing.rounds} rounds, {timing.seconds_total:.3f}s)")
            if self.wants_svg:
                self.out.write_svg(f"heatmap_n{n}.svg",
                                   heatmap(scores.vertex_scores, f"{base.name}, {n} agent(s)"))
        self.write_rows("discovery_heatmap", heat_rows, HEATMAP_COLUMNS)
        self.write_rows("discovery_timing", timing_rows, TIMING_COLUMNS)
        if self.wants_svg:
            fig = box_plot(dict(timings), "agents", "clustering seconds",
                           f"{base.name}: {SCORE_NOTE}")
            self.out.write_svg("discovery_timing.svg", fig)
        return results
