"""Genetic search over role weights, maximizing MAP on a training topic set."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Sequence

import numpy as np

from .corpus_index import CollectionIndex
from .eval_harness import DEFAULT_DEPTH, Qrels
from .retrieval import RoleWeights, SmoothingConfig, TopicTable, build_table

log = logging.getLogger(__name__)

# gene layout: CoI, DC, RC, SC, EC; SC is pinned to zero
N_GENES = 5
SC_GENE = 3
EVOLVING = (0, 1, 2, 4)


class GAConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GAConfig:
    population_size: int = 200
    max_iterations: int = 100
    # per-generation operator event counts; set to None to use the rates instead
    crossover_events: int | None = 1000
    mutation_events: int | None = 10
    crossover_rate: float = 0.9
    mutation_rate: float = 0.1
    mutation_sigma: float = 0.1
    elitism_count: int = 1
    tournament_size: int = 2
    boost_threshold: float = 0.5
    boost: float = 1.5
    patience: int | None = None
    rng_seed: int = 0

    def __post_init__(self):
        if self.population_size < 2:
            raise GAConfigError("population_size must be >= 2")
        if self.max_iterations < 1:
            raise GAConfigError("max_iterations must be >= 1")
        for name in ("crossover_rate", "mutation_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise GAConfigError(f"{name} must lie in [0, 1]")
        if not 1 <= self.elitism_count < self.population_size:
            raise GAConfigError("elitism_count must be in [1, population_size)")
        for name in ("crossover_events", "mutation_events"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise GAConfigError(f"{name} must be >= 0")
        if self.tournament_size < 1 or self.mutation_sigma < 0:
            raise GAConfigError("invalid tournament size or mutation sigma")


@dataclass
class Chromosome:
    genes: tuple[float, ...]
    fitness: float | None = None

    def __post_init__(self):
        g = [min(max(float(x), 0.0), 1.0) for x in self.genes]
        if len(g) != N_GENES:
            raise GAConfigError(f"expected {N_GENES} genes")
        g[SC_GENE] = 0.0
        self.genes = tuple(g)

    @property
    def weights(self) -> RoleWeights:
        return RoleWeights.from_genes(self.genes)

    def selection_weight(self, cfg: GAConfig) -> float:
        """Fitness as seen by selection; strong solutions get a boost."""
        f = self.fitness or 0.0
        return f * cfg.boost if f > cfg.boost_threshold else f


def init_population(cfg: GAConfig) -> list[Chromosome]:
    rng = np.random.default_rng(cfg.rng_seed)
    return _random_population(cfg, rng)


def _random_population(cfg: GAConfig, rng: np.random.Generator) -> list[Chromosome]:
    pop = []
    for _ in range(cfg.population_size):
        g = [0.0] * N_GENES
        for i in EVOLVING:
            g[i] = float(rng.uniform(0.0, 1.0))
        pop.append(Chromosome(tuple(g)))
    return pop


# -- fitness ------------------------------------------------------------------------------


@dataclass
class TopicEval:
    topic: str
    table: TopicTable
    relevant: np.ndarray  # bool per candidate
    n_relevant: int


@dataclass
class EvalContext:
    """Pre-scored training topics; fitness only re-combines and re-ranks."""

    topics: list[TopicEval]
    depth: int = DEFAULT_DEPTH

    @classmethod
    def build(cls, queries: Mapping[str, object], qrels: Qrels, index: CollectionIndex,
              cfg: SmoothingConfig = SmoothingConfig(), depth: int = DEFAULT_DEPTH,
              over: str = "expanded") -> "EvalContext":
        topics = []
        for topic in sorted(queries, key=lambda t: (not t.isdigit(), int(t) if t.isdigit() else 0, t)):
            rel = qrels.relevant(topic)
            if not rel:
                continue
            table = build_table(queries[topic], index, cfg, over)
            mask = np.array([d in rel for d in table.doc_ids], dtype=bool)
            topics.append(TopicEval(topic, table, mask, len(rel)))
        if not topics:
            raise ValueError("no training topics with relevant documents")
        return cls(topics, depth)

    def subset(self, topic: str) -> "EvalContext":
        return EvalContext([t for t in self.topics if t.topic == topic], self.depth)

    def average_precisions(self, weights: RoleWeights | Sequence[float]) -> dict[str, float]:
        out = {}
        for te in self.topics:
            order, _, _ = te.table.rank(weights)
            hits_at = np.flatnonzero(te.relevant[order[: self.depth]]).tolist()
            total = 0.0
            for k, pos in enumerate(hits_at, 1):
                total += k / (pos + 1)
            out[te.topic] = total / te.n_relevant
        return out

    def map(self, weights: RoleWeights | Sequence[float]) -> float:
        aps = list(self.average_precisions(weights).values())
        return float(np.float64(sum(aps)) / len(aps)) if aps else 0.0


def fitness(ch: Chromosome, ctx: EvalContext) -> float:
    """MAP of the chromosome's weights over the training topics."""
    if not ctx.topics:
        raise ValueError("empty topic set")
    return ctx.map(ch.weights)


# -- evolution ------------------------------------------------------------------------------


@dataclass(frozen=True)
class GenerationStats:
    generation: int
    best: float
    mean: float
    best_genes: tuple[float, ...]

    def line(self) -> str:
        genes = "\t".join(f"{self.best_genes[i]:.6f}" for i in EVOLVING)
        return f"{self.generation}\t{self.best:.6f}\t{self.mean:.6f}\t{genes}"


@dataclass
class GAResult:
    best: Chromosome
    history: list[GenerationStats] = field(default_factory=list)

    @property
    def weights(self) -> RoleWeights:
        return self.best.weights

    @property
    def best_fitness(self) -> float:
        return float(self.best.fitness or 0.0)

    def report(self) -> str:
        return "".join(h.line() + "\n" for h in self.history)


FitnessFn = Callable[[RoleWeights], float]


def _tournament(pop: list[Chromosome], cfg: GAConfig, rng: np.random.Generator) -> Chromosome:
    idx = rng.integers(0, len(pop), size=cfg.tournament_size)
    best = min(idx.tolist(), key=lambda i: (-pop[i].selection_weight(cfg), i))
    return pop[best]


def _crossover(a: list[float], b: list[float], rng: np.random.Generator) -> None:
    cut = int(rng.integers(1, len(EVOLVING)))
    for gi in EVOLVING[cut:]:
        a[gi], b[gi] = b[gi], a[gi]


def _mutate_gene(g: list[float], gi: int, cfg: GAConfig, rng: np.random.Generator) -> None:
    g[gi] = min(max(g[gi] + float(rng.normal(0.0, cfg.mutation_sigma)), 0.0), 1.0)


def _breed(pop: list[Chromosome], cfg: GAConfig, rng: np.random.Generator) -> list[Chromosome]:
    ranked = sorted(range(len(pop)), key=lambda i: (-(pop[i].fitness or 0.0), i))
    elites = [Chromosome(pop[i].genes, pop[i].fitness) for i in ranked[: cfg.elitism_count]]
    kids = [list(_tournament(pop, cfg, rng).genes)
            for _ in range(cfg.population_size - cfg.elitism_count)]
    if len(kids) >= 2:
        if cfg.crossover_events is not None:
            for _ in range(cfg.crossover_events):
                i, j = rng.choice(len(kids), size=2, replace=False).tolist()
                _crossover(kids[i], kids[j], rng)
        else:
            for i in range(0, len(kids) - 1, 2):
                if rng.random() < cfg.crossover_rate:
                    _crossover(kids[i], kids[i + 1], rng)
    if kids:
        if cfg.mutation_events is not None:
            for _ in range(cfg.mutation_events):
                i = int(rng.integers(0, len(kids)))
                _mutate_gene(kids[i], EVOLVING[int(rng.integers(0, len(EVOLVING)))], cfg, rng)
        else:
            for g in kids:
                for gi in EVOLVING:
                    if rng.random() < cfg.mutation_rate:
                        _mutate_gene(g, gi, cfg, rng)
    return elites + [Chromosome(tuple(g)) for g in kids]


def evolve(cfg: GAConfig, ctx: EvalContext | FitnessFn,
           initial_population: Sequence[Chromosome] | None = None) -> GAResult:
    """Tournament selection, single-point crossover over the four free genes,
    Gaussian mutation and elitism, for ``max_iterations`` generations."""
    score: FitnessFn = ctx.map if isinstance(ctx, EvalContext) else ctx
    if isinstance(ctx, EvalContext) and not ctx.topics:
        raise ValueError("empty topic set")
    rng = np.random.default_rng(cfg.rng_seed)
    if initial_population is None:
        pop = _random_population(cfg, rng)
    else:
        pop = [Chromosome(c.genes) for c in initial_population]
        if len(pop) != cfg.population_size:
            raise GAConfigError("initial population size does not match the config")
    cache: dict[tuple[float, ...], float] = {}
    best: Chromosome | None = None
    history: list[GenerationStats] = []
    stagnant = 0
    for gen in range(cfg.max_iterations):
        for ch in pop:
            if ch.fitness is None:
                if ch.genes not in cache:
                    cache[ch.genes] = float(score(ch.weights))
                ch.fitness = cache[ch.genes]
        gen_best = min(pop, key=lambda c: -(c.fitness or 0.0))
        if best is None or gen_best.fitness > best.fitness:
            best = Chromosome(gen_best.genes, gen_best.fitness)
            stagnant = 0
        else:
            stagnant += 1
        mean = float(np.mean([c.fitness for c in pop]))
        history.append(GenerationStats(gen, float(gen_best.fitness), mean, gen_best.genes))
        log.debug("generation %d best %.6f mean %.6f", gen, gen_best.fitness, mean)
        if gen == cfg.max_iterations - 1:
            break
        if cfg.patience is not None and stagnant >= cfg.patience:
            break
        pop = _breed(pop, cfg, rng)
    assert best is not None
    return GAResult(best, history)


def evolve_per_topic(cfg: GAConfig, ctx: EvalContext) -> dict[str, GAResult]:
    """Independent GA run per training topic."""
    return {te.topic: evolve(cfg, ctx.subset(te.topic)) for te in ctx.topics}


def grid_search(ctx: EvalContext | FitnessFn, levels: Sequence[float] = (0.0, 0.5, 1.0)
                ) -> tuple[float, RoleWeights]:
    """Exhaustive search over ``levels``^4 for the free genes."""
    score: FitnessFn = ctx.map if isinstance(ctx, EvalContext) else ctx
    best_val, best_w = -1.0, RoleWeights.uniform()
    for coi, dc, rc, ec in itertools.product(levels, repeat=4):
        w = RoleWeights(coi, dc, rc, 0.0, ec)
        v = score(w)
        if v > best_val:
            best_val, best_w = v, w
    return best_val, best_w
