"""Two-level genetic-algorithm synthesis driver.

The outer GA searches compensator coefficients to shrink the augmented
set's central-plant maximum nu-gap (J1).  Whenever a candidate beats the
running bound J1bar, the inner GA searches desired eigenvalues and
constrained eigenvector entries for a static output-feedback gain whose
closed-loop infinity norm J2 drops below 1/J1bar; that gain then
simultaneously stabilizes every plant in the augmented set with a
quantified nu-gap robustness ball around the central plant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .eigassign import (
    EigTarget,
    allowable_subspace,
    check_S1,
    compute_gain,
    select_vectors,
)
from .errors import (
    BoundViolation,
    DimensionMismatch,
    EmptySubspace,
    IllConditioned,
    IllPosedLoop,
    ImproperSection,
    OutOfBox,
    RssdError,
    UnstableSection,
)
from .lti import CompensatorBank, FrequencyGrid, PlantSet, StateSpacePlant, spectrum
from .margins import closed_loop, closed_loop_matrix, gsm, linf_norm
from .scp import BankTemplate, ScpConstraints, check_constraints, decode_bank, j1_fitness
from .vgap import central_plant

PENALTY = 1e18
JBAR_FLOOR = 1e-3  # keeps the feasibility test J2 < 1/J1bar satisfiable at eps=0


@dataclass(frozen=True)
class GaConfig:
    """Knobs of the real-coded GA; seed is mandatory for reproducibility."""

    population: int = 50
    max_generations: int = 100
    tournament: int = 3
    crossover_prob: float = 0.8
    blend_alpha: float = 0.5
    mutation_prob: float = 0.1
    mutation_scale: float = 0.1
    elites: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.population < 4:
            raise DimensionMismatch("population must be >= 4")
        for p in (self.crossover_prob, self.mutation_prob):
            if not 0.0 <= p <= 1.0:
                raise DimensionMismatch("probabilities must be in [0, 1]")
        if self.seed is None:
            raise DimensionMismatch("seed is required")


@dataclass
class GaResult:
    best_genes: np.ndarray
    best_fitness: float
    history: list
    generations: int


def ga_minimize(fitness, boxes, config: GaConfig, stop=None,
                init_population=None, generation_end=None) -> GaResult:
    """Box-constrained real-coded GA minimization.

    Elitism guarantees the best-so-far never worsens; runs are bit
    reproducible under a fixed seed.  ``stop`` is polled after every
    fitness evaluation so a caller can terminate mid-generation.
    """
    boxes = np.asarray(boxes, dtype=float)
    if boxes.ndim != 2 or boxes.shape[1] != 2 or boxes.size == 0:
        raise DimensionMismatch("boxes must be a nonempty (k, 2) array")
    lo, hi = boxes[:, 0], boxes[:, 1]
    k = boxes.shape[0]
    rng = np.random.default_rng(config.seed)

    if init_population is not None:
        pop = np.array(init_population, dtype=float)
    else:
        pop = rng.uniform(lo, hi, size=(config.population, k))

    best_genes, best_fit = None, np.inf
    history = []
    gens_done = 0

    for gen in range(config.max_generations):
        fits = np.empty(pop.shape[0])
        for i, genes in enumerate(pop):
            fits[i] = fitness(genes)
            if fits[i] < best_fit:
                best_fit = float(fits[i])
                best_genes = genes.copy()
            if stop is not None and stop():
                history.append(best_fit)
                return GaResult(best_genes, best_fit, history, gen + 1)
        gens_done = gen + 1
        history.append(best_fit)
        if generation_end is not None:
            generation_end()
            if stop is not None and stop():
                return GaResult(best_genes, best_fit, history, gens_done)

        order = np.argsort(fits, kind="stable")
        elites = pop[order[:config.elites]].copy()
        children = [*elites]
        while len(children) < pop.shape[0]:
            pa = _tournament(rng, fits, config.tournament)
            pb = _tournament(rng, fits, config.tournament)
            ca, cb = pop[pa].copy(), pop[pb].copy()
            if rng.random() < config.crossover_prob:
                ca, cb = _blend(rng, pop[pa], pop[pb], config.blend_alpha, lo, hi)
            for child in (ca, cb):
                _mutate(rng, child, config, lo, hi)
                if len(children) < pop.shape[0]:
                    children.append(child)
        pop = np.asarray(children)

    return GaResult(best_genes, best_fit, history, gens_done)


def _tournament(rng, fits, size):
    idx = rng.integers(0, fits.size, size=size)
    return idx[np.argmin(fits[idx])]


def _blend(rng, pa, pb, alpha, lo, hi):
    low = np.minimum(pa, pb)
    high = np.maximum(pa, pb)
    span = high - low
    a = low - alpha * span
    b = high + alpha * span
    ca = rng.uniform(a, b)
    cb = rng.uniform(a, b)
    return np.clip(ca, lo, hi), np.clip(cb, lo, hi)


def _mutate(rng, child, config, lo, hi):
    mask = rng.random(child.size) < config.mutation_prob
    noise = rng.normal(0.0, 1.0, size=child.size)
    child += mask * noise * config.mutation_scale * (hi - lo)
    np.clip(child, lo, hi, out=child)


# --- inner (eigenstructure) genome ------------------------------------------

@dataclass(frozen=True)
class RssdGenome:
    """Decoded inner-GA individual: desired eigenvalues and entry values."""

    eigenvalues: tuple
    entry_values: tuple


def rssd_boxes(target: EigTarget) -> np.ndarray:
    """Gene bound boxes for the eigenstructure search.

    Each mode is parametrized by natural frequency (and damping ratio for
    complex pairs), so every decode lands inside the admissible damping
    region by construction.
    """
    boxes = []
    for mode in target.modes:
        boxes.append((mode.wn_lo, mode.wn_hi))
        if mode.kind == "complex":
            boxes.append((target.zeta_min, 0.999))
        for e in mode.entries:
            boxes.append((e.re_lo, e.re_hi))
            if mode.kind == "complex":
                boxes.append((e.im_lo, e.im_hi))
    return np.asarray(boxes, dtype=float)


def decode_rssd_genome(genes, target: EigTarget) -> RssdGenome:
    genes = np.asarray(genes, dtype=float).ravel()
    eigenvalues, entry_values = [], []
    pos = 0
    for mode in target.modes:
        wn = genes[pos]
        pos += 1
        if mode.kind == "complex":
            zeta = genes[pos]
            pos += 1
            lam = complex(-zeta * wn, wn * np.sqrt(1.0 - zeta * zeta))
        else:
            lam = complex(-wn, 0.0)
        eigenvalues.append(lam)
        values = []
        for _ in mode.entries:
            re = genes[pos]
            pos += 1
            im = 0.0
            if mode.kind == "complex":
                im = genes[pos]
                pos += 1
            values.append(complex(re, im))
        entry_values.append(tuple(values))
    if pos != genes.size:
        raise DimensionMismatch("genome length does not match target layout")
    return RssdGenome(tuple(eigenvalues), tuple(entry_values))


def j2_fitness(p_cp: StateSpacePlant, genome: RssdGenome, target: EigTarget,
               grid: FrequencyGrid):
    """(J2, K) for one decoded genome, or (penalty, None) on any guard.

    Pipeline: allowable subspaces -> constrained vector selection ->
    K = W (CR)^(-1) under the condition-number guard -> full-spectrum
    damping-region check -> infinity norm of the 4-block operator.
    """
    if target.sigma_max is not None:
        if any(l.real > target.sigma_max for l in genome.eigenvalues):
            return PENALTY, None
    try:
        subs = [allowable_subspace(p_cp.A, p_cp.B, lam)
                for lam in genome.eigenvalues]
        W, R = select_vectors(subs, target, genome.entry_values)
        K = compute_gain(W, R, p_cp.C)
    except (EmptySubspace, BoundViolation, IllConditioned, np.linalg.LinAlgError):
        return PENALTY, None
    try:
        a_cl = closed_loop_matrix(p_cp, K)
    except np.linalg.LinAlgError:
        return PENALTY, None
    cl_plant = StateSpacePlant(a_cl, p_cp.B, p_cp.C, p_cp.D)
    ok, _ = check_S1(spectrum(cl_plant), target)
    if not ok:
        return PENALTY, None
    try:
        cl = closed_loop(p_cp, K)
    except IllPosedLoop:
        return PENALTY, None
    if not cl.stable:
        return PENALTY, None
    norm, _ = linf_norm(cl.realization, grid)
    if not np.isfinite(norm):
        return PENALTY, None
    return float(norm), K


# --- driver -----------------------------------------------------------------

@dataclass
class SynthesisReport:
    feasible: bool
    gain: np.ndarray | None
    w_in: CompensatorBank | None
    w_out: CompensatorBank | None
    j1_history: list
    j2: float | None
    cp_index: int | None
    desired_eigenvalues: tuple | None
    verification: dict
    plant_spectra: list
    scp_generations: int
    rssd_invocations: int
    rssd_generations: int
    seeds: dict


def verify_lemma(pset: PlantSet, w_in, w_out, K, p_cp, desired, target,
                 jbar, grid) -> dict:
    """Independent re-verification of the three feasibility conditions plus
    the explicit per-plant eigenvalue stability check."""
    from .lti import augment_plant

    a_cl = closed_loop_matrix(p_cp, K)
    cl_eigs = np.linalg.eigvals(a_cl)
    assigned_ok = all(
        np.min(np.abs(cl_eigs - lam)) < 1e-6 for lam in _with_conjugates(desired)
    )
    s1_ok, _ = check_S1(spectrum(StateSpacePlant(a_cl, p_cp.B, p_cp.C, p_cp.D)),
                        target)
    margin = gsm(p_cp, K, grid)
    margin_ok = margin > jbar
    all_stable = True
    for plant in pset:
        aug = augment_plant(w_out, plant, w_in)
        eigs = np.linalg.eigvals(closed_loop_matrix(aug, K))
        if eigs.size and not np.all(eigs.real < 0):
            all_stable = False
    return {
        "assigned_eigenvalues": bool(assigned_ok),
        "all_in_S1": bool(s1_ok),
        "margin_exceeds_bound": bool(margin_ok),
        "margin": float(margin),
        "all_plants_stable": bool(all_stable),
    }


def _with_conjugates(eigenvalues):
    out = []
    for lam in eigenvalues:
        out.append(lam)
        if lam.imag != 0.0:
            out.append(lam.conjugate())
    return out


def run_nn_rssd(pset: PlantSet, constraints: ScpConstraints, target: EigTarget,
                scp_cfg: GaConfig, rssd_cfg: GaConfig,
                grid: FrequencyGrid | None = None,
                per_generation: bool = False) -> SynthesisReport:
    """Full two-level synthesis; infeasibility is a report state, not an error."""
    grid = grid or FrequencyGrid.default()
    t_in = BankTemplate("in", pset.m)
    t_out = BankTemplate("out", pset.r)
    if len(constraints.in_boxes) != t_in.genes or len(constraints.out_boxes) != t_out.genes:
        raise DimensionMismatch("coefficient boxes do not match bank layout")

    jbar0 = max(central_plant(pset, grid).epsilon, JBAR_FLOOR)
    state = {
        "jbar": jbar0,
        "history": [],
        "found": False,
        "result": None,
        "invocations": 0,
        "rssd_gens": 0,
        "pending": None,  # per-generation mode: best candidate this generation
    }
    inner_boxes = rssd_boxes(target)

    def run_inner(p_cp, cp_idx, w_in, w_out):
        state["invocations"] += 1
        inner_seed = int(np.random.SeedSequence(
            [rssd_cfg.seed, state["invocations"]]).generate_state(1)[0])
        cfg = GaConfig(**{**rssd_cfg.__dict__, "seed": inner_seed})
        jbar = state["jbar"]
        hit = {}

        def inner_fitness(genes):
            genome = decode_rssd_genome(genes, target)
            j2, K = j2_fitness(p_cp, genome, target, grid)
            if K is not None and j2 < 1.0 / jbar and "K" not in hit:
                hit.update(j2=j2, K=K, genome=genome)
            return j2

        res = ga_minimize(inner_fitness, inner_boxes, cfg,
                          stop=lambda: "K" in hit)
        state["rssd_gens"] += res.generations
        if "K" in hit:
            state["found"] = True
            state["result"] = {
                "K": hit["K"], "j2": hit["j2"], "genome": hit["genome"],
                "w_in": w_in, "w_out": w_out, "p_cp": p_cp, "cp_index": cp_idx,
                "jbar": jbar,
            }

    def fire(candidate):
        j1, cp_idx, p_cp, w_in, w_out = candidate
        state["jbar"] = max(j1, JBAR_FLOOR)
        state["history"].append(state["jbar"])
        run_inner(p_cp, cp_idx, w_in, w_out)

    def scp_fitness(genes):
        genes = np.asarray(genes)
        try:
            w_in = decode_bank(genes[:t_in.genes], t_in, constraints.in_boxes)
            w_out = decode_bank(genes[t_in.genes:], t_out, constraints.out_boxes)
        except (OutOfBox, ImproperSection, UnstableSection):
            return 2.0
        report = check_constraints(w_in, w_out, pset, constraints, grid)
        if not report.passed:
            return 1.0 + len(report.reasons)
        j1, cp_idx, p_cp = j1_fitness(w_in, w_out, pset, grid)
        if j1 < state["jbar"]:
            candidate = (j1, cp_idx, p_cp, w_in, w_out)
            if per_generation:
                if state["pending"] is None or j1 < state["pending"][0]:
                    state["pending"] = candidate
            else:
                fire(candidate)
        return j1

    def on_generation_end():
        if per_generation and state["pending"] is not None and not state["found"]:
            cand, state["pending"] = state["pending"], None
            fire(cand)

    outer = ga_minimize(scp_fitness, np.asarray(constraints.boxes, float),
                        scp_cfg, stop=lambda: state["found"],
                        generation_end=on_generation_end if per_generation else None)

    seeds = {"scp": scp_cfg.seed, "rssd": rssd_cfg.seed}
    if not state["found"]:
        return SynthesisReport(
            feasible=False, gain=None, w_in=None, w_out=None,
            j1_history=state["history"], j2=None, cp_index=None,
            desired_eigenvalues=None, verification={},
            plant_spectra=[], scp_generations=outer.generations,
            rssd_invocations=state["invocations"],
            rssd_generations=state["rssd_gens"], seeds=seeds,
        )

    res = state["result"]
    verification = verify_lemma(
        pset, res["w_in"], res["w_out"], res["K"], res["p_cp"],
        res["genome"].eigenvalues, target, res["jbar"], grid,
    )
    feasible = all(v for k, v in verification.items() if k != "margin")

    from .lti import augment_plant

    plant_spectra = []
    for plant in pset:
        aug = augment_plant(res["w_out"], plant, res["w_in"])
        a_cl = closed_loop_matrix(aug, res["K"])
        plant_spectra.append(
            (plant.label, spectrum(StateSpacePlant(a_cl, aug.B, aug.C, aug.D)))
        )
    return SynthesisReport(
        feasible=feasible, gain=res["K"], w_in=res["w_in"], w_out=res["w_out"],
        j1_history=state["history"], j2=res["j2"], cp_index=res["cp_index"],
        desired_eigenvalues=res["genome"].eigenvalues,
        verification=verification, plant_spectra=plant_spectra,
        scp_generations=outer.generations,
        rssd_invocations=state["invocations"],
        rssd_generations=state["rssd_gens"], seeds=seeds,
    )
