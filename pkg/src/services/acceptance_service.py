"""Suite de aceptación: criterios basados en propiedades y oráculos a escala de escritorio."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple
from uuid import uuid4

import numpy as np

from src.config.settings import get_settings
from src.core.ff_core import FieldFunction, primes_up_to, sphere_decay
from src.core.forms import (
    ConfigurationSpace,
    EdgeFunctionFamily,
    counting_gap,
    eval_M,
    eval_N,
    fourier_count_d1,
    gowers_cs_check,
    indicator_family,
    point_tensor,
    random_family,
)
from src.core.hypergraph import BundleSpec, enumerate_bundle
from src.core.lattice import (
    GridCube,
    LatticeSet,
    ScaleSequence,
    SimplexSpec,
    brute_force_copies,
    count_asymptotic_scan,
    density_increment,
    enumerate_copies,
    eval_N1_lattice,
    guaranteed_levels,
    kvn_grid_decompose,
    u1_norm,
    uniformity_test,
)
from src.core.regularity import cond_exp, iteration_cap, weak_regularize, witness_threshold
from src.services.generators import SetGenerator
from src.services.run_registry_service import RunRegistryService
from src.utils.logging import get_logger

logger = get_logger(__name__)

SELECTORS: Dict[str, Tuple[int, ...]] = {
    "ff": (1, 2, 3, 4, 5, 6),
    "lattice": (7, 8, 9, 10),
    "all": tuple(range(1, 11)),
}


@dataclass
class CriterionResult:
    number: int
    name: str
    measured: str
    threshold: str
    passed: bool
    runtime_s: float = 0.0


@dataclass
class AcceptanceReport:
    suite_id: str
    selector: str
    results: List[CriterionResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(result.passed for result in self.results)

    @property
    def failures(self) -> List[CriterionResult]:
        return [result for result in self.results if not result.passed]


class AcceptanceService:
    """Ejecutar los criterios de aceptación y registrar sus veredictos."""

    def __init__(self, registry: Optional[RunRegistryService] = None, seed: int = 20240601):
        self.settings = get_settings()
        self.seed = seed
        self._registry = registry
        self._criteria: Dict[int, Tuple[str, Callable[[], Tuple[str, str, bool]]]] = {
            1: ("Identidad de conteo de Fourier (d=1)", self.fourier_identity),
            2: ("Envolvente de decaimiento de esferas", self.sphere_envelope),
            3: ("Cota inferior incondicional de ℳ", self.m_lower_bound),
            4: ("Gowers–Cauchy–Schwarz", self.gowers_cauchy_schwarz),
            5: ("Convergencia del lema de conteo", self.counting_convergence),
            6: ("Algoritmo de regularidad", self.regularity_algorithm),
            7: ("Oráculo de enumeración en la red", self.enumeration_oracle),
            8: ("Estabilidad del conteo asintótico", self.asymptotic_stability),
            9: ("Obstrucción de congruencia", self.congruence_obstruction),
            10: ("Incremento de densidad y uniformidad", self.increment_and_uniformity),
        }

    @property
    def registry(self) -> Optional[RunRegistryService]:
        if self._registry is None and self.settings.record_runs:
            self._registry = RunRegistryService()
        return self._registry

    def _rng(self, offset: int) -> np.random.Generator:
        return SetGenerator(self.seed + offset, self.settings.rng_algorithm).rng

    def criteria_for(self, selector: str) -> Tuple[int, ...]:
        if selector not in SELECTORS:
            raise ValueError(f"Selector desconocido: {selector} (use ff, lattice o all)")
        return SELECTORS[selector]

    def run_criterion(self, number: int) -> CriterionResult:
        name, check = self._criteria[number]
        logger.info(f"Criterio {number}: {name}")
        started = time.perf_counter()
        try:
            measured, threshold, passed = check()
        except Exception as e:
            logger.error(f"Error al ejecutar criterio {number}: {e}")
            measured, threshold, passed = f"error: {e}", "-", False
        return CriterionResult(
            number=number,
            name=name,
            measured=measured,
            threshold=threshold,
            passed=passed,
            runtime_s=time.perf_counter() - started,
        )

    def run(self, selector: str = "all") -> AcceptanceReport:
        report = AcceptanceReport(suite_id=str(uuid4()), selector=selector)
        for number in self.criteria_for(selector):
            report.results.append(self.run_criterion(number))

        registry = self.registry
        if registry is not None:
            try:
                registry.record_acceptance(report.suite_id, report.results)
            except Exception as e:
                logger.warning(f"No se pudieron registrar los resultados: {e}")

        logger.info(f"Suite {selector}: {len(report.results) - len(report.failures)}/{len(report.results)} criterios")
        return report

    # Criterios de F_q

    def fourier_identity(self) -> Tuple[str, str, bool]:
        rng = self._rng(1)
        spec = BundleSpec.rectangles(1)
        first, second = enumerate_bundle(spec)
        worst = 0.0
        for q in (3, 5, 7, 11):
            for _ in range(20):
                t = int(rng.integers(1, q))
                f1 = FieldFunction.random_uniform(q, 2, rng)
                f2 = FieldFunction.random_uniform(q, 2, rng)
                fam = EdgeFunctionFamily(spec=spec, q=q, functions={first: f1, second: f2})
                direct = eval_N(ConfigurationSpace(q=q, d=1, t=(t,)), fam)
                worst = max(worst, abs(direct - fourier_count_d1(q, t, f1, f2)))
        return f"max |𝒩 − Fourier| = {worst:.3e}", "≤ 1e-9", worst <= 1e-9

    def sphere_envelope(self) -> Tuple[str, str, bool]:
        decay, mean = 0.0, 0.0
        for q in primes_up_to(101):
            for t in range(1, q):
                result = sphere_decay(q, t)
                decay = max(decay, result.max_decay_const)
                mean = max(mean, result.mean_deviation)
        measured = f"max|σ̂|·√q = {decay:.4f}, |𝔼σ−1|·√q = {mean:.4f}"
        return measured, "≤ 3.0 ambos", decay <= 3.0 and mean <= 3.0

    def m_lower_bound(self) -> Tuple[str, str, bool]:
        generator = SetGenerator(self.seed + 3, self.settings.rng_algorithm)
        failures, margin = 0, math.inf
        for i in range(100):
            d = (1, 2)[i % 2]
            q = (3, 5, 7)[(i // 2) % 3]
            density = float(generator.rng.uniform(0.05, 0.95))
            subset = generator.ff_random_subset(q, d, density)
            value = eval_M(indicator_family(BundleSpec.rectangles(d), q, subset))
            bound = float(subset.mean()) ** (2**d)
            margin = min(margin, value - bound)
            if value < bound - 1e-12:
                failures += 1
        return f"fallos = {failures}, margen mínimo = {margin:.3e}", "0 fallos", failures == 0

    def gowers_cauchy_schwarz(self) -> Tuple[str, str, bool]:
        rng = self._rng(4)
        spec = BundleSpec.rectangles(2)
        failures, slack = 0, math.inf
        for i in range(100):
            q = (3, 5)[i % 2]
            fam = random_family(spec, q, rng, kind=("uniform", "signs")[(i // 2) % 2])
            check = gowers_cs_check(fam)
            slack = min(slack, check.rhs - check.lhs)
            if not check.holds:
                failures += 1
        return f"fallos = {failures}, holgura mínima = {slack:.3e}", "0 fallos", failures == 0

    def counting_convergence(self) -> Tuple[str, str, bool]:
        generator = SetGenerator(self.seed + 5, self.settings.rng_algorithm)
        q_values = [q for q in (5, 7, 11, 13, 17) if q <= self.settings.ff_max_q]
        scaled = []
        for q in q_values:
            subset = generator.ff_random_subset(q, 2, 0.5)
            gap = counting_gap(ConfigurationSpace(q=q, d=2, t=(1, 1)), subset).gap
            scaled.append(gap * math.sqrt(q))

        last, others = scaled[-1], max(scaled[:-1])
        values = ", ".join(f"{q}:{v:.4f}" for q, v in zip(q_values, scaled))
        return f"gap·√q = {values}", "último ≤ 1.25·máx(resto)", last <= 1.25 * others

    def regularity_algorithm(self) -> Tuple[str, str, bool]:
        rng = self._rng(6)
        spec = BundleSpec.rectangles(2)
        q, eps = 7, 0.25
        min_gain = witness_threshold(2, eps) ** 2
        worst_residual, max_iterations, ok = 0.0, 0, True

        for _ in range(10):
            fam = random_family(spec, q, rng, kind="signs")
            result = weak_regularize(fam, eps)
            cap = iteration_cap(len(fam.edges), 2, eps)
            max_iterations = max(max_iterations, result.iterations)
            ok &= result.iterations <= cap

            for edge in fam.edges:
                base = edge.projection()
                residual = point_tensor(fam[edge] - cond_exp(fam[edge], result.system, base))
                # ‖g‖_□⁴ = ‖GᵀG‖_F² / N⁴
                size = residual.shape[0]
                norm = max(float(np.sum((residual.T @ residual) ** 2)), 0.0) ** 0.25 / size
                worst_residual = max(worst_residual, norm)

            ok &= all(step.gain >= min_gain - 1e-12 for step in result.steps)

        ok &= worst_residual <= eps
        measured = f"iteraciones máx = {max_iterations}, residuo máx = {worst_residual:.4f}"
        return measured, f"residuo ≤ {eps}, ganancia ≥ {min_gain:.3e}", bool(ok)

    # Criterios del retículo

    def enumeration_oracle(self) -> Tuple[str, str, bool]:
        discrepancies = 0
        cases = [(SimplexSpec.segment(5), range(1, 10)), (SimplexSpec.orthonormal(5, 3), range(1, 5))]
        for spec, values in cases:
            for lambda2 in values:
                fast = sorted(enumerate_copies(spec, lambda2))
                naive = brute_force_copies(spec, lambda2)
                if fast != naive:
                    discrepancies += 1
                    logger.warning(f"Discrepancia k={spec.k} λ²={lambda2}: {len(fast)} vs {len(naive)}")
        return f"discrepancias = {discrepancies}", "0", discrepancies == 0

    def asymptotic_stability(self) -> Tuple[str, str, bool]:
        scan = count_asymptotic_scan(SimplexSpec.segment(5), range(4, 401))
        normalized = scan.table["normalized"]
        ratio = float(normalized.max() / normalized.min())
        return f"max/min = {ratio:.4f} (ρ̂ = {scan.rho_hat:.4f})", "≤ 4", ratio <= 4.0

    def congruence_obstruction(self) -> Tuple[str, str, bool]:
        window = GridCube.origin(5, 8)
        subset = LatticeSet.congruence_class(window, 2)
        points = subset.points()
        norms = np.einsum("ij,ij->i", points, points)
        distances = norms[:, None] + norms[None, :] - 2 * points @ points.T
        all_even = bool(np.all(distances % 4 == 0))

        spec = SimplexSpec.segment(5)
        indicator = subset.indicator()
        counts = [eval_N1_lattice(spec, lambda2, window, [indicator, indicator]) for lambda2 in (1, 3, 5)]
        worst = max(abs(c) for c in counts)
        measured = f"|x−y|² ≡ 0 mod 4: {all_even}, max 𝒩¹ (λ² impar) = {worst}"
        return measured, "todas ≡ 0 y 𝒩¹ = 0 exacto", all_even and worst == 0.0

    def increment_and_uniformity(self) -> Tuple[str, str, bool]:
        # (a) (2ℤ)⁵ con módulo sustituto 2
        even = LatticeSet.congruence_class(GridCube.origin(5, 8), 2)
        report = uniformity_test(even, 0.5, 2)
        even_result = density_increment(even, 0.5, 2)
        part_a = (
            report.worst_residue == (0,) * 5
            and report.max_relative_density == 1.0
            and abs(report.overall_density - 1 / 32) < 1e-12
            and not report.is_uniform
            and even_result.steps == 1
            and even_result.final_set.density == 1.0
        )

        # (b) 90% concentrado en una clase mod 3
        generator = SetGenerator(self.seed + 10, self.settings.rng_algorithm)
        concentrated = generator.congruence_class(GridCube.origin(1, 300), 3, (0,), 0.9)
        mod3 = density_increment(concentrated, 0.5, 3)
        ratio = mod3.final_set.density / concentrated.density
        part_b = mod3.steps == 1 and ratio >= 2.7

        planar = generator.congruence_class(GridCube.origin(2, 30), 3, (0, 0), 0.9)
        planar_result = density_increment(planar, 0.5, 3)
        planar_ratio = planar_result.final_set.density / planar.density
        part_b = part_b and planar_result.steps == 1 and planar_ratio >= 2.7

        # (c) conjunto adversario a dos escalas
        eps = 0.2
        window = GridCube.origin(1, 80000)
        table = 1.0 - 2.0 * ((np.arange(80000) // 800) % 2)
        scales = ScaleSequence(eps=eps, q0=1, q1=2, scales=(8_000_000, 80000, 800, 8))
        decomposition = kvn_grid_decompose(table, window, eps, scales, enforce_guarantee=False)
        part_c = False
        recheck = float("nan")
        if decomposition.succeeded and decomposition.cond_exp is not None:
            level = decomposition.level or 0
            recheck = u1_norm(
                table - decomposition.cond_exp, window, scales.modulus(level + 1), scales.scales[level + 1]
            )
            part_c = level == 2 and recheck <= eps and level <= guaranteed_levels(eps)

        measured = (
            f"(a) residuo {report.worst_residue} δ_rel={report.max_relative_density:.3f} "
            f"pasos={even_result.steps}; (b) razón n=1 {ratio:.3f}, n=2 {planar_ratio:.3f}; "
            f"(c) nivel={decomposition.level} U¹={recheck:.4f}"
        )
        return measured, "(a) 1 paso a δ=1; (b) ≥ 2.7; (c) nivel 2, U¹ ≤ 0.2", part_a and part_b and part_c
