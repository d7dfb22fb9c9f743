"""
Factory for building benchmark problems by name.

Each builder takes the benchmark section of a run manifest plus the cache
directory and returns a BenchmarkSpec.
"""

import logging
from typing import Callable, Dict, List

from ..config import BenchmarkSettings
from ..exceptions import ConfigurationError
from .allen_cahn import allen_cahn_problem
from .base import BenchmarkSpec, CacheDir
from .burgers import burgers_problem
from .eikonal import eikonal_problem
from .elliptic import elliptic_problem
from .poisson import poisson_problem

logger = logging.getLogger(__name__)

Builder = Callable[[BenchmarkSettings, CacheDir], BenchmarkSpec]


def _burgers(settings: BenchmarkSettings, cache_dir: CacheDir) -> BenchmarkSpec:
    nu = 0.02 if settings.nu is None else settings.nu
    return burgers_problem(nu, quad_nodes=settings.quad_nodes)


def _elliptic(settings: BenchmarkSettings, cache_dir: CacheDir) -> BenchmarkSpec:
    return elliptic_problem()


def _eikonal(settings: BenchmarkSettings, cache_dir: CacheDir) -> BenchmarkSpec:
    eps = 0.1 if settings.eps is None else settings.eps
    return eikonal_problem(eps, cache_dir=cache_dir)


def _allen_cahn(settings: BenchmarkSettings, cache_dir: CacheDir) -> BenchmarkSpec:
    a = 15.0 if settings.a is None else settings.a
    return allen_cahn_problem(a, gamma=settings.gamma, power=settings.power)


def _poisson(settings: BenchmarkSettings, cache_dir: CacheDir) -> BenchmarkSpec:
    return poisson_problem()


class BenchmarkFactory:
    """Registry of benchmark builders."""

    _benchmarks: Dict[str, Builder] = {
        "burgers": _burgers,
        "elliptic": _elliptic,
        "eikonal": _eikonal,
        "allen_cahn": _allen_cahn,
        "poisson": _poisson,
    }

    @classmethod
    def create(
        cls, settings: BenchmarkSettings, cache_dir: CacheDir = None
    ) -> BenchmarkSpec:
        """
        Build the benchmark named in ``settings``.

        Raises:
            ConfigurationError: unknown benchmark, or a domain the benchmark
                does not support
        """
        if settings.name not in cls._benchmarks:
            available = ", ".join(cls.get_available_benchmarks())
            raise ConfigurationError(
                f"Unsupported benchmark: {settings.name}. "
                f"Available benchmarks: {available}"
            )
        spec = cls._benchmarks[settings.name](settings, cache_dir)
        if settings.domain not in spec.domains:
            raise ConfigurationError(
                f"{spec.name} does not support the '{settings.domain}' domain. "
                f"Available domains: {', '.join(spec.domains)}"
            )
        logger.debug(f"benchmarks.factory - Created {spec.label}")
        return spec

    @classmethod
    def by_name(cls, name: str, cache_dir: CacheDir = None, **params) -> BenchmarkSpec:
        """Shorthand for ``create`` with keyword settings."""
        return cls.create(BenchmarkSettings(name=name, **params), cache_dir)

    @classmethod
    def register_benchmark(cls, name: str, builder: Builder) -> None:
        cls._benchmarks[name] = builder

    @classmethod
    def get_available_benchmarks(cls) -> List[str]:
        return list(cls._benchmarks.keys())

    @classmethod
    def is_benchmark_available(cls, name: str) -> bool:
        return name in cls._benchmarks


__all__ = ["Builder", "BenchmarkFactory"]
