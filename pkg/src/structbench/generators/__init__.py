"""Baseline tabular generators and ingestion of external synthetic data."""

from typing import Callable

from ..data.table import DataTable
from .bayesnet import BnFitConfig, bn_fit, bn_generate, discretise, gen_bayes_net
from .ingest import external_path, ingest_synthetic, ingest_synthetic_file
from .marginal import gen_marginal
from .request import DEFAULT_RATIO, GenRequest, allocate
from .smote import DEFAULT_K, gen_smote

BUILTIN: dict[str, Callable[[GenRequest], DataTable]] = {
    "bayes_net": gen_bayes_net,
    "marginal": gen_marginal,
    "smote": gen_smote,
}


def generate(name: str, req: GenRequest) -> DataTable:
    try:
        gen = BUILTIN[name]
    except KeyError:
        raise ValueError(f"unknown generator {name!r}; built-ins are {sorted(BUILTIN)}") from None
    return gen(req)


__all__ = [
    "BUILTIN",
    "BnFitConfig",
    "DEFAULT_K",
    "DEFAULT_RATIO",
    "GenRequest",
    "allocate",
    "bn_fit",
    "bn_generate",
    "discretise",
    "external_path",
    "gen_bayes_net",
    "gen_marginal",
    "gen_smote",
    "generate",
    "ingest_synthetic",
    "ingest_synthetic_file",
]
