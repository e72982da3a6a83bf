"""Structural consensus analysis for single-integrator multi-agent systems."""

from .certificate import Certificate, CertificateConfig, Conclusion, build_certificate
from .decomposition import Decomposition, StructureClass, decompose, verify_decomposition
from .dynamics import Trajectory, consensus_verdict, simulate_linear
from .graph import DiGraph, build_laplacian, extract_spanning_tree, parse_graph, spanning_roots
from .spectral import consensus_value_oracle, is_hurwitz, spectrum

__all__ = [
    "Certificate",
    "CertificateConfig",
    "Conclusion",
    "Decomposition",
    "DiGraph",
    "StructureClass",
    "Trajectory",
    "build_certificate",
    "build_laplacian",
    "consensus_value_oracle",
    "consensus_verdict",
    "decompose",
    "extract_spanning_tree",
    "is_hurwitz",
    "parse_graph",
    "simulate_linear",
    "spanning_roots",
    "spectrum",
    "verify_decomposition",
]
