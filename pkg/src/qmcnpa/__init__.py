"""Moment (NPA) relaxations for Quantum Max Cut.

Modules
-------
graph        weighted graphs, named families, graph6, canonical forms
algebra      exact singlet-projector and Pauli algebra
npa          level-1/2 moment-matrix programs, symmetry reduction, validators
sdp          sparse block SDP model, interior-point solver, SDPA format
oracle       exact diagonalization and closed-form maximum eigenvalues
certs        analytic sum-of-squares certificates and moment fixtures
experiments  exactness classification, scans and correlation functions
cli          command-line interface
"""
from .graph import (CapabilityError, Graph6Error, GraphFamilySpec, ParameterError,
                    WeightedGraph, canonical_id, enumerate_connected, make_family,
                    parse_family, parse_graph6, to_graph6)
from .algebra import ProjPoly, PauliTerm, multiply, reduce_word, to_matrix
from .npa import MomentProblem, build, symmetry_reduce_circulant, validate_solution
from .sdp import SdpProblem, SdpSolution, export_sdpa, parse_sdpa, solve
from .oracle import exact_max_eigenvalue, known_value, swap_value
from .certs import (SosCertificate, check_certificate, make_certificate, make_fixture,
                    verify_certificate, verify_fixture)
from .experiments import (chain_correlation, classify, exhaustive_scan, model_scan, relax,
                          weight_scan)

__version__ = "0.1.0"

__all__ = [
    "CapabilityError", "Graph6Error", "GraphFamilySpec", "ParameterError", "WeightedGraph",
    "canonical_id", "enumerate_connected", "make_family", "parse_family", "parse_graph6",
    "to_graph6", "ProjPoly", "PauliTerm", "multiply", "reduce_word", "to_matrix",
    "MomentProblem", "build", "symmetry_reduce_circulant", "validate_solution", "SdpProblem",
    "SdpSolution", "export_sdpa", "parse_sdpa", "solve", "exact_max_eigenvalue", "known_value", "swap_value",
    "SosCertificate", "check_certificate", "make_certificate", "make_fixture",
    "verify_certificate", "verify_fixture", "chain_correlation", "classify", "exhaustive_scan",
    "model_scan", "relax", "weight_scan",
]
