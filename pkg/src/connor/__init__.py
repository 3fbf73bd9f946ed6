"""Encrypted approximate constrained shortest distance queries.

Layers, bottom up: :mod:`connor.graph` (directed graphs with distance and
cost per arc), :mod:`connor.oracle` (exact bicriteria search),
:mod:`connor.labeling` (the 2-hop labeling index), :mod:`connor.crypto`
(PRFs, ORE, SWHE backends), :mod:`connor.tree` (the encrypted cost
comparison), :mod:`connor.secure_index` and :mod:`connor.query` (the
client/server protocol). :mod:`connor.harness` holds the service,
keystore and evaluation code.
"""
from .graph import Edge, Graph, GraphError, WeightSpec, parse_edge_list, synthesize_weights
from .labeling import LabelIndex, build_index, plain_query
from .oracle import CsdQuery, exact_csd
from .query import gen_token, recover_distance, server_query
from .secure_index import ClientKeys, EncryptedIndex, keygen, params_for, setup

__version__ = "0.1.0"

__all__ = [
    "ClientKeys", "CsdQuery", "Edge", "EncryptedIndex", "Graph", "GraphError", "LabelIndex", "WeightSpec",
    "build_index", "exact_csd", "gen_token", "keygen", "params_for", "parse_edge_list", "plain_query",
    "recover_distance", "server_query", "setup", "synthesize_weights",
]
