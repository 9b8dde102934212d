"""Hadamard MSR codes with cooperative repair of multiple failures from k + 1 helpers."""
from .cluster import Cluster, RepairReport, TransferRecord, optimal_bandwidth
from .code import CodeParams, Codeword, Shard, encode, lambda_at, make_params, mds_reconstruct, verify_codeword
from .errors import (CoopMSRError, FieldMismatchError, ParameterError, ProtocolError,
                     ShardFormatError, SingularMatrixError)
from .gf import FieldElement, PrimeField, is_primitive, solve_vandermonde_like
from .grouping import (Divisible, NonDivisible, RepairScenario, build_plan, classify,
                       helper_selection, make_scenario)
from .hamming import StandardArray, hamming_codewords, standard_array
from .repair import cooperative_repair

__version__ = "0.1.0"
