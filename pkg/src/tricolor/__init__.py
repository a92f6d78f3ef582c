"""Tricolor DAGs: feature structures whose nodes and arcs carry red, yellow or
green constraint strength, with transfer operations, constraint partitions
and a generator that respects the colors."""

__version__ = "0.1.0"

from tricolor.core import (
    Arc, BuildError, Color, Failure, IllFormedError, Indefinite, Node, Tdag, TdagError, Unified, Violation,
    build, check_well_formed, color_subsumes, iso_equal, is_well_formed, red_core, saturate, subsumes,
    unify, unify_colors,
)
from tricolor.dot import export_dot
from tricolor.generator import (
    Derivation, GenFailure, GenReport, Mark, Success, TerminationReport, check_termination, generate,
    iter_derivations, verify_sandwich,
)
from tricolor.grammar import Grammar, Rule, analyze, load_grammar, parse_grammar, serialize_grammar
from tricolor.partition import Constraint, PartitionReport, Verdict, classify, extract_constraints, score
from tricolor.textformat import load_tdag, parse_tdag, serialize_tdag
from tricolor.transfer import (
    AddGreenArc, AddGreenNode, AddYellowArc, AddYellowNode, PaintRedToYellow, PaintYellowToGreen,
    StrategyTable, TransferTrace, apply_op, can_paint, enumerate_ops, plan_transfer,
)
