"""Typed probabilistic parsing of formal mathematical expressions."""
__version__ = "0.1.0"

from .chart import ParseResult, PruningHook, cyk_kbest, cyk_viterbi
from .errors import FormalParseError
from .experiment import AmbiguationSpec, ExperimentConfig, ambiguate, run_experiment, split_corpus
from .infer import infer, insert_coercions
from .pcfg import Grammar, Rule, binarize_tree, debinarize_tree, induce, unary_closure
from .pruning import typed_pruning_hook
from .sexpr import RawTree, parse_sexpr, render_sexpr, tree_yield
from .signature import Signature, load_signature, parse_signature
from .terms import Abs, App, Const, Var, alpha_equal, erase_casts
from .treebank import label_with_types, load_treebank, term_of_labeled_tree
from .types import TCon, TVar, unify

__all__ = [
    "Abs", "AmbiguationSpec", "App", "Const", "ExperimentConfig", "FormalParseError", "Grammar",
    "ParseResult", "PruningHook", "RawTree", "Rule", "Signature", "TCon", "TVar", "Var",
    "alpha_equal", "ambiguate", "binarize_tree", "cyk_kbest", "cyk_viterbi", "debinarize_tree",
    "erase_casts", "induce", "infer", "insert_coercions", "label_with_types", "load_signature",
    "load_treebank", "parse_sexpr", "parse_signature", "render_sexpr", "run_experiment",
    "split_corpus", "term_of_labeled_tree", "tree_yield", "typed_pruning_hook", "unary_closure",
    "unify",
]
