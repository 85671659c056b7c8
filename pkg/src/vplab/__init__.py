"""Finite experiments on set-coded first-order logic, structure embeddings,
twisted membership and truncated permutation models."""

__version__ = "0.1.0"

from .errors import FormulaError, GuardExceeded, ParseError, StructureError, VplabError
from .hf import (EMPTY, Atom, HSet, TupleSpace, as_nat, canon, cart, first, format_hset, hset,
                 is_nat, is_ord, is_succ, is_transitive, kpair, nat, parse_hset, second,
                 tuple_space, unpair)
from .syntax import (FormulaCode, Language, check_fml, decode, encode, enum_formulas,
                     format_formula, fv, parse_formula)
from .sat import (Structure, evaluate, parse_structure, sat, sat_oracle, sentence_holds)
from .morphisms import (Morphism, ef_game, enumerate_morphisms, find_rigid, is_k_elementary,
                        is_rigid)

__all__ = [
    "EMPTY", "Atom", "HSet", "TupleSpace", "as_nat", "canon", "cart", "first", "format_hset",
    "hset", "is_nat", "is_ord", "is_succ", "is_transitive", "kpair", "nat", "parse_hset",
    "second", "tuple_space", "unpair",
    "FormulaCode", "Language", "check_fml", "decode", "encode", "enum_formulas",
    "format_formula", "fv", "parse_formula",
    "Structure", "evaluate", "parse_structure", "sat", "sat_oracle", "sentence_holds",
    "Morphism", "ef_game", "enumerate_morphisms", "find_rigid", "is_k_elementary", "is_rigid",
    "FormulaError", "GuardExceeded", "ParseError", "StructureError", "VplabError",
]
