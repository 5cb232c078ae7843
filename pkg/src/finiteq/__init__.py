"""Second-order quantifier toolkit over finite universes.

Invariants (minimum supports, type counts), verified decompositions
(monadic and injective cores, unary-function encodings), a formula
evaluator with second-order quantifiers over relation families, and
certificate-producing interpretability checks.
"""

__version__ = "1.0.0"

from .core import (EquivalenceRelation, PartialInjection, Relation, Universe,
                   approx_eq, canonical_form, equality_pattern,
                   identity_extension, isomorphic, sum_relations,
                   swap_permutation, tp_bs, type_space)
from .decompose import (DefinableSupport, DistinguishingSystem, EquivInjection,
                        InjCore, InjInterpretation, MonadicCore,
                        MonadicExtraction, NAryEncoding,
                        TypeEquivalenceSupport, build_type_equivalence,
                        decode_nary, definable_support, distinguishing_system,
                        encode_nary, inj_decompose, inj_from_equiv,
                        inj_reconstruct, interpret_injection,
                        monadic_core, monadic_extraction, monadic_reconstruct,
                        type_equivalence_support)
from .errors import (ArityError, BudgetExceededError, ConstructionBugError,
                     FormulaParseError, PreconditionError, RangeError,
                     RelationFileError, ToolkitError, UnboundVariableError)
from .evaluate import defined_set, defines_relation, eval_formula
from .families import (EqFamily, ExplicitFamily, InjFamily, IsoClosureFamily,
                       MonFamily, NAryFamily, OrdFamily, QuantifierFamily,
                       SizeConstraint, TrivialFamily, parse_family_spec)
from .formulas import (Formula, format_formula, free_variables,
                       is_first_order, parse_formula, substitute)
from .interpret import (InterpretationCertificate, InterpretationResult,
                        SearchResult, check_definable, check_expressibility,
                        check_interpretation, compose_interpretations,
                        search_interpretation)
from .invariants import (SupportWitness, TypeCountWitness, greedy_type_set,
                         is_support, is_support_definitional, lambda0,
                         lambda0_K, lambda0_prime, lambda1, lambda1_K,
                         min_vertex_cover, mu_K, nu_ge, uq)
from .relfile import (RelationFile, format_relation_file, parse_relation_file,
                      read_relation_file)
from .report import Report, jsonable, write_report
