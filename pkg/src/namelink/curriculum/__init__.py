"""Training-corpus construction for the two-phase curriculum."""

from .augment import AugmentRates, augment_all, augment_permute, augment_space_removal, augment_swap
from .corpus import Corpus, Label, LabeledPair, Provenance, Split, read_corpus, write_corpus
from .disjoint import enforce_disjointness, name_keys
from .prompts import PromptTemplate, default_template, render_prompt
from .synth import CATEGORIES, DEFAULT_MIX, synth_corpus
from .training_files import build_phase1_file, build_phase2_file

__all__ = [
    "AugmentRates",
    "augment_all",
    "augment_permute",
    "augment_space_removal",
    "augment_swap",
    "Corpus",
    "Label",
    "LabeledPair",
    "Provenance",
    "Split",
    "read_corpus",
    "write_corpus",
    "enforce_disjointness",
    "name_keys",
    "PromptTemplate",
    "default_template",
    "render_prompt",
    "CATEGORIES",
    "DEFAULT_MIX",
    "synth_corpus",
    "build_phase1_file",
    "build_phase2_file",
]
