"""Synthetic signal corpora: ECG records and glyph images."""
from .ecg import EcgParams, ecg_generate, ecg_generate_batch, sample_ecg_params
from .gabor import GaborDictionary, build_gabor_dictionary
from .glyphs import GlyphImage, render_glyph, subgrid_correlation
from .psd import average_psd
