from .pl import PLHomeo, compose as pl_compose, fixed_intervals, invert as pl_invert, power as pl_power
from .crossing import CrossWitness, PingPongCert, detect_crossed, pingpong_certificate, verify_certificate
from .measure import AtomicMeasure, MeasureNotPreserved, atom_orbit, orbit_measure, shift_map, translation_number
from .wreath import positive_words, wreath_pair, wreath_separation

__all__ = [
    "PLHomeo", "pl_compose", "pl_invert", "pl_power", "fixed_intervals",
    "CrossWitness", "PingPongCert", "detect_crossed", "pingpong_certificate", "verify_certificate",
    "AtomicMeasure", "MeasureNotPreserved", "atom_orbit", "orbit_measure", "shift_map", "translation_number",
    "positive_words", "wreath_pair", "wreath_separation",
]
